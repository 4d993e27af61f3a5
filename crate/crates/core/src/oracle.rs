//! Offline optima: a dense revised simplex plus the LP assemblies and a
//! brute-force search for small integral facility-location instances.
//!
//! Duals follow the convention for minimisation: a `>=` row has a
//! nonnegative multiplier and a `<=` row a nonpositive one, so that
//! `objective = Σ rhs_i · dual_i` at optimality. Maximisation problems are
//! solved as the minimisation of the negated objective and their duals are
//! reported with the signs flipped back (so `<=` rows get nonnegative duals).

use crate::ccfl::{candidate_facilities, CcflInstance};
use crate::penalty::{CoveringRow, PackingSystem};
use crate::{Error, Result};

const FEASIBILITY_TOL: f64 = 1e-8;
const PIVOT_TOL: f64 = 1e-10;
const OPTIMALITY_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A dense LP over nonnegative variables with optional upper bounds.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub objective: Objective,
    pub cost: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

impl LpProblem {
    pub fn new(objective: Objective, cost: Vec<f64>) -> Self {
        let n = cost.len();
        Self {
            objective,
            cost,
            rows: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
            upper: vec![None; n],
        }
    }

    pub fn vars(&self) -> usize {
        self.cost.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.rows.push(coeffs);
        self.senses.push(sense);
        self.rhs.push(rhs);
        self
    }

    /// Adds a row given as `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, entries: &[(usize, f64)], sense: Sense, rhs: f64) -> &mut Self {
        let mut row = vec![0.0; self.vars()];
        for &(j, v) in entries {
            row[j] += v;
        }
        self.add_row(row, sense, rhs)
    }

    pub fn set_upper(&mut self, var: usize, bound: f64) -> &mut Self {
        self.upper[var] = Some(bound);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.vars();
        if self.senses.len() != self.rows.len() || self.rhs.len() != self.rows.len() || self.upper.len() != n {
            return Err(Error::Structural("inconsistent LP dimensions".into()));
        }
        for (k, row) in self.rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Structural(format!("row {k} has {} coefficients, expected {n}", row.len())));
            }
        }
        let finite = self
            .cost
            .iter()
            .chain(self.rows.iter().flatten())
            .chain(&self.rhs)
            .chain(self.upper.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("LP has non-finite data".into()));
        }
        if self.upper.iter().flatten().any(|&u| u < 0.0) {
            return Err(Error::Domain("negative upper bound".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// One multiplier per constraint row.
    pub duals: Vec<f64>,
    /// One multiplier per variable; zero where no upper bound is set.
    pub upper_duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Working state of the standard-form problem `A x = b, x >= 0`.
struct Tableau {
    /// Column-major standard-form matrix.
    cols: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.b.len()
    }

    fn ftran(&self, col: &[f64]) -> Vec<f64> {
        let m = self.rows();
        (0..m)
            .map(|r| self.binv[r].iter().zip(col).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.rows();
        let mut pi = vec![0.0; m];
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = cost[bv];
            if cb != 0.0 {
                for (p, v) in pi.iter_mut().zip(&self.binv[r]) {
                    *p += cb * v;
                }
            }
        }
        pi
    }

    /// Rebuilds `B⁻¹` and `x_B` by Gauss-Jordan elimination.
    fn refactor(&mut self) -> Result<()> {
        let m = self.rows();
        let mut a: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let mut row: Vec<f64> = self.basis.iter().map(|&c| self.cols[c][r]).collect();
                row.extend((0..m).map(|k| if k == r { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&p, &q| a[p][c].abs().total_cmp(&a[q][c].abs()))
                .expect("nonempty range");
            if a[piv][c].abs() < 1e-13 {
                return Err(Error::Structural("singular basis during refactor".into()));
            }
            a.swap(c, piv);
            let d = a[c][c];
            for v in a[c].iter_mut() {
                *v /= d;
            }
            let pivot_row = a[c].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != c && row[c] != 0.0 {
                    let f = row[c];
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
        self.binv = a.into_iter().map(|row| row[m..].to_vec()).collect();
        self.xb = self.ftran(&self.b.clone());
        self.since_refactor = 0;
        Ok(())
    }

    /// One Bland iteration on `cost`, never entering columns in `blocked`.
    fn step(&mut self, cost: &[f64], blocked: &[bool]) -> Result<Step> {
        let pi = self.duals(cost);
        let mut in_basis = vec![false; self.cols.len()];
        for &bv in &self.basis {
            in_basis[bv] = true;
        }
        let entering = (0..self.cols.len()).find(|&j| {
            !in_basis[j] && !blocked[j] && {
                let d = cost[j] - pi.iter().zip(&self.cols[j]).map(|(p, a)| p * a).sum::<f64>();
                d < -OPTIMALITY_TOL
            }
        });
        let Some(j) = entering else {
            return Ok(Step::Optimal);
        };
        let u = self.ftran(&self.cols[j]);
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..self.rows() {
            if u[r] > PIVOT_TOL {
                let theta = self.xb[r].max(0.0) / u[r];
                leave = match leave {
                    None => Some((r, theta)),
                    Some((lr, lt)) => {
                        if theta < lt - 1e-12 || (theta <= lt + 1e-12 && self.basis[r] < self.basis[lr]) {
                            Some((r, theta))
                        } else {
                            Some((lr, lt))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else {
            return Ok(Step::Unbounded);
        };
        self.pivot(r, j, &u);
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(Step::Pivoted)
    }

    fn pivot(&mut self, r: usize, j: usize, u: &[f64]) {
        let m = self.rows();
        let d = u[r];
        let theta = self.xb[r] / d;
        let pivot_row: Vec<f64> = self.binv[r].iter().map(|v| v / d).collect();
        for k in 0..m {
            if k == r {
                continue;
            }
            let f = u[k];
            if f != 0.0 {
                for (v, p) in self.binv[k].iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                self.xb[k] -= f * theta;
            }
        }
        self.binv[r] = pivot_row;
        self.xb[r] = theta;
        self.basis[r] = j;
        self.since_refactor += 1;
        self.iterations += 1;
    }

    fn run(&mut self, cost: &[f64], blocked: &[bool]) -> Result<Step> {
        let limit = 50_000 + 200 * self.cols.len();
        for _ in 0..limit {
            match self.step(cost, blocked)? {
                Step::Pivoted => {}
                done => return Ok(done),
            }
        }
        Err(Error::Structural("simplex iteration limit reached".into()))
    }
}

/// Two-phase revised simplex with Bland's rule.
pub fn simplex_solve(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let n = problem.vars();
    let sign = match problem.objective {
        Objective::Minimize => 1.0,
        Objective::Maximize => -1.0,
    };

    // rows of the working problem: originals then upper bounds
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = problem
        .rows
        .iter()
        .zip(&problem.senses)
        .zip(&problem.rhs)
        .map(|((r, &s), &b)| (r.clone(), s, b))
        .collect();
    let bounded: Vec<usize> = (0..n).filter(|&j| problem.upper[j].is_some()).collect();
    for &j in &bounded {
        let mut r = vec![0.0; n];
        r[j] = 1.0;
        rows.push((r, Sense::Le, problem.upper[j].expect("bounded")));
    }
    let m = rows.len();
    let mut flip = vec![1.0; m];
    for (k, (r, s, b)) in rows.iter_mut().enumerate() {
        if *b < 0.0 {
            flip[k] = -1.0;
            for v in r.iter_mut() {
                *v = -*v;
            }
            *b = -*b;
            *s = match *s {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|(r, _, _)| r[j]).collect()).collect();
    let mut basis = vec![usize::MAX; m];
    let mut artificial = Vec::new();
    for (k, (_, s, _)) in rows.iter().enumerate() {
        let mut unit = vec![0.0; m];
        match s {
            Sense::Le => {
                unit[k] = 1.0;
                basis[k] = cols.len();
                cols.push(unit);
            }
            Sense::Ge => {
                unit[k] = -1.0;
                cols.push(unit);
            }
            Sense::Eq => {}
        }
    }
    for (k, (_, s, _)) in rows.iter().enumerate() {
        if *s != Sense::Le {
            let mut unit = vec![0.0; m];
            unit[k] = 1.0;
            basis[k] = cols.len();
            artificial.push(cols.len());
            cols.push(unit);
        }
    }
    let total = cols.len();
    let mut is_art = vec![false; total];
    for &a in &artificial {
        is_art[a] = true;
    }
    let b: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let mut t = Tableau {
        cols,
        binv: (0..m).map(|r| (0..m).map(|c| if r == c { 1.0 } else { 0.0 }).collect()).collect(),
        xb: b.clone(),
        b,
        basis,
        since_refactor: 0,
        iterations: 0,
    };

    let empty = |status| LpSolution {
        status,
        x: vec![0.0; n],
        duals: vec![0.0; problem.rows.len()],
        upper_duals: vec![0.0; n],
        objective: 0.0,
        iterations: 0,
    };

    if !artificial.is_empty() {
        let phase1: Vec<f64> = (0..total).map(|j| if is_art[j] { 1.0 } else { 0.0 }).collect();
        t.run(&phase1, &vec![false; total])?;
        t.refactor()?;
        let infeasibility: f64 = t
            .basis
            .iter()
            .zip(&t.xb)
            .filter(|(bv, _)| is_art[**bv])
            .map(|(_, v)| v.max(0.0))
            .sum();
        let scale = 1.0 + t.b.iter().copied().fold(0.0, f64::max);
        if infeasibility > FEASIBILITY_TOL * scale {
            let mut s = empty(LpStatus::Infeasible);
            s.iterations = t.iterations;
            return Ok(s);
        }
        // pivot artificials out where some real column can replace them
        for r in 0..m {
            if is_art[t.basis[r]] {
                let replacement = (0..total).find(|&j| {
                    !is_art[j] && !t.basis.contains(&j) && t.ftran(&t.cols[j])[r].abs() > 1e-7
                });
                if let Some(j) = replacement {
                    let u = t.ftran(&t.cols[j]);
                    t.pivot(r, j, &u);
                }
            }
        }
        t.refactor()?;
    }

    let mut phase2 = vec![0.0; total];
    for j in 0..n {
        phase2[j] = sign * problem.cost[j];
    }
    let status = match t.run(&phase2, &is_art)? {
        Step::Unbounded => LpStatus::Unbounded,
        _ => LpStatus::Optimal,
    };
    t.refactor()?;
    if status == LpStatus::Unbounded {
        let mut s = empty(LpStatus::Unbounded);
        s.iterations = t.iterations;
        return Ok(s);
    }

    let mut full = vec![0.0; total];
    for (&bv, &v) in t.basis.iter().zip(&t.xb) {
        full[bv] = v.max(0.0);
    }
    let x: Vec<f64> = full[..n].to_vec();
    let pi = t.duals(&phase2);
    let work_duals: Vec<f64> = pi.iter().zip(&flip).map(|(p, f)| sign * p * f).collect();
    let craw = problem.rows.len();
    let mut upper_duals = vec![0.0; n];
    for (k, &j) in bounded.iter().enumerate() {
        upper_duals[j] = work_duals[craw + k];
    }
    let objective = problem.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status,
        x,
        duals: work_duals[..craw].to_vec(),
        upper_duals,
        objective,
        iterations: t.iterations,
    })
}

/// Optimum of `min λ s.t. Cx >= 1, Px <= λ` with its dual.
#[derive(Clone, Debug)]
pub struct OmpcOpt {
    pub opt: f64,
    pub x: Vec<f64>,
    /// Covering duals `y >= 0`.
    pub y: Vec<f64>,
    /// Packing duals `z >= 0`, `Σ z = 1` at optimality.
    pub z: Vec<f64>,
}

pub fn ompc_opt(packing: &PackingSystem, rows: &[CoveringRow]) -> Result<OmpcOpt> {
    let n = packing.cols();
    let lam = n;
    let mut cost = vec![0.0; n + 1];
    cost[lam] = 1.0;
    let mut lp = LpProblem::new(Objective::Minimize, cost);
    for row in rows {
        if row.max_col() >= n {
            return Err(Error::Structural(format!("covering column {} outside {n}", row.max_col())));
        }
        lp.add_sparse(row.entries(), Sense::Ge, 1.0);
    }
    for k in 0..packing.rows() {
        let mut r = packing.row(k).to_vec();
        r.push(-1.0);
        lp.add_row(r, Sense::Le, 0.0);
    }
    let sol = simplex_solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Structural(format!("covering LP is {:?}", sol.status)));
    }
    let c = rows.len();
    Ok(OmpcOpt {
        opt: sol.x[lam],
        x: sol.x[..n].to_vec(),
        y: sol.duals[..c].to_vec(),
        z: sol.duals[c..].iter().map(|d| -d).collect(),
    })
}

/// Optimum of the facility-location relaxation at cost guess `Z`.
#[derive(Clone, Debug)]
pub struct Opt1 {
    pub value: f64,
    /// Client-major `x[j * m + i]`.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
}

/// Solves `min Σ c_i y_i + Zλ + Σ a_ij x_ij` over `x_ij` with `i ∈ F_j(Z)`,
/// subject to `Σ_i x_ij >= 1`, `y_i >= x_ij`, `Z y_i >= Σ_j p_ij x_ij`,
/// `λ >= y_i` and `λ >= 1`.
pub fn ccfl_opt1(inst: &CcflInstance, z: f64) -> Result<Opt1> {
    let (m, n) = (inst.m(), inst.n());
    let mut pairs = Vec::new();
    for j in 0..n {
        let cand = candidate_facilities(inst, j, z);
        if cand.is_empty() {
            return Err(Error::NoCandidate { client: j, z });
        }
        pairs.extend(cand.into_iter().map(|i| (i, j)));
    }
    let nx = pairs.len();
    let y0 = nx;
    let lam = nx + m;
    let mut cost = vec![0.0; lam + 1];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        cost[k] = inst.entry(i, j).expect("candidate entry").a;
    }
    cost[y0..y0 + m].copy_from_slice(inst.fixed());
    cost[lam] = z;
    let mut lp = LpProblem::new(Objective::Minimize, cost);
    for j in 0..n {
        let row: Vec<(usize, f64)> = pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.1 == j)
            .map(|(k, _)| (k, 1.0))
            .collect();
        lp.add_sparse(&row, Sense::Ge, 1.0);
    }
    for (k, &(i, _)) in pairs.iter().enumerate() {
        lp.add_sparse(&[(y0 + i, 1.0), (k, -1.0)], Sense::Ge, 0.0);
    }
    for i in 0..m {
        let mut row = vec![(y0 + i, z)];
        row.extend(
            pairs
                .iter()
                .enumerate()
                .filter(|(_, p)| p.0 == i)
                .map(|(k, &(i, j))| (k, -inst.entry(i, j).expect("candidate entry").p)),
        );
        lp.add_sparse(&row, Sense::Ge, 0.0);
    }
    for i in 0..m {
        lp.add_sparse(&[(lam, 1.0), (y0 + i, -1.0)], Sense::Ge, 0.0);
    }
    lp.add_sparse(&[(lam, 1.0)], Sense::Ge, 1.0);
    let sol = simplex_solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Structural(format!("facility LP is {:?}", sol.status)));
    }
    let mut x = vec![0.0; m * n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        x[j * m + i] = sol.x[k];
    }
    Ok(Opt1 {
        value: sol.objective,
        x,
        y: sol.x[y0..y0 + m].to_vec(),
        lambda: sol.x[lam],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZStar {
    pub value: f64,
    pub assignment: Vec<usize>,
}

pub const BRUTE_FORCE_MAX_FACILITIES: usize = 6;
pub const BRUTE_FORCE_MAX_CLIENTS: usize = 10;

/// Exhaustive branch and bound over integral assignments minimising
/// congestion plus the charges of used facilities plus assignment costs.
pub fn brute_force_zstar(inst: &CcflInstance) -> Result<ZStar> {
    let (m, n) = (inst.m(), inst.n());
    if m > BRUTE_FORCE_MAX_FACILITIES || n > BRUTE_FORCE_MAX_CLIENTS {
        return Err(Error::SizeGuard(format!(
            "brute force allows m <= {BRUTE_FORCE_MAX_FACILITIES}, n <= {BRUTE_FORCE_MAX_CLIENTS}; got {m}, {n}"
        )));
    }
    // cheapest remaining assignment cost, as an additive lower bound
    let mut tail = vec![0.0; n + 1];
    for j in (0..n).rev() {
        let a = inst.client(j).map(|(_, e)| e.a).fold(f64::INFINITY, f64::min);
        tail[j] = tail[j + 1] + a;
    }
    let order: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            let mut v: Vec<usize> = inst.client(j).map(|(i, _)| i).collect();
            v.sort_by(|&p, &q| inst.total(p, j).partial_cmp(&inst.total(q, j)).expect("finite"));
            v
        })
        .collect();

    struct Search<'a> {
        inst: &'a CcflInstance,
        order: &'a [Vec<usize>],
        tail: &'a [f64],
        load: Vec<f64>,
        used: Vec<usize>,
        current: Vec<usize>,
        best: f64,
        best_assign: Vec<usize>,
    }

    impl Search<'_> {
        fn visit(&mut self, j: usize, fixed: f64, assign: f64, congestion: f64) {
            if congestion + fixed + assign + self.tail[j] >= self.best {
                return;
            }
            if j == self.order.len() {
                self.best = congestion + fixed + assign;
                self.best_assign = self.current.clone();
                return;
            }
            for &i in &self.order[j] {
                let e = self.inst.entry(i, j).expect("ordered entries exist");
                let extra = if self.used[i] == 0 { self.inst.fixed()[i] } else { 0.0 };
                self.load[i] += e.p;
                self.used[i] += 1;
                self.current.push(i);
                let cong = congestion.max(self.load[i]);
                self.visit(j + 1, fixed + extra, assign + e.a, cong);
                self.current.pop();
                self.used[i] -= 1;
                self.load[i] -= e.p;
            }
        }
    }

    let mut s = Search {
        inst,
        order: &order,
        tail: &tail,
        load: vec![0.0; m],
        used: vec![0; m],
        current: Vec::with_capacity(n),
        best: f64::INFINITY,
        best_assign: Vec::new(),
    };
    s.visit(0, 0.0, 0.0, 0.0);
    Ok(ZStar { value: s.best, assignment: s.best_assign })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound() {
        // min λ s.t. x >= 1, x <= λ
        let mut lp = LpProblem::new(Objective::Minimize, vec![0.0, 1.0]);
        lp.add_row(vec![1.0, 0.0], Sense::Ge, 1.0);
        lp.add_row(vec![1.0, -1.0], Sense::Le, 0.0);
        let s = simplex_solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_split() {
        let mut lp = LpProblem::new(Objective::Minimize, vec![0.0, 0.0, 1.0]);
        lp.add_row(vec![1.0, 1.0, 0.0], Sense::Ge, 1.0);
        lp.add_row(vec![1.0, 0.0, -1.0], Sense::Le, 0.0);
        lp.add_row(vec![0.0, 1.0, -1.0], Sense::Le, 0.0);
        let s = simplex_solve(&lp).unwrap();
        assert!((s.objective - 0.5).abs() < 1e-12);
        assert!(s.duals[0] > 0.0 && s.duals[1] <= 0.0 && s.duals[2] <= 0.0);
    }

    #[test]
    fn statuses() {
        let mut lp = LpProblem::new(Objective::Minimize, vec![1.0]);
        lp.add_row(vec![1.0], Sense::Ge, 2.0);
        lp.set_upper(0, 1.0);
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LpProblem::new(Objective::Maximize, vec![1.0, 0.0]);
        lp.add_row(vec![1.0, -1.0], Sense::Le, 1.0);
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn maximisation_with_equality_and_bounds() {
        // max x + 2y s.t. x + y = 3, y <= 2 → x = 1, y = 2, value 5
        let mut lp = LpProblem::new(Objective::Maximize, vec![1.0, 2.0]);
        lp.add_row(vec![1.0, 1.0], Sense::Eq, 3.0);
        lp.set_upper(1, 2.0);
        let s = simplex_solve(&lp).unwrap();
        assert!((s.objective - 5.0).abs() < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 2.0).abs() < 1e-12);
        let dual_obj = 3.0 * s.duals[0] + 2.0 * s.upper_duals[1];
        assert!((dual_obj - 5.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LpProblem::new(Objective::Minimize, vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], Sense::Eq, 2.0);
        lp.add_row(vec![2.0, 2.0], Sense::Eq, 4.0);
        lp.add_row(vec![1.0, 0.0], Sense::Ge, -1.0);
        let s = simplex_solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn one_variable_covering() {
        let p = PackingSystem::new(1, 1, vec![1.0]).unwrap();
        let o = ompc_opt(&p, &[CoveringRow::unit([0]).unwrap()]).unwrap();
        assert!((o.opt - 1.0).abs() < 1e-12);
        assert!((o.z[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_single_useful_facility() {
        let inst = CcflInstance::new(
            vec![2.0, 100.0],
            vec![1.0, 1.0],
            vec![vec![(0, 1.0, 0.5), (1, 1.0, 0.0)], vec![(0, 2.0, 0.25), (1, 1.0, 0.0)]],
        )
        .unwrap();
        let z = brute_force_zstar(&inst).unwrap();
        assert_eq!(z.assignment, vec![0, 0]);
        assert!((z.value - (2.0 + 3.0 + 0.75)).abs() < 1e-12);
    }

    #[test]
    fn brute_force_guard() {
        let inst = CcflInstance::new(vec![1.0; 7], vec![1.0; 7], vec![vec![(0, 1.0, 0.0)]; 2]).unwrap();
        assert!(matches!(brute_force_zstar(&inst), Err(Error::SizeGuard(_))));
    }
}
