//! Fractional online assignment at a fixed cost guess `Z`.
//!
//! `x` is stored client-major (`x[j * m + i]`). A [`CcflTrial`] runs the
//! multiplicative updates at a fixed scale Γ; [`FractionalCcfl`] restarts
//! with doubled Γ whenever a trial fails.

use std::f64::consts::E;

use super::{candidate_facilities, CcflInstance};
use crate::mpc::RowOutcome;
use crate::{Error, Result, SATISFACTION_SLACK};

/// The smooth cost at a point, with the softmax weights its gradient needs.
#[derive(Clone, Debug)]
pub struct CostEval {
    pub value: f64,
    pub est: f64,
    /// `max_i ỹ_i`.
    pub lambda_tilde: f64,
    /// `ỹ_i = Σ_j p_ij x_ij / (ZΓ) + max_j x_ij / Γ`.
    pub y_tilde: Vec<f64>,
    /// Softmax over facilities of `Σ_j p_ij x_ij / (ZΓ)`.
    pub s1: Vec<f64>,
    /// Softmax over all `m·n` pairs of `x_ij / Γ`, client-major.
    pub s2: Vec<f64>,
}

fn softmax(t: &[f64]) -> (f64, Vec<f64>) {
    let shift = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = t.iter().map(|v| (v - shift).exp()).collect();
    let total: f64 = w.iter().sum();
    (shift + total.ln(), w.into_iter().map(|v| v / total).collect())
}

/// `cost(x) = Z·est(x) + Σ_i c_i ỹ_i(x) + Σ a_ij x_ij / Γ`, where `est` adds
/// the log-sum-exp of the scaled loads and of all `x_ij / Γ`.
pub fn ccfl_cost(inst: &CcflInstance, z: f64, gamma: f64, x: &[f64]) -> Result<CostEval> {
    let (m, n) = (inst.m(), inst.n());
    if x.len() != m * n {
        return Err(Error::Structural(format!("x has {} entries, expected {}", x.len(), m * n)));
    }
    let mut load = vec![0.0; m];
    let mut row_max = vec![0.0f64; m];
    let mut assign = 0.0;
    for j in 0..n {
        for (i, e) in inst.client(j) {
            let v = x[j * m + i];
            load[i] += e.p * v;
            assign += e.a * v;
            row_max[i] = row_max[i].max(v);
        }
    }
    let t1: Vec<f64> = load.iter().map(|l| l / (z * gamma)).collect();
    let t2: Vec<f64> = x.iter().map(|v| v / gamma).collect();
    let (lse1, s1) = softmax(&t1);
    let (lse2, s2) = softmax(&t2);
    let y_tilde: Vec<f64> = t1.iter().zip(&row_max).map(|(v, w)| v + w / gamma).collect();
    let lambda_tilde = y_tilde.iter().copied().fold(0.0, f64::max);
    let est = lse1 + lse2;
    let fixed: f64 = inst.fixed().iter().zip(&y_tilde).map(|(c, y)| c * y).sum();
    Ok(CostEval {
        value: z * est + fixed + assign / gamma,
        est,
        lambda_tilde,
        y_tilde,
        s1,
        s2,
    })
}

/// `∂cost/∂x_ij` for `i ∈ F_j(Z)`, in facility order. The fixed-charge term
/// counts `c_i/Γ` only when `x_ij` attains the facility's row maximum.
pub fn ccfl_rates(inst: &CcflInstance, z: f64, gamma: f64, x: &[f64], j: usize, eval: &CostEval) -> Vec<(usize, f64)> {
    let m = inst.m();
    candidate_facilities(inst, j, z)
        .into_iter()
        .map(|i| {
            let e = inst.entry(i, j).expect("candidates have entries");
            let prev = (0..inst.n())
                .filter(|&k| k != j)
                .map(|k| x[k * m + i])
                .fold(0.0, f64::max);
            let top = if x[j * m + i] >= prev { 1.0 } else { 0.0 };
            let rate = e.p / gamma * eval.s1[i]
                + z / gamma * eval.s2[j * m + i]
                + inst.fixed()[i] / gamma * (e.p / z + top)
                + e.a / gamma;
            (i, rate)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CcflPhaseRecord {
    pub client: usize,
    /// `e·ε_j`.
    pub dual_increase: f64,
    pub cost_before: f64,
    pub cost_after: f64,
    pub max_growth: f64,
    /// Growth of the facility attaining the minimum rate.
    pub argmin_growth: f64,
    /// Whether that facility was held back by the row-maximum cap.
    pub argmin_capped: bool,
}

/// Scaled duals for D2(Z, Γ). Client and pair arrays are dense over the
/// whole instance; entries outside the trial are zero.
#[derive(Clone, Debug)]
pub struct CcflCertificate {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub nu: f64,
    pub sigma: f64,
}

impl CcflCertificate {
    pub fn objective(&self) -> f64 {
        self.alpha.iter().sum()
    }
}

/// Largest violations of the three D2 families (nonpositive when feasible).
#[derive(Clone, Copy, Debug)]
pub struct D2Check {
    /// `max Γα'_j - β'_ij - p_ij γ'_i - a_ij` over pairs with `i ∈ F_j(Z)`.
    pub assignment: f64,
    /// `max Σ_j β'_ij + Zγ'_i - δ'_i - c_i`.
    pub facility: f64,
    /// `Σ δ'_i - Z`.
    pub congestion: f64,
    /// Smallest dual value, which should be nonnegative.
    pub min_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub gamma: f64,
    pub failed: bool,
    pub phases: usize,
    pub clients: Vec<usize>,
    /// `cost(x)` in scaled units when the trial ended.
    pub cost: f64,
    /// Cost of the trial's partial solution in unscaled units:
    /// `Σ c_i y_i + Z max(1, max y) + Σ a_ij x_ij`.
    pub lp1_cost: f64,
}

/// One trial at fixed `Z` and Γ.
#[derive(Clone, Debug)]
pub struct CcflTrial<'a> {
    inst: &'a CcflInstance,
    z: f64,
    gamma: f64,
    mu: f64,
    fail_level: f64,
    x: Vec<f64>,
    current: CostEval,
    row_max: Vec<f64>,
    clients: Vec<usize>,
    alpha: Vec<f64>,
    init_increase: Vec<f64>,
    chi: Vec<f64>,
    eta: Vec<f64>,
    z_before: Vec<f64>,
    z_after: Vec<f64>,
    member: Vec<bool>,
    max_lambda: f64,
    phases: usize,
    failed: bool,
    log: Vec<CcflPhaseRecord>,
}

/// `μ = 1 + 1/(6 ln(emn))`.
pub(crate) fn ccfl_step_constant(m: usize, n: usize) -> f64 {
    1.0 + 1.0 / (6.0 * (E * (m * n) as f64).ln())
}

impl<'a> CcflTrial<'a> {
    pub fn new(inst: &'a CcflInstance, z: f64, gamma: f64) -> Result<Self> {
        if !(z > 0.0 && z.is_finite() && gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("need positive Z and Γ, got {z} and {gamma}")));
        }
        let (m, n) = (inst.m(), inst.n());
        let x = vec![0.0; m * n];
        let current = ccfl_cost(inst, z, gamma, &x)?;
        Ok(Self {
            inst,
            z,
            gamma,
            mu: ccfl_step_constant(m, n),
            fail_level: 5.0 * z * (E * (m * n) as f64).ln(),
            x,
            current,
            row_max: vec![0.0; m],
            clients: Vec::new(),
            alpha: Vec::new(),
            init_increase: Vec::new(),
            chi: vec![0.0; m * n],
            eta: vec![0.0; m],
            z_before: vec![0.0; m * n],
            z_after: vec![0.0; m * n],
            member: vec![false; m * n],
            max_lambda: 0.0,
            phases: 0,
            failed: false,
            log: Vec::new(),
        })
    }

    /// Sets `x_ij = x⁰_ij = min_i' total_i'j / (2mn total_ij)` for `i ∈ F_j(Z)`.
    pub fn init_client(&mut self, j: usize) -> Result<Vec<usize>> {
        if self.failed {
            return Err(Error::Structural("trial has already failed".into()));
        }
        if j >= self.inst.n() || self.clients.contains(&j) {
            return Err(Error::Structural(format!("client {j} is out of range or already seen")));
        }
        let cand = candidate_facilities(self.inst, j, self.z);
        if cand.is_empty() {
            return Err(Error::NoCandidate { client: j, z: self.z });
        }
        let (m, n) = (self.inst.m(), self.inst.n());
        let best = self.inst.min_total(j);
        for &i in &cand {
            let total = self.inst.total(i, j).expect("candidate entry");
            let x0 = best / (2.0 * (m * n) as f64 * total);
            let idx = j * m + i;
            self.x[idx] = x0;
            self.member[idx] = true;
            // the first client a facility sees starts its history at x⁰
            self.z_before[idx] = if self.row_max[i] > 0.0 { self.row_max[i] } else { x0 };
        }
        let before = self.current.value;
        self.current = ccfl_cost(self.inst, self.z, self.gamma, &self.x)?;
        self.init_increase.push(self.current.value - before);
        self.clients.push(j);
        self.alpha.push(0.0);
        Ok(cand)
    }

    /// Initialises client `j` and raises its assignment until it sums to one
    /// or the cost passes `5Z ln(emn)`.
    pub fn process_client(&mut self, j: usize) -> Result<RowOutcome> {
        let cand = self.init_client(j)?;
        let m = self.inst.m();
        let slot = self.clients.len() - 1;
        let mut outcome = RowOutcome::Satisfied;
        while cand.iter().map(|&i| self.x[j * m + i]).sum::<f64>() < 1.0 - SATISFACTION_SLACK {
            let snap = &self.current;
            for &i in &cand {
                let idx = j * m + i;
                self.chi[idx] = self.chi[idx].max(snap.s2[idx]);
            }
            for (eta, &s) in self.eta.iter_mut().zip(&snap.s1) {
                *eta = eta.max(s);
            }
            self.max_lambda = self.max_lambda.max(snap.lambda_tilde);

            let rates = ccfl_rates(self.inst, self.z, self.gamma, &self.x, j, snap);
            let min_rate = rates.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
            let eps = (self.mu - 1.0) * min_rate;
            let (mut max_growth, mut argmin_growth, mut argmin_capped, mut seen_min) = (1.0f64, 1.0, false, false);
            for &(i, rate) in &rates {
                let idx = j * m + i;
                let old = self.x[idx];
                let grown = old * (1.0 + eps / rate);
                let prev = self.row_max[i];
                let (new, capped) = if prev > old && grown > prev { (prev, true) } else { (grown, false) };
                self.x[idx] = new;
                max_growth = max_growth.max(new / old);
                if rate == min_rate && !seen_min {
                    seen_min = true;
                    argmin_growth = new / old;
                    argmin_capped = capped;
                }
            }
            self.alpha[slot] += E * eps;
            self.phases += 1;
            let after = ccfl_cost(self.inst, self.z, self.gamma, &self.x)?;
            self.log.push(CcflPhaseRecord {
                client: j,
                dual_increase: E * eps,
                cost_before: snap.value,
                cost_after: after.value,
                max_growth,
                argmin_growth,
                argmin_capped,
            });
            let failed = after.value > self.fail_level;
            self.current = after;
            if failed {
                self.failed = true;
                outcome = RowOutcome::Failed;
                break;
            }
        }
        for &i in &cand {
            let v = self.x[j * m + i];
            self.row_max[i] = self.row_max[i].max(v);
            self.z_after[j * m + i] = self.row_max[i];
        }
        Ok(outcome)
    }

    /// `σ = 4e² ln(2μmnρ)`.
    pub fn sigma(&self) -> f64 {
        let (m, n) = (self.inst.m() as f64, self.inst.n() as f64);
        4.0 * E * E * (2.0 * self.mu * m * n * self.inst.rho()).ln()
    }

    pub fn dual_certificate(&self) -> CcflCertificate {
        let (m, n) = (self.inst.m(), self.inst.n());
        let sigma = self.sigma();
        let half = sigma / (2.0 * E * E);
        let nu = 1.0 + ((m * n) as f64).ln() + self.max_lambda;
        let scale = E * E / (nu * sigma);
        let mut alpha = vec![0.0; n];
        for (&j, &a) in self.clients.iter().zip(&self.alpha) {
            alpha[j] = a / (nu * sigma);
        }
        let mut beta = vec![0.0; m * n];
        let mut chi_sum = vec![0.0; m];
        for idx in (0..m * n).filter(|&idx| self.member[idx]) {
            let i = idx % m;
            let raw = self.z * self.chi[idx] * half
                + self.inst.fixed()[i] * (self.z_after[idx] / self.z_before[idx]).ln();
            beta[idx] = scale * raw;
            chi_sum[i] += self.chi[idx];
        }
        let gamma = (0..m)
            .map(|i| scale * (self.eta[i] + self.inst.fixed()[i] / self.z) * half)
            .collect();
        let delta = (0..m)
            .map(|i| scale * self.z * (chi_sum[i] + self.eta[i]) * half)
            .collect();
        CcflCertificate { alpha, beta, gamma, delta, nu, sigma }
    }

    /// Substitutes a certificate into D2(Z, Γ).
    pub fn check_d2(&self, cert: &CcflCertificate) -> D2Check {
        let (m, n) = (self.inst.m(), self.inst.n());
        let mut assignment = f64::NEG_INFINITY;
        let mut beta_sum = vec![0.0; m];
        for j in 0..n {
            for i in candidate_facilities(self.inst, j, self.z) {
                let idx = j * m + i;
                let e = self.inst.entry(i, j).expect("candidate entry");
                let lhs = self.gamma * cert.alpha[j] - cert.beta[idx] - e.p * cert.gamma[i] - e.a;
                assignment = assignment.max(lhs);
                beta_sum[i] += cert.beta[idx];
            }
        }
        let facility = (0..m)
            .map(|i| beta_sum[i] + self.z * cert.gamma[i] - cert.delta[i] - self.inst.fixed()[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let congestion = cert.delta.iter().sum::<f64>() - self.z;
        let min_value = cert
            .alpha
            .iter()
            .chain(&cert.beta)
            .chain(&cert.gamma)
            .chain(&cert.delta)
            .copied()
            .fold(f64::INFINITY, f64::min);
        D2Check { assignment, facility, congestion, min_value }
    }

    /// Opening levels `y_i = Σ_j p_ij x_ij / Z + max_j x_ij` in unscaled units.
    pub fn y(&self) -> Vec<f64> {
        self.current.y_tilde.iter().map(|y| y * self.gamma).collect()
    }

    pub fn lp1_cost(&self) -> f64 {
        lp1_cost(self.inst, self.z, &self.x, &self.y())
    }

    pub fn report(&self) -> TrialReport {
        TrialReport {
            gamma: self.gamma,
            failed: self.failed,
            phases: self.phases,
            clients: self.clients.clone(),
            cost: self.current.value,
            lp1_cost: self.lp1_cost(),
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    pub fn phases(&self) -> usize {
        self.phases
    }

    pub fn cost(&self) -> &CostEval {
        &self.current
    }

    pub fn clients(&self) -> &[usize] {
        &self.clients
    }

    /// Increase of `cost(x)` caused by each client's initialisation.
    pub fn init_increases(&self) -> &[f64] {
        &self.init_increase
    }

    pub fn phase_log(&self) -> &[CcflPhaseRecord] {
        &self.log
    }
}

/// `Σ c_i y_i + Z max(1, max_i y_i) + Σ a_ij x_ij`.
pub(crate) fn lp1_cost(inst: &CcflInstance, z: f64, x: &[f64], y: &[f64]) -> f64 {
    let m = inst.m();
    let fixed: f64 = inst.fixed().iter().zip(y).map(|(c, y)| c * y).sum();
    let lambda = y.iter().copied().fold(1.0, f64::max);
    let assign: f64 = (0..inst.n())
        .flat_map(|j| inst.client(j).map(move |(i, e)| e.a * x[j * m + i]))
        .sum();
    fixed + z * lambda + assign
}

/// The Γ-doubling driver. Γ starts at 1; a failed trial is kept and a new
/// one with doubled Γ resumes at the client that caused the failure.
#[derive(Clone, Debug)]
pub struct FractionalCcfl<'a> {
    inst: &'a CcflInstance,
    z: f64,
    finished: Vec<CcflTrial<'a>>,
    current: CcflTrial<'a>,
    x_done: Vec<f64>,
    y_done: Vec<f64>,
}

impl<'a> FractionalCcfl<'a> {
    pub fn new(inst: &'a CcflInstance, z: f64) -> Result<Self> {
        Ok(Self {
            inst,
            z,
            finished: Vec::new(),
            current: CcflTrial::new(inst, z, 1.0)?,
            x_done: vec![0.0; inst.m() * inst.n()],
            y_done: vec![0.0; inst.m()],
        })
    }

    pub fn submit(&mut self, j: usize) -> Result<()> {
        loop {
            match self.current.process_client(j)? {
                RowOutcome::Satisfied => return Ok(()),
                RowOutcome::Failed => {
                    let next = CcflTrial::new(self.inst, self.z, 2.0 * self.current.gamma())?;
                    let done = std::mem::replace(&mut self.current, next);
                    for (acc, v) in self.x_done.iter_mut().zip(done.x()) {
                        *acc += v;
                    }
                    for (acc, v) in self.y_done.iter_mut().zip(done.y()) {
                        *acc += v;
                    }
                    self.finished.push(done);
                }
            }
        }
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Sum of the trial variables, client-major.
    pub fn x_total(&self) -> Vec<f64> {
        self.x_done.iter().zip(self.current.x()).map(|(a, b)| a + b).collect()
    }

    /// Sum of the trial opening levels.
    pub fn y_total(&self) -> Vec<f64> {
        self.y_done.iter().zip(self.current.y()).map(|(a, b)| a + b).collect()
    }

    /// Aggregated assignment of client `j`, one entry per facility.
    pub fn x_client(&self, j: usize) -> Vec<f64> {
        let m = self.inst.m();
        (0..m)
            .map(|i| self.x_done[j * m + i] + self.current.x()[j * m + i])
            .collect()
    }

    /// Sum over trials of each trial's unscaled cost.
    pub fn cumulative_cost(&self) -> f64 {
        self.trials().map(CcflTrial::lp1_cost).sum()
    }

    /// Cost of the aggregated solution `(x_total, y_total)`.
    pub fn aggregate_cost(&self) -> f64 {
        lp1_cost(self.inst, self.z, &self.x_total(), &self.y_total())
    }

    pub fn trials(&self) -> impl Iterator<Item = &CcflTrial<'a>> {
        self.finished.iter().chain(std::iter::once(&self.current))
    }

    pub fn current(&self) -> &CcflTrial<'a> {
        &self.current
    }
}

/// Runs the Γ-doubling driver over every client in order.
pub fn gamma_trials(inst: &CcflInstance, z: f64) -> Result<FractionalCcfl<'_>> {
    let mut run = FractionalCcfl::new(inst, z)?;
    for j in 0..inst.n() {
        run.submit(j)?;
    }
    Ok(run)
}
