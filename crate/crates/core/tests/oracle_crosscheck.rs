//! The in-house simplex against minilp on random bounded LPs.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use online_mpc::harness::{gen_random_ompc, OmpcInstance};
use online_mpc::oracle::{ompc_opt, simplex_solve, LpProblem, LpStatus, Objective, Sense};
use online_mpc::rng::stream_rng;
use rand::Rng;

fn via_minilp(lp: &LpProblem) -> f64 {
    let dir = match lp.objective {
        Objective::Minimize => OptimizationDirection::Minimize,
        Objective::Maximize => OptimizationDirection::Maximize,
    };
    let mut p = Problem::new(dir);
    let vars: Vec<_> = lp
        .cost
        .iter()
        .zip(&lp.upper)
        .map(|(&c, u)| p.add_var(c, (0.0, u.unwrap_or(f64::INFINITY))))
        .collect();
    for ((row, sense), &rhs) in lp.rows.iter().zip(&lp.senses).zip(&lp.rhs) {
        let expr: Vec<_> = vars.iter().copied().zip(row.iter().copied()).collect();
        let op = match sense {
            Sense::Le => ComparisonOp::Le,
            Sense::Ge => ComparisonOp::Ge,
            Sense::Eq => ComparisonOp::Eq,
        };
        p.add_constraint(expr.as_slice(), op, rhs);
    }
    p.solve().unwrap().objective()
}

#[test]
fn simplex_agrees_with_minilp() {
    for s in 0..200 {
        let mut rng = stream_rng(31, s);
        let n = rng.gen_range(1..=10);
        let x_hat: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let max = rng.gen_bool(0.5);
        let cost = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let mut lp = LpProblem::new(if max { Objective::Maximize } else { Objective::Minimize }, cost);
        for _ in 0..rng.gen_range(1..=10) {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let ax: f64 = a.iter().zip(&x_hat).map(|(a, x)| a * x).sum();
            let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
            let rhs = match sense {
                Sense::Le => ax + rng.gen_range(0.0..1.0),
                Sense::Ge => ax - rng.gen_range(0.0..1.0),
                Sense::Eq => ax,
            };
            lp.add_row(a, sense, rhs);
        }
        for (j, &x) in x_hat.iter().enumerate() {
            lp.set_upper(j, x + rng.gen_range(0.5..3.0));
        }
        let ours = simplex_solve(&lp).unwrap();
        assert_eq!(ours.status, LpStatus::Optimal, "seed {s}");
        let theirs = via_minilp(&lp);
        assert!((ours.objective - theirs).abs() <= 1e-7 * (1.0 + theirs.abs()), "seed {s}: {} vs {theirs}", ours.objective);
    }
}

#[test]
fn packing_covering_optimum_agrees_with_minilp() {
    for s in 0..30 {
        let mut rng = stream_rng(32, s);
        let (m, n, rows) = (rng.gen_range(1..=8), rng.gen_range(1..=10), rng.gen_range(1..=10));
        let OmpcInstance { packing, rows } = gen_random_ompc(m, n, rows, 0.4, (1.0, 4.0), rng.gen()).unwrap();
        // min λ s.t. Px <= λ, Cx >= 1
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let lam = p.add_var(1.0, (0.0, f64::INFINITY));
        let x: Vec<_> = (0..n).map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
        for k in 0..m {
            let mut expr: Vec<_> = (0..n).map(|j| (x[j], packing.get(k, j))).collect();
            expr.push((lam, -1.0));
            p.add_constraint(expr.as_slice(), ComparisonOp::Le, 0.0);
        }
        for r in &rows {
            let expr: Vec<_> = r.entries().iter().map(|&(j, c)| (x[j], c)).collect();
            p.add_constraint(expr.as_slice(), ComparisonOp::Ge, 1.0);
        }
        let theirs = p.solve().unwrap().objective();
        let ours = ompc_opt(&packing, &rows).unwrap().opt;
        assert!((ours - theirs).abs() <= 1e-7 * (1.0 + theirs), "seed {s}: {ours} vs {theirs}");
    }
}
