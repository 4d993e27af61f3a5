//! Online mixed packing/covering with multiplicative updates.
//!
//! A [`TrialState`] runs the update rule at a fixed scale Γ: when a covering
//! row arrives, every variable in it is multiplied by
//! `1 + ε c_ij / rate_j` until the row is satisfied, and the trial fails once
//! the scaled violation reaches `3 ln(em)`. [`OnlineMpc`] wraps trials in the
//! Γ-doubling scheme, keeping the variables of failed trials and summing
//! them into the reported solution.

use std::f64::consts::E;

use crate::penalty::{dual_scale, step_constant, step_size, violation, CoveringRow, PackingSystem, Penalty};
use crate::{Error, Result, SATISFACTION_SLACK};

/// Result of presenting one covering row to a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowOutcome {
    Satisfied,
    Failed,
}

/// Bookkeeping for one phase, kept for the analysis checks.
#[derive(Clone, Debug)]
pub struct PhaseRecord {
    /// Stream index of the row being processed.
    pub row: usize,
    /// Increase `e·ε` of the dual objective.
    pub dual_increase: f64,
    pub est_before: f64,
    pub est_after: f64,
    /// Scaled violation at the start of the phase.
    pub scaled_violation_before: f64,
    /// Largest multiplier applied to any variable.
    pub max_growth: f64,
    /// Multiplier applied to the variable attaining the step-size minimum.
    pub argmin_growth: f64,
}

/// Per-trial summary.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSummary {
    pub gamma: f64,
    /// `λ(x(τ))` in unscaled units when the trial ended.
    pub lambda_final: f64,
    pub failed: bool,
    pub phases: usize,
}

/// Dual solution scaled into feasibility for `max Σy s.t. Cᵀy <= Pᵀz, Σz <= 1`.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    /// Stream indices of the rows carrying `y`.
    pub rows: Vec<usize>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub nu: f64,
    pub sigma: f64,
}

impl DualCertificate {
    pub fn objective(&self) -> f64 {
        self.y.iter().sum()
    }

    /// Largest excess of `(Cᵀy)_j - (Pᵀz)_j` over all columns and the sum of
    /// `z`; `stream` is the full row stream the indices refer to.
    pub fn check(&self, packing: &PackingSystem, stream: &[CoveringRow]) -> Result<DualCheck> {
        let mut cty = vec![0.0; packing.cols()];
        for (&id, &yi) in self.rows.iter().zip(&self.y) {
            let row = stream
                .get(id)
                .ok_or_else(|| Error::Structural(format!("certificate names unknown row {id}")))?;
            for &(j, c) in row.entries() {
                cty[j] += c * yi;
            }
        }
        let ptz = packing.apply_transpose(&self.z)?;
        let max_excess = cty
            .iter()
            .zip(&ptz)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_value = self
            .y
            .iter()
            .chain(&self.z)
            .copied()
            .fold(f64::INFINITY, f64::min);
        Ok(DualCheck {
            max_excess,
            z_sum: self.z.iter().sum(),
            min_value,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DualCheck {
    pub max_excess: f64,
    pub z_sum: f64,
    pub min_value: f64,
}

/// State of one trial at a fixed Γ.
#[derive(Clone, Debug)]
pub struct TrialState {
    packing: PackingSystem,
    scaled: PackingSystem,
    gamma: f64,
    mu: f64,
    fail_level: f64,
    x: Vec<f64>,
    current: Penalty,
    rows: Vec<(usize, CoveringRow)>,
    duals_y: Vec<f64>,
    z_running: Vec<f64>,
    max_snapshot_violation: f64,
    phases: usize,
    failed: bool,
    log: Vec<PhaseRecord>,
    max_nnz: usize,
    cover_hi: f64,
    cover_lo: f64,
}

impl TrialState {
    /// Starts a trial: every variable is set to `1/(d₁² ρ κ₁)` where `d₁` is
    /// the largest support among the packing rows and `first_row`, and `κ₁`
    /// the largest coefficient of `first_row`.
    pub fn init(packing: &PackingSystem, gamma: f64, first_row: &CoveringRow) -> Result<Self> {
        if first_row.max_col() >= packing.cols() {
            return Err(Error::Structural(format!(
                "covering column {} outside {} variables",
                first_row.max_col(),
                packing.cols()
            )));
        }
        let scaled = packing.scaled(gamma)?;
        let d1 = packing.max_row_nnz().max(first_row.len()) as f64;
        let kappa1 = first_row.max_coeff();
        let x0 = 1.0 / (d1 * d1 * packing.rho() * kappa1);
        let x = vec![x0; packing.cols()];
        let current = Penalty::evaluate(&scaled, &x)?;
        let m = packing.rows();
        Ok(Self {
            z_running: current.weights.clone(),
            max_snapshot_violation: current.max_load,
            packing: packing.clone(),
            scaled,
            gamma,
            mu: step_constant(m),
            fail_level: 3.0 * (E * m as f64).ln(),
            x,
            current,
            rows: Vec::new(),
            duals_y: Vec::new(),
            phases: 0,
            failed: false,
            log: Vec::new(),
            max_nnz: packing.max_row_nnz().max(first_row.len()),
            cover_hi: first_row.max_coeff(),
            cover_lo: first_row.min_coeff(),
        })
    }

    /// Runs phases until `row` (stream index `id`) is satisfied or the trial
    /// fails.
    pub fn process_constraint(&mut self, id: usize, row: &CoveringRow) -> Result<RowOutcome> {
        if self.failed {
            return Err(Error::Structural("trial has already failed".into()));
        }
        if row.max_col() >= self.x.len() {
            return Err(Error::Structural(format!(
                "covering column {} outside {} variables",
                row.max_col(),
                self.x.len()
            )));
        }
        let slot = self.rows.len();
        self.rows.push((id, row.clone()));
        self.duals_y.push(0.0);
        self.max_nnz = self.max_nnz.max(row.len());
        self.cover_hi = self.cover_hi.max(row.max_coeff());
        self.cover_lo = self.cover_lo.min(row.min_coeff());

        let coverage = row.dot(&self.x);
        if coverage < 1.0 - SATISFACTION_SLACK {
            // A variable outside every packing row is free; use it outright.
            if let Some(&(j, c)) = row.entries().iter().find(|(j, _)| self.packing.column_is_zero(*j)) {
                self.x[j] += (1.0 - coverage) / c;
            }
        }

        while row.dot(&self.x) < 1.0 - SATISFACTION_SLACK {
            let before = &self.current;
            for (z, w) in self.z_running.iter_mut().zip(&before.weights) {
                if *w > *z {
                    *z = *w;
                }
            }
            self.max_snapshot_violation = self.max_snapshot_violation.max(before.max_load);

            let rates = before.rates(&self.scaled);
            let eps = step_size(row, &rates, self.mu)?;
            let (mut max_growth, mut argmin_growth, mut argmin_ratio) = (1.0f64, 1.0, f64::INFINITY);
            for &(j, c) in row.entries() {
                if rates[j] > 0.0 {
                    let factor = 1.0 + eps * c / rates[j];
                    self.x[j] *= factor;
                    max_growth = max_growth.max(factor);
                    let ratio = rates[j] / c;
                    if ratio < argmin_ratio {
                        argmin_ratio = ratio;
                        argmin_growth = factor;
                    }
                }
            }
            self.duals_y[slot] += E * eps;
            self.phases += 1;

            let after = Penalty::evaluate(&self.scaled, &self.x)?;
            self.log.push(PhaseRecord {
                row: id,
                dual_increase: E * eps,
                est_before: before.value,
                est_after: after.value,
                scaled_violation_before: before.max_load,
                max_growth,
                argmin_growth,
            });
            let failed = after.max_load >= self.fail_level;
            self.current = after;
            if failed {
                self.failed = true;
                return Ok(RowOutcome::Failed);
            }
        }
        Ok(RowOutcome::Satisfied)
    }

    /// Running `σ = e² ln(μ d² ρ κ)` from the rows this trial has seen.
    pub fn sigma(&self) -> f64 {
        dual_scale(
            self.mu,
            self.max_nnz,
            self.packing.rho(),
            self.cover_hi / self.cover_lo,
        )
    }

    /// Scaled duals `(y Γ/(σν), z/ν)` with `ν = ln(em) + max_l λ̃(x^l)`,
    /// using the running σ.
    pub fn dual_certificate(&self) -> DualCertificate {
        self.dual_certificate_with(self.sigma())
    }

    /// As [`dual_certificate`](Self::dual_certificate) with an explicit σ.
    pub fn dual_certificate_with(&self, sigma: f64) -> DualCertificate {
        let m = self.packing.rows() as f64;
        let nu = (E * m).ln() + self.max_snapshot_violation;
        DualCertificate {
            rows: self.rows.iter().map(|(id, _)| *id).collect(),
            y: self.duals_y.iter().map(|y| y * self.gamma / (sigma * nu)).collect(),
            z: self.z_running.iter().map(|z| z / nu).collect(),
            nu,
            sigma,
        }
    }

    pub fn summary(&self) -> TrialSummary {
        TrialSummary {
            gamma: self.gamma,
            lambda_final: self.gamma * self.current.max_load,
            failed: self.failed,
            phases: self.phases,
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

    pub fn phases(&self) -> usize {
        self.phases
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    /// Scaled violation `λ̃(x)` at the current point.
    pub fn scaled_violation(&self) -> f64 {
        self.current.max_load
    }

    pub fn duals_y(&self) -> &[f64] {
        &self.duals_y
    }

    pub fn z_running(&self) -> &[f64] {
        &self.z_running
    }

    pub fn phase_log(&self) -> &[PhaseRecord] {
        &self.log
    }

    /// Stream indices of the rows presented to this trial.
    pub fn row_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|(id, _)| *id)
    }
}

/// Final output of the doubling driver.
#[derive(Clone, Debug)]
pub struct OmpcSolution {
    pub x_total: Vec<f64>,
    pub lambda: f64,
    pub trials: Vec<TrialSummary>,
}

/// The Γ-doubling driver: a fresh trial with doubled Γ starts whenever the
/// current one fails, beginning with the row that caused the failure.
#[derive(Clone, Debug)]
pub struct OnlineMpc {
    packing: PackingSystem,
    first_row: Option<CoveringRow>,
    finished: Vec<TrialState>,
    current: Option<TrialState>,
    finished_x: Vec<f64>,
    rows_seen: usize,
}

impl OnlineMpc {
    pub fn new(packing: PackingSystem) -> Self {
        let n = packing.cols();
        Self {
            packing,
            first_row: None,
            finished: Vec::new(),
            current: None,
            finished_x: vec![0.0; n],
            rows_seen: 0,
        }
    }

    /// Runs the driver over a whole stream.
    pub fn run(packing: &PackingSystem, rows: &[CoveringRow]) -> Result<Self> {
        let mut solver = Self::new(packing.clone());
        for row in rows {
            solver.submit(row)?;
        }
        Ok(solver)
    }

    /// Γ of the first trial: `max p_kj / (d₁ ρ κ₁)`.
    pub fn initial_gamma(packing: &PackingSystem, first_row: &CoveringRow) -> f64 {
        let d1 = packing.max_row_nnz().max(first_row.len()) as f64;
        packing.max_coeff() / (d1 * packing.rho() * first_row.max_coeff())
    }

    /// Presents the next covering row.
    pub fn submit(&mut self, row: &CoveringRow) -> Result<()> {
        let id = self.rows_seen;
        if self.current.is_none() {
            let gamma = Self::initial_gamma(&self.packing, row);
            self.current = Some(TrialState::init(&self.packing, gamma, row)?);
            self.first_row = Some(row.clone());
        }
        loop {
            let trial = self.current.as_mut().expect("trial exists after first row");
            match trial.process_constraint(id, row)? {
                RowOutcome::Satisfied => break,
                RowOutcome::Failed => {
                    let gamma = 2.0 * trial.gamma();
                    let first = self.first_row.as_ref().expect("first row recorded");
                    let next = TrialState::init(&self.packing, gamma, first)?;
                    let done = self.current.replace(next).expect("current trial");
                    for (acc, v) in self.finished_x.iter_mut().zip(done.x()) {
                        *acc += v;
                    }
                    self.finished.push(done);
                }
            }
        }
        self.rows_seen += 1;
        Ok(())
    }

    /// Sum of the variables of every trial so far.
    pub fn x_total(&self) -> Vec<f64> {
        match &self.current {
            Some(t) => self.finished_x.iter().zip(t.x()).map(|(a, b)| a + b).collect(),
            None => self.finished_x.clone(),
        }
    }

    /// All trials, finished ones first.
    pub fn trials(&self) -> impl Iterator<Item = &TrialState> {
        self.finished.iter().chain(self.current.iter())
    }

    pub fn packing(&self) -> &PackingSystem {
        &self.packing
    }

    pub fn solution(&self) -> OmpcSolution {
        let x_total = self.x_total();
        let lambda = violation(&self.packing, &x_total).expect("x has one entry per column");
        OmpcSolution {
            x_total,
            lambda,
            trials: self.trials().map(TrialState::summary).collect(),
        }
    }
}

/// Solves a whole stream online.
pub fn solve_online(packing: &PackingSystem, rows: &[CoveringRow]) -> Result<OmpcSolution> {
    if rows.is_empty() {
        return Err(Error::Structural("covering stream is empty".into()));
    }
    Ok(OnlineMpc::run(packing, rows)?.solution())
}
