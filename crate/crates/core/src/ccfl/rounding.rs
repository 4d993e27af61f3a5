//! Randomized rounding of the fractional assignment and the `Z`-doubling
//! epoch driver.

use std::f64::consts::E;

use rand::Rng;
use serde::Serialize;

use super::fractional::{ccfl_step_constant, FractionalCcfl};
use super::{AssignmentCost, CcflInstance};
use crate::rng::stream_rng;
use crate::{Error, Result};

/// `r = ⌈4e ln n⌉`.
pub fn rounding_repetitions(n: usize) -> usize {
    (4.0 * E * (n as f64).ln()).ceil() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundStep {
    /// Assigned to an open candidate.
    Candidate,
    /// No open candidate; sent to the cheapest facility of `S_j`.
    Fallback,
}

/// What the rounder did for one client.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClientDecision {
    pub client: usize,
    /// Facilities opened while handling this client.
    pub opened: Vec<usize>,
    pub candidates: Vec<usize>,
    pub facility: usize,
    pub step: RoundStep,
}

/// Rounding state for one epoch. The thresholds `t̄_i` (each the minimum of
/// `r` uniforms) are drawn up front.
#[derive(Clone, Debug)]
pub struct Rounder {
    thresholds: Vec<f64>,
    open: Vec<bool>,
    by_threshold: Vec<bool>,
    r: usize,
}

impl Rounder {
    pub fn new<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Self {
        let r = rounding_repetitions(n);
        let thresholds = (0..m)
            .map(|_| (0..r).map(|_| rng.gen::<f64>()).fold(1.0, f64::min))
            .collect();
        Self {
            thresholds,
            open: vec![false; m],
            by_threshold: vec![false; m],
            r,
        }
    }

    pub fn repetitions(&self) -> usize {
        self.r
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn open(&self) -> &[bool] {
        &self.open
    }

    /// Facilities opened because `y_i` reached their threshold.
    pub fn opened_by_threshold(&self) -> &[bool] {
        &self.by_threshold
    }

    /// Rounds client `j` given its assignment `x` (one entry per facility)
    /// and the current opening levels `y`.
    pub fn round_client<R: Rng + ?Sized>(
        &mut self,
        inst: &CcflInstance,
        j: usize,
        x: &[f64],
        y: &[f64],
        rng: &mut R,
    ) -> Result<ClientDecision> {
        let m = inst.m();
        if x.len() != m || y.len() != m {
            return Err(Error::Structural(format!("x and y need {m} entries")));
        }
        let mut opened = Vec::new();
        for i in 0..m {
            if !self.open[i] && y[i] >= self.thresholds[i] {
                self.open[i] = true;
                self.by_threshold[i] = true;
                opened.push(i);
            }
        }
        let threshold = 1.0 / (2.0 * m as f64);
        let support: Vec<usize> = (0..m)
            .filter(|&i| x[i] >= threshold && inst.entry(i, j).is_some())
            .collect();
        if support.is_empty() {
            return Err(Error::Structural(format!("client {j} has no facility with x >= 1/(2m)")));
        }
        let mut candidates = Vec::new();
        for &i in &support {
            if y[i] < x[i] {
                return Err(Error::Structural(format!("y_{i} = {} below x_{i}{j} = {}", y[i], x[i])));
            }
            if rng.gen::<f64>() < x[i].min(1.0) / y[i] {
                candidates.push(i);
            }
        }
        let (facility, step) = match candidates.iter().find(|&&i| self.open[i]) {
            Some(&i) => (i, RoundStep::Candidate),
            None => {
                let mut best = support[0];
                for &i in &support[1..] {
                    if inst.total(i, j) < inst.total(best, j) {
                        best = i;
                    }
                }
                if !self.open[best] {
                    self.open[best] = true;
                    opened.push(best);
                }
                (best, RoundStep::Fallback)
            }
        };
        Ok(ClientDecision { client: j, opened, candidates, facility, step })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EpochConfig {
    /// `K` in the failure threshold `K·Z·ln²(emn)·ln(2μmnρ)`.
    pub constant: f64,
    pub seed: u64,
}

impl Default for EpochConfig {
    fn default() -> Self {
        Self { constant: 512.0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochReport {
    pub index: usize,
    pub z: f64,
    pub first_client: usize,
    pub clients_assigned: usize,
    /// Realised cost of this epoch's own assignments and openings.
    pub cost: f64,
    /// Failure threshold at the last check.
    pub threshold: f64,
    pub failed: bool,
    pub gamma_trials: usize,
    pub phases: usize,
}

/// One line of the decision log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecisionRecord {
    pub epoch: usize,
    pub z: f64,
    #[serde(flatten)]
    pub decision: ClientDecision,
    /// Largest congestion among this epoch's assignments so far.
    pub congestion: f64,
}

#[derive(Clone, Debug)]
pub struct IntegralRun {
    pub assignment: Vec<usize>,
    pub epochs: Vec<EpochReport>,
    pub log: Vec<DecisionRecord>,
    /// Sum of the realised epoch costs.
    pub epoch_cost_sum: f64,
    /// Cost of the final assignment, charging every facility opened in any epoch.
    pub final_cost: AssignmentCost,
}

/// Epoch failure threshold with `ρ` taken over the clients seen so far.
fn epoch_threshold(inst: &CcflInstance, z: f64, k: f64, seen: usize) -> f64 {
    let (m, n) = (inst.m(), inst.n());
    let mn = (m * n) as f64;
    let mu = ccfl_step_constant(m, n);
    let l = (E * mn).ln();
    k * z * l * l * (2.0 * mu * mn * inst.rho_prefix(seen)).ln()
}

/// Runs epochs with doubling `Z` until every client is assigned. Epoch `e`
/// draws from random stream `e` of `config.seed`.
pub fn z_epochs(inst: &CcflInstance, config: EpochConfig) -> Result<IntegralRun> {
    if !(config.constant > 0.0 && config.constant.is_finite()) {
        return Err(Error::Config(format!("epoch constant must be positive, got {}", config.constant)));
    }
    let (m, n) = (inst.m(), inst.n());
    let mut assignment = vec![usize::MAX; n];
    let mut ever_open = vec![false; m];
    let (mut epochs, mut log) = (Vec::new(), Vec::new());
    let mut z = inst.min_total(0);
    let mut j = 0;
    while j < n {
        let index = epochs.len();
        let mut rng = stream_rng(config.seed, index as u64);
        let mut rounder = Rounder::new(m, n, &mut rng);
        let mut frac = FractionalCcfl::new(inst, z)?;
        let mut report = EpochReport {
            index,
            z,
            first_client: j,
            clients_assigned: 0,
            cost: 0.0,
            threshold: epoch_threshold(inst, z, config.constant, j + 1),
            failed: false,
            gamma_trials: 0,
            phases: 0,
        };
        let mut load = vec![0.0; m];
        let mut assign_cost = 0.0;
        while j < n {
            match frac.submit(j) {
                Ok(()) => {}
                Err(Error::NoCandidate { .. }) => {
                    report.failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
            let d = rounder.round_client(inst, j, &frac.x_client(j), &frac.y_total(), &mut rng)?;
            let e = inst.entry(d.facility, j).expect("rounded onto a serving facility");
            load[d.facility] += e.p;
            assign_cost += e.a;
            assignment[j] = d.facility;
            report.clients_assigned += 1;
            let fixed: f64 = (0..m).filter(|&i| rounder.open()[i]).map(|i| inst.fixed()[i]).fold(0.0, |s, c| s + c);
            let congestion = load.iter().copied().fold(0.0, f64::max);
            report.cost = congestion + fixed + assign_cost;
            report.threshold = epoch_threshold(inst, z, config.constant, j + 1);
            log.push(DecisionRecord { epoch: index, z, decision: d, congestion });
            j += 1;
            if report.cost > report.threshold {
                report.failed = j < n;
                break;
            }
        }
        // opened facilities are paid even if the epoch assigned nothing
        let fixed: f64 = (0..m).filter(|&i| rounder.open()[i]).map(|i| inst.fixed()[i]).fold(0.0, |s, c| s + c);
        if report.clients_assigned == 0 {
            report.cost = fixed;
        }
        for (acc, &o) in ever_open.iter_mut().zip(rounder.open()) {
            *acc |= o;
        }
        report.gamma_trials = frac.trials().count();
        report.phases = frac.trials().map(|t| t.phases()).sum();
        let failed = report.failed;
        epochs.push(report);
        if failed {
            z *= 2.0;
        }
    }
    let open: Vec<usize> = (0..m).filter(|&i| ever_open[i]).collect();
    let final_cost = inst.cost_with_open(&assignment, &open)?;
    Ok(IntegralRun {
        epoch_cost_sum: epochs.iter().map(|e: &EpochReport| e.cost).sum(),
        assignment,
        epochs,
        log,
        final_cost,
    })
}

/// Per-replication outcome of rounding one fixed fractional solution.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundingSample {
    /// Charges of the facilities opened by their threshold.
    pub threshold_charge: f64,
    /// Charges of every opened facility.
    pub opened_charge: f64,
    pub fallback: Vec<bool>,
    /// `max_i Σ_{j : i candidate of j} p_ij`.
    pub candidate_congestion: f64,
}

/// Aggregates over replications.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundingStats {
    pub replications: usize,
    pub mean_threshold_charge: f64,
    pub sd_threshold_charge: f64,
    pub mean_opened_charge: f64,
    /// Per-client frequency of the fallback step.
    pub fallback_freq: Vec<f64>,
    pub mean_candidate_congestion: f64,
}

/// Rounds every client once against the fixed `x` (client-major) and `y`,
/// drawing from stream `stream` of `seed`.
pub fn round_fixed(inst: &CcflInstance, x: &[f64], y: &[f64], seed: u64, stream: u64) -> Result<RoundingSample> {
    let (m, n) = (inst.m(), inst.n());
    if x.len() != m * n {
        return Err(Error::Structural(format!("x needs {} entries", m * n)));
    }
    let mut rng = stream_rng(seed, stream);
    let mut rounder = Rounder::new(m, n, &mut rng);
    let mut fallback = vec![false; n];
    let mut cand_load = vec![0.0; m];
    for j in 0..n {
        let d = rounder.round_client(inst, j, &x[j * m..(j + 1) * m], y, &mut rng)?;
        fallback[j] = d.step == RoundStep::Fallback;
        for &i in &d.candidates {
            cand_load[i] += inst.entry(i, j).expect("candidate serves the client").p;
        }
    }
    let charge = |mask: &[bool]| (0..m).filter(|&i| mask[i]).map(|i| inst.fixed()[i]).fold(0.0, |s, c| s + c);
    Ok(RoundingSample {
        threshold_charge: charge(rounder.opened_by_threshold()),
        opened_charge: charge(rounder.open()),
        fallback,
        candidate_congestion: cand_load.into_iter().fold(0.0, f64::max),
    })
}

/// Monte Carlo over `replications` independent streams, run in parallel.
/// Replication `k` uses stream `k` of `seed`, so the result does not depend
/// on the thread count.
pub fn rounding_monte_carlo(
    inst: &CcflInstance,
    x: &[f64],
    y: &[f64],
    seed: u64,
    replications: usize,
) -> Result<RoundingStats> {
    use rayon::prelude::*;
    if replications == 0 {
        return Err(Error::Config("need at least one replication".into()));
    }
    let samples: Vec<RoundingSample> = (0..replications as u64)
        .into_par_iter()
        .map(|k| round_fixed(inst, x, y, seed, k))
        .collect::<Result<_>>()?;
    let r = replications as f64;
    let mean_threshold_charge = samples.iter().map(|s| s.threshold_charge).sum::<f64>() / r;
    let var = samples
        .iter()
        .map(|s| (s.threshold_charge - mean_threshold_charge).powi(2))
        .sum::<f64>()
        / (r - 1.0).max(1.0);
    let mut fallback_freq = vec![0.0; inst.n()];
    for s in &samples {
        for (f, &b) in fallback_freq.iter_mut().zip(&s.fallback) {
            *f += f64::from(u8::from(b));
        }
    }
    fallback_freq.iter_mut().for_each(|f| *f /= r);
    Ok(RoundingStats {
        replications,
        mean_threshold_charge,
        sd_threshold_charge: var.sqrt(),
        mean_opened_charge: samples.iter().map(|s| s.opened_charge).sum::<f64>() / r,
        fallback_freq,
        mean_candidate_congestion: samples.iter().map(|s| s.candidate_congestion).sum::<f64>() / r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn repetition_counts() {
        assert_eq!(rounding_repetitions(10), 26);
        assert_eq!(rounding_repetitions(20), 33);
    }

    #[test]
    fn certain_facility_is_used() {
        let inst = CcflInstance::new(
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            vec![vec![(0, 1.0, 0.0), (1, 1.0, 0.0)]; 2],
        )
        .unwrap();
        let mut rng = stream_rng(3, 0);
        let mut r = Rounder::new(2, 2, &mut rng);
        let d = r.round_client(&inst, 0, &[1.0, 0.0], &[1.0, 0.0], &mut rng).unwrap();
        assert_eq!(d.facility, 0);
        assert_eq!(d.step, RoundStep::Candidate);
        assert_eq!(d.opened, vec![0]);
    }

    #[test]
    fn empty_support_is_an_error() {
        let inst = CcflInstance::new(vec![1.0; 3], vec![1.0; 3], vec![vec![(0, 1.0, 0.0)]; 2]).unwrap();
        let mut rng = stream_rng(3, 0);
        let mut r = Rounder::new(3, 2, &mut rng);
        assert!(r.round_client(&inst, 0, &[0.1, 0.0, 0.0], &[1.0; 3], &mut rng).is_err());
    }

    #[test]
    fn epochs_assign_everyone() {
        let inst = CcflInstance::new(
            vec![1.0, 2.0, 0.5],
            vec![1.0, 2.0, 1.0],
            (0..5)
                .map(|j| vec![(0, 1.0 + j as f64 * 0.1, 0.2), (1, 0.5, 0.1), (2, 2.0, 0.0)])
                .collect(),
        )
        .unwrap();
        let run = z_epochs(&inst, EpochConfig::default()).unwrap();
        assert!(run.assignment.iter().all(|&i| i < 3));
        assert_eq!(run.log.len(), 5);
        let again = z_epochs(&inst, EpochConfig::default()).unwrap();
        assert_eq!(run.assignment, again.assignment);
    }
}
