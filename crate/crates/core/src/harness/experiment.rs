//! Suites of (instance, seed) cells and their CSV reports.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::format::OmpcInstance;
use super::generate::{gen_random_ccfl, gen_random_ompc, CcflGenConfig};
use crate::adversary::{optimal_witness, tree_adversary, tree_packing, TreeAdversaryRun};
use crate::ccfl::{gamma_trials, rounding_monte_carlo, rounding_repetitions, z_epochs, CcflInstance, EpochConfig};
use crate::mpc::OnlineMpc;
use crate::oracle::{brute_force_zstar, ompc_opt};
use crate::penalty::{dual_scale, kappa, step_constant, violation};
use crate::rng::stream_rng;
use crate::{Error, Result};

/// Tolerance for ratios below one and for the tree optimum.
pub const REPORT_TOLERANCE: f64 = 1e-9;

/// Tree adversary grid: `(m, d)` pairs.
pub const TREE_GRID: [(usize, usize); 6] = [(4, 8), (4, 16), (8, 8), (8, 16), (16, 8), (16, 16)];

/// Instance statistics recomputed from the instance itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmpcStats {
    /// Largest row support over packing and covering rows.
    pub d: usize,
    pub rho: f64,
    pub kappa: f64,
    pub mu: f64,
    pub sigma: f64,
    /// `32σ ln(em)`.
    pub bound: f64,
}

pub fn ompc_stats(inst: &OmpcInstance) -> OmpcStats {
    let p = &inst.packing;
    let d = inst.rows.iter().map(|r| r.len()).fold(p.max_row_nnz(), usize::max);
    let rho = p.rho();
    let kappa = kappa(&inst.rows);
    let mu = step_constant(p.rows());
    let sigma = dual_scale(mu, d, rho, kappa);
    OmpcStats {
        d,
        rho,
        kappa,
        mu,
        sigma,
        bound: 32.0 * sigma * (std::f64::consts::E * p.rows() as f64).ln(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    OmpcRandom,
    Tree,
    CcflRandom,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::OmpcRandom => "ompc-random",
            Suite::Tree => "tree",
            Suite::CcflRandom => "ccfl-random",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ompc-random" => Ok(Suite::OmpcRandom),
            "tree" => Ok(Suite::Tree),
            "ccfl-random" => Ok(Suite::CcflRandom),
            other => Err(Error::Config(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub seed: u64,
    /// Number of random instances; the tree suite always runs its grid.
    pub instances: usize,
    /// Monte Carlo replications per facility-location instance.
    pub replications: usize,
    pub epoch_constant: f64,
    /// Fill the wall-time column. Off by default so reports are byte-stable.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(suite: Suite, seed: u64) -> Self {
        Self {
            suite,
            seed,
            instances: 20,
            replications: 2000,
            epoch_constant: EpochConfig::default().constant,
            timing: false,
        }
    }
}

/// One report row. Empty columns are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub instance: String,
    pub seed: u64,
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub d: Option<usize>,
    pub rho: Option<f64>,
    pub kappa: Option<f64>,
    pub sigma: Option<f64>,
    pub online: f64,
    pub oracle: Option<f64>,
    pub ratio: Option<f64>,
    /// Upper bound on `ratio`, or on `online` when there is no oracle.
    pub bound: Option<f64>,
    /// Lower bound on `online`.
    pub lower_bound: Option<f64>,
    /// Value the oracle must reproduce.
    pub oracle_expected: Option<f64>,
    pub phases: Option<usize>,
    pub trials: Option<usize>,
    pub epochs: Option<usize>,
    pub wall_ms: Option<f64>,
}

impl ExperimentRecord {
    fn new(instance: String, seed: u64, algorithm: &str, m: usize, n: usize, online: f64) -> Self {
        Self {
            instance,
            seed,
            algorithm: algorithm.to_string(),
            m,
            n,
            d: None,
            rho: None,
            kappa: None,
            sigma: None,
            online,
            oracle: None,
            ratio: None,
            bound: None,
            lower_bound: None,
            oracle_expected: None,
            phases: None,
            trials: None,
            epochs: None,
            wall_ms: None,
        }
    }

    fn with_oracle(mut self, oracle: f64) -> Self {
        self.oracle = Some(oracle);
        self.ratio = Some(self.online / oracle);
        self
    }

    /// Descriptions of every check this record fails.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.online.is_finite() {
            out.push(format!("online value {} is not finite", self.online));
        }
        if let Some(r) = self.ratio {
            if !(r >= 1.0 - REPORT_TOLERANCE) {
                out.push(format!("ratio {r} below 1"));
            }
        }
        if let Some(b) = self.bound {
            let v = self.ratio.unwrap_or(self.online);
            if !(v <= b) {
                out.push(format!("{v} exceeds bound {b}"));
            }
        }
        if let Some(lb) = self.lower_bound {
            if !(self.online >= lb - REPORT_TOLERANCE) {
                out.push(format!("online {} below lower bound {lb}", self.online));
            }
        }
        if let (Some(e), Some(o)) = (self.oracle_expected, self.oracle) {
            if (o - e).abs() > REPORT_TOLERANCE {
                out.push(format!("oracle {o} differs from expected {e}"));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<ExperimentRecord>,
}

impl ExperimentReport {
    pub fn violations(&self) -> Vec<(&ExperimentRecord, Vec<String>)> {
        self.records
            .iter()
            .map(|r| (r, r.violations()))
            .filter(|(_, v)| !v.is_empty())
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        let mut text = String::from_utf8(bytes).expect("csv output is utf-8");
        if self.records.is_empty() {
            text = csv_header();
        }
        Ok(text)
    }
}

/// Header line of the report.
pub fn csv_header() -> String {
    "instance,seed,algorithm,m,n,d,rho,kappa,sigma,online,oracle,ratio,bound,lower_bound,\
     oracle_expected,phases,trials,epochs,wall_ms\n"
        .to_string()
}

fn cell_seed(seed: u64, cell: usize) -> u64 {
    stream_rng(seed, cell as u64).gen()
}

/// Online solver and simplex oracle on one packing/covering instance.
pub fn ompc_record(id: String, seed: u64, inst: &OmpcInstance) -> Result<ExperimentRecord> {
    let stats = ompc_stats(inst);
    let solver = OnlineMpc::run(&inst.packing, &inst.rows)?;
    let sol = solver.solution();
    let opt = ompc_opt(&inst.packing, &inst.rows)?;
    let mut rec = ExperimentRecord::new(id, seed, "mpc-approx", inst.packing.rows(), inst.packing.cols(), sol.lambda)
        .with_oracle(opt.opt);
    rec.d = Some(stats.d);
    rec.rho = Some(stats.rho);
    rec.kappa = Some(stats.kappa);
    rec.sigma = Some(stats.sigma);
    rec.bound = Some(stats.bound);
    rec.phases = Some(sol.trials.iter().map(|t| t.phases).sum());
    rec.trials = Some(sol.trials.len());
    Ok(rec)
}

fn ompc_cell(k: usize, seed: u64) -> Result<Vec<ExperimentRecord>> {
    let mut rng = stream_rng(seed, 1);
    let m = rng.gen_range(2..=20);
    let n = rng.gen_range(2..=30);
    let rows = rng.gen_range(1..=30);
    let density = rng.gen_range(0.15..0.5);
    let inst = gen_random_ompc(m, n, rows, density, (1.0, 4.0), seed)?;
    Ok(vec![ompc_record(format!("ompc-random-{k:03}"), seed, &inst)?])
}

/// Report row for a finished tree adversary run. The oracle column is the
/// violation of the integral witness; the LP optimum can lie below it.
pub fn tree_record(run: &TreeAdversaryRun, solver: &OnlineMpc, seed: u64) -> Result<ExperimentRecord> {
    let witness = optimal_witness(run)?;
    let sol = solver.solution();
    let (m, d) = (run.m, run.d);
    let mut rec = ExperimentRecord::new(format!("tree-m{m}-d{d}"), seed, "mpc-approx", m, run.packing.cols(), run.lambda())
        .with_oracle(violation(&run.packing, &witness)?);
    rec.d = Some(d);
    rec.lower_bound = Some(run.target());
    rec.oracle_expected = Some(1.0);
    rec.phases = Some(sol.trials.iter().map(|t| t.phases).sum());
    rec.trials = Some(sol.trials.len());
    Ok(rec)
}

fn tree_cell(m: usize, d: usize, seed: u64) -> Result<Vec<ExperimentRecord>> {
    let mut solver = OnlineMpc::new(tree_packing(m, d)?);
    let run = tree_adversary(m, d, &mut solver)?;
    Ok(vec![tree_record(&run, &solver, seed)?])
}

/// Epoch driver against the brute-force optimum, then Monte Carlo rounding
/// of the fractional solution at `Z*`.
pub fn ccfl_records(
    id: &str,
    seed: u64,
    inst: &CcflInstance,
    epoch_constant: f64,
    replications: usize,
) -> Result<Vec<ExperimentRecord>> {
    let (m, n) = (inst.m(), inst.n());
    let zstar = brute_force_zstar(inst)?;
    let run = z_epochs(inst, EpochConfig { constant: epoch_constant, seed })?;
    let mut epochs = ExperimentRecord::new(id.to_string(), seed, "ccfl-epochs", m, n, run.final_cost.total)
        .with_oracle(zstar.value);
    epochs.rho = Some(inst.rho());
    epochs.phases = Some(run.epochs.iter().map(|e| e.phases).sum());
    epochs.trials = Some(run.epochs.iter().map(|e| e.gamma_trials).sum());
    epochs.epochs = Some(run.epochs.len());

    let frac = gamma_trials(inst, zstar.value)?;
    let (x, y) = (frac.x_total(), frac.y_total());
    let stats = rounding_monte_carlo(inst, &x, &y, seed, replications)?;
    let r = rounding_repetitions(n) as f64;
    let reference: f64 = inst.fixed().iter().zip(&y).map(|(c, y)| c * y).sum::<f64>() * r;
    let mut rounding = ExperimentRecord::new(id.to_string(), seed, "ccfl-rounding", m, n, stats.mean_threshold_charge);
    rounding.rho = Some(inst.rho());
    rounding.sigma = Some(frac.current().sigma());
    rounding.bound = Some(reference + 3.0 * stats.sd_threshold_charge / (replications as f64).sqrt());
    rounding.phases = Some(frac.trials().map(|t| t.phases()).sum());
    rounding.trials = Some(frac.trials().count());
    Ok(vec![epochs, rounding])
}

fn ccfl_cell(k: usize, seed: u64, config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let mut rng = stream_rng(seed, 1);
    let m = rng.gen_range(2..=5);
    let n = rng.gen_range(4..=10);
    let inst = gen_random_ccfl(&CcflGenConfig::new(m, n), seed)?;
    ccfl_records(&format!("ccfl-random-{k:03}"), seed, &inst, config.epoch_constant, config.replications)
}

/// Runs every cell of the suite in parallel; records come back in cell order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.suite != Suite::Tree && config.instances == 0 {
        return Err(Error::Config("need at least one instance".into()));
    }
    let cells = match config.suite {
        Suite::Tree => TREE_GRID.len(),
        _ => config.instances,
    };
    let per_cell: Vec<Vec<ExperimentRecord>> = (0..cells)
        .into_par_iter()
        .map(|k| {
            let seed = cell_seed(config.seed, k);
            let start = Instant::now();
            let mut recs = match config.suite {
                Suite::OmpcRandom => ompc_cell(k, seed)?,
                Suite::Tree => tree_cell(TREE_GRID[k].0, TREE_GRID[k].1, seed)?,
                Suite::CcflRandom => ccfl_cell(k, seed, config)?,
            };
            if config.timing {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                recs.iter_mut().for_each(|r| r.wall_ms = Some(ms));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentReport { records: per_cell.into_iter().flatten().collect() })
}
