//! `ompc`: command-line front end for the online solvers, adversaries,
//! oracle and experiment suites.
//!
//! Exit codes: 0 when every requested check passes, 1 on a bound
//! violation, 2 on bad input or any other error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use online_mpc::adversary::{tree_adversary, tree_packing, umsc_lower_bound};
use online_mpc::ccfl::{gamma_trials, rounding_monte_carlo, rounding_repetitions, umsc_to_ccfl, z_epochs, EpochConfig};
use online_mpc::harness::{
    emit_instance, ompc_record, parse_instance, run_experiment, tree_record, ExperimentConfig, ExperimentRecord, ExperimentReport,
    Instance, OmpcInstance, Suite,
};
use online_mpc::mpc::OnlineMpc;
use online_mpc::oracle::{brute_force_zstar, ccfl_opt1, ompc_opt};
use online_mpc::{Error, Result};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "ompc", version, about = "Online packing/covering and facility-location solvers")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit with status 1 if a bound check fails.
    #[arg(long, global = true)]
    bound_check: bool,
    /// Constant K of the epoch failure threshold.
    #[arg(long, global = true, default_value_t = EpochConfig::default().constant)]
    epoch_constant: f64,
    /// Multiplies every upper bound before checking; below 1 tightens the checks.
    #[arg(long, global = true, default_value_t = 1.0)]
    bound_scale: f64,
    /// Record wall time in reports (makes them non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the online packing/covering solver and compare with the LP optimum.
    SolveOmpc {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Play a lower-bound adversary and report (or emit) the instance.
    Adversary {
        #[arg(long, value_enum, default_value_t = AdversaryKind::Tree)]
        kind: AdversaryKind,
        /// Leaves of the tree, or machines for the scheduling sequence.
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// Block size of the tree.
        #[arg(long, default_value_t = 8)]
        d: usize,
        /// Optimal makespan of the scheduling sequence.
        #[arg(long, default_value_t = 5.0)]
        t_star: f64,
        /// Also write the generated instance here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Run the facility-location pipeline; writes one JSON decision per line.
    SolveCcfl {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Monte Carlo rounding of the fractional solution at a fixed Z.
    Round {
        #[arg(long)]
        instance: PathBuf,
        /// Cost guess; the brute-force optimum when absent.
        #[arg(long)]
        z: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        replications: usize,
    },
    /// Solve an instance offline.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        /// Cost guess for the facility-location relaxation.
        #[arg(long)]
        z: Option<f64>,
    },
    /// Run an experiment suite and write its CSV report.
    Suite {
        #[arg(long, value_enum)]
        name: SuiteName,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 2000)]
        replications: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AdversaryKind {
    Tree,
    Umsc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteName {
    OmpcRandom,
    Tree,
    CcflRandom,
}

impl From<SuiteName> for Suite {
    fn from(s: SuiteName) -> Self {
        match s {
            SuiteName::OmpcRandom => Suite::OmpcRandom,
            SuiteName::Tree => Suite::Tree,
            SuiteName::CcflRandom => Suite::CcflRandom,
        }
    }
}

fn load(path: &PathBuf) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}

fn load_ompc(path: &PathBuf) -> Result<OmpcInstance> {
    match load(path)? {
        Instance::Ompc(o) => Ok(o),
        Instance::Ccfl(_) => Err(Error::Config("expected an ompc instance".into())),
    }
}

fn load_ccfl(path: &PathBuf) -> Result<online_mpc::ccfl::CcflInstance> {
    match load(path)? {
        Instance::Ccfl(c) => Ok(c),
        Instance::Ompc(_) => Err(Error::Config("expected a ccfl instance".into())),
    }
}

fn write_out(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Prints the violating records and reports whether all checks passed.
fn check_records(records: &[ExperimentRecord]) -> bool {
    let mut ok = true;
    for r in records {
        for v in r.violations() {
            eprintln!("bound violation: {} {} {}: {v}", r.instance, r.algorithm, r.seed);
            ok = false;
        }
    }
    ok
}

fn report(cli: &Cli, mut records: Vec<ExperimentRecord>) -> Result<bool> {
    for r in &mut records {
        r.bound = r.bound.map(|b| b * cli.bound_scale);
    }
    let ok = check_records(&records);
    write_out(cli, &ExperimentReport { records }.to_csv()?)?;
    Ok(ok)
}

fn json_line(v: &serde_json::Value) -> String {
    format!("{v}\n")
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::SolveOmpc { instance } => {
            let inst = load_ompc(instance)?;
            report(cli, vec![ompc_record(instance.display().to_string(), cli.seed, &inst)?])
        }
        Command::Adversary { kind: AdversaryKind::Tree, m, d, emit, .. } => {
            let mut solver = OnlineMpc::new(tree_packing(*m, *d)?);
            let run = tree_adversary(*m, *d, &mut solver)?;
            let inst = OmpcInstance { packing: run.packing.clone(), rows: run.transcript.clone() };
            if let Some(p) = emit {
                fs::write(p, emit_instance(&Instance::Ompc(inst.clone())))?;
            }
            report(cli, vec![tree_record(&run, &solver, cli.seed)?])
        }
        Command::Adversary { kind: AdversaryKind::Umsc, m, t_star, emit, .. } => {
            let u = umsc_lower_bound(*m, *t_star, None)?;
            let text = emit_instance(&Instance::Ccfl(umsc_to_ccfl(&u)?));
            match emit {
                Some(p) => fs::write(p, &text)?,
                None => write_out(cli, &text)?,
            }
            Ok(true)
        }
        Command::SolveCcfl { instance } => {
            let inst = load_ccfl(instance)?;
            let run = z_epochs(&inst, EpochConfig { constant: cli.epoch_constant, seed: cli.seed })?;
            let mut text = String::new();
            for rec in &run.log {
                text.push_str(&json_line(&serde_json::to_value(rec).expect("records serialise")));
            }
            write_out(cli, &text)?;
            let summary = json!({
                "epochs": run.epochs,
                "final_cost": run.final_cost.total,
                "congestion": run.final_cost.congestion,
                "fixed": run.final_cost.fixed,
                "assignment": run.final_cost.assignment,
                "epoch_cost_sum": run.epoch_cost_sum,
            });
            eprintln!("{summary}");
            if !cli.bound_check {
                return Ok(true);
            }
            let zstar = brute_force_zstar(&inst)?;
            Ok(run.final_cost.total >= zstar.value * (1.0 - online_mpc::harness::REPORT_TOLERANCE))
        }
        Command::Round { instance, z, replications } => {
            let inst = load_ccfl(instance)?;
            let z = match z {
                Some(z) => *z,
                None => brute_force_zstar(&inst)?.value,
            };
            let frac = gamma_trials(&inst, z)?;
            let y = frac.y_total();
            let stats = rounding_monte_carlo(&inst, &frac.x_total(), &y, cli.seed, *replications)?;
            let r = rounding_repetitions(inst.n()) as f64;
            let reference = r * inst.fixed().iter().zip(&y).map(|(c, y)| c * y).sum::<f64>();
            let bound = cli.bound_scale * (reference + 3.0 * stats.sd_threshold_charge / (*replications as f64).sqrt());
            let ok = stats.mean_threshold_charge <= bound;
            write_out(cli, &json_line(&json!({ "z": z, "stats": stats, "charge_bound": bound, "pass": ok })))?;
            Ok(ok || !cli.bound_check)
        }
        Command::Oracle { instance, z } => {
            let v = match load(instance)? {
                Instance::Ompc(o) => {
                    let opt = ompc_opt(&o.packing, &o.rows)?;
                    json!({ "opt": opt.opt, "x": opt.x, "y": opt.y, "z": opt.z })
                }
                Instance::Ccfl(c) => {
                    let zstar = match z {
                        Some(_) => None,
                        None => Some(brute_force_zstar(&c)?),
                    };
                    let zv = z.unwrap_or_else(|| zstar.as_ref().expect("computed above").value);
                    let opt1 = ccfl_opt1(&c, zv)?;
                    json!({
                        "z": zv,
                        "zstar": zstar.as_ref().map(|s| s.value),
                        "zstar_assignment": zstar.map(|s| s.assignment),
                        "opt1": opt1.value,
                        "y": opt1.y,
                        "lambda": opt1.lambda,
                    })
                }
            };
            write_out(cli, &json_line(&v))?;
            Ok(true)
        }
        Command::Suite { name, instances, replications } => {
            let mut cfg = ExperimentConfig::new((*name).into(), cli.seed);
            cfg.instances = *instances;
            cfg.replications = *replications;
            cfg.epoch_constant = cli.epoch_constant;
            cfg.timing = cli.timing;
            let rep = run_experiment(&cfg)?;
            report(cli, rep.records)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if cli.bound_check => ExitCode::from(1),
        Ok(false) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
