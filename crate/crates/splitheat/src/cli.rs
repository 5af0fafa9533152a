//! Command line definition and dispatch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use splitheat_core::{CgOptions, Domain, InitialDatum, Lambda, PicardConfig, Scheme};

use crate::checks;
use crate::config::Config;
use crate::harness::{run_table, run_timing, ExperimentPlan};
use crate::meshdump::write_mesh;
use crate::output::{write_tables, write_timing};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "splitheat", version, about = "Lie splitting for the semilinear heat equation: convergence tables and timing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sequential-error table over a ladder of step counts.
    Run(RunArgs),
    /// Wall-clock comparison of the three schemes at one step count.
    Timing(TimingArgs),
    /// Scalar property checks and splitting-order fits.
    Verify(VerifyArgs),
    /// Dump a mesh in plain text.
    Mesh(MeshArgs),
}

/// Problem flags shared by `run` and `timing`. Unset flags fall back to the
/// config file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// key = value file with the same keys as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// square | lshape | cube (default: the datum's domain, else square)
    #[arg(long)]
    pub domain: Option<String>,
    /// phi0 | phi1 | phi2 | sing | varphi0 | varphi1 | varphi2
    #[arg(long)]
    pub datum: Option<String>,
    /// lie | type1 | type2 [default: lie]
    #[arg(long)]
    pub scheme: Option<String>,
    /// Exponent p >= 2 [default: 2.5]
    #[arg(long)]
    pub p: Option<f64>,
    /// 1 or -1 [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Final time [default: 0.1]
    #[arg(long = "T")]
    pub final_time: Option<f64>,
    /// Mesh level j, h = 2^-j [default: 6]
    #[arg(long)]
    pub mesh_level: Option<u32>,
    /// Jacobi-preconditioned CG.
    #[arg(long)]
    pub jacobi: bool,
    /// Relative CG tolerance [default: 1e-10]
    #[arg(long)]
    pub cg_tol: Option<f64>,
    /// Picard tolerance for type1 [default: 1e-10]
    #[arg(long)]
    pub picard_tol: Option<f64>,
    /// Picard iteration cap for type1 [default: 50]
    #[arg(long)]
    pub picard_max_iter: Option<usize>,
    /// Output CSV (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated step counts, each twice the previous [default: 128,256,512,1024,2048]
    #[arg(long, value_delimiter = ',')]
    pub nk: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Step count shared by all schemes.
    #[arg(long, default_value_t = 256)]
    pub steps: usize,
    /// Repetitions per scheme; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 6)]
    pub mesh_level: u32,
    #[arg(long, default_value_t = 2.5)]
    pub p: f64,
    #[arg(long = "T", default_value_t = 0.1)]
    pub final_time: f64,
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    pub ladder: Vec<usize>,
    /// Random samples per scalar check.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// OrderFit CSV (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long, default_value = "square")]
    pub domain: String,
    #[arg(long, default_value_t = 2)]
    pub level: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_lambda(v: f64) -> Result<Lambda> {
    Ok(Lambda::from_value(v)?)
}

fn lookup<T>(flag: Option<T>, config: Option<&Config>, key: &str, parse: impl FnOnce(&str) -> Option<T>) -> Result<Option<T>> {
    match (flag, config) {
        (Some(v), _) => Ok(Some(v)),
        (None, Some(c)) => c.get(key, parse),
        (None, None) => Ok(None),
    }
}

impl ProblemArgs {
    /// Merge flags, config file and defaults into a plan with the given step ladder.
    pub fn resolve(&self, nk: Option<Vec<usize>>) -> Result<(ExperimentPlan, Option<PathBuf>)> {
        let config = self.config.as_deref().map(Config::load).transpose()?;
        let cfg = config.as_ref();
        let text = |flag: &Option<String>, key: &str| lookup(flag.clone(), cfg, key, |s| Some(s.to_string()));

        let datum = text(&self.datum, "datum")?
            .map(|s| InitialDatum::from_id(&s).ok_or_else(|| Error::param(format!("unknown datum `{s}`"))))
            .transpose()?;
        let domain = match text(&self.domain, "domain")? {
            Some(s) => Domain::from_id(&s).ok_or_else(|| Error::param(format!("unknown domain `{s}`")))?,
            None => datum.map_or(Domain::UnitSquare, InitialDatum::domain),
        };
        let datum = datum.unwrap_or(match domain {
            Domain::UnitSquare => InitialDatum::Phi0,
            Domain::LShape => InitialDatum::Sing,
            Domain::UnitCube => InitialDatum::VarPhi0,
        });
        let scheme = match text(&self.scheme, "scheme")? {
            Some(s) => Scheme::from_id(&s).ok_or_else(|| Error::param(format!("unknown scheme `{s}`")))?,
            None => Scheme::Lie,
        };
        let num = |s: &str| s.parse::<f64>().ok();
        let lambda = match lookup(self.lambda, cfg, "lambda", num)? {
            Some(v) => parse_lambda(v)?,
            None => Lambda::Plus,
        };
        let defaults = ExperimentPlan::standard();
        let steps = match nk {
            Some(v) => Some(v),
            None => cfg.map(|c| c.get("nk", |s| s.split(',').map(|x| x.trim().parse().ok()).collect())).transpose()?.flatten(),
        };
        let plan = ExperimentPlan {
            domain,
            datum,
            scheme,
            p: lookup(self.p, cfg, "p", num)?.unwrap_or(defaults.p),
            lambda,
            final_time: lookup(self.final_time, cfg, "T", num)?.unwrap_or(defaults.final_time),
            mesh_level: lookup(self.mesh_level, cfg, "mesh-level", |s| s.parse().ok())?.unwrap_or(defaults.mesh_level),
            steps: steps.unwrap_or(defaults.steps),
            solver: CgOptions {
                tol: lookup(self.cg_tol, cfg, "cg-tol", num)?.unwrap_or(defaults.solver.tol),
                jacobi: self.jacobi || lookup(None, cfg, "jacobi", |s| s.parse::<bool>().ok())?.unwrap_or(false),
                ..defaults.solver
            },
            picard: PicardConfig {
                tol: lookup(self.picard_tol, cfg, "picard-tol", num)?.unwrap_or(defaults.picard.tol),
                max_iter: lookup(self.picard_max_iter, cfg, "picard-max-iter", |s| s.parse().ok())?
                    .unwrap_or(defaults.picard.max_iter),
            },
        };
        let out = lookup(self.out.clone(), cfg, "out", |s| Some(PathBuf::from(s)))?;
        Ok((plan, out))
    }
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::io(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| Error::io(p, e))?;
            info!("wrote {}", p.display());
            Ok(())
        }
        None => f(&mut std::io::stdout().lock()),
    }
}

/// Execute a parsed command line. `Ok(false)` means `verify` found a failing check.
pub fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => {
            let (plan, out) = args.problem.resolve(args.nk)?;
            let table = run_table(&plan)?;
            with_output(out.as_deref(), |w| write_tables(w, std::slice::from_ref(&table)))?;
            Ok(true)
        }
        Command::Timing(args) => {
            let (plan, out) = args.problem.resolve(Some(vec![args.steps]))?;
            let records = run_timing(&plan, &Scheme::ALL, args.steps, args.repeat)?;
            with_output(out.as_deref(), |w| write_timing(w, &plan, &records))?;
            Ok(true)
        }
        Command::Verify(args) => {
            let mut outcomes = vec![
                checks::flow_oracle(args.samples.clamp(1, 1000), args.seed)?,
                checks::consistency_bound(args.samples, args.seed + 1)?,
                checks::lipschitz_bound(args.samples, args.seed + 2)?,
            ];
            let mut fits = Vec::new();
            for lambda in [Lambda::Plus, Lambda::Minus] {
                let (outcome, fit) = checks::order_study(lambda, args.p, args.final_time, args.mesh_level, &args.ladder)?;
                outcomes.push(outcome);
                fits.push((lambda, fit));
            }
            for o in &outcomes {
                eprintln!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            with_output(args.out.as_deref(), |w| checks::write_fits(w, &fits))?;
            Ok(outcomes.iter().all(|o| o.passed))
        }
        Command::Mesh(args) => {
            let domain = Domain::from_id(&args.domain).ok_or_else(|| Error::param(format!("unknown domain `{}`", args.domain)))?;
            let mesh = domain.build(args.level)?;
            let path = args.out.as_deref();
            with_output(path, |w| write_mesh(w, &mesh).map_err(|e| Error::io(path.unwrap_or(Path::new("<stdout>")), e)))?;
            Ok(true)
        }
    }
}
