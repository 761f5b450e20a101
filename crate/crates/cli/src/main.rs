mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use adaptive_cone::approximation::{
    alg_ball, alg_pilot, alg_tracking, ball_cost, pilot_complexity_lower, pilot_cost_bound, pilot_omega,
    regularity, tracking_complexity_lower, tracking_cost_bound, tracking_omega, ApproxOutcome, OrderedWeights,
    PilotConeSpec, TrackingConeSpec,
};
use adaptive_cone::experiments::{run_experiment, write_csv, write_jsonl, ExperimentConfig};
use adaptive_cone::inference::{alg_inferred, infer_weights_with, InferredSpec, InitialSample};
use adaptive_cone::spaces::{sol_operator_norm, CoefficientOracle};
use adaptive_cone::tractability::{strong_tractability, witness_on_grid};
use adaptive_cone::{Execution, WavenumberStream};

use config::{AlgorithmConfig, ApproxConfig, DiagnoseConfig, EnumerateConfig, InferConfig};

/// Adaptive approximation with guaranteed error bounds over cones of
/// series coefficients.
#[derive(Parser, Debug)]
#[command(name = "adacone", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for random sources and experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Override a configuration entry, e.g. `--set eps=1e-3` or
    /// `--set algorithm.n1=8`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Print the resolved configuration with all defaults and exit.
    #[arg(long, global = true)]
    show_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the ball, pilot or tracking algorithm on one input.
    Approx,
    /// Infer weights from the initial axis sample, then optionally
    /// approximate with them.
    Infer,
    /// Random-function experiment; writes one CSV row per (d, ε, seed).
    Experiment {
        /// Also write the rows as JSON lines to this file.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
    /// Cost and complexity bounds, operator norm and tractability.
    Diagnose,
    /// The first wavenumbers in weight order.
    Enumerate,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let exec = execution(cli.jobs)?;
    let resolved = config::resolve(Value::Object(Map::new()), cli.config.as_deref(), &cli.overrides)?;
    match &cli.command {
        Command::Approx => {
            let mut cfg: ApproxConfig = config::parse(resolved)?;
            if let Some(s) = cli.seed {
                cfg.source.set_seed(s);
            }
            if cli.show_config {
                return show(cli, &cfg);
            }
            approx(cli, &cfg)
        }
        Command::Infer => {
            let mut cfg: InferConfig = config::parse(resolved)?;
            if let Some(s) = cli.seed {
                cfg.source.set_seed(s);
            }
            if cli.show_config {
                return show(cli, &cfg);
            }
            infer(cli, &cfg, exec)
        }
        Command::Experiment { jsonl } => {
            let mut cfg: ExperimentConfig = config::parse(resolved)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if cli.show_config {
                return show(cli, &cfg);
            }
            experiment(cli, &cfg, jsonl.as_deref(), exec)
        }
        Command::Diagnose => {
            let cfg: DiagnoseConfig = config::parse(resolved)?;
            if cli.show_config {
                return show(cli, &cfg);
            }
            diagnose(cli, &cfg)
        }
        Command::Enumerate => {
            let cfg: EnumerateConfig = config::parse(resolved)?;
            if cli.show_config {
                return show(cli, &cfg);
            }
            enumerate(cli, &cfg)
        }
    }
}

fn execution(jobs: Option<usize>) -> Result<Execution> {
    match jobs {
        None => Ok(Execution::Parallel),
        Some(0) => bail!("--jobs must be positive"),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the thread pool")?;
            #[cfg(not(feature = "parallel"))]
            log::warn!("built without the parallel feature; ignoring --jobs {n}");
            Ok(Execution::Parallel)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())?;
            o.flush()?;
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn show<T: Serialize>(cli: &Cli, cfg: &T) -> Result<u8> {
    emit(cli.out.as_deref(), &pretty(cfg)?)?;
    Ok(0)
}

fn outcome_code(o: &ApproxOutcome) -> u8 {
    if o.tolerance_met() {
        0
    } else {
        2
    }
}

fn approx(cli: &Cli, cfg: &ApproxConfig) -> Result<u8> {
    let source = cfg.source.load()?;
    let f = source.as_dyn();
    if f.dim() != cfg.model.dim() {
        bail!("source has dimension {} but the model has {}", f.dim(), cfg.model.dim());
    }
    let mut oracle = CoefficientOracle::new(f);
    let mut weights = OrderedWeights::new(&cfg.model, cfg.space)?;
    let outcome = match &cfg.algorithm {
        AlgorithmConfig::Ball { radius } => alg_ball(&mut oracle, &mut weights, *radius, cfg.eps, cfg.budget)?,
        AlgorithmConfig::Pilot { n1, inflation } => {
            let spec = PilotConeSpec::new(*n1, *inflation)?;
            alg_pilot(&mut oracle, &mut weights, &spec, cfg.eps, cfg.budget)?
        }
        AlgorithmConfig::Tracking { n_seq, a, b } => {
            let spec = TrackingConeSpec::new(*n_seq, *a, *b)?;
            alg_tracking(&mut oracle, &mut weights, &spec, cfg.eps, cfg.budget)?
        }
    };
    if let Some(t) = source.table() {
        log::info!("residual norm {}", outcome.residual_norm(t, cfg.space.tau()));
    }
    if outcome.cone_violated {
        log::warn!("the input left the cone; the error bound is not certified");
    }
    emit(cli.out.as_deref(), &pretty(&outcome)?)?;
    Ok(outcome_code(&outcome))
}

fn infer(cli: &Cli, cfg: &InferConfig, exec: Execution) -> Result<u8> {
    let source = cfg.source.load()?;
    let f = source.as_dyn();
    let gamma = cfg.gamma.clone().unwrap_or_else(|| vec![1.0; f.dim() + 1]);
    let mut oracle = CoefficientOracle::new(f);
    match cfg.eps {
        Some(eps) => {
            let spec = InferredSpec { inflation: cfg.inflation, n1: cfg.n1 };
            let (outcome, inferred) = alg_inferred(
                &mut oracle,
                &cfg.space,
                &cfg.candidates,
                &gamma,
                &spec,
                eps,
                cfg.budget,
                exec,
            )?;
            emit(cli.out.as_deref(), &pretty(&json!({ "inferred": inferred, "outcome": outcome }))?)?;
            Ok(outcome_code(&outcome))
        }
        None => {
            let cand = cfg.candidates.convergent_for(cfg.space.rho_prime())?;
            let sample = InitialSample::from_oracle(&mut oracle, cand.k_max)?;
            let inferred = infer_weights_with(exec, &sample, &cand, &gamma, cfg.space.rho())?;
            let out = json!({ "inferred": inferred, "n_used": oracle.cost() });
            emit(cli.out.as_deref(), &pretty(&out)?)?;
            Ok(0)
        }
    }
}

fn experiment(cli: &Cli, cfg: &ExperimentConfig, jsonl: Option<&Path>, exec: Execution) -> Result<u8> {
    let rows = run_experiment(cfg, exec)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    emit(cli.out.as_deref(), std::str::from_utf8(&csv)?)?;
    if let Some(p) = jsonl {
        let mut buf = Vec::new();
        write_jsonl(&rows, &mut buf)?;
        std::fs::write(p, buf).with_context(|| format!("writing {}", p.display()))?;
    }
    let failed = rows.iter().filter(|r| !r.completed()).count();
    if failed > 0 {
        log::warn!("{failed} of {} rows did not complete", rows.len());
        Ok(3)
    } else {
        Ok(0)
    }
}

/// A value, or `{"error": …}` when it could not be computed.
fn cell<T: Serialize, E: std::fmt::Display>(r: std::result::Result<T, E>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn diagnose(cli: &Cli, cfg: &DiagnoseConfig) -> Result<u8> {
    if cfg.model.is_none() && cfg.tractability.is_none() {
        bail!("diagnose needs a `model`, a `tractability` section, or both");
    }
    let (rho, tau) = (cfg.space.rho(), cfg.space.tau());
    let mut out = Map::new();
    if let Some(model) = &cfg.model {
        out.insert("sol_operator_norm".into(), cell(sol_operator_norm(&cfg.space, model)));
        match OrderedWeights::new(model, cfg.space) {
            Err(e) => {
                out.insert("bounds".into(), json!({ "error": e.to_string() }));
            }
            Ok(mut w) => {
                let mut rows = Vec::new();
                for &eps in &cfg.eps {
                    let mut row = Map::new();
                    row.insert("eps".into(), json!(eps));
                    row.insert("ball_cost".into(), cell(ball_cost(&mut w, cfg.radius, eps, cfg.cap)));
                    if let Some(p) = &cfg.pilot {
                        let omega = pilot_omega(rho, p.inflation);
                        row.insert(
                            "pilot".into(),
                            json!({
                                "cost_bound": cell(pilot_cost_bound(&mut w, p, eps, cfg.radius, cfg.cap)),
                                "omega": omega,
                                "complexity_lower_at_omega_eps":
                                    cell(pilot_complexity_lower(&mut w, p, omega * eps, cfg.radius, cfg.cap)),
                            }),
                        );
                    }
                    if let Some(t) = &cfg.tracking {
                        let omega = tracking_omega(&t.spec, &t.regularity, rho, tau);
                        let upper = tracking_cost_bound(&mut w, &t.spec, eps, cfg.radius, cfg.cap)
                            .map(|(j, n)| json!({ "j": j, "n": n }));
                        let lower = tracking_complexity_lower(
                            &mut w,
                            &t.spec,
                            &t.regularity,
                            omega * eps,
                            cfg.radius,
                            cfg.cap,
                        )
                        .map(|o| o.map(|(j, n)| json!({ "j": j, "n": n })));
                        row.insert(
                            "tracking".into(),
                            json!({
                                "cost_bound": cell(upper),
                                "omega": omega,
                                "complexity_lower_at_omega_eps": cell(lower),
                            }),
                        );
                    }
                    rows.push(Value::Object(row));
                }
                out.insert("bounds".into(), Value::Array(rows));
                if let Some(t) = &cfg.tracking {
                    out.insert(
                        "regularity".into(),
                        cell(regularity::verify(&mut w, &t.spec, &t.regularity, t.window)),
                    );
                }
            }
        }
    }
    if let Some(t) = &cfg.tractability {
        let mut tr = Map::new();
        tr.insert("verdict".into(), cell(strong_tractability(&t.w, &t.s)));
        if !t.etas.is_empty() {
            tr.insert("grid_witness".into(), json!(witness_on_grid(&t.w, &t.s, &t.etas)));
        }
        out.insert("tractability".into(), Value::Object(tr));
    }
    emit(cli.out.as_deref(), &pretty(&Value::Object(out))?)?;
    Ok(0)
}

fn enumerate(cli: &Cli, cfg: &EnumerateConfig) -> Result<u8> {
    let mut stream = WavenumberStream::new(&cfg.model)?;
    let mut text = String::new();
    for i in 0..cfg.count {
        if stream.ensure(i + 1) <= i {
            break;
        }
        let (k, lambda) = stream.get(i)?;
        text.push_str(&serde_json::to_string(&json!({ "i": i, "k": k, "lambda": lambda }))?);
        text.push('\n');
    }
    emit(cli.out.as_deref(), &text)?;
    Ok(0)
}
