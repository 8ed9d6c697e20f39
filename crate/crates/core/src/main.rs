//! `gwforest`: generate, encode, verify, simulate and run convergence
//! experiments from a TOML configuration.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gwforest::config::{RunConfig, SimulateMethod};
use gwforest::encodings::{export_csv, verify_identities, EncodingBundle, IdentityReport};
use gwforest::forest::{generate_forest_stream, read_forest_jsonl, write_forest_jsonl};
use gwforest::lab::{self, ExperimentKind, ExperimentOutput, ExperimentReport};
use gwforest::limit::lamperti::brownian_drivers;
use gwforest::limit::{self, lamperti_solve, GridPath};
use gwforest::rng::{derive_seed, stream_rng};
use gwforest::Error;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IDENTITY: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;
const EXIT_RESOURCE: u8 = 5;

#[derive(Parser)]
#[command(name = "gwforest", version, about = "Multitype Galton-Watson forests with immigration and their scaling limits")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the resolved configuration and stop.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Draw forests from the [ensemble] section and write them as JSON lines.
    Generate {
        /// Number of forests; overrides `ensemble.forests`.
        #[arg(long)]
        forests: Option<usize>,
        /// Truncation height; overrides `ensemble.h_max`.
        #[arg(long)]
        h_max: Option<u32>,
    },
    /// Write the encodings of forest files as CSV paths.
    Encode {
        /// Forest files in JSON lines.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Run the exact-identity suite on forest files or on forests drawn from
    /// the [ensemble] section. Exits 3 on any violation.
    Verify {
        inputs: Vec<PathBuf>,
    },
    /// Simulate continuum paths as described by the [simulate] section.
    Simulate {
        /// Rescale `localtime` output to the semimartingale local time.
        #[arg(long)]
        semimartingale: bool,
    },
    /// Run a convergence experiment. Exits 4 when a threshold fails.
    Experiment {
        /// profile, height, leftheight, rayknight or stable; overrides
        /// `experiment.name`.
        #[arg(long)]
        name: Option<String>,
        /// Replicates; overrides `replicates`.
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Summarise experiment reports. Exits 4 if any of them failed.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

/// Failure carrying its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) | Error::Json(_) => EXIT_IO,
            Error::InvariantViolation { .. } => EXIT_IDENTITY,
            Error::ResourceLimit { .. } | Error::BeyondHorizon { .. } => EXIT_RESOURCE,
            _ => EXIT_CONFIG,
        };
        Fail(code, e.to_string())
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail(EXIT_IO, e.to_string())
    }
}

type Outcome = Result<(), Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn resolve(c: &Common) -> Result<RunConfig, Fail> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    if let Some(t) = c.threads {
        cfg.threads = Some(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: Cli) -> Outcome {
    let mut cfg = resolve(&cli.common)?;
    match &cli.command {
        Command::Generate { forests, h_max } => {
            if let Some(e) = cfg.ensemble.as_mut() {
                if let Some(n) = forests {
                    e.forests = *n;
                }
                if let Some(h) = h_max {
                    e.h_max = *h;
                }
            }
        }
        Command::Experiment { name, replicates } => {
            if let Some(n) = name {
                let kind: ExperimentKind = n.parse()?;
                match cfg.experiment.as_mut() {
                    Some(x) => x.name = kind,
                    None => return Err(Fail(EXIT_CONFIG, "missing [experiment] section".into())),
                }
            }
            if let Some(r) = replicates {
                cfg.replicates = *r;
            }
        }
        Command::Simulate { semimartingale: true } => {
            if let Some(s) = cfg.simulate.as_mut() {
                s.semimartingale = true;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    if cli.common.dry_run {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Fail(EXIT_CONFIG, e.to_string()))?;
    }
    match &cli.command {
        Command::Generate { .. } => generate(&cfg),
        Command::Encode { inputs } => encode(&cfg, inputs),
        Command::Verify { inputs } => verify(&cfg, inputs),
        Command::Simulate { .. } => simulate(&cfg),
        Command::Experiment { .. } => experiment(&cfg),
        Command::Report { inputs } => report(inputs),
    }
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Outcome {
    std::fs::write(path, serde_json::to_string_pretty(v).map_err(Error::from)?)?;
    Ok(())
}

fn generate(cfg: &RunConfig) -> Outcome {
    let spec = cfg.ensemble.as_ref().ok_or(Fail(EXIT_CONFIG, "missing [ensemble] section".into()))?;
    let e = spec.ensemble()?;
    let dir = out_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    let echo = cfg.echo();
    let mut files = Vec::new();
    for r in 0..spec.forests {
        let f = generate_forest_stream(&e, spec.h_max, cfg.seed, r as u64)?;
        let name = format!("forest_{r:04}.jsonl");
        let mut w = BufWriter::new(File::create(dir.join(&name))?);
        let config = json!({ "run": echo, "stream": r });
        write_forest_jsonl(&f, Some(cfg.seed), Some(config), &mut w)?;
        w.flush()?;
        files.push(json!({ "file": name, "stream": r, "vertices": f.len() }));
    }
    write_json(&dir.join("manifest.json"), &json!({ "seed": cfg.seed, "config": echo, "forests": files }))?;
    println!("wrote {} forests to {}", spec.forests, dir.display());
    Ok(())
}

fn read_forest(p: &Path) -> Result<(gwforest::forest::ColoredForest, Option<gwforest::forest::ForestHeader>), Fail> {
    let r = BufReader::new(File::open(p).map_err(|e| Fail(EXIT_IO, format!("{}: {e}", p.display())))?);
    read_forest_jsonl(r).map_err(|e| {
        let f = Fail::from(e);
        Fail(f.0, format!("{}: {}", p.display(), f.1))
    })
}

fn encode(cfg: &RunConfig, inputs: &[PathBuf]) -> Outcome {
    let dir = out_dir(cfg);
    for p in inputs {
        let (f, header) = read_forest(p)?;
        let b = EncodingBundle::new(&f)?;
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "forest".into());
        let seed = header.as_ref().and_then(|h| h.seed);
        let config = json!({ "source": p.display().to_string(), "forest_config": header.and_then(|h| h.config), "run": cfg.echo() });
        let comment = format!("source: {}\nseed: {}\nconfig: {}", p.display(), seed.map_or("none".into(), |s| s.to_string()), config);
        export_csv(&b, &dir.join(&stem), &comment, seed, Some(config))?;
        println!("encoded {} into {}", p.display(), dir.join(&stem).display());
    }
    Ok(())
}

fn verify(cfg: &RunConfig, inputs: &[PathBuf]) -> Outcome {
    let mut total: Option<IdentityReport> = None;
    let mut add = |r: IdentityReport| match total.as_mut() {
        Some(t) => t.merge(&r),
        None => total = Some(r),
    };
    let mut count = 0usize;
    if inputs.is_empty() {
        let spec = cfg.ensemble.as_ref().ok_or(Fail(EXIT_CONFIG, "give forest files or an [ensemble] section".into()))?;
        let e = spec.ensemble()?;
        for r in 0..spec.forests {
            let f = generate_forest_stream(&e, spec.h_max, cfg.seed, r as u64)?;
            add(verify_identities(&f, &EncodingBundle::new(&f)?));
            count += 1;
        }
    } else {
        for p in inputs {
            let (f, _) = read_forest(p)?;
            add(verify_identities(&f, &EncodingBundle::new(&f)?));
            count += 1;
        }
    }
    let total = total.ok_or(Fail(EXIT_CONFIG, "no forests to verify".into()))?;
    println!("verified {count} forests");
    for c in &total.checks {
        println!("  {:<26} checked {:>10}  violations {}", c.name, c.checked, c.violations);
        if let Some(ex) = &c.first_violation {
            println!("      first: {ex}");
        }
    }
    for d in &total.domain_issues {
        println!("  note: {d}");
    }
    if let Some(o) = &cfg.out {
        std::fs::create_dir_all(o)?;
        write_json(&o.join("identity_report.json"), &json!({ "seed": cfg.seed, "config": cfg.echo(), "forests": count, "report": total }))?;
    }
    if total.is_ok() {
        Ok(())
    } else {
        Err(Fail(EXIT_IDENTITY, format!("{} identity violations", total.violations())))
    }
}

fn write_columns(path: &Path, cfg: &RunConfig, header: &str, cols: &[&GridPath]) -> Outcome {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# seed: {}", cfg.seed)?;
    writeln!(w, "# config: {}", cfg.echo())?;
    writeln!(w, "{header}")?;
    let n = cols.iter().map(|c| c.len()).min().unwrap_or(0);
    let dt = cols.first().map_or(0.0, |c| c.dt);
    for k in 0..n {
        write!(w, "{}", k as f64 * dt)?;
        for c in cols {
            write!(w, ",{}", c.values[k])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn simulate(cfg: &RunConfig) -> Outcome {
    let spec = cfg.simulate.as_ref().ok_or(Fail(EXIT_CONFIG, "missing [simulate] section".into()))?;
    let m = cfg.mechanism.as_ref().ok_or(Fail(EXIT_CONFIG, "missing [mechanism] section".into()))?;
    let n = m.n_types();
    if spec.j == 0 || spec.j > n {
        return Err(Fail(EXIT_CONFIG, format!("simulate.j = {} outside 1..={n}", spec.j)));
    }
    let dir = out_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    let dt = cfg.lab.dt;
    let seed = derive_seed(cfg.seed, 0x51);
    let z_header = std::iter::once("v".to_string()).chain((1..=n).map(|j| format!("z{j}"))).collect::<Vec<_>>().join(",");
    let mut diagnostics = Vec::new();
    for r in 0..spec.paths as u64 {
        let file = dir.join(format!("path_{r:04}.csv"));
        let mut rng = stream_rng(seed, r);
        match spec.method {
            SimulateMethod::Sde => {
                let t = limit::mcbi_sde(m, dt, spec.horizon, &mut rng)?;
                write_columns(&file, cfg, &z_header, &t.z.iter().collect::<Vec<_>>())?;
                diagnostics.push(json!({ "path": r, "clamp_fraction": t.clamp_fraction() }));
            }
            SimulateMethod::Lamperti => {
                let rngs = (0..n as u64).map(|j| stream_rng(derive_seed(seed, j + 1), r)).collect();
                let mut x = brownian_drivers(m, dt, rngs, true, f64::INFINITY);
                let t = lamperti_solve(m, &mut x, dt, spec.horizon)?;
                write_columns(&file, cfg, &z_header, &t.z.iter().collect::<Vec<_>>())?;
                diagnostics.push(json!({ "path": r, "clamp_fraction": t.clamp_fraction() }));
            }
            SimulateMethod::Height => {
                let j = spec.j - 1;
                let b = limit::simulate_brownian_height(m.beta[j], m.alpha[j][j], dt, spec.horizon, &mut rng)?;
                write_columns(&file, cfg, "t,x,h,ell", &[&b.x, &b.h, &b.ell])?;
            }
            SimulateMethod::Leftheight => {
                let j = spec.j - 1;
                let traj = limit::mcbi_sde(m, dt, cfg.lab.u_horizon, &mut rng)?;
                let u = limit::build_u(m, &traj.z)?;
                let p = limit::simulate_left_height(m.beta[j], m.alpha[j][j], &u[j], dt, spec.horizon, &mut rng)?;
                write_columns(&file, cfg, "t,h,ell,j,cev_h", &[&p.h, &p.ell, &p.j, &p.cev_h])?;
                diagnostics.push(json!({ "path": r, "drift_active": p.drift_active }));
            }
            SimulateMethod::Localtime => {
                let j = spec.j - 1;
                let levels = if spec.levels.is_empty() { vec![spec.horizon] } else { spec.levels.clone() };
                let top = levels.iter().fold(0.0f64, |a, &b| a.max(b));
                let cap = top + cfg.lab.eps + cfg.lab.cap_margin;
                let traj = limit::mcbi_sde(m, dt, cap + 0.1, &mut rng)?;
                let u = limit::build_u(m, &traj.z)?;
                let tc = limit::TerminalConfig { dt, eps: cfg.lab.eps, cap, max_steps: cfg.lab.max_steps };
                let lt = limit::terminal_local_time(m.beta[j], m.alpha[j][j], &u[j], &levels, &tc, &mut rng)?;
                let scale = if spec.semimartingale { m.beta[j] / 2.0 } else { 1.0 };
                let values: Vec<f64> = lt.smoothed.iter().map(|l| l * scale).collect();
                let mut w = BufWriter::new(File::create(&file)?);
                writeln!(w, "# seed: {}", cfg.seed)?;
                writeln!(w, "# config: {}", cfg.echo())?;
                writeln!(w, "v,local_time")?;
                for (v, l) in levels.iter().zip(&values) {
                    writeln!(w, "{v},{l}")?;
                }
                w.flush()?;
                diagnostics.push(json!({ "path": r, "elapsed": lt.elapsed, "semimartingale": spec.semimartingale }));
            }
        }
    }
    write_json(&dir.join("manifest.json"), &json!({ "seed": cfg.seed, "config": cfg.echo(), "paths": spec.paths, "diagnostics": diagnostics }))?;
    println!("wrote {} paths to {}", spec.paths, dir.display());
    Ok(())
}

fn single_p(x: &gwforest::config::ExperimentSpec) -> Result<u32, Fail> {
    x.p.or(x.p_list.iter().copied().max()).ok_or(Fail(EXIT_CONFIG, "experiment needs `p` or `p_list`".into()))
}

fn p_list(x: &gwforest::config::ExperimentSpec) -> Result<Vec<u32>, Fail> {
    if !x.p_list.is_empty() {
        Ok(x.p_list.clone())
    } else {
        Ok(vec![single_p(x)?])
    }
}

fn experiment(cfg: &RunConfig) -> Outcome {
    let x = cfg.experiment.as_ref().ok_or(Fail(EXIT_CONFIG, "missing [experiment] section".into()))?;
    let family = cfg.family()?;
    let lc = cfg.lab_config();
    let n = cfg.replicates;
    let pts = &x.points;
    let mut out: ExperimentOutput = match x.name {
        ExperimentKind::Profile => lab::run_profile_convergence(&family, pts, &p_list(x)?, n, &lc)?,
        ExperimentKind::Height => lab::run_height_convergence(&family, pts, &p_list(x)?, n, &lc)?,
        ExperimentKind::Leftheight => lab::run_leftheight_convergence(&family, pts, single_p(x)?, n, &lc)?,
        ExperimentKind::Rayknight => lab::run_rayknight_check(&family, pts, single_p(x)?, n, &lc)?,
        ExperimentKind::Stable => {
            let [t] = pts[..] else {
                return Err(Fail(EXIT_CONFIG, "the stable experiment takes exactly one time in `points`".into()));
            };
            lab::run_stable_marginal_check(&family, t, &p_list(x)?, n, &lc)?
        }
    };
    out.report.config = Some(cfg.echo());
    let dir = out_dir(cfg);
    out.write(&dir)?;
    print!("{}", out.report.table());
    println!("report written to {}", dir.join("report.json").display());
    if out.report.pass {
        Ok(())
    } else {
        Err(Fail(EXIT_THRESHOLD, format!("experiment {} failed its thresholds", out.report.experiment)))
    }
}

fn report(inputs: &[PathBuf]) -> Outcome {
    let mut failed = 0;
    for p in inputs {
        let text = std::fs::read_to_string(p).map_err(|e| Fail(EXIT_IO, format!("{}: {e}", p.display())))?;
        let r: ExperimentReport = serde_json::from_str(&text).map_err(|e| Fail(EXIT_CONFIG, format!("{}: {e}", p.display())))?;
        print!("{}", r.table());
        if !r.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        Err(Fail(EXIT_THRESHOLD, format!("{failed} of {} reports failed", inputs.len())))
    } else {
        Ok(())
    }
}
