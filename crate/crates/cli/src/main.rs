//! `chordix`: transfer integrals between bodies by distance, radii and chord
//! distributions.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use chordix_core::estimators::{
    estimate_chords, estimate_eta, estimate_radii, gamma_from_eta, lambda_from_mu, Binning,
    DEFAULT_BINS,
};
use chordix_core::format::{round9, sig9};
use chordix_core::geometry::MeasureConfig;
use chordix_core::transfer::{run_routes, RouteConfig};
use chordix_core::verify::{verify, Suite, VerifyConfig};
use chordix_core::{Kernel, MatrixDensity, RandomStream, Route, Scene, SceneSpec};

const MIN_BINS: usize = 10;

#[derive(Parser, Debug)]
#[command(
    name = "chordix",
    version,
    about = "Transfer integrals between bodies via distance, radii and chord distributions"
)]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "CHORDIX_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Volumes, surfaces and masses of every body, plus union totals.
    Measure(MeasureArgs),
    /// Histograms of a distribution matrix as CSV.
    Hist(HistArgs),
    /// Transfer integral of one body pair by one or all routes.
    Transfer(TransferArgs),
    /// Identity and oracle checks; exits with 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Scene JSON file.
    scene: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Sampling {
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Upper end of the histogram range; defaults to slightly above the scene span.
    #[arg(long)]
    l_max: Option<f64>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[command(flatten)]
    common: Common,
    /// Samples per body for bodies without closed-form measures.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Eta,
    Radii,
    Chords,
    Gamma,
    Lambda,
}

#[derive(Args, Debug)]
struct HistArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Body pair `i,j`; every pair when omitted, one file each if `--out` is a directory.
    #[arg(long, value_parser = parse_pair)]
    pair: Option<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args, Debug)]
struct TransferArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sampling: Sampling,
    /// Body pair `i,j`; defaults to `0,1`, or `0,0` for a single body.
    #[arg(long, value_parser = parse_pair)]
    pair: Option<(usize, usize)>,
    /// `ball`, `const` or `exp:sigma=<value>`.
    #[arg(long, default_value = "ball", value_parser = parse_kernel)]
    kernel: Kernel,
    /// Route name or `all`.
    #[arg(long, default_value = "all", value_parser = parse_routes)]
    route: Routes,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Identities,
    Oracles,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Kernel for the route-agreement and union checks.
    #[arg(long, default_value = "exp:sigma=1", value_parser = parse_kernel)]
    kernel: Kernel,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Debug)]
struct Routes(Vec<Route>);

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `i,j`, got `{s}`"))?;
    let idx = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad index `{t}`: {e}"))
    };
    Ok((idx(a)?, idx(b)?))
}

fn parse_kernel(s: &str) -> Result<Kernel, String> {
    s.parse::<Kernel>().map_err(|e| e.to_string())
}

fn parse_routes(s: &str) -> Result<Routes, String> {
    if s == "all" {
        Ok(Routes(Route::ALL.to_vec()))
    } else {
        s.parse::<Route>()
            .map(|r| Routes(vec![r]))
            .map_err(|e| e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Measure(a) => measure(&a).map(|_| true),
        Command::Hist(a) => hist(&a).map(|_| true),
        Command::Transfer(a) => transfer(&a).map(|_| true),
        Command::Verify(a) => verify_cmd(&a),
    }
}

fn load_scene(path: &Path, config: MeasureConfig) -> Result<Scene> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec =
        SceneSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Scene::from_spec(&spec, config)?)
}

fn check_bins(s: &Sampling) -> Result<()> {
    if s.bins < MIN_BINS {
        bail!("--bins must be at least {MIN_BINS}");
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Measured {
    value: f64,
    stderr: f64,
}

fn measured(e: chordix_core::Estimate) -> Measured {
    Measured {
        value: round9(e.value),
        stderr: round9(e.stderr),
    }
}

fn measure(a: &MeasureArgs) -> Result<()> {
    let scene = load_scene(
        &a.common.scene,
        MeasureConfig {
            samples: a.samples,
            seed: a.common.seed,
        },
    )?;
    let bodies: Vec<_> = scene
        .bodies()
        .iter()
        .map(|b| {
            json!({
                "id": b.id,
                "volume": measured(b.measures.volume),
                "surface": measured(b.measures.surface),
                "mass": measured(b.measures.mass),
            })
        })
        .collect();
    let doc = json!({
        "bodies": bodies,
        "v_union": measured(scene.v_union_estimate()),
        "s_union": round9(scene.s_union()),
        "disjoint": scene.is_disjoint(),
    });
    emit(&a.common.out, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn matrix_for(
    scene: &Scene,
    kind: Kind,
    s: &Sampling,
    stream: &RandomStream,
) -> Result<MatrixDensity> {
    let binning = Binning::for_scene(scene, s.bins, s.l_max)?;
    let m = match kind {
        Kind::Eta => estimate_eta(scene, s.samples, stream, &binning)?.matrix,
        Kind::Radii => estimate_radii(scene, s.samples, stream, &binning)?.matrix,
        Kind::Chords => estimate_chords(scene, s.samples, stream, &binning)?.matrix,
        Kind::Gamma => gamma_from_eta(&estimate_eta(scene, s.samples, stream, &binning)?.matrix),
        Kind::Lambda => {
            lambda_from_mu(&estimate_chords(scene, s.samples, stream, &binning)?.matrix)
        }
    };
    Ok(m)
}

fn hist(a: &HistArgs) -> Result<()> {
    check_bins(&a.sampling)?;
    let scene = load_scene(&a.common.scene, MeasureConfig::default())?;
    if let Some((i, j)) = a.pair {
        scene.check_index(i)?;
        scene.check_index(j)?;
    }
    let m = matrix_for(
        &scene,
        a.kind,
        &a.sampling,
        &RandomStream::new(a.common.seed),
    )?;
    let pairs: Vec<(usize, usize)> = match a.pair {
        Some(p) => vec![p],
        None => m.pairs(),
    };
    let csv = |i: usize, j: usize| -> Result<String> {
        let mut buf = Vec::new();
        m.write_cell_csv(&mut buf, i, j)?;
        Ok(String::from_utf8(buf)?)
    };
    match &a.common.out {
        Some(dir) if a.pair.is_none() && dir.is_dir() => {
            for (i, j) in pairs {
                let path = dir.join(format!("{}_{i}_{j}.csv", m.kind));
                fs::write(&path, csv(i, j)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
        out => {
            let text = pairs
                .iter()
                .map(|&(i, j)| csv(i, j))
                .collect::<Result<Vec<_>>>()?
                .join("\n");
            emit(out, &text)
        }
    }
}

fn default_pair(scene: &Scene) -> (usize, usize) {
    if scene.len() > 1 {
        (0, 1)
    } else {
        (0, 0)
    }
}

fn transfer(a: &TransferArgs) -> Result<()> {
    check_bins(&a.sampling)?;
    let scene = load_scene(&a.common.scene, MeasureConfig::default())?;
    let (i, j) = a.pair.unwrap_or_else(|| default_pair(&scene));
    scene.check_index(i)?;
    scene.check_index(j)?;
    let config = RouteConfig {
        samples: a.sampling.samples,
        binning: Binning::for_scene(&scene, a.sampling.bins, a.sampling.l_max)?,
    };
    let results = run_routes(
        &scene,
        i,
        j,
        &a.kernel,
        &a.route.0,
        &config,
        &RandomStream::new(a.common.seed),
    )?;
    if a.route.0.len() == 1 {
        if let Some((_, Err(e))) = results.first() {
            bail!("{e}");
        }
    }
    let text = match a.format {
        Format::Json => {
            let rows: Vec<_> = results
                .iter()
                .map(|(route, r)| match r {
                    Ok(r) => {
                        let mut v = serde_json::to_value(r).expect("serializable result");
                        v["value"] = json!(round9(r.value));
                        v["stderr"] = json!(round9(r.stderr));
                        if let Some(alt) = r.alternate {
                            v["alternate"] =
                                json!({ "value": round9(alt.value), "stderr": round9(alt.stderr) });
                        }
                        v
                    }
                    Err(e) => json!({ "route": route, "error": e.to_string() }),
                })
                .collect();
            let doc = json!({
                "pair": [i, j],
                "ids": [scene.id(i), scene.id(j)],
                "kernel": a.kernel.to_string(),
                "seed": a.common.seed,
                "samples": a.sampling.samples,
                "results": rows,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Table => {
            let mut t = format!(
                "# pair={i},{j} kernel={} seed={} samples={}\n",
                a.kernel, a.common.seed, a.sampling.samples
            );
            t += &format!(
                "{:<8}  {:>16}  {:>16}  {:>12}  {}\n",
                "route", "value", "stderr", "samples", "notes"
            );
            for (route, r) in &results {
                match r {
                    Ok(r) => {
                        t += &format!(
                            "{:<8}  {:>16}  {:>16}  {:>12}  {}\n",
                            route.name(),
                            sig9(r.value),
                            sig9(r.stderr),
                            r.n_samples,
                            r.warnings.join("; ")
                        )
                    }
                    Err(e) => {
                        t += &format!(
                            "{:<8}  {:>16}  {:>16}  {:>12}  {}\n",
                            route.name(),
                            "-",
                            "-",
                            "-",
                            e
                        )
                    }
                }
            }
            t
        }
    };
    emit(&a.common.out, &text)
}

fn verify_cmd(a: &VerifyArgs) -> Result<bool> {
    check_bins(&a.sampling)?;
    let scene = load_scene(&a.common.scene, MeasureConfig::default())?;
    let suite = match a.suite {
        SuiteArg::Identities => Suite::Identities,
        SuiteArg::Oracles => Suite::Oracles,
        SuiteArg::All => Suite::All,
    };
    let cfg = VerifyConfig {
        samples: a.sampling.samples,
        bins: a.sampling.bins,
        l_max: a.sampling.l_max,
        kernel: a.kernel,
    };
    let report = verify(&scene, suite, &cfg, &RandomStream::new(a.common.seed))?;
    let text = match a.format {
        Format::Json => {
            let r = report.rounded();
            let doc = json!({
                "kernel": a.kernel.to_string(),
                "seed": a.common.seed,
                "samples": a.sampling.samples,
                "bins": a.sampling.bins,
                "z_threshold": r.z_threshold,
                "passed": r.passed(),
                "checks": r.checks,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Table => format!(
            "# kernel={} seed={} samples={}\n{}",
            a.kernel,
            a.common.seed,
            a.sampling.samples,
            report.to_table()
        ),
    };
    emit(&a.common.out, &text)?;
    Ok(report.passed())
}
