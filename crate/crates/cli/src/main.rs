//! `shadowcover`: counterexample verification, covering checks, inequality
//! reports, Blaschke sums and plot data.
//!
//! Exit codes: 0 when every requested verdict holds, 1 when a verdict fails
//! (or a solver misses its tolerance), 2 on configuration or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use shadowcover::blaschke::{blaschke_sum, cylinder_body_sample, minkowski_solve, MinkowskiSolution, SOLVER_TOL};
use shadowcover::constructions::{critical_epsilon, regular_simplex};
use shadowcover::containment::shadows_cover;
use shadowcover::convex_core::{BodyExpr, SurfaceMeasure, VPolytope};
use shadowcover::error::Error;
use shadowcover::experiments::{columns, epsilon_sweep, ratio_vs_n, slack_histogram, verify_counterexample};
use shadowcover::inequalities::{
    brunn_minkowski_check, cylinder_inequality_check, cylinder_volume_trial, cylvol_harness, minkowski_mixed_check, reports_to_csv,
    steinhagen_check, symmetric_covering_volume_check, volume_ratio_check, InequalityReport,
};
use shadowcover::report::{fmt_real, to_json_string};
use shadowcover::rng::derive_seed;

#[derive(Parser, Debug)]
#[command(name = "shadowcover", version, about = "Shadow covering experiments for convex bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the counterexample pair and check covering and volumes
    VerifyCounterexample(VerifyArgs),
    /// Test whether every sampled k-shadow of K translates into that of L
    CheckCover(CheckCoverArgs),
    /// Evaluate inequality checks on generated or supplied bodies
    InequalityReport(InequalityArgs),
    /// Blaschke combination aK # bL of two polytopes
    Blaschke(BlaschkeArgs),
    /// Reconstruct a polytope from a surface area measure
    MinkowskiSolve(SolveArgs),
    /// Columned data for external plotting
    PlotData(PlotArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Root seed; every random stream is derived from it
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo samples per volume estimate
    #[arg(long, default_value_t = 4_000_000)]
    samples: usize,
    /// Number of Haar-random frames
    #[arg(long, default_value_t = 1000)]
    frames: usize,
    #[arg(long, default_value_t = SOLVER_TOL)]
    tol: f64,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl Common {
    fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.frames == 0 {
            bail!("--samples and --frames must be at least 1");
        }
        if !(self.tol > 0.0) {
            bail!("--tol must be positive");
        }
        Ok(())
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum Format {
    Json,
    Csv,
    Plot,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Shadow dimension (defaults to n - 1)
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.9)]
    epsilon: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CheckCoverArgs {
    /// Body K (JSON)
    big: PathBuf,
    /// Body L (JSON)
    small: PathBuf,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum Generator {
    Simplex,
    Cube,
    CylinderBatch,
    File,
}

#[derive(Args, Debug)]
struct InequalityArgs {
    #[arg(long, value_enum, default_value_t = Generator::File)]
    generator: Generator,
    /// Body K (JSON), for the file generator
    #[arg(long)]
    body: Option<PathBuf>,
    /// Second body L (JSON), for pair checks
    #[arg(long)]
    other: Option<PathBuf>,
    /// Checks: steinhagen, cylinder, brunn-minkowski, minkowski-mixed,
    /// cylinder-volume, volume-ratio, symmetric-volume
    #[arg(long, value_delimiter = ',', default_value = "cylinder")]
    which: Vec<String>,
    /// Index of the cylinder inequality
    #[arg(long)]
    i: Option<usize>,
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Shadow dimension for cylinder samples and covering checks (defaults to n - 1)
    #[arg(long)]
    k: Option<usize>,
    /// Bodies in a generated batch
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BlaschkeArgs {
    big: PathBuf,
    small: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Surface area measure (JSON)
    measure: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum Experiment {
    EpsilonSweep,
    SlackHistogram,
    RatioVsN,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0.9)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[command(flatten)]
    common: Common,
}

enum Outcome {
    Pass,
    Fail,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_body(path: &Path) -> Result<BodyExpr> {
    BodyExpr::from_json(&read_json(path)?).with_context(|| format!("body in {}", path.display()))
}

fn read_polytope(path: &Path) -> Result<VPolytope> {
    read_body(path)?.to_polytope().with_context(|| format!("{} is not a polytope", path.display()))
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<Outcome> {
    a.common.validate()?;
    let k = a.k.unwrap_or(a.n.saturating_sub(1));
    let seed = derive_seed(a.common.seed, "verify-counterexample");
    let run = verify_counterexample(a.n, k, a.epsilon, a.common.frames, a.common.samples, seed)?;
    eprintln!(
        "covering at k = {k}: {} (min slack {}, {} frames)",
        run.cover.verdict,
        fmt_real(run.cover.min_slack),
        run.cover.frames
    );
    for g in &run.gaps {
        eprintln!("V_{}: K = {}, L = {}, gap = {} ± {}", g.m, fmt_real(g.big), fmt_real(g.small), fmt_real(g.gap), fmt_real(g.sigma));
    }
    let text = match a.common.format {
        Format::Json => to_json_string(&run.to_json()),
        Format::Csv => {
            let mut s = String::from("m,K,L,gap,sigma\n");
            for g in &run.gaps {
                s.push_str(&format!("{},{},{},{},{}\n", g.m, fmt_real(g.big), fmt_real(g.small), fmt_real(g.gap), fmt_real(g.sigma)));
            }
            s
        }
        Format::Plot => columns(&["frame", "slack"], &run.cover.records.iter().map(|r| vec![r.frame_id as f64, r.slack]).collect::<Vec<_>>()),
    };
    emit(&a.common.out, &text)?;
    Ok(verdict(run.verdict))
}

fn cmd_check_cover(a: CheckCoverArgs) -> Result<Outcome> {
    a.common.validate()?;
    let k = read_body(&a.big)?;
    let l = read_body(&a.small)?;
    if a.k < 1 || a.k > l.dim() {
        bail!("--k must lie in 1..={}", l.dim());
    }
    let report = shadows_cover(&k, &l, a.k, a.common.frames, derive_seed(a.common.seed, "check-cover"))?;
    let mut summary = report.to_json();
    summary.as_object_mut().expect("object").remove("records");
    match &a.common.out {
        Some(prefix) => {
            fs::write(prefix.with_extension("csv"), report.to_csv()).context("writing frame CSV")?;
            fs::write(prefix.with_extension("json"), to_json_string(&summary)).context("writing summary JSON")?;
        }
        None => match a.common.format {
            Format::Csv => print!("{}", report.to_csv()),
            _ => print!("{}", to_json_string(&summary)),
        },
    }
    if let Some(w) = report.witness() {
        eprintln!("witness frame {} with slack {}", w.frame_id, fmt_real(w.slack));
    }
    Ok(verdict(report.verdict))
}

fn generated_bodies(a: &InequalityArgs, k: usize) -> Result<Vec<(String, BodyExpr)>> {
    Ok(match a.generator {
        Generator::Simplex => vec![(format!("simplex{}", a.n), regular_simplex(a.n, 1.0)?.into())],
        Generator::Cube => vec![(format!("cube{}", a.n), VPolytope::unit_cube(a.n).into())],
        Generator::CylinderBatch => (0..a.count)
            .map(|j| {
                let s = cylinder_body_sample(a.n, k, 3, derive_seed(a.common.seed, &format!("sample{j}")))?;
                Ok((format!("cylinder{j}"), s.polytope.into()))
            })
            .collect::<Result<_>>()?,
        Generator::File => {
            let path = a.body.as_ref().context("--body is required with the file generator")?;
            vec![(path.display().to_string(), read_body(path)?)]
        }
    })
}

fn cmd_inequality(a: InequalityArgs) -> Result<Outcome> {
    a.common.validate()?;
    let k = a.k.unwrap_or(a.n.saturating_sub(1));
    let other = a.other.as_ref().map(|p| read_body(p)).transpose()?;
    let need_other = |name: &str| other.as_ref().with_context(|| format!("check {name} needs --other"));
    let bodies = generated_bodies(&a, k)?;
    let mut reports: Vec<(String, InequalityReport)> = vec![];
    for (j, (label, body)) in bodies.iter().enumerate() {
        let seed = derive_seed(a.common.seed, &format!("body{j}"));
        for which in &a.which {
            let r = match which.as_str() {
                "steinhagen" => steinhagen_check(body)?,
                "cylinder" => cylinder_inequality_check(body, a.i.unwrap_or(k.max(1)))?,
                "brunn-minkowski" => brunn_minkowski_check(body, need_other(which)?, a.lambda, a.common.samples, seed)?,
                "minkowski-mixed" => {
                    let p = body.to_polytope().context("minkowski-mixed needs a polytope K")?;
                    minkowski_mixed_check(&p, need_other(which)?, a.common.samples, seed)?
                }
                "cylinder-volume" if a.generator == Generator::CylinderBatch => {
                    cylinder_volume_trial(a.n, k, a.common.frames, seed)?.report
                }
                "cylinder-volume" => {
                    let l = need_other(which)?.to_polytope().context("cylinder-volume needs a polytope L")?;
                    cylvol_harness(&l, body, k, a.common.frames, seed, a.common.samples)?
                }
                "volume-ratio" => volume_ratio_check(body, need_other(which)?, a.common.frames, seed, a.common.samples)?,
                "symmetric-volume" => {
                    let l = need_other(which)?.to_polytope().context("symmetric-volume needs a polytope L")?;
                    symmetric_covering_volume_check(body, &l, a.common.frames, seed, a.common.samples)?
                }
                other => bail!("unknown check {other:?}"),
            };
            reports.push((label.clone(), r));
        }
    }
    let text = match a.common.format {
        Format::Csv => reports_to_csv(&reports.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>()),
        _ => to_json_string(&Value::from(
            reports.iter().map(|(label, r)| json!({"body": label, "report": r.to_json()})).collect::<Vec<_>>(),
        )),
    };
    emit(&a.common.out, &text)?;
    Ok(verdict(reports.iter().all(|(_, r)| r.verdict)))
}

fn solution_json(s: &MinkowskiSolution, tol: f64) -> Value {
    json!({
        "body": BodyExpr::Polytope(s.polytope.clone()).to_json(),
        "residual": s.residual,
        "iterations": s.iterations,
        "tol": tol,
    })
}

/// Solver outcome, with a missed tolerance mapped to a verdict failure.
fn solved(result: shadowcover::error::Result<MinkowskiSolution>, out: &Option<PathBuf>, tol: f64) -> Result<Outcome> {
    match result {
        Ok(s) => {
            emit(out, &to_json_string(&solution_json(&s, tol)))?;
            Ok(verdict(s.residual <= tol))
        }
        Err(Error::MaxIterations { residual }) => {
            eprintln!("solver residual {} exceeds tolerance {}", fmt_real(residual), fmt_real(tol));
            Ok(Outcome::Fail)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_blaschke(a: BlaschkeArgs) -> Result<Outcome> {
    a.common.validate()?;
    let k = read_polytope(&a.big)?;
    let l = read_polytope(&a.small)?;
    solved(blaschke_sum(&k, &l, a.a, a.b), &a.common.out, a.common.tol)
}

fn cmd_solve(a: SolveArgs) -> Result<Outcome> {
    a.common.validate()?;
    let measure = SurfaceMeasure::from_json(&read_json(&a.measure)?)?;
    solved(minkowski_solve(&measure, a.common.tol), &a.common.out, a.common.tol)
}

fn cmd_plot(a: PlotArgs) -> Result<Outcome> {
    a.common.validate()?;
    let seed = derive_seed(a.common.seed, "plot-data");
    let text = match a.experiment {
        Experiment::EpsilonSweep => {
            let rows = epsilon_sweep(a.n, a.steps, a.common.samples, seed)?;
            let mut text = String::new();
            if let Ok(c) = critical_epsilon(a.n, 1e-6, a.common.samples, seed) {
                text.push_str(&format!("# critical_epsilon {}\n", fmt_real(c.epsilon)));
            }
            text + &columns(&["epsilon", "V_K", "V_simplex", "gap"], &rows)
        }
        Experiment::SlackHistogram => {
            let run = verify_counterexample(a.n, a.n - 1, a.epsilon, a.common.frames, a.common.samples, seed)?;
            columns(&["slack_lo", "slack_hi", "count"], &slack_histogram(&run.cover, a.bins))
        }
        Experiment::RatioVsN => columns(&["n", "ratio"], &ratio_vs_n(a.n, a.epsilon, a.common.samples, seed)?),
    };
    emit(&a.common.out, &text)?;
    Ok(Outcome::Pass)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SHADOWCOVER_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("SHADOWCOVER_THREADS={v:?} is not a count"))?;
        if n == 0 {
            bail!("SHADOWCOVER_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::VerifyCounterexample(a) => cmd_verify(a),
        Command::CheckCover(a) => cmd_check_cover(a),
        Command::InequalityReport(a) => cmd_inequality(a),
        Command::Blaschke(a) => cmd_blaschke(a),
        Command::MinkowskiSolve(a) => cmd_solve(a),
        Command::PlotData(a) => cmd_plot(a),
    });
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
