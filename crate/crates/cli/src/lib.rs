//! Command-line front end: simulate walks and limit processes, write CSV and
//! SVG files, run verification suites and experiment plans.

pub mod svg;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use anglewalk::io::{write_polyline_csv, CsvHeader, Tracks};
use anglewalk::limits::{self, DriftRule};
use anglewalk::montecarlo;
use anglewalk::verify::{run_verify, Suite, VerifyConfig};
use anglewalk::walks::{rescale, simulate_walk};
use anglewalk::{derive_stream, Angle, Construction, ExperimentPlan, LimitKind, LimitSpec, RescaleMode, Seed, WalkSpec};

use crate::svg::{svg_render, RenderOptions};

#[derive(Debug, Parser)]
#[command(name = "anglewalk", version, about = "Angle-constrained planar random walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one walk and write it as CSV (and optionally SVG).
    Simulate(SimulateArgs),
    /// Simulate one realization of a limit process.
    Limit(LimitArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Run an experiment plan from a JSON file and print JSON lines.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructionArg {
    Iid,
    IidShrinking,
    Markov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RescaleArg {
    None,
    ByN,
    BySqrtN,
    ByAlphaSqrtN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Bm,
    C1,
    C2,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Master seed, decimal or 0x-hex.
    #[arg(long, env = "ANGLEWALK_SEED", default_value = "0")]
    pub seed: String,
}

impl SeedArgs {
    fn parse(&self) -> anyhow::Result<(Seed, String)> {
        let text = self.seed.trim().to_string();
        let seed = Seed::parse(&text)?;
        Ok((seed, text))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct WalkArgs {
    #[arg(long, value_enum)]
    pub construction: Option<ConstructionArg>,
    /// Half-width of the iid angle law, in radians.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Half-width in degrees; converted to radians before use.
    #[arg(long, conflicts_with = "alpha")]
    pub alpha_deg: Option<f64>,
    /// `c` in `α_n = c·n^(−p)`.
    #[arg(long)]
    pub coeff: Option<f64>,
    /// `p` in `α_n = c·n^(−p)`.
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Number of steps.
    #[arg(long)]
    pub n: Option<usize>,
}

impl WalkArgs {
    fn alpha(&self) -> anyhow::Result<Option<f64>> {
        match (self.alpha, self.alpha_deg) {
            (Some(a), _) => Ok(Some(Angle::new(a)?.radians())),
            (None, Some(d)) => Ok(Some(Angle::from_degrees(d)?.radians())),
            (None, None) => Ok(None),
        }
    }

    fn spec(&self, default_n: Option<usize>) -> anyhow::Result<WalkSpec> {
        let Some(n) = self.n.or(default_n) else {
            bail!("--n is required");
        };
        let alpha = self.alpha()?;
        let construction = match self.construction {
            Some(c) => c,
            None if alpha.is_some() => ConstructionArg::Iid,
            None => bail!("--construction is required"),
        };
        let law = |what: &str| -> anyhow::Result<(f64, f64)> {
            match (self.coeff, self.exponent) {
                (Some(c), Some(p)) => Ok((c, p)),
                _ => bail!("--construction {what} needs --coeff and --exponent"),
            }
        };
        let construction = match construction {
            ConstructionArg::Iid => {
                let Some(alpha) = alpha else {
                    bail!("--construction iid needs --alpha or --alpha-deg");
                };
                Construction::IidConstant { alpha }
            }
            ConstructionArg::IidShrinking => {
                let (coeff, exponent) = law("iid-shrinking")?;
                Construction::IidShrinking { coeff, exponent }
            }
            ConstructionArg::Markov => {
                let (coeff, exponent) = law("markov")?;
                Construction::MarkovIncrements { coeff, exponent }
            }
        };
        Ok(WalkSpec::new(construction, n)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SvgArgs {
    /// Also render the path to this SVG file.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, default_value_t = 800)]
    pub svg_width: u32,
    #[arg(long, default_value_t = 800)]
    pub svg_height: u32,
    #[arg(long, default_value_t = 1.0)]
    pub stroke_width: f64,
    /// Padding as a fraction of the larger data extent.
    #[arg(long, default_value_t = 0.05)]
    pub margin: f64,
    /// Render only `t` in `[t_min, t_max]`, given as `t_min,t_max`.
    #[arg(long, value_parser = parse_window)]
    pub zoom: Option<(f64, f64)>,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected t_min,t_max")?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

impl SvgArgs {
    fn options(&self) -> RenderOptions {
        RenderOptions {
            width: self.svg_width,
            height: self.svg_height,
            stroke_width: self.stroke_width,
            margin: self.margin,
            zoom_window: self.zoom,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long, value_enum, default_value = "none")]
    pub rescale: RescaleArg,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub svg: SvgArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Brownian scale.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of grid intervals on `[0, 1]`.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    /// `derived` (√(κ/3)), `paper` (2κ/3), or a number.
    #[arg(long, default_value = "derived")]
    pub drift_coeff: String,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub svg: SvgArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Suite name, or `all`.
    pub suite: String,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Convolution powers for the tv suite, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<u32>,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ChecksFailed,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::ChecksFailed => 1,
        }
    }
}

/// Exit code for errors: invalid flags, bad values, unreadable files.
pub const USAGE_EXIT: u8 = 2;

pub fn execute(cli: Cli, log: &mut dyn Write) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&args, log),
        Command::Limit(args) => cmd_limit(&args, log),
        Command::Verify(args) => cmd_verify(&args, log),
        Command::Run(args) => cmd_run(&args, log),
    }
}

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_svg(args: &SvgArgs, path: &anglewalk::Polyline) -> anyhow::Result<()> {
    if let Some(dest) = &args.svg {
        let doc = svg_render(path, &args.options())?;
        std::fs::write(dest, doc).with_context(|| format!("cannot write {}", dest.display()))?;
    }
    Ok(())
}

fn workers(requested: Option<usize>) -> anyhow::Result<usize> {
    match requested {
        Some(0) => bail!("--workers must be at least 1"),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn cmd_simulate(args: &SimulateArgs, log: &mut dyn Write) -> anyhow::Result<Outcome> {
    let spec = args.walk.spec(None)?;
    let (seed, seed_text) = args.seed.parse()?;
    args.svg.options().validate()?;
    let mode = match args.rescale {
        RescaleArg::None => RescaleMode::None,
        RescaleArg::ByN => RescaleMode::ByN,
        RescaleArg::BySqrtN => RescaleMode::BySqrtN,
        RescaleArg::ByAlphaSqrtN => RescaleMode::ByAlphaSqrtN {
            alpha_n: spec.alpha_n()?,
        },
    };
    let walk = simulate_walk(&spec, &mut derive_stream(seed, 0))?;
    let path = rescale(&walk.path, mode);
    let spec_json = json!({ "walk": spec, "rescale": mode }).to_string();
    let header = CsvHeader {
        seed: seed_text.clone(),
        construction: spec.construction.tag().to_string(),
        n: spec.n,
        scale: path.scale(),
        spec_json: spec_json.clone(),
    };
    let mut out = open_out(args.out.as_deref())?;
    write_polyline_csv(&mut out, &header, &path, None)?;
    out.flush()?;
    write_svg(&args.svg, &path)?;
    writeln!(log, "seed={seed_text} spec={spec_json}")?;
    Ok(Outcome::Success)
}

pub fn cmd_limit(args: &LimitArgs, log: &mut dyn Write) -> anyhow::Result<Outcome> {
    let (seed, seed_text) = args.seed.parse()?;
    args.svg.options().validate()?;
    let rule: DriftRule = args.drift_coeff.parse()?;
    let kappa = || args.kappa.context("--kappa is required for c1 and c2");
    let kind = match args.kind {
        KindArg::Bm => {
            if args.kappa.is_some() {
                bail!("--kappa does not apply to --kind bm");
            }
            LimitKind::ScaledBm {
                sigma: args.sigma.unwrap_or(1.0),
            }
        }
        KindArg::C1 | KindArg::C2 if args.sigma.is_some() => bail!("--sigma applies only to --kind bm"),
        KindArg::C1 => LimitKind::c1(kappa()?, rule),
        KindArg::C2 => LimitKind::c2(kappa()?, rule),
    };
    let spec = LimitSpec::new(kind, args.grid)?;
    let real = limits::simulate(&spec, &mut derive_stream(seed, 0))?;
    let spec_json = json!({ "limit": spec }).to_string();
    let header = CsvHeader {
        seed: seed_text.clone(),
        construction: kind.tag().to_string(),
        n: spec.grid,
        scale: real.path.scale(),
        spec_json: spec_json.clone(),
    };
    let tracks = (!real.angle_track.is_empty()).then(|| Tracks {
        phi: &real.angle_track,
        driver: &real.driver_track,
    });
    let mut out = open_out(args.out.as_deref())?;
    write_polyline_csv(&mut out, &header, &real.path, tracks)?;
    out.flush()?;
    write_svg(&args.svg, &real.path)?;
    writeln!(log, "seed={seed_text} spec={spec_json}")?;
    Ok(Outcome::Success)
}

/// Suites each override flag applies to.
fn override_targets(flag: &str) -> &'static [Suite] {
    match flag {
        "--alpha" => &[Suite::Autocov, Suite::Msd, Suite::Tv, Suite::Lipschitz],
        "--n" => &[Suite::Autocov, Suite::Msd, Suite::Lipschitz],
        "--construction" => &[Suite::Lipschitz],
        "--replicates" => &[
            Suite::Msd,
            Suite::Regimes,
            Suite::BrownConstant,
            Suite::C1Curvature,
            Suite::C2Curvature,
        ],
        "--r" => &[Suite::Tv],
        _ => &[],
    }
}

pub fn build_verify_config(args: &VerifyArgs, suites: &[Suite]) -> anyhow::Result<VerifyConfig> {
    let w = &args.walk;
    let given = [
        ("--alpha", w.alpha.is_some() || w.alpha_deg.is_some()),
        ("--n", w.n.is_some()),
        ("--construction", w.construction.is_some() || w.coeff.is_some() || w.exponent.is_some()),
        ("--replicates", args.replicates.is_some()),
        ("--r", !args.r.is_empty()),
    ];
    for (flag, present) in given {
        if present && !suites.iter().any(|s| override_targets(flag).contains(s)) {
            bail!("{flag} does not apply to the selected suite");
        }
    }

    let mut cfg = VerifyConfig::default();
    if let Some(alpha) = w.alpha()? {
        cfg.autocov.alpha = alpha;
        cfg.msd.alpha = alpha;
        cfg.tv.alpha = alpha;
    }
    if let Some(n) = w.n {
        cfg.autocov.n = n;
        cfg.msd.n = n;
    }
    if suites.contains(&Suite::Lipschitz) && (w.construction.is_some() || w.alpha()?.is_some() || w.coeff.is_some()) {
        cfg.lipschitz.fixed = Some(w.spec(Some(1000))?);
    }
    if let Some(r) = args.replicates {
        cfg.msd.replicates = r;
        cfg.regimes.replicates = r;
        cfg.brown.replicates = r;
        cfg.c1.replicates = r;
        cfg.c2.replicates = r;
    }
    if !args.r.is_empty() {
        cfg.tv.powers = args.r.clone();
    }
    Ok(cfg)
}

pub fn cmd_verify(args: &VerifyArgs, log: &mut dyn Write) -> anyhow::Result<Outcome> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    let cfg = build_verify_config(args, &suites)?;
    let (seed, _) = args.seed.parse()?;
    let report = run_verify(&suites, &cfg, seed, workers(args.workers)?)?;
    let mut out = open_out(args.out.as_deref())?;
    writeln!(out, "{}", report.to_json()?)?;
    out.flush()?;
    for suite in &report.suites {
        for c in &suite.checks {
            writeln!(
                log,
                "{} {}/{}: observed {} expected {} tolerance {}",
                if c.pass { "PASS" } else { "FAIL" },
                suite.suite,
                c.name,
                c.observed,
                c.expected,
                c.tolerance
            )?;
        }
        for f in &suite.findings {
            writeln!(log, "note {}/{} = {} {}", suite.suite, f.name, f.value, f.note)?;
        }
    }
    Ok(if report.passed() {
        Outcome::Success
    } else {
        Outcome::ChecksFailed
    })
}

pub fn cmd_run(args: &RunArgs, log: &mut dyn Write) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(&args.plan).with_context(|| format!("cannot read {}", args.plan.display()))?;
    let plan: ExperimentPlan = serde_json::from_str(&text).context("invalid plan")?;
    let output = montecarlo::run(&plan, workers(args.workers)?)?;
    let mut out = open_out(args.out.as_deref())?;
    for record in output.records()? {
        writeln!(out, "{}", serde_json::to_string(&record)?)?;
    }
    out.flush()?;
    writeln!(log, "seed={} replicates={}", plan.seed, plan.replicates)?;
    Ok(Outcome::Success)
}
