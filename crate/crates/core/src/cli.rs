//! Batch front-end: building diagrams and triples, tracing orbits, realising
//! targets and scanning spectra.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::{BigInt, BigRational, BigUint, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::{odometer_diagram, sturmian_diagram};
use crate::diagram::{Diagram, FinitePath, VertexRef};
use crate::error::{Error, Result};
use crate::extension::colour::verify_colouring;
use crate::extension::{build_three_to_one, build_two_to_one, color_diagram, ColourParams, Construction, ExtensionTriple, TwoToOneBudget};
use crate::spectra::frequency::{frequency_trace, level_cap};
use crate::spectra::gap::{gap_check_three_to_one, GapParams, GapReport};
use crate::spectra::realize::{realize_frequency, verify_plan, RealizationPlan, RealizeParams};
use crate::util::{fmt_ratio, parse_ratio, to_f64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "adic", version, about = "Ordered Bratteli-Vershik diagrams, their copy-paste extensions and visit-frequency spectra")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// Depth cap for telescoped bases.
    #[arg(long, global = true)]
    pub budget_depth: Option<usize>,
    /// Cap on Vershik steps taken one at a time.
    #[arg(long, global = true)]
    pub budget_steps: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML file with defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Writes a diagram as JSON.
    Build {
        #[arg(value_enum)]
        kind: BuildKind,
        /// Edge counts (odometer) or coefficients (sturmian), comma separated.
        #[arg(long, value_delimiter = ',')]
        params: Vec<u64>,
        /// Diagram file for `file`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Builds an extension triple from a diagram file.
    Extend {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Where the triple goes; the certificate report goes to `--out`.
        #[arg(long)]
        triple: PathBuf,
        /// Telescope the base first (three-to-one only).
        #[arg(long)]
        preprocess: bool,
        #[arg(long, default_value_t = 2)]
        thin_width: u64,
        #[arg(long, default_value_t = 1)]
        loose_levels: usize,
    },
    /// Frequency trace along an orbit.
    Orbit {
        input: PathBuf,
        #[arg(long)]
        steps: u64,
        /// Top vertex of the start head.
        #[arg(long, default_value_t = 0)]
        top: usize,
        /// Rank of the start head among paths into the top vertex.
        #[arg(long, conflicts_with_all = ["picks", "random"])]
        rank: Option<String>,
        /// Level-0-first picks of the start head.
        #[arg(long, value_delimiter = ',', conflicts_with = "random")]
        picks: Option<Vec<u64>>,
        /// Draw the start rank from the seeded generator.
        #[arg(long)]
        random: bool,
    },
    /// Constructs a path realising a target frequency.
    Realize {
        input: PathBuf,
        /// Target as a decimal or `p/q`.
        #[arg(long, required_unless_present = "cap_fraction")]
        nu: Option<String>,
        /// Target as a fraction of the level-cap estimate.
        #[arg(long, conflicts_with = "nu")]
        cap_fraction: Option<String>,
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        #[arg(long, default_value_t = 3)]
        rungs: usize,
    },
    /// Witness scan over a grid of targets, plus the gap check for
    /// three-to-one triples.
    Scan {
        input: PathBuf,
        /// `k` targets evenly spaced in `(0, 0.95 cap)`.
        #[arg(long, default_value_t = 9)]
        grid: usize,
        /// Explicit targets in `(0, 1)`, replacing `--grid`.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<String>>,
        #[arg(long, default_value_t = 16)]
        heads: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuildKind {
    Odometer,
    Sturmian,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Two,
    Three,
}

/// Defaults read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub budget_depth: Option<usize>,
    pub budget_steps: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub budget_depth: usize,
    pub budget_steps: u64,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn resolve(g: &GlobalArgs) -> Result<Self> {
        let file = match &g.config {
            Some(p) => toml::from_str::<ConfigFile>(&fs::read_to_string(p)?)
                .map_err(|e| Error::invalid(format!("config {}: {e}", p.display())))?,
            None => ConfigFile::default(),
        };
        let cfg = RunConfig {
            budget_depth: g.budget_depth.or(file.budget_depth).unwrap_or(8),
            budget_steps: g.budget_steps.or(file.budget_steps).unwrap_or(10_000_000),
            seed: g.seed.or(file.seed).unwrap_or(0),
            out: g.out.clone().or(file.out),
            format: g.format.or(file.format),
        };
        if cfg.budget_depth == 0 || cfg.budget_steps == 0 {
            return Err(Error::invalid("budgets must be positive"));
        }
        Ok(cfg)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) => 2,
        Error::TargetUnreachable(_) => 3,
        Error::Io(_) => 1,
        _ => 4,
    }
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| Error::invalid(format!("{}: {e}", p.display())))
}

fn number(s: &str) -> Result<BigRational> {
    parse_ratio(s).ok_or_else(|| Error::invalid(format!("not a number: {s}")))
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct ExtendReport<'a> {
    mode: &'static str,
    depth: usize,
    cuts: &'a [usize],
    copy_counts: &'a [Vec<usize>],
    #[serde(skip_serializing_if = "Option::is_none")]
    extremal: Option<&'a [crate::extension::two_to_one::ExtremalAudit]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    colouring: Option<&'a [crate::extension::colour::LevelColouring]>,
    problems: Vec<String>,
}

fn cmd_build(cfg: &RunConfig, kind: BuildKind, params: &[u64], input: Option<&Path>) -> Result<String> {
    if cfg.format == Some(Format::Csv) {
        return Err(Error::invalid("diagrams are written as JSON"));
    }
    let d = match kind {
        BuildKind::Odometer => odometer_diagram(params)?,
        BuildKind::Sturmian => sturmian_diagram(params)?,
        BuildKind::File => {
            let p = input.ok_or_else(|| Error::invalid("build file needs --input"))?;
            Diagram::from_json(&read(p)?)?
        }
    };
    let mut s = d.to_json()?;
    s.push('\n');
    Ok(s)
}

fn cmd_extend(cfg: &RunConfig, input: &Path, mode: Mode, triple: &Path, colour: ColourParams) -> Result<String> {
    let base = Diagram::from_json(&read(input)?)?;
    let (t, report) = match mode {
        Mode::Two => {
            let budget = TwoToOneBudget {
                max_levels: cfg.budget_depth,
                ..TwoToOneBudget::default()
            };
            let (t, rep) = build_two_to_one(&base, &budget)?;
            let text = json(&ExtendReport {
                mode: "two",
                depth: t.depth(),
                cuts: &rep.cuts,
                copy_counts: &rep.copy_counts,
                extremal: Some(&rep.levels),
                colouring: None,
                problems: Vec::new(),
            })?;
            (t, text)
        }
        Mode::Three => {
            let c = color_diagram(&base, &colour)?;
            let t = build_three_to_one(&c.diagram)?;
            let text = json(&ExtendReport {
                mode: "three",
                depth: t.depth(),
                cuts: &c.cuts,
                copy_counts: &t.spec.copy_counts,
                extremal: None,
                colouring: Some(&c.levels),
                problems: verify_colouring(&c),
            })?;
            (t, text)
        }
    };
    fs::write(triple, t.to_json()?)?;
    Ok(report)
}

fn load_triple(p: &Path) -> Result<ExtensionTriple> {
    ExtensionTriple::from_json(&read(p)?)
}

fn start_head(
    t: &ExtensionTriple,
    top: usize,
    rank: Option<&str>,
    picks: Option<&[u64]>,
    random: bool,
    steps: u64,
    rng: &mut ChaCha8Rng,
) -> Result<FinitePath> {
    let d = &t.base;
    let v = VertexRef::new(d.depth(), top);
    d.check_vertex(v)?;
    if let Some(p) = picks {
        return d.path_from_picks(v, p);
    }
    let h = d.path_count(v).clone();
    let r = if random {
        let room = if h > BigUint::from(steps) { &h - steps } else { BigUint::from(1u32) };
        crate::spectra::gap::random_below(rng, &BigUint::zero(), &room)
    } else {
        match rank {
            Some(s) => s.parse::<BigUint>().map_err(|_| Error::invalid(format!("bad rank {s}")))?,
            None => BigUint::zero(),
        }
    };
    d.path_at_rank(v, &r)
}

#[derive(Serialize)]
struct OrbitJson<'a> {
    seed: u64,
    start: &'a FinitePath,
    horizon: usize,
    lift_top: &'a [usize],
    rows: Vec<(u64, u64, u64, &'static str)>,
    ordering_violations: usize,
}

fn cmd_orbit(
    cfg: &RunConfig,
    input: &Path,
    steps: u64,
    top: usize,
    rank: Option<&str>,
    picks: Option<&[u64]>,
    random: bool,
) -> Result<String> {
    if steps > cfg.budget_steps {
        return Err(Error::budget(format!("{steps} steps over the budget of {}", cfg.budget_steps)));
    }
    let t = load_triple(input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let head = start_head(&t, top, rank, picks, random, steps, &mut rng)?;
    let trace = frequency_trace(&t, &head, steps, None)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(trace.to_csv()),
        Format::Json => json(&OrbitJson {
            seed: cfg.seed,
            start: &head,
            horizon: trace.horizon,
            lift_top: &trace.lift_top,
            rows: trace
                .rows
                .iter()
                .map(|r| (r.step, r.hits_d, r.hits_s, r.in_d.as_str()))
                .collect(),
            ordering_violations: trace.ordering_violations(),
        }),
    }
}

fn realize_params(nu: &BigRational, ladder: Option<Vec<usize>>, rungs: usize) -> RealizeParams {
    let mut p = RealizeParams::new(nu.clone());
    p.ladder = ladder;
    p.rungs = rungs;
    p
}

#[derive(Serialize)]
struct RealizeOutput<'a> {
    #[serde(serialize_with = "crate::util::ser_ratio")]
    cap: BigRational,
    verified: bool,
    plan: &'a RealizationPlan,
}

fn bands_csv(plan: &RealizationPlan) -> String {
    let mut s = String::from("index,level,kind,bound,value,hits,window,value_float,holds\n");
    for b in &plan.bands {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{:.12},{}\n",
            b.index,
            b.level,
            b.kind,
            fmt_ratio(&b.bound),
            fmt_ratio(&b.value),
            b.hits,
            b.window,
            b.value_f64,
            b.holds
        ));
    }
    s
}

fn cmd_realize(
    cfg: &RunConfig,
    input: &Path,
    nu: Option<&str>,
    cap_fraction: Option<&str>,
    ladder: Option<Vec<usize>>,
    rungs: usize,
) -> Result<String> {
    let t = load_triple(input)?;
    let cap = level_cap(&t)?;
    let nu = match (nu, cap_fraction) {
        (Some(s), _) => number(s)?,
        (None, Some(f)) => &cap * number(f)?,
        (None, None) => return Err(Error::invalid("give --nu or --cap-fraction")),
    };
    let plan = realize_frequency(&t, &realize_params(&nu, ladder, rungs))?;
    let verified = verify_plan(&t, &plan)?;
    match cfg.format.unwrap_or(Format::Json) {
        Format::Csv => Ok(bands_csv(&plan)),
        Format::Json => json(&RealizeOutput { cap, verified, plan: &plan }),
    }
}

#[derive(Serialize)]
struct Witness {
    #[serde(serialize_with = "crate::util::ser_ratio")]
    nu: BigRational,
    nu_f64: f64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bands: Option<Vec<crate::spectra::realize::Band>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct ScanReport {
    construction: Construction,
    seed: u64,
    #[serde(serialize_with = "crate::util::ser_ratio")]
    cap: BigRational,
    cap_f64: f64,
    witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<GapReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_passes: Option<bool>,
}

fn cmd_scan(cfg: &RunConfig, input: &Path, grid: usize, values: Option<&[String]>, heads: usize) -> Result<String> {
    let t = load_triple(input)?;
    let cap = level_cap(&t)?;
    let targets: Vec<BigRational> = match values {
        Some(v) => v.iter().map(|s| number(s)).collect::<Result<_>>()?,
        None => (1..=grid)
            .map(|j| &cap * BigRational::new(BigInt::from(19 * j), BigInt::from(20 * (grid + 1))))
            .collect(),
    };
    let zero = BigRational::zero();
    let one = BigRational::from_integer(1.into());
    if let Some(bad) = targets.iter().find(|x| **x <= zero || **x >= one) {
        return Err(Error::invalid(format!("target {} outside (0, 1)", fmt_ratio(bad))));
    }
    let mut witnesses = Vec::new();
    for nu in targets {
        let w = match realize_frequency(&t, &realize_params(&nu, None, 3)) {
            Ok(plan) => {
                let verified = verify_plan(&t, &plan)?;
                Witness {
                    nu_f64: to_f64(&nu),
                    nu,
                    status: if verified && plan.bands_hold() { "witnessed" } else { "failed" },
                    ladder: Some(plan.ladder.clone()),
                    verified: Some(verified),
                    bands: Some(plan.bands),
                    error: None,
                }
            }
            Err(e @ (Error::TargetUnreachable(_) | Error::BudgetExceeded(_) | Error::LadderInvalid(_))) => Witness {
                nu_f64: to_f64(&nu),
                nu,
                status: "failed",
                ladder: None,
                verified: None,
                bands: None,
                error: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        witnesses.push(w);
    }
    let gap = if t.construction == Construction::ThreeToOne {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let params = GapParams {
            heads,
            ..GapParams::default()
        };
        Some(gap_check_three_to_one(&t, &params, &mut rng)?)
    } else {
        None
    };
    let report = ScanReport {
        construction: t.construction,
        seed: cfg.seed,
        cap_f64: to_f64(&cap),
        cap,
        witnesses,
        gap_passes: gap.as_ref().map(|g| g.passes()),
        gap,
    };
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json(&report),
        Format::Csv => {
            let mut s = String::from("nu,nu_float,status,ladder,verified\n");
            for w in &report.witnesses {
                let ladder = w.ladder.as_ref().map_or(String::new(), |l| {
                    l.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
                });
                s.push_str(&format!(
                    "{},{:.12},{},{},{}\n",
                    fmt_ratio(&w.nu),
                    w.nu_f64,
                    w.status,
                    ladder,
                    w.verified.unwrap_or(false)
                ));
            }
            Ok(s)
        }
    }
}

/// Runs one command and writes its output to `--out` or returns it.
pub fn run(cli: &Cli) -> Result<Option<String>> {
    let cfg = RunConfig::resolve(&cli.global)?;
    let text = match &cli.command {
        Command::Build { kind, params, input } => cmd_build(&cfg, *kind, params, input.as_deref())?,
        Command::Extend {
            input,
            mode,
            triple,
            preprocess,
            thin_width,
            loose_levels,
        } => {
            let colour = ColourParams {
                thin_width: *thin_width,
                loose_levels: *loose_levels,
                preprocess: *preprocess,
                ..ColourParams::default()
            };
            cmd_extend(&cfg, input, *mode, triple, colour)?
        }
        Command::Orbit {
            input,
            steps,
            top,
            rank,
            picks,
            random,
        } => cmd_orbit(&cfg, input, *steps, *top, rank.as_deref(), picks.as_deref(), *random)?,
        Command::Realize {
            input,
            nu,
            cap_fraction,
            ladder,
            rungs,
        } => cmd_realize(&cfg, input, nu.as_deref(), cap_fraction.as_deref(), ladder.clone(), *rungs)?,
        Command::Scan {
            input,
            grid,
            values,
            heads,
        } => cmd_scan(&cfg, input, *grid, values.as_deref(), *heads)?,
    };
    match &cfg.out {
        Some(p) => {
            fs::write(p, text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
