mod config;
mod svg;
mod verify;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tropdesc::broken::enumerate_broken_lines;
use tropdesc::descend::{j_function, DescendentTable};
use tropdesc::error::Error;
use tropdesc::lattice::RatPoint;
use tropdesc::sample::{invariants_for, sample_generic, Sampled};
use tropdesc::scatter::{check_consistency, BuildOptions, Diagram, DiagramRecord};

use config::{FileConfig, FlagValues, Format, RunConfig};

/// Marks errors caused by the user's input.
#[derive(Debug)]
pub struct BadInput;

impl fmt::Display for BadInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("bad input")
    }
}

/// Marks a failed self-check.
#[derive(Debug)]
pub struct CheckFailed;

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("consistency check failed")
    }
}

#[derive(Parser, Debug)]
#[command(name = "tropdesc", version, about = "Tropical descendent invariants of the projective plane")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of marked points to sample.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Explicit marked points, `x,y;x,y;...`, or a file holding them.
    #[arg(long, global = true, allow_hyphen_values = true)]
    points: Option<String>,
    /// Endpoint of the broken lines, `x,y`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, global = true)]
    dmax: Option<u32>,
    #[arg(long, global = true)]
    retries: Option<u32>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the scattering diagram.
    Scatter {
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Also check that every singular point is consistent.
        #[arg(long)]
        check: bool,
    },
    /// Compute the potential at the endpoint.
    Potential {
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Compute the table of descendent invariants.
    Invariants {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Arrange a table of invariants as J-function coefficients.
    Jfun {
        /// Table written by `invariants`; computed afresh when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Run the acceptance checks within the k and dmax budget.
    Verify {
        /// Where to write the JSON report; `--out` is used when absent.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, hide = true, value_enum)]
        perturb: Option<verify::Perturb>,
    },
    /// Re-render a diagram written by `scatter`.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Serialize, Deserialize)]
struct RunMeta {
    k: usize,
    seed: u64,
    attempt: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<RatPoint>,
}

#[derive(Serialize, Deserialize)]
struct ScatterOutput {
    meta: RunMeta,
    #[serde(flatten)]
    diagram: DiagramRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    consistency: Option<ConsistencySummary>,
}

#[derive(Serialize, Deserialize)]
struct ConsistencySummary {
    checked: usize,
    passed: bool,
}

fn read_points(arg: String) -> Result<String> {
    let path = Path::new(&arg);
    if !arg.contains(',') && path.exists() {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading points from {}", path.display()))
            .context(BadInput)?;
        Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(";"))
    } else {
        Ok(arg)
    }
}

fn resolve(g: GlobalArgs) -> Result<RunConfig> {
    let file = match &g.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = FlagValues {
        k: g.k,
        points: g.points.map(read_points).transpose()?,
        q: g.q,
        seed: g.seed,
        d_max: g.dmax,
        retries: g.retries,
        out: g.out,
        format: g.format.map(|f| match f {
            FormatArg::Json => "json".into(),
            FormatArg::Text => "text".into(),
        }),
        csv: None,
        svg: None,
        threads: g.threads,
    };
    RunConfig::resolve(file, flags)
}

fn emit(cfg: &RunConfig, json: &impl Serialize, text: impl FnOnce() -> String) -> Result<()> {
    let body = match cfg.format {
        Format::Json => serde_json::to_string_pretty(json)? + "\n",
        Format::Text => text(),
    };
    write_or_print(cfg.out.as_deref(), &body)
}

fn write_or_print(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn sample(cfg: &RunConfig, singular_points: bool) -> Result<Sampled> {
    let opts = BuildOptions {
        singular_points,
        ..BuildOptions::default()
    };
    Ok(sample_generic(&cfg.sample_config(), &opts)?)
}

fn meta(cfg: &RunConfig, s: &Sampled, with_q: bool) -> RunMeta {
    RunMeta {
        k: cfg.k,
        seed: cfg.seed,
        attempt: s.attempt,
        q: with_q.then(|| s.q.clone()),
    }
}

fn scatter(cfg: &RunConfig, svg_path: Option<PathBuf>, check: bool) -> Result<()> {
    let s = sample(cfg, true)?;
    let consistency = if check {
        let report = check_consistency(&s.diagram)?;
        Some(ConsistencySummary {
            checked: report.checked,
            passed: report.passed(),
        })
    } else {
        None
    };
    let out = ScatterOutput {
        meta: meta(cfg, &s, false),
        diagram: DiagramRecord::from(&s.diagram),
        consistency,
    };
    if let Some(p) = svg_path.or(cfg.svg.clone()) {
        write_file(&p, &svg::render(&s.diagram, &[], None))?;
    }
    emit(cfg, &out, || {
        let mut t = format!("{} points, {} rays, {} singular points\n", s.points.len(), s.diagram.rays.len(), s.diagram.singular_points.len());
        for r in &s.diagram.rays {
            t += &format!("{} degree {} marked {} mult {}\n", r.base, r.degree, r.uset, r.mult);
        }
        if let Some(c) = &out.consistency {
            t += &format!("consistency: {} loops checked, {}\n", c.checked, if c.passed { "pass" } else { "FAIL" });
        }
        t
    })?;
    match out.consistency {
        Some(c) if !c.passed => Err(anyhow!("a loop around a singular point is not the identity").context(CheckFailed)),
        _ => Ok(()),
    }
}

fn potential_cmd(cfg: &RunConfig, svg_path: Option<PathBuf>) -> Result<()> {
    let s = sample(cfg, false)?;
    if let Some(p) = svg_path.or(cfg.svg.clone()) {
        let lines = enumerate_broken_lines(&s.q, &s.diagram)?;
        write_file(&p, &svg::render(&s.diagram, &lines, Some(&s.q)))?;
    }
    let out = json!({
        "meta": meta(cfg, &s, true),
        "potential": s.potential.to_string(),
        "y0": tropdesc::lattice::format_rational(&s.potential.y0),
        "terms": s.potential.series,
    });
    emit(cfg, &out, || format!("W = {}\n", s.potential))
}

fn invariants(cfg: &RunConfig, csv: Option<PathBuf>) -> Result<()> {
    let (_, table) = invariants_for(&cfg.sample_config(), cfg.d_max)?;
    if let Some(p) = csv.or(cfg.csv.clone()) {
        write_file(&p, &table.to_csv())?;
    }
    emit(cfg, &table, || table.to_csv())
}

fn jfun(cfg: &RunConfig, input: Option<PathBuf>) -> Result<()> {
    let (table, d_max) = match input {
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .with_context(|| format!("reading {}", p.display()))
                .context(BadInput)?;
            let table: DescendentTable = serde_json::from_str(&text)
                .with_context(|| format!("parsing table {}", p.display()))
                .context(BadInput)?;
            let d = table.d_max();
            (table, d)
        }
        None => (invariants_for(&cfg.sample_config(), cfg.d_max)?.1, cfg.d_max),
    };
    let report = j_function(&table, d_max);
    emit(cfg, &report, || {
        let mut t = format!("J = {} * (J_0 T0 + J_1 T1 + J_2 T2)\n", report.prefactor);
        for c in &report.columns {
            let mut parts = c.constant.clone();
            for e in &c.entries {
                parts.push(format!("({}) q^{} e^({} y1) y2^{}/{}!", e.value, e.q_power, e.d, e.points, e.points));
            }
            t += &format!("J_{} ({}): {}\n", c.i, c.insertion, parts.join(" + "));
        }
        t
    })
}

fn render(cfg: &RunConfig, input: PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(&input)
        .with_context(|| format!("reading {}", input.display()))
        .context(BadInput)?;
    let rec: ScatterOutput = serde_json::from_str(&text)
        .with_context(|| format!("parsing diagram {}", input.display()))
        .context(BadInput)?;
    let diagram = Diagram::try_from(&rec.diagram).context(BadInput)?;
    let out = cfg.out.as_deref().ok_or_else(|| anyhow!("render needs --out").context(BadInput))?;
    write_file(out, &svg::render(&diagram, &[], None))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve(cli.global)?;
    match cli.command {
        Command::Scatter { svg, check } => scatter(&cfg, svg, check),
        Command::Potential { svg } => potential_cmd(&cfg, svg),
        Command::Invariants { csv } => invariants(&cfg, csv),
        Command::Jfun { input } => jfun(&cfg, input),
        Command::Verify { report, perturb } => verify::run(&cfg, report, perturb),
        Command::Render { input } => render(&cfg, input),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<BadInput>().is_some() {
        return 4;
    }
    if err.downcast_ref::<CheckFailed>().is_some() {
        return 3;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::ExhaustedRetries { .. }
                | Error::DegeneratePosition(_)
                | Error::DegenerateEndpoint(_)
                | Error::TangentialCrossing
                | Error::PathHitsSingularPoint(_)
                | Error::EndpointOnSupport(_) => 2,
                Error::InconsistentAcrossSubsets { .. } | Error::NegativePsiPower(_) | Error::NonNilpotentInput => 3,
                Error::Parse(_) | Error::DuplicatePoints(..) | Error::InsufficientPoints { .. } | Error::ZeroVector => 4,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
