//! Argument parsing, dispatch and the exit-code protocol.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qham::band::{self, ConstructibleSheaf};
use qham::catalog::Catalog;
use qham::pair::{MomentumPair, PairSpec};
use qham::polytope::Polytope;
use qham::rational::{fmt_q, fmt_vec, parse_q, Q};
use qham::rootsys::{AffineRootSystem, TypeSpec};
use qham::spherical::{self, Verdict, VertexVerdict};
use qham::twist::{self, GroupSpec};
use qham::AffinePoint;

use crate::examples;
use crate::render;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_SPHERICAL: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_MALFORMED: u8 = 3;
pub const EXIT_OUTSIDE_ALCOVE: u8 = 4;
pub const EXIT_INVALID_GROUP: u8 = 5;
pub const EXIT_EXAMPLES_FAILED: u8 = 6;
pub const EXIT_OTHER: u8 = 7;

#[derive(Parser, Debug)]
#[command(name = "qham", version, about = "Alcoves, momentum pairs and multiplicity-free quasi-Hamiltonian manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; `svg` is accepted by `render` only.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Svg,
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// Affine types separated by commas, e.g. `A2~1`, `A2^(2)`, `C2~1,T1`.
    #[arg(long = "type", conflicts_with = "group")]
    pub type_: Option<String>,
    /// Group specification (JSON) with optional twist.
    #[arg(long)]
    pub group: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simple roots, labels and vertices of the alcove.
    Alcove {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Folds a point into the alcove.
    Fold {
        #[command(flatten)]
        system: SystemArgs,
        /// Point coordinates, comma separated rationals.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Root system and lattice data of the centralizer at a point.
    Centralizer {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Checks a momentum pair (JSON) and prints the verdict or certificate.
    CheckPair { file: PathBuf },
    /// Stalk of the component-group sheaf at a point.
    Band {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Čech cohomology of the component-group sheaf over a polytope.
    Cohomology {
        #[command(flatten)]
        system: SystemArgs,
        /// Polytope vertices separated by `;`, defaulting to the whole alcove.
        #[arg(long, allow_hyphen_values = true)]
        vertices: Option<String>,
        /// Take the system and polytope from a momentum pair instead.
        #[arg(long, conflicts_with_all = ["type_", "group", "vertices"])]
        pair: Option<PathBuf>,
    },
    /// Runs the bundled example suite.
    Examples {
        /// Run every example (otherwise only list them).
        #[arg(long)]
        all: bool,
        /// Run only examples whose name contains this string.
        #[arg(long)]
        name: Option<String>,
        /// Write each example's pair specification to this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Draws a two-dimensional alcove as SVG.
    Render {
        #[command(flatten)]
        system: SystemArgs,
        /// Momentum pair whose polytope is shaded.
        #[arg(long, conflicts_with_all = ["type_", "group"])]
        pair: Option<PathBuf>,
        /// Polytope vertices separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        polytope: Option<String>,
        /// Draw the walls of the band root system of the pair.
        #[arg(long)]
        axes: bool,
    },
}

/// What a command produced: text and JSON renderings plus an exit code.
pub struct Output {
    pub text: String,
    pub json: Value,
    pub svg: Option<String>,
    pub code: u8,
}

impl Output {
    fn new(text: String, json: Value) -> Self {
        Output { text, json, svg: None, code: EXIT_OK }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
                s.push('\n');
                s
            }
            Format::Svg => self.svg.clone().unwrap_or_default(),
        }
    }
}

/// A failed run: the diagnostic and the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

/// Maps an error to its exit code and a diagnostic naming the error class.
pub fn classify(err: &anyhow::Error) -> Failure {
    let chain = format!("{err:#}");
    for cause in err.chain() {
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return Failure { code: EXIT_MALFORMED, message: format!("malformed JSON: {chain}") };
        }
        if let Some(e) = cause.downcast_ref::<qham::Error>() {
            use qham::Error as E;
            return match e {
                E::OutsideAlcove(_) => {
                    Failure { code: EXIT_OUTSIDE_ALCOVE, message: format!("polytope outside the alcove: {chain}") }
                }
                E::InvalidType(_) | E::InvalidTwist(_) | E::InvalidMetric(_) => {
                    Failure { code: EXIT_INVALID_GROUP, message: format!("invalid group specification: {chain}") }
                }
                E::Parse(_) | E::Dimension { .. } => {
                    Failure { code: EXIT_MALFORMED, message: format!("malformed input: {chain}") }
                }
                _ => Failure { code: EXIT_OTHER, message: chain },
            };
        }
    }
    Failure { code: EXIT_OTHER, message: chain }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))
}

fn parse_point(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(|x| Ok(parse_q(x.trim())?)).collect()
}

fn parse_points(s: &str) -> Result<Vec<Vec<Q>>> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_point).collect()
}

fn plain(v: &[Q]) -> String {
    v.iter().map(fmt_q).collect::<Vec<_>>().join(",")
}

fn system(args: &SystemArgs) -> Result<AffineRootSystem> {
    match (&args.type_, &args.group) {
        (Some(t), _) => {
            let specs = t.split(',').map(|s| TypeSpec::parse(s.trim())).collect::<qham::Result<Vec<_>>>()?;
            Ok(AffineRootSystem::build_from_type(&specs)?)
        }
        (None, Some(path)) => {
            let g: GroupSpec = read_json(path)?;
            Ok(twist::twisted_datum(&g)?.root_system)
        }
        (None, None) => bail!("one of --type or --group is required"),
    }
}

fn point_in(rs: &AffineRootSystem, s: &str) -> Result<AffinePoint> {
    let p = parse_point(s)?;
    if p.len() != rs.dim() {
        return Err(qham::Error::Dimension { expected: rs.dim(), got: p.len() }.into());
    }
    Ok(AffinePoint::new(p))
}

fn alcove(rs: &AffineRootSystem) -> Result<Output> {
    let mut text = String::new();
    let comps: Vec<Value> = rs
        .components
        .iter()
        .map(|c| {
            let _ = writeln!(text, "component {}: roots {:?}, labels {:?}", c.name, c.roots, c.labels);
            json!({ "name": c.name, "affine": c.affine, "roots": c.roots, "labels": c.labels })
        })
        .collect();
    for (i, r) in rs.simple_roots.iter().enumerate() {
        let _ = writeln!(text, "α{i} = {r}");
    }
    let vertices = rs.vertices();
    if let Some(vs) = &vertices {
        for v in vs {
            let _ = writeln!(text, "vertex {}", fmt_vec(&v.coords));
        }
    } else {
        let _ = writeln!(text, "alcove is unbounded");
    }
    let json = json!({
        "dimension": rs.dim(),
        "components": comps,
        "simple_roots": rs.simple_roots,
        "vertices": vertices,
    });
    Ok(Output::new(text, json))
}

fn fold(rs: &AffineRootSystem, point: &str) -> Result<Output> {
    let x = point_in(rs, point)?;
    let (y, word) = rs.fold_to_alcove(&x);
    let text = format!("{}\n", plain(&y.coords));
    Ok(Output::new(text, json!({ "point": x, "folded": y, "word": word })))
}

fn centralizer(args: &SystemArgs, point: &str) -> Result<Output> {
    let rs = system(args)?;
    let x = point_in(&rs, point)?;
    if !rs.in_alcove(&x)? {
        return Err(qham::Error::OutsideAlcove(fmt_vec(&x.coords)).into());
    }
    let c = twist::centralizer_for(&rs, &rs.lattice, &x)?;
    let mut text = format!("{}\n", c.label);
    if let Some(n) = &c.group_name {
        let _ = writeln!(text, "group {n}");
    }
    let _ = writeln!(text, "walls {:?}", c.subsystem.indices);
    let _ = writeln!(text, "dimension {}", c.dim());
    let json = json!({
        "point": c.point,
        "types": c.types.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "walls": c.subsystem.indices,
        "lattice_invariants": c.lattice_invariants,
        "label": c.label,
        "group": c.group_name,
        "dimension": c.dim(),
    });
    Ok(Output::new(text, json))
}

fn band_stalk(rs: &AffineRootSystem, point: &str) -> Result<Output> {
    let x = point_in(rs, point)?;
    let stalks = band::component_stalks(rs, &x)?;
    let group = band::stalk_group(rs, &x)?;
    let mut text = format!("π0 = {group}\n");
    for s in &stalks {
        let _ = writeln!(text, "{}: I = {:?}, d = {}", s.component, s.nodes, s.d);
    }
    Ok(Output::new(text, json!({ "point": x, "stalk": group, "components": stalks })))
}

fn alcove_points(rs: &AffineRootSystem) -> Result<Vec<Vec<Q>>> {
    let vs = rs.vertices().ok_or_else(|| anyhow!("the alcove is unbounded; give --vertices"))?;
    Ok(vs.into_iter().map(|p| p.coords).collect())
}

fn cohomology(rs: &AffineRootSystem, pts: Vec<Vec<Q>>) -> Result<Output> {
    let p = Polytope::new(&pts)?;
    let sheaf = ConstructibleSheaf::component_sheaf(rs, &p)?;
    let h = sheaf.cech_cohomology()?;
    let mut text = String::new();
    for (i, g) in h.iter().enumerate() {
        let _ = writeln!(text, "H^{i} = {g}");
    }
    Ok(Output::new(
        text,
        json!({ "polytope": p.vertices.iter().map(|v| plain(v)).collect::<Vec<_>>(), "cohomology": h }),
    ))
}

fn load_pair(path: &Path) -> Result<MomentumPair> {
    let spec: PairSpec = read_json(path)?;
    Ok(spec.build()?)
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Spherical { .. } => EXIT_OK,
        Verdict::NotSpherical { .. } => EXIT_NOT_SPHERICAL,
        Verdict::Unknown { .. } => EXIT_UNKNOWN,
    }
}

fn check_pair(path: &Path, catalog: &Catalog) -> Result<Output> {
    let pair = load_pair(path)?;
    let report = spherical::check_pair(&pair, catalog)?;
    let code = verdict_code(&report.verdict);
    let mut text = String::new();
    for v in &report.vertices {
        let verdict = match &v.verdict {
            VertexVerdict::Spherical { model } => format!("Spherical, {model}"),
            VertexVerdict::NotSpherical { reason } => format!("NotSpherical, {reason}"),
            VertexVerdict::Unknown { reason } => format!("Unknown, {reason}"),
        };
        let _ = writeln!(text, "vertex {} {}: {} ({verdict})", v.vertex, fmt_vec(&v.point), v.centralizer);
    }
    let mut out = match &report.verdict {
        Verdict::Spherical { models } => {
            let cert = spherical::certificate(&pair, catalog)?;
            let _ = writeln!(text, "Spherical: {}", models.join(", "));
            let _ = writeln!(text, "dimension {}", cert.dimension);
            let _ = writeln!(text, "generic centralizer {}", cert.generic_centralizer);
            if let Some(b) = &cert.band_root_system {
                let _ = writeln!(text, "band root system {}", b.type_name);
            }
            Output::new(text, json!({ "verdict": "Spherical", "certificate": cert }))
        }
        v => {
            let _ = writeln!(text, "{}", v.name());
            Output::new(text, serde_json::to_value(&report).expect("serializable"))
        }
    };
    out.code = code;
    Ok(out)
}

fn run_examples(all: bool, name: Option<&str>, export: Option<&Path>, catalog: &Catalog) -> Result<Output> {
    let entries: Vec<examples::ExampleEntry> =
        examples::all().into_iter().filter(|e| name.is_none_or(|n| e.name.contains(n))).collect();
    if let Some(dir) = export {
        std::fs::create_dir_all(dir)?;
        for e in &entries {
            let file: String =
                e.name.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' }).collect();
            let file = file.split('-').filter(|s| !s.is_empty()).collect::<Vec<_>>().join("-");
            let body = serde_json::to_string_pretty(&e.spec)? + "\n";
            std::fs::write(dir.join(format!("{file}.json")), body)?;
        }
    }
    if !all && name.is_none() {
        let text: String = entries.iter().map(|e| format!("{}\n", e.name)).collect();
        let json = json!(entries.iter().map(|e| &e.name).collect::<Vec<_>>());
        return Ok(Output::new(text, json));
    }
    let results: Vec<examples::ExampleResult> = entries.iter().map(|e| examples::run(e, catalog)).collect();
    let failed = results.iter().filter(|r| !r.passed).count();
    let mut text = String::new();
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let _ = write!(text, "{status} {}: {}", r.name, r.verdict);
        if !r.models.is_empty() {
            let _ = write!(text, " [{}]", r.models.join(", "));
        }
        if let Some(d) = &r.detail {
            let _ = write!(text, " ({d})");
        }
        text.push('\n');
    }
    let _ = writeln!(text, "{} of {} examples pass", results.len() - failed, results.len());
    let mut out = Output::new(text, json!({ "results": results, "failed": failed }));
    if failed > 0 {
        out.code = EXIT_EXAMPLES_FAILED;
    }
    Ok(out)
}

fn render_cmd(
    system_args: &SystemArgs,
    pair: Option<&Path>,
    polytope: Option<&str>,
    axes: bool,
    catalog: &Catalog,
) -> Result<Output> {
    let (rs, pts, walls) = match pair {
        Some(path) => {
            let pair = load_pair(path)?;
            let walls = if axes {
                let cert = spherical::certificate(&pair, catalog)?;
                cert.band_root_system.map(|b| b.simple_roots).unwrap_or_default()
            } else {
                Vec::new()
            };
            (pair.datum.root_system.clone(), Some(pair.polytope.vertices.clone()), walls)
        }
        None => {
            if axes {
                bail!("--axes needs --pair");
            }
            let rs = system(system_args)?;
            let pts = polytope.map(parse_points).transpose()?;
            if let Some(pts) = &pts {
                for p in pts {
                    let x = point_in(&rs, &plain(p))?;
                    if !rs.in_alcove(&x)? {
                        return Err(qham::Error::OutsideAlcove(fmt_vec(p)).into());
                    }
                }
            }
            (rs, pts, Vec::new())
        }
    };
    let svg = render::render_svg(&rs, pts.as_deref(), &walls)?;
    let mut out = Output::new(String::new(), Value::Null);
    out.svg = Some(svg);
    Ok(out)
}

/// Runs a parsed command line and returns the rendered output and exit code.
pub fn run(cli: &Cli) -> std::result::Result<(String, u8), Failure> {
    let inner = || -> Result<(String, u8)> {
        let is_render = matches!(cli.command, Command::Render { .. });
        let format = cli.format.unwrap_or(if is_render { Format::Svg } else { Format::Text });
        if is_render != (format == Format::Svg) {
            bail!(if is_render { "render only emits svg" } else { "svg output is only available for render" });
        }
        let catalog = || -> Result<Catalog> { Ok(Catalog::load()?) };
        let out = match &cli.command {
            Command::Alcove { system: s } => alcove(&system(s)?)?,
            Command::Fold { system: s, point } => fold(&system(s)?, point)?,
            Command::Centralizer { system: s, point } => centralizer(s, point)?,
            Command::CheckPair { file } => check_pair(file, &catalog()?)?,
            Command::Band { system: s, point } => band_stalk(&system(s)?, point)?,
            Command::Cohomology { system: s, vertices, pair } => match pair {
                Some(path) => {
                    let pair = load_pair(path)?;
                    cohomology(&pair.datum.root_system, pair.polytope.vertices.clone())?
                }
                None => {
                    let rs = system(s)?;
                    let pts = match vertices {
                        Some(v) => parse_points(v)?,
                        None => alcove_points(&rs)?,
                    };
                    cohomology(&rs, pts)?
                }
            },
            Command::Examples { all, name, export } => {
                run_examples(*all, name.as_deref(), export.as_deref(), &catalog()?)?
            }
            Command::Render { system: s, pair, polytope, axes } => {
                render_cmd(s, pair.as_deref(), polytope.as_deref(), *axes, &catalog()?)?
            }
        };
        Ok((out.render(format), out.code))
    };
    inner().map_err(|e| classify(&e))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> std::result::Result<(String, u8), Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Failure { code: EXIT_OTHER, message: e.to_string() })?;
    run(&cli)
}
