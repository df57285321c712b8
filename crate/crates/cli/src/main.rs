use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tilepack::constructor::{construct_with, ConstructError, ConstructOptions, Construction, DEFAULT_SEARCH_CAP};
use tilepack::field::{parse_rational, FieldElement, FieldError};
use tilepack::io::{self, IoError, Scene};
use tilepack::lattice::LatticeError;
use tilepack::nofd::{witness_unbounded, NofdError};
use tilepack::par::Execution;
use tilepack::structure::closure_decomposition;
use tilepack::verifier::{sample_multiplicity_with, verify_packing_with, VerifyError, VerifyOptions};

mod svg;

#[derive(Parser)]
#[command(name = "tilepack", version, about = "Bounded sets that tile by one lattice and pack by another")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closure of L + M: case, (m, n), the coordinate change T and the basis of W
    Analyze {
        scene: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build F, certify it and print F, the trace and the volumes
    Construct {
        scene: PathBuf,
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a body against a lattice; exit 0 iff the property holds
    Verify {
        /// Body JSON (as emitted in the "F" field of `construct`)
        body: PathBuf,
        /// Lattice JSON {"dim", "D", "basis"}, or a scene together with --which
        lattice: PathBuf,
        #[arg(long, value_enum, default_value_t = Property::Tiling)]
        property: Property,
        #[arg(long, value_enum)]
        which: Option<Which>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build F and histogram the multiplicities at sample points
    SampleCheck {
        scene: PathBuf,
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Counting witness that no bounded common fundamental domain of radius r exists
    NoBoundedFd {
        scene: PathBuf,
        #[arg(long, default_value = "0")]
        r: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw F with a window of L-translates (2-D scenes only)
    ExportSvg {
        scene: PathBuf,
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct BuildArgs {
    /// Search radius for the density search [default: scene "cap", else 64]
    #[arg(long)]
    cap: Option<u64>,
    /// Run on one thread
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Tiling,
    Packing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    #[value(name = "L")]
    L,
    #[value(name = "M")]
    M,
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Parse(String),
    Field(String),
    Dimension(String),
    VolumeOrder(String),
    SearchExhausted(String),
    NontrivialIntersection(String),
    Unsupported(String),
    Certification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 3,
            CliError::Parse(_) => 4,
            CliError::Field(_) => 5,
            CliError::Dimension(_) => 6,
            CliError::VolumeOrder(_) => 7,
            CliError::SearchExhausted(_) => 8,
            CliError::NontrivialIntersection(_) => 9,
            CliError::Unsupported(_) => 10,
            CliError::Certification(_) => 11,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m)
            | CliError::Parse(m)
            | CliError::Field(m)
            | CliError::Dimension(m)
            | CliError::VolumeOrder(m)
            | CliError::SearchExhausted(m)
            | CliError::NontrivialIntersection(m)
            | CliError::Unsupported(m)
            | CliError::Certification(m) => m,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::MalformedRational(_) => CliError::Parse(e.to_string()),
            _ => CliError::Field(e.to_string()),
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Field(f) => f.into(),
            _ => CliError::Dimension(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Json(_) | IoError::Schema(_) => CliError::Parse(e.to_string()),
            IoError::Field(f) => f.into(),
            IoError::Lattice(l) => l.into(),
            IoError::Dimension(_) | IoError::Geometry(_) => CliError::Dimension(e.to_string()),
        }
    }
}

impl From<ConstructError> for CliError {
    fn from(e: ConstructError) -> Self {
        match e {
            ConstructError::VolumeOrder { .. } => CliError::VolumeOrder(e.to_string()),
            ConstructError::SearchExhausted { .. } => CliError::SearchExhausted(e.to_string()),
            ConstructError::Lattice(l) => l.into(),
            ConstructError::Certification(_) | ConstructError::Internal(_) => {
                CliError::Certification(e.to_string())
            }
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Lattice(l) => l.into(),
            _ => CliError::Dimension(e.to_string()),
        }
    }
}

impl From<NofdError> for CliError {
    fn from(e: NofdError) -> Self {
        match e {
            NofdError::NontrivialIntersection(_) => CliError::NontrivialIntersection(e.to_string()),
            NofdError::VolumeOrder(_) => CliError::VolumeOrder(e.to_string()),
            NofdError::NegativeRadius => CliError::Parse(e.to_string()),
            NofdError::NotFound(_) => CliError::SearchExhausted(e.to_string()),
            NofdError::Lattice(l) => l.into(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_scene(path: &Path) -> Result<Scene, CliError> {
    Ok(io::parse_scene(&read(path)?)?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_json(v: &Value, out: Option<&Path>) -> Result<(), CliError> {
    emit(&serde_json::to_string_pretty(v).expect("JSON values serialize"), out)
}

fn execution(build: BuildArgs) -> Execution {
    if build.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn build(scene: &Scene, args: BuildArgs) -> Result<Construction, CliError> {
    let opts = ConstructOptions {
        search_cap: args.cap.or(scene.search_cap).unwrap_or(DEFAULT_SEARCH_CAP),
        execution: execution(args),
    };
    Ok(construct_with(&scene.l, &scene.m, &opts)?)
}

/// Points of a Kronecker sequence in the body's bounding box (box
/// coordinates), mapped to input coordinates. The prime denominator keeps
/// them off the box boundaries.
fn sample_points(c: &Construction, count: usize) -> Vec<Vec<FieldElement>> {
    const P: i64 = 10007;
    const STEPS: [i64; 3] = [6181, 7549, 5698];
    let Some(bb) = c.body.bounding_box() else {
        return Vec::new();
    };
    let d = c.body.dim();
    (0..count as i64)
        .map(|i| {
            let y: Vec<FieldElement> = (0..d)
                .map(|j| {
                    let t = FieldElement::from_ratio(((i + 1) * STEPS[j % 3] + j as i64) % P, P);
                    &bb.lo()[j] + &(&t * &(&bb.hi()[j] - &bb.lo()[j]))
                })
                .collect();
            c.body.transform_to_original().mul_vec(&y)
        })
        .collect()
}

fn histogram(mult: &[usize]) -> Value {
    let mut counts = std::collections::BTreeMap::new();
    for &m in mult {
        *counts.entry(m.to_string()).or_insert(0usize) += 1;
    }
    json!(counts)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Analyze { scene, out } => {
            let s = load_scene(&scene)?;
            let dec = closure_decomposition(&s.l, &s.m)?;
            emit_json(&io::decomposition_to_json(&dec), out.as_deref())?;
            Ok(true)
        }
        Command::Construct { scene, build: args, out } => {
            let s = load_scene(&scene)?;
            let c = build(&s, args)?;
            emit_json(&io::construction_to_json(&c), out.as_deref())?;
            Ok(true)
        }
        Command::Verify {
            body,
            lattice,
            property,
            which,
            out,
        } => {
            let lat_doc = io::parse_json(&read(&lattice)?)?;
            let field = io::field_from_json(&lat_doc)?;
            let lat = match which {
                Some(w) => {
                    let s = io::scene_from_json(&lat_doc)?;
                    match w {
                        Which::L => s.l,
                        Which::M => s.m,
                    }
                }
                None => io::lattice_from_json(&lat_doc, &field, None)?,
            };
            let body_doc = io::parse_json(&read(&body)?)?;
            let body_doc = body_doc.get("F").cloned().unwrap_or(body_doc);
            let f = io::body_from_json(&body_doc, &field)?;
            let report = verify_packing_with(&f, &lat, VerifyOptions::default())?;
            emit_json(&io::report_to_json(&report), out.as_deref())?;
            Ok(match property {
                Property::Tiling => report.is_tiling,
                Property::Packing => report.is_packing,
            })
        }
        Command::SampleCheck {
            scene,
            build: args,
            samples,
            out,
        } => {
            let s = load_scene(&scene)?;
            let c = build(&s, args)?;
            let points = sample_points(&c, samples);
            let exec = execution(args);
            let ml = sample_multiplicity_with(&c.body, &s.l, &points, exec)?;
            let mm = sample_multiplicity_with(&c.body, &s.m, &points, exec)?;
            let tiles = ml.iter().all(|&k| k == 1);
            let packs = mm.iter().all(|&k| k <= 1);
            emit_json(
                &json!({
                    "samples": points.len(),
                    "L": histogram(&ml),
                    "M": histogram(&mm),
                    "tiles_L": tiles,
                    "packs_M": packs,
                }),
                out.as_deref(),
            )?;
            Ok(tiles && packs)
        }
        Command::NoBoundedFd { scene, r, out } => {
            let s = load_scene(&scene)?;
            let r = parse_rational(&r)?;
            let w = witness_unbounded(&s.l, &s.m, &r)?;
            emit_json(&io::witness_to_json(&w), out.as_deref())?;
            Ok(true)
        }
        Command::ExportSvg { scene, build: args, out } => {
            let s = load_scene(&scene)?;
            if s.d != 2 {
                return Err(CliError::Unsupported(format!(
                    "export-svg draws 2-dimensional scenes, this one has d = {}",
                    s.d
                )));
            }
            let c = build(&s, args)?;
            let drawing = svg::render(&c, &s.l, &s.m)?;
            emit(&drawing, out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
