//! `diverid`: extract descriptors, identify divers, score sessions and
//! synthesize test sequences.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 data or schema
//! error, 3 internal invariant breach.

mod frames;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use diverid_core::config::{Config, KEYS};
use diverid_core::pipeline::synth::PRESET_COUNT;
use diverid_core::pipeline::{
    evaluate, extract_features, features_to_jsonl, parse_detections, render_overlay, run_session,
    DetectionsFile, FrameSource, IdentityPalette, ScenarioSpec, SessionReport, SyntheticScenario,
};
use diverid_core::Error;

use frames::{frame_name, save_png, DiskFrames};

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(e) => match e {
                Error::Config(_) | Error::Scenario(_) | Error::InsufficientNames { .. } => 1,
                Error::Invariant(_) | Error::Contract(_) => 3,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn path_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .value_name("PATH")
        .value_parser(value_parser!(PathBuf))
        .required(true)
        .help(help)
}

fn cli() -> Command {
    let mut cmd = Command::new("diverid")
        .about("Diver re-identification from per-frame detections")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(value_parser!(PathBuf))
                .global(true)
                .help("key = value configuration file, overridden by flags"),
        );
    for spec in KEYS {
        cmd = cmd.arg(
            Arg::new(spec.key)
                .long(spec.key)
                .value_name("VALUE")
                .global(true)
                .help_heading("Configuration")
                .help(format!("{} [default: {}]", spec.help, if spec.default.is_empty() { "none" } else { spec.default })),
        );
    }
    cmd.subcommand(
        Command::new("extract")
            .about("Write one JSON line of 18 features per accepted detection")
            .arg(path_arg("frames", "frame directory or manifest"))
            .arg(path_arg("detections", "detections JSON"))
            .arg(path_arg("out", "output JSON-lines file")),
    )
    .subcommand(
        Command::new("identify")
            .about("Assign identities and write the detections with identity filled")
            .arg(path_arg("frames", "frame directory or manifest"))
            .arg(path_arg("detections", "detections JSON"))
            .arg(path_arg("out", "output assignments JSON"))
            .arg(
                Arg::new("overlay")
                    .long("overlay")
                    .value_name("DIR")
                    .value_parser(value_parser!(PathBuf))
                    .help("also write annotated frames to this directory"),
            ),
    )
    .subcommand(
        Command::new("evaluate")
            .about("Score assignments against ground truth")
            .arg(
                Arg::new("assignments")
                    .long("assignments")
                    .value_name("PATH")
                    .value_parser(value_parser!(PathBuf))
                    .action(ArgAction::Append)
                    .required(true)
                    .help("assignments JSON, repeat once per scenario"),
            )
            .arg(
                Arg::new("truth")
                    .long("truth")
                    .value_name("PATH")
                    .value_parser(value_parser!(PathBuf))
                    .action(ArgAction::Append)
                    .required(true)
                    .help("ground truth JSON, paired with --assignments in order"),
            )
            .arg(
                Arg::new("name")
                    .long("name")
                    .value_name("TEXT")
                    .action(ArgAction::Append)
                    .help("scenario label per pair [default: the truth file's video]"),
            )
            .arg(path_arg("report", "output report JSON")),
    )
    .subcommand(
        Command::new("synth")
            .about("Render a synthetic scenario with ground truth")
            .arg(
                Arg::new("scenario")
                    .long("scenario")
                    .value_name("ID")
                    .value_parser(value_parser!(u8).range(1..=PRESET_COUNT as i64))
                    .required(true)
                    .help("scenario preset 1 to 7"),
            )
            .arg(
                Arg::new("seed")
                    .long("seed")
                    .value_name("N")
                    .value_parser(value_parser!(u64))
                    .default_value("0"),
            )
            .arg(path_arg("out", "output directory for frames/ and truth.json"))
            .arg(
                Arg::new("frame-count")
                    .long("frame-count")
                    .value_name("N")
                    .value_parser(value_parser!(usize))
                    .help("number of frames [default: 300]"),
            )
            .arg(Arg::new("width").long("width").value_name("PX").value_parser(value_parser!(u32)))
            .arg(Arg::new("height").long("height").value_name("PX").value_parser(value_parser!(u32))),
    )
}

/// Defaults, then the configuration file, then flags; validated as a whole.
fn load_config(m: &ArgMatches) -> Result<Config, Failure> {
    let mut cfg = Config::default();
    if let Some(path) = m.get_one::<PathBuf>("config") {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for spec in KEYS {
        if let Some(v) = m.get_one::<String>(spec.key) {
            cfg.set(spec.key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_detections(path: &Path, strict: bool) -> Result<DetectionsFile, Failure> {
    let text = fs::read_to_string(path).map_err(Error::from)?;
    let parsed = parse_detections(&text, strict).map_err(|e| match e {
        Error::Schema { location, message } => Error::Schema {
            location: format!("{}: {location}", path.display()),
            message,
        },
        e => e,
    })?;
    for w in &parsed.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(parsed.file)
}

fn write(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Error::from)?;
    }
    fs::write(path, contents).map_err(Error::from)?;
    Ok(())
}

fn cmd_extract(m: &ArgMatches, cfg: &Config) -> Outcome {
    let frames = DiskFrames::open(m.get_one::<PathBuf>("frames").expect("required"))?;
    let dets = read_detections(m.get_one::<PathBuf>("detections").expect("required"), cfg.strict)?;
    let (vectors, log) = extract_features(&frames, &dets, &cfg.session)?;
    for e in &log.entries {
        log::info!("{}", e.message);
    }
    write(m.get_one::<PathBuf>("out").expect("required"), &features_to_jsonl(&vectors))?;
    eprintln!("{} feature vectors, {} detections skipped", vectors.len(), log.entries.iter().filter(|e| e.detection_index.is_some()).count());
    Ok(())
}

fn cmd_identify(m: &ArgMatches, cfg: &Config) -> Outcome {
    let frames = DiskFrames::open(m.get_one::<PathBuf>("frames").expect("required"))?;
    let dets = read_detections(m.get_one::<PathBuf>("detections").expect("required"), cfg.strict)?;
    let out = run_session(&frames, &dets, &cfg.session)?;
    for e in &out.log.entries {
        log::info!("{}", e.message);
    }
    write(m.get_one::<PathBuf>("out").expect("required"), &out.assignments.to_json())?;

    if let Some(dir) = m.get_one::<PathBuf>("overlay") {
        fs::create_dir_all(dir).map_err(Error::from)?;
        let palette = IdentityPalette::new(&out.identities.names());
        for f in &out.assignments.frames {
            let img = render_overlay(&frames.frame(f.index)?, &f.detections, &palette)?;
            save_png(&img, &dir.join(frame_name(f.index)))?;
        }
    }
    eprintln!(
        "{} identities over {} frames: {}",
        out.identities.len(),
        out.assignments.frames.len(),
        out.identities.names().join(", ")
    );
    Ok(())
}

fn cmd_evaluate(m: &ArgMatches, cfg: &Config) -> Outcome {
    let a: Vec<&PathBuf> = m.get_many("assignments").expect("required").collect();
    let t: Vec<&PathBuf> = m.get_many("truth").expect("required").collect();
    let names: Vec<&String> = m.get_many("name").map(Iterator::collect).unwrap_or_default();
    if a.len() != t.len() {
        return Err(Failure::Usage(format!("{} --assignments but {} --truth", a.len(), t.len())));
    }
    if !names.is_empty() && names.len() != a.len() {
        return Err(Failure::Usage("give one --name per --assignments/--truth pair or none".into()));
    }
    let mut scenarios = Vec::new();
    for (i, (ap, tp)) in a.iter().zip(&t).enumerate() {
        let assigned = read_detections(ap, cfg.strict)?;
        let truth = read_detections(tp, cfg.strict)?;
        let name = names.get(i).map_or(truth.video.clone(), |n| n.to_string());
        scenarios.push(evaluate(&name, &assigned, &truth, cfg.iou_threshold)?);
    }
    let report = SessionReport::new(cfg.iou_threshold, scenarios);
    write(m.get_one::<PathBuf>("report").expect("required"), &report.to_json())?;
    print!("{}", report.table());
    Ok(())
}

fn cmd_synth(m: &ArgMatches) -> Outcome {
    let id = *m.get_one::<u8>("scenario").expect("required");
    let seed = *m.get_one::<u64>("seed").expect("defaulted");
    let mut spec = ScenarioSpec::preset(id)?;
    if let Some(&n) = m.get_one::<usize>("frame-count") {
        spec.frames = n;
    }
    if let Some(&w) = m.get_one::<u32>("width") {
        spec.width = w;
    }
    if let Some(&h) = m.get_one::<u32>("height") {
        spec.height = h;
    }
    let scenario = SyntheticScenario::new(&spec, seed)?;
    let out = m.get_one::<PathBuf>("out").expect("required");
    let frame_dir = out.join("frames");
    fs::create_dir_all(&frame_dir).map_err(Error::from)?;
    for f in 0..scenario.len() {
        save_png(&scenario.render(f)?, &frame_dir.join(frame_name(f as u64)))?;
    }
    write(&out.join("truth.json"), &scenario.truth().to_json())?;
    eprintln!("{}: {} frames written to {}", spec.name, spec.frames, out.display());
    Ok(())
}

fn run() -> Outcome {
    let m = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(Failure::Usage(e.render().to_string())),
    };
    let cfg = load_config(&m)?;
    match m.subcommand() {
        Some(("extract", sub)) => cmd_extract(sub, &cfg),
        Some(("identify", sub)) => cmd_identify(sub, &cfg),
        Some(("evaluate", sub)) => cmd_evaluate(sub, &cfg),
        Some(("synth", sub)) => cmd_synth(sub),
        _ => Err(Failure::Usage("unknown command".into())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) if m.starts_with("error:") => {
            eprintln!("{}", m.trim_end());
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {}", f.to_string().trim_end());
            ExitCode::from(f.exit_code())
        }
    }
}
