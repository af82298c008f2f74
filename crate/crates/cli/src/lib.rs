//! Command line front end: `analyze` a sketch into a solved model and an
//! overlay, or `synth` a sketch with its ground truth.

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use trussketch::annotator::{generate_sketch, random_truss, render_overlay, OverlayStyle, SketchParams};
use trussketch::config::{load_config, Config};
use trussketch::pipeline::{analyze, AnalyzeOptions};
use trussketch::raster::{load_gray, save_binary_png, save_gray_png, save_rgb_png};
use trussketch::trussmodel::{from_json, issues_to_json, parse_scale_flag, to_json, Corrections};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

/// Environment variable naming a config file when `--config` is absent.
pub const CONFIG_ENV: &str = "TRUSSKETCH_CONFIG";

#[derive(Parser, Debug)]
#[command(name = "trussketch", version, about = "Parse, solve and annotate truss sketches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a sketch, solve it and draw member forces over it.
    Analyze(AnalyzeArgs),
    /// Render a synthetic sketch and its ground-truth model.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// Input sketch (PNG or BMP).
    pub image: PathBuf,
    /// Overlay PNG [default: <image>.overlay.png]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Model JSON [default: <image>.model.json]
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Issues JSON [default: <image>.issues.json]
    #[arg(long)]
    pub issues: Option<PathBuf>,
    /// Flat JSON config; falls back to $TRUSSKETCH_CONFIG.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corrections document applied after parsing.
    #[arg(long)]
    pub corrections: Option<PathBuf>,
    /// Reference distance between two nodes, as I,J=METERS.
    #[arg(long)]
    pub scale: Option<String>,
    /// Directory receiving one PNG per pipeline stage.
    #[arg(long)]
    pub debug_masks: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    /// Generate a random determinate truss.
    #[arg(long, conflicts_with = "model")]
    pub random: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub joints: usize,
    /// Render this model JSON instead of a random truss.
    #[arg(long, required_unless_present = "random")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out_image: PathBuf,
    #[arg(long)]
    pub out_truth: PathBuf,
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Synth(s) => cmd_synth(&s),
    }
}

fn fail(msg: impl Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_FAILURE
}

fn sibling(image: &Path, suffix: &str) -> PathBuf {
    let stem = image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sketch".into());
    image.with_file_name(format!("{stem}.{suffix}"))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn resolve_config(explicit: Option<&Path>) -> Result<Config, String> {
    let from_env = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let path = explicit.map(Path::to_path_buf).or(from_env);
    load_config(path.as_deref()).map_err(|e| e.to_string())
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> i32 {
    let config = match resolve_config(args.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let corrections = match &args.corrections {
        Some(p) => match std::fs::read_to_string(p)
            .map_err(|e| e.to_string())
            .and_then(|t| Corrections::from_json(&t).map_err(|e| e.to_string()))
        {
            Ok(c) => Some(c),
            Err(e) => return fail(format!("corrections {}: {e}", p.display())),
        },
        None => None,
    };
    let scale = match args.scale.as_deref().map(parse_scale_flag).transpose() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let gray = match load_gray(&args.image) {
        Ok(g) => g,
        Err(e) => return fail(format!("{}: {e}", args.image.display())),
    };

    let analysis = match analyze(&gray, &AnalyzeOptions { config, corrections, scale }) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };

    let overlay = render_overlay(&gray, &analysis.model, analysis.result.as_ref(), &OverlayStyle::default());
    let out = args.out.clone().unwrap_or_else(|| sibling(&args.image, "overlay.png"));
    let model_path = args.model.clone().unwrap_or_else(|| sibling(&args.image, "model.json"));
    let issues_path = args.issues.clone().unwrap_or_else(|| sibling(&args.image, "issues.json"));
    let written = save_rgb_png(&overlay, &out)
        .map_err(|e| format!("cannot write {}: {e}", out.display()))
        .and_then(|_| write(&model_path, &to_json(&analysis.model, analysis.result.as_ref())))
        .and_then(|_| write(&issues_path, &issues_to_json(&analysis.issues)));
    if let Err(e) = written {
        return fail(e);
    }
    if let Some(dir) = &args.debug_masks {
        if let Err(e) = std::fs::create_dir_all(dir) {
            return fail(format!("cannot create {}: {e}", dir.display()));
        }
        for (k, (name, mask)) in analysis.masks.iter().enumerate() {
            let path = dir.join(format!("{k:02}-{name}.png"));
            if let Err(e) = save_binary_png(mask, &path) {
                return fail(format!("cannot write {}: {e}", path.display()));
            }
        }
    }

    for issue in &analysis.issues {
        eprintln!("{issue}");
        eprintln!("  remedy: {}", issue.remedy());
    }
    if analysis.has_errors() {
        eprintln!("validation failed; see {}", issues_path.display());
        return EXIT_VALIDATION;
    }
    println!(
        "solved {} members; overlay {}, model {}",
        analysis.model.members.len(),
        out.display(),
        model_path.display()
    );
    EXIT_OK
}

pub fn cmd_synth(args: &SynthArgs) -> i32 {
    let params = SketchParams::default();
    let model = if args.random {
        match random_truss(args.seed, args.joints, &params) {
            Ok(m) => m,
            Err(e) => return fail(e),
        }
    } else {
        let Some(path) = &args.model else { return fail("either --random or --model is required") };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return fail(format!("{}: {e}", path.display())),
        };
        match from_json(&text) {
            Ok((m, _)) => m,
            Err(e) => return fail(format!("{}: {e}", path.display())),
        }
    };
    let img = match generate_sketch(&model, &params, args.seed) {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    if let Err(e) = save_gray_png(&img, &args.out_image) {
        return fail(format!("cannot write {}: {e}", args.out_image.display()));
    }
    if let Err(e) = write(&args.out_truth, &to_json(&model, None)) {
        return fail(e);
    }
    EXIT_OK
}
