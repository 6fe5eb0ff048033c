//! Subcommand definitions and dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use ocular_core::edges::{
    baddeley_metric, detect_edges, EdgeMap, EdgeParams, StvrSource,
};
use ocular_core::eyestate::{
    bank_io, blink_filter, classify, markov1_decorrelation, mean_off_diagonal, perclos_p3,
    synthesize_otmach, EyeState, OtMachParams, TransformDomain, VoteOutcome,
};
use ocular_core::formfactor::{horizontal_ff, local_ff, radial_ff, vertical_ff};
use ocular_core::imagecore::pgm::{load_frame_dir, load_pgm, save_pgm};
use ocular_core::imagecore::synth::{synth_eye, synth_grating, synth_step_edge, StepBoundary};
use ocular_core::imagecore::{add_noise, to_polar, GrayImage, NoiseSpec};
use ocular_core::noiseblind::{
    estimate, estimate_snr, estimate_stvr, EstimatorConfig, EstimatorMethod,
};
use ocular_core::ocular::{
    eye_corners, pupil_center, pupil_diameter, relative_position, OcularParams,
};
use ocular_core::saccade::{
    simulate_eye_motion, track_frames, Segment, TrackerConfig, TrackerKind,
    DEFAULT_VELOCITY_FLOOR,
};

use crate::output::{fmt_f64, write_json, Csv};
use crate::{input_err, usage_err, CliError};

#[derive(Parser)]
#[command(
    name = "ocular",
    version,
    about = "Ocular measurement toolkit: form factors, edges, pupil tracking, eye-state classification, PERCLOS, saccadic ratio"
)]
pub struct Cli {
    /// Fail (exit 3) when a numerical-degeneracy flag is raised.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate synthetic test images with a ground-truth sidecar.
    Synth(SynthArgs),
    /// Directional or local form-factor profiles.
    Ff(FfArgs),
    /// Detect edges into a binary PGM (0 = edge, 255 = non-edge).
    Edges(EdgesArgs),
    /// Baddeley error metric between two edge maps.
    Bem(BemArgs),
    /// Blind noise/variance estimation (M1-M5).
    NoiseEst(NoiseEstArgs),
    /// Pupil center (and diameter) per frame.
    Pupil(PupilArgs),
    /// Eye-corner detection.
    Corners(CornersArgs),
    /// Synthesize OT-MACH filters from class directories.
    TrainFilter(TrainFilterArgs),
    /// Classify eye state with a trained filter bank.
    Classify(ClassifyArgs),
    /// Sliding three-minute PERCLOS over a frame directory or label file.
    Perclos(PerclosArgs),
    /// Markov-1 decorrelation comparison between DCT and DFT.
    Decorrelation(DecorrelationArgs),
    /// Render a simulated gaze trace to CSV.
    SimulateSaccade(SimulateArgs),
    /// Track a frame sequence and report saccades and the saccadic ratio.
    TrackSaccade(TrackArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Step,
    Grating,
    Eye,
}

#[derive(Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    /// Step image: low intensity.
    #[arg(long, default_value_t = 0.0)]
    low: f64,
    /// Step image: high intensity.
    #[arg(long, default_value_t = 255.0)]
    high: f64,
    /// Step boundary: `vertical:COL`, `horizontal:ROW` or `square:X,Y,SIDE`.
    #[arg(long, default_value = "vertical:32")]
    boundary: String,
    /// Grating period in pixels.
    #[arg(long, default_value_t = 16)]
    period: usize,
    /// Grating amplitude decay exponent.
    #[arg(long, default_value_t = 0.0)]
    decay: f64,
    #[arg(long, default_value_t = 32.0)]
    pupil_x: f64,
    #[arg(long, default_value_t = 32.0)]
    pupil_y: f64,
    #[arg(long, default_value_t = 5.0)]
    pupil_radius: f64,
    #[arg(long, default_value_t = 10.0)]
    iris_radius: f64,
    #[arg(long, default_value_t = 0.0)]
    lid_coverage: f64,
    /// Additive zero-mean Gaussian noise variance.
    #[arg(long, default_value_t = 0.0)]
    noise_var: f64,
    /// Noise seed; required with `--strict` when noise is requested.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FfMode {
    Horizontal,
    Vertical,
    Radial,
    Local,
}

#[derive(Args, Serialize)]
pub struct FfArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: FfMode,
    /// Window side for local mode.
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Polar center `X,Y` for radial mode (defaults to the image center).
    #[arg(long)]
    center: Option<String>,
    #[arg(long)]
    radii: Option<usize>,
    #[arg(long, default_value_t = 360)]
    angles: usize,
    /// Output: `.csv` profile or `.pgm` scaled map (local mode).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct EdgesArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    alpha_low: f64,
    #[arg(long, default_value_t = 0.90)]
    alpha_high: f64,
    /// Suppression window side.
    #[arg(long, default_value_t = 5)]
    nms: usize,
    /// `auto` (blind local STVR) or an explicit global value in [0, 1].
    #[arg(long, default_value = "auto")]
    stvr: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct BemArgs {
    /// Edge map under test (PGM, 0 = edge).
    #[arg(long)]
    test: PathBuf,
    /// Reference edge map.
    #[arg(long, name = "ref")]
    reference: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Distance cap; defaults to the image diagonal.
    #[arg(long)]
    cap: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
pub enum MethodArg {
    M1,
    M2,
    M3,
    M4,
    M5,
}

impl From<MethodArg> for EstimatorMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::M1 => EstimatorMethod::M1,
            MethodArg::M2 => EstimatorMethod::M2,
            MethodArg::M3 => EstimatorMethod::M3,
            MethodArg::M4 => EstimatorMethod::M4,
            MethodArg::M5 => EstimatorMethod::M5,
        }
    }
}

#[derive(Args, Serialize)]
pub struct NoiseEstArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 8)]
    region_size: usize,
    #[arg(long, default_value_t = 0.5)]
    c_alpha: f64,
}

#[derive(Args, Serialize)]
pub struct OcularArgs {
    #[arg(long, default_value_t = 2.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0.20)]
    zone_halfwidth_frac: f64,
    #[arg(long, default_value_t = 0.01)]
    peak_tolerance_frac: f64,
    #[arg(long, default_value_t = 0.02)]
    corner_roi_frac: f64,
    #[arg(long, default_value_t = 60.0)]
    half_view_angle: f64,
    #[arg(long, default_value_t = 0.05)]
    radial_lo_frac: f64,
    #[arg(long, default_value_t = 0.5)]
    radial_hi_frac: f64,
}

impl OcularArgs {
    fn to_params(&self) -> OcularParams {
        OcularParams {
            gamma: self.gamma,
            zone_halfwidth_frac: self.zone_halfwidth_frac,
            peak_tolerance_frac: self.peak_tolerance_frac,
            corner_roi_frac: self.corner_roi_frac,
            half_view_angle: self.half_view_angle,
            radial_zone_frac: (self.radial_lo_frac, self.radial_hi_frac),
        }
    }
}

#[derive(Args, Serialize)]
pub struct PupilArgs {
    /// A single PGM or a frame directory (batch CSV).
    #[arg(long)]
    input: PathBuf,
    /// Also measure the diameter.
    #[arg(long)]
    diameter: bool,
    #[command(flatten)]
    ocular: OcularArgs,
    /// CSV output path for batch mode (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct CornersArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    ocular: OcularArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainArg {
    Dct,
    Dft,
}

impl From<DomainArg> for TransformDomain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Dct => TransformDomain::Dct,
            DomainArg::Dft => TransformDomain::Dft,
        }
    }
}

#[derive(Args, Serialize)]
pub struct TrainFilterArgs {
    /// Class directories as `open=DIR`, `partial=DIR`, `closed=DIR`;
    /// repeatable.
    #[arg(long = "class", required = true)]
    classes: Vec<String>,
    #[arg(long, value_enum, default_value = "dct")]
    domain: DomainArg,
    #[arg(long, default_value_t = 0.1)]
    a: f64,
    #[arg(long, default_value_t = 0.2)]
    b: f64,
    #[arg(long, default_value_t = 0.7)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Output stem; writes `<stem>.json` and `<stem>.bin`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct ClassifyArgs {
    /// Filter-bank stem or descriptor path.
    #[arg(long)]
    bank: PathBuf,
    /// A single PGM or a frame directory.
    #[arg(long)]
    input: PathBuf,
    /// CSV output for directory input (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct PerclosArgs {
    /// Frame directory (requires `--bank`) or ignored with `--labels`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    bank: Option<PathBuf>,
    /// Precomputed per-frame labels (CSV with a `state` column or one
    /// label per line).
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    fps: f64,
    /// Blink ceiling in seconds.
    #[arg(long, default_value_t = 0.4)]
    max_blink_s: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct DecorrelationArgs {
    #[arg(long, default_value_t = 0.99)]
    rho: f64,
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Write the |rho_v| matrices as CSV next to this stem.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    /// JSON array of segments, e.g.
    /// `[{"fixation":{"duration":0.3}},{"saccade":{"amplitude":30,"transition":0.05}}]`.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 500.0)]
    fs: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_var: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackerArg {
    Kf,
    Ekf,
}

#[derive(Args, Serialize)]
pub struct TrackArgs {
    /// Frame directory.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    fps: f64,
    #[arg(long, value_enum, default_value = "ekf")]
    tracker: TrackerArg,
    #[arg(long, default_value_t = 1e-4)]
    q_pos: f64,
    #[arg(long, default_value_t = 1e-2)]
    q_vel: f64,
    #[arg(long, default_value_t = 0.25)]
    r: f64,
    /// Restore the unity constant-acceleration input of the source model.
    #[arg(long)]
    paper_model: bool,
    #[arg(long, default_value_t = DEFAULT_VELOCITY_FLOOR)]
    v_floor: f64,
    /// Report the saccadic ratio in rad/s^2 instead of deg/s^2.
    #[arg(long)]
    radians: bool,
    #[command(flatten)]
    ocular: OcularArgs,
    /// Estimate CSV `(k,z,x_hat,v_hat)`.
    #[arg(long)]
    out: PathBuf,
    /// Saccadic-ratio summary JSON.
    #[arg(long)]
    sr_out: Option<PathBuf>,
}

/// What a successful command reports back.
pub struct CommandOutcome {
    /// A degeneracy flag with its reason, if one was raised.
    pub degenerate: Option<String>,
}

impl CommandOutcome {
    fn clean() -> Self {
        Self { degenerate: None }
    }

    fn flagged(reason: impl Into<String>) -> Self {
        Self { degenerate: Some(reason.into()) }
    }
}

pub fn run(cli: Cli) -> Result<CommandOutcome, CliError> {
    if cli.dump_config {
        let value = serde_json::to_value(&cli.command).map_err(input_err)?;
        println!("{}", serde_json::to_string_pretty(&value).map_err(input_err)?);
        return Ok(CommandOutcome::clean());
    }
    match cli.command {
        Command::Synth(args) => run_synth(args, cli.strict),
        Command::Ff(args) => run_ff(args),
        Command::Edges(args) => run_edges(args),
        Command::Bem(args) => run_bem(args),
        Command::NoiseEst(args) => run_noise_est(args),
        Command::Pupil(args) => run_pupil(args),
        Command::Corners(args) => run_corners(args),
        Command::TrainFilter(args) => run_train_filter(args),
        Command::Classify(args) => run_classify(args),
        Command::Perclos(args) => run_perclos(args),
        Command::Decorrelation(args) => run_decorrelation(args),
        Command::SimulateSaccade(args) => run_simulate(args, cli.strict),
        Command::TrackSaccade(args) => run_track(args),
    }
}

fn parse_boundary(text: &str) -> Result<StepBoundary, CliError> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| usage_err(format!("boundary {text:?}: expected KIND:ARGS")))?;
    let parse_usize =
        |s: &str| s.trim().parse::<usize>().map_err(|e| usage_err(format!("boundary: {e}")));
    match kind {
        "vertical" => Ok(StepBoundary::Vertical(parse_usize(rest)?)),
        "horizontal" => Ok(StepBoundary::Horizontal(parse_usize(rest)?)),
        "square" => {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 {
                return Err(usage_err("boundary square: expected X,Y,SIDE"));
            }
            Ok(StepBoundary::EmbeddedSquare {
                left: parse_usize(parts[0])?,
                top: parse_usize(parts[1])?,
                side: parse_usize(parts[2])?,
            })
        }
        other => Err(usage_err(format!("unknown boundary kind {other:?}"))),
    }
}

fn run_synth(args: SynthArgs, strict: bool) -> Result<CommandOutcome, CliError> {
    if args.noise_var > 0.0 && args.seed.is_none() && strict {
        return Err(usage_err("--strict requires an explicit --seed for noisy synthesis"));
    }
    let (mut img, sidecar) = match args.kind {
        SynthKind::Step => {
            let boundary = parse_boundary(&args.boundary)?;
            let img = synth_step_edge(args.width, args.height, args.low, args.high, boundary);
            let sidecar = json!({
                "kind": "step",
                "width": args.width,
                "height": args.height,
                "low": args.low,
                "high": args.high,
                "boundary": args.boundary,
            });
            (img, sidecar)
        }
        SynthKind::Grating => {
            let img = synth_grating(args.width, args.height, args.period, args.decay);
            let sidecar = json!({
                "kind": "grating",
                "width": args.width,
                "height": args.height,
                "period": args.period,
                "decay": args.decay,
            });
            (img, sidecar)
        }
        SynthKind::Eye => {
            let (img, truth) = synth_eye(
                args.width,
                args.height,
                (args.pupil_x, args.pupil_y),
                args.pupil_radius,
                args.iris_radius,
                args.lid_coverage,
            );
            let sidecar = serde_json::to_value(&truth).map_err(input_err)?;
            (img, json!({ "kind": "eye", "truth": sidecar }))
        }
    };
    if args.noise_var > 0.0 {
        let seed = args.seed.unwrap_or(0);
        img = add_noise(&img, &NoiseSpec::new(args.noise_var, seed));
    }
    save_pgm(&img, &args.out).map_err(input_err)?;
    let mut sidecar = sidecar;
    sidecar["noise_var"] = json!(args.noise_var);
    sidecar["seed"] = json!(args.seed);
    let sidecar_path = args.out.with_extension("pgm.json");
    write_json(sidecar_path, &sidecar)?;
    Ok(CommandOutcome::clean())
}

fn parse_center(text: &str) -> Result<(f64, f64), CliError> {
    let (x, y) =
        text.split_once(',').ok_or_else(|| usage_err(format!("center {text:?}: expected X,Y")))?;
    let parse =
        |s: &str| s.trim().parse::<f64>().map_err(|e| usage_err(format!("center: {e}")));
    Ok((parse(x)?, parse(y)?))
}

fn run_ff(args: FfArgs) -> Result<CommandOutcome, CliError> {
    let img = load_pgm(&args.input).map_err(input_err)?;
    let is_pgm = args.out.extension().is_some_and(|e| e == "pgm");
    match args.mode {
        FfMode::Horizontal | FfMode::Vertical | FfMode::Radial => {
            let profile = match args.mode {
                FfMode::Horizontal => horizontal_ff(&img),
                FfMode::Vertical => vertical_ff(&img),
                _ => {
                    let center = match &args.center {
                        Some(text) => parse_center(text)?,
                        None => ((img.width() - 1) as f64 / 2.0, (img.height() - 1) as f64 / 2.0),
                    };
                    let radii = args
                        .radii
                        .unwrap_or_else(|| (img.width().min(img.height()) / 2).max(2));
                    let polar =
                        to_polar(&img, center, radii, args.angles).map_err(input_err)?;
                    radial_ff(&polar)
                }
            };
            let mut csv = Csv::new("index,value");
            for (i, v) in profile.values.iter().enumerate() {
                csv.row(&[i.to_string(), fmt_f64(*v)]);
            }
            csv.write(&args.out)?;
        }
        FfMode::Local => {
            let map = local_ff(&img, args.window).map_err(input_err)?;
            if is_pgm {
                // Scale [1, window] onto [0, 255].
                let top = args.window as f64;
                let scaled = GrayImage::from_fn(map.width, map.height, |x, y| {
                    (map.get(x, y) - 1.0) / (top - 1.0) * 255.0
                });
                save_pgm(&scaled, &args.out).map_err(input_err)?;
            } else {
                let mut csv = Csv::new("x,y,value");
                for y in 0..map.height {
                    for x in 0..map.width {
                        csv.row(&[x.to_string(), y.to_string(), fmt_f64(map.get(x, y))]);
                    }
                }
                csv.write(&args.out)?;
            }
        }
    }
    Ok(CommandOutcome::clean())
}

fn run_edges(args: EdgesArgs) -> Result<CommandOutcome, CliError> {
    let img = load_pgm(&args.input).map_err(input_err)?;
    let stvr_source = if args.stvr == "auto" {
        StvrSource::Auto
    } else {
        let value: f64 =
            args.stvr.parse().map_err(|e| usage_err(format!("--stvr: {e}")))?;
        StvrSource::Explicit(value)
    };
    let params = EdgeParams {
        alpha_low: args.alpha_low,
        alpha_high: args.alpha_high,
        nms_window: args.nms,
        stvr_source,
        ..EdgeParams::default()
    };
    let map = detect_edges(&img, &params).map_err(input_err)?;
    save_pgm(&map.to_image(), &args.out).map_err(input_err)?;
    Ok(CommandOutcome::clean())
}

fn run_bem(args: BemArgs) -> Result<CommandOutcome, CliError> {
    let test = EdgeMap::from_image(&load_pgm(&args.test).map_err(input_err)?);
    let reference = EdgeMap::from_image(&load_pgm(&args.reference).map_err(input_err)?);
    let value = baddeley_metric(&test, &reference, args.p, args.cap).map_err(input_err)?;
    println!("{}", fmt_f64(value));
    Ok(CommandOutcome::clean())
}

fn run_noise_est(args: NoiseEstArgs) -> Result<CommandOutcome, CliError> {
    let img = load_pgm(&args.input).map_err(input_err)?;
    let cfg = EstimatorConfig {
        region_size: args.region_size,
        c_alpha: args.c_alpha,
        ..EstimatorConfig::default()
    };
    let est = estimate(&img, args.method.into(), &cfg).map_err(input_err)?;
    let snr = estimate_snr(&est);
    let stvr = estimate_stvr(&est);
    let record = json!({
        "method": est.method.to_string(),
        "sigma_s2": est.sigma_s2,
        "sigma_n2": est.sigma_n2,
        "sigma_g2": est.sigma_g2,
        "snr": if snr.value.is_finite() { json!(snr.value) } else { json!("inf") },
        "stvr": stvr.value,
    });
    println!("{}", serde_json::to_string(&record).map_err(input_err)?);
    if est.floored {
        return Ok(CommandOutcome::flagged("estimate floored into physical range"));
    }
    Ok(CommandOutcome::clean())
}

fn frame_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run_pupil(args: PupilArgs) -> Result<CommandOutcome, CliError> {
    let params = args.ocular.to_params();
    if args.input.is_dir() {
        let frames = load_frame_dir(&args.input).map_err(input_err)?;
        let mut csv = Csv::new("frame,x,y,angle");
        for (path, img) in &frames {
            let center = pupil_center(img, &params).ok();
            let angle = center.as_ref().and_then(|c| {
                let corners = eye_corners(img, &params).ok()?;
                relative_position(c, &corners, params.half_view_angle).ok().map(|r| r.angle_deg)
            });
            csv.row(&[
                frame_stem(path),
                center.map_or(String::new(), |c| fmt_f64(c.x)),
                center.map_or(String::new(), |c| fmt_f64(c.y)),
                angle.map_or(String::new(), fmt_f64),
            ]);
        }
        match &args.out {
            Some(path) => csv.write(path)?,
            None => print!("{}", csv.into_string()),
        }
        return Ok(CommandOutcome::clean());
    }
    let img = load_pgm(&args.input).map_err(input_err)?;
    let center = pupil_center(&img, &params).map_err(input_err)?;
    let mut record = json!({ "x": center.x, "y": center.y });
    if args.diameter {
        let geom = pupil_diameter(&img, &center, &params).map_err(input_err)?;
        record["diameter"] = json!(geom.diameter);
    }
    println!("{}", serde_json::to_string(&record).map_err(input_err)?);
    Ok(CommandOutcome::clean())
}

fn run_corners(args: CornersArgs) -> Result<CommandOutcome, CliError> {
    let img = load_pgm(&args.input).map_err(input_err)?;
    let corners = eye_corners(&img, &args.ocular.to_params()).map_err(input_err)?;
    let record = json!({
        "left": [corners.left.0, corners.left.1],
        "right": [corners.right.0, corners.right.1],
    });
    println!("{}", serde_json::to_string(&record).map_err(input_err)?);
    Ok(CommandOutcome::clean())
}

fn parse_class_spec(text: &str) -> Result<(EyeState, PathBuf), CliError> {
    let (name, dir) = text
        .split_once('=')
        .ok_or_else(|| usage_err(format!("--class {text:?}: expected NAME=DIR")))?;
    let state: EyeState = name.parse().map_err(usage_err)?;
    Ok((state, PathBuf::from(dir)))
}

fn load_class_images(dir: &Path) -> Result<Vec<GrayImage>, CliError> {
    let frames = load_frame_dir(dir).map_err(input_err)?;
    if frames.is_empty() {
        return Err(input_err(format!("no PGM images in {}", dir.display())));
    }
    Ok(frames.into_iter().map(|(_, img)| img).collect())
}

fn run_train_filter(args: TrainFilterArgs) -> Result<CommandOutcome, CliError> {
    let mut train = Vec::new();
    for spec in &args.classes {
        let (state, dir) = parse_class_spec(spec)?;
        train.push((state, load_class_images(&dir)?));
    }
    let params = OtMachParams { a: args.a, b: args.b, c: args.c, sigma2: args.sigma2 };
    let bank = synthesize_otmach(&train, &params, args.domain.into()).map_err(input_err)?;
    bank_io::save_bank(&bank, &args.out).map_err(input_err)?;
    if bank.regularized {
        return Ok(CommandOutcome::flagged("filter denominator epsilon-floored at some bins"));
    }
    Ok(CommandOutcome::clean())
}

fn run_classify(args: ClassifyArgs) -> Result<CommandOutcome, CliError> {
    let bank = bank_io::load_bank(&args.bank).map_err(input_err)?;
    let mut fallback = false;
    if args.input.is_dir() {
        let frames = load_frame_dir(&args.input).map_err(input_err)?;
        let mut csv = Csv::new("frame,state");
        for (path, img) in &frames {
            let result = classify(img, &bank).map_err(input_err)?;
            fallback |= result.vote == VoteOutcome::PsrFallback;
            csv.row(&[frame_stem(path), result.state.to_string()]);
        }
        match &args.out {
            Some(path) => csv.write(path)?,
            None => print!("{}", csv.into_string()),
        }
    } else {
        let img = load_pgm(&args.input).map_err(input_err)?;
        let result = classify(&img, &bank).map_err(input_err)?;
        fallback = result.vote == VoteOutcome::PsrFallback;
        let scores: Vec<serde_json::Value> = result
            .scores
            .iter()
            .map(|s| {
                json!({
                    "class": s.label.to_string(),
                    "psr": s.psr,
                    "mi": s.mi,
                    "fr": s.fr,
                })
            })
            .collect();
        let record = json!({
            "state": result.state.to_string(),
            "vote": serde_json::to_value(result.vote).map_err(input_err)?,
            "scores": scores,
        });
        println!("{}", serde_json::to_string(&record).map_err(input_err)?);
    }
    if fallback {
        return Ok(CommandOutcome::flagged("three-way vote split fell back to PSR"));
    }
    Ok(CommandOutcome::clean())
}

fn parse_labels(path: &Path) -> Result<Vec<EyeState>, CliError> {
    let text = std::fs::read_to_string(path).map_err(input_err)?;
    let mut states = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next_back().unwrap_or("").trim();
        if field.is_empty() || (i == 0 && field == "state") {
            continue;
        }
        states.push(field.parse().map_err(input_err)?);
    }
    Ok(states)
}

fn run_perclos(args: PerclosArgs) -> Result<CommandOutcome, CliError> {
    let states: Vec<EyeState> = if let Some(labels) = &args.labels {
        parse_labels(labels)?
    } else {
        let input = args
            .input
            .as_ref()
            .ok_or_else(|| usage_err("perclos needs --input with --bank, or --labels"))?;
        let bank_path = args
            .bank
            .as_ref()
            .ok_or_else(|| usage_err("classifying frames requires --bank"))?;
        let bank = bank_io::load_bank(bank_path).map_err(input_err)?;
        let frames = load_frame_dir(input).map_err(input_err)?;
        frames
            .iter()
            .map(|(_, img)| classify(img, &bank).map(|c| c.state))
            .collect::<Result<_, _>>()
            .map_err(input_err)?
    };
    let max_blink = (args.max_blink_s * args.fps).round() as usize;
    let flagged = blink_filter(&states, args.fps, Some(max_blink)).map_err(input_err)?;
    let series = perclos_p3(&flagged, args.fps).map_err(input_err)?;
    let mut csv = Csv::new("minute,p3");
    for (i, value) in series.iter().enumerate() {
        csv.row(&[(i + 3).to_string(), fmt_f64(*value)]);
    }
    match &args.out {
        Some(path) => csv.write(path)?,
        None => print!("{}", csv.into_string()),
    }
    Ok(CommandOutcome::clean())
}

fn run_decorrelation(args: DecorrelationArgs) -> Result<CommandOutcome, CliError> {
    let dct = markov1_decorrelation(args.rho, args.n, TransformDomain::Dct).map_err(input_err)?;
    let dft = markov1_decorrelation(args.rho, args.n, TransformDomain::Dft).map_err(input_err)?;
    let m_dct = mean_off_diagonal(&dct);
    let m_dft = mean_off_diagonal(&dft);
    println!("dct_mean_off_diagonal,{}", fmt_f64(m_dct));
    println!("dft_mean_off_diagonal,{}", fmt_f64(m_dft));
    println!("dct_to_dft_ratio,{}", fmt_f64(m_dct / m_dft));
    if let Some(stem) = &args.out {
        for (name, matrix) in [("dct", &dct), ("dft", &dft)] {
            let mut csv = Csv::new("i,j,value");
            for i in 0..args.n {
                for j in 0..args.n {
                    csv.row(&[i.to_string(), j.to_string(), fmt_f64(matrix[(i, j)])]);
                }
            }
            csv.write(stem.with_extension(format!("{name}.csv")))?;
        }
    }
    Ok(CommandOutcome::clean())
}

fn run_simulate(args: SimulateArgs, strict: bool) -> Result<CommandOutcome, CliError> {
    if args.noise_var > 0.0 && args.seed.is_none() && strict {
        return Err(usage_err("--strict requires an explicit --seed for noisy simulation"));
    }
    let text = std::fs::read_to_string(&args.spec).map_err(input_err)?;
    let segments: Vec<Segment> = serde_json::from_str(&text).map_err(input_err)?;
    let noise = NoiseSpec::new(args.noise_var, args.seed.unwrap_or(0));
    let trace = simulate_eye_motion(&segments, args.fs, &noise).map_err(input_err)?;
    let mut csv = Csv::new("k,t,position");
    for (k, p) in trace.samples.iter().enumerate() {
        csv.row(&[k.to_string(), fmt_f64(k as f64 * trace.dt), fmt_f64(*p)]);
    }
    csv.write(&args.out)?;
    Ok(CommandOutcome::clean())
}

fn run_track(args: TrackArgs) -> Result<CommandOutcome, CliError> {
    let frames = load_frame_dir(&args.input).map_err(input_err)?;
    if frames.is_empty() {
        return Err(input_err(format!("no PGM frames in {}", args.input.display())));
    }
    let images: Vec<GrayImage> = frames.iter().map(|(_, img)| img.clone()).collect();
    let config = TrackerConfig {
        kind: match args.tracker {
            TrackerArg::Kf => TrackerKind::Kf,
            TrackerArg::Ekf => TrackerKind::Ekf,
        },
        q_pos: args.q_pos,
        q_vel: args.q_vel,
        r: args.r,
        u: if args.paper_model { 1.0 } else { 0.0 },
        v_floor: args.v_floor,
        measurement_seeded: true,
    };
    let params = args.ocular.to_params();
    let result = track_frames(&images, &params, &config, args.fps);

    let mut csv = Csv::new("k,z,x_hat,v_hat");
    for (k, (meas, est)) in result.measurements.iter().zip(result.estimates.iter()).enumerate() {
        csv.row(&[
            k.to_string(),
            meas.map_or(String::new(), fmt_f64),
            fmt_f64(est.0),
            fmt_f64(est.1),
        ]);
    }
    csv.write(&args.out)?;

    if let Some(sr_path) = &args.sr_out {
        let unit_scale = if args.radians { std::f64::consts::PI / 180.0 } else { 1.0 };
        let events: Vec<serde_json::Value> = result
            .events
            .iter()
            .map(|e| {
                json!({
                    "onset": e.onset_index,
                    "end": e.end_index,
                    "peak_velocity": e.peak_velocity,
                    "duration": e.duration,
                })
            })
            .collect();
        let summary = json!({
            "events": events,
            "skipped_frames": result.skipped,
            "unit": if args.radians { "rad/s^2" } else { "deg/s^2" },
            "sr_mean": result.ratio.as_ref().map(|r| r.mean * unit_scale),
            "sr_std_dev": result.ratio.as_ref().map(|r| r.std_dev * unit_scale),
        });
        write_json(sr_path, &summary)?;
    }
    Ok(CommandOutcome::clean())
}
