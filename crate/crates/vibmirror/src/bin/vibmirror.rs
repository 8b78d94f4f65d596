//! Command-line front end. Every subcommand resolves a layered run
//! configuration (defaults < preset < config file < flags), computes its
//! quantity, prints a short summary, and writes artifacts with fixed
//! six-digit formatting so identical inputs reproduce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vibmirror::config::{self, ConfigDraft, RunConfig};
use vibmirror::diffraction::{
    carrier_null_depth, hard_mirror_weights, sideband_weights, weight_sweep, DiffractionInput,
    SidebandSpectrum,
};
use vibmirror::error::{Error, Result};
use vibmirror::imaging::{
    apply_shot_noise, pgm, recover_weights, sample_ensemble, synthesize_image, RingExtraction,
};
use vibmirror::kinematics::{detection_positions, impact_state};
use vibmirror::oracle::{run_oracle, OracleReport};
use vibmirror::output::{markdown_table, sig6, write_atomic, CsvTable};

/// Print to stdout, quietly stopping when the pipe closes (e.g. under
/// `vibmirror constants | head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

const CONFIG_KEYS: &str = "\
CONFIG FILE KEYS (flat INI-style text; '#' or ';' start comments; the last
occurrence of a key wins; unknown sections or keys are rejected):

[constants]
  atom_mass_kg        float   atom mass, kg                  (1.44316e-25)
  hbar_js             float   reduced Planck constant, J s   (1.054571817e-34)
  g_mps2              float   gravitational acceleration     (9.81)
  d2_wavelength_m     float   recoil reference wavelength, m (780.24e-9)

[experiment]
  drop_height_m             float  release height above the mirror, m
  fall_time_s               float  release-to-bounce time, s
  bounce_time_s             float  bounce-to-detection time, s
  horizontal_velocity_mps   float  transverse drift speed, m/s
  base_power_w              float  mean mirror beam power, W
  power_swing_w             float  power modulation amplitude, W
  base_detuning_hz          float  mean detuning, Hz
  detuning_swing_hz         float  detuning modulation amplitude, Hz
  mod_frequency_hz          float  drive frequency (cycles), Hz
  kappa_per_m               float  evanescent decay constant, 1/m
  u0_over_e                 float  barrier height over incident energy (4.0)

[oracle]
  n_orders            int     orders -n..=n to report, 1..=6  (3)
  sigma_z             float   packet width, decay lengths     (3/Q)
  grid_points         int     grid override, power of two     (auto)
  dt_safety           float   fraction of the stable step     (0.45)
  check_convergence   bool    rerun at half step and compare  (true)

[imaging]
  sigma_v_recoils     float   velocity spread, recoil units   (6.6)
  atoms               int     ensemble size                   (100000)
  seed                int     base random seed                (1)
  pixel_pitch_m       float   square pixel side, m            (2.75e-5)
  camera_width_m      float   field of view along x, m        (5.5e-3)
  camera_height_m     float   field of view along z, m        (4.4e-3)
  n_orders            int     extraction order span, 1..=8    (3)
  shot_noise          bool    Poisson noise on the image      (false)

Precedence: built-in defaults (preset a) < --preset < --config < flags.";

#[derive(Parser)]
#[command(
    name = "vibmirror",
    version,
    about = "Simulator and analysis toolkit for matter waves bouncing on a vibrating mirror",
    after_long_help = CONFIG_KEYS
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Config file (see --help for the key listing)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in parameter set
    #[arg(long, global = true, value_parser = ["a", "b", "c"])]
    preset: Option<String>,
    /// Random seed for sampling commands
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Directory artifacts are written into
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,
}

/// Numeric overrides shared by the physics subcommands; each maps onto the
/// config key of the same name.
#[derive(Args, Default, Clone, Copy)]
struct ExperimentOverrides {
    /// Release height above the mirror, m
    #[arg(long, value_name = "M")]
    drop_height_m: Option<f64>,
    /// Release-to-bounce time, s
    #[arg(long, value_name = "S")]
    fall_time_s: Option<f64>,
    /// Bounce-to-detection time, s
    #[arg(long, value_name = "S")]
    bounce_time_s: Option<f64>,
    /// Transverse drift speed, m/s
    #[arg(long, value_name = "MPS")]
    horizontal_velocity_mps: Option<f64>,
    /// Mean mirror beam power, W
    #[arg(long, value_name = "W")]
    base_power_w: Option<f64>,
    /// Power modulation amplitude, W
    #[arg(long, value_name = "W")]
    power_swing_w: Option<f64>,
    /// Mean detuning, Hz
    #[arg(long, value_name = "HZ")]
    base_detuning_hz: Option<f64>,
    /// Detuning modulation amplitude, Hz
    #[arg(long, value_name = "HZ")]
    detuning_swing_hz: Option<f64>,
    /// Drive frequency (cycles), Hz
    #[arg(long, value_name = "HZ")]
    mod_frequency_hz: Option<f64>,
    /// Evanescent decay constant, 1/m
    #[arg(long, value_name = "PER_M")]
    kappa_per_m: Option<f64>,
    /// Barrier height over the incident kinetic energy
    #[arg(long, value_name = "RATIO")]
    u0_over_e: Option<f64>,
}

impl ExperimentOverrides {
    fn draft(&self) -> ConfigDraft {
        ConfigDraft {
            drop_height: self.drop_height_m,
            fall_time: self.fall_time_s,
            bounce_time: self.bounce_time_s,
            horizontal_velocity: self.horizontal_velocity_mps,
            base_power: self.base_power_w,
            power_swing: self.power_swing_w,
            base_detuning: self.base_detuning_hz,
            detuning_swing: self.detuning_swing_hz,
            mod_frequency: self.mod_frequency_hz,
            kappa: self.kappa_per_m,
            u0_over_e: self.u0_over_e,
            ..ConfigDraft::default()
        }
    }
}

#[derive(Args, Default, Clone, Copy)]
struct OracleOverrides {
    /// Orders -n..=n to report
    #[arg(long, value_name = "N")]
    orders: Option<u32>,
    /// Packet width in decay lengths
    #[arg(long, value_name = "SIGMA")]
    sigma_z: Option<f64>,
    /// Grid size override (power of two)
    #[arg(long, value_name = "N")]
    grid_points: Option<usize>,
    /// Fraction of the stability-limited time step
    #[arg(long, value_name = "F")]
    dt_safety: Option<f64>,
    /// Skip the halved-step convergence rerun
    #[arg(long)]
    no_convergence_check: bool,
    /// Incident wavenumber over the decay constant (bypasses the experiment mapping)
    #[arg(long, value_name = "K")]
    k_over_kappa: Option<f64>,
    /// Drive-speed ratio Q (bypasses the experiment mapping)
    #[arg(long, value_name = "Q")]
    q_ratio: Option<f64>,
    /// Drive depth (bypasses the experiment mapping)
    #[arg(long, value_name = "EPS")]
    epsilon: Option<f64>,
}

#[derive(Args, Default, Clone, Copy)]
struct ImagingOverrides {
    /// Velocity spread in recoil units
    #[arg(long, value_name = "R")]
    sigma_v_recoils: Option<f64>,
    /// Ensemble size
    #[arg(long, value_name = "N")]
    atoms: Option<usize>,
    /// Square pixel side, m
    #[arg(long, value_name = "M")]
    pixel_pitch_m: Option<f64>,
    /// Field of view along x, m
    #[arg(long, value_name = "M")]
    camera_width_m: Option<f64>,
    /// Field of view along z, m
    #[arg(long, value_name = "M")]
    camera_height_m: Option<f64>,
    /// Apply Poisson noise to the synthetic image
    #[arg(long)]
    shot_noise: bool,
}

impl ImagingOverrides {
    fn draft(&self) -> ConfigDraft {
        ConfigDraft {
            sigma_v_recoils: self.sigma_v_recoils,
            atoms: self.atoms,
            pixel_pitch: self.pixel_pitch_m,
            camera_width: self.camera_width_m,
            camera_height: self.camera_height_m,
            shot_noise: self.shot_noise.then_some(true),
            ..ConfigDraft::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Echo the constants table and the derived bounce quantities
    Constants {
        #[command(flatten)]
        exp: ExperimentOverrides,
    },
    /// Sideband weights of the configured drive
    Weights {
        #[command(flatten)]
        exp: ExperimentOverrides,
        /// Use the hard-mirror (softness 1) limit
        #[arg(long)]
        hard_mirror: bool,
    },
    /// Detection-plane positions of the diffraction orders
    Positions {
        #[command(flatten)]
        exp: ExperimentOverrides,
        /// Orders -n..=n to tabulate
        #[arg(long, value_name = "N", default_value_t = 3)]
        orders: u32,
    },
    /// Sweep the drive depth and tabulate the order weights
    Sweep {
        #[command(flatten)]
        exp: ExperimentOverrides,
        /// Largest drive depth in the sweep
        #[arg(long, value_name = "EPS", default_value_t = 0.30)]
        eps_max: f64,
        /// Depth increment between rows
        #[arg(long, value_name = "EPS", default_value_t = 0.002)]
        eps_step: f64,
    },
    /// Integrate the bounce from first principles and compare with the model
    Oracle {
        #[command(flatten)]
        exp: ExperimentOverrides,
        #[command(flatten)]
        oracle: OracleOverrides,
    },
    /// Synthesize a detection image of the bounced ensemble
    Image {
        #[command(flatten)]
        exp: ExperimentOverrides,
        #[command(flatten)]
        imaging: ImagingOverrides,
        /// Write ASCII (P2) instead of binary (P5) PGM
        #[arg(long)]
        ascii: bool,
    },
    /// Recover order weights from an image and its JSON sidecar
    Extract {
        /// PGM image to analyse (default: <out>/image.pgm)
        #[arg(long, value_name = "PATH")]
        image: Option<PathBuf>,
        /// JSON sidecar (default: the image path with extension .json)
        #[arg(long, value_name = "PATH")]
        sidecar: Option<PathBuf>,
        /// Orders -n..=n to recover
        #[arg(long, value_name = "N")]
        orders: Option<u32>,
    },
    /// One document with parameters, positions, weights, sweep, and the
    /// first-principles comparison
    Report {
        #[command(flatten)]
        exp: ExperimentOverrides,
        #[command(flatten)]
        oracle: OracleOverrides,
        /// Leave out the first-principles section (much faster)
        #[arg(long)]
        skip_oracle: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(u8::try_from(error.exit_code()).unwrap_or(1))
        }
    }
}

/// Layers preset, config file, and flag overrides, then validates.
fn resolve(global: &Global, extra: ConfigDraft) -> Result<RunConfig> {
    let mut draft = ConfigDraft::default();
    if let Some(tag) = &global.preset {
        draft = ConfigDraft::overlay(draft, config::preset(tag)?);
    }
    if let Some(path) = &global.config {
        let text = fs::read_to_string(path).map_err(|error| {
            Error::config(format!(
                "cannot read config file {}: {error}",
                path.display()
            ))
        })?;
        draft = ConfigDraft::overlay(draft, config::parse(&text)?);
    }
    draft = ConfigDraft::overlay(draft, extra);
    if let Some(seed) = global.seed {
        draft.seed = Some(seed);
    }
    draft.build()
}

fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    write_atomic(&path, bytes)?;
    say!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Constants { exp } => cmd_constants(cli, exp),
        Command::Weights { exp, hard_mirror } => cmd_weights(cli, exp, *hard_mirror),
        Command::Positions { exp, orders } => cmd_positions(cli, exp, *orders),
        Command::Sweep {
            exp,
            eps_max,
            eps_step,
        } => cmd_sweep(cli, exp, *eps_max, *eps_step),
        Command::Oracle { exp, oracle } => cmd_oracle(cli, exp, oracle),
        Command::Image {
            exp,
            imaging,
            ascii,
        } => cmd_image(cli, exp, imaging, *ascii),
        Command::Extract {
            image,
            sidecar,
            orders,
        } => cmd_extract(cli, image.as_deref(), sidecar.as_deref(), *orders),
        Command::Report {
            exp,
            oracle,
            skip_oracle,
        } => cmd_report(cli, exp, oracle, *skip_oracle),
    }
}

/// Rows of (quantity, value, unit) describing a resolved configuration.
fn constants_rows(config: &RunConfig) -> Result<Vec<[String; 3]>> {
    let c = &config.constants;
    let e = &config.experiment;
    let impact = impact_state(e.drop_height, c)?;
    let input = DiffractionInput::from_experiment(e, c)?;
    let spectrum = sideband_weights(&input, None)?;
    let rows = vec![
        ["atom_mass".into(), sig6(c.atom_mass), "kg".into()],
        ["hbar".into(), sig6(c.hbar), "J s".into()],
        ["g".into(), sig6(c.g), "m/s^2".into()],
        ["d2_wavelength".into(), sig6(c.d2_wavelength), "m".into()],
        [
            "recoil_velocity".into(),
            sig6(c.recoil_velocity()),
            "m/s".into(),
        ],
        ["drop_height".into(), sig6(e.drop_height), "m".into()],
        ["fall_time".into(), sig6(e.fall_time), "s".into()],
        ["bounce_time".into(), sig6(e.bounce_time), "s".into()],
        [
            "horizontal_velocity".into(),
            sig6(e.horizontal_velocity),
            "m/s".into(),
        ],
        [
            "mod_frequency".into(),
            sig6(e.modulation.mod_frequency),
            "Hz".into(),
        ],
        ["kappa".into(), sig6(e.mirror.kappa), "1/m".into()],
        [
            "decay_length".into(),
            sig6(1.0 / e.mirror.kappa),
            "m".into(),
        ],
        [
            "barrier_height".into(),
            sig6(e.mirror.barrier_height),
            "J".into(),
        ],
        ["drive_depth".into(), sig6(e.mirror.mod_depth), "1".into()],
        [
            "mirror_amplitude".into(),
            sig6(e.mirror.vib_amplitude),
            "m".into(),
        ],
        ["impact_speed".into(), sig6(impact.speed), "m/s".into()],
        [
            "impact_wavenumber".into(),
            sig6(impact.wavenumber),
            "1/m".into(),
        ],
        [
            "de_broglie_wavelength".into(),
            sig6(impact.de_broglie_wavelength),
            "m".into(),
        ],
        [
            "kinetic_energy".into(),
            sig6(impact.kinetic_energy),
            "J".into(),
        ],
        ["q_ratio".into(), sig6(spectrum.q), "1".into()],
        ["softness".into(), sig6(spectrum.beta), "1".into()],
        [
            "modulation_index".into(),
            sig6(spectrum.modulation_index),
            "1".into(),
        ],
    ];
    Ok(rows)
}

fn cmd_constants(cli: &Cli, exp: &ExperimentOverrides) -> Result<()> {
    let config = resolve(&cli.global, exp.draft())?;
    let rows = constants_rows(&config)?;
    let mut table = CsvTable::new(["quantity", "value", "unit"]);
    for row in &rows {
        table.push_row(row.iter().cloned());
        say!("{:<22} {:>14}  {}", row[0], row[1], row[2]);
    }
    write_artifact(&cli.global.out, "constants.csv", table.render().as_bytes())
}

fn spectrum_csv(spectrum: &SidebandSpectrum) -> String {
    let mut table = CsvTable::new(["order", "weight [1]"]);
    for &(order, weight) in &spectrum.orders {
        table.push_row([order.to_string(), sig6(weight)]);
    }
    table.render()
}

fn cmd_weights(cli: &Cli, exp: &ExperimentOverrides, hard_mirror: bool) -> Result<()> {
    let config = resolve(&cli.global, exp.draft())?;
    let input = DiffractionInput::from_experiment(&config.experiment, &config.constants)?;
    let spectrum = if hard_mirror {
        hard_mirror_weights(input.wavenumber, input.mirror_amplitude, None)?
    } else {
        sideband_weights(&input, None)?
    };
    say!(
        "drive depth {}, modulation index {}, softness {} at Q = {}",
        sig6(config.experiment.mirror.mod_depth),
        sig6(spectrum.modulation_index),
        sig6(spectrum.beta),
        sig6(spectrum.q),
    );
    let mut hidden = 0usize;
    for &(order, weight) in &spectrum.orders {
        if weight >= 1e-9 {
            say!("order {order:>3}: {}", sig6(weight));
        } else {
            hidden += 1;
        }
    }
    if hidden > 0 {
        say!("({hidden} orders below 1e-9 omitted here; the CSV has all of them)");
    }
    say!("total {}", sig6(spectrum.total()));
    write_artifact(
        &cli.global.out,
        "weights.csv",
        spectrum_csv(&spectrum).as_bytes(),
    )
}

fn positions_rows(
    config: &RunConfig,
    orders: u32,
    reference: Option<&[(i32, f64)]>,
) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let rows = detection_positions(&config.experiment, &config.constants, orders)?;
    let mut headers = vec![
        "order".to_string(),
        "v_n [m/s]".to_string(),
        "k_n [1/m]".to_string(),
        "rel_position [um]".to_string(),
    ];
    if reference.is_some() {
        headers.push("reference [um]".to_string());
    }
    let body = rows
        .iter()
        .map(|row| {
            let mut cells = vec![
                row.order.to_string(),
                sig6(row.velocity),
                sig6(row.wavenumber),
                sig6(row.rel_position * 1e6),
            ];
            if let Some(reference) = reference {
                let cell = reference
                    .iter()
                    .find(|(n, _)| *n == row.order)
                    .map(|&(_, um)| sig6(um))
                    .unwrap_or_default();
                cells.push(cell);
            }
            cells
        })
        .collect();
    Ok((headers, body))
}

fn cmd_positions(cli: &Cli, exp: &ExperimentOverrides, orders: u32) -> Result<()> {
    let config = resolve(&cli.global, exp.draft())?;
    let reference = match &cli.global.preset {
        Some(tag) => Some(config::reference_offsets_um(tag)?),
        None => None,
    };
    let (headers, body) = positions_rows(&config, orders, reference.as_deref())?;
    let mut table = CsvTable::new(headers.iter().cloned());
    for row in &body {
        table.push_row(row.iter().cloned());
        say!("{}", row.join("  "));
    }
    write_artifact(&cli.global.out, "positions.csv", table.render().as_bytes())
}

fn sweep_rows(config: &RunConfig, eps_max: f64, eps_step: f64) -> Result<Vec<Vec<String>>> {
    if !(eps_step > 0.0 && eps_step.is_finite()) {
        return Err(Error::config(format!(
            "sweep step must be positive, got {eps_step}"
        )));
    }
    let steps = (eps_max / eps_step).round() as usize;
    if steps == 0 {
        return Err(Error::config(format!(
            "sweep range {eps_max} is smaller than one step {eps_step}"
        )));
    }
    let input = DiffractionInput::from_experiment(&config.experiment, &config.constants)?;
    let rows = weight_sweep(&input, eps_max, steps)?;
    Ok(rows
        .iter()
        .map(|row| {
            let mut cells = vec![sig6(row.depth), sig6(row.modulation_index)];
            cells.extend(row.weights.iter().map(|&w| sig6(w)));
            cells
        })
        .collect())
}

const SWEEP_HEADERS: [&str; 9] = [
    "eps [1]",
    "mod_index [1]",
    "p0 [1]",
    "p1 [1]",
    "p2 [1]",
    "p3 [1]",
    "p4 [1]",
    "p5 [1]",
    "p6 [1]",
];

fn cmd_sweep(cli: &Cli, exp: &ExperimentOverrides, eps_max: f64, eps_step: f64) -> Result<()> {
    let config = resolve(&cli.global, exp.draft())?;
    let rows = sweep_rows(&config, eps_max, eps_step)?;
    let input = DiffractionInput::from_experiment(&config.experiment, &config.constants)?;
    let null_depth = carrier_null_depth(&input)?;
    let mut table = CsvTable::new(SWEEP_HEADERS);
    for row in &rows {
        table.push_row(row.iter().cloned());
    }
    say!(
        "{} rows to depth {}; carrier null at depth {}",
        rows.len(),
        sig6(eps_max),
        sig6(null_depth),
    );
    write_artifact(&cli.global.out, "sweep.csv", table.render().as_bytes())
}

fn resolved_oracle(
    config: &RunConfig,
    over: &OracleOverrides,
) -> Result<vibmirror::oracle::OracleConfig> {
    let mut oracle = config.oracle_config()?;
    if let Some(k) = over.k_over_kappa {
        oracle.k_over_kappa = k;
    }
    if let Some(q) = over.q_ratio {
        oracle.q = q;
    }
    if let Some(eps) = over.epsilon {
        oracle.epsilon = eps;
    }
    if let Some(n) = over.orders {
        oracle.n_orders = n;
    }
    if let Some(sigma) = over.sigma_z {
        oracle.sigma_z = Some(sigma);
    }
    if let Some(points) = over.grid_points {
        oracle.grid_points = Some(points);
    }
    if let Some(dt) = over.dt_safety {
        oracle.dt_safety = dt;
    }
    if over.no_convergence_check {
        oracle.check_convergence = false;
    }
    oracle.validate()?;
    Ok(oracle)
}

fn print_oracle_summary(report: &OracleReport) {
    say!(
        "k/kappa {}, Q {}, depth {}, barrier/energy {}",
        sig6(report.config.k_over_kappa),
        sig6(report.config.q),
        sig6(report.config.epsilon),
        sig6(report.config.u0_over_e),
    );
    for comparison in &report.comparisons {
        let deviation = comparison
            .rel_deviation
            .map(|d| format!(" ({} rel)", sig6(d)))
            .unwrap_or_default();
        say!(
            "order {:>3}: model {} vs integrated {}{}",
            comparison.order,
            sig6(comparison.model_weight),
            sig6(comparison.oracle_weight),
            deviation,
        );
    }
    match report.converged {
        Some(true) => say!("convergence check: agreed at half step"),
        Some(false) => say!("convergence check: FAILED to agree at half step"),
        None => say!("convergence check: skipped"),
    }
    say!(
        "reflected fraction {}, norm drift {}",
        sig6(report.reflected_fraction),
        sig6(report.max_norm_drift),
    );
}

fn cmd_oracle(cli: &Cli, exp: &ExperimentOverrides, over: &OracleOverrides) -> Result<()> {
    let config = resolve(&cli.global, exp.draft())?;
    let oracle = resolved_oracle(&config, over)?;
    let report = run_oracle(&oracle)?;
    print_oracle_summary(&report);
    let json = serde_json::to_string_pretty(&report)
        .map_err(|error| Error::contract(format!("report serialization: {error}")))?;
    write_artifact(&cli.global.out, "oracle.json", json.as_bytes())
}

fn cmd_image(
    cli: &Cli,
    exp: &ExperimentOverrides,
    imaging: &ImagingOverrides,
    ascii: bool,
) -> Result<()> {
    let config = resolve(
        &cli.global,
        ConfigDraft::overlay(exp.draft(), imaging.draft()),
    )?;
    let input = DiffractionInput::from_experiment(&config.experiment, &config.constants)?;
    let spectrum = sideband_weights(&input, None)?;
    let flight = config.flight();
    let settings = &config.imaging;
    let ensemble = sample_ensemble(
        &spectrum,
        &flight,
        &config.constants,
        settings.sigma_v,
        settings.atoms,
        settings.seed,
    )?;
    let mut image = synthesize_image(&ensemble, &flight, &config.constants, &settings.camera)?;
    if settings.shot_noise {
        apply_shot_noise(&mut image, settings.seed)?;
    }
    let (raster, atoms_per_gray) = pgm::quantize(&image);
    let format = if ascii {
        pgm::PgmFormat::Ascii
    } else {
        pgm::PgmFormat::Binary
    };
    let bytes = pgm::encode(&raster, format)?;
    let sidecar = pgm::ImageSidecar {
        geometry: settings.camera,
        flight,
        constants: config.constants.clone(),
        sigma_v: settings.sigma_v,
        seed: settings.seed,
        atom_count: image.atom_count,
        in_field: image.in_field,
        out_of_field: image.out_of_field,
        atoms_per_gray,
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|error| Error::contract(format!("sidecar serialization: {error}")))?;
    say!(
        "{} atoms sampled (seed {}), {} in field, {} out of field, redraw fraction {}",
        image.atom_count,
        settings.seed,
        image.in_field,
        image.out_of_field,
        sig6(ensemble.redraw_fraction),
    );
    write_artifact(&cli.global.out, "image.pgm", &bytes)?;
    write_artifact(&cli.global.out, "image.json", json.as_bytes())
}

fn extraction_csv(extraction: &RingExtraction) -> String {
    let mut table = CsvTable::new([
        "order",
        "weight [1]",
        "raw_fraction [1]",
        "ring_radius [m]",
        "measured_radius [m]",
        "centroid_z [m]",
    ]);
    let lookup = |pairs: &[(i32, f64)], order: i32| {
        pairs
            .iter()
            .find(|(n, _)| *n == order)
            .map(|&(_, v)| sig6(v))
            .unwrap_or_default()
    };
    for &(order, weight) in &extraction.spectrum.orders {
        let centroid = extraction
            .centroids
            .iter()
            .find(|(n, _)| *n == order)
            .and_then(|&(_, z)| z.map(sig6))
            .unwrap_or_default();
        table.push_row([
            order.to_string(),
            sig6(weight),
            lookup(&extraction.raw, order),
            lookup(&extraction.radii, order),
            lookup(&extraction.measured_radii, order),
            centroid,
        ]);
    }
    table.render()
}

fn cmd_extract(
    cli: &Cli,
    image: Option<&Path>,
    sidecar: Option<&Path>,
    orders: Option<u32>,
) -> Result<()> {
    let config = resolve(&cli.global, ConfigDraft::default())?;
    let image_path = image
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cli.global.out.join("image.pgm"));
    let sidecar_path = sidecar
        .map(Path::to_path_buf)
        .unwrap_or_else(|| image_path.with_extension("json"));
    let raster = pgm::decode(&fs::read(&image_path).map_err(|error| {
        Error::config(format!(
            "cannot read image {}: {error}",
            image_path.display()
        ))
    })?)?;
    let sidecar_text = fs::read_to_string(&sidecar_path).map_err(|error| {
        Error::config(format!(
            "cannot read sidecar {}: {error}",
            sidecar_path.display()
        ))
    })?;
    let sidecar: pgm::ImageSidecar = serde_json::from_str(&sidecar_text).map_err(|error| {
        Error::config(format!(
            "malformed sidecar {}: {error}",
            sidecar_path.display()
        ))
    })?;
    let synthetic = pgm::to_synthetic(&raster, &sidecar)?;
    let extraction = recover_weights(
        &synthetic,
        &sidecar.flight,
        &sidecar.constants,
        sidecar.sigma_v,
        orders.unwrap_or(config.imaging.n_orders),
    )?;
    for &(order, weight) in &extraction.spectrum.orders {
        say!("order {order:>3}: weight {}", sig6(weight));
    }
    say!(
        "analysis annuli hold {} of the in-field density",
        sig6(extraction.window_fraction),
    );
    write_artifact(
        &cli.global.out,
        "extracted.csv",
        extraction_csv(&extraction).as_bytes(),
    )
}

fn cmd_report(
    cli: &Cli,
    exp: &ExperimentOverrides,
    over: &OracleOverrides,
    skip_oracle: bool,
) -> Result<()> {
    let config = resolve(&cli.global, exp.draft())?;
    let mut doc = String::new();
    doc.push_str("# Vibrating-mirror bounce report\n\n");
    match &cli.global.preset {
        Some(tag) => doc.push_str(&format!("Parameter set: preset {tag}.\n\n")),
        None => doc.push_str("Parameter set: resolved configuration.\n\n"),
    }

    doc.push_str("## Parameters\n\n");
    let rows: Vec<Vec<String>> = constants_rows(&config)?
        .into_iter()
        .map(|row| row.to_vec())
        .collect();
    doc.push_str(&markdown_table(&["quantity", "value", "unit"], &rows));
    doc.push('\n');

    doc.push_str("## Detection positions\n\n");
    let reference = match &cli.global.preset {
        Some(tag) => Some(config::reference_offsets_um(tag)?),
        None => None,
    };
    let (headers, body) = positions_rows(&config, 3, reference.as_deref())?;
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    doc.push_str(&markdown_table(&header_refs, &body));
    doc.push('\n');

    doc.push_str("## Sideband weights\n\n");
    let input = DiffractionInput::from_experiment(&config.experiment, &config.constants)?;
    let spectrum = sideband_weights(&input, None)?;
    let weight_rows: Vec<Vec<String>> = spectrum
        .orders
        .iter()
        .map(|&(order, weight)| vec![order.to_string(), sig6(weight)])
        .collect();
    doc.push_str(&markdown_table(&["order", "weight"], &weight_rows));
    doc.push_str(&format!(
        "\nModulation index {}, softness {} at Q = {}; carrier null at depth {}.\n\n",
        sig6(spectrum.modulation_index),
        sig6(spectrum.beta),
        sig6(spectrum.q),
        sig6(carrier_null_depth(&input)?),
    ));

    doc.push_str("## Drive-depth sweep\n\n");
    let rows = sweep_rows(&config, 0.30, 0.01)?;
    doc.push_str(&markdown_table(&SWEEP_HEADERS, &rows));
    doc.push('\n');

    doc.push_str("## First-principles comparison\n\n");
    if skip_oracle {
        doc.push_str("Skipped on request.\n");
    } else {
        let oracle = resolved_oracle(&config, over)?;
        let report = run_oracle(&oracle)?;
        print_oracle_summary(&report);
        let comparison_rows: Vec<Vec<String>> = report
            .comparisons
            .iter()
            .map(|c| {
                vec![
                    c.order.to_string(),
                    sig6(c.model_weight),
                    sig6(c.oracle_weight),
                    c.rel_deviation.map(sig6).unwrap_or_default(),
                ]
            })
            .collect();
        doc.push_str(&markdown_table(
            &[
                "order",
                "model weight",
                "integrated weight",
                "rel deviation",
            ],
            &comparison_rows,
        ));
        doc.push_str(&format!(
            "\nDimensionless dials: k/kappa {}, Q {}, depth {}, barrier/energy {}.\n",
            sig6(report.config.k_over_kappa),
            sig6(report.config.q),
            sig6(report.config.epsilon),
            sig6(report.config.u0_over_e),
        ));
        let convergence = match report.converged {
            Some(true) => "agreed at half grid spacing and time step",
            Some(false) => "DISAGREED at half grid spacing and time step",
            None => "not checked",
        };
        doc.push_str(&format!(
            "Convergence: {convergence}. Reflected fraction {}, peak norm drift {}.\n",
            sig6(report.reflected_fraction),
            sig6(report.max_norm_drift),
        ));
        for note in &report.notes {
            doc.push_str(&format!("- {note}\n"));
        }
    }

    write_artifact(&cli.global.out, "report.md", doc.as_bytes())
}
