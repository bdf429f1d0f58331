mod config;
mod heatmap;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use esm_core::data::{self, add_noise, FarFieldDataset};
use esm_core::error::EsmError;
use esm_core::forward::{default_series_order, disk_farfield_series, mfs_farfields, PlaneWave};
use esm_core::geometry::{unit_circle_angles, Shape};
use esm_core::imaging::{artifact_free, refine, sweep, IndicatorGrid};
use esm_core::refdisk::ExclusionCheck;
use serde::Serialize;

use config::{RunConfig, CONFIG_HELP};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(EsmError),
    Output(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<EsmError> for CliError {
    fn from(e: EsmError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Core(e) => match e {
                EsmError::MfsConvergence { .. }
                | EsmError::EigenConvergence { .. }
                | EsmError::SingularMode { .. }
                | EsmError::Domain { .. } => 3,
                EsmError::AllInvalid | EsmError::ZeroColumn { .. } => 4,
                EsmError::InvalidInput(_) | EsmError::Parse { .. } | EsmError::Version { .. } | EsmError::Io { .. } => 2,
            },
        }
    }
}

#[derive(Parser)]
#[command(name = "esm", version, about = "Extended sampling method for clamped obstacles", after_long_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize far-field data for the configured scene with the MFS solver.
    #[command(after_long_help = CONFIG_HELP)]
    Forward(Common),
    /// Sweep the indicator at one sampling radius.
    #[command(after_long_help = CONFIG_HELP)]
    Image {
        #[command(flatten)]
        common: Common,
        /// Dataset file (.ffd.json).
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        /// Sampling disk radius.
        #[arg(long, value_name = "R")]
        radius: f64,
    },
    /// Grow the sampling radius until the image is artifact free.
    #[command(after_long_help = CONFIG_HELP)]
    Refine {
        #[command(flatten)]
        common: Common,
        /// Dataset file (.ffd.json).
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
    },
    /// Write the analytic far field of a clamped disk scene (scene.shape = disk).
    #[command(name = "oracle-disk", after_long_help = CONFIG_HELP)]
    OracleDisk(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON); defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Noise seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Write PNG heatmaps.
    #[arg(long, value_enum, value_name = "on|off")]
    heatmap: Option<Switch>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output.directory = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.noise.seed = seed;
        }
        if let Some(h) = self.heatmap {
            cfg.output.emit_heatmap = matches!(h, Switch::On);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Files produced by a command, written only after all computation succeeds.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, dir: &Path, name: &str, bytes: Vec<u8>) {
        self.files.push((dir.join(name), bytes));
    }

    fn add_png(&mut self, dir: &Path, name: &str, img: &image::RgbImage) -> Result<(), CliError> {
        let mut bytes = Vec::new();
        img.write_to(&mut std::io::Cursor::new(&mut bytes), image::ImageFormat::Png)
            .map_err(|e| CliError::Output(format!("encoding {name}: {e}")))?;
        self.add(dir, name, bytes);
        Ok(())
    }

    fn write(self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
        for (path, bytes) in self.files {
            std::fs::write(&path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn dataset_json(ds: &FarFieldDataset) -> Result<Vec<u8>, CliError> {
    Ok(data::to_json(ds)?.into_bytes())
}

fn with_noise(ds: FarFieldDataset, cfg: &RunConfig) -> Result<FarFieldDataset, CliError> {
    if cfg.noise.delta > 0.0 {
        Ok(add_noise(&ds, cfg.noise.delta, cfg.noise.seed)?)
    } else {
        Ok(ds)
    }
}

fn cmd_forward(common: &Common) -> Result<(), CliError> {
    let cfg = common.resolve()?;
    let boundary = cfg.boundary()?;
    let dirs = cfg.direction_set()?;
    let (fields, residuals) = mfs_farfields(&boundary, cfg.scene.kappa, dirs.angles(), cfg.esm.n, cfg.mfs)?;
    for (phi, r) in dirs.angles().iter().zip(&residuals) {
        println!("direction {phi:.6}: boundary residual {r:.3e}");
    }
    let ds = with_noise(FarFieldDataset::from_farfields(&fields)?, &cfg)?;
    let mut out = Outputs::default();
    out.add(&cfg.output.directory, "dataset.ffd.json", dataset_json(&ds)?);
    out.write(&cfg.output.directory)
}

fn cmd_oracle_disk(common: &Common) -> Result<(), CliError> {
    let cfg = common.resolve()?;
    if cfg.scene.shape != Shape::Disk {
        return Err(CliError::Config(format!("scene.shape: oracle-disk needs \"disk\", got {:?}", cfg.scene.shape.name())));
    }
    let dirs = cfg.direction_set()?;
    let angles = unit_circle_angles(cfg.esm.n);
    let (kappa, radius) = (cfg.scene.kappa, cfg.scene.scale);
    let fields = dirs
        .angles()
        .iter()
        .map(|&phi| {
            let wave = PlaneWave::from_angle(kappa, phi)?;
            disk_farfield_series(radius, cfg.scene.shift, wave, &angles, default_series_order(kappa, radius))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ds = with_noise(FarFieldDataset::from_farfields(&fields)?, &cfg)?;
    let mut out = Outputs::default();
    out.add(&cfg.output.directory, "oracle_disk.ffd.json", dataset_json(&ds)?);
    out.write(&cfg.output.directory)
}

fn load_compatible(path: &Path, cfg: &RunConfig) -> Result<FarFieldDataset, CliError> {
    let ds = data::load(path)?;
    if (ds.kappa - cfg.scene.kappa).abs() > 1e-12 * cfg.scene.kappa {
        return Err(CliError::Config(format!(
            "scene.kappa = {} does not match the dataset wavenumber {}",
            cfg.scene.kappa, ds.kappa
        )));
    }
    if ds.n() != cfg.esm.n {
        return Err(CliError::Config(format!("esm.N = {} does not match the dataset's {} angles", cfg.esm.n, ds.n())));
    }
    Ok(ds)
}

fn exclusion_warning(check: &ExclusionCheck, radius: f64) -> Option<String> {
    match check {
        ExclusionCheck::Ok => None,
        ExclusionCheck::Warning { mode, value } => Some(format!(
            "R = {radius}: kappa^2 is close to a sampling-disk eigenvalue (mode {mode}, measure {value:.3e})"
        )),
    }
}

fn describe(g: &IndicatorGrid, threshold: f64) {
    let report = artifact_free(g, threshold);
    if let Some(z) = g.argmax() {
        println!("argmax ({:.4}, {:.4})", z[0], z[1]);
    }
    println!(
        "valid nodes {}/{}, half-max components {}",
        g.valid_count(),
        g.values.len(),
        report.components
    );
}

fn cmd_image(common: &Common, dataset: &Path, radius: f64) -> Result<(), CliError> {
    let cfg = common.resolve()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::Config(format!("--radius must be positive, got {radius}")));
    }
    let ds = load_compatible(dataset, &cfg)?;
    let g = sweep(&ds, &cfg.indicator(), radius)?;
    describe(&g, cfg.esm.threshold);
    if let Some(w) = exclusion_warning(&g.exclusion, radius) {
        println!("warning: {w}");
    }
    let dir = &cfg.output.directory;
    let mut out = Outputs::default();
    out.add(dir, "grid.csv", g.to_csv().into_bytes());
    if cfg.output.emit_heatmap {
        out.add_png(dir, "heatmap.png", &heatmap::render(&g, None))?;
    }
    out.write(dir)
}

#[derive(Serialize)]
struct Summary {
    p_star: u32,
    #[serde(rename = "R_star")]
    r_star: f64,
    z_star: [f64; 2],
    converged: bool,
    radii: Vec<f64>,
    components_per_radius: Vec<Option<usize>>,
    warnings: Vec<String>,
}

fn cmd_refine(common: &Common, dataset: &Path) -> Result<(), CliError> {
    let cfg = common.resolve()?;
    let ds = load_compatible(dataset, &cfg)?;
    let result = refine(&ds, &cfg.indicator())?;
    let d = &result.optimal;
    let mut warnings: Vec<String> =
        d.reports.iter().filter_map(|r| exclusion_warning(&r.exclusion, r.radius)).collect();
    if !d.converged {
        warnings.push(format!(
            "no artifact-free radius up to p = {}; reporting p = {} with the fewest components",
            cfg.esm.p_max, d.p_star
        ));
    }
    let summary = Summary {
        p_star: d.p_star,
        r_star: d.radius,
        z_star: d.center,
        converged: d.converged,
        radii: d.reports.iter().map(|r| r.radius).collect(),
        components_per_radius: d.reports.iter().map(|r| r.components).collect(),
        warnings,
    };
    for r in &d.reports {
        println!(
            "p = {}, R = {:.4}: {}",
            r.p,
            r.radius,
            r.components.map_or("all nodes degenerate".into(), |c| format!("{c} component(s)"))
        );
    }
    println!("p* = {}, R* = {:.4}, z* = ({:.4}, {:.4})", d.p_star, d.radius, d.center[0], d.center[1]);
    for w in &summary.warnings {
        println!("warning: {w}");
    }
    let dir = &cfg.output.directory;
    let mut out = Outputs::default();
    for (p, g) in result.grids.iter().enumerate() {
        if let Some(g) = g {
            out.add(dir, &format!("grid_p{p}.csv"), g.to_csv().into_bytes());
        }
    }
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Output(e.to_string()))?;
    json.push('\n');
    out.add(dir, "summary.json", json.into_bytes());
    if cfg.output.emit_heatmap {
        out.add_png(dir, "heatmap.png", &heatmap::render(result.chosen_grid(), Some((d.center, d.radius))))?;
    }
    out.write(dir)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("ESM_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("ESM_THREADS must be a non-negative integer, got {value:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("ESM_THREADS: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Forward(c) => cmd_forward(c),
        Command::Image { common, dataset, radius } => cmd_image(common, dataset, *radius),
        Command::Refine { common, dataset } => cmd_refine(common, dataset),
        Command::OracleDisk(c) => cmd_oracle_disk(c),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
