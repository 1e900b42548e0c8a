//! Batch command-line front-end.
//!
//! Every verb reads an optional flat JSON config, applies `--set KEY=VALUE`
//! overrides, validates, runs, and writes its artifacts into `--out`.
//! Exit codes: 0 success, 2 configuration error, 3 numerical guard,
//! 4 search failure.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::certificates::{self, SweepBase};
use crate::data::DataSpec;
use crate::grid::{FieldPair, SpectralGrid, DEFAULT_HALF_LENGTH, DEFAULT_POINTS};
use crate::linear::{self, LinearEvolver};
use crate::output::{Csv, Json};
use crate::params::{ExchangerParams, Kappa, ReactionParams};
use crate::phase::{self, OdeOutcome, PhaseGeometry};
use crate::semilinear::{self, SimulationConfig};
use crate::spectral::ModeSymbol;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_SEARCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "heatex", version, about = "Heat exchanger reaction-diffusion toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Linear evolution, decay-exponent and evanescent-rate fits.
    Linear(CommonArgs),
    /// One semilinear run classified as decay, blow-up or inconclusive.
    Semilinear(CommonArgs),
    /// Outcome grid over reaction exponents and data amplitudes.
    Sweep(CommonArgs),
    /// Radial profiles of the dispersal symbol.
    Symbols(CommonArgs),
    /// Invariant region, segment determinant and comparison ODE run.
    Phaseplane(CommonArgs),
    /// Decay constants, mass functional and global bounds.
    Certificate(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON file with flat keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for randomized sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel sections.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Override a config key; the value is parsed as JSON when possible.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

/// Flat run configuration shared by all verbs. Absent keys take
/// per-command defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: Option<usize>,
    pub points: Option<usize>,
    pub half_length: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub kappa: Option<u8>,
    /// `gaussian`, `shaped` or `zero`.
    pub data: Option<String>,
    pub amp_u: Option<f64>,
    pub amp_v: Option<f64>,
    pub width: Option<f64>,
    pub eta: Option<f64>,
    pub radius: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub dt_max: Option<f64>,
    pub dt_min: Option<f64>,
    pub blowup_threshold: Option<f64>,
    pub decay_margin: Option<f64>,
    pub dealias: Option<bool>,
    pub samples: Option<usize>,
    pub fit_window: Option<[f64; 2]>,
    pub evanescent_window: Option<[f64; 2]>,
    pub p_values: Option<Vec<f64>>,
    pub amplitudes: Option<Vec<f64>>,
    pub combinations: Option<Vec<[f64; 4]>>,
    pub max_radius: Option<f64>,
    pub radial_samples: Option<usize>,
    /// `search` or `direct`.
    pub mode: Option<String>,
    pub u0: Option<f64>,
    pub v0: Option<f64>,
    pub lambda: Option<f64>,
    pub t_max: Option<f64>,
    pub alpha_samples: Option<usize>,
    pub random_starts: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Run(e) => match e {
                Error::Underflow { .. }
                | Error::BoxContaminated { .. }
                | Error::Overflow { .. }
                | Error::TooFewSamples { .. }
                | Error::ComparisonWindowEmpty => EXIT_NUMERICAL,
                Error::SearchFailed { .. } => EXIT_SEARCH,
                _ => EXIT_CONFIG,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(name: &str, constraint: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{name}` {constraint}"))
}

/// Parses `args` (including the program name), runs the verb and returns
/// the exit code. Reports go to `stdout`, errors to stderr.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("heatex: {e}");
            e.exit_code()
        }
    }
}

type Verb = fn(&RunConfig, &CommonArgs, &mut dyn Write) -> CliResult<()>;

fn dispatch(command: &Command, out: &mut dyn Write) -> CliResult<()> {
    let (args, verb): (&CommonArgs, Verb) = match command {
        Command::Linear(a) => (a, cmd_linear),
        Command::Semilinear(a) => (a, cmd_semilinear),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Symbols(a) => (a, cmd_symbols),
        Command::Phaseplane(a) => (a, cmd_phaseplane),
        Command::Certificate(a) => (a, cmd_certificate),
    };
    let config = load_config(args)?;
    fs::create_dir_all(&args.out)?;
    match args.threads {
        None => verb(&config, args, out),
        Some(0) => Err(invalid("threads", "must be >= 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            let mut report = Vec::new();
            let result = pool.install(|| verb(&config, args, &mut report));
            out.write_all(&report)?;
            result
        }
    }
}

/// Reads the config file (if any) and merges the `--set` overrides on top.
pub fn load_config(args: &CommonArgs) -> CliResult<RunConfig> {
    let mut map = match &args.config {
        None => Map::new(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Config("config must be a JSON object".into())),
                Err(e) => {
                    return Err(CliError::Config(format!(
                        "malformed JSON in {} at line {} column {}: {e}",
                        path.display(),
                        e.line(),
                        e.column()
                    )))
                }
            }
        }
    };
    for item in &args.overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{item}` is not KEY=VALUE")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        map.insert(key.trim().to_string(), value);
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Config(e.to_string()))
}

impl RunConfig {
    fn exchanger(&self) -> CliResult<ExchangerParams> {
        Ok(ExchangerParams::new(
            self.c.unwrap_or(1.0),
            self.d.unwrap_or(1.0),
            self.mu.unwrap_or(1.0),
            self.nu.unwrap_or(1.0),
        )?)
    }

    fn dim(&self) -> usize {
        self.dim.unwrap_or(1)
    }

    fn grid(&self) -> CliResult<SpectralGrid> {
        let dim = self.dim();
        let default_points = if dim == 2 { 512 } else { DEFAULT_POINTS };
        Ok(SpectralGrid::new(
            dim,
            self.points.unwrap_or(default_points),
            self.half_length.unwrap_or(DEFAULT_HALF_LENGTH),
        )?)
    }

    fn reaction(&self, default_p: f64) -> CliResult<ReactionParams> {
        let p = self.p.unwrap_or(default_p);
        Ok(ReactionParams::new(p, self.q.unwrap_or(p), Kappa::from_flag(self.kappa.unwrap_or(0))?)?)
    }

    /// `None` stands for identically zero data.
    fn data(&self, default_family: &str, params: &ExchangerParams) -> CliResult<Option<DataSpec>> {
        self.data_with(default_family, (1.0, 0.5), params)
    }

    fn data_with(&self, default_family: &str, default_amps: (f64, f64), params: &ExchangerParams) -> CliResult<Option<DataSpec>> {
        let family = self.data.as_deref().unwrap_or(default_family);
        let spec = match family {
            "gaussian" => DataSpec::gaussian(
                self.amp_u.unwrap_or(default_amps.0),
                self.amp_v.unwrap_or(default_amps.1),
                self.width.unwrap_or(1.0),
            ),
            "shaped" => DataSpec::shaped(self.eta.unwrap_or(1.0), self.radius.unwrap_or(4.0), params),
            "zero" => return Ok(None),
            other => return Err(invalid("data", format!("must be gaussian, shaped or zero, got `{other}`"))),
        };
        spec.validate()?;
        Ok(Some(spec))
    }

    fn window(&self, value: Option<[f64; 2]>, default: (f64, f64), name: &str) -> CliResult<(f64, f64)> {
        let (a, b) = value.map_or(default, |w| (w[0], w[1]));
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
            return Err(invalid(name, format!("must satisfy 0 <= start < end, got [{a}, {b}]")));
        }
        Ok((a, b))
    }

    fn count(&self, value: Option<usize>, default: usize, min: usize, name: &str) -> CliResult<usize> {
        let n = value.unwrap_or(default);
        if n < min {
            return Err(invalid(name, format!("must be >= {min}, got {n}")));
        }
        Ok(n)
    }

    fn positive(&self, value: Option<f64>, default: f64, name: &str) -> CliResult<f64> {
        let x = value.unwrap_or(default);
        if !(x.is_finite() && x > 0.0) {
            return Err(invalid(name, format!("must be finite and > 0, got {x}")));
        }
        Ok(x)
    }

    /// Keys the verb does not read are rejected rather than ignored.
    fn only(&self, verb: &str, allowed: &[&str]) -> CliResult<()> {
        let allowed: BTreeSet<&str> = GRID_KEYS.iter().chain(allowed).copied().collect();
        match self.present_keys().into_iter().find(|k| !allowed.contains(k)) {
            Some(k) => Err(invalid(k, format!("is not used by `{verb}`"))),
            None => Ok(()),
        }
    }

    fn present_keys(&self) -> Vec<&'static str> {
        let mut present = Vec::new();
        macro_rules! keys {
            ($($f:ident),*) => {$(
                if self.$f.is_some() {
                    present.push(stringify!($f));
                }
            )*};
        }
        keys!(
            dim, points, half_length, c, d, mu, nu, p, q, kappa, data, amp_u, amp_v, width, eta, radius, t_end,
            dt, dt_max, dt_min, blowup_threshold, decay_margin, dealias, samples, fit_window, evanescent_window,
            p_values, amplitudes, combinations, max_radius, radial_samples, mode, u0, v0, lambda, t_max,
            alpha_samples, random_starts
        );
        present
    }
}

const GRID_KEYS: &[&str] = &["dim", "points", "half_length", "c", "d", "mu", "nu"];
const DATA_KEYS: &[&str] = &["data", "amp_u", "amp_v", "width", "eta", "radius"];
const STEP_KEYS: &[&str] = &["t_end", "dt", "dt_max", "dt_min", "blowup_threshold", "decay_margin", "dealias"];

fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

fn path(args: &CommonArgs, name: &str) -> PathBuf {
    args.out.join(name)
}

fn write_csv(csv: &Csv, at: &Path) -> CliResult<()> {
    csv.write(at).map_err(|e| CliError::Io(format!("{}: {e}", at.display())))
}

fn sample_data(spec: Option<&DataSpec>, grid: &SpectralGrid) -> FieldPair {
    spec.map_or_else(|| FieldPair::zeros(grid.len()), |s| s.sample(grid))
}

fn cmd_linear(cfg: &RunConfig, args: &CommonArgs, out: &mut dyn Write) -> CliResult<()> {
    cfg.only("linear", &keys(&[DATA_KEYS, &["t_end", "samples", "fit_window", "evanescent_window"]]))?;
    let params = cfg.exchanger()?;
    let grid = cfg.grid()?;
    let dim = grid.dim();
    let spec = cfg.data("gaussian", &params)?;
    let t_end = cfg.positive(cfg.t_end, 40.0, "t_end")?;
    let samples = cfg.count(cfg.samples, 64, 2, "samples")?;
    let default_fit = if dim == 2 { (4.0, t_end) } else { (5.0, t_end) };
    let fit_window = cfg.window(cfg.fit_window, default_fit, "fit_window")?;
    let ev_window = cfg.window(cfg.evanescent_window, (2.0, 6.0), "evanescent_window")?;

    let data0 = sample_data(spec.as_ref(), &grid);
    let evolver = LinearEvolver::new(&data0, &grid, &params)?;
    let trace = evolver.trace(&linear::window_times((0.0, t_end), samples))?;
    let mut csv = Csv::new(&["t", "sup_u", "sup_v", "mass_u", "mass_v", "evanescent_sup"]);
    for r in &trace {
        csv.row(&[r.t, r.sup_u, r.sup_v, r.mass_u, r.mass_v, r.evanescent_sup]);
    }
    write_csv(&csv, &path(args, "trace.csv"))?;

    let sups: Vec<_> = trace.iter().map(|r| r.sup_sample_u()).collect();
    let exponent = -linear::sup_norm_decay_fit(&sups, fit_window)?;
    let rate = linear::evanescent_decay_rate(&data0, &grid, &params, ev_window)?;
    writeln!(out, "decay_exponent={exponent:.16e} target={:.16e}", dim as f64 / 2.0)?;
    writeln!(out, "evanescent_rate={rate:.16e} target={:.16e}", params.evanescent_rate())?;
    Ok(())
}

fn simulation_config(cfg: &RunConfig, grid: SpectralGrid, params: ExchangerParams, reaction: ReactionParams, data0: FieldPair) -> CliResult<SimulationConfig> {
    let t_end = cfg.positive(cfg.t_end, 100.0, "t_end")?;
    let dt = cfg.positive(cfg.dt, semilinear::DEFAULT_DT, "dt")?;
    let dt_max = cfg.positive(cfg.dt_max, 0.05f64.max(dt), "dt_max")?;
    let mut config = SimulationConfig::new(grid, params, reaction, data0, t_end).with_dt(dt, dt_max);
    if let Some(x) = cfg.dt_min {
        config.dt_min = x;
    }
    if let Some(x) = cfg.blowup_threshold {
        config.blowup_threshold = x;
    }
    if let Some(x) = cfg.decay_margin {
        config.decay_margin = x;
    }
    config.dealias = cfg.dealias.unwrap_or(false);
    config.validate()?;
    Ok(config)
}

fn cmd_semilinear(cfg: &RunConfig, args: &CommonArgs, out: &mut dyn Write) -> CliResult<()> {
    cfg.only("semilinear", &keys(&[DATA_KEYS, STEP_KEYS, &["p", "q", "kappa"]]))?;
    let params = cfg.exchanger()?;
    let grid = cfg.grid()?;
    let reaction = cfg.reaction(1.0)?;
    let spec = cfg.data("shaped", &params)?;
    let data0 = sample_data(spec.as_ref(), &grid);
    let config = simulation_config(cfg, grid, params, reaction, data0)?;
    let trace = semilinear::simulate(&config)?;
    let mut csv = Csv::new(&["t", "sup_u", "sup_v", "mass_u", "mass_v", "dt"]);
    for r in &trace.rows {
        csv.row(&[r.t, r.sup_u, r.sup_v, r.mass_u, r.mass_v, r.dt]);
    }
    write_csv(&csv, &path(args, "trace.csv"))?;
    writeln!(out, "{}", trace.outcome)?;
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, args: &CommonArgs, out: &mut dyn Write) -> CliResult<()> {
    cfg.only("sweep", &keys(&[DATA_KEYS, STEP_KEYS, &["q", "kappa", "p_values", "amplitudes"]]))?;
    let params = cfg.exchanger()?;
    let grid = cfg.grid()?;
    let p_values = cfg.p_values.clone().unwrap_or_else(|| vec![0.5, 1.0, 1.5]);
    let amplitudes = cfg.amplitudes.clone().unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
    if p_values.is_empty() || amplitudes.is_empty() {
        return Err(invalid("p_values/amplitudes", "must be non-empty"));
    }
    if let Some(a) = amplitudes.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(invalid("amplitudes", format!("entries must be finite and > 0, got {a}")));
    }
    for &p in &p_values {
        ReactionParams::new(p, cfg.q.unwrap_or(p), Kappa::Zero)?;
    }
    let Some(data) = cfg.data("shaped", &params)? else {
        return Err(invalid("data", "cannot be zero for a sweep"));
    };
    // unit base amplitude so that each cell's amplitude is absolute
    let data = match data {
        DataSpec::Gaussian { .. } => data,
        DataSpec::Shaped { amplitude_eta, .. } => data.scaled(1.0 / amplitude_eta),
    };
    let template = simulation_config(cfg, grid.clone(), params, ReactionParams::new(1.0, 1.0, Kappa::Zero)?, FieldPair::zeros(grid.len()))?;
    let base = SweepBase {
        grid,
        exchanger: params,
        kappa: Kappa::from_flag(cfg.kappa.unwrap_or(0))?,
        q: cfg.q,
        data,
        t_end: template.t_end,
        dt: template.dt_init,
        dt_max: template.dt_max,
    };
    let cells = certificates::phase_diagram(&p_values, &amplitudes, &base)?;
    let mut csv = Csv::new(&["p", "amplitude", "m", "m0", "outcome", "t_star"]);
    let mut records = Vec::with_capacity(cells.len());
    for cell in &cells {
        let opt = |x: Option<f64>| x.map_or_else(String::new, crate::output::fmt_float);
        csv.raw_row(&[
            crate::output::fmt_float(cell.p),
            crate::output::fmt_float(cell.amplitude),
            opt(cell.m),
            opt(cell.m0),
            cell.outcome.label().to_string(),
            opt(cell.outcome.t_star()),
        ]);
        records.push(
            Json::obj()
                .with("p", cell.p)
                .with("amplitude", cell.amplitude)
                .with("m", cell.m)
                .with("m0", cell.m0)
                .with("outcome", cell.outcome.label())
                .with("t_star", cell.outcome.t_star()),
        );
    }
    crate::output::write_json_lines(&path(args, "grid.json"), &records)?;
    write_csv(&csv, &path(args, "grid.csv"))?;
    for cell in &cells {
        writeln!(out, "p={} amplitude={} {}", cell.p, cell.amplitude, cell.outcome)?;
    }
    Ok(())
}

fn cmd_symbols(cfg: &RunConfig, args: &CommonArgs, out: &mut dyn Write) -> CliResult<()> {
    cfg.only("symbols", &["combinations", "max_radius", "radial_samples"])?;
    let combos = cfg.combinations.clone().unwrap_or_else(|| {
        vec![[1.0, 1.0, 1.0, 1.0], [1.0, 2.0, 1.0, 2.0], [1.0, 10.0, 1.0, 1.0], [10.0, 1.0, 0.1, 1.0]]
    });
    if combos.is_empty() {
        return Err(invalid("combinations", "must be non-empty"));
    }
    let params: Vec<ExchangerParams> = combos
        .iter()
        .map(|[c, d, mu, nu]| ExchangerParams::new(*c, *d, *mu, *nu))
        .collect::<crate::Result<_>>()?;
    let max_radius = cfg.max_radius.unwrap_or(10.0);
    if !(max_radius.is_finite() && max_radius >= 0.0) {
        return Err(invalid("max_radius", format!("must be finite and >= 0, got {max_radius}")));
    }
    let n = cfg.count(cfg.radial_samples, 512, 2, "radial_samples")?;
    let header: Vec<String> = std::iter::once("xi".to_string())
        .chain((0..params.len()).map(|i| format!("L_{i}")))
        .collect();
    let mut csv = Csv::new(&header);
    for i in 0..n {
        let xi = max_radius * i as f64 / (n - 1) as f64;
        let row: Vec<f64> = std::iter::once(xi)
            .chain(params.iter().map(|p| ModeSymbol::at_radius(xi, p).l()))
            .collect();
        csv.row(&row);
    }
    write_csv(&csv, &path(args, "lprofile.csv"))?;
    writeln!(out, "wrote {} profiles x {n} samples", params.len())?;
    Ok(())
}

fn cmd_phaseplane(cfg: &RunConfig, args: &CommonArgs, out: &mut dyn Write) -> CliResult<()> {
    cfg.only(
        "phaseplane",
        &["p", "eta", "radius", "mode", "u0", "v0", "lambda", "t_max", "alpha_samples", "random_starts"],
    )?;
    let params = cfg.exchanger()?;
    let dim = cfg.dim();
    let p = cfg.positive(cfg.p, 1.0, "p")?;
    let t_max = cfg.positive(cfg.t_max, 100.0, "t_max")?;
    let n_alpha = cfg.count(cfg.alpha_samples, 101, 2, "alpha_samples")?;
    let starts = cfg.random_starts.unwrap_or(20);

    let (lambda, epsilon, u0, v0) = match cfg.mode.as_deref().unwrap_or("search") {
        "search" => {
            let eta = cfg.positive(cfg.eta, 1.0, "eta")?;
            let radius = cfg.positive(cfg.radius, 1.0, "radius")?;
            let choice = phase::find_lambda(eta, radius, &params, p, dim)?;
            (choice.lambda, Some(choice.epsilon), choice.u0, choice.v0)
        }
        "direct" => {
            let lambda = cfg.lambda.ok_or_else(|| invalid("lambda", "is required in direct mode"))?;
            if !(lambda.is_finite() && lambda >= 0.0) {
                return Err(invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
            }
            let u0 = cfg.u0.ok_or_else(|| invalid("u0", "is required in direct mode"))?;
            let v0 = cfg.v0.ok_or_else(|| invalid("v0", "is required in direct mode"))?;
            (lambda, None, u0, v0)
        }
        other => return Err(invalid("mode", format!("must be search or direct, got `{other}`"))),
    };
    let geometry = PhaseGeometry::new(lambda, &params, p);
    geometry.require_valid()?;
    let run = phase::integrate_ode(u0, v0, lambda, &params, p, t_max)?;

    let mut records = Vec::new();
    records.push(
        Json::obj()
            .with("record", "summary")
            .with("lambda", lambda)
            .with("epsilon", epsilon)
            .with("chi", geometry.chi)
            .with("e0", Json::point(geometry.e0))
            .with("e1", Json::point(geometry.e1))
            .with("v_slope", geometry.v_slope)
            .with("u0", u0)
            .with("v0", v0)
            .with("outcome", run.outcome.label())
            .with("t_star", match run.outcome {
                OdeOutcome::BlowUp { t_star } => Some(t_star),
                _ => None,
            }),
    );
    // the region is unbounded to the right; the polygon is cut at 4 U(E0)
    let u_far = 4.0 * geometry.e0.0.max(u0);
    records.push(Json::obj().with("record", "omega").with(
        "polygon",
        Json::Arr(
            [geometry.e0, geometry.e1, (u_far, geometry.isocline_v(u_far)), (u_far, 0.0)]
                .into_iter()
                .map(Json::point)
                .collect(),
        ),
    ));
    for alpha in phase::alpha_grid(n_alpha) {
        records.push(
            Json::obj()
                .with("record", "det")
                .with("alpha", alpha)
                .with("det", phase::det_m_alpha(alpha, lambda, &params, p)?),
        );
    }
    if starts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let points = phase::sample_omega(&geometry, u_far, starts, &mut rng);
        let report = phase::invariance_check(&points, lambda, &params, p, t_max)?;
        records.push(
            Json::obj()
                .with("record", "invariance")
                .with("seed", args.seed)
                .with("starts", report.starts)
                .with("exits", report.exits)
                .with("blowups", report.blowups),
        );
    }
    crate::output::write_json_lines(&path(args, "geometry.json"), &records)?;
    let mut csv = Csv::new(&["t", "U", "V"]);
    for &(t, u, v) in &run.trajectory {
        csv.row(&[t, u, v]);
    }
    write_csv(&csv, &path(args, "trajectory.csv"))?;
    match (run.outcome, epsilon) {
        (OdeOutcome::BlowUp { t_star }, Some(eps)) => {
            writeln!(out, "BLOW_UP t_star={t_star:.16e} epsilon={eps:.16e} lambda={lambda:.16e}")?
        }
        (OdeOutcome::BlowUp { t_star }, None) => writeln!(out, "BLOW_UP t_star={t_star:.16e} lambda={lambda:.16e}")?,
        (other, _) => writeln!(out, "{} lambda={lambda:.16e}", other.label())?,
    }
    Ok(())
}

fn cmd_certificate(cfg: &RunConfig, args: &CommonArgs, out: &mut dyn Write) -> CliResult<()> {
    cfg.only("certificate", &keys(&[DATA_KEYS, &["p", "q", "kappa"]]))?;
    let params = cfg.exchanger()?;
    let dim = cfg.dim();
    let reaction = cfg.reaction(4.0)?;
    // small enough to certify with unit rates and p = q = 4
    let Some(spec) = cfg.data_with("gaussian", (0.05, 0.05), &params)? else {
        return Err(invalid("data", "must be gaussian for a certificate"));
    };
    let constants = certificates::decay_constants(&params, dim)?;
    let mass = certificates::mass_functional(&spec, dim)?;
    let m0 = certificates::m_zero(&reaction, &constants)?;
    let bounds = certificates::global_bounds(mass.m, &reaction, &constants);
    let (bound_u, bound_v) = bounds.as_ref().map_or((None, None), |(a, b)| (Some(*a), Some(*b)));
    let cutoff = match constants.a {
        certificates::Cutoff::Radius(r) => Some(r),
        certificates::Cutoff::AllFrequencies => None,
    };
    let record = Json::obj()
        .with("dim", dim)
        .with("k", constants.k)
        .with("k_prime", constants.k_prime)
        .with("cutoff_radius", cutoff)
        .with("eta_gap", constants.eta_gap)
        .with("ell", constants.ell)
        .with("ell_prime", constants.ell_prime)
        .with("m", mass.m)
        .with("m0", m0)
        .with("certified", bounds.is_ok())
        .with("bound_u", bound_u)
        .with("bound_v", bound_v);
    crate::output::write_json_lines(&path(args, "certificate.json"), &[record])?;
    let (bu, bv) = bounds?;
    writeln!(out, "CERTIFIED m={:.16e} m0={m0:.16e} M={bu:.16e} M_prime={bv:.16e}", mass.m)?;
    Ok(())
}
