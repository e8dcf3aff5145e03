//! Command-line front end behind the `sphscat` binary.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::farfield::{self, SweepQuantity};
use crate::fieldeval::{evaluate_with_stats, Domain, EvalRequest, FieldSample, Quantity};
use crate::incident::{IncidentField, IncidentKind, Wavelet};
use crate::io::{complex_cells, fmt_f64, model_hash, sidecar_path, write_binary, Metadata, Table};
use crate::media::{BoundaryCondition, ScattererModel};
use crate::presets;
use crate::timesynth::{transient_field, SynthesisPlan, TransientOptions};
use crate::verify::{residuals, Sampling};

#[derive(Parser, Debug)]
#[command(name = "sphscat", version, about = "Acoustic scattering by layered elastic spherical shells")]
pub struct Cli {
    /// Worker threads (overrides SPHSCAT_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Target strength, far field or surface pressure over a frequency grid.
    Sweep(SweepArgs),
    /// Near fields at given points.
    Field(FieldArgs),
    /// Transient response to the wavelet pulse.
    Time(TimeArgs),
    /// Residuals of the governing equations as JSON.
    Residual(ResidualArgs),
    /// Surface or far-field pressure of a named benchmark.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Built-in model name.
    #[arg(long, conflicts_with = "model")]
    pub preset: Option<String>,
    /// Model JSON file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Innermost boundary condition (NNBC, SHBC, SSBC, ESBC).
    #[arg(long)]
    pub bc: Option<BoundaryCondition>,
    #[command(flatten)]
    pub incident: IncidentArgs,
    /// Series truncation tolerance.
    #[arg(long, default_value_t = f64::EPSILON)]
    pub eps: f64,
}

#[derive(Args, Debug, Clone)]
pub struct IncidentArgs {
    /// Polar angle of the source in degrees.
    #[arg(long)]
    pub source_theta: Option<f64>,
    /// Azimuth of the source in degrees.
    #[arg(long)]
    pub source_phi: Option<f64>,
    /// Source aspect angle α in degrees (φ_s = α).
    #[arg(long, conflicts_with = "source_phi")]
    pub source_alpha: Option<f64>,
    /// Source elevation β in degrees (ϑ_s = 90° − β).
    #[arg(long, conflicts_with = "source_theta")]
    pub source_beta: Option<f64>,
    /// Point source at this distance from the origin instead of a plane wave.
    #[arg(long)]
    pub point_source: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct AngleArgs {
    /// Polar angles in degrees: a list `a,b,c` or a grid `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Azimuth in degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    /// Aspect angles α in degrees (alias for φ), list or grid.
    #[arg(long, conflicts_with = "theta", allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Elevation β in degrees (ϑ = 90° − β).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct FrequencyArgs {
    /// Frequencies: list `a,b` or grid `start:stop:count`.
    #[arg(long)]
    pub freq: Option<String>,
    /// Read the frequency values as k₁R₀,₁ instead of Hz.
    #[arg(long)]
    pub kr: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Ts,
    Farfield,
    Surface,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub freq: FrequencyArgs,
    /// Frequency band `fmin:fmax:count` (Hz, or kR with --kr); defaults to the preset band.
    #[arg(long)]
    pub band: Option<String>,
    #[command(flatten)]
    pub angles: AngleArgs,
    #[arg(long, value_enum, default_value_t = SweepKind::Ts)]
    pub quantity: SweepKind,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Scattered,
    Total,
    Gradient,
    Displacement,
    Stress,
}

impl FieldKind {
    fn quantity(self) -> Quantity {
        match self {
            FieldKind::Scattered => Quantity::ScatteredPressure,
            FieldKind::Total => Quantity::TotalPressure,
            FieldKind::Gradient => Quantity::GradientPressure,
            FieldKind::Displacement => Quantity::Displacement,
            FieldKind::Stress => Quantity::Stress,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Points `x,y,z;x,y,z;…` in metres.
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Radius for an angular line of points.
    #[arg(long)]
    pub radius: Option<f64>,
    #[command(flatten)]
    pub angles: AngleArgs,
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub freq: FrequencyArgs,
    #[command(flatten)]
    pub points: PointArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FieldKind::Total])]
    pub quantity: Vec<FieldKind>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TimeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub points: PointArgs,
    /// Wavelet centre frequency in Hz.
    #[arg(long, default_value_t = 1500.0)]
    pub fc: f64,
    /// Number of time samples Ň (power of two).
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    /// Period T in seconds; defaults to `cycles / fc`.
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long, default_value_t = 120.0)]
    pub cycles: f64,
    /// Source delay in seconds.
    #[arg(long, default_value_t = 0.0)]
    pub delay: f64,
    /// Skip frequencies above this many Hz.
    #[arg(long)]
    pub max_freq: Option<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FieldKind::Total])]
    pub quantity: Vec<FieldKind>,
    /// Also write the series as a binary dump.
    #[arg(long)]
    pub binary: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Frequency (Hz, or kR with --kr); defaults to half the frequency bound.
    #[arg(long)]
    pub freq: Option<f64>,
    #[arg(long)]
    pub kr: bool,
    #[arg(long, default_value_t = 32)]
    pub points: usize,
    #[arg(long, default_value_t = 25)]
    pub inner_points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    /// Preset name.
    pub name: String,
    #[arg(long)]
    pub bc: Option<BoundaryCondition>,
    /// Exterior wavenumber k₁ in 1/m.
    #[arg(long, conflicts_with = "freq")]
    pub k: Option<f64>,
    /// Frequency in Hz.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Total pressure on the outer surface (default).
    #[arg(long, conflicts_with = "far")]
    pub surface: bool,
    /// Far-field pattern and TS instead.
    #[arg(long)]
    pub far: bool,
    /// Polar angles in degrees, `start:stop:count`.
    #[arg(long, default_value = "0:180:181")]
    pub angles: String,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    #[arg(long, default_value_t = f64::EPSILON)]
    pub eps: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parse `a,b,c` or `start:stop:count`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse '{s}' as a list or start:stop:count grid"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        return match n {
            0 => Err(bad()),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
        };
    }
    s.split(',').map(num).collect()
}

fn parse_points(s: &str) -> Result<Vec<[f64; 3]>> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let v = parse_grid(t)?;
            if v.len() != 3 {
                return Err(Error::Config(format!("point '{t}' needs three coordinates")));
            }
            Ok([v[0], v[1], v[2]])
        })
        .collect()
}

impl AngleArgs {
    /// Physical `(ϑ, φ)` pairs in radians.
    fn resolve(&self, default_theta: &str) -> Result<Vec<(f64, f64)>> {
        if let Some(alpha) = &self.alpha {
            let theta = 90.0 - self.beta.unwrap_or(0.0);
            return Ok(parse_grid(alpha)?.into_iter().map(|a| (theta.to_radians(), a.to_radians())).collect());
        }
        let thetas = match (&self.theta, self.beta) {
            (Some(t), _) => parse_grid(t)?,
            (None, Some(b)) => vec![90.0 - b],
            (None, None) => parse_grid(default_theta)?,
        };
        Ok(thetas.into_iter().map(|t| (t.to_radians(), self.phi.to_radians())).collect())
    }
}

struct Loaded {
    model: ScattererModel,
    incident: IncidentField,
    band: (f64, f64),
}

fn load(args: &ModelArgs) -> Result<Loaded> {
    let (model, mut incident) = match (&args.preset, &args.model) {
        (Some(name), None) => {
            let p = presets::by_name(name, args.bc)?;
            (p.model, p.incident)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let mut model = ScattererModel::from_json(&text)?;
            if let Some(bc) = args.bc {
                if bc != model.innermost_condition() {
                    return Err(Error::Config(format!(
                        "--bc {} does not match the model file ({}); edit the layers instead",
                        bc.name(),
                        model.innermost_condition().name()
                    )));
                }
                model = ScattererModel::new(model.layers().to_vec(), bc, model.description())?;
            }
            (model, IncidentField::along_z())
        }
        _ => return Err(Error::Config("give exactly one of --preset or --model".into())),
    };
    let ia = &args.incident;
    let theta = ia.source_beta.map(|b| 90.0 - b).or(ia.source_theta).map(f64::to_radians);
    let phi = ia.source_alpha.or(ia.source_phi).map(f64::to_radians);
    incident.source_polar = theta.unwrap_or(incident.source_polar);
    incident.source_azimuth = phi.unwrap_or(incident.source_azimuth);
    if let Some(rs) = ia.point_source {
        incident.kind = IncidentKind::PointSource { source_radius: rs };
    }
    incident.amplitude = Complex64::new(ia.amplitude, 0.0);
    incident.validate(model.outer_radius())?;
    let fb = model.frequency_bound();
    Ok(Loaded { model, incident, band: (0.01 * fb, fb) })
}

fn to_hz(model: &ScattererModel, v: f64, kr: bool) -> f64 {
    if kr {
        v * model.exterior().sound_speed / (2.0 * PI * model.outer_radius())
    } else {
        v
    }
}

struct Emit {
    warnings: Vec<String>,
    numerical_failure: bool,
    n_used: Vec<usize>,
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, v: &T) -> Result<()> {
    write_text(out, &(serde_json::to_string_pretty(v)? + "\n"))
}

fn run_sweep(a: &SweepArgs) -> Result<(Emit, ScattererModel, f64)> {
    let l = load(&a.model)?;
    let freqs: Vec<f64> = match (&a.freq.freq, &a.band) {
        (Some(f), _) | (None, Some(f)) => parse_grid(f)?.into_iter().map(|v| to_hz(&l.model, v, a.freq.kr)).collect(),
        (None, None) => parse_grid(&format!("{}:{}:100", l.band.0, l.band.1))?,
    };
    let angles = a.angles.resolve("180")?;
    let q = match a.quantity {
        SweepKind::Ts => SweepQuantity::TargetStrength,
        SweepKind::Farfield => SweepQuantity::FarField,
        SweepKind::Surface => SweepQuantity::SurfacePressure,
    };
    let r = farfield::sweep(&l.model, &l.incident, &freqs, &angles, q, a.model.eps)?;
    let mut warnings = Vec::new();
    for (f, s) in r.frequencies.iter().zip(&r.status) {
        if let Some(e) = &s.error {
            warnings.push(format!("f = {f}: {e}"));
        } else if !s.converged {
            warnings.push(format!("f = {f}: series stopped before convergence"));
        }
        if !s.singular_modes.is_empty() {
            warnings.push(format!("f = {f}: singular modes {:?}", s.singular_modes));
        }
    }
    let failed = r.status.iter().all(|s| s.error.is_some() || (s.overflow && !s.converged));
    if a.output.format == Format::Json {
        write_json(&a.output.out, &r)?;
    } else {
        let value_cols: Vec<&str> = if q == SweepQuantity::TargetStrength { vec!["ts_db"] } else { vec!["re", "im"] };
        let mut header = vec!["frequency_hz", "k1r", "theta_deg", "phi_deg"];
        header.extend(value_cols);
        header.push("n_used");
        let mut t = Table::new(&header);
        let k_of = |f: f64| 2.0 * PI * f / l.model.exterior().sound_speed * l.model.outer_radius();
        for (i, f) in r.frequencies.iter().enumerate() {
            for (j, (th, ph)) in r.angles.iter().enumerate() {
                let v = r.values[i][j];
                let mut row = vec![fmt_f64(*f), fmt_f64(k_of(*f)), fmt_f64(th.to_degrees()), fmt_f64(ph.to_degrees())];
                if q == SweepQuantity::TargetStrength {
                    row.push(fmt_f64(v.re));
                } else {
                    row.extend(complex_cells(v));
                }
                row.push(r.status[i].n_used.to_string());
                t.push(row);
            }
        }
        write_text(&a.output.out, &t.to_csv_string())?;
    }
    let emit = Emit { warnings, numerical_failure: failed, n_used: r.n_used() };
    Ok((emit, l.model, a.model.eps))
}

impl PointArgs {
    fn resolve(&self, model: &ScattererModel) -> Result<Vec<[f64; 3]>> {
        if let Some(p) = &self.points {
            return parse_points(p);
        }
        let r = self.radius.unwrap_or_else(|| model.outer_radius());
        Ok(self
            .angles
            .resolve("0:180:19")?
            .into_iter()
            .map(|(t, p)| [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()])
            .collect())
    }
}

fn domain_name(d: Domain) -> String {
    match d {
        Domain::Fluid(i) => format!("fluid{i}"),
        Domain::Solid(i) => format!("solid{i}"),
        Domain::Excluded => "excluded".into(),
    }
}

fn field_table(samples: &[FieldSample], kinds: &[FieldKind]) -> Table {
    let mut header: Vec<String> = ["x", "y", "z", "domain", "n_used"].iter().map(|s| s.to_string()).collect();
    let comp = |name: &str, h: &mut Vec<String>| {
        h.push(format!("{name}_re"));
        h.push(format!("{name}_im"));
    };
    for k in kinds {
        match k {
            FieldKind::Scattered => comp("p_scat", &mut header),
            FieldKind::Total => comp("p", &mut header),
            FieldKind::Gradient => ["dp1", "dp2", "dp3"].iter().for_each(|n| comp(n, &mut header)),
            FieldKind::Displacement => ["u1", "u2", "u3"].iter().for_each(|n| comp(n, &mut header)),
            FieldKind::Stress => ["s11", "s22", "s33", "s23", "s13", "s12"].iter().for_each(|n| comp(n, &mut header)),
        }
    }
    let mut t = Table::new(&header);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    for s in samples {
        let mut row = vec![
            fmt_f64(s.point[0]),
            fmt_f64(s.point[1]),
            fmt_f64(s.point[2]),
            domain_name(s.domain),
            s.n_used.to_string(),
        ];
        let mut put = |v: Option<Complex64>| row.extend(complex_cells(v.unwrap_or(nan)));
        for k in kinds {
            match k {
                FieldKind::Scattered => put(s.scattered_pressure),
                FieldKind::Total => put(s.total_pressure),
                FieldKind::Gradient => (0..3).for_each(|i| put(s.pressure_gradient.map(|g| g[i]))),
                FieldKind::Displacement => (0..3).for_each(|i| put(s.displacement.map(|g| g[i]))),
                FieldKind::Stress => [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)]
                    .iter()
                    .for_each(|&(i, j)| put(s.stress.map(|g| g[i][j]))),
            }
        }
        t.push(row);
    }
    t
}

fn run_field(a: &FieldArgs) -> Result<(Emit, ScattererModel, f64)> {
    let l = load(&a.model)?;
    let f = match &a.freq.freq {
        Some(s) => to_hz(&l.model, parse_grid(s)?[0], a.freq.kr),
        None => return Err(Error::Config("field needs --freq".into())),
    };
    let points = a.points.resolve(&l.model)?;
    let qs: Vec<Quantity> = a.quantity.iter().map(|k| k.quantity()).collect();
    let req = EvalRequest::new(points, &qs).epsilon(a.model.eps);
    let (samples, stats) = evaluate_with_stats(&l.model, &l.incident, 2.0 * PI * f, &req)?;
    let mut warnings = Vec::new();
    if !stats.converged {
        warnings.push("series stopped before convergence".into());
    }
    if !stats.singular_modes.is_empty() {
        warnings.push(format!("singular modes {:?} skipped", stats.singular_modes));
    }
    if a.output.format == Format::Json {
        write_json(&a.output.out, &samples)?;
    } else {
        write_text(&a.output.out, &field_table(&samples, &a.quantity).to_csv_string())?;
    }
    let emit = Emit { warnings, numerical_failure: stats.overflow && !stats.converged, n_used: vec![stats.n_used] };
    Ok((emit, l.model, a.model.eps))
}

fn run_time(a: &TimeArgs) -> Result<(Emit, ScattererModel, f64)> {
    let l = load(&a.model)?;
    let wavelet = Wavelet::new(a.fc)?;
    let plan = SynthesisPlan::new(a.period.unwrap_or(a.cycles / a.fc), a.samples)?;
    let points = a.points.resolve(&l.model)?;
    let opts = TransientOptions {
        quantities: a.quantity.iter().map(|k| k.quantity()).collect(),
        epsilon: a.model.eps,
        delay: a.delay,
        max_frequency: a.max_freq,
    };
    let r = transient_field(&l.model, &l.incident, &wavelet, &points, &plan, &opts)?;
    let warnings: Vec<String> =
        r.flagged.iter().map(|f| format!("f = {}: {}", fmt_f64(f.frequency), f.reason)).collect();
    // long format: one row per (point, time)
    let names: Vec<String> =
        r.series.iter().flat_map(|s| s.channels.iter().map(|c| c.0.clone())).fold(Vec::new(), |mut v, n| {
            if !v.contains(&n) {
                v.push(n)
            }
            v
        });
    let mut header = vec!["point".to_string(), "t".to_string()];
    header.extend(names.iter().cloned());
    let mut t = Table::new(&header);
    let mut flat = Vec::new();
    for (pi, s) in r.series.iter().enumerate() {
        for (m, time) in r.times.iter().enumerate() {
            let mut row = vec![pi.to_string(), fmt_f64(*time)];
            flat.push(pi as f64);
            flat.push(*time);
            for n in &names {
                let v = s.channel(n).map_or(f64::NAN, |c| c[m]);
                row.push(fmt_f64(v));
                flat.push(v);
            }
            t.push(row);
        }
    }
    if a.output.format == Format::Json {
        write_json(&a.output.out, &r)?;
    } else {
        write_text(&a.output.out, &t.to_csv_string())?;
    }
    if let Some(path) = &a.binary {
        write_binary(path, t.rows.len(), header.len(), &flat)?;
    }
    let failed = r.flagged.len() == plan.frequency_count();
    Ok((Emit { warnings, numerical_failure: failed, n_used: vec![r.max_modes] }, l.model, a.model.eps))
}

fn run_residual(a: &ResidualArgs) -> Result<(Emit, ScattererModel, f64)> {
    let l = load(&a.model)?;
    let f = match a.freq {
        Some(v) => to_hz(&l.model, v, a.kr),
        None => 0.5 * l.model.frequency_bound(),
    };
    let sampling = Sampling { points_per_domain: a.points, innermost_points: a.inner_points, ..Default::default() };
    let r = residuals(&l.model, &l.incident, 2.0 * PI * f, &sampling)?;
    #[derive(Serialize)]
    struct Out<'a> {
        frequency_hz: f64,
        #[serde(flatten)]
        report: &'a crate::verify::ResidualReport,
    }
    write_json(&a.out, &Out { frequency_hz: f, report: &r })?;
    let mut warnings = Vec::new();
    if !r.converged {
        warnings.push("series stopped before convergence".into());
    }
    let emit = Emit { warnings, numerical_failure: r.overflow && !r.converged, n_used: vec![r.n_used] };
    Ok((emit, l.model, a.model.eps))
}

fn run_benchmark(a: &BenchmarkArgs) -> Result<(Emit, ScattererModel, f64)> {
    let p = presets::by_name(&a.name, a.bc)?;
    let c1 = p.model.exterior().sound_speed;
    let f = match (a.k, a.freq) {
        (Some(k), _) => k * c1 / (2.0 * PI),
        (None, Some(f)) => f,
        (None, None) => return Err(Error::Config("benchmark needs --k or --freq".into())),
    };
    let angles: Vec<(f64, f64)> =
        parse_grid(&a.angles)?.into_iter().map(|t| (t.to_radians(), a.phi.to_radians())).collect();
    let q = if a.far { SweepQuantity::FarField } else { SweepQuantity::SurfacePressure };
    let r = farfield::sweep(&p.model, &p.incident, &[f], &angles, q, a.eps)?;
    let st = &r.status[0];
    if let Some(e) = &st.error {
        return Err(Error::Config(e.clone()));
    }
    if a.output.format == Format::Json {
        write_json(&a.output.out, &r)?;
    } else {
        let mut header = vec!["theta_deg", "re", "im", "abs"];
        if a.far {
            header.push("ts_db");
        }
        let mut t = Table::new(&header);
        for ((th, _), v) in r.angles.iter().zip(&r.values[0]) {
            let mut row = vec![fmt_f64(th.to_degrees())];
            row.extend(complex_cells(*v));
            row.push(fmt_f64(v.norm()));
            if a.far {
                row.push(fmt_f64(farfield::target_strength(*v, p.incident.amplitude)));
            }
            t.push(row);
        }
        write_text(&a.output.out, &t.to_csv_string())?;
    }
    let mut warnings = Vec::new();
    if !st.converged {
        warnings.push("series stopped before convergence".into());
    }
    let emit = Emit { warnings, numerical_failure: st.overflow && !st.converged, n_used: vec![st.n_used] };
    Ok((emit, p.model, a.eps))
}

/// Run one command; returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let start = Instant::now();
    let (name, out) = match &cli.command {
        Command::Sweep(a) => ("sweep", a.output.out.clone()),
        Command::Field(a) => ("field", a.output.out.clone()),
        Command::Time(a) => ("time", a.output.out.clone()),
        Command::Residual(a) => ("residual", a.out.clone()),
        Command::Benchmark(a) => ("benchmark", a.output.out.clone()),
    };
    let (emit, model, eps) = match &cli.command {
        Command::Sweep(a) => run_sweep(a)?,
        Command::Field(a) => run_field(a)?,
        Command::Time(a) => run_time(a)?,
        Command::Residual(a) => run_residual(a)?,
        Command::Benchmark(a) => run_benchmark(a)?,
    };
    for w in &emit.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = out {
        let meta = Metadata {
            command: name.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            model_hash: model_hash(&model)?,
            epsilon: eps,
            n_used_min: emit.n_used.iter().copied().min().unwrap_or(0),
            n_used_max: emit.n_used.iter().copied().max().unwrap_or(0),
            wall_time_s: start.elapsed().as_secs_f64(),
            warnings: emit.warnings.clone(),
        };
        meta.save(&sidecar_path(&path))?;
    }
    Ok(if emit.numerical_failure { 2 } else { 0 })
}

/// Thread count from `--threads` or `SPHSCAT_THREADS`.
pub fn thread_count(cli: &Cli) -> Result<Option<usize>> {
    if let Some(n) = cli.threads {
        return Ok(Some(n));
    }
    match std::env::var("SPHSCAT_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::Config(format!("SPHSCAT_THREADS='{v}' is not a count"))),
        Err(_) => Ok(None),
    }
}
