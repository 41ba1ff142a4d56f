//! Command-line front end.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::angmom::{AmplitudeSet, Helicity};
use crate::error::{Error, Result};
use crate::io::{write_csv, write_field_pgm, write_json, write_scalar_pgm, Channel, RunConfig, Table};
use crate::modes::{BeamFrame, ModeIndex};
use crate::phasespace::{
    expectation_phase_space, oracle_quadrature, overlap, overlap_integral, tau, wigner_closed, wigner_oracle,
    wigner_scale, PhaseSpacePoint, PhaseSpaceQuadrature,
};
use crate::poincare::{build_generators, rotate, synthesize_field, SphereState};
use crate::verify::{self, Suite, VerifyOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// Maps a library error to the process exit code.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::Serialization(_) => EXIT_IO,
        Error::Consistency { .. } | Error::QuadratureResolution(_) => EXIT_VERIFY,
        Error::Domain(_) | Error::Config(_) | Error::InvalidSphere(_) | Error::Kind(_) => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "oamspace",
    version,
    about = "OAM modes, orbital Poincare spheres and their Wigner functions"
)]
pub struct Cli {
    /// Read angles in degrees instead of radians.
    #[arg(long, global = true)]
    pub deg: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write intensity and phase images of a sphere state.
    Render(RenderArgs),
    /// Print the LG coefficients of a sphere state.
    Rotate(StateArgs),
    /// Evaluate the Wigner function at a point or on a planar slice.
    Wigner(WignerArgs),
    /// Overlap of two sphere states, or a sweep over the sphere.
    Overlap(OverlapArgs),
    /// Angular-momentum observables of a sphere state.
    Angmom(AngmomArgs),
    /// Run the verification suites and print a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FrameArgs {
    /// Beam waist.
    #[arg(long, default_value_t = 1.0)]
    pub w0: f64,
    /// Carrier wavenumber.
    #[arg(long, default_value_t = 100.0)]
    pub k0: f64,
}

impl FrameArgs {
    fn frame(&self) -> Result<BeamFrame<f64>> {
        BeamFrame::new(self.w0, self.k0)
    }
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// Azimuthal index of the pole mode.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    pub l: i32,
    /// Radial index of the pole mode.
    #[arg(long, default_value_t = 0)]
    pub p: u32,
    /// Polar angle on the sphere, in [0, pi].
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta: f64,
    /// Azimuth on the sphere.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub phi: f64,
}

fn angle(v: f64, deg: bool) -> f64 {
    if deg {
        v.to_radians()
    } else {
        v
    }
}

fn mode_index(l: i32, p: u32) -> Result<ModeIndex> {
    if l.unsigned_abs() + 2 * p > 64 {
        return Err(Error::Config(format!(
            "mode order |l| + 2p = {} is above 64",
            l.unsigned_abs() + 2 * p
        )));
    }
    Ok(ModeIndex::new(l, p))
}

impl StateArgs {
    fn state(&self, deg: bool) -> Result<SphereState<f64>> {
        rotate(
            mode_index(self.l, self.p)?,
            angle(self.theta, deg),
            angle(self.phi, deg),
        )
    }
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// JSON run configuration; explicit flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<i32>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Propagation distance from the waist.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
    /// Samples per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Half width of the image window.
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub w0: Option<f64>,
    #[arg(long)]
    pub k0: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File name stem for the images.
    #[arg(long)]
    pub stem: Option<String>,
}

impl RenderArgs {
    fn config(&self, deg: bool) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.l {
            cfg.mode.l = v;
        }
        if let Some(v) = self.p {
            cfg.mode.p = v;
        }
        if let Some(v) = self.theta {
            cfg.sphere.theta = angle(v, deg);
        }
        if let Some(v) = self.phi {
            cfg.sphere.phi = angle(v, deg);
        }
        if let Some(v) = self.z {
            cfg.z = v;
        }
        if let Some(v) = self.grid {
            cfg.grid.resolution = v;
        }
        if self.extent.is_some() {
            cfg.grid.half_extent = self.extent;
        }
        if let Some(v) = self.w0 {
            cfg.frame.w0 = v;
        }
        if let Some(v) = self.k0 {
            cfg.frame.k0 = v;
        }
        if let Some(v) = &self.out {
            cfg.output.dir = v.clone();
        }
        if let Some(v) = &self.stem {
            cfg.output.stem = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Plane {
    /// x against px
    XPx,
    /// y against py
    YPy,
    /// x against y
    #[value(name = "x-y")]
    XY,
    /// px against py
    PxPy,
}

impl Plane {
    fn axes(self) -> (usize, usize) {
        match self {
            Plane::XPx => (0, 2),
            Plane::YPy => (1, 3),
            Plane::XY => (0, 1),
            Plane::PxPy => (2, 3),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Plane::XPx => "x-px",
            Plane::YPy => "y-py",
            Plane::XY => "x-y",
            Plane::PxPy => "px-py",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct WignerArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub y: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub px: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub py: f64,
    /// Also evaluate the defining integral numerically (point mode only).
    #[arg(long)]
    pub check: bool,
    /// Evaluate on a plane through the given point instead of at the point.
    #[arg(long, value_enum)]
    pub slice: Option<Plane>,
    /// Samples per slice axis.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Half width of the slice in units of the waist-plane spreads.
    #[arg(long, default_value_t = 3.0)]
    pub extent: f64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OverlapArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    pub l: i32,
    #[arg(long, default_value_t = 0)]
    pub p: u32,
    /// Pole of the second state; defaults to the first.
    #[arg(long, allow_hyphen_values = true)]
    pub l2: Option<i32>,
    #[arg(long)]
    pub p2: Option<u32>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta1: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub phi1: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta2: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub phi2: f64,
    /// Compare against the phase-space integral of the two Wigner functions.
    #[arg(long)]
    pub check: bool,
    /// Write a CSV of the overlap over a (theta, phi) grid for the second state.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    /// Samples per sweep axis.
    #[arg(long, default_value_t = 37)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AngmomArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Helicity of the carrier, +1 or -1.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    pub sigma: i32,
    /// Also integrate the classical generators against the Wigner function.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override every per-check tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also write the report to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Executes a parsed command line. Text goes to `out`; the return value is
/// the process exit code.
pub fn run(cli: &Cli, out: &mut dyn std::io::Write) -> Result<u8> {
    match &cli.command {
        Command::Render(a) => render(a, cli.deg, out),
        Command::Rotate(a) => rotate_cmd(a, cli.deg, out),
        Command::Wigner(a) => wigner_cmd(a, cli.deg, out),
        Command::Overlap(a) => overlap_cmd(a, cli.deg, out),
        Command::Angmom(a) => angmom_cmd(a, cli.deg, out),
        Command::Verify(a) => verify_cmd(a, out),
    }
}

fn emit(out: &mut dyn std::io::Write, text: &str) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn emit_json<S: Serialize>(out: &mut dyn std::io::Write, value: &S) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(value)?)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn render(a: &RenderArgs, deg: bool, out: &mut dyn std::io::Write) -> Result<u8> {
    let cfg = a.config(deg)?;
    let mode = mode_index(cfg.mode.l, cfg.mode.p)?;
    let frame = cfg.beam_frame()?;
    let state = rotate(mode, cfg.sphere.theta, cfg.sphere.phi)?;
    let grid = cfg.grid_spec(mode.order())?;
    let field = synthesize_field(&state, &frame, grid, cfg.z);
    ensure_dir(&cfg.output.dir)?;
    let intensity = cfg.output.dir.join(format!("{}_intensity.pgm", cfg.output.stem));
    let phase = cfg.output.dir.join(format!("{}_phase.pgm", cfg.output.stem));
    let config = cfg.output.dir.join(format!("{}_config.json", cfg.output.stem));
    write_field_pgm(&field, Channel::Intensity, &intensity)?;
    write_field_pgm(&field, Channel::Phase, &phase)?;
    cfg.save(&config)?;
    for p in [&intensity, &phase, &config] {
        emit(out, &p.display().to_string())?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RotateReport {
    state: crate::poincare::SphereStateDoc,
    norm: f64,
    mean_l: [f64; 3],
}

fn rotate_cmd(a: &StateArgs, deg: bool, out: &mut dyn std::io::Write) -> Result<u8> {
    let s = a.state(deg)?;
    let g = build_generators::<f64>(s.order());
    emit_json(
        out,
        &RotateReport {
            state: s.to_doc(),
            norm: s.norm(),
            mean_l: g.expectation(&s.coeffs),
        },
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct WignerPoint {
    zeta: [f64; 4],
    wigner: f64,
    scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_residual: Option<f64>,
}

fn wigner_cmd(a: &WignerArgs, deg: bool, out: &mut dyn std::io::Write) -> Result<u8> {
    let s = a.state.state(deg)?;
    let frame = a.frame.frame()?;
    let zeta = PhaseSpacePoint::new(a.x, a.y, a.px, a.py);
    if !zeta.is_finite() {
        return Err(Error::Config("phase-space point must be finite".into()));
    }
    let Some(plane) = a.slice else {
        let mut report = WignerPoint {
            zeta: zeta.to_array(),
            wigner: wigner_closed(&s, zeta, &frame),
            scale: wigner_scale(&frame),
            oracle: None,
            oracle_residual: None,
        };
        if a.check {
            let o = wigner_oracle(&s, zeta, &frame, &oracle_quadrature(&frame, s.order())?)?;
            report.oracle = Some(o.value);
            report.oracle_residual = Some(o.residual);
        }
        emit_json(out, &report)?;
        return Ok(EXIT_OK);
    };
    if a.grid < 2 || !(a.extent > 0.0) {
        return Err(Error::Config(
            "slice needs at least 2 samples per axis and a positive extent".into(),
        ));
    }
    if a.csv.is_none() && a.pgm.is_none() {
        return Err(Error::Config("a slice needs --csv and/or --pgm".into()));
    }
    // one dimensionless unit is w0/sqrt2 in position and sqrt2/(w0 k0) in momentum
    let unit = [
        frame.w0() / 2f64.sqrt(),
        frame.w0() / 2f64.sqrt(),
        2f64.sqrt() / (frame.w0() * frame.k0()),
        2f64.sqrt() / (frame.w0() * frame.k0()),
    ];
    let (ia, ib) = plane.axes();
    let n = a.grid;
    let base = zeta.to_array();
    let coord =
        |axis: usize, k: usize| -a.extent * unit[axis] + 2.0 * a.extent * unit[axis] * k as f64 / (n - 1) as f64;
    let mut table = Table::new(["x", "y", "px", "py", "W"]);
    let mut values = Vec::with_capacity(n * n);
    for jb in 0..n {
        for ja in 0..n {
            let mut z = base;
            z[ia] = coord(ia, ja);
            z[ib] = coord(ib, jb);
            let w = wigner_closed(&s, PhaseSpacePoint::from_array(z), &frame);
            values.push(w);
            table.push(vec![z[0], z[1], z[2], z[3], w])?;
        }
    }
    if let Some(path) = &a.csv {
        write_csv(&table, path)?;
        emit(out, &path.display().to_string())?;
    }
    if let Some(path) = &a.pgm {
        let fixed: Vec<String> = (0..4)
            .filter(|&k| k != ia && k != ib)
            .map(|k| format!("{}={:e}", ["x", "y", "px", "py"][k], base[k]))
            .collect();
        let note = format!("{} plane at {}", plane.label(), fixed.join(", "));
        write_scalar_pgm(&values, n, n, [a.extent * unit[ia], a.extent * unit[ib]], &note, path)?;
        emit(out, &path.display().to_string())?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct OverlapReport {
    overlap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_space: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    difference: Option<f64>,
}

fn overlap_cmd(a: &OverlapArgs, deg: bool, out: &mut dyn std::io::Write) -> Result<u8> {
    let ma = mode_index(a.l, a.p)?;
    let mb = mode_index(a.l2.unwrap_or(a.l), a.p2.unwrap_or(a.p))?;
    let (t1, f1) = (angle(a.theta1, deg), angle(a.phi1, deg));
    let sa = rotate(ma, t1, f1)?;
    if let Some(path) = &a.sweep {
        if a.grid < 2 {
            return Err(Error::Config("sweep needs at least 2 samples per axis".into()));
        }
        let mut table = Table::new(["theta", "phi", "tau", "overlap"]);
        for i in 0..a.grid {
            let theta = PI * i as f64 / (a.grid - 1) as f64;
            for j in 0..a.grid {
                let phi = 2.0 * PI * j as f64 / a.grid as f64;
                let sb = rotate(mb, theta, phi)?;
                table.push(vec![theta, phi, tau(t1, f1, theta, phi), overlap(&sa, &sb)])?;
            }
        }
        write_csv(&table, path)?;
        emit(out, &path.display().to_string())?;
        return Ok(EXIT_OK);
    }
    let (t2, f2) = (angle(a.theta2, deg), angle(a.phi2, deg));
    let sb = rotate(mb, t2, f2)?;
    let value = overlap(&sa, &sb);
    let mut report = OverlapReport {
        overlap: value,
        tau: (ma == mb).then(|| tau(t1, f1, t2, f2)),
        phase_space: None,
        difference: None,
    };
    if a.check {
        let order = sa.order().max(sb.order());
        let integral = overlap_integral(&sa, &sb, &PhaseSpaceQuadrature::for_products(order));
        report.phase_space = Some(integral);
        report.difference = Some((integral - value).abs());
    }
    emit_json(out, &report)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AngmomReport {
    mean_l: [f64; 3],
    spread_l: [f64; 3],
    uncertainty_product: f64,
    uncertainty_bound: f64,
    orbital_z: f64,
    spin_z: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_l_phase_space: Option<[f64; 3]>,
}

fn angmom_cmd(a: &AngmomArgs, deg: bool, out: &mut dyn std::io::Write) -> Result<u8> {
    let s = a.state.state(deg)?;
    let helicity = Helicity::from_sigma(a.sigma)?;
    let g = build_generators::<f64>(s.order());
    let mean = g.expectation(&s.coeffs);
    let spread = g.deviations(&s.coeffs);
    let set = AmplitudeSet::from_sphere_state(&s, helicity, 1.0, 1.0)?;
    let report = AngmomReport {
        mean_l: mean,
        spread_l: spread,
        uncertainty_product: spread[0] * spread[1],
        uncertainty_bound: 0.5 * mean[2].abs(),
        orbital_z: set.orbital_z(),
        spin_z: set.spin_z(),
        mean_l_phase_space: a
            .check
            .then(|| expectation_phase_space(&s, &PhaseSpaceQuadrature::for_wigner(s.order()))),
    };
    emit_json(out, &report)?;
    Ok(EXIT_OK)
}

fn verify_cmd(a: &VerifyArgs, out: &mut dyn std::io::Write) -> Result<u8> {
    if let Some(t) = a.tol {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Config(format!("--tol must be positive, got {t}")));
        }
    }
    let opts = VerifyOptions {
        seed: a.seed,
        tol: a.tol,
        ..VerifyOptions::default()
    };
    let report = verify::run(a.suite, &opts)?;
    if let Some(path) = &a.out {
        write_json(&report, path)?;
    }
    emit_json(out, &report)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_VERIFY })
}
