//! Laguerre-Gaussian and Hermite-Gaussian mode profiles.
//!
//! Position-space modes carry the full z dependence (beam width, Gouy phase
//! and wavefront curvature). Fourier-LG modes are the normalized transverse
//! spectra at the waist plane, related to the position modes by
//! `LG(r) = (1/2pi) \int d^2q e^{i q.r} FLG(q)`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::{hermite, laguerre_poly, ln_factorial, log_norm_lg};

/// Below this value of `w0 k0` the paraxial description is flagged.
pub const PARAXIAL_WARN_LIMIT: f64 = 10.0;

/// Waist and carrier wavenumber of the beam family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamFrame<T> {
    w0: T,
    k0: T,
}

impl<T: Scalar> BeamFrame<T> {
    pub fn new(w0: T, k0: T) -> Result<Self> {
        if !(w0 > T::zero() && w0.is_finite()) || !(k0 > T::zero() && k0.is_finite()) {
            return Err(Error::Config(format!(
                "beam frame needs positive finite w0 and k0, got w0={w0}, k0={k0}"
            )));
        }
        let frame = Self { w0, k0 };
        if !frame.is_paraxial() {
            log::warn!(
                "w0*k0 = {} is below {PARAXIAL_WARN_LIMIT}; paraxial description is questionable",
                frame.paraxiality()
            );
        }
        Ok(frame)
    }

    #[inline]
    pub fn w0(&self) -> T {
        self.w0
    }

    #[inline]
    pub fn k0(&self) -> T {
        self.k0
    }

    /// `z0 = k0 w0^2 / 2`.
    #[inline]
    pub fn rayleigh_range(&self) -> T {
        self.k0 * self.w0 * self.w0 / T::lit(2.0)
    }

    /// `1/k0`, the optical analog of hbar.
    #[inline]
    pub fn reduced_wavelength(&self) -> T {
        T::one() / self.k0
    }

    /// Beam width `w(z) = w0 sqrt(1 + (z/z0)^2)`.
    pub fn width_at(&self, z: T) -> T {
        let s = z / self.rayleigh_range();
        self.w0 * (T::one() + s * s).sqrt()
    }

    /// The dimensionless product `w0 k0`.
    pub fn paraxiality(&self) -> T {
        self.w0 * self.k0
    }

    pub fn is_paraxial(&self) -> bool {
        self.paraxiality() >= T::lit(PARAXIAL_WARN_LIMIT)
    }
}

/// LG mode label: topological charge `l` and radial node count `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub l: i32,
    pub p: u32,
}

impl ModeIndex {
    pub const fn new(l: i32, p: u32) -> Self {
        Self { l, p }
    }

    /// Sphere order `N = 2p + |l|`.
    #[inline]
    pub fn order(&self) -> u32 {
        2 * self.p + self.l.unsigned_abs()
    }

    /// Every mode of order `N`, ordered by `l` descending.
    pub fn of_order(order: u32) -> Vec<ModeIndex> {
        let n = order as i32;
        (0..=order)
            .map(|i| {
                let l = n - 2 * i as i32;
                ModeIndex::new(l, (order - l.unsigned_abs()) / 2)
            })
            .collect()
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LG(l={}, p={})", self.l, self.p)
    }
}

/// Radial envelope `(sqrt2 s)^|l| L_p^|l|(2 s^2) e^{-s^2}` times the log-prefactor,
/// with `s = r / w`. Evaluated in log space so large `|l|` does not overflow.
pub(crate) fn lg_radial<T: Scalar>(mode: ModeIndex, s: T, log_prefactor: T) -> T {
    let a = mode.l.unsigned_abs();
    let two = T::lit(2.0);
    let arg = two * s * s;
    let lag = laguerre_poly(mode.p, a, arg);
    if a == 0 {
        return (log_prefactor - s * s).exp() * lag;
    }
    if s == T::zero() {
        return T::zero();
    }
    let log_mag = log_prefactor + T::from_int(a as i64) * (two.sqrt() * s).ln() - s * s;
    log_mag.exp() * lag
}

/// Position-space LG mode `LG_{l,p}(r, phi, z; k0)`.
pub fn lg_position<T: Scalar>(mode: ModeIndex, frame: &BeamFrame<T>, r: T, phi: T, z: T) -> Complex<T> {
    let z0 = frame.rayleigh_range();
    let w = frame.width_at(z);
    let radial = lg_radial(mode, r / w, log_norm_lg::<T>(mode.l, mode.p)) / w;
    // k0 r^2 / (2 R(z)) written without the removable singularity at z = 0
    let curvature = frame.k0() * r * r * z / (T::lit(2.0) * (z * z + z0 * z0));
    let gouy = -T::from_int(mode.order() as i64 + 1) * (z / z0).atan();
    let phase = T::from_int(mode.l as i64) * phi + curvature + gouy;
    Complex::from_polar(radial, phase)
}

/// Cartesian convenience wrapper around [`lg_position`].
pub fn lg_position_xy<T: Scalar>(mode: ModeIndex, frame: &BeamFrame<T>, x: T, y: T, z: T) -> Complex<T> {
    lg_position(mode, frame, x.hypot(y), y.atan2(x), z)
}

/// Fourier-transformed LG mode `FLG_{l,p}(rho, varphi)` at the waist plane.
pub fn lg_momentum<T: Scalar>(mode: ModeIndex, frame: &BeamFrame<T>, rho: T, varphi: T) -> Complex<T> {
    let w0 = frame.w0();
    let log_prefactor = flg_log_prefactor(mode, w0);
    // with s = w0 rho / 2 the FLG envelope has the same shape as the LG one
    let radial = lg_radial(mode, w0 * rho * T::lit(0.5), log_prefactor);
    let phase = T::from_int(mode.l as i64) * varphi - T::FRAC_PI_2() * T::from_int(mode.order() as i64);
    Complex::from_polar(radial, phase)
}

pub(crate) fn flg_log_prefactor<T: Scalar>(mode: ModeIndex, w0: T) -> T {
    let a = mode.l.unsigned_abs();
    T::lit(0.5)
        * (T::lit(2.0) * w0.ln() + ln_factorial::<T>(mode.p)
            - (T::lit(2.0) * T::PI()).ln()
            - ln_factorial::<T>(a + mode.p))
}

pub fn lg_momentum_xy<T: Scalar>(mode: ModeIndex, frame: &BeamFrame<T>, qx: T, qy: T) -> Complex<T> {
    lg_momentum(mode, frame, qx.hypot(qy), qy.atan2(qx))
}

/// Normalized Hermite-Gaussian mode `HG_{nx,ny}(x, y, z)`.
pub fn hg_position<T: Scalar>(nx: u32, ny: u32, frame: &BeamFrame<T>, x: T, y: T, z: T) -> Complex<T> {
    let z0 = frame.rayleigh_range();
    let w = frame.width_at(z);
    let two = T::lit(2.0);
    let n = nx + ny;
    let log_norm = half_ln(two / T::PI())
        - T::lit(0.5) * (T::from_int(n as i64) * two.ln() + ln_factorial::<T>(nx) + ln_factorial::<T>(ny));
    let sx = two.sqrt() * x / w;
    let sy = two.sqrt() * y / w;
    let r2 = x * x + y * y;
    let amp = log_norm.exp() / w * hermite(nx, sx) * hermite(ny, sy) * (-r2 / (w * w)).exp();
    let curvature = frame.k0() * r2 * z / (two * (z * z + z0 * z0));
    let gouy = -T::from_int(n as i64 + 1) * (z / z0).atan();
    Complex::from_polar(amp, curvature + gouy)
}

fn half_ln<T: Scalar>(x: T) -> T {
    T::lit(0.5) * x.ln()
}

/// Square sampling grid centred on the beam axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub nx: usize,
    pub ny: usize,
    /// Grid covers `[-half_extent, half_extent]` on both axes.
    pub half_extent: T,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(nx: usize, ny: usize, half_extent: T) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Config(format!("grid needs at least 2x2 samples, got {nx}x{ny}")));
        }
        if !(half_extent > T::zero()) || !half_extent.is_finite() {
            return Err(Error::Config(format!(
                "grid extent must be positive, got {half_extent}"
            )));
        }
        Ok(Self { nx, ny, half_extent })
    }

    /// Default sampling for order-`N` fields: 256x256 over `+-4 w0 sqrt(N+1)`.
    pub fn default_for(frame: &BeamFrame<T>, order: u32) -> Self {
        Self {
            nx: 256,
            ny: 256,
            half_extent: T::lit(4.0) * frame.w0() * T::from_int(order as i64 + 1).sqrt(),
        }
    }

    pub fn dx(&self) -> T {
        T::lit(2.0) * self.half_extent / T::from_int(self.nx as i64 - 1)
    }

    pub fn dy(&self) -> T {
        T::lit(2.0) * self.half_extent / T::from_int(self.ny as i64 - 1)
    }

    #[inline]
    pub fn x(&self, ix: usize) -> T {
        -self.half_extent + self.dx() * T::from_int(ix as i64)
    }

    #[inline]
    pub fn y(&self, iy: usize) -> T {
        -self.half_extent + self.dy() * T::from_int(iy as i64)
    }
}

/// Complex samples on a [`GridSpec`], row-major with `y` increasing by row.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D<T> {
    pub grid: GridSpec<T>,
    pub samples: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexField2D<T> {
    pub fn from_fn<F>(grid: GridSpec<T>, f: F) -> Self
    where
        F: Fn(T, T) -> Complex<T> + Sync,
    {
        let rows: Vec<Vec<Complex<T>>> = (0..grid.ny)
            .into_par_iter()
            .map(|iy| {
                let y = grid.y(iy);
                (0..grid.nx).map(|ix| f(grid.x(ix), y)).collect()
            })
            .collect();
        Self {
            grid,
            samples: rows.into_iter().flatten().collect(),
        }
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> Complex<T> {
        self.samples[iy * self.grid.nx + ix]
    }

    pub fn intensity(&self) -> Vec<T> {
        self.samples.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn phase(&self) -> Vec<T> {
        self.samples.iter().map(|c| c.arg()).collect()
    }

    /// Riemann-sum estimate of `\int |u|^2 dx dy`.
    pub fn power(&self) -> T {
        let cell = self.grid.dx() * self.grid.dy();
        self.samples.iter().map(|c| c.norm_sqr()).sum::<T>() * cell
    }
}

/// Samples a single LG mode on `grid` at plane `z`.
pub fn sample_lg<T: Scalar>(mode: ModeIndex, frame: &BeamFrame<T>, grid: GridSpec<T>, z: T) -> ComplexField2D<T> {
    ComplexField2D::from_fn(grid, |x, y| lg_position_xy(mode, frame, x, y, z))
}

/// Truncated LG expansion of a paraxial plane wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureSum<T> {
    /// Highest mode order included.
    pub order: u32,
    /// Partial sum over all modes with `2p + |l| <= order`.
    pub value: Complex<T>,
    /// Mean of the partial sums of orders `0..=order`.
    pub cesaro_mean: Complex<T>,
    /// Limit of the expansion, `exp(i(q.r - q^2 z / (2 k0))) / (2 pi)`.
    pub target: Complex<T>,
}

impl<T: Scalar> ClosureSum<T> {
    pub fn residual(&self) -> T {
        (self.value - self.target).norm()
    }

    pub fn cesaro_residual(&self) -> T {
        (self.cesaro_mean - self.target).norm()
    }
}

/// Partial sums of `sum_{l,p} conj(FLG_{l,p}(q)) LG_{l,p}(r, z)`.
///
/// With both families unit-normalized the limit carries a `1/(2 pi)` factor.
/// The plain partial sums oscillate around the limit without settling, so the
/// Cesaro mean is reported alongside as the convergence indicator.
pub fn closure_expand<T: Scalar>(
    q: [T; 2],
    frame: &BeamFrame<T>,
    r_perp: [T; 2],
    z: T,
    max_order: u32,
) -> ClosureSum<T> {
    let rho = q[0].hypot(q[1]);
    let varphi = q[1].atan2(q[0]);
    let r = r_perp[0].hypot(r_perp[1]);
    let phi = r_perp[1].atan2(r_perp[0]);
    let mut partial = Complex::new(T::zero(), T::zero());
    let mut running = Complex::new(T::zero(), T::zero());
    for n in 0..=max_order {
        for mode in ModeIndex::of_order(n) {
            partial += lg_momentum(mode, frame, rho, varphi).conj() * lg_position(mode, frame, r, phi, z);
        }
        running += partial;
    }
    let q2 = rho * rho;
    let arg = q[0] * r_perp[0] + q[1] * r_perp[1] - q2 * z / (T::lit(2.0) * frame.k0());
    let target = Complex::from_polar(T::one() / (T::lit(2.0) * T::PI()), arg);
    ClosureSum {
        order: max_order,
        value: partial,
        cesaro_mean: running / T::from_int(max_order as i64 + 1),
        target,
    }
}
