//! Phase-space (Wigner) description of sphere states.
//!
//! Points are `zeta = (x, y, px, py)` with `px, py` the transverse wave
//! vector divided by `k0`, so the reduced wavelength `1/k0` plays the role
//! of Planck's constant. Most integrals run in the dimensionless variables
//! `X = sqrt2 x / w0`, `PX = w0 k0 px / sqrt2`, where the Gaussian factor of
//! every Wigner function becomes `exp(-|Z|^2)` and `d^4 zeta = d^4 Z / k0^2`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modes::{flg_log_prefactor, lg_radial, BeamFrame, ModeIndex};
use crate::poincare::{axis_u_r, build_generators, SphereState};
use crate::scalar::Scalar;
use crate::special::{build_quadrature, laguerre_poly, KahanSum, Quadrature2D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpacePoint<T> {
    pub x: T,
    pub y: T,
    pub px: T,
    pub py: T,
}

impl<T: Scalar> PhaseSpacePoint<T> {
    pub fn new(x: T, y: T, px: T, py: T) -> Self {
        Self { x, y, px, py }
    }

    pub fn to_array(self) -> [T; 4] {
        [self.x, self.y, self.px, self.py]
    }

    pub fn from_array(a: [T; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Dimensionless coordinates `(X, Y, PX, PY)`.
    pub fn to_dimensionless(self, frame: &BeamFrame<T>) -> [T; 4] {
        let sx = T::SQRT_2() / frame.w0();
        let sp = frame.w0() * frame.k0() / T::SQRT_2();
        [self.x * sx, self.y * sx, self.px * sp, self.py * sp]
    }

    pub fn from_dimensionless(z: [T; 4], frame: &BeamFrame<T>) -> Self {
        let sx = frame.w0() / T::SQRT_2();
        let sp = T::SQRT_2() / (frame.w0() * frame.k0());
        Self::new(z[0] * sx, z[1] * sx, z[2] * sp, z[3] * sp)
    }
}

pub type Matrix4<T> = [[T; 4]; 4];

/// `Lambda = [[0, 1], [-1, 0]]` in 2x2 blocks.
pub fn symplectic_metric<T: Scalar>() -> Matrix4<T> {
    let mut m = [[T::zero(); 4]; 4];
    for i in 0..2 {
        m[i][i + 2] = T::one();
        m[i + 2][i] = -T::one();
    }
    m
}

fn mat_mul<T: Scalar>(a: &Matrix4<T>, b: &Matrix4<T>) -> Matrix4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn transpose<T: Scalar>(a: &Matrix4<T>) -> Matrix4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v;
        }
    }
    out
}

/// Maximum row sum of `a - b`.
fn inf_norm_diff<T: Scalar>(a: &Matrix4<T>, b: &Matrix4<T>) -> T {
    (0..4)
        .map(|i| (0..4).map(|j| (a[i][j] - b[i][j]).abs()).sum::<T>())
        .fold(T::zero(), T::max)
}

fn determinant<T: Scalar>(a: &Matrix4<T>) -> T {
    let mut m = *a;
    let mut det = T::one();
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| {
                m[i][col]
                    .abs()
                    .partial_cmp(&m[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[pivot][col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    det
}

fn apply<T: Scalar>(m: &Matrix4<T>, z: PhaseSpacePoint<T>) -> PhaseSpacePoint<T> {
    let v = z.to_array();
    PhaseSpacePoint::from_array([0, 1, 2, 3].map(|i| (0..4).map(|k| m[i][k] * v[k]).sum()))
}

/// Linear canonical map induced by the sphere rotation `(theta, phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticT<T> {
    pub matrix: Matrix4<T>,
    pub theta: T,
    pub phi: T,
    pub z0: T,
}

impl<T: Scalar> SymplecticT<T> {
    pub fn apply(&self, zeta: PhaseSpacePoint<T>) -> PhaseSpacePoint<T> {
        apply(&self.matrix, zeta)
    }

    /// `T^-1 = Lambda^t T^t Lambda`, which is the map for `-theta`.
    pub fn inverse(&self) -> Self {
        let lam = symplectic_metric::<T>();
        let m = mat_mul(&mat_mul(&transpose(&lam), &transpose(&self.matrix)), &lam);
        Self {
            matrix: m,
            theta: -self.theta,
            phi: self.phi,
            z0: self.z0,
        }
    }

    pub fn det(&self) -> T {
        determinant(&self.matrix)
    }

    /// `max(||T L T^t - L||, ||T^t L T - L||)` in the infinity norm.
    pub fn symplectic_residual(&self) -> T {
        let lam = symplectic_metric::<T>();
        let t = &self.matrix;
        let tt = transpose(t);
        let a = mat_mul(&mat_mul(t, &lam), &tt);
        let b = mat_mul(&mat_mul(&tt, &lam), t);
        inf_norm_diff(&a, &lam).max(inf_norm_diff(&b, &lam))
    }
}

/// Transfer matrix for a beam with Rayleigh range `z0`.
pub fn transfer_matrix_z0<T: Scalar>(theta: T, phi: T, z0: T) -> SymplecticT<T> {
    let half = theta * T::lit(0.5);
    let (c, s) = (half.cos(), half.sin());
    let (cp, sp) = (phi.cos(), phi.sin());
    let o = T::zero();
    let matrix = [
        [c, o, -z0 * s * sp, z0 * s * cp],
        [o, c, z0 * s * cp, z0 * s * sp],
        [s * sp / z0, -s * cp / z0, c, o],
        [-s * cp / z0, -s * sp / z0, o, c],
    ];
    SymplecticT { matrix, theta, phi, z0 }
}

pub fn transfer_matrix<T: Scalar>(theta: T, phi: T, frame: &BeamFrame<T>) -> SymplecticT<T> {
    transfer_matrix_z0(theta, phi, frame.rayleigh_range())
}

/// Free propagation over `z`: `r -> r - z p`.
pub fn galilean_boost<T: Scalar>(zeta: PhaseSpacePoint<T>, z: T) -> PhaseSpacePoint<T> {
    PhaseSpacePoint::new(zeta.x - z * zeta.px, zeta.y - z * zeta.py, zeta.px, zeta.py)
}

pub fn boost_matrix<T: Scalar>(z: T) -> Matrix4<T> {
    let mut m = [[T::zero(); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m[0][2] = -z;
    m[1][3] = -z;
    m
}

/// `||M Lambda M^t - Lambda||` for an arbitrary 4x4 matrix.
pub fn symplectic_defect<T: Scalar>(m: &Matrix4<T>) -> T {
    let lam = symplectic_metric::<T>();
    inf_norm_diff(&mat_mul(&mat_mul(m, &lam), &transpose(m)), &lam)
}

/// `Q0` and the classical generator vector `Q` at a phase-space point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForms<T> {
    pub q0: T,
    pub q: [T; 3],
}

impl<T: Scalar> QuadraticForms<T> {
    pub fn at(zeta: PhaseSpacePoint<T>, frame: &BeamFrame<T>) -> Self {
        let w0 = frame.w0();
        let k0 = frame.k0();
        let z0 = frame.rayleigh_range();
        let PhaseSpacePoint { x, y, px, py } = zeta;
        let two = T::lit(2.0);
        let w2 = w0 * w0;
        let pw = w2 * k0 * k0;
        let q0 = two * (x * x + y * y + (px * px + py * py) * z0 * z0) / w2;
        let q = [
            (x * x - y * y) / (two * w2) + (px * px - py * py) * pw / T::lit(8.0),
            x * y / w2 + px * py * pw / T::lit(4.0),
            (x * py - y * px) * k0 / two,
        ];
        Self { q0, q }
    }

    /// Same forms from dimensionless coordinates.
    pub fn dimensionless(z: [T; 4]) -> Self {
        let [x, y, px, py] = z;
        let quarter = T::lit(0.25);
        let half = T::lit(0.5);
        Self {
            q0: x * x + y * y + px * px + py * py,
            q: [
                quarter * (x * x - y * y + px * px - py * py),
                half * (x * y + px * py),
                half * (x * py - y * px),
            ],
        }
    }

    pub fn project(&self, u: [T; 3]) -> T {
        self.q[0] * u[0] + self.q[1] * u[1] + self.q[2] * u[2]
    }
}

/// `(-1)^N e^{-Q0} L_{(N-l)/2}(Q0 - 4 Q.u) L_{(N+l)/2}(Q0 + 4 Q.u)`.
fn wigner_kernel<T: Scalar>(mode: ModeIndex, u_r: [T; 3], forms: &QuadraticForms<T>) -> T {
    let n = mode.order();
    let n_minus = ((n as i32 - mode.l) / 2) as u32;
    let n_plus = ((n as i32 + mode.l) / 2) as u32;
    let qu = T::lit(4.0) * forms.project(u_r);
    let sign = if n.is_multiple_of(2) { T::one() } else { -T::one() };
    sign * (-forms.q0).exp() * laguerre_poly(n_minus, 0, forms.q0 - qu) * laguerre_poly(n_plus, 0, forms.q0 + qu)
}

/// Closed-form Wigner function of a sphere state at the waist plane.
pub fn wigner_closed<T: Scalar>(state: &SphereState<T>, zeta: PhaseSpacePoint<T>, frame: &BeamFrame<T>) -> T {
    let k0 = frame.k0();
    let forms = QuadraticForms::at(zeta, frame);
    k0 * k0 / (T::PI() * T::PI()) * wigner_kernel(state.mode, axis_u_r(state.theta, state.phi), &forms)
}

/// `W * pi^2 / k0^2`, evaluated from dimensionless coordinates.
pub fn wigner_dimensionless<T: Scalar>(state: &SphereState<T>, z: [T; 4]) -> T {
    wigner_kernel(
        state.mode,
        axis_u_r(state.theta, state.phi),
        &QuadraticForms::dimensionless(z),
    )
}

/// Scale of the Wigner function, `1 / (pi^2 lambdabar^2)`.
pub fn wigner_scale<T: Scalar>(frame: &BeamFrame<T>) -> T {
    let k0 = frame.k0();
    k0 * k0 / (T::PI() * T::PI())
}

/// Momentum-space wavefunction `psi(p) = k0 sum_i c_i FLG_i(k0 p)` with the
/// per-mode constants precomputed.
#[derive(Debug, Clone)]
pub struct MomentumWavefunction<T> {
    w0: T,
    k0: T,
    terms: Vec<(ModeIndex, Complex<T>, T)>,
}

impl<T: Scalar> MomentumWavefunction<T> {
    pub fn new(state: &SphereState<T>, frame: &BeamFrame<T>) -> Self {
        let terms = state
            .components()
            .filter(|(_, c)| c.norm_sqr() > T::zero())
            .map(|(m, c)| (m, c, flg_log_prefactor(m, frame.w0())))
            .collect();
        Self {
            w0: frame.w0(),
            k0: frame.k0(),
            terms,
        }
    }

    pub fn eval(&self, px: T, py: T) -> Complex<T> {
        let rho = self.k0 * px.hypot(py);
        let varphi = py.atan2(px);
        let s = self.w0 * rho * T::lit(0.5);
        let sum = self
            .terms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &(m, c, log_pre)| {
                let phase = T::from_int(m.l as i64) * varphi - T::FRAC_PI_2() * T::from_int(m.order() as i64);
                acc + c * Complex::from_polar(lg_radial(m, s, log_pre), phase)
            });
        sum * self.k0
    }
}

/// Default truncation of the oracle integral: `|xi| <= (20 + 2N)/(w0 k0)` per axis.
pub fn oracle_cutoff<T: Scalar>(frame: &BeamFrame<T>, order: u32) -> T {
    T::from_int(20 + 2 * order as i64) / (frame.w0() * frame.k0())
}

pub const ORACLE_NODES_PER_AXIS: usize = 128;

pub fn oracle_quadrature<T: Scalar>(frame: &BeamFrame<T>, order: u32) -> Result<Quadrature2D<T>> {
    build_quadrature(oracle_cutoff(frame, order), ORACLE_NODES_PER_AXIS)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue<T> {
    pub value: T,
    /// Difference against the same integral on a half-resolution rule, plus
    /// the spurious imaginary part.
    pub residual: T,
}

fn oracle_sum<T: Scalar>(
    psi: &MomentumWavefunction<T>,
    zeta: PhaseSpacePoint<T>,
    k0: T,
    quad: &Quadrature2D<T>,
) -> Complex<T> {
    let half = T::lit(0.5);
    let per_row = quad.nodes_per_axis().max(1);
    let partials: Vec<(T, T)> = quad
        .nodes
        .par_chunks(per_row)
        .zip(quad.weights.par_chunks(per_row))
        .map(|(nodes, weights)| {
            let mut re = KahanSum::new();
            let mut im = KahanSum::new();
            for (n, &w) in nodes.iter().zip(weights) {
                let (xi, eta) = (n[0], n[1]);
                let a = psi.eval(zeta.px + half * xi, zeta.py + half * eta);
                let b = psi.eval(zeta.px - half * xi, zeta.py - half * eta);
                let kernel = Complex::from_polar(w, k0 * (zeta.x * xi + zeta.y * eta));
                let v = kernel * a * b.conj();
                re.add(v.re);
                im.add(v.im);
            }
            (re.value(), im.value())
        })
        .collect();
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for (r, i) in partials {
        re.add(r);
        im.add(i);
    }
    let scale = k0 * k0 / (T::lit(4.0) * T::PI() * T::PI());
    Complex::new(re.value(), im.value()) * scale
}

/// Direct numerical evaluation of
/// `W = (2 pi lambdabar)^-2 int d^2 xi e^{i r.xi/lambdabar} psi(p + xi/2) psi*(p - xi/2)`.
pub fn wigner_oracle<T: Scalar>(
    state: &SphereState<T>,
    zeta: PhaseSpacePoint<T>,
    frame: &BeamFrame<T>,
    quad: &Quadrature2D<T>,
) -> Result<OracleValue<T>> {
    if !zeta.is_finite() {
        return Err(Error::Domain("phase-space point must be finite".into()));
    }
    let psi = MomentumWavefunction::new(state, frame);
    let k0 = frame.k0();
    let fine = oracle_sum(&psi, zeta, k0, quad);
    let coarse_rule = build_quadrature(
        quad.domain_radius,
        (quad.nodes_per_axis() / 2).max(crate::special::MIN_NODES_PER_AXIS),
    )?;
    let coarse = oracle_sum(&psi, zeta, k0, &coarse_rule);
    Ok(OracleValue {
        value: fine.re,
        residual: (fine.re - coarse.re).abs() + fine.im.abs(),
    })
}

/// `tau = cos^2((t-t')/2) cos^2((f-f')/2) + cos^2((t+t')/2) sin^2((f-f')/2)`.
pub fn tau<T: Scalar>(theta_a: T, phi_a: T, theta_b: T, phi_b: T) -> T {
    let half = T::lit(0.5);
    let dp = (phi_a - phi_b) * half;
    let cm = ((theta_a - theta_b) * half).cos();
    let cp = ((theta_a + theta_b) * half).cos();
    cm * cm * dp.cos() * dp.cos() + cp * cp * dp.sin() * dp.sin()
}

/// Overlap of two points of the sphere of `mode` separated by `tau`, in a
/// form that stays regular at `tau = 0`.
pub fn overlap_closed<T: Scalar>(mode: ModeIndex, tau: T) -> T {
    let tau = tau.max(T::zero()).min(T::one());
    let n = mode.order();
    let n_plus = ((n as i32 + mode.l) / 2) as u32;
    let n_minus = n - n_plus;
    let c = tau.sqrt();
    let s2 = T::one() - tau;
    let mut acc = KahanSum::new();
    for k in 0..=n_plus.min(n_minus) {
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        acc.add(
            sign * binomial::<T>(n_plus, k)
                * binomial::<T>(n_minus, k)
                * c.powi((n - 2 * k) as i32)
                * s2.powi(k as i32),
        );
    }
    let a = acc.value();
    a * a
}

fn binomial<T: Scalar>(n: u32, k: u32) -> T {
    let mut out = T::one();
    for i in 0..k {
        out = out * T::from_int((n - i) as i64) / T::from_int(i as i64 + 1);
    }
    out
}

/// `|<a|b>|^2`. Zero across different orders, the closed form on a common
/// sphere, and the coefficient inner product for distinct poles of one order.
pub fn overlap<T: Scalar>(a: &SphereState<T>, b: &SphereState<T>) -> T {
    if a.order() != b.order() {
        return T::zero();
    }
    if a.mode == b.mode {
        return overlap_closed(a.mode, tau(a.theta, a.phi, b.theta, b.phi));
    }
    a.inner(b).norm_sqr()
}

/// Tensor-product Gauss-Hermite rule in dimensionless phase-space
/// coordinates, tuned to integrands carrying a factor `exp(-rate |Z|^2)`.
/// Such integrands times a polynomial of degree below `2 n` are integrated
/// exactly up to round-off.
#[derive(Debug, Clone)]
pub struct PhaseSpaceQuadrature<T> {
    nodes: Vec<T>,
    // Hermite weights with the Gaussian divided back out
    weights: Vec<T>,
    rate: T,
}

impl<T: Scalar> PhaseSpaceQuadrature<T> {
    pub fn new(nodes_per_axis: usize, rate: T) -> Result<Self> {
        if !(rate > T::zero()) || !rate.is_finite() {
            return Err(Error::Config(format!("Gaussian rate must be positive, got {rate}")));
        }
        let rule = crate::special::GaussHermite::<T>::new(nodes_per_axis)?;
        let scale = rate.sqrt();
        let nodes = rule.nodes.iter().map(|&x| x / scale).collect();
        let weights = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * (x * x).exp() / scale)
            .collect();
        Ok(Self { nodes, weights, rate })
    }

    /// Rule for single Wigner functions of order `N` times a quadratic form.
    pub fn for_wigner(order: u32) -> Self {
        Self::new(2 * order as usize + 4, T::one()).expect("static rule parameters are valid")
    }

    /// Rule for products of two order-`N` Wigner functions.
    pub fn for_products(order: u32) -> Self {
        Self::new(2 * order as usize + 4, T::lit(2.0)).expect("static rule parameters are valid")
    }

    pub fn rate(&self) -> T {
        self.rate
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes.len()
    }

    /// `int f(Z) d^4 Z`, parallel over the outer axis with a fixed summation order.
    pub fn integrate<F>(&self, f: F) -> T
    where
        F: Fn([T; 4]) -> T + Sync,
    {
        let n = self.nodes.len();
        let partials: Vec<T> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = KahanSum::new();
                for j in 0..n {
                    for k in 0..n {
                        for m in 0..n {
                            let w = self.weights[i] * self.weights[j] * self.weights[k] * self.weights[m];
                            acc.add(w * f([self.nodes[i], self.nodes[j], self.nodes[k], self.nodes[m]]));
                        }
                    }
                }
                acc.value()
            })
            .collect();
        let mut acc = KahanSum::new();
        for p in partials {
            acc.add(p);
        }
        acc.value()
    }
}

/// `int W d^4 zeta`.
pub fn normalization_integral<T: Scalar>(state: &SphereState<T>, quad: &PhaseSpaceQuadrature<T>) -> T {
    quad.integrate(|z| wigner_dimensionless(state, z)) / (T::PI() * T::PI())
}

/// `(2 pi lambdabar)^2 int W_a W_b d^4 zeta`.
pub fn overlap_integral<T: Scalar>(a: &SphereState<T>, b: &SphereState<T>, quad: &PhaseSpaceQuadrature<T>) -> T {
    let pi2 = T::PI() * T::PI();
    T::lit(4.0) / pi2 * quad.integrate(|z| wigner_dimensionless(a, z) * wigner_dimensionless(b, z))
}

pub fn purity_integral<T: Scalar>(state: &SphereState<T>, quad: &PhaseSpaceQuadrature<T>) -> T {
    overlap_integral(state, state, quad)
}

/// `int L(zeta) W(zeta) d^4 zeta` with `L(zeta)` the classical generators.
pub fn expectation_phase_space<T: Scalar>(state: &SphereState<T>, quad: &PhaseSpaceQuadrature<T>) -> [T; 3] {
    let pi2 = T::PI() * T::PI();
    [0usize, 1, 2]
        .map(|a| quad.integrate(|z| QuadraticForms::dimensionless(z).q[a] * wigner_dimensionless(state, z)) / pi2)
}

/// `<L>` from the generator matrices.
pub fn expectation_generators<T: Scalar>(state: &SphereState<T>) -> [T; 3] {
    build_generators::<T>(state.order()).expectation(&state.coeffs)
}

pub const EXPECTATION_CONSISTENCY_LIMIT: f64 = 1e-6;

/// `<L>` computed in coefficient space and cross-checked against the
/// phase-space integral.
pub fn expectation_l<T: Scalar>(state: &SphereState<T>, quad: &PhaseSpaceQuadrature<T>) -> Result<[T; 3]> {
    let a = expectation_generators(state);
    let b = expectation_phase_space(state, quad);
    let divergence = (0..3)
        .map(|i| (a[i] - b[i]).abs())
        .fold(T::zero(), T::max)
        .to_f64_lossy();
    if !(divergence <= EXPECTATION_CONSISTENCY_LIMIT) {
        return Err(Error::Consistency {
            what: "generator and phase-space expectation of L".into(),
            divergence,
            limit: EXPECTATION_CONSISTENCY_LIMIT,
        });
    }
    Ok(a)
}
