//! Orbital Poincare spheres.
//!
//! The order-`N` LG modes span an `(N+1)`-dimensional space on which the
//! quadratic phase-space operators
//!
//! ```text
//! Lx = (x^2 - y^2)/(2 w0^2) + (px^2 - py^2) w0^2 / (8 lambdabar^2)
//! Ly = x y / w0^2 + px py w0^2 / (4 lambdabar^2)
//! Lz = (x py - y px) / (2 lambdabar)
//! ```
//!
//! act as SU(2) generators. In the Hermite-Gaussian basis they are the
//! Schwinger bilinears of the two transverse oscillators:
//! `Lx = (nx - ny)/2`, `Ly = (ax^+ ay + ay^+ ax)/2`,
//! `Lz = (ax^+ ay - ay^+ ax)/(2i)`. The matrices are built there and
//! conjugated into the LG basis with the phases of the LG profiles, where
//! `LG_{l,p} = (-1)^p (a+^+)^{n+} (a-^+)^{n-} |0> / sqrt(n+! n-!)`,
//! `a+- = (ax -+ i ay)/sqrt2` and `n+- = (N +- l)/2`.
//!
//! A point `(theta, phi)` of the sphere is the state
//! `exp(-i theta L.u_phi) |l, p>` with `u_phi = (-sin phi, cos phi, 0)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, CMatrix};
use crate::modes::{lg_position_xy, BeamFrame, ComplexField2D, GridSpec, ModeIndex};
use crate::scalar::Scalar;
use crate::special::ln_factorial;

/// The LG modes of one order, `l` running from `+N` down to `-N` in steps of 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderNSubspace {
    order: u32,
    basis: Vec<ModeIndex>,
}

impl OrderNSubspace {
    pub fn new(order: u32) -> Self {
        Self {
            order,
            basis: ModeIndex::of_order(order),
        }
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ModeIndex] {
        &self.basis
    }

    pub fn index_of(&self, mode: ModeIndex) -> Option<usize> {
        if mode.order() != self.order {
            return None;
        }
        Some(((self.order as i32 - mode.l) / 2) as usize)
    }
}

/// Matrices of the three generators on one order-`N` subspace (LG basis).
#[derive(Debug, Clone)]
pub struct GeneratorMatrices<T> {
    pub subspace: OrderNSubspace,
    pub lx: CMatrix<T>,
    pub ly: CMatrix<T>,
    pub lz: CMatrix<T>,
}

impl<T: Scalar> GeneratorMatrices<T> {
    pub fn components(&self) -> [&CMatrix<T>; 3] {
        [&self.lx, &self.ly, &self.lz]
    }

    /// `L . n` for a real 3-vector `n`.
    pub fn along(&self, n: [T; 3]) -> CMatrix<T> {
        let a = self.lx.scale_real(n[0]);
        let b = self.ly.scale_real(n[1]);
        let c = self.lz.scale_real(n[2]);
        &(&a + &b) + &c
    }

    pub fn casimir(&self) -> CMatrix<T> {
        let xx = &self.lx * &self.lx;
        let yy = &self.ly * &self.ly;
        let zz = &self.lz * &self.lz;
        &(&xx + &yy) + &zz
    }

    /// `<L>` on a normalized coefficient vector.
    pub fn expectation(&self, coeffs: &[Complex<T>]) -> [T; 3] {
        self.components().map(|m| m.expectation(coeffs).re)
    }

    /// Standard deviations `(Delta Lx, Delta Ly, Delta Lz)`.
    pub fn deviations(&self, coeffs: &[Complex<T>]) -> [T; 3] {
        self.components().map(|m| {
            let mean = m.expectation(coeffs).re;
            let sq = (m * m).expectation(coeffs).re;
            (sq - mean * mean).max(T::zero()).sqrt()
        })
    }

    /// `exp(-i theta L.u_phi)` on this subspace.
    pub fn rotation(&self, theta: T, phi: T) -> CMatrix<T> {
        if theta == T::zero() {
            return CMatrix::identity(self.subspace.dim());
        }
        self.along(axis_u_phi(phi)).exp_i_hermitian(theta)
    }
}

/// `u_phi = (-sin phi, cos phi, 0)`.
pub fn axis_u_phi<T: Scalar>(phi: T) -> [T; 3] {
    [-phi.sin(), phi.cos(), T::zero()]
}

/// `u_r = (cos phi sin theta, sin phi sin theta, cos theta)`.
pub fn axis_u_r<T: Scalar>(theta: T, phi: T) -> [T; 3] {
    [phi.cos() * theta.sin(), phi.sin() * theta.sin(), theta.cos()]
}

/// Change of basis from HG `|j, N-j>` (columns, `j = 0..=N`) to the LG basis
/// (rows, [`OrderNSubspace`] order).
pub fn lg_from_hg<T: Scalar>(order: u32) -> CMatrix<T> {
    let n = order as usize;
    let sub = OrderNSubspace::new(order);
    let i_unit = Complex::new(T::zero(), T::one());
    let mut out = CMatrix::zeros(n + 1);
    for (row, mode) in sub.basis().iter().enumerate() {
        let n_plus = ((order as i32 + mode.l) / 2) as u32;
        let n_minus = order - n_plus;
        // (ax + i ay)^{n+} (ax - i ay)^{n-}: coefficient of ax^j ay^{N-j}
        let mut poly = vec![Complex::new(T::zero(), T::zero()); n + 1];
        for a in 0..=n_plus {
            let ca = i_unit.powu(n_plus - a) * binom::<T>(n_plus, a);
            for b in 0..=n_minus {
                let cb = (-i_unit).powu(n_minus - b) * binom::<T>(n_minus, b);
                poly[(a + b) as usize] += ca * cb;
            }
        }
        let sign = if mode.p % 2 == 0 { T::one() } else { -T::one() };
        for (j, coeff) in poly.into_iter().enumerate() {
            let j = j as u32;
            let log_scale = T::lit(0.5)
                * (ln_factorial::<T>(j) + ln_factorial::<T>(order - j)
                    - ln_factorial::<T>(n_plus)
                    - ln_factorial::<T>(n_minus)
                    - T::from_int(order as i64) * T::lit(2.0).ln());
            out[(row, j as usize)] = coeff * (sign * log_scale.exp());
        }
    }
    out
}

fn binom<T: Scalar>(n: u32, k: u32) -> T {
    (ln_factorial::<T>(n) - ln_factorial::<T>(k) - ln_factorial::<T>(n - k))
        .exp()
        .round()
}

/// Generator matrices of order `N` in the LG basis.
pub fn build_generators<T: Scalar>(order: u32) -> GeneratorMatrices<T> {
    let n = order as usize;
    let zero = Complex::new(T::zero(), T::zero());
    // HG basis |j, N-j>
    let lx_hg = CMatrix::from_fn(n + 1, |i, j| {
        if i == j {
            Complex::new(T::from_int(2 * i as i64 - n as i64) / T::lit(2.0), T::zero())
        } else {
            zero
        }
    });
    // ax^+ ay : |j, N-j> -> sqrt((j+1)(N-j)) |j+1, N-j-1>
    let raise = CMatrix::from_fn(n + 1, |i, j| {
        if i == j + 1 {
            Complex::new(T::from_int(((j + 1) * (n - j)) as i64).sqrt(), T::zero())
        } else {
            zero
        }
    });
    let lower = raise.adjoint();
    let ly_hg = (&raise + &lower).scale_real(T::lit(0.5));
    let lz_hg = (&raise - &lower).scale(Complex::new(T::zero(), -T::lit(0.5)));

    let u = lg_from_hg::<T>(order);
    // <LG_r| M |LG_s> = sum conj(U_rj) M_jk U_sk
    let u_conj = CMatrix::from_fn(n + 1, |i, j| u[(i, j)].conj());
    let u_t = CMatrix::from_fn(n + 1, |i, j| u[(j, i)]);
    let to_lg = |m: &CMatrix<T>| &(&u_conj * m) * &u_t;
    let clean = |m: CMatrix<T>| clean_hermitian(m);
    GeneratorMatrices {
        subspace: OrderNSubspace::new(order),
        lx: clean(to_lg(&lx_hg)),
        ly: clean(to_lg(&ly_hg)),
        lz: clean(to_lg(&lz_hg)),
    }
}

// Symmetrize and flush round-off below 1e3 eps so structural zeros stay zero.
fn clean_hermitian<T: Scalar>(m: CMatrix<T>) -> CMatrix<T> {
    let n = m.dim();
    let floor = T::epsilon() * T::lit(1e3) * m.max_abs().max(T::one());
    let flush = |v: T| if v.abs() < floor { T::zero() } else { v };
    CMatrix::from_fn(n, |i, j| {
        let v = (m[(i, j)] + m[(j, i)].conj()) * T::lit(0.5);
        Complex::new(flush(v.re), flush(v.im))
    })
}

/// A point on the orbital Poincare sphere of `mode`, as LG coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereState<T> {
    /// Pole label `|l, p>`.
    pub mode: ModeIndex,
    pub theta: T,
    pub phi: T,
    /// Coefficients over [`OrderNSubspace`] of `mode.order()`.
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> SphereState<T> {
    /// The pole state `|l, p>` itself (`theta = 0`).
    pub fn pole(mode: ModeIndex) -> Self {
        let sub = OrderNSubspace::new(mode.order());
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); sub.dim()];
        coeffs[sub.index_of(mode).expect("mode belongs to its own subspace")] = Complex::new(T::one(), T::zero());
        Self {
            mode,
            theta: T::zero(),
            phi: T::zero(),
            coeffs,
        }
    }

    pub fn order(&self) -> u32 {
        self.mode.order()
    }

    pub fn subspace(&self) -> OrderNSubspace {
        OrderNSubspace::new(self.order())
    }

    pub fn norm(&self) -> T {
        crate::linalg::norm(&self.coeffs)
    }

    /// Coefficients paired with their LG labels.
    pub fn components(&self) -> impl Iterator<Item = (ModeIndex, Complex<T>)> + '_ {
        ModeIndex::of_order(self.order())
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    /// `<self|other>`; zero across different orders.
    pub fn inner(&self, other: &SphereState<T>) -> Complex<T> {
        if self.order() != other.order() {
            return Complex::new(T::zero(), T::zero());
        }
        inner(&self.coeffs, &other.coeffs)
    }

    /// Position-space field at `(x, y, z)`.
    pub fn field_at(&self, frame: &BeamFrame<T>, x: T, y: T, z: T) -> Complex<T> {
        self.components()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (m, c)| {
                acc + c * lg_position_xy(m, frame, x, y, z)
            })
    }
}

/// JSON form of a [`SphereState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereStateDoc {
    pub l: i32,
    pub p: u32,
    pub theta: f64,
    pub phi: f64,
    pub coeffs: Vec<CoefficientDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDoc {
    pub l: i32,
    pub p: u32,
    pub re: f64,
    pub im: f64,
}

impl<T: Scalar> SphereState<T> {
    pub fn to_doc(&self) -> SphereStateDoc {
        SphereStateDoc {
            l: self.mode.l,
            p: self.mode.p,
            theta: self.theta.to_f64_lossy(),
            phi: self.phi.to_f64_lossy(),
            coeffs: self
                .components()
                .map(|(m, c)| CoefficientDoc {
                    l: m.l,
                    p: m.p,
                    re: c.re.to_f64_lossy(),
                    im: c.im.to_f64_lossy(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &SphereStateDoc) -> Result<Self> {
        let mode = ModeIndex::new(doc.l, doc.p);
        let sub = OrderNSubspace::new(mode.order());
        if doc.coeffs.len() != sub.dim() {
            return Err(Error::Config(format!(
                "sphere of order {} needs {} coefficients, got {}",
                mode.order(),
                sub.dim(),
                doc.coeffs.len()
            )));
        }
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); sub.dim()];
        for c in &doc.coeffs {
            let slot = sub
                .index_of(ModeIndex::new(c.l, c.p))
                .ok_or_else(|| Error::Config(format!("LG({}, {}) is not of order {}", c.l, c.p, mode.order())))?;
            coeffs[slot] = Complex::new(T::lit(c.re), T::lit(c.im));
        }
        check_sphere_point(T::lit(doc.theta), T::lit(doc.phi))?;
        Ok(Self {
            mode,
            theta: T::lit(doc.theta),
            phi: T::lit(doc.phi),
            coeffs,
        })
    }
}

fn check_sphere_point<T: Scalar>(theta: T, phi: T) -> Result<()> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidSphere(format!(
            "non-finite angles theta={theta}, phi={phi}"
        )));
    }
    let slack = T::lit(1e-12);
    if theta < -slack || theta > T::PI() + slack {
        return Err(Error::InvalidSphere(format!("theta must lie in [0, pi], got {theta}")));
    }
    Ok(())
}

/// Rotates the pole `|l, p>` to `(theta, phi)`.
///
/// The coefficient of the highest-`l` basis state is made real and
/// non-negative whenever it is non-zero.
pub fn rotate<T: Scalar>(mode: ModeIndex, theta: T, phi: T) -> Result<SphereState<T>> {
    check_sphere_point(theta, phi)?;
    let theta = theta.max(T::zero()).min(T::PI());
    let phi = wrap_angle(phi);
    if theta == T::zero() {
        let mut s = SphereState::pole(mode);
        s.phi = phi;
        return Ok(s);
    }
    let gens = build_generators::<T>(mode.order());
    let u = gens.rotation(theta, phi);
    let pole = SphereState::<T>::pole(mode);
    let mut coeffs = u.apply(&pole.coeffs);
    fix_global_phase(&mut coeffs);
    Ok(SphereState {
        mode,
        theta,
        phi,
        coeffs,
    })
}

/// Equivalent accessor returning only the coefficients `C_{l',p'}(theta, phi; l, p)`.
pub fn sphere_coefficients<T: Scalar>(mode: ModeIndex, theta: T, phi: T) -> Result<Vec<Complex<T>>> {
    rotate(mode, theta, phi).map(|s| s.coeffs)
}

fn wrap_angle<T: Scalar>(phi: T) -> T {
    let tau = T::TAU();
    let w = phi % tau;
    let w = if w < T::zero() { w + tau } else { w };
    if w >= tau {
        T::zero()
    } else {
        w
    }
}

fn fix_global_phase<T: Scalar>(coeffs: &mut [Complex<T>]) {
    let lead = coeffs[0];
    let mag = lead.norm();
    if mag > T::epsilon() * T::lit(16.0) {
        let rot = lead.conj() / mag;
        for c in coeffs.iter_mut() {
            *c *= rot;
        }
        coeffs[0] = Complex::new(mag, T::zero());
    }
}

/// Samples the transverse field of a sphere state at plane `z`.
///
/// Logs a warning when the grid is too small to hold an order-`N` mode.
pub fn synthesize_field<T: Scalar>(
    state: &SphereState<T>,
    frame: &BeamFrame<T>,
    grid: GridSpec<T>,
    z: T,
) -> ComplexField2D<T> {
    let needed = T::lit(4.0) * frame.w0() * T::from_int(state.order() as i64 + 1).sqrt();
    if grid.half_extent < needed {
        log::warn!(
            "grid half-extent {} is below 4 w0 sqrt(N+1) = {}; the mode is clipped",
            grid.half_extent,
            needed
        );
    }
    ComplexField2D::from_fn(grid, |x, y| state.field_at(frame, x, y, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn subspace_ordering() {
        let s = OrderNSubspace::new(4);
        assert_eq!(s.dim(), 5);
        assert_eq!(s.index_of(ModeIndex::new(4, 0)), Some(0));
        assert_eq!(s.index_of(ModeIndex::new(0, 2)), Some(2));
        assert_eq!(s.index_of(ModeIndex::new(-4, 0)), Some(4));
        assert_eq!(s.index_of(ModeIndex::new(1, 0)), None);
    }

    #[test]
    fn degenerate_sphere_generators_vanish() {
        let g = build_generators::<f64>(0);
        for m in g.components() {
            assert_eq!(m.dim(), 1);
            assert_eq!(m.max_abs(), 0.0);
        }
    }

    #[test]
    fn first_order_generators_are_spin_half() {
        let g = build_generators::<f64>(1);
        assert!((&g.lz - &CMatrix::diagonal(&[c(0.5, 0.0), c(-0.5, 0.0)])).max_abs() < 1e-15);
        // standard phases: L+ = Lx + i Ly has a positive real (0,1) entry
        assert!((g.lx[(0, 1)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((g.ly[(0, 1)] - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn second_order_lz_diagonal() {
        let g = build_generators::<f64>(2);
        let expect = CMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert!((&g.lz - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn lie_algebra_and_casimir() {
        let i = c(0.0, 1.0);
        for order in 0..=8 {
            let g = build_generators::<f64>(order);
            for m in g.components() {
                assert!(m.hermiticity_residual() < 1e-12);
            }
            assert!((&g.lx.commutator(&g.ly) - &g.lz.scale(i)).max_abs() < 1e-10);
            assert!((&g.ly.commutator(&g.lz) - &g.lx.scale(i)).max_abs() < 1e-10);
            assert!((&g.lz.commutator(&g.lx) - &g.ly.scale(i)).max_abs() < 1e-10);
            let j = order as f64 / 2.0;
            let cas = CMatrix::identity(order as usize + 1).scale_real(j * (j + 1.0));
            assert!((&g.casimir() - &cas).max_abs() < 1e-10, "order {order}");
            for k in 0..=order as usize {
                let l = order as f64 - 2.0 * k as f64;
                assert!((g.lz[(k, k)].re - l / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generator_spectra() {
        for order in 1..=5u32 {
            let g = build_generators::<f64>(order);
            for m in g.components() {
                let e = m.hermitian_eigen();
                for (k, v) in e.values.iter().enumerate() {
                    assert!((v - (order as f64 / 2.0 - k as f64)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hg_to_lg_is_unitary() {
        for order in 0..=10 {
            let u = lg_from_hg::<f64>(order);
            let id = &u * &u.adjoint();
            assert!((&id - &CMatrix::identity(order as usize + 1)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn first_order_sphere_coefficients() {
        for &theta in &[0.0, 0.3, PI / 2.0, 2.0, PI] {
            for &phi in &[0.0, 1.1, PI, 5.0] {
                let s = rotate(ModeIndex::new(1, 0), theta, phi).unwrap();
                assert!((s.coeffs[0] - c((theta / 2.0).cos(), 0.0)).norm() < 1e-12);
                assert!((s.coeffs[1] - Complex::from_polar((theta / 2.0).sin(), phi)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_rotation_returns_pole() {
        for mode in [ModeIndex::new(0, 0), ModeIndex::new(2, 1), ModeIndex::new(-1, 1)] {
            let s = rotate(mode, 0.0f64, 2.0).unwrap();
            assert_eq!(s.coeffs, SphereState::pole(mode).coeffs);
        }
    }

    #[test]
    fn antipode_of_charge_two() {
        let s = rotate(ModeIndex::new(2, 0), PI, 0.7).unwrap();
        assert!((s.coeffs[2].norm() - 1.0).abs() < 1e-12);
        assert!(SphereState::pole(ModeIndex::new(2, 0)).inner(&s).norm() < 1e-12);
    }

    #[test]
    fn leading_coefficient_real_nonnegative() {
        for &theta in &[0.4, 1.3, 2.9] {
            let s = rotate(ModeIndex::new(0, 1), theta, 0.9).unwrap();
            assert!(s.coeffs[0].re >= 0.0);
            assert_eq!(s.coeffs[0].im, 0.0);
        }
    }

    #[test]
    fn rejects_out_of_range_theta() {
        assert!(matches!(
            rotate(ModeIndex::new(1, 0), -0.5f64, 0.0),
            Err(Error::InvalidSphere(_))
        ));
        assert!(matches!(
            rotate(ModeIndex::new(1, 0), 3.5f64, 0.0),
            Err(Error::InvalidSphere(_))
        ));
        assert!(rotate(ModeIndex::new(1, 0), f64::NAN, 0.0).is_err());
    }

    #[test]
    fn phi_is_wrapped() {
        let s = rotate(ModeIndex::new(1, 0), 1.0f64, -PI / 2.0).unwrap();
        assert!((s.phi - 1.5 * PI).abs() < 1e-15);
    }

    fn fact(n: i64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    // Wigner small-d matrix element d^j_{m' m}(beta), j and m as doubled integers.
    fn wigner_d(j2: i64, m2p: i64, m2: i64, beta: f64) -> f64 {
        let (jp, jm) = ((j2 + m2) / 2, (j2 - m2) / 2);
        let (jpp, jmp) = ((j2 + m2p) / 2, (j2 - m2p) / 2);
        let pre = (fact(jp) * fact(jm) * fact(jpp) * fact(jmp)).sqrt();
        let dm = (m2p - m2) / 2;
        let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
        let mut sum = 0.0;
        for k in 0..=j2 {
            let (a, b, d) = (jp - k, jmp - k, k + dm);
            if a < 0 || b < 0 || d < 0 {
                continue;
            }
            let sign = if (k + dm) % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * pre / (fact(a) * fact(k) * fact(b) * fact(d))
                * c.powi((j2 - dm - 2 * k) as i32)
                * s.powi((2 * k + dm) as i32);
        }
        sum
    }

    #[test]
    fn agrees_with_wigner_d_matrices() {
        for order in 0..=5u32 {
            for pole in ModeIndex::of_order(order) {
                for &(theta, phi) in &[(0.4, 0.0), (1.3, 2.2), (2.8, 5.9)] {
                    let s = rotate(pole, theta, phi).unwrap();
                    let m = pole.l as i64;
                    let oracle: Vec<Complex<f64>> = ModeIndex::of_order(order)
                        .into_iter()
                        .map(|t| {
                            let sign = if (t.p as i64 - pole.p as i64).rem_euclid(2) == 0 {
                                1.0
                            } else {
                                -1.0
                            };
                            let d = wigner_d(order as i64, t.l as i64, m, theta);
                            Complex::from_polar(sign * d, -phi * (t.l as i64 - m) as f64 / 2.0)
                        })
                        .collect();
                    let overlap = inner(&oracle, &s.coeffs).norm();
                    assert!((overlap - 1.0).abs() < 1e-12, "{pole} {theta} {phi}: {overlap}");
                }
            }
        }
    }

    #[test]
    fn unitarity_and_group_property() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let order = rng.gen_range(0..=6u32);
            let modes = ModeIndex::of_order(order);
            let pole = modes[rng.gen_range(0..modes.len())];
            let theta = rng.gen_range(0.0..PI);
            let phi = rng.gen_range(0.0..2.0 * PI);
            let s = rotate(pole, theta, phi).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
            let g = build_generators::<f64>(order);
            let back = g.rotation(-theta, phi).apply(&s.coeffs);
            let pole_vec = SphereState::<f64>::pole(pole).coeffs;
            assert!((inner(&pole_vec, &back).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mean_generator_points_along_u_r() {
        for order in 0..=4u32 {
            let g = build_generators::<f64>(order);
            for pole in ModeIndex::of_order(order) {
                for k in 0..=10 {
                    let theta = PI * k as f64 / 10.0;
                    let phi = 0.37 * k as f64;
                    let s = rotate(pole, theta, phi).unwrap();
                    let mean = g.expectation(&s.coeffs);
                    let ur = axis_u_r(theta, phi);
                    for a in 0..3 {
                        assert!((mean[a] - pole.l as f64 / 2.0 * ur[a]).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn uncertainty_relation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let order = rng.gen_range(1..=5u32);
            let modes = ModeIndex::of_order(order);
            let pole = modes[rng.gen_range(0..modes.len())];
            let s = rotate(pole, rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap();
            let g = build_generators::<f64>(order);
            let d = g.deviations(&s.coeffs);
            let lz = g.expectation(&s.coeffs)[2];
            assert!(d[0] * d[1] + 1e-10 >= 0.5 * lz.abs());
        }
    }

    fn l2_rel(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn equator_gives_hermite_gaussians() {
        let frame = BeamFrame::new(1.0f64, 50.0).unwrap();
        let cases = [(ModeIndex::new(2, 0), 0.0, (2, 0)), (ModeIndex::new(1, 0), PI, (0, 1))];
        for (pole, phi, (nx, ny)) in cases {
            let grid = GridSpec::default_for(&frame, pole.order());
            let s = rotate(pole, PI / 2.0, phi).unwrap();
            let field = synthesize_field(&s, &frame, grid, 0.0);
            let hg = ComplexField2D::from_fn(grid, |x, y| crate::modes::hg_position(nx, ny, &frame, x, y, 0.0));
            assert!(l2_rel(&field.intensity(), &hg.intensity()) < 1e-6);
        }
    }

    #[test]
    fn pole_intensity_is_azimuthally_uniform() {
        let frame = BeamFrame::new(1.0f64, 50.0).unwrap();
        let s = rotate(ModeIndex::new(2, 1), 0.0, 0.0).unwrap();
        let r = 1.3;
        let i0 = s.field_at(&frame, r, 0.0, 0.0).norm_sqr();
        for k in 1..16 {
            let a = k as f64 * PI / 8.0;
            let i = s.field_at(&frame, r * a.cos(), r * a.sin(), 0.0).norm_sqr();
            assert!((i - i0).abs() < 1e-10);
        }
    }

    #[test]
    fn json_round_trip() {
        let s = rotate(ModeIndex::new(1, 1), 1.1f64, 0.3).unwrap();
        let text = serde_json::to_string(&s.to_doc()).unwrap();
        let back = SphereState::<f64>::from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(text.starts_with("{\"l\":1,\"p\":1,\"theta\""));
    }
}
