//! Plane-wave description of paraxial fields: the dispersion relation that
//! maps `k` onto a carrier wavenumber `k0`, the exact circular polarization
//! vectors, and the projection of a plane-wave spectrum onto Fourier-LG modes.

use num_complex::Complex;
use rayon::prelude::*;

use crate::angmom::{AmplitudeKind, AmplitudeSet, Helicity};
use crate::error::{Error, Result};
use crate::modes::{lg_momentum_xy, BeamFrame, ModeIndex};
use crate::scalar::Scalar;
use crate::special::{KahanSum, Quadrature2D};

/// `k = q + kz u_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector<T> {
    pub q: [T; 2],
    pub kz: T,
}

impl<T: Scalar> WaveVector<T> {
    pub fn new(q: [T; 2], kz: T) -> Self {
        Self { q, kz }
    }

    pub fn transverse(&self) -> T {
        self.q[0].hypot(self.q[1])
    }

    pub fn magnitude(&self) -> T {
        self.transverse().hypot(self.kz)
    }
}

/// Carrier wavenumber `f(k) = (kz + sqrt(kz^2 + 2 q^2)) / 2`.
pub fn dispersion_k0<T: Scalar>(k: WaveVector<T>) -> Result<T> {
    let q = k.transverse();
    let kz = k.kz;
    if !q.is_finite() || !kz.is_finite() {
        return Err(Error::Domain("wave vector must be finite".into()));
    }
    if q == T::zero() && kz <= T::zero() {
        return Err(Error::Domain(format!("f(k) is not positive for q = 0, kz = {kz}")));
    }
    let root = (kz * kz + T::lit(2.0) * q * q).sqrt();
    if kz >= T::zero() {
        Ok((kz + root) * T::lit(0.5))
    } else {
        // same value without the cancellation in kz + root
        Ok(q * q / (root - kz))
    }
}

/// A plane wave on the `k0` shell: `kz = k0 (1 - theta^2)`, `theta = q / (sqrt2 k0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParaxialRay<T> {
    k0: T,
    q: [T; 2],
}

impl<T: Scalar> ParaxialRay<T> {
    pub fn new(k0: T, q: [T; 2]) -> Result<Self> {
        if !(k0 > T::zero()) || !k0.is_finite() {
            return Err(Error::Domain(format!("k0 must be positive, got {k0}")));
        }
        Ok(Self { k0, q })
    }

    pub fn from_wave_vector(k: WaveVector<T>) -> Result<Self> {
        Self::new(dispersion_k0(k)?, k.q)
    }

    pub fn k0(&self) -> T {
        self.k0
    }

    pub fn q(&self) -> [T; 2] {
        self.q
    }

    /// Paraxiality parameter `theta = q / (sqrt2 k0)`.
    pub fn theta_param(&self) -> T {
        self.q[0].hypot(self.q[1]) / (T::SQRT_2() * self.k0)
    }

    pub fn kz(&self) -> T {
        let t = self.theta_param();
        self.k0 * (T::one() - t * t)
    }

    pub fn wave_vector(&self) -> WaveVector<T> {
        WaveVector::new(self.q, self.kz())
    }

    /// `|k| = k0 sqrt(1 + theta^4)`.
    pub fn magnitude(&self) -> T {
        let t2 = self.theta_param().powi(2);
        self.k0 * (T::one() + t2 * t2).sqrt()
    }
}

/// Circular polarization vector in the cylindrical frame `(u_rho, u_phi, u_z)`
/// of the transverse wave vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationVector<T> {
    pub helicity: Helicity,
    /// Azimuth of `q` fixing the cylindrical frame.
    pub varphi: T,
    pub cylindrical: [Complex<T>; 3],
}

impl<T: Scalar> PolarizationVector<T> {
    pub fn to_cartesian(&self) -> [Complex<T>; 3] {
        let (c, s) = (self.varphi.cos(), self.varphi.sin());
        let [er, ep, ez] = self.cylindrical;
        [er * c - ep * s, er * s + ep * c, ez]
    }

    pub fn norm_sqr(&self) -> T {
        self.cylindrical.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `|eps . k|` for a real Cartesian vector `k`.
    pub fn dot_real(&self, k: [T; 3]) -> Complex<T> {
        let e = self.to_cartesian();
        e[0] * k[0] + e[1] * k[1] + e[2] * k[2]
    }
}

/// Exact polarization vector of helicity `sigma` for the plane wave with
/// transverse wave number `q` at azimuth `varphi` on the `k0` shell.
pub fn polarization<T: Scalar>(helicity: Helicity, q: T, varphi: T, k0: T) -> Result<PolarizationVector<T>> {
    if !(k0 > T::zero()) || !(q >= T::zero()) {
        return Err(Error::Domain(format!("need k0 > 0 and q >= 0, got k0 = {k0}, q = {q}")));
    }
    let t2 = (q / (T::SQRT_2() * k0)).powi(2);
    let root = (T::one() + t2 * t2).sqrt();
    let sigma = T::from_int(helicity.sigma() as i64);
    let pre = Complex::from_polar(T::one() / T::SQRT_2(), -sigma * varphi);
    let i = Complex::new(T::zero(), T::one());
    let cylindrical = [
        pre * ((T::one() - t2) / root),
        pre * (-i * sigma),
        pre * (-(T::lit(2.0) * t2 / (T::one() + t2 * t2)).sqrt()),
    ];
    Ok(PolarizationVector {
        helicity,
        varphi,
        cylindrical,
    })
}

/// Relative tolerance on the captured energy fraction exceeding one.
pub const CAPTURE_OVERSHOOT_TOL: f64 = 1e-6;

/// Result of projecting a plane-wave spectrum onto Fourier-LG modes.
#[derive(Debug, Clone)]
pub struct LgProjection<T> {
    pub helicity: Helicity,
    pub k0: T,
    pub frame: BeamFrame<T>,
    /// Coefficients ordered by order, then by descending `l`.
    pub coefficients: Vec<(ModeIndex, Complex<T>)>,
    /// `int |alpha(q)|^2 d^2q` on the quadrature rule.
    pub input_energy: T,
    /// Captured energy fraction including all orders up to the index.
    pub captured: Vec<T>,
}

impl<T: Scalar> LgProjection<T> {
    pub fn coefficient(&self, mode: ModeIndex) -> Option<Complex<T>> {
        self.coefficients.iter().find(|(m, _)| *m == mode).map(|&(_, c)| c)
    }

    pub fn captured_fraction(&self) -> T {
        self.captured.last().copied().unwrap_or(T::zero())
    }

    /// `sum alpha_{l,p} FLG_{l,p}(q)`.
    pub fn resynthesize(&self, qx: T, qy: T) -> Complex<T> {
        self.coefficients
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &(m, c)| {
                acc + c * lg_momentum_xy(m, &self.frame, qx, qy)
            })
    }

    /// Relative L2 error of the resynthesis on the quadrature rule.
    pub fn residual<F>(&self, alpha: F, quad: &Quadrature2D<T>) -> T
    where
        F: Fn(T, T) -> Complex<T>,
    {
        let err = quad.integrate(|x, y| (alpha(x, y) - self.resynthesize(x, y)).norm_sqr());
        (err / self.input_energy).sqrt()
    }

    /// Classical amplitude set holding this single `(sigma, k0)` bin.
    pub fn into_amplitude_set(&self, dk0: T) -> Result<AmplitudeSet<T>> {
        let mut out = AmplitudeSet::new(AmplitudeKind::Classical, dk0)?;
        for &(mode, c) in &self.coefficients {
            out.insert(self.helicity, mode, self.k0, c)?;
        }
        Ok(out)
    }
}

/// `alpha_{sigma,l,p}(k0) = int d^2q conj(FLG_{l,p}(q)) alpha_sigma(q, k0)` for
/// all modes with `2p + |l| <= basis_orders`.
///
/// Fails with a quadrature-resolution error when the captured energy
/// fraction overshoots one, which happens only for an under-resolved rule.
pub fn amplitudes_to_lg<T, F>(
    alpha: F,
    helicity: Helicity,
    k0: T,
    frame: &BeamFrame<T>,
    basis_orders: u32,
    quad: &Quadrature2D<T>,
) -> Result<LgProjection<T>>
where
    T: Scalar,
    F: Fn(T, T) -> Complex<T> + Sync,
{
    if !(k0 > T::zero()) {
        return Err(Error::Domain(format!("k0 must be positive, got {k0}")));
    }
    let samples: Vec<Complex<T>> = quad.nodes.par_iter().map(|n| alpha(n[0], n[1])).collect();
    let mut energy = KahanSum::new();
    for (s, &w) in samples.iter().zip(&quad.weights) {
        energy.add(s.norm_sqr() * w);
    }
    let input_energy = energy.value();
    if !(input_energy > T::zero()) {
        return Err(Error::Domain(
            "input spectrum has no energy on the quadrature rule".into(),
        ));
    }
    let modes: Vec<ModeIndex> = (0..=basis_orders).flat_map(ModeIndex::of_order).collect();
    let coefficients: Vec<(ModeIndex, Complex<T>)> = modes
        .par_iter()
        .map(|&m| {
            let mut re = KahanSum::new();
            let mut im = KahanSum::new();
            for ((n, s), &w) in quad.nodes.iter().zip(&samples).zip(&quad.weights) {
                let v = lg_momentum_xy(m, frame, n[0], n[1]).conj() * *s * w;
                re.add(v.re);
                im.add(v.im);
            }
            (m, Complex::new(re.value(), im.value()))
        })
        .collect();
    let mut captured = Vec::with_capacity(basis_orders as usize + 1);
    let mut running = KahanSum::new();
    for order in 0..=basis_orders {
        for (m, c) in &coefficients {
            if m.order() == order {
                running.add(c.norm_sqr());
            }
        }
        captured.push(running.value() / input_energy);
    }
    let limit = T::one() + T::lit(CAPTURE_OVERSHOOT_TOL);
    let monotone = captured.windows(2).all(|w| w[1] >= w[0]);
    if let Some(bad) = captured
        .iter()
        .position(|&f| f > limit)
        .or(if monotone { None } else { Some(0) })
    {
        return Err(Error::QuadratureResolution(format!(
            "captured energy fraction {} at order {} is not a valid fraction; refine the rule",
            captured[bad], bad
        )));
    }
    Ok(LgProjection {
        helicity,
        k0,
        frame: *frame,
        coefficients,
        input_energy,
        captured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{build_quadrature, GaussLegendre};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion_k0(WaveVector::new([0.0, 0.0], 5.0)).unwrap(), 5.0);
        let v = dispersion_k0(WaveVector::new([3.0, 4.0], 0.0)).unwrap();
        assert!((v - 5.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(dispersion_k0(WaveVector::new([0.0, 0.0], 0.0f64)).is_err());
        assert!(dispersion_k0(WaveVector::new([0.0, 0.0], -1.0f64)).is_err());
    }

    #[test]
    fn dispersion_round_trip() {
        for &(qx, qy, kz) in &[
            (0.3f64, 0.1, 2.0),
            (1.0, -2.0, 0.5),
            (2.0, 0.0, -1.0),
            (0.0, 1e-3, 10.0),
        ] {
            let k = WaveVector::new([qx, qy], kz);
            let ray = ParaxialRay::from_wave_vector(k).unwrap();
            let q2 = qx * qx + qy * qy;
            assert!((kz - (ray.k0() - q2 / (2.0 * ray.k0()))).abs() < 1e-12);
            assert!((ray.kz() - kz).abs() < 1e-12);
            assert!((ray.magnitude() - k.magnitude()).abs() < 1e-12);
        }
    }

    #[test]
    fn dispersion_paraxial_limit() {
        let kz = 3.0f64;
        let k0 = dispersion_k0(WaveVector::new([1e-6 * kz, 0.0], kz)).unwrap();
        assert!((k0 / kz - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ray_magnitude() {
        for &(k0, q) in &[(1.0, 0.0), (2.0, 0.5), (1.0, 1.4)] {
            let ray = ParaxialRay::new(k0, [q * 0.6, q * 0.8]).unwrap();
            let t = q / (2f64.sqrt() * k0);
            assert!((ray.theta_param() - t).abs() < 1e-15);
            assert!((ray.magnitude() - k0 * (1.0 + t.powi(4)).sqrt()).abs() < 1e-12);
            assert!((ray.magnitude() - ray.wave_vector().magnitude()).abs() < 1e-12);
        }
        assert!(ParaxialRay::new(0.0f64, [0.0, 0.0]).is_err());
    }

    #[test]
    fn polarization_on_axis() {
        let e = polarization(Helicity::Right, 0.0, 0.0, 1.0).unwrap().to_cartesian();
        let expect = [
            Complex::new(FRAC_1_SQRT_2, 0.0),
            Complex::new(0.0, -FRAC_1_SQRT_2),
            Complex::new(0.0, 0.0),
        ];
        for i in 0..3 {
            assert!((e[i] - expect[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn polarization_unit_and_transverse() {
        for h in [Helicity::Right, Helicity::Left] {
            for &(q, varphi, k0) in &[(0.5f64, 0.3, 1.0), (0.0, 2.0, 3.0), (4.0, -1.0, 2.0), (50.0, 5.0, 1.0)] {
                let e = polarization(h, q, varphi, k0).unwrap();
                assert!((e.norm_sqr() - 1.0).abs() < 1e-12);
                let ray = ParaxialRay::new(k0, [q * varphi.cos(), q * varphi.sin()]).unwrap();
                let k = [ray.q()[0], ray.q()[1], ray.kz()];
                assert!(e.dot_real(k).norm() < 1e-12 * k0.max(q));
            }
            let a = polarization(h, 0.7, 0.4, 1.0).unwrap().to_cartesian();
            let b = polarization(h.opposite(), 0.7, 0.4, 1.0).unwrap().to_cartesian();
            let cross: Complex<f64> = (0..3).map(|i| a[i] * b[i].conj()).sum();
            assert!(cross.norm() < 1e-12);
        }
    }

    fn frame() -> BeamFrame<f64> {
        BeamFrame::new(1.0, 40.0).unwrap()
    }

    fn quad(f: &BeamFrame<f64>) -> Quadrature2D<f64> {
        build_quadrature(14.0 / f.w0(), 96).unwrap()
    }

    #[test]
    fn single_mode_spectrum() {
        let f = frame();
        let q = quad(&f);
        let m = ModeIndex::new(1, 0);
        let p = amplitudes_to_lg(|x, y| lg_momentum_xy(m, &f, x, y), Helicity::Right, 40.0, &f, 3, &q).unwrap();
        for &(mode, c) in &p.coefficients {
            let expect = if mode == m { 1.0 } else { 0.0 };
            assert!((c - expect).norm() < 1e-8, "{mode}: {c}");
        }
        assert!((p.captured_fraction() - 1.0).abs() < 1e-8);
        assert!(p.residual(|x, y| lg_momentum_xy(m, &f, x, y), &q) < 1e-6);
    }

    #[test]
    fn superposition_spectrum() {
        let f = frame();
        let q = quad(&f);
        let (a, b) = (ModeIndex::new(1, 0), ModeIndex::new(-1, 0));
        let alpha = |x: f64, y: f64| (lg_momentum_xy(a, &f, x, y) + lg_momentum_xy(b, &f, x, y)) * FRAC_1_SQRT_2;
        let p = amplitudes_to_lg(alpha, Helicity::Left, 40.0, &f, 2, &q).unwrap();
        assert!((p.coefficient(a).unwrap() - FRAC_1_SQRT_2).norm() < 1e-8);
        assert!((p.coefficient(b).unwrap() - FRAC_1_SQRT_2).norm() < 1e-8);
        let set = p.into_amplitude_set(1.0).unwrap();
        assert!(set.orbital_z().abs() < 1e-8);
        assert!((set.spin_z() + 1.0).abs() < 1e-8);
    }

    #[test]
    fn wide_gaussian_against_radial_oracle() {
        let f = frame();
        let wide = BeamFrame::new(2.0, 40.0).unwrap();
        let q = quad(&f);
        let g = ModeIndex::new(0, 0);
        let alpha = |x: f64, y: f64| lg_momentum_xy(g, &wide, x, y);
        let p = amplitudes_to_lg(alpha, Helicity::Right, 40.0, &f, 6, &q).unwrap();
        // 2 pi int rho drho conj(FLG_{0,p}(rho)) alpha(rho) on a dense 1D rule
        let rule = GaussLegendre::<f64>::new(400).unwrap();
        let (xs, ws) = rule.scaled(7.0);
        for pidx in 0..=3u32 {
            let m = ModeIndex::new(0, pidx);
            let oracle: Complex<f64> = xs
                .iter()
                .zip(&ws)
                .map(|(&x, &w)| {
                    let rho = x + 7.0;
                    2.0 * PI
                        * rho
                        * w
                        * crate::modes::lg_momentum(m, &f, rho, 0.0).conj()
                        * crate::modes::lg_momentum(g, &wide, rho, 0.0)
                })
                .sum();
            assert!((p.coefficient(m).unwrap() - oracle).norm() < 1e-8, "p={pidx}");
        }
        for &(mode, c) in &p.coefficients {
            if mode.l != 0 {
                assert!(c.norm() < 1e-10);
            }
        }
        // captured fraction grows towards one
        assert!(p.captured.windows(2).all(|w| w[1] >= w[0]));
        assert!(p.captured_fraction() > 0.9);
    }

    #[test]
    fn coarse_rule_is_reported() {
        // a spectrum far narrower than the node spacing sits on the central
        // node only, and its weight inflates the projection past unity
        let f = BeamFrame::new(20.0, 40.0).unwrap();
        let q = build_quadrature(14.0, 17).unwrap();
        let m = ModeIndex::new(0, 0);
        let r = amplitudes_to_lg(|x, y| lg_momentum_xy(m, &f, x, y), Helicity::Right, 40.0, &f, 2, &q);
        assert!(matches!(r, Err(Error::QuadratureResolution(_))));
    }
}
