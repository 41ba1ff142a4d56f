//! Special functions and quadrature rules.
//!
//! Associated Laguerre polynomials are evaluated with the upward three-term
//! recurrence; the explicit alternating factorial sum loses all significant
//! digits to cancellation once `p` exceeds about ten. Factorials entering
//! mode normalizations are taken through `ln_gamma` so that indices up to 64
//! never overflow.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Associated Laguerre polynomial `L_p^alpha(x)`.
///
/// Negative `p` or `alpha` is a domain error. The polynomial is defined for
/// every real `x`; physical callers pass `x >= 0`.
pub fn laguerre<T: Scalar>(p: i32, alpha: i32, x: T) -> Result<T> {
    if p < 0 || alpha < 0 {
        return Err(Error::Domain(format!(
            "laguerre requires p >= 0 and alpha >= 0, got p={p}, alpha={alpha}"
        )));
    }
    Ok(laguerre_poly(p as u32, alpha as u32, x))
}

/// Unchecked recurrence evaluation of `L_p^alpha(x)`.
pub fn laguerre_poly<T: Scalar>(p: u32, alpha: u32, x: T) -> T {
    let a = T::from_int(alpha as i64);
    let mut prev = T::one();
    if p == 0 {
        return prev;
    }
    let mut cur = T::one() + a - x;
    for k in 1..p {
        let kf = T::from_int(k as i64);
        let next = ((kf + kf + T::one() + a - x) * cur - (kf + a) * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite<T: Scalar>(n: u32, x: T) -> T {
    let two = T::lit(2.0);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = two * x;
    for k in 1..n {
        let next = two * x * cur - two * T::from_int(k as i64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_int(i as i64));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// `ln(n!)`.
#[inline]
pub fn ln_factorial<T: Scalar>(n: u32) -> T {
    if n < 2 {
        return T::zero();
    }
    ln_gamma(T::from_int(n as i64 + 1))
}

/// Log of the position-space LG prefactor `sqrt(2 p! / (pi (|l|+p)!))`.
pub fn log_norm_lg<T: Scalar>(l: i32, p: u32) -> T {
    let a = l.unsigned_abs();
    let half = T::lit(0.5);
    half * (T::lit(2.0).ln() + ln_factorial::<T>(p) - T::PI().ln() - ln_factorial::<T>(a + p))
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// One-dimensional Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("Gauss-Legendre rule needs at least one node".into()));
        }
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        let eps = T::epsilon() * T::lit(4.0);
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = T::lit((std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos());
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= eps {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Ok(Self { nodes, weights })
    }

    /// Nodes and weights mapped onto `[-half, half]`.
    pub fn scaled(&self, half: T) -> (Vec<T>, Vec<T>) {
        (
            self.nodes.iter().map(|&x| x * half).collect(),
            self.weights.iter().map(|&w| w * half).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// One-dimensional Gauss-Hermite rule for the weight `exp(-x^2)` on the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussHermite<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("Gauss-Hermite rule needs at least one node".into()));
        }
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::from_int(n as i64);
        let eps = T::epsilon() * T::lit(8.0);
        let pim4 = T::PI().powf(T::lit(-0.25));
        let mut z = T::zero();
        for i in 0..n.div_ceil(2) {
            // standard asymptotic starting points for the largest roots
            z = match i {
                0 => {
                    (T::lit(2.0) * nf + T::one()).sqrt()
                        - T::lit(1.85575) * (T::lit(2.0) * nf + T::one()).powf(T::lit(-1.0 / 6.0))
                }
                1 => z - T::lit(1.14) * nf.powf(T::lit(0.426)) / z,
                2 => T::lit(1.86) * z - T::lit(0.86) * nodes[0],
                3 => T::lit(1.91) * z - T::lit(0.91) * nodes[1],
                _ => T::lit(2.0) * z - nodes[i - 2],
            };
            let mut pp = T::one();
            for _ in 0..100 {
                // orthonormal Hermite recurrence
                let mut p1 = pim4;
                let mut p2 = T::zero();
                for j in 1..=n {
                    let jf = T::from_int(j as i64);
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (T::lit(2.0) / jf).sqrt() * p2 - ((jf - T::one()) / jf).sqrt() * p3;
                }
                pp = (T::lit(2.0) * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() <= eps * z.abs().max(T::one()) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            let w = T::lit(2.0) / (pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_int(k as i64);
        let p2 = ((kf + kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_int(n as i64);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Tensor-product Gauss-Legendre rule on the square `[-R, R]^2`.
#[derive(Debug, Clone)]
pub struct Quadrature2D<T> {
    pub nodes: Vec<[T; 2]>,
    pub weights: Vec<T>,
    pub domain_radius: T,
    nodes_per_axis: usize,
}

/// Smallest accepted number of nodes per axis.
pub const MIN_NODES_PER_AXIS: usize = 16;

/// Builds the tensor-product rule used for every 2D overlap integral.
pub fn build_quadrature<T: Scalar>(domain_radius: T, nodes_per_axis: usize) -> Result<Quadrature2D<T>> {
    if nodes_per_axis < MIN_NODES_PER_AXIS {
        return Err(Error::Config(format!(
            "nodes_per_axis must be >= {MIN_NODES_PER_AXIS}, got {nodes_per_axis}"
        )));
    }
    if !(domain_radius > T::zero()) || !domain_radius.is_finite() {
        return Err(Error::Config(format!(
            "domain radius must be positive and finite, got {domain_radius}"
        )));
    }
    let rule = GaussLegendre::<T>::new(nodes_per_axis)?;
    let (xs, ws) = rule.scaled(domain_radius);
    let mut nodes = Vec::with_capacity(nodes_per_axis * nodes_per_axis);
    let mut weights = Vec::with_capacity(nodes_per_axis * nodes_per_axis);
    for (&y, &wy) in xs.iter().zip(&ws) {
        for (&x, &wx) in xs.iter().zip(&ws) {
            nodes.push([x, y]);
            weights.push(wx * wy);
        }
    }
    Ok(Quadrature2D {
        nodes,
        weights,
        domain_radius,
        nodes_per_axis,
    })
}

/// Truncation radius `6 w0 sqrt(N+1)` for order-`N` integrands.
pub fn default_domain_radius<T: Scalar>(w0: T, order: u32) -> T {
    T::lit(6.0) * w0 * T::from_int(order as i64 + 1).sqrt()
}

impl<T: Scalar> Quadrature2D<T> {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn integrate<F: Fn(T, T) -> T>(&self, f: F) -> T {
        let mut acc = KahanSum::new();
        for (n, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(n[0], n[1]));
        }
        acc.value()
    }

    pub fn integrate_complex<F: Fn(T, T) -> Complex<T>>(&self, f: F) -> Complex<T> {
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for (n, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(n[0], n[1]);
            re.add(w * v.re);
            im.add(w * v.im);
        }
        Complex::new(re.value(), im.value())
    }
}
