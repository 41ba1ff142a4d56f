//! Angular momentum and energy of paraxial beams expanded over
//! `(sigma, l, p, k0)`, both for classical amplitudes and one-photon states.
//!
//! The `k0` continuum is discretised into bins of width `dk0`; integrals
//! over `k0` become sums weighted by `dk0`. Units: `hbar = c = 1` unless a
//! speed of light is passed explicitly.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::ModeIndex;
use crate::poincare::SphereState;
use crate::scalar::Scalar;

/// Circular polarization label `sigma = +1` (right) or `-1` (left).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Helicity {
    Left,
    Right,
}

impl Helicity {
    pub fn sigma(self) -> i32 {
        match self {
            Helicity::Right => 1,
            Helicity::Left => -1,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Helicity::Right => Helicity::Left,
            Helicity::Left => Helicity::Right,
        }
    }

    pub fn from_sigma(sigma: i32) -> Result<Self> {
        match sigma {
            1 => Ok(Helicity::Right),
            -1 => Ok(Helicity::Left),
            other => Err(Error::Domain(format!("sigma must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeKind {
    Classical,
    OnePhoton,
}

/// Tolerance on the one-photon normalization `sum |C|^2 dk0 = 1`.
pub const ONE_PHOTON_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeEntry<T> {
    pub helicity: Helicity,
    pub mode: ModeIndex,
    pub k0: T,
    pub amplitude: Complex<T>,
}

impl<T: Scalar> AmplitudeEntry<T> {
    fn same_key(&self, other: &Self) -> bool {
        self.helicity == other.helicity && self.mode == other.mode && self.k0 == other.k0
    }

    fn weight(&self, dk0: T) -> T {
        self.amplitude.norm_sqr() * dk0
    }
}

/// Amplitudes `alpha_{sigma,l,p}(k0)` or one-photon coefficients `C_{sigma,l,p}(k0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSet<T> {
    kind: AmplitudeKind,
    dk0: T,
    entries: Vec<AmplitudeEntry<T>>,
}

impl<T: Scalar> AmplitudeSet<T> {
    pub fn new(kind: AmplitudeKind, dk0: T) -> Result<Self> {
        if !(dk0 > T::zero()) || !dk0.is_finite() {
            return Err(Error::Domain(format!("k0 bin width must be positive, got {dk0}")));
        }
        Ok(Self {
            kind,
            dk0,
            entries: Vec::new(),
        })
    }

    pub fn kind(&self) -> AmplitudeKind {
        self.kind
    }

    pub fn dk0(&self) -> T {
        self.dk0
    }

    pub fn entries(&self) -> &[AmplitudeEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts or replaces the amplitude of one `(sigma, l, p, k0)` cell.
    pub fn insert(&mut self, helicity: Helicity, mode: ModeIndex, k0: T, amplitude: Complex<T>) -> Result<()> {
        if !(k0 > T::zero()) || !k0.is_finite() {
            return Err(Error::Domain(format!("k0 bin must be positive, got {k0}")));
        }
        let entry = AmplitudeEntry {
            helicity,
            mode,
            k0,
            amplitude,
        };
        match self.entries.iter_mut().find(|e| e.same_key(&entry)) {
            Some(slot) => *slot = entry,
            None => self.entries.push(entry),
        }
        Ok(())
    }

    /// `sum |amplitude|^2 dk0`.
    pub fn total_weight(&self) -> T {
        self.entries.iter().map(|e| e.weight(self.dk0)).sum()
    }

    /// Checks the one-photon normalization; classical sets always pass.
    pub fn validate(&self) -> Result<()> {
        if self.kind == AmplitudeKind::OnePhoton {
            let norm = self.total_weight().to_f64_lossy();
            if !((norm - 1.0).abs() <= ONE_PHOTON_NORM_TOL) {
                return Err(Error::Consistency {
                    what: "one-photon normalization".into(),
                    divergence: (norm - 1.0).abs(),
                    limit: ONE_PHOTON_NORM_TOL,
                });
            }
        }
        Ok(())
    }

    /// `L_z = sum l |alpha|^2 dk0`, in units of hbar for one-photon sets.
    pub fn orbital_z(&self) -> T {
        self.entries
            .iter()
            .map(|e| T::from_int(e.mode.l as i64) * e.weight(self.dk0))
            .sum()
    }

    /// `S_z = sum sigma |alpha|^2 dk0`.
    pub fn spin_z(&self) -> T {
        self.entries
            .iter()
            .map(|e| T::from_int(e.helicity.sigma() as i64) * e.weight(self.dk0))
            .sum()
    }

    /// `H_P = sum c k0 |alpha|^2 dk0` for classical amplitudes.
    pub fn paraxial_energy(&self, c: T) -> Result<T> {
        if self.kind != AmplitudeKind::Classical {
            return Err(Error::Kind(
                "paraxial energy is defined for classical amplitude sets only".into(),
            ));
        }
        Ok(self.entries.iter().map(|e| c * e.k0 * e.weight(self.dk0)).sum())
    }

    /// `L_z / H_P`, the OAM per photon in the semiclassical picture.
    pub fn oam_per_photon(&self, c: T) -> Result<T> {
        let energy = self.paraxial_energy(c)?;
        if energy == T::zero() {
            return Err(Error::Domain("OAM per photon of an empty beam".into()));
        }
        Ok(self.orbital_z() / energy)
    }

    /// Multiplies every amplitude by `e^{i phase}`.
    pub fn with_global_phase(&self, phase: T) -> Self {
        let rot = Complex::from_polar(T::one(), phase);
        let mut out = self.clone();
        for e in &mut out.entries {
            e.amplitude *= rot;
        }
        out
    }

    /// Union of two sets with disjoint support.
    pub fn merged(&self, other: &Self) -> Result<Self> {
        if self.kind != other.kind || self.dk0 != other.dk0 {
            return Err(Error::Kind(
                "merging amplitude sets needs equal kind and bin width".into(),
            ));
        }
        let mut out = self.clone();
        for e in &other.entries {
            if out.entries.iter().any(|x| x.same_key(e)) {
                return Err(Error::Domain(format!("overlapping support at {} k0={}", e.mode, e.k0)));
            }
            out.entries.push(*e);
        }
        Ok(out)
    }

    /// One-photon state of a single `(sigma, k0)` bin carrying a sphere state.
    pub fn from_sphere_state(state: &SphereState<T>, helicity: Helicity, k0: T, dk0: T) -> Result<Self> {
        let mut out = Self::new(AmplitudeKind::OnePhoton, dk0)?;
        let scale = T::one() / dk0.sqrt();
        for (mode, c) in state.components() {
            out.insert(helicity, mode, k0, c * scale)?;
        }
        out.validate()?;
        Ok(out)
    }

    pub fn to_doc(&self) -> AmplitudeSetDoc {
        AmplitudeSetDoc {
            kind: self.kind,
            dk0: self.dk0.to_f64_lossy(),
            entries: self
                .entries
                .iter()
                .map(|e| AmplitudeEntryDoc {
                    sigma: e.helicity.sigma(),
                    l: e.mode.l,
                    p: e.mode.p,
                    k0: e.k0.to_f64_lossy(),
                    re: e.amplitude.re.to_f64_lossy(),
                    im: e.amplitude.im.to_f64_lossy(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &AmplitudeSetDoc) -> Result<Self> {
        let mut out = Self::new(doc.kind, T::lit(doc.dk0))?;
        for e in &doc.entries {
            out.insert(
                Helicity::from_sigma(e.sigma)?,
                ModeIndex::new(e.l, e.p),
                T::lit(e.k0),
                Complex::new(T::lit(e.re), T::lit(e.im)),
            )?;
        }
        out.validate()?;
        Ok(out)
    }
}

/// JSON form of an [`AmplitudeSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSetDoc {
    pub kind: AmplitudeKind,
    pub dk0: f64,
    pub entries: Vec<AmplitudeEntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEntryDoc {
    pub sigma: i32,
    pub l: i32,
    pub p: u32,
    pub k0: f64,
    pub re: f64,
    pub im: f64,
}
