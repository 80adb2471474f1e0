//! Discrete single-qubit phase space.
//!
//! A spin-1/2 is represented on four phase points with phase-point operators
//! `A_α = (1 + r_α·σ)/2`. For a pure state with Bloch vector `n` the Wigner
//! weights are `w_α = (1 + n·r_α)/4`.
//!
//! Sampling draws from the equal mixture of this phase-point set and its
//! inverted partner `{-r_α}`. For a spin polarized along a coordinate axis
//! this fixes the component along the axis and makes the two transverse
//! components independent fair `±1` signs, which is the initial
//! distribution used throughout the crate. The single-site moments of either
//! set alone are identical; only the on-site cross moment of the two
//! transverse components differs (it vanishes for the mixture, as it does
//! quantum mechanically).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::{self, Vec3};
use crate::{Error, Result};

/// One of the four discrete phase points, labelled `(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhasePoint {
    P00,
    P01,
    P10,
    P11,
}

impl PhasePoint {
    pub const ALL: [PhasePoint; 4] = [Self::P00, Self::P01, Self::P10, Self::P11];

    pub fn label(self) -> (u8, u8) {
        match self {
            Self::P00 => (0, 0),
            Self::P01 => (0, 1),
            Self::P10 => (1, 0),
            Self::P11 => (1, 1),
        }
    }

    pub fn vector(self) -> [i8; 3] {
        match self {
            Self::P00 => [1, 1, 1],
            Self::P01 => [-1, -1, 1],
            Self::P10 => [1, -1, -1],
            Self::P11 => [-1, 1, -1],
        }
    }

    fn vector_f64(self) -> Vec3 {
        self.vector().map(f64::from)
    }
}

/// Product-state polarization axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
    PlusZ,
    MinusZ,
}

impl Axis {
    pub fn unit(self) -> Vec3 {
        let (c, s) = self.component_and_sign();
        let mut v = [0.0; 3];
        v[c] = s;
        v
    }

    /// Index of the polarized component (0 = x, 1 = y, 2 = z) and its sign.
    pub fn component_and_sign(self) -> (usize, f64) {
        match self {
            Self::PlusX => (0, 1.0),
            Self::MinusX => (0, -1.0),
            Self::PlusY => (1, 1.0),
            Self::MinusY => (1, -1.0),
            Self::PlusZ => (2, 1.0),
            Self::MinusZ => (2, -1.0),
        }
    }

    /// Parses `+x`, `x`, `-z`, `−z` (unicode minus) and so on.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, rest) = if let Some(r) = s.strip_prefix('-') {
            (true, r)
        } else if let Some(r) = s.strip_prefix('\u{2212}') {
            (true, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (false, r)
        } else {
            (false, s)
        };
        Some(match (rest.to_ascii_lowercase().as_str(), neg) {
            ("x", false) => Self::PlusX,
            ("x", true) => Self::MinusX,
            ("y", false) => Self::PlusY,
            ("y", true) => Self::MinusY,
            ("z", false) => Self::PlusZ,
            ("z", true) => Self::MinusZ,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::PlusX => "+x",
            Self::MinusX => "-x",
            Self::PlusY => "+y",
            Self::MinusY => "-y",
            Self::PlusZ => "+z",
            Self::MinusZ => "-z",
        }
    }
}

const WEIGHT_TOL: f64 = 1e-12;

/// Wigner weights `(1 + n·r_α)/4` in label order (0,0), (0,1), (1,0), (1,1).
///
/// Fails for directions that are not unit vectors and for any direction
/// that produces a negative weight.
pub fn wigner_weights(direction: Vec3) -> Result<[f64; 4]> {
    let w = raw_weights(direction)?;
    for (k, &wk) in w.iter().enumerate() {
        if wk < -WEIGHT_TOL {
            return Err(Error::UnsupportedState {
                site: 0,
                direction,
                point: PhasePoint::ALL[k].label(),
                weight: wk,
            });
        }
    }
    Ok(w.map(|x| x.max(0.0)))
}

/// Weights before the nonnegativity gate. Always sum to one.
pub fn raw_weights(direction: Vec3) -> Result<[f64; 4]> {
    let len = math::norm(direction);
    if !((len - 1.0).abs() < 1e-9) {
        return Err(Error::Config(alloc::format!(
            "polarization must be a unit vector, got {direction:?} (|n| = {len})"
        )));
    }
    Ok(PhasePoint::ALL.map(|p| (1.0 + math::dot(direction, p.vector_f64())) / 4.0))
}

/// Classical spin vectors of `N` sites, stored as three component arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfiguration {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl SpinConfiguration {
    pub fn zeros(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; n],
            z: vec![0.0; n],
        }
    }

    /// Every site pointing along `direction`.
    pub fn uniform(n: usize, direction: Vec3) -> Self {
        Self {
            x: vec![direction[0]; n],
            y: vec![direction[1]; n],
            z: vec![direction[2]; n],
        }
    }

    pub fn from_vectors(spins: &[Vec3]) -> Self {
        Self {
            x: spins.iter().map(|s| s[0]).collect(),
            y: spins.iter().map(|s| s[1]).collect(),
            z: spins.iter().map(|s| s[2]).collect(),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn spin(&self, i: usize) -> Vec3 {
        [self.x[i], self.y[i], self.z[i]]
    }

    #[inline]
    pub fn set_spin(&mut self, i: usize, s: Vec3) {
        self.x[i] = s[0];
        self.y[i] = s[1];
        self.z[i] = s[2];
    }

    pub fn component(&self, c: usize) -> &[f64] {
        match c {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("spin component index {c} out of range"),
        }
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        match c {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("spin component index {c} out of range"),
        }
    }

    /// Collective spin `Σ_n s_n`.
    pub fn total(&self) -> Vec3 {
        [
            self.x.iter().sum(),
            self.y.iter().sum(),
            self.z.iter().sum(),
        ]
    }

    pub fn norm_sq(&self, i: usize) -> f64 {
        let s = self.spin(i);
        math::dot(s, s)
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(&self.y)
            .chain(&self.z)
            .all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for c in 0..3 {
            for (a, b) in self.component(c).iter().zip(other.component(c)) {
                m = m.max((a - b).abs());
            }
        }
        m
    }

    pub fn copy_from(&mut self, other: &Self) {
        self.x.copy_from_slice(&other.x);
        self.y.copy_from_slice(&other.y);
        self.z.copy_from_slice(&other.z);
    }
}

/// Per-site discrete Wigner function of a product initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteWignerSpec {
    weights: Vec<[f64; 4]>,
    axes: Vec<Axis>,
}

impl DiscreteWignerSpec {
    pub fn uniform(n: usize, axis: Axis) -> Result<Self> {
        Self::per_site(&vec![axis; n])
    }

    pub fn per_site(axes: &[Axis]) -> Result<Self> {
        let mut weights = Vec::with_capacity(axes.len());
        for (site, axis) in axes.iter().enumerate() {
            let w = wigner_weights(axis.unit()).map_err(|e| match e {
                Error::UnsupportedState {
                    direction,
                    point,
                    weight,
                    ..
                } => Error::UnsupportedState {
                    site,
                    direction,
                    point,
                    weight,
                },
                other => other,
            })?;
            weights.push(w);
        }
        Ok(Self {
            weights,
            axes: axes.to_vec(),
        })
    }

    pub fn n_spins(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self, site: usize) -> [f64; 4] {
        self.weights[site]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Sampling support of one site: distinct classical vectors with their
    /// probabilities, from the equal mixture of the standard and inverted
    /// phase-point sets.
    pub fn support(&self, site: usize) -> Vec<(Vec3, f64)> {
        let w = self.weights[site];
        let mut out: Vec<(Vec3, f64)> = Vec::with_capacity(4);
        let mut push = |v: Vec3, p: f64| {
            if p <= 0.0 {
                return;
            }
            if let Some(e) = out.iter_mut().find(|(u, _)| *u == v) {
                e.1 += p;
            } else {
                out.push((v, p));
            }
        };
        for (k, pt) in PhasePoint::ALL.iter().enumerate() {
            let r = pt.vector_f64();
            push(r, 0.5 * w[k]);
            // inverted set: point -r_α carries weight (1 - n·r_α)/4 = 1/2 - w_α
            push(r.map(|c| -c), 0.5 * (0.5 - w[k]));
        }
        out
    }
}

/// Draws one initial configuration. For an axis-polarized site, the
/// component along the axis equals its sign and the two transverse
/// components are independent fair `±1`.
pub fn sample_initial<R: Rng + ?Sized>(spec: &DiscreteWignerSpec, rng: &mut R) -> SpinConfiguration {
    let mut out = SpinConfiguration::zeros(spec.n_spins());
    sample_initial_into(spec, rng, &mut out);
    out
}

pub fn sample_initial_into<R: Rng + ?Sized>(
    spec: &DiscreteWignerSpec,
    rng: &mut R,
    out: &mut SpinConfiguration,
) {
    for (site, axis) in spec.axes.iter().enumerate() {
        let (c, sign) = axis.component_and_sign();
        let bits: u32 = rng.next_u32();
        let mut s = [0.0; 3];
        s[c] = sign;
        s[(c + 1) % 3] = if bits & 1 == 0 { 1.0 } else { -1.0 };
        s[(c + 2) % 3] = if bits & 2 == 0 { 1.0 } else { -1.0 };
        out.set_spin(site, s);
    }
}

/// How the initial distribution is enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Every support configuration (`4^N` for axis-polarized states).
    Full,
    /// Only the `2^N` assignments of `s^z`; the remaining transverse sign of
    /// each site is averaged analytically downstream. Requires every site
    /// to be polarized along ±x or ±y.
    Longitudinal,
}

/// Exhaustive weighted listing of initial configurations.
#[derive(Debug, Clone)]
pub struct Enumeration {
    supports: Vec<Vec<(Vec3, f64)>>,
    mode: EnumerationMode,
    total: u64,
}

impl Enumeration {
    pub fn new(spec: &DiscreteWignerSpec, mode: EnumerationMode, cap: u64) -> Result<Self> {
        let n = spec.n_spins();
        let supports: Vec<Vec<(Vec3, f64)>> = match mode {
            EnumerationMode::Full => (0..n).map(|i| spec.support(i)).collect(),
            EnumerationMode::Longitudinal => {
                let mut v = Vec::with_capacity(n);
                for (site, axis) in spec.axes.iter().enumerate() {
                    let (c, sign) = axis.component_and_sign();
                    if c == 2 {
                        return Err(Error::Config(alloc::format!(
                            "longitudinal enumeration needs transverse polarizations; site {site} is {}",
                            axis.as_str()
                        )));
                    }
                    let mut up = [0.0; 3];
                    up[c] = sign;
                    up[2] = 1.0;
                    let mut down = up;
                    down[2] = -1.0;
                    v.push(vec![(up, 0.5), (down, 0.5)]);
                }
                v
            }
        };
        let size: f64 = supports.iter().map(|s| s.len() as f64).product();
        if size > cap as f64 {
            return Err(Error::EnumerationTooLarge {
                configurations: size,
                cap,
            });
        }
        Ok(Self {
            total: size as u64,
            supports,
            mode,
        })
    }

    pub fn mode(&self) -> EnumerationMode {
        self.mode
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn n_spins(&self) -> usize {
        self.supports.len()
    }

    /// Decodes configuration `index` (mixed radix, site 0 fastest) into
    /// `out`, returning its weight.
    pub fn configuration_into(&self, mut index: u64, out: &mut SpinConfiguration) -> f64 {
        let mut w = 1.0;
        for (site, sup) in self.supports.iter().enumerate() {
            let k = sup.len() as u64;
            let (v, p) = sup[(index % k) as usize];
            index /= k;
            out.set_spin(site, v);
            w *= p;
        }
        w
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpinConfiguration, f64)> + '_ {
        (0..self.total).map(move |i| {
            let mut c = SpinConfiguration::zeros(self.n_spins());
            let w = self.configuration_into(i, &mut c);
            (c, w)
        })
    }
}

/// Convenience wrapper for [`Enumeration::new`].
pub fn enumerate_initial(spec: &DiscreteWignerSpec, mode: EnumerationMode, cap: u64) -> Result<Enumeration> {
    Enumeration::new(spec, mode, cap)
}
