//! Eigenvalue/multiplicity data of positive operators `H = −Δ + m²` on model
//! geometries, or supplied explicitly.
//!
//! Conventions: the circle of radius `r` has `λ = k²/r² + m²` (mult 2 for
//! `k ≥ 1`); the flat torus with periods `L_i` has `λ = Σ (2π z_i/L_i)² + m²`
//! over integer vectors; the round 2-sphere of radius `r` has
//! `λ = l(l+1)/r² + m²` with multiplicity `2l + 1`.
//!
//! Every spectrum carries a growth bound `N(Λ) ≤ C (1 + Λ)^{n/2}` on its
//! counting function, which the trace module uses to certify tails.

use std::fmt;
use std::path::Path;
use std::sync::{Arc, RwLock};

use crate::error::{precondition, Error, Result};

/// Upper limit on the number of raw lattice points generated for one cutoff.
pub const MAX_LATTICE_POINTS: usize = 20_000_000;
/// Relative tolerance for folding numerically equal eigenvalues.
pub const FOLD_TOL: f64 = 1e-12;

/// One distinct eigenvalue and its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub lambda: f64,
    pub mult: u64,
}

impl Level {
    pub fn omega(&self) -> f64 {
        self.lambda.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    Explicit,
    Circle { radius: f64 },
    FlatTorus { lengths: Vec<f64> },
    Sphere2 { radius: f64 },
}

/// `N(Λ) ≤ c (1 + Λ)^{dim/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    pub c: f64,
    pub dim: u32,
}

impl GrowthBound {
    pub fn bound(&self, lambda: f64) -> f64 {
        self.c * (1.0 + lambda).powf(0.5 * self.dim as f64)
    }
}

/// Periods of a flat lattice spectrum, for theta-function identities.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub mass_sq: f64,
    pub lengths: Vec<f64>,
}

/// Eigenvalue count at a chemical potential: `below` counts `ω < μ`, `at`
/// counts `ω = μ` (each weighted ½ in [`Count::value`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count {
    pub below: u64,
    pub at: u64,
}

impl Count {
    pub fn value(&self) -> f64 {
        self.below as f64 + 0.5 * self.at as f64
    }
}

#[derive(Debug)]
struct Cache {
    cutoff: f64,
    levels: Arc<Vec<Level>>,
}

/// A positive spectrum.
#[derive(Debug)]
pub struct Spectrum {
    dim: u32,
    mass_sq: f64,
    kind: SpectrumKind,
    growth: GrowthBound,
    // explicit spectra are complete; generated ones are extended on demand
    cache: RwLock<Cache>,
}

impl Clone for Spectrum {
    fn clone(&self) -> Self {
        let cache = self.cache.read().unwrap_or_else(|e| e.into_inner());
        Spectrum {
            dim: self.dim,
            mass_sq: self.mass_sq,
            kind: self.kind.clone(),
            growth: self.growth,
            cache: RwLock::new(Cache {
                cutoff: cache.cutoff,
                levels: cache.levels.clone(),
            }),
        }
    }
}

/// A prefix of the level list: every level with `λ ≤ cutoff`.
#[derive(Debug, Clone)]
pub struct Levels {
    all: Arc<Vec<Level>>,
    len: usize,
}

impl std::ops::Deref for Levels {
    type Target = [Level];
    fn deref(&self) -> &[Level] {
        &self.all[..self.len]
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(precondition(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_mass(mass_sq: f64) -> Result<()> {
    if !(mass_sq > 0.0 && mass_sq.is_finite()) {
        return Err(precondition(format!(
            "mass_sq = {mass_sq} leaves a zero mode; the operator must be positive (lambda_1 > 0)"
        )));
    }
    Ok(())
}

/// Sorts and merges eigenvalues equal to relative precision [`FOLD_TOL`].
fn fold(mut raw: Vec<(f64, u64)>) -> Vec<Level> {
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Level> = Vec::new();
    for (lambda, mult) in raw {
        match out.last_mut() {
            Some(last) if lambda - last.lambda <= FOLD_TOL * lambda.abs() => last.mult += mult,
            _ => out.push(Level { lambda, mult }),
        }
    }
    out
}

impl Spectrum {
    fn generated(dim: u32, mass_sq: f64, kind: SpectrumKind, growth: GrowthBound) -> Result<Self> {
        let s = Spectrum {
            dim,
            mass_sq,
            kind,
            growth,
            cache: RwLock::new(Cache {
                cutoff: f64::NEG_INFINITY,
                levels: Arc::new(Vec::new()),
            }),
        };
        // the lowest level is always needed
        s.levels(mass_sq)?;
        Ok(s)
    }

    /// Circle of radius `r`: `λ = k²/r² + m²`.
    pub fn circle(radius: f64, mass_sq: f64) -> Result<Self> {
        check_positive("circle radius", radius)?;
        check_mass(mass_sq)?;
        let growth = GrowthBound { c: 2.0 * radius + 1.0, dim: 1 };
        Self::generated(1, mass_sq, SpectrumKind::Circle { radius }, growth)
    }

    /// Flat torus `R^d / (L_1 Z × … × L_d Z)`.
    pub fn flat_torus(lengths: &[f64], mass_sq: f64) -> Result<Self> {
        if lengths.is_empty() {
            return Err(precondition("flat torus needs at least one period"));
        }
        for &l in lengths {
            check_positive("torus period", l)?;
        }
        check_mass(mass_sq)?;
        let c = lengths.iter().map(|l| l / std::f64::consts::PI + 1.0).product();
        let dim = lengths.len() as u32;
        let kind = SpectrumKind::FlatTorus { lengths: lengths.to_vec() };
        Self::generated(dim, mass_sq, kind, GrowthBound { c, dim })
    }

    /// Round 2-sphere of radius `r`: `λ = l(l+1)/r² + m²`, multiplicity `2l+1`.
    pub fn sphere2(radius: f64, mass_sq: f64) -> Result<Self> {
        check_positive("sphere radius", radius)?;
        check_mass(mass_sq)?;
        let growth = GrowthBound { c: (radius + 1.0).powi(2), dim: 2 };
        Self::generated(2, mass_sq, SpectrumKind::Sphere2 { radius }, growth)
    }

    /// A finite list of levels in dimension `dim`, with growth constant `c`.
    /// The list is taken to be the complete spectrum.
    pub fn explicit(dim: u32, growth_c: f64, levels: Vec<Level>) -> Result<Self> {
        if dim == 0 {
            return Err(precondition("dimension must be positive"));
        }
        check_positive("growth constant", growth_c)?;
        if levels.is_empty() {
            return Err(precondition("explicit spectrum is empty"));
        }
        for l in &levels {
            if !(l.lambda > 0.0 && l.lambda.is_finite()) {
                return Err(precondition(format!(
                    "eigenvalue {} violates positivity (lambda_1 > 0)",
                    l.lambda
                )));
            }
            if l.mult == 0 {
                return Err(precondition(format!("eigenvalue {} has zero multiplicity", l.lambda)));
            }
        }
        let levels = fold(levels.into_iter().map(|l| (l.lambda, l.mult)).collect());
        let growth = GrowthBound { c: growth_c, dim };
        let mut count = 0u64;
        for l in &levels {
            count += l.mult;
            if count as f64 > growth.bound(l.lambda) * (1.0 + 1e-12) {
                return Err(precondition(format!(
                    "counting function N({}) = {count} exceeds growth bound {}",
                    l.lambda,
                    growth.bound(l.lambda)
                )));
            }
        }
        Ok(Spectrum {
            dim,
            mass_sq: 0.0,
            kind: SpectrumKind::Explicit,
            growth,
            cache: RwLock::new(Cache {
                cutoff: f64::INFINITY,
                levels: Arc::new(levels),
            }),
        })
    }

    /// Parses the explicit-spectrum text format: a header line
    /// `dim=<n> growthC=<C>` followed by `lambda multiplicity` lines; `#`
    /// starts a comment.
    pub fn parse_explicit(text: &str) -> Result<Self> {
        let mut header: Option<(u32, f64)> = None;
        let mut levels = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: {raw:?}", lineno + 1));
            if header.is_none() {
                let mut dim = None;
                let mut c = None;
                for tok in line.split_whitespace() {
                    match tok.split_once('=') {
                        Some(("dim", v)) => dim = Some(v.parse::<u32>().map_err(|_| bad("bad dim"))?),
                        Some(("growthC", v)) => c = Some(v.parse::<f64>().map_err(|_| bad("bad growthC"))?),
                        _ => return Err(bad("expected header `dim=<n> growthC=<C>`")),
                    }
                }
                match (dim, c) {
                    (Some(d), Some(c)) => header = Some((d, c)),
                    _ => return Err(bad("header needs both dim and growthC")),
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let lambda = it
                .next()
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| bad("bad eigenvalue"))?;
            let mult = it
                .next()
                .and_then(|v| v.parse::<u64>().ok())
                .ok_or_else(|| bad("bad multiplicity"))?;
            if it.next().is_some() {
                return Err(bad("trailing fields"));
            }
            levels.push(Level { lambda, mult });
        }
        let (dim, c) = header.ok_or_else(|| Error::Parse("missing header line".into()))?;
        Self::explicit(dim, c, levels)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_explicit(&text)
    }

    /// Adds `mass_sq` to every eigenvalue of an explicit spectrum.
    pub fn with_mass_shift(self, mass_sq: f64) -> Result<Self> {
        if mass_sq == 0.0 {
            return Ok(self);
        }
        if self.kind != SpectrumKind::Explicit {
            return Err(precondition("mass shift only applies to explicit spectra"));
        }
        if !(mass_sq >= 0.0 && mass_sq.is_finite()) {
            return Err(precondition(format!("mass_sq must be nonnegative, got {mass_sq}")));
        }
        let levels: Vec<Level> = self
            .levels(f64::INFINITY)?
            .iter()
            .map(|l| Level { lambda: l.lambda + mass_sq, mult: l.mult })
            .collect();
        // shifting only lowers N(Λ) at fixed Λ, so the same bound holds
        let mut s = Self::explicit(self.dim, self.growth.c, levels)?;
        s.mass_sq = mass_sq;
        Ok(s)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn mass_sq(&self) -> f64 {
        self.mass_sq
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn growth(&self) -> GrowthBound {
        self.growth
    }

    /// True when the whole spectrum is known (explicit lists).
    pub fn is_finite(&self) -> bool {
        self.kind == SpectrumKind::Explicit
    }

    /// Smallest eigenvalue λ_1.
    pub fn lambda_min(&self) -> f64 {
        let cache = self.cache.read().unwrap_or_else(|e| e.into_inner());
        cache.levels[0].lambda
    }

    /// ω_1 = √λ_1.
    pub fn omega_min(&self) -> f64 {
        self.lambda_min().sqrt()
    }

    /// Period data for flat spectra (circle and torus).
    pub fn lattice(&self) -> Option<Lattice> {
        match &self.kind {
            SpectrumKind::Circle { radius } => Some(Lattice {
                mass_sq: self.mass_sq,
                lengths: vec![2.0 * std::f64::consts::PI * radius],
            }),
            SpectrumKind::FlatTorus { lengths } => Some(Lattice {
                mass_sq: self.mass_sq,
                lengths: lengths.clone(),
            }),
            _ => None,
        }
    }

    /// All levels with `λ ≤ cutoff`, in increasing order.
    pub fn levels(&self, cutoff: f64) -> Result<Levels> {
        {
            let cache = self.cache.read().unwrap_or_else(|e| e.into_inner());
            if cache.cutoff >= cutoff {
                return Ok(Self::prefix(&cache.levels, cutoff));
            }
        }
        let mut cache = self.cache.write().unwrap_or_else(|e| e.into_inner());
        if cache.cutoff < cutoff {
            // grow geometrically so repeated requests stay cheap
            let target = if cache.cutoff.is_finite() {
                cutoff.max(self.mass_sq + 2.0 * (cache.cutoff - self.mass_sq).max(1.0))
            } else {
                cutoff
            };
            let levels = self.generate(target)?;
            cache.levels = Arc::new(levels);
            cache.cutoff = target;
        }
        Ok(Self::prefix(&cache.levels, cutoff))
    }

    fn prefix(all: &Arc<Vec<Level>>, cutoff: f64) -> Levels {
        let len = all.partition_point(|l| l.lambda <= cutoff);
        Levels { all: all.clone(), len }
    }

    /// Levels up to slightly above `cutoff`, so a fold group is never split.
    fn generate(&self, cutoff: f64) -> Result<Vec<Level>> {
        let padded = cutoff * (1.0 + 1e-9);
        let room = padded - self.mass_sq;
        let mut raw: Vec<(f64, u64)> = Vec::new();
        match &self.kind {
            SpectrumKind::Explicit => unreachable!("explicit spectra are complete"),
            SpectrumKind::Circle { radius } => {
                if room >= 0.0 {
                    let kmax = (radius * room.sqrt()).floor() as u64;
                    if kmax as usize > MAX_LATTICE_POINTS {
                        return Err(cap_error(cutoff));
                    }
                    let r2 = radius * radius;
                    for k in 0..=kmax {
                        let k2 = (k * k) as f64;
                        let lambda = k2 / r2 + self.mass_sq;
                        raw.push((lambda, if k == 0 { 1 } else { 2 }));
                    }
                }
            }
            SpectrumKind::Sphere2 { radius } => {
                let r2 = radius * radius;
                let mut l = 0u64;
                loop {
                    let lambda = (l * (l + 1)) as f64 / r2 + self.mass_sq;
                    if lambda > padded {
                        break;
                    }
                    raw.push((lambda, 2 * l + 1));
                    l += 1;
                    if l as usize > MAX_LATTICE_POINTS {
                        return Err(cap_error(cutoff));
                    }
                }
            }
            SpectrumKind::FlatTorus { lengths } => {
                if room >= 0.0 {
                    let kappa: Vec<f64> = lengths
                        .iter()
                        .map(|l| (2.0 * std::f64::consts::PI / l).powi(2))
                        .collect();
                    let estimate: f64 = kappa
                        .iter()
                        .map(|k| (room / k).sqrt().floor() + 1.0)
                        .product();
                    if estimate > MAX_LATTICE_POINTS as f64 {
                        return Err(cap_error(cutoff));
                    }
                    torus_points(&kappa, 0, 0.0, 1, room, &mut raw);
                    for p in raw.iter_mut() {
                        p.0 += self.mass_sq;
                    }
                }
            }
        }
        let mut levels = fold(raw);
        levels.retain(|l| l.lambda <= padded);
        Ok(levels)
    }

    /// Number of states with `ω < μ` and with `ω = μ` (to relative 1e-12).
    pub fn counting(&self, mu: f64) -> Result<Count> {
        if !(mu > 0.0) {
            return Ok(Count { below: 0, at: 0 });
        }
        let tol = 1e-12 * mu;
        let hi = mu + tol;
        let levels = self.levels(hi * hi)?;
        let mut count = Count { below: 0, at: 0 };
        for l in levels.iter() {
            let w = l.omega();
            if (w - mu).abs() <= tol {
                count.at += l.mult;
            } else if w < mu {
                count.below += l.mult;
            }
        }
        Ok(count)
    }
}

fn cap_error(cutoff: f64) -> Error {
    Error::Tolerance(format!(
        "eigenvalue cutoff {cutoff:e} needs more than {MAX_LATTICE_POINTS} lattice points"
    ))
}

/// Nonnegative lattice vectors with `Σ κ_i z_i² ≤ room`, each standing for
/// its `2^{#nonzero}` sign images.
fn torus_points(kappa: &[f64], axis: usize, acc: f64, weight: u64, room: f64, out: &mut Vec<(f64, u64)>) {
    if axis == kappa.len() {
        out.push((acc, weight));
        return;
    }
    let k = kappa[axis];
    let mut z = 0u64;
    loop {
        let v = acc + k * (z * z) as f64;
        if v > room {
            break;
        }
        let w = if z == 0 { weight } else { 2 * weight };
        torus_points(kappa, axis + 1, v, w, room, out);
        z += 1;
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpectrumKind::Explicit => write!(f, "explicit(dim={}, growthC={})", self.dim, self.growth.c),
            SpectrumKind::Circle { radius } => write!(f, "circle(r={radius}, m2={})", self.mass_sq),
            SpectrumKind::FlatTorus { lengths } => write!(f, "flat_torus(L={lengths:?}, m2={})", self.mass_sq),
            SpectrumKind::Sphere2 { radius } => write!(f, "sphere2(r={radius}, m2={})", self.mass_sq),
        }
    }
}
