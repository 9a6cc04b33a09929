//! σ-finite Borel measures on the real line.
//!
//! A [`Measure`] is a finite list of atoms plus a finite list of density
//! pieces, or one of two infinite closed-form families (Lebesgue and the
//! Cauchy weight `dλ/(1+λ²)`). All interval masses use the open-interval
//! convention: an atom sitting exactly on an endpoint is not counted.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::numeric::{atan_difference, compensated_sum};
use crate::quadrature::{integrate, AdaptiveConfig};

pub mod scan;

pub use scan::{uah_constant, IntervalScan, UahEstimate};

/// Relative mismatch allowed between a custom density's integral and its
/// declared mass.
const MASS_HINT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(position: f64, weight: f64) -> Self {
        Self { position, weight }
    }
}

/// Shape of a density on its piece.
#[derive(Clone)]
pub enum Profile {
    /// Constant density `mass / (end - start)`.
    Flat,
    /// Arbitrary nonnegative density; integrated adaptively.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Flat => write!(f, "Flat"),
            Profile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Absolutely continuous mass on `[start, end)`.
#[derive(Debug, Clone)]
pub struct DensityPiece {
    pub start: f64,
    pub end: f64,
    pub mass: f64,
    pub profile: Profile,
}

impl DensityPiece {
    pub fn flat(start: f64, end: f64, mass: f64) -> Self {
        Self {
            start,
            end,
            mass,
            profile: Profile::Flat,
        }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Density value at `y` (zero outside the piece).
    pub fn density(&self, y: f64) -> f64 {
        if y < self.start || y >= self.end {
            return 0.0;
        }
        match &self.profile {
            Profile::Flat => self.mass / self.len(),
            Profile::Custom(f) => f(y),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.profile, Profile::Flat)
    }

    /// Mass of `(a, b) ∩ [start, end)`.
    fn partial_mass(&self, a: f64, b: f64) -> f64 {
        let lo = a.max(self.start);
        let hi = b.min(self.end);
        if hi <= lo {
            return 0.0;
        }
        if lo == self.start && hi == self.end {
            return self.mass;
        }
        match &self.profile {
            Profile::Flat => self.mass * ((hi - lo) / self.len()),
            Profile::Custom(f) => integrate(|y| f(y), lo, hi, &AdaptiveConfig::default())
                .map(|r| r.value.max(0.0))
                .unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilyTag {
    Generic,
    Lebesgue,
    CauchyWeight,
    Uniform { a: f64, b: f64 },
    CantorApprox { depth: u32 },
}

/// Which transforms exist for a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    /// `∫ dη/(1+|y|) < ∞`: Borel (and conjugate Poisson) transform exists.
    pub borel: bool,
    /// `∫ dη/(1+y²) < ∞`: Poisson transform exists.
    pub poisson: bool,
}

#[derive(Debug, Clone)]
pub struct Measure {
    atoms: Vec<Atom>,
    pieces: Vec<DensityPiece>,
    cumulative: Vec<f64>,
    tag: FamilyTag,
    caps: Capabilities,
    resolution_floor: Option<f64>,
}

impl Measure {
    /// Finite measure from atoms and density pieces.
    ///
    /// Atoms are sorted and coincident positions merged. Pieces must not
    /// overlap once sorted by their left endpoint.
    pub fn generic(atoms: Vec<Atom>, pieces: Vec<DensityPiece>) -> Result<Self> {
        let atoms = normalize_atoms(atoms)?;
        let pieces = normalize_pieces(pieces)?;
        let mut cumulative = Vec::with_capacity(pieces.len() + 1);
        cumulative.push(0.0);
        let mut running = crate::numeric::CompensatedSum::new();
        for p in &pieces {
            running.add(p.mass);
            cumulative.push(running.value());
        }
        Ok(Self {
            atoms,
            pieces,
            cumulative,
            tag: FamilyTag::Generic,
            caps: Capabilities {
                borel: true,
                poisson: true,
            },
            resolution_floor: None,
        })
    }

    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        Self::generic(atoms, Vec::new())
    }

    /// Unit point mass at `x`.
    pub fn dirac(x: f64) -> Self {
        Self::atomic(vec![Atom::new(x, 1.0)]).expect("finite dirac position")
    }

    pub fn lebesgue() -> Self {
        Self {
            atoms: Vec::new(),
            pieces: Vec::new(),
            cumulative: vec![0.0],
            tag: FamilyTag::Lebesgue,
            caps: Capabilities {
                borel: false,
                poisson: true,
            },
            resolution_floor: None,
        }
    }

    /// The weight `dλ/(1+λ²)` (total mass π).
    pub fn cauchy_weight() -> Self {
        Self {
            atoms: Vec::new(),
            pieces: Vec::new(),
            cumulative: vec![0.0],
            tag: FamilyTag::CauchyWeight,
            caps: Capabilities {
                borel: true,
                poisson: true,
            },
            resolution_floor: None,
        }
    }

    /// Uniform probability measure on `[a, b)`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return argument(format!("uniform needs finite a < b, got ({a}, {b})"));
        }
        let mut m = Self::generic(Vec::new(), vec![DensityPiece::flat(a, b, 1.0)])?;
        m.tag = FamilyTag::Uniform { a, b };
        Ok(m)
    }

    /// Absolutely continuous measure with density `f` on `[a, b)`.
    pub fn with_density<F>(a: f64, b: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return argument(format!("density support needs finite a < b, got ({a}, {b})"));
        }
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f);
        let mass = integrate(|y| f(y), a, b, &AdaptiveConfig::default())?.value;
        let piece = DensityPiece {
            start: a,
            end: b,
            mass,
            profile: Profile::Custom(f),
        };
        Self::generic(Vec::new(), vec![piece])
    }

    /// Sum of two finite measures. The result is tagged `Generic` and keeps
    /// the coarser resolution floor.
    pub fn combine(&self, other: &Measure) -> Result<Measure> {
        if !self.is_finite() || !other.is_finite() {
            return argument("only finite measures can be combined");
        }
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        let mut out = Measure::generic(atoms, pieces)?;
        out.resolution_floor = match (self.resolution_floor, other.resolution_floor) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        Ok(out)
    }

    /// Multiply every atom weight and piece mass by `factor ≥ 0`.
    pub fn scaled(&self, factor: f64) -> Result<Measure> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return argument(format!("scale factor must be finite and nonnegative, got {factor}"));
        }
        if !self.is_finite() {
            return argument("only finite measures can be rescaled");
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.position, a.weight * factor))
            .collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let profile = match &p.profile {
                    Profile::Flat => Profile::Flat,
                    Profile::Custom(f) => {
                        let f = Arc::clone(f);
                        Profile::Custom(Arc::new(move |y| factor * f(y)))
                    }
                };
                DensityPiece {
                    start: p.start,
                    end: p.end,
                    mass: p.mass * factor,
                    profile,
                }
            })
            .collect();
        let mut out = Measure::generic(atoms, pieces)?;
        out.resolution_floor = self.resolution_floor;
        Ok(out)
    }

    pub fn with_resolution_floor(mut self, floor: f64) -> Self {
        self.resolution_floor = Some(floor);
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn tag(&self) -> FamilyTag {
        self.tag
    }

    pub fn capabilities(&self) -> Capabilities {
        self.caps
    }

    /// Smallest scale at which the measure faithfully represents its target.
    pub fn resolution_floor(&self) -> Option<f64> {
        self.resolution_floor
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self.tag, FamilyTag::Lebesgue)
    }

    pub fn has_atoms(&self) -> bool {
        self.atoms.iter().any(|a| a.weight > 0.0)
    }

    pub fn total_mass(&self) -> f64 {
        match self.tag {
            FamilyTag::Lebesgue => f64::INFINITY,
            FamilyTag::CauchyWeight => std::f64::consts::PI,
            _ => {
                compensated_sum(self.atoms.iter().map(|a| a.weight)) + self.cumulative.last().copied().unwrap_or(0.0)
            }
        }
    }

    /// Closed support hull `[min, max]` of a finite measure.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        if matches!(self.tag, FamilyTag::Lebesgue | FamilyTag::CauchyWeight) {
            return Some((f64::NEG_INFINITY, f64::INFINITY));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in self.atoms.iter().filter(|a| a.weight > 0.0) {
            lo = lo.min(a.position);
            hi = hi.max(a.position);
        }
        for p in self.pieces.iter().filter(|p| p.mass > 0.0) {
            lo = lo.min(p.start);
            hi = hi.max(p.end);
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Density of the absolutely continuous part at `y`.
    pub fn density(&self, y: f64) -> f64 {
        match self.tag {
            FamilyTag::Lebesgue => 1.0,
            FamilyTag::CauchyWeight => 1.0 / (1.0 + y * y),
            _ => {
                let i = self.pieces.partition_point(|p| p.end <= y);
                self.pieces.get(i).map_or(0.0, |p| p.density(y))
            }
        }
    }

    /// η((a, b)) for the open interval `(a, b)`; zero when `b ≤ a`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match self.tag {
            FamilyTag::Lebesgue => return b - a,
            FamilyTag::CauchyWeight => return atan_difference(b, a),
            _ => {}
        }
        let lo = self.atoms.partition_point(|at| at.position <= a);
        let hi = self.atoms.partition_point(|at| at.position < b);
        let atom_mass = if lo < hi {
            compensated_sum(self.atoms[lo..hi].iter().map(|at| at.weight))
        } else {
            0.0
        };
        atom_mass + self.piece_mass_in(a, b)
    }

    fn piece_mass_in(&self, a: f64, b: f64) -> f64 {
        let i0 = self.pieces.partition_point(|p| p.end <= a);
        let i1 = self.pieces.partition_point(|p| p.start < b);
        if i0 >= i1 {
            return 0.0;
        }
        if i1 - i0 == 1 {
            return self.pieces[i0].partial_mass(a, b);
        }
        let first = self.pieces[i0].partial_mass(a, b);
        let last = self.pieces[i1 - 1].partial_mass(a, b);
        let middle = if i1 - 1 > i0 + 1 {
            self.cumulative[i1 - 1] - self.cumulative[i0 + 1]
        } else {
            0.0
        };
        first + middle + last
    }

    /// Total atom weight within `tol` of `x`.
    pub fn point_mass(&self, x: f64, tol: f64) -> f64 {
        let lo = self.atoms.partition_point(|a| a.position < x - tol);
        let hi = self.atoms.partition_point(|a| a.position <= x + tol);
        self.atoms[lo..hi].iter().map(|a| a.weight).sum()
    }

    /// Growth function `M_η(x; ε) = η((x-ε, x+ε))`.
    pub fn growth_function(&self, x: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0) || !eps.is_finite() {
            return argument(format!("growth scale must be positive and finite, got {eps}"));
        }
        if !x.is_finite() {
            return argument(format!("growth center must be finite, got {x}"));
        }
        Ok(self.mass_in(x - eps, x + eps))
    }

    pub fn growth_profile(&self, x: f64, eps_max: f64, ratio: f64, count: usize) -> Result<GrowthProfile> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return argument(format!("ladder ratio must lie in (0,1), got {ratio}"));
        }
        if count < 3 {
            return argument(format!("growth profile needs at least 3 scales, got {count}"));
        }
        let scales: Vec<f64> = (0..count).map(|k| eps_max * ratio.powi(k as i32)).collect();
        let masses = scales
            .iter()
            .map(|&e| self.growth_function(x, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(GrowthProfile {
            center: x,
            scales,
            masses,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = MeasureDoc::from_measure(self)?;
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MeasureDoc =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        doc.into_measure()
    }

    /// Write the atoms as CSV with header `position,weight`.
    pub fn write_atoms_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Serialization(e.to_string());
        w.write_record(["position", "weight"]).map_err(io)?;
        for a in &self.atoms {
            w.write_record([format!("{}", a.position), format!("{}", a.weight)])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Read an atomic measure from CSV with header `position,weight`.
    pub fn read_atoms_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r
            .headers()
            .map_err(|e| Error::Serialization(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["position", "weight"] {
            return Err(Error::Serialization(format!(
                "expected header `position,weight`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut atoms = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Serialization(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Serialization(format!("row {}: missing column", line + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Serialization(format!("row {}: {e}", line + 2)))
            };
            atoms.push(Atom::new(parse(0)?, parse(1)?));
        }
        Self::atomic(atoms)
    }
}

/// Piecewise-uniform approximation of the middle-thirds Cantor measure.
///
/// Each of the `2^depth` surviving triadic intervals of `[0, 1]` carries mass
/// `2^-depth` spread uniformly. The resolution floor is `3^-depth`.
pub fn make_cantor(depth: u32) -> Result<Measure> {
    if !(1..=20).contains(&depth) {
        return argument(format!("cantor depth must lie in 1..=20, got {depth}"));
    }
    let cells = 3f64.powi(depth as i32);
    let count = 1usize << depth;
    let mass = 1.0 / count as f64;
    let mut pieces = Vec::with_capacity(count);
    for code in 0..count {
        // binary digits of `code` select ternary digits 0 or 2, most significant first
        let mut left: u64 = 0;
        for bit in (0..depth).rev() {
            left = 3 * left + if code >> bit & 1 == 1 { 2 } else { 0 };
        }
        let start = left as f64 / cells;
        let end = (left + 1) as f64 / cells;
        pieces.push(DensityPiece::flat(start, end, mass));
    }
    let mut m = Measure::generic(Vec::new(), pieces)?;
    m.tag = FamilyTag::CantorApprox { depth };
    m.resolution_floor = Some(1.0 / cells);
    Ok(m)
}

/// Masses `M_η(x; ε)` sampled on a descending geometric ladder of scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub center: f64,
    pub scales: Vec<f64>,
    pub masses: Vec<f64>,
}

fn normalize_atoms(mut atoms: Vec<Atom>) -> Result<Vec<Atom>> {
    for a in &atoms {
        if !a.position.is_finite() || !a.weight.is_finite() {
            return argument(format!("atom ({}, {}) is not finite", a.position, a.weight));
        }
        if a.weight < 0.0 {
            return argument(format!("atom weight {} is negative", a.weight));
        }
    }
    atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if last.position == a.position => last.weight += a.weight,
            _ => out.push(a),
        }
    }
    Ok(out)
}

fn normalize_pieces(mut pieces: Vec<DensityPiece>) -> Result<Vec<DensityPiece>> {
    for p in &pieces {
        if !(p.start.is_finite() && p.end.is_finite() && p.start < p.end) {
            return argument(format!("density piece [{}, {}) is empty or unbounded", p.start, p.end));
        }
        if !(p.mass >= 0.0 && p.mass.is_finite()) {
            return argument(format!("density piece mass {} is invalid", p.mass));
        }
        if let Profile::Custom(f) = &p.profile {
            let integral = integrate(|y| f(y), p.start, p.end, &AdaptiveConfig::default())?.value;
            if (integral - p.mass).abs() > MASS_HINT_TOLERANCE * p.mass.max(1.0) {
                return argument(format!(
                    "density on [{}, {}) integrates to {integral}, declared mass {}",
                    p.start, p.end, p.mass
                ));
            }
        }
    }
    pieces.sort_by(|a, b| a.start.total_cmp(&b.start));
    for w in pieces.windows(2) {
        if w[1].start < w[0].end {
            return argument(format!(
                "density pieces [{}, {}) and [{}, {}) overlap",
                w[0].start, w[0].end, w[1].start, w[1].end
            ));
        }
    }
    Ok(pieces)
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureDoc {
    #[serde(default)]
    atoms: Vec<[f64; 2]>,
    #[serde(default)]
    pieces: Vec<[f64; 3]>,
    tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    depth: Option<u32>,
}

impl MeasureDoc {
    fn from_measure(m: &Measure) -> Result<Self> {
        let mut pieces = Vec::with_capacity(m.pieces.len());
        for p in &m.pieces {
            if !p.is_flat() {
                return Err(Error::Serialization(
                    "custom density pieces cannot be serialized".into(),
                ));
            }
            pieces.push([p.start, p.end, p.mass]);
        }
        let (tag, depth) = match m.tag {
            FamilyTag::Generic => ("generic", None),
            FamilyTag::Lebesgue => ("lebesgue", None),
            FamilyTag::CauchyWeight => ("cauchy-weight", None),
            FamilyTag::Uniform { .. } => ("uniform", None),
            FamilyTag::CantorApprox { depth } => ("cantor", Some(depth)),
        };
        Ok(Self {
            atoms: m.atoms.iter().map(|a| [a.position, a.weight]).collect(),
            pieces,
            tag: tag.to_string(),
            depth,
        })
    }

    fn into_measure(self) -> Result<Measure> {
        let atoms: Vec<Atom> = self.atoms.iter().map(|a| Atom::new(a[0], a[1])).collect();
        let pieces: Vec<DensityPiece> = self
            .pieces
            .iter()
            .map(|p| DensityPiece::flat(p[0], p[1], p[2]))
            .collect();
        match self.tag.as_str() {
            "generic" => Measure::generic(atoms, pieces),
            "lebesgue" | "cauchy-weight" => {
                if !atoms.is_empty() || !pieces.is_empty() {
                    return Err(Error::Serialization(format!(
                        "tag `{}` carries no atoms or pieces",
                        self.tag
                    )));
                }
                Ok(if self.tag == "lebesgue" {
                    Measure::lebesgue()
                } else {
                    Measure::cauchy_weight()
                })
            }
            "uniform" => match (atoms.is_empty(), pieces.as_slice()) {
                (true, [p]) if (p.mass - 1.0).abs() <= 1e-12 => Measure::uniform(p.start, p.end),
                _ => Err(Error::Serialization(
                    "tag `uniform` needs exactly one piece of mass 1 and no atoms".into(),
                )),
            },
            "cantor" => {
                let depth = self.depth.ok_or_else(|| {
                    Error::Serialization("tag `cantor` requires `depth`".into())
                })?;
                let cantor = make_cantor(depth)?;
                if !pieces.is_empty() && pieces.len() != cantor.pieces.len() {
                    return Err(Error::Serialization(format!(
                        "cantor depth {depth} has {} pieces, document lists {}",
                        cantor.pieces.len(),
                        pieces.len()
                    )));
                }
                Ok(cantor)
            }
            other => Err(Error::Serialization(format!("unknown measure tag `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_growth() {
        assert_eq!(Measure::dirac(0.0).growth_function(0.0, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn boundary_atoms_are_excluded() {
        let d = Measure::dirac(0.0);
        assert_eq!(d.growth_function(0.5, 0.5).unwrap(), 0.0);
        assert_eq!(d.growth_function(-0.25, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn lebesgue_growth_is_interval_length() {
        let l = Measure::lebesgue();
        assert_eq!(l.growth_function(3.7, 0.25).unwrap(), 0.5);
        assert!(!l.capabilities().borel);
        assert!(l.capabilities().poisson);
    }

    #[test]
    fn nonpositive_scale_is_rejected() {
        let l = Measure::lebesgue();
        assert!(matches!(l.growth_function(0.0, 0.0), Err(Error::Argument(_))));
        assert!(matches!(l.growth_function(0.0, -1.0), Err(Error::Argument(_))));
    }

    #[test]
    fn profile_ladders() {
        let d = Measure::dirac(0.0).growth_profile(0.0, 1.0, 0.5, 4).unwrap();
        assert_eq!(d.masses, vec![1.0, 1.0, 1.0, 1.0]);
        let l = Measure::lebesgue().growth_profile(0.0, 1.0, 0.5, 4).unwrap();
        assert_eq!(l.masses, vec![2.0, 1.0, 0.5, 0.25]);
        assert!(Measure::lebesgue().growth_profile(0.0, 1.0, 1.0, 4).is_err());
        assert!(Measure::lebesgue().growth_profile(0.0, 1.0, 0.5, 2).is_err());
    }

    #[test]
    fn cantor_depth_one() {
        let c = make_cantor(1).unwrap();
        assert_eq!(c.pieces().len(), 2);
        assert!((c.density(0.1) - 1.5).abs() < 1e-15);
        assert_eq!(c.density(0.5), 0.0);
        assert!((c.density(0.9) - 1.5).abs() < 1e-15);
        assert_eq!(c.total_mass(), 1.0);
        assert!(make_cantor(0).is_err());
        assert!(make_cantor(21).is_err());
    }

    #[test]
    fn cantor_total_mass_is_one() {
        for d in [1, 5, 12, 16] {
            assert!((make_cantor(d).unwrap().total_mass() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn mixed_measure_point_mass() {
        let m = Measure::dirac(0.0)
            .combine(&Measure::uniform(0.0, 1.0).unwrap())
            .unwrap();
        assert_eq!(m.point_mass(0.0, 1e-13), 1.0);
        assert!((m.total_mass() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn duplicate_atoms_merge() {
        let m = Measure::atomic(vec![Atom::new(1.0, 0.25), Atom::new(-1.0, 0.5), Atom::new(1.0, 0.25)])
            .unwrap();
        assert_eq!(m.atoms().len(), 2);
        assert_eq!(m.atoms()[1].weight, 0.5);
        assert!(Measure::atomic(vec![Atom::new(0.0, -1.0)]).is_err());
    }

    #[test]
    fn overlapping_pieces_rejected() {
        let err = Measure::generic(
            vec![],
            vec![DensityPiece::flat(0.0, 1.0, 1.0), DensityPiece::flat(0.5, 2.0, 1.0)],
        );
        assert!(err.is_err());
    }

    #[test]
    fn custom_density_masses() {
        let m = Measure::with_density(0.0, 1.0, |y| 2.0 * y).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-14);
        assert!((m.mass_in(0.0, 0.5) - 0.25).abs() < 1e-13);
    }

    #[test]
    fn cauchy_weight_masses() {
        let c = Measure::cauchy_weight();
        assert!((c.total_mass() - std::f64::consts::PI).abs() < 1e-15);
        assert!((c.mass_in(-1.0, 1.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_preserves_masses() {
        let m = Measure::dirac(0.25).combine(&make_cantor(3).unwrap()).unwrap();
        let back = Measure::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back.atoms(), m.atoms());
        assert_eq!(back.pieces().len(), m.pieces().len());
        let c = Measure::from_json(&make_cantor(4).unwrap().to_json().unwrap()).unwrap();
        assert_eq!(c.tag(), FamilyTag::CantorApprox { depth: 4 });
        assert_eq!(c.resolution_floor(), Some(1.0 / 81.0));
        let l = Measure::from_json(r#"{"tag":"lebesgue"}"#).unwrap();
        assert_eq!(l.tag(), FamilyTag::Lebesgue);
        assert!(Measure::from_json(r#"{"tag":"banach"}"#).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = Measure::atomic(vec![Atom::new(-1.0, 0.5), Atom::new(1.0, 0.5)]).unwrap();
        let mut buf = Vec::new();
        m.write_atoms_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("position,weight\n"));
        let back = Measure::read_atoms_csv(buf.as_slice()).unwrap();
        assert_eq!(back.atoms(), m.atoms());
        assert!(Measure::read_atoms_csv("x,y\n1,2\n".as_bytes()).is_err());
    }
}
