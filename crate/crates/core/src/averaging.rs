//! The averaged measure `κ(B) = ∫ μ_λ(B) dν(λ)` and the transform
//! identities and Hölder bounds that tie it to `ν`.
//!
//! Integration against `ν` runs in one of three modes. Lebesgue measure and
//! the Cauchy weight are integrated in the compact variable `θ = atan λ`;
//! density pieces are integrated piece by piece; atoms are summed exactly.
//! The integrand receives both the Jacobian `w(λ)` of the mode and the
//! combination `w(λ)/λ²`, so integrands decaying like `1/λ²` can be formed
//! without overflow near `θ = ±π/2`.
//!
//! Transforms of `κ` at `z` have λ-integrands peaked at `w = -1/F_μ(z)`
//! with width `Im w`; those are integrated in a variable centred on the peak
//! (see [`integrate_nu_lorentz`]).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{argument, precondition, Error, Result};
use crate::measure::{make_cantor, Atom, FamilyTag, Measure};
use crate::operator::RankOneFamily;
use crate::quadrature::{integrate_segments, split_at, AdaptiveConfig, QuadValue};
use crate::transform::{borel_transform, poisson_transform, UpperHalfPlanePoint};

/// Endpoints within this multiple of `‖A‖` of an eigenvalue are moved off it.
pub const ENDPOINT_SHIFT: f64 = 1e-12;
/// Slack allowed above the Hölder bound before a grid point counts as a violation.
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_max_panels")]
    pub max_panels: usize,
    /// Extra couplings at which the λ-domain is split.
    #[serde(default)]
    pub breakpoints: Vec<f64>,
}

fn default_abs_tol() -> f64 {
    1e-9
}

fn default_max_panels() -> usize {
    200_000
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: default_abs_tol(),
            max_panels: default_max_panels(),
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return argument(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if self.max_panels == 0 {
            return argument("max_panels must be positive");
        }
        if self.breakpoints.iter().any(|b| !b.is_finite()) {
            return argument("breakpoints must be finite");
        }
        Ok(())
    }

    fn adaptive(&self) -> AdaptiveConfig {
        AdaptiveConfig {
            abs_tol: self.abs_tol,
            max_panels: self.max_panels,
        }
    }
}

/// Weighting measures on the coupling constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum NuKind {
    Lebesgue,
    CauchyWeight,
    Uniform { a: f64, b: f64 },
    Cantor { depth: u32 },
    Atomic { atoms: Vec<(f64, f64)> },
}

impl NuKind {
    /// Parse `lebesgue`, `cauchy`, `uniform:a,b`, `cantor:d` or
    /// `atomic:x1@w1,x2@w2,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let (head, rest) = match text.split_once(':') {
            Some((h, r)) => (h.trim(), Some(r.trim())),
            None => (text.trim(), None),
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Argument(format!("`{s}` is not a number in ν spec `{text}`")))
        };
        match (head, rest) {
            ("lebesgue", None) => Ok(NuKind::Lebesgue),
            ("cauchy" | "cauchy-weight", None) => Ok(NuKind::CauchyWeight),
            ("uniform", Some(r)) => {
                let (a, b) = r
                    .split_once(',')
                    .ok_or_else(|| Error::Argument(format!("uniform needs `uniform:a,b`, got `{text}`")))?;
                Ok(NuKind::Uniform { a: num(a)?, b: num(b)? })
            }
            ("cantor", Some(r)) => Ok(NuKind::Cantor {
                depth: r
                    .parse()
                    .map_err(|_| Error::Argument(format!("cantor depth `{r}` is not an integer")))?,
            }),
            ("atomic", Some(r)) => {
                let atoms = r
                    .split(',')
                    .map(|item| {
                        let (x, w) = item
                            .split_once('@')
                            .ok_or_else(|| Error::Argument(format!("atom `{item}` must be `x@w`")))?;
                        Ok((num(x)?, num(w)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(NuKind::Atomic { atoms })
            }
            _ => argument(format!("unknown ν kind `{text}`")),
        }
    }
}

pub fn make_nu(kind: &NuKind) -> Result<Measure> {
    match kind {
        NuKind::Lebesgue => Ok(Measure::lebesgue()),
        NuKind::CauchyWeight => Ok(Measure::cauchy_weight()),
        NuKind::Uniform { a, b } => Measure::uniform(*a, *b),
        NuKind::Cantor { depth } => make_cantor(*depth),
        NuKind::Atomic { atoms } => {
            if atoms.is_empty() {
                return argument("atomic ν needs at least one atom");
            }
            Measure::atomic(atoms.iter().map(|&(x, w)| Atom::new(x, w)).collect())
        }
    }
}

/// Density factor of `dν` at a quadrature node, and the same factor over `λ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuWeight {
    pub jacobian: f64,
    pub over_lambda_sq: f64,
}

/// Value of a ν-integral with its achieved error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error_estimate: f64,
    pub panels: usize,
}

/// `∫ g(λ) dν(λ)` where `g(λ, w)` must return `w.jacobian·g(λ)`, possibly
/// formed as `w.over_lambda_sq·λ²g(λ)`.
pub fn integrate_nu<T, G>(nu: &Measure, breakpoints: &[f64], cfg: &QuadratureConfig, g: G) -> Result<Estimate<T>>
where
    T: QuadValue,
    G: Fn(f64, NuWeight) -> T,
{
    integrate_nu_masked(nu, breakpoints, cfg, |_| true, g)
}

/// As [`integrate_nu`], skipping every segment between breakpoints whose
/// midpoint coupling fails `active`. The integrand must vanish on such
/// segments; atoms of `ν` are always summed.
pub fn integrate_nu_masked<T, G, A>(
    nu: &Measure,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
    active: A,
    g: G,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    G: Fn(f64, NuWeight) -> T,
    A: Fn(f64) -> bool,
{
    cfg.validate()?;
    let adaptive = cfg.adaptive();
    let mut bps: Vec<f64> = breakpoints
        .iter()
        .chain(&cfg.breakpoints)
        .copied()
        .filter(|b| !b.is_nan())
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();

    match nu.tag() {
        FamilyTag::Lebesgue | FamilyTag::CauchyWeight => {
            let lebesgue = matches!(nu.tag(), FamilyTag::Lebesgue);
            let thetas: Vec<f64> = bps.iter().map(|b| b.atan()).collect();
            let segments: Vec<(f64, f64)> = split_at(-FRAC_PI_2, FRAC_PI_2, &thetas)
                .into_iter()
                .filter(|&(lo, hi)| active((0.5 * (lo + hi)).tan()))
                .collect();
            let r = integrate_segments(
                |_, theta: f64| {
                    let (s, c) = theta.sin_cos();
                    let lambda = s / c;
                    let w = if lebesgue {
                        NuWeight {
                            jacobian: 1.0 / (c * c),
                            over_lambda_sq: 1.0 / (s * s),
                        }
                    } else {
                        NuWeight {
                            jacobian: 1.0,
                            over_lambda_sq: (c * c) / (s * s),
                        }
                    };
                    g(lambda, w)
                },
                &segments,
                &adaptive,
            )?;
            Ok(Estimate {
                value: r.value,
                error_estimate: r.error_estimate,
                panels: r.panels,
            })
        }
        _ => {
            let mut segments = Vec::new();
            let mut owner = Vec::new();
            for (i, piece) in nu.pieces().iter().enumerate() {
                for seg in split_at(piece.start, piece.end, &bps) {
                    if !active(0.5 * (seg.0 + seg.1)) {
                        continue;
                    }
                    segments.push(seg);
                    owner.push(i);
                }
            }
            let pieces = nu.pieces();
            let r = integrate_segments(
                |seg, lambda: f64| {
                    let d = pieces[owner[seg]].density(lambda);
                    g(
                        lambda,
                        NuWeight {
                            jacobian: d,
                            over_lambda_sq: d / (lambda * lambda),
                        },
                    )
                },
                &segments,
                &adaptive,
            )?;
            let mut value = r.value;
            for atom in nu.atoms() {
                let l = atom.position;
                value = value
                    + g(
                        l,
                        NuWeight {
                            jacobian: atom.weight,
                            over_lambda_sq: atom.weight / (l * l),
                        },
                    );
            }
            Ok(Estimate {
                value,
                error_estimate: r.error_estimate,
                panels: r.panels,
            })
        }
    }
}

/// `∫ g(λ - Re w) dν(λ)` for integrands with a Lorentzian peak of width
/// `Im w` at `Re w`. Density parts are integrated in `φ` with
/// `λ = Re w + Im w·tan φ`, which flattens the peak; `g(u, weight)` must
/// return `weight·g(u)` and receives the offset `u = λ - Re w` directly, so
/// no precision is lost to the location of the peak.
pub fn integrate_nu_lorentz<T, G>(nu: &Measure, w: Complex64, cfg: &QuadratureConfig, g: G) -> Result<Estimate<T>>
where
    T: QuadValue,
    G: Fn(f64, f64) -> T,
{
    cfg.validate()?;
    let (c, s) = (w.re, w.im);
    if !(c.is_finite() && s.is_finite() && s > 0.0) {
        return Err(Error::Numerical(format!("peak {w} is not in the upper half-plane")));
    }
    let to_phi = |lambda: f64| ((lambda - c) / s).atan();
    let cuts: Vec<f64> = cfg.breakpoints.iter().filter(|b| !b.is_nan()).map(|&b| to_phi(b)).collect();
    let adaptive = cfg.adaptive();
    let mut segments = Vec::new();
    let mut owner = Vec::new();
    let lebesgue = matches!(nu.tag(), FamilyTag::Lebesgue);
    let whole_line = matches!(nu.tag(), FamilyTag::Lebesgue | FamilyTag::CauchyWeight);
    if whole_line {
        segments = split_at(-FRAC_PI_2, FRAC_PI_2, &cuts);
        owner = vec![0; segments.len()];
    } else {
        for (i, piece) in nu.pieces().iter().enumerate() {
            for seg in split_at(to_phi(piece.start), to_phi(piece.end), &cuts) {
                segments.push(seg);
                owner.push(i);
            }
        }
    }
    let pieces = nu.pieces();
    let r = integrate_segments(
        |seg, phi: f64| {
            let (sin, cos) = phi.sin_cos();
            let u = s * sin / cos;
            let lambda = c + u;
            let density = if lebesgue {
                1.0
            } else if whole_line {
                1.0 / (1.0 + lambda * lambda)
            } else {
                pieces[owner[seg]].density(lambda)
            };
            g(u, density * s / (cos * cos))
        },
        &segments,
        &adaptive,
    )?;
    let mut value = r.value;
    for atom in nu.atoms() {
        value = value + g(atom.position - c, atom.weight);
    }
    Ok(Estimate {
        value,
        error_estimate: r.error_estimate,
        panels: r.panels,
    })
}

/// Evaluator for `κ` and its transforms.
#[derive(Debug, Clone)]
pub struct KappaProbe {
    family: RankOneFamily,
    nu: Measure,
    quad: QuadratureConfig,
}

impl KappaProbe {
    pub fn new(family: RankOneFamily, nu: Measure, quad: QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        Ok(Self { family, nu, quad })
    }

    pub fn family(&self) -> &RankOneFamily {
        &self.family
    }

    pub fn nu(&self) -> &Measure {
        &self.nu
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    /// `κ(B)` for a finite union of open intervals.
    pub fn kappa_set(&self, intervals: &[(f64, f64)]) -> Result<Estimate<f64>> {
        let set = self.prepare_set(intervals)?;
        let breakpoints: Vec<f64> = set
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .map(|e| self.family.crossing_coupling(e))
            .filter(|l| l.is_finite())
            .collect();
        let fam = &self.family;
        let mut failure: std::sync::Mutex<Option<Error>> = std::sync::Mutex::new(None);
        // the root count in B only changes at crossing couplings, so a
        // segment whose midpoint sees no root carries no mass
        let active = |lambda: f64| {
            lambda == 0.0
                || set
                    .iter()
                    .any(|&(a, b)| fam.perturbed_count_in(lambda, a, b).map_or(true, |n| n > 0))
        };
        let est = integrate_nu_masked(&self.nu, &breakpoints, &self.quad, active, |lambda, w| {
            match set_integrand(fam, &set, lambda, w) {
                Ok(v) => v,
                Err(e) => {
                    failure.lock().expect("unpoisoned").get_or_insert(e);
                    f64::NAN
                }
            }
        });
        if let Some(e) = failure.get_mut().expect("unpoisoned").take() {
            return Err(e);
        }
        est
    }

    /// Merge overlapping intervals and move endpoints off eigenvalues of `A`.
    fn prepare_set(&self, intervals: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
        if intervals.is_empty() {
            return argument("the set B needs at least one interval");
        }
        for &(a, b) in intervals {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return argument(format!("interval ({a}, {b}) must be bounded with a < b"));
            }
        }
        let mut sorted = intervals.to_vec();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (a, b) in sorted {
            match merged.last_mut() {
                Some(last) if a < last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        let shift = ENDPOINT_SHIFT * self.family.norm().max(1.0);
        let poles = self.family.poles();
        let nudge = |e: f64, outward: f64| {
            if poles.iter().any(|p| (p.position - e).abs() <= shift) {
                let moved = e + outward * shift;
                log::warn!("interval endpoint {e} coincides with an eigenvalue; moved to {moved}");
                moved
            } else {
                e
            }
        };
        Ok(merged
            .into_iter()
            .map(|(a, b)| (nudge(a, -1.0), nudge(b, 1.0)))
            .collect())
    }

    /// `P_κ(z) = ∫ P_μ(z)/|1+λF_μ(z)|² dν(λ)`.
    pub fn kappa_poisson(&self, z: UpperHalfPlanePoint) -> Result<Estimate<f64>> {
        if !self.nu.capabilities().poisson {
            return Err(Error::UnsupportedTransform(format!(
                "ν ({:?}) has no Poisson transform",
                self.nu.tag()
            )));
        }
        let f = self.family.borel_base(z.to_complex());
        let (p, f2) = (f.im, f.norm_sqr());
        let w = -1.0 / f;
        // |1 + λF|² = |F|²((λ - Re w)² + (Im w)²), formed from the offset
        let est = integrate_nu_lorentz(&self.nu, w, &self.quad, |u, weight| {
            p / (f2 * (u * u + w.im * w.im)) * weight
        })?;
        Ok(Estimate {
            value: est.value.max(0.0),
            ..est
        })
    }

    /// `F_κ(z) = ∫ F_μ(z)/(1+λF_μ(z)) dν(λ)`, finite `ν` only.
    pub fn kappa_borel(&self, z: UpperHalfPlanePoint) -> Result<Estimate<Complex64>> {
        if !self.nu.is_finite() || !self.nu.capabilities().borel {
            return precondition(format!(
                "the Borel identity needs a finite ν, got {:?}",
                self.nu.tag()
            ));
        }
        let f = self.family.borel_base(z.to_complex());
        let w = -1.0 / f;
        // F/(1 + λF) = 1/(λ - w)
        integrate_nu_lorentz(&self.nu, w, &self.quad, |u, weight| weight / Complex64::new(u, -w.im))
    }

    /// `w = -1/F_μ(z)`, asserted to lie in the upper half-plane.
    pub fn mapped_point(&self, z: UpperHalfPlanePoint) -> Result<UpperHalfPlanePoint> {
        let w = -1.0 / self.family.borel_base(z.to_complex());
        if !(w.im > 0.0) || !w.re.is_finite() {
            return Err(Error::Numerical(format!(
                "-1/F_μ({}) = {w} is not in the upper half-plane",
                z.to_complex()
            )));
        }
        UpperHalfPlanePoint::from_complex(w)
    }
}

fn set_integrand(fam: &RankOneFamily, set: &[(f64, f64)], lambda: f64, w: NuWeight) -> Result<f64> {
    if w.jacobian == 0.0 {
        return Ok(0.0);
    }
    if lambda.abs() < 1.0 {
        let mut mass = 0.0;
        for &(a, b) in set {
            mass += fam.perturbed_mass_in(lambda, a, b)?;
        }
        Ok(mass * w.jacobian)
    } else {
        // λ²μ_λ(B) = Σ 1/F'(x) over roots in B
        let mut scaled = 0.0;
        for &(a, b) in set {
            for r in fam.perturbed_roots_in(lambda, a, b)? {
                scaled += r.inv_derivative;
            }
        }
        Ok(scaled * w.over_lambda_sq)
    }
}

/// One grid row of an identity or bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub x: f64,
    pub epsilon: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
    /// Quadrature error estimate of the λ-integral side.
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    pub max_deviation: f64,
    /// `(x, ε)` of the largest deviation.
    pub worst: (f64, f64),
}

impl GridReport {
    pub fn from_rows(rows: Vec<GridRow>) -> Self {
        let worst_row = rows
            .iter()
            .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
            .copied();
        Self {
            max_deviation: worst_row.map_or(0.0, |r| r.deviation),
            worst: worst_row.map_or((f64::NAN, f64::NAN), |r| (r.x, r.epsilon)),
            rows,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "epsilon", "lhs", "rhs", "deviation"])
            .map_err(|e| Error::Serialization(e.to_string()))?;
        for r in &self.rows {
            w.write_record([
                format!("{:e}", r.x),
                format!("{:e}", r.epsilon),
                format!("{:e}", r.lhs),
                format!("{:e}", r.rhs),
                format!("{:e}", r.deviation),
            ])
            .map_err(|e| Error::Serialization(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Cartesian grid of points `x + iε`.
pub fn z_grid(xs: &[f64], epsilons: &[f64]) -> Result<Vec<UpperHalfPlanePoint>> {
    let mut out = Vec::with_capacity(xs.len() * epsilons.len());
    for &x in xs {
        for &e in epsilons {
            out.push(UpperHalfPlanePoint::new(x, e)?);
        }
    }
    Ok(out)
}

/// `P_κ(z)` against `P_ν(-1/F_μ(z))` on a grid.
pub fn poisson_identity_check(probe: &KappaProbe, grid: &[UpperHalfPlanePoint]) -> Result<GridReport> {
    let rows = grid
        .par_iter()
        .map(|&z| {
            let lhs = probe.kappa_poisson(z)?;
            let rhs = poisson_transform(probe.nu(), probe.mapped_point(z)?)?;
            Ok(GridRow {
                x: z.x(),
                epsilon: z.eps(),
                lhs: lhs.value,
                rhs,
                deviation: (lhs.value - rhs).abs(),
                error_estimate: lhs.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridReport::from_rows(rows))
}

/// `F_κ(z)` against `F_ν(-1/F_μ(z))`; `lhs`/`rhs` hold the imaginary parts
/// and `deviation` the complex modulus of the difference.
pub fn borel_identity_check(probe: &KappaProbe, grid: &[UpperHalfPlanePoint]) -> Result<GridReport> {
    if !probe.nu().is_finite() {
        return precondition("the Borel transform of an infinite ν does not exist in general");
    }
    let rows = grid
        .par_iter()
        .map(|&z| {
            let lhs = probe.kappa_borel(z)?;
            let rhs = borel_transform(probe.nu(), probe.mapped_point(z)?)?.to_complex();
            Ok(GridRow {
                x: z.x(),
                epsilon: z.eps(),
                lhs: lhs.value.im,
                rhs: rhs.im,
                deviation: (lhs.value - rhs).norm(),
                error_estimate: lhs.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridReport::from_rows(rows))
}

/// `P_ν(z) ≤ C·Im(z)^{α-1}` for `ν` with `ν(I) ≤ K|I|^α`.
///
/// Integrating the level sets of the Poisson kernel, intervals of half-width
/// `δ` and length `2δ`, gives `C = 2^α·παK/(2 sin(πα/2))`, with limit `K` as
/// `α → 0`. The factor `2^α` is what makes the constant sharp for Lebesgue
/// measure at `α = 1`, where `P ≡ π`.
pub fn holder_constant(alpha: f64, k: f64) -> f64 {
    2f64.powf(alpha) * half_width_constant(alpha, k)
}

/// `παK/(2 sin(πα/2))`: the constant obtained when `ν` is bounded by
/// `Kδ^α` on intervals of half-width `δ`.
pub fn half_width_constant(alpha: f64, k: f64) -> f64 {
    if alpha == 0.0 {
        return k;
    }
    PI * alpha * k / (2.0 * (PI * alpha / 2.0).sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderValidation {
    /// `sup_z P_ν(z)·Im(z)^{1-α}` over the grid.
    pub empirical_sup: f64,
    pub witness: (f64, f64),
    pub half_width_constant: f64,
    pub full_width_constant: f64,
    pub half_width_holds: bool,
    pub full_width_holds: bool,
}

/// Compare the empirical supremum of `P_ν(z)·Im(z)^{1-α}` with both forms
/// of the constant.
pub fn validate_holder_constant(
    nu: &Measure,
    alpha: f64,
    k: f64,
    grid: &[UpperHalfPlanePoint],
) -> Result<HolderValidation> {
    check_alpha(alpha)?;
    if grid.is_empty() {
        return argument("validation grid is empty");
    }
    let values = grid
        .par_iter()
        .map(|&z| Ok((poisson_transform(nu, z)? * z.eps().powf(1.0 - alpha), (z.x(), z.eps()))))
        .collect::<Result<Vec<_>>>()?;
    let (sup, witness) = values
        .into_iter()
        .fold((f64::NEG_INFINITY, (f64::NAN, f64::NAN)), |best, v| if v.0 > best.0 { v } else { best });
    let half = half_width_constant(alpha, k);
    let full = holder_constant(alpha, k);
    let slack = 1.0 + 1e-9;
    Ok(HolderValidation {
        empirical_sup: sup,
        witness,
        half_width_constant: half,
        full_width_constant: full,
        half_width_holds: sup <= half * slack,
        full_width_holds: sup <= full * slack,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return argument(format!("alpha must lie in [0, 1], got {alpha}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha: f64,
    pub k: f64,
    pub constant: f64,
    pub rows: Vec<GridRow>,
    /// Rows with `lhs > rhs + BOUND_SLACK`.
    pub violations: Vec<GridRow>,
}

/// `P_κ(z) ≤ C_α (|F_μ(z)|²/P_μ(z))^{1-α}` on a grid, with the full-width
/// constant of [`holder_constant`]. Here `deviation = lhs - rhs`.
pub fn uah_bound_check(
    probe: &KappaProbe,
    alpha: f64,
    k: f64,
    grid: &[UpperHalfPlanePoint],
) -> Result<BoundReport> {
    check_alpha(alpha)?;
    if !(k >= 0.0 && k.is_finite()) {
        return argument(format!("UαH constant must be finite and nonnegative, got {k}"));
    }
    let constant = holder_constant(alpha, k);
    let rows = grid
        .par_iter()
        .map(|&z| {
            let lhs = probe.kappa_poisson(z)?;
            let f = probe.family().borel_base(z.to_complex());
            let rhs = constant * (f.norm_sqr() / f.im).powf(1.0 - alpha);
            Ok(GridRow {
                x: z.x(),
                epsilon: z.eps(),
                lhs: lhs.value,
                rhs,
                deviation: lhs.value - rhs,
                error_estimate: lhs.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = rows
        .iter()
        .filter(|r| r.lhs > r.rhs + BOUND_SLACK)
        .copied()
        .collect();
    Ok(BoundReport {
        alpha,
        k,
        constant,
        rows,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KotaniReport {
    pub set: Vec<(f64, f64)>,
    /// Lebesgue measure of `B`.
    pub lhs: f64,
    /// `κ(B)` with `ν` Lebesgue.
    pub rhs: f64,
    pub abs_err: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// `∫ μ_λ(B) dλ = |B|`.
pub fn kotani_check(family: &RankOneFamily, set: &[(f64, f64)], quad: &QuadratureConfig) -> Result<KotaniReport> {
    let probe = KappaProbe::new(family.clone(), Measure::lebesgue(), quad.clone())?;
    let prepared = probe.prepare_set(set)?;
    let lhs: f64 = prepared.iter().map(|(a, b)| b - a).sum();
    let rhs = probe.kappa_set(set)?;
    Ok(KotaniReport {
        set: prepared,
        lhs,
        rhs: rhs.value,
        abs_err: (lhs - rhs.value).abs(),
        error_estimate: rhs.error_estimate,
        panels: rhs.panels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomProbe {
    pub x: f64,
    /// The unique coupling at which `x` is an eigenvalue of `A_λ`.
    pub coupling: f64,
    /// `ν({λ*})·μ_{λ*}({x})`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub probes: Vec<AtomProbe>,
    pub max_weight: f64,
}

/// `κ({x})` for candidate points; only the coupling `λ* = -1/F_μ(x)` can
/// carry `x` as an atom, so `κ({x}) = ν({λ*})·μ_{λ*}({x})`.
pub fn kappa_atom_check(probe: &KappaProbe, candidates: &[f64]) -> Result<AtomReport> {
    if probe.nu().has_atoms() {
        return precondition("κ inherits continuity only from a continuous ν");
    }
    let fam = probe.family();
    let tol = ENDPOINT_SHIFT * fam.norm().max(1.0);
    let probes = candidates
        .iter()
        .map(|&x| {
            let coupling = fam.crossing_coupling(x);
            let nu_mass = if coupling.is_finite() {
                probe.nu().point_mass(coupling, 0.0)
            } else {
                0.0
            };
            let weight = if nu_mass > 0.0 {
                nu_mass * fam.perturbed_mass_in(coupling, x - tol, x + tol)?
            } else {
                0.0
            };
            Ok(AtomProbe { x, coupling, weight })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_weight = probes.iter().fold(0.0_f64, |m, p| m.max(p.weight));
    Ok(AtomReport { probes, max_weight })
}

/// Eigenvalues of `A_λ` for `count` couplings spread over `[-range, range]`,
/// plus the eigenvalues of `A`.
pub fn atom_candidates(family: &RankOneFamily, count: usize, range: f64) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = family.poles().iter().map(|a| a.position).collect();
    for k in 0..count {
        let lambda = -range + 2.0 * range * (k as f64 + 0.5) / count as f64;
        if lambda == 0.0 {
            continue;
        }
        out.extend(family.perturbed_measure_secular(lambda)?.atoms().iter().map(|a| a.position));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{CyclicVector, SelfAdjointOperator};

    fn one_by_one() -> RankOneFamily {
        RankOneFamily::new(SelfAdjointOperator::diagonal(&[0.0]), CyclicVector::basis(1, 0).unwrap()).unwrap()
    }

    fn pair() -> RankOneFamily {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        RankOneFamily::new(
            SelfAdjointOperator::diagonal(&[-1.0, 1.0]),
            CyclicVector::new(vec![s, s]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn nu_kinds() {
        assert!((make_nu(&NuKind::CauchyWeight).unwrap().total_mass() - PI).abs() < 1e-15);
        assert!(!make_nu(&NuKind::Lebesgue).unwrap().capabilities().borel);
        let c = make_nu(&NuKind::Cantor { depth: 8 }).unwrap();
        assert!((c.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(c.resolution_floor(), Some(3f64.powi(-8)));
        assert!(NuKind::parse("gaussian").is_err());
        assert_eq!(
            NuKind::parse("atomic:1@0.5,2@0.5").unwrap(),
            NuKind::Atomic {
                atoms: vec![(1.0, 0.5), (2.0, 0.5)]
            }
        );
    }

    #[test]
    fn skipped_segments_carry_no_mass() {
        let fam = pair();
        let quad = QuadratureConfig::default();
        for kind in [NuKind::Cantor { depth: 4 }, NuKind::Uniform { a: -3.0, b: 2.0 }, NuKind::Lebesgue] {
            let nu = make_nu(&kind).unwrap();
            let probe = KappaProbe::new(fam.clone(), nu.clone(), quad.clone()).unwrap();
            let set = [(-0.5, 0.4)];
            let bps: Vec<f64> = [-0.5, 0.4].iter().map(|&e| fam.crossing_coupling(e)).collect();
            let full = integrate_nu(&nu, &bps, &quad, |l, w| set_integrand(&fam, &set, l, w).unwrap()).unwrap();
            let masked = probe.kappa_set(&set).unwrap();
            assert!((full.value - masked.value).abs() < 1e-9, "{kind:?}: {full:?} vs {masked:?}");
        }
    }

    #[test]
    fn kotani_one_by_one_is_exact() {
        let r = kotani_check(&one_by_one(), &[(-0.3, 2.5)], &QuadratureConfig::default()).unwrap();
        assert!(r.abs_err < 1e-9, "{r:?}");
    }

    #[test]
    fn dirac_nu_reproduces_mu_lambda() {
        let fam = pair();
        let probe = KappaProbe::new(
            fam.clone(),
            make_nu(&NuKind::Atomic { atoms: vec![(0.7, 1.0)] }).unwrap(),
            QuadratureConfig::default(),
        )
        .unwrap();
        let k = probe.kappa_set(&[(-0.5, 3.0)]).unwrap().value;
        assert!((k - fam.perturbed_mass_in(0.7, -0.5, 3.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn lebesgue_poisson_is_pi() {
        let probe = KappaProbe::new(pair(), Measure::lebesgue(), QuadratureConfig::default()).unwrap();
        for (x, e) in [(0.0, 1.0), (0.9, 1e-3), (-1.0, 1e-4), (5.0, 0.1)] {
            let v = probe.kappa_poisson(UpperHalfPlanePoint::new(x, e).unwrap()).unwrap();
            assert!((v.value - PI).abs() < 1e-8, "{x} {e}: {}", v.value);
        }
    }

    #[test]
    fn borel_identity_rejects_lebesgue() {
        let probe = KappaProbe::new(pair(), Measure::lebesgue(), QuadratureConfig::default()).unwrap();
        let grid = z_grid(&[0.0], &[1.0]).unwrap();
        assert!(matches!(borel_identity_check(&probe, &grid), Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_at_alpha_one_is_sharp_for_lebesgue() {
        let grid = z_grid(&[0.0, 3.0], &[1e-3, 1.0, 10.0]).unwrap();
        let v = validate_holder_constant(&Measure::lebesgue(), 1.0, 1.0, &grid).unwrap();
        assert!((v.empirical_sup - PI).abs() < 1e-12);
        assert!(!v.half_width_holds);
        assert!(v.full_width_holds);
        assert!((v.full_width_constant - PI).abs() < 1e-15);
    }

    #[test]
    fn alpha_zero_limit() {
        assert_eq!(holder_constant(0.0, 2.0), 2.0);
        assert!((holder_constant(1e-9, 2.0) - 2.0).abs() < 1e-8);
        let probe = KappaProbe::new(pair(), Measure::lebesgue(), QuadratureConfig::default()).unwrap();
        assert!(uah_bound_check(&probe, 1.5, 1.0, &[]).is_err());
    }

    #[test]
    fn atom_check_rejects_atomic_nu() {
        let probe = KappaProbe::new(pair(), Measure::dirac(1.0), QuadratureConfig::default()).unwrap();
        assert!(matches!(kappa_atom_check(&probe, &[0.0]), Err(Error::Precondition(_))));
        let probe = KappaProbe::new(pair(), Measure::lebesgue(), QuadratureConfig::default()).unwrap();
        let c = atom_candidates(probe.family(), 5, 2.0).unwrap();
        assert_eq!(kappa_atom_check(&probe, &c).unwrap().max_weight, 0.0);
    }
}
