//! Borel, Poisson and conjugate Poisson transforms of measures on the line.
//!
//! For `z = x + iε` in the upper half-plane,
//!
//! ```text
//! F_η(z) = ∫ dη(y)/(y - z) = Q_η(z) + i P_η(z)
//! P_η(z) = ∫ ε/((y-x)² + ε²) dη(y)
//! Q_η(z) = ∫ (y-x)/((y-x)² + ε²) dη(y)
//! ```
//!
//! Atoms are summed exactly in ascending position order with compensated
//! summation. Flat density pieces and the Lebesgue and Cauchy-weight families
//! use closed forms; those are cross-checked against adaptive quadrature once
//! per process before first use. Custom densities are integrated adaptively.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, precondition, Error, Result};
use crate::ladder::Ladder;
use crate::measure::{DensityPiece, FamilyTag, Measure, Profile};
use crate::numeric::{atan_difference, CompensatedSum};
use crate::quadrature::{integrate_with_breakpoints, AdaptiveConfig};

/// Absolute tolerance for density-piece quadrature.
pub const PIECE_TOLERANCE: f64 = 1e-12;

/// Tolerance of the once-per-process closed-form self check.
pub const FAST_PATH_TOLERANCE: f64 = 1e-10;

/// Default truncation of the dyadic growth series.
pub const DEFAULT_DYADIC_TERMS: usize = 60;

/// Position tolerance for recognising an atom at a query point.
pub const ATOM_POSITION_TOLERANCE: f64 = 1e-13;

/// A point `x + iε` with `ε > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfPlanePoint {
    x: f64,
    eps: f64,
}

impl UpperHalfPlanePoint {
    pub fn new(x: f64, eps: f64) -> Result<Self> {
        if !x.is_finite() || !eps.is_finite() || eps <= 0.0 {
            return argument(format!("{x} + {eps}i is not in the open upper half-plane"));
        }
        Ok(Self { x, eps })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.x, self.eps)
    }
}

/// `F = Q + iP`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformValue {
    pub q: f64,
    pub p: f64,
}

impl TransformValue {
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.q, self.p)
    }
}

/// Outcome of a pointwise inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Borel transform `F_η(z)`.
pub fn borel_transform(eta: &Measure, z: UpperHalfPlanePoint) -> Result<TransformValue> {
    if !eta.capabilities().borel {
        return Err(Error::UnsupportedTransform(format!(
            "Borel transform needs ∫dη/(1+|y|) < ∞ ({:?})",
            eta.tag()
        )));
    }
    let (q, p) = evaluate(eta, z, Part::Both)?;
    Ok(TransformValue { q, p: p.max(0.0) })
}

/// Poisson transform `P_η(z)`; exists whenever `∫dη/(1+y²) < ∞`.
pub fn poisson_transform(eta: &Measure, z: UpperHalfPlanePoint) -> Result<f64> {
    if !eta.capabilities().poisson {
        return Err(Error::UnsupportedTransform(format!(
            "Poisson transform needs ∫dη/(1+y²) < ∞ ({:?})",
            eta.tag()
        )));
    }
    let (_, p) = evaluate(eta, z, Part::Poisson)?;
    Ok(p.max(0.0))
}

/// Conjugate Poisson transform `Q_η(z) = Re F_η(z)`.
///
/// Refused unless the Borel transform exists: no principal-value convention is
/// applied for measures that only have a Poisson transform.
pub fn conjugate_poisson_transform(eta: &Measure, z: UpperHalfPlanePoint) -> Result<f64> {
    if !eta.capabilities().borel || matches!(eta.tag(), FamilyTag::Lebesgue) {
        return Err(Error::UnsupportedTransform(format!(
            "conjugate Poisson transform needs ∫dη/(1+|y|) < ∞ ({:?})",
            eta.tag()
        )));
    }
    let (q, _) = evaluate(eta, z, Part::Both)?;
    Ok(q)
}

#[derive(Clone, Copy, PartialEq)]
enum Part {
    Poisson,
    Both,
}

fn evaluate(eta: &Measure, z: UpperHalfPlanePoint, part: Part) -> Result<(f64, f64)> {
    ensure_fast_paths_validated();
    let (x, eps) = (z.x, z.eps);
    match eta.tag() {
        FamilyTag::Lebesgue => return Ok((f64::NAN, PI)),
        FamilyTag::CauchyWeight => {
            let f = cauchy_weight_borel(z.to_complex());
            return Ok((f.re, f.im));
        }
        _ => {}
    }
    let mut q = CompensatedSum::new();
    let mut p = CompensatedSum::new();
    for atom in eta.atoms() {
        let d = atom.position - x;
        let denom = d * d + eps * eps;
        p.add(atom.weight * eps / denom);
        if part == Part::Both {
            q.add(atom.weight * d / denom);
        }
    }
    for piece in eta.pieces() {
        let (pq, pp) = match piece.profile {
            Profile::Flat => flat_piece(piece, x, eps, part),
            Profile::Custom(_) => custom_piece(piece, x, eps, part)?,
        };
        p.add(pp);
        q.add(pq);
    }
    Ok((q.value(), p.value()))
}

/// Closed-form transform of a constant density on `[a, b)`.
fn flat_piece(piece: &DensityPiece, x: f64, eps: f64, part: Part) -> (f64, f64) {
    let h = piece.mass / piece.len();
    let (a, b) = (piece.start - x, piece.end - x);
    let p = h * atan_difference(b / eps, a / eps);
    let q = if part == Part::Both {
        // ½ ln((b²+ε²)/(a²+ε²)); the ln_1p form avoids cancellation for
        // thin pieces, the log difference keeps precision near a zero endpoint
        let r = (piece.end - piece.start) * (a + b) / (a * a + eps * eps);
        if r.abs() < 0.5 {
            0.5 * h * r.ln_1p()
        } else {
            h * (b.hypot(eps).ln() - a.hypot(eps).ln())
        }
    } else {
        0.0
    };
    (q, p)
}

fn custom_piece(piece: &DensityPiece, x: f64, eps: f64, part: Part) -> Result<(f64, f64)> {
    let cfg = AdaptiveConfig {
        abs_tol: PIECE_TOLERANCE,
        max_panels: 1_000_000,
    };
    let bps = [x - eps, x, x + eps];
    let p = integrate_with_breakpoints(
        |y| piece.density(y) * eps / ((y - x) * (y - x) + eps * eps),
        piece.start,
        piece.end,
        &bps,
        &cfg,
    )?
    .value;
    let q = if part == Part::Both {
        integrate_with_breakpoints(
            |y| piece.density(y) * (y - x) / ((y - x) * (y - x) + eps * eps),
            piece.start,
            piece.end,
            &bps,
            &cfg,
        )?
        .value
    } else {
        0.0
    };
    Ok((q, p))
}

/// `∫ dy / ((1+y²)(y-z)) = -π/(z+i)`.
fn cauchy_weight_borel(z: Complex64) -> Complex64 {
    -PI / (z + Complex64::i())
}

/// Validate every closed-form path against generic quadrature once per
/// process. A mismatch is a programming error and aborts.
pub fn ensure_fast_paths_validated() {
    static CHECKED: OnceLock<()> = OnceLock::new();
    CHECKED.get_or_init(|| {
        if let Err(msg) = validate_fast_paths() {
            panic!("closed-form transform self-check failed: {msg}");
        }
    });
}

fn validate_fast_paths() -> std::result::Result<(), String> {
    let cfg = AdaptiveConfig {
        abs_tol: 1e-13,
        max_panels: 200_000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    let close = |a: f64, b: f64| (a - b).abs() <= FAST_PATH_TOLERANCE * a.abs().max(b.abs()).max(1.0);
    let quad = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, bps: &[f64]| {
        integrate_with_breakpoints(f, a, b, bps, &cfg)
            .map(|r| r.value)
            .map_err(|e| e.to_string())
    };
    for _ in 0..8 {
        let x: f64 = rng.random_range(-2.0..2.0);
        let eps: f64 = rng.random_range(0.1..2.0);

        let a: f64 = rng.random_range(-2.0..1.0);
        let b = a + rng.random_range(0.1..2.0);
        let mass = rng.random_range(0.1..2.0);
        let piece = DensityPiece::flat(a, b, mass);
        let h = mass / (b - a);
        let (q, p) = flat_piece(&piece, x, eps, Part::Both);
        let pq = quad(&|y| h * eps / ((y - x) * (y - x) + eps * eps), a, b, &[x])?;
        let qq = quad(&|y| h * (y - x) / ((y - x) * (y - x) + eps * eps), a, b, &[x])?;
        if !close(p, pq) || !close(q, qq) {
            return Err(format!("flat piece at {x}+{eps}i: ({q}, {p}) vs ({qq}, {pq})"));
        }

        let theta = |t: f64| t.tan();
        let peak = x.atan();
        let lp = quad(
            &|t| {
                let y = theta(t);
                let c = t.cos();
                eps / ((y - x) * (y - x) + eps * eps) / (c * c)
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            &[peak],
        )?;
        if !close(lp, PI) {
            return Err(format!("Lebesgue Poisson at {x}+{eps}i: {lp} vs π"));
        }

        let f = cauchy_weight_borel(Complex64::new(x, eps));
        let cq = quad(
            &|t| {
                let y = theta(t);
                (y - x) / ((y - x) * (y - x) + eps * eps)
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            &[peak],
        )?;
        let cp = quad(
            &|t| {
                let y = theta(t);
                eps / ((y - x) * (y - x) + eps * eps)
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            &[peak],
        )?;
        if !close(f.re, cq) || !close(f.im, cp) {
            return Err(format!("Cauchy weight at {x}+{eps}i: {f} vs {cq}+{cp}i"));
        }
    }
    Ok(())
}

/// `ε^{1-α} P_η(x+iε) ≥ M_η(x;ε)/(2ε^α)`.
pub fn growth_lower_bound_check(eta: &Measure, x: f64, eps: f64, alpha: f64) -> Result<BoundCheck> {
    if !(0.0..=1.0).contains(&alpha) {
        return argument(format!("alpha must lie in [0,1], got {alpha}"));
    }
    let z = UpperHalfPlanePoint::new(x, eps)?;
    let p = poisson_transform(eta, z)?;
    let lhs = eps.powf(1.0 - alpha) * p;
    let rhs = eta.growth_function(x, eps)? / (2.0 * eps.powf(alpha));
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-12,
    })
}

/// `max{P_η, |Q_η|}(x+iε) ≤ (2/ε) Σ_n 2^{-n} M_η(x; 2^{n+1}ε)` for a
/// probability measure, with the series cut after `terms` terms and the tail
/// bounded by `(2/ε)·2^{1-terms}`.
pub fn dyadic_bound_check(eta: &Measure, x: f64, eps: f64, terms: usize) -> Result<BoundCheck> {
    let total = eta.total_mass();
    if !((total - 1.0).abs() <= 1e-12) {
        return precondition(format!("dyadic bound needs a probability measure, total mass {total}"));
    }
    if terms == 0 {
        return argument("dyadic bound needs at least one term");
    }
    let z = UpperHalfPlanePoint::new(x, eps)?;
    let f = borel_transform(eta, z)?;
    let lhs = f.p.max(f.q.abs());
    let mut series = CompensatedSum::new();
    let mut weight = 1.0;
    let mut scale = 2.0 * eps;
    for _ in 0..terms {
        series.add(weight * eta.mass_in(x - scale, x + scale));
        weight *= 0.5;
        scale *= 2.0;
    }
    // remaining terms: masses ≤ 1, Σ_{n≥N} 2^{-n} = 2^{1-N}
    series.add(2.0 * weight);
    let bound = 2.0 / eps * series.value();
    Ok(BoundCheck {
        lhs,
        rhs: bound,
        holds: lhs <= bound,
    })
}

/// Weight of the atom of `η` at `x`.
///
/// Returns the exact weight if an atom sits within
/// [`ATOM_POSITION_TOLERANCE`] of `x`; otherwise extrapolates `εP_η(x+iε)`
/// to `ε → 0` along `ladder` (floored at the measure's resolution floor).
pub fn atom_weight(eta: &Measure, x: f64, ladder: &Ladder) -> Result<f64> {
    if !eta.capabilities().poisson {
        return Err(Error::UnsupportedTransform(
            "atom weight estimate needs the Poisson transform".into(),
        ));
    }
    let exact = eta.point_mass(x, ATOM_POSITION_TOLERANCE);
    if exact > 0.0 {
        return Ok(exact);
    }
    let ladder = ladder.with_floor(eta.resolution_floor());
    ladder.validate()?;
    let scales = ladder.scales();
    let values = scales
        .iter()
        .map(|&e| Ok(e * poisson_transform(eta, UpperHalfPlanePoint::new(x, e)?)?))
        .collect::<Result<Vec<f64>>>()?;
    let estimate = match values.as_slice() {
        [] => return Err(Error::InsufficientResolution("no ladder rung above the floor".into())),
        [v] => *v,
        [.., prev, last] => {
            // εP = w + cε + …: one Richardson step removes the linear term
            let r = ladder.ratio;
            let extrapolated = (last - r * prev) / (1.0 - r);
            extrapolated.clamp(0.0, *last)
        }
    };
    Ok(estimate.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{make_cantor, Atom};

    fn z(x: f64, e: f64) -> UpperHalfPlanePoint {
        UpperHalfPlanePoint::new(x, e).unwrap()
    }

    #[test]
    fn dirac_at_i() {
        let f = borel_transform(&Measure::dirac(0.0), z(0.0, 1.0)).unwrap();
        assert!(f.q.abs() < 1e-16);
        assert!((f.p - 1.0).abs() < 1e-16);
    }

    #[test]
    fn symmetric_pair_cancels_real_part() {
        let m = Measure::atomic(vec![Atom::new(-1.0, 0.5), Atom::new(1.0, 0.5)]).unwrap();
        let f = borel_transform(&m, z(0.0, 1.0)).unwrap();
        assert!(f.q.abs() < 1e-16);
        assert!((f.p - 0.5).abs() < 1e-16);
    }

    #[test]
    fn lebesgue_poisson_is_pi_and_borel_refused() {
        let l = Measure::lebesgue();
        assert_eq!(poisson_transform(&l, z(3.0, 0.01)).unwrap(), PI);
        assert!(matches!(borel_transform(&l, z(0.0, 1.0)), Err(Error::UnsupportedTransform(_))));
        assert!(matches!(
            conjugate_poisson_transform(&l, z(0.0, 1.0)),
            Err(Error::UnsupportedTransform(_))
        ));
    }

    #[test]
    fn dirac_poisson_scales_inversely() {
        for e in [1e-3, 0.5, 7.0] {
            let p = poisson_transform(&Measure::dirac(0.0), z(0.0, e)).unwrap();
            assert!((p - 1.0 / e).abs() <= 1e-15 / e);
        }
    }

    #[test]
    fn dirac_conjugate() {
        let q = conjugate_poisson_transform(&Measure::dirac(0.0), z(1.0, 1.0)).unwrap();
        assert!((q + 0.5).abs() < 1e-16);
    }

    #[test]
    fn point_off_half_plane_rejected() {
        assert!(UpperHalfPlanePoint::new(0.0, 0.0).is_err());
        assert!(UpperHalfPlanePoint::new(0.0, -1.0).is_err());
        assert!(UpperHalfPlanePoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn growth_bound_examples() {
        let c = growth_lower_bound_check(&Measure::lebesgue(), 0.3, 0.2, 1.0).unwrap();
        assert!((c.lhs - PI).abs() < 1e-15 && (c.rhs - 1.0).abs() < 1e-15 && c.holds);
        let c = growth_lower_bound_check(&Measure::dirac(0.0), 0.0, 0.37, 0.0).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-15 && (c.rhs - 0.5).abs() < 1e-15 && c.holds);
        assert!(growth_lower_bound_check(&Measure::lebesgue(), 0.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn dyadic_bound_dirac() {
        let c = dyadic_bound_check(&Measure::dirac(0.0), 0.0, 1.0, DEFAULT_DYADIC_TERMS).unwrap();
        assert_eq!(c.lhs, 1.0);
        assert!(c.rhs >= 4.0 && c.holds);
        let heavy = Measure::atomic(vec![Atom::new(0.0, 2.0)]).unwrap();
        assert!(matches!(
            dyadic_bound_check(&heavy, 0.0, 1.0, 60),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn atom_weights() {
        let mixed = Measure::dirac(0.0)
            .combine(&Measure::uniform(0.0, 1.0).unwrap())
            .unwrap();
        assert_eq!(atom_weight(&mixed, 0.0, &Ladder::default()).unwrap(), 1.0);
        let leb = atom_weight(&Measure::lebesgue(), 0.0, &Ladder::default()).unwrap();
        assert!(leb < 1e-10);
        let cantor = atom_weight(&make_cantor(10).unwrap(), 0.25, &Ladder::default()).unwrap();
        assert!(cantor <= 1e-3, "{cantor}");
    }

    #[test]
    fn custom_density_matches_flat_closed_form() {
        let flat = Measure::uniform(-0.5, 1.5).unwrap();
        let custom = Measure::with_density(-0.5, 1.5, |_| 0.5).unwrap();
        for (x, e) in [(0.0, 0.1), (1.4, 0.02), (-3.0, 2.0)] {
            let a = borel_transform(&flat, z(x, e)).unwrap();
            let b = borel_transform(&custom, z(x, e)).unwrap();
            assert!((a.p - b.p).abs() < 1e-11, "{a:?} {b:?}");
            assert!((a.q - b.q).abs() < 1e-11, "{a:?} {b:?}");
        }
    }
}
