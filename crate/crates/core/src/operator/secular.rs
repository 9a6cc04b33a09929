//! Roots of the secular equation `F_μ(x) = -1/λ` for an atomic `μ`.
//!
//! `F_μ(x) = Σ w_j/(E_j - x)` increases from `-∞` to `+∞` on every gap
//! between consecutive poles, so each gap holds exactly one root, and one
//! more root lies beyond the extreme pole on the side of `sign(λ)`.
//!
//! Every root is located as an offset `t > 0` from its nearest pole, which
//! keeps full relative precision in `x - E_j` when the root hugs a pole
//! (small `|λ|`). The residue of `F_μ/(1 + λF_μ)` at a root gives its weight
//! `1/(λ² F'_μ(x))`.

use crate::error::{Error, Result};
use crate::measure::Atom;

const MAX_BISECTIONS: usize = 2200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularRoot {
    pub position: f64,
    pub weight: f64,
    /// `1/F'_μ(position)`, so `weight = inv_derivative/λ²`.
    pub inv_derivative: f64,
}

/// Poles are sorted, distinct, and carry positive weight.
#[derive(Debug, Clone, Copy)]
pub struct Secular<'a> {
    poles: &'a [Atom],
}

impl<'a> Secular<'a> {
    pub fn new(poles: &'a [Atom]) -> Self {
        debug_assert!(poles.windows(2).all(|w| w[0].position < w[1].position));
        Self { poles }
    }

    /// `F_μ(x)` on the real axis; infinite at a pole.
    pub fn value(&self, x: f64) -> f64 {
        let mut sum = crate::numeric::CompensatedSum::new();
        for p in self.poles {
            let d = p.position - x;
            if d == 0.0 {
                return f64::INFINITY;
            }
            sum.add(p.weight / d);
        }
        sum.value()
    }

    /// `F'_μ(x) = Σ w_j/(E_j - x)²`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.poles
            .iter()
            .map(|p| {
                let d = p.position - x;
                p.weight / (d * d)
            })
            .sum()
    }

    /// `F` and `F'` at `x = E_origin + sign·t`, with every difference
    /// `E_i - x` formed relative to the origin pole.
    fn eval_offset(&self, origin: usize, sign: f64, t: f64) -> (f64, f64) {
        let e0 = self.poles[origin].position;
        let mut f = crate::numeric::CompensatedSum::new();
        let mut df = 0.0;
        for (i, p) in self.poles.iter().enumerate() {
            let d = if i == origin {
                -sign * t
            } else {
                (p.position - e0) - sign * t
            };
            f.add(p.weight / d);
            df += p.weight / (d * d);
        }
        (f.value(), df)
    }

    /// Solve `sign·(F + 1/λ) = 0` for `t ∈ (0, hi]`; the left side is
    /// increasing in `t`, negative near zero and nonnegative at `hi`.
    fn solve_offset(&self, origin: usize, sign: f64, hi: f64, lambda: f64) -> Result<SecularRoot> {
        let inv = 1.0 / lambda;
        let s = |t: f64| {
            let (f, df) = self.eval_offset(origin, sign, t);
            (sign * (f + inv), df)
        };
        let (mut lo, mut hi) = (0.0_f64, hi);
        for _ in 0..MAX_BISECTIONS {
            let mid = if lo == 0.0 {
                0.5 * hi
            } else if hi > 4.0 * lo {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
            if mid <= lo || mid >= hi {
                break;
            }
            if s(mid).0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if lo > 0.0 && hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
        }
        if !(hi - lo <= 4.0 * f64::EPSILON * hi || lo == 0.0 && hi < f64::MIN_POSITIVE * 4.0) {
            return Err(Error::Numerical(format!(
                "secular bisection stalled with bracket ({lo:e}, {hi:e}) at λ = {lambda}"
            )));
        }
        let mut t = 0.5 * (lo + hi);
        // one safeguarded Newton step with the exact derivative
        let (val, df) = s(t);
        if df > 0.0 && df.is_finite() {
            let cand = t - val / df;
            if cand > lo && cand < hi {
                t = cand;
            }
        }
        let (_, df) = s(t);
        if !(t > 0.0) || !df.is_finite() || df <= 0.0 {
            return Err(Error::Numerical(format!(
                "secular root collapsed onto pole {} at λ = {lambda}",
                self.poles[origin].position
            )));
        }
        Ok(SecularRoot {
            position: self.poles[origin].position + sign * t,
            weight: weight_from_derivative(lambda, df),
            inv_derivative: 1.0 / df,
        })
    }

    /// Root inside the gap `(E_k, E_{k+1})`.
    pub fn gap_root(&self, k: usize, lambda: f64) -> Result<SecularRoot> {
        let left = self.poles[k].position;
        let right = self.poles[k + 1].position;
        let half = 0.5 * (right - left);
        let mid = left + half;
        if self.value(mid) + 1.0 / lambda >= 0.0 {
            self.solve_offset(k, 1.0, half, lambda)
        } else {
            self.solve_offset(k + 1, -1.0, half, lambda)
        }
    }

    /// Root beyond the largest pole (`λ > 0`) or below the smallest (`λ < 0`).
    pub fn exterior_root(&self, lambda: f64) -> Result<SecularRoot> {
        // |F| ≤ 1/t at offset t past the extreme pole, so t = 2|λ| brackets the root
        let hi = 2.0 * lambda.abs();
        if lambda > 0.0 {
            self.solve_offset(self.poles.len() - 1, 1.0, hi, lambda)
        } else {
            self.solve_offset(0, -1.0, hi, lambda)
        }
    }

    /// All roots in ascending order.
    pub fn roots(&self, lambda: f64) -> Result<Vec<SecularRoot>> {
        check_lambda(lambda)?;
        let m = self.poles.len();
        let mut out = Vec::with_capacity(m);
        if lambda < 0.0 {
            out.push(self.exterior_root(lambda)?);
        }
        for k in 0..m.saturating_sub(1) {
            out.push(self.gap_root(k, lambda)?);
        }
        if lambda > 0.0 {
            out.push(self.exterior_root(lambda)?);
        }
        Ok(out)
    }

    /// `μ_λ((a, b))`: total weight of the roots inside the open interval.
    pub fn mass_in(&self, lambda: f64, a: f64, b: f64) -> Result<f64> {
        Ok(crate::numeric::compensated_sum(
            self.roots_in(lambda, a, b)?.iter().map(|r| r.weight),
        ))
    }

    /// Roots inside the open interval `(a, b)`, ascending.
    pub fn roots_in(&self, lambda: f64, a: f64, b: f64) -> Result<Vec<SecularRoot>> {
        let mut found = Vec::new();
        for region in self.regions_in(lambda, a, b)? {
            let root = match region {
                Region::Gap(k) => self.gap_root(k, lambda)?,
                Region::Exterior => self.exterior_root(lambda)?,
            };
            if root.position > a && root.position < b {
                found.push(root);
            }
        }
        Ok(found)
    }

    /// Number of roots inside `(a, b)`, without solving for them.
    pub fn count_in(&self, lambda: f64, a: f64, b: f64) -> Result<usize> {
        Ok(self.regions_in(lambda, a, b)?.len())
    }

    /// Regions between poles whose root lies inside `(a, b)`, in ascending
    /// order. `F` increases across each region, so the signs of `F + 1/λ`
    /// at the clipped ends decide without solving.
    fn regions_in(&self, lambda: f64, a: f64, b: f64) -> Result<Vec<Region>> {
        check_lambda(lambda)?;
        let mut out = Vec::new();
        if !(b > a) {
            return Ok(out);
        }
        let target = -1.0 / lambda;
        let m = self.poles.len();
        let (f_a, f_b) = (self.value(a), self.value(b));
        let contains = |region_lo: f64, region_hi: f64| {
            let lo = a.max(region_lo);
            let hi = b.min(region_hi);
            if !(hi > lo) {
                return false;
            }
            let f_lo = if lo == region_lo { f64::NEG_INFINITY } else { f_a };
            let f_hi = if hi == region_hi { f64::INFINITY } else { f_b };
            f_lo < target && target < f_hi
        };
        if lambda < 0.0 && contains(f64::NEG_INFINITY, self.poles[0].position) {
            out.push(Region::Exterior);
        }
        let first = self.poles.partition_point(|p| p.position <= a).saturating_sub(1);
        for k in first..m.saturating_sub(1) {
            let (l, r) = (self.poles[k].position, self.poles[k + 1].position);
            if l >= b {
                break;
            }
            if contains(l, r) {
                out.push(Region::Gap(k));
            }
        }
        if lambda > 0.0 && contains(self.poles[m - 1].position, f64::INFINITY) {
            out.push(Region::Exterior);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
enum Region {
    Gap(usize),
    Exterior,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Argument(format!(
            "secular route needs a finite nonzero coupling, got {lambda}"
        )));
    }
    Ok(())
}

/// `1/(λ² F')`, arranged to avoid overflow of `λ²`.
fn weight_from_derivative(lambda: f64, df: f64) -> f64 {
    let inv = 1.0 / lambda;
    inv * inv / df
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pole() {
        let poles = [Atom::new(0.0, 1.0)];
        let s = Secular::new(&poles);
        let roots = s.roots(2.0).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].position - 2.0).abs() < 1e-15);
        assert!((roots[0].weight - 1.0).abs() < 1e-15);
        let neg = s.roots(-0.5).unwrap();
        assert!((neg[0].position + 0.5).abs() < 1e-15);
    }

    #[test]
    fn tiny_coupling_keeps_relative_precision() {
        let poles = [Atom::new(0.0, 0.5), Atom::new(2.0, 0.5)];
        let s = Secular::new(&poles);
        let lambda = 1e-30;
        let roots = s.roots(lambda).unwrap();
        // first-order shift λ·w
        assert!((roots[0].position - 0.5e-30).abs() < 1e-44);
        assert!((roots[0].weight - 0.5).abs() < 1e-14);
        let total: f64 = roots.iter().map(|r| r.weight).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn huge_coupling_sends_one_root_away() {
        let poles = [Atom::new(-1.0, 0.5), Atom::new(1.0, 0.5)];
        let s = Secular::new(&poles);
        let roots = s.roots(1e12).unwrap();
        assert!(roots[1].position > 1e11);
        // remaining root sits at the zero of F, x = 0
        assert!(roots[0].position.abs() < 1e-10);
        let total: f64 = roots.iter().map(|r| r.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_is_rejected() {
        let poles = [Atom::new(0.0, 1.0)];
        assert!(matches!(Secular::new(&poles).roots(0.0), Err(Error::Argument(_))));
    }

    #[test]
    fn mass_in_matches_root_list() {
        let poles = [Atom::new(-1.0, 0.2), Atom::new(0.3, 0.5), Atom::new(2.0, 0.3)];
        let s = Secular::new(&poles);
        for lambda in [-3.0, -0.4, 0.7, 5.0] {
            let roots = s.roots(lambda).unwrap();
            for (a, b) in [(-10.0, 10.0), (-0.5, 0.7), (0.31, 1.9), (2.0, 40.0)] {
                let expect: f64 = roots
                    .iter()
                    .filter(|r| r.position > a && r.position < b)
                    .map(|r| r.weight)
                    .sum();
                assert!((s.mass_in(lambda, a, b).unwrap() - expect).abs() < 1e-15);
            }
        }
    }
}
