//! Finite self-adjoint matrices, spectral measures with respect to a unit
//! vector, and the rank-one family `A_λ = A + λ⟨φ,·⟩φ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, precondition, Error, Result};
use crate::measure::{Atom, Measure};
use crate::numeric::ComplexSum;

mod eigen;
pub mod generate;
mod secular;

pub use eigen::{eigendecompose, Eigen};
pub use generate::{DiagonalDistribution, GeneratorKind, GeneratorSpec};
pub use secular::{Secular, SecularRoot};

/// Relative asymmetry `|A_ij - A_ji| / max|A|` accepted by [`SelfAdjointOperator::new`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-14;
/// Allowed deviation of `‖φ‖` from one.
pub const NORM_TOLERANCE: f64 = 1e-14;
/// Eigenvalues closer than this multiple of `‖A‖` are merged into one atom.
pub const MERGE_TOLERANCE: f64 = 1e-11;
/// Atoms at or below this weight are not treated as atoms of `μ_λ`.
pub const ZERO_WEIGHT: f64 = 1e-12;
/// Required eigen-residual `‖Aψ - Eψ‖` relative to `‖A‖`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Dense real symmetric `n × n` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfAdjointOperator {
    n: usize,
    entries: Vec<f64>,
}

impl SelfAdjointOperator {
    /// Validates symmetry to `1e-14·max|A|` and stores the exactly
    /// symmetrized matrix `(A + Aᵀ)/2`.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return argument("operator dimension must be at least 1");
        }
        if entries.len() != n * n {
            return argument(format!("expected {} entries for n = {n}, got {}", n * n, entries.len()));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return argument(format!("matrix entry {bad} is not finite"));
        }
        let scale = entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut sym = entries;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (sym[i * n + j], sym[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE * scale {
                    return precondition(format!(
                        "matrix is not symmetric: A[{i}][{j}] = {a}, A[{j}][{i}] = {b}"
                    ));
                }
                let avg = 0.5 * (a + b);
                sym[i * n + j] = avg;
                sym[j * n + i] = avg;
            }
        }
        Ok(Self { n, entries: sym })
    }

    pub fn identity(n: usize) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 1.0;
        }
        Self { n, entries: d }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut d = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            d[i * n + i] = *v;
        }
        Self { n, entries: d }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm, an upper bound for the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let row = &self.entries[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// Unit vector `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicVector(Vec<f64>);

impl CyclicVector {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return argument("vector must be nonempty and finite");
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return precondition(format!("vector norm is {norm}, expected 1"));
        }
        Ok(Self(v))
    }

    /// `v/‖v‖`.
    pub fn normalized(v: Vec<f64>) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return argument("vector entries must be finite");
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return argument("cannot normalize the zero vector");
        }
        Ok(Self(v.into_iter().map(|x| x / norm).collect()))
    }

    /// The standard basis vector `e_k` in dimension `n`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return argument(format!("basis index {k} out of range for n = {n}"));
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Ok(Self(v))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Purely atomic probability measure `Σ w_j δ_{E_j}` with sorted, distinct
/// eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
}

impl SpectralMeasure {
    fn from_sorted(atoms: Vec<Atom>) -> Self {
        Self { atoms }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        crate::numeric::compensated_sum(self.atoms.iter().map(|a| a.weight))
    }

    /// Atoms with weight above `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<Atom> {
        self.atoms.iter().copied().filter(|a| a.weight > threshold).collect()
    }

    pub fn to_measure(&self) -> Measure {
        Measure::atomic(self.atoms.clone()).expect("spectral atoms are finite and nonnegative")
    }

    /// Open-interval mass `μ((a, b))`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        crate::numeric::compensated_sum(
            self.atoms
                .iter()
                .filter(|x| x.position > a && x.position < b)
                .map(|x| x.weight),
        )
    }

    /// `F_μ(z) = Σ w_j/(E_j - z)`.
    pub fn borel(&self, z: Complex64) -> Complex64 {
        let mut sum = ComplexSum::default();
        for a in &self.atoms {
            sum.add(a.weight / (a.position - z));
        }
        sum.value()
    }
}

/// Atoms `(E_j, ⟨φ,ψ_j⟩²)` from an eigendecomposition, merging clusters of
/// eigenvalues within `MERGE_TOLERANCE·‖A‖`.
fn measure_from_eigen(eigen: &Eigen, phi: &CyclicVector) -> SpectralMeasure {
    let tol = MERGE_TOLERANCE * eigen.spectral_norm();
    let mut atoms: Vec<Atom> = Vec::with_capacity(eigen.values.len());
    let mut members: Vec<(f64, f64)> = Vec::new();
    let flush = |members: &mut Vec<(f64, f64)>, atoms: &mut Vec<Atom>| {
        if members.is_empty() {
            return;
        }
        let weight: f64 = members.iter().map(|m| m.1).sum();
        let position = if weight > 0.0 {
            members.iter().map(|m| m.0 * m.1).sum::<f64>() / weight
        } else {
            members.iter().map(|m| m.0).sum::<f64>() / members.len() as f64
        };
        atoms.push(Atom::new(position, weight));
        members.clear();
    };
    for (value, vector) in eigen.values.iter().zip(&eigen.vectors) {
        let overlap: f64 = vector.iter().zip(phi.as_slice()).map(|(a, b)| a * b).sum();
        if let Some(&(last, _)) = members.last() {
            if value - last > tol {
                flush(&mut members, &mut atoms);
            }
        }
        members.push((*value, overlap * overlap));
    }
    flush(&mut members, &mut atoms);
    SpectralMeasure::from_sorted(atoms)
}

fn check_dims(a: &SelfAdjointOperator, phi: &CyclicVector) -> Result<()> {
    if a.dim() != phi.len() {
        return argument(format!(
            "operator dimension {} does not match vector length {}",
            a.dim(),
            phi.len()
        ));
    }
    Ok(())
}

/// Spectral measure of `A` with respect to `φ`.
pub fn spectral_measure(a: &SelfAdjointOperator, phi: &CyclicVector) -> Result<SpectralMeasure> {
    check_dims(a, phi)?;
    Ok(measure_from_eigen(&eigendecompose(a)?, phi))
}

/// `A + λ φφᵀ`.
pub fn perturb(a: &SelfAdjointOperator, phi: &CyclicVector, lambda: f64) -> Result<SelfAdjointOperator> {
    check_dims(a, phi)?;
    let n = a.dim();
    let p = phi.as_slice();
    let mut entries = a.entries().to_vec();
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] += lambda * (p[i] * p[j]);
        }
    }
    Ok(SelfAdjointOperator { n, entries })
}

/// `F_{μ_λ} = F/(1 + λF)`.
pub fn aronszajn_krein(f: Complex64, lambda: f64) -> Result<Complex64> {
    let denom = 1.0 + lambda * f;
    if denom.norm() < 1e-300 {
        return Err(Error::Numerical(format!(
            "1 + λF vanishes at F = {f}, λ = {lambda}"
        )));
    }
    Ok(f / denom)
}

/// `A`, `φ` and the cached eigen-data and spectral measure of `A`.
#[derive(Debug, Clone)]
pub struct RankOneFamily {
    op: SelfAdjointOperator,
    phi: CyclicVector,
    eigen: Eigen,
    base: SpectralMeasure,
    /// Positive-weight atoms of `μ`, the poles of `F_μ`.
    poles: Vec<Atom>,
    norm: f64,
}

impl RankOneFamily {
    pub fn new(op: SelfAdjointOperator, phi: CyclicVector) -> Result<Self> {
        check_dims(&op, &phi)?;
        let eigen = eigendecompose(&op)?;
        let norm = eigen.spectral_norm();
        for (value, vector) in eigen.values.iter().zip(&eigen.vectors) {
            let av = op.apply(vector);
            let residual = av
                .iter()
                .zip(vector)
                .map(|(x, v)| (x - value * v).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual > RESIDUAL_TOLERANCE * norm.max(f64::MIN_POSITIVE) {
                return Err(Error::Numerical(format!(
                    "eigen-residual {residual:e} exceeds tolerance for eigenvalue {value}"
                )));
            }
        }
        let base = measure_from_eigen(&eigen, &phi);
        let poles = base.support(ZERO_WEIGHT);
        Ok(Self {
            op,
            phi,
            eigen,
            base,
            poles,
            norm,
        })
    }

    pub fn operator(&self) -> &SelfAdjointOperator {
        &self.op
    }

    pub fn phi(&self) -> &CyclicVector {
        &self.phi
    }

    pub fn eigen(&self) -> &Eigen {
        &self.eigen
    }

    /// The spectral measure `μ` of `A`.
    pub fn base_measure(&self) -> &SpectralMeasure {
        &self.base
    }

    /// Atoms of `μ` with weight above [`ZERO_WEIGHT`].
    pub fn poles(&self) -> &[Atom] {
        &self.poles
    }

    /// Spectral norm `‖A‖`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Every eigenvalue carries weight and none is degenerate.
    pub fn is_cyclic(&self) -> bool {
        self.poles.len() == self.op.dim()
    }

    fn secular(&self) -> Secular<'_> {
        Secular::new(&self.poles)
    }

    /// `μ_λ` from the eigendecomposition of `A_λ`.
    pub fn perturbed_measure_direct(&self, lambda: f64) -> Result<SpectralMeasure> {
        if lambda == 0.0 {
            return Ok(self.base.clone());
        }
        spectral_measure(&perturb(&self.op, &self.phi, lambda)?, &self.phi)
    }

    /// `μ_λ` from the roots of `F_μ(x) = -1/λ`. Eigenvalues of `A` orthogonal
    /// to `φ` persist in `A_λ` but carry no weight and are omitted.
    pub fn perturbed_measure_secular(&self, lambda: f64) -> Result<SpectralMeasure> {
        let roots = self.secular().roots(lambda)?;
        Ok(SpectralMeasure::from_sorted(
            roots.into_iter().map(|r| Atom::new(r.position, r.weight)).collect(),
        ))
    }

    /// `F_μ(z)`.
    pub fn borel_base(&self, z: Complex64) -> Complex64 {
        self.base.borel(z)
    }

    /// `F_μ(x)` on the real axis, summed over the poles.
    pub fn real_borel(&self, x: f64) -> f64 {
        self.secular().value(x)
    }

    pub fn real_borel_derivative(&self, x: f64) -> f64 {
        self.secular().derivative(x)
    }

    /// The coupling `λ* = -1/F_μ(b)` at which `b` is an eigenvalue of `A_λ`
    /// (infinite when `F_μ(b) = 0`, zero when `b` is a pole).
    pub fn crossing_coupling(&self, b: f64) -> f64 {
        -1.0 / self.real_borel(b)
    }

    /// `μ_λ((a, b))`, solving only the secular roots that can land inside.
    pub fn perturbed_mass_in(&self, lambda: f64, a: f64, b: f64) -> Result<f64> {
        if lambda == 0.0 {
            return Ok(self.base.mass_in(a, b));
        }
        self.secular().mass_in(lambda, a, b)
    }

    /// Atoms of `μ_λ` inside `(a, b)` from the secular equation (`λ ≠ 0`).
    pub fn perturbed_roots_in(&self, lambda: f64, a: f64, b: f64) -> Result<Vec<SecularRoot>> {
        self.secular().roots_in(lambda, a, b)
    }

    /// Number of atoms of `μ_λ` inside `(a, b)`, `λ ≠ 0`.
    pub fn perturbed_count_in(&self, lambda: f64, a: f64, b: f64) -> Result<usize> {
        self.secular().count_in(lambda, a, b)
    }

    /// No atom of `μ_{λ1}` lies within `tol` of an atom of `μ_{λ2}`.
    pub fn mutual_singularity_check(&self, lambda1: f64, lambda2: f64, tol: f64) -> Result<bool> {
        if lambda1 == lambda2 {
            return precondition("mutual singularity needs two distinct couplings");
        }
        let m1 = self.perturbed_measure_direct(lambda1)?.support(ZERO_WEIGHT);
        let m2 = self.perturbed_measure_direct(lambda2)?.support(ZERO_WEIGHT);
        let closest = m1
            .iter()
            .flat_map(|a| m2.iter().map(move |b| (a.position - b.position).abs()))
            .fold(f64::INFINITY, f64::min);
        Ok(closest > tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(diag: &[f64], phi: Vec<f64>) -> RankOneFamily {
        RankOneFamily::new(SelfAdjointOperator::diagonal(diag), CyclicVector::new(phi).unwrap()).unwrap()
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let err = SelfAdjointOperator::new(2, vec![0.0, 1.0, 1.1, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn vector_norm_checked() {
        assert!(matches!(CyclicVector::new(vec![1.0, 1.0]), Err(Error::Precondition(_))));
        let v = CyclicVector::normalized(vec![3.0, 4.0]).unwrap();
        assert_eq!(v.as_slice(), &[0.6, 0.8]);
    }

    #[test]
    fn spectral_measure_of_diagonal() {
        let a = SelfAdjointOperator::diagonal(&[0.0, 1.0]);
        let m = spectral_measure(&a, &CyclicVector::basis(2, 0).unwrap()).unwrap();
        assert_eq!(m.support(ZERO_WEIGHT), vec![Atom::new(0.0, 1.0)]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = spectral_measure(&a, &CyclicVector::new(vec![s, s]).unwrap()).unwrap();
        assert!((m.atoms()[0].weight - 0.5).abs() < 1e-15);
        assert!((m.atoms()[1].weight - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_eigenvalues_merge() {
        let a = SelfAdjointOperator::diagonal(&[1.0, 1.0, 2.0]);
        let phi = CyclicVector::normalized(vec![1.0, 1.0, 1.0]).unwrap();
        let m = spectral_measure(&a, &phi).unwrap();
        assert_eq!(m.atoms().len(), 2);
        assert!((m.atoms()[0].weight - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perturb_one_by_one() {
        let a = SelfAdjointOperator::diagonal(&[0.0]);
        let p = perturb(&a, &CyclicVector::basis(1, 0).unwrap(), 3.0).unwrap();
        assert_eq!(p.entries(), &[3.0]);
        assert_eq!(perturb(&a, &CyclicVector::basis(1, 0).unwrap(), 0.0).unwrap(), a);
    }

    #[test]
    fn secular_one_by_one() {
        let f = family(&[0.0], vec![1.0]);
        let m = f.perturbed_measure_secular(2.0).unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert!((m.atoms()[0].position - 2.0).abs() < 1e-15);
        assert!((m.atoms()[0].weight - 1.0).abs() < 1e-15);
        assert!(matches!(f.perturbed_measure_secular(0.0), Err(Error::Argument(_))));
    }

    #[test]
    fn secular_matches_direct_two_by_two() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = family(&[-1.0, 1.0], vec![s, s]);
        let sec = f.perturbed_measure_secular(1.0).unwrap();
        let dir = f.perturbed_measure_direct(1.0).unwrap();
        for (a, b) in sec.atoms().iter().zip(dir.atoms()) {
            assert!((a.position - b.position).abs() < 1e-12);
            assert!((a.weight - b.weight).abs() < 1e-12);
        }
    }

    #[test]
    fn aronszajn_krein_arithmetic() {
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(aronszajn_krein(i, 0.0).unwrap(), i);
        let v = aronszajn_krein(i, 1.0).unwrap();
        assert!((v - Complex64::new(0.5, 0.5)).norm() < 1e-16);
        assert!(aronszajn_krein(Complex64::new(-1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn non_cyclic_eigenvalue_is_ignored() {
        let f = family(&[0.0, 1.0], vec![1.0, 0.0]);
        assert!(!f.is_cyclic());
        assert!(f.mutual_singularity_check(0.0, 1.0, 1e-9).unwrap());
        assert!(matches!(
            f.mutual_singularity_check(1.0, 1.0, 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn crossing_coupling_places_eigenvalue() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = family(&[-1.0, 1.0], vec![s, s]);
        let b = 0.4;
        let lambda = f.crossing_coupling(b);
        let m = f.perturbed_measure_direct(lambda).unwrap();
        assert!(m.atoms().iter().any(|a| (a.position - b).abs() < 1e-12));
    }

    #[test]
    fn mass_in_zero_coupling_uses_base() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = family(&[-1.0, 1.0], vec![s, s]);
        assert!((f.perturbed_mass_in(0.0, -2.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }
}
