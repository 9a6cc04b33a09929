//! Seeded random operators and vectors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::{CyclicVector, SelfAdjointOperator};
use crate::error::{argument, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Tridiagonal matrix with unit off-diagonal; `φ = e_0`.
    Jacobi,
    /// `(G + Gᵀ)/2` with standard normal `G`; `φ` a random unit vector.
    DenseGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalDistribution {
    /// `U[0, 1]`.
    #[default]
    Uniform,
    /// `N(0, 1)`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub diagonal_distribution: DiagonalDistribution,
}

impl GeneratorSpec {
    /// Operator and vector, both drawn from one ChaCha8 stream.
    pub fn build(&self) -> Result<(SelfAdjointOperator, CyclicVector)> {
        if self.n == 0 {
            return argument("generator dimension must be at least 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match self.kind {
            GeneratorKind::Jacobi => Ok((
                jacobi_with(&mut rng, self.n, self.diagonal_distribution)?,
                CyclicVector::basis(self.n, 0)?,
            )),
            GeneratorKind::DenseGaussian => {
                let op = dense_gaussian_with(&mut rng, self.n)?;
                let phi = random_unit_with(&mut rng, self.n)?;
                Ok((op, phi))
            }
        }
    }
}

pub fn dense_gaussian(n: usize, seed: u64) -> Result<SelfAdjointOperator> {
    dense_gaussian_with(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

pub fn jacobi(n: usize, seed: u64, diagonal: DiagonalDistribution) -> Result<SelfAdjointOperator> {
    jacobi_with(&mut ChaCha8Rng::seed_from_u64(seed), n, diagonal)
}

/// Normalized standard Gaussian vector.
pub fn random_unit_vector(n: usize, seed: u64) -> Result<CyclicVector> {
    random_unit_with(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

fn dense_gaussian_with(rng: &mut ChaCha8Rng, n: usize) -> Result<SelfAdjointOperator> {
    let g: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(rng)).collect();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = 0.5 * (g[i * n + j] + g[j * n + i]);
        }
    }
    SelfAdjointOperator::new(n, entries)
}

fn jacobi_with(rng: &mut ChaCha8Rng, n: usize, diagonal: DiagonalDistribution) -> Result<SelfAdjointOperator> {
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = match diagonal {
            DiagonalDistribution::Uniform => unit.sample(rng),
            DiagonalDistribution::Gaussian => StandardNormal.sample(rng),
        };
        if i + 1 < n {
            entries[i * n + i + 1] = 1.0;
            entries[(i + 1) * n + i] = 1.0;
        }
    }
    SelfAdjointOperator::new(n, entries)
}

fn random_unit_with(rng: &mut ChaCha8Rng, n: usize) -> Result<CyclicVector> {
    let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    CyclicVector::normalized(v)
}
