//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use specavg::operator::{CyclicVector, GeneratorKind, GeneratorSpec, RankOneFamily, SelfAdjointOperator};

pub fn family(kind: GeneratorKind, n: usize, seed: u64) -> RankOneFamily {
    let spec = GeneratorSpec {
        kind,
        n,
        seed,
        diagonal_distribution: Default::default(),
    };
    let (op, phi) = spec.build().expect("generator");
    RankOneFamily::new(op, phi).expect("family")
}

pub fn dense(n: usize, seed: u64) -> RankOneFamily {
    family(GeneratorKind::DenseGaussian, n, seed)
}

pub fn jacobi(n: usize, seed: u64) -> RankOneFamily {
    family(GeneratorKind::Jacobi, n, seed)
}

/// Row-major `A + λφφᵀ`.
pub fn perturbed_entries(op: &SelfAdjointOperator, phi: &CyclicVector, lambda: f64) -> Vec<f64> {
    let n = op.dim();
    let p = phi.as_slice();
    let mut m = op.entries().to_vec();
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] += lambda * p[i] * p[j];
        }
    }
    m
}

/// Householder reduction of a symmetric matrix to tridiagonal form,
/// returning `(diagonal, off-diagonal)`.
pub fn tridiagonalize(n: usize, entries: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| entries[i * n..(i + 1) * n].to_vec()).collect();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        let alpha = -x[0].signum() * x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H = I - 2vvᵀ/|v|² acting on rows and columns k+1..n
        let m = n - k - 1;
        let mut h = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                h[i][j] = if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j] / vnorm2;
            }
        }
        let mut b = a.clone();
        for i in 0..n {
            for j in 0..m {
                b[i][k + 1 + j] = (0..m).map(|l| a[i][k + 1 + l] * h[l][j]).sum();
            }
        }
        let mut c = b.clone();
        for i in 0..m {
            for j in 0..n {
                c[k + 1 + i][j] = (0..m).map(|l| h[i][l] * b[k + 1 + l][j]).sum();
            }
        }
        a = c;
    }
    let d = (0..n).map(|i| a[i][i]).collect();
    let e = (0..n.saturating_sub(1)).map(|i| a[i + 1][i]).collect();
    (d, e)
}

/// Number of eigenvalues below `x` of the tridiagonal matrix `(d, e)`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues by Sturm bisection, ascending.
pub fn sturm_eigenvalues(n: usize, entries: &[f64]) -> Vec<f64> {
    let (d, e) = tridiagonalize(n, entries);
    let bound = (0..n)
        .map(|i| d[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 })
        .fold(0.0_f64, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(&d, &e, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// `⟨φ, A^k φ⟩` for `k = 0..count`.
pub fn moments(n: usize, entries: &[f64], phi: &[f64], count: usize) -> Vec<f64> {
    let mut v = phi.to_vec();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(v.iter().zip(phi).map(|(a, b)| a * b).sum());
        v = (0..n).map(|i| (0..n).map(|j| entries[i * n + j] * v[j]).sum()).collect();
    }
    out
}

/// `⟨φ, (A - z)⁻¹ φ⟩` by complex Gaussian elimination.
pub fn resolvent(n: usize, entries: &[f64], phi: &[f64], z: Complex64) -> Complex64 {
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row: Vec<Complex64> = (0..n).map(|j| Complex64::new(entries[i * n + j], 0.0)).collect();
            row[i] -= z;
            row.push(Complex64::new(phi[i], 0.0));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
            .unwrap();
        m.swap(col, pivot);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            let (top, rest) = m.split_at_mut(r);
            for (dst, src) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: Complex64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x.iter().zip(phi).map(|(a, b)| a * b).sum()
}

/// Cantor approximation mass of `(a, b)` by enumerating the `2^depth`
/// surviving triadic intervals.
pub fn cantor_mass_brute(depth: u32, a: f64, b: f64) -> f64 {
    let cells = 3f64.powi(depth as i32);
    let weight = 0.5f64.powi(depth as i32);
    let mut total = 0.0;
    for code in 0..(1u64 << depth) {
        let mut left = 0u64;
        for bit in (0..depth).rev() {
            left = 3 * left + if (code >> bit) & 1 == 1 { 2 } else { 0 };
        }
        let (s, e) = (left as f64 / cells, (left + 1) as f64 / cells);
        let overlap = (b.min(e) - a.max(s)).max(0.0);
        total += weight * overlap * cells;
    }
    total
}

/// Borel transform of the uniform probability measure on `[a, b]`:
/// `log((b - z)/(a - z))/(b - a)`.
pub fn uniform_borel(a: f64, b: f64, z: Complex64) -> Complex64 {
    ((Complex64::new(b, 0.0) - z) / (Complex64::new(a, 0.0) - z)).ln() / (b - a)
}

/// Poisson transform of the Cauchy weight `dλ/(1+λ²)` at `x + iy`:
/// `π(1+y)/(x² + (1+y)²)`.
pub fn cauchy_poisson(x: f64, y: f64) -> f64 {
    std::f64::consts::PI * (1.0 + y) / (x * x + (1.0 + y) * (1.0 + y))
}
