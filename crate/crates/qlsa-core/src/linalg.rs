//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Eigendecomposition `H = V diag(λ) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Decomposes the Hermitian part `(H + H†)/2` of `h`.
    pub fn new(h: &CMatrix) -> Self {
        let eig = SymmetricEigen::new(hermitian_part(h));
        Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Largest eigenvalue magnitude, i.e. the operator norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `V diag(f(λ)) V†`.
    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let fv: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        self.apply_values(&fv)
    }

    /// `V diag(fv) V†` for precomputed eigenvalue images.
    pub fn apply_values(&self, fv: &[C64]) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= fv[j];
        }
        scaled * self.vectors.adjoint()
    }

    /// `V diag(fv) V† ψ` without forming the matrix.
    pub fn apply_values_to(&self, fv: &[C64], psi: &CVector) -> CVector {
        let mut coeffs = self.vectors.ad_mul(psi);
        for (c, f) in coeffs.iter_mut().zip(fv) {
            *c *= *f;
        }
        &self.vectors * coeffs
    }
}

pub fn hermitian_part(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()) * C64::new(0.5, 0.0)
}

/// Frobenius-relative deviation from Hermiticity, `‖H − H†‖_max`.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    (h - h.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |a, &s| a.max(s))
}

/// Sum of singular values (Schatten 1-norm).
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// Smallest and largest singular values.
pub fn singular_range(m: &CMatrix) -> (f64, f64) {
    let sv = m.clone().singular_values();
    let lo = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    let hi = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    (lo, hi)
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * scale, im * scale)
    })
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = random_ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random Hermitian matrix with eigenvalues drawn uniformly from `[-radius, radius]`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> CMatrix {
    let u = random_unitary(n, rng);
    let dist = Uniform::new_inclusive(-radius, radius).expect("valid radius");
    let vals: Vec<f64> = (0..n).map(|_| dist.sample(rng)).collect();
    with_spectrum(&u, &vals)
}

/// `U diag(vals) U†`.
pub fn with_spectrum(u: &CMatrix, vals: &[f64]) -> CMatrix {
    let mut scaled = u.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::new(vals[j], 0.0);
    }
    scaled * u.adjoint()
}

/// Random density operator of the given rank.
pub fn random_density<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(n, rank.max(1), rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho / C64::new(tr, 0.0)
}

/// Uniformly random unit vector.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let g = random_ginibre(n, 1, rng);
    let v = CVector::from_column_slice(g.as_slice());
    let nrm = v.norm();
    v / C64::new(nrm, 0.0)
}

/// Random matrix rescaled to spectral norm `norm`.
pub fn random_with_norm<R: Rng + ?Sized>(rows: usize, cols: usize, norm: f64, rng: &mut R) -> CMatrix {
    let g = random_ginibre(rows, cols, rng);
    let s = spectral_norm(&g);
    g * C64::new(norm / s, 0.0)
}

/// Random square matrix `U diag(σ) V†` with singular values in `[sigma_min, 1]`,
/// always including both endpoints when `n ≥ 2`.
pub fn random_with_singular_values<R: Rng + ?Sized>(n: usize, sigma_min: f64, rng: &mut R) -> CMatrix {
    let u = random_unitary(n, rng);
    let v = random_unitary(n, rng);
    let dist = Uniform::new_inclusive(sigma_min, 1.0).expect("valid range");
    let mut sig: Vec<f64> = (0..n).map(|_| dist.sample(rng)).collect();
    if n >= 2 {
        sig[0] = 1.0;
        sig[n - 1] = sigma_min;
    }
    let mut us = u;
    for (j, mut col) in us.column_iter_mut().enumerate() {
        col *= C64::new(sig[j], 0.0);
    }
    us * v.adjoint()
}
