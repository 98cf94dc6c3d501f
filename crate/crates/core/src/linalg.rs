//! Dense complex linear algebra helpers.
//!
//! nalgebra only routes real `f32`/`f64` products through its blocked GEMM, so
//! complex products here are assembled from four real products on the split
//! real/imaginary parts. On the matrix sizes used by the simulator (up to
//! 256 x 256) this is one to two orders of magnitude faster than the generic
//! complex kernel.

use nalgebra::{Complex, ComplexField, DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, CMat, CVec, RMat, Real};

/// Real and imaginary parts of a complex matrix.
#[derive(Clone, Debug)]
pub struct Split<T: Real> {
    pub re: RMat<T>,
    pub im: RMat<T>,
}

impl<T: Real> Split<T> {
    pub fn of(a: &CMat<T>) -> Self {
        Self {
            re: a.map(|z| z.re),
            im: a.map(|z| z.im),
        }
    }

    pub fn join(&self) -> CMat<T> {
        self.re.zip_map(&self.im, Complex::new)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            re: self.re.transpose(),
            im: -self.im.transpose(),
        }
    }

    pub fn mul(&self, rhs: &Split<T>) -> Split<T> {
        let mut re = &self.re * &rhs.re;
        re -= &self.im * &rhs.im;
        let mut im = &self.re * &rhs.im;
        im += &self.im * &rhs.re;
        Split { re, im }
    }

    pub fn mul_real(&self, rhs: &RMat<T>) -> Split<T> {
        Split {
            re: &self.re * rhs,
            im: &self.im * rhs,
        }
    }
}

/// `a * b`.
pub fn cmatmul<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    Split::of(a).mul(&Split::of(b)).join()
}

/// `a^H * b`.
pub fn cmatmul_ah_b<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    Split::of(a).adjoint().mul(&Split::of(b)).join()
}

/// `a * a^H`, returned exactly Hermitian.
pub fn outer_gram<T: Real>(a: &Split<T>) -> CMat<T> {
    let at = a.re.transpose();
    let bt = a.im.transpose();
    let mut re = &a.re * &at;
    re += &a.im * &bt;
    let mut im = &a.im * &at;
    im -= &a.re * &bt;
    hermitian_part(&Split { re, im }.join())
}

/// `(a + a^H) / 2`.
pub fn hermitian_part<T: Real>(a: &CMat<T>) -> CMat<T> {
    let half = lit::<T>(0.5);
    let n = a.nrows();
    CMat::from_fn(n, n, |i, j| {
        let z = a[(i, j)] + a[(j, i)].conj();
        Complex::new(z.re * half, z.im * half)
    })
}

pub fn trace<T: Real>(a: &CMat<T>) -> T {
    (0..a.nrows().min(a.ncols())).fold(T::zero(), |acc, i| acc + a[(i, i)].re)
}

/// `Re tr(a b)` without forming the product.
pub fn trace_product<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    let mut acc = T::zero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let p = a[(i, j)] * b[(j, i)];
            acc += p.re;
        }
    }
    acc
}

/// `x^H a x`, real part.
pub fn quad_form<T: Real>(a: &CMat<T>, x: &CVec<T>) -> T {
    let ax = a * x;
    x.dotc(&ax).re
}

pub fn norm_sqr<T: Real>(x: &CVec<T>) -> T {
    x.iter().fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
}

pub fn eigenvalues_hermitian<T: Real>(a: &CMat<T>) -> Vec<T> {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut v: Vec<T> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn min_eigenvalue_hermitian<T: Real>(a: &CMat<T>) -> T {
    eigenvalues_hermitian(a)
        .first()
        .copied()
        .unwrap_or_else(T::zero)
}

pub fn max_eigenvalue_hermitian<T: Real>(a: &CMat<T>) -> T {
    eigenvalues_hermitian(a)
        .last()
        .copied()
        .unwrap_or_else(T::zero)
}

/// Relative eigenvalue below which a PSD matrix is treated as rank deficient.
pub const EIG_CLIP_REL: f64 = 1e-10;
/// Relative (to the largest eigenvalue) negativity tolerated before a
/// covariance is rejected as indefinite.
pub const EIG_NEG_TOL_REL: f64 = 1e-8;

fn clip_eigs<T: Real>(eigs: &[T]) -> Result<Vec<T>> {
    let scale = eigs.iter().fold(T::zero(), |m, &e| m.max(e.abs()));
    let floor = -scale * lit(EIG_NEG_TOL_REL);
    if let Some(&bad) = eigs.iter().find(|&&e| e < floor) {
        return Err(invalid(format!(
            "covariance is not positive semidefinite (eigenvalue {bad} below tolerance)"
        )));
    }
    let lmax = eigs.iter().fold(T::zero(), |m, &e| m.max(e));
    let clip = lmax * lit(EIG_CLIP_REL);
    Ok(eigs
        .iter()
        .map(|&e| if e <= clip { T::zero() } else { e.sqrt() })
        .collect())
}

/// Square-root factor `F` with `F F^H = cov` from a Hermitian
/// eigendecomposition; eigenvalues below `1e-10 * lambda_max` are clipped.
pub fn psd_sqrt_factor<T: Real>(cov: &CMat<T>) -> Result<CMat<T>> {
    if !cov.is_square() {
        return Err(invalid("covariance must be square"));
    }
    let eig = SymmetricEigen::new(hermitian_part(cov));
    let evals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    let roots = clip_eigs(&evals)?;
    let mut f = eig.eigenvectors;
    for (j, r) in roots.iter().enumerate() {
        for z in f.column_mut(j).iter_mut() {
            *z *= *r;
        }
    }
    Ok(f)
}

/// Real symmetric counterpart of [`psd_sqrt_factor`].
pub fn psd_sqrt_factor_real<T: Real>(cov: &RMat<T>) -> Result<RMat<T>> {
    if !cov.is_square() {
        return Err(invalid("covariance must be square"));
    }
    let sym = (cov + cov.transpose()) * lit::<T>(0.5);
    let eig = SymmetricEigen::new(sym);
    let evals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    let roots = clip_eigs(&evals)?;
    let mut f = eig.eigenvectors;
    for (j, r) in roots.iter().enumerate() {
        let mut col = f.column_mut(j);
        col *= *r;
    }
    Ok(f)
}

/// Inverse Cholesky factor `L^{-1}` of a Hermitian positive definite matrix,
/// so that `A^{-1} = L^{-H} L^{-1}`.
pub fn inverse_cholesky<T: Real>(a: &CMat<T>) -> Result<CMat<T>> {
    let n = a.nrows();
    let chol = nalgebra::Cholesky::new(hermitian_part(a))
        .ok_or_else(|| Error::SingularMatrix("matrix is not positive definite".into()))?;
    let l = chol.l();
    let mut inv = CMat::<T>::zeros(n, n);
    // forward substitution column by column on the identity
    for j in 0..n {
        inv[(j, j)] = Complex::new(T::one(), T::zero()) / l[(j, j)];
        for i in (j + 1)..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for p in j..i {
                acc += l[(i, p)] * inv[(p, j)];
            }
            inv[(i, j)] = -acc / l[(i, i)];
        }
    }
    Ok(inv)
}

/// Solves `A X = B` for Hermitian positive definite `A`.
pub fn hermitian_solve<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<CMat<T>> {
    let chol = nalgebra::Cholesky::new(hermitian_part(a))
        .ok_or_else(|| Error::SingularMatrix("matrix is not positive definite".into()))?;
    Ok(chol.solve(b))
}

pub fn max_modulus_deviation<T: Real>(v: &CVec<T>) -> T {
    v.iter()
        .fold(T::zero(), |m, z| m.max((z.modulus() - T::one()).abs()))
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    DMatrix::identity(n, n)
}

/// Embeds a real matrix into the complex field.
pub fn complexify<T: Real>(a: &RMat<T>) -> CMat<T> {
    a.map(|x| Complex::new(x, T::zero()))
}
