//! RIS phase-shift optimization.
//!
//! Maximizing the trace of the RIS-reflected covariance over unit-modulus
//! phases reduces to the Hermitian quadratic program
//! `max phi^H D phi` s.t. `|phi_i| = 1`, with `D = R^* ⊙ (H^H H)`. The
//! objective depends on neither the UE path gain nor its direct link, so one
//! solve serves every UE of the surface. It is solved by conjugate-gradient
//! ascent on the complex circle manifold with an Armijo line search.

use nalgebra::{Complex, ComplexField};
use rand::Rng;

use crate::channel::{check_unit_modulus, PhaseProvenance, RisConfiguration};
use crate::error::{invalid, Result};
use crate::linalg::{complexify, hermitian_part, norm_sqr, Split};
use crate::scalar::{cis, lit, CMat, CVec, RMat, Real};

/// `D = R^* ⊙ (H^H H)`.
#[derive(Clone, Debug)]
pub struct QuadraticForm<T: Real> {
    pub d: CMat<T>,
    // real and imaginary parts of `d`, for real-arithmetic products
    parts: Split<T>,
}

impl<T: Real> QuadraticForm<T> {
    pub fn from_matrix(d: CMat<T>) -> Result<Self> {
        if !d.is_square() {
            return Err(invalid("quadratic form must be square"));
        }
        let d = hermitian_part(&d);
        let parts = Split::of(&d);
        Ok(Self { d, parts })
    }

    /// `D phi`.
    pub fn apply(&self, phi: &CVec<T>) -> CVec<T> {
        let n = self.dim();
        let v = RMat::<T>::from_fn(n, 2, |i, j| if j == 0 { phi[i].re } else { phi[i].im });
        let p = &self.parts.re * &v;
        let q = &self.parts.im * &v;
        CVec::from_fn(n, |i, _| Complex::new(p[(i, 0)] - q[(i, 1)], p[(i, 1)] + q[(i, 0)]))
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// Power-iteration estimate of the largest eigenvalue (never above it).
    pub fn lambda_max_estimate(&self) -> T {
        let n = self.dim();
        if n == 0 {
            return T::zero();
        }
        let mut x = CVec::from_fn(n, |i, _| {
            Complex::new(T::one() + lit::<T>(i as f64 / n as f64), lit::<T>(0.1 * (i % 7) as f64))
        });
        let mut lam = T::zero();
        for _ in 0..60 {
            let nx = x.norm();
            if !(nx > T::zero()) {
                return T::zero();
            }
            x /= Complex::new(nx, T::zero());
            let y = self.apply(&x);
            lam = x.dotc(&y).re;
            x = y;
        }
        lam.max(T::zero())
    }
}

/// Builds `D = R^* ⊙ (H^H H)` for a real symmetric kernel (so `R^* = R`).
pub fn build_quadratic<T: Real>(h_r: &CMat<T>, kernel: &RMat<T>) -> Result<QuadraticForm<T>> {
    let n = h_r.ncols();
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(invalid(format!(
            "kernel is {}x{} but H_r has {n} columns",
            kernel.nrows(),
            kernel.ncols()
        )));
    }
    let hs = Split::of(h_r);
    let gram = hs.adjoint().mul(&hs).join();
    let d = gram.zip_map(kernel, |g, r| g * r);
    QuadraticForm::from_matrix(d)
}

/// Complex Hermitian kernel variant, `D = K^* ⊙ (H^H H)`.
pub fn build_quadratic_hermitian<T: Real>(h_r: &CMat<T>, kernel: &CMat<T>) -> Result<QuadraticForm<T>> {
    let n = h_r.ncols();
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(invalid("kernel dimension mismatch"));
    }
    let hs = Split::of(h_r);
    let gram = hs.adjoint().mul(&hs).join();
    let d = gram.zip_map(kernel, |g, r| g * r.conj());
    QuadraticForm::from_matrix(d)
}

/// Kernel `sum_k beta_k R` used when the UEs of one surface are weighted by
/// their RIS-UE path gains.
pub fn weighted_kernel<T: Real>(kernel: &RMat<T>, betas: &[T]) -> RMat<T> {
    let total = betas.iter().fold(T::zero(), |a, &b| a + b);
    kernel * total
}

fn objective_unchecked<T: Real>(phi: &CVec<T>, form: &QuadraticForm<T>) -> (T, CVec<T>) {
    let dphi = form.apply(phi);
    (phi.dotc(&dphi).re, dphi)
}

/// `phi^H D phi` for a unit-modulus `phi`.
pub fn objective<T: Real>(phi: &CVec<T>, form: &QuadraticForm<T>) -> Result<T> {
    check_dim(phi, form)?;
    check_unit_modulus(phi)?;
    Ok(objective_unchecked(phi, form).0)
}

/// `2 D phi`.
pub fn euclidean_gradient<T: Real>(phi: &CVec<T>, form: &QuadraticForm<T>) -> Result<CVec<T>> {
    check_dim(phi, form)?;
    Ok(form.apply(phi) * Complex::new(lit::<T>(2.0), T::zero()))
}

fn check_dim<T: Real>(phi: &CVec<T>, form: &QuadraticForm<T>) -> Result<()> {
    if phi.len() != form.dim() {
        return Err(invalid(format!(
            "phase vector has length {} but form is {}x{}",
            phi.len(),
            form.dim(),
            form.dim()
        )));
    }
    Ok(())
}

/// Tangent-space projection at `x`: `g - Re(g ⊙ x^*) ⊙ x`.
pub fn project_tangent<T: Real>(x: &CVec<T>, g: &CVec<T>) -> CVec<T> {
    CVec::from_fn(x.len(), |i, _| {
        let radial = (g[i] * x[i].conj()).re;
        g[i] - x[i] * radial
    })
}

/// Elementwise normalization back onto the manifold.
pub fn retract<T: Real>(y: &CVec<T>) -> CVec<T> {
    y.map(|z| {
        let m = z.modulus();
        if m > T::zero() {
            z / m
        } else {
            Complex::new(T::one(), T::zero())
        }
    })
}

fn inner<T: Real>(a: &CVec<T>, b: &CVec<T>) -> T {
    a.dotc(b).re
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AscentOptions {
    pub max_iter: usize,
    /// Relative gradient tolerance; the stopping threshold on the
    /// Riemannian gradient norm is `grad_tol * N * lambda_max`.
    pub grad_tol: f64,
    pub armijo: f64,
    pub contraction: f64,
    pub max_backtracks: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-8,
            armijo: 1e-4,
            contraction: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AscentReport<T: Real> {
    pub iterations: usize,
    /// Objective at the initial point and after every accepted step.
    pub objective_trace: Vec<T>,
    pub phases: CVec<T>,
    pub converged: bool,
    pub gradient_norm_final: T,
}

impl<T: Real> AscentReport<T> {
    pub fn objective(&self) -> T {
        *self.objective_trace.last().expect("trace holds the initial value")
    }

    pub fn into_config(self) -> RisConfiguration<T> {
        RisConfiguration {
            phases: self.phases,
            provenance: PhaseProvenance::Optimized,
        }
    }
}

/// Polak-Ribière conjugate-gradient ascent on the complex circle manifold.
///
/// Directions are transported by projection; the direction falls back to the
/// Riemannian gradient whenever it stops being an ascent direction or the
/// line search fails along it. Each accepted step satisfies the Armijo
/// condition, so the objective trace is non-decreasing.
pub fn riemannian_ascent<T: Real>(
    form: &QuadraticForm<T>,
    init: &CVec<T>,
    opts: &AscentOptions,
) -> Result<AscentReport<T>> {
    check_dim(init, form)?;
    check_unit_modulus(init)?;
    let n = form.dim();
    let lambda = form.lambda_max_estimate();
    let two = Complex::new(lit::<T>(2.0), T::zero());
    let tol = lit::<T>(opts.grad_tol) * lit::<T>(n as f64) * lambda;
    let armijo = lit::<T>(opts.armijo);
    let contraction = lit::<T>(opts.contraction);

    let mut x = retract(init);
    let (mut f, dx) = objective_unchecked(&x, form);
    let mut rg = project_tangent(&x, &(dx * two));
    let mut gn2 = norm_sqr(&rg);
    let mut dir = rg.clone();
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut converged = false;

    if !(lambda > T::zero()) {
        return Ok(AscentReport {
            iterations: 0,
            objective_trace: trace,
            phases: x,
            converged: true,
            gradient_norm_final: gn2.sqrt(),
        });
    }
    let step0 = T::one() / lambda;

    while iterations < opts.max_iter {
        if gn2.sqrt() <= tol {
            converged = true;
            break;
        }
        let mut accepted = None;
        for attempt in 0..2 {
            if attempt == 1 {
                if dir == rg {
                    break;
                }
                dir = rg.clone();
            }
            let mut slope = inner(&rg, &dir);
            if !(slope > T::zero()) {
                dir = rg.clone();
                slope = gn2;
            }
            let mut t = step0;
            for _ in 0..opts.max_backtracks {
                let cand = retract(&(&x + &dir * Complex::new(t, T::zero())));
                let (fc, dc) = objective_unchecked(&cand, form);
                if fc >= f + armijo * t * slope {
                    accepted = Some((cand, fc, dc));
                    break;
                }
                t *= contraction;
            }
            if accepted.is_some() {
                break;
            }
        }
        let Some((xn, fnew, dxn)) = accepted else {
            break;
        };
        iterations += 1;
        let rg_new = project_tangent(&xn, &(dxn * two));
        let rg_old_t = project_tangent(&xn, &rg);
        let dir_t = project_tangent(&xn, &dir);
        let gn2_new = norm_sqr(&rg_new);
        let beta = (inner(&rg_new, &(&rg_new - &rg_old_t)) / gn2).max(T::zero());
        let mut d_new = &rg_new + dir_t * Complex::new(beta, T::zero());
        if !(inner(&d_new, &rg_new) > T::zero()) {
            d_new = rg_new.clone();
        }
        x = xn;
        f = fnew;
        rg = rg_new;
        gn2 = gn2_new;
        dir = d_new;
        trace.push(f);
    }
    if !converged && gn2.sqrt() <= tol {
        converged = true;
    }
    Ok(AscentReport {
        iterations,
        objective_trace: trace,
        phases: x,
        converged,
        gradient_norm_final: gn2.sqrt(),
    })
}

/// i.i.d. phases uniform on `[0, 2 pi)`.
pub fn random_phases<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec<T> {
    let two_pi = 2.0 * std::f64::consts::PI;
    CVec::from_fn(n, |_, _| cis(lit::<T>(rng.gen::<f64>() * two_pi)))
}

pub fn random_configuration<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> RisConfiguration<T> {
    RisConfiguration {
        phases: random_phases(n, rng),
        provenance: PhaseProvenance::Random,
    }
}

/// Ascent from the all-ones vector plus `restarts` random initial points,
/// keeping the best final objective (earliest wins ties).
pub fn optimize_phases<T: Real, R: Rng + ?Sized>(
    form: &QuadraticForm<T>,
    opts: &AscentOptions,
    restarts: usize,
    rng: &mut R,
) -> Result<AscentReport<T>> {
    let n = form.dim();
    let ones = CVec::from_element(n, Complex::new(T::one(), T::zero()));
    let mut best = riemannian_ascent(form, &ones, opts)?;
    for _ in 0..restarts {
        let init = random_phases(n, rng);
        let cand = riemannian_ascent(form, &init, opts)?;
        if cand.objective() > best.objective() {
            best = cand;
        }
    }
    Ok(best)
}

/// Dense trace `tr(H diag(phi) R diag(phi)^H H^H)` used as a reference.
pub fn reflected_trace_dense<T: Real>(h_r: &CMat<T>, phases: &CVec<T>, kernel: &RMat<T>) -> T {
    let g = h_r * CMat::from_diagonal(phases);
    let m = &g * complexify(kernel) * g.adjoint();
    crate::linalg::trace(&m)
}
