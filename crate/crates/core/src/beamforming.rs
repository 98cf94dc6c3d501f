//! Linear combining (MR, ZF, MMSE), unit-norm precoding, UL SINR with its
//! power decomposition, the DL hardening bound, and spectral efficiency.

use std::fmt;

use nalgebra::{Complex, ComplexField};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimation::PilotAssignment;
use crate::linalg::{hermitian_part, hermitian_solve, identity, norm_sqr, quad_form};
use crate::scalar::{lit, CMat, CVec, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Mr,
    Zf,
    Mmse,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Mr, Scheme::Zf, Scheme::Mmse];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Mr => "mr",
            Scheme::Zf => "zf",
            Scheme::Mmse => "mmse",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug)]
pub struct CombinerSet<T: Real> {
    pub vectors: Vec<CVec<T>>,
    pub scheme: Scheme,
}

/// `v_k = ĥ_k`.
pub fn mr_combiner<T: Real>(estimates: &[CVec<T>]) -> CombinerSet<T> {
    CombinerSet {
        vectors: estimates.to_vec(),
        scheme: Scheme::Mr,
    }
}

fn stack<T: Real>(estimates: &[CVec<T>]) -> Result<CMat<T>> {
    let m = estimates
        .first()
        .map(|h| h.len())
        .ok_or_else(|| invalid("no estimates"))?;
    if estimates.iter().any(|h| h.len() != m) {
        return Err(invalid("estimates have different lengths"));
    }
    Ok(CMat::from_columns(estimates))
}

/// Relative pivot size below which the ZF Gram matrix is declared singular.
const ZF_RCOND: f64 = 1e-12;

/// Columns of `Ĥ (Ĥ^H Ĥ)^{-1}`.
pub fn zf_combiner<T: Real>(estimates: &[CVec<T>]) -> Result<CombinerSet<T>> {
    let h = stack(estimates)?;
    let (m, k) = h.shape();
    if k > m {
        return Err(Error::SingularMatrix(format!(
            "ZF needs K <= M, got K = {k}, M = {m}"
        )));
    }
    let gram = hermitian_part(&(h.adjoint() * &h));
    let chol = nalgebra::Cholesky::new(gram.clone())
        .ok_or_else(|| Error::SingularMatrix("estimate Gram matrix is singular".into()))?;
    let l = chol.l();
    let dmax = (0..k).fold(T::zero(), |a, i| a.max(l[(i, i)].re));
    let dmin = (0..k).fold(T::max_value().unwrap_or(T::one()), |a, i| a.min(l[(i, i)].re));
    if !(dmax > T::zero()) || dmin * dmin <= dmax * dmax * lit(ZF_RCOND) {
        return Err(Error::SingularMatrix("estimate matrix is rank deficient".into()));
    }
    let v = &h * chol.inverse();
    Ok(CombinerSet {
        vectors: v.column_iter().map(|c| c.into_owned()).collect(),
        scheme: Scheme::Zf,
    })
}

/// `Z^{-1} = sum_k (ĥ_k ĥ_k^H + R_k - Φ_k) + I / rho`, built from the error
/// covariances `R_k - Φ_k`.
pub fn mmse_precision<T: Real>(estimates: &[CVec<T>], error_covs: &[CMat<T>], rho: T) -> Result<CMat<T>> {
    let h = stack(estimates)?;
    let m = h.nrows();
    let mut zinv = identity::<T>(m) * Complex::new(T::one() / rho, T::zero());
    zinv += &h * h.adjoint();
    for c in error_covs {
        if c.nrows() != m {
            return Err(invalid("error covariance dimension mismatch"));
        }
        zinv += c;
    }
    Ok(hermitian_part(&zinv))
}

/// `v_k = Z ĥ_k`.
pub fn mmse_combiner<T: Real>(estimates: &[CVec<T>], error_covs: &[CMat<T>], rho: T) -> Result<CombinerSet<T>> {
    let zinv = mmse_precision(estimates, error_covs, rho)?;
    let h = stack(estimates)?;
    let v = hermitian_solve(&zinv, &h)?;
    Ok(CombinerSet {
        vectors: v.column_iter().map(|c| c.into_owned()).collect(),
        scheme: Scheme::Mmse,
    })
}

pub fn combiners<T: Real>(
    scheme: Scheme,
    estimates: &[CVec<T>],
    error_covs: &[CMat<T>],
    rho: T,
) -> Result<CombinerSet<T>> {
    match scheme {
        Scheme::Mr => Ok(mr_combiner(estimates)),
        Scheme::Zf => zf_combiner(estimates),
        Scheme::Mmse => mmse_combiner(estimates, error_covs, rho),
    }
}

/// UL SINR terms normalized by the combiner-output noise `||v_k||^2 / rho`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerDecomposition {
    /// Desired signal.
    pub ds: f64,
    /// Interference from UEs reusing the same pilot.
    pub ipr: f64,
    /// Interference from UEs on other pilots.
    pub iop: f64,
    /// Estimation-error term.
    pub ee: f64,
    /// Always 1 after normalization.
    pub noise: f64,
}

impl PowerDecomposition {
    pub fn sinr(&self) -> f64 {
        self.ds / (self.ipr + self.iop + self.ee + self.noise)
    }
}

/// Per-UE UL SINR
/// `|v_k^H h_k|^2 / (sum_{k'!=k} |v_k^H h_k'|^2 + v_k^H (sum_k' C_k') v_k + ||v_k||^2/rho)`
/// with `C_k' = R_k' - Φ_k'`, evaluated for every `k` with the error sum
/// formed once.
pub fn ul_sinr_all<T: Real>(
    combiners: &CombinerSet<T>,
    channels: &[CVec<T>],
    error_covs: &[CMat<T>],
    assignment: &PilotAssignment,
    rho: T,
) -> Result<Vec<(f64, PowerDecomposition)>> {
    let k_total = channels.len();
    if combiners.vectors.len() != k_total || assignment.num_ues() != k_total {
        return Err(invalid("combiner, channel, and assignment counts differ"));
    }
    let m = channels.first().map_or(0, |h| h.len());
    let mut err_sum = CMat::<T>::zeros(m, m);
    for c in error_covs {
        err_sum += c;
    }
    (0..k_total)
        .map(|k| sinr_with_error_sum(k, combiners, channels, &err_sum, assignment, rho))
        .collect()
}

/// Single-UE form of [`ul_sinr_all`].
pub fn ul_sinr<T: Real>(
    k: usize,
    combiners: &CombinerSet<T>,
    channels: &[CVec<T>],
    error_covs: &[CMat<T>],
    assignment: &PilotAssignment,
    rho: T,
) -> Result<(f64, PowerDecomposition)> {
    let m = channels.first().map_or(0, |h| h.len());
    let mut err_sum = CMat::<T>::zeros(m, m);
    for c in error_covs {
        err_sum += c;
    }
    sinr_with_error_sum(k, combiners, channels, &err_sum, assignment, rho)
}

fn sinr_with_error_sum<T: Real>(
    k: usize,
    combiners: &CombinerSet<T>,
    channels: &[CVec<T>],
    err_sum: &CMat<T>,
    assignment: &PilotAssignment,
    rho: T,
) -> Result<(f64, PowerDecomposition)> {
    let v = combiners
        .vectors
        .get(k)
        .ok_or_else(|| invalid(format!("no combiner for UE {k}")))?;
    let vnorm = norm_sqr(v);
    if !(vnorm > T::zero()) {
        return Err(Error::UndefinedSinr(format!("combiner of UE {k} is zero")));
    }
    let noise = vnorm / rho;
    let gain = |h: &CVec<T>| v.dotc(h).modulus_squared();
    let ds = gain(&channels[k]);
    let (mut ipr, mut iop) = (T::zero(), T::zero());
    for (j, h) in channels.iter().enumerate() {
        if j == k {
            continue;
        }
        if assignment.shares_pilot(k, j) {
            ipr += gain(h);
        } else {
            iop += gain(h);
        }
    }
    let ee = quad_form(err_sum, v).max(T::zero());
    let f = |x: T| crate::scalar::to_f64(x / noise);
    let d = PowerDecomposition {
        ds: f(ds),
        ipr: f(ipr),
        iop: f(iop),
        ee: f(ee),
        noise: 1.0,
    };
    let sinr = crate::scalar::to_f64(ds / (ipr + iop + ee + noise));
    Ok((sinr, d))
}

/// `w_k = v_k / ||v_k||`.
pub fn precoders<T: Real>(combiners: &CombinerSet<T>) -> Result<Vec<CVec<T>>> {
    combiners
        .vectors
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let n = v.norm();
            if !(n > T::zero()) {
                return Err(Error::UndefinedPrecoder(format!("combiner of UE {k} is zero")));
            }
            Ok(v * Complex::new(T::one() / n, T::zero()))
        })
        .collect()
}

/// Ensemble of effective DL gains `g[k][k'] = h_k^H w_k'` across trials,
/// accumulated in trial order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DlEnsemble {
    num_ues: usize,
    samples: usize,
    /// Running sum of `h_k^H w_k`.
    mean_gain: Vec<Complex<f64>>,
    /// Running sum of `|h_k^H w_k'|^2`, row-major `k * K + k'`.
    power: Vec<f64>,
}

impl DlEnsemble {
    pub fn new(num_ues: usize) -> Self {
        Self {
            num_ues,
            samples: 0,
            mean_gain: vec![Complex::new(0.0, 0.0); num_ues],
            power: vec![0.0; num_ues * num_ues],
        }
    }

    pub fn len(&self) -> usize {
        self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }

    pub fn num_ues(&self) -> usize {
        self.num_ues
    }

    /// Adds one realization given the true channels and unit-norm precoders.
    pub fn push<T: Real>(&mut self, channels: &[CVec<T>], precoders: &[CVec<T>]) -> Result<()> {
        let gains: Vec<Vec<Complex<f64>>> = channels
            .iter()
            .map(|h| {
                precoders
                    .iter()
                    .map(|w| {
                        let g = h.dotc(w);
                        Complex::new(crate::scalar::to_f64(g.re), crate::scalar::to_f64(g.im))
                    })
                    .collect()
            })
            .collect();
        self.push_gains(&gains)
    }

    /// Adds one realization of the gain matrix `g[k][k'] = h_k^H w_k'`.
    pub fn push_gains(&mut self, gains: &[Vec<Complex<f64>>]) -> Result<()> {
        if gains.len() != self.num_ues || gains.iter().any(|r| r.len() != self.num_ues) {
            return Err(invalid("gain matrix must be K x K"));
        }
        for (k, row) in gains.iter().enumerate() {
            self.mean_gain[k] += row[k];
            for (j, g) in row.iter().enumerate() {
                self.power[k * self.num_ues + j] += g.norm_sqr();
            }
        }
        self.samples += 1;
        Ok(())
    }

    /// Merges another ensemble (appended after this one).
    pub fn merge(&mut self, other: &DlEnsemble) -> Result<()> {
        if other.num_ues != self.num_ues {
            return Err(invalid("ensembles have different UE counts"));
        }
        for (a, b) in self.mean_gain.iter_mut().zip(&other.mean_gain) {
            *a += b;
        }
        for (a, b) in self.power.iter_mut().zip(&other.power) {
            *a += b;
        }
        self.samples += other.samples;
        Ok(())
    }
}

/// Hardening-bound DL SINR
/// `rho |E[h_k^H w_k]|^2 / (rho sum_k' E|h_k^H w_k'|^2 - rho |E[h_k^H w_k]|^2 + 1)`.
pub fn dl_sinr(k: usize, ensemble: &DlEnsemble, rho: f64) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(invalid("empty DL ensemble"));
    }
    if k >= ensemble.num_ues {
        return Err(invalid(format!("no UE {k} in ensemble")));
    }
    let s = ensemble.samples as f64;
    let signal = (ensemble.mean_gain[k] / s).norm_sqr();
    let total: f64 = (0..ensemble.num_ues)
        .map(|j| ensemble.power[k * ensemble.num_ues + j] / s)
        .sum();
    Ok(rho * signal / (rho * total - rho * signal + 1.0))
}

/// `prelog * log2(1 + sinr)`.
pub fn spectral_efficiency(sinr: f64, prelog: f64) -> f64 {
    prelog * (1.0 + sinr).log2()
}
