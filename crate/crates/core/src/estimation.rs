//! Pilot bookkeeping under intra-cell reuse and MMSE estimation of the
//! overall channels from the despread pilot observations.
//!
//! Pilot sequences are never materialized: the simulator works with the
//! despread statistic `y_t = sum_{i in S_t} sqrt(rho) h_i + n_t`,
//! `n_t ~ CN(0, I / tau_p)`, which is distribution-equivalent.

use nalgebra::Complex;
use rand::Rng;

use crate::channel::Association;
use crate::error::{invalid, Error, Result};
use crate::geometry::complex_gaussian_vec;
use crate::linalg::{hermitian_part, identity, inverse_cholesky, outer_gram, Split};
use crate::scalar::{lit, CMat, CVec, Real};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PilotAssignment {
    /// `tau_p`.
    pub pilot_count: usize,
    /// `c(k)`, 0-based.
    pub pilot_of: Vec<usize>,
    /// `S_t` per pilot, sorted by UE index.
    pub share_sets: Vec<Vec<usize>>,
    /// Largest `|S_t|`.
    pub reuse_factor: usize,
}

impl PilotAssignment {
    pub fn num_ues(&self) -> usize {
        self.pilot_of.len()
    }

    /// Whether `S_{c(k)} ∩ K_{r(k)} = {k}` for every `k`.
    pub fn satisfies_schedule(&self, assoc: &Association) -> bool {
        (0..self.num_ues()).all(|k| {
            let g = assoc.group_of(k);
            self.share_sets[self.pilot_of[k]]
                .iter()
                .filter(|&&i| assoc.group_of(i) == g)
                .count()
                == 1
        })
    }

    pub fn shares_pilot(&self, k: usize, other: usize) -> bool {
        self.pilot_of[k] == self.pilot_of[other]
    }
}

/// Round-robin pilot assignment inside each association set, UEs in index
/// order, so that no two UEs of one set share a pilot.
pub fn assign_pilots(assoc: &Association, pilot_count: usize) -> Result<PilotAssignment> {
    if pilot_count == 0 {
        return Err(invalid("at least one pilot is required"));
    }
    let mut pilot_of = vec![0; assoc.num_ues()];
    let mut share_sets = vec![Vec::new(); pilot_count];
    for (g, members) in assoc.groups().iter().enumerate() {
        if members.len() > pilot_count {
            return Err(Error::InfeasibleSchedule(format!(
                "association set {g} has {} UEs but only {pilot_count} pilots",
                members.len()
            )));
        }
        for (slot, &k) in members.iter().enumerate() {
            pilot_of[k] = slot;
            share_sets[slot].push(k);
        }
    }
    for s in &mut share_sets {
        s.sort_unstable();
    }
    let reuse_factor = share_sets.iter().map(Vec::len).max().unwrap_or(0);
    Ok(PilotAssignment {
        pilot_count,
        pilot_of,
        share_sets,
        reuse_factor,
    })
}

/// `y_t = sum_{i in S_t} sqrt(rho) h_i` without noise.
pub fn despread_noiseless<T: Real>(
    channels: &[CVec<T>],
    assignment: &PilotAssignment,
    rho: T,
) -> Result<Vec<CVec<T>>> {
    if channels.len() != assignment.num_ues() {
        return Err(invalid("channel count differs from assignment"));
    }
    let m = channels.first().map_or(0, |h| h.len());
    let s = Complex::new(rho.sqrt(), T::zero());
    Ok(assignment
        .share_sets
        .iter()
        .map(|set| {
            set.iter()
                .fold(CVec::zeros(m), |acc, &i| acc + &channels[i] * s)
        })
        .collect())
}

/// Adds `n_t = w_t / sqrt(tau_p)` to the noiseless statistic, with `w_t`
/// given white `CN(0, I)` draws.
pub fn despread_with_noise<T: Real>(
    channels: &[CVec<T>],
    assignment: &PilotAssignment,
    rho: T,
    white: &[CVec<T>],
) -> Result<Vec<CVec<T>>> {
    if white.len() != assignment.pilot_count {
        return Err(invalid("one noise vector per pilot is required"));
    }
    let scale = Complex::new(
        T::one() / lit::<T>(assignment.pilot_count as f64).sqrt(),
        T::zero(),
    );
    let mut y = despread_noiseless(channels, assignment, rho)?;
    for (yt, w) in y.iter_mut().zip(white) {
        *yt += w * scale;
    }
    Ok(y)
}

/// Draws the despread pilot observation of every pilot.
pub fn simulate_pilot_phase<T: Real, R: Rng + ?Sized>(
    channels: &[CVec<T>],
    assignment: &PilotAssignment,
    rho: T,
    rng: &mut R,
) -> Result<Vec<CVec<T>>> {
    let m = channels.first().map_or(0, |h| h.len());
    let white: Vec<CVec<T>> = (0..assignment.pilot_count)
        .map(|_| complex_gaussian_vec(m, rng))
        .collect();
    despread_with_noise(channels, assignment, rho, &white)
}

#[derive(Clone, Debug)]
pub struct EstimationOutput<T: Real> {
    /// `ĥ_k`.
    pub estimates: Vec<CVec<T>>,
    /// `Φ_k = R_k Q^{-1} R_k`.
    pub estimate_cov: Vec<CMat<T>>,
    /// `R_k - Φ_k`.
    pub error_cov: Vec<CMat<T>>,
    /// `y_t`.
    pub despread: Vec<CVec<T>>,
}

/// `Q_t = sum_{i in S_t} R_i + I / (rho tau_p)`.
pub fn pilot_covariance<T: Real>(
    t: usize,
    correlations: &[CMat<T>],
    assignment: &PilotAssignment,
    rho: T,
) -> Result<CMat<T>> {
    let m = correlations
        .first()
        .map(|r| r.nrows())
        .ok_or_else(|| invalid("no correlation matrices"))?;
    let noise = T::one() / (rho * lit(assignment.pilot_count as f64));
    let mut q = identity::<T>(m) * Complex::new(noise, T::zero());
    for &i in &assignment.share_sets[t] {
        let r = &correlations[i];
        if r.nrows() != m || r.ncols() != m {
            return Err(invalid("correlation matrices must all be M x M"));
        }
        q += r;
    }
    Ok(q)
}

/// Per-pilot MMSE estimator. `Q_t` is handled through its inverse Cholesky
/// factor `L^{-1}`, so `R_k Q^{-1} y = (L^{-1} R_k)^H (L^{-1} y)` and
/// `Φ_k = (L^{-1} R_k)^H (L^{-1} R_k)` is PSD by construction.
struct PilotWhitener<T: Real> {
    inv_chol: Split<T>,
}

impl<T: Real> PilotWhitener<T> {
    fn new(q: &CMat<T>) -> Result<Self> {
        Ok(Self {
            inv_chol: Split::of(&inverse_cholesky(q)?),
        })
    }

    fn estimate(&self, r_k: &CMat<T>, y_t: &CVec<T>, rho: T) -> (CVec<T>, CMat<T>) {
        let x = self.inv_chol.mul(&Split::of(r_k));
        let xh = x.adjoint();
        let w = self.inv_chol.join() * y_t;
        let est = xh.join() * w * Complex::new(T::one() / rho.sqrt(), T::zero());
        // Φ = X^H X, formed as the Gram of X^H
        let phi = outer_gram(&xh);
        (est, phi)
    }
}

/// `ĥ_k = R_k Q_{c(k)}^{-1} y_{c(k)} / sqrt(rho)` and `Φ_k`.
pub fn mmse_estimate<T: Real>(
    y_t: &CVec<T>,
    k: usize,
    correlations: &[CMat<T>],
    assignment: &PilotAssignment,
    rho: T,
) -> Result<(CVec<T>, CMat<T>)> {
    if k >= assignment.num_ues() || correlations.len() != assignment.num_ues() {
        return Err(invalid("UE index or correlation count mismatch"));
    }
    let r_k = &correlations[k];
    if r_k.nrows() != y_t.len() || r_k.ncols() != y_t.len() {
        return Err(invalid(format!(
            "observation length {} does not match R_k {}x{}",
            y_t.len(),
            r_k.nrows(),
            r_k.ncols()
        )));
    }
    let q = pilot_covariance(assignment.pilot_of[k], correlations, assignment, rho)?;
    Ok(PilotWhitener::new(&q)?.estimate(r_k, y_t, rho))
}

/// Estimates every UE, factoring each `Q_t` once.
pub fn estimate_all<T: Real>(
    despread: Vec<CVec<T>>,
    correlations: &[CMat<T>],
    assignment: &PilotAssignment,
    rho: T,
) -> Result<EstimationOutput<T>> {
    let k_total = assignment.num_ues();
    if correlations.len() != k_total || despread.len() != assignment.pilot_count {
        return Err(invalid("estimation inputs have inconsistent sizes"));
    }
    let m = correlations.first().map_or(0, |r| r.nrows());
    if despread.iter().any(|y| y.len() != m) {
        return Err(invalid("observation length does not match R_k"));
    }
    let mut estimates = vec![CVec::zeros(m); k_total];
    let mut estimate_cov = vec![CMat::zeros(m, m); k_total];
    for t in 0..assignment.pilot_count {
        if assignment.share_sets[t].is_empty() {
            continue;
        }
        let q = pilot_covariance(t, correlations, assignment, rho)?;
        let whitener = PilotWhitener::new(&q)?;
        for &k in &assignment.share_sets[t] {
            let (est, phi) = whitener.estimate(&correlations[k], &despread[t], rho);
            estimates[k] = est;
            estimate_cov[k] = phi;
        }
    }
    let error_cov = correlations
        .iter()
        .zip(&estimate_cov)
        .map(|(r, phi)| hermitian_part(&(r - phi)))
        .collect();
    Ok(EstimationOutput {
        estimates,
        estimate_cov,
        error_cov,
        despread,
    })
}
