//! UE-to-RIS association, overall channel composition, and the effective
//! covariance of the composite channel for a fixed BS-RIS channel and RIS
//! configuration.

use nalgebra::Complex;

use crate::error::{invalid, Result};
use crate::geometry::cascade_factor;
use crate::linalg::{complexify, max_modulus_deviation, outer_gram};
use crate::scalar::{lit, CMat, CVec, RMat, Real};

/// Tolerance on `| |phi_i| - 1 |` for phase vectors.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;

/// Disjoint sets `K_0` (no RIS) and `K_1..K_R` (served by RIS `r`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Association {
    ris_of: Vec<Option<usize>>,
    num_ris: usize,
}

impl Association {
    /// `ris_of[k]` is the 0-based RIS serving UE `k`, or `None` for `K_0`.
    pub fn new(ris_of: Vec<Option<usize>>, num_ris: usize) -> Result<Self> {
        if let Some(r) = ris_of.iter().flatten().find(|&&r| r >= num_ris) {
            return Err(invalid(format!("UE associated to RIS {r} but only {num_ris} exist")));
        }
        Ok(Self { ris_of, num_ris })
    }

    pub fn num_ues(&self) -> usize {
        self.ris_of.len()
    }

    pub fn num_ris(&self) -> usize {
        self.num_ris
    }

    pub fn ris_of(&self, k: usize) -> Option<usize> {
        self.ris_of.get(k).copied().flatten()
    }

    pub fn is_direct(&self, k: usize) -> bool {
        k < self.ris_of.len() && self.ris_of[k].is_none()
    }

    /// Group index: 0 for `K_0`, `r + 1` for RIS `r`.
    pub fn group_of(&self, k: usize) -> usize {
        self.ris_of[k].map_or(0, |r| r + 1)
    }

    /// Members of `K_0` followed by `K_1..K_R`, each sorted by UE index.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_ris + 1];
        for k in 0..self.ris_of.len() {
            out[self.group_of(k)].push(k);
        }
        out
    }

    pub fn served_by(&self, r: usize) -> Vec<usize> {
        (0..self.ris_of.len())
            .filter(|&k| self.ris_of[k] == Some(r))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseProvenance {
    Random,
    Optimized,
    Constant,
}

/// Unit-modulus reflection vector of one RIS.
#[derive(Clone, Debug, PartialEq)]
pub struct RisConfiguration<T: Real> {
    pub phases: CVec<T>,
    pub provenance: PhaseProvenance,
}

impl<T: Real> RisConfiguration<T> {
    pub fn new(phases: CVec<T>, provenance: PhaseProvenance) -> Result<Self> {
        check_unit_modulus(&phases)?;
        Ok(Self { phases, provenance })
    }

    pub fn constant(n: usize, phase: T) -> Self {
        Self {
            phases: CVec::from_element(n, crate::scalar::cis(phase)),
            provenance: PhaseProvenance::Constant,
        }
    }
}

pub(crate) fn check_unit_modulus<T: Real>(phases: &CVec<T>) -> Result<()> {
    let dev = max_modulus_deviation(phases);
    if !(dev <= lit(UNIT_MODULUS_TOL)) {
        return Err(invalid(format!(
            "phase vector is not unit modulus (max deviation {dev})"
        )));
    }
    Ok(())
}

/// One Monte Carlo draw of every link plus the composed overall channels.
#[derive(Clone, Debug)]
pub struct ChannelRealization<T: Real> {
    /// `H_r`, `M x N`, per RIS.
    pub bs_ris: Vec<CMat<T>>,
    /// `h_{r,k}`, length `N`, for RIS-aided UEs.
    pub ris_ue: Vec<Option<CVec<T>>>,
    /// `h^d_k`, length `M`.
    pub direct: Vec<CVec<T>>,
    /// `h_k`, length `M`.
    pub overall: Vec<CVec<T>>,
}

impl<T: Real> ChannelRealization<T> {
    /// Builds a realization and composes every overall channel.
    pub fn compose(
        bs_ris: Vec<CMat<T>>,
        ris_ue: Vec<Option<CVec<T>>>,
        direct: Vec<CVec<T>>,
        configs: &[RisConfiguration<T>],
        assoc: &Association,
    ) -> Result<Self> {
        let mut out = Self {
            bs_ris,
            ris_ue,
            direct,
            overall: Vec::new(),
        };
        out.overall = (0..assoc.num_ues())
            .map(|k| compose_overall_channel(k, &out, configs, assoc))
            .collect::<Result<_>>()?;
        Ok(out)
    }
}

/// `h^d_k` for `k` in `K_0`, otherwise `H_r diag(phi_r) h_{r,k} + h^d_k`.
pub fn compose_overall_channel<T: Real>(
    k: usize,
    realization: &ChannelRealization<T>,
    configs: &[RisConfiguration<T>],
    assoc: &Association,
) -> Result<CVec<T>> {
    if k >= assoc.num_ues() || k >= realization.direct.len() {
        return Err(invalid(format!("UE {k} is not in any association set")));
    }
    let direct = &realization.direct[k];
    let Some(r) = assoc.ris_of(k) else {
        return Ok(direct.clone());
    };
    let h_r = realization
        .bs_ris
        .get(r)
        .ok_or_else(|| invalid(format!("missing BS-RIS channel for RIS {r}")))?;
    let cfg = configs
        .get(r)
        .ok_or_else(|| invalid(format!("missing configuration for RIS {r}")))?;
    let h_rk = realization
        .ris_ue
        .get(k)
        .and_then(Option::as_ref)
        .ok_or_else(|| invalid(format!("missing RIS-UE channel for UE {k}")))?;
    if h_rk.len() != cfg.phases.len() || h_r.ncols() != h_rk.len() || h_r.nrows() != direct.len()
    {
        return Err(invalid("channel dimensions disagree"));
    }
    let reflected = h_rk.component_mul(&cfg.phases);
    Ok(h_r * reflected + direct)
}

/// Second-order statistics shared by estimation and optimization.
#[derive(Clone, Debug)]
pub struct CorrelationSet<T: Real> {
    /// `R^bu_k` per UE.
    pub bs_ue: Vec<CMat<T>>,
    /// `beta^ru_{r,k}` for RIS-aided UEs.
    pub beta_ru: Vec<Option<T>>,
    /// Generic RIS kernel `R` (real symmetric).
    pub kernel: RMat<T>,
    /// `F` with `F F^T = R`.
    pub kernel_factor: RMat<T>,
}

impl<T: Real> CorrelationSet<T> {
    pub fn new(bs_ue: Vec<CMat<T>>, beta_ru: Vec<Option<T>>, kernel: RMat<T>) -> Result<Self> {
        let kernel_factor = crate::geometry::kernel_factor(&kernel)?;
        Ok(Self {
            bs_ue,
            beta_ru,
            kernel,
            kernel_factor,
        })
    }

    pub fn with_factor(
        bs_ue: Vec<CMat<T>>,
        beta_ru: Vec<Option<T>>,
        kernel: RMat<T>,
        kernel_factor: RMat<T>,
    ) -> Self {
        Self {
            bs_ue,
            beta_ru,
            kernel,
            kernel_factor,
        }
    }
}

/// `H_r diag(phi) R diag(phi)^H H_r^H`, shared by every UE of RIS `r`.
pub fn ris_covariance<T: Real>(h_r: &CMat<T>, phases: &CVec<T>, kernel_factor: &RMat<T>) -> CMat<T> {
    outer_gram(&cascade_factor(h_r, phases, kernel_factor))
}

/// `R_k = beta^ru_{r,k} H_r diag(phi) R diag(phi)^H H_r^H + R^bu_k` for
/// RIS-aided `k`, `R^bu_k` otherwise.
pub fn effective_correlation<T: Real>(
    k: usize,
    assoc: &Association,
    correlations: &CorrelationSet<T>,
    h_r: &CMat<T>,
    phases: &CVec<T>,
) -> Result<CMat<T>> {
    let r_bu = correlations
        .bs_ue
        .get(k)
        .ok_or_else(|| invalid(format!("no correlation for UE {k}")))?;
    if assoc.ris_of(k).is_none() {
        return Ok(r_bu.clone());
    }
    check_unit_modulus(phases)?;
    let beta = correlations.beta_ru[k]
        .ok_or_else(|| invalid(format!("UE {k} has no RIS-UE path gain")))?;
    if h_r.ncols() != phases.len() || correlations.kernel_factor.nrows() != phases.len() {
        return Err(invalid("RIS dimension mismatch"));
    }
    let ris = ris_covariance(h_r, phases, &correlations.kernel_factor);
    Ok(combine_effective(&ris, beta, r_bu))
}

/// `beta * ris + r_bu`.
pub fn combine_effective<T: Real>(ris: &CMat<T>, beta: T, r_bu: &CMat<T>) -> CMat<T> {
    ris * Complex::new(beta, T::zero()) + r_bu
}

/// Dense reference evaluation of the RIS term, used by tests.
pub fn ris_covariance_dense<T: Real>(h_r: &CMat<T>, phases: &CVec<T>, kernel: &RMat<T>) -> CMat<T> {
    let g = h_r * CMat::from_diagonal(phases);
    &g * complexify(kernel) * g.adjoint()
}
