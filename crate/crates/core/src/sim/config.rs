use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, FadingParams};
use crate::phase_opt::AscentOptions;

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Which channel vectors enter the UL SINR numerator and interference sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UlChannel {
    /// MMSE estimates `ĥ_k`; the estimation error enters only through the
    /// `R_k - Φ_k` term.
    Estimated,
    /// True overall channels `h_k`.
    True,
}

/// Every scalar of one simulation setup. Distances are in meters, spacings
/// in wavelengths, powers in dB or dBm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// `M`.
    pub antennas: usize,
    /// `N_v`.
    pub ris_rows: usize,
    /// `N_h`.
    pub ris_cols: usize,
    /// `K`.
    pub ues: usize,
    /// `R`.
    pub ris_count: usize,
    /// `tau_p`.
    pub pilots: usize,
    /// Pilot reuse factor; derived as `ceil(K / tau_p)` when absent.
    pub reuse_factor: Option<usize>,
    /// `d_B / lambda`.
    pub bs_spacing: f64,
    /// `d_R / lambda`.
    pub ris_spacing: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// `d_c`.
    pub cell_radius: f64,
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    /// Replaces the transmit-power-over-noise-floor ratio when set.
    pub snr_override_db: Option<f64>,
    /// `beta_0` in dB.
    pub ref_loss_db: f64,
    /// `zeta`.
    pub correlation: f64,
    /// BS-RIS Rician factor in dB.
    pub rician_db: f64,
    pub kappa_br: f64,
    pub kappa_ru: f64,
    pub kappa_bu: f64,
    /// RIS azimuth AoD toward the BS, radians.
    pub ris_aod: f64,
    pub ris_aod_elevation: f64,
    /// `S`.
    pub trials: usize,
    pub seed: u64,
    /// SE prelog factor `1 - tau_p / tau_c`.
    pub prelog: f64,
    pub snap_to_grid: bool,
    /// Reuse the first trial's BS-RIS channels in every trial.
    pub freeze_bs_ris: bool,
    /// Reuse the first trial's UE positions in every trial.
    pub freeze_ues: bool,
    pub ul_channel: UlChannel,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Random restarts on top of the all-ones start.
    pub restarts: usize,
    /// Worker threads; results do not depend on this.
    pub threads: usize,
    pub m_sweep: Vec<usize>,
    pub reuse_sweep: Vec<usize>,
    pub rician_sweep_db: Vec<f64>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            antennas: 128,
            ris_rows: 16,
            ris_cols: 16,
            ues: 4,
            ris_count: 3,
            pilots: 1,
            reuse_factor: None,
            bs_spacing: 0.5,
            ris_spacing: 0.5,
            carrier_hz: 3.0e9,
            bandwidth_hz: 10.0e6,
            cell_radius: 150.0,
            tx_power_dbm: 20.0,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 10.0,
            snr_override_db: None,
            ref_loss_db: -35.3,
            correlation: 0.5,
            rician_db: 5.0,
            kappa_br: 2.3,
            kappa_ru: 2.3,
            kappa_bu: 4.2,
            ris_aod: PI / 6.0,
            ris_aod_elevation: 0.0,
            trials: 1000,
            seed: 1,
            prelog: 1.0,
            snap_to_grid: true,
            freeze_bs_ris: false,
            freeze_ues: false,
            ul_channel: UlChannel::Estimated,
            max_iter: 500,
            grad_tol: 1e-8,
            restarts: 0,
            threads: 1,
            m_sweep: vec![8, 16, 32, 64, 128, 256],
            reuse_sweep: vec![2, 3, 4, 5, 6, 7],
            rician_sweep_db: vec![0.0, 3.0, 5.0, 10.0],
        }
    }
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Keys in `text` replace the matching fields of `self`; the rest stay.
    pub fn overlay_toml(&self, text: &str) -> Result<Self> {
        let top: toml::Table = text.parse().map_err(|e: toml::de::Error| cfg_err(e.to_string()))?;
        let mut base: toml::Table = toml::Table::try_from(self).map_err(|e| cfg_err(e.to_string()))?;
        for (k, v) in top {
            base.insert(k, v);
        }
        base.try_into().map_err(|e: toml::de::Error| cfg_err(e.to_string()))
    }

    /// Overlays one file on top of `self`.
    pub fn overlay_file(&self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.overlay_toml(&text)
    }

    /// Sets one field from `key=value`; bare words are taken as strings.
    pub fn set(&self, assignment: &str) -> Result<Self> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("expected key=value, got {assignment:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        match self.overlay_toml(&format!("{key} = {value}")) {
            Ok(c) => Ok(c),
            Err(e) => self.overlay_toml(&format!("{key} = {value:?}")).map_err(|_| e),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// Stable 64-bit FNV-1a hash of the serialized configuration.
    pub fn hash(&self) -> u64 {
        self.to_toml_string()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
                (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
            })
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn ris_elements(&self) -> usize {
        self.ris_rows * self.ris_cols
    }

    /// `ceil(K / tau_p)` unless set explicitly.
    pub fn effective_reuse(&self) -> usize {
        self.reuse_factor
            .unwrap_or_else(|| self.ues.div_ceil(self.pilots.max(1)))
    }

    /// Noise floor in dBm: PSD + 10 log10(B) + noise figure.
    pub fn noise_floor_dbm(&self) -> f64 {
        self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    /// Transmit SNR in dB against unit-variance receiver noise.
    pub fn snr_db(&self) -> f64 {
        self.snr_override_db
            .unwrap_or(self.tx_power_dbm - self.noise_floor_dbm())
    }

    /// Linear `rho`.
    pub fn rho(&self) -> f64 {
        db(self.snr_db())
    }

    /// Geometry in wavelength units (`lambda = 1`).
    pub fn geometry(&self) -> Result<ArrayGeometry<f64>> {
        ArrayGeometry::new(
            self.antennas,
            self.bs_spacing,
            self.ris_rows,
            self.ris_cols,
            self.ris_spacing,
            1.0,
        )
        .map_err(|e| cfg_err(e.to_string()))
    }

    pub fn fading(&self) -> FadingParams<f64> {
        FadingParams {
            ref_loss: db(self.ref_loss_db),
            kappa_br: self.kappa_br,
            kappa_ru: self.kappa_ru,
            kappa_bu: self.kappa_bu,
            rician_factor: db(self.rician_db),
            correlation: self.correlation,
        }
    }

    pub fn ascent_options(&self) -> AscentOptions {
        AscentOptions {
            max_iter: self.max_iter,
            grad_tol: self.grad_tol,
            ..AscentOptions::default()
        }
    }

    /// Checks ranges and the relations `N = N_h N_v`, `reuse <= R + 1`,
    /// `reuse = K / tau_p` for divisible `K`. Schedule feasibility is
    /// checked when the topology is built.
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(cfg_err(format!("{name} must be positive, got {v}")))
            }
        };
        if self.antennas == 0 || self.ris_rows == 0 || self.ris_cols == 0 {
            return Err(cfg_err("antennas, ris_rows, and ris_cols must be positive"));
        }
        if self.ues == 0 || self.pilots == 0 {
            return Err(cfg_err("ues and pilots must be positive"));
        }
        if self.trials == 0 {
            return Err(cfg_err("trials must be positive"));
        }
        pos(self.bs_spacing, "bs_spacing")?;
        pos(self.ris_spacing, "ris_spacing")?;
        pos(self.carrier_hz, "carrier_hz")?;
        pos(self.bandwidth_hz, "bandwidth_hz")?;
        pos(self.cell_radius, "cell_radius")?;
        if !(self.prelog > 0.0 && self.prelog <= 1.0) {
            return Err(cfg_err(format!("prelog must lie in (0, 1], got {}", self.prelog)));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(cfg_err("grad_tol must be non-negative"));
        }
        self.fading()
            .validate()
            .map_err(|e| cfg_err(e.to_string()))?;
        let reuse = self.effective_reuse();
        if reuse > self.ris_count + 1 {
            return Err(cfg_err(format!(
                "reuse factor {reuse} exceeds R + 1 = {}",
                self.ris_count + 1
            )));
        }
        if self.ues % self.pilots == 0 && reuse != self.ues / self.pilots {
            return Err(cfg_err(format!(
                "reuse factor {reuse} differs from K / tau_p = {}",
                self.ues / self.pilots
            )));
        }
        if self.m_sweep.iter().any(|&m| m == 0) {
            return Err(cfg_err("m_sweep entries must be positive"));
        }
        if self.reuse_sweep.iter().any(|&s| s < 2) {
            return Err(cfg_err("reuse_sweep entries must be at least 2"));
        }
        Ok(())
    }
}
