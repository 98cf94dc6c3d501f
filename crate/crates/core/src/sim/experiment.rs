use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::{
    combiners, dl_sinr, precoders, spectral_efficiency, ul_sinr_all, DlEnsemble, PowerDecomposition,
    Scheme,
};
use crate::channel::ris_covariance;
use crate::error::{invalid, Error, Result};
use crate::estimation::{despread_with_noise, estimate_all};
use crate::geometry::{
    bs_ris_channel_from, complex_gaussian_mat, complex_gaussian_vec, kernel_factor, path_loss,
    ris_correlation_kernel, ArrayGeometry, ExponentialSampler, FadingParams,
};
use crate::phase_opt::{build_quadratic, optimize_phases, random_phases, AscentOptions};
use crate::placement::normalized_interference;
use crate::scalar::{CMat, CVec, RMat};
use crate::sim::config::{SystemConfig, UlChannel};
use crate::sim::output::{ExperimentResult, ResultRow, UlSamples};
use crate::sim::topology::{sector_angles, Layout, Scenario};

/// RIS operating mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// No RIS: aided UEs keep only their direct link.
    Nr,
    /// Random phases.
    Rps,
    /// Manifold-optimized phases.
    Mo,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Nr, Mode::Rps, Mode::Mo];

    pub fn label(self) -> &'static str {
        match self {
            Mode::Nr => "nr",
            Mode::Rps => "rps",
            Mode::Mo => "mo",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Normalized interference vs `M` for two RISs at random sites, raw
    /// and grid-snapped.
    Fig3,
    /// UL SE per group vs `M`.
    Fig4,
    /// UL SE vs `M`.
    Fig6,
    /// UL SE vs reuse factor.
    Fig7,
    /// UL power decomposition vs reuse factor.
    Fig8,
    /// DL SE vs `M`.
    Fig9,
    /// DL SE per group vs `M`.
    Fig10,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig6,
        Preset::Fig7,
        Preset::Fig8,
        Preset::Fig9,
        Preset::Fig10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
            Preset::Fig10 => "fig10",
        }
    }

    /// Defaults of the preset's scenario, before file and flag overrides.
    pub fn base_config(self) -> SystemConfig {
        let d = SystemConfig::default();
        match self {
            Preset::Fig3 => SystemConfig {
                ues: 2,
                ris_count: 2,
                pilots: 1,
                ..d
            },
            Preset::Fig7 | Preset::Fig8 => SystemConfig {
                ues: 16,
                pilots: 4,
                ris_count: 3,
                ..d
            },
            _ => d,
        }
    }

    pub fn sweep(self) -> SweepKind {
        match self {
            Preset::Fig3 => SweepKind::Interference,
            Preset::Fig7 | Preset::Fig8 => SweepKind::Reuse,
            _ => SweepKind::Antennas,
        }
    }

    fn keeps(self, row: &ResultRow) -> bool {
        let ul = row.metric == "ul_se";
        let dl = row.metric == "dl_se";
        let split = row.group != "all";
        match self {
            Preset::Fig3 => true,
            Preset::Fig6 => ul,
            Preset::Fig4 => ul && split,
            Preset::Fig7 => ul,
            Preset::Fig8 => matches!(row.metric.as_str(), "ds" | "ipr" | "iop" | "ee"),
            Preset::Fig9 => dl,
            Preset::Fig10 => dl && split,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                invalid(format!("unknown preset {s:?} (expected one of {})", names.join(", ")))
            })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    /// Every metric vs `M` over `m_sweep`.
    Antennas,
    /// Every metric vs reuse factor over `reuse_sweep`, with `R = s - 1` and
    /// `K = s tau_p`.
    Reuse,
    /// Normalized interference vs `M` over `m_sweep` and `rician_sweep_db`.
    Interference,
}

const POSITIONS: u64 = 0;
const BS_RIS: u64 = 1;
const RIS_UE: u64 = 2;
const DIRECT: u64 = 3;
const NOISE: u64 = 4;
const PHASES: u64 = 5;
const RESTARTS: u64 = 6;
const STREAMS: u64 = 8;

/// Independent generator for one (trial, purpose) pair.
pub fn trial_rng(seed: u64, trial: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 * STREAMS + purpose);
    rng
}

/// Trials are processed in blocks of this size; results never depend on it
/// or on the worker count.
const BLOCK: usize = 32;

fn run_trials<O: Send, F>(trials: usize, threads: usize, f: F, mut sink: impl FnMut(usize, O) -> Result<()>) -> Result<()>
where
    F: Fn(usize) -> Result<O> + Sync,
{
    let threads = threads.max(1);
    let mut start = 0;
    while start < trials {
        let end = (start + BLOCK).min(trials);
        let outs: Vec<Result<O>> = if threads == 1 {
            (start..end).map(&f).collect()
        } else {
            let idx: Vec<usize> = (start..end).collect();
            let per = idx.len().div_ceil(threads);
            std::thread::scope(|s| {
                let handles: Vec<_> = idx
                    .chunks(per)
                    .map(|chunk| {
                        let f = &f;
                        s.spawn(move || chunk.iter().map(|&t| f(t)).collect::<Vec<_>>())
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("trial worker panicked"))
                    .collect()
            })
        };
        for (i, o) in outs.into_iter().enumerate() {
            sink(start + i, o?)?;
        }
        start = end;
    }
    Ok(())
}

/// RIS kernel shared by every point with the same surface.
struct Kernel {
    kernel: RMat<f64>,
    factor: RMat<f64>,
}

impl Kernel {
    fn new(geom: &ArrayGeometry<f64>) -> Result<Self> {
        let kernel = ris_correlation_kernel(geom);
        let factor = kernel_factor(&kernel)?;
        Ok(Self { kernel, factor })
    }
}

/// Everything fixed at one sweep point.
struct Point<'a> {
    config: SystemConfig,
    x: f64,
    layout: Layout,
    geom: ArrayGeometry<f64>,
    fading: FadingParams<f64>,
    kernel: &'a Kernel,
    direct: ExponentialSampler<f64>,
    rho: f64,
    opts: AscentOptions,
}

impl<'a> Point<'a> {
    fn new(config: SystemConfig, x: f64, layout: Layout, kernel: &'a Kernel) -> Result<Self> {
        let geom = config.geometry()?;
        Ok(Self {
            fading: config.fading(),
            direct: ExponentialSampler::new(config.correlation, config.antennas)?,
            rho: config.rho(),
            opts: config.ascent_options(),
            config,
            x,
            layout,
            geom,
            kernel,
        })
    }

    fn stream(&self, trial: usize, frozen: bool) -> usize {
        if frozen {
            0
        } else {
            trial
        }
    }
}

/// `sqrt(beta) F z` for a real factor `F`.
fn color_real(factor: &RMat<f64>, beta: f64, white: &CVec<f64>) -> CVec<f64> {
    let re = factor * white.map(|z| z.re);
    let im = factor * white.map(|z| z.im);
    let s = beta.sqrt();
    CVec::from_fn(re.len(), |i, _| Complex::new(re[i] * s, im[i] * s))
}

/// Random draws of one trial that do not depend on the RIS mode.
struct Draws {
    scenario: Scenario,
    bs_ris_nlos: Vec<CMat<f64>>,
    ris_ue: Vec<Option<CVec<f64>>>,
    beta_ru: Vec<Option<f64>>,
    direct: Vec<CVec<f64>>,
    r_bu: Vec<CMat<f64>>,
    noise: Vec<CVec<f64>>,
    random_phases: Vec<CVec<f64>>,
}

fn draw_links(p: &Point, t: usize, scenario: Scenario) -> Result<Draws> {
    let c = &p.config;
    let (m, n) = (p.geom.bs_antennas, p.geom.ris_elements());
    let mut rng = trial_rng(c.seed, p.stream(t, c.freeze_bs_ris), BS_RIS);
    let bs_ris_nlos = (0..scenario.ris_links.len())
        .map(|_| complex_gaussian_mat(m, n, &mut rng))
        .collect();
    let mut rng = trial_rng(c.seed, t, RIS_UE);
    let mut ris_ue = Vec::new();
    let mut beta_ru = Vec::new();
    for l in &scenario.ue_links {
        match l.ris_distance {
            Some(d) => {
                let beta = path_loss(d, p.fading.kappa_ru, p.fading.ref_loss)?;
                let z = complex_gaussian_vec(n, &mut rng);
                ris_ue.push(Some(color_real(&p.kernel.factor, beta, &z)));
                beta_ru.push(Some(beta));
            }
            None => {
                ris_ue.push(None);
                beta_ru.push(None);
            }
        }
    }
    let mut rng = trial_rng(c.seed, t, DIRECT);
    let mut direct = Vec::new();
    let mut r_bu = Vec::new();
    for l in &scenario.ue_links {
        let beta = path_loss(l.bs_distance, p.fading.kappa_bu, p.fading.ref_loss)?;
        let z = complex_gaussian_vec(m, &mut rng);
        direct.push(p.direct.color(beta, l.bs_aoa, &z));
        r_bu.push(p.direct.covariance(beta, l.bs_aoa));
    }
    let mut rng = trial_rng(c.seed, t, NOISE);
    let noise = (0..scenario.assignment.pilot_count)
        .map(|_| complex_gaussian_vec(m, &mut rng))
        .collect();
    let mut rng = trial_rng(c.seed, t, PHASES);
    let random_phases = (0..scenario.ris_links.len())
        .map(|_| random_phases(n, &mut rng))
        .collect();
    Ok(Draws {
        scenario,
        bs_ris_nlos,
        ris_ue,
        beta_ru,
        direct,
        r_bu,
        noise,
        random_phases,
    })
}

fn bs_ris_channels(p: &Point, d: &Draws) -> Result<Vec<CMat<f64>>> {
    d.scenario
        .ris_links
        .iter()
        .zip(&d.bs_ris_nlos)
        .map(|(l, nlos)| bs_ris_channel_from(l, &p.fading, &p.geom, nlos))
        .collect()
}

fn optimized_phases(p: &Point, t: usize, h: &[CMat<f64>]) -> Result<Vec<CVec<f64>>> {
    let mut rng = trial_rng(p.config.seed, t, RESTARTS);
    h.iter()
        .map(|h_r| {
            let form = build_quadratic(h_r, &p.kernel.kernel)?;
            Ok(optimize_phases(&form, &p.opts, p.config.restarts, &mut rng)?.phases)
        })
        .collect()
}

/// Overall channels and effective correlations for one mode; `phases` is
/// `None` for the no-RIS mode.
fn compose(
    p: &Point,
    d: &Draws,
    h: &[CMat<f64>],
    phases: Option<&[CVec<f64>]>,
) -> (Vec<CVec<f64>>, Vec<CMat<f64>>) {
    let assoc = &d.scenario.association;
    let ris_cov: Vec<CMat<f64>> = match phases {
        Some(ph) => h
            .iter()
            .zip(ph)
            .map(|(h_r, phi)| ris_covariance(h_r, phi, &p.kernel.factor))
            .collect(),
        None => Vec::new(),
    };
    let mut overall = Vec::with_capacity(d.direct.len());
    let mut corr = Vec::with_capacity(d.direct.len());
    for k in 0..d.direct.len() {
        match (assoc.ris_of(k), phases) {
            (Some(r), Some(ph)) => {
                let h_rk = d.ris_ue[k].as_ref().expect("aided UE has a RIS link");
                let beta = d.beta_ru[k].expect("aided UE has a RIS gain");
                overall.push(&h[r] * h_rk.component_mul(&ph[r]) + &d.direct[k]);
                corr.push(&ris_cov[r] * Complex::new(beta, 0.0) + &d.r_bu[k]);
            }
            _ => {
                overall.push(d.direct[k].clone());
                corr.push(d.r_bu[k].clone());
            }
        }
    }
    (overall, corr)
}

/// Per-(mode, scheme) outputs of one trial, indexed `mode * 3 + scheme`.
struct SeTrial {
    ul_se: Vec<Vec<f64>>,
    decomposition: Vec<Vec<PowerDecomposition>>,
    dl_gains: Vec<Vec<Vec<Complex<f64>>>>,
}

fn se_trial(p: &Point, t: usize) -> Result<SeTrial> {
    let c = &p.config;
    let scenario = p
        .layout
        .draw(&mut trial_rng(c.seed, p.stream(t, c.freeze_ues), POSITIONS));
    let d = draw_links(p, t, scenario)?;
    let h = bs_ris_channels(p, &d)?;
    let mo = optimized_phases(p, t, &h)?;
    let assignment = &d.scenario.assignment;
    let mut out = SeTrial {
        ul_se: Vec::new(),
        decomposition: Vec::new(),
        dl_gains: Vec::new(),
    };
    for mode in Mode::ALL {
        let phases = match mode {
            Mode::Nr => None,
            Mode::Rps => Some(d.random_phases.as_slice()),
            Mode::Mo => Some(mo.as_slice()),
        };
        let (overall, corr) = compose(p, &d, &h, phases);
        let y = despread_with_noise(&overall, assignment, p.rho, &d.noise)?;
        let est = estimate_all(y, &corr, assignment, p.rho)?;
        for scheme in Scheme::ALL {
            let comb = combiners(scheme, &est.estimates, &est.error_cov, p.rho)?;
            let seen = match c.ul_channel {
                UlChannel::Estimated => &est.estimates,
                UlChannel::True => &overall,
            };
            let sinr = ul_sinr_all(&comb, seen, &est.error_cov, assignment, p.rho)?;
            out.ul_se
                .push(sinr.iter().map(|(g, _)| spectral_efficiency(*g, c.prelog)).collect());
            out.decomposition.push(sinr.into_iter().map(|(_, d)| d).collect());
            let w = precoders(&comb)?;
            out.dl_gains.push(
                overall
                    .iter()
                    .map(|h_k| w.iter().map(|w_j| h_k.dotc(w_j)).collect())
                    .collect(),
            );
        }
    }
    Ok(out)
}

fn mean_over(values: &[f64], members: &[usize]) -> f64 {
    members.iter().map(|&k| values[k]).sum::<f64>() / members.len() as f64
}

struct SeAccumulator {
    ues: usize,
    ul_sum: Vec<Vec<f64>>,
    ul_samples: Vec<Vec<f64>>,
    decomposition: Vec<Vec<[f64; 4]>>,
    dl: Vec<DlEnsemble>,
}

impl SeAccumulator {
    fn new(ues: usize, trials: usize) -> Self {
        let n = Mode::ALL.len() * Scheme::ALL.len();
        Self {
            ues,
            ul_sum: vec![vec![0.0; ues]; n],
            ul_samples: vec![Vec::with_capacity(trials * ues); n],
            decomposition: vec![vec![[0.0; 4]; ues]; n],
            dl: vec![DlEnsemble::new(ues); n],
        }
    }

    fn push(&mut self, t: SeTrial) -> Result<()> {
        for i in 0..self.ul_sum.len() {
            for k in 0..self.ues {
                self.ul_sum[i][k] += t.ul_se[i][k];
                let d = &t.decomposition[i][k];
                let acc = &mut self.decomposition[i][k];
                acc[0] += d.ds;
                acc[1] += d.ipr;
                acc[2] += d.iop;
                acc[3] += d.ee;
            }
            self.ul_samples[i].extend_from_slice(&t.ul_se[i]);
            self.dl[i].push_gains(&t.dl_gains[i])?;
        }
        Ok(())
    }
}

fn group_sets(layout: &Layout) -> Vec<(&'static str, Vec<usize>)> {
    let assoc = &layout.association;
    let all: Vec<usize> = (0..assoc.num_ues()).collect();
    let closest: Vec<usize> = all.iter().copied().filter(|&k| assoc.is_direct(k)).collect();
    let farthest: Vec<usize> = all.iter().copied().filter(|&k| !assoc.is_direct(k)).collect();
    [("all", all), ("closest", closest), ("farthest", farthest)]
        .into_iter()
        .filter(|(_, m)| !m.is_empty())
        .collect()
}

fn se_point(p: &Point, axis: &str, result: &mut ExperimentResult) -> Result<()> {
    let c = &p.config;
    let ues = p.layout.association.num_ues();
    let mut acc = SeAccumulator::new(ues, c.trials);
    run_trials(c.trials, c.threads, |t| se_trial(p, t), |_, o| acc.push(o))?;
    let s = c.trials as f64;
    let groups = group_sets(&p.layout);
    let variant = if c.snap_to_grid { "grid" } else { "raw" };
    let ue_groups: Vec<usize> = (0..ues).map(|k| p.layout.association.group_of(k)).collect();
    let row = |metric: &str, scheme: Scheme, mode: Mode, group: &str, value: f64| ResultRow {
        metric: metric.to_owned(),
        scheme: scheme.label().to_owned(),
        mode: mode.label().to_owned(),
        axis: axis.to_owned(),
        x: p.x,
        group: group.to_owned(),
        variant: variant.to_owned(),
        rician_db: c.rician_db,
        value,
        count: c.trials as u64,
    };
    for (mi, mode) in Mode::ALL.into_iter().enumerate() {
        for (si, scheme) in Scheme::ALL.into_iter().enumerate() {
            let i = mi * Scheme::ALL.len() + si;
            let ul: Vec<f64> = acc.ul_sum[i].iter().map(|v| v / s).collect();
            let dl: Vec<f64> = (0..ues)
                .map(|k| Ok(spectral_efficiency(dl_sinr(k, &acc.dl[i], p.rho)?, c.prelog)))
                .collect::<Result<_>>()?;
            for (g, members) in &groups {
                result.rows.push(row("ul_se", scheme, mode, g, mean_over(&ul, members)));
                result.rows.push(row("dl_se", scheme, mode, g, mean_over(&dl, members)));
                for (j, name) in ["ds", "ipr", "iop", "ee"].into_iter().enumerate() {
                    let v: Vec<f64> = acc.decomposition[i].iter().map(|d| d[j] / s).collect();
                    result.rows.push(row(name, scheme, mode, g, mean_over(&v, members)));
                }
            }
            result.ul_samples.push(UlSamples {
                x: p.x,
                mode: mode.label().to_owned(),
                scheme: scheme.label().to_owned(),
                ues,
                groups: ue_groups.clone(),
                values: std::mem::take(&mut acc.ul_samples[i]),
            });
        }
    }
    Ok(())
}

/// Normalized interference between the two UEs for every mode at one
/// variant, `[nr, rps, mo]`.
fn pair_interference(p: &Point, t: usize, d: &Draws) -> Result<[f64; 3]> {
    let h = bs_ris_channels(p, d)?;
    let mo = optimized_phases(p, t, &h)?;
    let mut out = [0.0; 3];
    for (i, mode) in Mode::ALL.into_iter().enumerate() {
        let phases = match mode {
            Mode::Nr => None,
            Mode::Rps => Some(d.random_phases.as_slice()),
            Mode::Mo => Some(mo.as_slice()),
        };
        let (_, corr) = compose(p, d, &h, phases);
        out[i] = normalized_interference(&corr[0], &corr[1])?;
    }
    Ok(out)
}

/// Two RISs at uniformly random sites, one UE each; the same trial is
/// evaluated with raw and grid-snapped sites. UE disks follow the raw
/// sites in both cases so that only the RIS positions differ.
fn interference_trial(p: &Point, t: usize) -> Result<[[f64; 3]; 2]> {
    let c = &p.config;
    let mut rng = trial_rng(c.seed, p.stream(t, c.freeze_ues), POSITIONS);
    let angles: Vec<f64> = (0..c.ris_count)
        .map(|_| 2.0 * PI * rng.gen::<f64>())
        .collect();
    let raw = Layout::build(c, None, &angles, false, false)?;
    let snapped = Layout::build(c, None, &angles, true, false)?;
    let positions = raw.draw(&mut rng).ue_positions;
    // identical streams, so both variants share every white draw
    let d_raw = draw_links(p, t, raw.place(positions.clone()))?;
    let d_snap = draw_links(p, t, snapped.place(positions))?;
    Ok([pair_interference(p, t, &d_raw)?, pair_interference(p, t, &d_snap)?])
}

fn interference_point(p: &Point, result: &mut ExperimentResult) -> Result<()> {
    let c = &p.config;
    if c.ues != c.ris_count || c.pilots != 1 {
        return Err(invalid("the interference sweep needs one UE per RIS and one pilot"));
    }
    if c.ris_count != 2 {
        return Err(invalid("the interference sweep needs exactly two RISs"));
    }
    let mut sums = [[0.0; 3]; 2];
    run_trials(
        c.trials,
        c.threads,
        |t| interference_trial(p, t),
        |_, o| {
            for v in 0..2 {
                for i in 0..3 {
                    sums[v][i] += o[v][i];
                }
            }
            Ok(())
        },
    )?;
    for (v, variant) in ["raw", "grid"].into_iter().enumerate() {
        for (i, mode) in Mode::ALL.into_iter().enumerate() {
            result.rows.push(ResultRow {
                metric: "varpi".to_owned(),
                scheme: String::new(),
                mode: mode.label().to_owned(),
                axis: "M".to_owned(),
                x: p.x,
                group: "pair".to_owned(),
                variant: variant.to_owned(),
                rician_db: c.rician_db,
                value: sums[v][i] / c.trials as f64,
                count: c.trials as u64,
            });
        }
    }
    Ok(())
}

/// Runs every metric of a sweep; presets filter the rows afterwards.
pub fn simulate(config: &SystemConfig, sweep: SweepKind, label: &str) -> Result<ExperimentResult> {
    config.validate()?;
    let started = Instant::now();
    let mut result = ExperimentResult::empty(label, config);
    let kernel = Kernel::new(&config.geometry()?)?;
    match sweep {
        SweepKind::Antennas => {
            for &m in &config.m_sweep {
                let c = SystemConfig {
                    antennas: m,
                    ..config.clone()
                };
                c.validate()?;
                let p = Point::new(c.clone(), m as f64, Layout::standard(&c)?, &kernel)?;
                se_point(&p, "M", &mut result)?;
            }
        }
        SweepKind::Reuse => {
            for &s in &config.reuse_sweep {
                let c = SystemConfig {
                    ris_count: s - 1,
                    ues: s * config.pilots,
                    reuse_factor: None,
                    ..config.clone()
                };
                c.validate()?;
                let p = Point::new(c.clone(), s as f64, Layout::standard(&c)?, &kernel)?;
                se_point(&p, "reuse", &mut result)?;
            }
        }
        SweepKind::Interference => {
            for &alpha in &config.rician_sweep_db {
                for &m in &config.m_sweep {
                    let c = SystemConfig {
                        antennas: m,
                        rician_db: alpha,
                        ..config.clone()
                    };
                    c.validate()?;
                    // placeholder layout; sites are redrawn every trial
                    let layout = Layout::build(&c, None, &sector_angles(c.ris_count), false, false)?;
                    let p = Point::new(c, m as f64, layout, &kernel)?;
                    interference_point(&p, &mut result)?;
                }
            }
        }
    }
    result.meta.runtime_s = started.elapsed().as_secs_f64();
    Ok(result)
}

pub fn run_experiment(config: &SystemConfig, preset: Preset) -> Result<ExperimentResult> {
    let mut result = simulate(config, preset.sweep(), preset.name())?;
    result.rows.retain(|r| preset.keeps(r));
    if !matches!(preset, Preset::Fig4 | Preset::Fig6 | Preset::Fig7) {
        result.ul_samples.clear();
    }
    Ok(result)
}
