use std::f64::consts::PI;

use rand::Rng;

use crate::channel::Association;
use crate::error::{Error, Result};
use crate::estimation::{assign_pilots, PilotAssignment};
use crate::geometry::{RisLink, UeLink};
use crate::placement::{build_angle_grid, snap_all, validate_placement, wrap_angle};
use crate::sim::config::SystemConfig;

/// Distance of the `K_0` disk center, as a fraction of the cell radius.
pub const DIRECT_CENTER: f64 = 0.6;
pub const RIS_DISTANCE: f64 = 0.8;
/// Offset of an aided UE disk center beyond its RIS, along the BS-RIS ray.
pub const RIS_UE_OFFSET: f64 = 0.2;
pub const DISK_RADIUS: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RisSite {
    pub distance: f64,
    /// Deployed azimuth (after snapping, if enabled).
    pub angle: f64,
    /// Azimuth before snapping.
    pub nominal_angle: f64,
}

/// The deterministic part of a topology: sites, disks, and the schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub ris_sites: Vec<RisSite>,
    /// Disk center per association group (`K_0` first when present).
    pub disk_centers: Vec<[f64; 2]>,
    pub disk_radius: f64,
    pub association: Association,
    pub assignment: PilotAssignment,
    pub ris_aod: f64,
    pub ris_aod_elevation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub ue_positions: Vec<[f64; 2]>,
    pub ris_sites: Vec<RisSite>,
    pub association: Association,
    pub assignment: PilotAssignment,
    pub ris_links: Vec<RisLink<f64>>,
    pub ue_links: Vec<UeLink<f64>>,
}

fn polar(r: f64, a: f64) -> [f64; 2] {
    [r * a.cos(), r * a.sin()]
}

/// Sector centers `(n + 1/2) 2 pi / sectors`, wrapped into `(-pi, pi]`.
pub fn sector_angles(sectors: usize) -> Vec<f64> {
    let step = 2.0 * PI / sectors as f64;
    (0..sectors)
        .map(|n| wrap_angle((n as f64 + 0.5) * step))
        .collect()
}

/// UE `k` joins group `k / tau_p`; with `direct_group` the first group is
/// `K_0`, otherwise every group belongs to a RIS.
fn associate(config: &SystemConfig, direct_group: bool) -> Result<Association> {
    let groups = config.ris_count + usize::from(direct_group);
    let need = config.ues.div_ceil(config.pilots);
    if need > groups {
        return Err(Error::InfeasibleSchedule(format!(
            "{} UEs need {need} groups of {} but only {groups} exist",
            config.ues, config.pilots
        )));
    }
    let ris_of = (0..config.ues)
        .map(|k| {
            let g = k / config.pilots;
            if direct_group {
                g.checked_sub(1)
            } else {
                Some(g)
            }
        })
        .collect();
    Association::new(ris_of, config.ris_count)
}

impl Layout {
    /// Cell layout with `R + 1` sectors: `K_0` in the first, RIS `r` in
    /// sector `r + 1`, RIS angles snapped to the grid when enabled.
    pub fn standard(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        let sectors = sector_angles(config.ris_count + 1);
        Self::build(config, Some(sectors[0]), &sectors[1..], config.snap_to_grid, true)
    }

    /// Layout with the given nominal RIS angles. Aided UE disks sit beyond
    /// the deployed site when `ues_follow_snap`, beyond the nominal one
    /// otherwise.
    pub fn build(
        config: &SystemConfig,
        direct_angle: Option<f64>,
        ris_angles: &[f64],
        snap: bool,
        ues_follow_snap: bool,
    ) -> Result<Self> {
        if ris_angles.len() != config.ris_count {
            return Err(Error::InvalidArgument(format!(
                "{} RIS angles for {} RISs",
                ris_angles.len(),
                config.ris_count
            )));
        }
        let association = associate(config, direct_angle.is_some())?;
        let assignment = assign_pilots(&association, config.pilots)?;
        let nominal: Vec<f64> = ris_angles.iter().map(|&a| wrap_angle(a)).collect();
        let deployed = if snap {
            let grid = build_angle_grid(config.antennas, config.bs_spacing, 1.0)?;
            let s = snap_all(&nominal, &grid)?;
            debug_assert!(validate_placement(&s, config.bs_spacing, 1.0).is_empty());
            s
        } else {
            nominal.clone()
        };
        let dc = config.cell_radius;
        let ris_sites: Vec<RisSite> = nominal
            .iter()
            .zip(&deployed)
            .map(|(&n, &a)| RisSite {
                distance: RIS_DISTANCE * dc,
                angle: a,
                nominal_angle: n,
            })
            .collect();
        let mut disk_centers = Vec::new();
        if let Some(a) = direct_angle {
            disk_centers.push(polar(DIRECT_CENTER * dc, a));
        }
        for s in &ris_sites {
            let a = if ues_follow_snap { s.angle } else { s.nominal_angle };
            disk_centers.push(polar((RIS_DISTANCE + RIS_UE_OFFSET) * dc, a));
        }
        Ok(Self {
            ris_sites,
            disk_centers,
            disk_radius: DISK_RADIUS * dc,
            association,
            assignment,
            ris_aod: config.ris_aod,
            ris_aod_elevation: config.ris_aod_elevation,
        })
    }

    fn group_center(&self, k: usize) -> [f64; 2] {
        let g = self.association.group_of(k);
        let has_direct = self.disk_centers.len() > self.ris_sites.len();
        self.disk_centers[if has_direct { g } else { g - 1 }]
    }

    /// Draws UE positions uniformly in their disks.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Scenario {
        let k_total = self.association.num_ues();
        let ue_positions: Vec<[f64; 2]> = (0..k_total)
            .map(|k| {
                let c = self.group_center(k);
                let r = self.disk_radius * rng.gen::<f64>().sqrt();
                let a = 2.0 * PI * rng.gen::<f64>();
                [c[0] + r * a.cos(), c[1] + r * a.sin()]
            })
            .collect();
        self.place(ue_positions)
    }

    /// Scenario for given UE positions.
    pub fn place(&self, ue_positions: Vec<[f64; 2]>) -> Scenario {
        let ris_links = self
            .ris_sites
            .iter()
            .map(|s| RisLink {
                distance: s.distance,
                bs_aoa: s.angle,
                aod_azimuth: self.ris_aod,
                aod_elevation: self.ris_aod_elevation,
            })
            .collect();
        let ue_links = ue_positions
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let ris_distance = self.association.ris_of(k).map(|r| {
                    let s = self.ris_sites[r];
                    let q = polar(s.distance, s.angle);
                    (p[0] - q[0]).hypot(p[1] - q[1])
                });
                UeLink {
                    bs_distance: p[0].hypot(p[1]),
                    bs_aoa: p[1].atan2(p[0]),
                    ris_distance,
                }
            })
            .collect();
        Scenario {
            ue_positions,
            ris_sites: self.ris_sites.clone(),
            association: self.association.clone(),
            assignment: self.assignment.clone(),
            ris_links,
            ue_links,
        }
    }
}

/// Standard cell topology with freshly drawn UE positions.
pub fn build_topology<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Result<Scenario> {
    Ok(Layout::standard(config)?.draw(rng))
}
