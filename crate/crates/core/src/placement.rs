//! Deterministic angular placement of RISs around the BS.
//!
//! Two RISs at BS azimuths `theta`, `theta'` have orthogonal BS steering
//! vectors whenever `sin theta - sin theta' = l * lambda / (M d_B)` with `l`
//! not a multiple of `M`. The grid below collects one such lattice, mirrored
//! into all four quadrants, and the validator flags placements that land on
//! a multiple of `M` (maximal interference).
//!
//! Only the LoS BS-RIS cross term of `tr(R_k R_k')` is nulled this way. The
//! remaining terms (reflected-vs-direct and direct-vs-direct) do not depend
//! on the RIS azimuth, so the grid reduces, but does not remove,
//! interference between UEs of different surfaces; [`normalized_interference`]
//! scores the full covariances.
//!
//! Lattice positions are kept as integer sine indices so the lattice is
//! exact; radians are produced only at the boundary.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::linalg::{trace, trace_product};
use crate::scalar::{lit, CMat, Real};

/// Sine-domain tolerance for lattice collisions.
pub const LATTICE_TOL: f64 = 1e-9;

/// `|sin(pi M x) / sin(pi x)|` with `x = (d_B / lambda)(sin theta - sin theta')`,
/// equal to `|a_B(theta)^H a_B(theta')|`; `M` at the removable singularities.
pub fn steering_inner_product_magnitude<T: Real>(
    theta: T,
    theta_other: T,
    antennas: usize,
    spacing: T,
    wavelength: T,
) -> T {
    let x = spacing / wavelength * (theta.sin() - theta_other.sin());
    // sin(pi M (n + r)) / sin(pi (n + r)) = ±sin(pi M r) / sin(pi r) for integer n, M
    let r = x - x.round();
    let m = lit::<T>(antennas as f64);
    if r.abs() < lit(1e-12) {
        return m;
    }
    let pi = T::pi();
    ((pi * m * r).sin() / (pi * r).sin()).abs()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAngle<T: Real> {
    /// Radians in `(-pi, pi]`.
    pub angle: T,
    /// `sin(angle) = sin_index / lattice`.
    pub sin_index: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngularGrid<T: Real> {
    pub points: Vec<GridAngle<T>>,
    pub antennas: usize,
    pub spacing: T,
    pub wavelength: T,
    /// `M d_B / lambda`.
    pub lattice: T,
}

impl<T: Real> AngularGrid<T> {
    pub fn angles(&self) -> Vec<T> {
        self.points.iter().map(|p| p.angle).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sin_value(&self, p: &GridAngle<T>) -> T {
        lit::<T>(p.sin_index as f64) / self.lattice
    }

    /// Largest circular gap between consecutive grid angles.
    pub fn worst_gap(&self) -> T {
        let a = self.angles();
        if a.len() < 2 {
            return T::two_pi();
        }
        let mut gap = a[0] + T::two_pi() - a[a.len() - 1];
        for w in a.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        gap
    }

    pub fn contains(&self, angle: T) -> bool {
        self.points
            .iter()
            .any(|p| circular_distance(p.angle, angle) < lit(1e-12))
    }
}

/// Wraps into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut w = a - two_pi * ((a + T::pi()) / two_pi).floor();
    if w <= -T::pi() {
        w += two_pi;
    }
    w
}

pub fn circular_distance<T: Real>(a: T, b: T) -> T {
    wrap_angle(a - b).abs()
}

/// First-quadrant angles `asin(l lambda / (M d_B))`, `l = 0..M d_B/lambda`,
/// mirrored across the x axis and then the y axis, seams deduplicated.
pub fn build_angle_grid<T: Real>(antennas: usize, spacing: T, wavelength: T) -> Result<AngularGrid<T>> {
    if !(spacing > T::zero() && wavelength > T::zero()) {
        return Err(invalid("spacing and wavelength must be positive"));
    }
    let lattice = lit::<T>(antennas as f64) * spacing / wavelength;
    if lattice < T::one() {
        return Err(invalid(format!(
            "M d_B / lambda = {lattice} must be at least 1"
        )));
    }
    let top = (lattice + lit(1e-9)).floor();
    let top_i = crate::scalar::to_f64(top) as i64;
    let pi = T::pi();
    let mut points = Vec::new();
    for l in 0..=top_i {
        let s = (lit::<T>(l as f64) / lattice).min(T::one());
        let q1 = s.asin();
        for (angle, idx) in [(q1, l), (-q1, -l), (pi - q1, l), (-pi + q1, -l)] {
            points.push(GridAngle {
                angle: wrap_angle(angle),
                sin_index: idx,
            });
        }
    }
    points.sort_by(|a, b| a.angle.partial_cmp(&b.angle).unwrap_or(Ordering::Equal));
    points.dedup_by(|b, a| (b.angle - a.angle).abs() < lit(1e-12));
    Ok(AngularGrid {
        points,
        antennas,
        spacing,
        wavelength,
        lattice,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Sines differ by `n lambda / d_B` (lattice offset a multiple of `M`).
    Lattice { n: i64 },
    /// `theta` and `pi - theta` both occupied.
    Mirror,
    /// `+pi/2` and `-pi/2` both occupied.
    OppositeEndfire,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub first: usize,
    pub second: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::Lattice { n } => write!(
                f,
                "positions {} and {}: sines differ by {n} lambda/d_B (maximal interference)",
                self.first, self.second
            ),
            ViolationKind::Mirror => write!(
                f,
                "positions {} and {}: mirror pair theta / pi - theta",
                self.first, self.second
            ),
            ViolationKind::OppositeEndfire => write!(
                f,
                "positions {} and {}: both +pi/2 and -pi/2 occupied",
                self.first, self.second
            ),
        }
    }
}

fn pair_violation<T: Real>(a: T, b: T, spacing: T, wavelength: T) -> Option<ViolationKind> {
    let tol = lit::<T>(1e-9);
    let half_pi = T::frac_pi_2();
    let endfire = |x: T| circular_distance(x, half_pi) < tol || circular_distance(x, -half_pi) < tol;
    if endfire(a) && endfire(b) && circular_distance(a, b) > tol {
        return Some(ViolationKind::OppositeEndfire);
    }
    let ds = a.sin() - b.sin();
    let step = wavelength / spacing;
    let n = (ds / step).round();
    if (ds - n * step).abs() < lit(LATTICE_TOL) {
        if n == T::zero() && circular_distance(a, b) > tol && circular_distance(a + b, T::pi()) < tol {
            return Some(ViolationKind::Mirror);
        }
        return Some(ViolationKind::Lattice {
            n: crate::scalar::to_f64(n) as i64,
        });
    }
    None
}

/// Flags every pair of placements that violates the deployment rules.
pub fn validate_placement<T: Real>(
    angles: &[T],
    spacing: T,
    wavelength: T,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..angles.len() {
        for j in (i + 1)..angles.len() {
            if let Some(kind) = pair_violation(angles[i], angles[j], spacing, wavelength) {
                out.push(Violation {
                    first: i,
                    second: j,
                    kind,
                });
            }
        }
    }
    out
}

/// Warning for spacings where the printed rules are incomplete (grating
/// lobes beyond half-wavelength spacing).
pub fn spacing_warning<T: Real>(spacing: T, wavelength: T) -> Option<String> {
    (spacing > wavelength * lit(0.5) + lit(1e-12)).then(|| {
        format!(
            "d_B / lambda = {} exceeds 1/2; grating-lobe conflicts beyond the mirror and endfire rules are not checked",
            spacing / wavelength
        )
    })
}

/// Nearest grid angle that creates no violation against `occupied`; ties
/// go to the smaller angle.
pub fn snap_to_grid<T: Real>(theta: T, grid: &AngularGrid<T>, occupied: &[T]) -> Result<T> {
    if grid.is_empty() {
        return Err(invalid("empty grid"));
    }
    let mut cands: Vec<(T, T)> = grid
        .points
        .iter()
        .map(|p| (circular_distance(p.angle, theta), p.angle))
        .collect();
    let tie = lit::<T>(1e-12);
    cands.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= tie {
            a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal)
        } else {
            a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal)
        }
    });
    cands
        .into_iter()
        .map(|(_, a)| a)
        .find(|&a| {
            occupied
                .iter()
                .all(|&o| pair_violation(a, o, grid.spacing, grid.wavelength).is_none())
        })
        .ok_or_else(|| {
            Error::PlacementExhausted(format!(
                "no conflict-free grid angle near {theta} with {} occupied",
                occupied.len()
            ))
        })
}

/// Snaps a sequence of angles in order, each against the ones already placed.
pub fn snap_all<T: Real>(angles: &[T], grid: &AngularGrid<T>) -> Result<Vec<T>> {
    let mut placed = Vec::with_capacity(angles.len());
    for &a in angles {
        let s = snap_to_grid(a, grid, &placed)?;
        placed.push(s);
    }
    Ok(placed)
}

/// `tr(R_k R_k') / (tr(R_k) tr(R_k'))`.
pub fn normalized_interference<T: Real>(r_k: &CMat<T>, r_other: &CMat<T>) -> Result<T> {
    if r_k.shape() != r_other.shape() || !r_k.is_square() {
        return Err(invalid("correlation matrices must be square and equal-sized"));
    }
    let (ta, tb) = (trace(r_k), trace(r_other));
    if !(ta > T::zero() && tb > T::zero()) {
        return Err(invalid("correlation matrices must have positive trace"));
    }
    Ok(trace_product(r_k, r_other) / (ta * tb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;
    use std::f64::consts::PI;

    #[test]
    fn inner_product_examples() {
        assert_eq!(steering_inner_product_magnitude(0.3, 0.3, 16, 0.5, 1.0), 16.0);
        let th: f64 = (2.0f64 / 16.0).asin();
        assert!(steering_inner_product_magnitude(th, 0.0, 16, 0.5, 1.0) < 1e-9 * 16.0);
        // brute force
        let (a, b) = (0.41f64, -1.1f64);
        let x = 0.5 * (a.sin() - b.sin());
        let s: Complex<f64> = (0..16)
            .map(|m| Complex::from_polar(1.0, 2.0 * PI * x * m as f64))
            .sum();
        assert!((steering_inner_product_magnitude(a, b, 16, 0.5, 1.0) - s.norm()).abs() < 1e-9 * s.norm());
    }

    #[test]
    fn grid_sizes() {
        let g = build_angle_grid(16, 0.5f64, 1.0).unwrap();
        assert_eq!(g.len(), 32);
        assert!(g.contains(0.0) && g.contains(PI / 2.0) && g.contains(-PI / 2.0) && g.contains(PI));
        let g = build_angle_grid(128, 0.5f64, 1.0).unwrap();
        assert_eq!(g.len(), 256);
        assert!((g.worst_gap() - 0.177).abs() < 1e-3);
        assert!(build_angle_grid(1, 0.5f64, 1.0).is_err());
        for p in &g.points {
            assert!((p.angle.sin() - g.sin_value(p)).abs() < 1e-12);
            assert!(p.angle > -PI && p.angle <= PI);
        }
    }

    #[test]
    fn validator_examples() {
        let v = validate_placement(&[0.0, PI], 0.5, 1.0);
        assert_eq!(v.len(), 1);
        let phi = (2.0f64 * 3.0 / 16.0).asin();
        let v = validate_placement(&[phi, PI - phi], 0.5, 1.0);
        assert_eq!(v[0].kind, ViolationKind::Mirror);
        let v = validate_placement(&[PI / 2.0, -PI / 2.0], 0.5, 1.0);
        assert_eq!(v[0].kind, ViolationKind::OppositeEndfire);
        let g = build_angle_grid(16, 0.5f64, 1.0).unwrap();
        let a = g.points.iter().filter(|p| p.angle > 0.0 && p.angle < PI / 2.0).map(|p| p.angle).collect::<Vec<_>>();
        assert!(validate_placement(&a[..2], 0.5, 1.0).is_empty());
        assert!(steering_inner_product_magnitude(a[0], a[1], 16, 0.5, 1.0) < 1e-9 * 16.0);
        assert!(spacing_warning(1.0f64, 1.0).is_some());
        assert!(spacing_warning(0.5f64, 1.0).is_none());
    }

    #[test]
    fn snapping_rules() {
        let g = build_angle_grid(16, 0.5f64, 1.0).unwrap();
        let p = g.points[20].angle;
        assert_eq!(snap_to_grid(p, &g, &[]).unwrap(), p);
        let (lo, hi) = (g.points[20].angle, g.points[21].angle);
        assert_eq!(snap_to_grid(0.5 * (lo + hi), &g, &[]).unwrap(), lo);
        // nearest grid angle mirrors an occupied one -> next nearest
        let th = (2.0f64 * 3.0 / 16.0).asin();
        let occupied = [PI - th];
        let s = snap_to_grid(th + 1e-3, &g, &occupied).unwrap();
        assert_ne!(s, th);
        let mut by_dist: Vec<f64> = g.angles();
        by_dist.sort_by(|a, b| circular_distance(*a, th + 1e-3).partial_cmp(&circular_distance(*b, th + 1e-3)).unwrap());
        assert_eq!(s, by_dist[1]);
    }

    #[test]
    fn interference_examples() {
        let i4 = CMat::<f64>::identity(4, 4);
        assert!((normalized_interference(&i4, &i4).unwrap() - 0.25).abs() < 1e-15);
        let mut a = CMat::<f64>::zeros(4, 4);
        let mut b = CMat::<f64>::zeros(4, 4);
        a[(0, 0)] = Complex::new(1.0, 0.0);
        a[(1, 1)] = Complex::new(2.0, 0.0);
        b[(2, 2)] = Complex::new(1.0, 0.0);
        b[(3, 3)] = Complex::new(1.0, 0.0);
        assert_eq!(normalized_interference(&a, &b).unwrap(), 0.0);
        assert!(normalized_interference(&a, &CMat::zeros(4, 4)).is_err());
    }
}
