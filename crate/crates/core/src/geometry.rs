//! Array responses, path loss, spatial correlation models, and random
//! channel synthesis for the BS-RIS, RIS-UE, and BS-UE links.
//!
//! Conventions: the BS is a uniform linear array whose boresight is the +x
//! axis, azimuths are measured counterclockwise from it, and a standard
//! complex Gaussian has variance 1/2 per real component.

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{psd_sqrt_factor, Split};
use crate::scalar::{cis, lit, CMat, CVec, RMat, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct ArrayGeometry<T: Real> {
    /// BS antennas `M`.
    pub bs_antennas: usize,
    /// BS antenna spacing `d_B` in meters.
    pub bs_spacing: T,
    /// RIS rows `N_v`.
    pub ris_rows: usize,
    /// RIS columns `N_h`.
    pub ris_cols: usize,
    /// RIS element spacing `d_R` in meters.
    pub ris_spacing: T,
    pub wavelength: T,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(
        bs_antennas: usize,
        bs_spacing: T,
        ris_rows: usize,
        ris_cols: usize,
        ris_spacing: T,
        wavelength: T,
    ) -> Result<Self> {
        if bs_antennas == 0 || ris_rows == 0 || ris_cols == 0 {
            return Err(invalid("array dimensions must be positive"));
        }
        if !(bs_spacing > T::zero() && ris_spacing > T::zero() && wavelength > T::zero()) {
            return Err(invalid("spacings and wavelength must be positive"));
        }
        Ok(Self {
            bs_antennas,
            bs_spacing,
            ris_rows,
            ris_cols,
            ris_spacing,
            wavelength,
        })
    }

    /// `N = N_h * N_v`.
    pub fn ris_elements(&self) -> usize {
        self.ris_rows * self.ris_cols
    }
}

/// Geometry of one BS-RIS link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RisLink<T: Real> {
    pub distance: T,
    /// Azimuth AoA at the BS, which is also the RIS angular position.
    pub bs_aoa: T,
    pub aod_azimuth: T,
    pub aod_elevation: T,
}

/// Geometry of one UE.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UeLink<T: Real> {
    pub bs_distance: T,
    pub bs_aoa: T,
    /// Distance to the serving RIS, if any.
    pub ris_distance: Option<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadingParams<T: Real> {
    /// Linear path gain at 1 m.
    pub ref_loss: T,
    pub kappa_br: T,
    pub kappa_ru: T,
    pub kappa_bu: T,
    /// Linear Rician factor of the BS-RIS links.
    pub rician_factor: T,
    /// Adjacent-antenna correlation of the exponential model.
    pub correlation: T,
}

impl<T: Real> FadingParams<T> {
    pub fn validate(&self) -> Result<()> {
        let two = lit::<T>(2.0);
        if !(self.ref_loss > T::zero()) {
            return Err(invalid("reference loss must be positive"));
        }
        if self.kappa_br < two || self.kappa_ru < two || self.kappa_bu < two {
            return Err(invalid("path-loss exponents must be at least 2"));
        }
        if self.rician_factor < T::zero() {
            return Err(invalid("Rician factor must be non-negative"));
        }
        if self.correlation < T::zero() || self.correlation > T::one() {
            return Err(invalid("correlation factor must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// `[1, e^{-i pi x}, ..., e^{-i pi (F-1) x}]`.
pub fn steering_vector<T: Real>(phase_arg: T, length: usize) -> Result<CVec<T>> {
    if length == 0 {
        return Err(invalid("steering vector length must be at least 1"));
    }
    let pi = T::pi();
    Ok(CVec::from_fn(length, |n, _| {
        cis(-pi * lit::<T>(n as f64) * phase_arg)
    }))
}

/// BS ULA response `a((2 d_B / lambda) sin(aoa), M)`.
pub fn bs_array_response<T: Real>(aoa: T, geom: &ArrayGeometry<T>) -> CVec<T> {
    let arg = lit::<T>(2.0) * geom.bs_spacing / geom.wavelength * aoa.sin();
    steering_vector(arg, geom.bs_antennas).expect("M >= 1 by construction")
}

/// RIS UPA response: horizontal factor (length `N_h`) Kronecker vertical
/// factor (length `N_v`).
pub fn ris_array_response<T: Real>(
    aod_azimuth: T,
    aod_elevation: T,
    geom: &ArrayGeometry<T>,
) -> CVec<T> {
    let scale = lit::<T>(2.0) * geom.ris_spacing / geom.wavelength;
    let h = steering_vector(scale * aod_azimuth.sin() * aod_elevation.cos(), geom.ris_cols)
        .expect("N_h >= 1");
    let v = steering_vector(scale * aod_elevation.sin(), geom.ris_rows).expect("N_v >= 1");
    h.kronecker(&v)
}

/// `beta_0 * d^(-exponent)`.
pub fn path_loss<T: Real>(d: T, exponent: T, ref_loss: T) -> Result<T> {
    if !(d > T::zero()) {
        return Err(invalid(format!("distance must be positive, got {d}")));
    }
    Ok(ref_loss * d.powf(-exponent))
}

/// Exponential correlation model:
/// `[R]_{m,n} = beta * zeta^|n-m| * e^{i (n-m) theta}`.
pub fn bs_ue_correlation<T: Real>(beta: T, zeta: T, aoa: T, m: usize) -> Result<CMat<T>> {
    if zeta < T::zero() || zeta > T::one() {
        return Err(invalid(format!("correlation factor {zeta} outside [0, 1]")));
    }
    Ok(CMat::from_fn(m, m, |row, col| {
        let diff = col as i64 - row as i64;
        let mag = beta * zeta.powi(diff.unsigned_abs() as i32);
        cis(lit::<T>(diff as f64) * aoa) * mag
    }))
}

/// Real Toeplitz part `zeta^|n-m|` of the exponential model; the full
/// matrix is `beta * D T D^H` with `D = diag(e^{-i n theta})`.
pub fn exponential_toeplitz<T: Real>(zeta: T, m: usize) -> RMat<T> {
    RMat::from_fn(m, m, |row, col| {
        zeta.powi((col as i64 - row as i64).unsigned_abs() as i32)
    })
}

/// `sin(pi x) / (pi x)`, with a series expansion near zero.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < lit(1e-6) {
        let px = T::pi() * x;
        T::one() - px * px / lit(6.0)
    } else {
        let px = T::pi() * x;
        px.sin() / px
    }
}

/// Isotropic-scattering RIS kernel `[R]_{m,n} = sinc(2 ||u_m - u_n|| / lambda)`
/// with element `l` (0-based) at `[0, (l mod N_v) d_R, floor(l / N_v) d_R]`.
pub fn ris_correlation_kernel<T: Real>(geom: &ArrayGeometry<T>) -> RMat<T> {
    let n = geom.ris_elements();
    let nv = geom.ris_rows;
    let coords = |l: usize| (lit::<T>((l % nv) as f64), lit::<T>((l / nv) as f64));
    let two = lit::<T>(2.0);
    RMat::from_fn(n, n, |a, b| {
        if a == b {
            return T::one();
        }
        let (ya, za) = coords(a);
        let (yb, zb) = coords(b);
        let dist = ((ya - yb) * (ya - yb) + (za - zb) * (za - zb)).sqrt() * geom.ris_spacing;
        sinc(two * dist / geom.wavelength)
    })
}

/// Standard circularly symmetric complex Gaussian vector `CN(0, I)`.
pub fn complex_gaussian_vec<T: Real, R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVec<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(lit(re * s), lit(im * s))
    })
}

pub fn complex_gaussian_mat<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> CMat<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(lit(re * s), lit(im * s))
    })
}

/// Deterministic LoS component `a_B(theta_b) a_R(theta_r, phi_r)^H`.
pub fn bs_ris_los<T: Real>(link: &RisLink<T>, geom: &ArrayGeometry<T>) -> CMat<T> {
    let ab = bs_array_response(link.bs_aoa, geom);
    let ar = ris_array_response(link.aod_azimuth, link.aod_elevation, geom);
    &ab * ar.adjoint()
}

/// Rician BS-RIS channel built from a given NLoS draw.
pub fn bs_ris_channel_from<T: Real>(
    link: &RisLink<T>,
    fading: &FadingParams<T>,
    geom: &ArrayGeometry<T>,
    nlos: &CMat<T>,
) -> Result<CMat<T>> {
    let beta = path_loss(link.distance, fading.kappa_br, fading.ref_loss)?;
    let alpha = fading.rician_factor;
    let los_w = (beta * alpha / (T::one() + alpha)).sqrt();
    let nlos_w = (beta / (T::one() + alpha)).sqrt();
    let los = bs_ris_los(link, geom);
    Ok(los * Complex::new(los_w, T::zero()) + nlos * Complex::new(nlos_w, T::zero()))
}

/// Samples `H_r = sqrt(beta_br) (sqrt(a/(1+a)) H_LoS + sqrt(1/(1+a)) H_NLoS)`.
pub fn sample_bs_ris_channel<T: Real, R: Rng + ?Sized>(
    link: &RisLink<T>,
    fading: &FadingParams<T>,
    geom: &ArrayGeometry<T>,
    rng: &mut R,
) -> Result<CMat<T>> {
    let nlos = complex_gaussian_mat(geom.bs_antennas, geom.ris_elements(), rng);
    bs_ris_channel_from(link, fading, geom, &nlos)
}

/// Precomputed square-root factor for repeated correlated draws.
#[derive(Clone, Debug)]
pub struct CorrelatedSampler<T: Real> {
    factor: CMat<T>,
}

impl<T: Real> CorrelatedSampler<T> {
    pub fn new(covariance: &CMat<T>) -> Result<Self> {
        Ok(Self {
            factor: psd_sqrt_factor(covariance)?,
        })
    }

    pub fn from_factor(factor: CMat<T>) -> Self {
        Self { factor }
    }

    pub fn factor(&self) -> &CMat<T> {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// Colors a white `CN(0, I)` vector.
    pub fn color(&self, white: &CVec<T>) -> CVec<T> {
        &self.factor * white
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec<T> {
        let z = complex_gaussian_vec(self.factor.ncols(), rng);
        self.color(&z)
    }
}

/// One `CN(0, covariance)` draw via an eigendecomposition square root.
pub fn sample_correlated_vector<T: Real, R: Rng + ?Sized>(
    covariance: &CMat<T>,
    rng: &mut R,
) -> Result<CVec<T>> {
    Ok(CorrelatedSampler::new(covariance)?.sample(rng))
}

/// Sampler for exponential-model direct channels that shares one real
/// Toeplitz square root across angles: `h = sqrt(beta) D T^{1/2} z` with
/// `D = diag(e^{-i n theta})`.
#[derive(Clone, Debug)]
pub struct ExponentialSampler<T: Real> {
    toeplitz: RMat<T>,
    toeplitz_sqrt: RMat<T>,
}

impl<T: Real> ExponentialSampler<T> {
    pub fn new(zeta: T, m: usize) -> Result<Self> {
        if zeta < T::zero() || zeta > T::one() {
            return Err(invalid(format!("correlation factor {zeta} outside [0, 1]")));
        }
        let toeplitz = exponential_toeplitz(zeta, m);
        let toeplitz_sqrt = crate::linalg::psd_sqrt_factor_real(&toeplitz)?;
        Ok(Self {
            toeplitz,
            toeplitz_sqrt,
        })
    }

    pub fn dim(&self) -> usize {
        self.toeplitz.nrows()
    }

    /// Same matrix as [`bs_ue_correlation`].
    pub fn covariance(&self, beta: T, aoa: T) -> CMat<T> {
        let m = self.dim();
        CMat::from_fn(m, m, |r, c| {
            let diff = lit::<T>(c as f64 - r as f64);
            cis(diff * aoa) * (beta * self.toeplitz[(r, c)])
        })
    }

    pub fn color(&self, beta: T, aoa: T, white: &CVec<T>) -> CVec<T> {
        let re = white.map(|z| z.re);
        let im = white.map(|z| z.im);
        let tr = &self.toeplitz_sqrt * re;
        let ti = &self.toeplitz_sqrt * im;
        let s = beta.sqrt();
        CVec::from_fn(self.dim(), |n, _| {
            cis(-lit::<T>(n as f64) * aoa) * Complex::new(tr[n], ti[n]) * s
        })
    }
}

/// Square-root factor of a real PSD kernel as a split complex-ready matrix.
pub fn kernel_factor<T: Real>(kernel: &RMat<T>) -> Result<RMat<T>> {
    crate::linalg::psd_sqrt_factor_real(kernel)
}

/// `H diag(phi) F`, the colored BS-RIS cascade for a real kernel factor `F`.
pub fn cascade_factor<T: Real>(h_r: &CMat<T>, phases: &CVec<T>, factor: &RMat<T>) -> Split<T> {
    let mut g = h_r.clone();
    for (j, p) in phases.iter().enumerate() {
        for z in g.column_mut(j).iter_mut() {
            *z *= *p;
        }
    }
    Split::of(&g).mul_real(factor)
}
