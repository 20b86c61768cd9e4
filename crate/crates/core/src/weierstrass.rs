//! Weierstrass representation: the immersion integral
//! `Re int (1/2 (g - 1/g), i/2 (g + 1/g), 1) dh`, the induced metric, period
//! vectors over cycles, the horizontal conjugacy test, and flux vectors.
//!
//! `dh` is represented by its coefficient `h'(zeta)` against `d zeta` in a
//! fixed global chart; single-chart domains (half-plane strip or punctured
//! plane) cover every surface in scope.

use crate::numerics::{self, NumericsError};
use num_complex::Complex64;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeierstrassError {
    #[error("integrand singular on the path: {0}")]
    SingularOnPath(Complex64),
    #[error("metric evaluated at a singular point {0}")]
    SingularPoint(Complex64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, WeierstrassError>;

type CFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Description of the parameter region a data set lives on.
#[derive(Debug, Clone)]
pub enum Domain {
    /// Upper half-plane with period translation `zeta -> zeta + 1`.
    HalfPlaneStrip,
    /// Punctured plane (classical finite-total-curvature charts).
    PuncturedPlane,
}

/// Evaluable Weierstrass data: Gauss map `g` and height differential
/// coefficient `h'` on a single chart.
#[derive(Clone)]
pub struct WeierstrassData {
    g: CFn,
    dh: CFn,
    pub domain: Domain,
}

impl WeierstrassData {
    pub fn new(
        g: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        dh: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        domain: Domain,
    ) -> Self {
        WeierstrassData {
            g: Arc::new(g),
            dh: Arc::new(dh),
            domain,
        }
    }

    /// Catenoid data `g = zeta`, `dh = d zeta / zeta`.
    pub fn catenoid() -> Self {
        WeierstrassData::new(|z| z, |z| 1.0 / z, Domain::PuncturedPlane)
    }

    pub fn gauss_map(&self, z: Complex64) -> Complex64 {
        (self.g)(z)
    }

    pub fn dh_coefficient(&self, z: Complex64) -> Complex64 {
        (self.dh)(z)
    }

    /// The three Weierstrass integrand components at a point.
    pub fn integrands(&self, z: Complex64) -> [Complex64; 3] {
        let g = (self.g)(z);
        let dh = (self.dh)(z);
        let ginv = 1.0 / g;
        [
            0.5 * (g - ginv) * dh,
            Complex64::new(0.0, 0.5) * (g + ginv) * dh,
            dh,
        ]
    }

    /// Unit normal via stereographic projection of the Gauss map.
    pub fn unit_normal(&self, z: Complex64) -> [f64; 3] {
        let g = (self.g)(z);
        let n2 = g.norm_sqr();
        let d = n2 + 1.0;
        [2.0 * g.re / d, 2.0 * g.im / d, (n2 - 1.0) / d]
    }
}

/// `Re int` of the three forms along a polyline; the last point is the
/// target.
pub fn immersion_point(data: &WeierstrassData, path: &[Complex64], tol: f64) -> Result<[f64; 3]> {
    let f = |z: Complex64| data.integrands(z);
    let p = numerics::contour_integral3(&f, path, tol).map_err(singular)?;
    Ok([p[0].re, p[1].re, p[2].re])
}

/// Conformal factor of the induced metric: `1/2 (|g| + 1/|g|) |h'|`.
pub fn metric_factor(data: &WeierstrassData, z: Complex64) -> Result<f64> {
    let g = data.gauss_map(z);
    let dh = data.dh_coefficient(z);
    let gn = g.norm();
    if !(gn.is_finite() && dh.is_finite()) || gn == 0.0 {
        return Err(WeierstrassError::SingularPoint(z));
    }
    Ok(0.5 * (gn + 1.0 / gn) * dh.norm())
}

/// Periods of the three forms along a cycle, with the closedness flag.
#[derive(Debug, Clone)]
pub struct PeriodVector {
    pub periods: [Complex64; 3],
    pub tol: f64,
}

impl PeriodVector {
    /// A cycle closes on the surface iff all three real parts vanish.
    pub fn is_closed(&self) -> bool {
        self.periods.iter().all(|p| p.re.abs() <= self.tol)
    }

    pub fn max_real_part(&self) -> f64 {
        self.periods.iter().fold(0.0, |m, p| m.max(p.re.abs()))
    }
}

/// Contour integrals of the three forms over a closed polyline.
pub fn period_vector(data: &WeierstrassData, cycle: &[Complex64], tol: f64) -> Result<PeriodVector> {
    let f = |z: Complex64| data.integrands(z);
    let periods = numerics::contour_integral3(&f, cycle, tol).map_err(singular)?;
    Ok(PeriodVector { periods, tol })
}

/// True iff `int g dh` equals the conjugate of `int (1/g) dh` over the
/// cycle, within `tol`.
pub fn check_horizontal_conjugacy(
    data: &WeierstrassData,
    cycle: &[Complex64],
    tol: f64,
) -> Result<bool> {
    Ok(horizontal_conjugacy_defect(data, cycle, tol)? <= tol)
}

/// `|int g dh - conj(int (1/g) dh)|` over the cycle.
pub fn horizontal_conjugacy_defect(
    data: &WeierstrassData,
    cycle: &[Complex64],
    tol: f64,
) -> Result<f64> {
    let fg = |z: Complex64| data.gauss_map(z) * data.dh_coefficient(z);
    let fi = |z: Complex64| data.dh_coefficient(z) / data.gauss_map(z);
    let pg = numerics::contour_integral(&fg, cycle, tol).map_err(singular)?;
    let pi_ = numerics::contour_integral(&fi, cycle, tol).map_err(singular)?;
    Ok((pg - pi_.conj()).norm())
}

/// Flux of `(grad x_1, grad x_2)` across a cycle, with a homology label.
#[derive(Debug, Clone)]
pub struct FluxVector {
    pub flux: [f64; 2],
    pub label: String,
}

impl FluxVector {
    pub fn magnitude(&self) -> f64 {
        self.flux[0].hypot(self.flux[1])
    }
}

/// Flux across a cycle: the conjugate periods `Im int phi_i` of the two
/// horizontal forms.
pub fn flux_vector(
    data: &WeierstrassData,
    cycle: &[Complex64],
    tol: f64,
    label: &str,
) -> Result<FluxVector> {
    let p = period_vector(data, cycle, tol)?;
    Ok(FluxVector {
        flux: [p.periods[0].im, p.periods[1].im],
        label: label.to_string(),
    })
}

fn singular(e: NumericsError) -> WeierstrassError {
    match e {
        NumericsError::SingularOnPath(z) => WeierstrassError::SingularOnPath(z),
        other => WeierstrassError::Numerics(other),
    }
}
