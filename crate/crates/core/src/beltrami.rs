//! Infinitesimal edge pushes and their Beltrami differentials.
//!
//! Everything lives in the rotated chart where boundary edges are horizontal
//! or vertical.  A push moves the horizontal edge `[-a, a] x {0}` upward by
//! epsilon; the map is affine on each of the six collar regions R1..R6 and
//! the identity outside.  `nu_dot` is the epsilon-derivative of its Beltrami
//! coefficient, a piecewise formula defined almost everywhere.
//!
//! The corner cancellation pairs a collar region with its image under the
//! rotation by pi about the pushed edge's corner; with the edge collapsed
//! (a = 0) the four surviving quadrant regions cancel in rotation pairs,
//! and even local quadratic differentials pair to zero against the push.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BeltramiError {
    #[error("push amplitude epsilon = {0} must be smaller than the collar height b = {1}")]
    EpsTooLarge(f64, f64),
    #[error("sample {0} is within {1} of a region interface")]
    SampleTooCloseToInterface(Complex64, f64),
    #[error("quadrature failed to converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, BeltramiError>;

/// Collar geometry of a push: half-length of the pushed edge, vertical
/// extent, and horizontal collar width.
#[derive(Debug, Clone, Copy)]
pub struct PushParams {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
}

impl PushParams {
    pub fn new(a: f64, b: f64, delta: f64) -> Self {
        assert!(a >= 0.0 && b > 0.0 && delta > 0.0, "collar dimensions positive");
        PushParams { a, b, delta }
    }
}

/// The six collar regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    Outside,
}

/// Region membership (boundary points resolve to the lower-index region).
pub fn region(z: Complex64, p: &PushParams) -> Region {
    let (x, y) = (z.re, z.im);
    let (a, b, d) = (p.a, p.b, p.delta);
    if y >= 0.0 && y <= b {
        if x >= -a && x <= a {
            return Region::R1;
        }
        if x >= -a - d && x < -a {
            return Region::R3;
        }
        if x > a && x <= a + d {
            return Region::R4;
        }
    } else if y >= -b && y < 0.0 {
        if x >= -a && x <= a {
            return Region::R2;
        }
        if x >= -a - d && x < -a {
            return Region::R5;
        }
        if x > a && x <= a + d {
            return Region::R6;
        }
    }
    Region::Outside
}

/// The piecewise-affine push, exactly the six-case formula; identity
/// outside the collar.
pub fn push_map(point: (f64, f64), eps: f64, p: &PushParams) -> Result<(f64, f64)> {
    if eps >= p.b {
        return Err(BeltramiError::EpsTooLarge(eps, p.b));
    }
    let (x, y) = point;
    let (a, b, d) = (p.a, p.b, p.delta);
    let up = eps + (b - eps) / b * y; // R1 vertical profile
    let dn = eps + (b + eps) / b * y; // R2 vertical profile
    let out = match region(Complex64::new(x, y), p) {
        Region::R1 => (x, up),
        Region::R2 => (x, dn),
        Region::R3 => (x, y + (up - y) / d * (x + d + a)),
        Region::R4 => (x, y - (up - y) / d * (x - d - a)),
        Region::R5 => (x, y + (dn - y) / d * (x + d + a)),
        Region::R6 => (x, y - (dn - y) / d * (x - d - a)),
        Region::Outside => (x, y),
    };
    Ok(out)
}

/// Derivative at epsilon = 0 of the Beltrami coefficient of the push: the
/// seven-case formula.
pub fn nu_dot(z: Complex64, p: &PushParams) -> Complex64 {
    let (a, b, d) = (p.a, p.b, p.delta);
    let zb = z.conj();
    let ib = Complex64::new(0.0, b);
    match region(z, p) {
        Region::R1 => Complex64::new(1.0 / (2.0 * b), 0.0),
        Region::R2 => Complex64::new(-1.0 / (2.0 * b), 0.0),
        Region::R3 => (zb + d + a + ib) / (2.0 * b * d),
        Region::R4 => (-zb + d + a - ib) / (2.0 * b * d),
        Region::R5 => (-zb - d - a + ib) / (2.0 * b * d),
        Region::R6 => (zb - d - a - ib) / (2.0 * b * d),
        Region::Outside => Complex64::new(0.0, 0.0),
    }
}

/// Pullback of a Beltrami coefficient through a holomorphic map `f` with
/// derivative `df`: `nu(f(z)) conj(f'(z)) / f'(z)`.
pub fn pullback(
    nu: impl Fn(Complex64) -> Complex64,
    f: impl Fn(Complex64) -> Complex64,
    df: impl Fn(Complex64) -> Complex64,
    z: Complex64,
) -> Complex64 {
    let d = df(z);
    nu(f(z)) * d.conj() / d
}

/// Distance from a point to the nearest region interface (the interfaces
/// are segments bounded by the collar, not full lines).
fn interface_distance(z: Complex64, p: &PushParams) -> f64 {
    let (x, y) = (z.re, z.im);
    let half_w = p.a + p.delta;
    let verticals = [-half_w, -p.a, p.a, half_w];
    let horizontals = [-p.b, 0.0, p.b];
    let dv = verticals
        .iter()
        .map(|v| (x - v).hypot((y.abs() - p.b).max(0.0)))
        .fold(f64::MAX, f64::min);
    let dh = horizontals
        .iter()
        .map(|h| (y - h).hypot((x.abs() - half_w).max(0.0)))
        .fold(f64::MAX, f64::min);
    dv.min(dh)
}

/// Compares `nu_dot` with the finite-difference derivative
/// `d/d eps (f_eps - id)/eps` differentiated in `z bar` by central
/// differences; returns the sup error over the samples.
pub fn finite_difference_check(
    p: &PushParams,
    samples: &[Complex64],
    eps: f64,
    fd_step: f64,
) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for &z in samples {
        if interface_distance(z, p) < 10.0 * fd_step {
            return Err(BeltramiError::SampleTooCloseToInterface(z, 10.0 * fd_step));
        }
        // velocity field of the push at first order in eps
        let vel = |w: Complex64| -> Complex64 {
            let (px, py) = push_map((w.re, w.im), eps, p).expect("eps below b");
            (Complex64::new(px, py) - w) / eps
        };
        // d/d zbar = (d/dx + i d/dy) / 2
        let h = fd_step;
        let ddx = (vel(z + h) - vel(z - h)) / (2.0 * h);
        let ddy = (vel(z + Complex64::new(0.0, h)) - vel(z - Complex64::new(0.0, h))) / (2.0 * h);
        let fd = 0.5 * (ddx + Complex64::new(0.0, 1.0) * ddy);
        sup = sup.max((fd - nu_dot(z, p)).norm());
    }
    Ok(sup)
}

/// Residual of the corner cancellation: `nu_dot(2 P - z) + nu_dot(z)` with
/// `P = (-a, 0)` the corner of the pushed edge.  With `a = 0` this is the
/// rotation `z -> -z` pairing R3 with R6 and R5 with R4, and the residual
/// vanishes identically; with `a != 0` the rotation no longer matches the
/// reflected development and the residual is nonzero.
pub fn cancellation_check(p: &PushParams, samples: &[Complex64]) -> f64 {
    let corner = Complex64::new(-p.a, 0.0);
    samples
        .iter()
        .map(|&z| (nu_dot(2.0 * corner - z, p) + nu_dot(z, p)).norm())
        .fold(0.0, f64::max)
}

/// Even local quadratic differential `(c0 + c2 w^2) dw^2` in the
/// hyperelliptic corner chart `w = z^{1/3}`, with an optional odd test
/// coefficient (a `z^{-1}` term, i.e. `9 c_odd w (dw)^2`) used as a
/// negative control.
#[derive(Debug, Clone, Copy)]
pub struct LocalQuadraticDifferential {
    pub c0: Complex64,
    pub c2: Complex64,
    pub odd: Complex64,
}

impl LocalQuadraticDifferential {
    pub fn even(c0: Complex64, c2: Complex64) -> Self {
        LocalQuadraticDifferential {
            c0,
            c2,
            odd: Complex64::new(0.0, 0.0),
        }
    }

    /// Coefficient in the w chart: `c0 + c2 w^2 (+ 9 odd w)`.
    fn coeff_w(&self, w: Complex64) -> Complex64 {
        self.c0 + self.c2 * w * w + 9.0 * self.odd * w
    }
}

/// Pairing `int Phi nu_dot dA` over the four quadrant collar regions of the
/// corner (a = 0), the base regions R3 and R5 plus their rotation images,
/// restricted to the disk of the given radius.
///
/// The integrand is evaluated in the z chart as
/// `phi_w(w(z)) / (9 w(z)^4) nu_dot(z)` with the sheet of `w = z^{1/3}`
/// continued so that the rotation `z -> -z` corresponds to `w -> -w`.  The
/// `z^{-4/3}` singularity is removed by the radial substitution
/// `r = t^{3/2}`; each region is integrated independently in polar form so
/// the cancellation is a genuine quadrature statement.
pub fn pair_with_quadratic_differential(
    q: &LocalQuadraticDifferential,
    p: &PushParams,
    radius: f64,
    resolution: usize,
) -> Complex64 {
    assert!(p.a == 0.0, "corner pairing uses the collapsed-edge model");
    // Sheet offsets make the rotation z -> -z act as w -> -w: for z in R6,
    // w = -w(R3 partner) has argument arg(z)/3 + 4 pi/3, and for R4 the
    // offset against R5 is 2 pi/3.
    let quadrants = [
        (std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 0.0), // R3
        (-std::f64::consts::PI, -std::f64::consts::FRAC_PI_2, 0.0), // R5
        (
            -std::f64::consts::FRAC_PI_2,
            0.0,
            4.0 * std::f64::consts::FRAC_PI_3,
        ), // R6 = -R3
        (
            0.0,
            std::f64::consts::FRAC_PI_2,
            2.0 * std::f64::consts::FRAC_PI_3,
        ), // R4 = -R5
    ];
    let n_theta = resolution;
    let n_rad = resolution;
    let mut total = Complex64::new(0.0, 0.0);
    for &(th_lo, th_hi, w_offset) in &quadrants {
        let mut region_sum = Complex64::new(0.0, 0.0);
        for it in 0..n_theta {
            // midpoint rule in angle
            let th = th_lo + (it as f64 + 0.5) * (th_hi - th_lo) / n_theta as f64;
            let (s, c) = th.sin_cos();
            // radial extent: stay inside both the collar box and the disk
            let rx = if c.abs() < 1e-300 { f64::MAX } else { p.delta / c.abs() };
            let ry = if s.abs() < 1e-300 { f64::MAX } else { p.b / s.abs() };
            let rmax = radius.min(rx).min(ry);
            // r = t^{3/2} turns r^{-1/3} dr into (3/2) dt on t in (0, rmax^{2/3})
            let tmax = rmax.powf(2.0 / 3.0);
            for ir in 0..n_rad {
                let t = (ir as f64 + 0.5) * tmax / n_rad as f64;
                let r = t.powf(1.5);
                let z = Complex64::from_polar(r, th);
                let w = Complex64::from_polar(r.powf(1.0 / 3.0), th / 3.0 + w_offset);
                let w4 = w * w * w * w;
                let phi_z = q.coeff_w(w) / (9.0 * w4);
                // integrand * r dr dtheta, with r^{-1/3} absorbed: the
                // remaining density is phi_z * nu_dot * r^{4/3} * (3/2)
                let dens = phi_z * nu_dot(z, p) * r.powf(4.0 / 3.0) * 1.5;
                region_sum += dens * (tmax / n_rad as f64) * ((th_hi - th_lo) / n_theta as f64);
            }
        }
        total += region_sum;
    }
    total
}
