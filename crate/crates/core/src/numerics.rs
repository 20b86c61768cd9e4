//! Shared numerical kernels: quadrature for integrands with algebraic
//! endpoint singularities, symmetric lattice sums, and adaptive contour
//! integration over polylines.
//!
//! The edge quadrature removes endpoint factors `t^p (1-t)^q` with the
//! substitution `t = sin^2 u`, which turns every exponent in `{-1/2, 0, 1/2}`
//! into a smooth integrand; composite Gauss-Legendre panels then converge
//! geometrically.  Exponents elsewhere in `(-1, 1)` are still integrable and
//! are handled by panel refinement.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;
use thiserror::Error;

/// Default relative tolerance for the adaptive rules.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Truncation order of a lattice sum or product: a finite symmetric window
/// or the resummed closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Finite(u32),
    Infinite,
}

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("endpoint exponent {0} is not integrable (must be > -1)")]
    NonIntegrable(f64),
    #[error("adaptive refinement exhausted its budget (last error {0:.3e})")]
    NoConvergence(f64),
    #[error("integrand evaluated non-finite on the path at {0}")]
    SingularOnPath(Complex64),
    #[error("lattice sum diverges: p = 1 at integer offset")]
    Divergent,
    #[error("closed-form lattice sum only available for p in {{1, 2}}, got {0}")]
    UnsupportedPower(u32),
    #[error("path needs at least two points")]
    ShortPath,
    #[error("endpoints must be distinct")]
    DegenerateSegment,
}

pub type Result<T> = std::result::Result<T, NumericsError>;

// ---------------------------------------------------------------------------
// Gauss-Legendre panels
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        pairs.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Legendre P_n and its derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl32() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(32))
}

fn gl16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

// ---------------------------------------------------------------------------
// Edge integrals with endpoint singularities
// ---------------------------------------------------------------------------

/// Integrand on a straight edge: endpoint factors `t^p (1-t)^q` in the
/// affine parameter, times a factor that is smooth on the open edge.
pub struct EdgeIntegrandSpec<'a> {
    /// Exponents (p, q) of the distance-to-endpoint factors, each in (-1, 1).
    pub endpoint_exponents: (f64, f64),
    /// Smooth complex factor, evaluated at points of the open segment.
    pub smooth_factor: &'a dyn Fn(Complex64) -> Complex64,
}

/// Integral of `t^p (1-t)^q f(z(t)) dz` along the segment from `a` to `b`,
/// where `z(t) = a + t (b - a)`.
///
/// `t = sin^2 u` maps the integrand to `2 sin^{2p+1} u cos^{2q+1} u f`,
/// smooth for the exponents that occur in the developing-map edges.
pub fn edge_integral(
    spec: &EdgeIntegrandSpec,
    endpoints: (Complex64, Complex64),
    tol: f64,
) -> Result<Complex64> {
    let (p, q) = spec.endpoint_exponents;
    if p <= -1.0 {
        return Err(NumericsError::NonIntegrable(p));
    }
    if q <= -1.0 {
        return Err(NumericsError::NonIntegrable(q));
    }
    let (a, b) = endpoints;
    let dir = b - a;
    if dir.norm() == 0.0 {
        return Err(NumericsError::DegenerateSegment);
    }
    let g = |u: f64| -> Complex64 {
        let (s, c) = u.sin_cos();
        let t = s * s;
        let z = a + dir * t;
        let w = 2.0 * s.powf(2.0 * p + 1.0) * c.powf(2.0 * q + 1.0);
        w * (spec.smooth_factor)(z)
    };
    let val = adaptive_panels(&g, 0.0, FRAC_PI_2, tol, 40)?;
    Ok(dir * val)
}

/// Composite Gauss-Legendre with interval bisection.  A panel is accepted
/// when its 16- and 32-point values agree to the requested tolerance
/// (relative to the running magnitude of the whole integral).
fn adaptive_panels(
    g: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    tol: f64,
    max_depth: u32,
) -> Result<Complex64> {
    fn panel(g: &dyn Fn(f64) -> Complex64, lo: f64, hi: f64, rule: &[(f64, f64)]) -> Complex64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(x, w) in rule {
            acc += w * g(mid + half * x);
        }
        acc * half
    }
    struct Item {
        lo: f64,
        hi: f64,
        coarse: Complex64,
        depth: u32,
    }
    let mut stack = vec![Item {
        lo,
        hi,
        coarse: panel(g, lo, hi, gl16()),
        depth: 0,
    }];
    let mut total = Complex64::new(0.0, 0.0);
    let scale0 = stack[0].coarse.norm().max(1e-300);
    let mut worst: f64 = 0.0;
    while let Some(it) = stack.pop() {
        let fine = panel(g, it.lo, it.hi, gl32());
        if !fine.is_finite() {
            return Err(NumericsError::SingularOnPath(Complex64::new(
                0.5 * (it.lo + it.hi),
                0.0,
            )));
        }
        let err = (fine - it.coarse).norm();
        if err <= tol * scale0.max(fine.norm()) || it.depth >= max_depth {
            if it.depth >= max_depth && err > tol * scale0.max(fine.norm()) {
                worst = worst.max(err);
            }
            total += fine;
        } else {
            let mid = 0.5 * (it.lo + it.hi);
            stack.push(Item {
                lo: it.lo,
                hi: mid,
                coarse: panel(g, it.lo, mid, gl16()),
                depth: it.depth + 1,
            });
            stack.push(Item {
                lo: mid,
                hi: it.hi,
                coarse: panel(g, mid, it.hi, gl16()),
                depth: it.depth + 1,
            });
        }
    }
    if worst > 0.0 {
        return Err(NumericsError::NoConvergence(worst));
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Lattice sums
// ---------------------------------------------------------------------------

/// Symmetric lattice sum `sum_k (x - k)^{-p}` over the window `|k| <= M`,
/// or its closed form at `M = Infinite`.
#[derive(Debug, Clone, Copy)]
pub struct LatticeSumSpec {
    /// Offset x; for p = 1 a non-integer unless the self term is excluded.
    pub offset: f64,
    /// Power p >= 1.
    pub power: u32,
    pub truncation: Truncation,
}

fn is_integer(x: f64) -> bool {
    x == x.round()
}

/// Evaluates a [`LatticeSumSpec`].
///
/// At integer offsets the term with `x - k = 0` is excluded (the self term);
/// for `p = 1` an integer offset is rejected as divergent, matching the
/// principal-value convention under which the excluded-self sum vanishes
/// identically and the included one has no value.
pub fn lattice_sum(spec: &LatticeSumSpec) -> Result<f64> {
    let x = spec.offset;
    let p = spec.power;
    if p == 0 {
        return Err(NumericsError::UnsupportedPower(0));
    }
    if p == 1 && is_integer(x) {
        return Err(NumericsError::Divergent);
    }
    match spec.truncation {
        Truncation::Finite(m) => {
            let m = m as i64;
            if is_integer(x) {
                // Self-excluded even sum: pair +k with -k.
                let xi = x.round() as i64;
                let mut acc = 0.0;
                for k in 1..=m {
                    let lo = x - (xi - k) as f64;
                    let hi = x - (xi + k) as f64;
                    acc += lo.powi(-(p as i32)) + hi.powi(-(p as i32));
                }
                Ok(acc)
            } else {
                let mut acc = x.powi(-(p as i32));
                for k in 1..=m {
                    acc += (x - k as f64).powi(-(p as i32)) + (x + k as f64).powi(-(p as i32));
                }
                Ok(acc)
            }
        }
        Truncation::Infinite => match p {
            1 => Ok(PI / (PI * x).tan()),
            2 => {
                if is_integer(x) {
                    Ok(PI * PI / 3.0)
                } else {
                    Ok((PI / (PI * x).sin()).powi(2))
                }
            }
            other => Err(NumericsError::UnsupportedPower(other)),
        },
    }
}

// ---------------------------------------------------------------------------
// Contour integration over polylines
// ---------------------------------------------------------------------------

/// Adaptive integral of `f` along the polyline `path`.
pub fn contour_integral(
    f: &dyn Fn(Complex64) -> Complex64,
    path: &[Complex64],
    tol: f64,
) -> Result<Complex64> {
    if path.len() < 2 {
        return Err(NumericsError::ShortPath);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for seg in path.windows(2) {
        total += segment_integral(f, seg[0], seg[1], tol)?;
    }
    Ok(total)
}

fn segment_integral(
    f: &dyn Fn(Complex64) -> Complex64,
    a: Complex64,
    b: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let dir = b - a;
    if dir.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let g = |t: f64| -> Complex64 {
        let v = f(a + dir * t);
        if v.is_finite() {
            v
        } else {
            // Poison value; detected by the panel loop.
            Complex64::new(f64::NAN, f64::NAN)
        }
    };
    let val = adaptive_panels(&g, 0.0, 1.0, tol, 40).map_err(|e| match e {
        NumericsError::SingularOnPath(t) => NumericsError::SingularOnPath(a + dir * t.re),
        other => other,
    })?;
    Ok(dir * val)
}

/// Three contour integrals sharing one traversal; used for period vectors.
pub fn contour_integral3(
    f: &dyn Fn(Complex64) -> [Complex64; 3],
    path: &[Complex64],
    tol: f64,
) -> Result<[Complex64; 3]> {
    if path.len() < 2 {
        return Err(NumericsError::ShortPath);
    }
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        let fi = |z: Complex64| f(z)[i];
        out[i] = contour_integral(&fi, path, tol)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const C0: Complex64 = Complex64::new(0.0, 0.0);
    const C1: Complex64 = Complex64::new(1.0, 0.0);

    fn one(_: Complex64) -> Complex64 {
        C1
    }

    /// Brute-force oracle: adaptive Simpson on the sin^2-substituted
    /// integrand, independent of the Gauss-Legendre path above.
    fn simpson_oracle(p: f64, q: f64) -> f64 {
        fn g(u: f64, p: f64, q: f64) -> f64 {
            let (s, c) = u.sin_cos();
            2.0 * s.powf(2.0 * p + 1.0) * c.powf(2.0 * q + 1.0)
        }
        fn simpson(p: f64, q: f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let h = b - a;
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = g(lm, p, q);
            let frm = g(rm, p, q);
            let left = h / 12.0 * (fa + 4.0 * flm + fm);
            let right = h / 12.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() < 1e-13 {
                left + right
            } else {
                simpson(p, q, a, m, fa, flm, fm, depth - 1)
                    + simpson(p, q, m, b, fm, frm, fb, depth - 1)
            }
        }
        let (a, b) = (0.0, FRAC_PI_2);
        simpson(p, q, a, b, g(a, p, q), g(0.5 * (a + b), p, q), g(b, p, q), 30)
    }

    #[test]
    fn edge_integral_half_exponents() {
        // Oracle: adaptive Simpson after t = sin^2 u gives pi/2 for (1/2, -1/2).
        let oracle = simpson_oracle(0.5, -0.5);
        assert!((oracle - FRAC_PI_2).abs() < 1e-10, "oracle = {oracle}");
        let spec = EdgeIntegrandSpec {
            endpoint_exponents: (0.5, -0.5),
            smooth_factor: &one,
        };
        let v = edge_integral(&spec, (C0, C1), 1e-12).unwrap();
        assert!((v.re - FRAC_PI_2).abs() < 1e-10);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn edge_integral_identity() {
        let spec = EdgeIntegrandSpec {
            endpoint_exponents: (0.0, 0.0),
            smooth_factor: &one,
        };
        let v = edge_integral(&spec, (C0, C1), 1e-12).unwrap();
        assert!((v.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_integral_swapped_exponents() {
        // (-1/2, 1/2) agrees with (1/2, -1/2) by the substitution t -> 1-t.
        let spec = EdgeIntegrandSpec {
            endpoint_exponents: (-0.5, 0.5),
            smooth_factor: &one,
        };
        let v = edge_integral(&spec, (C0, C1), 1e-12).unwrap();
        assert!((v.re - FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn edge_integral_rejects_nonintegrable() {
        let spec = EdgeIntegrandSpec {
            endpoint_exponents: (-1.0, 0.0),
            smooth_factor: &one,
        };
        assert!(matches!(
            edge_integral(&spec, (C0, C1), 1e-10),
            Err(NumericsError::NonIntegrable(_))
        ));
    }

    #[test]
    fn edge_integral_reversal_invariance() {
        // Reversing the endpoints and swapping the exponent pair flips the
        // orientation sign only.  Random polynomial smooth factors.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = rng.gen_range(-0.5..0.75);
            let q = rng.gen_range(-0.5..0.75);
            let (c0, c1, c2) = (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let f = move |z: Complex64| {
                Complex64::new(c0, 0.0) + z * c1 + z * z * c2 + Complex64::new(0.0, 0.3) * z
            };
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(1.5..2.5));
            let fwd = edge_integral(
                &EdgeIntegrandSpec {
                    endpoint_exponents: (p, q),
                    smooth_factor: &f,
                },
                (a, b),
                1e-12,
            )
            .unwrap();
            let rev = edge_integral(
                &EdgeIntegrandSpec {
                    endpoint_exponents: (q, p),
                    smooth_factor: &f,
                },
                (b, a),
                1e-12,
            )
            .unwrap();
            assert!((fwd + rev).norm() < 1e-9, "fwd {fwd} rev {rev}");
        }
    }

    #[test]
    fn lattice_sum_cot_half() {
        let v = lattice_sum(&LatticeSumSpec {
            offset: 0.5,
            power: 1,
            truncation: Truncation::Infinite,
        })
        .unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn lattice_sum_cot_at_03() {
        // Oracle: Richardson extrapolation in M of the truncated sums.
        let s = |m: u32| {
            lattice_sum(&LatticeSumSpec {
                offset: 0.3,
                power: 1,
                truncation: Truncation::Finite(m),
            })
            .unwrap()
        };
        let (s1, s2, s4) = (s(4000), s(8000), s(16000));
        // Two Richardson levels for the O(1/M) tail.
        let r1 = 2.0 * s2 - s1;
        let r2 = 2.0 * s4 - s2;
        let extrapolated = (4.0 * r2 - r1) / 3.0;
        let closed = lattice_sum(&LatticeSumSpec {
            offset: 0.3,
            power: 1,
            truncation: Truncation::Infinite,
        })
        .unwrap();
        assert!(
            (extrapolated - closed).abs() < 1e-7,
            "extrapolated {extrapolated} closed {closed}"
        );
        assert!((closed - 2.2825007).abs() < 1e-6);
    }

    #[test]
    fn lattice_sum_basel_self() {
        // Oracle: Basel sum 2 sum 1/k^2 -> pi^2/3.
        let mut basel = 0.0;
        for k in (1..200000u64).rev() {
            basel += 2.0 / ((k * k) as f64);
        }
        let closed = lattice_sum(&LatticeSumSpec {
            offset: 0.0,
            power: 2,
            truncation: Truncation::Infinite,
        })
        .unwrap();
        assert!((basel - closed).abs() < 1e-4);
        assert!((closed - PI * PI / 3.0).abs() < 1e-14);
        assert!((closed - 3.2898681).abs() < 1e-6);
    }

    #[test]
    fn lattice_sum_p1_antisymmetric() {
        for m in [1u32, 5, 50] {
            for x in [0.1, 0.37, 0.5, 0.93] {
                let plus = lattice_sum(&LatticeSumSpec {
                    offset: x,
                    power: 1,
                    truncation: Truncation::Finite(m),
                })
                .unwrap();
                let minus = lattice_sum(&LatticeSumSpec {
                    offset: -x,
                    power: 1,
                    truncation: Truncation::Finite(m),
                })
                .unwrap();
                assert_eq!(plus, -minus);
            }
        }
    }

    #[test]
    fn lattice_sum_p1_error_order() {
        // Error against pi cot(pi x) decays like 1/M.
        for x in [0.1, 0.25, 0.3] {
            let closed = PI / (PI * x).tan();
            let err = |m: u32| {
                (lattice_sum(&LatticeSumSpec {
                    offset: x,
                    power: 1,
                    truncation: Truncation::Finite(m),
                })
                .unwrap()
                    - closed)
                    .abs()
            };
            let (e1, e2) = (err(100), err(200));
            let order = (e1 / e2).log2();
            assert!(
                (order - 1.0).abs() < 0.15,
                "x = {x}: measured order {order}"
            );
        }
    }

    #[test]
    fn lattice_sum_divergent_p1_integer() {
        assert!(matches!(
            lattice_sum(&LatticeSumSpec {
                offset: 2.0,
                power: 1,
                truncation: Truncation::Finite(10),
            }),
            Err(NumericsError::Divergent)
        ));
    }

    #[test]
    fn contour_residue() {
        // Oracle: residue theorem, unit circle winding once around 1/z.
        let n = 64;
        let mut path: Vec<Complex64> = (0..=n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
            .collect();
        path[n] = path[0];
        let f = |z: Complex64| 1.0 / z;
        let v = contour_integral(&f, &path, 1e-12).unwrap();
        assert!((v - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-10);
    }

    #[test]
    fn contour_linear_paths() {
        let f1 = |_: Complex64| C1;
        let v = contour_integral(&f1, &[C0, Complex64::new(1.0, 1.0)], 1e-12).unwrap();
        assert!((v - Complex64::new(1.0, 1.0)).norm() < 1e-13);
        let f2 = |z: Complex64| z;
        let v = contour_integral(&f2, &[C0, Complex64::new(2.0, 0.0)], 1e-12).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn contour_exact_derivative_closed() {
        // d/dz of z^3/3 - cos z around closed polylines integrates to ~0.
        let f = |z: Complex64| z * z + z.sin();
        let poly = [
            Complex64::new(1.0, 0.3),
            Complex64::new(-0.4, 1.1),
            Complex64::new(-0.9, -0.8),
            Complex64::new(0.7, -0.6),
            Complex64::new(1.0, 0.3),
        ];
        let v = contour_integral(&f, &poly, 1e-12).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn contour_singular_on_path() {
        // The pole at 0 sits on the segment; refinement either lands on it
        // (non-finite value) or exhausts its budget against the 1/z blowup.
        let f = |z: Complex64| 1.0 / z;
        let r = contour_integral(&f, &[Complex64::new(-1.0, 0.0), C1], 1e-10);
        assert!(matches!(
            r,
            Err(NumericsError::SingularOnPath(_)) | Err(NumericsError::NoConvergence(_))
        ));
    }
}
