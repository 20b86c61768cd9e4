//! Period-conjugacy solver: finds prevertex configurations whose two
//! developments have equal corresponding edge lengths (after the relative
//! scale lambda) and whose zigzag realizes a prescribed end angle, continues
//! the family in the angle, and reconstructs Weierstrass data from the
//! solved developments.
//!
//! Unknowns are the free prevertices `(a_1..a_k, b_0..b_k)` and lambda;
//! equations are the 2k+2 per-edge length matches plus one angle equation,
//! solved in the least-squares sense by damped Gauss-Newton.  The angle
//! enters through the slope-class ratio `L+ / sqrt(L+^2 + L-^2) = cos(theta/2)`,
//! which is scale free.

use crate::numerics::{NumericsError, Truncation};
use crate::orthodisk::{conjugacy_residual, OrthodiskPair, Zigzag};
use crate::scmap::{ScmapError, Structure, VertexConfiguration};
use crate::weierstrass::{Domain, WeierstrassData};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("Gauss-Newton failed to converge: residual {0:.3e} after {1} iterations")]
    NoConvergence(f64, usize),
    #[error("Jacobian numerically singular (condition estimate {0:.3e})")]
    SingularJacobian(f64),
    #[error("no valid damped step preserves the prevertex ordering")]
    OrderViolation,
    #[error("epsilon {0} too large for genus {1} (needs eps < 1/(4(k+1)))")]
    EpsTooLarge(f64, usize),
    #[error("continuation stalled at theta = {0}")]
    ContinuationStalled(f64),
    #[error("branch continuation disagreement {0:.3e} in the reconstructed Gauss map")]
    BranchInconsistency(f64),
    #[error(transparent)]
    Scmap(#[from] ScmapError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, SolverError>;

/// A target for the conjugacy solver.
#[derive(Debug, Clone)]
pub struct SolveProblem {
    pub theta: f64,
    pub truncation: Truncation,
    pub init: VertexConfiguration,
    pub lambda0: f64,
}

/// A solved configuration with its certificates.
#[derive(Debug, Clone)]
pub struct SolvedSurface {
    pub config: VertexConfiguration,
    pub lambda: f64,
    pub theta_target: f64,
    pub theta_achieved: f64,
    pub conjugacy_residual: f64,
    pub angle_residual: f64,
    pub pair: OrthodiskPair,
}

impl SolvedSurface {
    pub fn genus(&self) -> usize {
        self.config.genus()
    }
}

/// Residual of a candidate `(configuration, lambda)` against the angle
/// target: per-edge mismatches `lambda l_gdh - (1/lambda) l_inv` followed by
/// the angle-ratio mismatch of the lambda-scaled gdh zigzag.
pub fn residual(cfg: &VertexConfiguration, lambda: f64, theta: f64, tol: f64) -> Result<Vec<f64>> {
    let n = cfg.edges_per_period();
    let mut r = Vec::with_capacity(n + 1);
    let mut lengths_gdh = Vec::with_capacity(n);
    for e in 0..n {
        let lg = cfg.edge_image_length_with_tol(Structure::Gdh, e, tol)?;
        let li = cfg.edge_image_length_with_tol(Structure::Inv, e, tol)?;
        lengths_gdh.push(lg);
        r.push(lambda * lg - li / lambda);
    }
    r.push(angle_ratio(&lengths_gdh) - (theta / 2.0).cos());
    Ok(r)
}

/// `L+ / sqrt(L+^2 + L-^2)` for gdh edge lengths in boundary order: the
/// slope +1 class consists of the odd-indexed edges `(b_j, a_{j+1})`.
fn angle_ratio(lengths_gdh: &[f64]) -> f64 {
    let (mut lp, mut lm) = (0.0, 0.0);
    for (e, &l) in lengths_gdh.iter().enumerate() {
        if e % 2 == 1 {
            lp += l;
        } else {
            lm += l;
        }
    }
    lp / lp.hypot(lm)
}

/// Achieved end angle of a solved gdh zigzag.
pub fn achieved_theta(gdh: &Zigzag) -> f64 {
    let lp = gdh.length_plus();
    let lm = gdh.length_minus();
    2.0 * (lp / lp.hypot(lm)).acos()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Unknowns {
    genus: usize,
}

impl Unknowns {
    fn pack(&self, cfg: &VertexConfiguration, lambda: f64) -> Vec<f64> {
        let mut u = Vec::with_capacity(2 * self.genus + 2);
        u.extend_from_slice(&cfg.a()[1..]);
        u.extend_from_slice(cfg.b());
        u.push(lambda);
        u
    }

    fn unpack(
        &self,
        u: &[f64],
        truncation: Truncation,
    ) -> std::result::Result<(VertexConfiguration, f64), ScmapError> {
        let k = self.genus;
        let mut a = vec![0.0];
        a.extend_from_slice(&u[..k]);
        let b = u[k..2 * k + 1].to_vec();
        let lambda = u[2 * k + 1];
        if lambda <= 0.0 {
            return Err(ScmapError::BadInterleaving);
        }
        Ok((VertexConfiguration::new(a, b, truncation)?, lambda))
    }
}

const SOLVE_TOL: f64 = 1e-9;
const QUAD_TOL: f64 = 1e-10;
const FD_QUAD_TOL: f64 = 1e-11;
const FD_STEP: f64 = 1e-6;
const MAX_ITER: usize = 60;

/// Converged when both the edge mismatches and the realized angle are
/// resolved: the cosine-ratio row maps to the angle with a 1/sin(theta/2)
/// factor, so the angle is checked in theta units directly.
fn converged(r: &[f64], theta: f64) -> bool {
    if sup_norm(&r[..r.len() - 1]) >= SOLVE_TOL {
        return false;
    }
    let ratio = *r.last().unwrap() + (theta / 2.0).cos();
    let theta_hat = 2.0 * ratio.clamp(-1.0, 1.0).acos();
    (theta_hat - theta).abs() < 5e-9
}

/// Damped Gauss-Newton on [`residual`].  Converges when the residual
/// sup-norm drops below 1e-9 and the realized angle matches the target to
/// 5e-9.
pub fn solve(problem: &SolveProblem) -> Result<SolvedSurface> {
    let genus = problem.init.genus();
    let vars = Unknowns { genus };
    let mut u = vars.pack(&problem.init, problem.lambda0);
    let (mut cfg, mut lambda) = vars
        .unpack(&u, problem.truncation)
        .map_err(SolverError::Scmap)?;
    let mut r = residual(&cfg, lambda, problem.theta, QUAD_TOL)?;
    let mut rnorm = sup_norm(&r);
    for iter in 0..MAX_ITER {
        if converged(&r, problem.theta) {
            return finish(problem, &cfg, lambda);
        }
        let jac = jacobian(&vars, &u, problem)?;
        let rhs = DVector::from_column_slice(&r);
        let svd = jac.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > smax * 1e-14) {
            return Err(SolverError::SingularJacobian(smax / smin.max(1e-300)));
        }
        let step = svd
            .solve(&rhs, smax * 1e-13)
            .map_err(|_| SolverError::SingularJacobian(smax / smin))?;
        let mut damping = 1.0;
        let mut moved = false;
        for _ in 0..12 {
            let trial: Vec<f64> = u
                .iter()
                .zip(step.iter())
                .map(|(x, s)| x - damping * s)
                .collect();
            match vars.unpack(&trial, problem.truncation) {
                Ok((tc, tl)) => {
                    let tr = residual(&tc, tl, problem.theta, QUAD_TOL)?;
                    let tn = sup_norm(&tr);
                    if tn < rnorm {
                        u = trial;
                        cfg = tc;
                        lambda = tl;
                        r = tr;
                        rnorm = tn;
                        moved = true;
                        break;
                    }
                }
                Err(_) => {} // ordering violated: damp further
            }
            damping *= 0.5;
        }
        if !moved {
            if converged(&r, problem.theta) {
                return finish(problem, &cfg, lambda);
            }
            return Err(SolverError::NoConvergence(rnorm, iter));
        }
    }
    if converged(&r, problem.theta) {
        return finish(problem, &cfg, lambda);
    }
    Err(SolverError::NoConvergence(rnorm, MAX_ITER))
}

fn jacobian(vars: &Unknowns, u: &[f64], problem: &SolveProblem) -> Result<DMatrix<f64>> {
    let n = u.len();
    let m = 2 * vars.genus + 3;
    let mut j = DMatrix::zeros(m, n);
    for col in 0..n {
        let mut h = FD_STEP;
        // Shrink the step if a full step would leave the simplex.
        loop {
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[col] += h;
            dn[col] -= h;
            match (
                vars.unpack(&up, problem.truncation),
                vars.unpack(&dn, problem.truncation),
            ) {
                (Ok((cu, lu)), Ok((cd, ld))) => {
                    let ru = residual(&cu, lu, problem.theta, FD_QUAD_TOL)?;
                    let rd = residual(&cd, ld, problem.theta, FD_QUAD_TOL)?;
                    for row in 0..m {
                        j[(row, col)] = (ru[row] - rd[row]) / (2.0 * h);
                    }
                    break;
                }
                _ if h > 1e-12 => h *= 0.25,
                _ => return Err(SolverError::OrderViolation),
            }
        }
    }
    Ok(j)
}

fn finish(problem: &SolveProblem, cfg: &VertexConfiguration, lambda: f64) -> Result<SolvedSurface> {
    let gdh = cfg.zigzag_with_tol(Structure::Gdh, QUAD_TOL)?.scaled(lambda);
    let inv = cfg
        .zigzag_with_tol(Structure::Inv, QUAD_TOL)?
        .scaled(1.0 / lambda);
    let conj = conjugacy_residual(&gdh, &inv).expect("equal edge counts");
    let theta_achieved = achieved_theta(&gdh);
    let pair = OrthodiskPair {
        gdh_zigzag: gdh,
        inv_zigzag: inv,
        conjugacy_residual: conj,
    };
    Ok(SolvedSurface {
        config: cfg.clone(),
        lambda,
        theta_target: problem.theta,
        theta_achieved,
        conjugacy_residual: conj,
        angle_residual: (theta_achieved - problem.theta).abs(),
        pair,
    })
}

/// Prevertices opened from the equally spaced node configuration:
/// `a_j = j/(k+1)`, `b_j = a_j + eps`.
pub fn small_angle_init(genus: usize, eps: f64, truncation: Truncation) -> Result<VertexConfiguration> {
    let n = genus + 1;
    if !(eps > 0.0 && eps < 1.0 / (4.0 * n as f64)) {
        return Err(SolverError::EpsTooLarge(eps, genus));
    }
    let a: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
    let b: Vec<f64> = a.iter().map(|x| x + eps).collect();
    Ok(VertexConfiguration::new(a, b, truncation)?)
}

/// Warm-started solves along a monotone theta grid.  On failure the step
/// toward the next grid point is halved, up to six times.
pub fn continue_family(
    genus: usize,
    thetas: &[f64],
    truncation: Truncation,
) -> Result<Vec<SolvedSurface>> {
    assert!(!thetas.is_empty());
    let first = thetas[0];
    let eps = (first / (PI * (genus + 1) as f64)).min(1.0 / (8.0 * (genus + 1) as f64));
    let mut current = SolveProblem {
        theta: first,
        truncation,
        init: small_angle_init(genus, eps, truncation)?,
        lambda0: 1.0,
    };
    let mut out: Vec<SolvedSurface> = Vec::with_capacity(thetas.len());
    let mut last_solution = solve(&current)?;
    out.push(last_solution.clone());
    for &theta in &thetas[1..] {
        let mut from_theta = last_solution.theta_target;
        let mut target = theta;
        let mut halvings = 0;
        loop {
            current = SolveProblem {
                theta: target,
                truncation,
                init: last_solution.config.clone(),
                lambda0: last_solution.lambda,
            };
            match solve(&current) {
                Ok(s) => {
                    last_solution = s;
                    if (target - theta).abs() < 1e-15 {
                        out.push(last_solution.clone());
                        break;
                    }
                    from_theta = target;
                    target = theta;
                }
                Err(_) if halvings < 6 => {
                    halvings += 1;
                    target = 0.5 * (from_theta + target);
                }
                Err(_) => return Err(SolverError::ContinuationStalled(from_theta)),
            }
        }
    }
    Ok(out)
}

/// Weierstrass data of a solved surface in the frame whose Alexandrov
/// symmetry planes are the coordinate planes: `g = lambda phi_gdh` and
/// `dh = d zeta` on the half-plane strip.  The developments are recovered
/// as `g dh = e^{-i pi/4} dF_gdh` and `dh/g = e^{+i pi/4} dF_inv`; the
/// constant phase is the recorded frame rotation.
pub fn reconstruct_weierstrass(s: &SolvedSurface) -> Result<WeierstrassData> {
    verify_branch_continuation(s)?;
    let cfg = s.config.clone();
    let lambda = s.lambda;
    let g = move |z: Complex64| match cfg.sc_integrand(Structure::Gdh, z) {
        Ok(v) => lambda * v,
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    };
    let dh = |_: Complex64| Complex64::new(1.0, 0.0);
    Ok(WeierstrassData::new(g, dh, Domain::HalfPlaneStrip))
}

/// Continues `sqrt(D1/D2)` along a path from i by nearest-sign selection
/// and compares with the closed-form branch; a disagreement flags a branch
/// inconsistency in the reconstruction.
fn verify_branch_continuation(s: &SolvedSurface) -> Result<()> {
    let cfg = &s.config;
    let ratio = |z: Complex64| -> Result<Complex64> {
        let g = cfg.sc_integrand(Structure::Gdh, z)?;
        let i = cfg.sc_integrand(Structure::Inv, z)?;
        // D1/D2 up to the constant e^{i pi/2}: (lambda phi)^2.
        Ok(s.lambda * s.lambda * g / i)
    };
    let targets = [
        Complex64::new(0.31, 0.41),
        Complex64::new(0.73, 0.12),
        Complex64::new(0.11, 1.7),
    ];
    let mut worst: f64 = 0.0;
    for &target in &targets {
        let start = Complex64::new(0.0, 1.0);
        let steps = 64;
        let mut w = ratio(start)?.sqrt();
        if (w - s.lambda * cfg.sc_integrand(Structure::Gdh, start)?).norm() > w.norm() {
            w = -w;
        }
        for k in 1..=steps {
            let z = start + (target - start) * (k as f64 / steps as f64);
            let r = ratio(z)?.sqrt();
            w = if (r - w).norm() <= (r + w).norm() { r } else { -r };
        }
        let direct = s.lambda * cfg.sc_integrand(Structure::Gdh, target)?;
        worst = worst.max((w - direct).norm() / direct.norm().max(1e-30));
    }
    if worst > 1e-10 {
        return Err(SolverError::BranchInconsistency(worst));
    }
    Ok(())
}

/// Horizontal-period closure of the translation cycle: real parts of the
/// three Weierstrass periods over one period at interior height, the third
/// one measured against the unit vertical translation.
pub fn translation_closure_defect(s: &SolvedSurface, tol: f64) -> Result<[f64; 3]> {
    let data = reconstruct_weierstrass(s)?;
    let y = 0.6;
    let path = [Complex64::new(0.07, y), Complex64::new(1.07, y)];
    let f = |z: Complex64| data.integrands(z);
    let p = crate::numerics::contour_integral3(&f, &path, tol)?;
    Ok([p[0].re.abs(), p[1].re.abs(), (p[2].re - 1.0).abs()])
}

/// Complex edge image vectors of both scaled developments; the conjugacy
/// defect per edge is `|lambda E_gdh - conj(E_inv / lambda)|`.
pub fn edge_vector_conjugacy_defect(s: &SolvedSurface, tol: f64) -> Result<f64> {
    let cfg = &s.config;
    let verts = cfg.period_vertices();
    let mut worst: f64 = 0.0;
    for e in 0..cfg.edges_per_period() {
        let (from, to) = (
            Complex64::new(verts[e], 0.0),
            Complex64::new(verts[e + 1], 0.0),
        );
        let eg = cfg.develop_with_tol(Structure::Gdh, to, from, tol)?;
        let ei = cfg.develop_with_tol(Structure::Inv, to, from, tol)?;
        worst = worst.max((s.lambda * eg - (ei / s.lambda).conj()).norm());
    }
    Ok(worst)
}

/// End flux of the quarter-domain puncture: the imaginary parts of the two
/// horizontal periods over the cycle at height `y` (one period wide).
pub fn end_flux(s: &SolvedSurface, y: f64, tol: f64) -> Result<[f64; 2]> {
    let data = reconstruct_weierstrass(s)?;
    let path = [Complex64::new(0.03, y), Complex64::new(1.03, y)];
    let f = |z: Complex64| data.integrands(z);
    let p = crate::numerics::contour_integral3(&f, &path, tol)?;
    Ok([p[0].im, p[1].im])
}

/// Resummed end limit of the Gauss map: `lambda e^{-i pi s / 2}` with
/// `s = sum (b_j - a_j)`; the end angle is `pi s`.
pub fn end_gauss_map(s: &SolvedSurface) -> Complex64 {
    let span: f64 = s
        .config
        .a()
        .iter()
        .zip(s.config.b())
        .map(|(a, b)| b - a)
        .sum();
    Complex64::from_polar(s.lambda, -FRAC_PI_2 * span)
}

/// A full revalidation of a solved surface, independent of the solver path:
/// conjugacy, angle, translation closure, and horizontal conjugacy of the
/// edge vectors, all at a tightened quadrature tolerance and doubled
/// truncation (finite truncations only; the resummed form is already the
/// limit object).
#[derive(Debug, Clone)]
pub struct Certificate {
    pub conjugacy: f64,
    pub angle: f64,
    pub closure: [f64; 3],
    pub edge_conjugacy: f64,
}

impl Certificate {
    pub fn passes(&self, tol: f64) -> bool {
        self.conjugacy < tol
            && self.angle < tol
            && self.closure.iter().all(|c| *c < tol)
            && self.edge_conjugacy < tol
    }
}

pub fn certify(s: &SolvedSurface, quad_tol: f64) -> Result<Certificate> {
    let doubled = match s.config.truncation {
        Truncation::Finite(m) => Truncation::Finite(2 * m),
        Truncation::Infinite => Truncation::Infinite,
    };
    let cfg = s.config.with_truncation(doubled);
    let gdh = cfg.zigzag_with_tol(Structure::Gdh, quad_tol)?.scaled(s.lambda);
    let inv = cfg
        .zigzag_with_tol(Structure::Inv, quad_tol)?
        .scaled(1.0 / s.lambda);
    let conj = conjugacy_residual(&gdh, &inv).expect("equal counts");
    let angle = (achieved_theta(&gdh) - s.theta_target).abs();
    let recessed = SolvedSurface {
        config: cfg,
        ..s.clone()
    };
    let closure = translation_closure_defect(&recessed, quad_tol)?;
    let edge_conjugacy = edge_vector_conjugacy_defect(&recessed, quad_tol)?;
    Ok(Certificate {
        conjugacy: conj,
        angle,
        closure,
        edge_conjugacy,
    })
}

/// Convenience constructor: solve at genus and angle from the small-angle
/// continuation, with a short warm-up grid when the target is far from the
/// noded regime.
pub fn solve_genus_theta(genus: usize, theta: f64, truncation: Truncation) -> Result<SolvedSurface> {
    let grid: Vec<f64> = if genus == 0 {
        vec![theta]
    } else {
        // walk out of the small-angle regime in a few steps
        let start = (0.3_f64).min(theta);
        let steps = 4;
        let mut g: Vec<f64> = (0..steps)
            .map(|i| start + (theta - start) * i as f64 / steps as f64)
            .collect();
        g.push(theta);
        g
    };
    let family = continue_family(genus, &grid, truncation)?;
    Ok(family.into_iter().last().expect("nonempty grid"))
}

/// Initial configuration for a direct genus-0 solve.
pub fn genus0_init(b0: f64, truncation: Truncation) -> VertexConfiguration {
    VertexConfiguration::new(vec![0.0], vec![b0], truncation).expect("valid genus-0 interleaving")
}
