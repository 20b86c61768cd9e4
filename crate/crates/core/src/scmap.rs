//! Truncated Schwarz-Christoffel developing maps for the gdh and g^-1 dh
//! flat structures on the upper half-plane with periodic prevertices.
//!
//! The gdh integrand is the product over all periods of
//! `[(z - a_{k,j})/(z - b_{k,j})]^{1/2}`; the g^-1 dh integrand is its
//! reciprocal.  Branches are handled through a sum of half-logs that is
//! continuous on the closed upper half-plane away from prevertices, so the
//! integrand is single-valued and no cut tracking is needed.  A finite
//! truncation keeps the windows `|k| <= M`; the infinite resummation uses
//! `prod_k (z - c - k) ~ sin(pi (z - c))`, which is exactly periodic.
//!
//! Developments carry prefactors `e^{i pi/4}` (gdh) and `e^{-i pi/4}`
//! (g^-1 dh), placing boundary edges on the two diagonal slope classes with
//! conjugate directions: the edges `(b_j, a_{j+1})` develop at slope +1 in
//! the gdh picture and carry the flux count.

use crate::numerics::{self, EdgeIntegrandSpec, NumericsError, Truncation};
use crate::orthodisk::{build_zigzag, Zigzag};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScmapError {
    #[error("prevertex arrays must have equal positive length")]
    BadArity,
    #[error("prevertices violate the interleaving 0 = a_0 < b_0 < a_1 < ... < 1")]
    BadInterleaving,
    #[error("evaluation at a prevertex ({0})")]
    AtPrevertex(f64),
    #[error("integration path crosses the interior prevertex {0}")]
    PathThroughPrevertex(f64),
    #[error("point {0} below the closed upper half-plane")]
    OutsideDomain(Complex64),
    #[error("edge index {0} out of range (2 genus + 2 = {1} edges)")]
    BadEdge(usize, usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, ScmapError>;

/// Which of the two flat structures is being developed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Gdh,
    Inv,
}

impl Structure {
    /// Sign of the half-log exponent: +1/2 at the a-prevertices for gdh.
    fn sign(self) -> f64 {
        match self {
            Structure::Gdh => 1.0,
            Structure::Inv => -1.0,
        }
    }

    /// Development prefactor; conjugate diagonals for the two structures.
    pub fn prefactor(self) -> Complex64 {
        match self {
            Structure::Gdh => Complex64::from_polar(1.0, FRAC_PI_4),
            Structure::Inv => Complex64::from_polar(1.0, -FRAC_PI_4),
        }
    }
}

/// Prevertex positions of one period plus the truncation mode.
///
/// `a[0] = 0` and `a_j < b_j < a_{j+1}` within the unit period; the periodic
/// extension is `a_{k,j} = k + a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexConfiguration {
    a: Vec<f64>,
    b: Vec<f64>,
    pub truncation: Truncation,
}

impl VertexConfiguration {
    pub fn new(a: Vec<f64>, b: Vec<f64>, truncation: Truncation) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(ScmapError::BadArity);
        }
        if a[0] != 0.0 {
            return Err(ScmapError::BadInterleaving);
        }
        for j in 0..a.len() {
            let next_a = if j + 1 < a.len() { a[j + 1] } else { 1.0 };
            if !(a[j] < b[j] && b[j] < next_a) {
                return Err(ScmapError::BadInterleaving);
            }
        }
        Ok(VertexConfiguration { a, b, truncation })
    }

    pub fn genus(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn with_truncation(&self, truncation: Truncation) -> Self {
        VertexConfiguration {
            a: self.a.clone(),
            b: self.b.clone(),
            truncation,
        }
    }

    /// Vertices of one period in boundary order: a_0, b_0, a_1, ..., b_k, a_0 + 1.
    pub fn period_vertices(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.a.len() + 1);
        for j in 0..self.a.len() {
            v.push(self.a[j]);
            v.push(self.b[j]);
        }
        v.push(self.a[0] + 1.0);
        v
    }

    /// Number of boundary edges per period.
    pub fn edges_per_period(&self) -> usize {
        2 * self.a.len()
    }

    fn nearest_prevertex(&self, x: f64) -> (f64, PrevertexId) {
        let mut best = (f64::INFINITY, 0.0, PrevertexId::default());
        for (j, (&aj, &bj)) in self.a.iter().zip(&self.b).enumerate() {
            for (pos, class) in [(aj, Class::A), (bj, Class::B)] {
                let k = (x - pos).round();
                let v = pos + k;
                let d = (x - v).abs();
                if d < best.0 {
                    best = (
                        d,
                        v,
                        PrevertexId {
                            class,
                            j,
                            k: k as i64,
                        },
                    );
                }
            }
        }
        (best.1, best.2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
enum Class {
    #[default]
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct PrevertexId {
    class: Class,
    j: usize,
    k: i64,
}

const PREVERTEX_EPS: f64 = 1e-12;

/// log sin(pi w) up to the additive constant log(i/2), continuous on the
/// closed upper half-plane away from the zeros of sin.
fn log_sin(w: Complex64) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * w).exp();
    -Complex64::new(0.0, PI) * w + (Complex64::new(1.0, 0.0) - q).ln()
}

impl VertexConfiguration {
    /// Continuous logarithm of the gdh integrand, optionally excluding the
    /// factor of one prevertex (used to split off endpoint singularities).
    fn log_integrand_gdh(&self, z: Complex64, exclude: &[PrevertexId]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        match self.truncation {
            Truncation::Infinite => {
                for j in 0..self.a.len() {
                    acc += log_sin(z - self.a[j]) - log_sin(z - self.b[j]);
                }
            }
            Truncation::Finite(m) => {
                let m = m as i64;
                for j in 0..self.a.len() {
                    for k in -m..=m {
                        let kf = k as f64;
                        acc += (z - (self.a[j] + kf)).ln() - (z - (self.b[j] + kf)).ln();
                    }
                }
            }
        }
        for id in exclude {
            let pos = match id.class {
                Class::A => self.a[id.j],
                Class::B => self.b[id.j],
            } + id.k as f64;
            let sign = match id.class {
                Class::A => 1.0,
                Class::B => -1.0,
            };
            acc -= sign * (z - pos).ln();
        }
        0.5 * acc
    }

    /// The truncated product `prod [(z - a)/(z - b)]^{+-1/2}` with the
    /// branch continuous on the upper half-plane.
    pub fn sc_integrand(&self, which: Structure, z: Complex64) -> Result<Complex64> {
        if z.im < -PREVERTEX_EPS {
            return Err(ScmapError::OutsideDomain(z));
        }
        if z.im.abs() <= PREVERTEX_EPS {
            let (v, _) = self.nearest_prevertex(z.re);
            if (z.re - v).abs() <= PREVERTEX_EPS {
                return Err(ScmapError::AtPrevertex(v));
            }
        }
        Ok((which.sign() * self.log_integrand_gdh(z, &[])).exp())
    }

    /// Developing map value `F(zeta) = prefactor * int_base^zeta integrand dz`
    /// along the straight segment from `base` to `zeta`.  Endpoints may be
    /// prevertices (the singular factors are integrated exactly); interior
    /// prevertices on the segment are rejected.
    pub fn develop(&self, which: Structure, zeta: Complex64, base: Complex64) -> Result<Complex64> {
        Ok(which.prefactor() * self.raw_development(which, base, zeta, numerics::DEFAULT_TOL)?)
    }

    /// Same as [`Self::develop`] with an explicit quadrature tolerance.
    pub fn develop_with_tol(
        &self,
        which: Structure,
        zeta: Complex64,
        base: Complex64,
        tol: f64,
    ) -> Result<Complex64> {
        Ok(which.prefactor() * self.raw_development(which, base, zeta, tol)?)
    }

    /// Unprefactored integral of the integrand from `from` to `to`.
    fn raw_development(
        &self,
        which: Structure,
        from: Complex64,
        to: Complex64,
        tol: f64,
    ) -> Result<Complex64> {
        for z in [from, to] {
            if z.im < -PREVERTEX_EPS {
                return Err(ScmapError::OutsideDomain(z));
            }
        }
        let mut exclusions: Vec<(PrevertexId, f64)> = Vec::new(); // (id, exponent at that end)
        let mut exps = (0.0, 0.0);
        let mut excl_ids = Vec::new();
        let endpoint_id = |z: Complex64| -> Option<(PrevertexId, f64)> {
            if z.im.abs() > PREVERTEX_EPS {
                return None;
            }
            let (v, id) = self.nearest_prevertex(z.re);
            if (z.re - v).abs() <= PREVERTEX_EPS {
                let sign = match id.class {
                    Class::A => 0.5,
                    Class::B => -0.5,
                } * which.sign();
                Some((id, sign))
            } else {
                None
            }
        };
        if let Some((id, e)) = endpoint_id(from) {
            exps.0 = e;
            exclusions.push((id, e));
            excl_ids.push(id);
        }
        if let Some((id, e)) = endpoint_id(to) {
            exps.1 = e;
            exclusions.push((id, e));
            excl_ids.push(id);
        }
        // Interior prevertex on a boundary segment is a hard error.
        if from.im.abs() <= PREVERTEX_EPS && to.im.abs() <= PREVERTEX_EPS {
            let (lo, hi) = if from.re < to.re {
                (from.re, to.re)
            } else {
                (to.re, from.re)
            };
            let verts = self.period_vertices();
            let k_lo = (lo - 1.0).floor() as i64;
            let k_hi = (hi + 1.0).ceil() as i64;
            for k in k_lo..=k_hi {
                for &v in verts.iter().take(verts.len() - 1) {
                    let p = v + k as f64;
                    if p > lo + PREVERTEX_EPS && p < hi - PREVERTEX_EPS {
                        return Err(ScmapError::PathThroughPrevertex(p));
                    }
                }
            }
        }
        let dir = to - from;
        let span = dir.norm();
        if span == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let smooth = |z: Complex64| -> Complex64 {
            (which.sign() * self.log_integrand_gdh(z, &excl_ids)).exp()
        };
        // Reinstate the excluded factors as powers of the affine parameter:
        // (z - v) = t (to - from) at the `from` end, (1 - t)(from - to) at `to`.
        let scale = {
            let mut s = Complex64::new(1.0, 0.0);
            if exps.0 != 0.0 {
                s *= pow_principal(dir, exps.0);
            }
            if exps.1 != 0.0 {
                s *= pow_principal(-dir, exps.1);
            }
            s
        };
        let f = |z: Complex64| smooth(z) * scale;
        let spec = EdgeIntegrandSpec {
            endpoint_exponents: (exps.0, exps.1),
            smooth_factor: &f,
        };
        Ok(numerics::edge_integral(&spec, (from, to), tol)?)
    }

    /// Length of the developed image of one boundary edge (unit lambda).
    pub fn edge_image_length(&self, which: Structure, edge: usize) -> Result<f64> {
        self.edge_image_length_with_tol(which, edge, numerics::DEFAULT_TOL)
    }

    pub fn edge_image_length_with_tol(&self, which: Structure, edge: usize, tol: f64) -> Result<f64> {
        let n = self.edges_per_period();
        if edge >= n {
            return Err(ScmapError::BadEdge(edge, n));
        }
        let verts = self.period_vertices();
        let (from, to) = (verts[edge], verts[edge + 1]);
        let j = edge / 2;
        let (id_from, id_to) = if edge % 2 == 0 {
            (
                PrevertexId {
                    class: Class::A,
                    j,
                    k: 0,
                },
                PrevertexId {
                    class: Class::B,
                    j,
                    k: 0,
                },
            )
        } else {
            let jn = (j + 1) % self.a.len();
            let kn = if j + 1 == self.a.len() { 1 } else { 0 };
            (
                PrevertexId {
                    class: Class::B,
                    j,
                    k: 0,
                },
                PrevertexId {
                    class: Class::A,
                    j: jn,
                    k: kn,
                },
            )
        };
        let sgn = which.sign();
        let exp_of = |id: PrevertexId| match id.class {
            Class::A => 0.5 * sgn,
            Class::B => -0.5 * sgn,
        };
        let (p, q) = (exp_of(id_from), exp_of(id_to));
        let excl = [id_from, id_to];
        let span = to - from;
        let f = move |z: Complex64| -> Complex64 {
            let modulus = (sgn * self.log_integrand_gdh(z, &excl)).exp().norm();
            Complex64::new(modulus * span.powf(p + q), 0.0)
        };
        let spec = EdgeIntegrandSpec {
            endpoint_exponents: (p, q),
            smooth_factor: &f,
        };
        let v = numerics::edge_integral(
            &spec,
            (Complex64::new(from, 0.0), Complex64::new(to, 0.0)),
            tol,
        )?;
        Ok(v.re)
    }

    /// `|F^{m2}(zeta) - F^{m1}(zeta)|` from a common base point at `i`.
    pub fn truncation_error(
        &self,
        which: Structure,
        zeta: Complex64,
        m1: u32,
        m2: u32,
    ) -> Result<f64> {
        let base = Complex64::new(0.0, 1.0);
        let f1 = self
            .with_truncation(Truncation::Finite(m1))
            .develop(which, zeta, base)?;
        let f2 = self
            .with_truncation(Truncation::Finite(m2))
            .develop(which, zeta, base)?;
        Ok((f2 - f1).norm())
    }

    /// Extracted boundary zigzag of one period (unit lambda): edge lengths in
    /// boundary order.  For gdh the first edge (a_0, b_0) has slope -1; the
    /// conjugate structure starts at +1.
    pub fn zigzag(&self, which: Structure) -> Result<Zigzag> {
        self.zigzag_with_tol(which, numerics::DEFAULT_TOL)
    }

    /// Developed boundary edges of one period with their image lengths and
    /// unit directions (alternating between the two conjugate diagonals).
    pub fn developed_edges(&self, which: Structure) -> Result<Vec<DevelopedEdge>> {
        let z = self.zigzag(which)?;
        Ok(z.edge_lengths
            .iter()
            .enumerate()
            .map(|(index, &length)| DevelopedEdge {
                index,
                length,
                direction: crate::orthodisk::slope_direction(z.slope_of_edge(index)),
            })
            .collect())
    }

    pub fn zigzag_with_tol(&self, which: Structure, tol: f64) -> Result<Zigzag> {
        let n = self.edges_per_period();
        let mut lengths = Vec::with_capacity(n);
        for e in 0..n {
            lengths.push(self.edge_image_length_with_tol(which, e, tol)?);
        }
        let start = match which {
            Structure::Gdh => -1,
            Structure::Inv => 1,
        };
        Ok(build_zigzag(&lengths, start).expect("positive edge lengths"))
    }
}

/// One developed boundary edge: index in boundary order, image length at
/// unit lambda, and unit image direction.
#[derive(Debug, Clone, Copy)]
pub struct DevelopedEdge {
    pub index: usize,
    pub length: f64,
    pub direction: Complex64,
}

/// Principal power with the branch taken as the limit from the upper
/// half-plane: a negative-zero imaginary part (from negating a real-axis
/// direction) must resolve to argument +pi, not -pi.
fn pow_principal(z: Complex64, e: f64) -> Complex64 {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let arg = im.atan2(z.re);
    Complex64::from_polar(z.norm().powf(e), arg * e)
}
