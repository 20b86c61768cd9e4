//! Force balance for node configurations: truncated and limit forces on the
//! periodic node set, the log-interaction energy whose gradient they are,
//! the Hessian of the force map, and the Newton solver whose unique critical
//! point is the equally spaced configuration.
//!
//! Truncated sums use the symmetric principal-value convention centered at
//! the node the force acts on: for the pair offset `x = c_j - c_j'` the
//! window is the integers within distance M of `x`, summed end-paired so
//! that mirror-symmetric configurations cancel exactly.  (A window centered
//! at k = 0 instead would leave an O(1/M) remainder at the equally spaced
//! configuration and break its exact two-node symmetry.)

use crate::numerics::Truncation;
use nalgebra::DMatrix;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForcesError {
    #[error("nodes must satisfy 0 = c_0 < c_1 < ... < c_k < 1")]
    CoincidentNodes,
    #[error("Newton iteration failed to converge within {0} steps (residual {1:.3e})")]
    NoConvergence(usize, f64),
}

pub type Result<T> = std::result::Result<T, ForcesError>;

/// Node positions `0 = c_0 < c_1 < ... < c_k < 1` in the unit period.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeConfiguration {
    c: Vec<f64>,
}

impl NodeConfiguration {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() || c[0] != 0.0 {
            return Err(ForcesError::CoincidentNodes);
        }
        for w in c.windows(2) {
            if !(w[0] < w[1]) {
                return Err(ForcesError::CoincidentNodes);
            }
        }
        if *c.last().unwrap() >= 1.0 {
            return Err(ForcesError::CoincidentNodes);
        }
        Ok(NodeConfiguration { c })
    }

    pub fn genus(&self) -> usize {
        self.c.len() - 1
    }

    pub fn positions(&self) -> &[f64] {
        &self.c
    }
}

/// The equally spaced configuration `c*_j = j / (k + 1)`.
pub fn equally_spaced(genus: usize) -> NodeConfiguration {
    let n = genus + 1;
    NodeConfiguration {
        c: (0..n).map(|j| j as f64 / n as f64).collect(),
    }
}

/// A force vector with the truncation it was computed at.
#[derive(Debug, Clone)]
pub struct ForceReport {
    pub force: Vec<f64>,
    pub truncation: Truncation,
}

impl ForceReport {
    pub fn sup_norm(&self) -> f64 {
        self.force.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Principal-value pair sum `sum 1/(x - k)` over integers k within distance
/// `m` of x, accumulated end-paired.
fn pair_sum(x: f64, m: u32) -> f64 {
    let lo = (x - m as f64).ceil() as i64;
    let hi = (x + m as f64).floor() as i64;
    let mut acc = 0.0;
    let (mut i, mut j) = (lo, hi);
    while i < j {
        acc += 1.0 / (x - i as f64) + 1.0 / (x - j as f64);
        i += 1;
        j -= 1;
    }
    if i == j {
        acc += 1.0 / (x - i as f64);
    }
    acc
}

/// Integer window of the pair sum, used by the energy to stay consistent
/// with the force gradient.
fn pair_window(x: f64, m: u32) -> (i64, i64) {
    ((x - m as f64).ceil() as i64, (x + m as f64).floor() as i64)
}

/// Truncated force: for each node j, the sum of `1/(c_j - c')` over all
/// other nodes `c'` of the periodic set within distance M.  The self
/// translates pair off to exactly zero.
pub fn truncated_force(cfg: &NodeConfiguration, m: u32) -> ForceReport {
    let c = &cfg.c;
    let n = c.len();
    let mut force = vec![0.0; n];
    for j in 0..n {
        let mut acc = 0.0;
        for jp in 0..n {
            if jp == j {
                continue; // symmetric window about the node: exact cancellation
            }
            acc += pair_sum(c[j] - c[jp], m);
        }
        force[j] = acc;
    }
    ForceReport {
        force,
        truncation: Truncation::Finite(m),
    }
}

/// Limit force: `F_j = sum_{j' != j} pi cot(pi (c_j - c_j'))`.
pub fn limit_force(cfg: &NodeConfiguration) -> ForceReport {
    let c = &cfg.c;
    let n = c.len();
    let mut force = vec![0.0; n];
    for j in 0..n {
        force[j] = (0..n)
            .filter(|&jp| jp != j)
            .map(|jp| PI / (PI * (c[j] - c[jp])).tan())
            .sum();
    }
    ForceReport {
        force,
        truncation: Truncation::Infinite,
    }
}

/// Log-interaction energy over unordered node pairs within the truncation
/// window; its gradient is [`truncated_force`].  Each pair term is
/// normalized by its lattice distance (`log
/// |x - k| - log max(|k|, 1)`), which shifts the energy by a
/// configuration-independent constant and keeps the sum O(1) so that
/// finite-difference gradients do not lose precision to a large constant
/// bulk.
pub fn log_energy(cfg: &NodeConfiguration, m: u32) -> f64 {
    let c = &cfg.c;
    let mut e = 0.0;
    for j in 0..c.len() {
        for jp in j + 1..c.len() {
            let x = c[j] - c[jp];
            let (lo, hi) = pair_window(x, m);
            for k in lo..=hi {
                let scale = (k as f64).abs().max(1.0);
                e += ((x - k as f64).abs() / scale).ln();
            }
        }
    }
    e
}

/// Flat symmetric lattice sum of `(x - k)^{-2}` over `|k| <= m`.
fn sum_p2_window(x: f64, m: u32) -> f64 {
    let mut acc = 1.0 / (x * x);
    for k in 1..=m as i64 {
        let kf = k as f64;
        acc += 1.0 / ((x - kf) * (x - kf)) + 1.0 / ((x + kf) * (x + kf));
    }
    acc
}

/// Excluded-self sum `sum_{k != 0, |k| <= m} k^{-2}`.
fn sum_p2_self(m: u32) -> f64 {
    let mut acc = 0.0;
    for k in (1..=m as u64).rev() {
        acc += 2.0 / ((k * k) as f64);
    }
    acc
}

/// Hessian of the interaction, in the displayed convention: off-diagonal
/// entries are inverse-square window sums, the diagonal is minus the sum
/// over all other nodes including the node's own translates.
pub fn hessian(cfg: &NodeConfiguration, truncation: Truncation) -> DMatrix<f64> {
    let c = &cfg.c;
    let n = c.len();
    let s2 = |x: f64| -> f64 {
        match truncation {
            Truncation::Finite(m) => sum_p2_window(x, m),
            Truncation::Infinite => (PI / (PI * x).sin()).powi(2),
        }
    };
    let self_term = match truncation {
        Truncation::Finite(m) => sum_p2_self(m),
        Truncation::Infinite => PI * PI / 3.0,
    };
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = self_term;
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = s2(c[i] - c[j]);
            h[(i, j)] = v;
            diag += v;
        }
        h[(i, i)] = -diag;
    }
    h
}

/// Jacobian of the limit force map (no self-translate terms), reduced to
/// the free coordinates `c_1..c_k`.
fn limit_jacobian_reduced(cfg: &NodeConfiguration) -> DMatrix<f64> {
    let c = &cfg.c;
    let n = c.len();
    let s2 = |x: f64| (PI / (PI * x).sin()).powi(2);
    let mut j = DMatrix::zeros(n - 1, n - 1);
    for row in 1..n {
        let mut diag = 0.0;
        for col in 0..n {
            if col == row {
                continue;
            }
            let v = s2(c[row] - c[col]);
            if col >= 1 {
                j[(row - 1, col - 1)] = v;
            }
            diag += v;
        }
        j[(row - 1, row - 1)] = -diag;
    }
    j
}

/// Newton iteration on the limit force with `c_0` pinned to 0.  Steps are
/// halved until the ordering constraints hold, so iterates stay in the
/// simplex.
pub fn solve_critical_point(genus: usize, init: &NodeConfiguration) -> Result<NodeConfiguration> {
    assert_eq!(init.genus(), genus, "init has wrong genus");
    if genus == 0 {
        return Ok(init.clone());
    }
    let mut cfg = init.clone();
    let max_iter = 200;
    let mut residual = limit_force(&cfg).sup_norm();
    for _ in 0..max_iter {
        if residual < 1e-12 {
            return Ok(cfg);
        }
        let f = limit_force(&cfg);
        let jac = limit_jacobian_reduced(&cfg);
        let rhs = nalgebra::DVector::from_iterator(genus, f.force[1..].iter().copied());
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or(ForcesError::NoConvergence(0, residual))?;
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut c = cfg.c.clone();
            for i in 1..=genus {
                c[i] -= damping * step[i - 1];
            }
            if let Ok(candidate) = NodeConfiguration::new(c) {
                let r = limit_force(&candidate).sup_norm();
                if r < residual || damping < 1e-6 {
                    cfg = candidate;
                    residual = r;
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if !accepted {
            return Err(ForcesError::NoConvergence(max_iter, residual));
        }
    }
    if residual < 1e-12 {
        Ok(cfg)
    } else {
        Err(ForcesError::NoConvergence(max_iter, residual))
    }
}

/// Sup-norms of the truncated force at the equally spaced configuration for
/// each window size.
pub fn truncated_force_decay(genus: usize, ms: &[u32]) -> Vec<(u32, f64)> {
    let c = equally_spaced(genus);
    ms.iter()
        .map(|&m| (m, truncated_force(&c, m).sup_norm()))
        .collect()
}
