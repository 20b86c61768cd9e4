//! Zigzag and orthodisk geometry: periodic boundary polylines whose edges
//! alternate between the two diagonal slope classes, the conjugacy pairing
//! between the gdh and g^-1 dh developments, and the dictionary between
//! edge-length classes, end angle, and the slope of the translation orbit.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, SQRT_2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrthodiskError {
    #[error("zigzag needs a positive even number of edges, got {0}")]
    BadCount(usize),
    #[error("edge length {0} is not positive")]
    NonpositiveLength(f64),
    #[error("edge counts differ: {0} vs {1}")]
    CountMismatch(usize, usize),
    #[error("slope class sums degenerate (L- = 0)")]
    Degenerate,
    #[error("angle {0} outside (0, pi/2]")]
    OutOfRange(f64),
}

pub type Result<T> = std::result::Result<T, OrthodiskError>;

/// One period of a zigzag boundary: edge lengths plus the slope (+1 or -1)
/// of the first edge.  Slopes alternate; slope s corresponds to the unit
/// direction (1 + s i)/sqrt(2).  Lengths and the start slope are the true
/// degrees of freedom; vertices are recovered by partial sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Zigzag {
    pub edge_lengths: Vec<f64>,
    pub start_slope: i8,
}

/// Unit direction of an edge with the given slope class.
pub fn slope_direction(slope: i8) -> Complex64 {
    Complex64::new(1.0 / SQRT_2, f64::from(slope.signum()) / SQRT_2)
}

/// Builds a zigzag from per-period edge lengths, checking the count and
/// positivity invariants.
pub fn build_zigzag(edge_lengths: &[f64], start_slope: i8) -> Result<Zigzag> {
    if edge_lengths.is_empty() || edge_lengths.len() % 2 != 0 {
        return Err(OrthodiskError::BadCount(edge_lengths.len()));
    }
    for &l in edge_lengths {
        if !(l > 0.0) {
            return Err(OrthodiskError::NonpositiveLength(l));
        }
    }
    Ok(Zigzag {
        edge_lengths: edge_lengths.to_vec(),
        start_slope: start_slope.signum(),
    })
}

impl Zigzag {
    /// Genus of the surface this boundary belongs to: 2 genus + 2 edges per period.
    pub fn genus(&self) -> usize {
        self.edge_lengths.len() / 2 - 1
    }

    pub fn slope_of_edge(&self, index: usize) -> i8 {
        if index % 2 == 0 {
            self.start_slope
        } else {
            -self.start_slope
        }
    }

    /// Vertices of one period, starting at the origin.
    pub fn vertices(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0)];
        for (i, &l) in self.edge_lengths.iter().enumerate() {
            let d = slope_direction(self.slope_of_edge(i));
            v.push(v[i] + l * d);
        }
        v
    }

    /// Displacement of one period: the sum of the edge vectors.
    pub fn translation(&self) -> Complex64 {
        self.edge_lengths
            .iter()
            .enumerate()
            .map(|(i, &l)| l * slope_direction(self.slope_of_edge(i)))
            .sum()
    }

    /// Total length of the slope +1 edges per period.
    pub fn length_plus(&self) -> f64 {
        self.class_length(1)
    }

    /// Total length of the slope -1 edges per period.
    pub fn length_minus(&self) -> f64 {
        self.class_length(-1)
    }

    fn class_length(&self, slope: i8) -> f64 {
        self.edge_lengths
            .iter()
            .enumerate()
            .filter(|(i, _)| self.slope_of_edge(*i) == slope)
            .map(|(_, &l)| l)
            .sum()
    }

    /// Scales every edge length.
    pub fn scaled(&self, factor: f64) -> Zigzag {
        Zigzag {
            edge_lengths: self.edge_lengths.iter().map(|l| l * factor).collect(),
            start_slope: self.start_slope,
        }
    }
}

/// Same edge lengths, flipped slope classes.  An involution.
pub fn conjugate_zigzag(z: &Zigzag) -> Zigzag {
    Zigzag {
        edge_lengths: z.edge_lengths.clone(),
        start_slope: -z.start_slope,
    }
}

/// Argument of the period translation: arctan(L+/L-) - pi/4, in (-pi/4, pi/4).
pub fn slope_of_orbit(z: &Zigzag) -> Result<f64> {
    let lp = z.length_plus();
    let lm = z.length_minus();
    if lm <= 0.0 {
        return Err(OrthodiskError::Degenerate);
    }
    Ok((lp / lm).atan() - FRAC_PI_4)
}

/// Slope-class lengths for a surface with end angle theta and translation
/// length `le`: L+ = le cos(theta/2), L- = le sin(theta/2).  Combines the
/// flux law F = 2 cos(theta/2) h (h = le) with F = 2 L+ and the hypotenuse
/// identity L+^2 + L-^2 = le^2.
pub fn lengths_from_angle(theta: f64, le: f64) -> Result<(f64, f64)> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(OrthodiskError::OutOfRange(theta));
    }
    Ok((le * (theta / 2.0).cos(), le * (theta / 2.0).sin()))
}

/// Derived closed form of the orbit slope as a function of the end angle
/// under unit translation length: `m(theta) = pi/4 - theta/2`.  (Only the
/// arctan expression and monotonicity are primitive; this form follows from
/// [`lengths_from_angle`].)
pub fn orbit_slope_of_angle(theta: f64) -> Result<f64> {
    let (lp, lm) = lengths_from_angle(theta, 1.0)?;
    let _ = (lp, lm);
    Ok(FRAC_PI_4 - theta / 2.0)
}

/// A conjugate pair of developed boundaries with its worst edge-length
/// mismatch.
#[derive(Debug, Clone)]
pub struct OrthodiskPair {
    pub gdh_zigzag: Zigzag,
    pub inv_zigzag: Zigzag,
    pub conjugacy_residual: f64,
}

impl OrthodiskPair {
    pub fn new(gdh_zigzag: Zigzag, inv_zigzag: Zigzag) -> Result<OrthodiskPair> {
        let residual = conjugacy_residual(&gdh_zigzag, &inv_zigzag)?;
        Ok(OrthodiskPair {
            gdh_zigzag,
            inv_zigzag,
            conjugacy_residual: residual,
        })
    }
}

/// Max over corresponding edges of the length mismatch; zero iff the pair
/// is conjugate.
pub fn conjugacy_residual(a: &Zigzag, b: &Zigzag) -> Result<f64> {
    if a.edge_lengths.len() != b.edge_lengths.len() {
        return Err(OrthodiskError::CountMismatch(
            a.edge_lengths.len(),
            b.edge_lengths.len(),
        ));
    }
    Ok(a.edge_lengths
        .iter()
        .zip(&b.edge_lengths)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
