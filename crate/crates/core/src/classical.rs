//! Score of a classical precessing vector, the baseline `P^c_K = (1 + 1/K)/2`.
//!
//! Only the in-plane angle matters: the sign of the projection onto an
//! in-plane direction ignores both the magnitude and the z-component. Mixed
//! strategies are convex combinations, so deterministic vectors suffice.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::witness::{check_odd_k, pos};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalVector {
    pub phi0: f64,
    pub magnitude: f64,
}

impl ClassicalVector {
    pub fn new(phi0: f64, magnitude: f64) -> Result<Self> {
        if magnitude.is_nan() || magnitude <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "magnitude must be positive, got {magnitude}"
            )));
        }
        Ok(Self { phi0, magnitude })
    }

    pub fn score(&self, kk: usize) -> f64 {
        classical_score(kk, self.phi0)
    }
}

/// Fraction of the `K` directions onto which the vector at azimuth `phi0`
/// projects positively, counting zero projections as one half.
pub fn classical_score(kk: usize, phi0: f64) -> f64 {
    let total: f64 = (0..kk)
        .map(|k| pos((2.0 * PI * k as f64 / kk as f64 - phi0).cos()))
        .sum();
    total / kk as f64
}

/// `(1 + 1/K) / 2`
pub fn classical_bound(kk: usize) -> f64 {
    0.5 * (1.0 + 1.0 / kk as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalSweep {
    pub k: usize,
    pub points: usize,
    pub max_score: f64,
    pub argmax_phi0: f64,
}

/// Maximum of [`classical_score`] over `points` equally spaced azimuths in
/// `[0, 2 pi)`.
pub fn sweep_max(kk: usize, points: usize) -> Result<ClassicalSweep> {
    check_odd_k(kk as i64)?;
    if points == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one point".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..points {
        let phi0 = 2.0 * PI * i as f64 / points as f64;
        let s = classical_score(kk, phi0);
        if s > best.0 {
            best = (s, phi0);
        }
    }
    Ok(ClassicalSweep {
        k: kk,
        points,
        max_score: best.0,
        argmax_phi0: best.1,
    })
}
