//! Closed-form threshold quantities: the core fixed point ρ, the core
//! emergence point d★, the satisfiability threshold density d_k, and the
//! cluster count/size exponents.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
const ITERATION_CAP: u64 = 1_000_000;

/// Largest fixed point of x = 1 − exp(−d·x^{k−1}) on [0,1], by descending
/// iteration from 1 (the map is monotone, so iterates decrease to the largest
/// fixed point); 0 when the iteration collapses.
pub fn rho(k: usize, d: f64, tol: f64) -> Result<f64> {
    assert!(k >= 3 && d > 0.0 && tol > 0.0);
    let mut x = 1.0f64;
    for _ in 0..ITERATION_CAP {
        let next = 1.0 - (-d * x.powi(k as i32 - 1)).exp();
        if next < tol {
            return Ok(0.0);
        }
        if (x - next).abs() <= tol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::IterationCap(format!("rho(k={k}, d={d}) did not converge")))
}

const BRACKET_FACTOR: f64 = 10.0;

/// d★ = inf{d > 0 : ρ_{k,d} > 0}, by bisection on the positivity predicate.
pub fn d_star(k: usize, tol: f64) -> Result<f64> {
    assert!(k >= 3 && tol > 0.0);
    let mut lo = tol;
    let mut hi = BRACKET_FACTOR * k as f64;
    debug_assert!(rho(k, hi, DEFAULT_TOL)? > 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rho(k, mid, DEFAULT_TOL)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn h(k: usize, d: f64) -> Result<f64> {
    let rho = rho(k, d, DEFAULT_TOL)?;
    Ok(rho - d * rho.powi(k as i32 - 1) + (1.0 - 1.0 / k as f64) * d * rho.powi(k as i32))
}

/// d_k = inf{d > 0 : ρ − dρ^{k−1} + (1−1/k)dρ^k < 0}. h is discontinuous at
/// d★ (ρ jumps), so bisection starts strictly above it, where h > 0.
pub fn d_k(k: usize, tol: f64) -> Result<f64> {
    assert!(k >= 3 && tol > 0.0);
    let mut lo = d_star(k, tol)? + 1e-4;
    let mut hi = BRACKET_FACTOR * k as f64;
    debug_assert!(h(k, lo)? > 0.0);
    debug_assert!(h(k, hi)? < 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if h(k, mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All closed-form quantities at (k, r, d); exponents are in nats and include
/// the log r factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdProfile {
    pub k: usize,
    pub r: u8,
    pub d: f64,
    pub rho: f64,
    pub d_star: f64,
    pub d_k: f64,
    /// limiting core column fraction n★/n
    pub pi_k: f64,
    /// limiting core row fraction m★/n
    pub core_row_fraction: f64,
    /// limit of (log N)/n, N the cluster count
    pub cluster_count_exponent: f64,
    /// limit of (log |C|)/n, |C| the cluster size
    pub cluster_size_exponent: f64,
}

pub fn profile(k: usize, r: u8, d: f64) -> Result<ThresholdProfile> {
    assert!(r >= 2);
    let rho = rho(k, d, DEFAULT_TOL)?;
    let ln_r = (r as f64).ln();
    let rk1 = rho.powi(k as i32 - 1);
    let rk = rho.powi(k as i32);
    let dk_frac = d / k as f64;
    Ok(ThresholdProfile {
        k,
        r,
        d,
        rho,
        d_star: d_star(k, 1e-9)?,
        d_k: d_k(k, 1e-9)?,
        pi_k: rho - d * rk1 + d * rk,
        core_row_fraction: dk_frac * rk,
        cluster_count_exponent: (rho - d * rk1 + (d - dk_frac) * rk) * ln_r,
        cluster_size_exponent: (1.0 - dk_frac - rho + d * rk1 - (d - dk_frac) * rk) * ln_r,
    })
}
