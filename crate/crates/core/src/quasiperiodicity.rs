//! Continued fractions of the frequency ratio β = Ω/ω′ and the almost
//! periods they predict.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{BoostError, Result};
use crate::semiclassics::TorusPoint;

/// Default expansion length.
pub const MAX_TERMS: usize = 20;
/// Stop when the fractional remainder is within this of zero.
pub const REMAINDER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Semiconvergent {
    pub h: u64,
    pub k: u64,
    /// Index N of the convergent it extends.
    pub n: usize,
    pub m: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CFExpansion {
    pub beta: f64,
    pub coeffs: Vec<u64>,
    /// (h_N, k_N) for N = 0, 1, …
    pub convergents: Vec<(u64, u64)>,
    pub semiconvergents: Vec<Semiconvergent>,
    /// True when the expansion ended because the remainder vanished.
    pub exact: bool,
}

impl CFExpansion {
    /// Value of the finite expansion, evaluated from the tail.
    pub fn reconstruct(&self) -> f64 {
        let mut x = *self.coeffs.last().unwrap_or(&0) as f64;
        for &a in self.coeffs.iter().rev().skip(1) {
            x = a as f64 + 1.0 / x;
        }
        x
    }
}

pub fn continued_fraction(beta: f64, max_terms: usize, tol: f64) -> Result<CFExpansion> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(BoostError::InvalidParameter(format!(
            "ratio must be positive, got {beta}"
        )));
    }
    if max_terms == 0 {
        return Err(BoostError::InvalidParameter("max_terms must be positive".into()));
    }
    let mut coeffs = Vec::new();
    let mut x = beta;
    let mut exact = false;
    loop {
        // snap so that 2.9999999999999996 reads as 3
        let nearest = x.round();
        let a = if (x - nearest).abs() < tol { nearest } else { x.floor() };
        coeffs.push(a as u64);
        let rem = x - a;
        if rem.abs() < tol {
            exact = true;
            break;
        }
        if coeffs.len() >= max_terms {
            break;
        }
        x = 1.0 / rem;
    }

    let (mut h2, mut h1) = (0u64, 1u64);
    let (mut k2, mut k1) = (1u64, 0u64);
    let mut convergents = Vec::with_capacity(coeffs.len());
    for &a in &coeffs {
        let h = a * h1 + h2;
        let k = a * k1 + k2;
        convergents.push((h, k));
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, k);
    }

    let mut semiconvergents = Vec::new();
    for n in 0..convergents.len().saturating_sub(1) {
        let (h, k) = convergents[n];
        let (hp, kp) = if n == 0 { (1, 0) } else { convergents[n - 1] };
        for m in 1..coeffs[n + 1] {
            semiconvergents.push(Semiconvergent {
                h: m * h + hp,
                k: m * k + kp,
                n,
                m,
            });
        }
    }

    Ok(CFExpansion {
        beta,
        coeffs,
        convergents,
        semiconvergents,
        exact,
    })
}

fn same_ratio(p: u64, q: u64, h: u64, k: u64) -> bool {
    p as u128 * k as u128 == h as u128 * q as u128
}

/// Brute force over 0 < q ≤ k: |kβ − h| < |qβ − p| for every p/q ≠ h/k.
pub fn best_approx_holds(beta: f64, h: u64, k: u64) -> bool {
    let err = (k as f64 * beta - h as f64).abs();
    (1..=k).all(|q| {
        let qb = q as f64 * beta;
        let lo = qb.floor().max(0.0) as u64;
        [lo, lo + 1]
            .iter()
            .filter(|&&p| !same_ratio(p, q, h, k))
            .all(|&p| err < (qb - p as f64).abs())
    })
}

/// Best-approximation inequality for convergent N.
pub fn best_approx_check(cf: &CFExpansion, n: usize) -> Result<bool> {
    let &(h, k) = cf
        .convergents
        .get(n)
        .ok_or_else(|| BoostError::InvalidParameter(format!("convergent {n} beyond expansion")))?;
    Ok(best_approx_holds(cf.beta, h, k))
}

/// Brute force over 0 < q ≤ k: |β − h/k| < |β − p/q| for every p/q ≠ h/k.
pub fn semi_approx_holds(beta: f64, h: u64, k: u64) -> bool {
    let err = (beta - h as f64 / k as f64).abs();
    (1..=k).all(|q| {
        let qb = q as f64 * beta;
        let lo = qb.floor().max(0.0) as u64;
        [lo, lo + 1]
            .iter()
            .filter(|&&p| !same_ratio(p, q, h, k))
            .all(|&p| err < (beta - p as f64 / q as f64).abs())
    })
}

/// Weaker inequality for semiconvergent number `idx` of the expansion.
pub fn best_semi_check(cf: &CFExpansion, idx: usize) -> Result<bool> {
    let s = cf
        .semiconvergents
        .get(idx)
        .ok_or_else(|| BoostError::InvalidParameter(format!("semiconvergent {idx} beyond expansion")))?;
    Ok(semi_approx_holds(cf.beta, s.h, s.k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodKind {
    Convergent,
    Semiconvergent,
    /// Integer multiple of the exact period of a rational ratio.
    Multiple,
}

impl PeriodKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PeriodKind::Convergent => "convergent",
            PeriodKind::Semiconvergent => "semiconvergent",
            PeriodKind::Multiple => "multiple",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlmostPeriod {
    /// (2π/Ω)·h
    pub t: f64,
    pub h: u64,
    pub k: u64,
    pub kind: PeriodKind,
}

/// Convergent and semiconvergent almost periods of (Ω, ω′) with h ≤ h_max,
/// sorted by time. A rational ratio also lists multiples of its period.
pub fn almost_periods(drive_omega: f64, omega_eff: f64, h_max: u64) -> Result<Vec<AlmostPeriod>> {
    if !(drive_omega > 0.0 && omega_eff > 0.0) {
        return Err(BoostError::InvalidParameter("frequencies must be positive".into()));
    }
    let cf = continued_fraction(drive_omega / omega_eff, MAX_TERMS, REMAINDER_TOL)?;
    let cycle = TAU / drive_omega;
    let mut out: Vec<AlmostPeriod> = Vec::new();
    let mut push = |h: u64, k: u64, kind| {
        if h >= 1 && k >= 1 && h <= h_max && !out.iter().any(|a| a.h == h) {
            out.push(AlmostPeriod {
                t: cycle * h as f64,
                h,
                k,
                kind,
            });
        }
    };
    for &(h, k) in &cf.convergents {
        push(h, k, PeriodKind::Convergent);
    }
    for s in &cf.semiconvergents {
        push(s.h, s.k, PeriodKind::Semiconvergent);
    }
    if cf.exact {
        if let Some(&(h, k)) = cf.convergents.last() {
            if let Some(top) = h_max.checked_div(h) {
                for j in 2..=top {
                    push(j * h, j * k, PeriodKind::Multiple);
                }
            }
        }
    }
    out.sort_by_key(|a| a.h);
    Ok(out)
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Euclidean distance between torus points using nearest images.
pub fn torus_distance(a: TorusPoint, b: TorusPoint) -> f64 {
    wrap(a.theta1 - b.theta1).hypot(wrap(a.theta2 - b.theta2))
}

/// ‖θ⃗_t − θ⃗₀‖ for the linear flow (Ωt + θ₀₁, ω′t + θ₀₂); independent of θ⃗₀.
pub fn torus_return_distance(t: f64, drive_omega: f64, omega_eff: f64) -> f64 {
    wrap(drive_omega * t).hypot(wrap(omega_eff * t))
}

/// Δθ = max over members of the distance between current and initial points.
pub fn ensemble_return_distance(start: &[TorusPoint], now: &[TorusPoint]) -> f64 {
    start
        .iter()
        .zip(now)
        .map(|(a, b)| torus_distance(*a, *b))
        .fold(0.0, f64::max)
}
