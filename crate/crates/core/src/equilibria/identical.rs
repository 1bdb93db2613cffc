//! Closed-form families for identical unit particles (`μ = e = 1`, `V = cot q`).

use std::f64::consts::{FRAC_PI_2, PI};

use super::{EquilibriumRecord, Family};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::potential::cot_potential;
use crate::tolerance::Tolerances;

fn check_q(q: f64) -> Result<()> {
    let guard = Tolerances::default().q_guard;
    if !(q.is_finite() && q >= guard && q <= PI - guard) {
        return Err(Error::OutsideDomain { q });
    }
    Ok(())
}

/// `(m2, m3)` of the two Type I solutions, `+` first.
pub(crate) fn type1_pair(q: f64, b: f64) -> [(f64, f64); 2] {
    let (sh, ch) = (q / 2.0).sin_cos();
    let (s, c) = q.sin_cos();
    let t = s / c;
    let root = (4.0 / sh + b * b / ch * s * s * t * t).sqrt();
    let den = sh - (1.5 * q).sin();
    let lead = 2.0 * b * sh.powi(3) * s;
    let side = ch.powf(1.5) * c * root;
    let tilt = b * s * t;
    let lean = ch.sqrt() * root;
    [((lead + side) / den, 0.5 * (tilt - lean)), ((lead - side) / den, 0.5 * (tilt + lean))]
}

/// Type I relative equilibria of identical particles, `[plus, minus]`.
/// Defined for every `q ≠ π/2`; the sign of `b` is not restricted.
pub fn type1(q: f64, b: f64) -> Result<[EquilibriumRecord; 2]> {
    check_q(q)?;
    let tol = Tolerances::default().right_angle;
    if (q - FRAC_PI_2).abs() < tol {
        return Err(Error::NearRightAngle { q, tol });
    }
    let params = SystemParams::identical(b);
    let v = cot_potential(&params);
    let [(p2, p3), (n2, n3)] = type1_pair(q, b);
    Ok([
        EquilibriumRecord::evaluate(Family::TypeIPlus, p2, p3, q, &params, &v, false),
        EquilibriumRecord::evaluate(Family::TypeIMinus, n2, n3, q, &params, &v, false),
    ])
}

/// `B² − 2 csc²(q/2) csc q`; Type II equilibria exist where this is nonnegative.
pub fn type2_discriminant(q: f64, b: f64) -> f64 {
    b * b - 2.0 / ((q / 2.0).sin().powi(2) * q.sin())
}

/// Threshold field strength `2 √(csc q / (1 − cos q))` above which Type II
/// equilibria exist.
pub fn threshold_field(q: f64) -> f64 {
    2.0 * (1.0 / (q.sin() * (1.0 - q.cos()))).sqrt()
}

/// Type II relative equilibria of identical particles: two records above the
/// threshold, one degenerate record on it (`|discriminant| ≤ 1e-12`), none below.
pub fn type2(q: f64, b: f64) -> Result<Vec<EquilibriumRecord>> {
    check_q(q)?;
    let params = SystemParams::identical(b);
    let v = cot_potential(&params);
    let d = type2_discriminant(q, b);
    let tol = Tolerances::default().discriminant;
    let sh2 = (q / 2.0).sin().powi(2);
    let record = |family, k: f64, degenerate| {
        let m2 = -2.0 * sh2 * sh2 / q.sin() * k;
        let m3 = sh2 * k;
        EquilibriumRecord::evaluate(family, m2, m3, q, &params, &v, degenerate)
    };
    if d.abs() <= tol {
        Ok(vec![record(Family::TypeIIPlus, b, true)])
    } else if d < 0.0 {
        Ok(Vec::new())
    } else {
        let r = d.sqrt();
        Ok(vec![record(Family::TypeIIPlus, b + r, false), record(Family::TypeIIMinus, b - r, false)])
    }
}

/// Casimir along the Type I family,
/// `cos(q/2)/sin³(q/2) · (1 + ½ B² sin q tan² q)`.
pub fn casimir_on_type1(q: f64, b: f64) -> Result<f64> {
    check_q(q)?;
    let tol = Tolerances::default().right_angle;
    if (q - FRAC_PI_2).abs() < tol {
        return Err(Error::NearRightAngle { q, tol });
    }
    let (sh, ch) = (q / 2.0).sin_cos();
    Ok(ch / sh.powi(3) * (1.0 + 0.5 * b * b * q.sin() * q.tan().powi(2)))
}
