//! Equilibria for arbitrary masses, charges and potential.
//!
//! Away from `q = π/2` the equilibrium equations reduce to a quartic in `m3`
//! (obtained by squaring a branch equation containing `√A`); `m2` then follows
//! from `m3`. At `q = π/2` the system is solved directly as a quadratic.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{polish, sort_records, EquilibriumRecord, Family};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::poly;
use crate::potential::Potential;
use crate::tolerance::{Tolerances, RECORD_RESIDUAL};

/// Quartic in `m3`, ascending coefficients `[c0, c1, c2, c3, c4]`.
///
/// `c4 = −4μ1 csc⁴q < 0` and `c0 = 4μ1μ2²V′² > 0`, so at least one positive
/// real root exists.
pub fn quartic_coefficients(q: f64, params: &SystemParams, v: &dyn Potential) -> [f64; 5] {
    let SystemParams { mu1, mu2, e1, e2, b } = *params;
    let vp = v.derivative(q);
    let (s, c) = q.sin_cos();
    let csc = 1.0 / s;
    let sec = 1.0 / c;
    let cos2 = (2.0 * q).cos();
    let c4 = -4.0 * mu1 * csc.powi(4);
    let c3 = 4.0 * b * csc.powi(4) * (e1 * mu2 - e2 * mu1 * cos2 * sec);
    let c2 = 2.0
        * csc.powi(3)
        * sec
        * (2.0 * b * b * e2 * s * (e2 * mu1 * c - e1 * mu2) - 2.0 * mu2 * vp * (mu2 + mu1 * cos2));
    let c1 = 4.0 * b * mu2 * csc * vp * (2.0 * e2 * mu1 - e1 * mu2 * sec);
    let c0 = 4.0 * mu1 * mu2 * mu2 * vp * vp;
    [c0, c1, c2, c3, c4]
}

/// Radicand `A(m3)`; real `m2` requires `A ≥ 0`.
fn radicand(m3: f64, q: f64, params: &SystemParams) -> f64 {
    let SystemParams { mu1, mu2, e1, e2, b } = *params;
    let (s, c) = q.sin_cos();
    let cot = c / s;
    let csc = 1.0 / s;
    let inner = -mu2 * (b * e1 + m3) + mu1 * m3 * csc * csc + mu2 * m3 * cot * cot;
    4.0 * mu2 * m3 * cot * csc * (mu2 * c * (b * e1 + m3) - b * e2 * mu1) + inner * inner
}

/// Un-squared branch equation with sign `branch`, and the magnitude of its
/// terms for a relative acceptance test.
fn branch_equation(m3: f64, root_a: f64, branch: f64, q: f64, params: &SystemParams, vp: f64) -> (f64, f64) {
    let SystemParams { mu1, mu2, e1, e2, b } = *params;
    let (s, c) = q.sin_cos();
    let csc = 1.0 / s;
    let lead = m3 * csc / c;
    let terms = [b * e1 * mu2, -2.0 * b * e2 * mu1 * c, -2.0 * mu1 * m3, m3 * (mu1 + mu2) * csc * csc, branch * root_a];
    let value = lead * terms.iter().sum::<f64>() - 2.0 * mu1 * mu2 * vp;
    let scale = lead.abs() * terms.iter().map(|t| t.abs()).sum::<f64>() + (2.0 * mu1 * mu2 * vp).abs();
    (value, scale)
}

fn m2_from_m3(m3: f64, root_a: f64, sign: f64, q: f64, params: &SystemParams) -> f64 {
    let SystemParams { mu1, mu2, e1, b, .. } = *params;
    let (s, c) = q.sin_cos();
    let cot = c / s;
    let csc2 = 1.0 / (s * s);
    (s / c) / (2.0 * mu2) * (m3 * (mu1 * csc2 + mu2 * cot * cot - mu2) - b * e1 * mu2 + sign * root_a)
}

fn validate(q: f64, params: &SystemParams, v: &dyn Potential) -> Result<()> {
    params.validate()?;
    let tol = Tolerances::default();
    if !(q.is_finite() && q >= tol.q_guard && q <= PI - tol.q_guard) {
        return Err(Error::OutsideDomain { q });
    }
    let vp = v.derivative(q);
    if vp == 0.0 || !vp.is_finite() {
        return Err(Error::InvalidPotential(format!("V'({q}) = {vp}; equilibrium search needs V' != 0")));
    }
    Ok(())
}

/// Removes near-duplicate records (merged double roots), flagging survivors
/// as degenerate.
fn merge_duplicates(mut records: Vec<EquilibriumRecord>) -> Vec<EquilibriumRecord> {
    records.sort_by(|a, b| a.state.m3.total_cmp(&b.state.m3));
    let mut out: Vec<EquilibriumRecord> = Vec::with_capacity(records.len());
    for r in records {
        if let Some(last) = out.last_mut() {
            let scale = 1.0 + last.state.m2.abs() + last.state.m3.abs();
            let gap = (r.state.m2 - last.state.m2).abs() + (r.state.m3 - last.state.m3).abs();
            if gap <= 1e-6 * scale {
                if r.residual < last.residual {
                    *last = EquilibriumRecord { degenerate: true, ..r };
                } else {
                    last.degenerate = true;
                }
                continue;
            }
        }
        out.push(r);
    }
    out
}

/// All relative equilibria at distance `q` for general parameters, found
/// through the `m3` quartic.
///
/// Roots are taken from the companion matrix, polished, filtered by `A ≥ 0`
/// and by the un-squared branch equation (squaring introduces spurious roots),
/// then `m2` is recovered and the pair is Newton-polished on the full
/// equilibrium system. Every returned record has residual `≤ 1e-9`.
pub fn solve_general(q: f64, params: &SystemParams, v: &dyn Potential) -> Result<Vec<EquilibriumRecord>> {
    validate(q, params, v)?;
    let tol = Tolerances::default();
    if (q - FRAC_PI_2).abs() < tol.right_angle {
        return Err(Error::NearRightAngle { q, tol: tol.right_angle });
    }
    let vp = v.derivative(q);
    let coeffs = quartic_coefficients(q, params, v);
    let dcoeffs = poly::derivative(&coeffs);

    let mut found = Vec::new();
    for z in poly::roots(&coeffs) {
        if z.im.abs() > 1e-6 * (1.0 + z.norm()) {
            continue;
        }
        let mut m3 = z.re;
        for _ in 0..3 {
            let d = poly::eval(&dcoeffs, m3);
            if d == 0.0 {
                break;
            }
            let step = poly::eval(&coeffs, m3) / d;
            if !step.is_finite() || step.abs() > 1e-3 * (1.0 + m3.abs()) {
                break;
            }
            m3 -= step;
        }

        let mut a = radicand(m3, q, params);
        let a_scale = 1.0 + m3 * m3 * (1.0 / q.sin().powi(4) + 1.0);
        if a < -tol.radicand * a_scale {
            continue;
        }
        a = a.max(0.0);
        let root_a = a.sqrt();
        for branch in [1.0, -1.0] {
            let (value, scale) = branch_equation(m3, root_a, branch, q, params, vp);
            if value.abs() > tol.branch * scale.max(1.0) {
                continue;
            }
            // The m2 formula carries the opposite sign of the branch that the
            // un-squared m3 equation satisfies.
            let m2 = m2_from_m3(m3, root_a, -branch, q, params);
            let (m2, m3) = polish(m2, m3, q, params, v);
            let rec = EquilibriumRecord::evaluate(Family::General, m2, m3, q, params, v, false);
            if rec.residual <= RECORD_RESIDUAL {
                found.push(rec);
            }
        }
    }

    let mut records = merge_duplicates(found);
    if records.is_empty() {
        return Err(Error::NoAdmissibleRoot { q });
    }
    sort_records(&mut records);
    Ok(records)
}

/// One-parameter family `m2·m3 = product` at `q = π/2`, arising for `B = 0`
/// with equal masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RightAngleFamily {
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RightAngleSolution {
    pub records: Vec<EquilibriumRecord>,
    pub family: Option<RightAngleFamily>,
    /// `B⁴e1²e2² + 2B²e1e2(μ1+μ2)V′(π/2) + (μ1−μ2)²V′(π/2)²`.
    pub discriminant: f64,
}

/// Equilibria at `q = π/2`.
///
/// With `W = V′(π/2)` the two equations reduce to the quadratic
/// `−(Be2μ1/μ2) m3² + (W(μ2−μ1) + B²e1e2) m3 + WBe1μ2 = 0` and
/// `m2 = −μ1W/m3 − Be2μ1/μ2`. For `B = 0` the quadratic degenerates: equal
/// masses give the family `m2·m3 = −μ1W`, unequal masses give nothing.
pub fn solve_right_angle(params: &SystemParams, v: &dyn Potential) -> Result<RightAngleSolution> {
    validate(FRAC_PI_2, params, v)?;
    let SystemParams { mu1, mu2, e1, e2, b } = *params;
    let w = v.derivative(FRAC_PI_2);
    let disc = b.powi(4) * e1 * e1 * e2 * e2 + 2.0 * b * b * e1 * e2 * (mu1 + mu2) * w + (mu1 - mu2).powi(2) * w * w;

    if b == 0.0 {
        let family = (mu1 == mu2).then_some(RightAngleFamily { product: -mu1 * w });
        return Ok(RightAngleSolution { records: Vec::new(), family, discriminant: disc });
    }

    let a2 = -b * e2 * mu1 / mu2;
    let a1 = w * (mu2 - mu1) + b * b * e1 * e2;
    let a0 = w * b * e1 * mu2;
    let scale = (a1 * a1).max((4.0 * a2 * a0).abs()).max(f64::MIN_POSITIVE);
    let tol = Tolerances::default().discriminant;

    let roots: Vec<(f64, bool)> = if disc.abs() <= tol * scale {
        vec![(-a1 / (2.0 * a2), true)]
    } else if disc < 0.0 {
        Vec::new()
    } else {
        // Cancellation-free pair.
        let t = -0.5 * (a1 + a1.signum() * disc.sqrt());
        vec![(t / a2, false), (a0 / t, false)]
    };

    let mut records = Vec::new();
    for (m3, degenerate) in roots {
        if m3 == 0.0 || !m3.is_finite() {
            continue;
        }
        let m2 = -mu1 * w / m3 - b * e2 * mu1 / mu2;
        let (m2, m3) = polish(m2, m3, FRAC_PI_2, params, v);
        let rec = EquilibriumRecord::evaluate(Family::RightAngle, m2, m3, FRAC_PI_2, params, v, degenerate);
        if rec.residual <= RECORD_RESIDUAL {
            records.push(rec);
        }
    }
    sort_records(&mut records);
    Ok(RightAngleSolution { records, family: None, discriminant: disc })
}
