//! Threshold curve, zero-Casimir checks, the `(B, C)` region of Type II
//! equilibria and the directional limits at `q = π/2`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::bifurcation::golden_section_extremum;
use crate::equilibria::{threshold_field, type1_pair, type2, type2_discriminant, EquilibriumRecord, Family};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::reduced::casimir;
use crate::state::ReducedState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    /// `(q, B)` pairs.
    pub points: Vec<(f64, f64)>,
    pub minimum: (f64, f64),
}

/// Samples `B(q) = 2√(csc q/(1 − cos q))` and locates its minimum by bisection
/// on the sign of `dB/dq`, which is that of `−(1 + 2 cos q)`.
pub fn threshold_curve(q_samples: &[f64]) -> Result<ThresholdCurve> {
    let mut points = Vec::with_capacity(q_samples.len());
    for &q in q_samples {
        if !(q > 0.0 && q < PI) {
            return Err(Error::OutsideDomain { q });
        }
        points.push((q, threshold_field(q)));
    }
    let slope_sign = |q: f64| -(1.0 + 2.0 * q.cos());
    let (mut lo, mut hi) = (FRAC_PI_2, PI - 1e-3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope_sign(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let q_min = 0.5 * (lo + hi);
    Ok(ThresholdCurve { points, minimum: (q_min, threshold_field(q_min)) })
}

/// Smallest `B ≥ 0` for which [`type2`] returns any record at `q`, by bisection.
pub fn type2_existence_boundary(q: f64, tol: f64) -> Result<f64> {
    let exists = |b: f64| -> Result<bool> { Ok(!type2(q, b)?.is_empty()) };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !exists(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::OutsideDomain { q });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if exists(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `H(q) = C0/2 + cot q + B² cot²(q/2)`: energy over the Casimir level `C0`
/// at rest, decreasing from `+∞` to `−∞` on `(0, π)`.
pub fn image_halfplane_witness(c0: f64, b: f64) -> Result<impl Fn(f64) -> f64> {
    if c0.is_nan() || c0 < 0.0 {
        return Err(Error::InvalidArgument(format!("Casimir level must be nonnegative, got {c0}")));
    }
    Ok(move |q: f64| 0.5 * c0 + 1.0 / q.tan() + b * b / (q / 2.0).tan().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCasimirReport {
    #[serde(rename = "B")]
    pub b: f64,
    /// Minimum of `csc q + 2B² cot²(q/2)` over the samples.
    pub min_value: f64,
    pub argmin: f64,
    pub no_equilibria: bool,
}

/// On `C = 0` an equilibrium would need `csc q + 2B² cot²(q/2) = 0`.
pub fn zero_casimir_no_equilibria(b: f64, q_samples: &[f64]) -> Result<ZeroCasimirReport> {
    if b == 0.0 {
        return Err(Error::InvalidArgument("zero-Casimir check needs B ≠ 0".into()));
    }
    let mut best = (f64::INFINITY, f64::NAN);
    for &q in q_samples {
        let g = 1.0 / q.sin() + 2.0 * b * b / (q / 2.0).tan().powi(2);
        if g < best.0 {
            best = (g, q);
        }
    }
    Ok(ZeroCasimirReport { b, min_value: best.0, argmin: best.1, no_equilibria: best.0 > 0.0 })
}

/// Casimir of the Type II double root at `q`, taken with `B` on the threshold.
fn threshold_casimir(q: f64) -> f64 {
    let b = threshold_field(q);
    let sh2 = (q / 2.0).sin().powi(2);
    let s = ReducedState::at_rest(-2.0 * sh2 * sh2 / q.sin() * b, sh2 * b, q);
    casimir(&s, &SystemParams::identical(b))
}

/// The Type II existence window `[q0, q1]` at field `b`, or `None` below the
/// threshold minimum.
pub fn type2_window(b: f64) -> Option<(f64, f64)> {
    let q_mid = 2.0 * PI / 3.0;
    if type2_discriminant(q_mid, b) <= 0.0 {
        return None;
    }
    let root = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if type2_discriminant(mid, b) > 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    Some((root(q_mid, 1e-9), root(q_mid, PI - 1e-9)))
}

fn branch_casimir(q: f64, b: f64, family: Family) -> Option<f64> {
    type2(q, b).ok()?.into_iter().find(|r| r.family == family && !r.degenerate).map(|r| r.casimir)
}

/// Samples strictly inside `(q0, q1)`, clustered at both ends.
pub(crate) fn window_samples(q0: f64, q1: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let t = k as f64 / (n + 1) as f64;
            q0 + (q1 - q0) * 0.5 * (1.0 - (PI * t).cos())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcRow {
    #[serde(rename = "B")]
    pub b: f64,
    pub q0: f64,
    pub q1: f64,
    /// Minimum of `C` on the minus branch.
    pub c_min: f64,
    pub q_at_min: f64,
    /// Maximum of `C` on the plus branch.
    pub c_max: f64,
    pub q_at_max: f64,
    /// `C` at the window ends, i.e. on the image of the threshold curve.
    pub c_threshold_lo: f64,
    pub c_threshold_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcRegion {
    pub rows: Vec<BcRow>,
    /// Where the region begins: the threshold minimum and its Casimir.
    pub leftmost: (f64, f64),
}

/// For each `B` above the threshold minimum, the Type II window and the
/// Casimir range covered twice (`c_min < C < c_max`).
pub fn bc_region(b_samples: &[f64], n_q: usize) -> Result<BcRegion> {
    let curve = threshold_curve(&[])?;
    let (q_min, b_min) = curve.minimum;
    let mut rows = Vec::new();
    for &b in b_samples {
        let Some((q0, q1)) = type2_window(b) else { continue };
        let qs = window_samples(q0, q1, n_q);
        let extreme = |family: Family, maximize: bool| -> Option<(f64, f64)> {
            let (k, _) = qs
                .iter()
                .enumerate()
                .filter_map(|(k, &q)| branch_casimir(q, b, family).map(|c| (k, if maximize { -c } else { c })))
                .min_by(|x, y| x.1.total_cmp(&y.1))?;
            let lo = qs[k.saturating_sub(1)];
            let hi = qs[(k + 1).min(qs.len() - 1)];
            let f = |q: f64| branch_casimir(q, b, family).unwrap_or(f64::NAN);
            Some(golden_section_extremum(f, lo, hi, maximize, 1e-10))
        };
        let (Some((q_at_min, c_min)), Some((q_at_max, c_max))) =
            (extreme(Family::TypeIIMinus, false), extreme(Family::TypeIIPlus, true))
        else {
            continue;
        };
        rows.push(BcRow {
            b,
            q0,
            q1,
            c_min,
            q_at_min,
            c_max,
            q_at_max,
            c_threshold_lo: threshold_casimir(q0),
            c_threshold_hi: threshold_casimir(q1),
        });
    }
    Ok(BcRegion { rows, leftmost: (b_min, threshold_casimir(q_min)) })
}

/// Type II records at field `b` whose Casimir equals `c`, found by bracketing
/// `C(q) − c` on each branch and bisecting.
pub fn type2_records_with_casimir(b: f64, c: f64, n_q: usize) -> Result<Vec<EquilibriumRecord>> {
    let Some((q0, q1)) = type2_window(b) else { return Ok(Vec::new()) };
    let qs = window_samples(q0, q1, n_q);
    let mut out = Vec::new();
    for family in [Family::TypeIIPlus, Family::TypeIIMinus] {
        let g = |q: f64| branch_casimir(q, b, family).map(|x| x - c);
        for w in qs.windows(2) {
            let (Some(ga), Some(gb)) = (g(w[0]), g(w[1])) else { continue };
            if ga * gb > 0.0 {
                continue;
            }
            let (mut lo, mut hi, glo) = (w[0], w[1], ga);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                match g(mid) {
                    Some(gm) if gm * glo > 0.0 => lo = mid,
                    Some(_) => hi = mid,
                    None => break,
                }
            }
            let q = 0.5 * (lo + hi);
            if let Some(r) = type2(q, b)?.into_iter().find(|r| r.family == family) {
                out.push(r);
            }
        }
    }
    Ok(out)
}

/// Richardson extrapolation to `h = 0` of values at `h0 / 2^k`, assuming an
/// expansion in integer powers of `h`.
pub fn richardson(values: &[f64]) -> f64 {
    let mut table = values.to_vec();
    for j in 1..values.len() {
        let factor = 2f64.powi(j as i32) - 1.0;
        for k in (j..values.len()).rev() {
            table[k] = table[k] + (table[k] - table[k - 1]) / factor;
        }
    }
    *table.last().unwrap_or(&f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideLimits {
    pub m2_plus: f64,
    pub m3_plus: f64,
    pub m2_minus: f64,
    pub m3_minus: f64,
    pub product_plus: f64,
    pub product_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixLimits {
    pub a: f64,
    pub from_above: SideLimits,
    pub from_below: SideLimits,
    /// `((a − √(a²+4))/2, (−√(a²+4) − a)/2)` for the plus family.
    pub expected_plus: (f64, f64),
    /// `m2 m3` at `q = π/2 + 1e-9` with `B = 0.01` held fixed.
    pub witness_product: f64,
    pub note: String,
}

/// Type I `(m2, m3)` for `[plus, minus]` at `(q, b)`. Negative `b` is evaluated
/// at `|b|` and mapped back by time reversal, which negates `m` and exchanges
/// the two labels.
fn type1_via_positive_field(q: f64, b: f64) -> [(f64, f64); 2] {
    if b >= 0.0 {
        type1_pair(q, b)
    } else {
        let [p, m] = type1_pair(q, -b);
        [(-m.0, -m.1), (-p.0, -p.1)]
    }
}

fn side_limits(a: f64, sign: f64, h0: f64, levels: usize) -> SideLimits {
    let mut cols: [Vec<f64>; 4] = Default::default();
    for k in 0..levels {
        let h = sign * h0 / 2f64.powi(k as i32);
        let [(p2, p3), (n2, n3)] = type1_via_positive_field(FRAC_PI_2 + h, a * h);
        for (col, x) in cols.iter_mut().zip([p2, p3, n2, n3]) {
            col.push(x);
        }
    }
    let [m2_plus, m3_plus, m2_minus, m3_minus] = cols.map(|c| richardson(&c));
    SideLimits {
        m2_plus,
        m3_plus,
        m2_minus,
        m3_minus,
        product_plus: m2_plus * m3_plus,
        product_minus: m2_minus * m3_minus,
    }
}

/// Limits of the Type I family as `q → π/2` along `B = a (q − π/2)`, from
/// both sides, using `levels` step halvings from `h0`.
pub fn appendix_limit_study(a: f64, h0: f64, levels: usize) -> Result<AppendixLimits> {
    if !(h0 > 0.0 && h0 < 0.5) || levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < h0 < 0.5 and at least two levels (h0 = {h0}, levels = {levels})"
        )));
    }
    let root = (a * a + 4.0).sqrt();
    let [(w2, w3), _] = type1_pair(FRAC_PI_2 + 1e-9, 0.01);
    Ok(AppendixLimits {
        a,
        from_above: side_limits(a, 1.0, h0, levels),
        from_below: side_limits(a, -1.0, h0, levels),
        expected_plus: ((a - root) / 2.0, (-root - a) / 2.0),
        witness_product: w2 * w3,
        note: "negative B on the approach side evaluated at |B| and mapped by time reversal (labels exchanged)".into(),
    })
}
