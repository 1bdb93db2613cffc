//! Energy–Casimir image of the identical-particle equilibria at fixed `B`.
//!
//! Each family traces a curve `q ↦ (C, H)`. Its cusps sit where `C` has an
//! extremum along the branch; those are the degenerate equilibria where the
//! linear stability class changes.

use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::curves::{type2_window, window_samples};
use crate::equilibria::{type1, type2, EquilibriumRecord, Family};
use crate::error::{Error, Result};
use crate::potential::cot_potential;
use crate::stability::{linearize, Classification};
use crate::tolerance::RECORD_RESIDUAL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BranchKind {
    /// Type I with `q < π/2`. Both labels give the same `(C, H)`.
    TypeIAcute,
    TypeIObtuse,
    TypeIIPlus,
    TypeIIMinus,
}

impl BranchKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchKind::TypeIAcute => "TypeI_acute",
            BranchKind::TypeIObtuse => "TypeI_obtuse",
            BranchKind::TypeIIPlus => "TypeII_plus",
            BranchKind::TypeIIMinus => "TypeII_minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub q: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub class: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub kind: BranchKind,
    /// Sorted by `q`.
    pub points: Vec<BranchPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cusp {
    pub branch: BranchKind,
    pub q: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub extremum: Extremum,
    /// Samples bracketing the cusp.
    pub cell: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCasimirDiagram {
    #[serde(rename = "B")]
    pub b: f64,
    pub branches: Vec<Branch>,
    pub cusps: Vec<Cusp>,
    /// `(branch, q_left, q_right)` where the stability class changes between
    /// consecutive samples.
    pub transitions: Vec<(BranchKind, f64, f64)>,
}

/// `None` for records whose residual fails the record tolerance (extreme
/// `q`, where `C` reaches 1e12 and absolute residuals lose meaning).
/// Extra samples inside the Type II window, clustered towards its ends where
/// the loop closes.
const WINDOW_SAMPLES: usize = 200;

fn point(r: &EquilibriumRecord) -> Result<Option<BranchPoint>> {
    if r.check_residual(RECORD_RESIDUAL).is_err() {
        return Ok(None);
    }
    let v = cot_potential(&r.params);
    Ok(Some(BranchPoint { q: r.q(), c: r.casimir, h: r.energy, class: linearize(r, &v)?.classification }))
}

/// Vertex of the parabola through three points (abscissae need not be equally
/// spaced), and the parabola's value there.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d12 - d01) / (x[2] - x[0]);
    if curv == 0.0 {
        return (x[1], y[1]);
    }
    let xv = 0.5 * (x[0] + x[1]) - d01 / (2.0 * curv);
    let yv = y[0] + d01 * (xv - x[0]) + curv * (xv - x[0]) * (xv - x[1]);
    (xv, yv)
}

fn interpolate(x: [f64; 3], y: [f64; 3], at: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        let mut l = 1.0;
        for j in 0..3 {
            if i != j {
                l *= (at - x[j]) / (x[i] - x[j]);
            }
        }
        s += y[i] * l;
    }
    s
}

fn detect_cusps(branch: &Branch) -> Vec<Cusp> {
    let p = &branch.points;
    let mut out = Vec::new();
    for i in 1..p.len().saturating_sub(1) {
        let d1 = p[i].c - p[i - 1].c;
        let d2 = p[i + 1].c - p[i].c;
        if d1 * d2 >= 0.0 {
            continue;
        }
        let x = [p[i - 1].q, p[i].q, p[i + 1].q];
        let (q, c) = parabola_vertex(x, [p[i - 1].c, p[i].c, p[i + 1].c]);
        let h = interpolate(x, [p[i - 1].h, p[i].h, p[i + 1].h], q);
        let cell = if q < p[i].q { (p[i - 1].q, p[i].q) } else { (p[i].q, p[i + 1].q) };
        out.push(Cusp {
            branch: branch.kind,
            q,
            c,
            h,
            extremum: if d1 < 0.0 { Extremum::Min } else { Extremum::Max },
            cell,
        });
    }
    out
}

/// `(C, H)` of every identical-particle equilibrium at field `b` over the
/// given `q` samples, split into branches, with cusps and stability changes.
pub fn energy_casimir_diagram(b: f64, q_samples: &[f64]) -> Result<EnergyCasimirDiagram> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("energy-Casimir diagram needs B > 0, got {b}")));
    }
    let mut qs = q_samples.to_vec();
    if let Some((q0, q1)) = type2_window(b) {
        qs.extend(window_samples(q0, q1, WINDOW_SAMPLES));
    }
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    let mut branches: Vec<Branch> =
        [BranchKind::TypeIAcute, BranchKind::TypeIObtuse, BranchKind::TypeIIPlus, BranchKind::TypeIIMinus]
            .into_iter()
            .map(|kind| Branch { kind, points: Vec::new() })
            .collect();
    for &q in &qs {
        match type1(q, b) {
            Ok([plus, _]) => {
                let k = if q < FRAC_PI_2 { 0 } else { 1 };
                branches[k].points.extend(point(&plus)?);
            }
            Err(Error::NearRightAngle { .. }) => {}
            Err(e) => return Err(e),
        }
        for r in type2(q, b)? {
            match (r.family, r.degenerate) {
                (_, true) => {}
                (Family::TypeIIPlus, _) => branches[2].points.extend(point(&r)?),
                _ => branches[3].points.extend(point(&r)?),
            }
        }
    }
    let cusps = branches.iter().flat_map(detect_cusps).collect();
    let mut transitions = Vec::new();
    // Degenerate samples (ill-conditioned ends, exact cusps) are skipped so a
    // transition is a change between the two definite classes.
    for br in &branches {
        let definite: Vec<&BranchPoint> = br.points.iter().filter(|p| p.class != Classification::Degenerate).collect();
        for w in definite.windows(2) {
            if w[0].class != w[1].class {
                transitions.push((br.kind, w[0].q, w[1].q));
            }
        }
    }
    Ok(EnergyCasimirDiagram { b, branches, cusps, transitions })
}

impl EnergyCasimirDiagram {
    /// `kind,branch,q,C,H,class`; cusp rows carry `min`/`max` in the last column.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# B={}", self.b)?;
        writeln!(out, "kind,branch,q,C,H,class")?;
        for br in &self.branches {
            for p in &br.points {
                writeln!(out, "point,{},{:.12e},{:.12e},{:.12e},{}", br.kind.as_str(), p.q, p.c, p.h, p.class)?;
            }
        }
        for c in &self.cusps {
            let tag = match c.extremum {
                Extremum::Min => "min",
                Extremum::Max => "max",
            };
            writeln!(out, "cusp,{},{:.12e},{:.12e},{:.12e},{}", c.branch.as_str(), c.q, c.c, c.h, tag)?;
        }
        Ok(())
    }
}

/// Golden-section search for an extremum of a unimodal `f` on `[a, b]`.
/// Returns `(x, f(x))`.
pub fn golden_section_extremum(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, maximize: bool, tol: f64) -> (f64, f64) {
    let g = |x: f64| if maximize { -f(x) } else { f(x) };
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::default_q_samples;
    use crate::equilibria::casimir_on_type1;

    #[test]
    fn three_cusps_at_b_2_5() {
        let d = energy_casimir_diagram(2.5, &default_q_samples(400)).unwrap();
        assert_eq!(d.cusps.len(), 3, "{:?}", d.cusps);
        let on = |k: BranchKind| d.cusps.iter().filter(|c| c.branch == k).count();
        assert_eq!(on(BranchKind::TypeIAcute), 1);
        assert_eq!(on(BranchKind::TypeIObtuse), 0);
        assert_eq!(on(BranchKind::TypeIIPlus), 1);
        assert_eq!(on(BranchKind::TypeIIMinus), 1);
        // Every cusp is a stability change and vice versa, within one cell.
        assert_eq!(d.transitions.len(), 3, "{:?}", d.transitions);
        for c in &d.cusps {
            assert!(d.transitions.iter().any(|t| t.0 == c.branch && t.1 <= c.cell.1 && t.2 >= c.cell.0), "{c:?}");
        }
        // Obtuse Type I sweeps C from 0 (q → π, H → −∞) to ∞ (q → π/2).
        let obtuse = &d.branches[1].points;
        assert!(obtuse.first().unwrap().c > 1e6 && obtuse.last().unwrap().c < 1e-3);
        assert!(obtuse.last().unwrap().h < -1e3);
    }

    #[test]
    fn cusps_match_golden_section_at_b_1_9() {
        let b = 1.9;
        let d = energy_casimir_diagram(b, &default_q_samples(400)).unwrap();
        let branch_c = |fam: Family| {
            move |q: f64| {
                type2(q, b).unwrap().into_iter().find(|r| r.family == fam).map(|r| r.casimir).unwrap_or(f64::NAN)
            }
        };
        for (kind, fam, maximize) in
            [(BranchKind::TypeIIMinus, Family::TypeIIMinus, false), (BranchKind::TypeIIPlus, Family::TypeIIPlus, true)]
        {
            let c = d.cusps.iter().find(|c| c.branch == kind).unwrap();
            let (q, val) = golden_section_extremum(branch_c(fam), c.cell.0 - 0.1, c.cell.1 + 0.1, maximize, 1e-10);
            assert!((q - c.q).abs() < 1e-2, "{kind:?} {q} vs {}", c.q);
            assert!((val - c.c).abs() < 1e-4 * val, "{kind:?} {val} vs {}", c.c);
        }
        let acute = d.cusps.iter().find(|c| c.branch == BranchKind::TypeIAcute).unwrap();
        let (q, val) = golden_section_extremum(|q| casimir_on_type1(q, b).unwrap(), 0.2, 1.5, false, 1e-10);
        assert!((q - acute.q).abs() < 1e-2 && (val - acute.c).abs() < 1e-4 * val);
    }

    #[test]
    fn parabola_vertex_is_exact_for_quadratics() {
        let f = |x: f64| 2.0 * (x - 0.3) * (x - 0.3) + 1.0;
        let x = [0.1, 0.25, 0.7];
        let (xv, yv) = parabola_vertex(x, x.map(f));
        assert!((xv - 0.3).abs() < 1e-14 && (yv - 1.0).abs() < 1e-14);
    }

    #[test]
    fn csv_has_cusp_rows() {
        let d = energy_casimir_diagram(2.5, &default_q_samples(400)).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("cusp,")).count(), 3);
    }
}
