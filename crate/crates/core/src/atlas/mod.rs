//! Parameter sweeps over `(q, B)` and the derived curves built from them.

mod bifurcation;
mod curves;

pub use bifurcation::{
    energy_casimir_diagram, golden_section_extremum, Branch, BranchKind, BranchPoint, Cusp, EnergyCasimirDiagram,
    Extremum,
};
pub use curves::{
    appendix_limit_study, bc_region, image_halfplane_witness, richardson, threshold_curve, type2_existence_boundary,
    type2_records_with_casimir, type2_window, zero_casimir_no_equilibria, AppendixLimits, BcRegion, BcRow, SideLimits,
    ThresholdCurve, ZeroCasimirReport,
};

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{solve_general, type1, type2, EquilibriumRecord, Family};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::potential::Potential;
use crate::stability::{hessian_signature, linearize, type1_boundary, Classification};
use crate::tolerance::{Tolerances, RECORD_RESIDUAL};

/// `start:end:count`, inclusive of both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(name: &str, start: f64, end: f64, count: usize) -> Self {
        Self { name: name.to_string(), start, end, count }
    }

    pub fn samples(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    /// Parses `a:b:n`; `name` labels the axis.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let spec: GridRange = text.parse()?;
        Ok(Self::new(name, spec.start, spec.end, spec.count))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GridRange {
    start: f64,
    end: f64,
    count: usize,
}

impl FromStr for GridRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("grid must be start:end:count, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else { return Err(bad()) };
        let start: f64 = a.trim().parse().map_err(|_| bad())?;
        let end: f64 = b.trim().parse().map_err(|_| bad())?;
        let count: usize = n.trim().parse().map_err(|_| bad())?;
        if !start.is_finite() || !end.is_finite() || count == 0 {
            return Err(bad());
        }
        Ok(Self { start, end, count })
    }
}

/// `n` distances in `(0, π)`, geometrically refined towards `0`, `π/2` and `π`.
/// Each of the four quarter-ranges gets `n/4` points at distances
/// `1e-4 … π/4` from its refined end.
pub fn default_q_samples(n: usize) -> Vec<f64> {
    let per = (n / 4).max(2);
    let (lo, hi) = (1e-4f64, FRAC_PI_2 / 2.0);
    let ratio = (hi / lo).powf(1.0 / (per - 1) as f64);
    let offsets: Vec<f64> = (0..per).map(|k| lo * ratio.powi(k as i32)).collect();
    let mut q: Vec<f64> = Vec::with_capacity(4 * per);
    for &d in &offsets {
        q.push(d);
        q.push(FRAC_PI_2 - d);
        q.push(FRAC_PI_2 + d);
        q.push(PI - d);
    }
    q.sort_by(f64::total_cmp);
    q.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    q
}

/// 200 field strengths on `[0.05, 10]`.
pub fn default_b_samples() -> Vec<f64> {
    AxisSpec::new("B", 0.05, 10.0, 200).samples()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellEntry {
    pub family: Family,
    pub m2: f64,
    pub m3: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub residual: f64,
    pub class: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub q: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub entries: Vec<CellEntry>,
    /// Set when the cell could not be solved (e.g. `q = π/2` for Type I).
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasMetadata {
    pub params: SystemParams,
    pub potential: String,
    pub tolerances: Tolerances,
    /// Seconds since the Unix epoch at sweep time.
    pub timestamp: u64,
}

/// A `(q, B)` sweep; `cells` is row-major with `B` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasGrid {
    pub axes: Vec<AxisSpec>,
    pub cells: Vec<Cell>,
    pub metadata: AtlasMetadata,
}

fn now() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Equilibria at one `(q, B)`: closed forms for identical unit particles with
/// the Coulomb-like potential, otherwise the general quartic solver.
pub fn equilibria_at(
    q: f64,
    params: &SystemParams,
    v: &dyn Potential,
    closed_form: bool,
) -> Result<Vec<EquilibriumRecord>> {
    if closed_form {
        let mut out = Vec::new();
        match type1(q, params.b) {
            Ok(pair) => out.extend(pair),
            Err(Error::NearRightAngle { .. }) => {}
            Err(e) => return Err(e),
        }
        out.extend(type2(q, params.b)?);
        Ok(out)
    } else {
        solve_general(q, params, v)
    }
}

fn entry(record: &EquilibriumRecord, v: &dyn Potential) -> Result<CellEntry> {
    let class = linearize(record, v)?.classification;
    Ok(CellEntry {
        family: record.family,
        m2: record.m2(),
        m3: record.m3(),
        h: record.energy,
        c: record.casimir,
        residual: record.residual,
        class,
    })
}

/// Sweeps the `(q, B)` grid in parallel. Every entry is residual-checked;
/// cells where the solver reports no admissible root carry a note instead.
pub fn sweep<V: Potential + Sync>(
    template: &SystemParams,
    v: &V,
    potential_name: &str,
    q_axis: &AxisSpec,
    b_axis: &AxisSpec,
    closed_form: bool,
) -> Result<AtlasGrid> {
    template.validate()?;
    if closed_form && !template.is_identical_unit() {
        return Err(Error::InvalidParams("closed forms need identical unit particles".into()));
    }
    let qs = q_axis.samples();
    let bs = b_axis.samples();
    let points: Vec<(f64, f64)> = qs.iter().flat_map(|&q| bs.iter().map(move |&b| (q, b))).collect();
    let cells: Vec<Cell> = points
        .par_iter()
        .map(|&(q, b)| {
            let params = template.with_field(b);
            let solved = equilibria_at(q, &params, v, closed_form).and_then(|recs| {
                let kept: Vec<&EquilibriumRecord> =
                    recs.iter().filter(|r| r.check_residual(RECORD_RESIDUAL).is_ok()).collect();
                let dropped = recs.len() - kept.len();
                let entries = kept.into_iter().map(|r| entry(r, v)).collect::<Result<Vec<_>>>()?;
                Ok((entries, dropped))
            });
            match solved {
                Ok((entries, 0)) => Ok(Cell { q, b, entries, note: None }),
                Ok((entries, n)) => {
                    Ok(Cell { q, b, entries, note: Some(format!("{n} record(s) above residual tolerance dropped")) })
                }
                Err(e @ (Error::NoAdmissibleRoot { .. } | Error::NearRightAngle { .. })) => {
                    Ok(Cell { q, b, entries: Vec::new(), note: Some(e.to_string()) })
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    Ok(AtlasGrid {
        axes: vec![q_axis.clone(), b_axis.clone()],
        cells,
        metadata: AtlasMetadata {
            params: *template,
            potential: potential_name.to_string(),
            tolerances: Tolerances::default(),
            timestamp: now(),
        },
    })
}

impl AtlasGrid {
    pub fn entry_count(&self) -> usize {
        self.cells.iter().map(|c| c.entries.len()).sum()
    }

    /// One row per entry after a `#` metadata line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let m = &self.metadata;
        writeln!(
            out,
            "# params mu1={} mu2={} e1={} e2={} B=swept potential={} residual_tol={:e} timestamp={}",
            m.params.mu1, m.params.mu2, m.params.e1, m.params.e2, m.potential, m.tolerances.residual, m.timestamp
        )?;
        writeln!(out, "q,B,family,m2,m3,H,C,residual,class")?;
        for cell in &self.cells {
            for e in &cell.entries {
                writeln!(
                    out,
                    "{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.3e},{}",
                    cell.q, cell.b, e.family, e.m2, e.m3, e.h, e.c, e.residual, e.class
                )?;
            }
        }
        Ok(())
    }
}

/// One row of a stability map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub q: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub family: Family,
    pub a: f64,
    #[serde(rename = "b")]
    pub coeff_b: f64,
    pub class: Classification,
    pub n_plus: Option<usize>,
    pub n_minus: Option<usize>,
    pub n_zero: Option<usize>,
}

/// Classifies every closed-form equilibrium on the grid, optionally keeping
/// only one family group.
pub fn stability_map<V: Potential + Sync>(
    qs: &[f64],
    bs: &[f64],
    v: &V,
    keep: fn(&Family) -> bool,
) -> Result<Vec<StabilityRow>> {
    stability_rows(&SystemParams::identical(1.0), qs, bs, v, true, keep)
}

/// Stability rows for arbitrary parameters. Cells without admissible roots
/// and records above the residual tolerance are skipped.
pub fn stability_rows<V: Potential + Sync>(
    template: &SystemParams,
    qs: &[f64],
    bs: &[f64],
    v: &V,
    closed_form: bool,
    keep: fn(&Family) -> bool,
) -> Result<Vec<StabilityRow>> {
    template.validate()?;
    let points: Vec<(f64, f64)> = qs.iter().flat_map(|&q| bs.iter().map(move |&b| (q, b))).collect();
    let rows: Vec<Vec<StabilityRow>> = points
        .par_iter()
        .map(|&(q, b)| {
            let params = template.with_field(b);
            let recs = match equilibria_at(q, &params, v, closed_form) {
                Ok(recs) => recs,
                Err(Error::NoAdmissibleRoot { .. } | Error::NearRightAngle { .. }) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            };
            recs.iter()
                .filter(|r| keep(&r.family) && r.check_residual(RECORD_RESIDUAL).is_ok())
                .map(|r| {
                    let rep = linearize(r, v)?;
                    let sig = hessian_signature(r, v).ok();
                    Ok(StabilityRow {
                        q,
                        b,
                        family: r.family,
                        a: rep.char_coeffs.0,
                        coeff_b: rep.char_coeffs.1,
                        class: rep.classification,
                        n_plus: sig.map(|s| s.n_plus),
                        n_minus: sig.map(|s| s.n_minus),
                        n_zero: sig.map(|s| s.n_zero),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_stability_csv<W: Write>(rows: &[StabilityRow], mut out: W) -> io::Result<()> {
    writeln!(out, "q,B,family,a,b,class,n_plus,n_minus,n_zero")?;
    let opt = |x: Option<usize>| x.map(|n| n.to_string()).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{:.12e},{:.12e},{},{:.12e},{:.12e},{},{},{},{}",
            r.q,
            r.b,
            r.family,
            r.a,
            r.coeff_b,
            r.class,
            opt(r.n_plus),
            opt(r.n_minus),
            opt(r.n_zero)
        )?;
    }
    Ok(())
}

/// Field strength where Type I classification flips at fixed `q`, by
/// bisection on `[lo, hi]` (`lo` unstable, `hi` stable).
pub fn type1_flip_by_bisection(q: f64, v: &dyn Potential, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let report = |b: f64| linearize(&type1(q, b)?[0], v);
    if report(lo)?.classification != Classification::LinearlyUnstable
        || report(hi)?.classification != Classification::LinearlyStable
    {
        return Err(Error::InvalidArgument(format!("no Type I stability flip bracketed at q = {q} in [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let r = report(mid)?;
        // The relative tolerance makes a band around the flip Degenerate;
        // inside it the sign of the constant coefficient still decides.
        let stable = match r.classification {
            Classification::LinearlyStable => true,
            Classification::LinearlyUnstable => false,
            Classification::Degenerate => r.char_coeffs.1 < 0.0,
        };
        if stable {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type1BoundaryRow {
    pub q: f64,
    pub boundary: f64,
    pub bisected: f64,
}

/// Closed-form Type I stability boundary next to its bisected counterpart.
pub fn type1_stability_table<V: Potential + Sync>(qs: &[f64], v: &V) -> Result<Vec<Type1BoundaryRow>> {
    qs.par_iter()
        .map(|&q| {
            let boundary = type1_boundary(q)?;
            let bisected = type1_flip_by_bisection(q, v, 0.5 * boundary, 2.0 * boundary + 1.0, 1e-10)?;
            Ok(Type1BoundaryRow { q, boundary, bisected })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::cot_potential;

    #[test]
    fn axis_parsing() {
        let a = AxisSpec::parse("q", "0.1:3.0:30").unwrap();
        assert_eq!(a.samples().len(), 30);
        assert_eq!(a.samples()[29], 3.0);
        assert!(AxisSpec::parse("q", "0.1:3.0").is_err());
        assert!(AxisSpec::parse("q", "a:b:3").is_err());
        assert!(AxisSpec::parse("q", "0:1:0").is_err());
    }

    #[test]
    fn default_samples_are_refined() {
        let q = default_q_samples(400);
        assert_eq!(q.len(), 400);
        assert!(q.windows(2).all(|w| w[1] > w[0]));
        assert!(q[0] > 0.0 && q[0] < 2e-4 && *q.last().unwrap() < PI);
        let near_right = q.iter().filter(|x| (*x - FRAC_PI_2).abs() < 1e-2).count();
        let mid = q.iter().filter(|x| (*x - 0.8).abs() < 1e-2).count();
        assert!(near_right > 10 * mid.max(1));
        assert_eq!(default_b_samples().len(), 200);
    }

    #[test]
    fn sweep_counts_and_csv() {
        let params = SystemParams::identical(1.0);
        let v = cot_potential(&params);
        let grid = sweep(&params, &v, "cot", &AxisSpec::new("q", 0.5, 2.5, 5), &AxisSpec::new("B", 0.5, 3.0, 4), true)
            .unwrap();
        assert_eq!(grid.cells.len(), 20);
        for cell in &grid.cells {
            let n1 = cell.entries.iter().filter(|e| e.family.is_type1()).count();
            assert_eq!(n1, 2);
            let n2 = cell.entries.iter().filter(|e| e.family.is_type2()).count();
            let d = crate::equilibria::type2_discriminant(cell.q, cell.b);
            assert_eq!(n2, if d > 0.0 { 2 } else { 0 });
        }
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# params"));
        assert_eq!(text.lines().count(), 2 + grid.entry_count());
        let back: AtlasGrid = serde_json::from_str(&serde_json::to_string(&grid).unwrap()).unwrap();
        assert_eq!(back, grid);
    }

    #[test]
    fn general_sweep_has_equilibria() {
        let params = SystemParams::new(1.0, 2.0, 1.0, 0.5, 1.0).unwrap();
        let v = cot_potential(&params);
        let grid = sweep(&params, &v, "cot", &AxisSpec::new("q", 0.4, 2.6, 4), &AxisSpec::new("B", 0.5, 4.0, 3), false)
            .unwrap();
        assert!(grid.cells.iter().all(|c| !c.entries.is_empty()));
    }

    #[test]
    fn type1_table_matches_boundary() {
        let v = cot_potential(&SystemParams::identical(1.0));
        for row in type1_stability_table(&[0.4, 0.9, 1.3], &v).unwrap() {
            assert!((row.boundary - row.bisected).abs() < 1e-6, "{row:?}");
        }
    }

    #[test]
    fn stability_map_rows() {
        let v = cot_potential(&SystemParams::identical(1.0));
        let rows = stability_map(&[2.0, 2.2], &[2.5, 3.0], &v, Family::is_type2).unwrap();
        assert!(rows.iter().all(|r| r.family.is_type2()));
        assert_eq!(rows.len(), 8);
        let mut buf = Vec::new();
        write_stability_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("q,B,family,a,b,class,n_plus,n_minus,n_zero\n"));
    }
}
