//! Interaction potentials `V(q)` of the geodesic inter-particle distance.
//!
//! Equilibrium searches only need `V` and `V'`; the Hessian signature also
//! needs `V''`, which defaults to a central difference of `V'`.

use std::fmt;

use crate::error::{Error, Result};
use crate::params::SystemParams;

pub trait Potential: Send + Sync + fmt::Debug {
    fn value(&self, q: f64) -> f64;

    fn derivative(&self, q: f64) -> f64;

    fn second_derivative(&self, q: f64) -> f64 {
        let h = 1e-5 * q.abs().max(1.0);
        (self.derivative(q + h) - self.derivative(q - h)) / (2.0 * h)
    }

    fn name(&self) -> String;
}

impl<P: Potential + ?Sized> Potential for Box<P> {
    fn value(&self, q: f64) -> f64 {
        (**self).value(q)
    }

    fn derivative(&self, q: f64) -> f64 {
        (**self).derivative(q)
    }

    fn second_derivative(&self, q: f64) -> f64 {
        (**self).second_derivative(q)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// `V(q) = k·cot q` with coupling `k = e1·e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CotPotential {
    pub coupling: f64,
}

impl CotPotential {
    pub fn new(coupling: f64) -> Self {
        Self { coupling }
    }
}

/// The charge-weighted cotangent potential `e1·e2·cot q`.
pub fn cot_potential(params: &SystemParams) -> CotPotential {
    CotPotential::new(params.e1 * params.e2)
}

impl Potential for CotPotential {
    fn value(&self, q: f64) -> f64 {
        self.coupling / q.tan()
    }

    fn derivative(&self, q: f64) -> f64 {
        let s = q.sin();
        -self.coupling / (s * s)
    }

    fn second_derivative(&self, q: f64) -> f64 {
        let s = q.sin();
        2.0 * self.coupling * q.cos() / (s * s * s)
    }

    fn name(&self) -> String {
        if self.coupling == 1.0 {
            "cot".into()
        } else {
            format!("{}*cot", self.coupling)
        }
    }
}

/// `V ≡ 0`; only meaningful for free-motion checks, never for equilibria.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn value(&self, _q: f64) -> f64 {
        0.0
    }

    fn derivative(&self, _q: f64) -> f64 {
        0.0
    }

    fn second_derivative(&self, _q: f64) -> f64 {
        0.0
    }

    fn name(&self) -> String {
        "zero".into()
    }
}

/// `V₁(q) = V(π − q)`, the potential seen after the opposite-charge involution
/// (for `V = k·cot q` this is `−k·cot q`).
#[derive(Debug, Clone)]
pub struct Reflected<P> {
    pub inner: P,
}

impl<P: Potential> Potential for Reflected<P> {
    fn value(&self, q: f64) -> f64 {
        self.inner.value(std::f64::consts::PI - q)
    }

    fn derivative(&self, q: f64) -> f64 {
        -self.inner.derivative(std::f64::consts::PI - q)
    }

    fn second_derivative(&self, q: f64) -> f64 {
        self.inner.second_derivative(std::f64::consts::PI - q)
    }

    fn name(&self) -> String {
        format!("reflected({})", self.inner.name())
    }
}

/// Sampled potential with monotone piecewise-cubic (Fritsch–Carlson)
/// interpolation. `V'` is the derivative of the interpolant.
#[derive(Debug, Clone)]
pub struct TablePotential {
    q: Vec<f64>,
    v: Vec<f64>,
    slopes: Vec<f64>,
}

impl TablePotential {
    /// Builds the interpolant and rejects tables whose derivative vanishes
    /// or changes sign anywhere on the sampled range.
    pub fn new(q: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if q.len() != v.len() {
            return Err(Error::InvalidPotential("column lengths differ".into()));
        }
        if q.len() < 3 {
            return Err(Error::InvalidPotential("need at least three samples".into()));
        }
        if q.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidPotential("non-finite sample".into()));
        }
        if q.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPotential("q column must be strictly increasing".into()));
        }
        if q[0] <= 0.0 || *q.last().unwrap() >= std::f64::consts::PI {
            return Err(Error::InvalidPotential("q samples must lie in (0, pi)".into()));
        }

        let n = q.len();
        let secants: Vec<f64> = (0..n - 1).map(|i| (v[i + 1] - v[i]) / (q[i + 1] - q[i])).collect();
        let sign = secants[0].signum();
        if secants.iter().any(|d| *d == 0.0 || d.signum() != sign) {
            return Err(Error::InvalidPotential(
                "potential must be strictly monotone so that V' does not vanish".into(),
            ));
        }

        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = 0.5 * (secants[i - 1] + secants[i]);
        }
        // Fritsch–Carlson limiter keeps each cubic monotone.
        for i in 0..n - 1 {
            let a = slopes[i] / secants[i];
            let b = slopes[i + 1] / secants[i];
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                slopes[i] = t * a * secants[i];
                slopes[i + 1] = t * b * secants[i];
            }
        }

        let table = Self { q, v, slopes };
        for i in 0..n - 1 {
            for k in 0..=16 {
                let x = table.q[i] + (table.q[i + 1] - table.q[i]) * k as f64 / 16.0;
                let d = table.derivative(x);
                if d == 0.0 || d.signum() != sign {
                    return Err(Error::InvalidPotential(format!("V' vanishes near q = {x}")));
                }
            }
        }
        Ok(table)
    }

    /// Parses a two-column `q,V` (comma or whitespace separated) table.
    /// Lines starting with `#` and a non-numeric header line are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut q = Vec::new();
        let mut v = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::InvalidPotential(format!("line {}: expected two columns", lineno + 1)));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    q.push(a);
                    v.push(b);
                }
                _ if q.is_empty() => continue,
                _ => return Err(Error::InvalidPotential(format!("line {}: not a number", lineno + 1))),
            }
        }
        Self::new(q, v)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.q[0], *self.q.last().unwrap())
    }

    fn interval(&self, x: f64) -> usize {
        match self.q.binary_search_by(|probe| probe.total_cmp(&x)) {
            Ok(i) => i.min(self.q.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.q.len() - 2),
        }
    }

    fn hermite(&self, x: f64) -> (f64, f64, f64) {
        let i = self.interval(x);
        let h = self.q[i + 1] - self.q[i];
        let t = (x - self.q[i]) / h;
        let (y0, y1) = (self.v[i], self.v[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let val =
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1;
        let der = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        let der2 =
            ((12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * d0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * d1) / (h * h);
        (val, der, der2)
    }
}

impl Potential for TablePotential {
    fn value(&self, q: f64) -> f64 {
        self.hermite(q).0
    }

    fn derivative(&self, q: f64) -> f64 {
        self.hermite(q).1
    }

    fn second_derivative(&self, q: f64) -> f64 {
        self.hermite(q).2
    }

    fn name(&self) -> String {
        "custom-table".into()
    }
}
