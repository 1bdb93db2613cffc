use std::io::{self, Write};

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use super::{body_momentum_map, casimir, hamiltonian, vector_field};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::potential::Potential;
use crate::state::{ReducedState, Vec5};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantDrift {
    pub h: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Rescale the body momentum map back onto the initial Casimir sphere after every step.
    pub project_casimir: bool,
    /// Record every `sample_every`-th step (1 = every step).
    pub sample_every: usize,
    pub q_guard: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { project_casimir: false, sample_every: 1, q_guard: Tolerances::default().q_guard }
    }
}

/// Sampled reduced trajectory with per-sample `|H − H₀|`, `|C − C₀|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    pub energy: Vec<f64>,
    pub casimir: Vec<f64>,
    pub invariant_drift: Vec<InvariantDrift>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&ReducedState> {
        self.states.last()
    }

    pub fn max_drift(&self) -> InvariantDrift {
        self.invariant_drift
            .iter()
            .fold(InvariantDrift { h: 0.0, c: 0.0 }, |acc, d| InvariantDrift { h: acc.h.max(d.h), c: acc.c.max(d.c) })
    }

    /// Writes `t,m1,m2,m3,q,p,H,C,dH,dC` rows with 15 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,m1,m2,m3,q,p,H,C,dH,dC")?;
        for i in 0..self.len() {
            let s = &self.states[i];
            let d = &self.invariant_drift[i];
            writeln!(
                out,
                "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.3e},{:.3e}",
                self.times[i], s.m1, s.m2, s.m3, s.q, s.p, self.energy[i], self.casimir[i], d.h, d.c
            )?;
        }
        Ok(())
    }
}

pub(crate) fn rk4_step<const N: usize, F: Fn(&SVector<f64, N>) -> SVector<f64, N>>(
    f: &F,
    x: &SVector<f64, N>,
    dt: f64,
) -> SVector<f64, N> {
    let k1 = f(x);
    let k2 = f(&(x + k1 * (0.5 * dt)));
    let k3 = f(&(x + k2 * (0.5 * dt)));
    let k4 = f(&(x + k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

fn project_onto_casimir(state: &mut ReducedState, params: &SystemParams, c0: f64) {
    let (a1, a2, a3) = body_momentum_map(state, params);
    let norm = (a1 * a1 + a2 * a2 + a3 * a3).sqrt();
    if norm == 0.0 || c0 <= 0.0 {
        return;
    }
    let k = c0.sqrt() / norm;
    let (s, c) = state.q.sin_cos();
    state.m1 = a1 * k;
    state.m2 = a2 * k + params.b * params.e2 * s;
    state.m3 = a3 * k - params.b * (params.e1 + params.e2 * c);
}

/// Fixed-step classical RK4 integration of the reduced flow.
pub fn integrate(
    initial: &ReducedState,
    params: &SystemParams,
    v: &dyn Potential,
    t_end: f64,
    dt: f64,
    options: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    params.validate()?;
    initial.check(options.q_guard).map_err(|_| Error::CollisionApproach { t: 0.0, q: initial.q })?;

    let h0 = hamiltonian(initial, params, v);
    let c0 = casimir(initial, params);
    let steps = (t_end / dt).round() as usize;
    let every = options.sample_every.max(1);
    let cap = steps / every + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        energy: Vec::with_capacity(cap),
        casimir: Vec::with_capacity(cap),
        invariant_drift: Vec::with_capacity(cap),
    };
    let mut record = |t: f64, s: &ReducedState| {
        let h = hamiltonian(s, params, v);
        let c = casimir(s, params);
        traj.times.push(t);
        traj.states.push(*s);
        traj.energy.push(h);
        traj.casimir.push(c);
        traj.invariant_drift.push(InvariantDrift { h: (h - h0).abs(), c: (c - c0).abs() });
    };
    record(0.0, initial);

    let field = |x: &Vec5| vector_field(&ReducedState::from_vector(x), params, v);
    let pi = std::f64::consts::PI;
    let mut x = initial.to_vector();
    for step in 1..=steps {
        let t = step as f64 * dt;
        x = rk4_step(&field, &x, dt);
        let mut s = ReducedState::from_vector(&x);
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        if s.q < options.q_guard || s.q > pi - options.q_guard {
            return Err(Error::CollisionApproach { t, q: s.q });
        }
        if options.project_casimir {
            project_onto_casimir(&mut s, params, c0);
            x = s.to_vector();
        }
        if step % every == 0 || step == steps {
            record(t, &s);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{cot_potential, ZeroPotential};
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_step_and_horizon() {
        let params = SystemParams::identical(1.0);
        let v = cot_potential(&params);
        let s = ReducedState::at_rest(0.1, 0.2, 1.0);
        let opts = IntegrateOptions::default();
        assert!(integrate(&s, &params, &v, 1.0, 0.0, &opts).is_err());
        assert!(integrate(&s, &params, &v, -1.0, 0.1, &opts).is_err());
    }

    #[test]
    fn collision_is_reported() {
        // Free particles heading together with large closing speed.
        let params = SystemParams::identical(0.0);
        let s = ReducedState { m1: 0.0, m2: 0.0, m3: 0.0, q: 0.3, p: -5.0 };
        let err = integrate(&s, &params, &ZeroPotential, 10.0, 1e-3, &IntegrateOptions::default()).unwrap_err();
        assert!(matches!(err, Error::CollisionApproach { .. }));
    }

    #[test]
    fn samples_at_multiples_of_dt_and_csv_header() {
        let params = SystemParams::identical(2.0);
        let v = cot_potential(&params);
        let s = ReducedState { m1: 0.1, m2: -0.4, m3: 0.5, q: PI / 3.0, p: 0.2 };
        let opts = IntegrateOptions { sample_every: 10, ..Default::default() };
        let traj = integrate(&s, &params, &v, 1.0, 1e-2, &opts).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert!((traj.times[10] - 1.0).abs() < 1e-12);
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,m1,m2,m3,q,p,H,C,dH,dC\n"));
        assert_eq!(text.lines().count(), 12);
        let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(fields.len(), 10);
        assert!((fields[4].parse::<f64>().unwrap() - s.q).abs() < 1e-14);
    }

    #[test]
    fn projection_keeps_casimir_exact() {
        let params = SystemParams::identical(2.5);
        let v = cot_potential(&params);
        let s = ReducedState { m1: 0.4, m2: -0.2, m3: 0.9, q: 1.4, p: 0.3 };
        let opts = IntegrateOptions { project_casimir: true, ..Default::default() };
        let traj = integrate(&s, &params, &v, 2.0, 1e-2, &opts).unwrap();
        assert!(traj.max_drift().c < 1e-12);
    }
}
