//! Parameter-ODE integration with admissibility-aware stepping.
//!
//! The adaptive method is Dormand–Prince 4(5) with the classical step
//! controller h ← h·clamp(0.9·err^(−1/5), 0.2, 5); steps are clipped to the
//! output instants, so sampled states carry no interpolation error. The ROM
//! systems cost microseconds per right-hand side, which is why the default
//! tolerances are tight (1e−10) — integrator error is meant to be invisible
//! next to modeling error.

use crate::ansatz::ParameterState;
use crate::error::{CoreError, Result};

use super::{HaltEvent, HaltReason, ParameterTrajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeMethod {
    Rk4Fixed { dt: f64 },
    Rk45Adaptive { rtol: f64, atol: f64, dt_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSolverConfig {
    pub method: OdeMethod,
    /// Absolute end time; integration starts at the state's own time.
    pub t_final: f64,
    /// Sampling stride of the output trajectory.
    pub output_dt: f64,
}

impl OdeSolverConfig {
    /// Reference ROM configuration: adaptive with rtol = atol = 1e−10.
    pub fn default_rom(t_final: f64, output_dt: f64) -> Self {
        Self {
            method: OdeMethod::Rk45Adaptive { rtol: 1e-10, atol: 1e-10, dt_max: 1.0 },
            t_final,
            output_dt,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.method {
            OdeMethod::Rk4Fixed { dt } => dt > 0.0 && dt.is_finite(),
            OdeMethod::Rk45Adaptive { rtol, atol, dt_max } => {
                rtol > 0.0 && atol > 0.0 && dt_max > 0.0
            }
        };
        if !ok || !(self.t_final.is_finite() && self.output_dt > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "invalid ODE solver configuration: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Dormand–Prince 4(5) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'a> {
    rhs: &'a dyn Fn(&ParameterState) -> Result<Vec<f64>>,
    template: ParameterState,
}

impl Stepper<'_> {
    fn state_at(&self, t: f64, y: &[f64]) -> Result<ParameterState> {
        Ok(self.template.with_values(y.to_vec())?.with_time(t))
    }

    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        (self.rhs)(&self.state_at(t, y)?)
    }

    /// One Dormand–Prince step; returns (5th-order solution, error estimate).
    fn dp_step(&self, t: f64, y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = y.len();
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        for f in 0..7 {
            let mut stage = y.to_vec();
            for (j, kj) in k.iter().enumerate() {
                let a = DP_A[f][j];
                if a != 0.0 {
                    for i in 0..n {
                        stage[i] += h * a * kj[i];
                    }
                }
            }
            k.push(self.eval(t + DP_C[f] * h, &stage)?);
        }
        let mut y5 = y.to_vec();
        let mut err = vec![0.0; n];
        for (f, kf) in k.iter().enumerate() {
            for i in 0..n {
                y5[i] += h * DP_B5[f] * kf[i];
                err[i] += h * (DP_B5[f] - DP_B4[f]) * kf[i];
            }
        }
        Ok((y5, err))
    }

    fn rk4_step(&self, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
        let n = y.len();
        let k1 = self.eval(t, y)?;
        let mid1: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k1[i]).collect();
        let k2 = self.eval(t + 0.5 * h, &mid1)?;
        let mid2: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k2[i]).collect();
        let k3 = self.eval(t + 0.5 * h, &mid2)?;
        let end: Vec<f64> = (0..n).map(|i| y[i] + h * k3[i]).collect();
        let k4 = self.eval(t + h, &end)?;
        Ok((0..n)
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    }
}

/// Integrate q̇ = rhs(q) from the state's own time to `cfg.t_final`,
/// sampling every `cfg.output_dt`. Leaving the admissible region or step
/// underflow halts integration with a structured event; the trajectory keeps
/// every valid sample produced so far.
pub fn integrate_ode(
    rhs: &dyn Fn(&ParameterState) -> Result<Vec<f64>>,
    q0: &ParameterState,
    cfg: &OdeSolverConfig,
) -> Result<ParameterTrajectory> {
    cfg.validate()?;
    let t0 = q0.time;
    if cfg.t_final <= t0 {
        return Err(CoreError::InvalidArgument(format!(
            "t_final = {} must exceed the initial time {t0}",
            cfg.t_final
        )));
    }
    let stepper = Stepper { rhs, template: q0.clone() };
    let mut times = vec![t0];
    let mut states = vec![q0.clone().with_time(t0)];
    let mut t = t0;
    let mut y = q0.values().to_vec();
    let mut next_output = t0 + cfg.output_dt;
    let mut halt = None;

    match cfg.method {
        OdeMethod::Rk4Fixed { dt } => {
            let stride = (cfg.output_dt / dt).round().max(1.0) as usize;
            let mut step_index = 0usize;
            while t < cfg.t_final - 1e-12 * cfg.t_final.abs().max(1.0) {
                let h = dt.min(cfg.t_final - t);
                match stepper.rk4_step(t, &y, h) {
                    Ok(next) => {
                        y = next;
                        t += h;
                        step_index += 1;
                    }
                    Err(CoreError::InadmissibleState(why)) => {
                        halt = Some(HaltEvent { time: t, reason: HaltReason::Inadmissible(why) });
                        break;
                    }
                    Err(other) => return Err(other),
                }
                let at_end = t >= cfg.t_final - 1e-12 * cfg.t_final.abs().max(1.0);
                if step_index % stride == 0 || at_end {
                    match stepper.state_at(t, &y) {
                        Ok(state) => {
                            times.push(t);
                            states.push(state);
                        }
                        Err(CoreError::InadmissibleState(why)) => {
                            halt = Some(HaltEvent {
                                time: times.last().copied().unwrap_or(t),
                                reason: HaltReason::Inadmissible(why),
                            });
                            break;
                        }
                        Err(other) => return Err(other),
                    }
                }
            }
        }
        OdeMethod::Rk45Adaptive { rtol, atol, dt_max } => {
            let mut h = (cfg.output_dt).min(dt_max).min(cfg.t_final - t0);
            'outer: while t < cfg.t_final - 1e-12 * cfg.t_final.abs().max(1.0) {
                // Clip to the next output instant and the final time.
                let target = next_output.min(cfg.t_final);
                h = h.min(dt_max).min(target - t);
                if h < 1e-14 * t.abs().max(1.0) {
                    halt = Some(HaltEvent { time: t, reason: HaltReason::StepSizeUnderflow });
                    break;
                }
                let (y5, err) = match stepper.dp_step(t, &y, h) {
                    Ok(pair) => pair,
                    Err(CoreError::InadmissibleState(why)) => {
                        // Retry with a smaller step before giving up: the
                        // stage may have overshot the admissible region.
                        if h > 16.0 * 1e-14 * t.abs().max(1.0) {
                            h *= 0.25;
                            continue;
                        }
                        halt = Some(HaltEvent { time: t, reason: HaltReason::Inadmissible(why) });
                        break;
                    }
                    Err(other) => return Err(other),
                };
                let mut err_norm = 0.0f64;
                for i in 0..y.len() {
                    let scale = atol + rtol * y[i].abs().max(y5[i].abs());
                    err_norm += (err[i] / scale).powi(2);
                }
                err_norm = (err_norm / y.len() as f64).sqrt();
                if err_norm <= 1.0 {
                    t += h;
                    y = y5;
                    if (t - target).abs() < 1e-12 * target.abs().max(1.0) {
                        match stepper.state_at(t, &y) {
                            Ok(state) => {
                                times.push(t);
                                states.push(state);
                            }
                            Err(CoreError::InadmissibleState(why)) => {
                                halt = Some(HaltEvent {
                                    time: times.last().copied().unwrap_or(t),
                                    reason: HaltReason::Inadmissible(why),
                                });
                                break 'outer;
                            }
                            Err(other) => return Err(other),
                        }
                        if (target - next_output).abs() < 1e-12 * target.abs().max(1.0) {
                            next_output += cfg.output_dt;
                        }
                    }
                }
                let factor = if err_norm > 0.0 {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                } else {
                    5.0
                };
                h *= factor;
            }
        }
    }

    Ok(ParameterTrajectory { times, states, halt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::AnsatzFamily;
    use crate::closed_form::{self, ClosedFormSystem};
    use crate::rons::ConservedQuantitySet;

    fn translating(xc: f64) -> ParameterState {
        ParameterState::new(AnsatzFamily::GaussianTranslating, vec![0.1, 15.0, 0.0, 0.0, xc])
            .unwrap()
    }

    #[test]
    fn zero_rhs_keeps_state_constant() {
        let q0 = translating(2.0);
        for method in [
            OdeMethod::Rk4Fixed { dt: 0.1 },
            OdeMethod::Rk45Adaptive { rtol: 1e-10, atol: 1e-10, dt_max: 1.0 },
        ] {
            let cfg = OdeSolverConfig { method, t_final: 5.0, output_dt: 1.0 };
            let traj =
                integrate_ode(&|q: &ParameterState| Ok(vec![0.0; q.len()]), &q0, &cfg).unwrap();
            assert!(traj.completed());
            assert_eq!(traj.times.len(), 6);
            for s in &traj.states {
                assert_eq!(s.values(), q0.values());
            }
        }
    }

    #[test]
    fn linear_flow_is_exact() {
        // ẋ_c = 1/2 ⟹ x_c(100) = x_c(0) + 50 to round-off.
        let q0 = translating(0.0);
        let rhs = |q: &ParameterState| {
            let mut v = vec![0.0; q.len()];
            v[4] = 0.5;
            Ok(v)
        };
        let cfg = OdeSolverConfig::default_rom(100.0, 5.0);
        let traj = integrate_ode(&rhs, &q0, &cfg).unwrap();
        assert!(traj.completed());
        let end = traj.last();
        assert!((end.time - 100.0).abs() < 1e-10);
        assert!((end.get("x_c").unwrap() - 50.0).abs() < 1e-10);
    }

    #[test]
    fn comoving_closed_form_flow_conserves_invariants() {
        let q0 = ParameterState::new(AnsatzFamily::GaussianComoving, vec![0.1, 15.0, 0.0, 0.0])
            .unwrap();
        let rhs = |q: &ParameterState| {
            closed_form_rhs_wrapper(q)
        };
        fn closed_form_rhs_wrapper(q: &ParameterState) -> crate::error::Result<Vec<f64>> {
            closed_form::closed_form_rhs(ClosedFormSystem::NlsComovingGaussian, q)
        }
        let cfg = OdeSolverConfig::default_rom(100.0, 2.0);
        let traj = integrate_ode(&rhs, &q0, &cfg).unwrap();
        assert!(traj.completed());

        // A²L is a first integral of the flow.
        let m0 = 0.1 * 0.1 * 15.0;
        for s in &traj.states {
            let m = s.get("A").unwrap().powi(2) * s.get("L").unwrap();
            assert!(
                (m - m0).abs() / m0 < 1e-9,
                "A²L drift {:.3e} at t = {}",
                (m - m0).abs() / m0,
                s.time
            );
        }

        // Energy drift over t ∈ [0, 40].
        let cons =
            ConservedQuantitySet::nls_gaussian_mass_energy(AnsatzFamily::GaussianComoving)
                .unwrap();
        let e0 = cons.quantities[1].value(&q0).unwrap();
        for s in traj.states.iter().filter(|s| s.time <= 40.0) {
            let e = cons.quantities[1].value(s).unwrap();
            assert!(
                (e - e0).abs() / e0.abs() < 1e-8,
                "energy drift {:.3e} at t = {}",
                (e - e0).abs() / e0.abs(),
                s.time
            );
        }
    }

    #[test]
    fn inadmissible_region_halts_with_event() {
        // L̇ = −1 drives the width through zero near t = 15.
        let q0 = ParameterState::new(AnsatzFamily::GaussianComoving, vec![0.1, 15.0, 0.0, 0.0])
            .unwrap();
        let rhs = |q: &ParameterState| {
            let mut v = vec![0.0; q.len()];
            v[1] = -1.0;
            Ok(v)
        };
        for method in [
            OdeMethod::Rk4Fixed { dt: 0.01 },
            OdeMethod::Rk45Adaptive { rtol: 1e-10, atol: 1e-10, dt_max: 1.0 },
        ] {
            let cfg = OdeSolverConfig { method, t_final: 30.0, output_dt: 1.0 };
            let traj = integrate_ode(&rhs, &q0, &cfg).unwrap();
            let halt = traj.halt.as_ref().expect("must halt before t_final");
            assert!(matches!(halt.reason, HaltReason::Inadmissible(_)));
            assert!(halt.time <= 15.0 + 1e-6);
            for s in &traj.states {
                assert!(s.get("L").unwrap() > 0.0, "trajectory keeps only valid states");
            }
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        let q0 = translating(0.0);
        let rhs = |q: &ParameterState| Ok(vec![0.0; q.len()]);
        assert!(integrate_ode(
            &rhs,
            &q0,
            &OdeSolverConfig { method: OdeMethod::Rk4Fixed { dt: -0.1 }, t_final: 1.0, output_dt: 0.5 }
        )
        .is_err());
        assert!(integrate_ode(&rhs, &q0, &OdeSolverConfig::default_rom(-1.0, 0.5)).is_err());
    }

    #[test]
    fn fixed_and_adaptive_agree_on_smooth_flows() {
        let q0 = ParameterState::new(AnsatzFamily::GaussianComoving, vec![0.12, 9.0, 0.05, 0.0])
            .unwrap();
        let rhs = |q: &ParameterState| {
            closed_form::closed_form_rhs(ClosedFormSystem::NlsComovingGaussian, q)
        };
        let fixed = integrate_ode(
            &rhs,
            &q0,
            &OdeSolverConfig { method: OdeMethod::Rk4Fixed { dt: 0.005 }, t_final: 10.0, output_dt: 10.0 },
        )
        .unwrap();
        let adaptive = integrate_ode(&rhs, &q0, &OdeSolverConfig::default_rom(10.0, 10.0)).unwrap();
        for (a, b) in fixed.last().values().iter().zip(adaptive.last().values()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}
