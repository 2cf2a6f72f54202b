//! Closed-form parameter ODE systems for the Gaussian families, transcribed
//! once and locked against the numeric projection by [`oracle_compare`] —
//! the two routes are independent, so a transcription error in either side
//! fails the comparison instead of propagating silently.
//!
//! Co-moving Gaussian (A, L, U, φ):
//!   Ȧ = AU/(4L),  L̇ = −U/2,
//!   U̇ = (√2·A²L² − 2)/(4L³),  φ̇ = 1/(4L²) − 5A²/(8√2).
//!
//! Stationary-frame translating Gaussian adds ẋ_c = 1/2 with the other four
//! equations unchanged.
//!
//! Full Gaussian under MNLS (A, L, U, V, φ, x_c):
//!   Ȧ = AU(2 − 3V)/(8L),
//!   L̇ = U(3V − 2)/4,
//!   U̇ = (√2·A²L²(7V + 2) + 6V − 4)/(8L³),
//!   V̇ = −A²U/(2√2·L),
//!   φ̇ = (L²(−5√2·A²(5V + 2) + 6U²V + 4(V − 1)V²) − 6V + 8)/(32L²),
//!   ẋ_c = (5√2·A² + 3/L² + 3U² + V(3V − 4) + 8)/16.
//!
//! The sech family has no closed-form system here; sech runs go through the
//! numeric projection only.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use crate::ansatz::{AnsatzFamily, ParameterState};
use crate::error::{CoreError, Result};
use crate::grid::PeriodicGrid;
use crate::pde::PdeKind;
use crate::rons;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormSystem {
    NlsComovingGaussian,
    NlsStationaryGaussian,
    MnlsFullGaussian,
}

impl ClosedFormSystem {
    pub fn family(&self) -> AnsatzFamily {
        match self {
            Self::NlsComovingGaussian => AnsatzFamily::GaussianComoving,
            Self::NlsStationaryGaussian => AnsatzFamily::GaussianTranslating,
            Self::MnlsFullGaussian => AnsatzFamily::GaussianFull,
        }
    }

    /// The PDE whose projection this system transcribes.
    pub fn matching_kind(&self) -> PdeKind {
        match self {
            Self::NlsComovingGaussian => PdeKind::NlsComoving,
            Self::NlsStationaryGaussian => PdeKind::NlsStationary,
            Self::MnlsFullGaussian => PdeKind::Mnls { velocity_potential: false },
        }
    }
}

/// Evaluate the transcribed parameter velocities at a state.
pub fn closed_form_rhs(system: ClosedFormSystem, state: &ParameterState) -> Result<Vec<f64>> {
    if state.family != system.family() {
        return Err(CoreError::InvalidArgument(format!(
            "{system:?} expects family {}, got {}",
            system.family().id_str(),
            state.family.id_str()
        )));
    }
    let q = state.values();
    Ok(match system {
        ClosedFormSystem::NlsComovingGaussian => {
            let (a, l, u) = (q[0], q[1], q[2]);
            vec![
                a * u / (4.0 * l),
                -u / 2.0,
                (SQRT_2 * a * a * l * l - 2.0) / (4.0 * l * l * l),
                1.0 / (4.0 * l * l) - 5.0 * a * a / (8.0 * SQRT_2),
            ]
        }
        ClosedFormSystem::NlsStationaryGaussian => {
            let (a, l, u) = (q[0], q[1], q[2]);
            vec![
                a * u / (4.0 * l),
                -u / 2.0,
                (SQRT_2 * a * a * l * l - 2.0) / (4.0 * l * l * l),
                1.0 / (4.0 * l * l) - 5.0 * a * a / (8.0 * SQRT_2),
                0.5,
            ]
        }
        ClosedFormSystem::MnlsFullGaussian => {
            let (a, l, u, v) = (q[0], q[1], q[2], q[3]);
            let a2 = a * a;
            let l2 = l * l;
            vec![
                a * u * (2.0 - 3.0 * v) / (8.0 * l),
                0.25 * u * (3.0 * v - 2.0),
                (SQRT_2 * a2 * l2 * (7.0 * v + 2.0) + 6.0 * v - 4.0) / (8.0 * l2 * l),
                -a2 * u / (2.0 * SQRT_2 * l),
                (l2 * (-5.0 * SQRT_2 * a2 * (5.0 * v + 2.0)
                    + 6.0 * u * u * v
                    + 4.0 * (v - 1.0) * v * v)
                    - 6.0 * v
                    + 8.0)
                    / (32.0 * l2),
                (5.0 * SQRT_2 * a2 + 3.0 / l2 + 3.0 * u * u + v * (3.0 * v - 4.0) + 8.0) / 16.0,
            ]
        }
    })
}

/// Max relative deviation ‖closed-form − numeric RONS‖_∞ / (1 + ‖closed-form‖_∞)
/// at one state. The pairing (system, kind) must match.
pub fn oracle_compare(
    system: ClosedFormSystem,
    kind: PdeKind,
    state: &ParameterState,
    grid: &Arc<PeriodicGrid>,
) -> Result<f64> {
    if kind.without_velocity_potential() != system.matching_kind() {
        return Err(CoreError::InvalidArgument(format!(
            "{system:?} transcribes {:?}, not {kind:?}",
            system.matching_kind()
        )));
    }
    let closed = closed_form_rhs(system, state)?;
    let numeric = rons::rons_rhs(&rons::assemble(kind, state, grid)?)?;
    let scale = 1.0 + closed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let deviation = closed
        .iter()
        .zip(numeric.iter())
        .map(|(c, n)| (c - n).abs())
        .fold(0.0, f64::max);
    Ok(deviation / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn comoving(a: f64, l: f64, u: f64, phi: f64) -> ParameterState {
        ParameterState::new(AnsatzFamily::GaussianComoving, vec![a, l, u, phi]).unwrap()
    }

    #[test]
    fn comoving_reference_values() {
        let qdot =
            closed_form_rhs(ClosedFormSystem::NlsComovingGaussian, &comoving(0.1, 15.0, 0.0, 0.0))
                .unwrap();
        assert_eq!(qdot[0], 0.0);
        assert_eq!(qdot[1], 0.0);
        assert!((qdot[2] - 8.7554e-5).abs() < 1e-9);
        assert!((qdot[3] - (-3.3083e-3)).abs() < 1e-7);
    }

    #[test]
    fn stationary_adds_constant_wave_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let state = ParameterState::new(
                AnsatzFamily::GaussianTranslating,
                vec![
                    rng.gen_range(0.02..0.2),
                    rng.gen_range(5.0..25.0),
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-50.0..50.0),
                ],
            )
            .unwrap();
            let qdot = closed_form_rhs(ClosedFormSystem::NlsStationaryGaussian, &state).unwrap();
            assert_eq!(qdot[4], 0.5);
            // The first four equations are exactly the co-moving system.
            let reduced = comoving(
                state.values()[0],
                state.values()[1],
                state.values()[2],
                state.values()[3],
            );
            let co = closed_form_rhs(ClosedFormSystem::NlsComovingGaussian, &reduced).unwrap();
            assert_eq!(&qdot[..4], &co[..]);
        }
    }

    #[test]
    fn mnls_reference_values() {
        let state = ParameterState::new(
            AnsatzFamily::GaussianFull,
            vec![0.1, 20.0, 0.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let qdot = closed_form_rhs(ClosedFormSystem::MnlsFullGaussian, &state).unwrap();
        assert_eq!(qdot[0], 0.0);
        assert_eq!(qdot[1], 0.0);
        assert_eq!(qdot[3], 0.0);
        let xc_dot = (5.0 * SQRT_2 * 0.01 + 3.0 / 400.0 + 8.0) / 16.0;
        assert_eq!(qdot[5], xc_dot);
        assert!((xc_dot - 0.504888).abs() < 1e-6);
    }

    #[test]
    fn comoving_flow_conserves_mass_and_energy_analytically() {
        // ∇I·q̇ = 0 exactly for the transcription, checked at random states.
        let cons = rons::ConservedQuantitySet::nls_gaussian_mass_energy(
            AnsatzFamily::GaussianComoving,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let state = comoving(
                rng.gen_range(0.02..0.2),
                rng.gen_range(5.0..25.0),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-1.0..1.0),
            );
            let qdot = DVector::from_vec(
                closed_form_rhs(ClosedFormSystem::NlsComovingGaussian, &state).unwrap(),
            );
            for q in &cons.quantities {
                let rate = q.gradient(&state).unwrap().dot(&qdot);
                assert!(rate.abs() < 1e-12, "{} rate {rate:.3e}", q.name);
            }
        }
    }

    #[test]
    fn mnls_flow_conserves_mass_analytically() {
        let cons =
            rons::ConservedQuantitySet::nls_gaussian_mass_energy(AnsatzFamily::GaussianFull)
                .unwrap();
        let mass = &cons.quantities[0];
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..1000 {
            let state = ParameterState::new(
                AnsatzFamily::GaussianFull,
                vec![
                    rng.gen_range(0.02..0.2),
                    rng.gen_range(5.0..25.0),
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-50.0..50.0),
                ],
            )
            .unwrap();
            let qdot = DVector::from_vec(
                closed_form_rhs(ClosedFormSystem::MnlsFullGaussian, &state).unwrap(),
            );
            let rate = mass.gradient(&state).unwrap().dot(&qdot);
            assert!(rate.abs() < 1e-12, "mass rate {rate:.3e}");
        }
    }

    #[test]
    fn focusing_criterion_splits_on_mass_width_product() {
        // √2·A²L² > 2 focuses (U̇ > 0 at U = 0, so L̇ = −U/2 turns negative);
        // √2·A²L² < 2 defocuses.
        let focusing = comoving(0.2, 10.0, 0.0, 0.0); // √2·0.04·100 ≈ 5.66 > 2
        let defocusing = comoving(0.05, 10.0, 0.0, 0.0); // √2·0.0025·100 ≈ 0.35 < 2
        let f = closed_form_rhs(ClosedFormSystem::NlsComovingGaussian, &focusing).unwrap();
        let d = closed_form_rhs(ClosedFormSystem::NlsComovingGaussian, &defocusing).unwrap();
        assert!(f[2] > 0.0, "U̇ must be positive in the focusing regime");
        assert!(d[2] < 0.0, "U̇ must be negative in the defocusing regime");
    }

    #[test]
    fn oracle_compare_sweeps_stay_tight() {
        let grid = PeriodicGrid::nls_default();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let mut worst_nls = 0.0f64;
        for _ in 0..25 {
            let state = comoving(
                rng.gen_range(0.02..0.2),
                rng.gen_range(5.0..25.0),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-1.0..1.0),
            );
            let dev = oracle_compare(
                ClosedFormSystem::NlsComovingGaussian,
                PdeKind::NlsComoving,
                &state,
                &grid,
            )
            .unwrap();
            worst_nls = worst_nls.max(dev);
        }
        assert!(worst_nls < 1e-6, "co-moving sweep deviation {worst_nls:.3e}");

        let mut worst_mnls = 0.0f64;
        for _ in 0..10 {
            let state = ParameterState::new(
                AnsatzFamily::GaussianFull,
                vec![
                    rng.gen_range(0.02..0.2),
                    rng.gen_range(10.0..25.0),
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-20.0..20.0),
                ],
            )
            .unwrap();
            let dev = oracle_compare(
                ClosedFormSystem::MnlsFullGaussian,
                PdeKind::Mnls { velocity_potential: false },
                &state,
                &grid,
            )
            .unwrap();
            worst_mnls = worst_mnls.max(dev);
        }
        assert!(worst_mnls < 1e-5, "MNLS sweep deviation {worst_mnls:.3e}");
    }

    #[test]
    fn stationary_oracle_matches_in_the_wave_speed_component() {
        let grid = PeriodicGrid::nls_default();
        let state = ParameterState::new(
            AnsatzFamily::GaussianTranslating,
            vec![0.1, 15.0, 0.02, 0.1, -8.0],
        )
        .unwrap();
        let closed =
            closed_form_rhs(ClosedFormSystem::NlsStationaryGaussian, &state).unwrap();
        let numeric =
            rons::rons_rhs(&rons::assemble(PdeKind::NlsStationary, &state, &grid).unwrap())
                .unwrap();
        assert!((closed[4] - numeric[4]).abs() < 1e-8);
    }

    #[test]
    fn mismatched_pairings_are_rejected() {
        let grid = PeriodicGrid::nls_default();
        let state = comoving(0.1, 15.0, 0.0, 0.0);
        assert!(matches!(
            oracle_compare(
                ClosedFormSystem::NlsComovingGaussian,
                PdeKind::NlsStationary,
                &state,
                &grid
            ),
            Err(CoreError::InvalidArgument(_))
        ));
        let translating = ParameterState::new(
            AnsatzFamily::GaussianTranslating,
            vec![0.1, 15.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(closed_form_rhs(ClosedFormSystem::NlsComovingGaussian, &translating).is_err());
    }
}
