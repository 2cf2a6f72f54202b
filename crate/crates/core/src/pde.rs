//! Right-hand sides F(u) of the three envelope equations.
//!
//! * `NlsStationary`:  u_t = −½·u_x − (i/8)·u_xx − (i/2)·|u|²u
//! * `NlsComoving`:    u_t = −(i/8)·u_xx − (i/2)·|u|²u
//! * `Mnls` (Dysthe):  u_t = −½·u_x − (i/8)·u_xx + (1/16)·u_xxx − (i/2)·|u|²u
//!                         − (3/2)·|u|²·u_x + (1/4)·u²·u_x* − i·u·∂φ/∂x|_{z=0}
//!
//! with the surface velocity-potential gradient
//! ∂φ/∂x|_{z=0} = −½·F⁻¹[|k|·F[|u|²]]. The potential term is kept in DNS by
//! default and always dropped in reduced-order assembly
//! ([`rhs_on_ansatz`]), where it has no significant effect.

use std::sync::Arc;

use crate::ansatz::{self, ParameterState};
use crate::error::Result;
use crate::grid::{ComplexField, PeriodicGrid};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeKind {
    NlsStationary,
    NlsComoving,
    Mnls { velocity_potential: bool },
}

impl PdeKind {
    pub fn id_str(&self) -> &'static str {
        match self {
            Self::NlsStationary => "nls_stationary",
            Self::NlsComoving => "nls_comoving",
            Self::Mnls { .. } => "mnls",
        }
    }

    /// The same kind with the velocity-potential term disabled; identity for
    /// the NLS kinds. Reduced-order assembly always uses this form.
    pub fn without_velocity_potential(self) -> Self {
        match self {
            Self::Mnls { .. } => Self::Mnls { velocity_potential: false },
            other => other,
        }
    }

    /// Fourier symbol of the linear part, diagonal in spectral space.
    /// Odd-order derivative terms use the Nyquist-zeroed wavenumber.
    pub fn linear_symbol(&self, grid: &PeriodicGrid) -> Vec<C64> {
        let n = grid.len();
        grid.wavenumbers()
            .iter()
            .enumerate()
            .map(|(m, &k)| {
                let k_odd = if m == n / 2 { 0.0 } else { k };
                match self {
                    Self::NlsComoving => C64::new(0.0, k * k / 8.0),
                    Self::NlsStationary => C64::new(0.0, -k_odd / 2.0 + k * k / 8.0),
                    Self::Mnls { .. } => {
                        C64::new(0.0, -k_odd / 2.0 + k * k / 8.0 - k_odd.powi(3) / 16.0)
                    }
                }
            })
            .collect()
    }

    /// The non-stiff remainder N(u) = F(u) − (linear part)·u, evaluated
    /// pseudospectrally (derivatives in spectral space, products pointwise).
    pub fn nonlinear_rhs(&self, u: &ComplexField) -> ComplexField {
        match self {
            Self::NlsComoving | Self::NlsStationary => ComplexField::new(
                u.grid().clone(),
                u.values()
                    .iter()
                    .map(|&v| -0.5 * C64::i() * v.norm_sqr() * v)
                    .collect(),
            )
            .expect("pointwise cubic term is finite"),
            Self::Mnls { velocity_potential } => {
                let ux = u.spectral_derivative(1).expect("order 1 is valid");
                let phi_x = velocity_potential.then(|| u.hilbert_like_operator());
                let vals = u
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let vx = ux.values()[j];
                        let mut out = -0.5 * C64::i() * v.norm_sqr() * v
                            - 1.5 * v.norm_sqr() * vx
                            + 0.25 * v * v * vx.conj();
                        if let Some(phi_x) = &phi_x {
                            out -= C64::i() * v * phi_x.values()[j];
                        }
                        out
                    })
                    .collect();
                ComplexField::new(u.grid().clone(), vals).expect("pointwise terms are finite")
            }
        }
    }
}

/// Full right-hand side F(u) on a grid field, using spectral derivatives.
pub fn rhs(kind: PdeKind, u: &ComplexField) -> ComplexField {
    let linear = kind.linear_symbol(u.grid());
    let mut spectral = u.forward_transform();
    for (c, sym) in spectral.iter_mut().zip(&linear) {
        *c *= sym;
    }
    let linear_part = ComplexField::inverse_transform(u.grid().clone(), &spectral)
        .expect("coefficient length matches grid");
    let nonlinear = kind.nonlinear_rhs(u);
    ComplexField::new(
        u.grid().clone(),
        linear_part
            .values()
            .iter()
            .zip(nonlinear.values())
            .map(|(a, b)| a + b)
            .collect(),
    )
    .expect("sum of finite fields is finite")
}

/// F(û) evaluated with the ansatz's analytic spatial derivatives, so the
/// result is grid-converged independent of resolution. The MNLS
/// velocity-potential term is always omitted here.
pub fn rhs_on_ansatz(
    kind: PdeKind,
    state: &ParameterState,
    grid: &Arc<PeriodicGrid>,
) -> Result<ComplexField> {
    let kind = kind.without_velocity_potential();
    let u = ansatz::evaluate(state, grid)?;
    let ux = ansatz::spatial_derivative(state, grid, 1)?;
    let uxx = ansatz::spatial_derivative(state, grid, 2)?;
    let uxxx = match kind {
        PdeKind::Mnls { .. } => Some(ansatz::spatial_derivative(state, grid, 3)?),
        _ => None,
    };
    let vals = (0..grid.len())
        .map(|j| {
            let v = u.values()[j];
            let vx = ux.values()[j];
            let vxx = uxx.values()[j];
            match kind {
                PdeKind::NlsComoving => {
                    -C64::i() / 8.0 * vxx - 0.5 * C64::i() * v.norm_sqr() * v
                }
                PdeKind::NlsStationary => {
                    -0.5 * vx - C64::i() / 8.0 * vxx - 0.5 * C64::i() * v.norm_sqr() * v
                }
                PdeKind::Mnls { .. } => {
                    let vxxx = uxxx.as_ref().expect("computed for MNLS").values()[j];
                    -0.5 * vx - C64::i() / 8.0 * vxx + vxxx / 16.0
                        - 0.5 * C64::i() * v.norm_sqr() * v
                        - 1.5 * v.norm_sqr() * vx
                        + 0.25 * v * v * vx.conj()
                }
            }
        })
        .collect();
    ComplexField::new(grid.clone(), vals)
}
