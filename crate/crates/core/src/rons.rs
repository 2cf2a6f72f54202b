//! Reduced-order nonlinear solutions: assembly of the metric tensor M and
//! vector field f, the unconstrained projection solve, and the
//! conservation-constrained variant.
//!
//! With the L² inner product ⟨a, b⟩ = ∫ a·b* dx,
//!
//! * M_ij = ⟨∂û/∂qᵢ, ∂û/∂qⱼ⟩ is Hermitian positive definite,
//! * f_i  = ⟨∂û/∂qᵢ, F(û)⟩,
//!
//! and the optimal parameter velocity minimizing ½‖û_t − F(û)‖² is
//! q̇ = Re[M]⁻¹·Re[f] — the orthogonal projection of F(û) onto the tangent
//! space of the ansatz manifold. Conserved quantities I_k(q) are enforced
//! through Lagrange multipliers solving C·λ = b with
//! C_ij = ⟨∇I_j, Re[M]⁻¹∇I_i⟩ and b_i = ⟨∇I_i, Re[M]⁻¹Re[f]⟩.
//!
//! Solves use a Cholesky factorization of Re[M] and fail (rather than
//! regularize) when it is not positive definite; an explicit Tikhonov shift
//! is available for deliberately near-degenerate sweeps.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::ansatz::{self, AnsatzFamily, ParameterState};
use crate::error::{CoreError, Result};
use crate::grid::PeriodicGrid;
use crate::pde::{self, PdeKind};
use crate::C64;

/// Assembled complex metric tensor and vector field at one state.
#[derive(Debug, Clone)]
pub struct TangentSystem {
    pub metric: DMatrix<C64>,
    pub field: DVector<C64>,
    pub state: ParameterState,
    /// Spectral condition number of Re[M]. Values above ~1e10 indicate a
    /// badly scaled parameterization; solves start losing digits there.
    pub condition_estimate: f64,
}

/// Condition estimate above which assembly results should be distrusted.
pub const CONDITION_WARN_THRESHOLD: f64 = 1e10;

pub(crate) fn metric_from_derivatives(grid: &PeriodicGrid, dq: &[Vec<C64>]) -> DMatrix<C64> {
    let n = dq.len();
    DMatrix::from_fn(n, n, |i, j| grid.inner_product(&dq[i], &dq[j]))
}

pub(crate) fn condition_of(re_m: &DMatrix<f64>) -> f64 {
    let sv = re_m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Build M and f for the given PDE at the given state by grid quadrature,
/// using the ansatz's analytic derivatives. The MNLS velocity-potential term
/// is always excluded from F(û) here.
pub fn assemble(
    kind: PdeKind,
    state: &ParameterState,
    grid: &Arc<PeriodicGrid>,
) -> Result<TangentSystem> {
    let tangent = ansatz::tangent_data(state, grid)?;
    let rhs = pde::rhs_on_ansatz(kind, state, grid)?;
    let metric = metric_from_derivatives(grid, &tangent.dq);
    let field = DVector::from_fn(tangent.dq.len(), |i, _| {
        grid.inner_product(&tangent.dq[i], rhs.values())
    });
    let condition_estimate = condition_of(&metric.map(|z| z.re));
    Ok(TangentSystem { metric, field, state: state.clone(), condition_estimate })
}

impl TangentSystem {
    pub fn len(&self) -> usize {
        self.field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }

    pub fn re_metric(&self) -> DMatrix<f64> {
        self.metric.map(|z| z.re)
    }

    pub fn im_metric(&self) -> DMatrix<f64> {
        self.metric.map(|z| z.im)
    }

    /// Full-precision text dump of M and f for debugging.
    pub fn dump(&self) -> String {
        let n = self.len();
        let mut out = String::new();
        writeln!(out, "# tangent system at t = {:.16e}", self.state.time).unwrap();
        writeln!(out, "# condition estimate of Re[M]: {:.16e}", self.condition_estimate).unwrap();
        let names = self.state.family.param_names();
        writeln!(out, "# parameters: {}", names.join(", ")).unwrap();
        for i in 0..n {
            for j in 0..n {
                let m = self.metric[(i, j)];
                writeln!(out, "M[{i}][{j}] = {:.16e} {:+.16e}i", m.re, m.im).unwrap();
            }
        }
        for i in 0..n {
            let f = self.field[i];
            writeln!(out, "f[{i}] = {:.16e} {:+.16e}i", f.re, f.im).unwrap();
        }
        out
    }
}

fn cholesky_or_singular(
    re_m: DMatrix<f64>,
    condition: f64,
) -> Result<nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>> {
    nalgebra::linalg::Cholesky::new(re_m).ok_or(CoreError::SingularMetric { condition })
}

/// The unconstrained RONS velocity q̇ = Re[M]⁻¹·Re[f].
pub fn rons_rhs(sys: &TangentSystem) -> Result<DVector<f64>> {
    rons_rhs_shifted(sys, 0.0)
}

/// RONS velocity with an explicit Tikhonov shift: (Re[M] + shift·I)q̇ = Re[f].
/// The default shift of zero never regularizes silently.
pub fn rons_rhs_shifted(sys: &TangentSystem, shift: f64) -> Result<DVector<f64>> {
    let mut re_m = sys.re_metric();
    if shift != 0.0 {
        for i in 0..re_m.nrows() {
            re_m[(i, i)] += shift;
        }
    }
    let chol = cholesky_or_singular(re_m, sys.condition_estimate)?;
    Ok(chol.solve(&sys.field.map(|z| z.re)))
}

/// One conserved quantity I(q) with an optional closed-form gradient;
/// without one, the gradient falls back to central differences with step
/// 1e−6·(1 + |qᵢ|).
pub struct ConservedQuantity {
    pub name: String,
    eval: Box<dyn Fn(&ParameterState) -> Result<f64> + Send + Sync>,
    grad: Option<Box<dyn Fn(&ParameterState) -> Result<DVector<f64>> + Send + Sync>>,
}

impl ConservedQuantity {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&ParameterState) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eval: Box::new(eval), grad: None }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&ParameterState) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Box::new(grad));
        self
    }

    pub fn value(&self, state: &ParameterState) -> Result<f64> {
        (self.eval)(state)
    }

    pub fn gradient(&self, state: &ParameterState) -> Result<DVector<f64>> {
        if let Some(grad) = &self.grad {
            return grad(state);
        }
        let n = state.len();
        let mut g = DVector::zeros(n);
        for i in 0..n {
            let h = 1e-6 * (1.0 + state.values()[i].abs());
            let mut plus = state.values().to_vec();
            plus[i] += h;
            let mut minus = state.values().to_vec();
            minus[i] -= h;
            let fp = (self.eval)(&state.with_values(plus)?)?;
            let fm = (self.eval)(&state.with_values(minus)?)?;
            g[i] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }
}

pub struct ConservedQuantitySet {
    pub quantities: Vec<ConservedQuantity>,
}

impl ConservedQuantitySet {
    pub fn len(&self) -> usize {
        self.quantities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quantities.is_empty()
    }

    /// NLS mass and energy with the Gaussian closed forms
    /// I₁ = √(π/2)·A²L and
    /// I₂ = √π·A²(√2(1 + L²U² + L²V²) − 2A²L²)/(16L)  (V = 0 when absent),
    /// including analytic gradients.
    pub fn nls_gaussian_mass_energy(family: AnsatzFamily) -> Result<Self> {
        let names = family.param_names();
        let idx = |name: &str| names.iter().position(|n| n == name);
        let (ia, il) = match (idx("A"), idx("L")) {
            (Some(a), Some(l)) => (a, l),
            _ => {
                return Err(CoreError::InvalidArgument(format!(
                    "closed-form NLS invariants need a Gaussian family, got {}",
                    family.id_str()
                )))
            }
        };
        let iu = idx("U").expect("Gaussian families carry U");
        let iv = idx("V");
        let n = family.param_count();

        let root_half_pi = (std::f64::consts::PI / 2.0).sqrt();
        let mass = ConservedQuantity::new("mass", move |q: &ParameterState| {
            let (a, l) = (q.values()[ia], q.values()[il]);
            Ok(root_half_pi * a * a * l)
        })
        .with_gradient(move |q: &ParameterState| {
            let (a, l) = (q.values()[ia], q.values()[il]);
            let mut g = DVector::zeros(n);
            g[ia] = 2.0 * root_half_pi * a * l;
            g[il] = root_half_pi * a * a;
            Ok(g)
        });

        let root_pi_16 = std::f64::consts::PI.sqrt() / 16.0;
        let sqrt2 = std::f64::consts::SQRT_2;
        let energy = ConservedQuantity::new("energy", move |q: &ParameterState| {
            let (a, l, u) = (q.values()[ia], q.values()[il], q.values()[iu]);
            let v = iv.map_or(0.0, |i| q.values()[i]);
            Ok(root_pi_16
                * (sqrt2 * a * a * (1.0 / l + l * u * u + l * v * v) - 2.0 * a.powi(4) * l))
        })
        .with_gradient(move |q: &ParameterState| {
            let (a, l, u) = (q.values()[ia], q.values()[il], q.values()[iu]);
            let v = iv.map_or(0.0, |i| q.values()[i]);
            let mut g = DVector::zeros(n);
            g[ia] = root_pi_16
                * (2.0 * sqrt2 * a * (1.0 / l + l * u * u + l * v * v) - 8.0 * a.powi(3) * l);
            g[il] =
                root_pi_16 * (sqrt2 * a * a * (-1.0 / (l * l) + u * u + v * v) - 2.0 * a.powi(4));
            g[iu] = root_pi_16 * 2.0 * sqrt2 * a * a * l * u;
            if let Some(i) = iv {
                g[i] = root_pi_16 * 2.0 * sqrt2 * a * a * l * v;
            }
            Ok(g)
        });

        Ok(Self { quantities: vec![mass, energy] })
    }

    /// NLS mass and energy evaluated by quadrature of the rendered ansatz,
    /// usable for any family; gradients fall back to finite differences.
    pub fn nls_quadrature(grid: Arc<PeriodicGrid>) -> Self {
        let g_mass = grid.clone();
        let mass = ConservedQuantity::new("mass", move |q: &ParameterState| {
            Ok(ansatz::evaluate(q, &g_mass)?.mass())
        });
        let energy = ConservedQuantity::new("energy", move |q: &ParameterState| {
            let u = ansatz::evaluate(q, &grid)?;
            let ux = ansatz::spatial_derivative(q, &grid, 1)?;
            let grad_sq: f64 = ux.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx();
            let quartic: f64 =
                u.values().iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * grid.dx();
            Ok(grad_sq / 8.0 - quartic / 4.0)
        });
        Self { quantities: vec![mass, energy] }
    }
}

/// Conservation-constrained RONS: returns (q̇, λ) where q̇ keeps every I_k
/// constant along the flow (∇I_k·q̇ = 0) and λ solves C·λ = b.
pub fn constrained_rons_rhs(
    sys: &TangentSystem,
    cons: &ConservedQuantitySet,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let chol = cholesky_or_singular(sys.re_metric(), sys.condition_estimate)?;
    let qdot_free = chol.solve(&sys.field.map(|z| z.re));
    let m = cons.len();
    if m == 0 {
        return Ok((qdot_free, DVector::zeros(0)));
    }

    let grads: Vec<DVector<f64>> = cons
        .quantities
        .iter()
        .map(|c| c.gradient(&sys.state))
        .collect::<Result<_>>()?;
    let whitened: Vec<DVector<f64>> = grads.iter().map(|g| chol.solve(g)).collect();

    let c_mat = DMatrix::from_fn(m, m, |i, j| grads[j].dot(&whitened[i]));
    let b = DVector::from_fn(m, |i, _| grads[i].dot(&qdot_free));

    let c_chol = nalgebra::linalg::Cholesky::new(c_mat.clone()).ok_or_else(|| {
        // Name the quantity dominating the near-null direction of C.
        let svd = c_mat.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let null_row = v_t.row(m - 1);
        let worst = (0..m)
            .max_by(|&a, &b| null_row[a].abs().total_cmp(&null_row[b].abs()))
            .unwrap_or(0);
        CoreError::DependentConstraints { quantity: cons.quantities[worst].name.clone() }
    })?;
    let lambda = c_chol.solve(&b);

    let mut qdot = qdot_free;
    for (l, w) in lambda.iter().zip(&whitened) {
        qdot -= w * *l;
    }
    Ok((qdot, lambda))
}
