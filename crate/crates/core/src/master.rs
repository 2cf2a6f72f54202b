//! The complex master equation M·q̇ = ξ + η for Lagrangian-form PDEs.
//!
//! For a PDE u_t = −i·∂_x(∂h/∂u_x*) + i·∂h/∂u* generated by a density
//! h(u, u_x, u*, u_x*) with (∂h/∂u)* = ∂h/∂u*, the entries
//!
//!   ξ_k = −i·∫ (∂û/∂q_k)·(∂h/∂û) dx,
//!   η_k = −i·∫ (∂û_x/∂q_k)·(∂h/∂û_x) dx,
//!
//! together with the metric tensor M give one complex system whose **real
//! part is the RONS projection** and whose **imaginary part is the reduced
//! Lagrangian (Euler–Lagrange) system**. Re[M] is symmetric positive
//! definite, so the real solve is always well posed. Im[M] is skew-symmetric
//! and may be rank deficient; [`solve_imag_part`] then reports the numerical
//! rank, a null-space basis labeled by parameter names, and the minimum-norm
//! least-squares velocity (null-space components zeroed — a translating
//! packet simply keeps its center frozen).
//!
//! For polynomial-exponent ansätze the pairing i·∂û/∂α_k = ∂û/∂β_k makes M
//! block-structured (B = −iC = D) and the two faces of the master equation
//! coincide; [`mass_constrained_gaussian_check`] reproduces the classical
//! failure where eliminating A through mass conservation robs the phase of
//! its Euler–Lagrange equation.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::ansatz::{self, AnsatzFamily, ParameterState};
use crate::error::{CoreError, Result};
use crate::grid::{ComplexField, PeriodicGrid};
use crate::pde::PdeKind;
use crate::rons;
use crate::C64;

/// Numerical-rank cutoff: singular values below this fraction of the largest
/// count as zero. Structural deficiencies are exact; round-off sits ~1e−15.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Lagrangian densities for NLS: γ = 1 in the stationary frame, γ = 0 in the
/// co-moving frame, with h = (γ/4)(i·u_x·u* − i·u·u_x*) + |u_x|²/8 − |u|⁴/4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagrangianDensity {
    NlsStationaryH,
    NlsComovingH,
}

impl LagrangianDensity {
    fn gamma(&self) -> f64 {
        match self {
            Self::NlsStationaryH => 1.0,
            Self::NlsComovingH => 0.0,
        }
    }

    /// The PDE kind this density induces through its Euler–Lagrange equation.
    pub fn matching_kind(&self) -> PdeKind {
        match self {
            Self::NlsStationaryH => PdeKind::NlsStationary,
            Self::NlsComovingH => PdeKind::NlsComoving,
        }
    }

    /// h(u, u_x) itself; real-valued.
    pub fn h(&self, u: C64, ux: C64) -> f64 {
        -0.5 * self.gamma() * (ux * u.conj()).im + 0.125 * ux.norm_sqr()
            - 0.25 * u.norm_sqr() * u.norm_sqr()
    }

    /// ∂h/∂u with (u, u*, u_x, u_x*) treated as independent variables.
    pub fn dh_du(&self, u: C64, ux: C64) -> C64 {
        -C64::i() * self.gamma() / 4.0 * ux.conj() - 0.5 * u.norm_sqr() * u.conj()
    }

    /// ∂h/∂u_x.
    pub fn dh_dux(&self, u: C64, ux: C64) -> C64 {
        C64::i() * self.gamma() / 4.0 * u.conj() + 0.125 * ux.conj()
    }

    /// ∂h/∂u*.
    pub fn dh_du_star(&self, u: C64, ux: C64) -> C64 {
        C64::i() * self.gamma() / 4.0 * ux - 0.5 * u.norm_sqr() * u
    }

    /// ∂h/∂u_x*.
    pub fn dh_dux_star(&self, u: C64, ux: C64) -> C64 {
        -C64::i() * self.gamma() / 4.0 * u + 0.125 * ux
    }

    /// The PDE right-hand side induced by the first variation,
    /// u_t = −i·∂_x(∂h/∂u_x*) + i·∂h/∂u*, evaluated spectrally.
    pub fn induced_rhs(&self, u: &ComplexField) -> ComplexField {
        let ux = u.spectral_derivative(1).expect("order 1 is valid");
        let p = ComplexField::new(
            u.grid().clone(),
            u.values()
                .iter()
                .zip(ux.values())
                .map(|(&v, &vx)| self.dh_dux_star(v, vx))
                .collect(),
        )
        .expect("density derivatives are finite");
        let px = p.spectral_derivative(1).expect("order 1 is valid");
        ComplexField::new(
            u.grid().clone(),
            u.values()
                .iter()
                .zip(ux.values())
                .zip(px.values())
                .map(|((&v, &vx), &pxv)| -C64::i() * pxv + C64::i() * self.dh_du_star(v, vx))
                .collect(),
        )
        .expect("finite")
    }
}

/// Assembled master-equation system at one state.
#[derive(Debug, Clone)]
pub struct MasterSystem {
    pub metric: DMatrix<C64>,
    pub xi: DVector<C64>,
    pub eta: DVector<C64>,
    pub state: ParameterState,
}

impl MasterSystem {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn rhs(&self) -> DVector<C64> {
        &self.xi + &self.eta
    }
}

/// Plain (unconjugated) quadrature ∫ a·b dx.
fn product_integral(grid: &PeriodicGrid, a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<C64>() * grid.dx()
}

/// Assemble M, ξ, η by quadrature with analytic ansatz derivatives.
pub fn assemble_master(
    density: LagrangianDensity,
    state: &ParameterState,
    grid: &Arc<PeriodicGrid>,
) -> Result<MasterSystem> {
    let tangent = ansatz::tangent_data(state, grid)?;
    let metric = rons::metric_from_derivatives(grid, &tangent.dq);

    let dh_du: Vec<C64> = tangent
        .u
        .iter()
        .zip(&tangent.u_x)
        .map(|(&u, &ux)| density.dh_du(u, ux))
        .collect();
    let dh_dux: Vec<C64> = tangent
        .u
        .iter()
        .zip(&tangent.u_x)
        .map(|(&u, &ux)| density.dh_dux(u, ux))
        .collect();

    let n = tangent.dq.len();
    let xi = DVector::from_fn(n, |k, _| {
        -C64::i() * product_integral(grid, &tangent.dq[k], &dh_du)
    });
    let eta = DVector::from_fn(n, |k, _| {
        -C64::i() * product_integral(grid, &tangent.dq_x[k], &dh_dux)
    });
    Ok(MasterSystem { metric, xi, eta, state: state.clone() })
}

/// Real part of the master equation: Re[M]·q̇ = Re[ξ + η]. Coincides with
/// the RONS projection for the matching PDE kind.
pub fn solve_real_part(sys: &MasterSystem) -> Result<DVector<f64>> {
    let re_m = sys.metric.map(|z| z.re);
    let condition = rons::condition_of(&re_m);
    let chol = nalgebra::linalg::Cholesky::new(re_m)
        .ok_or(CoreError::SingularMetric { condition })?;
    Ok(chol.solve(&sys.rhs().map(|z| z.re)))
}

/// Rank analysis of a (skew-symmetric) imaginary-part system.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub dim: usize,
    pub rank: usize,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    /// Orthonormal null-space basis vectors (columns of V past the rank).
    pub null_basis: Vec<DVector<f64>>,
    /// Parameter names with a significant component in the null space.
    pub undetermined: Vec<String>,
}

impl RankReport {
    pub fn is_deficient(&self) -> bool {
        self.rank < self.dim
    }

    pub fn to_text(&self, names: &[String]) -> String {
        let mut out = String::new();
        writeln!(out, "rank = {} of {}", self.rank, self.dim).unwrap();
        for (i, s) in self.singular_values.iter().enumerate() {
            writeln!(out, "sigma[{i}] = {s:.16e}").unwrap();
        }
        if self.null_basis.is_empty() {
            writeln!(out, "null space: empty").unwrap();
        } else {
            writeln!(out, "undetermined parameters: {}", self.undetermined.join(", ")).unwrap();
            for (b, vec) in self.null_basis.iter().enumerate() {
                for (i, name) in names.iter().enumerate() {
                    writeln!(out, "null[{b}].{name} = {:.16e}", vec[i]).unwrap();
                }
            }
        }
        out
    }
}

/// Result of the imaginary-part (reduced-Lagrangian) solve.
#[derive(Debug, Clone)]
pub enum ImagSolve {
    /// Im[M] has full numerical rank; the system determines q̇ uniquely.
    FullRank(DVector<f64>),
    /// Im[M] is rank deficient. `qdot` is the minimum-norm least-squares
    /// solution: components along the null space are zero.
    Deficient { qdot: DVector<f64>, report: RankReport },
}

impl ImagSolve {
    pub fn qdot(&self) -> &DVector<f64> {
        match self {
            Self::FullRank(q) => q,
            Self::Deficient { qdot, .. } => qdot,
        }
    }

    pub fn rank_report(&self) -> Option<&RankReport> {
        match self {
            Self::FullRank(_) => None,
            Self::Deficient { report, .. } => Some(report),
        }
    }
}

fn rank_analysis(
    matrix: &DMatrix<f64>,
    rhs: &DVector<f64>,
    names: &[String],
) -> (DVector<f64>, RankReport) {
    let n = matrix.nrows();
    let svd = matrix.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested");
    let v_t = svd.v_t.as_ref().expect("requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = RANK_TOLERANCE * sigma_max;
    let rank = sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count();

    // Minimum-norm least squares through the truncated pseudoinverse.
    let mut qdot = DVector::zeros(n);
    for i in 0..rank {
        let coeff = u.column(i).dot(rhs) / sigma[i];
        qdot += v_t.row(i).transpose() * coeff;
    }

    let null_basis: Vec<DVector<f64>> =
        (rank..n).map(|i| v_t.row(i).transpose()).collect();
    let mut undetermined = Vec::new();
    for (i, name) in names.iter().enumerate() {
        if null_basis.iter().any(|b| b[i].abs() > 1e-6) {
            undetermined.push(name.clone());
        }
    }
    let report = RankReport {
        dim: n,
        rank,
        singular_values: sigma.iter().cloned().collect(),
        null_basis,
        undetermined,
    };
    (qdot, report)
}

/// Imaginary part of the master equation: Im[M]·q̇ = Im[ξ + η], the reduced
/// Lagrangian system. Rank deficiency is a structured result, not an error.
pub fn solve_imag_part(sys: &MasterSystem) -> ImagSolve {
    let im_m = sys.metric.map(|z| z.im);
    let im_rhs = sys.rhs().map(|z| z.im);
    let names = sys.state.family.param_names();
    let (qdot, report) = rank_analysis(&im_m, &im_rhs, &names);
    if report.is_deficient() {
        ImagSolve::Deficient { qdot, report }
    } else {
        ImagSolve::FullRank(qdot)
    }
}

/// Outcome of the mass-constrained Gaussian check.
#[derive(Debug, Clone)]
pub struct MassConstrainedReport {
    /// Rank analysis of Im[M] for the reduced (L, U, φ) family.
    pub imag_report: RankReport,
    /// Whether Re[M] of the reduced family is still positive definite
    /// (the projection stays well posed).
    pub re_metric_spd: bool,
    pub names: Vec<String>,
}

impl MassConstrainedReport {
    /// True when the phase has no Euler–Lagrange equation.
    pub fn phi_unconstrained(&self) -> bool {
        self.imag_report.undetermined.iter().any(|n| n == "phi")
    }
}

/// Eliminate A from the co-moving Gaussian through mass conservation,
/// A(L) = A₀·√(L₀/L), and analyze the reduced three-parameter family
/// (L, U, φ) at the given state. The φ column of Im[M] vanishes identically
/// (it is −½·∂I₁/∂q, and I₁ is frozen), so the reduced Lagrangian loses the
/// phase equation while Re[M] stays positive definite.
pub fn mass_constrained_gaussian_check(
    state: &ParameterState,
    grid: &Arc<PeriodicGrid>,
) -> Result<MassConstrainedReport> {
    if state.family != AnsatzFamily::GaussianComoving {
        return Err(CoreError::InvalidArgument(
            "mass-constrained check expects the co-moving Gaussian family".into(),
        ));
    }
    let v = state.values();
    let (a, l, u_mod, phi) = (v[0], v[1], v[2], v[3]);

    // Reduced-family tangent fields at the reference point (where A(L) = A₀).
    let n = grid.len();
    let mut dq: Vec<Vec<C64>> = vec![Vec::with_capacity(n); 3];
    for &x in grid.points() {
        let x2 = x * x;
        let val = a * C64::new(-x2 / (l * l), x2 * u_mod / l + phi).exp();
        // ∂û/∂L carries the −A/(2L) chain term from the mass relation.
        let d_l = C64::new(-0.5 / l + 2.0 * x2 / (l * l * l), -x2 * u_mod / (l * l));
        let d_u = C64::new(0.0, x2 / l);
        let d_phi = C64::i();
        dq[0].push(d_l * val);
        dq[1].push(d_u * val);
        dq[2].push(d_phi * val);
    }
    let metric = rons::metric_from_derivatives(grid, &dq);
    let names = vec!["L".to_owned(), "U".to_owned(), "phi".to_owned()];
    let (_, imag_report) =
        rank_analysis(&metric.map(|z| z.im), &DVector::zeros(3), &names);
    let re_metric_spd = nalgebra::linalg::Cholesky::new(metric.map(|z| z.re)).is_some();
    Ok(MassConstrainedReport { imag_report, re_metric_spd, names })
}
