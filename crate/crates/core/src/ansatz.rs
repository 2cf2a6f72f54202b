//! Wave-packet ansatz families with analytic parameter and spatial derivatives.
//!
//! Each family defines û(x, q) together with ∂û/∂qᵢ, ∂û/∂x (up to third
//! order), and the mixed derivatives ∂²û/∂qᵢ∂x — everything the projection
//! and master-equation assemblies consume. All derivatives are closed-form;
//! no differencing or spectral differentiation happens here.
//!
//! Families:
//!
//! * `GaussianComoving` — A·exp[−x²/L² + i·x²U/L + iφ], q = (A, L, U, φ).
//! * `GaussianTranslating` — same with x → x − x_c, q = (A, L, U, φ, x_c).
//! * `GaussianFull` — adds the symmetry-breaking linear phase i(x−x_c)V,
//!   q = (A, L, U, V, φ, x_c).
//! * `Sech` — (A_r + iA_i)·sech((x−x_c)/L)·exp[i(x−x_c)²U],
//!   q = (A_r, A_i, L, U, x_c). Note the quadratic phase carries no 1/L
//!   here, unlike the Gaussian convention; both forms are kept as printed
//!   in their sources.
//! * `PolyExponent` — exp(Σ_j z_j x^j) with z_j = α_j + iβ_j,
//!   q = (α₀…α_m, β₀…β_m). Degree is capped at 4 and must be even with
//!   α_m < 0 so that û is square integrable.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::grid::{ComplexField, PeriodicGrid};
use crate::C64;

/// Largest parameter count over all families (PolyExponent degree 4).
pub const MAX_PARAMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzFamily {
    GaussianComoving,
    GaussianTranslating,
    GaussianFull,
    Sech,
    PolyExponent { degree: usize },
}

impl AnsatzFamily {
    pub fn param_count(&self) -> usize {
        match self {
            Self::GaussianComoving => 4,
            Self::GaussianTranslating => 5,
            Self::GaussianFull => 6,
            Self::Sech => 5,
            Self::PolyExponent { degree } => 2 * (degree + 1),
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match self {
            Self::GaussianComoving => vec!["A", "L", "U", "phi"],
            Self::GaussianTranslating => vec!["A", "L", "U", "phi", "x_c"],
            Self::GaussianFull => vec!["A", "L", "U", "V", "phi", "x_c"],
            Self::Sech => vec!["A_r", "A_i", "L", "U", "x_c"],
            Self::PolyExponent { degree } => {
                let mut names = Vec::with_capacity(2 * (degree + 1));
                for j in 0..=*degree {
                    names.push(format!("alpha{j}"));
                }
                for j in 0..=*degree {
                    names.push(format!("beta{j}"));
                }
                return names;
            }
        }
        .into_iter()
        .map(str::to_owned)
        .collect()
    }

    pub fn id_str(&self) -> &'static str {
        match self {
            Self::GaussianComoving => "gaussian_comoving",
            Self::GaussianTranslating => "gaussian_translating",
            Self::GaussianFull => "gaussian_full",
            Self::Sech => "sech",
            Self::PolyExponent { .. } => "poly_exponent",
        }
    }

    /// Check family-specific admissibility of a raw value vector.
    fn validate(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(CoreError::InadmissibleState(format!(
                "{} expects {} parameters, got {}",
                self.id_str(),
                self.param_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InadmissibleState(
                "parameter vector contains non-finite entries".into(),
            ));
        }
        match self {
            Self::GaussianComoving | Self::GaussianTranslating | Self::GaussianFull => {
                let (a, l) = (values[0], values[1]);
                if a <= 0.0 {
                    return Err(CoreError::InadmissibleState(format!(
                        "Gaussian amplitude A must be positive, got {a}"
                    )));
                }
                if l <= 0.0 {
                    return Err(CoreError::InadmissibleState(format!(
                        "Gaussian width L must be positive, got {l}"
                    )));
                }
            }
            Self::Sech => {
                let (ar, ai, l) = (values[0], values[1], values[2]);
                if ar == 0.0 && ai == 0.0 {
                    return Err(CoreError::InadmissibleState(
                        "sech amplitude (A_r, A_i) must be nonzero".into(),
                    ));
                }
                if l <= 0.0 {
                    return Err(CoreError::InadmissibleState(format!(
                        "sech width L must be positive, got {l}"
                    )));
                }
            }
            Self::PolyExponent { degree } => {
                let m = *degree;
                if m == 0 || m > 4 {
                    return Err(CoreError::InadmissibleState(format!(
                        "polynomial exponent degree must be in 1..=4, got {m}"
                    )));
                }
                if m % 2 != 0 {
                    return Err(CoreError::InadmissibleState(format!(
                        "odd leading degree {m} cannot decay on both ends"
                    )));
                }
                let alpha_m = values[m];
                if alpha_m >= 0.0 {
                    return Err(CoreError::InadmissibleState(format!(
                        "leading real coefficient alpha{m} must be negative for decay, got {alpha_m}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A named real parameter vector q(t) of an ansatz family.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterState {
    pub family: AnsatzFamily,
    values: Vec<f64>,
    pub time: f64,
}

impl ParameterState {
    pub fn new(family: AnsatzFamily, values: Vec<f64>) -> Result<Self> {
        family.validate(&values)?;
        Ok(Self { family, values, time: 0.0 })
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Look a parameter up by its serialized name (e.g. "L", "x_c", "beta2").
    pub fn get(&self, name: &str) -> Option<f64> {
        self.family
            .param_names()
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    /// Replace the value vector, revalidating admissibility.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        self.family.validate(&values)?;
        Ok(Self { family: self.family, values, time: self.time })
    }

    /// Serialize to the flat text record format (family id + named values).
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        writeln!(out, "family = {}", self.family.id_str()).unwrap();
        writeln!(out, "t = {:.16e}", self.time).unwrap();
        for (name, v) in self.family.param_names().iter().zip(&self.values) {
            writeln!(out, "{name} = {v:.16e}").unwrap();
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut family: Option<&str> = None;
        let mut time = 0.0;
        let mut fields: Vec<(String, f64)> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CoreError::Parse(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "family" {
                family = Some(value);
                continue;
            }
            let num: f64 = value
                .parse()
                .map_err(|_| CoreError::Parse(format!("bad number {value:?} for key {key:?}")))?;
            if key == "t" {
                time = num;
            } else {
                fields.push((key.to_owned(), num));
            }
        }
        let family = match family {
            Some("gaussian_comoving") => AnsatzFamily::GaussianComoving,
            Some("gaussian_translating") => AnsatzFamily::GaussianTranslating,
            Some("gaussian_full") => AnsatzFamily::GaussianFull,
            Some("sech") => AnsatzFamily::Sech,
            Some("poly_exponent") => {
                let degree = fields
                    .iter()
                    .filter(|(k, _)| k.starts_with("alpha"))
                    .count()
                    .checked_sub(1)
                    .ok_or_else(|| CoreError::Parse("poly_exponent record has no alpha fields".into()))?;
                AnsatzFamily::PolyExponent { degree }
            }
            Some(other) => return Err(CoreError::Parse(format!("unknown family id {other:?}"))),
            None => return Err(CoreError::Parse("record is missing the family line".into())),
        };
        let names = family.param_names();
        let mut values = Vec::with_capacity(names.len());
        for name in &names {
            let v = fields
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| CoreError::Parse(format!("record is missing field {name:?}")))?;
            values.push(v);
        }
        Ok(Self::new(family, values)?.with_time(time))
    }
}

/// Everything the reduced-order assemblies need at one state, sampled on a
/// grid: û, û_x, all ∂û/∂qᵢ, and all ∂²û/∂qᵢ∂x.
pub struct TangentData {
    pub names: Vec<String>,
    pub u: Vec<C64>,
    pub u_x: Vec<C64>,
    pub dq: Vec<Vec<C64>>,
    pub dq_x: Vec<Vec<C64>>,
}

/// Per-point evaluation of û and all its derivatives.
#[derive(Clone, Copy)]
struct PointData {
    u: C64,
    ux: C64,
    uxx: C64,
    uxxx: C64,
    dq: [C64; MAX_PARAMS],
    dqx: [C64; MAX_PARAMS],
}

fn zero_point() -> PointData {
    let z = C64::new(0.0, 0.0);
    PointData { u: z, ux: z, uxx: z, uxxx: z, dq: [z; MAX_PARAMS], dqx: [z; MAX_PARAMS] }
}

/// Evaluate the Gaussian family in the shared exponential form
/// û = A·exp(−s²/L² + i(s²U/L + sV + φ)), s = x − x_c.
fn gaussian_point(a: f64, l: f64, u: f64, v: f64, phi: f64, xc: f64, x: f64, family: AnsatzFamily) -> PointData {
    let s = x - xc;
    let l2 = l * l;
    let expo = C64::new(-s * s / l2, s * s * u / l + s * v + phi);
    let val = a * expo.exp();
    // Log-derivatives of û in x.
    let g1 = C64::new(-2.0 * s / l2, 2.0 * s * u / l + v);
    let g2 = C64::new(-2.0 / l2, 2.0 * u / l);
    let mut p = zero_point();
    p.u = val;
    p.ux = g1 * val;
    p.uxx = (g2 + g1 * g1) * val;
    p.uxxx = (3.0 * g1 * g2 + g1 * g1 * g1) * val;

    // ∂û/∂q = (∂G/∂q)·û and ∂²û/∂q∂x = (∂G'/∂q + G'·∂G/∂q)·û.
    let d_a = C64::new(1.0 / a, 0.0);
    let d_l = C64::new(2.0 * s * s / (l2 * l), -s * s * u / l2);
    let d_u = C64::new(0.0, s * s / l);
    let d_v = C64::new(0.0, s);
    let d_phi = C64::new(0.0, 1.0);
    let d_xc = -g1;

    let dx_a = C64::new(0.0, 0.0);
    let dx_l = C64::new(4.0 * s / (l2 * l), -2.0 * s * u / l2);
    let dx_u = C64::new(0.0, 2.0 * s / l);
    let dx_v = C64::new(0.0, 1.0);
    let dx_phi = C64::new(0.0, 0.0);
    let dx_xc = -g2;

    let ordered: &[(C64, C64)] = match family {
        AnsatzFamily::GaussianComoving => {
            &[(d_a, dx_a), (d_l, dx_l), (d_u, dx_u), (d_phi, dx_phi)]
        }
        AnsatzFamily::GaussianTranslating => {
            &[(d_a, dx_a), (d_l, dx_l), (d_u, dx_u), (d_phi, dx_phi), (d_xc, dx_xc)]
        }
        AnsatzFamily::GaussianFull => &[
            (d_a, dx_a),
            (d_l, dx_l),
            (d_u, dx_u),
            (d_v, dx_v),
            (d_phi, dx_phi),
            (d_xc, dx_xc),
        ],
        _ => unreachable!("gaussian_point called with non-Gaussian family"),
    };
    for (i, (dg, dgx)) in ordered.iter().enumerate() {
        p.dq[i] = dg * val;
        p.dqx[i] = (dgx + dg * g1) * val;
    }
    p
}

fn sech_point(ar: f64, ai: f64, l: f64, u: f64, xc: f64, x: f64) -> PointData {
    let a = C64::new(ar, ai);
    let s = x - xc;
    let z = s / l;
    let sech = 1.0 / z.cosh();
    let tanh = z.tanh();
    let phase = C64::new(0.0, u * s * s).exp();
    let val = a * sech * phase;

    // û_x = c·û with c = −tanh(z)/L + 2iUs.
    let c = C64::new(-tanh / l, 2.0 * u * s);
    let c1 = C64::new(-sech * sech / (l * l), 2.0 * u);
    let c2 = C64::new(2.0 * sech * sech * tanh / (l * l * l), 0.0);

    let mut p = zero_point();
    p.u = val;
    p.ux = c * val;
    p.uxx = (c1 + c * c) * val;
    p.uxxx = (c2 + 3.0 * c1 * c + c * c * c) * val;

    // Order: A_r, A_i, L, U, x_c.
    let inv_a = 1.0 / a;
    let d_ar = inv_a;
    let d_ai = C64::i() * inv_a;
    let d_l = C64::new(s * tanh / (l * l), 0.0);
    let d_u = C64::new(0.0, s * s);
    let d_xc = -c;

    let dc_l = C64::new(tanh / (l * l) + s * sech * sech / (l * l * l), 0.0);
    let dc_u = C64::new(0.0, 2.0 * s);

    p.dq[0] = d_ar * val;
    p.dq[1] = d_ai * val;
    p.dq[2] = d_l * val;
    p.dq[3] = d_u * val;
    p.dq[4] = d_xc * val;

    p.dqx[0] = c * d_ar * val;
    p.dqx[1] = c * d_ai * val;
    p.dqx[2] = (dc_l + c * d_l) * val;
    p.dqx[3] = (dc_u + c * d_u) * val;
    p.dqx[4] = -(c1 + c * c) * val;
    p
}

fn poly_point(values: &[f64], degree: usize, x: f64) -> PointData {
    let n_half = degree + 1;
    // P(x) = Σ z_j x^j and its first three derivatives.
    let mut pw = [C64::new(0.0, 0.0); 4];
    let mut xj = 1.0;
    for j in 0..=degree {
        let z = C64::new(values[j], values[n_half + j]);
        pw[0] += z * xj;
        if j >= 1 {
            pw[1] += z * (j as f64) * x.powi(j as i32 - 1);
        }
        if j >= 2 {
            pw[2] += z * (j * (j - 1)) as f64 * x.powi(j as i32 - 2);
        }
        if j >= 3 {
            pw[3] += z * (j * (j - 1) * (j - 2)) as f64 * x.powi(j as i32 - 3);
        }
        xj *= x;
    }
    let val = pw[0].exp();
    let mut p = zero_point();
    p.u = val;
    p.ux = pw[1] * val;
    p.uxx = (pw[2] + pw[1] * pw[1]) * val;
    p.uxxx = (pw[3] + 3.0 * pw[1] * pw[2] + pw[1] * pw[1] * pw[1]) * val;
    for j in 0..=degree {
        let xj = x.powi(j as i32);
        let xj1 = if j >= 1 { (j as f64) * x.powi(j as i32 - 1) } else { 0.0 };
        // ∂û/∂α_j = x^j·û, ∂û/∂β_j = i·x^j·û.
        p.dq[j] = xj * val;
        p.dq[n_half + j] = C64::i() * xj * val;
        // ∂²û/∂α_j∂x = (j·x^(j−1) + x^j·P')·û, and i× that for β_j.
        let mixed = (C64::new(xj1, 0.0) + xj * pw[1]) * val;
        p.dqx[j] = mixed;
        p.dqx[n_half + j] = C64::i() * mixed;
    }
    p
}

fn point(state: &ParameterState, x: f64) -> PointData {
    let v = state.values();
    match state.family {
        AnsatzFamily::GaussianComoving => {
            gaussian_point(v[0], v[1], v[2], 0.0, v[3], 0.0, x, state.family)
        }
        AnsatzFamily::GaussianTranslating => {
            gaussian_point(v[0], v[1], v[2], 0.0, v[3], v[4], x, state.family)
        }
        AnsatzFamily::GaussianFull => {
            gaussian_point(v[0], v[1], v[2], v[3], v[4], v[5], x, state.family)
        }
        AnsatzFamily::Sech => sech_point(v[0], v[1], v[2], v[3], v[4], x),
        AnsatzFamily::PolyExponent { degree } => poly_point(v, degree, x),
    }
}

/// Sample û(x, q) on a grid.
pub fn evaluate(state: &ParameterState, grid: &Arc<PeriodicGrid>) -> Result<ComplexField> {
    state.family.validate(state.values())?;
    Ok(ComplexField::from_fn(grid.clone(), |x| point(state, x).u))
}

/// Analytic ∂û/∂qᵢ for every parameter, ordered as in the state.
pub fn param_derivatives(state: &ParameterState, grid: &Arc<PeriodicGrid>) -> Result<Vec<ComplexField>> {
    Ok(tangent_data(state, grid)?
        .dq
        .into_iter()
        .map(|vals| ComplexField::new(grid.clone(), vals).expect("finite by construction"))
        .collect())
}

/// Analytic spatial derivative ∂^order û/∂x^order, order 1–3.
pub fn spatial_derivative(
    state: &ParameterState,
    grid: &Arc<PeriodicGrid>,
    order: u32,
) -> Result<ComplexField> {
    state.family.validate(state.values())?;
    if !(1..=3).contains(&order) {
        return Err(CoreError::InvalidArgument(format!(
            "spatial derivative order must be 1, 2 or 3, got {order}"
        )));
    }
    Ok(ComplexField::from_fn(grid.clone(), |x| {
        let p = point(state, x);
        match order {
            1 => p.ux,
            2 => p.uxx,
            _ => p.uxxx,
        }
    }))
}

/// Analytic mixed derivatives ∂²û/∂qᵢ∂x, ordered as in the state.
pub fn mixed_derivatives(state: &ParameterState, grid: &Arc<PeriodicGrid>) -> Result<Vec<ComplexField>> {
    Ok(tangent_data(state, grid)?
        .dq_x
        .into_iter()
        .map(|vals| ComplexField::new(grid.clone(), vals).expect("finite by construction"))
        .collect())
}

/// One-pass sampling of û, û_x, ∂û/∂q, ∂²û/∂q∂x over the grid.
pub fn tangent_data(state: &ParameterState, grid: &Arc<PeriodicGrid>) -> Result<TangentData> {
    state.family.validate(state.values())?;
    let n = grid.len();
    let np = state.len();
    let mut u = Vec::with_capacity(n);
    let mut u_x = Vec::with_capacity(n);
    let mut dq = vec![Vec::with_capacity(n); np];
    let mut dq_x = vec![Vec::with_capacity(n); np];
    for &x in grid.points() {
        let p = point(state, x);
        u.push(p.u);
        u_x.push(p.ux);
        for i in 0..np {
            dq[i].push(p.dq[i]);
            dq_x[i].push(p.dqx[i]);
        }
    }
    Ok(TangentData { names: state.family.param_names(), u, u_x, dq, dq_x })
}

/// The exact sech soliton of the co-moving NLS equation with width L0:
/// q = (A_r, A_i, L, U, x_c) = (1/(√2·L0), 0, L0, 0, 0), i.e. |A|²L² = 1/2.
pub fn soliton_initial_state(l0: f64) -> Result<ParameterState> {
    if !(l0.is_finite() && l0 > 0.0) {
        return Err(CoreError::InadmissibleState(format!(
            "soliton width L0 must be positive, got {l0}"
        )));
    }
    ParameterState::new(AnsatzFamily::Sech, vec![1.0 / (SQRT_2 * l0), 0.0, l0, 0.0, 0.0])
}

/// Express a co-moving Gaussian state in the polynomial-exponent family:
/// (α₀, α₁, α₂, β₀, β₁, β₂) = (ln A, 0, −1/L², φ, 0, U/L).
pub fn poly_embedding(state: &ParameterState) -> Result<ParameterState> {
    if state.family != AnsatzFamily::GaussianComoving {
        return Err(CoreError::InvalidArgument(
            "poly embedding is defined for the co-moving Gaussian family".into(),
        ));
    }
    let v = state.values();
    let (a, l, u, phi) = (v[0], v[1], v[2], v[3]);
    Ok(ParameterState::new(
        AnsatzFamily::PolyExponent { degree: 2 },
        vec![a.ln(), 0.0, -1.0 / (l * l), phi, 0.0, u / l],
    )?
    .with_time(state.time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss_grid() -> Arc<PeriodicGrid> {
        PeriodicGrid::nls_default()
    }

    fn sech_grid() -> Arc<PeriodicGrid> {
        PeriodicGrid::new(64.0 * std::f64::consts::PI, 1 << 10).unwrap()
    }

    fn comoving_state() -> ParameterState {
        ParameterState::new(AnsatzFamily::GaussianComoving, vec![0.1, 15.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn gaussian_evaluation_at_center() {
        let g = gauss_grid();
        let f = evaluate(&comoving_state(), &g).unwrap();
        // x = 0 is a grid point (index N/2); exponent vanishes there.
        let center = f.values()[g.len() / 2];
        assert_relative_eq!(center.re, 0.1, epsilon = 1e-14);
        assert!(center.im.abs() < 1e-15);
    }

    #[test]
    fn translated_gaussian_peaks_at_center_parameter() {
        let state = ParameterState::new(
            AnsatzFamily::GaussianTranslating,
            vec![0.1, 15.0, 0.0, 0.0, 7.0],
        )
        .unwrap();
        // Evaluate directly at x = 7 (off-grid is fine for the kernel).
        let p = point(&state, 7.0);
        assert_relative_eq!(p.u.re, 0.1, epsilon = 1e-14);
        assert!(p.u.im.abs() < 1e-15);
    }

    #[test]
    fn phase_parameter_rotates_amplitude() {
        let state = ParameterState::new(
            AnsatzFamily::GaussianComoving,
            vec![0.1, 15.0, 0.0, std::f64::consts::FRAC_PI_2],
        )
        .unwrap();
        let p = point(&state, 0.0);
        assert!(p.u.re.abs() < 1e-15);
        assert_relative_eq!(p.u.im, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn amplitude_and_phase_derivatives_are_structural() {
        // ∂û/∂A = û/A and ∂û/∂φ = i·û pointwise for Gaussian families.
        let g = gauss_grid();
        let state = ParameterState::new(
            AnsatzFamily::GaussianFull,
            vec![0.13, 11.0, 0.04, -0.02, 0.3, 2.0],
        )
        .unwrap();
        let u = evaluate(&state, &g).unwrap();
        let dq = param_derivatives(&state, &g).unwrap();
        for (j, uv) in u.values().iter().enumerate() {
            assert!((dq[0].values()[j] - uv / 0.13).norm() <= 1e-14 * (1.0 + uv.norm()));
            assert!((dq[4].values()[j] - C64::i() * uv).norm() <= 1e-14 * (1.0 + uv.norm()));
        }
    }

    fn random_admissible(family: AnsatzFamily, rng: &mut ChaCha8Rng) -> ParameterState {
        let values = match family {
            AnsatzFamily::GaussianComoving => vec![
                rng.gen_range(0.02..0.2),
                rng.gen_range(5.0..25.0),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-1.0..1.0),
            ],
            AnsatzFamily::GaussianTranslating => vec![
                rng.gen_range(0.02..0.2),
                rng.gen_range(5.0..25.0),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-20.0..20.0),
            ],
            AnsatzFamily::GaussianFull => vec![
                rng.gen_range(0.02..0.2),
                rng.gen_range(5.0..25.0),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-20.0..20.0),
            ],
            AnsatzFamily::Sech => vec![
                rng.gen_range(0.3..1.2),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(0.7..2.5),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-5.0..5.0),
            ],
            AnsatzFamily::PolyExponent { .. } => vec![
                rng.gen_range(-3.0..-1.0), // alpha0
                rng.gen_range(-0.01..0.01),
                rng.gen_range(-0.05..-0.002), // alpha2 < 0
                rng.gen_range(-1.0..1.0),     // beta0
                rng.gen_range(-0.05..0.05),
                rng.gen_range(-0.01..0.01),
            ],
        };
        ParameterState::new(family, values).unwrap()
    }

    #[test]
    fn param_derivatives_match_central_differences() {
        let families = [
            AnsatzFamily::GaussianComoving,
            AnsatzFamily::GaussianTranslating,
            AnsatzFamily::GaussianFull,
            AnsatzFamily::Sech,
            AnsatzFamily::PolyExponent { degree: 2 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for family in families {
            let grid = if family == AnsatzFamily::Sech { sech_grid() } else { gauss_grid() };
            for _ in 0..3 {
                let state = random_admissible(family, &mut rng);
                let analytic = param_derivatives(&state, &grid).unwrap();
                for i in 0..state.len() {
                    let h = 1e-6 * (1.0 + state.values()[i].abs());
                    let mut plus = state.values().to_vec();
                    plus[i] += h;
                    let mut minus = state.values().to_vec();
                    minus[i] -= h;
                    let up = evaluate(&state.with_values(plus).unwrap(), &grid).unwrap();
                    let um = evaluate(&state.with_values(minus).unwrap(), &grid).unwrap();
                    let mut num = 0.0;
                    let mut den = 0.0;
                    for j in 0..grid.len() {
                        let fd = (up.values()[j] - um.values()[j]) / (2.0 * h);
                        num += (analytic[i].values()[j] - fd).norm_sqr();
                        den += analytic[i].values()[j].norm_sqr();
                    }
                    let rel = (num / den.max(1e-300)).sqrt();
                    assert!(
                        rel < 1e-6,
                        "{:?} parameter {} finite-difference mismatch {rel:.3e}",
                        family,
                        state.family.param_names()[i],
                    );
                }
            }
        }
    }

    #[test]
    fn mixed_derivatives_match_central_differences_of_ux() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for family in [
            AnsatzFamily::GaussianFull,
            AnsatzFamily::Sech,
            AnsatzFamily::PolyExponent { degree: 2 },
        ] {
            let grid = if family == AnsatzFamily::Sech { sech_grid() } else { gauss_grid() };
            let state = random_admissible(family, &mut rng);
            let analytic = mixed_derivatives(&state, &grid).unwrap();
            for i in 0..state.len() {
                let h = 1e-6 * (1.0 + state.values()[i].abs());
                let mut plus = state.values().to_vec();
                plus[i] += h;
                let mut minus = state.values().to_vec();
                minus[i] -= h;
                let up = spatial_derivative(&state.with_values(plus).unwrap(), &grid, 1).unwrap();
                let um = spatial_derivative(&state.with_values(minus).unwrap(), &grid, 1).unwrap();
                let mut num = 0.0;
                let mut den = 0.0;
                for j in 0..grid.len() {
                    let fd = (up.values()[j] - um.values()[j]) / (2.0 * h);
                    num += (analytic[i].values()[j] - fd).norm_sqr();
                    den += analytic[i].values()[j].norm_sqr();
                }
                let rel = (num / den.max(1e-300)).sqrt();
                assert!(rel < 1e-6, "{family:?} mixed derivative {i} mismatch {rel:.3e}");
            }
        }
    }

    #[test]
    fn spatial_derivative_matches_spectral_differentiation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for family in [
            AnsatzFamily::GaussianComoving,
            AnsatzFamily::GaussianFull,
            AnsatzFamily::Sech,
        ] {
            // Narrow sech states (L ≈ 0.7) need a finer grid than the FD
            // checks to push the spectral aliasing floor below the tolerance.
            let grid = if family == AnsatzFamily::Sech {
                PeriodicGrid::new(64.0 * std::f64::consts::PI, 1 << 11).unwrap()
            } else {
                gauss_grid()
            };
            let state = random_admissible(family, &mut rng);
            let u = evaluate(&state, &grid).unwrap();
            for order in 1..=3 {
                let analytic = spatial_derivative(&state, &grid, order).unwrap();
                let spectral = u.spectral_derivative(order).unwrap();
                let mut num = 0.0;
                let mut den = 0.0;
                for j in 0..grid.len() {
                    num += (analytic.values()[j] - spectral.values()[j]).norm_sqr();
                    den += analytic.values()[j].norm_sqr();
                }
                let rel = (num / den).sqrt();
                assert!(rel < 1e-8, "{family:?} order {order}: spectral mismatch {rel:.3e}");
            }
        }
    }

    #[test]
    fn even_peak_has_zero_spatial_derivative() {
        let state = comoving_state();
        assert!(point(&state, 0.0).ux.norm() < 1e-16);

        let sech = ParameterState::new(AnsatzFamily::Sech, vec![0.8, 0.1, 1.5, 0.07, 3.0]).unwrap();
        assert!(point(&sech, 3.0).ux.norm() < 1e-16, "sech derivative at x_c");
    }

    #[test]
    fn gaussian_modulus_is_even_about_center() {
        let state = ParameterState::new(
            AnsatzFamily::GaussianFull,
            vec![0.1, 9.0, 0.05, 0.03, 0.2, 4.0],
        )
        .unwrap();
        for ds in [0.5, 3.7, 11.0] {
            let lhs = point(&state, 4.0 + ds).u.norm();
            let rhs = point(&state, 4.0 - ds).u.norm();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    #[test]
    fn poly_exponent_satisfies_alpha_beta_pairing() {
        // i·∂û/∂α_k = ∂û/∂β_k pointwise.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let state = random_admissible(AnsatzFamily::PolyExponent { degree: 2 }, &mut rng);
        let g = gauss_grid();
        let dq = param_derivatives(&state, &g).unwrap();
        for k in 0..3 {
            for j in 0..g.len() {
                let lhs = C64::i() * dq[k].values()[j];
                let rhs = dq[3 + k].values()[j];
                assert!((lhs - rhs).norm() <= 1e-15 * (1.0 + rhs.norm()));
            }
        }
    }

    #[test]
    fn gaussian_equals_its_poly_embedding() {
        let state = ParameterState::new(
            AnsatzFamily::GaussianComoving,
            vec![0.17, 8.0, -0.06, 0.9],
        )
        .unwrap();
        let poly = poly_embedding(&state).unwrap();
        let g = gauss_grid();
        let a = evaluate(&state, &g).unwrap();
        let b = evaluate(&poly, &g).unwrap();
        let worst = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "embedding mismatch {worst:.3e}");
    }

    #[test]
    fn soliton_state_is_the_exact_amplitude_width_relation() {
        let s = soliton_initial_state(1.0).unwrap();
        assert_relative_eq!(s.get("A_r").unwrap(), 1.0 / SQRT_2, epsilon = 1e-15);
        assert_eq!(s.get("A_i").unwrap(), 0.0);
        assert_eq!(s.get("U").unwrap(), 0.0);
        assert_eq!(s.get("x_c").unwrap(), 0.0);

        // |A|² = 1 exactly at L0 = √2/2.
        let s = soliton_initial_state(SQRT_2 / 2.0).unwrap();
        let a2 = s.get("A_r").unwrap().powi(2) + s.get("A_i").unwrap().powi(2);
        assert_relative_eq!(a2, 1.0, epsilon = 1e-14);

        assert!(soliton_initial_state(0.0).is_err());
        assert!(soliton_initial_state(-2.0).is_err());
    }

    #[test]
    fn inadmissible_states_are_rejected() {
        assert!(ParameterState::new(AnsatzFamily::GaussianComoving, vec![0.0, 15.0, 0.0, 0.0]).is_err());
        assert!(ParameterState::new(AnsatzFamily::GaussianComoving, vec![-0.1, 15.0, 0.0, 0.0]).is_err());
        assert!(ParameterState::new(AnsatzFamily::GaussianComoving, vec![0.1, 0.0, 0.0, 0.0]).is_err());
        assert!(ParameterState::new(AnsatzFamily::Sech, vec![0.0, 0.0, 1.0, 0.0, 0.0]).is_err());
        assert!(ParameterState::new(AnsatzFamily::Sech, vec![0.5, 0.0, -1.0, 0.0, 0.0]).is_err());
        // Positive leading real coefficient cannot decay.
        assert!(ParameterState::new(
            AnsatzFamily::PolyExponent { degree: 2 },
            vec![0.0, 0.0, 0.1, 0.0, 0.0, 0.0]
        )
        .is_err());
        // Odd leading degree cannot decay on both ends.
        assert!(ParameterState::new(
            AnsatzFamily::PolyExponent { degree: 3 },
            vec![0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]
        )
        .is_err());
        assert!(ParameterState::new(AnsatzFamily::GaussianComoving, vec![0.1, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn record_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for family in [
            AnsatzFamily::GaussianComoving,
            AnsatzFamily::GaussianFull,
            AnsatzFamily::Sech,
            AnsatzFamily::PolyExponent { degree: 2 },
        ] {
            let state = random_admissible(family, &mut rng).with_time(3.25);
            let text = state.to_record();
            let back = ParameterState::from_record(&text).unwrap();
            assert_eq!(state, back, "record round trip for {family:?}\n{text}");
        }
    }

    #[test]
    fn record_parse_errors_are_reported() {
        assert!(ParameterState::from_record("A = 0.1").is_err());
        assert!(ParameterState::from_record("family = gaussian_comoving\nA = 0.1").is_err());
        assert!(ParameterState::from_record("family = unknown\n").is_err());
    }
}
