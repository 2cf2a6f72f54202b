//! Uniform periodic grid, FFT pair, spectral differentiation, and quadrature.
//!
//! All improper integrals ∫_ℝ of the reduction formulas are evaluated on a
//! truncated periodic box (the reference configuration is a 256π domain with
//! 2¹⁰ points, wide enough that wave-packet tails are far below round-off).
//! Quadrature is the rectangle rule, which is spectrally accurate for smooth
//! periodic integrands. Callers that assemble reduced-order systems should
//! confirm [`ComplexField::tail_ratio`] is negligible before trusting the
//! truncation.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};
use crate::C64;

/// Uniform periodic grid on [−L/2, L/2) with power-of-two resolution.
///
/// Wavenumbers follow the standard split ordering k_j = 2π·m_j/L with
/// m_j = 0, 1, …, N/2−1, −N/2, …, −1; the Nyquist mode sits in the negative
/// half and is zeroed in odd-order spectral derivatives to remove its sign
/// ambiguity.
pub struct PeriodicGrid {
    domain_length: f64,
    num_points: usize,
    points: Vec<f64>,
    wavenumbers: Vec<f64>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("domain_length", &self.domain_length)
            .field("num_points", &self.num_points)
            .finish()
    }
}

impl PeriodicGrid {
    pub fn new(domain_length: f64, num_points: usize) -> Result<Arc<Self>> {
        if !(domain_length.is_finite() && domain_length > 0.0) {
            return Err(CoreError::InvalidGrid(format!(
                "domain length must be positive and finite, got {domain_length}"
            )));
        }
        if num_points < 8 || !num_points.is_power_of_two() {
            return Err(CoreError::InvalidGrid(format!(
                "num_points must be a power of two ≥ 8, got {num_points}"
            )));
        }
        let n = num_points;
        let dx = domain_length / n as f64;
        let points = (0..n).map(|j| -0.5 * domain_length + j as f64 * dx).collect();
        let scale = 2.0 * PI / domain_length;
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                m as f64 * scale
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(n);
        let fft_inverse = planner.plan_fft_inverse(n);
        Ok(Arc::new(Self {
            domain_length,
            num_points,
            points,
            wavenumbers,
            fft_forward,
            fft_inverse,
        }))
    }

    /// The reference DNS configuration: domain 256π, 2¹⁰ points.
    pub fn nls_default() -> Arc<Self> {
        Self::new(256.0 * PI, 1 << 10).expect("reference grid parameters are valid")
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.domain_length / self.num_points as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// True when `other` discretizes the same box at the same resolution.
    pub fn compatible(&self, other: &Self) -> bool {
        self.num_points == other.num_points
            && (self.domain_length - other.domain_length).abs()
                <= 1e-12 * self.domain_length.abs()
    }

    /// Rectangle-rule quadrature Δx·Σ values (spectrally accurate for smooth
    /// periodic integrands).
    pub fn integrate(&self, values: &[C64]) -> C64 {
        assert_eq!(values.len(), self.num_points, "quadrature length mismatch");
        values.iter().sum::<C64>() * self.dx()
    }

    pub fn integrate_real(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.num_points, "quadrature length mismatch");
        values.iter().sum::<f64>() * self.dx()
    }

    /// L² inner product ⟨a, b⟩ = Δx·Σ a_j·conj(b_j), conjugate-linear in the
    /// second argument (the convention used by the metric tensor).
    pub fn inner_product(&self, a: &[C64], b: &[C64]) -> C64 {
        assert_eq!(a.len(), self.num_points);
        assert_eq!(b.len(), self.num_points);
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<C64>() * self.dx()
    }

    pub(crate) fn fft_in_place(&self, buf: &mut [C64]) {
        self.fft_forward.process(buf);
    }

    pub(crate) fn ifft_in_place(&self, buf: &mut [C64]) {
        self.fft_inverse.process(buf);
    }
}

/// Complex envelope samples u(x_j) on a [`PeriodicGrid`].
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: Arc<PeriodicGrid>,
    values: Vec<C64>,
}

impl ComplexField {
    pub fn new(grid: Arc<PeriodicGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::InvalidArgument(format!(
                "field has {} samples but grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "field contains non-finite samples".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<PeriodicGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: Arc<PeriodicGrid>, mut f: impl FnMut(f64) -> C64) -> Self {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Ratio of the largest boundary sample to the peak sample. A wave packet
    /// is safely contained in the box when this is ≲ 1e−12.
    pub fn tail_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        self.values[0].norm().max(self.values[n - 1].norm()) / peak
    }

    /// Forward DFT, returning mode amplitudes c_m such that
    /// u_j = Σ_m c_m·exp(i·k_m·x_j). With this normalization Parseval reads
    /// Δx·Σ|u_j|² = L·Σ|c_m|².
    pub fn forward_transform(&self) -> Vec<C64> {
        let n = self.grid.len();
        let mut buf = self.values.clone();
        // The grid starts at −L/2, so de-phase the DFT (which assumes x₀ = 0)
        // by the parity factor exp(−i·k_m·L/2) = (−1)^m.
        self.grid.fft_in_place(&mut buf);
        let inv_n = 1.0 / n as f64;
        for (m, c) in buf.iter_mut().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *c *= sign * inv_n;
        }
        buf
    }

    /// Inverse of [`ComplexField::forward_transform`].
    pub fn inverse_transform(grid: Arc<PeriodicGrid>, coefficients: &[C64]) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(CoreError::InvalidArgument(
                "coefficient length does not match grid".into(),
            ));
        }
        let mut buf: Vec<C64> = coefficients
            .iter()
            .enumerate()
            .map(|(m, &c)| if m % 2 == 0 { c } else { -c })
            .collect();
        grid.ifft_in_place(&mut buf);
        Ok(Self { grid, values: buf })
    }

    /// Spatial derivative of the given order via multiplication by (ik)^order
    /// in spectral space. Orders 1–3 are supported; the Nyquist mode is zeroed
    /// for odd orders.
    pub fn spectral_derivative(&self, order: u32) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(CoreError::InvalidArgument(format!(
                "derivative order must be 1, 2 or 3, got {order}"
            )));
        }
        let n = self.grid.len();
        let mut buf = self.values.clone();
        self.grid.fft_in_place(&mut buf);
        let inv_n = 1.0 / n as f64;
        for (m, c) in buf.iter_mut().enumerate() {
            let k = self.grid.wavenumbers()[m];
            let ik = C64::new(0.0, k);
            let mut factor = ik.powu(order);
            if order % 2 == 1 && m == n / 2 {
                factor = C64::new(0.0, 0.0);
            }
            *c *= factor * inv_n;
        }
        self.grid.ifft_in_place(&mut buf);
        Ok(Self { grid: self.grid.clone(), values: buf })
    }

    /// The surface velocity-potential gradient of MNLS:
    /// −½·F⁻¹[|k|·F[|u|²]]. The result is real up to round-off.
    pub fn hilbert_like_operator(&self) -> Self {
        let n = self.grid.len();
        let mut buf: Vec<C64> = self
            .values
            .iter()
            .map(|v| C64::new(v.norm_sqr(), 0.0))
            .collect();
        self.grid.fft_in_place(&mut buf);
        let inv_n = 1.0 / n as f64;
        for (m, c) in buf.iter_mut().enumerate() {
            *c *= -0.5 * self.grid.wavenumbers()[m].abs() * inv_n;
        }
        self.grid.ifft_in_place(&mut buf);
        Self { grid: self.grid.clone(), values: buf }
    }

    /// Mass ∫|u|²dx by quadrature.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }
}
