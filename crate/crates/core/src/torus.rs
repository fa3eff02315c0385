//! Fourier-side representation of real 2π-periodic functions and the
//! multipliers that act on them.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const POSITIVITY_FLOOR: f64 = 1e-10;

/// Real 2π-periodic function stored as `û(n)` for `|n| <= N`.
///
/// Coefficients are kept exactly Hermitian; index `n + N` holds mode `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPeriodicFunction {
    coeffs: Vec<Complex64>,
}

impl RealPeriodicFunction {
    /// Builds from `2N+1` coefficients ordered from mode `-N` to `N`.
    /// Round-off asymmetry is averaged away; anything larger is rejected.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::ShapeMismatch(format!(
                "expected an odd number of coefficients, got {}",
                coeffs.len()
            )));
        }
        let n = coeffs.len() / 2;
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut defect: f64 = 0.0;
        for k in 0..=n {
            defect = defect.max((coeffs[n + k] - coeffs[n - k].conj()).norm());
        }
        if defect > HERMITIAN_TOL * scale.max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrized(coeffs))
    }

    fn symmetrized(mut coeffs: Vec<Complex64>) -> Self {
        let n = coeffs.len() / 2;
        coeffs[n].im = 0.0;
        for k in 1..=n {
            let avg = 0.5 * (coeffs[n + k] + coeffs[n - k].conj());
            coeffs[n + k] = avg;
            coeffs[n - k] = avg.conj();
        }
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * n + 1],
        }
    }

    pub fn constant(value: f64, n: usize) -> Self {
        let mut f = Self::zeros(n);
        f.coeffs[n] = Complex64::new(value, 0.0);
        f
    }

    /// `amplitude * cos(k z)`.
    pub fn cosine(amplitude: f64, k: usize, n: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        if k <= n {
            c[k] = if k == 0 { amplitude } else { 0.5 * amplitude };
        }
        Self::from_cosine_coeffs(&c)
    }

    /// `amplitude * sin(k z)`.
    pub fn sine(amplitude: f64, k: usize, n: usize) -> Self {
        let mut f = Self::zeros(n);
        if k == 0 || k > n {
            return f;
        }
        f.coeffs[n + k] = Complex64::new(0.0, -0.5 * amplitude);
        f.coeffs[n - k] = Complex64::new(0.0, 0.5 * amplitude);
        f
    }

    /// Even function `c_0 + Σ_{n>=1} 2 c_n cos(nz)`, i.e. `û(±n) = c_n`.
    pub fn from_cosine_coeffs(c: &[f64]) -> Self {
        assert!(!c.is_empty(), "need at least the mean coefficient");
        let n = c.len() - 1;
        let mut f = Self::zeros(n);
        for (k, &v) in c.iter().enumerate() {
            f.coeffs[n + k] = Complex64::new(v, 0.0);
            f.coeffs[n - k] = Complex64::new(v, 0.0);
        }
        f
    }

    /// Interpolates equispaced samples `f(2πj/M)`, keeping modes `|n| <= n_out`.
    pub fn from_samples(values: &[f64], n_out: usize) -> Result<Self> {
        let m = values.len();
        if m < 2 * n_out + 1 {
            return Err(Error::ShapeMismatch(format!(
                "{m} samples cannot resolve {} modes",
                2 * n_out + 1
            )));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let inv_m = 1.0 / m as f64;
        let coeffs = (-(n_out as i64)..=n_out as i64)
            .map(|k| buf[k.rem_euclid(m as i64) as usize] * inv_m)
            .collect();
        Ok(Self::symmetrized(coeffs))
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// Coefficient of mode `n`; zero outside the stored range.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let big_n = self.truncation() as i64;
        if n.abs() > big_n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + big_n) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `û(0), …, û(N)` real parts, the natural coordinates of an even function.
    pub fn cosine_coeffs(&self) -> Vec<f64> {
        let n = self.truncation();
        self.coeffs[n..].iter().map(|c| c.re).collect()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[self.truncation()].re
    }

    pub fn evaluate(&self, z: f64) -> f64 {
        self.evaluate_complex(z).re
    }

    pub fn evaluate_complex(&self, z: f64) -> Complex64 {
        let n = self.truncation() as i64;
        (-n..=n)
            .map(|k| self.coeff(k) * Complex64::from_polar(1.0, k as f64 * z))
            .sum()
    }

    /// Values on the grid `z_j = 2πj/m`.
    pub fn samples(&self, m: usize) -> Vec<f64> {
        self.samples_complex(m).into_iter().map(|c| c.re).collect()
    }

    fn samples_complex(&self, m: usize) -> Vec<Complex64> {
        assert!(m > 2 * self.truncation(), "grid of {m} points aliases {} modes", self.coeffs.len());
        let n = self.truncation() as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for k in -n..=n {
            buf[k.rem_euclid(m as i64) as usize] = self.coeff(k);
        }
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        buf
    }

    /// Zero-pads or truncates to `n` modes.
    pub fn resized(&self, n: usize) -> Self {
        let coeffs = (-(n as i64)..=n as i64).map(|k| self.coeff(k)).collect();
        Self { coeffs }
    }

    /// `sqrt(Σ |û(n)|²)`, the coefficient ℓ² norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `∫_0^{2π} conj(f) g dz`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let n = self.truncation().max(other.truncation()) as i64;
        2.0 * PI * (-n..=n).map(|k| self.coeff(k).conj() * other.coeff(k)).sum::<Complex64>()
    }

    /// Largest imaginary part of any coefficient; zero for even functions.
    pub fn odd_part_size(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let n = self.truncation() as i64;
        let coeffs = (-n..=n).map(|k| f(k, self.coeff(k))).collect();
        Self::symmetrized(coeffs)
    }

    pub fn derivative(&self) -> Self {
        self.map_modes(|k, c| c * Complex64::new(0.0, k as f64))
    }

    /// Hilbert transform, symbol `-i sgn(n)`.
    pub fn hilbert(&self) -> Self {
        self.map_modes(|k, c| c * Complex64::new(0.0, -(k.signum() as f64)))
    }

    pub fn project_mean_zero(&self) -> Self {
        self.map_modes(|k, c| if k == 0 { Complex64::new(0.0, 0.0) } else { c })
    }

    /// Translate: returns `z ↦ f(z + shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        self.map_modes(|k, c| c * Complex64::from_polar(1.0, k as f64 * shift))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`, at the larger of the two truncations.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let n = self.truncation().max(other.truncation()) as i64;
        let coeffs = (-n..=n).map(|k| self.coeff(k) + other.coeff(k) * s).collect();
        Self { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn min_value(&self, m: usize) -> f64 {
        self.samples(m).into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// `Λ^s`: multiplies mode `n` by `|n|^s`. `s = 0` is the identity.
pub fn fractional_multiplier(f: &RealPeriodicFunction, s: f64) -> Result<RealPeriodicFunction> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "multiplier order must be finite and >= 0, got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.map_modes(|k, c| c * (k.unsigned_abs() as f64).powf(s)))
}

/// `Λ^{-s}` on the mean-zero subspace.
pub fn fractional_inverse(f: &RealPeriodicFunction, s: f64) -> Result<RealPeriodicFunction> {
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "inverse order must be finite and > 0, got {s}"
        )));
    }
    let mean = f.coeff(0).norm();
    if mean > HERMITIAN_TOL * f.norm().max(1.0) {
        return Err(Error::NonzeroMean(mean));
    }
    Ok(f.map_modes(|k, c| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            c / (k.unsigned_abs() as f64).powf(s)
        }
    }))
}

/// `f^q` truncated back to the input's modes.
pub fn nonlinear_power(f: &RealPeriodicFunction, q: f64) -> Result<RealPeriodicFunction> {
    nonlinear_power_truncated(f, q, f.truncation())
}

/// `f^q` computed on a zero-padded grid and truncated to `n_out` modes.
pub fn nonlinear_power_truncated(
    f: &RealPeriodicFunction,
    q: f64,
    n_out: usize,
) -> Result<RealPeriodicFunction> {
    if !q.is_finite() || q < 1.0 {
        return Err(Error::InvalidParameter(format!("power must be >= 1, got {q}")));
    }
    let n = f.truncation();
    let dealias = ((q + 1.0) * (2 * n + 1) as f64).ceil() as usize;
    let exact_band = (q.ceil() as usize) * n + n_out + 1;
    let m = dealias.max(exact_band).max(2 * n_out + 1);
    let values = f.samples(m);
    let integer = q.fract() == 0.0;
    let powered: Vec<f64> = if integer {
        let e = q as i32;
        values.iter().map(|v| v.powi(e)).collect()
    } else {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= POSITIVITY_FLOOR {
            return Err(Error::NonPositiveProfile(min));
        }
        values.iter().map(|v| (q * v.ln()).exp()).collect()
    };
    let mut out = RealPeriodicFunction::from_samples(&powered, n_out)?;
    if f.odd_part_size() == 0.0 {
        // even input, even output
        for c in out.coeffs.iter_mut() {
            c.im = 0.0;
        }
    }
    Ok(out)
}

/// Toeplitz matrix `(n, m) ↦ f̂(n − m)` for `|n|, |m| <= n_modes`.
pub fn convolution_matrix(f: &RealPeriodicFunction, n_modes: usize) -> DMatrix<Complex64> {
    let size = 2 * n_modes + 1;
    let off = n_modes as i64;
    DMatrix::from_fn(size, size, |i, j| f.coeff((i as i64 - off) - (j as i64 - off)))
}

/// Generalised binomial coefficient `C(x, m)`.
pub fn binomial(x: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, j| acc * (x - j as f64) / (j + 1) as f64)
}

/// One term `C(α+1, m) ξ^m × multiplier_m(k)` of the shifted symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolTerm {
    pub power: usize,
    pub coefficient: f64,
}

impl SymbolTerm {
    /// `sgn(k)^{m-1} |k|^{α-m+1}`: `|k|^{α-2(l-1)}` for odd `m = 2l-1` and
    /// `k|k|^{α-2r}` for even `m = 2r`. Zero at `k = 0`.
    pub fn multiplier(&self, alpha: f64, k: i64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let abs = k.unsigned_abs() as f64;
        let sign = if self.power.is_multiple_of(2) { k.signum() as f64 } else { 1.0 };
        sign * abs.powf(alpha - self.power as f64 + 1.0)
    }
}

/// Expansion of `(k+ξ)|k+ξ|^α` in powers of `ξ` for `k != 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolExpansion {
    pub alpha: f64,
    pub xi: f64,
    pub terms: Vec<SymbolTerm>,
}

impl SymbolExpansion {
    /// `i (k|k|^α + Σ_{m<=order} ...)` for `k != 0`; the mean mode gets the
    /// separate `iξ|ξ|^α` term.
    pub fn partial_sum(&self, k: i64, order: usize) -> Complex64 {
        if k == 0 {
            return self.zero_mode_term();
        }
        let base = k as f64 * (k.unsigned_abs() as f64).powf(self.alpha);
        let tail: f64 = self
            .terms
            .iter()
            .take_while(|t| t.power <= order)
            .map(|t| t.coefficient * t.multiplier(self.alpha, k) * self.xi.powi(t.power as i32))
            .sum();
        Complex64::new(0.0, base + tail)
    }

    pub fn exact(&self, k: i64) -> Complex64 {
        let s = k as f64 + self.xi;
        Complex64::new(0.0, s * s.abs().powf(self.alpha))
    }

    pub fn zero_mode_term(&self) -> Complex64 {
        Complex64::new(0.0, self.xi * self.xi.abs().powf(self.alpha))
    }

    pub fn max_order(&self) -> usize {
        self.terms.last().map_or(0, |t| t.power)
    }

    /// Applies the order-`order` truncation of the shifted operator to `f`.
    pub fn apply(&self, f: &RealPeriodicFunction, order: usize) -> Vec<Complex64> {
        let n = f.truncation() as i64;
        (-n..=n).map(|k| self.partial_sum(k, order) * f.coeff(k)).collect()
    }
}

pub fn bloch_symbol_terms(alpha: f64, xi: f64, max_order: usize) -> Result<SymbolExpansion> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if !(xi.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("need |xi| < 1, got {xi}")));
    }
    if max_order == 0 {
        return Err(Error::InvalidParameter("max_order must be >= 1".into()));
    }
    let terms = (1..=max_order)
        .map(|m| SymbolTerm {
            power: m,
            coefficient: binomial(alpha + 1.0, m),
        })
        .collect();
    Ok(SymbolExpansion { alpha, xi, terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn multiplier_examples() {
        let c1 = RealPeriodicFunction::cosine(1.0, 1, 8);
        assert_eq!(fractional_multiplier(&c1, 2.7).unwrap(), c1);

        let c2 = RealPeriodicFunction::cosine(1.0, 2, 8);
        let out = fractional_multiplier(&c2, 2.0).unwrap();
        assert!(close(out.coeff(2).re, 2.0, 1e-15));
        assert!(close(out.coeff(-2).re, 2.0, 1e-15));

        let one = RealPeriodicFunction::constant(1.0, 8);
        assert_eq!(fractional_multiplier(&one, 1.0).unwrap().norm(), 0.0);
        assert_eq!(fractional_multiplier(&one, 0.0).unwrap(), one);
        assert!(fractional_multiplier(&one, -1.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let c2 = RealPeriodicFunction::cosine(1.0, 2, 8);
        let out = fractional_inverse(&c2, 1.0).unwrap();
        assert!(close(out.coeff(2).re, 0.25, 1e-15));

        let s3 = RealPeriodicFunction::sine(1.0, 3, 8);
        let out = fractional_inverse(&s3, 2.0).unwrap();
        assert!(close(out.evaluate(0.3), (0.9f64).sin() / 9.0, 1e-15));

        let one = RealPeriodicFunction::constant(1.0, 8);
        assert!(matches!(fractional_inverse(&one, 1.0), Err(Error::NonzeroMean(_))));
    }

    #[test]
    fn power_examples() {
        let one = RealPeriodicFunction::constant(1.0, 4);
        let cube = nonlinear_power(&one, 3.0).unwrap();
        assert!(cube.sub(&one).norm() < 1e-15);

        let f = RealPeriodicFunction::constant(1.0, 4).add(&RealPeriodicFunction::cosine(0.1, 1, 4));
        let sq = nonlinear_power(&f, 2.0).unwrap();
        assert!(close(sq.coeff(0).re, 1.005, 1e-14));
        assert!(close(2.0 * sq.coeff(1).re, 0.2, 1e-14));
        assert!(close(2.0 * sq.coeff(2).re, 0.005, 1e-14));
        assert!(sq.coeff(3).norm() < 1e-15);

        let c = RealPeriodicFunction::cosine(1.0, 1, 4);
        let sq = nonlinear_power(&c, 2.0).unwrap();
        assert!(close(sq.coeff(0).re, 0.5, 1e-15));
        assert!(close(sq.coeff(2).re, 0.25, 1e-15));
    }

    #[test]
    fn fractional_power_guard() {
        let c = RealPeriodicFunction::cosine(1.0, 1, 4);
        assert!(matches!(nonlinear_power(&c, 1.5), Err(Error::NonPositiveProfile(_))));
        assert!(nonlinear_power(&c, 0.5).is_err());
        let f = RealPeriodicFunction::constant(4.0, 4);
        assert!(close(nonlinear_power(&f, 1.5).unwrap().mean(), 8.0, 1e-13));
    }

    #[test]
    fn convolution_examples() {
        let one = RealPeriodicFunction::constant(1.0, 3);
        let id = convolution_matrix(&one, 3);
        assert_eq!(id, DMatrix::identity(7, 7));

        let c = RealPeriodicFunction::cosine(1.0, 1, 3);
        let m = convolution_matrix(&c, 3);
        for i in 0..7 {
            for j in 0..7 {
                let want = if (i as i64 - j as i64).abs() == 1 { 0.5 } else { 0.0 };
                assert_eq!(m[(i, j)], Complex64::new(want, 0.0));
            }
        }
        let g = nalgebra::DVector::from_column_slice(c.coeffs());
        let prod = &m * g;
        assert!(close(prod[3].re, 0.5, 1e-15));
        assert!(close(prod[5].re, 0.25, 1e-15));
        assert!(close(prod[1].re, 0.25, 1e-15));
    }

    #[test]
    fn symbol_cubic_case_is_exact() {
        let e = bloch_symbol_terms(2.0, 0.3, 6).unwrap();
        let coeffs: Vec<f64> = e.terms.iter().map(|t| t.coefficient).collect();
        assert_eq!(&coeffs[..3], &[3.0, 3.0, 1.0]);
        assert!(coeffs[3..].iter().all(|&c| c == 0.0));
        for k in [-5i64, -1, 1, 3] {
            assert!((e.partial_sum(k, 3) - e.exact(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn symbol_benjamin_ono_convergence() {
        let e = bloch_symbol_terms(1.0, 0.25, 6).unwrap();
        let exact = e.exact(2).im;
        assert!(close(exact, 5.0625, 1e-15));
        let errs: Vec<f64> = (1..=6).map(|m| (e.partial_sum(2, m).im - exact).abs()).collect();
        for w in errs[1..].windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(errs[5] < 1e-12);
    }

    #[test]
    fn symbol_first_term_and_zero_mode() {
        let e = bloch_symbol_terms(1.7, 0.1, 2).unwrap();
        assert!(close(e.terms[0].coefficient, 2.7, 1e-15));
        assert!(close(e.terms[0].multiplier(1.7, 3), 3f64.powf(1.7), 1e-12));
        assert!(close(e.partial_sum(0, 2).im, 0.1 * 0.1f64.powf(1.7), 1e-16));
        assert!(bloch_symbol_terms(1.0, 1.0, 3).is_err());
        assert!(bloch_symbol_terms(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn hermitian_checks() {
        let mut c = vec![Complex64::new(0.0, 0.0); 5];
        c[3] = Complex64::new(1.0, 0.0);
        assert!(matches!(RealPeriodicFunction::from_coeffs(c.clone()), Err(Error::NotHermitian(_))));
        c[1] = Complex64::new(1.0, 0.0);
        assert!(RealPeriodicFunction::from_coeffs(c).is_ok());
        assert!(RealPeriodicFunction::from_coeffs(vec![Complex64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn hilbert_and_derivative() {
        let c = RealPeriodicFunction::cosine(1.0, 2, 4);
        let h = c.hilbert();
        assert!(close(h.evaluate(0.4), (0.8f64).sin(), 1e-15));
        let d = c.derivative();
        assert!(close(d.evaluate(0.4), -2.0 * (0.8f64).sin(), 1e-15));
        // H ∂ = Λ
        let lam = fractional_multiplier(&c, 1.0).unwrap();
        assert!(d.hilbert().sub(&lam).norm() < 1e-15);
    }
}
