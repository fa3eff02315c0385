//! Reduction of the Bloch problem near the origin to a 3×3 problem: the
//! critical basis at `ξ = 0`, reduced matrices, the rescaled cubic and its
//! discriminant, and the closed forms for the critical power `p*(α)` and
//! the `a²` discriminant coefficient `Γ(α, p)`.

use nalgebra::{DVector, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::{assemble_bloch, dispersion_omega, slice_spectrum, Classification};
use crate::error::{Error, Result};
use crate::torus::RealPeriodicFunction;
use crate::wave::{
    bifurcation_wavenumber_alpha, family_derivatives, solve_wave_with, FamilyDerivatives, ModelParams,
    WaveOptions, WaveSolution,
};

/// `p*(α) = (2^α(3+α) − 4 − 2α) / (2 + 2^α(α−1))`.
pub fn critical_power(alpha: f64) -> f64 {
    let t = 2f64.powf(alpha);
    (t * (3.0 + alpha) - 4.0 - 2.0 * alpha) / (2.0 + t * (alpha - 1.0))
}

pub fn critical_power_derivative(alpha: f64) -> f64 {
    let t = 2f64.powf(alpha);
    let ln2 = std::f64::consts::LN_2;
    let num = t * (3.0 + alpha) - 4.0 - 2.0 * alpha;
    let den = 2.0 + t * (alpha - 1.0);
    let dnum = t * ln2 * (3.0 + alpha) + t - 2.0;
    let dden = t * ln2 * (alpha - 1.0) + t;
    (dnum * den - num * dden) / (den * den)
}

/// Maximiser of `p*` on `[1, 10]` by bisection on the analytic derivative.
pub fn critical_power_max() -> (f64, f64) {
    let (mut lo, mut hi) = (1.0f64, 10.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if critical_power_derivative(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha_star = 0.5 * (lo + hi);
    (alpha_star, critical_power(alpha_star))
}

/// The two solutions `α₋ < α* < α₊` of `p*(α) = p`.
pub fn alpha_window(p: f64) -> Result<(f64, f64)> {
    let (alpha_star, p_max) = critical_power_max();
    if !(p > 1.0 && p < p_max) {
        return Err(Error::InvalidParameter(format!(
            "stability window needs 1 < p < {p_max:.6}, got {p}"
        )));
    }
    let root = |mut lo: f64, mut hi: f64| {
        let increasing = critical_power(hi) > critical_power(lo);
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if (critical_power(mid) < p) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut far = 2.0 * alpha_star;
    while critical_power(far) >= p {
        far *= 2.0;
    }
    Ok((root(1.0, alpha_star), root(alpha_star, far)))
}

/// `2^α(4 − (p−1)(α−1)) − 4 − 2(α+p)`, which vanishes exactly at `p = p*(α)`.
pub fn gamma_bracket(alpha: f64, p: f64) -> f64 {
    2f64.powf(alpha) * (4.0 - (p - 1.0) * (alpha - 1.0)) - 4.0 - 2.0 * (alpha + p)
}

/// Leading coefficient `Γ` of `Δ_{a,0,0} = Γ a² + O(a⁴)`.
pub fn gamma_coefficient(alpha: f64, p: f64) -> f64 {
    gamma_prefactor(alpha, p) * gamma_bracket(alpha, p)
}

/// `(p+1) α (1+α)⁴ / (2(2^α − 1))`.
pub fn gamma_prefactor(alpha: f64, p: f64) -> f64 {
    (p + 1.0) * alpha * (1.0 + alpha).powi(4) / (2.0 * (2f64.powf(alpha) - 1.0))
}

/// Classification of small waves predicted from `(α, p)` alone.
pub fn predicted_classification(alpha: f64, p: f64) -> Classification {
    if alpha < 1.0 {
        return Classification::Unstable;
    }
    let bracket = gamma_bracket(alpha, p);
    if bracket.abs() <= 1e-12 * gamma_prefactor(alpha, p).max(1.0) {
        Classification::Indeterminate
    } else if bracket > 0.0 {
        Classification::Stable
    } else {
        Classification::Unstable
    }
}

/// `(A₁(ξ), A₁(−ξ), A₂(ξ))`.
pub fn a1a2(alpha: f64, xi: f64) -> (f64, f64, f64) {
    let a1 = |x: f64| -1.0 + (1.0 + x).powf(alpha + 1.0) - x * x.abs().powf(alpha);
    let a2 = -2.0 + (1.0 - xi).powf(alpha + 1.0) + (1.0 + xi).powf(alpha + 1.0);
    (a1(xi), a1(-xi), a2)
}

/// Discriminant of the rescaled cubic for the constant state `Q_b`.
pub fn delta_constant_state(params: &ModelParams, b: f64, xi: f64) -> Result<f64> {
    if xi == 0.0 {
        return Err(Error::ZeroBlochFrequency);
    }
    let k0 = bifurcation_wavenumber_alpha(params, b)?;
    let (a1p, a1m, a2) = a1a2(params.alpha(), xi);
    let s = k0 / (params.p() * xi);
    Ok(s.powi(6) * (a1p * a1m * a2).powi(2))
}

/// `Δ_{0,b,ξ}/ξ²` as `ξ → 0`.
pub fn delta_constant_state_limit(params: &ModelParams, b: f64) -> Result<f64> {
    let k0 = bifurcation_wavenumber_alpha(params, b)?;
    let alpha = params.alpha();
    Ok(k0.powi(6) * alpha * alpha * (alpha + 1.0).powi(6) / params.p().powi(6))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubicVerdict {
    ThreeReal,
    ComplexPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicReduction {
    pub d2: f64,
    pub d1: f64,
    pub d0: f64,
    pub discriminant: f64,
    pub roots: [Complex64; 3],
    pub verdict: CubicVerdict,
}

pub const CUBIC_TIE_TOL: f64 = 1e-12;
const CUBIC_IMAG_TOL: f64 = 1e-6;

impl CubicReduction {
    fn from_parts(d: [Complex64; 3], roots: [Complex64; 3]) -> Result<Self> {
        let residue = d.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if residue > CUBIC_IMAG_TOL {
            return Err(Error::SymmetryViolated(residue));
        }
        let [d2, d1, d0] = d.map(|z| z.re);
        let discriminant = cubic_discriminant(d2, d1, d0);
        let verdict = if discriminant >= -CUBIC_TIE_TOL {
            CubicVerdict::ThreeReal
        } else {
            CubicVerdict::ComplexPair
        };
        Ok(Self {
            d2,
            d1,
            d0,
            discriminant,
            roots,
            verdict,
        })
    }
}

/// Discriminant of `X³ + d₂X² + d₁X + d₀`.
pub fn cubic_discriminant(d2: f64, d1: f64, d0: f64) -> f64 {
    18.0 * d2 * d1 * d0 + d2 * d2 * d1 * d1 - 4.0 * d2.powi(3) * d0 - 4.0 * d1.powi(3) - 27.0 * d0 * d0
}

/// Cubic with roots `X_j = λ_j/(ipξ)`.
pub fn cubic_from_eigenvalues(lams: [Complex64; 3], p: f64, xi: f64) -> Result<CubicReduction> {
    if xi == 0.0 {
        return Err(Error::ZeroBlochFrequency);
    }
    let scale = Complex64::new(0.0, p * xi);
    let x = lams.map(|l| l / scale);
    let d2 = -(x[0] + x[1] + x[2]);
    let d1 = x[0] * x[1] + x[0] * x[2] + x[1] * x[2];
    let d0 = -(x[0] * x[1] * x[2]);
    CubicReduction::from_parts([d2, d1, d0], x)
}

/// Cubic built from the critical triple of the full Bloch matrix at `ξ`.
pub fn cubic_at(w: &WaveSolution, xi: f64, n: usize) -> Result<CubicReduction> {
    let slice = slice_spectrum(&assemble_bloch(w, xi, n)?, false)?;
    cubic_from_eigenvalues(slice.critical, w.params.p(), xi)
}

/// The basis `η₀, η₁, η₂` of the generalised kernel at `ξ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalBasis {
    pub eta0: RealPeriodicFunction,
    pub eta1: RealPeriodicFunction,
    pub eta2: RealPeriodicFunction,
}

impl CriticalBasis {
    pub fn new(w: &WaveSolution, d: &FamilyDerivatives) -> Self {
        let p = w.params.p();
        let eta0 = d.dp_da.scaled(d.dk_alpha_db / (p + 1.0)).axpy(-d.dk_alpha_da / (p + 1.0), &d.dp_db);
        let eta1 = if w.a == 0.0 {
            RealPeriodicFunction::sine(1.0, 1, w.truncation())
        } else {
            d.dp_dz.scaled(-1.0 / w.a)
        };
        let eta2 = w.profile.scaled(d.dk_alpha_db).axpy(-p * w.wavenumber_alpha, &d.dp_db);
        Self { eta0, eta1, eta2 }
    }

    pub fn as_array(&self) -> [&RealPeriodicFunction; 3] {
        [&self.eta0, &self.eta1, &self.eta2]
    }
}

/// `B[j,k] = ⟨η_j, M η_k⟩/⟨η_j, η_j⟩` and `I[j,k] = ⟨η_j, η_k⟩/⟨η_j, η_j⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedMatrices {
    pub bmat: Matrix3<Complex64>,
    pub imat: Matrix3<Complex64>,
    pub xi: f64,
}

const DEGENERATE_NORM: f64 = 1e-12;

impl ReducedMatrices {
    /// Rayleigh quotients of the Bloch matrix at `ξ` on a fixed basis.
    pub fn project(w: &WaveSolution, basis: &CriticalBasis, xi: f64) -> Result<Self> {
        let n = w.truncation();
        let bm = assemble_bloch(w, xi, n)?;
        let vecs: Vec<DVector<Complex64>> = basis
            .as_array()
            .iter()
            .map(|f| DVector::from_column_slice(f.resized(n).coeffs()))
            .collect();
        let images: Vec<DVector<Complex64>> = vecs.iter().map(|v| &bm.m * v).collect();
        let mut bmat = Matrix3::zeros();
        let mut imat = Matrix3::zeros();
        for j in 0..3 {
            let nrm = vecs[j].dotc(&vecs[j]).re;
            if nrm * 2.0 * std::f64::consts::PI <= DEGENERATE_NORM {
                return Err(Error::DegenerateBasis(j, nrm));
            }
            for k in 0..3 {
                bmat[(j, k)] = vecs[j].dotc(&images[k]) / nrm;
                imat[(j, k)] = vecs[j].dotc(&vecs[k]) / nrm;
            }
        }
        Ok(Self { bmat, imat, xi })
    }

    /// Closed form for the constant state `Q_b` in the basis `cos z, sin z, 1`.
    pub fn at_constant_state(params: &ModelParams, b: f64, xi: f64) -> Result<Self> {
        let k0 = bifurcation_wavenumber_alpha(params, b)?;
        let scale = k0 / params.p();
        let om = |k: f64| scale * dispersion_omega(params, k);
        let (wp, w0, wm) = (om(1.0 + xi), om(xi), om(-1.0 + xi));
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let sum = 0.5 * (wp + wm);
        let diff = 0.5 * (wp - wm);
        let bmat = Matrix3::new(
            c(0.0, sum), c(diff, 0.0), c(0.0, 0.0),
            c(-diff, 0.0), c(0.0, sum), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, w0),
        );
        Ok(Self {
            bmat,
            imat: Matrix3::identity(),
            xi,
        })
    }

    /// Cubic of the generalised problem `B v = λ I v`, rescaled by `ipξ`.
    pub fn cubic(&self, p: f64) -> Result<CubicReduction> {
        if self.xi == 0.0 {
            return Err(Error::ZeroBlochFrequency);
        }
        let inv = self.imat.try_inverse().ok_or(Error::DegenerateBasis(0, 0.0))?;
        let g = inv * self.bmat / Complex64::new(0.0, p * self.xi);
        let tr = g.trace();
        let tr2 = (g * g).trace();
        let d2 = -tr;
        let d1 = 0.5 * (tr * tr - tr2);
        let d0 = -g.determinant();
        let ev = crate::eigen::eigenvalues(&nalgebra::DMatrix::from_iterator(3, 3, g.iter().copied()))?;
        CubicReduction::from_parts([d2, d1, d0], [ev[0], ev[1], ev[2]])
    }
}

/// Reduced matrices at `ξ = 0` in the basis built from the family derivatives.
pub fn reduced_matrices_at_zero_xi(w: &WaveSolution, d: &FamilyDerivatives) -> Result<ReducedMatrices> {
    ReducedMatrices::project(w, &CriticalBasis::new(w, d), 0.0)
}

/// `σ_{a,b} = p a ∂_b(k^α)`, the only nonzero entry of `B` at `ξ = 0`.
pub fn sigma(w: &WaveSolution, d: &FamilyDerivatives) -> f64 {
    w.params.p() * w.a * d.dk_alpha_db
}

/// Predicted `a`-coefficient of `I[0,2]` at `ξ = 0`.
pub fn i02_slope(alpha: f64, p: f64) -> f64 {
    let t = 2f64.powf(alpha);
    (t * (p + 3.0) - 2.0 * (p + 2.0)) / (2.0 * (t - 1.0))
}

/// Predicted `(0,2)` entry of `B₁`; the `(2,0)` entry is half of it.
pub fn b1_top_right(alpha: f64, p: f64) -> Complex64 {
    let t = 2f64.powf(alpha);
    Complex64::new(0.0, (alpha - 1.0) * p * (p + 1.0) + p * (2.0 + t * (p - 1.0)) / (2.0 * (t - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub a: f64,
    /// `Δ(a,0,ξ) − Δ(0,0,ξ)` at `4ξ₀, 2ξ₀, ξ₀`.
    pub excess: [f64; 3],
    pub extrapolated: f64,
    pub b1_02: Complex64,
    pub b1_20: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantReport {
    pub alpha: f64,
    pub p: f64,
    pub xi_small: f64,
    pub rows: Vec<AmplitudeRow>,
    pub gamma: f64,
    pub fitted_gamma: f64,
    /// `|fitted − Γ|/|Γ|`; absent when `Γ = 0`.
    pub relative_error: Option<f64>,
    pub b1_predicted: Complex64,
    pub b1_relative_error: f64,
    pub gamma_passed: bool,
    pub b1_passed: bool,
}

pub const GAMMA_REL_TOL: f64 = 0.05;
pub const B1_REL_TOL: f64 = 0.10;
/// Scale for comparing a vanishing `Γ`: `1e-3 · Γ(2, 1)`.
pub fn borderline_gamma_scale() -> f64 {
    1e-3 * gamma_coefficient(2.0, 1.0)
}

/// Richardson value at `ξ → 0` from samples at `4h, 2h, h` of a function
/// even in `ξ`.
pub fn richardson_even(values: [f64; 3]) -> f64 {
    let [d4, d2, d1] = values;
    (64.0 * d1 - 20.0 * d2 + d4) / 45.0
}

/// Extrapolates `Δ(a,0,ξ) − Δ(0,0,ξ)` to `ξ = 0`, fits `γa² + ca⁴` over the
/// first two amplitudes, and checks the `O(aξ)` structure of `B`.
pub fn discriminant_scaling_check(
    params: ModelParams,
    amplitudes: &[f64],
    xi_small: f64,
    opts: &WaveOptions,
) -> Result<DiscriminantReport> {
    if amplitudes.len() < 2 {
        return Err(Error::InvalidParameter("need two amplitudes".into()));
    }
    if xi_small <= 0.0 || 4.0 * xi_small > 0.5 {
        return Err(Error::InvalidParameter(format!("xi_small must lie in (0, 1/8], got {xi_small}")));
    }
    let (alpha, p) = (params.alpha(), params.p());
    let n = opts.truncation;
    let xis = [4.0 * xi_small, 2.0 * xi_small, xi_small];
    let mut rows = Vec::new();
    let mut guess: Option<WaveSolution> = None;
    for &a in amplitudes {
        let w = solve_wave_with(params, a, 0.0, guess.as_ref(), opts)?;
        let mut excess = [0.0; 3];
        for (e, &xi) in excess.iter_mut().zip(&xis) {
            *e = cubic_at(&w, xi, n)?.discriminant - delta_constant_state(&params, 0.0, xi)?;
        }
        let d = family_derivatives(&w)?;
        let basis = CriticalBasis::new(&w, &d);
        let at_zero = ReducedMatrices::project(&w, &basis, 0.0)?;
        let at_xi = ReducedMatrices::project(&w, &basis, xi_small)?;
        let flat = ReducedMatrices::at_constant_state(&params, 0.0, xi_small)?;
        let b1 = (at_xi.bmat - flat.bmat - at_zero.bmat) / Complex64::new(a * xi_small, 0.0);
        rows.push(AmplitudeRow {
            a,
            excess,
            extrapolated: richardson_even(excess),
            b1_02: b1[(0, 2)],
            b1_20: b1[(2, 0)],
        });
        guess = Some(w);
    }
    let (a1, a2) = (rows[0].a * rows[0].a, rows[1].a * rows[1].a);
    let (r1, r2) = (rows[0].extrapolated, rows[1].extrapolated);
    let fitted_gamma = (r1 * a2 * a2 - r2 * a1 * a1) / (a1 * a2 * a2 - a2 * a1 * a1);
    let gamma = gamma_coefficient(alpha, p);
    let relative_error = (gamma.abs() > borderline_gamma_scale()).then(|| (fitted_gamma - gamma).abs() / gamma.abs());
    let gamma_passed = match relative_error {
        Some(e) => e <= GAMMA_REL_TOL,
        None => fitted_gamma.abs() <= borderline_gamma_scale(),
    };
    let b1_predicted = b1_top_right(alpha, p);
    let best = rows
        .iter()
        .min_by(|x, y| x.a.abs().total_cmp(&y.a.abs()))
        .expect("two rows");
    let b1_relative_error = ((best.b1_02 - b1_predicted).norm() / b1_predicted.norm())
        .max((best.b1_20 - b1_predicted * 0.5).norm() / (0.5 * b1_predicted.norm()));
    Ok(DiscriminantReport {
        alpha,
        p,
        xi_small,
        rows,
        gamma,
        fitted_gamma,
        relative_error,
        b1_predicted,
        b1_relative_error,
        gamma_passed,
        b1_passed: b1_relative_error <= B1_REL_TOL,
    })
}
