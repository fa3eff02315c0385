//! Small-amplitude periodic waves `(P_{a,b}, k^α)` of the rescaled profile
//! equation `−k^α Λ^α P − P + P^{p+1} = b`, found by bordered Newton
//! continuation on the even cosine coefficients.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{nonlinear_power_truncated, RealPeriodicFunction};

/// Dispersion exponent `α > 1/2` and nonlinearity power `p >= 1`.
///
/// Rational `p = m/n` is accepted as any real number; profiles near the
/// equilibrium are positive, so `P^{p+1}` is evaluated on positive values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    p: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.5 {
            return Err(Error::InvalidParameter(format!("alpha must exceed 1/2 (got {alpha})")));
        }
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidParameter(format!("p must be at least 1 (got {p})")));
        }
        Ok(Self { alpha, p })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveOptions {
    pub truncation: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub a_step: f64,
    pub max_amplitude: f64,
    pub max_b: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            truncation: 32,
            max_iter: 50,
            tol: 1e-10,
            a_step: 0.01,
            max_amplitude: 0.2,
            max_b: 0.05,
        }
    }
}

impl WaveOptions {
    pub fn with_truncation(truncation: usize) -> Self {
        Self {
            truncation,
            ..Self::default()
        }
    }
}

/// A converged profile. `profile` is even with `û(±1) = a/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSolution {
    pub params: ModelParams,
    pub a: f64,
    pub b: f64,
    pub profile: RealPeriodicFunction,
    pub wavenumber_alpha: f64,
    pub residual_norm: f64,
    pub newton_iterations: usize,
}

impl WaveSolution {
    pub fn truncation(&self) -> usize {
        self.profile.truncation()
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber_alpha.powf(1.0 / self.params.alpha)
    }

    /// `−k^α Λ^α P − P + P^{p+1} − b` in the coefficient ℓ² norm.
    pub fn profile_residual(&self) -> Result<f64> {
        let sys = Galerkin::new(self.params, self.b, self.truncation());
        let f = sys.residual(&self.profile.cosine_coeffs(), self.wavenumber_alpha)?;
        Ok(full_norm(&f))
    }
}

/// Parameter derivatives of the wave family at one solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDerivatives {
    pub dp_da: RealPeriodicFunction,
    pub dp_db: RealPeriodicFunction,
    pub dk_alpha_da: f64,
    pub dk_alpha_db: f64,
    pub dp_dz: RealPeriodicFunction,
}

impl FamilyDerivatives {
    /// Residuals of the differentiated profile equation in `a` and `b`:
    /// `(−k^αΛ^α − 1 + (p+1)P^p) ∂P − ∂(k^α) Λ^α P` should equal `0` and `1`.
    pub fn residuals(&self, w: &WaveSolution) -> Result<(f64, f64)> {
        let sys = Galerkin::new(w.params, w.b, w.truncation());
        let c = w.profile.cosine_coeffs();
        let jac = sys.jacobian(&c, w.wavenumber_alpha)?;
        let n = w.truncation();
        let apply = |dp: &RealPeriodicFunction, dk: f64| -> DVector<f64> {
            let mut x = DVector::zeros(n + 2);
            for (i, v) in dp.resized(n).cosine_coeffs().into_iter().enumerate() {
                x[i] = v;
            }
            x[n + 1] = dk;
            jac.rows(0, n + 1) * x
        };
        let ra = apply(&self.dp_da, self.dk_alpha_da);
        let mut rb = apply(&self.dp_db, self.dk_alpha_db);
        rb[0] -= 1.0;
        Ok((full_norm(ra.as_slice()), full_norm(rb.as_slice())))
    }
}

/// Equilibrium `Q_b`: the root of `Q^{p+1} − Q = b` continued from `Q_0 = 1`.
pub fn equilibrium(params: &ModelParams, b: f64) -> Result<f64> {
    let p = params.p;
    let mut q = 1.0f64;
    for _ in 0..60 {
        let g = q.powf(p + 1.0) - q - b;
        let dg = (p + 1.0) * q.powf(p) - 1.0;
        if dg <= 0.0 || !q.is_finite() {
            return Err(Error::EquilibriumLost(b));
        }
        let step = g / dg;
        q -= step;
        if !(0.5..1.5).contains(&q) {
            return Err(Error::EquilibriumLost(b));
        }
        if step.abs() <= 4.0 * f64::EPSILON * q {
            break;
        }
    }
    let g = q.powf(p + 1.0) - q - b;
    if g.abs() > 1e-14 {
        return Err(Error::EquilibriumLost(b));
    }
    Ok(q)
}

/// `k^α` at the bifurcation point of the constant state `Q_b`.
pub fn bifurcation_wavenumber_alpha(params: &ModelParams, b: f64) -> Result<f64> {
    let q = equilibrium(params, b)?;
    Ok((params.p + 1.0) * q.powf(params.p) - 1.0)
}

/// `k₁` in `k^α = p + k₁ a² + O(a⁴)` at `b = 0`.
pub fn k1_coefficient(params: &ModelParams) -> f64 {
    let (alpha, p) = (params.alpha, params.p);
    let two_a = 2f64.powf(alpha);
    -p * (p + 1.0) * (two_a * (p + 3.0) - 2.0 * (p + 2.0)) / (8.0 * (two_a - 1.0))
}

/// `v₂ = (p+1)/4 · (cos 2z/(2^α − 1) − 1)`, the `a²` profile correction.
pub fn second_order_profile(params: &ModelParams, n: usize) -> RealPeriodicFunction {
    let (alpha, p) = (params.alpha, params.p);
    let mut c = vec![0.0; n.max(2) + 1];
    c[0] = -(p + 1.0) / 4.0;
    c[2] = (p + 1.0) / (8.0 * (2f64.powf(alpha) - 1.0));
    RealPeriodicFunction::from_cosine_coeffs(&c).resized(n)
}

/// Two-term small-amplitude profile `Q_b + a cos z + a² v₂`.
pub fn expansion_profile(params: &ModelParams, a: f64, b: f64, n: usize) -> Result<RealPeriodicFunction> {
    let q = equilibrium(params, b)?;
    Ok(RealPeriodicFunction::constant(q, n)
        .add(&RealPeriodicFunction::cosine(a, 1, n))
        .axpy(a * a, &second_order_profile(params, n)))
}

/// Solves at `(a, b)` with the default options.
pub fn solve_wave(
    params: ModelParams,
    a: f64,
    b: f64,
    initial_guess: Option<&WaveSolution>,
) -> Result<WaveSolution> {
    solve_wave_with(params, a, b, initial_guess, &WaveOptions::default())
}

pub fn solve_wave_with(
    params: ModelParams,
    a: f64,
    b: f64,
    initial_guess: Option<&WaveSolution>,
    opts: &WaveOptions,
) -> Result<WaveSolution> {
    if !a.is_finite() || a.abs() > opts.max_amplitude {
        return Err(Error::InvalidParameter(format!(
            "|a| must not exceed {} (got {a})",
            opts.max_amplitude
        )));
    }
    if !b.is_finite() || b.abs() > opts.max_b {
        return Err(Error::InvalidParameter(format!("|b| must not exceed {} (got {b})", opts.max_b)));
    }
    if opts.truncation < 2 {
        return Err(Error::InvalidParameter("truncation must be at least 2".into()));
    }
    let n = opts.truncation;
    let sys = Galerkin::new(params, b, n);

    if a == 0.0 {
        let q = equilibrium(&params, b)?;
        let k_alpha = (params.p + 1.0) * q.powf(params.p) - 1.0;
        if k_alpha <= 0.0 {
            return Err(Error::LeftExistenceRegime { k_alpha, min_profile: q });
        }
        let profile = RealPeriodicFunction::constant(q, n);
        let residual_norm = full_norm(&sys.residual(&profile.cosine_coeffs(), k_alpha)?);
        return Ok(WaveSolution {
            params,
            a,
            b,
            profile,
            wavenumber_alpha: k_alpha,
            residual_norm,
            newton_iterations: 0,
        });
    }

    if let Some(g) = initial_guess {
        if g.params == params && g.b == b {
            let mut c = g.profile.resized(n).cosine_coeffs();
            if g.a.signum() != a.signum() {
                // P_{-a}(z) = P_a(z + π) flips the odd modes
                for (k, v) in c.iter_mut().enumerate() {
                    if k % 2 == 1 {
                        *v = -*v;
                    }
                }
            }
            c[1] = 0.5 * a;
            if let Ok(sol) = sys.newton(a, c, g.wavenumber_alpha, opts) {
                return Ok(sol);
            }
        }
    }

    let steps = (a.abs() / opts.a_step).ceil().max(1.0) as usize;
    let mut history: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    let k0 = bifurcation_wavenumber_alpha(&params, b)?;
    let k1 = k1_coefficient(&params);
    let mut last = None;
    for j in 1..=steps {
        let aj = if j == steps { a } else { a.signum() * j as f64 * opts.a_step };
        let expansion_guess = || -> Result<(Vec<f64>, f64)> {
            Ok((expansion_profile(&params, aj, b, n)?.cosine_coeffs(), k0 + k1 * aj * aj))
        };
        let (c_pred, k_pred) = if history.len() >= 2 {
            let (a1, c1, k1v) = &history[history.len() - 1];
            let (a0, c0, k0v) = &history[history.len() - 2];
            let t = (aj - a1) / (a1 - a0);
            let c = c1.iter().zip(c0).map(|(x, y)| x + t * (x - y)).collect();
            (c, k1v + t * (k1v - k0v))
        } else {
            expansion_guess()?
        };
        let mut c_pred = c_pred;
        c_pred[1] = 0.5 * aj;
        let sol = match sys.newton(aj, c_pred, k_pred, opts) {
            Ok(s) => s,
            Err(e) if history.len() >= 2 => {
                let (c, k) = expansion_guess()?;
                sys.newton(aj, c, k, opts).map_err(|_| e)?
            }
            Err(e) => return Err(e),
        };
        history.push((aj, sol.profile.cosine_coeffs(), sol.wavenumber_alpha));
        last = Some(sol);
    }
    Ok(last.expect("at least one continuation step"))
}

/// Derivatives in `a` and `b` from the bordered Jacobian of the Newton solve.
pub fn family_derivatives(w: &WaveSolution) -> Result<FamilyDerivatives> {
    let params = w.params;
    let p = params.p;
    let n = w.truncation();
    let dp_dz = w.profile.derivative();
    if w.a == 0.0 {
        // The bordered Jacobian is singular on the constant branch; use the
        // closed-form limits there.
        let q = equilibrium(&params, w.b)?;
        let k0 = (p + 1.0) * q.powf(p) - 1.0;
        let dq = 1.0 / k0;
        return Ok(FamilyDerivatives {
            dp_da: RealPeriodicFunction::cosine(1.0, 1, n),
            dp_db: RealPeriodicFunction::constant(dq, n),
            dk_alpha_da: 0.0,
            dk_alpha_db: (p + 1.0) * p * q.powf(p - 1.0) * dq,
            dp_dz,
        });
    }
    let sys = Galerkin::new(params, w.b, n);
    let jac = sys.bordered(&w.profile.cosine_coeffs(), w.wavenumber_alpha)?;
    let lu = jac.lu();
    let mut rhs_a = DVector::zeros(n + 2);
    rhs_a[n + 1] = 0.5;
    let mut rhs_b = DVector::zeros(n + 2);
    rhs_b[0] = 1.0;
    let xa = lu.solve(&rhs_a).ok_or(Error::DerivativeSolveFailed)?;
    let xb = lu.solve(&rhs_b).ok_or(Error::DerivativeSolveFailed)?;
    if !xa.iter().chain(xb.iter()).all(|v| v.is_finite()) {
        return Err(Error::DerivativeSolveFailed);
    }
    Ok(FamilyDerivatives {
        dp_da: RealPeriodicFunction::from_cosine_coeffs(&xa.as_slice()[..=n]),
        dp_db: RealPeriodicFunction::from_cosine_coeffs(&xb.as_slice()[..=n]),
        dk_alpha_da: xa[n + 1],
        dk_alpha_db: xb[n + 1],
        dp_dz,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub a: f64,
    pub profile_error: f64,
    pub wavenumber_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub alpha: f64,
    pub p: f64,
    pub rows: Vec<ExpansionRow>,
    pub profile_order: f64,
    pub wavenumber_order: f64,
    pub passed: bool,
}

pub const PROFILE_ORDER_MIN: f64 = 2.9;
pub const WAVENUMBER_ORDER_MIN: f64 = 3.9;

/// Compares solved waves at `b = 0` against the two-term expansion and fits
/// log-log convergence orders of the remainders.
pub fn validate_expansions(
    params: ModelParams,
    amplitudes: &[f64],
    opts: &WaveOptions,
) -> Result<ExpansionReport> {
    if amplitudes.len() < 2 {
        return Err(Error::InvalidParameter("need at least two amplitudes".into()));
    }
    let n = opts.truncation;
    let k1 = k1_coefficient(&params);
    let mut rows = Vec::with_capacity(amplitudes.len());
    let mut guess: Option<WaveSolution> = None;
    for &a in amplitudes {
        let w = solve_wave_with(params, a, 0.0, guess.as_ref(), opts)?;
        let expected = expansion_profile(&params, a, 0.0, n)?;
        rows.push(ExpansionRow {
            a,
            profile_error: w.profile.sub(&expected).norm(),
            wavenumber_error: (w.wavenumber_alpha - params.p - k1 * a * a).abs(),
        });
        guess = Some(w);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.a.abs().ln()).collect();
    let profile_order = log_slope(&xs, &rows.iter().map(|r| r.profile_error.ln()).collect::<Vec<_>>());
    let wavenumber_order =
        log_slope(&xs, &rows.iter().map(|r| r.wavenumber_error.ln()).collect::<Vec<_>>());
    Ok(ExpansionReport {
        alpha: params.alpha,
        p: params.p,
        rows,
        profile_order,
        wavenumber_order,
        passed: profile_order >= PROFILE_ORDER_MIN && wavenumber_order >= WAVENUMBER_ORDER_MIN,
    })
}

/// Least-squares slope of `y` against `x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// ℓ² norm over all modes `±n` of cosine coordinates `f_0..f_N`.
fn full_norm(f: &[f64]) -> f64 {
    (f[0] * f[0] + 2.0 * f[1..].iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// The profile equation projected on cosine modes `0..=N`.
struct Galerkin {
    params: ModelParams,
    b: f64,
    n: usize,
    symbol: Vec<f64>,
}

impl Galerkin {
    fn new(params: ModelParams, b: f64, n: usize) -> Self {
        let symbol = (0..=n).map(|k| (k as f64).powf(params.alpha)).collect();
        Self { params, b, n, symbol }
    }

    fn power(&self, c: &[f64], q: f64, n_out: usize) -> Result<RealPeriodicFunction> {
        let prof = RealPeriodicFunction::from_cosine_coeffs(c);
        nonlinear_power_truncated(&prof, q, n_out).map_err(|e| match e {
            Error::NonPositiveProfile(m) => Error::LeftExistenceRegime {
                k_alpha: f64::NAN,
                min_profile: m,
            },
            other => other,
        })
    }

    fn residual(&self, c: &[f64], k_alpha: f64) -> Result<Vec<f64>> {
        let pp1 = self.power(c, self.params.p + 1.0, self.n)?;
        Ok((0..=self.n)
            .map(|k| {
                let mut f = -(k_alpha * self.symbol[k] + 1.0) * c[k] + pp1.coeff(k as i64).re;
                if k == 0 {
                    f -= self.b;
                }
                f
            })
            .collect())
    }

    /// `(N+1) × (N+2)` derivative of the residual in `(c, k^α)` with the
    /// constraint row appended below.
    fn jacobian(&self, c: &[f64], k_alpha: f64) -> Result<DMatrix<f64>> {
        let n = self.n;
        let p = self.params.p;
        let w = self.power(c, p, 2 * n)?;
        let wc = |k: i64| w.coeff(k).re;
        let mut j = DMatrix::zeros(n + 2, n + 2);
        for row in 0..=n {
            let r = row as i64;
            j[(row, 0)] = (p + 1.0) * wc(r);
            for col in 1..=n {
                let m = col as i64;
                j[(row, col)] = (p + 1.0) * (wc(r - m) + wc(r + m));
            }
            j[(row, row)] -= k_alpha * self.symbol[row] + 1.0;
            j[(row, n + 1)] = -self.symbol[row] * c[row];
        }
        j[(n + 1, 1)] = 1.0;
        Ok(j)
    }

    fn bordered(&self, c: &[f64], k_alpha: f64) -> Result<DMatrix<f64>> {
        self.jacobian(c, k_alpha)
    }

    fn newton(&self, a: f64, mut c: Vec<f64>, mut k_alpha: f64, opts: &WaveOptions) -> Result<WaveSolution> {
        let n = self.n;
        let fail = |reason: String| Error::ContinuationFailed { a, b: self.b, reason };
        let grid = 4 * (n + 1);
        let mut best = f64::INFINITY;
        let mut stall = 0;
        for it in 0..=opts.max_iter {
            let min_profile = RealPeriodicFunction::from_cosine_coeffs(&c).min_value(grid);
            if k_alpha <= 0.0 || min_profile <= 0.25 {
                return Err(Error::LeftExistenceRegime { k_alpha, min_profile });
            }
            let f = self.residual(&c, k_alpha)?;
            let g = c[1] - 0.5 * a;
            let res = (full_norm(&f).powi(2) + g * g).sqrt();
            if !res.is_finite() {
                return Err(fail("residual is not finite".into()));
            }
            if res < 0.5 * best {
                stall = 0;
            } else {
                stall += 1;
            }
            best = best.min(res);
            let done = res <= 1e-14 * (1.0 + k_alpha) || (stall >= 2 && res <= opts.tol);
            if done || it == opts.max_iter {
                if res > opts.tol {
                    return Err(fail(format!("no convergence after {it} iterations (residual {res:.3e})")));
                }
                return Ok(WaveSolution {
                    params: self.params,
                    a,
                    b: self.b,
                    profile: RealPeriodicFunction::from_cosine_coeffs(&c),
                    wavenumber_alpha: k_alpha,
                    residual_norm: full_norm(&f),
                    newton_iterations: it,
                });
            }
            let jac = self.bordered(&c, k_alpha)?;
            let mut rhs = DVector::zeros(n + 2);
            for k in 0..=n {
                rhs[k] = -f[k];
            }
            rhs[n + 1] = -g;
            let dx = jac.lu().solve(&rhs).ok_or_else(|| fail("singular Jacobian".into()))?;
            for k in 0..=n {
                c[k] += dx[k];
            }
            k_alpha += dx[n + 1];
        }
        unreachable!("loop returns on its last iteration")
    }
}
