//! Truncated Bloch operators `M_ξ = e^{−iξz} ∂_z L e^{iξz}` about a wave,
//! their spectra across a ξ-grid, Krein signatures, spectral symmetries and
//! the n-period consistency oracle.

use std::f64::consts::PI;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::eigen::{eigenvalues_complex, eigenvalues_real, eigenvector};
use crate::error::{Error, Result};
use crate::torus::nonlinear_power_truncated;
use crate::wave::{solve_wave_with, ModelParams, WaveOptions, WaveSolution};

/// `ω(k) = k p (|k|^α − 1)`.
pub fn dispersion_omega(params: &ModelParams, k: f64) -> f64 {
    k * params.p() * (k.abs().powf(params.alpha()) - 1.0)
}

/// `M = D_ξ L` on modes `n + ξ`, `|n| <= N`; row `i` is mode `i − N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochMatrix {
    pub xi: f64,
    pub truncation: usize,
    pub m: DMatrix<Complex64>,
    pub l: DMatrix<Complex64>,
    pub source: WaveSolution,
}

impl BlochMatrix {
    /// Indices of the modes `n ∈ {−1, 0, 1}` carrying the critical triple.
    pub fn critical_indices(&self) -> [usize; 3] {
        let n = self.truncation;
        [n - 1, n, n + 1]
    }

    /// `R` with `M = iR`, available when `L` is real (even profiles).
    pub fn real_factor(&self) -> Option<DMatrix<f64>> {
        self.m.iter().all(|z| z.re == 0.0).then(|| self.m.map(|z| z.im))
    }

    pub fn hermitian_defect(&self) -> f64 {
        (&self.l - self.l.adjoint()).norm() / self.l.norm().max(f64::MIN_POSITIVE)
    }
}

pub fn assemble_bloch(w: &WaveSolution, xi: f64, n: usize) -> Result<BlochMatrix> {
    if !(xi.abs() <= 0.5) {
        return Err(Error::InvalidParameter(format!("need |xi| <= 1/2, got {xi}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("Bloch truncation must be at least 2".into()));
    }
    let params = w.params;
    let k_alpha = w.wavenumber_alpha;
    let pw = nonlinear_power_truncated(&w.profile.resized(n), params.p(), 2 * n)?;
    let size = 2 * n + 1;
    let off = n as i64;
    let coupling = params.p() + 1.0;
    let mut l = DMatrix::<Complex64>::zeros(size, size);
    for i in 0..size {
        for j in 0..size {
            l[(i, j)] = -pw.coeff(i as i64 - j as i64) * coupling;
        }
        let kappa = (i as i64 - off) as f64 + xi;
        l[(i, i)] += k_alpha * kappa.abs().powf(params.alpha()) + 1.0;
    }
    let m = DMatrix::from_fn(size, size, |i, j| {
        let kappa = (i as i64 - off) as f64 + xi;
        Complex64::new(0.0, kappa) * l[(i, j)]
    });
    Ok(BlochMatrix {
        xi,
        truncation: n,
        m,
        l,
        source: w.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSlice {
    pub xi: f64,
    /// Sorted by imaginary part, then real part.
    pub eigenvalues: Vec<Complex64>,
    /// Aligned with `eigenvalues`; `None` where the eigenvalue is off-axis or
    /// not numerically simple.
    pub krein: Option<Vec<Option<i8>>>,
    pub max_real_part: f64,
    /// Eigenvalues continued from the modes `n ∈ {−1, 0, 1}`.
    pub critical: [Complex64; 3],
    /// Distance from the critical triple to the rest of the spectrum.
    pub spectral_gap: f64,
    /// Whether the triple was split off exactly by block decoupling.
    pub critical_isolated: bool,
}

const KREIN_AXIS_TOL: f64 = 1e-8;
const KREIN_GAP: f64 = 1e-6;
const KREIN_ZERO: f64 = 1e-8;

pub fn slice_spectrum(bm: &BlochMatrix, with_krein: bool) -> Result<SpectrumSlice> {
    let split = split_spectrum(&bm.m, &bm.critical_indices())?;
    let mut eigenvalues: Vec<Complex64> = split.critical.iter().chain(&split.rest).copied().collect();
    sort_spectrum(&mut eigenvalues);
    let max_real_part = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let spectral_gap = split
        .critical
        .iter()
        .flat_map(|c| split.rest.iter().map(move |r| (c - r).norm()))
        .fold(f64::INFINITY, f64::min);
    let krein = with_krein.then(|| krein_signatures(bm, &eigenvalues));
    let mut critical = split.critical.clone();
    sort_spectrum(&mut critical);
    Ok(SpectrumSlice {
        xi: bm.xi,
        eigenvalues,
        krein,
        max_real_part,
        critical: [critical[0], critical[1], critical[2]],
        spectral_gap,
        critical_isolated: split.decoupled && spectral_gap > KREIN_GAP,
    })
}

fn krein_signatures(bm: &BlochMatrix, eigenvalues: &[Complex64]) -> Vec<Option<i8>> {
    eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &lam)| {
            if lam.re.abs() > KREIN_AXIS_TOL {
                return None;
            }
            let simple = eigenvalues
                .iter()
                .enumerate()
                .all(|(j, &mu)| j == i || (lam - mu).norm() >= KREIN_GAP);
            if !simple {
                return None;
            }
            let v = eigenvector(&bm.m, lam)?;
            let q = (v.adjoint() * &bm.l * &v)[(0, 0)].re;
            Some(if q.abs() <= KREIN_ZERO { 0 } else if q > 0.0 { 1 } else { -1 })
        })
        .collect()
}

fn sort_spectrum(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
}

pub(crate) struct SplitSpectrum {
    pub critical: Vec<Complex64>,
    pub rest: Vec<Complex64>,
    pub decoupled: bool,
}

/// Spectrum of `m` with the eigenvalues belonging to the rows/columns `low`
/// split off. The split is exact (block triangularisation by a Riccati
/// solve), which keeps the defective zero eigenvalue at `ξ = 0` from
/// polluting the rest of the spectrum.
pub(crate) fn split_spectrum(m: &DMatrix<Complex64>, low: &[usize]) -> Result<SplitSpectrum> {
    let times_i = |v: Vec<Complex64>| -> Vec<Complex64> {
        v.into_iter().map(|z| Complex64::new(-z.im, z.re)).collect()
    };
    if m.iter().all(|z| z.re == 0.0) {
        let r = m.map(|z| z.im);
        if let Some((lo, hi)) = riccati_split(&r, low) {
            return Ok(SplitSpectrum {
                critical: times_i(eigenvalues_real(&lo)?),
                rest: times_i(eigenvalues_real(&hi)?),
                decoupled: true,
            });
        }
        return Ok(by_modulus(times_i(eigenvalues_real(&r)?), low.len()));
    }
    if let Some((lo, hi)) = riccati_split(m, low) {
        return Ok(SplitSpectrum {
            critical: eigenvalues_complex(&lo)?,
            rest: eigenvalues_complex(&hi)?,
            decoupled: true,
        });
    }
    Ok(by_modulus(eigenvalues_complex(m)?, low.len()))
}

fn by_modulus(mut all: Vec<Complex64>, k: usize) -> SplitSpectrum {
    all.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let rest = all.split_off(k);
    SplitSpectrum {
        critical: all,
        rest,
        decoupled: false,
    }
}

const RICCATI_MAX_ITER: usize = 500;

/// Finds `X` with `T = [[I, 0], [X, I]]` making `T⁻¹ A T` block upper
/// triangular, and returns the two diagonal blocks `(A_ll + A_lh X, A_hh − X A_lh)`.
fn riccati_split<T>(a: &DMatrix<T>, low: &[usize]) -> Option<(DMatrix<T>, DMatrix<T>)>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = a.nrows();
    let high: Vec<usize> = (0..n).filter(|i| !low.contains(i)).collect();
    let block = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
    };
    let all = block(low, low);
    let alh = block(low, &high);
    let ahl = block(&high, low);
    let ahh = block(&high, &high);
    let nl = low.len();
    let nh = high.len();
    let s = all.trace() * T::from_real(1.0 / nl as f64);
    let lu = (&ahh - DMatrix::<T>::identity(nh, nh) * s).lu();
    let shift_l = DMatrix::<T>::identity(nl, nl) * s;
    let mut x = DMatrix::<T>::zeros(nh, nl);
    let mut prev = f64::INFINITY;
    let mut converged = false;
    for it in 0..RICCATI_MAX_ITER {
        let b = &all + &alh * &x;
        let rhs = &x * (b - &shift_l) - &ahl;
        let next = lu.solve(&rhs)?;
        let diff = (&next - &x).norm();
        x = next;
        let size = x.norm();
        if !diff.is_finite() || size > 1e8 {
            return None;
        }
        if diff <= 4.0 * f64::EPSILON * size || diff == 0.0 {
            converged = true;
            break;
        }
        if it > 20 && diff > 0.95 * prev {
            converged = diff <= 1e-13 * size;
            break;
        }
        prev = diff;
    }
    if !converged {
        return None;
    }
    let lo = &all + &alh * &x;
    let hi = &ahh - &x * &alh;
    Some((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Stable,
    Unstable,
    Indeterminate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub tol_stable: f64,
    pub tol_unstable: f64,
    /// Truncation used to re-check the worst ξ; `None` skips the check.
    pub convergence_truncation: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tol_stable: 1e-7,
            tol_unstable: 1e-6,
            convergence_truncation: Some(48),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCheck {
    pub truncation: usize,
    pub growth_rate: f64,
    pub agreed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub classification: Classification,
    pub growth_rate: f64,
    pub worst_xi: f64,
    pub convergence: Option<ConvergenceCheck>,
}

pub fn classify(growth_rate: f64, opts: &SweepOptions) -> Classification {
    if growth_rate <= opts.tol_stable {
        Classification::Stable
    } else if growth_rate >= opts.tol_unstable {
        Classification::Unstable
    } else {
        Classification::Indeterminate
    }
}

/// `count` uniform points on `[0, 1/2]` plus `1e-4 · 2^j` below the first
/// positive uniform point.
pub fn default_xi_grid(count: usize) -> Vec<f64> {
    let count = count.max(2);
    let h = 0.5 / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|j| j as f64 * h).collect();
    let mut r = 1e-4;
    while r < h {
        grid.push(r);
        r *= 2.0;
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Parallel spectra over the grid, in grid order.
pub fn sweep_slices(w: &WaveSolution, xi_grid: &[f64], n: usize, with_krein: bool) -> Result<Vec<SpectrumSlice>> {
    if let Some(bad) = xi_grid.iter().find(|x| !(0.0..=0.5).contains(*x)) {
        return Err(Error::InvalidParameter(format!("xi grid must lie in [0, 1/2], found {bad}")));
    }
    xi_grid
        .par_iter()
        .map(|&xi| slice_spectrum(&assemble_bloch(w, xi, n)?, with_krein))
        .collect()
}

pub fn stability_sweep(w: &WaveSolution, xi_grid: &[f64], n: usize) -> Result<StabilityVerdict> {
    stability_sweep_with(w, xi_grid, n, &SweepOptions::default()).map(|(v, _)| v)
}

pub fn stability_sweep_with(
    w: &WaveSolution,
    xi_grid: &[f64],
    n: usize,
    opts: &SweepOptions,
) -> Result<(StabilityVerdict, Vec<SpectrumSlice>)> {
    if xi_grid.is_empty() {
        return Err(Error::InvalidParameter("empty xi grid".into()));
    }
    let slices = sweep_slices(w, xi_grid, n, false)?;
    let (growth_rate, worst_xi) = slices
        .iter()
        .map(|s| (s.max_real_part, s.xi))
        .fold((f64::NEG_INFINITY, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    let mut classification = classify(growth_rate, opts);
    let mut convergence = None;
    if let Some(fine) = opts.convergence_truncation {
        let wave_opts = WaveOptions::with_truncation(fine.max(w.truncation()));
        let wf = solve_wave_with(w.params, w.a, w.b, Some(w), &wave_opts)?;
        let g = slice_spectrum(&assemble_bloch(&wf, worst_xi, fine)?, false)?.max_real_part;
        let agreed = match classification {
            Classification::Stable => g <= opts.tol_stable,
            Classification::Unstable => (g - growth_rate).abs() <= 0.1 * growth_rate,
            Classification::Indeterminate => classify(g, opts) == Classification::Indeterminate,
        };
        if !agreed {
            classification = Classification::Indeterminate;
        }
        convergence = Some(ConvergenceCheck {
            truncation: fine,
            growth_rate: g,
            agreed,
        });
    }
    Ok((
        StabilityVerdict {
            classification,
            growth_rate,
            worst_xi,
            convergence,
        },
        slices,
    ))
}

/// Largest nearest-neighbour distance in either direction.
pub fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Largest pair distance under a greedy nearest-neighbour matching of the two
/// multisets; infinite when the sizes differ.
pub fn matched_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    sort_spectrum(&mut a);
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for p in &a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, q)| (j, (p - q).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n_periods: usize,
    pub truncation: usize,
    pub eigenvalue_count: usize,
    pub hausdorff: f64,
    pub matched: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const ORACLE_TOL: f64 = 1e-7;

/// Assembles the operator on the `2πn`-periodic torus from samples of the
/// wave and compares its spectrum with the union of the Bloch slices at
/// `ξ = j/n`, `−n/2 <= j < n/2`.
pub fn block_oracle(w: &WaveSolution, n_periods: usize, n: usize) -> Result<OracleReport> {
    if !(1..=8).contains(&n_periods) {
        return Err(Error::InvalidParameter(format!("n_periods must lie in 1..=8, got {n_periods}")));
    }
    let np = n_periods as i64;
    let xis: Vec<(i64, f64)> = (-(np / 2)..np - np / 2)
        .map(|j| (j, if np % 2 == 0 && j == -(np / 2) { -0.5 } else { j as f64 / np as f64 }))
        .collect();

    let mut union = Vec::new();
    for &(_, xi) in &xis {
        union.extend(slice_spectrum(&assemble_bloch(w, xi, n)?, false)?.eigenvalues);
    }

    // modes κ = j/n of the big torus, labelled by their integer part
    let mut modes: Vec<(i64, i64)> = Vec::new();
    for &(j, _) in &xis {
        for m in -(n as i64)..=n as i64 {
            modes.push((m * np + j, m));
        }
    }
    modes.sort();
    let params = w.params;
    let big_w = big_torus_power(w, n_periods, n)?;
    let size = modes.len();
    let coupling = params.p() + 1.0;
    let mut big = DMatrix::<Complex64>::zeros(size, size);
    for (r, &(jr, _)) in modes.iter().enumerate() {
        let kappa = jr as f64 / np as f64;
        for (c, &(jc, _)) in modes.iter().enumerate() {
            let mut l = -big_w(jr - jc) * coupling;
            if r == c {
                l += w.wavenumber_alpha * kappa.abs().powf(params.alpha()) + 1.0;
            }
            big[(r, c)] = Complex64::new(0.0, kappa) * l;
        }
    }
    let low: Vec<usize> = modes
        .iter()
        .enumerate()
        .filter(|(_, (_, m))| m.abs() <= 1)
        .map(|(i, _)| i)
        .collect();
    let split = split_spectrum(&big, &low)?;
    let direct: Vec<Complex64> = split.critical.into_iter().chain(split.rest).collect();
    let hausdorff = hausdorff_distance(&direct, &union);
    let matched = matched_distance(&direct, &union);
    Ok(OracleReport {
        n_periods,
        truncation: n,
        eigenvalue_count: direct.len(),
        hausdorff,
        matched,
        tolerance: ORACLE_TOL,
        passed: hausdorff <= ORACLE_TOL && direct.len() == union.len(),
    })
}

/// Fourier coefficients (index `j` ↔ wavenumber `j/n`) of `P^p` sampled on
/// the `2πn`-periodic torus.
fn big_torus_power(w: &WaveSolution, n_periods: usize, n: usize) -> Result<impl Fn(i64) -> Complex64> {
    let p = w.params.p();
    let span = (2 * n + 1) as i64 * n_periods as i64;
    let m = ((p + 2.0) * (2 * span + 1) as f64).ceil() as usize;
    let prof = w.profile.resized(n);
    let mut buf: Vec<Complex64> = (0..m)
        .map(|i| {
            let z = 2.0 * PI * n_periods as f64 * i as f64 / m as f64;
            Complex64::new(prof.evaluate(z).powf(p), 0.0)
        })
        .collect();
    if buf.iter().any(|v| !v.re.is_finite()) {
        return Err(Error::NonPositiveProfile(prof.min_value(4 * n + 4)));
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let inv = 1.0 / m as f64;
    Ok(move |j: i64| buf[j.rem_euclid(m as i64) as usize] * inv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub xi: f64,
    /// `σ(ξ)` against `conj σ(−ξ)`.
    pub conjugate: f64,
    /// `σ(ξ)` against `−σ(−ξ)`.
    pub negation: f64,
    /// `σ(ξ)` against `−conj σ(ξ)`.
    pub reflection: f64,
    /// `σ(ξ)` at `a` against `−a`.
    pub amplitude: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const SYMMETRY_TOL: f64 = 1e-9;

pub fn symmetry_check(w: &WaveSolution, xi: f64) -> Result<SymmetryReport> {
    let n = w.truncation();
    let opts = WaveOptions::with_truncation(n);
    let mirror = if w.a == 0.0 { w.clone() } else { solve_wave_with(w.params, -w.a, w.b, Some(w), &opts)? };
    let s_plus = slice_spectrum(&assemble_bloch(w, xi, n)?, false)?.eigenvalues;
    let s_minus = slice_spectrum(&assemble_bloch(w, -xi, n)?, false)?.eigenvalues;
    let s_mirror = slice_spectrum(&assemble_bloch(&mirror, xi, n)?, false)?.eigenvalues;
    let conj: Vec<Complex64> = s_minus.iter().map(|z| z.conj()).collect();
    let neg: Vec<Complex64> = s_minus.iter().map(|z| -z).collect();
    let refl: Vec<Complex64> = s_plus.iter().map(|z| -z.conj()).collect();
    let conjugate = matched_distance(&s_plus, &conj);
    let negation = matched_distance(&s_plus, &neg);
    let reflection = matched_distance(&s_plus, &refl);
    let amplitude = matched_distance(&s_plus, &s_mirror);
    let passed = [conjugate, negation, reflection, amplitude].iter().all(|&d| d <= SYMMETRY_TOL);
    Ok(SymmetryReport {
        xi,
        conjugate,
        negation,
        reflection,
        amplitude,
        tolerance: SYMMETRY_TOL,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::solve_wave;

    fn wave(alpha: f64, p: f64, a: f64, b: f64) -> WaveSolution {
        solve_wave(ModelParams::new(alpha, p).unwrap(), a, b, None).unwrap()
    }

    #[test]
    fn omega_examples() {
        let pr = ModelParams::new(2.0, 1.0).unwrap();
        for k in [1.0, 0.0, -1.0] {
            assert_eq!(dispersion_omega(&pr, k), 0.0);
        }
        assert_eq!(dispersion_omega(&pr, 2.0), 6.0);
        let pr = ModelParams::new(1.0, 3.0).unwrap();
        assert_eq!(dispersion_omega(&pr, 2.0), 6.0);
        assert!(dispersion_omega(&pr, 2.0) >= 2.0 * 3.0 * (2f64.powf(1.0) - 1.0));
    }

    #[test]
    fn constant_state_is_diagonal() {
        let w = wave(2.0, 1.0, 0.0, 0.0);
        let bm = assemble_bloch(&w, 0.25, 8).unwrap();
        for i in 0..17 {
            for j in 0..17 {
                if i != j {
                    assert!(bm.m[(i, j)].norm() < 1e-14);
                }
            }
            let kappa = i as f64 - 8.0 + 0.25;
            assert!((bm.m[(i, i)].im - dispersion_omega(&w.params, kappa)).abs() < 1e-12);
        }
        let s = slice_spectrum(&bm, true).unwrap();
        assert!(s.eigenvalues.iter().any(|z| (z.im - 0.703125).abs() < 1e-13 && z.re == 0.0));
        assert_eq!(s.eigenvalues.len(), 17);
    }

    #[test]
    fn krein_positive_on_outer_modes() {
        let (alpha, p) = (2.0, 1.5);
        let w = wave(alpha, p, 0.0, 0.0);
        let bound = (1.5f64.powf(alpha) - 1.0) * p;
        for xi in [0.0, 0.1, 0.3, 0.5] {
            let bm = assemble_bloch(&w, xi, 10).unwrap();
            let s = slice_spectrum(&bm, true).unwrap();
            let krein = s.krein.as_ref().unwrap();
            for n in -10i64..=10 {
                if n.abs() < 2 {
                    continue;
                }
                let lam = Complex64::new(0.0, dispersion_omega(&w.params, n as f64 + xi));
                let i = s.eigenvalues.iter().position(|z| (z - lam).norm() < 1e-10).unwrap();
                assert_eq!(krein[i], Some(1), "n = {n}, xi = {xi}");
                let q = bm.l[((n + 10) as usize, (n + 10) as usize)].re;
                assert!(q >= bound - 1e-12);
            }
        }
    }

    #[test]
    fn triple_zero_at_origin() {
        let w = wave(2.0, 1.0, 0.0, 0.0);
        let s = slice_spectrum(&assemble_bloch(&w, 0.0, 8).unwrap(), true).unwrap();
        assert!(s.critical.iter().all(|z| z.norm() < 1e-12));
        let krein = s.krein.unwrap();
        let zeros = s.eigenvalues.iter().zip(&krein).filter(|(z, _)| z.norm() < 1e-12);
        assert!(zeros.clone().count() == 3 && zeros.into_iter().all(|(_, k)| k.is_none()));
    }

    #[test]
    fn translation_mode_in_kernel() {
        let w = wave(1.5, 2.0, 0.08, 0.01);
        let bm = assemble_bloch(&w, 0.0, 32).unwrap();
        let dz = nalgebra::DVector::from_column_slice(w.profile.derivative().coeffs());
        assert!((&bm.m * &dz).norm() <= 1e-9);
        assert!((&bm.l * &dz).norm() <= 1e-9);
        assert!(bm.hermitian_defect() <= 1e-12);
        assert!(bm.real_factor().is_some());
    }

    #[test]
    fn row_factorisation() {
        let w = wave(2.0, 2.0, 0.05, 0.0);
        let bm = assemble_bloch(&w, 0.2, 6).unwrap();
        for i in 0..13 {
            let d = Complex64::new(0.0, i as f64 - 6.0 + 0.2);
            for j in 0..13 {
                assert_eq!(bm.m[(i, j)], d * bm.l[(i, j)]);
            }
        }
    }

    #[test]
    fn rejects_bad_xi() {
        let w = wave(2.0, 1.0, 0.0, 0.0);
        assert!(assemble_bloch(&w, 0.6, 8).is_err());
        assert!(sweep_slices(&w, &[-0.1], 8, false).is_err());
        assert!(block_oracle(&w, 9, 8).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = default_xi_grid(64);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 0.5);
        assert!(g.contains(&1e-4) && g.contains(&0.0064));
        assert!(!g.contains(&0.0128));
        assert_eq!(g.len(), 64 + 7);
    }

    #[test]
    fn classification_bands() {
        let o = SweepOptions::default();
        assert_eq!(classify(0.0, &o), Classification::Stable);
        assert_eq!(classify(1e-7, &o), Classification::Stable);
        assert_eq!(classify(5e-7, &o), Classification::Indeterminate);
        assert_eq!(classify(1e-6, &o), Classification::Unstable);
    }

    #[test]
    fn oracle_single_period_is_zero_slice() {
        let w = wave(2.0, 2.0, 0.05, 0.0);
        let r = block_oracle(&w, 1, 12).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.hausdorff < 1e-9);
    }

    #[test]
    fn oracle_constant_state_two_periods() {
        let w = wave(2.0, 1.0, 0.0, 0.0);
        let r = block_oracle(&w, 2, 10).unwrap();
        assert!(r.hausdorff < 1e-10, "{r:?}");
        assert_eq!(r.eigenvalue_count, 42);
    }

    #[test]
    fn distances() {
        let a = [Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0)];
        let b = [Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0), Complex64::new(2.0, 0.0)];
        assert_eq!(hausdorff_distance(&a, &b), 0.0);
        assert!(matched_distance(&a, &b) > 1.0);
        assert_eq!(matched_distance(&a, &b[..2]), f64::INFINITY);
    }
}
