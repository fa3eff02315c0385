//! Named validation suites run by `fkdv validate`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::{
    assemble_bloch, block_oracle, dispersion_omega, matched_distance, slice_spectrum, symmetry_check,
    OracleReport, SymmetryReport,
};
use crate::error::{Error, Result};
use crate::reduction::{
    borderline_gamma_scale, cubic_at, delta_constant_state, delta_constant_state_limit,
    discriminant_scaling_check, gamma_coefficient, DiscriminantReport,
};
use crate::wave::{solve_wave_with, validate_expansions, ExpansionReport, ModelParams, WaveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Expansions,
    Oracle,
    Symmetry,
    Discriminant,
    ConstantState,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Expansions, Suite::Oracle, Suite::Symmetry, Suite::Discriminant, Suite::ConstantState];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Expansions => "expansions",
            Suite::Oracle => "oracle",
            Suite::Symmetry => "symmetry",
            Suite::Discriminant => "discriminant",
            Suite::ConstantState => "constant-state",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateConfig {
    pub suites: Vec<Suite>,
    /// Overrides every suite's default parameter sets.
    pub params: Option<(f64, f64)>,
    pub a: f64,
    pub n_periods: Vec<usize>,
    pub truncation: usize,
    pub oracle_truncation: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            params: None,
            a: 0.05,
            n_periods: vec![2, 3],
            truncation: 32,
            oracle_truncation: 24,
        }
    }
}

impl ValidateConfig {
    fn sets(&self, defaults: &[(f64, f64)]) -> Vec<(f64, f64)> {
        match self.params {
            Some(p) => vec![p],
            None => defaults.to_vec(),
        }
    }
}

pub const EXPANSION_SETS: [(f64, f64); 3] = [(2.0, 1.0), (2.0, 2.0), (1.5, 1.0)];
pub const EXPANSION_AMPLITUDES: [f64; 3] = [0.02, 0.04, 0.08];
pub const SYMMETRY_SETS: [(f64, f64); 3] = [(2.0, 1.0), (2.0, 2.0), (1.5, 1.0)];
pub const SYMMETRY_XI: [f64; 3] = [0.05, 0.2, 0.45];
pub const DISCRIMINANT_SETS: [(f64, f64); 3] = [(2.0, 1.0), (2.0, 3.0), (1.0, 1.0)];
pub const DISCRIMINANT_AMPLITUDES: [f64; 2] = [0.03, 0.05];
pub const DISCRIMINANT_XI: f64 = 0.005;
pub const CONSTANT_STATE_SETS: [(f64, f64); 3] = [(2.0, 1.0), (1.0, 2.0), (3.0, 2.0)];
pub const CONSTANT_STATE_XI: [f64; 4] = [0.0, 0.1, 0.25, 0.49];
pub const CONSTANT_STATE_TOL: f64 = 1e-9;
pub const CUBIC_XI: [f64; 3] = [0.05, 0.1, 0.3];
pub const CUBIC_B: [f64; 2] = [0.0, 0.02];
pub const CUBIC_REL_TOL: f64 = 1e-9;
pub const LIMIT_XI: f64 = 0.005;
pub const LIMIT_REL_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry {
    pub alpha: f64,
    pub p: f64,
    pub a: f64,
    pub report: OracleReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryEntry {
    pub alpha: f64,
    pub p: f64,
    pub a: f64,
    pub report: SymmetryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantEntry {
    pub report: DiscriminantReport,
    /// `"indeterminate by design"` when `Γ` vanishes.
    pub note: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub alpha: f64,
    pub p: f64,
    pub xi: f64,
    pub max_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicEntry {
    pub alpha: f64,
    pub p: f64,
    pub b: f64,
    pub xi: f64,
    pub computed: f64,
    pub closed_form: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantStateReport {
    pub spectra: Vec<SpectrumEntry>,
    pub cubics: Vec<CubicEntry>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "kebab-case")]
pub enum SuiteReport {
    Expansions { entries: Vec<ExpansionReport>, passed: bool },
    Oracle { entries: Vec<OracleEntry>, passed: bool },
    Symmetry { entries: Vec<SymmetryEntry>, passed: bool },
    Discriminant { entries: Vec<DiscriminantEntry>, passed: bool },
    ConstantState { report: ConstantStateReport, passed: bool },
}

impl SuiteReport {
    pub fn suite(&self) -> Suite {
        match self {
            SuiteReport::Expansions { .. } => Suite::Expansions,
            SuiteReport::Oracle { .. } => Suite::Oracle,
            SuiteReport::Symmetry { .. } => Suite::Symmetry,
            SuiteReport::Discriminant { .. } => Suite::Discriminant,
            SuiteReport::ConstantState { .. } => Suite::ConstantState,
        }
    }

    pub fn passed(&self) -> bool {
        match self {
            SuiteReport::Expansions { passed, .. }
            | SuiteReport::Oracle { passed, .. }
            | SuiteReport::Symmetry { passed, .. }
            | SuiteReport::Discriminant { passed, .. }
            | SuiteReport::ConstantState { passed, .. } => *passed,
        }
    }

    /// Human-readable list of failing parameter sets.
    pub fn failures(&self) -> Vec<String> {
        match self {
            SuiteReport::Expansions { entries, .. } => entries
                .iter()
                .filter(|e| !e.passed)
                .map(|e| {
                    format!(
                        "expansions (alpha={}, p={}): orders {:.3}/{:.3}",
                        e.alpha, e.p, e.profile_order, e.wavenumber_order
                    )
                })
                .collect(),
            SuiteReport::Oracle { entries, .. } => entries
                .iter()
                .filter(|e| !e.report.passed)
                .map(|e| {
                    format!(
                        "oracle (alpha={}, p={}, a={}, n_periods={}): hausdorff {:.3e}",
                        e.alpha, e.p, e.a, e.report.n_periods, e.report.hausdorff
                    )
                })
                .collect(),
            SuiteReport::Symmetry { entries, .. } => entries
                .iter()
                .filter(|e| !e.report.passed)
                .map(|e| format!("symmetry (alpha={}, p={}, a={}, xi={})", e.alpha, e.p, e.a, e.report.xi))
                .collect(),
            SuiteReport::Discriminant { entries, .. } => entries
                .iter()
                .filter(|e| !e.passed)
                .map(|e| {
                    format!(
                        "discriminant (alpha={}, p={}): fitted {:.4e} against {:.4e}",
                        e.report.alpha, e.report.p, e.report.fitted_gamma, e.report.gamma
                    )
                })
                .collect(),
            SuiteReport::ConstantState { report, .. } => report
                .spectra
                .iter()
                .filter(|e| !e.passed)
                .map(|e| format!("constant-state spectrum (alpha={}, p={}, xi={})", e.alpha, e.p, e.xi))
                .chain(report.cubics.iter().filter(|e| !e.passed).map(|e| {
                    format!("constant-state cubic (alpha={}, p={}, b={}, xi={})", e.alpha, e.p, e.b, e.xi)
                }))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

pub fn run_validation(config: &ValidateConfig) -> Result<ValidationReport> {
    let suites = config
        .suites
        .iter()
        .map(|&s| run_suite(s, config))
        .collect::<Result<Vec<_>>>()?;
    let passed = suites.iter().all(SuiteReport::passed);
    Ok(ValidationReport { suites, passed })
}

pub fn run_suite(suite: Suite, config: &ValidateConfig) -> Result<SuiteReport> {
    let opts = WaveOptions::with_truncation(config.truncation);
    match suite {
        Suite::Expansions => {
            let entries = config
                .sets(&EXPANSION_SETS)
                .into_iter()
                .map(|(alpha, p)| validate_expansions(ModelParams::new(alpha, p)?, &EXPANSION_AMPLITUDES, &opts))
                .collect::<Result<Vec<_>>>()?;
            let passed = entries.iter().all(|e| e.passed);
            Ok(SuiteReport::Expansions { entries, passed })
        }
        Suite::Oracle => {
            let n = config.oracle_truncation;
            let mut entries = Vec::new();
            for (alpha, p) in config.sets(&[(2.0, 2.0)]) {
                let w = solve_wave_with(ModelParams::new(alpha, p)?, config.a, 0.0, None, &WaveOptions::with_truncation(n))?;
                for &np in &config.n_periods {
                    entries.push(OracleEntry { alpha, p, a: config.a, report: block_oracle(&w, np, n)? });
                }
            }
            let passed = entries.iter().all(|e| e.report.passed);
            Ok(SuiteReport::Oracle { entries, passed })
        }
        Suite::Symmetry => {
            let mut entries = Vec::new();
            for (alpha, p) in config.sets(&SYMMETRY_SETS) {
                let w = solve_wave_with(ModelParams::new(alpha, p)?, config.a, 0.0, None, &opts)?;
                for xi in SYMMETRY_XI {
                    entries.push(SymmetryEntry { alpha, p, a: config.a, report: symmetry_check(&w, xi)? });
                }
            }
            let passed = entries.iter().all(|e| e.report.passed);
            Ok(SuiteReport::Symmetry { entries, passed })
        }
        Suite::Discriminant => {
            let entries = config
                .sets(&DISCRIMINANT_SETS)
                .into_iter()
                .map(|(alpha, p)| discriminant_entry(alpha, p, &opts))
                .collect::<Result<Vec<_>>>()?;
            let passed = entries.iter().all(|e| e.passed);
            Ok(SuiteReport::Discriminant { entries, passed })
        }
        Suite::ConstantState => {
            let report = constant_state_suite(&config.sets(&CONSTANT_STATE_SETS), config.truncation)?;
            let passed = report.passed;
            Ok(SuiteReport::ConstantState { report, passed })
        }
    }
}

fn discriminant_entry(alpha: f64, p: f64, opts: &WaveOptions) -> Result<DiscriminantEntry> {
    let report = discriminant_scaling_check(ModelParams::new(alpha, p)?, &DISCRIMINANT_AMPLITUDES, DISCRIMINANT_XI, opts)?;
    let borderline = gamma_coefficient(alpha, p).abs() <= 1e-12;
    if borderline {
        let passed = report.fitted_gamma.abs() <= borderline_gamma_scale() && report.b1_passed;
        Ok(DiscriminantEntry { report, note: Some("indeterminate by design".into()), passed })
    } else {
        let passed = report.gamma_passed && report.b1_passed;
        Ok(DiscriminantEntry { report, note: None, passed })
    }
}

/// Spectra of the constant state against the linear dispersion relation,
/// and the cubic discriminant against its closed form.
pub fn constant_state_suite(sets: &[(f64, f64)], n: usize) -> Result<ConstantStateReport> {
    let opts = WaveOptions::with_truncation(n);
    let mut spectra = Vec::new();
    let mut cubics = Vec::new();
    for &(alpha, p) in sets {
        let params = ModelParams::new(alpha, p)?;
        let w = solve_wave_with(params, 0.0, 0.0, None, &opts)?;
        for xi in CONSTANT_STATE_XI {
            let computed = slice_spectrum(&assemble_bloch(&w, xi, n)?, false)?.eigenvalues;
            let expected: Vec<Complex64> = (-(n as i64)..=n as i64)
                .map(|k| Complex64::new(0.0, dispersion_omega(&params, k as f64 + xi)))
                .collect();
            let max_error = matched_distance(&computed, &expected);
            spectra.push(SpectrumEntry { alpha, p, xi, max_error, passed: max_error <= CONSTANT_STATE_TOL });
        }
        for b in CUBIC_B {
            let w = solve_wave_with(params, 0.0, b, None, &opts)?;
            for xi in CUBIC_XI {
                cubics.push(cubic_entry(&w, alpha, p, b, xi, delta_constant_state(&params, b, xi)?, CUBIC_REL_TOL)?);
            }
            let limit = delta_constant_state_limit(&params, b)? * LIMIT_XI * LIMIT_XI;
            cubics.push(cubic_entry(&w, alpha, p, b, LIMIT_XI, limit, LIMIT_REL_TOL)?);
        }
    }
    let passed = spectra.iter().all(|e| e.passed) && cubics.iter().all(|e| e.passed);
    Ok(ConstantStateReport { spectra, cubics, passed })
}

fn cubic_entry(
    w: &crate::wave::WaveSolution,
    alpha: f64,
    p: f64,
    b: f64,
    xi: f64,
    closed_form: f64,
    tolerance: f64,
) -> Result<CubicEntry> {
    let computed = cubic_at(w, xi, w.truncation())?.discriminant;
    let relative_error = (computed - closed_form).abs() / closed_form.abs();
    Ok(CubicEntry {
        alpha,
        p,
        b,
        xi,
        computed,
        closed_form,
        relative_error,
        tolerance,
        passed: relative_error <= tolerance,
    })
}
