//! Parameter sweeps over `(α, p)` cells, their persisted records and the
//! stability diagram.

use std::io::Write;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{default_xi_grid, stability_sweep_with, Classification, SweepOptions};
use crate::error::{Error, Result};
use crate::reduction::{critical_power, gamma_coefficient, predicted_classification};
use crate::wave::{solve_wave_with, ModelParams, WaveOptions};

/// Inclusive uniform range `min..=max` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Range {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 0 || !(min <= max) || (count == 1 && min != max) {
            return Err(Error::InvalidParameter(format!("empty range {min}:{max}:{count}")));
        }
        Ok(Self { min, max, count })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + i as f64 * h).collect()
    }

    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }
}

impl std::str::FromStr for Range {
    type Err = Error;

    /// `min:max:count`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("expected min:max:count, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].trim().parse().map_err(|_| bad())?;
        let max = parts[1].trim().parse().map_err(|_| bad())?;
        let count = parts[2].trim().parse().map_err(|_| bad())?;
        Range::new(min, max, count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub alpha_range: Range,
    pub p_range: Range,
    pub amplitudes: Vec<f64>,
    pub b: f64,
    pub xi_count: usize,
    pub xi_refine: bool,
    pub truncation: usize,
    pub check_convergence: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha_range: Range { min: 0.6, max: 6.0, count: 40 },
            p_range: Range { min: 1.0, max: 3.0, count: 40 },
            amplitudes: vec![0.05],
            b: 0.0,
            xi_count: 64,
            xi_refine: true,
            truncation: 32,
            check_convergence: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation < 8 {
            return Err(Error::InvalidParameter(format!(
                "truncation must be at least 8, got {}",
                self.truncation
            )));
        }
        if self.amplitudes.is_empty() {
            return Err(Error::InvalidParameter("no amplitudes".into()));
        }
        if self.xi_count < 2 {
            return Err(Error::InvalidParameter("xi grid needs at least 2 points".into()));
        }
        Ok(())
    }

    pub fn xi_grid(&self) -> Vec<f64> {
        if self.xi_refine {
            default_xi_grid(self.xi_count)
        } else {
            let h = 0.5 / (self.xi_count - 1) as f64;
            (0..self.xi_count).map(|i| i as f64 * h).collect()
        }
    }

    /// Cells in row-major order: `α` outer, `p` inner, amplitude innermost.
    pub fn cells(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for alpha in self.alpha_range.points() {
            for p in self.p_range.points() {
                for &a in &self.amplitudes {
                    out.push((alpha, p, a));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub k_alpha: f64,
    pub growth_rate: f64,
    pub worst_xi: f64,
    pub verdict: Classification,
    pub gamma_sign: i8,
    pub p_star_at_alpha: f64,
    pub runtime_ms: f64,
}

impl SweepRecord {
    pub fn predicted(&self) -> Classification {
        predicted_classification(self.alpha, self.p)
    }
}

pub fn evaluate_cell(
    alpha: f64,
    p: f64,
    a: f64,
    b: f64,
    truncation: usize,
    xi_grid: &[f64],
    check_convergence: bool,
) -> Result<SweepRecord> {
    let start = Instant::now();
    let params = ModelParams::new(alpha, p)?;
    let w = solve_wave_with(params, a, b, None, &WaveOptions::with_truncation(truncation))?;
    let opts = SweepOptions {
        convergence_truncation: check_convergence.then_some(truncation + 16),
        ..SweepOptions::default()
    };
    let (verdict, _) = stability_sweep_with(&w, xi_grid, truncation, &opts)?;
    let gamma = gamma_coefficient(alpha, p);
    Ok(SweepRecord {
        alpha,
        p,
        a,
        b,
        k_alpha: w.wavenumber_alpha,
        growth_rate: verdict.growth_rate,
        worst_xi: verdict.worst_xi,
        verdict: verdict.classification,
        gamma_sign: if gamma > 0.0 { 1 } else if gamma < 0.0 { -1 } else { 0 },
        p_star_at_alpha: critical_power(alpha),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Evaluates every cell on the current rayon pool. `sink` sees records in
/// cell order as soon as each prefix is complete; a failing cell stops the
/// sweep.
pub fn run_sweep(
    config: &SweepConfig,
    sink: impl FnMut(usize, &SweepRecord) -> std::io::Result<()> + Send,
) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let cells = config.cells();
    let grid = config.xi_grid();
    let writer = Mutex::new(OrderedWriter { slots: vec![None; cells.len()], next: 0, sink, error: None });
    cells.par_iter().enumerate().for_each(|(i, &(alpha, p, a))| {
        if writer.lock().expect("writer lock").error.is_some() {
            return;
        }
        let r = evaluate_cell(alpha, p, a, config.b, config.truncation, &grid, config.check_convergence);
        writer.lock().expect("writer lock").accept(i, r);
    });
    let w = writer.into_inner().expect("writer lock");
    if let Some(e) = w.error {
        return Err(e);
    }
    Ok(w.slots.into_iter().map(|r| r.expect("every cell reported")).collect())
}

struct OrderedWriter<F> {
    slots: Vec<Option<SweepRecord>>,
    next: usize,
    sink: F,
    error: Option<Error>,
}

impl<F: FnMut(usize, &SweepRecord) -> std::io::Result<()>> OrderedWriter<F> {
    fn accept(&mut self, i: usize, r: Result<SweepRecord>) {
        match r {
            Ok(rec) => self.slots[i] = Some(rec),
            Err(e) => {
                self.error.get_or_insert(e);
                return;
            }
        }
        while self.error.is_none() && self.next < self.slots.len() {
            let Some(rec) = &self.slots[self.next] else { break };
            if let Err(e) = (self.sink)(self.next, rec) {
                self.error = Some(e.into());
            }
            self.next += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub cells: usize,
    pub agreeing: usize,
    /// Cells disagreeing with the predicted class that touch the predicted
    /// boundary (allowed).
    pub near_boundary: usize,
    /// Cells disagreeing away from the boundary (not allowed).
    pub offending: Vec<(f64, f64, Classification)>,
    pub passed: bool,
}

/// Compares sweep verdicts with the `p*(α)` prediction. A disagreeing cell
/// is tolerated only if a grid neighbour has a different predicted class,
/// i.e. the empirical boundary is within one cell of the curve.
pub fn boundary_check(config: &SweepConfig, records: &[SweepRecord]) -> BoundaryReport {
    let alphas = config.alpha_range.points();
    let ps = config.p_range.points();
    let predicted = |i: usize, j: usize| predicted_classification(alphas[i], ps[j]);
    let mut agreeing = 0;
    let mut near_boundary = 0;
    let mut offending = Vec::new();
    let per_cell = config.amplitudes.len();
    for (idx, rec) in records.iter().enumerate() {
        let cell = idx / per_cell;
        let (i, j) = (cell / ps.len(), cell % ps.len());
        let want = predicted(i, j);
        if rec.verdict == want {
            agreeing += 1;
            continue;
        }
        let mut touches = want == Classification::Indeterminate;
        for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni >= alphas.len() as i64 || nj >= ps.len() as i64 {
                continue;
            }
            if predicted(ni as usize, nj as usize) != want {
                touches = true;
            }
        }
        if touches {
            near_boundary += 1;
        } else {
            offending.push((rec.alpha, rec.p, rec.verdict));
        }
    }
    BoundaryReport {
        cells: records.len(),
        agreeing,
        near_boundary,
        passed: offending.is_empty(),
        offending,
    }
}

/// `(α, p*(α))` on `[min, max]` with step `h`.
pub fn pstar_table(min: f64, max: f64, h: f64) -> Vec<(f64, f64)> {
    let count = ((max - min) / h).round() as usize;
    (0..=count)
        .map(|i| {
            let alpha = min + i as f64 * h;
            (alpha, critical_power(alpha))
        })
        .collect()
}

/// Writes the stability diagram: cells coloured by verdict with the
/// `p*(α)` curve on top.
pub fn write_diagram_svg(
    out: &mut impl Write,
    config: &SweepConfig,
    records: &[SweepRecord],
) -> std::io::Result<()> {
    let (w, h) = (640.0, 500.0);
    let (left, right, top, bottom) = (60.0, 20.0, 20.0, 70.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let ar = config.alpha_range;
    let pr = config.p_range;
    let half_a = 0.5 * ar.step().max(1e-9);
    let half_p = 0.5 * pr.step().max(1e-9);
    let (a0, a1) = (ar.min - half_a, ar.max + half_a);
    let (p0, p1) = (pr.min - half_p, pr.max + half_p);
    let x = |a: f64| left + (a - a0) / (a1 - a0) * pw;
    let y = |p: f64| top + (p1 - p) / (p1 - p0) * ph;

    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )?;
    writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#)?;
    for rec in records.iter().filter(|r| r.a == config.amplitudes[0]) {
        let colour = colour_of(rec.verdict);
        writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{colour}" shape-rendering="crispEdges"/>"#,
            x(rec.alpha - half_a),
            y(rec.p + half_p),
            x(rec.alpha + half_a) - x(rec.alpha - half_a),
            y(rec.p - half_p) - y(rec.p + half_p),
        )?;
    }
    let curve: Vec<String> = pstar_table(a0.max(0.51), a1, (a1 - a0) / 400.0)
        .into_iter()
        .filter(|&(_, p)| p >= p0 && p <= p1)
        .map(|(a, p)| format!("{:.2},{:.2}", x(a), y(p)))
        .collect();
    writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        curve.join(" ")
    )?;
    writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )?;
    for t in 0..=5 {
        let a = a0 + (a1 - a0) * t as f64 / 5.0;
        let p = p0 + (p1 - p0) * t as f64 / 5.0;
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{a:.2}</text>"#, x(a), h - bottom + 18.0)?;
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{p:.2}</text>"#, left - 6.0, y(p) + 4.0)?;
    }
    writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">α</text>"#, left + pw / 2.0, h - 30.0)?;
    let mut lx = left;
    for (v, label) in [
        (Classification::Stable, "stable"),
        (Classification::Unstable, "unstable"),
        (Classification::Indeterminate, "indeterminate"),
    ] {
        writeln!(out, r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#, h - 18.0, colour_of(v))?;
        writeln!(out, r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, lx + 16.0, h - 8.0)?;
        lx += 120.0;
    }
    writeln!(out, r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#, h - 12.0, lx + 20.0, h - 12.0)?;
    writeln!(out, r#"<text x="{:.2}" y="{:.2}">p*(α)</text>"#, lx + 26.0, h - 8.0)?;
    writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">p</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    )?;
    writeln!(out, "</svg>")
}

fn colour_of(v: Classification) -> &'static str {
    match v {
        Classification::Stable => "#7fbf7f",
        Classification::Unstable => "#e8a0a0",
        Classification::Indeterminate => "#f0d060",
    }
}
