//! Tables over `(h, R, t)` and their extrapolation `h → 0` at fixed `R`, then `R → ∞`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LimitTable {
    quantity: String,
    h_grid: Vec<f64>,
    r_grid: Vec<f64>,
    times: Vec<f64>,
    values: Vec<f64>,
}

fn strictly(grid: &[f64], decreasing: bool) -> bool {
    grid.windows(2).all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] })
}

impl LimitTable {
    /// `h_grid` must be strictly decreasing, `r_grid` and `times` strictly increasing.
    pub fn new(quantity: impl Into<String>, h_grid: Vec<f64>, r_grid: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        if h_grid.is_empty() || !strictly(&h_grid, true) || h_grid.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::validation("h_grid", "must be positive and strictly decreasing"));
        }
        if r_grid.is_empty() || !strictly(&r_grid, false) || r_grid.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::validation("R_grid", "must be positive and strictly increasing"));
        }
        if times.is_empty() || !strictly(&times, false) {
            return Err(Error::validation("t_samples", "must be nonempty and strictly increasing"));
        }
        let n = h_grid.len() * r_grid.len() * times.len();
        Ok(LimitTable { quantity: quantity.into(), h_grid, r_grid, times, values: vec![0.0; n] })
    }

    pub fn from_fn(
        quantity: impl Into<String>,
        h_grid: Vec<f64>,
        r_grid: Vec<f64>,
        times: Vec<f64>,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut t = Self::new(quantity, h_grid, r_grid, times)?;
        for ih in 0..t.h_grid.len() {
            for ir in 0..t.r_grid.len() {
                for it in 0..t.times.len() {
                    t.set(ih, ir, it, f(ih, ir, it));
                }
            }
        }
        Ok(t)
    }

    fn offset(&self, ih: usize, ir: usize, it: usize) -> usize {
        (ih * self.r_grid.len() + ir) * self.times.len() + it
    }

    pub fn get(&self, ih: usize, ir: usize, it: usize) -> f64 {
        self.values[self.offset(ih, ir, it)]
    }

    pub fn set(&mut self, ih: usize, ir: usize, it: usize, v: f64) {
        let o = self.offset(ih, ir, it);
        self.values[o] = v;
    }

    pub fn quantity(&self) -> &str {
        &self.quantity
    }

    pub fn h_grid(&self) -> &[f64] {
        &self.h_grid
    }

    pub fn r_grid(&self) -> &[f64] {
        &self.r_grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The value of largest modulus over `t` for each `(h, R)`.
    pub fn sup_over_time(&self, ih: usize, ir: usize) -> f64 {
        (0..self.times.len())
            .map(|it| self.get(ih, ir, it))
            .fold(0.0, |acc, v| if v.abs() > acc.abs() { v } else { acc })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Long-format CSV with columns `h,R,t,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,R,t,value\n");
        for (ih, h) in self.h_grid.iter().enumerate() {
            for (ir, r) in self.r_grid.iter().enumerate() {
                for (it, t) in self.times.iter().enumerate() {
                    writeln!(s, "{h},{r},{t},{}", self.get(ih, ir, it)).expect("write to string");
                }
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Decreasing,
    Constant,
    Increasing,
    NonMonotone,
}

fn verdict(seq: &[f64]) -> Verdict {
    let scale = seq.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if seq.iter().all(|v| (v - seq[0]).abs() <= 1e-12 * (1.0 + scale)) {
        Verdict::Constant
    } else if seq.windows(2).all(|w| w[1] < w[0]) {
        Verdict::Decreasing
    } else if seq.windows(2).all(|w| w[1] > w[0]) {
        Verdict::Increasing
    } else {
        Verdict::NonMonotone
    }
}

/// Least-squares slope of `ln|y|` against `ln x`; `None` if some `y` vanishes.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || y.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let s = sxy / sxx;
    Some(if s.abs() < 1e-12 { 0.0 } else { s })
}

/// Value at `h = 0` of the quadratic through three points.
pub fn richardson(points: [(f64, f64); 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= (0.0 - points[j].0) / (points[i].0 - points[j].0);
            }
        }
        acc += w * points[i].1;
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowSummary {
    #[serde(rename = "R")]
    pub r: f64,
    /// Sup over `t` at the smallest `h`.
    pub last_value: f64,
    pub richardson: f64,
    pub h_slope: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationSummary {
    pub quantity: String,
    pub rows: Vec<RowSummary>,
    /// Richardson estimate at the largest `R`.
    pub estimate: f64,
    pub r_slope: Option<f64>,
    pub verdict: Verdict,
}

/// Per-`R` Richardson extrapolation in `h` over the last three grid points
/// (values reduced by their sup over `t`), then the trend in `R`.
pub fn limit_extrapolate(table: &LimitTable) -> Result<ExtrapolationSummary> {
    if table.h_grid.len() < 3 {
        return Err(Error::InsufficientGrid(format!("{} h values, need at least 3", table.h_grid.len())));
    }
    if table.r_grid.len() < 2 {
        return Err(Error::InsufficientGrid(format!("{} R values, need at least 2", table.r_grid.len())));
    }
    let nh = table.h_grid.len();
    let rows: Vec<RowSummary> = table
        .r_grid
        .iter()
        .enumerate()
        .map(|(ir, &r)| {
            let seq: Vec<f64> = (0..nh).map(|ih| table.sup_over_time(ih, ir)).collect();
            let pts = [
                (table.h_grid[nh - 3], seq[nh - 3]),
                (table.h_grid[nh - 2], seq[nh - 2]),
                (table.h_grid[nh - 1], seq[nh - 1]),
            ];
            RowSummary {
                r,
                last_value: seq[nh - 1],
                richardson: richardson(pts),
                h_slope: log_log_slope(&table.h_grid, &seq),
                verdict: verdict(&seq),
            }
        })
        .collect();
    let estimates: Vec<f64> = rows.iter().map(|r| r.richardson).collect();
    let first = rows[0].verdict;
    let overall = if rows.iter().all(|r| r.verdict == first) { first } else { Verdict::NonMonotone };
    Ok(ExtrapolationSummary {
        quantity: table.quantity.clone(),
        estimate: *estimates.last().expect("nonempty R grid"),
        r_slope: log_log_slope(&table.r_grid, &estimates),
        verdict: overall,
        rows,
    })
}
