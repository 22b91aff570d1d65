//! Closed-form results for the square lattice.

use serde::Serialize;

use crate::error::{Error, Result};

/// Self-dual critical temperature of the Q-state Potts model on the square
/// lattice, `2 / ln(1 + sqrt(Q))`. Real `Q >= 1` is accepted.
pub fn critical_temperature(q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidArgument(format!("critical temperature needs Q >= 1, got {q}")));
    }
    Ok(2.0 / (1.0 + q.sqrt()).ln())
}

/// Ising critical temperature, `2 / ln(1 + sqrt 2)`.
pub fn ising_critical_temperature() -> f64 {
    2.0 / std::f64::consts::SQRT_2.ln_1p()
}

/// Spontaneous magnetization of the d = 2 Ising model under plus boundary
/// conditions; exactly 0 at and above `T_c`.
pub fn onsager_magnetization(temperature: f64) -> Result<f64> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::InvalidArgument(format!("temperature must be > 0, got {temperature}")));
    }
    if temperature >= ising_critical_temperature() {
        return Ok(0.0);
    }
    let s = (2.0 / temperature).sinh();
    let inner = 1.0 - 1.0 / s.powi(4);
    Ok(inner.max(0.0).powf(0.125))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    /// Distances `T_c - T` covered by the fit.
    pub min_distance: f64,
    pub max_distance: f64,
}

/// Least-squares slope of `ln m` against `ln(T_c - T)` for `n` log-spaced
/// distances in `[min_distance, max_distance]` below `T_c`.
pub fn onsager_exponent_fit(min_distance: f64, max_distance: f64, n: usize) -> Result<ExponentFit> {
    let tc = ising_critical_temperature();
    if !(min_distance > 0.0 && min_distance < max_distance && max_distance < tc) {
        return Err(Error::InvalidArgument(format!(
            "fit window must satisfy 0 < {min_distance} < {max_distance} < T_c"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("fit needs at least two points".into()));
    }
    let (lo, hi) = (min_distance.ln(), max_distance.ln());
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let m = onsager_magnetization(tc - x.exp())?;
        xs.push(x);
        ys.push(m.ln());
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(ExponentFit { slope, intercept, points: n, min_distance, max_distance })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `tanh(beta)`, the natural expansion variable at high temperature.
pub fn tanh_reparam(beta: f64) -> f64 {
    beta.tanh()
}

/// First three terms of the Taylor series of `tanh`.
pub fn tanh_series(beta: f64) -> f64 {
    beta - beta.powi(3) / 3.0 + 2.0 * beta.powi(5) / 15.0
}

/// Both sides of `exp(beta s) = cosh(beta) (1 + tanh(beta) s)` for a bond
/// value `s = +-1`.
pub fn bond_weight_identity(beta: f64, s: i8) -> (f64, f64) {
    let s = f64::from(s);
    ((beta * s).exp(), beta.cosh() * (1.0 + beta.tanh() * s))
}
