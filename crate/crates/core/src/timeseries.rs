//! Univariate ARIMA modelling for short integer-valued series.
//!
//! Coefficients are estimated by conditional sum of squares (CSS) on the
//! differenced series, orders are picked by AICc over a small grid, and
//! forecasts carry Gaussian predictive standard errors accumulated from the
//! model's impulse-response (psi) weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_P: usize = 5;
pub const MAX_D: usize = 2;
pub const MAX_Q: usize = 5;

/// Sweep cap for the CSS pattern search.
pub const MAX_SWEEPS: usize = 500;
/// Convergence tolerance on the residual sum of squares.
pub const RSS_TOL: f64 = 1e-8;

/// Residual variances below this are treated as this value when scoring
/// models, so exact fits get a finite AICc.
const SIGMA2_FLOOR: f64 = 1e-10;

/// Series shorter than this use the last-value fallback forecast.
pub const MIN_MODEL_LEN: usize = 4;

/// An observed series with the (1-based) time index of its first value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
    origin: usize,
}

impl Series {
    pub fn new(values: Vec<f64>, origin: usize) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) || origin < 1 {
            return Err(Error::InvalidSeries);
        }
        Ok(Series { values, origin })
    }

    /// Series starting at time index 1.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("series is non-empty")
    }
}

/// d-th order forward difference. The result's origin moves forward by `d`.
pub fn difference(series: &Series, d: usize) -> Result<Series> {
    if series.len() <= d {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: d,
        });
    }
    let values = difference_values(series.values(), d);
    Ok(Series {
        values,
        origin: series.origin + d,
    })
}

fn difference_values(y: &[f64], d: usize) -> Vec<f64> {
    let mut out = y.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Order {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl Order {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Order { p, d, q }
    }

    /// A constant term is estimated for d <= 1 only; with d = 2 it would
    /// impose a quadratic trend.
    pub fn has_intercept(&self) -> bool {
        self.d <= 1
    }

    fn min_len(&self) -> usize {
        self.p + self.q + self.d + 3
    }
}

/// A fitted ARIMA(p, d, q) model.
///
/// The differenced series `w` follows
/// `w_t = intercept + sum_i ar[i] w_{t-1-i} + e_t + sum_j ma[j] e_{t-1-j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    pub intercept: f64,
    pub sigma2: f64,
    pub aicc: f64,
    pub n_obs: usize,
}

impl ArimaFit {
    pub fn order(&self) -> Order {
        Order::new(self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub means: Vec<f64>,
    pub std_errs: Vec<f64>,
}

impl Forecast {
    pub fn horizon(&self) -> usize {
        self.means.len()
    }
}

/// CSS residuals of the differenced series; the first `p` are conditioned on
/// and not returned.
fn css_residuals(w: &[f64], intercept: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let p = ar.len();
    let mut e = vec![0.0; w.len()];
    for t in p..w.len() {
        let mut pred = intercept;
        for (i, phi) in ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                pred += theta * e[t - 1 - j];
            }
        }
        e[t] = w[t] - pred;
    }
    e.split_off(p)
}

/// Stationarity of `1 - sum a_i z^i` via the step-down (reverse
/// Levinson-Durbin) recursion: every partial autocorrelation must lie
/// strictly inside the unit interval.
fn is_stationary(coeffs: &[f64]) -> bool {
    step_down_stable(coeffs, 1.0)
}

fn is_invertible(ma: &[f64]) -> bool {
    step_down_stable(ma, -1.0)
}

fn step_down_stable(coeffs: &[f64], sign: f64) -> bool {
    let mut buf = [0.0; 8];
    let mut heap;
    let a: &mut [f64] = if coeffs.len() <= buf.len() {
        &mut buf[..coeffs.len()]
    } else {
        heap = vec![0.0; coeffs.len()];
        &mut heap
    };
    for (dst, c) in a.iter_mut().zip(coeffs) {
        *dst = sign * c;
    }
    let mut k = a.len();
    while k > 0 {
        let kappa = a[k - 1];
        if !kappa.is_finite() || kappa.abs() >= 1.0 - 1e-6 {
            return false;
        }
        let denom = 1.0 - kappa * kappa;
        for j in 0..(k - 1) / 2 + (k - 1) % 2 {
            let (lo, hi) = (a[j], a[k - 2 - j]);
            a[j] = (lo + kappa * hi) / denom;
            a[k - 2 - j] = (hi + kappa * lo) / denom;
        }
        k -= 1;
    }
    true
}

struct Layout {
    intercept: bool,
    p: usize,
    q: usize,
}

impl Layout {
    fn len(&self) -> usize {
        usize::from(self.intercept) + self.p + self.q
    }

    fn split<'a>(&self, x: &'a [f64]) -> (f64, &'a [f64], &'a [f64]) {
        let off = usize::from(self.intercept);
        let c = if self.intercept { x[0] } else { 0.0 };
        (c, &x[off..off + self.p], &x[off + self.p..])
    }
}

fn css_objective(w: &[f64], layout: &Layout, x: &[f64]) -> f64 {
    let (c, ar, ma) = layout.split(x);
    if !is_stationary(ar) || !is_invertible(ma) {
        return f64::INFINITY;
    }
    let rss = if ma.len() <= MAX_Q {
        // Same recursion as css_residuals, keeping only the last q residuals.
        let q = ma.len();
        let mut recent = [0.0; MAX_Q];
        let mut rss = 0.0;
        for t in ar.len()..w.len() {
            let mut pred = c;
            for (i, phi) in ar.iter().enumerate() {
                pred += phi * w[t - 1 - i];
            }
            for (j, theta) in ma.iter().enumerate() {
                pred += theta * recent[j];
            }
            let e = w[t] - pred;
            if q > 0 {
                recent.copy_within(0..q - 1, 1);
                recent[0] = e;
            }
            rss += e * e;
        }
        rss
    } else {
        css_residuals(w, c, ar, ma).iter().map(|e| e * e).sum()
    };
    if rss.is_finite() {
        rss
    } else {
        f64::INFINITY
    }
}

/// Ordinary least squares for `w_t = c + sum phi_i w_{t-i}`, which is the
/// exact CSS minimiser when q = 0.
fn ols_ar(w: &[f64], p: usize, intercept: bool) -> Option<Vec<f64>> {
    let k = usize::from(intercept) + p;
    if k == 0 {
        return Some(Vec::new());
    }
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    let mut row = vec![0.0; k];
    for t in p..w.len() {
        let mut col = 0;
        if intercept {
            row[0] = 1.0;
            col = 1;
        }
        for i in 0..p {
            row[col + i] = w[t - 1 - i];
        }
        for a in 0..k {
            xty[a] += row[a] * w[t];
            for b in 0..k {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    solve_dense(xtx, xty)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        let scale = a.iter().map(|r| r[col].abs()).fold(0.0, f64::max).max(1.0);
        if a[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (done, rest) = a.split_at_mut(col + 1);
        let pivot = &done[col];
        for (k, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            if f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
                b[col + 1 + k] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Hooke-Jeeves pattern search on the CSS objective.
///
/// Returns the minimiser and its RSS, or `NonConvergence` when the sweep
/// cap is reached before every step size has shrunk below its floor.
fn pattern_search(
    w: &[f64],
    layout: &Layout,
    start: Vec<f64>,
    scale: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = layout.len();
    let mut x = start;
    let mut fx = css_objective(w, layout, &x);
    if n == 0 {
        return Ok((x, fx));
    }
    let initial_steps: Vec<f64> = (0..n)
        .map(|i| if layout.intercept && i == 0 { 0.1 * scale } else { 0.1 })
        .collect();
    let min_steps: Vec<f64> = initial_steps.iter().map(|s| s * 1e-6).collect();
    let mut steps = initial_steps.clone();
    let mut sweeps = 0;
    let mut restarts = 0;
    let mut f_at_restart = f64::INFINITY;

    loop {
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NonConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        let (mut y, mut fy) = explore(w, layout, &x, fx, &steps);
        if fy < fx {
            // Pattern moves along the improving direction.
            while sweeps < MAX_SWEEPS {
                sweeps += 1;
                let trial: Vec<f64> = y.iter().zip(&x).map(|(a, b)| 2.0 * a - b).collect();
                x = y;
                fx = fy;
                let ftrial = css_objective(w, layout, &trial);
                let (z, fz) = explore(w, layout, &trial, ftrial, &steps);
                if fz < fx {
                    y = z;
                    fy = fz;
                } else {
                    break;
                }
            }
        } else {
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
        }
        let converged = steps.iter().zip(&min_steps).all(|(s, m)| s < m);
        if converged {
            // Restart from the converged point until a restart stops paying off.
            if f_at_restart - fx <= RSS_TOL * (1.0 + fx) || restarts >= 3 {
                return Ok((x, fx));
            }
            restarts += 1;
            f_at_restart = fx;
            steps = initial_steps.iter().map(|s| s * 0.1).collect();
        }
    }
}

fn explore(w: &[f64], layout: &Layout, x: &[f64], fx: f64, steps: &[f64]) -> (Vec<f64>, f64) {
    let mut cur = x.to_vec();
    let mut fcur = fx;
    for i in 0..cur.len() {
        let orig = cur[i];
        cur[i] = orig + steps[i];
        let fp = css_objective(w, layout, &cur);
        if fp < fcur {
            fcur = fp;
            continue;
        }
        cur[i] = orig - steps[i];
        let fm = css_objective(w, layout, &cur);
        if fm < fcur {
            fcur = fm;
            continue;
        }
        cur[i] = orig;
    }
    (cur, fcur)
}

/// Autocovariances `gamma(0..len)` of a unit-variance ARMA process, from the
/// linear system linking the first `p + 1` lags to the MA terms.
fn arma_autocovariance(ar: &[f64], ma: &[f64], len: usize) -> Option<Vec<f64>> {
    let (p, q) = (ar.len(), ma.len());
    let theta = |j: usize| if j == 0 { 1.0 } else { ma.get(j - 1).copied().unwrap_or(0.0) };
    let mut psi = vec![0.0; q + 1];
    for j in 0..=q {
        psi[j] = theta(j) + (1..=p.min(j)).map(|i| ar[i - 1] * psi[j - i]).sum::<f64>();
    }
    let rhs = |k: usize| (k..=q).map(|j| theta(j) * psi[j - k]).sum::<f64>();

    let mut a = vec![vec![0.0; p + 1]; p + 1];
    let mut b = vec![0.0; p + 1];
    for k in 0..=p {
        a[k][k] += 1.0;
        for i in 1..=p {
            a[k][k.abs_diff(i)] -= ar[i - 1];
        }
        b[k] = rhs(k);
    }
    let mut gamma = solve_dense(a, b)?;
    let need = len.max(p + 1);
    while gamma.len() < need {
        let k = gamma.len();
        let g = (1..=p).map(|i| ar[i - 1] * gamma[k - i]).sum::<f64>() + rhs(k);
        gamma.push(g);
    }
    gamma.truncate(len);
    Some(gamma)
}

/// Exact Gaussian deviance (-2 log-likelihood with the innovation variance
/// concentrated out) of a stationary ARMA model, via Durbin-Levinson.
fn gaussian_deviance(w: &[f64], intercept: f64, ar: &[f64], ma: &[f64]) -> Option<f64> {
    let n = w.len();
    let mean = intercept / (1.0 - ar.iter().sum::<f64>());
    let x: Vec<f64> = w.iter().map(|v| v - mean).collect();
    let gamma = arma_autocovariance(ar, ma, n)?;

    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut v = gamma[0];
    let mut weighted = 0.0;
    let mut log_v = 0.0;
    for t in 0..n {
        if !(v > 0.0 && v.is_finite()) {
            return None;
        }
        let pred: f64 = phi.iter().enumerate().map(|(j, f)| f * x[t - 1 - j]).sum();
        let e = x[t] - pred;
        weighted += e * e / v;
        log_v += v.ln();
        if t + 1 == n {
            break;
        }
        let m = t + 1;
        let kappa = (gamma[m] - (0..t).map(|j| phi[j] * gamma[m - 1 - j]).sum::<f64>()) / v;
        let prev = phi.clone();
        for j in 0..t {
            phi[j] = prev[j] - kappa * prev[t - 1 - j];
        }
        phi.push(kappa);
        v *= 1.0 - kappa * kappa;
    }
    let s2 = (weighted / n as f64).max(SIGMA2_FLOOR);
    let dev = n as f64 * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0) + log_v;
    dev.is_finite().then_some(dev)
}

/// Small-sample corrected AIC. The deviance is rescaled to `n_lik`
/// observations so orders with different differencing stay comparable.
fn aicc(deviance: f64, n_dev: usize, n_lik: usize, k: usize) -> f64 {
    let denom = n_lik as f64 - k as f64 - 1.0;
    if denom <= 0.0 || n_dev <= k {
        return f64::INFINITY;
    }
    let kf = k as f64;
    deviance * n_lik as f64 / n_dev as f64 + 2.0 * kf + 2.0 * kf * (kf + 1.0) / denom
}

/// Fits ARIMA(p, d, q) by conditional sum of squares.
pub fn fit(series: &Series, p: usize, d: usize, q: usize) -> Result<ArimaFit> {
    let order = Order::new(p, d, q);
    if series.len() < order.min_len() {
        return Err(Error::InsufficientData(format!(
            "ARIMA({p},{d},{q}) needs {} values, series has {}",
            order.min_len(),
            series.len()
        )));
    }
    let w = difference_values(series.values(), d);
    let layout = Layout {
        intercept: order.has_intercept(),
        p,
        q,
    };
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let sd = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();

    let mut start = vec![0.0; layout.len()];
    let ols = ols_ar(&w, p, layout.intercept).filter(|b| {
        let off = usize::from(layout.intercept);
        is_stationary(&b[off..])
    });
    match ols {
        Some(b) => start[..b.len()].copy_from_slice(&b),
        None if layout.intercept => start[0] = mean,
        None => {}
    }

    let (x, rss) = pattern_search(&w, &layout, start, sd.max(1e-3))?;
    if !rss.is_finite() {
        return Err(Error::NonConvergence(0));
    }
    let (c, ar, ma) = layout.split(&x);
    let n_eff = w.len() - p;
    let k = layout.len() + 1;
    let sigma2 = rss / n_eff as f64;
    let score = gaussian_deviance(&w, c, ar, ma)
        .map_or(f64::INFINITY, |dev| aicc(dev, w.len(), series.len(), k));
    Ok(ArimaFit {
        p,
        d,
        q,
        ar_coeffs: ar.to_vec(),
        ma_coeffs: ma.to_vec(),
        intercept: c,
        sigma2,
        aicc: score,
        n_obs: series.len(),
    })
}

/// Grid search over p in 0..=5, d in 0..=2, q in 0..=5, keeping the fit with
/// the smallest AICc. Ties go to smaller p+q, then smaller d, then smaller p.
pub fn auto_fit(series: &Series) -> Result<ArimaFit> {
    if series.len() < MIN_MODEL_LEN {
        return Err(Error::InsufficientData(format!(
            "automatic selection needs {MIN_MODEL_LEN} values, series has {}",
            series.len()
        )));
    }
    let mut best: Option<ArimaFit> = None;
    for d in 0..=MAX_D {
        for p in 0..=MAX_P {
            for q in 0..=MAX_Q {
                let order = Order::new(p, d, q);
                if series.len() < order.min_len() {
                    continue;
                }
                let n_eff = series.len() - d - p;
                let k = p + q + usize::from(order.has_intercept()) + 1;
                if n_eff <= k + 1 {
                    continue;
                }
                let Ok(candidate) = fit(series, p, d, q) else {
                    continue;
                };
                if !candidate.aicc.is_finite() {
                    continue;
                }
                best = Some(match best {
                    None => candidate,
                    Some(b) => {
                        if prefer(&candidate, &b) {
                            candidate
                        } else {
                            b
                        }
                    }
                });
            }
        }
    }
    best.ok_or_else(|| Error::InsufficientData("no fittable ARIMA order".into()))
}

fn prefer(a: &ArimaFit, b: &ArimaFit) -> bool {
    let tol = 1e-9 * a.aicc.abs().max(b.aicc.abs()).max(1.0);
    if a.aicc < b.aicc - tol {
        return true;
    }
    if a.aicc > b.aicc + tol {
        return false;
    }
    (a.p + a.q, a.d, a.p) < (b.p + b.q, b.d, b.p)
}

/// Psi weights psi_0..psi_{h-1} of the integrated model.
fn psi_weights(fit: &ArimaFit, h: usize) -> Vec<f64> {
    // Expand phi(B)(1-B)^d into 1 - sum phi*_i B^i.
    let mut ar_poly: Vec<f64> = std::iter::once(1.0)
        .chain(fit.ar_coeffs.iter().map(|c| -c))
        .collect();
    for _ in 0..fit.d {
        let mut next = vec![0.0; ar_poly.len() + 1];
        for (i, c) in ar_poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c;
        }
        ar_poly = next;
    }
    let phi_star: Vec<f64> = ar_poly[1..].iter().map(|c| -c).collect();

    let mut psi = vec![0.0; h];
    if h == 0 {
        return psi;
    }
    psi[0] = 1.0;
    for j in 1..h {
        let mut v = fit.ma_coeffs.get(j - 1).copied().unwrap_or(0.0);
        for (i, phi) in phi_star.iter().enumerate() {
            if i < j {
                v += phi * psi[j - 1 - i];
            }
        }
        psi[j] = v;
    }
    psi
}

/// h-step forecasts of `series` from `fit`.
pub fn forecast(fit: &ArimaFit, series: &Series, h: usize) -> Result<Forecast> {
    if h < 1 {
        return Err(Error::OutOfRange("horizon must be at least 1".into()));
    }
    if series.len() <= fit.d + fit.p {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: fit.d + fit.p,
        });
    }
    // Keep every differencing level so forecasts can be integrated back.
    let mut levels = vec![series.values().to_vec()];
    for _ in 0..fit.d {
        let next = difference_values(levels.last().unwrap(), 1);
        levels.push(next);
    }
    let w = levels.last().unwrap();
    let p = fit.p;
    let resid = css_residuals(w, fit.intercept, &fit.ar_coeffs, &fit.ma_coeffs);
    let mut e = vec![0.0; p];
    e.extend(resid);

    let mut w_ext = w.clone();
    let n = w.len();
    for k in 0..h {
        let t = n + k;
        let mut v = fit.intercept;
        for (i, phi) in fit.ar_coeffs.iter().enumerate() {
            v += phi * w_ext[t - 1 - i];
        }
        for (j, theta) in fit.ma_coeffs.iter().enumerate() {
            let idx = t as isize - 1 - j as isize;
            if idx >= 0 && (idx as usize) < n {
                v += theta * e[idx as usize];
            }
        }
        w_ext.push(v);
    }
    let mut fc: Vec<f64> = w_ext[n..].to_vec();
    for level in levels[..fit.d].iter().rev() {
        let mut last = *level.last().unwrap();
        fc = fc
            .iter()
            .map(|dv| {
                last += dv;
                last
            })
            .collect();
    }

    let psi = psi_weights(fit, h);
    let sigma2 = fit.sigma2.max(0.0);
    let mut acc = 0.0;
    let std_errs = psi
        .iter()
        .map(|w| {
            acc += w * w;
            (sigma2 * acc).sqrt()
        })
        .collect();
    Ok(Forecast {
        means: fc,
        std_errs,
    })
}

/// Predictive quantile `q` at `step` (1-based) under the Gaussian
/// approximation.
pub fn quantile(forecast: &Forecast, step: usize, q: f64) -> Result<f64> {
    if step < 1 || step > forecast.horizon() {
        return Err(Error::OutOfRange(format!(
            "step {step} outside 1..={}",
            forecast.horizon()
        )));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::OutOfRange(format!("quantile {q} outside (0, 1)")));
    }
    let se = forecast.std_errs[step - 1];
    let mean = forecast.means[step - 1];
    if se == 0.0 {
        return Ok(mean);
    }
    Ok(mean + normal_quantile(q) * se)
}

/// Fallback for series too short to model: the last value with the sample
/// standard deviation as a flat standard error.
pub fn fallback_forecast(series: &Series, h: usize) -> Forecast {
    let v = series.values();
    let sd = if v.len() < 2 {
        0.0
    } else {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    Forecast {
        means: vec![series.last(); h],
        std_errs: vec![sd; h],
    }
}

/// A series paired with its selected model, reusable across horizons.
#[derive(Debug, Clone)]
pub enum Forecaster {
    Model { fit: ArimaFit, series: Series },
    Fallback(Series),
}

impl Forecaster {
    /// Selects a model with [`auto_fit`], or the short-series fallback when
    /// the series has fewer than four values or no order is fittable.
    pub fn new(series: Series) -> Self {
        if series.len() < MIN_MODEL_LEN {
            return Forecaster::Fallback(series);
        }
        match auto_fit(&series) {
            Ok(fit) => Forecaster::Model { fit, series },
            Err(_) => Forecaster::Fallback(series),
        }
    }

    pub fn forecast(&self, h: usize) -> Result<Forecast> {
        match self {
            Forecaster::Model { fit, series } => forecast(fit, series, h),
            Forecaster::Fallback(series) => {
                if h < 1 {
                    return Err(Error::OutOfRange("horizon must be at least 1".into()));
                }
                Ok(fallback_forecast(series, h))
            }
        }
    }

    /// Quantile `q` of the forecast `h` steps ahead.
    pub fn quantile(&self, h: usize, q: f64) -> Result<f64> {
        quantile(&self.forecast(h)?, h, q)
    }

    pub fn fit(&self) -> Option<&ArimaFit> {
        match self {
            Forecaster::Model { fit, .. } => Some(fit),
            Forecaster::Fallback(_) => None,
        }
    }
}

/// Inverse of the standard normal CDF (Wichura's AS241, PPND16).
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r
                + 67265.770_927_008_7)
                * r
                + 45921.953_931_549_87)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5226.495_278_852_545 * r + 28729.085_735_721_943) * r
                + 39307.895_800_092_71)
                * r
                + 21213.794_301_586_597)
                * r
                + 5394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_91)
                * r
                + 1.0);
    }
    let r0 = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r0.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(v: &[f64]) -> Series {
        Series::from_values(v.to_vec()).unwrap()
    }

    /// Box-Muller from a seeded generator.
    fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn difference_examples() {
        assert_eq!(difference(&s(&[1., 2., 3., 4.]), 1).unwrap().values(), &[1., 1., 1.]);
        assert_eq!(difference(&s(&[5., 5., 5.]), 0).unwrap().values(), &[5., 5., 5.]);
        assert_eq!(difference(&s(&[1., 4., 9., 16.]), 2).unwrap().values(), &[2., 2.]);
        assert_eq!(difference(&s(&[1., 4., 9.]), 2).unwrap().origin(), 3);
        assert!(matches!(
            difference(&s(&[1., 2.]), 2),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn series_rejects_bad_input() {
        assert!(Series::from_values(vec![]).is_err());
        assert!(Series::from_values(vec![1.0, f64::NAN]).is_err());
        assert!(Series::new(vec![1.0], 0).is_err());
    }

    #[test]
    fn mean_model_matches_sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..500).map(|_| 3.0 + 2.0 * gaussian(&mut rng)).collect();
        let f = fit(&s(&v), 0, 0, 0).unwrap();
        let mean = v.iter().sum::<f64>() / 500.0;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 500.0;
        assert!((f.intercept - mean).abs() < 1e-6);
        assert!((f.sigma2 - var).abs() < 1e-6 * var);
    }

    #[test]
    fn ar1_recovers_yule_walker_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut v = vec![0.0];
        for _ in 1..500 {
            let prev = *v.last().unwrap();
            v.push(0.6 * prev + gaussian(&mut rng));
        }
        // Independent lag-1 Yule-Walker estimate.
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let g0: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
        let g1: f64 = v.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        let yw = g1 / g0;
        let f = fit(&s(&v), 1, 0, 0).unwrap();
        assert!((f.ar_coeffs[0] - 0.6).abs() < 0.1, "phi {}", f.ar_coeffs[0]);
        assert!((f.ar_coeffs[0] - yw).abs() < 0.02, "phi {} yw {}", f.ar_coeffs[0], yw);
    }

    #[test]
    fn drift_after_differencing() {
        let v: Vec<f64> = (1..=30).map(f64::from).collect();
        let f = fit(&s(&v), 0, 1, 0).unwrap();
        assert!((f.intercept - 1.0).abs() < 1e-9);
        assert!(f.sigma2 < 1e-12);
    }

    #[test]
    fn insufficient_data_is_an_error() {
        assert!(matches!(
            fit(&s(&[1., 2., 3., 4.]), 1, 1, 1),
            Err(Error::InsufficientData(_))
        ));
        assert!(auto_fit(&s(&[1., 2., 3.])).is_err());
    }

    #[test]
    fn constant_series_forecasts_exactly() {
        let series = s(&[7.0; 20]);
        let f = auto_fit(&series).unwrap();
        let fc = forecast(&f, &series, 3).unwrap();
        for (m, se) in fc.means.iter().zip(&fc.std_errs) {
            assert!((m - 7.0).abs() < 1e-9, "{m}");
            assert!(*se < 1e-6);
        }
    }

    #[test]
    fn ramp_forecast_continues_drift() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        let series = s(&v);
        let f = auto_fit(&series).unwrap();
        let fc = forecast(&f, &series, 2).unwrap();
        assert!((fc.means[0] - 21.0).abs() < 0.5, "{:?} {:?}", f, fc);
        assert!((fc.means[1] - 22.0).abs() < 0.5);

        let drift = fit(&series, 0, 1, 0).unwrap();
        let fc = forecast(&drift, &series, 2).unwrap();
        assert!((fc.means[0] - 21.0).abs() < 1e-9);
        assert!((fc.means[1] - 22.0).abs() < 1e-9);
    }

    #[test]
    fn ar1_forecast_decays_geometrically() {
        let fit = ArimaFit {
            p: 1,
            d: 0,
            q: 0,
            ar_coeffs: vec![0.6],
            ma_coeffs: vec![],
            intercept: 0.0,
            sigma2: 1.0,
            aicc: 0.0,
            n_obs: 3,
        };
        let fc = forecast(&fit, &s(&[4.0, 2.0, 10.0]), 2).unwrap();
        assert!((fc.means[0] - 6.0).abs() < 1e-12);
        assert!((fc.means[1] - 3.6).abs() < 1e-12);
        // psi_1 = 0.6 so var_2 = 1 + 0.36.
        assert!((fc.std_errs[0] - 1.0).abs() < 1e-12);
        assert!((fc.std_errs[1] - 1.36f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn random_walk_std_errs_grow_with_sqrt_h() {
        let fit = ArimaFit {
            p: 0,
            d: 1,
            q: 0,
            ar_coeffs: vec![],
            ma_coeffs: vec![],
            intercept: 0.0,
            sigma2: 4.0,
            aicc: 0.0,
            n_obs: 5,
        };
        let fc = forecast(&fit, &s(&[1., 2., 3., 4., 5.]), 4).unwrap();
        for (i, se) in fc.std_errs.iter().enumerate() {
            assert!((se - 2.0 * ((i + 1) as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn streaming_rss_matches_residuals() {
        let w = [1.0, 3.0, 2.5, 4.0, 3.2, 5.1, 4.4, 6.0, 5.5, 7.2];
        let layout = Layout { intercept: true, p: 2, q: 3 };
        let x = [0.3, 0.4, -0.2, 0.5, -0.3, 0.1];
        let (c, ar, ma) = layout.split(&x);
        let direct: f64 = css_residuals(&w, c, ar, ma).iter().map(|e| e * e).sum();
        assert!((css_objective(&w, &layout, &x) - direct).abs() < 1e-12);
    }

    #[test]
    fn ma1_autocovariance() {
        let g = arma_autocovariance(&[], &[0.4], 4).unwrap();
        for (got, want) in g.iter().zip([1.16, 0.4, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ar1_autocovariance() {
        let g = arma_autocovariance(&[0.5], &[], 3).unwrap();
        let g0 = 1.0 / (1.0 - 0.25);
        for (k, v) in g.iter().enumerate() {
            assert!((v - g0 * 0.5f64.powi(k as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn ar1_deviance_matches_closed_form() {
        // x_1 ~ N(0, s2 / (1 - phi^2)), x_t | x_{t-1} ~ N(phi x_{t-1}, s2).
        let phi: f64 = 0.6;
        let x: [f64; 8] = [0.3, -1.2, 0.8, 2.0, 1.1, -0.4, 0.0, 0.9];
        let n = x.len() as f64;
        let ss = (1.0 - phi * phi) * x[0] * x[0]
            + x.windows(2).map(|w| (w[1] - phi * w[0]).powi(2)).sum::<f64>();
        let s2 = ss / n;
        let want = n * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0) - (1.0 - phi * phi).ln();
        let got = gaussian_deviance(&x, 0.0, &[phi], &[]).unwrap();
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn white_noise_selects_small_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..200).map(|_| gaussian(&mut rng)).collect();
        let f = auto_fit(&s(&v)).unwrap();
        assert!(f.p + f.q <= 1, "{:?}", f.order());
    }

    /// Normal CDF by composite Simpson quadrature of the density; used as an
    /// oracle independent of AS241.
    fn simpson_cdf(x: f64) -> f64 {
        let n = 20_000;
        let a = 0.0;
        let h = (x - a) / n as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = pdf(a) + pdf(x);
        for i in 1..n {
            let t = a + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(t);
        }
        0.5 + acc * h / 3.0
    }

    fn bisect_quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if simpson_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn normal_quantile_matches_quadrature_oracle() {
        for p in [0.01, 0.1, 0.3, 0.5, 0.8, 0.95, 0.999] {
            let z = normal_quantile(p);
            assert!((z - bisect_quantile(p)).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn quantile_examples() {
        let fc = Forecast {
            means: vec![10.0],
            std_errs: vec![0.0],
        };
        assert_eq!(quantile(&fc, 1, 0.8).unwrap(), 10.0);
        let fc = Forecast {
            means: vec![10.0],
            std_errs: vec![2.0],
        };
        assert_eq!(quantile(&fc, 1, 0.5).unwrap(), 10.0);
        // Frozen from the quadrature oracle: z(0.8) = 0.8416212335729...
        let q = quantile(&fc, 1, 0.8).unwrap();
        assert!((q - 11.683_242_467_145_8).abs() < 1e-6, "{q}");
        assert!(quantile(&fc, 2, 0.5).is_err());
        assert!(quantile(&fc, 1, 1.0).is_err());
        assert!(quantile(&fc, 0, 0.5).is_err());
    }

    #[test]
    fn fallback_for_short_series() {
        let f = Forecaster::new(s(&[3.0, 5.0]));
        let fc = f.forecast(2).unwrap();
        assert_eq!(fc.means, vec![5.0, 5.0]);
        assert!((fc.std_errs[0] - 2f64.sqrt()).abs() < 1e-12);
        let f = Forecaster::new(s(&[3.0]));
        assert_eq!(f.forecast(1).unwrap().std_errs, vec![0.0]);
    }

    #[test]
    fn stationarity_check() {
        assert!(is_stationary(&[0.5]));
        assert!(!is_stationary(&[1.0]));
        assert!(is_stationary(&[0.5, 0.3]));
        assert!(!is_stationary(&[0.5, 0.6]));
        assert!(is_invertible(&[-0.9]));
        assert!(!is_invertible(&[1.2]));
    }
}
