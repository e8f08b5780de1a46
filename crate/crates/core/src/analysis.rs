//! Closed-form constants of the iid-angle walk and the empirical estimators
//! they are checked against.

use std::f64::consts::{FRAC_2_PI, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{aggregate, pairwise_sum};
use crate::plane::Point2;
use crate::sampling::{check_half_width, wrap_to_circle, Angle};
use crate::walks::{Polyline, StepSeq};

/// Default truncation index for [`tv_fourier_bound`].
pub const DEFAULT_TV_TRUNCATION: usize = 1 << 20;

/// Default bin count for [`tv_empirical`].
pub const DEFAULT_TV_BINS: usize = 256;

/// Triangles with `area < COLLINEAR_REL_AREA · abc` have zero curvature.
pub const COLLINEAR_REL_AREA: f64 = 1e-14;

/// `sin(α)/α`, equal to 1 at 0.
pub fn sinc(alpha: f64) -> f64 {
    if alpha.abs() < 1e-4 {
        let a2 = alpha * alpha;
        1.0 - a2 / 6.0 + a2 * a2 / 120.0
    } else {
        alpha.sin() / alpha
    }
}

/// `1 − sinc α` without cancellation for small `α`.
pub fn one_minus_sinc(alpha: f64) -> f64 {
    if alpha.abs() < 0.05 {
        let a2 = alpha * alpha;
        a2 / 6.0 * (1.0 - a2 / 20.0 * (1.0 - a2 / 42.0 * (1.0 - a2 / 72.0)))
    } else {
        1.0 - alpha.sin() / alpha
    }
}

/// Per-coordinate variance `½(1 + sinc α)/(1 − sinc α)` of the Brownian limit
/// of `X^n/√n` for iid angles uniform on `[−α, α]`.
pub fn sigma_alpha_sq(alpha: Angle) -> Result<f64> {
    let a = check_half_width(alpha.radians())?;
    Ok(0.5 * (1.0 + sinc(a)) / one_minus_sinc(a))
}

/// Per-coordinate covariance `½(sinc α)^k` of `U_j` and `U_{j+k}`.
pub fn step_autocov_exact(alpha: Angle, k: u32) -> Result<f64> {
    let a = check_half_width(alpha.radians())?;
    Ok(0.5 * sinc(a).powi(k as i32))
}

/// `E‖Σ_{j≤n} U_j‖² = n + 2 Σ_{k=1}^{n−1} (n−k)(sinc α)^k`, in closed form.
pub fn msd_exact(alpha: Angle, n: usize) -> Result<f64> {
    let a = check_half_width(alpha.radians())?;
    if n == 0 {
        return Err(Error::InvalidArgument("msd_exact needs n ≥ 1".into()));
    }
    let s = sinc(a);
    let nf = n as f64;
    if s <= 0.0 {
        return Ok(nf);
    }
    let d = one_minus_sinc(a);
    // Σ_{k=1}^{n−1} (n−k) s^k = s·[n·d − (1 − sⁿ)]/d²
    let bracket = if nf * d < 0.1 {
        small_d_bracket(n, d)
    } else {
        nf * d + (nf * (-d).ln_1p()).exp_m1()
    };
    Ok(nf + 2.0 * s * bracket / (d * d))
}

/// `n·d − (1 − (1 − d)ⁿ) = Σ_{j≥2} (−1)^j C(n, j) d^j` for small `n·d`.
fn small_d_bracket(n: usize, d: f64) -> f64 {
    let nf = n as f64;
    let mut term = nf * (nf - 1.0) / 2.0 * d * d;
    let mut sum = 0.0;
    let mut j = 2usize;
    while j <= n {
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        term *= -((nf - j as f64) / (j as f64 + 1.0)) * d;
        j += 1;
    }
    sum
}

fn check_tv_args(alpha: f64, r: u32) -> Result<f64> {
    let a = check_half_width(alpha)?;
    if r == 0 {
        return Err(Error::InvalidArgument("convolution power r must be ≥ 1".into()));
    }
    Ok(a)
}

/// Fourier bound `Σ_{k≥1} |sinc(kα)|^r` on `tv(ν_r, ν)`, where `ν_r` is the
/// wrapped law of a sum of `r` uniform `[−α, α]` angles and `ν` is uniform on
/// the circle.
///
/// Terms up to `truncation` are summed directly and the rest is replaced by
/// the integral bound `(Kα)^{1−r}/((r−1)α)`, so the result is a true upper
/// bound. For `α = π` every term vanishes and the bound is exactly zero. For
/// `r = 1` and `α < π` the series diverges and an error is returned, as it is
/// when `truncation·α ≤ 1` (the tail bound would exceed the terms it
/// replaces).
pub fn tv_fourier_bound(alpha: Angle, r: u32, truncation: usize) -> Result<f64> {
    let a = check_tv_args(alpha.radians(), r)?;
    if a == PI {
        return Ok(0.0);
    }
    if r == 1 {
        return Err(Error::InvalidArgument(
            "Σ|sinc(kα)| diverges for α < π; use r ≥ 2".into(),
        ));
    }
    if truncation == 0 || truncation as f64 * a <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "truncation {truncation} too small for α = {a}: need truncation·α > 1"
        )));
    }
    let terms: Vec<f64> = (1..=truncation)
        .map(|k| sinc(k as f64 * a).abs().powi(r as i32))
        .collect();
    let head = pairwise_sum(&terms);
    let kf = truncation as f64;
    let tail = (kf * a).powi(1 - r as i32) / ((r as f64 - 1.0) * a);
    Ok(head + tail)
}

/// The packaged bound `(A/α)·(sinc α ∨ 2/π)^r`. The numeric constant `A` is
/// not known; callers choose it.
pub fn tv_constant_bound(alpha: Angle, r: u32, a_const: f64) -> Result<f64> {
    let a = check_tv_args(alpha.radians(), r)?;
    Ok(a_const / a * sinc(a).max(FRAC_2_PI).powi(r as i32))
}

/// Binned total-variation distance between the wrapped samples and the
/// uniform law on `[0, 2π)`.
pub fn tv_empirical(samples: &[f64], bins: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("tv_empirical"));
    }
    if bins < 2 {
        return Err(Error::InvalidArgument("tv_empirical needs at least 2 bins".into()));
    }
    let mut counts = vec![0u64; bins];
    let width = bins as f64 / TAU;
    for &x in samples {
        let b = (wrap_to_circle(x) * width) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let total = samples.len() as f64;
    let uniform = 1.0 / bins as f64;
    let dev: Vec<f64> = counts
        .iter()
        .map(|&c| (c as f64 / total - uniform).abs())
        .collect();
    Ok(0.5 * pairwise_sum(&dev))
}

/// Result of packing a TV comparison for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub empirical: f64,
    pub fourier_bound: f64,
    pub bins: usize,
    pub truncation: usize,
}

fn lag_products(steps: &StepSeq, k: usize) -> Result<Vec<f64>> {
    let u = steps.as_slice();
    if k >= u.len() {
        return Err(Error::InvalidArgument(format!(
            "lag {k} needs more than {} steps",
            u.len()
        )));
    }
    Ok(u.iter().zip(&u[k..]).map(|(a, b)| 0.5 * a.dot(*b)).collect())
}

/// `(1/(n−k)) Σ_j ⟨U_j, U_{j+k}⟩/2`, comparable with [`step_autocov_exact`].
pub fn autocov_empirical(steps: &StepSeq, k: usize) -> Result<f64> {
    let p = lag_products(steps, k)?;
    Ok(pairwise_sum(&p) / p.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutocovEstimate {
    pub value: f64,
    pub stderr: f64,
    pub pairs: usize,
}

/// [`autocov_empirical`] with a batch-means standard error. The lag products
/// are serially dependent, so the plain `sd/√n` would understate the error;
/// batches much longer than the correlation length fix that.
pub fn autocov_with_stderr(steps: &StepSeq, k: usize, batches: usize) -> Result<AutocovEstimate> {
    let p = lag_products(steps, k)?;
    if batches < 2 || p.len() < 2 * batches {
        return Err(Error::InvalidArgument(format!(
            "{} lag products cannot fill {batches} batches",
            p.len()
        )));
    }
    let len = p.len() / batches;
    let means: Vec<f64> = p
        .chunks_exact(len)
        .map(|c| pairwise_sum(c) / len as f64)
        .collect();
    let st = aggregate(&means)?;
    Ok(AutocovEstimate {
        value: pairwise_sum(&p) / p.len() as f64,
        stderr: st.sd / (means.len() as f64).sqrt(),
        pairs: p.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub vertex_index: usize,
    pub curvature: f64,
}

/// Inverse circumradius `4·Area/(abc)` of the triangle `a, b, c`.
pub fn circumradius_curvature(a: Point2, b: Point2, c: Point2) -> Result<f64> {
    let (ab, bc, ca) = (a.dist(b), b.dist(c), c.dist(a));
    if ab == 0.0 || bc == 0.0 || ca == 0.0 {
        return Err(Error::Degenerate("repeated vertex in curvature triple".into()));
    }
    let area = 0.5 * (b - a).cross(c - a).abs();
    let prod = ab * bc * ca;
    if area < COLLINEAR_REL_AREA * prod {
        return Ok(0.0);
    }
    Ok(4.0 * area / prod)
}

/// Curvature at interior vertex `i` (`1 ≤ i ≤ n − 1`).
pub fn discrete_curvature(path: &Polyline, i: usize) -> Result<CurvatureSample> {
    let v = path.vertices();
    if i == 0 || i + 1 >= v.len() {
        return Err(Error::InvalidArgument(format!(
            "vertex {i} is not interior to a path with {} segments",
            path.n()
        )));
    }
    Ok(CurvatureSample {
        vertex_index: i,
        curvature: circumradius_curvature(v[i - 1], v[i], v[i + 1])?,
    })
}

/// Curvature at every interior vertex, in index order.
pub fn curvature_series(path: &Polyline) -> Result<Vec<f64>> {
    path.vertices()
        .windows(3)
        .map(|w| circumradius_curvature(w[0], w[1], w[2]))
        .collect()
}

/// `max_{s<t} ‖X(t) − X(s)‖/(t − s)` over `grid` equally spaced times.
pub fn lipschitz_constant(path: &Polyline, grid: usize) -> Result<f64> {
    if grid < 2 {
        return Err(Error::InvalidArgument("lipschitz grid needs ≥ 2 points".into()));
    }
    let step = 1.0 / (grid - 1) as f64;
    let pts: Vec<Point2> = (0..grid)
        .map(|i| path.eval_unchecked((i as f64 * step).min(1.0)))
        .collect();
    let mut best = 0.0f64;
    for (i, &p) in pts.iter().enumerate() {
        for (gap, &q) in pts[i + 1..].iter().enumerate() {
            let dt = (gap + 1) as f64 * step;
            best = best.max(p.dist(q) / dt);
        }
    }
    Ok(best)
}

/// Log–log least-squares fit `log y = exponent·log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn scaling_fit(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("scaling_fit needs equal lengths".into()));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument("scaling_fit needs ≥ 3 points".into()));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(
            "scaling_fit needs positive finite data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("scaling_fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - (exponent * x + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ScalingFit {
        exponent,
        intercept,
        r_squared,
    })
}
