//! Grid simulators of the scaling limits.
//!
//! * `ScaledBm`: planar Brownian motion `σ·B`.
//! * `C1`: `X_t = U ∫₀ᵗ e^{iΦ_s} ds` with `Φ = c·B`.
//! * `C2`: the same with `Φ_t = c·∫₀ᵗ B_u du`.
//!
//! `B` is a standard 1D Brownian motion sampled by Gaussian increments on the
//! path grid `t_k = k/m`, `U` is uniform on the circle, and both time
//! integrals use the trapezoid rule on the same grid.
//!
//! The drift coefficient `c` is explicit. [`DriftRule::Derived`] gives
//! `√(κ/3)`, the standard deviation per unit time of the rescaled angle sums
//! (increment variance `α_n²/3` times `n·α_n² → κ`);
//! [`DriftRule::Paper`] gives the coefficient `2κ/3`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{Point2, UnitVec2, ORIGIN};
use crate::sampling::RandomSource;
use crate::walks::Polyline;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    ScaledBm { sigma: f64 },
    C1 { kappa: f64, drift_coeff: f64 },
    C2 { kappa: f64, drift_coeff: f64 },
}

impl LimitKind {
    pub fn tag(&self) -> &'static str {
        match self {
            LimitKind::ScaledBm { .. } => "bm",
            LimitKind::C1 { .. } => "c1",
            LimitKind::C2 { .. } => "c2",
        }
    }

    pub fn c1(kappa: f64, rule: DriftRule) -> Self {
        LimitKind::C1 {
            kappa,
            drift_coeff: rule.resolve(kappa),
        }
    }

    pub fn c2(kappa: f64, rule: DriftRule) -> Self {
        LimitKind::C2 {
            kappa,
            drift_coeff: rule.resolve(kappa),
        }
    }
}

/// How the drift coefficient is chosen from `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DriftRule {
    #[default]
    Derived,
    Paper,
    Value(f64),
}

impl DriftRule {
    pub fn resolve(self, kappa: f64) -> f64 {
        match self {
            DriftRule::Derived => derived_drift_coeff(kappa),
            DriftRule::Paper => linear_drift_coeff(kappa),
            DriftRule::Value(v) => v,
        }
    }
}

impl FromStr for DriftRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derived" => Ok(DriftRule::Derived),
            "paper" => Ok(DriftRule::Paper),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(DriftRule::Value)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "drift coefficient `{other}` is not `derived`, `paper`, or a number"
                    ))
                }),
        }
    }
}

impl fmt::Display for DriftRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftRule::Derived => f.write_str("derived"),
            DriftRule::Paper => f.write_str("paper"),
            DriftRule::Value(v) => write!(f, "{v}"),
        }
    }
}

/// `√(κ/3)`.
pub fn derived_drift_coeff(kappa: f64) -> f64 {
    (kappa / 3.0).sqrt()
}

/// `2κ/3`.
pub fn linear_drift_coeff(kappa: f64) -> f64 {
    2.0 * kappa / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSpec {
    pub kind: LimitKind,
    pub grid: usize,
}

impl LimitSpec {
    pub fn new(kind: LimitKind, grid: usize) -> Result<Self> {
        let spec = Self { kind, grid };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(Error::InvalidLimitSpec("grid must be at least 2".into()));
        }
        match self.kind {
            LimitKind::ScaledBm { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidLimitSpec(format!("sigma must be positive, got {sigma}")),
            ),
            LimitKind::C1 { kappa, drift_coeff } | LimitKind::C2 { kappa, drift_coeff }
                if !(kappa >= 0.0 && kappa.is_finite() && drift_coeff.is_finite()) =>
            {
                Err(Error::InvalidLimitSpec(format!(
                    "kappa must be ≥ 0 and drift finite, got κ = {kappa}, c = {drift_coeff}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// One realization on the grid `t_k = k/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitRealization {
    pub kind: LimitKind,
    pub path: Polyline,
    /// Phase `Φ_{t_k}`; empty for Brownian motion.
    pub angle_track: Vec<f64>,
    /// Driver `B_{t_k}`; empty for Brownian motion.
    pub driver_track: Vec<f64>,
    /// Initial direction `U`, absent for Brownian motion.
    pub direction: Option<UnitVec2>,
}

impl LimitRealization {
    pub fn grid(&self) -> usize {
        self.path.n()
    }
}

/// Standard Brownian motion at `t_k = k/m`, starting at 0.
pub fn brownian_driver(m: usize, src: &mut RandomSource) -> Vec<f64> {
    let sd = (1.0 / m as f64).sqrt();
    let mut b = Vec::with_capacity(m + 1);
    let mut x = 0.0;
    b.push(x);
    for _ in 0..m {
        x += sd * src.normal_std();
        b.push(x);
    }
    b
}

/// Linear interpolation of a grid function onto `m + 1` equally spaced
/// points. Nodes of the original grid are reproduced when `m` is a multiple
/// of its length.
pub fn resample_linear(values: &[f64], m: usize) -> Vec<f64> {
    let src_m = values.len() - 1;
    (0..=m)
        .map(|k| {
            let pos = k as f64 * src_m as f64 / m as f64;
            let i = (pos.floor() as usize).min(src_m);
            if i == src_m {
                values[src_m]
            } else {
                let f = pos - i as f64;
                values[i] + f * (values[i + 1] - values[i])
            }
        })
        .collect()
}

/// Cumulative trapezoid integral of grid values with spacing `h`.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// `U ∫₀^{t_k} e^{iΦ_s} ds` by the trapezoid rule.
pub fn integrate_phase(phase: &[f64], u: UnitVec2) -> Polyline {
    let m = phase.len() - 1;
    let h = 1.0 / m as f64;
    let mut vertices = Vec::with_capacity(m + 1);
    let mut p = ORIGIN;
    vertices.push(p);
    let mut prev = u.rotated(phase[0]);
    for &phi in &phase[1..] {
        let next = u.rotated(phi);
        p += (prev.point() + next.point()) * (0.5 * h);
        vertices.push(p);
        prev = next;
    }
    Polyline::from_vertices(vertices, 1.0).expect("phase grid has at least two points")
}

fn check_grid(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidLimitSpec("grid must be at least 2".into()));
    }
    Ok(())
}

/// Planar Brownian motion with per-coordinate variance `σ²t`.
pub fn simulate_bm2(sigma: f64, m: usize, src: &mut RandomSource) -> Result<LimitRealization> {
    check_grid(m)?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidLimitSpec(format!("sigma must be ≥ 0, got {sigma}")));
    }
    let sd = sigma * (1.0 / m as f64).sqrt();
    let mut vertices = Vec::with_capacity(m + 1);
    let mut p = ORIGIN;
    vertices.push(p);
    for _ in 0..m {
        let dx = sd * src.normal_std();
        let dy = sd * src.normal_std();
        p += Point2::new(dx, dy);
        vertices.push(p);
    }
    Ok(LimitRealization {
        kind: LimitKind::ScaledBm { sigma },
        path: Polyline::from_vertices(vertices, 1.0)?,
        angle_track: Vec::new(),
        driver_track: Vec::new(),
        direction: None,
    })
}

/// C1 limit from a given driver and direction.
pub fn c1_from_driver(kappa: f64, drift_coeff: f64, driver: Vec<f64>, u: UnitVec2) -> Result<LimitRealization> {
    check_grid(driver.len().saturating_sub(1))?;
    let phase: Vec<f64> = driver.iter().map(|b| drift_coeff * b).collect();
    Ok(LimitRealization {
        kind: LimitKind::C1 { kappa, drift_coeff },
        path: integrate_phase(&phase, u),
        angle_track: phase,
        driver_track: driver,
        direction: Some(u),
    })
}

/// C2 limit from a given driver and direction.
pub fn c2_from_driver(kappa: f64, drift_coeff: f64, driver: Vec<f64>, u: UnitVec2) -> Result<LimitRealization> {
    let m = driver.len().saturating_sub(1);
    check_grid(m)?;
    let mut phase = cumulative_trapezoid(&driver, 1.0 / m as f64);
    for p in &mut phase {
        *p *= drift_coeff;
    }
    Ok(LimitRealization {
        kind: LimitKind::C2 { kappa, drift_coeff },
        path: integrate_phase(&phase, u),
        angle_track: phase,
        driver_track: driver,
        direction: Some(u),
    })
}

/// Draws `U`, then the driver increments.
pub fn simulate_c1(kappa: f64, drift_coeff: f64, m: usize, src: &mut RandomSource) -> Result<LimitRealization> {
    check_grid(m)?;
    let u = src.uniform_circle();
    let driver = brownian_driver(m, src);
    c1_from_driver(kappa, drift_coeff, driver, u)
}

/// Draws `U`, then the driver increments.
pub fn simulate_c2(kappa: f64, drift_coeff: f64, m: usize, src: &mut RandomSource) -> Result<LimitRealization> {
    check_grid(m)?;
    let u = src.uniform_circle();
    let driver = brownian_driver(m, src);
    c2_from_driver(kappa, drift_coeff, driver, u)
}

pub fn simulate(spec: &LimitSpec, src: &mut RandomSource) -> Result<LimitRealization> {
    spec.validate()?;
    match spec.kind {
        LimitKind::ScaledBm { sigma } => simulate_bm2(sigma, spec.grid, src),
        LimitKind::C1 { kappa, drift_coeff } => simulate_c1(kappa, drift_coeff, spec.grid, src),
        LimitKind::C2 { kappa, drift_coeff } => simulate_c2(kappa, drift_coeff, spec.grid, src),
    }
}

/// `(t_k, c·|B_{t_k}|)`: the unsigned curvature of a C2 realization.
pub fn limit_curvature_series(real: &LimitRealization) -> Result<Vec<(f64, f64)>> {
    let LimitKind::C2 { drift_coeff, .. } = real.kind else {
        return Err(Error::WrongKind {
            expected: "c2",
            found: real.kind.tag(),
        });
    };
    let m = real.driver_track.len() - 1;
    Ok(real
        .driver_track
        .iter()
        .enumerate()
        .map(|(k, b)| (k as f64 / m as f64, drift_coeff * b.abs()))
        .collect())
}

/// `max_k | m·‖X(t_{k+1}) − X(t_k)‖ − 1 |`.
pub fn max_speed_deviation(path: &Polyline) -> f64 {
    let m = path.n() as f64;
    path.vertices()
        .windows(2)
        .map(|w| (m * w[0].dist(w[1]) - 1.0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::aggregate;
    use crate::sampling::{derive_stream, Seed};
    use std::f64::consts::PI;

    #[test]
    fn drift_rules() {
        assert_eq!(DriftRule::Derived.resolve(16.0), (16.0f64 / 3.0).sqrt());
        assert_eq!(DriftRule::Paper.resolve(16.0), 2.0 * 16.0 / 3.0);
        assert_eq!("0.5".parse::<DriftRule>().unwrap(), DriftRule::Value(0.5));
        assert_eq!("paper".parse::<DriftRule>().unwrap(), DriftRule::Paper);
        assert!("nan".parse::<DriftRule>().is_err());
        assert!("fast".parse::<DriftRule>().is_err());
        // the two rules coincide only at κ = 3/4
        assert!((derived_drift_coeff(0.75) - linear_drift_coeff(0.75)).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(LimitSpec::new(LimitKind::ScaledBm { sigma: 1.0 }, 1).is_err());
        assert!(LimitSpec::new(LimitKind::ScaledBm { sigma: 0.0 }, 10).is_err());
        assert!(LimitSpec::new(LimitKind::c2(-1.0, DriftRule::Value(1.0)), 10).is_err());
        assert!(LimitSpec::new(LimitKind::c2(0.0, DriftRule::Derived), 10).is_ok());
    }

    #[test]
    fn bm_marginal_and_increments() {
        let reps = 10_000;
        let mut ends = Vec::with_capacity(reps);
        let (mut first, mut second) = (Vec::new(), Vec::new());
        for r in 0..reps {
            let real = simulate_bm2(1.0, 100, &mut derive_stream(Seed(31), r as u64)).unwrap();
            let v = real.path.vertices();
            ends.push(v[100].x);
            first.push(v[50].x);
            second.push(v[100].x - v[50].x);
        }
        let st = aggregate(&ends).unwrap();
        assert!((st.sd * st.sd - 1.0).abs() < 0.05);
        let (a, b) = (aggregate(&first).unwrap(), aggregate(&second).unwrap());
        let cov: f64 = first
            .iter()
            .zip(&second)
            .map(|(x, y)| (x - a.mean) * (y - b.mean))
            .sum::<f64>()
            / (reps as f64 - 1.0);
        assert!((cov / (a.sd * b.sd)).abs() < 0.03);
    }

    #[test]
    fn bm_with_zero_sigma_stays_put() {
        let real = simulate_bm2(0.0, 50, &mut derive_stream(Seed(1), 0)).unwrap();
        assert!(real.path.vertices().iter().all(|&p| p == ORIGIN));
        assert!(simulate_bm2(1.0, 1, &mut derive_stream(Seed(1), 0)).is_err());
    }

    #[test]
    fn zero_kappa_gives_straight_lines() {
        for c2 in [false, true] {
            let kind = if c2 { LimitKind::c2(0.0, DriftRule::Derived) } else { LimitKind::c1(0.0, DriftRule::Derived) };
            let spec = LimitSpec::new(kind, 1000).unwrap();
            let real = simulate(&spec, &mut derive_stream(Seed(2), 0)).unwrap();
            let u = real.direction.unwrap();
            for (k, p) in real.path.vertices().iter().enumerate() {
                let t = k as f64 / 1000.0;
                assert!((*p - u.point() * t).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_driver_gives_straight_line() {
        let real = c2_from_driver(16.0, 5.0, vec![0.0; 101], UnitVec2::E1).unwrap();
        assert!(real.angle_track.iter().all(|&p| p == 0.0));
        assert!((real.path.end() - Point2::new(1.0, 0.0)).norm() < 1e-12);
        let curv = limit_curvature_series(&real).unwrap();
        assert!(curv.iter().all(|&(_, c)| c == 0.0));
    }

    #[test]
    fn endpoint_inside_unit_disc_and_unit_speed() {
        let m = 10_000;
        for r in 0..20 {
            let mut src = derive_stream(Seed(3), r);
            let c1 = simulate_c1(1.0, derived_drift_coeff(1.0), m, &mut src).unwrap();
            assert!(c1.path.end().norm() <= 1.0 + 1e-9);
            assert!(max_speed_deviation(&c1.path) < 1e-2);
            assert!(max_speed_deviation(&c1.path) < 10.0 / m as f64);
            let c2 = simulate_c2(16.0, derived_drift_coeff(16.0), m, &mut src).unwrap();
            assert!(c2.path.end().norm() <= 1.0 + 1e-9);
            assert!(max_speed_deviation(&c2.path) < 10.0 / m as f64);
        }
    }

    #[test]
    fn c2_second_differences_are_bounded_by_driver() {
        let m = 10_000;
        let h = 1.0 / m as f64;
        for r in 0..10 {
            let c = 3.0;
            let real = simulate_c2(27.0, c, m, &mut derive_stream(Seed(4), r)).unwrap();
            let max_b = real.driver_track.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let bound = c * max_b * h * h * 1.1;
            let v = real.path.vertices();
            for w in v.windows(3) {
                let d2 = w[2] - w[1] * 2.0 + w[0];
                assert!(d2.norm() <= bound);
            }
        }
    }

    #[test]
    fn curvature_series_requires_c2() {
        let real = simulate_c1(1.0, 1.0, 10, &mut derive_stream(Seed(5), 0)).unwrap();
        assert!(matches!(limit_curvature_series(&real), Err(Error::WrongKind { .. })));
        let drift0 = simulate_c2(4.0, 0.0, 10, &mut derive_stream(Seed(5), 0)).unwrap();
        assert!(limit_curvature_series(&drift0).unwrap().iter().all(|&(_, c)| c == 0.0));
    }

    #[test]
    fn mean_terminal_curvature() {
        let c = 2.0;
        let reps = 10_000;
        let vals: Vec<f64> = (0..reps)
            .map(|r| {
                let real = simulate_c2(12.0, c, 200, &mut derive_stream(Seed(6), r)).unwrap();
                limit_curvature_series(&real).unwrap()[200].1
            })
            .collect();
        let mean = aggregate(&vals).unwrap().mean;
        let expect = c * (2.0 / PI).sqrt();
        assert!((mean / expect - 1.0).abs() < 0.03, "{mean} vs {expect}");
    }

    #[test]
    fn resampling_keeps_nodes() {
        let v = vec![0.0, 1.0, -1.0];
        let r = resample_linear(&v, 4);
        assert_eq!(r, vec![0.0, 0.5, 1.0, 0.0, -1.0]);
        assert_eq!(resample_linear(&v, 2), v);
    }

    #[test]
    fn trapezoid_order_two_with_fixed_driver() {
        // a piecewise-linear driver is integrated exactly, so only the outer
        // quadrature contributes and the error shrinks by 4 per halving
        let mut src = derive_stream(Seed(7), 0);
        let u = src.uniform_circle();
        let coarse = brownian_driver(1000, &mut src);
        let end = |m: usize| {
            c2_from_driver(12.0, 2.0, resample_linear(&coarse, m), u).unwrap().path.end()
        };
        let reference = end(100_000);
        let e1 = (end(1000) - reference).norm();
        let e2 = (end(2000) - reference).norm();
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}
