//! Reproducible random streams.
//!
//! Every random quantity in the crate is drawn from a [`RandomSource`]
//! obtained through [`derive_stream`]. A source is a ChaCha8 generator whose
//! key is expanded from the master seed and whose stream counter is the
//! caller-chosen `stream_id`, so any `(seed, stream_id)` pair names one fixed
//! sequence no matter how many other streams exist or in which order they are
//! created. Parallel work therefore never shares a generator: it derives one
//! stream per replicate.
//!
//! Uniform doubles are built from the top 53 bits of each `u64`, and normal
//! deviates use the Box–Muller transform on those uniforms. Neither depends on
//! `rand`'s distribution layer, so the bit patterns stay fixed across
//! dependency upgrades.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::plane::UnitVec2;

/// Master seed. Any value is valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Accepts decimal (`1234`) or `0x`-prefixed hexadecimal (`0x4d2`).
    pub fn parse(text: &str) -> Result<Seed> {
        let t = text.trim();
        let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => t.parse::<u64>(),
        };
        parsed.map(Seed).map_err(|_| Error::InvalidSeed(text.to_string()))
    }

    /// A new master seed for an independent sub-experiment labelled `tag`.
    pub fn child(self, tag: u64) -> Seed {
        Seed(mix64(mix64(self.0 ^ 0x6a09_e667_f3bc_c908).wrapping_add(tag)))
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Seed {
    type Err = Error;
    fn from_str(s: &str) -> Result<Seed> {
        Seed::parse(s)
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// An angle in radians. Finite, otherwise unrestricted.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const PI: Angle = Angle(PI);

    pub fn new(radians: f64) -> Result<Angle> {
        if !radians.is_finite() {
            return Err(Error::AngleOutOfRange {
                value: radians,
                expected: "the finite reals",
            });
        }
        Ok(Angle(radians))
    }

    pub fn from_degrees(deg: f64) -> Result<Angle> {
        Angle::new(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Reduce modulo 2π into `[0, 2π)`.
    pub fn wrapped(self) -> f64 {
        wrap_to_circle(self.0)
    }

    /// Checks the half-width range `(0, π]` used by every angle law.
    pub fn check_half_width(self) -> Result<Angle> {
        check_half_width(self.0).map(Angle)
    }
}

pub(crate) fn check_half_width(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha <= PI {
        Ok(alpha)
    } else {
        Err(Error::AngleOutOfRange {
            value: alpha,
            expected: "(0, π]",
        })
    }
}

/// Reduce `x` modulo 2π into `[0, 2π)`.
pub fn wrap_to_circle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A single-owner random stream.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    stream_id: u64,
    spare_normal: Option<f64>,
}

/// The stream named by `(master, stream_id)`. Pure.
pub fn derive_stream(master: Seed, stream_id: u64) -> RandomSource {
    let mut key = [0u8; 32];
    let mut state = master.0;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream_id);
    RandomSource {
        rng,
        stream_id,
        spare_normal: None,
    }
}

impl RandomSource {
    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    fn uniform_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-alpha, alpha]`, with `alpha` in `(0, π]`.
    pub fn uniform_symmetric(&mut self, alpha: Angle) -> Result<Angle> {
        let a = check_half_width(alpha.radians())?;
        Ok(Angle(self.symmetric_raw(a)))
    }

    /// Unchecked variant for hot loops; `alpha` must already be validated.
    #[inline]
    pub(crate) fn symmetric_raw(&mut self, alpha: f64) -> f64 {
        alpha * (2.0 * self.uniform01() - 1.0)
    }

    /// Uniform direction on the unit circle.
    pub fn uniform_circle(&mut self) -> UnitVec2 {
        UnitVec2::from_angle(TAU * self.uniform01())
    }

    /// Standard normal deviate (Box–Muller, second value cached).
    pub fn normal_std(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let r = (-2.0 * self.uniform_open_closed().ln()).sqrt();
        let (s, c) = (TAU * self.uniform01()).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{aggregate, ks_two_sample};

    fn draws(src: &mut RandomSource, count: usize) -> Vec<f64> {
        (0..count).map(|_| src.uniform01()).collect()
    }

    #[test]
    fn seed_parsing() {
        assert_eq!(Seed::parse("42").unwrap(), Seed(42));
        assert_eq!(Seed::parse("0x2a").unwrap(), Seed(42));
        assert_eq!(Seed::parse("0XFF").unwrap(), Seed(255));
        assert_eq!(Seed::parse(" 7 ").unwrap(), Seed(7));
        assert!(Seed::parse("-1").is_err());
        assert!(Seed::parse("0xzz").is_err());
        assert!(Seed::parse("").is_err());
    }

    #[test]
    fn same_stream_same_draws() {
        let mut a = derive_stream(Seed(11), 0);
        let mut b = derive_stream(Seed(11), 0);
        let xs: Vec<u64> = (0..1000).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..1000).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn derivation_is_order_free() {
        let direct = draws(&mut derive_stream(Seed(5), 7), 100);
        for id in 0..7 {
            let mut other = derive_stream(Seed(5), id);
            let _ = draws(&mut other, 50);
        }
        let later = draws(&mut derive_stream(Seed(5), 7), 100);
        assert_eq!(direct, later);
    }

    #[test]
    fn distinct_streams_pass_ks() {
        let n = 1_000_000;
        let a = draws(&mut derive_stream(Seed(3), 0), n);
        let b = draws(&mut derive_stream(Seed(3), 1), n);
        assert_ne!(a[..10], b[..10]);
        let ks = ks_two_sample(&a, &b).unwrap();
        assert!(
            ks.statistic < ks.critical_value(0.01),
            "KS statistic {} rejects at 1%",
            ks.statistic
        );
    }

    #[test]
    fn child_seeds_differ() {
        let s = Seed(1);
        assert_ne!(s.child(0), s.child(1));
        assert_ne!(s.child(0), s);
        assert_eq!(s.child(9), s.child(9));
    }

    #[test]
    fn uniform_symmetric_variance() {
        let alpha = Angle::new(PI / 2.0).unwrap();
        let mut src = derive_stream(Seed(1), 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| src.uniform_symmetric(alpha).unwrap().radians())
            .collect();
        let stats = aggregate(&xs).unwrap();
        let var = stats.sd * stats.sd;
        let expected = PI * PI / 12.0;
        assert!((var / expected - 1.0).abs() < 0.01, "var = {var}");
        assert!(xs.iter().all(|x| x.abs() <= PI / 2.0));
        // third moment vanishes by symmetry; check at 3 SE
        let m3: Vec<f64> = xs.iter().map(|x| x.powi(3)).collect();
        let s3 = aggregate(&m3).unwrap();
        assert!(s3.mean.abs() < 3.0 * s3.sd / (n as f64).sqrt());
    }

    #[test]
    fn uniform_symmetric_support() {
        let mut src = derive_stream(Seed(2), 0);
        for alpha in [PI, 1e-6] {
            let a = Angle::new(alpha).unwrap();
            for _ in 0..100_000 {
                let x = src.uniform_symmetric(a).unwrap().radians();
                assert!((-alpha..=alpha).contains(&x));
            }
        }
    }

    #[test]
    fn uniform_symmetric_rejects_bad_alpha() {
        let mut src = derive_stream(Seed(2), 0);
        for bad in [0.0, -0.5, PI + 1e-9, 7.0] {
            let a = Angle::new(bad).unwrap();
            assert!(matches!(
                src.uniform_symmetric(a),
                Err(Error::AngleOutOfRange { .. })
            ));
        }
        assert!(Angle::new(f64::INFINITY).is_err());
    }

    #[test]
    fn circle_draws_are_unit_and_centered() {
        let mut src = derive_stream(Seed(4), 0);
        let n = 1_000_000;
        let (mut sx, mut sy) = (0.0, 0.0);
        let mut hist = [0usize; 64];
        for _ in 0..n {
            let u = src.uniform_circle();
            assert!((u.norm_sq() - 1.0).abs() < 1e-12);
            sx += u.x();
            sy += u.y();
            let bin = (wrap_to_circle(u.y().atan2(u.x())) / TAU * 64.0) as usize;
            hist[bin.min(63)] += 1;
        }
        let mean_norm = (sx / n as f64).hypot(sy / n as f64);
        assert!(mean_norm < 0.005, "mean vector norm {mean_norm}");

        // χ² with 63 degrees of freedom; p = 0.001 critical value is 103.4
        let expected = n as f64 / 64.0;
        let chi2: f64 = hist
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 103.4, "chi2 = {chi2}");
    }

    #[test]
    fn normal_moments_and_pair_independence() {
        let mut src = derive_stream(Seed(8), 0);
        let n = 1_000_000;
        let zs: Vec<f64> = (0..n).map(|_| src.normal_std()).collect();
        let stats = aggregate(&zs).unwrap();
        assert!(stats.mean.abs() < 0.004);
        assert!((stats.sd * stats.sd - 1.0).abs() < 0.01);

        // Box–Muller pairs are the correlated candidates, test them directly
        let (a, b): (Vec<f64>, Vec<f64>) = zs.chunks_exact(2).map(|p| (p[0], p[1])).unzip();
        let sa = aggregate(&a).unwrap();
        let sb = aggregate(&b).unwrap();
        let cov = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - sa.mean) * (y - sb.mean))
            .sum::<f64>()
            / (a.len() as f64 - 1.0);
        let rho = cov / (sa.sd * sb.sd);
        assert!(rho.abs() < 0.005, "rho = {rho}");
    }

    #[test]
    fn normal_is_reproducible() {
        let mut a = derive_stream(Seed(8), 3);
        let mut b = derive_stream(Seed(8), 3);
        for _ in 0..1001 {
            assert_eq!(a.normal_std().to_bits(), b.normal_std().to_bits());
        }
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_to_circle(0.0), 0.0);
        assert!((wrap_to_circle(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((wrap_to_circle(5.0 * PI) - PI).abs() < 1e-12);
        assert!(wrap_to_circle(-1e-300) < TAU);
    }
}
