//! The three angle-constrained walk constructions and their piecewise-linear
//! interpolation.
//!
//! A walk of `n` unit steps starts from a uniform direction `U₁` and turns
//! step `j ≥ 2` by `Θ_j`, so `U_j = e^{iΘ_j}·U_{j−1}`. The path
//! `X(t) = Σ_{j≤⌊nt⌋} U_j + (nt − ⌊nt⌋)·U_{⌊nt⌋+1}` is stored through its
//! `n + 1` vertices.
//!
//! Draw order is fixed: the initial direction first, then `Θ₂, …, Θ_n` in
//! index order. [`simulate_walk`] and the allocation-free [`walk_endpoint`]
//! consume a stream identically, so they agree bit-for-bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{Point2, UnitVec2, ORIGIN};
use crate::sampling::{check_half_width, RandomSource};

/// Steps are renormalized to unit length at every multiple of this index.
pub const RENORM_PERIOD: usize = 1024;

/// Angle law of a walk.
///
/// The shrinking and Markov variants use the half-width
/// `α_n = coeff · n^(−exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// `Θ_j` iid uniform on `[−α, α]`.
    IidConstant { alpha: f64 },
    /// `Θ_j` iid uniform on `[−α_n, α_n]`.
    IidShrinking { coeff: f64, exponent: f64 },
    /// `Θ₂` uniform on `[−α_n, α_n]`, then `Θ_{j+1} = Θ_j + δ_{j+1}` with iid
    /// increments uniform on `[−α_n, α_n]`.
    MarkovIncrements { coeff: f64, exponent: f64 },
}

impl Construction {
    /// Short tag used in file headers and on the command line.
    pub fn tag(&self) -> &'static str {
        match self {
            Construction::IidConstant { .. } => "iid",
            Construction::IidShrinking { .. } => "iid-shrinking",
            Construction::MarkovIncrements { .. } => "markov",
        }
    }

    pub fn is_markov(&self) -> bool {
        matches!(self, Construction::MarkovIncrements { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    pub construction: Construction,
    pub n: usize,
}

impl WalkSpec {
    pub fn new(construction: Construction, n: usize) -> Result<Self> {
        let spec = Self { construction, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn iid(alpha: f64, n: usize) -> Result<Self> {
        Self::new(Construction::IidConstant { alpha }, n)
    }

    pub fn shrinking(coeff: f64, exponent: f64, n: usize) -> Result<Self> {
        Self::new(Construction::IidShrinking { coeff, exponent }, n)
    }

    pub fn markov(coeff: f64, exponent: f64, n: usize) -> Result<Self> {
        Self::new(Construction::MarkovIncrements { coeff, exponent }, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidWalkSpec("n must be at least 1".into()));
        }
        if let Construction::IidShrinking { coeff, exponent }
        | Construction::MarkovIncrements { coeff, exponent } = self.construction
        {
            if !coeff.is_finite() || !exponent.is_finite() {
                return Err(Error::InvalidWalkSpec(
                    "coeff and exponent must be finite".into(),
                ));
            }
        }
        let alpha = self.raw_alpha_n();
        check_half_width(alpha).map_err(|_| {
            Error::InvalidWalkSpec(format!(
                "angle half-width {alpha} for n = {} is outside (0, π]",
                self.n
            ))
        })?;
        Ok(())
    }

    fn raw_alpha_n(&self) -> f64 {
        match self.construction {
            Construction::IidConstant { alpha } => alpha,
            Construction::IidShrinking { coeff, exponent }
            | Construction::MarkovIncrements { coeff, exponent } => {
                coeff * (self.n as f64).powf(-exponent)
            }
        }
    }

    /// The half-width actually used at this `n`.
    pub fn alpha_n(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.raw_alpha_n())
    }

    /// `n·α_n²` for iid laws, `n³·α_n²` for the Markov law.
    pub fn kappa(&self) -> f64 {
        let a = self.raw_alpha_n();
        let n = self.n as f64;
        if self.construction.is_markov() {
            n * n * n * a * a
        } else {
            n * a * a
        }
    }
}

/// Turning angles `Θ₂, …, Θ_n` of one walk.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSeq {
    angles: Vec<f64>,
    alpha_n: f64,
}

impl AngleSeq {
    pub fn new(angles: Vec<f64>, alpha_n: f64) -> Self {
        Self { angles, alpha_n }
    }

    /// Markov angles from a first angle and the increments `δ₃, …, δ_n`.
    pub fn from_markov_increments(first: f64, increments: &[f64], alpha_n: f64) -> Self {
        let mut angles = Vec::with_capacity(increments.len() + 1);
        let mut theta = first;
        angles.push(theta);
        for &d in increments {
            theta += d;
            angles.push(theta);
        }
        Self { angles, alpha_n }
    }

    /// Angles in index order, `as_slice()[0] = Θ₂`.
    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    /// `Θ_j` for `2 ≤ j ≤ n`.
    pub fn theta(&self, j: usize) -> Option<f64> {
        j.checked_sub(2).and_then(|i| self.angles.get(i).copied())
    }

    pub fn alpha_n(&self) -> f64 {
        self.alpha_n
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Steps `U₁, …, U_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSeq {
    steps: Vec<UnitVec2>,
}

impl StepSeq {
    pub fn as_slice(&self) -> &[UnitVec2] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Sequential generator of `Θ₂, Θ₃, …` for one construction.
#[derive(Debug, Clone, Copy)]
struct AngleStream {
    alpha_n: f64,
    markov: bool,
    current: Option<f64>,
}

impl AngleStream {
    fn new(spec: &WalkSpec) -> Result<Self> {
        Ok(Self {
            alpha_n: spec.alpha_n()?,
            markov: spec.construction.is_markov(),
            current: None,
        })
    }

    #[inline]
    fn next(&mut self, src: &mut RandomSource) -> f64 {
        let draw = src.symmetric_raw(self.alpha_n);
        if !self.markov {
            return draw;
        }
        let theta = match self.current {
            Some(prev) => prev + draw,
            None => draw,
        };
        self.current = Some(theta);
        theta
    }
}

/// Heading update `U_j = e^{iΘ_j} U_{j−1}` with periodic renormalization.
#[derive(Debug, Clone, Copy)]
struct Heading {
    u: UnitVec2,
    index: usize,
}

impl Heading {
    fn new(u1: UnitVec2) -> Self {
        Self { u: u1, index: 1 }
    }

    #[inline]
    fn turn(&mut self, theta: f64) -> UnitVec2 {
        self.index += 1;
        let mut u = self.u.rotated(theta);
        if self.index.is_multiple_of(RENORM_PERIOD) {
            u = u.renormalized();
        }
        self.u = u;
        u
    }
}

/// Draw `Θ₂, …, Θ_n` for `spec`.
pub fn gen_angles(spec: &WalkSpec, src: &mut RandomSource) -> Result<AngleSeq> {
    let mut stream = AngleStream::new(spec)?;
    let angles = (1..spec.n).map(|_| stream.next(src)).collect();
    Ok(AngleSeq::new(angles, stream.alpha_n))
}

/// Turn the angle sequence into unit steps starting from `u1`.
pub fn angles_to_steps(angles: &AngleSeq, u1: UnitVec2) -> StepSeq {
    let mut heading = Heading::new(u1);
    let mut steps = Vec::with_capacity(angles.len() + 1);
    steps.push(u1);
    steps.extend(angles.as_slice().iter().map(|&theta| heading.turn(theta)));
    StepSeq { steps }
}

/// Scaling applied by [`rescale`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleMode {
    #[default]
    None,
    /// Multiply by `1/n`.
    ByN,
    /// Multiply by `1/√n`.
    BySqrtN,
    /// Multiply by `α_n/√n`.
    ByAlphaSqrtN { alpha_n: f64 },
}

impl RescaleMode {
    pub fn factor(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            RescaleMode::None => 1.0,
            RescaleMode::ByN => 1.0 / n,
            RescaleMode::BySqrtN => 1.0 / n.sqrt(),
            RescaleMode::ByAlphaSqrtN { alpha_n } => alpha_n / n.sqrt(),
        }
    }
}

/// A polygonal path on the uniform time grid `t_k = k/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point2>,
    scale: f64,
}

impl Polyline {
    /// At least two vertices; the first one need not be the origin.
    pub fn from_vertices(vertices: Vec<Point2>, scale: f64) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Degenerate(
                "a polyline needs at least two vertices".into(),
            ));
        }
        Ok(Self { vertices, scale })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Number of segments.
    pub fn n(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Accumulated scale factor applied to every coordinate.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn start(&self) -> Point2 {
        self.vertices[0]
    }

    pub fn end(&self) -> Point2 {
        self.vertices[self.n()]
    }

    /// Grid time of vertex `k`.
    pub fn time_of(&self, k: usize) -> f64 {
        k as f64 / self.n() as f64
    }

    /// Linear interpolation between grid vertices.
    pub fn eval_at(&self, t: f64) -> Result<Point2> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TimeOutOfRange(t));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> Point2 {
        let n = self.n();
        let pos = t * n as f64;
        let k = (pos.floor() as usize).min(n);
        if k == n {
            return self.vertices[n];
        }
        let frac = pos - k as f64;
        let a = self.vertices[k];
        let b = self.vertices[k + 1];
        a + (b - a) * frac
    }
}

/// Cumulative sums of the steps, starting at the origin.
pub fn build_path(steps: &StepSeq) -> Polyline {
    let mut vertices = Vec::with_capacity(steps.len() + 1);
    let mut p = ORIGIN;
    vertices.push(p);
    for &u in steps.as_slice() {
        p += u.point();
        vertices.push(p);
    }
    Polyline {
        vertices,
        scale: 1.0,
    }
}

/// Multiply every coordinate by the factor of `mode`; scales compose.
pub fn rescale(path: &Polyline, mode: RescaleMode) -> Polyline {
    let f = mode.factor(path.n());
    Polyline {
        vertices: path.vertices.iter().map(|&p| p * f).collect(),
        scale: path.scale * f,
    }
}

/// One complete walk realization.
#[derive(Debug, Clone)]
pub struct Walk {
    pub spec: WalkSpec,
    pub u1: UnitVec2,
    pub angles: AngleSeq,
    pub steps: StepSeq,
    pub path: Polyline,
}

/// Draw `U₁`, then the angles, then assemble steps and path.
pub fn simulate_walk(spec: &WalkSpec, src: &mut RandomSource) -> Result<Walk> {
    spec.validate()?;
    let u1 = src.uniform_circle();
    let angles = gen_angles(spec, src)?;
    let steps = angles_to_steps(&angles, u1);
    let path = build_path(&steps);
    Ok(Walk {
        spec: *spec,
        u1,
        angles,
        steps,
        path,
    })
}

/// Unscaled endpoint `X(1)` and the first step, without storing the path.
pub fn walk_endpoint(spec: &WalkSpec, src: &mut RandomSource) -> Result<(Point2, UnitVec2)> {
    spec.validate()?;
    let u1 = src.uniform_circle();
    let mut stream = AngleStream::new(spec)?;
    let mut heading = Heading::new(u1);
    let mut p = u1.point();
    for _ in 1..spec.n {
        let theta = stream.next(src);
        p += heading.turn(theta).point();
    }
    Ok((p, u1))
}
