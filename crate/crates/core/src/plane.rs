//! Planar points and unit vectors.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `x² + y² = 1` accepted by [`UnitVec2::new`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Rotate counter-clockwise by `theta` radians.
    pub fn rotated(self, theta: f64) -> Point2 {
        let (s, c) = theta.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// A direction in the plane, stored as a point on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Point2", into = "Point2")]
pub struct UnitVec2 {
    x: f64,
    y: f64,
}

impl UnitVec2 {
    pub const E1: UnitVec2 = UnitVec2 { x: 1.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        let v = Self { x, y };
        if (v.norm_sq() - 1.0).abs() > UNIT_NORM_TOL || !x.is_finite() || !y.is_finite() {
            return Err(Error::NonUnitVector { x, y });
        }
        Ok(v)
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { x: c, y: s }
    }

    pub fn x(self) -> f64 {
        self.x
    }

    pub fn y(self) -> f64 {
        self.y
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn point(self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// Complex product `e^{iθ}·self`.
    #[inline]
    pub fn rotated(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    /// Project back onto the circle, removing accumulated rounding drift.
    pub fn renormalized(self) -> Self {
        let r = self.x.hypot(self.y);
        Self {
            x: self.x / r,
            y: self.y / r,
        }
    }

    pub fn dot(self, other: UnitVec2) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl From<UnitVec2> for Point2 {
    fn from(u: UnitVec2) -> Point2 {
        u.point()
    }
}

impl TryFrom<Point2> for UnitVec2 {
    type Error = Error;
    fn try_from(p: Point2) -> Result<Self> {
        UnitVec2::new(p.x, p.y)
    }
}
