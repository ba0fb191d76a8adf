//! Small numeric helpers usable without `std`.

use core::ops::{Add, Mul, Neg, Sub};

pub use libm::{atan, cos, exp, fabs, log, log2, pow, sin, sqrt};

pub const PI: f64 = core::f64::consts::PI;
pub const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// A point or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        sqrt(self.norm_sq())
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

/// Minimal complex arithmetic on `Vec2` (`x + iy`).
impl Vec2 {
    pub fn cmul(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x * o.x - self.y * o.y, self.x * o.y + self.y * o.x)
    }

    /// One square root of `x + iy` (the other is its negation).
    pub fn csqrt(self) -> Vec2 {
        let m = sqrt(self.norm_sq());
        if m == 0.0 {
            return Vec2::new(0.0, 0.0);
        }
        if self.x >= 0.0 {
            let t = sqrt(0.5 * (m + self.x));
            Vec2::new(t, self.y / (2.0 * t))
        } else {
            let t = sqrt(0.5 * (m - self.x));
            Vec2::new(fabs(self.y) / (2.0 * t), if self.y < 0.0 { -t } else { t })
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        CompensatedSum { sum: 0.0, carry: 0.0 }
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if fabs(self.sum) >= fabs(v) {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}
