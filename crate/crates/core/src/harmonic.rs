//! Closed-form harmonic test functions and sup-norm estimates.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::domain::DiskCoveredDomain;
use crate::math::{cos, exp, fabs, log, pow, sin, Vec2, PI};

#[derive(Debug, Clone, PartialEq)]
pub enum HarmonicFn {
    Constant(f64),
    /// `Re (z - origin)^degree`
    PolyRe { degree: u32, origin: Vec2 },
    /// `Im (z - origin)^degree`
    PolyIm { degree: u32, origin: Vec2 },
    /// `log |z - pole|`; the pole must lie outside the domain.
    LogPole { pole: Vec2 },
    /// `e^x cos y`
    ExpCos,
    Combination(Vec<(f64, HarmonicFn)>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HarmonicError {
    PoleInDomain { pole: Vec2 },
}

impl core::error::Error for HarmonicError {}

impl fmt::Display for HarmonicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarmonicError::PoleInDomain { pole } => {
                write!(f, "log pole ({}, {}) lies in the closed domain", pole.x, pole.y)
            }
        }
    }
}

fn complex_power(z: Vec2, m: u32) -> Vec2 {
    let mut acc = Vec2::new(1.0, 0.0);
    for _ in 0..m {
        acc = Vec2::new(acc.x * z.x - acc.y * z.y, acc.x * z.y + acc.y * z.x);
    }
    acc
}

impl HarmonicFn {
    pub fn scaled(self, factor: f64) -> HarmonicFn {
        HarmonicFn::Combination(alloc::vec![(factor, self)])
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        match self {
            HarmonicFn::Constant(c) => *c,
            HarmonicFn::PolyRe { degree, origin } => complex_power(p - *origin, *degree).x,
            HarmonicFn::PolyIm { degree, origin } => complex_power(p - *origin, *degree).y,
            HarmonicFn::LogPole { pole } => log(p.dist(*pole)),
            HarmonicFn::ExpCos => exp(p.x) * cos(p.y),
            HarmonicFn::Combination(terms) => terms.iter().map(|(w, f)| w * f.eval(p)).sum(),
        }
    }

    /// Rejects functions that are singular on the closed domain.
    pub fn check_admissible(&self, domain: &DiskCoveredDomain) -> Result<(), HarmonicError> {
        match self {
            HarmonicFn::LogPole { pole } => {
                let touches_disk =
                    domain.base_disks().iter().any(|c| c.center.dist(*pole) <= c.radius);
                if touches_disk || domain.contains(*pole) {
                    Err(HarmonicError::PoleInDomain { pole: *pole })
                } else {
                    Ok(())
                }
            }
            HarmonicFn::Combination(terms) => {
                terms.iter().try_for_each(|(_, f)| f.check_admissible(domain))
            }
            _ => Ok(()),
        }
    }

    /// Upper bound for `|u|` on the disk `B(center, radius)`.
    fn disk_bound(&self, center: Vec2, radius: f64) -> f64 {
        match self {
            HarmonicFn::Constant(c) => fabs(*c),
            HarmonicFn::PolyRe { degree, origin } | HarmonicFn::PolyIm { degree, origin } => {
                pow(center.dist(*origin) + radius, *degree as f64)
            }
            HarmonicFn::LogPole { pole } => {
                let d = center.dist(*pole);
                if d <= radius {
                    return f64::INFINITY;
                }
                fabs(log(d - radius)).max(fabs(log(d + radius)))
            }
            HarmonicFn::ExpCos => exp(center.x + radius),
            HarmonicFn::Combination(terms) => {
                terms.iter().map(|(w, f)| fabs(*w) * f.disk_bound(center, radius)).sum()
            }
        }
    }

    /// Rigorous bound for `‖u‖_{L∞(Ω)}`.
    ///
    /// The boundary of Ω lies on the base circles and the base disks lie in
    /// Ω, so by the maximum principle the sup over Ω is the sup over the
    /// base disks; each kind is bounded in closed form per disk.
    pub fn supnorm_bound(&self, domain: &DiskCoveredDomain) -> f64 {
        domain
            .base_disks()
            .iter()
            .map(|c| self.disk_bound(c.center, c.radius))
            .fold(0.0, f64::max)
    }

    /// Sampled sup-norm: `max |u|` over `samples` points on every base
    /// circle, times `inflation`.
    pub fn supnorm_estimate(&self, domain: &DiskCoveredDomain, samples: usize, inflation: f64) -> f64 {
        let mut best = 0.0f64;
        for c in domain.base_disks() {
            for s in 0..samples {
                let t = 2.0 * PI * s as f64 / samples as f64;
                let p = c.center + Vec2::new(cos(t), sin(t)) * c.radius;
                best = best.max(fabs(self.eval(p)));
            }
        }
        best * inflation
    }

    /// Largest scaled five-point Laplacian `|Δ_h u| / (1 + |u|)` over
    /// `points` random points of Ω.
    pub fn harmonicity_witness<R: Rng>(
        &self,
        domain: &DiskCoveredDomain,
        points: usize,
        h: f64,
        rng: &mut R,
    ) -> f64 {
        let (lo, hi) = domain.bounding_box();
        let mut worst = 0.0f64;
        let mut found = 0;
        while found < points {
            let p = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if !domain.contains(p) {
                continue;
            }
            found += 1;
            let u = self.eval(p);
            let lap = (self.eval(p + Vec2::new(h, 0.0))
                + self.eval(p - Vec2::new(h, 0.0))
                + self.eval(p + Vec2::new(0.0, h))
                + self.eval(p - Vec2::new(0.0, h))
                - 4.0 * u)
                / (h * h);
            worst = worst.max(fabs(lap) / (1.0 + fabs(u)));
        }
        worst
    }

    /// Flattened evaluator for many functions at one point.
    pub fn evaluator(fns: &[HarmonicFn]) -> impl Fn(Vec2, &mut [f64]) + Sync + '_ {
        move |p: Vec2, out: &mut [f64]| {
            for (slot, f) in out.iter_mut().zip(fns) {
                *slot = f.eval(p);
            }
        }
    }
}
