//! Randomized greedy disk packing of convex regions: sample a uniform
//! point, and if it is uncovered place the largest disk centered there
//! that stays inside the region and off every placed disk.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`, so a
//! `(region, seed)` pair reproduces the same run on every platform.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Circle;
use crate::math::{fabs, sqrt, CompensatedSum, Vec2, PI};
use crate::spatial::CircleGrid;

/// Consecutive rejections after which a run is declared stalled.
pub const STALL_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvexRegion {
    /// `[0, side]²`
    Square { side: f64 },
    /// Centered at the origin.
    Disk { radius: f64 },
    /// Centered at the origin, semi-axes along x and y.
    Ellipse { a: f64, b: f64 },
}

impl ConvexRegion {
    pub fn exact_area(&self) -> f64 {
        match *self {
            ConvexRegion::Square { side } => side * side,
            ConvexRegion::Disk { radius } => PI * radius * radius,
            ConvexRegion::Ellipse { a, b } => PI * a * b,
        }
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        match *self {
            ConvexRegion::Square { side } => (Vec2::new(0.0, 0.0), Vec2::new(side, side)),
            ConvexRegion::Disk { radius } => (Vec2::new(-radius, -radius), Vec2::new(radius, radius)),
            ConvexRegion::Ellipse { a, b } => (Vec2::new(-a, -b), Vec2::new(a, b)),
        }
    }

    /// Distance to the boundary, positive inside and negative outside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match *self {
            ConvexRegion::Square { side } => {
                let inside = p.x.min(side - p.x).min(p.y).min(side - p.y);
                if inside >= 0.0 {
                    inside
                } else {
                    let dx = (-p.x).max(p.x - side).max(0.0);
                    let dy = (-p.y).max(p.y - side).max(0.0);
                    -sqrt(dx * dx + dy * dy)
                }
            }
            ConvexRegion::Disk { radius } => radius - p.norm(),
            ConvexRegion::Ellipse { a, b } => {
                let inside = (p.x / a) * (p.x / a) + (p.y / b) * (p.y / b) <= 1.0;
                let d = ellipse_distance(a, b, fabs(p.x), fabs(p.y));
                if inside {
                    d
                } else {
                    -d
                }
            }
        }
    }
}

/// Distance from `(y0, y1)` in the first quadrant to the ellipse
/// `(x/a)² + (y/b)² = 1`, by bisection on the Lagrange multiplier.
fn ellipse_distance(a: f64, b: f64, y0: f64, y1: f64) -> f64 {
    if a < b {
        return ellipse_distance(b, a, y1, y0);
    }
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / a;
            let z1 = y1 / b;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (a / b) * (a / b);
            let s = multiplier_root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            sqrt((x0 - y0) * (x0 - y0) + (x1 - y1) * (x1 - y1))
        } else {
            fabs(y1 - b)
        }
    } else {
        let numer = a * y0;
        let denom = a * a - b * b;
        if numer < denom {
            let t = numer / denom;
            let x0 = a * t;
            let x1 = b * sqrt(1.0 - t * t);
            sqrt((x0 - y0) * (x0 - y0) + x1 * x1)
        } else {
            fabs(y0 - a)
        }
    }
}

fn multiplier_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { sqrt(n0 * n0 + z1 * z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if g > 0.0 {
            s0 = s;
        } else if g < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Accepted(Circle),
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyRow {
    pub n: usize,
    pub residual: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GreedyError {
    InvalidTarget,
    Stall { rejections: u64, partial: Vec<GreedyRow> },
}

impl core::error::Error for GreedyError {}

impl fmt::Display for GreedyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GreedyError::InvalidTarget => write!(f, "target count must be at least 1"),
            GreedyError::Stall { rejections, partial } => write!(
                f,
                "stalled after {rejections} consecutive rejections with {} disks placed",
                partial.len()
            ),
        }
    }
}

pub struct GreedyState {
    region: ConvexRegion,
    seed: u64,
    rng: ChaCha8Rng,
    grid: CircleGrid,
    radii: Vec<f64>,
    next_rebuild: usize,
    pub attempts: u64,
    pub accepted: u64,
    packed: CompensatedSum,
}

impl GreedyState {
    pub fn new(region: ConvexRegion, seed: u64) -> GreedyState {
        let (lo, hi) = region.bounding_box();
        GreedyState {
            region,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            grid: CircleGrid::new(lo, hi, (hi.x - lo.x).max(hi.y - lo.y) / 8.0),
            radii: Vec::new(),
            next_rebuild: 64,
            attempts: 0,
            accepted: 0,
            packed: CompensatedSum::new(),
        }
    }

    pub fn region(&self) -> &ConvexRegion {
        &self.region
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn placed(&self) -> &[Circle] {
        self.grid.circles()
    }

    pub fn residual(&self) -> f64 {
        self.region.exact_area() - self.packed.value()
    }

    /// One sample-and-place step.
    pub fn step(&mut self) -> Step {
        let (lo, hi) = self.region.bounding_box();
        let p = Vec2::new(self.rng.gen_range(lo.x..hi.x), self.rng.gen_range(lo.y..hi.y));
        self.place_at(p)
    }

    /// Places the largest disk centered at `p`, if `p` is uncovered.
    pub fn place_at(&mut self, p: Vec2) -> Step {
        self.attempts += 1;
        let boundary = self.region.signed_distance(p);
        if boundary <= 0.0 {
            return Step::Rejected;
        }
        let radius = self.grid.min_surface_distance(p, boundary);
        if radius <= 0.0 {
            return Step::Rejected;
        }
        let circle = Circle::new(p, radius).expect("positive radius");
        self.grid.insert(circle);
        self.radii.push(radius);
        self.accepted += 1;
        self.packed.add(circle.area());
        if self.radii.len() >= self.next_rebuild {
            self.rebuild_index();
        }
        Step::Accepted(circle)
    }

    /// Re-grids with cells twice the current median radius.
    fn rebuild_index(&mut self) {
        self.next_rebuild *= 2;
        let mut radii = self.radii.clone();
        let mid = radii.len() / 2;
        let (_, median, _) = radii.select_nth_unstable_by(mid, f64::total_cmp);
        let (lo, hi) = self.region.bounding_box();
        let mut grid = CircleGrid::new(lo, hi, 2.0 * *median);
        for c in self.grid.circles() {
            grid.insert(*c);
        }
        self.grid = grid;
    }
}

/// Runs until `target` disks are placed, recording the residual area
/// after every acceptance.
pub fn greedy_run(region: ConvexRegion, target: usize, seed: u64) -> Result<Vec<GreedyRow>, GreedyError> {
    if target == 0 {
        return Err(GreedyError::InvalidTarget);
    }
    let mut state = GreedyState::new(region, seed);
    let mut series = Vec::with_capacity(target);
    let mut rejections = 0u64;
    while series.len() < target {
        match state.step() {
            Step::Accepted(c) => {
                rejections = 0;
                series.push(GreedyRow { n: series.len() + 1, residual: state.residual(), radius: c.radius });
            }
            Step::Rejected => {
                rejections += 1;
                if rejections >= STALL_LIMIT {
                    return Err(GreedyError::Stall { rejections, partial: series });
                }
            }
        }
    }
    debug_assert_eq!(state.grid.len(), target);
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn step_examples() {
        let mut s = GreedyState::new(ConvexRegion::Disk { radius: 1.0 }, 1);
        let Step::Accepted(c) = s.place_at(Vec2::new(0.0, 0.0)) else { panic!() };
        assert_eq!(c.radius, 1.0);
        assert_eq!(s.residual(), 0.0);
        assert_eq!(s.place_at(Vec2::new(0.3, -0.2)), Step::Rejected);

        let mut s = GreedyState::new(ConvexRegion::Square { side: 1.0 }, 1);
        s.place_at(Vec2::new(0.75, 0.5));
        let Step::Accepted(c) = s.place_at(Vec2::new(0.25, 0.5)) else { panic!() };
        assert_eq!(c.radius, 0.25);
        assert_eq!(s.place_at(Vec2::new(1.5, 0.5)), Step::Rejected);
    }

    #[test]
    fn ellipse_distance_matches_sampling() {
        let region = ConvexRegion::Ellipse { a: 2.0, b: 1.0 };
        for p in [Vec2::new(0.3, 0.2), Vec2::new(-1.5, 0.1), Vec2::new(0.0, 0.0), Vec2::new(1.9, -0.05), Vec2::new(0.5, -0.9)] {
            let brute = (0..200_000)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / 200_000.0;
                    p.dist(Vec2::new(2.0 * libm::cos(t), libm::sin(t)))
                })
                .fold(f64::INFINITY, f64::min);
            let d = region.signed_distance(p);
            assert!(d <= brute + 1e-15 && brute - d < 1e-8, "{d} vs {brute}");
        }
        assert!(region.signed_distance(Vec2::new(2.5, 0.0)) < 0.0);
        let circle_like = ConvexRegion::Ellipse { a: 1.0, b: 1.0 };
        assert_relative_eq!(circle_like.signed_distance(Vec2::new(0.3, 0.4)), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn runs_are_deterministic_and_valid() {
        for region in [
            ConvexRegion::Square { side: 1.0 },
            ConvexRegion::Disk { radius: 1.0 },
            ConvexRegion::Ellipse { a: 1.5, b: 0.5 },
        ] {
            let a = greedy_run(region, 400, 42).unwrap();
            let b = greedy_run(region, 400, 42).unwrap();
            assert_eq!(a, b);
            assert!(a.windows(2).all(|w| w[1].residual < w[0].residual));
            assert!(a.last().unwrap().residual > 0.0);
            let mut s = GreedyState::new(region, 42);
            while s.accepted < 400 {
                s.step();
            }
            let placed = s.placed();
            for (i, c) in placed.iter().enumerate() {
                assert!(region.signed_distance(c.center) >= c.radius * (1.0 - 1e-12));
                for d in &placed[i + 1..] {
                    assert!(c.center.dist(d.center) >= (c.radius + d.radius) * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn zero_target_rejected() {
        assert_eq!(greedy_run(ConvexRegion::Square { side: 1.0 }, 0, 1), Err(GreedyError::InvalidTarget));
    }
}
