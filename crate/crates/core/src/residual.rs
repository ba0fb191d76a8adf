//! Monte-Carlo measurement of the uncovered set `Ω \ ∪ E_i`.
//!
//! The disks of a packing prefix are disjoint subsets of Ω, so
//! `χ_Ω - Σ χ_{E_i}` is the indicator of the uncovered set and its `L^p`
//! norm is `residual^(1/p)`. Sampling the indicator checks that identity
//! against the exact area bookkeeping.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::DiskCoveredDomain;
use crate::geometry::Circle;
use crate::math::{pow, sqrt, Vec2};
use crate::spatial::CircleGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaEstimate {
    pub area: f64,
    pub standard_error: f64,
    pub hits: u64,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpEstimate {
    pub p: f64,
    pub measured: f64,
    pub standard_error: f64,
}

/// Samples `samples` uniform points in the domain's bounding box and
/// counts those in Ω but in none of `disks`.
pub fn uncovered_area(
    domain: &DiskCoveredDomain,
    disks: &[Circle],
    samples: u64,
    seed: u64,
) -> AreaEstimate {
    let (lo, hi) = domain.bounding_box();
    let box_area = (hi.x - lo.x) * (hi.y - lo.y);
    let cell = sqrt(box_area / disks.len().max(1) as f64);
    let mut grid = CircleGrid::new(lo, hi, cell);
    for c in disks {
        grid.insert(*c);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let p = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if domain.contains(p) && !grid.any_contains(p) {
            hits += 1;
        }
    }
    let n = samples as f64;
    let frac = hits as f64 / n;
    AreaEstimate {
        area: box_area * frac,
        standard_error: box_area * sqrt(frac * (1.0 - frac) / n),
        hits,
        samples,
    }
}

impl AreaEstimate {
    /// `L^p` norm of the indicator, with a delta-method standard error.
    pub fn lp_norm(&self, p: f64) -> LpEstimate {
        let measured = pow(self.area, 1.0 / p);
        let standard_error = if self.area > 0.0 {
            pow(self.area, 1.0 / p - 1.0) * self.standard_error / p
        } else {
            0.0
        };
        LpEstimate { p, measured, standard_error }
    }
}

/// Exact-bookkeeping counterpart: `residual^(1/p)` for each `p`.
pub fn exact_lp_norms(residual: f64, ps: &[f64]) -> Vec<f64> {
    ps.iter().map(|&p| pow(residual, 1.0 / p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_three_tangent;

    #[test]
    fn empty_prefix_measures_the_domain() {
        let d = build_three_tangent(1.0, 1.0, 1.0).unwrap();
        let est = uncovered_area(&d, &[], 200_000, 3);
        assert!((est.area - d.exact_area()).abs() <= 4.0 * est.standard_error);
        let l2 = est.lp_norm(2.0);
        assert!((l2.measured - d.exact_area().sqrt()).abs() <= 4.0 * l2.standard_error);
    }

    #[test]
    fn base_disks_leave_the_gap() {
        let d = build_three_tangent(1.0, 1.0, 1.0).unwrap();
        let est = uncovered_area(&d, d.base_disks(), 400_000, 9);
        let gap = 3f64.sqrt() - core::f64::consts::PI / 2.0;
        assert!((est.area - gap).abs() <= 4.0 * est.standard_error);
    }
}
