//! Mean-value cubature rules built from a packing prefix.
//!
//! A rule of size `N` uses the centers of the first `N` disks of the
//! size-ordered sequence as nodes and their areas as weights. For `u`
//! harmonic near Ω the error is `∫_{residual set} u`, so
//! `|error| <= residual_area · ‖u‖_∞`.

use alloc::vec::Vec;
use core::fmt;

use crate::domain::DiskCoveredDomain;
use crate::geometry::{Circle, TangencyTolerance};
use crate::harmonic::HarmonicFn;
use crate::math::{cos, fabs, pow, sin, CompensatedSum, Vec2, PI};
use crate::packing::{
    deep_tally, residual_floor, CurvatureBins, Emission, PackingError, TaskRunner, RADIUS_GUARD,
};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq)]
pub struct CubatureRule {
    nodes: Vec<Vec2>,
    weights: Vec<f64>,
    residual_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CubatureError {
    Range { requested: usize, available: usize },
    Packing(PackingError),
}

impl core::error::Error for CubatureError {}

impl fmt::Display for CubatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CubatureError::Range { requested, available } => write!(
                f,
                "rule size {requested} exceeds the {available} emitted disks"
            ),
            CubatureError::Packing(e) => write!(f, "{e}"),
        }
    }
}

impl From<PackingError> for CubatureError {
    fn from(e: PackingError) -> Self {
        CubatureError::Packing(e)
    }
}

/// How `‖u‖_∞` is obtained for the certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupNorm {
    /// Boundary sampling of every base circle, inflated.
    Sampled { samples: usize, inflation: f64 },
    /// Closed-form per-disk bound ([`HarmonicFn::supnorm_bound`]).
    ClosedForm,
}

impl Default for SupNorm {
    fn default() -> Self {
        SupNorm::Sampled { samples: 256, inflation: 1.05 }
    }
}

impl SupNorm {
    pub fn of(&self, u: &HarmonicFn, domain: &DiskCoveredDomain) -> f64 {
        match *self {
            SupNorm::Sampled { samples, inflation } => u.supnorm_estimate(domain, samples, inflation),
            SupNorm::ClosedForm => u.supnorm_bound(domain),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    pub estimate: f64,
    pub supnorm: f64,
    /// `residual_bound · supnorm`; meaningless when `certified` is false.
    pub bound: f64,
    pub certified: bool,
}

impl CubatureRule {
    /// Rule from the first `n` emitted disks.
    pub fn build(
        emitted: &[Emission],
        n: usize,
        domain: &DiskCoveredDomain,
    ) -> Result<CubatureRule, CubatureError> {
        if n > emitted.len() {
            return Err(CubatureError::Range { requested: n, available: emitted.len() });
        }
        let prefix = &emitted[..n];
        let packed: CompensatedSum = prefix.iter().map(|e| e.circle.area()).collect();
        Ok(CubatureRule {
            nodes: prefix.iter().map(|e| e.circle.center).collect(),
            weights: prefix.iter().map(|e| e.circle.area()).collect(),
            residual_bound: domain.exact_area() - packed.value(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn residual_bound(&self) -> f64 {
        self.residual_bound
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().copied().collect::<CompensatedSum>().value()
    }

    /// `Σ a_i u(x_i)`
    pub fn estimate(&self, u: &HarmonicFn) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &a)| a * u.eval(x))
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn integrate(&self, u: &HarmonicFn, domain: &DiskCoveredDomain, sup: SupNorm) -> Integration {
        let supnorm = sup.of(u, domain);
        Integration {
            estimate: self.estimate(u),
            supnorm,
            bound: self.residual_bound * supnorm,
            certified: u.check_admissible(domain).is_ok(),
        }
    }

    /// Estimate rescaled by `|Ω| / Σ a_i`. Reported only; carries no
    /// certificate.
    pub fn rescaled_estimate(&self, u: &HarmonicFn, domain: &DiskCoveredDomain) -> f64 {
        let total = self.weight_sum();
        if total == 0.0 {
            return 0.0;
        }
        self.estimate(u) * domain.exact_area() / total
    }
}

/// A deep-rule integral used as ground truth for shallower rules.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    /// `Σ a_i u(x_i)` over the deep rule, one per function.
    pub values: Vec<f64>,
    /// Certified residual area of the deep rule (`<=` the requested target).
    pub residual: f64,
    /// Curvature threshold: the deep rule is every disk with `κ <= this`.
    pub max_curvature: f64,
    pub count: u64,
}

impl Reference {
    /// `residual · supnorm`
    pub fn uncertainty(&self, supnorm: f64) -> f64 {
        self.residual * supnorm
    }
}

/// Decay exponent of the residual in the curvature threshold, `2 - α`,
/// used only to extrapolate thresholds.
const THRESHOLD_EXPONENT: f64 = 2.0 - 1.30568;
/// 32 bins per octave.
const BIN_BITS: u32 = 5;

/// Integrates `fns` with the deep rule: the size-ordered prefix `{κ <= T}`
/// for the smallest curvature bin whose residual is `<= target_residual`.
pub fn reference_integral(
    domain: &DiskCoveredDomain,
    fns: &[HarmonicFn],
    target_residual: f64,
    tol: &TangencyTolerance,
    runner: &dyn TaskRunner,
) -> Result<Reference, PackingError> {
    let floor = residual_floor(domain);
    if !(target_residual >= floor) {
        return Err(PackingError::Unreachable { target: target_residual, floor });
    }
    let disks = domain.base_disks();
    let k_min = disks.iter().map(|c| c.curvature).fold(f64::INFINITY, f64::min);
    let k_base_max = disks.iter().map(|c| c.curvature).fold(0.0, f64::max);
    let k_guard = 1.0 / (RADIUS_GUARD * domain.max_base_radius());
    let exact = domain.exact_area();
    let evaluator = HarmonicFn::evaluator(fns);

    let residual_at = |t: f64| -> Result<f64, PackingError> {
        let bins = CurvatureBins::covering(k_min, t.max(k_base_max), 0);
        let none = |_: Vec2, _: &mut [f64]| {};
        let tally = deep_tally(domain, t, tol, &bins, 0, &none, runner)?;
        Ok(exact - tally.totals_through(bins.len - 1).1)
    };
    let extrapolate = |t: f64, residual: f64| -> Result<f64, PackingError> {
        if t >= k_guard {
            return Err(PackingError::Unreachable { target: target_residual, floor: residual });
        }
        let factor = pow(residual / target_residual, 1.0 / THRESHOLD_EXPONENT) * 1.05;
        Ok((t * factor.max(1.1)).min(k_guard))
    };

    // Area-only pilots until the extrapolation spans at most a factor 8.
    let mut t = (64.0 * k_base_max).min(k_guard);
    loop {
        let r = residual_at(t)?;
        if r <= target_residual {
            break;
        }
        let next = extrapolate(t, r)?;
        if next / t <= 8.0 {
            t = next;
            break;
        }
        t = next / 8.0;
    }

    loop {
        let bins = CurvatureBins::covering(k_min, t.max(k_base_max), BIN_BITS);
        let tally = deep_tally(domain, t, tol, &bins, fns.len(), &evaluator, runner)?;
        let mut packed = CompensatedSum::new();
        let mut chosen = None;
        for (b, bin) in tally.bins.iter().enumerate() {
            packed.merge(&bin.area);
            if exact - packed.value() <= target_residual {
                chosen = Some(b);
                break;
            }
        }
        match chosen {
            Some(b) => {
                let (count, area, values) = tally.totals_through(b);
                let max_curvature =
                    tally.bins[..=b].iter().map(|bin| bin.max_curvature).fold(0.0, f64::max);
                return Ok(Reference { values, residual: exact - area, max_curvature, count });
            }
            None => t = extrapolate(t, exact - packed.value())?,
        }
    }
}

/// Relative mean-value defect of `u` on `disk`:
/// `|∫_B u - |B| u(c)| / (|B| (1 + |u(c)|))`, with the integral from a
/// polar tensor rule (64 Gauss-Legendre radii times 128 equispaced angles).
pub fn mean_value_check(u: &HarmonicFn, disk: &Circle) -> f64 {
    let radial = GaussLegendre::new(64);
    let angles = 128;
    let mut total = CompensatedSum::new();
    for (r, wr) in radial.mapped(0.0, disk.radius) {
        let mut ring = CompensatedSum::new();
        for s in 0..angles {
            let t = 2.0 * PI * s as f64 / angles as f64;
            ring.add(u.eval(disk.center + Vec2::new(cos(t), sin(t)) * r));
        }
        total.add(wr * r * ring.value() * (2.0 * PI / angles as f64));
    }
    let area = disk.area();
    let center_value = u.eval(disk.center);
    fabs(total.value() - area * center_value) / (area * (1.0 + fabs(center_value)))
}
