//! The measurements behind each subcommand. Every function here is
//! deterministic given its inputs; the greedy driver is deterministic per
//! seed.

use apollo_qmc_core::cubature::{reference_integral, SupNorm};
use apollo_qmc_core::fit::{log_grid, log_grid_counts};
use apollo_qmc_core::greedy::{greedy_run, ConvexRegion, GreedyRow};
use apollo_qmc_core::math::CompensatedSum;
use apollo_qmc_core::packing::{curvature_band_counts, residual_series, CurvatureIndex, TaskRunner};
use apollo_qmc_core::residual::{uncovered_area, AreaEstimate};
use apollo_qmc_core::{
    CubatureRule, DiskCoveredDomain, Emission, ExponentFit, HarmonicFn, PackingGenerator, PackingStats,
    StopCriterion, TangencyTolerance,
};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use crate::Error;

/// Below these the counting and residual laws are visibly pre-asymptotic.
pub const ASYMPTOTIC_MIN_N: f64 = 1e3;
pub const ASYMPTOTIC_MIN_T: f64 = 1e2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub range: (f64, f64),
    pub points_used: usize,
    pub low_confidence: bool,
}

impl From<ExponentFit> for FitSummary {
    fn from(f: ExponentFit) -> Self {
        FitSummary {
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            range: f.range,
            points_used: f.points_used,
            low_confidence: f.low_confidence,
        }
    }
}

fn fit(points: &[(f64, f64)], lo: f64, hi: f64, asymptotic_min: f64) -> Result<FitSummary, Error> {
    let mut summary = FitSummary::from(ExponentFit::fit(points, lo, hi)?);
    summary.low_confidence |= summary.range.0 < asymptotic_min;
    Ok(summary)
}

pub fn cmd_generate(
    domain: &DiskCoveredDomain,
    stop: StopCriterion,
    tol: TangencyTolerance,
) -> Result<(Vec<Emission>, PackingStats), Error> {
    let mut gen = PackingGenerator::new(domain, tol)?;
    let stats = gen.generate_until(stop)?;
    Ok((gen.into_emitted(), stats))
}

fn prefix(domain: &DiskCoveredDomain, n: usize, tol: TangencyTolerance) -> Result<Vec<Emission>, Error> {
    let (emitted, _) = cmd_generate(domain, StopCriterion::MaxCount(n), tol)?;
    if emitted.len() < n {
        return Err(apollo_qmc_core::cubature::CubatureError::Range { requested: n, available: emitted.len() }.into());
    }
    Ok(emitted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeConfig {
    pub functions: Vec<HarmonicFn>,
    pub grid: Vec<usize>,
    /// The reference is built to `residual(max N) / reference_factor`.
    pub reference_factor: f64,
    pub supnorm: SupNorm,
    pub fit_range: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergeRow {
    pub function: usize,
    pub n: usize,
    pub estimate: f64,
    pub residual_bound: f64,
    pub supnorm: f64,
    pub certified_bound: f64,
    pub reference: f64,
    pub reference_uncertainty: f64,
    pub true_error: f64,
    pub honest: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceSummary {
    pub target_residual: f64,
    pub residual: f64,
    pub max_curvature: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeFits {
    pub function: usize,
    pub certified_bound: Option<FitSummary>,
    pub true_error: Option<FitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeOutput {
    pub rows: Vec<ConvergeRow>,
    pub reference: Option<ReferenceSummary>,
    pub fits: Vec<ConvergeFits>,
}

impl ConvergeOutput {
    pub fn all_honest(&self) -> bool {
        self.rows.iter().all(|r| r.honest)
    }
}

/// Rule estimates against a deep reference for every `(function, N)`.
///
/// Constants are compared against the exact integral `c |Ω|`, so their
/// error equals the certified bound. Every other function is compared
/// against one deep reference whose residual is at most the smallest
/// grid residual divided by `reference_factor`.
pub fn cmd_converge(
    domain: &DiskCoveredDomain,
    config: &ConvergeConfig,
    tol: TangencyTolerance,
    runner: &dyn TaskRunner,
) -> Result<ConvergeOutput, Error> {
    let grid = &config.grid;
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("N grid must be non-empty and strictly increasing".into()));
    }
    if config.functions.is_empty() {
        return Err(Error::Usage("at least one function is required".into()));
    }
    for u in &config.functions {
        u.check_admissible(domain)?;
    }
    let max_n = *grid.last().unwrap();
    let emitted = prefix(domain, max_n, tol)?;

    // Prefix sums in emission order, matching CubatureRule::build/estimate.
    let k = config.functions.len();
    let mut packed = CompensatedSum::new();
    let mut sums = vec![CompensatedSum::new(); k];
    let mut at_grid = Vec::with_capacity(grid.len());
    let mut next = 0;
    for n in 0..=max_n {
        if grid[next] == n {
            let estimates: Vec<f64> = sums.iter().map(|s| s.value()).collect();
            at_grid.push((n, domain.exact_area() - packed.value(), estimates));
            next += 1;
            if next == grid.len() {
                break;
            }
        }
        let c = &emitted[n].circle;
        let a = c.area();
        packed.add(a);
        for (s, u) in sums.iter_mut().zip(&config.functions) {
            s.add(a * u.eval(c.center));
        }
    }

    let deep: Vec<usize> =
        (0..k).filter(|&i| !matches!(config.functions[i], HarmonicFn::Constant(_))).collect();
    let reference = if deep.is_empty() {
        None
    } else {
        let target = at_grid.last().unwrap().1 / config.reference_factor;
        let fns: Vec<HarmonicFn> = deep.iter().map(|&i| config.functions[i].clone()).collect();
        let r = reference_integral(domain, &fns, target, &tol, runner)?;
        Some((target, r))
    };

    let mut rows = Vec::with_capacity(k * grid.len());
    for (f, u) in config.functions.iter().enumerate() {
        let supnorm = config.supnorm.of(u, domain);
        let (truth, uncertainty) = match (u, &reference) {
            (HarmonicFn::Constant(c), _) => (c * domain.exact_area(), 0.0),
            (_, Some((_, r))) => {
                let slot = deep.iter().position(|&i| i == f).unwrap();
                (r.values[slot], r.uncertainty(supnorm))
            }
            (_, None) => unreachable!("non-constant functions always get a reference"),
        };
        for (n, residual_bound, estimates) in &at_grid {
            let estimate = estimates[f];
            let certified_bound = residual_bound * supnorm;
            let true_error = (estimate - truth).abs();
            // Allowance for rounding in the two sums being compared.
            let rounding = 1e-12 * (estimate.abs() + truth.abs());
            rows.push(ConvergeRow {
                function: f,
                n: *n,
                estimate,
                residual_bound: *residual_bound,
                supnorm,
                certified_bound,
                reference: truth,
                reference_uncertainty: uncertainty,
                true_error,
                honest: true_error <= certified_bound + uncertainty + rounding,
            });
        }
    }

    let (lo, hi) = config.fit_range;
    let fits = (0..k)
        .map(|f| {
            let mine: Vec<&ConvergeRow> = rows.iter().filter(|r| r.function == f).collect();
            let bound: Vec<(f64, f64)> = mine.iter().map(|r| (r.n as f64, r.certified_bound)).collect();
            let error: Vec<(f64, f64)> = mine.iter().map(|r| (r.n as f64, r.true_error)).collect();
            ConvergeFits {
                function: f,
                certified_bound: fit(&bound, lo, hi, ASYMPTOTIC_MIN_N).ok(),
                true_error: fit(&error, lo, hi, ASYMPTOTIC_MIN_N).ok(),
            }
        })
        .collect();

    Ok(ConvergeOutput {
        rows,
        reference: reference.map(|(target, r)| ReferenceSummary {
            target_residual: target,
            residual: r.residual,
            max_curvature: r.max_curvature,
            count: r.count,
        }),
        fits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFit {
    /// `(x, y)` pairs the fit was computed from.
    pub series: Vec<(f64, f64)>,
    pub fit: FitSummary,
}

/// Fits `log residual` against `log N` on `points` log-spaced counts.
pub fn cmd_fit_residual(
    domain: &DiskCoveredDomain,
    range: (usize, usize),
    points: usize,
    tol: TangencyTolerance,
) -> Result<SeriesFit, Error> {
    let (lo, hi) = range;
    if lo == 0 || hi < lo {
        return Err(Error::Usage("N range must satisfy 1 <= lo <= hi".into()));
    }
    let emitted = prefix(domain, hi, tol)?;
    let all = residual_series(&emitted, domain);
    let series: Vec<(f64, f64)> =
        log_grid_counts(lo, hi, points).into_iter().map(|n| (n as f64, all[n].1)).collect();
    let fit = fit(&series, lo as f64, hi as f64, ASYMPTOTIC_MIN_N)?;
    Ok(SeriesFit { series, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Count relative to the previous band.
    pub growth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingOutput {
    pub counting: SeriesFit,
    pub bands: Vec<Band>,
}

/// Fits `log N(T)` against `log T`, plus counts per curvature band
/// `[T0 r^j, T0 r^(j+1))` inside the range.
pub fn cmd_fit_counting(
    domain: &DiskCoveredDomain,
    range: (f64, f64),
    points: usize,
    band_ratio: f64,
    tol: TangencyTolerance,
) -> Result<CountingOutput, Error> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi >= lo && band_ratio > 1.0) {
        return Err(Error::Usage("T range must satisfy 0 < lo <= hi and the band ratio must exceed 1".into()));
    }
    let (emitted, _) = cmd_generate(domain, StopCriterion::MaxCurvature(hi), tol)?;
    let index = CurvatureIndex::new(&emitted);
    let series: Vec<(f64, f64)> =
        log_grid(lo, hi, points).into_iter().map(|t| (t, index.count_at_most(t) as f64)).collect();
    let counting = SeriesFit { fit: fit(&series, lo, hi, ASYMPTOTIC_MIN_T)?, series };

    let bands = ((hi / lo).ln() / band_ratio.ln() + 1e-9).floor() as usize;
    let counts = curvature_band_counts(&emitted, lo, band_ratio, bands);
    let bands = counts
        .iter()
        .enumerate()
        .map(|(j, &count)| Band {
            lower: lo * band_ratio.powi(j as i32),
            upper: lo * band_ratio.powi(j as i32 + 1),
            count,
            growth: (j > 0 && counts[j - 1] > 0).then(|| count as f64 / counts[j - 1] as f64),
        })
        .collect();
    Ok(CountingOutput { counting, bands })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpRow {
    pub p: f64,
    pub measured: f64,
    pub standard_error: f64,
    pub exact: f64,
    /// `|measured - exact| / standard_error`; 0 when both agree exactly.
    pub z_score: f64,
    pub within_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpOutput {
    pub n: usize,
    pub residual: f64,
    pub samples: u64,
    pub hits: u64,
    pub rows: Vec<LpRow>,
}

/// Samples the indicator of the uncovered set after `n` emissions and
/// compares its `L^p` norms with `residual^(1/p)`.
pub fn cmd_lp_check(
    domain: &DiskCoveredDomain,
    n: usize,
    ps: &[f64],
    samples: u64,
    seed: u64,
    tol: TangencyTolerance,
) -> Result<LpOutput, Error> {
    if ps.iter().any(|&p| !(p >= 1.0 && p.is_finite())) {
        return Err(Error::Usage("every p must be a finite number >= 1".into()));
    }
    if samples == 0 {
        return Err(Error::Usage("samples must be positive".into()));
    }
    let emitted = if n == 0 { Vec::new() } else { prefix(domain, n, tol)? };
    let rule = CubatureRule::build(&emitted, n, domain)?;
    let disks: Vec<_> = emitted.iter().map(|e| e.circle).collect();
    let est: AreaEstimate = uncovered_area(domain, &disks, samples, seed);
    let rows = ps
        .iter()
        .map(|&p| {
            let lp = est.lp_norm(p);
            let exact = rule.residual_bound().powf(1.0 / p);
            let gap = (lp.measured - exact).abs();
            let z_score = if gap == 0.0 { 0.0 } else { gap / lp.standard_error };
            LpRow { p, measured: lp.measured, standard_error: lp.standard_error, exact, z_score, within_band: z_score <= 4.0 }
        })
        .collect();
    Ok(LpOutput { n, residual: rule.residual_bound(), samples, hits: est.hits, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutput {
    pub seeds: Vec<u64>,
    pub series: Vec<Vec<GreedyRow>>,
    pub per_seed: Vec<Option<FitSummary>>,
    pub pooled: FitSummary,
}

/// Independent greedy runs, one per seed, and a pooled fit of
/// `log residual` against `log N` over `fit_range`.
pub fn cmd_greedy(
    region: ConvexRegion,
    target: usize,
    seeds: &[u64],
    fit_range: (usize, usize),
    points: usize,
    pool: &ThreadPool,
) -> Result<GreedyOutput, Error> {
    if seeds.len() < 3 {
        return Err(Error::Usage("the pooled fit needs at least 3 seeds".into()));
    }
    let (lo, hi) = fit_range;
    if lo == 0 || hi < lo || hi > target {
        return Err(Error::Usage("fit range must satisfy 1 <= lo <= hi <= target".into()));
    }
    let series: Vec<Vec<GreedyRow>> = pool
        .install(|| seeds.par_iter().map(|&s| greedy_run(region, target, s)).collect::<Result<_, _>>())?;
    let grid = log_grid_counts(lo, hi, points);
    let sample = |run: &[GreedyRow]| -> Vec<(f64, f64)> {
        grid.iter().map(|&n| (n as f64, run[n - 1].residual)).collect()
    };
    let (lo, hi) = (lo as f64, hi as f64);
    let per_seed = series.iter().map(|run| fit(&sample(run), lo, hi, 0.0).ok()).collect();
    let pooled_points: Vec<(f64, f64)> = series.iter().flat_map(|run| sample(run)).collect();
    let pooled = fit(&pooled_points, lo, hi, 0.0)?;
    Ok(GreedyOutput { seeds: seeds.to_vec(), series, per_seed, pooled })
}
