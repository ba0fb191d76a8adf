//! The size-ordered Apollonian disk sequence of a disk-covered domain.
//!
//! [`PackingGenerator`] merges the base disks and the inscribed circles of
//! every gap into one priority queue keyed by radius. Popping a gap emits
//! its inscribed circle and pushes the three child gaps, each with its own
//! inscribed circle already solved. A child's inscribed circle is strictly
//! smaller than its parent's, so popping largest-first emits the globally
//! size-sorted sequence.
//!
//! The deep walker ([`walk_task`], [`plan_deep`]) visits the same circles
//! depth-first up to a curvature threshold without keeping them, which is
//! what reference integrals need: the set `{κ ≤ T}` is a prefix of the
//! sorted sequence, and its sums do not depend on visiting order.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::domain::{DiskCoveredDomain, Violation};
use crate::geometry::{
    descartes_fourth_curvature, inscribed_circle, solve_center, Circle, GeometryError, Root,
    TangencyTolerance,
};
use crate::math::{pow, CompensatedSum, Vec2};

/// Circles smaller than this fraction of the largest base radius are
/// refused; tolerance checks stop meaning anything in `f64` past it.
pub const RADIUS_GUARD: f64 = 1e-9;

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub circle: Circle,
    /// Emission indices of the three tangent parents; `None` for base disks.
    pub parents: Option<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingStats {
    pub count: usize,
    pub max_curvature_emitted: f64,
    pub packed_area: f64,
    pub residual_area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopCriterion {
    MaxCount(usize),
    /// Emit exactly the circles with curvature `<= T`.
    MaxCurvature(f64),
    /// Stop at the first prefix whose residual area is `<= target`.
    MinResidual(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PackingError {
    InvalidDomain(Vec<Violation>),
    /// Solving an inscribed circle failed; `parents` are node ids in
    /// creation order (base disks first).
    Geometry { error: GeometryError, parents: [usize; 3] },
    RadiusGuard { radius: f64, limit: f64 },
    Unreachable { target: f64, floor: f64 },
}

impl core::error::Error for PackingError {}

impl fmt::Display for PackingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PackingError::InvalidDomain(v) => {
                write!(f, "invalid domain ({} violations)", v.len())?;
                for item in v {
                    write!(f, "; {item}")?;
                }
                Ok(())
            }
            PackingError::Geometry { error, parents } => {
                write!(f, "{error} (parents {parents:?})")
            }
            PackingError::RadiusGuard { radius, limit } => write!(
                f,
                "next circle radius {radius:e} is below the guard {limit:e}"
            ),
            PackingError::Unreachable { target, floor } => write!(
                f,
                "residual target {target:e} is below the reachable floor {floor:e}"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    circle: Circle,
    parents: [u32; 3],
}

/// Queue entry. Larger radius first, then smaller x, smaller y, and
/// creation order.
#[derive(Debug, Clone, Copy)]
struct Pending {
    radius: f64,
    x: f64,
    y: f64,
    node: u32,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.radius
            .total_cmp(&other.radius)
            .then_with(|| other.x.total_cmp(&self.x))
            .then_with(|| other.y.total_cmp(&self.y))
            .then_with(|| other.node.cmp(&self.node))
    }
}

pub struct PackingGenerator {
    domain: DiskCoveredDomain,
    tol: TangencyTolerance,
    nodes: Vec<Node>,
    emission_of: Vec<u32>,
    frontier: BinaryHeap<Pending>,
    emitted: Vec<Emission>,
    packed: CompensatedSum,
    radius_limit: f64,
}

impl PackingGenerator {
    pub fn new(
        domain: &DiskCoveredDomain,
        tol: TangencyTolerance,
    ) -> Result<PackingGenerator, PackingError> {
        let violations = domain.validate(&tol);
        if !violations.is_empty() {
            return Err(PackingError::InvalidDomain(violations));
        }
        let mut gen = PackingGenerator {
            domain: domain.clone(),
            tol,
            nodes: Vec::new(),
            emission_of: Vec::new(),
            frontier: BinaryHeap::new(),
            emitted: Vec::new(),
            packed: CompensatedSum::new(),
            radius_limit: RADIUS_GUARD * domain.max_base_radius(),
        };
        for c in domain.base_disks() {
            gen.push_node(*c, [NO_PARENT; 3]);
        }
        for gap in domain.gaps() {
            let members = gap.members.map(|i| i as u32);
            let child = gen.solve(members)?;
            gen.push_node(child, members);
        }
        Ok(gen)
    }

    pub fn domain(&self) -> &DiskCoveredDomain {
        &self.domain
    }

    pub fn tolerance(&self) -> &TangencyTolerance {
        &self.tol
    }

    pub fn emitted(&self) -> &[Emission] {
        &self.emitted
    }

    pub fn into_emitted(self) -> Vec<Emission> {
        self.emitted
    }

    /// The next circle to be emitted, if any.
    pub fn peek(&self) -> Option<&Circle> {
        self.frontier.peek().map(|p| &self.nodes[p.node as usize].circle)
    }

    pub fn stats(&self) -> PackingStats {
        let packed_area = self.packed.value();
        PackingStats {
            count: self.emitted.len(),
            max_curvature_emitted: self
                .emitted
                .iter()
                .map(|e| e.circle.curvature)
                .fold(0.0, f64::max),
            packed_area,
            residual_area: self.domain.exact_area() - packed_area,
        }
    }

    pub fn residual_area(&self) -> f64 {
        self.domain.exact_area() - self.packed.value()
    }

    fn push_node(&mut self, circle: Circle, parents: [u32; 3]) {
        let node = self.nodes.len() as u32;
        self.nodes.push(Node { circle, parents });
        self.emission_of.push(NO_PARENT);
        self.frontier.push(Pending {
            radius: circle.radius,
            x: circle.center.x,
            y: circle.center.y,
            node,
        });
    }

    fn solve(&self, members: [u32; 3]) -> Result<Circle, PackingError> {
        let [a, b, c] = members.map(|m| &self.nodes[m as usize].circle);
        inscribed_circle(a, b, c, &self.tol).map_err(|error| PackingError::Geometry {
            error,
            parents: members.map(|m| m as usize),
        })
    }

    /// Emits the next disk of the sequence; `Ok(None)` once the frontier is
    /// empty (only for domains without gaps).
    pub fn next(&mut self) -> Result<Option<Emission>, PackingError> {
        let Some(&top) = self.frontier.peek() else {
            return Ok(None);
        };
        let node = self.nodes[top.node as usize];
        if node.circle.radius < self.radius_limit {
            return Err(PackingError::RadiusGuard {
                radius: node.circle.radius,
                limit: self.radius_limit,
            });
        }
        let parents = if node.parents[0] == NO_PARENT {
            None
        } else {
            let [a, b, c] = node.parents;
            let n = top.node;
            let children = [[a, b, n], [b, c, n], [a, c, n]];
            let solved = [
                self.solve(children[0])?,
                self.solve(children[1])?,
                self.solve(children[2])?,
            ];
            for (members, child) in children.into_iter().zip(solved) {
                self.push_node(child, members);
            }
            Some(node.parents.map(|p| self.emission_of[p as usize] as usize))
        };
        // children were pushed after peeking, and they are strictly smaller,
        // so the maximum is still `top`
        let popped = self.frontier.pop().expect("peeked entry");
        debug_assert_eq!(popped.node, top.node);
        self.emission_of[top.node as usize] = self.emitted.len() as u32;
        self.packed.add(node.circle.area());
        let emission = Emission { circle: node.circle, parents };
        self.emitted.push(emission);
        Ok(Some(emission))
    }

    pub fn generate_until(&mut self, stop: StopCriterion) -> Result<PackingStats, PackingError> {
        match stop {
            StopCriterion::MaxCount(n) => {
                while self.emitted.len() < n {
                    if self.next()?.is_none() {
                        break;
                    }
                }
            }
            StopCriterion::MaxCurvature(t) => {
                while self.peek().is_some_and(|c| c.curvature <= t) {
                    self.next()?;
                }
            }
            StopCriterion::MinResidual(target) => {
                let floor = residual_floor(&self.domain);
                if !(target >= floor) {
                    return Err(PackingError::Unreachable { target, floor });
                }
                while self.residual_area() > target {
                    if self.next()?.is_none() {
                        break;
                    }
                }
            }
        }
        Ok(self.stats())
    }
}

/// Smallest residual target the bookkeeping can resolve.
pub fn residual_floor(domain: &DiskCoveredDomain) -> f64 {
    domain.exact_area() * 1e-13
}

/// `#{i : κ(E_i) <= T}`. The list must be complete below `T`.
pub fn count_by_curvature(emitted: &[Emission], t: f64) -> usize {
    emitted.iter().filter(|e| e.circle.curvature <= t).count()
}

/// Counts of circles with curvature in `[T0 r^j, T0 r^(j+1))`,
/// `j = 0..bands`.
pub fn curvature_band_counts(emitted: &[Emission], t0: f64, ratio: f64, bands: usize) -> Vec<usize> {
    let mut counts = alloc::vec![0usize; bands];
    if bands == 0 {
        return counts;
    }
    let edges: Vec<f64> = (0..=bands).map(|j| t0 * pow(ratio, j as f64)).collect();
    for e in emitted {
        let k = e.circle.curvature;
        if k < edges[0] || k >= edges[bands] {
            continue;
        }
        let j = edges.partition_point(|&edge| edge <= k) - 1;
        counts[j] += 1;
    }
    counts
}

/// `(N, |Ω| - Σ_{i<=N} π r_i²)` for `N = 0..=len`.
pub fn residual_series(emitted: &[Emission], domain: &DiskCoveredDomain) -> Vec<(usize, f64)> {
    let exact = domain.exact_area();
    let mut packed = CompensatedSum::new();
    let mut out = Vec::with_capacity(emitted.len() + 1);
    out.push((0, exact));
    for (i, e) in emitted.iter().enumerate() {
        packed.add(e.circle.area());
        out.push((i + 1, exact - packed.value()));
    }
    out
}

/// Sorted curvatures for repeated counting queries.
#[derive(Debug, Clone)]
pub struct CurvatureIndex {
    sorted: Vec<f64>,
}

impl CurvatureIndex {
    pub fn new(emitted: &[Emission]) -> CurvatureIndex {
        let mut sorted: Vec<f64> = emitted.iter().map(|e| e.circle.curvature).collect();
        sorted.sort_unstable_by(f64::total_cmp);
        CurvatureIndex { sorted }
    }

    pub fn count_at_most(&self, t: f64) -> usize {
        self.sorted.partition_point(|&k| k <= t)
    }
}

/// Roughly geometric curvature bins read straight off the `f64` bit
/// pattern: `2^bits` bins per octave, each a half-open interval
/// `[lower(b), lower(b + 1))`. Bin 0 also takes everything below `k_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureBins {
    shift: u32,
    base_key: u64,
    pub len: usize,
}

impl CurvatureBins {
    pub fn covering(k_min: f64, k_max: f64, bits_per_octave: u32) -> CurvatureBins {
        let shift = 52 - bits_per_octave.min(10);
        let mut bins = CurvatureBins { shift, base_key: k_min.to_bits() >> shift, len: 1 };
        bins.len = bins.index(k_max.max(k_min)) + 1;
        bins
    }

    pub fn index(&self, k: f64) -> usize {
        ((k.to_bits() >> self.shift).saturating_sub(self.base_key)) as usize
    }

    /// Exclusive upper edge of bin `b`.
    pub fn upper_edge(&self, b: usize) -> f64 {
        f64::from_bits((self.base_key + b as u64 + 1) << self.shift)
    }
}

#[derive(Debug, Clone, Default)]
pub struct BinTally {
    pub count: u64,
    pub max_curvature: f64,
    pub area: CompensatedSum,
    /// `Σ area · value` for each evaluated function.
    pub weighted: Vec<CompensatedSum>,
}

/// Binned sums over the circles visited by the deep walker.
#[derive(Debug, Clone)]
pub struct DeepTally {
    pub bins: Vec<BinTally>,
}

impl DeepTally {
    pub fn new(bins: &CurvatureBins, values: usize) -> DeepTally {
        DeepTally {
            bins: (0..bins.len)
                .map(|_| BinTally {
                    count: 0,
                    max_curvature: 0.0,
                    area: CompensatedSum::new(),
                    weighted: alloc::vec![CompensatedSum::new(); values],
                })
                .collect(),
        }
    }

    fn record(&mut self, bin: usize, circle: &Circle, values: &[f64]) {
        let slot = &mut self.bins[bin];
        let area = circle.area();
        slot.count += 1;
        slot.max_curvature = slot.max_curvature.max(circle.curvature);
        slot.area.add(area);
        for (acc, v) in slot.weighted.iter_mut().zip(values) {
            acc.add(area * v);
        }
    }

    /// Adds `other` bin by bin; merging in a fixed order keeps results
    /// independent of how tasks were scheduled.
    pub fn merge(&mut self, other: &DeepTally) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            a.count += b.count;
            a.max_curvature = a.max_curvature.max(b.max_curvature);
            a.area.merge(&b.area);
            for (x, y) in a.weighted.iter_mut().zip(&b.weighted) {
                x.merge(y);
            }
        }
    }

    /// Totals over bins `0..=last`: `(count, area, weighted sums)`.
    pub fn totals_through(&self, last: usize) -> (u64, f64, Vec<f64>) {
        let values = self.bins.first().map_or(0, |b| b.weighted.len());
        let mut count = 0;
        let mut area = CompensatedSum::new();
        let mut weighted = alloc::vec![CompensatedSum::new(); values];
        for bin in &self.bins[..=last.min(self.bins.len() - 1)] {
            count += bin.count;
            area.merge(&bin.area);
            for (acc, w) in weighted.iter_mut().zip(&bin.weighted) {
                acc.merge(w);
            }
        }
        (count, area.value(), weighted.iter().map(CompensatedSum::value).collect())
    }
}

/// Work split for a deep walk: the circles near the root, handled up front,
/// and the gaps below them, walked independently.
#[derive(Debug, Clone)]
pub struct DeepPlan {
    pub head: Vec<Circle>,
    pub tasks: Vec<[Circle; 3]>,
}

/// Expands every domain gap `split_depth` levels, keeping circles with
/// curvature `<= max_curvature`.
pub fn plan_deep(
    domain: &DiskCoveredDomain,
    max_curvature: f64,
    split_depth: usize,
    tol: &TangencyTolerance,
) -> Result<DeepPlan, PackingError> {
    let limit = RADIUS_GUARD * domain.max_base_radius();
    let mut head: Vec<Circle> = domain.base_disks().to_vec();
    let mut level: Vec<[Circle; 3]> = domain.gaps().iter().map(|g| domain.gap_circles(g)).collect();
    for _ in 0..split_depth {
        let mut next = Vec::with_capacity(level.len() * 3);
        for [a, b, c] in level {
            let e = inscribed(&a, &b, &c, tol, limit, max_curvature)?;
            if let Some(e) = e {
                head.push(e);
                next.extend([[a, b, e], [b, c, e], [a, c, e]]);
            }
        }
        level = next;
    }
    Ok(DeepPlan { head, tasks: level })
}

fn inscribed(
    a: &Circle,
    b: &Circle,
    c: &Circle,
    tol: &TangencyTolerance,
    radius_limit: f64,
    max_curvature: f64,
) -> Result<Option<Circle>, PackingError> {
    let geometry = |error| PackingError::Geometry { error, parents: [usize::MAX; 3] };
    // the curvature alone decides; skip the center solve for leaves
    let k = descartes_fourth_curvature(a.curvature, b.curvature, c.curvature, Root::Inner)
        .map_err(geometry)?;
    if k > max_curvature {
        return Ok(None);
    }
    let e = solve_center(a, b, c, k, tol).map_err(geometry)?;
    if e.radius < radius_limit {
        return Err(PackingError::RadiusGuard { radius: e.radius, limit: radius_limit });
    }
    Ok(Some(e))
}

/// Depth-first walk of one gap's Apollonian packing, recording every
/// circle with curvature `<= max_curvature` into `tally`.
///
/// `eval` writes the function values at a center into its buffer, which
/// has one slot per tally value.
pub fn walk_task<F>(
    task: &[Circle; 3],
    max_curvature: f64,
    radius_limit: f64,
    tol: &TangencyTolerance,
    bins: &CurvatureBins,
    eval: &F,
    tally: &mut DeepTally,
) -> Result<(), PackingError>
where
    F: Fn(Vec2, &mut [f64]) + ?Sized,
{
    struct Frame {
        parents: [Circle; 3],
        inscribed: Circle,
        next_child: u8,
    }
    let values = tally.bins.first().map_or(0, |b| b.weighted.len());
    let mut buf = alloc::vec![0.0; values];
    let [a, b, c] = task;
    let Some(root) = inscribed(a, b, c, tol, radius_limit, max_curvature)? else {
        return Ok(());
    };
    eval(root.center, &mut buf);
    tally.record(bins.index(root.curvature), &root, &buf);
    let mut stack = alloc::vec![Frame { parents: *task, inscribed: root, next_child: 0 }];
    while let Some(top) = stack.last_mut() {
        let [a, b, c] = top.parents;
        let (p, q) = match top.next_child {
            0 => (a, b),
            1 => (b, c),
            2 => (a, c),
            _ => {
                stack.pop();
                continue;
            }
        };
        top.next_child += 1;
        let e = top.inscribed;
        if let Some(child) = inscribed(&p, &q, &e, tol, radius_limit, max_curvature)? {
            eval(child.center, &mut buf);
            tally.record(bins.index(child.curvature), &child, &buf);
            stack.push(Frame { parents: [p, q, e], inscribed: child, next_child: 0 });
        }
    }
    Ok(())
}

/// Records the plan's head circles into `tally`.
pub fn tally_head<F>(plan: &DeepPlan, bins: &CurvatureBins, eval: &F, tally: &mut DeepTally)
where
    F: Fn(Vec2, &mut [f64]) + ?Sized,
{
    let values = tally.bins.first().map_or(0, |b| b.weighted.len());
    let mut buf = alloc::vec![0.0; values];
    for c in &plan.head {
        eval(c.center, &mut buf);
        tally.record(bins.index(c.curvature), c, &buf);
    }
}

/// Runs deep-walk tasks. The sequential runner is the reference; parallel
/// runners must return results in task order.
pub trait TaskRunner {
    fn run(
        &self,
        tasks: &[[Circle; 3]],
        work: &(dyn Fn(&[Circle; 3]) -> Result<DeepTally, PackingError> + Sync),
    ) -> Vec<Result<DeepTally, PackingError>>;
}

pub struct Sequential;

impl TaskRunner for Sequential {
    fn run(
        &self,
        tasks: &[[Circle; 3]],
        work: &(dyn Fn(&[Circle; 3]) -> Result<DeepTally, PackingError> + Sync),
    ) -> Vec<Result<DeepTally, PackingError>> {
        tasks.iter().map(work).collect()
    }
}

/// Number of levels expanded before tasks are handed to the runner. Fixed,
/// so results do not depend on the runner.
pub const SPLIT_DEPTH: usize = 4;

/// Binned sums over every circle (base disks included) with curvature
/// `<= max_curvature`.
pub fn deep_tally<F>(
    domain: &DiskCoveredDomain,
    max_curvature: f64,
    tol: &TangencyTolerance,
    bins: &CurvatureBins,
    values: usize,
    eval: &F,
    runner: &dyn TaskRunner,
) -> Result<DeepTally, PackingError>
where
    F: Fn(Vec2, &mut [f64]) + Sync,
{
    let plan = plan_deep(domain, max_curvature, SPLIT_DEPTH, tol)?;
    let limit = RADIUS_GUARD * domain.max_base_radius();
    let mut total = DeepTally::new(bins, values);
    tally_head(&plan, bins, eval, &mut total);
    let work = |task: &[Circle; 3]| {
        let mut tally = DeepTally::new(bins, values);
        walk_task(task, max_curvature, limit, tol, bins, eval, &mut tally)?;
        Ok(tally)
    };
    for part in runner.run(&plan.tasks, &work) {
        total.merge(&part?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_three_tangent;
    use crate::math::{sqrt, PI};
    use approx::assert_relative_eq;

    fn unit_gen() -> PackingGenerator {
        let d = build_three_tangent(1.0, 1.0, 1.0).unwrap();
        PackingGenerator::new(&d, TangencyTolerance::default()).unwrap()
    }

    #[test]
    fn first_emissions_of_unit_triple() {
        let mut g = unit_gen();
        // equal radii: ordered by x, then y
        for i in [0, 2, 1] {
            let e = g.next().unwrap().unwrap();
            assert_eq!(e.circle.radius, 1.0);
            assert_eq!(e.parents, None);
            assert_eq!(e.circle.center, g.domain().base_disks()[i].center);
        }
        let e = g.next().unwrap().unwrap();
        assert_relative_eq!(e.circle.radius, 0.154700538379251529018, max_relative = 1e-14);
        assert_relative_eq!(e.circle.center.x, 1.0, epsilon = 1e-14);
        assert_relative_eq!(e.circle.center.y, sqrt(3.0) / 3.0, epsilon = 1e-14);
        assert_eq!(e.parents, Some([0, 2, 1]));

        let k = 3.0 + 2.0 * sqrt(3.0);
        let second = descartes_fourth_curvature(1.0, 1.0, k, Root::Inner).unwrap();
        assert_relative_eq!(second, 15.9282032302755091741, max_relative = 1e-14);
        for _ in 0..3 {
            let e = g.next().unwrap().unwrap();
            assert_relative_eq!(e.circle.curvature, second, max_relative = 1e-13);
        }
    }

    #[test]
    fn single_disk_exhausts() {
        let d = DiskCoveredDomain::from_parts(
            alloc::vec![Circle::new(Vec2::new(0.0, 0.0), 2.0).unwrap()],
            Vec::new(),
        );
        let mut g = PackingGenerator::new(&d, TangencyTolerance::default()).unwrap();
        assert!(g.next().unwrap().is_some());
        assert!(g.next().unwrap().is_none());
        assert!(g.peek().is_none());
    }

    #[test]
    fn invalid_domain_is_refused() {
        let d = DiskCoveredDomain::from_parts(
            alloc::vec![
                Circle::new(Vec2::new(0.0, 0.0), 1.0).unwrap(),
                Circle::new(Vec2::new(1.0, 0.0), 1.0).unwrap()
            ],
            Vec::new(),
        );
        let r = PackingGenerator::new(&d, TangencyTolerance::default());
        assert!(matches!(r, Err(PackingError::InvalidDomain(_))));
    }

    #[test]
    fn stop_criteria() {
        let mut g = unit_gen();
        let s = g.generate_until(StopCriterion::MaxCount(0)).unwrap();
        assert_eq!(s.count, 0);
        assert_eq!(s.residual_area, g.domain().exact_area());

        let s = g.generate_until(StopCriterion::MaxCount(4)).unwrap();
        let r4 = 2.0 / sqrt(3.0) - 1.0;
        assert_relative_eq!(s.packed_area, 3.0 * PI + PI * r4 * r4, max_relative = 1e-14);
        assert_relative_eq!(s.packed_area, 9.49996336220869253609, max_relative = 1e-14);
        assert_relative_eq!(s.residual_area, 0.0860690793346678535929, max_relative = 1e-11);

        let mut g = unit_gen();
        let s = g.generate_until(StopCriterion::MaxCurvature(1.0)).unwrap();
        assert_eq!(s.count, 3);

        let mut g = unit_gen();
        let s = g.generate_until(StopCriterion::MinResidual(0.05)).unwrap();
        assert!(s.residual_area <= 0.05);
        let series = residual_series(g.emitted(), g.domain());
        assert!(series[s.count - 1].1 > 0.05);

        assert!(matches!(
            g.generate_until(StopCriterion::MinResidual(1e-20)),
            Err(PackingError::Unreachable { .. })
        ));
    }

    #[test]
    fn counting_queries() {
        let mut g = unit_gen();
        g.generate_until(StopCriterion::MaxCurvature(100.0)).unwrap();
        let e = g.emitted();
        assert_eq!(count_by_curvature(e, 1.0), 3);
        assert_eq!(count_by_curvature(e, 6.5), 4);
        assert_eq!(count_by_curvature(e, 6.4641), 3);
        assert!(curvature_band_counts(e, 1.0, 10.0, 0).is_empty());
        assert_eq!(curvature_band_counts(e, 1.0, 10.0, 1), alloc::vec![4]);
        let bands = curvature_band_counts(e, 1.0, 1.5, 11);
        let eps = 1e-12;
        let expected = count_by_curvature(e, pow(1.5, 11.0) - eps) - count_by_curvature(e, 1.0 - eps);
        assert_eq!(bands.iter().sum::<usize>(), expected);
        let index = CurvatureIndex::new(e);
        for t in [1.0, 6.4641, 6.5, 20.0, 99.0] {
            assert_eq!(index.count_at_most(t), count_by_curvature(e, t));
        }
    }

    #[test]
    fn residual_series_examples() {
        let mut g = unit_gen();
        g.generate_until(StopCriterion::MaxCount(200)).unwrap();
        let s = residual_series(g.emitted(), g.domain());
        assert_eq!(s[0], (0, g.domain().exact_area()));
        assert_relative_eq!(s[3].1, sqrt(3.0) - PI / 2.0, max_relative = 1e-12);
        assert!(s.windows(2).all(|w| w[1].1 < w[0].1 && w[1].1 > 0.0));
    }

    #[test]
    fn bins_partition_curvatures() {
        let bins = CurvatureBins::covering(1.0, 1000.0, 3);
        assert_eq!(bins.index(0.5), 0);
        assert_eq!(bins.index(1.0), 0);
        assert_eq!(bins.index(1.124), 0);
        assert_eq!(bins.index(1.125), 1);
        assert_eq!(bins.index(2.0), 8);
        assert_eq!(bins.upper_edge(0), 1.125);
        assert!(bins.upper_edge(bins.len - 1) > 1000.0);
        let mut last = 0;
        for i in 0..10_000 {
            let b = bins.index(1.0 + i as f64 * 0.1);
            assert!(b >= last && b < bins.len);
            last = b;
        }
    }

    #[test]
    fn deep_tally_matches_sorted_prefix() {
        let mut g = unit_gen();
        let t = 500.0;
        g.generate_until(StopCriterion::MaxCurvature(t)).unwrap();
        let d = g.domain().clone();
        let bins = CurvatureBins::covering(1.0, t, 4);
        let eval = |p: Vec2, out: &mut [f64]| out[0] = p.x;
        let tally =
            deep_tally(&d, t, &TangencyTolerance::default(), &bins, 1, &eval, &Sequential).unwrap();
        let (count, area, weighted) = tally.totals_through(bins.len - 1);
        assert_eq!(count as usize, g.emitted().len());
        assert_relative_eq!(area, g.stats().packed_area, max_relative = 1e-13);
        let direct: f64 = g.emitted().iter().map(|e| e.circle.area() * e.circle.center.x).sum();
        assert_relative_eq!(weighted[0], direct, max_relative = 1e-12);
    }
}
