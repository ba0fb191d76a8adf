//! Finitely disk-covered domains: base disks plus the curvilinear gaps
//! enclosed by mutually tangent triples.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{
    contact_residual, gap_area, inscribed_circle, is_disjoint, is_tangent, Circle, GeometryError,
    TangencyTolerance,
};
use crate::math::{fabs, sqrt, CompensatedSum, Vec2, SQRT_2};

/// Three indices into the base-disk list, pairwise tangent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gap {
    pub members: [usize; 3],
}

impl Gap {
    pub fn new(a: usize, b: usize, c: usize) -> Gap {
        Gap { members: [a, b, c] }
    }

    fn sorted(mut self) -> Gap {
        self.members.sort_unstable();
        self
    }
}

/// Base disks, the gaps between them and the closed-form area of their union.
///
/// Immutable once built. Construction does not validate; call
/// [`DiskCoveredDomain::validate`] (loaders and builders do).
#[derive(Debug, Clone, PartialEq)]
pub struct DiskCoveredDomain {
    base_disks: Vec<Circle>,
    gaps: Vec<Gap>,
    exact_area: f64,
}

/// One failed domain invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoDisks,
    Overlap { pair: (usize, usize), residual: f64 },
    GapIndexOutOfRange { gap: usize, index: usize },
    GapRepeatsMember { gap: usize },
    GapNotTangent { gap: usize, pair: (usize, usize), residual: f64 },
    GapPointsCoincide { gap: usize, separation: f64 },
    AreaMismatch { stored: f64, recomputed: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoDisks => write!(f, "domain has no disks"),
            Violation::Overlap { pair, residual } => {
                write!(f, "disks {} and {} overlap (residual {residual:e})", pair.0, pair.1)
            }
            Violation::GapIndexOutOfRange { gap, index } => {
                write!(f, "gap {gap} references missing disk {index}")
            }
            Violation::GapRepeatsMember { gap } => write!(f, "gap {gap} repeats a disk"),
            Violation::GapNotTangent { gap, pair, residual } => write!(
                f,
                "gap {gap}: disks {} and {} are not tangent (residual {residual:e})",
                pair.0, pair.1
            ),
            Violation::GapPointsCoincide { gap, separation } => write!(
                f,
                "gap {gap}: tangency points coincide (separation {separation:e})"
            ),
            Violation::AreaMismatch { stored, recomputed } => {
                write!(f, "area {stored} differs from recomputed {recomputed}")
            }
        }
    }
}

impl DiskCoveredDomain {
    /// Assembles a domain from parts. Gap areas use the exact-tangency
    /// closed form, so the area is only meaningful for a valid domain.
    pub fn from_parts(base_disks: Vec<Circle>, gaps: Vec<Gap>) -> DiskCoveredDomain {
        let exact_area = area_of(&base_disks, &gaps);
        DiskCoveredDomain { base_disks, gaps, exact_area }
    }

    /// Builds a domain whose gaps are found by [`detect_gaps`].
    pub fn with_detected_gaps(
        base_disks: Vec<Circle>,
        tol: &TangencyTolerance,
    ) -> Result<DiskCoveredDomain, GeometryError> {
        let gaps = detect_gaps(&base_disks, tol)?;
        Ok(DiskCoveredDomain::from_parts(base_disks, gaps))
    }

    pub fn base_disks(&self) -> &[Circle] {
        &self.base_disks
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn exact_area(&self) -> f64 {
        self.exact_area
    }

    pub fn gap_circles(&self, gap: &Gap) -> [Circle; 3] {
        gap.members.map(|i| self.base_disks[i])
    }

    pub fn max_base_radius(&self) -> f64 {
        self.base_disks.iter().map(|c| c.radius).fold(0.0, f64::max)
    }

    /// `(min, max)` corners of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.base_disks {
            lo.x = lo.x.min(c.center.x - c.radius);
            lo.y = lo.y.min(c.center.y - c.radius);
            hi.x = hi.x.max(c.center.x + c.radius);
            hi.y = hi.y.max(c.center.y + c.radius);
        }
        (lo, hi)
    }

    /// Membership in the closed domain: a base disk, or a gap (inside the
    /// triangle of its centers and outside its three disks).
    pub fn contains(&self, p: Vec2) -> bool {
        self.base_disks.iter().any(|c| c.contains(p))
            || self.gaps.iter().any(|g| {
                let [a, b, c] = self.gap_circles(g);
                in_triangle(p, a.center, b.center, c.center)
            })
    }

    /// Checks every domain invariant; an empty list means valid.
    pub fn validate(&self, tol: &TangencyTolerance) -> Vec<Violation> {
        let mut out = Vec::new();
        let disks = &self.base_disks;
        if disks.is_empty() {
            out.push(Violation::NoDisks);
        }
        for (i, j) in candidate_pairs(disks, tol) {
            if !is_disjoint(&disks[i], &disks[j], tol) {
                out.push(Violation::Overlap {
                    pair: (i, j),
                    residual: contact_residual(&disks[i], &disks[j]),
                });
            }
        }
        for (g, gap) in self.gaps.iter().enumerate() {
            if let Some(&index) = gap.members.iter().find(|&&m| m >= disks.len()) {
                out.push(Violation::GapIndexOutOfRange { gap: g, index });
                continue;
            }
            let [a, b, c] = gap.members;
            if a == b || b == c || a == c {
                out.push(Violation::GapRepeatsMember { gap: g });
                continue;
            }
            let mut tangent = true;
            for (p, q) in [(a, b), (b, c), (a, c)] {
                if !is_tangent(&disks[p], &disks[q], tol) {
                    tangent = false;
                    out.push(Violation::GapNotTangent {
                        gap: g,
                        pair: (p, q),
                        residual: contact_residual(&disks[p], &disks[q]),
                    });
                }
            }
            if tangent {
                let [ca, cb, cc] = self.gap_circles(gap);
                let points = [
                    ca.tangency_point(&cb),
                    cb.tangency_point(&cc),
                    ca.tangency_point(&cc),
                ];
                let scale = ca.radius.min(cb.radius).min(cc.radius);
                let separation = points[0]
                    .dist(points[1])
                    .min(points[1].dist(points[2]))
                    .min(points[0].dist(points[2]));
                if separation <= tol.slack(scale) {
                    out.push(Violation::GapPointsCoincide { gap: g, separation });
                }
            }
        }
        if out.is_empty() {
            let recomputed = area_of(disks, &self.gaps);
            if fabs(recomputed - self.exact_area) > 1e-12 * recomputed {
                out.push(Violation::AreaMismatch { stored: self.exact_area, recomputed });
            }
        }
        out
    }
}

fn area_of(disks: &[Circle], gaps: &[Gap]) -> f64 {
    let mut total: CompensatedSum = disks.iter().map(Circle::area).collect();
    for g in gaps {
        if g.members.iter().all(|&m| m < disks.len()) {
            let [a, b, c] = g.members.map(|i| disks[i].radius);
            total.add(gap_area(a, b, c));
        }
    }
    total.value()
}

pub(crate) fn in_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

/// Pairs whose x-extents come within tolerance of each other.
fn candidate_pairs(disks: &[Circle], tol: &TangencyTolerance) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..disks.len()).collect();
    order.sort_by(|&a, &b| {
        let ka = disks[a].center.x - disks[a].radius;
        let kb = disks[b].center.x - disks[b].radius;
        ka.total_cmp(&kb).then(a.cmp(&b))
    });
    let max_r = disks.iter().map(|c| c.radius).fold(0.0, f64::max);
    let mut pairs = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let reach = disks[i].center.x + disks[i].radius + tol.slack(2.0 * max_r);
        for &j in &order[pos + 1..] {
            if disks[j].center.x - disks[j].radius > reach {
                break;
            }
            pairs.push((i.min(j), i.max(j)));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Gaps of a disk family: triangles of the tangency graph whose enclosed
/// region is not covered by another disk. Sorted by member indices.
pub fn detect_gaps(disks: &[Circle], tol: &TangencyTolerance) -> Result<Vec<Gap>, GeometryError> {
    let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); disks.len()];
    for (i, j) in candidate_pairs(disks, tol) {
        if !is_disjoint(&disks[i], &disks[j], tol) {
            return Err(GeometryError::Overlap {
                pair: (i, j),
                depth: -contact_residual(&disks[i], &disks[j]),
            });
        }
        if is_tangent(&disks[i], &disks[j], tol) {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    let mut gaps = Vec::new();
    for i in 0..disks.len() {
        for &j in adjacency[i].iter().filter(|&&j| j > i) {
            for &l in adjacency[j].iter().filter(|&&l| l > j) {
                if adjacency[i].binary_search(&l).is_err() {
                    continue;
                }
                let witness = inscribed_circle(&disks[i], &disks[j], &disks[l], tol)?.center;
                let covered = disks.iter().enumerate().any(|(m, c)| {
                    m != i && m != j && m != l && c.center.dist(witness) < c.radius
                });
                if !covered {
                    gaps.push(Gap::new(i, j, l));
                }
            }
        }
    }
    gaps.sort_unstable();
    Ok(gaps)
}

/// Three mutually tangent circles: the first at the origin, the second on
/// the positive x-axis, the third above it.
pub fn build_three_tangent(r1: f64, r2: f64, r3: f64) -> Result<DiskCoveredDomain, GeometryError> {
    for r in [r1, r2, r3] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(GeometryError::InvalidInput { what: "radius", value: r });
        }
    }
    let d = r1 + r2;
    let (d13, d23) = (r1 + r3, r2 + r3);
    let x = (d13 * d13 - d23 * d23 + d * d) / (2.0 * d);
    let y = sqrt((d13 * d13 - x * x).max(0.0));
    let disks = alloc::vec![
        Circle::new(Vec2::new(0.0, 0.0), r1)?,
        Circle::new(Vec2::new(d, 0.0), r2)?,
        Circle::new(Vec2::new(x, y), r3)?,
    ];
    Ok(DiskCoveredDomain::from_parts(disks, alloc::vec![Gap::new(0, 1, 2)]))
}

/// Unit circles on a `(m+1) x (n+1)` square grid of spacing 2, with a
/// filler circle of radius `sqrt(2) - 1` in every cell.
pub fn build_square_lattice(m: usize, n: usize) -> Result<DiskCoveredDomain, GeometryError> {
    if m == 0 || n == 0 {
        return Err(GeometryError::InvalidInput { what: "lattice size", value: 0.0 });
    }
    let mut disks = Vec::with_capacity((m + 1) * (n + 1) + m * n);
    for j in 0..=n {
        for i in 0..=m {
            disks.push(Circle::new(Vec2::new(2.0 * i as f64, 2.0 * j as f64), 1.0)?);
        }
    }
    for j in 0..n {
        for i in 0..m {
            let center = Vec2::new(2.0 * i as f64 + 1.0, 2.0 * j as f64 + 1.0);
            disks.push(Circle::new(center, SQRT_2 - 1.0)?);
        }
    }
    DiskCoveredDomain::with_detected_gaps(disks, &TangencyTolerance::default())
}

/// Unit circles on a triangular lattice of spacing 2: `rows` rows of `cols`
/// circles, odd rows shifted right by one radius.
pub fn build_hex_lattice(rows: usize, cols: usize) -> Result<DiskCoveredDomain, GeometryError> {
    if rows == 0 || cols == 0 {
        return Err(GeometryError::InvalidInput { what: "lattice size", value: 0.0 });
    }
    let h = sqrt(3.0);
    let mut disks = Vec::with_capacity(rows * cols);
    for j in 0..rows {
        let shift = if j % 2 == 1 { 1.0 } else { 0.0 };
        for i in 0..cols {
            disks.push(Circle::new(Vec2::new(2.0 * i as f64 + shift, h * j as f64), 1.0)?);
        }
    }
    DiskCoveredDomain::with_detected_gaps(disks, &TangencyTolerance::default())
}

/// Gap list with indices renumbered canonically (each triple sorted).
pub fn canonical_gaps(gaps: &[Gap]) -> Vec<Gap> {
    let mut out: Vec<Gap> = gaps.iter().map(|g| g.sorted()).collect();
    out.sort_unstable();
    out
}
