//! Circle geometry: tangency predicates, the Descartes curvature and center
//! solvers, and areas of curvilinear triangles.

use core::fmt;

use crate::math::{atan, fabs, sqrt, Vec2, PI};

/// A circle bounding a disk of positive area.
///
/// Radius and curvature are stored together; circles produced by the
/// Descartes solver keep the exact curvature the solver computed and derive
/// the radius from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
    pub curvature: f64,
}

impl Circle {
    pub fn new(center: Vec2, radius: f64) -> Result<Circle, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidInput { what: "radius", value: radius });
        }
        if !(center.x.is_finite() && center.y.is_finite()) {
            return Err(GeometryError::InvalidInput { what: "center", value: f64::NAN });
        }
        Ok(Circle { center, radius, curvature: 1.0 / radius })
    }

    pub fn from_curvature(center: Vec2, curvature: f64) -> Result<Circle, GeometryError> {
        if !(curvature > 0.0 && curvature.is_finite()) {
            return Err(GeometryError::InvalidInput { what: "curvature", value: curvature });
        }
        Ok(Circle { center, radius: 1.0 / curvature, curvature })
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// Closed-disk membership.
    pub fn contains(&self, p: Vec2) -> bool {
        (p - self.center).norm_sq() <= self.radius * self.radius
    }

    /// Point of contact with `other`, on the segment between the centers.
    pub fn tangency_point(&self, other: &Circle) -> Vec2 {
        let d = other.center - self.center;
        self.center + d * (self.radius / d.norm())
    }
}

/// Numerical tangency policy. Defaults: 1e-9 relative, 1e-12 absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangencyTolerance {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for TangencyTolerance {
    fn default() -> Self {
        TangencyTolerance { relative: 1e-9, absolute: 1e-12 }
    }
}

impl TangencyTolerance {
    /// Allowed slack for a contact between radii summing to `radius_sum`.
    pub fn slack(&self, radius_sum: f64) -> f64 {
        self.absolute + self.relative * radius_sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryError {
    InvalidInput { what: &'static str, value: f64 },
    /// Two circles expected to touch do not; `residual` is
    /// `dist(centers) - (r1 + r2)`.
    NotTangent { pair: (usize, usize), residual: f64 },
    /// Neither Descartes center candidate is tangent to all three parents.
    Degenerate { residual: f64 },
    Overlap { pair: (usize, usize), depth: f64 },
}

impl core::error::Error for GeometryError {}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::InvalidInput { what, value } => {
                write!(f, "invalid {what}: {value}")
            }
            GeometryError::NotTangent { pair, residual } => write!(
                f,
                "circles {} and {} are not tangent (gap residual {residual:e})",
                pair.0, pair.1
            ),
            GeometryError::Degenerate { residual } => write!(
                f,
                "degenerate Descartes configuration (best tangency residual {residual:e})"
            ),
            GeometryError::Overlap { pair, depth } => write!(
                f,
                "circles {} and {} overlap (depth {depth:e})",
                pair.0, pair.1
            ),
        }
    }
}

/// Signed contact residual `dist(centers) - (r1 + r2)`.
pub fn contact_residual(c1: &Circle, c2: &Circle) -> f64 {
    c1.center.dist(c2.center) - (c1.radius + c2.radius)
}

pub fn is_tangent(c1: &Circle, c2: &Circle, tol: &TangencyTolerance) -> bool {
    fabs(contact_residual(c1, c2)) <= tol.slack(c1.radius + c2.radius)
}

/// True for disjoint or tangent circles; false only for overlap beyond
/// tolerance.
pub fn is_disjoint(c1: &Circle, c2: &Circle, tol: &TangencyTolerance) -> bool {
    contact_residual(c1, c2) >= -tol.slack(c1.radius + c2.radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Root {
    /// The circle inscribed in the curvilinear triangle (`+` branch).
    Inner,
    /// The circle enclosing all three (`-` branch; negative when it
    /// encloses them).
    Outer,
}

/// Fourth curvature of a Descartes configuration.
pub fn descartes_fourth_curvature(
    k1: f64,
    k2: f64,
    k3: f64,
    root: Root,
) -> Result<f64, GeometryError> {
    for k in [k1, k2, k3] {
        if !(k > 0.0 && k.is_finite()) {
            return Err(GeometryError::InvalidInput { what: "curvature", value: k });
        }
    }
    let disc = 2.0 * sqrt(k1 * k2 + k2 * k3 + k3 * k1);
    Ok(match root {
        Root::Inner => k1 + k2 + k3 + disc,
        Root::Outer => k1 + k2 + k3 - disc,
    })
}

/// Relative defect of the Descartes identity `(Σk)² = 2Σk²`.
pub fn descartes_defect(k: [f64; 4]) -> f64 {
    let s: f64 = k.iter().sum();
    let q: f64 = k.iter().map(|v| v * v).sum();
    fabs(s * s - 2.0 * q) / (s * s).max(2.0 * q)
}

/// The circle of curvature `k4` tangent to three mutually tangent circles
/// and lying in their curvilinear triangle.
pub fn descartes_fourth_center(
    c1: &Circle,
    c2: &Circle,
    c3: &Circle,
    k4: f64,
    tol: &TangencyTolerance,
) -> Result<Circle, GeometryError> {
    check_mutually_tangent(c1, c2, c3, tol)?;
    if !(k4 > 0.0 && k4.is_finite()) {
        return Err(GeometryError::InvalidInput { what: "curvature", value: k4 });
    }
    solve_center(c1, c2, c3, k4, tol)
}

/// Inscribed circle of the gap bounded by three mutually tangent circles.
///
/// Only the result is validated (against all three parents); callers that
/// hold parents of unknown provenance should use [`descartes_fourth_center`].
pub fn inscribed_circle(
    c1: &Circle,
    c2: &Circle,
    c3: &Circle,
    tol: &TangencyTolerance,
) -> Result<Circle, GeometryError> {
    let k4 = descartes_fourth_curvature(c1.curvature, c2.curvature, c3.curvature, Root::Inner)?;
    solve_center(c1, c2, c3, k4, tol)
}

fn check_mutually_tangent(
    c1: &Circle,
    c2: &Circle,
    c3: &Circle,
    tol: &TangencyTolerance,
) -> Result<(), GeometryError> {
    for (pair, a, b) in [((0, 1), c1, c2), ((1, 2), c2, c3), ((0, 2), c1, c3)] {
        if !is_tangent(a, b, tol) {
            return Err(GeometryError::NotTangent { pair, residual: contact_residual(a, b) });
        }
    }
    Ok(())
}

pub(crate) fn solve_center(
    c1: &Circle,
    c2: &Circle,
    c3: &Circle,
    k4: f64,
    tol: &TangencyTolerance,
) -> Result<Circle, GeometryError> {
    // Work relative to the smallest parent so the curvature-weighted
    // coordinates stay O(1) deep in the packing.
    let parents = [c1, c2, c3];
    let origin = parents
        .iter()
        .fold(c1, |best, c| if c.curvature > best.curvature { c } else { best })
        .center;
    let z: [Vec2; 3] = core::array::from_fn(|i| parents[i].center - origin);
    let k = [c1.curvature, c2.curvature, c3.curvature];
    // k4 z4 = Σ k_i z_i ± 2 sqrt(Σ k_i k_j z_i z_j), complex centers
    let linear = z[0] * k[0] + z[1] * k[1] + z[2] * k[2];
    let cross = z[0].cmul(z[1]) * (k[0] * k[1])
        + z[1].cmul(z[2]) * (k[1] * k[2])
        + z[2].cmul(z[0]) * (k[2] * k[0]);
    let root = cross.csqrt() * 2.0;
    let radius = 1.0 / k4;

    let mut best: Option<(f64, Vec2)> = None;
    for cand in [(linear + root) * radius, (linear - root) * radius] {
        let p = cand + origin;
        // Residual measured in units of each pair's allowed slack.
        let worst = parents
            .iter()
            .map(|c| fabs(p.dist(c.center) - (radius + c.radius)) / tol.slack(radius + c.radius))
            .fold(0.0, f64::max);
        if best.map_or(true, |(s, _)| worst < s) {
            best = Some((worst, p));
        }
    }
    let (scaled, center) = best.expect("two candidates");
    if !(scaled <= 1.0) {
        let residual = parents
            .iter()
            .map(|c| fabs(center.dist(c.center) - (radius + c.radius)))
            .fold(0.0, f64::max);
        return Err(GeometryError::Degenerate { residual });
    }
    Ok(Circle { center, radius, curvature: k4 })
}

/// Maximum tangency residual of `child` against its parents.
pub fn tangency_residual(child: &Circle, parents: [&Circle; 3]) -> f64 {
    parents
        .iter()
        .map(|c| fabs(contact_residual(child, c)))
        .fold(0.0, f64::max)
}

/// Area enclosed by three mutually externally tangent circles.
pub fn curvilinear_triangle_area(
    c1: &Circle,
    c2: &Circle,
    c3: &Circle,
    tol: &TangencyTolerance,
) -> Result<f64, GeometryError> {
    check_mutually_tangent(c1, c2, c3, tol)?;
    Ok(gap_area(c1.radius, c2.radius, c3.radius))
}

/// Curvilinear-triangle area from radii alone, assuming exact tangency.
///
/// The center triangle has sides `r2+r3`, `r1+r3`, `r1+r2`, inradius
/// `rho = sqrt(r1 r2 r3 / (r1+r2+r3))` and half-angles `tan(A_i/2) = rho / r_i`.
pub fn gap_area(r1: f64, r2: f64, r3: f64) -> f64 {
    // The triangle's incircle, of radius rho, touches each side at a
    // contact point, so the triangle splits into kites of area r_i rho and
    // the gap is a sum of non-negative terms r_i^2 (tan h_i - h_i).
    let rho = sqrt(r1 * r2 * r3 / (r1 + r2 + r3));
    [r1, r2, r3].iter().map(|&r| r * r * tan_minus_atan(rho / r)).sum()
}

/// `t - atan(t)` without cancellation for small `t`.
fn tan_minus_atan(t: f64) -> f64 {
    if t > 0.5 {
        return t - atan(t);
    }
    // t^3/3 - t^5/5 + t^7/7 - ...
    let t2 = t * t;
    let mut power = t * t2;
    let mut sum = 0.0;
    let mut k = 3.0;
    let mut sign = 1.0;
    loop {
        let term = power / k;
        sum += sign * term;
        if term <= 1e-17 * sum {
            return sum;
        }
        power *= t2;
        k += 2.0;
        sign = -sign;
    }
}
