//! Uniform-grid index over circles. Every circle is registered in each cell
//! its bounding box touches, so point queries only inspect one cell.

use alloc::vec::Vec;

use crate::geometry::Circle;
use crate::math::Vec2;

pub(crate) struct CircleGrid {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
    circles: Vec<Circle>,
}

impl CircleGrid {
    pub fn new(lo: Vec2, hi: Vec2, cell: f64) -> CircleGrid {
        let nx = (((hi.x - lo.x) / cell) as usize).clamp(1, 1 << 12);
        let ny = (((hi.y - lo.y) / cell) as usize).clamp(1, 1 << 12);
        // cell may grow when the clamp kicks in
        let cell = ((hi.x - lo.x) / nx as f64).max((hi.y - lo.y) / ny as f64);
        CircleGrid {
            origin: lo,
            cell,
            nx,
            ny,
            cells: alloc::vec![Vec::new(); nx * ny],
            circles: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn circles(&self) -> &[Circle] {
        &self.circles
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let i = ((p.x - self.origin.x) / self.cell).floor_clamp(self.nx);
        let j = ((p.y - self.origin.y) / self.cell).floor_clamp(self.ny);
        (i, j)
    }

    pub fn insert(&mut self, c: Circle) {
        let id = self.circles.len() as u32;
        let (i0, j0) = self.cell_of(c.center - Vec2::new(c.radius, c.radius));
        let (i1, j1) = self.cell_of(c.center + Vec2::new(c.radius, c.radius));
        for j in j0..=j1 {
            for i in i0..=i1 {
                self.cells[j * self.nx + i].push(id);
            }
        }
        self.circles.push(c);
    }

    /// True if `p` lies in some closed disk of the index.
    pub fn any_contains(&self, p: Vec2) -> bool {
        let (i, j) = self.cell_of(p);
        self.cells[j * self.nx + i].iter().any(|&id| self.circles[id as usize].contains(p))
    }

    /// `min(dist(p, center) - radius)` over all circles, or `cap` if every
    /// circle is farther than `cap`. Negative when `p` is inside a disk.
    pub fn min_surface_distance(&self, p: Vec2, cap: f64) -> f64 {
        let (ci, cj) = self.cell_of(p);
        let mut best = cap;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let i0 = ci as isize - ring as isize;
            let i1 = ci as isize + ring as isize;
            let j0 = cj as isize - ring as isize;
            let j1 = cj as isize + ring as isize;
            for j in j0..=j1 {
                if j < 0 || j >= self.ny as isize {
                    continue;
                }
                let on_edge_row = j == j0 || j == j1;
                let mut i = i0;
                while i <= i1 {
                    if i >= 0 && i < self.nx as isize {
                        for &id in &self.cells[j as usize * self.nx + i as usize] {
                            let c = &self.circles[id as usize];
                            let d = p.dist(c.center) - c.radius;
                            if d < best {
                                best = d;
                            }
                        }
                    }
                    // interior rows only need the two ring columns
                    i += if on_edge_row || i == i1 { 1 } else { i1 - i0 };
                }
            }
            // anything not yet seen has its bounding box outside the
            // (2 ring + 1)-cell block around p
            if best <= ring as f64 * self.cell {
                break;
            }
        }
        best
    }
}

trait FloorClamp {
    fn floor_clamp(self, n: usize) -> usize;
}

impl FloorClamp for f64 {
    fn floor_clamp(self, n: usize) -> usize {
        if self.is_nan() || self < 0.0 {
            0
        } else {
            (self as usize).min(n - 1)
        }
    }
}
