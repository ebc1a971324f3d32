//! Discrete-grid geometry used by the triangle and hull schemes.
//!
//! Every containment test is decided at cell centers with integer cross
//! products. Boundaries are inclusive: a cell whose center lies on an edge or
//! a vertex belongs to the shape.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("degenerate segment: endpoints coincide at {0:?}")]
    DegenerateSegment(GridPoint),
}

/// A cell on a `w × h` grid, addressed by column and row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub col: i32,
    pub row: i32,
}

impl GridPoint {
    pub const fn new(col: i32, row: i32) -> Self {
        Self { col, row }
    }

    pub fn on_grid(&self, width: i32, height: i32) -> bool {
        (0..width).contains(&self.col) && (0..height).contains(&self.row)
    }

    /// Row-major cell index on a grid of the given width.
    pub fn index(&self, width: i32) -> usize {
        (self.row * width + self.col) as usize
    }

    pub fn from_index(index: usize, width: i32) -> Self {
        let index = index as i32;
        Self::new(index % width, index / width)
    }
}

/// Twice the signed area of `o, a, b`; positive when `a → b` turns counterclockwise around `o`.
#[inline]
pub fn cross(o: GridPoint, a: GridPoint, b: GridPoint) -> i64 {
    let (ax, ay) = ((a.col - o.col) as i64, (a.row - o.row) as i64);
    let (bx, by) = ((b.col - o.col) as i64, (b.row - o.row) as i64);
    ax * by - ay * bx
}

#[inline]
fn in_bounding_box(p: GridPoint, points: &[GridPoint]) -> bool {
    let (mut min_c, mut max_c, mut min_r, mut max_r) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for q in points {
        min_c = min_c.min(q.col);
        max_c = max_c.max(q.col);
        min_r = min_r.min(q.row);
        max_r = max_r.max(q.row);
    }
    (min_c..=max_c).contains(&p.col) && (min_r..=max_r).contains(&p.row)
}

/// A triangle with grid-cell vertices. Collinear and coincident vertices are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangle(pub [GridPoint; 3]);

impl Triangle {
    pub const fn new(a: GridPoint, b: GridPoint, c: GridPoint) -> Self {
        Self([a, b, c])
    }

    pub fn is_degenerate(&self) -> bool {
        let [a, b, c] = self.0;
        cross(a, b, c) == 0
    }

    /// Boundary-inclusive containment of a cell center.
    ///
    /// For a collinear triangle the sign test accepts the whole supporting
    /// line, so the bounding box clips it back to the spanned segment.
    pub fn contains(&self, p: GridPoint) -> bool {
        let [a, b, c] = self.0;
        let d1 = cross(a, b, p);
        let d2 = cross(b, c, p);
        let d3 = cross(c, a, p);
        let has_neg = d1 < 0 || d2 < 0 || d3 < 0;
        let has_pos = d1 > 0 || d2 > 0 || d3 > 0;
        !(has_neg && has_pos) && in_bounding_box(p, &self.0)
    }

    fn clipped_box(&self, width: i32, height: i32) -> (i32, i32, i32, i32) {
        let cols = self.0.iter().map(|p| p.col);
        let rows = self.0.iter().map(|p| p.row);
        let min_c = cols.clone().min().unwrap_or(0).max(0);
        let max_c = cols.max().unwrap_or(0).min(width - 1);
        let min_r = rows.clone().min().unwrap_or(0).max(0);
        let max_r = rows.max().unwrap_or(0).min(height - 1);
        (min_c, max_c, min_r, max_r)
    }

    /// Cells covered by the triangle as a row-major bitmask. Requires `width * height <= 128`.
    pub fn cell_mask(&self, width: i32, height: i32) -> u128 {
        assert!(width * height <= 128, "grid too large for a u128 cell mask");
        let (min_c, max_c, min_r, max_r) = self.clipped_box(width, height);
        let mut mask = 0u128;
        for row in min_r..=max_r {
            for col in min_c..=max_c {
                let p = GridPoint::new(col, row);
                if self.contains(p) {
                    mask |= 1u128 << p.index(width);
                }
            }
        }
        mask
    }
}

/// Every grid cell whose center lies inside or on the boundary of `t`.
pub fn cells_in_triangle(t: &Triangle, width: i32, height: i32) -> BTreeSet<GridPoint> {
    let (min_c, max_c, min_r, max_r) = t.clipped_box(width, height);
    (min_r..=max_r)
        .flat_map(|row| (min_c..=max_c).map(move |col| GridPoint::new(col, row)))
        .filter(|p| t.contains(*p))
        .collect()
}

/// Cell-level disjointness: no cell is covered by both triangles.
pub fn triangles_disjoint(a: &Triangle, b: &Triangle, width: i32, height: i32) -> bool {
    cells_in_triangle(a, width, height).is_disjoint(&cells_in_triangle(b, width, height))
}

/// Cells strictly between `p` and `q` whose centers lie on the segment, ordered from `p`.
pub fn cells_on_segment(p: GridPoint, q: GridPoint) -> Result<Vec<GridPoint>, GeometryError> {
    if p == q {
        return Err(GeometryError::DegenerateSegment(p));
    }
    let mut cells: Vec<GridPoint> = (p.row.min(q.row)..=p.row.max(q.row))
        .flat_map(|row| (p.col.min(q.col)..=p.col.max(q.col)).map(move |col| GridPoint::new(col, row)))
        .filter(|&c| c != p && c != q && cross(p, q, c) == 0)
        .collect();
    cells.sort_by_key(|c| (c.col - p.col).abs() + (c.row - p.row).abs());
    Ok(cells)
}

/// Convex hull of a set of grid points, vertices in counterclockwise order with
/// collinear points removed.
///
/// Fewer than three distinct points, or an all-collinear input, yields a
/// degenerate hull of one or two vertices (a point or a segment).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexHull {
    vertices: Vec<GridPoint>,
}

impl ConvexHull {
    /// Andrew's monotone chain. Returns `None` for an empty input.
    pub fn from_points(points: &[GridPoint]) -> Option<Self> {
        let mut pts: Vec<GridPoint> = points.to_vec();
        pts.sort_unstable();
        pts.dedup();
        if pts.is_empty() {
            return None;
        }
        if pts.len() < 3 {
            return Some(Self { vertices: pts });
        }
        let mut lower: Vec<GridPoint> = Vec::with_capacity(pts.len());
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<GridPoint> = Vec::with_capacity(pts.len());
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() < 3 {
            // all collinear: keep the two extreme points
            let (first, last) = (pts[0], pts[pts.len() - 1]);
            return Some(Self { vertices: vec![first, last] });
        }
        Some(Self { vertices: lower })
    }

    pub fn vertices(&self) -> &[GridPoint] {
        &self.vertices
    }

    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Boundary-inclusive containment.
    pub fn contains(&self, p: GridPoint) -> bool {
        match self.vertices.as_slice() {
            [] => false,
            [v] => *v == p,
            [a, b] => cross(*a, *b, p) == 0 && in_bounding_box(p, &[*a, *b]),
            vs => {
                let n = vs.len();
                (0..n).all(|i| cross(vs[i], vs[(i + 1) % n], p) >= 0)
            }
        }
    }
}

/// Icon-level disjointness: no placed position lies inside or on both hulls.
pub fn hulls_disjoint(a: &ConvexHull, b: &ConvexHull, placement: &[GridPoint]) -> bool {
    !placement.iter().any(|&p| a.contains(p) && b.contains(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(col: i32, row: i32) -> GridPoint {
        GridPoint::new(col, row)
    }

    fn tri(a: (i32, i32), b: (i32, i32), c: (i32, i32)) -> Triangle {
        Triangle::new(gp(a.0, a.1), gp(b.0, b.1), gp(c.0, c.1))
    }

    /// Barycentric oracle over rationals: p = a + s(b-a) + t(c-a) with s,t ≥ 0, s+t ≤ 1.
    fn barycentric_inside(t: &Triangle, p: GridPoint) -> bool {
        let [a, b, c] = t.0;
        let det = cross(a, b, c);
        assert_ne!(det, 0);
        let s_num = cross(a, p, c);
        let t_num = cross(a, b, p);
        let (s_num, t_num, det) = if det < 0 { (-s_num, -t_num, -det) } else { (s_num, t_num, det) };
        s_num >= 0 && t_num >= 0 && s_num + t_num <= det
    }

    #[test]
    fn fully_degenerate_triangle_is_its_vertex() {
        let t = tri((0, 0), (0, 0), (0, 0));
        assert_eq!(cells_in_triangle(&t, 10, 8), BTreeSet::from([gp(0, 0)]));
    }

    #[test]
    fn right_triangle_matches_barycentric_oracle() {
        let t = tri((0, 0), (4, 0), (0, 4));
        let expected: BTreeSet<GridPoint> =
            (0..8).flat_map(|r| (0..10).map(move |c| gp(c, r))).filter(|p| barycentric_inside(&t, *p)).collect();
        // 5 + 4 + 3 + 2 + 1 cells on or under the hypotenuse
        assert_eq!(expected.len(), 15);
        assert_eq!(cells_in_triangle(&t, 10, 8), expected);
    }

    #[test]
    fn collinear_triangle_rasterizes_segment() {
        let t = tri((0, 0), (2, 2), (4, 4));
        let expected: BTreeSet<_> = (0..=4).map(|i| gp(i, i)).collect();
        assert_eq!(cells_in_triangle(&t, 10, 8), expected);
        // vertex order does not matter, and the middle vertex need not be listed in the middle
        let t2 = tri((2, 2), (4, 4), (0, 0));
        assert_eq!(cells_in_triangle(&t2, 10, 8), expected);
    }

    #[test]
    fn mask_agrees_with_set() {
        let t = tri((1, 7), (9, 2), (3, 0));
        let mask = t.cell_mask(10, 8);
        let set = cells_in_triangle(&t, 10, 8);
        assert_eq!(mask.count_ones() as usize, set.len());
        for p in set {
            assert!(mask & (1u128 << p.index(10)) != 0);
        }
    }

    #[test]
    fn triangle_disjointness_examples() {
        let a = tri((0, 0), (1, 0), (0, 1));
        assert!(!triangles_disjoint(&a, &a, 10, 8));
        let b = tri((9, 7), (8, 7), (9, 6));
        assert!(triangles_disjoint(&a, &b, 10, 8));
        assert!(triangles_disjoint(&b, &a, 10, 8));
    }

    #[test]
    fn segment_examples() {
        assert_eq!(cells_on_segment(gp(0, 0), gp(0, 3)).unwrap(), vec![gp(0, 1), gp(0, 2)]);
        assert_eq!(cells_on_segment(gp(0, 0), gp(3, 3)).unwrap(), vec![gp(1, 1), gp(2, 2)]);
        assert_eq!(cells_on_segment(gp(0, 0), gp(2, 5)).unwrap(), vec![]);
        assert_eq!(cells_on_segment(gp(1, 1), gp(1, 1)), Err(GeometryError::DegenerateSegment(gp(1, 1))));
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let pts = [gp(0, 0), gp(2, 0), gp(4, 0), gp(4, 4), gp(0, 4), gp(2, 2)];
        let hull = ConvexHull::from_points(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 4);
        assert!(hull.contains(gp(2, 0)));
        assert!(hull.contains(gp(2, 2)));
        assert!(!hull.contains(gp(5, 2)));
    }

    #[test]
    fn collinear_hull_is_a_segment() {
        let hull = ConvexHull::from_points(&[gp(0, 0), gp(3, 3), gp(1, 1)]).unwrap();
        assert!(hull.is_degenerate());
        assert!(hull.contains(gp(2, 2)));
        assert!(!hull.contains(gp(4, 4)));
        assert!(!hull.contains(gp(1, 2)));
    }

    #[test]
    fn hull_disjointness_examples() {
        let placement: Vec<GridPoint> = (0..8).flat_map(|r| (0..14).map(move |c| gp(c, r))).collect();
        let a = ConvexHull::from_points(&[gp(0, 0), gp(3, 0), gp(0, 2)]).unwrap();
        let b = ConvexHull::from_points(&[gp(13, 7), gp(10, 7), gp(13, 5)]).unwrap();
        assert!(!hulls_disjoint(&a, &a, &placement));
        assert!(hulls_disjoint(&a, &b, &placement));
        assert!(hulls_disjoint(&b, &a, &placement));
    }
}
