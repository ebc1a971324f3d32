use hbat_core::geometry::{cells_in_triangle, ConvexHull, GridPoint, Triangle};
use hbat_core::s3pas::expected_triangle_area;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// direct six-fold sum over {1/n..n/n}^6, no difference-pair folding
fn area_oracle(n: u32) -> f64 {
    let n = n as i64;
    let mut total: i64 = 0;
    for f in 1..=n {
        for g in 1..=n {
            for h in 1..=n {
                for i in 1..=n {
                    for j in 1..=n {
                        for k in 1..=n {
                            total += ((f - g) * (i - k) - (f - h) * (i - j)).abs();
                        }
                    }
                }
            }
        }
    }
    total as f64 / (2.0 * (n * n) as f64 * (n as f64).powi(6))
}

#[test]
fn expected_area_matches_brute_force_sum() {
    for n in [1, 2, 3, 5, 9] {
        let fast = expected_triangle_area(n);
        let slow = area_oracle(n);
        assert!((fast - slow).abs() < 1e-9, "n={n}: {fast} vs {slow}");
    }
}

#[test]
fn expected_area_n9_magnitude() {
    let v = expected_triangle_area(9);
    assert!((v - 0.0753).abs() < 5e-4, "{v}");
}

fn gp(col: i32, row: i32) -> GridPoint {
    GridPoint::new(col, row)
}

// rational barycentric test, boundary inclusive
fn in_triangle_oracle(t: &Triangle, p: GridPoint) -> bool {
    let [a, b, c] = t.0;
    let det = (b.col - a.col) as i64 * (c.row - a.row) as i64 - (c.col - a.col) as i64 * (b.row - a.row) as i64;
    if det == 0 {
        // degenerate: on one of the three segments
        let on_seg = |u: GridPoint, v: GridPoint| {
            let cr = (v.col - u.col) as i64 * (p.row - u.row) as i64 - (v.row - u.row) as i64 * (p.col - u.col) as i64;
            cr == 0
                && p.col >= u.col.min(v.col)
                && p.col <= u.col.max(v.col)
                && p.row >= u.row.min(v.row)
                && p.row <= u.row.max(v.row)
        };
        return on_seg(a, b) || on_seg(b, c) || on_seg(a, c);
    }
    let l1 = (b.col - p.col) as i64 * (c.row - p.row) as i64 - (c.col - p.col) as i64 * (b.row - p.row) as i64;
    let l2 = (c.col - p.col) as i64 * (a.row - p.row) as i64 - (a.col - p.col) as i64 * (c.row - p.row) as i64;
    let l3 = det - l1 - l2;
    if det > 0 {
        l1 >= 0 && l2 >= 0 && l3 >= 0
    } else {
        l1 <= 0 && l2 <= 0 && l3 <= 0
    }
}

#[test]
fn triangle_cells_match_barycentric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let mut v = || gp(rng.gen_range(0..10), rng.gen_range(0..8));
        let t = Triangle::new(v(), v(), v());
        let got = cells_in_triangle(&t, 10, 8);
        for row in 0..8 {
            for col in 0..10 {
                let p = gp(col, row);
                assert_eq!(got.contains(&p), in_triangle_oracle(&t, p), "{t:?} at {p:?}");
            }
        }
    }
}

// a point is in the hull of S iff it is in a triangle on three points of S
fn in_hull_oracle(points: &[GridPoint], p: GridPoint) -> bool {
    let n = points.len();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                if in_triangle_oracle(&Triangle::new(points[i], points[j], points[k]), p) {
                    return true;
                }
            }
        }
    }
    false
}

#[test]
fn hull_containment_matches_caratheodory_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let size = rng.gen_range(1..=7);
        let pts: Vec<GridPoint> = (0..size).map(|_| gp(rng.gen_range(0..14), rng.gen_range(0..8))).collect();
        let hull = ConvexHull::from_points(&pts).unwrap();
        for row in 0..8 {
            for col in 0..14 {
                let p = gp(col, row);
                assert_eq!(hull.contains(p), in_hull_oracle(&pts, p), "{pts:?} at {p:?}");
            }
        }
    }
}

#[test]
fn collinear_hull_matches_oracle() {
    let pts = [gp(1, 1), gp(3, 3), gp(5, 5), gp(2, 2)];
    let hull = ConvexHull::from_points(&pts).unwrap();
    assert!(hull.is_degenerate());
    for row in 0..8 {
        for col in 0..8 {
            assert_eq!(hull.contains(gp(col, row)), in_hull_oracle(&pts, gp(col, row)));
        }
    }
}
