//! Seeded Voronoi tessellation of a rectangle with Lloyd relaxation.
//!
//! Each cell starts as the domain rectangle and is clipped by the bisector
//! half-planes of nearby seeds, visited ring by ring on a bucket grid until
//! no unvisited seed can reach the current polygon.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{polygon_area_centroid, Bounds, PolyMesh};
use crate::error::{Error, Result};

struct BucketGrid {
    bounds: Bounds,
    dims: [usize; 2],
    size: [f64; 2],
    buckets: Vec<Vec<usize>>,
}

impl BucketGrid {
    fn new(bounds: Bounds, seeds: &[[f64; 2]]) -> Self {
        let [w, h] = bounds.extent();
        let per_axis = (seeds.len() as f64).sqrt().max(1.0);
        let aspect = (w / h).sqrt();
        let dims = [
            ((per_axis * aspect).ceil() as usize).max(1),
            ((per_axis / aspect).ceil() as usize).max(1),
        ];
        let size = [w / dims[0] as f64, h / dims[1] as f64];
        let mut grid = BucketGrid {
            bounds,
            dims,
            size,
            buckets: vec![Vec::new(); dims[0] * dims[1]],
        };
        for (i, s) in seeds.iter().enumerate() {
            let b = grid.locate(*s);
            grid.buckets[b[1] * dims[0] + b[0]].push(i);
        }
        grid
    }

    fn locate(&self, p: [f64; 2]) -> [usize; 2] {
        let mut out = [0; 2];
        for a in 0..2 {
            let t = ((p[a] - self.bounds.lo[a]) / self.size[a]).floor();
            out[a] = (t.max(0.0) as usize).min(self.dims[a] - 1);
        }
        out
    }
}

/// Keeps the part of `poly` on the side of `seed` of the bisector with `other`.
fn clip(poly: &[[f64; 2]], seed: [f64; 2], other: [f64; 2], eps: f64) -> Vec<[f64; 2]> {
    let d = [other[0] - seed[0], other[1] - seed[1]];
    let m = [0.5 * (seed[0] + other[0]), 0.5 * (seed[1] + other[1])];
    let len = d[0].hypot(d[1]);
    let side = |p: [f64; 2]| ((p[0] - m[0]) * d[0] + (p[1] - m[1]) * d[1]) / len;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let sp = side(p);
        let sq = side(q);
        if sp <= eps {
            out.push(p);
        }
        // an endpoint inside the tolerance band already is the crossing
        if (sp < -eps && sq > eps) || (sp > eps && sq < -eps) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn voronoi_cell(
    i: usize,
    seeds: &[[f64; 2]],
    grid: &BucketGrid,
    eps: f64,
) -> Vec<[f64; 2]> {
    let b = grid.bounds;
    let s = seeds[i];
    let mut poly = vec![b.lo, [b.hi[0], b.lo[1]], b.hi, [b.lo[0], b.hi[1]]];
    let home = grid.locate(s);
    let min_size = grid.size[0].min(grid.size[1]);
    let max_ring = grid.dims[0].max(grid.dims[1]);
    for r in 0..=max_ring {
        let r = r as isize;
        for dj in -r..=r {
            for di in -r..=r {
                if di.abs() != r && dj.abs() != r {
                    continue;
                }
                let bi = home[0] as isize + di;
                let bj = home[1] as isize + dj;
                if bi < 0 || bj < 0 || bi >= grid.dims[0] as isize || bj >= grid.dims[1] as isize {
                    continue;
                }
                for &j in &grid.buckets[bj as usize * grid.dims[0] + bi as usize] {
                    if j != i {
                        poly = clip(&poly, s, seeds[j], eps);
                    }
                }
            }
        }
        let reach = poly
            .iter()
            .map(|p| (p[0] - s[0]).hypot(p[1] - s[1]))
            .fold(0.0_f64, f64::max);
        if r as f64 * min_size >= 2.0 * reach {
            break;
        }
    }
    poly
}

fn tessellate(seeds: &[[f64; 2]], bounds: Bounds, eps: f64) -> Vec<Vec<[f64; 2]>> {
    let grid = BucketGrid::new(bounds, seeds);
    (0..seeds.len())
        .into_par_iter()
        .map(|i| voronoi_cell(i, seeds, &grid, eps))
        .collect()
}

/// Merges vertices closer than `tol` and rewrites the loops against the
/// shared vertex table.
fn weld(polys: &[Vec<[f64; 2]>], tol: f64) -> (Vec<[f64; 2]>, Vec<Vec<usize>>) {
    let key = |p: [f64; 2]| ((p[0] / tol).floor() as i64, (p[1] / tol).floor() as i64);
    let mut table: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut loops = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut lp: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(ids) = table.get(&(kx + dx, ky + dy)) {
                        for &id in ids {
                            let v = vertices[id];
                            if (v[0] - p[0]).abs() <= tol && (v[1] - p[1]).abs() <= tol {
                                found = Some(id);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                vertices.push(p);
                table.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if lp.last() != Some(&id) {
                lp.push(id);
            }
        }
        while lp.len() > 1 && lp.first() == lp.last() {
            lp.pop();
        }
        loops.push(lp);
    }
    (vertices, loops)
}

/// Clipped Voronoi diagram of `n_seeds` uniformly drawn seeds after
/// `lloyd_iters` centroidal relaxation sweeps.
pub fn build_voronoi(
    bounds: Bounds,
    n_seeds: usize,
    lloyd_iters: usize,
    seed: u64,
) -> Result<PolyMesh> {
    if n_seeds < 4 {
        return Err(Error::InvalidConfig(format!(
            "Voronoi mesh needs at least 4 seeds, got {n_seeds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<[f64; 2]> = (0..n_seeds)
        .map(|_| {
            [
                rng.random_range(bounds.lo[0]..bounds.hi[0]),
                rng.random_range(bounds.lo[1]..bounds.hi[1]),
            ]
        })
        .collect();
    build_voronoi_from_seeds(bounds, seeds, lloyd_iters)
}

/// Voronoi mesh of explicit seeds; see [`build_voronoi`].
pub fn build_voronoi_from_seeds(
    bounds: Bounds,
    mut seeds: Vec<[f64; 2]>,
    lloyd_iters: usize,
) -> Result<PolyMesh> {
    let scale = bounds.extent()[0].max(bounds.extent()[1]);
    let eps = 1e-13 * scale;
    let area_floor = 1e-12 * bounds.area();
    let mut polys = tessellate(&seeds, bounds, eps);
    for _ in 0..lloyd_iters {
        for (k, poly) in polys.iter().enumerate() {
            let (area, c) = if poly.len() >= 3 {
                polygon_area_centroid(poly)
            } else {
                (0.0, seeds[k])
            };
            if !(area > area_floor) {
                return Err(Error::DegenerateCell { cell: k, area });
            }
            seeds[k] = c;
        }
        polys = tessellate(&seeds, bounds, eps);
    }
    let (vertices, loops) = weld(&polys, 1e-9 * scale);
    for (k, lp) in loops.iter().enumerate() {
        if lp.len() < 3 {
            return Err(Error::DegenerateCell { cell: k, area: 0.0 });
        }
    }
    PolyMesh::from_polygons(vertices, loops, [false, false])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_center_seeds_give_four_squares() {
        let b = Bounds::square(0.0, 1.0).unwrap();
        let seeds = vec![[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]];
        let m = build_voronoi_from_seeds(b, seeds, 0).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.vertices.len(), 9);
        for c in &m.cells {
            assert!((c.area - 0.25).abs() < 1e-15);
            assert_eq!(c.vertices.len(), 4);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let b = Bounds::square(-1.0, 1.0).unwrap();
        let a = build_voronoi(b, 200, 5, 7).unwrap();
        let c = build_voronoi(b, 200, 5, 7).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn too_few_seeds() {
        let b = Bounds::square(0.0, 1.0).unwrap();
        assert!(build_voronoi(b, 3, 0, 1).is_err());
    }
}
