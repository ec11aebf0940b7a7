//! Structured rectangle meshes with optional local refinement.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::{ElemKind, Mesh};

/// Axis-aligned box inside which elements are refined to edge size `h`.
///
/// Grading is tensor-product: the band's x-interval refines the column
/// spacing and its y-interval refines the row spacing, with a geometric
/// transition back to the coarse size outside the band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementBand {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub h: f64,
}

/// Builds a structured quadrilateral mesh of `width` x `height` with `nx`
/// by `ny` coarse divisions, refined inside `bands`. Emits node sets
/// "left", "right", "bottom", "top" on the outline.
pub fn generate_rect_mesh(
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    kind: ElemKind,
    bands: &[RefinementBand],
) -> Result<Mesh> {
    if !(width > 0.0) || !(height > 0.0) {
        return Err(Error::mesh("mesh dimensions must be positive"));
    }
    if nx < 1 || ny < 1 {
        return Err(Error::mesh("nx and ny must be at least 1"));
    }
    let hx = width / nx as f64;
    let hy = height / ny as f64;
    let mut x_fine = Vec::new();
    let mut y_fine = Vec::new();
    for (i, b) in bands.iter().enumerate() {
        if !(b.h > 0.0) {
            return Err(Error::mesh(format!("refinement band {} has non-positive h", i + 1)));
        }
        if b.h > hx + 1e-12 * width || b.h > hy + 1e-12 * height {
            return Err(Error::mesh(format!(
                "refinement band {} target size {} exceeds the coarse spacing ({} x {})",
                i + 1,
                b.h,
                hx,
                hy
            )));
        }
        if b.x_min >= b.x_max || b.y_min >= b.y_max {
            return Err(Error::mesh(format!("refinement band {} is empty", i + 1)));
        }
        if b.x_min < -1e-12 || b.x_max > width + 1e-12 || b.y_min < -1e-12 || b.y_max > height + 1e-12 {
            return Err(Error::mesh(format!("refinement band {} extends outside the domain", i + 1)));
        }
        x_fine.push((b.x_min.max(0.0), b.x_max.min(width), b.h));
        y_fine.push((b.y_min.max(0.0), b.y_max.min(height), b.h));
    }
    let xs = axis_partition(width, nx, &x_fine);
    let ys = axis_partition(height, ny, &y_fine);
    Ok(build_grid(&xs, &ys, kind))
}

/// 1D breakpoints over [0, total]: uniform target `total/n` outside the
/// fine intervals, the interval's own h inside, geometric transition
/// between (ratio capped at 1.5, sizes rescaled to fit each gap exactly).
fn axis_partition(total: f64, n: usize, fine: &[(f64, f64, f64)]) -> Vec<f64> {
    let h0 = total / n as f64;
    // elementary segments between all interval endpoints
    let mut cuts = vec![0.0, total];
    for &(lo, hi, _) in fine {
        cuts.push(lo);
        cuts.push(hi);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * total.max(1.0));
    // target size per elementary segment: min h of covering intervals
    let nseg = cuts.len() - 1;
    let mut target = vec![h0; nseg];
    for s in 0..nseg {
        let mid = 0.5 * (cuts[s] + cuts[s + 1]);
        for &(lo, hi, h) in fine {
            if mid > lo && mid < hi {
                target[s] = target[s].min(h);
            }
        }
    }
    let mut points = vec![0.0];
    for s in 0..nseg {
        let len = cuts[s + 1] - cuts[s];
        let sizes = if target[s] < h0 {
            uniform_sizes(len, target[s])
        } else {
            let h_left = if s > 0 && target[s - 1] < h0 {
                Some(target[s - 1])
            } else {
                None
            };
            let h_right = if s + 1 < nseg && target[s + 1] < h0 {
                Some(target[s + 1])
            } else {
                None
            };
            graded_sizes(len, h_left, h_right, h0)
        };
        let mut x = cuts[s];
        for (k, dx) in sizes.iter().enumerate() {
            x = if k + 1 == sizes.len() { cuts[s + 1] } else { x + dx };
            points.push(x);
        }
    }
    points
}

fn uniform_sizes(len: f64, h: f64) -> Vec<f64> {
    let m = (len / h - 1e-9).ceil().max(1.0) as usize;
    vec![len / m as f64; m]
}

/// Cell sizes across a coarse gap, growing geometrically away from any
/// fine neighbour and capped at h0, then rescaled to fill `len` exactly.
fn graded_sizes(len: f64, h_left: Option<f64>, h_right: Option<f64>, h0: f64) -> Vec<f64> {
    const RATIO: f64 = 1.5;
    match (h_left, h_right) {
        (None, None) => uniform_sizes(len, h0),
        (Some(hl), None) => {
            let sizes = grow(len, hl, h0, RATIO);
            rescale(sizes, len)
        }
        (None, Some(hr)) => {
            let mut sizes = grow(len, hr, h0, RATIO);
            sizes.reverse();
            rescale(sizes, len)
        }
        (Some(hl), Some(hr)) => {
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut sl = hl;
            let mut sr = hr;
            let mut sum = 0.0;
            while sum < len {
                if sl <= sr {
                    sl = (sl * RATIO).min(h0);
                    left.push(sl);
                    sum += sl;
                } else {
                    sr = (sr * RATIO).min(h0);
                    right.push(sr);
                    sum += sr;
                }
            }
            right.reverse();
            left.extend(right);
            rescale(left, len)
        }
    }
}

fn grow(len: f64, h_start: f64, h0: f64, ratio: f64) -> Vec<f64> {
    let mut sizes = Vec::new();
    let mut s = h_start;
    let mut sum = 0.0;
    while sum < len {
        s = (s * ratio).min(h0);
        sizes.push(s);
        sum += s;
    }
    sizes
}

fn rescale(sizes: Vec<f64>, len: f64) -> Vec<f64> {
    let sum: f64 = sizes.iter().sum();
    let scale = len / sum;
    sizes.into_iter().map(|s| s * scale).collect()
}

fn build_grid(xs: &[f64], ys: &[f64], kind: ElemKind) -> Mesh {
    match kind {
        ElemKind::Quad4 => build_quad4(xs, ys),
        ElemKind::Quad8 => build_quad8(xs, ys),
    }
}

fn build_quad4(xs: &[f64], ys: &[f64]) -> Mesh {
    let ncx = xs.len();
    let ncy = ys.len();
    let mut coords = Vec::with_capacity(ncx * ncy);
    for &y in ys {
        for &x in xs {
            coords.push([x, y]);
        }
    }
    let node = |i: usize, j: usize| j * ncx + i;
    let mut connectivity = Vec::with_capacity((ncx - 1) * (ncy - 1) * 4);
    for j in 0..ncy - 1 {
        for i in 0..ncx - 1 {
            connectivity.extend_from_slice(&[
                node(i, j),
                node(i + 1, j),
                node(i + 1, j + 1),
                node(i, j + 1),
            ]);
        }
    }
    let mut node_sets = BTreeMap::new();
    node_sets.insert("left".into(), (0..ncy).map(|j| node(0, j)).collect());
    node_sets.insert("right".into(), (0..ncy).map(|j| node(ncx - 1, j)).collect());
    node_sets.insert("bottom".into(), (0..ncx).map(|i| node(i, 0)).collect());
    node_sets.insert("top".into(), (0..ncx).map(|i| node(i, ncy - 1)).collect());
    Mesh {
        coords,
        kind: ElemKind::Quad4,
        connectivity,
        node_sets,
        element_sets: BTreeMap::new(),
    }
}

/// Serendipity grid on half-integer indices: positions (i/2, j/2) with the
/// interior-center combination (odd i, odd j) absent.
fn build_quad8(xs: &[f64], ys: &[f64]) -> Mesh {
    let ncx = xs.len();
    let ncy = ys.len();
    let gx = 2 * ncx - 1;
    let gy = 2 * ncy - 1;
    let half = |arr: &[f64], idx: usize| -> f64 {
        if idx % 2 == 0 {
            arr[idx / 2]
        } else {
            0.5 * (arr[idx / 2] + arr[idx / 2 + 1])
        }
    };
    let mut id_of = vec![usize::MAX; gx * gy];
    let mut coords = Vec::new();
    for j in 0..gy {
        for i in 0..gx {
            if i % 2 == 1 && j % 2 == 1 {
                continue;
            }
            id_of[j * gx + i] = coords.len();
            coords.push([half(xs, i), half(ys, j)]);
        }
    }
    let node = |i: usize, j: usize| id_of[j * gx + i];
    let mut connectivity = Vec::with_capacity((ncx - 1) * (ncy - 1) * 8);
    for cy in 0..ncy - 1 {
        for cx in 0..ncx - 1 {
            let (i, j) = (2 * cx, 2 * cy);
            connectivity.extend_from_slice(&[
                node(i, j),
                node(i + 2, j),
                node(i + 2, j + 2),
                node(i, j + 2),
                node(i + 1, j),
                node(i + 2, j + 1),
                node(i + 1, j + 2),
                node(i, j + 1),
            ]);
        }
    }
    let mut node_sets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let collect = |pred: &dyn Fn(usize, usize) -> bool| -> Vec<usize> {
        let mut v = Vec::new();
        for j in 0..gy {
            for i in 0..gx {
                if id_of[j * gx + i] != usize::MAX && pred(i, j) {
                    v.push(id_of[j * gx + i]);
                }
            }
        }
        v
    };
    node_sets.insert("left".into(), collect(&|i, _| i == 0));
    node_sets.insert("right".into(), collect(&|i, _| i == gx - 1));
    node_sets.insert("bottom".into(), collect(&|_, j| j == 0));
    node_sets.insert("top".into(), collect(&|_, j| j == gy - 1));
    Mesh {
        coords,
        kind: ElemKind::Quad8,
        connectivity,
        node_sets,
        element_sets: BTreeMap::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_for_two_by_two() {
        let m4 = generate_rect_mesh(1.0, 1.0, 2, 2, ElemKind::Quad4, &[]).unwrap();
        assert_eq!(m4.nelems(), 4);
        assert_eq!(m4.nnodes(), 9);
        m4.validate().unwrap();

        let m8 = generate_rect_mesh(1.0, 1.0, 2, 2, ElemKind::Quad8, &[]).unwrap();
        assert_eq!(m8.nelems(), 4);
        assert_eq!(m8.nnodes(), 21);
        m8.validate().unwrap();
    }

    #[test]
    fn boundary_sets_have_expected_sizes() {
        let m = generate_rect_mesh(2.0, 1.0, 4, 2, ElemKind::Quad4, &[]).unwrap();
        assert_eq!(m.node_set("left").unwrap().len(), 3);
        assert_eq!(m.node_set("right").unwrap().len(), 3);
        assert_eq!(m.node_set("bottom").unwrap().len(), 5);
        assert_eq!(m.node_set("top").unwrap().len(), 5);

        let m8 = generate_rect_mesh(2.0, 1.0, 4, 2, ElemKind::Quad8, &[]).unwrap();
        assert_eq!(m8.node_set("bottom").unwrap().len(), 9);
        assert_eq!(m8.node_set("left").unwrap().len(), 5);
        for &n in m8.node_set("top").unwrap() {
            assert_eq!(m8.coords[n][1], 1.0);
        }
    }

    #[test]
    fn band_elements_meet_target_size() {
        let band = RefinementBand {
            x_min: 0.4,
            x_max: 0.6,
            y_min: 0.4,
            y_max: 0.6,
            h: 0.02,
        };
        let m = generate_rect_mesh(1.0, 1.0, 5, 5, ElemKind::Quad4, &[band]).unwrap();
        m.validate().unwrap();
        for e in 0..m.nelems() {
            let c = m.elem_coords(e);
            let cx = c.column(0).sum() / 4.0;
            let cy = c.column(1).sum() / 4.0;
            if cx > 0.4 && cx < 0.6 && cy > 0.4 && cy < 0.6 {
                for (a, b) in [(0usize, 1usize), (1, 2), (2, 3), (3, 0)] {
                    let len = ((c[(a, 0)] - c[(b, 0)]).powi(2) + (c[(a, 1)] - c[(b, 1)]).powi(2))
                        .sqrt();
                    assert!(len <= 0.02 + 1e-9, "band edge {len} exceeds target");
                }
            }
        }
        // grading keeps the mesh a valid partition of the domain
        let (min_x, min_y, max_x, max_y) = m.bounding_box();
        assert_eq!((min_x, min_y, max_x, max_y), (0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn band_coarser_than_grid_is_rejected() {
        let band = RefinementBand {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
            h: 0.9,
        };
        let err = generate_rect_mesh(1.0, 1.0, 5, 5, ElemKind::Quad4, &[band]).unwrap_err();
        assert!(err.to_string().contains("coarse"));
    }

    #[test]
    fn band_outside_domain_is_rejected() {
        let band = RefinementBand {
            x_min: 0.5,
            x_max: 1.5,
            y_min: 0.0,
            y_max: 1.0,
            h: 0.05,
        };
        assert!(generate_rect_mesh(1.0, 1.0, 5, 5, ElemKind::Quad4, &[band]).is_err());
    }

    #[test]
    fn graded_mesh_partitions_area_exactly() {
        let band = RefinementBand {
            x_min: 0.0,
            x_max: 0.5,
            y_min: 0.45,
            y_max: 0.55,
            h: 0.0125,
        };
        for kind in [ElemKind::Quad4, ElemKind::Quad8] {
            let m = generate_rect_mesh(1.0, 1.0, 8, 8, kind, &[band]).unwrap();
            m.validate().unwrap();
            let quad = kind.quadrature();
            let mut area = 0.0;
            for e in 0..m.nelems() {
                let coords = m.elem_coords(e);
                for (&(xi, eta), &w) in quad.points.iter().zip(&quad.weights) {
                    area += crate::mesh::bmatrices(kind, &coords, xi, eta).unwrap().det_j * w;
                }
            }
            approx::assert_relative_eq!(area, 1.0, max_relative = 1e-12);
        }
    }
}
