use crate::error::{Error, Result};

use super::contour::{Contour, Shape};

/// Distance from `p` to the segment `a b` and the closest point on it.
#[inline]
pub fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> (f64, [f64; 2]) {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * dx, a[1] + t * dy];
    ((p[0] - q[0]).hypot(p[1] - q[1]), q)
}

/// Every segment of a 2-D contour; isolated vertices appear as zero-length segments.
fn segments(ct: &Contour) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
    ct.polylines().iter().flat_map(|l| {
        let single = (l.vertices.len() == 1).then(|| (l.vertices[0], l.vertices[0]));
        (0..l.segment_count()).map(move |k| l.segment(k)).chain(single)
    })
}

fn empty_error() -> Error {
    Error::EmptyContour("distance to an empty contour".into())
}

pub fn project_to_contour(x: &[f64], ct: &Contour) -> Result<(Vec<f64>, f64)> {
    if ct.is_empty() {
        return Err(empty_error());
    }
    match &ct.shape {
        Shape::Points(pts) => {
            let mut best = (pts[0], f64::INFINITY);
            for &p in pts {
                let d = (x[0] - p).abs();
                if d < best.1 {
                    best = (p, d);
                }
            }
            Ok((vec![best.0], best.1))
        }
        Shape::Curves(_) => {
            let p = [x[0], x[1]];
            let mut best = ([0.0; 2], f64::INFINITY);
            for (a, b) in segments(ct) {
                let (d, q) = point_segment_distance(p, a, b);
                if d < best.1 {
                    best = (q, d);
                }
            }
            Ok((best.0.to_vec(), best.1))
        }
    }
}

pub fn dist_to_contour(x: &[f64], ct: &Contour) -> Result<f64> {
    project_to_contour(x, ct).map(|(_, d)| d)
}

/// `max_{v ∈ vertices(a)} d(v, b)`.
pub fn directed_hausdorff(a: &Contour, b: &Contour) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(empty_error());
    }
    match (&a.shape, &b.shape) {
        (Shape::Curves(_), Shape::Curves(_)) => {
            let index = SegmentIndex::new(b)?;
            Ok(a.polylines()
                .iter()
                .flat_map(|l| l.vertices.iter())
                .map(|&v| index.distance(v))
                .fold(0.0, f64::max))
        }
        _ => {
            let mut worst: f64 = 0.0;
            for v in a.vertices() {
                worst = worst.max(dist_to_contour(&v, b)?);
            }
            Ok(worst)
        }
    }
}

pub fn hausdorff(a: &Contour, b: &Contour) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// Uniform bucket grid over a contour's segments for exact nearest-segment queries.
#[derive(Debug, Clone)]
pub struct SegmentIndex {
    segs: Vec<([f64; 2], [f64; 2])>,
    origin: [f64; 2],
    cell: f64,
    cols: usize,
    rows: usize,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl SegmentIndex {
    pub fn new(ct: &Contour) -> Result<Self> {
        if ct.is_empty() || ct.dim() != 2 {
            return Err(empty_error());
        }
        let segs: Vec<_> = segments(ct).collect();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        let mut total = 0.0;
        for (a, b) in &segs {
            for j in 0..2 {
                lo[j] = lo[j].min(a[j]).min(b[j]);
                hi[j] = hi[j].max(a[j]).max(b[j]);
            }
            total += (b[0] - a[0]).hypot(b[1] - a[1]);
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let cell = (2.0 * total / segs.len() as f64).max(extent / 256.0).max(1e-12);
        let cols = ((hi[0] - lo[0]) / cell).floor() as usize + 1;
        let rows = ((hi[1] - lo[1]) / cell).floor() as usize + 1;
        let bucket = |p: f64, o: f64, n: usize| (((p - o) / cell).floor().max(0.0) as usize).min(n - 1);
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); cols * rows];
        for (k, (a, b)) in segs.iter().enumerate() {
            let (c0, c1) = (bucket(a[0].min(b[0]), lo[0], cols), bucket(a[0].max(b[0]), lo[0], cols));
            let (r0, r1) = (bucket(a[1].min(b[1]), lo[1], rows), bucket(a[1].max(b[1]), lo[1], rows));
            for r in r0..=r1 {
                for c in c0..=c1 {
                    lists[r * cols + c].push(k as u32);
                }
            }
        }
        let mut starts = Vec::with_capacity(lists.len() + 1);
        let mut items = Vec::new();
        for l in &lists {
            starts.push(items.len() as u32);
            items.extend_from_slice(l);
        }
        starts.push(items.len() as u32);
        Ok(Self {
            segs,
            origin: lo,
            cell,
            cols,
            rows,
            starts,
            items,
        })
    }

    pub fn segments(&self) -> &[([f64; 2], [f64; 2])] {
        &self.segs
    }

    /// Exact distance to the nearest segment; equal to a brute-force scan.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        self.nearest(p).1
    }

    pub fn nearest(&self, p: [f64; 2]) -> ([f64; 2], f64) {
        let home = |v: f64, o: f64, n: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(n - 1) as isize;
        let (hc, hr) = (
            home(p[0], self.origin[0], self.cols),
            home(p[1], self.origin[1], self.rows),
        );
        let mut best = ([0.0; 2], f64::INFINITY);
        let max_ring = self.cols.max(self.rows) as isize;
        for ring in 0..=max_ring {
            for r in hr - ring..=hr + ring {
                if r < 0 || r >= self.rows as isize {
                    continue;
                }
                let on_edge_row = r == hr - ring || r == hr + ring;
                let mut c = hc - ring;
                while c <= hc + ring {
                    if c >= 0 && c < self.cols as isize {
                        let b = r as usize * self.cols + c as usize;
                        for &k in &self.items[self.starts[b] as usize..self.starts[b + 1] as usize] {
                            let (a, e) = self.segs[k as usize];
                            let (d, q) = point_segment_distance(p, a, e);
                            if d < best.1 {
                                best = (q, d);
                            }
                        }
                    }
                    c += if on_edge_row || ring == 0 { 1 } else { 2 * ring };
                }
            }
            // Buckets beyond this ring are at least `ring * cell` from the clamped query point.
            if best.1 <= ring as f64 * self.cell {
                break;
            }
        }
        best
    }
}
