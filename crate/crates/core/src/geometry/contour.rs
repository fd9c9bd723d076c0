use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::grid::{GridPoints, GridSpec};

/// An ordered vertex chain. Closed chains do not repeat the first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub vertices: Vec<[f64; 2]>,
    pub closed: bool,
}

impl Polyline {
    pub fn new(vertices: Vec<[f64; 2]>, closed: bool) -> Self {
        Self { vertices, closed }
    }

    pub fn segment_count(&self) -> usize {
        match self.vertices.len() {
            0 | 1 => 0,
            n if self.closed => n,
            n => n - 1,
        }
    }

    pub fn segment(&self, k: usize) -> ([f64; 2], [f64; 2]) {
        let n = self.vertices.len();
        (self.vertices[k], self.vertices[(k + 1) % n])
    }

    pub fn length(&self) -> f64 {
        (0..self.segment_count())
            .map(|k| {
                let (a, b) = self.segment(k);
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Sorted crossing points of a 1-D field.
    Points(Vec<f64>),
    Curves(Vec<Polyline>),
}

/// Estimated level set `{field = level}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub level: f64,
    pub shape: Shape,
}

impl Contour {
    pub fn from_polylines(level: f64, lines: Vec<Polyline>) -> Self {
        Self {
            level,
            shape: Shape::Curves(lines),
        }
    }

    pub fn from_points(level: f64, mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        Self {
            level,
            shape: Shape::Points(points),
        }
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Points(_) => 1,
            Shape::Curves(_) => 2,
        }
    }

    pub fn polylines(&self) -> &[Polyline] {
        match &self.shape {
            Shape::Curves(c) => c,
            Shape::Points(_) => &[],
        }
    }

    pub fn points(&self) -> &[f64] {
        match &self.shape {
            Shape::Points(p) => p,
            Shape::Curves(_) => &[],
        }
    }

    pub fn vertex_count(&self) -> usize {
        match &self.shape {
            Shape::Points(p) => p.len(),
            Shape::Curves(c) => c.iter().map(|l| l.vertices.len()).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_count() == 0
    }

    /// Curve length for d = 2, point count for d = 1.
    pub fn total_length(&self) -> f64 {
        match &self.shape {
            Shape::Points(p) => p.len() as f64,
            Shape::Curves(c) => c.iter().map(Polyline::length).sum(),
        }
    }

    /// Every vertex as a coordinate slice.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match &self.shape {
            Shape::Points(p) => p.iter().map(|&x| vec![x]).collect(),
            Shape::Curves(c) => c.iter().flat_map(|l| l.vertices.iter().map(|v| v.to_vec())).collect(),
        }
    }

    pub fn translated(&self, offset: &[f64]) -> Self {
        let shape = match &self.shape {
            Shape::Points(p) => Shape::Points(p.iter().map(|x| x + offset[0]).collect()),
            Shape::Curves(c) => Shape::Curves(
                c.iter()
                    .map(|l| Polyline {
                        vertices: l
                            .vertices
                            .iter()
                            .map(|v| [v[0] + offset[0], v[1] + offset[1]])
                            .collect(),
                        closed: l.closed,
                    })
                    .collect(),
            ),
        };
        Self {
            level: self.level,
            shape,
        }
    }
}

pub fn contour_length(ct: &Contour) -> Result<f64> {
    match &ct.shape {
        Shape::Curves(c) => Ok(c.iter().map(Polyline::length).sum()),
        Shape::Points(_) => Err(invalid("contour length is undefined in 1-D; use the point count")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOptions {
    /// Bisection steps along each crossed grid edge; 0 keeps the linear interpolant.
    pub refine_iters: u32,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self { refine_iters: 20 }
    }
}

pub fn extract_contour<F: ScalarField + ?Sized>(field: &F, grid: &GridSpec, c: f64) -> Result<Contour> {
    extract_contour_with(field, grid, c, &ContourOptions::default())
}

pub fn extract_contour_with<F: ScalarField + ?Sized>(
    field: &F,
    grid: &GridSpec,
    c: f64,
    opts: &ContourOptions,
) -> Result<Contour> {
    let values = field.sample_grid(grid, GridPoints::Nodes);
    contour_from_node_values(field, grid, &values, c, opts)
}

/// Extraction from precomputed node values; `field` is only queried for refinement and saddles.
pub fn contour_from_node_values<F: ScalarField + ?Sized>(
    field: &F,
    grid: &GridSpec,
    values: &[f64],
    c: f64,
    opts: &ContourOptions,
) -> Result<Contour> {
    if !c.is_finite() {
        return Err(Error::NonFinite("contour level".into()));
    }
    if values.len() != grid.len(GridPoints::Nodes) {
        return Err(invalid("node value count does not match the grid"));
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("field value at grid node {k}")));
    }
    match grid.dim() {
        1 => Ok(extract_1d(field, grid, values, c, opts)),
        2 => Ok(MarchingSquares::new(field, grid, values, c, opts).run()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Root of `field - c` on the segment `a → b`, given the endpoint values.
fn refine_on_segment<F: ScalarField + ?Sized>(
    field: &F,
    a: &[f64],
    b: &[f64],
    fa: f64,
    fb: f64,
    c: f64,
    iters: u32,
) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut flo, mut fhi) = (fa - c, fb - c);
    let lo_above = flo >= 0.0;
    let mut p = [0.0; 3];
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        for j in 0..a.len() {
            p[j] = a[j] + mid * (b[j] - a[j]);
        }
        let fm = field.value(&p[..a.len()]) - c;
        if !fm.is_finite() {
            break;
        }
        if (fm >= 0.0) == lo_above {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    if flo != fhi {
        lo + (flo / (flo - fhi)).clamp(0.0, 1.0) * (hi - lo)
    } else {
        0.5 * (lo + hi)
    }
}

fn extract_1d<F: ScalarField + ?Sized>(
    field: &F,
    grid: &GridSpec,
    values: &[f64],
    c: f64,
    opts: &ContourOptions,
) -> Contour {
    let mut pts = Vec::new();
    for i in 0..values.len() - 1 {
        if (values[i] >= c) != (values[i + 1] >= c) {
            let a = [grid.coord(0, i, GridPoints::Nodes)];
            let b = [grid.coord(0, i + 1, GridPoints::Nodes)];
            let t = refine_on_segment(field, &a, &b, values[i], values[i + 1], c, opts.refine_iters);
            pts.push(a[0] + t * (b[0] - a[0]));
        }
    }
    Contour::from_points(c, pts)
}

const NONE: u32 = u32::MAX;

struct MarchingSquares<'a, F: ?Sized> {
    field: &'a F,
    grid: &'a GridSpec,
    values: &'a [f64],
    c: f64,
    opts: &'a ContourOptions,
    nx: usize,
    ny: usize,
    edge_vertex: Vec<u32>,
    vertices: Vec<[f64; 2]>,
    links: Vec<[u32; 2]>,
}

impl<'a, F: ScalarField + ?Sized> MarchingSquares<'a, F> {
    fn new(field: &'a F, grid: &'a GridSpec, values: &'a [f64], c: f64, opts: &'a ContourOptions) -> Self {
        let nx = grid.resolution()[0];
        let ny = grid.resolution()[1];
        let edges = nx * (ny + 1) + (nx + 1) * ny;
        Self {
            field,
            grid,
            values,
            c,
            opts,
            nx,
            ny,
            edge_vertex: vec![NONE; edges],
            vertices: Vec::new(),
            links: Vec::new(),
        }
    }

    #[inline]
    fn node(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * (self.nx + 1) + ix]
    }

    fn node_point(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.grid.coord(0, ix, GridPoints::Nodes),
            self.grid.coord(1, iy, GridPoints::Nodes),
        ]
    }

    fn horizontal(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    fn vertical(&self, ix: usize, iy: usize) -> usize {
        self.nx * (self.ny + 1) + iy * (self.nx + 1) + ix
    }

    /// Vertex on edge `id` between nodes `(ax, ay)` and `(bx, by)`.
    fn vertex(&mut self, id: usize, a: (usize, usize), b: (usize, usize)) -> u32 {
        if self.edge_vertex[id] != NONE {
            return self.edge_vertex[id];
        }
        let pa = self.node_point(a.0, a.1);
        let pb = self.node_point(b.0, b.1);
        let fa = self.node(a.0, a.1);
        let fb = self.node(b.0, b.1);
        let t = refine_on_segment(self.field, &pa, &pb, fa, fb, self.c, self.opts.refine_iters);
        let v = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
        let idx = self.vertices.len() as u32;
        self.vertices.push(v);
        self.links.push([NONE, NONE]);
        self.edge_vertex[id] = idx;
        idx
    }

    fn link(&mut self, a: u32, b: u32) {
        for (from, to) in [(a, b), (b, a)] {
            let slot = &mut self.links[from as usize];
            if slot[0] == NONE {
                slot[0] = to;
            } else {
                slot[1] = to;
            }
        }
    }

    fn run(mut self) -> Contour {
        let c = self.c;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let bl = self.node(ix, iy) >= c;
                let br = self.node(ix + 1, iy) >= c;
                let tr = self.node(ix + 1, iy + 1) >= c;
                let tl = self.node(ix, iy + 1) >= c;
                let code = u8::from(bl) | u8::from(br) << 1 | u8::from(tr) << 2 | u8::from(tl) << 3;
                if code == 0 || code == 15 {
                    continue;
                }
                let bottom = (self.horizontal(ix, iy), (ix, iy), (ix + 1, iy));
                let right = (self.vertical(ix + 1, iy), (ix + 1, iy), (ix + 1, iy + 1));
                let top = (self.horizontal(ix, iy + 1), (ix, iy + 1), (ix + 1, iy + 1));
                let left = (self.vertical(ix, iy), (ix, iy), (ix, iy + 1));
                let pairs: [Option<((usize, (usize, usize), (usize, usize)), _)>; 2] = match code {
                    5 | 10 => {
                        let center = [
                            self.grid.coord(0, ix, GridPoints::Centers),
                            self.grid.coord(1, iy, GridPoints::Centers),
                        ];
                        let center_above = self.field.value(&center) >= c;
                        // Keep the corners that share the center's class connected.
                        if (code == 5) == center_above {
                            [Some((bottom, right)), Some((left, top))]
                        } else {
                            [Some((left, bottom)), Some((right, top))]
                        }
                    }
                    _ => {
                        let mut crossed = [bottom, right, top, left]
                            .into_iter()
                            .filter(|e| (self.node(e.1 .0, e.1 .1) >= c) != (self.node(e.2 .0, e.2 .1) >= c));
                        let first = crossed.next().expect("mixed cell has a crossed edge");
                        let second = crossed.next().expect("mixed cell has two crossed edges");
                        [Some((first, second)), None]
                    }
                };
                for (ea, eb) in pairs.into_iter().flatten() {
                    let va = self.vertex(ea.0, ea.1, ea.2);
                    let vb = self.vertex(eb.0, eb.1, eb.2);
                    self.link(va, vb);
                }
            }
        }
        let lines = self.chain();
        Contour::from_polylines(c, lines)
    }

    fn chain(&self) -> Vec<Polyline> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut lines = Vec::new();
        let degree = |v: usize| self.links[v].iter().filter(|&&x| x != NONE).count();
        let walk = |start: usize, seen: &mut Vec<bool>| {
            let mut out = vec![self.vertices[start]];
            seen[start] = true;
            let mut prev = NONE;
            let mut cur = start as u32;
            loop {
                let [a, b] = self.links[cur as usize];
                let next = if a != NONE && a != prev && !seen[a as usize] {
                    a
                } else if b != NONE && b != prev && !seen[b as usize] {
                    b
                } else {
                    break;
                };
                seen[next as usize] = true;
                out.push(self.vertices[next as usize]);
                prev = cur;
                cur = next;
            }
            out
        };
        for v in 0..n {
            if !seen[v] && degree(v) <= 1 {
                lines.push(Polyline::new(walk(v, &mut seen), false));
            }
        }
        for v in 0..n {
            if !seen[v] {
                lines.push(Polyline::new(walk(v, &mut seen), true));
            }
        }
        lines
    }
}

/// Subdivides every segment into `ceil(len / max_spacing)` equal pieces. When `field`
/// is given, inserted vertices are pulled back onto the level along the segment normal.
pub fn resample(ct: &Contour, max_spacing: f64, field: Option<&dyn ScalarField>) -> Contour {
    assert!(max_spacing > 0.0, "spacing must be positive");
    let lines = match &ct.shape {
        Shape::Points(_) => return ct.clone(),
        Shape::Curves(lines) => lines,
    };
    let out = lines
        .iter()
        .map(|line| {
            let mut vertices = Vec::with_capacity(line.vertices.len());
            if line.segment_count() == 0 {
                return line.clone();
            }
            for k in 0..line.segment_count() {
                let (a, b) = line.segment(k);
                vertices.push(a);
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                let pieces = ((len / max_spacing) - 1e-9).ceil().max(1.0) as usize;
                let normal = if len > 0.0 {
                    [-(b[1] - a[1]) / len, (b[0] - a[0]) / len]
                } else {
                    [0.0, 0.0]
                };
                for i in 1..pieces {
                    let t = i as f64 / pieces as f64;
                    let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                    let p = match field {
                        Some(f) => polish_along(f, p, normal, ct.level, len / pieces as f64),
                        None => p,
                    };
                    vertices.push(p);
                }
            }
            if !line.closed {
                vertices.push(*line.vertices.last().expect("nonempty line"));
            }
            Polyline::new(vertices, line.closed)
        })
        .collect();
    Contour::from_polylines(ct.level, out)
}

fn polish_along(field: &dyn ScalarField, p: [f64; 2], n: [f64; 2], c: f64, scale: f64) -> [f64; 2] {
    let at = |s: f64| [p[0] + s * n[0], p[1] + s * n[1]];
    let f0 = field.value(&p) - c;
    if f0 == 0.0 || !f0.is_finite() || scale <= 0.0 {
        return p;
    }
    let mut step = scale / 16.0;
    while step <= scale {
        for s in [step, -step] {
            let q = at(s);
            let fs = field.value(&q) - c;
            if fs.is_finite() && (fs >= 0.0) != (f0 >= 0.0) {
                let t = refine_on_segment(field, &p, &q, f0 + c, fs + c, c, 30);
                return at(t * s);
            }
        }
        step *= 2.0;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FnField;

    fn bowl() -> FnField<impl Fn(&[f64]) -> f64 + Sync> {
        FnField::new(2, |x: &[f64]| 1.0 - x[0] * x[0] - x[1] * x[1])
    }

    #[test]
    fn circle_length() {
        let g = GridSpec::uniform(2, -1.0, 1.0, 256).unwrap();
        let ct = extract_contour(&bowl(), &g, 0.75).unwrap();
        assert_eq!(ct.polylines().len(), 1);
        assert!(ct.polylines()[0].closed);
        let len = contour_length(&ct).unwrap();
        assert!((len - std::f64::consts::PI).abs() < 0.005 * std::f64::consts::PI);
        for v in ct.vertices() {
            assert!((bowl().value(&v) - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn level_above_max_is_empty() {
        let g = GridSpec::uniform(2, -1.0, 1.0, 32).unwrap();
        let ct = extract_contour(&bowl(), &g, 1.5).unwrap();
        assert!(ct.is_empty());
        assert_eq!(contour_length(&ct).unwrap(), 0.0);
    }

    #[test]
    fn one_dimensional_roots() {
        let f = FnField::new(1, |x: &[f64]| 1.0 - x[0] * x[0]);
        let g = GridSpec::uniform(1, -1.0, 1.0, 100).unwrap();
        let ct = extract_contour(&f, &g, 0.75).unwrap();
        assert_eq!(ct.points().len(), 2);
        assert!((ct.points()[0] + 0.5).abs() < 1e-6 && (ct.points()[1] - 0.5).abs() < 1e-6);
        assert_eq!(ct.total_length(), 2.0);
        assert!(contour_length(&ct).is_err());
    }

    #[test]
    fn nan_is_an_error() {
        let f = FnField::new(2, |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { 0.0 });
        let g = GridSpec::uniform(2, 0.0, 1.0, 16).unwrap();
        assert!(extract_contour(&f, &g, 0.1).is_err());
    }

    #[test]
    fn saddle_follows_center_value() {
        // x*y has a saddle at the origin, which is the center of the middle cell.
        let f = FnField::new(2, |x: &[f64]| x[0] * x[1] + 0.001);
        let g = GridSpec::uniform(2, -1.0, 1.0, 17).unwrap();
        let ct = extract_contour(&f, &g, 0.0).unwrap();
        // Two hyperbola branches, in quadrants II and IV, never crossing the axes.
        assert_eq!(ct.polylines().len(), 2);
        for v in ct.vertices() {
            assert!(v[0] * v[1] < 0.0);
        }
    }

    #[test]
    fn square_resample_count() {
        let sq = Polyline::new(vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]], true);
        let ct = Contour::from_polylines(0.0, vec![sq]);
        assert_eq!(ct.total_length(), 16.0);
        let fine = resample(&ct, 0.1, None);
        assert_eq!(fine.vertex_count(), 160);
        assert_eq!(resample(&fine, 0.1, None), fine);
        let mut last = usize::MAX;
        for s in [0.05, 0.1, 0.3, 0.7, 2.0, 5.0] {
            let n = resample(&ct, s, None).vertex_count();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn unit_square_length() {
        let sq = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], true);
        assert_eq!(contour_length(&Contour::from_polylines(0.0, vec![sq])).unwrap(), 4.0);
    }

    #[test]
    fn resample_with_field_stays_on_level() {
        let g = GridSpec::uniform(2, -1.0, 1.0, 16).unwrap();
        let f = bowl();
        let ct = extract_contour(&f, &g, 0.75).unwrap();
        let fine = resample(&ct, 0.01, Some(&f));
        for v in fine.vertices() {
            assert!((f.value(&v) - 0.75).abs() < 1e-9);
        }
    }
}
