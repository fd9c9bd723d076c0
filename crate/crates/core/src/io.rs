//! CSV and SVG import/export.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geometry::{Contour, GridPoints, Shape};
use crate::regions::RegionMask;

/// Reads rows of numbers, skipping a leading header row if its first field is not numeric.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(Error::Malformed(format!("row {}: {e}", k + 1))),
        }
    }
    if rows.is_empty() {
        return Err(Error::Malformed("no numeric rows".into()));
    }
    let width = rows[0].len();
    if let Some(k) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::Malformed(format!(
            "row {} has {} fields, expected {width}",
            k + 1,
            rows[k].len()
        )));
    }
    if let Some(k) = rows.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(Error::Malformed(format!("row {} has a non-finite value", k + 1)));
    }
    Ok(rows)
}

pub fn read_rows_path(path: &std::path::Path) -> Result<Vec<Vec<f64>>> {
    read_rows(std::fs::File::open(path)?)
}

/// `curve,x,y` rows for curves; `x` rows for 1-D crossings.
pub fn write_contour_csv<W: Write>(ct: &Contour, mut out: W) -> Result<()> {
    match &ct.shape {
        Shape::Points(p) => {
            writeln!(out, "x")?;
            for x in p {
                writeln!(out, "{x:.16e}")?;
            }
        }
        Shape::Curves(lines) => {
            writeln!(out, "curve,x,y")?;
            for (k, line) in lines.iter().enumerate() {
                for v in &line.vertices {
                    writeln!(out, "{k},{:.16e},{:.16e}", v[0], v[1])?;
                }
                if line.closed {
                    if let Some(v) = line.vertices.first() {
                        writeln!(out, "{k},{:.16e},{:.16e}", v[0], v[1])?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// `x,y,contained` at every cell center.
pub fn write_mask_csv<W: Write>(mask: &RegionMask, mut out: W) -> Result<()> {
    writeln!(out, "x,y,contained")?;
    let mut p = [0.0; 2];
    for (k, inside) in mask.inside.iter().enumerate() {
        mask.grid.point(k, GridPoints::Centers, &mut p);
        writeln!(out, "{:.16e},{:.16e},{}", p[0], p[1], *inside as u8)?;
    }
    Ok(())
}

/// A static plot: filled mask cells, contours as polylines, and data as dots.
#[derive(Debug, Default)]
pub struct SvgScene<'a> {
    pub bounds: Option<([f64; 2], [f64; 2])>,
    pub masks: Vec<(&'a RegionMask, &'a str)>,
    pub contours: Vec<(&'a Contour, &'a str)>,
    pub points: Vec<[f64; 2]>,
}

const SVG_SIZE: f64 = 600.0;

impl SvgScene<'_> {
    fn extent(&self) -> ([f64; 2], [f64; 2]) {
        if let Some(b) = self.bounds {
            return b;
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        let mut grow = |p: [f64; 2]| {
            for j in 0..2 {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        };
        for (m, _) in &self.masks {
            grow([m.grid.lower()[0], m.grid.lower()[1]]);
            grow([m.grid.upper()[0], m.grid.upper()[1]]);
        }
        for (c, _) in &self.contours {
            if let Shape::Curves(lines) = &c.shape {
                lines.iter().flat_map(|l| l.vertices.iter()).for_each(|v| grow(*v));
            }
        }
        self.points.iter().for_each(|p| grow(*p));
        if !lo[0].is_finite() {
            return ([0.0, 0.0], [1.0, 1.0]);
        }
        (lo, hi)
    }

    pub fn render(&self) -> String {
        let (lo, hi) = self.extent();
        let scale = SVG_SIZE / (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let px = |x: f64| (x - lo[0]) * scale;
        let py = |y: f64| SVG_SIZE - (y - lo[1]) * scale;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_SIZE}\" height=\"{SVG_SIZE}\" viewBox=\"0 0 {SVG_SIZE} {SVG_SIZE}\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        for (mask, color) in &self.masks {
            let g = &mask.grid;
            let (w, h) = (g.cell_size(0) * scale, g.cell_size(1) * scale);
            let _ = writeln!(s, "<g fill=\"{color}\" fill-opacity=\"0.35\">");
            let mut p = [0.0; 2];
            for (k, _) in mask.inside.iter().enumerate().filter(|(_, b)| **b) {
                g.point(k, GridPoints::Centers, &mut p);
                let _ = writeln!(
                    s,
                    "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\"/>",
                    px(p[0]) - w / 2.0,
                    py(p[1]) - h / 2.0,
                    w,
                    h
                );
            }
            let _ = writeln!(s, "</g>");
        }
        for p in &self.points {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"1.5\" fill=\"black\"/>",
                px(p[0]),
                py(p[1])
            );
        }
        for (ct, color) in &self.contours {
            let Shape::Curves(lines) = &ct.shape else { continue };
            for line in lines {
                let pts: Vec<String> = line
                    .vertices
                    .iter()
                    .map(|v| format!("{:.3},{:.3}", px(v[0]), py(v[1])))
                    .collect();
                let tag = if line.closed { "polygon" } else { "polyline" };
                let _ = writeln!(
                    s,
                    "<{tag} points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                    pts.join(" ")
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.render().as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GridSpec, Polyline};

    #[test]
    fn rows_with_and_without_header() {
        let a = read_rows("x,y\n1,2\n3,4\n".as_bytes()).unwrap();
        let b = read_rows("1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(matches!(
            read_rows("1,2\n3,oops\n".as_bytes()),
            Err(Error::Malformed(_))
        ));
        assert!(read_rows("1,2\n3\n".as_bytes()).is_err());
        assert!(read_rows("".as_bytes()).is_err());
    }

    #[test]
    fn contour_and_mask_round_trip() {
        let ct = Contour::from_polylines(0.1, vec![Polyline::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], true)]);
        let mut buf = Vec::new();
        write_contour_csv(&ct, &mut buf).unwrap();
        let rows = read_rows(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[3], vec![0.0, 0.0, 0.0]);

        let grid = GridSpec::uniform(2, 0.0, 1.0, 16).unwrap();
        let mask = RegionMask::new(grid, (0..256).map(|k| k % 3 == 0).collect());
        let mut buf = Vec::new();
        write_mask_csv(&mask, &mut buf).unwrap();
        let rows = read_rows(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 256);
        assert_eq!(rows.iter().filter(|r| r[2] == 1.0).count(), mask.count());

        let svg = SvgScene {
            masks: vec![(&mask, "steelblue")],
            contours: vec![(&ct, "red")],
            ..Default::default()
        }
        .render();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<rect x=").count(), mask.count());
    }
}
