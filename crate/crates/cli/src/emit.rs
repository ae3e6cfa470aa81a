//! File emission: provenance headers, CSV, SVG and OBJ, written atomically.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use gauss_codazzi::contour::Polyline;
use gauss_codazzi::immersion::{ImmersionGrid, Vec3};
use gauss_codazzi::metric::Rect;
use gauss_codazzi::region::SquareRegion;

/// 17 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `command` then one `key=value` per line, each behind `prefix`.
pub fn header(prefix: &str, suffix: &str, command: &str, resolved: &[String]) -> String {
    let mut out = format!("{prefix}gcsurf {command}{suffix}\n");
    for line in resolved {
        let _ = writeln!(out, "{prefix}{line}{suffix}");
    }
    out
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp: PathBuf = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: String, columns: &[&str]) -> Self {
        let mut text = header;
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// A row of preformatted cells.
    pub fn raw_row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub const SVG_SIZE: f64 = 800.0;
pub const LOCUS_COLORS: [&str; 2] = ["#1f77b4", "#ff7f0e"];
const SQUARE_COLOR: &str = "#2ca02c";

/// Maps `(u, v)` in `window` to SVG user units, `v` pointing up.
pub struct Viewport {
    window: Rect,
}

impl Viewport {
    pub fn new(window: Rect) -> Self {
        Viewport { window }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.window.x1 > self.window.x0 && self.window.y1 > self.window.y0)
    }

    pub fn to_px(&self, u: f64, v: f64) -> (f64, f64) {
        let w = &self.window;
        ((u - w.x0) / (w.x1 - w.x0) * SVG_SIZE, SVG_SIZE - (v - w.y0) / (w.y1 - w.y0) * SVG_SIZE)
    }
}

fn points_attr(view: &Viewport, pts: &[(f64, f64)]) -> String {
    pts.iter()
        .map(|&(u, v)| {
            let (px, py) = view.to_px(u, v);
            format!("{px:.9},{py:.9}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Locus plot: `loci[k]` is stroked with `LOCUS_COLORS[k]`.
pub fn svg(header: &str, window: &Rect, loci: &[Vec<Polyline>; 2], square: Option<&SquareRegion>) -> String {
    let view = Viewport::new(*window);
    let mut out = String::from(header);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="800" viewBox="0 0 800 800">"#
    );
    out.push_str("<rect width=\"800\" height=\"800\" fill=\"white\"/>\n");
    if !view.is_degenerate() {
        // Axes through the origin, clamped to the frame when it lies outside.
        let (ox, oy) = view.to_px(0.0, 0.0);
        let (ox, oy) = (ox.clamp(0.0, SVG_SIZE), oy.clamp(0.0, SVG_SIZE));
        let _ = writeln!(out, r#"<line class="axis" x1="0" y1="{oy:.9}" x2="800" y2="{oy:.9}" stroke="black" stroke-width="1"/>"#);
        let _ = writeln!(out, r#"<line class="axis" x1="{ox:.9}" y1="0" x2="{ox:.9}" y2="800" stroke="black" stroke-width="1"/>"#);
        for (k, lines) in loci.iter().enumerate() {
            for line in lines.iter().filter(|l| l.points.len() >= 2) {
                let tag = if line.closed { "polygon" } else { "polyline" };
                let _ = writeln!(
                    out,
                    r#"<{tag} class="p{}" fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
                    k + 1,
                    LOCUS_COLORS[k],
                    points_attr(&view, &line.points)
                );
            }
        }
        if let Some(sq) = square {
            let _ = writeln!(
                out,
                r#"<polygon class="square" fill="none" stroke="{SQUARE_COLOR}" stroke-width="2" points="{}"/>"#,
                points_attr(&view, &sq.vertices())
            );
        }
    } else {
        out.push_str("<line class=\"axis\" x1=\"0\" y1=\"400\" x2=\"800\" y2=\"400\" stroke=\"black\" stroke-width=\"1\"/>\n");
        out.push_str("<line class=\"axis\" x1=\"400\" y1=\"0\" x2=\"400\" y2=\"800\" stroke=\"black\" stroke-width=\"1\"/>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Triangulated mesh, vertices row-major. Each quad is split along its
/// diagonal and wound so the face normal agrees with the surface normal.
pub fn obj(header: &str, nx: usize, ny: usize, f: &[Vec3], n: &[Vec3]) -> String {
    let mut out = String::from(header);
    for p in f {
        let _ = writeln!(out, "v {} {} {}", num(p.x), num(p.y), num(p.z));
    }
    for q in n {
        let _ = writeln!(out, "vn {} {} {}", num(q.x), num(q.y), num(q.z));
    }
    let id = |i: usize, j: usize| j * nx + i;
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            for tri in [[a, b, c], [a, c, d]] {
                let face = (f[tri[1]] - f[tri[0]]).cross(&(f[tri[2]] - f[tri[0]]));
                let avg = n[tri[0]] + n[tri[1]] + n[tri[2]];
                let t = if face.dot(&avg) < 0.0 { [tri[0], tri[2], tri[1]] } else { tri };
                let _ = writeln!(out, "f {0}//{0} {1}//{1} {2}//{2}", t[0] + 1, t[1] + 1, t[2] + 1);
            }
        }
    }
    out
}

/// Mesh of a reconstructed grid.
pub fn obj_from_grid(header: &str, grid: &ImmersionGrid) -> String {
    obj(header, grid.xs.len(), grid.ys.len(), &grid.f, &grid.n)
}
