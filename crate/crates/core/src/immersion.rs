//! Surface reconstruction from `(g, II)` by integrating the Gauss–Weingarten
//! frame system, the closed-form immersions, and the catenoid–helicoid
//! deformation test.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::exec;
use crate::metric::{christoffel, eval_metric, gauss_curvature, Christoffel, MetricFamily, Rect};
use crate::solver::SecondFundamentalFormField;

pub type Vec3 = Vector3<f64>;

/// Frame `(f, f_x, f_y, n)` at the lower-left grid corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseFrame {
    pub f: Vec3,
    pub fx: Vec3,
    pub fy: Vec3,
    pub n: Vec3,
}

impl BaseFrame {
    /// `f = 0`, `f_x = (√E, 0, 0)`, `f_y = (0, √G, 0)`, `n = (0, 0, 1)`.
    pub fn standard(e: f64, g: f64) -> Self {
        BaseFrame {
            f: Vec3::zeros(),
            fx: Vec3::new(e.sqrt(), 0.0, 0.0),
            fy: Vec3::new(0.0, g.sqrt(), 0.0),
            n: Vec3::new(0.0, 0.0, 1.0),
        }
    }

    fn defect(&self, e: f64, g: f64) -> f64 {
        [
            (self.fx.dot(&self.fx) - e).abs(),
            self.fx.dot(&self.fy).abs(),
            (self.fy.dot(&self.fy) - g).abs(),
            (self.n.dot(&self.n) - 1.0).abs(),
            self.n.dot(&self.fx).abs() / e.sqrt(),
            self.n.dot(&self.fy).abs() / g.sqrt(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Reconstructed immersion on the form's `(x, y)` grid, rows by `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub f: Vec<Vec3>,
    pub fx: Vec<Vec3>,
    pub fy: Vec<Vec3>,
    pub n: Vec<Vec3>,
    /// `E`, `G` at the nodes.
    pub e: Vec<f64>,
    pub g: Vec<f64>,
    /// Distance between row-first and column-first integration at the far
    /// corner, for `f` and for the frame.
    pub path_discrepancy: f64,
    pub frame_path_discrepancy: f64,
}

impl ImmersionGrid {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.xs.len() + i
    }

    /// `max (|f_x·f_x − E| + |f_x·f_y| + |f_y·f_y − G|)` over the nodes.
    pub fn metric_residual(&self) -> f64 {
        (0..self.f.len())
            .map(|k| {
                (self.fx[k].dot(&self.fx[k]) - self.e[k]).abs()
                    + self.fx[k].dot(&self.fy[k]).abs()
                    + (self.fy[k].dot(&self.fy[k]) - self.g[k]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max(||n| − 1|, |n·f_x|/|f_x|, |n·f_y|/|f_y|)`.
    pub fn normal_defect(&self) -> f64 {
        (0..self.f.len())
            .map(|k| {
                let n = &self.n[k];
                (n.norm() - 1.0)
                    .abs()
                    .max(n.dot(&self.fx[k]).abs() / self.fx[k].norm())
                    .max(n.dot(&self.fy[k]).abs() / self.fy[k].norm())
            })
            .fold(0.0, f64::max)
    }

    /// `max ‖∂_y f_x − ∂_x f_y‖` over interior nodes, by central differences.
    pub fn mixed_partial_defect(&self) -> f64 {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        let mut worst: f64 = 0.0;
        for j in 1..ny.saturating_sub(1) {
            for i in 1..nx.saturating_sub(1) {
                let dy = self.ys[j + 1] - self.ys[j - 1];
                let dx = self.xs[i + 1] - self.xs[i - 1];
                let fx_y = (self.fx[self.index(i, j + 1)] - self.fx[self.index(i, j - 1)]) / dy;
                let fy_x = (self.fy[self.index(i + 1, j)] - self.fy[self.index(i - 1, j)]) / dx;
                worst = worst.max((fx_y - fy_x).norm());
            }
        }
        worst
    }
}

/// Pullback first fundamental form sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMetric {
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

/// Second-order differences of `f` along one line (one-sided at the ends).
fn line_derivative(t: &[f64], p: &[Vec3]) -> Vec<Vec3> {
    let n = t.len();
    if n < 2 {
        return vec![Vec3::zeros(); n];
    }
    if n == 2 {
        let d = (p[1] - p[0]) / (t[1] - t[0]);
        return vec![d, d];
    }
    // Three-point Lagrange derivative at `t[at]` through nodes a, b, c.
    let d3 = |a: usize, b: usize, c: usize, at: usize| -> Vec3 {
        let (ta, tb, tc, x) = (t[a], t[b], t[c], t[at]);
        p[a] * ((2.0 * x - tb - tc) / ((ta - tb) * (ta - tc)))
            + p[b] * ((2.0 * x - ta - tc) / ((tb - ta) * (tb - tc)))
            + p[c] * ((2.0 * x - ta - tb) / ((tc - ta) * (tc - tb)))
    };
    (0..n)
        .map(|k| match k {
            0 => d3(0, 1, 2, 0),
            k if k == n - 1 => d3(n - 3, n - 2, n - 1, k),
            k => d3(k - 1, k, k + 1, k),
        })
        .collect()
}

/// Induced metric of a reconstructed grid from differences of `f`.
pub fn induced_metric_grid(grid: &ImmersionGrid) -> InducedMetric {
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    let mut dfx = vec![Vec3::zeros(); nx * ny];
    let mut dfy = vec![Vec3::zeros(); nx * ny];
    for j in 0..ny {
        let row: Vec<Vec3> = (0..nx).map(|i| grid.f[j * nx + i]).collect();
        for (i, d) in line_derivative(&grid.xs, &row).into_iter().enumerate() {
            dfx[j * nx + i] = d;
        }
    }
    for i in 0..nx {
        let col: Vec<Vec3> = (0..ny).map(|j| grid.f[j * nx + i]).collect();
        for (j, d) in line_derivative(&grid.ys, &col).into_iter().enumerate() {
            dfy[j * nx + i] = d;
        }
    }
    InducedMetric {
        e: dfx.iter().map(|v| v.dot(v)).collect(),
        f: dfx.iter().zip(&dfy).map(|(a, b)| a.dot(b)).collect(),
        g: dfy.iter().map(|v| v.dot(v)).collect(),
    }
}

#[derive(Debug, Clone, Copy)]
struct Coef {
    e: f64,
    g: f64,
    ch: Christoffel,
}

fn coef_at(family: &MetricFamily, x: f64, y: f64) -> Result<Coef> {
    let jet = eval_metric(family, x, y)?;
    let ch = christoffel(&jet).map_err(|_| Error::Positivity { x, y, e: jet.e, g: jet.g })?;
    Ok(Coef { e: jet.e, g: jet.g, ch })
}

type Frame = [Vec3; 3];
type Second = [f64; 3];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    X,
    Y,
}

/// `∂(f_x, f_y, n)` along `dir` from the Gauss and Weingarten equations.
fn frame_rate(dir: Dir, c: &Coef, h: &Second, fr: &Frame) -> Frame {
    let [fx, fy, n] = *fr;
    let [h11, h12, h22] = *h;
    let ch = &c.ch;
    match dir {
        Dir::X => [
            fx * ch.c1_11 + fy * ch.c2_11 + n * h11,
            fx * ch.c1_12 + fy * ch.c2_12 + n * h12,
            fx * (-h11 / c.e) - fy * (h12 / c.g),
        ],
        Dir::Y => [
            fx * ch.c1_12 + fy * ch.c2_12 + n * h12,
            fx * ch.c1_22 + fy * ch.c2_22 + n * h22,
            fx * (-h12 / c.e) - fy * (h22 / c.g),
        ],
    }
}

fn axpy(a: &Frame, s: f64, b: &Frame) -> Frame {
    [a[0] + b[0] * s, a[1] + b[1] * s, a[2] + b[2] * s]
}

/// Value at `x ∈ [t[k], t[k+1]]` by Lagrange interpolation on up to four
/// surrounding nodes.
fn interp_at(t: &[f64], vals: &[Second], k: usize, x: f64) -> Second {
    let n = t.len();
    let m = n.min(4);
    let start = (k.saturating_sub(1)).min(n - m);
    let mut out = [0.0; 3];
    for a in start..start + m {
        let mut w = 1.0;
        for b in start..start + m {
            if a != b {
                w *= (x - t[b]) / (t[a] - t[b]);
            }
        }
        for c in 0..3 {
            out[c] += w * vals[a][c];
        }
    }
    out
}

/// RK4 substeps per grid interval.
const SUBSTEPS: usize = 2;

/// Integrates the frame along one grid line by classical RK4, with metric
/// coefficients evaluated exactly and `h` interpolated between nodes.
fn integrate_line(
    dir: Dir,
    t: &[f64],
    h: &[Second],
    coef: &dyn Fn(f64) -> Result<Coef>,
    point: &dyn Fn(f64) -> (f64, f64),
    start: Frame,
) -> Result<Vec<Frame>> {
    let mut out = Vec::with_capacity(t.len());
    out.push(start);
    let mut fr = start;
    let mut c0 = coef(t[0])?;
    for k in 0..t.len() - 1 {
        let dt = (t[k + 1] - t[k]) / SUBSTEPS as f64;
        let mut h0 = h[k];
        for s in 0..SUBSTEPS {
            let a = t[k] + dt * s as f64;
            let last = s + 1 == SUBSTEPS;
            let b = if last { t[k + 1] } else { a + dt };
            let cm = coef(a + 0.5 * dt)?;
            let c1 = coef(b)?;
            let hm = interp_at(t, h, k, a + 0.5 * dt);
            let h1 = if last { h[k + 1] } else { interp_at(t, h, k, b) };
            let k1 = frame_rate(dir, &c0, &h0, &fr);
            let k2 = frame_rate(dir, &cm, &hm, &axpy(&fr, 0.5 * dt, &k1));
            let k3 = frame_rate(dir, &cm, &hm, &axpy(&fr, 0.5 * dt, &k2));
            let k4 = frame_rate(dir, &c1, &h1, &axpy(&fr, dt, &k3));
            for c in 0..3 {
                fr[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (dt / 6.0);
            }
            c0 = c1;
            h0 = h1;
        }
        let norm = fr[2].norm();
        if !(0.9..=1.1).contains(&norm) {
            let (x, y) = point(t[k + 1]);
            return Err(Error::FrameDrift { x, y, norm });
        }
        out.push(fr);
    }
    Ok(out)
}

/// Integrates `f` along a line from its tangent `p` and the tangent's
/// derivative `dp`, with the trapezoid rule plus the endpoint-derivative
/// correction `Δt²/12 (p'_k − p'_{k+1})`.
fn integrate_position(t: &[f64], p: &[Vec3], dp: &[Vec3], start: Vec3) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(t.len());
    let mut f = start;
    out.push(f);
    for k in 0..t.len() - 1 {
        let dt = t[k + 1] - t[k];
        f += (p[k] + p[k + 1]) * (0.5 * dt) + (dp[k] - dp[k + 1]) * (dt * dt / 12.0);
        out.push(f);
    }
    out
}

/// Reconstructs `f` from the form and the metric: the frame is integrated
/// along the base row in `x`, then up every column in `y`. Requires `κ < 0`
/// at every node.
pub fn integrate_frame(family: &MetricFamily, form: &SecondFundamentalFormField, base: Option<BaseFrame>) -> Result<ImmersionGrid> {
    let nx = form.xs.len();
    exec::try_map_range(nx * form.ys.len(), |k| gauss_curvature(family, form.xs[k % nx], form.ys[k / nx]).map(|_| ()))?;
    integrate_frame_unchecked(family, form, base)
}

/// [`integrate_frame`] without the curvature gate, for any diagonal metric
/// (flat inputs included).
pub fn integrate_frame_unchecked(
    family: &MetricFamily,
    form: &SecondFundamentalFormField,
    base: Option<BaseFrame>,
) -> Result<ImmersionGrid> {
    let (xs, ys) = (&form.xs, &form.ys);
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 2 || ny < 2 || form.l.len() != nx * ny || form.m.len() != nx * ny || form.n.len() != nx * ny {
        return Err(Error::InvalidInput("frame integration needs a form on at least a 2×2 grid".into()));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) || ys.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("form grid must be strictly increasing".into()));
    }
    let nodes = exec::try_map_range(nx * ny, |k| coef_at(family, xs[k % nx], ys[k / nx]))?;
    let h: Vec<Second> = (0..nx * ny)
        .map(|k| {
            let s = (nodes[k].e * nodes[k].g).sqrt();
            [s * form.l[k], s * form.m[k], s * form.n[k]]
        })
        .collect();

    let c00 = &nodes[0];
    let base = base.unwrap_or_else(|| BaseFrame::standard(c00.e, c00.g));
    let defect = base.defect(c00.e, c00.g);
    if !(defect <= 1e-8 * (1.0 + c00.e.max(c00.g))) {
        return Err(Error::IncompatibleBase { defect });
    }
    let start: Frame = [base.fx, base.fy, base.n];

    let row_h = |j: usize| -> Vec<Second> { (0..nx).map(|i| h[j * nx + i]).collect() };
    let col_h = |i: usize| -> Vec<Second> { (0..ny).map(|j| h[j * nx + i]).collect() };
    let along_x = |j: usize, from: Frame| {
        let y = ys[j];
        integrate_line(Dir::X, xs, &row_h(j), &|x| coef_at(family, x, y), &|x| (x, y), from)
    };
    let along_y = |i: usize, from: Frame| {
        let x = xs[i];
        integrate_line(Dir::Y, ys, &col_h(i), &|y| coef_at(family, x, y), &|y| (x, y), from)
    };
    let rate_at = |dir: Dir, k: usize, fr: &Frame| frame_rate(dir, &nodes[k], &h[k], fr);

    // Row first: base row, then every column.
    let base_row = along_x(0, start)?;
    let columns = exec::try_map_range(nx, |i| along_y(i, base_row[i]))?;
    let mut frames = vec![start; nx * ny];
    for (i, col) in columns.iter().enumerate() {
        for (j, fr) in col.iter().enumerate() {
            frames[j * nx + i] = *fr;
        }
    }

    let base_fx: Vec<Vec3> = (0..nx).map(|i| frames[i][0]).collect();
    let base_dfx: Vec<Vec3> = (0..nx).map(|i| rate_at(Dir::X, i, &frames[i])[0]).collect();
    let row_f = integrate_position(xs, &base_fx, &base_dfx, base.f);
    let f_cols = exec::map_range(nx, |i| {
        let fy: Vec<Vec3> = (0..ny).map(|j| frames[j * nx + i][1]).collect();
        let dfy: Vec<Vec3> = (0..ny).map(|j| rate_at(Dir::Y, j * nx + i, &frames[j * nx + i])[1]).collect();
        integrate_position(ys, &fy, &dfy, row_f[i])
    });
    let mut f = vec![Vec3::zeros(); nx * ny];
    for (i, col) in f_cols.iter().enumerate() {
        for (j, p) in col.iter().enumerate() {
            f[j * nx + i] = *p;
        }
    }

    // Column first, only along the two edges that reach the far corner.
    let left = along_y(0, start)?;
    let top = along_x(ny - 1, left[ny - 1])?;
    let left_fy: Vec<Vec3> = left.iter().map(|fr| fr[1]).collect();
    let left_dfy: Vec<Vec3> = (0..ny).map(|j| rate_at(Dir::Y, j * nx, &left[j])[1]).collect();
    let left_f = integrate_position(ys, &left_fy, &left_dfy, base.f);
    let top_fx: Vec<Vec3> = top.iter().map(|fr| fr[0]).collect();
    let top_dfx: Vec<Vec3> = (0..nx).map(|i| rate_at(Dir::X, (ny - 1) * nx + i, &top[i])[0]).collect();
    let top_f = integrate_position(xs, &top_fx, &top_dfx, left_f[ny - 1]);
    let far = nx * ny - 1;
    let path_discrepancy = (top_f[nx - 1] - f[far]).norm();
    let frame_path_discrepancy = (0..3)
        .map(|c| (top[nx - 1][c] - frames[far][c]).norm())
        .fold(0.0, f64::max);

    Ok(ImmersionGrid {
        xs: xs.clone(),
        ys: ys.clone(),
        f,
        fx: frames.iter().map(|fr| fr[0]).collect(),
        fy: frames.iter().map(|fr| fr[1]).collect(),
        n: frames.iter().map(|fr| fr[2]).collect(),
        e: nodes.iter().map(|c| c.e).collect(),
        g: nodes.iter().map(|c| c.g).collect(),
        path_discrepancy,
        frame_path_discrepancy,
    })
}

/// Height function of a helicoid immersion, with its derivative.
#[derive(Clone)]
pub enum Psi {
    /// `ψ(x) = k·x`.
    Linear(f64),
    Custom(Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>),
}

impl Psi {
    /// `(ψ(x), ψ'(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            Psi::Linear(k) => (k * x, *k),
            Psi::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Linear(k) => write!(f, "Linear({k})"),
            Psi::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ClosedFormImmersion {
    /// `(x − x³/3 + xy², −y − x²y + y³/3, x² − y²)`.
    Enneper,
    /// `(R sin x, R cos x, ∫₀^y p (c cosh(s/c))^{p−1} ds)` with
    /// `R = (c cosh(y/c))^p`, `p = 1/(β²−1)`.
    CatenoidBeta { c: f64, beta: f64 },
    /// `((c sinh(y/c))^α sin x, −(c sinh(y/c))^α cos x, ψ(x))`.
    HelicoidAlphaPsi { c: f64, alpha: f64, psi: Psi },
    /// `(c cosh(y/c) sin x, c cosh(y/c) cos x, y)`.
    StdCatenoid { c: f64 },
    /// `(c sinh(y/c) sin x, −c sinh(y/c) cos x, c x)`.
    StdHelicoid { c: f64 },
}

/// Value and first partials of an immersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmersionJet {
    pub f: Vec3,
    pub fx: Vec3,
    pub fy: Vec3,
}

impl ImmersionJet {
    /// `(E, F, G)` of the pullback metric.
    pub fn metric(&self) -> (f64, f64, f64) {
        (self.fx.dot(&self.fx), self.fx.dot(&self.fy), self.fy.dot(&self.fy))
    }
}

// Eight-point Gauss–Legendre rule on [−1, 1].
const GL_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let panels = ((b - a).abs() / 0.25).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + h * (p as f64 + 0.5);
        for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            total += w * (f(mid + 0.5 * h * t) + f(mid - 0.5 * h * t));
        }
    }
    0.5 * h * total
}

impl ClosedFormImmersion {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            ClosedFormImmersion::Enneper => Ok(()),
            ClosedFormImmersion::CatenoidBeta { c, beta } => {
                if !(c.is_finite() && *c != 0.0) {
                    return bad(format!("c must be finite and nonzero, got {c}"));
                }
                if !(*beta > 1.0 && beta.is_finite()) {
                    return bad(format!("beta must exceed 1, got {beta}"));
                }
                Ok(())
            }
            ClosedFormImmersion::HelicoidAlphaPsi { c, alpha, .. } => {
                if !(c.is_finite() && *c != 0.0) {
                    return bad(format!("c must be finite and nonzero, got {c}"));
                }
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("alpha must be positive, got {alpha}"));
                }
                Ok(())
            }
            ClosedFormImmersion::StdCatenoid { c } | ClosedFormImmersion::StdHelicoid { c } => {
                if !(c.is_finite() && *c != 0.0) {
                    return bad(format!("c must be finite and nonzero, got {c}"));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClosedFormImmersion::Enneper => "enneper",
            ClosedFormImmersion::CatenoidBeta { .. } => "catenoid-beta",
            ClosedFormImmersion::HelicoidAlphaPsi { .. } => "helicoid-alpha-psi",
            ClosedFormImmersion::StdCatenoid { .. } => "std-catenoid",
            ClosedFormImmersion::StdHelicoid { .. } => "std-helicoid",
        }
    }

    /// `f` and its analytic partials at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64) -> Result<ImmersionJet> {
        self.validate()?;
        let (s, co) = x.sin_cos();
        let jet = match self {
            ClosedFormImmersion::Enneper => ImmersionJet {
                f: Vec3::new(x - x * x * x / 3.0 + x * y * y, -y - x * x * y + y * y * y / 3.0, x * x - y * y),
                fx: Vec3::new(1.0 - x * x + y * y, -2.0 * x * y, 2.0 * x),
                fy: Vec3::new(2.0 * x * y, -1.0 - x * x + y * y, -2.0 * y),
            },
            ClosedFormImmersion::CatenoidBeta { c, beta } => {
                let p = 1.0 / (beta * beta - 1.0);
                // (c cosh)^p, written via c² so that negative c is defined.
                let radius = |t: f64| (c * c * (t / c).cosh().powi(2)).powf(0.5 * p);
                let height_rate = |t: f64| p * radius(t) / (c.abs() * (t / c).cosh());
                let r = radius(y);
                let r_y = p * r * (y / c).tanh() / c;
                ImmersionJet {
                    f: Vec3::new(r * s, r * co, gauss_legendre(height_rate, 0.0, y)),
                    fx: Vec3::new(r * co, -r * s, 0.0),
                    fy: Vec3::new(r_y * s, r_y * co, height_rate(y)),
                }
            }
            ClosedFormImmersion::HelicoidAlphaPsi { c, alpha, psi } => {
                let sh = c * (y / c).sinh();
                if sh < 0.0 && alpha.fract() != 0.0 {
                    return Err(Error::Domain {
                        family: "helicoid-alpha-psi",
                        x,
                        y,
                        reason: "c·sinh(y/c) < 0 with non-integer alpha",
                    });
                }
                let r = sh.powf(*alpha);
                let r_y = alpha * sh.powf(alpha - 1.0) * (y / c).cosh();
                let (ps, dps) = psi.eval(x);
                ImmersionJet {
                    f: Vec3::new(r * s, -r * co, ps),
                    fx: Vec3::new(r * co, r * s, dps),
                    fy: Vec3::new(r_y * s, -r_y * co, 0.0),
                }
            }
            ClosedFormImmersion::StdCatenoid { c } => {
                let (ch, sh) = ((y / c).cosh(), (y / c).sinh());
                ImmersionJet {
                    f: Vec3::new(c * ch * s, c * ch * co, y),
                    fx: Vec3::new(c * ch * co, -c * ch * s, 0.0),
                    fy: Vec3::new(sh * s, sh * co, 1.0),
                }
            }
            ClosedFormImmersion::StdHelicoid { c } => {
                let (ch, sh) = ((y / c).cosh(), (y / c).sinh());
                ImmersionJet {
                    f: Vec3::new(c * sh * s, -c * sh * co, c * x),
                    fx: Vec3::new(c * sh * co, c * sh * s, *c),
                    fy: Vec3::new(ch * s, -ch * co, 0.0),
                }
            }
        };
        Ok(jet)
    }

    pub fn point(&self, x: f64, y: f64) -> Result<Vec3> {
        Ok(self.jet(x, y)?.f)
    }

    /// `(E, F, G)` from the analytic partials.
    pub fn induced_metric(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        Ok(self.jet(x, y)?.metric())
    }

    /// Samples `f` on a grid, rows by `y`.
    pub fn sample(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec3>> {
        let nx = xs.len();
        exec::try_map_range(nx * ys.len(), |k| self.point(xs[k % nx], ys[k / nx]))
    }
}

/// Rigid motion `p ↦ R p + t` with the residual distances it leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidAlignment {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
    pub max_distance: f64,
    pub rms: f64,
}

impl RigidAlignment {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

/// Best rotation and translation taking `src` onto `dst` in the least
/// squares sense (orthogonal Procrustes with the reflection excluded).
pub fn align_rigid(src: &[Vec3], dst: &[Vec3]) -> Result<RigidAlignment> {
    if src.len() != dst.len() || src.is_empty() {
        return Err(Error::InvalidInput("alignment needs two non-empty point sets of equal size".into()));
    }
    let count = src.len() as f64;
    let cs = src.iter().sum::<Vec3>() / count;
    let cd = dst.iter().sum::<Vec3>() / count;
    let mut cov = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        cov += (s - cs) * (d - cd).transpose();
    }
    let svd = cov.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::InvalidInput("SVD failed during alignment".into())),
    };
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let rotation = v * Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * u.transpose();
    let translation = cd - rotation * cs;
    let mut max_distance: f64 = 0.0;
    let mut sq = 0.0;
    for (s, t) in src.iter().zip(dst) {
        let dist = (rotation * s + translation - t).norm();
        max_distance = max_distance.max(dist);
        sq += dist * dist;
    }
    Ok(RigidAlignment { rotation, translation, max_distance, rms: (sq / count).sqrt() })
}

/// Relative threshold on the metric variation for a deformation to count as
/// isometric.
pub const DEFORMATION_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationReport {
    pub is_isometric_deformation: bool,
    /// Max over nodes and components of `max_τ g − min_τ g`.
    pub max_metric_variation: f64,
    /// Max `|g_ij|` over nodes and `τ`, the scale for the threshold.
    pub scale: f64,
    pub taus: Vec<f64>,
}

/// Checks whether `Φ_τ = sin τ · f_hel^{α,ψ} + cos τ · f_cat^β` induces the
/// same metric for every sampled `τ ∈ [0, π/2]`. The catenoid enters with
/// its first two components exchanged, `(R cos x, R sin x, ·)`, which is
/// the orientation conjugate to the helicoid.
pub fn deformation_test(
    c: f64,
    alpha: f64,
    beta: f64,
    psi: &Psi,
    tau_samples: usize,
    window: &Rect,
    nx: usize,
    ny: usize,
) -> Result<DeformationReport> {
    if tau_samples < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 tau samples, got {tau_samples}")));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("deformation grid must be non-empty".into()));
    }
    let hel = ClosedFormImmersion::HelicoidAlphaPsi { c, alpha, psi: psi.clone() };
    let cat = ClosedFormImmersion::CatenoidBeta { c, beta };
    hel.validate()?;
    cat.validate()?;
    let swap = |v: Vec3| Vec3::new(v.y, v.x, v.z);
    let taus: Vec<f64> = (0..tau_samples)
        .map(|k| FRAC_PI_2 * k as f64 / (tau_samples - 1) as f64)
        .collect();
    let pts = window.grid(nx, ny);
    let per_point = exec::try_map_range(pts.len(), |k| {
        let (x, y) = pts[k];
        let a = hel.jet(x, y)?;
        let b = cat.jet(x, y)?;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &tau in &taus {
            let (st, ct) = tau.sin_cos();
            let phi = ImmersionJet {
                f: a.f * st + swap(b.f) * ct,
                fx: a.fx * st + swap(b.fx) * ct,
                fy: a.fy * st + swap(b.fy) * ct,
            };
            let (e, f, g) = phi.metric();
            for (c, val) in [e, f, g].into_iter().enumerate() {
                lo[c] = lo[c].min(val);
                hi[c] = hi[c].max(val);
            }
        }
        let variation = (0..3).map(|c| hi[c] - lo[c]).fold(0.0, f64::max);
        let scale = (0..3).map(|c| hi[c].abs().max(lo[c].abs())).fold(0.0, f64::max);
        Ok::<_, Error>((variation, scale))
    })?;
    let max_metric_variation = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
    let scale = per_point.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(DeformationReport {
        is_isometric_deformation: max_metric_variation < DEFORMATION_RTOL * scale.max(f64::MIN_POSITIVE),
        max_metric_variation,
        scale,
        taus,
    })
}
