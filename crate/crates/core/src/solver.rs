//! Explicit solver for the viscous Riemann-invariant system
//!
//! ```text
//! w_y + z w_x = ε w_xx − 2ε v_x w_x / v + S⁽¹⁾
//! z_y + w z_x = ε z_xx − 2ε v_x z_x / v + S⁽²⁾
//! ```
//!
//! with `y` as the evolution variable, plus recovery of the second
//! fundamental form and weak Codazzi residuals.

use crate::error::{Error, Result};
use crate::exec;
use crate::metric::{GeometrySample, MetricFamily};
use crate::poly::Cubic2;
use crate::region::{containment, SquareRegion};
use crate::source;

/// Uniform grid `x_i = x0 + i·dx`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XGrid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl XGrid {
    /// `n` points spanning `[a, b]` inclusive.
    pub fn span(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 3 || !(b > a) {
            return Err(Error::InvalidInput(format!("x grid needs n >= 3 and a < b, got n={n}, [{a}, {b}]")));
        }
        Ok(XGrid { x0: a, dx: (b - a) / (n - 1) as f64, n })
    }

    /// `n` points on a periodic cell `[a, b)`.
    pub fn periodic(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 3 || !(b > a) {
            return Err(Error::InvalidInput(format!("x grid needs n >= 3 and a < b, got n={n}, [{a}, {b}]")));
        }
        Ok(XGrid { x0: a, dx: (b - a) / n as f64, n })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub grid: XGrid,
    pub y: f64,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
}

impl StateField {
    pub fn from_uv(grid: XGrid, y: f64, u: &[f64], v: &[f64]) -> Result<Self> {
        if u.len() != grid.n || v.len() != grid.n {
            return Err(Error::InvalidInput("state arrays must match the grid length".into()));
        }
        Ok(StateField {
            grid,
            y,
            w: u.iter().zip(v).map(|(a, b)| a + b).collect(),
            z: u.iter().zip(v).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn uniform(grid: XGrid, y: f64, u: f64, v: f64) -> Self {
        StateField { grid, y, w: vec![u + v; grid.n], z: vec![u - v; grid.n] }
    }

    pub fn u(&self, i: usize) -> f64 {
        0.5 * (self.w[i] + self.z[i])
    }

    pub fn v(&self, i: usize) -> f64 {
        0.5 * (self.w[i] - self.z[i])
    }

    pub fn rho(&self, i: usize) -> f64 {
        1.0 / self.v(i)
    }

    pub fn m(&self, i: usize) -> f64 {
        self.u(i) / self.v(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Fixed `(w, z)` ghost values beyond each end.
    FarFieldDirichlet { left: (f64, f64), right: (f64, f64) },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub y_span: (f64, f64),
    pub cfl: f64,
    pub boundary: Boundary,
    pub v_floor: f64,
    /// Record a snapshot every this many steps (when `record_dy` is unset).
    pub record_every: usize,
    /// Record at the levels `y0 + k·record_dy`, landing on them exactly.
    pub record_dy: Option<f64>,
    /// Upper bound on the step, on top of the stability bound.
    pub max_dy: Option<f64>,
}

impl SolverConfig {
    pub fn new(epsilon: f64, y_span: (f64, f64), boundary: Boundary) -> Self {
        SolverConfig {
            epsilon,
            y_span,
            cfl: 0.9,
            boundary,
            v_floor: 1e-6,
            record_every: 1,
            record_dy: None,
            max_dy: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl must lie in (0, 1), got {}", self.cfl));
        }
        if !(self.y_span.1 >= self.y_span.0) {
            return bad(format!("y span must be increasing, got {:?}", self.y_span));
        }
        if !(self.v_floor > 0.0) {
            return bad(format!("v_floor must be positive, got {}", self.v_floor));
        }
        if self.record_every == 0 {
            return bad("record_every must be positive".into());
        }
        if let Some(r) = self.record_dy {
            if !(r > 0.0) {
                return bad(format!("record_dy must be positive, got {r}"));
            }
        }
        if let Some(m) = self.max_dy {
            if !(m > 0.0) {
                return bad(format!("max_dy must be positive, got {m}"));
            }
        }
        Ok(())
    }
}

/// Source cubics `(S⁽¹⁾, S⁽²⁾)` in `(u, v)` along a row of the grid.
pub trait BalanceSource: Sync {
    fn row(&self, xs: &[f64], y: f64) -> Result<Vec<(Cubic2, Cubic2)>>;
}

impl BalanceSource for MetricFamily {
    fn row(&self, xs: &[f64], y: f64) -> Result<Vec<(Cubic2, Cubic2)>> {
        exec::try_map_range(xs.len(), |i| {
            Ok(source::general_cubics(&GeometrySample::at(self, xs[i], y)?))
        })
    }
}

/// `S ≡ 0`, for testing the transport part alone.
pub struct ZeroSource;

impl BalanceSource for ZeroSource {
    fn row(&self, xs: &[f64], _y: f64) -> Result<Vec<(Cubic2, Cubic2)>> {
        Ok(vec![(Cubic2::zero(), Cubic2::zero()); xs.len()])
    }
}

const MIN_STEP: f64 = 1e-12;

fn neighbours(a: &[f64], i: usize, boundary: &Boundary, ghost: (f64, f64)) -> (f64, f64) {
    let n = a.len();
    let left = if i > 0 {
        a[i - 1]
    } else if matches!(boundary, Boundary::Periodic) {
        a[n - 1]
    } else {
        ghost.0
    };
    let right = if i + 1 < n {
        a[i + 1]
    } else if matches!(boundary, Boundary::Periodic) {
        a[0]
    } else {
        ghost.1
    };
    (left, right)
}

fn ghosts(boundary: &Boundary) -> ((f64, f64), (f64, f64)) {
    match *boundary {
        Boundary::Periodic => ((0.0, 0.0), (0.0, 0.0)),
        Boundary::FarFieldDirichlet { left, right } => ((left.0, right.0), (left.1, right.1)),
    }
}

/// Largest stable step: the scheme is monotone for
/// `dy·(max|speed|/dx + 2ε/dx²) ≤ 1`, which is scaled by `cfl`. This is never
/// larger than `cfl·min(dx/max|speed|, dx²/(2ε))`.
pub fn stable_step(state: &StateField, cfg: &SolverConfig) -> f64 {
    let (gw, gz) = ghosts(&cfg.boundary);
    let dx = state.grid.dx;
    let mut speed: f64 = 0.0;
    for i in 0..state.grid.n {
        let (wl, wr) = neighbours(&state.w, i, &cfg.boundary, gw);
        let (zl, zr) = neighbours(&state.z, i, &cfg.boundary, gz);
        let v = state.v(i);
        let vx = 0.25 * ((wr - zr) - (wl - zl)) / dx;
        let mixed = 2.0 * cfg.epsilon * (vx / v).abs();
        speed = speed.max(state.z[i].abs() + mixed).max(state.w[i].abs() + mixed);
    }
    cfg.cfl / (speed / dx + 2.0 * cfg.epsilon / (dx * dx))
}

/// Right-hand side of one component at index `i`.
#[allow(clippy::too_many_arguments)]
fn rhs(
    a: &[f64],
    i: usize,
    speed: f64,
    v: f64,
    vx: f64,
    dx: f64,
    eps: f64,
    boundary: &Boundary,
    ghost: (f64, f64),
) -> f64 {
    let (al, ar) = neighbours(a, i, boundary, ghost);
    let ai = a[i];
    let upwind = if speed > 0.0 { (ai - al) / dx } else { (ar - ai) / dx };
    let diffusion = eps * (ar - 2.0 * ai + al) / (dx * dx);
    let mixed = -2.0 * eps * vx * (ar - al) / (2.0 * dx) / v;
    -speed * upwind + diffusion + mixed
}

/// Advances by `dy` with forward Euler; callers pick `dy` within the
/// stability bound.
pub fn step_by<S: BalanceSource + ?Sized>(state: &StateField, source: &S, cfg: &SolverConfig, dy: f64) -> Result<StateField> {
    let grid = state.grid;
    let dx = grid.dx;
    let eps = cfg.epsilon;
    let (gw, gz) = ghosts(&cfg.boundary);
    let xs = grid.xs();
    let cubics = source.row(&xs, state.y)?;
    let updates = exec::map_range(grid.n, |i| {
        let (wl, wr) = neighbours(&state.w, i, &cfg.boundary, gw);
        let (zl, zr) = neighbours(&state.z, i, &cfg.boundary, gz);
        let (u, v) = (state.u(i), state.v(i));
        let vx = 0.25 * ((wr - zr) - (wl - zl)) / dx;
        let (s1, s2) = (&cubics[i].0, &cubics[i].1);
        let dw = rhs(&state.w, i, state.z[i], v, vx, dx, eps, &cfg.boundary, gw) + s1.eval(u, v);
        let dz = rhs(&state.z, i, state.w[i], v, vx, dx, eps, &cfg.boundary, gz) + s2.eval(u, v);
        (state.w[i] + dy * dw, state.z[i] + dy * dz)
    });
    let y = state.y + dy;
    let (w, z): (Vec<f64>, Vec<f64>) = updates.into_iter().unzip();
    for i in 0..grid.n {
        let v = 0.5 * (w[i] - z[i]);
        if !(v >= cfg.v_floor) {
            return Err(Error::VFloorBreach { x: grid.x(i), y, v });
        }
    }
    Ok(StateField { grid, y, w, z })
}

/// One step of the stable size, also bounded by `max_dy`.
pub fn step<S: BalanceSource + ?Sized>(state: &StateField, source: &S, cfg: &SolverConfig) -> Result<StateField> {
    cfg.validate()?;
    check_floor(state, cfg)?;
    let mut dy = stable_step(state, cfg);
    if let Some(m) = cfg.max_dy {
        dy = dy.min(m);
    }
    if !(dy >= MIN_STEP) {
        return Err(Error::StepSizeUnderflow { y: state.y, dy });
    }
    step_by(state, source, cfg, dy)
}

fn check_floor(state: &StateField, cfg: &SolverConfig) -> Result<()> {
    for i in 0..state.grid.n {
        let v = state.v(i);
        if !(v >= cfg.v_floor) {
            return Err(Error::VFloorBreach { x: state.grid.x(i), y: state.y, v });
        }
    }
    Ok(())
}

/// Explicit diffusion-only update `a + dy·ε·a_xx`, which is monotone when
/// `dy ≤ dx²/(2ε)`.
pub fn diffusion_substep(a: &[f64], dx: f64, eps: f64, dy: f64, boundary: &Boundary, ghost: (f64, f64)) -> Vec<f64> {
    (0..a.len())
        .map(|i| {
            let (l, r) = neighbours(a, i, boundary, ghost);
            a[i] + dy * eps * (r - 2.0 * a[i] + l) / (dx * dx)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<StateField>,
    /// Containment overshoot per snapshot when a square was supplied.
    pub overshoot: Vec<Option<f64>>,
    pub steps: usize,
}

impl Trajectory {
    pub fn max_overshoot(&self) -> Option<f64> {
        self.overshoot
            .iter()
            .flatten()
            .copied()
            .reduce(f64::max)
    }

    pub fn last(&self) -> &StateField {
        self.snapshots.last().expect("a trajectory holds at least the initial state")
    }
}

/// A failed run with everything recorded before the fault.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl std::fmt::Display for EvolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} steps)", self.error, self.partial.steps)
    }
}

impl std::error::Error for EvolveFailure {}

/// Integrates from `y_span.0` to `y_span.1`, recording snapshots and, when a
/// square is given, its containment overshoot. Leaving the square is
/// reported, not fatal.
pub fn evolve<S: BalanceSource + ?Sized>(
    initial: &StateField,
    source: &S,
    cfg: &SolverConfig,
    square: Option<&SquareRegion>,
) -> std::result::Result<Trajectory, EvolveFailure> {
    let overshoot_of = |s: &StateField| square.map(|q| containment(s, q).max_overshoot);
    let mut traj = Trajectory {
        snapshots: vec![initial.clone()],
        overshoot: vec![overshoot_of(initial)],
        steps: 0,
    };
    let fail = |error: Error, traj: Trajectory| Err(EvolveFailure { error, partial: traj });
    if let Err(e) = cfg.validate().and_then(|_| check_floor(initial, cfg)) {
        return fail(e, traj);
    }
    let (y0, y1) = cfg.y_span;
    let mut state = initial.clone();
    state.y = y0;
    let mut next_record = 1usize;
    let level = |k: usize| match cfg.record_dy {
        Some(r) => (y0 + r * k as f64).min(y1),
        None => y1,
    };
    let snap = 1e-12 * y1.abs().max(1.0);

    while state.y < y1 - snap {
        let mut dy = stable_step(&state, cfg);
        if let Some(m) = cfg.max_dy {
            dy = dy.min(m);
        }
        if !(dy >= MIN_STEP) {
            return fail(Error::StepSizeUnderflow { y: state.y, dy }, traj);
        }
        let target = level(next_record);
        let landing = dy >= target - state.y - snap;
        if landing {
            dy = target - state.y;
        }
        state = match step_by(&state, source, cfg, dy) {
            Ok(s) => s,
            Err(e) => return fail(e, traj),
        };
        traj.steps += 1;
        if landing {
            state.y = target;
        }
        let record = match cfg.record_dy {
            Some(_) => landing,
            None => traj.steps % cfg.record_every == 0 || state.y >= y1 - snap,
        };
        if landing {
            next_record += 1;
        }
        if record {
            traj.overshoot.push(overshoot_of(&state));
            traj.snapshots.push(state.clone());
        }
    }
    Ok(traj)
}

/// Second fundamental form on a rectangular `(x, y)` record grid, rows by `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalFormField {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub l: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub lt: Vec<f64>,
    pub mt: Vec<f64>,
    pub nt: Vec<f64>,
}

impl SecondFundamentalFormField {
    pub fn at(&self, i: usize, j: usize) -> (f64, f64, f64) {
        let k = j * self.xs.len() + i;
        (self.l[k], self.m[k], self.n[k])
    }

    /// Samples an analytic `(L, M, N)` on the grid, with the normalised
    /// fields taken from the family's `γ`.
    pub fn from_fn<F: Fn(f64, f64) -> (f64, f64, f64) + Sync + Send>(
        family: &MetricFamily,
        xs: &[f64],
        ys: &[f64],
        f: F,
    ) -> Result<Self> {
        let nx = xs.len();
        let vals = exec::try_map_range(nx * ys.len(), |k| {
            let (x, y) = (xs[k % nx], ys[k / nx]);
            let gamma = GeometrySample::at(family, x, y)?.gamma;
            Ok::<_, Error>((f(x, y), gamma))
        })?;
        let pick = |c: usize, scaled: bool| -> Vec<f64> {
            vals.iter()
                .map(|&((l, m, n), g)| {
                    let v = [l, m, n][c];
                    if scaled {
                        v / g
                    } else {
                        v
                    }
                })
                .collect()
        };
        Ok(SecondFundamentalFormField {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            l: pick(0, false),
            m: pick(1, false),
            n: pick(2, false),
            lt: pick(0, true),
            mt: pick(1, true),
            nt: pick(2, true),
        })
    }

    /// `max |L̃Ñ − M̃² + 1|`.
    pub fn normalized_gauss_residual(&self) -> f64 {
        (0..self.l.len())
            .map(|k| (self.lt[k] * self.nt[k] - self.mt[k] * self.mt[k] + 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// One row of `(L, M, N)` from the state and `γ` at each grid point:
/// `L̃ = 1/v`, `M̃ = −u/v`, `Ñ = (u² − v²)/v`, then scaled by `γ`.
pub fn recover_second_form(state: &StateField, gamma: &[f64]) -> Result<[Vec<f64>; 6]> {
    if gamma.len() != state.grid.n {
        return Err(Error::InvalidInput("gamma row must match the grid length".into()));
    }
    let n = state.grid.n;
    let mut out: [Vec<f64>; 6] = Default::default();
    for o in out.iter_mut() {
        o.reserve(n);
    }
    for i in 0..n {
        let (u, v) = (state.u(i), state.v(i));
        if !(v > 0.0) {
            return Err(Error::VFloorBreach { x: state.grid.x(i), y: state.y, v });
        }
        let (lt, mt, nt) = (1.0 / v, -u / v, (u * u - v * v) / v);
        let g = gamma[i];
        for (o, val) in out.iter_mut().zip([g * lt, g * mt, g * nt, lt, mt, nt]) {
            o.push(val);
        }
    }
    Ok(out)
}

/// Assembles the form over all snapshots of a trajectory.
pub fn form_from_snapshots(snapshots: &[StateField], family: &MetricFamily) -> Result<SecondFundamentalFormField> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::InvalidInput("no snapshots".into()))?;
    let xs = first.grid.xs();
    let mut f = SecondFundamentalFormField {
        xs: xs.clone(),
        ys: Vec::with_capacity(snapshots.len()),
        l: Vec::new(),
        m: Vec::new(),
        n: Vec::new(),
        lt: Vec::new(),
        mt: Vec::new(),
        nt: Vec::new(),
    };
    for s in snapshots {
        if s.grid != first.grid {
            return Err(Error::InvalidInput("snapshots must share one x grid".into()));
        }
        let gamma = exec::try_map_range(xs.len(), |i| Ok::<_, Error>(GeometrySample::at(family, xs[i], s.y)?.gamma))?;
        let [l, m, n, lt, mt, nt] = recover_second_form(s, &gamma)?;
        f.ys.push(s.y);
        f.l.extend(l);
        f.m.extend(m);
        f.n.extend(n);
        f.lt.extend(lt);
        f.mt.extend(mt);
        f.nt.extend(nt);
    }
    Ok(f)
}

/// Mass of the 1D bump `e·exp(−1/(1−t²))` on `(−1, 1)`.
const BUMP_MASS: f64 = 0.443_993_816_168_079_3 * std::f64::consts::E;

/// Tensor-product bump `φ((x−cx)/rx)·φ((y−cy)/ry)` with
/// `φ(t) = e·exp(−1/(1−t²))`, so that `φ(0) = 1`. Supported on
/// `[cx ± rx] × [cy ± ry]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

fn bump1(t: f64) -> (f64, f64) {
    if t.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let s = 1.0 - t * t;
    let b = (1.0 - 1.0 / s).exp();
    (b, b * (-2.0 * t / (s * s)))
}

impl Bump {
    /// `(φ, φ_x, φ_y)` at a point.
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let (bx, dbx) = bump1((x - self.cx) / self.rx);
        let (by, dby) = bump1((y - self.cy) / self.ry);
        (bx * by, dbx * by / self.rx, bx * dby / self.ry)
    }

    /// `∫∫ φ`.
    pub fn mass(&self) -> f64 {
        BUMP_MASS * BUMP_MASS * self.rx * self.ry
    }

    /// Five placements inside `[x0, x1] × [y0, y1]`: the centre and the four
    /// quadrant centres.
    pub fn default_set(x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<Bump> {
        let (wx, wy) = (x1 - x0, y1 - y0);
        let at = |fx: f64, fy: f64, r: f64| Bump { cx: x0 + fx * wx, cy: y0 + fy * wy, rx: r * wx, ry: r * wy };
        vec![
            at(0.5, 0.5, 0.25),
            at(0.25, 0.25, 0.2),
            at(0.75, 0.25, 0.2),
            at(0.25, 0.75, 0.2),
            at(0.75, 0.75, 0.2),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodazziResidual {
    /// Max over test functions of the first Codazzi functional.
    pub c1: f64,
    pub c2: f64,
    /// `max |LN − M² − κ|` over the grid.
    pub gauss: f64,
}

impl CodazziResidual {
    pub fn codazzi(&self) -> f64 {
        self.c1.max(self.c2)
    }
}

fn trapezoid_weights(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = 0.5 * (t[k + 1] - t[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

/// Weak residuals of both Codazzi equations against each test function, by
/// trapezoid quadrature on the form's grid, with derivatives moved onto `φ`.
pub fn codazzi_weak_residual(form: &SecondFundamentalFormField, family: &MetricFamily, tests: &[Bump]) -> Result<CodazziResidual> {
    let (nx, ny) = (form.xs.len(), form.ys.len());
    if form.l.len() != nx * ny {
        return Err(Error::InvalidInput("form arrays do not match the grid".into()));
    }
    let geo = exec::try_map_range(nx * ny, |k| {
        let s = GeometrySample::at(family, form.xs[k % nx], form.ys[k / nx])?;
        Ok::<_, Error>((s.christoffel, s.kappa))
    })?;
    let wx = trapezoid_weights(&form.xs);
    let wy = trapezoid_weights(&form.ys);

    let per_test = exec::map_slice(tests, |phi| {
        let (mut a1, mut a2) = (0.0, 0.0);
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let (p, px, py) = phi.eval(form.xs[i], form.ys[j]);
                if p == 0.0 && px == 0.0 && py == 0.0 {
                    continue;
                }
                let (l, m, n) = (form.l[k], form.m[k], form.n[k]);
                let c = &geo[k].0;
                let r1 = c.c2_22 * l - 2.0 * c.c2_12 * m + c.c2_11 * n;
                let r2 = -c.c1_22 * l + 2.0 * c.c1_12 * m - c.c1_11 * n;
                let w = wx[i] * wy[j];
                a1 += w * (m * px - l * py + r1 * p);
                a2 += w * (n * px - m * py + r2 * p);
            }
        }
        (a1.abs(), a2.abs())
    });
    let (c1, c2) = per_test
        .iter()
        .fold((0.0f64, 0.0f64), |(a, b), &(x, y)| (a.max(x), b.max(y)));
    let gauss = (0..nx * ny)
        .map(|k| (form.l[k] * form.n[k] - form.m[k] * form.m[k] - geo[k].1).abs())
        .fold(0.0, f64::max);
    Ok(CodazziResidual { c1, c2, gauss })
}

/// One run of a viscosity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub trajectory: Option<Trajectory>,
    pub failure: Option<EvolveFailure>,
    pub residual: Option<CodazziResidual>,
    pub normalized_gauss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// `(ε_a, ε_b, L¹ distance of the final states)` for successive runs.
    pub differences: Vec<(f64, f64, f64)>,
}

/// Runs `evolve` for each `ε` on a common record grid and measures residuals.
/// All runs share the initial stable step of the largest `ε`, which has the
/// tightest diffusive limit, so time discretisation does not vary across the
/// sweep.
pub fn viscosity_sweep(
    initial: &StateField,
    family: &MetricFamily,
    base: &SolverConfig,
    epsilons: &[f64],
    square: Option<&SquareRegion>,
    tests: &[Bump],
) -> Result<SweepReport> {
    if epsilons.is_empty() {
        return Err(Error::InvalidInput("epsilon list is empty".into()));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) || epsilons.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::InvalidInput(format!("epsilons must be positive and strictly decreasing, got {epsilons:?}")));
    }
    base.validate()?;
    let cap = stable_step(initial, &SolverConfig { epsilon: epsilons[0], ..*base });
    let record_dy = base
        .record_dy
        .unwrap_or((base.y_span.1 - base.y_span.0) / 32.0)
        .max(f64::MIN_POSITIVE);

    let entries = exec::map_slice(epsilons, |&epsilon| {
        let cfg = SolverConfig {
            epsilon,
            record_dy: Some(record_dy),
            max_dy: Some(base.max_dy.map_or(cap, |m| m.min(cap))),
            ..*base
        };
        match evolve(initial, family, &cfg, square) {
            Ok(traj) => {
                let measured = form_from_snapshots(&traj.snapshots, family).and_then(|form| {
                    let r = codazzi_weak_residual(&form, family, tests)?;
                    Ok((r, form.normalized_gauss_residual()))
                });
                match measured {
                    Ok((r, g)) => SweepEntry {
                        epsilon,
                        trajectory: Some(traj),
                        failure: None,
                        residual: Some(r),
                        normalized_gauss: Some(g),
                    },
                    Err(error) => SweepEntry {
                        epsilon,
                        failure: Some(EvolveFailure { error, partial: traj }),
                        trajectory: None,
                        residual: None,
                        normalized_gauss: None,
                    },
                }
            }
            Err(f) => SweepEntry {
                epsilon,
                trajectory: None,
                failure: Some(f),
                residual: None,
                normalized_gauss: None,
            },
        }
    });

    let differences = entries
        .windows(2)
        .filter_map(|p| {
            let (a, b) = (p[0].trajectory.as_ref()?, p[1].trajectory.as_ref()?);
            let (sa, sb) = (a.last(), b.last());
            let d: f64 = (0..sa.grid.n)
                .map(|i| (sa.w[i] - sb.w[i]).abs() + (sa.z[i] - sb.z[i]).abs())
                .sum::<f64>()
                * sa.grid.dx;
            Some((p[0].epsilon, p[1].epsilon, d))
        })
        .collect();
    Ok(SweepReport { entries, differences })
}

/// RK4 for the `x`-independent reduction `w_y = S⁽¹⁾`, `z_y = S⁽²⁾` at fixed
/// `x`. Returns `(y, w, z)` at every step, starting point included.
pub fn integrate_reduced<S: BalanceSource + ?Sized>(
    source: &S,
    x: f64,
    y_span: (f64, f64),
    steps: usize,
    wz0: (f64, f64),
) -> Result<Vec<(f64, f64, f64)>> {
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be positive".into()));
    }
    let f = |y: f64, w: f64, z: f64| -> Result<(f64, f64)> {
        let c = source.row(&[x], y)?;
        let (u, v) = (0.5 * (w + z), 0.5 * (w - z));
        Ok((c[0].0.eval(u, v), c[0].1.eval(u, v)))
    };
    let h = (y_span.1 - y_span.0) / steps as f64;
    let (mut w, mut z) = wz0;
    let mut out = vec![(y_span.0, w, z)];
    for k in 0..steps {
        let y = y_span.0 + h * k as f64;
        let k1 = f(y, w, z)?;
        let k2 = f(y + 0.5 * h, w + 0.5 * h * k1.0, z + 0.5 * h * k1.1)?;
        let k3 = f(y + 0.5 * h, w + 0.5 * h * k2.0, z + 0.5 * h * k2.1)?;
        let k4 = f(y + h, w + h * k3.0, z + h * k3.1)?;
        w += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        z += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        out.push((y_span.0 + h * (k + 1) as f64, w, z));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic_cfg(eps: f64) -> SolverConfig {
        SolverConfig::new(eps, (0.0, 1.0), Boundary::Periodic)
    }

    #[test]
    fn round_trip_uv_wz() {
        let g = XGrid::span(0.0, 1.0, 5).unwrap();
        let u = [0.1, -0.3, 2.0, 0.0, 1e-8];
        let v = [1.0, 0.5, 0.25, 3.0, 1.0];
        let s = StateField::from_uv(g, 0.0, &u, &v).unwrap();
        for i in 0..5 {
            assert!((s.u(i) - u[i]).abs() < 1e-15);
            assert!((s.v(i) - v[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_state_is_steady_without_source() {
        let g = XGrid::periodic(0.0, 1.0, 32).unwrap();
        let s = StateField::uniform(g, 0.0, 0.3, 0.8);
        let next = step(&s, &ZeroSource, &periodic_cfg(0.1)).unwrap();
        assert_eq!(next.w, s.w);
        assert_eq!(next.z, s.z);
        assert!(next.y > 0.0);
    }

    #[test]
    fn uniform_hyperbolic_step_is_forward_euler() {
        let g = XGrid::span(-1.0, 1.0, 16).unwrap();
        let s = StateField::uniform(g, 1.0, 0.0, 1.0);
        let cfg = SolverConfig::new(
            0.1,
            (1.0, 2.0),
            Boundary::FarFieldDirichlet { left: (1.0, -1.0), right: (1.0, -1.0) },
        );
        let dy = 1e-3;
        let next = step_by(&s, &MetricFamily::Hyperbolic, &cfg, dy).unwrap();
        for i in 0..16 {
            assert!((next.w[i] - (1.0 - 2.0 * dy)).abs() < 1e-15);
            assert!((next.z[i] - (-1.0 + 2.0 * dy)).abs() < 1e-15);
        }
    }

    #[test]
    fn v_floor_breach_reported() {
        let g = XGrid::periodic(0.0, 1.0, 8).unwrap();
        let s = StateField::uniform(g, 0.0, 0.0, 1e-7);
        assert!(matches!(step(&s, &ZeroSource, &periodic_cfg(0.1)), Err(Error::VFloorBreach { .. })));
    }

    #[test]
    fn diffusion_substep_is_monotone() {
        let n = 64;
        let a: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let (lo, hi) = a.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
        let (dx, eps) = (0.1, 0.5);
        let mut b = a.clone();
        for _ in 0..50 {
            b = diffusion_substep(&b, dx, eps, dx * dx / (2.0 * eps), &Boundary::Periodic, (0.0, 0.0));
            let (l, h) = b.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
            assert!(l >= lo - 1e-15 && h <= hi + 1e-15);
        }
    }

    #[test]
    fn zero_span_keeps_initial_only() {
        let g = XGrid::periodic(0.0, 1.0, 8).unwrap();
        let s = StateField::uniform(g, 1.0, 0.0, 1.0);
        let mut cfg = periodic_cfg(0.1);
        cfg.y_span = (1.0, 1.0);
        let t = evolve(&s, &MetricFamily::Hyperbolic, &cfg, None).unwrap();
        assert_eq!(t.snapshots.len(), 1);
        assert_eq!(t.steps, 0);
    }

    #[test]
    fn record_levels_are_exact() {
        let g = XGrid::periodic(0.0, 1.0, 16).unwrap();
        let s = StateField::uniform(g, 1.0, 0.0, 1.0);
        let mut cfg = periodic_cfg(0.1);
        cfg.y_span = (1.0, 2.0);
        cfg.record_dy = Some(0.25);
        let t = evolve(&s, &MetricFamily::Hyperbolic, &cfg, None).unwrap();
        let ys: Vec<f64> = t.snapshots.iter().map(|s| s.y).collect();
        assert_eq!(ys, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
    }

    #[test]
    fn gauss_identity_by_construction() {
        let g = XGrid::span(0.0, 1.0, 3).unwrap();
        let s = StateField::from_uv(g, 1.0, &[0.0, 1.0, -0.7], &[1.0, 1.0, 0.3]).unwrap();
        let [l, m, n, lt, mt, nt] = recover_second_form(&s, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((l[0], m[0], n[0]), (1.0, -0.0, -1.0));
        assert_eq!(nt[1], 0.0);
        for i in 0..3 {
            assert!((lt[i] * nt[i] - mt[i] * mt[i] + 1.0).abs() < 1e-12);
            assert!((l[i] * n[i] - m[i] * m[i] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn enneper_origin_scaling() {
        let f = MetricFamily::Enneper { alpha: 2.0 };
        let g = XGrid { x0: 0.0, dx: 1.0, n: 1 };
        let s = StateField::uniform(g, 0.0, 0.0, 1.0);
        let gamma = GeometrySample::at(&f, 0.0, 0.0).unwrap().gamma;
        let [l, m, n, ..] = recover_second_form(&s, &[gamma]).unwrap();
        assert!((l[0] - 2.0).abs() < 1e-14 && m[0] == 0.0 && (n[0] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn sweep_input_checks() {
        let g = XGrid::periodic(0.0, 1.0, 8).unwrap();
        let s = StateField::uniform(g, 1.0, 0.0, 1.0);
        let cfg = periodic_cfg(0.1);
        let tests = Bump::default_set(0.0, 1.0, 0.0, 1.0);
        assert!(viscosity_sweep(&s, &MetricFamily::Hyperbolic, &cfg, &[0.1, 0.2], None, &tests).is_err());
        assert!(viscosity_sweep(&s, &MetricFamily::Hyperbolic, &cfg, &[], None, &tests).is_err());
    }

    #[test]
    fn bump_mass_matches_quadrature() {
        let b = Bump { cx: 0.3, cy: -0.2, rx: 0.5, ry: 0.25 };
        let n = 400;
        let mut total = 0.0;
        for j in 0..=n {
            for i in 0..=n {
                let x = b.cx - b.rx + 2.0 * b.rx * i as f64 / n as f64;
                let y = b.cy - b.ry + 2.0 * b.ry * j as f64 / n as f64;
                total += b.eval(x, y).0;
            }
        }
        total *= (2.0 * b.rx / n as f64) * (2.0 * b.ry / n as f64);
        assert!((total / b.mass() - 1.0).abs() < 1e-10, "{total}");
    }
}
