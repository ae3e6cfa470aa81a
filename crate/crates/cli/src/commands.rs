//! Subcommand implementations. Each returns the files it wrote and a short
//! summary for stdout.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::sync::Arc;

use gauss_codazzi::immersion::{
    align_rigid, integrate_frame, integrate_frame_unchecked, ClosedFormImmersion, ImmersionGrid, Psi, Vec3,
};
use gauss_codazzi::metric::{eval_metric, sample_grid, CustomMetric, GeometrySample, MetricFamily, Rect};
use gauss_codazzi::region::{
    search_square, verify_square, EdgeReport, RegionCertificate, SearchOutcome, SearchSpace, SquareRegion,
    VerifyOptions,
};
use gauss_codazzi::solver::{
    codazzi_weak_residual, evolve, form_from_snapshots, integrate_reduced, recover_second_form, viscosity_sweep,
    Boundary, Bump, SecondFundamentalFormField, SolverConfig, StateField, Trajectory, XGrid,
};
use gauss_codazzi::source::{source_polynomial, zero_locus};

use crate::config::{ConfigError, RunConfig};
use crate::emit::{self, num, Csv};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical fault: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<gauss_codazzi::Error> for CliError {
    fn from(e: gauss_codazzi::Error) -> Self {
        if e.is_numerical_fault() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub summary: Vec<String>,
    pub exit_code: i32,
}

/// A run of one subcommand under a resolved configuration.
pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub command: &'a str,
    outcome: Outcome,
}

impl<'a> Run<'a> {
    pub fn new(cfg: &'a RunConfig, command: &'a str) -> Self {
        Run { cfg, command, outcome: Outcome::default() }
    }

    fn header(&self) -> String {
        emit::header("# ", "", self.command, &self.cfg.resolved())
    }

    fn path(&self, suffix: &str) -> PathBuf {
        let stem = if self.cfg.is_set("output.stem") {
            self.cfg.raw("output.stem").to_string()
        } else {
            self.command.split_whitespace().next().unwrap_or("out").to_string()
        };
        PathBuf::from(self.cfg.raw("output.dir")).join(format!("{stem}{suffix}"))
    }

    fn write(&mut self, suffix: &str, contents: &str) -> CliResult<()> {
        let path = self.path(suffix);
        emit::write_atomic(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.outcome.written.push(path);
        Ok(())
    }

    fn say(&mut self, line: impl Into<String>) {
        self.outcome.summary.push(line.into());
    }

    fn finish(self) -> Outcome {
        self.outcome
    }
}

fn grid_sizes(cfg: &RunConfig) -> CliResult<(usize, usize)> {
    let (nx, ny) = (cfg.usize("domain.nx")?, cfg.usize("domain.ny")?);
    if nx < 2 || ny < 2 {
        return Err(CliError::Config("domain.nx and domain.ny must be at least 2".into()));
    }
    Ok((nx, ny))
}

pub fn curvature(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut run = Run::new(cfg, "curvature");
    let family = cfg.family()?;
    let rect = cfg.domain()?;
    let (nx, ny) = grid_sizes(cfg)?;
    let samples = sample_grid(&family, &rect, nx, ny)?;
    let mut csv = Csv::new(
        run.header(),
        &[
            "x", "y", "E", "G", "kappa", "gamma", "G1_11", "G1_12", "G1_22", "G2_11", "G2_12", "G2_22", "Gt1_11",
            "Gt1_12", "Gt1_22", "Gt2_11", "Gt2_12", "Gt2_22",
        ],
    );
    let mut kappa = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &samples {
        let mut row = vec![s.x, s.y, s.jet.e, s.jet.g, s.kappa, s.gamma];
        row.extend(s.christoffel.to_array());
        row.extend(s.normalized.to_array());
        csv.row(&row);
        kappa = (kappa.0.min(s.kappa), kappa.1.max(s.kappa));
    }
    run.write(".csv", &csv.finish())?;
    run.say(format!("{} points, kappa in [{}, {}]", samples.len(), num(kappa.0), num(kappa.1)));
    Ok(run.finish())
}

fn square(cfg: &RunConfig) -> CliResult<SquareRegion> {
    SquareRegion::new(
        cfg.f64("region.w_min")?,
        cfg.f64("region.w_max")?,
        cfg.f64("region.z_min")?,
        cfg.f64("region.z_max")?,
    )
    .map_err(|e| CliError::Config(format!("region: {e}")))
}

fn verify_options(cfg: &RunConfig) -> CliResult<VerifyOptions> {
    Ok(VerifyOptions {
        edge_samples: cfg.usize("region.edge_samples")?,
        xy_samples: cfg.usize("region.xy_samples")?,
        exact: cfg.bool("region.exact")?,
    })
}

const EDGE_COLUMNS: [&str; 13] =
    ["w_min", "w_max", "z_min", "z_max", "verdict", "edge", "required", "worst", "margin", "x", "y", "u", "v"];

fn edge_row(cert: &RegionCertificate, e: &EdgeReport) -> Vec<String> {
    let sq = cert.square;
    let (x, y, u, v) = e.location;
    let mut cells: Vec<String> = [sq.w_min, sq.w_max, sq.z_min, sq.z_max].iter().map(|&t| num(t)).collect();
    cells.push(format!("{:?}", cert.verdict));
    cells.push(e.edge.label().to_string());
    cells.push(format!("{:?}", e.required));
    cells.extend([e.worst, e.margin, x, y, u, v].iter().map(|&t| num(t)));
    cells
}

fn describe(cert: &RegionCertificate, out: &mut String) {
    let sq = cert.square;
    let _ = writeln!(
        out,
        "square: w in [{}, {}], z in [{}, {}]",
        num(sq.w_min),
        num(sq.w_max),
        num(sq.z_min),
        num(sq.z_max)
    );
    let _ = writeln!(out, "verdict: {:?}", cert.verdict);
    let _ = writeln!(out, "sampled verdict: {:?}", cert.sampled_verdict);
    let exact = match &cert.exact {
        gauss_codazzi::region::ExactStatus::Done { verdict, .. } => format!("{verdict:?}"),
        other => format!("{other:?}"),
    };
    let _ = writeln!(out, "exact check: {exact}");
    for e in &cert.edges {
        let (x, y, u, v) = e.location;
        let _ = writeln!(
            out,
            "edge {} ({:?}): worst {} margin {} at x={} y={} u={} v={}",
            e.edge.label(),
            e.required,
            num(e.worst),
            num(e.margin),
            num(x),
            num(y),
            num(u),
            num(v)
        );
    }
}

pub fn region_verify(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut run = Run::new(cfg, "region verify");
    let family = cfg.family()?;
    let domain = cfg.domain()?;
    let cert = verify_square(&family, &square(cfg)?, &domain, &verify_options(cfg)?)?;
    let mut report = run.header();
    describe(&cert, &mut report);
    let mut csv = Csv::new(run.header(), &EDGE_COLUMNS);
    for e in &cert.edges {
        csv.raw_row(&edge_row(&cert, e));
    }
    run.write(".txt", &report)?;
    run.write(".csv", &csv.finish())?;
    run.say(format!("{:?}", cert.verdict));
    Ok(run.finish())
}

pub fn region_search(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut run = Run::new(cfg, "region search");
    let family = cfg.family()?;
    let domain = cfg.domain()?;
    let space = match cfg.choice("region.space", &["box", "diamond"])? {
        "box" => SearchSpace::Box4 { w: cfg.pair("region.search_w")?, z: cfg.pair("region.search_z")? },
        _ => SearchSpace::Diamond { a: cfg.pair("region.search_a")?, b: cfg.pair("region.search_b")? },
    };
    let outcome = search_square(&family, &domain, &space, cfg.usize("region.steps")?, &verify_options(cfg)?)?;
    let mut report = run.header();
    let mut csv = Csv::new(run.header(), &EDGE_COLUMNS);
    match &outcome {
        SearchOutcome::Found { best, certified, tested } => {
            let _ = writeln!(report, "outcome: Found ({certified} of {tested} candidates certified)");
            describe(best, &mut report);
            for e in &best.edges {
                csv.raw_row(&edge_row(best, e));
            }
            let sq = best.square;
            run.say(format!(
                "Found w in [{}, {}], z in [{}, {}]",
                num(sq.w_min),
                num(sq.w_max),
                num(sq.z_min),
                num(sq.z_max)
            ));
        }
        SearchOutcome::NotFound { certificates } => {
            let _ = writeln!(report, "outcome: NotFound ({} candidates tested)", certificates.len());
            for cert in certificates {
                csv.raw_row(&edge_row(cert, &cert.worst_edge()));
            }
            run.say(format!("NotFound ({} candidates)", certificates.len()));
        }
    }
    run.write(".txt", &report)?;
    run.write(".csv", &csv.finish())?;
    Ok(run.finish())
}

/// Initial row `u = u0 + p sin θ`, `v = v0 + p cos θ` with `θ` one period
/// across the grid.
fn initial_state(cfg: &RunConfig, grid: XGrid, y0: f64) -> CliResult<StateField> {
    let (u0, v0, p) = (cfg.f64("solver.u0")?, cfg.f64("solver.v0")?, cfg.f64("solver.perturbation")?);
    let span = grid.dx * (grid.n - 1) as f64;
    let theta = |i: usize| 2.0 * PI * (grid.x(i) - grid.x0) / span;
    let u: Vec<f64> = (0..grid.n).map(|i| u0 + p * theta(i).sin()).collect();
    let v: Vec<f64> = (0..grid.n).map(|i| v0 + p * theta(i).cos()).collect();
    StateField::from_uv(grid, y0, &u, &v).map_err(|e| CliError::Config(format!("solver.u0/solver.v0: {e}")))
}

fn solver_setup(cfg: &RunConfig) -> CliResult<(StateField, SolverConfig)> {
    let rect = cfg.domain()?;
    let n = cfg.usize("solver.n")?;
    let periodic = cfg.choice("solver.boundary", &["dirichlet", "periodic"])? == "periodic";
    let grid = if periodic { XGrid::periodic(rect.x0, rect.x1, n) } else { XGrid::span(rect.x0, rect.x1, n) }
        .map_err(|e| CliError::Config(format!("solver.n/domain: {e}")))?;
    let init = initial_state(cfg, grid, rect.y0)?;
    let boundary = if periodic {
        Boundary::Periodic
    } else {
        Boundary::FarFieldDirichlet { left: (init.w[0], init.z[0]), right: (init.w[n - 1], init.z[n - 1]) }
    };
    let mut sc = SolverConfig::new(cfg.f64("solver.epsilon")?, (rect.y0, rect.y1), boundary);
    sc.cfl = cfg.f64("solver.cfl")?;
    sc.v_floor = cfg.f64("solver.v_floor")?;
    sc.record_every = cfg.usize("solver.record_every")?;
    sc.record_dy = cfg.opt_f64("solver.record_dy")?;
    sc.max_dy = cfg.opt_f64("solver.max_dy")?;
    Ok((init, sc))
}

fn trajectory_rows(csv: &mut Csv, family: &MetricFamily, eps: f64, traj: &Trajectory) -> CliResult<()> {
    for (s, over) in traj.snapshots.iter().zip(&traj.overshoot) {
        let gamma = (0..s.grid.n)
            .map(|i| GeometrySample::at(family, s.grid.x(i), s.y).map(|g| g.gamma))
            .collect::<Result<Vec<_>, _>>()?;
        let [l, m, n, ..] = recover_second_form(s, &gamma)?;
        for i in 0..s.grid.n {
            csv.row(&[
                eps,
                s.y,
                s.grid.x(i),
                s.u(i),
                s.v(i),
                s.w[i],
                s.z[i],
                l[i],
                m[i],
                n[i],
                over.unwrap_or(f64::NAN),
            ]);
        }
    }
    Ok(())
}

pub fn solve(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut run = Run::new(cfg, "solve");
    let family = cfg.family()?;
    let (init, sc) = solver_setup(cfg)?;
    let epsilons = if cfg.is_set("solver.epsilons") { cfg.list("solver.epsilons")? } else { vec![sc.epsilon] };
    let sq = square(cfg)?;
    let (y0, y1) = sc.y_span;
    let bumps = Bump::default_set(init.grid.x0, init.grid.x(init.grid.n - 1), y0, y1);
    let report = viscosity_sweep(&init, &family, &sc, &epsilons, Some(&sq), &bumps)?;

    let mut csv = Csv::new(run.header(), &["epsilon", "y", "x", "u", "v", "w", "z", "L", "M", "N", "overshoot"]);
    let mut sweep = Csv::new(
        run.header(),
        &["epsilon", "status", "steps", "max_overshoot", "codazzi", "c1", "c2", "gauss", "normalized_gauss", "l1_to_next"],
    );
    let mut fault: Option<String> = None;
    for (k, entry) in report.entries.iter().enumerate() {
        let traj = match (&entry.trajectory, &entry.failure) {
            (Some(t), _) => t,
            (None, Some(f)) => &f.partial,
            (None, None) => unreachable!("sweep entries carry a trajectory or a failure"),
        };
        trajectory_rows(&mut csv, &family, entry.epsilon, traj)?;
        if let Some(f) = &entry.failure {
            csv.raw_row(&[format!("#FAULT epsilon={}", num(entry.epsilon)), f.error.to_string()]);
            fault.get_or_insert_with(|| f.to_string());
        }
        let r = entry.residual;
        let nan = f64::NAN;
        let l1 = report.differences.get(k).map_or(nan, |d| d.2);
        sweep.raw_row(&[
            num(entry.epsilon),
            if entry.failure.is_some() { "fault".into() } else { "ok".into() },
            traj.steps.to_string(),
            num(traj.max_overshoot().unwrap_or(nan)),
            num(r.map_or(nan, |r| r.codazzi())),
            num(r.map_or(nan, |r| r.c1)),
            num(r.map_or(nan, |r| r.c2)),
            num(r.map_or(nan, |r| r.gauss)),
            num(entry.normalized_gauss.unwrap_or(nan)),
            num(l1),
        ]);
        run.say(format!(
            "epsilon={} steps={} max_overshoot={} codazzi={}",
            num(entry.epsilon),
            traj.steps,
            num(traj.max_overshoot().unwrap_or(nan)),
            num(r.map_or(nan, |r| r.codazzi()))
        ));
        if fault.is_some() && epsilons.len() == 1 {
            break;
        }
    }
    run.write(".csv", &csv.finish())?;
    run.write("_sweep.csv", &sweep.finish())?;
    if let Some(msg) = fault {
        run.say(format!("numerical fault: {msg}"));
        run.outcome.exit_code = 3;
    }
    Ok(run.finish())
}

struct Report {
    text: String,
}

impl Report {
    fn value(&mut self, key: &str, v: f64) {
        let _ = writeln!(self.text, "{key}: {}", num(v));
    }
}

fn immersion(cfg: &RunConfig) -> CliResult<(ClosedFormImmersion, Option<MetricFamily>)> {
    let c = cfg.f64("metric.c")?;
    let kind = cfg.choice("reconstruct.immersion", &["enneper", "catenoid-beta", "helicoid", "std-catenoid", "std-helicoid"])?;
    let pair = match kind {
        "enneper" => (ClosedFormImmersion::Enneper, Some(MetricFamily::Enneper { alpha: 2.0 })),
        "catenoid-beta" => {
            let beta = cfg.f64("metric.beta")?;
            (ClosedFormImmersion::CatenoidBeta { c, beta }, Some(MetricFamily::GeneralizedCatenoid { c, beta }))
        }
        "helicoid" => (
            ClosedFormImmersion::HelicoidAlphaPsi {
                c,
                alpha: cfg.f64("metric.alpha")?,
                psi: Psi::Linear(cfg.f64("reconstruct.psi_slope")?),
            },
            None,
        ),
        "std-catenoid" => (
            ClosedFormImmersion::StdCatenoid { c },
            Some(MetricFamily::GeneralizedCatenoid { c, beta: 2f64.sqrt() }),
        ),
        _ => (ClosedFormImmersion::StdHelicoid { c }, None),
    };
    pair.0.validate().map_err(|e| CliError::Config(format!("reconstruct.immersion: {e}")))?;
    Ok(pair)
}

fn frame_report(report: &mut Report, grid: &ImmersionGrid) {
    report.value("metric_residual", grid.metric_residual());
    report.value("normal_defect", grid.normal_defect());
    report.value("mixed_partial_defect", grid.mixed_partial_defect());
    report.value("path_discrepancy", grid.path_discrepancy);
    report.value("frame_path_discrepancy", grid.frame_path_discrepancy);
}

/// Second form of the catenoid `(c cosh(y/c) sin x, c cosh(y/c) cos x, y)`.
fn std_catenoid_form(c: f64, xs: &[f64], ys: &[f64]) -> CliResult<(MetricFamily, SecondFundamentalFormField)> {
    let family = MetricFamily::GeneralizedCatenoid { c, beta: 2f64.sqrt() };
    let form = SecondFundamentalFormField::from_fn(&family, xs, ys, |_, y| {
        let sech2 = 1.0 / (y / c).cosh().powi(2);
        (sech2, 0.0, -sech2 / (c * c))
    })?;
    Ok((family, form))
}

fn reduced_hyperbolic_form(cfg: &RunConfig, xs: &[f64], ys: &[f64]) -> CliResult<(MetricFamily, SecondFundamentalFormField)> {
    const SUB: usize = 8;
    let family = MetricFamily::Hyperbolic;
    let (u0, v0) = (cfg.f64("solver.u0")?, cfg.f64("solver.v0")?);
    let (y0, y1) = (ys[0], ys[ys.len() - 1]);
    let path = integrate_reduced(&family, xs[0], (y0, y1), (ys.len() - 1) * SUB, (u0 + v0, u0 - v0))?;
    let rows: Vec<(f64, f64)> = (0..ys.len())
        .map(|j| {
            let (_, w, z) = path[j * SUB];
            (0.5 * (w + z), 0.5 * (w - z))
        })
        .collect();
    let form = SecondFundamentalFormField::from_fn(&family, xs, ys, |_, y| {
        let j = ys.partition_point(|&t| t < y).min(ys.len() - 1);
        let (u, v) = rows[j];
        (1.0 / v, -u / v, (u * u - v * v) / v)
    })?;
    Ok((family, form))
}

pub fn reconstruct(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut run = Run::new(cfg, "reconstruct");
    let rect = cfg.domain()?;
    let (nx, ny) = grid_sizes(cfg)?;
    let xs = Rect::axis(rect.x0, rect.x1, nx);
    let ys = Rect::axis(rect.y0, rect.y1, ny);
    let source = cfg.choice("reconstruct.source", &["closed-form", "std-catenoid", "flat", "hyperbolic-ode", "solver"])?;
    let mut report = Report { text: run.header() };
    let _ = writeln!(report.text, "source: {source}");

    let mesh = match source {
        "closed-form" => {
            let (imm, family) = immersion(cfg)?;
            let mut f = Vec::with_capacity(nx * ny);
            let mut normals = Vec::with_capacity(nx * ny);
            let (mut max_f, mut max_de, mut max_dg) = (0.0f64, 0.0f64, 0.0f64);
            for &y in &ys {
                for &x in &xs {
                    let jet = imm.jet(x, y)?;
                    let (e, fm, g) = jet.metric();
                    max_f = max_f.max(fm.abs());
                    if let Some(fam) = &family {
                        let m = eval_metric(fam, x, y)?;
                        max_de = max_de.max((e - m.e).abs() / m.e);
                        max_dg = max_dg.max((g - m.g).abs() / m.g);
                    }
                    f.push(jet.f);
                    normals.push(jet.fx.cross(&jet.fy).normalize());
                }
            }
            let _ = writeln!(report.text, "immersion: {}", imm.name());
            report.value("max_abs_F", max_f);
            if let Some(fam) = family {
                let _ = writeln!(report.text, "paired metric: {}", fam.name());
                report.value("max_rel_E_error", max_de);
                report.value("max_rel_G_error", max_dg);
            }
            emit::obj(&run.header(), nx, ny, &f, &normals)
        }
        "flat" => {
            let family = MetricFamily::Custom(CustomMetric {
                e: Arc::new(|_, _| 1.0),
                g: Arc::new(|_, _| 1.0),
                domain: rect,
            });
            let form = SecondFundamentalFormField {
                xs: xs.clone(),
                ys: ys.clone(),
                l: vec![0.0; nx * ny],
                m: vec![0.0; nx * ny],
                n: vec![0.0; nx * ny],
                lt: vec![0.0; nx * ny],
                mt: vec![0.0; nx * ny],
                nt: vec![0.0; nx * ny],
            };
            let grid = integrate_frame_unchecked(&family, &form, None)?;
            let err = (0..nx * ny)
                .map(|k| (grid.f[k] - Vec3::new(xs[k % nx] - xs[0], ys[k / nx] - ys[0], 0.0)).norm())
                .fold(0.0, f64::max);
            report.value("max_plane_error", err);
            frame_report(&mut report, &grid);
            emit::obj_from_grid(&run.header(), &grid)
        }
        "std-catenoid" => {
            let c = cfg.f64("metric.c")?;
            if c <= 0.0 {
                return Err(CliError::Config("metric.c must be positive for std-catenoid".into()));
            }
            let (family, form) = std_catenoid_form(c, &xs, &ys)?;
            let grid = integrate_frame(&family, &form, None)?;
            let exact = ClosedFormImmersion::StdCatenoid { c }.sample(&xs, &ys)?;
            let fit = align_rigid(&grid.f, &exact)?;
            report.value("aligned_max_distance", fit.max_distance);
            report.value("aligned_rms", fit.rms);
            frame_report(&mut report, &grid);
            emit::obj_from_grid(&run.header(), &grid)
        }
        _ => {
            let (family, form) = if source == "hyperbolic-ode" {
                reduced_hyperbolic_form(cfg, &xs, &ys)?
            } else {
                let family = cfg.family()?;
                let (init, mut sc) = solver_setup(cfg)?;
                if init.grid.n != nx {
                    return Err(CliError::Config("solver.n must equal domain.nx for reconstruct.source=solver".into()));
                }
                sc.record_dy = Some((rect.y1 - rect.y0) / (ny - 1) as f64);
                sc.record_every = 1;
                let traj = evolve(&init, &family, &sc, None).map_err(|f| CliError::Numerical(f.to_string()))?;
                let form = form_from_snapshots(&traj.snapshots, &family)?;
                (family, form)
            };
            let r = codazzi_weak_residual(&form, &family, &Bump::default_set(rect.x0, rect.x1, rect.y0, rect.y1))?;
            report.value("codazzi_weak_residual", r.codazzi());
            report.value("gauss_residual", r.gauss);
            let grid = integrate_frame(&family, &form, None)?;
            frame_report(&mut report, &grid);
            emit::obj_from_grid(&run.header(), &grid)
        }
    };
    run.write(".obj", &mesh)?;
    run.write(".txt", &report.text)?;
    run.say(report.text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("; "));
    Ok(run.finish())
}

pub fn plot_loci(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut run = Run::new(cfg, "plot-loci");
    let family = cfg.family()?;
    let window = Rect::new(cfg.f64("plot.u0")?, cfg.f64("plot.u1")?, cfg.f64("plot.v0")?, cfg.f64("plot.v1")?)
        .map_err(|e| CliError::Config(format!("plot window: {e}")))?;
    let resolution = cfg.usize("plot.resolution")?;
    let (p1, p2) = source_polynomial(&family, cfg.f64("plot.x")?, cfg.f64("plot.y")?)?;
    let degenerate = !(window.x1 > window.x0 && window.y1 > window.y0);
    let locus = |p: &gauss_codazzi::poly::Cubic2| -> CliResult<Vec<_>> {
        if degenerate {
            return Ok(Vec::new());
        }
        match zero_locus(p, &window, resolution) {
            Err(gauss_codazzi::Error::DegenerateLocus) => Ok(Vec::new()),
            other => Ok(other?),
        }
    };
    let loci = [locus(&p1.poly)?, locus(&p2.poly)?];
    let overlay = if cfg.bool("plot.square")? { Some(square(cfg)?) } else { None };
    let header = emit::header("<!-- ", " -->", run.command, &cfg.resolved());
    run.write(".svg", &emit::svg(&header, &window, &loci, overlay.as_ref()))?;
    run.say(format!("p1: {} polylines, p2: {} polylines", loci[0].len(), loci[1].len()));
    Ok(run.finish())
}
