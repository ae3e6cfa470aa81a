use std::path::Path;
use std::process::{Command, Output};

fn gcsurf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcsurf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn payload(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("<!--")).collect()
}

fn data_rows(text: &str) -> usize {
    payload(text).len().saturating_sub(1)
}

#[test]
fn header_rerun_reproduces_payload() {
    let dir = tempfile::tempdir().unwrap();
    let first = gcsurf(dir.path(), &["curvature", "--set", "metric.kind=enneper", "--set", "domain.nx=7", "--set", "output.dir=a"]);
    assert!(first.status.success());
    let again = gcsurf(dir.path(), &["curvature", "--from-header", "a/curvature.csv", "--set", "output.dir=b"]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    let a = std::fs::read_to_string(dir.path().join("a/curvature.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/curvature.csv")).unwrap();
    assert_eq!(payload(&a), payload(&b));
    assert_eq!(data_rows(&a), 7 * 20);
    assert!(a.starts_with("# gcsurf curvature\n"));
    assert!(a.contains("# metric.kind=enneper\n"));
}

#[test]
fn solve_rerun_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["solve", "--set", "solver.n=32", "--set", "solver.perturbation=0.1", "--set", "solver.epsilons=0.2,0.1"];
    assert!(gcsurf(dir.path(), &args).status.success());
    let first = std::fs::read_to_string(dir.path().join("out/solve.csv")).unwrap();
    assert!(gcsurf(dir.path(), &["solve", "--from-header", "out/solve.csv", "--set", "output.dir=again"]).status.success());
    let second = std::fs::read_to_string(dir.path().join("again/solve.csv")).unwrap();
    assert_eq!(payload(&first), payload(&second));
    let sweep = std::fs::read_to_string(dir.path().join("out/solve_sweep.csv")).unwrap();
    assert_eq!(data_rows(&sweep), 2);
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "metric.kind=enneper\n\nmetric.gamma=1\n").unwrap();
    let out = gcsurf(dir.path(), &["curvature", "--config", "run.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("metric.gamma"), "{err}");
}

#[test]
fn bad_value_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcsurf(dir.path(), &["curvature", "--set", "domain.x1=wide"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain.x1"));
}

#[test]
fn domain_point_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcsurf(dir.path(), &["curvature", "--set", "domain.y0=-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the domain"));
}

#[test]
fn v_floor_breach_exits_3_with_flag_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcsurf(dir.path(), &["solve", "--set", "solver.v_floor=0.9", "--set", "solver.n=32"]);
    assert_eq!(out.status.code(), Some(3));
    let csv = std::fs::read_to_string(dir.path().join("out/solve.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("#FAULT"), "{last}");
    // Truncated: the last recorded level is below the end of the span.
    let ys: Vec<f64> = payload(&csv)[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(ys.iter().cloned().fold(0.0, f64::max) < 2.0);
}

#[test]
fn single_epsilon_gives_single_sweep_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcsurf(dir.path(), &["solve", "--set", "solver.n=32"]);
    assert!(out.status.success());
    let sweep = std::fs::read_to_string(dir.path().join("out/solve_sweep.csv")).unwrap();
    assert_eq!(data_rows(&sweep), 1);
    let csv = std::fs::read_to_string(dir.path().join("out/solve.csv")).unwrap();
    let header: Vec<&str> = payload(&csv)[0].split(',').collect();
    let col = header.iter().position(|c| *c == "overshoot").unwrap();
    for row in &payload(&csv)[1..] {
        let over: f64 = row.split(',').nth(col).unwrap().parse().unwrap();
        assert!(over <= 1e-3);
    }
}

#[test]
fn region_verify_and_search() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcsurf(
        dir.path(),
        &["region", "verify", "--set", "metric.kind=helicoid", "--set", "metric.b=0.2", "--set", "metric.c=0.1", "--set", "domain.y0=0", "--set", "domain.y1=0.5"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("Certified"));

    let out = gcsurf(
        dir.path(),
        &["region", "search", "--set", "metric.kind=reciprocal-exp", "--set", "domain.y0=0", "--set", "domain.y1=0", "--set", "region.steps=6"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("NotFound"));
    let csv = std::fs::read_to_string(dir.path().join("out/region.csv")).unwrap();
    assert_eq!(data_rows(&csv), 225);
    assert!(payload(&csv)[1..].iter().all(|l| l.contains(",Violated,")));
}

#[test]
fn empty_search_box_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcsurf(dir.path(), &["region", "search", "--set", "region.search_w=1,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reconstruct_flat_and_catenoid() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcsurf(dir.path(), &["reconstruct", "--set", "reconstruct.source=flat", "--set", "output.stem=flat"]);
    assert!(out.status.success());
    let obj = std::fs::read_to_string(dir.path().join("out/flat.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 400);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2 * 19 * 19);

    let out = gcsurf(
        dir.path(),
        &[
            "reconstruct",
            "--set", "reconstruct.source=std-catenoid",
            "--set", "domain.x0=0",
            "--set", "domain.x1=6.283185307179586",
            "--set", "domain.y0=-1",
            "--set", "domain.y1=0",
            "--set", "domain.nx=64",
            "--set", "domain.ny=64",
        ],
    );
    assert!(out.status.success());
    let report = std::fs::read_to_string(dir.path().join("out/reconstruct.txt")).unwrap();
    let dist: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("aligned_max_distance: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(dist < 1e-4);
}

#[test]
fn degenerate_plot_window_has_axes_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcsurf(dir.path(), &["plot-loci", "--set", "plot.u1=-3"]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("out/plot-loci.svg")).unwrap();
    assert_eq!(svg.matches("class=\"axis\"").count(), 2);
    assert!(!svg.contains("polyline"));
    assert!(svg.contains(r#"width="800" height="800""#));
}

#[test]
fn square_overlay_when_requested() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcsurf(dir.path(), &["plot-loci", "--set", "plot.square=true"]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("out/plot-loci.svg")).unwrap();
    assert!(svg.contains("class=\"square\""));
    assert!(svg.contains("#1f77b4") && svg.contains("#ff7f0e"));
}
