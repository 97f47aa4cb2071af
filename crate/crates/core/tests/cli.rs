//! Command-line behavior: output schema, determinism, agreement with the
//! library, exit codes.

use std::path::Path;

use turning_arcs::cli::{run, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};
use turning_arcs::covariance::{CovarianceModel, CovarianceSpec};
use turning_arcs::degree::DegreeDistribution;
use turning_arcs::diagnostics::{berry_esseen_bound, mu3_auto, mu3_wave, Mu3};
use turning_arcs::grid::{build_grid, GridSpec};
use turning_arcs::output::read_table;
use turning_arcs::simulator::{Execution, SimulationConfig, Simulator};

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("turning-arcs").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn simulate_to(path: &Path, extra: &[&str]) -> (i32, String) {
    let p = path.to_str().unwrap();
    let mut args = vec![
        "simulate", "--model", "nb", "--d", "2", "--delta", "0.5", "--L", "150", "--seed", "7", "--grid",
        "latlon:100x100", "--out", p,
    ];
    args.extend_from_slice(extra);
    let (code, _, err) = call(&args);
    (code, err)
}

#[test]
fn simulate_writes_ten_thousand_deterministic_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    assert_eq!(simulate_to(&a, &[]).0, EXIT_OK);
    assert_eq!(simulate_to(&b, &[]).0, EXIT_OK);
    assert_eq!(simulate_to(&c, &["--sequential"]).0, EXIT_OK);
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes, std::fs::read(&c).unwrap());
    let table = read_table(bytes.as_slice()).unwrap();
    assert_eq!(table.rows.len(), 10_000);
    assert_eq!(table.columns, ["colat", "lon", "z1"]);
    for (key, value) in [("d", "2"), ("p", "1"), ("L", "150"), ("seed", "7"), ("grid", "latlon:100x100")] {
        assert_eq!(table.header_value(key), Some(value), "{key}");
    }
    assert!(table.header_value("model").unwrap().starts_with("nb"));
    // the default law is chosen automatically and recorded
    assert!(table.header_value("degree-choice").unwrap().contains("Case 2"));
}

#[test]
fn cli_matches_library_element_for_element() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let (code, err) = simulate_to(&path, &["--degree-dist", "geometric:0.01"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let table = read_table(std::fs::read(&path).unwrap().as_slice()).unwrap();

    let model = CovarianceModel::new(CovarianceSpec::negative_binomial(0.5)).unwrap();
    let config = SimulationConfig::new(model, DegreeDistribution::geometric(0.01).unwrap(), 150, 7).unwrap();
    let grid: GridSpec = "latlon:100x100".parse().unwrap();
    let field = Simulator::new(config)
        .simulate(&build_grid(&grid).unwrap(), Execution::Sequential)
        .unwrap();
    assert_eq!(table.column("z1").unwrap(), field.values);
    let colat = table.column("colat").unwrap();
    for (i, c) in colat.iter().enumerate().step_by(997) {
        assert_eq!(*c, grid.angles(i).unwrap().0);
    }
}

#[test]
fn vector_and_slice_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let p = path.to_str().unwrap();
    let (code, _, err) = call(&[
        "simulate", "--model", "nb", "--p", "2", "--delta11", "0.2", "--delta12", "0.2", "--delta22", "0.7", "--rho",
        "0.6", "--L", "20", "--grid", "latlon:3x5", "--out", p,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let table = read_table(std::fs::read(&path).unwrap().as_slice()).unwrap();
    assert_eq!(table.columns, ["colat", "lon", "z1", "z2"]);
    assert_eq!(table.rows.len(), 15);

    let (code, _, err) = call(&[
        "simulate", "--model", "f", "--d", "3", "--alpha", "1", "--nu", "3.5", "--tau", "2", "--L", "20", "--grid",
        "slice3:-0.25:2x3", "--out", p,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let table = read_table(std::fs::read(&path).unwrap().as_slice()).unwrap();
    assert_eq!(table.columns, ["colat", "lon", "w", "z1"]);
    assert!(table.column("w").unwrap().iter().all(|w| *w == -0.25));
}

#[test]
fn point_lists_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    std::fs::write(&pts, "# three points\n1 0 0\n0 1 0\n0 0 1\n").unwrap();
    let out = dir.path().join("o.csv");
    let grid = format!("points:{}", pts.display());
    let (code, _, err) = call(&[
        "simulate", "--model", "chentsov", "--L", "50", "--grid", &grid, "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let table = read_table(std::fs::read(&out).unwrap().as_slice()).unwrap();
    assert_eq!(table.columns, ["x0", "x1", "x2", "z1"]);
    assert_eq!(table.rows[1][..3], [0.0, 1.0, 0.0]);

    std::fs::write(&pts, "1 0 0\n0 1\n").unwrap();
    let (code, _, err) = call(&[
        "simulate", "--model", "chentsov", "--L", "50", "--grid", &grid, "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 2"), "{err}");
    std::fs::remove_file(&pts).unwrap();
    let (code, _, _) = call(&[
        "simulate", "--model", "chentsov", "--L", "50", "--grid", &grid, "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_IO);
}

#[test]
fn mu3_output_matches_library() {
    let (code, out, err) = call(&[
        "mu3", "--model", "nb", "--d", "2", "--delta", "0.5", "--degree-dist", "geometric:0.01", "--L", "1500",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let model = CovarianceModel::new(CovarianceSpec::negative_binomial(0.5)).unwrap();
    let law = DegreeDistribution::geometric(0.01).unwrap();
    let r = mu3_auto(|n| mu3_wave(&model, &law, n), 128, 1 << 14, 1e-4).unwrap();
    let Mu3::Finite { value, .. } = r else { panic!("{r:?}") };
    let bound = berry_esseen_bound(value, model.variance().sqrt(), 1500);
    assert!(out.contains(&format!("mu3 = {value}\n")), "{out}");
    assert!(out.contains(&format!("bound = {bound}\n")), "{out}");
    assert_eq!(bound, 0.4748 * value / 1500f64.sqrt());
}

#[test]
fn mu3_reports_divergence() {
    let (code, out, _) = call(&["mu3", "--model", "chentsov", "--d", "8", "--L", "1500"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("mu3 = inf"), "{out}");
}

#[test]
fn validate_passes_and_fails() {
    let (code, out, err) = call(&[
        "validate", "--model", "nb", "--delta", "0.5", "--L", "100", "--realizations", "50", "--points", "30",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.starts_with("bin,center,i,j,count,estimate,theoretical,se\n"));
    assert!(out.trim_end().ends_with("PASS"));

    // a zero tolerance cannot be met
    let (code, _, err) = call(&[
        "validate", "--model", "nb", "--delta", "0.5", "--L", "100", "--realizations", "20", "--points", "10",
        "--tolerance", "0",
    ]);
    assert_eq!(code, EXIT_VALIDATION);
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn invalid_parameters_exit_one() {
    for args in [
        &["simulate", "--model", "nb", "--delta", "0.5", "--grid", "latlon:0x3", "--out", "x.csv"][..],
        &["simulate", "--model", "nb", "--delta", "0.5", "--L", "0", "--grid", "latlon:2x3", "--out", "x.csv"],
        &["coeffs", "--model", "f", "--alpha", "1", "--nu", "0.5", "--tau", "1", "--d", "3"],
        &["simulate", "--model", "sm", "--p", "2", "--alpha", "1", "--nu11", "2", "--nu12", "0.75", "--nu22", "0.75",
          "--rho", "-0.6", "--grid", "latlon:2x2", "--out", "x.csv"],
        &["mu3", "--model", "nb", "--delta", "0.5", "--degree-dist", "zeta:0.5"],
        &["simulate", "--model", "nb", "--delta", "0.5", "--degree-dist", "finite:1", "--grid", "latlon:2x2", "--out", "x.csv"],
    ] {
        let (code, _, err) = call(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn indefinite_cross_smoothness_is_reported_by_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let (code, _, err) = call(&[
        "simulate", "--model", "sm", "--p", "2", "--alpha", "1", "--nu11", "2", "--nu12", "0.75", "--nu22", "0.75",
        "--rho", "-0.6", "--allow-invalid-cross", "--degree-dist", "zeta:2", "--L", "200", "--grid", "latlon:2x2",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("degree 2"), "{err}");
}
