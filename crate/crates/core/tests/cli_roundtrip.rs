use std::path::Path;

use viacontrol::cli::run;
use viacontrol::io::{read_field, read_series_csv, read_trajectory_csv};
use viacontrol::problem::get_problem;
use viacontrol::value::{solve_value, GridSpec, Horizon, Scheme, SolveOptions};

fn argv(args: &[&str], out: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::iter::once("viacontrol").chain(args.iter().copied()).map(String::from).collect();
    v.push("--out".into());
    v.push(out.display().to_string());
    v
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(argv(&["frobnicate"], tmp.path())), 1);
    assert_eq!(run(argv(&["value", "solve", "--grid", "0.1"], tmp.path())), 1);
    assert_eq!(run(argv(&["geom", "dist", "--problem", "no-such-problem", "--x", "0"], tmp.path())), 1);
    assert_eq!(run(argv(&["ipc", "verify", "--problem", "corridor-2d", "--set", "width=0.01"], tmp.path())), 2);
    let cert = json(&tmp.path().join("certificate.json"));
    assert_eq!(cert["pass"], false);
    assert!(cert["worst_witness"]["r"].as_f64().unwrap() <= 0.0);
    assert_eq!(run(argv(&["ipc", "verify"], tmp.path())), 0);
    assert!((json(&tmp.path().join("certificate.json"))["r"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn config_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# coarse run\nproblem = quadratic-cost-1d\nlambda = 6\nset.q = 0\ngrid = 0.1,0.1\nhorizon = 1\n").unwrap();
    let cfg_s = cfg.display().to_string();

    let a = tmp.path().join("a");
    assert_eq!(run(argv(&["value", "solve", "--config", &cfg_s], &a)), 0);
    let f = read_field(&a).unwrap();
    assert_eq!(f.lambda, 6.0);
    assert_eq!(f.horizon, 1.0);

    let b = tmp.path().join("b");
    assert_eq!(run(argv(&["value", "solve", "--config", &cfg_s, "--lambda", "4", "--horizon", "auto"], &b)), 0);
    let f = read_field(&b).unwrap();
    assert_eq!(f.lambda, 4.0);
    assert!(f.horizon > 1.0 && f.tail_bound <= 1e-3);
}

#[test]
fn field_files_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["value", "solve", "--problem", "moving-wall-1d", "--lambda", "3", "--grid", "0.02,0.04", "--horizon", "2"];
    assert_eq!(run(argv(&args, tmp.path())), 0);
    let back = read_field(tmp.path()).unwrap();

    let p = get_problem("moving-wall-1d", &[("lambda".into(), 3.0)]).unwrap();
    let grid = GridSpec::around(&p, 0.02, 0.04, Horizon::Fixed(2.0));
    let direct = solve_value(&p, &grid, &SolveOptions { lambda: 3.0, scheme: Scheme::Relaxed { mixture_grid: 4 }, level: 0 }).unwrap();
    assert!(back.same_grid(&direct));
    assert_eq!(back.values.len(), direct.values.len());
    for (a, b) in back.values.iter().zip(&direct.values) {
        assert!(a == b, "{a} != {b}");
    }
    assert_eq!(back.tail_bound, direct.tail_bound);
}

#[test]
fn pipeline_artifacts_reparse() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    assert_eq!(run(argv(&["pipeline", "--problem", "moving-wall-1d", "--lambda", "3"], out)), 0);

    assert_eq!(json(&out.join("verdict.json"))["pass"], true);
    for f in ["run.json", "assumptions.json", "certificate.json", "constants.json"] {
        json(&out.join(f));
    }
    let v = read_field(&out.join("field_V")).unwrap();
    let vs = read_field(&out.join("field_Vstar")).unwrap();
    assert!(v.same_grid(&vs));

    let traj = read_trajectory_csv(&out.join("trajectory.csv")).unwrap();
    assert!(traj.maxh.iter().all(|&h| h <= 1e-9));
    assert!(traj.dist.iter().all(|&d| d == 0.0));
    assert_eq!(traj.trajectory.states.len(), traj.trajectory.controls.as_ref().unwrap().len() + 1);

    // The decay verdict can be recomputed from the emitted table and parameters.
    let summary = json(&out.join("analysis/summary.json"));
    let entry = summary["entries"].as_array().unwrap().iter().find(|e| e["kind"] == "decay").unwrap();
    let params = &entry["envelope_params"];
    let slack = params["tail_bound"].as_f64().unwrap() + params["tol_scheme"].as_f64().unwrap();
    let (cols, rows) = read_series_csv(&out.join("analysis/decay.csv")).unwrap();
    assert_eq!(cols, ["t", "value", "envelope"]);
    let ok = rows.iter().all(|r| r[1] <= r[2] + slack) && rows.last().unwrap()[1] < params["tol_decay"].as_f64().unwrap();
    assert_eq!(entry["pass"], ok);

    let (cols, rows) = read_series_csv(&out.join("analysis/relax.csv")).unwrap();
    assert_eq!(cols, ["max_gap", "mean_gap", "min_gap", "gap_tol"]);
    assert!(rows[0][2] >= -1e-9);
}

#[test]
fn trajectory_commands_write_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let n = tmp.path().join("nft");
    assert_eq!(run(argv(&["nft", "run", "--problem", "corridor-2d", "--count", "3", "--seed", "4"], &n)), 0);
    let r = read_trajectory_csv(&n.join("corrected_0.csv")).unwrap();
    assert!(r.maxh[1..].iter().all(|&h| h < 0.0));
    let reference = read_trajectory_csv(&n.join("reference_0.csv")).unwrap();
    assert_eq!(r.trajectory.states[0], reference.trajectory.states[0]);
    assert!(reference.dist.iter().any(|&d| d > 0.0));

    let t = tmp.path().join("track");
    assert_eq!(run(argv(&["track", "run", "--offset", "0.05", "--duration", "2"], &t)), 0);
    let (cols, rows) = read_series_csv(&t.join("tracking.csv")).unwrap();
    assert_eq!(cols, ["t", "deviation", "bound"]);
    assert!(rows.iter().all(|r| r[1] <= r[2]));
}
