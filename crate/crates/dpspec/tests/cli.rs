use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dpspec::datasets::read_written_edge_list;
use dpspec::formats::{read_dense_matrix, CURVE_HEADER};

const SMALL: &str = "dataset = sbm\nsbm_sizes = 40, 40, 40\nsbm_p = 0.6\nsbm_q = 0.05\n\
                     eps_min = 1\neps_max = 8\neps_count = 3\ntrials = 2\nmaster_seed = 3\n";

fn dpspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpspec"))
        .args(args)
        .output()
        .expect("running dpspec")
}

fn config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, format!("{SMALL}{extra}")).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sweep_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "mechanism = power_method\n");
    let out = dir.path().join("curve.csv");
    let first = dpspec(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written.lines().next(), Some(CURVE_HEADER));
    assert_eq!(written.lines().count(), 4);

    let second = dpspec(&["sweep", "--config", cfg.to_str().unwrap()]);
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(&written), strip(&stdout(&second)));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for extra in ["epsilon = 3\n", "m = 0\n", "delta = 2\n", "mechanism = sps\n", "k = 3\nk = 4\n"] {
        let cfg = config(dir.path(), extra);
        let o = dpspec(&["sweep", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{extra}");
    }
    let o = dpspec(&["sweep", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = config(dir.path(), "");
    let o = dpspec(&["ablate-iters", "--config", cfg.to_str().unwrap(), "--grid", "0,5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dpspec(&["ablate-dim", "--config", cfg.to_str().unwrap(), "--grid", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(dpspec(&["sweep"]).status.code(), Some(2));
}

#[test]
fn all_infeasible_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "mechanism = projected_gaussian\ndelta = 0.9\n");
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("eps_min = 1\n", "eps_min = 0.01\n")
        .replace("eps_max = 8\n", "eps_max = 0.1\n");
    std::fs::write(&cfg, text).unwrap();
    let o = dpspec(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.contains(",infeasible,")));
}

#[test]
fn ablations_emit_one_row_per_grid_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let o = dpspec(&["ablate-dim", "--config", cfg.to_str().unwrap(), "--grid", "5,10,20"]);
    assert_eq!(o.status.code(), Some(0));
    let params: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .collect();
    assert_eq!(params, ["5", "10", "20"]);
}

#[test]
fn account_table() {
    let o = dpspec(&["account", "--mechanism", "rr_shuffle", "--n", "600", "--eps", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mechanism,eps,delta,n,param_name,param_value"));
    assert_eq!(lines.next(), Some("rr_shuffle,1,2.777777778e-06,600,eps0,1.517521689"));
    assert!(lines.next().unwrap().starts_with("rr_shuffle,1,2.777777778e-06,600,mu,"));

    let o = dpspec(&["account", "--n", "552", "--eps", "1,2", "--delta", "1e-5"]);
    let text = stdout(&o);
    assert!(text.contains("projected_gaussian,1,1e-05,552,sigma_bar,8.2901"));
    assert_eq!(text.lines().filter(|l| l.starts_with("power_method")).count(), 2);

    let o = dpspec(&["account", "--mechanism", "laplace", "--n", "10", "--eps", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_lists_every_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let o = dpspec(&["spectrum", "--config", cfg.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue");
    assert_eq!(lines.len(), 1 + 120 + 1);
    assert!(lines[121].starts_with("# k=3,delta_k="));
    assert!(lines[121].contains(",normalized_gap="));
    let values: Vec<f64> = lines[1..121]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn privatize_writes_release_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "mechanism = rr_shuffle\n");
    let out = dir.path().join("released.edges");
    let o = dpspec(&[
        "privatize", "--config", cfg.to_str().unwrap(), "--eps", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let g = read_written_edge_list(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(g.n(), 120);
    assert!(g.edge_count() > 0);

    let cfg = config(dir.path(), "mechanism = projected_gaussian\nm = 7\n");
    let out = dir.path().join("sketch.bin");
    let o = dpspec(&[
        "privatize", "--config", cfg.to_str().unwrap(), "--eps", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let bytes = std::fs::read(&out).unwrap();
    assert_eq!(&bytes[..5], b"DPSA1");
    let m = read_dense_matrix(&bytes[..]).unwrap();
    assert_eq!(m.shape(), (120, 7));

    let cfg = config(dir.path(), "mechanism = power_method\n");
    let o = dpspec(&[
        "privatize", "--config", cfg.to_str().unwrap(), "--eps", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let x = read_dense_matrix(&std::fs::read(&out).unwrap()[..]).unwrap();
    assert_eq!(x.shape(), (120, 3));
    // the power iterate is column-orthonormal
    assert!(((x.transpose() * &x) - dpspec_core::nalgebra::DMatrix::identity(3, 3)).amax() < 1e-10);
}
