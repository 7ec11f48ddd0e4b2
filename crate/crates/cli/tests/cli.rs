use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cellflow_core::TaylorGreenField;
use tempfile::TempDir;

fn cellflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("run.cfg"), config).unwrap();
        Self { dir }
    }

    fn cfg(&self) -> String {
        self.dir.path().join("run.cfg").display().to_string()
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn exec(&self, cmd: &str, out: &str, extra: &[&str]) -> Output {
        let out = self.out(out).display().to_string();
        let cfg = self.cfg();
        let mut args = vec![cmd, "--config", &cfg, "--out", &out];
        args.extend_from_slice(extra);
        cellflow(&args)
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(dir: &Path, file: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(file)).unwrap()).unwrap()
}

const SMALL_TRAIN: &str = "train.episodes = 20\ntrain.eps_decay_episodes = 14\nenv.episode_steps = 100\neval.n_swimmers = 12\neval.duration = 20\n";

#[test]
fn validate_solver_defaults_pass() {
    let run = Run::new("");
    let o = run.exec("validate-solver", "v", &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&run.out("v"), "solver_report.json");
    assert!(r["max_error"].as_f64().unwrap() <= 1e-7);
    assert!(r["energy_ratio_error"].as_f64().unwrap() <= 1e-8);
    assert!(r["l2_error"].as_f64().is_some());
}

#[test]
fn validate_solver_inviscid_is_steady() {
    let run = Run::new("flow.nu = 0\nsolver.t_end = 1\nsolver.snapshot_times = 1\n");
    let o = run.exec("validate-solver", "v", &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(report(&run.out("v"), "solver_report.json")["max_error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn cfl_violation_is_a_numerical_failure() {
    let run = Run::new("solver.dt = 1\n");
    let o = run.exec("validate-solver", "v", &[]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("CFL"));
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    for (text, key) in [
        ("flow.amplitude = 1\n", "flow.amplitude"),
        ("train.alpha = 0\n", "train.alpha"),
        ("swimmer.B = -1\n", "swimmer.B"),
        ("env.action_interval = 0.013\n", "env.action_interval"),
        ("solver.N = 7\n", "solver.N"),
    ] {
        let run = Run::new(text);
        let o = run.exec("train", "t", &[]);
        assert_eq!(code(&o), 1, "{text}");
        assert!(stderr(&o).contains(key), "{text}: {}", stderr(&o));
        assert!(!run.out("t").exists(), "nothing is written before validation passes");
    }
    let o = cellflow(&["train", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn zero_episodes_give_zero_table_and_empty_curve() {
    let run = Run::new("train.episodes = 0\ntrain.eps_decay_episodes = 0\n");
    let o = run.exec("train", "t", &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let curve = fs::read_to_string(run.out("t").join("learning_curve.csv")).unwrap();
    assert_eq!(curve, "episode,return,epsilon\n");
    let table = fs::read_to_string(run.out("t").join("qtable.txt")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| *r == "0 0 0 0"));
}

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e != "png"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn every_command_is_byte_reproducible() {
    let run = Run::new(&format!("{SMALL_TRAIN}solver.N = 32\nsolver.t_end = 1\nsolver.snapshot_times = 0, 0.5, 1\n"));
    for cmd in ["validate-solver", "train", "simulate"] {
        assert_eq!(code(&run.exec(cmd, &format!("{cmd}-a"), &[])), 0);
        assert_eq!(code(&run.exec(cmd, &format!("{cmd}-b"), &[])), 0);
        let (a, b) = (files_of(&run.out(&format!("{cmd}-a"))), files_of(&run.out(&format!("{cmd}-b"))));
        assert!(a.len() >= 2);
        assert_eq!(a, b, "{cmd}");
    }
    let q = run.out("train-a").join("qtable.txt").display().to_string();
    for extra in [vec!["--naive"], vec!["--qtable", q.as_str()]] {
        assert_eq!(code(&run.exec("evaluate", "e-a", &extra)), 0);
        assert_eq!(code(&run.exec("evaluate", "e-b", &extra)), 0);
        assert_eq!(files_of(&run.out("e-a")), files_of(&run.out("e-b")));
    }
}

#[test]
fn dumped_config_reproduces_the_run() {
    let run = Run::new(SMALL_TRAIN);
    assert_eq!(code(&run.exec("train", "first", &[])), 0);
    let dumped = run.out("first").join("config.effective.txt");
    let out = run.out("second").display().to_string();
    let o = cellflow(&["train", "--config", &dumped.display().to_string(), "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(files_of(&run.out("first")), files_of(&run.out("second")));
}

#[test]
fn evaluate_rejects_bad_policy_inputs() {
    let run = Run::new(SMALL_TRAIN);
    let bad = run.out("bad.txt");
    fs::write(&bad, "# cellflow-rl qtable v1\n1 2 3\n").unwrap();
    let o = run.exec("evaluate", "e", &["--qtable", &bad.display().to_string()]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&run.exec("evaluate", "e", &[])), 1);
    let o = run.exec("evaluate", "e", &["--naive", "--qtable", &bad.display().to_string()]);
    assert_ne!(code(&o), 0);
}

struct Row {
    id: usize,
    step: usize,
    t: f64,
    y: f64,
}

fn read_rows(path: &Path) -> Vec<Row> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "swimmer_id,step,t,x,y,theta,omega_local,action,reward");
    lines
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            assert_eq!(c.len(), 9);
            Row {
                id: c[0].parse().unwrap(),
                step: c[1].parse().unwrap(),
                t: c[2].parse().unwrap(),
                y: c[4].parse().unwrap(),
            }
        })
        .collect()
}

fn displacements(rows: &[Row]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut start = 0.0;
    for (i, r) in rows.iter().enumerate() {
        if r.step == 0 {
            start = r.y;
        }
        if rows.get(i + 1).is_none_or(|n| n.id != r.id) {
            out.push(r.y - start);
        }
    }
    out
}

#[test]
fn metrics_are_recomputable_from_trajectories() {
    let run = Run::new("eval.n_swimmers = 9\neval.duration = 7\n");
    assert_eq!(code(&run.exec("evaluate", "e", &["--naive", "--render"])), 0);
    let rows = read_rows(&run.out("e").join("trajectories.csv"));
    for w in rows.windows(2) {
        assert!((w[1].id, w[1].step) > (w[0].id, w[0].step), "rows strictly ordered");
    }
    for r in &rows {
        assert_eq!(r.t, r.step as f64 * 0.1, "t = step * interval");
    }
    let dy = displacements(&rows);
    assert_eq!(dy.len(), 9);
    let mut sorted = dy.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = report(&run.out("e"), "metrics.json");
    let mean = dy.iter().sum::<f64>() / 9.0;
    assert!((m["mean_dy"].as_f64().unwrap() - mean).abs() <= 1e-12 * mean.abs().max(1.0));
    assert_eq!(m["median_dy"].as_f64().unwrap(), sorted[4]);
    let pos = dy.iter().filter(|&&d| d > 0.0).count() as f64 / 9.0;
    assert_eq!(m["fraction_positive"].as_f64().unwrap(), pos);
    let png = fs::read(run.out("e").join("trajectories.png")).unwrap();
    assert_eq!(&png[1..4], b"PNG");
}

#[test]
fn naive_swimmers_in_still_fluid_rise_at_swim_speed() {
    let run = Run::new("flow.U0 = 0\nenv.init_theta = 1.5707963267948966\neval.n_swimmers = 20\neval.duration = 30\n");
    assert_eq!(code(&run.exec("evaluate", "e", &["--naive"])), 0);
    for d in displacements(&read_rows(&run.out("e").join("trajectories.csv"))) {
        assert!((d - 0.3 * 30.0).abs() <= 1e-9, "{d}");
    }
}

#[test]
fn tracers_have_no_net_drift() {
    let run = Run::new("swimmer.v_s = 0\neval.duration = 50\n");
    assert_eq!(code(&run.exec("evaluate", "e", &["--naive"])), 0);
    let m = report(&run.out("e"), "metrics.json");
    let (mean, se) = (m["mean_dy"].as_f64().unwrap(), m["std_error_dy"].as_f64().unwrap());
    assert_eq!(m["n_swimmers"], 250);
    assert!(mean.abs() <= 3.0 * se, "mean {mean}, se {se}");
}

fn read_snapshot(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn simulate_zero_initial_condition_stays_zero() {
    let run = Run::new("solver.ic = zero\nsolver.N = 16\nsolver.snapshot_times = 0, 2\n");
    assert_eq!(code(&run.exec("simulate", "s", &[])), 0);
    for name in ["snapshot_000.csv", "snapshot_001.csv"] {
        let (_, rows) = read_snapshot(&run.out("s").join(name));
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().flatten().all(|&v| v == 0.0));
    }
}

#[test]
fn simulate_matches_exact_decay_at_t1() {
    let run = Run::new("solver.snapshot_times = 1\nsolver.t_end = 1\n");
    assert_eq!(code(&run.exec("simulate", "s", &[])), 0);
    let (header, rows) = read_snapshot(&run.out("s").join("snapshot_000.csv"));
    assert!(header.starts_with("# t=1 N=64 L="), "{header}");
    let field = TaylorGreenField::decaying(1.0, 0.01).unwrap();
    let h = 4.0 * std::f64::consts::PI / 64.0;
    for (j, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 64);
        for (i, v) in row.iter().enumerate() {
            let exact = field.vorticity(i as f64 * h, j as f64 * h, 1.0).unwrap();
            assert!((v - exact).abs() <= 1e-7);
        }
    }
}

#[test]
fn simulate_rejects_times_outside_the_run() {
    for times in ["6", "-1", "0, 5.5"] {
        let run = Run::new(&format!("solver.snapshot_times = {times}\n"));
        let o = run.exec("simulate", "s", &[]);
        assert_eq!(code(&o), 1, "{times}");
        assert!(stderr(&o).contains("solver.snapshot_times"));
    }
}
