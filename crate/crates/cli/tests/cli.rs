use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "\
rows = 4
cols = 4
pretrain_episodes = 20
joint_episodes = 40
pretrain_sigma_start = 2.0
pretrain_sigma_end = 0.5
sigma0 = 1.0
seed = 5
";

fn sapsom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sapsom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sapsom(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn trained(dir: &Path) -> std::path::PathBuf {
    let cfg = dir.join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let model = dir.join("m.sapsom");
    ok(&["train", "--config", s(&cfg), "--out", s(&model)]);
    model
}

#[test]
fn train_is_byte_identical_for_equal_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let a = dir.path().join("a.sapsom");
    let b = dir.path().join("b.sapsom");
    let c = dir.path().join("c.sapsom");
    ok(&["train", "--config", s(&cfg), "--out", s(&a)]);
    ok(&["train", "--config", s(&cfg), "--out", s(&b)]);
    ok(&["train", "--config", s(&cfg), "--out", s(&c), "--seed", "6"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    assert_eq!(
        header(&dir.path().join("a_metrics.csv")),
        "episode,phase,steps,mean_quantization_error,mean_prediction_residual"
    );
    let rows = fs::read_to_string(dir.path().join("a_metrics.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 20 + 40);
}

#[test]
fn pretrain_only_model_warns_on_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let model = dir.path().join("p.sapsom");
    ok(&["train", "--config", s(&cfg), "--out", s(&model), "--pretrain-only"]);
    let out = sapsom(&[
        "balance",
        "--model",
        s(&model),
        "--episodes",
        "2",
        "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("untrained"));
}

#[test]
fn every_experiment_writes_its_csv_pair() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let out = dir.path().join("out");
    let m = s(&model);
    let o = s(&out);
    ok(&["phase-portrait", "--model", m, "--out", o, "--episodes", "2"]);
    ok(&["predict-rmse", "--model", m, "--out", o, "--sequences", "5", "--horizon", "3"]);
    let bal = ok(&["balance", "--model", m, "--out", o, "--episodes", "3", "--seed", "1"]);
    ok(&["tilt-sweep", "--model", m, "--out", o, "--runs", "1"]);
    ok(&["tilted-balance", "--model", m, "--out", o, "--runs", "1"]);
    assert!(bal.starts_with("episodes,max_steps,at_cap,mean_steps,sd_steps\n3,200,"));

    let expect = [
        ("phase_portrait_records.csv", "episode,t,theta,theta_dot,action,d_theta,d_theta_dot,pred_d_theta,pred_d_theta_dot,left_d_theta,left_d_theta_dot,right_d_theta,right_d_theta_dot"),
        ("phase_portrait_summary.csv", "states,sign_agreement,mean_angle_error,left_raises_theta_dot,right_lowers_theta_dot"),
        ("prediction_rmse_records.csv", "sequence,t,action,theta,predicted_theta,error"),
        ("prediction_rmse_summary.csv", "t,sequences,rmse"),
        ("balance_records.csv", "episode,steps,done_reason"),
        ("tilt_sweep_summary.csv", "goal_theta_dot,runs,mean_final_theta_dot,sd_final_theta_dot,mean_action_excess,mean_steps,correct_side_rate"),
        ("tilted_balance_records.csv", "goal_theta,run,mean_tilt,window_start,window_end,steps,done_reason"),
    ];
    for (file, cols) in expect {
        assert_eq!(header(&out.join(file)), cols, "{file}");
    }
    let tilt = fs::read_to_string(out.join("tilt_sweep_records.csv")).unwrap();
    assert_eq!(tilt.lines().count(), 1 + 21);
    let tb = fs::read_to_string(out.join("tilted_balance_summary.csv")).unwrap();
    assert_eq!(tb.lines().count(), 1 + 17);
}

#[test]
fn evaluation_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let run = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        ok(&["balance", "--model", s(&model), "--out", s(&out), "--episodes", "4", "--seed", seed]);
        fs::read(out.join("balance_records.csv")).unwrap()
    };
    assert_eq!(run("3", "x"), run("3", "y"));
}

#[test]
fn imitate_writes_traces_usable_as_demos() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let goal = dir.path().join("goal.toml");
    fs::write(&goal, "goal_mean = [0.0, 0.0, 0.0, 0.0]\ngoal_precision = [0.0, 0.0, 1.0, 1.0]\n")
        .unwrap();
    let out = dir.path().join("imit");
    ok(&["imitate", "--model", s(&model), "--config", s(&goal), "--out", s(&out), "--episodes", "2"]);
    let trace = out.join("episode_000.csv");
    assert_eq!(header(&trace), "t,x,x_dot,theta,theta_dot,action,done");
    assert!(out.join("episode_001.csv").exists());
    assert_eq!(header(&out.join("imitate_summary.csv")), "episodes,mean_steps,sd_steps,mean_final_distance");

    // The trace feeds straight back in as a demonstration, relative to the config file.
    fs::copy(&trace, dir.path().join("demo.csv")).unwrap();
    let demo = dir.path().join("demo.toml");
    fs::write(&demo, "goal_demo = \"demo.csv\"\n").unwrap();
    ok(&["imitate", "--model", s(&model), "--config", s(&demo), "--out", s(&out), "--episodes", "1"]);
}

#[test]
fn errors_are_reported_not_panicked() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "gama = 0.1\n").unwrap();
    let out = sapsom(&["train", "--config", s(&bad), "--out", s(&dir.path().join("m"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key `gama`"));

    let out = sapsom(&["balance", "--model", s(&dir.path().join("missing.sapsom"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.sapsom"));

    let garbage = dir.path().join("garbage.sapsom");
    fs::write(&garbage, b"hello").unwrap();
    let out = sapsom(&["balance", "--model", s(&garbage)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt"));

    let model = trained(dir.path());
    let out = sapsom(&["imitate", "--model", s(&model), "--out", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("needs a goal"));
}
