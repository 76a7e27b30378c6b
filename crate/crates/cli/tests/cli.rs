use std::path::Path;
use std::process::{Command, Output};

fn segpaint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segpaint")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = segpaint(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

const TINY: &str = "categories = windows\ncount = 10\npoints = 32\nlatent_dim = 8\nencoder_hidden = 8\nhead_hidden = 16\nepochs = 4\nbudget = 60\n";

fn setup(dir: &Path) -> (String, String) {
    let cfg = dir.join("cfg.txt");
    std::fs::write(&cfg, TINY).unwrap();
    let cfg = cfg.display().to_string();
    let ds = dir.join("ds").display().to_string();
    ok(&["generate", "--config", &cfg, "--out", &ds]);
    (cfg, ds)
}

#[test]
fn generate_splits_80_20() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ds").display().to_string();
    ok(&["generate", "--set", "categories=cuboids", "--set", "count=5", "--set", "points=16", "--out", &out]);
    assert_eq!(lines(&dir.path().join("ds/split_train.txt")).len(), 4);
    assert_eq!(lines(&dir.path().join("ds/split_test.txt")).len(), 1);
}

#[test]
fn exit_codes_distinguish_validation_from_io() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none").display().to_string();
    let out = dir.path().join("o").display().to_string();
    assert_eq!(segpaint(&["train", "--dataset", &missing, "--out", &out]).status.code(), Some(2));
    assert_eq!(segpaint(&["evaluate", "--ground-truth", "--dataset", &missing, "--out", &out]).status.code(), Some(2));
    assert_eq!(segpaint(&["generate", "--lambda", "1", "--out", &out]).status.code(), Some(1));
    assert_eq!(segpaint(&["generate", "--set", "nonsense=1", "--out", &out]).status.code(), Some(1));
    assert_eq!(segpaint(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(segpaint(&["--help"]).status.code(), Some(0));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, ds) = setup(dir.path());
    let run = dir.path().join("run");
    ok(&["train", "--config", &cfg, "--set", "epochs=2", "--lambda", "3", "--dataset", &ds, "--out", &run.display().to_string()]);
    let saved = lines(&run.join("config.txt"));
    assert!(saved.contains(&"lambda = 3".to_string()));
    assert!(saved.contains(&"epochs = 2".to_string()));
    assert_eq!(lines(&run.join("loss.csv")).len(), 3);
}

#[test]
fn fraction_and_pretrained_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, ds) = setup(dir.path());
    let base = dir.path().join("base").display().to_string();
    ok(&["train", "--config", &cfg, "--dataset", &ds, "--out", &base]);
    let ft = dir.path().join("ft");
    ok(&[
        "train",
        "--config",
        &cfg,
        "--dataset",
        &ds,
        "--fraction",
        "0.25",
        "--pretrained",
        &format!("{base}/checkpoint.txt"),
        "--out",
        &ft.display().to_string(),
    ]);
    assert_eq!(lines(&ft.join("train_ids.txt")).len(), 2);
    assert_eq!(lines(&ft.join("pretrain_loss.csv")).len(), 5);
    assert_eq!(lines(&ft.join("loss.csv")).len(), 5);

    // A model of another shape cannot be fine-tuned.
    let out = segpaint(&[
        "train",
        "--config",
        &cfg,
        "--dataset",
        &ds,
        "--lambda",
        "5",
        "--pretrained",
        &format!("{base}/checkpoint.txt"),
        "--out",
        &dir.path().join("bad").display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn metrics_mean_row_is_recomputable() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, ds) = setup(dir.path());
    let run = dir.path().join("run").display().to_string();
    ok(&["train", "--config", &cfg, "--dataset", &ds, "--out", &run]);
    let eval = dir.path().join("eval");
    ok(&["evaluate", "--config", &cfg, "--dataset", &ds, "--checkpoint", &format!("{run}/checkpoint.txt"), "--out", &eval.display().to_string()]);
    let rows = lines(&eval.join("metrics.csv"));
    assert_eq!(rows[0], "sample_id,pcd_x1e4,pc,segments,strokes");
    let (samples, mean) = (&rows[1..rows.len() - 1], rows.last().unwrap());
    assert_eq!(samples.len(), 2);
    let fields: Vec<Vec<f64>> = samples
        .iter()
        .map(|r| r.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    let expect: Vec<f64> = (0..4).map(|c| fields.iter().map(|f| f[c]).sum::<f64>() / fields.len() as f64).collect();
    let got: Vec<f64> = mean.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    assert!(mean.starts_with("mean,"));
    for (e, g) in expect.iter().zip(&got) {
        assert!((e - g).abs() <= 1e-9 * e.abs().max(1.0), "{e} vs {g}");
    }
    for f in &fields {
        assert!((0.0..=100.0).contains(&f[1]));
    }
    assert!(eval.join(format!("samples/{}/coverage.txt", samples[0].split(',').next().unwrap())).exists());
}

#[test]
fn ground_truth_evaluation_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, ds) = setup(dir.path());
    let eval = dir.path().join("eval");
    ok(&["evaluate", "--config", &cfg, "--dataset", &ds, "--ground-truth", "--out", &eval.display().to_string()]);
    assert!(lines(&eval.join("metrics.csv")).last().unwrap().starts_with("mean,0,100,"));
}

#[test]
fn sweeps_write_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, ds) = setup(dir.path());
    let lam = dir.path().join("lam");
    ok(&["sweep", "--config", &cfg, "--dataset", &ds, "--parameter", "lambda", "--values", "2,4,6,10", "--out", &lam.display().to_string()]);
    assert_eq!(lines(&lam.join("sweep.csv")).len(), 5);
    let svg = std::fs::read_to_string(lam.join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));

    let run = dir.path().join("run").display().to_string();
    ok(&["train", "--config", &cfg, "--dataset", &ds, "--out", &run]);
    let tau = dir.path().join("tau");
    ok(&[
        "sweep",
        "--config",
        &cfg,
        "--dataset",
        &ds,
        "--parameter",
        "tau",
        "--values",
        "0,0.15,1",
        "--checkpoint",
        &format!("{run}/checkpoint.txt"),
        "--out",
        &tau.display().to_string(),
    ]);
    let strokes: Vec<f64> = lines(&tau.join("sweep.csv"))[1..]
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(strokes.len(), 3);
    assert!(strokes.windows(2).all(|w| w[1] <= w[0]), "{strokes:?}");

    let ov = dir.path().join("ov");
    ok(&[
        "sweep",
        "--config",
        &cfg,
        "--set",
        "fixed_pose_budget=true",
        "--lambda",
        "4",
        "--dataset",
        &ds,
        "--parameter",
        "overlap",
        "--values",
        "1,2,3",
        "--out",
        &ov.display().to_string(),
    ]);
    let segs: Vec<f64> = lines(&ov.join("sweep.csv"))[1..]
        .iter()
        .map(|r| r.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    // 60-pose cap with lambda 4: 15 slots at every overlap.
    assert!(segs.iter().all(|&s| s == 15.0), "{segs:?}");

    let empty = segpaint(&["sweep", "--config", &cfg, "--dataset", &ds, "--parameter", "tau", "--out", "x"]);
    assert_eq!(empty.status.code(), Some(1));
}

#[test]
fn predict_concat_simulate_chain() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, ds) = setup(dir.path());
    let p = |s: &str| dir.path().join(s).display().to_string();
    ok(&["train", "--config", &cfg, "--dataset", &ds, "--out", &p("run")]);
    let id = lines(&dir.path().join("ds/split_test.txt"))[0].clone();
    let stdout = ok(&["predict", "--config", &cfg, "--dataset", &ds, "--checkpoint", &p("run/checkpoint.txt"), "--sample", &id, "--out", &p("pred")]);
    assert!(stdout.contains(&id));
    ok(&["concat", "--config", &cfg, "--tau", "1e9", "--input", &p(&format!("pred/{id}")), "--out", &p("linked")]);
    assert!(dir.path().join("linked/stroke_000.txt").exists());
    assert!(dir.path().join("linked/transform.txt").exists());
    let sample = p(&format!("ds/samples/{id}"));
    let stdout = ok(&["simulate", "--config", &cfg, "--mesh", &sample, "--strokes", &sample, "--reference", &sample, "--out", &p("sim")]);
    assert!(stdout.contains("coverage 100.00%"), "{stdout}");
    assert_eq!(
        lines(&dir.path().join("sim/thickness.txt")).len(),
        lines(&dir.path().join(format!("ds/samples/{id}/mesh.txt")))
            .iter()
            .filter(|l| l.starts_with("v "))
            .count()
    );
}
