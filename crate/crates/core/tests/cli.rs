use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn symdistill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symdistill"))
        .args(args)
        .env_remove("SYMDISTILL_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Every file under `dir`, keyed by its path relative to `dir` with
/// timestamp directories collapsed.
fn payloads(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(root, &path, out);
            } else if path.file_name().unwrap() != "run_manifest.json" {
                let rel: Vec<String> = path
                    .strip_prefix(root)
                    .unwrap()
                    .iter()
                    .map(|c| {
                        let c = c.to_string_lossy();
                        if c.len() >= 16 && c.as_bytes()[8] == b'T' && c.ends_with('Z') {
                            "<stamp>".to_string()
                        } else {
                            c.into_owned()
                        }
                    })
                    .collect();
                out.push((rel.join("/"), fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out
}

fn find(dir: &Path, name: &str) -> Vec<PathBuf> {
    let mut hits = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            hits.extend(find(&path, name));
        } else if path.file_name().unwrap() == name {
            hits.push(path);
        }
    }
    hits.sort();
    hits
}

fn write_quadratic(path: &Path) {
    let mut text = String::from("in:x,out:y\n");
    for i in 0..=120 {
        let x = -3.0 + 0.05 * i as f64;
        text.push_str(&format!("{x},{}\n", x * x));
    }
    fs::write(path, text).unwrap();
}

const QUICK: [&str; 6] = ["--iters", "8", "--populations", "2", "--population-size", "20"];

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&symdistill(&["--help"])), 0);
    let out = symdistill(&["distill", "--out", "nowhere"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--data"));
    assert_eq!(code(&symdistill(&["gen", "tornado", "--n", "5", "--out", "x"])), 2);
}

#[test]
fn missing_data_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let out = symdistill(&["distill", "--data", p(&dir.path().join("absent")), "--out", p(dir.path())]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent"));
}

#[test]
fn gen_is_byte_identical_per_seed() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (out, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let run = symdistill(&["gen", "heat", "--n", "5000", "--seed", seed, "--out", p(out)]);
        assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    }
    assert_eq!(payloads(&a), payloads(&b));
    assert_ne!(payloads(&a), payloads(&c));
    assert!(a.join("run_manifest.json").exists());
}

#[test]
fn transform_column_is_echoed_in_the_manifest() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("pair.csv");
    let mut text = String::from("in:dx,in:dy,out:f\n");
    for i in 0..40 {
        let (dx, dy) = (0.3 + i as f64 * 0.1, 1.0 - i as f64 * 0.05);
        text.push_str(&format!("{dx},{dy},{}\n", dx * dy));
    }
    fs::write(&csv, text).unwrap();
    let out = dir.path().join("run");
    let mut args = vec![
        "distill",
        "--data",
        p(&csv),
        "--out",
        p(&out),
        "--transform",
        "r=sqrt((dx*dx)+(dy*dy))+0.01",
        "--seed",
        "4",
    ];
    args.extend(QUICK);
    let run = symdistill(&args);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "distill");
    assert_eq!(manifest["seed"], 4);
    let columns = manifest["arguments"]["input_columns"].as_array().unwrap();
    assert_eq!(columns.last().unwrap(), "r");
    assert_eq!(manifest["config"]["parsimony"], 0.0);

    let fronts = find(&out, "front.csv");
    assert_eq!(fronts.len(), 1);
    let dim = fronts[0].parent().unwrap();
    assert!(dim.parent().unwrap().ends_with("SR_output/block/dim_0"));
    assert!(dim.join("best.txt").exists());
    assert!(dim.join("run_manifest.json").exists());
}

#[test]
fn bad_flags_exit_two() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("q.csv");
    write_quadratic(&csv);
    let out = p(dir.path());
    let cases: [&[&str]; 4] = [
        &["distill", "--data", p(&csv), "--out", out, "--ops", "+,tan"],
        &["distill", "--data", p(&csv), "--out", out, "--arg-limit", "exp"],
        &["distill", "--data", p(&csv), "--out", out, "--transform", "x=x*x"],
        &["slime", "--data", p(&csv), "--out", out, "--at", "1.0", "--neighbors", "0"],
    ];
    for args in cases {
        assert_eq!(code(&symdistill(args)), 2, "{args:?}");
    }
}

#[test]
fn slime_without_a_surrogate_cannot_sample() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("q.csv");
    write_quadratic(&csv);
    let run = symdistill(&[
        "slime", "--data", p(&csv), "--out", p(dir.path()), "--at", "1.0", "--neighbors", "20", "--synthetic",
        "100",
    ]);
    assert_eq!(code(&run), 3);
    assert!(String::from_utf8_lossy(&run.stderr).contains("surrogate"));
}

#[test]
fn slime_writes_a_weighted_locale() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("q.csv");
    write_quadratic(&csv);
    let bank = dir.path().join("bank.txt");
    fs::write(&bank, "(x * x)\n").unwrap();
    let out = dir.path().join("run");
    let mut args = vec![
        "slime",
        "--data",
        p(&csv),
        "--out",
        p(&out),
        "--at",
        "1.0",
        "--neighbors",
        "15",
        "--synthetic",
        "30",
        "--surrogate",
        p(&bank),
        "--ops",
        "+,*",
    ];
    args.extend(QUICK);
    let run = symdistill(&args);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let weights = fs::read(out.join("locale").join("weights.bin")).unwrap();
    assert_eq!(weights.len(), 45 * 8);
    assert_eq!(find(&out, "best.txt").len(), 1);
}

#[test]
fn report_marks_the_complexity_eighteen_row() {
    let dir = TempDir::new().unwrap();
    let front = dir.path().join("front.csv");
    let rows = [
        (1, 0.0888, "0.08"),
        (5, 0.0885, "((dx * 0.00) + 0.08)"),
        (7, 0.0882, "(((dx + dy) * 0.00) + 0.08)"),
        (8, 0.0880, "(((dx * inv(r)) * 0.00) + 0.08)"),
        (9, 0.0877, "(((m2 * (dy + dx)) * 0.00) + 0.08)"),
        (10, 0.0843, "((inv(((r + dx) * r)) * -0.00) + 0.08)"),
        (12, 0.0687, "((inv(((r * r) * r)) * (dx * 0.02)) + 0.08)"),
        (14, 0.0513, "(((m2 * 0.01) * (dx * inv(((r * r) * r)))) + 0.08)"),
        (16, 0.0260, "(((dy + dx) * ((m2 * inv(((r * r) * r))) * -0.01)) + 0.08)"),
        (18, 0.0128, "(((inv(((r * r) * r)) * (dx + (dy * 0.59))) * m2) + 0.08)"),
        (20, 0.0125, "((inv(((r * r) * r)) * (((m2 + 0.06) * 0.01) * (dx + (dy * 0.59)))) + 0.08)"),
    ];
    let mut text = String::from("complexity,loss,equation\n");
    for (c, l, e) in rows {
        text.push_str(&format!("{c},{l},\"{e}\"\n"));
    }
    fs::write(&front, text).unwrap();

    let run = symdistill(&["report", "--run", p(dir.path())]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let starred: Vec<String> = stdout(&run).lines().filter(|l| l.starts_with('*')).map(String::from).collect();
    assert_eq!(starred.len(), 1);
    assert_eq!(starred[0].split_whitespace().nth(1), Some("18"));

    let curve = fs::read_to_string(dir.path().join("score_curve.csv")).unwrap();
    let best: Vec<&str> = curve.lines().skip(1).filter(|l| l.ends_with(",1")).collect();
    assert_eq!(best.len(), 1);
    let fields: Vec<&str> = best[0].split(',').collect();
    assert_eq!(fields[0], "18");
    let score: f64 = fields[1].parse().unwrap();
    assert!((score - (0.0260f64 / 0.0128).ln() / 2.0).abs() < 1e-12);
}

#[test]
fn eval_of_the_true_heat_solution() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("heat");
    assert_eq!(code(&symdistill(&["gen", "heat", "--n", "2000", "--seed", "11", "--out", p(&data)])), 0);
    let bank = dir.path().join("best.txt");
    fs::write(&bank, "((0.9999 * exp((-1.9739 * t))) * sin((3.1416 * x)))\n").unwrap();
    let preds = dir.path().join("pred.csv");
    let run = symdistill(&["eval", "--expr", p(&bank), "--data", p(&data), "--out", p(&preds)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));

    let text = stdout(&run);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
    let rmse: f64 = row[1].parse().unwrap();
    assert!(rmse < 0.01, "{rmse}");
    assert_eq!(row[4], "0");

    let csv = fs::read_to_string(&preds).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("pred:u,resid:u"));
    assert_eq!(lines.count(), 2000);

    fs::write(&bank, "(x + ").unwrap();
    let bad = symdistill(&["eval", "--expr", p(&bank), "--data", p(&data), "--out", p(&preds)]);
    assert_eq!(code(&bad), 3);
}

#[test]
fn pca_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("spring");
    assert_eq!(code(&symdistill(&["gen", "spring", "--n", "300", "--seed", "2", "--out", p(&data)])), 0);
    let model = dir.path().join("model");
    let fit = symdistill(&["pca", "fit", "--data", p(&data), "--k", "7", "--out", p(&model)]);
    assert_eq!(code(&fit), 0, "{}", String::from_utf8_lossy(&fit.stderr));
    let last = stdout(&fit).lines().last().unwrap().to_string();
    let cumulative: f64 = last.split_whitespace().last().unwrap().parse().unwrap();
    assert!((cumulative - 1.0).abs() < 1e-9);

    let z = dir.path().join("z");
    let back = dir.path().join("back");
    assert_eq!(code(&symdistill(&["pca", "apply", "--model", p(&model), "--data", p(&data), "--out", p(&z)])), 0);
    assert_eq!(
        code(&symdistill(&["pca", "reconstruct", "--model", p(&model), "--data", p(&z), "--out", p(&back)])),
        0
    );
    let original = symdistill_table(&data);
    let restored = symdistill_table(&back);
    assert_eq!(original.input_names(), restored.input_names());
    for (a, b) in original.inputs().data().iter().zip(restored.inputs().data()) {
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
    assert_eq!(original.outputs(), restored.outputs());

    assert_eq!(code(&symdistill(&["pca", "fit", "--data", p(&data), "--k", "0", "--out", p(&model)])), 2);
}

fn symdistill_table(dir: &Path) -> symdistill::IOTable {
    symdistill::harness::load_table(dir, Default::default()).unwrap()
}

#[test]
fn importance_lists_every_output() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("charge");
    assert_eq!(code(&symdistill(&["gen", "charge", "--n", "200", "--out", p(&data)])), 0);
    let run = symdistill(&["importance", "--data", p(&data)]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    assert!(text.contains("fx") && text.contains("fy"), "{text}");
}

#[test]
fn repeated_runs_are_identical() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("spring");
    assert_eq!(code(&symdistill(&["gen", "spring", "--n", "400", "--seed", "5", "--out", p(&data)])), 0);

    let mut runs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out = dir.path().join(name);
        let mut args = vec!["distill", "--data", p(&data), "--out", p(&out), "--seed", "9", "--threads", threads];
        args.extend(QUICK);
        let run = symdistill(&args);
        assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
        runs.push(payloads(&out));
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    assert_eq!(runs[0].iter().filter(|(k, _)| k.ends_with("front.csv")).count(), 2);

    let mut models = Vec::new();
    for name in ["m1", "m2"] {
        let out = dir.path().join(name);
        assert_eq!(code(&symdistill(&["pca", "fit", "--data", p(&data), "--k", "3", "--out", p(&out)])), 0);
        models.push(payloads(&out));
    }
    assert_eq!(models[0], models[1]);
}
