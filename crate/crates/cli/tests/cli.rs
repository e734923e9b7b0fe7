use std::path::{Path, PathBuf};

use mlelm_cli::report::cv_table;
use mlelm_cli::{run_from_args, EXIT_ERROR, EXIT_OK, EXIT_SPEC_MISMATCH};
use mlelm_core::cv::cross_validate;
use mlelm_core::data::{load_delimited, save_delimited};
use mlelm_core::elm::{train, Normalization, Ridge};
use mlelm_core::metrics::example_based_metrics;
use mlelm_core::multilabel::{predict_labels, ThresholdMethod};
use mlelm_core::synthetic::linear_threshold;
use mlelm_core::{DenseMatrix, ElmConfig, ElmModel, LabelMatrix, MultiLabelDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_from_args(std::iter::once("mlelm").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

struct Workspace {
    dir: tempfile::TempDir,
    data: PathBuf,
    dataset: MultiLabelDataset,
}

impl Workspace {
    fn new(n: usize, d: usize, m: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data.csv");
        let dataset = linear_threshold(n, d, m, 0.05, 0.0, 42);
        save_delimited(&dataset, &data, ',').unwrap();
        Self { dir, data, dataset }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn train_then_reload_predicts_identically() {
    let ws = Workspace::new(80, 5, 3);
    let model_path = ws.path("m.bin");
    let (code, _, err) = cli(&[
        "train", "--dataset", s(&ws.data), "--labels", "3", "--hidden", "30", "--seed", "5", "--model", s(&model_path),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(err.contains("train_seconds"));

    let reloaded = ElmModel::from_bytes(&std::fs::read(&model_path).unwrap()).unwrap();
    let ds = load_delimited(&ws.data, 3, ',').unwrap();
    let in_memory = train(&ds, &ElmConfig::new(30).with_seed(5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = DenseMatrix::from_fn(100, 5, |_, _| rng.random_range(-2.0..2.0)).unwrap();
    assert_eq!(reloaded.raw_predict(&x).unwrap(), in_memory.raw_predict(&x).unwrap());
    assert_eq!(predict_labels(&reloaded, &x).unwrap(), predict_labels(&in_memory, &x).unwrap());
}

#[test]
fn predict_writes_one_line_per_sample() {
    let ws = Workspace::new(40, 4, 2);
    let model = ws.path("m.bin");
    let out = ws.path("pred.txt");
    assert_eq!(cli(&["train", "--dataset", s(&ws.data), "--labels", "2", "--model", s(&model)]).0, EXIT_OK);
    let (code, _, err) = cli(&["predict", "--model", s(&model), "--dataset", s(&ws.data), "--out", s(&out)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 40);

    let (code, stdout, _) = cli(&["predict", "--model", s(&model), "--dataset", s(&ws.data), "--scores"]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.lines().all(|l| l.split('\t').nth(1).unwrap().split(',').count() == 2));
}

#[test]
fn interpolating_model_reproduces_training_labels() {
    let ws = Workspace::new(30, 4, 3);
    let model = ws.path("m.bin");
    let out = ws.path("pred.txt");
    let args = ["train", "--dataset", s(&ws.data), "--labels", "3", "--hidden", "60", "--ridge", "0", "--model", s(&model)];
    assert_eq!(cli(&args).0, EXIT_OK);
    assert_eq!(cli(&["predict", "--model", s(&model), "--dataset", s(&ws.data), "--out", s(&out)]).0, EXIT_OK);
    let (code, stdout, _) = cli(&["evaluate", "--dataset", s(&ws.data), "--labels", "3", "--predictions", s(&out)]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.ends_with("\t0.0000\t1.0000\t1.0000\t1.0000\t1.0000\n"), "{stdout}");
}

#[test]
fn zero_output_weights_give_empty_lines() {
    let ws = Workspace::new(12, 3, 2);
    let d = 3;
    let model = ElmModel::from_parts(
        DenseMatrix::from_fn(4, d, |i, j| (i + j) as f64 * 0.1).unwrap(),
        vec![0.5; 4],
        DenseMatrix::zeros(4, 2),
        0.0,
        ThresholdMethod::Fixed,
        Normalization::identity(d),
        vec!["a".into(), "b".into()],
        ElmConfig::new(4),
    )
    .unwrap();
    let path = ws.path("zero.bin");
    std::fs::write(&path, model.to_bytes()).unwrap();
    let (code, stdout, _) = cli(&["predict", "--model", s(&path), "--dataset", s(&ws.data)]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(stdout, "\n".repeat(12));
}

#[test]
fn evaluate_matches_library_metrics() {
    let ws = Workspace::new(60, 4, 3);
    let model_path = ws.path("m.bin");
    let report = ws.path("eval.txt");
    cli(&["train", "--dataset", s(&ws.data), "--labels", "3", "--hidden", "10", "--model", s(&model_path)]);
    let (code, stdout, err) = cli(&[
        "evaluate", "--dataset", s(&ws.data), "--labels", "3", "--model", s(&model_path), "--report", s(&report),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("test_seconds"));

    let model = ElmModel::from_bytes(&std::fs::read(&model_path).unwrap()).unwrap();
    let ds = load_delimited(&ws.data, 3, ',').unwrap();
    let direct = example_based_metrics(&predict_labels(&model, ds.features()).unwrap(), ds.labels()).unwrap();
    let row: Vec<String> = direct.values().iter().map(|v| format!("{v:.4}")).collect();
    assert!(stdout.ends_with(&format!("\t{}\n", row.join("\t"))), "{stdout}");
    let kv = std::fs::read_to_string(&report).unwrap();
    assert!(kv.contains(&format!("hamming_loss={}\n", direct.hamming_loss)));
    assert!(kv.contains(&format!("f1={}\n", direct.f1)));
}

#[test]
fn evaluate_truth_against_itself_is_perfect() {
    let ws = Workspace::new(20, 2, 3);
    let truth_file = ws.path("truth.txt");
    let names = ws.dataset.label_names();
    let text: String = (0..20)
        .map(|i| mlelm_cli::report::prediction_line(names, ws.dataset.labels().row(i), None))
        .collect();
    std::fs::write(&truth_file, text).unwrap();
    let (code, stdout, _) = cli(&["evaluate", "--dataset", s(&ws.data), "--labels", "3", "--predictions", s(&truth_file)]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.ends_with("\t0.0000\t1.0000\t1.0000\t1.0000\t1.0000\n"), "{stdout}");
}

#[test]
fn crossval_matches_direct_invocation() {
    let ws = Workspace::new(50, 3, 2);
    let (code, stdout, _) = cli(&[
        "crossval", "--dataset", s(&ws.data), "--labels", "2", "--k", "5", "--hidden", "20", "--seed", "9", "--ridge", "1e-3",
    ]);
    assert_eq!(code, EXIT_OK);
    let ds = load_delimited(&ws.data, 2, ',').unwrap();
    let config = ElmConfig::new(20).with_seed(9).with_ridge(Ridge::Fixed(1e-3));
    assert_eq!(stdout, cv_table(&cross_validate(&ds, &config, 5, 9).unwrap()));
    assert!(stdout.contains("hamming_loss: "));
}

#[test]
fn crossval_of_duplicated_samples_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("dup.csv");
    let x = DenseMatrix::from_fn(20, 2, |_, j| j as f64 + 0.5).unwrap();
    let y = LabelMatrix::new(20, 2, [1u8, 0].repeat(20)).unwrap();
    save_delimited(&MultiLabelDataset::from_matrices("dup", x, y).unwrap(), &data, ',').unwrap();
    let (code, stdout, err) = cli(&["crossval", "--dataset", s(&data), "--labels", "2", "--k", "5", "--hidden", "5"]);
    assert_eq!(code, EXIT_OK, "{err}");
    for line in stdout.lines().filter(|l| l.contains(": ")) {
        assert!(line.ends_with("(±0.0000)"), "{line}");
    }
}

#[test]
fn stats_exit_codes() {
    let small = fixture("small.arff");
    assert_eq!(cli(&["stats", "--dataset", s(&small), "--labels", "4"]).0, EXIT_OK);
    let (code, stdout, _) = cli(&["stats", "--dataset", s(&small), "--labels", "4", "--expect", "emotions"]);
    assert_eq!(code, EXIT_SPEC_MISMATCH);
    assert!(stdout.ends_with("spec\tFAIL\n"));
    assert_eq!(cli(&["stats", "--dataset", "/nonexistent.arff", "--labels", "4"]).0, EXIT_ERROR);
    let (code, stdout, _) = cli(&["stats", "--dataset", s(&fixture("single.arff")), "--labels", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("cardinality\t1.0000\n"));
}

#[test]
fn stats_report_round_trips_as_expectation() {
    let ws = Workspace::new(25, 3, 4);
    let report = ws.path("stats.txt");
    assert_eq!(cli(&["stats", "--dataset", s(&ws.data), "--labels", "4", "--report", s(&report)]).0, EXIT_OK);
    let (code, stdout, _) = cli(&["stats", "--dataset", s(&ws.data), "--labels", "4", "--expect-file", s(&report)]);
    assert_eq!(code, EXIT_OK, "{stdout}");
    let stats = ws.dataset.stats().unwrap();
    assert!(stdout.contains(&format!("cardinality\t{:.4}\n", stats.label_cardinality)));
}

#[test]
fn operational_errors_exit_one() {
    let ws = Workspace::new(20, 3, 2);
    let model = ws.path("m.bin");
    assert_eq!(cli(&["train", "--dataset", s(&ws.data), "--labels", "2", "--model", s(&model)]).0, EXIT_OK);

    let other = ws.path("other.csv");
    std::fs::write(&other, "1,2\n3,4\n").unwrap();
    let (code, _, err) = cli(&["predict", "--model", s(&model), "--dataset", s(&other)]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("features"), "{err}");

    let missing_dir = ws.path("no/such/dir/m.bin");
    assert_eq!(cli(&["train", "--dataset", s(&ws.data), "--labels", "2", "--model", s(&missing_dir)]).0, EXIT_ERROR);
    // duplicated samples make the row Gram matrix singular when no ridge is added
    let dup = ws.path("dup.csv");
    std::fs::write(&dup, "0.5,1,1,0\n0.5,1,1,0\n-1,2,0,1\n").unwrap();
    let singular = ["train", "--dataset", s(&dup), "--labels", "2", "--hidden", "50", "--ridge", "0", "--model", s(&model)];
    let (code, _, err) = cli(&singular);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("singular"), "{err}");
    assert_eq!(cli(&["train", "--bogus"]).0, EXIT_ERROR);
}

#[test]
fn bench_reports_one_row_per_dataset() {
    let ws = Workspace::new(60, 4, 2);
    let bad = ws.path("bad.csv");
    std::fs::write(&bad, "1,x\n").unwrap();
    let (code, stdout, err) = cli(&[
        "bench", "--dataset", s(&ws.data), "--dataset", s(&bad), "--labels", "2", "--repeats", "3",
    ]);
    assert_eq!(code, EXIT_ERROR);
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 2, "{stdout}");
    assert!(rows[0].starts_with("data\t42\t18\t"), "{stdout}");
    assert!(rows[1].contains("ERROR"));
    assert_eq!(err.lines().filter(|l| l.starts_with("raw_train")).count(), 1);
}
