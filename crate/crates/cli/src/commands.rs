use std::io::Write;
use std::path::Path;
use std::time::Instant;

use mlelm_core::cv::cross_validate;
use mlelm_core::data::{self, load_any, load_features, verify_against_spec, ExpectedSpec, LabelPosition};
use mlelm_core::elm::train_with_summary;
use mlelm_core::metrics::example_based_metrics;
use mlelm_core::multilabel::{decode_scores, predict_labels};
use mlelm_core::{DenseMatrix, ElmModel, Error, MultiLabelDataset, Result};

use crate::report::{self, write_file};
use crate::{
    CrossvalArgs, DataArgs, EvaluateArgs, PredictArgs, StatsArgs, TrainArgs, EXIT_OK, EXIT_SPEC_MISMATCH,
};

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: "<output>".into(),
        source: e,
    }
}

pub(crate) fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(io_err)
}

pub(crate) fn require_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Input(format!("input file {} does not exist", path.display())))
    }
}

pub(crate) fn require_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Error::Input(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ if path.is_dir() => Err(Error::Input(format!("output path {} is a directory", path.display()))),
        _ => Ok(()),
    }
}

pub(crate) fn require_optional_output_path(path: Option<&Path>) -> Result<()> {
    path.map_or(Ok(()), require_output)
}

pub(crate) fn load_dataset(args: &DataArgs) -> Result<MultiLabelDataset> {
    load_any(&args.dataset, args.label_count, args.position(), args.delimiter)
}

fn read_model(path: &Path) -> Result<ElmModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    ElmModel::from_bytes(&bytes)
}

fn check_features(model: &ElmModel, x: &DenseMatrix) -> Result<()> {
    if x.cols() != model.feature_count() {
        return Err(Error::Input(format!(
            "model expects {} features, input has {}",
            model.feature_count(),
            x.cols()
        )));
    }
    Ok(())
}

pub fn cmd_stats(args: &StatsArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32> {
    require_input(&args.data.dataset)?;
    if let Some(p) = &args.expect_file {
        require_input(p)?;
    }
    require_optional_output_path(args.report.as_deref())?;
    let expected = match (&args.expect, &args.expect_file) {
        (Some(name), _) => Some(
            ExpectedSpec::benchmark(name)
                .ok_or_else(|| Error::Input(format!("no built-in specification named '{name}'")))?,
        ),
        (None, Some(path)) => Some(ExpectedSpec::load(path)?),
        (None, None) => None,
    };

    let ds = load_dataset(&args.data)?;
    let stats = ds.stats()?;
    emit(out, &report::stats_table(ds.name(), &stats, ds.feature_count()))?;
    if let Some(path) = &args.report {
        write_file(path, ExpectedSpec::from_stats(ds.name(), &stats).to_text().as_bytes())?;
    }
    let Some(expected) = expected else {
        return Ok(EXIT_OK);
    };
    let verdict = verify_against_spec(&ds, &expected);
    emit(out, &verdict.to_string())?;
    if verdict.passed() {
        emit(out, "spec\tPASS\n")?;
        Ok(EXIT_OK)
    } else {
        emit(out, "spec\tFAIL\n")?;
        Ok(EXIT_SPEC_MISMATCH)
    }
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    require_input(&args.data.dataset)?;
    require_output(&args.model)?;
    require_optional_output_path(args.report.as_deref())?;
    let ds = load_dataset(&args.data)?;
    let config = args.model_args.config(ds.feature_count(), ds.label_count());

    let start = Instant::now();
    let (model, summary) = train_with_summary(&ds, &config)?;
    let seconds = start.elapsed().as_secs_f64();

    write_file(&args.model, &model.to_bytes())?;
    let text = report::train_summary(ds.name(), ds.len(), &model, &summary);
    emit(out, &text)?;
    if let Some(path) = &args.report {
        write_file(path, text.as_bytes())?;
    }
    let _ = writeln!(err, "train_seconds\t{seconds:.6}");
    Ok(EXIT_OK)
}

/// Feature matrix of a prediction input. Delimited inputs may carry the
/// model's labels as trailing columns, which are dropped.
fn prediction_features(args: &PredictArgs, model: &ElmModel) -> Result<DenseMatrix> {
    let is_arff = args
        .dataset
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("arff"));
    if is_arff {
        let m = args.label_count.unwrap_or(model.label_count());
        let position = if args.labels_first { LabelPosition::Start } else { LabelPosition::End };
        return Ok(data::load_arff(&args.dataset, m, position)?.features().clone());
    }
    let (x, _) = load_features(&args.dataset, args.delimiter)?;
    let (d, m) = (model.feature_count(), args.label_count.unwrap_or(model.label_count()));
    if x.cols() == d {
        Ok(x)
    } else if x.cols() == d + m {
        let columns: Vec<f64> = (0..x.rows()).flat_map(|i| x.row(i)[..d].to_vec()).collect();
        DenseMatrix::new(x.rows(), d, columns)
    } else {
        Err(Error::Input(format!(
            "model expects {d} features (optionally followed by {m} labels), input has {} columns",
            x.cols()
        )))
    }
}

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    require_input(&args.model)?;
    require_input(&args.dataset)?;
    require_optional_output_path(args.out.as_deref())?;
    let model = read_model(&args.model)?;
    let x = prediction_features(args, &model)?;
    check_features(&model, &x)?;

    let start = Instant::now();
    let scores = model.raw_predict(&x)?;
    let labels = decode_scores(&model, &scores);
    let seconds = start.elapsed().as_secs_f64();

    let mut text = String::new();
    for i in 0..x.rows() {
        let s = args.scores.then(|| scores.row(i));
        text.push_str(&report::prediction_line(model.label_names(), labels.row(i), s));
    }
    match &args.out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => emit(out, &text)?,
    }
    let _ = writeln!(err, "test_seconds\t{seconds:.6}");
    Ok(EXIT_OK)
}

pub fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    require_input(&args.data.dataset)?;
    for p in [&args.model, &args.predictions].into_iter().flatten() {
        require_input(p)?;
    }
    require_optional_output_path(args.report.as_deref())?;
    let ds = load_dataset(&args.data)?;

    let predicted = match (&args.model, &args.predictions) {
        (Some(path), _) => {
            let model = read_model(path)?;
            check_features(&model, ds.features())?;
            if model.label_count() != ds.label_count() {
                return Err(Error::Input(format!(
                    "model predicts {} labels, dataset has {}",
                    model.label_count(),
                    ds.label_count()
                )));
            }
            let start = Instant::now();
            let predicted = predict_labels(&model, ds.features())?;
            let _ = writeln!(err, "test_seconds\t{:.6}", start.elapsed().as_secs_f64());
            predicted
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            report::parse_predictions(&text, ds.label_names())?
        }
        (None, None) => return Err(Error::Input("either --model or --predictions is required".into())),
    };
    let metrics = example_based_metrics(&predicted, ds.labels())?;
    emit(out, &report::metrics_table(ds.name(), &metrics))?;
    if let Some(path) = &args.report {
        write_file(path, report::metrics_key_values("", &metrics).as_bytes())?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_crossval(args: &CrossvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    require_input(&args.data.dataset)?;
    require_optional_output_path(args.report.as_deref())?;
    let ds = load_dataset(&args.data)?;
    let config = args.model_args.config(ds.feature_count(), ds.label_count());

    let start = Instant::now();
    let cv = cross_validate(&ds, &config, args.k, args.model_args.seed)?;
    let _ = writeln!(err, "crossval_seconds\t{:.6}", start.elapsed().as_secs_f64());

    emit(out, &report::cv_table(&cv))?;
    if let Some(path) = &args.report {
        write_file(path, report::cv_key_values(&cv).as_bytes())?;
    }
    Ok(EXIT_OK)
}
