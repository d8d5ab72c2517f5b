//! Subcommand implementations.
//!
//! Each command resolves its inputs, runs the corresponding library calls,
//! writes its outputs plus a manifest into the output directory, and prints
//! one line per file written. All output bytes are fully determined by the
//! configuration, so rerunning a command reproduces every file exactly.

use std::path::Path;

use anyhow::{bail, Context, Result};
use beamsim_core::beamforming::codebook_to_json;
use beamsim_core::dataset::{generate_dataset, Dataset, ScenarioSpec};
use beamsim_core::eval::{
    evaluate_baselines, evaluate_ml, parent_child_correlation, render_correlation_csv,
    render_kpi_csv, run_scenario_suite, correlation_block_agreement,
};
use beamsim_core::ml::{
    analyze, model_size_bits, reference_table, render_size_mbit, render_table_csv, train,
    train_fc, write_history_csv, LayerSpec, Predictor, Source, TableRow, TABLE_PRECISION_BITS,
};
use serde::Serialize;

use crate::config::{ModelKind, RunConfig};
use crate::manifest::Manifest;

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn report_written(path: &Path) {
    println!("wrote {}", path.display());
}

/// Generates one dataset per configured scenario plus the codebook exports.
pub fn cmd_gen(config: &RunConfig, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let params = config.sim_params()?;
    let mut manifest = Manifest::new("gen", config);

    for &scenario in &config.scenarios {
        let spec = ScenarioSpec::new(scenario);
        let dataset = generate_dataset(&spec, config.n_samples, &params, config.master_seed)
            .with_context(|| format!("generating scenario {scenario}"))?;
        let path = out.join(format!("dataset_{scenario}.csv"));
        dataset.write_csv(&path)?;
        manifest.add_output(&path)?;
        report_written(&path);
    }

    let tx = params.tx_structure()?;
    let rx = params.rx_structure()?;
    for (name, codebook) in [
        ("codebook_tx_children.json", &tx.child),
        ("codebook_tx_parents.json", &tx.parent),
        ("codebook_rx_children.json", &rx.child),
        ("codebook_rx_parents.json", &rx.parent),
    ] {
        let path = out.join(name);
        write_text(&path, &codebook_to_json(codebook)?)?;
        manifest.add_output(&path)?;
        report_written(&path);
    }

    report_written(&manifest.write(out, "manifest_gen.json")?);
    Ok(())
}

/// Trains the configured predictor on a generated dataset.
pub fn cmd_train(config: &RunConfig, data: &Path, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let params = config.sim_params()?;
    let fingerprint = params.codebook_fingerprint()?;
    let dataset = Dataset::read_csv(data, &fingerprint)
        .with_context(|| format!("reading dataset {}", data.display()))?;

    let train_config = config.train_config();
    let (predictor, history) = match config.model {
        ModelKind::Linear => {
            let (model, history) = train(&dataset, &train_config)?;
            (Predictor::LinearSoftmax(model), history)
        }
        ModelKind::Fc => {
            let (model, history) = train_fc(&dataset, &config.fc_hidden, &train_config)?;
            (Predictor::FcNetwork(model), history)
        }
    };

    let mut manifest = Manifest::new("train", config);
    manifest.add_input(data)?;
    let model_path = out.join("model.json");
    predictor.save_json(&model_path)?;
    manifest.add_output(&model_path)?;
    report_written(&model_path);
    let history_path = out.join("history.csv");
    write_history_csv(&history_path, &history)?;
    manifest.add_output(&history_path)?;
    report_written(&history_path);
    if let Some(last) = history.last() {
        println!(
            "trained {} epochs, final val_top1 = {:.4}",
            history.len(),
            last.val_top1
        );
    }
    report_written(&manifest.write(out, "manifest_train.json")?);
    Ok(())
}

/// Everything `eval` writes in single-run mode, bundled as one JSON report.
#[derive(Debug, Serialize)]
struct EvalBundle {
    /// Baseline rows followed by predictor rows.
    kpi: Vec<beamsim_core::KpiReport>,
    /// Parents whose strongest-correlated child lies in their own block.
    correlation_block_agreement: usize,
    /// Total transmit parents, for reading the agreement count.
    num_parents: usize,
}

/// Evaluates a trained model against a dataset (single scenario), or
/// regenerates and compares all configured scenarios (suite mode).
pub fn cmd_eval(
    config: &RunConfig,
    model: Option<&Path>,
    data: Option<&Path>,
    out: &Path,
) -> Result<()> {
    if config.scenarios.len() > 1 {
        if model.is_some() || data.is_some() {
            bail!(
                "suite mode (multiple scenarios) regenerates data and retrains per scenario; \
                 --model and --data are not accepted"
            );
        }
        return eval_suite(config, out);
    }
    let (Some(model), Some(data)) = (model, data) else {
        bail!("single-scenario eval needs --model and --data (or pass several scenarios)");
    };
    eval_single(config, model, data, out)
}

fn eval_single(config: &RunConfig, model_path: &Path, data: &Path, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let params = config.sim_params()?;
    let fingerprint = params.codebook_fingerprint()?;
    let predictor = Predictor::load_json(model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    let dataset = Dataset::read_csv(data, &fingerprint)
        .with_context(|| format!("reading dataset {}", data.display()))?;

    // The model check runs first so a stale model fails with a fingerprint
    // diagnostic rather than a downstream dimension error.
    let ml_rows = evaluate_ml(&predictor, &dataset, &config.topk, config.probe_confirm)?;
    let mut kpi = evaluate_baselines(&dataset, &params)?;
    kpi.extend(ml_rows);
    let correlation = parent_child_correlation(&dataset)?;
    let structure = params.tx_structure()?;
    let bundle = EvalBundle {
        correlation_block_agreement: correlation_block_agreement(&correlation, &structure),
        num_parents: structure.num_parents(),
        kpi,
    };

    let mut manifest = Manifest::new("eval", config);
    manifest.add_input(model_path)?;
    manifest.add_input(data)?;
    let kpi_path = out.join("kpi.csv");
    write_text(&kpi_path, &render_kpi_csv(&bundle.kpi))?;
    manifest.add_output(&kpi_path)?;
    report_written(&kpi_path);
    let corr_path = out.join("correlation.csv");
    write_text(
        &corr_path,
        &render_correlation_csv(&correlation, dataset.feature_dim(), dataset.num_classes()),
    )?;
    manifest.add_output(&corr_path)?;
    report_written(&corr_path);
    let report_path = out.join("report.json");
    let mut text = serde_json::to_string_pretty(&bundle)?;
    text.push('\n');
    write_text(&report_path, &text)?;
    manifest.add_output(&report_path)?;
    report_written(&report_path);
    print!("{}", render_kpi_csv(&bundle.kpi));
    report_written(&manifest.write(out, "manifest_eval.json")?);
    Ok(())
}

fn eval_suite(config: &RunConfig, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let params = config.sim_params()?;
    let datasets = config
        .scenarios
        .iter()
        .map(|&id| {
            let spec = ScenarioSpec::new(id);
            generate_dataset(&spec, config.n_samples, &params, config.master_seed)
                .map(|d| (id, d))
                .with_context(|| format!("generating scenario {id}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let suite = run_scenario_suite(
        &datasets,
        &config.train_config(),
        &config.topk,
        config.probe_confirm,
    )?;

    let mut manifest = Manifest::new("eval", config);
    for scenario in &suite.scenarios {
        let path = out.join(format!("kpi_{}.csv", scenario.scenario));
        write_text(&path, &render_kpi_csv(&scenario.reports))?;
        manifest.add_output(&path)?;
        report_written(&path);
        println!(
            "scenario {}: top-1 error {:.4}",
            scenario.scenario, scenario.top1_error
        );
    }
    let suite_path = out.join("suite.json");
    let mut text = serde_json::to_string_pretty(&suite)?;
    text.push('\n');
    write_text(&suite_path, &text)?;
    manifest.add_output(&suite_path)?;
    report_written(&suite_path);
    if let Some(ok) = suite.ordering_satisfied {
        println!(
            "generalization ordering error(s2) > error(s3) > error(s1): {}",
            if ok { "satisfied" } else { "violated" }
        );
    }
    report_written(&manifest.write(out, "manifest_eval.json")?);
    Ok(())
}

/// Renders the complexity table: the built-in reference comparison, or one
/// computed row for a layer-spec JSON file.
pub fn cmd_complexity(config: &RunConfig, spec: Option<&Path>, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let mut manifest = Manifest::new("complexity", config);
    let csv = match spec {
        None => render_table_csv(&reference_table()?),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading layer spec {}", path.display()))?;
            let layers: Vec<LayerSpec> = serde_json::from_str(&text)
                .with_context(|| format!("parsing layer spec {}", path.display()))?;
            if layers.is_empty() {
                bail!("layer spec {} lists no layers", path.display());
            }
            manifest.add_input(path)?;
            let report = analyze(&layers)?;
            let model = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "model".into());
            let row = TableRow {
                model,
                source: Source::Computed,
                params: report.params,
                size_mbit: render_size_mbit(model_size_bits(report.params, TABLE_PRECISION_BITS)),
                flops: report.flops,
            };
            render_table_csv(&[row])
        }
    };
    let path = out.join("complexity.csv");
    write_text(&path, &csv)?;
    manifest.add_output(&path)?;
    print!("{csv}");
    report_written(&path);
    report_written(&manifest.write(out, "manifest_complexity.json")?);
    Ok(())
}
