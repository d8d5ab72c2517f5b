//! Parameter, FLOP, and size accounting for layered models.
//!
//! Complexity is counted from declarative layer descriptions rather than live
//! networks, so published reference architectures can be compared without
//! instantiating them: a fully-connected layer costs `(n_in + 1)·n_out`
//! parameters and, per the one-MAC-per-parameter inference convention, the
//! same number of FLOPs; a convolutional layer costs
//! `n_f·(f_h·f_w·f_d + 1)` parameters and `n_f·i_h·i_w·(f_h·f_w·f_d)` FLOPs.
//! [`reference_table`] renders the comparison table: published baselines are
//! carried verbatim and flagged `literature`, while the row for the in-crate
//! predictor is computed from its layer spec.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declarative description of one layer, the unit of complexity accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerSpec {
    /// Fully-connected layer.
    Fc {
        /// Input width.
        n_inputs: usize,
        /// Output width.
        n_outputs: usize,
    },
    /// Convolutional layer; input height/width are needed for FLOPs only.
    Conv {
        /// Number of filters.
        n_filters: usize,
        /// Filter height.
        filter_h: usize,
        /// Filter width.
        filter_w: usize,
        /// Filter depth (input channels).
        filter_d: usize,
        /// Input height.
        input_h: usize,
        /// Input width.
        input_w: usize,
    },
}

impl LayerSpec {
    /// Rejects zero dimensions.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LayerSpec::Fc { n_inputs, n_outputs } => n_inputs > 0 && n_outputs > 0,
            LayerSpec::Conv {
                n_filters,
                filter_h,
                filter_w,
                filter_d,
                input_h,
                input_w,
            } => [n_filters, filter_h, filter_w, filter_d, input_h, input_w]
                .iter()
                .all(|&d| d > 0),
        };
        if !ok {
            return Err(Error::invalid("layer spec", "all dimensions must be positive"));
        }
        Ok(())
    }

    /// Trainable parameters of this layer.
    fn params(&self) -> u64 {
        match *self {
            LayerSpec::Fc { n_inputs, n_outputs } => (n_inputs as u64 + 1) * n_outputs as u64,
            LayerSpec::Conv {
                n_filters,
                filter_h,
                filter_w,
                filter_d,
                ..
            } => n_filters as u64 * ((filter_h * filter_w * filter_d) as u64 + 1),
        }
    }

    /// Inference FLOPs of this layer for one sample.
    fn flops(&self) -> u64 {
        match *self {
            LayerSpec::Fc { .. } => self.params(),
            LayerSpec::Conv {
                n_filters,
                filter_h,
                filter_w,
                filter_d,
                input_h,
                input_w,
            } => (n_filters * input_h * input_w) as u64 * (filter_h * filter_w * filter_d) as u64,
        }
    }
}

/// Total trainable parameters of a layer stack.
pub fn count_params(specs: &[LayerSpec]) -> Result<u64> {
    specs.iter().try_fold(0u64, |acc, s| {
        s.validate()?;
        Ok(acc + s.params())
    })
}

/// Total inference FLOPs of a layer stack for one sample: one
/// multiply-accumulate per trainable parameter for fully-connected layers,
/// the sliding-window product for convolutions.
pub fn count_flops(specs: &[LayerSpec]) -> Result<u64> {
    specs.iter().try_fold(0u64, |acc, s| {
        s.validate()?;
        Ok(acc + s.flops())
    })
}

/// Storage footprint of a parameter count at the given precision.
pub fn model_size_bits(params: u64, precision_bits: u32) -> u64 {
    params * u64::from(precision_bits)
}

/// Parameter and FLOP totals of one layer stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// Trainable parameters.
    pub params: u64,
    /// Inference FLOPs for one sample.
    pub flops: u64,
}

impl ComplexityReport {
    /// Storage footprint at the given precision.
    pub fn size_bits(&self, precision_bits: u32) -> u64 {
        model_size_bits(self.params, precision_bits)
    }
}

/// Counts parameters and FLOPs of a layer stack in one pass.
pub fn analyze(specs: &[LayerSpec]) -> Result<ComplexityReport> {
    Ok(ComplexityReport {
        params: count_params(specs)?,
        flops: count_flops(specs)?,
    })
}

/// Layer stack of the in-crate predictor: one affine layer from parent
/// measurements to child probabilities.
pub fn proposed_layer_specs(n_parents: usize, n_children: usize) -> Vec<LayerSpec> {
    vec![LayerSpec::Fc {
        n_inputs: n_parents,
        n_outputs: n_children,
    }]
}

/// Layer stack of the published fully-connected baseline: a 16-wide input
/// into five 64-wide layers, totalling 17728 parameters.
pub fn reference_fc_chain() -> Vec<LayerSpec> {
    let mut chain = vec![LayerSpec::Fc {
        n_inputs: 16,
        n_outputs: 64,
    }];
    chain.extend(std::iter::repeat(LayerSpec::Fc {
        n_inputs: 64,
        n_outputs: 64,
    }).take(4));
    chain
}

/// Whether a table row was computed here or quoted from its publication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Derived from a layer spec by this crate.
    Computed,
    /// Carried verbatim from the published comparison.
    Literature,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Computed => "computed",
            Source::Literature => "literature",
        })
    }
}

/// One row of the complexity comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// Model name.
    pub model: String,
    /// Provenance of the numbers.
    pub source: Source,
    /// Trainable parameters.
    pub params: u64,
    /// Model size in Mbit, already rendered (literature values verbatim).
    pub size_mbit: String,
    /// Inference FLOPs for one sample.
    pub flops: u64,
}

/// Renders a bit count in Mbit, rounded *up* at two decimals so a reported
/// size never understates the footprint (34816 bits → "0.04").
pub fn render_size_mbit(bits: u64) -> String {
    let mbit = bits as f64 / 1e6;
    format!("{:.2}", (mbit * 100.0).ceil() / 100.0)
}

/// Precision assumed by the published comparison.
pub const TABLE_PRECISION_BITS: u32 = 32;

/// The complexity comparison table: four published baselines verbatim, then
/// the in-crate 16→64 affine predictor computed from its spec.
pub fn reference_table() -> Result<Vec<TableRow>> {
    let ours = analyze(&proposed_layer_specs(16, 64))?;
    let literature = [
        ("fc-nn", 17728u64, "0.5", 17728u64),
        ("cnn-a", 352034, "11.2", 1_370_000),
        ("cnn-b", 67008, "2.1", 332_000),
        ("cnn-c", 739073, "23.6", 47_300_000),
    ];
    let mut rows: Vec<TableRow> = literature
        .iter()
        .map(|&(model, params, size, flops)| TableRow {
            model: model.to_string(),
            source: Source::Literature,
            params,
            size_mbit: size.to_string(),
            flops,
        })
        .collect();
    rows.push(TableRow {
        model: "linear-softmax".to_string(),
        source: Source::Computed,
        params: ours.params,
        size_mbit: render_size_mbit(ours.size_bits(TABLE_PRECISION_BITS)),
        flops: ours.flops,
    });
    Ok(rows)
}

/// Serializes table rows as CSV with a fixed header.
pub fn render_table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("model,source,trainable_params,model_size_mbit,flops\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.model, row.source, row.params, row.size_mbit, row.flops
        ));
    }
    out
}
