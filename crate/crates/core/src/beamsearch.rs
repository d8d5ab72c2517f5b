//! Exhaustive and two-level hierarchical beam search.
//!
//! Both searches return the same [`SearchResult`] so callers can compare
//! selection quality against measurement cost: the exhaustive scan pays one
//! measurement per beam pair, the hierarchical scan pays
//! `F_p·W_p + s_T·s_R` — a parent sweep on both ends, then one child block.
//! Every argmax resolves ties toward the lowest transmit index, then the
//! lowest receive index.

use crate::beamforming::{sweep_rsrp, Codebook, HbsStructure, LinkBudget, RsrpReport, RxMode};
use crate::channel::ChannelInstance;
use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// Outcome of a beam search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    /// Selected transmit beam, child-level index.
    pub tx_index: usize,
    /// Selected receive beam, child-level index.
    pub rx_index: usize,
    /// RSRP measured for the selected pair, dBm.
    pub rsrp_dbm: f64,
    /// Measurements spent to reach the decision.
    pub measurements_used: usize,
}

/// Scans every measured entry of a complete report and returns the strongest
/// pair; lowest transmit then receive index wins ties.
pub fn exhaustive_search(report: &RsrpReport) -> Result<SearchResult> {
    if report.tx_count() == 0 || report.rx_count() == 0 {
        return Err(Error::EmptyInput("RSRP report"));
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for tx in 0..report.tx_count() {
        for rx in 0..report.rx_count() {
            let value = report
                .get(tx, rx)
                .ok_or(Error::Unmeasured { tx, rx })?;
            if best.map_or(true, |(_, _, v)| value > v) {
                best = Some((tx, rx, value));
            }
        }
    }
    let (tx_index, rx_index, rsrp_dbm) = best.expect("non-empty report");
    Ok(SearchResult {
        tx_index,
        rx_index,
        rsrp_dbm,
        measurements_used: report.tx_count() * report.rx_count(),
    })
}

fn validate_structure(hbs: &HbsStructure, side: &'static str) -> Result<()> {
    if hbs.num_parents() == 0 || hbs.num_children() == 0 {
        return Err(Error::EmptyInput("search structure"));
    }
    if hbs.num_parents() * hbs.children_per_parent != hbs.num_children()
        || hbs.parent_to_children.len() != hbs.num_parents()
        || hbs
            .parent_to_children
            .iter()
            .any(|c| c.len() != hbs.children_per_parent)
    {
        return Err(Error::invalid(
            "search structure",
            format!("{side}: parents × block size must cover the children exactly"),
        ));
    }
    Ok(())
}

fn block_codebook(hbs: &HbsStructure, parent: usize) -> Codebook {
    let children = &hbs.parent_to_children[parent];
    Codebook {
        kind: hbs.child.kind,
        beams: children.iter().map(|&c| hbs.child.beams[c].clone()).collect(),
        angles: children.iter().map(|&c| hbs.child.angles[c]).collect(),
        grid_shape: (children.len(), 1),
    }
}

/// Two-level search: sweep parent beams on both ends, then sweep the child
/// block of the winning parent pair with fresh measurements.
///
/// The parent sweep draws from `derive_seed(seed, &[1])` and the child sweep
/// from `derive_seed(seed, &[2])`, with block-local beam indices.
pub fn hierarchical_search(
    channel: &ChannelInstance,
    tx_hbs: &HbsStructure,
    rx_hbs: &HbsStructure,
    budget: &LinkBudget,
    averages: usize,
    seed: u64,
) -> Result<SearchResult> {
    validate_structure(tx_hbs, "tx")?;
    validate_structure(rx_hbs, "rx")?;

    let parent_report = sweep_rsrp(
        channel,
        &tx_hbs.parent,
        RxMode::Codebook(&rx_hbs.parent),
        budget,
        averages,
        derive_seed(seed, &[1]),
    )?;
    let level1 = exhaustive_search(&parent_report)?;

    let tx_block = block_codebook(tx_hbs, level1.tx_index);
    let rx_block = block_codebook(rx_hbs, level1.rx_index);
    let child_report = sweep_rsrp(
        channel,
        &tx_block,
        RxMode::Codebook(&rx_block),
        budget,
        averages,
        derive_seed(seed, &[2]),
    )?;
    let level2 = exhaustive_search(&child_report)?;

    Ok(SearchResult {
        tx_index: tx_hbs.parent_to_children[level1.tx_index][level2.tx_index],
        rx_index: rx_hbs.parent_to_children[level1.rx_index][level2.rx_index],
        rsrp_dbm: level2.rsrp_dbm,
        measurements_used: level1.measurements_used + level2.measurements_used,
    })
}

/// Fraction of measurements saved relative to probing everything.
pub fn overhead_reduction(probed: usize, total: usize) -> Result<f64> {
    if probed == 0 {
        return Err(Error::invalid("probed", "must be positive"));
    }
    if probed > total {
        return Err(Error::invalid(
            "probed",
            format!("{probed} exceeds the {total} possible measurements"),
        ));
    }
    Ok(1.0 - probed as f64 / total as f64)
}
