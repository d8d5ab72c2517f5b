//! Labeled dataset generation for beam prediction.
//!
//! Each sample is one user drop: the user position is drawn area-uniformly
//! inside the served sector at a random height (so line-of-sight elevations
//! spread over the codebook grid), a channel is generated, and a noiseless
//! exhaustive scan over all child beam pairs determines the best transmit
//! beam (the label) together with the best receive beam. With the receive
//! beam fixed to that genie choice, a noisy parent-beam sweep produces the
//! feature vector, and the noiseless child-beam column is stored for
//! evaluation. Scenarios control which propagation profile generates
//! training and test rows.
//!
//! Randomness fans out of the master seed as documented in [`crate::seeding`]:
//! sample `i` draws everything from `derive_seed(master, &[0, i])` and the
//! split shuffle from `derive_seed(master, &[1])`, so datasets regenerate
//! byte-identically and any single sample can be reproduced from its stored
//! seed alone.

use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{sweep_rsrp, RxMode};
use crate::beamsearch::exhaustive_search;
use crate::channel::{generate_drop, ChannelProfile, DropConfig, ProfileName};
use crate::config::SimParams;
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng_from_seed};

/// Default train/validation/test fractions.
pub const DEFAULT_SPLIT: [f64; 3] = [0.7, 0.1, 0.2];

/// Which split a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid("split", format!("unknown split {other:?}"))),
        }
    }
}

/// Named train/test profile combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioId {
    /// Train and test on profile D.
    S1,
    /// Train on profile D, test on profile E.
    S2,
    /// Train and test on an even mix of D and E.
    S3,
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioId::S1 => "s1",
            ScenarioId::S2 => "s2",
            ScenarioId::S3 => "s3",
        })
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(ScenarioId::S1),
            "s2" => Ok(ScenarioId::S2),
            "s3" => Ok(ScenarioId::S3),
            other => Err(Error::invalid("scenario", format!("unknown scenario {other:?}"))),
        }
    }
}

/// Which profiles generate the training-side and test-side rows.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    /// Profiles cycled over train and validation rows.
    pub train_profiles: Vec<ChannelProfile>,
    /// Profiles cycled over test rows.
    pub test_profiles: Vec<ChannelProfile>,
}

impl ScenarioSpec {
    /// The standard three generalization scenarios.
    pub fn new(id: ScenarioId) -> Self {
        let d = ChannelProfile::preset_d();
        let e = ChannelProfile::preset_e();
        match id {
            ScenarioId::S1 => Self {
                id,
                train_profiles: vec![d.clone()],
                test_profiles: vec![d],
            },
            ScenarioId::S2 => Self {
                id,
                train_profiles: vec![d],
                test_profiles: vec![e],
            },
            ScenarioId::S3 => Self {
                id,
                train_profiles: vec![d.clone(), e.clone()],
                test_profiles: vec![d, e],
            },
        }
    }
}

/// One labeled user drop.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Seed the sample regenerates from.
    pub seed: u64,
    /// Profile that generated the channel.
    pub scenario: ProfileName,
    /// User distance, m.
    pub ue_distance_m: f64,
    /// User azimuth seen from the array, rad.
    pub ue_azimuth: f64,
    /// Noisy parent-beam RSRPs at the genie receive beam, dBm (features).
    pub parent_rsrp_dbm: Vec<f64>,
    /// Best transmit child beam under a noiseless exhaustive scan.
    pub label: usize,
    /// Noiseless child-beam RSRPs at the genie receive beam, dBm.
    pub child_rsrp_dbm: Vec<f64>,
    /// `child_rsrp_dbm[label]`, the noiseless optimum.
    pub genie_rsrp_dbm: f64,
}

/// Per-feature mean and standard deviation, computed on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureStats {
    /// Smallest admissible standard deviation; constant features normalize
    /// to zero instead of dividing by zero.
    pub const STD_FLOOR: f64 = 1e-6;

    /// Population mean/std per column over the given feature rows.
    pub fn from_rows<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut rows = rows.into_iter();
        let first = rows.next().ok_or(Error::EmptyInput("training split"))?;
        let dim = first.len();
        let mut mean = first.to_vec();
        let mut sq = first.iter().map(|x| x * x).collect::<Vec<_>>();
        let mut count = 1usize;
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "feature row",
                    expected: dim,
                    actual: row.len(),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                mean[j] += x;
                sq[j] += x * x;
            }
            count += 1;
        }
        let n = count as f64;
        let mut std = Vec::with_capacity(dim);
        for j in 0..dim {
            mean[j] /= n;
            let var = (sq[j] / n - mean[j] * mean[j]).max(0.0);
            std.push(var.sqrt().max(Self::STD_FLOOR));
        }
        Ok(Self { mean, std })
    }

    /// Z-scores a raw feature vector.
    pub fn normalize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                what: "feature vector",
                expected: self.mean.len(),
                actual: raw.len(),
            });
        }
        Ok(raw
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect())
    }
}

/// A generated dataset with split assignment and training-split statistics.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    /// Split of `samples[i]`.
    pub splits: Vec<Split>,
    /// Normalization statistics from the training split.
    pub feature_stats: FeatureStats,
    /// Hash of the codebooks the samples were measured with.
    pub codebook_fingerprint: String,
}

/// Largest-remainder split counts followed by a seeded shuffle.
pub fn assign_splits(n: usize, fractions: [f64; 3], shuffle_seed: u64) -> Result<Vec<Split>> {
    if n == 0 {
        return Err(Error::EmptyInput("samples to split"));
    }
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|&f| !(0.0..=1.0).contains(&f)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(
            "fractions",
            format!("must be in [0,1] and sum to 1, got {fractions:?}"),
        ));
    }
    let quotas: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut leftover = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in &order {
        if leftover == 0 {
            break;
        }
        counts[i] += 1;
        leftover -= 1;
    }
    let mut splits = Vec::with_capacity(n);
    for (i, &split) in [Split::Train, Split::Val, Split::Test].iter().enumerate() {
        splits.extend(std::iter::repeat(split).take(counts[i]));
    }
    splits.shuffle(&mut rng_from_seed(shuffle_seed));
    Ok(splits)
}

/// Generates one labeled sample from its seed.
///
/// Draw order inside the sample stream: position radius, azimuth, then
/// terminal height. The radius is area-uniform over the annulus (`r =
/// √(r_min² + u·(r_max² − r_min²))`), and the line-of-sight elevation
/// follows from the height difference, clamped to the served range.
pub fn generate_sample(profile: &ChannelProfile, params: &SimParams, seed: u64) -> Result<Sample> {
    let mut pos_rng = rng_from_seed(derive_seed(seed, &[0]));
    let u: f64 = pos_rng.gen();
    let (r_min, r_max) = (params.min_distance_m, params.cell_radius_m);
    let ue_distance_m = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
    let ue_azimuth = pos_rng.gen_range(-params.sector.az_half..params.sector.az_half);
    let ue_height_m = if params.ue_height_max_m > params.ue_height_min_m {
        pos_rng.gen_range(params.ue_height_min_m..params.ue_height_max_m)
    } else {
        params.ue_height_min_m
    };
    let ue_elevation = (std::f64::consts::FRAC_PI_2
        + (params.bs_height_m - ue_height_m).atan2(ue_distance_m))
    .clamp(params.sector.el_min, params.sector.el_max);

    let drop = generate_drop(&DropConfig {
        profile: profile.clone(),
        ue_distance_m,
        ue_azimuth,
        ue_elevation,
        carrier_hz: params.carrier_hz,
        bs: params.bs,
        ue: params.ue,
        sector: params.sector,
        seed,
    })?;

    let tx = params.tx_structure()?;
    let rx = params.rx_structure()?;
    let noiseless = params.budget.noiseless();
    let full = sweep_rsrp(&drop, &tx.child, RxMode::Codebook(&rx.child), &noiseless, 1, 0)?;
    let genie = exhaustive_search(&full)?;
    let label = genie.tx_index;
    let child_rsrp_dbm: Vec<f64> = (0..tx.child.len())
        .map(|m| full.get(m, genie.rx_index).expect("full scan measured"))
        .collect();

    let features = sweep_rsrp(
        &drop,
        &tx.parent,
        RxMode::Fixed(&rx.child.beams[genie.rx_index]),
        &params.budget,
        params.noise_averages,
        derive_seed(seed, &[1]),
    )?;
    let parent_rsrp_dbm: Vec<f64> = (0..tx.parent.len())
        .map(|m| features.get(m, 0).expect("parent sweep measured"))
        .collect();

    let genie_rsrp_dbm = child_rsrp_dbm[label];
    Ok(Sample {
        seed,
        scenario: profile.name,
        ue_distance_m,
        ue_azimuth,
        parent_rsrp_dbm,
        label,
        child_rsrp_dbm,
        genie_rsrp_dbm,
    })
}

/// Generates `n_samples` drops under a scenario: test rows cycle through the
/// scenario's test profiles, all other rows through its training profiles,
/// keyed by sample index.
pub fn generate_dataset(
    scenario: &ScenarioSpec,
    n_samples: usize,
    params: &SimParams,
    master_seed: u64,
) -> Result<Dataset> {
    params.validate()?;
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be positive"));
    }
    if scenario.train_profiles.is_empty() || scenario.test_profiles.is_empty() {
        return Err(Error::EmptyInput("scenario profiles"));
    }
    let splits = assign_splits(n_samples, DEFAULT_SPLIT, derive_seed(master_seed, &[1]))?;
    let samples: Vec<Sample> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let profile = match splits[i] {
                Split::Test => &scenario.test_profiles[i % scenario.test_profiles.len()],
                _ => &scenario.train_profiles[i % scenario.train_profiles.len()],
            };
            generate_sample(profile, params, derive_seed(master_seed, &[0, i as u64]))
        })
        .collect::<Result<_>>()?;
    let feature_stats = train_stats(&samples, &splits)?;
    Ok(Dataset {
        samples,
        splits,
        feature_stats,
        codebook_fingerprint: params.codebook_fingerprint()?,
    })
}

fn train_stats(samples: &[Sample], splits: &[Split]) -> Result<FeatureStats> {
    FeatureStats::from_rows(
        samples
            .iter()
            .zip(splits)
            .filter(|(_, &s)| s == Split::Train)
            .map(|(sample, _)| sample.parent_rsrp_dbm.as_slice()),
    )
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Feature dimension (`F_p`).
    pub fn feature_dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.parent_rsrp_dbm.len())
    }

    /// Number of label classes (`F`).
    pub fn num_classes(&self) -> usize {
        self.samples.first().map_or(0, |s| s.child_rsrp_dbm.len())
    }

    /// Indices of the samples in one split, in storage order.
    pub fn rows(&self, split: Split) -> Vec<usize> {
        self.splits
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == split)
            .map(|(i, _)| i)
            .collect()
    }

    /// Z-scored features of sample `i` under the dataset's training stats.
    pub fn normalized_features(&self, i: usize) -> Result<Vec<f64>> {
        self.feature_stats.normalize(&self.samples[i].parent_rsrp_dbm)
    }

    /// Re-splits the samples and recomputes training statistics.
    pub fn reassign_splits(&mut self, fractions: [f64; 3], shuffle_seed: u64) -> Result<()> {
        let splits = assign_splits(self.len(), fractions, shuffle_seed)?;
        let stats = train_stats(&self.samples, &splits)?;
        self.splits = splits;
        self.feature_stats = stats;
        Ok(())
    }

    /// Writes the dataset as CSV: header
    /// `seed,scenario,split,ue_r,ue_az,label,p0..,c0..,genie_rsrp`, floats
    /// with 9 significant digits. Byte-identical for identical datasets.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        let (f_p, f) = (self.feature_dim(), self.num_classes());
        write!(out, "seed,scenario,split,ue_r,ue_az,label")?;
        for j in 0..f_p {
            write!(out, ",p{j}")?;
        }
        for j in 0..f {
            write!(out, ",c{j}")?;
        }
        writeln!(out, ",genie_rsrp")?;
        for (sample, split) in self.samples.iter().zip(&self.splits) {
            write!(
                out,
                "{},{},{},{:.8e},{:.8e},{}",
                sample.seed, sample.scenario, split, sample.ue_distance_m, sample.ue_azimuth,
                sample.label
            )?;
            for v in &sample.parent_rsrp_dbm {
                write!(out, ",{v:.8e}")?;
            }
            for v in &sample.child_rsrp_dbm {
                write!(out, ",{v:.8e}")?;
            }
            writeln!(out, ",{:.8e}", sample.genie_rsrp_dbm)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a dataset written by [`Dataset::write_csv`], recomputing the
    /// training statistics; the codebook fingerprint comes from the caller
    /// (it lives in the run manifest, not the CSV).
    pub fn read_csv(path: &Path, codebook_fingerprint: &str) -> Result<Dataset> {
        let display = path.display().to_string();
        let parse_err = |line: usize, column: &str, reason: String| Error::Parse {
            path: display.clone(),
            line,
            column: column.to_string(),
            reason,
        };
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "header", "empty file".into()))??;
        let fields: Vec<&str> = header.split(',').collect();
        let fixed = ["seed", "scenario", "split", "ue_r", "ue_az", "label"];
        if fields.len() < fixed.len() + 2 {
            return Err(parse_err(1, "header", "too few columns".into()));
        }
        for (i, want) in fixed.iter().enumerate() {
            if fields[i] != *want {
                return Err(parse_err(1, fields[i], format!("expected column {want:?}")));
            }
        }
        let mut pos = fixed.len();
        let mut f_p = 0;
        while pos < fields.len() && fields[pos] == format!("p{f_p}") {
            f_p += 1;
            pos += 1;
        }
        let mut f = 0;
        while pos < fields.len() && fields[pos] == format!("c{f}") {
            f += 1;
            pos += 1;
        }
        if f_p == 0 || f == 0 || pos + 1 != fields.len() || fields[pos] != "genie_rsrp" {
            return Err(parse_err(
                1,
                fields.get(pos).copied().unwrap_or("header"),
                "expected p0.., c0.., genie_rsrp".into(),
            ));
        }

        let mut samples = Vec::new();
        let mut splits = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let lineno = lineno + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != fields.len() {
                return Err(parse_err(
                    lineno,
                    "row",
                    format!("expected {} cells, found {}", fields.len(), cells.len()),
                ));
            }
            let cell = |j: usize| cells[j];
            let float = |j: usize| -> Result<f64> {
                cell(j)
                    .parse::<f64>()
                    .map_err(|e| parse_err(lineno, fields[j], e.to_string()))
            };
            let seed = cell(0)
                .parse::<u64>()
                .map_err(|e| parse_err(lineno, "seed", e.to_string()))?;
            let scenario = cell(1)
                .parse::<ProfileName>()
                .map_err(|e| parse_err(lineno, "scenario", e.to_string()))?;
            let split = cell(2)
                .parse::<Split>()
                .map_err(|e| parse_err(lineno, "split", e.to_string()))?;
            let label = cell(5)
                .parse::<usize>()
                .map_err(|e| parse_err(lineno, "label", e.to_string()))?;
            if label >= f {
                return Err(parse_err(lineno, "label", format!("{label} out of range 0..{f}")));
            }
            let mut parent_rsrp_dbm = Vec::with_capacity(f_p);
            for j in 0..f_p {
                parent_rsrp_dbm.push(float(6 + j)?);
            }
            let mut child_rsrp_dbm = Vec::with_capacity(f);
            for j in 0..f {
                child_rsrp_dbm.push(float(6 + f_p + j)?);
            }
            samples.push(Sample {
                seed,
                scenario,
                ue_distance_m: float(3)?,
                ue_azimuth: float(4)?,
                parent_rsrp_dbm,
                label,
                child_rsrp_dbm,
                genie_rsrp_dbm: float(6 + f_p + f)?,
            });
            splits.push(split);
        }
        if samples.is_empty() {
            return Err(Error::EmptyInput("dataset rows"));
        }
        let feature_stats = train_stats(&samples, &splits)?;
        Ok(Dataset {
            samples,
            splits,
            feature_stats,
            codebook_fingerprint: codebook_fingerprint.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_params() -> SimParams {
        SimParams::default()
    }

    fn tiny_dataset(n: usize, master: u64) -> Dataset {
        generate_dataset(&ScenarioSpec::new(ScenarioId::S1), n, &small_params(), master).unwrap()
    }

    // 1. Largest-remainder split arithmetic at the reference sizes.
    #[test]
    fn split_counts() {
        let count = |splits: &[Split], s: Split| splits.iter().filter(|&&x| x == s).count();
        let splits = assign_splits(25000, DEFAULT_SPLIT, 1).unwrap();
        assert_eq!(count(&splits, Split::Train), 17500);
        assert_eq!(count(&splits, Split::Val), 2500);
        assert_eq!(count(&splits, Split::Test), 5000);

        let splits = assign_splits(10, DEFAULT_SPLIT, 1).unwrap();
        assert_eq!(
            [
                count(&splits, Split::Train),
                count(&splits, Split::Val),
                count(&splits, Split::Test)
            ],
            [7, 1, 2]
        );

        let splits = assign_splits(1, [1.0, 0.0, 0.0], 9).unwrap();
        assert_eq!(splits, vec![Split::Train]);
    }

    // 2. The shuffle is seed-deterministic and seed-sensitive.
    #[test]
    fn split_shuffle_determinism() {
        let a = assign_splits(100, DEFAULT_SPLIT, 42).unwrap();
        let b = assign_splits(100, DEFAULT_SPLIT, 42).unwrap();
        assert_eq!(a, b);
        let c = assign_splits(100, DEFAULT_SPLIT, 43).unwrap();
        assert_ne!(a, c, "different shuffle seeds should reorder 100 labels");
    }

    // 3. Invalid fractions are rejected.
    #[test]
    fn rejects_bad_fractions() {
        assert!(assign_splits(10, [0.7, 0.1, 0.1], 0).is_err(), "sums to 0.9");
        assert!(assign_splits(10, [1.2, -0.1, -0.1], 0).is_err());
        assert!(assign_splits(0, DEFAULT_SPLIT, 0).is_err());
    }

    // 4. Generated samples satisfy the structural contract: label in range,
    //    the genie value matches the labeled entry, and the label is the
    //    lowest argmax of the stored child values.
    #[test]
    fn sample_contract() {
        let data = tiny_dataset(40, 7);
        assert_eq!(data.len(), 40);
        assert_eq!(data.feature_dim(), 16);
        assert_eq!(data.num_classes(), 64);
        for sample in &data.samples {
            assert!(sample.label < 64);
            assert!(sample.parent_rsrp_dbm.iter().all(|v| v.is_finite()));
            assert_abs_diff_eq!(
                sample.genie_rsrp_dbm,
                sample.child_rsrp_dbm[sample.label],
                epsilon = 0.0
            );
            let best = sample
                .child_rsrp_dbm
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                .unwrap()
                .0;
            assert_eq!(sample.label, best, "label must be the lowest-index argmax");
            assert!(sample.ue_distance_m >= 10.0 && sample.ue_distance_m <= 200.0);
            assert!(sample.ue_azimuth.abs() <= 60f64.to_radians());
        }
    }

    // 5. A sample regenerates exactly from its stored seed.
    #[test]
    fn sample_regenerates_from_seed() {
        let data = tiny_dataset(6, 21);
        let params = small_params();
        for sample in &data.samples {
            let again = generate_sample(&ChannelProfile::preset_d(), &params, sample.seed).unwrap();
            assert_eq!(&again, sample);
        }
    }

    // 6. Same master seed, byte-identical CSV; different master, different.
    #[test]
    fn dataset_bytes_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let (pa, pb, pc) = (
            dir.path().join("a.csv"),
            dir.path().join("b.csv"),
            dir.path().join("c.csv"),
        );
        tiny_dataset(12, 3).write_csv(&pa).unwrap();
        tiny_dataset(12, 3).write_csv(&pb).unwrap();
        tiny_dataset(12, 4).write_csv(&pc).unwrap();
        let (a, b, c) = (
            std::fs::read(&pa).unwrap(),
            std::fs::read(&pb).unwrap(),
            std::fs::read(&pc).unwrap(),
        );
        assert_eq!(a, b, "same master seed must reproduce identical bytes");
        assert_ne!(a, c, "different master seeds must differ");
    }

    // 7. CSV round trip preserves counts, labels, splits, and values to the
    //    printed precision.
    #[test]
    fn csv_round_trip() {
        let data = tiny_dataset(15, 9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        data.write_csv(&path).unwrap();
        let back = Dataset::read_csv(&path, &data.codebook_fingerprint).unwrap();
        assert_eq!(back.len(), data.len());
        assert_eq!(back.splits, data.splits);
        assert_eq!(back.codebook_fingerprint, data.codebook_fingerprint);
        for (x, y) in data.samples.iter().zip(&back.samples) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.label, y.label);
            assert_eq!(x.scenario, y.scenario);
            let rel = (x.genie_rsrp_dbm - y.genie_rsrp_dbm).abs() / x.genie_rsrp_dbm.abs();
            assert!(rel < 1e-8, "9 significant digits should round-trip to 1e-8");
            for (a, b) in x.parent_rsrp_dbm.iter().zip(&y.parent_rsrp_dbm) {
                assert!((a - b).abs() / a.abs() < 1e-8);
            }
        }
    }

    // 8. Header corruption is diagnosed with the offending column name.
    #[test]
    fn csv_diagnoses_bad_header() {
        let data = tiny_dataset(4, 2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        data.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap().replace(",p3,", ",q3,");
        std::fs::write(&path, text).unwrap();
        match Dataset::read_csv(&path, "") {
            Err(Error::Parse { line: 1, column, .. }) => {
                assert_eq!(column, "q3", "diagnostic should name the bad column")
            }
            other => panic!("expected a header parse error, got {other:?}"),
        }
    }

    // 9. Bad cells are diagnosed with line and column.
    #[test]
    fn csv_diagnoses_bad_cells() {
        let data = tiny_dataset(4, 2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        data.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();

        // Replace row 3's label (column 6) with a non-number.
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut cells: Vec<String> = lines[3].split(',').map(String::from).collect();
        cells[5] = "oops".into();
        lines[3] = cells.join(",");
        std::fs::write(&path, lines.join("\n")).unwrap();
        match Dataset::read_csv(&path, "") {
            Err(Error::Parse { line: 4, column, .. }) => assert_eq!(column, "label"),
            other => panic!("expected a label parse error, got {other:?}"),
        }

        // Truncate row 2: the row length check fires.
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[2] = lines[2].rsplit_once(',').unwrap().0.to_string();
        std::fs::write(&path, lines.join("\n")).unwrap();
        match Dataset::read_csv(&path, "") {
            Err(Error::Parse { line: 3, column, .. }) => assert_eq!(column, "row"),
            other => panic!("expected a row-shape error, got {other:?}"),
        }
    }

    // 10. Scenario 2 draws test rows from profile E and the rest from D;
    //     scenario 3 alternates profiles by sample index.
    #[test]
    fn scenario_profiles_by_split() {
        let params = small_params();
        let s2 = generate_dataset(&ScenarioSpec::new(ScenarioId::S2), 30, &params, 5).unwrap();
        for (sample, split) in s2.samples.iter().zip(&s2.splits) {
            match split {
                Split::Test => assert_eq!(sample.scenario, ProfileName::E),
                _ => assert_eq!(sample.scenario, ProfileName::D),
            }
        }

        let s3 = generate_dataset(&ScenarioSpec::new(ScenarioId::S3), 30, &params, 5).unwrap();
        for (i, sample) in s3.samples.iter().enumerate() {
            let expect = if i % 2 == 0 { ProfileName::D } else { ProfileName::E };
            assert_eq!(sample.scenario, expect, "sample {i}");
        }
    }

    // 11. Training-split normalization: mean 0, std 1; constant columns map
    //     to zero under the floored std.
    #[test]
    fn normalization_contract() {
        let data = tiny_dataset(60, 13);
        let train = data.rows(Split::Train);
        let dim = data.feature_dim();
        let mut mean = vec![0.0; dim];
        let mut var = vec![0.0; dim];
        for &i in &train {
            let z = data.normalized_features(i).unwrap();
            for j in 0..dim {
                mean[j] += z[j];
                var[j] += z[j] * z[j];
            }
        }
        let n = train.len() as f64;
        for j in 0..dim {
            assert!((mean[j] / n).abs() < 1e-9, "column {j} mean");
            assert!((var[j] / n - 1.0).abs() < 1e-9, "column {j} std");
        }

        let stats = FeatureStats::from_rows([[5.0, 1.0].as_slice(), [5.0, 3.0].as_slice()]).unwrap();
        let z = stats.normalize(&[5.0, 2.0]).unwrap();
        assert_abs_diff_eq!(z[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], 0.0, epsilon = 1e-12);
        assert!(FeatureStats::from_rows(std::iter::empty::<&[f64]>()).is_err());
    }

    // 12. Re-splitting updates assignments and statistics deterministically.
    #[test]
    fn resplit_recomputes_stats() {
        let mut data = tiny_dataset(20, 17);
        let before = data.feature_stats.clone();
        data.reassign_splits([0.5, 0.25, 0.25], 99).unwrap();
        let count = data.splits.iter().filter(|&&s| s == Split::Train).count();
        assert_eq!(count, 10);
        assert_ne!(data.feature_stats, before, "stats follow the new train split");
        assert!(data.reassign_splits([0.0, 0.5, 0.5], 1).is_err(), "empty train split");
    }

    // 13. The features correlate with the label at block level: the argmax
    //     parent contains the labeled child in well over half of the samples.
    #[test]
    fn parent_argmax_tracks_label_block() {
        let params = small_params();
        let data = tiny_dataset(200, 29);
        let tx = params.tx_structure().unwrap();
        let hits = data
            .samples
            .iter()
            .filter(|s| {
                let best_parent = s
                    .parent_rsrp_dbm
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                    .unwrap()
                    .0;
                tx.child_to_parent[s.label] == best_parent
            })
            .count();
        let rate = hits as f64 / data.len() as f64;
        assert!(rate > 0.6, "block agreement rate {rate:.3} too low");
    }

    // 14. Labels spread over many distinct beams even in a modest run.
    #[test]
    fn labels_cover_many_beams() {
        let data = tiny_dataset(400, 37);
        let mut seen = [false; 64];
        for s in &data.samples {
            seen[s.label] = true;
        }
        let distinct = seen.iter().filter(|&&b| b).count();
        assert!(distinct > 12, "only {distinct} distinct labels in 400 samples");
    }

    // 15. Bad inputs are rejected.
    #[test]
    fn rejects_bad_inputs() {
        let params = small_params();
        assert!(generate_dataset(&ScenarioSpec::new(ScenarioId::S1), 0, &params, 1).is_err());
        let empty = ScenarioSpec {
            id: ScenarioId::S1,
            train_profiles: vec![],
            test_profiles: vec![ChannelProfile::preset_d()],
        };
        assert!(generate_dataset(&empty, 10, &params, 1).is_err());
    }
}
