//! Plain-text key-value run configuration.
//!
//! A run is described by one flat `key = value` file; every knob of the
//! simulator, trainer, and evaluator has a key, and unknown or duplicate keys
//! are hard errors so a typo can never silently fall back to a default.
//! `#` starts a comment, blank lines are skipped, and angles are written in
//! degrees (the library works in radians internally). The shipped
//! `default.cfg` is exactly `RunConfig::default().render()`, so the file in
//! the repository can never drift from the built-in defaults.
//!
//! The master seed is the only seed a user supplies: dataset generation
//! consumes it directly and training derives its own stream from it, so one
//! `master_seed` pins every random choice of a run.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use beamsim_core::config::SimParams;
use beamsim_core::dataset::ScenarioId;
use beamsim_core::ml::{LossKind, TrainConfig};
use beamsim_core::seeding::derive_seed;
use beamsim_core::{AngleGrid, ArrayGeometry, LinkBudget, Sector};

/// Which predictor architecture `train` builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Single affine layer with a softmax readout.
    Linear,
    /// Fully-connected network baseline.
    Fc,
}

impl FromStr for ModelKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ModelKind::Linear),
            "fc" => Ok(ModelKind::Fc),
            other => bail!("unknown model {other:?}; expected linear or fc"),
        }
    }
}

/// Every knob of a run, resolved from defaults, a config file, and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Single seed every random stream of the run derives from.
    pub master_seed: u64,
    /// Scenarios a command acts on, in order.
    pub scenarios: Vec<ScenarioId>,
    /// Samples per generated dataset.
    pub n_samples: usize,
    pub bs_n_y: usize,
    pub bs_n_z: usize,
    pub ue_n_y: usize,
    pub ue_n_z: usize,
    pub tx_az_beams: usize,
    pub tx_el_beams: usize,
    pub tx_az_min_deg: f64,
    pub tx_az_max_deg: f64,
    pub tx_el_min_deg: f64,
    pub tx_el_max_deg: f64,
    pub rx_az_beams: usize,
    pub rx_el_beams: usize,
    pub rx_az_min_deg: f64,
    pub rx_az_max_deg: f64,
    pub rx_el_min_deg: f64,
    pub rx_el_max_deg: f64,
    /// Transmit parent block size along the azimuth grid axis.
    pub s_t_az: usize,
    /// Transmit parent block size along the elevation grid axis.
    pub s_t_el: usize,
    /// Receive parent block size along the azimuth grid axis.
    pub s_r_az: usize,
    /// Receive parent block size along the elevation grid axis.
    pub s_r_el: usize,
    pub carrier_ghz: f64,
    pub tx_power_dbm: f64,
    pub bs_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    pub noise_power_dbm: f64,
    /// Measurements averaged per RSRP value.
    pub noise_averages: usize,
    pub sector_az_half_deg: f64,
    pub sector_el_min_deg: f64,
    pub sector_el_max_deg: f64,
    pub min_distance_m: f64,
    pub cell_radius_m: f64,
    pub bs_height_m: f64,
    pub ue_height_min_m: f64,
    pub ue_height_max_m: f64,
    pub model: ModelKind,
    /// Hidden layer widths of the fully-connected baseline.
    pub fc_hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub loss: LossKind,
    /// Report the epoch with the best validation accuracy instead of the last.
    pub select_best_val: bool,
    /// Candidate-list sizes evaluated, in report order.
    pub topk: Vec<usize>,
    /// Probe the top-K candidates and keep the strongest.
    pub probe_confirm: bool,
}

impl Default for RunConfig {
    /// Mirrors the library defaults: an 8×8 / 8×1 half-wavelength setup at
    /// 28 GHz with a 16-parent, 64-child transmit codebook.
    fn default() -> Self {
        RunConfig {
            master_seed: 1,
            scenarios: vec![ScenarioId::S1],
            n_samples: 25_000,
            bs_n_y: 8,
            bs_n_z: 8,
            ue_n_y: 8,
            ue_n_z: 1,
            tx_az_beams: 8,
            tx_el_beams: 8,
            tx_az_min_deg: -60.0,
            tx_az_max_deg: 60.0,
            tx_el_min_deg: 60.0,
            tx_el_max_deg: 120.0,
            rx_az_beams: 8,
            rx_el_beams: 1,
            rx_az_min_deg: -90.0,
            rx_az_max_deg: 90.0,
            rx_el_min_deg: 60.0,
            rx_el_max_deg: 120.0,
            s_t_az: 2,
            s_t_el: 2,
            s_r_az: 4,
            s_r_el: 1,
            carrier_ghz: 28.0,
            tx_power_dbm: 30.0,
            bs_gain_dbi: 8.0,
            ue_gain_dbi: 5.0,
            noise_power_dbm: -88.0,
            noise_averages: 4,
            sector_az_half_deg: 60.0,
            sector_el_min_deg: 60.0,
            sector_el_max_deg: 120.0,
            min_distance_m: 10.0,
            cell_radius_m: 200.0,
            bs_height_m: 10.0,
            ue_height_min_m: 1.5,
            ue_height_max_m: 1.5,
            model: ModelKind::Linear,
            fc_hidden: vec![64, 64, 64, 64],
            epochs: 100,
            batch_size: 128,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            loss: LossKind::Mse,
            select_best_val: false,
            topk: vec![1, 2, 4],
            probe_confirm: true,
        }
    }
}

/// Canonical key order with one-line documentation, grouped by section.
/// `render` and the shipped `default.cfg` follow this order exactly.
const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["master_seed", "scenario", "n_samples"]),
    (
        "arrays (elements on a half-wavelength y-z grid)",
        &["bs_n_y", "bs_n_z", "ue_n_y", "ue_n_z"],
    ),
    (
        "transmit codebook grid (angles in degrees)",
        &[
            "tx_az_beams",
            "tx_el_beams",
            "tx_az_min_deg",
            "tx_az_max_deg",
            "tx_el_min_deg",
            "tx_el_max_deg",
        ],
    ),
    (
        "receive codebook grid (angles in degrees)",
        &[
            "rx_az_beams",
            "rx_el_beams",
            "rx_az_min_deg",
            "rx_az_max_deg",
            "rx_el_min_deg",
            "rx_el_max_deg",
        ],
    ),
    (
        "hierarchical parent blocks (children per parent along each grid axis)",
        &["s_t_az", "s_t_el", "s_r_az", "s_r_el"],
    ),
    (
        "link budget",
        &[
            "carrier_ghz",
            "tx_power_dbm",
            "bs_gain_dbi",
            "ue_gain_dbi",
            "noise_power_dbm",
            "noise_averages",
        ],
    ),
    (
        "deployment geometry",
        &[
            "sector_az_half_deg",
            "sector_el_min_deg",
            "sector_el_max_deg",
            "min_distance_m",
            "cell_radius_m",
            "bs_height_m",
            "ue_height_min_m",
            "ue_height_max_m",
        ],
    ),
    (
        "training",
        &[
            "model",
            "fc_hidden",
            "epochs",
            "batch_size",
            "learning_rate",
            "beta1",
            "beta2",
            "epsilon",
            "loss",
            "select_best_val",
        ],
    ),
    ("evaluation", &["topk", "probe_confirm"]),
];

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<T>()
                .map_err(|e| anyhow!("config key {key}: bad list item {item:?}: {e}"))
        })
        .collect()
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| anyhow!("config key {key}: bad value {value:?}: {e}"))
}

impl RunConfig {
    /// Value of one key in the file syntax.
    fn get(&self, key: &str) -> String {
        match key {
            "master_seed" => self.master_seed.to_string(),
            "scenario" => join(&self.scenarios),
            "n_samples" => self.n_samples.to_string(),
            "bs_n_y" => self.bs_n_y.to_string(),
            "bs_n_z" => self.bs_n_z.to_string(),
            "ue_n_y" => self.ue_n_y.to_string(),
            "ue_n_z" => self.ue_n_z.to_string(),
            "tx_az_beams" => self.tx_az_beams.to_string(),
            "tx_el_beams" => self.tx_el_beams.to_string(),
            "tx_az_min_deg" => self.tx_az_min_deg.to_string(),
            "tx_az_max_deg" => self.tx_az_max_deg.to_string(),
            "tx_el_min_deg" => self.tx_el_min_deg.to_string(),
            "tx_el_max_deg" => self.tx_el_max_deg.to_string(),
            "rx_az_beams" => self.rx_az_beams.to_string(),
            "rx_el_beams" => self.rx_el_beams.to_string(),
            "rx_az_min_deg" => self.rx_az_min_deg.to_string(),
            "rx_az_max_deg" => self.rx_az_max_deg.to_string(),
            "rx_el_min_deg" => self.rx_el_min_deg.to_string(),
            "rx_el_max_deg" => self.rx_el_max_deg.to_string(),
            "s_t_az" => self.s_t_az.to_string(),
            "s_t_el" => self.s_t_el.to_string(),
            "s_r_az" => self.s_r_az.to_string(),
            "s_r_el" => self.s_r_el.to_string(),
            "carrier_ghz" => self.carrier_ghz.to_string(),
            "tx_power_dbm" => self.tx_power_dbm.to_string(),
            "bs_gain_dbi" => self.bs_gain_dbi.to_string(),
            "ue_gain_dbi" => self.ue_gain_dbi.to_string(),
            "noise_power_dbm" => self.noise_power_dbm.to_string(),
            "noise_averages" => self.noise_averages.to_string(),
            "sector_az_half_deg" => self.sector_az_half_deg.to_string(),
            "sector_el_min_deg" => self.sector_el_min_deg.to_string(),
            "sector_el_max_deg" => self.sector_el_max_deg.to_string(),
            "min_distance_m" => self.min_distance_m.to_string(),
            "cell_radius_m" => self.cell_radius_m.to_string(),
            "bs_height_m" => self.bs_height_m.to_string(),
            "ue_height_min_m" => self.ue_height_min_m.to_string(),
            "ue_height_max_m" => self.ue_height_max_m.to_string(),
            "model" => match self.model {
                ModelKind::Linear => "linear".into(),
                ModelKind::Fc => "fc".into(),
            },
            "fc_hidden" => join(&self.fc_hidden),
            "epochs" => self.epochs.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "learning_rate" => self.learning_rate.to_string(),
            "beta1" => self.beta1.to_string(),
            "beta2" => self.beta2.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "loss" => match self.loss {
                LossKind::Mse => "mse".into(),
                LossKind::CrossEntropy => "cross-entropy".into(),
            },
            "select_best_val" => self.select_best_val.to_string(),
            "topk" => join(&self.topk),
            "probe_confirm" => self.probe_confirm.to_string(),
            other => unreachable!("unlisted config key {other}"),
        }
    }

    /// Applies one key from the file syntax.
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "master_seed" => self.master_seed = parse_value(key, value)?,
            "scenario" => {
                self.scenarios = value
                    .split(',')
                    .map(|s| {
                        ScenarioId::from_str(s.trim())
                            .map_err(|e| anyhow!("config key {key}: {e}"))
                    })
                    .collect::<Result<_>>()?;
            }
            "n_samples" => self.n_samples = parse_value(key, value)?,
            "bs_n_y" => self.bs_n_y = parse_value(key, value)?,
            "bs_n_z" => self.bs_n_z = parse_value(key, value)?,
            "ue_n_y" => self.ue_n_y = parse_value(key, value)?,
            "ue_n_z" => self.ue_n_z = parse_value(key, value)?,
            "tx_az_beams" => self.tx_az_beams = parse_value(key, value)?,
            "tx_el_beams" => self.tx_el_beams = parse_value(key, value)?,
            "tx_az_min_deg" => self.tx_az_min_deg = parse_value(key, value)?,
            "tx_az_max_deg" => self.tx_az_max_deg = parse_value(key, value)?,
            "tx_el_min_deg" => self.tx_el_min_deg = parse_value(key, value)?,
            "tx_el_max_deg" => self.tx_el_max_deg = parse_value(key, value)?,
            "rx_az_beams" => self.rx_az_beams = parse_value(key, value)?,
            "rx_el_beams" => self.rx_el_beams = parse_value(key, value)?,
            "rx_az_min_deg" => self.rx_az_min_deg = parse_value(key, value)?,
            "rx_az_max_deg" => self.rx_az_max_deg = parse_value(key, value)?,
            "rx_el_min_deg" => self.rx_el_min_deg = parse_value(key, value)?,
            "rx_el_max_deg" => self.rx_el_max_deg = parse_value(key, value)?,
            "s_t_az" => self.s_t_az = parse_value(key, value)?,
            "s_t_el" => self.s_t_el = parse_value(key, value)?,
            "s_r_az" => self.s_r_az = parse_value(key, value)?,
            "s_r_el" => self.s_r_el = parse_value(key, value)?,
            "carrier_ghz" => self.carrier_ghz = parse_value(key, value)?,
            "tx_power_dbm" => self.tx_power_dbm = parse_value(key, value)?,
            "bs_gain_dbi" => self.bs_gain_dbi = parse_value(key, value)?,
            "ue_gain_dbi" => self.ue_gain_dbi = parse_value(key, value)?,
            "noise_power_dbm" => self.noise_power_dbm = parse_value(key, value)?,
            "noise_averages" => self.noise_averages = parse_value(key, value)?,
            "sector_az_half_deg" => self.sector_az_half_deg = parse_value(key, value)?,
            "sector_el_min_deg" => self.sector_el_min_deg = parse_value(key, value)?,
            "sector_el_max_deg" => self.sector_el_max_deg = parse_value(key, value)?,
            "min_distance_m" => self.min_distance_m = parse_value(key, value)?,
            "cell_radius_m" => self.cell_radius_m = parse_value(key, value)?,
            "bs_height_m" => self.bs_height_m = parse_value(key, value)?,
            "ue_height_min_m" => self.ue_height_min_m = parse_value(key, value)?,
            "ue_height_max_m" => self.ue_height_max_m = parse_value(key, value)?,
            "model" => self.model = parse_value(key, value)?,
            "fc_hidden" => self.fc_hidden = parse_list(key, value)?,
            "epochs" => self.epochs = parse_value(key, value)?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "beta1" => self.beta1 = parse_value(key, value)?,
            "beta2" => self.beta2 = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "loss" => {
                self.loss = match value {
                    "mse" => LossKind::Mse,
                    "cross-entropy" => LossKind::CrossEntropy,
                    other => bail!("config key loss: unknown loss {other:?}"),
                }
            }
            "select_best_val" => self.select_best_val = parse_value(key, value)?,
            "topk" => self.topk = parse_list(key, value)?,
            "probe_confirm" => self.probe_confirm = parse_value(key, value)?,
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Serializes the configuration in the file syntax, canonical key order.
    /// Kept in sync with `assets/default.cfg` by test; regenerate that file
    /// from here whenever a default changes.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn render(&self) -> String {
        let mut out = String::from("# beamsim run configuration (key = value, # comments)\n");
        for (section, keys) in SECTIONS {
            let _ = writeln!(out, "\n# {section}");
            for key in *keys {
                let _ = writeln!(out, "{key} = {}", self.get(key));
            }
        }
        out
    }

    /// Resolved keys and values in canonical order, for manifest echoes.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        SECTIONS
            .iter()
            .flat_map(|(_, keys)| keys.iter())
            .map(|&key| (key.to_string(), self.get(key)))
            .collect()
    }

    /// Parses the file syntax on top of the defaults. Unknown keys,
    /// duplicate keys, and malformed lines are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected key = value", idx + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                bail!("config line {}: duplicate key {key:?}", idx + 1);
            }
            config
                .set(key, value)
                .with_context(|| format!("config line {}", idx + 1))?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Reads and parses a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Simulator parameters assembled from the geometry and budget knobs.
    pub fn sim_params(&self) -> Result<SimParams> {
        let params = SimParams {
            bs: ArrayGeometry::new(self.bs_n_y, self.bs_n_z)?,
            ue: ArrayGeometry::new(self.ue_n_y, self.ue_n_z)?,
            tx_grid: AngleGrid::new(
                self.tx_az_beams,
                self.tx_el_beams,
                (self.tx_az_min_deg.to_radians(), self.tx_az_max_deg.to_radians()),
                (self.tx_el_min_deg.to_radians(), self.tx_el_max_deg.to_radians()),
            )?,
            rx_grid: AngleGrid::new(
                self.rx_az_beams,
                self.rx_el_beams,
                (self.rx_az_min_deg.to_radians(), self.rx_az_max_deg.to_radians()),
                (self.rx_el_min_deg.to_radians(), self.rx_el_max_deg.to_radians()),
            )?,
            s_t_az: self.s_t_az,
            s_t_el: self.s_t_el,
            s_r_az: self.s_r_az,
            s_r_el: self.s_r_el,
            carrier_hz: self.carrier_ghz * 1e9,
            budget: LinkBudget {
                tx_power_dbm: self.tx_power_dbm,
                bs_gain_dbi: self.bs_gain_dbi,
                ue_gain_dbi: self.ue_gain_dbi,
                noise_power_dbm: self.noise_power_dbm,
            },
            noise_averages: self.noise_averages,
            sector: Sector {
                az_half: self.sector_az_half_deg.to_radians(),
                el_min: self.sector_el_min_deg.to_radians(),
                el_max: self.sector_el_max_deg.to_radians(),
            },
            min_distance_m: self.min_distance_m,
            cell_radius_m: self.cell_radius_m,
            bs_height_m: self.bs_height_m,
            ue_height_min_m: self.ue_height_min_m,
            ue_height_max_m: self.ue_height_max_m,
        };
        params.validate()?;
        Ok(params)
    }

    /// Training settings with the seed derived from the master seed.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            seed: derive_seed(self.master_seed, &[2]),
            loss: self.loss,
            select_best_val: self.select_best_val,
        }
    }

    /// Cross-field checks beyond what the assembled structs verify.
    pub fn validate(&self) -> Result<()> {
        self.sim_params()?;
        self.train_config()
            .validate()
            .map_err(|e| anyhow!("training settings: {e}"))?;
        if self.scenarios.is_empty() {
            bail!("scenario list must not be empty");
        }
        if self.n_samples == 0 {
            bail!("n_samples must be positive");
        }
        if self.topk.is_empty() || self.topk.contains(&0) {
            bail!("topk must list candidate counts of at least 1");
        }
        if self.fc_hidden.is_empty() || self.fc_hidden.contains(&0) {
            bail!("fc_hidden must list positive layer widths");
        }
        Ok(())
    }
}
