//! Codebooks, link budget, and RSRP measurements.
//!
//! Transmit and receive beams are steering vectors on a uniform grid of
//! quantized angles (cell centers of the covered angular region, azimuth-major
//! ordering: beam `i_az·n_el + i_el`). A two-level structure groups child
//! beams into rectangular blocks; each block's parent beam steers a centered
//! subarray at the block's angular centroid, deactivating elements in
//! proportion to the block size so the widened beam covers its children.
//!
//! A measurement applies precoder `f` and combiner `w` to a channel `H` and
//! reports `RSRP = |y|²` in dBm, with
//!
//! ```text
//! y = sqrt(P) · wᴴ H f · x + wᴴ η,    η ~ CN(0, σ²·I)
//! ```
//!
//! where `P` folds the transmit power and both antenna gains, and `σ²` comes
//! from the link budget's noise power. Every measurement draws fresh noise
//! from its own seed, `derive_seed(sweep_seed, &[m, n])` for beam pair
//! `(m, n)`, so sweeps are reproducible measurement by measurement.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{array_response, ArrayGeometry, ChannelInstance};
use crate::error::{Error, Result};
use crate::hashing::sha256_hex;
use crate::seeding::{derive_seed, rng_from_seed};

// ── Unit helpers ────────────────────────────────────────────────────────────

/// dBm to linear milliwatts.
#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Linear milliwatts to dBm (`0 → -inf`).
#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

// ── Angle grid and codebooks ────────────────────────────────────────────────

/// Uniform rectangular grid of steering angles; beams point at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    pub n_az: usize,
    pub n_el: usize,
    pub az_min: f64,
    pub az_max: f64,
    pub el_min: f64,
    pub el_max: f64,
}

impl AngleGrid {
    pub fn new(n_az: usize, n_el: usize, az: (f64, f64), el: (f64, f64)) -> Result<Self> {
        let grid = AngleGrid {
            n_az,
            n_el,
            az_min: az.0,
            az_max: az.1,
            el_min: el.0,
            el_max: el.1,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Base-station default: 8×8 beams over ±60° azimuth, 60°–120° elevation.
    pub fn bs_default() -> Self {
        AngleGrid {
            n_az: 8,
            n_el: 8,
            az_min: -60f64.to_radians(),
            az_max: 60f64.to_radians(),
            el_min: 60f64.to_radians(),
            el_max: 120f64.to_radians(),
        }
    }

    /// Terminal default: 8 azimuth beams over the ±90° unambiguous range of
    /// its linear array, broadside elevation.
    pub fn ue_default() -> Self {
        AngleGrid {
            n_az: 8,
            n_el: 1,
            az_min: -90f64.to_radians(),
            az_max: 90f64.to_radians(),
            el_min: 60f64.to_radians(),
            el_max: 120f64.to_radians(),
        }
    }

    pub fn len(&self) -> usize {
        self.n_az * self.n_el
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell-center angle of grid cell `(i_az, i_el)`.
    pub fn angle(&self, i_az: usize, i_el: usize) -> (f64, f64) {
        let az = self.az_min + (i_az as f64 + 0.5) * (self.az_max - self.az_min) / self.n_az as f64;
        let el = self.el_min + (i_el as f64 + 0.5) * (self.el_max - self.el_min) / self.n_el as f64;
        (az, el)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_az < 1 || self.n_el < 1 {
            return Err(Error::invalid("grid size", "need at least one cell per axis"));
        }
        for v in [self.az_min, self.az_max, self.el_min, self.el_max] {
            if !v.is_finite() {
                return Err(Error::invalid("grid angles", "must be finite"));
            }
        }
        if self.n_az > 1 && !(self.az_max > self.az_min) {
            return Err(Error::invalid("grid azimuth", "span must be increasing"));
        }
        if self.n_el > 1 && !(self.el_max > self.el_min) {
            return Err(Error::invalid("grid elevation", "span must be increasing"));
        }
        Ok(())
    }
}

/// Whether a codebook holds narrow (child) or wide (parent) beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookKind {
    Child,
    Parent,
}

/// An ordered set of unit-norm beams with their steering angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub kind: CodebookKind,
    /// Beam weight vectors, azimuth-major over the grid.
    pub beams: Vec<Vec<Complex64>>,
    /// Steering angle (azimuth, elevation) of each beam.
    pub angles: Vec<(f64, f64)>,
    /// Grid extent (azimuth cells, elevation cells).
    pub grid_shape: (usize, usize),
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    /// SHA-256 over kind, grid shape, angles, and weights; identifies the
    /// exact beam set an artifact was produced with.
    pub fn fingerprint(&self) -> String {
        let mut bytes = Vec::with_capacity(16 + self.len() * (16 + self.beams[0].len() * 16));
        bytes.push(match self.kind {
            CodebookKind::Child => 0u8,
            CodebookKind::Parent => 1u8,
        });
        bytes.extend_from_slice(&(self.grid_shape.0 as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.grid_shape.1 as u64).to_le_bytes());
        for ((az, el), beam) in self.angles.iter().zip(&self.beams) {
            bytes.extend_from_slice(&az.to_le_bytes());
            bytes.extend_from_slice(&el.to_le_bytes());
            for w in beam {
                bytes.extend_from_slice(&w.re.to_le_bytes());
                bytes.extend_from_slice(&w.im.to_le_bytes());
            }
        }
        sha256_hex(&bytes)
    }
}

/// Builds the narrow-beam codebook: one steering vector per grid cell.
pub fn build_child_codebook(geometry: &ArrayGeometry, grid: &AngleGrid) -> Result<Codebook> {
    geometry.validate()?;
    grid.validate()?;
    let mut beams = Vec::with_capacity(grid.len());
    let mut angles = Vec::with_capacity(grid.len());
    for i_az in 0..grid.n_az {
        for i_el in 0..grid.n_el {
            let (az, el) = grid.angle(i_az, i_el);
            beams.push(array_response(geometry, az, el));
            angles.push((az, el));
        }
    }
    Ok(Codebook {
        kind: CodebookKind::Child,
        beams,
        angles,
        grid_shape: (grid.n_az, grid.n_el),
    })
}

/// Two-level search structure: parent beams over blocks of child beams.
#[derive(Debug, Clone)]
pub struct HbsStructure {
    pub parent: Codebook,
    pub child: Codebook,
    /// Children per parent block (`s`), so `parent.len()·s == child.len()`.
    pub children_per_parent: usize,
    /// Child indices covered by each parent, block-local azimuth-major order.
    pub parent_to_children: Vec<Vec<usize>>,
    /// Parent index covering each child.
    pub child_to_parent: Vec<usize>,
    /// True when blocks are 1×1 and parents merely copy the children.
    pub degenerate: bool,
}

impl HbsStructure {
    pub fn num_parents(&self) -> usize {
        self.parent.len()
    }

    pub fn num_children(&self) -> usize {
        self.child.len()
    }
}

/// Groups the child grid into `s_az × s_el` blocks and builds one parent beam
/// per block: a centered subarray steered at the block centroid, with the
/// active element count per axis shrunk in proportion to the block size
/// (`n/s`, at least 1) so the wide beam spans all of its children.
/// 1×1 blocks degenerate to copies of the children.
pub fn build_parent_codebook(
    geometry: &ArrayGeometry,
    child: &Codebook,
    s_az: usize,
    s_el: usize,
) -> Result<HbsStructure> {
    geometry.validate()?;
    if child.is_empty() {
        return Err(Error::EmptyInput("child codebook"));
    }
    if s_az == 0 || s_el == 0 {
        return Err(Error::invalid("block size", "must be at least 1×1"));
    }
    let (n_az, n_el) = child.grid_shape;
    if n_az * n_el != child.len() {
        return Err(Error::invalid("child codebook", "grid shape disagrees with beam count"));
    }
    if n_az % s_az != 0 || n_el % s_el != 0 {
        return Err(Error::invalid(
            "block size",
            format!("{s_az}×{s_el} blocks do not tile a {n_az}×{n_el} grid"),
        ));
    }
    let (p_az, p_el) = (n_az / s_az, n_el / s_el);
    let block = s_az * s_el;
    let degenerate = block == 1;

    let mut beams = Vec::with_capacity(p_az * p_el);
    let mut angles = Vec::with_capacity(p_az * p_el);
    let mut parent_to_children = Vec::with_capacity(p_az * p_el);
    let mut child_to_parent = vec![0usize; child.len()];

    for pa in 0..p_az {
        for pe in 0..p_el {
            let parent_index = pa * p_el + pe;
            let mut children = Vec::with_capacity(block);
            let (mut az_sum, mut el_sum) = (0.0f64, 0.0f64);
            for da in 0..s_az {
                for de in 0..s_el {
                    let child_index = (pa * s_az + da) * n_el + (pe * s_el + de);
                    children.push(child_index);
                    child_to_parent[child_index] = parent_index;
                    az_sum += child.angles[child_index].0;
                    el_sum += child.angles[child_index].1;
                }
            }
            let centroid = (az_sum / block as f64, el_sum / block as f64);
            let beam = if degenerate {
                child.beams[children[0]].clone()
            } else {
                central_subarray_beam(geometry, s_az, s_el, centroid.0, centroid.1)
            };
            beams.push(beam);
            angles.push(centroid);
            parent_to_children.push(children);
        }
    }

    Ok(HbsStructure {
        parent: Codebook {
            kind: CodebookKind::Parent,
            beams,
            angles,
            grid_shape: (p_az, p_el),
        },
        child: child.clone(),
        children_per_parent: block,
        parent_to_children,
        child_to_parent,
        degenerate,
    })
}

/// Steering vector of a centered subarray with `n/s` active elements per
/// axis, zero elsewhere, unit norm. Deactivating elements widens the beam by
/// the block factor. Phases follow the full-array formula at each element's
/// global position, so parent and child beams share a phase reference.
fn central_subarray_beam(
    geometry: &ArrayGeometry,
    s_az: usize,
    s_el: usize,
    azimuth: f64,
    elevation: f64,
) -> Vec<Complex64> {
    let sub_y = (geometry.n_y / s_az).max(1);
    let sub_z = (geometry.n_z / s_el).max(1);
    let y0 = (geometry.n_y - sub_y) / 2;
    let z0 = (geometry.n_z - sub_z) / 2;
    let scale = 1.0 / ((sub_y * sub_z) as f64).sqrt();
    let y_step = std::f64::consts::TAU * geometry.spacing * azimuth.sin() * elevation.sin();
    let z_step = std::f64::consts::TAU * geometry.spacing * elevation.cos();
    let mut beam = vec![Complex64::new(0.0, 0.0); geometry.num_elements()];
    for y in y0..y0 + sub_y {
        for z in z0..z0 + sub_z {
            let phase = y_step * y as f64 + z_step * z as f64;
            beam[y * geometry.n_z + z] = Complex64::from_polar(scale, phase);
        }
    }
    beam
}

/// JSON export entry for one beam.
#[derive(Debug, Serialize, Deserialize)]
pub struct CodebookExportEntry {
    pub index: usize,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Weights as `[re, im]` pairs in element order.
    pub weights: Vec<[f64; 2]>,
}

/// Serializes a codebook as a JSON array of indexed, degree-angled beams.
pub fn codebook_to_json(codebook: &Codebook) -> Result<String> {
    let entries: Vec<CodebookExportEntry> = codebook
        .angles
        .iter()
        .zip(&codebook.beams)
        .enumerate()
        .map(|(index, (&(az, el), beam))| CodebookExportEntry {
            index,
            azimuth_deg: az.to_degrees(),
            elevation_deg: el.to_degrees(),
            weights: beam.iter().map(|w| [w.re, w.im]).collect(),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&entries)?)
}

// ── Link budget and measurements ────────────────────────────────────────────

/// Transmit power, antenna gains, and receiver noise floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub bs_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    /// Per-element noise power; `-inf` disables noise entirely.
    pub noise_power_dbm: f64,
}

impl Default for LinkBudget {
    /// 30 dBm transmit power, 8 dBi / 5 dBi antenna gains, and the noise
    /// floor of a 100 MHz, 6 dB noise-figure receiver.
    fn default() -> Self {
        LinkBudget {
            tx_power_dbm: 30.0,
            bs_gain_dbi: 8.0,
            ue_gain_dbi: 5.0,
            noise_power_dbm: -88.0,
        }
    }
}

impl LinkBudget {
    /// The same budget with noise switched off.
    pub fn noiseless(mut self) -> Self {
        self.noise_power_dbm = f64::NEG_INFINITY;
        self
    }

    /// Transmit power with both antenna gains folded in, dBm.
    pub fn effective_tx_power_dbm(&self) -> f64 {
        self.tx_power_dbm + self.bs_gain_dbi + self.ue_gain_dbi
    }

    pub fn effective_tx_power_mw(&self) -> f64 {
        dbm_to_mw(self.effective_tx_power_dbm())
    }

    /// Per-element noise power in linear milliwatts (0 when noiseless).
    pub fn noise_power_mw(&self) -> f64 {
        if self.noise_power_dbm == f64::NEG_INFINITY {
            0.0
        } else {
            dbm_to_mw(self.noise_power_dbm)
        }
    }
}

/// `wᴴη` for a fresh per-element noise vector of power `noise_mw` each.
fn combined_noise(rng: &mut ChaCha8Rng, w: &[Complex64], noise_mw: f64) -> Complex64 {
    if noise_mw == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let scale = (noise_mw / 2.0).sqrt();
    let mut sum = Complex64::new(0.0, 0.0);
    for wi in w {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        sum += wi.conj() * Complex64::new(re * scale, im * scale);
    }
    sum
}

/// One noisy measurement of pilot `x` through precoder `f` and combiner `w`.
pub fn received_signal(
    channel: &ChannelInstance,
    f: &[Complex64],
    w: &[Complex64],
    budget: &LinkBudget,
    x: Complex64,
    seed: u64,
) -> Result<Complex64> {
    if f.len() != channel.matrix.cols() {
        return Err(Error::DimensionMismatch {
            what: "precoder",
            expected: channel.matrix.cols(),
            actual: f.len(),
        });
    }
    if w.len() != channel.matrix.rows() {
        return Err(Error::DimensionMismatch {
            what: "combiner",
            expected: channel.matrix.rows(),
            actual: w.len(),
        });
    }
    let amp = budget.effective_tx_power_mw().sqrt();
    let mut rng = rng_from_seed(seed);
    let signal = channel.matrix.quadratic_form(w, f) * x * amp;
    Ok(signal + combined_noise(&mut rng, w, budget.noise_power_mw()))
}

/// Receive side of a sweep: a full codebook or one fixed combiner.
#[derive(Debug, Clone, Copy)]
pub enum RxMode<'a> {
    Codebook(&'a Codebook),
    Fixed(&'a [Complex64]),
}

/// RSRP measurements over transmit beams (rows) × receive beams (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct RsrpReport {
    values_dbm: Vec<f64>,
    measured: Vec<bool>,
    tx_count: usize,
    rx_count: usize,
}

impl RsrpReport {
    pub fn new_unmeasured(tx_count: usize, rx_count: usize) -> Self {
        RsrpReport {
            values_dbm: vec![f64::NEG_INFINITY; tx_count * rx_count],
            measured: vec![false; tx_count * rx_count],
            tx_count,
            rx_count,
        }
    }

    pub fn tx_count(&self) -> usize {
        self.tx_count
    }

    pub fn rx_count(&self) -> usize {
        self.rx_count
    }

    pub fn set(&mut self, tx: usize, rx: usize, value_dbm: f64) {
        let i = tx * self.rx_count + rx;
        self.values_dbm[i] = value_dbm;
        self.measured[i] = true;
    }

    /// Measured value at `(tx, rx)`, or `None` if that pair was skipped.
    pub fn get(&self, tx: usize, rx: usize) -> Option<f64> {
        let i = tx * self.rx_count + rx;
        self.measured[i].then(|| self.values_dbm[i])
    }

    pub fn is_measured(&self, tx: usize, rx: usize) -> bool {
        self.measured[tx * self.rx_count + rx]
    }

    pub fn num_measured(&self) -> usize {
        self.measured.iter().filter(|&&m| m).count()
    }
}

/// Measures RSRP for every transmit beam against every receive beam (or the
/// one fixed combiner).
///
/// Measurement `(m, n)` uses seed `derive_seed(seed, &[m, n])` and averages
/// `averages ≥ 1` independent noisy pilots in the linear power domain before
/// converting to dBm; the pilot symbol is 1.
pub fn sweep_rsrp(
    channel: &ChannelInstance,
    tx: &Codebook,
    rx: RxMode<'_>,
    budget: &LinkBudget,
    averages: usize,
    seed: u64,
) -> Result<RsrpReport> {
    if tx.is_empty() {
        return Err(Error::EmptyInput("transmit codebook"));
    }
    if averages == 0 {
        return Err(Error::invalid("averages", "must be at least 1"));
    }
    let rx_beams: Vec<&[Complex64]> = match rx {
        RxMode::Codebook(cb) => {
            if cb.is_empty() {
                return Err(Error::EmptyInput("receive codebook"));
            }
            cb.beams.iter().map(|b| b.as_slice()).collect()
        }
        RxMode::Fixed(w) => vec![w],
    };
    for beam in &tx.beams {
        if beam.len() != channel.matrix.cols() {
            return Err(Error::DimensionMismatch {
                what: "transmit beam",
                expected: channel.matrix.cols(),
                actual: beam.len(),
            });
        }
    }
    for w in &rx_beams {
        if w.len() != channel.matrix.rows() {
            return Err(Error::DimensionMismatch {
                what: "receive beam",
                expected: channel.matrix.rows(),
                actual: w.len(),
            });
        }
    }

    let amp = budget.effective_tx_power_mw().sqrt();
    let noise_mw = budget.noise_power_mw();
    let mut report = RsrpReport::new_unmeasured(tx.len(), rx_beams.len());
    for (n, w) in rx_beams.iter().enumerate() {
        let row = channel.matrix.left_apply(w);
        for (m, f) in tx.beams.iter().enumerate() {
            let signal: Complex64 = row.iter().zip(f).map(|(r, &fv)| r * fv).sum::<Complex64>() * amp;
            let mut rng = rng_from_seed(derive_seed(seed, &[m as u64, n as u64]));
            let mut power_sum = 0.0;
            for _ in 0..averages {
                let y = signal + combined_noise(&mut rng, w, noise_mw);
                power_sum += y.norm_sqr();
            }
            report.set(m, n, mw_to_dbm(power_sum / averages as f64));
        }
    }
    Ok(report)
}
