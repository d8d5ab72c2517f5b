//! Clustered spatial channel with a Ricean line-of-sight component.
//!
//! A drop places one user terminal at a given distance and azimuth inside the
//! base-station sector and produces the narrowband channel matrix
//!
//! ```text
//! H = sqrt(Λ) · Σ_paths g_p · a_R(AoA_p) · a_T(AoD_p)ᴴ
//! ```
//!
//! where `Λ` is the linear pathloss gain and `g_p` already carries the Ricean
//! split: the line-of-sight path has `|g| = sqrt(K/(K+1))` with a uniformly
//! random phase, and each of the `C·L` cluster rays has `g ~ CN(0, 1/(L(K+1)))`.
//! Cluster centers are drawn uniformly (departure inside the sector, arrival
//! over the terminal's full azimuth range); every ray then adds a Laplacian
//! offset with the profile's ray spread, on top of a per-cluster Laplacian
//! wobble with the cluster spread that is shared by the cluster's rays.
//!
//! All angles are radians unless a name ends in `_deg`. Azimuth is measured
//! from the array's boresight, elevation from the positive z axis, so
//! broadside is `elevation = π/2`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;

// ── Array geometry and response ────────────────────────────────────────────

/// Uniform planar (or, with `n_z = 1`, linear) array on the y–z plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Elements along y.
    pub n_y: usize,
    /// Elements along z.
    pub n_z: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl ArrayGeometry {
    /// Array with half-wavelength spacing.
    pub fn new(n_y: usize, n_z: usize) -> Result<Self> {
        Self::with_spacing(n_y, n_z, 0.5)
    }

    /// Array with explicit element spacing in wavelengths.
    pub fn with_spacing(n_y: usize, n_z: usize, spacing: f64) -> Result<Self> {
        let geometry = ArrayGeometry { n_y, n_z, spacing };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn num_elements(&self) -> usize {
        self.n_y * self.n_z
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_y < 1 || self.n_z < 1 {
            return Err(Error::invalid("array size", "need at least one element per axis"));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::invalid("spacing", "must be positive and finite"));
        }
        Ok(())
    }
}

/// Unit-norm steering vector of the array toward `(azimuth, elevation)`.
///
/// Element `(y, z)` carries phase `2π·spacing·(y·sin(az)·sin(el) + z·cos(el))`
/// and magnitude `1/sqrt(N)`. Ordering is y-major: index `y·n_z + z`.
pub fn array_response(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> Vec<Complex64> {
    let n = geometry.num_elements();
    let scale = 1.0 / (n as f64).sqrt();
    let y_step = TAU * geometry.spacing * azimuth.sin() * elevation.sin();
    let z_step = TAU * geometry.spacing * elevation.cos();
    let mut response = Vec::with_capacity(n);
    for y in 0..geometry.n_y {
        for z in 0..geometry.n_z {
            let phase = y_step * y as f64 + z_step * z as f64;
            response.push(Complex64::from_polar(scale, phase));
        }
    }
    response
}

// ── Link-level scalars ──────────────────────────────────────────────────────

/// Free-space pathloss in dB for a distance in meters and carrier in Hz.
pub fn pathloss_db(distance_m: f64, carrier_hz: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::invalid("distance_m", "must be positive"));
    }
    if !(carrier_hz > 0.0) {
        return Err(Error::invalid("carrier_hz", "must be positive"));
    }
    Ok(20.0 * distance_m.log10() + 20.0 * carrier_hz.log10() - 147.56)
}

/// Thermal noise power in dBm over a bandwidth in Hz with a noise figure in dB.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::invalid("bandwidth_hz", "must be positive"));
    }
    Ok(-174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

// ── Profiles and drop configuration ─────────────────────────────────────────

/// Tag identifying which channel profile generated a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileName {
    D,
    E,
}

impl std::fmt::Display for ProfileName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProfileName::D => write!(f, "d"),
            ProfileName::E => write!(f, "e"),
        }
    }
}

impl std::str::FromStr for ProfileName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d" => Ok(ProfileName::D),
            "e" => Ok(ProfileName::E),
            other => Err(Error::invalid("profile", format!("unknown tag {other:?}"))),
        }
    }
}

/// Statistical description of one propagation environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub name: ProfileName,
    /// Ricean factor: LOS power over total cluster power, in dB.
    pub ricean_k_db: f64,
    pub num_clusters: usize,
    pub rays_per_cluster: usize,
    /// Laplacian scale of the per-cluster angular wobble, degrees.
    pub cluster_angle_spread_deg: f64,
    /// Laplacian scale of the per-ray angular offsets, degrees.
    pub ray_angle_spread_deg: f64,
}

impl ChannelProfile {
    /// Strongly line-of-sight profile with a handful of weak clusters.
    pub fn preset_d() -> Self {
        ChannelProfile {
            name: ProfileName::D,
            ricean_k_db: 13.3,
            num_clusters: 3,
            rays_per_cluster: 20,
            cluster_angle_spread_deg: 5.0,
            ray_angle_spread_deg: 2.0,
        }
    }

    /// Even more LOS-dominant profile with one extra cluster.
    pub fn preset_e() -> Self {
        ChannelProfile {
            name: ProfileName::E,
            ricean_k_db: 22.0,
            num_clusters: 4,
            rays_per_cluster: 20,
            cluster_angle_spread_deg: 5.0,
            ray_angle_spread_deg: 2.0,
        }
    }

    /// Diagnostic profile with no cluster rays at all.
    pub fn pure_los() -> Self {
        ChannelProfile {
            name: ProfileName::D,
            ricean_k_db: 300.0,
            num_clusters: 0,
            rays_per_cluster: 0,
            cluster_angle_spread_deg: 0.0,
            ray_angle_spread_deg: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.ricean_k_db.is_finite() {
            return Err(Error::invalid("ricean_k_db", "must be finite"));
        }
        if self.num_clusters > 0 && self.rays_per_cluster == 0 {
            return Err(Error::invalid("rays_per_cluster", "must be at least 1 when clusters exist"));
        }
        for (name, v) in [
            ("cluster_angle_spread_deg", self.cluster_angle_spread_deg),
            ("ray_angle_spread_deg", self.ray_angle_spread_deg),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid("angle spread", format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Angular region the base station serves and draws cluster departures from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    /// Half-width of the azimuth sector.
    pub az_half: f64,
    pub el_min: f64,
    pub el_max: f64,
}

impl Default for Sector {
    fn default() -> Self {
        Sector {
            az_half: 60f64.to_radians(),
            el_min: 60f64.to_radians(),
            el_max: 120f64.to_radians(),
        }
    }
}

impl Sector {
    pub fn validate(&self) -> Result<()> {
        if !(self.az_half > 0.0 && self.az_half <= PI) {
            return Err(Error::invalid("sector azimuth", "half-width must be in (0, π]"));
        }
        if !(0.0 <= self.el_min && self.el_min < self.el_max && self.el_max <= PI) {
            return Err(Error::invalid("sector elevation", "need 0 ≤ el_min < el_max ≤ π"));
        }
        Ok(())
    }
}

/// Everything needed to realize one channel drop.
#[derive(Debug, Clone)]
pub struct DropConfig {
    pub profile: ChannelProfile,
    pub ue_distance_m: f64,
    /// Terminal azimuth as seen from the base station; must lie in the sector.
    pub ue_azimuth: f64,
    /// Line-of-sight departure elevation; π/2 puts the terminal broadside.
    pub ue_elevation: f64,
    pub carrier_hz: f64,
    pub bs: ArrayGeometry,
    pub ue: ArrayGeometry,
    pub sector: Sector,
    pub seed: u64,
}

impl DropConfig {
    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        self.bs.validate()?;
        self.ue.validate()?;
        self.sector.validate()?;
        if !(self.ue_distance_m > 0.0) || !self.ue_distance_m.is_finite() {
            return Err(Error::invalid("ue_distance_m", "must be positive and finite"));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::invalid("carrier_hz", "must be positive"));
        }
        if self.ue_azimuth.abs() > self.sector.az_half {
            return Err(Error::invalid("ue_azimuth", "line of sight must lie inside the sector"));
        }
        if !(self.sector.el_min..=self.sector.el_max).contains(&self.ue_elevation) {
            return Err(Error::invalid(
                "ue_elevation",
                "line of sight must lie inside the served elevation range",
            ));
        }
        Ok(())
    }
}

// ── Channel realization ─────────────────────────────────────────────────────

/// One resolved propagation path. `gain` carries the Ricean weighting but not
/// the pathloss, so the channel matrix is `sqrt(Λ)·Σ gain·a_R·a_Tᴴ`.
#[derive(Debug, Clone)]
pub struct PathComponent {
    pub gain: Complex64,
    pub aod_az: f64,
    pub aod_el: f64,
    pub aoa_az: f64,
    pub aoa_el: f64,
    pub is_los: bool,
}

/// Dense row-major complex matrix, sized rx × tx for channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// `self += scale · left · rightᴴ`.
    pub fn add_scaled_outer(&mut self, scale: Complex64, left: &[Complex64], right: &[Complex64]) {
        assert_eq!(left.len(), self.rows, "outer-product row length");
        assert_eq!(right.len(), self.cols, "outer-product column length");
        for (r, &l) in left.iter().enumerate() {
            let row_scale = scale * l;
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (entry, &rv) in row.iter_mut().zip(right) {
                *entry += row_scale * rv.conj();
            }
        }
    }

    /// `wᴴ · self`, as a length-`cols` vector.
    pub fn left_apply(&self, w: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(w.len(), self.rows, "combiner length");
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, &wr) in w.iter().enumerate() {
            let wc = wr.conj();
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (acc, &entry) in out.iter_mut().zip(row) {
                *acc += wc * entry;
            }
        }
        out
    }

    /// `wᴴ · self · f`.
    pub fn quadratic_form(&self, w: &[Complex64], f: &[Complex64]) -> Complex64 {
        assert_eq!(f.len(), self.cols, "precoder length");
        self.left_apply(w)
            .iter()
            .zip(f)
            .map(|(row_entry, &fv)| row_entry * fv)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A realized channel drop.
#[derive(Debug, Clone)]
pub struct ChannelInstance {
    /// rx × tx channel matrix including pathloss.
    pub matrix: ComplexMatrix,
    /// The paths that built `matrix`, LOS first.
    pub paths: Vec<PathComponent>,
    pub pathloss_db: f64,
}

impl ChannelInstance {
    /// Rebuilds the matrix contribution of the paths selected by `keep`,
    /// including the pathloss factor. With `|_| true` this reproduces
    /// [`ChannelInstance::matrix`] up to floating-point association order.
    pub fn rebuild<F>(&self, bs: &ArrayGeometry, ue: &ArrayGeometry, keep: F) -> ComplexMatrix
    where
        F: Fn(&PathComponent) -> bool,
    {
        let amp = 10f64.powf(-self.pathloss_db / 20.0);
        let mut matrix = ComplexMatrix::zeros(ue.num_elements(), bs.num_elements());
        for path in self.paths.iter().filter(|p| keep(p)) {
            let a_r = array_response(ue, path.aoa_az, path.aoa_el);
            let a_t = array_response(bs, path.aod_az, path.aod_el);
            matrix.add_scaled_outer(path.gain * amp, &a_r, &a_t);
        }
        matrix
    }
}

fn wrap_azimuth(angle: f64) -> f64 {
    let x = angle.rem_euclid(TAU);
    if x > PI {
        x - TAU
    } else {
        x
    }
}

fn sample_laplace(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let u: f64 = rng.gen::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

fn sample_unit_cn(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Realizes one channel drop from its configuration.
///
/// The draw order behind `config.seed` is fixed: LOS phase, terminal
/// orientation, then per cluster the departure/arrival centers, the four
/// cluster-wobble offsets, and per ray four Laplacian angle offsets followed
/// by the complex ray gain. Reordering any of these would silently change
/// every dataset, so extensions must append draws at the end.
pub fn generate_drop(config: &DropConfig) -> Result<ChannelInstance> {
    config.validate()?;
    let profile = &config.profile;
    let k_lin = 10f64.powf(profile.ricean_k_db / 10.0);
    let pathloss = pathloss_db(config.ue_distance_m, config.carrier_hz)?;
    let mut rng = rng_from_seed(config.seed);

    let mut paths = Vec::with_capacity(1 + profile.num_clusters * profile.rays_per_cluster);

    let los_phase = rng.gen::<f64>() * TAU;
    let los_aoa_az = rng.gen::<f64>() * TAU - PI;
    paths.push(PathComponent {
        gain: Complex64::from_polar((k_lin / (k_lin + 1.0)).sqrt(), los_phase),
        aod_az: config.ue_azimuth,
        aod_el: config.ue_elevation,
        aoa_az: los_aoa_az,
        // The terminal looks back up by the amount the station looks down.
        aoa_el: PI - config.ue_elevation,
        is_los: true,
    });

    if profile.num_clusters > 0 {
        let ray_amp = (1.0 / (profile.rays_per_cluster as f64 * (k_lin + 1.0))).sqrt();
        let cluster_spread = profile.cluster_angle_spread_deg.to_radians();
        let ray_spread = profile.ray_angle_spread_deg.to_radians();
        for _ in 0..profile.num_clusters {
            let center_aod_az = rng.gen_range(-config.sector.az_half..config.sector.az_half);
            let center_aod_el = rng.gen_range(config.sector.el_min..config.sector.el_max);
            let center_aoa_az = rng.gen::<f64>() * TAU - PI;
            let center_aoa_el = rng.gen_range(config.sector.el_min..config.sector.el_max);
            let wobble = [
                sample_laplace(&mut rng, cluster_spread),
                sample_laplace(&mut rng, cluster_spread),
                sample_laplace(&mut rng, cluster_spread),
                sample_laplace(&mut rng, cluster_spread),
            ];
            for _ in 0..profile.rays_per_cluster {
                let aod_az = wrap_azimuth(center_aod_az + wobble[0] + sample_laplace(&mut rng, ray_spread));
                let aod_el = (center_aod_el + wobble[1] + sample_laplace(&mut rng, ray_spread)).clamp(0.0, PI);
                let aoa_az = wrap_azimuth(center_aoa_az + wobble[2] + sample_laplace(&mut rng, ray_spread));
                let aoa_el = (center_aoa_el + wobble[3] + sample_laplace(&mut rng, ray_spread)).clamp(0.0, PI);
                let gain = sample_unit_cn(&mut rng) * ray_amp;
                paths.push(PathComponent {
                    gain,
                    aod_az,
                    aod_el,
                    aoa_az,
                    aoa_el,
                    is_los: false,
                });
            }
        }
    }

    let amp = 10f64.powf(-pathloss / 20.0);
    let mut matrix = ComplexMatrix::zeros(config.ue.num_elements(), config.bs.num_elements());
    for path in &paths {
        let a_r = array_response(&config.ue, path.aoa_az, path.aoa_el);
        let a_t = array_response(&config.bs, path.aod_az, path.aod_el);
        matrix.add_scaled_outer(path.gain * amp, &a_r, &a_t);
    }

    Ok(ChannelInstance {
        matrix,
        paths,
        pathloss_db: pathloss,
    })
}
