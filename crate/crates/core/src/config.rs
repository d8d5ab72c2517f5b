//! Simulation parameter bundle shared by dataset generation and evaluation.
//!
//! [`SimParams::default`] carries the reference configuration: a 28 GHz
//! downlink, an 8×8 transmit array with a 64-beam codebook grouped into
//! 16 parents (2×2 blocks), an 8-element receive line array with an 8-beam
//! codebook grouped into 2 parents (4×1 blocks), 30 dBm transmit power with
//! 8 + 5 dBi antenna gains, −88 dBm noise floor (100 MHz, 6 dB noise figure),
//! and user positions drawn area-uniformly between 10 m and 200 m inside a
//! ±60° sector, with terminal heights between 1.5 m and 22.5 m against a
//! 10 m station so line-of-sight elevations spread across the codebook grid.

use serde::{Deserialize, Serialize};

use crate::beamforming::{
    build_child_codebook, build_parent_codebook, AngleGrid, HbsStructure, LinkBudget,
};
use crate::channel::{ArrayGeometry, Sector};
use crate::error::{Error, Result};
use crate::hashing::sha256_hex;

/// Geometry, codebook, link-budget, and cell parameters for one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Transmit array.
    pub bs: ArrayGeometry,
    /// Receive array.
    pub ue: ArrayGeometry,
    /// Transmit codebook grid.
    pub tx_grid: AngleGrid,
    /// Receive codebook grid.
    pub rx_grid: AngleGrid,
    /// Transmit parent block size along the azimuth grid axis.
    pub s_t_az: usize,
    /// Transmit parent block size along the elevation grid axis.
    pub s_t_el: usize,
    /// Receive parent block size along the azimuth grid axis.
    pub s_r_az: usize,
    /// Receive parent block size along the elevation grid axis.
    pub s_r_el: usize,
    /// Carrier frequency, Hz.
    pub carrier_hz: f64,
    /// Transmit power, antenna gains, and noise floor.
    pub budget: LinkBudget,
    /// Measurements averaged per RSRP value.
    pub noise_averages: usize,
    /// Served angular region.
    pub sector: Sector,
    /// Smallest user distance, m.
    pub min_distance_m: f64,
    /// Cell radius, m.
    pub cell_radius_m: f64,
    /// Base-station antenna height, m.
    pub bs_height_m: f64,
    /// Smallest user height, m.
    pub ue_height_min_m: f64,
    /// Largest user height, m.
    pub ue_height_max_m: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            bs: ArrayGeometry::new(8, 8).expect("static geometry"),
            ue: ArrayGeometry::new(8, 1).expect("static geometry"),
            tx_grid: AngleGrid::bs_default(),
            rx_grid: AngleGrid::ue_default(),
            s_t_az: 2,
            s_t_el: 2,
            s_r_az: 4,
            s_r_el: 1,
            carrier_hz: 28e9,
            budget: LinkBudget::default(),
            noise_averages: 4,
            sector: Sector::default(),
            min_distance_m: 10.0,
            cell_radius_m: 200.0,
            bs_height_m: 10.0,
            ue_height_min_m: 1.5,
            ue_height_max_m: 1.5,
        }
    }
}

impl SimParams {
    /// Checks every field combination needed before generation.
    pub fn validate(&self) -> Result<()> {
        self.bs.validate()?;
        self.ue.validate()?;
        self.tx_grid.validate()?;
        self.rx_grid.validate()?;
        if self.carrier_hz <= 0.0 || !self.carrier_hz.is_finite() {
            return Err(Error::invalid("carrier_hz", "must be positive and finite"));
        }
        if self.noise_averages == 0 {
            return Err(Error::invalid("noise_averages", "must be at least 1"));
        }
        if !(self.min_distance_m > 0.0) || !(self.cell_radius_m > self.min_distance_m) {
            return Err(Error::invalid(
                "cell_radius_m",
                "need 0 < min_distance_m < cell_radius_m",
            ));
        }
        if !(self.bs_height_m > 0.0)
            || !(self.ue_height_min_m >= 0.0)
            || !(self.ue_height_max_m >= self.ue_height_min_m)
        {
            return Err(Error::invalid(
                "heights",
                "need bs_height_m > 0 and 0 ≤ ue_height_min_m ≤ ue_height_max_m",
            ));
        }
        if self.tx_grid.n_az % self.s_t_az != 0
            || self.tx_grid.n_el % self.s_t_el != 0
            || self.rx_grid.n_az % self.s_r_az != 0
            || self.rx_grid.n_el % self.s_r_el != 0
        {
            return Err(Error::invalid("block size", "must tile the codebook grid"));
        }
        Ok(())
    }

    /// Number of transmit child beams (`F`).
    pub fn num_tx_beams(&self) -> usize {
        self.tx_grid.len()
    }

    /// Number of transmit parent beams (`F_p`).
    pub fn num_tx_parents(&self) -> usize {
        self.tx_grid.len() / (self.s_t_az * self.s_t_el)
    }

    /// Number of receive child beams (`W`).
    pub fn num_rx_beams(&self) -> usize {
        self.rx_grid.len()
    }

    /// Number of receive parent beams (`W_p`).
    pub fn num_rx_parents(&self) -> usize {
        self.rx_grid.len() / (self.s_r_az * self.s_r_el)
    }

    /// Child beams per transmit parent (`s_T`).
    pub fn tx_block(&self) -> usize {
        self.s_t_az * self.s_t_el
    }

    /// Child beams per receive parent (`s_R`).
    pub fn rx_block(&self) -> usize {
        self.s_r_az * self.s_r_el
    }

    /// Builds the two-level transmit codebook.
    pub fn tx_structure(&self) -> Result<HbsStructure> {
        let child = build_child_codebook(&self.bs, &self.tx_grid)?;
        build_parent_codebook(&self.bs, &child, self.s_t_az, self.s_t_el)
    }

    /// Builds the two-level receive codebook.
    pub fn rx_structure(&self) -> Result<HbsStructure> {
        let child = build_child_codebook(&self.ue, &self.rx_grid)?;
        build_parent_codebook(&self.ue, &child, self.s_r_az, self.s_r_el)
    }

    /// Hash binding datasets and models to the codebooks they were built for:
    /// SHA-256 over the four per-codebook fingerprints.
    pub fn codebook_fingerprint(&self) -> Result<String> {
        let tx = self.tx_structure()?;
        let rx = self.rx_structure()?;
        let mut combined = String::new();
        for fp in [
            tx.child.fingerprint(),
            tx.parent.fingerprint(),
            rx.child.fingerprint(),
            rx.parent.fingerprint(),
        ] {
            combined.push_str(&fp);
        }
        Ok(sha256_hex(combined.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 1. The defaults expose the reference beam counts: 64 children /
    //    16 parents on transmit, 8 children / 2 parents on receive.
    #[test]
    fn default_dimensions() {
        let params = SimParams::default();
        params.validate().unwrap();
        assert_eq!(params.num_tx_beams(), 64);
        assert_eq!(params.num_tx_parents(), 16);
        assert_eq!(params.num_rx_beams(), 8);
        assert_eq!(params.num_rx_parents(), 2);
        assert_eq!(params.tx_block(), 4);
        assert_eq!(params.rx_block(), 4);
    }

    // 2. Structures built from the defaults agree with the counters.
    #[test]
    fn structures_match_counters() {
        let params = SimParams::default();
        let tx = params.tx_structure().unwrap();
        let rx = params.rx_structure().unwrap();
        assert_eq!(tx.num_parents(), params.num_tx_parents());
        assert_eq!(tx.num_children(), params.num_tx_beams());
        assert_eq!(rx.num_parents(), params.num_rx_parents());
        assert_eq!(rx.num_children(), params.num_rx_beams());
    }

    // 3. The fingerprint is stable for equal configs and moves when any
    //    codebook input moves.
    #[test]
    fn fingerprint_tracks_codebooks() {
        let params = SimParams::default();
        let a = params.codebook_fingerprint().unwrap();
        let b = SimParams::default().codebook_fingerprint().unwrap();
        assert_eq!(a, b, "equal configs must fingerprint equally");

        let mut shifted = SimParams::default();
        shifted.s_t_az = 4;
        shifted.s_t_el = 1;
        assert_ne!(a, shifted.codebook_fingerprint().unwrap());

        let mut regridded = SimParams::default();
        regridded.tx_grid = AngleGrid::new(8, 8, (-1.0, 1.0), (1.1, 2.0)).unwrap();
        assert_ne!(a, regridded.codebook_fingerprint().unwrap());
    }

    // 4. Validation rejects inconsistent combinations.
    #[test]
    fn validation_rejects_bad_params() {
        let mut p = SimParams::default();
        p.s_t_az = 3;
        assert!(p.validate().is_err(), "3 must not tile an 8-wide grid");

        let mut p = SimParams::default();
        p.noise_averages = 0;
        assert!(p.validate().is_err());

        let mut p = SimParams::default();
        p.min_distance_m = 300.0;
        assert!(p.validate().is_err(), "min distance beyond cell radius");

        let mut p = SimParams::default();
        p.carrier_hz = 0.0;
        assert!(p.validate().is_err());
    }

    // 5. The parameter bundle round-trips through JSON.
    #[test]
    fn serializes_round_trip() {
        let params = SimParams::default();
        let json = serde_json::to_string(&params).unwrap();
        let back: SimParams = serde_json::from_str(&json).unwrap();
        assert_eq!(
            params.codebook_fingerprint().unwrap(),
            back.codebook_fingerprint().unwrap()
        );
        assert_eq!(back.cell_radius_m, 200.0);
    }
}
