//! Mapping raw fog-node resource descriptors onto the model's normalized
//! effort dimensions.
//!
//! The two mappings here are deliberately simple illustrations: a Shannon
//! capacity model for the radio link and a linear cycles-per-bit model for
//! compute. Both are expressed as inverse latency (1/s) per task, so more
//! effort means lower latency. Calibrating a cost matrix or noise covariance
//! from profiles is left to the caller.

use crate::error::{Error, Result};
use crate::market::EffortVector;

/// Raw descriptors of a fog node and its task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceProfile {
    pub bandwidth_hz: f64,
    pub cpu_cycles_per_s: f64,
    pub distance_m: f64,
    pub data_bits: f64,
    pub tx_power_w: f64,
    pub noise_density_w_per_hz: f64,
    pub cycles_per_bit: f64,
    pub pathloss_exponent: f64,
}

impl ResourceProfile {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, f64, bool); 8] = [
            ("bandwidth_hz", self.bandwidth_hz, self.bandwidth_hz > 0.0),
            (
                "cpu_cycles_per_s",
                self.cpu_cycles_per_s,
                self.cpu_cycles_per_s > 0.0,
            ),
            ("distance_m", self.distance_m, self.distance_m >= 0.0),
            ("data_bits", self.data_bits, self.data_bits > 0.0),
            ("tx_power_w", self.tx_power_w, self.tx_power_w > 0.0),
            (
                "noise_density_w_per_hz",
                self.noise_density_w_per_hz,
                self.noise_density_w_per_hz > 0.0,
            ),
            (
                "cycles_per_bit",
                self.cycles_per_bit,
                self.cycles_per_bit > 0.0,
            ),
            (
                "pathloss_exponent",
                self.pathloss_exponent,
                self.pathloss_exponent >= 2.0,
            ),
        ];
        for (name, value, ok) in checks {
            if !value.is_finite() || !ok {
                return Err(Error::InvalidProfile(format!("{name} = {value} out of range")));
            }
        }
        Ok(())
    }

    /// Two-dimensional effort (transmission, processing), both in 1/s.
    ///
    /// Transmission effort is the Shannon rate over the task size:
    /// B·log₂(1 + P·d^(−α) / (N₀·B)) / data_bits, with the distance clamped
    /// to at least one meter. Processing effort is
    /// cpu_cycles_per_s / (cycles_per_bit · data_bits).
    pub fn to_effort(&self) -> Result<EffortVector> {
        self.validate()?;
        let distance = self.distance_m.max(1.0);
        let snr = self.tx_power_w * distance.powf(-self.pathloss_exponent)
            / (self.noise_density_w_per_hz * self.bandwidth_hz);
        let rate_bits_per_s = self.bandwidth_hz * (1.0 + snr).log2();
        let transmission = rate_bits_per_s / self.data_bits;
        let processing = self.cpu_cycles_per_s / (self.cycles_per_bit * self.data_bits);
        Ok(EffortVector(vec![transmission, processing]))
    }
}

/// Free-function form of [`ResourceProfile::to_effort`].
pub fn profile_to_effort(profile: &ResourceProfile) -> Result<EffortVector> {
    profile.to_effort()
}
