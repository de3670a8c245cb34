//! Fluid-antenna array geometry, fluid-metal switching time and the
//! channel-use budget of one coherence block.

use crate::error::{config, domain, Error, Result};

/// Layout of the fluid antennas carried by one user.
///
/// The reference ports of all antennas coincide with the array centre, so
/// the distance from any port to a base station depends only on the port
/// index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaArrayConfig {
    /// Number of fluid antennas `M`.
    pub num_fas: usize,
    /// Ports per antenna `N`.
    pub ports_per_fa: usize,
    /// Ports skipped between two estimated ports.
    pub skipped_ports: usize,
    /// Antenna length in wavelengths.
    pub kappa: f64,
    /// Carrier wavelength in metres.
    pub wavelength: f64,
}

impl FaArrayConfig {
    pub fn new(num_fas: usize, ports_per_fa: usize, skipped_ports: usize, kappa: f64, wavelength: f64) -> Result<Self> {
        let cfg = Self {
            num_fas,
            ports_per_fa,
            skipped_ports,
            kappa,
            wavelength,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_fas == 0 {
            return Err(config("num_fas must be at least 1"));
        }
        if self.ports_per_fa < 2 {
            return Err(config("ports_per_fa must be at least 2"));
        }
        if self.skipped_ports > self.ports_per_fa - 1 {
            return Err(config(format!(
                "skipped_ports must not exceed ports_per_fa - 1 ({} > {})",
                self.skipped_ports,
                self.ports_per_fa - 1
            )));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(config("kappa must be positive"));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(config("wavelength must be positive"));
        }
        Ok(())
    }

    /// Physical length of each antenna, `kappa * wavelength`.
    pub fn length(&self) -> f64 {
        self.kappa * self.wavelength
    }

    /// Number of estimated ports per antenna, `ceil(N / (skip + 1))`.
    pub fn selected_count(&self) -> usize {
        self.ports_per_fa.div_ceil(self.skipped_ports + 1)
    }

    /// One-based indices of the estimated ports: 1, 2 + skip, 3 + 2 skip, ...
    pub fn selected_ports(&self) -> Vec<usize> {
        (1..=self.ports_per_fa).step_by(self.skipped_ports + 1).collect()
    }

    fn check_port(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.ports_per_fa {
            return Err(domain(format!(
                "port index {i} outside 1..={}",
                self.ports_per_fa
            )));
        }
        Ok(())
    }
}

/// Fluid-metal actuation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    /// Initial charge on the fluid surface (V).
    pub charge: f64,
    /// Dynamic viscosity (Pa s).
    pub viscosity: f64,
    /// Channel thickness over length, `D / L`.
    pub thickness_ratio: f64,
    /// Applied voltage difference (V).
    pub voltage: f64,
}

impl FluidParams {
    pub fn new(charge: f64, viscosity: f64, thickness_ratio: f64, voltage: f64) -> Result<Self> {
        let p = Self {
            charge,
            viscosity,
            thickness_ratio,
            voltage,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("charge", self.charge),
            ("viscosity", self.viscosity),
            ("thickness_ratio", self.thickness_ratio),
            ("voltage", self.voltage),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Coherence-block inputs before any derived accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameInputs {
    /// Coherence bandwidth `W_c` (Hz).
    pub coherence_bandwidth: f64,
    /// Coherence time `T_c` (s).
    pub coherence_time: f64,
    /// Fraction of the block reserved for estimation, `L_e / L_c`.
    pub estimation_fraction: f64,
}

impl FrameInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.coherence_bandwidth > 0.0 && self.coherence_bandwidth.is_finite()) {
            return Err(config("coherence_bandwidth must be positive"));
        }
        if !(self.coherence_time > 0.0 && self.coherence_time.is_finite()) {
            return Err(config("coherence_time must be positive"));
        }
        if !(self.estimation_fraction > 0.0 && self.estimation_fraction < 1.0) {
            return Err(config(format!(
                "estimation_fraction must lie in (0, 1), got {}",
                self.estimation_fraction
            )));
        }
        Ok(())
    }

    /// Channel uses per coherence block, `round(W_c T_c)`.
    pub fn total_uses(&self) -> u64 {
        (self.coherence_bandwidth * self.coherence_time).round() as u64
    }

    /// Channel uses reserved for estimation, `round(fraction * L_c)`.
    pub fn estimation_uses(&self) -> u64 {
        (self.estimation_fraction * self.total_uses() as f64).round() as u64
    }
}

/// Channel-use accounting for one coherence block under skip-enabled
/// estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBudget {
    pub coherence_bandwidth: f64,
    pub coherence_time: f64,
    /// `L_c`.
    pub total_uses: u64,
    /// `L_e`, switching included.
    pub estimation_uses: u64,
    /// `L_t = L_c - L_e`.
    pub data_uses: u64,
    /// Channel uses spent moving the fluid between estimated ports.
    pub switching_uses: f64,
    /// Pilot length per estimated port, `(L_e - l_s) / (N' M)`.
    pub pilot_length: f64,
    /// `N'`.
    pub selected_count: usize,
    /// One-based indices of the estimated ports.
    pub selected_ports: Vec<usize>,
}

impl FrameBudget {
    /// Share of the block used for data, `L_t / L_c`.
    pub fn data_fraction(&self) -> f64 {
        self.data_uses as f64 / self.total_uses as f64
    }
}

/// Offset of port `i` (one-based) from the reference port, in metres.
pub fn port_displacement(i: usize, cfg: &FaArrayConfig) -> Result<f64> {
    cfg.check_port(i)?;
    Ok((i - 1) as f64 / (cfg.ports_per_fa - 1) as f64 * cfg.length())
}

/// Distance between port `i` and a base station at horizontal distance `rho`.
pub fn link_distance(i: usize, rho: f64, cfg: &FaArrayConfig) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain(format!("link distance needs rho > 0, got {rho}")));
    }
    let d = port_displacement(i, cfg)?;
    Ok(rho.hypot(d))
}

/// Average fluid-metal velocity in m/s.
pub fn fluid_velocity(p: &FluidParams) -> f64 {
    p.charge / (6.0 * p.viscosity) * p.thickness_ratio * p.voltage
}

/// Time for the fluid to travel across `gap` port spacings.
pub fn switching_delay(gap: f64, cfg: &FaArrayConfig, p: &FluidParams) -> Result<f64> {
    let max_gap = (cfg.ports_per_fa - 1) as f64;
    if !(gap >= 0.0) {
        return Err(domain(format!("port gap must be nonnegative, got {gap}")));
    }
    if gap > max_gap {
        return Err(domain(format!("port gap {gap} exceeds the array span {max_gap}")));
    }
    Ok(cfg.length() / fluid_velocity(p) * gap / max_gap)
}

/// Derives the channel-use budget of a coherence block.
///
/// Fails with [`Error::InfeasibleFrame`] when moving the fluid between the
/// estimated ports of all antennas takes the whole estimation window.
pub fn build_frame_budget(cfg: &FaArrayConfig, p: &FluidParams, frame: &FrameInputs) -> Result<FrameBudget> {
    cfg.validate()?;
    p.validate()?;
    frame.validate()?;
    let total_uses = frame.total_uses();
    let estimation_uses = frame.estimation_uses();
    if estimation_uses == 0 || estimation_uses >= total_uses {
        return Err(config(format!(
            "estimation window of {estimation_uses} uses does not fit a block of {total_uses}"
        )));
    }
    let selected_ports = cfg.selected_ports();
    let selected_count = selected_ports.len();
    // A single estimated port per antenna never moves the fluid.
    let hop = if selected_count > 1 {
        switching_delay((cfg.skipped_ports + 1) as f64, cfg, p)?
    } else {
        0.0
    };
    let switching_uses = (cfg.num_fas * (selected_count - 1)) as f64 * hop * frame.coherence_bandwidth;
    if switching_uses >= estimation_uses as f64 {
        return Err(Error::InfeasibleFrame {
            switching_uses,
            estimation_uses,
        });
    }
    let pilot_length = (estimation_uses as f64 - switching_uses) / (selected_count * cfg.num_fas) as f64;
    Ok(FrameBudget {
        coherence_bandwidth: frame.coherence_bandwidth,
        coherence_time: frame.coherence_time,
        total_uses,
        estimation_uses,
        data_uses: total_uses - estimation_uses,
        switching_uses,
        pilot_length,
        selected_count,
        selected_ports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn array(n: usize, skip: usize) -> FaArrayConfig {
        FaArrayConfig::new(4, n, skip, 0.2, 0.06).unwrap()
    }

    fn fluid(voltage: f64) -> FluidParams {
        FluidParams::new(0.07, 0.002, 0.2, voltage).unwrap()
    }

    fn frame() -> FrameInputs {
        FrameInputs {
            coherence_bandwidth: 1e8,
            coherence_time: 0.05,
            estimation_fraction: 0.16,
        }
    }

    #[test]
    fn displacement_endpoints() {
        let cfg = array(20, 1);
        assert_eq!(port_displacement(1, &cfg).unwrap(), 0.0);
        assert_relative_eq!(port_displacement(20, &cfg).unwrap(), 0.012, max_relative = 1e-14);
        assert!(port_displacement(0, &cfg).is_err());
        assert!(port_displacement(21, &cfg).is_err());
    }

    #[test]
    fn link_distance_cases() {
        let cfg = array(20, 1);
        assert_eq!(link_distance(1, 37.5, &cfg).unwrap(), 37.5);
        assert_relative_eq!(link_distance(20, 0.012, &cfg).unwrap(), 0.012 * 2f64.sqrt(), max_relative = 1e-14);
        assert!(link_distance(2, 0.0, &cfg).is_err());
        assert!(link_distance(2, -1.0, &cfg).is_err());
    }

    #[test]
    fn velocity_values() {
        assert_relative_eq!(fluid_velocity(&fluid(0.1)), 0.116_666_666_666_666_67, max_relative = 1e-12);
        assert_relative_eq!(fluid_velocity(&fluid(10.0)), 11.666_666_666_666_666, max_relative = 1e-12);
        assert_relative_eq!(fluid_velocity(&fluid(0.2)), 2.0 * fluid_velocity(&fluid(0.1)), max_relative = 1e-14);
    }

    #[test]
    fn neighbour_delay() {
        let cfg = array(20, 1);
        let d = switching_delay(1.0, &cfg, &fluid(0.1)).unwrap();
        assert_relative_eq!(d, 0.012 / 0.116_666_666_666_666_67 / 19.0, max_relative = 1e-12);
        assert!((d - 5.41e-3).abs() < 1e-5);
        assert_eq!(switching_delay(0.0, &cfg, &fluid(0.1)).unwrap(), 0.0);
        assert!(switching_delay(-1.0, &cfg, &fluid(0.1)).is_err());
    }

    #[test]
    fn table_budget() {
        let b = build_frame_budget(&array(15, 1), &fluid(10.0), &frame()).unwrap();
        assert_eq!(b.total_uses, 5_000_000);
        assert_eq!(b.estimation_uses, 800_000);
        assert_eq!(b.data_uses, 4_200_000);
        assert_eq!(b.selected_count, 8);
        assert_eq!(b.selected_ports, vec![1, 3, 5, 7, 9, 11, 13, 15]);
        let hop = 0.012 / 11.666_666_666_666_666 * 2.0 / 14.0;
        assert_relative_eq!(b.switching_uses, 4.0 * 7.0 * hop * 1e8, max_relative = 1e-12);
        assert_relative_eq!(b.pilot_length, (800_000.0 - b.switching_uses) / 32.0, max_relative = 1e-14);
    }

    #[test]
    fn full_skip_needs_no_switching() {
        let b = build_frame_budget(&array(15, 14), &fluid(10.0), &frame()).unwrap();
        assert_eq!(b.selected_count, 1);
        assert_eq!(b.switching_uses, 0.0);
        assert_relative_eq!(b.pilot_length, 200_000.0);
    }

    #[test]
    fn skip_less_selects_everything() {
        let cfg = array(9, 0);
        assert_eq!(cfg.selected_ports(), (1..=9).collect::<Vec<_>>());
    }

    #[test]
    fn slow_fluid_is_infeasible() {
        let err = build_frame_budget(&array(30, 0), &fluid(0.1), &frame()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleFrame { .. }));
    }

    #[test]
    fn skip_beyond_array_rejected() {
        assert!(FaArrayConfig::new(4, 15, 15, 0.2, 0.06).is_err());
    }
}
