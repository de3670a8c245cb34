//! A fully resolved system: configuration plus everything derived from it
//! that does not depend on the random network.

use crate::analytics::{sinr_threshold, RateTarget};
use crate::channel::{autocorrelation, relative_error_variance, CorrelationProfile};
use crate::error::{domain, Result};
use crate::field::NetworkConfig;
use crate::geometry::{build_frame_budget, port_displacement, FaArrayConfig, FluidParams, FrameBudget, FrameInputs};

/// Which algebraic form to use where the threshold and conditional-outage
/// expressions admit two readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormVariant {
    /// Rate threshold `2^(R L_c / L_t) - 1`; conditional outage evaluated at
    /// amplitude thresholds `sqrt(Theta)`.
    #[default]
    Consistent,
    /// Rate threshold `2^(R / (1 - L_t / L_c)) - 1`; amplitude thresholds
    /// `Theta` (integral limit `Theta_1^2 / s_1`).
    Printed,
}

/// Every scalar input of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub network: NetworkConfig,
    pub array: FaArrayConfig,
    pub fluid: FluidParams,
    pub frame: FrameInputs,
    /// Target rate in bits per channel use.
    pub rate: f64,
    pub variant: FormVariant,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.array.validate()?;
        self.fluid.validate()?;
        self.frame.validate()?;
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(domain(format!("target rate must be nonnegative, got {}", self.rate)));
        }
        Ok(())
    }
}

/// A scenario with its frame budget, rate threshold and per-port constants.
#[derive(Debug, Clone)]
pub struct System {
    pub scenario: Scenario,
    pub budget: FrameBudget,
    pub target: RateTarget,
    /// Correlation with the reference port, per estimated port.
    pub mu: Vec<f64>,
    /// Offset from the reference port, per estimated port.
    pub displacement: Vec<f64>,
}

impl System {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let budget = build_frame_budget(&scenario.array, &scenario.fluid, &scenario.frame)?;
        let target = sinr_threshold(scenario.rate, &budget, scenario.variant)?;
        let mu = budget
            .selected_ports
            .iter()
            .map(|&i| autocorrelation(i, &scenario.array))
            .collect::<Result<Vec<_>>>()?;
        let displacement = budget
            .selected_ports
            .iter()
            .map(|&i| port_displacement(i, &scenario.array))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            scenario,
            budget,
            target,
            mu,
            displacement,
        })
    }

    pub fn network(&self) -> &NetworkConfig {
        &self.scenario.network
    }

    pub fn array(&self) -> &FaArrayConfig {
        &self.scenario.array
    }

    /// Number of estimated ports per antenna.
    pub fn selected_count(&self) -> usize {
        self.budget.selected_count
    }

    /// Link distance of every estimated port at serving distance `rho`.
    pub fn link_distances(&self, rho: f64) -> Vec<f64> {
        self.displacement.iter().map(|d| rho.hypot(*d)).collect()
    }

    /// Absolute estimation-error variance of every estimated port.
    pub fn error_variances(&self, rho: f64) -> Vec<f64> {
        let net = self.network();
        self.link_distances(rho)
            .into_iter()
            .map(|r| net.channel_variance * relative_error_variance(r, self.budget.pilot_length, net))
            .collect()
    }

    /// Correlation profile of the estimated gains at serving distance `rho`.
    pub fn profile(&self, rho: f64) -> Result<CorrelationProfile> {
        CorrelationProfile::new(self.mu.clone(), self.network().channel_variance, &self.error_variances(rho))
    }
}
