//! Tunable settings shared by the library entry points and the CLI.

use crate::error::{Error, Result};

/// Every tolerance, sample count, box and cap used by the checks. The
/// defaults are the values the test suites pin.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// Sampled nilpotence: points, coefficient tolerance, sampling box.
    pub nilpotence_samples: usize,
    pub nilpotence_tol: f64,
    pub sample_box: (f64, f64),
    /// Sampled strong nilpotence: point tuples and product tolerance.
    pub strong_tuples: usize,
    pub strong_tol: f64,
    /// Largest number of terms any intermediate polynomial may reach.
    pub monomial_cap: usize,
    /// Composition powers are tried up to `power_cap_factor * n`, each
    /// intermediate kept under `power_term_cap` terms.
    pub power_cap_factor: usize,
    pub power_term_cap: usize,
    /// Numeric inversion and fixed-point agreement tolerance.
    pub inverse_tol: f64,
    pub fixed_point_max_iter: usize,
    pub fixed_point_tol: f64,
    /// Damped Newton corroboration of fixed points.
    pub newton_starts: usize,
    pub newton_tol: f64,
    pub newton_separation: f64,
    pub newton_box: (f64, f64),
    /// Numeric zeros-at-infinity search for `n >= 3`.
    pub infinity_restarts: usize,
    pub infinity_none_threshold: f64,
    pub infinity_zero_threshold: f64,
    /// Flows and iteration.
    pub divergence_threshold: f64,
    pub period_tol: f64,
    pub spectral_samples: usize,
    /// Numeric verification of transcendental New Class recipes.
    pub numeric_constancy_samples: usize,
    pub numeric_constancy_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            nilpotence_samples: 500,
            nilpotence_tol: 1e-9,
            sample_box: (-10.0, 10.0),
            strong_tuples: 200,
            strong_tol: 1e-8,
            monomial_cap: 2_000_000,
            power_cap_factor: 2,
            power_term_cap: 100_000,
            inverse_tol: 1e-9,
            fixed_point_max_iter: 1000,
            fixed_point_tol: 1e-10,
            newton_starts: 100,
            newton_tol: 1e-10,
            newton_separation: 1e-6,
            newton_box: (-10.0, 10.0),
            infinity_restarts: 50,
            infinity_none_threshold: 1e-6,
            infinity_zero_threshold: 1e-10,
            divergence_threshold: 1e12,
            period_tol: 1e-8,
            spectral_samples: 200,
            numeric_constancy_samples: 100,
            numeric_constancy_tol: 1e-8,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("nilpotence_samples", self.nilpotence_samples),
            ("strong_tuples", self.strong_tuples),
            ("monomial_cap", self.monomial_cap),
            ("power_cap_factor", self.power_cap_factor),
            ("power_term_cap", self.power_term_cap),
            ("fixed_point_max_iter", self.fixed_point_max_iter),
            ("newton_starts", self.newton_starts),
            ("infinity_restarts", self.infinity_restarts),
            ("spectral_samples", self.spectral_samples),
            ("numeric_constancy_samples", self.numeric_constancy_samples),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Precondition(format!("{name} must be positive")));
            }
        }
        let reals = [
            ("nilpotence_tol", self.nilpotence_tol),
            ("strong_tol", self.strong_tol),
            ("inverse_tol", self.inverse_tol),
            ("fixed_point_tol", self.fixed_point_tol),
            ("newton_tol", self.newton_tol),
            ("newton_separation", self.newton_separation),
            ("infinity_none_threshold", self.infinity_none_threshold),
            ("infinity_zero_threshold", self.infinity_zero_threshold),
            ("divergence_threshold", self.divergence_threshold),
            ("period_tol", self.period_tol),
            ("numeric_constancy_tol", self.numeric_constancy_tol),
        ];
        for (name, v) in reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be positive")));
            }
        }
        for (name, (lo, hi)) in [("sample_box", self.sample_box), ("newton_box", self.newton_box)] {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::Precondition(format!("{name} must satisfy lo < hi")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
        let bad = RunConfig { period_tol: 0.0, ..RunConfig::default() };
        assert!(bad.validate().is_err());
        let bad = RunConfig { sample_box: (1.0, -1.0), ..RunConfig::default() };
        assert!(bad.validate().is_err());
    }
}
