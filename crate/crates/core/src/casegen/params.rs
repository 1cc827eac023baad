//! Generation parameters and their calibration semantics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Configuration problem in generation parameters.
#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("failed to parse parameter file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to read parameter file: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-flag base probabilities for the correlated Bernoulli flag draws.
///
/// Flag presence probability is `clamp(base + risk_slope * risk, 0, 1)`.
/// INSIDER carries the smallest base because its presence unconditionally
/// forces an escalation downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagBases {
    pub aml: f64,
    pub kyc: f64,
    pub sanctions: f64,
    pub insider: f64,
    pub concentration: f64,
}

/// Calibration constants for the synthetic case generator.
///
/// The distribution shapes are calibration decisions: the Beta shapes are
/// matched to the target pooled moments (risk mean 0.50 / sd 0.21,
/// completeness mean 0.52 / sd 0.18), the flag bases and slope to a pooled
/// flag mean of 1.08, and the amount log-normal so that the million-dollar
/// joint gate condition fires on a small minority of cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub risk_alpha: f64,
    pub risk_beta: f64,
    pub completeness_alpha: f64,
    pub completeness_beta: f64,
    pub flag_bases: FlagBases,
    pub flag_risk_slope: f64,
    pub amount_log_mean: f64,
    pub amount_log_sd: f64,
    pub tenure_rate: f64,
    pub counterparty_alpha: f64,
    pub counterparty_beta: f64,
    pub jurisdictions: Vec<String>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            risk_alpha: 2.0,
            risk_beta: 2.0,
            completeness_alpha: 3.5,
            completeness_beta: 3.2,
            flag_bases: FlagBases {
                aml: 0.14,
                kyc: 0.16,
                sanctions: 0.10,
                insider: 0.02,
                concentration: 0.11,
            },
            flag_risk_slope: 0.22,
            amount_log_mean: 11.0,
            amount_log_sd: 1.5,
            tenure_rate: 0.15,
            counterparty_alpha: 2.0,
            counterparty_beta: 2.0,
            jurisdictions: vec![
                "US".to_string(),
                "EU".to_string(),
                "UK".to_string(),
                "APAC".to_string(),
                "LATAM".to_string(),
            ],
        }
    }
}

impl GenParams {
    /// Load parameters from a TOML file.
    pub fn load(path: &std::path::Path) -> Result<GenParams, ParamsError> {
        let text = std::fs::read_to_string(path)?;
        let params: GenParams = toml::from_str(&text)?;
        params.validate()?;
        Ok(params)
    }

    /// Reject parameters outside their calibration ranges.
    pub fn validate(&self) -> Result<(), ParamsError> {
        let positive = [
            ("risk_alpha", self.risk_alpha),
            ("risk_beta", self.risk_beta),
            ("completeness_alpha", self.completeness_alpha),
            ("completeness_beta", self.completeness_beta),
            ("amount_log_sd", self.amount_log_sd),
            ("tenure_rate", self.tenure_rate),
            ("counterparty_alpha", self.counterparty_alpha),
            ("counterparty_beta", self.counterparty_beta),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamsError::OutOfRange(format!("{name} must be > 0, got {value}")));
            }
        }
        if !self.amount_log_mean.is_finite() {
            return Err(ParamsError::OutOfRange("amount_log_mean must be finite".into()));
        }
        for (name, value) in [
            ("flag_bases.aml", self.flag_bases.aml),
            ("flag_bases.kyc", self.flag_bases.kyc),
            ("flag_bases.sanctions", self.flag_bases.sanctions),
            ("flag_bases.insider", self.flag_bases.insider),
            ("flag_bases.concentration", self.flag_bases.concentration),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamsError::OutOfRange(format!("{name} must be in [0,1], got {value}")));
            }
        }
        if !(0.0..=1.0).contains(&self.flag_risk_slope) {
            return Err(ParamsError::OutOfRange(format!(
                "flag_risk_slope must be in [0,1], got {}",
                self.flag_risk_slope
            )));
        }
        if self.jurisdictions.is_empty() {
            return Err(ParamsError::OutOfRange("jurisdictions must be non-empty".into()));
        }
        Ok(())
    }

    /// Jointly scale all parameters by `factor` (e.g. 0.8 for the −20%
    /// sensitivity level).
    ///
    /// Scaling semantics per family:
    /// - Beta shapes scale together, preserving the mean and varying spread.
    /// - Flag bases and the risk slope scale linearly, so the pooled flag
    ///   mean scales linearly.
    /// - The amount median scales multiplicatively (`log_mean + ln(factor)`)
    ///   and the log-sd linearly; shifting the log-mean itself by ±20%
    ///   would move the median by orders of magnitude, which is not a
    ///   meaningful perturbation of the same book of business.
    /// - The tenure rate scales linearly (mean tenure scales by 1/factor).
    pub fn scaled(&self, factor: f64) -> GenParams {
        GenParams {
            risk_alpha: self.risk_alpha * factor,
            risk_beta: self.risk_beta * factor,
            completeness_alpha: self.completeness_alpha * factor,
            completeness_beta: self.completeness_beta * factor,
            flag_bases: FlagBases {
                aml: self.flag_bases.aml * factor,
                kyc: self.flag_bases.kyc * factor,
                sanctions: self.flag_bases.sanctions * factor,
                insider: self.flag_bases.insider * factor,
                concentration: self.flag_bases.concentration * factor,
            },
            flag_risk_slope: self.flag_risk_slope * factor,
            amount_log_mean: self.amount_log_mean + factor.ln(),
            amount_log_sd: self.amount_log_sd * factor,
            tenure_rate: self.tenure_rate * factor,
            counterparty_alpha: self.counterparty_alpha * factor,
            counterparty_beta: self.counterparty_beta * factor,
            jurisdictions: self.jurisdictions.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_validate() {
        GenParams::default().validate().unwrap();
    }

    #[test]
    fn negative_shape_rejected() {
        let mut p = GenParams::default();
        p.risk_alpha = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn scaled_by_one_is_identity() {
        let p = GenParams::default();
        let s = p.scaled(1.0);
        assert_eq!(p, s);
    }

    #[test]
    fn scaling_moves_flag_bases_linearly() {
        let p = GenParams::default().scaled(1.2);
        assert!((p.flag_bases.aml - 0.168).abs() < 1e-12);
        assert!((p.flag_risk_slope - 0.264).abs() < 1e-12);
    }
}
