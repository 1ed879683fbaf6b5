//! Report containers that serialize to the JSON/CSV exchange formats.

use crate::quadrature::DivergenceEvidence;
use crate::special::LineFit;
use serde::{Deserialize, Serialize};

/// A table of (radius or theta, measured quantity) with an optional
/// fitted exponent.
///
/// JSON schema: `{quantity, center, radii[], values[], fit:{slope,
/// intercept, residual}|null}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub quantity: String,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: Option<LineFit>,
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan report serializes")
    }

    /// CSV with columns radius,value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,value\n");
        for (r, v) in self.radii.iter().zip(&self.values) {
            out.push_str(&format!("{r},{v}\n"));
        }
        out
    }
}

/// Classification of a fitted exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FitOutcome {
    /// least-squares fit with residual at or below the cleanliness threshold
    Clean(LineFit),
    /// a fit exists but its residual disqualifies it as an exponent claim
    NoCleanExponent(LineFit),
    /// fitting was not requested
    None,
}

impl FitOutcome {
    /// Threshold on the RMS log-space residual above which a fitted slope is
    /// not reported as an exponent.
    pub const CLEAN_RESIDUAL: f64 = 0.1;

    pub fn classify(fit: LineFit) -> Self {
        if fit.residual <= Self::CLEAN_RESIDUAL {
            FitOutcome::Clean(fit)
        } else {
            FitOutcome::NoCleanExponent(fit)
        }
    }

    pub fn fit(&self) -> Option<&LineFit> {
        match self {
            FitOutcome::Clean(f) | FitOutcome::NoCleanExponent(f) => Some(f),
            FitOutcome::None => None,
        }
    }

    pub fn clean(&self) -> Option<&LineFit> {
        match self {
            FitOutcome::Clean(f) => Some(f),
            _ => None,
        }
    }
}

/// Pointwise residual table of a system verification.
///
/// JSON schema: `{family, n, radii[], residual_rel[], max_rel}` where
/// entries of `residual_rel` are null at points whose term magnitudes are
/// too small to divide by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReportFile {
    pub family: String,
    pub n: usize,
    pub radii: Vec<f64>,
    pub residual_rel: Vec<Option<f64>>,
    pub max_rel: f64,
}

impl ResidualReportFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("residual report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,residual_rel\n");
        for (r, v) in self.radii.iter().zip(&self.residual_rel) {
            match v {
                Some(v) => out.push_str(&format!("{r},{v}\n")),
                None => out.push_str(&format!("{r},\n")),
            }
        }
        out
    }
}

/// CSV of a dyadic divergence table: columns k,increment,partial_sum.
pub fn divergence_csv(ev: &DivergenceEvidence) -> String {
    let mut out = String::from("k,increment,partial_sum\n");
    for (k, (inc, ps)) in ev.increments.iter().zip(&ev.partial_sums).enumerate() {
        out.push_str(&format!("{k},{inc},{ps}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_report_json_schema() {
        let report = ScanReport {
            quantity: "test".into(),
            center: vec![0.0, 0.0],
            radii: vec![0.1, 0.2],
            values: vec![1.0, 2.0],
            fit: Some(LineFit { slope: 1.0, intercept: 0.0, residual: 0.01 }),
        };
        let json = report.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(parsed.get("quantity").is_some());
        assert!(parsed.get("fit").unwrap().get("slope").is_some());
        let back: ScanReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn fit_outcome_classification() {
        let clean = LineFit { slope: 2.0, intercept: 0.0, residual: 0.05 };
        assert!(matches!(FitOutcome::classify(clean), FitOutcome::Clean(_)));
        let noisy = LineFit { slope: 2.0, intercept: 0.0, residual: 0.5 };
        assert!(matches!(FitOutcome::classify(noisy), FitOutcome::NoCleanExponent(_)));
    }

    #[test]
    fn residual_report_null_handling() {
        let rep = ResidualReportFile {
            family: "x".into(),
            n: 4,
            radii: vec![0.1, 0.2],
            residual_rel: vec![Some(1e-9), None],
            max_rel: 1e-9,
        };
        let json = rep.to_json();
        assert!(json.contains("null"));
        let csv = rep.to_csv();
        assert!(csv.lines().count() == 3);
    }
}
