//! Named numerical tolerances, collected in one configuration record.
//!
//! Every comparison threshold used by the crate lives here so that the
//! whole pipeline can be tightened or relaxed from a single place (for
//! example via the CLI's `--tolerances` flag).

use serde::{Deserialize, Serialize};

/// Tolerance configuration shared by all geometric operations.
///
/// All values are absolute unless noted otherwise; the fields that scale
/// with the data (`cont`, `smooth`, `coeff`) are multiplied by a local
/// magnitude estimate at the point of use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Unit-normal defect allowed on a hyperplane, |1 - |n||.
    pub unit: f64,
    /// Feasibility slack for point-in-polytope and active-constraint tests.
    pub feas: f64,
    /// LP optimality and constraint certification slack.
    pub lp: f64,
    /// Distance under which two vertices are merged.
    pub vertex: f64,
    /// Singular-value threshold for rank decisions.
    pub rank: f64,
    /// Relative threshold for trimming and comparing polynomial coefficients.
    pub coeff: f64,
    /// Relative continuity slack at piecewise-polynomial breakpoints.
    pub cont: f64,
    /// Relative derivative-jump threshold when measuring smoothness class.
    pub smooth: f64,
    /// Dihedral-angle comparison tolerance in radians.
    pub angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unit: 1e-12,
            feas: 1e-9,
            lp: 1e-9,
            vertex: 1e-8,
            rank: 1e-10,
            coeff: 1e-12,
            cont: 1e-9,
            smooth: 1e-7,
            angle: 1e-8,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let tol = Tolerances::default();
        let text = serde_json::to_string(&tol).unwrap();
        let back: Tolerances = serde_json::from_str(&text).unwrap();
        assert_eq!(tol, back);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let tol: Tolerances = serde_json::from_str(r#"{"lp": 1e-7}"#).unwrap();
        assert_eq!(tol.lp, 1e-7);
        assert_eq!(tol.feas, Tolerances::default().feas);
    }
}
