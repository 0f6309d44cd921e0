//! Synchronous kinetic Ising model with a slowly varying external field.
//!
//! Every stock updates at once from the previous day's configuration:
//! `P(s_i(t+1) | s(t)) = exp(s_i(t+1) theta_i(t)) / 2cosh theta_i(t)`, with
//! `theta_i(t) = h_i(t) + a_i s_i(t) + Σ_{j≠i} J_ij s_j(t)` and
//! `h_i(t) = Σ_m phi_m(t) gamma_im` on a hat basis over the sample.
//!
//! Time indices inside this module are zero-based transition indices
//! `k = 0..T-2`: transition `k` maps day `k` to day `k + 1`.

mod artifact;
mod basis;
mod diagnostics;
mod fit;
mod likelihood;
mod model;
mod simulate;

pub use artifact::{KineticFitMeta, KineticModelDocument, KINETIC_SCHEMA_VERSION};
pub use basis::{basis_value, HatBasis};
pub use diagnostics::{
    calibration_table, field_decomposition, market_fit_report, model_lag1_correlations, self_memory_summary,
    CalibrationBin, CalibrationTable, FieldDecomposition, MarketFitReport, SelfMemorySummary, WindowFieldMeans,
};
pub use fit::{fit_kinetic, fit_stock, KineticDesign, KineticFitConfig, StockFit, StockFitTrace};
pub use likelihood::{
    conditional_log_likelihood, kinetic_gradients, penalized_gradients, penalized_objective, penalty_value,
    KineticGradient, PenaltyConfig,
};
pub use model::KineticIsingModel;
pub use simulate::simulate;

/// `ln(2 cosh theta)` without overflow for large `|theta|`.
pub(crate) fn log_2cosh(theta: f64) -> f64 {
    let x = theta.abs();
    x + (-2.0 * x).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::log_2cosh;

    #[test]
    fn log_2cosh_is_stable() {
        for x in [-3.0f64, -0.2, 0.0, 0.7, 5.0] {
            assert!((log_2cosh(x) - (2.0 * x.cosh()).ln()).abs() < 1e-14);
        }
        assert_eq!(log_2cosh(0.0), std::f64::consts::LN_2);
        assert!((log_2cosh(1e4) - 1e4).abs() < 1e-9);
        assert!(log_2cosh(-1e300).is_finite());
    }
}
