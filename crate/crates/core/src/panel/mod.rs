//! Price ingestion, binarization into spins, the fixed-panel completeness
//! rule, and the empirical statistics used as fitting targets.

mod empirical;
mod prices;
mod spins;

pub use empirical::{
    breadth, breadth_histogram, breadth_series, empirical_moments, lag1_cross_correlation, window_mean,
    DateWindow, Lag1Correlations, MomentSet,
};
pub use prices::{load_prices, PricePanel, PriceSource};
pub use spins::{binarize, default_tickers, filter_complete, BinarizedPanel, CompletenessRule, FilterReport, SpinPanel};
