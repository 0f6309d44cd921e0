//! Static (equilibrium) pairwise Ising model
//! `p(s) = exp(Σ h_i s_i + Σ_{i<j} J_ij s_i s_j) / Z`.

mod artifact;
mod exact;
mod fit;
mod gibbs;
mod validate;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::panel::default_tickers;

pub use artifact::{StaticFitMeta, StaticModelDocument, STATIC_SCHEMA_VERSION};
pub use exact::{
    config_from_code, exact_distribution, exact_log_partition, exact_moments, exact_partition, ORACLE_LIMIT,
};
pub use fit::{fit_static, static_gradient, FitTrace, FitTraceRow, Init, StaticFitConfig, StepSchedule};
pub use gibbs::{model_breadth_distribution, model_moments_mc, sample_chain, GibbsConfig, ScanOrder};
pub use validate::{validate_static, MomentEstimator, MomentKind, ValidationReport, ValidationRow};

#[derive(Debug, Clone, PartialEq)]
pub struct StaticIsingModel {
    tickers: Vec<String>,
    h: Array1<f64>,
    j: Array2<f64>,
}

impl StaticIsingModel {
    /// Fields `h` and symmetric, zero-diagonal couplings `j`.
    pub fn new(h: Array1<f64>, j: Array2<f64>) -> Result<Self> {
        let n = h.len();
        if j.dim() != (n, n) {
            return Err(Error::InvalidInput(format!("J must be {n}x{n}, got {:?}", j.dim())));
        }
        if h.iter().chain(j.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        for a in 0..n {
            if j[(a, a)] != 0.0 {
                return Err(Error::InvalidInput("J must have a zero diagonal".into()));
            }
            for b in 0..a {
                if j[(a, b)] != j[(b, a)] {
                    return Err(Error::InvalidInput("J must be symmetric".into()));
                }
            }
        }
        Ok(StaticIsingModel {
            tickers: default_tickers(n),
            h,
            j,
        })
    }

    pub fn zeros(n: usize) -> Self {
        StaticIsingModel {
            tickers: default_tickers(n),
            h: Array1::zeros(n),
            j: Array2::zeros((n, n)),
        }
    }

    pub fn with_tickers(mut self, tickers: Vec<String>) -> Result<Self> {
        if tickers.len() != self.n() {
            return Err(Error::InvalidInput(format!(
                "{} tickers for a model of size {}",
                tickers.len(),
                self.n()
            )));
        }
        self.tickers = tickers;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn h(&self) -> &Array1<f64> {
        &self.h
    }

    pub fn j(&self) -> &Array2<f64> {
        &self.j
    }

    /// Local field `h_i + Σ_{j≠i} J_ij s_j` acting on site `i`.
    pub fn local_field(&self, s: ArrayView1<'_, f64>, i: usize) -> f64 {
        self.h[i] + self.j.row(i).dot(&s)
    }

    /// Hamiltonian `-Σ h_i s_i - Σ_{i<j} J_ij s_i s_j`.
    pub fn energy(&self, s: &[i8]) -> f64 {
        assert_eq!(s.len(), self.n(), "spin vector length");
        let n = self.n();
        let mut e = 0.0;
        for a in 0..n {
            let sa = f64::from(s[a]);
            e -= self.h[a] * sa;
            for b in a + 1..n {
                e -= self.j[(a, b)] * sa * f64::from(s[b]);
            }
        }
        e
    }

    /// Heat-bath probability that site `i` is `+1` given the other spins.
    pub fn gibbs_conditional(&self, s: &[i8], i: usize) -> f64 {
        let spins = Array1::from_iter(s.iter().map(|&v| f64::from(v)));
        logistic(2.0 * self.local_field(spins.view(), i))
    }

    /// Adds `step * grad` to the parameters, keeping J symmetric with a zero
    /// diagonal.
    pub(crate) fn ascend(&mut self, step: f64, grad_h: &Array1<f64>, grad_j: &Array2<f64>) {
        self.h.scaled_add(step, grad_h);
        let n = self.n();
        for a in 0..n {
            for b in a + 1..n {
                let v = self.j[(a, b)] + step * grad_j[(a, b)];
                self.j[(a, b)] = v;
                self.j[(b, a)] = v;
            }
        }
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.h.iter().chain(self.j.iter()).all(|v| v.is_finite())
    }
}

/// `1 / (1 + e^{-x})`, written as `e^{θ} / (e^{θ} + e^{-θ})` when `x = 2θ`.
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
