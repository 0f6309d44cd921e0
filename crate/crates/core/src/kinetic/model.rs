use ndarray::{Array1, Array2, ArrayView1};

use super::basis::HatBasis;
use super::log_2cosh;
use crate::error::{Error, Result};
use crate::panel::default_tickers;

/// Synchronous kinetic Ising model with effective field
/// `theta_i(t) = Σ_m phi_m(t) gamma_im + a_i s_i(t) + Σ_{j≠i} J_ij s_j(t)`.
///
/// `j[(i, k)]` is the influence of source `k` at day `t` on target `i` at
/// day `t + 1`; it need not be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticIsingModel {
    pub(crate) tickers: Vec<String>,
    pub(crate) gamma: Array2<f64>,
    pub(crate) a: Array1<f64>,
    pub(crate) j: Array2<f64>,
    pub(crate) basis: HatBasis,
}

impl KineticIsingModel {
    pub fn new(gamma: Array2<f64>, a: Array1<f64>, j: Array2<f64>, basis: HatBasis) -> Result<Self> {
        let n = a.len();
        if gamma.dim() != (n, basis.n_basis()) {
            return Err(Error::InvalidInput(format!(
                "gamma must be {n}x{}, got {:?}",
                basis.n_basis(),
                gamma.dim()
            )));
        }
        if j.dim() != (n, n) {
            return Err(Error::InvalidInput(format!("J must be {n}x{n}, got {:?}", j.dim())));
        }
        if (0..n).any(|i| j[(i, i)] != 0.0) {
            return Err(Error::InvalidInput("J must have a zero diagonal".into()));
        }
        if gamma.iter().chain(a.iter()).chain(j.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        Ok(KineticIsingModel {
            tickers: default_tickers(n),
            gamma,
            a,
            j,
            basis,
        })
    }

    pub fn zeros(n: usize, basis: HatBasis) -> Self {
        KineticIsingModel {
            tickers: default_tickers(n),
            gamma: Array2::zeros((n, basis.n_basis())),
            a: Array1::zeros(n),
            j: Array2::zeros((n, n)),
            basis,
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
        self.a.len()
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn gamma(&self) -> &Array2<f64> {
        &self.gamma
    }

    pub fn a(&self) -> &Array1<f64> {
        &self.a
    }

    pub fn j(&self) -> &Array2<f64> {
        &self.j
    }

    pub fn basis(&self) -> &HatBasis {
        &self.basis
    }

    /// `h_i` at transition `k`.
    pub fn external_field(&self, i: usize, k: usize) -> f64 {
        self.basis.support(k).map(|(m, v)| v * self.gamma[(i, m)]).sum()
    }

    pub fn external_fields(&self, k: usize) -> Array1<f64> {
        (0..self.n()).map(|i| self.external_field(i, k)).collect()
    }

    /// `theta(t)` for the state `s_t` observed at transition `k`.
    pub fn effective_field(&self, s_t: ArrayView1<'_, f64>, k: usize) -> Array1<f64> {
        self.external_fields(k) + &(&self.a * &s_t) + self.j.dot(&s_t)
    }

    /// `E[s_i(t+1) | s(t)] = tanh(theta_i(t))`.
    pub fn predict_mean(&self, s_t: ArrayView1<'_, f64>, k: usize) -> Array1<f64> {
        self.effective_field(s_t, k).mapv(f64::tanh)
    }

    /// `log Π_i exp(s_i' theta_i) / 2cosh(theta_i)`.
    pub fn transition_log_prob(&self, s_t: ArrayView1<'_, f64>, s_next: ArrayView1<'_, f64>, k: usize) -> f64 {
        self.effective_field(s_t, k)
            .iter()
            .zip(s_next)
            .map(|(theta, s)| s * theta - log_2cosh(*theta))
            .sum()
    }

    pub fn transition_prob(&self, s_t: ArrayView1<'_, f64>, s_next: ArrayView1<'_, f64>, k: usize) -> f64 {
        self.transition_log_prob(s_t, s_next, k).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn basis() -> HatBasis {
        HatBasis::new(3, 12).unwrap()
    }

    #[test]
    fn constant_gamma_gives_constant_field() {
        let mut m = KineticIsingModel::zeros(2, basis());
        m.gamma.row_mut(1).fill(0.7);
        for k in 0..11 {
            assert_abs_diff_eq!(m.external_field(1, k), 0.7, epsilon = 1e-15);
            assert_eq!(m.external_field(0, k), 0.0);
        }
    }

    #[test]
    fn two_hat_field_is_linear_ramp() {
        let b = HatBasis::new(2, 7).unwrap();
        let m = KineticIsingModel::new(array![[0.0, 1.0]], array![0.0], array![[0.0]], b).unwrap();
        for k in 0..6 {
            assert_abs_diff_eq!(m.external_field(0, k), k as f64 / 5.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn effective_field_examples() {
        let zero = KineticIsingModel::zeros(3, basis());
        assert!(zero.effective_field(array![1.0, -1.0, 1.0].view(), 2).iter().all(|&v| v == 0.0));

        let mut single = KineticIsingModel::zeros(3, basis());
        single.j[(0, 1)] = 0.4;
        let theta = single.effective_field(array![-1.0, 1.0, -1.0].view(), 0);
        assert_abs_diff_eq!(theta[0], 0.4);

        // hand sum: theta_i = h_i + a_i s_i + Σ_j J_ij s_j with constant h
        let gamma = array![[0.1, 0.1, 0.1], [-0.2, -0.2, -0.2], [0.0, 0.0, 0.0]];
        let a = array![0.5, -0.3, 0.2];
        let j = array![[0.0, 0.2, -0.1], [0.4, 0.0, 0.3], [-0.5, 0.6, 0.0]];
        let m = KineticIsingModel::new(gamma, a, j, basis()).unwrap();
        let s = array![1.0, -1.0, 1.0];
        let theta = m.effective_field(s.view(), 4);
        assert_abs_diff_eq!(theta[0], 0.1 + 0.5 - 0.2 - 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(theta[1], -0.2 + 0.3 + 0.4 + 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(theta[2], 0.0 + 0.2 - 0.5 - 0.6, epsilon = 1e-15);
    }

    #[test]
    fn prediction_and_transition_examples() {
        let b = HatBasis::new(2, 5).unwrap();
        let m = KineticIsingModel::new(array![[0.5, 0.5]], array![0.0], array![[0.0]], b.clone()).unwrap();
        assert_abs_diff_eq!(m.predict_mean(array![1.0].view(), 0)[0], 0.46212, epsilon = 1e-5);

        let m = KineticIsingModel::new(array![[0.3, 0.3]], array![0.0], array![[0.0]], b.clone()).unwrap();
        let p = m.transition_prob(array![-1.0].view(), array![1.0].view(), 1);
        assert_abs_diff_eq!(p, 0.3f64.exp() / (2.0 * 0.3f64.cosh()), epsilon = 1e-15);
        assert_abs_diff_eq!(p, 0.64566, epsilon = 1e-5);

        let zero = KineticIsingModel::zeros(4, b);
        let p = zero.transition_prob(array![1.0, 1.0, -1.0, 1.0].view(), array![-1.0, 1.0, 1.0, 1.0].view(), 2);
        assert_abs_diff_eq!(p, 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn predict_mean_is_odd_and_monotone() {
        let b = HatBasis::new(2, 5).unwrap();
        let mut last = -1.0;
        for g in [-3.0, -1.0, -0.1, 0.0, 0.2, 2.0] {
            let m = KineticIsingModel::new(array![[g, g]], array![0.0], array![[0.0]], b.clone()).unwrap();
            let neg = KineticIsingModel::new(array![[-g, -g]], array![0.0], array![[0.0]], b.clone()).unwrap();
            let p = m.predict_mean(array![1.0].view(), 0)[0];
            assert_eq!(p, -neg.predict_mean(array![1.0].view(), 0)[0]);
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn rejects_self_coupling() {
        assert!(KineticIsingModel::new(array![[0.0, 0.0]], array![0.0], array![[0.1]], HatBasis::new(2, 5).unwrap()).is_err());
    }
}
