use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear hat basis on the normalized transition index.
///
/// Transition `k = 0..t_len-2` (pairing day `k` with day `k+1`) sits at
/// `tau = k / (t_len - 2)`; basis `m` peaks at `c_m = m / (n_basis - 1)` with
/// half-width `1 / (n_basis - 1)`. Evaluation works in the scaled coordinate
/// `u = tau * (n_basis - 1)`, which keeps peaks and zeros exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HatBasis {
    n_basis: usize,
    t_len: usize,
}

impl HatBasis {
    pub fn new(n_basis: usize, t_len: usize) -> Result<Self> {
        if n_basis < 2 {
            return Err(Error::Config(format!("hat basis needs at least 2 functions, got {n_basis}")));
        }
        if t_len < 3 {
            return Err(Error::Config(format!("hat basis needs a panel of at least 3 days, got {t_len}")));
        }
        Ok(HatBasis { n_basis, t_len })
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    /// Panel length `T` the basis was built for.
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn n_transitions(&self) -> usize {
        self.t_len - 1
    }

    fn scaled_time(&self, k: usize) -> f64 {
        (k * (self.n_basis - 1)) as f64 / (self.t_len - 2) as f64
    }

    /// `phi_m` at transition `k` (both zero-based).
    pub fn value(&self, m: usize, k: usize) -> f64 {
        (1.0 - (self.scaled_time(k) - m as f64).abs()).max(0.0)
    }

    /// The (at most two) nonzero basis values at transition `k`.
    pub fn support(&self, k: usize) -> impl Iterator<Item = (usize, f64)> {
        let u = self.scaled_time(k);
        let lo = (u.floor() as usize).min(self.n_basis - 1);
        let w = u - lo as f64;
        let hi = (lo + 1 < self.n_basis && w > 0.0).then_some((lo + 1, w));
        std::iter::once((lo, 1.0 - w)).filter(|(_, v)| *v > 0.0).chain(hi)
    }

    /// Dense `(t_len - 1) × n_basis` matrix of basis values.
    pub fn matrix(&self) -> Array2<f64> {
        let mut phi = Array2::zeros((self.n_transitions(), self.n_basis));
        for k in 0..self.n_transitions() {
            for (m, v) in self.support(k) {
                phi[(k, m)] = v;
            }
        }
        phi
    }
}

/// Hat basis value for basis `m` at transition `k` (zero-based), for a basis
/// of `n_basis` functions over a panel of `t_len` days.
pub fn basis_value(m: usize, k: usize, n_basis: usize, t_len: usize) -> Result<f64> {
    Ok(HatBasis::new(n_basis, t_len)?.value(m, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn peak_midpoint_and_support() {
        // T = 11 -> tau = k / 9; M = 4 -> centers at u = 0, 1, 2, 3 with u = k / 3
        let b = HatBasis::new(4, 11).unwrap();
        assert_eq!(b.value(1, 3), 1.0);
        assert_eq!(b.value(0, 3), 0.0);
        assert_eq!(b.value(2, 3), 0.0);
        // M = 2, T = 4: tau = k / 2, k = 1 is midway between the two centers
        let b = HatBasis::new(2, 4).unwrap();
        assert_eq!(b.value(0, 1), 0.5);
        assert_eq!(b.value(1, 1), 0.5);
        let b = HatBasis::new(5, 30).unwrap();
        assert_eq!(b.value(4, 0), 0.0);
    }

    #[test]
    fn two_hat_ramp_is_tau() {
        let b = HatBasis::new(2, 12).unwrap();
        for k in 0..11 {
            let tau = k as f64 / 10.0;
            assert_abs_diff_eq!(b.value(1, k), tau, epsilon = 1e-15);
        }
    }

    #[test]
    fn endpoints() {
        let b = HatBasis::new(7, 50).unwrap();
        assert_eq!(b.value(0, 0), 1.0);
        assert_eq!(b.value(6, 48), 1.0);
    }

    #[test]
    fn support_matches_values() {
        let b = HatBasis::new(6, 37).unwrap();
        for k in 0..b.n_transitions() {
            let dense: Vec<f64> = (0..6).map(|m| b.value(m, k)).collect();
            let mut sparse = [0.0; 6];
            for (m, v) in b.support(k) {
                sparse[m] = v;
            }
            for m in 0..6 {
                assert_abs_diff_eq!(dense[m], sparse[m], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(HatBasis::new(1, 10).is_err());
        assert!(HatBasis::new(3, 2).is_err());
    }
}
