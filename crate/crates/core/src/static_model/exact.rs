//! Exhaustive enumeration over all `2^N` configurations. Only usable for
//! small `N`; serves as the reference for the sampler and the trainer.

use ndarray::{Array1, Array2};

use super::StaticIsingModel;
use crate::error::{Error, Result};
use crate::panel::MomentSet;

pub const ORACLE_LIMIT: usize = 20;

/// Spin configuration for enumeration code `code`: bit `i` set means `+1`.
pub fn config_from_code(code: usize, n: usize) -> Vec<i8> {
    (0..n).map(|i| if code >> i & 1 == 1 { 1 } else { -1 }).collect()
}

fn check_size(model: &StaticIsingModel) -> Result<()> {
    if model.n() > ORACLE_LIMIT {
        return Err(Error::OracleSize {
            n: model.n(),
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// `-energy` for every configuration, indexed by code.
fn exponents(model: &StaticIsingModel) -> Vec<f64> {
    let n = model.n();
    (0..1usize << n)
        .map(|code| -model.energy(&config_from_code(code, n)))
        .collect()
}

pub fn exact_log_partition(model: &StaticIsingModel) -> Result<f64> {
    check_size(model)?;
    let e = exponents(model);
    let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(max + e.iter().map(|x| (x - max).exp()).sum::<f64>().ln())
}

pub fn exact_partition(model: &StaticIsingModel) -> Result<f64> {
    Ok(exact_log_partition(model)?.exp())
}

/// Boltzmann probabilities indexed by configuration code.
pub fn exact_distribution(model: &StaticIsingModel) -> Result<Vec<f64>> {
    let log_z = exact_log_partition(model)?;
    Ok(exponents(model).into_iter().map(|x| (x - log_z).exp()).collect())
}

pub fn exact_moments(model: &StaticIsingModel) -> Result<MomentSet> {
    check_size(model)?;
    let n = model.n();
    let e = exponents(model);
    let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut m1 = Array1::<f64>::zeros(n);
    let mut m2 = Array2::<f64>::zeros((n, n));
    for (code, x) in e.iter().enumerate() {
        let w = (x - max).exp();
        z += w;
        let s = config_from_code(code, n);
        for a in 0..n {
            let wa = w * f64::from(s[a]);
            m1[a] += wa;
            for b in a + 1..n {
                m2[(a, b)] += wa * f64::from(s[b]);
            }
        }
    }
    m1 /= z;
    for a in 0..n {
        m2[(a, a)] = 1.0;
        for b in a + 1..n {
            let v = m2[(a, b)] / z;
            m2[(a, b)] = v;
            m2[(b, a)] = v;
        }
    }
    Ok(MomentSet { m1, m2 })
}
