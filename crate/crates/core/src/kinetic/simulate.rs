use ndarray::Array2;
use rand::Rng;

use super::KineticIsingModel;
use crate::error::{Error, Result};
use crate::panel::SpinPanel;

/// Runs the synchronous dynamics from `s0` for `steps` transitions and
/// returns the `steps + 1` day trajectory (synthetic dates, model tickers).
///
/// Step `k` uses the external field of transition `k`, so `steps` may not
/// exceed the basis' transition count.
pub fn simulate(model: &KineticIsingModel, s0: &[i8], steps: usize, seed: u64) -> Result<SpinPanel> {
    let n = model.n();
    if s0.len() != n {
        return Err(Error::InvalidInput(format!("initial state has {} spins, model has {n}", s0.len())));
    }
    if s0.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidInput("initial state must contain only +1/-1".into()));
    }
    let max = model.basis().n_transitions();
    if steps > max {
        return Err(Error::InvalidInput(format!(
            "cannot simulate {steps} steps with a basis covering {max} transitions"
        )));
    }
    let mut rng = crate::rng::stream(seed, 0);
    let mut spins = Array2::<i8>::zeros((steps + 1, n));
    spins.row_mut(0).assign(&ndarray::ArrayView1::from(s0));
    let mut state: ndarray::Array1<f64> = s0.iter().map(|&s| f64::from(s)).collect();
    for k in 0..steps {
        let theta = model.effective_field(state.view(), k);
        for i in 0..n {
            let p_up = 0.5 * (1.0 + theta[i].tanh());
            let s = if rng.random::<f64>() < p_up { 1 } else { -1 };
            spins[(k + 1, i)] = s;
            state[i] = f64::from(s);
        }
    }
    let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let dates = start.iter_days().take(steps + 1).collect();
    SpinPanel::new(dates, model.tickers().to_vec(), spins)
}
