use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{logistic, StaticIsingModel};
use crate::error::{Error, Result};
use crate::panel::MomentSet;
use crate::rng;
use crate::stats::Histogram;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    /// Sites visited in index order.
    #[default]
    Systematic,
    /// `N` uniformly random site picks per sweep.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GibbsConfig {
    pub n_chains: usize,
    pub burn_in_sweeps: usize,
    pub sweeps_per_sample: usize,
    /// Samples kept per chain.
    pub n_samples: usize,
    pub seed: u64,
    pub scan: ScanOrder,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            n_chains: 4,
            burn_in_sweeps: 200,
            sweeps_per_sample: 1,
            n_samples: 5_000,
            seed: 0,
            scan: ScanOrder::Systematic,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_chains == 0 || self.sweeps_per_sample == 0 || self.n_samples == 0 {
            return Err(Error::Config(
                "gibbs: n_chains, sweeps_per_sample and n_samples must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn total_samples(&self) -> usize {
        self.n_chains * self.n_samples
    }
}

struct Chain<'a> {
    model: &'a StaticIsingModel,
    spins: Array1<f64>,
    rng: ChaCha8Rng,
    scan: ScanOrder,
}

impl<'a> Chain<'a> {
    fn new(model: &'a StaticIsingModel, cfg: &GibbsConfig, chain: usize) -> Self {
        let mut rng = rng::stream(cfg.seed, chain as u64);
        let spins = (0..model.n())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Chain {
            model,
            spins,
            rng,
            scan: cfg.scan,
        }
    }

    fn update(&mut self, i: usize) {
        let p_up = logistic(2.0 * self.model.local_field(self.spins.view(), i));
        self.spins[i] = if self.rng.random::<f64>() < p_up { 1.0 } else { -1.0 };
    }

    fn sweep(&mut self) {
        let n = self.model.n();
        match self.scan {
            ScanOrder::Systematic => (0..n).for_each(|i| self.update(i)),
            ScanOrder::Random => {
                for _ in 0..n {
                    let i = self.rng.random_range(0..n);
                    self.update(i);
                }
            }
        }
    }

    /// Burns in, then calls `visit` on every retained state.
    fn run(mut self, cfg: &GibbsConfig, mut visit: impl FnMut(&Array1<f64>)) {
        for _ in 0..cfg.burn_in_sweeps {
            self.sweep();
        }
        for _ in 0..cfg.n_samples {
            for _ in 0..cfg.sweeps_per_sample {
                self.sweep();
            }
            visit(&self.spins);
        }
    }
}

/// Runs `n_chains` independent heat-bath chains and returns the retained
/// states, chain-major (`n_chains * n_samples` rows).
pub fn sample_chain(model: &StaticIsingModel, cfg: &GibbsConfig) -> Result<Array2<i8>> {
    cfg.validate()?;
    let n = model.n();
    let per_chain: Vec<Vec<i8>> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::with_capacity(cfg.n_samples * n);
            Chain::new(model, cfg, c).run(cfg, |s| out.extend(s.iter().map(|&v| v as i8)));
            out
        })
        .collect();
    Array2::from_shape_vec((cfg.total_samples(), n), per_chain.concat())
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Integer sufficient statistics of one chain, so merging is exact.
struct MomentSums {
    first: Vec<i64>,
    /// Upper triangle, row-major.
    second: Vec<i64>,
}

impl MomentSums {
    fn new(n: usize) -> Self {
        MomentSums {
            first: vec![0; n],
            second: vec![0; n * (n.saturating_sub(1)) / 2],
        }
    }

    fn add(&mut self, s: &Array1<f64>) {
        let n = s.len();
        let mut k = 0;
        for a in 0..n {
            let sa = s[a] as i64;
            self.first[a] += sa;
            for b in a + 1..n {
                self.second[k] += sa * s[b] as i64;
                k += 1;
            }
        }
    }

    fn merge(mut self, other: &MomentSums) -> Self {
        self.first.iter_mut().zip(&other.first).for_each(|(x, y)| *x += y);
        self.second.iter_mut().zip(&other.second).for_each(|(x, y)| *x += y);
        self
    }
}

/// Sample moments of the Gibbs output.
pub fn model_moments_mc(model: &StaticIsingModel, cfg: &GibbsConfig) -> Result<MomentSet> {
    cfg.validate()?;
    let n = model.n();
    let per_chain: Vec<MomentSums> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|c| {
            let mut sums = MomentSums::new(n);
            Chain::new(model, cfg, c).run(cfg, |s| sums.add(s));
            sums
        })
        .collect();
    let total = per_chain.iter().fold(MomentSums::new(n), |acc, s| acc.merge(s));
    let count = cfg.total_samples() as f64;
    let m1 = total.first.iter().map(|&v| v as f64 / count).collect();
    let mut m2 = Array2::from_elem((n, n), 1.0);
    let mut k = 0;
    for a in 0..n {
        for b in a + 1..n {
            let v = total.second[k] as f64 / count;
            m2[(a, b)] = v;
            m2[(b, a)] = v;
            k += 1;
        }
    }
    Ok(MomentSet { m1, m2 })
}

/// Histogram of `(1/N) Σ s_i` over equilibrium samples.
pub fn model_breadth_distribution(model: &StaticIsingModel, cfg: &GibbsConfig, bins: usize) -> Result<Histogram> {
    let samples = sample_chain(model, cfg)?;
    let n = model.n() as f64;
    let breadths = samples
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|&v| f64::from(v)).sum::<f64>() / n);
    Ok(Histogram::with_range(breadths, bins, -1.0, 1.0))
}
