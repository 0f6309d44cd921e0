//! Exact enumeration for a small static model: partition function, moments
//! and the most probable configurations.

use market_ising::static_model::{config_from_code, exact_distribution, exact_log_partition, exact_moments, StaticIsingModel};
use ndarray::array;

fn main() -> market_ising::Result<()> {
    // Two ferromagnetic pairs joined by a weak antiferromagnetic link.
    let h = array![0.2, 0.1, -0.1, -0.3];
    let j = array![
        [0.0, 0.6, -0.1, 0.0],
        [0.6, 0.0, 0.0, 0.0],
        [-0.1, 0.0, 0.0, 0.5],
        [0.0, 0.0, 0.5, 0.0],
    ];
    let model = StaticIsingModel::new(h, j)?;

    println!("log Z = {:.6}", exact_log_partition(&model)?);
    let m = exact_moments(&model)?;
    println!("<s_i>      = {:.4}", m.m1);
    println!("corr(0, 1) = {:.4}", m.correlation(0, 1));
    println!("corr(0, 2) = {:.4}", m.correlation(0, 2));

    let p = exact_distribution(&model)?;
    let mut codes: Vec<usize> = (0..p.len()).collect();
    codes.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
    println!("\nmost probable states:");
    for &c in codes.iter().take(4) {
        println!("  {:?}  p = {:.4}", config_from_code(c, model.n()), p[c]);
    }
    Ok(())
}
