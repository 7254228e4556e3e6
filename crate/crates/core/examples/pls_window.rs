//! PLS on a single small window: pick the component count by leave-one-out
//! and predict the next sample.
//!
//! cargo run --example pls_window

use softsense::pls::{fit_pls, select_latent_loo};
use softsense::simulator::{generate, SimConfig};

fn main() -> softsense::Result<()> {
    let data = generate(&SimConfig::drifting(1).with_samples(100))?;
    let (w, t) = (6, 50);
    let x = data.x().row_range(t - w, t);
    let y = &data.y()[t - w..t];

    let cv = select_latent_loo(&x, y)?;
    for (k, rmsep) in &cv.per_k_rmsep {
        println!("k = {k}: leave-one-out RMSEP {rmsep:.4}");
    }
    let model = fit_pls(&x, y, cv.chosen_latent)?;
    let next = model.predict(data.x().row(t))?;
    println!(
        "chose k = {}; predicted {next:.4}, measured {:.4}",
        model.n_latent(),
        data.y()[t]
    );
    println!("coefficients {:?}", model.coefficients().as_slice());
    Ok(())
}
