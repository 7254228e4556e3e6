//! The RF-PLS hybrid on a rising property: an inner PLS estimate of the
//! unknown joins the forest's training rows, so the forest can follow the
//! trend out of the window range.
//!
//! cargo run --release --example rfpls_hybrid

use softsense::ensemble::Forest;
use softsense::rfpls::{fit_predict_rfpls, RfPlsConfig};
use softsense::simulator::{generate, SimConfig};

fn main() -> softsense::Result<()> {
    let data = generate(&SimConfig::monotonic(5))?;
    let cfg = RfPlsConfig::for_window(4);
    println!("   t   window max   truth      RF       RF-PLS   inner PLS");
    for t in (60..260).step_by(40) {
        let x = data.x().row_range(t - 4, t);
        let y = &data.y()[t - 4..t];
        let unknown = data.x().row(t);
        let rf = Forest::fit(&x, y, &cfg.forest, t as u64)?.predict(unknown)?;
        let hybrid = fit_predict_rfpls(&x, y, unknown, &cfg, t as u64)?;
        println!(
            "{t:>4}   {:.5}     {:.5}   {rf:.5}   {:.5}   {:.5}",
            y[3],
            data.y()[t],
            hybrid.prediction,
            hybrid.pls_inner.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
