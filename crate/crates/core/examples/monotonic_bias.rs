//! One-step-ahead table on a monotonic process. The forest can only return
//! values it has seen, so on a rising property it always lags.
//!
//! cargo run --release --example monotonic_bias

use softsense::harness::{run_series, ModelKind, ModelSpec, UpdatePolicy};
use softsense::simulator::{generate, SimConfig};

fn main() -> softsense::Result<()> {
    let data = generate(&SimConfig::monotonic(2024))?;
    println!("model    RMSEP     mean error   below truth");
    for kind in ModelKind::ALL {
        let spec = ModelSpec::new(kind, 4)
            .with_lambda(0.10)
            .with_trees(300)
            .with_seed(1);
        let run = run_series(&data, &spec, UpdatePolicy::one_step())?;
        let below = run
            .records
            .iter()
            .filter(|r| r.prediction <= r.truth)
            .count();
        println!(
            "{kind:<6} {:.6}  {:+.6}    {below}/{}",
            run.rmsep,
            run.mean_signed_error(),
            run.n_predictions
        );
    }
    Ok(())
}
