//! RMSEP against update delay under both protocols.
//!
//! cargo run --release --example delay_sweep

use softsense::harness::{sweep_delay, ModelKind, ModelSpec, UpdateMode, DELAY_GRID};
use softsense::simulator::{generate, SimConfig};

fn main() -> softsense::Result<()> {
    let data = generate(&SimConfig::drifting(0).with_samples(500))?;
    let models = [
        ModelSpec::new(ModelKind::Mmw, 4),
        ModelSpec::new(ModelKind::Pls, 4),
        ModelSpec::new(ModelKind::Rf, 4).with_trees(100),
        ModelSpec::new(ModelKind::RfPls, 4).with_trees(100),
    ];
    for mode in [UpdateMode::Continuous, UpdateMode::Delayed] {
        println!("{} update", mode.name());
        let cells = sweep_delay(&data, &models, &DELAY_GRID, mode, 0);
        for m in &models {
            let row: Vec<String> = cells
                .iter()
                .filter(|c| c.spec.kind == m.kind)
                .map(|c| format!("{:.3}", c.rmsep().unwrap_or(f64::NAN)))
                .collect();
            println!("  {:<6} {}", m.kind, row.join(" "));
        }
    }
    Ok(())
}
