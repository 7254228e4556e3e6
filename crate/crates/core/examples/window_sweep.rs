//! RMSEP against window size on the drifting simulation.
//!
//! cargo run --release --example window_sweep

use softsense::harness::{
    spearman, sweep_window_size, ModelKind, ModelSpec, UpdatePolicy, WINDOW_GRID,
};
use softsense::simulator::{generate, SimConfig};

fn main() -> softsense::Result<()> {
    let data = generate(&SimConfig::drifting(0).with_samples(800))?;
    let models = [
        ModelSpec::new(ModelKind::Mmw, 4),
        ModelSpec::new(ModelKind::Pls, 4),
        ModelSpec::new(ModelKind::Rpls, 4),
        ModelSpec::new(ModelKind::Rf, 4).with_trees(100),
    ];
    let cells = sweep_window_size(&data, &models, &WINDOW_GRID, UpdatePolicy::one_step(), 0);

    print!("window");
    for m in &models {
        print!("{:>9}", m.kind);
    }
    println!();
    for (i, w) in WINDOW_GRID.iter().enumerate() {
        print!("{w:>6}");
        for j in 0..models.len() {
            print!(
                "{:>9.4}",
                cells[j * WINDOW_GRID.len() + i].rmsep().unwrap_or(f64::NAN)
            );
        }
        println!();
    }
    let sizes: Vec<f64> = WINDOW_GRID.iter().map(|&w| w as f64).collect();
    let pls: Vec<f64> = cells[WINDOW_GRID.len()..2 * WINDOW_GRID.len()]
        .iter()
        .map(|c| c.rmsep().unwrap_or(f64::NAN))
        .collect();
    println!(
        "Spearman rho between window size and PLS RMSEP: {:.3}",
        spearman(&sizes, &pls)
    );
    Ok(())
}
