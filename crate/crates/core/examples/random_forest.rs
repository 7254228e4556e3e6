//! A random forest on four samples, and the range it cannot leave.
//!
//! cargo run --example random_forest

use softsense::ensemble::{Forest, ForestConfig};
use softsense::Matrix;

fn main() -> softsense::Result<()> {
    let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 1.5], [2.0, 2.0], [3.0, 2.4]])?;
    let y = [10.0, 11.0, 12.0, 13.0];
    let forest = Forest::fit(&x, &y, &ForestConfig::default(), 42)?;
    println!("{} trees, mtry {}", forest.n_trees(), forest.mtry());

    for probe in [[1.5, 1.7], [3.0, 2.4], [10.0, 5.0], [-10.0, -5.0]] {
        println!("x = {probe:?} -> {:.3}", forest.predict(&probe)?);
    }
    // the sensors keep rising past the window, the prediction stays at or below 13
    Ok(())
}
