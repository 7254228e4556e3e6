//! Recursive PLS: the model is rebuilt each step from the new window and
//! the previous model's loadings, weighted by a forgetting factor.
//!
//! cargo run --example recursive_pls

use softsense::pls::fit_pls_auto;
use softsense::rpls::RplsState;
use softsense::simulator::{generate, SimConfig};

fn main() -> softsense::Result<()> {
    let data = generate(&SimConfig::drifting(3).with_samples(200))?;
    let w = 4;
    let window = |end: usize| {
        (
            data.x().row_range(end + 1 - w, end + 1),
            data.y()[end + 1 - w..=end].to_vec(),
        )
    };

    for lambda in [0.0, 0.05, 0.5] {
        let (x, y) = window(w - 1);
        let mut state = RplsState::init(&x, &y, lambda)?;
        let (mut sse_rpls, mut sse_pls, mut n) = (0.0, 0.0, 0);
        for end in w..data.n_samples() - 1 {
            let (x, y) = window(end);
            state = state.update(&x, &y)?;
            let probe = data.x().row(end + 1);
            let truth = data.y()[end + 1];
            sse_rpls += (state.predict(probe)? - truth).powi(2);
            sse_pls += (fit_pls_auto(&x, &y)?.predict(probe)? - truth).powi(2);
            n += 1;
        }
        println!(
            "lambda {lambda:<4}  RPLS RMSEP {:.4}  (PLS on the window alone {:.4})",
            (sse_rpls / n as f64).sqrt(),
            (sse_pls / n as f64).sqrt()
        );
    }
    Ok(())
}
