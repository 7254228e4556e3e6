//! Loading a benchmark CSV with its preprocessing and running the
//! one-step-ahead comparison.
//!
//! cargo run --release --example load_benchmark -- debutanizer.csv y
//!
//! Without arguments a simulated file is written and read back. The public
//! debutanizer and SRU files are whitespace separated; convert them first,
//! e.g. `tr -s ' \t' ',' < debutanizer_data.txt > debutanizer.csv`.

use softsense::harness::{run_series_from, ModelKind, ModelSpec, UpdatePolicy};
use softsense::simulator::{generate, SimConfig};
use softsense::{Dataset, Preprocessing};

fn main() -> softsense::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = tempfile::tempdir()?;
    let (path, column, prep) = match args.as_slice() {
        [path, column, ..] => (path.into(), column.clone(), Preprocessing::DEBUTANIZER),
        _ => {
            let path = dir.path().join("drifting.csv");
            generate(&SimConfig::drifting(9).with_samples(400))?.write_csv(&path)?;
            (path, "y".to_string(), Preprocessing::default())
        }
    };

    let raw = Dataset::load_csv(&path, column.as_str())?;
    let (data, start) = prep.apply(&raw)?;
    println!(
        "{}: {} samples x {} sensors, property {:?}, scoring from sample {start}",
        path.display(),
        data.n_samples(),
        data.n_variables(),
        data.y_name()
    );
    for kind in ModelKind::ALL {
        let spec = ModelSpec::new(kind, 4).with_lambda(0.01).with_trees(200);
        let run = run_series_from(&data, &spec, UpdatePolicy::one_step(), start)?;
        println!(
            "{kind:<6} RMSEP {:.4}  ({} predictions, {} flagged)",
            run.rmsep, run.n_predictions, run.n_flagged
        );
    }
    Ok(())
}
