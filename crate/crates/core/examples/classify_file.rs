//! Classifies a configuration file, or a solved geodesic CC written to a
//! temporary file when no path is given.
//!
//! `cargo run --example classify_file -- config.json`

use h2cc::geodesic::{solve_geodesic, Ordering};
use h2cc::io::{configuration_json, load_configuration, to_json};
use h2cc::search::classify;

fn main() -> h2cc::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            let g = solve_geodesic(&[1.0, 2.0, 3.0], &Ordering::new(vec![1, 0, 2])?, 1.0)?;
            let p = std::env::temp_dir().join("h2cc_example_cc.json");
            std::fs::write(&p, to_json(&configuration_json(&g.configuration()?))).expect("temp dir is writable");
            p
        }
    };
    let r = classify(&load_configuration(&path)?, None)?;
    println!("{}", path.display());
    println!("residual {:.2e}, lambda {:+.10}, U {:.10}", r.residual, r.lambda, r.u_value);
    println!("index {}, nullity {}, degenerate {}", r.index(), r.nullity(), r.degenerate());
    match &r.ordering {
        Some(o) => println!("geodesic, ordering {o}"),
        None => println!("not geodesic"),
    }
    Ok(())
}
