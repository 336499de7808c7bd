//! Drive the experiment runner from code: parse a bundled config, run it and print the summary.

use ionphonon::cli::{execute, ExperimentConfig};

fn main() -> ionphonon::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/noon.json");
    let cfg = ExperimentConfig::from_path(std::path::Path::new(path))?;
    let bundle = execute(&cfg)?;
    print!("{}", bundle.summary_json());
    for t in &bundle.tables {
        println!("table {} with {} rows", t.file_name(), t.rows.len());
    }
    Ok(())
}
