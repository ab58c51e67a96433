//! Regenerates the bundled fixture files from the in-code case-study data.

use eip_cli::instance_file::to_toml;
use eip_cli::solution_file::SolutionFile;
use eip_core::fixtures;
use eip_core::model::DerivedConstants;
use std::path::Path;

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let dir = Path::new(&dir);
    std::fs::create_dir_all(dir).unwrap();

    let park15 = fixtures::park15().validate().unwrap();
    let park10 = fixtures::park10().validate().unwrap();
    std::fs::write(dir.join("park15.toml"), to_toml(&park15)).unwrap();
    std::fs::write(dir.join("park10.toml"), to_toml(&park10)).unwrap();

    let derived = DerivedConstants::for_instance(&park15);
    let op = fixtures::park15_reference_operation(&derived);
    let objective: f64 = op.fresh.iter().sum();
    let file = SolutionFile::from_operation(&op, &park15, Some(1e-6), objective);
    std::fs::write(
        dir.join("park15_solution.json"),
        serde_json::to_string_pretty(&file).unwrap(),
    )
    .unwrap();
    println!("fixtures written to {}", dir.display());
}
