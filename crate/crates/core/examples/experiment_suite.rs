// Runs a named suite from a JSON config and prints where the reports went.
//
//     cargo run --example experiment_suite -- eulerian

use covergff::experiments::{run_experiment, ExperimentConfig};

fn main() -> covergff::Result<()> {
    let suite = std::env::args().nth(1).unwrap_or_else(|| "smoke".into());
    let dir = std::env::temp_dir().join(format!("covergff-{suite}"));
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{ "suite": "{suite}", "seed": 7, "output_dir": {:?}, "samples": {{ "walk": 2000, "cover": 200 }} }}"#,
        dir
    ))?;
    let out = run_experiment(&cfg)?;
    for row in &out.report.rows {
        println!("{:<5} {:<40} {}", if row.pass { "pass" } else { "FAIL" }, row.check, row.value);
    }
    println!("\n{}\n{}\n{}", out.csv_path.display(), out.json_path.display(), out.manifest_path.display());
    Ok(())
}
