//! Running a configured experiment from code and writing its artifacts,
//! the same path the command-line tool takes.

use std::time::Instant;

use qntk_lab::experiments::{emit, run, ExperimentConfig, ExperimentKind};

fn main() -> qntk_lab::Result<()> {
    let cfg = ExperimentConfig::desk(ExperimentKind::CurseQnn)
        .set("trials=20")?
        .set("n_qubits=5")?;
    let start = Instant::now();
    let artifacts = run(&cfg)?;
    let dir = std::env::temp_dir().join("qntk-lab-example");
    for path in emit(&dir, &cfg, &artifacts, start.elapsed())? {
        println!("wrote {}", path.display());
    }
    println!("{}", serde_json::to_string_pretty(&artifacts.summary)?);
    Ok(())
}
