//! Rotation error under zero-intersection sampling as the parent gets denser.

use umereg::bench::config::ExperimentConfig;
use umereg::bench::run_experiment;

fn main() -> umereg::Result<()> {
    let config = ExperimentConfig::parse(
        "noise = zero-intersection\ntrials = 20\nseed = 5\nmethods = ume\ndensity_sweep = 1000, 4000, 16000\n",
    )?;
    let report = run_experiment(&config)?;
    println!("n_parent  rmse_rotation_deg  chamfer");
    for (i, s) in report.scenarios.iter().enumerate() {
        let row = report.row("ume", i).expect("row per scenario");
        println!("{:>8}  {:>17.3}  {:.4}", s.n_parent, row.rmse_rotation_deg, row.chamfer);
    }
    Ok(())
}
