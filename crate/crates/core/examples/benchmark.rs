//! A small benchmark run from an in-memory config, printed as markdown.

use umereg::bench::config::ExperimentConfig;
use umereg::bench::report::format_markdown;
use umereg::bench::run_experiment;

const CONFIG: &str = "
# two shapes, random partial overlap
datasets = synthetic:blob, synthetic:cuboid
n_parent = 1024
trials = 10
seed = 42
noise = bernoulli
methods = ume, icp
";

fn main() -> umereg::Result<()> {
    let config = ExperimentConfig::parse(CONFIG)?;
    let report = run_experiment(&config)?;
    print!("{}", format_markdown(&report));
    Ok(())
}
