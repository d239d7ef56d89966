use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use umereg::bench::{self, ExperimentConfig, NoisePreset, ParentSource, ReportFormat};
use umereg::geom::{apply_transform, RigidTransform};
use umereg::icp::{icp, IcpConfig};
use umereg::io::umef::fmt_f64 as fmt;
use umereg::io::{load_cloud, read_transform, read_umef, write_transform, write_umef, write_xyz};
use umereg::metrics::chamfer_hausdorff;
use umereg::solver::{canonical_bundles, register_ume, register_with_external, BankConfig, RegistrationResult};
use umereg::Result;

#[derive(Parser)]
#[command(name = "umereg", version, about = "Closed-form rigid point cloud registration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ume,
    Icp,
    External,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the transform mapping SRC onto DST.
    Register {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        dst: PathBuf,
        #[arg(long, value_enum, default_value = "ume")]
        method: MethodArg,
        #[arg(long, required_if_eq("method", "external"))]
        umef_src: Option<PathBuf>,
        #[arg(long, required_if_eq("method", "external"))]
        umef_dst: Option<PathBuf>,
        #[arg(long, default_value_t = umereg::ume::DEFAULT_BINS)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a noisy registration pair from a mesh or cloud.
    Synth {
        /// Mesh or cloud file, or synthetic:blob / synthetic:cuboid.
        #[arg(long)]
        mesh: String,
        #[arg(long, default_value = "vanilla")]
        noise: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2048)]
        n_parent: usize,
        /// Writes PREFIX_src.xyz, PREFIX_dst.xyz and PREFIX_gt.json.
        #[arg(long)]
        out_prefix: String,
    },
    /// Run a benchmark described by a key=value config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Report path; a .md extension selects markdown. A per-trial CSV is written alongside.
        #[arg(long)]
        out: PathBuf,
    },
    /// Chamfer and Hausdorff distances between two clouds.
    Metrics {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        dst: PathBuf,
        /// Transform applied to SRC before comparing.
        #[arg(long)]
        gt: Option<PathBuf>,
    },
    /// Write canonical-frame coordinates and UMEF skeletons for a pair.
    ExportCanon {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        dst: PathBuf,
        #[arg(long, default_value_t = umereg::ume::DEFAULT_BINS)]
        bins: usize,
        /// Writes PREFIX_{1,2}.xyz, PREFIX_{1,2}.umef and PREFIX_frames.json.
        #[arg(long)]
        out_prefix: String,
    },
}

fn print_result(r: &RegistrationResult) {
    let t = &r.transform;
    for i in 0..3 {
        println!(
            "R[{i}] = {} {} {}",
            fmt(t.rotation[(i, 0)]),
            fmt(t.rotation[(i, 1)]),
            fmt(t.rotation[(i, 2)])
        );
    }
    println!("t    = {} {} {}", fmt(t.translation.x), fmt(t.translation.y), fmt(t.translation.z));
    println!("residual = {}", r.residual);
    if let Some(c) = r.chosen_constellation {
        println!("constellation = {c}");
    }
    if let Some(it) = r.iterations {
        println!("iterations = {it}");
    }
    if !r.flags.is_empty() {
        println!("flags = {:?}", r.flags);
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}{suffix}"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Register { src, dst, method, umef_src, umef_dst, bins, out } => {
            let p1 = load_cloud(&src)?;
            let p2 = load_cloud(&dst)?;
            let result = match method {
                MethodArg::Ume => register_ume(&p1, &p2, &BankConfig::PooledQuantile { bins })?,
                MethodArg::Icp => icp(&p1, &p2, &IcpConfig::default())?,
                MethodArg::External => {
                    let b1 = read_umef(umef_src.expect("required by clap"))?;
                    let b2 = read_umef(umef_dst.expect("required by clap"))?;
                    register_with_external(&p1, &p2, &b1, &b2)?
                }
            };
            write_transform(&result.transform, &out)?;
            print_result(&result);
        }
        Command::Synth { mesh, noise, seed, n_parent, out_prefix } => {
            let config = ExperimentConfig {
                datasets: vec![bench::Dataset::parse(&mesh)?],
                n_parent,
                seed,
                noise: NoisePreset::parse(&noise)?,
                ..ExperimentConfig::default()
            };
            config.validate()?;
            let source = ParentSource::load(&config.datasets[0])?;
            let pair = bench::make_pair(&config, &source, n_parent, &mut bench::trial_rng(seed, 0, 0))?;
            write_xyz(&pair.source, format!("{out_prefix}_src.xyz"))?;
            write_xyz(&pair.target, format!("{out_prefix}_dst.xyz"))?;
            write_transform(&pair.ground_truth, format!("{out_prefix}_gt.json"))?;
            println!("noise = {:?}", pair.noise);
            println!("points = {} {}", pair.source.len(), pair.target.len());
        }
        Command::Bench { config, out } => {
            let config = ExperimentConfig::load(&config)?;
            let report = bench::run_experiment(&config)?;
            bench::emit_report(&report, ReportFormat::from_path(&out), &out)?;
            bench::emit_trials_csv(&report, sibling(&out, ".trials.csv"))?;
            print!("{}", bench::report::format_markdown(&report));
        }
        Command::Metrics { src, dst, gt } => {
            let mut p1 = load_cloud(&src)?;
            let p2 = load_cloud(&dst)?;
            let t: RigidTransform = match gt {
                Some(path) => read_transform(path)?,
                None => RigidTransform::identity(),
            };
            p1 = apply_transform(&p1, &t);
            let (c, h) = chamfer_hausdorff(&p1, &p2)?;
            println!("chamfer = {c}");
            println!("hausdorff = {h}");
        }
        Command::ExportCanon { src, dst, bins, out_prefix } => {
            let p1 = load_cloud(&src)?;
            let p2 = load_cloud(&dst)?;
            let (frames, b1, b2) = canonical_bundles(&p1, &p2, &BankConfig::PooledQuantile { bins })?;
            write_xyz(&b1.coords, format!("{out_prefix}_1.xyz"))?;
            write_xyz(&b2.coords, format!("{out_prefix}_2.xyz"))?;
            write_umef(&b1, format!("{out_prefix}_1.umef"))?;
            write_umef(&b2, format!("{out_prefix}_2.umef"))?;
            let frame_json = |f: &umereg::canon::CanonicalFrame| {
                let axes: Vec<String> = (0..3)
                    .flat_map(|i| (0..3).map(move |j| (i, j)))
                    .map(|(i, j)| fmt(f.axes[(i, j)]))
                    .collect();
                let c: Vec<String> = f.centroid.iter().copied().map(fmt).collect();
                format!("{{\"centroid\": [{}], \"axes\": [{}]}}", c.join(", "), axes.join(", "))
            };
            std::fs::write(
                format!("{out_prefix}_frames.json"),
                format!(
                    "{{\n  \"constellation\": {},\n  \"frame1\": {},\n  \"frame2\": {}\n}}\n",
                    frames.disambiguation.index,
                    frame_json(&frames.frame1),
                    frame_json(&frames.frame2)
                ),
            )?;
            println!("constellation = {}", frames.disambiguation.index);
            println!("chamfer = {}", frames.disambiguation.chamfer);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
