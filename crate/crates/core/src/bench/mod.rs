//! Seeded registration experiments over synthetic or file-based shapes.
//!
//! Every trial draws from its own ChaCha stream keyed by scenario and trial
//! index, and results are gathered in index order, so reports do not depend
//! on the worker count.

pub mod config;
pub mod report;

use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{apply_transform, normalize_unit_sphere, random_rigid, PointCloud, RigidTransform};
use crate::icp::{icp, IcpConfig};
use crate::io::formats::{load_geometry, Format, Geometry};
use crate::io::{read_umef, write_transform, write_xyz};
use crate::mesh::{sample_mesh, Mesh};
use crate::metrics::{chamfer_hausdorff, euler_error, pooled_rmse_rotation, pooled_rmse_translation, rmse_translation, EulerError};
use crate::noise::NoiseSpec;
use crate::solver::{register_ume, register_with_external, BankConfig, DegeneracyFlag, RegistrationResult};

pub use config::{Dataset, ExperimentConfig, Method, NoisePreset};
pub use report::{emit_report, emit_trials_csv, ReportFormat};

/// Where parent clouds come from.
#[derive(Debug, Clone)]
pub enum ParentSource {
    Mesh(Mesh),
    /// Parents are random subsets of a fixed cloud.
    Cloud(PointCloud),
}

impl ParentSource {
    pub fn load(dataset: &Dataset) -> Result<Self> {
        if let Some(mesh) = dataset.builtin_mesh() {
            return Ok(Self::Mesh(mesh));
        }
        let Dataset::File(path) = dataset else { unreachable!() };
        Ok(match load_geometry(path, Format::from_path(path)?)? {
            Geometry::Mesh(m) => Self::Mesh(m),
            Geometry::Cloud(c) => Self::Cloud(c),
        })
    }

    /// A parent of `n` points with ids `0..n`, scaled into the unit sphere.
    pub fn parent<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PointCloud> {
        let raw = match self {
            Self::Mesh(m) => sample_mesh(m, n, rng)?,
            Self::Cloud(c) => {
                if n > c.len() {
                    return Err(Error::Config(format!("cannot draw {n} points from a {}-point cloud", c.len())));
                }
                let mut picked = index::sample(rng, c.len(), n).into_vec();
                picked.sort_unstable();
                PointCloud::with_sequential_ids(picked.iter().map(|&i| c.points()[i]).collect())?
            }
        };
        Ok(normalize_unit_sphere(&raw)?.cloud)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub dataset: Dataset,
    pub n_parent: usize,
    pub name: String,
}

/// The pair a trial registers.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPair {
    pub source: PointCloud,
    pub target: PointCloud,
    pub ground_truth: RigidTransform,
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub chamfer: f64,
    pub hausdorff: f64,
    pub euler: EulerError,
    pub rmse_translation: f64,
    pub chosen_constellation: Option<usize>,
    pub flags: Vec<DegeneracyFlag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scenario: usize,
    pub trial: usize,
    pub method: String,
    pub outcome: std::result::Result<TrialMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub scenario: String,
    pub chamfer: f64,
    pub hausdorff: f64,
    pub rmse_rotation_deg: f64,
    pub rmse_translation: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scenarios: Vec<Scenario>,
    pub rows: Vec<ReportRow>,
    pub trials: Vec<TrialRecord>,
}

impl MetricsReport {
    pub fn row(&self, method: &str, scenario: usize) -> Option<&ReportRow> {
        let name = &self.scenarios.get(scenario)?.name;
        self.rows.iter().find(|r| r.method == method && &r.scenario == name)
    }
}

pub fn scenarios(config: &ExperimentConfig) -> Vec<Scenario> {
    let noise = config.noise.name();
    config
        .datasets
        .iter()
        .flat_map(|d| {
            config.parent_sizes().into_iter().map(move |n| (d.clone(), n))
        })
        .map(|(dataset, n_parent)| Scenario {
            name: format!("{} {} n={}", dataset.name(), noise, n_parent),
            dataset,
            n_parent,
        })
        .collect()
}

/// Stream of trial `trial` in scenario `scenario`.
pub fn trial_rng(seed: u64, scenario: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((scenario as u64) << 32) | trial as u64);
    rng
}

/// Parent sampling, random rigid motion, shuffle of the target, then noise.
pub fn make_pair<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    source: &ParentSource,
    n_parent: usize,
    rng: &mut R,
) -> Result<TrialPair> {
    let mut n = n_parent;
    if matches!(config.noise, NoisePreset::Fixed(NoiseSpec::ZeroIntersection)) && n % 2 == 1 {
        n -= 1;
    }
    let parent = source.parent(n, rng)?;
    let gt = random_rigid(rng, config.euler_range_deg, config.trans_range);
    let moved = apply_transform(&parent, &gt);
    let mut order: Vec<usize> = (0..moved.len()).collect();
    order.shuffle(rng);
    let moved = moved.select(&order);
    let noise = config.noise.draw(rng);
    let (src, dst) = noise.apply(&parent, &moved, rng)?;
    Ok(TrialPair {
        source: src,
        target: dst,
        ground_truth: gt,
        noise,
    })
}

/// Runs one method on a pair.
pub fn run_method(
    config: &ExperimentConfig,
    method: &Method,
    pair: &TrialPair,
    scenario: usize,
    trial: usize,
) -> Result<RegistrationResult> {
    match method {
        Method::Ume => register_ume(&pair.source, &pair.target, &BankConfig::PooledQuantile { bins: config.bins }),
        Method::Icp => icp(
            &pair.source,
            &pair.target,
            &IcpConfig {
                max_iterations: config.icp_max_iterations,
                convergence_tol: config.icp_tol,
                ..IcpConfig::default()
            },
        ),
        Method::External(pattern) => {
            let b1 = read_umef(Method::bundle_path(pattern, scenario, trial, 1))?;
            let b2 = read_umef(Method::bundle_path(pattern, scenario, trial, 2))?;
            register_with_external(&pair.source, &pair.target, &b1, &b2)
        }
    }
}

/// Distances of the aligned source to the target plus pose errors.
pub fn score(pair: &TrialPair, result: &RegistrationResult) -> Result<TrialMetrics> {
    let aligned = apply_transform(&pair.source, &result.transform);
    let (chamfer, hausdorff) = chamfer_hausdorff(&aligned, &pair.target)?;
    Ok(TrialMetrics {
        chamfer,
        hausdorff,
        euler: euler_error(&pair.ground_truth.rotation, &result.transform.rotation),
        rmse_translation: rmse_translation(&pair.ground_truth.translation, &result.transform.translation),
        chosen_constellation: result.chosen_constellation,
        flags: result.flags.iter().copied().collect(),
    })
}

fn write_pair(dir: &Path, scenario: usize, trial: usize, pair: &TrialPair) -> Result<()> {
    let stem = dir.join(format!("{scenario}_{trial}"));
    write_xyz(&pair.source, format!("{}_1.xyz", stem.display()))?;
    write_xyz(&pair.target, format!("{}_2.xyz", stem.display()))?;
    write_transform(&pair.ground_truth, format!("{}_gt.json", stem.display()))
}

fn run_trial(
    config: &ExperimentConfig,
    sources: &[ParentSource],
    scenarios: &[Scenario],
    scenario: usize,
    trial: usize,
) -> Vec<TrialRecord> {
    let mut rng = trial_rng(config.seed, scenario, trial);
    let dataset = scenario / config.parent_sizes().len();
    let pair = make_pair(config, &sources[dataset], scenarios[scenario].n_parent, &mut rng).and_then(|pair| {
        if let Some(dir) = &config.pair_dir {
            write_pair(dir, scenario, trial, &pair)?;
        }
        Ok(pair)
    });
    config
        .methods
        .iter()
        .map(|method| {
            let outcome = match &pair {
                Ok(pair) => run_method(config, method, pair, scenario, trial).and_then(|r| score(pair, &r)),
                Err(e) => Err(Error::InvalidInput(format!("trial setup failed: {e}"))),
            };
            TrialRecord {
                scenario,
                trial,
                method: method.name().to_string(),
                outcome: outcome.map_err(|e| e.to_string()),
            }
        })
        .collect()
}

pub fn aggregate(config: &ExperimentConfig, scenarios: &[Scenario], trials: &[TrialRecord]) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for method in &config.methods {
        for (s, scenario) in scenarios.iter().enumerate() {
            let records: Vec<&TrialRecord> = trials
                .iter()
                .filter(|t| t.scenario == s && t.method == method.name())
                .collect();
            let ok: Vec<&TrialMetrics> = records.iter().filter_map(|t| t.outcome.as_ref().ok()).collect();
            let mean = |f: &dyn Fn(&TrialMetrics) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|m| f(m)).sum::<f64>() / ok.len() as f64
                }
            };
            let euler: Vec<EulerError> = ok.iter().map(|m| m.euler).collect();
            let trans: Vec<f64> = ok.iter().map(|m| m.rmse_translation).collect();
            rows.push(ReportRow {
                method: method.name().to_string(),
                scenario: scenario.name.clone(),
                chamfer: mean(&|m| m.chamfer),
                hausdorff: mean(&|m| m.hausdorff),
                rmse_rotation_deg: pooled_rmse_rotation(&euler),
                rmse_translation: pooled_rmse_translation(&trans),
                trials: records.len(),
                failures: records.len() - ok.len(),
            });
        }
    }
    rows
}

/// Runs every (scenario, trial) job and aggregates per method and scenario.
/// Method failures are recorded per trial and excluded from the aggregates.
pub fn run_experiment(config: &ExperimentConfig) -> Result<MetricsReport> {
    config.validate()?;
    let sources = config
        .datasets
        .iter()
        .map(ParentSource::load)
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &config.pair_dir {
        std::fs::create_dir_all(dir)?;
    }
    let scenarios = scenarios(config);
    let jobs: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|s| (0..config.trials).map(move |t| (s, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let trials: Vec<TrialRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, t)| run_trial(config, &sources, &scenarios, s, t))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });
    Ok(MetricsReport {
        rows: aggregate(config, &scenarios, &trials),
        scenarios,
        trials,
    })
}
