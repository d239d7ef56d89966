//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # lines starting with '#' are ignored
//! datasets = synthetic:blob, meshes/chair.off
//! n_parent = 2048
//! trials = 100
//! seed = 7
//! noise = zero-intersection
//! euler_range_deg = -180, 180
//! trans_range = -0.5, 0.5
//! methods = ume, icp, external:bundles/{scenario}_{trial}_{cloud}.umef
//! density_sweep = 1000, 10000
//! workers = 4
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{Interval, Vec3};
use crate::mesh::{shapes, Mesh};
use crate::noise::NoiseSpec;
use crate::ume::DEFAULT_BINS;

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// Procedural asymmetric blob.
    Blob,
    /// Procedural 2 × 1 × 0.5 box.
    Cuboid,
    /// A mesh or point file on disk.
    File(PathBuf),
}

impl Dataset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "synthetic:blob" => Ok(Self::Blob),
            "synthetic:cuboid" => Ok(Self::Cuboid),
            _ if s.starts_with("synthetic:") => Err(Error::Config(format!("unknown synthetic shape '{s}'"))),
            _ => Ok(Self::File(PathBuf::from(s))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Blob => "synthetic:blob".into(),
            Self::Cuboid => "synthetic:cuboid".into(),
            Self::File(p) => p.display().to_string(),
        }
    }

    pub fn builtin_mesh(&self) -> Option<Mesh> {
        match self {
            Self::Blob => Some(shapes::asymmetric_blob()),
            Self::Cuboid => Some(shapes::cuboid(Vec3::new(2.0, 1.0, 0.5))),
            Self::File(_) => None,
        }
    }
}

/// Noise model, possibly with parameters redrawn every trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoisePreset {
    Fixed(NoiseSpec),
    /// Keep probabilities drawn independently per trial.
    BernoulliRandom(Interval),
    /// Standard deviation drawn per trial.
    AwgnRandom(Interval),
}

impl NoisePreset {
    /// `vanilla`, `bernoulli`, `bernoulli:Q1,Q2`, `zero-intersection`, `awgn`, `awgn:SIGMA`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let preset = match (name, arg) {
            ("vanilla" | "none", None) => Self::Fixed(NoiseSpec::None),
            ("bernoulli", None) => Self::BernoulliRandom(Interval { lo: 0.2, hi: 1.0 }),
            ("bernoulli", Some(a)) => {
                let q = parse_list(a, "noise")?;
                match q.as_slice() {
                    [q1, q2] => Self::Fixed(NoiseSpec::Bernoulli { q1: *q1, q2: *q2 }),
                    _ => return Err(Error::Config("bernoulli takes two keep probabilities".into())),
                }
            }
            ("zero-intersection", None) => Self::Fixed(NoiseSpec::ZeroIntersection),
            ("awgn", None) => Self::AwgnRandom(Interval { lo: 0.0, hi: 0.04 }),
            ("awgn", Some(a)) => Self::Fixed(NoiseSpec::Awgn {
                sigma: parse_num(a, "noise")?,
            }),
            _ => return Err(Error::Config(format!("unknown noise preset '{s}'"))),
        };
        if let Self::Fixed(spec) = preset {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(preset)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> NoiseSpec {
        match *self {
            Self::Fixed(spec) => spec,
            Self::BernoulliRandom(range) => NoiseSpec::Bernoulli {
                q1: range.sample(rng),
                q2: range.sample(rng),
            },
            Self::AwgnRandom(range) => NoiseSpec::Awgn { sigma: range.sample(rng) },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Fixed(NoiseSpec::None) => "vanilla".into(),
            Self::Fixed(NoiseSpec::Bernoulli { q1, q2 }) => format!("bernoulli:{q1},{q2}"),
            Self::Fixed(NoiseSpec::ZeroIntersection) => "zero-intersection".into(),
            Self::Fixed(NoiseSpec::Awgn { sigma }) => format!("awgn:{sigma}"),
            Self::BernoulliRandom(_) => "bernoulli".into(),
            Self::AwgnRandom(_) => "awgn".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Ume,
    Icp,
    /// UMEF bundles read from a path pattern with `{scenario}`, `{trial}` and
    /// `{cloud}` (1 or 2) placeholders.
    External(String),
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ume" => Ok(Self::Ume),
            "icp" => Ok(Self::Icp),
            _ => match s.strip_prefix("external:") {
                Some(p) if !p.is_empty() => Ok(Self::External(p.to_string())),
                _ => Err(Error::Config(format!("unknown method '{s}'"))),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ume => "ume",
            Self::Icp => "icp",
            Self::External(_) => "external",
        }
    }

    pub fn bundle_path(pattern: &str, scenario: usize, trial: usize, cloud: usize) -> PathBuf {
        PathBuf::from(
            pattern
                .replace("{scenario}", &scenario.to_string())
                .replace("{trial}", &trial.to_string())
                .replace("{cloud}", &cloud.to_string()),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<Dataset>,
    pub n_parent: usize,
    pub trials: usize,
    pub seed: u64,
    pub noise: NoisePreset,
    pub euler_range_deg: Interval,
    pub trans_range: Interval,
    pub methods: Vec<Method>,
    /// Parent sizes to sweep; replaces `n_parent` when non-empty.
    pub density_sweep: Vec<usize>,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    pub bins: usize,
    pub icp_max_iterations: usize,
    pub icp_tol: f64,
    /// When set, every trial's noisy pair is written here as XYZ plus the
    /// ground-truth transform, for external feature tools.
    pub pair_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: vec![Dataset::Blob],
            n_parent: 2048,
            trials: 10,
            seed: 0,
            noise: NoisePreset::Fixed(NoiseSpec::None),
            euler_range_deg: Interval { lo: -180.0, hi: 180.0 },
            trans_range: Interval { lo: -0.5, hi: 0.5 },
            methods: vec![Method::Ume],
            density_sweep: Vec::new(),
            workers: 0,
            bins: DEFAULT_BINS,
            icp_max_iterations: 100,
            icp_tol: 1e-8,
            pair_dir: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| Error::Config(format!("bad value '{s}' for {key}: {e}")))
}

fn parse_list<T: std::str::FromStr>(s: &str, key: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_num(t, key))
        .collect()
}

fn parse_interval(s: &str, key: &str) -> Result<Interval> {
    match parse_list::<f64>(s, key)?.as_slice() {
        [lo, hi] => Interval::new(*lo, *hi).map_err(|e| Error::Config(format!("{key}: {e}"))),
        [v] => Interval::new(*v, *v).map_err(|e| Error::Config(format!("{key}: {e}"))),
        _ => Err(Error::Config(format!("{key} takes 'lo, hi'"))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected 'key = value', found '{line}'")))?;
            if entries.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::parse(i + 1, format!("duplicate key '{}'", k.trim())));
            }
        }

        let mut cfg = Self::default();
        for (key, value) in &entries {
            let v = value.as_str();
            match key.as_str() {
                "datasets" | "dataset" => {
                    cfg.datasets = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(Dataset::parse)
                        .collect::<Result<_>>()?
                }
                "n_parent" => cfg.n_parent = parse_num(v, key)?,
                "trials" => cfg.trials = parse_num(v, key)?,
                "seed" => cfg.seed = parse_num(v, key)?,
                "noise" => cfg.noise = NoisePreset::parse(v)?,
                "euler_range_deg" => cfg.euler_range_deg = parse_interval(v, key)?,
                "trans_range" => cfg.trans_range = parse_interval(v, key)?,
                "methods" => {
                    cfg.methods = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(Method::parse)
                        .collect::<Result<_>>()?
                }
                "density_sweep" => cfg.density_sweep = parse_list(v, key)?,
                "workers" => cfg.workers = parse_num(v, key)?,
                "bins" => cfg.bins = parse_num(v, key)?,
                "icp_max_iterations" => cfg.icp_max_iterations = parse_num(v, key)?,
                "icp_tol" => cfg.icp_tol = parse_num(v, key)?,
                "pair_dir" => cfg.pair_dir = Some(PathBuf::from(v)),
                _ => return Err(Error::Config(format!("unknown key '{key}'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.datasets.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("at least one dataset and one method are required".into()));
        }
        if self.parent_sizes().iter().any(|&n| n < 8) {
            return Err(Error::Config("parent clouds need at least 8 points".into()));
        }
        if self.bins == 0 {
            return Err(Error::Config("bins must be at least 1".into()));
        }
        if self.trials > u32::MAX as usize {
            return Err(Error::Config("too many trials".into()));
        }
        Ok(())
    }

    pub fn parent_sizes(&self) -> Vec<usize> {
        if self.density_sweep.is_empty() {
            vec![self.n_parent]
        } else {
            self.density_sweep.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_when_empty() {
        let c = ExperimentConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.n_parent, 2048);
    }

    #[test]
    fn full_config() {
        let text = "datasets = synthetic:blob, synthetic:cuboid\nn_parent=512\ntrials = 3\nseed = 9\nnoise = awgn\neuler_range_deg = -90, 90\ntrans_range = 0\nmethods = ume, icp, external:b/{scenario}_{trial}_{cloud}.umef\ndensity_sweep = 100, 200\nworkers = 2\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.datasets, vec![Dataset::Blob, Dataset::Cuboid]);
        assert_eq!(c.noise, NoisePreset::AwgnRandom(Interval { lo: 0.0, hi: 0.04 }));
        assert_eq!(c.trans_range, Interval::point(0.0));
        assert_eq!(c.methods.len(), 3);
        assert_eq!(c.parent_sizes(), vec![100, 200]);
        assert_eq!(
            Method::bundle_path("b/{scenario}_{trial}_{cloud}.umef", 1, 4, 2),
            PathBuf::from("b/1_4_2.umef")
        );
    }

    #[test]
    fn noise_presets() {
        assert_eq!(NoisePreset::parse("vanilla").unwrap(), NoisePreset::Fixed(NoiseSpec::None));
        assert_eq!(
            NoisePreset::parse("bernoulli:0.5,0.5").unwrap(),
            NoisePreset::Fixed(NoiseSpec::Bernoulli { q1: 0.5, q2: 0.5 })
        );
        assert!(NoisePreset::parse("bernoulli:0,0.5").is_err());
        assert!(NoisePreset::parse("awgn:-1").is_err());
        assert!(NoisePreset::parse("pepper").is_err());
        for s in ["vanilla", "bernoulli", "bernoulli:0.5,0.5", "zero-intersection", "awgn", "awgn:0.01"] {
            assert_eq!(NoisePreset::parse(&NoisePreset::parse(s).unwrap().name()).unwrap(), NoisePreset::parse(s).unwrap());
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::parse("trials = 0").is_err());
        assert!(ExperimentConfig::parse("n_parent = 4").is_err());
        assert!(ExperimentConfig::parse("colour = red").is_err());
        assert!(matches!(ExperimentConfig::parse("trials 3"), Err(Error::Parse { line: 1, .. })));
        assert!(ExperimentConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(ExperimentConfig::parse("methods = ume, sgd").is_err());
        assert!(ExperimentConfig::parse("euler_range_deg = 10, -10").is_err());
        assert!(ExperimentConfig::parse("datasets = synthetic:teapot").is_err());
    }
}
