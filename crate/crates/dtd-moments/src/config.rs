//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Values that accept
//! sweeps are comma-separated lists; `inf` is accepted wherever an SNR is
//! expected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use dtd_moments_core::experiments::{
    phantom_aniso, phantom_bimodal_iso, phantom_mixed, AnisoShape, Fitter, Phantom, PhantomResolution,
    BIMODAL_SIGMA,
};
use dtd_moments_core::fit::MvGammaOptions;
use dtd_moments_core::{euler_rotation, AcqScheme, NcMvGamma, SymTensor3};

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_BIMODAL_COMPONENTS: usize = 64;
pub const DEFAULT_SWEEP_LEN: usize = 6;

#[derive(Clone, Debug)]
pub struct Config {
    path: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn parse(path: impl Into<PathBuf>, text: &str) -> Result<Self> {
        let path = path.into();
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path,
                    line: k as u64 + 1,
                    message: format!("expected `key = value`, found `{line}`"),
                });
            };
            let key = key.trim().to_ascii_lowercase();
            if entries.insert(key.clone(), (k + 1, value.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    path,
                    line: k as u64 + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Config { path, entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| self.error(key, "missing required key"))
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> Error {
        Error::config(&self.path, key, message)
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(self.error(k, format!("unknown key (allowed: {})", allowed.join(", ")))),
            None => Ok(()),
        }
    }

    fn number(&self, key: &str, s: &str) -> Result<f64> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(f64::INFINITY),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| self.error(key, format!("`{s}` is not a number"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|s| self.number(key, s)).transpose()
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(s) = self.get(key) else { return Ok(None) };
        let v = s.split(',').map(|t| self.number(key, t)).collect::<Result<Vec<_>>>()?;
        if v.is_empty() {
            return Err(self.error(key, "empty list"));
        }
        Ok(Some(v))
    }

    pub fn require_list(&self, key: &str) -> Result<Vec<f64>> {
        self.list(key)?.ok_or_else(|| self.error(key, "missing required key"))
    }

    fn triple(&self, key: &str) -> Result<Option<[f64; 3]>> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) => <[f64; 3]>::try_from(v)
                .map(Some)
                .map_err(|_| self.error(key, "expected three comma-separated values")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|s| s.parse::<usize>().map_err(|_| self.error(key, format!("`{s}` is not a count"))))
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|s| s.parse::<u64>().map_err(|_| self.error(key, format!("`{s}` is not an unsigned integer"))))
            .transpose()
    }

    /// Sorted `key=value` lines, independent of ordering, spacing and
    /// comments in the file.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, (_, v))| format!("{k}={v}\n")).collect()
    }

    /// Resolves a path value relative to the config file's directory.
    pub fn resolve(&self, value: &str) -> PathBuf {
        let p = Path::new(value);
        match self.path.parent() {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }
}

/// Six log-spaced V[D_iso] targets spanning the feasible range of the
/// bimodal phantom at `e_iso`.
pub fn default_v_iso_sweep(e_iso: f64) -> Vec<f64> {
    let s2 = BIMODAL_SIGMA * BIMODAL_SIGMA;
    let reach = (e_iso - 5.0 * BIMODAL_SIGMA).max(0.0);
    let lo = 2.0 * s2;
    let hi = (0.9 * reach).powi(2) + s2;
    if hi <= lo {
        return vec![lo];
    }
    let n = DEFAULT_SWEEP_LEN;
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// One phantom of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhantomPoint {
    BimodalIso { e_iso: f64, v_iso: f64, n_components: usize },
    Aniso { e_aniso2_norm: f64, op: f64, shape: AnisoShape },
    Mixed { f_iso: f64 },
}

impl PhantomPoint {
    pub fn build(&self, res: &PhantomResolution) -> Result<Phantom> {
        Ok(match *self {
            PhantomPoint::BimodalIso { e_iso, v_iso, n_components } => {
                phantom_bimodal_iso(e_iso, v_iso, n_components)?
            }
            PhantomPoint::Aniso { e_aniso2_norm, op, shape } => phantom_aniso(e_aniso2_norm, op, shape, res)?,
            PhantomPoint::Mixed { f_iso } => phantom_mixed(f_iso, res)?,
        })
    }

    /// Target values of the phantom, as `(name, value)` pairs.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            PhantomPoint::BimodalIso { e_iso, v_iso, .. } => vec![("e_iso", e_iso), ("v_iso", v_iso)],
            PhantomPoint::Aniso { e_aniso2_norm, op, .. } => vec![("e_aniso2_norm", e_aniso2_norm), ("op", op)],
            PhantomPoint::Mixed { f_iso } => vec![("f_iso", f_iso)],
        }
    }
}

impl fmt::Display for PhantomPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhantomPoint::BimodalIso { .. } => f.write_str("bimodal_iso")?,
            PhantomPoint::Aniso { shape, .. } => write!(f, "aniso_{}", shape_name(*shape))?,
            PhantomPoint::Mixed { .. } => f.write_str("mixed")?,
        }
        for (k, v) in self.params() {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

fn shape_name(s: AnisoShape) -> &'static str {
    match s {
        AnisoShape::Linear => "linear",
        AnisoShape::Planar => "planar",
    }
}

fn parse_shape(cfg: &Config) -> Result<AnisoShape> {
    match cfg.get("shape").unwrap_or("linear") {
        "linear" | "prolate" => Ok(AnisoShape::Linear),
        "planar" | "oblate" => Ok(AnisoShape::Planar),
        other => Err(cfg.error("shape", format!("`{other}` is not linear or planar"))),
    }
}

const PHANTOM_KINDS: &str = "bimodal_iso, aniso, mixed";

/// Every phantom of the config's sweep, in row-major order of its lists.
pub fn phantom_points(cfg: &Config) -> Result<Vec<PhantomPoint>> {
    let kind = cfg.require("phantom")?;
    let mut out = Vec::new();
    match kind {
        "bimodal_iso" => {
            let n_components = cfg.usize("n_components")?.unwrap_or(DEFAULT_BIMODAL_COMPONENTS);
            for e_iso in cfg.require_list("e_iso")? {
                let vs = cfg.list("v_iso")?.unwrap_or_else(|| default_v_iso_sweep(e_iso));
                out.extend(vs.into_iter().map(|v_iso| PhantomPoint::BimodalIso { e_iso, v_iso, n_components }));
            }
        }
        "aniso" => {
            let shape = parse_shape(cfg)?;
            let ops = cfg.require_list("op")?;
            for e_aniso2_norm in cfg.require_list("e_aniso2_norm")? {
                out.extend(ops.iter().map(|&op| PhantomPoint::Aniso { e_aniso2_norm, op, shape }));
            }
        }
        "mixed" => {
            out.extend(cfg.require_list("f_iso")?.into_iter().map(|f_iso| PhantomPoint::Mixed { f_iso }));
        }
        other => return Err(cfg.error("phantom", format!("`{other}` is not one of {PHANTOM_KINDS}"))),
    }
    Ok(out)
}

fn resolution(cfg: &Config) -> Result<PhantomResolution> {
    let d = PhantomResolution::default();
    Ok(PhantomResolution {
        scalar: cfg.usize("resolution_scalar")?.unwrap_or(d.scalar),
        shape: cfg.usize("resolution_shape")?.unwrap_or(d.shape),
        grid: d.grid,
        orientations: cfg.usize("resolution_orientations")?.unwrap_or(d.orientations),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SchemeSource {
    Default,
    File(PathBuf),
}

impl SchemeSource {
    fn from_config(cfg: &Config) -> Self {
        match cfg.get("scheme") {
            None | Some("default") => SchemeSource::Default,
            Some(p) => SchemeSource::File(cfg.resolve(p)),
        }
    }

    pub fn load(&self) -> Result<AcqScheme> {
        match self {
            SchemeSource::Default => Ok(dtd_moments_core::generate_scheme(
                &dtd_moments_core::SchemeSpec::default_scheme(),
            )?),
            SchemeSource::File(p) => crate::formats::read_scheme(p),
        }
    }
}

const SHARED_KEYS: [&str; 12] = [
    "phantom",
    "e_iso",
    "v_iso",
    "n_components",
    "e_aniso2_norm",
    "op",
    "shape",
    "f_iso",
    "resolution_scalar",
    "resolution_shape",
    "resolution_orientations",
    "scheme",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitterKind {
    MvGamma,
    Cov,
}

impl FitterKind {
    pub fn name(self) -> &'static str {
        match self {
            FitterKind::MvGamma => "mvgamma",
            FitterKind::Cov => "cov",
        }
    }

    pub fn fitter(self, starts: usize) -> Fitter {
        match self {
            FitterKind::MvGamma => Fitter::MvGamma(MvGammaOptions {
                n_starts: starts,
                ..MvGammaOptions::default()
            }),
            FitterKind::Cov => Fitter::Covariance,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub points: Vec<PhantomPoint>,
    pub resolution: PhantomResolution,
    pub scheme: SchemeSource,
    pub snr: Vec<f64>,
    pub fitters: Vec<FitterKind>,
    pub seed: u64,
    pub n: usize,
    pub starts: usize,
    pub canonical: String,
}

impl ExperimentConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut allowed = SHARED_KEYS.to_vec();
        allowed.extend(["snr", "fitters", "seed", "n", "starts"]);
        cfg.check_keys(&allowed)?;
        let points = phantom_points(cfg)?;
        let snr = cfg.require_list("snr")?;
        if let Some(bad) = snr.iter().find(|s| !(**s > 0.0)) {
            return Err(cfg.error("snr", format!("SNR {bad} must be positive")));
        }
        let fitters = cfg
            .get("fitters")
            .unwrap_or("mvgamma,cov")
            .split(',')
            .map(|t| match t.trim() {
                "mvgamma" => Ok(FitterKind::MvGamma),
                "cov" => Ok(FitterKind::Cov),
                other => Err(cfg.error("fitters", format!("`{other}` is not mvgamma or cov"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let n = cfg.usize("n")?.unwrap_or(dtd_moments_core::experiments::DEFAULT_REALIZATIONS);
        if n == 0 {
            return Err(cfg.error("n", "at least one realization is required"));
        }
        let starts = cfg.usize("starts")?.unwrap_or(MvGammaOptions::default().n_starts);
        if starts == 0 {
            return Err(cfg.error("starts", "at least one start is required"));
        }
        Ok(ExperimentConfig {
            points,
            resolution: resolution(cfg)?,
            scheme: SchemeSource::from_config(cfg),
            snr,
            fitters,
            seed: cfg.u64("seed")?.unwrap_or(DEFAULT_SEED),
            n,
            starts,
            canonical: cfg.canonical(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalModel {
    /// Exact discrete-DTD signal.
    Dtd,
    /// Second-order cumulant signal of the DTD's moments.
    Cumulant,
}

#[derive(Clone, Debug)]
pub enum SimulationSource {
    Phantom {
        point: PhantomPoint,
        resolution: PhantomResolution,
        model: SignalModel,
    },
    Gamma {
        distribution: NcMvGamma,
        s0: f64,
    },
}

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub source: SimulationSource,
    pub scheme: SchemeSource,
    pub canonical: String,
}

impl SimulationConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut allowed = SHARED_KEYS.to_vec();
        allowed.extend(["signal_model", "kappa", "psi", "theta", "euler", "s0"]);
        cfg.check_keys(&allowed)?;
        let source = if cfg.require("phantom")? == "gamma" {
            let kappa = cfg.f64("kappa")?.ok_or_else(|| cfg.error("kappa", "missing required key"))?;
            let psi = cfg.triple("psi")?.ok_or_else(|| cfg.error("psi", "missing required key"))?;
            let theta = cfg.triple("theta")?.unwrap_or([0.0; 3]);
            let [a, b, c] = cfg.triple("euler")?.unwrap_or([0.0; 3]);
            let r = euler_rotation(a, b, c);
            let distribution =
                NcMvGamma::new(kappa, SymTensor3::from_eigen(psi, &r), SymTensor3::from_eigen(theta, &r))?;
            SimulationSource::Gamma {
                distribution,
                s0: cfg.f64("s0")?.unwrap_or(1.0),
            }
        } else {
            let points = phantom_points(cfg)?;
            let [point] = points[..] else {
                return Err(cfg.error("phantom", format!("simulate needs one phantom, the config sweeps {}", points.len())));
            };
            let model = match cfg.get("signal_model").unwrap_or("dtd") {
                "dtd" => SignalModel::Dtd,
                "cumulant" => SignalModel::Cumulant,
                other => return Err(cfg.error("signal_model", format!("`{other}` is not dtd or cumulant"))),
            };
            SimulationSource::Phantom {
                point,
                resolution: resolution(cfg)?,
                model,
            }
        };
        Ok(SimulationConfig {
            source,
            scheme: SchemeSource::from_config(cfg),
            canonical: cfg.canonical(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config::parse("test.cfg", text).unwrap()
    }

    #[test]
    fn parses_lists_and_comments() {
        let c = cfg("# sweep\nphantom = aniso\n op = 1, 0.6 ,0.4\ne_aniso2_norm=0.8\nsnr = 30, inf\n");
        let e = ExperimentConfig::from_config(&c).unwrap();
        assert_eq!(e.points.len(), 3);
        assert_eq!(e.snr, vec![30.0, f64::INFINITY]);
        assert_eq!(e.fitters, vec![FitterKind::MvGamma, FitterKind::Cov]);
        assert_eq!(e.seed, DEFAULT_SEED);
    }

    #[test]
    fn canonical_ignores_layout() {
        let a = cfg("phantom = mixed\nf_iso = 0.5\n");
        let b = cfg("# x\nf_iso=0.5\n\n  phantom =   mixed");
        assert_eq!(a.canonical(), b.canonical());
    }

    #[test]
    fn missing_phantom_names_key_and_path() {
        let c = cfg("snr = 30\n");
        let err = ExperimentConfig::from_config(&c).unwrap_err();
        assert_eq!(err.status(), crate::error::ExitStatus::Usage);
        let msg = err.to_string();
        assert!(msg.contains("test.cfg") && msg.contains("phantom"), "{msg}");
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert!(ExperimentConfig::from_config(&cfg("phantom = mixed\nf_iso=0.5\nsnr=30\ncolour=red\n")).is_err());
        assert!(matches!(Config::parse("x", "a=1\na=2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Config::parse("x", "a=1\nnonsense\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn default_bimodal_sweep_is_six_feasible_log_spaced_targets() {
        let c = cfg("phantom = bimodal_iso\ne_iso = 1.0\nsnr = 30\n");
        let e = ExperimentConfig::from_config(&c).unwrap();
        assert_eq!(e.points.len(), DEFAULT_SWEEP_LEN);
        let v: Vec<f64> = e.points.iter().map(|p| p.params()[1].1).collect();
        let ratios: Vec<f64> = v.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12 && *r > 1.0));
        for p in &e.points {
            p.build(&e.resolution).unwrap();
        }
    }

    #[test]
    fn gamma_source() {
        let c = cfg("phantom = gamma\nkappa = 2.5\npsi = 0.6, 0.3, 0.2\ntheta = 1, 0, -0.5\neuler = 0.3, 0.7, -0.2\n");
        let s = SimulationConfig::from_config(&c).unwrap();
        assert!(matches!(s.source, SimulationSource::Gamma { s0, .. } if s0 == 1.0));
        let bad = cfg("phantom = gamma\nkappa = 0.5\npsi = 0.6, 0.3, 0.2\n");
        assert_eq!(
            SimulationConfig::from_config(&bad).unwrap_err().status(),
            crate::error::ExitStatus::Input
        );
    }
}
