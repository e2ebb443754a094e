//! Handlers behind the `dtdm` subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dtd_moments_core::encoding::{signal_cumulant, signal_dtd, signal_gamma};
use dtd_moments_core::experiments::add_rician;
use dtd_moments_core::fit::{fit_covariance, fit_dti, fit_mv_gamma, LmOptions, MvGammaFit, MvGammaOptions};
use dtd_moments_core::{
    descriptors_from_moments, frobenius, generate_scheme, AcqScheme, Error as CoreError, MomentPair,
    SchemeSpec, Tensor6,
};

use crate::config::{Config, ExperimentConfig, SimulationConfig, SimulationSource, SignalModel};
use crate::error::{Error, Result};
use crate::experiment::{check_failures, run_experiment, write_experiment, ExperimentReport};
use crate::formats::{
    read_scheme, read_signals, scheme_to_string, signals_to_string, write_text, FitParameters,
    FitRecord, MandelMoments,
};
use crate::manifest::{config_hash, RunManifest, Versions};
use crate::mc::pool;
use crate::validate::{validate_moments, Dist, ValidationReport};

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Provenance {
    command: &'static str,
    canonical: String,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    started: Instant,
}

impl Provenance {
    fn new(command: &'static str, canonical: String, seed: Option<u64>, inputs: Vec<PathBuf>) -> Self {
        Provenance {
            command,
            canonical,
            seed,
            inputs,
            started: Instant::now(),
        }
    }

    fn finish(self, anchor: &Path, outputs: Vec<PathBuf>) -> Result<RunManifest> {
        let bytes = self.inputs.iter().map(|p| read_bytes(p)).collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            command: self.command.into(),
            config_hash: config_hash(self.command, &self.canonical, &bytes),
            seed: self.seed,
            versions: Versions::default(),
            inputs: self.inputs,
            outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        manifest.write_beside(anchor)?;
        Ok(manifest)
    }
}

pub fn default_scheme() -> AcqScheme {
    generate_scheme(&SchemeSpec::default_scheme()).expect("default scheme is valid")
}

pub fn scheme_gen(spec: &SchemeSpec, out: Option<&Path>) -> Result<AcqScheme> {
    let scheme = generate_scheme(spec)?;
    emit(out, &scheme_to_string(&scheme))?;
    Ok(scheme)
}

/// Per-shell counts, grouped by `(b, b_delta)` in file order.
pub fn scheme_summary(scheme: &AcqScheme) -> String {
    let mut shells: Vec<(f64, f64, usize)> = Vec::new();
    for p in scheme.iter() {
        match shells.iter_mut().find(|s| s.0 == p.b && s.1 == p.b_delta) {
            Some(s) => s.2 += 1,
            None => shells.push((p.b, p.b_delta, 1)),
        }
    }
    let mut text = format!("{:>12} {:>8} {:>6}\n", "b [ms/µm²]", "b_delta", "points");
    for (b, bd, n) in &shells {
        text.push_str(&format!("{b:>12.4} {bd:>8.3} {n:>6}\n"));
    }
    text.push_str(&format!(
        "{} points, {} shells, anchor (b <= {}): {}\n",
        scheme.len(),
        shells.len(),
        dtd_moments_core::encoding::ANCHOR_B,
        if scheme.has_anchor() { "yes" } else { "no" }
    ));
    text
}

pub fn scheme_show(path: &Path) -> Result<String> {
    Ok(scheme_summary(&read_scheme(path)?))
}

pub struct SimulateArgs<'a> {
    pub config: &'a Path,
    pub scheme: Option<&'a Path>,
    pub snr: f64,
    pub seed: u64,
    pub out: Option<&'a Path>,
}

/// Clean signals of a simulation config on `scheme`.
pub fn clean_signals(sim: &SimulationConfig, scheme: &AcqScheme) -> Result<Vec<f64>> {
    Ok(match &sim.source {
        SimulationSource::Gamma { distribution, s0 } => signal_gamma(distribution, *s0, scheme),
        SimulationSource::Phantom {
            point,
            resolution,
            model,
        } => {
            let phantom = point.build(resolution)?;
            match model {
                SignalModel::Dtd => signal_dtd(&phantom.dtd, scheme),
                SignalModel::Cumulant => {
                    let m = dtd_moments_core::moments_from_components(&phantom.dtd);
                    signal_cumulant(&m, 1.0, scheme)
                }
            }
        }
    })
}

pub fn simulate(args: &SimulateArgs) -> Result<Vec<f64>> {
    if !(args.snr > 0.0) {
        return Err(Error::Usage(format!("--snr must be positive or inf, got {}", args.snr)));
    }
    let cfg = Config::load(args.config)?;
    let sim = SimulationConfig::from_config(&cfg)?;
    let mut inputs = vec![args.config.to_path_buf()];
    let scheme = match args.scheme {
        Some(p) => {
            inputs.push(p.to_path_buf());
            read_scheme(p)?
        }
        None => {
            if let crate::config::SchemeSource::File(p) = &sim.scheme {
                inputs.push(p.clone());
            }
            sim.scheme.load()?
        }
    };
    let canonical = format!("{}snr={}\nseed={}\n", sim.canonical, args.snr, args.seed);
    let prov = Provenance::new("simulate", canonical, Some(args.seed), inputs);
    let clean = clean_signals(&sim, &scheme)?;
    let signals = add_rician(&clean, args.snr, args.seed);
    emit(args.out, &signals_to_string(&signals))?;
    if let Some(out) = args.out {
        prov.finish(out, vec![out.to_path_buf()])?;
    }
    Ok(signals)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    MvGamma,
    Cov,
    Dti,
}

fn mv_gamma_record(fit: &MvGammaFit, converged: bool) -> FitRecord {
    let p = &fit.params;
    FitRecord {
        parameters: FitParameters::Mvgamma {
            s0: p.s0,
            kappa: p.kappa,
            psi_eigs: p.psi_eigs,
            h_eigs: p.h_eigs,
            theta_eigs: p.theta_eigs(),
            euler: p.euler,
        },
        moments: Some(MandelMoments::from(&fit.moments)),
        descriptors: Some(fit.descriptors),
        residual_norm: fit.residual_norm,
        converged,
        start_index: Some(fit.start_index),
        iterations: Some(fit.iterations),
    }
}

/// Fits `signals`; a non-converged mv-Gamma fit is returned as a record
/// with `converged = false`.
pub fn fit_record(model: Model, signals: &[f64], scheme: &AcqScheme, opts: &MvGammaOptions) -> Result<FitRecord> {
    Ok(match model {
        Model::MvGamma => match fit_mv_gamma(signals, scheme, opts) {
            Ok(fit) => mv_gamma_record(&fit, true),
            Err(CoreError::NotConverged(fit)) => mv_gamma_record(&fit, false),
            Err(e) => return Err(e.into()),
        },
        Model::Cov => {
            let fit = fit_covariance(signals, scheme)?;
            FitRecord {
                parameters: FitParameters::Cov { s0: fit.s0 },
                moments: Some(MandelMoments::from(&fit.moments())),
                descriptors: fit.descriptors,
                residual_norm: fit.residual_norm,
                converged: true,
                start_index: None,
                iterations: None,
            }
        }
        Model::Dti => {
            let (s0, d) = fit_dti(signals, scheme)?;
            let residual_norm = scheme
                .iter()
                .zip(signals)
                .map(|(b, s)| (s - s0 * (-frobenius(&b.tensor, &d)).exp()).powi(2))
                .sum::<f64>()
                .sqrt();
            let m = MomentPair::new(d, Tensor6::zero());
            FitRecord {
                parameters: FitParameters::Dti {
                    s0,
                    tensor: d.components(),
                },
                moments: Some(MandelMoments::from(&m)),
                descriptors: descriptors_from_moments(&m).ok(),
                residual_norm,
                converged: true,
                start_index: None,
                iterations: None,
            }
        }
    })
}

pub struct FitArgs<'a> {
    pub model: Model,
    pub signals: &'a Path,
    pub scheme: &'a Path,
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub out: Option<&'a Path>,
}

/// Runs the fit and writes its record. A record that did not converge is
/// still written before the convergence error is returned.
pub fn fit(args: &FitArgs) -> Result<FitRecord> {
    if args.starts == 0 || args.max_iter == 0 {
        return Err(Error::Usage("--starts and --max-iter must be at least 1".into()));
    }
    let signals = read_signals(args.signals)?;
    let scheme = read_scheme(args.scheme)?;
    let canonical = format!(
        "model={:?}\nstarts={}\nseed={}\nmax_iter={}\n",
        args.model, args.starts, args.seed, args.max_iter
    );
    let prov = Provenance::new(
        "fit",
        canonical,
        Some(args.seed),
        vec![args.signals.to_path_buf(), args.scheme.to_path_buf()],
    );
    let defaults = MvGammaOptions::default();
    let opts = MvGammaOptions {
        n_starts: args.starts,
        seed: args.seed,
        lm: LmOptions {
            max_iter: args.max_iter,
            ..defaults.lm
        },
        ..defaults
    };
    let record = fit_record(args.model, &signals, &scheme, &opts)?;
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    emit(args.out, &text)?;
    if let Some(out) = args.out {
        prov.finish(out, vec![out.to_path_buf()])?;
    }
    if !record.converged {
        return Err(Error::Convergence(format!(
            "mv-Gamma fit did not converge (residual norm {:.3e}); record written with converged = false",
            record.residual_norm
        )));
    }
    Ok(record)
}

pub fn validate(dist: Dist, trials: usize, seed: u64, out: Option<&Path>) -> Result<ValidationReport> {
    let report = validate_moments(dist, trials, seed)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(out, &text)?;
    if !report.passed {
        return Err(Error::Validation(format!(
            "moment validation failed: max relative mean error {:.3e}, covariance error {:.3e}",
            report.max_rel_mean_error, report.max_rel_cov_error
        )));
    }
    Ok(report)
}

pub fn default_experiment_dir(config: &Path) -> PathBuf {
    let stem = config.file_stem().unwrap_or_default().to_string_lossy();
    config.with_file_name(format!("{stem}_out"))
}

pub fn experiment(config: &Path, out_dir: Option<&Path>, jobs: usize) -> Result<ExperimentReport> {
    let cfg = Config::load(config)?;
    let exp = ExperimentConfig::from_config(&cfg)?;
    let dir = out_dir.map_or_else(|| default_experiment_dir(config), Path::to_path_buf);
    let mut inputs = vec![config.to_path_buf()];
    if let crate::config::SchemeSource::File(p) = &exp.scheme {
        inputs.push(p.clone());
    }
    let prov = Provenance::new("experiment", exp.canonical.clone(), Some(exp.seed), inputs);
    let (report, csvs) = run_experiment(&exp, &pool(jobs)?)?;
    let written = write_experiment(&dir, &report, &csvs)?;
    prov.finish(&written[0], written.clone())?;
    check_failures(&report)?;
    Ok(report)
}

/// Cell rows of a report as a plain table: sweep parameters, fitter, SNR
/// and the three descriptor medians next to their ground truth.
pub fn report_table(report: &ExperimentReport) -> String {
    let mut text = String::new();
    for c in &report.cells {
        let s = &c.summary;
        let params: BTreeMap<&String, &f64> = c.params.iter().collect();
        let p: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        text.push_str(&format!(
            "{:>3} {:<12} {:<28} {:<8} snr={:<6} e_iso {:.4}/{:.4}  v_iso {:.4}/{:.4}  e_aniso2_norm {:.4}/{:.4}  failed {}\n",
            c.index,
            c.phantom,
            p.join(" "),
            s.fitter,
            s.snr,
            s.e_iso.median,
            s.e_iso.ground_truth,
            s.v_iso.median,
            s.v_iso.ground_truth,
            s.e_aniso2_norm.median,
            s.e_aniso2_norm.ground_truth,
            s.n_failed,
        ));
    }
    text
}
