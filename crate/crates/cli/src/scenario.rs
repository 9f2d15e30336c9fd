//! Runs a resolved [`Scenario`] and renders its CSV table and JSON summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use tprf_core::analytic::{analytic_flux, analytic_g2zero, AnalyticParams, VALIDITY_EPSILON};
use tprf_core::correlations::find_peaks;
use tprf_core::detection::{filter_g2, FilterKernel};
use tprf_core::units::{angular_to_mhz, ns_to_seconds, seconds_to_ns};
use tprf_core::{Emitter, Error, LadderParams, Line, Normalization};

use crate::config::{Config, FilterConfig, Scenario, SweepPoint, Task};
use crate::error::CliError;

/// Peaks below this fraction of the strongest are not reported.
const PEAK_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamsEcho {
    pub n_levels: usize,
    pub alpha_mhz: f64,
    pub delta_mhz: f64,
    pub omega_mhz: f64,
    pub gamma_mhz: f64,
    pub epsilon: f64,
}

impl From<&LadderParams> for ParamsEcho {
    fn from(p: &LadderParams) -> Self {
        Self {
            n_levels: p.n_levels,
            alpha_mhz: angular_to_mhz(p.alpha),
            delta_mhz: angular_to_mhz(p.delta),
            omega_mhz: angular_to_mhz(p.omega),
            gamma_mhz: angular_to_mhz(p.gamma),
            epsilon: p.epsilon(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationRow {
    pub epsilon: f64,
    pub in_validity: bool,
    pub flux_over_gamma: f64,
    pub flux_over_gamma_analytic: f64,
    pub flux_deviation: f64,
    pub g2_zero: f64,
    pub g2_zero_analytic: f64,
    pub g2_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Validation {
    pub tolerance: f64,
    /// Every row with ε ≤ 0.2 agrees within `tolerance` on both quantities.
    pub passed: bool,
    pub rows: Vec<ValidationRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub flux_over_gamma: f64,
    pub g2_zero: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub variable: &'static str,
    pub points: usize,
    pub max_flux_at: f64,
    pub max_g2_zero_at: f64,
    pub max_g2_zero: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub task: &'static str,
    pub config: Config,
    pub params: ParamsEcho,
    pub line: Line,
    #[serde(rename = "dressed_frequencies_MHz")]
    pub dressed_frequencies_mhz: Option<[f64; 3]>,
    pub steady_populations_dressed: Option<[f64; 3]>,
    pub steady_populations_bare: Vec<f64>,
    pub flux_over_gamma: f64,
    pub g2_zero: Option<f64>,
    #[serde(rename = "peaks_MHz", skip_serializing_if = "Option::is_none")]
    pub peaks_mhz: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<Validation>,
    pub warnings: Vec<String>,
}

/// Rendered outputs of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub csv: String,
    pub summary: Summary,
}

impl Artifacts {
    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
    pub fn write(&self, stem: &Path) -> Result<(PathBuf, PathBuf), CliError> {
        let csv = with_suffix(stem, "csv");
        let json = with_suffix(stem, "json");
        for (path, body) in [(&csv, &self.csv), (&json, &self.summary_json())] {
            std::fs::write(path, body).map_err(|source| CliError::Output {
                path: path.display().to_string(),
                source,
            })?;
        }
        Ok((csv, json))
    }
}

fn with_suffix(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn emitter(p: &LadderParams, context: impl Into<String>) -> Result<Emitter, CliError> {
    Emitter::new(*p).map_err(CliError::physics(context))
}

fn base_summary(s: &Scenario, e: &Emitter, mut warnings: Vec<String>) -> Result<Summary, CliError> {
    let p = e.params();
    let ctx = || format!("{} scenario", s.task.name());
    let (dressed, pops) = if p.n_levels == 3 {
        let basis = e.dressed().map_err(CliError::physics(ctx()))?;
        (
            Some(basis.eigenvalues.map(angular_to_mhz)),
            Some(basis.populations(e.steady_state())),
        )
    } else {
        (None, None)
    };
    let flux = e.flux(s.line).map_err(CliError::physics(ctx()))?;
    let g2_zero = match e.g2_zero(s.line) {
        Ok(v) => Some(v),
        Err(Error::DegenerateNormalization { .. }) => {
            warnings.push(format!("g2(0) of line {} undefined: no emission", s.line));
            None
        }
        Err(err) => return Err(CliError::physics(ctx())(err)),
    };
    Ok(Summary {
        task: s.task.name(),
        config: s.config.clone(),
        params: ParamsEcho::from(p),
        line: s.line,
        dressed_frequencies_mhz: dressed,
        steady_populations_dressed: pops,
        steady_populations_bare: e.steady_state().populations(),
        flux_over_gamma: flux / p.gamma,
        g2_zero,
        peaks_mhz: None,
        sweep: None,
        validation: None,
        warnings,
    })
}

fn spectrum(s: &Scenario, warnings: Vec<String>) -> Result<Artifacts, CliError> {
    let e = emitter(&s.params, "spectrum")?;
    let spec = e
        .spectrum(s.line, &s.delays, s.window)
        .map_err(CliError::physics(format!("spectrum of line {}", s.line)))?;
    let mut csv = String::from("# omega_minus_omega_d_over_2pi_MHz, psd\n");
    for (w, v) in spec.frequencies.iter().zip(&spec.psd) {
        writeln!(csv, "{}, {}", num(angular_to_mhz(*w)), num(*v)).unwrap();
    }
    let mut summary = base_summary(s, &e, warnings)?;
    summary.peaks_mhz = Some(
        find_peaks(&spec, PEAK_THRESHOLD)
            .iter()
            .map(|p| angular_to_mhz(p.frequency))
            .collect(),
    );
    Ok(Artifacts { csv, summary })
}

fn kernel(s: &Scenario, step: f64) -> Result<Option<FilterKernel>, CliError> {
    let built = match &s.filter {
        None => return Ok(None),
        Some(FilterConfig::Boxcar { bandwidth_mhz }) => {
            FilterKernel::boxcar(bandwidth_mhz * 1e6, step)
        }
        Some(FilterConfig::RaisedCosine { bandwidth_mhz }) => {
            FilterKernel::raised_cosine(bandwidth_mhz * 1e6, step)
        }
        Some(FilterConfig::File {
            path,
            sample_period_ns,
        }) => {
            let full = s.base_dir.join(path);
            return FilterKernel::from_file(&full, ns_to_seconds(*sample_period_ns))
                .map(Some)
                .map_err(|e| CliError::Config {
                    path: "filter.path".into(),
                    message: format!("{}: {e}", full.display()),
                });
        }
    };
    built
        .map(Some)
        .map_err(CliError::physics("detection filter"))
}

fn g2(s: &Scenario, warnings: Vec<String>) -> Result<Artifacts, CliError> {
    let e = emitter(&s.params, "g2")?;
    let trace = e
        .g2(s.line, &s.delays, Normalization::Normalized)
        .map_err(CliError::physics(format!("g2 of line {}", s.line)))?;
    let step = s.delays[1] - s.delays[0];
    let filtered = match kernel(s, step)? {
        Some(k) => Some(filter_g2(&trace, &k).map_err(CliError::physics("filtering g2"))?),
        None => None,
    };
    let mut csv = String::from("# tau_ns, g2_normalized");
    csv.push_str(if filtered.is_some() {
        ", g2_filtered\n"
    } else {
        "\n"
    });
    for (i, (tau, v)) in trace.delays.iter().zip(&trace.values).enumerate() {
        write!(csv, "{}, {}", num(seconds_to_ns(*tau)), num(v.re)).unwrap();
        if let Some(f) = &filtered {
            write!(csv, ", {}", num(f.values[i].re)).unwrap();
        }
        csv.push('\n');
    }
    let summary = base_summary(s, &e, warnings)?;
    Ok(Artifacts { csv, summary })
}

fn sweep_row(point: &SweepPoint, line: Line) -> Result<SweepRow, CliError> {
    let ctx = || format!("sweep point {}", point.value);
    let e = emitter(&point.params, ctx())?;
    Ok(SweepRow {
        value: point.value,
        flux_over_gamma: e.flux(line).map_err(CliError::physics(ctx()))? / point.params.gamma,
        g2_zero: e.g2_zero(line).map_err(CliError::physics(ctx()))?,
    })
}

/// Evaluates every sweep point, in parallel when `jobs` allows; rows keep the
/// grid order.
pub fn sweep(s: &Scenario, jobs: Option<usize>) -> Result<Vec<SweepRow>, CliError> {
    let run = || -> Result<Vec<SweepRow>, CliError> {
        s.sweep.par_iter().map(|p| sweep_row(p, s.line)).collect()
    };
    match jobs {
        Some(1) => s.sweep.iter().map(|p| sweep_row(p, s.line)).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config {
                path: "--jobs".into(),
                message: e.to_string(),
            })?
            .install(run),
        None => run(),
    }
}

fn argmax(rows: &[SweepRow], key: impl Fn(&SweepRow) -> f64) -> &SweepRow {
    rows.iter()
        .reduce(|best, r| if key(r) > key(best) { r } else { best })
        .expect("nonempty sweep")
}

fn sweep_task(
    s: &Scenario,
    warnings: Vec<String>,
    jobs: Option<usize>,
) -> Result<Artifacts, CliError> {
    let rows = sweep(s, jobs)?;
    let mut csv = String::from("# sweep_value, flux_over_gamma, g2_zero\n");
    for r in &rows {
        writeln!(
            csv,
            "{}, {}, {}",
            num(r.value),
            num(r.flux_over_gamma),
            num(r.g2_zero)
        )
        .unwrap();
    }
    let e = emitter(&s.params, "sweep base point")?;
    let mut summary = base_summary(s, &e, warnings)?;
    let best_g2 = argmax(&rows, |r| r.g2_zero);
    summary.sweep = Some(SweepSummary {
        variable: if s.task == Task::SweepOmega {
            "omega"
        } else {
            "delta"
        },
        points: rows.len(),
        max_flux_at: argmax(&rows, |r| r.flux_over_gamma).value,
        max_g2_zero_at: best_g2.value,
        max_g2_zero: best_g2.g2_zero,
    });
    Ok(Artifacts { csv, summary })
}

fn validate(s: &Scenario, warnings: Vec<String>) -> Result<Artifacts, CliError> {
    let base = LadderParams {
        n_levels: 3,
        delta: 0.0,
        ..s.params
    };
    let (alpha, gamma) = (base.alpha, base.gamma);
    let rows = s
        .validate
        .epsilons
        .par_iter()
        .map(|&eps| {
            let omega = eps * alpha.abs();
            let e = emitter(
                &base.with_omega(omega),
                format!("validation at epsilon {eps}"),
            )?;
            let ctx = CliError::physics(format!("validation at epsilon {eps}"));
            let flux = e.flux(Line::Tprf).map_err(ctx)? / gamma;
            let g2 = e
                .g2_zero(Line::Tprf)
                .map_err(CliError::physics(format!("validation at epsilon {eps}")))?;
            let oracle = analytic_flux(AnalyticParams::new(omega, alpha, gamma), gamma);
            let flux_a = oracle.value / gamma;
            let g2_a = analytic_g2zero(omega, alpha, gamma);
            Ok(ValidationRow {
                epsilon: eps,
                in_validity: oracle.in_validity,
                flux_over_gamma: flux,
                flux_over_gamma_analytic: flux_a,
                flux_deviation: (flux / flux_a - 1.0).abs(),
                g2_zero: g2,
                g2_zero_analytic: g2_a,
                g2_deviation: (g2 / g2_a - 1.0).abs(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let tol = s.validate.tolerance;
    let passed = rows
        .iter()
        .filter(|r| r.epsilon <= VALIDITY_EPSILON)
        .all(|r| r.flux_deviation <= tol && r.g2_deviation <= tol);

    let mut csv = String::from(
        "# epsilon, flux_over_gamma, flux_over_gamma_analytic, flux_deviation, g2_zero, g2_zero_analytic, g2_deviation\n",
    );
    for r in &rows {
        let cols = [
            r.epsilon,
            r.flux_over_gamma,
            r.flux_over_gamma_analytic,
            r.flux_deviation,
            r.g2_zero,
            r.g2_zero_analytic,
            r.g2_deviation,
        ];
        let line: Vec<String> = cols.iter().map(|&c| num(c)).collect();
        writeln!(csv, "{}", line.join(", ")).unwrap();
    }
    let mut warnings = warnings;
    for r in rows.iter().filter(|r| !r.in_validity) {
        warnings.push(format!(
            "epsilon {} is outside the closed-form validity range",
            r.epsilon
        ));
    }
    let e = emitter(&base, "validate base point")?;
    let mut summary = base_summary(s, &e, warnings)?;
    summary.validation = Some(Validation {
        tolerance: tol,
        passed,
        rows,
    });
    Ok(Artifacts { csv, summary })
}

/// Executes the scenario. `jobs` bounds sweep parallelism (None: all cores).
pub fn run_scenario(
    s: &Scenario,
    warnings: Vec<String>,
    jobs: Option<usize>,
) -> Result<Artifacts, CliError> {
    match s.task {
        Task::Spectrum => spectrum(s, warnings),
        Task::G2 => g2(s, warnings),
        Task::SweepOmega | Task::SweepDelta => sweep_task(s, warnings, jobs),
        Task::Validate => validate(s, warnings),
    }
}
