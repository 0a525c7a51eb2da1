use std::fs;
use std::path::{Path, PathBuf};

use super::config::{parse_key_values, ExperimentConfig, Formulation};
use super::ExperimentError;
use crate::analysis::{oscillation_metric, sup_error, DEFAULT_TAIL_FRACTION};
use crate::brownian::{BrownianGrid, GAUSSIAN_METHOD, PRNG_ALGORITHM};
use crate::integrators::{integrate, MidpointOptions, Scheme};
use crate::models::{build_protein_model, build_transformed_protein_model};
use crate::trajectory::Trajectory;
use crate::transform::{protein_transform, TransformPair};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REFERENCE_FILE: &str = "reference.csv";

const T_END_NOTE: &str = "chosen so every step divides it; horizons are not given with the figures";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesRole {
    Reference,
    Run,
}

impl SeriesRole {
    fn name(self) -> &'static str {
        match self {
            SeriesRole::Reference => "reference",
            SeriesRole::Run => "run",
        }
    }
}

/// Outcome of one series. A blow-up is recorded, not raised.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRecord {
    pub name: String,
    pub role: SeriesRole,
    pub scheme: Scheme,
    pub formulation: Formulation,
    pub h: f64,
    /// CSV file relative to the manifest, absent for failed series.
    pub file: Option<String>,
    pub status: SeriesStatus,
    pub sup_error: Option<f64>,
    pub oscillation: Option<f64>,
    pub lyapunov: Option<f64>,
}

impl SeriesRecord {
    pub fn failed(&self) -> bool {
        matches!(self.status, SeriesStatus::Failed(_))
    }

    /// Sup error vs the reference, infinite for a failed series.
    pub fn sup_error_or_inf(&self) -> f64 {
        self.sup_error.unwrap_or(f64::INFINITY)
    }
}

/// Everything needed to reproduce and locate the outputs of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub prng: String,
    pub gaussian: String,
    pub seed: u64,
    pub software_version: String,
    pub summary_file: Option<String>,
    pub series: Vec<SeriesRecord>,
}

impl RunManifest {
    pub fn any_failed(&self) -> bool {
        self.series.iter().any(SeriesRecord::failed)
    }

    pub fn find(&self, scheme: Scheme, formulation: Formulation, h: f64) -> Option<&SeriesRecord> {
        self.series.iter().find(|s| {
            s.role == SeriesRole::Run && s.scheme == scheme && s.formulation == formulation && s.h == h
        })
    }

    pub fn reference(&self) -> Option<&SeriesRecord> {
        self.series.iter().find(|s| s.role == SeriesRole::Reference)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# stiffsde run manifest\n");
        let mut line = |k: &str, v: &str| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        };
        line("software_version", &self.software_version);
        line("prng", &self.prng);
        line("gaussian", &self.gaussian);
        line("seed", &self.seed.to_string());
        line("t_end_note", T_END_NOTE);
        for (k, v) in self.config.fields() {
            line(&format!("config.{k}"), &v);
        }
        if let Some(f) = &self.summary_file {
            line("summary_file", f);
        }
        line("series_count", &self.series.len().to_string());
        for (i, s) in self.series.iter().enumerate() {
            let key = |field: &str| format!("series.{i}.{field}");
            line(&key("name"), &s.name);
            line(&key("role"), s.role.name());
            line(&key("scheme"), s.scheme.name());
            line(&key("formulation"), s.formulation.name());
            line(&key("h"), &s.h.to_string());
            if let Some(f) = &s.file {
                line(&key("file"), f);
            }
            match &s.status {
                SeriesStatus::Ok => line(&key("status"), "ok"),
                SeriesStatus::Failed(msg) => {
                    line(&key("status"), "failed");
                    line(&key("error"), &msg.replace('\n', " "));
                }
            }
            for (field, value) in [
                ("sup_error", s.sup_error),
                ("oscillation_metric", s.oscillation),
                ("lyapunov", s.lyapunov),
            ] {
                if let Some(v) = value {
                    line(&key(field), &v.to_string());
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let pairs = parse_key_values(text)?;
        let get = |k: &str| -> Option<&str> {
            pairs.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str())
        };
        let need = |k: &str| -> Result<&str, ExperimentError> {
            get(k).ok_or_else(|| ExperimentError::Config(format!("manifest is missing `{k}`")))
        };
        let config_text: String = pairs
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("config.").map(|k| format!("{k} = {v}\n")))
            .collect();
        let config = ExperimentConfig::parse(&config_text)?;
        let count: usize = need("series_count")?
            .parse()
            .map_err(|_| ExperimentError::Config("bad series_count".into()))?;
        let num = |k: &str| -> Result<Option<f64>, ExperimentError> {
            get(k)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| ExperimentError::Config(format!("`{k}`: bad number `{v}`")))
                })
                .transpose()
        };
        let mut series = Vec::with_capacity(count);
        for i in 0..count {
            let key = |field: &str| format!("series.{i}.{field}");
            let role = match need(&key("role"))? {
                "reference" => SeriesRole::Reference,
                "run" => SeriesRole::Run,
                other => return Err(ExperimentError::Config(format!("unknown role `{other}`"))),
            };
            let status = match need(&key("status"))? {
                "ok" => SeriesStatus::Ok,
                _ => SeriesStatus::Failed(get(&key("error")).unwrap_or("").to_string()),
            };
            series.push(SeriesRecord {
                name: need(&key("name"))?.to_string(),
                role,
                scheme: need(&key("scheme"))?
                    .parse()
                    .map_err(|e: crate::Error| ExperimentError::Config(e.to_string()))?,
                formulation: need(&key("formulation"))?.parse()?,
                h: num(&key("h"))?.ok_or_else(|| ExperimentError::Config("series without h".into()))?,
                file: get(&key("file")).map(str::to_string),
                status,
                sup_error: num(&key("sup_error"))?,
                oscillation: num(&key("oscillation_metric"))?,
                lyapunov: num(&key("lyapunov"))?,
            });
        }
        Ok(RunManifest {
            config,
            prng: need("prng")?.to_string(),
            gaussian: need("gaussian")?.to_string(),
            seed: need("seed")?
                .parse()
                .map_err(|_| ExperimentError::Config("bad seed".into()))?,
            software_version: need("software_version")?.to_string(),
            summary_file: get("summary_file").map(str::to_string),
            series,
        })
    }

    pub fn read(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::parse(&text)
    }
}

/// Series produced in memory, before anything is written.
pub struct SeriesOutput {
    pub record: SeriesRecord,
    /// States in `x`.
    pub trajectory: Option<Trajectory>,
    /// States in `X` for transformed series.
    pub transformed: Option<Trajectory>,
}

/// The whole experiment in memory.
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub pair: Option<TransformPair>,
    pub series: Vec<SeriesOutput>,
}

impl ExperimentOutput {
    pub fn record(&self, scheme: Scheme, formulation: Formulation, h: f64) -> Option<&SeriesRecord> {
        self.series
            .iter()
            .map(|s| &s.record)
            .find(|s| s.role == SeriesRole::Run && s.scheme == scheme && s.formulation == formulation && s.h == h)
    }
}

fn series_name(scheme: Scheme, formulation: Formulation, h: f64) -> String {
    format!("{}-{}-h{}", scheme.name(), formulation.name(), h)
}

/// Run every series of `config` without touching the filesystem.
pub fn simulate(config: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    config.validate()?;
    let params = config.protein_params();
    let grid = BrownianGrid::sample_steps(config.seed, config.t_end, config.reference_steps()?)?;
    let opts = MidpointOptions::default().with_iterations(config.fixed_point_iterations);
    let original = build_protein_model(&params)?;

    let wants_transform = config.formulations.contains(&Formulation::Transformed);
    let (transformed_model, pair) = if wants_transform {
        (
            Some(build_transformed_protein_model(&params)?),
            Some(protein_transform(params.lambda)?),
        )
    } else {
        (None, None)
    };

    let osc_target = (config.sigma == 0.0).then(|| params.deterministic_equilibrium());
    let stationary_at_one = config.alpha == 1.0;

    let reference = integrate(&original, Scheme::Midpoint, params.x0, &grid, config.reference_h, &opts);
    let reference_traj = reference.as_ref().ok().cloned();
    let mut series = Vec::new();
    series.push(SeriesOutput {
        record: SeriesRecord {
            name: "reference".into(),
            role: SeriesRole::Reference,
            scheme: Scheme::Midpoint,
            formulation: Formulation::Original,
            h: config.reference_h,
            file: None,
            status: match &reference {
                Ok(_) => SeriesStatus::Ok,
                Err(e) => SeriesStatus::Failed(e.to_string()),
            },
            sup_error: reference.as_ref().ok().map(|_| 0.0),
            oscillation: reference
                .as_ref()
                .ok()
                .zip(osc_target)
                .and_then(|(t, target)| oscillation_metric(t, target, DEFAULT_TAIL_FRACTION).ok()),
            lyapunov: reference
                .as_ref()
                .ok()
                .filter(|_| stationary_at_one)
                .and_then(|t| log_rate(t.final_state()? , t.final_time(), None)),
        },
        trajectory: reference_traj.clone(),
        transformed: None,
    });

    for &h in &config.h_list {
        for &scheme in &config.schemes {
            for &formulation in &config.formulations {
                let result = match formulation {
                    Formulation::Original => integrate(&original, scheme, params.x0, &grid, h, &opts)
                        .map(|t| (t, None)),
                    Formulation::Transformed => {
                        let (model, pair) = (transformed_model.as_ref().unwrap(), pair.unwrap());
                        integrate(model, scheme, pair.forward(params.x0), &grid, h, &opts).map(|big| {
                            let x = big.map_states(|v| pair.inverse(v), original.label());
                            (x, Some(big))
                        })
                    }
                };
                let mut record = SeriesRecord {
                    name: series_name(scheme, formulation, h),
                    role: SeriesRole::Run,
                    scheme,
                    formulation,
                    h,
                    file: None,
                    status: SeriesStatus::Ok,
                    sup_error: None,
                    oscillation: None,
                    lyapunov: None,
                };
                match result {
                    Ok((x, big)) => {
                        record.sup_error = reference_traj.as_ref().and_then(|r| sup_error(&x, r).ok());
                        record.oscillation = osc_target
                            .and_then(|target| oscillation_metric(&x, target, DEFAULT_TAIL_FRACTION).ok());
                        if stationary_at_one {
                            record.lyapunov = match &big {
                                // 1 − x = X^{1+λ}: use X to avoid cancellation
                                Some(b) => b.final_state().and_then(|v| {
                                    log_rate(v, b.final_time(), Some(1.0 + params.lambda))
                                }),
                                None => x.final_state().and_then(|v| log_rate(v, x.final_time(), None)),
                            };
                        }
                        series.push(SeriesOutput {
                            record,
                            trajectory: Some(x),
                            transformed: big,
                        });
                    }
                    Err(e) => {
                        record.status = SeriesStatus::Failed(e.to_string());
                        series.push(SeriesOutput {
                            record,
                            trajectory: None,
                            transformed: None,
                        });
                    }
                }
            }
        }
    }
    Ok(ExperimentOutput {
        config: config.clone(),
        pair,
        series,
    })
}

/// `ln|1 − x(T)| / T`, or `power · ln|X(T)| / T` when the state is the
/// transformed variable.
fn log_rate(state: f64, t: f64, power: Option<f64>) -> Option<f64> {
    let (v, scale) = match power {
        Some(p) => (state.abs(), p),
        None => ((1.0 - state).abs(), 1.0),
    };
    (v > 0.0 && v.is_finite() && t > 0.0).then(|| scale * v.ln() / t)
}

fn format_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn trajectory_csv(x: &Trajectory, big: Option<&Trajectory>) -> String {
    let mut out = String::with_capacity(x.len() * 48);
    match big {
        None => {
            out.push_str("t,x\n");
            for (t, v) in x.times().iter().zip(x.states()) {
                out.push_str(&format!("{t},{v}\n"));
            }
        }
        Some(b) => {
            out.push_str("t,X,x\n");
            for ((t, bv), v) in x.times().iter().zip(b.states()).zip(x.states()) {
                out.push_str(&format!("{t},{bv},{v}\n"));
            }
        }
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    fs::write(path, contents).map_err(|e| ExperimentError::io(path, e))
}

/// Run `config`, write one CSV per successful series, a summary CSV and the
/// manifest into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, ExperimentError> {
    let output = simulate(config)?;
    fs::create_dir_all(out_dir).map_err(|e| ExperimentError::io(out_dir, e))?;

    let mut records = Vec::with_capacity(output.series.len());
    for s in &output.series {
        let mut record = s.record.clone();
        if let Some(x) = &s.trajectory {
            let file = match record.role {
                SeriesRole::Reference => REFERENCE_FILE.to_string(),
                SeriesRole::Run => format!("{}.csv", record.name),
            };
            write(&out_dir.join(&file), &trajectory_csv(x, s.transformed.as_ref()))?;
            record.file = Some(file);
        }
        records.push(record);
    }

    let mut summary = String::from("series,role,scheme,formulation,h,status,sup_error,oscillation_metric,lyapunov\n");
    for r in &records {
        summary.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.role.name(),
            r.scheme,
            r.formulation,
            r.h,
            if r.failed() { "failed" } else { "ok" },
            format_opt(r.sup_error),
            format_opt(r.oscillation),
            format_opt(r.lyapunov),
        ));
    }
    write(&out_dir.join(SUMMARY_FILE), &summary)?;

    let manifest = RunManifest {
        config: config.clone(),
        prng: PRNG_ALGORITHM.to_string(),
        gaussian: GAUSSIAN_METHOD.to_string(),
        seed: config.seed,
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        summary_file: Some(SUMMARY_FILE.to_string()),
        series: records,
    };
    write(&out_dir.join(MANIFEST_FILE), &manifest.to_text())?;
    Ok(manifest)
}

pub fn manifest_path(out_dir: &Path) -> PathBuf {
    out_dir.join(MANIFEST_FILE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::presets::resolve_preset;

    #[test]
    fn manifest_text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_experiment(&resolve_preset("fig1a").unwrap(), dir.path()).unwrap();
        let back = RunManifest::read(&manifest_path(dir.path())).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn fig1a_records_oscillations() {
        let out = simulate(&resolve_preset("fig1a").unwrap()).unwrap();
        for scheme in [Scheme::Euler, Scheme::Midpoint] {
            let r = out.record(scheme, Formulation::Original, 0.13).unwrap();
            assert!(!r.failed());
            assert!(r.oscillation.unwrap() > 0.05);
        }
    }

    #[test]
    fn transformed_series_lyapunov_uses_transformed_state() {
        let out = simulate(&resolve_preset("fig2b").unwrap()).unwrap();
        let r = out.record(Scheme::Midpoint, Formulation::Transformed, 0.01).unwrap();
        // slope of ln(1 − x) is close to −(1 + λ) = −19
        let mu = r.lyapunov.unwrap();
        assert!((mu + 19.0).abs() < 2.0, "{mu}");
    }
}
