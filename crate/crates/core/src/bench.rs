//! Declarative experiments: one JSON file names the instances, sweeps,
//! trial count, estimator configuration and base seed; running it writes a
//! per-trial CSV, a JSON summary and optionally plain-text plot data.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::EstimatorConfig;
use crate::generators::{FamilySpec, GenError};
use crate::rng::split_seed;
use crate::verify::{
    run_trials, sweep_alpha, sweep_avg_degree, sweep_epsilon, write_trials_csv, ScalingReport,
    TrialBatch, TrialBatchReport, VerifyError, MIN_SWEEP_POINTS,
};

#[derive(Debug, Error)]
pub enum BenchError {
    /// The spec failed to parse or validate; `field` is a JSON path.
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl BenchError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        BenchError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub id: String,
    pub generator: FamilySpec,
    /// Generator seed; derived from the experiment seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variable", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSpec {
    /// Padded forest unions at average degree about `d`.
    Alpha { n: usize, d: f64, alphas: Vec<u32> },
    AvgDegree {
        n: usize,
        alpha: u32,
        degrees: Vec<f64>,
    },
    /// One generated instance, several values of `ε`.
    Epsilon {
        generator: FamilySpec,
        epsilons: Vec<f64>,
    },
}

impl SweepSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SweepSpec::Alpha { .. } => "alpha",
            SweepSpec::AvgDegree { .. } => "avg_degree",
            SweepSpec::Epsilon { .. } => "epsilon",
        }
    }

    fn len(&self) -> usize {
        match self {
            SweepSpec::Alpha { alphas, .. } => alphas.len(),
            SweepSpec::AvgDegree { degrees, .. } => degrees.len(),
            SweepSpec::Epsilon { epsilons, .. } => epsilons.len(),
        }
    }
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    pub trials: u64,
    #[serde(default)]
    pub config: EstimatorConfig,
    #[serde(default)]
    pub instances: Vec<InstanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<Vec<SweepSpec>>,
}

impl ExperimentSpec {
    /// Parses and validates; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            BenchError::invalid(
                if path == "." {
                    "spec".to_string()
                } else {
                    path
                },
                e.into_inner().to_string(),
            )
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::invalid("trials", "must be at least 1"));
        }
        self.config
            .validate()
            .map_err(|e| BenchError::invalid("config", e.to_string()))?;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(BenchError::invalid(
                "name",
                "must be a non-empty file-name-safe string",
            ));
        }
        if let Some(sweeps) = &self.sweeps {
            if sweeps.is_empty() {
                return Err(BenchError::invalid("sweeps", "list is empty"));
            }
            for (i, s) in sweeps.iter().enumerate() {
                if s.len() < MIN_SWEEP_POINTS {
                    let list = match s {
                        SweepSpec::Alpha { .. } => "alphas",
                        SweepSpec::AvgDegree { .. } => "degrees",
                        SweepSpec::Epsilon { .. } => "epsilons",
                    };
                    return Err(BenchError::invalid(
                        format!("sweeps[{i}].{list}"),
                        format!("needs at least {MIN_SWEEP_POINTS} points, got {}", s.len()),
                    ));
                }
            }
        }
        if self.instances.is_empty() && self.sweeps.is_none() {
            return Err(BenchError::invalid(
                "spec",
                "nothing to run: give instances or sweeps",
            ));
        }
        let mut ids: Vec<&str> = self.instances.iter().map(|i| i.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(BenchError::invalid(
                "instances",
                format!("duplicate id {:?}", w[0]),
            ));
        }
        if let Some((i, _)) = self
            .instances
            .iter()
            .enumerate()
            .find(|(_, s)| s.id.is_empty())
        {
            return Err(BenchError::invalid(
                format!("instances[{i}].id"),
                "must be non-empty",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub name: String,
    pub report: ScalingReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub seed: u64,
    pub trials: u64,
    pub config: EstimatorConfig,
    pub batches: Vec<TrialBatchReport>,
    pub sweeps: Vec<SweepOutcome>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: ExperimentSummary,
    /// Written files, in creation order.
    pub files: Vec<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs every instance and sweep, in file order, and writes
/// `<name>.trials.csv`, `<name>.summary.json` and, with `emit_plots`, one
/// `<name>.sweep<i>_<variable>.dat` per sweep.
pub fn run_experiment(
    spec: &ExperimentSpec,
    out_dir: &Path,
    emit_plots: bool,
) -> Result<ExperimentOutput, BenchError> {
    spec.validate()?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut batches: Vec<TrialBatch> = Vec::new();

    for (i, inst) in spec.instances.iter().enumerate() {
        let gen_seed = inst
            .seed
            .unwrap_or_else(|| split_seed(spec.seed, 2 * i as u64));
        let trial_seed = split_seed(spec.seed, 2 * i as u64 + 1);
        let generated = inst.generator.generate(gen_seed).map_err(|e| match e {
            GenError::Graph(_) => BenchError::Generate(e),
            other => BenchError::invalid(format!("instances[{i}].generator"), other.to_string()),
        })?;
        for (j, g) in generated.iter().enumerate() {
            let id = if g.label.is_empty() {
                inst.id.clone()
            } else {
                format!("{}/{}", inst.id, g.label)
            };
            batches.push(run_trials(
                &id,
                &g.graph,
                &g.sidecar.truth,
                &spec.config,
                spec.trials,
                split_seed(trial_seed, j as u64),
            )?);
        }
    }

    let mut sweeps = Vec::new();
    for (i, s) in spec.sweeps.iter().flatten().enumerate() {
        let seed = split_seed(spec.seed, (1 << 32) + i as u64);
        let (report, sweep_batches) = match s {
            SweepSpec::Alpha { n, d, alphas } => {
                sweep_alpha(&spec.config, *n, *d, alphas, spec.trials, seed)
            }
            SweepSpec::AvgDegree { n, alpha, degrees } => {
                sweep_avg_degree(&spec.config, *n, *alpha, degrees, spec.trials, seed)
            }
            SweepSpec::Epsilon {
                generator,
                epsilons,
            } => {
                let generated = generator
                    .generate(split_seed(seed, u64::MAX))
                    .map_err(|e| {
                        BenchError::invalid(format!("sweeps[{i}].generator"), e.to_string())
                    })?;
                let g = &generated[0];
                sweep_epsilon(
                    &spec.config,
                    &g.graph,
                    &g.sidecar.truth,
                    generator.name(),
                    epsilons,
                    spec.trials,
                    seed,
                )
            }
        }
        .map_err(|e| match e {
            VerifyError::InvalidArgument(m)
            | VerifyError::Estimate(crate::EstimateError::InvalidConfig(m)) => {
                BenchError::invalid(format!("sweeps[{i}]"), m)
            }
            VerifyError::Generate(g) => BenchError::invalid(format!("sweeps[{i}]"), g.to_string()),
            other => BenchError::Verify(other),
        })?;
        sweeps.push(SweepOutcome {
            name: format!("sweep{i}_{}", s.name()),
            report,
        });
        batches.extend(sweep_batches);
    }

    let mut files = Vec::new();
    let csv_path = out_dir.join(format!("{}.trials.csv", spec.name));
    let f = File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_trials_csv(BufWriter::new(f), batches.iter().flat_map(|b| &b.records))?;
    files.push(csv_path);

    let summary = ExperimentSummary {
        name: spec.name.clone(),
        seed: spec.seed,
        trials: spec.trials,
        config: spec.config,
        batches: batches.into_iter().map(|b| b.report).collect(),
        sweeps,
    };
    let json_path = out_dir.join(format!("{}.summary.json", spec.name));
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    fs::write(&json_path, text).map_err(io_err(&json_path))?;
    files.push(json_path);

    if emit_plots {
        for s in &summary.sweeps {
            let path = out_dir.join(format!("{}.{}.dat", spec.name, s.name));
            write_plot(&path, &s.report).map_err(io_err(&path))?;
            files.push(path);
        }
    }
    Ok(ExperimentOutput { summary, files })
}

fn write_plot(path: &Path, report: &ScalingReport) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# x mean_degree_queries mean_rand_edge_queries mean_total_queries mean_tau_used"
    )?;
    for p in &report.points {
        writeln!(
            w,
            "{} {} {} {} {}",
            p.x,
            p.mean_degree_queries,
            p.mean_rand_edge_queries,
            p.mean_total_queries,
            p.mean_tau_used
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(text: &str) -> String {
        match ExperimentSpec::from_json(text) {
            Err(BenchError::Invalid { field, .. }) => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_fields() {
        assert_eq!(
            field_of(r#"{"seed": 1, "trials": 2, "sweeps": []}"#),
            "sweeps"
        );
        assert_eq!(
            field_of(r#"{"seed": 1, "trials": 0, "sweeps": []}"#),
            "trials"
        );
        assert_eq!(
            field_of(
                r#"{"seed": 1, "trials": 2, "sweeps": [{"variable": "alpha", "n": 100, "d": 2, "alphas": [2]}]}"#
            ),
            "sweeps[0].alphas"
        );
        assert_eq!(field_of(r#"{"seed": "x", "trials": 2}"#), "seed");
        assert_eq!(
            field_of(r#"{"seed": 1, "trials": 2, "config": {"epsilon": 2.0}, "instances": []}"#),
            "config"
        );
        assert_eq!(
            field_of(
                r#"{"seed": 1, "trials": 2, "instances": [{"id": "a", "generator": {"family": "nope"}}]}"#
            ),
            "instances[0].generator.family"
        );
        assert_eq!(field_of(r#"{"seed": 1, "trials": 2}"#), "spec");
        assert_eq!(field_of(r#"{"seed": 1, "trials": 2, "bogus": 3}"#), "bogus");
    }

    #[test]
    fn small_experiment_writes_files() {
        let spec = ExperimentSpec::from_json(
            r#"{
                "name": "t", "seed": 7, "trials": 3,
                "instances": [{"id": "c4", "generator": {"family": "cycle", "n": 4}}],
                "sweeps": [{"variable": "epsilon", "generator": {"family": "cycle", "n": 6},
                            "epsilons": [0.1, 0.2, 0.3, 0.4]}]
            }"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&spec, dir.path(), true).unwrap();
        assert_eq!(out.files.len(), 3);
        assert_eq!(out.summary.batches.len(), 5);
        assert_eq!(out.summary.batches[0].success_count, 3);
        let csv = fs::read_to_string(&out.files[0]).unwrap();
        assert_eq!(csv.lines().count(), 1 + 5 * 3);
        let again = run_experiment(&spec, dir.path(), true).unwrap();
        assert_eq!(fs::read_to_string(&again.files[0]).unwrap(), csv);
    }
}
