//! Empirical displacement of fitted vertices from their true positions over
//! repeated noisy samples. Reporting only; nothing here corrects the fit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::FitOptions;
use crate::metrics::vertex_error;
use crate::pipeline::{reconstruct_and_fit, ReconstructOptions};
use crate::sampler::{check_assumptions, derive_seed, sample_graph, SampleOptions};
use crate::spatial::IndexRegistry;
use crate::types::EmbeddedGraph;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasOptions {
    pub noise_radius: f64,
    pub spacing: f64,
}

impl BiasOptions {
    pub fn for_epsilon(epsilon: f64) -> Self {
        BiasOptions {
            noise_radius: epsilon / 2.0,
            spacing: epsilon / 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    /// Fitted minus true position, per true vertex; absent on failure.
    pub displacements: Option<Vec<Vec<f64>>>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexBias {
    pub vertex: usize,
    pub degree: usize,
    pub mean: Vec<f64>,
    pub mean_norm: f64,
    /// Sample covariance (n − 1 denominator); zero with fewer than two trials.
    pub covariance: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasReport {
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    pub vertices: Vec<VertexBias>,
    pub per_trial: Vec<TrialOutcome>,
}

/// Samples, reconstructs and fits `trials` times and summarizes the
/// displacement of every vertex under the best isomorphism.
pub fn estimate_bias(
    truth: &EmbeddedGraph,
    epsilon: f64,
    trials: usize,
    seed: u64,
    options: &BiasOptions,
) -> Result<BiasReport> {
    let report = check_assumptions(truth, epsilon)?;
    if !report.pass {
        return Err(Error::InvalidGraph(format!(
            "graph violates sampling assumptions: {}",
            report.violations.join("; ")
        )));
    }
    let registry = IndexRegistry::builtin();
    let recon = ReconstructOptions::from_epsilon(epsilon);
    let fit_options = FitOptions::default();

    let per_trial: Vec<TrialOutcome> = (0..trials)
        .map(|t| {
            let trial_seed = derive_seed(seed, 2, t as u64, 0);
            let sample_options = SampleOptions {
                noise_radius: options.noise_radius,
                spacing: options.spacing,
                seed: trial_seed,
                include_vertices: true,
            };
            let outcome = sample_graph(truth, epsilon, &sample_options)
                .and_then(|cloud| reconstruct_and_fit(&cloud, &recon, &fit_options, &registry))
                .and_then(|model| {
                    let err = vertex_error(&model.embedded, truth)?;
                    Ok((0..truth.graph().vertex_count())
                        .map(|v| {
                            model.embedded.position(err.mapping[v])
                                .iter()
                                .zip(truth.position(v))
                                .map(|(f, t)| f - t)
                                .collect()
                        })
                        .collect())
                });
            match outcome {
                Ok(d) => TrialOutcome {
                    seed: trial_seed,
                    displacements: Some(d),
                    error: None,
                },
                Err(e) => TrialOutcome {
                    seed: trial_seed,
                    displacements: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let ok: Vec<&Vec<Vec<f64>>> = per_trial
        .iter()
        .filter_map(|t| t.displacements.as_ref())
        .collect();
    let dim = truth.dim().unwrap_or(0);
    let degrees = truth.graph().degrees();
    let vertices = (0..truth.graph().vertex_count())
        .map(|v| {
            let samples: Vec<&[f64]> = ok.iter().map(|d| d[v].as_slice()).collect();
            let (mean, covariance) = mean_and_covariance(&samples, dim);
            VertexBias {
                vertex: v,
                degree: degrees[v],
                mean_norm: mean.iter().map(|x| x * x).sum::<f64>().sqrt(),
                mean,
                covariance,
            }
        })
        .collect();

    Ok(BiasReport {
        trials,
        successes: ok.len(),
        failures: trials - ok.len(),
        vertices,
        per_trial,
    })
}

fn mean_and_covariance(samples: &[&[f64]], dim: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut mean = vec![0.0; dim];
    let mut cov = vec![vec![0.0; dim]; dim];
    if samples.is_empty() {
        return (mean, cov);
    }
    for s in samples {
        for d in 0..dim {
            mean[d] += s[d];
        }
    }
    let n = samples.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    if samples.len() > 1 {
        for s in samples {
            for a in 0..dim {
                for b in 0..dim {
                    cov[a][b] += (s[a] - mean[a]) * (s[b] - mean[b]);
                }
            }
        }
        cov.iter_mut().flatten().for_each(|c| *c /= n - 1.0);
    }
    (mean, cov)
}
