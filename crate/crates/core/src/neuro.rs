//! Scoring network: one sigmoid hidden layer of descriptor neurons and a
//! fully connected sigmoid output layer, trained online by backpropagation
//! against vertex survival targets.
//!
//! Each hidden neuron has a single scalar input weight and a single bias.
//! With [`HiddenWiring::OneToOne`] (the default) hidden neuron `j` sees input
//! `j` only, so the hidden layer is a learned re-weighting of the criterion
//! magnitudes. [`HiddenWiring::Shared`] feeds every hidden neuron the sum of
//! all inputs instead.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack;
use crate::error::{Error, Result};
use crate::mesh::{build_adjacency, Mesh};
use crate::ranking::{compute_feature_table, criterion_inputs, CriterionConfig, FeatureRecord};

pub const PARAMS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenWiring {
    #[default]
    OneToOne,
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub format_version: u32,
    pub hidden_count: usize,
    #[serde(default)]
    pub wiring: HiddenWiring,
    pub hidden_weights: Vec<f64>,
    pub hidden_biases: Vec<f64>,
    /// Row `k` holds the weights from every hidden neuron into output `k`.
    pub output_weights: Vec<Vec<f64>>,
    pub output_biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl TrainingSample {
    pub fn scalar(input: Vec<f64>, target: f64) -> Self {
        Self {
            input,
            target: vec![target],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub eta: f64,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: 0.5,
            epochs: 40,
            seed: 0,
            shuffle: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Network with one output neuron.
pub fn init_network(
    hidden_count: usize,
    criterion_rates: &[f64],
    seed: u64,
) -> Result<NetworkParams> {
    init_network_with(
        hidden_count,
        1,
        HiddenWiring::OneToOne,
        criterion_rates,
        seed,
    )
}

pub fn init_network_with(
    hidden_count: usize,
    output_count: usize,
    wiring: HiddenWiring,
    criterion_rates: &[f64],
    seed: u64,
) -> Result<NetworkParams> {
    if hidden_count == 0 || output_count == 0 {
        return Err(Error::InvalidArgument(
            "network layers must be non-empty".into(),
        ));
    }
    if criterion_rates.len() != hidden_count {
        return Err(Error::SizeMismatch {
            expected: hidden_count,
            found: criterion_rates.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let output_weights = (0..output_count)
        .map(|_| {
            (0..hidden_count)
                .map(|_| rng.random_range(-0.5..=0.5))
                .collect()
        })
        .collect();
    Ok(NetworkParams {
        format_version: PARAMS_FORMAT_VERSION,
        hidden_count,
        wiring,
        hidden_weights: criterion_rates.to_vec(),
        hidden_biases: vec![0.0; hidden_count],
        output_weights,
        output_biases: vec![0.0; output_count],
    })
}

impl NetworkParams {
    pub fn output_count(&self) -> usize {
        self.output_biases.len()
    }

    /// Input wired into hidden neuron `j`.
    fn fan_in(&self, input: &[f64], j: usize) -> f64 {
        match self.wiring {
            HiddenWiring::OneToOne => input[j],
            HiddenWiring::Shared => input.iter().sum(),
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if self.wiring == HiddenWiring::OneToOne && input.len() != self.hidden_count {
            return Err(Error::SizeMismatch {
                expected: self.hidden_count,
                found: input.len(),
            });
        }
        if input.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let h = self.hidden_count;
        let shapes_ok = h >= 1
            && self.hidden_weights.len() == h
            && self.hidden_biases.len() == h
            && !self.output_biases.is_empty()
            && self.output_weights.len() == self.output_biases.len()
            && self.output_weights.iter().all(|r| r.len() == h);
        if !shapes_ok {
            return Err(Error::InvalidArgument(
                "network parameter shapes are inconsistent".into(),
            ));
        }
        let all = self
            .hidden_weights
            .iter()
            .chain(&self.hidden_biases)
            .chain(self.output_weights.iter().flatten())
            .chain(&self.output_biases);
        if all.clone().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "network parameters must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }
}

pub fn forward(params: &NetworkParams, input: &[f64]) -> Result<Activations> {
    params.check_input(input)?;
    let hidden: Vec<f64> = (0..params.hidden_count)
        .map(|j| {
            sigmoid(params.hidden_biases[j] + params.hidden_weights[j] * params.fan_in(input, j))
        })
        .collect();
    let output = params
        .output_weights
        .iter()
        .zip(&params.output_biases)
        .map(|(row, b)| sigmoid(row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + b))
        .collect();
    Ok(Activations { hidden, output })
}

pub fn loss(output: &[f64], target: &[f64]) -> f64 {
    0.5 * output
        .iter()
        .zip(target)
        .map(|(o, t)| (t - o) * (t - o))
        .sum::<f64>()
}

/// One online gradient step. Returns the updated parameters and the loss
/// measured before the update.
pub fn backprop_step(
    params: &NetworkParams,
    sample: &TrainingSample,
    eta: f64,
) -> Result<(NetworkParams, f64)> {
    let mut next = params.clone();
    let e = backprop_in_place(&mut next, sample, eta)?;
    Ok((next, e))
}

fn backprop_in_place(params: &mut NetworkParams, sample: &TrainingSample, eta: f64) -> Result<f64> {
    if sample.target.len() != params.output_count() {
        return Err(Error::SizeMismatch {
            expected: params.output_count(),
            found: sample.target.len(),
        });
    }
    let act = forward(params, &sample.input)?;
    let e = loss(&act.output, &sample.target);

    let out_delta: Vec<f64> = act
        .output
        .iter()
        .zip(&sample.target)
        .map(|(o, t)| (t - o) * o * (1.0 - o))
        .collect();
    let hidden_delta: Vec<f64> = (0..params.hidden_count)
        .map(|j| {
            let back: f64 = out_delta
                .iter()
                .zip(&params.output_weights)
                .map(|(d, row)| d * row[j])
                .sum();
            back * act.hidden[j] * (1.0 - act.hidden[j])
        })
        .collect();

    for (k, d) in out_delta.iter().enumerate() {
        for (w, h) in params.output_weights[k].iter_mut().zip(&act.hidden) {
            *w += eta * d * h;
        }
        params.output_biases[k] += eta * d;
    }
    for (j, d) in hidden_delta.iter().enumerate() {
        let x = params.fan_in(&sample.input, j);
        params.hidden_weights[j] += eta * d * x;
        params.hidden_biases[j] += eta * d;
    }
    Ok(e)
}

/// Online training. Returns the final parameters and the mean loss of each
/// epoch (measured sample by sample during the pass).
pub fn train(
    params: &NetworkParams,
    dataset: &[TrainingSample],
    config: &TrainConfig,
) -> Result<(NetworkParams, Vec<f64>)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(config.eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {}",
            config.eta
        )));
    }
    let mut p = params.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for &i in &order {
            total += backprop_in_place(&mut p, &dataset[i], config.eta)?;
        }
        history.push(total / dataset.len() as f64);
    }
    Ok((p, history))
}

/// Per-vertex importance: the first output activation, `-inf` for vertices
/// that are unscorable or excluded by `criteria`.
pub fn score_vertices_nn(
    params: &NetworkParams,
    records: &[FeatureRecord],
    criteria: &CriterionConfig,
) -> Result<Vec<f64>> {
    let inputs = criterion_inputs(records, criteria)?;
    inputs
        .par_iter()
        .map(|inp| match inp {
            Some(x) => Ok(forward(params, x)?.output[0]),
            None => Ok(f64::NEG_INFINITY),
        })
        .collect()
}

/// Inputs are the criterion vectors used by ranking; the target of a vertex
/// is the fraction of `schedule` levels (each a fraction of vertices kept)
/// at which it survives decimation.
pub fn build_training_set(
    mesh: &Mesh,
    schedule: &[f64],
    criteria: &CriterionConfig,
) -> Result<Vec<TrainingSample>> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("attack schedule is empty".into()));
    }
    let adj = build_adjacency(mesh);
    let inputs = criterion_inputs(&compute_feature_table(mesh, &adj), criteria)?;
    let maps = schedule
        .par_iter()
        .map(|&keep| attack::decimate(mesh, keep).map(|(_, m)| m))
        .collect::<Result<Vec<_>>>()?;
    Ok(inputs
        .into_iter()
        .enumerate()
        .filter_map(|(v, inp)| {
            inp.map(|input| {
                let survived = maps.iter().filter(|m| m.survived[v]).count();
                TrainingSample::scalar(input, survived as f64 / maps.len() as f64)
            })
        })
        .collect())
}
