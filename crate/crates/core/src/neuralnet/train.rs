//! Mini-batch training with early stopping on validation complete match.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Adam, Gradients, Model, ModelConfig, ModelError, PretrainedVectors, Vocabulary};
use crate::corpus::LinkInstance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Stop after this many epochs without a validation improvement.
    pub patience: usize,
    pub seed: u64,
    pub clip_norm: f64,
    /// Share of the data held out when no validation set is given.
    pub validation_fraction: f64,
}

impl TrainConfig {
    pub fn new(seed: u64) -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 16,
            epochs: 30,
            patience: 5,
            seed,
            clip_norm: 5.0,
            validation_fraction: 0.2,
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("dataset mixes link kinds; model is for {0}")]
    MixedKinds(crate::corpus::LinkKind),
    #[error("training instance {index} ({doc}/{event}) has no gold SR vector")]
    MissingGold { index: usize, doc: String, event: String },
    #[error("non-finite loss at epoch {epoch} on {doc}/{event}->{target}")]
    NonFinite {
        epoch: usize,
        doc: String,
        event: String,
        target: String,
    },
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub validation_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best validation epoch.
    pub model: Model,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_accuracy: f64,
}

const SPLIT_SALT: u64 = 0x5eed_5917;

/// Seeded shuffle, then the first `fraction` of items become validation.
pub fn split_validation(
    dataset: &[LinkInstance],
    fraction: f64,
    seed: u64,
) -> (Vec<LinkInstance>, Vec<LinkInstance>) {
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ SPLIT_SALT));
    let held = ((dataset.len() as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
    let held = held.min(dataset.len().saturating_sub(1));
    let mut validation: Vec<usize> = order[..held].to_vec();
    let mut train: Vec<usize> = order[held..].to_vec();
    validation.sort_unstable();
    train.sort_unstable();
    (
        train.into_iter().map(|i| dataset[i].clone()).collect(),
        validation.into_iter().map(|i| dataset[i].clone()).collect(),
    )
}

/// Fraction of links whose predicted SR vector equals the gold one exactly.
/// Links without gold are ignored.
pub fn complete_match_accuracy(model: &Model, links: &[LinkInstance]) -> Result<f64, ModelError> {
    let mut total = 0usize;
    let mut hits = 0usize;
    for link in links {
        if let Some(gold) = link.gold {
            total += 1;
            if model.predict(link)? == gold {
                hits += 1;
            }
        }
    }
    Ok(if total == 0 { 0.0 } else { hits as f64 / total as f64 })
}

/// Splits off a validation set per `train_config.validation_fraction` and
/// trains.
pub fn train(
    dataset: &[LinkInstance],
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    pretrained: Option<&PretrainedVectors>,
) -> Result<TrainOutcome, TrainError> {
    let (train_set, validation) =
        split_validation(dataset, train_config.validation_fraction, train_config.seed);
    train_with_validation(&train_set, &validation, model_config, train_config, pretrained)
}

/// Trains on `train_set`, selecting the epoch with the best complete-match
/// accuracy on `validation` (on the training set when `validation` is
/// empty). Deterministic for a fixed seed.
pub fn train_with_validation(
    train_set: &[LinkInstance],
    validation: &[LinkInstance],
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    pretrained: Option<&PretrainedVectors>,
) -> Result<TrainOutcome, TrainError> {
    if train_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if train_config.batch_size == 0 || train_config.epochs == 0 {
        return Err(TrainError::Config("batch_size and epochs must be positive".into()));
    }
    if !(train_config.learning_rate > 0.0 && train_config.clip_norm > 0.0) {
        return Err(TrainError::Config("learning_rate and clip_norm must be positive".into()));
    }
    if let Some(link) = train_set.iter().chain(validation).find(|l| l.kind != model_config.kind) {
        log::error!("link {}/{} has kind {}", link.doc, link.event, link.kind);
        return Err(TrainError::MixedKinds(model_config.kind));
    }
    let mut golds = Vec::with_capacity(train_set.len());
    for (index, link) in train_set.iter().enumerate() {
        golds.push(link.gold.ok_or_else(|| TrainError::MissingGold {
            index,
            doc: link.doc.clone(),
            event: link.event.clone(),
        })?);
    }

    let vocabulary = Vocabulary::build(train_set.iter().flat_map(|l| l.tokens.iter().map(String::as_str)));
    let mut model = Model::new(model_config.clone(), vocabulary, pretrained, train_config.seed)?;
    let mut optimizer = Adam::new(&model, train_config.learning_rate, train_config.clip_norm);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(train_config.seed.wrapping_add(1));
    let selection = if validation.is_empty() { train_set } else { validation };

    let mut best = (complete_match_accuracy(&model, selection)?, 0usize, model.clone());
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=train_config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total_loss = 0.0;
        for batch in order.chunks(train_config.batch_size) {
            let mut grads = Gradients::zeros_like(&model);
            for &i in batch {
                let link = &train_set[i];
                let (loss, g) = model.gradients(link, &golds[i])?;
                if !loss.is_finite() {
                    return Err(TrainError::NonFinite {
                        epoch,
                        doc: link.doc.clone(),
                        event: link.event.clone(),
                        target: link.target.clone(),
                    });
                }
                total_loss += loss;
                grads.add_assign(&g);
            }
            grads.scale(1.0 / batch.len() as f64);
            optimizer.step(&mut model, &grads);
        }
        if !model.is_finite() {
            let link = &train_set[order[0]];
            return Err(TrainError::NonFinite {
                epoch,
                doc: link.doc.clone(),
                event: link.event.clone(),
                target: link.target.clone(),
            });
        }
        let accuracy = complete_match_accuracy(&model, selection)?;
        history.push(EpochRecord {
            epoch,
            mean_loss: total_loss / train_set.len() as f64,
            validation_accuracy: accuracy,
        });
        log::info!(
            "epoch {epoch}: loss {:.4}, validation complete match {accuracy:.4}",
            total_loss / train_set.len() as f64
        );
        if accuracy > best.0 || best.1 == 0 {
            best = (accuracy, epoch, model.clone());
        } else if epoch - best.1 >= train_config.patience {
            break;
        }
    }
    let (best_accuracy, best_epoch, model) = best;
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
        best_accuracy,
    })
}
