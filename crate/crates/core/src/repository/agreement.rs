//! Inter-annotator agreement on tag weights.
//!
//! Continuous weights are discretized into equal-width bins over [0, 1] and
//! compared with Fleiss' multi-rater kappa. The chance-agreement term comes
//! from the bin distribution pooled over every tag in the repository that has
//! at least two ratings, so one tag's kappa is its contribution to the
//! repository-wide Fleiss statistic.

use serde::Serialize;

use super::{ImageId, Repository, RepositoryError};
use crate::ontology::Sense;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementConfig {
    pub bins: usize,
    /// Tags whose kappa falls below this are flagged as inadequate.
    pub threshold: f64,
}

impl Default for AgreementConfig {
    fn default() -> Self {
        Self {
            bins: 5,
            threshold: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TagAgreement {
    pub image: ImageId,
    pub sense: Sense,
    pub raters: usize,
    pub kappa: f64,
    pub threshold: f64,
    pub inadequate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    /// Fleiss kappa over all multi-rated tags; `None` when there are none.
    pub overall: Option<f64>,
    pub tags: Vec<TagAgreement>,
}

/// Equal-width bin index of a weight in [0, 1]; 1.0 lands in the top bin.
pub fn weight_bin(weight: f64, bins: usize) -> usize {
    let bin = (weight.clamp(0.0, 1.0) * bins as f64).floor() as usize;
    bin.min(bins - 1)
}

fn item_agreement(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let sq: usize = counts.iter().map(|c| c * c).sum();
    (sq - n) as f64 / (n * (n - 1)) as f64
}

fn chance_agreement(items: &[Vec<usize>]) -> f64 {
    let categories = items.first().map_or(0, Vec::len);
    let total: usize = items.iter().flatten().sum();
    (0..categories)
        .map(|j| {
            let p = items.iter().map(|row| row[j]).sum::<usize>() as f64 / total as f64;
            p * p
        })
        .sum()
}

/// Fleiss' kappa for items given as per-category rater counts. Items with
/// fewer than two raters are ignored. Returns `None` when no item qualifies.
/// When every rating falls into a single category the result is 1.
pub fn fleiss_kappa(items: &[Vec<usize>]) -> Option<f64> {
    let rated: Vec<Vec<usize>> = items
        .iter()
        .filter(|row| row.iter().sum::<usize>() >= 2)
        .cloned()
        .collect();
    if rated.is_empty() {
        return None;
    }
    let observed =
        rated.iter().map(|row| item_agreement(row)).sum::<f64>() / rated.len() as f64;
    let chance = chance_agreement(&rated);
    Some(kappa(observed, chance))
}

fn kappa(observed: f64, chance: f64) -> f64 {
    if observed >= 1.0 {
        return 1.0;
    }
    if chance >= 1.0 {
        return 1.0;
    }
    ((observed - chance) / (1.0 - chance)).clamp(-1.0, 1.0)
}

impl Repository {
    fn bin_counts(&self, bins: usize) -> Vec<(ImageId, Sense, Vec<usize>)> {
        let mut out = Vec::new();
        for record in self.images() {
            for tag in &record.annotations {
                if tag.ratings.len() < 2 {
                    continue;
                }
                let mut counts = vec![0usize; bins];
                for r in &tag.ratings {
                    counts[weight_bin(r.weight, bins)] += 1;
                }
                out.push((record.id, tag.sense.clone(), counts));
            }
        }
        out
    }

    /// Kappa for one tag's ratings against the repository-wide chance
    /// agreement. Unanimous bins give exactly 1.
    pub fn tag_agreement(
        &self,
        id: ImageId,
        sense: &Sense,
        cfg: &AgreementConfig,
    ) -> Result<TagAgreement, RepositoryError> {
        if cfg.bins == 0 {
            return Err(RepositoryError::InvalidBins);
        }
        let record = self.image(id).ok_or(RepositoryError::UnknownImage(id))?;
        let tag = record
            .annotation(sense)
            .ok_or_else(|| RepositoryError::UntaggedSense(sense.to_string()))?;
        if tag.ratings.len() < 2 {
            return Err(RepositoryError::InsufficientRaters {
                found: tag.ratings.len(),
            });
        }
        let mut counts = vec![0usize; cfg.bins];
        for r in &tag.ratings {
            counts[weight_bin(r.weight, cfg.bins)] += 1;
        }
        let pooled: Vec<Vec<usize>> = self
            .bin_counts(cfg.bins)
            .into_iter()
            .map(|(_, _, c)| c)
            .collect();
        let value = kappa(item_agreement(&counts), chance_agreement(&pooled));
        Ok(TagAgreement {
            image: id,
            sense: sense.clone(),
            raters: tag.ratings.len(),
            kappa: value,
            threshold: cfg.threshold,
            inadequate: value < cfg.threshold,
        })
    }

    /// Per-tag agreement for every tag with at least two ratings, plus the
    /// pooled Fleiss kappa.
    pub fn agreement_report(&self, cfg: &AgreementConfig) -> Result<AgreementReport, RepositoryError> {
        if cfg.bins == 0 {
            return Err(RepositoryError::InvalidBins);
        }
        let items = self.bin_counts(cfg.bins);
        let pooled: Vec<Vec<usize>> = items.iter().map(|(_, _, c)| c.clone()).collect();
        let chance = chance_agreement(&pooled);
        let tags = items
            .into_iter()
            .map(|(image, sense, counts)| {
                let value = kappa(item_agreement(&counts), chance);
                TagAgreement {
                    image,
                    sense,
                    raters: counts.iter().sum(),
                    kappa: value,
                    threshold: cfg.threshold,
                    inadequate: value < cfg.threshold,
                }
            })
            .collect();
        Ok(AgreementReport {
            overall: fleiss_kappa(&pooled),
            tags,
        })
    }
}
