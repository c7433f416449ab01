use std::collections::BTreeSet;

use serde::Serialize;

use super::Repository;

/// Tag-count statistics over committed images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct CorpusStats {
    pub empty: bool,
    pub image_count: usize,
    pub tag_count_median: f64,
    pub tag_count_mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single image.
    pub tag_count_sd: f64,
    pub tag_count_min: usize,
    pub tag_count_max: usize,
    /// Distinct synsets used by tags of committed images.
    pub distinct_synset_count: usize,
}

pub fn corpus_stats(repo: &Repository) -> CorpusStats {
    let mut counts: Vec<usize> = repo.committed_images().map(|r| r.sense_count()).collect();
    if counts.is_empty() {
        return CorpusStats {
            empty: true,
            ..CorpusStats::default()
        };
    }
    counts.sort_unstable();
    let n = counts.len();
    let median = if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
    };
    let mean = counts.iter().sum::<usize>() as f64 / n as f64;
    let sd = if n > 1 {
        let ss: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let synsets: BTreeSet<_> = repo
        .committed_images()
        .flat_map(|r| r.annotations.iter().map(|a| a.sense.synset))
        .collect();
    CorpusStats {
        empty: false,
        image_count: n,
        tag_count_median: median,
        tag_count_mean: mean,
        tag_count_sd: sd,
        tag_count_min: counts[0],
        tag_count_max: counts[n - 1],
        distinct_synset_count: synsets.len(),
    }
}
