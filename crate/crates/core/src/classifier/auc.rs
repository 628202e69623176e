use crate::error::{Error, Result};

/// Area under the ROC curve via the rank-sum statistic with mid-ranks, i.e.
/// the probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn auc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::EmptyScores);
    }
    if positives.iter().chain(negatives).any(|v| v.is_nan()) {
        return Err(Error::param("NaN score"));
    }
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Sum of positive ranks, doubled so mid-ranks stay integral.
    let mut rank_sum_x2: u64 = 0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // Ranks i+1..=j share the mid-rank (i + 1 + j) / 2.
        let pos_in_group = all[i..j].iter().filter(|x| x.1).count() as u64;
        rank_sum_x2 += pos_in_group * (i as u64 + 1 + j as u64);
        i = j;
    }
    let (np, nn) = (positives.len() as u64, negatives.len() as u64);
    let u_x2 = rank_sum_x2 - np * (np + 1);
    Ok(u_x2 as f64 / (2 * np * nn) as f64)
}
