use serde::{Deserialize, Serialize};

use super::SearchError;

/// A correlation value. `degenerate` marks a constant input, for which the
/// value is defined as 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
}

impl Correlation {
    const DEGENERATE: Correlation = Correlation { value: 0.0, degenerate: true };
}

fn check(x: &[f64], y: &[f64]) -> Result<(), SearchError> {
    if x.len() != y.len() {
        return Err(SearchError::Metric(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(SearchError::Metric(format!("need at least 2 points, got {}", x.len())));
    }
    Ok(())
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation, SearchError> {
    check(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation::DEGENERATE);
    }
    Ok(Correlation { value: (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0), degenerate: false })
}

/// Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation, SearchError> {
    check(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall's tau-b.
pub fn kendall(x: &[f64], y: &[f64]) -> Result<Correlation, SearchError> {
    check(x, y)?;
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].total_cmp(&x[j]) as i64;
            let dy = y[i].total_cmp(&y[j]) as i64;
            match (dx, dy) {
                (0, 0) => {}
                (0, _) => tie_x += 1,
                (_, 0) => tie_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n1 = (concordant + discordant + tie_x) as f64;
    let n2 = (concordant + discordant + tie_y) as f64;
    if n1 == 0.0 || n2 == 0.0 || concordant + discordant == 0 {
        return Ok(Correlation::DEGENERATE);
    }
    Ok(Correlation { value: (concordant - discordant) as f64 / (n1 * n2).sqrt(), degenerate: false })
}

/// Spearman correlation on the `ceil(t * M)` entries with the highest
/// ground truth, re-ranked within that subset. `t = 1` is plain Spearman.
pub fn spearman_at_topk(gt: &[f64], est: &[f64], t: f64) -> Result<Correlation, SearchError> {
    check(gt, est)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(SearchError::Metric(format!("fraction {t} outside (0, 1]")));
    }
    let m = ((t * gt.len() as f64) - 1e-9).ceil() as usize;
    if m < 2 {
        return Err(SearchError::Metric(format!("top fraction {t} of {} keeps fewer than 2 entries", gt.len())));
    }
    let mut order: Vec<usize> = (0..gt.len()).collect();
    order.sort_by(|&a, &b| gt[b].total_cmp(&gt[a]));
    let mut keep = order[..m].to_vec();
    keep.sort_unstable();
    let sub_gt: Vec<f64> = keep.iter().map(|&i| gt[i]).collect();
    let sub_est: Vec<f64> = keep.iter().map(|&i| est[i]).collect();
    spearman(&sub_gt, &sub_est)
}
