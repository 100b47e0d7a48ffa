use super::ScanResult;
use crate::classical::CHAOS_THRESHOLD;
use crate::error::{Error, Result};

/// How grid `a` is split into two classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Binarize {
    /// `value > threshold` is class 1.
    Threshold(f64),
    /// `value > median(a)` is class 1.
    Median,
}

impl Default for Binarize {
    fn default() -> Self {
        Binarize::Threshold(CHAOS_THRESHOLD)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridComparison {
    /// Point-biserial correlation; `None` when degenerate.
    pub correlation: Option<f64>,
    pub degenerate: bool,
    pub threshold: f64,
    /// Count and mean of `b` over class 0 (`a` below threshold).
    pub low: (usize, f64),
    /// Count and mean of `b` over class 1.
    pub high: (usize, f64),
    /// Cells skipped because either grid failed there.
    pub skipped: usize,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Point-biserial correlation between binarized `a` and continuous `b`.
pub fn compare_grids(a: &ScanResult, b: &ScanResult, method: Binarize) -> Result<GridComparison> {
    if a.spec.axes != b.spec.axes {
        return Err(Error::invalid("axes", "grids are sampled on different axes"));
    }
    let pairs: Vec<(f64, f64)> = a
        .scalars()
        .into_iter()
        .zip(b.scalars())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let skipped = a.outcomes.len() - pairs.len();
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let threshold = match method {
        Binarize::Threshold(t) => t,
        Binarize::Median if xs.is_empty() => f64::NAN,
        Binarize::Median => median(&xs),
    };

    let (mut n1, mut s1, mut n0, mut s0) = (0usize, 0.0, 0usize, 0.0);
    for &(x, y) in &pairs {
        if x > threshold {
            n1 += 1;
            s1 += y;
        } else {
            n0 += 1;
            s0 += y;
        }
    }
    let mean = |s: f64, n: usize| if n > 0 { s / n as f64 } else { f64::NAN };
    let (m0, m1) = (mean(s0, n0), mean(s1, n1));
    let n = pairs.len() as f64;
    let mean_all = (s0 + s1) / n;
    let sd = (pairs.iter().map(|&(_, y)| (y - mean_all).powi(2)).sum::<f64>() / n).sqrt();

    let degenerate = n0 == 0 || n1 == 0 || !(sd > 0.0);
    let correlation = (!degenerate).then(|| (m1 - m0) / sd * ((n1 * n0) as f64 / (n * n)).sqrt());
    Ok(GridComparison {
        correlation,
        degenerate,
        threshold,
        low: (n0, m0),
        high: (n1, m1),
        skipped,
    })
}
