//! Evaluation quantities: running-time quotients, overlap of SEC sets,
//! subtour-count curves, iteration statistics and length/sqrt(n) estimates.

use std::collections::{BTreeMap, HashSet};
use std::hash::Hash;

use num_rational::Ratio;
use serde::Serialize;

use crate::engine::RunReport;
use crate::error::{Error, Result};

/// Per-instance figures of one approach, as in a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub instance: String,
    pub seconds: f64,
    pub iterations: usize,
    pub constraints_final: usize,
}

impl ComparisonRow {
    pub fn from_report(r: &RunReport) -> Result<Self> {
        if r.seconds.is_nan() || r.seconds <= 0.0 {
            return Err(Error::domain(format!("nonpositive time for {}", r.instance)));
        }
        Ok(ComparisonRow {
            instance: r.instance.clone(),
            seconds: r.seconds,
            iterations: r.iterations,
            constraints_final: r.constraints_final,
        })
    }
}

/// Mean over instances of `b[i] / a[i]`, with `a` the baseline.
pub fn mean_ratio(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "{} baseline values vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::domain("no values to compare"));
    }
    if let Some(x) = a.iter().chain(b).find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!("times must be positive, got {x}")));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| y / x).sum();
    Ok(sum / a.len() as f64)
}

/// An exact proportion `|S1 ∩ S2| / |S|`.
pub type Proportion = Ratio<usize>;

fn overlap<T: Eq + Hash>(s1: &HashSet<T>, s2: &HashSet<T>) -> usize {
    let (small, large) = if s1.len() <= s2.len() { (s1, s2) } else { (s2, s1) };
    small.iter().filter(|k| large.contains(k)).count()
}

/// Share of the pre-generated SECs `s1` that appear in the final model `s2`.
pub fn p_used<T: Eq + Hash>(s1: &HashSet<T>, s2: &HashSet<T>) -> Result<Proportion> {
    if s1.is_empty() {
        return Err(Error::domain("p_used needs a nonempty pre-generated set"));
    }
    Ok(Ratio::new(overlap(s1, s2), s1.len()))
}

/// Share of the final model's SECs `s2` that were pre-generated in `s1`.
pub fn p_cov<T: Eq + Hash>(s1: &HashSet<T>, s2: &HashSet<T>) -> Result<Proportion> {
    if s2.is_empty() {
        return Err(Error::domain("p_cov needs a nonempty final set"));
    }
    Ok(Ratio::new(overlap(s1, s2), s2.len()))
}

pub fn proportion_f64(p: Proportion) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

/// Mean subtour counts of the runs that took `iterations` iterations, with
/// iteration `k` placed at `resolution * (k - 1) / (iterations - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveGroup {
    pub iterations: usize,
    pub runs: usize,
    pub points: Vec<(f64, f64)>,
}

/// Groups runs (given as per-iteration subtour counts) by length.
pub fn subtour_curve(runs: &[Vec<usize>], resolution: f64) -> Vec<CurveGroup> {
    let mut groups: BTreeMap<usize, Vec<&Vec<usize>>> = BTreeMap::new();
    for r in runs.iter().filter(|r| !r.is_empty()) {
        groups.entry(r.len()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(k, members)| {
            let points = (0..k)
                .map(|i| {
                    let x = if k == 1 {
                        0.0
                    } else {
                        resolution * i as f64 / (k - 1) as f64
                    };
                    let mean = members.iter().map(|r| r[i] as f64).sum::<f64>() / members.len() as f64;
                    (x, mean)
                })
                .collect();
            CurveGroup {
                iterations: k,
                runs: members.len(),
                points,
            }
        })
        .collect()
}

/// [`subtour_curve`] over complete reports.
pub fn subtour_curve_of(reports: &[RunReport], resolution: f64) -> Result<Vec<CurveGroup>> {
    let mut runs = Vec::with_capacity(reports.len());
    for r in reports {
        if !r.is_optimal() {
            return Err(Error::domain(format!("run on {} is incomplete", r.instance)));
        }
        runs.push(r.per_iteration.iter().map(|it| it.subtours).collect());
    }
    Ok(subtour_curve(&runs, resolution))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqrtRow {
    pub n: usize,
    pub samples: usize,
    /// Mean of `value / sqrt(n)`.
    pub mean: f64,
    /// Standard error of that mean (0 for a single sample).
    pub std_err: f64,
}

/// Per-`n` mean and standard error of `value / sqrt(n)`.
pub fn sqrt_asymptotic(samples: &[(usize, f64)]) -> Vec<SqrtRow> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(n, v) in samples {
        by_n.entry(n).or_default().push(v / (n as f64).sqrt());
    }
    by_n.into_iter()
        .map(|(n, xs)| {
            let (mean, std_err) = mean_and_std_err(&xs);
            SqrtRow {
                n,
                samples: xs.len(),
                mean,
                std_err,
            }
        })
        .collect()
}

pub fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStats {
    pub runs: usize,
    pub mean: f64,
    /// Most frequent count; the smallest one on ties.
    pub mode: usize,
}

pub fn iteration_stats(iterations: &[usize]) -> Result<IterationStats> {
    if iterations.is_empty() {
        return Err(Error::domain("no runs"));
    }
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in iterations {
        *freq.entry(i).or_default() += 1;
    }
    let best = freq.values().copied().max().unwrap_or(0);
    let mode = freq
        .iter()
        .find(|(_, &c)| c == best)
        .map(|(&k, _)| k)
        .unwrap_or(0);
    Ok(IterationStats {
        runs: iterations.len(),
        mean: iterations.iter().sum::<usize>() as f64 / iterations.len() as f64,
        mode,
    })
}
