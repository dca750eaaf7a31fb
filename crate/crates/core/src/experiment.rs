//! Batch runs over random Euclidean instances and the CSV tables they feed.
//!
//! All tables are deterministic for fixed inputs except the `seconds` column
//! of `runs.csv` and the time ratios in `summary.csv`.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::backend::Backend;
use crate::clustering::restricted_cluster;
use crate::engine::{run, RunReport, Variant, VariantConfig};
use crate::error::{Error, Result};
use crate::instances::{gen_random_euclidean, SCALE};
use crate::metrics::{
    iteration_stats, mean_and_std_err, mean_ratio, p_cov, p_used, proportion_f64, sqrt_asymptotic,
    subtour_curve,
};

pub const RUNS_HEADER: [&str; 10] = [
    "instance",
    "n",
    "variant",
    "sec_form",
    "seed",
    "seconds",
    "iterations",
    "constraints_final",
    "objective",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub instance: String,
    pub n: usize,
    pub variant: String,
    pub sec_form: String,
    pub seed: u64,
    pub seconds: f64,
    pub iterations: usize,
    pub constraints_final: usize,
    pub objective: Option<i64>,
    /// `optimal`, `limit_reached` or `error`.
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub sizes: Vec<usize>,
    /// Instances per size, seeds `first_seed..first_seed + seeds`.
    pub seeds: u64,
    pub first_seed: u64,
    pub variants: Vec<Variant>,
    /// Shared settings; the variant field is overwritten per run.
    pub config: VariantConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub variant: String,
    pub runs: usize,
    pub optimal: usize,
    /// Mean per-instance time quotient against the first variant.
    pub mean_time_ratio: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub mean_constraints_final: Option<f64>,
    /// Mean per-instance share of this variant's pre-generated SECs found in
    /// the basic run's final model.
    pub p_used: Option<f64>,
    /// Mean per-instance share of the basic run's final model covered by
    /// this variant's pre-generated SECs.
    pub p_cov: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

fn record(n: usize, seed: u64, cfg: &VariantConfig, result: &Result<RunReport>) -> RunRecord {
    match result {
        Ok(r) => RunRecord {
            instance: r.instance.clone(),
            n,
            variant: r.variant.clone(),
            sec_form: r.sec_form.clone(),
            seed,
            seconds: r.seconds,
            iterations: r.iterations,
            constraints_final: r.constraints_final,
            objective: r.objective,
            status: if r.is_optimal() {
                "optimal"
            } else {
                "limit_reached"
            }
            .to_string(),
        },
        Err(_) => RunRecord {
            instance: crate::instances::random_euclidean_name(n, seed),
            n,
            variant: cfg.variant.resolved_label(n),
            sec_form: cfg.sec_form.to_string(),
            seed,
            seconds: 0.0,
            iterations: 0,
            constraints_final: 0,
            objective: None,
            status: "error".to_string(),
        },
    }
}

fn map_ordered<T: Sync, R: Send>(items: &[T], parallel: bool, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// Runs every variant on every instance. Failed runs are recorded with
/// status `error` and the sweep continues.
pub fn run_sweep(spec: &SweepSpec, backend: &dyn Backend) -> Result<SweepOutcome> {
    if spec.variants.is_empty() {
        return Err(Error::domain("sweep needs at least one variant"));
    }
    let mut jobs = Vec::new();
    for &n in &spec.sizes {
        for seed in spec.first_seed..spec.first_seed + spec.seeds {
            jobs.push((n, seed));
        }
    }
    let per_instance: Vec<Vec<(RunRecord, Option<RunReport>)>> =
        map_ordered(&jobs, spec.config.parallel, |&(n, seed)| {
            let inst = gen_random_euclidean(n, seed);
            spec.variants
                .iter()
                .map(|&variant| {
                    let cfg = VariantConfig {
                        variant,
                        parallel: false,
                        ..spec.config.clone()
                    };
                    let result = match &inst {
                        Ok(inst) => run(inst, backend, &cfg),
                        Err(e) => Err(Error::domain(e.to_string())),
                    };
                    (record(n, seed, &cfg, &result), result.ok())
                })
                .collect()
        });
    let summary = summarize(&spec.variants, &per_instance)?;
    let records = per_instance.into_iter().flatten().map(|(rec, _)| rec).collect();
    Ok(SweepOutcome { records, summary })
}

fn summarize(
    variants: &[Variant],
    per_instance: &[Vec<(RunRecord, Option<RunReport>)>],
) -> Result<Vec<SummaryRow>> {
    let basic_slot = variants.iter().position(|v| *v == Variant::Basic);
    let mut rows = Vec::new();
    for (slot, variant) in variants.iter().enumerate() {
        let runs: Vec<&(RunRecord, Option<RunReport>)> =
            per_instance.iter().map(|runs| &runs[slot]).collect();
        let optimal: Vec<&RunReport> = runs
            .iter()
            .filter_map(|(_, r)| r.as_ref().filter(|r| r.is_optimal()))
            .collect();

        let (mut base_t, mut this_t) = (Vec::new(), Vec::new());
        for inst_runs in per_instance {
            if let (Some(a), Some(b)) = (&inst_runs[0].1, &inst_runs[slot].1) {
                if a.is_optimal() && b.is_optimal() && a.seconds > 0.0 && b.seconds > 0.0 {
                    base_t.push(a.seconds);
                    this_t.push(b.seconds);
                }
            }
        }
        let mean_time_ratio = if base_t.is_empty() {
            None
        } else {
            Some(mean_ratio(&base_t, &this_t)?)
        };

        let (mut used, mut cov) = (Vec::new(), Vec::new());
        if let Some(bs) = basic_slot.filter(|_| matches!(variant, Variant::Hc(_) | Variant::Hcd(_))) {
            for inst_runs in per_instance {
                if let (Some(b), Some(h)) = (&inst_runs[bs].1, &inst_runs[slot].1) {
                    let s1: HashSet<_> = h.prephase_keys.iter().collect();
                    let s2: HashSet<_> = b.final_model_keys.iter().collect();
                    if !s1.is_empty() && !s2.is_empty() && b.is_optimal() && h.is_optimal() {
                        used.push(proportion_f64(p_used(&s1, &s2)?));
                        cov.push(proportion_f64(p_cov(&s1, &s2)?));
                    }
                }
            }
        }
        let mean = |xs: &[f64]| (!xs.is_empty()).then(|| mean_and_std_err(xs).0);
        let iters: Vec<f64> = optimal.iter().map(|r| r.iterations as f64).collect();
        let cons: Vec<f64> = optimal.iter().map(|r| r.constraints_final as f64).collect();
        rows.push(SummaryRow {
            variant: variant.to_string(),
            runs: runs.len(),
            optimal: optimal.len(),
            mean_time_ratio,
            mean_iterations: mean(&iters),
            mean_constraints_final: mean(&cons),
            p_used: mean(&used),
            p_cov: mean(&cov),
        });
    }
    Ok(rows)
}

pub fn runs_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RUNS_HEADER)?;
    for r in records {
        w.write_record([
            r.instance.clone(),
            r.n.to_string(),
            r.variant.clone(),
            r.sec_form.clone(),
            r.seed.to_string(),
            format!("{:.6}", r.seconds),
            r.iterations.to_string(),
            r.constraints_final.to_string(),
            r.objective.map(|o| o.to_string()).unwrap_or_default(),
            r.status.clone(),
        ])?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Rows as CSV with a header taken from the field names.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    finish_csv(w)
}

pub fn write_sweep(dir: &Path, outcome: &SweepOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("runs.csv"), runs_csv(&outcome.records)?)?;
    std::fs::write(dir.join("summary.csv"), to_csv(&outcome.summary)?)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct StatsSpec {
    pub sizes: Vec<usize>,
    pub instances: u64,
    pub first_seed: u64,
    /// Only compute the restricted-clustering counts; no solving.
    pub cluster_only: bool,
    /// Solve settings; runs always use the basic variant without seeding
    /// or filtering so that the first iteration is the plain 2-matching.
    pub config: VariantConfig,
    /// Width of the rescaled iteration axis of the subtour curves.
    pub resolution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    pub n: usize,
    pub instances: usize,
    pub solved: usize,
    pub mean_iterations: Option<f64>,
    pub mode_iterations: Option<usize>,
    pub mean_first_subtours: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthRow {
    pub n: usize,
    pub solved: usize,
    /// Lengths in unit-square units.
    pub mean_tsp: f64,
    pub mean_two_matching: f64,
    pub tsp_over_sqrt_n: f64,
    pub tsp_std_err: f64,
    pub two_matching_over_sqrt_n: f64,
    pub two_matching_std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub n: usize,
    pub iterations: usize,
    pub runs: usize,
    pub x: f64,
    pub mean_subtours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CPrimeRow {
    pub n: usize,
    pub instances: usize,
    pub mean: f64,
    pub std_err: f64,
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CPrimeCount {
    pub n: usize,
    pub c_prime: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct StatsOutcome {
    pub iterations: Vec<IterationRow>,
    pub lengths: Vec<LengthRow>,
    pub curve: Vec<CurveRow>,
    pub cprime: Vec<CPrimeRow>,
    pub cprime_distribution: Vec<CPrimeCount>,
}

/// Number of restricted clusters `RC3|n` forms on an instance.
pub fn restricted_cluster_count(n: usize, seed: u64) -> Result<usize> {
    let inst = gen_random_euclidean(n, seed)?;
    Ok(restricted_cluster(&inst, n)?.c_actual)
}

pub fn run_stats(spec: &StatsSpec, backend: &dyn Backend) -> Result<StatsOutcome> {
    let mut out = StatsOutcome::default();
    let seeds: Vec<u64> = (spec.first_seed..spec.first_seed + spec.instances).collect();
    if seeds.is_empty() {
        return Err(Error::domain("stats need at least one instance"));
    }
    let cfg = VariantConfig {
        variant: Variant::Basic,
        seed_triangles_p: 0.0,
        filter: None,
        parallel: false,
        ..spec.config.clone()
    };
    for &n in &spec.sizes {
        let counts = map_ordered(&seeds, spec.config.parallel, |&s| restricted_cluster_count(n, s))
            .into_iter()
            .collect::<Result<Vec<usize>>>()?;
        let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let (mean, std_err) = mean_and_std_err(&xs);
        out.cprime.push(CPrimeRow {
            n,
            instances: counts.len(),
            mean,
            std_err,
            min: counts.iter().copied().min().unwrap_or(0),
            max: counts.iter().copied().max().unwrap_or(0),
        });
        let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
        for c in counts {
            *dist.entry(c).or_default() += 1;
        }
        out.cprime_distribution
            .extend(
                dist.into_iter()
                    .map(|(c_prime, count)| CPrimeCount { n, c_prime, count }),
            );

        if spec.cluster_only {
            continue;
        }
        let reports: Vec<RunReport> = map_ordered(&seeds, spec.config.parallel, |&s| {
            gen_random_euclidean(n, s).and_then(|inst| run(&inst, backend, &cfg))
        })
        .into_iter()
        .filter_map(|r| r.ok().filter(|r| r.is_optimal()))
        .collect();

        let iters: Vec<usize> = reports.iter().map(|r| r.iterations).collect();
        let stats = iteration_stats(&iters).ok();
        let firsts: Vec<f64> = reports
            .iter()
            .map(|r| r.per_iteration[0].subtours as f64)
            .collect();
        out.iterations.push(IterationRow {
            n,
            instances: seeds.len(),
            solved: reports.len(),
            mean_iterations: stats.as_ref().map(|s| s.mean),
            mode_iterations: stats.as_ref().map(|s| s.mode),
            mean_first_subtours: (!firsts.is_empty()).then(|| mean_and_std_err(&firsts).0),
        });

        if !reports.is_empty() {
            let tsp: Vec<(usize, f64)> = reports
                .iter()
                .map(|r| (n, r.objective.unwrap_or(0) as f64 / SCALE))
                .collect();
            let m2: Vec<(usize, f64)> = reports
                .iter()
                .map(|r| (n, r.per_iteration[0].objective as f64 / SCALE))
                .collect();
            let (t, m) = (&sqrt_asymptotic(&tsp)[0], &sqrt_asymptotic(&m2)[0]);
            let avg = |xs: &[(usize, f64)]| xs.iter().map(|x| x.1).sum::<f64>() / xs.len() as f64;
            out.lengths.push(LengthRow {
                n,
                solved: reports.len(),
                mean_tsp: avg(&tsp),
                mean_two_matching: avg(&m2),
                tsp_over_sqrt_n: t.mean,
                tsp_std_err: t.std_err,
                two_matching_over_sqrt_n: m.mean,
                two_matching_std_err: m.std_err,
            });
        }

        let runs: Vec<Vec<usize>> = reports
            .iter()
            .map(|r| r.per_iteration.iter().map(|it| it.subtours).collect())
            .collect();
        for g in subtour_curve(&runs, spec.resolution) {
            for (x, mean_subtours) in g.points {
                out.curve.push(CurveRow {
                    n,
                    iterations: g.iterations,
                    runs: g.runs,
                    x,
                    mean_subtours,
                });
            }
        }
    }
    Ok(out)
}

pub fn write_stats(dir: &Path, out: &StatsOutcome, cluster_only: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("cprime.csv"), to_csv(&out.cprime)?)?;
    std::fs::write(
        dir.join("cprime_distribution.csv"),
        to_csv(&out.cprime_distribution)?,
    )?;
    if !cluster_only {
        std::fs::write(dir.join("iterations.csv"), to_csv(&out.iterations)?)?;
        std::fs::write(dir.join("lengths.csv"), to_csv(&out.lengths)?)?;
        std::fs::write(dir.join("subtour_curve.csv"), to_csv(&out.curve)?)?;
    }
    Ok(())
}
