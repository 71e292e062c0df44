//! Deterministic Monte Carlo evaluation.
//!
//! Each trial draws a Cranley–Patterson shift, regenerates the candidate
//! grid, rebuilds the dictionary, solves the selection problem with the
//! requested algorithm, and extracts worst-target accuracy metrics. Trials
//! are independent; the experiment runs them on a small worker pool and
//! writes records in canonical order (sweep-major, then trial), so reruns
//! with the same base seed produce byte-identical CSV output.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::dictionary::{self, Dictionary};
use crate::error::{Error, Result};
use crate::fisher::{self, MetricTriple};
use crate::scene::{self, Scene};
use crate::solver::{
    self, BnbConfig, ObjectiveKind, Selection, SelectionProblem, SolveReport, SolveStatus,
};

/// Selection algorithm run inside a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algo {
    #[serde(rename = "eopt")]
    EOpt,
    #[serde(rename = "dopt")]
    DOpt,
    #[serde(rename = "rand-a")]
    RandA,
    #[serde(rename = "rand-d")]
    RandD,
    #[serde(rename = "rand-e")]
    RandE,
    #[serde(rename = "exhaustive")]
    Exhaustive,
}

impl Algo {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "eopt" => Ok(Algo::EOpt),
            "dopt" => Ok(Algo::DOpt),
            "rand-a" => Ok(Algo::RandA),
            "rand-d" => Ok(Algo::RandD),
            "rand-e" => Ok(Algo::RandE),
            "exhaustive" => Ok(Algo::Exhaustive),
            other => Err(Error::validation("algo", format!("unknown algorithm `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algo::EOpt => "eopt",
            Algo::DOpt => "dopt",
            Algo::RandA => "rand-a",
            Algo::RandD => "rand-d",
            Algo::RandE => "rand-e",
            Algo::Exhaustive => "exhaustive",
        }
    }

    fn objective(self) -> ObjectiveKind {
        match self {
            Algo::EOpt | Algo::RandE | Algo::Exhaustive => ObjectiveKind::EOpt,
            Algo::DOpt | Algo::RandD => ObjectiveKind::DOpt,
            Algo::RandA => ObjectiveKind::AOpt,
        }
    }
}

/// Which per-target objective picks the worst target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricFamily {
    /// Φ_A, reported through the PEB.
    A,
    /// Φ_D, reported through the CER.
    D,
    /// Φ_E, reported through the MAD.
    E,
}

/// Outcome of one trial, one row of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u32,
    pub algo: String,
    pub d_m: f64,
    pub k: usize,
    /// Derived per-trial seed (drives the shift and any solver randomness).
    pub seed: u64,
    /// PEB at the A-worst target; empty on flagged trials.
    pub peb_m: Option<f64>,
    /// CER at the D-worst target; empty on flagged trials.
    pub cer_m: Option<f64>,
    /// MAD at the E-worst target; empty on flagged trials.
    pub mad_m: Option<f64>,
    pub raw_value: f64,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub status: String,
    pub nodes: u64,
    /// Wall-clock solve time. The one nondeterministic column.
    pub runtime_ms: u64,
    /// E-critical target index; empty on flagged trials.
    pub worst_target_index: Option<usize>,
    /// Selected candidate indices, `;`-joined, so metrics can be recomputed.
    pub selection: String,
}

/// Experiment description: sweeps × trials on one scene.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub scene: Scene,
    pub d_list: Vec<f64>,
    pub k_list: Vec<usize>,
    pub algos: Vec<Algo>,
    pub trials: u32,
    pub base_seed: u64,
    pub bnb: BnbConfig,
    /// Draw count for the random-minimax baselines.
    pub rand_trials: u32,
    pub workers: usize,
    /// Budget guard for `Algo::Exhaustive`.
    pub exhaustive_budget: u128,
}

impl ExperimentPlan {
    pub fn new(scene: Scene) -> Self {
        Self {
            scene,
            d_list: vec![5.0, 4.0],
            k_list: vec![4],
            algos: vec![Algo::EOpt, Algo::DOpt, Algo::RandA, Algo::RandD, Algo::RandE],
            trials: 50,
            base_seed: 1,
            bnb: BnbConfig { eps_gap: 1e-3, ..Default::default() },
            rand_trials: 10_000,
            workers: 1,
            exhaustive_budget: 1_000_000,
        }
    }

    fn cells(&self) -> Vec<(usize, usize, usize, u32)> {
        let mut out = Vec::new();
        for di in 0..self.d_list.len() {
            for ki in 0..self.k_list.len() {
                for ai in 0..self.algos.len() {
                    for t in 0..self.trials {
                        out.push((di, ki, ai, t));
                    }
                }
            }
        }
        out
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-trial seed: a splitmix64 fold of the base seed with the sweep
/// coordinates, so any sweep subset reproduces independently.
pub fn derive_seed(base_seed: u64, d_idx: usize, k_idx: usize, algo_idx: usize, trial: u32) -> u64 {
    let mut h = splitmix64(base_seed);
    for coord in [d_idx as u64, k_idx as u64, algo_idx as u64, trial as u64] {
        h = splitmix64(h ^ coord);
    }
    h
}

/// Worst target under the given metric family and that target's full metric
/// triple. Errors if the worst target is singular.
pub fn worst_target_metrics(
    dict: &Dictionary,
    selection: &Selection,
    family: MetricFamily,
) -> Result<(usize, MetricTriple)> {
    let problem = SelectionProblem::new(dict, selection.indices().len(), ObjectiveKind::EOpt)?;
    let (summaries, _) = solver::eval_selection(&problem, selection)?;
    let mut worst: Option<(usize, f64)> = None;
    for (n, s) in summaries.iter().enumerate() {
        let score = if s.is_singular() {
            f64::INFINITY
        } else {
            let gap2 = s.s * s.s - s.r * s.r;
            match family {
                MetricFamily::A => 4.0 * s.s / gap2,
                MetricFamily::D => 4.0 / gap2,
                MetricFamily::E => 2.0 / (s.s - s.r),
            }
        };
        let replace = match worst {
            None => true,
            Some((_, best)) => score > best,
        };
        if replace {
            worst = Some((n, score));
        }
    }
    let (n, _) = worst.expect("dictionary has at least one target");
    let triple = fisher::metrics(&summaries[n])?;
    Ok((n, triple))
}

fn flagged_record(
    trial_id: u32,
    algo: Algo,
    d: f64,
    k: usize,
    seed: u64,
    status: &str,
    report: Option<&SolveReport>,
) -> TrialRecord {
    TrialRecord {
        trial_id,
        algo: algo.name().to_string(),
        d_m: d,
        k,
        seed,
        peb_m: None,
        cer_m: None,
        mad_m: None,
        raw_value: report.map(|r| r.raw_value).unwrap_or(f64::NAN),
        bound: report.and_then(|r| r.bound),
        gap: report.and_then(|r| r.gap),
        status: status.to_string(),
        nodes: report.map(|r| r.nodes_explored).unwrap_or(0),
        runtime_ms: report.map(|r| r.runtime_ms).unwrap_or(0),
        worst_target_index: None,
        selection: String::new(),
    }
}

/// Run one trial: shift → grid → dictionary → solve → worst-target metrics.
/// Fully deterministic for fixed inputs and seed (wall-clock column aside).
pub fn run_trial(
    scene: &Scene,
    d: f64,
    k: usize,
    algo: Algo,
    seed: u64,
    bnb: &BnbConfig,
    rand_trials: u32,
    exhaustive_budget: u128,
    trial_id: u32,
) -> TrialRecord {
    let run = || -> Result<TrialRecord> {
        let region = scene.region.with_spacing(d);
        region.validate()?;
        let shift = scene::draw_shift(seed, d);
        let grid = scene::generate_anchor_grid(&region, shift);
        let dict = dictionary::build_dictionary(scene, &grid)?;
        let problem = SelectionProblem::new(&dict, k, algo.objective())?;
        let report = match algo {
            Algo::EOpt | Algo::DOpt => solver::branch_and_bound(&problem, bnb)?,
            Algo::Exhaustive => solver::exhaustive_oracle(&problem, exhaustive_budget)?,
            Algo::RandA | Algo::RandD | Algo::RandE => {
                solver::rand_minimax(&problem, rand_trials, splitmix64(seed))?
            }
        };
        let status = match report.status {
            SolveStatus::EpsOptimal => "eps_optimal",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Infeasible => "infeasible",
        };
        let Some(selection) = report.selection.clone() else {
            return Ok(flagged_record(trial_id, algo, d, k, seed, "infeasible", Some(&report)));
        };
        if report.singular {
            return Ok(flagged_record(trial_id, algo, d, k, seed, "singular", Some(&report)));
        }
        let (_, peb_triple) = worst_target_metrics(&dict, &selection, MetricFamily::A)?;
        let (_, cer_triple) = worst_target_metrics(&dict, &selection, MetricFamily::D)?;
        let (e_idx, mad_triple) = worst_target_metrics(&dict, &selection, MetricFamily::E)?;
        let sel_text = selection
            .indices()
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";");
        Ok(TrialRecord {
            trial_id,
            algo: algo.name().to_string(),
            d_m: d,
            k,
            seed,
            peb_m: Some(peb_triple.peb_m),
            cer_m: Some(cer_triple.cer_m),
            mad_m: Some(mad_triple.mad_m),
            raw_value: report.raw_value,
            bound: report.bound,
            gap: report.gap,
            status: status.to_string(),
            nodes: report.nodes_explored,
            runtime_ms: report.runtime_ms,
            worst_target_index: Some(e_idx),
            selection: sel_text,
        })
    };
    run().unwrap_or_else(|e| {
        flagged_record(trial_id, algo, d, k, seed, &format!("error: {e}"), None)
    })
}

/// Run the full sweep × trial matrix. Records are computed on `workers`
/// threads and handed to `sink` in canonical order as soon as each prefix
/// completes; the same records are returned for in-process aggregation.
pub fn run_experiment(
    plan: &ExperimentPlan,
    mut sink: impl FnMut(&TrialRecord) -> Result<()>,
) -> Result<Vec<TrialRecord>> {
    plan.scene.validate()?;
    if plan.d_list.is_empty() || plan.k_list.is_empty() || plan.algos.is_empty() {
        return Err(Error::validation("plan", "d_list, k_list, and algos must be nonempty"));
    }
    if plan.trials == 0 {
        return Err(Error::validation("plan.trials", "must be >= 1"));
    }
    let cells = plan.cells();
    let next = AtomicUsize::new(0);
    let workers = plan.workers.max(1).min(cells.len());
    let (tx, rx) = mpsc::channel::<(usize, TrialRecord)>();

    let mut records: Vec<Option<TrialRecord>> = vec![None; cells.len()];
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            let cells = &cells;
            let next = &next;
            let plan_ref = plan;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let (di, ki, ai, t) = cells[i];
                let seed = derive_seed(plan_ref.base_seed, di, ki, ai, t);
                let rec = run_trial(
                    &plan_ref.scene,
                    plan_ref.d_list[di],
                    plan_ref.k_list[ki],
                    plan_ref.algos[ai],
                    seed,
                    &plan_ref.bnb,
                    plan_ref.rand_trials,
                    plan_ref.exhaustive_budget,
                    t,
                );
                if tx.send((i, rec)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        // Reorder buffer: emit the canonical prefix as it completes.
        let mut pending: BTreeMap<usize, TrialRecord> = BTreeMap::new();
        let mut emitted = 0usize;
        for (i, rec) in rx {
            pending.insert(i, rec);
            while let Some(rec) = pending.remove(&emitted) {
                sink(&rec)?;
                records[emitted] = Some(rec);
                emitted += 1;
            }
        }
        debug_assert_eq!(emitted, cells.len());
        Ok(())
    })?;
    Ok(records.into_iter().map(|r| r.expect("all trials complete")).collect())
}

/// Write records as CSV with a header row; floats use the shortest exact
/// decimal representation, so identical records give identical bytes.
pub fn write_records_csv(records: &[TrialRecord], w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for rec in records {
        wtr.serialize(rec).map_err(|e| Error::Format(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Read records back from CSV.
pub fn read_records_csv(r: impl std::io::Read) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.deserialize::<TrialRecord>() {
        out.push(rec.map_err(|e| Error::Format(e.to_string()))?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// Five-number boxplot summary with 1.5×IQR whiskers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

/// Quantile by linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let q1 = quantile(&sorted, 0.25);
        let median = quantile(&sorted, 0.5);
        let q3 = quantile(&sorted, 0.75);
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let whisker_lo = sorted.iter().cloned().find(|v| *v >= lo_fence).unwrap_or(q1);
        let whisker_hi = sorted.iter().cloned().rev().find(|v| *v <= hi_fence).unwrap_or(q3);
        let outliers = sorted.iter().cloned().filter(|v| *v < lo_fence || *v > hi_fence).collect();
        Some(Self { median, q1, q3, whisker_lo, whisker_hi, outliers })
    }
}

/// Boxplot statistics for each metric of one record group; `None` stats mark
/// groups whose records were all flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: BTreeMap<String, String>,
    pub records: usize,
    pub flagged: usize,
    pub peb_m: Option<BoxStats>,
    pub cer_m: Option<BoxStats>,
    pub mad_m: Option<BoxStats>,
}

/// Grouping keys for `aggregate`: any subset of {algo, d, k}.
pub fn aggregate(records: &[TrialRecord], group_keys: &[&str]) -> Result<Vec<GroupReport>> {
    if records.is_empty() {
        return Err(Error::validation("records", "must be nonempty"));
    }
    for key in group_keys {
        if !["algo", "d", "k"].contains(key) {
            return Err(Error::validation("group_by", format!("unknown key `{key}`")));
        }
    }
    let mut groups: BTreeMap<Vec<(String, String)>, Vec<&TrialRecord>> = BTreeMap::new();
    for rec in records {
        let key: Vec<(String, String)> = group_keys
            .iter()
            .map(|k| {
                let v = match *k {
                    "algo" => rec.algo.clone(),
                    "d" => rec.d_m.to_string(),
                    "k" => rec.k.to_string(),
                    _ => unreachable!(),
                };
                (k.to_string(), v)
            })
            .collect();
        groups.entry(key).or_default().push(rec);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (key, recs) in groups {
        let ok: Vec<&&TrialRecord> = recs.iter().filter(|r| r.peb_m.is_some()).collect();
        let collect = |f: fn(&TrialRecord) -> Option<f64>| -> Vec<f64> {
            ok.iter().filter_map(|r| f(r)).collect()
        };
        out.push(GroupReport {
            group: key.into_iter().collect(),
            records: recs.len(),
            flagged: recs.len() - ok.len(),
            peb_m: BoxStats::from_values(&collect(|r| r.peb_m)),
            cer_m: BoxStats::from_values(&collect(|r| r.cer_m)),
            mad_m: BoxStats::from_values(&collect(|r| r.mad_m)),
        });
    }
    Ok(out)
}
