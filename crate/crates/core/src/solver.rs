//! Combinatorial anchor selection.
//!
//! Given the anchor–target dictionary, select exactly K of the M candidates
//! to optimize the worst target under one of the design objectives:
//!
//! - E-opt maximizes γ = min_n (S_n - r_n)          (Φ_E = 2/γ)
//! - D-opt maximizes τ = min_n sqrt(S_n² - r_n²)    (Φ_D = 4/τ²)
//! - A-opt minimizes  max_n 4S_n/(S_n² - r_n²)      (baselines/reporting only)
//!
//! The exact solver is branch-and-bound over the binary selection variables.
//! Relaxation bounds come from the support-function identity
//! r_n = max_θ (u_n cos θ + v_n sin θ): for a fixed θ the per-target value is
//! linear in the selection, and a linear maximum over the cardinality box is
//! just a top-K coefficient sum. The grid over θ only loosens the bound, so
//! every bound is certified; with a zero gap tolerance the search degenerates
//! to exhaustive enumeration with pruning and is exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::fisher::{InfoSummary, SINGULARITY_REL_TOL};

/// Guard for relative-gap denominators.
pub const GAP_DENOM_EPS: f64 = 1e-12;

/// Design objective for the selection problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    EOpt,
    DOpt,
    AOpt,
}

impl ObjectiveKind {
    /// Larger raw values win for E/D (maximization); smaller for A.
    fn maximizing(self) -> bool {
        !matches!(self, ObjectiveKind::AOpt)
    }

    fn better(self, a: f64, b: f64) -> bool {
        if self.maximizing() {
            a > b
        } else {
            a < b
        }
    }

    /// Convert a raw score (γ, τ, or worst Φ_A) into the Φ objective value.
    pub fn objective_value(self, raw: f64) -> f64 {
        match self {
            ObjectiveKind::EOpt => {
                if raw > 0.0 {
                    2.0 / raw
                } else {
                    f64::INFINITY
                }
            }
            ObjectiveKind::DOpt => {
                if raw > 0.0 {
                    4.0 / (raw * raw)
                } else {
                    f64::INFINITY
                }
            }
            ObjectiveKind::AOpt => raw,
        }
    }
}

/// One selection problem instance over a dictionary.
#[derive(Debug, Clone, Copy)]
pub struct SelectionProblem<'a> {
    pub dictionary: &'a Dictionary,
    pub k: usize,
    pub objective: ObjectiveKind,
}

impl<'a> SelectionProblem<'a> {
    /// K must be at least 2 (a single anchor can never localize). K larger
    /// than M is representable; solvers report it as infeasible.
    pub fn new(dictionary: &'a Dictionary, k: usize, objective: ObjectiveKind) -> Result<Self> {
        if k < 2 {
            return Err(Error::validation("k", format!("{k} anchors cannot localize; need >= 2")));
        }
        Ok(Self { dictionary, k, objective })
    }
}

/// A set of exactly K candidate indices in canonical sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Selection {
    indices: Vec<usize>,
}

impl Selection {
    pub fn new(mut indices: Vec<usize>, k: usize, m: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.len() != k {
            return Err(Error::validation(
                "selection",
                format!("has {} indices, expected {k}", indices.len()),
            ));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation("selection", "duplicate candidate index"));
        }
        if indices.last().is_some_and(|&i| i >= m) {
            return Err(Error::validation("selection", format!("index out of range (M = {m})")));
        }
        Ok(Self { indices })
    }

    fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// A branch-and-bound node: candidates forced in, candidates forced out,
/// everything else free.
#[derive(Debug, Clone, Default)]
pub struct Node {
    pub fixed_one: Vec<usize>,
    pub fixed_zero: Vec<usize>,
}

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// The incumbent is within the requested gap of the certified bound.
    EpsOptimal,
    /// Best incumbent at the time/node limit (also used by the heuristic
    /// baselines, which never carry a certificate).
    TimeLimit,
    /// No selection of K candidates exists.
    Infeasible,
}

/// Solve outcome: selection, raw score, Φ value, certificate, and counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub objective: ObjectiveKind,
    pub k: usize,
    pub selection: Option<Selection>,
    /// γ for E-opt, τ for D-opt, worst-target Φ_A for A-opt.
    pub raw_value: f64,
    /// Φ_E = 2/γ, Φ_D = 4/τ², or Φ_A itself.
    pub objective_value: f64,
    /// Certified bound on the best attainable raw value; absent for
    /// heuristic solves.
    pub bound: Option<f64>,
    /// (bound - raw_value) / max(bound, 1e-12); absent with the bound.
    pub gap: Option<f64>,
    pub nodes_explored: u64,
    pub status: SolveStatus,
    pub runtime_ms: u64,
    /// Some target stayed singular (r ~ S) under the reported selection.
    pub singular: bool,
}

/// Branch-and-bound knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnbConfig {
    /// Relative optimality gap that certifies termination.
    pub eps_gap: f64,
    pub max_nodes: u64,
    pub time_limit_ms: u64,
    /// Support-function discretization; bound slack is O(1 - cos(π/grid)).
    pub angle_grid_size: usize,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self { eps_gap: 1e-6, max_nodes: u64::MAX, time_limit_ms: 70_000, angle_grid_size: 64 }
    }
}

// ---------------------------------------------------------------------------
// Exact evaluation
// ---------------------------------------------------------------------------

/// Evaluate a selection exactly: per-target aggregates plus the raw score
/// (E: min_n S-r, D: min_n sqrt(S²-r²), A: max_n Φ_A). Singular targets make
/// the E/D score zero and the A score infinite.
pub fn eval_selection(
    problem: &SelectionProblem,
    selection: &Selection,
) -> Result<(Vec<InfoSummary>, f64)> {
    let dict = problem.dictionary;
    if selection.indices.len() != problem.k {
        return Err(Error::validation("selection", "cardinality does not match the problem"));
    }
    if selection.indices.last().is_some_and(|&i| i >= dict.m()) {
        return Err(Error::validation("selection", "index out of range"));
    }
    let mut summaries = Vec::with_capacity(dict.n());
    for n in 0..dict.n() {
        let (lam, psi) = (dict.lambda_row(n), dict.psi_row(n));
        let (mut s, mut u, mut v) = (0.0, 0.0, 0.0);
        for &m in &selection.indices {
            s += lam[m];
            u += lam[m] * (2.0 * psi[m]).cos();
            v += lam[m] * (2.0 * psi[m]).sin();
        }
        summaries.push(InfoSummary { s, u, v, r: u.hypot(v) });
    }
    let raw = raw_from_summaries(problem.objective, &summaries);
    Ok((summaries, raw))
}

fn raw_from_summaries(kind: ObjectiveKind, summaries: &[InfoSummary]) -> f64 {
    match kind {
        ObjectiveKind::EOpt => summaries
            .iter()
            .map(|s| (s.s - s.r).max(0.0))
            .fold(f64::INFINITY, f64::min),
        ObjectiveKind::DOpt => summaries
            .iter()
            .map(|s| ((s.s - s.r).max(0.0) * (s.s + s.r)).sqrt())
            .fold(f64::INFINITY, f64::min),
        ObjectiveKind::AOpt => summaries
            .iter()
            .map(|s| {
                if s.is_singular() {
                    f64::INFINITY
                } else {
                    4.0 * s.s / (s.s * s.s - s.r * s.r)
                }
            })
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

fn any_singular(summaries: &[InfoSummary]) -> bool {
    summaries.iter().any(|s| s.is_singular())
}

// ---------------------------------------------------------------------------
// Solver context: dictionary-derived tables shared by bounds and evaluation
// ---------------------------------------------------------------------------

const FREE: u8 = 0;
const ONE: u8 = 1;
const ZERO: u8 = 2;

struct Ctx<'a> {
    dict: &'a Dictionary,
    k: usize,
    kind: ObjectiveKind,
    /// λ·cos 2ψ and λ·sin 2ψ, target-major like the dictionary rows.
    lam_cos: Vec<f64>,
    lam_sin: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    /// 1 / cos(π/grid): inflation that turns the grid support maximum into
    /// a sound upper bound on r.
    inv_cos_off: f64,
    /// Candidates in branch order: descending min-over-targets λ, ties by
    /// index.
    order: Vec<usize>,
    /// Targets sorted by ascending root bound so the min loop exits early.
    target_order: Vec<usize>,
}

impl<'a> Ctx<'a> {
    fn new(dict: &'a Dictionary, k: usize, kind: ObjectiveKind, grid: usize) -> Self {
        let (m, n) = (dict.m(), dict.n());
        let mut lam_cos = vec![0.0; m * n];
        let mut lam_sin = vec![0.0; m * n];
        for t in 0..n {
            let (lam, psi) = (dict.lambda_row(t), dict.psi_row(t));
            for c in 0..m {
                lam_cos[t * m + c] = lam[c] * (2.0 * psi[c]).cos();
                lam_sin[t * m + c] = lam[c] * (2.0 * psi[c]).sin();
            }
        }
        let grid = grid.max(4);
        let step = 2.0 * std::f64::consts::PI / grid as f64;
        let cos_theta: Vec<f64> = (0..grid).map(|g| (g as f64 * step).cos()).collect();
        let sin_theta: Vec<f64> = (0..grid).map(|g| (g as f64 * step).sin()).collect();
        let inv_cos_off = 1.0 / (std::f64::consts::PI / grid as f64).cos();

        // Branch on the candidate with the largest worst-target λ first.
        let mut order: Vec<usize> = (0..m).collect();
        let worst_lambda: Vec<f64> = (0..m)
            .map(|c| (0..n).map(|t| dict.lambda(c, t)).fold(f64::INFINITY, f64::min))
            .collect();
        order.sort_by(|&a, &b| {
            worst_lambda[b].partial_cmp(&worst_lambda[a]).unwrap().then(a.cmp(&b))
        });

        let mut ctx = Self {
            dict,
            k,
            kind,
            lam_cos,
            lam_sin,
            cos_theta,
            sin_theta,
            inv_cos_off,
            order,
            target_order: (0..n).collect(),
        };
        // Order targets by how little headroom they have at the root.
        let root = vec![FREE; m];
        let mut root_bounds: Vec<(f64, usize)> = (0..n)
            .map(|t| (ctx.target_bound(&root, 0, t, f64::NEG_INFINITY).unwrap_or(0.0), t))
            .collect();
        root_bounds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        ctx.target_order = root_bounds.into_iter().map(|(_, t)| t).collect();
        ctx
    }

    /// Sum of the `take` largest values in an implicit sequence, streamed via
    /// a small sorted buffer (take is at most K in practice).
    fn stream_topk(values: impl Iterator<Item = f64>, take: usize, buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        if take == 0 {
            return 0.0;
        }
        for v in values {
            if buf.len() < take {
                let pos = buf.partition_point(|&x| x < v);
                buf.insert(pos, v);
            } else if v > buf[0] {
                let pos = buf.partition_point(|&x| x < v);
                buf.copy_within(1..pos, 0);
                buf[pos - 1] = v;
            }
        }
        buf.iter().sum()
    }

    /// Per-target relaxation bound for one node fixing. For E-opt this is
    /// min over trial angles of [forced coefficients + top-(K-F) free
    /// coefficients] with c_m(θ) = λ_m(1 - cos(2ψ_m - θ)) ≥ 0; the trial set
    /// is the uniform grid joined with the target's own phasor angles 2ψ, so
    /// a single-direction target bounds to exactly zero. Any angle set gives
    /// a valid bound, extra angles only tighten it. For D-opt the same
    /// minimum is multiplied by a sound upper bound on S + r and
    /// square-rooted. Returns None as soon as the running value drops to
    /// `floor` (the caller prunes). A-opt has no relaxation here.
    fn target_bound(&self, ones: &[u32], free: &[u32], t: usize, floor: f64) -> Option<f64> {
        let m = self.dict.m();
        let take = self.k - ones.len();
        let lam = self.dict.lambda_row(t);
        let lc = &self.lam_cos[t * m..(t + 1) * m];
        let ls = &self.lam_sin[t * m..(t + 1) * m];
        let mut buf = Vec::with_capacity(take.min(m));

        // Sound upper bound on S + r over completions (D-opt only).
        let coverage_factor = match self.kind {
            ObjectiveKind::DOpt => {
                let forced_s: f64 = ones.iter().map(|&c| lam[c as usize]).sum();
                let top_lam =
                    Self::stream_topk(free.iter().map(|&c| lam[c as usize]), take, &mut buf);
                let cap = 2.0 * (forced_s + top_lam);

                let mut best = f64::NEG_INFINITY;
                for g in 0..self.cos_theta.len() {
                    let (ct, st) = (self.cos_theta[g], self.sin_theta[g]);
                    let coef = |c: usize| lam[c] + (lc[c] * ct + ls[c] * st) * self.inv_cos_off;
                    let forced: f64 = ones.iter().map(|&c| coef(c as usize)).sum();
                    let top = Self::stream_topk(
                        free.iter().map(|&c| coef(c as usize)),
                        take,
                        &mut buf,
                    );
                    best = best.max(forced + top);
                }
                best.min(cap).max(0.0)
            }
            _ => 1.0,
        };

        let mut best = f64::INFINITY;
        let grid = self.cos_theta.len();
        for g in 0..grid + m {
            // Uniform angles first, then the target's own phasor directions
            // (cos 2ψ_m = λcos2ψ/λ, no trig needed).
            let (ct, st) = if g < grid {
                (self.cos_theta[g], self.sin_theta[g])
            } else {
                (lc[g - grid] / lam[g - grid], ls[g - grid] / lam[g - grid])
            };
            // c_m(θ) = λ_m - (λcos2ψ)·cosθ - (λsin2ψ)·sinθ
            let coef = |c: usize| lam[c] - lc[c] * ct - ls[c] * st;
            let forced: f64 = ones.iter().map(|&c| coef(c as usize)).sum();
            let top = Self::stream_topk(free.iter().map(|&c| coef(c as usize)), take, &mut buf);
            best = best.min(forced + top);
            let current = match self.kind {
                ObjectiveKind::DOpt => (best * coverage_factor).max(0.0).sqrt(),
                _ => best,
            };
            if current <= floor {
                return None;
            }
        }
        match self.kind {
            ObjectiveKind::DOpt => Some((best * coverage_factor).max(0.0).sqrt()),
            _ => Some(best),
        }
    }

    /// Node bound: min over targets of the per-target bound. None once the
    /// running minimum reaches `floor`.
    fn node_bound(&self, state: &[u8], _fixed_ones: usize, floor: f64) -> Option<f64> {
        let ones: Vec<u32> =
            (0..state.len()).filter(|&c| state[c] == ONE).map(|c| c as u32).collect();
        let free: Vec<u32> =
            (0..state.len()).filter(|&c| state[c] == FREE).map(|c| c as u32).collect();
        let mut best = f64::INFINITY;
        for &t in &self.target_order {
            let b = self.target_bound(&ones, &free, t, floor)?;
            best = best.min(b);
            if best <= floor {
                return None;
            }
        }
        Some(best)
    }

    /// Raw score of an explicit index set (same value as `eval_selection`).
    fn raw_of(&self, indices: &[usize]) -> f64 {
        let m = self.dict.m();
        let mut worst = if self.kind.maximizing() { f64::INFINITY } else { f64::NEG_INFINITY };
        for t in 0..self.dict.n() {
            let lam = self.dict.lambda_row(t);
            let lc = &self.lam_cos[t * m..(t + 1) * m];
            let ls = &self.lam_sin[t * m..(t + 1) * m];
            let (mut s, mut u, mut v) = (0.0, 0.0, 0.0);
            for &c in indices {
                s += lam[c];
                u += lc[c];
                v += ls[c];
            }
            let r = u.hypot(v);
            match self.kind {
                ObjectiveKind::EOpt => worst = worst.min((s - r).max(0.0)),
                ObjectiveKind::DOpt => worst = worst.min(((s - r).max(0.0) * (s + r)).sqrt()),
                ObjectiveKind::AOpt => {
                    let singular = r >= s - SINGULARITY_REL_TOL * s;
                    let phi =
                        if singular { f64::INFINITY } else { 4.0 * s / (s * s - r * r) };
                    worst = worst.max(phi);
                }
            }
        }
        worst
    }
}

fn materialize(node: &Node, m: usize) -> Result<(Vec<u8>, usize)> {
    let mut state = vec![FREE; m];
    for &c in &node.fixed_one {
        if c >= m {
            return Err(Error::validation("node.fixed_one", format!("index {c} out of range")));
        }
        state[c] = ONE;
    }
    for &c in &node.fixed_zero {
        if c >= m {
            return Err(Error::validation("node.fixed_zero", format!("index {c} out of range")));
        }
        if state[c] == ONE {
            return Err(Error::validation("node", format!("candidate {c} fixed both ways")));
        }
        state[c] = ZERO;
    }
    Ok((state, node.fixed_one.len()))
}

/// Certified upper bound on the best raw value over all completions of the
/// node (E-opt and D-opt). Returns Ok(None) when the node admits no
/// completion of cardinality K.
pub fn node_upper_bound(
    problem: &SelectionProblem,
    node: &Node,
    angle_grid_size: usize,
) -> Result<Option<f64>> {
    if problem.objective == ObjectiveKind::AOpt {
        return Err(Error::UnsupportedObjective("A-opt has no relaxation bound".into()));
    }
    let m = problem.dictionary.m();
    let (state, ones) = materialize(node, m)?;
    if ones > problem.k || m - node.fixed_zero.len() < problem.k {
        return Ok(None);
    }
    let ctx = Ctx::new(problem.dictionary, problem.k, problem.objective, angle_grid_size);
    Ok(ctx.node_bound(&state, ones, f64::NEG_INFINITY))
}

// ---------------------------------------------------------------------------
// Incumbent heuristics
// ---------------------------------------------------------------------------

fn greedy_from(ctx: &Ctx, state: &[u8]) -> Option<Vec<usize>> {
    let m = ctx.dict.m();
    let mut sel: Vec<usize> = (0..m).filter(|&c| state[c] == ONE).collect();
    let free: Vec<usize> = (0..m).filter(|&c| state[c] == FREE).collect();
    if sel.len() > ctx.k || sel.len() + free.len() < ctx.k {
        return None;
    }
    let mut in_sel = vec![false; m];
    for &c in &sel {
        in_sel[c] = true;
    }

    let mut scratch = Vec::with_capacity(ctx.k + 1);
    while sel.len() < ctx.k {
        let mut best: Option<(f64, usize)> = None;
        for &c in &free {
            if in_sel[c] {
                continue;
            }
            scratch.clear();
            scratch.extend_from_slice(&sel);
            scratch.push(c);
            let raw = ctx.raw_of(&scratch);
            let take = match best {
                None => true,
                Some((b, _)) => ctx.kind.better(raw, b),
            };
            if take {
                best = Some((raw, c));
            }
        }
        let (_, c) = best?;
        sel.push(c);
        in_sel[c] = true;
    }

    // 1-swap local search among free candidates (fixed ones stay put).
    let movable: Vec<usize> =
        sel.iter().cloned().filter(|&c| state[c] == FREE).collect();
    let mut current = ctx.raw_of(&sel);
    loop {
        let mut improved: Option<(f64, usize, usize)> = None;
        for &out in &movable {
            if !in_sel[out] {
                continue;
            }
            for &inn in &free {
                if in_sel[inn] {
                    continue;
                }
                scratch.clear();
                scratch.extend(sel.iter().cloned().filter(|&c| c != out));
                scratch.push(inn);
                let raw = ctx.raw_of(&scratch);
                let take = match improved {
                    None => ctx.kind.better(raw, current),
                    Some((b, _, _)) => ctx.kind.better(raw, b),
                };
                if take {
                    improved = Some((raw, out, inn));
                }
            }
        }
        match improved {
            Some((raw, out, inn)) => {
                sel.retain(|&c| c != out);
                sel.push(inn);
                in_sel[out] = false;
                in_sel[inn] = true;
                current = raw;
            }
            None => break,
        }
    }
    sel.sort_unstable();
    Some(sel)
}

/// Greedy completion of a node followed by 1-swap local search. Ties break
/// toward the lowest candidate index; never worse than any single greedy
/// draw. None when the node admits no completion.
pub fn greedy_incumbent(problem: &SelectionProblem, node: &Node) -> Result<Option<Selection>> {
    let m = problem.dictionary.m();
    let (state, _) = materialize(node, m)?;
    let ctx = Ctx::new(problem.dictionary, problem.k, problem.objective, 4);
    Ok(greedy_from(&ctx, &state).map(Selection::from_sorted_unchecked))
}

// ---------------------------------------------------------------------------
// Exhaustive oracle and random-minimax baseline
// ---------------------------------------------------------------------------

fn combination_count(m: usize, k: usize, cap: u128) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((m - i) as u128) / (i as u128 + 1);
        if acc > cap {
            return acc;
        }
    }
    acc
}

fn report(
    problem: &SelectionProblem,
    selection: Option<(Selection, f64, bool)>,
    bound: Option<f64>,
    nodes: u64,
    status: SolveStatus,
    started: Instant,
) -> SolveReport {
    let (selection, raw_value, singular) = match selection {
        Some((sel, raw, singular)) => (Some(sel), raw, singular),
        None => (None, f64::NAN, false),
    };
    let gap = bound.map(|b| ((b - raw_value) / b.max(GAP_DENOM_EPS)).max(0.0));
    SolveReport {
        objective: problem.objective,
        k: problem.k,
        selection,
        raw_value,
        objective_value: problem.objective.objective_value(raw_value),
        bound,
        gap,
        nodes_explored: nodes,
        status,
        runtime_ms: started.elapsed().as_millis() as u64,
        singular,
    }
}

/// Enumerate every K-subset and return the true optimum. Refuses instances
/// whose C(M, K) exceeds `budget`.
pub fn exhaustive_oracle(problem: &SelectionProblem, budget: u128) -> Result<SolveReport> {
    let started = Instant::now();
    let (m, k) = (problem.dictionary.m(), problem.k);
    if m < k {
        return Ok(report(problem, None, None, 0, SolveStatus::Infeasible, started));
    }
    let combos = combination_count(m, k, budget);
    if combos > budget {
        return Err(Error::BudgetExceeded { m, k, combinations: combos, budget });
    }
    let ctx = Ctx::new(problem.dictionary, k, problem.objective, 4);

    let mut idx: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut count: u64 = 0;
    loop {
        count += 1;
        let raw = ctx.raw_of(&idx);
        let take = match &best {
            None => true,
            Some((_, b)) => problem.objective.better(raw, *b),
        };
        if take {
            best = Some((idx.clone(), raw));
        }
        // Advance to the next lexicographic combination.
        let mut i = k;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if idx[i] != i + m - k {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                let (sel, raw) = best.unwrap();
                let selection = Selection::from_sorted_unchecked(sel);
                let (summaries, _) = eval_selection(problem, &selection)?;
                let singular = any_singular(&summaries);
                return Ok(report(
                    problem,
                    Some((selection, raw, singular)),
                    Some(raw),
                    count,
                    SolveStatus::EpsOptimal,
                    started,
                ));
            }
        }
        if idx[0] > m - k {
            unreachable!("combination iterator past the end");
        }
    }
}

/// Best of `trials` uniformly random K-subsets under the problem objective.
/// Deterministic for a fixed seed; carries no certificate.
pub fn rand_minimax(problem: &SelectionProblem, trials: u32, rng_seed: u64) -> Result<SolveReport> {
    use rand::SeedableRng;
    let started = Instant::now();
    if trials == 0 {
        return Err(Error::validation("trials", "must be >= 1"));
    }
    let (m, k) = (problem.dictionary.m(), problem.k);
    if m < k {
        return Ok(report(problem, None, None, 0, SolveStatus::Infeasible, started));
    }
    let ctx = Ctx::new(problem.dictionary, k, problem.objective, 4);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..trials {
        let mut draw = rand::seq::index::sample(&mut rng, m, k).into_vec();
        draw.sort_unstable();
        let raw = ctx.raw_of(&draw);
        let take = match &best {
            None => true,
            Some((_, b)) => problem.objective.better(raw, *b),
        };
        if take {
            best = Some((draw, raw));
        }
    }
    let (sel, raw) = best.unwrap();
    let selection = Selection::from_sorted_unchecked(sel);
    let (summaries, _) = eval_selection(problem, &selection)?;
    let singular = any_singular(&summaries);
    Ok(report(
        problem,
        Some((selection, raw, singular)),
        None,
        trials as u64,
        SolveStatus::TimeLimit,
        started,
    ))
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct HeapNode {
    bound: f64,
    seq: u64,
    /// How many candidates of the static branch order are decided.
    depth: u32,
    ones: Vec<u32>,
}

impl PartialEq for HeapNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapNode {}
impl PartialOrd for HeapNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapNode {
    fn cmp(&self, other: &Self) -> Ordering {
        // Best bound first; FIFO among equal bounds keeps runs reproducible.
        self.bound.total_cmp(&other.bound).then(other.seq.cmp(&self.seq))
    }
}

/// Exact min–max solver for the E-opt and D-opt objectives.
///
/// Best-bound-first search; branching follows the static candidate order
/// (largest worst-target λ first), fixing the candidate to one or zero.
/// Nodes are pruned against the incumbent; the search certifies ε-optimality
/// once the global bound is within `eps_gap` (relative) of the incumbent, or
/// proves exact optimality when the open list empties. On hitting the time
/// or node limit the best incumbent is returned uncertified.
pub fn branch_and_bound(problem: &SelectionProblem, config: &BnbConfig) -> Result<SolveReport> {
    if problem.objective == ObjectiveKind::AOpt {
        return Err(Error::UnsupportedObjective(
            "branch-and-bound solves E-opt and D-opt; A-opt is baseline-only".into(),
        ));
    }
    let started = Instant::now();
    let (m, k) = (problem.dictionary.m(), problem.k);
    if m < k {
        return Ok(report(problem, None, None, 0, SolveStatus::Infeasible, started));
    }
    let ctx = Ctx::new(problem.dictionary, k, problem.objective, config.angle_grid_size);

    // Incumbent from greedy + 1-swap on the root.
    let root_state = vec![FREE; m];
    let mut inc_sel = greedy_from(&ctx, &root_state).expect("root admits a completion");
    let mut inc_raw = ctx.raw_of(&inc_sel);

    let mut state = vec![FREE; m];
    let apply = |state: &mut Vec<u8>, node: &HeapNode, ctx: &Ctx| {
        for s in state.iter_mut() {
            *s = FREE;
        }
        for d in 0..node.depth as usize {
            state[ctx.order[d]] = ZERO;
        }
        for &c in &node.ones {
            state[c as usize] = ONE;
        }
    };

    let root_bound = ctx
        .node_bound(&root_state, 0, f64::NEG_INFINITY)
        .expect("root bound exists");
    let mut heap = BinaryHeap::new();
    let mut seq: u64 = 0;
    heap.push(HeapNode { bound: root_bound, seq, depth: 0, ones: Vec::new() });

    let mut nodes_explored: u64 = 0;
    let time_limit = std::time::Duration::from_millis(config.time_limit_ms);

    let (status, final_bound) = loop {
        if started.elapsed() >= time_limit || nodes_explored >= config.max_nodes {
            let open = heap.peek().map(|n| n.bound).unwrap_or(inc_raw);
            break (SolveStatus::TimeLimit, open.max(inc_raw));
        }
        let Some(top) = heap.pop() else {
            break (SolveStatus::EpsOptimal, inc_raw);
        };
        nodes_explored += 1;
        if top.bound <= inc_raw {
            break (SolveStatus::EpsOptimal, inc_raw);
        }
        if top.bound - inc_raw <= config.eps_gap * top.bound.max(GAP_DENOM_EPS) {
            break (SolveStatus::EpsOptimal, top.bound);
        }

        let depth = top.depth as usize;
        debug_assert!(depth < m, "undecided node must have a free candidate");
        let var = ctx.order[depth];

        // Child fixing `var` in.
        {
            let mut ones = top.ones.clone();
            ones.push(var as u32);
            if ones.len() == k {
                let mut sel: Vec<usize> = ones.iter().map(|&c| c as usize).collect();
                sel.sort_unstable();
                let raw = ctx.raw_of(&sel);
                if problem.objective.better(raw, inc_raw) {
                    inc_raw = raw;
                    inc_sel = sel;
                }
            } else {
                let free_after = m - depth - 1;
                let need = k - ones.len();
                if free_after >= need {
                    if free_after == need {
                        let mut sel: Vec<usize> = ones.iter().map(|&c| c as usize).collect();
                        sel.extend(ctx.order[depth + 1..].iter().cloned());
                        sel.sort_unstable();
                        let raw = ctx.raw_of(&sel);
                        if problem.objective.better(raw, inc_raw) {
                            inc_raw = raw;
                            inc_sel = sel;
                        }
                    } else {
                        let child = HeapNode { bound: 0.0, seq: 0, depth: top.depth + 1, ones };
                        apply(&mut state, &child, &ctx);
                        if let Some(b) = ctx.node_bound(&state, child.ones.len(), inc_raw) {
                            seq += 1;
                            heap.push(HeapNode { bound: b, seq, ..child });
                        }
                    }
                }
            }
        }

        // Child fixing `var` out.
        {
            let free_after = m - depth - 1;
            let need = k - top.ones.len();
            if free_after >= need {
                if free_after == need {
                    let mut sel: Vec<usize> = top.ones.iter().map(|&c| c as usize).collect();
                    sel.extend(ctx.order[depth + 1..].iter().cloned());
                    sel.sort_unstable();
                    let raw = ctx.raw_of(&sel);
                    if problem.objective.better(raw, inc_raw) {
                        inc_raw = raw;
                        inc_sel = sel;
                    }
                } else {
                    let child =
                        HeapNode { bound: 0.0, seq: 0, depth: top.depth + 1, ones: top.ones };
                    apply(&mut state, &child, &ctx);
                    if let Some(b) = ctx.node_bound(&state, child.ones.len(), inc_raw) {
                        seq += 1;
                        heap.push(HeapNode { bound: b, seq, ..child });
                    }
                }
            }
        }
    };

    let selection = Selection::from_sorted_unchecked(inc_sel);
    let (summaries, raw) = eval_selection(problem, &selection)?;
    debug_assert_eq!(raw, inc_raw);
    let singular = any_singular(&summaries);
    Ok(report(
        problem,
        Some((selection, inc_raw, singular)),
        Some(final_bound),
        nodes_explored,
        status,
        started,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::Dictionary;
    use crate::scene::Vec3;

    /// Synthetic dictionary straight from (λ, ψ) tables; candidate and
    /// target positions are placeholders on the correct sides of the wall.
    pub(crate) fn synthetic_dictionary(lambda_mn: &[Vec<f64>], psi_mn: &[Vec<f64>]) -> Dictionary {
        let n = lambda_mn.len();
        let m = lambda_mn[0].len();
        let candidates: Vec<Vec3> =
            (0..m).map(|i| Vec3::new(i as f64, -10.0, 0.0)).collect();
        let targets: Vec<Vec3> = (0..n).map(|i| Vec3::new(i as f64, 10.0, 0.0)).collect();
        let mut lambda = vec![0.0; m * n];
        let mut psi = vec![0.0; m * n];
        for t in 0..n {
            for c in 0..m {
                lambda[t * m + c] = lambda_mn[t][c];
                psi[t * m + c] = psi_mn[t][c];
            }
        }
        Dictionary::from_parts(candidates, targets, lambda, psi, [0u8; 32]).unwrap()
    }

    pub(crate) fn random_tables(
        seed: u64,
        m: usize,
        n: usize,
    ) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let lambda: Vec<Vec<f64>> =
            (0..n).map(|_| (0..m).map(|_| 0.05 + 4.0 * next()).collect()).collect();
        let psi: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| 1e-3 + (std::f64::consts::PI - 2e-3) * next()).collect())
            .collect();
        (lambda, psi)
    }

    fn problem(dict: &Dictionary, k: usize, kind: ObjectiveKind) -> SelectionProblem<'_> {
        SelectionProblem::new(dict, k, kind).unwrap()
    }

    #[test]
    fn collinear_information_scores_zero() {
        // Every candidate at the same angle for the only target: r = S.
        let lambda = vec![vec![1.0, 2.0, 3.0]];
        let psi = vec![vec![0.7, 0.7, 0.7]];
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 2, ObjectiveKind::EOpt);
        let sel = Selection::new(vec![0, 2], 2, 3).unwrap();
        let (summaries, raw) = eval_selection(&p, &sel).unwrap();
        assert!(raw.abs() < 1e-12, "collinear selection must score 0, got {raw}");
        assert!(any_singular(&summaries));
    }

    #[test]
    fn closure_instance_scores_its_perimeter() {
        // Fig-2-style single-target instance: constructive closure angles
        // make r ~ 0, so the E raw value is the full perimeter S = 8.3.
        let weights = [1.5, 2.0, 2.3, 2.5];
        let closure = crate::polygon::closure_angles(&weights).unwrap();
        // Rotate the phasors off the ψ = 0 boundary; the residual is
        // rotation-invariant.
        let psi: Vec<f64> = closure
            .angles
            .iter()
            .map(|t| (t + 0.7).rem_euclid(2.0 * std::f64::consts::PI) / 2.0)
            .collect();
        let dict = synthetic_dictionary(&[weights.to_vec()], &[psi]);
        let p = problem(&dict, 4, ObjectiveKind::EOpt);
        let sel = Selection::new(vec![0, 1, 2, 3], 4, 4).unwrap();
        let (_, raw) = eval_selection(&p, &sel).unwrap();
        assert!((raw - 8.3).abs() < 1e-6, "{raw}");
    }

    #[test]
    fn eval_matches_independent_resummation() {
        let (lambda, psi) = random_tables(99, 9, 4);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 3, ObjectiveKind::DOpt);
        let sel = Selection::new(vec![1, 4, 7], 3, 9).unwrap();
        let (summaries, raw) = eval_selection(&p, &sel).unwrap();

        // Straightforward duplicate implementation.
        let mut expect = f64::INFINITY;
        for t in 0..4 {
            let (mut s, mut u, mut v) = (0.0, 0.0, 0.0);
            for &c in sel.indices() {
                s += lambda[t][c];
                u += lambda[t][c] * (2.0 * psi[t][c]).cos();
                v += lambda[t][c] * (2.0 * psi[t][c]).sin();
            }
            let r = (u * u + v * v).sqrt();
            expect = expect.min((s * s - r * r).max(0.0).sqrt());
            assert!((summaries[t].s - s).abs() < 1e-12);
        }
        assert!((raw - expect).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_matches_hand_enumeration() {
        let (lambda, psi) = random_tables(7, 6, 1);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 2, ObjectiveKind::EOpt);
        let oracle = exhaustive_oracle(&p, 1_000_000).unwrap();
        assert_eq!(oracle.status, SolveStatus::EpsOptimal);
        assert_eq!(oracle.gap, Some(0.0));
        assert_eq!(oracle.nodes_explored, 15, "C(6,2) subsets");

        let mut best = f64::NEG_INFINITY;
        for a in 0..6 {
            for b in (a + 1)..6 {
                let sel = Selection::new(vec![a, b], 2, 6).unwrap();
                let (_, raw) = eval_selection(&p, &sel).unwrap();
                best = best.max(raw);
            }
        }
        assert!((oracle.raw_value - best).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_unique_selection_and_budget_refusal() {
        let (lambda, psi) = random_tables(3, 4, 2);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 4, ObjectiveKind::EOpt);
        let r = exhaustive_oracle(&p, 10).unwrap();
        assert_eq!(r.selection.unwrap().indices(), &[0, 1, 2, 3]);

        let (lambda, psi) = random_tables(3, 200, 1);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 5, ObjectiveKind::EOpt);
        assert!(matches!(
            exhaustive_oracle(&p, 1_000_000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn rand_minimax_is_deterministic_and_monotone_in_trials() {
        let (lambda, psi) = random_tables(11, 12, 3);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 3, ObjectiveKind::EOpt);

        let a = rand_minimax(&p, 1, 5).unwrap();
        let b = rand_minimax(&p, 1, 5).unwrap();
        assert_eq!(a.selection, b.selection);
        assert_eq!(a.status, SolveStatus::TimeLimit);
        assert_eq!(a.bound, None);

        let oracle = exhaustive_oracle(&p, 1_000_000).unwrap();
        let mut last = f64::NEG_INFINITY;
        for trials in [1, 10, 100, 1000] {
            let r = rand_minimax(&p, trials, 5).unwrap();
            assert!(r.raw_value >= last - 1e-15, "best-so-far must not regress");
            assert!(r.raw_value <= oracle.raw_value + 1e-12, "cannot beat the oracle");
            last = r.raw_value;
        }
    }

    #[test]
    fn rand_minimax_serves_the_a_objective() {
        let (lambda, psi) = random_tables(17, 10, 3);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 3, ObjectiveKind::AOpt);
        let few = rand_minimax(&p, 5, 9).unwrap();
        let many = rand_minimax(&p, 500, 9).unwrap();
        assert!(many.raw_value <= few.raw_value, "A-opt minimizes the worst Φ_A");
        assert_eq!(many.objective_value, many.raw_value);
    }

    #[test]
    fn node_bound_collinear_root_is_exact_zero() {
        let lambda = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let psi = vec![vec![0.9, 0.9, 0.9, 0.9]];
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 2, ObjectiveKind::EOpt);
        let b = node_upper_bound(&p, &Node::default(), 64).unwrap().unwrap();
        assert!(b.abs() < 1e-9, "all-collinear instance has optimum 0, bound {b}");
    }

    #[test]
    fn node_bound_dominates_completions() {
        for seed in 0..20 {
            let (lambda, psi) = random_tables(200 + seed, 10, 2);
            let dict = synthetic_dictionary(&lambda, &psi);
            for kind in [ObjectiveKind::EOpt, ObjectiveKind::DOpt] {
                let p = problem(&dict, 3, kind);
                let node = Node { fixed_one: vec![seed as usize % 10], fixed_zero: vec![(seed as usize + 3) % 10] };
                let bound = node_upper_bound(&p, &node, 64).unwrap().unwrap();
                // Enumerate completions.
                let mut best = f64::NEG_INFINITY;
                for a in 0..10usize {
                    for b in (a + 1)..10 {
                        for c in (b + 1)..10 {
                            let sel = [a, b, c];
                            if !sel.contains(&(seed as usize % 10)) {
                                continue;
                            }
                            if sel.contains(&((seed as usize + 3) % 10)) {
                                continue;
                            }
                            let s = Selection::new(sel.to_vec(), 3, 10).unwrap();
                            let (_, raw) = eval_selection(&p, &s).unwrap();
                            best = best.max(raw);
                        }
                    }
                }
                assert!(
                    bound >= best - 1e-9,
                    "seed {seed} {kind:?}: bound {bound} below best completion {best}"
                );
            }
        }
    }

    #[test]
    fn leaf_bound_is_tight_up_to_grid_slack() {
        let (lambda, psi) = random_tables(404, 8, 3);
        let dict = synthetic_dictionary(&lambda, &psi);
        for kind in [ObjectiveKind::EOpt, ObjectiveKind::DOpt] {
            let p = problem(&dict, 3, kind);
            let node = Node { fixed_one: vec![1, 4, 6], fixed_zero: vec![] };
            let bound = node_upper_bound(&p, &node, 64).unwrap().unwrap();
            let sel = Selection::new(vec![1, 4, 6], 3, 8).unwrap();
            let (_, raw) = eval_selection(&p, &sel).unwrap();
            assert!(bound >= raw - 1e-12, "{kind:?}: leaf bound {bound} below value {raw}");
            // 1 - cos(π/64) ≈ 1.2e-3 of the per-target scale.
            let slack = 0.01 * raw.abs().max(1.0);
            assert!(bound - raw <= slack, "{kind:?}: leaf slack too big: {bound} vs {raw}");
        }
    }

    #[test]
    fn node_bound_flags_infeasible_nodes() {
        let (lambda, psi) = random_tables(5, 4, 1);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 3, ObjectiveKind::EOpt);
        let node = Node { fixed_one: vec![], fixed_zero: vec![0, 1] };
        assert_eq!(node_upper_bound(&p, &node, 32).unwrap(), None);
    }

    #[test]
    fn greedy_returns_fixed_leaf_and_never_degrades_by_swap() {
        let (lambda, psi) = random_tables(31, 9, 3);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 3, ObjectiveKind::EOpt);
        let node = Node { fixed_one: vec![2, 5, 8], fixed_zero: vec![] };
        let sel = greedy_incumbent(&p, &node).unwrap().unwrap();
        assert_eq!(sel.indices(), &[2, 5, 8]);

        let free = greedy_incumbent(&p, &Node::default()).unwrap().unwrap();
        let (_, greedy_raw) = eval_selection(&p, &free).unwrap();
        // The greedy incumbent must already be a 1-swap local optimum.
        for out in free.indices() {
            for inn in 0..9 {
                if free.indices().contains(&inn) {
                    continue;
                }
                let mut alt: Vec<usize> =
                    free.indices().iter().cloned().filter(|c| c != out).collect();
                alt.push(inn);
                let alt = Selection::new(alt, 3, 9).unwrap();
                let (_, raw) = eval_selection(&p, &alt).unwrap();
                assert!(raw <= greedy_raw + 1e-12, "swap {out}->{inn} improves on greedy");
            }
        }
    }

    #[test]
    fn bnb_matches_oracle_on_small_instances() {
        for seed in 0..12 {
            let m = 8 + (seed as usize % 5);
            let n = 1 + (seed as usize % 3);
            let (lambda, psi) = random_tables(1000 + seed, m, n);
            let dict = synthetic_dictionary(&lambda, &psi);
            for kind in [ObjectiveKind::EOpt, ObjectiveKind::DOpt] {
                let p = problem(&dict, 3, kind);
                let oracle = exhaustive_oracle(&p, 1_000_000).unwrap();
                let cfg = BnbConfig { eps_gap: 0.0, ..Default::default() };
                let got = branch_and_bound(&p, &cfg).unwrap();
                assert_eq!(got.status, SolveStatus::EpsOptimal);
                assert!(
                    (got.raw_value - oracle.raw_value).abs()
                        <= 1e-9 * oracle.raw_value.abs().max(1.0),
                    "seed {seed} {kind:?}: bnb {} vs oracle {}",
                    got.raw_value,
                    oracle.raw_value
                );
                assert!(got.bound.unwrap() >= got.raw_value - 1e-12);
            }
        }
    }

    #[test]
    fn bnb_zero_time_limit_returns_greedy_incumbent() {
        let (lambda, psi) = random_tables(77, 14, 4);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 4, ObjectiveKind::EOpt);
        let cfg = BnbConfig { time_limit_ms: 0, ..Default::default() };
        let r = branch_and_bound(&p, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::TimeLimit);
        let greedy = greedy_incumbent(&p, &Node::default()).unwrap().unwrap();
        assert_eq!(r.selection.unwrap(), greedy);
        assert_eq!(r.nodes_explored, 0);
    }

    #[test]
    fn bnb_reports_infeasible_below_k() {
        let (lambda, psi) = random_tables(2, 3, 1);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 4, ObjectiveKind::EOpt);
        let r = branch_and_bound(&p, &BnbConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.selection.is_none());
        assert!(r.raw_value.is_nan());
    }

    #[test]
    fn bnb_rejects_the_a_objective() {
        let (lambda, psi) = random_tables(2, 6, 1);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 2, ObjectiveKind::AOpt);
        assert!(matches!(
            branch_and_bound(&p, &BnbConfig::default()),
            Err(Error::UnsupportedObjective(_))
        ));
    }

    #[test]
    fn bnb_is_deterministic() {
        let (lambda, psi) = random_tables(55, 16, 5);
        let dict = synthetic_dictionary(&lambda, &psi);
        let p = problem(&dict, 4, ObjectiveKind::DOpt);
        let cfg = BnbConfig { eps_gap: 1e-6, ..Default::default() };
        let a = branch_and_bound(&p, &cfg).unwrap();
        let b = branch_and_bound(&p, &cfg).unwrap();
        assert_eq!(a.selection, b.selection);
        assert_eq!(a.nodes_explored, b.nodes_explored);
        assert_eq!(a.raw_value, b.raw_value);
        assert_eq!(a.bound, b.bound);
    }

    #[test]
    fn raw_e_and_d_are_consistent_for_one_selection() {
        // τ ≥ γ always, and τ never exceeds sqrt(γ·(S+r)) at the E-critical
        // target.
        for seed in 0..20 {
            let (lambda, psi) = random_tables(3000 + seed, 10, 4);
            let dict = synthetic_dictionary(&lambda, &psi);
            let pe = problem(&dict, 3, ObjectiveKind::EOpt);
            let pd = problem(&dict, 3, ObjectiveKind::DOpt);
            let sel = Selection::new(vec![0, 3, 7], 3, 10).unwrap();
            let (summaries, gamma) = eval_selection(&pe, &sel).unwrap();
            let (_, tau) = eval_selection(&pd, &sel).unwrap();
            assert!(tau >= gamma - 1e-12);
            let critical = summaries
                .iter()
                .min_by(|a, b| (a.s - a.r).total_cmp(&(b.s - b.r)))
                .unwrap();
            let cap = (gamma * (critical.s + critical.r)).sqrt();
            assert!(tau <= cap + 1e-9, "τ {tau} above sqrt(γ(S+r)) {cap}");
        }
    }
}
