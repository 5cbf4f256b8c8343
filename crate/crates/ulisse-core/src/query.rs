//! Query answering over the index: approximate k-NN (tree-guided), exact
//! k-NN (approximate seeding plus a pruned scan of the flat envelope list),
//! and epsilon-range search, for Euclidean and DTW, raw and normalized.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::bounds::{
    lb_pal_bounds, mindist_ulisse_bounds, EnvelopeBounds, QuerySummary,
};
use crate::distance::{
    build_dtw_envelope, dtw_counted, euclidean_counted, lb_keogh_counted, DtwEnvelope,
    WarpingWindow,
};
use crate::error::{Error, Result};
use crate::index::{IndexNode, NodeKind, UlisseIndex};
use crate::series::{znormalize_values, SubsequenceRef};
use crate::summary::UEnvelope;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Euclidean,
    Dtw(WarpingWindow),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Request {
    Knn(usize),
    Range(f64),
}

#[derive(Debug, Clone)]
pub struct QuerySpec {
    pub values: Vec<f64>,
    pub request: Request,
    pub measure: Measure,
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub r: SubsequenceRef,
    pub distance: f64,
}

impl Match {
    /// Canonical ordering: (distance, series id, offset) ascending.
    pub fn canonical_cmp(&self, other: &Match) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.r.series_id.cmp(&other.r.series_id))
            .then(self.r.offset.cmp(&other.r.offset))
    }
}

/// Runtime counters. `envelopes_pruned + envelopes_checked` equals the
/// total envelope count for the exact-scan phase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryStats {
    pub leaves_visited: u64,
    pub envelopes_pruned: u64,
    pub envelopes_checked: u64,
    pub candidates_compared: u64,
    pub true_dist_computed: u64,
    pub lbkeogh_computed: u64,
    pub points_fetched: u64,
    pub abandons: u64,
    /// Points actually examined by true-distance computations.
    pub points_examined: u64,
    /// Points all compared candidates would cost without any skipping.
    pub points_budget: u64,
}

impl QueryStats {
    /// Fraction of envelopes whose raw data was never fetched.
    pub fn pruning_power(&self) -> f64 {
        let total = self.envelopes_pruned + self.envelopes_checked;
        if total == 0 {
            0.0
        } else {
            self.envelopes_pruned as f64 / total as f64
        }
    }

    /// Fraction of candidate points skipped by lower-bound cascades and
    /// early-abandoned distance computations.
    pub fn abandoning_power(&self) -> f64 {
        if self.points_budget == 0 {
            0.0
        } else {
            1.0 - self.points_examined as f64 / self.points_budget as f64
        }
    }
}

#[derive(Debug)]
pub struct ApproxOutcome {
    pub matches: Vec<Match>,
    /// Best-so-far distances, ascending, one per requested neighbor.
    pub bsf: Vec<f64>,
    pub stats: QueryStats,
    /// True when the search provably returned the exact answer.
    pub exact: bool,
    /// True when fewer than k candidates exist.
    pub padded: bool,
}

#[derive(Debug)]
pub struct ExactOutcome {
    pub matches: Vec<Match>,
    pub stats: QueryStats,
}

/// Bounded best-k set under the canonical ordering.
struct TopK {
    k: usize,
    items: Vec<Match>,
    /// Provisional pruning threshold while fewer than k candidates are
    /// held; an upper bound on the true k-th distance (e.g. from an
    /// approximate search), never a member of the result set.
    seed_threshold: f64,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK {
            k,
            items: Vec::with_capacity(k + 1),
            seed_threshold: f64::INFINITY,
        }
    }

    fn threshold(&self) -> f64 {
        if self.items.len() < self.k {
            self.seed_threshold
        } else {
            self.items.last().unwrap().distance
        }
    }

    /// Inserts if the candidate beats the current k-th entry canonically.
    fn offer(&mut self, m: Match) -> bool {
        let pos = self
            .items
            .partition_point(|x| x.canonical_cmp(&m) == Ordering::Less);
        if pos >= self.k {
            return false;
        }
        self.items.insert(pos, m);
        if self.items.len() > self.k {
            self.items.pop();
        }
        true
    }
}

/// Per-query context shared by every phase.
struct QueryContext<'a> {
    idx: &'a UlisseIndex,
    values: Vec<f64>,
    summary: QuerySummary,
    dtw_env: Option<DtwEnvelope>,
    measure: Measure,
}

impl<'a> QueryContext<'a> {
    fn new(idx: &'a UlisseIndex, spec: &QuerySpec) -> Result<Self> {
        let cfg = &idx.config;
        if spec.normalized != cfg.normalized {
            return Err(Error::Config(format!(
                "query normalized={} but index normalized={}",
                spec.normalized, cfg.normalized
            )));
        }
        let qlen = spec.values.len();
        if !cfg.range.contains(qlen) {
            return Err(Error::QueryLength {
                got: qlen,
                l_min: cfg.range.l_min,
                l_max: cfg.range.l_max,
            });
        }
        match spec.request {
            Request::Knn(k) if k < 1 => {
                return Err(Error::Argument("k must be >= 1".into()))
            }
            Request::Range(eps) if eps.is_nan() || eps < 0.0 => {
                return Err(Error::Argument("epsilon must be >= 0".into()))
            }
            _ => {}
        }
        let values = if spec.normalized {
            znormalize_values(&spec.values).0
        } else {
            spec.values.clone()
        };
        let (summary, dtw_env) = match spec.measure {
            Measure::Euclidean => (QuerySummary::new(&values, cfg.paa.segment_len)?, None),
            Measure::Dtw(r) => {
                if r.r >= qlen {
                    return Err(Error::Argument(format!(
                        "warping window {} not below query length {qlen}",
                        r.r
                    )));
                }
                (
                    QuerySummary::with_dtw(&values, cfg.paa.segment_len, r)?,
                    Some(build_dtw_envelope(&values, r)),
                )
            }
        };
        Ok(QueryContext {
            idx,
            values,
            summary,
            dtw_env,
            measure: spec.measure,
        })
    }

    fn qlen(&self) -> usize {
        self.values.len()
    }

    fn node_bound(&self, n: &IndexNode) -> Result<f64> {
        let b = EnvelopeBounds::Words {
            lower: &n.lower_word,
            upper: &n.upper_word,
        };
        match self.measure {
            Measure::Euclidean => {
                mindist_ulisse_bounds(&self.summary, &b, &self.idx.config.breakpoints)
            }
            Measure::Dtw(_) => lb_pal_bounds(&self.summary, &b, &self.idx.config.breakpoints),
        }
    }

    /// Priority of a node in the approximate search. Inner nodes use their
    /// word pair; leaves use the tightest exact-envelope bound over their
    /// admissible entries (still a valid lower bound for everything the
    /// leaf represents), which breaks the heavy ties coarse word regions
    /// produce at zero.
    fn queue_bound(&self, n: &IndexNode) -> Result<f64> {
        if let NodeKind::Leaf { entries } = &n.kind {
            let mut best = f64::INFINITY;
            for &pos in entries {
                let e = &self.idx.envelope_list[pos];
                if !e.covers_length(self.qlen(), self.idx.series_len(e.series_id)) {
                    continue;
                }
                best = best.min(self.envelope_bound(e)?);
            }
            return Ok(best);
        }
        self.node_bound(n)
    }

    fn envelope_bound(&self, e: &UEnvelope) -> Result<f64> {
        let b = EnvelopeBounds::exact(e);
        match self.measure {
            Measure::Euclidean => {
                mindist_ulisse_bounds(&self.summary, &b, &self.idx.config.breakpoints)
            }
            Measure::Dtw(_) => lb_pal_bounds(&self.summary, &b, &self.idx.config.breakpoints),
        }
    }

    /// True distance to the candidate at (series, offset), abandoning above
    /// the threshold. Normalized mode Z-normalizes the candidate first.
    fn true_distance(
        &self,
        sid: u32,
        offset: usize,
        threshold: f64,
        stats: &mut QueryStats,
    ) -> Result<Option<f64>> {
        let d = &self.idx.collection.series[sid as usize];
        let raw = d.subsequence(offset, self.qlen());
        let owned;
        let cand: &[f64] = if self.idx.config.normalized {
            owned = znormalize_values(raw).0;
            &owned
        } else {
            raw
        };
        stats.candidates_compared += 1;
        stats.points_budget += self.qlen() as u64;
        // Abandon strictly above the next representable value, so a
        // candidate whose computed distance ties the threshold exactly is
        // never lost to sqrt-then-square rounding.
        let cut = threshold.next_up();
        let abandon = threshold.is_finite().then_some(cut);
        // DTW cascade: LB_Keogh on the candidate before the true distance.
        if let (Measure::Dtw(r), Some(env)) = (self.measure, &self.dtw_env) {
            if threshold.is_finite() {
                stats.lbkeogh_computed += 1;
                let (lb, _) = lb_keogh_counted(env, cand, abandon)?;
                match lb {
                    None => {
                        stats.abandons += 1;
                        return Ok(None);
                    }
                    Some(lb) if lb > cut => return Ok(None),
                    _ => {}
                }
            }
            stats.true_dist_computed += 1;
            let (dist, seen) = dtw_counted(&self.values, cand, r, abandon)?;
            stats.points_examined += seen;
            if dist.is_none() {
                stats.abandons += 1;
            }
            return Ok(dist);
        }
        stats.true_dist_computed += 1;
        let (dist, seen) = euclidean_counted(&self.values, cand, abandon)?;
        stats.points_examined += seen;
        if dist.is_none() {
            stats.abandons += 1;
        }
        Ok(dist)
    }

    /// Visits one envelope: fetches its raw window once, then compares
    /// every admissible candidate offset against the threshold source.
    fn visit_envelope(
        &self,
        e: &UEnvelope,
        best: &mut TopK,
        fixed_threshold: Option<f64>,
        collect: Option<&mut Vec<Match>>,
        stats: &mut QueryStats,
    ) -> Result<bool> {
        let series_len = self.idx.collection.series[e.series_id as usize].len();
        let qlen = self.qlen();
        let offsets = e.candidate_offsets(qlen, series_len);
        let window = (offsets.end() + qlen - offsets.start()) as u64;
        stats.points_fetched += window;
        let mut improved = false;
        let mut sink = collect;
        for i in offsets {
            let threshold = fixed_threshold.unwrap_or_else(|| best.threshold());
            if let Some(dist) = self.true_distance(e.series_id, i, threshold, stats)? {
                let m = Match {
                    r: SubsequenceRef {
                        series_id: e.series_id,
                        offset: i as u32,
                        length: qlen as u32,
                    },
                    distance: dist,
                };
                match &mut sink {
                    Some(out) => {
                        if dist <= fixed_threshold.unwrap_or(f64::INFINITY) {
                            out.push(m);
                            improved = true;
                        }
                    }
                    None => {
                        if best.offer(m) {
                            improved = true;
                        }
                    }
                }
            }
        }
        Ok(improved)
    }
}

/// Heap entry ordered by smallest bound first, ties by insertion order.
struct HeapItem<'a> {
    bound: f64,
    seq: u64,
    node: &'a IndexNode,
}

impl PartialEq for HeapItem<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for HeapItem<'_> {}
impl PartialOrd for HeapItem<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the smallest bound.
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

fn knn_k(spec: &QuerySpec) -> Result<usize> {
    match spec.request {
        Request::Knn(k) => Ok(k),
        Request::Range(_) => Err(Error::Argument(
            "k-NN search requires a k-NN request".into(),
        )),
    }
}

/// Tree-guided approximate k-NN. Pops subtrees in lower-bound order,
/// visits leaves (envelopes in disk order), and stops after the first full
/// leaf that fails to improve the best-so-far set. When the next popped
/// bound already reaches bsf[k], the answer is provably exact.
pub fn knn_approx(idx: &UlisseIndex, spec: &QuerySpec) -> Result<ApproxOutcome> {
    let ctx = QueryContext::new(idx, spec)?;
    let k = knn_k(spec)?;
    let mut stats = QueryStats::default();
    let mut best = TopK::new(k);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for node in idx.root.values() {
        heap.push(HeapItem {
            bound: ctx.queue_bound(node)?,
            seq,
            node,
        });
        seq += 1;
    }
    let mut exact = heap.is_empty();
    while let Some(item) = heap.pop() {
        if best.items.len() == k && item.bound >= best.threshold() {
            exact = true;
            break;
        }
        match &item.node.kind {
            NodeKind::Inner { children, .. } => {
                for child in children.iter().flatten() {
                    heap.push(HeapItem {
                        bound: ctx.queue_bound(child)?,
                        seq,
                        node: child,
                    });
                    seq += 1;
                }
            }
            NodeKind::Leaf { entries } => {
                stats.leaves_visited += 1;
                let mut improved = false;
                // Entries are stored ascending = raw-data (disk) order.
                for &pos in entries {
                    let e = &idx.envelope_list[pos];
                    let series_len = ctx.idx.series_len(e.series_id);
                    if !e.covers_length(ctx.qlen(), series_len) {
                        continue;
                    }
                    let lb = ctx.envelope_bound(e)?;
                    if best.items.len() == k && lb > best.threshold() {
                        continue;
                    }
                    if ctx.visit_envelope(e, &mut best, None, None, &mut stats)? {
                        improved = true;
                    }
                }
                if best.items.len() == k && !improved {
                    break;
                }
            }
        }
    }
    if heap.is_empty() {
        // Every subtree was either visited or provably dominated.
        exact = true;
    }
    let padded = best.items.len() < k;
    let bsf = best.items.iter().map(|m| m.distance).collect();
    Ok(ApproxOutcome {
        matches: best.items,
        bsf,
        stats,
        exact,
        padded,
    })
}

/// Exact k-NN: seeds the best-so-far set with the approximate search, then
/// scans the flat envelope list in raw-data order, skipping envelopes whose
/// lower bound exceeds bsf[k].
pub fn knn_exact(idx: &UlisseIndex, spec: &QuerySpec) -> Result<ExactOutcome> {
    let ctx = QueryContext::new(idx, spec)?;
    let k = knn_k(spec)?;
    let seed = knn_approx(idx, spec)?;
    let mut stats = seed.stats;
    // The envelope counters must reflect the exact scan alone.
    stats.envelopes_pruned = 0;
    stats.envelopes_checked = 0;
    let mut best = TopK::new(k);
    // Seed only the pruning threshold: the scan re-finds every true
    // neighbor itself, and inserting the approximate matches here would
    // duplicate them.
    if seed.matches.len() == k {
        best.seed_threshold = seed.matches.last().unwrap().distance;
    }
    for e in &idx.envelope_list {
        let series_len = ctx.idx.series_len(e.series_id);
        if !e.covers_length(ctx.qlen(), series_len) {
            stats.envelopes_pruned += 1;
            continue;
        }
        let lb = ctx.envelope_bound(e)?;
        if best.items.len() == k && lb > best.threshold() {
            stats.envelopes_pruned += 1;
            continue;
        }
        stats.envelopes_checked += 1;
        ctx.visit_envelope(e, &mut best, None, None, &mut stats)?;
    }
    Ok(ExactOutcome {
        matches: best.items,
        stats,
    })
}

/// Epsilon-range search: the exact scan with a fixed threshold and no
/// approximate seeding; returns every subsequence within `epsilon`, in
/// canonical order.
pub fn range_search(idx: &UlisseIndex, spec: &QuerySpec) -> Result<ExactOutcome> {
    let ctx = QueryContext::new(idx, spec)?;
    let eps = match spec.request {
        Request::Range(e) => e,
        Request::Knn(_) => {
            return Err(Error::Argument(
                "range search requires an epsilon request".into(),
            ))
        }
    };
    let mut stats = QueryStats::default();
    let mut matches = Vec::new();
    let mut dummy = TopK::new(1);
    for e in &idx.envelope_list {
        let series_len = ctx.idx.series_len(e.series_id);
        if !e.covers_length(ctx.qlen(), series_len) {
            stats.envelopes_pruned += 1;
            continue;
        }
        let lb = ctx.envelope_bound(e)?;
        if lb > eps {
            stats.envelopes_pruned += 1;
            continue;
        }
        stats.envelopes_checked += 1;
        ctx.visit_envelope(e, &mut dummy, Some(eps), Some(&mut matches), &mut stats)?;
    }
    matches.sort_by(Match::canonical_cmp);
    Ok(ExactOutcome { matches, stats })
}
