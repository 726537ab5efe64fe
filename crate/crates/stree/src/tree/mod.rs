//! The ball-bounded hierarchical index.
//!
//! Points go in one at a time; every node on the way down absorbs the point
//! into its statistics and grows its ball if needed, so aggregates are
//! always current without recomputation. Overloaded nodes split bottom-up,
//! keeping all leaves at the same depth. Queries prune whole subtrees by
//! ball distance, so answers stay exact while most of the tree goes
//! unvisited.

mod audit;
mod node;
pub(crate) mod node_io;
mod split;

use std::collections::BinaryHeap;

pub use audit::{AuditReport, Violation};
pub use split::{bipartition_eval, split_bruteforce, split_greedy, SplitEval};

use crate::codec::point_to_bytes;
use crate::error::Error;
use crate::geometry::Ball;
use crate::point::SparsePoint;
use crate::stats::StatSummary;
use node::{Child, Node, NodeKind};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How an overloaded node picks its bipartition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitMode {
    /// Farthest-pair seeding plus margin-guided assignment, O(n^2).
    Greedy,
    /// Exhaustive enumeration of all bipartitions, O(2^n); requires
    /// `capacity < brute_cutoff`.
    BruteForce,
    /// Exhaustive below the cutoff, greedy above.
    Auto,
}

/// Index configuration.
#[derive(Clone, Debug)]
pub struct TreeConfig {
    /// Dimensionality of the space; every point key must be below it.
    pub dim: u32,
    /// Maximum entries per node before a split, at least 4.
    pub capacity: usize,
    pub split_mode: SplitMode,
    /// Largest entry count handed to the exhaustive splitter (hard cap 20).
    pub brute_cutoff: usize,
    /// Relative slack for containment checks: a ball of radius R is deemed
    /// to contain anything within `R + geom_eps * (1 + R)`.
    pub geom_eps: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            dim: 1024,
            capacity: 16,
            split_mode: SplitMode::Auto,
            brute_cutoff: 12,
            geom_eps: 1e-6,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.dim == 0 {
            return Err(Error::Config("dimensionality must be at least 1"));
        }
        if self.capacity < 4 {
            return Err(Error::Config("capacity must be at least 4"));
        }
        if self.brute_cutoff < 2 || self.brute_cutoff > 20 {
            return Err(Error::Config("brute_cutoff must lie in 2..=20"));
        }
        if self.split_mode == SplitMode::BruteForce && self.capacity >= self.brute_cutoff {
            return Err(Error::Config(
                "brute-force splitting requires capacity < brute_cutoff",
            ));
        }
        if !(self.geom_eps > 0.0 && self.geom_eps.is_finite()) {
            return Err(Error::Config("geom_eps must be positive and finite"));
        }
        Ok(())
    }
}

/// What a single insertion did.
#[derive(Clone, Copy, Debug, Default)]
pub struct InsertReport {
    /// Incremental statistics updates along the root-to-leaf path — one per
    /// level, never more, which is the whole point of keeping aggregates
    /// incremental.
    pub path_stat_updates: usize,
    /// Node splits triggered by this insertion.
    pub splits: usize,
}

/// Work counters for a query.
#[derive(Clone, Copy, Debug, Default)]
pub struct QueryStats {
    /// Nodes actually entered, root included.
    pub nodes_visited: usize,
    /// Subtrees skipped because their ball could not beat the current bound.
    pub subtrees_pruned: usize,
}

impl QueryStats {
    /// Fraction of descend-or-skip decisions that skipped.
    pub fn pruned_fraction(&self) -> f64 {
        let decisions = self.nodes_visited.saturating_sub(1) + self.subtrees_pruned;
        if decisions == 0 {
            0.0
        } else {
            self.subtrees_pruned as f64 / decisions as f64
        }
    }
}

/// One cluster as seen while browsing: its bounding ball and aggregates.
#[derive(Clone, Debug)]
pub struct ClusterSummary {
    pub ball: Ball,
    pub stats: StatSummary,
}

/// Read-only view of one node, handed to [`Tree::visit`] callbacks in
/// pre-order.
pub struct NodeView<'a> {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub ball: &'a Ball,
    pub stats: &'a StatSummary,
    /// Present for leaves only.
    pub points: Option<&'a [SparsePoint]>,
}

/// The index. One writer or any number of readers at a time; no interior
/// mutability.
pub struct Tree {
    config: TreeConfig,
    root: Option<Node>,
}

impl Tree {
    pub fn new(config: TreeConfig) -> Result<Self, Error> {
        config.validate()?;
        Ok(Tree { config, root: None })
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    /// Number of stored points.
    pub fn len(&self) -> u64 {
        self.root.as_ref().map_or(0, |n| n.stats.n())
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Number of levels: 0 when empty, 1 for a lone leaf.
    pub fn height(&self) -> usize {
        self.root.as_ref().map_or(0, Node::height)
    }

    /// Root-level aggregate over every stored point.
    pub fn stats(&self) -> StatSummary {
        self.root
            .as_ref()
            .map_or_else(StatSummary::empty, |n| n.stats.clone())
    }

    /// Inserts one point, updating statistics and balls along the path and
    /// splitting overloaded nodes bottom-up.
    pub fn insert(&mut self, p: SparsePoint) -> Result<InsertReport, Error> {
        if let Some(k) = p.max_key() {
            if k >= self.config.dim {
                return Err(Error::DimensionExceeded { key: k, dim: self.config.dim });
            }
        }
        let mut report = InsertReport::default();
        match self.root.take() {
            None => {
                report.path_stat_updates = 1;
                self.root = Some(Node {
                    ball: Ball::around_point(&p),
                    stats: StatSummary::of_point(&p),
                    kind: NodeKind::Leaf(vec![p]),
                });
            }
            Some(root) => match insert_rec(root, &p, &self.config, &mut report) {
                Inserted::Intact(n) => self.root = Some(n),
                Inserted::Split(a, b) => {
                    self.root = Some(Node::inner_from_children(vec![
                        Child::from_node(a),
                        Child::from_node(b),
                    ]));
                }
            },
        }
        Ok(report)
    }

    /// The `k` nearest stored points, ascending by distance, distance ties
    /// broken by serialized byte order. Exactly matches a linear scan.
    pub fn knn(&self, q: &SparsePoint, k: usize) -> Vec<(&SparsePoint, f64)> {
        self.knn_with_stats(q, k).0
    }

    pub fn knn_with_stats(
        &self,
        q: &SparsePoint,
        k: usize,
    ) -> (Vec<(&SparsePoint, f64)>, QueryStats) {
        let mut stats = QueryStats::default();
        let mut heap: BinaryHeap<Candidate<'_>> = BinaryHeap::new();
        if k > 0 {
            if let Some(root) = &self.root {
                stats.nodes_visited += 1;
                knn_rec(root, q, k, &mut heap, &mut stats);
            }
        }
        let hits = heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| (c.point, c.dist))
            .collect();
        (hits, stats)
    }

    /// Runs many nearest-neighbor queries; read-only, so the batch fans out
    /// across threads when the `parallel` feature is on.
    pub fn knn_batch(&self, queries: &[SparsePoint], k: usize) -> Vec<Vec<(&SparsePoint, f64)>> {
        #[cfg(feature = "parallel")]
        {
            queries.par_iter().map(|q| self.knn(q, k)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            queries.iter().map(|q| self.knn(q, k)).collect()
        }
    }

    /// All stored points within `r` of `q`, sorted by distance then byte
    /// order. Exactly matches a linear scan.
    pub fn query_ball(&self, q: &SparsePoint, r: f64) -> Vec<(&SparsePoint, f64)> {
        self.query_ball_with_stats(q, r).0
    }

    pub fn query_ball_with_stats(
        &self,
        q: &SparsePoint,
        r: f64,
    ) -> (Vec<(&SparsePoint, f64)>, QueryStats) {
        let mut stats = QueryStats::default();
        let mut hits: Vec<(&SparsePoint, f64)> = Vec::new();
        if let Some(root) = &self.root {
            stats.nodes_visited += 1;
            range_rec(root, q, r, &mut hits, &mut stats);
        }
        hits.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .expect("distances are never NaN")
                .then_with(|| point_to_bytes(a.0).cmp(&point_to_bytes(b.0)))
        });
        (hits, stats)
    }

    /// Child summaries of the node reached by following the sub-node
    /// selection rule for `depth` levels from the root. Depth 0 lists the
    /// root's children; the deepest valid level lists the points of one
    /// leaf as degenerate clusters.
    pub fn browse(&self, q: &SparsePoint, depth: usize) -> Result<Vec<ClusterSummary>, Error> {
        let Some(root) = &self.root else {
            return Ok(Vec::new());
        };
        let height = self.height();
        if depth >= height {
            return Err(Error::BrowseDepth { depth, height });
        }
        let mut node = root;
        for _ in 0..depth {
            match &node.kind {
                NodeKind::Inner(children) => {
                    let idx = select_among(q, children.iter().map(|c| &c.ball));
                    node = &children[idx].node;
                }
                NodeKind::Leaf(_) => break,
            }
        }
        Ok(match &node.kind {
            NodeKind::Inner(children) => children
                .iter()
                .map(|c| ClusterSummary { ball: c.ball.clone(), stats: c.stats.clone() })
                .collect(),
            NodeKind::Leaf(points) => points
                .iter()
                .map(|p| ClusterSummary {
                    ball: Ball::around_point(p),
                    stats: StatSummary::of_point(p),
                })
                .collect(),
        })
    }

    /// Removes every point within `r` of `q` and returns how many went.
    /// Subtrees wholly inside the deletion ball drop in one piece with a
    /// single merge-inverse on each ancestor's statistics; emptied nodes
    /// disappear, underfull ones stay.
    pub fn delete_ball(&mut self, q: &SparsePoint, r: f64) -> u64 {
        let Some(root) = self.root.take() else {
            return 0;
        };
        let (kept, removed) = delete_rec(root, q, r);
        self.root = kept;
        removed.n()
    }

    /// Verifies every structural invariant and returns the violations.
    pub fn audit(&self) -> AuditReport {
        audit::audit_tree(self)
    }

    /// Walks every node in pre-order.
    pub fn visit<F>(&self, mut f: F)
    where
        F: FnMut(NodeView<'_>),
    {
        fn rec<'a, F: FnMut(NodeView<'a>)>(
            node: &'a Node,
            parent: Option<usize>,
            depth: usize,
            next_id: &mut usize,
            f: &mut F,
        ) {
            let id = *next_id;
            *next_id += 1;
            f(NodeView {
                id,
                parent,
                depth,
                ball: &node.ball,
                stats: &node.stats,
                points: match &node.kind {
                    NodeKind::Leaf(points) => Some(points),
                    NodeKind::Inner(_) => None,
                },
            });
            if let NodeKind::Inner(children) = &node.kind {
                for c in children {
                    rec(&c.node, Some(id), depth + 1, next_id, f);
                }
            }
        }
        if let Some(root) = &self.root {
            let mut next_id = 0;
            rec(root, None, 0, &mut next_id, &mut f);
        }
    }

    pub(crate) fn root(&self) -> Option<&Node> {
        self.root.as_ref()
    }

    pub(crate) fn set_root(&mut self, root: Option<Node>) {
        self.root = root;
    }

    #[cfg(test)]
    pub(crate) fn root_mut(&mut self) -> Option<&mut Node> {
        self.root.as_mut()
    }
}

/// Picks the child to receive a new point: any ball already holding the
/// point wins (several holders are ordered by the border-plane rule, which
/// reduces to comparing `|c - q|^2 - r^2`); otherwise the child whose ball
/// grows least, scored by `4*r*gap + gap^2`. Ties fall to the smaller
/// resulting radius, then the lower index.
pub fn select_subnode(q: &SparsePoint, balls: &[Ball]) -> usize {
    select_among(q, balls.iter())
}

fn select_among<'a>(q: &SparsePoint, balls: impl Iterator<Item = &'a Ball>) -> usize {
    let mut inside_best: Option<(f64, f64, usize)> = None;
    let mut outside_best: Option<(f64, f64, usize)> = None;
    for (i, b) in balls.enumerate() {
        let dist = b.center().dist(q);
        let gap = dist - b.radius();
        if gap <= 0.0 {
            let power = dist * dist - b.radius() * b.radius();
            let key = (power, b.radius());
            if inside_best.map_or(true, |(p, r, _)| key < (p, r)) {
                inside_best = Some((key.0, key.1, i));
            }
        } else if inside_best.is_none() {
            let score = 4.0 * b.radius() * gap + gap * gap;
            let new_radius = b.radius() + gap / 2.0;
            let key = (score, new_radius);
            if outside_best.map_or(true, |(s, r, _)| key < (s, r)) {
                outside_best = Some((key.0, key.1, i));
            }
        }
    }
    inside_best
        .or(outside_best)
        .expect("select_subnode requires at least one child")
        .2
}

enum Inserted {
    Intact(Node),
    Split(Node, Node),
}

fn insert_rec(node: Node, p: &SparsePoint, cfg: &TreeConfig, report: &mut InsertReport) -> Inserted {
    let Node { ball, stats, kind } = node;
    let stats = stats.include(p);
    report.path_stat_updates += 1;
    let ball = ball.expanded_to(p);
    match kind {
        NodeKind::Leaf(mut points) => {
            points.push(p.clone());
            if points.len() > cfg.capacity {
                report.splits += 1;
                let (a, b) = split::split_leaf_points(points, cfg);
                Inserted::Split(a, b)
            } else {
                Inserted::Intact(Node { ball, stats, kind: NodeKind::Leaf(points) })
            }
        }
        NodeKind::Inner(mut children) => {
            let idx = select_among(p, children.iter().map(|c| &c.ball));
            let child = children.remove(idx);
            match insert_rec(*child.node, p, cfg, report) {
                Inserted::Intact(n) => {
                    children.insert(idx, Child::from_node(n));
                    Inserted::Intact(Node { ball, stats, kind: NodeKind::Inner(children) })
                }
                Inserted::Split(a, b) => {
                    children.insert(idx, Child::from_node(a));
                    children.insert(idx + 1, Child::from_node(b));
                    if children.len() > cfg.capacity {
                        report.splits += 1;
                        let (l, r) = split::split_inner_children(children, cfg);
                        Inserted::Split(l, r)
                    } else {
                        Inserted::Intact(Node { ball, stats, kind: NodeKind::Inner(children) })
                    }
                }
            }
        }
    }
}

struct Candidate<'a> {
    dist: f64,
    key: Vec<u8>,
    point: &'a SparsePoint,
}

impl Candidate<'_> {
    fn beats(&self, other: &Self) -> bool {
        self.dist < other.dist || (self.dist == other.dist && self.key < other.key)
    }
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.key == other.key
    }
}
impl Eq for Candidate<'_> {}
impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .partial_cmp(&other.dist)
            .expect("distances are never NaN")
            .then_with(|| self.key.cmp(&other.key))
    }
}

fn knn_rec<'a>(
    node: &'a Node,
    q: &SparsePoint,
    k: usize,
    heap: &mut BinaryHeap<Candidate<'a>>,
    stats: &mut QueryStats,
) {
    match &node.kind {
        NodeKind::Leaf(points) => {
            for p in points {
                let dist = p.dist(q);
                if heap.len() < k {
                    heap.push(Candidate { dist, key: point_to_bytes(p), point: p });
                    continue;
                }
                if dist > heap.peek().expect("heap is full").dist {
                    continue;
                }
                let cand = Candidate { dist, key: point_to_bytes(p), point: p };
                let replaces = cand.beats(heap.peek().expect("heap is full"));
                if replaces {
                    heap.pop();
                    heap.push(cand);
                }
            }
        }
        NodeKind::Inner(children) => {
            let mut order: Vec<(f64, usize)> = children
                .iter()
                .enumerate()
                .map(|(i, c)| (c.ball.distance_to(q), i))
                .collect();
            order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN").then(a.1.cmp(&b.1)));
            for (pos, &(d, i)) in order.iter().enumerate() {
                // The bound tightens as children are visited, so recheck.
                if heap.len() == k && d > heap.peek().expect("heap is full").dist {
                    stats.subtrees_pruned += order.len() - pos;
                    break;
                }
                stats.nodes_visited += 1;
                knn_rec(&children[i].node, q, k, heap, stats);
            }
        }
    }
}

fn range_rec<'a>(
    node: &'a Node,
    q: &SparsePoint,
    r: f64,
    hits: &mut Vec<(&'a SparsePoint, f64)>,
    stats: &mut QueryStats,
) {
    match &node.kind {
        NodeKind::Leaf(points) => {
            for p in points {
                let dist = p.dist(q);
                if dist <= r {
                    hits.push((p, dist));
                }
            }
        }
        NodeKind::Inner(children) => {
            for c in children {
                if c.ball.distance_to(q) > r {
                    stats.subtrees_pruned += 1;
                } else {
                    stats.nodes_visited += 1;
                    range_rec(&c.node, q, r, hits, stats);
                }
            }
        }
    }
}

fn delete_rec(node: Node, q: &SparsePoint, r: f64) -> (Option<Node>, StatSummary) {
    if node.ball.distance_to(q) > r {
        return (Some(node), StatSummary::empty());
    }
    if node.ball.center().dist(q) + node.ball.radius() <= r {
        let removed = node.stats;
        return (None, removed);
    }
    let Node { ball, stats, kind } = node;
    match kind {
        NodeKind::Leaf(points) => {
            let mut kept = Vec::with_capacity(points.len());
            let mut removed = StatSummary::empty();
            for p in points {
                if p.dist(q) <= r {
                    removed = removed.include(&p);
                } else {
                    kept.push(p);
                }
            }
            if kept.is_empty() {
                return (None, stats);
            }
            if removed.n() == 0 {
                return (Some(Node { ball, stats, kind: NodeKind::Leaf(kept) }), removed);
            }
            let stats = stats.unmerge(&removed).expect("leaf stats cover its points");
            (Some(Node { ball, stats, kind: NodeKind::Leaf(kept) }), removed)
        }
        NodeKind::Inner(children) => {
            let mut kept_children = Vec::with_capacity(children.len());
            let mut removed = StatSummary::empty();
            for mut child in children {
                let (kept, sub) = delete_rec(*child.node, q, r);
                if sub.n() > 0 {
                    removed = removed.merge(&sub);
                }
                if let Some(n) = kept {
                    child.node = Box::new(n);
                    child.refresh();
                    kept_children.push(child);
                }
            }
            if kept_children.is_empty() {
                return (None, stats);
            }
            if removed.n() == 0 {
                return (
                    Some(Node { ball, stats, kind: NodeKind::Inner(kept_children) }),
                    removed,
                );
            }
            let stats = stats.unmerge(&removed).expect("inner stats cover its subtree");
            (
                Some(Node { ball, stats, kind: NodeKind::Inner(kept_children) }),
                removed,
            )
        }
    }
}
