//! Full structural verification: containment, balance, counts, statistics
//! against batch recomputation, and parent-cache coherence.

use std::collections::BTreeMap;
use std::fmt;

use crate::point::SparsePoint;
use crate::tree::node::{Node, NodeKind};
use crate::tree::Tree;

/// Statistics must match a from-scratch recomputation this tightly.
const STATS_REL_TOL: f64 = 1e-5;
/// Variance may dip below zero by at most this fraction of its scale.
const VARIANCE_REL_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub enum Violation {
    EntryCountOutOfRange { node: usize, count: usize, capacity: usize },
    UnevenLeafDepth { node: usize, depth: usize, expected: usize },
    PointOutsideBall { node: usize, dist: f64, allowed: f64 },
    BadRadius { node: usize, radius: f64 },
    CountMismatch { node: usize, recorded: u64, actual: u64 },
    MeanDrift { node: usize, dist: f64, allowed: f64 },
    SumsqDrift { node: usize, recorded: f64, actual: f64 },
    NegativeVariance { node: usize, variance: f64 },
    StaleChildBall { node: usize, child: usize },
    StaleChildStats { node: usize, child: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EntryCountOutOfRange { node, count, capacity } => {
                write!(f, "node {node}: {count} entries outside 1..={capacity}")
            }
            Violation::UnevenLeafDepth { node, depth, expected } => {
                write!(f, "node {node}: leaf at depth {depth}, expected {expected}")
            }
            Violation::PointOutsideBall { node, dist, allowed } => {
                write!(f, "node {node}: point at distance {dist} exceeds allowed {allowed}")
            }
            Violation::BadRadius { node, radius } => {
                write!(f, "node {node}: invalid radius {radius}")
            }
            Violation::CountMismatch { node, recorded, actual } => {
                write!(f, "node {node}: records {recorded} points, holds {actual}")
            }
            Violation::MeanDrift { node, dist, allowed } => {
                write!(f, "node {node}: mean off batch value by {dist} (allowed {allowed})")
            }
            Violation::SumsqDrift { node, recorded, actual } => {
                write!(f, "node {node}: sumsq {recorded} vs batch {actual}")
            }
            Violation::NegativeVariance { node, variance } => {
                write!(f, "node {node}: variance {variance} below tolerance")
            }
            Violation::StaleChildBall { node, child } => {
                write!(f, "node {node}: cached ball for child {child} is stale")
            }
            Violation::StaleChildStats { node, child } => {
                write!(f, "node {node}: cached stats for child {child} are stale")
            }
        }
    }
}

#[derive(Debug, Default)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
    pub nodes_checked: usize,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        write!(f, "{} violations", self.violations.len())
    }
}

pub(crate) fn audit_tree(tree: &Tree) -> AuditReport {
    let mut report = AuditReport::default();
    let Some(root) = tree.root() else {
        return report;
    };
    let leaf_depth = first_leaf_depth(root);
    let mut walker = Walker {
        report: &mut report,
        capacity: tree.config().capacity,
        geom_eps: tree.config().geom_eps,
        leaf_depth,
        next_id: 0,
    };
    walker.check(root, 0);
    report
}

struct Walker<'a> {
    report: &'a mut AuditReport,
    capacity: usize,
    geom_eps: f64,
    leaf_depth: usize,
    next_id: usize,
}

impl Walker<'_> {
    /// Checks one node and returns the points of its subtree.
    fn check<'n>(&mut self, node: &'n Node, depth: usize) -> Vec<&'n SparsePoint> {
        let id = self.next_id;
        self.next_id += 1;
        self.report.nodes_checked += 1;

        let count = node.entry_count();
        if count == 0 || count > self.capacity {
            self.report.violations.push(Violation::EntryCountOutOfRange {
                node: id,
                count,
                capacity: self.capacity,
            });
        }
        if !node.ball.radius().is_finite() || node.ball.radius() < 0.0 {
            self.report
                .violations
                .push(Violation::BadRadius { node: id, radius: node.ball.radius() });
        }

        let points: Vec<&'n SparsePoint> = match &node.kind {
            NodeKind::Leaf(points) => {
                if depth != self.leaf_depth {
                    self.report.violations.push(Violation::UnevenLeafDepth {
                        node: id,
                        depth,
                        expected: self.leaf_depth,
                    });
                }
                points.iter().collect()
            }
            NodeKind::Inner(children) => {
                let mut all = Vec::new();
                for (ci, child) in children.iter().enumerate() {
                    if child.ball != child.node.ball {
                        self.report
                            .violations
                            .push(Violation::StaleChildBall { node: id, child: ci });
                    }
                    if child.stats != child.node.stats {
                        self.report
                            .violations
                            .push(Violation::StaleChildStats { node: id, child: ci });
                    }
                    all.extend(self.check(&child.node, depth + 1));
                }
                all
            }
        };

        // Containment within the slackened radius.
        let allowed = node.ball.radius() + self.geom_eps * (1.0 + node.ball.radius());
        for p in &points {
            let dist = node.ball.center().dist(*p);
            if dist > allowed {
                self.report
                    .violations
                    .push(Violation::PointOutsideBall { node: id, dist, allowed });
                break;
            }
        }

        // Exact count, then statistics against batch recomputation.
        if node.stats.n() != points.len() as u64 {
            self.report.violations.push(Violation::CountMismatch {
                node: id,
                recorded: node.stats.n(),
                actual: points.len() as u64,
            });
        } else if !points.is_empty() {
            let n = points.len() as f64;
            let mut sums: BTreeMap<u32, f64> = BTreeMap::new();
            let mut sumsq = 0.0;
            for p in &points {
                for (k, v) in p.iter() {
                    *sums.entry(k).or_insert(0.0) += f64::from(v);
                }
                sumsq += p.norm2();
            }
            let mut mean_norm2 = 0.0;
            let mut drift2 = 0.0;
            for (&k, &s) in &sums {
                let m = s / n;
                mean_norm2 += m * m;
                let d = node.stats.mean().get(k) - m;
                drift2 += d * d;
            }
            for (k, v) in node.stats.mean().iter() {
                if !sums.contains_key(&k) {
                    drift2 += v * v;
                }
            }
            let allowed = STATS_REL_TOL * (1.0 + mean_norm2.sqrt());
            if drift2.sqrt() > allowed {
                self.report.violations.push(Violation::MeanDrift {
                    node: id,
                    dist: drift2.sqrt(),
                    allowed,
                });
            }
            if (node.stats.sumsq() - sumsq).abs() > STATS_REL_TOL * (1.0 + sumsq.abs()) {
                self.report.violations.push(Violation::SumsqDrift {
                    node: id,
                    recorded: node.stats.sumsq(),
                    actual: sumsq,
                });
            }
            let scale = node.stats.sumsq() / n;
            let variance = scale - node.stats.mean().norm2();
            if variance < -VARIANCE_REL_TOL * scale.abs() {
                self.report
                    .violations
                    .push(Violation::NegativeVariance { node: id, variance });
            }
        }
        points
    }
}

fn first_leaf_depth(node: &Node) -> usize {
    match &node.kind {
        NodeKind::Leaf(_) => 0,
        NodeKind::Inner(children) => 1 + first_leaf_depth(&children[0].node),
    }
}
