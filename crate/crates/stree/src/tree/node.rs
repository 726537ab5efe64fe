//! Internal node representation.
//!
//! Every node carries its own bounding ball and statistics; inner nodes
//! additionally cache a copy of each child's ball and statistics next to
//! the child pointer. The cached copies drive navigation and are refreshed
//! whenever the child changes.

use crate::geometry::{enclosing_ball, quasi_min_ball, Ball};
use crate::point::SparsePoint;
use crate::stats::StatSummary;

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub ball: Ball,
    pub stats: StatSummary,
    pub kind: NodeKind,
}

#[derive(Clone, Debug)]
pub(crate) enum NodeKind {
    Leaf(Vec<SparsePoint>),
    Inner(Vec<Child>),
}

#[derive(Clone, Debug)]
pub(crate) struct Child {
    pub ball: Ball,
    pub stats: StatSummary,
    pub node: Box<Node>,
}

impl Child {
    pub fn from_node(node: Node) -> Self {
        Child {
            ball: node.ball.clone(),
            stats: node.stats.clone(),
            node: Box::new(node),
        }
    }

    /// Re-copies the child's own ball and statistics into the parent cache.
    pub fn refresh(&mut self) {
        self.ball = self.node.ball.clone();
        self.stats = self.node.stats.clone();
    }
}

impl Node {
    /// Leaf rebuilt from scratch: quasi-minimal ball, statistics folded in
    /// point order.
    pub fn leaf_from_points(points: Vec<SparsePoint>) -> Node {
        debug_assert!(!points.is_empty());
        let ball = quasi_min_ball(&points);
        let stats = points.iter().fold(StatSummary::empty(), |s, p| s.include(p));
        Node { ball, stats, kind: NodeKind::Leaf(points) }
    }

    /// Inner node rebuilt from scratch: ball covering every child ball,
    /// statistics merged across children.
    pub fn inner_from_children(children: Vec<Child>) -> Node {
        debug_assert!(!children.is_empty());
        let balls: Vec<Ball> = children.iter().map(|c| c.ball.clone()).collect();
        let ball = enclosing_ball(&balls);
        let stats = children
            .iter()
            .fold(StatSummary::empty(), |s, c| s.merge(&c.stats));
        Node { ball, stats, kind: NodeKind::Inner(children) }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf(_))
    }

    /// Number of direct entries (points or children).
    pub fn entry_count(&self) -> usize {
        match &self.kind {
            NodeKind::Leaf(points) => points.len(),
            NodeKind::Inner(children) => children.len(),
        }
    }

    /// Levels below and including this node; a leaf is height 1.
    pub fn height(&self) -> usize {
        match &self.kind {
            NodeKind::Leaf(_) => 1,
            NodeKind::Inner(children) => 1 + children[0].node.height(),
        }
    }
}
