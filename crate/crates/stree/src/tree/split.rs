//! Node splitting: greedy and exhaustive bipartitioning of overloaded
//! entries, plus the recursive redistribution of children across the border
//! plane that a split introduces.
//!
//! Entries are handled uniformly as balls — a point is a zero-radius ball —
//! so the same machinery splits leaves and inner nodes.

use crate::error::Error;
use crate::geometry::{
    enclosing_ball, farthest_ball_pair, overlap_margin, Ball, BorderPlane, PlaneSide,
};
use crate::point::SparsePoint;
use crate::tree::node::{Child, Node, NodeKind};
use crate::tree::TreeConfig;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Objective figures for a candidate bipartition: the sum of squared
/// enclosing-ball radii (minimized) and the overlap margin between the two
/// enclosing balls (maximized on ties).
#[derive(Clone, Copy, Debug)]
pub struct SplitEval {
    pub objective: f64,
    pub margin: f64,
}

/// Evaluates a bipartition of `balls` given the two index sets.
pub fn bipartition_eval(balls: &[Ball], left: &[usize], right: &[usize]) -> SplitEval {
    let gather = |idx: &[usize]| -> Vec<Ball> { idx.iter().map(|&i| balls[i].clone()).collect() };
    let left_ball = enclosing_ball(&gather(left));
    let right_ball = enclosing_ball(&gather(right));
    SplitEval {
        objective: left_ball.radius() * left_ball.radius()
            + right_ball.radius() * right_ball.radius(),
        margin: overlap_margin(&left_ball, &right_ball),
    }
}

/// Greedy split: the farthest pair seeds the two groups, then each
/// remaining entry — always the one currently farthest from the nearer
/// group ball — joins whichever side keeps the two group balls best
/// separated. Ties fall to the smaller combined radius, then to the first
/// group. O(n^2) overall.
///
/// Returns ascending index lists; the seeds always land on opposite sides
/// and both sides are non-empty.
pub fn split_greedy(balls: &[Ball]) -> Result<(Vec<usize>, Vec<usize>), Error> {
    let n = balls.len();
    if n < 2 {
        return Err(Error::SplitTooFew);
    }
    let (seed_a, seed_b) = farthest_ball_pair(balls);
    let mut left = vec![seed_a];
    let mut right = vec![seed_b];
    let mut left_ball = balls[seed_a].clone();
    let mut right_ball = balls[seed_b].clone();
    let mut remaining: Vec<usize> = (0..n).filter(|&i| i != seed_a && i != seed_b).collect();

    while !remaining.is_empty() {
        // Farthest-from-nearer-group first, recomputed as the groups grow.
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &i)| {
                let d = balls[i]
                    .center()
                    .dist(left_ball.center())
                    .min(balls[i].center().dist(right_ball.center()));
                (pos, d)
            })
            .fold((0usize, f64::NEG_INFINITY), |best, cand| {
                if cand.1 > best.1 {
                    cand
                } else {
                    best
                }
            });
        let i = remaining.swap_remove(pos);

        let grown_left = left_ball.expanded_to_cover(&balls[i]);
        let grown_right = right_ball.expanded_to_cover(&balls[i]);
        let margin_left = overlap_margin(&grown_left, &right_ball);
        let margin_right = overlap_margin(&left_ball, &grown_right);
        let take_left = if margin_left != margin_right {
            margin_left > margin_right
        } else {
            grown_left.radius() + right_ball.radius()
                <= left_ball.radius() + grown_right.radius()
        };
        if take_left {
            left.push(i);
            left_ball = grown_left;
        } else {
            right.push(i);
            right_ball = grown_right;
        }
    }
    left.sort_unstable();
    right.sort_unstable();
    Ok((left, right))
}

/// Exhaustive split: walks every proper bipartition (2^(n-1) - 1 of them,
/// entry 0 pinned to the left side), discards the ones that put the
/// farthest pair on the same side — a half holding both can never get its
/// radius under half their distance — and keeps the best of the rest:
/// smallest radius objective, ties broken by the larger overlap margin,
/// then by enumeration order.
pub fn split_bruteforce(balls: &[Ball], cutoff: usize) -> Result<(Vec<usize>, Vec<usize>), Error> {
    let n = balls.len();
    if n < 2 {
        return Err(Error::SplitTooFew);
    }
    if n > cutoff {
        return Err(Error::SplitTooLarge { n, cutoff });
    }

    let (far_a, far_b) = farthest_ball_pair(balls);
    // Bit i of a mask puts entry i+1 on the left; entry 0 is always left.
    let on_left = |mask: u64, i: usize| i == 0 || mask >> (i - 1) & 1 == 1;

    let full: u64 = (1 << (n - 1)) - 1;
    let eval_mask = |mask: u64| -> (f64, f64, u64) {
        if on_left(mask, far_a) == on_left(mask, far_b) {
            return (f64::INFINITY, f64::INFINITY, mask);
        }
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        for i in 0..n {
            if on_left(mask, i) {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        let eval = bipartition_eval(balls, &left, &right);
        (eval.objective, -eval.margin, mask)
    };

    let better = |a: (f64, f64, u64), b: (f64, f64, u64)| -> (f64, f64, u64) {
        if (a.0, a.1, a.2) < (b.0, b.1, b.2) {
            a
        } else {
            b
        }
    };

    #[cfg(feature = "parallel")]
    let best = (0..full)
        .into_par_iter()
        .map(eval_mask)
        .reduce(|| (f64::INFINITY, f64::INFINITY, u64::MAX), better);
    #[cfg(not(feature = "parallel"))]
    let best = (0..full)
        .map(eval_mask)
        .fold((f64::INFINITY, f64::INFINITY, u64::MAX), better);

    let mask = best.2;
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for i in 0..n {
        if on_left(mask, i) {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    Ok((left, right))
}

/// Picks the split algorithm for an overloaded node of `n` entries.
pub(crate) fn run_split(
    balls: &[Ball],
    config: &TreeConfig,
) -> Result<(Vec<usize>, Vec<usize>), Error> {
    match config.split_mode {
        crate::tree::SplitMode::Greedy => split_greedy(balls),
        crate::tree::SplitMode::BruteForce => split_bruteforce(balls, config.brute_cutoff),
        crate::tree::SplitMode::Auto => {
            if balls.len() <= config.brute_cutoff {
                split_bruteforce(balls, config.brute_cutoff)
            } else {
                split_greedy(balls)
            }
        }
    }
}

/// Splits an overloaded leaf's points into two fresh leaves.
pub(crate) fn split_leaf_points(points: Vec<SparsePoint>, config: &TreeConfig) -> (Node, Node) {
    let balls: Vec<Ball> = points.iter().map(Ball::around_point).collect();
    let (left_idx, right_idx) =
        run_split(&balls, config).expect("overloaded leaf always has two entries");
    let take = |idx: &[usize]| -> Vec<SparsePoint> { idx.iter().map(|&i| points[i].clone()).collect() };
    (
        Node::leaf_from_points(take(&left_idx)),
        Node::leaf_from_points(take(&right_idx)),
    )
}

/// Splits an overloaded inner node.
///
/// The children are first grouped as whole entries to fix the two new
/// cluster balls; the border plane between those balls then redistributes
/// the children, recursively splitting any child whose ball straddles the
/// plane. If the plane degenerates, empties a side, or overfills one, the
/// whole-entry grouping stands as-is.
pub(crate) fn split_inner_children(children: Vec<Child>, config: &TreeConfig) -> (Node, Node) {
    let balls: Vec<Ball> = children.iter().map(|c| c.ball.clone()).collect();
    let (left_idx, right_idx) =
        run_split(&balls, config).expect("overloaded inner node always has two entries");

    let gather = |idx: &[usize]| -> Vec<Ball> { idx.iter().map(|&i| balls[i].clone()).collect() };
    let b1 = enclosing_ball(&gather(&left_idx));
    let b2 = enclosing_ball(&gather(&right_idx));

    let plane = match BorderPlane::new(&b1, &b2) {
        Ok(p) => p,
        Err(_) => return group_assign(children, &left_idx),
    };

    // Classify every child against the plane; split straddlers on clones so
    // the grouped fallback stays available.
    let mut placement: Vec<Placement> = Vec::with_capacity(children.len());
    for child in &children {
        match plane.classify_ball(&child.ball) {
            PlaneSide::First => placement.push(Placement::First),
            PlaneSide::Second => placement.push(Placement::Second),
            PlaneSide::Straddling => {
                let (h1, h2) = plane_split_node(child.node.as_ref().clone(), &plane);
                placement.push(Placement::Split(h1, h2));
            }
        }
    }

    let mut n1 = 0usize;
    let mut n2 = 0usize;
    for p in &placement {
        match p {
            Placement::First => n1 += 1,
            Placement::Second => n2 += 1,
            Placement::Split(h1, h2) => {
                n1 += usize::from(h1.is_some());
                n2 += usize::from(h2.is_some());
            }
        }
    }
    if n1 == 0 || n2 == 0 || n1 > config.capacity || n2 > config.capacity {
        return group_assign(children, &left_idx);
    }

    let mut side1 = Vec::with_capacity(n1);
    let mut side2 = Vec::with_capacity(n2);
    for (child, p) in children.into_iter().zip(placement) {
        match p {
            Placement::First => side1.push(child),
            Placement::Second => side2.push(child),
            Placement::Split(h1, h2) => {
                if let Some(h) = h1 {
                    side1.push(Child::from_node(h));
                }
                if let Some(h) = h2 {
                    side2.push(Child::from_node(h));
                }
            }
        }
    }
    (
        Node::inner_from_children(side1),
        Node::inner_from_children(side2),
    )
}

enum Placement {
    First,
    Second,
    Split(Option<Node>, Option<Node>),
}

fn group_assign(children: Vec<Child>, left_idx: &[usize]) -> (Node, Node) {
    let mut side1 = Vec::new();
    let mut side2 = Vec::new();
    let mut next_left = left_idx.iter().peekable();
    for (i, child) in children.into_iter().enumerate() {
        if next_left.peek() == Some(&&i) {
            next_left.next();
            side1.push(child);
        } else {
            side2.push(child);
        }
    }
    (
        Node::inner_from_children(side1),
        Node::inner_from_children(side2),
    )
}

/// Recursively splits a subtree by a border plane. Leaves partition their
/// points by plane side (the plane itself counts as the first side); inner
/// nodes classify each child's ball, recursing on straddlers. Empty halves
/// come back as `None`; non-empty halves keep the subtree's height, so leaf
/// depths stay uniform.
pub(crate) fn plane_split_node(node: Node, plane: &BorderPlane<'_>) -> (Option<Node>, Option<Node>) {
    match node.kind {
        NodeKind::Leaf(points) => {
            let mut first = Vec::new();
            let mut second = Vec::new();
            for p in points {
                if plane.value(&p) <= 0.0 {
                    first.push(p);
                } else {
                    second.push(p);
                }
            }
            (
                (!first.is_empty()).then(|| Node::leaf_from_points(first)),
                (!second.is_empty()).then(|| Node::leaf_from_points(second)),
            )
        }
        NodeKind::Inner(children) => {
            let mut first = Vec::new();
            let mut second = Vec::new();
            for child in children {
                match plane.classify_ball(&child.ball) {
                    PlaneSide::First => first.push(child),
                    PlaneSide::Second => second.push(child),
                    PlaneSide::Straddling => {
                        let (h1, h2) = plane_split_node(*child.node, plane);
                        if let Some(h) = h1 {
                            first.push(Child::from_node(h));
                        }
                        if let Some(h) = h2 {
                            second.push(Child::from_node(h));
                        }
                    }
                }
            }
            (
                (!first.is_empty()).then(|| Node::inner_from_children(first)),
                (!second.is_empty()).then(|| Node::inner_from_children(second)),
            )
        }
    }
}
