//! Inpainting order over the classes that need filling.
//!
//! The order maximizes the total weight of graph edges pointing forward
//! (earlier class -> later class), solved exactly by dynamic programming
//! over subsets; nine classes give at most 512 states. When several orders
//! reach the optimum, the one that is lexicographically smallest under the
//! key (descending net dominance, ascending class id) wins. Net dominance of
//! a class is the weight of its outgoing restricted edges minus the weight of
//! its incoming ones, so on a consistent graph this is a plain walk from the
//! brightest class down.

use super::OrderedSemanticGraph;
use crate::masking::SemanticClass;

/// Edge weights restricted to `nodes`, plus the net dominance of each node.
pub(crate) fn restricted(
    g: &OrderedSemanticGraph,
    nodes: &[SemanticClass],
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = nodes.len();
    let mut w = vec![vec![0.0; n]; n];
    let index = |c: SemanticClass| nodes.iter().position(|&x| x == c);
    for e in g.edges() {
        if let (Some(i), Some(j)) = (index(e.from), index(e.to)) {
            w[i][j] = e.weight;
        }
    }
    let score = (0..n)
        .map(|i| (0..n).map(|j| w[i][j] - w[j][i]).sum())
        .collect();
    (w, score)
}

/// Tolerance for treating two order totals as equal.
pub(crate) fn tie_epsilon(w: &[Vec<f64>]) -> f64 {
    1e-9 * (1.0 + w.iter().flatten().sum::<f64>())
}

pub fn inpaint_order(g: &OrderedSemanticGraph, present: &[SemanticClass]) -> Vec<SemanticClass> {
    let mut nodes: Vec<SemanticClass> = present.to_vec();
    nodes.sort();
    nodes.dedup();
    let n = nodes.len();
    if n <= 1 {
        return nodes;
    }
    let (w, score) = restricted(g, &nodes);
    let eps = tie_epsilon(&w);

    // gain of placing v before every node of `rest`
    let gain = |v: usize, rest: usize| -> f64 {
        (0..n).filter(|&u| rest & (1 << u) != 0).map(|u| w[v][u]).sum()
    };
    let full = (1usize << n) - 1;
    let mut best = vec![0.0f64; 1 << n];
    for set in 1..=full {
        best[set] = (0..n)
            .filter(|&v| set & (1 << v) != 0)
            .map(|v| {
                let rest = set & !(1 << v);
                gain(v, rest) + best[rest]
            })
            .fold(f64::NEG_INFINITY, f64::max);
    }

    let key = |v: usize| (-score[v], nodes[v].id());
    let mut order = Vec::with_capacity(n);
    let mut remaining = full;
    while remaining != 0 {
        let v = (0..n)
            .filter(|&v| remaining & (1 << v) != 0)
            .filter(|&v| {
                let rest = remaining & !(1 << v);
                gain(v, rest) + best[rest] >= best[remaining] - eps
            })
            .min_by(|&a, &b| {
                let (sa, ia) = key(a);
                let (sb, ib) = key(b);
                sa.total_cmp(&sb).then(ia.cmp(&ib))
            })
            .expect("some node attains the optimum");
        order.push(nodes[v]);
        remaining &= !(1 << v);
    }
    order
}
