use serde::{Deserialize, Serialize};

use crate::trace::ExplorationTrace;

/// Parent-to-child node sequence from a (sub)tree root to the best state of
/// that (sub)tree. Always at least two nodes long.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestPath {
    pub nodes: Vec<usize>,
}

/// Best paths of a trace: the path of the whole tree first, then,
/// recursively, the paths of every subtree hanging off an extracted path.
/// Duplicate stubs are never candidates; ties go to the earliest node.
pub fn extract_best_paths(trace: &ExplorationTrace) -> Vec<BestPath> {
    let nodes = &trace.nodes;
    if nodes.is_empty() {
        return Vec::new();
    }
    let mut children = vec![Vec::new(); nodes.len()];
    for n in &nodes[1..] {
        if n.duplicate_of.is_none() {
            if let Some(p) = n.parent {
                children[p].push(n.id);
            }
        }
    }

    // Node ids follow evaluation order, so descendants come after ancestors.
    let mut best: Vec<usize> = (0..nodes.len()).collect();
    for v in (0..nodes.len()).rev() {
        for &c in &children[v] {
            let (bc, bv) = (best[c], best[v]);
            let better = nodes[bc].satisfaction > nodes[bv].satisfaction
                || (nodes[bc].satisfaction == nodes[bv].satisfaction && bc < bv);
            if better {
                best[v] = bc;
            }
        }
    }

    let mut on_path = vec![false; nodes.len()];
    let mut paths = Vec::new();
    let mut pending = vec![0usize];
    while let Some(root) = pending.pop() {
        let mut chain = vec![best[root]];
        while *chain.last().unwrap_or(&root) != root {
            let last = *chain.last().unwrap_or(&root);
            chain.push(nodes[last].parent.unwrap_or(root));
        }
        chain.reverse();
        for &n in &chain {
            on_path[n] = true;
        }
        for &n in chain.iter().rev() {
            for &c in children[n].iter().rev() {
                if !on_path[c] {
                    pending.push(c);
                }
            }
        }
        if chain.len() >= 2 {
            paths.push(BestPath { nodes: chain });
        }
    }
    paths
}
