use std::collections::{BTreeMap, BTreeSet};

use super::ir::{DataflowGraph, Membership, NodeKind, SignalUpdate};
use crate::model::diagnostic::Diagnostic;

/// Topological order with ties broken by node id. On a cycle, returns the
/// ids left unordered.
pub fn topological_order(g: &DataflowGraph) -> Result<Vec<String>, Vec<String>> {
    let mut indegree: BTreeMap<&str, usize> = g.nodes.keys().map(|k| (k.as_str(), 0)).collect();
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (from, to) in &g.edges {
        if !indegree.contains_key(from.as_str()) {
            continue;
        }
        if let Some(d) = indegree.get_mut(to.as_str()) {
            *d += 1;
            out.entry(from).or_default().push(to);
        }
    }
    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&k, _)| k).collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for &m in out.get(n).into_iter().flatten() {
            let d = indegree.get_mut(m).expect("known node");
            *d -= 1;
            if *d == 0 {
                ready.insert(m);
            }
        }
    }
    if order.len() == indegree.len() {
        Ok(order)
    } else {
        let done: BTreeSet<&str> = order.iter().map(String::as_str).collect();
        Err(indegree
            .keys()
            .filter(|k| !done.contains(*k))
            .map(|k| k.to_string())
            .collect())
    }
}

/// Reference integrity, acyclicity and one clock per animated selection.
pub fn verify_graph(g: &DataflowGraph) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for (id, node) in &g.nodes {
        if *id != node.id {
            diags.push(Diagnostic::error(
                id.as_str(),
                format!("node stored under id {id} is {}", node.id),
            ));
        }
        for r in node.inputs().into_iter().chain(node.targets()) {
            if !g.nodes.contains_key(r) {
                diags.push(Diagnostic::error(id.as_str(), format!("dangling reference to {r}")));
            }
        }
    }
    if let Err(stuck) = topological_order(g) {
        diags.push(Diagnostic::error(
            "/",
            format!("cycle through nodes {}", stuck.join(", ")),
        ));
        return diags;
    }

    let upstream = |start: &str| -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.to_string()];
        while let Some(id) = stack.pop() {
            if let Some(n) = g.nodes.get(&id) {
                for i in n.inputs() {
                    if seen.insert(i.to_string()) {
                        stack.push(i.to_string());
                    }
                }
            }
        }
        seen
    };
    let is_clock = |id: &str| {
        g.signal(id)
            .is_some_and(|s| matches!(s.update, SignalUpdate::RawClock { .. }))
    };
    let mut animated = 0;
    for (id, node) in &g.nodes {
        if let NodeKind::Selection(s) = &node.kind {
            if matches!(s.membership, Membership::Predicate { .. }) {
                animated += 1;
                let clocks = upstream(id).into_iter().filter(|u| is_clock(u)).count();
                if clocks != 1 {
                    diags.push(Diagnostic::error(
                        id.as_str(),
                        format!("animated selection depends on {clocks} clocks, expected 1"),
                    ));
                }
            }
        }
    }
    let clocks = g.clocks().len();
    if clocks != animated {
        diags.push(Diagnostic::error(
            "/",
            format!("{clocks} clock signals for {animated} animated selections"),
        ));
    }
    if g.marks().next().is_none() {
        diags.push(Diagnostic::error("/", "graph has no mark"));
    }
    diags
}
