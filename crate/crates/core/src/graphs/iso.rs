//! Backtracking isomorphism search for small graphs.

use std::collections::BTreeMap;

use crate::scenario::{ExclusivityGraph, VertexId};

/// First isomorphism `a → b` in canonical order, or `None`.
pub fn find_vertex_event_mapping(a: &ExclusivityGraph, b: &ExclusivityGraph) -> Option<BTreeMap<VertexId, VertexId>> {
    find_vertex_event_mapping_pinned(a, b, &[])
}

/// Like [`find_vertex_event_mapping`], with some images fixed in advance.
/// Pinned vertices are placed first, which also prunes the search early.
pub fn find_vertex_event_mapping_pinned(
    a: &ExclusivityGraph,
    b: &ExclusivityGraph,
    pins: &[(VertexId, VertexId)],
) -> Option<BTreeMap<VertexId, VertexId>> {
    if a.order() != b.order() || a.size() != b.size() {
        return None;
    }
    let pinned: BTreeMap<VertexId, VertexId> = pins.iter().copied().collect();
    if pinned.keys().any(|&v| a.vertex(v).is_none()) || pinned.values().any(|&v| b.vertex(v).is_none()) {
        return None;
    }
    let mut order: Vec<VertexId> = pins.iter().map(|p| p.0).collect();
    order.extend(a.vertex_ids().filter(|v| !pinned.contains_key(v)));
    let targets: Vec<VertexId> = b.vertex_ids().collect();
    let deg_a: BTreeMap<VertexId, usize> = a.vertex_ids().map(|v| (v, a.degree(v))).collect();
    let deg_b: BTreeMap<VertexId, usize> = b.vertex_ids().map(|v| (v, b.degree(v))).collect();

    let mut state = Search { a, b, order: &order, targets: &targets, pinned: &pinned, deg_a, deg_b, map: Vec::new() };
    if state.extend() {
        Some(state.map.into_iter().collect())
    } else {
        None
    }
}

struct Search<'g> {
    a: &'g ExclusivityGraph,
    b: &'g ExclusivityGraph,
    order: &'g [VertexId],
    targets: &'g [VertexId],
    pinned: &'g BTreeMap<VertexId, VertexId>,
    deg_a: BTreeMap<VertexId, usize>,
    deg_b: BTreeMap<VertexId, usize>,
    map: Vec<(VertexId, VertexId)>,
}

impl Search<'_> {
    fn extend(&mut self) -> bool {
        let depth = self.map.len();
        if depth == self.order.len() {
            return true;
        }
        let v = self.order[depth];
        for &t in self.targets {
            if let Some(&p) = self.pinned.get(&v) {
                if p != t {
                    continue;
                }
            }
            if self.deg_a[&v] != self.deg_b[&t] || self.map.iter().any(|&(_, u)| u == t) {
                continue;
            }
            let consistent = self.map.iter().all(|&(w, u)| self.a.is_adjacent(v, w) == self.b.is_adjacent(t, u));
            if !consistent {
                continue;
            }
            self.map.push((v, t));
            if self.extend() {
                return true;
            }
            self.map.pop();
        }
        false
    }
}

/// Whether `map` is a bijection `a → b` preserving adjacency both ways.
pub fn is_isomorphism(a: &ExclusivityGraph, b: &ExclusivityGraph, map: &BTreeMap<VertexId, VertexId>) -> bool {
    if a.order() != b.order() || map.len() != a.order() {
        return false;
    }
    let mut images: Vec<VertexId> = map.values().copied().collect();
    images.sort();
    images.dedup();
    if images.len() != map.len() || images.iter().any(|&v| b.vertex(v).is_none()) {
        return false;
    }
    let ids: Vec<VertexId> = a.vertex_ids().collect();
    ids.iter().all(|v| map.contains_key(v))
        && ids
            .iter()
            .enumerate()
            .all(|(k, &x)| ids[k + 1..].iter().all(|&y| a.is_adjacent(x, y) == b.is_adjacent(map[&x], map[&y])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pentagon_maps_to_itself_by_identity() {
        let c5 = ExclusivityGraph::cycle(5);
        let m = find_vertex_event_mapping(&c5, &c5).unwrap();
        assert!(m.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn pentagon_is_not_k5() {
        assert!(find_vertex_event_mapping(&ExclusivityGraph::cycle(5), &ExclusivityGraph::complete(5)).is_none());
    }

    #[test]
    fn pins_are_respected() {
        let c5 = ExclusivityGraph::cycle(5);
        let m = find_vertex_event_mapping_pinned(&c5, &c5, &[(0, 2)]).unwrap();
        assert_eq!(m[&0], 2);
        assert!(is_isomorphism(&c5, &c5, &m));
    }
}
