use std::collections::{HashMap, VecDeque};

use super::{Arc, ArcLabel, StateId, Wfsa};

/// Composes a unit schema with a temporal schema.
///
/// Arcs match on `unit`; both sides advance together. The result carries the
/// unit position from the unit schema and the frame from the temporal schema,
/// with weights added. Only pairs reachable from `(start, start)` are built,
/// so the output can still contain states that never reach the final pair;
/// [`connect`] removes them.
pub fn compose(unit_schema: &Wfsa, temporal_schema: &Wfsa) -> Wfsa {
    let final_pair = (unit_schema.final_state(), temporal_schema.final_state());
    let mut ids: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let start = (unit_schema.start(), temporal_schema.start());
    ids.insert(start, 0);
    queue.push_back(start);

    let mut arcs = Vec::new();
    while let Some((a, b)) = queue.pop_front() {
        let src = ids[&(a, b)];
        for (_, ua) in unit_schema.arcs_from(a) {
            for (_, ta) in temporal_schema.arcs_from(b) {
                if ua.label.unit != ta.label.unit {
                    continue;
                }
                let pair = (ua.dst, ta.dst);
                let next = ids.len();
                let dst = *ids.entry(pair).or_insert_with(|| {
                    queue.push_back(pair);
                    next
                });
                let label = ArcLabel::new(ua.label.unit, ua.label.unit_position, ta.label.frame);
                arcs.push(Arc::new(src, dst, label, ua.weight + ta.weight));
            }
        }
    }
    let next = ids.len();
    let final_state = *ids.entry(final_pair).or_insert(next);
    Wfsa::new(ids.len(), final_state, arcs).expect("composition of valid schemas")
}

/// Removes every state that is not on some start-to-final path.
///
/// Surviving states keep their relative order, so the start stays at 0.
pub fn connect(wfsa: &Wfsa) -> Wfsa {
    let n = wfsa.num_states();
    let mut accessible = vec![false; n];
    let mut stack = vec![wfsa.start()];
    accessible[wfsa.start()] = true;
    while let Some(s) = stack.pop() {
        for (_, arc) in wfsa.arcs_from(s) {
            if !accessible[arc.dst] {
                accessible[arc.dst] = true;
                stack.push(arc.dst);
            }
        }
    }

    let mut incoming: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for arc in wfsa.arcs() {
        incoming[arc.dst].push(arc.src);
    }
    let mut coaccessible = vec![false; n];
    let mut stack = vec![wfsa.final_state()];
    coaccessible[wfsa.final_state()] = true;
    while let Some(s) = stack.pop() {
        for &p in &incoming[s] {
            if !coaccessible[p] {
                coaccessible[p] = true;
                stack.push(p);
            }
        }
    }

    let keep: Vec<bool> = (0..n).map(|s| accessible[s] && coaccessible[s]).collect();
    if !keep[wfsa.start()] {
        return Wfsa::empty();
    }
    let mut remap = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if keep[s] {
            remap[s] = next;
            next += 1;
        }
    }
    let arcs = wfsa
        .arcs()
        .iter()
        .filter(|a| keep[a.src] && keep[a.dst])
        .map(|a| Arc::new(remap[a.src], remap[a.dst], a.label, a.weight))
        .collect();
    Wfsa::new(next, remap[wfsa.final_state()], arcs).expect("trim of a valid graph")
}

/// Numbering-independent form of a graph, used for isomorphism checks.
///
/// States are renumbered in breadth-first discovery order from the start,
/// following outgoing arcs sorted by label. This is canonical for graphs in
/// which no state has two outgoing arcs with the same label, which holds for
/// every lattice and composed schema pair in this crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub num_states: usize,
    pub final_state: StateId,
    /// `(src, dst, label, weight bits)`, sorted.
    pub arcs: Vec<(StateId, StateId, ArcLabel, u64)>,
}

pub fn canonical_form(wfsa: &Wfsa) -> CanonicalForm {
    let n = wfsa.num_states();
    let mut remap = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    remap[wfsa.start()] = next;
    next += 1;
    queue.push_back(wfsa.start());
    while let Some(s) = queue.pop_front() {
        let mut out: Vec<&Arc> = wfsa.arcs_from(s).map(|(_, a)| a).collect();
        out.sort_by(|a, b| a.label.cmp(&b.label).then(a.weight.total_cmp(&b.weight)));
        for arc in out {
            if remap[arc.dst] == usize::MAX {
                remap[arc.dst] = next;
                next += 1;
                queue.push_back(arc.dst);
            }
        }
    }
    // unreachable states keep their relative order after the reachable ones
    for r in remap.iter_mut() {
        if *r == usize::MAX {
            *r = next;
            next += 1;
        }
    }
    let mut arcs: Vec<_> = wfsa
        .arcs()
        .iter()
        .map(|a| {
            // -0.0 and 0.0 compare equal
            let w = if a.weight == 0.0 { 0.0f64 } else { a.weight };
            (remap[a.src], remap[a.dst], a.label, w.to_bits())
        })
        .collect();
    arcs.sort();
    CanonicalForm {
        num_states: n,
        final_state: remap[wfsa.final_state()],
        arcs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsa::{forward_log_score, Symbol};

    fn lab(u: u32) -> ArcLabel {
        ArcLabel::new(Symbol::Token(u), None, None)
    }

    #[test]
    fn connect_is_identity_on_trim_graph() {
        let g = Wfsa::new(
            3,
            2,
            vec![
                Arc::new(0, 1, lab(0), -1.0),
                Arc::new(1, 2, lab(1), -1.0),
                Arc::new(0, 2, lab(2), -0.3),
            ],
        )
        .unwrap();
        assert_eq!(connect(&g), g);
    }

    #[test]
    fn connect_drops_dangling_state() {
        let g = Wfsa::new(
            4,
            3,
            vec![
                Arc::new(0, 1, lab(0), -1.0),
                Arc::new(1, 3, lab(1), -1.0),
                Arc::new(0, 2, lab(2), -0.3),
            ],
        )
        .unwrap();
        let t = connect(&g);
        assert_eq!(t.num_states(), 3);
        assert_eq!(t.final_state(), 2);
        assert_eq!(forward_log_score(&t).unwrap(), forward_log_score(&g).unwrap());
    }

    #[test]
    fn connect_without_any_path_is_empty() {
        let g = Wfsa::new(3, 2, vec![Arc::new(0, 1, lab(0), 0.0)]).unwrap();
        assert_eq!(connect(&g), Wfsa::empty());
    }

    #[test]
    fn canonical_form_ignores_numbering() {
        let a = Wfsa::new(
            3,
            2,
            vec![Arc::new(0, 1, lab(0), -1.0), Arc::new(1, 2, lab(1), -2.0)],
        )
        .unwrap();
        let b = Wfsa::new(
            3,
            1,
            vec![Arc::new(0, 2, lab(0), -1.0), Arc::new(2, 1, lab(1), -2.0)],
        )
        .unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
        let c = a.with_weights(&[-1.0, -2.5]).unwrap();
        assert_ne!(canonical_form(&a), canonical_form(&c));
    }
}
