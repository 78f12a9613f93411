use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{clamp_neg_inf, log_add, report_score, StateId, Wfsa, NEG_INF_SENTINEL, NEG_INF_THRESHOLD};
use crate::error::{Error, Result};

/// Topological order of all states; ties are broken by lowest state id.
pub fn topo_order(wfsa: &Wfsa) -> Result<Vec<StateId>> {
    let n = wfsa.num_states();
    // Lattices built with row-major ids already satisfy src < dst.
    if wfsa.arcs().iter().all(|a| a.src < a.dst) {
        return Ok((0..n).collect());
    }
    let mut indegree = vec![0usize; n];
    for arc in wfsa.arcs() {
        indegree[arc.dst] += 1;
    }
    let mut ready: BinaryHeap<Reverse<StateId>> = (0..n)
        .filter(|&s| indegree[s] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(s)) = ready.pop() {
        order.push(s);
        for (_, arc) in wfsa.arcs_from(s) {
            indegree[arc.dst] -= 1;
            if indegree[arc.dst] == 0 {
                ready.push(Reverse(arc.dst));
            }
        }
    }
    if order.len() != n {
        return Err(Error::CyclicGraph);
    }
    Ok(order)
}

/// Forward (alpha) and backward (beta) scores of an acyclic graph.
///
/// Values are kept in sentinel form; use the accessors for reporting.
#[derive(Clone, Debug)]
pub struct ForwardBackward {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    total: f64,
}

impl ForwardBackward {
    pub fn compute(wfsa: &Wfsa) -> Result<Self> {
        let order = topo_order(wfsa)?;
        let n = wfsa.num_states();

        let mut alpha = vec![NEG_INF_SENTINEL; n];
        alpha[wfsa.start()] = 0.0;
        for &s in &order {
            let a = alpha[s];
            for (_, arc) in wfsa.arcs_from(s) {
                alpha[arc.dst] = log_add(alpha[arc.dst], a + clamp_neg_inf(arc.weight));
            }
        }

        let mut beta = vec![NEG_INF_SENTINEL; n];
        beta[wfsa.final_state()] = 0.0;
        for &s in order.iter().rev() {
            let mut acc = beta[s];
            for (_, arc) in wfsa.arcs_from(s) {
                acc = log_add(acc, clamp_neg_inf(arc.weight) + beta[arc.dst]);
            }
            beta[s] = acc;
        }

        let total = alpha[wfsa.final_state()];
        Ok(ForwardBackward { alpha, beta, total })
    }

    /// Log of the total path weight; `-inf` when nothing reaches the final state.
    pub fn total(&self) -> f64 {
        report_score(self.total)
    }

    pub fn has_path(&self) -> bool {
        self.total > NEG_INF_THRESHOLD
    }

    pub fn alpha(&self) -> Vec<f64> {
        self.alpha.iter().copied().map(report_score).collect()
    }

    pub fn beta(&self) -> Vec<f64> {
        self.beta.iter().copied().map(report_score).collect()
    }

    /// Occupancy of each arc, `exp(alpha(src) + w + beta(dst) - total)`.
    pub fn posteriors(&self, wfsa: &Wfsa) -> Result<PosteriorMap> {
        if !self.has_path() {
            return Err(Error::NoPath);
        }
        let values = wfsa
            .arcs()
            .iter()
            .map(|arc| {
                let lp = self.alpha[arc.src] + clamp_neg_inf(arc.weight) + self.beta[arc.dst]
                    - self.total;
                lp.exp().min(1.0)
            })
            .collect();
        Ok(PosteriorMap(values))
    }
}

/// Per-arc posterior occupancy, indexed like [`Wfsa::arcs`].
///
/// Equal to the derivative of the log total score with respect to each arc weight.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorMap(pub Vec<f64>);

impl PosteriorMap {
    pub fn get(&self, arc: usize) -> f64 {
        self.0[arc]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn forward_log_score(wfsa: &Wfsa) -> Result<f64> {
    let fb = ForwardBackward::compute(wfsa)?;
    if !fb.has_path() {
        return Err(Error::NoPath);
    }
    Ok(fb.total())
}

/// Per-state suffix scores; dead-end states get `-inf`.
pub fn backward_log_score(wfsa: &Wfsa) -> Result<Vec<f64>> {
    let fb = ForwardBackward::compute(wfsa)?;
    if !fb.has_path() {
        return Err(Error::NoPath);
    }
    Ok(fb.beta())
}

pub fn arc_posteriors(wfsa: &Wfsa) -> Result<PosteriorMap> {
    ForwardBackward::compute(wfsa)?.posteriors(wfsa)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    /// Arc indices from start to final.
    pub arcs: Vec<usize>,
    pub weight: f64,
}

/// Exhaustive depth-first listing of every start-to-final path.
///
/// Brute-force reference for the dynamic programs; fails once more than
/// `max_paths` paths have been found.
pub fn enumerate_paths(wfsa: &Wfsa, max_paths: usize) -> Result<Vec<Path>> {
    topo_order(wfsa)?;
    let mut paths = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    walk(wfsa, wfsa.start(), 0.0, &mut stack, &mut paths, max_paths)?;
    Ok(paths)
}

fn walk(
    wfsa: &Wfsa,
    state: StateId,
    weight: f64,
    stack: &mut Vec<usize>,
    paths: &mut Vec<Path>,
    max_paths: usize,
) -> Result<()> {
    if state == wfsa.final_state() {
        if paths.len() == max_paths {
            return Err(Error::TooManyPaths(max_paths));
        }
        paths.push(Path {
            arcs: stack.clone(),
            weight,
        });
        return Ok(());
    }
    for (idx, arc) in wfsa.arcs_from(state) {
        stack.push(idx);
        walk(wfsa, arc.dst, weight + arc.weight, stack, paths, max_paths)?;
        stack.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsa::{logsumexp, Arc, ArcLabel, Symbol};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lab(u: u32) -> ArcLabel {
        ArcLabel::new(Symbol::Token(u), None, None)
    }

    fn chain(weights: &[f64]) -> Wfsa {
        let arcs = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Arc::new(i, i + 1, lab(0), w))
            .collect();
        Wfsa::new(weights.len() + 1, weights.len(), arcs).unwrap()
    }

    /// Random DAG over `n` states where every arc goes from lower to higher id,
    /// then relabeled with a random permutation (keeping start at 0).
    pub(crate) fn random_dag(rng: &mut ChaCha8Rng, n: usize) -> Wfsa {
        let mut arcs = Vec::new();
        for s in 0..n - 1 {
            // guarantee a path
            arcs.push(Arc::new(s, s + 1, lab(0), rng.random_range(-3.0..1.0)));
            for d in s + 1..n {
                if rng.random_bool(0.35) {
                    let u = rng.random_range(1..4);
                    arcs.push(Arc::new(s, d, lab(u), rng.random_range(-3.0..1.0)));
                }
            }
        }
        let mut perm: Vec<usize> = (1..n).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let map = |s: usize| if s == 0 { 0 } else { perm[s - 1] };
        let arcs = arcs
            .into_iter()
            .map(|a| Arc::new(map(a.src), map(a.dst), a.label, a.weight))
            .collect();
        Wfsa::new(n, map(n - 1), arcs).unwrap()
    }

    #[test]
    fn topo_order_of_single_arc() {
        assert_eq!(topo_order(&chain(&[0.0])).unwrap(), vec![0, 1]);
    }

    #[test]
    fn topo_order_detects_two_cycle() {
        let g = Wfsa::new(
            3,
            2,
            vec![
                Arc::new(0, 1, lab(0), 0.0),
                Arc::new(1, 0, lab(0), 0.0),
                Arc::new(1, 2, lab(0), 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(topo_order(&g), Err(Error::CyclicGraph)));
        assert!(matches!(forward_log_score(&g), Err(Error::CyclicGraph)));
    }

    #[test]
    fn topo_order_respects_arcs_on_permuted_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = random_dag(&mut rng, 6);
            let order = topo_order(&g).unwrap();
            let mut pos = vec![0; g.num_states()];
            for (i, &s) in order.iter().enumerate() {
                pos[s] = i;
            }
            assert!(g.arcs().iter().all(|a| pos[a.src] < pos[a.dst]));
        }
    }

    #[test]
    fn single_path_score_is_sum_of_weights() {
        let g = chain(&[-1.0, -2.0]);
        assert_eq!(forward_log_score(&g).unwrap(), -3.0);
        let beta = backward_log_score(&g).unwrap();
        assert_eq!(beta, vec![-3.0, -2.0, 0.0]);
        assert_eq!(arc_posteriors(&g).unwrap().0, vec![1.0, 1.0]);
    }

    #[test]
    fn parallel_half_arcs_sum_to_one() {
        let h = 0.5f64.ln();
        let g = Wfsa::new(
            2,
            1,
            vec![Arc::new(0, 1, lab(0), h), Arc::new(0, 1, lab(1), h)],
        )
        .unwrap();
        assert!(forward_log_score(&g).unwrap().abs() < 1e-15);
        let post = arc_posteriors(&g).unwrap();
        assert!((post.get(0) - 0.5).abs() < 1e-15);
        assert!((post.get(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dead_end_state_has_neg_inf_beta() {
        let g = Wfsa::new(
            3,
            1,
            vec![Arc::new(0, 1, lab(0), -0.5), Arc::new(0, 2, lab(1), -0.1)],
        )
        .unwrap();
        let beta = backward_log_score(&g).unwrap();
        assert_eq!(beta[2], f64::NEG_INFINITY);
        assert_eq!(beta[0], -0.5);
    }

    #[test]
    fn unreachable_final_is_no_path() {
        let g = Wfsa::new(3, 2, vec![Arc::new(0, 1, lab(0), 0.0)]).unwrap();
        assert!(matches!(forward_log_score(&g), Err(Error::NoPath)));
        assert!(matches!(arc_posteriors(&g), Err(Error::NoPath)));
    }

    #[test]
    fn forward_matches_enumeration_and_backward() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(2..=6);
            let g = random_dag(&mut rng, n);
            let total = forward_log_score(&g).unwrap();
            let paths = enumerate_paths(&g, 5000).unwrap();
            let brute = logsumexp(paths.iter().map(|p| p.weight));
            assert!((total - brute).abs() < 1e-9, "{total} vs {brute}");
            let beta = backward_log_score(&g).unwrap();
            assert!((beta[g.start()] - total).abs() < 1e-9);
        }
    }

    #[test]
    fn posteriors_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for _ in 0..100 {
            let n = rng.random_range(2..=6);
            let g = random_dag(&mut rng, n);
            let post = arc_posteriors(&g).unwrap();
            let weights: Vec<f64> = g.arcs().iter().map(|a| a.weight).collect();
            for i in 0..weights.len() {
                let mut w = weights.clone();
                w[i] += h;
                let up = forward_log_score(&g.with_weights(&w).unwrap()).unwrap();
                w[i] -= 2.0 * h;
                let down = forward_log_score(&g.with_weights(&w).unwrap()).unwrap();
                let fd = (up - down) / (2.0 * h);
                let rel = (fd - post.get(i)).abs() / fd.abs().max(post.get(i).abs()).max(1e-3);
                assert!(rel < 1e-4, "arc {i}: fd {fd} vs posterior {}", post.get(i));
            }
        }
    }

    #[test]
    fn neg_inf_weight_equals_arc_removal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let g = random_dag(&mut rng, 5);
            let k = rng.random_range(0..g.num_arcs());
            let mut w: Vec<f64> = g.arcs().iter().map(|a| a.weight).collect();
            w[k] = f64::NEG_INFINITY;
            let masked = forward_log_score(&g.with_weights(&w).unwrap());
            let target = g.arcs()[k];
            let removed = forward_log_score(&g.without_arcs(|a| *a == target));
            match (masked, removed) {
                (Ok(a), Ok(b)) => assert!((a - b).abs() < 1e-9),
                (Err(Error::NoPath), Err(Error::NoPath)) => {}
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn enumeration_bound_is_enforced() {
        let h = 0.5f64.ln();
        let g = Wfsa::new(
            2,
            1,
            vec![Arc::new(0, 1, lab(0), h), Arc::new(0, 1, lab(1), h)],
        )
        .unwrap();
        assert!(matches!(enumerate_paths(&g, 1), Err(Error::TooManyPaths(1))));
        assert_eq!(enumerate_paths(&g, 2).unwrap().len(), 2);
    }
}
