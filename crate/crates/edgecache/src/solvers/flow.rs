//! Minimum-cost flow via successive shortest augmenting paths with node
//! potentials. Arc costs may be negative as long as the network contains no
//! negative-cost cycle (the cache networks built on top of this are layered
//! DAGs, which guarantees that); an initial Bellman-Ford pass seeds the
//! potentials so every Dijkstra run sees nonnegative reduced costs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const INF: i64 = i64::MAX / 4;

/// Directed flow network under construction. Nodes are `0..num_nodes`;
/// arcs carry an integer capacity and an integer cost per unit of flow.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    num_nodes: usize,
    // Forward arc 2k and its residual twin 2k+1.
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(num_nodes: usize) -> FlowNetwork {
        FlowNetwork { num_nodes, to: Vec::new(), cap: Vec::new(), cost: Vec::new(), adj: vec![Vec::new(); num_nodes] }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_arcs(&self) -> usize {
        self.to.len() / 2
    }

    /// Adds an arc and returns its id (stable across solves).
    pub fn add_arc(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        debug_assert!(from < self.num_nodes && to < self.num_nodes && cap >= 0);
        let id = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adj[from].push(id);
        self.to.push(from);
        self.cap.push(0);
        self.cost.push(-cost);
        self.adj[to].push(id + 1);
        id / 2
    }
}

/// Arc flows and total cost of a minimum-cost flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowResult {
    /// Flow on each arc, indexed by the id `add_arc` returned.
    pub flows: Vec<i64>,
    pub cost: i64,
}

/// Computes an exact minimum-cost integral flow of value `flow_value` from
/// `source` to `sink`. Fails with `InfeasibleFlow` when the maximum flow is
/// smaller than requested.
pub fn min_cost_flow(net: &FlowNetwork, source: usize, sink: usize, flow_value: i64) -> Result<FlowResult> {
    if source == sink {
        return Err(Error::InvalidParameter("source and sink must differ".into()));
    }
    if flow_value < 0 {
        return Err(Error::InvalidParameter("flow value must be nonnegative".into()));
    }
    let n = net.num_nodes;
    let mut residual = net.cap.clone();
    let mut potential = vec![0i64; n];

    // Bellman-Ford over residual arcs to absorb negative costs into the
    // potentials before the first Dijkstra.
    for _ in 0..n {
        let mut changed = false;
        for e in (0..net.to.len()).step_by(2) {
            if residual[e] > 0 {
                let from = net.to[e ^ 1];
                let cand = potential[from].saturating_add(net.cost[e]);
                if cand < potential[net.to[e]] {
                    potential[net.to[e]] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut dist = vec![INF; n];
    let mut parent: Vec<usize> = vec![usize::MAX; n];
    let mut pushed = 0i64;
    let mut total_cost = 0i64;

    while pushed < flow_value {
        dist.fill(INF);
        parent.fill(usize::MAX);
        dist[source] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &net.adj[u] {
                if residual[e] <= 0 {
                    continue;
                }
                let v = net.to[e];
                let nd = d + net.cost[e] + potential[u] - potential[v];
                debug_assert!(net.cost[e] + potential[u] - potential[v] >= 0);
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = e;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        if parent[sink] == usize::MAX {
            return Err(Error::InfeasibleFlow { requested: flow_value, max: pushed });
        }
        for u in 0..n {
            if dist[u] < INF {
                potential[u] += dist[u];
            }
        }
        // Bottleneck and true cost along the augmenting path.
        let mut bottleneck = flow_value - pushed;
        let mut v = sink;
        while v != source {
            let e = parent[v];
            bottleneck = bottleneck.min(residual[e]);
            v = net.to[e ^ 1];
        }
        let mut v = sink;
        while v != source {
            let e = parent[v];
            residual[e] -= bottleneck;
            residual[e ^ 1] += bottleneck;
            total_cost += bottleneck * net.cost[e];
            v = net.to[e ^ 1];
        }
        pushed += bottleneck;
    }

    let flows = (0..net.num_arcs()).map(|a| net.cap[2 * a] - residual[2 * a]).collect();
    Ok(FlowResult { flows, cost: total_cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 5, 3);
        let r = min_cost_flow(&net, 0, 1, 5).unwrap();
        assert_eq!(r.cost, 15);
        assert_eq!(r.flows, vec![5]);
    }

    #[test]
    fn parallel_arcs_pick_cheaper_first() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 1, 1);
        net.add_arc(0, 1, 1, 2);
        let r = min_cost_flow(&net, 0, 1, 2).unwrap();
        assert_eq!(r.cost, 3);
    }

    #[test]
    fn infeasible_flow_reports_max() {
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, 2, 1);
        net.add_arc(1, 2, 1, 1);
        match min_cost_flow(&net, 0, 2, 2) {
            Err(Error::InfeasibleFlow { requested: 2, max: 1 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn negative_costs_are_handled() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 1, 5);
        net.add_arc(0, 2, 1, 4);
        net.add_arc(1, 3, 1, -10);
        net.add_arc(2, 3, 1, 0);
        let r = min_cost_flow(&net, 0, 3, 2).unwrap();
        assert_eq!(r.cost, -1);
    }

    /// Exhaustive oracle: enumerate every integral flow vector satisfying
    /// capacity and conservation, and return the cheapest with the requested
    /// value.
    fn bruteforce_min_cost(net: &FlowNetwork, source: usize, sink: usize, value: i64) -> Option<i64> {
        let arcs = net.num_arcs();
        let mut flows = vec![0i64; arcs];
        let mut best: Option<i64> = None;
        fn recurse(
            net: &FlowNetwork,
            flows: &mut Vec<i64>,
            idx: usize,
            source: usize,
            sink: usize,
            value: i64,
            best: &mut Option<i64>,
        ) {
            if idx == flows.len() {
                let mut net_out = vec![0i64; net.num_nodes()];
                let mut cost = 0;
                for (a, &f) in flows.iter().enumerate() {
                    let from = net.to[2 * a + 1];
                    let to = net.to[2 * a];
                    net_out[from] += f;
                    net_out[to] -= f;
                    cost += f * net.cost[2 * a];
                }
                for v in 0..net.num_nodes() {
                    let expect = if v == source {
                        value
                    } else if v == sink {
                        -value
                    } else {
                        0
                    };
                    if net_out[v] != expect {
                        return;
                    }
                }
                if best.is_none_or(|b| cost < b) {
                    *best = Some(cost);
                }
                return;
            }
            for f in 0..=net.cap[2 * idx] {
                flows[idx] = f;
                recurse(net, flows, idx + 1, source, sink, value, best);
            }
            flows[idx] = 0;
        }
        recurse(net, &mut flows, 0, source, sink, value, &mut best);
        best
    }

    #[test]
    fn matches_bruteforce_on_random_dags() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 120 {
            let nodes = rng.random_range(3..=6);
            let mut net = FlowNetwork::new(nodes);
            let mut arcs = 0;
            for from in 0..nodes - 1 {
                for to in from + 1..nodes {
                    if rng.random_bool(0.6) && arcs < 9 {
                        net.add_arc(from, to, rng.random_range(1..=2), rng.random_range(-4..=6));
                        arcs += 1;
                    }
                }
            }
            if arcs == 0 {
                continue;
            }
            let value = rng.random_range(0..=3);
            let oracle = bruteforce_min_cost(&net, 0, nodes - 1, value);
            let solved = min_cost_flow(&net, 0, nodes - 1, value);
            match (oracle, solved) {
                (Some(cost), Ok(result)) => assert_eq!(result.cost, cost),
                (None, Err(Error::InfeasibleFlow { .. })) => {}
                (o, s) => panic!("oracle {o:?} vs solver {s:?}"),
            }
            checked += 1;
        }
    }
}
