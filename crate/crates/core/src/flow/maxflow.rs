//! Dinic max-flow over real capacities, and circulation feasibility with
//! lower bounds via the usual super-source/super-sink reduction.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    adjacency: Vec<Vec<usize>>,
    to: Vec<usize>,
    residual: Vec<f64>,
}

impl FlowNetwork {
    pub fn new(node_count: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); node_count],
            to: Vec::new(),
            residual: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds arc `u → v`; returns its id. The paired reverse arc is `id ^ 1`.
    pub fn add_arc(&mut self, u: usize, v: usize, capacity: f64) -> usize {
        debug_assert!(capacity >= 0.0);
        let id = self.to.len();
        self.to.extend([v, u]);
        self.residual.extend([capacity, 0.0]);
        self.adjacency[u].push(id);
        self.adjacency[v].push(id + 1);
        id
    }

    /// Flow currently routed on arc `id`.
    pub fn flow(&self, id: usize) -> f64 {
        self.residual[id ^ 1]
    }

    /// Maximum `s → t` flow. Residual capacities at or below `eps` are
    /// treated as exhausted.
    pub fn max_flow(&mut self, s: usize, t: usize, eps: f64) -> f64 {
        let n = self.node_count();
        let mut total = 0.0;
        let mut level = vec![usize::MAX; n];
        let mut next = vec![0usize; n];
        loop {
            level.iter_mut().for_each(|l| *l = usize::MAX);
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &a in &self.adjacency[u] {
                    let v = self.to[a];
                    if self.residual[a] > eps && level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            next.iter_mut().for_each(|x| *x = 0);
            loop {
                let pushed = self.augment(s, t, f64::INFINITY, eps, &level, &mut next);
                if pushed <= eps {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(
        &mut self,
        u: usize,
        t: usize,
        limit: f64,
        eps: f64,
        level: &[usize],
        next: &mut [usize],
    ) -> f64 {
        if u == t {
            return limit;
        }
        while next[u] < self.adjacency[u].len() {
            let a = self.adjacency[u][next[u]];
            let v = self.to[a];
            if self.residual[a] > eps && level[v] == level[u] + 1 {
                let pushed = self.augment(v, t, limit.min(self.residual[a]), eps, level, next);
                if pushed > eps {
                    self.residual[a] -= pushed;
                    self.residual[a ^ 1] += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    /// Nodes reachable from `s` through arcs with residual above `eps`
    /// (the source side of a minimum cut after [`FlowNetwork::max_flow`]).
    pub fn source_side(&self, s: usize, eps: f64) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adjacency[u] {
                let v = self.to[a];
                if self.residual[a] > eps && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Arc with flow bounds `lower ≤ h ≤ upper`; `upper` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedArc {
    pub from: usize,
    pub to: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Does a circulation respecting every arc's bounds exist?
///
/// Lower bounds are moved into node excesses; the circulation exists iff
/// a max flow from a super source to a super sink saturates the total
/// positive excess to within `tol` (relative to `max(1, excess)`).
pub fn circulation_feasible(node_count: usize, arcs: &[BoundedArc], tol: f64) -> bool {
    let finite_total: f64 = arcs
        .iter()
        .filter(|a| a.upper.is_finite())
        .map(|a| a.upper)
        .sum();
    let big = 2.0 * finite_total + 1.0;
    let source = node_count;
    let sink = node_count + 1;
    let mut net = FlowNetwork::new(node_count + 2);
    let mut excess = vec![0.0; node_count];
    for a in arcs {
        debug_assert!(a.lower <= a.upper);
        let upper = if a.upper.is_finite() { a.upper } else { big };
        let room = upper - a.lower;
        if room > 0.0 {
            net.add_arc(a.from, a.to, room);
        }
        excess[a.to] += a.lower;
        excess[a.from] -= a.lower;
    }
    let mut required = 0.0;
    for (v, &ex) in excess.iter().enumerate() {
        if ex > 0.0 {
            net.add_arc(source, v, ex);
            required += ex;
        } else if ex < 0.0 {
            net.add_arc(v, sink, -ex);
        }
    }
    let eps = 1e-14 * (1.0 + big);
    let flow = net.max_flow(source, sink, eps);
    flow >= required - tol * required.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_max_flow() {
        // CLRS 26.1
        let mut net = FlowNetwork::new(6);
        for &(u, v, c) in &[
            (0, 1, 16.0),
            (0, 2, 13.0),
            (2, 1, 4.0),
            (1, 3, 12.0),
            (3, 2, 9.0),
            (2, 4, 14.0),
            (4, 3, 7.0),
            (3, 5, 20.0),
            (4, 5, 4.0),
        ] {
            net.add_arc(u, v, c);
        }
        assert!((net.max_flow(0, 5, 1e-12) - 23.0).abs() < 1e-12);
        let side = net.source_side(0, 1e-12);
        assert!(side[0] && !side[5]);
    }

    #[test]
    fn fractional_capacities() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 0.3);
        net.add_arc(0, 2, 0.1 + 0.2);
        net.add_arc(1, 3, 0.25);
        net.add_arc(2, 3, 1.0);
        net.add_arc(1, 2, 0.05);
        assert!((net.max_flow(0, 3, 1e-15) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn circulation_with_lower_bounds() {
        // cycle 0 → 1 → 2 → 0 forced to carry at least 1 but arc 2 → 0 caps at 0.5
        let arcs = [
            BoundedArc {
                from: 0,
                to: 1,
                lower: 1.0,
                upper: 2.0,
            },
            BoundedArc {
                from: 1,
                to: 2,
                lower: 0.0,
                upper: 2.0,
            },
            BoundedArc {
                from: 2,
                to: 0,
                lower: 0.0,
                upper: 0.5,
            },
        ];
        assert!(!circulation_feasible(3, &arcs, 1e-9));
        let mut relaxed = arcs;
        relaxed[2].upper = f64::INFINITY;
        assert!(circulation_feasible(3, &relaxed, 1e-9));
    }
}
