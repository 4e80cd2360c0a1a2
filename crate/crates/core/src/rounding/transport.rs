//! Capacitated assignment as a min-cost flow, solved by successive shortest
//! paths with Dijkstra on reduced costs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{CoreError, Result};
use crate::metric::SiteDistance;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    rev: usize,
    cap: i64,
    cost: f64,
}

struct Graph {
    adj: Vec<Vec<Edge>>,
}

impl Graph {
    fn new(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) {
        let rf = self.adj[to].len();
        let rt = self.adj[from].len();
        self.adj[from].push(Edge { to, rev: rf, cap, cost });
        self.adj[to].push(Edge {
            to: from,
            rev: rt,
            cap: 0,
            cost: -cost,
        });
    }
}

#[derive(PartialEq)]
struct State(f64, usize);

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pushes `need` units from `s` to `t` at minimum cost. Returns the cost.
fn min_cost_flow(g: &mut Graph, s: usize, t: usize, need: i64) -> Option<f64> {
    let n = g.adj.len();
    let mut potential = vec![0.0; n];
    let mut total = 0.0;
    let mut flow = 0;
    while flow < need {
        let mut dist = vec![f64::INFINITY; n];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        dist[s] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(State(0.0, s));
        while let Some(State(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for (i, e) in g.adj[u].iter().enumerate() {
                if e.cap <= 0 {
                    continue;
                }
                let reduced = (e.cost + potential[u] - potential[e.to]).max(0.0);
                let nd = d + reduced;
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    prev[e.to] = Some((u, i));
                    heap.push(State(nd, e.to));
                }
            }
        }
        if !dist[t].is_finite() {
            return None;
        }
        for v in 0..n {
            if dist[v].is_finite() {
                potential[v] += dist[v];
            }
        }
        let mut push = need - flow;
        let mut v = t;
        while let Some((u, i)) = prev[v] {
            push = push.min(g.adj[u][i].cap);
            v = u;
        }
        let mut v = t;
        while let Some((u, i)) = prev[v] {
            let rev = g.adj[u][i].rev;
            g.adj[u][i].cap -= push;
            g.adj[v][rev].cap += push;
            total += push as f64 * g.adj[u][i].cost;
            v = u;
        }
        flow += push;
    }
    Some(total)
}

/// Minimum-total-distance assignment of every client to one of `opened`,
/// with at most `cap` clients per site. Returns the site of each client and
/// the total distance.
pub fn transportation_assign(opened: &[usize], cap: usize, costs: &impl SiteDistance) -> Result<(Vec<usize>, f64)> {
    transportation_assign_within(opened, cap, costs, |_, _| true)?
        .ok_or_else(|| CoreError::Invariant("transportation flow stalled below demand".into()))
}

/// As [`transportation_assign`], but client `u` may only use site `s` when
/// `allowed(u, s)`. Returns `None` when the restricted edges cannot carry
/// every client.
pub(crate) fn transportation_assign_within(
    opened: &[usize],
    cap: usize,
    costs: &impl SiteDistance,
    allowed: impl Fn(usize, usize) -> bool,
) -> Result<Option<(Vec<usize>, f64)>> {
    let n = costs.num_clients();
    let f = opened.len();
    if n > cap * f {
        return Err(CoreError::Infeasible(format!(
            "{f} sites with capacity {cap} serve {} clients, {} short",
            cap * f,
            n - cap * f
        )));
    }
    let s = 0;
    let t = n + f + 1;
    let mut g = Graph::new(n + f + 2);
    for u in 0..n {
        g.add_edge(s, 1 + u, 1, 0.0);
        for (j, &site) in opened.iter().enumerate().filter(|&(_, &s)| allowed(u, s)) {
            g.add_edge(1 + u, 1 + n + j, 1, costs.dist(u, site));
        }
    }
    for j in 0..f {
        g.add_edge(1 + n + j, t, cap as i64, 0.0);
    }
    let Some(total) = min_cost_flow(&mut g, s, t, n as i64) else {
        return Ok(None);
    };
    let assignment = (0..n)
        .map(|u| {
            let e = g.adj[1 + u]
                .iter()
                .find(|e| e.to > n && e.to <= n + f && e.cap == 0)
                .expect("every client carries one unit");
            opened[e.to - 1 - n]
        })
        .collect();
    Ok(Some((assignment, total)))
}
