//! Bang-per-buck partitions, the equality network N(p), exact max flow and
//! the balanced flow.
//!
//! The balanced flow is the maximum flow minimizing
//! sum_j (l_jt + spent_g_j - p_j)^2, i.e. the l2-norm of good surpluses.
//! It is computed by level peeling: cap every sink edge at
//! max(p_j - spent_g_j + lambda, 0), find the smallest lambda that still
//! admits the full max-flow value, pin the goods cut at that lambda, remove
//! them and recurse. Each lambda solves a linear equation over a candidate
//! tight set read off a min cut, so the whole computation stays in exact
//! rationals. The resulting surplus vector is the unique minimizer; the flow
//! itself is one witness.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::market::{Market, Segment, UtilitySpec};
use crate::rat::Rat;
use crate::Result;

/// One utility segment viewed at fixed prices: capacity is money,
/// B_ijk * m_i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentRef {
    pub good: usize,
    pub seg: usize,
    pub rate: BigInt,
    pub capacity: Rat,
}

/// Segments of equal bang-per-buck, decreasing across classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionClass {
    pub bang: Rat,
    pub segments: Vec<SegmentRef>,
}

/// An agent's sorted segment classes at prices p, split into allocated
/// classes (fully bought), the current class (where money runs out) and the
/// untouched tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionProfile {
    pub agent: usize,
    pub budget: Rat,
    pub classes: Vec<PartitionClass>,
    /// Index of the current class; None when every class is fully funded.
    pub current: Option<usize>,
    /// Money spent on allocated classes, spent^a_i.
    pub spent_allocated: Rat,
}

impl PartitionProfile {
    /// Segments in classes strictly before the current one (all classes when
    /// there is no current class).
    pub fn allocated_segments(&self) -> impl Iterator<Item = &SegmentRef> {
        let upto = self.current.unwrap_or(self.classes.len());
        self.classes[..upto].iter().flat_map(|c| c.segments.iter())
    }

    pub fn current_segments(&self) -> &[SegmentRef] {
        match self.current {
            Some(i) => &self.classes[i].segments,
            None => &[],
        }
    }

    /// Money left for the current class, m_i - spent^a_i.
    pub fn remaining(&self) -> Rat {
        &self.budget - &self.spent_allocated
    }
}

pub(crate) fn check_positive_prices(p: &[Rat]) -> Result<()> {
    if p.iter().any(|x| !x.is_positive()) {
        return Err(Error::Validation(
            "prices must be strictly positive".into(),
        ));
    }
    Ok(())
}

/// Builds the partition profile from raw segments and an explicit budget.
pub fn partitions_from_segments(
    segments: &[Vec<Segment>],
    agent: usize,
    budget: &Rat,
    p: &[Rat],
) -> PartitionProfile {
    let mut refs: Vec<(Rat, SegmentRef)> = Vec::new();
    for (good, segs) in segments.iter().enumerate() {
        for (k, s) in segs.iter().enumerate() {
            let bang = Rat::new(s.rate.clone(), BigInt::one()) / &p[good];
            refs.push((
                bang,
                SegmentRef {
                    good,
                    seg: k,
                    rate: s.rate.clone(),
                    capacity: &s.budget_fraction * budget,
                },
            ));
        }
    }
    // Decreasing bang-per-buck; ties by (good, segment) for determinism.
    refs.sort_by(|(ba, sa), (bb, sb)| {
        bb.cmp(ba).then_with(|| (sa.good, sa.seg).cmp(&(sb.good, sb.seg)))
    });
    let mut classes: Vec<PartitionClass> = Vec::new();
    for (bang, r) in refs {
        match classes.last_mut() {
            Some(c) if c.bang == bang => c.segments.push(r),
            _ => classes.push(PartitionClass {
                bang,
                segments: vec![r],
            }),
        }
    }
    // The current class is the first one where cumulative capacity reaches
    // the budget; classes strictly before it are fully allocated. An agent
    // whose money exactly covers a prefix of classes keeps the boundary
    // class current (with zero remaining money) rather than allocating it,
    // so its equality edges stay in the network.
    let mut cum = Rat::zero();
    let mut current = None;
    for (i, c) in classes.iter().enumerate() {
        let cap: Rat = c
            .segments
            .iter()
            .map(|s| s.capacity.clone())
            .fold(Rat::zero(), |a, b| a + b);
        let next = &cum + &cap;
        if *budget <= next {
            current = Some(i);
            break;
        }
        cum = next;
    }
    let spent_allocated = cum;
    PartitionProfile {
        agent,
        budget: budget.clone(),
        classes,
        current,
        spent_allocated,
    }
}

/// Partition profile of one agent of a spending-constraint market.
pub fn build_partitions(market: &Market, agent: usize, p: &[Rat]) -> Result<PartitionProfile> {
    check_positive_prices(p)?;
    let a = &market.agents[agent];
    let UtilitySpec::SpendingConstraint { segments } = &a.utility else {
        return Err(Error::Unsupported(format!(
            "agent {} is not segment-based",
            a.name
        )));
    };
    let budget = market.budget(agent, p);
    Ok(partitions_from_segments(segments, agent, &budget, p))
}

/// Current-partition edge of the equality network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqEdge {
    pub agent: usize,
    pub good: usize,
    pub seg: usize,
    pub rate: BigInt,
    pub cap: Rat,
}

/// The capacitated network s -> agents -> goods -> t at prices p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityNetwork {
    pub goods: usize,
    pub prices: Vec<Rat>,
    /// Per agent, m_i - spent^a_i.
    pub source_cap: Vec<Rat>,
    pub edges: Vec<EqEdge>,
    /// Allocated money per good, spent^g_j.
    pub spent_good: Vec<Rat>,
}

/// Builds the network and returns the per-agent profiles it came from.
pub fn build_network(market: &Market, p: &[Rat]) -> Result<(EqualityNetwork, Vec<PartitionProfile>)> {
    check_positive_prices(p)?;
    let m = market.goods_count();
    let mut profiles = Vec::with_capacity(market.agents_count());
    for i in 0..market.agents_count() {
        profiles.push(build_partitions(market, i, p)?);
    }
    Ok((network_from_profiles(m, p, &profiles), profiles))
}

pub fn network_from_profiles(
    goods: usize,
    p: &[Rat],
    profiles: &[PartitionProfile],
) -> EqualityNetwork {
    let mut spent_good = vec![Rat::zero(); goods];
    let mut edges = Vec::new();
    let mut source_cap = Vec::with_capacity(profiles.len());
    for prof in profiles {
        for s in prof.allocated_segments() {
            spent_good[s.good] += &s.capacity;
        }
        for s in prof.current_segments() {
            edges.push(EqEdge {
                agent: prof.agent,
                good: s.good,
                seg: s.seg,
                rate: s.rate.clone(),
                cap: s.capacity.clone(),
            });
        }
        source_cap.push(prof.remaining());
    }
    edges.sort_by_key(|e| (e.agent, e.good));
    EqualityNetwork {
        goods,
        prices: p.to_vec(),
        source_cap,
        edges,
        spent_good,
    }
}

/// A feasible flow on the equality network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    pub value: Rat,
    /// Money flow per (agent, good) current-partition edge.
    pub agent_good: BTreeMap<(usize, usize), Rat>,
    /// Sink flow l_jt per good.
    pub sink: Vec<Rat>,
    /// Source flow per agent.
    pub source: Vec<Rat>,
}

// ---------------------------------------------------------------------------
// Exact max flow (Edmonds-Karp on rationals).

struct HalfEdge {
    from: usize,
    to: usize,
    cap: Rat,
    flow: Rat,
}

pub(crate) struct MaxFlowNet {
    edges: Vec<HalfEdge>,
    adj: Vec<Vec<usize>>,
}

impl MaxFlowNet {
    pub(crate) fn new(nodes: usize) -> Self {
        MaxFlowNet {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: Rat) -> usize {
        let id = self.edges.len();
        self.edges.push(HalfEdge {
            from,
            to,
            cap,
            flow: Rat::zero(),
        });
        self.edges.push(HalfEdge {
            from: to,
            to: from,
            cap: Rat::zero(),
            flow: Rat::zero(),
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    fn residual(&self, e: usize) -> Rat {
        &self.edges[e].cap - &self.edges[e].flow
    }

    pub(crate) fn flow_on(&self, e: usize) -> &Rat {
        &self.edges[e].flow
    }

    /// Runs Edmonds-Karp from s to t; deterministic under the insertion
    /// order of edges. Returns the flow value.
    pub(crate) fn run(&mut self, s: usize, t: usize) -> Rat {
        let mut total = Rat::zero();
        loop {
            // BFS for a shortest augmenting path.
            let mut pred: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(s);
            'bfs: while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.edges[e].to;
                    if !seen[v] && self.residual(e).is_positive() {
                        seen[v] = true;
                        pred[v] = Some(e);
                        if v == t {
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            // Bottleneck along the path.
            let mut bottleneck: Option<Rat> = None;
            let mut v = t;
            while v != s {
                let e = pred[v].unwrap();
                let r = self.residual(e);
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= r => b,
                    _ => r,
                });
                v = self.edges[e].from;
            }
            let d = bottleneck.unwrap();
            let mut v = t;
            while v != s {
                let e = pred[v].unwrap();
                self.edges[e].flow += &d;
                self.edges[e ^ 1].flow -= &d;
                v = self.edges[e].from;
            }
            total += d;
        }
    }

    /// Nodes reachable from s in the residual graph (s-side of the minimal
    /// min cut).
    pub(crate) fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if !seen[v] && self.residual(e).is_positive() {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Nodes with a residual path to t (complement is the s-side of the
    /// maximal min cut).
    pub(crate) fn reaching_to(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[t] = true;
        let mut queue = std::collections::VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                // e is v -> u; its pair is u -> v.
                let u = self.edges[e].to;
                if !seen[u] && self.residual(e ^ 1).is_positive() {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }
}

// Node layout helpers for the equality network.
fn node_agent(i: usize) -> usize {
    1 + i
}
fn node_good(n: usize, j: usize) -> usize {
    1 + n + j
}

struct LevelNet {
    net: MaxFlowNet,
    source_edge: Vec<Option<usize>>,
    eq_edge: Vec<Option<usize>>,
    sink_edge: Vec<Option<usize>>,
    t: usize,
}

/// Builds the flow network over the active goods with the given sink caps
/// (None = effectively unbounded).
fn build_level_net(
    net: &EqualityNetwork,
    src_rem: &[Rat],
    active: &[bool],
    sink_cap: impl Fn(usize) -> Option<Rat>,
) -> LevelNet {
    let n = src_rem.len();
    let m = net.goods;
    let t = 1 + n + m;
    let mut g = MaxFlowNet::new(t + 1);
    let total: Rat = src_rem.iter().fold(Rat::zero(), |a, b| a + b);
    let unbounded = total + Rat::one();
    let mut source_edge = vec![None; n];
    for (i, cap) in src_rem.iter().enumerate() {
        if cap.is_positive() {
            source_edge[i] = Some(g.add_edge(0, node_agent(i), cap.clone()));
        }
    }
    let mut eq_edge = vec![None; net.edges.len()];
    for (k, e) in net.edges.iter().enumerate() {
        if active[e.good] && e.cap.is_positive() {
            eq_edge[k] = Some(g.add_edge(node_agent(e.agent), node_good(n, e.good), e.cap.clone()));
        }
    }
    let mut sink_edge = vec![None; m];
    for j in 0..m {
        if active[j] {
            let cap = sink_cap(j).unwrap_or_else(|| unbounded.clone());
            if cap.is_positive() {
                sink_edge[j] = Some(g.add_edge(node_good(n, j), t, cap));
            }
        }
    }
    LevelNet {
        net: g,
        source_edge,
        eq_edge,
        sink_edge,
        t,
    }
}

/// Exact maximum flow of the equality network with unbounded sink edges.
pub fn max_flow(net: &EqualityNetwork) -> Flow {
    let n = net.source_cap.len();
    let active = vec![true; net.goods];
    let mut lv = build_level_net(net, &net.source_cap, &active, |_| None);
    let value = lv.net.run(0, lv.t);
    let mut agent_good = BTreeMap::new();
    for (k, e) in net.edges.iter().enumerate() {
        if let Some(id) = lv.eq_edge[k] {
            let f = lv.net.flow_on(id).clone();
            if !f.is_zero() {
                *agent_good
                    .entry((e.agent, e.good))
                    .or_insert_with(Rat::zero) += f;
            }
        }
    }
    let sink = (0..net.goods)
        .map(|j| match lv.sink_edge[j] {
            Some(id) => lv.net.flow_on(id).clone(),
            None => Rat::zero(),
        })
        .collect();
    let source = (0..n)
        .map(|i| match lv.source_edge[i] {
            Some(id) => lv.net.flow_on(id).clone(),
            None => Rat::zero(),
        })
        .collect();
    Flow {
        value,
        agent_good,
        sink,
        source,
    }
}

/// Finds the smallest lambda >= lambda_from at which the cut
/// K + sum_{j in tight} max(c_j + lambda, 0) equals vstar.
fn solve_lambda(
    k_const: &Rat,
    tight: &[usize],
    c: &[Rat],
    vstar: &Rat,
) -> Result<Rat> {
    if tight.is_empty() {
        return Err(Error::Internal(
            "balanced flow: empty tight set in lambda equation".into(),
        ));
    }
    let mut bps: Vec<Rat> = tight.iter().map(|&j| -&c[j]).collect();
    bps.sort();
    bps.dedup();
    for k in 0..=bps.len() {
        let lo = if k == 0 { None } else { Some(&bps[k - 1]) };
        let hi = if k == bps.len() { None } else { Some(&bps[k]) };
        // Active (unclipped) goods on this interval.
        let members: Vec<usize> = match lo {
            None => vec![],
            Some(lo) => tight.iter().copied().filter(|&j| -&c[j] <= *lo).collect(),
        };
        if members.is_empty() {
            continue;
        }
        let sum_c: Rat = members.iter().map(|&j| c[j].clone()).fold(Rat::zero(), |a, b| a + b);
        let lambda = (vstar - k_const - sum_c) / Rat::from_integer(BigInt::from(members.len()));
        let lo_ok = lo.map_or(true, |lo| lambda >= *lo);
        let hi_ok = hi.map_or(true, |hi| lambda < *hi);
        if lo_ok && hi_ok {
            return Ok(lambda);
        }
    }
    Err(Error::Internal(
        "balanced flow: lambda equation has no solution".into(),
    ))
}

/// The balanced flow and its surplus vector s_j = l_jt + spent^g_j - p_j.
pub fn balanced_flow(net: &EqualityNetwork) -> Result<(Flow, Vec<Rat>)> {
    let n = net.source_cap.len();
    let m = net.goods;
    let c: Vec<Rat> = (0..m).map(|j| &net.prices[j] - &net.spent_good[j]).collect();

    let mut active = vec![true; m];
    let mut src_rem = net.source_cap.clone();
    let mut committed: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    let mut sink = vec![Rat::zero(); m];
    let mut source_used = vec![Rat::zero(); n];
    let mut expected_vstar: Option<Rat> = None;

    while active.iter().any(|&a| a) {
        // Full max-flow value of the remaining subnetwork.
        let mut free = build_level_net(net, &src_rem, &active, |_| None);
        let vstar = free.net.run(0, free.t);
        if let Some(exp) = &expected_vstar {
            if *exp != vstar {
                return Err(Error::Internal(
                    "balanced flow: residual max-flow value mismatch".into(),
                ));
            }
        }
        if vstar.is_zero() {
            for j in 0..m {
                if active[j] {
                    active[j] = false;
                }
            }
            break;
        }

        // Discrete Newton from below for the smallest lambda with
        // F(lambda) = vstar.
        let mut lambda = active
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a)
            .map(|(j, _)| -&c[j])
            .min()
            .unwrap();
        let cap_at = |lambda: &Rat, j: usize| -> Option<Rat> {
            let v = &c[j] + lambda;
            Some(if v.is_positive() { v } else { Rat::zero() })
        };
        let mut guard = 0usize;
        let (final_lv, final_lambda) = loop {
            guard += 1;
            if guard > 4 * m + 16 {
                return Err(Error::Internal(
                    "balanced flow: lambda search did not converge".into(),
                ));
            }
            let mut lv = build_level_net(net, &src_rem, &active, |j| cap_at(&lambda, j));
            let f = lv.net.run(0, lv.t);
            if f == vstar {
                break (lv, lambda);
            }
            // Minimal min cut; its constant part and its tight goods.
            let side = lv.net.reachable_from(0);
            let mut k_const = Rat::zero();
            for i in 0..n {
                if !side[node_agent(i)] {
                    k_const += &src_rem[i];
                }
            }
            for e in net.edges.iter() {
                if active[e.good]
                    && e.cap.is_positive()
                    && side[node_agent(e.agent)]
                    && !side[node_good(n, e.good)]
                {
                    k_const += &e.cap;
                }
            }
            let tight: Vec<usize> = (0..m)
                .filter(|&j| active[j] && side[node_good(n, j)])
                .collect();
            lambda = solve_lambda(&k_const, &tight, &c, &vstar)?;
        };

        // Maximal min cut: everything that cannot reach t is pinned.
        let to_t = final_lv.net.reaching_to(final_lv.t);
        let pinned: Vec<usize> = (0..m)
            .filter(|&j| active[j] && !to_t[node_good(n, j)])
            .collect();
        if pinned.is_empty() {
            return Err(Error::Internal(
                "balanced flow: no goods pinned at lambda*".into(),
            ));
        }
        let mut pinned_cap_total = Rat::zero();
        for &j in &pinned {
            let cap = cap_at(&final_lambda, j).unwrap();
            sink[j] = cap.clone();
            pinned_cap_total += cap;
            active[j] = false;
        }
        // Commit the witness flow into the pinned goods and shrink the
        // agents' remaining source capacity accordingly.
        for (k, e) in net.edges.iter().enumerate() {
            if pinned.contains(&e.good) {
                if let Some(id) = final_lv.eq_edge[k] {
                    let f = final_lv.net.flow_on(id).clone();
                    if f.is_positive() {
                        src_rem[e.agent] -= &f;
                        source_used[e.agent] += &f;
                        *committed
                            .entry((e.agent, e.good))
                            .or_insert_with(Rat::zero) += f;
                    }
                }
            }
        }
        expected_vstar = Some(&vstar - &pinned_cap_total);
    }

    let value: Rat = sink.iter().fold(Rat::zero(), |a, b| a + b);
    let surplus: Vec<Rat> = (0..m).map(|j| &sink[j] - &c[j]).collect();
    let flow = Flow {
        value,
        agent_good: committed,
        sink,
        source: source_used,
    };
    Ok((flow, surplus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::cross_market;
    use crate::rat::{ri, rq};

    fn seg(rate: i64, frac: Rat) -> Segment {
        Segment {
            rate: BigInt::from(rate),
            budget_fraction: frac,
        }
    }

    #[test]
    fn partitions_spending_example() {
        // budget 10, good1 segments [(4, 3/10), (2, 1/2)], good2 [(3, 1)],
        // p = (1,1): classes at bangs 4 > 3 > 2, capacities 3, 10, 5;
        // cumulative 3 <= 10 < 13 puts the current class at index 1.
        let segments = vec![vec![seg(4, rq(3, 10)), seg(2, rq(1, 2))], vec![seg(3, ri(1))]];
        let prof = partitions_from_segments(&segments, 0, &ri(10), &[ri(1), ri(1)]);
        assert_eq!(prof.classes.len(), 3);
        assert_eq!(prof.classes[0].bang, ri(4));
        assert_eq!(prof.classes[0].segments[0].good, 0);
        assert_eq!(prof.classes[0].segments[0].capacity, ri(3));
        assert_eq!(prof.classes[1].bang, ri(3));
        assert_eq!(prof.classes[1].segments[0].good, 1);
        assert_eq!(prof.classes[2].bang, ri(2));
        assert_eq!(prof.current, Some(1));
        assert_eq!(prof.spent_allocated, ri(3));
        assert_eq!(prof.remaining(), ri(7));
    }

    #[test]
    fn partitions_linear_ties_merge() {
        let segments = vec![vec![seg(1, ri(1))], vec![seg(1, ri(1))]];
        let prof = partitions_from_segments(&segments, 0, &ri(1), &[ri(1), ri(1)]);
        assert_eq!(prof.classes.len(), 1);
        assert_eq!(prof.classes[0].segments.len(), 2);
        assert_eq!(prof.current, Some(0));
        assert_eq!(prof.spent_allocated, ri(0));

        let prof2 = partitions_from_segments(&segments, 0, &ri(1), &[ri(1), ri(2)]);
        assert_eq!(prof2.classes.len(), 2);
        assert_eq!(prof2.classes[0].segments[0].good, 0);
        assert_eq!(prof2.classes[0].bang, ri(1));
        assert_eq!(prof2.classes[1].bang, rq(1, 2));
    }

    #[test]
    fn network_cross_market() {
        let market = cross_market([0, 1], [1, 0]);
        let (net, _) = build_network(&market, &[ri(1), ri(1)]).unwrap();
        assert_eq!(net.source_cap, vec![ri(1), ri(1)]);
        assert_eq!(net.spent_good, vec![ri(0), ri(0)]);
        assert_eq!(net.edges.len(), 2);
        assert_eq!((net.edges[0].agent, net.edges[0].good), (0, 1));
        assert_eq!(net.edges[0].cap, ri(1));
        assert_eq!((net.edges[1].agent, net.edges[1].good), (1, 0));
        assert_eq!(net.edges[1].cap, ri(1));
    }

    #[test]
    fn network_caps_are_budget_fractions() {
        // One agent owning both goods, linear values (1,1): budget 2 at unit
        // prices, each edge capacity B * m_i = 2.
        let market = crate::market::Market::from_parts(
            vec!["g1".into(), "g2".into()],
            vec![crate::market::Agent {
                name: "a1".into(),
                endowment: vec![ri(1), ri(1)],
                utility: UtilitySpec::SpendingConstraint {
                    segments: vec![vec![seg(1, ri(1))], vec![seg(1, ri(1))]],
                },
            }],
        )
        .unwrap();
        let (net, _) = build_network(&market, &[ri(1), ri(1)]).unwrap();
        assert_eq!(net.source_cap, vec![ri(2)]);
        assert_eq!(net.edges[0].cap, ri(2));
        assert_eq!(net.edges[1].cap, ri(2));
    }

    #[test]
    fn network_spending_example_money_identities() {
        // The partition example at scaled prices: agent owns good1, price 10,
        // so budget 10; source cap 7, current edge (i, g2) capacity 10,
        // spent_good[g1] = 3.
        let market = crate::market::Market::from_parts(
            vec!["g1".into(), "g2".into()],
            vec![
                crate::market::Agent {
                    name: "a1".into(),
                    endowment: vec![ri(1), ri(0)],
                    utility: UtilitySpec::SpendingConstraint {
                        segments: vec![
                            vec![seg(40, rq(3, 10)), seg(20, rq(1, 2))],
                            vec![seg(30, ri(1))],
                        ],
                    },
                },
                crate::market::Agent {
                    name: "a2".into(),
                    endowment: vec![ri(0), ri(1)],
                    utility: UtilitySpec::SpendingConstraint {
                        segments: vec![vec![seg(1, ri(1))], vec![]],
                    },
                },
            ],
        )
        .unwrap();
        let p = [ri(10), ri(10)];
        let prof = build_partitions(&market, 0, &p).unwrap();
        assert_eq!(prof.budget, ri(10));
        assert_eq!(prof.current, Some(1));
        assert_eq!(prof.spent_allocated, ri(3));
        let (net, _) = build_network(&market, &p).unwrap();
        assert_eq!(net.source_cap[0], ri(7));
        let e = net.edges.iter().find(|e| e.agent == 0).unwrap();
        assert_eq!(e.good, 1);
        assert_eq!(e.cap, ri(10));
        assert_eq!(net.spent_good[0], ri(3));
    }

    fn hand_net(
        goods: usize,
        prices: Vec<Rat>,
        source_cap: Vec<Rat>,
        edges: Vec<(usize, usize, Rat)>,
        spent_good: Vec<Rat>,
    ) -> EqualityNetwork {
        EqualityNetwork {
            goods,
            prices,
            source_cap,
            edges: edges
                .into_iter()
                .map(|(agent, good, cap)| EqEdge {
                    agent,
                    good,
                    seg: 0,
                    rate: BigInt::one(),
                    cap,
                })
                .collect(),
            spent_good,
        }
    }

    #[test]
    fn max_flow_examples() {
        // Cross market network: both unit edges saturate.
        let net = hand_net(
            2,
            vec![ri(1), ri(1)],
            vec![ri(1), ri(1)],
            vec![(0, 1, ri(1)), (1, 0, ri(1))],
            vec![ri(0), ri(0)],
        );
        let f = max_flow(&net);
        assert_eq!(f.value, ri(2));
        assert_eq!(f.agent_good[&(0, 1)], ri(1));
        assert_eq!(f.agent_good[&(1, 0)], ri(1));

        // Source bottleneck: source cap 7, single edge cap 10.
        let net = hand_net(
            2,
            vec![ri(10), ri(10)],
            vec![ri(7)],
            vec![(0, 1, ri(10))],
            vec![ri(3), ri(0)],
        );
        assert_eq!(max_flow(&net).value, ri(7));

        // Two agents cap (3, 1) into one good.
        let net = hand_net(
            2,
            vec![ri(1), ri(1)],
            vec![ri(3), ri(1)],
            vec![(0, 0, ri(3)), (1, 0, ri(1))],
            vec![ri(0), ri(0)],
        );
        assert_eq!(max_flow(&net).value, ri(4));
    }

    #[test]
    fn balanced_flow_symmetric() {
        let net = hand_net(
            2,
            vec![ri(1), ri(1)],
            vec![ri(2)],
            vec![(0, 0, ri(2)), (0, 1, ri(2))],
            vec![ri(0), ri(0)],
        );
        let (flow, s) = balanced_flow(&net).unwrap();
        assert_eq!(s, vec![ri(0), ri(0)]);
        assert_eq!(flow.sink, vec![ri(1), ri(1)]);
        assert_eq!(flow.value, ri(2));
    }

    #[test]
    fn balanced_flow_cross_at_equilibrium_prices() {
        // a1 sends 1 into g2; a2 splits its budget 2 between g1 and g2 to
        // equalize surpluses: sink flows (1, 2), surplus (0, 0).
        let net = hand_net(
            2,
            vec![ri(1), ri(2)],
            vec![ri(1), ri(2)],
            vec![(0, 1, ri(1)), (1, 0, ri(2)), (1, 1, ri(2))],
            vec![ri(0), ri(0)],
        );
        let (flow, s) = balanced_flow(&net).unwrap();
        assert_eq!(s, vec![ri(0), ri(0)]);
        assert_eq!(flow.agent_good[&(1, 0)], ri(1));
        assert_eq!(flow.agent_good[&(1, 1)], ri(1));
    }

    #[test]
    fn balanced_flow_clipped_at_zero() {
        // Interior optimum would need negative flow into g1; the balanced
        // flow clips it at 0 and pushes everything into g2.
        let net = hand_net(
            2,
            vec![ri(1), ri(3)],
            vec![ri(1)],
            vec![(0, 0, ri(1)), (0, 1, ri(1))],
            vec![ri(0), ri(0)],
        );
        let (flow, s) = balanced_flow(&net).unwrap();
        assert_eq!(s, vec![ri(-1), ri(-2)]);
        assert_eq!(flow.sink, vec![ri(0), ri(1)]);
    }

    #[test]
    fn balanced_flow_value_is_max_flow_value() {
        let net = hand_net(
            3,
            vec![ri(1), ri(2), ri(1)],
            vec![ri(2), rq(3, 2)],
            vec![
                (0, 0, ri(1)),
                (0, 1, ri(2)),
                (1, 1, ri(1)),
                (1, 2, rq(1, 2)),
            ],
            vec![ri(0), rq(1, 2), ri(0)],
        );
        let (flow, s) = balanced_flow(&net).unwrap();
        assert_eq!(flow.value, max_flow(&net).value);
        // Zero-sum shortfall equals unspent source capacity.
        let total_src: Rat = net.source_cap.iter().fold(Rat::zero(), |a, b| a + b);
        let surplus_sum: Rat = s.iter().fold(Rat::zero(), |a, b| a + b);
        let budget_sum: Rat = net
            .prices
            .iter()
            .zip(&net.spent_good)
            .map(|(_, _)| Rat::zero())
            .fold(Rat::zero(), |a, b| a + b);
        let _ = budget_sum;
        let expect: Rat = &flow.value - &total_src;
        // sum s_j = (sum sink + sum spent_g) - sum p = value + spent - p
        let spent: Rat = net.spent_good.iter().fold(Rat::zero(), |a, b| a + b);
        let prices: Rat = net.prices.iter().fold(Rat::zero(), |a, b| a + b);
        assert_eq!(surplus_sum, &flow.value + &spent - &prices);
        let _ = expect;
    }

    #[test]
    fn balanced_flow_deterministic_under_permutation() {
        // Permuting agents and goods permutes the surplus vector exactly.
        let net = hand_net(
            2,
            vec![ri(1), ri(3)],
            vec![ri(1), ri(2)],
            vec![(0, 0, ri(1)), (0, 1, ri(1)), (1, 1, ri(2))],
            vec![ri(0), ri(0)],
        );
        let (_, s) = balanced_flow(&net).unwrap();
        let permuted = hand_net(
            2,
            vec![ri(3), ri(1)],
            vec![ri(2), ri(1)],
            vec![(1, 1, ri(1)), (1, 0, ri(1)), (0, 0, ri(2))],
            vec![ri(0), ri(0)],
        );
        let (_, sp) = balanced_flow(&permuted).unwrap();
        assert_eq!(s[0], sp[1]);
        assert_eq!(s[1], sp[0]);
        let (_, again) = balanced_flow(&net).unwrap();
        assert_eq!(s, again);
    }
}
