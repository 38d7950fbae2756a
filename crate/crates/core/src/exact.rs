//! Exact equilibrium extraction for spending-constraint markets.
//!
//! After the approximate phase, the equality-graph structure at the final
//! prices pins the equilibrium exactly: within each equality component the
//! price ratios are fixed by segment rates, and across goods the budget
//! balance closes the system. Solving that square rational system and
//! re-verifying the structure (equality edges unchanged, source cut still
//! minimal, surplus exactly zero) certifies an exact equilibrium.

use std::cell::RefCell;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::config::{Overrides, SolverConfig};
use crate::demand::{exact_allocation, exact_oracle, MarketOracle};
use crate::error::Error;
use crate::flow::{build_network, max_flow, PartitionProfile};
use crate::linalg::solve_linear_system;
use crate::market::{Market, UtilitySpec};
use crate::rat::{bits_of, ri, Rat};
use crate::spending::rounding;
use crate::wgs::{ascend, update_prices, EngineParams, SearchMode, SolveRun};
use crate::Result;

/// Current-partition equality edge with its segment rate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EgEdge {
    pub agent: usize,
    pub good: usize,
    pub seg: usize,
    pub rate: BigInt,
}

/// Connected components over the bipartite node set agents + goods.
#[derive(Debug, Clone)]
pub struct Components {
    /// Component id per node; agents are nodes 0..n, goods n..n+m.
    pub of: Vec<usize>,
    pub count: usize,
    n: usize,
}

impl Components {
    fn from_edges(n: usize, m: usize, edges: impl Iterator<Item = (usize, usize)>) -> Components {
        let total = n + m;
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            let mut root = x;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = x;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }
        for (a, g) in edges {
            let ra = find(&mut parent, a);
            let rg = find(&mut parent, n + g);
            if ra != rg {
                let (lo, hi) = if ra < rg { (ra, rg) } else { (rg, ra) };
                parent[hi] = lo;
            }
        }
        let mut of = vec![usize::MAX; total];
        let mut count = 0;
        for node in 0..total {
            let root = find(&mut parent, node);
            if of[root] == usize::MAX {
                of[root] = count;
                count += 1;
            }
            of[node] = of[root];
        }
        Components { of, count, n }
    }

    pub fn agent(&self, i: usize) -> usize {
        self.of[i]
    }

    pub fn good(&self, j: usize) -> usize {
        self.of[self.n + j]
    }

    /// Goods per component id.
    pub fn goods_of(&self, m: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for j in 0..m {
            out[self.good(j)].push(j);
        }
        out
    }

    pub fn agents_of(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for i in 0..n {
            out[self.agent(i)].push(i);
        }
        out
    }
}

/// Equality graph EG(p), its extension EG'(p) with endowment and
/// allocated-segment edges, and the allocated-segment set F.
#[derive(Debug, Clone)]
pub struct EqualityGraphs {
    pub agents: usize,
    pub goods: usize,
    pub eg: Vec<EgEdge>,
    pub endowment: Vec<(usize, usize)>,
    /// Allocated segments F as (agent, good, segment index).
    pub allocated: Vec<(usize, usize, usize)>,
    pub eg_comp: Components,
    pub egp_comp: Components,
}

impl EqualityGraphs {
    pub fn eg_edge_pairs(&self) -> BTreeSet<(usize, usize, usize)> {
        self.eg.iter().map(|e| (e.agent, e.good, e.seg)).collect()
    }

    pub fn allocated_set(&self) -> BTreeSet<(usize, usize, usize)> {
        self.allocated.iter().copied().collect()
    }
}

/// Builds EG/EG' from partition profiles.
pub fn graphs_from_profiles(market: &Market, profiles: &[PartitionProfile]) -> EqualityGraphs {
    let n = market.agents_count();
    let m = market.goods_count();
    let mut eg = Vec::new();
    let mut allocated = Vec::new();
    for prof in profiles {
        for s in prof.current_segments() {
            eg.push(EgEdge {
                agent: prof.agent,
                good: s.good,
                seg: s.seg,
                rate: s.rate.clone(),
            });
        }
        for s in prof.allocated_segments() {
            allocated.push((prof.agent, s.good, s.seg));
        }
    }
    eg.sort();
    allocated.sort_unstable();
    let mut endowment = Vec::new();
    for (i, a) in market.agents.iter().enumerate() {
        for j in 0..m {
            if a.endowment[j].is_positive() {
                endowment.push((i, j));
            }
        }
    }
    let eg_comp = Components::from_edges(n, m, eg.iter().map(|e| (e.agent, e.good)));
    let egp_comp = Components::from_edges(
        n,
        m,
        eg.iter()
            .map(|e| (e.agent, e.good))
            .chain(endowment.iter().copied())
            .chain(allocated.iter().map(|&(i, j, _)| (i, j))),
    );
    EqualityGraphs {
        agents: n,
        goods: m,
        eg,
        endowment,
        allocated,
        eg_comp,
        egp_comp,
    }
}

/// Equality graphs at prices p (partitions built internally).
pub fn build_equality_graphs(market: &Market, p: &[Rat]) -> Result<EqualityGraphs> {
    let mut profiles = Vec::with_capacity(market.agents_count());
    for i in 0..market.agents_count() {
        profiles.push(crate::flow::build_partitions(market, i, p)?);
    }
    Ok(graphs_from_profiles(market, &profiles))
}

/// Raises the prices of every EG'-component lacking a price-1 good by the
/// smallest multiplier that creates a new equality edge, until all
/// components contain one. Requires zero surplus on the raised goods (the
/// raise then keeps the allocation feasible and the surplus unchanged).
pub fn raise_disconnected_components(market: &Market, p: &[Rat]) -> Result<(Vec<Rat>, usize)> {
    let one = Rat::one();
    let m = market.goods_count();
    let mut p = p.to_vec();
    let mut raises = 0usize;
    // Each raise merges two EG'-components, so n+m iterations suffice.
    for _ in 0..=(market.agents_count() + m) {
        let (_, profiles, surplus) = exact_allocation(market, &p)?;
        let graphs = graphs_from_profiles(market, &profiles);
        let goods_by_comp = graphs.egp_comp.goods_of(m);
        let target = goods_by_comp
            .iter()
            .enumerate()
            .find(|(_, goods)| !goods.is_empty() && !goods.iter().any(|&j| p[j] == one));
        let Some((comp_id, comp_goods)) = target else {
            return Ok((p, raises));
        };
        for &j in comp_goods {
            if !surplus[j].is_zero() {
                return Err(Error::Verification(format!(
                    "component without a price-1 good has nonzero surplus at good {} \
                     (approximate phase not converged enough)",
                    market.goods[j]
                )));
            }
        }
        // Smallest bang-per-buck crossing from an agent of the component to
        // an outside good.
        let mut best: Option<Rat> = None;
        for prof in &profiles {
            if graphs.egp_comp.agent(prof.agent) != comp_id {
                continue;
            }
            let boundary = match prof.current {
                Some(c) => &prof.classes[c].bang,
                None => match prof.classes.last() {
                    Some(c) => &c.bang,
                    None => continue,
                },
            };
            let UtilitySpec::SpendingConstraint { segments } = &market.agents[prof.agent].utility
            else {
                continue;
            };
            for (g, segs) in segments.iter().enumerate() {
                if graphs.egp_comp.good(g) == comp_id {
                    continue;
                }
                for (k, seg) in segs.iter().enumerate() {
                    let bang = Rat::new(seg.rate.clone(), BigInt::one()) / &p[g];
                    if bang < *boundary {
                        // Crossing at boundary/x = rate/p_g.
                        let x = boundary * &p[g] / Rat::new(seg.rate.clone(), BigInt::one());
                        if best.as_ref().is_none_or(|b| x < *b) {
                            best = Some(x);
                        }
                        break;
                    }
                    let _ = k;
                }
            }
        }
        let Some(x) = best else {
            return Err(Error::Validation(
                "no bang-per-buck crossing exists for a disconnected component; \
                 the sufficiency condition is violated"
                    .into(),
            ));
        };
        p = update_prices(&p, &x, comp_goods)?;
        raises += 1;
    }
    Err(Error::Internal(
        "component raising did not terminate".into(),
    ))
}

/// The square rational system fixing exact equilibrium prices of one
/// EG'-component: a price-1 row, segment-rate ratio equations along a
/// spanning tree of each equality component, and one budget-balance row per
/// equality component except the one holding the price-1 good (the rows sum
/// to zero, so that one is redundant).
#[derive(Debug, Clone)]
pub struct LinearSystem {
    /// Column order: global good indices of the component.
    pub goods: Vec<usize>,
    pub matrix: Vec<Vec<Rat>>,
    pub rhs: Vec<Rat>,
    /// Goods of each equality component, in system order.
    pub components: Vec<Vec<usize>>,
    /// R_{lj} per equality component, columns in `goods` order.
    pub r_rows: Vec<Vec<Rat>>,
    /// Ratio multipliers: p_j = alpha_j * p_rep within each component.
    pub alpha: Vec<Rat>,
    pub price_one_good: usize,
    pub anchor_component: usize,
}

pub fn build_linear_system(
    market: &Market,
    p: &[Rat],
    graphs: &EqualityGraphs,
    profiles: &[PartitionProfile],
    component_goods: &[usize],
) -> Result<LinearSystem> {
    let one = Rat::one();
    let mut goods: Vec<usize> = component_goods.to_vec();
    goods.sort_unstable();
    let col_of = |j: usize| goods.binary_search(&j).ok();
    let egp_id = graphs.egp_comp.good(goods[0]);

    let price_one_good = *goods
        .iter()
        .find(|&&j| p[j] == one)
        .ok_or_else(|| Error::Internal("component has no price-1 good".into()))?;

    // Equality components inside this EG'-component, keyed by eg_comp id.
    let mut comp_ids: Vec<usize> = goods.iter().map(|&j| graphs.eg_comp.good(j)).collect();
    comp_ids.sort_unstable();
    comp_ids.dedup();
    let components: Vec<Vec<usize>> = comp_ids
        .iter()
        .map(|&id| {
            goods
                .iter()
                .copied()
                .filter(|&j| graphs.eg_comp.good(j) == id)
                .collect()
        })
        .collect();
    let agents_in: Vec<Vec<usize>> = comp_ids
        .iter()
        .map(|&id| {
            (0..market.agents_count())
                .filter(|&i| graphs.eg_comp.agent(i) == id)
                .collect()
        })
        .collect();

    // Agents of this EG'-component sitting in agent-only equality
    // components must have spent all their money, else the balance rows
    // cannot close.
    for prof in profiles {
        let i = prof.agent;
        if graphs.egp_comp.agent(i) == egp_id && !comp_ids.contains(&graphs.eg_comp.agent(i)) {
            if !prof.remaining().is_zero() {
                return Err(Error::Verification(format!(
                    "agent {} holds unspendable money outside every equality component",
                    market.agents[i].name
                )));
            }
        }
    }

    // R_{lj} per component.
    let frac_of = |i: usize, j: usize, k: usize| -> &Rat {
        let UtilitySpec::SpendingConstraint { segments } = &market.agents[i].utility else {
            unreachable!("segment-based market");
        };
        &segments[j][k].budget_fraction
    };
    let mut r_rows: Vec<Vec<Rat>> = Vec::with_capacity(components.len());
    for (l, comp) in components.iter().enumerate() {
        let in_comp = |j: usize| comp.binary_search(&j).is_ok();
        let mut row = vec![Rat::zero(); goods.len()];
        for (col, &j) in goods.iter().enumerate() {
            let mut r = Rat::zero();
            for i in 0..market.agents_count() {
                let w = &market.agents[i].endowment[j];
                if w.is_zero() {
                    continue;
                }
                if agents_in[l].contains(&i) {
                    let mut out_frac = Rat::zero();
                    for &(ai, aj, ak) in &graphs.allocated {
                        if ai == i && !in_comp(aj) {
                            out_frac += frac_of(ai, aj, ak);
                        }
                    }
                    r += w * (&one - &out_frac);
                } else {
                    let mut in_frac = Rat::zero();
                    for &(ai, aj, ak) in &graphs.allocated {
                        if ai == i && in_comp(aj) {
                            in_frac += frac_of(ai, aj, ak);
                        }
                    }
                    if !in_frac.is_zero() {
                        r += w * &in_frac;
                    }
                }
            }
            if r.is_negative() || r > one {
                return Err(Error::Internal(format!(
                    "R coefficient out of [0,1] for component {l}, good {}",
                    market.goods[j]
                )));
            }
            row[col] = r;
        }
        r_rows.push(row);
    }
    // Column sums must be exactly 1 (all endowment mass of these goods is
    // inside the EG'-component and fully apportioned).
    for (col, &j) in goods.iter().enumerate() {
        let total: Rat = r_rows.iter().map(|r| r[col].clone()).fold(Rat::zero(), |a, b| a + b);
        if total != one {
            return Err(Error::Internal(format!(
                "R column for good {} sums to {total}, expected 1",
                market.goods[j]
            )));
        }
    }

    let anchor_component = components
        .iter()
        .position(|c| c.binary_search(&price_one_good).is_ok())
        .expect("price-1 good belongs to some component");

    // Assemble rows: price-1, spanning-tree ratio equations, balance rows.
    let dim = goods.len();
    let mut matrix: Vec<Vec<Rat>> = Vec::with_capacity(dim);
    let mut rhs: Vec<Rat> = Vec::with_capacity(dim);
    let mut alpha = vec![Rat::zero(); dim];

    let mut row0 = vec![Rat::zero(); dim];
    row0[col_of(price_one_good).unwrap()] = one.clone();
    matrix.push(row0);
    rhs.push(one.clone());

    for comp in &components {
        // BFS from the lowest good over agent-good equality edges.
        let root = comp[0];
        alpha[col_of(root).unwrap()] = one.clone();
        let mut seen_goods: BTreeSet<usize> = BTreeSet::from([root]);
        let mut seen_agents: BTreeSet<usize> = BTreeSet::new();
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(g0) = queue.pop_front() {
            let a_col = col_of(g0).unwrap();
            for e in graphs.eg.iter().filter(|e| e.good == g0) {
                if seen_agents.contains(&e.agent) {
                    continue;
                }
                seen_agents.insert(e.agent);
                let entry_rate = e.rate.clone();
                for e2 in graphs.eg.iter().filter(|e2| e2.agent == e.agent) {
                    if seen_goods.contains(&e2.good) {
                        continue;
                    }
                    seen_goods.insert(e2.good);
                    queue.push_back(e2.good);
                    // entry_rate * p_g - e2.rate * p_g0 = 0
                    let g_col = col_of(e2.good).ok_or_else(|| {
                        Error::Internal("equality edge leaves the component".into())
                    })?;
                    let mut row = vec![Rat::zero(); dim];
                    row[g_col] = Rat::from_integer(entry_rate.clone());
                    row[a_col] = -Rat::from_integer(e2.rate.clone());
                    matrix.push(row);
                    rhs.push(Rat::zero());
                    let a = &alpha[a_col] * Rat::new(e2.rate.clone(), entry_rate.clone());
                    alpha[g_col] = a;
                }
            }
        }
        if seen_goods.len() != comp.len() {
            return Err(Error::Internal(
                "equality component not spanned by its edges".into(),
            ));
        }
    }

    for (l, comp) in components.iter().enumerate() {
        if l == anchor_component {
            continue;
        }
        let mut row: Vec<Rat> = r_rows[l].iter().map(|r| -r).collect();
        for &j in comp {
            let c = col_of(j).unwrap();
            row[c] += &one;
        }
        matrix.push(row);
        rhs.push(Rat::zero());
    }

    if matrix.len() != dim {
        return Err(Error::Internal(format!(
            "linear system is {}x{dim}, expected square",
            matrix.len()
        )));
    }
    Ok(LinearSystem {
        goods,
        matrix,
        rhs,
        components,
        r_rows,
        alpha,
        price_one_good,
        anchor_component,
    })
}

/// The reduced one-variable-per-component form, built only to check the
/// sign/column-sum structure of its coefficient matrix N.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub t: Vec<Rat>,
    pub s: Vec<Vec<Rat>>,
    pub n: Vec<Vec<Rat>>,
}

pub fn reduced_matrices(system: &LinearSystem) -> ReducedSystem {
    let k = system.components.len();
    let col_of = |j: usize| system.goods.binary_search(&j).unwrap();
    let t: Vec<Rat> = system
        .components
        .iter()
        .map(|comp| {
            comp.iter()
                .map(|&j| system.alpha[col_of(j)].clone())
                .fold(Rat::zero(), |a, b| a + b)
        })
        .collect();
    let mut s = vec![vec![Rat::zero(); k]; k];
    for l in 0..k {
        for (lp, comp) in system.components.iter().enumerate() {
            s[l][lp] = comp
                .iter()
                .map(|&j| &system.alpha[col_of(j)] * &system.r_rows[l][col_of(j)])
                .fold(Rat::zero(), |a, b| a + b);
        }
    }
    let mut n = vec![vec![Rat::zero(); k]; k];
    for l in 0..k {
        for lp in 0..k {
            n[l][lp] = if l == lp {
                &t[l] - &s[l][lp]
            } else {
                -s[l][lp].clone()
            };
        }
    }
    ReducedSystem { t, s, n }
}

/// Outcome details of an extraction.
#[derive(Debug, Clone)]
pub struct ExtractReport {
    /// The input prices already had exactly zero surplus.
    pub already_exact: bool,
    /// Component raises applied before solving.
    pub raises: usize,
    /// Equality edges at the extracted prices vs. the input prices.
    pub eg_preserved: bool,
    pub eg_missing: usize,
    pub eg_extra: usize,
    /// The source-side cut is a min cut of N(p') (all budgets spendable).
    pub min_cut_ok: bool,
    /// exact_oracle(p') is the all-zero vector.
    pub zero_surplus: bool,
    /// Largest denominator bit length over the extracted prices.
    pub max_denominator_bits: u64,
}

fn denom_bits(p: &[Rat]) -> u64 {
    p.iter().map(|x| bits_of(x.denom())).max().unwrap_or(1)
}

/// Converts an approximate equilibrium into an exact one: raises
/// disconnected components, solves the per-component rational systems, and
/// verifies (a) the equality graph is unchanged and (b) the source cut is a
/// min cut, which together certify exactly zero surplus.
pub fn extract_exact(market: &Market, p_approx: &[Rat]) -> Result<(Vec<Rat>, ExtractReport)> {
    if !market.all_segment_based() {
        return Err(Error::Unsupported(
            "exact extraction needs linear or spending-constraint utilities".into(),
        ));
    }
    let s = exact_oracle(market, p_approx)?;
    if s.iter().all(Rat::is_zero) {
        return Ok((
            p_approx.to_vec(),
            ExtractReport {
                already_exact: true,
                raises: 0,
                eg_preserved: true,
                eg_missing: 0,
                eg_extra: 0,
                min_cut_ok: true,
                zero_surplus: true,
                max_denominator_bits: denom_bits(p_approx),
            },
        ));
    }

    let (p1, raises) = raise_disconnected_components(market, p_approx)?;
    let (_, profiles, _) = exact_allocation(market, &p1)?;
    let graphs = graphs_from_profiles(market, &profiles);

    let mut p_prime = p1.clone();
    for comp_goods in graphs.egp_comp.goods_of(market.goods_count()) {
        if comp_goods.is_empty() {
            continue;
        }
        let system = build_linear_system(market, &p1, &graphs, &profiles, &comp_goods)?;
        let sol = solve_linear_system(&system.matrix, &system.rhs)?;
        // The dropped balance row must hold automatically.
        let anchor = &system.components[system.anchor_component];
        let mut check = Rat::zero();
        for (col, &j) in system.goods.iter().enumerate() {
            if anchor.binary_search(&j).is_ok() {
                check += &sol[col];
            }
            check -= &system.r_rows[system.anchor_component][col] * &sol[col];
        }
        if !check.is_zero() {
            return Err(Error::Internal(
                "dropped balance row not satisfied by the solution".into(),
            ));
        }
        for (col, &j) in system.goods.iter().enumerate() {
            if !sol[col].is_positive() {
                return Err(Error::Verification(format!(
                    "extracted price of {} is not positive ({})",
                    market.goods[j], sol[col]
                )));
            }
            p_prime[j] = sol[col].clone();
        }
    }

    // Gate (a): equality edges and allocated segments unchanged.
    let graphs2 = build_equality_graphs(market, &p_prime)?;
    let before = graphs.eg_edge_pairs();
    let after = graphs2.eg_edge_pairs();
    let missing = before.difference(&after).count();
    let extra = after.difference(&before).count();
    if missing > 0 || extra > 0 {
        return Err(Error::Verification(format!(
            "equality graph changed under extracted prices: {missing} edge(s) lost, {extra} gained"
        )));
    }
    if graphs.allocated_set() != graphs2.allocated_set() {
        return Err(Error::Verification(
            "allocated segments changed under extracted prices".into(),
        ));
    }

    // Gate (b): every agent can spend its full budget, i.e. the source side
    // is a min cut of N(p').
    let (net, _) = build_network(market, &p_prime)?;
    let total_src: Rat = net.source_cap.iter().fold(Rat::zero(), |a, b| a + b);
    let flow = max_flow(&net);
    if flow.value != total_src {
        return Err(Error::Verification(format!(
            "source cut is not minimal at extracted prices: max flow {} < budgets {}",
            flow.value, total_src
        )));
    }

    let s_final = exact_oracle(market, &p_prime)?;
    if !s_final.iter().all(Rat::is_zero) {
        return Err(Error::Verification(
            "extracted prices do not clear the market exactly".into(),
        ));
    }

    let report = ExtractReport {
        already_exact: false,
        raises,
        eg_preserved: true,
        eg_missing: 0,
        eg_extra: 0,
        min_cut_ok: true,
        zero_surplus: true,
        max_denominator_bits: denom_bits(&p_prime),
    };
    Ok((p_prime, report))
}

/// Extraction attempt that treats structural gate failures as "not yet"
/// rather than hard errors.
fn try_extract(market: &Market, p: &[Rat]) -> Result<Option<(Vec<Rat>, ExtractReport)>> {
    match extract_exact(market, p) {
        Ok(out) => Ok(Some(out)),
        Err(Error::Verification(_))
        | Err(Error::RankDeficient(_))
        | Err(Error::Validation(_))
        | Err(Error::OracleInconsistent(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The exact-phase accuracy 1/(m^(4m) * 2^(4 m^2 L)); refuses instances
/// whose exponent would be impractically large.
pub fn exact_epsilon(goods: usize, l: u64) -> Result<Rat> {
    let m = goods as u64;
    let shift = 4 * m * m * l;
    let log_m_pow = 4 * m * (64 - (m.max(1) - 1).leading_zeros() as u64);
    if shift + log_m_pow > 250_000 {
        return Err(Error::Validation(format!(
            "exact mode needs epsilon with about {} bits for m={goods}, L={l}; \
             instance too large for the exact pipeline",
            shift + log_m_pow
        )));
    }
    let base = BigInt::from(goods).pow(4 * m as u32);
    Ok(Rat::new(BigInt::one(), base << (shift as usize)))
}

/// Result of the full exact pipeline.
#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub prices: Vec<Rat>,
    pub run: SolveRun,
    pub report: ExtractReport,
    pub config: SolverConfig,
}

/// Full exact pipeline: approximate phase at the extraction accuracy with
/// rounding, an extraction attempt after every round (an early success is
/// certified by the verification gates), and a final extraction once the
/// potential threshold is reached.
pub fn solve_exact_market(market: &Market, overrides: &Overrides) -> Result<ExactOutcome> {
    if !market.all_segment_based() {
        return Err(Error::Unsupported(
            "exact mode needs linear or spending-constraint utilities".into(),
        ));
    }
    if let Some(witness) = market.validate_sufficiency()? {
        let names: Vec<&str> = witness
            .iter()
            .map(|&i| market.agents[i].name.as_str())
            .collect();
        return Err(Error::Validation(format!(
            "sufficiency condition fails for agent subset {{{}}}",
            names.join(", ")
        )));
    }
    let l = overrides.l.unwrap_or(market.input_bits).max(1);
    let epsilon = exact_epsilon(market.goods_count(), l)?;
    let config = SolverConfig::derive(market, &epsilon, overrides)?;
    let m_bits = config.m_bits;

    let found: RefCell<Option<(Vec<Rat>, ExtractReport)>> = RefCell::new(None);
    let mut oracle = MarketOracle::exact(market);
    let run = ascend(
        &mut oracle,
        EngineParams {
            grid_bound: config.spending_grid_bound(),
            mu: ri(0),
            mode: SearchMode::SmallestClosed,
            threshold: config.phi_threshold(),
            max_rounds: config.max_rounds,
            max_bits: config.max_bits,
            round_bound: Some(Box::new(crate::spending::breakpoint_bound(&config))),
            post_round: Some(Box::new(move |p: &[Rat]| rounding(p, m_bits))),
            early_exit: Some(Box::new(|p: &[Rat], _s: &[Rat]| {
                match try_extract(market, p)? {
                    Some(out) => {
                        *found.borrow_mut() = Some(out);
                        Ok(true)
                    }
                    None => Ok(false),
                }
            })),
        },
    )?;

    let (prices, report) = match found.into_inner() {
        Some(out) => out,
        None => {
            if !run.converged {
                return Err(Error::NonConvergence {
                    rounds: run.trace.rounds(),
                    detail: "approximate phase exhausted its round budget".into(),
                });
            }
            extract_exact(market, &run.prices)?
        }
    };
    Ok(ExactOutcome {
        prices,
        run,
        report,
        config,
    })
}
