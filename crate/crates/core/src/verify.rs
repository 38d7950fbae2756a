//! Independent checkers: brute-force demand and balanced-surplus references,
//! equilibrium verification, WGS monotonicity probes and trace-invariant
//! replay. Everything here recomputes from first principles and never calls
//! into the code path it is checking (the max-flow values used by the
//! quadratic reference come from explicit cut enumeration).

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::config::SolverConfig;
use crate::demand::{
    exact_demand_bundles, exact_oracle, reference_surplus, smooth_demand_bundles, OraclePrecision,
};
use crate::error::Error;
use crate::flow::EqualityNetwork;
use crate::linalg::solve_linear_system;
use crate::market::{Market, UtilitySpec};
use crate::rat::{norm1, norm2_sq, pow2, ri, Rat};
use crate::wgs::Trace;
use crate::Result;

/// Verdict of an equilibrium or property check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub passed: bool,
    /// max_j (aggregate demand_j - supply_j), in units of supply.
    pub max_oversell: Rat,
    /// Worst per-agent utility slack against the grid reference, when a
    /// grid reference was computable (smooth utilities, <= 3 goods).
    pub optimality_slack: Option<f64>,
    pub violation: Option<String>,
}

/// Checks the approximate-equilibrium conditions at prices p: every agent
/// receives a demand bundle, and no good's aggregate demand exceeds
/// mu_factor times its (unit) supply.
pub fn check_approx_equilibrium(
    market: &Market,
    p: &[Rat],
    mu_factor: &Rat,
) -> Result<CheckReport> {
    if *mu_factor < Rat::one() {
        return Err(Error::Validation("mu_factor must be >= 1".into()));
    }
    let m = market.goods_count();
    let mut violation: Option<String> = None;
    let mut optimality_slack: Option<f64> = None;

    let bundles = if market.all_segment_based() {
        let (bundles, _) = exact_demand_bundles(market, p)?;
        // Demand-bundle structure: full budget spent whenever a current
        // class exists (sink capacity is unbounded, so max flow saturates
        // the sources).
        for (i, b) in bundles.iter().enumerate() {
            let spend: Rat = b.iter().zip(p).map(|(x, pj)| x * pj).sum();
            let budget = market.budget(i, p);
            if spend > budget {
                violation = Some(format!(
                    "agent {} overspends its budget",
                    market.agents[i].name
                ));
            }
            let prof = crate::flow::build_partitions(market, i, p)?;
            if prof.current.is_some() && spend != budget {
                violation = Some(format!(
                    "agent {} leaves money unspent despite an open class",
                    market.agents[i].name
                ));
            }
        }
        bundles
    } else {
        let precision = OraclePrecision {
            mu: Rat::zero(),
            working_bits: 192,
        };
        let bundles = smooth_demand_bundles(market, p, &precision)?;
        // Optimality against the grid reference on small instances.
        if m <= 3 {
            let mut worst = 0f64;
            for (i, agent) in market.agents.iter().enumerate() {
                let budget = market.budget(i, p);
                let steps = 2000usize;
                let grid = brute_force_demand(&agent.utility, &budget, p, steps)?;
                let u_grid = utility_value(&agent.utility, &grid);
                let u_closed = utility_value(&agent.utility, &bundles[i]);
                let slack = u_grid - u_closed;
                if slack > worst {
                    worst = slack;
                }
                if slack > 10.0 / steps as f64 {
                    violation = Some(format!(
                        "agent {} bundle is {slack:.2e} below the grid maximum",
                        agent.name
                    ));
                }
            }
            optimality_slack = Some(worst);
        }
        bundles
    };

    let mut max_oversell: Option<Rat> = None;
    for j in 0..m {
        let demand: Rat = bundles.iter().map(|b| b[j].clone()).fold(Rat::zero(), |a, b| a + b);
        let oversell = demand - Rat::one();
        if oversell > mu_factor - Rat::one() {
            violation.get_or_insert_with(|| {
                format!(
                    "good {} oversold: demand exceeds {} times supply",
                    market.goods[j], mu_factor
                )
            });
        }
        if max_oversell.as_ref().is_none_or(|cur| oversell > *cur) {
            max_oversell = Some(oversell);
        }
    }
    Ok(CheckReport {
        passed: violation.is_none(),
        max_oversell: max_oversell.unwrap_or_else(Rat::zero),
        optimality_slack,
        violation,
    })
}

fn rat_f64(r: &Rat) -> f64 {
    let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::MAX);
    let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::MAX);
    n / d
}

/// Utility value of a bundle in a monotone-transformed form suitable for
/// argmax comparison (log form for Cobb-Douglas, rho-power sum for CES).
pub fn utility_value(utility: &UtilitySpec, bundle: &[Rat]) -> f64 {
    match utility {
        UtilitySpec::CobbDouglas { exponents } => exponents
            .iter()
            .zip(bundle)
            .map(|(e, x)| {
                if e.is_zero() {
                    0.0
                } else {
                    rat_f64(e) * rat_f64(x).max(1e-300).ln()
                }
            })
            .sum(),
        UtilitySpec::Ces { values, rho } => {
            let r = rat_f64(rho);
            values
                .iter()
                .zip(bundle)
                .map(|(u, x)| rat_f64(u) * rat_f64(x).powf(r))
                .sum()
        }
        UtilitySpec::SpendingConstraint { .. } => f64::NAN,
    }
}

/// Reference demand by grid search over the budget simplex; at most 3 goods.
/// The argmax error scales like 10/grid_steps.
pub fn brute_force_demand(
    utility: &UtilitySpec,
    budget: &Rat,
    p: &[Rat],
    grid_steps: usize,
) -> Result<Vec<Rat>> {
    let m = p.len();
    if m > 3 {
        return Err(Error::Validation("grid reference limited to 3 goods".into()));
    }
    if grid_steps == 0 || grid_steps > 10_000 {
        return Err(Error::Validation("grid_steps must be in 1..=10000".into()));
    }
    if matches!(utility, UtilitySpec::SpendingConstraint { .. }) {
        return Err(Error::Unsupported(
            "grid reference covers smooth utilities; segment demands use the flow characterization"
                .into(),
        ));
    }
    let bundle_at = |shares: &[usize]| -> Vec<Rat> {
        shares
            .iter()
            .zip(p)
            .map(|(&t, pj)| budget * ri(t as i64) / ri(grid_steps as i64) / pj)
            .collect()
    };
    let mut best: Option<(f64, Vec<Rat>)> = None;
    let mut consider = |shares: &[usize]| {
        let b = bundle_at(shares);
        let u = utility_value(utility, &b);
        if best.as_ref().is_none_or(|(bu, _)| u > *bu) {
            best = Some((u, b));
        }
    };
    match m {
        2 => {
            for t in 0..=grid_steps {
                consider(&[t, grid_steps - t]);
            }
        }
        3 => {
            for t1 in 0..=grid_steps {
                for t2 in 0..=(grid_steps - t1) {
                    consider(&[t1, t2, grid_steps - t1 - t2]);
                }
            }
        }
        _ => {
            return Err(Error::Validation("grid reference needs >= 2 goods".into()));
        }
    }
    Ok(best.expect("grid nonempty").1)
}

// ---------------------------------------------------------------------------
// Independent balanced-surplus reference.

/// Max-flow value from the source into a subset of goods, by explicit
/// enumeration of source-side agent subsets (min cut). Entirely independent
/// of the augmenting-path code.
pub fn max_flow_into(net: &EqualityNetwork, goods: &BTreeSet<usize>) -> Rat {
    let n = net.source_cap.len();
    let mut best: Option<Rat> = None;
    for mask in 0u32..(1 << n) {
        let mut cut = Rat::zero();
        for i in 0..n {
            if mask & (1 << i) == 0 {
                cut += &net.source_cap[i];
            }
        }
        for e in &net.edges {
            if mask & (1 << e.agent) != 0 && goods.contains(&e.good) {
                cut += &e.cap;
            }
        }
        if best.as_ref().is_none_or(|b| cut < *b) {
            best = Some(cut);
        }
    }
    best.unwrap_or_else(Rat::zero)
}

/// Exact balanced surplus by KKT active-set enumeration over the polytope
/// of achievable sink-flow vectors {l >= 0 : l(T) <= g(T), l(G) = g(G)},
/// where g is the cut-enumerated max-flow function. At most 3 agents and
/// 3 goods.
pub fn brute_force_balanced_surplus(net: &EqualityNetwork) -> Result<Vec<Rat>> {
    let m = net.goods;
    let n = net.source_cap.len();
    if m > 3 || n > 3 {
        return Err(Error::Validation(
            "KKT reference limited to 3 agents and 3 goods".into(),
        ));
    }
    let c: Vec<Rat> = (0..m)
        .map(|j| &net.prices[j] - &net.spent_good[j])
        .collect();
    let all: BTreeSet<usize> = (0..m).collect();
    let vstar = max_flow_into(net, &all);

    // Proper nonempty subsets with their flow bounds.
    let mut subsets: Vec<(Vec<usize>, Rat)> = Vec::new();
    for mask in 1u32..((1 << m) - 1) {
        let t: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
        let set: BTreeSet<usize> = t.iter().copied().collect();
        subsets.push((t, max_flow_into(net, &set)));
    }
    let n_sub = subsets.len();
    let n_cons = n_sub + m; // subset constraints then nonnegativity

    for active_mask in 0u32..(1 << n_cons) {
        let active_subsets: Vec<usize> =
            (0..n_sub).filter(|i| active_mask & (1 << i) != 0).collect();
        let active_zero: Vec<usize> = (0..m)
            .filter(|j| active_mask & (1 << (n_sub + j)) != 0)
            .collect();
        // Unknowns: l_0..l_{m-1}, y per active subset, z per active zero,
        // theta. Equations: m stationarity, |A| tightness, 1 total.
        let ny = active_subsets.len();
        let nz = active_zero.len();
        let dim = m + ny + nz + 1;
        let mut a = vec![vec![Rat::zero(); dim]; dim];
        let mut b = vec![Rat::zero(); dim];
        // Stationarity: l_j + sum_{T active, j in T} y_T - z_j + theta = c_j
        for j in 0..m {
            a[j][j] = Rat::one();
            for (yi, &si) in active_subsets.iter().enumerate() {
                if subsets[si].0.contains(&j) {
                    a[j][m + yi] = Rat::one();
                }
            }
            for (zi, &zj) in active_zero.iter().enumerate() {
                if zj == j {
                    a[j][m + ny + zi] = -Rat::one();
                }
            }
            a[j][dim - 1] = Rat::one();
            b[j] = c[j].clone();
        }
        // Tightness rows.
        for (yi, &si) in active_subsets.iter().enumerate() {
            for &j in &subsets[si].0 {
                a[m + yi][j] = Rat::one();
            }
            b[m + yi] = subsets[si].1.clone();
        }
        for (zi, &zj) in active_zero.iter().enumerate() {
            a[m + ny + zi][zj] = Rat::one();
            b[m + ny + zi] = Rat::zero();
        }
        // Total flow.
        for j in 0..m {
            a[dim - 1][j] = Rat::one();
        }
        b[dim - 1] = vstar.clone();

        let Ok(sol) = solve_linear_system(&a, &b) else {
            continue;
        };
        let l = &sol[..m];
        let y = &sol[m..m + ny];
        let z = &sol[m + ny..m + ny + nz];
        if y.iter().any(|v| v.is_negative()) || z.iter().any(|v| v.is_negative()) {
            continue;
        }
        if l.iter().any(|v| v.is_negative()) {
            continue;
        }
        let feasible = subsets.iter().all(|(t, g)| {
            let total: Rat = t.iter().map(|&j| l[j].clone()).fold(Rat::zero(), |x, y| x + y);
            total <= *g
        });
        if !feasible {
            continue;
        }
        return Ok((0..m).map(|j| &l[j] - &c[j]).collect());
    }
    Err(Error::Internal(
        "KKT enumeration found no optimum; polytope inconsistent".into(),
    ))
}

/// A vertex of the achievable sink-vector polytope via the greedy
/// polymatroid order; used to sample perturbed feasible surplus vectors.
pub fn greedy_sink_vertex(net: &EqualityNetwork, order: &[usize]) -> Vec<Rat> {
    let mut l = vec![Rat::zero(); net.goods];
    let mut prefix: BTreeSet<usize> = BTreeSet::new();
    let mut prev = Rat::zero();
    for &j in order {
        prefix.insert(j);
        let g = max_flow_into(net, &prefix);
        l[j] = &g - &prev;
        prev = g;
    }
    l
}

/// Max-min fairness probe: for random vertices s' of the feasible surplus
/// polytope, whenever some coordinate of the balanced vector s sits below
/// s', another coordinate with even smaller balanced surplus must sit above
/// its s' counterpart.
pub fn check_max_min_fair(net: &EqualityNetwork, tries: u64, seed: u64) -> Result<CheckReport> {
    let s = brute_force_balanced_surplus(net)?;
    let c: Vec<Rat> = (0..net.goods)
        .map(|j| &net.prices[j] - &net.spent_good[j])
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violation = None;
    for _ in 0..tries {
        let mut order: Vec<usize> = (0..net.goods).collect();
        order.shuffle(&mut rng);
        let l = greedy_sink_vertex(net, &order);
        let s_alt: Vec<Rat> = (0..net.goods).map(|j| &l[j] - &c[j]).collect();
        for i in 0..net.goods {
            if s[i] < s_alt[i] {
                let ok = (0..net.goods).any(|j| s[j] < s[i] && s[j] > s_alt[j]);
                if !ok {
                    violation = Some(format!(
                        "vector from order {order:?} dominates the balanced surplus at good {i}"
                    ));
                }
            }
        }
    }
    Ok(CheckReport {
        passed: violation.is_none(),
        max_oversell: Rat::zero(),
        optimality_slack: None,
        violation,
    })
}

/// WGS probe: raising one price must not decrease any other good's exact
/// surplus.
pub fn check_wgs_monotonicity(
    market: &Market,
    p: &[Rat],
    good: usize,
    delta: &Rat,
) -> Result<CheckReport> {
    if delta.is_negative() {
        return Err(Error::Validation("delta must be >= 0".into()));
    }
    let s = exact_oracle(market, p)?;
    let mut p2 = p.to_vec();
    p2[good] += delta;
    let s2 = exact_oracle(market, &p2)?;
    let mut violation = None;
    for k in 0..market.goods_count() {
        if k != good && s2[k] < s[k] {
            violation = Some(format!(
                "surplus of good {} fell from {} to {} when raising good {}",
                market.goods[k], s[k], s2[k], market.goods[good]
            ));
        }
    }
    Ok(CheckReport {
        passed: violation.is_none(),
        max_oversell: Rat::zero(),
        optimality_slack: None,
        violation,
    })
}

/// Per-claim verdicts of a trace replay.
#[derive(Debug, Clone)]
pub struct TraceCheck {
    pub initial_norm1_ok: bool,
    pub norm1_nonincreasing: bool,
    pub negative_surplus_price_one: bool,
    pub min_price_one: bool,
    pub price_cap_ok: bool,
    pub update_bound_ok: bool,
    pub gap_closure_ok: bool,
    pub potential_decrease_ok: bool,
    pub g1_membership_ok: bool,
    pub big_step_rounds: u64,
    pub big_step_bound: u64,
    pub big_step_ok: bool,
    pub violations: Vec<String>,
}

impl TraceCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays a solve trace against the round invariants: bounded initial
/// 1-norm, non-increasing exact 1-norm, negative-surplus goods at price 1,
/// minimum price pinned at 1, the 2^D1 price cap, the per-round update
/// bound s' <= x s on raised goods, gap closure within 6 mu, strict
/// potential decrease on small-step rounds, G1 membership, and the
/// big-step round ceiling.
///
/// Reference surpluses are exact for segment-based markets and evaluated at
/// `reference_bits` otherwise; `rounded` widens the exact comparisons by
/// the price-rounding perturbation bound m^2 * 2^(1-M).
pub fn check_trace(
    market: &Market,
    config: &SolverConfig,
    trace: &Trace,
    reference_bits: u64,
    rounded: bool,
) -> Result<TraceCheck> {
    let m = market.goods_count();
    let one = Rat::one();
    let mut violations = Vec::new();

    let exact_market = market.all_segment_based();
    let ref_tol = if exact_market {
        Rat::zero()
    } else {
        ri(m as i64) * pow2(-(reference_bits as i64 - 16))
    };
    let round_slack = if rounded {
        ri((m * m) as i64) * pow2(1 - config.m_bits as i64)
    } else {
        Rat::zero()
    };

    let refs: Vec<Vec<Rat>> = trace
        .states
        .iter()
        .map(|st| reference_surplus(market, &st.p, reference_bits))
        .collect::<Result<_>>()?;

    let mut initial_norm1_ok = true;
    if norm1(&refs[0]) > ri(2 * m as i64) {
        initial_norm1_ok = false;
        violations.push("initial surplus 1-norm exceeds 2m".into());
    }

    let mut norm1_nonincreasing = true;
    for w in refs.windows(2) {
        if norm1(&w[1]) > norm1(&w[0]) + &round_slack + &ref_tol {
            norm1_nonincreasing = false;
            violations.push("exact surplus 1-norm increased across a round".into());
        }
    }

    let mut negative_surplus_price_one = true;
    let mut min_price_one = true;
    let mut price_cap_ok = true;
    let cap = config.price_cap();
    for (st, s_ref) in trace.states.iter().zip(&refs) {
        if st.p.iter().min() != Some(&one) {
            min_price_one = false;
            violations.push(format!("round {}: minimum price is not 1", st.t));
        }
        if st.p.iter().max().unwrap() > &cap {
            price_cap_ok = false;
            violations.push(format!("round {}: price exceeds 2^D1", st.t));
        }
        for j in 0..m {
            if s_ref[j] < -&ref_tol && st.p[j] != one {
                negative_surplus_price_one = false;
                violations.push(format!(
                    "round {}: good {} has negative surplus but price {}",
                    st.t, market.goods[j], st.p[j]
                ));
            }
        }
    }

    let mut update_bound_ok = true;
    let mut gap_closure_ok = true;
    let mut potential_decrease_ok = true;
    let mut g1_membership_ok = true;
    let mut big_step_rounds = 0u64;
    let small_step = config.small_step_threshold();
    let six_mu = ri(6) * &config.mu;

    for t in 1..trace.states.len() {
        let prev = &trace.states[t - 1];
        let cur = &trace.states[t];
        let Some(action) = &cur.action else {
            violations.push(format!("round {}: missing action record", cur.t));
            continue;
        };
        // Claim: post-update reference surplus <= x * pre-update on G1.
        for &j in &action.g1 {
            let bound = &action.x * &refs[t - 1][j];
            if refs[t][j] > bound + &round_slack + &ref_tol {
                update_bound_ok = false;
                violations.push(format!(
                    "round {}: surplus of {} exceeds x times its pre-round value",
                    cur.t, market.goods[j]
                ));
            }
        }
        // G1 membership: selected goods had s_tilde > mu.
        for &j in &action.g1 {
            if prev.s_tilde[j] <= config.mu {
                g1_membership_ok = false;
                violations.push(format!(
                    "round {}: good {} entered G1 with surplus <= mu",
                    cur.t, market.goods[j]
                ));
            }
        }
        // Gap closure at round end.
        let min_g1 = action
            .g1
            .iter()
            .map(|&j| &cur.s_tilde[j])
            .min()
            .expect("G1 nonempty");
        let max_g2 = (0..m)
            .filter(|j| !action.g1.contains(j))
            .map(|j| &cur.s_tilde[j])
            .max();
        let rhs = match max_g2 {
            Some(v) => v.max(&config.mu),
            None => &config.mu,
        };
        if *min_g1 > rhs + &six_mu + &round_slack {
            gap_closure_ok = false;
            violations.push(format!("round {}: surplus gap not closed within 6 mu", cur.t));
        }
        // Potential strictly decreases on small-step rounds.
        if action.x < small_step {
            let phi_prev = norm2_sq(&refs[t - 1]);
            let phi_cur = norm2_sq(&refs[t]);
            if phi_cur >= phi_prev {
                potential_decrease_ok = false;
                violations.push(format!(
                    "round {}: potential did not strictly decrease on a small-step round",
                    cur.t
                ));
            }
        } else {
            big_step_rounds += 1;
        }
    }

    // Big-step ceiling C m^4 D1 with C = ceil(2 R2 ln 2).
    let c_const = (2.0 * config.r2 as f64 * std::f64::consts::LN_2).ceil() as u64;
    let big_step_bound = c_const
        .saturating_mul((m as u64).pow(4))
        .saturating_mul(config.d1);
    let big_step_ok = big_step_rounds <= big_step_bound;
    if !big_step_ok {
        violations.push(format!(
            "big-step rounds {big_step_rounds} exceed the ceiling {big_step_bound}"
        ));
    }

    Ok(TraceCheck {
        initial_norm1_ok,
        norm1_nonincreasing,
        negative_surplus_price_one,
        min_price_one,
        price_cap_ok,
        update_bound_ok,
        gap_closure_ok,
        potential_decrease_ok,
        g1_membership_ok,
        big_step_rounds,
        big_step_bound,
        big_step_ok,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{balanced_flow, EqEdge};
    use crate::market::cross_market;
    use crate::rat::rq;
    use num_bigint::BigInt;

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
    fn kkt_reference_matches_spec_examples() {
        // Symmetric 1-agent/2-good: zero surplus.
        let net = hand_net(
            2,
            vec![ri(1), ri(1)],
            vec![ri(2)],
            vec![(0, 0, ri(2)), (0, 1, ri(2))],
            vec![ri(0), ri(0)],
        );
        assert_eq!(
            brute_force_balanced_surplus(&net).unwrap(),
            vec![ri(0), ri(0)]
        );

        // Clipped case from the flow module.
        let net = hand_net(
            2,
            vec![ri(1), ri(3)],
            vec![ri(1)],
            vec![(0, 0, ri(1)), (0, 1, ri(1))],
            vec![ri(0), ri(0)],
        );
        assert_eq!(
            brute_force_balanced_surplus(&net).unwrap(),
            vec![ri(-1), ri(-2)]
        );

        // Cross-market network at p = (1, 2).
        let net = hand_net(
            2,
            vec![ri(1), ri(2)],
            vec![ri(1), ri(2)],
            vec![(0, 1, ri(1)), (1, 0, ri(2)), (1, 1, ri(2))],
            vec![ri(0), ri(0)],
        );
        assert_eq!(
            brute_force_balanced_surplus(&net).unwrap(),
            vec![ri(0), ri(0)]
        );
    }

    #[test]
    fn kkt_reference_agrees_with_level_peeling() {
        let nets = vec![
            hand_net(
                3,
                vec![ri(1), ri(2), rq(3, 2)],
                vec![ri(2), rq(3, 2)],
                vec![
                    (0, 0, ri(1)),
                    (0, 1, ri(2)),
                    (1, 1, ri(1)),
                    (1, 2, rq(1, 2)),
                ],
                vec![ri(0), rq(1, 2), ri(0)],
            ),
            hand_net(
                2,
                vec![ri(1), ri(3)],
                vec![ri(1), ri(2)],
                vec![(0, 0, ri(1)), (0, 1, ri(1)), (1, 1, ri(2))],
                vec![ri(0), ri(0)],
            ),
            hand_net(
                3,
                vec![ri(2), ri(1), ri(1)],
                vec![ri(1), ri(1), ri(1)],
                vec![
                    (0, 0, rq(1, 2)),
                    (0, 1, ri(1)),
                    (1, 1, ri(1)),
                    (1, 2, ri(1)),
                    (2, 2, ri(1)),
                ],
                vec![rq(1, 2), ri(0), ri(0)],
            ),
        ];
        for net in nets {
            let (_, s) = balanced_flow(&net).unwrap();
            let s_ref = brute_force_balanced_surplus(&net).unwrap();
            assert_eq!(s, s_ref);
        }
    }

    #[test]
    fn max_min_fairness_spot_checks() {
        let net = hand_net(
            3,
            vec![ri(1), ri(2), rq(3, 2)],
            vec![ri(2), rq(3, 2)],
            vec![
                (0, 0, ri(1)),
                (0, 1, ri(2)),
                (1, 1, ri(1)),
                (1, 2, rq(1, 2)),
            ],
            vec![ri(0), rq(1, 2), ri(0)],
        );
        let report = check_max_min_fair(&net, 50, 7).unwrap();
        assert!(report.passed, "{:?}", report.violation);
    }

    #[test]
    fn grid_demand_examples() {
        let cd = UtilitySpec::CobbDouglas {
            exponents: vec![ri(1), ri(1)],
        };
        let b = brute_force_demand(&cd, &ri(1), &[ri(1), ri(1)], 1000).unwrap();
        assert!((rat_f64(&b[0]) - 0.5).abs() <= 1e-3);

        let ces = UtilitySpec::Ces {
            values: vec![ri(2), ri(1)],
            rho: rq(1, 2),
        };
        let b = brute_force_demand(&ces, &ri(1), &[ri(1), ri(1)], 1000).unwrap();
        assert!((rat_f64(&b[0]) - 0.8).abs() <= 1e-2);
    }

    #[test]
    fn wgs_monotonicity_on_cross_market() {
        let market = cross_market([0, 1], [1, 2]);
        let report =
            check_wgs_monotonicity(&market, &[ri(1), ri(1)], 1, &rq(1, 2)).unwrap();
        assert!(report.passed, "{:?}", report.violation);
        // delta = 0 keeps the vector identical; trivially monotone.
        let report = check_wgs_monotonicity(&market, &[ri(1), ri(1)], 0, &ri(0)).unwrap();
        assert!(report.passed);
    }

    #[test]
    fn equilibrium_checker_flags_oversell() {
        let market = cross_market([0, 1], [1, 2]);
        let good = check_approx_equilibrium(&market, &[ri(1), ri(2)], &ri(1)).unwrap();
        assert!(good.passed);
        assert_eq!(good.max_oversell, ri(0));

        let bad = check_approx_equilibrium(&market, &[ri(1), ri(1)], &ri(1)).unwrap();
        assert!(!bad.passed);
        assert_eq!(bad.max_oversell, ri(1)); // demand 2 on unit supply
    }

    #[test]
    fn trace_invariants_on_spending_solve() {
        let market = cross_market([0, 1], [1, 2]);
        let config =
            SolverConfig::derive(&market, &rq(1, 1000), &crate::config::Overrides::default())
                .unwrap();
        let run = crate::spending::solve_spending(&market, &config).unwrap();
        let check = check_trace(&market, &config, &run.trace, 128, true).unwrap();
        assert!(check.passed(), "{:?}", check.violations);
    }
}
