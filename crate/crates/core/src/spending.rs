//! Spending-constraint market solver: ratio graph, price rounding, and the
//! exact-oracle instantiation of the ascending-price engine.
//!
//! Prices multiplied round after round would double their bit length each
//! time. The rounding step nudges every price upward onto the grid of
//! ratios with M-bit parts, reconnecting the ratio graph without ever
//! dropping an equality edge, which caps the representation at m*M bits
//! per price.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::config::SolverConfig;
use crate::demand::MarketOracle;
use crate::error::Error;
use crate::flow::check_positive_prices;
use crate::market::Market;
use crate::rat::{ri, Rat};
use crate::wgs::{ascend, update_prices, EngineParams, SearchMode, SolveRun};
use crate::Result;

/// Goods adjacency by price-ratio representability: an edge joins i and j
/// when p_i/p_j in lowest terms has numerator and denominator at most
/// 2^M - 1.
#[derive(Debug, Clone)]
pub struct RatioGraph {
    pub m_bits: u64,
    pub adjacency: Vec<Vec<bool>>,
}

impl RatioGraph {
    /// Component id per good, ids numbered by first member.
    pub fn components(&self) -> Vec<usize> {
        let m = self.adjacency.len();
        let mut comp = vec![usize::MAX; m];
        let mut next = 0;
        for start in 0..m {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = next;
            next += 1;
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(u) = stack.pop() {
                for v in 0..m {
                    if self.adjacency[u][v] && comp[v] == usize::MAX {
                        comp[v] = id;
                        stack.push(v);
                    }
                }
            }
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }
}

/// Builds the ratio graph of a price vector.
pub fn ratio_graph(p: &[Rat], m_bits: u64) -> Result<RatioGraph> {
    check_positive_prices(p)?;
    let bound = ratio_bound(m_bits);
    let m = p.len();
    let mut adjacency = vec![vec![false; m]; m];
    for i in 0..m {
        adjacency[i][i] = true;
        for j in 0..i {
            let ratio = &p[i] / &p[j];
            let ok = *ratio.numer() <= bound && *ratio.denom() <= bound;
            adjacency[i][j] = ok;
            adjacency[j][i] = ok;
        }
    }
    Ok(RatioGraph { m_bits, adjacency })
}

/// 2^M - 1, the part bound shared by the ratio-graph edge test and the
/// rounding target set.
fn ratio_bound(m_bits: u64) -> BigInt {
    (BigInt::one() << (m_bits as usize)) - 1
}

/// Smallest fraction >= r with numerator and denominator <= bound, walking
/// the Stern-Brocot tree with closed-form run lengths. None when even the
/// integer ceiling exceeds the bound.
pub fn min_bounded_fraction_at_least(r: &Rat, bound: &BigInt) -> Option<Rat> {
    assert!(r.numer() > &BigInt::zero(), "needs r > 0");
    if r.numer() <= bound && r.denom() <= bound {
        return Some(r.clone());
    }
    let rn = r.numer();
    let rd = r.denom();
    // Invariant: l < r < u, with u the best bounded upper candidate so far
    // once probed.
    let mut l = (BigInt::zero(), BigInt::one());
    let mut u = (BigInt::one(), BigInt::zero());
    let mut have_upper = false;
    loop {
        let med = (&l.0 + &u.0, &l.1 + &u.1);
        if med.0 > *bound || med.1 > *bound {
            break;
        }
        // Compare mediant with r: med >= r  <=>  med.0 * rd >= rn * med.1.
        if &med.0 * rd >= rn * &med.1 {
            // Move left toward r: u_k = k*l + u keeps u_k >= r while
            // k * (l.d*rn - l.n*rd) <= u.n*rd - u.d*rn.
            let denom = &l.1 * rn - &l.0 * rd; // > 0 since l < r
            let numer = &u.0 * rd - &u.1 * rn; // >= 0 since u >= r
            let mut k = if denom.is_zero() {
                // l equals r; cannot happen since r is not bounded-representable.
                BigInt::one()
            } else {
                &numer / &denom
            };
            if k < BigInt::one() {
                k = BigInt::one();
            }
            // Bound the run by representability.
            for (b, s) in [(&u.0, &l.0), (&u.1, &l.1)] {
                if !s.is_zero() {
                    let cap = (bound - b) / s;
                    if cap < k {
                        k = cap;
                    }
                }
            }
            if k < BigInt::one() {
                break;
            }
            u = (&k * &l.0 + &u.0, &k * &l.1 + &u.1);
            have_upper = true;
        } else {
            // Move right toward r: l_k = l + k*u keeps l_k < r while
            // k * (u.n*rd - u.d*rn) < rn*l.d - l.n*rd.
            let denom = &u.0 * rd - &u.1 * rn; // > 0 since u > r here
            let numer = rn * &l.1 - &l.0 * rd; // > 0 since l < r
            let mut k = if (&numer % &denom).is_zero() {
                &numer / &denom - 1
            } else {
                &numer / &denom
            };
            if k < BigInt::one() {
                k = BigInt::one();
            }
            for (b, s) in [(&l.0, &u.0), (&l.1, &u.1)] {
                if !s.is_zero() {
                    let cap = (bound - b) / s;
                    if cap < k {
                        k = cap;
                    }
                }
            }
            if k < BigInt::one() {
                break;
            }
            l = (&l.0 + &k * &u.0, &l.1 + &k * &u.1);
        }
    }
    if have_upper {
        Some(Rat::new(u.0, u.1))
    } else {
        None
    }
}

/// Rounds prices upward onto M-bit ratios until the ratio graph is
/// connected. The component holding a price-1 good is never raised, so one
/// price stays exactly 1; no equality edge is ever dropped, every price
/// moves by less than the grid gap above it, and the loop merges components
/// so it ends within m-1 iterations.
pub fn rounding(p: &[Rat], m_bits: u64) -> Result<Vec<Rat>> {
    check_positive_prices(p)?;
    let one = Rat::one();
    if p.iter().min() != Some(&one) {
        return Err(Error::Validation(
            "rounding requires a price vector with minimum exactly 1".into(),
        ));
    }
    let bound = ratio_bound(m_bits);
    let mut p = p.to_vec();
    let m = p.len();
    for _merge in 0..m {
        let rg = ratio_graph(&p, m_bits)?;
        let comp_of = rg.components();
        let count = comp_of.iter().copied().max().unwrap_or(0) + 1;
        if count == 1 {
            return Ok(p);
        }
        // Order components: the one holding the lowest-indexed price-1 good
        // first (never raised), the rest by smallest member.
        let anchor_good = (0..m)
            .find(|&j| p[j] == one)
            .expect("minimum price 1 present");
        let anchor = comp_of[anchor_good];
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by_key(|&c| {
            let first = comp_of.iter().position(|&x| x == c).unwrap();
            (c != anchor, first)
        });
        // B[i][j]: cheapest multiplier lifting component order[i] onto a
        // representable ratio with some good of component order[j].
        let mut best: Option<(Rat, usize, usize)> = None;
        for ci in 1..count {
            for cj in 0..ci {
                let mut b_ij: Option<Rat> = None;
                for a in 0..m {
                    if comp_of[a] != order[ci] {
                        continue;
                    }
                    for b in 0..m {
                        if comp_of[b] != order[cj] {
                            continue;
                        }
                        let ratio = &p[a] / &p[b];
                        if let Some(x) = min_bounded_fraction_at_least(&ratio, &bound) {
                            let mult = x / &ratio;
                            if b_ij.as_ref().is_none_or(|cur| mult < *cur) {
                                b_ij = Some(mult);
                            }
                        }
                    }
                }
                if let Some(mult) = b_ij {
                    if best
                        .as_ref()
                        .is_none_or(|(cur, bi, bj)| mult < *cur || (mult == *cur && (ci, cj) < (*bi, *bj)))
                    {
                        best = Some((mult, ci, cj));
                    }
                }
            }
        }
        let Some((mult, ci, _)) = best else {
            return Err(Error::Internal(
                "rounding: no representable merge multiplier".into(),
            ));
        };
        if mult <= one {
            return Err(Error::Internal(
                "rounding: merge multiplier not above 1 yet components differ".into(),
            ));
        }
        let raise: Vec<usize> = (0..m).filter(|&j| comp_of[j] == order[ci]).collect();
        p = update_prices(&p, &mult, &raise)?;
    }
    Err(Error::Internal(
        "rounding did not connect the ratio graph within m-1 merges".into(),
    ))
}

/// Ascending-price solve for a spending-constraint market: exact oracle,
/// smallest gap-closing multiplier over the 2^(2mM+L) grid, prices rounded
/// after every round.
pub fn solve_spending(market: &Market, config: &SolverConfig) -> Result<SolveRun> {
    if !market.all_segment_based() {
        return Err(Error::Unsupported(
            "spending solver needs linear or spending-constraint utilities".into(),
        ));
    }
    if let Some(witness) = market.validate_sufficiency()? {
        let names: Vec<&str> = witness.iter().map(|&i| market.agents[i].name.as_str()).collect();
        return Err(Error::Validation(format!(
            "sufficiency condition fails for agent subset {{{}}}",
            names.join(", ")
        )));
    }
    let m_bits = config.m_bits;
    let mut oracle = MarketOracle::exact(market);
    ascend(
        &mut oracle,
        EngineParams {
            grid_bound: config.spending_grid_bound(),
            mu: ri(0),
            mode: SearchMode::SmallestClosed,
            threshold: config.phi_threshold(),
            max_rounds: config.max_rounds,
            max_bits: config.max_bits,
            round_bound: Some(Box::new(breakpoint_bound(config))),
            post_round: Some(Box::new(move |p: &[Rat]| rounding(p, m_bits))),
            early_exit: None,
        },
    )
}

/// Complexity cap for the structural breakpoints reachable from prices p:
/// both breakpoint families (new equality edges, component equalizations)
/// solve small linear relations in the current prices, budgets and segment
/// rates, so their parts stay within a few multiples of the current price
/// and input bit lengths.
pub(crate) fn breakpoint_bound(config: &SolverConfig) -> impl Fn(&[Rat]) -> BigInt {
    let l = config.l;
    let m = config.goods as u64;
    move |p: &[Rat]| {
        let pbits = crate::rat::max_part_bits(p);
        let log_m = 64 - (m.max(1) - 1).leading_zeros() as u64;
        BigInt::one() << ((4 * pbits + 4 * l + 8 * log_m + 32) as usize)
    }
}
