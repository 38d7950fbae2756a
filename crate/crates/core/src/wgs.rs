//! The ascending-price round engine: gap finding over sorted surpluses,
//! multiplicative price updates on the high-surplus group, and binary search
//! for the price multiplier over a bounded rational grid navigated through
//! the Stern-Brocot tree.
//!
//! Two instantiations share the engine. The smooth-market solver uses a
//! mu-approximate oracle and picks the largest multiplier keeping the
//! surplus gap open; the spending-constraint solver uses the exact oracle,
//! picks the smallest multiplier closing the gap (landing exactly on a
//! breakpoint), and rounds prices after every round.

use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::config::SolverConfig;
use crate::demand::{OraclePrecision, SurplusOracle};
use crate::error::Error;
use crate::market::Market;
use crate::rat::{max_part_bits, norm2_sq, Rat};
use crate::Result;

/// Squared l2-norm of a surplus vector, the potential driving termination.
pub fn potential(s: &[Rat]) -> Rat {
    norm2_sq(s)
}

/// Multiplies prices of goods in `raise` by x > 1; everything else unchanged.
pub fn update_prices(p: &[Rat], x: &Rat, raise: &[usize]) -> Result<Vec<Rat>> {
    if *x <= Rat::one() {
        return Err(Error::Validation(format!(
            "price multiplier must exceed 1, got {x}"
        )));
    }
    if raise.is_empty() {
        return Err(Error::Validation("empty update set".into()));
    }
    let mut out = p.to_vec();
    for &j in raise {
        out[j] = &out[j] * x;
    }
    Ok(out)
}

/// The bounded multiplier grid P = { a/b : a > b, a,b positive integers
/// <= bound }. Consecutive elements differ by less than 1/bound.
#[derive(Debug, Clone)]
pub struct MultiplierGrid {
    pub bound: BigInt,
}

impl MultiplierGrid {
    pub fn new(bound: BigInt) -> MultiplierGrid {
        MultiplierGrid { bound }
    }

    pub fn contains(&self, x: &Rat) -> bool {
        *x > Rat::one() && *x.numer() <= self.bound && *x.denom() <= self.bound
    }
}

/// Descending sort order of a surplus vector, ties broken by good index.
pub fn surplus_order(s: &[Rat]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].cmp(&s[a]).then(a.cmp(&b)));
    order
}

/// Finds the smallest gap index k in the descending surplus order: either
/// the (k+1)-st surplus drops to mu or below, or the k-th exceeds the
/// (k+1)-st by more than a factor (1 + 1/m). Returns (k, G1, G2).
pub fn find_gap(s: &[Rat], mu: &Rat) -> Result<(usize, Vec<usize>, Vec<usize>)> {
    let m = s.len();
    let order = surplus_order(s);
    let factor = Rat::one() + Rat::new(BigInt::one(), BigInt::from(m));
    for k in 1..m {
        let upper = &s[order[k - 1]];
        let lower = &s[order[k]];
        if *lower <= *mu || *upper > &factor * lower {
            return Ok((k, order[..k].to_vec(), order[k..].to_vec()));
        }
    }
    Err(Error::OracleInconsistent(
        "no gap index exists; surplus vector sums too high".into(),
    ))
}

/// Outcome of a Stern-Brocot boundary search over the grid restricted to
/// x > 1: the largest grid point where the predicate held and the smallest
/// where it failed, under the monotone-predicate assumption.
pub struct GridBoundary {
    pub last_true: Option<Rat>,
    pub first_false: Option<Rat>,
    pub probes: u64,
    pub probe_log: Vec<(Rat, bool)>,
}

/// Walks the Stern-Brocot tree between 1/1 and infinity, accelerating runs
/// with exponential plus binary search so the probe count stays logarithmic
/// in the bound. Every probe is a mediant, so numerators and denominators
/// never exceed `bound`.
pub fn grid_boundary(
    bound: &BigInt,
    mut probe: impl FnMut(&Rat) -> Result<bool>,
) -> Result<GridBoundary> {
    type Frac = (BigInt, BigInt);
    let mut log: Vec<(Rat, bool)> = Vec::new();
    let mut l: Frac = (BigInt::one(), BigInt::one());
    let mut r: Frac = (BigInt::one(), BigInt::zero());
    let mut l_probed = false;
    let mut r_probed = false;

    // Largest k with base + k*step within both bounds; at least 1 when the
    // mediant (k = 1) already fits.
    let max_steps = |base: &Frac, step: &Frac, bound: &BigInt| -> BigInt {
        let mut k: Option<BigInt> = None;
        for (b, s) in [(&base.0, &step.0), (&base.1, &step.1)] {
            if s.is_zero() {
                continue;
            }
            let cap = (bound - b) / s;
            k = Some(match k {
                Some(cur) if cur <= cap => cur,
                _ => cap,
            });
        }
        k.expect("step has a positive component")
    };

    // Longest prefix of a run with the same predicate value as its start:
    // probes the maximal in-bounds step first (a full run costs O(1) probes
    // even for astronomical bounds), then exponential doubling with a binary
    // finish. `frac_at(k)` is the k-step point, `want` the value that keeps
    // the run going.
    let mut run_length = |kmax: BigInt,
                          want: bool,
                          frac_at: &dyn Fn(&BigInt) -> Frac,
                          log: &mut Vec<(Rat, bool)>,
                          probe: &mut dyn FnMut(&Rat) -> Result<bool>|
     -> Result<BigInt> {
        let mut lo = BigInt::one(); // known: predicate == want
        if kmax > lo {
            let f = frac_at(&kmax);
            let x = Rat::new(f.0, f.1);
            let v = probe(&x)?;
            log.push((x, v));
            if v == want {
                return Ok(kmax);
            }
            let mut hi = kmax; // known: predicate != want
            let mut step = BigInt::one();
            loop {
                let cand = (&lo + &step).min(&hi - 1u32);
                if cand == lo {
                    break;
                }
                let f = frac_at(&cand);
                let x = Rat::new(f.0, f.1);
                let v = probe(&x)?;
                log.push((x, v));
                if v == want {
                    lo = cand;
                    step = &step * 2;
                } else {
                    hi = cand;
                    // Binary finish within (lo, hi).
                    while &hi - &lo > BigInt::one() {
                        let mid = (&lo + &hi) / 2;
                        let f = frac_at(&mid);
                        let x = Rat::new(f.0, f.1);
                        let v = probe(&x)?;
                        log.push((x, v));
                        if v == want {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    break;
                }
            }
        }
        Ok(lo)
    };

    loop {
        let med = (&l.0 + &r.0, &l.1 + &r.1);
        if med.0 > *bound || med.1 > *bound {
            break;
        }
        let x = Rat::new(med.0.clone(), med.1.clone());
        let v = probe(&x)?;
        log.push((x, v));
        if v {
            // Run of right-moves: l_k = l + k*r while the predicate holds.
            let kmax = max_steps(&l, &r, bound);
            let (lc, rc) = (l.clone(), r.clone());
            let k = run_length(
                kmax,
                true,
                &|k: &BigInt| (&lc.0 + k * &rc.0, &lc.1 + k * &rc.1),
                &mut log,
                &mut probe,
            )?;
            l = (&l.0 + &k * &r.0, &l.1 + &k * &r.1);
            l_probed = true;
        } else {
            // Run of left-moves: r_k = k*l + r while the predicate fails.
            let kmax = max_steps(&r, &l, bound);
            let (lc, rc) = (l.clone(), r.clone());
            let k = run_length(
                kmax,
                false,
                &|k: &BigInt| (k * &lc.0 + &rc.0, k * &lc.1 + &rc.1),
                &mut log,
                &mut probe,
            )?;
            r = (&k * &l.0 + &r.0, &k * &l.1 + &r.1);
            r_probed = true;
        }
    }
    Ok(GridBoundary {
        last_true: if l_probed {
            Some(Rat::new(l.0, l.1))
        } else {
            None
        },
        first_false: if r_probed {
            Some(Rat::new(r.0, r.1))
        } else {
            None
        },
        probes: log.len() as u64,
        probe_log: log,
    })
}

/// One traced round boundary: state t holds the prices after round t (t = 0
/// is the all-ones start), the oracle surplus there, its potential, and the
/// action that produced it.
#[derive(Debug, Clone)]
pub struct RoundState {
    pub t: u64,
    pub p: Vec<Rat>,
    pub s_tilde: Vec<Rat>,
    pub phi: Rat,
    pub action: Option<RoundAction>,
}

#[derive(Debug, Clone)]
pub struct RoundAction {
    pub k: usize,
    pub g1: Vec<usize>,
    pub x: Rat,
    pub probes: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub states: Vec<RoundState>,
    pub anomalies: Vec<String>,
}

impl Trace {
    pub fn rounds(&self) -> u64 {
        self.states.len().saturating_sub(1) as u64
    }

    pub fn final_state(&self) -> &RoundState {
        self.states.last().expect("trace has at least the start state")
    }
}

/// Result of an ascending-price solve.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub prices: Vec<Rat>,
    pub trace: Trace,
    pub oracle_calls: u64,
    /// False when the round budget ran out before the potential threshold.
    pub converged: bool,
}

pub(crate) enum SearchMode {
    /// Largest x keeping min_{G1} s' >= max({s' on G2} u {mu}).
    LargestOpen,
    /// Smallest x reaching min_{G1} s' <= max({s' on G2} u {0}).
    SmallestClosed,
}

pub(crate) struct EngineParams<'a> {
    pub grid_bound: BigInt,
    pub mu: Rat,
    pub mode: SearchMode,
    pub threshold: Rat,
    pub max_rounds: u64,
    pub max_bits: Option<u64>,
    /// Per-round reduced grid bound (still a subset of `grid_bound`). In
    /// exact-oracle markets every predicate flip is a structural breakpoint
    /// whose numerator/denominator size is bounded by the current price
    /// complexity, so the search can run on a much smaller grid; if it finds
    /// no boundary there it is retried on the full grid.
    #[allow(clippy::type_complexity)]
    pub round_bound: Option<Box<dyn Fn(&[Rat]) -> BigInt + 'a>>,
    #[allow(clippy::type_complexity)]
    pub post_round: Option<Box<dyn Fn(&[Rat]) -> Result<Vec<Rat>> + 'a>>,
    /// Consulted after each round with (prices, surplus); returning true
    /// stops the loop before the potential threshold is reached.
    #[allow(clippy::type_complexity)]
    pub early_exit: Option<Box<dyn FnMut(&[Rat], &[Rat]) -> Result<bool> + 'a>>,
}

impl Default for EngineParams<'_> {
    fn default() -> Self {
        EngineParams {
            grid_bound: BigInt::from(2),
            mu: Rat::zero(),
            mode: SearchMode::SmallestClosed,
            threshold: Rat::zero(),
            max_rounds: u64::MAX,
            max_bits: None,
            round_bound: None,
            post_round: None,
            early_exit: None,
        }
    }
}

fn min_over<'s>(s: &'s [Rat], idx: &[usize]) -> &'s Rat {
    idx.iter().map(|&i| &s[i]).min().expect("nonempty set")
}

fn max_over<'s>(s: &'s [Rat], idx: &[usize]) -> Option<&'s Rat> {
    idx.iter().map(|&i| &s[i]).max()
}

pub(crate) fn ascend(oracle: &mut dyn SurplusOracle, mut params: EngineParams) -> Result<SolveRun> {
    let m = oracle.goods();
    let mut p: Vec<Rat> = vec![Rat::one(); m];
    let mut trace = Trace::default();

    let mut s = oracle.query(&p)?;
    let mut phi = potential(&s);
    trace.states.push(RoundState {
        t: 0,
        p: p.clone(),
        s_tilde: s.clone(),
        phi: phi.clone(),
        action: None,
    });

    let mut t: u64 = 0;
    while phi >= params.threshold {
        t += 1;
        if t > params.max_rounds {
            return Ok(SolveRun {
                prices: p,
                oracle_calls: oracle.calls(),
                trace,
                converged: false,
            });
        }
        if let Some(cap) = params.max_bits {
            if max_part_bits(&p) > cap {
                return Err(Error::BitBudget(format!(
                    "price representation exceeded {cap} bits in round {t}"
                )));
            }
        }
        let (k, g1, g2) = find_gap(&s, &params.mu)?;

        // Memoized probe: gap-open predicate as a function of the multiplier.
        let mut cache: HashMap<Rat, Rc<Vec<Rat>>> = HashMap::new();
        let mut surplus_at = |x: &Rat, oracle: &mut dyn SurplusOracle| -> Result<Rc<Vec<Rat>>> {
            if let Some(v) = cache.get(x) {
                return Ok(Rc::clone(v));
            }
            let p2 = update_prices(&p, x, &g1)?;
            let v = Rc::new(oracle.query(&p2)?);
            cache.insert(x.clone(), Rc::clone(&v));
            Ok(v)
        };
        let floor = match params.mode {
            SearchMode::LargestOpen => params.mu.clone(),
            SearchMode::SmallestClosed => Rat::zero(),
        };
        let open = |s2: &[Rat]| -> bool {
            let lo = min_over(s2, &g1);
            let hi = max_over(s2, &g2);
            match params.mode {
                // Closed under >=: the largest x may sit exactly at the tie.
                SearchMode::LargestOpen => match hi {
                    Some(h) => lo >= h.max(&floor),
                    None => lo >= &floor,
                },
                // Open under >: the smallest closing x satisfies <=.
                SearchMode::SmallestClosed => match hi {
                    Some(h) => lo > h.max(&floor),
                    None => lo > &floor,
                },
            }
        };
        let reduced = params
            .round_bound
            .as_ref()
            .map(|f| f(&p).min(params.grid_bound.clone()));
        let mut boundary = {
            let bound = reduced.as_ref().unwrap_or(&params.grid_bound);
            grid_boundary(bound, |x| {
                let s2 = surplus_at(x, oracle)?;
                Ok(open(&s2))
            })?
        };
        let missing = match params.mode {
            SearchMode::LargestOpen => boundary.last_true.is_none(),
            SearchMode::SmallestClosed => boundary.first_false.is_none(),
        };
        if missing && reduced.is_some_and(|r| r < params.grid_bound) {
            boundary = grid_boundary(&params.grid_bound, |x| {
                let s2 = surplus_at(x, oracle)?;
                Ok(open(&s2))
            })?;
        }
        check_monotone(&boundary.probe_log, t, &mut trace.anomalies);
        let x = match params.mode {
            SearchMode::LargestOpen => boundary.last_true.clone().ok_or_else(|| {
                Error::OracleInconsistent(format!(
                    "round {t}: surplus gap already closed at the smallest grid multiplier"
                ))
            })?,
            SearchMode::SmallestClosed => boundary.first_false.clone().ok_or_else(|| {
                Error::OracleInconsistent(format!(
                    "round {t}: surplus gap never closes within the multiplier grid"
                ))
            })?,
        };
        let p_raised = update_prices(&p, &x, &g1)?;
        let cached = cache.get(&x).map(Rc::clone);
        p = match &params.post_round {
            Some(hook) => hook(&p_raised)?,
            None => p_raised.clone(),
        };
        s = if p == p_raised {
            match cached {
                Some(v) => v.as_ref().clone(),
                None => oracle.query(&p)?,
            }
        } else {
            oracle.query(&p)?
        };
        phi = potential(&s);
        trace.states.push(RoundState {
            t,
            p: p.clone(),
            s_tilde: s.clone(),
            phi: phi.clone(),
            action: Some(RoundAction {
                k,
                g1: g1.clone(),
                x,
                probes: boundary.probes,
            }),
        });
        if let Some(hook) = params.early_exit.as_mut() {
            if hook(&p, &s)? {
                break;
            }
        }
    }
    Ok(SolveRun {
        prices: p,
        oracle_calls: oracle.calls(),
        trace,
        converged: true,
    })
}

/// Flags probe sequences inconsistent with a monotone predicate; the search
/// assumes monotonicity, so anomalies are surfaced rather than fatal.
fn check_monotone(log: &[(Rat, bool)], round: u64, anomalies: &mut Vec<String>) {
    let mut sorted: Vec<&(Rat, bool)> = log.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut seen_false_at: Option<&Rat> = None;
    for (x, v) in sorted {
        match (v, &seen_false_at) {
            (false, None) => seen_false_at = Some(x),
            (true, Some(first_false)) => {
                anomalies.push(format!(
                    "round {round}: non-monotone predicate, true at {x} after false at {first_false}"
                ));
                return;
            }
            _ => {}
        }
    }
}

/// Ascending-price solver for markets with continuous WGS demand, driven by
/// a mu-approximate oracle. Starts from unit prices and terminates once the
/// squared surplus norm drops below the configured threshold.
pub fn solve_wgs(oracle: &mut dyn SurplusOracle, config: &SolverConfig) -> Result<SolveRun> {
    ascend(
        oracle,
        EngineParams {
            grid_bound: config.delta.clone(),
            mu: config.mu.clone(),
            mode: SearchMode::LargestOpen,
            threshold: config.phi_threshold(),
            max_rounds: config.max_rounds,
            max_bits: config.max_bits,
            round_bound: None,
            post_round: None,
            early_exit: None,
        },
    )
}

/// Convenience entry: solve a smooth market with a mu-oracle at the
/// grid-derived working precision.
pub fn solve_wgs_market(market: &Market, config: &SolverConfig) -> Result<SolveRun> {
    let precision = OraclePrecision::from_grid(
        &config.mu,
        crate::rat::bits_of(&config.delta),
        market.goods_count(),
    );
    let mut oracle = crate::demand::MarketOracle::approximate(market, precision);
    solve_wgs(&mut oracle, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;
    use crate::market::cross_market;
    use crate::rat::{ri, rq};

    #[test]
    fn potential_examples() {
        assert_eq!(potential(&[ri(0), ri(0)]), ri(0));
        assert_eq!(potential(&[ri(3), ri(-4)]), ri(25));
        assert_eq!(potential(&[rq(1, 2), rq(-1, 2), ri(0)]), rq(1, 2));
    }

    #[test]
    fn update_prices_examples() {
        assert_eq!(
            update_prices(&[ri(1), ri(2), ri(3)], &ri(2), &[0, 2]).unwrap(),
            vec![ri(2), ri(2), ri(6)]
        );
        assert_eq!(
            update_prices(&[ri(1), ri(1)], &rq(3, 2), &[1]).unwrap(),
            vec![ri(1), rq(3, 2)]
        );
        assert!(update_prices(&[ri(1), ri(1)], &ri(1), &[0]).is_err());
    }

    #[test]
    fn find_gap_examples() {
        // s = (5, 24/5, 1, -2): 5 <= (5/4)(24/5) = 6 but 24/5 > (5/4)*1.
        let (k, g1, g2) = find_gap(&[ri(5), rq(24, 5), ri(1), ri(-2)], &ri(0)).unwrap();
        assert_eq!(k, 2);
        assert_eq!(g1, vec![0, 1]);
        assert_eq!(g2, vec![2, 3]);

        // s = (3, -1, -2): second surplus is already <= 0.
        let (k, g1, _) = find_gap(&[ri(3), ri(-1), ri(-2)], &ri(0)).unwrap();
        assert_eq!(k, 1);
        assert_eq!(g1, vec![0]);

        // s = (13/5, 2, -23/5): 13/5 <= (4/3)*2, then s3 <= 0 at k = 2.
        let (k, g1, _) = find_gap(&[rq(13, 5), ri(2), rq(-23, 5)], &ri(0)).unwrap();
        assert_eq!(k, 2);
        assert_eq!(g1, vec![0, 1]);
    }

    #[test]
    fn find_gap_ties_break_by_index() {
        // Tied surpluses sort by ascending good index; the ratio gap then
        // triggers between the tied pair and the next value.
        let (k, g1, _) = find_gap(&[ri(2), ri(3), ri(3), ri(-1)], &ri(0)).unwrap();
        assert_eq!(k, 2);
        assert_eq!(g1, vec![1, 2]);
        // With a flat profile the scan runs until the negative tail.
        let (k, g1, _) = find_gap(&[ri(3), ri(3), ri(3), ri(-9)], &ri(0)).unwrap();
        assert_eq!(k, 3);
        assert_eq!(g1, vec![0, 1, 2]);
    }

    #[test]
    fn grid_contains() {
        let g = MultiplierGrid::new(BigInt::from(8));
        assert!(g.contains(&rq(5, 3)));
        assert!(!g.contains(&rq(9, 5)));
        assert!(!g.contains(&rq(3, 5)));
        assert!(!g.contains(&ri(1)));
        assert!(g.contains(&ri(8)));
        assert!(!g.contains(&ri(9)));
    }

    /// Exhaustive enumeration of the grid for cross-checking the boundary
    /// search on monotone predicates.
    fn enumerate_grid(bound: i64) -> Vec<Rat> {
        let mut v = Vec::new();
        for a in 2..=bound {
            for b in 1..a {
                let x = rq(a, b);
                if *x.numer() <= BigInt::from(bound) && *x.denom() <= BigInt::from(bound) {
                    v.push(x);
                }
            }
        }
        v.sort();
        v.dedup();
        v
    }

    #[test]
    fn boundary_search_matches_enumeration() {
        // Monotone predicate true exactly on (1, 5/3].
        let cut = rq(5, 3);
        let bound = BigInt::from(8);
        let out = grid_boundary(&bound, |x| Ok(*x <= cut)).unwrap();
        assert_eq!(out.last_true, Some(rq(5, 3)));
        let grid = enumerate_grid(8);
        let best = grid.iter().filter(|x| **x <= cut).max().unwrap();
        assert_eq!(out.last_true.as_ref(), Some(best));
        let first_false = grid.iter().filter(|x| **x > cut).min().unwrap();
        assert_eq!(out.first_false.as_ref(), Some(first_false));
    }

    #[test]
    fn boundary_search_random_cuts() {
        let bound = BigInt::from(64);
        let grid = enumerate_grid(64);
        for (num, den) in [(7i64, 4i64), (3, 2), (100, 99), (63, 32), (5, 1), (64, 63)] {
            let cut = rq(num, den);
            let out = grid_boundary(&bound, |x| Ok(*x < cut)).unwrap();
            let best = grid.iter().filter(|x| **x < cut).max();
            assert_eq!(out.last_true.as_ref(), best, "cut {num}/{den}");
            let first = grid.iter().filter(|x| **x >= cut).min();
            assert_eq!(out.first_false.as_ref(), first, "cut {num}/{den}");
        }
    }

    #[test]
    fn boundary_search_all_false() {
        let bound = BigInt::from(16);
        let out = grid_boundary(&bound, |_| Ok(false)).unwrap();
        assert_eq!(out.last_true, None);
        assert!(out.first_false.is_some());
    }

    #[test]
    fn boundary_probe_count_logarithmic() {
        // Worst-ish case: boundary hugging 1 from above forces long runs.
        let bound = BigInt::one() << 64;
        let cut = Rat::one() + Rat::new(BigInt::from(3), BigInt::one() << 40);
        let out = grid_boundary(&bound, |x| Ok(*x <= cut)).unwrap();
        assert!(out.probes <= 4 * 2 * 65, "probes = {}", out.probes);
        assert!(out.last_true.unwrap() <= cut);
    }

    #[test]
    fn engine_closes_gap_exactly_on_cross_market_breakpoint() {
        // Exact oracle, smallest-closing-multiplier mode: the cross market
        // with u2 = (1, 2) has its only structural breakpoint at x = 2,
        // where a new equality edge appears and the surplus snaps to zero.
        let market = cross_market([0, 1], [1, 2]);
        let config = SolverConfig::derive(&market, &rq(1, 1000), &Overrides::default()).unwrap();
        let mut oracle = crate::demand::MarketOracle::exact(&market);
        let run = ascend(
            &mut oracle,
            EngineParams {
                grid_bound: config.spending_grid_bound(),
                mu: ri(0),
                mode: SearchMode::SmallestClosed,
                threshold: config.phi_threshold(),
                max_rounds: config.max_rounds,
                max_bits: None,
                round_bound: None,
                post_round: None,
                early_exit: None,
            },
        )
        .unwrap();
        assert!(run.converged);
        assert_eq!(run.trace.rounds(), 1);
        assert_eq!(&run.prices[1] / &run.prices[0], ri(2));
        assert_eq!(run.trace.final_state().phi, ri(0));
        assert!(run.trace.anomalies.is_empty());
    }

    #[test]
    fn solve_symmetric_market_terminates_at_round_zero() {
        let market = cross_market([0, 1], [1, 0]);
        let config = SolverConfig::derive(&market, &rq(1, 1000), &Overrides::default()).unwrap();
        let mut oracle = crate::demand::MarketOracle::exact(&market);
        let run = solve_wgs(&mut oracle, &config).unwrap();
        assert!(run.converged);
        assert_eq!(run.trace.rounds(), 0);
        assert_eq!(run.prices, vec![ri(1), ri(1)]);
    }

    #[test]
    fn solve_wgs_converges_on_asymmetric_ces_market() {
        let market = Market::from_parts(
            vec!["g1".into(), "g2".into()],
            vec![
                crate::market::Agent {
                    name: "a1".into(),
                    endowment: vec![ri(1), ri(0)],
                    utility: crate::market::UtilitySpec::Ces {
                        values: vec![ri(3), ri(1)],
                        rho: rq(1, 2),
                    },
                },
                crate::market::Agent {
                    name: "a2".into(),
                    endowment: vec![ri(0), ri(1)],
                    utility: crate::market::UtilitySpec::Ces {
                        values: vec![ri(1), ri(2)],
                        rho: rq(1, 2),
                    },
                },
            ],
        )
        .unwrap();
        let eps = rq(1, 1000);
        let config = SolverConfig::derive(&market, &eps, &Overrides::default()).unwrap();
        let run = solve_wgs_market(&market, &config).unwrap();
        assert!(run.converged);
        assert!(run.trace.final_state().phi < config.phi_threshold());
        // Reference check at 128 bits: the final surplus is genuinely small.
        let s_ref = crate::demand::reference_surplus(&market, &run.prices, 128).unwrap();
        let phi_ref = potential(&s_ref);
        assert!(phi_ref < &eps * &eps / ri(8));
        // Prices never left [1, 2^D1] and the minimum stayed at 1.
        for st in &run.trace.states {
            assert_eq!(st.p.iter().min().unwrap(), &ri(1));
            assert!(st.p.iter().max().unwrap() <= &config.price_cap());
        }
    }
}
