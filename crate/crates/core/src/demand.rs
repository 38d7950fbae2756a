//! Demand oracles: exact balanced-flow demands for segment-based agents,
//! closed forms for Cobb-Douglas, and fixed-point CES evaluation for the
//! mu-approximate oracle.
//!
//! The approximate oracle is deterministic: round-to-nearest at a fixed
//! mantissa width chosen so accumulated rounding stays far below mu. The
//! exact oracle breaks demand ties by minimizing the l2-norm of the surplus
//! vector (the balanced flow).

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::flow::{balanced_flow, build_network, check_positive_prices, PartitionProfile};
use crate::market::{Market, UtilitySpec};
use crate::rat::{bits_of, max_part_bits, Rat};
use crate::Result;

/// Precision contract of the approximate oracle.
#[derive(Debug, Clone)]
pub struct OraclePrecision {
    pub mu: Rat,
    pub working_bits: u64,
}

impl OraclePrecision {
    /// Working width from the solver's multiplier-grid bound: 64 guard bits
    /// plus bits(1/mu) plus twice the grid bit length plus log2 m.
    pub fn from_grid(mu: &Rat, delta_bits: u64, goods: usize) -> OraclePrecision {
        OraclePrecision {
            mu: mu.clone(),
            working_bits: working_bits(mu, delta_bits, goods),
        }
    }

    /// Working width for a standalone query, sized from the prices present.
    pub fn for_prices(mu: &Rat, p: &[Rat], goods: usize) -> OraclePrecision {
        OraclePrecision {
            mu: mu.clone(),
            working_bits: working_bits(mu, max_part_bits(p), goods),
        }
    }
}

fn working_bits(mu: &Rat, delta_bits: u64, goods: usize) -> u64 {
    let inv_mu_bits = if mu.is_positive() {
        bits_of(&(mu.recip().ceil().to_integer())).max(1)
    } else {
        1
    };
    64 + inv_mu_bits + 2 * delta_bits + (usize::BITS as u64 - (goods.max(1) as u64).leading_zeros() as u64)
}

// ---------------------------------------------------------------------------
// Fixed-point arithmetic: nonnegative reals as mantissa / 2^bits,
// round-to-nearest at every operation.

mod fx {
    use super::*;

    /// Nearest integer to n / d for n >= 0, d > 0 (ties round up).
    pub fn div_nearest(n: &BigInt, d: &BigInt) -> BigInt {
        (n * 2 + d) / (d * 2)
    }

    pub fn from_rat(x: &Rat, bits: u64) -> BigInt {
        div_nearest(&(x.numer() << (bits as usize)), x.denom())
    }

    pub fn to_rat(m: &BigInt, bits: u64) -> Rat {
        Rat::new(m.clone(), BigInt::one() << (bits as usize))
    }

    pub fn mul(a: &BigInt, b: &BigInt, bits: u64) -> BigInt {
        div_nearest(&(a * b), &(BigInt::one() << (bits as usize)))
    }

    pub fn div(a: &BigInt, b: &BigInt, bits: u64) -> BigInt {
        div_nearest(&(a << (bits as usize)), b)
    }

    pub fn pow(a: &BigInt, e: u64, bits: u64) -> BigInt {
        let mut acc = BigInt::one() << (bits as usize);
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(&acc, &base, bits);
            }
            e >>= 1;
            if e > 0 {
                base = mul(&base, &base, bits);
            }
        }
        acc
    }

    /// Nearest fixed-point n-th root: ((a / 2^bits)^(1/n)) * 2^bits.
    pub fn root(a: &BigInt, n: u32, bits: u64) -> BigInt {
        if a.is_zero() {
            return BigInt::zero();
        }
        let v = a << ((bits * (n as u64 - 1)) as usize);
        let r = v.nth_root(n);
        // Round to nearest: r+1 wins when (r + 1/2)^n <= v.
        let half_up: BigInt = ((&r << 1usize) + BigInt::one()).pow(n);
        if half_up <= (&v) << (n as usize) {
            r + 1
        } else {
            r
        }
    }

    /// x^(num/den) for rational x >= 0 with num >= 1, den >= 1.
    pub fn pow_frac(x: &Rat, num: u64, den: u64, bits: u64) -> BigInt {
        let base = from_rat(x, bits);
        let powered = pow(&base, num, bits);
        if den == 1 {
            powered
        } else {
            root(&powered, den as u32, bits)
        }
    }
}

/// Cobb-Douglas demand, exact: x_j = (e_j / sum e) * budget / p_j.
pub fn demand_cobb_douglas(exponents: &[Rat], budget: &Rat, p: &[Rat]) -> Result<Vec<Rat>> {
    check_positive_prices(p)?;
    if budget.is_negative() {
        return Err(Error::Validation("budget must be >= 0".into()));
    }
    let total: Rat = exponents.iter().fold(Rat::zero(), |a, e| a + e);
    if !total.is_positive() {
        return Err(Error::Validation(
            "Cobb-Douglas exponents must not be all zero".into(),
        ));
    }
    Ok(exponents
        .iter()
        .zip(p)
        .map(|(e, pj)| e / &total * budget / pj)
        .collect())
}

/// CES demand at working precision: with sigma = 1/(1-rho),
/// x_j = budget * u_j^sigma p_j^(-sigma) / sum_k u_k^sigma p_k^(1-sigma).
/// The returned quantities are fixed-point values (dyadic rationals).
pub fn demand_ces(
    values: &[Rat],
    rho: &Rat,
    budget: &Rat,
    p: &[Rat],
    working_bits: u64,
) -> Result<Vec<Rat>> {
    check_positive_prices(p)?;
    if !rho.is_positive() || *rho >= Rat::one() {
        return Err(Error::Validation("CES needs 0 < rho < 1".into()));
    }
    if values.iter().all(|u| u.is_zero()) {
        return Err(Error::Validation("CES values must not be all zero".into()));
    }
    let bits = working_bits;
    // sigma = b/(b-a) for rho = a/b in lowest terms.
    let a: BigInt = rho.numer().clone();
    let b: BigInt = rho.denom().clone();
    let num = u64::try_from(&b).map_err(|_| Error::Validation("rho denominator too large".into()))?;
    let den = u64::try_from(&b - &a)
        .map_err(|_| Error::Internal("sigma denominator conversion".into()))?;

    let mut weights = Vec::with_capacity(values.len());
    let mut denom_sum = BigInt::zero();
    for (u, pj) in values.iter().zip(p) {
        if u.is_zero() {
            weights.push(BigInt::zero());
            continue;
        }
        let u_pow = fx::pow_frac(u, num, den, bits);
        let p_pow = fx::pow_frac(pj, num, den, bits);
        if p_pow.is_zero() {
            return Err(Error::Internal(
                "working precision underflow in CES price power".into(),
            ));
        }
        // w_j = u_j^sigma * p_j^(-sigma)
        let w = fx::div(&u_pow, &p_pow, bits);
        // contribution to the denominator: w_j * p_j = u^sigma p^(1-sigma)
        denom_sum += fx::mul(&w, &fx::from_rat(pj, bits), bits);
        weights.push(w);
    }
    if denom_sum.is_zero() {
        return Err(Error::Internal(
            "working precision underflow in CES denominator".into(),
        ));
    }
    let budget_fx = fx::from_rat(budget, bits);
    Ok(weights
        .into_iter()
        .map(|w| {
            if w.is_zero() {
                Rat::zero()
            } else {
                fx::to_rat(&fx::div_nearest(&(&budget_fx * &w), &denom_sum), bits)
            }
        })
        .collect())
}

/// Exact aggregate surplus for a segment-based market via the balanced flow:
/// s_j = l_jt + spent^g_j - p_j.
pub fn exact_oracle(market: &Market, p: &[Rat]) -> Result<Vec<Rat>> {
    let (_, _, s) = exact_allocation(market, p)?;
    Ok(s)
}

/// Balanced-flow allocation with per-agent money flows, the profiles it was
/// built from, and the surplus vector.
pub fn exact_allocation(
    market: &Market,
    p: &[Rat],
) -> Result<(crate::flow::Flow, Vec<PartitionProfile>, Vec<Rat>)> {
    if !market.all_segment_based() {
        return Err(Error::Unsupported(
            "exact oracle needs linear or spending-constraint utilities".into(),
        ));
    }
    let (net, profiles) = build_network(market, p)?;
    let (flow, surplus) = balanced_flow(&net)?;
    Ok((flow, profiles, surplus))
}

/// Per-agent demand bundles (quantities) behind the exact oracle.
pub fn exact_demand_bundles(market: &Market, p: &[Rat]) -> Result<(Vec<Vec<Rat>>, Vec<Rat>)> {
    let (flow, profiles, surplus) = exact_allocation(market, p)?;
    let n = market.agents_count();
    let m = market.goods_count();
    let mut bundles = vec![vec![Rat::zero(); m]; n];
    for prof in &profiles {
        for s in prof.allocated_segments() {
            bundles[prof.agent][s.good] += &s.capacity / &p[s.good];
        }
    }
    for ((i, j), money) in &flow.agent_good {
        bundles[*i][*j] += money / &p[*j];
    }
    Ok((bundles, surplus))
}

/// Fixed-point demand of one smooth agent; budget and prices pre-converted.
fn agent_demand_fx(
    utility: &UtilitySpec,
    budget_fx: &BigInt,
    p: &[Rat],
    p_fx: &[BigInt],
    bits: u64,
) -> Result<Vec<BigInt>> {
    match utility {
        UtilitySpec::CobbDouglas { exponents } => {
            let total: Rat = exponents.iter().fold(Rat::zero(), |a, e| a + e);
            if !total.is_positive() {
                return Err(Error::Validation(
                    "Cobb-Douglas exponents must not be all zero".into(),
                ));
            }
            Ok(exponents
                .iter()
                .zip(p_fx)
                .map(|(e, pj)| {
                    if e.is_zero() {
                        BigInt::zero()
                    } else {
                        let share = fx::from_rat(&(e / &total), bits);
                        fx::div(&fx::mul(&share, budget_fx, bits), pj, bits)
                    }
                })
                .collect())
        }
        UtilitySpec::Ces { values, rho } => {
            if values.iter().all(|u| u.is_zero()) {
                return Err(Error::Validation("CES values must not be all zero".into()));
            }
            let a: BigInt = rho.numer().clone();
            let b: BigInt = rho.denom().clone();
            let num = u64::try_from(&b)
                .map_err(|_| Error::Validation("rho denominator too large".into()))?;
            let den = u64::try_from(&b - &a)
                .map_err(|_| Error::Internal("sigma denominator conversion".into()))?;
            let mut weights = Vec::with_capacity(values.len());
            let mut denom_sum = BigInt::zero();
            for ((u, pj), pj_fx) in values.iter().zip(p).zip(p_fx) {
                if u.is_zero() {
                    weights.push(BigInt::zero());
                    continue;
                }
                let u_pow = fx::pow_frac(u, num, den, bits);
                let p_pow = fx::pow_frac(pj, num, den, bits);
                if p_pow.is_zero() {
                    return Err(Error::Internal(
                        "working precision underflow in CES price power".into(),
                    ));
                }
                let w = fx::div(&u_pow, &p_pow, bits);
                denom_sum += fx::mul(&w, pj_fx, bits);
                weights.push(w);
            }
            if denom_sum.is_zero() {
                return Err(Error::Internal(
                    "working precision underflow in CES denominator".into(),
                ));
            }
            Ok(weights
                .into_iter()
                .map(|w| {
                    if w.is_zero() {
                        BigInt::zero()
                    } else {
                        fx::div_nearest(&(budget_fx * &w), &denom_sum)
                    }
                })
                .collect())
        }
        UtilitySpec::SpendingConstraint { .. } => Err(Error::Unsupported(
            "markets mixing segment-based and smooth utilities are not supported".into(),
        )),
    }
}

/// Per-agent demand bundles for a smooth market at the given precision.
/// Quantities are fixed-point values (dyadic rationals).
pub fn smooth_demand_bundles(
    market: &Market,
    p: &[Rat],
    precision: &OraclePrecision,
) -> Result<Vec<Vec<Rat>>> {
    check_positive_prices(p)?;
    let bits = precision.working_bits;
    let p_fx: Vec<BigInt> = p.iter().map(|x| fx::from_rat(x, bits)).collect();
    let mut bundles = Vec::with_capacity(market.agents_count());
    for agent in &market.agents {
        let budget_fx = budget_fx(agent, &p_fx, bits);
        let x = agent_demand_fx(&agent.utility, &budget_fx, p, &p_fx, bits)?;
        bundles.push(x.iter().map(|m| fx::to_rat(m, bits)).collect());
    }
    Ok(bundles)
}

/// Agent budget in fixed point; endowments are small rationals, so only the
/// price conversions carry meaningful cost.
fn budget_fx(agent: &crate::market::Agent, p_fx: &[BigInt], bits: u64) -> BigInt {
    let mut total = BigInt::zero();
    for (w, pj) in agent.endowment.iter().zip(p_fx) {
        if !w.is_zero() {
            total += fx::mul(&fx::from_rat(w, bits), pj, bits);
        }
    }
    total
}

/// Aggregate surplus of a smooth market, entirely in fixed point: surpluses
/// come out as dyadic rationals, avoiding gcd-heavy arithmetic on prices
/// whose bit length grows with the round count.
pub fn smooth_surplus(market: &Market, p: &[Rat], precision: &OraclePrecision) -> Result<Vec<Rat>> {
    check_positive_prices(p)?;
    let bits = precision.working_bits;
    let one_fx = BigInt::one() << (bits as usize);
    let p_fx: Vec<BigInt> = p.iter().map(|x| fx::from_rat(x, bits)).collect();
    let mut demand_fx = vec![BigInt::zero(); market.goods_count()];
    for agent in &market.agents {
        let budget = budget_fx(agent, &p_fx, bits);
        let x = agent_demand_fx(&agent.utility, &budget, p, &p_fx, bits)?;
        for (d, xi) in demand_fx.iter_mut().zip(x) {
            *d += xi;
        }
    }
    Ok(demand_fx
        .into_iter()
        .zip(&p_fx)
        .map(|(d, pj)| fx::to_rat(&fx::mul(pj, &(d - &one_fx), bits), bits))
        .collect())
}

/// mu-approximate aggregate surplus oracle. For segment-based markets this
/// is the exact oracle (an exact answer is a valid approximation); for
/// smooth markets each entry is within mu of the exact surplus.
pub fn approx_oracle(market: &Market, p: &[Rat], mu: &Rat) -> Result<Vec<Rat>> {
    if !mu.is_positive() {
        return Err(Error::Validation("mu must be > 0".into()));
    }
    if market.all_segment_based() {
        return exact_oracle(market, p);
    }
    let precision = OraclePrecision::for_prices(mu, p, market.goods_count());
    smooth_surplus(market, p, &precision)
}

/// Aggregate surplus s_j = p_j (sum_i x_ij - 1) from explicit bundles.
pub fn surplus_from_bundles(market: &Market, p: &[Rat], bundles: &[Vec<Rat>]) -> Result<Vec<Rat>> {
    check_positive_prices(p)?;
    let m = market.goods_count();
    let mut s = Vec::with_capacity(m);
    for j in 0..m {
        let demand: Rat = bundles.iter().map(|b| b[j].clone()).fold(Rat::zero(), |a, b| a + b);
        s.push(&p[j] * (demand - Rat::one()));
    }
    Ok(s)
}

/// Reference surplus at an explicit mantissa width, used by verification.
/// Exact for segment-based markets regardless of the width.
pub fn reference_surplus(market: &Market, p: &[Rat], bits: u64) -> Result<Vec<Rat>> {
    if market.all_segment_based() {
        return exact_oracle(market, p);
    }
    let precision = OraclePrecision {
        mu: Rat::zero(),
        working_bits: bits,
    };
    smooth_surplus(market, p, &precision)
}

/// A counting demand oracle over a market, either exact or mu-approximate.
pub struct MarketOracle<'m> {
    market: &'m Market,
    precision: Option<OraclePrecision>,
    calls: u64,
}

impl<'m> MarketOracle<'m> {
    pub fn exact(market: &'m Market) -> MarketOracle<'m> {
        MarketOracle {
            market,
            precision: None,
            calls: 0,
        }
    }

    pub fn approximate(market: &'m Market, precision: OraclePrecision) -> MarketOracle<'m> {
        MarketOracle {
            market,
            precision: Some(precision),
            calls: 0,
        }
    }

    pub fn market(&self) -> &'m Market {
        self.market
    }
}

/// Aggregate surplus oracle interface consumed by the solvers.
pub trait SurplusOracle {
    fn goods(&self) -> usize;
    /// Returns the surplus vector at prices p and counts the call.
    fn query(&mut self, p: &[Rat]) -> Result<Vec<Rat>>;
    fn calls(&self) -> u64;
    /// True when answers are exact rationals (no mu slack).
    fn is_exact(&self) -> bool;
}

impl SurplusOracle for MarketOracle<'_> {
    fn goods(&self) -> usize {
        self.market.goods_count()
    }

    fn query(&mut self, p: &[Rat]) -> Result<Vec<Rat>> {
        self.calls += 1;
        match &self.precision {
            None => exact_oracle(self.market, p),
            Some(prec) => {
                if self.market.all_segment_based() {
                    exact_oracle(self.market, p)
                } else {
                    smooth_surplus(self.market, p, prec)
                }
            }
        }
    }

    fn calls(&self) -> u64 {
        self.calls
    }

    fn is_exact(&self) -> bool {
        self.precision.is_none() || self.market.all_segment_based()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{cross_market, Agent};
    use crate::rat::{pow2, ri, rq};

    #[test]
    fn cobb_douglas_examples() {
        let x = demand_cobb_douglas(&[ri(1), ri(1)], &ri(1), &[ri(1), ri(1)]).unwrap();
        assert_eq!(x, vec![rq(1, 2), rq(1, 2)]);

        let x = demand_cobb_douglas(&[ri(3), ri(1)], &ri(2), &[ri(1), ri(2)]).unwrap();
        assert_eq!(x, vec![rq(3, 2), rq(1, 4)]);

        let x = demand_cobb_douglas(&[ri(1), ri(0)], &ri(5), &[ri(1), ri(7)]).unwrap();
        assert_eq!(x, vec![ri(5), ri(0)]);

        assert!(demand_cobb_douglas(&[ri(0), ri(0)], &ri(1), &[ri(1), ri(1)]).is_err());
    }

    #[test]
    fn ces_symmetric_is_exact() {
        let x = demand_ces(&[ri(1), ri(1)], &rq(1, 2), &ri(2), &[ri(1), ri(1)], 128).unwrap();
        assert_eq!(x, vec![ri(1), ri(1)]);
    }

    #[test]
    fn ces_sigma_two_examples() {
        // sigma = 2: x = (4/5, 1/5) for u = (2,1), p = (1,1), budget 1.
        let bits = 192u64;
        let tol = pow2(-(bits as i64) + 8);
        let x = demand_ces(&[ri(2), ri(1)], &rq(1, 2), &ri(1), &[ri(1), ri(1)], bits).unwrap();
        assert!((&x[0] - rq(4, 5)).abs() <= tol);
        assert!((&x[1] - rq(1, 5)).abs() <= tol);

        // u = (1,1), p = (2,1), budget 1: x = (1/6, 2/3).
        let x = demand_ces(&[ri(1), ri(1)], &rq(1, 2), &ri(1), &[ri(2), ri(1)], bits).unwrap();
        assert!((&x[0] - rq(1, 6)).abs() <= tol);
        assert!((&x[1] - rq(2, 3)).abs() <= tol);
        // Budget check: 2 * 1/6 + 2/3 = 1.
        let spend = ri(2) * &x[0] + &x[1];
        assert!((spend - ri(1)).abs() <= tol * ri(4));
    }

    #[test]
    fn ces_budget_feasible_within_precision() {
        let bits = 160u64;
        let p = [rq(3, 2), rq(7, 5), ri(2)];
        let x = demand_ces(
            &[ri(3), ri(1), ri(2)],
            &rq(3, 4),
            &rq(7, 3),
            &p,
            bits,
        )
        .unwrap();
        let spend: Rat = p.iter().zip(&x).map(|(pj, xj)| pj * xj).sum();
        assert!((spend - rq(7, 3)).abs() <= pow2(-(bits as i64) + 16));
    }

    #[test]
    fn exact_oracle_cross_examples() {
        let sym = cross_market([0, 1], [1, 0]);
        assert_eq!(
            exact_oracle(&sym, &[ri(1), ri(1)]).unwrap(),
            vec![ri(0), ri(0)]
        );

        let market = cross_market([0, 1], [1, 2]);
        assert_eq!(
            exact_oracle(&market, &[ri(1), ri(1)]).unwrap(),
            vec![ri(-1), ri(1)]
        );
        assert_eq!(
            exact_oracle(&market, &[ri(1), ri(2)]).unwrap(),
            vec![ri(0), ri(0)]
        );
    }

    #[test]
    fn approx_equals_exact_on_rational_markets() {
        let market = cross_market([0, 1], [1, 2]);
        for p in [[ri(1), ri(1)], [ri(1), rq(3, 2)], [rq(5, 4), ri(1)]] {
            let ex = exact_oracle(&market, &p).unwrap();
            let ap = approx_oracle(&market, &p, &rq(1, 1000)).unwrap();
            assert_eq!(ex, ap);
        }
    }

    fn two_good_ces(u1: [i64; 2], u2: [i64; 2]) -> Market {
        Market::from_parts(
            vec!["g1".into(), "g2".into()],
            vec![
                Agent {
                    name: "a1".into(),
                    endowment: vec![ri(1), ri(0)],
                    utility: UtilitySpec::Ces {
                        values: vec![ri(u1[0]), ri(u1[1])],
                        rho: rq(1, 2),
                    },
                },
                Agent {
                    name: "a2".into(),
                    endowment: vec![ri(0), ri(1)],
                    utility: UtilitySpec::Ces {
                        values: vec![ri(u2[0]), ri(u2[1])],
                        rho: rq(1, 2),
                    },
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn ces_zero_surplus_at_symmetric_equilibrium() {
        let market = two_good_ces([1, 1], [1, 1]);
        let s = approx_oracle(&market, &[ri(1), ri(1)], &rq(1, 1_000_000)).unwrap();
        assert_eq!(s, vec![ri(0), ri(0)]);
    }

    #[test]
    fn ces_oracle_error_against_doubled_precision() {
        // mu = 1e-6 vs a 128-bit reference on an asymmetric instance.
        let market = two_good_ces([2, 1], [1, 2]);
        let p = [ri(1), rq(5, 4)];
        let mu = rq(1, 1_000_000);
        let s = approx_oracle(&market, &p, &mu).unwrap();
        let s_ref = reference_surplus(&market, &p, 128).unwrap();
        for (a, b) in s.iter().zip(&s_ref) {
            assert!((a - b).abs() <= mu);
        }
        // Zero-sum within m * mu.
        let total: Rat = s.iter().fold(Rat::zero(), |a, b| a + b);
        assert!(total.abs() <= ri(2) * &mu);
    }

    #[test]
    fn oracle_is_deterministic() {
        let market = two_good_ces([3, 1], [1, 4]);
        let p = [ri(1), rq(7, 5)];
        let a = approx_oracle(&market, &p, &rq(1, 4096)).unwrap();
        let b = approx_oracle(&market, &p, &rq(1, 4096)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_oracle_scale_invariance() {
        let market = cross_market([0, 1], [1, 2]);
        for c in [rq(3, 2), ri(5), rq(7, 11)] {
            for p in [[ri(1), ri(1)], [ri(1), rq(8, 5)], [rq(4, 3), ri(2)]] {
                let s = exact_oracle(&market, &p).unwrap();
                let scaled: Vec<Rat> = p.iter().map(|x| x * &c).collect();
                let s2 = exact_oracle(&market, &scaled).unwrap();
                for (a, b) in s.iter().zip(&s2) {
                    assert_eq!(&(a * &c), b);
                }
            }
        }
    }

    #[test]
    fn rejects_zero_prices_and_mixed_markets() {
        let market = cross_market([0, 1], [1, 2]);
        assert!(exact_oracle(&market, &[ri(0), ri(1)]).is_err());

        let mixed = Market::from_parts(
            vec!["g1".into(), "g2".into()],
            vec![
                Agent {
                    name: "a1".into(),
                    endowment: vec![ri(1), ri(0)],
                    utility: UtilitySpec::Ces {
                        values: vec![ri(1), ri(1)],
                        rho: rq(1, 2),
                    },
                },
                Agent {
                    name: "a2".into(),
                    endowment: vec![ri(0), ri(1)],
                    utility: UtilitySpec::SpendingConstraint {
                        segments: vec![
                            vec![crate::market::Segment {
                                rate: BigInt::one(),
                                budget_fraction: ri(1),
                            }],
                            vec![],
                        ],
                    },
                },
            ],
        )
        .unwrap();
        assert!(matches!(
            approx_oracle(&mixed, &[ri(1), ri(1)], &rq(1, 100)),
            Err(Error::Unsupported(_))
        ));
    }
}
