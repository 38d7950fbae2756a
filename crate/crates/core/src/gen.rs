//! Deterministic pseudo-random instance generation for tests and the `gen`
//! subcommand. Instances use small-bit-length rationals, every good is
//! owned and valued by someone, segment-based agents can always spend their
//! whole budget, and spending-constraint instances are resampled until the
//! sufficiency condition holds.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::market::{Agent, Market, Segment, UtilitySpec};
use crate::rat::{rq, Rat};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceClass {
    Linear,
    CobbDouglas,
    Ces,
    SpendingConstraint,
}

impl FromStr for InstanceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<InstanceClass> {
        match s {
            "linear" => Ok(InstanceClass::Linear),
            "cobb_douglas" => Ok(InstanceClass::CobbDouglas),
            "ces" => Ok(InstanceClass::Ces),
            "spending_constraint" => Ok(InstanceClass::SpendingConstraint),
            other => Err(Error::Validation(format!(
                "unknown instance class {other:?} (expected linear, cobb_douglas, ces, spending_constraint)"
            ))),
        }
    }
}

impl InstanceClass {
    fn tag(self) -> u64 {
        match self {
            InstanceClass::Linear => 1,
            InstanceClass::CobbDouglas => 2,
            InstanceClass::Ces => 3,
            InstanceClass::SpendingConstraint => 4,
        }
    }
}

fn mixed_seed(class_tag: u64, m: usize, n: usize, seed: u64, attempt: u64) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for v in [class_tag, m as u64, n as u64, seed, attempt] {
        h ^= v.wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(h << 6)
            .wrapping_add(h >> 2);
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    }
    h
}

/// Random endowments: every good owned by one or two agents, every agent
/// owning at least one good, raw amounts small integers or halves.
fn gen_endowments(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<Rat>> {
    let mut w = vec![vec![Rat::zero(); m]; n];
    for j in 0..m {
        let owners = if n > 1 && rng.random_bool(0.3) { 2 } else { 1 };
        for _ in 0..owners {
            let i = rng.random_range(0..n);
            let amount = rq(rng.random_range(1..=4), if rng.random_bool(0.25) { 2 } else { 1 });
            w[i][j] += amount;
        }
    }
    for (i, row) in w.iter_mut().enumerate() {
        if row.iter().all(|x| x.is_zero()) {
            let j = i % m;
            row[j] = rq(1, 1);
        }
    }
    w
}

fn gen_linear_values(rng: &mut ChaCha8Rng, m: usize) -> Vec<BigInt> {
    loop {
        let vals: Vec<BigInt> = (0..m)
            .map(|_| {
                if rng.random_bool(0.25) {
                    BigInt::ZERO
                } else {
                    BigInt::from(rng.random_range(1..=9))
                }
            })
            .collect();
        if vals.iter().any(|v| !v.is_zero()) {
            return vals;
        }
    }
}

fn linear_to_segments(values: &[BigInt]) -> Vec<Vec<Segment>> {
    values
        .iter()
        .map(|v| {
            if v.is_zero() {
                vec![]
            } else {
                vec![Segment {
                    rate: v.clone(),
                    budget_fraction: Rat::one(),
                }]
            }
        })
        .collect()
}

/// Spending-constraint segments: per liked good a full-budget base segment,
/// optionally preceded by a higher-rate segment with a small budget cap.
/// The base segments guarantee the agent can always spend everything.
fn gen_spending_segments(rng: &mut ChaCha8Rng, m: usize) -> Vec<Vec<Segment>> {
    loop {
        let mut segments = vec![Vec::new(); m];
        let mut any = false;
        for segs in segments.iter_mut() {
            if rng.random_bool(0.35) {
                continue;
            }
            any = true;
            let base_rate = rng.random_range(1..=9i64);
            if rng.random_bool(0.5) {
                let hi_rate = base_rate + rng.random_range(1..=8i64);
                let frac = rq(rng.random_range(1..=3), rng.random_range(1..=2) * 4);
                segs.push(Segment {
                    rate: BigInt::from(hi_rate),
                    budget_fraction: frac,
                });
            }
            segs.push(Segment {
                rate: BigInt::from(base_rate),
                budget_fraction: Rat::one(),
            });
        }
        if any {
            return segments;
        }
    }
}

fn build(goods: usize, agents: Vec<Agent>) -> Result<Market> {
    let names = (1..=goods).map(|j| format!("g{j}")).collect();
    Market::from_parts(names, agents)
}

/// Deterministic random market of the given class. Segment-based classes
/// are resampled until the sufficiency condition holds; CES instances avoid
/// duplicate goods (identical value columns) and draw rho from
/// {1/4, 1/2, 3/4}.
pub fn generate_instance(
    class: InstanceClass,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<Market> {
    if m < 2 || n < 2 {
        return Err(Error::Validation(
            "instance generation needs at least 2 goods and 2 agents".into(),
        ));
    }
    let rho_choices = [rq(1, 4), rq(1, 2), rq(3, 4)];
    for attempt in 0..256 {
        let mut rng = ChaCha8Rng::seed_from_u64(mixed_seed(class.tag(), m, n, seed, attempt));
        let rho = rho_choices[rng.random_range(0..rho_choices.len())].clone();
        let market = generate_once(&mut rng, class, m, n, &rho)?;
        if accept(&market, class)? {
            return Ok(market);
        }
    }
    Err(Error::Internal(
        "no acceptable instance found after 256 attempts".into(),
    ))
}

/// CES instance with a pinned rho, used by the acceptance suite.
pub fn generate_ces_with_rho(m: usize, n: usize, seed: u64, rho: &Rat) -> Result<Market> {
    if m < 2 || n < 2 {
        return Err(Error::Validation(
            "instance generation needs at least 2 goods and 2 agents".into(),
        ));
    }
    for attempt in 0..256 {
        let mut rng =
            ChaCha8Rng::seed_from_u64(mixed_seed(InstanceClass::Ces.tag(), m, n, seed, attempt));
        let market = generate_once(&mut rng, InstanceClass::Ces, m, n, rho)?;
        if accept(&market, InstanceClass::Ces)? {
            return Ok(market);
        }
    }
    Err(Error::Internal(
        "no acceptable CES instance found after 256 attempts".into(),
    ))
}

fn generate_once(
    rng: &mut ChaCha8Rng,
    class: InstanceClass,
    m: usize,
    n: usize,
    rho: &Rat,
) -> Result<Market> {
    let w = gen_endowments(rng, m, n);
    let mut agents = Vec::with_capacity(n);
    for (i, endowment) in w.into_iter().enumerate() {
        let utility = match class {
            InstanceClass::Linear => UtilitySpec::SpendingConstraint {
                segments: linear_to_segments(&gen_linear_values(rng, m)),
            },
            InstanceClass::SpendingConstraint => UtilitySpec::SpendingConstraint {
                segments: gen_spending_segments(rng, m),
            },
            InstanceClass::CobbDouglas => UtilitySpec::CobbDouglas {
                exponents: (0..m)
                    .map(|_| rq(rng.random_range(1..=6), if rng.random_bool(0.3) { 2 } else { 1 }))
                    .collect(),
            },
            InstanceClass::Ces => UtilitySpec::Ces {
                values: (0..m).map(|_| rq(rng.random_range(1..=9), 1)).collect(),
                rho: rho.clone(),
            },
        };
        agents.push(Agent {
            name: format!("a{}", i + 1),
            endowment,
            utility,
        });
    }
    build(m, agents)
}

fn accept(market: &Market, class: InstanceClass) -> Result<bool> {
    match class {
        InstanceClass::Linear | InstanceClass::SpendingConstraint => {
            Ok(market.validate_sufficiency()?.is_none())
        }
        InstanceClass::CobbDouglas => Ok(true),
        InstanceClass::Ces => {
            // Every good valued by someone, no two goods with identical
            // value columns (demand-uniqueness hygiene).
            let m = market.goods_count();
            for j in 0..m {
                let valued = market.agents.iter().any(|a| match &a.utility {
                    UtilitySpec::Ces { values, .. } => !values[j].is_zero(),
                    _ => false,
                });
                if !valued {
                    return Ok(false);
                }
            }
            for j in 0..m {
                for k in 0..j {
                    let same = market.agents.iter().all(|a| match &a.utility {
                        UtilitySpec::Ces { values, .. } => values[j] == values[k],
                        _ => true,
                    });
                    if same {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::market_to_json;

    #[test]
    fn generation_is_deterministic() {
        for class in [
            InstanceClass::Linear,
            InstanceClass::CobbDouglas,
            InstanceClass::Ces,
            InstanceClass::SpendingConstraint,
        ] {
            let a = generate_instance(class, 3, 3, 7).unwrap();
            let b = generate_instance(class, 3, 3, 7).unwrap();
            assert_eq!(
                market_to_json(&a).to_string(),
                market_to_json(&b).to_string()
            );
        }
    }

    #[test]
    fn ces_fixed_seed_is_reproducible_bytes() {
        let a = generate_instance(InstanceClass::Ces, 4, 3, 1).unwrap();
        let b = generate_instance(InstanceClass::Ces, 4, 3, 1).unwrap();
        assert_eq!(
            serde_json::to_vec(&market_to_json(&a)).unwrap(),
            serde_json::to_vec(&market_to_json(&b)).unwrap()
        );
    }

    #[test]
    fn spending_instances_pass_sufficiency() {
        for seed in 0..8 {
            let market = generate_instance(InstanceClass::SpendingConstraint, 3, 3, seed).unwrap();
            assert_eq!(market.validate_sufficiency().unwrap(), None);
        }
    }

    #[test]
    fn linear_instances_are_segment_based_and_sufficient() {
        let market = generate_instance(InstanceClass::Linear, 2, 2, 0).unwrap();
        assert!(market.all_segment_based());
        assert_eq!(market.validate_sufficiency().unwrap(), None);
    }

    #[test]
    fn ces_rho_is_pinned_when_requested() {
        let market = generate_ces_with_rho(3, 2, 5, &rq(1, 2)).unwrap();
        for a in &market.agents {
            match &a.utility {
                UtilitySpec::Ces { rho, .. } => assert_eq!(*rho, rq(1, 2)),
                other => panic!("expected CES, got {other:?}"),
            }
        }
    }
}
