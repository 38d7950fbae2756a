//! Solver parameters and their derivation from an instance.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::error::Error;
use crate::market::Market;
use crate::rat::{ceil_log2_rat, ceil_to_big, epsilon_prime, pow2, rat_pow, ri, Rat};
use crate::Result;

/// Optional overrides for derived parameters.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub d1: Option<u64>,
    pub d2: Option<u64>,
    pub l: Option<u64>,
    pub r1: Option<u64>,
    pub r2: Option<u64>,
    pub r: Option<u64>,
    pub max_rounds: Option<u64>,
    pub max_bits: Option<u64>,
}

/// All solver parameters, fully pinned at construction.
///
/// `epsilon_prime` is a rational under-approximation of eps/(2 sqrt m) (the
/// exact value is irrational); the termination test only needs a
/// conservative threshold. `delta` bounds numerator and denominator of the
/// price-multiplier grid in the smooth-market solver; the spending-market
/// solver uses `spending_grid_bound` instead.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub goods: usize,
    pub epsilon: Rat,
    pub epsilon_prime: Rat,
    pub mu: Rat,
    pub delta: BigInt,
    /// Rounding/ratio-graph bit parameter M.
    pub m_bits: u64,
    pub d1: u64,
    pub d2: u64,
    pub l: u64,
    pub r1: u64,
    pub r2: u64,
    pub r: u64,
    pub max_rounds: u64,
    /// Optional cap on price numerator/denominator bit growth; exceeding it
    /// aborts the solve.
    pub max_bits: Option<u64>,
}

/// Default D1 (price-range exponent) per utility family. Spending-constraint
/// markets get the 2mL bound; smooth markets get a loose desk-scale default,
/// overridable per instance.
pub const SMOOTH_D1_DEFAULT: u64 = 24;
/// Default D2 (surplus-derivative exponent) for smooth markets. No closed
/// form exists in general; this is a loose default that is generous for
/// small CES/Cobb-Douglas instances with single-digit parameters.
pub const SMOOTH_D2_DEFAULT: u64 = 48;
pub const R1_DEFAULT: u64 = 16;
/// Default R2. Chosen so that a round ending with x < 1 + 1/(R2 m^3) has a
/// provably positive potential-decrease margin for every m >= 2 under the
/// exact oracle.
pub const R2_DEFAULT: u64 = 128;
pub const R_DEFAULT: u64 = 16;

impl SolverConfig {
    /// Derives the parameter set for a market at accuracy `epsilon`.
    pub fn derive(market: &Market, epsilon: &Rat, ov: &Overrides) -> Result<SolverConfig> {
        let l = ov.l.unwrap_or(market.input_bits).max(1);
        let m = market.goods_count() as u64;
        let d1 = ov.d1.unwrap_or(if market.all_segment_based() {
            2 * m * l
        } else {
            SMOOTH_D1_DEFAULT
        });
        let d2 = ov.d2.unwrap_or(SMOOTH_D2_DEFAULT);
        Self::derive_parts(market.goods_count(), epsilon, d1, d2, l, ov)
    }

    /// Core derivation from the good count alone.
    pub fn derive_parts(
        goods: usize,
        epsilon: &Rat,
        d1: u64,
        d2: u64,
        l: u64,
        ov: &Overrides,
    ) -> Result<SolverConfig> {
        if !epsilon.is_positive() {
            return Err(Error::Validation("epsilon must be > 0".into()));
        }
        if goods < 2 {
            return Err(Error::Validation(format!(
                "config needs at least 2 goods, got {goods}"
            )));
        }
        if d1 < 1 || d2 < 1 {
            return Err(Error::Validation("D1 and D2 must be >= 1".into()));
        }
        let r1 = ov.r1.unwrap_or(R1_DEFAULT).max(2);
        let r2 = ov.r2.unwrap_or(R2_DEFAULT).max(2);
        let r = ov.r.unwrap_or(R_DEFAULT).max(2);
        let m = goods as u64;
        let log_m = ceil_log2_u(m);
        let m7 = rat_pow(&ri(goods as i64), 7);
        let mu = epsilon / (ri(r1 as i64) * &m7);
        let delta = ceil_to_big(&(mu.recip() * pow2((d1 + d2 + log_m) as i64)));
        let eps_prime = epsilon_prime(epsilon, goods)?;
        // M = ceil(log2(5 m^7 / eps'^2)), at least L.
        let m_bits_raw = ceil_log2_rat(&(ri(5) * &m7 / (&eps_prime * &eps_prime)));
        let m_bits = (m_bits_raw.max(1) as u64).max(l);
        let max_rounds = ov.max_rounds.unwrap_or_else(|| {
            let log_inv_eps = ceil_log2_rat(&epsilon.recip()).max(1) as u64;
            let m_u128 = m as u128;
            let term = (d1 as u128)
                .saturating_mul(m_u128.pow(7))
                .saturating_mul(log_m as u128)
                .saturating_add(m_u128.pow(3).saturating_mul(log_inv_eps as u128));
            u64::try_from(term.saturating_mul(64)).unwrap_or(u64::MAX)
        });
        Ok(SolverConfig {
            goods,
            epsilon: epsilon.clone(),
            epsilon_prime: eps_prime,
            mu,
            delta,
            m_bits,
            d1,
            d2,
            l,
            r1,
            r2,
            r,
            max_rounds,
            max_bits: ov.max_bits,
        })
    }

    /// Multiplier grid bound 2^(2mM+L) for the spending-constraint solver.
    pub fn spending_grid_bound(&self) -> BigInt {
        let bits = 2 * (self.goods as u64) * self.m_bits + self.l;
        BigInt::one() << (bits as usize)
    }

    /// Termination threshold eps'^2 on the squared surplus norm.
    pub fn phi_threshold(&self) -> Rat {
        &self.epsilon_prime * &self.epsilon_prime
    }

    /// Price cap 2^D1 asserted throughout every solve.
    pub fn price_cap(&self) -> Rat {
        pow2(self.d1 as i64)
    }

    /// Threshold 1 + 1/(R2 m^3) separating small-step from big-step rounds.
    pub fn small_step_threshold(&self) -> Rat {
        Rat::one() + (ri((self.r2) as i64) * rat_pow(&ri(self.goods as i64), 3)).recip()
    }
}

fn ceil_log2_u(x: u64) -> u64 {
    assert!(x >= 1);
    64 - (x - 1).leading_zeros() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rq;

    #[test]
    fn mu_matches_direct_substitution() {
        // eps = 1/100, m = 2, R1 = 16: mu = eps / (R1 m^7) = 1/204800.
        let cfg =
            SolverConfig::derive_parts(2, &rq(1, 100), 8, 8, 8, &Overrides::default()).unwrap();
        assert_eq!(cfg.mu, rq(1, 204_800));
    }

    #[test]
    fn m_bits_matches_hand_evaluation() {
        // eps = 1/100, m = 2, L = 8: eps'^2 ~ eps^2/(4m) = 1/80000, so
        // 5 m^7 / eps'^2 ~ 5.12e7 and M = 26.
        let cfg =
            SolverConfig::derive_parts(2, &rq(1, 100), 8, 8, 8, &Overrides::default()).unwrap();
        assert_eq!(cfg.m_bits, 26);
    }

    #[test]
    fn delta_formula() {
        let cfg =
            SolverConfig::derive_parts(2, &rq(1, 100), 8, 8, 8, &Overrides::default()).unwrap();
        // Delta = ceil(1/mu * 2^(D1+D2+ceil(log2 m))) = 204800 * 2^17.
        assert_eq!(cfg.delta, BigInt::from(204_800u64) << 17);
    }

    #[test]
    fn guards() {
        assert!(SolverConfig::derive_parts(1, &ri(1), 8, 8, 8, &Overrides::default()).is_err());
        assert!(SolverConfig::derive_parts(2, &ri(0), 8, 8, 8, &Overrides::default()).is_err());
        assert!(SolverConfig::derive_parts(2, &rq(-1, 2), 8, 8, 8, &Overrides::default()).is_err());
    }

    #[test]
    fn m_bits_at_least_l() {
        let cfg =
            SolverConfig::derive_parts(2, &rq(1, 2), 8, 8, 200, &Overrides::default()).unwrap();
        assert!(cfg.m_bits >= 200);
    }

    #[test]
    fn epsilon_prime_is_conservative() {
        let cfg =
            SolverConfig::derive_parts(3, &rq(1, 1000), 8, 8, 8, &Overrides::default()).unwrap();
        // eps'^2 <= eps^2 / (4m)
        let lhs = cfg.phi_threshold();
        let rhs = &cfg.epsilon * &cfg.epsilon / ri(12);
        assert!(lhs <= rhs);
    }
}
