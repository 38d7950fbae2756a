//! Market instances: goods, agents, endowments, utility specifications.
//!
//! Loading normalizes the total supply of every good to 1 (the raw column
//! sums are kept as scale factors and written back on save, so a load/save
//! round trip is exact). Linear utilities are folded into the
//! spending-constraint representation at construction: one segment per
//! positively-valued good with budget fraction 1. That leaves two utility
//! families internally: segment-based (rational demands, balanced-flow
//! oracle) and smooth (Cobb-Douglas, CES).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::error::Error;
use crate::rat::{parse_rat, rat_str, rational_bits, Rat};
use crate::Result;

/// One linear segment of a spending-constraint utility: `rate` units of
/// utility per unit of good, spendable up to `budget_fraction` of the
/// agent's budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub rate: BigInt,
    pub budget_fraction: Rat,
}

/// Per-agent utility specification over the market's good set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UtilitySpec {
    /// u(x) = prod_j x_j^e_j with e_j >= 0, not all zero.
    CobbDouglas { exponents: Vec<Rat> },
    /// u(x) = (sum_j u_j x_j^rho)^(1/rho) with 0 < rho < 1.
    Ces { values: Vec<Rat>, rho: Rat },
    /// Additively separable piecewise-linear concave utility; per good a
    /// list of segments with strictly decreasing rates.
    SpendingConstraint { segments: Vec<Vec<Segment>> },
}

impl UtilitySpec {
    /// True when demands are rational and served by the balanced-flow oracle.
    pub fn is_segment_based(&self) -> bool {
        matches!(self, UtilitySpec::SpendingConstraint { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub name: String,
    /// Normalized endowment per good; column sums over agents are 1.
    pub endowment: Vec<Rat>,
    pub utility: UtilitySpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    pub goods: Vec<String>,
    pub agents: Vec<Agent>,
    /// Original total supply of each good before normalization.
    pub supply_scale: Vec<Rat>,
    /// Total bit length of all endowment/utility rationals as loaded; the
    /// default for the solver parameter L.
    pub input_bits: u64,
}

impl Market {
    pub fn goods_count(&self) -> usize {
        self.goods.len()
    }

    pub fn agents_count(&self) -> usize {
        self.agents.len()
    }

    /// All agents segment-based (exact rational demand oracle available).
    pub fn all_segment_based(&self) -> bool {
        self.agents.iter().all(|a| a.utility.is_segment_based())
    }

    /// All agents smooth (continuous WGS demand).
    pub fn all_smooth(&self) -> bool {
        self.agents.iter().all(|a| !a.utility.is_segment_based())
    }

    /// Builds a market from raw (un-normalized) parts, validating and
    /// normalizing supplies. Endowment vectors must already be indexed by
    /// the goods order.
    pub fn from_parts(goods: Vec<String>, agents: Vec<Agent>) -> Result<Market> {
        let m = goods.len();
        let n = agents.len();
        if m < 2 {
            return Err(Error::Validation(format!("need at least 2 goods, got {m}")));
        }
        if n < 1 {
            return Err(Error::Validation("need at least 1 agent".into()));
        }
        {
            let mut seen = std::collections::BTreeSet::new();
            for g in &goods {
                if !seen.insert(g) {
                    return Err(Error::Validation(format!("duplicate good name {g:?}")));
                }
            }
        }
        let mut input_bits = 0u64;
        for a in &agents {
            if a.endowment.len() != m {
                return Err(Error::Internal(format!(
                    "agent {} endowment length {} != goods {}",
                    a.name,
                    a.endowment.len(),
                    m
                )));
            }
            for (j, w) in a.endowment.iter().enumerate() {
                if w.is_negative() {
                    return Err(Error::Validation(format!(
                        "agent {} has negative endowment {} of {}",
                        a.name,
                        rat_str(w),
                        goods[j]
                    )));
                }
                if !w.is_zero() {
                    input_bits += rational_bits(w);
                }
            }
            input_bits += validate_utility(&a.utility, m, &a.name)?;
        }
        let mut supply_scale = Vec::with_capacity(m);
        for j in 0..m {
            let total: Rat = agents
                .iter()
                .map(|a| a.endowment[j].clone())
                .fold(Rat::zero(), |acc, w| acc + w);
            if !total.is_positive() {
                return Err(Error::Validation(format!(
                    "zero total supply of good {}",
                    goods[j]
                )));
            }
            supply_scale.push(total);
        }
        let mut agents = agents;
        for a in &mut agents {
            for j in 0..m {
                a.endowment[j] = &a.endowment[j] / &supply_scale[j];
            }
        }
        Ok(Market {
            goods,
            agents,
            supply_scale,
            input_bits: input_bits.max(1),
        })
    }

    /// Total budget of an agent at prices p: sum_j p_j w_ij, exact.
    pub fn budget(&self, agent: usize, p: &[Rat]) -> Rat {
        self.agents[agent]
            .endowment
            .iter()
            .zip(p)
            .map(|(w, pj)| w * pj)
            .fold(Rat::zero(), |acc, x| acc + x)
    }

    /// Checks the sufficiency condition for segment-based markets: for every
    /// agent subset S whose owned-good set does not cover all goods, some
    /// agent in S must place positive rate on an uncovered good. Returns a
    /// witness subset on failure. Exhaustive over 2^n subsets.
    pub fn validate_sufficiency(&self) -> Result<Option<Vec<usize>>> {
        if !self.all_segment_based() {
            return Err(Error::Unsupported(
                "sufficiency check is defined for spending-constraint markets".into(),
            ));
        }
        let n = self.agents_count();
        let m = self.goods_count();
        if n > 20 {
            return Err(Error::Validation(format!(
                "sufficiency check is exhaustive and limited to 20 agents, got {n}"
            )));
        }
        // owned[i], valued[i] as bitmasks over goods
        let mut owned = vec![0u32; n];
        let mut valued = vec![0u32; n];
        for (i, a) in self.agents.iter().enumerate() {
            for j in 0..m {
                if a.endowment[j].is_positive() {
                    owned[i] |= 1 << j;
                }
            }
            if let UtilitySpec::SpendingConstraint { segments } = &a.utility {
                for (j, segs) in segments.iter().enumerate() {
                    if !segs.is_empty() {
                        valued[i] |= 1 << j;
                    }
                }
            }
        }
        let all_goods = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
        for s in 1u32..(1 << n) {
            let mut gamma = 0u32;
            for (i, o) in owned.iter().enumerate() {
                if s & (1 << i) != 0 {
                    gamma |= o;
                }
            }
            if gamma == all_goods {
                continue;
            }
            let uncovered = all_goods & !gamma;
            let ok = (0..n).any(|i| s & (1 << i) != 0 && valued[i] & uncovered != 0);
            if !ok {
                let witness = (0..n).filter(|i| s & (1 << i) != 0).collect();
                return Ok(Some(witness));
            }
        }
        Ok(None)
    }

    pub fn good_index(&self, name: &str) -> Result<usize> {
        self.goods
            .iter()
            .position(|g| g == name)
            .ok_or_else(|| Error::Validation(format!("unknown good {name:?}")))
    }
}

fn validate_utility(u: &UtilitySpec, m: usize, agent: &str) -> Result<u64> {
    let mut bits = 0u64;
    match u {
        UtilitySpec::CobbDouglas { exponents } => {
            if exponents.len() != m {
                return Err(Error::Internal("exponent vector length mismatch".into()));
            }
            if exponents.iter().any(|e| e.is_negative()) {
                return Err(Error::Validation(format!(
                    "agent {agent}: Cobb-Douglas exponents must be >= 0"
                )));
            }
            if exponents.iter().all(|e| e.is_zero()) {
                return Err(Error::Validation(format!(
                    "agent {agent}: all-zero Cobb-Douglas exponents"
                )));
            }
            for e in exponents.iter().filter(|e| !e.is_zero()) {
                bits += rational_bits(e);
            }
        }
        UtilitySpec::Ces { values, rho } => {
            if values.len() != m {
                return Err(Error::Internal("CES value vector length mismatch".into()));
            }
            if values.iter().any(|v| v.is_negative()) {
                return Err(Error::Validation(format!(
                    "agent {agent}: CES values must be >= 0"
                )));
            }
            if values.iter().all(|v| v.is_zero()) {
                return Err(Error::Validation(format!("agent {agent}: all-zero CES values")));
            }
            if !rho.is_positive() || *rho >= Rat::one() {
                return Err(Error::Validation(format!(
                    "agent {agent}: CES rho must satisfy 0 < rho < 1, got {}",
                    rat_str(rho)
                )));
            }
            if rho.denom().bits() > 16 {
                return Err(Error::Validation(format!(
                    "agent {agent}: CES rho denominator too large for exact exponent handling"
                )));
            }
            for v in values.iter().filter(|v| !v.is_zero()) {
                bits += rational_bits(v);
            }
            bits += rational_bits(rho);
        }
        UtilitySpec::SpendingConstraint { segments } => {
            if segments.len() != m {
                return Err(Error::Internal("segment table length mismatch".into()));
            }
            let mut any = false;
            for (j, segs) in segments.iter().enumerate() {
                let mut prev: Option<&BigInt> = None;
                for s in segs {
                    any = true;
                    if !s.rate.is_positive() {
                        return Err(Error::Validation(format!(
                            "agent {agent}, good index {j}: segment rates must be positive integers"
                        )));
                    }
                    if let Some(p) = prev {
                        if s.rate >= *p {
                            return Err(Error::Validation(format!(
                                "agent {agent}, good index {j}: segment rates must strictly decrease"
                            )));
                        }
                    }
                    if !s.budget_fraction.is_positive() || s.budget_fraction > Rat::one() {
                        return Err(Error::Validation(format!(
                            "agent {agent}, good index {j}: budget fractions must lie in (0, 1]"
                        )));
                    }
                    bits += s.rate.bits().max(1) + rational_bits(&s.budget_fraction);
                    prev = Some(&s.rate);
                }
            }
            if !any {
                return Err(Error::Validation(format!(
                    "agent {agent}: utility has no segments"
                )));
            }
        }
    }
    Ok(bits)
}

fn value_to_rat(v: &Value, ctx: &str) -> Result<Rat> {
    match v {
        Value::String(s) => parse_rat(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_integer(BigInt::from(i)))
            } else if let Some(u) = n.as_u64() {
                Ok(Rat::from_integer(BigInt::from(u)))
            } else {
                Err(Error::Parse(format!(
                    "{ctx}: floating-point literals are not exact; write rationals as strings"
                )))
            }
        }
        other => Err(Error::Parse(format!("{ctx}: expected rational, got {other}"))),
    }
}

fn value_to_big_uint(v: &Value, ctx: &str) -> Result<BigInt> {
    let r = value_to_rat(v, ctx)?;
    if !r.is_integer() || r.is_negative() {
        return Err(Error::Validation(format!(
            "{ctx}: expected a non-negative integer, got {}",
            rat_str(&r)
        )));
    }
    Ok(r.to_integer())
}

fn named_map_to_vec<T: Clone + Default>(
    map: BTreeMap<String, T>,
    goods: &[String],
    ctx: &str,
) -> Result<Vec<T>> {
    let mut out = vec![T::default(); goods.len()];
    for (name, v) in map {
        let j = goods
            .iter()
            .position(|g| *g == name)
            .ok_or_else(|| Error::Validation(format!("{ctx}: unknown good {name:?}")))?;
        out[j] = v;
    }
    Ok(out)
}

/// Parses a market instance from JSON text.
pub fn parse_market(text: &str) -> Result<Market> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Parse("top level must be an object".into()))?;
    let goods: Vec<String> = obj
        .get("goods")
        .and_then(|g| g.as_array())
        .ok_or_else(|| Error::Parse("missing \"goods\" array".into()))?
        .iter()
        .map(|g| {
            g.as_str()
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse("good names must be strings".into()))
        })
        .collect::<Result<_>>()?;
    let raw_agents = obj
        .get("agents")
        .and_then(|a| a.as_array())
        .ok_or_else(|| Error::Parse("missing \"agents\" array".into()))?;

    let mut agents = Vec::with_capacity(raw_agents.len());
    for (idx, ra) in raw_agents.iter().enumerate() {
        let ra = ra
            .as_object()
            .ok_or_else(|| Error::Parse(format!("agent #{idx} must be an object")))?;
        let name = ra
            .get("name")
            .and_then(|n| n.as_str())
            .map(str::to_owned)
            .unwrap_or_else(|| format!("a{}", idx + 1));
        let ctx = format!("agent {name}");
        let mut endowment_map = BTreeMap::new();
        if let Some(e) = ra.get("endowment") {
            let e = e
                .as_object()
                .ok_or_else(|| Error::Parse(format!("{ctx}: endowment must be an object")))?;
            for (g, v) in e {
                endowment_map.insert(g.clone(), value_to_rat(v, &ctx)?);
            }
        }
        let endowment = named_map_to_vec(endowment_map, &goods, &ctx)?;
        let utility = parse_utility(
            ra.get("utility")
                .ok_or_else(|| Error::Parse(format!("{ctx}: missing utility")))?,
            &goods,
            &ctx,
        )?;
        agents.push(Agent {
            name,
            endowment,
            utility,
        });
    }
    Market::from_parts(goods, agents)
}

fn parse_utility(v: &Value, goods: &[String], ctx: &str) -> Result<UtilitySpec> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse(format!("{ctx}: utility must be an object")))?;
    let ty = obj
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| Error::Parse(format!("{ctx}: utility needs a \"type\"")))?;
    match ty {
        "linear" => {
            let values = obj
                .get("values")
                .and_then(|x| x.as_object())
                .ok_or_else(|| Error::Parse(format!("{ctx}: linear utility needs values")))?;
            let mut rates: BTreeMap<String, BigInt> = BTreeMap::new();
            for (g, v) in values {
                rates.insert(g.clone(), value_to_big_uint(v, ctx)?);
            }
            let rates = named_map_to_vec(rates, goods, ctx)?;
            if rates.iter().all(|r| r.is_zero()) {
                return Err(Error::Validation(format!("{ctx}: all-zero linear utility")));
            }
            // One segment per valued good, full budget spendable on it.
            let segments = rates
                .into_iter()
                .map(|rate| {
                    if rate.is_zero() {
                        vec![]
                    } else {
                        vec![Segment {
                            rate,
                            budget_fraction: Rat::one(),
                        }]
                    }
                })
                .collect();
            Ok(UtilitySpec::SpendingConstraint { segments })
        }
        "cobb_douglas" => {
            let exps = obj
                .get("exponents")
                .and_then(|x| x.as_object())
                .ok_or_else(|| Error::Parse(format!("{ctx}: cobb_douglas needs exponents")))?;
            let mut map = BTreeMap::new();
            for (g, v) in exps {
                map.insert(g.clone(), value_to_rat(v, ctx)?);
            }
            Ok(UtilitySpec::CobbDouglas {
                exponents: named_map_to_vec(map, goods, ctx)?,
            })
        }
        "ces" => {
            let vals = obj
                .get("values")
                .and_then(|x| x.as_object())
                .ok_or_else(|| Error::Parse(format!("{ctx}: ces needs values")))?;
            let mut map = BTreeMap::new();
            for (g, v) in vals {
                map.insert(g.clone(), value_to_rat(v, ctx)?);
            }
            let rho = value_to_rat(
                obj.get("rho")
                    .ok_or_else(|| Error::Parse(format!("{ctx}: ces needs rho")))?,
                ctx,
            )?;
            Ok(UtilitySpec::Ces {
                values: named_map_to_vec(map, goods, ctx)?,
                rho,
            })
        }
        "spending_constraint" => {
            let segs = obj
                .get("segments")
                .and_then(|x| x.as_object())
                .ok_or_else(|| Error::Parse(format!("{ctx}: spending_constraint needs segments")))?;
            let mut map: BTreeMap<String, Vec<Segment>> = BTreeMap::new();
            for (g, list) in segs {
                let list = list
                    .as_array()
                    .ok_or_else(|| Error::Parse(format!("{ctx}: segments of {g} must be a list")))?;
                let mut parsed = Vec::with_capacity(list.len());
                for item in list {
                    let item = item
                        .as_object()
                        .ok_or_else(|| Error::Parse(format!("{ctx}: segment must be an object")))?;
                    let rate = value_to_big_uint(
                        item.get("rate")
                            .ok_or_else(|| Error::Parse(format!("{ctx}: segment needs rate")))?,
                        ctx,
                    )?;
                    let budget_fraction = value_to_rat(
                        item.get("budget_fraction").ok_or_else(|| {
                            Error::Parse(format!("{ctx}: segment needs budget_fraction"))
                        })?,
                        ctx,
                    )?;
                    parsed.push(Segment {
                        rate,
                        budget_fraction,
                    });
                }
                map.insert(g.clone(), parsed);
            }
            Ok(UtilitySpec::SpendingConstraint {
                segments: named_map_to_vec(map, goods, ctx)?,
            })
        }
        other => Err(Error::Parse(format!("{ctx}: unknown utility type {other:?}"))),
    }
}

/// Loads and validates a market instance file.
pub fn load_market(path: impl AsRef<Path>) -> Result<Market> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_market(&text)
}

/// Serializes a market back to the instance format. Endowments are written
/// de-normalized (multiplied by the recorded supply scale), so loading the
/// output reproduces the market exactly, scale factors included.
pub fn market_to_json(market: &Market) -> Value {
    let mut agents = Vec::new();
    for a in &market.agents {
        let mut endowment = serde_json::Map::new();
        for (j, w) in a.endowment.iter().enumerate() {
            if !w.is_zero() {
                let raw = w * &market.supply_scale[j];
                endowment.insert(market.goods[j].clone(), Value::String(rat_str(&raw)));
            }
        }
        let utility = match &a.utility {
            UtilitySpec::CobbDouglas { exponents } => {
                let mut exps = serde_json::Map::new();
                for (j, e) in exponents.iter().enumerate() {
                    if !e.is_zero() {
                        exps.insert(market.goods[j].clone(), Value::String(rat_str(e)));
                    }
                }
                serde_json::json!({"type": "cobb_douglas", "exponents": exps})
            }
            UtilitySpec::Ces { values, rho } => {
                let mut vals = serde_json::Map::new();
                for (j, v) in values.iter().enumerate() {
                    if !v.is_zero() {
                        vals.insert(market.goods[j].clone(), Value::String(rat_str(v)));
                    }
                }
                serde_json::json!({"type": "ces", "values": vals, "rho": rat_str(rho)})
            }
            UtilitySpec::SpendingConstraint { segments } => {
                let mut segs = serde_json::Map::new();
                for (j, list) in segments.iter().enumerate() {
                    if list.is_empty() {
                        continue;
                    }
                    let items: Vec<Value> = list
                        .iter()
                        .map(|s| {
                            serde_json::json!({
                                "rate": Value::String(s.rate.to_string()),
                                "budget_fraction": Value::String(rat_str(&s.budget_fraction)),
                            })
                        })
                        .collect();
                    segs.insert(market.goods[j].clone(), Value::Array(items));
                }
                serde_json::json!({"type": "spending_constraint", "segments": segs})
            }
        };
        agents.push(serde_json::json!({
            "name": a.name,
            "endowment": endowment,
            "utility": utility,
        }));
    }
    serde_json::json!({"goods": market.goods, "agents": agents})
}

/// Writes a market instance file.
pub fn save_market(market: &Market, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(&market_to_json(market))
        .map_err(|e| Error::Internal(format!("serialize: {e}")))?;
    let _ = writeln!(text);
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// The two-good cross market used as a fixture across the test suite:
/// each agent owns one good; utilities are linear with the given values.
pub fn cross_market(u1: [i64; 2], u2: [i64; 2]) -> Market {
    let mk = |vals: [i64; 2]| {
        let segments = vals
            .iter()
            .map(|&v| {
                if v == 0 {
                    vec![]
                } else {
                    vec![Segment {
                        rate: BigInt::from(v),
                        budget_fraction: Rat::one(),
                    }]
                }
            })
            .collect();
        UtilitySpec::SpendingConstraint { segments }
    };
    Market::from_parts(
        vec!["g1".into(), "g2".into()],
        vec![
            Agent {
                name: "a1".into(),
                endowment: vec![Rat::one(), Rat::zero()],
                utility: mk(u1),
            },
            Agent {
                name: "a2".into(),
                endowment: vec![Rat::zero(), Rat::one()],
                utility: mk(u2),
            },
        ],
    )
    .expect("cross market is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{ri, rq};

    const CROSS: &str = r#"{
        "goods": ["g1", "g2"],
        "agents": [
            {"name": "a1", "endowment": {"g1": 1}, "utility": {"type": "linear", "values": {"g2": 1}}},
            {"name": "a2", "endowment": {"g2": 1}, "utility": {"type": "linear", "values": {"g1": 1}}}
        ]
    }"#;

    #[test]
    fn loads_symmetric_cross_market() {
        let m = parse_market(CROSS).unwrap();
        assert_eq!(m.goods_count(), 2);
        assert_eq!(m.agents_count(), 2);
        for j in 0..2 {
            let total: Rat = m.agents.iter().map(|a| a.endowment[j].clone()).sum();
            assert_eq!(total, ri(1));
        }
        assert!(m.all_segment_based());
    }

    #[test]
    fn normalizes_supply_and_records_scale() {
        let text = r#"{
            "goods": ["g1", "g2"],
            "agents": [
                {"name": "a1", "endowment": {"g1": 2, "g2": "1/2"}, "utility": {"type": "linear", "values": {"g2": 1}}},
                {"name": "a2", "endowment": {"g1": 1, "g2": "1/2"}, "utility": {"type": "linear", "values": {"g1": 1}}}
            ]
        }"#;
        let m = parse_market(text).unwrap();
        assert_eq!(m.supply_scale[0], ri(3));
        assert_eq!(m.supply_scale[1], ri(1));
        assert_eq!(m.agents[0].endowment[0], rq(2, 3));
        assert_eq!(m.agents[1].endowment[0], rq(1, 3));
        let total: Rat = m.agents.iter().map(|a| a.endowment[0].clone()).sum();
        assert_eq!(total, ri(1));
    }

    #[test]
    fn rejects_negative_endowment() {
        let text = r#"{
            "goods": ["g1", "g2"],
            "agents": [
                {"name": "a1", "endowment": {"g1": 1, "g2": "-1/2"}, "utility": {"type": "linear", "values": {"g2": 1}}},
                {"name": "a2", "endowment": {"g2": 1}, "utility": {"type": "linear", "values": {"g1": 1}}}
            ]
        }"#;
        assert!(matches!(parse_market(text), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_bad_segments_and_rho() {
        let nondecreasing = r#"{
            "goods": ["g1", "g2"],
            "agents": [
                {"endowment": {"g1": 1, "g2": 1}, "utility": {"type": "spending_constraint",
                 "segments": {"g1": [{"rate": 2, "budget_fraction": "1/2"}, {"rate": 2, "budget_fraction": "1/2"}]}}}
            ]
        }"#;
        assert!(matches!(parse_market(nondecreasing), Err(Error::Validation(_))));

        let bad_rho = r#"{
            "goods": ["g1", "g2"],
            "agents": [
                {"endowment": {"g1": 1, "g2": 1}, "utility": {"type": "ces", "values": {"g1": 1, "g2": 1}, "rho": "3/2"}}
            ]
        }"#;
        assert!(matches!(parse_market(bad_rho), Err(Error::Validation(_))));

        let zero_supply = r#"{
            "goods": ["g1", "g2"],
            "agents": [
                {"endowment": {"g1": 1}, "utility": {"type": "linear", "values": {"g1": 1, "g2": 1}}}
            ]
        }"#;
        assert!(matches!(parse_market(zero_supply), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_single_good() {
        let err = Market::from_parts(
            vec!["g1".into()],
            vec![Agent {
                name: "a1".into(),
                endowment: vec![ri(1)],
                utility: UtilitySpec::CobbDouglas {
                    exponents: vec![ri(1)],
                },
            }],
        );
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn linear_becomes_one_segment_per_valued_good() {
        let m = parse_market(CROSS).unwrap();
        match &m.agents[0].utility {
            UtilitySpec::SpendingConstraint { segments } => {
                assert!(segments[0].is_empty());
                assert_eq!(segments[1].len(), 1);
                assert_eq!(segments[1][0].rate, BigInt::from(1));
                assert_eq!(segments[1][0].budget_fraction, ri(1));
            }
            other => panic!("expected segments, got {other:?}"),
        }
    }

    #[test]
    fn roundtrip_is_identical() {
        let text = r#"{
            "goods": ["g1", "g2", "g3"],
            "agents": [
                {"name": "a1", "endowment": {"g1": 3, "g3": "1/4"}, "utility": {"type": "spending_constraint",
                 "segments": {"g2": [{"rate": 4, "budget_fraction": "3/10"}, {"rate": 2, "budget_fraction": "1/2"}],
                              "g3": [{"rate": 3, "budget_fraction": 1}]}}},
                {"name": "a2", "endowment": {"g2": 2, "g3": "3/4"}, "utility": {"type": "linear", "values": {"g1": 5}}}
            ]
        }"#;
        let m1 = parse_market(text).unwrap();
        let serialized = serde_json::to_string(&market_to_json(&m1)).unwrap();
        let m2 = parse_market(&serialized).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn budget_examples() {
        let m = cross_market([0, 1], [1, 2]);
        assert_eq!(m.budget(0, &[ri(1), ri(1)]), ri(1));

        let split = Market::from_parts(
            vec!["g1".into(), "g2".into()],
            vec![
                Agent {
                    name: "a1".into(),
                    endowment: vec![rq(1, 2), rq(1, 2)],
                    utility: UtilitySpec::CobbDouglas {
                        exponents: vec![ri(1), ri(1)],
                    },
                },
                Agent {
                    name: "a2".into(),
                    endowment: vec![rq(1, 2), rq(1, 2)],
                    utility: UtilitySpec::CobbDouglas {
                        exponents: vec![ri(1), ri(1)],
                    },
                },
            ],
        )
        .unwrap();
        assert_eq!(split.budget(0, &[ri(1), ri(2)]), rq(3, 2));

        let thirds = Market::from_parts(
            vec!["g1".into(), "g2".into()],
            vec![
                Agent {
                    name: "a1".into(),
                    endowment: vec![rq(1, 3), rq(2, 3)],
                    utility: UtilitySpec::CobbDouglas {
                        exponents: vec![ri(1), ri(1)],
                    },
                },
                Agent {
                    name: "a2".into(),
                    endowment: vec![rq(2, 3), rq(1, 3)],
                    utility: UtilitySpec::CobbDouglas {
                        exponents: vec![ri(1), ri(1)],
                    },
                },
            ],
        )
        .unwrap();
        assert_eq!(thirds.budget(0, &[ri(3), rq(3, 2)]), ri(2));
    }

    #[test]
    fn sufficiency_cross_ok() {
        let m = cross_market([0, 1], [1, 0]);
        assert_eq!(m.validate_sufficiency().unwrap(), None);
    }

    #[test]
    fn sufficiency_violation_witness() {
        // Agent 1 owns g1 and values only g1; S = {0} covers only g1 and
        // nobody in S wants g2.
        let m = cross_market([1, 0], [1, 0]);
        assert_eq!(m.validate_sufficiency().unwrap(), Some(vec![0]));
    }

    #[test]
    fn sufficiency_single_agent_owning_everything() {
        let m = Market::from_parts(
            vec!["g1".into(), "g2".into()],
            vec![Agent {
                name: "a1".into(),
                endowment: vec![ri(1), ri(1)],
                utility: UtilitySpec::SpendingConstraint {
                    segments: vec![
                        vec![Segment {
                            rate: BigInt::from(1),
                            budget_fraction: ri(1),
                        }],
                        vec![],
                    ],
                },
            }],
        )
        .unwrap();
        assert_eq!(m.validate_sufficiency().unwrap(), None);
    }
}
