// Scratch diagnostics for the exact pipeline; not part of the public surface.
use mkteq_core::config::Overrides;
use mkteq_core::demand::{exact_oracle, MarketOracle, SurplusOracle};
use mkteq_core::gen::{generate_instance, InstanceClass};
use mkteq_core::rat::norm2_sq;
use mkteq_core::wgs::{find_gap, update_prices};
use mkteq_core::SolverConfig;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let market = generate_instance(InstanceClass::SpendingConstraint, 3, 3, seed).unwrap();
    println!("market bits L = {}", market.input_bits);
    let eps = mkteq_core::exact::exact_epsilon(3, market.input_bits).unwrap();
    let config = SolverConfig::derive(&market, &eps, &Overrides::default()).unwrap();
    println!(
        "M = {}, grid bits = {}, max_rounds = {}",
        config.m_bits,
        2 * 3 * config.m_bits + config.l,
        config.max_rounds
    );
    let mut oracle = MarketOracle::exact(&market);
    let mut p: Vec<_> = vec![mkteq_core::rat::ri(1); 3];
    for round in 0..12 {
        let s = oracle.query(&p).unwrap();
        let phi = norm2_sq(&s);
        println!(
            "round {round}: phi = {} (~{:.3e})  s = {:?}",
            phi,
            rat_to_f64(&phi),
            s.iter().map(rat_to_f64).collect::<Vec<_>>()
        );
        if phi == mkteq_core::rat::ri(0) {
            println!("exact zero reached");
            break;
        }
        let (k, g1, _) = find_gap(&s, &mkteq_core::rat::ri(0)).unwrap();
        println!("  k = {k}, G1 = {g1:?}");
        // Manual scan of the gap-closed predicate on a coarse grid.
        let mut prev_open = true;
        for num in 101..=400u64 {
            let x = mkteq_core::rat::rq(num as i64, 100);
            let p2 = update_prices(&p, &x, &g1).unwrap();
            let s2 = exact_oracle(&market, &p2).unwrap();
            let min_g1 = g1.iter().map(|&j| &s2[j]).min().unwrap();
            let max_g2 = (0..3)
                .filter(|j| !g1.contains(j))
                .map(|j| s2[j].clone())
                .max()
                .unwrap();
            let open = *min_g1 > max_g2.max(mkteq_core::rat::ri(0));
            if open != prev_open {
                println!("  predicate flips to {} at x = {num}/100", if open { "open" } else { "closed" });
            }
            prev_open = open;
        }
        // Take the engine's own step.
        let cfg2 = config.clone();
        let run = run_one_round(&market, &cfg2, &p);
        match run {
            Some((x, p2)) => {
                println!("  engine chose x = {x}");
                p = p2;
            }
            None => {
                println!("  engine failed/slow; aborting scan");
                break;
            }
        }
    }
}

fn rat_to_f64(r: &mkteq_core::rat::Rat) -> f64 {
    let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}

fn run_one_round(
    market: &mkteq_core::Market,
    config: &SolverConfig,
    p: &[mkteq_core::rat::Rat],
) -> Option<(mkteq_core::rat::Rat, Vec<mkteq_core::rat::Rat>)> {
    use mkteq_core::rat::ri;
    let s = exact_oracle(market, p).unwrap();
    let (_, g1, g2) = find_gap(&s, &ri(0)).unwrap();
    let bound = config.spending_grid_bound();
    let mut probes = 0u64;
    let out = mkteq_core::wgs::grid_boundary(&bound, |x| {
        probes += 1;
        if probes > 2000 {
            return Err(mkteq_core::Error::Internal("probe budget".into()));
        }
        let p2 = update_prices(p, x, &g1).unwrap();
        let s2 = exact_oracle(market, &p2)?;
        let min_g1 = g1.iter().map(|&j| &s2[j]).min().unwrap();
        let max_g2 = g2.iter().map(|j| s2[*j].clone()).max().unwrap();
        Ok(*min_g1 > max_g2.max(ri(0)))
    });
    match out {
        Ok(b) => {
            println!("  probes used: {}", b.probes);
            let x = b.first_false?;
            let p2 = update_prices(p, &x, &g1).unwrap();
            let p2 = mkteq_core::spending::rounding(&p2, config.m_bits).unwrap();
            Some((x, p2))
        }
        Err(e) => {
            println!("  search error: {e} after {probes} probes");
            None
        }
    }
}
