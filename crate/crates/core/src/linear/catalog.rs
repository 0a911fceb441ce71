use std::collections::BTreeSet;

use crate::model::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Small,
    Medium,
    Large,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Small, Tier::Medium, Tier::Large];

    pub fn name(self) -> &'static str {
        match self {
            Tier::Small => "small",
            Tier::Medium => "medium",
            Tier::Large => "large",
        }
    }
}

/// Cap on the number of product features generated for three or more
/// parameters, per tier. Lowest total degree is kept first.
pub fn max_product_features(tier: Tier) -> usize {
    match tier {
        Tier::Small => 15,
        Tier::Medium => 22,
        Tier::Large => 60,
    }
}

fn v(n: &str) -> Expr {
    Expr::var(n)
}

fn sq(e: Expr) -> Expr {
    Expr::pow(e, Expr::int(2))
}

fn clog(e: Expr) -> Expr {
    Expr::ceil(Expr::log2(e))
}

fn flog(e: Expr) -> Expr {
    Expr::floor(Expr::log2(e))
}

fn exp_of(base: i64, e: Expr) -> Expr {
    Expr::pow(Expr::int(base), e)
}

fn one_dim(x: &str, tier: Tier) -> Vec<Expr> {
    let mut out = vec![v(x), sq(v(x))];
    if tier >= Tier::Medium {
        out.extend([
            clog(v(x)),
            Expr::floor(Expr::pow(v(x), Expr::rat(1, 2))),
            v(x) * clog(v(x)),
        ]);
    }
    if tier >= Tier::Large {
        out.extend([
            flog(v(x)),
            v(x) * flog(v(x)),
            exp_of(2, v(x)),
            exp_of(5, v(x)),
            v(x) * exp_of(2, v(x)),
            Expr::fact(v(x)),
        ]);
    }
    out
}

fn two_dim(x: &str, y: &str, tier: Tier) -> Vec<Expr> {
    let mut out = vec![v(x), v(y)];
    if tier >= Tier::Medium {
        out.extend([
            sq(v(x)),
            v(x) * v(y),
            sq(v(y)),
            sq(v(x)) * v(y),
            v(x) * sq(v(y)),
            sq(v(x)) * sq(v(y)),
        ]);
    }
    if tier >= Tier::Large {
        out.extend([
            Expr::floor(v(x) / v(y)),
            Expr::floor(v(y) / v(x)),
            Expr::ceil(v(x) / v(y)),
            Expr::ceil(v(y) / v(x)),
            exp_of(2, v(x)),
            exp_of(2, v(y)),
            Expr::max(v(x), v(y)),
        ]);
        for z in [x, y] {
            out.extend([clog(v(z)), flog(v(z)), v(z) * clog(v(z)), v(z) * flog(v(z))]);
        }
    }
    out
}

/// Exponents reachable on one variable with their minimal number of base
/// functions used: products of distinct members of {x}, {x, x^2} or
/// {x, x^2, x^3}.
fn exponent_costs(tier: Tier) -> Vec<(u32, usize)> {
    let base: Vec<u32> = match tier {
        Tier::Small => vec![1],
        Tier::Medium => vec![1, 2],
        Tier::Large => vec![1, 2, 3],
    };
    let mut best: std::collections::BTreeMap<u32, usize> = Default::default();
    for mask in 0u32..(1 << base.len()) {
        let e: u32 = (0..base.len()).filter(|i| mask & (1 << i) != 0).map(|i| base[i]).sum();
        let c = mask.count_ones() as usize;
        let slot = best.entry(e).or_insert(c);
        *slot = (*slot).min(c);
    }
    best.into_iter().collect()
}

fn products(params: &[String], tier: Tier) -> Vec<Expr> {
    let options = exponent_costs(tier);
    let width = match tier {
        Tier::Small => 1,
        Tier::Medium => 2,
        Tier::Large => 3,
    };
    let max_cost = params.len() + width;
    let cap = max_product_features(tier);
    let mut vectors: Vec<Vec<u32>> = vec![vec![]];
    for _ in params {
        let mut next = vec![];
        for prefix in &vectors {
            for (e, _) in &options {
                let mut p = prefix.clone();
                p.push(*e);
                next.push(p);
            }
        }
        // Prune by cost as we go so the enumeration stays bounded.
        next.retain(|p| cost_of(p, &options) <= max_cost);
        vectors = next;
        if vectors.len() > 50 * cap {
            vectors.sort_by_key(|p| (p.iter().sum::<u32>(), p.clone()));
            vectors.truncate(50 * cap);
        }
    }
    vectors.retain(|p| p.iter().any(|e| *e > 0));
    vectors.sort_by_key(|p| (p.iter().sum::<u32>(), std::cmp::Reverse(p.clone())));
    vectors.truncate(cap);
    vectors
        .into_iter()
        .map(|p| {
            p.iter()
                .zip(params)
                .filter(|(e, _)| **e > 0)
                .map(|(e, n)| if *e == 1 { v(n) } else { Expr::pow(v(n), Expr::int(*e as i64)) })
                .reduce(|a, b| a * b)
                .unwrap()
        })
        .collect()
}

fn cost_of(p: &[u32], options: &[(u32, usize)]) -> usize {
    p.iter().map(|e| options.iter().find(|(x, _)| x == e).map(|(_, c)| *c).unwrap_or(0)).sum()
}

/// Candidate features for a parameter list and tier. Larger tiers include
/// every feature of the smaller ones.
pub fn catalog(params: &[String], tier: Tier) -> Vec<Expr> {
    let feats = match params {
        [] => vec![],
        [x] => one_dim(x, tier),
        [x, y] => two_dim(x, y, tier),
        _ => {
            // Smaller tiers first so that every tier contains the one below.
            let mut out = vec![];
            for t in Tier::ALL.into_iter().filter(|t| *t <= tier) {
                let extra: Vec<Expr> = products(params, t).into_iter().filter(|e| !out.contains(e)).collect();
                let room = max_product_features(t).saturating_sub(out.len());
                out.extend(extra.into_iter().take(room));
            }
            out
        }
    };
    let mut seen = BTreeSet::new();
    feats.into_iter().filter(|f| seen.insert(f.clone())).collect()
}
