//! Reference computations used by the integration tests. None of these go
//! through the crate's probability code.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use rotlab::prob::Prob;
use rotlab::{Dist, Value};

/// A distribution stored as integer weights over `0..len`, total `sum`.
#[derive(Debug, Clone)]
pub struct IntDist {
    pub w: Vec<u64>,
}

impl IntDist {
    pub fn total(&self) -> u64 {
        self.w.iter().sum()
    }

    pub fn to_dist(&self) -> Dist {
        let t = self.total() as i64;
        Dist::new(
            self.w
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0)
                .map(|(i, &w)| (Value::Int(i as i64), Prob::new(BigInt::from(w), BigInt::from(t)))),
        )
        .unwrap()
    }
}

/// Random pair over a shared alphabet of size `1..=max_len`; entries may be
/// zero on either side.
pub fn random_pair(rng: &mut ChaCha20Rng, max_len: usize) -> (IntDist, IntDist) {
    let len = rng.random_range(1..=max_len);
    let mut side = || {
        let mut w: Vec<u64> = (0..len).map(|_| if rng.random_bool(0.25) { 0 } else { rng.random_range(1..=20) }).collect();
        if w.iter().all(|&x| x == 0) {
            let i = rng.random_range(0..len);
            w[i] = 1;
        }
        IntDist { w }
    };
    (side(), side())
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `max_S |P(S) - Q(S)|` by walking every subset in Gray-code order.
pub fn subset_max_distance(p: &IntDist, q: &IntDist) -> BigRational {
    let (a, b) = (p.total() as i128, q.total() as i128);
    let n = p.w.len();
    // scaled gap of S is sum_{i in S} (p_i * b - q_i * a)
    let gap: Vec<i128> = (0..n).map(|i| p.w[i] as i128 * b - q.w[i] as i128 * a).collect();
    let mut cur = 0i128;
    let mut best = 0i128;
    let mut inside = vec![false; n];
    for k in 1u64..(1u64 << n) {
        let bit = k.trailing_zeros() as usize;
        inside[bit] = !inside[bit];
        cur += if inside[bit] { gap[bit] } else { -gap[bit] };
        best = best.max(cur.abs());
    }
    BigRational::new(BigInt::from(best), BigInt::from(a * b))
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `Pr[lo <= Bin(n, 1/2) <= hi]`.
pub fn binomial_half_range(n: u64, lo: u64, hi: u64) -> BigRational {
    let count: u64 = (lo..=hi.min(n)).map(|r| binomial(n, r)).sum();
    BigRational::new(BigInt::from(count), BigInt::from(1u64 << n))
}

/// `I_S(X;Y|Z)` over equally likely samples `(z, x, y)` using only integer
/// counting: `(1/2) Σ |N N_zxy N_z - N N_zx N_zy| / (N^2 N_z)` regrouped
/// over a common denominator.
pub fn uniform_statistical_information<Z: Ord + Clone, X: Ord + Clone, Y: Ord + Clone>(samples: &[(Z, X, Y)]) -> BigRational {
    use std::collections::{BTreeMap, BTreeSet};
    let n = samples.len() as i128;
    let mut nz: BTreeMap<Z, i128> = BTreeMap::new();
    let mut nzx: BTreeMap<(Z, X), i128> = BTreeMap::new();
    let mut nzy: BTreeMap<(Z, Y), i128> = BTreeMap::new();
    let mut nzxy: BTreeMap<(Z, X, Y), i128> = BTreeMap::new();
    let mut xs = BTreeSet::new();
    let mut ys = BTreeSet::new();
    for (z, x, y) in samples {
        *nz.entry(z.clone()).or_default() += 1;
        *nzx.entry((z.clone(), x.clone())).or_default() += 1;
        *nzy.entry((z.clone(), y.clone())).or_default() += 1;
        *nzxy.entry((z.clone(), x.clone(), y.clone())).or_default() += 1;
        xs.insert(x.clone());
        ys.insert(y.clone());
    }
    // P(z,x,y) = c/n ; P(z) P(x|z) P(y|z) = nzx nzy / (n nz)
    let mut total = BigRational::from_integer(BigInt::from(0));
    for (z, &cz) in &nz {
        for x in &xs {
            for y in &ys {
                let c = *nzxy.get(&(z.clone(), x.clone(), y.clone())).unwrap_or(&0);
                let a = *nzx.get(&(z.clone(), x.clone())).unwrap_or(&0);
                let b = *nzy.get(&(z.clone(), y.clone())).unwrap_or(&0);
                let diff = (c * cz - a * b).abs();
                total += BigRational::new(BigInt::from(diff), BigInt::from(n * cz));
            }
        }
    }
    total / BigRational::from_integer(BigInt::from(2))
}
