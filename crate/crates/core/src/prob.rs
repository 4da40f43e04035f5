//! Exact finite probability: distributions with rational weights, joint
//! distributions with named coordinates, statistical distance and
//! statistical information.
//!
//! Nothing here touches floating point. Distributions are immutable values and
//! every operation returns a fresh one.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::value::Value;

/// An exact probability (or any exact rational quantity).
pub type Prob = BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("cannot condition on {coord} = {value}: event has probability zero")]
    ZeroProbability { coord: String, value: String },
    #[error("coordinate name `{0}` appears on both sides of a product")]
    NameClash(String),
    #[error("duplicate coordinate name `{0}`")]
    DuplicateName(String),
    #[error("duplicate outcome label {0}")]
    DuplicateLabel(String),
    #[error("negative weight {weight} on outcome {label}")]
    Negative { label: String, weight: String },
    #[error("weights sum to {0}, expected 1")]
    NotNormalized(String),
    #[error("outcome {label} has {got} coordinates, expected {expected}")]
    Arity { label: String, got: usize, expected: usize },
    #[error("coordinate groups must be pairwise disjoint (`{0}` repeated)")]
    OverlappingGroups(String),
    #[error("malformed rational `{0}`")]
    BadRational(String),
}

pub fn ratio(num: i64, den: i64) -> Prob {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Prob {
    Prob::zero()
}

pub fn one() -> Prob {
    Prob::one()
}

/// Canonical `"num/den"` rendering; integers keep an explicit denominator.
pub fn fmt_prob(p: &Prob) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_prob(s: &str) -> Result<Prob, ProbError> {
    let bad = || ProbError::BadRational(s.to_string());
    let t = s.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = t.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

/// Lossy conversion, used only for plotting series and sampling mode.
pub fn to_f64(p: &Prob) -> f64 {
    p.to_f64().unwrap_or(f64::NAN)
}

/// An exact probability distribution over finitely many labeled outcomes.
///
/// Only outcomes with strictly positive weight are stored; anything absent
/// has weight zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dist {
    weights: BTreeMap<Value, Prob>,
}

impl Dist {
    /// Builds a validated distribution. Labels must be distinct, weights
    /// non-negative and summing to exactly one.
    pub fn new(weights: impl IntoIterator<Item = (Value, Prob)>) -> Result<Self, ProbError> {
        let mut map = BTreeMap::new();
        for (label, w) in weights {
            if w.is_negative() {
                return Err(ProbError::Negative {
                    label: label.to_string(),
                    weight: fmt_prob(&w),
                });
            }
            if map.contains_key(&label) {
                return Err(ProbError::DuplicateLabel(label.to_string()));
            }
            map.insert(label, w);
        }
        Self::from_map(map)
    }

    /// Like [`Dist::new`] but sums the weights of repeated labels, which is
    /// how enumerations are collapsed into laws.
    pub fn from_weighted(weights: impl IntoIterator<Item = (Value, Prob)>) -> Result<Self, ProbError> {
        let mut map: BTreeMap<Value, Prob> = BTreeMap::new();
        for (label, w) in weights {
            if w.is_negative() {
                return Err(ProbError::Negative {
                    label: label.to_string(),
                    weight: fmt_prob(&w),
                });
            }
            *map.entry(label).or_insert_with(Prob::zero) += w;
        }
        Self::from_map(map)
    }

    fn from_map(mut map: BTreeMap<Value, Prob>) -> Result<Self, ProbError> {
        map.retain(|_, w| !w.is_zero());
        let total: Prob = map.values().sum();
        if !total.is_one() {
            return Err(ProbError::NotNormalized(fmt_prob(&total)));
        }
        Ok(Dist { weights: map })
    }

    pub fn point(v: Value) -> Self {
        Dist {
            weights: BTreeMap::from([(v, Prob::one())]),
        }
    }

    /// Uniform over the distinct values given. Panics on an empty set.
    pub fn uniform(values: impl IntoIterator<Item = Value>) -> Self {
        let set: BTreeSet<Value> = values.into_iter().collect();
        assert!(!set.is_empty(), "uniform distribution over an empty set");
        let w = ratio(1, set.len() as i64);
        Dist {
            weights: set.into_iter().map(|v| (v, w.clone())).collect(),
        }
    }

    /// Bernoulli over the bits `1` (weight `p`) and `0`.
    pub fn bernoulli(p: Prob) -> Result<Self, ProbError> {
        let q = Prob::one() - &p;
        Dist::new([(Value::bit(1), p), (Value::bit(0), q)])
    }

    pub fn weight(&self, v: &Value) -> Prob {
        self.weights.get(v).cloned().unwrap_or_else(Prob::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Value, &Prob)> {
        self.weights.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Value> {
        self.weights.keys()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Probability of the event `pred`.
    pub fn prob(&self, pred: impl Fn(&Value) -> bool) -> Prob {
        self.weights
            .iter()
            .filter(|(v, _)| pred(v))
            .map(|(_, w)| w)
            .sum()
    }

    /// Push-forward through `f`.
    pub fn map(&self, f: impl Fn(&Value) -> Value) -> Dist {
        let mut map: BTreeMap<Value, Prob> = BTreeMap::new();
        for (v, w) in &self.weights {
            *map.entry(f(v)).or_insert_with(Prob::zero) += w;
        }
        Dist { weights: map }
    }
}

/// Half the L1 distance, which equals the maximum over events of the gap
/// `|p(S) - q(S)|`. Outcomes missing from either side count as weight zero.
pub fn statistical_distance(p: &Dist, q: &Dist) -> Prob {
    let mut sum = Prob::zero();
    for (v, wp) in &p.weights {
        sum += (wp - q.weight(v)).abs();
    }
    for (v, wq) in &q.weights {
        if !p.weights.contains_key(v) {
            sum += wq;
        }
    }
    sum / BigInt::from(2)
}

/// A distribution over tuples with named coordinates, e.g. `P_{XYZ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointDist {
    names: Vec<String>,
    atoms: BTreeMap<Vec<Value>, Prob>,
}

impl JointDist {
    /// Builds a joint law. Repeated tuples are summed.
    pub fn new<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        atoms: impl IntoIterator<Item = (Vec<Value>, Prob)>,
    ) -> Result<Self, ProbError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(ProbError::DuplicateName(n.clone()));
            }
        }
        let mut map: BTreeMap<Vec<Value>, Prob> = BTreeMap::new();
        for (tuple, w) in atoms {
            if tuple.len() != names.len() {
                let got = tuple.len();
                return Err(ProbError::Arity {
                    label: Value::Tuple(tuple).to_string(),
                    got,
                    expected: names.len(),
                });
            }
            if w.is_negative() {
                return Err(ProbError::Negative {
                    label: Value::Tuple(tuple).to_string(),
                    weight: fmt_prob(&w),
                });
            }
            *map.entry(tuple).or_insert_with(Prob::zero) += w;
        }
        map.retain(|_, w| !w.is_zero());
        let total: Prob = map.values().sum();
        if !total.is_one() {
            return Err(ProbError::NotNormalized(fmt_prob(&total)));
        }
        Ok(JointDist { names, atoms: map })
    }

    /// Wraps a plain distribution as a single named coordinate.
    pub fn from_dist(name: impl Into<String>, d: &Dist) -> Self {
        JointDist {
            names: vec![name.into()],
            atoms: d.iter().map(|(v, w)| (vec![v.clone()], w.clone())).collect(),
        }
    }

    /// Reads a distribution over tuples as a joint law, one name per component.
    pub fn from_tuple_dist<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        d: &Dist,
    ) -> Result<Self, ProbError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut atoms = Vec::new();
        for (v, w) in d.iter() {
            let parts = match v.as_tuple() {
                Some(t) => t.to_vec(),
                None => vec![v.clone()],
            };
            if parts.len() != names.len() {
                return Err(ProbError::Arity {
                    label: v.to_string(),
                    got: parts.len(),
                    expected: names.len(),
                });
            }
            atoms.push((parts, w.clone()));
        }
        JointDist::new(names, atoms)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Value>, &Prob)> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self, tuple: &[Value]) -> Prob {
        self.atoms.get(tuple).cloned().unwrap_or_else(Prob::zero)
    }

    fn index_of(&self, name: &str) -> Result<usize, ProbError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ProbError::UnknownCoordinate(name.to_string()))
    }

    fn indices(&self, coords: &[&str]) -> Result<Vec<usize>, ProbError> {
        coords.iter().map(|c| self.index_of(c)).collect()
    }

    /// Exact marginal on `coords`, in the order given.
    pub fn marginal(&self, coords: &[&str]) -> Result<JointDist, ProbError> {
        let idx = self.indices(coords)?;
        let mut map: BTreeMap<Vec<Value>, Prob> = BTreeMap::new();
        for (tuple, w) in &self.atoms {
            let key = idx.iter().map(|&i| tuple[i].clone()).collect();
            *map.entry(key).or_insert_with(Prob::zero) += w;
        }
        Ok(JointDist {
            names: coords.iter().map(|s| s.to_string()).collect(),
            atoms: map,
        })
    }

    /// Marginal as a plain [`Dist`]: bare values for one coordinate, tuples
    /// otherwise.
    pub fn marginal_dist(&self, coords: &[&str]) -> Result<Dist, ProbError> {
        Ok(self.marginal(coords)?.to_dist())
    }

    /// Restriction to `coord = value`, renormalised. All coordinates are kept.
    pub fn condition(&self, coord: &str, value: &Value) -> Result<JointDist, ProbError> {
        let i = self.index_of(coord)?;
        let kept: BTreeMap<Vec<Value>, Prob> = self
            .atoms
            .iter()
            .filter(|(t, _)| &t[i] == value)
            .map(|(t, w)| (t.clone(), w.clone()))
            .collect();
        let mass: Prob = kept.values().sum();
        if mass.is_zero() {
            return Err(ProbError::ZeroProbability {
                coord: coord.to_string(),
                value: value.to_string(),
            });
        }
        Ok(JointDist {
            names: self.names.clone(),
            atoms: kept.into_iter().map(|(t, w)| (t, w / &mass)).collect(),
        })
    }

    /// Independent product; coordinate names must be disjoint.
    pub fn product(&self, other: &JointDist) -> Result<JointDist, ProbError> {
        for n in &other.names {
            if self.names.contains(n) {
                return Err(ProbError::NameClash(n.clone()));
            }
        }
        let mut atoms = BTreeMap::new();
        for (a, wa) in &self.atoms {
            for (b, wb) in &other.atoms {
                let mut t = a.clone();
                t.extend(b.iter().cloned());
                atoms.insert(t, wa * wb);
            }
        }
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        Ok(JointDist { names, atoms })
    }

    /// Convex combination of joint laws sharing the same coordinate names.
    pub fn mixture(parts: &[(Prob, JointDist)]) -> Result<JointDist, ProbError> {
        let names = match parts.first() {
            Some((_, j)) => j.names.clone(),
            None => return Err(ProbError::NotNormalized("0/1".into())),
        };
        let mut atoms = Vec::new();
        for (w, j) in parts {
            if j.names != names {
                return Err(ProbError::UnknownCoordinate(j.names.join(",")));
            }
            atoms.extend(j.atoms.iter().map(|(t, p)| (t.clone(), p * w)));
        }
        JointDist::new(names, atoms)
    }

    /// Flattens to a [`Dist`] over tuples (bare values when there is a single
    /// coordinate).
    pub fn to_dist(&self) -> Dist {
        let single = self.names.len() == 1;
        Dist {
            weights: self
                .atoms
                .iter()
                .map(|(t, w)| {
                    let label = if single { t[0].clone() } else { Value::Tuple(t.clone()) };
                    (label, w.clone())
                })
                .collect(),
        }
    }

    /// Probability that the named coordinates satisfy `pred`.
    pub fn prob(&self, pred: impl Fn(&[Value]) -> bool) -> Prob {
        self.atoms.iter().filter(|(t, _)| pred(t)).map(|(_, w)| w).sum()
    }
}

/// `I_S(X;Y|Z) = δ(P_XYZ, P_Z P_{X|Z} P_{Y|Z})` for disjoint coordinate
/// groups. An empty `z` means no conditioning.
pub fn statistical_information(
    j: &JointDist,
    x: &[&str],
    y: &[&str],
    z: &[&str],
) -> Result<Prob, ProbError> {
    let mut seen = BTreeSet::new();
    for c in x.iter().chain(y).chain(z) {
        if !seen.insert(*c) {
            return Err(ProbError::OverlappingGroups(c.to_string()));
        }
    }
    let xi = j.indices(x)?;
    let yi = j.indices(y)?;
    let zi = j.indices(z)?;
    let proj = |t: &[Value], idx: &[usize]| -> Vec<Value> { idx.iter().map(|&i| t[i].clone()).collect() };

    struct Slice {
        pz: Prob,
        px: BTreeMap<Vec<Value>, Prob>,
        py: BTreeMap<Vec<Value>, Prob>,
    }
    let mut slices: BTreeMap<Vec<Value>, Slice> = BTreeMap::new();
    type Key = (Vec<Value>, Vec<Value>, Vec<Value>);
    let mut pxyz: HashMap<Key, Prob> = HashMap::new();
    for (t, w) in &j.atoms {
        let (kx, ky, kz) = (proj(t, &xi), proj(t, &yi), proj(t, &zi));
        let s = slices.entry(kz.clone()).or_insert_with(|| Slice {
            pz: Prob::zero(),
            px: BTreeMap::new(),
            py: BTreeMap::new(),
        });
        s.pz += w;
        *s.px.entry(kx.clone()).or_insert_with(Prob::zero) += w;
        *s.py.entry(ky.clone()).or_insert_with(Prob::zero) += w;
        *pxyz.entry((kx, ky, kz)).or_insert_with(Prob::zero) += w;
    }

    // Every real atom lies in some px × py block, so summing over the blocks
    // covers the union of both supports.
    let mut l1 = Prob::zero();
    for (kz, s) in &slices {
        for (kx, wx) in &s.px {
            for (ky, wy) in &s.py {
                let independent = wx * wy / &s.pz;
                let real = pxyz
                    .get(&(kx.clone(), ky.clone(), kz.clone()))
                    .cloned()
                    .unwrap_or_else(Prob::zero);
                l1 += (real - independent).abs();
            }
        }
    }
    Ok(l1 / BigInt::from(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: u8) -> Value {
        Value::bit(x)
    }

    fn xy() -> Vec<&'static str> {
        vec!["X", "Y"]
    }

    #[test]
    fn marginal_of_diagonal_is_uniform() {
        let j = JointDist::new(xy(), [(vec![b(0), b(0)], ratio(1, 2)), (vec![b(1), b(1)], ratio(1, 2))]).unwrap();
        assert_eq!(j.marginal_dist(&["X"]).unwrap(), Dist::uniform([b(0), b(1)]));
    }

    #[test]
    fn marginal_of_point_mass() {
        let j = JointDist::new(xy(), [(vec![Value::sym("a"), Value::sym("b")], one())]).unwrap();
        assert_eq!(j.marginal_dist(&["Y"]).unwrap(), Dist::point(Value::sym("b")));
    }

    #[test]
    fn marginal_of_uniform_square() {
        let atoms = (0..4).map(|i| (vec![b(i >> 1), b(i & 1)], ratio(1, 4)));
        let j = JointDist::new(xy(), atoms).unwrap();
        assert_eq!(j.marginal_dist(&["X"]).unwrap(), Dist::bernoulli(ratio(1, 2)).unwrap());
    }

    #[test]
    fn marginal_unknown_coordinate() {
        let j = JointDist::from_dist("X", &Dist::point(b(0)));
        assert_eq!(j.marginal(&["Q"]), Err(ProbError::UnknownCoordinate("Q".into())));
    }

    #[test]
    fn condition_examples() {
        let atoms = (0..4).map(|i| (vec![b(i >> 1), b(i & 1)], ratio(1, 4)));
        let j = JointDist::new(xy(), atoms).unwrap();
        let c = j.condition("X", &b(0)).unwrap();
        let expected =
            JointDist::new(xy(), [(vec![b(0), b(0)], ratio(1, 2)), (vec![b(0), b(1)], ratio(1, 2))]).unwrap();
        assert_eq!(c, expected);

        let p = JointDist::new(xy(), [(vec![b(1), b(0)], one())]).unwrap();
        assert_eq!(p.condition("X", &b(1)).unwrap(), p);

        let skew = JointDist::new(
            xy(),
            [
                (vec![b(0), b(0)], ratio(1, 2)),
                (vec![b(0), b(1)], ratio(1, 4)),
                (vec![b(1), b(1)], ratio(1, 4)),
            ],
        )
        .unwrap();
        let c = skew.condition("X", &b(0)).unwrap();
        assert_eq!(c.weight(&[b(0), b(0)]), ratio(2, 3));
        assert_eq!(c.weight(&[b(0), b(1)]), ratio(1, 3));
    }

    #[test]
    fn condition_on_zero_probability_value() {
        let j = JointDist::from_dist("X", &Dist::point(b(0)));
        let err = j.condition("X", &b(1)).unwrap_err();
        assert!(err.to_string().contains("X = 1"), "{err}");
    }

    #[test]
    fn product_examples() {
        let half = JointDist::from_dist("X", &Dist::bernoulli(ratio(1, 2)).unwrap());
        let half_y = JointDist::from_dist("Y", &Dist::bernoulli(ratio(1, 2)).unwrap());
        let square = half.product(&half_y).unwrap();
        assert!(square.iter().all(|(_, w)| *w == ratio(1, 4)));
        assert_eq!(square.len(), 4);

        let pt = JointDist::from_dist("K", &Dist::point(Value::sym("k")));
        let prod = pt.product(&half_y).unwrap();
        assert_eq!(prod.marginal_dist(&["Y"]).unwrap(), half_y.to_dist());
        assert_eq!(prod.len(), 2);

        let p = JointDist::from_dist("X", &Dist::bernoulli(ratio(1, 4)).unwrap());
        let q = JointDist::from_dist("Y", &Dist::bernoulli(ratio(1, 3)).unwrap());
        let pq = p.product(&q).unwrap();
        assert_eq!(pq.weight(&[b(1), b(1)]), ratio(1, 12));
        assert_eq!(pq.weight(&[b(1), b(0)]), ratio(1, 6));
        assert_eq!(pq.weight(&[b(0), b(1)]), ratio(1, 4));
        assert_eq!(pq.weight(&[b(0), b(0)]), ratio(1, 2));

        assert_eq!(p.product(&p), Err(ProbError::NameClash("X".into())));
    }

    #[test]
    fn distance_examples() {
        let p = Dist::bernoulli(ratio(1, 2)).unwrap();
        assert_eq!(statistical_distance(&p, &p), zero());
        assert_eq!(statistical_distance(&Dist::point(b(0)), &Dist::point(b(1))), one());
        let q = Dist::bernoulli(ratio(1, 4)).unwrap();
        assert_eq!(statistical_distance(&p, &q), ratio(1, 4));
    }

    #[test]
    fn information_examples() {
        let names = ["X", "Y", "Z"];
        let indep = JointDist::new(
            names,
            (0..8).map(|i| (vec![b(i >> 2), b((i >> 1) & 1), b(i & 1)], ratio(1, 8))),
        )
        .unwrap();
        assert_eq!(statistical_information(&indep, &["X"], &["Y"], &["Z"]).unwrap(), zero());

        let copy = JointDist::new(
            names,
            [(vec![b(0), b(0), Value::Unit], ratio(1, 2)), (vec![b(1), b(1), Value::Unit], ratio(1, 2))],
        )
        .unwrap();
        assert_eq!(statistical_information(&copy, &["X"], &["Y"], &["Z"]).unwrap(), ratio(1, 2));
        assert_eq!(statistical_information(&copy, &["X"], &["Y"], &[]).unwrap(), ratio(1, 2));

        let all_same = JointDist::new(
            names,
            [(vec![b(0), b(0), b(0)], ratio(1, 2)), (vec![b(1), b(1), b(1)], ratio(1, 2))],
        )
        .unwrap();
        assert_eq!(statistical_information(&all_same, &["X"], &["Y"], &["Z"]).unwrap(), zero());

        assert!(matches!(
            statistical_information(&all_same, &["X"], &["X"], &[]),
            Err(ProbError::OverlappingGroups(_))
        ));
    }

    #[test]
    fn invalid_dists_rejected() {
        assert!(matches!(
            Dist::new([(b(0), ratio(7, 8))]),
            Err(ProbError::NotNormalized(s)) if s == "7/8"
        ));
        assert!(matches!(Dist::new([(b(0), ratio(-1, 2)), (b(1), ratio(3, 2))]), Err(ProbError::Negative { .. })));
        assert!(matches!(Dist::new([(b(0), ratio(1, 2)), (b(0), ratio(1, 2))]), Err(ProbError::DuplicateLabel(_))));
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(fmt_prob(&zero()), "0/1");
        assert_eq!(fmt_prob(&ratio(14, 64)), "7/32");
        assert_eq!(parse_prob("7/32").unwrap(), ratio(7, 32));
        assert_eq!(parse_prob("1").unwrap(), one());
        assert!(parse_prob("1/0").is_err());
        assert!(parse_prob("x").is_err());
    }
}
