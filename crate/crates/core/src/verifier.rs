//! Exact stand-alone checks: correctness, security for Alice and security
//! for Bob, each over a family of adversary strategies.

use std::collections::BTreeSet;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    enumerate_adversaries, enumerate_traces, traces_to_joint, AdversaryStrategy, Corruption, EngineError,
    StrategyBound,
};
use crate::extract::{ChoiceExtractor, ExtractError};
use crate::funcs::Role;
use crate::prob::{ratio, statistical_distance, statistical_information, Dist, JointDist, Prob, ProbError};
use crate::protolib::ProtocolSpec;
use crate::report::ser_prob;
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("output of {role} has unexpected shape: {value}")]
    Shape { role: &'static str, value: String },
    #[error("adversary `{name}` corrupts {got}, expected {expected}")]
    WrongTarget { name: String, got: Corruption, expected: Corruption },
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("{0}")]
    Extract(#[from] ExtractError),
    #[error("{0}")]
    Prob(#[from] ProbError),
    #[error("{0}")]
    Strategies(#[from] StrategyBound),
}

/// How the adversary quantifier was discharged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyMode {
    /// Every strategy of the bounded interface.
    Exhaustive,
    /// The protocol's shipped attack list.
    Curated,
}

fn pair_bits(v: &Value, role: &'static str) -> Result<Option<(u8, u8)>, VerifyError> {
    if v.is_bot() {
        return Ok(None);
    }
    match (v.get(0).and_then(Value::as_bit), v.get(1).and_then(Value::as_bit), v.as_tuple().map(<[_]>::len)) {
        (Some(a), Some(b), Some(2)) => Ok(Some((a, b))),
        _ => Err(VerifyError::Shape {
            role,
            value: v.to_string(),
        }),
    }
}

fn uniform_bits(n: usize) -> Dist {
    Dist::uniform((0..1u8 << n).map(|i| {
        if n == 1 {
            Value::bit(i)
        } else {
            Value::bits(&(0..n).rev().map(|s| (i >> s) & 1).collect::<Vec<_>>())
        }
    }))
}

/// δ of the law conditioned on `keep` from `target`; zero when `keep` has
/// no mass (nothing was delivered, so there is no law to compare).
fn conditional_defect(j: &JointDist, coords: &[&str], keep: impl Fn(&[Value]) -> bool, target: &Dist) -> Result<Prob, VerifyError> {
    let kept: Vec<(Vec<Value>, Prob)> = j.iter().filter(|(t, _)| keep(t)).map(|(t, w)| (t.clone(), w.clone())).collect();
    let mass: Prob = kept.iter().map(|(_, w)| w.clone()).sum();
    if mass.is_zero() {
        return Ok(Prob::zero());
    }
    let names: Vec<&str> = j.names().iter().map(String::as_str).collect();
    let cond = JointDist::new(names, kept.into_iter().map(|(t, w)| (t, w / &mass)))?;
    Ok(statistical_distance(&cond.marginal_dist(coords)?, target))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correctness {
    /// `1 − Pr[D = B_C]`, aborts counted as failures.
    #[serde(serialize_with = "ser_prob")]
    pub eps: Prob,
    #[serde(serialize_with = "ser_prob")]
    pub abort: Prob,
    /// δ of delivered `(B0, B1)` from uniform.
    #[serde(serialize_with = "ser_prob")]
    pub defect_b: Prob,
    /// δ of delivered `C` from uniform.
    #[serde(serialize_with = "ser_prob")]
    pub defect_c: Prob,
}

/// Correctness of an honest-honest joint over views and outputs.
pub fn check_correctness(joint: &JointDist) -> Result<Correctness, VerifyError> {
    let outs = joint.marginal(&["output_A", "output_B"])?;
    let mut good = Prob::zero();
    let mut abort = Prob::zero();
    let mut atoms = Vec::new();
    for (t, w) in outs.iter() {
        let a = pair_bits(&t[0], "Alice")?;
        let b = pair_bits(&t[1], "Bob")?;
        if a.is_none() || b.is_none() {
            abort += w;
        }
        let row = match (a, b) {
            (Some((b0, b1)), Some((c, d))) => {
                if d == if c == 0 { b0 } else { b1 } {
                    good += w;
                }
                vec![Value::bits(&[b0, b1]), Value::bit(c)]
            }
            _ => vec![Value::Bot, Value::Bot],
        };
        atoms.push((row, w.clone()));
    }
    let j = JointDist::new(["B", "C"], atoms)?;
    let delivered = |t: &[Value]| !t[0].is_bot();
    Ok(Correctness {
        eps: ratio(1, 1) - good,
        abort,
        defect_b: conditional_defect(&j, &["B"], delivered, &uniform_bits(2))?,
        defect_c: conditional_defect(&j, &["C"], delivered, &uniform_bits(1))?,
    })
}

/// One security-for-Alice row (adversary corrupting Bob).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AliceRow {
    pub adversary: String,
    /// δ of delivered `(B0, B1)` from uniform.
    #[serde(serialize_with = "ser_prob")]
    pub uniformity: Prob,
    /// `I_S(B0,B1; C)` with the extracted witness `C`.
    #[serde(serialize_with = "ser_prob")]
    pub is_choice: Prob,
    /// `I_S(B0,B1; output_Bob | C, B_C)`.
    #[serde(serialize_with = "ser_prob")]
    pub is_output: Prob,
    /// Delivered mass where the witness fell back to a uniform fill.
    #[serde(serialize_with = "ser_prob")]
    pub extraction_failure: Prob,
    /// Smallest max of the two `I_S` values over view-only witnesses, when searched.
    #[serde(serialize_with = "crate::report::ser_prob_opt")]
    pub witness_search: Option<Prob>,
    #[serde(skip)]
    pub joint: JointDist,
}

impl AliceRow {
    pub fn worst(&self) -> Prob {
        [&self.uniformity, &self.is_choice, &self.is_output].into_iter().max().unwrap().clone()
    }
}

/// One security-for-Bob row (adversary corrupting Alice).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BobRow {
    pub adversary: String,
    /// δ of delivered `C` from uniform.
    #[serde(serialize_with = "ser_prob")]
    pub uniformity: Prob,
    /// `I_S(C; output_Alice)`.
    #[serde(serialize_with = "ser_prob")]
    pub is_choice: Prob,
    #[serde(skip)]
    pub joint: JointDist,
}

impl BobRow {
    pub fn worst(&self) -> Prob {
        self.uniformity.clone().max(self.is_choice.clone())
    }
}

fn expect(adv: &AdversaryStrategy, want: Corruption) -> Result<(), VerifyError> {
    if adv.corruption != want {
        return Err(VerifyError::WrongTarget {
            name: adv.name.clone(),
            got: adv.corruption,
            expected: want,
        });
    }
    Ok(())
}

const ALICE_NAMES: [&str; 6] = ["B0", "B1", "C", "B_C", "OUT", "VIEW"];

/// Builds the joint over `(B0, B1, C, B_C, output_Bob, view_Bob)` for one
/// Bob-corrupting adversary, with `C` from the choice extractor.
fn alice_joint(proto: &ProtocolSpec, adv: &AdversaryStrategy, threshold: &Prob, bound: u64) -> Result<(JointDist, Prob), VerifyError> {
    let bob = adv.bob.as_ref().unwrap_or(&proto.bob);
    let tapes = bob.tape.all();
    let scale = Prob::from_integer(bob.tape.count().into());
    let mut atoms = Vec::new();
    let mut failure = Prob::zero();
    for tape_b in &tapes {
        let ex = ChoiceExtractor::build(proto, bob, tape_b, threshold, bound)?;
        for (idx, t) in ex.traces.iter().enumerate() {
            let w = &t.weight / &scale;
            let bits = pair_bits(&t.output_a, "Alice")?;
            let (b0, b1) = match bits {
                Some((b0, b1)) => (Value::bit(b0), Value::bit(b1)),
                None => (Value::Bot, Value::Bot),
            };
            let clean = ex.trace_choice(idx).clean_bit();
            let choices: Vec<(u8, Prob)> = match clean {
                Some(c) => vec![(c, w.clone())],
                None => {
                    if bits.is_some() {
                        failure += &w;
                    }
                    vec![(0, &w / ratio(2, 1)), (1, &w / ratio(2, 1))]
                }
            };
            for (c, wc) in choices {
                let bc = if c == 0 { b0.clone() } else { b1.clone() };
                atoms.push((
                    vec![b0.clone(), b1.clone(), Value::bit(c), bc, t.output_b.clone(), t.view(Role::Bob)],
                    wc,
                ));
            }
        }
    }
    Ok((JointDist::new(ALICE_NAMES, atoms)?, failure))
}

fn alice_measures(j: &JointDist) -> Result<(Prob, Prob, Prob), VerifyError> {
    let uniformity = conditional_defect(
        &j.marginal(&["B0", "B1"])?,
        &["B0", "B1"],
        |t| !t[0].is_bot(),
        &uniform_bits(2),
    )?;
    let is_choice = statistical_information(j, &["B0", "B1"], &["C"], &[])?;
    let is_output = statistical_information(j, &["B0", "B1"], &["OUT"], &["C", "B_C"])?;
    Ok((uniformity, is_choice, is_output))
}

/// Views are few enough to try every deterministic witness `C = f(view)`.
pub const WITNESS_SEARCH_MAX_VIEWS: usize = 12;

/// Minimises `max(I_S(B0,B1;C), I_S(B0,B1;OUT|C,B_C))` over every function
/// of Bob's view. `None` when there are too many views.
fn search_witness(j: &JointDist) -> Result<Option<Prob>, VerifyError> {
    let views: Vec<Value> = j.iter().map(|(t, _)| t[5].clone()).collect::<BTreeSet<_>>().into_iter().collect();
    if views.len() > WITNESS_SEARCH_MAX_VIEWS {
        return Ok(None);
    }
    // the extracted witness splits weight over C; collapse it first
    let base = j.marginal(&["B0", "B1", "OUT", "VIEW"])?;
    let mut best: Option<Prob> = None;
    for f in 0u32..1 << views.len() {
        let atoms = base.iter().map(|(t, w)| {
            let vi = views.binary_search(&t[3]).unwrap();
            let c = ((f >> vi) & 1) as u8;
            let bc = if t[0].is_bot() { Value::Bot } else { t[c as usize].clone() };
            (vec![t[0].clone(), t[1].clone(), Value::bit(c), bc, t[2].clone()], w.clone())
        });
        let cj = JointDist::new(["B0", "B1", "C", "B_C", "OUT"], atoms)?;
        let a = statistical_information(&cj, &["B0", "B1"], &["C"], &[])?;
        let b = statistical_information(&cj, &["B0", "B1"], &["OUT"], &["C", "B_C"])?;
        let m = a.max(b);
        if best.as_ref().is_none_or(|bst| &m < bst) {
            best = Some(m);
        }
    }
    Ok(best)
}

/// Security for Alice against every Bob-corrupting adversary in `family`.
pub fn check_security_alice(
    proto: &ProtocolSpec,
    family: &[AdversaryStrategy],
    threshold: &Prob,
    bound: u64,
    witness_search: bool,
) -> Result<Vec<AliceRow>, VerifyError> {
    for adv in family {
        expect(adv, Corruption::Bob)?;
    }
    family
        .par_iter()
        .map(|adv| {
            let (joint, extraction_failure) = alice_joint(proto, adv, threshold, bound)?;
            let (uniformity, is_choice, is_output) = alice_measures(&joint)?;
            let witness_search = if witness_search { search_witness(&joint)? } else { None };
            Ok(AliceRow {
                adversary: adv.name.clone(),
                uniformity,
                is_choice,
                is_output,
                extraction_failure,
                witness_search,
                joint,
            })
        })
        .collect()
}

fn bob_joint(proto: &ProtocolSpec, adv: &AdversaryStrategy, bound: u64) -> Result<JointDist, VerifyError> {
    let (alice, bob) = adv.programs(&proto.alice, &proto.bob);
    let traces = enumerate_traces(alice, bob, &proto.channel, &proto.limits, bound)?;
    let atoms = traces.iter().map(|t| {
        let c = proto.bob_choice(t).map(Value::bit).unwrap_or(Value::Bot);
        let delivered = Value::bit(u8::from(!t.output_b.is_bot()));
        (vec![c, t.output_a.clone(), delivered], t.weight.clone())
    });
    Ok(JointDist::new(["C", "OUT", "DELIVERED"], atoms)?)
}

fn bob_measures(j: &JointDist) -> Result<(Prob, Prob), VerifyError> {
    let uniformity = conditional_defect(j, &["C"], |t| t[2] == Value::bit(1), &uniform_bits(1))?;
    let is_choice = statistical_information(j, &["C"], &["OUT"], &[])?;
    Ok((uniformity, is_choice))
}

/// Security for Bob against every Alice-corrupting adversary in `family`.
pub fn check_security_bob(proto: &ProtocolSpec, family: &[AdversaryStrategy], bound: u64) -> Result<Vec<BobRow>, VerifyError> {
    for adv in family {
        expect(adv, Corruption::Alice)?;
    }
    family
        .par_iter()
        .map(|adv| {
            let joint = bob_joint(proto, adv, bound)?;
            let (uniformity, is_choice) = bob_measures(&joint)?;
            Ok(BobRow {
                adversary: adv.name.clone(),
                uniformity,
                is_choice,
                joint,
            })
        })
        .collect()
}

/// A worst-case entry: which adversary and the value it achieved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Worst {
    pub adversary: String,
    #[serde(serialize_with = "ser_prob")]
    pub value: Prob,
    /// Transcript of the heaviest trace of the worst row that carries messages.
    pub transcript: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandaloneReport {
    pub protocol: String,
    pub family_mode: FamilyMode,
    pub correctness: Correctness,
    pub alice: Vec<AliceRow>,
    pub bob: Vec<BobRow>,
    pub worst_alice: Option<Worst>,
    pub worst_bob: Option<Worst>,
    /// Largest ε over every check.
    #[serde(serialize_with = "ser_prob")]
    pub worst: Prob,
    /// Every ε recomputed from the archived joints agreed.
    pub self_check: bool,
    #[serde(skip)]
    pub honest: JointDist,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub threshold: Prob,
    pub bound: u64,
    pub mode: FamilyMode,
    /// Strategy bound for exhaustive mode; above it the curated family is used.
    pub strategy_bound: u64,
    pub witness_search: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            threshold: ratio(1, 1),
            bound: 100_000_000,
            mode: FamilyMode::Exhaustive,
            strategy_bound: 64,
            witness_search: false,
        }
    }
}

/// The adversary family for one corruption case and the mode actually used.
pub fn family_for(proto: &ProtocolSpec, corruption: Corruption, opts: &VerifyOptions) -> (Vec<AdversaryStrategy>, FamilyMode) {
    if opts.mode == FamilyMode::Exhaustive {
        if let Ok(all) = enumerate_adversaries(&proto.interface(corruption), opts.strategy_bound) {
            return (all, FamilyMode::Exhaustive);
        }
    }
    (proto.curated(corruption), FamilyMode::Curated)
}

fn worst_of<'a, R>(rows: &'a [R], value: impl Fn(&R) -> Prob, name: impl Fn(&'a R) -> &'a str) -> Option<(&'a R, Worst)> {
    let mut best: Option<(&R, Prob)> = None;
    for r in rows {
        let v = value(r);
        if best.as_ref().is_none_or(|(_, b)| &v > b) {
            best = Some((r, v));
        }
    }
    best.map(|(r, v)| {
        (
            r,
            Worst {
                adversary: name(r).to_string(),
                value: v,
                transcript: None,
            },
        )
    })
}

fn heaviest_transcript(proto: &ProtocolSpec, adv: Option<&AdversaryStrategy>, bound: u64) -> Option<String> {
    let adv = adv?;
    let (a, b) = adv.programs(&proto.alice, &proto.bob);
    let traces = enumerate_traces(a, b, &proto.channel, &proto.limits, bound).ok()?;
    traces
        .iter()
        .filter(|t| !t.trans.is_empty())
        .max_by(|x, y| x.weight.cmp(&y.weight))
        .map(|t| t.trans_value().to_string())
}

impl StandaloneReport {
    /// Runs every stand-alone check on `proto`.
    pub fn build(proto: &ProtocolSpec, opts: &VerifyOptions) -> Result<Self, VerifyError> {
        let honest = traces_to_joint(&enumerate_traces(&proto.alice, &proto.bob, &proto.channel, &proto.limits, opts.bound)?)?;
        let correctness = check_correctness(&honest)?;
        let (fam_b, mode_b) = family_for(proto, Corruption::Bob, opts);
        let (fam_a, mode_a) = family_for(proto, Corruption::Alice, opts);
        let alice = check_security_alice(proto, &fam_b, &opts.threshold, opts.bound, opts.witness_search)?;
        let bob = check_security_bob(proto, &fam_a, opts.bound)?;
        let family_mode = if mode_a == FamilyMode::Exhaustive && mode_b == FamilyMode::Exhaustive {
            FamilyMode::Exhaustive
        } else {
            FamilyMode::Curated
        };
        let worst_alice = worst_of(&alice, AliceRow::worst, |r| r.adversary.as_str()).map(|(r, mut w)| {
            w.transcript = heaviest_transcript(proto, fam_b.iter().find(|s| s.name == r.adversary), opts.bound);
            w
        });
        let worst_bob = worst_of(&bob, BobRow::worst, |r| r.adversary.as_str()).map(|(r, mut w)| {
            w.transcript = heaviest_transcript(proto, fam_a.iter().find(|s| s.name == r.adversary), opts.bound);
            w
        });
        let mut worst = [
            &correctness.eps,
            &correctness.defect_b,
            &correctness.defect_c,
        ]
        .into_iter()
        .max()
        .unwrap()
        .clone();
        for w in worst_alice.iter().chain(worst_bob.iter()) {
            worst = worst.max(w.value.clone());
        }
        let mut report = StandaloneReport {
            protocol: proto.label(),
            family_mode,
            correctness,
            alice,
            bob,
            worst_alice,
            worst_bob,
            worst,
            self_check: false,
            honest,
        };
        report.self_check = report.recheck()?;
        Ok(report)
    }

    /// Recomputes every ε from the archived joints.
    pub fn recheck(&self) -> Result<bool, VerifyError> {
        let mut ok = check_correctness(&self.honest)? == self.correctness;
        for r in &self.alice {
            ok &= alice_measures(&r.joint)? == (r.uniformity.clone(), r.is_choice.clone(), r.is_output.clone());
        }
        for r in &self.bob {
            ok &= bob_measures(&r.joint)? == (r.uniformity.clone(), r.is_choice.clone());
        }
        Ok(ok)
    }

    pub fn passes(&self, eps0: &Prob) -> bool {
        &self.worst <= eps0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{enumerate_joint, Action, Event, PartyProgram, TapeSpec};
    use crate::protolib::{clear_choice_rot, erasure_rot, leaky_rot, passthrough_rot};

    fn opts() -> VerifyOptions {
        VerifyOptions {
            witness_search: true,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn passthrough_is_all_zero() {
        let r = StandaloneReport::build(&passthrough_rot(), &opts()).unwrap();
        assert_eq!(r.worst, ratio(0, 1));
        assert!(r.self_check);
        assert_eq!(r.family_mode, FamilyMode::Exhaustive);
        for row in &r.alice {
            assert_eq!(row.witness_search, Some(ratio(0, 1)), "{}", row.adversary);
        }
    }

    #[test]
    fn erasure_correctness_and_bob_privacy() {
        let r = StandaloneReport::build(&erasure_rot(6, 2).unwrap(), &VerifyOptions::default()).unwrap();
        assert_eq!(r.correctness.eps, ratio(7, 32));
        assert_eq!(r.correctness.abort, ratio(7, 32));
        assert_eq!(r.correctness.defect_b, ratio(0, 1));
        let honest = r.bob.iter().find(|b| b.adversary == "honest+view").unwrap();
        assert_eq!(honest.is_choice, ratio(0, 1));
        let attack = r.alice.iter().find(|a| a.adversary == "both-sets").unwrap();
        assert!(attack.is_output >= ratio(11, 64), "{}", attack.is_output);
    }

    #[test]
    fn negative_controls_leak_half() {
        let leaky = StandaloneReport::build(&leaky_rot(), &opts()).unwrap();
        assert_eq!(leaky.worst_alice.as_ref().unwrap().value, ratio(1, 2));
        assert_eq!(leaky.worst, ratio(1, 2));
        let clear = StandaloneReport::build(&clear_choice_rot(), &opts()).unwrap();
        assert_eq!(clear.worst_bob.as_ref().unwrap().value, ratio(1, 2));
        assert_eq!(clear.worst, ratio(1, 2));
        assert!(clear.worst_bob.unwrap().transcript.is_some());
    }

    #[test]
    fn flipped_output_is_never_correct() {
        let p = passthrough_rot();
        let flip = PartyProgram::new("flip", Role::Bob, TapeSpec::empty(), |ev, _| match ev.first() {
            Some(Event::Channel { output, .. }) => {
                let c = output.get(0).unwrap().clone();
                let d = output.get(1).unwrap().as_bit().unwrap();
                Action::Output(Value::pair(c, Value::bit(1 - d)))
            }
            _ => Action::Input(Value::Unit),
        });
        let j = enumerate_joint(&p.alice, &flip, &p.channel, &p.limits, 1000).unwrap();
        assert_eq!(check_correctness(&j).unwrap().eps, ratio(1, 1));
    }

    #[test]
    fn wrong_target_rejected() {
        let p = passthrough_rot();
        let fam = p.curated(Corruption::Alice);
        assert!(matches!(
            check_security_alice(&p, &fam, &ratio(1, 1), 1000, false),
            Err(VerifyError::WrongTarget { .. })
        ));
    }

    #[test]
    fn larger_family_never_lowers_worst() {
        let p = erasure_rot(6, 2).unwrap();
        let full = p.curated(Corruption::Bob);
        let small: Vec<_> = full.iter().filter(|s| s.name != "both-sets").cloned().collect();
        let worst = |fam: &[AdversaryStrategy]| {
            check_security_alice(&p, fam, &ratio(1, 1), 1 << 24, false)
                .unwrap()
                .iter()
                .map(AliceRow::worst)
                .max()
                .unwrap()
        };
        assert!(worst(&full) >= worst(&small));
    }
}
