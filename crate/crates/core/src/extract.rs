//! Brute-force extractors: the sender-side output extractor (what Bob would
//! get for either choice bit) and the choice-bit extractor with its
//! M(0)/M(1) classification and equivocation.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use thiserror::Error;

use crate::engine::{enumerate_conditioned, EngineError, Event, PartyProgram, Trace};
use crate::funcs::Role;
use crate::prob::{one, Prob};
use crate::protolib::ProtocolSpec;
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("message set is not reachable by the honest program on this channel")]
    Inconsistent,
    #[error("execution completed without an extractable choice bit")]
    NoExtractableChoice,
    #[error("no consistent completion reaches any target pair")]
    NoCompletion,
    #[error("{0}")]
    Engine(#[from] EngineError),
}

/// One side's channel interaction plus the authenticated transcript, in
/// the order that side observed them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MessageSet {
    pub side: Role,
    pub events: Vec<Event>,
}

impl MessageSet {
    pub fn of(trace: &Trace, side: Role) -> Self {
        MessageSet {
            side,
            events: trace.events(side).to_vec(),
        }
    }

    pub fn prefix(&self, len: usize) -> MessageSet {
        MessageSet {
            side: self.side,
            events: self.events[..len.min(self.events.len())].to_vec(),
        }
    }

    /// `(input, output)` of every channel use on this side.
    pub fn channel_io(&self) -> Vec<(Value, Value)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Channel { input, output, .. } => Some((input.clone(), output.clone())),
                _ => None,
            })
            .collect()
    }

    pub fn trans(&self) -> Vec<Value> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Sent(m) | Event::Received(m) => Some(m.clone()),
                _ => None,
            })
            .collect()
    }
}

/// Heaviest key of a weight map, ties broken by key order.
fn majority<K: Clone + Ord>(m: &BTreeMap<K, Prob>) -> Option<(K, Prob)> {
    let mut best: Option<(&K, &Prob)> = None;
    for (k, w) in m {
        if best.is_none_or(|(_, bw)| w > bw) {
            best = Some((k, w));
        }
    }
    best.map(|(k, w)| (k.clone(), w.clone()))
}

/// Bob's output bit in one branch; `None` for aborts and malformed outputs.
fn output_bit(out: &Value) -> Option<u8> {
    out.get(1).and_then(Value::as_bit)
}

/// What Bob would output for each choice bit, given Alice's side.
#[derive(Debug, Clone, PartialEq)]
pub struct SenderOutputs {
    /// Majority output per branch `c`; `None` when the branch is empty or
    /// its majority is an abort.
    pub b_hat: [Option<u8>; 2],
    /// Weight share of the majority value inside each branch.
    pub agreement: [Prob; 2],
    /// Number of consistent completions per branch.
    pub consistent_counts: [usize; 2],
    /// Smaller of the two agreements, zero if a branch is empty.
    pub success_probability: Prob,
    pub success: bool,
}

/// Sender-side extractor for one fixed Alice program and tape, built by
/// enumerating honest Bob's tape and all channel draws.
#[derive(Debug, Clone)]
pub struct SenderExtractor {
    by_view: HashMap<Vec<Event>, SenderOutputs>,
}

impl SenderExtractor {
    pub fn build(
        proto: &ProtocolSpec,
        alice: &PartyProgram,
        tape_a: &[Value],
        threshold: &Prob,
        bound: u64,
    ) -> Result<Self, ExtractError> {
        let traces = enumerate_conditioned(alice, &proto.bob, &proto.channel, &proto.limits, Some(tape_a), None, bound)?;
        Ok(Self::from_traces(proto, &traces, threshold))
    }

    /// Groups traces (all with the same Alice tape) by Alice's events.
    pub fn from_traces(proto: &ProtocolSpec, traces: &[Trace], threshold: &Prob) -> Self {
        type Branches = [BTreeMap<Option<u8>, Prob>; 2];
        let mut groups: HashMap<Vec<Event>, (Branches, [usize; 2])> = HashMap::new();
        for t in traces {
            let Some(c) = proto.bob_choice(t) else { continue };
            let entry = groups.entry(t.events_a.clone()).or_default();
            *entry.0[c as usize].entry(output_bit(&t.output_b)).or_insert_with(Prob::zero) += &t.weight;
            entry.1[c as usize] += 1;
        }
        let by_view = groups
            .into_iter()
            .map(|(view, (branches, counts))| {
                let mut b_hat = [None, None];
                let mut agreement = [Prob::zero(), Prob::zero()];
                for c in 0..2 {
                    if let Some((v, w)) = majority(&branches[c]) {
                        let total: Prob = branches[c].values().sum();
                        b_hat[c] = v;
                        agreement[c] = w / total;
                    }
                }
                let success_probability = agreement[0].clone().min(agreement[1].clone());
                let success = b_hat.iter().all(Option::is_some) && &success_probability >= threshold;
                (
                    view,
                    SenderOutputs {
                        b_hat,
                        agreement,
                        consistent_counts: counts,
                        success_probability,
                        success,
                    },
                )
            })
            .collect();
        SenderExtractor { by_view }
    }

    pub fn extract(&self, m: &MessageSet) -> Result<&SenderOutputs, ExtractError> {
        self.by_view.get(&m.events).ok_or(ExtractError::Inconsistent)
    }
}

/// One-shot form of [`SenderExtractor`].
pub fn extract_sender_outputs(
    proto: &ProtocolSpec,
    alice: &PartyProgram,
    tape_a: &[Value],
    m: &MessageSet,
    threshold: &Prob,
    bound: u64,
) -> Result<SenderOutputs, ExtractError> {
    SenderExtractor::build(proto, alice, tape_a, threshold, bound)?.extract(m).cloned()
}

/// Classification of a prefix of Bob's events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Class {
    M0,
    M1,
    Neither,
    Both,
}

impl Class {
    fn from_members(m0: bool, m1: bool) -> Class {
        match (m0, m1) {
            (true, true) => Class::Both,
            (true, false) => Class::M0,
            (false, true) => Class::M1,
            (false, false) => Class::Neither,
        }
    }

    pub fn committed_bit(self) -> Option<u8> {
        match self {
            Class::M0 => Some(0),
            Class::M1 => Some(1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct PrefixStat {
    nonabort: Prob,
    /// Weights of Alice's output bit `b_j` among non-aborting completions.
    bits: [BTreeMap<u8, Prob>; 2],
    /// Weights of Alice's whole output among non-aborting completions.
    targets: BTreeMap<(u8, u8), Prob>,
    members: Vec<usize>,
}

/// Where and how a trace's choice bit was extracted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChoiceOutcome {
    /// Event `index` is the first whose prefix lies in exactly one M(c).
    Committed { index: usize, c: u8 },
    /// The first resolving prefix lies in both sets.
    Both { index: usize },
    Pending,
}

/// Per-trace extraction summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceChoice {
    pub outcome: ChoiceOutcome,
    /// A later prefix with live completions is classified differently.
    pub reclassified: bool,
    pub final_class: Class,
}

impl TraceChoice {
    /// The usable choice bit: committed and never reclassified.
    pub fn clean_bit(&self) -> Option<u8> {
        match (&self.outcome, self.reclassified) {
            (ChoiceOutcome::Committed { c, .. }, false) => Some(*c),
            _ => None,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self.outcome {
            ChoiceOutcome::Committed { index, .. } | ChoiceOutcome::Both { index } => Some(index),
            ChoiceOutcome::Pending => None,
        }
    }
}

/// Equivocation outcome at a prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct Equivocation {
    /// Conditional weight of completions reaching each output pair.
    pub achievable: BTreeMap<(u8, u8), Prob>,
    /// Bits already fixed at the prefix, per position.
    pub fixed: [Option<u8>; 2],
    /// A completing trace (Alice tape plus draws) for the requested target,
    /// if that target is achievable.
    pub completion: Option<Trace>,
    pub target_weight: Prob,
}

impl Equivocation {
    /// Output pairs consistent with the bits fixed at the prefix.
    pub fn admissible(&self) -> Vec<(u8, u8)> {
        let mut out = Vec::new();
        for t0 in 0..2 {
            for t1 in 0..2 {
                if self.fixed[0].is_none_or(|b| b == t0) && self.fixed[1].is_none_or(|b| b == t1) {
                    out.push((t0, t1));
                }
            }
        }
        out
    }

    pub fn all_admissible_achievable(&self) -> bool {
        self.admissible().iter().all(|t| self.achievable.contains_key(t))
    }
}

fn alice_pair(out: &Value) -> Option<(u8, u8)> {
    Some((out.get(0)?.as_bit()?, out.get(1)?.as_bit()?))
}

/// Choice-bit extractor for one fixed Bob program and tape, built by
/// enumerating honest Alice's tape and all channel draws.
#[derive(Debug, Clone)]
pub struct ChoiceExtractor {
    pub traces: Vec<Trace>,
    stats: HashMap<Vec<Event>, PrefixStat>,
    threshold: Prob,
}

impl ChoiceExtractor {
    pub fn build(
        proto: &ProtocolSpec,
        bob: &PartyProgram,
        tape_b: &[Value],
        threshold: &Prob,
        bound: u64,
    ) -> Result<Self, ExtractError> {
        let traces = enumerate_conditioned(&proto.alice, bob, &proto.channel, &proto.limits, None, Some(tape_b), bound)?;
        Ok(Self::from_traces(traces, threshold))
    }

    /// `traces` must all share Bob's program and tape.
    pub fn from_traces(traces: Vec<Trace>, threshold: &Prob) -> Self {
        let mut stats: HashMap<Vec<Event>, PrefixStat> = HashMap::new();
        for (idx, t) in traces.iter().enumerate() {
            let pair = alice_pair(&t.output_a);
            for len in 0..=t.events_b.len() {
                let s = stats.entry(t.events_b[..len].to_vec()).or_default();
                s.members.push(idx);
                if let Some((b0, b1)) = pair {
                    s.nonabort += &t.weight;
                    *s.bits[0].entry(b0).or_insert_with(Prob::zero) += &t.weight;
                    *s.bits[1].entry(b1).or_insert_with(Prob::zero) += &t.weight;
                    *s.targets.entry((b0, b1)).or_insert_with(Prob::zero) += &t.weight;
                }
            }
        }
        ChoiceExtractor {
            traces,
            stats,
            threshold: threshold.clone(),
        }
    }

    fn stat(&self, prefix: &[Event]) -> Result<&PrefixStat, ExtractError> {
        self.stats.get(prefix).ok_or(ExtractError::Inconsistent)
    }

    /// The value of `b_j` if it is determined at the prefix.
    fn determined(&self, s: &PrefixStat, j: usize) -> Option<u8> {
        if s.nonabort.is_zero() {
            return None;
        }
        let (v, w) = majority(&s.bits[j])?;
        (w / &s.nonabort >= self.threshold).then_some(v)
    }

    /// True when no completion of the prefix delivers output to Alice.
    pub fn dead(&self, prefix: &[Event]) -> Result<bool, ExtractError> {
        Ok(self.stat(prefix)?.nonabort.is_zero())
    }

    pub fn classify(&self, prefix: &[Event]) -> Result<Class, ExtractError> {
        let s = self.stat(prefix)?;
        Ok(Class::from_members(self.determined(s, 0).is_some(), self.determined(s, 1).is_some()))
    }

    /// Scans prefixes of `events` for the first classified into exactly one
    /// of M(0)/M(1). With `complete`, never resolving is an error.
    pub fn extract_choice_bit(&self, events: &[Event], complete: bool) -> Result<ChoiceOutcome, ExtractError> {
        for len in 0..=events.len() {
            match self.classify(&events[..len])? {
                Class::Neither => {}
                Class::Both => return Ok(ChoiceOutcome::Both { index: len.saturating_sub(1) }),
                class => {
                    return Ok(ChoiceOutcome::Committed {
                        index: len.saturating_sub(1),
                        c: class.committed_bit().unwrap(),
                    })
                }
            }
        }
        if complete {
            Err(ExtractError::NoExtractableChoice)
        } else {
            Ok(ChoiceOutcome::Pending)
        }
    }

    /// Extraction summary for trace `idx` of this extractor.
    pub fn trace_choice(&self, idx: usize) -> TraceChoice {
        let ev = &self.traces[idx].events_b;
        let outcome = self.extract_choice_bit(ev, false).expect("own traces are consistent");
        let first = match &outcome {
            ChoiceOutcome::Committed { index, .. } | ChoiceOutcome::Both { index } => index + 1,
            ChoiceOutcome::Pending => ev.len() + 1,
        };
        let committed = match &outcome {
            ChoiceOutcome::Committed { c, .. } => Some(*c),
            _ => None,
        };
        let mut reclassified = false;
        for len in first..=ev.len() {
            if self.dead(&ev[..len]).unwrap() {
                continue;
            }
            let class = self.classify(&ev[..len]).unwrap();
            if committed.is_some() && class.committed_bit() != committed {
                reclassified = true;
            }
        }
        TraceChoice {
            outcome,
            reclassified,
            final_class: self.classify(ev).unwrap(),
        }
    }

    /// Completions of `prefix` and which honest-Alice outputs they reach.
    pub fn equivocate(&self, prefix: &[Event], target: (u8, u8)) -> Result<Equivocation, ExtractError> {
        let s = self.stat(prefix)?;
        if s.targets.is_empty() {
            return Err(ExtractError::NoCompletion);
        }
        let achievable: BTreeMap<(u8, u8), Prob> =
            s.targets.iter().map(|(k, w)| (*k, w / &s.nonabort)).collect();
        let completion = s
            .members
            .iter()
            .map(|&i| &self.traces[i])
            .find(|t| alice_pair(&t.output_a) == Some(target))
            .cloned();
        Ok(Equivocation {
            target_weight: achievable.get(&target).cloned().unwrap_or_else(Prob::zero),
            achievable,
            fixed: [self.determined(s, 0), self.determined(s, 1)],
            completion,
        })
    }

    /// Indices of traces sharing `prefix`.
    pub fn members(&self, prefix: &[Event]) -> &[usize] {
        self.stats.get(prefix).map(|s| s.members.as_slice()).unwrap_or(&[])
    }
}

/// Sender-extraction check over every honest trace.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SenderCheck {
    /// Weight of traces where the extracted pair equals Alice's output.
    #[serde(serialize_with = "crate::report::ser_prob")]
    pub success: Prob,
    #[serde(serialize_with = "crate::report::ser_prob")]
    pub eps: Prob,
    pub traces: usize,
}

/// Runs the sender extractor over all honest executions. Aborted runs count
/// as recovered when every branch also aborts.
pub fn check_sender_extraction(proto: &ProtocolSpec, threshold: &Prob, bound: u64) -> Result<SenderCheck, ExtractError> {
    let mut success = Prob::zero();
    let mut count = 0;
    for tape_a in proto.alice.tape.all() {
        let traces =
            enumerate_conditioned(&proto.alice, &proto.bob, &proto.channel, &proto.limits, Some(&tape_a), None, bound)?;
        let ex = SenderExtractor::from_traces(proto, &traces, threshold);
        let scale = Prob::from_integer(proto.alice.tape.count().into());
        for t in &traces {
            count += 1;
            let got = ex.extract(&MessageSet::of(t, Role::Alice))?;
            let ok = match alice_pair(&t.output_a) {
                Some((b0, b1)) => got.success && got.b_hat == [Some(b0), Some(b1)],
                None => got.b_hat == [None, None],
            };
            if ok {
                success += &t.weight / &scale;
            }
        }
    }
    Ok(SenderCheck {
        eps: one() - &success,
        success,
        traces: count,
    })
}

/// Choice-extraction check over every honest trace.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChoiceCheck {
    /// Weight of delivered runs whose clean extracted bit equals Bob's choice.
    #[serde(serialize_with = "crate::report::ser_prob")]
    pub agreement: Prob,
    /// Weight of delivered runs where extraction fails or disagrees.
    #[serde(serialize_with = "crate::report::ser_prob")]
    pub eps: Prob,
    pub traces: usize,
    /// Committed traces whose extraction index is not strictly before the
    /// last authenticated message in Bob's stream.
    pub last_message_violations: usize,
    /// Committed traces where some admissible target pair is unreachable,
    /// just before or at the extraction index.
    pub equivocation_violations: usize,
    pub reclassified: usize,
    pub both: usize,
}

pub fn check_choice_extraction(proto: &ProtocolSpec, threshold: &Prob, bound: u64) -> Result<ChoiceCheck, ExtractError> {
    let mut r = ChoiceCheck {
        agreement: Prob::zero(),
        eps: Prob::zero(),
        traces: 0,
        last_message_violations: 0,
        equivocation_violations: 0,
        reclassified: 0,
        both: 0,
    };
    let scale = Prob::from_integer(proto.bob.tape.count().into());
    for tape_b in proto.bob.tape.all() {
        let ex = ChoiceExtractor::build(proto, &proto.bob, &tape_b, threshold, bound)?;
        for (idx, t) in ex.traces.iter().enumerate() {
            r.traces += 1;
            let w = &t.weight / &scale;
            let tc = ex.trace_choice(idx);
            let delivered = !t.output_a.is_bot();
            if tc.reclassified {
                r.reclassified += 1;
            }
            if matches!(tc.outcome, ChoiceOutcome::Both { .. }) {
                r.both += 1;
            }
            if delivered {
                if tc.clean_bit().is_some() && tc.clean_bit() == proto.bob_choice(t) {
                    r.agreement += &w;
                } else {
                    r.eps += &w;
                }
            }
            let ChoiceOutcome::Committed { index, c } = tc.outcome else { continue };
            if let Some(last) = t.events_b.iter().rposition(Event::is_message) {
                if index >= last {
                    r.last_message_violations += 1;
                }
            }
            // every admissible pair must stay reachable before and at the commit
            let mut ok = true;
            for len in [index, index + 1] {
                let prefix = &t.events_b[..len];
                if ex.dead(prefix)? {
                    continue;
                }
                let eq = ex.equivocate(prefix, (c, c))?;
                ok &= eq.all_admissible_achievable();
            }
            if !ok {
                r.equivocation_violations += 1;
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;
    use crate::protolib::{both_sets_attack, erasure_rot, passthrough_rot};

    const BOUND: u64 = 1 << 24;

    #[test]
    fn passthrough_sender_extraction_recovers_pair() {
        let p = passthrough_rot();
        let ex = SenderExtractor::build(&p, &p.alice, &[], &one(), BOUND).unwrap();
        for (b0, b1) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let m = MessageSet {
                side: Role::Alice,
                events: vec![Event::Channel {
                    index: 0,
                    input: Value::Unit,
                    output: Value::bits(&[b0, b1]),
                }],
            };
            let r = ex.extract(&m).unwrap();
            assert_eq!(r.b_hat, [Some(b0), Some(b1)]);
            assert_eq!(r.success_probability, one());
            assert_eq!(r.consistent_counts, [1, 1]);
        }
        let forged = MessageSet {
            side: Role::Alice,
            events: vec![Event::Received(Value::Int(9))],
        };
        assert_eq!(ex.extract(&forged), Err(ExtractError::Inconsistent));
    }

    #[test]
    fn erasure_sender_outputs_are_xors_over_sets() {
        let p = erasure_rot(6, 2).unwrap();
        let tape: Vec<Value> = [1, 0, 1, 1, 0, 0].iter().map(|&b| Value::bit(b)).collect();
        let ex = SenderExtractor::build(&p, &p.alice, &tape, &one(), BOUND).unwrap();
        let traces = enumerate_conditioned(&p.alice, &p.bob, &p.channel, &p.limits, Some(&tape), None, BOUND).unwrap();
        let t = traces.iter().find(|t| !t.trans.is_empty()).unwrap();
        let sets = &t.trans[0].payload;
        let xor = |j: usize| {
            sets.get(j)
                .unwrap()
                .as_tuple()
                .unwrap()
                .iter()
                .fold(0u8, |a, i| a ^ tape[i.as_int().unwrap() as usize].as_bit().unwrap())
        };
        let r = ex.extract(&MessageSet::of(t, Role::Alice)).unwrap();
        assert_eq!(r.b_hat, [Some(xor(0)), Some(xor(1))]);
        assert!(r.success);
    }

    #[test]
    fn passthrough_classification_and_equivocation() {
        let p = passthrough_rot();
        let ex = ChoiceExtractor::build(&p, &p.bob, &[], &one(), BOUND).unwrap();
        let ev = |c: u8, bc: u8| {
            vec![Event::Channel {
                index: 0,
                input: Value::Unit,
                output: Value::bits(&[c, bc]),
            }]
        };
        assert_eq!(ex.classify(&[]).unwrap(), Class::Neither);
        assert_eq!(ex.classify(&ev(1, 0)).unwrap(), Class::M1);
        assert_eq!(
            ex.extract_choice_bit(&ev(0, 1), true).unwrap(),
            ChoiceOutcome::Committed { index: 0, c: 0 }
        );
        // b_c fixed by delivery, the other bit free
        let eq = ex.equivocate(&ev(1, 1), (1, 1)).unwrap();
        assert_eq!(eq.fixed, [None, Some(1)]);
        assert_eq!(eq.achievable.keys().copied().collect::<Vec<_>>(), vec![(0, 1), (1, 1)]);
        assert!(eq.completion.is_some());
        assert!(ex.equivocate(&ev(1, 1), (1, 0)).unwrap().completion.is_none());
        // nothing fixed before any event
        let eq = ex.equivocate(&[], (1, 0)).unwrap();
        assert_eq!(eq.achievable.len(), 4);
        assert_eq!(eq.target_weight, ratio(1, 4));
    }

    #[test]
    fn erasure_honest_bob_commits_before_announcement() {
        let p = erasure_rot(6, 2).unwrap();
        for c in 0..2u8 {
            let ex = ChoiceExtractor::build(&p, &p.bob, &[Value::bit(c)], &one(), BOUND).unwrap();
            for (i, t) in ex.traces.iter().enumerate() {
                if t.output_b.is_bot() {
                    continue;
                }
                let tc = ex.trace_choice(i);
                let ChoiceOutcome::Committed { index, c: got } = tc.outcome else {
                    panic!("no commitment on a delivered trace");
                };
                assert_eq!(got, c);
                assert!(!tc.reclassified);
                assert!(matches!(t.events_b[index], Event::Channel { .. }));
                assert_eq!(ex.classify(&t.events_b).unwrap(), if c == 0 { Class::M0 } else { Class::M1 });
            }
        }
    }

    #[test]
    fn both_sets_attack_is_classified_both() {
        let p = erasure_rot(6, 2).unwrap();
        let adv = both_sets_attack(6, 2);
        let ex = ChoiceExtractor::build(&p, &adv, &[Value::bit(1)], &one(), BOUND).unwrap();
        let t = ex
            .traces
            .iter()
            .find(|t| t.channel_rounds.iter().all(|r| !r.w.is_bot()))
            .unwrap();
        assert_eq!(ex.classify(&t.events_b).unwrap(), Class::Both);
    }

    #[test]
    fn never_committing_bob_is_an_error() {
        let p = passthrough_rot();
        let blind = crate::engine::PartyProgram::new("blind", Role::Bob, crate::engine::TapeSpec::empty(), |ev, _| {
            if ev.is_empty() {
                crate::engine::Action::Input(Value::Unit)
            } else {
                crate::engine::Action::Output(Value::Unit)
            }
        });
        // an empty stream never resolves
        let ex = ChoiceExtractor::build(&p, &blind, &[], &one(), BOUND).unwrap();
        assert_eq!(ex.extract_choice_bit(&[], true), Err(ExtractError::NoExtractableChoice));
    }

    #[test]
    fn reference_checks_pass() {
        for p in [passthrough_rot(), erasure_rot(6, 2).unwrap()] {
            let s = check_sender_extraction(&p, &one(), BOUND).unwrap();
            assert_eq!(s.eps, ratio(0, 1), "{}", p.label());
            let c = check_choice_extraction(&p, &one(), BOUND).unwrap();
            assert_eq!(c.last_message_violations, 0);
            assert_eq!(c.equivocation_violations, 0);
            assert_eq!(c.eps, ratio(0, 1));
        }
    }
}
