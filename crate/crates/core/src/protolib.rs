//! Reference protocols, negative controls, their attack families, and the
//! random-to-chosen OT derandomizer.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::engine::{
    view_value, Action, AdversaryInterface, AdversaryStrategy, Corruption, DecisionPoint, Event, Limits, PartyProgram,
    TapeSpec, Trace,
};
use crate::funcs::{make_erasure_channel, make_rot_correlation, ChannelSpec, Role};
use crate::prob::ratio;
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("unknown protocol `{0}` (try list-protocols)")]
    Unknown(String),
    #[error("bad parameter for {protocol}: {message}")]
    Param { protocol: String, message: String },
}

type ChoiceFn = dyn Fn(&Trace) -> Option<u8> + Send + Sync;
type AttackFn = dyn Fn(Corruption) -> Vec<AdversaryStrategy> + Send + Sync;

/// A registered protocol instance.
#[derive(Clone)]
pub struct ProtocolSpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub alice: PartyProgram,
    pub bob: PartyProgram,
    pub channel: ChannelSpec,
    pub limits: Limits,
    /// Whether the protocol is expected to pass (false for negative controls).
    pub secure: bool,
    bob_choice: Arc<ChoiceFn>,
    attacks: Arc<AttackFn>,
}

impl fmt::Debug for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProtocolSpec")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("channel", &self.channel.name)
            .field("limits", &self.limits)
            .finish()
    }
}

impl ProtocolSpec {
    /// Name plus parameters, e.g. `erasure_rot:k=2,n=6`.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            self.name.clone()
        } else {
            let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{}:{}", self.name, ps.join(","))
        }
    }

    /// The honest Bob's choice bit in a trace where Bob runs the honest program.
    pub fn bob_choice(&self, trace: &Trace) -> Option<u8> {
        (self.bob_choice)(trace)
    }

    /// The curated attack family for one corruption case.
    pub fn curated(&self, corruption: Corruption) -> Vec<AdversaryStrategy> {
        if corruption == Corruption::None {
            return vec![AdversaryStrategy::passive()];
        }
        (self.attacks)(corruption)
    }

    /// A bounded interface whose full enumeration is every combination of a
    /// curated behaviour with an output rule (plain output or full view).
    pub fn interface(&self, corruption: Corruption) -> AdversaryInterface {
        let family: Vec<AdversaryStrategy> = self
            .curated(corruption)
            .into_iter()
            .filter(|s| !s.name.ends_with("+view"))
            .collect();
        let names: Vec<Value> = family.iter().map(|s| Value::sym(s.name.clone())).collect();
        let points = if corruption == Corruption::None {
            vec![]
        } else {
            vec![
                DecisionPoint {
                    name: "behaviour".into(),
                    options: names,
                },
                DecisionPoint {
                    name: "output".into(),
                    options: vec![Value::sym("plain"), Value::sym("view")],
                },
            ]
        };
        AdversaryInterface::new(corruption, points, move |choice| {
            let pick = choice["behaviour"].to_string();
            let base = family
                .iter()
                .find(|s| s.name == pick)
                .cloned()
                .expect("behaviour drawn from the family");
            if choice["output"] == Value::sym("view") {
                with_view_output(base)
            } else {
                base
            }
        })
    }
}

fn with_view_output(s: AdversaryStrategy) -> AdversaryStrategy {
    let wrap = |p: Option<PartyProgram>| p.map(|p| dump_view(&p));
    AdversaryStrategy {
        name: format!("{}+view", s.name),
        corruption: s.corruption,
        alice: wrap(s.alice),
        bob: wrap(s.bob),
    }
}

/// Runs `prog` but replaces its final output `o` by `(o, view)`.
pub fn dump_view(prog: &PartyProgram) -> PartyProgram {
    let inner = prog.clone();
    PartyProgram::new(format!("{}+view", prog.name), prog.role, prog.tape.clone(), move |ev, tape| {
        match inner.next_action(ev, tape) {
            Action::Output(o) => Action::Output(Value::pair(o, view_value(tape, ev))),
            Action::Abort => Action::Output(Value::pair(Value::Bot, view_value(tape, ev))),
            other => other,
        }
    })
}

/// Aborts at its first activation.
pub fn abort_immediately(role: Role, tape: TapeSpec) -> PartyProgram {
    PartyProgram::new("abort", role, tape, |_, _| Action::Abort)
}

/// Follows `prog` but, instead of sending its first authenticated message,
/// stops and outputs its view.
pub fn silent(prog: &PartyProgram) -> PartyProgram {
    let inner = prog.clone();
    PartyProgram::new("silent", prog.role, prog.tape.clone(), move |ev, tape| {
        match inner.next_action(ev, tape) {
            Action::Send(_) => Action::Output(Value::pair(Value::Bot, view_value(tape, ev))),
            other => other,
        }
    })
}

fn corrupt(role: Role, name: &str, prog: PartyProgram) -> AdversaryStrategy {
    match role {
        Role::Alice => AdversaryStrategy::corrupt_alice(name, prog),
        Role::Bob => AdversaryStrategy::corrupt_bob(name, prog),
    }
}

/// Attacks available against any protocol: follow honestly (reporting the
/// view), abort at once, and go silent before the first message.
fn generic_attacks(honest: &PartyProgram) -> Vec<AdversaryStrategy> {
    vec![
        corrupt(honest.role, "honest", honest.clone()),
        corrupt(honest.role, "honest+view", dump_view(honest)),
        corrupt(honest.role, "abort", abort_immediately(honest.role, honest.tape.clone())),
        corrupt(honest.role, "silent", silent(honest)),
    ]
}

/// Both parties corrupted, each following its program and reporting its view.
fn both_dump(alice: &PartyProgram, bob: &PartyProgram) -> AdversaryStrategy {
    AdversaryStrategy {
        name: "honest".into(),
        corruption: Corruption::Both,
        alice: Some(dump_view(alice)),
        bob: Some(dump_view(bob)),
    }
}

fn first_channel_output(ev: &[Event]) -> Option<&Value> {
    ev.iter().find_map(|e| match e {
        Event::Channel { output, .. } => Some(output),
        _ => None,
    })
}

fn received(ev: &[Event]) -> Option<&Value> {
    ev.iter().find_map(|e| match e {
        Event::Received(m) => Some(m),
        _ => None,
    })
}

fn has_sent(ev: &[Event]) -> bool {
    ev.iter().any(|e| matches!(e, Event::Sent(_)))
}

/// Single use of the correlation, then output the channel output.
fn copy_program(role: Role) -> PartyProgram {
    PartyProgram::new("copy", role, TapeSpec::empty(), |ev, _| match first_channel_output(ev) {
        Some(o) => Action::Output(o.clone()),
        None => Action::Input(Value::Unit),
    })
}

fn correlation_choice(t: &Trace) -> Option<u8> {
    t.channel_rounds.first()?.w.get(0)?.as_bit()
}

fn correlation_limits() -> Limits {
    Limits {
        channel_uses: 1,
        max_steps: 10,
    }
}

/// Pre-distributed correlation, outputs copied verbatim.
pub fn passthrough_rot() -> ProtocolSpec {
    let alice = copy_program(Role::Alice).renamed("passthrough.alice");
    let bob = copy_program(Role::Bob).renamed("passthrough.bob");
    let (a2, b2) = (alice.clone(), bob.clone());
    ProtocolSpec {
        name: "passthrough_rot".into(),
        params: BTreeMap::new(),
        channel: make_rot_correlation(),
        limits: correlation_limits(),
        secure: true,
        bob_choice: Arc::new(correlation_choice),
        attacks: Arc::new(move |c| match c {
            Corruption::Alice => generic_attacks(&a2),
            Corruption::Bob => generic_attacks(&b2),
            Corruption::Both => vec![both_dump(&a2, &b2)],
            Corruption::None => vec![AdversaryStrategy::passive()],
        }),
        alice,
        bob,
    }
}

/// Negative control: passthrough plus Alice sending `(b0, b1)` in the clear.
pub fn leaky_rot() -> ProtocolSpec {
    let alice = PartyProgram::new("leaky.alice", Role::Alice, TapeSpec::empty(), |ev, _| {
        match first_channel_output(ev) {
            None => Action::Input(Value::Unit),
            Some(v) if !has_sent(ev) => Action::Send(v.clone()),
            Some(v) => Action::Output(v.clone()),
        }
    });
    let bob = copy_program(Role::Bob).renamed("leaky.bob");
    // reads the leaked pair: outputs (c, b_c, b_{1-c})
    let reader = PartyProgram::new("read-bits", Role::Bob, TapeSpec::empty(), |ev, _| {
        match (first_channel_output(ev), received(ev)) {
            (None, _) => Action::Input(Value::Unit),
            (Some(w), Some(m)) => {
                let c = w.get(0).and_then(Value::as_bit).unwrap_or(0) as usize;
                Action::Output(Value::tuple([
                    w.get(0).unwrap().clone(),
                    w.get(1).unwrap().clone(),
                    m.get(1 - c).cloned().unwrap_or(Value::Bot),
                ]))
            }
            (Some(_), None) => Action::Wait,
        }
    });
    let (a2, b2) = (alice.clone(), bob.clone());
    ProtocolSpec {
        name: "leaky_rot".into(),
        params: BTreeMap::new(),
        channel: make_rot_correlation(),
        limits: correlation_limits(),
        secure: false,
        bob_choice: Arc::new(correlation_choice),
        attacks: Arc::new(move |c| match c {
            Corruption::Alice => generic_attacks(&a2),
            Corruption::Bob => {
                let mut v = generic_attacks(&b2);
                v.push(AdversaryStrategy::corrupt_bob("read-bits", reader.clone()));
                v
            }
            Corruption::Both => vec![both_dump(&a2, &b2)],
            Corruption::None => vec![AdversaryStrategy::passive()],
        }),
        alice,
        bob,
    }
}

/// Negative control: passthrough plus Bob sending `c` in the clear.
pub fn clear_choice_rot() -> ProtocolSpec {
    let alice = copy_program(Role::Alice).renamed("clear_choice.alice");
    let bob = PartyProgram::new("clear_choice.bob", Role::Bob, TapeSpec::empty(), |ev, _| {
        match first_channel_output(ev) {
            None => Action::Input(Value::Unit),
            Some(w) if !has_sent(ev) => Action::Send(w.get(0).unwrap().clone()),
            Some(w) => Action::Output(w.clone()),
        }
    });
    let reader = PartyProgram::new("read-choice", Role::Alice, TapeSpec::empty(), |ev, _| {
        match (first_channel_output(ev), received(ev)) {
            (None, _) => Action::Input(Value::Unit),
            (Some(_), Some(c)) => Action::Output(c.clone()),
            (Some(_), None) => Action::Wait,
        }
    });
    let (a2, b2) = (alice.clone(), bob.clone());
    ProtocolSpec {
        name: "clear_choice_rot".into(),
        params: BTreeMap::new(),
        channel: make_rot_correlation(),
        limits: correlation_limits(),
        secure: false,
        bob_choice: Arc::new(correlation_choice),
        attacks: Arc::new(move |c| match c {
            Corruption::Alice => {
                let mut v = generic_attacks(&a2);
                v.push(AdversaryStrategy::corrupt_alice("read-choice", reader.clone()));
                v
            }
            Corruption::Bob => generic_attacks(&b2),
            Corruption::Both => vec![both_dump(&a2, &b2)],
            Corruption::None => vec![AdversaryStrategy::passive()],
        }),
        alice,
        bob,
    }
}

impl PartyProgram {
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn positions(ev: &[Event], pred: impl Fn(&Value) -> bool) -> Vec<usize> {
    ev.iter()
        .filter_map(|e| match e {
            Event::Channel { index, output, .. } if pred(output) => Some(*index),
            _ => None,
        })
        .collect()
}

fn channel_count(ev: &[Event]) -> usize {
    ev.iter().filter(|e| matches!(e, Event::Channel { .. })).count()
}

fn xor_over(bits: &BTreeMap<usize, u8>, set: &[usize]) -> Option<u8> {
    set.iter().try_fold(0u8, |acc, i| bits.get(i).map(|b| acc ^ b))
}

fn received_bits(ev: &[Event]) -> BTreeMap<usize, u8> {
    ev.iter()
        .filter_map(|e| match e {
            Event::Channel { index, output, .. } => output.as_bit().map(|b| (*index, b)),
            _ => None,
        })
        .collect()
}

fn index_tuple(set: &[usize]) -> Value {
    Value::tuple(set.iter().map(|&i| Value::Int(i as i64)))
}

/// Parses an announced `(J0, J1)` pair of disjoint in-range index sets of size k.
fn parse_sets(m: &Value, n: usize, k: usize) -> Option<[Vec<usize>; 2]> {
    let grab = |j: usize| -> Option<Vec<usize>> {
        let set: Vec<usize> = m
            .get(j)?
            .as_tuple()?
            .iter()
            .map(|v| v.as_int().filter(|&i| i >= 0 && (i as usize) < n).map(|i| i as usize))
            .collect::<Option<_>>()?;
        let mut sorted = set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        (sorted.len() == k).then_some(set)
    };
    let (j0, j1) = (grab(0)?, grab(1)?);
    if j0.iter().any(|i| j1.contains(i)) || m.as_tuple()?.len() != 2 {
        return None;
    }
    Some([j0, j1])
}

/// Honest Alice of the erasure protocol: sends her `n` tape bits, then
/// outputs the XORs over the announced sets.
fn erasure_alice(n: usize, k: usize) -> PartyProgram {
    PartyProgram::new("erasure.alice", Role::Alice, TapeSpec::bits(n), move |ev, tape| {
        let used = channel_count(ev);
        if used < n {
            return Action::Input(tape[used].clone());
        }
        let Some(m) = received(ev) else {
            return Action::Wait;
        };
        let Some(sets) = parse_sets(m, n, k) else {
            return Action::Abort;
        };
        let bits: BTreeMap<usize, u8> = tape.iter().enumerate().map(|(i, b)| (i, b.as_bit().unwrap())).collect();
        let b0 = xor_over(&bits, &sets[0]).unwrap();
        let b1 = xor_over(&bits, &sets[1]).unwrap();
        Action::Output(Value::bits(&[b0, b1]))
    })
}

/// Bob's announcement rule: the set pair to send, or `None` to abort.
type Announce = dyn Fn(&[usize], &[usize], u8) -> Option<[Vec<usize>; 2]> + Send + Sync;

/// Bob skeleton: feed the channel, announce per `rule`, then output.
fn erasure_bob_with(name: &str, n: usize, rule: Arc<Announce>, output_all: bool) -> PartyProgram {
    PartyProgram::new(name, Role::Bob, TapeSpec::bits(1), move |ev, tape| {
        if channel_count(ev) < n {
            return Action::Input(Value::Unit);
        }
        let c = tape[0].as_bit().unwrap();
        let recv = positions(ev, |w| !w.is_bot());
        let erased = positions(ev, Value::is_bot);
        let Some(sets) = rule(&recv, &erased, c) else {
            return Action::Abort;
        };
        if !has_sent(ev) {
            return Action::Send(Value::pair(index_tuple(&sets[0]), index_tuple(&sets[1])));
        }
        let bits = received_bits(ev);
        let guess = |j: usize| xor_over(&bits, &sets[j]).map(Value::bit).unwrap_or(Value::Bot);
        if output_all {
            Action::Output(Value::tuple([guess(0), guess(1)]))
        } else {
            Action::Output(Value::pair(Value::bit(c), guess(c as usize)))
        }
    })
}

fn honest_rule(k: usize) -> Arc<Announce> {
    Arc::new(move |recv, erased, c| {
        if recv.len() < k || erased.len() < k {
            return None;
        }
        let mut sets = [Vec::new(), Vec::new()];
        sets[c as usize] = recv[..k].to_vec();
        sets[1 - c as usize] = erased[..k].to_vec();
        Some(sets)
    })
}

/// Claims both sets were received whenever at least `2k` positions arrived.
pub fn both_sets_attack(n: usize, k: usize) -> PartyProgram {
    let honest = honest_rule(k);
    let rule: Arc<Announce> = Arc::new(move |recv, erased, c| {
        if recv.len() >= 2 * k {
            Some([recv[..k].to_vec(), recv[k..2 * k].to_vec()])
        } else {
            honest(recv, erased, c)
        }
    });
    let inner = erasure_bob_with("both-sets", n, rule, true);
    // tag the output so a full success is recognisable: ("both", b0, b1)
    PartyProgram::new("both-sets", Role::Bob, TapeSpec::bits(1), move |ev, tape| {
        match inner.next_action(ev, tape) {
            Action::Output(o) => {
                let recv = positions(ev, |w| !w.is_bot());
                let tag = if recv.len() >= 2 * k { "both" } else { "one" };
                Action::Output(Value::pair(Value::sym(tag), o))
            }
            other => other,
        }
    })
}

/// Erasure-channel random OT with `n` channel uses and sets of size `k`.
pub fn erasure_rot(n: usize, k: usize) -> Result<ProtocolSpec, ProtocolError> {
    let bad = |message: String| ProtocolError::Param {
        protocol: "erasure_rot".into(),
        message,
    };
    if k == 0 || 2 * k > n {
        return Err(bad(format!("need 1 <= k and 2k <= n, got n={n}, k={k}")));
    }
    if n > 12 {
        return Err(bad(format!("n={n} is above the enumerable limit 12")));
    }
    let alice = erasure_alice(n, k);
    let bob = erasure_bob_with("erasure.bob", n, honest_rule(k), false);
    let (a2, b2) = (alice.clone(), bob.clone());
    let attacks = move |c: Corruption| match c {
        Corruption::Alice => generic_attacks(&a2),
        Corruption::Bob => {
            let mut v = generic_attacks(&b2);
            v.push(AdversaryStrategy::corrupt_bob("both-sets", both_sets_attack(n, k)));
            v
        }
        Corruption::Both => vec![both_dump(&a2, &b2)],
        Corruption::None => vec![AdversaryStrategy::passive()],
    };
    Ok(ProtocolSpec {
        name: "erasure_rot".into(),
        params: BTreeMap::from([("k".into(), k.to_string()), ("n".into(), n.to_string())]),
        channel: make_erasure_channel(ratio(1, 2)).expect("1/2 is a probability"),
        limits: Limits {
            channel_uses: n,
            max_steps: 2 * n + 8,
        },
        secure: true,
        bob_choice: Arc::new(|t: &Trace| t.tape_b.first()?.as_bit()),
        attacks: Arc::new(attacks),
        alice,
        bob,
    })
}

/// One line per registered protocol: name, parameters, description.
pub fn list_protocols() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("passthrough_rot", "", "pre-distributed ROT correlation, outputs copied"),
        (
            "erasure_rot",
            "n=6,k=2",
            "n bits over a 1/2-erasure channel, Bob announces one received and one erased k-set",
        ),
        ("leaky_rot", "", "negative control: Alice sends (b0,b1) in the clear"),
        ("clear_choice_rot", "", "negative control: Bob sends c in the clear"),
    ]
}

/// Resolves `name` or `name:key=value,...`.
pub fn lookup(spec: &str) -> Result<ProtocolSpec, ProtocolError> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = BTreeMap::new();
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| ProtocolError::Param {
            protocol: name.into(),
            message: format!("`{kv}` is not key=value"),
        })?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    let int = |key: &str, default: usize, params: &mut BTreeMap<String, String>| -> Result<usize, ProtocolError> {
        match params.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ProtocolError::Param {
                protocol: name.into(),
                message: format!("{key}={v} is not a non-negative integer"),
            }),
        }
    };
    let spec = match name {
        "passthrough_rot" => passthrough_rot(),
        "leaky_rot" => leaky_rot(),
        "clear_choice_rot" => clear_choice_rot(),
        "erasure_rot" => {
            let n = int("n", 6, &mut params)?;
            let k = int("k", 2, &mut params)?;
            erasure_rot(n, k)?
        }
        other => return Err(ProtocolError::Unknown(other.into())),
    };
    if let Some(extra) = params.keys().next() {
        return Err(ProtocolError::Param {
            protocol: name.into(),
            message: format!("unknown parameter `{extra}`"),
        });
    }
    Ok(spec)
}

/// A chosen-input OT run obtained from one random OT instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerandomizedRun {
    /// Bob's message `e = choice ⊕ c`.
    pub e: u8,
    /// Alice's reply `(z0, z1)`.
    pub z: (u8, u8),
    /// Bob's output, which should equal `m_choice`.
    pub output: u8,
}

/// Turns random OT outputs into a chosen OT on inputs `(m0, m1)` and `choice`.
pub fn derandomize(rot_a: (u8, u8), rot_b: (u8, u8), input_a: (u8, u8), choice: u8) -> DerandomizedRun {
    let (b0, b1) = rot_a;
    let (c, bc) = rot_b;
    let e = choice ^ c;
    let b = |j: u8| if j == 0 { b0 } else { b1 };
    let z = (input_a.0 ^ b(e), input_a.1 ^ b(1 ^ e));
    let zc = if choice == 0 { z.0 } else { z.1 };
    DerandomizedRun { e, z, output: zc ^ bc }
}
