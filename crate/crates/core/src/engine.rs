//! Execution of two-party protocols over the authenticated channel and a
//! stateless primitive, plus exhaustive enumeration of all executions.
//!
//! Scheduling is strict alternation with Alice activated first; each
//! activation yields exactly one [`Action`]. A party that has submitted a
//! channel input is blocked until its counterpart submits one too, at which
//! point one channel use is sampled and both parties see their side of it.
//! A party that is still running when the step budget expires outputs `⊥`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::funcs::{AuthMessage, ChannelError, ChannelSpec, Role};
use crate::prob::{one, ratio, JointDist, Prob, ProbError};
use crate::sampling::{choose_uniform, enumerate, Chooser};
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("program `{program}` used the channel more than {limit} times")]
    ChannelBudget { program: String, limit: usize },
    #[error("programs `{alice}` and `{bob}` were both still running after {steps} steps")]
    RoundBudget { alice: String, bob: String, steps: usize },
    #[error("program `{program}` submitted an invalid channel input: {source}")]
    BadInput { program: String, source: Box<ChannelError> },
    #[error("channel draw {draw} is not in the support for inputs (x={x}, y={y})")]
    BadDraw { draw: String, x: String, y: String },
    #[error("run needed more channel draws than the {given} supplied")]
    MissingDraws { given: usize },
    #[error("tape {tape} does not match the declared tape of `{program}`")]
    BadTape { program: String, tape: String },
    #[error("enumeration needs {required} branches, above the bound {bound}")]
    Bound { required: u128, bound: u64 },
    #[error("{0}")]
    Prob(#[from] ProbError),
}

/// A declared randomness tape: `len` symbols from `alphabet`, uniform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TapeSpec {
    pub alphabet: Vec<Value>,
    pub len: usize,
}

impl TapeSpec {
    pub fn empty() -> Self {
        TapeSpec {
            alphabet: vec![Value::bit(0)],
            len: 0,
        }
    }

    pub fn bits(len: usize) -> Self {
        TapeSpec {
            alphabet: vec![Value::bit(0), Value::bit(1)],
            len,
        }
    }

    pub fn count(&self) -> u128 {
        (self.alphabet.len() as u128).saturating_pow(self.len as u32)
    }

    /// Every tape, in lexicographic order of symbol indices.
    pub fn all(&self) -> Vec<Vec<Value>> {
        let mut out = vec![Vec::new()];
        for _ in 0..self.len {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    self.alphabet.iter().map(move |s| {
                        let mut t = prefix.clone();
                        t.push(s.clone());
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// Draws a tape symbol by symbol through `ch`.
    pub fn draw(&self, ch: &mut dyn Chooser) -> Vec<Value> {
        (0..self.len)
            .map(|_| self.alphabet[choose_uniform(ch, self.alphabet.len())].clone())
            .collect()
    }

    pub fn contains(&self, tape: &[Value]) -> bool {
        tape.len() == self.len && tape.iter().all(|s| self.alphabet.contains(s))
    }
}

/// One entry of a party's view, in the order the party observed it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    /// A completed channel use: the party's own input and output.
    Channel { index: usize, input: Value, output: Value },
    Sent(Value),
    Received(Value),
}

impl Event {
    pub fn to_value(&self) -> Value {
        match self {
            Event::Channel { input, output, .. } => Value::tuple([Value::sym("ch"), input.clone(), output.clone()]),
            Event::Sent(m) => Value::pair(Value::sym("snd"), m.clone()),
            Event::Received(m) => Value::pair(Value::sym("rcv"), m.clone()),
        }
    }

    pub fn is_message(&self) -> bool {
        !matches!(self, Event::Channel { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Send(Value),
    Input(Value),
    Wait,
    Output(Value),
    Abort,
}

type NextAction = dyn Fn(&[Event], &[Value]) -> Action + Send + Sync;

/// A deterministic next-action function of (events seen so far, tape).
#[derive(Clone)]
pub struct PartyProgram {
    pub name: String,
    pub role: Role,
    pub tape: TapeSpec,
    next: Arc<NextAction>,
}

impl fmt::Debug for PartyProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartyProgram")
            .field("name", &self.name)
            .field("role", &self.role)
            .field("tape", &self.tape)
            .finish()
    }
}

impl PartyProgram {
    pub fn new(
        name: impl Into<String>,
        role: Role,
        tape: TapeSpec,
        next: impl Fn(&[Event], &[Value]) -> Action + Send + Sync + 'static,
    ) -> Self {
        PartyProgram {
            name: name.into(),
            role,
            tape,
            next: Arc::new(next),
        }
    }

    pub fn next_action(&self, events: &[Event], tape: &[Value]) -> Action {
        (self.next)(events, tape)
    }

    /// A zero-round program that outputs `value` at its first activation.
    pub fn constant(name: impl Into<String>, role: Role, value: Value) -> Self {
        PartyProgram::new(name, role, TapeSpec::empty(), move |_, _| Action::Output(value.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Channel budget `n`.
    pub channel_uses: usize,
    /// Total scheduler activations (both parties together).
    pub max_steps: usize,
}

/// One channel use as recorded in a trace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelRound {
    pub x: Value,
    pub y: Value,
    pub v: Value,
    pub w: Value,
    pub step: usize,
}

/// A complete execution record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub tape_a: Vec<Value>,
    pub tape_b: Vec<Value>,
    pub channel_rounds: Vec<ChannelRound>,
    pub trans: Vec<AuthMessage>,
    pub events_a: Vec<Event>,
    pub events_b: Vec<Event>,
    pub output_a: Value,
    pub output_b: Value,
    /// True when the party was still running at the step budget.
    pub timed_out: [bool; 2],
    pub weight: Prob,
}

impl Trace {
    pub fn tape(&self, role: Role) -> &[Value] {
        match role {
            Role::Alice => &self.tape_a,
            Role::Bob => &self.tape_b,
        }
    }

    pub fn events(&self, role: Role) -> &[Event] {
        match role {
            Role::Alice => &self.events_a,
            Role::Bob => &self.events_b,
        }
    }

    pub fn output(&self, role: Role) -> &Value {
        match role {
            Role::Alice => &self.output_a,
            Role::Bob => &self.output_b,
        }
    }

    /// The party's view: its tape followed by everything it observed.
    pub fn view(&self, role: Role) -> Value {
        view_value(self.tape(role), self.events(role))
    }

    /// Authenticated transcript as a value, including send rounds.
    pub fn trans_value(&self) -> Value {
        Value::tuple(self.trans.iter().map(|m| {
            let who = match m.sender {
                Role::Alice => "A",
                Role::Bob => "B",
            };
            Value::tuple([Value::sym(who), Value::Int(m.round as i64), m.payload.clone()])
        }))
    }

    /// Timing of channel uses (scheduler steps), payloads hidden.
    pub fn channel_timing(&self) -> Value {
        Value::tuple(self.channel_rounds.iter().map(|r| Value::Int(r.step as i64)))
    }
}

/// Encodes a (tape, events) view as a single value.
pub fn view_value(tape: &[Value], events: &[Event]) -> Value {
    Value::pair(
        Value::tuple(tape.iter().cloned()),
        Value::tuple(events.iter().map(Event::to_value)),
    )
}

struct PartyState<'p> {
    prog: &'p PartyProgram,
    tape: Vec<Value>,
    events: Vec<Event>,
    pending: Option<Value>,
    output: Option<Value>,
}

enum Draws<'a> {
    Chooser(&'a mut dyn Chooser),
    Fixed { draws: &'a [Value], pos: usize },
}

impl Draws<'_> {
    fn draw(&mut self, x: &Value, y: &Value, row: &crate::prob::Dist) -> Result<(Value, Prob), EngineError> {
        match self {
            Draws::Chooser(ch) => {
                let options: Vec<(&Value, &Prob)> = row.iter().collect();
                let weights: Vec<Prob> = options.iter().map(|(_, p)| (*p).clone()).collect();
                let (vw, p) = options[ch.choose(&weights)];
                Ok((vw.clone(), p.clone()))
            }
            Draws::Fixed { draws, pos } => {
                let want = draws.get(*pos).ok_or(EngineError::MissingDraws { given: draws.len() })?;
                *pos += 1;
                let p = row.weight(want);
                if p == ratio(0, 1) {
                    return Err(EngineError::BadDraw {
                        draw: want.to_string(),
                        x: x.to_string(),
                        y: y.to_string(),
                    });
                }
                Ok((want.clone(), p))
            }
        }
    }
}

/// Runs one execution, asking `draws` once per channel use with the row's
/// weights in the row's support order.
pub fn execute(
    alice: &PartyProgram,
    bob: &PartyProgram,
    chan: &ChannelSpec,
    limits: &Limits,
    tape_a: Vec<Value>,
    tape_b: Vec<Value>,
    draws: &mut dyn Chooser,
) -> Result<Trace, EngineError> {
    run(alice, bob, chan, limits, tape_a, tape_b, Draws::Chooser(draws))
}

/// Runs with explicit tapes and one `(v, w)` draw per channel use.
///
/// The trace weight is the probability of the tapes and draws.
pub fn run_once(
    alice: &PartyProgram,
    bob: &PartyProgram,
    chan: &ChannelSpec,
    limits: &Limits,
    tape_a: Vec<Value>,
    tape_b: Vec<Value>,
    draws: &[Value],
) -> Result<Trace, EngineError> {
    run(alice, bob, chan, limits, tape_a, tape_b, Draws::Fixed { draws, pos: 0 })
}

fn run(
    alice: &PartyProgram,
    bob: &PartyProgram,
    chan: &ChannelSpec,
    limits: &Limits,
    tape_a: Vec<Value>,
    tape_b: Vec<Value>,
    mut draws: Draws<'_>,
) -> Result<Trace, EngineError> {
    for (prog, tape) in [(alice, &tape_a), (bob, &tape_b)] {
        if !prog.tape.contains(tape) {
            return Err(EngineError::BadTape {
                program: prog.name.clone(),
                tape: Value::tuple(tape.iter().cloned()).to_string(),
            });
        }
    }
    let fresh = |prog, tape| PartyState {
        prog,
        tape,
        events: Vec::new(),
        pending: None,
        output: None,
    };
    let mut parties = [fresh(alice, tape_a), fresh(bob, tape_b)];
    let mut rounds = Vec::new();
    let mut trans = Vec::new();
    let mut weight = one();
    for step in 0..limits.max_steps {
        if parties.iter().all(|p| p.output.is_some()) {
            break;
        }
        let me = step % 2;
        let other = 1 - me;
        if parties[me].output.is_some() || parties[me].pending.is_some() {
            continue;
        }
        match parties[me].prog.next_action(&parties[me].events, &parties[me].tape) {
            Action::Wait => {}
            Action::Output(v) => parties[me].output = Some(v),
            Action::Abort => parties[me].output = Some(Value::Bot),
            Action::Send(m) => {
                trans.push(AuthMessage {
                    sender: parties[me].prog.role,
                    payload: m.clone(),
                    round: step,
                });
                parties[me].events.push(Event::Sent(m.clone()));
                parties[other].events.push(Event::Received(m));
            }
            Action::Input(input) => {
                if rounds.len() >= limits.channel_uses {
                    return Err(EngineError::ChannelBudget {
                        program: parties[me].prog.name.clone(),
                        limit: limits.channel_uses,
                    });
                }
                let alphabet = if me == 0 { &chan.x_alphabet } else { &chan.y_alphabet };
                if !alphabet.contains(&input) {
                    return Err(EngineError::BadInput {
                        program: parties[me].prog.name.clone(),
                        source: Box::new(ChannelError::UnknownSymbol {
                            symbol: input.to_string(),
                            alphabet: if me == 0 { "x" } else { "y" },
                        }),
                    });
                }
                parties[me].pending = Some(input);
                if parties[other].pending.is_none() {
                    continue;
                }
                let x = parties[0].pending.take().unwrap();
                let y = parties[1].pending.take().unwrap();
                let row = chan.row(&x, &y).map_err(|source| EngineError::BadInput {
                    program: alice.name.clone(),
                    source: Box::new(source),
                })?;
                let (vw, p) = draws.draw(&x, &y, row)?;
                weight *= p;
                let (v, w) = (vw.get(0).unwrap().clone(), vw.get(1).unwrap().clone());
                let index = rounds.len();
                parties[0].events.push(Event::Channel {
                    index,
                    input: x.clone(),
                    output: v.clone(),
                });
                parties[1].events.push(Event::Channel {
                    index,
                    input: y.clone(),
                    output: w.clone(),
                });
                rounds.push(ChannelRound { x, y, v, w, step });
            }
        }
    }
    let timed_out = [parties[0].output.is_none(), parties[1].output.is_none()];
    if timed_out[0] && timed_out[1] {
        return Err(EngineError::RoundBudget {
            alice: alice.name.clone(),
            bob: bob.name.clone(),
            steps: limits.max_steps,
        });
    }
    let [pa, pb] = parties;
    let tapes = Prob::from_integer((alice.tape.count() * bob.tape.count()).into());
    Ok(Trace {
        tape_a: pa.tape,
        tape_b: pb.tape,
        channel_rounds: rounds,
        trans,
        events_a: pa.events,
        events_b: pb.events,
        output_a: pa.output.unwrap_or(Value::Bot),
        output_b: pb.output.unwrap_or(Value::Bot),
        timed_out,
        weight: weight / tapes,
    })
}

/// Draws both tapes and all channel uses from `ch`.
pub fn sample_trace(
    alice: &PartyProgram,
    bob: &PartyProgram,
    chan: &ChannelSpec,
    limits: &Limits,
    ch: &mut dyn Chooser,
) -> Result<Trace, EngineError> {
    let ta = alice.tape.draw(ch);
    let tb = bob.tape.draw(ch);
    execute(alice, bob, chan, limits, ta, tb, ch)
}

/// Worst-case number of leaves for one tape pair.
fn leaves_per_pair(chan: &ChannelSpec, limits: &Limits) -> u128 {
    (chan.max_branching() as u128).saturating_pow(limits.channel_uses as u32)
}

/// Every execution with nonzero probability, each carrying its exact weight.
///
/// Tape pairs are evaluated in parallel; the result order is deterministic.
pub fn enumerate_traces(
    alice: &PartyProgram,
    bob: &PartyProgram,
    chan: &ChannelSpec,
    limits: &Limits,
    bound: u64,
) -> Result<Vec<Trace>, EngineError> {
    enumerate_conditioned(alice, bob, chan, limits, None, None, bound)
}

/// Like [`enumerate_traces`] with either tape optionally pinned. Weights
/// are conditional on the pinned tapes, so they still sum to one.
pub fn enumerate_conditioned(
    alice: &PartyProgram,
    bob: &PartyProgram,
    chan: &ChannelSpec,
    limits: &Limits,
    tape_a: Option<&[Value]>,
    tape_b: Option<&[Value]>,
    bound: u64,
) -> Result<Vec<Trace>, EngineError> {
    let space = |prog: &PartyProgram, fixed: Option<&[Value]>| match fixed {
        Some(t) => vec![t.to_vec()],
        None => prog.tape.all(),
    };
    let count = |prog: &PartyProgram, fixed: Option<&[Value]>| if fixed.is_some() { 1 } else { prog.tape.count() };
    let required = count(alice, tape_a)
        .saturating_mul(count(bob, tape_b))
        .saturating_mul(leaves_per_pair(chan, limits));
    if required > bound as u128 {
        return Err(EngineError::Bound { required, bound });
    }
    let scale = Prob::from_integer(
        (if tape_a.is_some() { alice.tape.count() } else { 1 } * if tape_b.is_some() { bob.tape.count() } else { 1 })
            .into(),
    );
    let pairs: Vec<(Vec<Value>, Vec<Value>)> = space(alice, tape_a)
        .into_iter()
        .flat_map(|ta| space(bob, tape_b).into_iter().map(move |tb| (ta.clone(), tb)))
        .collect();
    let per_pair: Vec<Result<Vec<Trace>, EngineError>> = pairs
        .into_par_iter()
        .map(|(ta, tb)| {
            let leaves = enumerate(bound, |ch| execute(alice, bob, chan, limits, ta.clone(), tb.clone(), ch))
                .map_err(|e| EngineError::Bound {
                    required: e.bound as u128 + 1,
                    bound,
                })?;
            leaves
                .into_iter()
                .map(|(t, _)| {
                    t.map(|mut t| {
                        t.weight *= &scale;
                        t
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_pair {
        out.extend(r?);
    }
    Ok(out)
}

pub const JOINT_NAMES: [&str; 4] = ["view_A", "view_B", "output_A", "output_B"];

/// Collapses traces to the law of `(view_A, view_B, output_A, output_B)`.
pub fn traces_to_joint(traces: &[Trace]) -> Result<JointDist, EngineError> {
    let atoms = traces
        .iter()
        .map(|t| {
            (
                vec![t.view(Role::Alice), t.view(Role::Bob), t.output_a.clone(), t.output_b.clone()],
                t.weight.clone(),
            )
        })
        .collect::<Vec<_>>();
    Ok(JointDist::new(JOINT_NAMES, atoms)?)
}

/// The exact joint law of views and outputs of an honest execution.
pub fn enumerate_joint(
    alice: &PartyProgram,
    bob: &PartyProgram,
    chan: &ChannelSpec,
    limits: &Limits,
    bound: u64,
) -> Result<JointDist, EngineError> {
    traces_to_joint(&enumerate_traces(alice, bob, chan, limits, bound)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    None,
    Alice,
    Bob,
    Both,
}

impl Corruption {
    pub const ALL: [Corruption; 4] = [Corruption::None, Corruption::Alice, Corruption::Bob, Corruption::Both];

    pub fn corrupts(self, role: Role) -> bool {
        matches!(
            (self, role),
            (Corruption::Both, _) | (Corruption::Alice, Role::Alice) | (Corruption::Bob, Role::Bob)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Corruption::None => "none",
            Corruption::Alice => "alice_only",
            Corruption::Bob => "bob_only",
            Corruption::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Corruption> {
        match s {
            "none" => Some(Corruption::None),
            "alice" | "alice_only" => Some(Corruption::Alice),
            "bob" | "bob_only" => Some(Corruption::Bob),
            "both" => Some(Corruption::Both),
            _ => None,
        }
    }
}

impl fmt::Display for Corruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A deterministic adversary: replacement programs for the corrupted
/// parties. A corrupted party's tape is the adversary's tape for that side,
/// and its output is the adversary's output.
#[derive(Debug, Clone)]
pub struct AdversaryStrategy {
    pub name: String,
    pub corruption: Corruption,
    pub alice: Option<PartyProgram>,
    pub bob: Option<PartyProgram>,
}

impl AdversaryStrategy {
    /// The empty strategy of the no-corruption case.
    pub fn passive() -> Self {
        AdversaryStrategy {
            name: "none".into(),
            corruption: Corruption::None,
            alice: None,
            bob: None,
        }
    }

    pub fn corrupt_alice(name: impl Into<String>, prog: PartyProgram) -> Self {
        AdversaryStrategy {
            name: name.into(),
            corruption: Corruption::Alice,
            alice: Some(prog),
            bob: None,
        }
    }

    pub fn corrupt_bob(name: impl Into<String>, prog: PartyProgram) -> Self {
        AdversaryStrategy {
            name: name.into(),
            corruption: Corruption::Bob,
            alice: None,
            bob: Some(prog),
        }
    }

    /// The programs that actually run: corrupted replacements where present.
    pub fn programs<'a>(&'a self, alice: &'a PartyProgram, bob: &'a PartyProgram) -> (&'a PartyProgram, &'a PartyProgram) {
        (self.alice.as_ref().unwrap_or(alice), self.bob.as_ref().unwrap_or(bob))
    }
}

/// A finite adversary choice, e.g. which positions to claim as received.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionPoint {
    pub name: String,
    pub options: Vec<Value>,
}

type Builder = dyn Fn(&BTreeMap<String, Value>) -> AdversaryStrategy + Send + Sync;

/// A bounded adversary interface: decision points plus a constructor that
/// turns one assignment of choices into a strategy.
#[derive(Clone)]
pub struct AdversaryInterface {
    pub corruption: Corruption,
    pub points: Vec<DecisionPoint>,
    build: Arc<Builder>,
}

impl fmt::Debug for AdversaryInterface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdversaryInterface")
            .field("corruption", &self.corruption)
            .field("points", &self.points)
            .finish()
    }
}

impl AdversaryInterface {
    pub fn new(
        corruption: Corruption,
        points: Vec<DecisionPoint>,
        build: impl Fn(&BTreeMap<String, Value>) -> AdversaryStrategy + Send + Sync + 'static,
    ) -> Self {
        AdversaryInterface {
            corruption,
            points,
            build: Arc::new(build),
        }
    }

    pub fn strategy_count(&self) -> u128 {
        self.points
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.options.len() as u128))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{count} adversary strategies exceed the bound {bound}; use a curated family instead")]
pub struct StrategyBound {
    pub count: u128,
    pub bound: u64,
}

/// Every deterministic strategy over the interface.
pub fn enumerate_adversaries(iface: &AdversaryInterface, bound: u64) -> Result<Vec<AdversaryStrategy>, StrategyBound> {
    if iface.corruption == Corruption::None {
        return Ok(vec![AdversaryStrategy::passive()]);
    }
    let count = iface.strategy_count();
    if count > bound as u128 {
        return Err(StrategyBound { count, bound });
    }
    let mut assignments = vec![BTreeMap::new()];
    for p in &iface.points {
        assignments = assignments
            .into_iter()
            .flat_map(|a| {
                p.options.iter().map(move |o| {
                    let mut a = a.clone();
                    a.insert(p.name.clone(), o.clone());
                    a
                })
            })
            .collect();
    }
    Ok(assignments.iter().map(|a| (iface.build)(a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::make_rot_correlation;
    use crate::prob::Dist;

    fn limits() -> Limits {
        Limits {
            channel_uses: 1,
            max_steps: 8,
        }
    }

    fn copy_out(role: Role) -> PartyProgram {
        PartyProgram::new("copy", role, TapeSpec::empty(), |ev, _| match ev.last() {
            Some(Event::Channel { output, .. }) => Action::Output(output.clone()),
            _ => Action::Input(Value::Unit),
        })
    }

    #[test]
    fn constant_protocol_is_point_mass() {
        let a = PartyProgram::constant("a", Role::Alice, Value::Int(3));
        let b = PartyProgram::constant("b", Role::Bob, Value::Int(4));
        let chan = make_rot_correlation();
        let t = run_once(&a, &b, &chan, &limits(), vec![], vec![], &[]).unwrap();
        assert!(t.trans.is_empty());
        assert_eq!((t.output_a.clone(), t.output_b.clone()), (Value::Int(3), Value::Int(4)));
        let j = enumerate_joint(&a, &b, &chan, &limits(), 1000).unwrap();
        assert_eq!(j.len(), 1);
        let out = j.marginal_dist(&["output_A", "output_B"]).unwrap();
        assert_eq!(out, Dist::point(Value::pair(Value::Int(3), Value::Int(4))));
    }

    #[test]
    fn fixed_draw_copies_correlation() {
        let chan = make_rot_correlation();
        let draw = Value::pair(Value::bits(&[1, 0]), Value::bits(&[0, 1]));
        let t = run_once(&copy_out(Role::Alice), &copy_out(Role::Bob), &chan, &limits(), vec![], vec![], &[draw]).unwrap();
        assert_eq!(t.output_a, Value::bits(&[1, 0]));
        assert_eq!(t.output_b, Value::bits(&[0, 1]));
        assert_eq!(t.weight, ratio(1, 8));
        let bad = Value::pair(Value::bits(&[1, 0]), Value::bits(&[0, 0]));
        let err = run_once(&copy_out(Role::Alice), &copy_out(Role::Bob), &chan, &limits(), vec![], vec![], &[bad]);
        assert!(matches!(err, Err(EngineError::BadDraw { .. })));
    }

    #[test]
    fn livelock_names_both_programs() {
        let idle = |role| PartyProgram::new("idle", role, TapeSpec::empty(), |_, _| Action::Wait);
        let chan = make_rot_correlation();
        let err = run_once(&idle(Role::Alice), &idle(Role::Bob), &chan, &limits(), vec![], vec![], &[]).unwrap_err();
        assert!(err.to_string().contains("idle"));
    }

    #[test]
    fn silent_counterpart_times_out_to_bot() {
        let chan = make_rot_correlation();
        let quitter = PartyProgram::new("quit", Role::Bob, TapeSpec::empty(), |_, _| Action::Abort);
        let t = run_once(&copy_out(Role::Alice), &quitter, &chan, &limits(), vec![], vec![], &[]).unwrap();
        assert_eq!(t.output_a, Value::Bot);
        assert_eq!(t.timed_out, [true, false]);
    }

    #[test]
    fn channel_budget_enforced() {
        let chan = make_rot_correlation();
        let greedy = |role| PartyProgram::new("greedy", role, TapeSpec::empty(), |_, _| Action::Input(Value::Unit));
        let err = enumerate_traces(&greedy(Role::Alice), &greedy(Role::Bob), &chan, &limits(), 1000).unwrap_err();
        assert!(matches!(err, EngineError::ChannelBudget { limit: 1, .. }));
    }

    #[test]
    fn tapes_enter_weights_and_bound_is_checked() {
        let coin = PartyProgram::new("coin", Role::Alice, TapeSpec::bits(2), |_, tape| {
            Action::Output(Value::tuple(tape.iter().cloned()))
        });
        let b = PartyProgram::constant("b", Role::Bob, Value::Unit);
        let chan = make_rot_correlation();
        let traces = enumerate_traces(&coin, &b, &chan, &limits(), 1000).unwrap();
        assert_eq!(traces.len(), 4);
        assert!(traces.iter().all(|t| t.weight == ratio(1, 4)));
        let err = enumerate_traces(&coin, &b, &chan, &limits(), 10).unwrap_err();
        assert_eq!(err, EngineError::Bound { required: 32, bound: 10 });
        let pinned = enumerate_conditioned(&coin, &b, &chan, &limits(), Some(&[Value::bit(1), Value::bit(0)]), None, 100)
            .unwrap();
        assert_eq!(pinned.len(), 1);
        assert_eq!(pinned[0].weight, ratio(1, 1));
    }

    #[test]
    fn adversary_enumeration_counts() {
        assert_eq!(
            enumerate_adversaries(&AdversaryInterface::new(Corruption::None, vec![], |_| unreachable!()), 1)
                .unwrap()
                .len(),
            1
        );
        let iface = AdversaryInterface::new(
            Corruption::Bob,
            vec![DecisionPoint {
                name: "d".into(),
                options: vec![Value::bit(0), Value::bit(1)],
            }],
            |a| {
                let v = a["d"].clone();
                AdversaryStrategy::corrupt_bob(format!("d={v}"), PartyProgram::constant("adv", Role::Bob, v))
            },
        );
        let all = enumerate_adversaries(&iface, 10).unwrap();
        assert_eq!(all.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(), ["d=0", "d=1"]);
        assert_eq!(enumerate_adversaries(&iface, 1).unwrap_err(), StrategyBound { count: 2, bound: 1 });
    }
}
