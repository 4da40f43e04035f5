//! Ideal-world simulation with the random OT functionality, and the
//! real-versus-ideal distinguishing game.
//!
//! The environment's view depends on the corruption case:
//!
//! * none: channel-use timing, the authenticated transcript (with send
//!   rounds) and both outputs; channel payloads stay hidden.
//! * alice_only: Alice's full view, the adversary's output, Bob's output.
//! * bob_only: Bob's full view, the adversary's output, Alice's output.
//! * both: both views and both outputs.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    enumerate_conditioned, enumerate_traces, run_once, sample_trace, AdversaryStrategy, Corruption, EngineError, Event,
    Trace,
};
use crate::extract::{ChoiceExtractor, ExtractError, MessageSet, SenderExtractor};
use crate::funcs::{rot_step, Role, RotEvent, RotIdealState, RotMessage};
use crate::prob::{fmt_prob, ratio, statistical_distance, to_f64, Dist, Prob, ProbError};
use crate::protolib::ProtocolSpec;
use crate::report::ser_prob;
use crate::sampling::{choose_uniform, Chooser, SampleChooser};
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("adversary `{name}` corrupts {got} but the case is {case}")]
    CaseMismatch { name: String, got: Corruption, case: Corruption },
    #[error("{0}; exact mode cannot enumerate this instance, use sampling mode")]
    TooLarge(EngineError),
    #[error("{0}")]
    Engine(EngineError),
    #[error("{0}")]
    Extract(#[from] ExtractError),
    #[error("{0}")]
    Prob(#[from] ProbError),
    #[error("sampling mode needs at least one sample")]
    NoSamples,
}

impl From<EngineError> for GameError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Bound { .. } => GameError::TooLarge(e),
            other => GameError::Engine(other),
        }
    }
}

/// The environment's view of one run, given the trace that determines the
/// corrupted side and the honest outputs actually delivered.
pub fn env_view(case: Corruption, t: &Trace, out_a: &Value, out_b: &Value) -> Value {
    match case {
        Corruption::None => Value::tuple([t.channel_timing(), t.trans_value(), out_a.clone(), out_b.clone()]),
        Corruption::Alice => Value::tuple([t.view(Role::Alice), out_a.clone(), out_b.clone()]),
        Corruption::Bob => Value::tuple([t.view(Role::Bob), out_b.clone(), out_a.clone()]),
        Corruption::Both => Value::tuple([t.view(Role::Alice), t.view(Role::Bob), out_a.clone(), out_b.clone()]),
    }
}

fn check_case(case: Corruption, adv: &AdversaryStrategy) -> Result<(), GameError> {
    if adv.corruption != case {
        return Err(GameError::CaseMismatch {
            name: adv.name.clone(),
            got: adv.corruption,
            case,
        });
    }
    Ok(())
}

/// One hybrid-world run with explicit tapes and channel draws.
pub fn real_execution(
    proto: &ProtocolSpec,
    adv: &AdversaryStrategy,
    tape_a: Vec<Value>,
    tape_b: Vec<Value>,
    draws: &[Value],
) -> Result<Trace, EngineError> {
    let (a, b) = adv.programs(&proto.alice, &proto.bob);
    run_once(a, b, &proto.channel, &proto.limits, tape_a, tape_b, draws)
}

/// Exact law of the environment's view in the real world.
pub fn real_law(proto: &ProtocolSpec, case: Corruption, adv: &AdversaryStrategy, bound: u64) -> Result<Dist, GameError> {
    check_case(case, adv)?;
    let (a, b) = adv.programs(&proto.alice, &proto.bob);
    let traces = enumerate_traces(a, b, &proto.channel, &proto.limits, bound)?;
    Ok(Dist::from_weighted(
        traces.iter().map(|t| (env_view(case, t, &t.output_a, &t.output_b), t.weight.clone())),
    )?)
}

fn alice_pair(out: &Value) -> Option<(u8, u8)> {
    Some((out.get(0)?.as_bit()?, out.get(1)?.as_bit()?))
}

fn delivered_pair(b0: u8, b1: u8, c: u8) -> (Value, Value) {
    let bc = if c == 0 { b0 } else { b1 };
    (Value::bits(&[b0, b1]), Value::bits(&[c, bc]))
}

/// Simulator-side state for a corrupted Bob with one fixed tape: all
/// completions, grouped by (Bob's events before the committing event,
/// committed bit). Runs that never commit form singleton groups keyed by
/// their full event stream.
#[derive(Debug)]
struct BobTapeModel {
    traces: Vec<Trace>,
    pair: Vec<Option<(u8, u8)>>,
    clean: Vec<bool>,
    weight_f: Vec<f64>,
    groups: Vec<Group>,
    group_of: HashMap<Vec<Event>, usize>,
}

#[derive(Debug, Default)]
struct Group {
    c: Option<u8>,
    abort: Vec<usize>,
    live: Vec<usize>,
}

impl BobTapeModel {
    fn build(ex: ChoiceExtractor) -> Self {
        let n = ex.traces.len();
        let mut groups: Vec<Group> = Vec::new();
        let mut by_key: HashMap<(Vec<Event>, Option<u8>), usize> = HashMap::new();
        let mut group_of = HashMap::new();
        let mut clean = Vec::with_capacity(n);
        for idx in 0..n {
            let t = &ex.traces[idx];
            let tc = ex.trace_choice(idx);
            clean.push(tc.clean_bit().is_some());
            let key = match tc.outcome {
                crate::extract::ChoiceOutcome::Committed { index, c } => (t.events_b[..index].to_vec(), Some(c)),
                _ => (t.events_b.clone(), None),
            };
            let g = *by_key.entry(key.clone()).or_insert_with(|| {
                groups.push(Group {
                    c: key.1,
                    ..Group::default()
                });
                groups.len() - 1
            });
            if t.output_a.is_bot() {
                groups[g].abort.push(idx);
            } else {
                groups[g].live.push(idx);
            }
            group_of.insert(t.events_b.clone(), g);
        }
        let pair = ex.traces.iter().map(|t| alice_pair(&t.output_a)).collect();
        let weight_f = ex.traces.iter().map(|t| to_f64(&t.weight)).collect();
        BobTapeModel {
            traces: ex.traces,
            pair,
            clean,
            weight_f,
            groups,
            group_of,
        }
    }

    fn sum(&self, idx: &[usize]) -> Prob {
        idx.iter().map(|&i| self.traces[i].weight.clone()).sum()
    }

    /// Live members of `g` whose Alice output has `b_c = bc`.
    fn matching(&self, g: &Group, c: u8, bc: u8) -> Vec<usize> {
        g.live
            .iter()
            .copied()
            .filter(|&i| self.pair[i].is_some_and(|(t0, t1)| if c == 0 { t0 } else { t1 } == bc))
            .collect()
    }
}

/// Sender extractor for one corrupted-Alice tape with its traces.
type SenderModel = (SenderExtractor, Vec<Trace>);

/// Ideal-world simulator for a fixed adversary.
/// Per-tape extractor tables are built lazily and cached.
pub struct Simulator<'p> {
    proto: &'p ProtocolSpec,
    adv: &'p AdversaryStrategy,
    case: Corruption,
    threshold: Prob,
    bound: u64,
    sender: Mutex<HashMap<Vec<Value>, Arc<SenderModel>>>,
    bob: Mutex<HashMap<Vec<Value>, Arc<BobTapeModel>>>,
}

/// One ideal-world run as produced by [`Simulator::simulate`].
#[derive(Debug, Clone)]
pub struct IdealRun {
    pub env_view: Value,
    pub rot: RotIdealState,
    pub rot_events: Vec<RotEvent>,
    /// The run used a fallback (extraction or steering failed).
    pub failure: bool,
}

/// Exact law of the ideal world plus the mass of failure-tagged runs.
#[derive(Debug, Clone)]
pub struct IdealLaw {
    pub law: Dist,
    pub failure: Prob,
}

impl<'p> Simulator<'p> {
    pub fn new(
        proto: &'p ProtocolSpec,
        case: Corruption,
        adv: &'p AdversaryStrategy,
        threshold: Prob,
        bound: u64,
    ) -> Result<Self, GameError> {
        check_case(case, adv)?;
        Ok(Simulator {
            proto,
            adv,
            case,
            threshold,
            bound,
            sender: Mutex::new(HashMap::new()),
            bob: Mutex::new(HashMap::new()),
        })
    }

    fn programs(&self) -> (&crate::engine::PartyProgram, &crate::engine::PartyProgram) {
        self.adv.programs(&self.proto.alice, &self.proto.bob)
    }

    /// Sender extractor and simulated traces for a corrupted Alice tape.
    fn sender_model(&self, tape_a: &[Value]) -> Result<Arc<SenderModel>, GameError> {
        if let Some(m) = self.sender.lock().unwrap().get(tape_a) {
            return Ok(m.clone());
        }
        let (a, b) = self.programs();
        let traces = enumerate_conditioned(a, b, &self.proto.channel, &self.proto.limits, Some(tape_a), None, self.bound)?;
        let ex = SenderExtractor::from_traces(self.proto, &traces, &self.threshold);
        let m = Arc::new((ex, traces));
        self.sender.lock().unwrap().insert(tape_a.to_vec(), m.clone());
        Ok(m)
    }

    fn bob_model(&self, tape_b: &[Value]) -> Result<Arc<BobTapeModel>, GameError> {
        if let Some(m) = self.bob.lock().unwrap().get(tape_b) {
            return Ok(m.clone());
        }
        let (_, b) = self.programs();
        let ex = ChoiceExtractor::build(self.proto, b, tape_b, &self.threshold, self.bound)?;
        let m = Arc::new(BobTapeModel::build(ex));
        self.bob.lock().unwrap().insert(tape_b.to_vec(), m.clone());
        Ok(m)
    }

    /// Exact ideal-world law of the environment's view.
    pub fn ideal_law(&self) -> Result<IdealLaw, GameError> {
        let mut atoms: Vec<(Value, Prob)> = Vec::new();
        let mut failure = Prob::zero();
        let (a, b) = self.programs();
        let (chan, limits) = (&self.proto.channel, &self.proto.limits);
        let quarter = ratio(1, 4);
        let half = ratio(1, 2);
        match self.case {
            Corruption::Both => {
                // a verbatim re-execution with the simulated primitive
                for t in enumerate_traces(a, b, chan, limits, self.bound)? {
                    atoms.push((env_view(self.case, &t, &t.output_a, &t.output_b), t.weight));
                }
            }
            Corruption::None => {
                for t in enumerate_traces(a, b, chan, limits, self.bound)? {
                    if t.output_b.is_bot() {
                        atoms.push((env_view(self.case, &t, &Value::Bot, &Value::Bot), t.weight));
                        continue;
                    }
                    for i in 0..8u8 {
                        let (oa, ob) = delivered_pair(i >> 2 & 1, i >> 1 & 1, i & 1);
                        atoms.push((env_view(self.case, &t, &oa, &ob), &t.weight / ratio(8, 1)));
                    }
                }
            }
            Corruption::Alice => {
                let scale = Prob::from_integer(a.tape.count().into());
                for tape_a in a.tape.all() {
                    let model = self.sender_model(&tape_a)?;
                    let (ex, traces) = (&model.0, &model.1);
                    for t in traces {
                        let w = &t.weight / &scale;
                        if t.output_b.is_bot() {
                            atoms.push((env_view(self.case, t, &t.output_a, &Value::Bot), w));
                            continue;
                        }
                        let got = ex.extract(&MessageSet::of(t, Role::Alice))?;
                        for c in 0..2u8 {
                            let wc = &w * &half;
                            match (got.success, got.b_hat[c as usize]) {
                                (true, Some(bc)) => {
                                    atoms.push((env_view(self.case, t, &t.output_a, &Value::bits(&[c, bc])), wc));
                                }
                                _ => {
                                    failure += &wc;
                                    for bc in 0..2u8 {
                                        let ob = Value::bits(&[c, bc]);
                                        atoms.push((env_view(self.case, t, &t.output_a, &ob), &wc * &half));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Corruption::Bob => {
                let scale = Prob::from_integer(b.tape.count().into());
                for tape_b in b.tape.all() {
                    let m = self.bob_model(&tape_b)?;
                    for g in &m.groups {
                        for &i in &g.abort {
                            let t = &m.traces[i];
                            atoms.push((env_view(self.case, t, &Value::Bot, &t.output_b), &t.weight / &scale));
                        }
                        if g.live.is_empty() {
                            continue;
                        }
                        let live = m.sum(&g.live) / &scale;
                        let guesses: Vec<(u8, Prob)> = match g.c {
                            Some(c) => vec![(c, live.clone())],
                            None => vec![(0, &live * &half), (1, &live * &half)],
                        };
                        for (c, wc) in guesses {
                            for i in 0..4u8 {
                                let (b0, b1) = (i >> 1, i & 1);
                                let bc = if c == 0 { b0 } else { b1 };
                                let wi = &wc * &quarter;
                                let oa = Value::bits(&[b0, b1]);
                                let hit = m.matching(g, c, bc);
                                let (pool, steered) = if hit.is_empty() { (&g.live, false) } else { (&hit, true) };
                                let total = m.sum(pool);
                                for &j in pool.iter() {
                                    let t = &m.traces[j];
                                    let wj = &wi * &t.weight / &total;
                                    if !(steered && g.c.is_some() && m.clean[j]) {
                                        failure += &wj;
                                    }
                                    atoms.push((env_view(self.case, t, &oa, &t.output_b), wj));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(IdealLaw {
            law: Dist::from_weighted(atoms)?,
            failure,
        })
    }

    /// One ideal-world run driven by `ch` (used in sampling mode).
    pub fn simulate(&self, ch: &mut SampleChooser) -> Result<IdealRun, GameError> {
        let (a, b) = self.programs();
        let (chan, limits) = (&self.proto.channel, &self.proto.limits);
        let mut rot = RotIdealState::new(0, self.case.corrupts(Role::Alice), self.case.corrupts(Role::Bob));
        let mut rot_events = Vec::new();
        let mut step = |rot: &mut RotIdealState, msg: RotMessage, ch: &mut dyn Chooser| {
            let (next, ev) = rot_step(rot, &msg, ch);
            *rot = next;
            rot_events.extend(ev.iter().cloned());
            ev
        };
        let deliver = |ev: &[RotEvent]| -> Option<(Value, Value)> {
            let mut oa = None;
            let mut ob = None;
            for e in ev {
                match e {
                    RotEvent::DeliverAlice { b0, b1 } => oa = Some(Value::bits(&[*b0, *b1])),
                    RotEvent::DeliverBob { c, bc } => ob = Some(Value::bits(&[*c, *bc])),
                    RotEvent::OutputRequest => {}
                }
            }
            Some((oa?, ob?))
        };
        let mut failure = false;
        let env = match self.case {
            Corruption::Both => {
                let t = sample_trace(a, b, chan, limits, ch)?;
                env_view(self.case, &t, &t.output_a, &t.output_b)
            }
            Corruption::None => {
                let t = sample_trace(a, b, chan, limits, ch)?;
                step(&mut rot, RotMessage::DistributeAlice { specified: None }, ch);
                step(&mut rot, RotMessage::DistributeBob { specified: None }, ch);
                if t.output_b.is_bot() {
                    env_view(self.case, &t, &Value::Bot, &Value::Bot)
                } else {
                    let ev = step(&mut rot, RotMessage::OutputFromSimulator, ch);
                    let (oa, ob) = deliver(&ev).expect("both records present");
                    env_view(self.case, &t, &oa, &ob)
                }
            }
            Corruption::Alice => {
                let t = sample_trace(a, b, chan, limits, ch)?;
                if t.output_b.is_bot() {
                    // nothing is delivered, so no extraction is needed
                    env_view(self.case, &t, &t.output_a, &Value::Bot)
                } else {
                    let model = self.sender_model(&t.tape_a)?;
                    let got = model.0.extract(&MessageSet::of(&t, Role::Alice))?;
                    let bits = match (got.success, got.b_hat) {
                        (true, [Some(b0), Some(b1)]) => (b0, b1),
                        _ => {
                            failure = true;
                            (choose_uniform(ch, 2) as u8, choose_uniform(ch, 2) as u8)
                        }
                    };
                    step(&mut rot, RotMessage::DistributeAlice { specified: Some(bits) }, ch);
                    step(&mut rot, RotMessage::DistributeBob { specified: None }, ch);
                    let ev = step(&mut rot, RotMessage::OutputFromSimulator, ch);
                    let (_, ob) = deliver(&ev).expect("both records present");
                    env_view(self.case, &t, &t.output_a, &ob)
                }
            }
            Corruption::Bob => {
                let t = sample_trace(a, b, chan, limits, ch)?;
                let m = self.bob_model(&t.tape_b)?;
                let g = &m.groups[m.group_of[&t.events_b]];
                let wf = |idx: &[usize]| idx.iter().map(|&i| m.weight_f[i]).collect::<Vec<f64>>();
                let w_abort: f64 = wf(&g.abort).iter().sum();
                let w_live: f64 = wf(&g.live).iter().sum();
                if ch.choose_f64(&[w_abort, w_live]) == 0 {
                    let pick = g.abort[ch.choose_f64(&wf(&g.abort))];
                    let t2 = &m.traces[pick];
                    env_view(self.case, t2, &Value::Bot, &t2.output_b)
                } else {
                    let c = match g.c {
                        Some(c) => c,
                        None => {
                            failure = true;
                            choose_uniform(ch, 2) as u8
                        }
                    };
                    step(&mut rot, RotMessage::DistributeBob { specified: Some(c) }, ch);
                    step(&mut rot, RotMessage::DistributeAlice { specified: None }, ch);
                    let ev = step(&mut rot, RotMessage::OutputFromSimulator, ch);
                    let (oa, ob) = deliver(&ev).expect("both records present");
                    let bc = ob.get(1).unwrap().as_bit().unwrap();
                    let hit = m.matching(g, c, bc);
                    let pool = if hit.is_empty() {
                        failure = true;
                        &g.live
                    } else {
                        &hit
                    };
                    let pick = pool[ch.choose_f64(&wf(pool))];
                    failure |= !m.clean[pick];
                    let t2 = &m.traces[pick];
                    env_view(self.case, t2, &oa, &t2.output_b)
                }
            }
        };
        Ok(IdealRun {
            env_view: env,
            rot,
            rot_events,
            failure,
        })
    }
}

/// A deterministic distinguisher: maps the environment's view to a guess
/// bit (`true` means "real").
#[derive(Clone)]
pub struct Environment {
    pub name: String,
    guess: Arc<dyn Fn(&Value) -> bool + Send + Sync>,
}

impl std::fmt::Debug for Environment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Environment").field("name", &self.name).finish()
    }
}

impl Environment {
    pub fn new(name: impl Into<String>, guess: impl Fn(&Value) -> bool + Send + Sync + 'static) -> Self {
        Environment {
            name: name.into(),
            guess: Arc::new(guess),
        }
    }

    pub fn guess(&self, view: &Value) -> bool {
        (self.guess)(view)
    }

    /// Exact advantage `|Pr_real[1] - Pr_ideal[1]|`.
    pub fn exact_advantage(&self, real: &Dist, ideal: &Dist) -> Prob {
        let g = |d: &Dist| d.prob(|v| self.guess(v));
        let diff = g(real) - g(ideal);
        if diff < Prob::zero() {
            -diff
        } else {
            diff
        }
    }
}

/// Adversary output and the honest outputs visible in an environment view.
/// Honest outputs are `(out_A, out_B)` with `None` for corrupted sides.
fn view_parts(case: Corruption, v: &Value) -> (Value, Option<Value>, Option<Value>) {
    let at = |i: usize| v.get(i).cloned().unwrap_or(Value::Bot);
    match case {
        Corruption::None => (Value::Bot, Some(at(2)), Some(at(3))),
        Corruption::Alice => (at(1), None, Some(at(2))),
        Corruption::Bob => (at(1), Some(at(2)), None),
        Corruption::Both => (Value::tuple([at(2), at(3)]), None, None),
    }
}

fn bit_at(v: &Value, i: usize) -> Option<u8> {
    v.get(i)?.as_bit()
}

/// Guesses "real" when the ROT relation `b_c = bc` fails between the
/// (claimed or honest) outputs.
fn correlation_guess(case: Corruption, v: &Value) -> bool {
    let (adv, oa, ob) = view_parts(case, v);
    let (pa, pb) = match case {
        Corruption::None => (oa.unwrap(), ob.unwrap()),
        Corruption::Alice => (adv, ob.unwrap()),
        Corruption::Bob => (oa.unwrap(), adv),
        Corruption::Both => (adv.get(0).cloned().unwrap(), adv.get(1).cloned().unwrap()),
    };
    match (bit_at(&pa, 0), bit_at(&pa, 1), bit_at(&pb, 0), bit_at(&pb, 1)) {
        (Some(b0), Some(b1), Some(c), Some(bc)) => (if c == 0 { b0 } else { b1 }) != bc,
        _ => false,
    }
}

/// Guesses "real" when the adversary output (a bare bit, or the third
/// component of a tuple) predicts the honest party's hidden value: Bob's
/// choice, or Alice's other bit.
fn leak_guess(case: Corruption, v: &Value) -> bool {
    let (adv, oa, ob) = view_parts(case, v);
    match case {
        Corruption::Alice => {
            let Some(x) = adv.as_bit().or_else(|| bit_at(&adv, 2)) else { return false };
            ob.and_then(|o| bit_at(&o, 0)) == Some(x)
        }
        Corruption::Bob => match (oa, bit_at(&adv, 0), bit_at(&adv, 2)) {
            (Some(o), Some(c), Some(x)) => bit_at(&o, (1 - c) as usize) == Some(x),
            _ => false,
        },
        _ => false,
    }
}

fn abort_guess(case: Corruption, v: &Value) -> bool {
    let (_, oa, ob) = view_parts(case, v);
    oa.is_some_and(|o| o.is_bot()) || ob.is_some_and(|o| o.is_bot())
}

/// The fixed environment family. `bayes` is the likelihood-ratio test and
/// needs both exact laws; it attains the exact advantage.
pub fn environment_family(case: Corruption, laws: Option<(&Dist, &Dist)>) -> Vec<Environment> {
    let mut out = vec![
        Environment::new("abort", move |v| abort_guess(case, v)),
        Environment::new("correlation", move |v| correlation_guess(case, v)),
        Environment::new("leak", move |v| leak_guess(case, v)),
    ];
    if let Some((real, ideal)) = laws {
        let better: std::collections::HashSet<Value> =
            real.iter().filter(|(v, p)| **p > ideal.weight(v)).map(|(v, _)| v.clone()).collect();
        out.push(Environment::new("bayes", move |v| better.contains(v)));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameMode {
    Exact,
    Sampling { seed: u64, samples: u64 },
}

/// Seed offset separating the ideal-world stream from the real-world one.
pub const IDEAL_SEED_XOR: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Serialize)]
pub struct EnvEstimate {
    pub name: String,
    #[serde(serialize_with = "ser_prob")]
    pub estimate: Prob,
    /// 3σ radius (sampling mode only).
    pub radius: Option<String>,
    /// Exact advantage of this environment, when both laws are known.
    #[serde(serialize_with = "crate::report::ser_prob_opt")]
    pub exact: Option<Prob>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GameResult {
    pub protocol: String,
    pub case: String,
    pub adversary: String,
    pub mode: String,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    /// Exact mode: δ of the two view laws. Sampling mode: the best
    /// empirical advantage over the family.
    #[serde(serialize_with = "ser_prob")]
    pub advantage: Prob,
    pub radius: Option<String>,
    /// Mass (exact) or frequency (sampling) of failure-tagged ideal runs.
    #[serde(serialize_with = "ser_prob")]
    pub failure: Prob,
    /// Best environment of the family.
    pub witness: Option<String>,
    /// Exact mode: the view with the largest probability gap.
    pub witness_view: Option<String>,
    pub environments: Vec<EnvEstimate>,
    pub note: String,
}

const VIEW_NOTE: &str = "random OT has no inputs: the environment controls only corruption and activation, \
     and sees corrupted views, adversary output, honest outputs and channel timing";

fn radius(k_real: u64, k_ideal: u64, n: u64) -> String {
    let p = |k: u64| (k as f64 + 1.0) / (n as f64 + 2.0);
    let var = |k: u64| p(k) * (1.0 - p(k)) / n as f64;
    format!("{:.6}", 3.0 * (var(k_real) + var(k_ideal)).sqrt())
}

/// Distinguishing game against a fixed adversary.
pub fn distinguishing_advantage(
    proto: &ProtocolSpec,
    case: Corruption,
    adv: &AdversaryStrategy,
    mode: GameMode,
    threshold: &Prob,
    bound: u64,
) -> Result<GameResult, GameError> {
    let sim = Simulator::new(proto, case, adv, threshold.clone(), bound)?;
    let exact_laws = || -> Result<(Dist, IdealLaw), GameError> { Ok((real_law(proto, case, adv, bound)?, sim.ideal_law()?)) };
    let mut result = GameResult {
        protocol: proto.label(),
        case: case.to_string(),
        adversary: adv.name.clone(),
        mode: String::new(),
        seed: None,
        samples: None,
        advantage: Prob::zero(),
        radius: None,
        failure: Prob::zero(),
        witness: None,
        witness_view: None,
        environments: Vec::new(),
        note: VIEW_NOTE.into(),
    };
    match mode {
        GameMode::Exact => {
            let (real, ideal) = exact_laws()?;
            result.mode = "exact".into();
            result.advantage = statistical_distance(&real, &ideal.law);
            result.failure = ideal.failure;
            result.witness_view = gap_view(&real, &ideal.law);
            for env in environment_family(case, Some((&real, &ideal.law))) {
                let e = env.exact_advantage(&real, &ideal.law);
                result.environments.push(EnvEstimate {
                    name: env.name.clone(),
                    estimate: e.clone(),
                    radius: None,
                    exact: Some(e),
                });
            }
        }
        GameMode::Sampling { seed, samples } => {
            if samples == 0 {
                return Err(GameError::NoSamples);
            }
            result.mode = "sampling".into();
            result.seed = Some(seed);
            result.samples = Some(samples);
            // exact laws only feed the reference column and the bayes test
            let laws = match exact_laws() {
                Ok(l) => Some(l),
                Err(GameError::TooLarge(_)) => None,
                Err(e) => return Err(e),
            };
            let envs = environment_family(case, laws.as_ref().map(|(r, i)| (r, &i.law)));
            let (a, b) = adv.programs(&proto.alice, &proto.bob);
            let mut real_ch = SampleChooser::new(seed);
            let mut ideal_ch = SampleChooser::new(seed ^ IDEAL_SEED_XOR);
            let mut k_real = vec![0u64; envs.len()];
            let mut k_ideal = vec![0u64; envs.len()];
            let mut failures = 0u64;
            for _ in 0..samples {
                let t = sample_trace(a, b, &proto.channel, &proto.limits, &mut real_ch)?;
                let rv = env_view(case, &t, &t.output_a, &t.output_b);
                let run = sim.simulate(&mut ideal_ch)?;
                failures += run.failure as u64;
                for (i, env) in envs.iter().enumerate() {
                    k_real[i] += env.guess(&rv) as u64;
                    k_ideal[i] += env.guess(&run.env_view) as u64;
                }
            }
            let n = samples as i64;
            result.failure = ratio(failures as i64, n);
            for (i, env) in envs.iter().enumerate() {
                let est = ratio((k_real[i] as i64 - k_ideal[i] as i64).abs(), n);
                result.environments.push(EnvEstimate {
                    name: env.name.clone(),
                    estimate: est,
                    radius: Some(radius(k_real[i], k_ideal[i], samples)),
                    exact: laws.as_ref().map(|(r, l)| env.exact_advantage(r, &l.law)),
                });
            }
        }
    }
    if let Some(best) = result
        .environments
        .iter()
        .max_by(|x, y| x.estimate.cmp(&y.estimate).then_with(|| y.name.cmp(&x.name)))
    {
        if matches!(mode, GameMode::Sampling { .. }) {
            result.advantage = best.estimate.clone();
            result.radius = best.radius.clone();
        }
        if best.estimate > Prob::zero() {
            result.witness = Some(best.name.clone());
        }
    }
    Ok(result)
}

fn gap_view(real: &Dist, ideal: &Dist) -> Option<String> {
    let mut gaps: BTreeMap<&Value, Prob> = BTreeMap::new();
    for (v, p) in real.iter() {
        *gaps.entry(v).or_insert_with(Prob::zero) += p;
    }
    for (v, p) in ideal.iter() {
        *gaps.entry(v).or_insert_with(Prob::zero) -= p;
    }
    let abs = |p: &Prob| if *p < Prob::zero() { -p.clone() } else { p.clone() };
    gaps.into_iter()
        .filter(|(_, g)| !g.is_zero())
        .max_by(|x, y| abs(&x.1).cmp(&abs(&y.1)).then_with(|| y.0.cmp(x.0)))
        .map(|(v, g)| format!("{v} ({})", fmt_prob(&g)))
}

/// Games for every adversary in a family, run in parallel.
pub fn game_sweep(
    proto: &ProtocolSpec,
    case: Corruption,
    adversaries: &[AdversaryStrategy],
    mode: GameMode,
    threshold: &Prob,
    bound: u64,
) -> Result<Vec<GameResult>, GameError> {
    use rayon::prelude::*;
    adversaries
        .par_iter()
        .map(|adv| distinguishing_advantage(proto, case, adv, mode, threshold, bound))
        .collect()
}
