//! The three functionalities: the stateless two-party primitive given by a
//! conditional distribution table, the authenticated channel, and the ideal
//! random OT functionality.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::prob::{fmt_prob, parse_prob, ratio, Dist, Prob, ProbError};
use crate::sampling::{choose_uniform, Chooser};
use crate::value::{split_top_level, Value};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("channel table has no entry for input (x={x}, y={y})")]
    MissingEntry { x: String, y: String },
    #[error("row (x={x}, y={y}) is not a distribution: {source}")]
    BadRow { x: String, y: String, source: ProbError },
    #[error("symbol {symbol} is not in the declared {alphabet} alphabet")]
    UnknownSymbol { symbol: String, alphabet: &'static str },
    #[error("erasure probability {0} outside [0,1]")]
    ErasureProbability(String),
    #[error("malformed channel document: {0}")]
    Json(String),
}

/// A stateless primitive `P_{V,W|X,Y}`: Alice inputs `x`, Bob inputs `y`,
/// Alice receives `v` and Bob receives `w`. Row distributions are over pairs
/// `(v, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub name: String,
    pub x_alphabet: Vec<Value>,
    pub y_alphabet: Vec<Value>,
    pub v_alphabet: Vec<Value>,
    pub w_alphabet: Vec<Value>,
    table: BTreeMap<(Value, Value), Dist>,
}

/// Raw rows as handed to [`make_table_channel`]: for each `(x, y)` a list of
/// `((v, w), weight)`.
pub type RawTable = BTreeMap<(Value, Value), Vec<((Value, Value), Prob)>>;

/// Validates a table into a [`ChannelSpec`].
pub fn make_table_channel(
    name: impl Into<String>,
    x_alphabet: Vec<Value>,
    y_alphabet: Vec<Value>,
    v_alphabet: Vec<Value>,
    w_alphabet: Vec<Value>,
    raw: RawTable,
) -> Result<ChannelSpec, ChannelError> {
    let check = |s: &Value, alpha: &[Value], which: &'static str| {
        if alpha.contains(s) {
            Ok(())
        } else {
            Err(ChannelError::UnknownSymbol {
                symbol: s.to_string(),
                alphabet: which,
            })
        }
    };
    let mut table = BTreeMap::new();
    for ((x, y), row) in raw {
        check(&x, &x_alphabet, "x")?;
        check(&y, &y_alphabet, "y")?;
        for ((v, w), _) in &row {
            check(v, &v_alphabet, "v")?;
            check(w, &w_alphabet, "w")?;
        }
        let dist = Dist::new(row.into_iter().map(|((v, w), p)| (Value::pair(v, w), p))).map_err(|source| {
            ChannelError::BadRow {
                x: x.to_string(),
                y: y.to_string(),
                source,
            }
        })?;
        table.insert((x, y), dist);
    }
    for x in &x_alphabet {
        for y in &y_alphabet {
            if !table.contains_key(&(x.clone(), y.clone())) {
                return Err(ChannelError::MissingEntry {
                    x: x.to_string(),
                    y: y.to_string(),
                });
            }
        }
    }
    Ok(ChannelSpec {
        name: name.into(),
        x_alphabet,
        y_alphabet,
        v_alphabet,
        w_alphabet,
        table,
    })
}

/// Binary erasure channel from Alice to Bob: `w = x` with probability `1-p`,
/// `w = ⊥` with probability `p`.
pub fn make_erasure_channel(p: Prob) -> Result<ChannelSpec, ChannelError> {
    if p < ratio(0, 1) || p > ratio(1, 1) {
        return Err(ChannelError::ErasureProbability(fmt_prob(&p)));
    }
    let bits = vec![Value::bit(0), Value::bit(1)];
    let mut raw = RawTable::new();
    for x in &bits {
        raw.insert(
            (x.clone(), Value::Unit),
            vec![
                ((Value::Unit, x.clone()), ratio(1, 1) - &p),
                ((Value::Unit, Value::Bot), p.clone()),
            ],
        );
    }
    make_table_channel(
        format!("erasure({})", fmt_prob(&p)),
        bits.clone(),
        vec![Value::Unit],
        vec![Value::Unit],
        vec![Value::bit(0), Value::bit(1), Value::Bot],
        raw,
    )
}

/// Pre-distributed random OT correlation: Alice gets `(b0, b1)`, Bob gets
/// `(c, b_c)`, with `b0, b1, c` independent uniform bits.
pub fn make_rot_correlation() -> ChannelSpec {
    let pairs: Vec<Value> = (0..4u8).map(|i| Value::bits(&[i >> 1, i & 1])).collect();
    let mut row = Vec::new();
    for b0 in 0..2u8 {
        for b1 in 0..2u8 {
            for c in 0..2u8 {
                let bc = if c == 0 { b0 } else { b1 };
                row.push(((Value::bits(&[b0, b1]), Value::bits(&[c, bc])), ratio(1, 8)));
            }
        }
    }
    let (v_alpha, w_alpha) = (pairs.clone(), pairs);
    let raw = RawTable::from([((Value::Unit, Value::Unit), row)]);
    make_table_channel("rot_correlation", vec![Value::Unit], vec![Value::Unit], v_alpha, w_alpha, raw)
        .expect("ROT correlation table is well formed")
}

impl ChannelSpec {
    /// The output law for inputs `(x, y)`.
    pub fn row(&self, x: &Value, y: &Value) -> Result<&Dist, ChannelError> {
        if !self.x_alphabet.contains(x) {
            return Err(ChannelError::UnknownSymbol {
                symbol: x.to_string(),
                alphabet: "x",
            });
        }
        if !self.y_alphabet.contains(y) {
            return Err(ChannelError::UnknownSymbol {
                symbol: y.to_string(),
                alphabet: "y",
            });
        }
        Ok(&self.table[&(x.clone(), y.clone())])
    }

    /// Largest row support, used to bound enumeration sizes.
    pub fn max_branching(&self) -> usize {
        self.table.values().map(Dist::len).max().unwrap_or(1)
    }

    /// Loads the JSON channel document:
    /// `{"x_alphabet": [...], "y_alphabet": [...], "v_alphabet": [...],
    /// "w_alphabet": [...], "table": {"x,y": {"v,w": "num/den"}}}`.
    pub fn from_json(text: &str) -> Result<ChannelSpec, ChannelError> {
        #[derive(serde::Deserialize)]
        struct Doc {
            #[serde(default)]
            name: Option<String>,
            x_alphabet: Vec<String>,
            y_alphabet: Vec<String>,
            v_alphabet: Vec<String>,
            w_alphabet: Vec<String>,
            table: BTreeMap<String, BTreeMap<String, String>>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| ChannelError::Json(e.to_string()))?;
        let parse_all = |v: &[String]| v.iter().map(|s| Value::parse(s)).collect::<Vec<_>>();
        let split_pair = |key: &str| -> Result<(Value, Value), ChannelError> {
            match split_top_level(key).as_deref() {
                Some([a, b]) => Ok((Value::parse(a), Value::parse(b))),
                _ => Err(ChannelError::Json(format!("key `{key}` is not a pair \"a,b\""))),
            }
        };
        let mut raw = RawTable::new();
        for (xy, row) in &doc.table {
            let mut entries = Vec::new();
            for (vw, p) in row {
                let p = parse_prob(p).map_err(|e| ChannelError::Json(e.to_string()))?;
                entries.push((split_pair(vw)?, p));
            }
            raw.insert(split_pair(xy)?, entries);
        }
        make_table_channel(
            doc.name.unwrap_or_else(|| "table".into()),
            parse_all(&doc.x_alphabet),
            parse_all(&doc.y_alphabet),
            parse_all(&doc.v_alphabet),
            parse_all(&doc.w_alphabet),
            raw,
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let strs = |v: &[Value]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let mut table = serde_json::Map::new();
        for ((x, y), dist) in &self.table {
            let mut row = serde_json::Map::new();
            for (vw, p) in dist.iter() {
                let (v, w) = (vw.get(0).unwrap(), vw.get(1).unwrap());
                row.insert(format!("{v},{w}"), fmt_prob(p).into());
            }
            table.insert(format!("{x},{y}"), row.into());
        }
        serde_json::json!({
            "name": self.name,
            "x_alphabet": strs(&self.x_alphabet),
            "y_alphabet": strs(&self.y_alphabet),
            "v_alphabet": strs(&self.v_alphabet),
            "w_alphabet": strs(&self.w_alphabet),
            "table": table,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Alice => Role::Bob,
            Role::Bob => Role::Alice,
        }
    }
}

/// One message over the authenticated channel. The payload is delivered
/// unmodified; `round` is the scheduler step at which it was sent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AuthMessage {
    pub sender: Role,
    pub payload: Value,
    pub round: usize,
}

/// Messages accepted by the ideal random OT functionality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RotMessage {
    /// Alice's check-in. `specified` carries the bits a corrupted Alice asks for.
    DistributeAlice { specified: Option<(u8, u8)> },
    /// Bob's check-in. `specified` carries a corrupted Bob's choice bit.
    DistributeBob { specified: Option<u8> },
    /// The simulator's answer to the output request.
    OutputFromSimulator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RotEvent {
    /// `(Output, sid)` sent to the simulator once both records exist.
    OutputRequest,
    DeliverAlice { b0: u8, b1: u8 },
    DeliverBob { c: u8, bc: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotIdealState {
    pub sid: u64,
    pub alice_corrupted: bool,
    pub bob_corrupted: bool,
    pub recorded_bits: Option<(u8, u8)>,
    pub recorded_choice: Option<u8>,
    pub requested: bool,
    pub delivered: bool,
}

impl RotIdealState {
    pub fn new(sid: u64, alice_corrupted: bool, bob_corrupted: bool) -> Self {
        RotIdealState {
            sid,
            alice_corrupted,
            bob_corrupted,
            recorded_bits: None,
            recorded_choice: None,
            requested: false,
            delivered: false,
        }
    }

    /// True when both records exist but the simulator never released output.
    pub fn undelivered(&self) -> bool {
        self.recorded_bits.is_some() && self.recorded_choice.is_some() && !self.delivered
    }
}

/// One transition of the ideal random OT functionality.
///
/// Honest check-ins draw fresh uniform values from `ch`; corrupted check-ins
/// record the specified values verbatim (a corrupted check-in without
/// specified values falls back to sampling). Repeated check-ins are ignored,
/// and output is delivered once, only after both records and the simulator's
/// answer.
pub fn rot_step(
    state: &RotIdealState,
    msg: &RotMessage,
    ch: &mut dyn Chooser,
) -> (RotIdealState, Vec<RotEvent>) {
    let mut next = state.clone();
    let mut events = Vec::new();
    match msg {
        RotMessage::DistributeAlice { specified } => {
            if next.recorded_bits.is_none() {
                let bits = match (next.alice_corrupted, specified) {
                    (true, Some(bits)) => *bits,
                    _ => (choose_uniform(ch, 2) as u8, choose_uniform(ch, 2) as u8),
                };
                next.recorded_bits = Some(bits);
            }
        }
        RotMessage::DistributeBob { specified } => {
            if next.recorded_choice.is_none() {
                let c = match (next.bob_corrupted, specified) {
                    (true, Some(c)) => *c,
                    _ => choose_uniform(ch, 2) as u8,
                };
                next.recorded_choice = Some(c);
            }
        }
        RotMessage::OutputFromSimulator => {
            if let (Some((b0, b1)), Some(c), true, false) =
                (next.recorded_bits, next.recorded_choice, next.requested, next.delivered)
            {
                let bc = if c == 0 { b0 } else { b1 };
                next.delivered = true;
                events.push(RotEvent::DeliverAlice { b0, b1 });
                events.push(RotEvent::DeliverBob { c, bc });
            }
        }
    }
    if !next.requested && next.recorded_bits.is_some() && next.recorded_choice.is_some() {
        next.requested = true;
        events.push(RotEvent::OutputRequest);
    }
    (next, events)
}

/// Every distinct symbol that appears in some row's support, per side.
pub fn reachable_outputs(chan: &ChannelSpec) -> (BTreeSet<Value>, BTreeSet<Value>) {
    let mut vs = BTreeSet::new();
    let mut ws = BTreeSet::new();
    for dist in chan.table.values() {
        for vw in dist.support() {
            vs.insert(vw.get(0).unwrap().clone());
            ws.insert(vw.get(1).unwrap().clone());
        }
    }
    (vs, ws)
}
