//! Finite symbols: outcome labels, channel alphabets and views are all `Value`s.

use std::fmt;

use serde::{Serialize, Serializer};

/// An opaque finite symbol.
///
/// Everything the lab moves around (channel inputs and outputs, authenticated
/// payloads, party outputs, whole views) is encoded as a `Value`, which keeps
/// distributions over arbitrary protocol data hashable and totally ordered.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    /// The distinguished abort / erasure symbol `⊥`.
    Bot,
    Unit,
    Int(i64),
    Sym(String),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn bit(b: u8) -> Self {
        Value::Int((b & 1) as i64)
    }

    pub fn sym(s: impl Into<String>) -> Self {
        Value::Sym(s.into())
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Tuple(vec![a, b])
    }

    pub fn tuple(items: impl IntoIterator<Item = Value>) -> Self {
        Value::Tuple(items.into_iter().collect())
    }

    pub fn bits(bits: &[u8]) -> Self {
        Value::Tuple(bits.iter().map(|&b| Value::bit(b)).collect())
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Value::Bot)
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// `Some(0)` or `Some(1)` for bit-valued symbols.
    pub fn as_bit(&self) -> Option<u8> {
        match self {
            Value::Int(0) => Some(0),
            Value::Int(1) => Some(1),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(items) => Some(items),
            _ => None,
        }
    }

    /// Component `i` of a tuple.
    pub fn get(&self, i: usize) -> Option<&Value> {
        self.as_tuple().and_then(|t| t.get(i))
    }

    /// Parses the textual form produced by `Display`.
    ///
    /// `⊥`/`bot` is the abort symbol, `()` or the empty string is unit,
    /// integers parse as `Int`, parenthesised comma lists as tuples, and
    /// anything else is kept as a named symbol.
    pub fn parse(text: &str) -> Value {
        let s = text.trim();
        match s {
            "⊥" | "bot" | "_|_" => return Value::Bot,
            "" | "()" => return Value::Unit,
            _ => {}
        }
        if let Ok(i) = s.parse::<i64>() {
            return Value::Int(i);
        }
        if s.starts_with('(') && s.ends_with(')') {
            let inner = &s[1..s.len() - 1];
            if let Some(parts) = split_top_level(inner) {
                return Value::Tuple(parts.iter().map(|p| Value::parse(p)).collect());
            }
        }
        Value::Sym(s.to_string())
    }
}

/// Splits on commas that are not nested inside parentheses.
///
/// Returns `None` when parentheses are unbalanced.
pub fn split_top_level(s: &str) -> Option<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
            }
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    parts.push(&s[start..]);
    Some(parts)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bot => write!(f, "⊥"),
            Value::Unit => write!(f, "()"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Tuple(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl From<u8> for Value {
    fn from(b: u8) -> Self {
        Value::Int(b as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parse_round_trip() {
        let v = Value::tuple([
            Value::Bot,
            Value::Unit,
            Value::Int(3),
            Value::sym("send"),
            Value::bits(&[1, 0]),
        ]);
        assert_eq!(v.to_string(), "(⊥,(),3,send,(1,0))");
        assert_eq!(Value::parse(&v.to_string()), v);
    }

    #[test]
    fn unbalanced_parens_stay_symbols() {
        assert_eq!(Value::parse("(0,1"), Value::sym("(0,1"));
        assert_eq!(split_top_level("a,(b,c),d").unwrap(), vec!["a", "(b,c)", "d"]);
    }
}
