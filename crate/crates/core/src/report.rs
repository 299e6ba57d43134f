//! Deterministic plain-text formatting shared by CLI reports and file
//! exports.
//!
//! Floats are rendered with 15 significant digits in scientific notation so
//! that identical inputs produce byte-identical artifacts across runs.  The
//! JSON builder keeps insertion order and renders through the same float
//! formatter; infinities and NaN (not representable as JSON numbers) are
//! emitted as the quoted strings `"inf"`, `"-inf"`, `"nan"`.

use std::fmt::Write as _;

/// Renders a float with 15 significant digits (`%.14e`-style scientific
/// notation).  Infinite and NaN values render as `inf`, `-inf`, `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.14e}")
    }
}

/// A JSON value rendered eagerly to its textual form.
#[derive(Debug, Clone)]
pub struct JsonValue(String);

impl JsonValue {
    /// Finite floats become 15-significant-digit JSON numbers; non-finite
    /// values become quoted strings.
    pub fn number(x: f64) -> Self {
        if x.is_finite() {
            JsonValue(fmt_f64(x))
        } else {
            Self::string(&fmt_f64(x))
        }
    }

    pub fn integer(n: i64) -> Self {
        JsonValue(n.to_string())
    }

    pub fn boolean(b: bool) -> Self {
        JsonValue(b.to_string())
    }

    pub fn string(s: &str) -> Self {
        let mut out = String::with_capacity(s.len() + 2);
        out.push('"');
        for ch in s.chars() {
            match ch {
                '"' => out.push_str("\\\""),
                '\\' => out.push_str("\\\\"),
                '\n' => out.push_str("\\n"),
                c if (c as u32) < 0x20 => {
                    let _ = write!(out, "\\u{:04x}", c as u32);
                }
                c => out.push(c),
            }
        }
        out.push('"');
        JsonValue(out)
    }

    pub fn array<I: IntoIterator<Item = JsonValue>>(items: I) -> Self {
        let inner: Vec<String> = items.into_iter().map(|v| v.0).collect();
        JsonValue(format!("[{}]", inner.join(",")))
    }

    pub fn object(obj: JsonObject) -> Self {
        JsonValue(obj.render())
    }

    pub fn render(&self) -> &str {
        &self.0
    }
}

/// Insertion-ordered JSON object builder.
#[derive(Debug, Clone, Default)]
pub struct JsonObject {
    fields: Vec<(String, JsonValue)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(mut self, key: &str, value: JsonValue) -> Self {
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .fields
            .iter()
            .map(|(k, v)| format!("{}:{}", JsonValue::string(k).render(), v.0))
            .collect();
        format!("{{{}}}", parts.join(","))
    }
}
