//! Number formatting and table output.

use std::fmt::Write as _;

/// Shortest decimal that parses back to the same `f64`, switching to exponent form for very
/// small or very large magnitudes.
pub fn float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn opt_int(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Comma-separated table with a header line.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            let _ = write!(self.buf, "{}", f.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
