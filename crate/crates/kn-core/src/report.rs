//! Deterministic verification reports.
//!
//! Reports serialize through a canonical JSON writer: object keys keep
//! insertion order, floats print with 17 significant digits, and no
//! whitespace depends on the environment, so identical configurations
//! produce byte-identical files.

use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) {
        if let Json::Obj(entries) = self {
            entries.push((key.to_string(), value));
        } else {
            panic!("push on a non-object");
        }
    }

    pub fn complex(re: f64, im: f64) -> Json {
        Json::Arr(vec![Json::Num(re), Json::Num(im)])
    }

    fn write_into(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Json::Num(v) => {
                if v.is_finite() {
                    let _ = write!(out, "{v:.16e}");
                } else {
                    out.push_str("null");
                }
            }
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
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
            }
            Json::Arr(items) => {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    item.write_into(out);
                }
                out.push(']');
            }
            Json::Obj(entries) => {
                out.push('{');
                for (k, (key, value)) in entries.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    Json::Str(key.clone()).write_into(out);
                    out.push(':');
                    value.write_into(out);
                }
                out.push('}');
            }
        }
    }

    pub fn to_string_canonical(&self) -> String {
        let mut s = String::new();
        self.write_into(&mut s);
        s.push('\n');
        s
    }
}

/// One verification record: inputs, expectation, observation, deviation.
#[derive(Clone, Debug)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: String,
    pub expected: String,
    pub observed: String,
    pub deviation: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn to_json(&self) -> Json {
        let mut o = Json::obj();
        o.push("name", Json::Str(self.name.clone()));
        o.push("inputs", Json::Str(self.inputs.clone()));
        o.push("expected", Json::Str(self.expected.clone()));
        o.push("observed", Json::Str(self.observed.clone()));
        o.push("deviation", Json::Num(self.deviation));
        o.push("pass", Json::Bool(self.pass));
        o
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub tolerance: f64,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(suite: &str, seed: u64, tolerance: f64) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            seed,
            tolerance,
            checks: Vec::new(),
        }
    }

    pub fn record(
        &mut self,
        name: &str,
        inputs: String,
        expected: String,
        observed: String,
        deviation: f64,
        pass: bool,
    ) {
        self.checks.push(CheckRecord {
            name: name.to_string(),
            inputs,
            expected,
            observed,
            deviation,
            pass,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn counts(&self) -> (usize, usize) {
        let pass = self.checks.iter().filter(|c| c.pass).count();
        (pass, self.checks.len() - pass)
    }

    pub fn first_failure(&self) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn to_json(&self) -> Json {
        let (pass, fail) = self.counts();
        let mut o = Json::obj();
        o.push("suite", Json::Str(self.suite.clone()));
        o.push("seed", Json::Int(self.seed as i64));
        o.push("tolerance", Json::Num(self.tolerance));
        o.push("passed", Json::Int(pass as i64));
        o.push("failed", Json::Int(fail as i64));
        o.push(
            "checks",
            Json::Arr(self.checks.iter().map(|c| c.to_json()).collect()),
        );
        o
    }

    /// Flat CSV projection of the check table.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,inputs,expected,observed,deviation,pass\n");
        for c in &self.checks {
            let esc = |t: &str| t.replace(',', ";");
            let _ = writeln!(
                s,
                "{},{},{},{},{:.16e},{}",
                esc(&c.name),
                esc(&c.inputs),
                esc(&c.expected),
                esc(&c.observed),
                c.deviation,
                c.pass
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_is_stable() {
        let mut o = Json::obj();
        o.push("b", Json::Num(1.0 / 3.0));
        o.push("a", Json::Int(-4));
        o.push("z", Json::Arr(vec![Json::Bool(true), Json::Null]));
        let s1 = o.to_string_canonical();
        let s2 = o.to_string_canonical();
        assert_eq!(s1, s2);
        // Keys keep insertion order; floats carry 17 significant digits.
        assert!(s1.starts_with("{\"b\":3.3333333333333331e-1"));
    }

    #[test]
    fn report_counts_and_failure() {
        let mut r = VerificationReport::new("demo", 7, 1e-9);
        r.record("ok", "-".into(), "1".into(), "1".into(), 0.0, true);
        r.record("bad", "-".into(), "0".into(), "1".into(), 1.0, false);
        assert!(!r.passed());
        assert_eq!(r.counts(), (1, 1));
        assert_eq!(r.first_failure().unwrap().name, "bad");
    }
}
