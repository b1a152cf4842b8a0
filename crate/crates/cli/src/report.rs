//! Canonical JSON: sorted keys, floats with 17 significant digits, no
//! insignificant whitespace, trailing newline.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub version: String,
    pub command: String,
    pub input_sha256: String,
    pub flags: Value,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str, input: &[u8], flags: Value) -> Self {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            input_sha256: hex(&Sha256::digest(input)),
            flags,
            results: Value::Object(Default::default()),
            warnings: Vec::new(),
        }
    }

    pub fn to_canonical(&self) -> String {
        emit_report(&serde_json::to_value(self).expect("report is serializable"))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn emit_report(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_g17(n.as_f64().unwrap()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push(':');
                write_value(&m[k], out);
            }
            out.push('}');
        }
    }
}

/// `printf("%.17g", x)`.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..17).contains(&exp) {
        let digits = (16 - exp).max(0) as usize;
        trim_zeros(format!("{x:.digits$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (2.5, "2.5"),
            (-1234.5, "-1234.5"),
            (1e-5, "1.0000000000000001e-05"),
            (1e20, "1e+20"),
            (123456789012345680.0, "1.2345678901234568e+17"),
            (1.0 / 3.0, "0.33333333333333331"),
            (0.0001, "0.0001"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g17(x), want, "{x}");
        }
    }

    #[test]
    fn empty_results() {
        assert_eq!(emit_report(&json!({})), "{}\n");
    }

    #[test]
    fn keys_are_sorted_and_output_is_stable() {
        let v = json!({"b": 1, "a": {"z": [1.5, null], "c": "x"}});
        let once = emit_report(&v);
        assert_eq!(once, "{\"a\":{\"c\":\"x\",\"z\":[1.5,null]},\"b\":1}\n");
        assert_eq!(once, emit_report(&v));
    }

    #[test]
    fn single_warning() {
        let mut r = Report::new("analyze", b"", json!({}));
        r.warnings.push("something".into());
        let v: Value = serde_json::from_str(&r.to_canonical()).unwrap();
        assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
        assert_eq!(
            v["input_sha256"],
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
