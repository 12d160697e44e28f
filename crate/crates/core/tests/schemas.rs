//! Command JSON against the schemas in docs/schemas.
//!
//! The validator covers the keywords those schemas use: type, required,
//! properties, additionalProperties, items and enum.

use std::path::Path;

use clap::Parser;
use psiq::cli::{run, Cli};
use serde_json::Value;

fn type_matches(v: &Value, t: &str) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "integer" => v.is_i64() || v.is_u64(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        _ => panic!("unsupported type {t}"),
    }
}

fn validate(v: &Value, schema: &Value, path: &str, errors: &mut Vec<String>) {
    if let Some(t) = schema.get("type") {
        let ok = match t {
            Value::String(s) => type_matches(v, s),
            Value::Array(ts) => ts.iter().any(|t| type_matches(v, t.as_str().unwrap())),
            _ => false,
        };
        if !ok {
            errors.push(format!("{path}: expected type {t}, found {v}"));
            return;
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            errors.push(format!("{path}: {v} not in {options:?}"));
        }
    }
    if let (Some(obj), Some(props)) = (v.as_object(), schema.get("properties").and_then(Value::as_object)) {
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(key.as_str().unwrap()) {
                errors.push(format!("{path}: missing {key}"));
            }
        }
        for (key, value) in obj {
            match props.get(key) {
                Some(sub) => validate(value, sub, &format!("{path}.{key}"), errors),
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{path}: unexpected key {key}"))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(sub)) = (v.as_array(), schema.get("items")) {
        for (i, item) in items.iter().enumerate() {
            validate(item, sub, &format!("{path}[{i}]"), errors);
        }
    }
}

fn check(schema: &str, args: &[&str]) {
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(format!("{schema}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let mut all = vec!["psiq", "--format", "json"];
    all.extend(args);
    let out = run(&Cli::parse_from(&all)).unwrap();
    let v: Value = serde_json::from_str(&out.body).unwrap();
    let mut errors = Vec::new();
    validate(&v, &schema, "$", &mut errors);
    assert!(errors.is_empty(), "{args:?}: {errors:#?}");
}

#[test]
fn coeffs() {
    check("coeffs", &["coeffs", "--degree", "12"]);
    check("coeffs", &["--p", "3", "coeffs", "--degree", "6"]);
}

#[test]
fn polygon() {
    check("polygon", &["polygon", "--degree", "16"]);
    check("polygon", &["--p", "3", "polygon", "--kind", "valuation", "--emit-closed-form"]);
}

#[test]
fn zeros() {
    check("zeros", &["--p", "3", "zeros", "--n", "1"]);
    check("zeros", &["--f", "2", "zeros", "--n", "1"]);
}

#[test]
fn decompose() {
    check("decompose", &["decompose", "--value", "7/8"]);
    check("decompose", &["decompose", "--value", "0"]);
}

#[test]
fn eval() {
    check("eval", &["--p", "3", "eval", "--x", "1/9"]);
    check("eval", &["eval", "--x", "0"]);
}

#[test]
fn verify() {
    check("verify", &["verify", "--suite", "polygon"]);
    check("verify", &["--f", "2", "verify", "--suite", "addition"]);
}

#[test]
fn validator_rejects_drift() {
    let schema: Value = serde_json::from_str(
        r#"{"type":"object","required":["p","b"],"properties":{"p":{"type":"integer"},"b":{"type":"string"}},"additionalProperties":false}"#,
    )
    .unwrap();
    for bad in [r#"{"p":2}"#, r#"{"p":2,"b":5}"#, r#"{"p":2,"b":"5","extra":1}"#] {
        let mut errors = Vec::new();
        validate(&serde_json::from_str(bad).unwrap(), &schema, "$", &mut errors);
        assert!(!errors.is_empty(), "{bad}");
    }
}
