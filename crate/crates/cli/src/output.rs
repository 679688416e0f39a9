// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Output files. Every one carries the code version, the config hash, the
//! seeds and the config itself, and nothing that varies between runs.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Comment lines opening a CSV or text report.
pub fn header(command: &str, cfg: &ExperimentConfig, seeds: &[u64]) -> String {
    let mut s = format!("# iqc {VERSION} {command}\n# config-sha256: {}\n", cfg.hash());
    s += &format!("# seeds: root={} realizations={}\n", cfg.seed, join(seeds));
    for line in cfg.canonical().lines() {
        s += &format!("# config: {line}\n");
    }
    s
}

/// JSON document with the provenance block merged ahead of `body`.
pub fn json_document(command: &str, cfg: &ExperimentConfig, seeds: &[u64], body: Value) -> Value {
    let config: Map<String, Value> = cfg
        .canonical()
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
        .collect();
    let mut doc = json!({
        "iqc_version": VERSION,
        "command": command,
        "config_sha256": cfg.hash(),
        "seeds": { "root": cfg.seed, "realizations": seeds },
        "config": config,
    });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

pub fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Empty string for `None`.
pub fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `text` to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
