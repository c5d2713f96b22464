//! File formats.
//!
//! Hypergraph file:
//!
//! ```json
//! {"n": 6, "layers": [{"m": 3, "edges": [[0, 1, 2], [3, 4, 5]]}], "labels": [1, 1, 1, -1, -1, -1]}
//! ```
//!
//! Edges are 0-based, each sorted, and listed lexicographically; `labels` is
//! optional (`null` or absent when no ground truth is carried).
//!
//! Model file:
//!
//! ```json
//! {"n": 100, "layers": {"2": {"a": 4.0, "b": 1.0}, "3": {"a": 60.0, "b": 5.0}}}
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{Hypergraph, LabelVector, ModelSpec};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRecord {
    m: usize,
    edges: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypergraphRecord {
    n: usize,
    layers: Vec<LayerRecord>,
    #[serde(default)]
    labels: Option<Vec<i8>>,
}

/// A hypergraph together with optional ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct HypergraphFile {
    pub hypergraph: Hypergraph,
    pub labels: Option<LabelVector>,
}

impl HypergraphFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let rec: HypergraphRecord = serde_json::from_str(text)?;
        if rec.n == 0 {
            return invalid("n must be positive");
        }
        let mut layers = BTreeMap::new();
        for layer in rec.layers {
            if layers.insert(layer.m, layer.edges).is_some() {
                return invalid(format!("layer {} listed twice", layer.m));
            }
        }
        let hypergraph = Hypergraph::new(rec.n, layers)?;
        let labels = match rec.labels {
            Some(l) => {
                let l = LabelVector::new(l)?;
                if l.len() != rec.n {
                    return invalid(format!("labels have length {} but n = {}", l.len(), rec.n));
                }
                Some(l)
            }
            None => None,
        };
        Ok(Self { hypergraph, labels })
    }

    pub fn to_json(&self) -> String {
        let rec = HypergraphRecord {
            n: self.hypergraph.n(),
            layers: self
                .hypergraph
                .layers()
                .iter()
                .map(|(&m, edges)| LayerRecord {
                    m,
                    edges: edges.clone(),
                })
                .collect(),
            labels: self.labels.as_ref().map(|l| l.as_slice().to_vec()),
        };
        serde_json::to_string(&rec).expect("hypergraph serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

pub fn model_spec_from_json(text: &str) -> Result<ModelSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn model_spec_to_json(spec: &ModelSpec) -> String {
    serde_json::to_string(spec).expect("model spec serializes")
}

pub fn read_model_spec(path: &Path) -> Result<ModelSpec> {
    model_spec_from_json(&fs::read_to_string(path)?)
}

/// Parses an `m:a:b` layer triple, e.g. `4:128:72`.
pub fn parse_layer_triple(s: &str) -> Result<(usize, f64, f64)> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let [m, a, b] = parts.as_slice() else {
        return invalid(format!("expected m:a:b, got {s:?}"));
    };
    let m: usize = m
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad arity in {s:?}")))?;
    let num = |x: &str| -> Result<f64> {
        let v: f64 = x
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad intensity {x:?} in {s:?}")))?;
        if !v.is_finite() {
            return invalid(format!("intensity must be finite in {s:?}"));
        }
        Ok(v)
    };
    let (a, b) = (num(a)?, num(b)?);
    if m < 2 {
        return invalid(format!("arity must be at least 2 in {s:?}"));
    }
    if a <= 0.0 || b <= 0.0 {
        return invalid(format!("intensities must be positive in {s:?}"));
    }
    Ok((m, a, b))
}

/// Renders an `m:a:b` triple.
pub fn format_layer_triple(m: usize, a: f64, b: f64) -> String {
    format!("{m}:{a}:{b}")
}
