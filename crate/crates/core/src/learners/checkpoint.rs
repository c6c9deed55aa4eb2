//! Versioned text checkpoint of a learner's parameter tensors.
//!
//! ```text
//! peerlab-checkpoint 1
//! learner tabular
//! tensors 1
//! tensor q 2 14641 4
//! 0 0 0.5 ...
//! ```
//!
//! Values use Rust's shortest round-trip float formatting, so a save/load
//! cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{PeerlabError, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "peerlab-checkpoint";

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self {
            name: name.into(),
            shape,
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub learner: String,
    pub tensors: Vec<Tensor>,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MAGIC} {FORMAT_VERSION}").unwrap();
        writeln!(out, "learner {}", self.learner).unwrap();
        writeln!(out, "tensors {}", self.tensors.len()).unwrap();
        for t in &self.tensors {
            write!(out, "tensor {} {}", t.name, t.shape.len()).unwrap();
            for d in &t.shape {
                write!(out, " {d}").unwrap();
            }
            out.push('\n');
            let mut first = true;
            for v in &t.data {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| PeerlabError::Checkpoint(msg);
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| bad(format!("unexpected end of file, expected {what}")))
        };

        let header = next("header")?;
        let version = header
            .strip_prefix(MAGIC)
            .map(str::trim)
            .ok_or_else(|| bad(format!("not a checkpoint: {header:?}")))?;
        let version: u32 = version
            .parse()
            .map_err(|_| bad(format!("bad version {version:?}")))?;
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported checkpoint version {version}")));
        }
        let learner = next("learner line")?
            .strip_prefix("learner ")
            .ok_or_else(|| bad("missing learner line".into()))?
            .to_owned();
        let count: usize = next("tensor count")?
            .strip_prefix("tensors ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad("missing tensor count".into()))?;

        let mut tensors = Vec::with_capacity(count);
        for _ in 0..count {
            let head = next("tensor header")?;
            let mut parts = head.split_whitespace();
            if parts.next() != Some("tensor") {
                return Err(bad(format!("expected tensor header, got {head:?}")));
            }
            let name = parts
                .next()
                .ok_or_else(|| bad("tensor without name".into()))?
                .to_owned();
            let rank: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("tensor {name}: bad rank")))?;
            let shape: Vec<usize> = parts
                .map(|s| {
                    s.parse()
                        .map_err(|_| bad(format!("tensor {name}: bad dim {s:?}")))
                })
                .collect::<Result<_>>()?;
            if shape.len() != rank {
                return Err(bad(format!(
                    "tensor {name}: rank {rank} but {} dims",
                    shape.len()
                )));
            }
            let body = next("tensor data")?;
            let data: Vec<f64> = body
                .split_whitespace()
                .map(|s| {
                    s.parse()
                        .map_err(|_| bad(format!("tensor {name}: bad value {s:?}")))
                })
                .collect::<Result<_>>()?;
            if data.len() != shape.iter().product::<usize>() {
                return Err(bad(format!(
                    "tensor {name}: {} values for shape {shape:?}",
                    data.len()
                )));
            }
            tensors.push(Tensor { name, shape, data });
        }
        Ok(Self { learner, tensors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(
            data in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..40),
            name in "[a-z][a-z0-9_]{0,8}",
        ) {
            let n = data.len();
            let ckpt = Checkpoint {
                learner: "neural".into(),
                tensors: vec![
                    Tensor::new(name, vec![n], data.clone()),
                    Tensor::new("b", vec![1, 2], vec![-0.0, 1e-300]),
                ],
            };
            let back = Checkpoint::parse(&ckpt.to_text()).unwrap();
            prop_assert_eq!(back.tensors.len(), 2);
            for (a, b) in ckpt.tensors.iter().zip(&back.tensors) {
                prop_assert_eq!(&a.shape, &b.shape);
                prop_assert!(a.data.iter().zip(&b.data).all(|(x, y)| x.to_bits() == y.to_bits()));
            }
        }
    }

    #[test]
    fn rejects_wrong_version_and_shape() {
        let good = Checkpoint {
            learner: "tabular".into(),
            tensors: vec![Tensor::new("q", vec![2, 2], vec![0.0, 1.0, 2.0, 3.0])],
        }
        .to_text();
        assert!(Checkpoint::parse(&good).is_ok());
        assert!(Checkpoint::parse(&good.replace("checkpoint 1", "checkpoint 2")).is_err());
        assert!(Checkpoint::parse(&good.replace("2 2 2", "2 2 3")).is_err());
        assert!(Checkpoint::parse("hello").is_err());
        assert!(Checkpoint::parse("").is_err());
    }
}
