//! Request sequences and their text format.
//!
//! ```text
//! # label: rotating d=2 T=3
//! # seed: 7
//! 2 3
//! 1 0 1
//! 0.5 0.8660254037844386 1
//! -0.5 0.8660254037844386 1
//! ```
//!
//! The first data line is `d T`; each request line is `a_1 ... a_d b` for
//! `{x : <a, x> >= b}`. `#` starts a comment. The `label:` and `seed:`
//! comments before the header are read back into the instance.

use std::fmt::Write as _;
use std::path::Path;

use chase_core::HalfSpace;

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub d: usize,
    /// Raw `(a, b)` pairs, in arrival order.
    pub requests: Vec<(Vec<f64>, f64)>,
    pub label: String,
    pub seed: Option<u64>,
}

impl Instance {
    pub fn new(d: usize, requests: Vec<(Vec<f64>, f64)>, label: impl Into<String>, seed: Option<u64>) -> Result<Self> {
        let inst = Instance { d, requests, label: label.into(), seed };
        inst.halfspaces()?;
        Ok(inst)
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Normalized requests.
    pub fn halfspaces(&self) -> Result<Vec<HalfSpace>> {
        if self.d == 0 {
            return Err(HarnessError::Invalid("instance dimension must be at least 1".into()));
        }
        self.requests
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                if a.len() != self.d {
                    return Err(HarnessError::Invalid(format!(
                        "request {} has dimension {}, expected {}",
                        i + 1,
                        a.len(),
                        self.d
                    )));
                }
                Ok(HalfSpace::new(a, *b)?)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if !self.label.is_empty() {
            writeln!(s, "# label: {}", self.label).unwrap();
        }
        if let Some(seed) = self.seed {
            writeln!(s, "# seed: {seed}").unwrap();
        }
        writeln!(s, "{} {}", self.d, self.requests.len()).unwrap();
        for (a, b) in &self.requests {
            for c in a {
                write!(s, "{c} ").unwrap();
            }
            writeln!(s, "{b}").unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut label = String::new();
        let mut seed = None;
        let mut header: Option<(usize, usize)> = None;
        let mut requests = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| HarnessError::Parse { line, msg };
            let (body, comment) = match raw.find('#') {
                Some(p) => (&raw[..p], Some(raw[p + 1..].trim())),
                None => (raw, None),
            };
            if header.is_none() {
                if let Some(c) = comment {
                    if let Some(v) = c.strip_prefix("label:") {
                        label = v.trim().to_string();
                    } else if let Some(v) = c.strip_prefix("seed:") {
                        seed = Some(v.trim().parse().map_err(|_| err(format!("bad seed `{}`", v.trim())))?);
                    }
                }
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let Some((d, _)) = header else {
                if fields.len() != 2 {
                    return Err(err(format!("expected `d T`, found {} fields", fields.len())));
                }
                let d: usize = fields[0].parse().map_err(|_| err(format!("bad dimension `{}`", fields[0])))?;
                let t: usize = fields[1].parse().map_err(|_| err(format!("bad request count `{}`", fields[1])))?;
                if d == 0 {
                    return Err(err("dimension must be at least 1".into()));
                }
                header = Some((d, t));
                continue;
            };
            if fields.len() != d + 1 {
                return Err(err(format!("expected {} numbers, found {}", d + 1, fields.len())));
            }
            let nums = fields
                .iter()
                .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| err(format!("bad number `{f}`"))))
                .collect::<Result<Vec<f64>>>()?;
            let norm = nums[..d].iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm <= 1e-14 {
                return Err(err("request normal is zero".into()));
            }
            requests.push((nums[..d].to_vec(), nums[d]));
        }
        let Some((d, t)) = header else {
            return Err(HarnessError::Parse { line: 1, msg: "missing `d T` header".into() });
        };
        if requests.len() != t {
            let line = text.lines().count().max(1);
            return Err(HarnessError::Parse { line, msg: format!("header announces {t} requests, found {}", requests.len()) });
        }
        Instance::new(d, requests, label, seed)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}
