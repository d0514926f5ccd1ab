//! Machine-checked inequality instances.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::number::Num;

/// Relative slack allowed when either side of a certificate is a float.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// Whether a failure would contradict a theorem (a bug) or only an
/// empirical expectation about constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backing {
    Theorem,
    Empirical,
}

/// The claim `lhs ≤ rhs`, evaluated on construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub lhs: Num,
    pub rhs: Num,
    pub mode: Mode,
    pub pass: bool,
    pub backing: Backing,
    pub context: BTreeMap<String, serde_json::Value>,
}

impl Certificate {
    pub fn new(name: &str, lhs: Num, rhs: Num, backing: Backing) -> Self {
        let (mode, pass) = match (&lhs, &rhs) {
            (Num::Exact(a), Num::Exact(b)) => (Mode::Exact, a <= b),
            _ => {
                let (a, b) = (lhs.to_f64(), rhs.to_f64());
                (Mode::Float, a <= b + FLOAT_TOLERANCE * b.abs().max(f64::MIN_POSITIVE))
            }
        };
        Certificate {
            name: name.to_string(),
            lhs,
            rhs,
            mode,
            pass,
            backing,
            context: BTreeMap::new(),
        }
    }

    /// The claim `lhs == rhs`, recorded with `rhs` as the right-hand side.
    pub fn equality(name: &str, lhs: Num, rhs: Num, backing: Backing) -> Self {
        let mut c = Certificate::new(name, lhs.clone(), rhs.clone(), backing);
        let reverse = Certificate::new(name, rhs, lhs, backing);
        c.pass &= reverse.pass;
        c.context.insert("relation".into(), "equal".into());
        c
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.context.insert(
            key.to_string(),
            serde_json::to_value(value).expect("context values serialise"),
        );
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.set(key, value);
        self
    }

    /// `lhs / rhs` as a float (infinite when `rhs = 0 < lhs`, zero when both vanish).
    pub fn ratio(&self) -> f64 {
        ratio(&self.lhs, &self.rhs)
    }

    /// A failure that should gate a build.
    pub fn is_violation(&self) -> bool {
        !self.pass && self.backing == Backing::Theorem
    }
}

pub fn ratio(lhs: &Num, rhs: &Num) -> f64 {
    let (a, b) = (lhs.to_f64(), rhs.to_f64());
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Whether every theorem-backed certificate passes.
pub fn all_theorems_pass<'a>(certs: impl IntoIterator<Item = &'a Certificate>) -> bool {
    certs.into_iter().all(|c| !c.is_violation())
}
