use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One state variable: chemical `u_i` or prey `v_j` (zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    U(usize),
    V(usize),
}

impl Var {
    /// Position in the flat state vector `(u_1..u_N, v_1..v_M)`.
    pub fn flat(self, n_chem: usize) -> usize {
        match self {
            Var::U(i) => i,
            Var::V(j) => n_chem + j,
        }
    }
}

/// Derivative multi-index, stored as a sorted multiset of variables.
///
/// Sorting makes `u1u2` and `u2u1` the same key, which is how coefficient
/// symmetry is enforced.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<Var>);

impl MultiIndex {
    pub fn new(mut vars: Vec<Var>) -> Self {
        vars.sort();
        MultiIndex(vars)
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// `α! = Π_k α_k!` over the distinct variables.
    pub fn factorial(&self) -> f64 {
        let mut out = 1.0;
        let mut run = 1;
        for w in self.0.windows(2) {
            if w[0] == w[1] {
                run += 1;
                out *= run as f64;
            } else {
                run = 1;
            }
        }
        out
    }

    /// Number of distinct variables.
    pub fn distinct(&self) -> usize {
        let mut v = self.0.clone();
        v.dedup();
        v.len()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            match v {
                Var::U(i) => write!(f, "u{}", i + 1)?,
                Var::V(j) => write!(f, "v{}", j + 1)?,
            }
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Parses strings such as `u1u1`, `u1v2`, `u2u1u1` (one-based).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidReaction(format!("bad multi-index {s:?}"));
        let bytes = s.trim().as_bytes();
        let mut vars = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let kind = bytes[i];
            i += 1;
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let k: usize = std::str::from_utf8(&bytes[start..i])
                .ok()
                .and_then(|t| t.parse().ok())
                .filter(|&k| k >= 1)
                .ok_or_else(bad)?;
            vars.push(match kind {
                b'u' => Var::U(k - 1),
                b'v' => Var::V(k - 1),
                _ => return Err(bad()),
            });
        }
        if vars.is_empty() {
            return Err(bad());
        }
        Ok(MultiIndex::new(vars))
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let m: MultiIndex = "u2u1".parse().unwrap();
        assert_eq!(m.to_string(), "u1u2");
        assert_eq!(m, "u1u2".parse().unwrap());
        let m: MultiIndex = "v1u1u1".parse().unwrap();
        assert_eq!(m.to_string(), "u1u1v1");
        assert_eq!(m.order(), 3);
        assert_eq!(m.factorial(), 2.0);
        assert_eq!(m.distinct(), 2);
        assert!("x1".parse::<MultiIndex>().is_err());
        assert!("u0".parse::<MultiIndex>().is_err());
        assert!("".parse::<MultiIndex>().is_err());
    }

    #[test]
    fn factorials() {
        let m: MultiIndex = "u1u1u1".parse().unwrap();
        assert_eq!(m.factorial(), 6.0);
        let m: MultiIndex = "u1u2u3".parse().unwrap();
        assert_eq!(m.factorial(), 1.0);
        let m: MultiIndex = "u1u1u2u2".parse().unwrap();
        assert_eq!(m.factorial(), 4.0);
    }
}
