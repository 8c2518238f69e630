//! Truncated power series in `ε` up to third order.
//!
//! Convention: `c[k] = (d^k/dε^k f)(0) / k!`.

pub const JET_LEN: usize = 4;

pub type Jet = [f64; JET_LEN];

pub const ZERO: Jet = [0.0; JET_LEN];

const FACT: [f64; JET_LEN] = [1.0, 1.0, 2.0, 6.0];

/// Jet from derivatives `[f, f', f'', f''']`.
pub fn from_derivatives(d: [f64; JET_LEN]) -> Jet {
    let mut j = ZERO;
    for k in 0..JET_LEN {
        j[k] = d[k] / FACT[k];
    }
    j
}

/// `k`-th derivative at `ε = 0`.
pub fn derivative(j: &Jet, k: usize) -> f64 {
    j[k] * FACT[k]
}

pub fn mul(a: &Jet, b: &Jet) -> Jet {
    let mut out = ZERO;
    for i in 0..JET_LEN {
        if a[i] == 0.0 {
            continue;
        }
        for k in 0..JET_LEN - i {
            out[i + k] += a[i] * b[k];
        }
    }
    out
}
