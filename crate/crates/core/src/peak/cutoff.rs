//! Flat-smooth cutoff `g` with `g ≡ 1` on `t ≤ 0` and `g ≡ 0` on `t ≥ r`.
//!
//! `g(t) = σ(1 − t/r) / (σ(1 − t/r) + σ(t/r))`, `σ(s) = exp(−1/s)` for
//! `s > 0` and `0` otherwise. Measuring `t` in units of `r` keeps the
//! transition width proportional to `r`, so derivatives scale like `r^{-k}`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffG {
    pub r: f64,
}

impl CutoffG {
    pub fn new(r: f64) -> Self {
        assert!(r > 0.0 && r.is_finite(), "cutoff radius must be positive");
        CutoffG { r }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = t / self.r;
        if s <= 0.0 {
            return 1.0;
        }
        if s >= 1.0 {
            return 0.0;
        }
        // σ(1−s)/(σ(1−s)+σ(s)) = 1/(1 + exp(1/(1−s) − 1/s)), free of 0/0.
        let e = 1.0 / (1.0 - s) - 1.0 / s;
        if e > 700.0 {
            0.0
        } else {
            1.0 / (1.0 + e.exp())
        }
    }
}
