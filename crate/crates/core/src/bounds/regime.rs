//! Regime classification, predicted discrepancy orders and upper-bound envelopes.

use serde::Serialize;

use super::lambda::{lambda, LambdaValue};
use crate::error::{invalid, Result};
use crate::subset::binomial_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    #[serde(rename = "dense")]
    Dense,
    #[serde(rename = "sparse-2.1")]
    SparseModerate,
    #[serde(rename = "sparse-2.2")]
    SparseExtreme,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Dense => "dense",
            Regime::SparseModerate => "sparse-2.1",
            Regime::SparseExtreme => "sparse-2.2",
        }
    }

    pub fn is_sparse(self) -> bool {
        self != Regime::Dense
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Threshold below which the survival argument's `pN >= 8` assumption fails.
pub const LOW_PN_FLAG: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeParams {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    /// `C(n - floor(n/k), k - 1)`, the size of the projection's right side.
    pub right_size: f64,
    /// `log n / (p q N)`; only defined in the sparse regimes.
    pub gamma: Option<f64>,
    pub regime: Regime,
    /// The predicted order with constant 1.
    pub predicted: f64,
    /// Set when `pN < 8`, outside the range the lower-bound argument covers.
    pub low_pn: bool,
}

fn check_params(n: usize, k: usize, p: f64, q: f64) -> Result<()> {
    if !(k >= 2 && k < n) {
        return invalid(format!("need 2 <= k < n, got k = {k}, n = {n}"));
    }
    if !(p > 0.0) {
        return invalid(format!("need p > 0, got {p}"));
    }
    if p > q || q > 0.5 {
        return invalid(format!(
            "need p <= q <= 1/2 (got p = {p}, q = {q}); complement G or H and/or swap them first"
        ));
    }
    Ok(())
}

/// `C(n - floor(n/k), k - 1)`.
pub fn right_size(n: usize, k: usize) -> f64 {
    binomial_f64((n - n / k) as u64, (k - 1) as u64)
}

pub fn classify_regime(n: usize, k: usize, p: f64, q: f64) -> Result<RegimeParams> {
    check_params(n, k, p, q)?;
    let big_n = right_size(n, k);
    let log_n = (n as f64).ln();
    let pqn = p * q * big_n;
    let (regime, gamma) = if pqn > log_n / 30.0 {
        (Regime::Dense, None)
    } else {
        let gamma = log_n / pqn;
        if p * big_n >= log_n / (5.0 * gamma.ln()) {
            (Regime::SparseModerate, Some(gamma))
        } else {
            (Regime::SparseExtreme, Some(gamma))
        }
    };
    let universe = binomial_f64(n as u64, k as u64);
    let predicted = match regime {
        Regime::Dense => (p * q * universe * n as f64 * log_n).sqrt(),
        Regime::SparseModerate => n as f64 * log_n / gamma.expect("sparse").ln(),
        Regime::SparseExtreme => p * universe,
    };
    Ok(RegimeParams {
        n,
        k,
        p,
        q,
        right_size: big_n,
        gamma,
        regime,
        predicted,
        low_pn: p * big_n < LOW_PN_FLAG,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnifiedPrediction {
    pub lambda: LambdaValue,
    /// `n Λ(m, q, log n)`.
    pub value: f64,
}

/// `n Λ(m, q, log n)` with `m = p C(n-1, k-1)` rounded to nearest and clamped to at least 1.
pub fn predicted_disc_via_lambda(n: usize, k: usize, p: f64, q: f64) -> Result<UnifiedPrediction> {
    check_params(n, k, p, q)?;
    let degree = p * binomial_f64((n - 1) as u64, (k - 1) as u64);
    let m = (degree.round() as u64).max(1);
    let lambda = lambda(m, q, (n as f64).ln())?;
    Ok(UnifiedPrediction {
        value: n as f64 * lambda.value,
        lambda,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EnvelopeBranch {
    /// `pq C(n,k) > 4 n log n`: `λ = 2 sqrt(pq C(n,k) n log n)`.
    Dense,
    /// Otherwise `λ = 4e² n log n / log γ'` with `γ' = 4e n log n / (pq C(n,k))`.
    Sparse { gamma_prime: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Envelope {
    /// `4 n^{1/4} sqrt(pq C(n,k))`, the gap between realized-density and
    /// parameter-baseline discrepancy.
    pub eps: f64,
    pub lambda: f64,
    pub branch: EnvelopeBranch,
}

pub fn upper_envelope(n: usize, k: usize, p: f64, q: f64) -> Result<Envelope> {
    check_params(n, k, p, q)?;
    let nf = n as f64;
    let mean = p * q * binomial_f64(n as u64, k as u64);
    let n_log_n = nf * nf.ln();
    let eps = 4.0 * nf.powf(0.25) * mean.sqrt();
    let e = std::f64::consts::E;
    let (lambda, branch) = if mean > 4.0 * n_log_n {
        (2.0 * (mean * n_log_n).sqrt(), EnvelopeBranch::Dense)
    } else {
        let gamma_prime = 4.0 * e * n_log_n / mean;
        (
            4.0 * e * e * n_log_n / gamma_prime.ln(),
            EnvelopeBranch::Sparse { gamma_prime },
        )
    };
    Ok(Envelope {
        eps,
        lambda,
        branch,
    })
}
