//! Summation of nonnegative series over infinite fibers.
//!
//! A series is summed over dyadic blocks `[K, 2K)`, `[2K, 4K)`, … and the
//! ratios of consecutive block sums classify the tail: a power law
//! `a_k ~ C·k^{-s}` gives block ratios `2^{1-s}`, so ratios clearly below one
//! mean convergence and ratios at or above one mean divergence.

use serde::Serialize;

use crate::ext::ExtReal;

/// Why a series was declared convergent or divergent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "kebab-case")]
pub enum TailReason {
    /// Only finitely many nonzero terms in the examined range and the last blocks vanish.
    FiniteSupport,
    /// Block ratios consistent with `Σ k^{-s}`, `s > 1`.
    PSeries { exponent: f64 },
    /// Block ratios collapsing faster than any power law.
    Geometric { ratio: f64 },
    /// Block ratios consistent with `Σ k^{-s}`, `s <= 1`.
    DivergentByComparison { exponent: f64 },
    /// Partial sums exceeded the divergence threshold.
    Threshold,
    /// A term is infinite.
    InfiniteTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVerdict {
    Convergent,
    Divergent,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum {
    /// Estimated sum; `∞` when divergent, the last partial sum when undecided.
    pub value: ExtReal,
    pub verdict: SeriesVerdict,
    pub reason: Option<TailReason>,
    /// Number of terms actually evaluated.
    pub terms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Length of the first block.
    pub base: u64,
    /// Number of doublings after the first block.
    pub doublings: u32,
    /// Partial sums above this are declared divergent.
    pub threshold: f64,
    /// Block ratios at or below this indicate convergence.
    pub converge_ratio: f64,
    /// Block ratios at or above this indicate divergence.
    pub diverge_ratio: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig { base: 1000, doublings: 3, threshold: 1e12, converge_ratio: 0.98, diverge_ratio: 0.99 }
    }
}

/// Sums `Σ_{k≥0} term(k)` for nonnegative terms.
pub fn sum_series(term: impl Fn(u64) -> ExtReal, cfg: &SeriesConfig) -> SeriesSum {
    let mut bounds = vec![cfg.base];
    for _ in 0..cfg.doublings {
        bounds.push(bounds.last().unwrap() * 2);
    }
    let mut blocks = Vec::with_capacity(bounds.len());
    let mut partial = 0.0_f64;
    let mut start = 0;
    for &end in &bounds {
        let mut block = 0.0;
        for k in start..end {
            let t = term(k);
            if t.is_infinite() {
                return SeriesSum {
                    value: ExtReal::INFINITY,
                    verdict: SeriesVerdict::Divergent,
                    reason: Some(TailReason::InfiniteTerm),
                    terms: k + 1,
                };
            }
            block += t.get();
        }
        partial += block;
        if partial > cfg.threshold {
            return SeriesSum {
                value: ExtReal::INFINITY,
                verdict: SeriesVerdict::Divergent,
                reason: Some(TailReason::Threshold),
                terms: end,
            };
        }
        blocks.push(block);
        start = end;
    }
    let terms = start;
    let n = blocks.len();
    let (b1, b2, b3) = (blocks[n - 3], blocks[n - 2], blocks[n - 1]);
    if b2 == 0.0 && b3 == 0.0 {
        return SeriesSum {
            value: ExtReal::new(partial),
            verdict: SeriesVerdict::Convergent,
            reason: Some(TailReason::FiniteSupport),
            terms,
        };
    }
    let undecided = SeriesSum { value: ExtReal::new(partial), verdict: SeriesVerdict::Undecided, reason: None, terms };
    if b1 == 0.0 || b2 == 0.0 {
        return undecided;
    }
    let (r1, r2) = (b2 / b1, b3 / b2);
    if r1 <= cfg.converge_ratio && r2 <= cfg.converge_ratio {
        let tail = b3 * r2 / (1.0 - r2);
        let reason = if r2 < 0.5 * r1 || r2 < 1e-3 {
            TailReason::Geometric { ratio: r2 }
        } else {
            TailReason::PSeries { exponent: 1.0 - r2.log2() }
        };
        return SeriesSum {
            value: ExtReal::new(partial + tail),
            verdict: SeriesVerdict::Convergent,
            reason: Some(reason),
            terms,
        };
    }
    if r1 >= cfg.diverge_ratio && r2 >= cfg.diverge_ratio {
        return SeriesSum {
            value: ExtReal::INFINITY,
            verdict: SeriesVerdict::Divergent,
            reason: Some(TailReason::DivergentByComparison { exponent: 1.0 - r2.log2() }),
            terms,
        };
    }
    undecided
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_series(s: f64) -> impl Fn(u64) -> ExtReal {
        move |k| ExtReal::new(((k + 1) as f64).powf(-s))
    }

    #[test]
    fn basel_sum_converges_to_pi_squared_over_six() {
        let r = sum_series(p_series(2.0), &SeriesConfig::default());
        assert_eq!(r.verdict, SeriesVerdict::Convergent);
        let exact = std::f64::consts::PI.powi(2) / 6.0;
        assert!((r.value.get() - exact).abs() < 1e-6, "{:?}", r);
        match r.reason {
            Some(TailReason::PSeries { exponent }) => assert!((exponent - 2.0).abs() < 0.01),
            other => panic!("unexpected reason {other:?}"),
        }
    }

    #[test]
    fn three_halves_p_series_converges() {
        let r = sum_series(p_series(1.5), &SeriesConfig::default());
        assert_eq!(r.verdict, SeriesVerdict::Convergent);
        // ζ(3/2) = 2.6123753486854883
        assert!((r.value.get() - 2.612_375_348_685_488).abs() < 1e-3);
    }

    #[test]
    fn harmonic_and_constant_series_diverge() {
        for s in [1.0, 0.5, 0.0] {
            let r = sum_series(p_series(s), &SeriesConfig::default());
            assert_eq!(r.verdict, SeriesVerdict::Divergent, "s = {s}");
            assert!(r.value.is_infinite());
        }
    }

    #[test]
    fn geometric_series() {
        let r = sum_series(|k| ExtReal::new(0.5f64.powi(k as i32)), &SeriesConfig::default());
        assert_eq!(r.verdict, SeriesVerdict::Convergent);
        assert!((r.value.get() - 2.0).abs() < 1e-12);
        assert!(matches!(r.reason, Some(TailReason::FiniteSupport) | Some(TailReason::Geometric { .. })));
    }

    #[test]
    fn threshold_and_infinite_terms() {
        let r = sum_series(|_| ExtReal::new(1e10), &SeriesConfig::default());
        assert_eq!(r.reason, Some(TailReason::Threshold));
        let r = sum_series(|k| if k == 3 { ExtReal::INFINITY } else { ExtReal::ONE }, &SeriesConfig::default());
        assert_eq!(r.reason, Some(TailReason::InfiniteTerm));
    }

    #[test]
    fn finite_support() {
        let r = sum_series(|k| if k < 10 { ExtReal::ONE } else { ExtReal::ZERO }, &SeriesConfig::default());
        assert_eq!(r.verdict, SeriesVerdict::Convergent);
        assert_eq!(r.value.get(), 10.0);
    }
}
