use alloc::vec::Vec;
use core::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_RESAMPLES: usize = 10_000;
/// Largest effective σ reported as a number; beyond it the result is clipped.
pub const SIGMA_CLIP: f64 = 5.0;

/// Percentile interval of a statistic over episode resamples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub resamples: usize,
}

/// Linear interpolation between order statistics of a sorted sample.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn resample<'a, T>(clusters: &'a [T], r: &mut rng::Rng, out: &mut Vec<&'a T>) {
    out.clear();
    out.extend((0..clusters.len()).map(|_| &clusters[r.random_range(0..clusters.len())]));
}

/// Resamples whole clusters with replacement and reports the 2.5 / 97.5
/// percentiles of `statistic` over the resamples.
pub fn cluster_bootstrap<T>(
    clusters: &[T],
    statistic: impl Fn(&[&T]) -> f64,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if clusters.is_empty() {
        return Err(Error::param("bootstrap needs at least one cluster"));
    }
    if resamples == 0 {
        return Err(Error::param("bootstrap needs at least one resample"));
    }
    let all: Vec<&T> = clusters.iter().collect();
    let point = statistic(&all);
    let mut r = rng::stream(seed, "cluster-bootstrap");
    let mut pick = Vec::with_capacity(clusters.len());
    let mut values: Vec<f64> = (0..resamples)
        .map(|_| {
            resample(clusters, &mut r, &mut pick);
            statistic(&pick)
        })
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(BootstrapResult {
        point,
        ci_low: percentile(&values, 0.025),
        ci_high: percentile(&values, 0.975),
        resamples,
    })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Inverse standard normal CDF: Acklam's rational approximation followed by
/// one Halley step against `erfc`. `±∞` at 0 and 1.
pub fn inverse_normal(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail(libm::sqrt(-2.0 * libm::log(p)))
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(libm::sqrt(-2.0 * libm::log(1.0 - p)))
    };
    let e = normal_cdf(x) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// `point_i / point_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ratio {
    Finite(f64),
    /// Positive numerator over a zero denominator.
    Infinite,
    /// Both points are zero.
    Undefined,
}

impl Ratio {
    pub fn of(num: f64, den: f64) -> Ratio {
        match (num == 0.0, den == 0.0) {
            (true, true) => Ratio::Undefined,
            (false, true) => Ratio::Infinite,
            _ => Ratio::Finite(num / den),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(x) => write!(f, "{x:.2}"),
            Ratio::Infinite => f.write_str("∞"),
            Ratio::Undefined => f.write_str("-"),
        }
    }
}

/// One-sided effective σ, clipped at the resampling resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sigma {
    Value(f64),
    /// Every resample favoured `i`.
    AtLeast(f64),
    /// Every resample favoured `j`.
    AtMost(f64),
}

impl Sigma {
    pub fn value(self) -> f64 {
        match self {
            Sigma::Value(x) | Sigma::AtLeast(x) | Sigma::AtMost(x) => x,
        }
    }

    pub fn is_clipped(self) -> bool {
        !matches!(self, Sigma::Value(_))
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sigma::Value(x) => write!(f, "{x:.2}σ"),
            Sigma::AtLeast(x) => write!(f, "≥{x}σ"),
            Sigma::AtMost(x) => write!(f, "≤{x}σ"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pairwise {
    pub ratio: Ratio,
    pub sigma: Sigma,
    /// Fraction of joint resamples with `i` ahead, ties counted half.
    pub p_hat: f64,
}

/// Ratio of the point statistics and the effective σ of `i` outperforming
/// `j`: both sides are resampled independently, `p̂` is mapped through Φ⁻¹.
/// Identical inputs give σ = 0.
pub fn pairwise_sigma<T: PartialEq>(
    i: &[T],
    j: &[T],
    statistic: impl Fn(&[&T]) -> f64,
    resamples: usize,
    seed: u64,
) -> Result<Pairwise> {
    if i.is_empty() || j.is_empty() {
        return Err(Error::param("pairwise comparison needs clusters on both sides"));
    }
    if resamples == 0 {
        return Err(Error::param("pairwise comparison needs at least one resample"));
    }
    let all_i: Vec<&T> = i.iter().collect();
    let all_j: Vec<&T> = j.iter().collect();
    let ratio = Ratio::of(statistic(&all_i), statistic(&all_j));
    if i == j {
        return Ok(Pairwise { ratio, sigma: Sigma::Value(0.0), p_hat: 0.5 });
    }
    let mut r = rng::stream(seed, "pairwise-sigma");
    let (mut pi, mut pj) = (Vec::with_capacity(i.len()), Vec::with_capacity(j.len()));
    let mut wins = 0.0;
    for _ in 0..resamples {
        resample(i, &mut r, &mut pi);
        resample(j, &mut r, &mut pj);
        let (a, b) = (statistic(&pi), statistic(&pj));
        wins += if a > b {
            1.0
        } else if a == b {
            0.5
        } else {
            0.0
        };
    }
    let p_hat = wins / resamples as f64;
    let sigma = if p_hat >= 1.0 {
        Sigma::AtLeast(SIGMA_CLIP)
    } else if p_hat <= 0.0 {
        Sigma::AtMost(-SIGMA_CLIP)
    } else {
        Sigma::Value(inverse_normal(p_hat).clamp(-SIGMA_CLIP, SIGMA_CLIP))
    };
    Ok(Pairwise { ratio, sigma, p_hat })
}
