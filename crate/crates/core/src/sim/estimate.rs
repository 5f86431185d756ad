//! Monte-Carlo logical error rates, Wilson intervals and pseudo-threshold search.

use super::frame::{BatchResult, FrameSimulator, LaneFault};
use super::noise::{sample_faults, trial_rng, Fault, NoiseModel};
use crate::circuit::PhysicalCircuit;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An operation whose failure is judged from the frame sampled on its circuit.
pub trait Protocol: Sync {
    fn circuit(&self) -> &PhysicalCircuit;
    /// Whether lane `lane` of `batch` ended with a logical error.
    fn failed(&self, batch: &BatchResult, lane: u32) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub failures: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z95: f64 = 1.959963984540054;

/// 95% Wilson score interval.
pub fn wilson(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let ph = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (ph + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if failures == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

impl Estimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let (lo, hi) = wilson(failures, trials);
        Estimate { failures, trials, rate: if trials == 0 { 0.0 } else { failures as f64 / trials as f64 }, ci_low: lo, ci_high: hi }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

/// Failure count over trials `[start, end)`; independent of scheduling.
pub fn count_failures(protocol: &dyn Protocol, noise: NoiseModel, seed: u64, start: u64, end: u64) -> u64 {
    let circuit = protocol.circuit();
    let sim = FrameSimulator::new(circuit);
    let locs = sim.locations();
    let zero_fails = protocol.failed(&sim.run(&[]), 0) as u64;
    let first_batch = start / 64;
    let last_batch = end.div_ceil(64);
    (first_batch..last_batch)
        .into_par_iter()
        .map(|b| {
            let mut lane_faults: Vec<LaneFault> = Vec::new();
            let mut faulty: u64 = 0;
            let mut buf: Vec<Fault> = Vec::new();
            let mut clean = 0u64;
            for lane in 0..64u32 {
                let t = b * 64 + lane as u64;
                if t < start || t >= end {
                    continue;
                }
                sample_faults(locs, noise.p(), &mut trial_rng(seed, t), &mut buf);
                if buf.is_empty() {
                    clean += 1;
                } else {
                    faulty |= 1 << lane;
                    lane_faults.extend(buf.iter().map(|&(loc, f)| LaneFault { loc, lane, fault: f as u16 }));
                }
            }
            let mut fails = clean * zero_fails;
            if faulty != 0 {
                lane_faults.sort();
                let res = sim.run(&lane_faults);
                for lane in 0..64u32 {
                    if (faulty >> lane) & 1 == 1 && protocol.failed(&res, lane) {
                        fails += 1;
                    }
                }
            }
            fails
        })
        .sum()
}

pub fn logical_error_rate(protocol: &dyn Protocol, noise: NoiseModel, trials: u64, seed: u64) -> Estimate {
    Estimate::from_counts(count_failures(protocol, noise, seed, 0, trials), trials)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptivePolicy {
    pub start: u64,
    pub growth: u64,
    pub cap: u64,
    /// Stop once the CI half-width is below this fraction of the estimate.
    pub rel_half_width: f64,
}

impl Default for AdaptivePolicy {
    fn default() -> Self {
        AdaptivePolicy { start: 10_000, growth: 4, cap: 10_000_000, rel_half_width: 0.2 }
    }
}

/// Grows the trial count until the relative precision target is met, `stop` returns true
/// for the running estimate, or the cap is reached. Earlier trials are reused.
pub fn adaptive_rate(
    protocol: &dyn Protocol,
    noise: NoiseModel,
    seed: u64,
    policy: AdaptivePolicy,
    stop: impl Fn(&Estimate) -> bool,
) -> Estimate {
    let mut n = policy.start.min(policy.cap);
    let mut fails = count_failures(protocol, noise, seed, 0, n);
    loop {
        let e = Estimate::from_counts(fails, n);
        let precise = e.failures > 0 && e.half_width() < policy.rel_half_width * e.rate;
        if precise || stop(&e) || n >= policy.cap {
            return e;
        }
        let next = (n * policy.growth).min(policy.cap);
        fails += count_failures(protocol, noise, seed, n, next);
        n = next;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub estimate: Estimate,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("p_e,rate,ci_low,ci_high,trials\n");
    for r in rows {
        s.push_str(&format!("{:e},{:e},{:e},{:e},{}\n", r.p, r.estimate.rate, r.estimate.ci_low, r.estimate.ci_high, r.estimate.trials));
    }
    s
}

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("no crossing in [{lo:e}, {hi:e}]: rate(lo) = {rate_lo:e}, rate(hi) = {rate_hi:e}")]
    OutOfRange { lo: f64, hi: f64, rate_lo: f64, rate_hi: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub p_star: f64,
    pub bracket: (f64, f64),
    pub evaluations: Vec<SweepRow>,
}

/// Sign of `rate(p) - p` decided by Monte Carlo; ties fall back to the point estimate.
fn above_diagonal(protocol: &dyn Protocol, p: f64, seed: u64, policy: AdaptivePolicy, log: &mut Vec<SweepRow>) -> bool {
    let e = adaptive_rate(protocol, NoiseModel::new(p).expect("p in range"), seed, policy, |e| e.ci_high < p || e.ci_low > p);
    log.push(SweepRow { p, estimate: e });
    e.rate > p
}

/// Bisection in log-space for `rate(p*) = p*`, bracketed to within `factor`.
pub fn pseudo_threshold(
    protocol: &dyn Protocol,
    seed: u64,
    range: (f64, f64),
    factor: f64,
    policy: AdaptivePolicy,
) -> Result<ThresholdResult, ThresholdError> {
    let (mut lo, mut hi) = range;
    let mut log = Vec::new();
    let lo_above = above_diagonal(protocol, lo, seed, policy, &mut log);
    let hi_above = above_diagonal(protocol, hi, seed, policy, &mut log);
    if lo_above || !hi_above {
        return Err(ThresholdError::OutOfRange { lo, hi, rate_lo: log[0].estimate.rate, rate_hi: log[1].estimate.rate });
    }
    while hi / lo > factor {
        let mid = (lo * hi).sqrt();
        if above_diagonal(protocol, mid, seed, policy, &mut log) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult { p_star: (lo * hi).sqrt(), bracket: (lo, hi), evaluations: log })
}

/// Leading-order coefficient `A` of `rate(p) ≈ A·p²` for protocols that tolerate every
/// single fault: the sum over unordered location pairs of the fraction of their fault
/// combinations that fail, estimated from `samples` uniformly drawn fault pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoefficient {
    pub value: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl PairCoefficient {
    pub fn rate(&self, p: f64) -> f64 {
        self.value * p * p
    }
}

pub fn pair_coefficient(protocol: &dyn Protocol, samples: u64, seed: u64) -> PairCoefficient {
    let sim = FrameSimulator::new(protocol.circuit());
    let locs = sim.locations();
    let n = locs.len();
    if n < 2 || samples == 0 {
        return PairCoefficient { value: 0.0, std_err: 0.0, samples };
    }
    let fails: u64 = (0..samples.div_ceil(64))
        .into_par_iter()
        .map(|b| {
            let mut faults = Vec::with_capacity(128);
            let lanes = (samples - b * 64).min(64) as u32;
            for lane in 0..lanes {
                let mut rng = trial_rng(seed, b * 64 + lane as u64);
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                for l in [i, j] {
                    let fault = rng.gen_range(0..locs[l].fault_count()) as u16;
                    faults.push(LaneFault { loc: l, lane, fault });
                }
            }
            faults.sort();
            let res = sim.run(&faults);
            (0..lanes).filter(|&l| protocol.failed(&res, l)).count() as u64
        })
        .sum();
    let pairs = (n * (n - 1) / 2) as f64;
    let frac = fails as f64 / samples as f64;
    PairCoefficient { value: pairs * frac, std_err: pairs * (frac * (1.0 - frac) / samples as f64).sqrt(), samples }
}

/// Least-squares slope of `ln(rate)` against `ln(p)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(p, r)| (p.ln(), r.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, MeasRole, OpKind};

    /// Repetition-free toy: one qubit idles `k` times, failure iff its final X bit is set.
    struct Idle {
        c: PhysicalCircuit,
    }

    impl Idle {
        fn new(k: usize) -> Self {
            let mut b = CircuitBuilder::new(1).without_idle_fill();
            for _ in 0..k {
                b.gate(OpKind::Identity, 0);
            }
            b.measure(0, MeasRole::Data);
            Idle { c: b.finish() }
        }
    }

    impl Protocol for Idle {
        fn circuit(&self) -> &PhysicalCircuit {
            &self.c
        }
        fn failed(&self, batch: &BatchResult, lane: u32) -> bool {
            (batch.records[0] >> lane) & 1 == 1
        }
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson(10, 1000);
        assert!(lo < 0.01 && 0.01 < hi);
        let (lo0, hi0) = wilson(0, 1000);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0 && hi0 < 0.005);
    }

    #[test]
    fn zero_noise_zero_rate() {
        let p = Idle::new(5);
        let e = logical_error_rate(&p, NoiseModel::noiseless(), 1000, 1);
        assert_eq!(e.failures, 0);
    }

    #[test]
    fn single_location_rate_matches_analytic() {
        // One identity then a measurement: X or Y from depolarizing (2/3 p) or measure flip (p).
        let p = Idle::new(1);
        let pe = 0.03;
        let e = logical_error_rate(&p, NoiseModel::new(pe).unwrap(), 200_000, 9);
        let exact = 2.0 / 3.0 * pe * (1.0 - pe) + pe * (1.0 - 2.0 / 3.0 * pe);
        assert!(e.ci_low <= exact && exact <= e.ci_high, "{e:?} vs {exact}");
    }

    #[test]
    fn deterministic_and_split_invariant() {
        let p = Idle::new(3);
        let n = NoiseModel::new(0.05).unwrap();
        let whole = count_failures(&p, n, 4, 0, 5000);
        let parts = count_failures(&p, n, 4, 0, 1234) + count_failures(&p, n, 4, 1234, 5000);
        assert_eq!(whole, parts);
        assert_eq!(whole, count_failures(&p, n, 4, 0, 5000));
    }

    #[test]
    fn slope_of_quadratic_is_two() {
        let pts: Vec<(f64, f64)> = [1e-3, 3e-4, 1e-4].iter().map(|&p| (p, 7.0 * p * p)).collect();
        assert!((log_log_slope(&pts) - 2.0).abs() < 1e-9);
    }

    /// Two qubits idling `k` steps each; fails iff both end with an X component.
    struct IdlePair {
        c: PhysicalCircuit,
    }

    impl Protocol for IdlePair {
        fn circuit(&self) -> &PhysicalCircuit {
            &self.c
        }
        fn failed(&self, batch: &BatchResult, lane: u32) -> bool {
            (batch.x[0] >> lane) & (batch.x[1] >> lane) & 1 == 1
        }
    }

    #[test]
    fn pair_coefficient_matches_counting() {
        let k = 3;
        let mut b = CircuitBuilder::new(2).without_idle_fill();
        for _ in 0..k {
            b.gate(OpKind::Identity, 0);
            b.gate(OpKind::Identity, 1);
        }
        let p = IdlePair { c: b.finish() };
        // k² cross pairs, each failing when both faults carry X: (2/3)².
        let exact = (k * k) as f64 * 4.0 / 9.0;
        let a = pair_coefficient(&p, 40_000, 3);
        assert!((a.value - exact).abs() < 4.0 * a.std_err, "{a:?} vs {exact}");
        assert_eq!(a, pair_coefficient(&p, 40_000, 3));
    }
}
