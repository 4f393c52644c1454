//! Gait and rhythm metrics computed from spike counts and session series.

use crate::cpg::N_LIMBS;

/// Trailing moving average; the first `window - 1` samples average what is
/// available.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        sum += x;
        if i >= window {
            sum -= xs[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// Pearson correlation; 0 when either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let (a, b) = (&a[..n], &b[..n]);
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Diagonal synchrony of the thigh extensors: 3 for a perfect trot, −1 for a
/// perfect pace or bound.
///
/// `series[t][limb]` is the extensor spike count of each limb (FR, FL, RR, RL)
/// at step `t`. Counts are smoothed with a `smooth`-step moving average, then
/// `(c(FR,RL) + c(FL,RR) − c(FR,FL) − c(FR,RR) − c(RL,FL) − c(RL,RR)) / 2`.
pub fn trot_index(series: &[[u32; N_LIMBS]], smooth: usize) -> f64 {
    let limb: Vec<Vec<f64>> = (0..N_LIMBS)
        .map(|l| moving_average(&series.iter().map(|s| s[l] as f64).collect::<Vec<_>>(), smooth))
        .collect();
    let c = |i: usize, j: usize| pearson(&limb[i], &limb[j]);
    let (fr, fl, rr, rl) = (0, 1, 2, 3);
    (c(fr, rl) + c(fl, rr) - c(fr, fl) - c(fr, rr) - c(rl, fl) - c(rl, rr)) / 2.0
}

/// Trailing average over sessions, as used by the analysis report.
pub fn sliding_average(xs: &[f64], window: usize) -> Vec<f64> {
    moving_average(xs, window)
}

/// Alternation statistics of a flexor/extensor pool pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alternation {
    /// Fraction of steps with either pool active where both were active.
    pub coactivation: f64,
    /// Complete flexor→extensor→flexor cycles.
    pub cycles: usize,
    /// Number of bursts of either pool.
    pub bursts: usize,
}

/// A pool is active at a step if it fired within the last `hold` steps.
pub fn activity(counts: &[u32], hold: usize) -> Vec<bool> {
    let mut last: Option<usize> = None;
    counts
        .iter()
        .enumerate()
        .map(|(t, &c)| {
            if c > 0 {
                last = Some(t);
            }
            matches!(last, Some(s) if t - s < hold)
        })
        .collect()
}

pub fn alternation(flexor: &[u32], extensor: &[u32], hold: usize) -> Alternation {
    let fa = activity(flexor, hold);
    let ea = activity(extensor, hold);
    let (mut either, mut both) = (0usize, 0usize);
    for (&f, &e) in fa.iter().zip(&ea) {
        either += (f || e) as usize;
        both += (f && e) as usize;
    }
    // Sequence of burst onsets, labelled by pool.
    let mut onsets = Vec::new();
    for t in 0..fa.len() {
        let prev = |v: &[bool]| t > 0 && v[t - 1];
        if fa[t] && !prev(&fa) {
            onsets.push(0u8);
        }
        if ea[t] && !prev(&ea) {
            onsets.push(1u8);
        }
    }
    let bursts = onsets.len();
    onsets.dedup();
    Alternation {
        coactivation: if either == 0 { 0.0 } else { both as f64 / either as f64 },
        cycles: onsets.len().saturating_sub(1) / 2,
        bursts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_of_constant() {
        assert!(moving_average(&[3.0; 20], 5).iter().all(|&v| v == 3.0));
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.0, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn pearson_cases() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &a) - 1.0).abs() < 1e-12);
        assert!((pearson(&a, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&a, &[1.0; 4]), 0.0);
    }

    fn square(t: usize, period: usize, phase: usize) -> u32 {
        (((t + phase) / (period / 2)) % 2 == 0) as u32 * 3
    }

    #[test]
    fn perfect_trot_is_maximal() {
        let series: Vec<[u32; 4]> = (0..4000)
            .map(|t| {
                let a = square(t, 400, 0);
                let b = square(t, 400, 200);
                [a, b, b, a]
            })
            .collect();
        assert!((trot_index(&series, 50) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn pace_and_bound_are_negative() {
        let pace: Vec<[u32; 4]> = (0..4000)
            .map(|t| {
                let a = square(t, 400, 0);
                let b = square(t, 400, 200);
                [a, b, a, b]
            })
            .collect();
        assert!((trot_index(&pace, 50) + 1.0).abs() < 1e-9);
        let bound: Vec<[u32; 4]> = (0..4000)
            .map(|t| {
                let a = square(t, 400, 0);
                let b = square(t, 400, 200);
                [a, a, b, b]
            })
            .collect();
        assert!((trot_index(&bound, 50) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn alternating_bursts_counted() {
        let f: Vec<u32> = (0..1000).map(|t| ((t / 50) % 2 == 0) as u32).collect();
        let e: Vec<u32> = (0..1000).map(|t| ((t / 50) % 2 == 1) as u32).collect();
        let a = alternation(&f, &e, 1);
        assert_eq!(a.coactivation, 0.0);
        assert_eq!(a.bursts, 20);
        assert_eq!(a.cycles, 9);
    }

    #[test]
    fn tonic_pair_is_coactive() {
        let x = vec![1u32; 500];
        let a = alternation(&x, &x, 5);
        assert_eq!(a.coactivation, 1.0);
        assert_eq!(a.cycles, 0);
    }
}
