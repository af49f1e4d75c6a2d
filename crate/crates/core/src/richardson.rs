//! Limits along geometric ladders `h_j = h_0 / ratio^j` by Richardson
//! extrapolation, with divergence detection.

use serde::Serialize;

/// Extrapolated limit of a ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub error: f64,
    /// Index of the last ladder point used.
    pub window_end: usize,
}

/// Richardson tableau on `values[j] = F(h_j)`, assuming
/// `F(h) = L + a_1 h + a_2 h^2 + ...`. Every window of `order + 1`
/// consecutive points gives an estimate eliminating `h .. h^order`; the
/// window whose estimate is most stable is returned.
pub fn richardson(values: &[f64], ratio: f64, order: usize) -> Option<LimitEstimate> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let order = order.min(n - 1);
    // t[i][m] eliminates h^1..h^m using points i-m..=i
    let mut t: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
    for m in 1..=order {
        let p = ratio.powi(m as i32);
        for i in m..n {
            let v = (p * t[i][m - 1] - t[i - 1][m - 1]) / (p - 1.0);
            t[i].push(v);
        }
    }
    let mut best: Option<LimitEstimate> = None;
    for i in order..n {
        let v = t[i][order];
        let mut err = if order > 0 { (v - t[i][order - 1]).abs() } else { f64::INFINITY };
        if i > order {
            err = err.max((v - t[i - 1][order]).abs());
        }
        if !v.is_finite() {
            continue;
        }
        // prefer the earliest window on ties
        if best.is_none_or(|b| err < b.error) {
            best = Some(LimitEstimate {
                value: v,
                error: err,
                window_end: i,
            });
        }
    }
    best
}

/// Whether a ladder of estimates grows without bound.
///
/// Either the magnitude exceeds `jump` times the first value, or the tail is
/// monotonically increasing in magnitude over at least `run` points with
/// increments that do not shrink (first-order convergence would halve them).
pub fn diverges(values: &[f64], jump: f64, run: usize) -> bool {
    let mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    if mags.iter().any(|m| !m.is_finite()) {
        return true;
    }
    let Some(&first) = mags.first() else { return false };
    let peak = mags.iter().copied().fold(0.0, f64::max);
    if peak > 1e-6 && peak > jump * first {
        return true;
    }
    let n = mags.len();
    let mut start = n.saturating_sub(1);
    while start > 0 && mags[start - 1] < mags[start] {
        start -= 1;
    }
    let tail = &mags[start..];
    if tail.len() < run {
        return false;
    }
    let inc: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = inc.windows(2).map(|w| w[1] / w[0]).collect();
    let mean_log = ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64;
    mean_log.exp() >= 0.8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_ladder_is_exact() {
        let vals: Vec<f64> = (0..12)
            .map(|j| {
                let h = 0.5f64.powi(j);
                3.0 + 2.0 * h - h * h + 0.5 * h.powi(3)
            })
            .collect();
        let e = richardson(&vals, 2.0, 4).unwrap();
        assert!((e.value - 3.0).abs() < 1e-13, "{e:?}");
    }

    #[test]
    fn smooth_ladder() {
        // (e^h - 1)/h -> 1
        let vals: Vec<f64> = (4..20).map(|j| {
            let h = 0.5f64.powi(j);
            h.exp_m1() / h
        }).collect();
        let e = richardson(&vals, 2.0, 4).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14 && e.error < 1e-12);
    }

    #[test]
    fn divergence() {
        let sqrt: Vec<f64> = (4..27).map(|j| 0.5 / 0.5f64.powi(j).sqrt()).collect();
        assert!(diverges(&sqrt, 1e8, 8));
        let log: Vec<f64> = (4..27).map(|j| 0.5f64.powi(j).ln()).collect();
        assert!(diverges(&log, 1e8, 8));
        let conv: Vec<f64> = (4..27).map(|j| -0.5 + 0.5f64.powi(j) / 12.0).collect();
        assert!(!diverges(&conv, 1e8, 8));
        let up: Vec<f64> = (4..27).map(|j| 1.0 - 0.5f64.powi(j)).collect();
        assert!(!diverges(&up, 1e8, 8));
        assert!(diverges(&[1.0, 2.0, f64::INFINITY], 1e8, 8));
    }
}
