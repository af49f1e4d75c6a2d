//! Ideal membership through dual differential operators, the reduction
//! formula, and the semi-Weil (pulled back) versions over sampled points.

use serde::Serialize;

use super::{MultiIndex, TruncatedPoly, WeilAlgebra, WeilError};
use crate::oracle::MultiOracle;

pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

/// Largest `|D^gamma f|` over the dual operators of the algebra. Zero iff
/// `f` lies in the ideal.
pub fn membership_defect<O: MultiOracle + ?Sized>(f: &O, w: &WeilAlgebra) -> Result<f64, WeilError> {
    check_arity(f.nvars(), w.nvars())?;
    let mut worst = 0.0f64;
    for d in w.dual_operators() {
        worst = worst.max(d.apply(f)?.abs());
    }
    Ok(worst)
}

/// `f` belongs to the ideal (up to `tol`): every dual operator annihilates it.
pub fn weak_membership<O: MultiOracle + ?Sized>(f: &O, w: &WeilAlgebra, tol: f64) -> Result<bool, WeilError> {
    Ok(membership_defect(f, w)? <= tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    /// `D^gamma f` for the quotient basis.
    pub quotient_coeffs: Vec<f64>,
    /// `E^pi f` for the ideal rows.
    pub ideal_coeffs: Vec<f64>,
    /// Largest `|d^alpha g(0)|`, `|alpha| < r`, for
    /// `g = f - sum D^gamma f h_gamma - sum E^pi f row_pi`.
    pub max_violation: f64,
    /// Same, using only the ideal rows; meaningful when `f` is in the ideal.
    pub ideal_part_violation: f64,
    pub in_ideal: bool,
    pub passed: bool,
}

/// Expands `f` in the dual system of the truncated space and measures how
/// far the remainder is from `M^r`.
pub fn reduction_check<O: MultiOracle + ?Sized>(f: &O, w: &WeilAlgebra, tol: f64) -> Result<ReductionReport, WeilError> {
    check_arity(f.nvars(), w.nvars())?;
    let origin = vec![0.0; w.nvars()];
    let quotient_coeffs = w
        .dual_operators()
        .iter()
        .map(|d| d.apply(f))
        .collect::<Result<Vec<_>, _>>()?;
    let ideal_coeffs = w
        .ideal_operators()
        .iter()
        .map(|d| d.apply(f))
        .collect::<Result<Vec<_>, _>>()?;

    let r = w.order();
    let l = w.nvars();
    let mut quotient_part = TruncatedPoly::zero(l, r);
    for (i, &c) in quotient_coeffs.iter().enumerate() {
        quotient_part = quotient_part.add(&w.basis_poly(i).scale(c));
    }
    let mut ideal_part = TruncatedPoly::zero(l, r);
    for (row, &e) in w.ideal_basis().iter().zip(&ideal_coeffs) {
        ideal_part = ideal_part.add(&row.scale(e));
    }
    let full = quotient_part.add(&ideal_part);

    let mut max_violation = 0.0f64;
    let mut ideal_part_violation = 0.0f64;
    for alpha in MultiIndex::all_below(l, r) {
        let df = f.partial(&alpha, &origin)?;
        max_violation = max_violation.max((df - full.partial_at(&alpha, &origin)).abs());
        ideal_part_violation = ideal_part_violation.max((df - ideal_part.partial_at(&alpha, &origin)).abs());
    }
    let in_ideal = quotient_coeffs.iter().all(|c| c.abs() <= tol);
    Ok(ReductionReport {
        quotient_coeffs,
        ideal_coeffs,
        max_violation,
        ideal_part_violation,
        in_ideal,
        passed: max_violation <= tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SemiWeilReport {
    pub member: bool,
    pub max_violation: f64,
    /// Sample at which the largest violation occurred.
    pub worst_sample: Vec<f64>,
    pub samples: usize,
}

/// Membership of `f(s, t)` on `R^(l+k)` in the pulled-back ideal `p*(I)`:
/// every dual operator, acting in `s` at `s = 0`, must vanish at each
/// sampled `t`. Sampling stands in for "all t"; it is a surrogate, not a proof.
pub fn semi_weil_membership<O: MultiOracle + ?Sized>(
    f: &O,
    w: &WeilAlgebra,
    t_samples: &[Vec<f64>],
    tol: f64,
) -> Result<SemiWeilReport, WeilError> {
    let k = check_samples(f.nvars(), w.nvars(), t_samples)?;
    let ops = w.dual_operators();
    let mut worst = 0.0f64;
    let mut worst_sample = vec![0.0; k];
    for t in t_samples {
        for d in &ops {
            let v = d.apply_partial(f, t)?.abs();
            if v > worst {
                worst = v;
                worst_sample = t.clone();
            }
        }
    }
    Ok(SemiWeilReport {
        member: worst <= tol,
        max_violation: worst,
        worst_sample,
        samples: t_samples.len(),
    })
}

/// Direct condition for `p*(M^r)`: `d^alpha f(0, t) / ds^alpha = 0` for all
/// `|alpha| < r` at each sample. Independent of any algebra construction.
pub fn vanishing_condition<O: MultiOracle + ?Sized>(
    f: &O,
    l: usize,
    r: usize,
    t_samples: &[Vec<f64>],
    tol: f64,
) -> Result<SemiWeilReport, WeilError> {
    let k = check_samples(f.nvars(), l, t_samples)?;
    let mut worst = 0.0f64;
    let mut worst_sample = vec![0.0; k];
    for t in t_samples {
        let mut at = vec![0.0; l];
        at.extend_from_slice(t);
        for alpha in MultiIndex::all_below(l, r) {
            let v = f.partial(&alpha.extend(k), &at)?.abs();
            if v > worst {
                worst = v;
                worst_sample = t.clone();
            }
        }
    }
    Ok(SemiWeilReport {
        member: worst <= tol,
        max_violation: worst,
        worst_sample,
        samples: t_samples.len(),
    })
}

/// For `f` in `p*(I)`: the remainder `f(s,t) - sum_pi (E^pi f)(t) row_pi(s)`
/// should have all `s`-derivatives of order `< r` vanish at `s = 0`.
/// Returns the largest violation over the samples.
pub fn semi_weil_reduction_defect<O: MultiOracle + ?Sized>(
    f: &O,
    w: &WeilAlgebra,
    t_samples: &[Vec<f64>],
) -> Result<f64, WeilError> {
    let k = check_samples(f.nvars(), w.nvars(), t_samples)?;
    let l = w.nvars();
    let rows = w.ideal_basis();
    let ops = w.ideal_operators();
    let origin = vec![0.0; l];
    let mut worst = 0.0f64;
    for t in t_samples {
        let mut part = TruncatedPoly::zero(l, w.order());
        for (row, op) in rows.iter().zip(&ops) {
            part = part.add(&row.scale(op.apply_partial(f, t)?));
        }
        let mut at = origin.clone();
        at.extend_from_slice(t);
        for alpha in MultiIndex::all_below(l, w.order()) {
            let df = f.partial(&alpha.extend(k), &at)?;
            worst = worst.max((df - part.partial_at(&alpha, &origin)).abs());
        }
    }
    Ok(worst)
}

/// Tensor grid of `n` Chebyshev-Lobatto points per axis on `[lo, hi]^k`.
pub fn chebyshev_grid(k: usize, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..n)
        .map(|i| {
            let c = if n == 1 {
                0.0
            } else {
                (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()
            };
            0.5 * (lo + hi) + 0.5 * (hi - lo) * c
        })
        .collect();
    let mut grid = vec![Vec::new()];
    for _ in 0..k {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    grid
}

/// 17 Chebyshev points per axis on `[-2, 2]`.
pub fn default_grid(k: usize) -> Vec<Vec<f64>> {
    chebyshev_grid(k, 17, -2.0, 2.0)
}

fn check_arity(got: usize, expected: usize) -> Result<(), WeilError> {
    if got != expected {
        return Err(WeilError::VariableCount {
            expected,
            got,
            generator: 0,
        });
    }
    Ok(())
}

fn check_samples(total: usize, l: usize, t_samples: &[Vec<f64>]) -> Result<usize, WeilError> {
    if t_samples.is_empty() {
        return Err(WeilError::EmptySamples);
    }
    if total < l {
        return Err(WeilError::VariableCount {
            expected: l,
            got: total,
            generator: 0,
        });
    }
    let k = total - l;
    if let Some(bad) = t_samples.iter().find(|t| t.len() != k) {
        return Err(WeilError::VariableCount {
            expected: k,
            got: bad.len(),
            generator: 0,
        });
    }
    Ok(k)
}
