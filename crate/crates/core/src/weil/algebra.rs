use std::collections::HashMap;
use std::fmt;

use super::{DiffOperator, MultiIndex, TruncatedPoly, WeilError};

/// Relative threshold below which an eliminated entry is treated as zero.
const RANK_TOL: f64 = 1e-12;

/// Finite-dimensional quotient `R[s_1..s_l] / (I + M^r)` for an ideal `I`
/// given by polynomial generators without constant term.
///
/// Monomials of order `< r` index the columns of the truncated polynomial
/// space. The ideal is stored as a reduced row-echelon basis whose pivot in
/// each row is its *lowest* monomial in graded order, so that classes are
/// represented by monomials of the highest possible order (the local
/// ordering natural for Weil algebras). Non-pivot monomials form the
/// quotient basis `h_gamma`.
#[derive(Clone, Debug)]
pub struct WeilAlgebra {
    l: usize,
    r: usize,
    generators: Vec<TruncatedPoly>,
    monomials: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    /// Reduced row-echelon rows, one per pivot, dense over `monomials`.
    ideal_rows: Vec<Vec<f64>>,
    pivots: Vec<usize>,
    /// Column indices of the quotient basis monomials.
    basis: Vec<usize>,
    /// For each basis element, the functional on coefficient vectors that
    /// reads its coordinate; vanishes on the ideal span.
    dual: Vec<Vec<f64>>,
    /// `table[i][j]` = coordinates of `h_i * h_j`.
    table: Vec<Vec<Vec<f64>>>,
}

impl PartialEq for WeilAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.l == other.l
            && self.r == other.r
            && self.pivots == other.pivots
            && self.ideal_rows == other.ideal_rows
    }
}

impl WeilAlgebra {
    /// Builds the quotient of degree-`< r` polynomials in `l` variables by
    /// the ideal generated by `generators` (together with `M^r`).
    pub fn build(l: usize, r: usize, generators: Vec<TruncatedPoly>) -> Result<Self, WeilError> {
        if r == 0 {
            return Err(WeilError::ZeroOrder);
        }
        for (i, g) in generators.iter().enumerate() {
            if g.nvars() != l {
                return Err(WeilError::VariableCount {
                    expected: l,
                    got: g.nvars(),
                    generator: i,
                });
            }
            let c = g.constant_term();
            if c != 0.0 {
                return Err(WeilError::ImproperIdeal {
                    generator: i,
                    constant: c,
                });
            }
        }
        let generators: Vec<TruncatedPoly> = generators.iter().map(|g| g.truncate(r)).collect();
        let monomials = MultiIndex::all_below(l, r);
        let index: HashMap<MultiIndex, usize> = monomials
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let ncols = monomials.len();

        // Spanning set of the ideal modulo M^r: generator times monomial.
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for g in &generators {
            for m in &monomials {
                let prod = g.mul(&TruncatedPoly::monomial(m.clone(), r, 1.0));
                if prod.is_zero() {
                    continue;
                }
                let mut row = vec![0.0; ncols];
                for (a, c) in prod.terms() {
                    row[index[a]] = c;
                }
                rows.push(row);
            }
        }

        let (ideal_rows, pivots) = row_reduce(rows, ncols);
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; ncols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let basis: Vec<usize> = (0..ncols).filter(|&c| !is_pivot[c]).collect();

        let dual: Vec<Vec<f64>> = basis
            .iter()
            .map(|&g| {
                let mut d = vec![0.0; ncols];
                d[g] = 1.0;
                for (row, &p) in ideal_rows.iter().zip(&pivots) {
                    d[p] = -row[g];
                }
                d
            })
            .collect();

        let dim = basis.len();
        let mut table = vec![vec![vec![0.0; dim]; dim]; dim];
        for i in 0..dim {
            for j in i..dim {
                let prod = monomials[basis[i]].add(&monomials[basis[j]]);
                if prod.order() as usize >= r {
                    continue;
                }
                let col = index[&prod];
                let coords: Vec<f64> = dual.iter().map(|d| d[col]).collect();
                table[i][j] = coords.clone();
                table[j][i] = coords;
            }
        }

        Ok(Self {
            l,
            r,
            generators,
            monomials,
            index,
            ideal_rows,
            pivots,
            basis,
            dual,
            table,
        })
    }

    /// `R[s]/(s^r)`-style pure truncation: `C^inf(R^l) / M^r`.
    pub fn truncated(l: usize, r: usize) -> Result<Self, WeilError> {
        Self::build(l, r, Vec::new())
    }

    /// Dual numbers `R[eps]/(eps^2)`.
    pub fn dual_numbers() -> Self {
        Self::truncated(1, 2).expect("valid")
    }

    pub fn nvars(&self) -> usize {
        self.l
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn generators(&self) -> &[TruncatedPoly] {
        &self.generators
    }

    /// Dimension of the ambient space of degree-`< r` polynomials.
    pub fn ambient_dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn ideal_dim(&self) -> usize {
        self.pivots.len()
    }

    /// Quotient basis monomials `h_gamma`, in graded order.
    pub fn basis(&self) -> Vec<MultiIndex> {
        self.basis.iter().map(|&c| self.monomials[c].clone()).collect()
    }

    pub fn basis_poly(&self, i: usize) -> TruncatedPoly {
        TruncatedPoly::monomial(self.monomials[self.basis[i]].clone(), self.r, 1.0)
    }

    /// Row-reduced basis of the ideal modulo `M^r`, as polynomials. Each row
    /// is `s^pivot + (higher-order non-pivot terms)`.
    pub fn ideal_basis(&self) -> Vec<TruncatedPoly> {
        self.ideal_rows.iter().map(|row| self.poly_from_dense(row)).collect()
    }

    pub fn ideal_pivots(&self) -> Vec<MultiIndex> {
        self.pivots.iter().map(|&p| self.monomials[p].clone()).collect()
    }

    /// Position of the class of `1` in the basis (always 0).
    pub fn unit_index(&self) -> usize {
        0
    }

    /// Structure constants: coordinates of `h_i * h_j`.
    pub fn table(&self) -> &[Vec<Vec<f64>>] {
        &self.table
    }

    pub(crate) fn dense(&self, p: &TruncatedPoly) -> Vec<f64> {
        let mut v = vec![0.0; self.monomials.len()];
        for (a, c) in p.terms() {
            if (a.order() as usize) < self.r {
                v[self.index[a]] = c;
            }
        }
        v
    }

    fn poly_from_dense(&self, v: &[f64]) -> TruncatedPoly {
        TruncatedPoly::from_terms(
            self.l,
            self.r,
            v.iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, &c)| (self.monomials[i].clone(), c)),
        )
    }

    /// Coordinates over the quotient basis of the class of `p`.
    pub fn reduce(&self, p: &TruncatedPoly) -> Result<Vec<f64>, WeilError> {
        if p.nvars() != self.l {
            return Err(WeilError::VariableCount {
                expected: self.l,
                got: p.nvars(),
                generator: 0,
            });
        }
        let v = self.dense(p);
        Ok(self.reduce_dense(&v))
    }

    pub(crate) fn reduce_dense(&self, v: &[f64]) -> Vec<f64> {
        self.dual
            .iter()
            .map(|d| d.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Differential operators `D^gamma` at 0, dual to the quotient basis and
    /// vanishing on the ideal. Normalization: the operator reading the
    /// coefficient of `s^alpha` is `d^alpha / alpha!`.
    pub fn dual_operators(&self) -> Vec<DiffOperator> {
        self.dual
            .iter()
            .map(|d| self.functional_to_operator(d))
            .collect()
    }

    /// Operators `E^pi` reading the ideal coordinates; together with
    /// [`dual_operators`](Self::dual_operators) they form a basis dual to
    /// `{h_gamma} u {ideal rows}` of the whole truncated space.
    pub fn ideal_operators(&self) -> Vec<DiffOperator> {
        self.pivots
            .iter()
            .map(|&p| {
                let mut d = vec![0.0; self.monomials.len()];
                d[p] = 1.0;
                self.functional_to_operator(&d)
            })
            .collect()
    }

    fn functional_to_operator(&self, d: &[f64]) -> DiffOperator {
        let terms = d
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(c, &w)| {
                let m = self.monomials[c].clone();
                let f = m.factorial();
                (m, w / f)
            })
            .collect();
        DiffOperator::new(vec![0.0; self.l], terms)
    }

    /// Matrix `[D^gamma(h_delta)]` computed through the dual functionals on
    /// coefficient vectors.
    pub fn duality_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|g| {
                (0..self.dim())
                    .map(|d| self.dual[g][self.basis[d]])
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for WeilAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let basis: Vec<String> = self.basis().iter().map(|m| m.to_string()).collect();
        write!(
            f,
            "Weil algebra (l={}, r={}, dim={}) basis {{{}}}",
            self.l,
            self.r,
            self.dim(),
            basis.join(", ")
        )
    }
}

/// Reduced row echelon form with columns taken in increasing order; the
/// pivot of each row is its first nonzero column. Partial pivoting within a
/// column. Returns the nonzero rows and their pivot columns.
fn row_reduce(mut rows: Vec<Vec<f64>>, ncols: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = RANK_TOL * scale.max(1.0);
    let mut pivots = Vec::new();
    let mut next = 0usize;
    for col in 0..ncols {
        if next == rows.len() {
            break;
        }
        let (best, best_abs) = (next..rows.len())
            .map(|i| (i, rows[i][col].abs()))
            .fold((next, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs <= tol {
            for row in rows.iter_mut().skip(next) {
                row[col] = 0.0;
            }
            continue;
        }
        rows.swap(next, best);
        let p = rows[next][col];
        for x in rows[next].iter_mut() {
            *x /= p;
        }
        rows[next][col] = 1.0;
        let pivot_row = rows[next].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == next {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                row[col] = 0.0;
            }
        }
        pivots.push(col);
        next += 1;
    }
    rows.truncate(next);
    for row in rows.iter_mut() {
        for x in row.iter_mut() {
            if x.abs() <= tol {
                *x = 0.0;
            }
        }
    }
    (rows, pivots)
}
