//! Plain-data JSON forms of algebras and elements.
//!
//! An algebra is specified by `{"l", "r", "generators"}` where each generator
//! is a list of `{"exponents": [..], "coeff": x}` terms. The full document
//! adds the basis, ideal basis, structure constants and dual operators; an
//! element document is the algebra specification plus `coords` over the basis.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{MultiIndex, TruncatedPoly, WeilAlgebra, WeilElement, WeilError};

pub const ALGEBRA_SCHEMA: &str = "heatjet.weil-algebra/1";
pub const ELEMENT_SCHEMA: &str = "heatjet.weil-element/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

fn poly_terms(p: &TruncatedPoly) -> Vec<TermDoc> {
    p.terms()
        .map(|(a, c)| TermDoc {
            exponents: a.exponents().to_vec(),
            coeff: c,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub l: usize,
    pub r: usize,
    #[serde(default)]
    pub generators: Vec<Vec<TermDoc>>,
}

impl AlgebraSpec {
    pub fn from_algebra(a: &WeilAlgebra) -> Self {
        Self {
            l: a.nvars(),
            r: a.order(),
            generators: a.generators().iter().map(poly_terms).collect(),
        }
    }

    pub fn build(&self) -> Result<WeilAlgebra, WeilError> {
        let mut gens = Vec::with_capacity(self.generators.len());
        for (i, g) in self.generators.iter().enumerate() {
            let mut terms = Vec::with_capacity(g.len());
            for t in g {
                if t.exponents.len() != self.l {
                    return Err(WeilError::VariableCount {
                        expected: self.l,
                        got: t.exponents.len(),
                        generator: i,
                    });
                }
                terms.push((MultiIndex::new(t.exponents.clone()), t.coeff));
            }
            gens.push(TruncatedPoly::from_terms(self.l, self.r.max(1), terms));
        }
        WeilAlgebra::build(self.l, self.r, gens)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraDoc {
    pub schema: String,
    pub l: usize,
    pub r: usize,
    pub generators: Vec<Vec<TermDoc>>,
    pub dimension: usize,
    pub basis: Vec<Vec<u32>>,
    pub basis_display: Vec<String>,
    pub ideal_basis: Vec<Vec<TermDoc>>,
    /// `multiplication_table[i][j]` = coordinates of `h_i * h_j`.
    pub multiplication_table: Vec<Vec<Vec<f64>>>,
    /// Dual operators at 0; each term weight multiplies `d^exponents`.
    pub dual_operators: Vec<OperatorDoc>,
}

impl From<&WeilAlgebra> for AlgebraDoc {
    fn from(a: &WeilAlgebra) -> Self {
        let spec = AlgebraSpec::from_algebra(a);
        let basis = a.basis();
        Self {
            schema: ALGEBRA_SCHEMA.to_string(),
            l: spec.l,
            r: spec.r,
            generators: spec.generators,
            dimension: a.dim(),
            basis: basis.iter().map(|m| m.exponents().to_vec()).collect(),
            basis_display: basis.iter().map(|m| m.to_string()).collect(),
            ideal_basis: a.ideal_basis().iter().map(poly_terms).collect(),
            multiplication_table: a.table().to_vec(),
            dual_operators: a
                .dual_operators()
                .iter()
                .map(|d| OperatorDoc {
                    terms: d
                        .terms()
                        .iter()
                        .map(|(m, w)| TermDoc {
                            exponents: m.exponents().to_vec(),
                            coeff: *w,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementDoc {
    pub schema: String,
    pub algebra: AlgebraSpec,
    pub coords: Vec<f64>,
}

impl From<&WeilElement> for ElementDoc {
    fn from(e: &WeilElement) -> Self {
        Self {
            schema: ELEMENT_SCHEMA.to_string(),
            algebra: AlgebraSpec::from_algebra(e.algebra()),
            coords: e.coords().to_vec(),
        }
    }
}

impl ElementDoc {
    pub fn to_element(&self) -> Result<WeilElement, WeilError> {
        let a = Arc::new(self.algebra.build()?);
        WeilElement::from_coords(a, self.coords.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parabola_spec() -> AlgebraSpec {
        AlgebraSpec {
            l: 2,
            r: 3,
            generators: vec![vec![
                TermDoc { exponents: vec![2, 0], coeff: 1.0 },
                TermDoc { exponents: vec![0, 1], coeff: -1.0 },
            ]],
        }
    }

    #[test]
    fn algebra_document_fields() {
        let a = parabola_spec().build().unwrap();
        let doc = AlgebraDoc::from(&a);
        assert_eq!(doc.schema, ALGEBRA_SCHEMA);
        assert_eq!(doc.dimension, 3);
        assert_eq!(doc.basis_display, ["1", "s1", "s1^2"]);
        let v = serde_json::to_value(&doc).unwrap();
        assert_eq!(v["basis"][2], serde_json::json!([2, 0]));
    }

    #[test]
    fn bad_spec_is_rejected() {
        let mut spec = parabola_spec();
        spec.generators[0][0].exponents = vec![2];
        assert!(spec.build().is_err());
    }

    proptest! {
        #[test]
        fn element_documents_round_trip(c in proptest::collection::vec(-1e3f64..1e3, 3)) {
            let a = Arc::new(parabola_spec().build().unwrap());
            let e = WeilElement::from_coords(a, c).unwrap();
            let text = serde_json::to_string(&ElementDoc::from(&e)).unwrap();
            let back: ElementDoc = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_element().unwrap(), e);
        }
    }
}
