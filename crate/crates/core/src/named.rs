//! Test functions and plot families addressed by name, for reproducible
//! command lines.
//!
//! ```text
//! bump             standard bump on [-1, 1]
//! bump[a,b]        bump on [a, b]
//! gauss            exp(-x^2)
//! plateau[B,w]     1 on [-B, B], smooth ramps of width w
//! poly[c0,c1,..]*F (c0 + c1 x + ..) F for F a bump or plateau
//! poly*bump        (1 + x) times the standard bump
//! ```

use std::sync::Arc;

use thiserror::Error;

use crate::testfn::{
    dilating_family, moving_bump_family, scaled_moving_family, steady_family, Gaussian, PlotFamily, Smooth,
    TestFunction,
};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("bad test function `{spec}`: {reason}")]
pub struct NameError {
    pub spec: String,
    pub reason: String,
}

pub const FAMILIES: &[&str] = &["steady", "moving", "scaled", "dilating"];

fn err(spec: &str, reason: impl Into<String>) -> NameError {
    NameError {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

/// Splits `name[a,b,..]` into the name and its numeric arguments.
fn call(spec: &str) -> Result<(&str, Vec<f64>), NameError> {
    let s = spec.trim();
    let Some(open) = s.find('[') else {
        return Ok((s, Vec::new()));
    };
    let inner = s[open + 1..]
        .strip_suffix(']')
        .ok_or_else(|| err(spec, "missing `]`"))?;
    let args = inner
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| err(spec, format!("`{}` is not a number", a.trim()))))
        .collect::<Result<Vec<_>, _>>()?;
    if args.iter().any(|a| !a.is_finite()) {
        return Err(err(spec, "arguments must be finite"));
    }
    Ok((s[..open].trim(), args))
}

fn profile(spec: &str) -> Result<TestFunction, NameError> {
    let (name, args) = call(spec)?;
    let bad = |e: crate::testfn::TestFnError| err(spec, e.to_string());
    match (name, args.as_slice()) {
        ("bump", []) => Ok(TestFunction::standard_bump()),
        ("bump", [a, b]) => TestFunction::bump(*a, *b).map_err(bad),
        ("plateau", []) => TestFunction::plateau(1.0, 1.0).map_err(bad),
        ("plateau", [h, w]) => TestFunction::plateau(*h, *w).map_err(bad),
        ("bump" | "plateau", _) => Err(err(spec, "expects two arguments")),
        _ => Err(err(spec, format!("unknown function `{name}`"))),
    }
}

/// Resolves a test-function name.
pub fn test_function(spec: &str) -> Result<Arc<dyn Smooth>, NameError> {
    let s = spec.trim();
    if s == "gauss" {
        return Ok(Arc::new(Gaussian::unit()));
    }
    if let Some((poly, base)) = s.split_once('*') {
        let (name, mut coeffs) = call(poly)?;
        if name != "poly" {
            return Err(err(spec, "a product must start with `poly`"));
        }
        if coeffs.is_empty() {
            coeffs = vec![1.0, 1.0];
        }
        return Ok(Arc::new(profile(base)?.mul_poly(&coeffs)));
    }
    Ok(Arc::new(profile(s)?))
}

pub fn family(name: &str) -> Option<PlotFamily> {
    match name {
        "steady" => Some(steady_family()),
        "moving" => Some(moving_bump_family()),
        "scaled" => Some(scaled_moving_family()),
        "dilating" => Some(dilating_family()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        let b = test_function("bump").unwrap();
        assert_eq!(b.value(0.0), (-1.0f64).exp());
        let b = test_function("bump[0, 2]").unwrap();
        assert_eq!(b.support(), Some((0.0, 2.0)));
        assert_eq!(test_function("gauss").unwrap().value(1.0), (-1.0f64).exp());
        let p = test_function("poly*bump").unwrap();
        assert_eq!(p.value(0.5), 1.5 * test_function("bump").unwrap().value(0.5));
        let p = test_function("poly[0,0,1]*bump[-2,2]").unwrap();
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(test_function("plateau[2,0.5]").unwrap().value(1.9), 1.0);
    }

    #[test]
    fn bad_names() {
        for s in ["bmp", "bump[1]", "bump[2,1]", "bump[a,b]", "bump[0,1", "gauss*bump", "plateau[-1,1]"] {
            assert!(test_function(s).is_err(), "{s}");
        }
    }
}
