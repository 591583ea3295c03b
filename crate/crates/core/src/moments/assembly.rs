//! Termwise integration of `L2`: exact leading coefficients of the
//! variance.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::lemma52::lemma52_prediction;
use crate::{Error, Result};

/// Predicted torus integral `inv_n / N + inv_n2 / N^2` of one `L2` term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralPrediction {
    pub name: &'static str,
    pub inv_n: BigRational,
    pub inv_n2: BigRational,
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

/// `L2` terms with their weights, in the order of the expansion.
const L2_TERMS: [(&str, (i64, i64)); 11] = [
    ("int_r2", (1, 2)),
    ("int_trX", (1, 3)),
    ("int_trY2", (1, 18)),
    ("int_r4", (3, 8)),
    ("int_trXY2", (-1, 45)),
    ("int_trX2", (-1, 45)),
    ("int_trY4", (1, 900)),
    ("int_trY2_sq", (1, 1800)),
    ("int_trX_trY2", (-1, 90)),
    ("int_r2trX", (1, 6)),
    ("int_r2trY2", (1, 36)),
];

/// Predicted leading terms for every integral entering `L2`: `int r^2 = 1/N`
/// and `int r^4 ~ 3/N^2` from the exact correlation sums, the rest from the
/// trace-invariant predictions.
pub fn l2_integral_predictions() -> Vec<IntegralPrediction> {
    // Position of each L2 term among the trace-invariant predictions.
    let source = [None, Some(0), Some(1), None, Some(2), Some(3), Some(4), Some(5), Some(6), Some(7), Some(8)];
    L2_TERMS
        .iter()
        .zip(source)
        .map(|(&(name, _), src)| {
            let (a, b) = match (name, src) {
                ("int_r2", _) => ((1, 1), (0, 1)),
                ("int_r4", _) => ((0, 1), (3, 1)),
                (_, Some(k)) => {
                    let (a, b, _) = lemma52_prediction(k);
                    (a, b)
                }
                _ => unreachable!(),
            };
            IntegralPrediction { name, inv_n: q(a.0, a.1), inv_n2: q(b.0, b.1) }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyTerm {
    pub name: String,
    pub weight: String,
    pub coeff_1_over_n: String,
    pub coeff_1_over_n2: String,
}

/// Exact leading coefficients of `int L2 / (4/pi^2)` and of the variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingTermAssembly {
    pub terms: Vec<AssemblyTerm>,
    /// Coefficient of `1/N`; zero.
    #[serde(with = "rational_string")]
    pub coeff_1_over_n: BigRational,
    /// Coefficient of `1/N^2`.
    #[serde(with = "rational_string")]
    pub coeff_1_over_n2: BigRational,
    /// Coefficient of `m/N^2` in the variance, `(E/3)(4/pi^2)/m` times
    /// `coeff_1_over_n2`.
    #[serde(with = "rational_string")]
    pub constant: BigRational,
    /// Error classes dropped by the assembly.
    pub residual: String,
}

mod rational_string {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Combines the predicted integrals with the `L2` weights in rational
/// arithmetic.
pub fn assemble_leading_constant(predictions: &[IntegralPrediction]) -> Result<LeadingTermAssembly> {
    let mut terms = Vec::with_capacity(L2_TERMS.len());
    let (mut c1, mut c2) = (BigRational::zero(), BigRational::zero());
    for &(name, (p, d)) in &L2_TERMS {
        let pred = predictions
            .iter()
            .find(|x| x.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("missing prediction for {name}")))?;
        let w = q(p, d);
        let (t1, t2) = (&w * &pred.inv_n, &w * &pred.inv_n2);
        c1 += &t1;
        c2 += &t2;
        terms.push(AssemblyTerm {
            name: name.to_string(),
            weight: w.to_string(),
            coeff_1_over_n: t1.to_string(),
            coeff_1_over_n2: t2.to_string(),
        });
    }
    let constant = q(16, 3) * &c2;
    Ok(LeadingTermAssembly {
        terms,
        coeff_1_over_n: c1,
        coeff_1_over_n2: c2,
        constant,
        residual: "O(|X(4)|/N^4 + |C(6)|/N^6 + m^(-1/28)/N^2) from the integrals; O(r^6 + tr X^3 + tr Y^6) \
                   from truncating L2; the singular set"
            .to_string(),
    })
}
