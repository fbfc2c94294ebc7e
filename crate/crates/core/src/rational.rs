//! Exact rational helpers shared by the estimators and the report code.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, One};

/// Converts an unsigned ratio into an arbitrary-precision one.
pub fn to_big<T: Into<BigInt> + Clone>(r: &Ratio<T>) -> BigRational {
    BigRational::new(r.numer().clone().into(), r.denom().clone().into())
}

/// Exact value of a finite `f64` as a rational.
pub fn big_from_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite float")
}

/// `estimate ∈ [(1-eps)·truth, (1+eps)·truth]`, evaluated without rounding.
///
/// `eps` is taken at its exact binary value.
pub fn within_relative(estimate: &BigRational, truth: &BigRational, eps: f64) -> bool {
    let e = big_from_f64(eps);
    let one = BigRational::one();
    let lo = truth * (&one - &e);
    let hi = truth * (&one + &e);
    *estimate >= lo && *estimate <= hi
}

pub fn ratio_to_f64<T: Into<BigInt> + Clone>(r: &Ratio<T>) -> f64 {
    use num_traits::ToPrimitive;
    to_big(r).to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_is_exact_at_the_edges() {
        let truth = to_big(&Ratio::new(8u64, 5));
        // 0.5 is exact in binary, so both interval ends are attainable.
        assert!(within_relative(&to_big(&Ratio::new(12u64, 5)), &truth, 0.5));
        assert!(within_relative(&to_big(&Ratio::new(4u64, 5)), &truth, 0.5));
        assert!(!within_relative(
            &to_big(&Ratio::new(1201u64, 500)),
            &truth,
            0.5
        ));
        // 0.1 is slightly above one tenth in binary, so 1.1·truth is inside.
        assert!(within_relative(
            &to_big(&Ratio::new(11u64, 10)),
            &to_big(&Ratio::from_integer(1u64)),
            0.1
        ));
    }
}
