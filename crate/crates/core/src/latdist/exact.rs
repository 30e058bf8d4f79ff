//! Rational-arithmetic convolution, used to validate the floating-point path
//! on small supports.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{LatDistError, LatticeDistribution};

pub const MAX_EXACT_ATOMS: usize = 32;
pub const MAX_EXACT_N: usize = 64;

/// Exact `n`-fold convolution of a distribution with rational masses.
pub fn exact_convolution(
    atoms: &[(i64, BigRational)],
    n: usize,
) -> Result<BTreeMap<i64, BigRational>, LatDistError> {
    if atoms.len() > MAX_EXACT_ATOMS || n > MAX_EXACT_N {
        return Err(LatDistError::InvalidArgument(format!(
            "exact mode supports ≤ {MAX_EXACT_ATOMS} atoms and n ≤ {MAX_EXACT_N}"
        )));
    }
    let total: BigRational = atoms.iter().map(|a| a.1.clone()).sum();
    if total != BigRational::one() {
        return Err(LatDistError::BadMass(total.to_f64().unwrap_or(f64::NAN)));
    }
    let mut cur: BTreeMap<i64, BigRational> = BTreeMap::new();
    cur.insert(0, BigRational::one());
    for _ in 0..n {
        let mut next: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (v, p) in &cur {
            for (a, q) in atoms {
                let e = next.entry(v + a).or_insert_with(BigRational::zero);
                *e += p * q;
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// `num/den` as a rational.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Floating-point copy of a rational distribution.
pub fn to_float(atoms: &[(i64, BigRational)]) -> Result<LatticeDistribution, LatDistError> {
    LatticeDistribution::new(
        atoms
            .iter()
            .map(|(v, p)| (*v, p.to_f64().unwrap_or(f64::NAN)))
            .collect(),
    )
}
