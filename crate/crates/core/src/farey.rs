//! Coprime speeds in Farey order.

use crate::error::{Error, Result};
use crate::model::{RationalSpeed, MAX_DENOMINATOR};

/// All reduced fractions `p/q` in `(0, 1)` with `q ≤ q_max`, increasing.
pub fn farey_speeds(q_max: u32) -> Result<Vec<RationalSpeed>> {
    if !(2..=MAX_DENOMINATOR).contains(&q_max) {
        return Err(Error::InvalidParameter(format!(
            "q_max must lie in [2, {MAX_DENOMINATOR}], got {q_max}"
        )));
    }
    // Standard successor recurrence starting from 0/1, 1/q_max.
    let (mut a, mut b, mut c, mut d) = (0u32, 1u32, 1u32, q_max);
    let mut out = Vec::new();
    while c < d {
        out.push(RationalSpeed::new(c, d)?);
        let k = (q_max + b) / d;
        (a, b, c, d) = (c, d, k * c - a, k * d - b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gcd;

    #[test]
    fn small_sequences() {
        let f: Vec<String> = farey_speeds(5)
            .unwrap()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            f,
            ["1/5", "1/4", "1/3", "2/5", "1/2", "3/5", "2/3", "3/4", "4/5"]
        );
        assert_eq!(farey_speeds(2).unwrap().len(), 1);
        assert!(farey_speeds(1).is_err());
    }

    #[test]
    fn matches_brute_force_count_and_order() {
        for q_max in 2..=20u32 {
            let f = farey_speeds(q_max).unwrap();
            let brute = (2..=q_max as u64)
                .flat_map(|q| (1..q).filter(move |&p| gcd(p, q) == 1))
                .count();
            assert_eq!(f.len(), brute);
            assert!(f.windows(2).all(|w| w[0].value() < w[1].value()));
        }
    }
}
