use serde::Serialize;

use crate::decomp::{decompose, DecompError};
use crate::subfn::SubmodularSpec;
use crate::subset::GroundSubset;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinRatio {
    /// `min g(S) / b(S)` over nonempty `S`
    pub ratio: f64,
    /// the largest set attaining it
    pub set: GroundSubset,
    pub minimization_count: usize,
}

/// Minimum ratio `g(S) / b(S)`, read from the first block of the chain.
pub fn min_ratio(spec: &SubmodularSpec, b: &[f64]) -> Result<MinRatio, DecompError> {
    let chain = decompose(spec, b)?;
    match chain.breakpoints().first() {
        Some(&ratio) => Ok(MinRatio {
            ratio,
            set: chain.set(1),
            minimization_count: chain.minimization_count,
        }),
        None => Err(DecompError::InvalidParameter(
            "minimum ratio needs a nonempty ground set".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_element_table() {
        let spec = SubmodularSpec::from_table(2, vec![0.0, 1.0, 3.0, 3.0]).unwrap();
        let best = min_ratio(&spec, &[1.0, 1.0]).unwrap();
        assert_eq!(best.ratio, 1.0);
        assert_eq!(best.set, GroundSubset::from([0]));
    }

    #[test]
    fn modular() {
        let b = [1.0, 2.0, 4.0];
        let spec = SubmodularSpec::from_transformed_cut(3, &[], &[3.0, 6.0, 12.0]).unwrap();
        let best = min_ratio(&spec, &b).unwrap();
        assert_eq!(best.ratio, 3.0);
        assert_eq!(best.set, GroundSubset::full(3));
    }
}
