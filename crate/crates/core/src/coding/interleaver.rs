//! Seeded pseudo-random bit interleaver.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed permutation: position `i` of the interleaved stream carries
/// input position `perm[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interleaver {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Interleaver {
    /// Uniform random permutation of `len` positions from a Fisher-Yates
    /// shuffle seeded with `seed`.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::from_permutation(perm).unwrap()
    }

    pub fn identity(len: usize) -> Self {
        Self::from_permutation((0..len).collect()).unwrap()
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let mut inverse = vec![usize::MAX; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            if p >= perm.len() || inverse[p] != usize::MAX {
                return Err(Error::config("code.interleaver", "not a permutation"));
            }
            inverse[p] = i;
        }
        Ok(Self { perm, inverse })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.len(), "interleaver length mismatch");
        self.perm.iter().map(|&p| input[p]).collect()
    }

    pub fn deinterleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.len(), "interleaver length mismatch");
        self.inverse.iter().map(|&i| input[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seeded_permutation_is_reproducible() {
        assert_eq!(Interleaver::random(64, 9), Interleaver::random(64, 9));
        assert_ne!(Interleaver::random(64, 9), Interleaver::random(64, 10));
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Interleaver::from_permutation(vec![0, 0]).is_err());
        assert!(Interleaver::from_permutation(vec![2, 0]).is_err());
    }

    #[test]
    fn identity_is_noop() {
        let data = [3, 1, 4, 1, 5];
        assert_eq!(Interleaver::identity(5).interleave(&data), data);
    }

    proptest! {
        #[test]
        fn round_trip(len in 0usize..300, seed: u64) {
            let il = Interleaver::random(len, seed);
            let data: Vec<usize> = (0..len).collect();
            let mixed = il.interleave(&data);
            let mut sorted = mixed.clone();
            sorted.sort_unstable();
            prop_assert_eq!(&sorted, &data);
            prop_assert_eq!(il.deinterleave(&mixed), data);
        }
    }
}
