//! Permutations in one-line notation, 0-based.

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::SizeMismatch(format!(
                    "images {images:?} are not a bijection"
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// The adjacent transposition swapping `i` and `i + 1` in `S_n`.
    pub fn adjacent(n: usize, i: usize) -> Self {
        assert!(i + 1 < n);
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(i, i + 1);
        Permutation { images }
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.size() != other.size() {
            return Err(Error::SizeMismatch(format!(
                "composing permutations of sizes {} and {}",
                self.size(),
                other.size()
            )));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.size()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    pub fn sign(&self) -> i64 {
        let mut inversions = 0usize;
        for i in 0..self.size() {
            for j in i + 1..self.size() {
                if self.images[i] > self.images[j] {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Writes the permutation as a product of adjacent transpositions:
    /// `self = s_{k_1} ∘ s_{k_2} ∘ … ∘ s_{k_r}` with indices returned in
    /// composition order.
    pub fn adjacent_decomposition(&self) -> Vec<usize> {
        // Bubble-sort the one-line notation; a swap at positions (i, i+1)
        // multiplies by s_i on the right, so the collected swaps give
        // self ∘ s_{i_1} ∘ … ∘ s_{i_r} = id, hence self = s_{i_r} ∘ … ∘ s_{i_1}.
        let mut w = self.images.clone();
        let mut swaps = Vec::new();
        loop {
            let mut swapped = false;
            for i in 0..w.len().saturating_sub(1) {
                if w[i] > w[i + 1] {
                    w.swap(i, i + 1);
                    swaps.push(i);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        swaps.reverse();
        swaps
    }

    /// All permutations of `S_n` in lexicographic order of images.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation {
                images: current.clone(),
            });
            // Next lexicographic permutation.
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1])
            else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        out
    }
}

/// Composes the permutation order of `a` after `b`, panicking on size
/// mismatch; convenience for internal callers that already checked sizes.
pub fn compose_perms(a: &Permutation, b: &Permutation) -> Permutation {
    a.compose(b).expect("permutation size mismatch")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent brute-force Cayley table for S_3: pairs of one-line
    /// notations composed by direct evaluation over all points.
    fn cayley_s3() -> Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> {
        let elems = Permutation::all(3);
        let mut table = Vec::new();
        for a in &elems {
            for b in &elems {
                let prod: Vec<usize> = (0..3).map(|i| a.apply(b.apply(i))).collect();
                table.push((a.images().to_vec(), b.images().to_vec(), prod));
            }
        }
        table
    }

    #[test]
    fn identity_is_neutral() {
        let s = Permutation::from_images(vec![1, 0, 2]).unwrap();
        let id = Permutation::identity(3);
        assert_eq!(id.compose(&s).unwrap(), s);
        assert_eq!(s.compose(&id).unwrap(), s);
    }

    #[test]
    fn transposition_squares_to_identity() {
        let t = Permutation::adjacent(2, 0);
        assert!(t.compose(&t).unwrap().is_identity());
    }

    #[test]
    fn composition_matches_cayley_table() {
        for (a, b, expected) in cayley_s3() {
            let pa = Permutation::from_images(a).unwrap();
            let pb = Permutation::from_images(b).unwrap();
            assert_eq!(pa.compose(&pb).unwrap().images(), &expected[..]);
        }
    }

    #[test]
    fn three_cycle_times_transposition() {
        // (0 1 2) ∘ (0 1) in S_3, verified against the Cayley oracle above.
        let cyc = Permutation::from_images(vec![1, 2, 0]).unwrap();
        let swap = Permutation::from_images(vec![1, 0, 2]).unwrap();
        let prod = cyc.compose(&swap).unwrap();
        let oracle: Vec<usize> = (0..3).map(|i| cyc.apply(swap.apply(i))).collect();
        assert_eq!(prod.images(), &oracle[..]);
        assert_eq!(prod.images(), &[2, 1, 0]);
    }

    #[test]
    fn size_mismatch_rejected() {
        let a = Permutation::identity(2);
        let b = Permutation::identity(3);
        assert!(a.compose(&b).is_err());
    }

    #[test]
    fn all_s4_has_24_elements() {
        let all = Permutation::all(4);
        assert_eq!(all.len(), 24);
        let set: std::collections::BTreeSet<_> = all.iter().map(|p| p.images().to_vec()).collect();
        assert_eq!(set.len(), 24);
    }

    proptest! {
        #[test]
        fn decomposition_rebuilds_permutation(seed in 0usize..720) {
            let p = Permutation::all(6)[seed].clone();
            let mut rebuilt = Permutation::identity(p.size());
            for k in p.adjacent_decomposition() {
                rebuilt = compose_perms(&rebuilt, &Permutation::adjacent(p.size(), k));
            }
            prop_assert_eq!(rebuilt, p);
        }

        #[test]
        fn inverse_composes_to_identity(seed in 0u64..5040) {
            let all = Permutation::all(4);
            let p = &all[(seed % all.len() as u64) as usize];
            prop_assert!(compose_perms(p, &p.inverse()).is_identity());
            prop_assert!(compose_perms(&p.inverse(), p).is_identity());
        }
    }
}
