//! Multi-indices over the spacetime components.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector `(e_0, ..., e_{n-1})` with componentwise arithmetic.
///
/// Ordering is lexicographic, which makes `BTreeMap` keys canonical.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, mu: usize) -> Self {
        let mut e = vec![0; n];
        e[mu] = 1;
        Self(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, mu: usize) -> u32 {
        self.0[mu]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn bump(&self, mu: usize, by: u32) -> Self {
        let mut e = self.0.clone();
        e[mu] += by;
        Self(e)
    }

    /// Componentwise subtraction; `None` when any component would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Self(out))
    }

    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise minimum.
    pub fn min_with(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.min(b))
                .collect(),
        )
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices in `n` variables with total degree at most `max_degree`,
/// in lexicographic order.
pub fn indices_up_to(n: usize, max_degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    collect(&mut out, &mut current, 0, max_degree);
    out.sort();
    out
}

fn collect(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, budget: u32) {
    if pos == current.len() {
        out.push(MultiIndex(current.clone()));
        return;
    }
    for e in 0..=budget {
        current[pos] = e;
        collect(out, current, pos + 1, budget - e);
    }
    current[pos] = 0;
}

/// Falling factorial `w (w-1) ... (w-k+1)` as a u64 (small exponents only).
pub fn falling_factorial(w: u32, k: u32) -> u64 {
    let mut acc = 1u64;
    for j in 0..k {
        acc *= (w - j) as u64;
    }
    acc
}

/// Binomial coefficient for small arguments.
pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for j in 0..k {
        acc = acc * (n - j) as u64 / (j + 1) as u64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        // degree <= 3 in 2 variables: C(5,2) = 10
        assert_eq!(indices_up_to(2, 3).len(), 10);
        // degree <= 6 in 4 variables: C(10,4) = 210
        assert_eq!(indices_up_to(4, 6).len(), 210);
    }

    #[test]
    fn checked_sub_spots_underflow() {
        let a = MultiIndex(vec![2, 1]);
        let b = MultiIndex(vec![1, 2]);
        assert_eq!(a.checked_sub(&b), None);
        assert_eq!(
            a.checked_sub(&MultiIndex(vec![1, 1])),
            Some(MultiIndex(vec![1, 0]))
        );
    }

    #[test]
    fn small_combinatorics() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(falling_factorial(5, 3), 60);
        assert_eq!(falling_factorial(3, 0), 1);
    }
}
