use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A permutation of `{0..n-1}`; `map[i]` is the image of vertex `i`.
///
/// An L-bijection additionally records the set `L` it is allowed to move;
/// every vertex outside `L` is a fixed point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bijection {
    map: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    moved_set: Option<Vec<usize>>,
}

impl Bijection {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            moved_set: None,
        }
    }

    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return invalid(format!("{map:?} is not a permutation of 0..{n}"));
            }
        }
        Ok(Self {
            map,
            moved_set: None,
        })
    }

    /// Builds a bijection that may only permute the vertices of `moved`.
    pub fn with_moved_set(map: Vec<usize>, moved: &[usize]) -> Result<Self> {
        let mut b = Self::new(map)?;
        let n = b.map.len();
        let mut inside = vec![false; n];
        for &x in moved {
            if x >= n {
                return invalid(format!("vertex {x} of L out of range"));
            }
            inside[x] = true;
        }
        if let Some(x) = (0..n).find(|&x| !inside[x] && b.map[x] != x) {
            return invalid(format!("vertex {x} lies outside L but is moved"));
        }
        let mut set: Vec<usize> = moved.to_vec();
        set.sort_unstable();
        set.dedup();
        b.moved_set = Some(set);
        Ok(b)
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn moved_set(&self) -> Option<&[usize]> {
        self.moved_set.as_deref()
    }

    #[inline]
    pub fn image(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y] = x;
        }
        Self {
            map: inv,
            moved_set: self.moved_set.clone(),
        }
    }

    /// `other ∘ self`: first apply `self`, then `other`.
    pub fn then(&self, other: &Bijection) -> Result<Self> {
        if other.n() != self.n() {
            return invalid("bijection sizes differ");
        }
        Ok(Self {
            map: self.map.iter().map(|&y| other.map[y]).collect(),
            moved_set: None,
        })
    }

    /// True iff every vertex outside the recorded set is fixed (vacuous when untagged).
    pub fn respects_moved_set(&self) -> bool {
        match &self.moved_set {
            None => true,
            Some(set) => {
                let mut inside = vec![false; self.n()];
                set.iter().for_each(|&x| inside[x] = true);
                (0..self.n()).all(|x| inside[x] || self.map[x] == x)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Bijection::new(vec![1, 0, 2]).is_ok());
        assert!(Bijection::new(vec![1, 1, 2]).is_err());
        assert!(Bijection::new(vec![0, 3, 1]).is_err());
        assert!(Bijection::with_moved_set(vec![1, 0, 2], &[0, 1]).is_ok());
        assert!(Bijection::with_moved_set(vec![2, 1, 0], &[0, 1]).is_err());
    }

    #[test]
    fn inverse_and_composition() {
        let pi = Bijection::new(vec![1, 2, 0]).unwrap();
        let id = pi.then(&pi.inverse()).unwrap();
        assert_eq!(id, Bijection::identity(3));
        let sigma = Bijection::new(vec![0, 2, 1]).unwrap();
        let both = pi.then(&sigma).unwrap();
        for x in 0..3 {
            assert_eq!(both.image(x), sigma.image(pi.image(x)));
        }
    }
}
