//! Bipartite projection between a vertex set `L` and the `(k-1)`-subsets of `V \ L`.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::hypergraph::Hypergraph;
use crate::subset::{unrank_into, BinomialTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    G,
    H,
}

/// `u ∈ L` is adjacent to right index `r` iff `{u} ∪ unrank(r)` is an edge, where
/// right indices are colex ranks of `(k-1)`-subsets of `V \ L` relabelled to `0..n-|L|`.
#[derive(Clone, Debug)]
pub struct BipartiteProjection {
    n: usize,
    left: Vec<usize>,
    right_count: usize,
    adjacency: Vec<FixedBitSet>,
    source: Source,
}

/// `L = {0, ..., floor(n/k) - 1}`.
pub fn default_left(n: usize, k: usize) -> Vec<usize> {
    (0..n / k).collect()
}

impl BipartiteProjection {
    /// Builds the projection of `x` for `L = left`; edges with `|e ∩ L| != 1` are ignored.
    pub fn build(x: &Hypergraph, left: &[usize], source: Source) -> Result<Self> {
        let (n, k) = (x.n(), x.k());
        if k < 2 {
            return invalid("projection needs k >= 2");
        }
        if left.len() != n / k {
            return invalid(format!(
                "|L| must be floor(n/k) = {}, got {}",
                n / k,
                left.len()
            ));
        }
        let mut position = vec![usize::MAX; n];
        for (i, &u) in left.iter().enumerate() {
            if u >= n || position[u] != usize::MAX {
                return invalid(format!("L contains {u} twice or out of range"));
            }
            position[u] = i;
        }
        // relabel V \ L to 0..n-|L| in ascending order
        let mut outside = vec![usize::MAX; n];
        let mut next = 0;
        for v in 0..n {
            if position[v] == usize::MAX {
                outside[v] = next;
                next += 1;
            }
        }
        let rest = n - left.len();
        let table = BinomialTable::new(rest, k - 1);
        let right_count = table.get(rest, k - 1);
        if right_count > u32::MAX as u64 {
            return invalid(format!(
                "projection right side C({rest},{}) too large",
                k - 1
            ));
        }
        let right_count = right_count as usize;
        let mut adjacency = vec![FixedBitSet::with_capacity(right_count); left.len()];
        let mut buf = vec![0usize; k];
        let mut right = vec![0usize; k - 1];
        for &rank in x.ranks() {
            unrank_into(rank, n, &mut buf);
            let mut owner = None;
            let mut inside = 0;
            let mut j = 0;
            for &v in &buf {
                if position[v] != usize::MAX {
                    inside += 1;
                    owner = Some(position[v]);
                } else if j < k - 1 {
                    right[j] = outside[v];
                    j += 1;
                }
            }
            if inside == 1 {
                // relabelling is monotone, so `right` stays sorted
                adjacency[owner.expect("one vertex in L")]
                    .insert(table.rank_sorted(&right) as usize);
            }
        }
        Ok(Self {
            n,
            left: left.to_vec(),
            right_count,
            adjacency,
            source,
        })
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    /// Number of vertices of the source hypergraph.
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn right_count(&self) -> usize {
        self.right_count
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// Neighborhood of the `i`-th left vertex.
    pub fn neighbors(&self, i: usize) -> &FixedBitSet {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].count_ones(..)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(|b| b.count_ones(..)).collect()
    }

    pub fn adjacent(&self, i: usize, r: usize) -> bool {
        self.adjacency[i].contains(r)
    }
}

/// `codeg(u, v)` for left position `i` of `pg` and `j` of `ph`.
pub fn codegree(pg: &BipartiteProjection, i: usize, ph: &BipartiteProjection, j: usize) -> usize {
    pg.adjacency[i].intersection_count(&ph.adjacency[j])
}

/// Row-major `|L| x |L|` codegree matrix.
pub fn codegree_matrix(pg: &BipartiteProjection, ph: &BipartiteProjection) -> Vec<Vec<u32>> {
    let m = ph.left.len();
    (0..pg.left.len())
        .into_par_iter()
        .map(|i| (0..m).map(|j| codegree(pg, i, ph, j) as u32).collect())
        .collect()
}
