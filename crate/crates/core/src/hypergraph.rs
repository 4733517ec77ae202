//! k-uniform hypergraphs stored as sorted sets of colex edge ranks.

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bijection::Bijection;
use crate::error::{invalid, Error, Result};
use crate::subset::{binomial, unrank_into, BinomialTable};
use crate::Rational;

/// Edge universes up to this size get a dense bitset view and per-edge sampling.
pub const DENSE_UNIVERSE_LIMIT: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    edges: Vec<u64>,
}

impl Hypergraph {
    pub fn empty(n: usize, k: usize) -> Result<Self> {
        Self::from_ranks(n, k, Vec::new())
    }

    pub fn complete(n: usize, k: usize) -> Result<Self> {
        let total = universe_size(n, k)?;
        Self::from_ranks(n, k, (0..total).collect())
    }

    /// Builds from arbitrary ranks; they are sorted and deduplicated.
    pub fn from_ranks(n: usize, k: usize, mut edges: Vec<u64>) -> Result<Self> {
        let total = universe_size(n, k)?;
        edges.sort_unstable();
        edges.dedup();
        if let Some(&last) = edges.last() {
            if last >= total {
                return invalid(format!("edge rank {last} out of range [0, {total})"));
            }
        }
        Ok(Self { n, k, edges })
    }

    /// Builds from vertex tuples in any order; each tuple is sorted first.
    pub fn from_tuples<I, T>(n: usize, k: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[usize]>,
    {
        universe_size(n, k)?;
        let mut ranks = Vec::new();
        for t in tuples {
            let mut t = t.as_ref().to_vec();
            if t.len() != k {
                return invalid(format!("edge {t:?} does not have {k} vertices"));
            }
            t.sort_unstable();
            ranks.push(crate::subset::rank_subset(&t, n)?);
        }
        Self::from_ranks(n, k, ranks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn ranks(&self) -> &[u64] {
        &self.edges
    }

    /// Number of possible edges, `C(n, k)`.
    pub fn universe(&self) -> u64 {
        binomial(self.n as u64, self.k as u64).expect("validated at construction")
    }

    pub fn contains_rank(&self, rank: u64) -> bool {
        self.edges.binary_search(&rank).is_ok()
    }

    /// Iterates edges as sorted vertex tuples in rank order.
    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.edges.iter().map(move |&r| {
            let mut t = vec![0; self.k];
            unrank_into(r, self.n, &mut t);
            t
        })
    }

    /// Dense membership view, available when `C(n, k) <= 2^24`.
    pub fn bitset(&self) -> Option<FixedBitSet> {
        let total = self.universe();
        if total > DENSE_UNIVERSE_LIMIT {
            return None;
        }
        let mut bits = FixedBitSet::with_capacity(total as usize);
        self.edges.iter().for_each(|&r| bits.insert(r as usize));
        Some(bits)
    }

    /// Exact `e(H) / C(n, k)`.
    pub fn edge_density(&self) -> Rational {
        Rational::new(self.edge_count() as i128, self.universe() as i128)
    }

    pub fn complement(&self) -> Self {
        let total = self.universe();
        let mut out = Vec::with_capacity((total - self.edge_count()) as usize);
        let mut present = self.edges.iter().peekable();
        for r in 0..total {
            if present.peek() == Some(&&r) {
                present.next();
            } else {
                out.push(r);
            }
        }
        Self {
            n: self.n,
            k: self.k,
            edges: out,
        }
    }

    /// Number of edges with all vertices inside `subset`.
    pub fn induced_edge_count(&self, subset: &VertexSubset) -> u64 {
        if subset.len() < self.k {
            return 0;
        }
        self.tuples()
            .filter(|t| t.iter().all(|&v| subset.contains(v)))
            .count() as u64
    }

    /// The image hypergraph `π(E)`.
    pub fn apply_bijection(&self, pi: &Bijection) -> Result<Self> {
        if pi.n() != self.n {
            return invalid(format!(
                "bijection on {} vertices applied to n = {}",
                pi.n(),
                self.n
            ));
        }
        let table = BinomialTable::new(self.n, self.k);
        let mut buf = vec![0usize; self.k];
        let edges = self
            .edges
            .iter()
            .map(|&r| image_rank(r, self.n, pi, &table, &mut buf))
            .collect();
        Self::from_ranks(self.n, self.k, edges)
    }

    /// Samples `H^k(n, p)`: every possible edge independently with probability `p`.
    ///
    /// Universes up to 2^24 draw one uniform per candidate edge; larger ones
    /// sample geometric gaps between successive edges.
    pub fn sample(n: usize, k: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("edge probability {p} outside [0, 1]"));
        }
        let total = universe_size(n, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        if total <= DENSE_UNIVERSE_LIMIT {
            for r in 0..total {
                if rng.gen::<f64>() < p {
                    edges.push(r);
                }
            }
        } else if p >= 1.0 {
            edges.extend(0..total);
        } else if p > 0.0 {
            let log_miss = (-p).ln_1p();
            let mut next: u64 = 0;
            loop {
                let u = 1.0 - rng.gen::<f64>();
                let gap = (u.ln() / log_miss).floor();
                if gap >= (total - next) as f64 {
                    break;
                }
                next += gap as u64;
                edges.push(next);
                next += 1;
                if next >= total {
                    break;
                }
            }
        }
        Ok(Self { n, k, edges })
    }
}

pub(crate) fn universe_size(n: usize, k: usize) -> Result<u64> {
    if k < 1 || k > n {
        return invalid(format!("need 1 <= k <= n, got k = {k}, n = {n}"));
    }
    binomial(n as u64, k as u64)
        .ok_or_else(|| Error::InvalidInput(format!("C({n},{k}) overflows u64")))
}

#[inline]
pub(crate) fn image_rank(
    rank: u64,
    n: usize,
    pi: &Bijection,
    table: &BinomialTable,
    buf: &mut [usize],
) -> u64 {
    unrank_into(rank, n, buf);
    buf.iter_mut().for_each(|v| *v = pi.image(*v));
    buf.sort_unstable();
    table.rank_sorted(buf)
}

/// `|π(E(G)) ∩ E(H)|`.
pub fn overlap(g: &Hypergraph, pi: &Bijection, h: &Hypergraph) -> Result<u64> {
    if g.n != h.n || g.k != h.k {
        return invalid(format!(
            "shape mismatch: G is ({}, {}), H is ({}, {})",
            g.n, g.k, h.n, h.k
        ));
    }
    if pi.n() != g.n {
        return invalid("bijection size differs from n");
    }
    let table = BinomialTable::new(g.n, g.k);
    let mut buf = vec![0usize; g.k];
    let count = match h.bitset() {
        Some(bits) => g
            .edges
            .iter()
            .filter(|&&r| bits.contains(image_rank(r, g.n, pi, &table, &mut buf) as usize))
            .count(),
        None => g
            .edges
            .iter()
            .filter(|&&r| h.contains_rank(image_rank(r, g.n, pi, &table, &mut buf)))
            .count(),
    };
    Ok(count as u64)
}

/// A subset of the vertex set `{0..n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSubset {
    members: FixedBitSet,
}

impl VertexSubset {
    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        let mut bits = FixedBitSet::with_capacity(n);
        for &v in members {
            if v >= n {
                return invalid(format!("vertex {v} out of range for n = {n}"));
            }
            bits.insert(v);
        }
        Ok(Self { members: bits })
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        Self { members: bits }
    }

    pub(crate) fn from_mask(n: usize, mask: u64) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .for_each(|i| bits.insert(i));
        Self { members: bits }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(v)
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn members(&self) -> Vec<usize> {
        self.members.ones().collect()
    }
}
