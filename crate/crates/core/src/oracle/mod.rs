//! Brute-force ground truth for `disc(H)`, `disc(G, H)` and its one-sided parts.

pub mod distributions;
mod saddle;

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::bijection::Bijection;
use crate::error::{invalid, Error, Result};
use crate::hypergraph::{overlap, Hypergraph};
use crate::report::{DiscrepancyReport, Provenance, Witness};
use crate::subset::{binomial, BinomialTable};
use crate::Rational;

pub use distributions::{
    binom_tail, binom_tail_exact, binom_tail_ln, hypergeom_pmf, hypergeom_pmf_exact,
    hypergeom_pmf_ln, hypergeom_upper_tail,
};

pub const PAIR_GUARD: usize = 10;
pub const SUBSET_GUARD: usize = 20;
pub const REDUCTION_GUARD: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Enumeration {
    /// Every permutation in lexicographic order, overlap recomputed from scratch.
    #[default]
    Plain,
    /// Depth-first lexicographic search that skips subtrees whose partial
    /// overlap bounds cannot improve either extreme.
    BranchAndBound,
}

#[derive(Clone, Copy, Debug)]
pub struct PairOptions {
    pub guard: usize,
    pub enumeration: Enumeration,
    /// Split the plain enumeration by the image of vertex 0 across threads.
    pub parallel: bool,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self {
            guard: PAIR_GUARD,
            enumeration: Enumeration::Plain,
            parallel: false,
        }
    }
}

/// Extreme overlaps over a set of bijections, each with its first witness in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Extremes {
    max: u64,
    argmax: Vec<usize>,
    min: u64,
    argmin: Vec<usize>,
}

impl Extremes {
    fn seed(count: u64, map: &[usize]) -> Self {
        Self {
            max: count,
            argmax: map.to_vec(),
            min: count,
            argmin: map.to_vec(),
        }
    }

    fn observe(&mut self, count: u64, map: &[usize]) {
        if count > self.max {
            self.max = count;
            self.argmax.copy_from_slice(map);
        }
        if count < self.min {
            self.min = count;
            self.argmin.copy_from_slice(map);
        }
    }

    /// Merge with a block that comes later in enumeration order.
    fn merge_later(mut self, later: Extremes) -> Self {
        if later.max > self.max {
            self.max = later.max;
            self.argmax = later.argmax;
        }
        if later.min < self.min {
            self.min = later.min;
            self.argmin = later.argmin;
        }
        self
    }
}

struct PairContext {
    n: usize,
    g_tuples: Vec<Vec<usize>>,
    h_bits: FixedBitSet,
    table: BinomialTable,
}

impl PairContext {
    fn new(g: &Hypergraph, h: &Hypergraph) -> Self {
        Self {
            n: g.n(),
            g_tuples: g.tuples().collect(),
            h_bits: h.bitset().expect("oracle sizes have dense bitsets"),
            table: BinomialTable::new(g.n(), g.k()),
        }
    }

    fn overlap(&self, map: &[usize], buf: &mut [usize]) -> u64 {
        self.g_tuples
            .iter()
            .filter(|t| {
                for (slot, &v) in buf.iter_mut().zip(t.iter()) {
                    *slot = map[v];
                }
                buf.sort_unstable();
                self.h_bits.contains(self.table.rank_sorted(buf) as usize)
            })
            .count() as u64
    }

    /// Lexicographic scan over all permutations whose prefix is `map[..fixed]`.
    fn scan(&self, mut map: Vec<usize>, fixed: usize) -> Extremes {
        let mut buf = vec![0usize; self.g_tuples.first().map_or(0, Vec::len)];
        let mut ext = Extremes::seed(self.overlap(&map, &mut buf), &map);
        while next_permutation(&mut map[fixed..]) {
            let c = self.overlap(&map, &mut buf);
            ext.observe(c, &map);
        }
        ext
    }

    fn plain(&self) -> Extremes {
        self.scan((0..self.n).collect(), 0)
    }

    fn plain_parallel(&self) -> Extremes {
        let blocks: Vec<Extremes> = (0..self.n)
            .into_par_iter()
            .map(|first| {
                let mut map = vec![first];
                map.extend((0..self.n).filter(|&v| v != first));
                self.scan(map, 1)
            })
            .collect();
        blocks
            .into_iter()
            .reduce(Extremes::merge_later)
            .expect("n >= 1")
    }

    fn branch_and_bound(&self) -> Extremes {
        // edges become fully mapped once their largest vertex is assigned
        let mut closing: Vec<Vec<&[usize]>> = vec![Vec::new(); self.n];
        for t in &self.g_tuples {
            closing[*t.last().expect("k >= 1")].push(t);
        }
        let mut open_after = vec![0u64; self.n];
        let mut open = self.g_tuples.len() as u64;
        for d in 0..self.n {
            open -= closing[d].len() as u64;
            open_after[d] = open;
        }
        let mut state = BnbState {
            ctx: self,
            closing,
            open_after,
            map: vec![usize::MAX; self.n],
            used: vec![false; self.n],
            buf: vec![0; self.g_tuples.first().map_or(0, Vec::len)],
            best: None,
        };
        state.descend(0, 0);
        state.best.expect("at least one permutation")
    }
}

struct BnbState<'a> {
    ctx: &'a PairContext,
    closing: Vec<Vec<&'a [usize]>>,
    open_after: Vec<u64>,
    map: Vec<usize>,
    used: Vec<bool>,
    buf: Vec<usize>,
    best: Option<Extremes>,
}

impl BnbState<'_> {
    fn descend(&mut self, depth: usize, counted: u64) {
        let n = self.ctx.n;
        if depth == n {
            match &mut self.best {
                None => self.best = Some(Extremes::seed(counted, &self.map)),
                Some(best) => best.observe(counted, &self.map),
            }
            return;
        }
        for image in 0..n {
            if self.used[image] {
                continue;
            }
            self.used[image] = true;
            self.map[depth] = image;
            let mut here = counted;
            for t in &self.closing[depth] {
                for (slot, &v) in self.buf.iter_mut().zip(t.iter()) {
                    *slot = self.map[v];
                }
                self.buf.sort_unstable();
                if self
                    .ctx
                    .h_bits
                    .contains(self.ctx.table.rank_sorted(&self.buf) as usize)
                {
                    here += 1;
                }
            }
            let hopeless = self
                .best
                .as_ref()
                .is_some_and(|b| here + self.open_after[depth] <= b.max && here >= b.min);
            if !hopeless {
                self.descend(depth + 1, here);
            }
            self.used[image] = false;
        }
        self.map[depth] = usize::MAX;
    }
}

/// Advances to the next permutation in lexicographic order; false at the last one.
pub(crate) fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `ρ_G ρ_H C(n, k) = e(G) e(H) / C(n, k)`.
pub fn pair_baseline(g: &Hypergraph, h: &Hypergraph) -> Rational {
    Rational::new(
        g.edge_count() as i128 * h.edge_count() as i128,
        g.universe() as i128,
    )
}

/// Exact `disc(G, H)` with `disc+` and `disc-` by enumerating all `n!` bijections.
pub fn exact_disc_pair(g: &Hypergraph, h: &Hypergraph) -> Result<DiscrepancyReport> {
    exact_disc_pair_with(g, h, &PairOptions::default())
}

pub fn exact_disc_pair_with(
    g: &Hypergraph,
    h: &Hypergraph,
    opts: &PairOptions,
) -> Result<DiscrepancyReport> {
    if g.n() != h.n() || g.k() != h.k() {
        return invalid("G and H must share n and k");
    }
    let n = g.n();
    if n > opts.guard {
        return Err(Error::GuardExceeded {
            what: "bijection enumeration",
            n,
            guard: opts.guard,
            cost: factorial_f64(n) * g.edge_count().max(1) as f64,
        });
    }
    let ctx = PairContext::new(g, h);
    let ext = match (opts.enumeration, opts.parallel) {
        (Enumeration::Plain, false) => ctx.plain(),
        (Enumeration::Plain, true) => ctx.plain_parallel(),
        (Enumeration::BranchAndBound, _) => ctx.branch_and_bound(),
    };
    let baseline = pair_baseline(g, h);
    let plus = Rational::from_integer(ext.max as i128) - baseline;
    let minus = baseline - Rational::from_integer(ext.min as i128);
    let (witness, count) = if plus > minus || (plus == minus && ext.argmax <= ext.argmin) {
        (ext.argmax, ext.max)
    } else {
        (ext.argmin, ext.min)
    };
    Ok(DiscrepancyReport {
        value: plus.max(minus),
        plus_value: plus,
        minus_value: minus,
        witness: Witness::Bijection(Bijection::new(witness)?),
        witness_count: count,
        baseline,
        provenance: Provenance::Oracle,
        stages: BTreeMap::new(),
        notes: Vec::new(),
    })
}

/// Exact `disc(H) = max_S |e(S) - ρ_H C(|S|, k)|` over all `2^n` subsets.
pub fn exact_disc_subset(h: &Hypergraph) -> Result<DiscrepancyReport> {
    exact_disc_subset_with(h, SUBSET_GUARD)
}

pub fn exact_disc_subset_with(h: &Hypergraph, guard: usize) -> Result<DiscrepancyReport> {
    let n = h.n();
    if n > guard || n > 63 {
        return Err(Error::GuardExceeded {
            what: "subset enumeration",
            n,
            guard,
            cost: 2f64.powi(n as i32) * h.edge_count().max(1) as f64,
        });
    }
    let k = h.k() as u64;
    let total = h.universe() as i128;
    let e_h = h.edge_count() as i128;
    let edge_masks: Vec<u64> = h
        .tuples()
        .map(|t| t.iter().fold(0u64, |m, &v| m | 1 << v))
        .collect();
    let sizes: Vec<i128> = (0..=n as u64)
        .map(|s| binomial(s, k).expect("small") as i128)
        .collect();
    // deviations scaled by C(n, k) stay integral
    let (mut best_plus, mut plus_mask) = (i128::MIN, 0u64);
    let (mut best_minus, mut minus_mask) = (i128::MIN, 0u64);
    for mask in 0u64..(1u64 << n) {
        let e_s = edge_masks.iter().filter(|&&em| em & mask == em).count() as i128;
        let dev = e_s * total - e_h * sizes[mask.count_ones() as usize];
        if dev > best_plus {
            best_plus = dev;
            plus_mask = mask;
        }
        if -dev > best_minus {
            best_minus = -dev;
            minus_mask = mask;
        }
    }
    let plus = Rational::new(best_plus, total);
    let minus = Rational::new(best_minus, total);
    let mask = if best_plus > best_minus || (best_plus == best_minus && plus_mask <= minus_mask) {
        plus_mask
    } else {
        minus_mask
    };
    let subset = crate::hypergraph::VertexSubset::from_mask(n, mask);
    let members = subset.members();
    Ok(DiscrepancyReport {
        value: plus.max(minus),
        plus_value: plus,
        minus_value: minus,
        witness_count: h.induced_edge_count(&subset),
        baseline: Rational::new(e_h * sizes[members.len()], total),
        witness: Witness::Subset { members },
        provenance: Provenance::Oracle,
        stages: BTreeMap::new(),
        notes: Vec::new(),
    })
}

/// The complete `i`-vertex k-uniform hypergraph on `{0..i-1}` plus `n - i` isolated vertices.
pub fn clique_with_isolated(n: usize, k: usize, i: usize) -> Result<Hypergraph> {
    let table = BinomialTable::new(n, k);
    let inner = if i >= k { table.get(i, k) } else { 0 };
    // colex ranks of subsets of {0..i-1} are exactly 0..C(i, k)
    Hypergraph::from_ranks(n, k, (0..inner).collect())
}

/// Both sides of `disc(H) = max_i disc(G_i, H)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionCheck {
    pub subset_value: Rational,
    pub pair_values: Vec<Rational>,
    pub holds: bool,
}

impl ReductionCheck {
    pub fn pair_max(&self) -> Rational {
        self.pair_values.iter().copied().max().unwrap_or_default()
    }
}

/// Checks the subset/pair reduction exactly, with `disc(G_i, H)` taken
/// against the baseline `ρ_{G_i} ρ_H C(n, k)`.
pub fn verify_reduction(h: &Hypergraph) -> Result<ReductionCheck> {
    let n = h.n();
    if n > REDUCTION_GUARD {
        return Err(Error::GuardExceeded {
            what: "reduction check",
            n,
            guard: REDUCTION_GUARD,
            cost: n as f64 * factorial_f64(n),
        });
    }
    let subset_value = exact_disc_subset(h)?.value;
    let pair_values = (1..=n)
        .map(|i| Ok(exact_disc_pair(&clique_with_isolated(n, h.k(), i)?, h)?.value))
        .collect::<Result<Vec<_>>>()?;
    let max = pair_values.iter().copied().max().unwrap_or_default();
    Ok(ReductionCheck {
        holds: subset_value == max,
        subset_value,
        pair_values,
    })
}

/// Recomputes the witness overlap of a bijection report from scratch.
pub fn recompute_overlap(
    g: &Hypergraph,
    h: &Hypergraph,
    report: &DiscrepancyReport,
) -> Result<u64> {
    match &report.witness {
        Witness::Bijection(pi) => overlap(g, pi, h),
        Witness::Subset { .. } => invalid("report has a subset witness"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    fn random_pi(n: usize, seed: u64) -> Bijection {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        Bijection::new(map).unwrap()
    }

    #[test]
    fn permutation_order() {
        let mut a = vec![0, 1, 2];
        let mut seen = vec![a.clone()];
        while next_permutation(&mut a) {
            seen.push(a.clone());
        }
        assert_eq!(seen.len(), 6);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn pair_hand_example() {
        // enumerate all 6 bijections: overlap is 1 when π maps {0,1} to {0,1} or {0,2}
        let g = Hypergraph::from_tuples(3, 2, [[0, 1]]).unwrap();
        let h = Hypergraph::from_tuples(3, 2, [[0, 1], [0, 2]]).unwrap();
        let rep = exact_disc_pair(&g, &h).unwrap();
        assert_eq!(rep.baseline, r(2, 3));
        assert_eq!(rep.plus_value, r(1, 3));
        assert_eq!(rep.minus_value, r(2, 3));
        assert_eq!(rep.value, r(2, 3));
        assert_eq!(rep.witness_count, 0);
        // first bijection with overlap 0 in lexicographic order maps {0,1} to {1,2}
        assert_eq!(rep.bijection().unwrap().map(), &[1, 2, 0]);
        assert_eq!(recompute_overlap(&g, &h, &rep).unwrap(), 0);
    }

    #[test]
    fn pair_trivial_cases() {
        let full = Hypergraph::complete(5, 2).unwrap();
        let rep = exact_disc_pair(&full, &full).unwrap();
        assert_eq!(rep.value, r(0, 1));
        assert_eq!(rep.baseline, r(10, 1));
        let empty = Hypergraph::empty(5, 2).unwrap();
        let h = Hypergraph::sample(5, 2, 0.5, 3).unwrap();
        let rep = exact_disc_pair(&empty, &h).unwrap();
        assert_eq!(rep.value, r(0, 1));
        assert_eq!(rep.plus_value, r(0, 1));
        assert_eq!(rep.minus_value, r(0, 1));
    }

    #[test]
    fn pair_guard_refuses_with_cost() {
        let g = Hypergraph::empty(11, 2).unwrap();
        match exact_disc_pair(&g, &g) {
            Err(Error::GuardExceeded { n, guard, cost, .. }) => {
                assert_eq!((n, guard), (11, 10));
                assert!(cost >= 39_916_800.0);
            }
            other => panic!("expected guard error, got {other:?}"),
        }
        let opts = PairOptions {
            guard: 3,
            ..Default::default()
        };
        let small = Hypergraph::empty(4, 2).unwrap();
        assert!(exact_disc_pair_with(&small, &small, &opts).is_err());
    }

    #[test]
    fn strategies_agree() {
        for seed in 0..40u64 {
            let n = 4 + (seed % 4) as usize;
            let k = 2 + (seed % 2) as usize;
            let g = Hypergraph::sample(n, k, 0.5, seed).unwrap();
            let h = Hypergraph::sample(n, k, 0.3, seed + 100).unwrap();
            let plain = exact_disc_pair(&g, &h).unwrap();
            for opts in [
                PairOptions {
                    enumeration: Enumeration::BranchAndBound,
                    ..Default::default()
                },
                PairOptions {
                    parallel: true,
                    ..Default::default()
                },
            ] {
                let other = exact_disc_pair_with(&g, &h, &opts).unwrap();
                assert_eq!(other.to_json(), plain.to_json(), "seed {seed} {opts:?}");
            }
        }
    }

    #[test]
    fn subset_examples() {
        let h = Hypergraph::from_tuples(3, 2, [[0, 1]]).unwrap();
        let rep = exact_disc_subset(&h).unwrap();
        assert_eq!(rep.value, r(2, 3));
        assert_eq!(
            rep.witness,
            Witness::Subset {
                members: vec![0, 1]
            }
        );
        assert_eq!(rep.witness_count, 1);
        assert_eq!(rep.baseline, r(1, 3));
        assert_eq!(
            exact_disc_subset(&Hypergraph::complete(6, 3).unwrap())
                .unwrap()
                .value,
            r(0, 1)
        );
        assert_eq!(
            exact_disc_subset(&Hypergraph::empty(6, 3).unwrap())
                .unwrap()
                .value,
            r(0, 1)
        );
        assert!(exact_disc_subset(&Hypergraph::empty(21, 2).unwrap()).is_err());
    }

    #[test]
    fn reduction_trivial_and_random() {
        for h in [
            Hypergraph::complete(5, 2).unwrap(),
            Hypergraph::empty(5, 2).unwrap(),
        ] {
            let check = verify_reduction(&h).unwrap();
            assert!(check.holds);
            assert_eq!(check.subset_value, r(0, 1));
        }
        for seed in 0..5 {
            let h = Hypergraph::sample(6, 2, 0.5, seed).unwrap();
            assert!(verify_reduction(&h).unwrap().holds);
        }
        assert!(verify_reduction(&Hypergraph::empty(8, 2).unwrap()).is_err());
    }

    #[test]
    fn minus_never_exceeds_baseline() {
        for seed in 0..30u64 {
            let g = Hypergraph::sample(6, 2, 0.4, seed).unwrap();
            let h = Hypergraph::sample(6, 2, 0.6, seed + 50).unwrap();
            let rep = exact_disc_pair(&g, &h).unwrap();
            assert!(rep.minus_value <= rep.baseline);
            assert!(rep.plus_value >= r(0, 1));
            assert_eq!(rep.value, rep.plus_value.max(rep.minus_value));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn invariant_under_relabeling(n in 3usize..=6, k in 2usize..=3, seed in any::<u64>()) {
            let g = Hypergraph::sample(n, k, 0.5, seed).unwrap();
            let h = Hypergraph::sample(n, k, 0.5, seed ^ 0xff).unwrap();
            let base = exact_disc_pair(&g, &h).unwrap();
            let gs = g.apply_bijection(&random_pi(n, seed ^ 1)).unwrap();
            let ht = h.apply_bijection(&random_pi(n, seed ^ 2)).unwrap();
            let moved = exact_disc_pair(&gs, &ht).unwrap();
            prop_assert_eq!(base.value, moved.value);
            prop_assert_eq!(base.plus_value, moved.plus_value);
            prop_assert_eq!(base.minus_value, moved.minus_value);
        }

        #[test]
        fn complement_preserves_disc(n in 3usize..=6, k in 2usize..=3, seed in any::<u64>()) {
            let g = Hypergraph::sample(n, k, 0.5, seed).unwrap();
            let h = Hypergraph::sample(n, k, 0.3, seed ^ 0xabc).unwrap();
            let a = exact_disc_pair(&g, &h).unwrap();
            let b = exact_disc_pair(&g, &h.complement()).unwrap();
            prop_assert_eq!(a.value, b.value);
            // the one-sided parts swap
            prop_assert_eq!(a.plus_value, b.minus_value);
        }
    }
}
