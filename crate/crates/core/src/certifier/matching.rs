//! Maximum bipartite matching by Hopcroft-Karp.

use std::collections::VecDeque;

const FREE: usize = usize::MAX;

/// Maximum matching of the bipartite graph with `adj[u]` listing the right
/// neighbours of left vertex `u`. Pairs are returned sorted by left vertex;
/// the result is a deterministic function of `adj`.
pub fn maximum_matching(adj: &[Vec<usize>], right_count: usize) -> Vec<(usize, usize)> {
    let left_count = adj.len();
    let mut mate_left = vec![FREE; left_count];
    let mut mate_right = vec![FREE; right_count];
    let mut dist = vec![0usize; left_count];
    while bfs(adj, &mate_left, &mate_right, &mut dist) {
        for u in 0..left_count {
            if mate_left[u] == FREE {
                augment(u, adj, &mut mate_left, &mut mate_right, &mut dist);
            }
        }
    }
    mate_left
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != FREE)
        .map(|(u, &v)| (u, v))
        .collect()
}

/// Layers the graph from free left vertices; true if some free right vertex is reachable.
fn bfs(adj: &[Vec<usize>], mate_left: &[usize], mate_right: &[usize], dist: &mut [usize]) -> bool {
    let mut queue = VecDeque::new();
    for u in 0..adj.len() {
        if mate_left[u] == FREE {
            dist[u] = 0;
            queue.push_back(u);
        } else {
            dist[u] = usize::MAX;
        }
    }
    let mut found = false;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            match mate_right[v] {
                FREE => found = true,
                w if dist[w] == usize::MAX => {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
                _ => {}
            }
        }
    }
    found
}

/// Iterative DFS along the BFS layers; flips one augmenting path if found.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    mate_left: &mut [usize],
    mate_right: &mut [usize],
    dist: &mut [usize],
) -> bool {
    // stack of (left vertex, next neighbour index)
    let mut stack = vec![(root, 0usize)];
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        if *next == adj[u].len() {
            dist[u] = usize::MAX;
            stack.pop();
            continue;
        }
        let v = adj[u][*next];
        *next += 1;
        let w = mate_right[v];
        if w == FREE {
            // flip the path recorded on the stack
            let mut right = v;
            for &(x, _) in stack.iter().rev() {
                let previous = mate_left[x];
                mate_left[x] = right;
                mate_right[right] = x;
                right = previous;
            }
            return true;
        }
        if dist[w] == dist[u] + 1 {
            stack.push((w, 0));
        }
    }
    false
}

/// Lemma-style guarantee `ceil(e / (Δ + 1))` for a graph with `e` edges and max degree `Δ`.
pub fn matching_guarantee(adj: &[Vec<usize>], right_count: usize) -> usize {
    let edges: usize = adj.iter().map(Vec::len).sum();
    if edges == 0 {
        return 0;
    }
    let mut right_degree = vec![0usize; right_count];
    adj.iter().flatten().for_each(|&v| right_degree[v] += 1);
    let delta = adj
        .iter()
        .map(Vec::len)
        .chain(right_degree)
        .max()
        .unwrap_or(0);
    edges.div_ceil(delta + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn is_matching(pairs: &[(usize, usize)], adj: &[Vec<usize>]) -> bool {
        let mut seen_l = std::collections::HashSet::new();
        let mut seen_r = std::collections::HashSet::new();
        pairs
            .iter()
            .all(|&(u, v)| adj[u].contains(&v) && seen_l.insert(u) && seen_r.insert(v))
    }

    /// Maximum matching size by exhaustive search over left vertices.
    fn brute(adj: &[Vec<usize>], u: usize, used: &mut Vec<bool>) -> usize {
        if u == adj.len() {
            return 0;
        }
        let mut best = brute(adj, u + 1, used);
        for &v in &adj[u] {
            if !used[v] {
                used[v] = true;
                best = best.max(1 + brute(adj, u + 1, used));
                used[v] = false;
            }
        }
        best
    }

    #[test]
    fn six_cycle() {
        let adj = vec![vec![0, 1], vec![1, 2], vec![2, 0]];
        assert_eq!(matching_guarantee(&adj, 3), 2);
        assert_eq!(maximum_matching(&adj, 3).len(), 3);
    }

    #[test]
    fn star() {
        let adj = vec![vec![0, 1, 2, 3]];
        assert_eq!(matching_guarantee(&adj, 4), 1);
        assert_eq!(maximum_matching(&adj, 4), vec![(0, 0)]);
    }

    #[test]
    fn complete_three_by_three() {
        let adj = vec![vec![0, 1, 2]; 3];
        assert_eq!(matching_guarantee(&adj, 3), 3);
        assert_eq!(maximum_matching(&adj, 3).len(), 3);
    }

    #[test]
    fn needs_augmenting_paths() {
        // greedy would match 0-0 and strand vertex 1
        let adj = vec![vec![0, 1], vec![0], vec![1, 2], vec![2]];
        let m = maximum_matching(&adj, 3);
        assert_eq!(m.len(), 3);
        assert!(is_matching(&m, &adj));
    }

    proptest! {
        #[test]
        fn maximum_and_valid(edges in proptest::collection::vec((0usize..7, 0usize..7), 0..30)) {
            let mut adj = vec![Vec::new(); 7];
            for (u, v) in edges {
                if !adj[u].contains(&v) {
                    adj[u].push(v);
                }
            }
            let m = maximum_matching(&adj, 7);
            prop_assert!(is_matching(&m, &adj));
            prop_assert_eq!(m.len(), brute(&adj, 0, &mut vec![false; 7]));
            prop_assert!(m.len() >= matching_guarantee(&adj, 7));
        }
    }
}
