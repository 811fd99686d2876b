//! Label matching for block assignments across MCMC draws.

/// Largest block count matched exhaustively; above it matching is greedy.
const EXHAUSTIVE_MAX_K: usize = 4;

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                extend(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// Relabelling `perm` (draw label -> reference label) that maximises the
/// number of nodes whose relabelled block equals the reference block.
/// Exhaustive for `k <= 4`, greedy on the confusion matrix above that.
pub fn best_permutation(draw: &[usize], reference: &[usize], k: usize) -> Vec<usize> {
    let mut confusion = vec![vec![0usize; k]; k];
    for (&a, &b) in draw.iter().zip(reference) {
        confusion[a][b] += 1;
    }
    if k <= EXHAUSTIVE_MAX_K {
        let mut best = (0..k).collect::<Vec<_>>();
        let mut best_score = 0;
        for perm in permutations(k) {
            let score: usize = (0..k).map(|a| confusion[a][perm[a]]).sum();
            if score > best_score {
                best_score = score;
                best = perm;
            }
        }
        return best;
    }

    let mut perm = vec![usize::MAX; k];
    let mut taken = vec![false; k];
    let mut cells: Vec<(usize, usize, usize)> = (0..k)
        .flat_map(|a| (0..k).map(move |b| (a, b)))
        .map(|(a, b)| (confusion[a][b], a, b))
        .collect();
    // Largest overlaps first; ties by lowest (a, b).
    cells.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    for (_, a, b) in cells {
        if perm[a] == usize::MAX && !taken[b] {
            perm[a] = b;
            taken[b] = true;
        }
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn recovers_a_swapped_labelling() {
        let reference = [0, 0, 1, 1, 2, 2];
        let draw = [2, 2, 0, 0, 1, 1];
        let perm = best_permutation(&draw, &reference, 3);
        let mapped: Vec<_> = draw.iter().map(|&z| perm[z]).collect();
        assert_eq!(mapped, reference);
    }

    #[test]
    fn greedy_matching_for_many_blocks() {
        let reference: Vec<usize> = (0..60).map(|i| i / 10).collect();
        let draw: Vec<usize> = reference.iter().map(|&b| (b + 2) % 6).collect();
        let perm = best_permutation(&draw, &reference, 6);
        let mapped: Vec<_> = draw.iter().map(|&z| perm[z]).collect();
        assert_eq!(mapped, reference);
        let mut sorted = perm.clone();
        sorted.sort();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
    }
}
