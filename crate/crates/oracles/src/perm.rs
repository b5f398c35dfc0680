//! Brute-force label-matching oracle.

/// Minimum disagreement fraction over all relabelings of `pred`, computed by
/// enumerating permutations of the confusion matrix columns.
///
/// Rows flagged in `exclude` are ignored. Panics if the label count exceeds 10
/// (enumeration is the whole point of this oracle).
pub fn min_permutation_error(pred: &[usize], truth: &[usize], exclude: Option<&[bool]>) -> f64 {
    assert_eq!(pred.len(), truth.len());
    let k_pred = pred.iter().max().map_or(0, |&m| m + 1);
    let k_truth = truth.iter().max().map_or(0, |&m| m + 1);
    let k = k_pred.max(k_truth).max(1);
    assert!(k <= 10, "permutation oracle supports at most 10 labels");

    // Confusion counts over the included rows.
    let mut confusion = vec![vec![0u64; k]; k];
    let mut total = 0u64;
    for (row, (&p, &t)) in pred.iter().zip(truth).enumerate() {
        if exclude.is_some_and(|m| m[row]) {
            continue;
        }
        confusion[p][t] += 1;
        total += 1;
    }
    if total == 0 {
        return 0.0;
    }

    // Heap's algorithm over permutations sigma of pred labels: matched count
    // is sum_i confusion[i][sigma(i)].
    let mut sigma: Vec<usize> = (0..k).collect();
    let mut best_match = 0u64;
    heap_permutations(&mut sigma, k, &mut |s| {
        let matched: u64 = (0..k).map(|i| confusion[i][s[i]]).sum();
        if matched > best_match {
            best_match = matched;
        }
    });
    1.0 - best_match as f64 / total as f64
}

fn heap_permutations<F: FnMut(&[usize])>(arr: &mut Vec<usize>, k: usize, visit: &mut F) {
    if k <= 1 {
        visit(arr);
        return;
    }
    for i in 0..k {
        heap_permutations(arr, k - 1, visit);
        if k % 2 == 0 {
            arr.swap(i, k - 1);
        } else {
            arr.swap(0, k - 1);
        }
    }
}
