//! Maximum-cardinality matching by augmenting paths.

use crate::Detection;

/// Largest number of disjoint pairs `(a, b)` with `|a - b| <= radius`.
pub fn optimal_matches(a: &[Detection], b: &[Detection], radius: f64) -> usize {
    let close = |i: usize, j: usize| {
        let (dx, dy) = (a[i].x as f64 - b[j].x as f64, a[i].y as f64 - b[j].y as f64);
        (dx * dx + dy * dy).sqrt() <= radius
    };
    let mut owner: Vec<Option<usize>> = vec![None; b.len()];

    fn augment(
        i: usize,
        nb: usize,
        close: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..nb {
            if close(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].is_none() || augment(owner[j].unwrap(), nb, close, seen, owner) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }

    let mut total = 0;
    for i in 0..a.len() {
        let mut seen = vec![false; b.len()];
        if augment(i, b.len(), &close, &mut seen, &mut owner) {
            total += 1;
        }
    }
    total
}
