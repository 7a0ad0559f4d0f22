//! k-fold partitioning shared by cluster-count selection and regression CV.

use rand::seq::SliceRandom;

use crate::regress::RegressError;
use crate::seeding::rng_from;

/// Split `{0..n-1}` into `folds` disjoint index sets.
///
/// Sizes differ by at most one (the first `n % folds` folds get the extra
/// element). The shuffle is deterministic given the seed.
pub fn make_folds(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, RegressError> {
    if folds == 0 || n < folds {
        return Err(RegressError::TooFewSamples {
            needed: folds.max(1),
            got: n,
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from(seed));

    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        out.push(idx[start..start + size].to_vec());
        start += size;
    }
    Ok(out)
}
