use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::McqPair;

/// round-half-up(n × fraction).
pub fn test_size(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction + 0.5).floor() as usize
}

/// Seeded train/test split. Ids are sorted before shuffling so the partition
/// does not depend on input order; each side keeps the input order.
pub fn split(pairs: &[McqPair], test_fraction: f64, seed: u64) -> Result<(Vec<McqPair>, Vec<McqPair>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction {test_fraction} must lie strictly between 0 and 1"
        )));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = pairs.len();
    let k = test_size(n, test_fraction);
    if k == 0 || k == n {
        return Err(Error::Config(format!(
            "test fraction {test_fraction} on {n} pairs gives a test set of {k}"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pairs[a].id.cmp(&pairs[b].id).then(a.cmp(&b)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let test_idx: HashSet<usize> = order[..k].iter().copied().collect();

    let mut train = Vec::with_capacity(n - k);
    let mut test = Vec::with_capacity(k);
    for (i, p) in pairs.iter().enumerate() {
        if test_idx.contains(&i) {
            test.push(p.clone());
        } else {
            train.push(p.clone());
        }
    }
    Ok((train, test))
}
