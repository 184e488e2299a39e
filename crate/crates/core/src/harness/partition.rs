use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Disjoint test / train / validation identity sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub test_ids: Vec<String>,
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
    pub seed: u64,
}

/// Test set of 25 identities out of 130 (else `round(0.2 n)`); the remainder
/// is split `floor(0.9 r)` for training and the rest for validation.
///
/// Ids are deduplicated and sorted before the seeded shuffle, so the result
/// does not depend on input order.
pub fn partition_identities(ids: &[String], seed: u64) -> Result<Partition> {
    let mut pool = ids.to_vec();
    pool.sort();
    pool.dedup();
    let n = pool.len();
    if n < 3 {
        return Err(Error::Invalid(format!(
            "need at least 3 identities to partition, got {n}"
        )));
    }
    let n_test = if n == 130 {
        25
    } else {
        libm::round(0.2 * n as f64) as usize
    };
    let rest = n - n_test;
    let n_train = (9 * rest) / 10;
    let n_val = rest - n_train;
    if n_test == 0 || n_train == 0 || n_val == 0 {
        return Err(Error::Invalid(format!(
            "{n} identities give an empty split ({n_test} test, {n_train} train, {n_val} val)"
        )));
    }
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let val_ids = pool.split_off(n_test + n_train);
    let train_ids = pool.split_off(n_test);
    Ok(Partition {
        test_ids: pool,
        train_ids,
        val_ids,
        seed,
    })
}
