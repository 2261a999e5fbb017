use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MIN_SPLIT_SIZE: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// 80:10:10 over a seeded permutation of `0..n`; train and validation sizes
/// are floored and test takes the remainder.
pub fn split_dataset(n: usize, seed: u64) -> Result<DatasetSplit> {
    if n < MIN_SPLIT_SIZE {
        return Err(Error::TooFewExamples {
            min: MIN_SPLIT_SIZE,
            actual: n,
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = n * 8 / 10;
    let n_val = n / 10;
    let test = idx.split_off(n_train + n_val);
    let validation = idx.split_off(n_train);
    Ok(DatasetSplit {
        train: idx,
        validation,
        test,
        seed,
    })
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Hex SHA-256 over the three index lists; equal splits share a fingerprint.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for (tag, part) in [
            (b'T', &self.train),
            (b'V', &self.validation),
            (b'E', &self.test),
        ] {
            h.update([tag]);
            for i in part {
                h.update((*i as u64).to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Split by groups: groups (e.g. methods) are split 80:10:10 and each item
/// goes to the part holding all of its groups; items straddling parts are dropped.
pub fn split_by_groups(
    item_groups: &[Vec<usize>],
    n_groups: usize,
    seed: u64,
) -> Result<DatasetSplit> {
    let groups = split_dataset(n_groups, seed)?;
    let mut part_of = vec![0u8; n_groups];
    for &g in &groups.validation {
        part_of[g] = 1;
    }
    for &g in &groups.test {
        part_of[g] = 2;
    }
    let mut out = DatasetSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        seed,
    };
    for (item, gs) in item_groups.iter().enumerate() {
        let Some(&first) = gs.first() else { continue };
        let part = part_of[first];
        if gs.iter().any(|&g| part_of[g] != part) {
            continue;
        }
        match part {
            0 => out.train.push(item),
            1 => out.validation.push(item),
            _ => out.test.push(item),
        }
    }
    Ok(out)
}
