//! The "Labels" original study and its three replications.

use pprep::power_prior::{Study, StudyPair};

pub const ORIGINAL: (f64, f64) = (0.21, 0.05);
pub const REPLICATIONS: [(f64, f64); 3] = [(0.09, 0.05), (0.21, 0.06), (0.44, 0.04)];

pub fn original() -> Study {
    Study::new(ORIGINAL.0, ORIGINAL.1).unwrap()
}

pub fn replication(i: usize) -> Study {
    let (t, s) = REPLICATIONS[i];
    Study::new(t, s).unwrap()
}

pub fn pair(i: usize) -> StudyPair {
    StudyPair::new(original(), replication(i)).unwrap()
}

/// Printed Bayes factors per replication, in the column order power-prior
/// `BF01`, replication `BF01`, `BF_dc` with point priors, `BF_dc` with
/// `Be(1, 2)`. `None` marks entries printed as "< 1/1000".
pub const PRINTED: [[Option<f64>; 4]; 3] = [
    [Some(1.0 / 1.1), Some(1.1), Some(1.0 / 5.6), Some(1.2)],
    [Some(1.0 / 367.0), Some(1.0 / 478.0), Some(1.0 / 19.0), Some(1.0 / 1.5)],
    [None, None, Some(16.0), Some(25.0)],
];
