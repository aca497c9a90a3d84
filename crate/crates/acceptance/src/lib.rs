//! Reference data, independent oracles and randomized property suites
//! shared by the `acceptance` and `properties` test targets.

pub mod labels;
pub mod oracle;
pub mod props;
