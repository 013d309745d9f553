pub mod specfn;
pub mod error;
pub mod report;
pub mod rf_link;
pub mod uwoc;
pub mod e2e;
pub mod metrics;
pub mod mc;
pub mod sweep;
