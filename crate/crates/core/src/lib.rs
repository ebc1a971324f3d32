//! Honeyword-based authentication for fully observable shoulder-surfing-resistant
//! challenge-response schemes.

pub mod attacks;
pub mod chc;
pub mod cop;
pub mod error;
pub mod framework;
pub mod geometry;
pub mod honeychecker;
pub mod honeygen;
pub mod hypothetical;
pub mod pas;
pub mod s3pas;
pub mod stats;

pub use error::{HbatError, Result};
pub use framework::{Scheme, SchemeTag, SweetIndex, SweetwordList, Verdict};
