//! Exact characteristic solutions of pressureless relativistic dust on
//! spatially flat expanding backgrounds, with blowup detection, life-span
//! bounds, and an independent finite-volume solver for cross-checks.
//!
//! ```
//! use dustflow::blowup::{find_blowup_time, BlowupSearch};
//! use dustflow::characteristics::CharacteristicFlow;
//! use dustflow::data::{InitialData, VelocityProfile};
//! use dustflow::scale::ScaleFactor;
//!
//! # fn main() -> dustflow::Result<()> {
//! let scale = ScaleFactor::power_law(0.25)?;
//! let data = InitialData::builder(1)
//!     .velocity(VelocityProfile::Arctan { delta: 0.0, sign: -1.0 })
//!     .epsilon(0.1)
//!     .build()?;
//! let flow = CharacteristicFlow::new(scale, data);
//! let report = find_blowup_time(&flow, &BlowupSearch::default().with_t_max(1e8))?;
//! // The label at the origin folds first, at (1 + 1/(2ε))² − 1.
//! assert!((report.t_blow.unwrap() - 35.0).abs() < 1e-6);
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod characteristics;
pub mod data;
pub mod density;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod quad;
pub mod roots;
pub mod scale;
pub mod serde_float;
pub mod spherical;
pub mod stats;

pub use error::{Error, Result};
