pub mod circle;
pub mod error;
pub mod extremality;
pub mod factorization;
pub mod linalg;
pub mod sampling;
pub mod spectra;
pub mod toeplitz;

pub use circle::{GridFunction, TrigPoly};
pub use error::{Error, Result};
pub use extremality::{ExtremalityCertificate, Verdict};
pub use spectra::{FamilyTag, Period, SpectralSet};

/// Version of this library, recorded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
