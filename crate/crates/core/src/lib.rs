pub mod enumerate;
pub mod error;
pub mod matrix;
pub mod pingpong;
pub mod stallings;
pub mod vfree;
pub mod word;

pub use error::{Error, Result};
pub use matrix::{BigIntMatrix, BigIntMatrixGroup, IntMatrix, IntMatrixGroup};
pub use stallings::SubgroupHandle;
pub use vfree::GElement;
pub use word::Word;
