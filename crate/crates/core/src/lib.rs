pub mod attacks;
pub mod bench;
pub mod distance;
pub mod format;
pub mod haplotype;
pub mod index;
pub mod matcher;
pub mod net;
pub mod paillier;
