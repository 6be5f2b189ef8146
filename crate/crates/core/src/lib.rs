pub mod codec;
pub mod harness;
pub mod kcomplexity;
pub mod levin;
pub mod mstar;
pub mod proofsys;
pub mod vm;
