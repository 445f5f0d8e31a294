//! Bounds on the rate-distortion-equivocation region of secure lossy
//! source-channel coding with side information at both receivers, plus
//! orderings between side informations and desk-scale scheme simulators.

pub mod info;
pub mod orderings;
pub mod regions;
pub mod sim;
