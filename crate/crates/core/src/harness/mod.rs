pub mod random;
pub mod formula;
pub mod experiments;
