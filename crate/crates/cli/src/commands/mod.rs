pub mod diagram;
pub mod eval;
pub mod extract;
pub mod kg;
