pub mod base;
pub mod cesaro;
pub mod error;
pub mod norms;
pub mod operator;
pub mod scalar;
pub mod space;
pub mod residuality;
pub mod scenario;
pub mod verify;
pub mod cli;
