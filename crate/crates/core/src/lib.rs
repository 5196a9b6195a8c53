pub mod channel;
pub mod codec;
pub mod density;
pub mod field;
pub mod harness;
pub mod kernel;
pub mod lab;
pub mod transform;
