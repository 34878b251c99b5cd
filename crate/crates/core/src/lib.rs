pub mod capacity;
pub mod channel;
pub mod converse;
pub mod error;
pub mod info;
pub mod io;
pub mod ki;
pub mod linalg;
pub mod measures;
pub mod optimize;
pub mod random;
pub mod sources;
pub mod space;
pub mod state;
pub mod tradeoff;
pub mod typicality;
