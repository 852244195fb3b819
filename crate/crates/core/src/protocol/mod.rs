pub mod audit;
pub mod session;
pub mod transcript;

pub use audit::*;
pub use session::*;
pub use transcript::*;
