pub use operad_core;
