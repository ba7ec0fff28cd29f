pub use envybench::*;
