//! Reference implementations for cross-checking the solver crates. Nothing
//! here shares code with them: inputs are plain vectors.

pub mod ch;
pub mod lpformat;
pub mod tableau;
