pub mod grid;
pub mod layout;
pub mod synthesis;
pub mod decoder;
pub mod protocol;
pub mod placement;
