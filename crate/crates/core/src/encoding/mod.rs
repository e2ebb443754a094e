//! b-tensor encoding, acquisition schemes and forward signal models.

mod btensor;
mod directions;
mod scheme;
mod signals;

pub use btensor::{btensor, BTensor};
pub use directions::{hemisphere_directions, shell_directions};
pub use scheme::{generate_scheme, AcqScheme, Shell, SchemeSpec, ANCHOR_B};
pub use signals::{signal_cumulant, signal_dtd, signal_gamma};
