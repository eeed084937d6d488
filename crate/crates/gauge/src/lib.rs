//! File formats, synthetic experiments and the `tgauge` command line for
//! gauge-norm tensor completion.

pub mod experiments;
pub mod io;
pub mod cli;
