//! Ordered Bratteli-Vershik diagrams, copy-paste extensions and the Birkhoff
//! spectra of their irregularity sets.

pub mod diagram;
pub mod error;
pub mod seglist;
pub mod util;
pub mod vershik;

pub use diagram::{CopyMeta, Diagram, DiagramData, FinitePath, VertexRef, Violation};
pub use error::{Error, Result};
pub use seglist::{ClassList, EdgeClass, SourceList};
pub mod cli;
pub mod coding;
pub mod extension;
pub mod spectra;
