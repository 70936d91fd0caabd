//! Copy-paste extensions of ordered diagrams.

pub mod colour;
pub mod copy_paste;
pub mod extended;
pub mod three_to_one;
pub mod two_to_one;

pub use colour::{color_diagram, ColourParams, ColouredBase};
pub use copy_paste::{copy_paste, Construction, CopyPasteSpec, ExtensionTriple};
pub use extended::{
    extended_diagram, fibre_cardinality, full_preimage, ExtendedDiagram, FibreCount, FullPreimage,
};
pub use three_to_one::build_three_to_one;
pub use two_to_one::{build_two_to_one, TwoToOneBudget, TwoToOneReport};
