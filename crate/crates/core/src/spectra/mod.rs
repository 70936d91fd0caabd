//! Visit frequencies of the irregularity set and their spectra.

pub mod automaton;
pub mod count;
pub mod frequency;
pub mod gap;
pub mod realize;

pub use automaton::{EdgePredicateAutomaton, EdgeView};
pub use count::{count_in_window, e_class_count, CountTable};
pub use frequency::{
    frequency_trace, in_d, measure_lower_bound, mu_d_estimate, sdn_direct, FrequencyTrace, Membership,
};
pub use gap::{gap_check_three_to_one, GapParams, GapReport};
pub use realize::{realize_frequency, realizable_max, v_plus_set, RealizationPlan, RealizeParams};
