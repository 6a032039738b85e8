//! Suspension flows over symbolic bases with locally constant rational roofs,
//! and flowbox structures around a point.

mod flow;
mod flowbox;
mod roof;

pub use flow::{return_lands_on_image, Suspension, SuspensionPoint, SuspensionPointJson};
pub use flowbox::{
    check_containment, verify_flowbox_properties, CentralSlice, ContainmentSample, FlowboxReport,
    FlowboxStructure, StageRow, MAX_FLOWBOX_DEPTH,
};
pub use roof::{min_value, parse_rational, RationalFunction, Roof, RoofJson};
