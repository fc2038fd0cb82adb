//! Brute-force metric geometry on finite truncations.

pub mod appendix;
pub mod cover;
pub mod mass;
pub mod metric;
pub mod qbox;

pub use cover::{covering_bounds, hausdorff_upper_at_scale, CoverBounds, SeparationReport};
pub use metric::{MetricDescriptor, MetricKind, PointCloud};
pub use mass::{mass_distribution_check, measure_cover_upper, MassReport, ProductMeasure, WitnessSet};
pub use qbox::{qbox_family, CarpetDigits, QBox, QBoxFamily};
pub use appendix::{appendix_a_construct, k_sequence_dims, AppendixParams, KElem};
