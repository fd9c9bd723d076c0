//! Level-set extraction and the distances built on it.

mod contour;
mod distance;

pub use crate::grid::{GridPoints, GridSpec};
pub use contour::{
    contour_from_node_values, contour_length, extract_contour, extract_contour_with, resample, Contour, ContourOptions,
    Polyline, Shape,
};
pub use distance::{
    directed_hausdorff, dist_to_contour, hausdorff, point_segment_distance, project_to_contour, SegmentIndex,
};
