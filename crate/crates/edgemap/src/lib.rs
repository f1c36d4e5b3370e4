//! Edge-map extraction for face images.
//!
//! A face crop is turned into a 3-channel edge map by joining its canny
//! contour with the polyline drawn through its 68 landmarks. Canny strokes
//! inside the face polygon can be tinted to mark the age domain.

pub mod canny;
pub mod edge;
pub mod error;
pub mod image;
pub mod io;
pub mod landmarks;
pub mod mask;
pub mod raster;
pub mod roi;

pub use canny::{canny, CannyParams};
pub use edge::{
    binarize_soft, colorize_interior_canny, compose_edge_map, decolorize, edge_to_planes, filter_interior_canny,
    image_to_planes, planes_to_image, point_in_polygon, EdgeMap, StrokeClass, StrokeColor, BLACK, GREEN, RED,
    WHITE,
};
pub use error::{EdgeError, Result};
pub use image::Image;
pub use io::{load_image, save_image};
pub use landmarks::{LandmarkSet, LANDMARK_COUNT};
pub use mask::Mask;
pub use raster::rasterize_landmark_contour;
pub use roi::{expand_roi, BoundingBox};

/// Default enlargement of the detected face box.
pub const ROI_FACTOR: f64 = 1.5;

/// Edge map of a face crop that is already in landmark coordinates.
pub fn edge_map_for_crop(gray: &Image, landmarks: &LandmarkSet, params: &CannyParams) -> Result<EdgeMap> {
    let contour = rasterize_landmark_contour(landmarks, gray.width(), gray.height());
    let edges = canny(gray, params)?;
    compose_edge_map(&edges, &contour, &landmarks.face_polygon())
}
