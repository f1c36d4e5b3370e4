//! Edge maps and images as `1 × C × H × W` tensors in `[-1, 1]`.

use agegan_core::{Scalar, Tensor};
use agegan_edgemap::{binarize_soft, edge_to_planes, image_to_planes, planes_to_image, EdgeMap, Image, Mask};

use crate::error::Result;

fn planes_tensor<T: Scalar>(planes: Vec<f32>, c: usize, h: usize, w: usize) -> Result<Tensor<T>> {
    Ok(Tensor::new(
        [1, c, h, w],
        planes.into_iter().map(|v| T::from_f64_lossy(v as f64)).collect(),
    )?)
}

fn tensor_planes<T: Scalar>(t: &Tensor<T>) -> Vec<f32> {
    t.data().iter().map(|v| v.to_f64_lossy() as f32).collect()
}

pub fn edge_tensor<T: Scalar>(edge: &EdgeMap) -> Result<Tensor<T>> {
    planes_tensor(edge_to_planes(edge), 3, edge.height(), edge.width())
}

pub fn image_tensor<T: Scalar>(image: &Image) -> Result<Tensor<T>> {
    planes_tensor(image_to_planes(image), image.channels(), image.height(), image.width())
}

/// First batch item back to an 8-bit image.
pub fn tensor_image<T: Scalar>(t: &Tensor<T>) -> Result<Image> {
    let (_, c, h, w) = t.dims4()?;
    let first = t.batch_item(0)?;
    Ok(planes_to_image(&tensor_planes(&first), c, w, h)?)
}

/// Stroke mask of the first batch item of a soft 3-channel map.
pub fn tensor_strokes<T: Scalar>(t: &Tensor<T>) -> Result<Mask> {
    let (_, _, h, w) = t.dims4()?;
    let first = t.batch_item(0)?;
    Ok(binarize_soft(&tensor_planes(&first), w, h)?)
}
