use std::fmt;
use std::str::FromStr;

use agegan_core::Scalar;
use agegan_edgemap::{colorize_interior_canny, EdgeMap, StrokeColor};

use crate::convert::{edge_tensor, tensor_strokes};
use crate::error::{GanError, Result};
use crate::nets::GeneratorNet;
use crate::train::CycleGan;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    YoungToOld,
    OldToYoung,
}

impl Direction {
    /// Coloring used for inputs of this direction during training.
    pub fn source_color(self) -> StrokeColor {
        match self {
            Direction::YoungToOld => StrokeColor::Red,
            Direction::OldToYoung => StrokeColor::Green,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::YoungToOld => "young-to-old",
            Direction::OldToYoung => "old-to-young",
        })
    }
}

impl FromStr for Direction {
    type Err = GanError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "young-to-old" => Ok(Direction::YoungToOld),
            "old-to-young" => Ok(Direction::OldToYoung),
            other => Err(GanError::Config(format!(
                "direction must be young-to-old or old-to-young, got {other:?}"
            ))),
        }
    }
}

/// Run `generator` on `edge` colored for `direction`'s source domain, then
/// threshold the output, reclassify its strokes against `edge` and return
/// the WHITE result.
pub fn translate<T: Scalar>(edge: &EdgeMap, direction: Direction, generator: &GeneratorNet<T>) -> Result<EdgeMap> {
    let colored = colorize_interior_canny(edge, direction.source_color());
    let out = generator.infer(&edge_tensor(&colored)?)?;
    let strokes = tensor_strokes(&out)?;
    Ok(EdgeMap::from_strokes(&strokes, edge)?)
}

impl<T: Scalar> CycleGan<T> {
    pub fn translate(&self, edge: &EdgeMap, direction: Direction) -> Result<EdgeMap> {
        let g = match direction {
            Direction::YoungToOld => &self.g_xy,
            Direction::OldToYoung => &self.g_yx,
        };
        translate(edge, direction, g)
    }
}
