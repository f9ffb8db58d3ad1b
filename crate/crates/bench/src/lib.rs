//! Parameter points shared by the benchmarks.

use enantio::ModelParams;

/// Point B and the model baseline.
pub fn reference_points() -> [(&'static str, ModelParams); 2] {
    [("point_b", ModelParams::point_b()), ("baseline", ModelParams::baseline())]
}
