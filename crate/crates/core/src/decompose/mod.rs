//! The density and size decompositions, the leveled forest, tile-type
//! estimates and restricted weak-type experiments.

mod density;
mod forest;
mod rwt;
mod size;
mod tiletype;

pub use density::{density_decompose, density_decompose_with, DensityDecomposition};
pub use forest::{
    carleson_form_certificate, full_decompose, full_decompose_with, CarlesonFormReport, ForestLevel,
    LevelTree, LeveledForest, Origin, TreeContribution,
};
pub use rwt::{restricted_weak_type, Regime, RwtReport};
pub use size::{size_decompose, size_decompose_with, SizeDecomposition};
pub use tiletype::{check_family, tile_type_constant, TileTypeReport, TreeTileType};
