//! The base space `X`, the input function `f`, the half-strip scan, the
//! partition into cells `H(j,n)` and the maps `P`, `Q`, `T`.

mod maps;
mod partition;
mod scan;
mod space;

pub use maps::{
    apply_t_base, cell_average, embed_q, project_p, verify_factorization, FactorizationReport,
    FACTORIZATION_TOLERANCE,
};
pub use partition::{build_partition, CellLocation, HeadItem, Partition, Schedule};
pub use scan::{choose_z0, in_halfstrip, measure_of_halfstrip, HalfStripScan, DEFAULT_DIRECTIONS, DEFAULT_RADII};
pub use space::{BaseSpace, Motif, MotifPiece, PiecewiseFunction};
