//! Vectors, rotations, planes and oriented boxes.

mod cuboid;
mod mat;
mod plane;
mod quat;
mod vec;

pub use cuboid::{cuboid_signed_distance, PlanarPrimitive, Provenance, DEFAULT_THICKNESS};
pub use mat::{symmetric_eigen, Mat3};
pub(crate) use plane::fit_plane_lsq_iter;
pub use plane::{fit_plane_lsq, point_plane_distance, Plane};
pub use quat::{quat_sub, Se3, UnitQuat};
pub use vec::{Vec2, Vec3};
