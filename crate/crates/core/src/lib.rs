pub mod algebra;
pub mod curvature;
pub mod linalg;
pub mod model;
pub mod tolerance;
pub mod geodesic;
pub mod killing;
pub mod catalog;
pub mod format;
pub mod report;
