pub mod bench;
pub mod classify;
pub mod fuzz;
pub mod geom;
pub mod io;
pub mod polygon;
pub mod report;
