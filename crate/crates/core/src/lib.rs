pub mod cone;
pub mod delzant;
pub mod linalg;
pub mod polytope;
pub mod toric;
pub mod verify;
