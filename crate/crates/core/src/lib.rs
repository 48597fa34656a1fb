//! Resource-bounded logical preservation between finite structures, decided
//! by model-comparison games, game-comonad coalgebras and an exact
//! formula-signature oracle.

pub mod coalgebra;
pub mod corpus;
pub mod error;
pub mod games;
pub mod io;
pub mod logic;
pub mod structure;

pub use error::{Error, Result};
pub use io::{parse_structure, serialize_structure};
pub use structure::{Elem, Structure, StructureBuilder, Vocabulary};
