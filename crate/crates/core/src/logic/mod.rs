//! Formulas, satisfaction and the signature oracle.

pub mod eval;
pub mod formula;
pub mod fragment;
pub mod oracle;

pub use eval::{holds, modal_at, model_check, standard_translation, Assignment};
pub use formula::{parse_formula, Classification, Formula, Var};
pub use fragment::{Family, FragmentSpec, Mode};
pub use oracle::{
    oracle_preserves, oracle_preserves_with, signature, OracleOptions, OracleVerdict, Signature,
};
