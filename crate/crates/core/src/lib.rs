//! Awareness models and a three-valued model checker.
//!
//! Two model classes are supported: unawareness models built from a lattice
//! of state-spaces ([`hms`]) and Kripke lattice models built from the
//! restrictions of one Kripke model ([`lattice_model`]). [`transforms`]
//! converts between them and [`logic`] sweeps axiom schemas over random
//! corpora.

pub mod atoms;
pub mod fixtures;
pub mod format;
pub mod formula;
pub mod hms;
pub mod kripke;
pub mod lattice_model;
pub mod logic;
pub mod transforms;

pub use atoms::AtomSet;
pub use format::{load_model, model_to_string, parse_model, LoadError, Model, ModelFile};
pub use formula::{enumerate_formulas, parse, AgentId, AtomId, Formula, ParseError};
pub use hms::{Event, FrameReport, HmsError, HmsModel, StateSpaceLattice, UnawarenessFrame};
pub use kripke::{
    build_lattice, KripkeError, KripkeModel, RestrictedWorld, RestrictionLattice, DEFAULT_MAX_ATOMS,
};
pub use lattice_model::{build_klm, valid_over, KlmError, KripkeLatticeModel, ThreeVal, Validity};
