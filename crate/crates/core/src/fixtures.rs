//! The bundled trade example: a buyer `B` and an owner `O`, atoms `i` and
//! `l`, as an unawareness model and as a Kripke lattice model.

use crate::format::{parse_model, Model};
use crate::hms::HmsModel;
use crate::kripke::{KripkeModel, DEFAULT_MAX_ATOMS};
use crate::lattice_model::KripkeLatticeModel;

pub const TRADE_HMS_JSON: &str = include_str!("../fixtures/trade.hms.json");
pub const TRADE_KLM_JSON: &str = include_str!("../fixtures/trade.klm.json");

pub fn trade_hms() -> HmsModel {
    match parse_model(TRADE_HMS_JSON, DEFAULT_MAX_ATOMS).expect("bundled fixture loads") {
        Model::Hms(m) => m,
        Model::KripkeLattice(_) => unreachable!("trade.hms.json is an hms file"),
    }
}

pub fn trade_klm() -> KripkeLatticeModel {
    match parse_model(TRADE_KLM_JSON, DEFAULT_MAX_ATOMS).expect("bundled fixture loads") {
        Model::KripkeLattice(m) => m,
        Model::Hms(_) => unreachable!("trade.klm.json is a kripke_lattice file"),
    }
}

/// The base Kripke model of [`trade_klm`].
pub fn trade_kripke() -> KripkeModel {
    trade_klm().lattice().base().clone()
}
