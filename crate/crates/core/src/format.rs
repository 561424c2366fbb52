//! JSON model files. A file carries a `kind` tag (`"kripke_lattice"` or
//! `"hms"`), the atom and agent lists and a kind-specific payload. Loading
//! resolves every name and runs the matching validator.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{AgentId, AtomId, IdentError};
use crate::hms::{Event, HmsError, HmsModel, StateSpaceLattice, UnawarenessFrame};
use crate::kripke::{build_lattice, KripkeError, KripkeModel, RestrictedWorld};
use crate::lattice_model::{build_klm, KlmError, KripkeLatticeModel};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Ident(#[from] IdentError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Klm(#[from] KlmError),
    #[error(transparent)]
    Hms(#[from] HmsError),
    #[error("{0}")]
    Reference(String),
}

impl LoadError {
    /// Whether the file could not be decoded, as opposed to decoding into
    /// an invalid model.
    pub fn is_syntax(&self) -> bool {
        matches!(self, LoadError::Syntax(_) | LoadError::Io { .. })
    }
}

/// The on-disk document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    KripkeLattice(KlmFile),
    Hms(HmsFile),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlmFile {
    pub atoms: Vec<String>,
    pub agents: Vec<String>,
    pub worlds: Vec<String>,
    /// Agent to accessibility pairs `[from, to]`.
    pub relations: BTreeMap<String, Vec<(String, String)>>,
    /// Atom to the worlds where it holds.
    pub valuation: BTreeMap<String, Vec<String>>,
    /// Agent to `world_ref -> world_ref` images over every restricted world.
    pub awareness: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceEntry {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventEntry {
    pub space: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmsFile {
    pub atoms: Vec<String>,
    pub agents: Vec<String>,
    pub spaces: Vec<SpaceEntry>,
    /// Pairs `[lower, upper]`; the order is their reflexive-transitive
    /// closure.
    pub order: Vec<(String, String)>,
    /// State to `space -> image`. Projections derivable by composition may
    /// be omitted.
    pub projections: BTreeMap<String, BTreeMap<String, String>>,
    /// Agent to `state -> possibility set`.
    pub correspondences: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    /// Atom to its event, given by the generating states in a base space.
    pub valuation: BTreeMap<String, EventEntry>,
}

/// A loaded and validated model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    KripkeLattice(KripkeLatticeModel),
    Hms(HmsModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::KripkeLattice(_) => "kripke_lattice",
            Model::Hms(_) => "hms",
        }
    }

    pub fn to_file(&self) -> ModelFile {
        match self {
            Model::KripkeLattice(m) => ModelFile::KripkeLattice(KlmFile::from_model(m)),
            Model::Hms(m) => ModelFile::Hms(HmsFile::from_model(m)),
        }
    }
}

fn reference(what: &str, name: &str) -> LoadError {
    LoadError::Reference(format!("unknown {what} {name:?}"))
}

fn idents<T>(
    names: &[String],
    make: impl Fn(&str) -> Result<T, IdentError>,
) -> Result<Vec<T>, LoadError> {
    names
        .iter()
        .map(|n| make(n).map_err(LoadError::from))
        .collect()
}

impl KlmFile {
    pub fn into_model(self, max_atoms: usize) -> Result<KripkeLatticeModel, LoadError> {
        let atoms = idents(&self.atoms, |n| AtomId::new(n))?;
        let agents = idents(&self.agents, |n| AgentId::new(n))?;
        let world = |name: &str| {
            self.worlds
                .iter()
                .position(|w| w == name)
                .ok_or_else(|| reference("world", name))
        };
        for name in self.relations.keys() {
            if !self.agents.contains(name) {
                return Err(reference("agent", name));
            }
        }
        for name in self.valuation.keys() {
            if !self.atoms.contains(name) {
                return Err(reference("atom", name));
            }
        }
        for name in self.awareness.keys() {
            if !self.agents.contains(name) {
                return Err(reference("agent", name));
            }
        }
        let mut relations = Vec::new();
        for a in &self.agents {
            let pairs = self.relations.get(a).map(Vec::as_slice).unwrap_or(&[]);
            relations.push(
                pairs
                    .iter()
                    .map(|(w, v)| Ok((world(w)?, world(v)?)))
                    .collect::<Result<Vec<_>, LoadError>>()?,
            );
        }
        let mut valuation = Vec::new();
        for p in &self.atoms {
            let ws = self.valuation.get(p).map(Vec::as_slice).unwrap_or(&[]);
            valuation.push(ws.iter().map(|w| world(w)).collect::<Result<Vec<_>, _>>()?);
        }
        let kripke = KripkeModel::new(atoms, agents, self.worlds.clone(), relations, valuation)?;
        let lattice = build_lattice(kripke, max_atoms)?;
        let mut maps = Vec::new();
        for a in &self.agents {
            let mut map = BTreeMap::new();
            if let Some(entries) = self.awareness.get(a) {
                for (from, to) in entries {
                    let from = lattice.base().parse_world_ref(from)?;
                    let to = lattice.base().parse_world_ref(to)?;
                    map.insert(from, to);
                }
            }
            maps.push(map);
        }
        Ok(build_klm(lattice, maps)?)
    }

    pub fn from_model(model: &KripkeLatticeModel) -> Self {
        let base = model.lattice().base();
        let name = |w: usize| base.worlds()[w].clone();
        let relations = base
            .agents()
            .iter()
            .enumerate()
            .map(|(a, agent)| {
                let pairs = base
                    .relation(a)
                    .iter()
                    .map(|&(w, v)| (name(w), name(v)))
                    .collect();
                (agent.to_string(), pairs)
            })
            .collect();
        let valuation = base
            .atoms()
            .iter()
            .enumerate()
            .map(|(p, atom)| {
                (
                    atom.to_string(),
                    base.valuation(p).iter().map(|&w| name(w)).collect(),
                )
            })
            .collect();
        let awareness = base
            .agents()
            .iter()
            .enumerate()
            .map(|(a, agent)| {
                let map = model
                    .lattice()
                    .omega()
                    .map(|w: RestrictedWorld| {
                        (base.world_ref(w), base.world_ref(model.image(a, w)))
                    })
                    .collect();
                (agent.to_string(), map)
            })
            .collect();
        KlmFile {
            atoms: base.atoms().iter().map(ToString::to_string).collect(),
            agents: base.agents().iter().map(ToString::to_string).collect(),
            worlds: base.worlds().to_vec(),
            relations,
            valuation,
            awareness,
        }
    }
}

impl HmsFile {
    pub fn into_model(self) -> Result<HmsModel, LoadError> {
        let atoms = idents(&self.atoms, |n| AtomId::new(n))?;
        let agents = idents(&self.agents, |n| AgentId::new(n))?;
        let mut projections = Vec::new();
        for (state, targets) in &self.projections {
            for (space, image) in targets {
                projections.push((state.clone(), space.clone(), image.clone()));
            }
        }
        let lattice = StateSpaceLattice::new(
            self.spaces
                .iter()
                .map(|s| (s.name.clone(), s.states.clone()))
                .collect(),
            self.order.clone(),
            projections,
        )?;
        let state = |name: &str| {
            lattice
                .state_index(name)
                .ok_or_else(|| LoadError::from(HmsError::UnknownState(name.to_string())))
        };
        for name in self.correspondences.keys() {
            if !self.agents.contains(name) {
                return Err(reference("agent", name));
            }
        }
        let mut corr = Vec::new();
        for agent in &agents {
            let table = self.correspondences.get(agent.as_str());
            for name in table.into_iter().flat_map(|t| t.keys()) {
                state(name)?;
            }
            let mut rows = Vec::new();
            for s in 0..lattice.state_count() {
                let sname = lattice.state_name(s);
                let row = table.and_then(|t| t.get(sname)).ok_or_else(|| {
                    HmsError::MissingCorrespondence {
                        agent: agent.clone(),
                        state: sname.to_string(),
                    }
                })?;
                rows.push(
                    row.iter()
                        .map(|v| state(v))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            corr.push(rows);
        }
        for name in self.valuation.keys() {
            if !self.atoms.contains(name) {
                return Err(reference("atom", name));
            }
        }
        let frame = UnawarenessFrame::new(lattice.clone(), agents, corr)?;
        let mut valuation = Vec::new();
        for atom in atoms {
            let entry = self
                .valuation
                .get(atom.as_str())
                .ok_or_else(|| HmsError::UnknownAtom(atom.clone()))?;
            let lat = frame.lattice();
            let base = lat
                .space_index(&entry.space)
                .ok_or_else(|| HmsError::UnknownSpace(entry.space.clone()))?;
            let mut gen = lat.empty_set();
            for s in &entry.states {
                gen.insert(state(s)?);
            }
            valuation.push((atom, Event::new(lat, base, gen)?));
        }
        Ok(HmsModel::new(frame, valuation)?)
    }

    pub fn from_model(model: &HmsModel) -> Self {
        let lat = model.lattice();
        let covers = lat.covers();
        let spaces = (0..lat.space_count())
            .map(|sp| SpaceEntry {
                name: lat.space_name(sp).to_string(),
                states: lat
                    .states_of(sp)
                    .iter()
                    .map(|&s| lat.state_name(s).to_string())
                    .collect(),
            })
            .collect();
        let order = covers
            .iter()
            .map(|&(lo, hi)| {
                (
                    lat.space_name(lo).to_string(),
                    lat.space_name(hi).to_string(),
                )
            })
            .collect();
        let mut projections = BTreeMap::new();
        for s in 0..lat.state_count() {
            let targets: BTreeMap<String, String> = covers
                .iter()
                .filter(|&&(_, hi)| hi == lat.space_of(s))
                .map(|&(lo, _)| {
                    let img = lat.project(s, lo).expect("below");
                    (
                        lat.space_name(lo).to_string(),
                        lat.state_name(img).to_string(),
                    )
                })
                .collect();
            if !targets.is_empty() {
                projections.insert(lat.state_name(s).to_string(), targets);
            }
        }
        let correspondences = model
            .agents()
            .iter()
            .enumerate()
            .map(|(a, agent)| {
                let table = (0..lat.state_count())
                    .map(|s| {
                        let set = model
                            .frame()
                            .possibility(a, s)
                            .ones()
                            .map(|t| lat.state_name(t).to_string())
                            .collect();
                        (lat.state_name(s).to_string(), set)
                    })
                    .collect();
                (agent.to_string(), table)
            })
            .collect();
        let valuation = model
            .atoms()
            .iter()
            .enumerate()
            .map(|(p, atom)| {
                let e = model.valuation(p);
                let entry = EventEntry {
                    space: lat.space_name(e.base()).to_string(),
                    states: e
                        .generator()
                        .ones()
                        .map(|s| lat.state_name(s).to_string())
                        .collect(),
                };
                (atom.to_string(), entry)
            })
            .collect();
        HmsFile {
            atoms: model.atoms().iter().map(ToString::to_string).collect(),
            agents: model.agents().iter().map(ToString::to_string).collect(),
            spaces,
            order,
            projections,
            correspondences,
            valuation,
        }
    }
}

impl ModelFile {
    pub fn into_model(self, max_atoms: usize) -> Result<Model, LoadError> {
        match self {
            ModelFile::KripkeLattice(f) => Ok(Model::KripkeLattice(f.into_model(max_atoms)?)),
            ModelFile::Hms(f) => Ok(Model::Hms(f.into_model()?)),
        }
    }
}

/// Parses and validates a model document.
pub fn parse_model(text: &str, max_atoms: usize) -> Result<Model, LoadError> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.into_model(max_atoms)
}

/// Pretty-printed JSON with a trailing newline.
pub fn model_to_string(model: &Model) -> String {
    let mut text = serde_json::to_string_pretty(&model.to_file()).expect("serializable");
    text.push('\n');
    text
}

pub fn load_model(path: &Path, max_atoms: usize) -> Result<Model, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text, max_atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::enumerate_formulas;
    use crate::kripke::DEFAULT_MAX_ATOMS;

    #[test]
    fn klm_round_trip() {
        let m = Model::KripkeLattice(fixtures::trade_klm());
        let text = model_to_string(&m);
        let back = parse_model(&text, DEFAULT_MAX_ATOMS).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_string(&back), text);
    }

    #[test]
    fn hms_round_trip_preserves_verdicts() {
        let original = fixtures::trade_hms();
        let text = model_to_string(&Model::Hms(original.clone()));
        let Model::Hms(back) = parse_model(&text, DEFAULT_MAX_ATOMS).unwrap() else {
            panic!("kind changed")
        };
        assert_eq!(
            back.lattice().state_names(),
            original.lattice().state_names()
        );
        for phi in enumerate_formulas(original.atoms(), original.agents(), 2) {
            assert_eq!(
                back.extension(&phi).unwrap(),
                original.extension(&phi).unwrap()
            );
        }
    }

    #[test]
    fn bundled_files_are_canonical() {
        for text in [fixtures::TRADE_KLM_JSON, fixtures::TRADE_HMS_JSON] {
            let m = parse_model(text, DEFAULT_MAX_ATOMS).unwrap();
            let again = parse_model(&model_to_string(&m), DEFAULT_MAX_ATOMS).unwrap();
            assert_eq!(again, m);
        }
    }

    #[test]
    fn rejects_dangling_references() {
        let mut f = KlmFile::from_model(&fixtures::trade_klm());
        f.valuation.insert("i".into(), vec!["w9".into()]);
        assert!(matches!(
            f.into_model(DEFAULT_MAX_ATOMS),
            Err(LoadError::Reference(_))
        ));

        let mut f = HmsFile::from_model(&fixtures::trade_hms());
        f.correspondences.get_mut("B").unwrap().remove("i");
        assert!(matches!(
            f.into_model(),
            Err(LoadError::Hms(HmsError::MissingCorrespondence { .. }))
        ));
    }

    #[test]
    fn rejects_invalid_models() {
        let mut f = KlmFile::from_model(&fixtures::trade_klm());
        f.awareness
            .get_mut("O")
            .unwrap()
            .insert("w2@{i}".into(), "w2@{}".into());
        assert!(matches!(
            f.into_model(DEFAULT_MAX_ATOMS),
            Err(LoadError::Klm(_))
        ));

        let mut f = HmsFile::from_model(&fixtures::trade_hms());
        f.correspondences
            .get_mut("O")
            .unwrap()
            .insert("!i".into(), vec!["empty".into()]);
        assert!(matches!(
            f.into_model(),
            Err(LoadError::Hms(HmsError::InvalidFrame(_)))
        ));

        assert!(parse_model("{\"kind\": \"other\"}", DEFAULT_MAX_ATOMS)
            .unwrap_err()
            .is_syntax());
    }
}
