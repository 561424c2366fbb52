//! Kripke lattice models: a restriction lattice plus one awareness map per
//! agent, and the three-valued satisfaction relation over them.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{AgentId, AtomId, Formula};
use crate::kripke::{RestrictedWorld, RestrictionLattice};

/// A three-valued verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThreeVal {
    True,
    False,
    Undefined,
}

impl ThreeVal {
    pub fn from_bool(b: bool) -> Self {
        if b {
            ThreeVal::True
        } else {
            ThreeVal::False
        }
    }

    pub fn is_true(self) -> bool {
        self == ThreeVal::True
    }

    pub fn is_defined(self) -> bool {
        self != ThreeVal::Undefined
    }
}

impl fmt::Display for ThreeVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThreeVal::True => "true",
            ThreeVal::False => "false",
            ThreeVal::Undefined => "undefined",
        })
    }
}

/// A violated awareness-map property, with the first witness found in
/// `Ω_L` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AwarenessViolation {
    /// Some `w_X` has no image.
    PartialMap {
        agent: AgentId,
        missing: RestrictedWorld,
    },
    /// `π_a(w_X)` is not `w_Y` for some `Y ⊆ X`.
    NotDownwards {
        agent: AgentId,
        world: RestrictedWorld,
        image: RestrictedWorld,
    },
    /// `π_a(w_X) = w_Y` but some `v_Y ∈ I_a(w_Y)` maps outside `I_a(w_Y)`.
    NotIntrospective {
        agent: AgentId,
        world: RestrictedWorld,
        witness: RestrictedWorld,
        image: RestrictedWorld,
    },
    /// `π_a(w_X) = w_Z` but `π_a(w_Y) ≠ w_{Y∩Z}` for some `Y ⊆ X`.
    Surprise {
        agent: AgentId,
        world: RestrictedWorld,
        lower: RestrictedWorld,
        expected: RestrictedWorld,
        got: RestrictedWorld,
    },
}

impl AwarenessViolation {
    /// `"D"`, `"II"`, `"NS"`, or `"total"` for partial maps.
    pub fn property(&self) -> &'static str {
        match self {
            AwarenessViolation::PartialMap { .. } => "total",
            AwarenessViolation::NotDownwards { .. } => "D",
            AwarenessViolation::NotIntrospective { .. } => "II",
            AwarenessViolation::Surprise { .. } => "NS",
        }
    }

    pub fn agent(&self) -> &AgentId {
        match self {
            AwarenessViolation::PartialMap { agent, .. }
            | AwarenessViolation::NotDownwards { agent, .. }
            | AwarenessViolation::NotIntrospective { agent, .. }
            | AwarenessViolation::Surprise { agent, .. } => agent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KlmError {
    #[error("awareness maps violate {}", summarize(.0))]
    Violations(Vec<AwarenessViolation>),
    #[error("expected one awareness map per agent ({expected}), got {got}")]
    AgentCount { expected: usize, got: usize },
}

fn summarize(violations: &[AwarenessViolation]) -> String {
    violations
        .iter()
        .take(3)
        .map(|v| format!("{} for agent {} ({v:?})", v.property(), v.agent()))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("formula mentions atom {0} outside the model's atom set")]
    UnknownAtom(AtomId),
    #[error("formula mentions unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("world {0} is not in the model")]
    UnknownWorld(String),
}

/// `π_a`, stored densely over `Ω_L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AwarenessMap {
    agent: AgentId,
    images: Vec<RestrictedWorld>,
}

impl AwarenessMap {
    pub fn agent(&self) -> &AgentId {
        &self.agent
    }

    pub fn images(&self) -> &[RestrictedWorld] {
        &self.images
    }
}

/// A restriction lattice with validated awareness maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeLatticeModel {
    lattice: RestrictionLattice,
    awareness: Vec<AwarenessMap>,
}

/// Checks D, II and NS of one agent's map over the lattice; returns every
/// violation in `Ω_L` order.
pub fn check_awareness_map(
    lattice: &RestrictionLattice,
    agent: usize,
    images: &BTreeMap<RestrictedWorld, RestrictedWorld>,
) -> Vec<AwarenessViolation> {
    let name = lattice.base().agents()[agent].clone();
    let mut out = Vec::new();
    let mut dense = Vec::with_capacity(lattice.omega_len());
    for w in lattice.omega() {
        match images.get(&w) {
            Some(&img) if lattice.contains(img) => dense.push(Some(img)),
            _ => {
                out.push(AwarenessViolation::PartialMap {
                    agent: name.clone(),
                    missing: w,
                });
                dense.push(None);
            }
        }
    }
    let image = |w: RestrictedWorld| dense[lattice.omega_index(w)];

    for w in lattice.omega() {
        let Some(img) = image(w) else { continue };
        if img.world != w.world || !img.subset.is_subset(w.subset) {
            out.push(AwarenessViolation::NotDownwards {
                agent: name.clone(),
                world: w,
                image: img,
            });
        }
    }

    for w in lattice.omega() {
        let Some(img) = image(w) else { continue };
        let cell = lattice.info_cell(agent, img);
        for &v in &cell {
            if let Some(v_img) = image(v) {
                if !cell.contains(&v_img) {
                    out.push(AwarenessViolation::NotIntrospective {
                        agent: name.clone(),
                        world: w,
                        witness: v,
                        image: v_img,
                    });
                }
            }
        }
    }

    for w in lattice.omega() {
        let Some(img) = image(w) else { continue };
        let z = img.subset;
        for y in w.subset.subsets() {
            let lower = w.with_subset(y);
            let expected = w.with_subset(y.intersection(z));
            if let Some(got) = image(lower) {
                if got != expected {
                    out.push(AwarenessViolation::Surprise {
                        agent: name.clone(),
                        world: w,
                        lower,
                        expected,
                        got,
                    });
                }
            }
        }
    }
    out
}

/// Validates per-agent awareness maps (in the lattice's agent order) and
/// assembles the Kripke lattice model.
pub fn build_klm(
    lattice: RestrictionLattice,
    awareness: Vec<BTreeMap<RestrictedWorld, RestrictedWorld>>,
) -> Result<KripkeLatticeModel, KlmError> {
    let agents = lattice.base().agents().len();
    if awareness.len() != agents {
        return Err(KlmError::AgentCount {
            expected: agents,
            got: awareness.len(),
        });
    }
    let violations: Vec<_> = awareness
        .iter()
        .enumerate()
        .flat_map(|(a, map)| check_awareness_map(&lattice, a, map))
        .collect();
    if !violations.is_empty() {
        return Err(KlmError::Violations(violations));
    }
    let maps = awareness
        .into_iter()
        .enumerate()
        .map(|(a, map)| AwarenessMap {
            agent: lattice.base().agents()[a].clone(),
            images: lattice.omega().map(|w| map[&w]).collect(),
        })
        .collect();
    Ok(KripkeLatticeModel {
        lattice,
        awareness: maps,
    })
}

/// The identity awareness map for every agent.
pub fn identity_awareness(
    lattice: &RestrictionLattice,
) -> Vec<BTreeMap<RestrictedWorld, RestrictedWorld>> {
    let map: BTreeMap<_, _> = lattice.omega().map(|w| (w, w)).collect();
    vec![map; lattice.base().agents().len()]
}

impl KripkeLatticeModel {
    pub fn lattice(&self) -> &RestrictionLattice {
        &self.lattice
    }

    pub fn awareness(&self) -> &[AwarenessMap] {
        &self.awareness
    }

    /// `π_a(w_X)`.
    pub fn image(&self, agent: usize, world: RestrictedWorld) -> RestrictedWorld {
        self.awareness[agent].images[self.lattice.omega_index(world)]
    }

    /// Awareness map of one agent as an ordered map.
    pub fn awareness_map(&self, agent: usize) -> BTreeMap<RestrictedWorld, RestrictedWorld> {
        self.lattice
            .omega()
            .map(|w| (w, self.image(agent, w)))
            .collect()
    }

    pub fn world_ref(&self, world: RestrictedWorld) -> String {
        self.lattice.base().world_ref(world)
    }

    /// Truth value of `phi` at `world`.
    pub fn satisfies(&self, world: RestrictedWorld, phi: &Formula) -> Result<ThreeVal, EvalError> {
        if !self.lattice.contains(world) {
            return Err(EvalError::UnknownWorld(world.to_string()));
        }
        let ext = self.extension(phi)?;
        Ok(ext[self.lattice.omega_index(world)])
    }

    /// Truth values of `phi` at every world of `Ω_L`, indexed by
    /// [`RestrictionLattice::omega_index`].
    pub fn extension(&self, phi: &Formula) -> Result<Vec<ThreeVal>, EvalError> {
        Ok(self.eval(phi)?.values())
    }

    /// `phi`'s extension as truth and definedness sets over `Ω_L`.
    pub fn eval(&self, phi: &Formula) -> Result<Extension, EvalError> {
        match phi {
            Formula::Top => Ok(self.ext_top()),
            Formula::Atom(p) => {
                let idx = self
                    .lattice
                    .base()
                    .atom_index(p)
                    .ok_or_else(|| EvalError::UnknownAtom(p.clone()))?;
                Ok(self.ext_atom(idx))
            }
            Formula::Not(inner) => Ok(self.ext_not(&self.eval(inner)?)),
            Formula::And(lhs, rhs) => Ok(self.ext_and(&self.eval(lhs)?, &self.eval(rhs)?)),
            Formula::Knows(agent, inner) => {
                let a = self
                    .lattice
                    .base()
                    .agent_index(agent)
                    .ok_or_else(|| EvalError::UnknownAgent(agent.clone()))?;
                Ok(self.ext_knows(a, &self.eval(inner)?))
            }
            other => self.eval(&other.normalize()),
        }
    }

    pub fn ext_top(&self) -> Extension {
        let mut all = FixedBitSet::with_capacity(self.lattice.omega_len());
        all.insert_range(..);
        Extension {
            truth: all.clone(),
            defined: all,
        }
    }

    pub fn ext_atom(&self, atom: usize) -> Extension {
        let n = self.lattice.omega_len();
        let mut truth = FixedBitSet::with_capacity(n);
        let mut defined = FixedBitSet::with_capacity(n);
        for (i, w) in self.lattice.omega().enumerate() {
            if w.subset.contains(atom) {
                defined.insert(i);
                truth.set(i, self.lattice.base().holds(atom, w.world));
            }
        }
        Extension { truth, defined }
    }

    pub fn ext_not(&self, e: &Extension) -> Extension {
        let mut truth = e.defined.clone();
        truth.difference_with(&e.truth);
        Extension {
            truth,
            defined: e.defined.clone(),
        }
    }

    pub fn ext_and(&self, lhs: &Extension, rhs: &Extension) -> Extension {
        let mut truth = lhs.truth.clone();
        truth.intersect_with(&rhs.truth);
        let mut defined = lhs.defined.clone();
        defined.intersect_with(&rhs.defined);
        Extension { truth, defined }
    }

    /// `K_a`: true at a defined `w_X` iff the argument is true throughout
    /// `I_a(π_a(w_X))`.
    pub fn ext_knows(&self, agent: usize, e: &Extension) -> Extension {
        let base = self.lattice.base();
        let n = base.world_count();
        let images = &self.awareness[agent].images;
        let mut truth = FixedBitSet::with_capacity(self.lattice.omega_len());
        for i in e.defined.ones() {
            let img = images[i];
            let offset = img.subset.index() * n;
            if base
                .successors(agent, img.world)
                .iter()
                .all(|&v| e.truth.contains(offset + v))
            {
                truth.insert(i);
            }
        }
        Extension {
            truth,
            defined: e.defined.clone(),
        }
    }
}

/// A formula's extension over `Ω_L`. `truth` is a subset of `defined`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub truth: FixedBitSet,
    pub defined: FixedBitSet,
}

impl Extension {
    pub fn value(&self, index: usize) -> ThreeVal {
        if !self.defined.contains(index) {
            ThreeVal::Undefined
        } else {
            ThreeVal::from_bool(self.truth.contains(index))
        }
    }

    pub fn values(&self) -> Vec<ThreeVal> {
        (0..self.defined.len()).map(|i| self.value(i)).collect()
    }

    /// First index that is defined but not true.
    pub fn first_failure(&self) -> Option<usize> {
        self.defined.ones().find(|&i| !self.truth.contains(i))
    }

    /// Every index that is defined but not true.
    pub fn failures(&self) -> impl Iterator<Item = usize> + '_ {
        self.defined.ones().filter(|&i| !self.truth.contains(i))
    }
}

/// Outcome of a validity check over a model list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// Index of the model and the first world (in `Ω_L` order) where every
    /// atom of the formula is defined but the formula is not satisfied.
    Counterexample {
        model: usize,
        world: RestrictedWorld,
    },
}

impl Validity {
    pub fn is_valid(self) -> bool {
        self == Validity::Valid
    }
}

/// Three-valued validity: satisfied wherever all of its atoms have a truth
/// value.
pub fn valid_over(models: &[KripkeLatticeModel], phi: &Formula) -> Result<Validity, EvalError> {
    for (m, klm) in models.iter().enumerate() {
        if let Some(world) = klm.first_failure(phi)? {
            return Ok(Validity::Counterexample { model: m, world });
        }
    }
    Ok(Validity::Valid)
}

impl KripkeLatticeModel {
    /// First world where `phi`'s atoms are all defined and `phi` is not true.
    pub fn first_failure(&self, phi: &Formula) -> Result<Option<RestrictedWorld>, EvalError> {
        Ok(self
            .eval(phi)?
            .first_failure()
            .map(|i| self.lattice.omega_world(i)))
    }
}
