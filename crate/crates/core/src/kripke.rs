//! Finite Kripke models, their restrictions to atom subsets and the
//! restriction lattice.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::atoms::{AtomSet, ATOM_SET_CAPACITY};
use crate::formula::{AgentId, AtomId};

/// Default cap on `|At|` for materializing the full powerset of restrictions.
pub const DEFAULT_MAX_ATOMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("model has no worlds")]
    NoWorlds,
    #[error("model has no agents")]
    NoAgents,
    #[error("duplicate world {0:?}")]
    DuplicateWorld(String),
    #[error("duplicate agent {0}")]
    DuplicateAgent(AgentId),
    #[error("duplicate atom {0}")]
    DuplicateAtom(AtomId),
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("unknown atom {0}")]
    UnknownAtom(AtomId),
    #[error("atom subset {0} is not contained in the model's atom set")]
    SubsetOutOfRange(AtomSet),
    #[error("world index {0} out of range")]
    WorldOutOfRange(usize),
    #[error("{count} atoms exceed the powerset cap of {cap}")]
    TooManyAtoms { count: usize, cap: usize },
    #[error("restricted world {0} is not part of this restriction")]
    WrongRestriction(String),
    #[error("malformed world reference {0:?}: expected id@{{atom,...}}")]
    BadWorldRef(String),
}

/// A Kripke model `(W, R, V)` for a finite atom set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    atoms: Vec<AtomId>,
    agents: Vec<AgentId>,
    worlds: Vec<String>,
    relations: Vec<BTreeSet<(usize, usize)>>,
    valuation: Vec<BTreeSet<usize>>,
    successors: Vec<Vec<Vec<usize>>>,
    world_index: HashMap<String, usize>,
}

impl KripkeModel {
    /// Builds a model from index-based relations (one pair list per agent)
    /// and valuations (one world list per atom).
    pub fn new(
        atoms: Vec<AtomId>,
        agents: Vec<AgentId>,
        worlds: Vec<String>,
        relations: Vec<Vec<(usize, usize)>>,
        valuation: Vec<Vec<usize>>,
    ) -> Result<Self, KripkeError> {
        if worlds.is_empty() {
            return Err(KripkeError::NoWorlds);
        }
        if agents.is_empty() {
            return Err(KripkeError::NoAgents);
        }
        if atoms.len() > ATOM_SET_CAPACITY {
            return Err(KripkeError::TooManyAtoms {
                count: atoms.len(),
                cap: ATOM_SET_CAPACITY,
            });
        }
        let mut world_index = HashMap::new();
        for (i, w) in worlds.iter().enumerate() {
            if world_index.insert(w.clone(), i).is_some() {
                return Err(KripkeError::DuplicateWorld(w.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for a in &agents {
            if !seen.insert(a) {
                return Err(KripkeError::DuplicateAgent(a.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for p in &atoms {
            if !seen.insert(p) {
                return Err(KripkeError::DuplicateAtom(p.clone()));
            }
        }
        assert_eq!(relations.len(), agents.len(), "one relation per agent");
        assert_eq!(valuation.len(), atoms.len(), "one valuation entry per atom");
        let n = worlds.len();
        let check = |w: usize| {
            if w < n {
                Ok(w)
            } else {
                Err(KripkeError::WorldOutOfRange(w))
            }
        };
        let mut rels = Vec::with_capacity(relations.len());
        let mut successors = Vec::with_capacity(relations.len());
        for pairs in relations {
            let mut set = BTreeSet::new();
            let mut succ = vec![Vec::new(); n];
            for (w, v) in pairs {
                check(w)?;
                check(v)?;
                if set.insert((w, v)) {
                    succ[w].push(v);
                }
            }
            for s in &mut succ {
                s.sort_unstable();
            }
            rels.push(set);
            successors.push(succ);
        }
        let mut val = Vec::with_capacity(valuation.len());
        for ws in valuation {
            let mut set = BTreeSet::new();
            for w in ws {
                set.insert(check(w)?);
            }
            val.push(set);
        }
        Ok(KripkeModel {
            atoms,
            agents,
            worlds,
            relations: rels,
            valuation: val,
            successors,
            world_index,
        })
    }

    pub fn atoms(&self) -> &[AtomId] {
        &self.atoms
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn all_atoms(&self) -> AtomSet {
        AtomSet::full(self.atoms.len())
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.world_index.get(name).copied()
    }

    pub fn agent_index(&self, agent: &AgentId) -> Option<usize> {
        self.agents.iter().position(|a| a == agent)
    }

    pub fn atom_index(&self, atom: &AtomId) -> Option<usize> {
        self.atoms.iter().position(|p| p == atom)
    }

    /// `R_a` as explicit pairs.
    pub fn relation(&self, agent: usize) -> &BTreeSet<(usize, usize)> {
        &self.relations[agent]
    }

    /// `{v : w R_a v}`, sorted.
    pub fn successors(&self, agent: usize, world: usize) -> &[usize] {
        &self.successors[agent][world]
    }

    /// `V(p)`.
    pub fn valuation(&self, atom: usize) -> &BTreeSet<usize> {
        &self.valuation[atom]
    }

    pub fn holds(&self, atom: usize, world: usize) -> bool {
        self.valuation[atom].contains(&world)
    }

    /// Converts named atoms into an [`AtomSet`] over this model's atom order.
    pub fn atom_set<'a>(
        &self,
        atoms: impl IntoIterator<Item = &'a AtomId>,
    ) -> Result<AtomSet, KripkeError> {
        let mut set = AtomSet::EMPTY;
        for p in atoms {
            let i = self
                .atom_index(p)
                .ok_or_else(|| KripkeError::UnknownAtom(p.clone()))?;
            set.insert(i);
        }
        Ok(set)
    }

    /// Atom names of `set`, sorted by name.
    pub fn atom_names(&self, set: AtomSet) -> Vec<&AtomId> {
        let mut names: Vec<_> = set.iter().map(|i| &self.atoms[i]).collect();
        names.sort();
        names
    }

    /// Whether `R_a` is reflexive, symmetric and transitive on `W`.
    pub fn is_equivalence(&self, agent: &AgentId) -> Result<bool, KripkeError> {
        let a = self
            .agent_index(agent)
            .ok_or_else(|| KripkeError::UnknownAgent(agent.clone()))?;
        Ok(self.relation_is_equivalence(a))
    }

    pub(crate) fn relation_is_equivalence(&self, a: usize) -> bool {
        let rel = &self.relations[a];
        let n = self.worlds.len();
        let reflexive = (0..n).all(|w| rel.contains(&(w, w)));
        let symmetric = rel.iter().all(|&(w, v)| rel.contains(&(v, w)));
        let transitive = rel
            .iter()
            .all(|&(w, v)| self.successors[a][v].iter().all(|&u| rel.contains(&(w, u))));
        reflexive && symmetric && transitive
    }

    pub fn all_equivalence(&self) -> bool {
        (0..self.agents.len()).all(|a| self.relation_is_equivalence(a))
    }

    pub fn restrict(&self, subset: AtomSet) -> Result<Restriction, KripkeError> {
        if !subset.is_subset(self.all_atoms()) {
            return Err(KripkeError::SubsetOutOfRange(subset));
        }
        let n = self.worlds.len();
        Ok(Restriction {
            subset,
            worlds: (0..n).map(|w| RestrictedWorld::new(w, subset)).collect(),
            successors: self.successors.clone(),
            valuation: subset
                .iter()
                .map(|p| (p, self.valuation[p].clone()))
                .collect(),
        })
    }

    /// Restriction to named atoms.
    pub fn restrict_to<'a>(
        &self,
        atoms: impl IntoIterator<Item = &'a AtomId>,
    ) -> Result<Restriction, KripkeError> {
        self.restrict(self.atom_set(atoms)?)
    }

    /// Formats `w@{p,q}` with atoms sorted by name.
    pub fn world_ref(&self, world: RestrictedWorld) -> String {
        let atoms: Vec<&str> = self
            .atom_names(world.subset)
            .into_iter()
            .map(AtomId::as_str)
            .collect();
        format!("{}@{{{}}}", self.worlds[world.world], atoms.join(","))
    }

    /// Parses `w@{p,q}`.
    pub fn parse_world_ref(&self, text: &str) -> Result<RestrictedWorld, KripkeError> {
        let bad = || KripkeError::BadWorldRef(text.to_string());
        let (name, rest) = text.split_once('@').ok_or_else(bad)?;
        let inner = rest
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(bad)?;
        let world = self
            .world_index(name.trim())
            .ok_or_else(|| KripkeError::UnknownWorld(name.trim().to_string()))?;
        let mut subset = AtomSet::EMPTY;
        for part in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let atom = AtomId::new(part).map_err(|_| bad())?;
            let i = self
                .atom_index(&atom)
                .ok_or(KripkeError::UnknownAtom(atom))?;
            subset.insert(i);
        }
        Ok(RestrictedWorld::new(world, subset))
    }
}

/// A world `w_X`: base world `w` tagged with atom subset `X`.
///
/// Equality is componentwise, so restrictions to different subsets are
/// disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RestrictedWorld {
    pub world: usize,
    pub subset: AtomSet,
}

impl RestrictedWorld {
    pub fn new(world: usize, subset: AtomSet) -> Self {
        RestrictedWorld { world, subset }
    }

    /// The same base world under another atom subset.
    pub fn with_subset(self, subset: AtomSet) -> Self {
        RestrictedWorld::new(self.world, subset)
    }
}

impl fmt::Display for RestrictedWorld {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}@{}", self.world, self.subset)
    }
}

/// The restriction `K_X` of a Kripke model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    subset: AtomSet,
    worlds: Vec<RestrictedWorld>,
    // successors[a][w] lists v with (w_X, v_X) in R_Xa
    successors: Vec<Vec<Vec<usize>>>,
    valuation: Vec<(usize, BTreeSet<usize>)>,
}

impl Restriction {
    pub fn subset(&self) -> AtomSet {
        self.subset
    }

    pub fn worlds(&self) -> &[RestrictedWorld] {
        &self.worlds
    }

    /// `R_Xa` as pairs of restricted worlds.
    pub fn relation(&self, agent: usize) -> BTreeSet<(RestrictedWorld, RestrictedWorld)> {
        self.successors[agent]
            .iter()
            .enumerate()
            .flat_map(|(w, vs)| vs.iter().map(move |&v| (w, v)))
            .map(|(w, v)| (self.worlds[w], self.worlds[v]))
            .collect()
    }

    /// `V_X(p)`, or `None` when `p` is not in `X`.
    pub fn valuation(&self, atom: usize) -> Option<Vec<RestrictedWorld>> {
        self.valuation
            .iter()
            .find(|(p, _)| *p == atom)
            .map(|(_, ws)| ws.iter().map(|&w| self.worlds[w]).collect())
    }

    pub fn valuation_domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.valuation.iter().map(|(p, _)| *p)
    }

    /// `I_a(w_X)`.
    pub fn info_cell(
        &self,
        agent: usize,
        world: RestrictedWorld,
    ) -> Result<Vec<RestrictedWorld>, KripkeError> {
        if world.subset != self.subset || world.world >= self.worlds.len() {
            return Err(KripkeError::WrongRestriction(world.to_string()));
        }
        Ok(self.successors[agent][world.world]
            .iter()
            .map(|&v| self.worlds[v])
            .collect())
    }
}

/// All restrictions of one Kripke model, ordered by inclusion of their atom
/// subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionLattice {
    base: KripkeModel,
    restrictions: Vec<Restriction>,
}

impl RestrictionLattice {
    pub fn base(&self) -> &KripkeModel {
        &self.base
    }

    /// Restrictions indexed by `AtomSet::index`.
    pub fn restrictions(&self) -> &[Restriction] {
        &self.restrictions
    }

    pub fn restriction(&self, subset: AtomSet) -> &Restriction {
        &self.restrictions[subset.index()]
    }

    /// `K_X ⊴ K_Y`.
    pub fn leq(&self, x: AtomSet, y: AtomSet) -> bool {
        x.is_subset(y)
    }

    pub fn meet(&self, x: AtomSet, y: AtomSet) -> AtomSet {
        x.intersection(y)
    }

    pub fn join(&self, x: AtomSet, y: AtomSet) -> AtomSet {
        x.union(y)
    }

    /// `|Ω_L|`, the number of restricted worlds over all restrictions.
    pub fn omega_len(&self) -> usize {
        self.restrictions.len() * self.base.world_count()
    }

    /// Dense index of `w_X` in `Ω_L`.
    pub fn omega_index(&self, world: RestrictedWorld) -> usize {
        world.subset.index() * self.base.world_count() + world.world
    }

    pub fn omega_world(&self, index: usize) -> RestrictedWorld {
        let n = self.base.world_count();
        RestrictedWorld::new(index % n, AtomSet::from_bits((index / n) as u32))
    }

    pub fn contains(&self, world: RestrictedWorld) -> bool {
        world.world < self.base.world_count() && world.subset.is_subset(self.base.all_atoms())
    }

    /// Every restricted world, ordered by subset then base world.
    pub fn omega(&self) -> impl Iterator<Item = RestrictedWorld> + '_ {
        (0..self.omega_len()).map(|i| self.omega_world(i))
    }

    /// `I_a(w_X)`.
    pub fn info_cell(&self, agent: usize, world: RestrictedWorld) -> Vec<RestrictedWorld> {
        self.base
            .successors(agent, world.world)
            .iter()
            .map(|&v| RestrictedWorld::new(v, world.subset))
            .collect()
    }
}

/// Materializes the restriction lattice of `model`.
pub fn build_lattice(
    model: KripkeModel,
    max_atoms: usize,
) -> Result<RestrictionLattice, KripkeError> {
    let count = model.atoms().len();
    let cap = max_atoms.min(ATOM_SET_CAPACITY - 1);
    if count > cap {
        return Err(KripkeError::TooManyAtoms { count, cap });
    }
    let restrictions = (0..1usize << count)
        .map(|bits| model.restrict(AtomSet::from_bits(bits as u32)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RestrictionLattice {
        base: model,
        restrictions,
    })
}
