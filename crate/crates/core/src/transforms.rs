//! Conversions between unawareness models and Kripke lattice models, the
//! state correspondence between a model and its L-transform, and exhaustive
//! agreement checks.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::atoms::AtomSet;
use crate::formula::{enumerate_formulas, AgentId, AtomId, Formula};
use crate::hms::{
    merge_indistinguishable, Event, HmsError, HmsModel, StateSet, StateSpaceLattice,
    UnawarenessFrame,
};
use crate::kripke::{build_lattice, KripkeError, KripkeModel, RestrictedWorld, DEFAULT_MAX_ATOMS};
use crate::lattice_model::{build_klm, EvalError, KlmError, KripkeLatticeModel, ThreeVal};
use crate::logic::generate_models;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("no least state-space with atom profile {{{}}}: candidates {}", join(.profile), join(.candidates))]
    AmbiguousMinSpace {
        profile: Vec<AtomId>,
        candidates: Vec<String>,
    },
    #[error("accessibility relation of agent {agent} is not an equivalence relation")]
    NonEquivalenceRelation { agent: AgentId },
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Klm(#[from] KlmError),
    #[error(transparent)]
    Hms(#[from] HmsError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Per atom, the states where it has a truth value.
fn defined_states(model: &HmsModel) -> Vec<StateSet> {
    (0..model.atoms().len())
        .map(|p| {
            let e = model.valuation(p);
            let mut set = e.upset().clone();
            set.union_with(model.frame().neg_event(e).upset());
            set
        })
        .collect()
}

/// `At(O)`: atoms with a truth value at every state of `states`, over the
/// model's atom order.
pub fn atom_profile(model: &HmsModel, states: &StateSet) -> AtomSet {
    profile_with(&defined_states(model), states)
}

fn profile_with(defined: &[StateSet], states: &StateSet) -> AtomSet {
    let mut set = AtomSet::EMPTY;
    for (p, d) in defined.iter().enumerate() {
        if states.is_subset(d) {
            set.insert(p);
        }
    }
    set
}

fn space_profiles(model: &HmsModel) -> Vec<AtomSet> {
    let defined = defined_states(model);
    let lat = model.lattice();
    (0..lat.space_count())
        .map(|sp| profile_with(&defined, &lat.space_set(sp)))
        .collect()
}

/// `ℓ`: for each state, the restricted worlds it corresponds to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateCorrespondence {
    sets: Vec<Vec<RestrictedWorld>>,
}

impl StateCorrespondence {
    pub fn get(&self, state: usize) -> &[RestrictedWorld] {
        &self.sets[state]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Number of (state, world) pairs.
    pub fn pair_count(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// State name to world references, for serialization.
    pub fn to_table(
        &self,
        model: &HmsModel,
        klm: &KripkeLatticeModel,
    ) -> BTreeMap<String, Vec<String>> {
        self.sets
            .iter()
            .enumerate()
            .map(|(s, ws)| {
                (
                    model.lattice().state_name(s).to_string(),
                    ws.iter().map(|&w| klm.world_ref(w)).collect(),
                )
            })
            .collect()
    }
}

fn correspondence_of(model: &HmsModel, profiles: &[AtomSet], state: usize) -> Vec<RestrictedWorld> {
    let lat = model.lattice();
    let top = lat.top().expect("valid lattice");
    let sp = lat.space_of(state);
    lat.states_of(top)
        .iter()
        .enumerate()
        .filter(|&(_, &w)| lat.project(w, sp) == Some(state))
        .map(|(k, _)| RestrictedWorld::new(k, profiles[sp]))
        .collect()
}

/// `ℓ(s)`. Worlds are indexed by position in the maximal space.
pub fn state_correspondence(
    model: &HmsModel,
    state: &str,
) -> Result<Vec<RestrictedWorld>, TransformError> {
    let s = model.state_index(state)?;
    Ok(correspondence_of(model, &space_profiles(model), s))
}

/// The L-transform with the default powerset cap.
pub fn l_transform(
    model: &HmsModel,
) -> Result<(KripkeLatticeModel, StateCorrespondence), TransformError> {
    l_transform_capped(model, DEFAULT_MAX_ATOMS)
}

/// Builds the Kripke lattice model over the maximal space, with awareness
/// maps read off the possibility correspondences, and the state
/// correspondence. The result is validated by [`build_klm`].
pub fn l_transform_capped(
    model: &HmsModel,
    max_atoms: usize,
) -> Result<(KripkeLatticeModel, StateCorrespondence), TransformError> {
    let lat = model.lattice();
    let frame = model.frame();
    let top = lat.top().expect("valid lattice");
    let worlds: Vec<usize> = lat.states_of(top).to_vec();
    let agents = model.agents().len();
    let profiles = space_profiles(model);

    let pi_space = |a: usize, s: usize| {
        lat.space_of_set(frame.possibility(a, s))
            .expect("confinement")
    };

    let mut relations = Vec::with_capacity(agents);
    for a in 0..agents {
        let mut pairs = Vec::new();
        for (k, &w) in worlds.iter().enumerate() {
            let sp = pi_space(a, w);
            for (j, &v) in worlds.iter().enumerate() {
                if frame
                    .possibility(a, w)
                    .contains(lat.project(v, sp).expect("below top"))
                {
                    pairs.push((k, j));
                }
            }
        }
        relations.push(pairs);
    }
    let valuation = (0..model.atoms().len())
        .map(|p| {
            worlds
                .iter()
                .enumerate()
                .filter(|&(_, &w)| model.valuation(p).upset().contains(w))
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let kripke = KripkeModel::new(
        model.atoms().to_vec(),
        model.agents().to_vec(),
        worlds
            .iter()
            .map(|&w| lat.state_name(w).to_string())
            .collect(),
        relations,
        valuation,
    )?;
    let restriction = build_lattice(kripke, max_atoms)?;

    let all = restriction.base().all_atoms();
    let mut min_space: Vec<Option<usize>> = Vec::with_capacity(1 << all.len());
    for x in 0..(1u32 << all.len()) {
        let x = AtomSet::from_bits(x);
        let cands: Vec<usize> = (0..lat.space_count())
            .filter(|&sp| profiles[sp] == x)
            .collect();
        let Some(&first) = cands.first() else {
            min_space.push(None);
            continue;
        };
        let inf = cands.iter().try_fold(first, |acc, &sp| lat.meet(acc, sp));
        match inf {
            Some(inf) if cands.contains(&inf) => min_space.push(Some(inf)),
            _ => {
                return Err(TransformError::AmbiguousMinSpace {
                    profile: restriction
                        .base()
                        .atom_names(x)
                        .into_iter()
                        .cloned()
                        .collect(),
                    candidates: cands
                        .iter()
                        .map(|&sp| lat.space_name(sp).to_string())
                        .collect(),
                })
            }
        }
    }

    let top_profile = profiles[top];
    let mut maps = Vec::with_capacity(agents);
    for a in 0..agents {
        let represented = |w: RestrictedWorld, sx: usize| {
            let s = lat.project(worlds[w.world], sx).expect("below top");
            w.with_subset(profiles[pi_space(a, s)])
        };
        let mut map = BTreeMap::new();
        for w in restriction.omega() {
            let image = match min_space[w.subset.index()] {
                Some(sx) => represented(w, sx),
                None => {
                    let sx = min_space[top_profile.index()].expect("top is represented");
                    let z = represented(w.with_subset(top_profile), sx).subset;
                    w.with_subset(w.subset.intersection(z))
                }
            };
            map.insert(w, image);
        }
        maps.push(map);
    }
    let klm = build_klm(restriction, maps)?;
    let corr = StateCorrespondence {
        sets: (0..lat.state_count())
            .map(|s| correspondence_of(model, &profiles, s))
            .collect(),
    };
    Ok((klm, corr))
}

/// Name of the space `W_X`.
pub fn space_name(klm: &KripkeLatticeModel, subset: AtomSet) -> String {
    let names: Vec<&str> = klm
        .lattice()
        .base()
        .atom_names(subset)
        .into_iter()
        .map(AtomId::as_str)
        .collect();
    format!("W{{{}}}", names.join(","))
}

/// The H-transform: one space per restriction, states named by world
/// reference and indexed as in `Ω_L`, `Π_a(w_X) = I_a(π_a(w_X))`.
pub fn h_transform(klm: &KripkeLatticeModel) -> Result<HmsModel, TransformError> {
    let rl = klm.lattice();
    let base = rl.base();
    for (a, agent) in base.agents().iter().enumerate() {
        if !base.relation_is_equivalence(a) {
            return Err(TransformError::NonEquivalenceRelation {
                agent: agent.clone(),
            });
        }
    }
    let all = base.all_atoms();
    let subsets: Vec<AtomSet> = (0..(1u32 << all.len())).map(AtomSet::from_bits).collect();
    let spaces = subsets
        .iter()
        .map(|&x| {
            let states = (0..base.world_count())
                .map(|w| base.world_ref(RestrictedWorld::new(w, x)))
                .collect();
            (space_name(klm, x), states)
        })
        .collect();
    let mut order = Vec::new();
    let mut projections = Vec::new();
    for &y in &subsets {
        for p in y.iter() {
            let mut x = y;
            x = AtomSet::from_bits(x.bits() & !(1 << p));
            order.push((space_name(klm, x), space_name(klm, y)));
            for w in 0..base.world_count() {
                projections.push((
                    base.world_ref(RestrictedWorld::new(w, y)),
                    space_name(klm, x),
                    base.world_ref(RestrictedWorld::new(w, x)),
                ));
            }
        }
    }
    let lattice = StateSpaceLattice::new(spaces, order, projections)?;
    let corr = (0..base.agents().len())
        .map(|a| {
            rl.omega()
                .map(|w| {
                    rl.info_cell(a, klm.image(a, w))
                        .into_iter()
                        .map(|v| rl.omega_index(v))
                        .collect()
                })
                .collect()
        })
        .collect();
    let frame = UnawarenessFrame::new(lattice, base.agents().to_vec(), corr)?;
    let mut valuation = Vec::new();
    for (p, atom) in base.atoms().iter().enumerate() {
        let single = AtomSet::singleton(p);
        let lat = frame.lattice();
        let mut gen = lat.empty_set();
        for &w in base.valuation(p) {
            gen.insert(rl.omega_index(RestrictedWorld::new(w, single)));
        }
        let space = lat
            .space_index(&space_name(klm, single))
            .expect("space exists");
        valuation.push((atom.clone(), Event::new(lat, space, gen)?));
    }
    Ok(HmsModel::new(frame, valuation)?)
}

/// A failed cell/possibility agreement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellCounterexample {
    pub agent: AgentId,
    pub world: String,
    pub other: String,
    pub in_cell: bool,
    pub in_possibility: bool,
}

/// Checks, against the model's own L-transform, that for every agent and
/// every `w` in the maximal space with `Π_a(w) ⊆ S`, `Y = At(S)`:
/// `v_Y ∈ I_a(w_Y)` iff `r_S(v) ∈ Π_a(w)`. Returns the number of checked
/// pairs.
pub fn check_cells(model: &HmsModel) -> Result<Result<usize, CellCounterexample>, TransformError> {
    let (klm, _) = l_transform(model)?;
    Ok(check_cells_against(model, &klm))
}

/// [`check_cells`] against a given Kripke lattice model whose worlds are
/// the maximal space's states in order.
pub fn check_cells_against(
    model: &HmsModel,
    klm: &KripkeLatticeModel,
) -> Result<usize, CellCounterexample> {
    let lat = model.lattice();
    let top = lat.top().expect("valid lattice");
    let worlds = lat.states_of(top);
    let profiles = space_profiles(model);
    let rl = klm.lattice();
    let mut checked = 0;
    for a in 0..model.agents().len() {
        for (k, &w) in worlds.iter().enumerate() {
            let pi = model.frame().possibility(a, w);
            let sp = lat.space_of_set(pi).expect("confinement");
            let y = profiles[sp];
            let cell = rl.info_cell(a, RestrictedWorld::new(k, y));
            for (j, &v) in worlds.iter().enumerate() {
                let in_cell = cell.contains(&RestrictedWorld::new(j, y));
                let in_possibility = pi.contains(lat.project(v, sp).expect("below top"));
                checked += 1;
                if in_cell != in_possibility {
                    return Err(CellCounterexample {
                        agent: model.agents()[a].clone(),
                        world: klm.world_ref(RestrictedWorld::new(k, y)),
                        other: klm.world_ref(RestrictedWorld::new(j, y)),
                        in_cell,
                        in_possibility,
                    });
                }
            }
        }
    }
    Ok(checked)
}

/// A disagreement between the two satisfaction relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceCounterexample {
    pub formula: Formula,
    pub state: String,
    pub world: String,
    pub lhs: ThreeVal,
    pub rhs: ThreeVal,
}

impl fmt::Display for EquivalenceCounterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at state {} is {} but at world {} is {}",
            self.formula, self.state, self.lhs, self.world, self.rhs
        )
    }
}

/// Outcome of an exhaustive agreement sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub formulas: usize,
    pub pairs: usize,
    pub counterexamples: usize,
    pub first: Option<EquivalenceCounterexample>,
}

impl EquivalenceReport {
    pub fn is_ok(&self) -> bool {
        self.counterexamples == 0
    }

    /// `"0 counterexamples / N formulas × M (state,world) pairs"`.
    pub fn summary(&self) -> String {
        format!(
            "{} counterexamples / {} formulas × {} (state,world) pairs",
            self.counterexamples, self.formulas, self.pairs
        )
    }
}

/// Compares `M, s ⊨ φ` with `L(M), v ⊩ φ` for every formula up to
/// `max_depth`, every state `s` and every `v ∈ ℓ(s)`.
pub fn check_equivalence_l(
    model: &HmsModel,
    max_depth: usize,
) -> Result<EquivalenceReport, TransformError> {
    let (klm, corr) = l_transform(model)?;
    check_equivalence_l_against(model, &klm, &corr, max_depth)
}

/// [`check_equivalence_l`] against a given transform and correspondence.
pub fn check_equivalence_l_against(
    model: &HmsModel,
    klm: &KripkeLatticeModel,
    corr: &StateCorrespondence,
    max_depth: usize,
) -> Result<EquivalenceReport, TransformError> {
    let formulas = enumerate_formulas(model.atoms(), model.agents(), max_depth);
    let rl = klm.lattice();
    let mut report = EquivalenceReport {
        formulas: formulas.len(),
        pairs: corr.pair_count(),
        counterexamples: 0,
        first: None,
    };
    for phi in &formulas {
        let lhs = model.extension(phi)?;
        let rhs = klm.extension(phi)?;
        for (s, &l) in lhs.iter().enumerate() {
            for &v in corr.get(s) {
                let r = rhs[rl.omega_index(v)];
                if l != r {
                    report.counterexamples += 1;
                    report
                        .first
                        .get_or_insert_with(|| EquivalenceCounterexample {
                            formula: phi.clone(),
                            state: model.lattice().state_name(s).to_string(),
                            world: klm.world_ref(v),
                            lhs: l,
                            rhs: r,
                        });
                }
            }
        }
    }
    Ok(report)
}

/// Compares `K, w_X ⊩ φ` with `H(K), w_X ⊨ φ` for every formula up to
/// `max_depth` and every restricted world.
pub fn check_equivalence_h(
    klm: &KripkeLatticeModel,
    max_depth: usize,
) -> Result<EquivalenceReport, TransformError> {
    let hms = h_transform(klm)?;
    check_equivalence_h_against(klm, &hms, max_depth)
}

/// [`check_equivalence_h`] against a given H-transform.
pub fn check_equivalence_h_against(
    klm: &KripkeLatticeModel,
    hms: &HmsModel,
    max_depth: usize,
) -> Result<EquivalenceReport, TransformError> {
    let base = klm.lattice().base();
    let formulas = enumerate_formulas(base.atoms(), base.agents(), max_depth);
    let mut report = EquivalenceReport {
        formulas: formulas.len(),
        pairs: klm.lattice().omega_len(),
        counterexamples: 0,
        first: None,
    };
    for phi in &formulas {
        let lhs = klm.extension(phi)?;
        let rhs = hms.extension(phi)?;
        for (i, w) in klm.lattice().omega().enumerate() {
            if lhs[i] != rhs[i] {
                report.counterexamples += 1;
                report
                    .first
                    .get_or_insert_with(|| EquivalenceCounterexample {
                        formula: phi.clone(),
                        state: hms.lattice().state_name(i).to_string(),
                        world: klm.world_ref(w),
                        lhs: lhs[i],
                        rhs: rhs[i],
                    });
            }
        }
    }
    Ok(report)
}

/// A world permutation `σ` with `b = σ(a)` on relations, valuation and
/// awareness maps, if one exists. Atom and agent lists must agree in order.
pub fn find_isomorphism(a: &KripkeLatticeModel, b: &KripkeLatticeModel) -> Option<Vec<usize>> {
    let (ka, kb) = (a.lattice().base(), b.lattice().base());
    if ka.atoms() != kb.atoms()
        || ka.agents() != kb.agents()
        || ka.world_count() != kb.world_count()
    {
        return None;
    }
    let n = ka.world_count();
    let mut sigma = Vec::with_capacity(n);
    let mut used = vec![false; n];
    search(a, b, &mut sigma, &mut used).then_some(sigma)
}

fn search(
    a: &KripkeLatticeModel,
    b: &KripkeLatticeModel,
    sigma: &mut Vec<usize>,
    used: &mut [bool],
) -> bool {
    let n = used.len();
    if sigma.len() == n {
        return is_isomorphism(a, b, sigma);
    }
    let w = sigma.len();
    let (ka, kb) = (a.lattice().base(), b.lattice().base());
    for v in 0..n {
        if used[v] || (0..ka.atoms().len()).any(|p| ka.holds(p, w) != kb.holds(p, v)) {
            continue;
        }
        used[v] = true;
        sigma.push(v);
        if search(a, b, sigma, used) {
            return true;
        }
        sigma.pop();
        used[v] = false;
    }
    false
}

fn is_isomorphism(a: &KripkeLatticeModel, b: &KripkeLatticeModel, sigma: &[usize]) -> bool {
    let (ka, kb) = (a.lattice().base(), b.lattice().base());
    let agents = ka.agents().len();
    let rels = (0..agents).all(|ag| {
        ka.relation(ag).len() == kb.relation(ag).len()
            && ka
                .relation(ag)
                .iter()
                .all(|&(w, v)| kb.relation(ag).contains(&(sigma[w], sigma[v])))
    });
    let maps = (0..agents).all(|ag| {
        a.lattice().omega().all(|w| {
            let img = a.image(ag, w);
            b.image(ag, RestrictedWorld::new(sigma[w.world], w.subset))
                == RestrictedWorld::new(sigma[img.world], img.subset)
        })
    });
    rels && maps
}

/// Seeded random unawareness models: H-transforms of random Kripke lattice
/// models, each replaced by its indistinguishability quotient on a seeded
/// coin flip when the quotient is non-trivial.
pub fn generate_hms_models(
    seed: u64,
    atom_count: usize,
    world_count: usize,
    agent_count: usize,
    count: usize,
) -> Vec<HmsModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    generate_models(seed, atom_count, world_count, agent_count, count)
        .iter()
        .map(|klm| {
            let h = h_transform(klm).expect("generated relations are equivalences");
            if rng.gen_bool(0.5) {
                merge_indistinguishable(&h).unwrap_or(h)
            } else {
                h
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::format::{parse_model, Model};
    use crate::lattice_model::identity_awareness;

    fn trade_l() -> (KripkeLatticeModel, StateCorrespondence) {
        l_transform(&fixtures::trade_hms()).unwrap()
    }

    fn refs(klm: &KripkeLatticeModel, ws: &[RestrictedWorld]) -> Vec<String> {
        ws.iter().map(|&w| klm.world_ref(w)).collect()
    }

    #[test]
    fn l_transform_of_trade_matches_the_lattice_fixture() {
        let (klm, _) = trade_l();
        let sigma = find_isomorphism(&klm, &fixtures::trade_klm()).expect("isomorphic");
        assert_eq!(sigma, vec![0, 1, 2]);
        assert_eq!(
            klm.lattice().base().worlds(),
            ["(i,l)", "(!i,l)", "(!i,!l)"]
        );
    }

    #[test]
    fn l_transform_buyer_partition() {
        let (klm, _) = trade_l();
        let base = klm.lattice().base();
        let b = base.agent_index(&AgentId::new("B").unwrap()).unwrap();
        assert_eq!(base.successors(b, 0), [0]);
        assert_eq!(base.successors(b, 1), [1, 2]);
        assert_eq!(base.successors(b, 2), [1, 2]);
        assert!(base.all_equivalence());
    }

    #[test]
    fn state_correspondence_examples() {
        let m = fixtures::trade_hms();
        let (klm, corr) = trade_l();
        let at = |s: &str| refs(&klm, &state_correspondence(&m, s).unwrap());
        assert_eq!(at("(i,l)"), ["(i,l)@{i,l}"]);
        assert_eq!(at("!i"), ["(!i,l)@{i}", "(!i,!l)@{i}"]);
        assert_eq!(at("empty"), ["(i,l)@{}", "(!i,l)@{}", "(!i,!l)@{}"]);
        assert!(matches!(
            state_correspondence(&m, "nowhere"),
            Err(TransformError::Hms(HmsError::UnknownState(_)))
        ));
        for s in 0..corr.len() {
            assert!(!corr.get(s).is_empty());
        }
        let top = m.lattice().top().unwrap();
        for &s in m.lattice().states_of(top) {
            assert_eq!(corr.get(s).len(), 1);
        }
    }

    #[test]
    fn h_transform_of_trade() {
        let klm = fixtures::trade_klm();
        let h = h_transform(&klm).unwrap();
        let lat = h.lattice();
        assert_eq!(lat.space_count(), 4);
        for sp in 0..4 {
            assert_eq!(lat.states_of(sp).len(), 3);
        }
        let b = 0;
        let w = lat.state_index("w2@{i,l}").unwrap();
        let cell: Vec<&str> = h
            .frame()
            .possibility(b, w)
            .ones()
            .map(|s| lat.state_name(s))
            .collect();
        assert_eq!(cell, ["w2@{i}", "w3@{i}"]);
        let vi = h.valuation(h.atom_index(&AtomId::new("i").unwrap()).unwrap());
        assert_eq!(lat.space_name(vi.base()), "W{i}");
        let d: Vec<&str> = vi.generator().ones().map(|s| lat.state_name(s)).collect();
        assert_eq!(d, ["w1@{i}"]);
        assert!(h.frame().validate().is_ok());
    }

    #[test]
    fn h_transform_requires_equivalences() {
        let p = AtomId::new("p").unwrap();
        let a = AgentId::new("a").unwrap();
        let k = KripkeModel::new(
            vec![p],
            vec![a.clone()],
            vec!["u".into(), "v".into()],
            vec![vec![(0, 1), (1, 1)]],
            vec![vec![0]],
        )
        .unwrap();
        let lattice = build_lattice(k, DEFAULT_MAX_ATOMS).unwrap();
        let maps = identity_awareness(&lattice);
        let klm = build_klm(lattice, maps).unwrap();
        assert_eq!(
            h_transform(&klm),
            Err(TransformError::NonEquivalenceRelation { agent: a })
        );
    }

    #[test]
    fn h_transform_of_identity_awareness_stays_in_place() {
        let lattice = fixtures::trade_klm().lattice().clone();
        let maps = identity_awareness(&lattice);
        let klm = build_klm(lattice, maps).unwrap();
        let h = h_transform(&klm).unwrap();
        let lat = h.lattice();
        for a in 0..2 {
            for s in 0..lat.state_count() {
                assert_eq!(
                    lat.space_of_set(h.frame().possibility(a, s)),
                    Some(lat.space_of(s))
                );
            }
        }
        assert!(check_equivalence_h(&klm, 2).unwrap().is_ok());
    }

    #[test]
    fn cells_on_trade_and_a_corrupted_transform() {
        let m = fixtures::trade_hms();
        assert_eq!(check_cells(&m).unwrap(), Ok(2 * 3 * 3));
        let (klm, _) = trade_l();
        let base = klm.lattice().base();
        let mut rels: Vec<Vec<(usize, usize)>> = (0..2)
            .map(|a| base.relation(a).iter().copied().collect())
            .collect();
        rels[0].retain(|&p| p != (1, 2));
        let broken = KripkeModel::new(
            base.atoms().to_vec(),
            base.agents().to_vec(),
            base.worlds().to_vec(),
            rels,
            (0..2)
                .map(|p| base.valuation(p).iter().copied().collect())
                .collect(),
        )
        .unwrap();
        let lattice = build_lattice(broken, DEFAULT_MAX_ATOMS).unwrap();
        let maps = (0..2).map(|a| klm.awareness_map(a)).collect();
        let broken = build_klm(lattice, maps).unwrap();
        let cex = check_cells_against(&m, &broken).unwrap_err();
        assert_eq!(cex.agent.as_str(), "B");
        assert_eq!(
            (cex.world.as_str(), cex.other.as_str()),
            ("(!i,l)@{i}", "(!i,!l)@{i}")
        );
        assert!(!cex.in_cell && cex.in_possibility);
    }

    /// The aware state `u` sees only itself; the unaware `v` sees the merged
    /// bottom state. All five frame properties hold, yet `R_a` relates `v`
    /// to `u` and not back.
    const ASYMMETRIC: &str = r#"{
        "kind": "hms", "atoms": ["p"], "agents": ["a"],
        "spaces": [{"name": "bot", "states": ["b"]}, {"name": "top", "states": ["u", "v"]}],
        "order": [["bot", "top"]],
        "projections": {"u": {"bot": "b"}, "v": {"bot": "b"}},
        "correspondences": {"a": {"u": ["u"], "v": ["b"], "b": ["b"]}},
        "valuation": {"p": {"space": "top", "states": []}}
    }"#;

    #[test]
    fn merging_projection_breaks_symmetry() {
        let Model::Hms(m) = parse_model(ASYMMETRIC, DEFAULT_MAX_ATOMS).unwrap() else {
            panic!()
        };
        assert!(m.frame().validate().is_ok());
        let (klm, _) = l_transform(&m).unwrap();
        let base = klm.lattice().base();
        let r = base.relation(0);
        assert_eq!(
            r.iter().copied().collect::<Vec<_>>(),
            vec![(0, 0), (1, 0), (1, 1)]
        );
        assert!(!base.all_equivalence());
        assert!(matches!(
            h_transform(&klm),
            Err(TransformError::NonEquivalenceRelation { .. })
        ));
        // Satisfaction still carries over, and so do the cells.
        assert!(check_equivalence_l(&m, 2).unwrap().is_ok());
        assert!(check_cells(&m).unwrap().is_ok());
    }

    #[test]
    fn single_space_frame() {
        let text = r#"{
            "kind": "hms", "atoms": ["p"], "agents": ["a"],
            "spaces": [{"name": "T", "states": ["x", "y"]}],
            "order": [], "projections": {},
            "correspondences": {"a": {"x": ["x", "y"], "y": ["x", "y"]}},
            "valuation": {"p": {"space": "T", "states": ["x"]}}
        }"#;
        let Model::Hms(m) = parse_model(text, DEFAULT_MAX_ATOMS).unwrap() else {
            panic!()
        };
        let (klm, _) = l_transform(&m).unwrap();
        for w in klm.lattice().omega() {
            assert_eq!(klm.image(0, w), w);
        }
        assert!(check_cells(&m).unwrap().is_ok());
        assert!(check_equivalence_l(&m, 2).unwrap().is_ok());
    }

    #[test]
    fn equivalence_sweeps_on_trade() {
        let m = fixtures::trade_hms();
        let r = check_equivalence_l(&m, 2).unwrap();
        assert!(r.is_ok(), "{:?}", r.first);
        assert_eq!(r.formulas, 507);
        assert_eq!(r.pairs, 3 + 3 + 3 + 3);
        assert!(check_equivalence_l(&m, 0).unwrap().is_ok());
        let r = check_equivalence_h(&fixtures::trade_klm(), 2).unwrap();
        assert!(r.is_ok(), "{:?}", r.first);
        assert_eq!(r.pairs, 12);
    }

    #[test]
    fn stale_transform_is_detected() {
        let m = fixtures::trade_hms();
        let (klm, corr) = trade_l();
        let base = klm.lattice().base();
        let stale = KripkeModel::new(
            base.atoms().to_vec(),
            base.agents().to_vec(),
            base.worlds().to_vec(),
            (0..2)
                .map(|a| base.relation(a).iter().copied().collect())
                .collect(),
            vec![vec![0, 1], base.valuation(1).iter().copied().collect()],
        )
        .unwrap();
        let lattice = build_lattice(stale, DEFAULT_MAX_ATOMS).unwrap();
        let stale = build_klm(lattice, (0..2).map(|a| klm.awareness_map(a)).collect()).unwrap();
        let r = check_equivalence_l_against(&m, &stale, &corr, 0).unwrap();
        let cex = r.first.unwrap();
        assert_eq!(cex.formula, Formula::atom("i"));
        assert_eq!(cex.state, "(!i,l)");
        assert_eq!((cex.lhs, cex.rhs), (ThreeVal::False, ThreeVal::True));
    }

    #[test]
    fn random_models_round_trip() {
        for klm in generate_models(7, 2, 3, 2, 10) {
            let h = h_transform(&klm).unwrap();
            assert!(h.frame().validate().is_ok());
            let (back, _) = l_transform(&h).unwrap();
            assert!(back.lattice().base().all_equivalence());
            assert!(check_equivalence_h(&klm, 1).unwrap().is_ok());
            assert!(check_equivalence_l(&h, 1).unwrap().is_ok());
        }
    }

    #[test]
    fn random_hms_models_include_merged_spaces() {
        let models = generate_hms_models(3, 2, 3, 2, 20);
        assert_eq!(models.len(), 20);
        let shrinking = models.iter().filter(|m| {
            let lat = m.lattice();
            let top = lat.top().unwrap();
            (0..lat.space_count()).any(|sp| lat.states_of(sp).len() < lat.states_of(top).len())
        });
        assert!(shrinking.count() > 0);
        for m in &models {
            assert!(check_equivalence_l(m, 1).unwrap().is_ok());
            assert!(check_cells(m).unwrap().is_ok());
        }
    }
}
