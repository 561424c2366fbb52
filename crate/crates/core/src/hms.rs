//! Unawareness frames and models: lattices of state-spaces with projections,
//! possibility correspondences, the event algebra and three-valued
//! satisfaction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::{AgentId, AtomId, Formula};
use crate::lattice_model::ThreeVal;

/// A set of states, indexed over all states of a frame.
pub type StateSet = FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HmsError {
    #[error("frame has no state-spaces")]
    NoSpaces,
    #[error("state-space {0:?} is empty")]
    EmptySpace(String),
    #[error("duplicate state-space {0:?}")]
    DuplicateSpace(String),
    #[error("state {0:?} appears more than once")]
    DuplicateState(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown state-space {0:?}")]
    UnknownSpace(String),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("duplicate agent {0}")]
    DuplicateAgent(AgentId),
    #[error("atom {0} has no valuation")]
    UnknownAtom(AtomId),
    #[error("duplicate atom {0}")]
    DuplicateAtom(AtomId),
    #[error("projection of {state:?} to {space:?}: space is not below the state's space")]
    ProjectionNotBelow { state: String, space: String },
    #[error("projection of {state:?} to {space:?} lands on {image:?}, outside that space")]
    ProjectionOutsideSpace {
        state: String,
        space: String,
        image: String,
    },
    #[error("projection of {state:?} to {space:?} given twice")]
    DuplicateProjection { state: String, space: String },
    #[error("no projection of {state:?} to {space:?} is given or derivable")]
    MissingProjection { state: String, space: String },
    #[error("missing possibility set for agent {agent} at state {state:?}")]
    MissingCorrespondence { agent: AgentId, state: String },
    #[error("state set is not contained in a single state-space")]
    NotInOneSpace,
    #[error("event generator is not a subset of its base space {0:?}")]
    MalformedEvent(String),
    #[error("state-spaces {0:?} and {1:?} have no least upper bound")]
    NoJoin(String, String),
    #[error("frame is not an unawareness frame: {0}")]
    InvalidFrame(String),
}

/// The five possibility-correspondence properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HmsProperty {
    Confinement,
    GeneralizedReflexivity,
    Stationarity,
    ProjectionsPreserveIgnorance,
    ProjectionsPreserveKnowledge,
}

impl HmsProperty {
    pub const ALL: [HmsProperty; 5] = [
        HmsProperty::Confinement,
        HmsProperty::GeneralizedReflexivity,
        HmsProperty::Stationarity,
        HmsProperty::ProjectionsPreserveIgnorance,
        HmsProperty::ProjectionsPreserveKnowledge,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            HmsProperty::Confinement => "Conf",
            HmsProperty::GeneralizedReflexivity => "Gref",
            HmsProperty::Stationarity => "Stat",
            HmsProperty::ProjectionsPreserveIgnorance => "PPI",
            HmsProperty::ProjectionsPreserveKnowledge => "PPK",
        }
    }
}

impl fmt::Display for HmsProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// One violated frame condition. States and spaces are indices into the
/// frame; [`UnawarenessFrame::describe`] renders them by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameViolation {
    OrderCycle {
        a: usize,
        b: usize,
    },
    NoJoin {
        a: usize,
        b: usize,
    },
    NoMeet {
        a: usize,
        b: usize,
    },
    /// `lower ≼ upper` but `|lower| > |upper|`.
    SizeNotMonotone {
        lower: usize,
        upper: usize,
    },
    NotSurjective {
        lower: usize,
        upper: usize,
        missing: usize,
    },
    /// `r_lower(state) ≠ r_lower(r_middle(state))`.
    NotCommuting {
        state: usize,
        middle: usize,
        lower: usize,
    },
    Property {
        property: HmsProperty,
        agent: usize,
        state: usize,
        /// Second state (Stat) or space (PPI, PPK) involved, if any.
        witness: Option<usize>,
    },
}

impl FrameViolation {
    pub fn property(&self) -> Option<HmsProperty> {
        match self {
            FrameViolation::Property { property, .. } => Some(*property),
            _ => None,
        }
    }
}

/// Outcome of [`UnawarenessFrame::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrameReport {
    pub violations: Vec<FrameViolation>,
}

impl FrameReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn structural_ok(&self) -> bool {
        self.violations.iter().all(|v| v.property().is_some())
    }

    pub fn holds(&self, property: HmsProperty) -> bool {
        self.violations
            .iter()
            .all(|v| v.property() != Some(property))
    }

    pub fn properties_holding(&self) -> usize {
        HmsProperty::ALL.iter().filter(|&&p| self.holds(p)).count()
    }

    /// `"5/5 HMS properties hold"`, or the failing properties.
    pub fn summary(&self) -> String {
        let n = self.properties_holding();
        let mut out = format!("{n}/5 HMS properties hold");
        let failing: Vec<_> = HmsProperty::ALL
            .iter()
            .filter(|&&p| !self.holds(p))
            .map(|p| p.short_name())
            .collect();
        if !failing.is_empty() {
            out.push_str(&format!(" (violated: {})", failing.join(", ")));
        }
        if !self.structural_ok() {
            out.push_str("; lattice structure invalid");
        }
        out
    }
}

/// State-spaces, their order and the projections between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpaceLattice {
    state_names: Vec<String>,
    state_index: HashMap<String, usize>,
    space_names: Vec<String>,
    space_states: Vec<Vec<usize>>,
    space_of: Vec<usize>,
    leq: Vec<Vec<bool>>,
    proj: Vec<Vec<Option<usize>>>,
    join: Vec<Vec<Option<usize>>>,
    meet: Vec<Vec<Option<usize>>>,
}

impl StateSpaceLattice {
    /// `spaces` lists each space with its states; `order` holds pairs
    /// `(lower, upper)` whose reflexive-transitive closure is `≼`;
    /// `projections` holds `(state, target space, image)` triples. Missing
    /// projections are derived by composition.
    pub fn new(
        spaces: Vec<(String, Vec<String>)>,
        order: Vec<(String, String)>,
        projections: Vec<(String, String, String)>,
    ) -> Result<Self, HmsError> {
        if spaces.is_empty() {
            return Err(HmsError::NoSpaces);
        }
        let mut space_names = Vec::new();
        let mut space_idx = HashMap::new();
        let mut state_names = Vec::new();
        let mut state_index = HashMap::new();
        let mut space_states = Vec::new();
        let mut space_of = Vec::new();
        for (k, (name, states)) in spaces.into_iter().enumerate() {
            if states.is_empty() {
                return Err(HmsError::EmptySpace(name));
            }
            if space_idx.insert(name.clone(), k).is_some() {
                return Err(HmsError::DuplicateSpace(name));
            }
            space_names.push(name);
            let mut members = Vec::new();
            for s in states {
                if state_index.contains_key(&s) {
                    return Err(HmsError::DuplicateState(s));
                }
                state_index.insert(s.clone(), state_names.len());
                members.push(state_names.len());
                state_names.push(s);
                space_of.push(k);
            }
            space_states.push(members);
        }
        let m = space_names.len();
        let n = state_names.len();
        let space = |name: &str| {
            space_idx
                .get(name)
                .copied()
                .ok_or_else(|| HmsError::UnknownSpace(name.to_string()))
        };
        let state = |name: &str| {
            state_index
                .get(name)
                .copied()
                .ok_or_else(|| HmsError::UnknownState(name.to_string()))
        };

        let mut leq = vec![vec![false; m]; m];
        for (k, row) in leq.iter_mut().enumerate() {
            row[k] = true;
        }
        for (lo, hi) in &order {
            leq[space(lo)?][space(hi)?] = true;
        }
        // Transitive closure.
        #[allow(clippy::needless_range_loop)]
        for k in 0..m {
            for i in 0..m {
                if leq[i][k] {
                    for j in 0..m {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }

        let mut proj = vec![vec![None; m]; n];
        for (s, row) in proj.iter_mut().enumerate() {
            row[space_of[s]] = Some(s);
        }
        for (s_name, target, image) in &projections {
            let s = state(s_name)?;
            let t = space(target)?;
            let img = state(image)?;
            if !leq[t][space_of[s]] {
                return Err(HmsError::ProjectionNotBelow {
                    state: s_name.clone(),
                    space: target.clone(),
                });
            }
            if space_of[img] != t {
                return Err(HmsError::ProjectionOutsideSpace {
                    state: s_name.clone(),
                    space: target.clone(),
                    image: image.clone(),
                });
            }
            if t != space_of[s] && proj[s][t].is_some() {
                return Err(HmsError::DuplicateProjection {
                    state: s_name.clone(),
                    space: target.clone(),
                });
            }
            proj[s][t] = Some(img);
        }
        loop {
            let mut changed = false;
            #[allow(clippy::needless_range_loop)]
            for s in 0..n {
                for mid in 0..m {
                    let Some(t) = proj[s][mid] else { continue };
                    for low in 0..m {
                        if proj[s][low].is_none() {
                            if let Some(u) = proj[t][low] {
                                proj[s][low] = Some(u);
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for s in 0..n {
            for t in 0..m {
                if leq[t][space_of[s]] && proj[s][t].is_none() {
                    return Err(HmsError::MissingProjection {
                        state: state_names[s].clone(),
                        space: space_names[t].clone(),
                    });
                }
            }
        }

        let bound = |upper: bool, a: usize, b: usize| -> Option<usize> {
            let cands: Vec<usize> = (0..m)
                .filter(|&c| {
                    if upper {
                        leq[a][c] && leq[b][c]
                    } else {
                        leq[c][a] && leq[c][b]
                    }
                })
                .collect();
            let best: Vec<usize> = cands
                .iter()
                .copied()
                .filter(|&c| {
                    cands
                        .iter()
                        .all(|&d| if upper { leq[c][d] } else { leq[d][c] })
                })
                .collect();
            (best.len() == 1).then(|| best[0])
        };
        let join = (0..m)
            .map(|a| (0..m).map(|b| bound(true, a, b)).collect())
            .collect();
        let meet = (0..m)
            .map(|a| (0..m).map(|b| bound(false, a, b)).collect())
            .collect();

        Ok(StateSpaceLattice {
            state_names,
            state_index,
            space_names,
            space_states,
            space_of,
            leq,
            proj,
            join,
            meet,
        })
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn space_count(&self) -> usize {
        self.space_names.len()
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.state_names[state]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn space_name(&self, space: usize) -> &str {
        &self.space_names[space]
    }

    pub fn space_names(&self) -> &[String] {
        &self.space_names
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn space_index(&self, name: &str) -> Option<usize> {
        self.space_names.iter().position(|s| s == name)
    }

    pub fn states_of(&self, space: usize) -> &[usize] {
        &self.space_states[space]
    }

    /// `S(s)`.
    pub fn space_of(&self, state: usize) -> usize {
        self.space_of[state]
    }

    /// `a ≼ b`.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        self.join[a][b]
    }

    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        self.meet[a][b]
    }

    /// The least space, if the order has one.
    pub fn bottom(&self) -> Option<usize> {
        (0..self.space_count()).find(|&s| (0..self.space_count()).all(|t| self.leq[s][t]))
    }

    /// The greatest space, if the order has one.
    pub fn top(&self) -> Option<usize> {
        (0..self.space_count()).find(|&s| (0..self.space_count()).all(|t| self.leq[t][s]))
    }

    /// `r_space(state)`, defined when `space ≼ S(state)`.
    pub fn project(&self, state: usize, space: usize) -> Option<usize> {
        self.proj[state][space]
    }

    /// Covering pairs `(lower, upper)` of `≼`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let m = self.space_count();
        let mut out = Vec::new();
        for lo in 0..m {
            for hi in 0..m {
                if lo != hi
                    && self.leq[lo][hi]
                    && !(0..m).any(|k| k != lo && k != hi && self.leq[lo][k] && self.leq[k][hi])
                {
                    out.push((lo, hi));
                }
            }
        }
        out
    }

    pub fn empty_set(&self) -> StateSet {
        FixedBitSet::with_capacity(self.state_count())
    }

    pub fn space_set(&self, space: usize) -> StateSet {
        let mut set = self.empty_set();
        for &s in &self.space_states[space] {
            set.insert(s);
        }
        set
    }

    /// The single space containing every member of a non-empty `set`.
    pub fn space_of_set(&self, set: &StateSet) -> Option<usize> {
        let mut spaces = set.ones().map(|s| self.space_of[s]);
        let first = spaces.next()?;
        spaces.all(|s| s == first).then_some(first)
    }

    /// `D↑` for `D ⊆ space`.
    pub fn upward_closure(&self, subset: &StateSet, space: usize) -> Result<StateSet, HmsError> {
        if subset.ones().any(|s| self.space_of[s] != space) {
            return Err(HmsError::NotInOneSpace);
        }
        let mut out = self.empty_set();
        for s in 0..self.state_count() {
            if let Some(t) = self.proj[s][space] {
                if subset.contains(t) {
                    out.insert(s);
                }
            }
        }
        Ok(out)
    }

    /// All states in spaces `≽ space`.
    pub fn space_upset(&self, space: usize) -> StateSet {
        let mut out = self.empty_set();
        for s in 0..self.state_count() {
            if self.leq[space][self.space_of[s]] {
                out.insert(s);
            }
        }
        out
    }

    fn structural_violations(&self) -> Vec<FrameViolation> {
        let m = self.space_count();
        let mut out = Vec::new();
        for a in 0..m {
            for b in (a + 1)..m {
                if self.leq[a][b] && self.leq[b][a] {
                    out.push(FrameViolation::OrderCycle { a, b });
                }
            }
        }
        for a in 0..m {
            for b in (a + 1)..m {
                if self.join[a][b].is_none() {
                    out.push(FrameViolation::NoJoin { a, b });
                }
                if self.meet[a][b].is_none() {
                    out.push(FrameViolation::NoMeet { a, b });
                }
            }
        }
        for lower in 0..m {
            for upper in 0..m {
                if lower == upper || !self.leq[lower][upper] {
                    continue;
                }
                if self.space_states[lower].len() > self.space_states[upper].len() {
                    out.push(FrameViolation::SizeNotMonotone { lower, upper });
                }
                let hit: BTreeSet<usize> = self.space_states[upper]
                    .iter()
                    .filter_map(|&s| self.proj[s][lower])
                    .collect();
                if let Some(&missing) = self.space_states[lower].iter().find(|s| !hit.contains(s)) {
                    out.push(FrameViolation::NotSurjective {
                        lower,
                        upper,
                        missing,
                    });
                }
            }
        }
        for state in 0..self.state_count() {
            for middle in 0..m {
                let Some(t) = self.proj[state][middle] else {
                    continue;
                };
                for lower in 0..m {
                    if !self.leq[lower][middle] {
                        continue;
                    }
                    if self.proj[state][lower] != self.proj[t][lower] {
                        out.push(FrameViolation::NotCommuting {
                            state,
                            middle,
                            lower,
                        });
                    }
                }
            }
        }
        out
    }
}

/// A state-space lattice with one possibility correspondence per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnawarenessFrame {
    lattice: StateSpaceLattice,
    agents: Vec<AgentId>,
    correspondences: Vec<Vec<StateSet>>,
}

impl UnawarenessFrame {
    /// `correspondences[a][s]` lists the state indices of `Π_a(s)`.
    pub fn new(
        lattice: StateSpaceLattice,
        agents: Vec<AgentId>,
        correspondences: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self, HmsError> {
        let mut seen = BTreeSet::new();
        for a in &agents {
            if !seen.insert(a) {
                return Err(HmsError::DuplicateAgent(a.clone()));
            }
        }
        assert_eq!(
            agents.len(),
            correspondences.len(),
            "one correspondence per agent"
        );
        let n = lattice.state_count();
        let mut corr = Vec::new();
        for (a, rows) in correspondences.into_iter().enumerate() {
            if rows.len() != n {
                return Err(HmsError::MissingCorrespondence {
                    agent: agents[a].clone(),
                    state: lattice
                        .state_name(rows.len().min(n.saturating_sub(1)))
                        .to_string(),
                });
            }
            let mut sets = Vec::with_capacity(n);
            for row in rows {
                let mut set = lattice.empty_set();
                for s in row {
                    if s >= n {
                        return Err(HmsError::UnknownState(format!("#{s}")));
                    }
                    set.insert(s);
                }
                sets.push(set);
            }
            corr.push(sets);
        }
        Ok(UnawarenessFrame {
            lattice,
            agents,
            correspondences: corr,
        })
    }

    pub fn lattice(&self) -> &StateSpaceLattice {
        &self.lattice
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn agent_index(&self, agent: &AgentId) -> Option<usize> {
        self.agents.iter().position(|a| a == agent)
    }

    /// `Π_a(s)`.
    pub fn possibility(&self, agent: usize, state: usize) -> &StateSet {
        &self.correspondences[agent][state]
    }

    /// Replaces `Π_a(s)`.
    pub fn set_possibility(&mut self, agent: usize, state: usize, states: &[usize]) {
        let mut set = self.lattice.empty_set();
        for &s in states {
            set.insert(s);
        }
        self.correspondences[agent][state] = set;
    }

    /// Checks the lattice structure and the five correspondence properties
    /// for every agent and state.
    pub fn validate(&self) -> FrameReport {
        let mut violations = self.lattice.structural_violations();
        if violations.is_empty() {
            for a in 0..self.agents.len() {
                self.check_agent(a, &mut violations);
            }
        }
        FrameReport { violations }
    }

    fn check_agent(&self, agent: usize, out: &mut Vec<FrameViolation>) {
        let lat = &self.lattice;
        let n = lat.state_count();
        let violation = |property, state, witness| FrameViolation::Property {
            property,
            agent,
            state,
            witness,
        };
        let pi = |s: usize| &self.correspondences[agent][s];
        // Space of Π_a(s); the empty set counts as confined to S(s).
        let pi_space = |s: usize| -> Option<usize> {
            if pi(s).is_clear() {
                Some(lat.space_of(s))
            } else {
                lat.space_of_set(pi(s))
            }
        };
        let pi_up = |s: usize| -> Option<StateSet> {
            pi_space(s).map(|sp| lat.upward_closure(pi(s), sp).expect("single space"))
        };

        for w in 0..n {
            match pi_space(w) {
                Some(sp) if lat.leq(sp, lat.space_of(w)) => {}
                _ => out.push(violation(HmsProperty::Confinement, w, None)),
            }
        }
        for w in 0..n {
            if !pi_up(w).is_some_and(|up| up.contains(w)) {
                out.push(violation(HmsProperty::GeneralizedReflexivity, w, None));
            }
        }
        for w in 0..n {
            if let Some(v) = pi(w).ones().find(|&v| pi(v) != pi(w)) {
                out.push(violation(HmsProperty::Stationarity, w, Some(v)));
            }
        }
        for w in 0..n {
            let Some(up) = pi_up(w) else { continue };
            for sp in 0..lat.space_count() {
                if !lat.leq(sp, lat.space_of(w)) {
                    continue;
                }
                let r = lat.project(w, sp).expect("below");
                let ok = pi_up(r).is_some_and(|lower| up.is_subset(&lower));
                if !ok {
                    out.push(violation(
                        HmsProperty::ProjectionsPreserveIgnorance,
                        w,
                        Some(sp),
                    ));
                }
            }
        }
        for w in 0..n {
            if pi(w).is_clear() {
                continue;
            }
            let Some(s_prime) = pi_space(w) else { continue };
            if !lat.leq(s_prime, lat.space_of(w)) {
                continue;
            }
            for sp in 0..lat.space_count() {
                if !lat.leq(sp, s_prime) {
                    continue;
                }
                let mut image = lat.empty_set();
                for v in pi(w).ones() {
                    image.insert(lat.project(v, sp).expect("below"));
                }
                let r = lat.project(w, sp).expect("below");
                if &image != pi(r) {
                    out.push(violation(
                        HmsProperty::ProjectionsPreserveKnowledge,
                        w,
                        Some(sp),
                    ));
                }
            }
        }
    }

    /// Renders a violation with state, space and agent names.
    pub fn describe(&self, v: &FrameViolation) -> String {
        let lat = &self.lattice;
        let sp = |i: usize| lat.space_name(i);
        let st = |i: usize| lat.state_name(i);
        match *v {
            FrameViolation::OrderCycle { a, b } => {
                format!("order cycle between {} and {}", sp(a), sp(b))
            }
            FrameViolation::NoJoin { a, b } => format!("no join of {} and {}", sp(a), sp(b)),
            FrameViolation::NoMeet { a, b } => format!("no meet of {} and {}", sp(a), sp(b)),
            FrameViolation::SizeNotMonotone { lower, upper } => {
                format!("{} is below {} but larger", sp(lower), sp(upper))
            }
            FrameViolation::NotSurjective {
                lower,
                upper,
                missing,
            } => format!(
                "projection {} -> {} misses {}",
                sp(upper),
                sp(lower),
                st(missing)
            ),
            FrameViolation::NotCommuting {
                state,
                middle,
                lower,
            } => format!(
                "projections of {} to {} via {} do not commute",
                st(state),
                sp(lower),
                sp(middle)
            ),
            FrameViolation::Property {
                property,
                agent,
                state,
                witness,
            } => {
                let extra = match (property, witness) {
                    (HmsProperty::Stationarity, Some(v)) => format!(" witness {}", st(v)),
                    (_, Some(s)) => format!(" space {}", sp(s)),
                    (_, None) => String::new(),
                };
                format!(
                    "{property} fails for agent {} at {}{extra}",
                    self.agents[agent],
                    st(state)
                )
            }
        }
    }
}

/// An event `(D↑, S)`. Equality compares base space and upset.
#[derive(Debug, Clone)]
pub struct Event {
    base: usize,
    generator: StateSet,
    upset: StateSet,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.upset == other.upset
    }
}

impl Eq for Event {}

impl Event {
    /// The event generated by `generator ⊆ base`.
    pub fn new(
        lattice: &StateSpaceLattice,
        base: usize,
        generator: StateSet,
    ) -> Result<Self, HmsError> {
        if generator.ones().any(|s| lattice.space_of(s) != base) {
            return Err(HmsError::MalformedEvent(
                lattice.space_name(base).to_string(),
            ));
        }
        let upset = lattice.upward_closure(&generator, base)?;
        Ok(Event {
            base,
            generator,
            upset,
        })
    }

    /// Event from an upset already known to be generated at `base`.
    fn from_upset(lattice: &StateSpaceLattice, base: usize, upset: StateSet) -> Self {
        let mut generator = upset.clone();
        generator.intersect_with(&lattice.space_set(base));
        Event {
            base,
            generator,
            upset,
        }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// `D`.
    pub fn generator(&self) -> &StateSet {
        &self.generator
    }

    /// `D↑`.
    pub fn upset(&self) -> &StateSet {
        &self.upset
    }

    /// Whether the upset is exactly the upward closure of its generator.
    pub fn is_well_formed(&self, lattice: &StateSpaceLattice) -> bool {
        self.generator
            .ones()
            .all(|s| lattice.space_of(s) == self.base)
            && lattice
                .upward_closure(&self.generator, self.base)
                .is_ok_and(|up| up == self.upset)
    }
}

impl UnawarenessFrame {
    /// `⟦⊤⟧`: the whole bottom space, so the upset is every state.
    pub fn top_event(&self) -> Event {
        let bottom = self
            .lattice
            .bottom()
            .expect("validated lattice has a bottom");
        Event::new(&self.lattice, bottom, self.lattice.space_set(bottom)).expect("space set")
    }

    /// `¬(D↑, S) = ((S \ D)↑, S)`.
    pub fn neg_event(&self, e: &Event) -> Event {
        let mut complement = self.lattice.space_set(e.base);
        complement.difference_with(&e.generator);
        Event::new(&self.lattice, e.base, complement).expect("subset of base")
    }

    /// `(⋂ D_i↑, sup S_i)`; the empty conjunction is the top event.
    pub fn conj_events(&self, es: &[Event]) -> Result<Event, HmsError> {
        let Some(first) = es.first() else {
            return Ok(self.top_event());
        };
        let mut base = first.base;
        let mut upset = first.upset.clone();
        for e in &es[1..] {
            base = self.lattice.join(base, e.base).ok_or_else(|| {
                HmsError::NoJoin(
                    self.lattice.space_name(base).to_string(),
                    self.lattice.space_name(e.base).to_string(),
                )
            })?;
            upset.intersect_with(&e.upset);
        }
        Ok(Event::from_upset(&self.lattice, base, upset))
    }

    /// `K_a(E) = ({w : Π_a(w) ⊆ D↑}, S)`.
    pub fn k_event(&self, agent: usize, e: &Event) -> Event {
        let mut upset = self.lattice.empty_set();
        for w in 0..self.lattice.state_count() {
            if self.correspondences[agent][w].is_subset(&e.upset) {
                upset.insert(w);
            }
        }
        Event::from_upset(&self.lattice, e.base, upset)
    }

    /// `A_a(E) = ({w : Π_a(w) ⊆ S↑}, S)`.
    pub fn a_event(&self, agent: usize, e: &Event) -> Event {
        let reach = self.lattice.space_upset(e.base);
        let mut upset = self.lattice.empty_set();
        for w in 0..self.lattice.state_count() {
            if self.correspondences[agent][w].is_subset(&reach) {
                upset.insert(w);
            }
        }
        Event::from_upset(&self.lattice, e.base, upset)
    }
}

/// A valid unawareness frame with an event valuation for each atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HmsModel {
    frame: UnawarenessFrame,
    atoms: Vec<AtomId>,
    valuation: Vec<Event>,
}

impl HmsModel {
    /// Fails unless the frame validates and every valuation event is
    /// well-formed.
    pub fn new(frame: UnawarenessFrame, valuation: Vec<(AtomId, Event)>) -> Result<Self, HmsError> {
        let report = frame.validate();
        if !report.is_ok() {
            let first = frame.describe(&report.violations[0]);
            return Err(HmsError::InvalidFrame(format!(
                "{}; first: {first}",
                report.summary()
            )));
        }
        let mut atoms = Vec::new();
        let mut events = Vec::new();
        for (p, e) in valuation {
            if atoms.contains(&p) {
                return Err(HmsError::DuplicateAtom(p));
            }
            if !e.is_well_formed(frame.lattice()) {
                return Err(HmsError::MalformedEvent(
                    frame.lattice().space_name(e.base).to_string(),
                ));
            }
            atoms.push(p);
            events.push(e);
        }
        Ok(HmsModel {
            frame,
            atoms,
            valuation: events,
        })
    }

    pub fn frame(&self) -> &UnawarenessFrame {
        &self.frame
    }

    pub fn lattice(&self) -> &StateSpaceLattice {
        self.frame.lattice()
    }

    pub fn atoms(&self) -> &[AtomId] {
        &self.atoms
    }

    pub fn agents(&self) -> &[AgentId] {
        self.frame.agents()
    }

    pub fn atom_index(&self, atom: &AtomId) -> Option<usize> {
        self.atoms.iter().position(|p| p == atom)
    }

    /// `V_M(p)`.
    pub fn valuation(&self, atom: usize) -> &Event {
        &self.valuation[atom]
    }

    pub fn state_index(&self, name: &str) -> Result<usize, HmsError> {
        self.lattice()
            .state_index(name)
            .ok_or_else(|| HmsError::UnknownState(name.to_string()))
    }

    /// `⟦φ⟧`.
    pub fn denotation(&self, phi: &Formula) -> Result<Event, HmsError> {
        let f = &self.frame;
        match phi {
            Formula::Top => Ok(f.top_event()),
            Formula::Atom(p) => self
                .atom_index(p)
                .map(|i| self.valuation[i].clone())
                .ok_or_else(|| HmsError::UnknownAtom(p.clone())),
            Formula::Not(x) => Ok(f.neg_event(&self.denotation(x)?)),
            Formula::And(x, y) => f.conj_events(&[self.denotation(x)?, self.denotation(y)?]),
            Formula::Knows(a, x) => {
                let agent = f
                    .agent_index(a)
                    .ok_or_else(|| HmsError::UnknownAgent(a.clone()))?;
                Ok(f.k_event(agent, &self.denotation(x)?))
            }
            other => self.denotation(&other.normalize()),
        }
    }

    /// Truth values of `phi` at every state, by state index.
    pub fn extension(&self, phi: &Formula) -> Result<Vec<ThreeVal>, HmsError> {
        let e = self.denotation(phi)?;
        let neg = self.frame.neg_event(&e);
        Ok((0..self.lattice().state_count())
            .map(|s| {
                if e.upset.contains(s) {
                    ThreeVal::True
                } else if neg.upset.contains(s) {
                    ThreeVal::False
                } else {
                    ThreeVal::Undefined
                }
            })
            .collect())
    }

    /// `M, s ⊨ φ` as a three-valued verdict.
    pub fn satisfies(&self, state: usize, phi: &Formula) -> Result<ThreeVal, HmsError> {
        if state >= self.lattice().state_count() {
            return Err(HmsError::UnknownState(format!("#{state}")));
        }
        Ok(self.extension(phi)?[state])
    }

    /// Whether atom `p` has a truth value at `state`.
    pub fn atom_defined(&self, atom: usize, state: usize) -> bool {
        let e = &self.valuation[atom];
        e.upset.contains(state) || self.frame.neg_event(e).upset.contains(state)
    }
}

/// Coarsest quotient merging, within each space, states that agree on atom
/// truth values, on the classes of their possibility sets and on the classes
/// of their projections. Returns `None` if nothing merges or the quotient
/// fails validation.
pub fn merge_indistinguishable(model: &HmsModel) -> Option<HmsModel> {
    let lat = model.lattice();
    let n = lat.state_count();
    let m = lat.space_count();
    let agents = model.agents().len();
    let atom_sig: Vec<Vec<ThreeVal>> = (0..n)
        .map(|s| {
            (0..model.atoms.len())
                .map(|p| {
                    if model.valuation[p].upset.contains(s) {
                        ThreeVal::True
                    } else if model.atom_defined(p, s) {
                        ThreeVal::False
                    } else {
                        ThreeVal::Undefined
                    }
                })
                .collect()
        })
        .collect();
    let mut class: Vec<usize> = {
        let mut ids = BTreeMap::new();
        (0..n)
            .map(|s| {
                let key = (lat.space_of(s), atom_sig[s].clone());
                let next = ids.len();
                *ids.entry(key).or_insert(next)
            })
            .collect()
    };
    loop {
        let mut ids = BTreeMap::new();
        let refined: Vec<usize> = (0..n)
            .map(|s| {
                let pis: Vec<BTreeSet<usize>> = (0..agents)
                    .map(|a| {
                        model
                            .frame
                            .possibility(a, s)
                            .ones()
                            .map(|t| class[t])
                            .collect()
                    })
                    .collect();
                let projs: Vec<Option<usize>> = (0..m)
                    .map(|sp| lat.project(s, sp).map(|t| class[t]))
                    .collect();
                let key = (class[s], pis, projs);
                let next = ids.len();
                *ids.entry(key).or_insert(next)
            })
            .collect();
        let stable = ids.len() == class.iter().collect::<BTreeSet<_>>().len();
        class = refined;
        if stable {
            break;
        }
    }
    let classes = class.iter().collect::<BTreeSet<_>>().len();
    if classes == n {
        return None;
    }

    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, &c) in class.iter().enumerate() {
        members.entry(c).or_default().push(s);
    }
    let name_of = |c: usize| -> String {
        members[&c]
            .iter()
            .map(|&s| lat.state_name(s))
            .collect::<Vec<_>>()
            .join("+")
    };
    let rep = |c: usize| members[&c][0];
    let spaces: Vec<(String, Vec<String>)> = (0..m)
        .map(|sp| {
            let mut cs: Vec<usize> = lat.states_of(sp).iter().map(|&s| class[s]).collect();
            cs.dedup();
            let cs: BTreeSet<usize> = cs.into_iter().collect();
            let mut cs: Vec<usize> = cs.into_iter().collect();
            cs.sort_by_key(|&c| rep(c));
            (
                lat.space_name(sp).to_string(),
                cs.into_iter().map(name_of).collect(),
            )
        })
        .collect();
    let order: Vec<(String, String)> = lat
        .covers()
        .into_iter()
        .map(|(lo, hi)| {
            (
                lat.space_name(lo).to_string(),
                lat.space_name(hi).to_string(),
            )
        })
        .collect();
    let mut projections = Vec::new();
    for (&c, ms) in &members {
        let s = ms[0];
        for (lo, hi) in lat.covers() {
            if hi == lat.space_of(s) {
                let t = lat.project(s, lo).expect("below");
                projections.push((
                    name_of(c),
                    lat.space_name(lo).to_string(),
                    name_of(class[t]),
                ));
            }
        }
    }
    let new_lat = StateSpaceLattice::new(spaces, order, projections).ok()?;
    let idx = |c: usize| new_lat.state_index(&name_of(c)).expect("class state");
    let mut corr = vec![vec![Vec::new(); new_lat.state_count()]; agents];
    for (&c, ms) in &members {
        for (a, row) in corr.iter_mut().enumerate() {
            let set: BTreeSet<usize> = model
                .frame
                .possibility(a, ms[0])
                .ones()
                .map(|t| idx(class[t]))
                .collect();
            row[idx(c)] = set.into_iter().collect();
        }
    }
    let frame = UnawarenessFrame::new(new_lat.clone(), model.agents().to_vec(), corr).ok()?;
    let mut valuation = Vec::new();
    for (p, atom) in model.atoms.iter().enumerate() {
        let e = &model.valuation[p];
        let mut gen = frame.lattice().empty_set();
        for s in e.generator.ones() {
            gen.insert(idx(class[s]));
        }
        valuation.push((atom.clone(), Event::new(frame.lattice(), e.base, gen).ok()?));
    }
    HmsModel::new(frame, valuation).ok()
}
