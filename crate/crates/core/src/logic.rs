//! Axiom schemas of the awareness logic, validity sweeps over model corpora,
//! the RK inference rule and seeded random model generation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::atoms::AtomSet;
use crate::formula::{enumerate_formulas, AgentId, AtomId, Formula};
use crate::kripke::{build_lattice, KripkeModel, RestrictedWorld, DEFAULT_MAX_ATOMS};
use crate::lattice_model::{build_klm, EvalError, Extension, KripkeLatticeModel, Validity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("schema {schema} takes {formulas} formula(s) and {agents} agent(s), got {got_formulas} and {got_agents}")]
    Arity {
        schema: String,
        formulas: usize,
        agents: usize,
        got_formulas: usize,
        got_agents: usize,
    },
    #[error("RK side condition fails: conclusion atoms {conclusion:?} not covered by premise atoms {premises:?}")]
    SideConditionViolated {
        conclusion: Vec<AtomId>,
        premises: Vec<AtomId>,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Propositional tautology schemas standing in for all substitution
/// instances of classical logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tautology {
    /// `⊤`
    Top,
    /// `φ → φ`
    Identity,
    /// `φ ∨ ¬φ`
    ExcludedMiddle,
    /// `¬¬φ → φ`
    DoubleNegation,
    /// `φ → (ψ → φ)`
    Weakening,
    /// `(φ → (ψ → χ)) → ((φ → ψ) → (φ → χ))`
    Distribution,
    /// `(¬ψ → ¬φ) → (φ → ψ)`
    Contraposition,
    /// `φ ∧ ψ → φ`
    ConjunctionElimination,
    /// `φ → (ψ → φ ∧ ψ)`
    ConjunctionIntroduction,
}

impl Tautology {
    pub const ALL: [Tautology; 9] = [
        Tautology::Top,
        Tautology::Identity,
        Tautology::ExcludedMiddle,
        Tautology::DoubleNegation,
        Tautology::Weakening,
        Tautology::Distribution,
        Tautology::Contraposition,
        Tautology::ConjunctionElimination,
        Tautology::ConjunctionIntroduction,
    ];

    fn name(self) -> &'static str {
        match self {
            Tautology::Top => "top",
            Tautology::Identity => "identity",
            Tautology::ExcludedMiddle => "excluded-middle",
            Tautology::DoubleNegation => "double-negation",
            Tautology::Weakening => "weakening",
            Tautology::Distribution => "distribution",
            Tautology::Contraposition => "contraposition",
            Tautology::ConjunctionElimination => "and-elim",
            Tautology::ConjunctionIntroduction => "and-intro",
        }
    }

    fn arity(self) -> usize {
        match self {
            Tautology::Top => 0,
            Tautology::Identity | Tautology::ExcludedMiddle | Tautology::DoubleNegation => 1,
            Tautology::Distribution => 3,
            _ => 2,
        }
    }
}

/// Axiom schemas, plus the non-theorem `5` and the derived theorems used
/// as sweep targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomSchema {
    PropTautology(Tautology),
    /// `A_a¬φ ↔ A_aφ`
    Symmetry,
    /// `A_a(φ ∧ ψ) ↔ A_aφ ∧ A_aψ`
    AwarenessConjunction,
    /// `A_aφ ↔ A_aK_bφ`
    AwarenessKnowledgeReflection,
    /// `K_aφ → φ`
    T,
    /// `K_aφ → K_aK_aφ`
    Four,
    /// `¬K_aφ → K_a¬K_aφ`, not a theorem.
    Five,
    /// `K_a¬K_a¬K_aφ → (K_aφ ∨ K_a¬K_aφ)`
    WeakenedFive,
    /// `A_aφ → K_aA_aφ`
    AwarenessIntrospection,
    /// `A_aφ ↔ ⋀_{p ∈ At(φ)} A_a p`, for `φ` with at least one atom.
    GeneratedByPrimitives,
    /// `U_aφ → ¬K_a¬K_a¬K_aφ`
    UnawarenessWeakenedFive,
}

impl AxiomSchema {
    /// The theorem schemas of the axiom system, in sweep order.
    pub fn axioms() -> Vec<AxiomSchema> {
        let mut out: Vec<_> = Tautology::ALL
            .iter()
            .map(|&t| AxiomSchema::PropTautology(t))
            .collect();
        out.extend([
            AxiomSchema::Symmetry,
            AxiomSchema::AwarenessConjunction,
            AxiomSchema::AwarenessKnowledgeReflection,
            AxiomSchema::T,
            AxiomSchema::Four,
        ]);
        out
    }

    /// Theorems derivable from the axioms that are swept separately.
    pub fn derived() -> Vec<AxiomSchema> {
        vec![
            AxiomSchema::WeakenedFive,
            AxiomSchema::AwarenessIntrospection,
            AxiomSchema::GeneratedByPrimitives,
            AxiomSchema::Symmetry,
            AxiomSchema::UnawarenessWeakenedFive,
        ]
    }

    pub fn name(self) -> String {
        match self {
            AxiomSchema::PropTautology(t) => format!("prop-{}", t.name()),
            AxiomSchema::Symmetry => "symmetry".into(),
            AxiomSchema::AwarenessConjunction => "awareness-conjunction".into(),
            AxiomSchema::AwarenessKnowledgeReflection => "awareness-knowledge-reflection".into(),
            AxiomSchema::T => "T".into(),
            AxiomSchema::Four => "4".into(),
            AxiomSchema::Five => "5".into(),
            AxiomSchema::WeakenedFive => "weakened-5".into(),
            AxiomSchema::AwarenessIntrospection => "awareness-introspection".into(),
            AxiomSchema::GeneratedByPrimitives => "generated-by-primitives".into(),
            AxiomSchema::UnawarenessWeakenedFive => "unawareness-weakened-5".into(),
        }
    }

    /// Number of formula and agent arguments.
    pub fn arity(self) -> (usize, usize) {
        match self {
            AxiomSchema::PropTautology(t) => (t.arity(), 0),
            AxiomSchema::AwarenessConjunction => (2, 1),
            AxiomSchema::AwarenessKnowledgeReflection => (1, 2),
            _ => (1, 1),
        }
    }

    /// Whether the schema is a biconditional, swept as two implications.
    pub fn is_biconditional(self) -> bool {
        matches!(
            self,
            AxiomSchema::Symmetry
                | AxiomSchema::AwarenessConjunction
                | AxiomSchema::AwarenessKnowledgeReflection
                | AxiomSchema::GeneratedByPrimitives
        )
    }

    /// Builds the schema instance; a biconditional yields its two
    /// implications, everything else a single formula. Returns `None` when
    /// the instance is excluded (generated-by-primitives on an atomless
    /// argument).
    fn build<C: Connectives>(
        self,
        c: &C,
        args: &[C::Value],
        arg_formulas: &[&Formula],
        agents: &[usize],
    ) -> Option<Vec<C::Value>> {
        let both =
            |lhs: C::Value, rhs: C::Value| vec![c.implies(&lhs, &rhs), c.implies(&rhs, &lhs)];
        Some(match self {
            AxiomSchema::PropTautology(t) => vec![tautology(c, t, args)],
            AxiomSchema::Symmetry => {
                let a = agents[0];
                both(c.aware(a, &c.not(&args[0])), c.aware(a, &args[0]))
            }
            AxiomSchema::AwarenessConjunction => {
                let a = agents[0];
                both(
                    c.aware(a, &c.and(&args[0], &args[1])),
                    c.and(&c.aware(a, &args[0]), &c.aware(a, &args[1])),
                )
            }
            AxiomSchema::AwarenessKnowledgeReflection => {
                let (a, b) = (agents[0], agents[1]);
                both(c.aware(a, &args[0]), c.aware(a, &c.knows(b, &args[0])))
            }
            AxiomSchema::T => {
                let a = agents[0];
                vec![c.implies(&c.knows(a, &args[0]), &args[0])]
            }
            AxiomSchema::Four => {
                let a = agents[0];
                let k = c.knows(a, &args[0]);
                vec![c.implies(&k, &c.knows(a, &k))]
            }
            AxiomSchema::Five => {
                let a = agents[0];
                let nk = c.not(&c.knows(a, &args[0]));
                vec![c.implies(&nk, &c.knows(a, &nk))]
            }
            AxiomSchema::WeakenedFive => {
                let a = agents[0];
                let k = c.knows(a, &args[0]);
                let nk = c.not(&k);
                let lhs = c.knows(a, &c.not(&c.knows(a, &nk)));
                vec![c.implies(&lhs, &c.or(&k, &c.knows(a, &nk)))]
            }
            AxiomSchema::AwarenessIntrospection => {
                let a = agents[0];
                let aw = c.aware(a, &args[0]);
                vec![c.implies(&aw, &c.knows(a, &aw))]
            }
            AxiomSchema::GeneratedByPrimitives => {
                let a = agents[0];
                let atoms = arg_formulas[0].atoms();
                let mut parts = atoms.iter().map(|p| c.aware(a, &c.atom(p)));
                let first = parts.next()?;
                let conj = parts.fold(first, |acc, x| c.and(&acc, &x));
                both(c.aware(a, &args[0]), conj)
            }
            AxiomSchema::UnawarenessWeakenedFive => {
                let a = agents[0];
                let k = c.knows(a, &args[0]);
                let rhs = c.not(&c.knows(a, &c.not(&c.knows(a, &c.not(&k)))));
                vec![c.implies(&c.not(&c.aware(a, &args[0])), &rhs)]
            }
        })
    }
}

impl fmt::Display for AxiomSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn tautology<C: Connectives>(c: &C, t: Tautology, args: &[C::Value]) -> C::Value {
    match t {
        Tautology::Top => c.top(),
        Tautology::Identity => c.implies(&args[0], &args[0]),
        Tautology::ExcludedMiddle => c.or(&args[0], &c.not(&args[0])),
        Tautology::DoubleNegation => c.implies(&c.not(&c.not(&args[0])), &args[0]),
        Tautology::Weakening => c.implies(&args[0], &c.implies(&args[1], &args[0])),
        Tautology::Distribution => {
            let (p, q, r) = (&args[0], &args[1], &args[2]);
            c.implies(
                &c.implies(p, &c.implies(q, r)),
                &c.implies(&c.implies(p, q), &c.implies(p, r)),
            )
        }
        Tautology::Contraposition => c.implies(
            &c.implies(&c.not(&args[1]), &c.not(&args[0])),
            &c.implies(&args[0], &args[1]),
        ),
        Tautology::ConjunctionElimination => c.implies(&c.and(&args[0], &args[1]), &args[0]),
        Tautology::ConjunctionIntroduction => {
            c.implies(&args[0], &c.implies(&args[1], &c.and(&args[0], &args[1])))
        }
    }
}

/// The core connectives, interpreted either syntactically or over a
/// model's extensions. Derived connectives use their normalized forms.
trait Connectives {
    type Value: Clone;
    fn top(&self) -> Self::Value;
    fn atom(&self, p: &AtomId) -> Self::Value;
    fn not(&self, x: &Self::Value) -> Self::Value;
    fn and(&self, x: &Self::Value, y: &Self::Value) -> Self::Value;
    fn knows(&self, agent: usize, x: &Self::Value) -> Self::Value;

    fn or(&self, x: &Self::Value, y: &Self::Value) -> Self::Value {
        self.not(&self.and(&self.not(x), &self.not(y)))
    }

    fn implies(&self, x: &Self::Value, y: &Self::Value) -> Self::Value {
        self.not(&self.and(x, &self.not(y)))
    }

    fn aware(&self, agent: usize, x: &Self::Value) -> Self::Value {
        let k = self.knows(agent, x);
        self.or(&k, &self.knows(agent, &self.not(&k)))
    }
}

struct Syntax<'a> {
    agents: &'a [AgentId],
}

impl Connectives for Syntax<'_> {
    type Value = Formula;

    fn top(&self) -> Formula {
        Formula::Top
    }

    fn atom(&self, p: &AtomId) -> Formula {
        Formula::Atom(p.clone())
    }

    fn not(&self, x: &Formula) -> Formula {
        Formula::not(x.clone())
    }

    fn and(&self, x: &Formula, y: &Formula) -> Formula {
        Formula::and(x.clone(), y.clone())
    }

    fn knows(&self, agent: usize, x: &Formula) -> Formula {
        Formula::knows(&self.agents[agent], x.clone())
    }
}

struct Semantics<'a> {
    model: &'a KripkeLatticeModel,
    agent_map: &'a [usize],
}

impl Connectives for Semantics<'_> {
    type Value = Extension;

    fn top(&self) -> Extension {
        self.model.ext_top()
    }

    fn atom(&self, p: &AtomId) -> Extension {
        let idx = self
            .model
            .lattice()
            .base()
            .atom_index(p)
            .expect("argument atoms come from the model");
        self.model.ext_atom(idx)
    }

    fn not(&self, x: &Extension) -> Extension {
        self.model.ext_not(x)
    }

    fn and(&self, x: &Extension, y: &Extension) -> Extension {
        self.model.ext_and(x, y)
    }

    fn knows(&self, agent: usize, x: &Extension) -> Extension {
        self.model.ext_knows(self.agent_map[agent], x)
    }
}

fn check_arity(schema: AxiomSchema, formulas: usize, agents: usize) -> Result<(), LogicError> {
    let (f, a) = schema.arity();
    if (f, a) != (formulas, agents) {
        return Err(LogicError::Arity {
            schema: schema.name(),
            formulas: f,
            agents: a,
            got_formulas: formulas,
            got_agents: agents,
        });
    }
    Ok(())
}

/// The normalized instance of `schema`; biconditionals become the
/// conjunction of their two implications.
pub fn instantiate(
    schema: AxiomSchema,
    formulas: &[Formula],
    agents: &[AgentId],
) -> Result<Formula, LogicError> {
    let parts = instantiate_split(schema, formulas, agents)?;
    Ok(Formula::conjunction(parts).unwrap_or(Formula::Top))
}

/// The normalized instance of `schema`, biconditionals split into their
/// two implications. Empty for excluded instances.
pub fn instantiate_split(
    schema: AxiomSchema,
    formulas: &[Formula],
    agents: &[AgentId],
) -> Result<Vec<Formula>, LogicError> {
    check_arity(schema, formulas.len(), agents.len())?;
    let syntax = Syntax { agents };
    let refs: Vec<&Formula> = formulas.iter().collect();
    let idx: Vec<usize> = (0..agents.len()).collect();
    let args: Vec<Formula> = formulas.iter().map(Formula::normalize).collect();
    Ok(schema
        .build(&syntax, &args, &refs, &idx)
        .unwrap_or_default())
}

/// One failed schema instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepCounterexample {
    pub schema: AxiomSchema,
    pub instance: Formula,
    pub model: usize,
    /// Every failing world, in `Ω_L` order.
    pub worlds: Vec<String>,
}

/// Per-schema outcome of a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SchemaTally {
    pub instances: usize,
    pub checks: usize,
    pub counterexamples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SweepReport {
    pub tallies: BTreeMap<String, SchemaTally>,
    pub order: Vec<String>,
    pub counterexamples: Vec<SweepCounterexample>,
}

impl SweepReport {
    pub fn is_valid(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn counterexamples_for(
        &self,
        schema: AxiomSchema,
    ) -> impl Iterator<Item = &SweepCounterexample> {
        self.counterexamples
            .iter()
            .filter(move |c| c.schema == schema)
    }

    /// Line-oriented report: one line per failed instance, one `VALID`
    /// line per schema without failures.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for name in &self.order {
            let failed: Vec<_> = self
                .counterexamples
                .iter()
                .filter(|c| &c.schema.name() == name)
                .collect();
            if failed.is_empty() {
                out.push(format!("SCHEMA {name} INSTANCE * MODEL * WORLD * -> VALID"));
            }
            for c in failed {
                out.push(format!(
                    "SCHEMA {name} INSTANCE {} MODEL m{} WORLD {} -> CEX",
                    c.instance, c.model, c.worlds[0]
                ));
            }
        }
        out
    }

    fn merge(&mut self, other: SweepReport) {
        for name in other.order {
            if !self.order.contains(&name) {
                self.order.push(name);
            }
        }
        for (name, t) in other.tallies {
            let e = self.tallies.entry(name).or_default();
            e.instances += t.instances;
            e.checks += t.checks;
            e.counterexamples += t.counterexamples;
        }
        self.counterexamples.extend(other.counterexamples);
    }
}

/// Sweeps `schemas` over every argument tuple drawn from formulas of depth
/// at most `max_arg_depth` over the pools, on every model. Pools are
/// intersected with each model's own atoms and agents.
pub fn sweep_schemas(
    schemas: &[AxiomSchema],
    models: &[KripkeLatticeModel],
    atom_pool: &[AtomId],
    agent_pool: &[AgentId],
    max_arg_depth: usize,
) -> SweepReport {
    let mut report = SweepReport {
        order: schemas.iter().map(|s| s.name()).collect(),
        ..Default::default()
    };
    for name in &report.order {
        report.tallies.entry(name.clone()).or_default();
    }
    for (m, model) in models.iter().enumerate() {
        let base = model.lattice().base();
        let atoms: Vec<AtomId> = atom_pool
            .iter()
            .filter(|p| base.atom_index(p).is_some())
            .cloned()
            .collect();
        let agents: Vec<AgentId> = agent_pool
            .iter()
            .filter(|a| base.agent_index(a).is_some())
            .cloned()
            .collect();
        let agent_map: Vec<usize> = agents
            .iter()
            .map(|a| base.agent_index(a).expect("filtered"))
            .collect();
        let formulas = enumerate_formulas(&atoms, &agents, max_arg_depth);
        let exts: Vec<Extension> = formulas
            .iter()
            .map(|f| model.eval(f).expect("pool formulas"))
            .collect();
        let sem = Semantics {
            model,
            agent_map: &agent_map,
        };
        for &schema in schemas {
            let tally = report.tallies.get_mut(&schema.name()).expect("seeded");
            let (nf, na) = schema.arity();
            if na > agents.len() || (nf > 0 && formulas.is_empty()) {
                continue;
            }
            for agent_tuple in tuples(agents.len(), na) {
                for arg_tuple in tuples(formulas.len(), nf) {
                    let args: Vec<Extension> = arg_tuple.iter().map(|&i| exts[i].clone()).collect();
                    let arg_formulas: Vec<&Formula> =
                        arg_tuple.iter().map(|&i| &formulas[i]).collect();
                    let Some(parts) = schema.build(&sem, &args, &arg_formulas, &agent_tuple) else {
                        continue;
                    };
                    tally.instances += 1;
                    for (k, ext) in parts.iter().enumerate() {
                        tally.checks += 1;
                        let failing: Vec<usize> = ext.failures().collect();
                        if failing.is_empty() {
                            continue;
                        }
                        tally.counterexamples += 1;
                        let syntax = Syntax { agents: &agents };
                        let fs: Vec<Formula> = arg_formulas.iter().map(|f| (*f).clone()).collect();
                        let instance = schema
                            .build(&syntax, &fs, &arg_formulas, &agent_tuple)
                            .expect("same instance")
                            .swap_remove(k);
                        report.counterexamples.push(SweepCounterexample {
                            schema,
                            instance,
                            model: m,
                            worlds: failing
                                .into_iter()
                                .map(|i| model.world_ref(model.lattice().omega_world(i)))
                                .collect(),
                        });
                    }
                }
            }
        }
    }
    report
}

/// All `k`-tuples over `0..n`, in lexicographic order.
fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.checked_pow(k as u32).unwrap_or(0);
    let total = if k == 0 { 1 } else { total };
    (0..total).map(move |mut x| {
        let mut t = vec![0; k];
        for slot in t.iter_mut().rev() {
            *slot = x % n;
            x /= n;
        }
        t
    })
}

/// Every axiom schema over the model set.
pub fn axiom_sweep(
    models: &[KripkeLatticeModel],
    atom_pool: &[AtomId],
    agent_pool: &[AgentId],
    max_arg_depth: usize,
) -> SweepReport {
    sweep_schemas(
        &AxiomSchema::axioms(),
        models,
        atom_pool,
        agent_pool,
        max_arg_depth,
    )
}

/// The derived theorems over each model's own atoms and agents. Weakened
/// 5 is only swept on models whose relations are all equivalences.
pub fn derived_theorem_sweep(models: &[KripkeLatticeModel], max_arg_depth: usize) -> SweepReport {
    let mut report = SweepReport::default();
    for (m, model) in models.iter().enumerate() {
        let base = model.lattice().base();
        let schemas: Vec<AxiomSchema> = AxiomSchema::derived()
            .into_iter()
            .filter(|&s| s != AxiomSchema::WeakenedFive || base.all_equivalence())
            .collect();
        let mut part = sweep_schemas(
            &schemas,
            std::slice::from_ref(model),
            base.atoms(),
            base.agents(),
            max_arg_depth,
        );
        for c in &mut part.counterexamples {
            c.model = m;
        }
        report.merge(part);
    }
    let all: Vec<String> = AxiomSchema::derived().iter().map(|s| s.name()).collect();
    report
        .order
        .sort_by_key(|n| all.iter().position(|x| x == n));
    report
}

/// An RK inference step: from `⋀φ_i → φ` infer `⋀K_aφ_i → K_aφ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RkPremise {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    pub agent: AgentId,
}

impl RkPremise {
    /// `At(φ) ⊆ ⋃ At(φ_i)`.
    pub fn side_condition(&self) -> Result<(), LogicError> {
        let covered: BTreeSet<AtomId> = self.premises.iter().flat_map(|p| p.atoms()).collect();
        let needed = self.conclusion.atoms();
        if needed.is_subset(&covered) {
            Ok(())
        } else {
            Err(LogicError::SideConditionViolated {
                conclusion: needed.into_iter().collect(),
                premises: covered.into_iter().collect(),
            })
        }
    }

    pub fn premise_implication(&self) -> Formula {
        let lhs = Formula::conjunction(self.premises.iter().cloned()).unwrap_or(Formula::Top);
        Formula::implies(lhs, self.conclusion.clone()).normalize()
    }

    pub fn conclusion_implication(&self) -> Formula {
        let lhs = Formula::conjunction(
            self.premises
                .iter()
                .map(|p| Formula::knows(&self.agent, p.clone())),
        )
        .unwrap_or(Formula::Top);
        Formula::implies(lhs, Formula::knows(&self.agent, self.conclusion.clone())).normalize()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkOutcome {
    /// The premise implication is not valid, so the rule does not fire.
    PremiseInvalid,
    /// Premise and conclusion implications are both valid.
    Preserved,
    /// The premise is valid but the conclusion fails here.
    Violated {
        model: usize,
        world: RestrictedWorld,
    },
}

impl RkOutcome {
    pub fn preserved(self) -> bool {
        !matches!(self, RkOutcome::Violated { .. })
    }
}

/// Checks that RK preserves validity over `models` for this step.
pub fn rk_apply(rk: &RkPremise, models: &[KripkeLatticeModel]) -> Result<RkOutcome, LogicError> {
    rk.side_condition()?;
    if !crate::lattice_model::valid_over(models, &rk.premise_implication())?.is_valid() {
        return Ok(RkOutcome::PremiseInvalid);
    }
    Ok(
        match crate::lattice_model::valid_over(models, &rk.conclusion_implication())? {
            Validity::Valid => RkOutcome::Preserved,
            Validity::Counterexample { model, world } => RkOutcome::Violated { model, world },
        },
    )
}

const ATOM_NAMES: [&str; 3] = ["p", "q", "r"];
const AGENT_NAMES: [&str; 2] = ["a", "b"];

/// Seeded random Kripke lattice models with equivalence relations. Each
/// agent's worlds are split into random cells; each cell gets a random
/// awareness target `Z` and `π_a(w_X) = w_{X∩Z}`.
pub fn generate_models(
    seed: u64,
    atom_count: usize,
    world_count: usize,
    agent_count: usize,
    sample_count: usize,
) -> Vec<KripkeLatticeModel> {
    assert!((1..=3).contains(&atom_count), "atom_count must be 1..=3");
    assert!((1..=4).contains(&world_count), "world_count must be 1..=4");
    assert!((1..=2).contains(&agent_count), "agent_count must be 1..=2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms: Vec<AtomId> = ATOM_NAMES[..atom_count]
        .iter()
        .map(|n| AtomId::new(*n).expect("valid"))
        .collect();
    let agents: Vec<AgentId> = AGENT_NAMES[..agent_count]
        .iter()
        .map(|n| AgentId::new(*n).expect("valid"))
        .collect();
    let worlds: Vec<String> = (1..=world_count).map(|i| format!("w{i}")).collect();
    let full = AtomSet::full(atom_count);
    (0..sample_count)
        .map(|_| {
            let mut cells = Vec::with_capacity(agent_count);
            let mut relations = Vec::with_capacity(agent_count);
            for _ in 0..agent_count {
                let labels: Vec<usize> = (0..world_count)
                    .map(|_| rng.gen_range(0..world_count))
                    .collect();
                let pairs = (0..world_count)
                    .flat_map(|w| (0..world_count).map(move |v| (w, v)))
                    .filter(|&(w, v)| labels[w] == labels[v])
                    .collect();
                relations.push(pairs);
                cells.push(labels);
            }
            let valuation = (0..atom_count)
                .map(|_| (0..world_count).filter(|_| rng.gen_bool(0.5)).collect())
                .collect();
            let targets: Vec<Vec<AtomSet>> = (0..agent_count)
                .map(|_| {
                    (0..world_count)
                        .map(|_| AtomSet::from_bits(rng.gen_range(0..=full.bits())))
                        .collect()
                })
                .collect();
            let kripke = KripkeModel::new(
                atoms.clone(),
                agents.clone(),
                worlds.clone(),
                relations,
                valuation,
            )
            .expect("well-formed");
            let lattice = build_lattice(kripke, DEFAULT_MAX_ATOMS).expect("small");
            let maps = (0..agent_count)
                .map(|a| {
                    lattice
                        .omega()
                        .map(|w| {
                            let z = targets[a][cells[a][w.world]];
                            (w, w.with_subset(w.subset.intersection(z)))
                        })
                        .collect()
                })
                .collect();
            build_klm(lattice, maps).expect("generated maps satisfy D, II and NS")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::format::{model_to_string, Model};
    use crate::formula::parse;
    use crate::lattice_model::valid_over;

    fn ag(n: &str) -> AgentId {
        AgentId::new(n).unwrap()
    }

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn instantiate_examples() {
        let b = ag("B");
        assert_eq!(
            instantiate(AxiomSchema::Symmetry, &[f("i")], std::slice::from_ref(&b)).unwrap(),
            Formula::iff(Formula::aware(&b, f("!i")), Formula::aware(&b, f("i"))).normalize()
        );
        assert_eq!(
            instantiate(AxiomSchema::T, &[f("i")], std::slice::from_ref(&b)).unwrap(),
            f("K{B}i -> i")
        );
        assert_eq!(
            instantiate(AxiomSchema::Four, &[Formula::Top], std::slice::from_ref(&b)).unwrap(),
            f("K{B}top -> K{B}K{B}top")
        );
        assert_eq!(
            instantiate_split(
                AxiomSchema::AwarenessKnowledgeReflection,
                &[f("i")],
                &[b.clone(), ag("O")]
            )
            .unwrap(),
            vec![f("A{B}i -> A{B}K{O}i"), f("A{B}K{O}i -> A{B}i")]
        );
        assert!(instantiate_split(
            AxiomSchema::GeneratedByPrimitives,
            &[Formula::Top],
            std::slice::from_ref(&b)
        )
        .unwrap()
        .is_empty());
        for schema in AxiomSchema::axioms() {
            let (nf, na) = schema.arity();
            let fs = vec![f("i & l"); nf];
            let ags = vec![b.clone(); na];
            assert!(instantiate(schema, &fs, &ags).unwrap().is_normalized());
        }
    }

    #[test]
    fn arity_mismatch() {
        let err = instantiate(AxiomSchema::T, &[f("i"), f("l")], &[ag("B")]).unwrap_err();
        assert!(matches!(
            err,
            LogicError::Arity {
                formulas: 1,
                agents: 1,
                got_formulas: 2,
                ..
            }
        ));
    }

    #[test]
    fn semantic_and_syntactic_instances_agree() {
        let m = fixtures::trade_klm();
        let base = m.lattice().base();
        let formulas = enumerate_formulas(base.atoms(), base.agents(), 1);
        let exts: Vec<Extension> = formulas.iter().map(|x| m.eval(x).unwrap()).collect();
        let agent_map = [0, 1];
        let sem = Semantics {
            model: &m,
            agent_map: &agent_map,
        };
        let syn = Syntax {
            agents: base.agents(),
        };
        let mut schemas = AxiomSchema::axioms();
        schemas.extend(AxiomSchema::derived());
        schemas.push(AxiomSchema::Five);
        for schema in schemas {
            let (nf, na) = schema.arity();
            for ags in tuples(2, na) {
                for idx in tuples(formulas.len(), nf).step_by(7) {
                    let refs: Vec<&Formula> = idx.iter().map(|&i| &formulas[i]).collect();
                    let fs: Vec<Formula> = refs.iter().map(|x| (*x).clone()).collect();
                    let es: Vec<Extension> = idx.iter().map(|&i| exts[i].clone()).collect();
                    let (Some(a), Some(b)) = (
                        schema.build(&sem, &es, &refs, &ags),
                        schema.build(&syn, &fs, &refs, &ags),
                    ) else {
                        continue;
                    };
                    for (x, y) in a.iter().zip(&b) {
                        assert_eq!(x, &m.eval(y).unwrap(), "{schema} {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn trade_axioms_hold_and_five_fails() {
        let m = [fixtures::trade_klm()];
        let base = m[0].lattice().base();
        let report = axiom_sweep(&m, base.atoms(), base.agents(), 1);
        assert!(report.is_valid(), "{:?}", report.lines());
        let five = sweep_schemas(&[AxiomSchema::Five], &m, base.atoms(), base.agents(), 1);
        let hit = five.counterexamples_for(AxiomSchema::Five).any(|c| {
            c.instance == f("!K{B} l -> K{B} !K{B} l") && c.worlds.iter().any(|w| w == "w2@{i,l}")
        });
        assert!(hit);
        assert!(five
            .lines()
            .iter()
            .all(|l| l.starts_with("SCHEMA 5 INSTANCE ") && l.ends_with("-> CEX")));
    }

    #[test]
    fn empty_model_set_is_vacuous() {
        let report = axiom_sweep(&[], &[], &[], 1);
        assert!(report.is_valid());
        assert_eq!(report.lines().len(), AxiomSchema::axioms().len());
    }

    #[test]
    fn derived_theorems_on_trade() {
        let m = [fixtures::trade_klm()];
        let report = derived_theorem_sweep(&m, 1);
        assert!(report.is_valid(), "{:?}", report.lines());
        assert!(valid_over(&m, &f("A{B}(i&l) -> A{B}i & A{B}l"))
            .unwrap()
            .is_valid());
        assert!(valid_over(&m, &f("A{B}i & A{B}l -> A{B}(i&l)"))
            .unwrap()
            .is_valid());
        let w = m[0].lattice().base().parse_world_ref("w2@{i,l}").unwrap();
        assert!(m[0].satisfies(w, &f("U{B}l")).unwrap().is_true());
        assert!(m[0].satisfies(w, &f("!K{B}!K{B}!K{B}l")).unwrap().is_true());
    }

    #[test]
    fn rk_examples() {
        let m = [fixtures::trade_klm()];
        let b = ag("B");
        let rk = RkPremise {
            premises: vec![f("i"), f("l")],
            conclusion: f("i & l"),
            agent: b.clone(),
        };
        assert_eq!(rk_apply(&rk, &m).unwrap(), RkOutcome::Preserved);
        let rk = RkPremise {
            premises: vec![f("i")],
            conclusion: f("l"),
            agent: b.clone(),
        };
        assert!(matches!(
            rk_apply(&rk, &m),
            Err(LogicError::SideConditionViolated { .. })
        ));
        let rk = RkPremise {
            premises: vec![f("K{O} i")],
            conclusion: f("K{O} i"),
            agent: b,
        };
        assert_eq!(rk_apply(&rk, &m).unwrap(), RkOutcome::Preserved);
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        let a = generate_models(0, 3, 4, 2, 5);
        let b = generate_models(0, 3, 4, 2, 5);
        let text = |ms: &[KripkeLatticeModel]| {
            ms.iter()
                .map(|m| model_to_string(&Model::KripkeLattice(m.clone())))
                .collect::<String>()
        };
        assert_eq!(text(&a), text(&b));
        assert_ne!(text(&a), text(&generate_models(1, 3, 4, 2, 5)));
        assert!(a.iter().all(|m| m.lattice().base().all_equivalence()));
        assert!(generate_models(0, 1, 1, 1, 0).is_empty());
    }

    #[test]
    fn tuples_enumerate_lexicographically() {
        assert_eq!(
            tuples(2, 2).collect::<Vec<_>>(),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(tuples(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(tuples(0, 1).count(), 0);
    }
}
