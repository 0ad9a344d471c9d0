//! Support evaluation of formulas over rule bases.
//!
//! A formula is supported by a base relative to a relation family:
//!
//! - an atom is supported when the base's closure derives it;
//! - bottom is supported when the base is inconsistent;
//! - an implication is supported when every superset base supporting the
//!   antecedent supports the consequent;
//! - `[a] phi` is supported when every base the agent relation reaches
//!   supports `phi`.
//!
//! The evaluator interns subformulas and computes one support bit vector over
//! all bases per node, so superset quantification is a single lattice sweep.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::base::{AtomSet, BaseId, RuleUniverse};
use crate::formula::{Agent, Atom, Formula};
use crate::relation::{
    consistency_vector, enumerate_families, identity_family, maximally_consistent_ids,
    sample_families, two_block_family, Relation, RelationError, RelationFamily, SampleStats,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("atom `{0}` is not in the universe alphabet")]
    UnknownAtom(String),
    #[error("agent `{0}` has no relation in the family")]
    UnknownAgent(String),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Atom(u8),
    Bottom,
    Implies(usize, usize),
    Know(u16, usize),
}

fn words_for(n: u64) -> usize {
    ((n + 63) / 64) as usize
}

fn bit_get(v: &[u64], i: u64) -> bool {
    v[(i / 64) as usize] >> (i % 64) & 1 == 1
}

fn trim(v: &mut [u64], n: u64) {
    if n % 64 != 0 {
        let last = v.len() - 1;
        v[last] &= (1u64 << (n % 64)) - 1;
    }
}

fn all_ones(v: &[u64], n: u64) -> bool {
    let full_words = (n / 64) as usize;
    if v[..full_words].iter().any(|&w| w != u64::MAX) {
        return false;
    }
    if n % 64 != 0 {
        let mask = (1u64 << (n % 64)) - 1;
        if v[full_words] & mask != mask {
            return false;
        }
    }
    true
}

fn first_zero(v: &[u64], n: u64) -> Option<BaseId> {
    (0..n).find(|&i| !bit_get(v, i))
}

/// Caching evaluator for one relation family. Node support vectors are
/// computed once and reused across formulas that share subterms.
pub struct Evaluator<'f> {
    family: &'f RelationFamily,
    closures: Vec<AtomSet>,
    cons: Vec<u64>,
    nodes: Vec<Node>,
    ids: HashMap<Node, usize>,
    vals: Vec<Option<Vec<u64>>>,
}

impl<'f> Evaluator<'f> {
    pub fn new(family: &'f RelationFamily) -> Evaluator<'f> {
        let u = family.universe();
        let n = u.base_count();
        let closures = (0..n).map(|m| u.closure_mask(m)).collect();
        let cons = consistency_vector(u);
        Evaluator { family, closures, cons, nodes: Vec::new(), ids: HashMap::new(), vals: Vec::new() }
    }

    pub fn family(&self) -> &'f RelationFamily {
        self.family
    }

    fn universe(&self) -> &RuleUniverse {
        self.family.universe()
    }

    fn intern_node(&mut self, node: Node) -> usize {
        if let Some(&id) = self.ids.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.vals.push(None);
        self.ids.insert(node, id);
        id
    }

    pub fn intern(&mut self, phi: &Formula) -> Result<usize, EvalError> {
        let node = match phi {
            Formula::AtomF(a) => {
                let idx = self
                    .universe()
                    .alphabet()
                    .index_of(a)
                    .ok_or_else(|| EvalError::UnknownAtom(a.0.clone()))?;
                Node::Atom(idx as u8)
            }
            Formula::Bottom => Node::Bottom,
            Formula::Implies(x, y) => {
                let xi = self.intern(x)?;
                let yi = self.intern(y)?;
                Node::Implies(xi, yi)
            }
            Formula::Know(agent, x) => {
                let ai = self
                    .family
                    .agents()
                    .iter()
                    .position(|a| a == agent)
                    .ok_or_else(|| EvalError::UnknownAgent(agent.0.clone()))?;
                let xi = self.intern(x)?;
                Node::Know(ai as u16, xi)
            }
        };
        Ok(self.intern_node(node))
    }

    fn ensure_value(&mut self, id: usize) {
        if self.vals[id].is_some() {
            return;
        }
        let n = self.universe().base_count();
        let rules = self.universe().rule_count();
        let words = words_for(n);
        let v = match self.nodes[id] {
            Node::Atom(idx) => {
                let mut v = vec![0u64; words];
                for m in 0..n {
                    if self.closures[m as usize] >> idx & 1 == 1 {
                        v[(m / 64) as usize] |= 1 << (m % 64);
                    }
                }
                v
            }
            Node::Bottom => {
                let mut v: Vec<u64> = self.cons.iter().map(|&w| !w).collect();
                trim(&mut v, n);
                v
            }
            Node::Implies(x, y) => {
                self.ensure_value(x);
                self.ensure_value(y);
                let vx = self.vals[x].as_ref().unwrap();
                let vy = self.vals[y].as_ref().unwrap();
                // anybad[m]: some superset supports the antecedent but not
                // the consequent.
                let mut anybad = vec![0u64; n as usize];
                for m in (0..n).rev() {
                    let mut b = if bit_get(vx, m) && !bit_get(vy, m) { 1u64 } else { 0 };
                    for i in 0..rules {
                        if m & (1 << i) == 0 {
                            b |= anybad[(m | (1 << i)) as usize];
                        }
                    }
                    anybad[m as usize] = b;
                }
                let mut v = vec![0u64; words];
                for m in 0..n {
                    if anybad[m as usize] == 0 {
                        v[(m / 64) as usize] |= 1 << (m % 64);
                    }
                }
                v
            }
            Node::Know(ai, x) => {
                self.ensure_value(x);
                let vx = self.vals[x].as_ref().unwrap();
                let agent = &self.family.agents()[ai as usize];
                let rel = self.family.relation_for(agent).expect("agent index is valid");
                let mut v = vec![0u64; words];
                match rel {
                    Relation::Dense { .. } => {
                        for m in 0..n {
                            let row = rel.row(m);
                            if row.iter().zip(vx).all(|(r, s)| r & !s == 0) {
                                v[(m / 64) as usize] |= 1 << (m % 64);
                            }
                        }
                    }
                    Relation::Partition { class_of: _, classes } => {
                        for class in classes {
                            if class.iter().all(|&m| bit_get(vx, m)) {
                                for &m in class {
                                    v[(m / 64) as usize] |= 1 << (m % 64);
                                }
                            }
                        }
                    }
                }
                v
            }
        };
        self.vals[id] = Some(v);
    }

    /// Support bit vector of `phi` over all bases of the universe.
    pub fn support_vector(&mut self, phi: &Formula) -> Result<&[u64], EvalError> {
        let id = self.intern(phi)?;
        self.ensure_value(id);
        Ok(self.vals[id].as_ref().unwrap())
    }

    pub fn holds(&mut self, phi: &Formula, base: BaseId) -> Result<bool, EvalError> {
        let v = self.support_vector(phi)?;
        Ok(bit_get(v, base))
    }

    /// Lowest base where every formula of `gamma` is supported but `phi`
    /// is not.
    pub fn consequence_counterexample(
        &mut self,
        gamma: &[Formula],
        phi: &Formula,
    ) -> Result<Option<BaseId>, EvalError> {
        let n = self.universe().base_count();
        let words = words_for(n);
        let mut all = vec![u64::MAX; words];
        trim(&mut all, n);
        for g in gamma {
            let v = self.support_vector(g)?.to_vec();
            for (a, w) in all.iter_mut().zip(v) {
                *a &= w;
            }
        }
        let vp = self.support_vector(phi)?;
        let bad: Vec<u64> = all.iter().zip(vp).map(|(a, p)| a & !p).collect();
        Ok((0..n).find(|&m| bit_get(&bad, m)))
    }
}

/// Convenience single-call form of [`Evaluator::holds`].
pub fn bes_holds(phi: &Formula, base: BaseId, family: &RelationFamily) -> Result<bool, EvalError> {
    Evaluator::new(family).holds(phi, base)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsequenceVerdict {
    pub holds: bool,
    pub counterexample: Option<BaseId>,
}

/// `gamma` entails `phi` in `family` when every base supporting all of
/// `gamma` supports `phi`. Empty `gamma` degenerates to validity in the
/// family.
pub fn bes_consequence(
    gamma: &[Formula],
    phi: &Formula,
    family: &RelationFamily,
) -> Result<ConsequenceVerdict, EvalError> {
    let counterexample = Evaluator::new(family).consequence_counterexample(gamma, phi)?;
    Ok(ConsequenceVerdict { holds: counterexample.is_none(), counterexample })
}

/// How `bes_valid` chooses the relation families to quantify over.
#[derive(Debug, Clone)]
pub enum ValidityMode {
    /// Exactly the given families.
    Explicit(Vec<RelationFamily>),
    /// The identity family and the two-block family.
    Canonical,
    /// Rejection-sampled families for a fixed seed.
    Sampled { count: usize, seed: u64 },
    /// Every family the checker accepts; only for tiny universes.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub family: String,
    pub base: BaseId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityVerdict {
    pub valid: bool,
    pub counterexample: Option<Counterexample>,
    pub families_checked: usize,
    pub sampling: Option<SampleStats>,
}

pub fn mode_families(
    u: &RuleUniverse,
    agents: &[Agent],
    mode: &ValidityMode,
) -> Result<(Vec<RelationFamily>, Option<SampleStats>), EvalError> {
    match mode {
        ValidityMode::Explicit(fams) => Ok((fams.clone(), None)),
        ValidityMode::Canonical => {
            Ok((vec![identity_family(u, agents), two_block_family(u, agents)], None))
        }
        ValidityMode::Sampled { count, seed } => {
            let (fams, stats) = sample_families(u, agents, *count, *seed)?;
            Ok((fams, Some(stats)))
        }
        ValidityMode::Exhaustive => Ok((enumerate_families(u, agents)?, None)),
    }
}

/// `phi` is valid when it is supported by every base under every family the
/// mode selects. The counterexample is the first failing base of the first
/// failing family.
pub fn bes_valid(
    phi: &Formula,
    u: &RuleUniverse,
    agents: &[Agent],
    mode: &ValidityMode,
) -> Result<ValidityVerdict, EvalError> {
    let (families, sampling) = mode_families(u, agents, mode)?;
    let n = u.base_count();
    let mut counterexample = None;
    let mut families_checked = 0;
    for fam in &families {
        families_checked += 1;
        let mut ev = Evaluator::new(fam);
        let v = ev.support_vector(phi)?;
        if !all_ones(v, n) {
            counterexample = Some(Counterexample {
                family: fam.name.clone(),
                base: first_zero(v, n).unwrap(),
            });
            break;
        }
    }
    Ok(ValidityVerdict { valid: counterexample.is_none(), counterexample, families_checked, sampling })
}

/// Schema instances plus seeded random formulas over the given alphabet and
/// agents. Deterministic for a fixed seed; duplicates are dropped keeping
/// first occurrence.
pub fn formula_pool(
    atoms: &[Atom],
    agents: &[Agent],
    random_count: usize,
    seed: u64,
) -> Vec<Formula> {
    use Formula as F;
    let a0 = F::atom(&atoms[0].0);
    let mut candidates = vec![a0.clone()];
    if atoms.len() > 1 {
        let a1 = F::atom(&atoms[1].0);
        candidates.push(a1.clone());
        candidates.push(F::implies(a0.clone(), a1));
    } else {
        candidates.push(F::implies(a0.clone(), a0.clone()));
    }
    if let Some(ag) = agents.first() {
        candidates.push(F::know(&ag.0, a0.clone()));
    }
    candidates.push(F::Bottom);

    let mut pool: Vec<Formula> = Vec::new();
    let mut seen: std::collections::HashSet<Formula> = std::collections::HashSet::new();
    let push = |f: Formula, pool: &mut Vec<Formula>, seen: &mut std::collections::HashSet<Formula>| {
        if seen.insert(f.clone()) {
            pool.push(f);
        }
    };

    for x in &candidates {
        for y in &candidates {
            push(ax1(x, y), &mut pool, &mut seen);
            push(ax3(x, y), &mut pool, &mut seen);
            for z in &candidates {
                push(ax2(x, y, z), &mut pool, &mut seen);
            }
        }
    }
    for ag in agents {
        for x in &candidates {
            push(ax_t(ag, x), &mut pool, &mut seen);
            push(ax_four(ag, x), &mut pool, &mut seen);
            push(ax_five(ag, x), &mut pool, &mut seen);
            for y in &candidates {
                push(ax_k(ag, x, y), &mut pool, &mut seen);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut generated = 0;
    while generated < random_count {
        let f = random_formula(&mut rng, atoms, agents, 3);
        generated += 1;
        push(f, &mut pool, &mut seen);
    }
    pool
}

fn random_formula(rng: &mut ChaCha8Rng, atoms: &[Atom], agents: &[Agent], depth: usize) -> Formula {
    let kind = if depth == 0 { rng.gen_range(0..5) } else { rng.gen_range(0..10) };
    match kind {
        0..=3 => Formula::AtomF(atoms[rng.gen_range(0..atoms.len())].clone()),
        4 => Formula::Bottom,
        5..=7 => Formula::implies(
            random_formula(rng, atoms, agents, depth - 1),
            random_formula(rng, atoms, agents, depth - 1),
        ),
        _ => Formula::know(
            &agents[rng.gen_range(0..agents.len())].0,
            random_formula(rng, atoms, agents, depth - 1),
        ),
    }
}

pub fn ax1(phi: &Formula, psi: &Formula) -> Formula {
    Formula::implies(phi.clone(), Formula::implies(psi.clone(), phi.clone()))
}

pub fn ax2(phi: &Formula, psi: &Formula, chi: &Formula) -> Formula {
    Formula::implies(
        Formula::implies(phi.clone(), Formula::implies(psi.clone(), chi.clone())),
        Formula::implies(
            Formula::implies(phi.clone(), psi.clone()),
            Formula::implies(phi.clone(), chi.clone()),
        ),
    )
}

pub fn ax3(phi: &Formula, psi: &Formula) -> Formula {
    Formula::implies(
        Formula::implies(Formula::not(phi.clone()), Formula::not(psi.clone())),
        Formula::implies(psi.clone(), phi.clone()),
    )
}

pub fn ax_k(agent: &Agent, phi: &Formula, psi: &Formula) -> Formula {
    Formula::implies(
        Formula::know(&agent.0, Formula::implies(phi.clone(), psi.clone())),
        Formula::implies(
            Formula::know(&agent.0, phi.clone()),
            Formula::know(&agent.0, psi.clone()),
        ),
    )
}

pub fn ax_t(agent: &Agent, phi: &Formula) -> Formula {
    Formula::implies(Formula::know(&agent.0, phi.clone()), phi.clone())
}

pub fn ax_four(agent: &Agent, phi: &Formula) -> Formula {
    let k = Formula::know(&agent.0, phi.clone());
    Formula::implies(k.clone(), Formula::know(&agent.0, k))
}

pub fn ax_five(agent: &Agent, phi: &Formula) -> Formula {
    let nk = Formula::not(Formula::know(&agent.0, phi.clone()));
    Formula::implies(nk.clone(), Formula::know(&agent.0, nk))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteEntry {
    pub name: &'static str,
    pub checked: u64,
    pub violations: Vec<String>,
}

impl SuiteEntry {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub family_names: Vec<String>,
    pub pool_size: usize,
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.ok())
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "families: {} | pool: {} formulas\n",
            self.family_names.join(", "),
            self.pool_size
        );
        for e in &self.entries {
            out.push_str(&format!(
                "{} {:<38} checked {}\n",
                if e.ok() { "pass" } else { "FAIL" },
                e.name,
                e.checked
            ));
            for v in &e.violations {
                out.push_str(&format!("     {v}\n"));
            }
        }
        out
    }
}

const MAX_VIOLATIONS: usize = 3;
const PAIR_CAP: usize = 40;
const TRIPLE_CAP: usize = 12;

/// Structural property suite over a set of families and a formula pool:
/// monotonicity along base extension, saturation at inconsistent bases,
/// classical behaviour at maximally consistent bases, extension of failures
/// to maximal bases, reduction of validity to maximal bases, validity of the
/// classical and modal axiom schemas, and closure of validity under
/// detachment and necessitation.
pub fn run_lemma_suite(
    families: &[RelationFamily],
    pool: &[Formula],
) -> Result<SuiteReport, EvalError> {
    assert!(!families.is_empty(), "suite needs at least one family");
    let u = families[0].universe();
    let n = u.base_count();
    let rules = u.rule_count();
    let maximal = maximally_consistent_ids(u);
    let cons = consistency_vector(u);
    let words = words_for(n);
    let mut maximal_vec = vec![0u64; words];
    for &m in &maximal {
        maximal_vec[(m / 64) as usize] |= 1 << (m % 64);
    }
    let agents: Vec<Agent> = families[0].agents().to_vec();

    let mut evs: Vec<Evaluator<'_>> = families.iter().map(Evaluator::new).collect();

    let mut entries: Vec<SuiteEntry> = Vec::new();
    let record = |entry: SuiteEntry, entries: &mut Vec<SuiteEntry>| entries.push(entry);

    // Support never shrinks when the base grows.
    {
        let mut checked = 0;
        let mut violations = Vec::new();
        for (fi, ev) in evs.iter_mut().enumerate() {
            for phi in pool {
                let v = ev.support_vector(phi)?.to_vec();
                for m in 0..n {
                    if !bit_get(&v, m) {
                        continue;
                    }
                    for i in 0..rules {
                        if m & (1 << i) == 0 {
                            checked += 1;
                            let bigger = m | (1 << i);
                            if !bit_get(&v, bigger) && violations.len() < MAX_VIOLATIONS {
                                violations.push(format!(
                                    "{}: `{phi}` supported at {m} but not at superset {bigger}",
                                    families[fi].name
                                ));
                            }
                        }
                    }
                }
            }
        }
        record(SuiteEntry { name: "monotone under base extension", checked, violations }, &mut entries);
    }

    // Inconsistent bases support everything.
    {
        let mut checked = 0;
        let mut violations = Vec::new();
        let incon_count = n - cons.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        for (fi, ev) in evs.iter_mut().enumerate() {
            for phi in pool {
                let v = ev.support_vector(phi)?;
                checked += incon_count;
                for (w, (&s, &c)) in v.iter().zip(&cons).enumerate() {
                    let bad = !s & !c;
                    let bad = if w == words - 1 && n % 64 != 0 { bad & ((1 << (n % 64)) - 1) } else { bad };
                    if bad != 0 && violations.len() < MAX_VIOLATIONS {
                        let m = w as u64 * 64 + bad.trailing_zeros() as u64;
                        violations.push(format!(
                            "{}: inconsistent base {m} does not support `{phi}`",
                            families[fi].name
                        ));
                        break;
                    }
                }
            }
        }
        record(
            SuiteEntry { name: "saturation at inconsistent bases", checked, violations },
            &mut entries,
        );
    }

    // At maximally consistent bases implication is classical and bottom
    // fails.
    {
        let mut checked = 0;
        let mut violations = Vec::new();
        let head = &pool[..pool.len().min(PAIR_CAP)];
        for (fi, ev) in evs.iter_mut().enumerate() {
            let vbot = ev.support_vector(&Formula::Bottom)?.to_vec();
            for &m in &maximal {
                checked += 1;
                if bit_get(&vbot, m) && violations.len() < MAX_VIOLATIONS {
                    violations.push(format!(
                        "{}: maximal base {m} supports bottom",
                        families[fi].name
                    ));
                }
            }
            for x in head {
                for y in head {
                    let imp = Formula::implies(x.clone(), y.clone());
                    let vi = ev.support_vector(&imp)?.to_vec();
                    let vx = ev.support_vector(x)?.to_vec();
                    let vy = ev.support_vector(y)?.to_vec();
                    for &m in &maximal {
                        checked += 1;
                        let classical = !bit_get(&vx, m) || bit_get(&vy, m);
                        if bit_get(&vi, m) != classical && violations.len() < MAX_VIOLATIONS {
                            violations.push(format!(
                                "{}: `{imp}` at maximal base {m}: support {} vs classical {}",
                                families[fi].name,
                                bit_get(&vi, m),
                                classical
                            ));
                        }
                    }
                }
            }
        }
        record(
            SuiteEntry { name: "classical implication at maximal bases", checked, violations },
            &mut entries,
        );
    }

    // Excluded middle at maximally consistent bases.
    {
        let mut checked = 0;
        let mut violations = Vec::new();
        for (fi, ev) in evs.iter_mut().enumerate() {
            for phi in pool {
                let v = ev.support_vector(phi)?.to_vec();
                let vneg = ev.support_vector(&Formula::not(phi.clone()))?.to_vec();
                for &m in &maximal {
                    checked += 1;
                    if !bit_get(&v, m) && !bit_get(&vneg, m) && violations.len() < MAX_VIOLATIONS {
                        violations.push(format!(
                            "{}: maximal base {m} supports neither `{phi}` nor its negation",
                            families[fi].name
                        ));
                    }
                }
            }
        }
        record(
            SuiteEntry { name: "excluded middle at maximal bases", checked, violations },
            &mut entries,
        );
    }

    // A failure at any base extends to a failure at some maximally
    // consistent superset.
    {
        let mut checked = 0;
        let mut violations = Vec::new();
        for (fi, ev) in evs.iter_mut().enumerate() {
            for phi in pool {
                let v = ev.support_vector(phi)?.to_vec();
                // wit[m]: some maximal superset of m fails phi.
                let mut wit = vec![false; n as usize];
                for m in (0..n).rev() {
                    let mut b = !bit_get(&v, m) && bit_get(&maximal_vec, m);
                    for i in 0..rules {
                        if m & (1 << i) == 0 {
                            b = b || wit[(m | (1 << i)) as usize];
                        }
                    }
                    wit[m as usize] = b;
                }
                for m in 0..n {
                    if bit_get(&v, m) {
                        continue;
                    }
                    checked += 1;
                    if !wit[m as usize] && violations.len() < MAX_VIOLATIONS {
                        violations.push(format!(
                            "{}: `{phi}` fails at {m} but at no maximal superset",
                            families[fi].name
                        ));
                    }
                }
            }
        }
        record(
            SuiteEntry { name: "failures extend to maximal bases", checked, violations },
            &mut entries,
        );
    }

    // Validity is equivalent to support at every maximally consistent base.
    {
        let mut checked = 0;
        let mut violations = Vec::new();
        for (fi, ev) in evs.iter_mut().enumerate() {
            for phi in pool {
                let v = ev.support_vector(phi)?;
                checked += 1;
                let everywhere = all_ones(v, n);
                let at_maximal = maximal.iter().all(|&m| bit_get(v, m));
                if everywhere != at_maximal && violations.len() < MAX_VIOLATIONS {
                    violations.push(format!(
                        "{}: `{phi}` valid-everywhere {} but valid-at-maximal {}",
                        families[fi].name, everywhere, at_maximal
                    ));
                }
            }
        }
        record(
            SuiteEntry { name: "validity reduces to maximal bases", checked, violations },
            &mut entries,
        );
    }

    // Classical axiom schemas are valid; validity is closed under
    // detachment.
    let valid_everywhere = |evs: &mut Vec<Evaluator<'_>>, f: &Formula| -> Result<bool, EvalError> {
        for ev in evs.iter_mut() {
            if !all_ones(ev.support_vector(f)?, n) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    {
        let mut checked = 0;
        let mut violations = Vec::new();
        let head = &pool[..pool.len().min(PAIR_CAP)];
        let small = &pool[..pool.len().min(TRIPLE_CAP)];
        for x in head {
            for y in head {
                for (name, f) in [("chain", ax1(x, y)), ("contraposition", ax3(x, y))] {
                    checked += 1;
                    if !valid_everywhere(&mut evs, &f)? && violations.len() < MAX_VIOLATIONS {
                        violations.push(format!("{name} instance `{f}` is not valid"));
                    }
                }
            }
        }
        for x in small {
            for y in small {
                for z in small {
                    let f = ax2(x, y, z);
                    checked += 1;
                    if !valid_everywhere(&mut evs, &f)? && violations.len() < MAX_VIOLATIONS {
                        violations.push(format!("distribution instance `{f}` is not valid"));
                    }
                }
            }
        }
        for x in head {
            for y in head {
                let imp = Formula::implies(x.clone(), y.clone());
                if valid_everywhere(&mut evs, x)? && valid_everywhere(&mut evs, &imp)? {
                    checked += 1;
                    if !valid_everywhere(&mut evs, y)? && violations.len() < MAX_VIOLATIONS {
                        violations.push(format!(
                            "detachment fails: `{x}` and `{imp}` valid but `{y}` is not"
                        ));
                    }
                }
            }
        }
        record(
            SuiteEntry { name: "classical axioms and detachment", checked, violations },
            &mut entries,
        );
    }

    // Modal axiom schemas are valid; validity is closed under
    // necessitation.
    {
        let mut checked = 0;
        let mut violations = Vec::new();
        let head = &pool[..pool.len().min(PAIR_CAP)];
        for ag in &agents {
            for x in head {
                for (name, f) in [
                    ("reflection", ax_t(ag, x)),
                    ("positive introspection", ax_four(ag, x)),
                    ("negative introspection", ax_five(ag, x)),
                ] {
                    checked += 1;
                    if !valid_everywhere(&mut evs, &f)? && violations.len() < MAX_VIOLATIONS {
                        violations.push(format!("{name} instance `{f}` is not valid"));
                    }
                }
                for y in head {
                    let f = ax_k(ag, x, y);
                    checked += 1;
                    if !valid_everywhere(&mut evs, &f)? && violations.len() < MAX_VIOLATIONS {
                        violations.push(format!("knowledge distribution `{f}` is not valid"));
                    }
                }
            }
            for x in pool {
                if valid_everywhere(&mut evs, x)? {
                    checked += 1;
                    let k = Formula::know(&ag.0, x.clone());
                    if !valid_everywhere(&mut evs, &k)? && violations.len() < MAX_VIOLATIONS {
                        violations.push(format!(
                            "necessitation fails: `{x}` valid but `{k}` is not"
                        ));
                    }
                }
            }
        }
        record(
            SuiteEntry { name: "modal axioms and necessitation", checked, violations },
            &mut entries,
        );
    }

    Ok(SuiteReport {
        family_names: families.iter().map(|f| f.name.clone()).collect(),
        pool_size: pool.len(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::Alphabet;
    use crate::formula::parse_formula;

    fn universe(atoms: &[&str], cap: usize) -> RuleUniverse {
        let atoms = atoms.iter().map(|a| Atom::new(a)).collect();
        RuleUniverse::new(Alphabet::new(atoms).unwrap(), cap).unwrap()
    }

    fn agents(names: &[&str]) -> Vec<Agent> {
        names.iter().map(|n| Agent::new(n)).collect()
    }

    fn pq() -> (RuleUniverse, Vec<Agent>) {
        (universe(&["p", "q"], 1), agents(&["a", "b"]))
    }

    /// Uncached reference evaluation, straight from the clauses.
    fn slow_holds(fam: &RelationFamily, phi: &Formula, b: BaseId) -> bool {
        let u = fam.universe();
        match phi {
            Formula::AtomF(a) => {
                let idx = u.alphabet().index_of(a).unwrap();
                u.closure_mask(b) >> idx & 1 == 1
            }
            Formula::Bottom => u.is_inconsistent_mask(b),
            Formula::Implies(x, y) => {
                let comp = u.full_base() & !b;
                let mut t = comp;
                loop {
                    let c = b | t;
                    if slow_holds(fam, x, c) && !slow_holds(fam, y, c) {
                        return false;
                    }
                    if t == 0 {
                        break;
                    }
                    t = (t - 1) & comp;
                }
                true
            }
            Formula::Know(agent, x) => fam
                .relation_for(agent)
                .unwrap()
                .successors(b)
                .into_iter()
                .all(|c| slow_holds(fam, x, c)),
        }
    }

    #[test]
    fn atoms_follow_the_closure() {
        let (u, ags) = pq();
        let fam = identity_family(&u, &ags);
        let p = parse_formula("p").unwrap();
        // Rule order: => p, p => p, q => p, => q, p => q, q => q.
        assert!(bes_holds(&p, 0b000001, &fam).unwrap());
        assert!(!bes_holds(&p, 0, &fam).unwrap());
        assert!(!bes_holds(&p, 0b000010, &fam).unwrap());
        let bot = parse_formula("bot").unwrap();
        assert!(!bes_holds(&bot, 0, &fam).unwrap());
        assert!(bes_holds(&bot, 0b001001, &fam).unwrap());
    }

    #[test]
    fn knowledge_under_the_canonical_families() {
        let (u, ags) = pq();
        let kp = parse_formula("[a]p").unwrap();
        let two = two_block_family(&u, &ags);
        let mut ev = Evaluator::new(&two);
        // Under the two-block family a consistent base always reaches the
        // empty base, so knowledge of an atom fails at every consistent
        // base and saturates at inconsistent ones.
        for m in 0..u.base_count() {
            assert_eq!(ev.holds(&kp, m).unwrap(), u.is_inconsistent_mask(m));
        }
        let id = identity_family(&u, &ags);
        let mut ev = Evaluator::new(&id);
        let p = parse_formula("p").unwrap();
        for m in 0..u.base_count() {
            assert_eq!(ev.holds(&kp, m).unwrap(), ev.holds(&p, m).unwrap());
        }
    }

    #[test]
    fn evaluator_matches_the_uncached_reference() {
        let (u, ags) = pq();
        let forms: Vec<Formula> = [
            "p",
            "q",
            "bot",
            "p -> q",
            "~p",
            "[a]p",
            "[b](p -> q)",
            "[a]p -> p",
            "(p -> q) -> (p -> q)",
            "[a]p -> [a][a]p",
            "~[a]p -> [a]~[a]p",
            "[a](p -> q) -> ([a]p -> [a]q)",
        ]
        .iter()
        .map(|s| parse_formula(s).unwrap())
        .collect();
        for fam in [identity_family(&u, &ags), two_block_family(&u, &ags)] {
            let mut ev = Evaluator::new(&fam);
            for phi in &forms {
                for b in 0..u.base_count() {
                    assert_eq!(
                        ev.holds(phi, b).unwrap(),
                        slow_holds(&fam, phi, b),
                        "{phi} at base {b} under {}",
                        fam.name
                    );
                }
            }
        }
    }

    #[test]
    fn validity_of_frozen_examples() {
        let (u, ags) = pq();
        let valid = |s: &str| {
            bes_valid(&parse_formula(s).unwrap(), &u, &ags, &ValidityMode::Canonical).unwrap()
        };
        assert!(valid("p -> p").valid);
        assert!(valid("[a]p -> p").valid);
        assert!(valid("p -> (q -> p)").valid);
        assert!(valid("[a](p -> q) -> ([a]p -> [a]q)").valid);
        assert!(valid("[a]p -> [a][a]p").valid);
        assert!(valid("~[a]p -> [a]~[a]p").valid);
        let v = valid("p -> q");
        assert!(!v.valid);
        // The empty base already fails: its superset {=> p} supports p but
        // not q.
        assert_eq!(
            v.counterexample,
            Some(Counterexample { family: "identity".into(), base: 0 })
        );
        assert_eq!(v.families_checked, 1);
        let v = valid("p");
        assert!(!v.valid);
    }

    #[test]
    fn consequence_covers_detachment_and_fails_honestly() {
        let (u, ags) = pq();
        let fam = identity_family(&u, &ags);
        let p = parse_formula("p").unwrap();
        let q = parse_formula("q").unwrap();
        let pq = parse_formula("p -> q").unwrap();
        let v = bes_consequence(&[pq, p.clone()], &q, &fam).unwrap();
        assert!(v.holds, "{v:?}");
        let v = bes_consequence(&[p.clone()], &q, &fam).unwrap();
        assert!(!v.holds);
        // Base 1 is {=> p}: supports p, does not support q.
        assert_eq!(v.counterexample, Some(1));
        let v = bes_consequence(&[p.clone()], &p, &fam).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn exhaustive_mode_agrees_with_canonical_on_the_small_universe() {
        let u = universe(&["p"], 1);
        let ags = agents(&["a"]);
        for s in ["p -> p", "[a]p -> p", "~[a]p -> [a]~[a]p", "p"] {
            let phi = parse_formula(s).unwrap();
            let ex = bes_valid(&phi, &u, &ags, &ValidityMode::Exhaustive).unwrap();
            let ca = bes_valid(&phi, &u, &ags, &ValidityMode::Canonical).unwrap();
            assert_eq!(ex.valid, ca.valid, "{s}");
            if ex.valid {
                assert_eq!(ex.families_checked, 4);
            }
        }
    }

    #[test]
    fn sampled_mode_is_deterministic() {
        let (u, ags) = pq();
        let phi = parse_formula("[a]p -> p").unwrap();
        let mode = ValidityMode::Sampled { count: 3, seed: 11 };
        let v1 = bes_valid(&phi, &u, &ags, &mode).unwrap();
        let v2 = bes_valid(&phi, &u, &ags, &mode).unwrap();
        assert_eq!(v1, v2);
        assert!(v1.valid);
        assert!(v1.sampling.is_some());
    }

    #[test]
    fn pool_is_deterministic_and_alphabet_bounded() {
        let (u, ags) = pq();
        let pool1 = formula_pool(u.alphabet().atoms(), &ags, 100, 1);
        let pool2 = formula_pool(u.alphabet().atoms(), &ags, 100, 1);
        assert_eq!(pool1, pool2);
        assert!(pool1.len() > 150, "pool has {} formulas", pool1.len());
        let alphabet: std::collections::BTreeSet<Atom> =
            u.alphabet().atoms().iter().cloned().collect();
        for f in &pool1 {
            assert!(crate::formula::atoms_of(f).is_subset(&alphabet), "{f}");
        }
        let small = formula_pool(&[Atom::new("p")], &ags[..1], 10, 2);
        for f in &small {
            assert!(crate::formula::atoms_of(f).len() <= 1);
        }
    }

    #[test]
    fn lemma_suite_passes_on_canonical_families() {
        let (u, ags) = pq();
        let pool = formula_pool(u.alphabet().atoms(), &ags, 60, 5);
        let fams = vec![identity_family(&u, &ags), two_block_family(&u, &ags)];
        let report = run_lemma_suite(&fams, &pool).unwrap();
        assert!(report.passed(), "{}", report.render());
        assert_eq!(report.entries.len(), 8);
        for e in &report.entries {
            assert!(e.checked > 0, "{} checked nothing", e.name);
        }
    }

    #[test]
    fn lemma_suite_passes_on_the_exhaustive_single_atom_universe() {
        let u = universe(&["p"], 1);
        let ags = agents(&["a"]);
        let fams = enumerate_families(&u, &ags).unwrap();
        let pool = formula_pool(u.alphabet().atoms(), &ags, 40, 9);
        let report = run_lemma_suite(&fams, &pool).unwrap();
        assert!(report.passed(), "{}", report.render());
    }
}
