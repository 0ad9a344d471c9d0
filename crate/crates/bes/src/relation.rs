//! Agent-indexed relations over base identifiers and the modal-relation
//! checker.
//!
//! A candidate relation is checked against seven conditions: the three frame
//! properties (reflexive, transitive, Euclidean) plus four conditions tying
//! the relation to base structure:
//!
//! - (a) every inconsistent base relates to at least one inconsistent base,
//!   and only to inconsistent bases;
//! - (b) consistent bases relate only to consistent bases;
//! - (c) if `B` relates to `C`, every consistent superset `D` of `B` relates
//!   to some superset of `C`;
//! - (d) if `B` relates to a consistent `C`, every subset `D` of `B` relates
//!   to some subset of `C`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::base::{BaseId, RuleUniverse};
use crate::formula::Agent;

const MAX_DENSE_BASES: u64 = 8192;
const MAX_PARTITION_CLASSES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("universe has {0} bases; the dense relation checker is capped at {MAX_DENSE_BASES}")]
    TooManyBases(u64),
    #[error("partition has {0} classes; the class checker is capped at {MAX_PARTITION_CLASSES}")]
    TooManyClasses(usize),
    #[error("relation spans {relation} bases but the universe has {universe}")]
    SizeMismatch { relation: u64, universe: u64 },
    #[error("family enumeration needs |bases|^2 * |agents| <= 20, got {0}")]
    EnumerationTooLarge(u64),
    #[error("agent `{0}` is not in the relation family")]
    UnknownAgent(String),
    #[error("line {line}: {message}")]
    File { line: usize, message: String },
}

fn words_for(n: u64) -> usize {
    ((n + 63) / 64) as usize
}

fn bit_get(v: &[u64], i: u64) -> bool {
    v[(i / 64) as usize] >> (i % 64) & 1 == 1
}

fn bit_set(v: &mut [u64], i: u64) {
    v[(i / 64) as usize] |= 1 << (i % 64);
}

fn or_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= s;
    }
}

fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn iter_bits(v: &[u64]) -> impl Iterator<Item = u64> + '_ {
    v.iter().enumerate().flat_map(|(w, &word)| {
        let mut bits = word;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let b = bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(w as u64 * 64 + b)
            }
        })
    })
}

/// A binary relation over the `n` bases of one universe.
///
/// `Dense` stores one bit row per base and represents arbitrary relations.
/// `Partition` represents an equivalence relation by its classes; it scales
/// to universes whose dense matrix would not fit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    Dense { n: u64, words: usize, bits: Vec<u64> },
    Partition { class_of: Vec<u32>, classes: Vec<Vec<BaseId>> },
}

impl Relation {
    pub fn empty_dense(n: u64) -> Relation {
        let words = words_for(n);
        Relation::Dense { n, words, bits: vec![0; words * n as usize] }
    }

    pub fn identity(n: u64) -> Relation {
        let mut r = Relation::empty_dense(n);
        for x in 0..n {
            r.insert(x, x);
        }
        r
    }

    pub fn dense_from_pairs(n: u64, pairs: impl IntoIterator<Item = (BaseId, BaseId)>) -> Relation {
        let mut r = Relation::empty_dense(n);
        for (x, y) in pairs {
            r.insert(x, y);
        }
        r
    }

    /// Builds a partition relation from disjoint member lists covering all
    /// of `0..n`.
    pub fn partition_from_classes(n: u64, mut classes: Vec<Vec<BaseId>>) -> Relation {
        for class in &mut classes {
            class.sort_unstable();
        }
        classes.sort_by_key(|c| c.first().copied());
        let mut class_of = vec![u32::MAX; n as usize];
        for (k, class) in classes.iter().enumerate() {
            for &m in class {
                assert_eq!(class_of[m as usize], u32::MAX, "overlapping classes");
                class_of[m as usize] = k as u32;
            }
        }
        assert!(class_of.iter().all(|&k| k != u32::MAX), "partition must cover all bases");
        Relation::Partition { class_of, classes }
    }

    pub fn n_bases(&self) -> u64 {
        match self {
            Relation::Dense { n, .. } => *n,
            Relation::Partition { class_of, .. } => class_of.len() as u64,
        }
    }

    pub fn related(&self, x: BaseId, y: BaseId) -> bool {
        match self {
            Relation::Dense { words, bits, .. } => {
                bit_get(&bits[x as usize * words..(x as usize + 1) * words], y)
            }
            Relation::Partition { class_of, .. } => class_of[x as usize] == class_of[y as usize],
        }
    }

    pub fn insert(&mut self, x: BaseId, y: BaseId) {
        match self {
            Relation::Dense { words, bits, .. } => {
                bit_set(&mut bits[x as usize * *words..(x as usize + 1) * *words], y);
            }
            Relation::Partition { .. } => panic!("cannot insert into a partition relation"),
        }
    }

    pub fn row(&self, x: BaseId) -> &[u64] {
        match self {
            Relation::Dense { words, bits, .. } => {
                &bits[x as usize * words..(x as usize + 1) * words]
            }
            Relation::Partition { .. } => panic!("partition relations have no dense rows"),
        }
    }

    /// Successor ids of `x` in ascending order.
    pub fn successors(&self, x: BaseId) -> Vec<BaseId> {
        match self {
            Relation::Dense { .. } => iter_bits(self.row(x)).collect(),
            Relation::Partition { class_of, classes } => {
                classes[class_of[x as usize] as usize].clone()
            }
        }
    }

    pub fn for_each_successor(&self, x: BaseId, mut f: impl FnMut(BaseId) -> bool) {
        match self {
            Relation::Dense { .. } => {
                for y in iter_bits(self.row(x)) {
                    if !f(y) {
                        return;
                    }
                }
            }
            Relation::Partition { class_of, classes } => {
                for &y in &classes[class_of[x as usize] as usize] {
                    if !f(y) {
                        return;
                    }
                }
            }
        }
    }

    pub fn pairs(&self) -> Vec<(BaseId, BaseId)> {
        let n = self.n_bases();
        let mut out = Vec::new();
        for x in 0..n {
            self.for_each_successor(x, |y| {
                out.push((x, y));
                true
            });
        }
        out
    }

    pub fn to_dense(&self) -> Result<Relation, RelationError> {
        let n = self.n_bases();
        if n > MAX_DENSE_BASES {
            return Err(RelationError::TooManyBases(n));
        }
        match self {
            Relation::Dense { .. } => Ok(self.clone()),
            Relation::Partition { class_of, classes } => {
                let mut r = Relation::empty_dense(n);
                for x in 0..n {
                    for &y in &classes[class_of[x as usize] as usize] {
                        r.insert(x, y);
                    }
                }
                Ok(r)
            }
        }
    }
}

/// `r(x, x)` for every base.
pub fn is_reflexive(r: &Relation) -> bool {
    match r {
        Relation::Dense { n, .. } => (0..*n).all(|x| r.related(x, x)),
        Relation::Partition { .. } => true,
    }
}

/// `r(x, y)` and `r(y, z)` imply `r(x, z)`.
pub fn is_transitive(r: &Relation) -> bool {
    match r {
        Relation::Dense { n, .. } => {
            // The check for x depends only on row(x), so distinct rows are
            // checked once.
            let mut seen: HashMap<&[u64], bool> = HashMap::new();
            (0..*n).all(|x| {
                let row = r.row(x);
                *seen
                    .entry(row)
                    .or_insert_with(|| iter_bits(row).all(|y| is_subset(r.row(y), row)))
            })
        }
        Relation::Partition { .. } => true,
    }
}

/// `r(x, y)` and `r(x, z)` imply `r(y, z)`.
pub fn is_euclidean(r: &Relation) -> bool {
    match r {
        Relation::Dense { n, .. } => {
            let mut seen: HashMap<&[u64], bool> = HashMap::new();
            (0..*n).all(|x| {
                let row = r.row(x);
                *seen
                    .entry(row)
                    .or_insert_with(|| iter_bits(row).all(|y| is_subset(row, r.row(y))))
            })
        }
        Relation::Partition { .. } => true,
    }
}

/// Least relation containing `seed` and the diagonal that is closed under
/// transitivity and the Euclidean rule. The result is an equivalence
/// relation whose classes are the connected components of the seed.
pub fn s5_closure(seed: &[(BaseId, BaseId)], n: u64) -> Relation {
    let mut r = Relation::identity(n);
    for &(x, y) in seed {
        r.insert(x, y);
    }
    loop {
        let mut changed = false;
        for x in 0..n {
            let row: Vec<u64> = r.row(x).to_vec();
            for y in iter_bits(&row) {
                // Transitivity: row(x) absorbs row(y); Euclidean: row(y)
                // absorbs row(x).
                let yrow: Vec<u64> = r.row(y).to_vec();
                let Relation::Dense { words, bits, .. } = &mut r else { unreachable!() };
                let xs = x as usize * *words;
                let ys = y as usize * *words;
                for w in 0..*words {
                    let before_x = bits[xs + w];
                    let before_y = bits[ys + w];
                    let after_x = before_x | yrow[w];
                    let after_y = before_y | row[w];
                    if after_x != before_x || after_y != before_y {
                        changed = true;
                    }
                    bits[xs + w] = after_x;
                    bits[ys + w] = after_y;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

/// A relation per agent over the bases of one universe.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationFamily {
    universe: RuleUniverse,
    agents: Vec<Agent>,
    relations: Vec<Relation>,
    pub name: String,
}

impl RelationFamily {
    pub fn new(
        universe: RuleUniverse,
        entries: Vec<(Agent, Relation)>,
        name: impl Into<String>,
    ) -> Result<RelationFamily, RelationError> {
        let mut entries = entries;
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let n = universe.base_count();
        for (_, r) in &entries {
            if r.n_bases() != n {
                return Err(RelationError::SizeMismatch { relation: r.n_bases(), universe: n });
            }
        }
        let (agents, relations) = entries.into_iter().unzip();
        Ok(RelationFamily { universe, agents, relations, name: name.into() })
    }

    pub fn universe(&self) -> &RuleUniverse {
        &self.universe
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn relations(&self) -> impl Iterator<Item = (&Agent, &Relation)> {
        self.agents.iter().zip(self.relations.iter())
    }

    pub fn relation_for(&self, agent: &Agent) -> Result<&Relation, RelationError> {
        self.agents
            .iter()
            .position(|a| a == agent)
            .map(|i| &self.relations[i])
            .ok_or_else(|| RelationError::UnknownAgent(agent.0.clone()))
    }
}

/// The seven checker conditions, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    Reflexive,
    Transitive,
    Euclidean,
    CondA,
    CondB,
    CondC,
    CondD,
}

impl Condition {
    pub const ALL: [Condition; 7] = [
        Condition::Reflexive,
        Condition::Transitive,
        Condition::Euclidean,
        Condition::CondA,
        Condition::CondB,
        Condition::CondC,
        Condition::CondD,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Condition::Reflexive => "reflexive",
            Condition::Transitive => "transitive",
            Condition::Euclidean => "euclidean",
            Condition::CondA => "(a)",
            Condition::CondB => "(b)",
            Condition::CondC => "(c)",
            Condition::CondD => "(d)",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub ok: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentReport {
    pub agent: Agent,
    pub checks: Vec<ConditionCheck>,
}

impl AgentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failed(&self) -> BTreeSet<Condition> {
        self.checks.iter().filter(|c| !c.ok).map(|c| c.condition).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalRelationReport {
    pub agents: Vec<AgentReport>,
}

impl ModalRelationReport {
    pub fn passed(&self) -> bool {
        self.agents.iter().all(|a| a.passed())
    }

    pub fn failed_for(&self, agent: &Agent) -> BTreeSet<Condition> {
        self.agents
            .iter()
            .find(|a| &a.agent == agent)
            .map(|a| a.failed())
            .unwrap_or_default()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for a in &self.agents {
            out.push_str(&format!("agent {}:\n", a.agent));
            for c in &a.checks {
                out.push_str(&format!(
                    "  {} {}\n",
                    if c.ok { "pass" } else { "FAIL" },
                    c.condition
                ));
                if let Some(w) = &c.witness {
                    out.push_str(&format!("       {w}\n"));
                }
            }
        }
        out
    }
}

/// Bit vector marking the consistent bases of `u`.
pub fn consistency_vector(u: &RuleUniverse) -> Vec<u64> {
    let n = u.base_count();
    let mut v = vec![0u64; words_for(n)];
    for m in 0..n {
        if !u.is_inconsistent_mask(m) {
            bit_set(&mut v, m);
        }
    }
    v
}

/// Checks every agent relation of `fam` against the seven conditions,
/// reporting a witness for each failure.
pub fn check_modal_relation(fam: &RelationFamily) -> Result<ModalRelationReport, RelationError> {
    let cons = consistency_vector(fam.universe());
    let mut agents = Vec::new();
    for (agent, rel) in fam.relations() {
        let checks = check_relation(fam.universe(), rel, &cons)?;
        agents.push(AgentReport { agent: agent.clone(), checks });
    }
    Ok(ModalRelationReport { agents })
}

/// Single-relation check against all seven conditions.
pub fn check_relation(
    u: &RuleUniverse,
    rel: &Relation,
    cons: &[u64],
) -> Result<Vec<ConditionCheck>, RelationError> {
    let n = u.base_count();
    if rel.n_bases() != n {
        return Err(RelationError::SizeMismatch { relation: rel.n_bases(), universe: n });
    }
    match rel {
        Relation::Dense { .. } => check_dense(u, rel, cons),
        Relation::Partition { class_of, classes } => {
            check_partition(u, class_of, classes, cons)
        }
    }
}

fn check_dense(
    u: &RuleUniverse,
    rel: &Relation,
    cons: &[u64],
) -> Result<Vec<ConditionCheck>, RelationError> {
    let n = u.base_count();
    if n > MAX_DENSE_BASES {
        return Err(RelationError::TooManyBases(n));
    }
    let rules = u.rule_count();
    let words = words_for(n);
    let mut out = Vec::new();

    // Frame properties, with rows deduplicated: each check depends only on
    // the row's content.
    let mut refl = ConditionCheck { condition: Condition::Reflexive, ok: true, witness: None };
    for x in 0..n {
        if !rel.related(x, x) {
            refl.ok = false;
            refl.witness = Some(format!("base {x} does not relate to itself"));
            break;
        }
    }
    out.push(refl);

    let mut row_reps: Vec<(Vec<u64>, BaseId)> = Vec::new();
    {
        let mut seen: HashMap<&[u64], ()> = HashMap::new();
        for x in 0..n {
            let row = rel.row(x);
            if !seen.contains_key(row) {
                seen.insert(row, ());
                row_reps.push((row.to_vec(), x));
            }
        }
    }

    let mut trans = ConditionCheck { condition: Condition::Transitive, ok: true, witness: None };
    'trans: for (row, x) in &row_reps {
        for y in iter_bits(row) {
            if !is_subset(rel.row(y), row) {
                let z = iter_bits(rel.row(y)).find(|&z| !bit_get(row, z)).unwrap();
                trans.ok = false;
                trans.witness =
                    Some(format!("({x},{y}) and ({y},{z}) are related but ({x},{z}) is not"));
                break 'trans;
            }
        }
    }
    out.push(trans);

    let mut eucl = ConditionCheck { condition: Condition::Euclidean, ok: true, witness: None };
    'eucl: for (row, x) in &row_reps {
        for y in iter_bits(row) {
            if !is_subset(row, rel.row(y)) {
                let z = iter_bits(row).find(|&z| !bit_get(rel.row(y), z)).unwrap();
                eucl.ok = false;
                eucl.witness =
                    Some(format!("({x},{y}) and ({x},{z}) are related but ({y},{z}) is not"));
                break 'eucl;
            }
        }
    }
    out.push(eucl);

    // (a): inconsistent bases see at least one inconsistent base and only
    // inconsistent bases.
    let mut cond_a = ConditionCheck { condition: Condition::CondA, ok: true, witness: None };
    for x in 0..n {
        if bit_get(cons, x) {
            continue;
        }
        let row = rel.row(x);
        let has_incon = row.iter().zip(cons).any(|(r, c)| r & !c != 0);
        if !has_incon {
            cond_a.ok = false;
            cond_a.witness =
                Some(format!("inconsistent base {x} has no inconsistent successor"));
            break;
        }
        if let Some(y) = iter_bits(row).find(|&y| bit_get(cons, y)) {
            cond_a.ok = false;
            cond_a.witness =
                Some(format!("inconsistent base {x} relates to consistent base {y}"));
            break;
        }
    }
    out.push(cond_a);

    // (b): consistent bases see only consistent bases.
    let mut cond_b = ConditionCheck { condition: Condition::CondB, ok: true, witness: None };
    'condb: for x in 0..n {
        if !bit_get(cons, x) {
            continue;
        }
        let row = rel.row(x);
        for (w, (&r, &c)) in row.iter().zip(cons).enumerate() {
            if r & !c != 0 {
                let y = w as u64 * 64 + (r & !c).trailing_zeros() as u64;
                cond_b.ok = false;
                cond_b.witness =
                    Some(format!("consistent base {x} relates to inconsistent base {y}"));
                break 'condb;
            }
        }
    }
    out.push(cond_b);

    // acc[m] = union of row(b) over b subset of m.
    let mut acc: Vec<u64> = match rel {
        Relation::Dense { bits, .. } => bits.clone(),
        _ => unreachable!(),
    };
    for i in 0..rules {
        for m in 0..n as usize {
            if m & (1 << i) != 0 {
                let (lo, hi) = acc.split_at_mut(m * words);
                or_into(
                    &mut hi[..words],
                    &lo[(m ^ (1 << i)) * words..(m ^ (1 << i)) * words + words],
                );
            }
        }
    }

    // Down-closures of rows, memoized on row content: dc(S) marks every base
    // contained in some member of S.
    let mut dc_memo: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    let mut down_closure = |row: &[u64]| -> Vec<u64> {
        if let Some(v) = dc_memo.get(row) {
            return v.clone();
        }
        let mut dc = row.to_vec();
        for i in 0..rules {
            for m in 0..n {
                if m & (1 << i) != 0 && bit_get(&dc, m) {
                    bit_set(&mut dc, m ^ (1 << i));
                }
            }
        }
        dc_memo.insert(row.to_vec(), dc.clone());
        dc
    };

    // (c): for consistent D, every successor of every subset of D must lie
    // below some successor of D.
    let mut cond_c = ConditionCheck { condition: Condition::CondC, ok: true, witness: None };
    for d in 0..n {
        if !bit_get(cons, d) {
            continue;
        }
        let dc = down_closure(rel.row(d));
        let a = &acc[d as usize * words..(d as usize + 1) * words];
        if !is_subset(a, &dc) {
            let c = iter_bits(a).find(|&c| !bit_get(&dc, c)).unwrap();
            let b = (0..n)
                .find(|&b| b & !d == 0 && rel.related(b, c))
                .expect("acc bit must come from some subset row");
            cond_c.ok = false;
            cond_c.witness = Some(format!(
                "({b},{c}) related, {d} is a consistent superset of {b}, but no successor of {d} contains {c}"
            ));
            break;
        }
    }
    out.push(cond_c);

    // accd[m] = union of (row(b) & cons) over b superset of m.
    let mut accd: Vec<u64> = match rel {
        Relation::Dense { bits, .. } => {
            let mut v = bits.clone();
            for m in 0..n as usize {
                for w in 0..words {
                    v[m * words + w] &= cons[w];
                }
            }
            v
        }
        _ => unreachable!(),
    };
    for i in 0..rules {
        for m in (0..n as usize).rev() {
            if m & (1 << i) == 0 {
                let (lo, hi) = accd.split_at_mut((m | (1 << i)) * words);
                or_into(&mut lo[m * words..m * words + words], &hi[..words]);
            }
        }
    }

    let mut uc_memo: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    let mut up_closure = |row: &[u64]| -> Vec<u64> {
        if let Some(v) = uc_memo.get(row) {
            return v.clone();
        }
        let mut uc = row.to_vec();
        for i in 0..rules {
            for m in (0..n).rev() {
                if m & (1 << i) == 0 && bit_get(&uc, m) {
                    bit_set(&mut uc, m | (1 << i));
                }
            }
        }
        uc_memo.insert(row.to_vec(), uc.clone());
        uc
    };

    // (d): for any D, every consistent successor of every superset of D must
    // lie above some successor of D.
    let mut cond_d = ConditionCheck { condition: Condition::CondD, ok: true, witness: None };
    for d in 0..n {
        let uc = up_closure(rel.row(d));
        let a = &accd[d as usize * words..(d as usize + 1) * words];
        if !is_subset(a, &uc) {
            let c = iter_bits(a).find(|&c| !bit_get(&uc, c)).unwrap();
            let b = (0..n)
                .find(|&b| d & !b == 0 && rel.related(b, c))
                .expect("accd bit must come from some superset row");
            cond_d.ok = false;
            cond_d.witness = Some(format!(
                "({b},{c}) related with {c} consistent, {d} is a subset of {b}, but no successor of {d} is contained in {c}"
            ));
            break;
        }
    }
    out.push(cond_d);

    Ok(out)
}

/// Equivalence-relation check on the class structure. Purity of each class
/// settles (a)/(b); (c)/(d) reduce to each consistent class agreeing on its
/// members' superset and subset class signatures, computed by lattice DP.
fn check_partition(
    u: &RuleUniverse,
    class_of: &[u32],
    classes: &[Vec<BaseId>],
    cons: &[u64],
) -> Result<Vec<ConditionCheck>, RelationError> {
    let n = u.base_count();
    let rules = u.rule_count();
    if classes.len() > MAX_PARTITION_CLASSES {
        return Err(RelationError::TooManyClasses(classes.len()));
    }
    for (k, class) in classes.iter().enumerate() {
        for &m in class {
            assert_eq!(class_of[m as usize], k as u32, "partition tables disagree");
        }
    }

    let mut out = vec![
        ConditionCheck { condition: Condition::Reflexive, ok: true, witness: None },
        ConditionCheck { condition: Condition::Transitive, ok: true, witness: None },
        ConditionCheck { condition: Condition::Euclidean, ok: true, witness: None },
    ];

    let mut cond_a = ConditionCheck { condition: Condition::CondA, ok: true, witness: None };
    let mut cond_b = ConditionCheck { condition: Condition::CondB, ok: true, witness: None };
    for class in classes {
        let first_cons = class.iter().copied().find(|&m| bit_get(cons, m));
        let first_incon = class.iter().copied().find(|&m| !bit_get(cons, m));
        if let (Some(c), Some(i)) = (first_cons, first_incon) {
            if cond_a.ok {
                cond_a.ok = false;
                cond_a.witness =
                    Some(format!("inconsistent base {i} relates to consistent base {c}"));
            }
            if cond_b.ok {
                cond_b.ok = false;
                cond_b.witness =
                    Some(format!("consistent base {c} relates to inconsistent base {i}"));
            }
        }
    }
    out.push(cond_a);
    out.push(cond_b);

    // up[m]: classes of consistent supersets of m; down[m]: classes of
    // subsets of m. Signatures are class bitmasks.
    let mut up = vec![0u64; n as usize];
    for m in (0..n).rev() {
        let mut s = if bit_get(cons, m) { 1u64 << class_of[m as usize] } else { 0 };
        for i in 0..rules {
            if m & (1 << i) == 0 {
                s |= up[(m | (1 << i)) as usize];
            }
        }
        up[m as usize] = s;
    }
    let mut down = vec![0u64; n as usize];
    for m in 0..n {
        let mut s = 1u64 << class_of[m as usize];
        for i in 0..rules {
            if m & (1 << i) != 0 {
                s |= down[(m ^ (1 << i)) as usize];
            }
        }
        down[m as usize] = s;
    }

    let mut cond_c = ConditionCheck { condition: Condition::CondC, ok: true, witness: None };
    let mut cond_d = ConditionCheck { condition: Condition::CondD, ok: true, witness: None };
    for class in classes {
        let members: Vec<BaseId> =
            class.iter().copied().filter(|&m| bit_get(cons, m)).collect();
        if members.is_empty() {
            continue;
        }
        if cond_c.ok {
            let sig = up[members[0] as usize];
            if let Some(&m) = members.iter().find(|&&m| up[m as usize] != sig) {
                cond_c.ok = false;
                cond_c.witness = Some(format!(
                    "bases {} and {m} share a class but reach different class sets through consistent supersets",
                    members[0]
                ));
            }
        }
        if cond_d.ok {
            let sig = down[members[0] as usize];
            if let Some(&m) = members.iter().find(|&&m| down[m as usize] != sig) {
                cond_d.ok = false;
                cond_d.witness = Some(format!(
                    "bases {} and {m} share a class but reach different class sets through subsets",
                    members[0]
                ));
            }
        }
    }
    out.push(cond_c);
    out.push(cond_d);

    Ok(out)
}

/// Every base relates exactly to itself, for every agent.
pub fn identity_family(u: &RuleUniverse, agents: &[Agent]) -> RelationFamily {
    let n = u.base_count();
    let entries = agents
        .iter()
        .map(|a| (a.clone(), Relation::identity(n)))
        .collect();
    RelationFamily::new(u.clone(), entries, "identity").unwrap()
}

/// Consistent bases all relate to each other, and so do inconsistent bases.
pub fn two_block_family(u: &RuleUniverse, agents: &[Agent]) -> RelationFamily {
    let n = u.base_count();
    let cons = consistency_vector(u);
    let words = words_for(n);
    let mut incon = vec![0u64; words];
    for (w, &c) in cons.iter().enumerate() {
        incon[w] = !c;
    }
    // Trim padding bits beyond n.
    if n % 64 != 0 {
        incon[words - 1] &= (1u64 << (n % 64)) - 1;
    }
    let mut bits = Vec::with_capacity(words * n as usize);
    for m in 0..n {
        if bit_get(&cons, m) {
            bits.extend_from_slice(&cons);
        } else {
            bits.extend_from_slice(&incon);
        }
    }
    let rel = Relation::Dense { n, words, bits };
    let entries = agents.iter().map(|a| (a.clone(), rel.clone())).collect();
    RelationFamily::new(u.clone(), entries, "two_block").unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleStats {
    pub requested: usize,
    pub accepted: usize,
    pub attempts: usize,
    pub budget: usize,
    pub exhausted: bool,
}

/// Rejection sampling: draw random pairs among consistent bases, close under
/// the frame rules, add the inconsistent block, and keep families that pass
/// the checker. Deterministic for a fixed seed.
pub fn sample_families(
    u: &RuleUniverse,
    agents: &[Agent],
    count: usize,
    seed: u64,
) -> Result<(Vec<RelationFamily>, SampleStats), RelationError> {
    let n = u.base_count();
    if n > MAX_DENSE_BASES {
        return Err(RelationError::TooManyBases(n));
    }
    let cons = consistency_vector(u);
    let cons_ids: Vec<BaseId> = (0..n).filter(|&m| bit_get(&cons, m)).collect();
    let incon_ids: Vec<BaseId> = (0..n).filter(|&m| !bit_get(&cons, m)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = 100 + count * 100;
    let mut attempts = 0;
    let mut families = Vec::new();
    while families.len() < count && attempts < budget {
        attempts += 1;
        let mut entries = Vec::new();
        for agent in agents {
            let k = rng.gen_range(0..=2usize);
            let seed_pairs: Vec<(BaseId, BaseId)> = (0..k)
                .map(|_| {
                    let x = cons_ids[rng.gen_range(0..cons_ids.len())];
                    let y = cons_ids[rng.gen_range(0..cons_ids.len())];
                    (x, y)
                })
                .collect();
            let mut rel = s5_closure(&seed_pairs, n);
            for &x in &incon_ids {
                for &y in &incon_ids {
                    rel.insert(x, y);
                }
            }
            entries.push((agent.clone(), rel));
        }
        let fam = RelationFamily::new(
            u.clone(),
            entries,
            format!("sampled:{seed}:{attempts}"),
        )?;
        if check_modal_relation(&fam)?.passed() {
            families.push(fam);
        }
    }
    let stats = SampleStats {
        requested: count,
        accepted: families.len(),
        attempts,
        budget,
        exhausted: families.len() < count,
    };
    Ok((families, stats))
}

/// All relation families whose every agent relation passes the checker.
/// Only feasible for tiny universes; candidates are prefiltered to reflexive
/// relations.
pub fn enumerate_families(
    u: &RuleUniverse,
    agents: &[Agent],
) -> Result<Vec<RelationFamily>, RelationError> {
    let n = u.base_count();
    if n * n * agents.len() as u64 > 20 {
        return Err(RelationError::EnumerationTooLarge(n * n * agents.len() as u64));
    }
    let cons = consistency_vector(u);
    let off_diag: Vec<(BaseId, BaseId)> =
        (0..n).flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y))).collect();
    let mut passing: Vec<Relation> = Vec::new();
    for choice in 0..(1u64 << off_diag.len()) {
        let mut rel = Relation::identity(n);
        for (i, &(x, y)) in off_diag.iter().enumerate() {
            if choice & (1 << i) != 0 {
                rel.insert(x, y);
            }
        }
        if check_relation(u, &rel, &cons)?.iter().all(|c| c.ok) {
            passing.push(rel);
        }
    }
    // Cartesian product across agents.
    let mut families: Vec<Vec<Relation>> = vec![Vec::new()];
    for _ in agents {
        let mut next = Vec::new();
        for partial in &families {
            for rel in &passing {
                let mut longer = partial.clone();
                longer.push(rel.clone());
                next.push(longer);
            }
        }
        families = next;
    }
    families
        .into_iter()
        .enumerate()
        .map(|(i, rels)| {
            let entries = agents.iter().cloned().zip(rels).collect();
            RelationFamily::new(u.clone(), entries, format!("enumerated:{i}"))
        })
        .collect()
}

/// Renders a relation family: one `agent:` header per agent, then `i j` pair
/// lines for dense relations or `class: i j k` lines for partitions.
pub fn format_relation_file(fam: &RelationFamily) -> String {
    let mut out = String::new();
    for (agent, rel) in fam.relations() {
        out.push_str(&format!("agent: {agent}\n"));
        match rel {
            Relation::Dense { n, .. } => {
                for x in 0..*n {
                    for y in iter_bits(rel.row(x)) {
                        out.push_str(&format!("{x} {y}\n"));
                    }
                }
            }
            Relation::Partition { classes, .. } => {
                for class in classes {
                    let ids: Vec<String> = class.iter().map(|m| m.to_string()).collect();
                    out.push_str(&format!("class: {}\n", ids.join(" ")));
                }
            }
        }
    }
    out
}

/// Parses the relation file format. Pair lines `i j` add a single pair;
/// `class: i j k` lines relate all the listed bases to each other. Loaded
/// relations are always dense.
pub fn parse_relation_file(
    text: &str,
    u: &RuleUniverse,
) -> Result<RelationFamily, RelationError> {
    let n = u.base_count();
    let file_err = |line: usize, message: String| RelationError::File { line, message };
    let mut sections: Vec<(Agent, Relation)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("agent:") {
            let name = rest.trim();
            if name.is_empty() {
                return Err(file_err(line_no, "empty agent name".into()));
            }
            sections.push((Agent::new(name), Relation::empty_dense(n)));
        } else {
            let (_, rel) = sections
                .last_mut()
                .ok_or_else(|| file_err(line_no, "pair line before any `agent:` header".into()))?;
            let parse_id = |tok: &str| -> Result<BaseId, RelationError> {
                let id = tok
                    .parse::<BaseId>()
                    .map_err(|_| file_err(line_no, format!("bad base id `{tok}`")))?;
                if id >= n {
                    return Err(file_err(
                        line_no,
                        format!("base id {id} out of range for {n} bases"),
                    ));
                }
                Ok(id)
            };
            if let Some(rest) = line.strip_prefix("class:") {
                let ids: Vec<BaseId> =
                    rest.split_whitespace().map(parse_id).collect::<Result<_, _>>()?;
                for &x in &ids {
                    for &y in &ids {
                        rel.insert(x, y);
                    }
                }
            } else {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(file_err(line_no, "expected `i j`".into()));
                }
                rel.insert(parse_id(toks[0])?, parse_id(toks[1])?);
            }
        }
    }
    if sections.is_empty() {
        return Err(file_err(1, "no `agent:` sections".into()));
    }
    RelationFamily::new(u.clone(), sections, "file")
}

/// Ascending ids of the maximally consistent bases of `u`.
pub fn maximally_consistent_ids(u: &RuleUniverse) -> Vec<BaseId> {
    (0..u.base_count())
        .filter(|&m| crate::base::is_maximally_consistent(&u.base(m)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::Alphabet;
    use crate::formula::Atom;

    fn universe(atoms: &[&str], cap: usize) -> RuleUniverse {
        let atoms = atoms.iter().map(|a| Atom::new(a)).collect();
        RuleUniverse::new(Alphabet::new(atoms).unwrap(), cap).unwrap()
    }

    fn agents(names: &[&str]) -> Vec<Agent> {
        names.iter().map(|n| Agent::new(n)).collect()
    }

    #[test]
    fn frame_properties_on_frozen_relations() {
        let id = Relation::identity(4);
        assert!(is_reflexive(&id) && is_transitive(&id) && is_euclidean(&id));
        let empty = Relation::empty_dense(4);
        assert!(!is_reflexive(&empty));
        assert!(is_transitive(&empty) && is_euclidean(&empty));
        let single = Relation::dense_from_pairs(4, [(0, 1)]);
        assert!(is_transitive(&single));
        assert!(!is_reflexive(&single));
        assert!(!is_euclidean(&single));
        let with_loop = Relation::dense_from_pairs(4, [(0, 1), (1, 1)]);
        assert!(is_euclidean(&with_loop));
    }

    #[test]
    fn s5_closure_of_empty_seed_is_identity() {
        assert_eq!(s5_closure(&[], 4), Relation::identity(4));
    }

    #[test]
    fn s5_closure_of_one_edge_is_the_two_cycle_block() {
        // Fixpoint by hand: (x,y) forces (y,y) by the Euclidean rule, then
        // (y,x) from (x,y),(x,x); transitivity adds nothing new.
        let r = s5_closure(&[(0, 1)], 3);
        let mut want = Relation::identity(3);
        want.insert(0, 1);
        want.insert(1, 0);
        assert_eq!(r, want);
    }

    #[test]
    fn s5_closure_is_idempotent_and_componentwise() {
        let seeds: &[&[(BaseId, BaseId)]] =
            &[&[(0, 1), (2, 3)], &[(0, 1), (1, 2)], &[(3, 0)], &[(1, 1)]];
        for seed in seeds {
            let r = s5_closure(seed, 5);
            assert!(is_reflexive(&r) && is_transitive(&r) && is_euclidean(&r));
            // Symmetry follows from reflexive + Euclidean.
            for (x, y) in r.pairs() {
                assert!(r.related(y, x));
            }
            assert_eq!(s5_closure(&r.pairs(), 5), r, "idempotent on {seed:?}");
            // Oracle: classes are connected components of the seed graph.
            let mut repr: Vec<u64> = (0..5).collect();
            loop {
                let mut changed = false;
                for &(x, y) in *seed {
                    let (rx, ry) = (repr[x as usize], repr[y as usize]);
                    if rx != ry {
                        let lo = rx.min(ry);
                        for v in repr.iter_mut() {
                            if *v == rx || *v == ry {
                                *v = lo;
                            }
                        }
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            for x in 0..5u64 {
                for y in 0..5u64 {
                    assert_eq!(
                        r.related(x, y),
                        repr[x as usize] == repr[y as usize],
                        "{seed:?} at ({x},{y})"
                    );
                }
            }
        }
    }

    #[test]
    fn canonical_families_pass_the_checker() {
        let u = universe(&["p", "q"], 1);
        let ags = agents(&["a", "b"]);
        for fam in [identity_family(&u, &ags), two_block_family(&u, &ags)] {
            let report = check_modal_relation(&fam).unwrap();
            assert!(report.passed(), "{} failed:\n{}", fam.name, report.render());
        }
    }

    #[test]
    fn consistent_times_all_fails_condition_b() {
        let u = universe(&["p", "q"], 1);
        let n = u.base_count();
        let cons = consistency_vector(&u);
        let mut rel = Relation::identity(n);
        for x in 0..n {
            if bit_get(&cons, x) {
                for y in 0..n {
                    rel.insert(x, y);
                }
            }
        }
        let fam = RelationFamily::new(u, vec![(Agent::new("a"), rel)], "bad").unwrap();
        let report = check_modal_relation(&fam).unwrap();
        let failed = report.failed_for(&Agent::new("a"));
        assert!(failed.contains(&Condition::CondB), "failed = {failed:?}");
        let agent = &report.agents[0];
        let b_check = agent.checks.iter().find(|c| c.condition == Condition::CondB).unwrap();
        assert!(b_check.witness.is_some());
    }

    #[test]
    fn clustering_two_incomparable_consistent_bases_fails_c_but_not_d() {
        // {p,q} cap-1 ids: 0 is the empty base, 2 is {p => p}. Neither
        // contains the other's rules, so superset lifting breaks while
        // subset tracing survives (both reach only the shared cluster).
        let u = universe(&["p", "q"], 1);
        let n = u.base_count();
        let mut classes: Vec<Vec<BaseId>> = vec![vec![0, 2]];
        classes.extend((0..n).filter(|&m| m != 0 && m != 2).map(|m| vec![m]));
        let rel = Relation::partition_from_classes(n, classes).to_dense().unwrap();
        let fam = RelationFamily::new(u, vec![(Agent::new("a"), rel)], "bad_c").unwrap();
        let failed = check_modal_relation(&fam).unwrap().failed_for(&Agent::new("a"));
        assert!(failed.contains(&Condition::CondC), "failed = {failed:?}");
        assert!(!failed.contains(&Condition::CondD), "failed = {failed:?}");
        assert!(!failed.contains(&Condition::Reflexive));
    }

    #[test]
    fn clustering_two_maximal_bases_fails_only_d() {
        // Ids 39 and 58 are the two maximally consistent bases proving
        // exactly {p} and exactly {q}. Their only consistent superset is
        // themselves, so superset lifting holds; their subsets differ, so
        // subset tracing fails.
        let u = universe(&["p", "q"], 1);
        let n = u.base_count();
        let maximal = maximally_consistent_ids(&u);
        assert!(maximal.contains(&39) && maximal.contains(&58), "maximal = {maximal:?}");
        let mut classes: Vec<Vec<BaseId>> = vec![vec![39, 58]];
        classes.extend((0..n).filter(|&m| m != 39 && m != 58).map(|m| vec![m]));
        let rel = Relation::partition_from_classes(n, classes).to_dense().unwrap();
        let fam = RelationFamily::new(u, vec![(Agent::new("a"), rel)], "bad_d").unwrap();
        let failed = check_modal_relation(&fam).unwrap().failed_for(&Agent::new("a"));
        assert_eq!(failed, [Condition::CondD].into());
    }

    #[test]
    fn partition_and_dense_checkers_agree() {
        let u = universe(&["p", "q"], 1);
        let n = u.base_count();
        let cons = consistency_vector(&u);
        // two_block as a partition.
        let cons_ids: Vec<BaseId> = (0..n).filter(|&m| bit_get(&cons, m)).collect();
        let incon_ids: Vec<BaseId> = (0..n).filter(|&m| !bit_get(&cons, m)).collect();
        let part = Relation::partition_from_classes(n, vec![cons_ids, incon_ids]);
        let dense = part.to_dense().unwrap();
        let part_checks = check_relation(&u, &part, &cons).unwrap();
        let dense_checks = check_relation(&u, &dense, &cons).unwrap();
        for (p, d) in part_checks.iter().zip(&dense_checks) {
            assert_eq!(p.condition, d.condition);
            assert_eq!(p.ok, d.ok, "{:?}", p.condition);
            assert!(p.ok);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_always_passes() {
        let u = universe(&["p", "q"], 1);
        let ags = agents(&["a"]);
        let (fams1, stats1) = sample_families(&u, &ags, 3, 7).unwrap();
        let (fams2, stats2) = sample_families(&u, &ags, 3, 7).unwrap();
        assert_eq!(fams1, fams2);
        assert_eq!(stats1, stats2);
        for fam in &fams1 {
            assert!(check_modal_relation(fam).unwrap().passed());
        }
        let (none, stats) = sample_families(&u, &ags, 0, 7).unwrap();
        assert!(none.is_empty());
        assert!(!stats.exhausted);
    }

    #[test]
    fn enumeration_on_the_single_atom_universe() {
        let u = universe(&["p"], 1);
        let fams = enumerate_families(&u, &agents(&["a"])).unwrap();
        // Bases: 0 and 2 consistent, 1 and 3 inconsistent. Valid families
        // are equivalences with consistency-pure classes; both sides may be
        // split or merged, giving exactly four.
        assert_eq!(fams.len(), 4);
        let identity = identity_family(&u, &agents(&["a"]));
        assert!(fams.iter().any(|f| f.relation_for(&Agent::new("a")).unwrap()
            == identity.relation_for(&Agent::new("a")).unwrap()));
        for fam in &fams {
            assert!(check_modal_relation(fam).unwrap().passed());
            assert!(is_reflexive(fam.relation_for(&Agent::new("a")).unwrap()));
        }
        let too_big = universe(&["p", "q"], 0);
        assert!(enumerate_families(&too_big, &agents(&["a", "b"])).is_err());
    }

    #[test]
    fn relation_files_round_trip_pairs_and_classes() {
        let u = universe(&["p"], 1);
        let ags = agents(&["a", "b"]);
        let fam = two_block_family(&u, &ags);
        let text = format_relation_file(&fam);
        let loaded = parse_relation_file(&text, &u).unwrap();
        for agent in &ags {
            assert_eq!(
                loaded.relation_for(agent).unwrap(),
                fam.relation_for(agent).unwrap()
            );
        }
        let classy = "agent: a\nclass: 0 2\nclass: 1 3\n";
        let loaded = parse_relation_file(classy, &u).unwrap();
        let rel = loaded.relation_for(&Agent::new("a")).unwrap();
        assert!(rel.related(0, 2) && rel.related(2, 0) && rel.related(1, 3));
        assert!(!rel.related(0, 1));
        assert!(parse_relation_file("0 1\n", &u).is_err());
        assert!(parse_relation_file("agent: a\n9 9\n", &u).is_err());
    }
}
