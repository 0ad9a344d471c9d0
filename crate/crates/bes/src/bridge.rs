//! Replays a Kripke countermodel inside base-extension semantics.
//!
//! Pipeline: disambiguate the model with one fresh atom per world, build a
//! rule universe over the enlarged vocabulary, give every world a dedicated
//! maximally consistent base that stays silent on its own fresh atom, turn
//! each accessibility relation into an equivalence over all bases, and check
//! that both readings agree on every subformula at every world.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::base::{
    extend_preserving, format_rule_file, is_maximally_consistent, Alphabet, BaseId, RuleUniverse,
    UniverseError,
};
use crate::eval::{EvalError, Evaluator};
use crate::formula::{fresh_atoms, subformulas, Agent, Atom, Formula};
use crate::kripke::{
    check_frame, format_model_file, kripke_countermodel_search, Countermodel, KripkeError,
    KripkeModel,
};
use crate::relation::{
    check_modal_relation, ModalRelationReport, Relation, RelationError, RelationFamily,
};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("agent {0} is not an equivalence on the model")]
    NotS5(Agent),
    #[error("formula atom {0} does not occur in the model valuation")]
    AtomNotInModel(Atom),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no base for world {world}: {reason}")]
    WorldBase { world: String, reason: String },
    #[error("relation construction failed for agent {agent}: {reason}")]
    RelationConstruction { agent: Agent, reason: String },
}

/// Adds one fresh atom per world, true everywhere except at its own world.
/// The fresh atoms separate worlds that the original valuation cannot tell
/// apart; original atoms keep their truth values, so formulas over the
/// original vocabulary evaluate unchanged. Requires every agent relation to
/// be an equivalence.
pub fn disambiguate_model(m: &KripkeModel) -> Result<(KripkeModel, Vec<Atom>), BridgeError> {
    let frame = check_frame(m);
    for report in &frame.agents {
        if !report.is_s5() {
            return Err(BridgeError::NotS5(report.agent.clone()));
        }
    }
    let n = m.worlds().len();
    let avoid: BTreeSet<Atom> = m.atoms().cloned().collect();
    let fresh = fresh_atoms(n, &avoid);

    let worlds = m.worlds().to_vec();
    let mut relations: BTreeMap<Agent, Vec<(String, String)>> = BTreeMap::new();
    for agent in m.agents() {
        let mut pairs = Vec::new();
        for w in 0..n {
            let mask = m.successor_mask(agent, w).expect("agent is known");
            for v in 0..n {
                if mask & (1 << v) != 0 {
                    pairs.push((worlds[w].clone(), worlds[v].clone()));
                }
            }
        }
        relations.insert(agent.clone(), pairs);
    }
    let mut valuation: BTreeMap<Atom, Vec<String>> = BTreeMap::new();
    for atom in m.atoms() {
        let mask = m.atom_mask(atom);
        let held: Vec<String> =
            (0..n).filter(|&w| mask & (1 << w) != 0).map(|w| worlds[w].clone()).collect();
        valuation.insert(atom.clone(), held);
    }
    for (w, q) in fresh.iter().enumerate() {
        let others: Vec<String> =
            (0..n).filter(|&v| v != w).map(|v| worlds[v].clone()).collect();
        valuation.insert(q.clone(), others);
    }
    let prime = KripkeModel::new(worlds, relations, valuation)?;
    Ok((prime, fresh))
}

/// The world's axioms plus a two-way tie between its own fresh atom and every
/// atom false there: axioms `=> x` for each true atom, and `x => q_w`,
/// `q_w => x` for each false atom (including `q_w => q_w` itself). Any base
/// extension that derives one false atom derives them all, so the fresh atom
/// tracks "this base has left world w".
pub fn build_seed_base(
    u: &RuleUniverse,
    m_prime: &KripkeModel,
    world: usize,
    q_w: &Atom,
) -> BaseId {
    let alphabet = u.alphabet();
    let q_idx = alphabet.index_of(q_w).expect("fresh atom is in the alphabet") as u8;
    let mut mask: BaseId = 0;
    let mut add = |premises: u32, conclusion: u8| {
        let i = u
            .rule_index(premises, conclusion)
            .expect("premise cap of at least one admits these rules");
        mask |= 1 << i;
    };
    for (i, atom) in alphabet.atoms().iter().enumerate() {
        if m_prime.atom_true_at(atom, world) {
            add(0, i as u8);
        } else {
            add(1 << i, q_idx);
            add(1 << q_idx, i as u8);
        }
    }
    mask
}

/// Direct form of the maximally consistent bases: one per proper subset `s`
/// of the alphabet, keeping exactly the rules that cannot push the closure
/// outside `s`.
fn max_consistent_candidates(u: &RuleUniverse) -> Vec<BaseId> {
    let full = u.alphabet().full_set();
    let mut out = Vec::new();
    for s in 0..full {
        let mut mask: BaseId = 0;
        for (i, rule) in u.rules().iter().enumerate() {
            let escapes = rule.premises & !s == 0 && s & (1 << rule.conclusion) == 0;
            if !escapes {
                mask |= 1 << i;
            }
        }
        debug_assert!(is_maximally_consistent(&u.base(mask)));
        out.push(mask);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Grows the seed into a maximally consistent base whose closure still
/// avoids `q_w`. Greedy extension is checked afterwards; if it falls short,
/// the maximal bases are scanned directly.
pub fn build_world_base(
    u: &RuleUniverse,
    seed: BaseId,
    q_w: &Atom,
    world_name: &str,
) -> Result<BaseId, BridgeError> {
    let q_idx = u.alphabet().index_of(q_w).expect("fresh atom is in the alphabet");
    let q_bit = 1u32 << q_idx;
    let silent = |mask: BaseId| u.closure_mask(mask) & q_bit == 0;
    if !silent(seed) {
        return Err(BridgeError::WorldBase {
            world: world_name.to_string(),
            reason: format!("the seed base already derives {q_w}"),
        });
    }
    let grown = extend_preserving(u.base(seed), |b| silent(b.mask)).mask;
    if is_maximally_consistent(&u.base(grown)) {
        return Ok(grown);
    }
    max_consistent_candidates(u)
        .into_iter()
        .find(|&m| m & seed == seed && silent(m))
        .ok_or_else(|| BridgeError::WorldBase {
            world: world_name.to_string(),
            reason: format!("no maximally consistent extension avoids {q_w}"),
        })
}

/// Builds one equivalence per agent over all bases of the universe.
///
/// Seed classes group bases by how their maximal extensions sit over the
/// model: the inconsistent bases form one class; a consistent base is keyed
/// by the set of agent-classes of worlds whose bases extend it, and by
/// whether it also has a maximal extension that is no world base. The seed is
/// then refined until each class is uniform in which classes its members see
/// through consistent supersets and through subsets; those two signatures are
/// exactly what the condition checker demands of an equivalence. Finally the
/// world bases must land in classes mirroring the model relation.
pub fn build_relation_family(
    u: &RuleUniverse,
    m_prime: &KripkeModel,
    world_bases: &[BaseId],
    name: impl Into<String>,
) -> Result<RelationFamily, BridgeError> {
    let n = u.base_count();
    let r = u.rule_count();
    let consistent: Vec<bool> = (0..n).map(|m| !u.is_inconsistent_mask(m)).collect();
    let max_ids = max_consistent_candidates(u);
    let world_set: BTreeSet<BaseId> = world_bases.iter().copied().collect();

    // Per base: which world bases extend it, and whether some non-world
    // maximal base does. Shared by all agents.
    let n_worlds = world_bases.len();
    let mut world_sups: Vec<u32> = vec![0; n as usize];
    let mut has_free_sup: Vec<bool> = vec![false; n as usize];
    for m in 0..n {
        if !consistent[m as usize] {
            continue;
        }
        let mut ws = 0u32;
        for (w, &b) in world_bases.iter().enumerate() {
            if m & !b == 0 {
                ws |= 1 << w;
            }
        }
        world_sups[m as usize] = ws;
        has_free_sup[m as usize] =
            max_ids.iter().any(|&d| m & !d == 0 && !world_set.contains(&d));
    }

    let mut entries = Vec::new();
    for agent in m_prime.agents() {
        // Representative world (minimum index) of each agent class.
        let rep: Vec<u32> = (0..n_worlds)
            .map(|w| {
                let mask = m_prime.successor_mask(agent, w).expect("agent is known");
                mask.trailing_zeros()
            })
            .collect();

        // Seed key: 0 = inconsistent; otherwise tagged by the agent classes
        // hit by world extensions and by the free-extension flag.
        let mut key_ids: HashMap<(bool, u32, bool), u32> = HashMap::new();
        let mut class_of: Vec<u32> = Vec::with_capacity(n as usize);
        let mut next = 0u32;
        for m in 0..n {
            let key = if !consistent[m as usize] {
                (false, 0, false)
            } else {
                let mut clset = 0u32;
                let mut ws = world_sups[m as usize];
                while ws != 0 {
                    let w = ws.trailing_zeros() as usize;
                    ws &= ws - 1;
                    clset |= 1 << rep[w];
                }
                (true, clset, has_free_sup[m as usize])
            };
            let id = *key_ids.entry(key).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            class_of.push(id);
        }
        let mut count = next;

        // Refine by (own class, classes over consistent supersets, classes
        // over subsets) until stable. Subsets of a consistent base are
        // consistent, so the down signature needs no consistency filter.
        loop {
            if count > 64 {
                return Err(BridgeError::RelationConstruction {
                    agent: agent.clone(),
                    reason: format!("refinement exceeded 64 classes ({count})"),
                });
            }
            let mut up = vec![0u64; n as usize];
            for m in (0..n).rev() {
                let mut s = if consistent[m as usize] { 1u64 << class_of[m as usize] } else { 0 };
                for i in 0..r {
                    if m & (1 << i) == 0 {
                        s |= up[(m | (1 << i)) as usize];
                    }
                }
                up[m as usize] = s;
            }
            let mut down = vec![0u64; n as usize];
            for m in 0..n {
                let mut s = 1u64 << class_of[m as usize];
                for i in 0..r {
                    if m & (1 << i) != 0 {
                        s |= down[(m & !(1u64 << i)) as usize];
                    }
                }
                down[m as usize] = s;
            }
            let mut new_ids: HashMap<(u32, u64, u64), u32> = HashMap::new();
            let mut new_class: Vec<u32> = Vec::with_capacity(n as usize);
            let mut new_next = 0u32;
            for m in 0..n {
                let key = if consistent[m as usize] {
                    (class_of[m as usize], up[m as usize], down[m as usize])
                } else {
                    (class_of[m as usize], 0, 0)
                };
                let id = *new_ids.entry(key).or_insert_with(|| {
                    let id = new_next;
                    new_next += 1;
                    id
                });
                new_class.push(id);
            }
            class_of = new_class;
            if new_next == count {
                break;
            }
            count = new_next;
        }

        // The model relation must survive: world bases share a class exactly
        // when their worlds are related.
        for w in 0..n_worlds {
            for v in 0..n_worlds {
                let related = m_prime.related(agent, w, v);
                let same =
                    class_of[world_bases[w] as usize] == class_of[world_bases[v] as usize];
                if related != same {
                    return Err(BridgeError::RelationConstruction {
                        agent: agent.clone(),
                        reason: format!(
                            "worlds {} and {} are {} in the model but their bases {} classes",
                            m_prime.worlds()[w],
                            m_prime.worlds()[v],
                            if related { "related" } else { "unrelated" },
                            if same { "share" } else { "split" },
                        ),
                    });
                }
            }
        }

        let mut classes: Vec<Vec<BaseId>> = vec![Vec::new(); count as usize];
        for m in 0..n {
            classes[class_of[m as usize] as usize].push(m);
        }
        entries.push((agent.clone(), Relation::partition_from_classes(n, classes)));
    }
    Ok(RelationFamily::new(u.clone(), entries, name)?)
}

/// Everything the construction produced for one model.
pub struct Bridge {
    pub model: KripkeModel,
    pub disambiguated: KripkeModel,
    pub fresh: Vec<Atom>,
    pub seeds: Vec<BaseId>,
    pub world_bases: Vec<BaseId>,
    pub family: RelationFamily,
}

impl Bridge {
    pub fn universe(&self) -> &RuleUniverse {
        self.family.universe()
    }

    /// Base of the named world.
    pub fn base_for(&self, world: &str) -> Option<BaseId> {
        let i = self.model.world_index(world)?;
        Some(self.world_bases[i])
    }
}

/// Runs the construction on an S5 model: disambiguation, one rule universe
/// over all atoms with the given premise cap, one base per world, one
/// equivalence per agent.
pub fn build_bridge(model: &KripkeModel, premise_cap: usize) -> Result<Bridge, BridgeError> {
    let (prime, fresh) = disambiguate_model(model)?;
    let atoms: Vec<Atom> = prime.atoms().cloned().collect();
    let universe = RuleUniverse::new(Alphabet::new(atoms)?, premise_cap)?;
    let n_worlds = prime.worlds().len();
    let mut seeds = Vec::with_capacity(n_worlds);
    let mut world_bases = Vec::with_capacity(n_worlds);
    for w in 0..n_worlds {
        let seed = build_seed_base(&universe, &prime, w, &fresh[w]);
        let base = build_world_base(&universe, seed, &fresh[w], &prime.worlds()[w])?;
        seeds.push(seed);
        world_bases.push(base);
    }
    let family = build_relation_family(&universe, &prime, &world_bases, "bridge")?;
    Ok(Bridge {
        model: model.clone(),
        disambiguated: prime,
        fresh,
        seeds,
        world_bases,
        family,
    })
}

/// One subformula at one world, read both ways.
#[derive(Debug, Clone)]
pub struct CorrespondenceCell {
    pub formula: Formula,
    pub world: String,
    pub kripke: bool,
    pub bes: bool,
}

pub struct BridgeReport {
    pub relation: ModalRelationReport,
    pub cells: Vec<CorrespondenceCell>,
}

impl BridgeReport {
    pub fn mismatches(&self) -> Vec<&CorrespondenceCell> {
        self.cells.iter().filter(|c| c.kripke != c.bes).collect()
    }

    pub fn passed(&self) -> bool {
        self.relation.passed() && self.mismatches().is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.relation.render());
        let mismatches = self.mismatches();
        let _ = writeln!(
            out,
            "correspondence: {}/{} subformula-world pairs agree",
            self.cells.len() - mismatches.len(),
            self.cells.len()
        );
        for c in &mismatches {
            let _ = writeln!(
                out,
                "  mismatch at {}: `{}` is {} in the model but {} at its base",
                c.world, c.formula, c.kripke, c.bes
            );
        }
        out
    }
}

impl Bridge {
    /// Condition check on the constructed relations, then the full
    /// subformula-by-world comparison for `phi`.
    pub fn verify(&self, phi: &Formula) -> Result<BridgeReport, BridgeError> {
        let relation = check_modal_relation(&self.family)?;
        let mut eval = Evaluator::new(&self.family);
        let mut cells = Vec::new();
        for psi in subformulas(phi) {
            for (w, name) in self.disambiguated.worlds().iter().enumerate() {
                let kripke = self.disambiguated.eval_at(w, &psi)?;
                let bes = eval.holds(&psi, self.world_bases[w])?;
                cells.push(CorrespondenceCell {
                    formula: psi.clone(),
                    world: name.clone(),
                    kripke,
                    bes,
                });
            }
        }
        Ok(BridgeReport { relation, cells })
    }
}

/// A refutation carried over: the countermodel, the construction, and the
/// verification on the refuted formula.
pub struct BridgeResult {
    pub countermodel: Countermodel,
    pub bridge: Bridge,
    pub report: BridgeReport,
}

pub struct BridgeOutcome {
    pub formula: Formula,
    pub searched_up_to: usize,
    pub result: Option<BridgeResult>,
}

impl BridgeOutcome {
    /// World and base where the formula fails, once verification passed.
    pub fn refuting_base(&self) -> Option<(&str, BaseId)> {
        let r = self.result.as_ref()?;
        if !r.report.passed() {
            return None;
        }
        let base = r.bridge.base_for(&r.countermodel.world)?;
        Some((r.countermodel.world.as_str(), base))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        match &self.result {
            None => {
                let _ = writeln!(
                    out,
                    "no countermodel for `{}` up to {} worlds",
                    self.formula, self.searched_up_to
                );
            }
            Some(r) => {
                let _ = writeln!(
                    out,
                    "countermodel for `{}`: {} worlds, refuted at {}",
                    self.formula,
                    r.countermodel.model.worlds().len(),
                    r.countermodel.world
                );
                out.push_str(&r.report.render());
                match self.refuting_base() {
                    Some((world, base)) => {
                        let _ = writeln!(out, "counter-base: world {world}, base {base}");
                    }
                    None => {
                        let _ = writeln!(out, "verification failed; no counter-base delivered");
                    }
                }
            }
        }
        out
    }
}

/// Full pipeline from a formula: search for a Kripke countermodel, and if one
/// exists, rebuild it as a base with verified agreement.
pub fn countermodel_to_counterbase(
    phi: &Formula,
    agents: &[Agent],
    max_worlds: usize,
    premise_cap: usize,
) -> Result<BridgeOutcome, BridgeError> {
    let found = kripke_countermodel_search(phi, agents, max_worlds)?;
    let result = match found {
        None => None,
        Some(countermodel) => {
            let bridge = build_bridge(&countermodel.model, premise_cap)?;
            for atom in crate::formula::atoms_of(phi) {
                if bridge.universe().alphabet().index_of(&atom).is_none() {
                    return Err(BridgeError::AtomNotInModel(atom));
                }
            }
            let report = bridge.verify(phi)?;
            Some(BridgeResult { countermodel, bridge, report })
        }
    };
    Ok(BridgeOutcome { formula: phi.clone(), searched_up_to: max_worlds, result })
}

/// Writes the construction to a directory: both models, the rule universe,
/// one base file per world, the relations, and the verification report.
pub fn write_artifacts(
    dir: &Path,
    bridge: &Bridge,
    report: &BridgeReport,
    phi: &Formula,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("model.orig"), format_model_file(&bridge.model))?;
    fs::write(dir.join("model.prime"), format_model_file(&bridge.disambiguated))?;
    let u = bridge.universe();
    fs::write(dir.join("universe.rules"), format_rule_file(u, u.full_base()))?;
    for (w, name) in bridge.model.worlds().iter().enumerate() {
        fs::write(
            dir.join(format!("base_{name}.rules")),
            format_rule_file(u, bridge.world_bases[w]),
        )?;
    }
    fs::write(dir.join("relations.txt"), crate::relation::format_relation_file(&bridge.family))?;
    let mut text = String::new();
    let _ = writeln!(text, "formula: {phi}");
    let _ = writeln!(text, "worlds: {}", bridge.model.worlds().join(" "));
    for (w, name) in bridge.model.worlds().iter().enumerate() {
        let _ = writeln!(
            text,
            "world {name}: fresh atom {}, seed base {}, world base {} (see base_{name}.rules)",
            bridge.fresh[w], bridge.seeds[w], bridge.world_bases[w]
        );
    }
    text.push_str(&report.render());
    text.push('\n');
    text.push_str(concat!(
        "reading notes:\n",
        "- model.prime extends model.orig with one fresh atom per world,\n",
        "  true everywhere except at that world\n",
        "- universe.rules lists every rule; base files list the subset a\n",
        "  world base keeps, identified by the same atoms and premise cap\n",
        "- relations.txt gives each agent's equivalence over base ids,\n",
        "  one `class:` line per block\n",
    ));
    fs::write(dir.join("report.txt"), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::closure;
    use crate::formula::parse_formula;
    use crate::relation::maximally_consistent_ids;

    fn two_world_universal() -> KripkeModel {
        let worlds = vec!["w0".to_string(), "w1".to_string()];
        let mut relations = BTreeMap::new();
        relations.insert(
            Agent::new("a"),
            vec![
                ("w0".into(), "w0".into()),
                ("w0".into(), "w1".into()),
                ("w1".into(), "w0".into()),
                ("w1".into(), "w1".into()),
            ],
        );
        let mut valuation = BTreeMap::new();
        valuation.insert(Atom::new("p"), vec!["w0".to_string()]);
        KripkeModel::new(worlds, relations, valuation).unwrap()
    }

    fn two_world_two_agents() -> KripkeModel {
        let worlds = vec!["w0".to_string(), "w1".to_string()];
        let mut relations = BTreeMap::new();
        relations.insert(
            Agent::new("a"),
            vec![("w0".into(), "w0".into()), ("w1".into(), "w1".into())],
        );
        relations.insert(
            Agent::new("b"),
            vec![
                ("w0".into(), "w0".into()),
                ("w0".into(), "w1".into()),
                ("w1".into(), "w0".into()),
                ("w1".into(), "w1".into()),
            ],
        );
        let mut valuation = BTreeMap::new();
        valuation.insert(Atom::new("p"), vec!["w0".to_string()]);
        KripkeModel::new(worlds, relations, valuation).unwrap()
    }

    #[test]
    fn disambiguation_adds_co_world_atoms_and_preserves_evaluation() {
        let m = two_world_universal();
        let (prime, fresh) = disambiguate_model(&m).unwrap();
        assert_eq!(fresh, vec![Atom::new("q0"), Atom::new("q1")]);
        assert_eq!(prime.atom_mask(&Atom::new("q0")), 0b10);
        assert_eq!(prime.atom_mask(&Atom::new("q1")), 0b01);
        assert_eq!(prime.atom_mask(&Atom::new("p")), 0b01);
        for text in ["p", "[a]p", "p -> [a]p", "~p"] {
            let phi = parse_formula(text).unwrap();
            for w in 0..2 {
                assert_eq!(m.eval_at(w, &phi).unwrap(), prime.eval_at(w, &phi).unwrap());
            }
        }
    }

    #[test]
    fn non_equivalence_models_are_rejected() {
        let worlds = vec!["w0".to_string(), "w1".to_string()];
        let mut relations = BTreeMap::new();
        relations.insert(
            Agent::new("a"),
            vec![
                ("w0".into(), "w0".into()),
                ("w0".into(), "w1".into()),
                ("w1".into(), "w1".into()),
            ],
        );
        let m = KripkeModel::new(worlds, relations, BTreeMap::new()).unwrap();
        assert!(matches!(disambiguate_model(&m), Err(BridgeError::NotS5(_))));
    }

    #[test]
    fn frozen_seed_and_world_bases_on_the_two_world_model() {
        let m = two_world_universal();
        let bridge = build_bridge(&m, 1).unwrap();
        let u = bridge.universe();
        assert_eq!(
            u.alphabet().atoms(),
            &[Atom::new("p"), Atom::new("q0"), Atom::new("q1")]
        );
        assert_eq!(u.rule_count(), 12);
        assert_eq!(bridge.seeds, vec![321, 2584]);
        assert_eq!(bridge.world_bases, vec![3919, 2810]);
        for (w, &b) in bridge.world_bases.iter().enumerate() {
            assert!(is_maximally_consistent(&u.base(b)));
            assert_eq!(bridge.seeds[w] & !b, 0, "seed inside base");
            let q = &bridge.fresh[w];
            assert!(!closure(&u.base(b)).contains(q), "base derives its own fresh atom");
        }
    }

    #[test]
    fn direct_maximal_bases_match_the_enumeration() {
        let atoms = vec![Atom::new("p"), Atom::new("q0"), Atom::new("q1")];
        let u = RuleUniverse::new(Alphabet::new(atoms).unwrap(), 1).unwrap();
        assert_eq!(max_consistent_candidates(&u), maximally_consistent_ids(&u));
    }

    #[test]
    fn constructed_relations_pass_the_condition_checker() {
        let m = two_world_universal();
        let bridge = build_bridge(&m, 1).unwrap();
        let report = check_modal_relation(&bridge.family).unwrap();
        assert!(report.passed(), "{}", report.render());
        // Universal agent: both world bases share a class.
        let rel = bridge.family.relation_for(&Agent::new("a")).unwrap();
        assert!(rel.related(3919, 2810));
    }

    #[test]
    fn world_base_classes_mirror_the_model_relation() {
        let m = two_world_two_agents();
        let bridge = build_bridge(&m, 1).unwrap();
        let ra = bridge.family.relation_for(&Agent::new("a")).unwrap();
        let rb = bridge.family.relation_for(&Agent::new("b")).unwrap();
        let [b0, b1] = [bridge.world_bases[0], bridge.world_bases[1]];
        assert!(!ra.related(b0, b1), "identity agent must split the world bases");
        assert!(rb.related(b0, b1), "universal agent must join the world bases");
    }

    #[test]
    fn correspondence_holds_on_the_single_agent_fixture() {
        let m = two_world_universal();
        let bridge = build_bridge(&m, 1).unwrap();
        let phi = parse_formula("[a]p").unwrap();
        let report = bridge.verify(&phi).unwrap();
        assert!(report.passed(), "{}", report.render());
        // The fixture refutes [a]p at both worlds; the bases agree.
        let mut eval = Evaluator::new(&bridge.family);
        assert!(!eval.holds(&phi, bridge.world_bases[0]).unwrap());
        assert!(eval.holds(&parse_formula("p").unwrap(), bridge.world_bases[0]).unwrap());
        assert!(!eval.holds(&parse_formula("p").unwrap(), bridge.world_bases[1]).unwrap());
    }

    #[test]
    fn the_full_pipeline_delivers_a_counterbase_for_the_two_agent_formula() {
        let phi = parse_formula("[a]p -> [b]p").unwrap();
        let agents = vec![Agent::new("a"), Agent::new("b")];
        let outcome = countermodel_to_counterbase(&phi, &agents, 3, 1).unwrap();
        let result = outcome.result.as_ref().expect("the formula is not valid");
        assert_eq!(result.countermodel.model.worlds().len(), 2);
        assert!(result.report.passed(), "{}", result.report.render());
        let (world, base) = outcome.refuting_base().expect("verification passed");
        assert_eq!(world, "w0");
        let mut eval = Evaluator::new(&result.bridge.family);
        assert!(!eval.holds(&phi, base).unwrap());
    }

    #[test]
    fn valid_formulas_come_back_without_a_countermodel() {
        let phi = parse_formula("[a]p -> p").unwrap();
        let agents = vec![Agent::new("a")];
        let outcome = countermodel_to_counterbase(&phi, &agents, 3, 1).unwrap();
        assert!(outcome.result.is_none());
        assert!(outcome.refuting_base().is_none());
        assert!(outcome.render().contains("no countermodel"));
    }

    #[test]
    fn artifacts_round_trip_through_their_own_parsers() {
        let m = two_world_universal();
        let bridge = build_bridge(&m, 1).unwrap();
        let phi = parse_formula("[a]p").unwrap();
        let report = bridge.verify(&phi).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_artifacts(dir.path(), &bridge, &report, &phi).unwrap();

        let orig = crate::kripke::parse_model_file(
            &fs::read_to_string(dir.path().join("model.orig")).unwrap(),
        )
        .unwrap();
        assert_eq!(orig.atom_mask(&Atom::new("p")), m.atom_mask(&Atom::new("p")));
        let base0 = crate::base::parse_rule_file(
            &fs::read_to_string(dir.path().join("base_w0.rules")).unwrap(),
        )
        .unwrap();
        assert_eq!(base0.base_mask, 3919);
        let relations = crate::relation::parse_relation_file(
            &fs::read_to_string(dir.path().join("relations.txt")).unwrap(),
            bridge.universe(),
        )
        .unwrap();
        let parsed = relations.relation_for(&Agent::new("a")).unwrap();
        let built = bridge.family.relation_for(&Agent::new("a")).unwrap();
        assert_eq!(parsed.pairs(), built.pairs());
        assert!(fs::read_to_string(dir.path().join("report.txt"))
            .unwrap()
            .contains("correspondence"));
    }
}
