//! Finite Kripke models, frame checking, and bounded countermodel search.
//!
//! Models keep one successor bitmask per world per agent and one world
//! bitmask per atom. The search generator enumerates S5 models directly:
//! per-agent equivalence relations are set partitions of the world set, so
//! candidates are partition tuples crossed with valuations, in a fixed
//! order that parallel search must preserve.

use std::collections::BTreeMap;

use rayon::iter::{IntoParallelIterator, ParallelIterator};
use thiserror::Error;

use crate::formula::{Agent, Atom, Formula};

pub const MAX_WORLDS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KripkeError {
    #[error("world `{0}` is not in the model")]
    UnknownWorld(String),
    #[error("agent `{0}` has no relation in the model")]
    UnknownAgent(String),
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("models are capped at {MAX_WORLDS} worlds, got {0}")]
    TooManyWorlds(usize),
    #[error("model needs at least one world")]
    NoWorlds,
    #[error("line {line}: {message}")]
    File { line: usize, message: String },
}

/// A pointed finite model: named worlds, one relation per agent, and a
/// valuation that defaults every unlisted atom to false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    worlds: Vec<String>,
    relations: BTreeMap<Agent, Vec<u32>>,
    valuation: BTreeMap<Atom, u32>,
}

impl KripkeModel {
    pub fn new(
        worlds: Vec<String>,
        relations: BTreeMap<Agent, Vec<(String, String)>>,
        valuation: BTreeMap<Atom, Vec<String>>,
    ) -> Result<KripkeModel, KripkeError> {
        if worlds.is_empty() {
            return Err(KripkeError::NoWorlds);
        }
        if worlds.len() > MAX_WORLDS {
            return Err(KripkeError::TooManyWorlds(worlds.len()));
        }
        for (i, w) in worlds.iter().enumerate() {
            if worlds[..i].contains(w) {
                return Err(KripkeError::DuplicateWorld(w.clone()));
            }
        }
        let index = |name: &str| -> Result<usize, KripkeError> {
            worlds
                .iter()
                .position(|w| w == name)
                .ok_or_else(|| KripkeError::UnknownWorld(name.to_string()))
        };
        let mut rel = BTreeMap::new();
        for (agent, pairs) in relations {
            let mut masks = vec![0u32; worlds.len()];
            for (x, y) in pairs {
                masks[index(&x)?] |= 1 << index(&y)?;
            }
            rel.insert(agent, masks);
        }
        let mut val = BTreeMap::new();
        for (atom, names) in valuation {
            let mut mask = 0u32;
            for name in names {
                mask |= 1 << index(&name)?;
            }
            val.insert(atom, mask);
        }
        Ok(KripkeModel { worlds, relations: rel, valuation: val })
    }

    fn from_masks(
        n: usize,
        relations: BTreeMap<Agent, Vec<u32>>,
        valuation: BTreeMap<Atom, u32>,
    ) -> KripkeModel {
        let worlds = (0..n).map(|i| format!("w{i}")).collect();
        KripkeModel { worlds, relations, valuation }
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.relations.keys()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.valuation.keys()
    }

    pub fn successor_mask(&self, agent: &Agent, world: usize) -> Option<u32> {
        self.relations.get(agent).map(|m| m[world])
    }

    pub fn atom_mask(&self, atom: &Atom) -> u32 {
        self.valuation.get(atom).copied().unwrap_or(0)
    }

    pub fn related(&self, agent: &Agent, x: usize, y: usize) -> bool {
        self.successor_mask(agent, x).is_some_and(|m| m >> y & 1 == 1)
    }

    pub fn atom_true_at(&self, atom: &Atom, world: usize) -> bool {
        self.atom_mask(atom) >> world & 1 == 1
    }

    pub fn eval_at(&self, world: usize, phi: &Formula) -> Result<bool, KripkeError> {
        match phi {
            Formula::AtomF(a) => Ok(self.atom_true_at(a, world)),
            Formula::Bottom => Ok(false),
            Formula::Implies(x, y) => Ok(!self.eval_at(world, x)? || self.eval_at(world, y)?),
            Formula::Know(agent, x) => {
                let mask = self
                    .successor_mask(agent, world)
                    .ok_or_else(|| KripkeError::UnknownAgent(agent.0.clone()))?;
                for v in 0..self.worlds.len() {
                    if mask >> v & 1 == 1 && !self.eval_at(v, x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// Truth at a named world, with `~phi` handled as `phi -> bot`.
pub fn kripke_eval(m: &KripkeModel, world: &str, phi: &Formula) -> Result<bool, KripkeError> {
    let w = m
        .world_index(world)
        .ok_or_else(|| KripkeError::UnknownWorld(world.to_string()))?;
    m.eval_at(w, phi)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAgentReport {
    pub agent: Agent,
    pub reflexive: bool,
    pub transitive: bool,
    pub euclidean: bool,
}

impl FrameAgentReport {
    pub fn is_s5(&self) -> bool {
        self.reflexive && self.transitive && self.euclidean
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameReport {
    pub agents: Vec<FrameAgentReport>,
}

impl FrameReport {
    pub fn is_s5(&self) -> bool {
        self.agents.iter().all(|a| a.is_s5())
    }
}

/// Per-agent frame properties of the model's relations.
pub fn check_frame(m: &KripkeModel) -> FrameReport {
    let n = m.worlds().len();
    let mut agents = Vec::new();
    for (agent, masks) in &m.relations {
        let reflexive = (0..n).all(|w| masks[w] >> w & 1 == 1);
        let transitive =
            (0..n).all(|w| (0..n).all(|v| masks[w] >> v & 1 == 0 || masks[v] & !masks[w] == 0));
        let euclidean =
            (0..n).all(|w| (0..n).all(|v| masks[w] >> v & 1 == 0 || masks[w] & !masks[v] == 0));
        agents.push(FrameAgentReport { agent: agent.clone(), reflexive, transitive, euclidean });
    }
    FrameReport { agents }
}

/// Restricted growth strings of length `n` in lexicographic order; each is a
/// set partition of `0..n`, so the block-of-`0` universal partition comes
/// first and the identity partition last.
pub fn enumerate_partitions(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut rgs = vec![0u8; n];
    loop {
        out.push(rgs.clone());
        // Next string: increment the rightmost position that can grow.
        let mut i = n;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for v in rgs[i + 1..].iter_mut() {
                    *v = 0;
                }
                break;
            }
        }
    }
}

fn partition_masks(rgs: &[u8]) -> Vec<u32> {
    rgs.iter()
        .map(|&c| {
            let mut mask = 0u32;
            for (w, &d) in rgs.iter().enumerate() {
                if d == c {
                    mask |= 1 << w;
                }
            }
            mask
        })
        .collect()
}

/// The S5 candidate space for a fixed world count: partition tuples crossed
/// with valuations. `build` is indexed so parallel search can preserve the
/// sequential order; the last agent and last atom vary fastest.
pub struct ModelSpace {
    n: usize,
    partitions: Vec<Vec<u8>>,
    agents: Vec<Agent>,
    atoms: Vec<Atom>,
}

impl ModelSpace {
    pub fn new(n: usize, agents: &[Agent], atoms: &[Atom]) -> ModelSpace {
        let mut agents = agents.to_vec();
        agents.sort();
        agents.dedup();
        let mut atoms = atoms.to_vec();
        atoms.sort();
        atoms.dedup();
        ModelSpace { n, partitions: enumerate_partitions(n), agents, atoms }
    }

    pub fn total(&self) -> u64 {
        let p = self.partitions.len() as u64;
        let v = 1u64 << self.n;
        p.pow(self.agents.len() as u32) * v.pow(self.atoms.len() as u32)
    }

    pub fn build(&self, index: u64) -> KripkeModel {
        let mut rest = index;
        let vspace = 1u64 << self.n;
        let mut val_digits = vec![0u32; self.atoms.len()];
        for d in val_digits.iter_mut().rev() {
            *d = (rest % vspace) as u32;
            rest /= vspace;
        }
        let pspace = self.partitions.len() as u64;
        let mut part_digits = vec![0usize; self.agents.len()];
        for d in part_digits.iter_mut().rev() {
            *d = (rest % pspace) as usize;
            rest /= pspace;
        }
        debug_assert_eq!(rest, 0);
        let relations: BTreeMap<Agent, Vec<u32>> = self
            .agents
            .iter()
            .zip(&part_digits)
            .map(|(a, &pi)| (a.clone(), partition_masks(&self.partitions[pi])))
            .collect();
        let valuation: BTreeMap<Atom, u32> =
            self.atoms.iter().cloned().zip(val_digits).collect();
        KripkeModel::from_masks(self.n, relations, valuation)
    }

    pub fn models(&self) -> impl Iterator<Item = KripkeModel> + '_ {
        (0..self.total()).map(|i| self.build(i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Countermodel {
    pub model: KripkeModel,
    pub world: String,
}

/// First S5 model and world refuting `phi`, scanning world counts from 1 to
/// `max_worlds` in the fixed candidate order. `None` means no countermodel
/// within the bound, never validity. Parallel callers get the same witness:
/// the scan takes the minimum candidate index.
pub fn kripke_countermodel_search(
    phi: &Formula,
    agents: &[Agent],
    max_worlds: usize,
) -> Result<Option<Countermodel>, KripkeError> {
    let needed = crate::formula::agents_of(phi);
    for a in &needed {
        if !agents.contains(a) {
            return Err(KripkeError::UnknownAgent(a.0.clone()));
        }
    }
    let atoms: Vec<Atom> = crate::formula::atoms_of(phi).into_iter().collect();
    for n in 1..=max_worlds.min(MAX_WORLDS) {
        let space = ModelSpace::new(n, agents, &atoms);
        let found = (0..space.total()).into_par_iter().find_map_first(|i| {
            let model = space.build(i);
            for w in 0..n {
                if !model.eval_at(w, phi).expect("search agents cover the formula") {
                    return Some(Countermodel { world: model.worlds()[w].clone(), model });
                }
            }
            None
        });
        if let Some(cm) = found {
            return Ok(Some(cm));
        }
    }
    Ok(None)
}

/// Renders the model file format, inverse to [`parse_model_file`].
pub fn format_model_file(m: &KripkeModel) -> String {
    let mut out = format!("worlds: {}\n", m.worlds.join(" "));
    for (agent, masks) in &m.relations {
        let mut pairs = Vec::new();
        for (x, mask) in masks.iter().enumerate() {
            for y in 0..m.worlds.len() {
                if mask >> y & 1 == 1 {
                    pairs.push(format!("{} {}", m.worlds[x], m.worlds[y]));
                }
            }
        }
        out.push_str(&format!("agent {}: {}\n", agent, pairs.join(", ")));
    }
    for (atom, mask) in &m.valuation {
        let names: Vec<&str> = (0..m.worlds.len())
            .filter(|&w| mask >> w & 1 == 1)
            .map(|w| m.worlds[w].as_str())
            .collect();
        out.push_str(&format!("val {}: {}\n", atom, names.join(" ")));
    }
    out
}

/// Parses `worlds: w v`, `agent a: w v, v w` (comma-separated pairs), and
/// `val p: w v` lines, with `#` comments.
pub fn parse_model_file(text: &str) -> Result<KripkeModel, KripkeError> {
    let file_err = |line: usize, message: &str| KripkeError::File {
        line,
        message: message.to_string(),
    };
    let mut worlds: Option<Vec<String>> = None;
    let mut relations: BTreeMap<Agent, Vec<(String, String)>> = BTreeMap::new();
    let mut valuation: BTreeMap<Atom, Vec<String>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("worlds:") {
            let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            if names.is_empty() {
                return Err(file_err(line_no, "empty worlds list"));
            }
            worlds = Some(names);
        } else if let Some(rest) = line.strip_prefix("agent") {
            let (name, pairs_text) = rest
                .split_once(':')
                .ok_or_else(|| file_err(line_no, "expected `agent a: pairs`"))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(file_err(line_no, "empty agent name"));
            }
            let pairs = relations.entry(Agent::new(name)).or_default();
            for chunk in pairs_text.split(',') {
                let toks: Vec<&str> = chunk.split_whitespace().collect();
                match toks.as_slice() {
                    [] => continue,
                    [x, y] => pairs.push((x.to_string(), y.to_string())),
                    _ => return Err(file_err(line_no, "each pair needs exactly two worlds")),
                }
            }
        } else if let Some(rest) = line.strip_prefix("val") {
            let (name, worlds_text) = rest
                .split_once(':')
                .ok_or_else(|| file_err(line_no, "expected `val p: worlds`"))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(file_err(line_no, "empty atom name"));
            }
            valuation
                .entry(Atom::new(name))
                .or_default()
                .extend(worlds_text.split_whitespace().map(str::to_string));
        } else {
            return Err(file_err(line_no, "expected `worlds:`, `agent`, or `val` line"));
        }
    }
    let worlds = worlds.ok_or_else(|| file_err(1, "missing `worlds:` line"))?;
    KripkeModel::new(worlds, relations, valuation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn model(text: &str) -> KripkeModel {
        parse_model_file(text).unwrap()
    }

    #[test]
    fn knowledge_at_a_single_reflexive_world() {
        let m = model("worlds: w\nagent a: w w\nval p: w\n");
        assert!(kripke_eval(&m, "w", &parse_formula("[a]p").unwrap()).unwrap());
        assert!(!kripke_eval(&m, "w", &parse_formula("[a]~p").unwrap()).unwrap());
    }

    #[test]
    fn universal_relation_with_one_p_world() {
        let m = model("worlds: w v\nagent a: w w, w v, v w, v v\nval p: w\n");
        let kp = parse_formula("[a]p").unwrap();
        assert!(!kripke_eval(&m, "w", &kp).unwrap(), "v refutes p");
        assert!(kripke_eval(&m, "w", &parse_formula("p").unwrap()).unwrap());
        assert!(!kripke_eval(&m, "v", &parse_formula("p").unwrap()).unwrap());
        let ax5 = parse_formula("~[a]p -> [a]~[a]p").unwrap();
        assert!(kripke_eval(&m, "w", &ax5).unwrap());
        assert!(kripke_eval(&m, "v", &ax5).unwrap());
    }

    #[test]
    fn eval_rejects_unknown_names() {
        let m = model("worlds: w\nagent a: w w\n");
        let p = parse_formula("p").unwrap();
        assert!(matches!(
            kripke_eval(&m, "z", &p),
            Err(KripkeError::UnknownWorld(_))
        ));
        assert!(matches!(
            kripke_eval(&m, "w", &parse_formula("[b]p").unwrap()),
            Err(KripkeError::UnknownAgent(_))
        ));
        // Atoms outside the valuation are false, not errors.
        assert!(!kripke_eval(&m, "w", &p).unwrap());
    }

    #[test]
    fn frame_reports_match_frozen_relations() {
        let universal = model("worlds: w v\nagent a: w w, w v, v w, v v\n");
        let r = check_frame(&universal);
        assert!(r.is_s5());
        let identity = model("worlds: w v\nagent a: w w, v v\n");
        assert!(check_frame(&identity).is_s5());
        let arrow = model("worlds: w v\nagent a: w v\n");
        let r = check_frame(&arrow);
        let a = &r.agents[0];
        assert!(!a.reflexive && a.transitive && !a.euclidean);
        assert!(!r.is_s5());
    }

    #[test]
    fn euclidean_and_reflexive_imply_symmetric() {
        // All 512 relations on three worlds.
        for bits in 0u32..512 {
            let masks: Vec<u32> = (0..3).map(|w| bits >> (3 * w) & 0b111).collect();
            let reflexive = (0..3).all(|w| masks[w] >> w & 1 == 1);
            let euclidean = (0..3)
                .all(|w| (0..3).all(|v| masks[w] >> v & 1 == 0 || masks[w] & !masks[v] == 0));
            if reflexive && euclidean {
                for w in 0..3 {
                    for v in 0..3 {
                        assert_eq!(masks[w] >> v & 1, masks[v] >> w & 1);
                    }
                }
            }
        }
    }

    #[test]
    fn partitions_enumerate_in_rgs_order() {
        assert_eq!(enumerate_partitions(1), vec![vec![0]]);
        assert_eq!(enumerate_partitions(2), vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(
            enumerate_partitions(3),
            vec![
                vec![0, 0, 0],
                vec![0, 0, 1],
                vec![0, 1, 0],
                vec![0, 1, 1],
                vec![0, 1, 2]
            ]
        );
        // Bell numbers for 4 and 5.
        assert_eq!(enumerate_partitions(4).len(), 15);
        assert_eq!(enumerate_partitions(5).len(), 52);
    }

    #[test]
    fn generated_models_are_s5_and_counted() {
        let agents = [Agent::new("a"), Agent::new("b")];
        let atoms = [Atom::new("p")];
        let space = ModelSpace::new(2, &agents, &atoms);
        assert_eq!(space.total(), 2 * 2 * 4);
        let models: Vec<KripkeModel> = space.models().collect();
        assert_eq!(models.len(), 16);
        for m in &models {
            assert!(check_frame(m).is_s5());
        }
    }

    #[test]
    fn search_finds_the_smallest_falsifying_valuation_for_an_atom() {
        let cm = kripke_countermodel_search(
            &parse_formula("p").unwrap(),
            &[Agent::new("a")],
            1,
        )
        .unwrap()
        .expect("atom must be refutable");
        assert_eq!(cm.model.worlds(), ["w0"]);
        assert_eq!(cm.world, "w0");
        assert_eq!(cm.model.atom_mask(&Atom::new("p")), 0);
    }

    #[test]
    fn search_reports_no_countermodel_for_the_reflection_axiom() {
        let cm = kripke_countermodel_search(
            &parse_formula("[a]p -> p").unwrap(),
            &[Agent::new("a")],
            3,
        )
        .unwrap();
        assert_eq!(cm, None);
    }

    #[test]
    fn search_splits_the_agents_on_the_cross_knowledge_implication() {
        let phi = parse_formula("[a]p -> [b]p").unwrap();
        let agents = [Agent::new("a"), Agent::new("b")];
        assert_eq!(kripke_countermodel_search(&phi, &agents, 1).unwrap(), None);
        let cm = kripke_countermodel_search(&phi, &agents, 2)
            .unwrap()
            .expect("two worlds suffice");
        // First witness in enumeration order: agent a gets the identity
        // partition, agent b the universal one, p true exactly at w0.
        assert_eq!(cm.world, "w0");
        let m = &cm.model;
        assert_eq!(m.worlds(), ["w0", "w1"]);
        assert!(!m.related(&Agent::new("a"), 0, 1));
        assert!(m.related(&Agent::new("b"), 0, 1));
        assert_eq!(m.atom_mask(&Atom::new("p")), 0b01);
        assert!(check_frame(m).is_s5());
    }

    #[test]
    fn search_errors_when_an_agent_is_missing() {
        let phi = parse_formula("[a]p -> [b]p").unwrap();
        assert!(matches!(
            kripke_countermodel_search(&phi, &[Agent::new("a")], 2),
            Err(KripkeError::UnknownAgent(_))
        ));
    }

    #[test]
    fn one_world_models_evaluate_classically() {
        // Truth-table oracle over the four valuations of two atoms.
        fn classical(phi: &Formula, p: bool, q: bool) -> bool {
            match phi {
                Formula::AtomF(a) => {
                    if a.0 == "p" {
                        p
                    } else {
                        q
                    }
                }
                Formula::Bottom => false,
                Formula::Implies(x, y) => !classical(x, p, q) || classical(y, p, q),
                Formula::Know(..) => unreachable!("propositional only"),
            }
        }
        let forms = ["p", "q", "p -> q", "~p", "(p -> q) -> (q -> p)", "~(p -> ~q)", "bot"];
        for pv in [false, true] {
            for qv in [false, true] {
                let mut val = String::new();
                if pv {
                    val.push_str("val p: w\n");
                }
                if qv {
                    val.push_str("val q: w\n");
                }
                let m = model(&format!("worlds: w\nagent a: w w\n{val}"));
                for s in forms {
                    let phi = parse_formula(s).unwrap();
                    assert_eq!(
                        kripke_eval(&m, "w", &phi).unwrap(),
                        classical(&phi, pv, qv),
                        "{s} at p={pv} q={qv}"
                    );
                }
            }
        }
    }

    #[test]
    fn model_files_round_trip() {
        let text = "worlds: w v\nagent a: w w, w v, v w, v v\nagent b: w w, v v\nval p: w\n";
        let m = model(text);
        let printed = format_model_file(&m);
        assert_eq!(parse_model_file(&printed).unwrap(), m);
        assert!(parse_model_file("agent a: w w\n").is_err());
        assert!(parse_model_file("worlds: w\nagent a: w z\n").is_err());
        assert!(parse_model_file("worlds: w w\n").is_err());
        assert!(parse_model_file("worlds: w\nnonsense\n").is_err());
    }
}
