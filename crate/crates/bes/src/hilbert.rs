//! Hilbert-style proof checking for multi-agent S5.
//!
//! Axiom recognition is structural unification against the seven schemas,
//! with `~x` matched as `x -> bot`. Detachment cites an antecedent step and
//! an implication step; necessitation is restricted to premise-free proofs,
//! so only theorems are boxed.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{parse_formula, Agent, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AxiomTag {
    Ax1,
    Ax2,
    Ax3,
    AxK,
    AxT,
    Ax4,
    Ax5,
}

impl AxiomTag {
    pub const ALL: [AxiomTag; 7] = [
        AxiomTag::Ax1,
        AxiomTag::Ax2,
        AxiomTag::Ax3,
        AxiomTag::AxK,
        AxiomTag::AxT,
        AxiomTag::Ax4,
        AxiomTag::Ax5,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AxiomTag::Ax1 => "Ax1",
            AxiomTag::Ax2 => "Ax2",
            AxiomTag::Ax3 => "Ax3",
            AxiomTag::AxK => "AxK",
            AxiomTag::AxT => "AxT",
            AxiomTag::Ax4 => "Ax4",
            AxiomTag::Ax5 => "Ax5",
        }
    }

    pub fn from_name(name: &str) -> Option<AxiomTag> {
        AxiomTag::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for AxiomTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Schema skeletons: metavariables 0..3 plus one shared agent variable.
enum Pat {
    Meta(u8),
    Bot,
    Imp(Box<Pat>, Box<Pat>),
    Know(Box<Pat>),
}

fn m(i: u8) -> Pat {
    Pat::Meta(i)
}

fn imp(a: Pat, b: Pat) -> Pat {
    Pat::Imp(Box::new(a), Box::new(b))
}

fn know(a: Pat) -> Pat {
    Pat::Know(Box::new(a))
}

fn neg(a: Pat) -> Pat {
    imp(a, Pat::Bot)
}

fn schema(tag: AxiomTag) -> Pat {
    match tag {
        AxiomTag::Ax1 => imp(m(0), imp(m(1), m(0))),
        AxiomTag::Ax2 => imp(
            imp(m(0), imp(m(1), m(2))),
            imp(imp(m(0), m(1)), imp(m(0), m(2))),
        ),
        AxiomTag::Ax3 => imp(imp(neg(m(0)), neg(m(1))), imp(m(1), m(0))),
        AxiomTag::AxK => imp(know(imp(m(0), m(1))), imp(know(m(0)), know(m(1)))),
        AxiomTag::AxT => imp(know(m(0)), m(0)),
        AxiomTag::Ax4 => imp(know(m(0)), know(know(m(0)))),
        AxiomTag::Ax5 => imp(neg(know(m(0))), know(neg(know(m(0))))),
    }
}

fn unify<'a>(
    pat: &Pat,
    f: &'a Formula,
    binds: &mut [Option<&'a Formula>; 3],
    agent: &mut Option<&'a Agent>,
) -> bool {
    match (pat, f) {
        (Pat::Meta(i), f) => match binds[*i as usize] {
            None => {
                binds[*i as usize] = Some(f);
                true
            }
            Some(g) => g == f,
        },
        (Pat::Bot, Formula::Bottom) => true,
        (Pat::Imp(a, b), Formula::Implies(x, y)) => {
            unify(a, x, binds, agent) && unify(b, y, binds, agent)
        }
        (Pat::Know(a), Formula::Know(ag, x)) => {
            let agent_ok = match agent {
                None => {
                    *agent = Some(ag);
                    true
                }
                Some(bound) => *bound == ag,
            };
            agent_ok && unify(a, x, binds, agent)
        }
        _ => false,
    }
}

/// All axiom schemas `f` instantiates.
pub fn match_axiom(f: &Formula) -> BTreeSet<AxiomTag> {
    AxiomTag::ALL
        .into_iter()
        .filter(|&tag| {
            let mut binds = [None, None, None];
            let mut agent = None;
            unify(&schema(tag), f, &mut binds, &mut agent)
        })
        .collect()
}

/// Step indices in justifications are 1-based, as in proof files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Axiom(AxiomTag),
    Mp { antecedent: usize, implication: usize },
    Nec { step: usize, agent: Agent },
    Premise,
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Axiom(tag) => write!(f, "{tag}"),
            Justification::Mp { antecedent, implication } => {
                write!(f, "MP {antecedent} {implication}")
            }
            Justification::Nec { step, agent } => write!(f, "Nec {step} {agent}"),
            Justification::Premise => write!(f, "Premise"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub premises: Vec<Formula>,
    pub steps: Vec<ProofStep>,
}

impl Proof {
    pub fn conclusion(&self) -> Option<&Formula> {
        self.steps.last().map(|s| &s.formula)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error("proof has no steps")]
    Empty,
    #[error("step {step}: {reason}")]
    Step { step: usize, reason: String },
}

impl ProofError {
    pub fn step_index(&self) -> Option<usize> {
        match self {
            ProofError::Empty => None,
            ProofError::Step { step, .. } => Some(*step),
        }
    }
}

/// Verifies every step's justification. Index references must point at
/// strictly earlier steps; necessitation is rejected outright when the proof
/// carries premises.
pub fn check_proof(pf: &Proof) -> Result<(), ProofError> {
    if pf.steps.is_empty() {
        return Err(ProofError::Empty);
    }
    let fail = |step: usize, reason: String| ProofError::Step { step, reason };
    for (idx, step) in pf.steps.iter().enumerate() {
        let here = idx + 1;
        let earlier = |i: usize| -> Result<&Formula, ProofError> {
            if i == 0 || i >= here {
                return Err(fail(here, format!("index {i} does not refer to an earlier step")));
            }
            Ok(&pf.steps[i - 1].formula)
        };
        match &step.justification {
            Justification::Axiom(tag) => {
                if !match_axiom(&step.formula).contains(tag) {
                    return Err(fail(
                        here,
                        format!("`{}` does not instantiate {tag}", step.formula),
                    ));
                }
            }
            Justification::Premise => {
                if !pf.premises.contains(&step.formula) {
                    return Err(fail(
                        here,
                        format!("`{}` is not among the premises", step.formula),
                    ));
                }
            }
            Justification::Mp { antecedent, implication } => {
                let ant = earlier(*antecedent)?;
                let imp = earlier(*implication)?;
                match imp {
                    Formula::Implies(lhs, rhs) => {
                        if lhs.as_ref() != ant {
                            return Err(fail(
                                here,
                                format!(
                                    "step {implication} does not have step {antecedent} as antecedent"
                                ),
                            ));
                        }
                        if rhs.as_ref() != &step.formula {
                            return Err(fail(
                                here,
                                format!("step {implication} does not conclude `{}`", step.formula),
                            ));
                        }
                    }
                    _ => {
                        return Err(fail(here, format!("step {implication} is not an implication")))
                    }
                }
            }
            Justification::Nec { step: src, agent } => {
                if !pf.premises.is_empty() {
                    return Err(fail(
                        here,
                        "necessitation is only allowed in premise-free proofs".to_string(),
                    ));
                }
                let inner = earlier(*src)?;
                let expected = Formula::Know(agent.clone(), Box::new(inner.clone()));
                if step.formula != expected {
                    return Err(fail(
                        here,
                        format!("formula is not `{expected}`"),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Parses the proof file format: optional `premise: <formula>` lines, then
/// numbered steps `3. <formula> ; MP 1 2`, with `#` comments. Step numbers
/// must count up from 1.
pub fn parse_proof_file(text: &str) -> Result<Proof, ProofError> {
    let fail = |step: usize, reason: String| ProofError::Step { step, reason };
    let mut premises = Vec::new();
    let mut steps: Vec<ProofStep> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |reason: String| fail(steps.len() + 1, format!("line {line_no}: {reason}"));
        if let Some(rest) = line.strip_prefix("premise:") {
            if !steps.is_empty() {
                return Err(syntax("premises must come before the first step".into()));
            }
            let f = parse_formula(rest.trim()).map_err(|e| syntax(e.to_string()))?;
            premises.push(f);
            continue;
        }
        let (num_text, rest) = line
            .split_once('.')
            .ok_or_else(|| syntax("expected `N. formula ; justification`".into()))?;
        let num: usize = num_text
            .trim()
            .parse()
            .map_err(|_| syntax(format!("bad step number `{}`", num_text.trim())))?;
        if num != steps.len() + 1 {
            return Err(syntax(format!("step number {num}, expected {}", steps.len() + 1)));
        }
        let (formula_text, just_text) = rest
            .rsplit_once(';')
            .ok_or_else(|| syntax("missing `;` before the justification".into()))?;
        let formula = parse_formula(formula_text.trim()).map_err(|e| syntax(e.to_string()))?;
        let toks: Vec<&str> = just_text.split_whitespace().collect();
        let justification = match toks.as_slice() {
            [one] => {
                if *one == "Premise" {
                    Justification::Premise
                } else if let Some(tag) = AxiomTag::from_name(one) {
                    Justification::Axiom(tag)
                } else {
                    return Err(syntax(format!("unknown justification `{one}`")));
                }
            }
            ["MP", a, b] => {
                let parse_idx = |t: &str| {
                    t.parse::<usize>()
                        .map_err(|_| syntax(format!("bad step index `{t}`")))
                };
                Justification::Mp { antecedent: parse_idx(a)?, implication: parse_idx(b)? }
            }
            ["Nec", s, agent] => {
                let step = s
                    .parse::<usize>()
                    .map_err(|_| syntax(format!("bad step index `{s}`")))?;
                Justification::Nec { step, agent: Agent::new(agent) }
            }
            _ => return Err(syntax(format!("unknown justification `{}`", just_text.trim()))),
        };
        steps.push(ProofStep { formula, justification });
    }
    if steps.is_empty() {
        return Err(ProofError::Empty);
    }
    Ok(Proof { premises, steps })
}

/// Renders a proof back into the file format, inverse to
/// [`parse_proof_file`].
pub fn format_proof_file(pf: &Proof) -> String {
    let mut out = String::new();
    for p in &pf.premises {
        out.push_str(&format!("premise: {p}\n"));
    }
    for (i, step) in pf.steps.iter().enumerate() {
        out.push_str(&format!("{}. {} ; {}\n", i + 1, step.formula, step.justification));
    }
    out
}
