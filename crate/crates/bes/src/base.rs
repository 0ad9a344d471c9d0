//! Atomic rule bases over a finite rule universe.
//!
//! A rule universe fixes a finite alphabet and enumerates every production
//! rule `L => x` with `|L| <= premise_cap`. A base is a subset of those rules,
//! identified by a bitmask against the universe's rule order. Derivability is
//! the forward-chaining closure of the empty atom set; a base is inconsistent
//! when its closure covers the whole alphabet.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::Atom;

/// Atom sets are bitmasks over the alphabet order. Alphabets are capped at 16
/// atoms, far above anything the enumeration caps allow.
pub type AtomSet = u32;

/// Base identifiers are the member bitmask against the universe rule order,
/// so binary-counting enumeration order and id order coincide.
pub type BaseId = u64;

pub const MAX_ALPHABET: usize = 16;
pub const MAX_ENUM_RULES: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UniverseError {
    #[error("alphabet must be nonempty")]
    EmptyAlphabet,
    #[error("alphabet has {0} atoms; the cap is {MAX_ALPHABET}")]
    AlphabetTooLarge(usize),
    #[error("universe has {0} rules; enumeration is capped at {MAX_ENUM_RULES}")]
    TooManyRules(usize),
    #[error("atom `{0}` is not in the alphabet")]
    UnknownAtom(String),
}

/// A nonempty, duplicate-free, name-ordered set of atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    atoms: Vec<Atom>,
}

impl Alphabet {
    pub fn new(mut atoms: Vec<Atom>) -> Result<Alphabet, UniverseError> {
        atoms.sort();
        atoms.dedup();
        if atoms.is_empty() {
            return Err(UniverseError::EmptyAlphabet);
        }
        if atoms.len() > MAX_ALPHABET {
            return Err(UniverseError::AlphabetTooLarge(atoms.len()));
        }
        Ok(Alphabet { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn index_of(&self, atom: &Atom) -> Option<usize> {
        self.atoms.binary_search(atom).ok()
    }

    /// Bitmask with every alphabet atom set.
    pub fn full_set(&self) -> AtomSet {
        ((1u64 << self.atoms.len()) - 1) as AtomSet
    }

    pub fn set_to_atoms(&self, set: AtomSet) -> BTreeSet<Atom> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| set & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect()
    }
}

/// A production rule `premises => conclusion`, stored as alphabet indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BaseRule {
    pub premises: AtomSet,
    pub conclusion: u8,
}

/// The finite enumeration frame: every rule over `alphabet` with at most
/// `premise_cap` premises, ordered by conclusion index then premise bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleUniverse {
    alphabet: Alphabet,
    premise_cap: usize,
    rules: Vec<BaseRule>,
}

impl RuleUniverse {
    pub fn new(alphabet: Alphabet, premise_cap: usize) -> Result<RuleUniverse, UniverseError> {
        let n = alphabet.len();
        let mut rules = Vec::new();
        for conclusion in 0..n {
            for premises in 0..(1u32 << n) {
                if premises.count_ones() as usize <= premise_cap {
                    rules.push(BaseRule { premises, conclusion: conclusion as u8 });
                }
            }
        }
        if rules.len() > MAX_ENUM_RULES {
            return Err(UniverseError::TooManyRules(rules.len()));
        }
        Ok(RuleUniverse { alphabet, premise_cap, rules })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn premise_cap(&self) -> usize {
        self.premise_cap
    }

    pub fn rules(&self) -> &[BaseRule] {
        &self.rules
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn base_count(&self) -> u64 {
        1u64 << self.rules.len()
    }

    /// Every rule bitmask is drawn from this set.
    pub fn full_base(&self) -> BaseId {
        (1u64 << self.rules.len()) - 1
    }

    pub fn rule_index(&self, premises: AtomSet, conclusion: u8) -> Option<usize> {
        let want = BaseRule { premises, conclusion };
        self.rules.iter().position(|r| *r == want)
    }

    pub fn base(&self, mask: BaseId) -> Base<'_> {
        debug_assert!(mask <= self.full_base());
        Base { universe: self, mask }
    }

    /// Forward-chaining fixpoint: the least atom set closed under the rules
    /// in `mask`.
    pub fn closure_mask(&self, mask: BaseId) -> AtomSet {
        let mut derived: AtomSet = 0;
        loop {
            let mut changed = false;
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let rule = self.rules[i];
                let bit = 1 << rule.conclusion;
                if derived & bit == 0 && rule.premises & !derived == 0 {
                    derived |= bit;
                    changed = true;
                }
            }
            if !changed {
                return derived;
            }
        }
    }

    pub fn is_inconsistent_mask(&self, mask: BaseId) -> bool {
        self.closure_mask(mask) == self.alphabet.full_set()
    }

    pub fn format_rule(&self, rule: &BaseRule) -> String {
        let mut out = String::new();
        let mut first = true;
        for (i, atom) in self.alphabet.atoms().iter().enumerate() {
            if rule.premises & (1 << i) != 0 {
                if !first {
                    out.push(' ');
                }
                out.push_str(&atom.0);
                first = false;
            }
        }
        if !first {
            out.push(' ');
        }
        out.push_str("=> ");
        out.push_str(&self.alphabet.atoms()[rule.conclusion as usize].0);
        out
    }
}

/// A set of rules from one universe. Equality of masks is set equality.
#[derive(Clone, Copy)]
pub struct Base<'u> {
    pub universe: &'u RuleUniverse,
    pub mask: BaseId,
}

impl fmt::Debug for Base<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules: Vec<String> = self
            .rules()
            .map(|r| self.universe.format_rule(&r))
            .collect();
        write!(f, "Base({}; {{{}}})", self.mask, rules.join(", "))
    }
}

impl PartialEq for Base<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.universe, other.universe) && self.mask == other.mask
    }
}

impl Eq for Base<'_> {}

impl<'u> Base<'u> {
    pub fn contains(&self, rule_index: usize) -> bool {
        self.mask & (1 << rule_index) != 0
    }

    pub fn rules(&self) -> impl Iterator<Item = BaseRule> + 'u {
        let universe = self.universe;
        let mut bits = self.mask;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(universe.rules()[i])
            }
        })
    }

    pub fn is_subset_of(&self, other: &Base<'_>) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn union_rule(&self, rule_index: usize) -> Base<'u> {
        Base { universe: self.universe, mask: self.mask | (1 << rule_index) }
    }
}

/// Least atom set closed under the base's rules.
pub fn closure(b: &Base<'_>) -> BTreeSet<Atom> {
    let set = b.universe.closure_mask(b.mask);
    b.universe.alphabet().set_to_atoms(set)
}

/// True iff `p` is derivable, i.e. `p` is in the closure.
pub fn proves_atom(b: &Base<'_>, p: &Atom) -> Result<bool, UniverseError> {
    let idx = b
        .universe
        .alphabet()
        .index_of(p)
        .ok_or_else(|| UniverseError::UnknownAtom(p.0.clone()))?;
    Ok(b.universe.closure_mask(b.mask) & (1 << idx) != 0)
}

/// True iff every alphabet atom is derivable.
pub fn is_inconsistent(b: &Base<'_>) -> bool {
    b.universe.is_inconsistent_mask(b.mask)
}

/// True iff the base is consistent and adding any missing universe rule
/// makes it inconsistent.
pub fn is_maximally_consistent(b: &Base<'_>) -> bool {
    if is_inconsistent(b) {
        return false;
    }
    let u = b.universe;
    for i in 0..u.rule_count() {
        if !b.contains(i) && !u.is_inconsistent_mask(b.mask | (1 << i)) {
            return false;
        }
    }
    true
}

/// All `2^|rules|` bases in binary-counting order.
pub fn enumerate_bases(u: &RuleUniverse) -> Result<impl Iterator<Item = Base<'_>>, UniverseError> {
    if u.rule_count() > MAX_ENUM_RULES {
        return Err(UniverseError::TooManyRules(u.rule_count()));
    }
    Ok((0..u.base_count()).map(move |mask| u.base(mask)))
}

/// Greedy extension: walk the universe rules in order, adding each rule that
/// keeps `keep` true. The result is maximal under this greedy walk; callers
/// verify maximal consistency afterwards and fall back to exhaustive search
/// if the greedy result does not suffice.
pub fn extend_preserving<'u>(b: Base<'u>, keep: impl Fn(&Base<'_>) -> bool) -> Base<'u> {
    debug_assert!(keep(&b));
    let mut current = b;
    for i in 0..b.universe.rule_count() {
        if !current.contains(i) {
            let candidate = current.union_rule(i);
            if keep(&candidate) {
                current = candidate;
            }
        }
    }
    current
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Universe(#[from] UniverseError),
}

/// A parsed rule file: the universe from the headers plus the base formed by
/// the listed rules.
#[derive(Debug)]
pub struct RuleFile {
    pub universe: RuleUniverse,
    pub base_mask: BaseId,
}

/// Parses the rule file format: an `atoms: p q` header, a `premise_cap: 1`
/// header, then one rule per line (`p q => r`, axioms as `=> r`), with `#`
/// comments and blank lines ignored.
pub fn parse_rule_file(text: &str) -> Result<RuleFile, RuleFileError> {
    let syntax = |line: usize, message: &str| RuleFileError::Syntax {
        line,
        message: message.to_string(),
    };
    let mut atoms: Option<Vec<Atom>> = None;
    let mut premise_cap: Option<usize> = None;
    let mut rule_lines: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("atoms:") {
            let names: Vec<Atom> = rest.split_whitespace().map(Atom::new).collect();
            if names.is_empty() {
                return Err(syntax(line_no, "empty atoms header"));
            }
            atoms = Some(names);
        } else if let Some(rest) = line.strip_prefix("premise_cap:") {
            let cap = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| syntax(line_no, "premise_cap must be a nonnegative integer"))?;
            premise_cap = Some(cap);
        } else {
            rule_lines.push((line_no, line.to_string()));
        }
    }
    let atoms = atoms.ok_or_else(|| syntax(1, "missing `atoms:` header"))?;
    let cap = premise_cap.ok_or_else(|| syntax(1, "missing `premise_cap:` header"))?;
    let universe = RuleUniverse::new(Alphabet::new(atoms)?, cap)?;
    let mut base_mask: BaseId = 0;
    for (line_no, line) in rule_lines {
        let (lhs, rhs) = line
            .split_once("=>")
            .ok_or_else(|| syntax(line_no, "expected `premises => conclusion`"))?;
        let mut premises: AtomSet = 0;
        for name in lhs.split_whitespace() {
            let atom = Atom::new(name);
            let idx = universe
                .alphabet()
                .index_of(&atom)
                .ok_or(UniverseError::UnknownAtom(atom.0))?;
            premises |= 1 << idx;
        }
        let conclusion = rhs.trim();
        if conclusion.split_whitespace().count() != 1 {
            return Err(syntax(line_no, "expected exactly one conclusion atom"));
        }
        let atom = Atom::new(conclusion);
        let cidx = universe
            .alphabet()
            .index_of(&atom)
            .ok_or(UniverseError::UnknownAtom(atom.0))?;
        let rule_idx = universe
            .rule_index(premises, cidx as u8)
            .ok_or_else(|| syntax(line_no, "rule exceeds the universe premise cap"))?;
        base_mask |= 1 << rule_idx;
    }
    Ok(RuleFile { universe, base_mask })
}

/// Renders a universe header plus the rules of `mask`, inverse to
/// [`parse_rule_file`].
pub fn format_rule_file(u: &RuleUniverse, mask: BaseId) -> String {
    let mut out = String::new();
    let names: Vec<&str> = u.alphabet().atoms().iter().map(|a| a.0.as_str()).collect();
    out.push_str(&format!("atoms: {}\n", names.join(" ")));
    out.push_str(&format!("premise_cap: {}\n", u.premise_cap()));
    for (i, rule) in u.rules().iter().enumerate() {
        if mask & (1 << i) != 0 {
            out.push_str(&u.format_rule(rule));
            out.push('\n');
        }
    }
    out
}
