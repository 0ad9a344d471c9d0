//! Base-extension semantics workbench for multi-agent S5.
//!
//! Meaning here is proof-theoretic: a formula is judged against a *base* of
//! atomic rules rather than a set of possible worlds. Implication quantifies
//! over extensions of the base, knowledge quantifies over the bases an agent
//! cannot tell apart, and validity quantifies over every base of a finite
//! rule universe. The crate builds those universes, checks which base
//! equivalences are admissible for the knowledge operator, evaluates and
//! decides formulas, checks Hilbert-style derivations, and converts
//! possible-worlds countermodels into refuting bases.
//!
//! ## Examples
//!
//! Each capability has a runnable walkthrough:
//!
//! ```text
//! examples/
//! ├── parse_and_print.rs          # formula syntax and structure
//! ├── closure_and_consistency.rs  # rule universes, closures, maximal bases
//! ├── relation_conditions.rs      # admissible base equivalences
//! ├── validity_check.rs           # validity modes and counterexamples
//! ├── lemma_walkthrough.rs        # structural laws of the judgment, in bulk
//! ├── kripke_countermodel.rs      # S5 model search on the worlds side
//! ├── hilbert_check.rs            # derivation checking
//! └── soundness_bridge.rs         # countermodel -> refuting base
//! ```
//!
//! Start with the judgment itself:
//!
//! ```bash
//! cargo run -p bes --example closure_and_consistency
//! cargo run -p bes --example validity_check
//! ```
//!
//! then the modal structure and the bridge to possible worlds:
//!
//! ```bash
//! cargo run -p bes --example relation_conditions
//! cargo run -p bes --example kripke_countermodel
//! cargo run -p bes --example soundness_bridge
//! ```
//!
//! ## Modules
//!
//! - [`formula`]: formulas, parsing, printing
//! - [`base`]: atomic rules, bases as bitmasks, closure, consistency
//! - [`relation`]: equivalences over bases, admissibility checking, families
//! - [`eval`]: the support judgment, validity modes, the law suite
//! - [`kripke`]: S5 models, frame checking, countermodel search
//! - [`hilbert`]: axiom schemas, derivations, proof files
//! - [`bridge`]: world bases, induced equivalences, correspondence reports
//!
//! The `bes` binary exposes the same operations as subcommands; run
//! `bes --help` for the list.
//!
//! ## A three-line taste
//!
//! ```
//! use bes::base::{Alphabet, RuleUniverse};
//! use bes::eval::{bes_valid, ValidityMode};
//! use bes::formula::{parse_formula, Agent, Atom};
//!
//! let u = RuleUniverse::new(Alphabet::new(vec![Atom::new("p")]).unwrap(), 1).unwrap();
//! let f = parse_formula("[a]p -> p").unwrap();
//! let v = bes_valid(&f, &u, &[Agent::new("a")], &ValidityMode::Exhaustive).unwrap();
//! assert!(v.valid);
//! ```

pub mod base;
pub mod bridge;
pub mod eval;
pub mod formula;
pub mod hilbert;
pub mod kripke;
pub mod relation;
