//! Validity over base equivalences: one formula, several family-selection
//! modes, and what a counterexample looks like.

use bes::base::{Alphabet, RuleUniverse};
use bes::eval::{ax_five, bes_valid, ValidityMode};
use bes::formula::{parse_formula, Agent, Atom};

fn main() {
    let alphabet = Alphabet::new(vec![Atom::new("p"), Atom::new("q")]).unwrap();
    let u = RuleUniverse::new(alphabet, 1).unwrap();
    let agents = [Agent::new("a"), Agent::new("b")];

    let candidates = [
        parse_formula("p -> q -> p").unwrap(),
        parse_formula("[a](p -> q) -> ([a]p -> [a]q)").unwrap(),
        parse_formula("[a]p -> [b]p").unwrap(),
        parse_formula("p").unwrap(),
    ];

    // A verdict is always relative to the families the mode selects. The
    // canonical pair treats all agents alike, so it cannot refute
    // [a]p -> [b]p; the soundness_bridge example builds an asymmetric
    // family that does.
    for f in &candidates {
        let v = bes_valid(f, &u, &agents, &ValidityMode::Canonical).unwrap();
        match v.counterexample {
            None => println!("valid    {f}  ({} families)", v.families_checked),
            Some(c) => {
                println!("invalid  {f}  fails at base {} under {:?}", c.base, c.family)
            }
        }
    }
    println!();

    // Sampled mode draws random admissible families from a fixed seed, so a
    // rerun sees the same ones.
    let f = ax_five(&Agent::new("a"), &parse_formula("p").unwrap());
    let mode = ValidityMode::Sampled { count: 15, seed: 2024 };
    let v = bes_valid(&f, &u, &agents, &mode).unwrap();
    let stats = v.sampling.unwrap();
    println!(
        "{f}: valid over {} sampled families ({} candidates drawn)",
        stats.accepted, stats.attempts
    );

    // Exhaustive mode enumerates every admissible family. Only feasible on
    // tiny universes, which is exactly where it is interesting.
    let small = RuleUniverse::new(Alphabet::new(vec![Atom::new("p")]).unwrap(), 1).unwrap();
    let one = [Agent::new("a")];
    let v = bes_valid(&f, &small, &one, &ValidityMode::Exhaustive).unwrap();
    println!(
        "{f}: valid over all {} admissible families of the 1-atom universe",
        v.families_checked
    );
    assert!(v.valid);
}
