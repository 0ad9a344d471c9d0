//! Structural laws of the support judgment, checked in bulk over a formula
//! pool: monotonicity under base extension, behaviour at inconsistent and at
//! maximally consistent bases, and closure of validity under detachment and
//! necessitation.

use bes::base::{Alphabet, RuleUniverse};
use bes::eval::{formula_pool, run_lemma_suite};
use bes::formula::{Agent, Atom};
use bes::relation::{identity_family, two_block_family};

fn main() {
    let atoms = [Atom::new("p"), Atom::new("q")];
    let agents = [Agent::new("a"), Agent::new("b")];
    let u = RuleUniverse::new(Alphabet::new(atoms.to_vec()).unwrap(), 1).unwrap();

    let families = [
        identity_family(&u, &agents),
        two_block_family(&u, &agents),
    ];

    // Axiom instances plus seeded random formulas. The seed pins the pool,
    // so failures are reproducible.
    let pool = formula_pool(&atoms, &agents, 40, 2024);
    println!("pool of {} formulas, first few:", pool.len());
    for f in pool.iter().take(5) {
        println!("  {f}");
    }
    println!();

    let report = run_lemma_suite(&families, &pool).unwrap();
    print!("{}", report.render());
    assert!(report.passed());
}
