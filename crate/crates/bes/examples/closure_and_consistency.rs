//! Atomic rule universes: enumerate the rules, close bases under them, and
//! find the maximally consistent bases.

use bes::base::{
    closure, extend_preserving, is_maximally_consistent, Alphabet, RuleUniverse,
};
use bes::formula::Atom;
use bes::relation::maximally_consistent_ids;

fn main() {
    let alphabet = Alphabet::new(vec![Atom::new("p"), Atom::new("q")]).unwrap();
    let u = RuleUniverse::new(alphabet, 1).unwrap();

    println!(
        "universe over {{p, q}} with at most 1 premise per rule: {} rules, {} bases",
        u.rule_count(),
        u.base_count()
    );
    for (i, r) in u.rules().iter().enumerate() {
        println!("  rule {i}: {}", u.format_rule(r));
    }
    println!();

    // A base is a bitmask over the rule list. Rule 0 is "=> p" and rule 4 is
    // "p => q"; together they derive both atoms, which is the inconsistent
    // closure for this alphabet.
    let derives_everything = (1 << 0) | (1 << 4);
    let b = u.base(derives_everything);
    println!("base {{=> p, p => q}} closes to {:?}", closure(&b));
    println!("inconsistent: {}", u.is_inconsistent_mask(derives_everything));
    println!();

    // Growing a base never shrinks its closure.
    let small = u.closure_mask(1 << 0);
    let large = u.closure_mask(derives_everything);
    assert_eq!(small & !large, 0);

    // Greedily extend {=> p} with every rule that keeps q underivable. The
    // result is maximal: adding any missing rule either changes the closure
    // or is already inside.
    let q = Atom::new("q");
    let grown = extend_preserving(u.base(1 << 0), |c| {
        !closure(c).contains(&q)
    });
    println!("{{=> p}} grown while keeping q out: mask {}", grown.mask);
    println!("maximally consistent: {}", is_maximally_consistent(&grown));
    println!();

    // There is one maximally consistent base per proper subset of the
    // alphabet, so three here.
    let maximal = maximally_consistent_ids(&u);
    println!("maximally consistent bases: {maximal:?}");
    for id in &maximal {
        println!("  base {id} proves {:?}", closure(&u.base(*id)));
    }
    assert_eq!(maximal.len(), (1 << u.alphabet().len()) - 1);
}
