//! Base equivalences: which relations over bases are admissible for the
//! knowledge operator, and what the checker reports when one is not.

use bes::base::{Alphabet, RuleUniverse};
use bes::formula::{Agent, Atom};
use bes::relation::{
    check_modal_relation, identity_family, two_block_family, Relation, RelationFamily,
};

fn main() {
    let alphabet = Alphabet::new(vec![Atom::new("p"), Atom::new("q")]).unwrap();
    let u = RuleUniverse::new(alphabet, 1).unwrap();
    let agents = [Agent::new("a")];

    // The two families every universe admits: bases related only to
    // themselves, and consistent bases related to each other.
    for fam in [identity_family(&u, &agents), two_block_family(&u, &agents)] {
        let report = check_modal_relation(&fam).unwrap();
        println!("family {:?}: passed = {}", fam.name, report.passed());
        print!("{}", report.render());
        println!();
    }

    // Sabotage: take the identity relation and add one edge from the empty
    // base (consistent) to the full base (inconsistent). Consistent bases
    // must only see consistent ones, so the checker flags it and names the
    // offending pair.
    let n = u.base_count();
    let mut r = Relation::identity(n);
    r.insert(0, u.full_base());
    let broken = RelationFamily::new(
        u.clone(),
        vec![(Agent::new("a"), r)],
        "identity with a bad edge",
    )
    .unwrap();
    let report = check_modal_relation(&broken).unwrap();
    println!("family {:?}: passed = {}", broken.name, report.passed());
    print!("{}", report.render());
    assert!(!report.passed());
}
