//! From a possible-worlds countermodel to a refuting base: build world
//! bases and a base equivalence that reproduce a model's behaviour, then
//! read the refutation off on the base side.

use std::collections::BTreeMap;

use bes::bridge::{build_bridge, countermodel_to_counterbase};
use bes::eval::bes_holds;
use bes::formula::{parse_formula, Agent, Atom};
use bes::kripke::KripkeModel;

fn main() {
    // Two worlds, one agent who cannot tell them apart, p true only at w0.
    let model = KripkeModel::new(
        vec!["w0".into(), "w1".into()],
        BTreeMap::from([(
            Agent::new("a"),
            vec![
                ("w0".into(), "w0".into()),
                ("w0".into(), "w1".into()),
                ("w1".into(), "w0".into()),
                ("w1".into(), "w1".into()),
            ],
        )]),
        BTreeMap::from([(Atom::new("p"), vec!["w0".into()])]),
    )
    .unwrap();

    let bridge = build_bridge(&model, 1).unwrap();
    println!(
        "world-marking atoms {:?}, universe of {} rules ({} bases)",
        bridge.fresh,
        bridge.universe().rule_count(),
        bridge.universe().base_count()
    );
    for w in bridge.model.worlds() {
        println!("  base for {w}: {}", bridge.base_for(w).unwrap());
    }
    println!();

    // Every subformula agrees with the model at every world.
    let f = parse_formula("[a]p").unwrap();
    let report = bridge.verify(&f).unwrap();
    print!("{}", report.render());
    assert!(report.passed());
    println!();

    // The agent cannot rule out the p-free world, so [a]p fails at w0's base
    // even though p holds there.
    let b0 = bridge.base_for("w0").unwrap();
    println!(
        "at base {b0}: p = {}, [a]p = {}",
        bes_holds(&parse_formula("p").unwrap(), b0, &bridge.family).unwrap(),
        bes_holds(&f, b0, &bridge.family).unwrap(),
    );
    println!();

    // The whole pipeline in one call: search for a countermodel, build the
    // bridge, verify the correspondence, report the refuting base.
    let g = parse_formula("[a]p -> [b]p").unwrap();
    let outcome =
        countermodel_to_counterbase(&g, &[Agent::new("a"), Agent::new("b")], 3, 1).unwrap();
    print!("{}", outcome.render());
    let (world, base) = outcome.refuting_base().expect("refutation expected");
    println!("=> {g} fails at base {base} (from world {world})");
}
