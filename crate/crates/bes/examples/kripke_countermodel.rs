//! Possible-worlds side: search the space of S5 models for a countermodel to
//! a formula and inspect what the search found.

use bes::formula::{parse_formula, Agent};
use bes::kripke::{check_frame, format_model_file, kripke_countermodel_search, kripke_eval};

fn main() {
    let agents = [Agent::new("a"), Agent::new("b")];

    // One agent refines the other's partition, so knowing-for-a need not
    // imply knowing-for-b. The search scans 1-world models first, then 2, ...
    let f = parse_formula("[a]p -> [b]p").unwrap();
    let found = kripke_countermodel_search(&f, &agents, 3).unwrap();
    let cm = found.expect("a two-world countermodel exists");

    println!("countermodel for {f} at world {}:", cm.world);
    print!("{}", format_model_file(&cm.model));
    println!();

    let frame = check_frame(&cm.model);
    for a in &frame.agents {
        println!(
            "agent {}: reflexive={} transitive={} euclidean={}",
            a.agent, a.reflexive, a.transitive, a.euclidean
        );
    }
    assert!(frame.is_s5());

    // The refutation, spelled out at the witness world.
    for part in ["[a]p", "[b]p", "[a]p -> [b]p"] {
        let g = parse_formula(part).unwrap();
        println!(
            "{part} at {}: {}",
            cm.world,
            kripke_eval(&cm.model, &cm.world, &g).unwrap()
        );
    }

    // A theorem of the logic has no countermodel at any bound we can afford.
    let t = parse_formula("[a]p -> p").unwrap();
    assert!(kripke_countermodel_search(&t, &agents, 3).unwrap().is_none());
    println!("\nno countermodel for {t} up to 3 worlds");
}
