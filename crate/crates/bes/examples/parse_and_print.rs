//! Parse modal formulas, walk their structure, and print them back.

use bes::formula::{agents_of, atoms_of, parse_formula, subformulas, Formula};

fn main() {
    let inputs = [
        "p -> q -> p",
        "[a](p -> q) -> ([a]p -> [a]q)",
        "~[a]p -> [a]~[a]p",
        "bot -> p",
    ];

    for text in inputs {
        let f = parse_formula(text).unwrap();
        println!("input:     {text}");
        println!("canonical: {f}");
        println!("atoms:     {:?}", atoms_of(&f));
        println!("agents:    {:?}", agents_of(&f));
        println!("nodes:     {}", subformulas(&f).len());
        println!();
    }

    // Negation is sugar for an implication into bottom; the printer keeps
    // the sugar, the tree does not.
    let neg = parse_formula("~p").unwrap();
    assert_eq!(neg, Formula::implies(Formula::atom("p"), Formula::Bottom));
    println!("~p parses as {:?}", neg);

    // Implication associates right, knowledge binds tighter than ->.
    assert_eq!(
        parse_formula("p -> q -> p").unwrap(),
        parse_formula("p -> (q -> p)").unwrap()
    );
    assert_eq!(
        parse_formula("[a]p -> p").unwrap(),
        Formula::implies(Formula::know("a", Formula::atom("p")), Formula::atom("p"))
    );
    println!("precedence checks passed");

    match parse_formula("p -> ") {
        Err(e) => println!("bad input rejected: {e}"),
        Ok(_) => unreachable!(),
    }
}
