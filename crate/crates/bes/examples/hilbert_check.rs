//! Check Hilbert-style derivations: axiom schema recognition, detachment,
//! necessitation, and the errors a bad proof produces.

use bes::formula::parse_formula;
use bes::hilbert::{check_proof, format_proof_file, match_axiom, parse_proof_file};

const IDENTITY: &str = "\
# p -> p from the two classical schemas.
1. p -> ((p -> p) -> p) ; Ax1
2. (p -> ((p -> p) -> p)) -> ((p -> (p -> p)) -> (p -> p)) ; Ax2
3. (p -> (p -> p)) -> (p -> p) ; MP 1 2
4. p -> (p -> p) ; Ax1
5. p -> p ; MP 4 3
";

const KNOWN_IDENTITY: &str = "\
1. p -> ((p -> p) -> p) ; Ax1
2. (p -> ((p -> p) -> p)) -> ((p -> (p -> p)) -> (p -> p)) ; Ax2
3. (p -> (p -> p)) -> (p -> p) ; MP 1 2
4. p -> (p -> p) ; Ax1
5. p -> p ; MP 4 3
6. [a](p -> p) ; Nec 5 a
";

const BAD_DETACHMENT: &str = "\
1. p -> (q -> p) ; Ax1
2. [a]p -> p ; AxT
3. q -> p ; MP 2 1
";

fn main() {
    // Schema recognition is structural: one formula can instantiate several
    // schemas, another none at all.
    for text in ["p -> (q -> p)", "[b]p -> p", "p -> p"] {
        let f = parse_formula(text).unwrap();
        let tags: Vec<&str> = match_axiom(&f).iter().map(|t| t.name()).collect();
        println!("{text:<16} matches {tags:?}");
    }
    println!();

    let pf = parse_proof_file(IDENTITY).unwrap();
    check_proof(&pf).unwrap();
    println!("identity proof checks, conclusion {}", pf.conclusion().unwrap());
    println!();
    print!("{}", format_proof_file(&pf));
    println!();

    // Necessitation is sound only for theorems, so it is admitted only in
    // premise-free proofs.
    let pf = parse_proof_file(KNOWN_IDENTITY).unwrap();
    check_proof(&pf).unwrap();
    println!("necessitation step accepted: {}", pf.conclusion().unwrap());
    println!();

    // Step 3 claims q -> p by detachment, but nothing in the proof derives
    // the antecedent p. The error names the step and says what went wrong.
    let pf = parse_proof_file(BAD_DETACHMENT).unwrap();
    match check_proof(&pf) {
        Err(e) => println!("rejected: {e}"),
        Ok(()) => unreachable!(),
    }
}
