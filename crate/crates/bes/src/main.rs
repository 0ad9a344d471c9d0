//! Batch front-end over the library. Every subcommand prints one
//! machine-readable verdict line (PARSE:/VERDICT:/KRIPKE:/FRAME:/HILBERT:/
//! BRIDGE:/SUITE:/UNIVERSE:) alongside human-readable detail, and exits 0 on
//! success/valid, 1 on invalid/refuted/violation, 2 on usage or I/O errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bes::base::{parse_rule_file, Alphabet, RuleUniverse};
use bes::bridge::{build_bridge, countermodel_to_counterbase, write_artifacts, BridgeResult};
use bes::eval::{bes_valid, formula_pool, run_lemma_suite, Evaluator, ValidityMode};
use bes::formula::{agents_of, atoms_of, fresh_atoms, parse_formula, Agent, Atom, Formula};
use bes::hilbert::{check_proof, parse_proof_file};
use bes::kripke::{check_frame, parse_model_file};
use bes::relation::{
    check_modal_relation, enumerate_families, identity_family, parse_relation_file,
    two_block_family, RelationFamily,
};

const DEFAULT_SEED: u64 = 2024;

#[derive(Parser)]
#[command(name = "bes", about = "Base-extension semantics workbench for multi-agent S5")]
struct Cli {
    /// Worker threads; the output is identical for every value.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Canonical,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Identity,
    TwoBlock,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula and print its canonical form and AST.
    Parse { formula: String },
    /// Dump the rule universe over the given atoms.
    Universe {
        #[arg(long, value_delimiter = ',', required = true)]
        atoms: Vec<String>,
        #[arg(long, default_value_t = 1)]
        cap: usize,
    },
    /// Decide base-extension validity of a formula.
    #[command(name = "bes-valid")]
    BesValid {
        formula: String,
        /// Universe atoms; defaults to the formula's atoms plus one spare.
        #[arg(long, value_delimiter = ',')]
        atoms: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        cap: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Canonical)]
        mode: ModeArg,
        /// Family count for sampled mode.
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Evaluate a formula at one base from a rule file.
    #[command(name = "bes-holds")]
    BesHolds {
        formula: String,
        /// Rule file carrying the universe and the base.
        #[arg(long)]
        base: PathBuf,
        /// Canonical relation family to evaluate under.
        #[arg(long, value_enum, default_value_t = FamilyArg::TwoBlock)]
        family: FamilyArg,
        /// Explicit relation file overriding --family.
        #[arg(long)]
        relations: Option<PathBuf>,
    },
    /// Evaluate a formula at a world of a Kripke model.
    Kripke {
        model: PathBuf,
        formula: String,
        #[arg(long)]
        world: String,
    },
    /// Check frame properties of a Kripke model.
    Frame { model: PathBuf },
    /// Check a Hilbert-style proof file.
    Hilbert { proof: PathBuf },
    /// Refute a formula end to end: Kripke countermodel, then a counter-base.
    Bridge {
        formula: String,
        /// Agents for the countermodel search; defaults to the formula's.
        #[arg(long, value_delimiter = ',')]
        agents: Option<Vec<String>>,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
        #[arg(long, default_value_t = 1)]
        cap: usize,
        /// Skip the search and run the construction on this model.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Directory for the construction artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the lemma suite over a formula pool and relation families.
    Suite {
        #[arg(long, value_delimiter = ',')]
        atoms: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        cap: usize,
        /// Agents; defaults to a,b (canonical) or a (exhaustive).
        #[arg(long, value_delimiter = ',')]
        agents: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = ModeArg::Canonical)]
        families: ModeArg,
        /// Relation files checked and used instead of generated families.
        #[arg(long)]
        relations: Vec<PathBuf>,
        /// Random formulas added to the pool.
        #[arg(long, default_value_t = 40)]
        pool_random: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let code = pool.install(|| run(cli.cmd));
    ExitCode::from(code)
}

fn run(cmd: Cmd) -> u8 {
    match dispatch(cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(cmd: Cmd) -> anyhow::Result<u8> {
    match cmd {
        Cmd::Parse { formula } => cmd_parse(&formula),
        Cmd::Universe { atoms, cap } => cmd_universe(&atoms, cap),
        Cmd::BesValid { formula, atoms, cap, mode, count, seed } => {
            cmd_bes_valid(&formula, atoms.as_deref(), cap, mode, count, seed)
        }
        Cmd::BesHolds { formula, base, family, relations } => {
            cmd_bes_holds(&formula, &base, family, relations.as_deref())
        }
        Cmd::Kripke { model, formula, world } => cmd_kripke(&model, &formula, &world),
        Cmd::Frame { model } => cmd_frame(&model),
        Cmd::Hilbert { proof } => cmd_hilbert(&proof),
        Cmd::Bridge { formula, agents, max_worlds, cap, model, out } => {
            cmd_bridge(&formula, agents.as_deref(), max_worlds, cap, model.as_deref(), out.as_deref())
        }
        Cmd::Suite { atoms, cap, agents, families, relations, pool_random, seed } => {
            cmd_suite(atoms.as_deref(), cap, agents.as_deref(), families, &relations, pool_random, seed)
        }
    }
}

fn cmd_parse(text: &str) -> anyhow::Result<u8> {
    match parse_formula(text) {
        Ok(f) => {
            println!("PARSE: ok");
            println!("{f}");
            println!("AST: {f:?}");
            Ok(0)
        }
        Err(e) => {
            println!("PARSE: error {e}");
            Ok(1)
        }
    }
}

fn universe_over(names: &[String], cap: usize) -> anyhow::Result<RuleUniverse> {
    let atoms: Vec<Atom> = names.iter().map(|n| Atom::new(n)).collect();
    Ok(RuleUniverse::new(Alphabet::new(atoms)?, cap)?)
}

fn cmd_universe(names: &[String], cap: usize) -> anyhow::Result<u8> {
    let u = universe_over(names, cap)?;
    println!("UNIVERSE: rules={} bases={}", u.rule_count(), u.base_count());
    print!("{}", bes::base::format_rule_file(&u, u.full_base()));
    Ok(0)
}

fn default_atoms(phi: &Formula) -> Vec<String> {
    let used = atoms_of(phi);
    let spare = fresh_atoms(1, &used);
    let mut names: Vec<String> = used.into_iter().map(|a| a.0).collect();
    names.extend(spare.into_iter().map(|a| a.0));
    names
}

fn cmd_bes_valid(
    text: &str,
    atoms: Option<&[String]>,
    cap: usize,
    mode: ModeArg,
    count: usize,
    seed: u64,
) -> anyhow::Result<u8> {
    let phi = parse_formula(text)?;
    let names = match atoms {
        Some(a) => a.to_vec(),
        None => default_atoms(&phi),
    };
    let u = universe_over(&names, cap)?;
    let agents: Vec<Agent> = agents_of(&phi).into_iter().collect();
    let mode = match mode {
        ModeArg::Canonical => ValidityMode::Canonical,
        ModeArg::Exhaustive => ValidityMode::Exhaustive,
        ModeArg::Sampled => ValidityMode::Sampled { count, seed },
    };
    let verdict = bes_valid(&phi, &u, &agents, &mode)?;
    let seed_note = match mode {
        ValidityMode::Sampled { .. } => format!(" seed={seed}"),
        _ => String::new(),
    };
    if verdict.valid {
        println!(
            "VERDICT: valid formula={phi} families={}{seed_note}",
            verdict.families_checked
        );
        Ok(0)
    } else {
        let c = verdict.counterexample.expect("invalid verdicts carry a counterexample");
        println!(
            "VERDICT: invalid formula={phi} family={} base={}{seed_note}",
            c.family, c.base
        );
        println!("counterexample base rules:");
        if c.base == 0 {
            println!("  (empty base)");
        }
        for rule in u.base(c.base).rules() {
            println!("  {}", u.format_rule(&rule));
        }
        Ok(1)
    }
}

fn cmd_bes_holds(
    text: &str,
    base_path: &std::path::Path,
    family: FamilyArg,
    relations: Option<&std::path::Path>,
) -> anyhow::Result<u8> {
    let phi = parse_formula(text)?;
    let file = parse_rule_file(&fs::read_to_string(base_path)?)?;
    let agents: Vec<Agent> = agents_of(&phi).into_iter().collect();
    let fam: RelationFamily = match relations {
        Some(path) => parse_relation_file(&fs::read_to_string(path)?, &file.universe)?,
        None => match family {
            FamilyArg::Identity => identity_family(&file.universe, &agents),
            FamilyArg::TwoBlock => two_block_family(&file.universe, &agents),
        },
    };
    let mut eval = Evaluator::new(&fam);
    let holds = eval.holds(&phi, file.base_mask)?;
    if holds {
        println!("VERDICT: holds formula={phi} base={}", file.base_mask);
        Ok(0)
    } else {
        println!("VERDICT: fails formula={phi} base={}", file.base_mask);
        Ok(1)
    }
}

fn cmd_kripke(model: &std::path::Path, text: &str, world: &str) -> anyhow::Result<u8> {
    let m = parse_model_file(&fs::read_to_string(model)?)?;
    let phi = parse_formula(text)?;
    let w = m
        .world_index(world)
        .ok_or_else(|| anyhow::anyhow!("world {world} is not in the model"))?;
    let value = m.eval_at(w, &phi)?;
    println!("KRIPKE: {value} world={world} formula={phi}");
    Ok(if value { 0 } else { 1 })
}

fn cmd_frame(model: &std::path::Path) -> anyhow::Result<u8> {
    let m = parse_model_file(&fs::read_to_string(model)?)?;
    let report = check_frame(&m);
    let mut all = true;
    for agent in &report.agents {
        println!(
            "FRAME: agent={} reflexive={} transitive={} euclidean={}",
            agent.agent, agent.reflexive, agent.transitive, agent.euclidean
        );
        all &= agent.is_s5();
    }
    println!("FRAME: s5={all}");
    Ok(if all { 0 } else { 1 })
}

fn cmd_hilbert(proof: &std::path::Path) -> anyhow::Result<u8> {
    let pf = parse_proof_file(&fs::read_to_string(proof)?)?;
    match check_proof(&pf) {
        Ok(()) => {
            let conclusion = pf.conclusion().expect("non-empty proof");
            println!(
                "HILBERT: ok steps={} premises={} conclusion={conclusion}",
                pf.steps.len(),
                pf.premises.len()
            );
            Ok(0)
        }
        Err(e) => {
            println!("HILBERT: error {e}");
            Ok(1)
        }
    }
}

fn cmd_bridge(
    text: &str,
    agents: Option<&[String]>,
    max_worlds: usize,
    cap: usize,
    model: Option<&std::path::Path>,
    out: Option<&std::path::Path>,
) -> anyhow::Result<u8> {
    let phi = parse_formula(text)?;
    if let Some(path) = model {
        let m = parse_model_file(&fs::read_to_string(path)?)?;
        let bridge = build_bridge(&m, cap)?;
        let report = bridge.verify(&phi)?;
        if let Some(dir) = out {
            write_artifacts(dir, &bridge, &report, &phi)?;
        }
        print!("{}", report.render());
        if !report.passed() {
            println!("BRIDGE: verification-failed mismatches={}", report.mismatches().len());
            return Ok(1);
        }
        let refuted = bridge
            .disambiguated
            .worlds()
            .iter()
            .enumerate()
            .find(|(w, _)| !bridge.disambiguated.eval_at(*w, &phi).unwrap_or(true));
        match refuted {
            Some((w, name)) => {
                println!("BRIDGE: refuted world={name} base={}", bridge.world_bases[w]);
                Ok(1)
            }
            None => {
                println!("BRIDGE: not-refuted formula={phi}");
                Ok(0)
            }
        }
    } else {
        let agent_list: Vec<Agent> = match agents {
            Some(names) => names.iter().map(|n| Agent::new(n)).collect(),
            None => agents_of(&phi).into_iter().collect(),
        };
        let outcome = countermodel_to_counterbase(&phi, &agent_list, max_worlds, cap)?;
        match &outcome.result {
            None => {
                println!("BRIDGE: no-countermodel formula={phi} max-worlds={max_worlds}");
                Ok(0)
            }
            Some(BridgeResult { countermodel, bridge, report }) => {
                if let Some(dir) = out {
                    write_artifacts(dir, bridge, report, &phi)?;
                }
                print!("{}", report.render());
                match outcome.refuting_base() {
                    Some((world, base)) => {
                        println!(
                            "BRIDGE: refuted world={world} base={base} worlds={}",
                            countermodel.model.worlds().len()
                        );
                        Ok(1)
                    }
                    None => {
                        println!(
                            "BRIDGE: verification-failed mismatches={}",
                            report.mismatches().len()
                        );
                        Ok(1)
                    }
                }
            }
        }
    }
}

fn cmd_suite(
    atoms: Option<&[String]>,
    cap: usize,
    agents: Option<&[String]>,
    families_mode: ModeArg,
    relation_files: &[PathBuf],
    pool_random: usize,
    seed: u64,
) -> anyhow::Result<u8> {
    let default_atoms: Vec<String> = match families_mode {
        ModeArg::Exhaustive => vec!["p".into()],
        _ => vec!["p".into(), "q".into()],
    };
    let names = atoms.map(|a| a.to_vec()).unwrap_or(default_atoms);
    let u = universe_over(&names, cap)?;
    let agent_names: Vec<String> = match agents {
        Some(a) => a.to_vec(),
        None => match families_mode {
            ModeArg::Exhaustive => vec!["a".into()],
            _ => vec!["a".into(), "b".into()],
        },
    };
    let agent_list: Vec<Agent> = agent_names.iter().map(|n| Agent::new(n)).collect();

    let families: Vec<RelationFamily> = if !relation_files.is_empty() {
        let mut fams = Vec::new();
        for path in relation_files {
            let mut fam = parse_relation_file(&fs::read_to_string(path)?, &u)?;
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                fam.name = stem.to_string();
            }
            fams.push(fam);
        }
        // Explicit families are condition-checked before any lemma runs.
        let mut bad = 0usize;
        for fam in &fams {
            let report = check_modal_relation(fam)?;
            if !report.passed() {
                bad += 1;
                for agent_report in &report.agents {
                    for check in &agent_report.checks {
                        if !check.ok {
                            println!(
                                "CONDITION: family={} agent={} {} fail{}",
                                fam.name,
                                agent_report.agent,
                                check.condition.label(),
                                check
                                    .witness
                                    .as_deref()
                                    .map(|w| format!(" witness: {w}"))
                                    .unwrap_or_default()
                            );
                        }
                    }
                }
            }
        }
        if bad > 0 {
            println!("SUITE: fail families-rejected={bad}");
            return Ok(1);
        }
        fams
    } else {
        match families_mode {
            ModeArg::Canonical => vec![
                identity_family(&u, &agent_list),
                two_block_family(&u, &agent_list),
            ],
            ModeArg::Exhaustive => enumerate_families(&u, &agent_list)?,
            ModeArg::Sampled => {
                let (fams, stats) =
                    bes::relation::sample_families(&u, &agent_list, 20, seed)?;
                println!(
                    "SAMPLING: requested={} accepted={} attempts={}",
                    stats.requested, stats.accepted, stats.attempts
                );
                fams
            }
        }
    };

    let pool_atoms: Vec<Atom> = u.alphabet().atoms().to_vec();
    let pool_agents: BTreeSet<Agent> = families
        .iter()
        .flat_map(|f| f.agents().iter().cloned())
        .collect();
    let pool_agents: Vec<Agent> = pool_agents.into_iter().collect();
    let pool = formula_pool(&pool_atoms, &pool_agents, pool_random, seed);
    let report = run_lemma_suite(&families, &pool)?;
    for entry in &report.entries {
        println!(
            "SUITE: entry={} checked={} violations={}",
            entry.name.replace(' ', "-"),
            entry.checked,
            entry.violations.len()
        );
        for v in &entry.violations {
            println!("  violation: {v}");
        }
    }
    let ok = report.passed();
    println!(
        "SUITE: {} entries={} families={} pool={} seed={seed}",
        if ok { "pass" } else { "fail" },
        report.entries.len(),
        families.len(),
        pool.len()
    );
    Ok(if ok { 0 } else { 1 })
}
