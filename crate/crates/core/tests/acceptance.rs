//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines are always printed.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use verbplan::batch::{parse_task_file, run_batch};
use verbplan::compiler::{check, ConstraintKind, ConstraintProgram, TemporalConstraint, Witness};
use verbplan::frameid::{metrics, train, train_default, Inventory, LogLinearModel, Objective, TrainingConfig};
use verbplan::knowledge::formula::{ConditionFormula, Literal, Term};
use verbplan::knowledge::taxonomy::{ClassExpr, Compatibility};
use verbplan::knowledge::{bundled_kb_dir, KnowledgeBase};
use verbplan::orchestrator::{FailureKind, Outcome};
use verbplan::parser::parse_instruction;
use verbplan::planner::{plan, simulate_trajectory, witness_candidates, ActionModel, Atom, PrimitiveAction, SearchOptions, Trajectory, WorldState};
use verbplan::roles::semantic_match_and_recover;
use verbplan::scenario::Scenario;

const PARSE_BUDGET: Duration = Duration::from_millis(10);
const FRIDGE_BUDGET: Duration = Duration::from_secs(1);
const SCENARIO_BUDGET: Duration = Duration::from_secs(2);
const MIN_DOMAINS: usize = 50;
const MIN_TRIPLES: usize = 200;
const GRADIENT_REL_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-5;
const MONOTONE_TOL: f64 = 1e-8;
const METRIC_TOL: f64 = 1e-12;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn(&Env) -> Verdict);

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn scenario(name: &str) -> Scenario {
    Scenario::load(&manifest().join("scenarios").join(name)).unwrap()
}

struct Env {
    kb: KnowledgeBase,
    model: LogLinearModel,
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_parse(env: &Env) -> Verdict {
    let start = Instant::now();
    let parsed = parse_instruction("take food out of refrigerator", &env.kb.parser_config).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let got: BTreeSet<String> = parsed.dependency_strings().into_iter().collect();
    let want: BTreeSet<String> = ["dobj(take, food)", "prep_out_of(take, refrigerator)"].iter().map(|s| s.to_string()).collect();
    ensure(got == want, format!("got {got:?}"))?;
    ensure(took < PARSE_BUDGET, format!("took {took:?}"))?;
    Ok(format!("{took:?}"))
}

fn c2_roles(env: &Env) -> Verdict {
    let flow = |lines: &[&str]| -> Vec<_> { lines.iter().map(|l| parse_instruction(l, &env.kb.parser_config).unwrap()).collect() };
    let a = semantic_match_and_recover(&flow(&["put beverage in the fridge"]), 1, &env.kb, &env.model)
        .map_err(|e| e.to_string())?
        .ok_or("no frame for the placing sentence")?;
    ensure(a.task.compact() == "put-Placing(robot, beverage, null, fridge)", format!("(a) got {}", a.task))?;
    let f = flow(&["go to fridge", "open the fridge door", "take the beer", "close the fridge door"]);
    let b = semantic_match_and_recover(&f, 3, &env.kb, &env.model).map_err(|e| e.to_string())?.ok_or("no frame for step 3")?;
    ensure(b.task.compact() == "take-Taking(robot, beer, fridge)", format!("(b) got {}", b.task))?;
    let door = env.kb.role_compatible("take-Taking", "Source", "fridge-door");
    ensure(door == Compatibility::NotMember, format!("fridge-door as Source is {door:?}"))?;
    Ok(format!("{}; {}", a.task, b.task))
}

fn solve_timed(env: &Env, name: &str, budget: Duration) -> Verdict {
    let sc = scenario(name);
    let start = Instant::now();
    let report = sc.solve(&env.kb, &env.model, None).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let p = report.plan.ok_or(format!("{name}: no plan"))?;
    let lines: Vec<String> = p.steps.iter().map(|s| s.to_string()).collect();
    ensure(lines == sc.expect, format!("{name}: got {lines:?}"))?;
    ensure(took < budget, format!("{name}: took {took:?}"))?;
    Ok(format!("{name} {took:?}"))
}

fn c3_fridge(env: &Env) -> Verdict {
    let sc = scenario("get_food.scn");
    ensure(sc.horizon == 10, "scenario horizon is not 10")?;
    let report = sc.solve(&env.kb, &env.model, None).map_err(|e| e.to_string())?;
    let atoms = report.plan.ok_or("no plan")?.to_asp_atoms();
    ensure(
        atoms == "moveto(fridge,1), open(fridge,2), find(food,3), pick_up(food,4), close(fridge,5)",
        format!("got {atoms}"),
    )?;
    solve_timed(env, "get_food.scn", FRIDGE_BUDGET)
}

fn c4_scenarios(env: &Env) -> Verdict {
    let toys = solve_timed(env, "clean_up_toys.scn", SCENARIO_BUDGET)?;
    let headache = solve_timed(env, "headache.scn", SCENARIO_BUDGET)?;
    let report = scenario("headache.scn").solve(&env.kb, &env.model, None).map_err(|e| e.to_string())?;
    let first = report.failures.first().ok_or("no failure recorded")?;
    ensure(first.task == "with pain medication", format!("first failure is {:?}", first.task))?;
    Ok(format!("{toys}; {headache}"))
}

// Independent evaluation of a ground formula over a set of fluent strings,
// following the violation-rule bodies: a clause is violated at t when none
// of its literals is true at t.
fn atom_text(l: &Literal) -> String {
    let args: Vec<String> = l.args.iter().map(|t| t.to_string()).collect();
    format!("{}({})", l.predicate, args.join(","))
}

fn true_at(facts: &BTreeSet<String>, l: &Literal) -> bool {
    facts.contains(&atom_text(l)) == l.positive
}

fn clause_violated(facts: &BTreeSet<String>, clause: &[Literal]) -> bool {
    clause.iter().all(|l| !true_at(facts, l))
}

fn formula_violated(facts: &BTreeSet<String>, f: &ConditionFormula) -> bool {
    f.clauses.iter().any(|c| clause_violated(facts, c))
}

fn facts_of(s: &WorldState) -> BTreeSet<String> {
    s.fluents().iter().chain(s.statics()).map(|a| a.to_string()).collect()
}

fn brute_force_satisfied(program: &ConstraintProgram, states: &[BTreeSet<String>], t: usize, t2: usize) -> bool {
    for c in &program.constraints {
        let violated = match c.kind {
            ConstraintKind::AtStart => formula_violated(&states[t], &c.formula),
            ConstraintKind::AtEnd => formula_violated(&states[t2], &c.formula),
            ConstraintKind::Throughout => (t..=t2).any(|x| formula_violated(&states[x], &c.formula)),
            ConstraintKind::DisjunctiveThroughout => {
                let alt = c.alternative.as_ref().unwrap();
                let f = (t..=t2).any(|x| formula_violated(&states[x], &c.formula));
                let f_star = (t..=t2).any(|x| formula_violated(&states[x], alt));
                f && f_star
            }
        };
        if violated {
            return false;
        }
    }
    true
}

const CUP: &str = "cup";
const TABLE: &str = "table";
const CABINET: &str = "cabinet";

fn universe(entities: &[String]) -> Vec<(String, Vec<String>)> {
    let mut out = Vec::new();
    for e in entities {
        for p in ["near", "beliveloction", "grasping"] {
            out.push((p.to_string(), vec!["robot".to_string(), e.clone()]));
        }
        out.push(("closed".to_string(), vec![e.clone()]));
        out.push(("opened".to_string(), vec![e.clone()]));
        for l in entities.iter().filter(|l| *l != e) {
            out.push(("at".to_string(), vec![e.clone(), l.clone()]));
        }
    }
    out
}

fn random_literal(rng: &mut ChaCha8Rng, atoms: &[(String, Vec<String>)], positive_bias: f64) -> Literal {
    let (p, args) = &atoms[rng.gen_range(0..atoms.len())];
    Literal { predicate: p.clone(), args: args.iter().map(|a| Term::Const(a.clone())).collect(), positive: rng.gen_bool(positive_bias) }
}

fn random_formula(rng: &mut ChaCha8Rng, atoms: &[(String, Vec<String>)], bias: f64) -> ConditionFormula {
    let clauses = (0..rng.gen_range(1..=2))
        .map(|_| (0..rng.gen_range(1..=2)).map(|_| random_literal(rng, atoms, bias)).collect())
        .collect();
    ConditionFormula::new(clauses).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, entities: &[String]) -> WorldState {
    let mut fluents = Vec::new();
    if rng.gen_bool(0.5) {
        fluents.push(Atom::new("near", &["robot", &entities[rng.gen_range(0..entities.len())]]));
    }
    for e in entities {
        match rng.gen_range(0..3) {
            0 => fluents.push(Atom::new("closed", &[e])),
            1 => fluents.push(Atom::new("opened", &[e])),
            _ => {}
        }
        if rng.gen_bool(0.5) {
            fluents.push(Atom::new("beliveloction", &["robot", e]));
        }
    }
    let others: Vec<&String> = entities.iter().filter(|e| *e != CUP).collect();
    if entities.iter().any(|e| e == CUP) && !others.is_empty() && rng.gen_bool(0.8) {
        fluents.push(Atom::new("at", &[CUP, others[rng.gen_range(0..others.len())]]));
    }
    WorldState::from_fluents(fluents)
}

fn random_program(rng: &mut ChaCha8Rng, entities: &[String]) -> ConstraintProgram {
    let atoms = universe(entities);
    let mut constraints = vec![TemporalConstraint::new(ConstraintKind::AtEnd, random_formula(rng, &atoms, 0.7))];
    if rng.gen_bool(0.3) {
        constraints.push(TemporalConstraint::new(ConstraintKind::AtStart, random_formula(rng, &atoms, 0.5)));
    }
    if rng.gen_bool(0.3) {
        constraints.push(TemporalConstraint::new(ConstraintKind::Throughout, random_formula(rng, &atoms, 0.3)));
    }
    if rng.gen_bool(0.3) {
        constraints.push(TemporalConstraint::disjunctive(random_formula(rng, &atoms, 0.5), random_formula(rng, &atoms, 0.5)));
    }
    let mut witnesses = Vec::new();
    if rng.gen_bool(0.3) {
        let theme = &entities[rng.gen_range(0..entities.len())];
        let lit = Literal { predicate: "at".into(), args: vec![Term::Const(theme.clone()), Term::Var("Goal".into())], positive: true };
        constraints.push(TemporalConstraint::new(ConstraintKind::AtEnd, ConditionFormula::new(vec![vec![lit]]).unwrap()));
        witnesses.push(Witness { role: "Goal".into(), bound: ClassExpr::parse("Holdable_Obj|Supportable_Obj|Containable_Obj").unwrap() });
    }
    ConstraintProgram { task: "random".into(), constraints, witnesses }
}

fn random_walk(rng: &mut ChaCha8Rng, am: &ActionModel, actions: &[PrimitiveAction], s0: WorldState, steps: usize) -> Trajectory {
    let mut traj = Trajectory::new(s0);
    for _ in 0..steps {
        let ok: Vec<&PrimitiveAction> = actions.iter().filter(|a| am.applicable(traj.last(), a)).collect();
        if ok.is_empty() {
            break;
        }
        let a = ok[rng.gen_range(0..ok.len())].clone();
        traj.push(am, a).unwrap();
    }
    traj
}

// Shortest plan by breadth-first search over (state, disjunct-failure flags),
// evaluating constraints with the brute-force evaluator.
fn bfs_minimum(program: &ConstraintProgram, am: &ActionModel, actions: &[PrimitiveAction], s0: &WorldState, horizon: usize) -> Option<usize> {
    let of = |k: ConstraintKind| program.constraints.iter().filter(move |c| c.kind == k);
    let facts0 = facts_of(s0);
    if of(ConstraintKind::AtStart).any(|c| formula_violated(&facts0, &c.formula)) {
        return None;
    }
    let ok_throughout = |f: &BTreeSet<String>| !of(ConstraintKind::Throughout).any(|c| formula_violated(f, &c.formula));
    let flags_after = |f: &BTreeSet<String>, prev: &[(bool, bool)]| -> Option<Vec<(bool, bool)>> {
        let next: Vec<(bool, bool)> = of(ConstraintKind::DisjunctiveThroughout)
            .zip(prev)
            .map(|(c, &(a, b))| (a || formula_violated(f, &c.formula), b || formula_violated(f, c.alternative.as_ref().unwrap())))
            .collect();
        (!next.iter().any(|&(a, b)| a && b)).then_some(next)
    };
    if !ok_throughout(&facts0) {
        return None;
    }
    let start_flags = flags_after(&facts0, &vec![(false, false); of(ConstraintKind::DisjunctiveThroughout).count()])?;
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([(s0.clone(), start_flags, 0usize)]);
    while let Some((s, flags, d)) = queue.pop_front() {
        if d == horizon {
            continue;
        }
        for a in actions.iter().filter(|a| am.applicable(&s, a)) {
            let next = am.apply(&s, a).unwrap();
            let facts = facts_of(&next);
            if !ok_throughout(&facts) {
                continue;
            }
            let Some(nf) = flags_after(&facts, &flags) else { continue };
            if !of(ConstraintKind::AtEnd).any(|c| formula_violated(&facts, &c.formula)) {
                return Some(d + 1);
            }
            if seen.insert((next.clone(), nf.clone())) {
                queue.push_back((next, nf, d + 1));
            }
        }
    }
    None
}

fn mini_entities(rng: &mut ChaCha8Rng) -> Vec<String> {
    let pool = [CABINET, CUP, TABLE];
    loop {
        let picked: Vec<String> = pool.iter().filter(|_| rng.gen_bool(0.7)).map(|s| s.to_string()).collect();
        if picked.len() >= 2 {
            return picked;
        }
    }
}

fn c5_optimality(env: &Env) -> Verdict {
    let am = &env.kb.action_models["action_model_loc.txt"];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut solved, mut domains) = (0, 0);
    while domains < MIN_DOMAINS {
        domains += 1;
        let entities = mini_entities(&mut rng);
        let s0 = random_state(&mut rng, &entities);
        let program = random_program(&mut rng, &entities);
        let horizon = rng.gen_range(1..=6);
        let actions = am.ground(&entities, s0.statics());
        let candidates = witness_candidates(&program, &entities, &env.kb.taxonomy);
        let choices: Vec<Vec<String>> = if candidates.is_empty() {
            vec![vec![]]
        } else {
            candidates[0].iter().map(|e| vec![e.clone()]).collect()
        };
        let oracle = choices.iter().filter_map(|c| bfs_minimum(&program.instantiate(c), am, &actions, &s0, horizon)).min();
        let out = plan(&s0, &program, am, &actions, &candidates, SearchOptions { horizon });
        let got = out.as_ref().map(|o| o.plan.len());
        ensure(got == oracle, format!("domain {domains} {entities:?}: planner {got:?} vs oracle {oracle:?}"))?;
        if let Some(o) = out {
            solved += 1;
            let choice: Vec<String> = o.witnesses.iter().map(|(_, e)| e.clone()).collect();
            let traj = simulate_trajectory(am, &s0, &o.plan).map_err(|e| e.to_string())?;
            let verdict = check(&program.instantiate(&choice), &traj, (0, o.plan.len()));
            ensure(verdict == Ok(None), format!("domain {domains}: plan fails its program: {verdict:?}"))?;
        }
    }
    Ok(format!("{domains} domains, {solved} solvable, 100% agreement"))
}

fn c6_faithfulness(env: &Env) -> Verdict {
    let am = &env.kb.action_models["action_model_loc.txt"];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut violated, mut checked) = (0, 0);
    while checked < MIN_TRIPLES {
        let entities = mini_entities(&mut rng);
        let mut program = random_program(&mut rng, &entities);
        if !program.witnesses.is_empty() {
            program = program.instantiate(&[entities[0].clone()]);
        }
        let actions = am.ground(&entities, &BTreeSet::new());
        let steps = rng.gen_range(1..=5);
        let s0 = random_state(&mut rng, &entities);
        let traj = random_walk(&mut rng, am, &actions, s0, steps);
        if traj.is_empty() {
            continue;
        }
        let t2 = rng.gen_range(1..=traj.len());
        let t = rng.gen_range(0..t2);
        let states: Vec<BTreeSet<String>> = traj.states.iter().map(facts_of).collect();
        let expected = brute_force_satisfied(&program, &states, t, t2);
        let got = check(&program, &traj, (t, t2)).map_err(|e| e.to_string())?;
        checked += 1;
        ensure(got.is_none() == expected, format!("triple {checked}: check {got:?} vs brute force {expected}"))?;
        violated += usize::from(!expected);
    }
    Ok(format!("{checked} triples, {violated} violated, 100% agreement"))
}

fn c7_training(env: &Env) -> Verdict {
    let kb = &env.kb;
    let inv = Inventory { lexicon: &kb.lexicon, taxonomy: &kb.taxonomy };
    let corpus = verbplan::frameid::load_corpus(&bundled_kb_dir().join("corpus.tsv"), &kb.parser_config, &kb.lexicon)
        .map_err(|e| e.to_string())?;
    let frames: BTreeSet<&str> = corpus.iter().map(|e| e.frame.as_str()).collect();
    ensure(corpus.len() >= 50 && frames.len() >= 5, "corpus too small")?;

    let obj = Objective::new(&corpus, inv, 0.01).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let theta: Vec<f64> = (0..obj.dimension()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let order: Vec<usize> = (0..corpus.len()).collect();
    let grad = obj.gradient(&theta, &order);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let m = rng.gen_range(0..obj.dimension());
        let (mut plus, mut minus) = (theta.clone(), theta.clone());
        plus[m] += FD_STEP;
        minus[m] -= FD_STEP;
        let fd = (obj.value(&plus) - obj.value(&minus)) / (2.0 * FD_STEP);
        worst = worst.max((fd - grad[m]).abs() / fd.abs().max(grad[m].abs()).max(1e-8));
    }
    ensure(worst < GRADIENT_REL_TOL, format!("gradient relative error {worst:e}"))?;

    let (_, report) = train(&corpus, TrainingConfig::new(50, 0.1, 0.0, 0).unwrap(), inv).map_err(|e| e.to_string())?;
    ensure(report.training_accuracy == 1.0, format!("training accuracy {}", report.training_accuracy))?;

    let (_, slow) = train(&corpus, TrainingConfig::new(50, 1e-2, 0.0, 0).unwrap(), inv).map_err(|e| e.to_string())?;
    let mut prev = slow.initial_log_likelihood;
    for (pass, ll) in slow.pass_log_likelihood.iter().enumerate() {
        ensure(*ll >= prev - MONOTONE_TOL, format!("log-likelihood fell at pass {}", pass + 1))?;
        prev = *ll;
    }
    Ok(format!("max rel err {worst:.1e}, accuracy 1.0, {} monotone passes", slow.pass_log_likelihood.len()))
}

fn c8_metrics(_: &Env) -> Verdict {
    // (tp, fp, t) -> (P, R, F1), computed by hand
    let cases = [
        ((3, 1, 4), (0.75, 0.75, 0.75)),
        ((2, 2, 5), (0.5, 0.4, 4.0 / 9.0)),
        ((1, 0, 2), (1.0, 0.5, 2.0 / 3.0)),
        ((0, 3, 3), (0.0, 0.0, 0.0)),
        ((0, 0, 0), (0.0, 0.0, 0.0)),
        ((0, 0, 4), (0.0, 0.0, 0.0)),
        ((5, 0, 5), (1.0, 1.0, 1.0)),
    ];
    for ((tp, fp, t), (p, r, f1)) in cases {
        let m = metrics(tp, fp, t);
        let close = |a: f64, b: f64| (a - b).abs() <= METRIC_TOL;
        ensure(close(m.precision, p) && close(m.recall, r) && close(m.f1, f1), format!("({tp},{fp},{t}) gave {m:?}"))?;
    }
    Ok(format!("{} cases", cases.len()))
}

fn c9_batch(env: &Env) -> Verdict {
    use FailureKind::*;
    use Outcome::*;
    // hand-assigned outcome per line of batch20.txt
    let expected = [
        Decomposed,               // both toy steps succeed
        Decomposed,               // cup from table into cabinet
        Failed(GlobalPlanning),   // newspaper and sofa are not in the world
        Failed(GlobalPlanning),   // sink is not in the world
        Failed(GlobalPlanning),   // there is no beer
        MetaTask,                 // primitive pick_up after moving to the floor
        MetaTask,                 // fetch the toy, then place it
        MetaTask,                 // open is applicable at once
        MetaTask,                 // open is applicable at once
        MetaTask,                 // cup is on the table
        MetaTask,                 // primitive move
        MetaTask,                 // open first, then close
        Failed(LocalPlanning),    // the toy is not in the cabinet at the start
        Failed(LocalPlanning),    // no apple entity, so no find action
        Failed(Rfn),              // Waiting has no meta-task
        Failed(Rfn),              // Mass_motion has no meta-task
        Failed(Parsed),           // unknown verb
        Failed(Parsed),           // no verb at all
        Failed(Parsed),           // unknown verb
        Failed(Rfn),              // Mass_motion has no meta-task
    ];
    let dir = manifest().join("scenarios");
    let tasks = parse_task_file(&std::fs::read_to_string(dir.join("batch20.txt")).map_err(|e| e.to_string())?);
    ensure(tasks.len() == expected.len(), format!("{} tasks", tasks.len()))?;
    let report = run_batch(&tasks, &scenario("batch_house.scn"), &env.kb, &env.model, None).map_err(|e| e.to_string())?;
    for (i, (row, want)) in report.rows.iter().zip(expected).enumerate() {
        ensure(row.task == tasks[i], "row order differs from the task file")?;
        ensure(row.outcome == want, format!("{:?}: {:?}, expected {want:?}", row.task, row.outcome))?;
    }
    let counts: Vec<usize> = report.summary().iter().map(|(_, n)| *n).collect();
    ensure(counts == [2, 7, 3, 3, 3, 2], format!("summary {counts:?}"))?;
    ensure(counts.iter().sum::<usize>() == tasks.len(), "categories do not partition the batch")?;
    Ok("2 decomposed, 7 meta-task, 3 parsed, 3 RFN, 3 global, 2 local".into())
}

fn run_cli(args: &[&str]) -> Result<(Vec<u8>, i32), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_verbplan"))
        .args(args)
        .env_remove("VERBPLAN_KB")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.stdout, out.status.code().unwrap_or(-1)))
}

fn c10_determinism(_: &Env) -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let flow = dir.path().join("flow.txt");
    std::fs::write(&flow, "go to fridge\nopen the fridge door\ntake the beer\nclose the fridge door\n").map_err(|e| e.to_string())?;
    let sc = |n: &str| manifest().join("scenarios").join(n).display().to_string();
    let corpus = bundled_kb_dir().join("corpus.tsv").display().to_string();
    let model_path = |tag: &str| dir.path().join(format!("model_{tag}.txt"));
    let flow_s = flow.display().to_string();
    let commands: Vec<Vec<String>> = vec![
        vec!["parse".into(), "take food out of refrigerator".into()],
        vec!["identify".into(), "take food out of refrigerator".into()],
        vec!["recover".into(), "put beverage in the fridge".into()],
        vec!["recover".into(), "--flow".into(), flow_s, "--index".into(), "3".into()],
        vec!["emit-asp".into(), "put beverage in the fridge".into()],
        vec!["solve".into(), "--scenario".into(), sc("get_food.scn")],
        vec!["solve".into(), "--scenario".into(), sc("clean_up_toys.scn")],
        vec!["solve".into(), "--scenario".into(), sc("headache.scn")],
        vec!["--json".into(), "solve".into(), "--scenario".into(), sc("thirsty.scn")],
        vec!["eval".into(), "--corpus".into(), corpus.clone()],
        vec!["batch".into(), "--tasks".into(), sc("batch20.txt"), "--scenario".into(), sc("batch_house.scn")],
    ];
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let first = run_cli(&args)?;
        let second = run_cli(&args)?;
        ensure(first == second, format!("{cmd:?} differs between runs"))?;
        ensure(first.1 == 0, format!("{cmd:?} exited {}", first.1))?;
    }
    let mut trained = Vec::new();
    for tag in ["a", "b"] {
        let out = model_path(tag).display().to_string();
        let (_, code) = run_cli(&["--seed", "3", "train", "--corpus", &corpus, "--out", &out])?;
        ensure(code == 0, "train failed")?;
        trained.push(std::fs::read(model_path(tag)).map_err(|e| e.to_string())?);
    }
    ensure(trained[0] == trained[1], "trained models differ")?;
    Ok(format!("{} commands plus train", commands.len()))
}

fn main() {
    let kb = KnowledgeBase::load(&bundled_kb_dir()).expect("bundled KB loads");
    let model = train_default(&kb, &bundled_kb_dir(), 0).expect("default model trains");
    let env = Env { kb, model };
    let criteria: [Criterion; 10] = [
        ("golden parse", c1_parse),
        ("golden role recovery", c2_roles),
        ("golden fridge plan", c3_fridge),
        ("toy and headache scenarios", c4_scenarios),
        ("planner optimality against BFS", c5_optimality),
        ("checker against brute-force rules", c6_faithfulness),
        ("frame-model training", c7_training),
        ("precision, recall, F1", c8_metrics),
        ("batch failure taxonomy", c9_batch),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run(&env) {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
