use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use verbplan::batch::{parse_task_file, run_batch};
use verbplan::compiler::compile_meta_task;
use verbplan::frameid::{
    evaluate, load_corpus, train, train_default, Inventory, LogLinearModel, TrainingConfig,
};
use verbplan::knowledge::{bundled_kb_dir, KnowledgeBase};
use verbplan::parser::{parse_instruction, ParsedInstruction};
use verbplan::planner::Plan;
use verbplan::roles::{definition_for, semantic_match_and_recover};
use verbplan::scenario::Scenario;

const EXIT_INPUT: u8 = 1;
const EXIT_NULL_FRAME: u8 = 2;
const EXIT_NO_PLAN: u8 = 3;

#[derive(Parser)]
#[command(name = "verbplan", version, about = "Ground household instructions into primitive-action plans")]
struct Cli {
    /// Knowledge-base directory.
    #[arg(long, env = "VERBPLAN_KB", global = true)]
    kb: Option<PathBuf>,
    /// Frame model file; without it a model is trained on the KB corpus.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Seed for the training shuffle.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Planning horizon, overriding the scenario's.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Report wall-clock time on stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the typed dependencies of an instruction.
    Parse { text: String },
    /// Identify the frame evoked by an instruction's verb.
    Identify { text: String },
    /// Interpret an instruction, or step INDEX of a flow file, as a meta-task.
    Recover {
        text: Option<String>,
        #[arg(long)]
        flow: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        index: usize,
    },
    /// Solve a scenario's task or desire.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        /// Also print the compiled programs in rule syntax.
        #[arg(long)]
        emit_asp: bool,
    },
    /// Print the compiled constraint program of an instruction in rule syntax.
    EmitAsp { text: String },
    /// Train a frame model on an annotated corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        passes: usize,
        #[arg(long, default_value_t = 0.1)]
        rate: f64,
        #[arg(long, default_value_t = 0.0)]
        l2: f64,
    },
    /// Score a frame model on an annotated corpus.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Solve every task of a file from one scenario state.
    Batch {
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
}

struct Failure(u8, String);

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure(EXIT_INPUT, e.to_string())
}

struct Env {
    kb_dir: PathBuf,
    kb: KnowledgeBase,
}

impl Env {
    fn load(cli: &Cli) -> Result<Env, Failure> {
        let kb_dir = cli.kb.clone().unwrap_or_else(bundled_kb_dir);
        let kb = KnowledgeBase::load(&kb_dir).map_err(|e| input(format!("{}: {e}", kb_dir.display())))?;
        kb.validate().map_err(input)?;
        Ok(Env { kb_dir, kb })
    }

    fn model(&self, cli: &Cli) -> Result<LogLinearModel, Failure> {
        match &cli.model {
            Some(path) => {
                let src = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
                LogLinearModel::from_text(&src).map_err(input)
            }
            None => train_default(&self.kb, &self.kb_dir, cli.seed).map_err(input),
        }
    }

    fn parse(&self, text: &str) -> Result<ParsedInstruction, Failure> {
        parse_instruction(text, &self.kb.parser_config).map_err(input)
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize")
}

#[derive(Serialize)]
struct SolveJson<'a> {
    scenario: &'a str,
    mode: String,
    text: &'a str,
    plan: Option<&'a Plan>,
    states: Vec<Vec<String>>,
    failures: &'a [verbplan::orchestrator::FailureRecord],
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let env = Env::load(cli)?;
    let mut out = String::new();
    match &cli.command {
        Command::Parse { text } => {
            let p = env.parse(text)?;
            if cli.json {
                out = json(&p);
                out.push('\n');
            } else {
                for d in p.dependency_strings() {
                    out.push_str(&d);
                    out.push('\n');
                }
            }
        }
        Command::Identify { text } => {
            let p = env.parse(text)?;
            let model = env.model(cli)?;
            let inv = Inventory { lexicon: &env.kb.lexicon, taxonomy: &env.kb.taxonomy };
            match model.identify_frame(&p, inv) {
                Some((frame, prob)) => {
                    if cli.json {
                        out = json(&serde_json::json!({ "frame": frame, "probability": prob }));
                        out.push('\n');
                    } else {
                        out = format!("{frame}\t{prob:.6}\n");
                    }
                }
                None => return Err(Failure(EXIT_NULL_FRAME, format!("no frame for verb {:?}", p.verb))),
            }
        }
        Command::Recover { text, flow, index } => {
            let lines: Vec<String> = match (text, flow) {
                (Some(t), None) => vec![t.clone()],
                (None, Some(path)) => {
                    let src = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
                    parse_task_file(&src)
                }
                _ => return Err(input("give either TEXT or --flow FILE")),
            };
            let k = if text.is_some() { 1 } else { *index };
            if k == 0 || k > lines.len() {
                return Err(input(format!("index {k} is outside a flow of {} steps", lines.len())));
            }
            let parsed = lines[..k].iter().map(|l| env.parse(l)).collect::<Result<Vec<_>, _>>()?;
            let model = env.model(cli)?;
            match semantic_match_and_recover(&parsed, k, &env.kb, &model).map_err(input)? {
                Some(sem) => {
                    out = sem.task.to_sexpr();
                    out.push('\n');
                }
                None => return Err(Failure(EXIT_NULL_FRAME, format!("no frame for verb {:?}", parsed[k - 1].verb))),
            }
        }
        Command::EmitAsp { text } => {
            let parsed = env.parse(text)?;
            let model = env.model(cli)?;
            let sem = semantic_match_and_recover(std::slice::from_ref(&parsed), 1, &env.kb, &model)
                .map_err(input)?
                .ok_or_else(|| Failure(EXIT_NULL_FRAME, format!("no frame for verb {:?}", parsed.verb)))?;
            let defn = definition_for(&env.kb, &parsed.verb, &sem.frame).ok_or_else(|| input("no meta-task"))?;
            let program = compile_meta_task(&sem.task, defn, &env.kb.taxonomy).map_err(input)?;
            out = program.emit_asp();
        }
        Command::Solve { scenario, emit_asp } => {
            let sc = Scenario::load(scenario).map_err(input)?;
            let model = env.model(cli)?;
            let report = sc.solve(&env.kb, &model, cli.horizon).map_err(input)?;
            if *emit_asp {
                out.push_str(&emit_programs(&sc, &env.kb, &model));
            }
            if cli.json {
                let doc = SolveJson {
                    scenario: &sc.name,
                    mode: sc.mode.to_string(),
                    text: &sc.text,
                    plan: report.plan.as_ref(),
                    states: report.states.iter().map(|s| s.fluents().iter().map(|a| a.to_string()).collect()).collect(),
                    failures: &report.failures,
                };
                out.push_str(&json(&doc));
                out.push('\n');
            } else {
                for f in &report.failures {
                    out.push_str(&format!("; failed {:?}: {} ({})\n", f.task, f.kind, f.detail));
                }
                if let Some(p) = &report.plan {
                    out.push_str(&p.to_string());
                }
            }
            if report.plan.is_none() {
                print!("{out}");
                return Err(Failure(EXIT_NO_PLAN, format!("no plan for {:?}", sc.text)));
            }
        }
        Command::Train { corpus, out: path, passes, rate, l2 } => {
            let config = TrainingConfig::new(*passes, *rate, *l2, cli.seed).map_err(input)?;
            let data = load_corpus(corpus, &env.kb.parser_config, &env.kb.lexicon).map_err(input)?;
            let inv = Inventory { lexicon: &env.kb.lexicon, taxonomy: &env.kb.taxonomy };
            let (model, report) = train(&data, config, inv).map_err(input)?;
            std::fs::write(path, model.to_text()).map_err(|e| input(format!("{}: {e}", path.display())))?;
            out = format!(
                "examples\t{}\nfeatures\t{}\ninitial_log_likelihood\t{:.9}\nfinal_log_likelihood\t{:.9}\ntraining_accuracy\t{:.4}\n",
                data.len(),
                model.theta.len(),
                report.initial_log_likelihood,
                report.final_log_likelihood(),
                report.training_accuracy
            );
        }
        Command::Eval { corpus } => {
            let data = load_corpus(corpus, &env.kb.parser_config, &env.kb.lexicon).map_err(input)?;
            let model = env.model(cli)?;
            let inv = Inventory { lexicon: &env.kb.lexicon, taxonomy: &env.kb.taxonomy };
            let eval = evaluate(&model, &data, inv);
            let m = eval.counts.metrics();
            out.push_str(&format!("TP\t{}\nFP\t{}\nT\t{}\n", eval.counts.tp, eval.counts.fp, eval.counts.t));
            out.push_str(&format!("precision\t{:.4}\nrecall\t{:.4}\nF1\t{:.4}\n", m.precision, m.recall, m.f1));
            for (frame, c) in &eval.per_frame {
                let fm = c.metrics();
                out.push_str(&format!("{frame}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\n", c.tp, c.fp, c.t, fm.precision, fm.recall, fm.f1));
            }
        }
        Command::Batch { tasks, scenario } => {
            let sc = Scenario::load(scenario).map_err(input)?;
            let src = std::fs::read_to_string(tasks).map_err(|e| input(format!("{}: {e}", tasks.display())))?;
            let model = env.model(cli)?;
            let report = run_batch(&parse_task_file(&src), &sc, &env.kb, &model, cli.horizon).map_err(input)?;
            out = if cli.json { json(&report) + "\n" } else { report.to_string() };
        }
    }
    Ok(out)
}

/// Compiled programs for the scenario text and, for a decomposed task, each
/// of its steps taken on its own.
fn emit_programs(sc: &Scenario, kb: &KnowledgeBase, model: &LogLinearModel) -> String {
    let kb = sc.extend_kb(kb);
    let mut texts = vec![sc.text.clone()];
    if let Some(steps) = kb.find_sub_tasks(&sc.text).first() {
        texts = steps.to_vec();
    }
    let mut out = String::new();
    for t in texts {
        let Ok(p) = parse_instruction(&t, &kb.parser_config) else { continue };
        let verb = p.verb.clone();
        let Ok(Some(sem)) = semantic_match_and_recover(&[p], 1, &kb, model) else { continue };
        let Some(defn) = definition_for(&kb, &verb, &sem.frame) else { continue };
        if let Ok(program) = compile_meta_task(&sem.task, defn, &kb.taxonomy) {
            out.push_str(&format!("% {t}\n{}", program.emit_asp()));
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    if cli.timing {
        eprintln!("time_ms\t{:.3}", start.elapsed().as_secs_f64() * 1e3);
    }
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure(code, msg)) => {
            eprintln!("verbplan: {msg}");
            ExitCode::from(code)
        }
    }
}
