//! Batch front end: every command prints one JSON document (or a single
//! word) and maps its outcome to an exit code.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use malnormal::pingpong::{is_coned_elliptic, select_pingpong_pair, CandidateBudget};
use malnormal::stallings::{
    based_intersection, commensurator_in_free, conjugate_intersections, is_malnormal, GraphSummary,
    SubgroupHandle,
};
use malnormal::vfree::{self, VirtuallyFree, VirtuallyFreeData};
use malnormal::word::{boundary_distance, BoundaryPointRep, Word, MAX_RANK};
use malnormal::Error;

pub mod selftest;

/// Exit codes.
pub const SUCCESS: i32 = 0;
pub const NEGATIVE: i32 = 1;
pub const INPUT_ERROR: i32 = 2;
pub const BUDGET_EXHAUSTED: i32 = 3;
pub const THEOREM_VIOLATION: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "malnormal",
    version,
    about = "Subgroup automata and weakly malnormal subgroups of free and virtually free groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Also write the output document to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel stages (output does not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct SubgroupInput {
    /// Ambient rank; inferred from the highest letter used (at least 2) if absent.
    #[arg(long)]
    rank: Option<usize>,
    /// Generators, repeatable or comma-separated.
    #[arg(long = "gens", value_delimiter = ',')]
    gens: Vec<String>,
    /// File with one generator per line; `#` starts a comment.
    #[arg(long = "gens-file")]
    gens_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct BudgetArgs {
    /// Longest commutator padding tried.
    #[arg(long = "max-pad", default_value_t = CandidateBudget::default().max_pad_length)]
    max_pad: usize,
    /// Largest exponent tried for the ping-pong powers.
    #[arg(long = "max-exp", default_value_t = CandidateBudget::default().max_exponent)]
    max_exp: usize,
    /// Candidates examined before giving up.
    #[arg(long = "max-candidates", default_value_t = CandidateBudget::default().max_candidates)]
    max_candidates: usize,
}

impl BudgetArgs {
    fn budget(&self) -> Result<CandidateBudget, Error> {
        CandidateBudget::new(self.max_pad, self.max_candidates, self.max_exp)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Word arithmetic.
    Words {
        /// Ambient rank; inferred from the highest letter used if absent.
        #[arg(long, global = true)]
        rank: Option<usize>,
        #[command(subcommand)]
        op: WordOp,
    },
    /// Folded graph, rank, index and free basis of a subgroup.
    Subgroup(SubgroupInput),
    /// Based intersection `H ∩ K`.
    Intersect {
        #[command(flatten)]
        input: SubgroupInput,
        /// Generators of K.
        #[arg(long, value_delimiter = ',')]
        other: Vec<String>,
        #[arg(long = "other-file")]
        other_file: Option<PathBuf>,
    },
    /// Components of the fiber product: every `H ∩ wKw⁻¹ ≠ 1`.
    ConjIntersections {
        #[command(flatten)]
        input: SubgroupInput,
        #[arg(long, value_delimiter = ',')]
        other: Vec<String>,
        #[arg(long = "other-file")]
        other_file: Option<PathBuf>,
    },
    /// Malnormality verdict with offending double cosets.
    Malnormal(SubgroupInput),
    /// Commensurator in the free group, or in `F ⋊ Q` with `--vfree`.
    Commensurator {
        #[command(flatten)]
        input: SubgroupInput,
        #[arg(long)]
        vfree: Option<PathBuf>,
    },
    /// Ping-pong pair for a seed avoiding the limit sets of given subgroups.
    Pingpong {
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        seed: String,
        /// Subgroup to avoid: a generator file, or comma-separated generators.
        #[arg(long)]
        avoid: Vec<String>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Whether some power of an element is conjugate into a coned subgroup.
    ConedElliptic {
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        element: String,
        #[arg(long)]
        avoid: Vec<String>,
    },
    /// Validation, fiber centralizer, abelianized action and exponent choice.
    Vfree {
        #[arg(long)]
        vfree: PathBuf,
    },
    /// Full construction of a weakly malnormal subgroup.
    Construct {
        #[arg(long)]
        vfree: PathBuf,
        #[arg(long)]
        avoid: Vec<String>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Fixed-seed property suite.
    Selftest,
}

#[derive(Subcommand, Debug)]
enum WordOp {
    Reduce {
        word: String,
    },
    Multiply {
        u: String,
        v: String,
    },
    Invert {
        word: String,
    },
    Cyclic {
        word: String,
    },
    Iota {
        word: String,
    },
    Abelianize {
        word: String,
    },
    CommSquare {
        word: String,
    },
    ReducedProduct {
        u: String,
        v: String,
    },
    /// Distance between rays written `prefix(period)`.
    BoundaryDistance {
        p: String,
        q: String,
    },
}

/// Outcome of a command before rendering.
enum Output {
    Json(Value, i32),
    Plain(String, i32),
}

fn failure(e: &Error) -> (i32, String) {
    let code = match e {
        Error::BudgetExhausted(_) => BUDGET_EXHAUSTED,
        Error::TheoremViolation(_) => THEOREM_VIOLATION,
        _ => INPUT_ERROR,
    };
    let debug = format!("{e:?}");
    let kind = debug.split(['(', ' ', '{']).next().unwrap_or("Error");
    let doc = json!({"error": kind, "message": e.to_string()});
    (code, render(&doc))
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Parses `argv` (including the program name) and runs one command.
/// Returns the exit code and the document destined for standard output.
pub fn run<S: AsRef<str>>(argv: &[S]) -> (i32, String) {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => SUCCESS,
                _ => INPUT_ERROR,
            };
            return (code, e.to_string());
        }
    };
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(Error::Parse(e.to_string())),
        },
        None => dispatch(&cli.command),
    };
    let (code, doc) = match result {
        Ok(Output::Json(v, code)) => (code, render(&v)),
        Ok(Output::Plain(s, code)) => (code, format!("{s}\n")),
        Err(e) => failure(&e),
    };
    if let Some(path) = &cli.out {
        if let Err(e) = fs::write(path, &doc) {
            return failure(&Error::Parse(format!(
                "cannot write {}: {e}",
                path.display()
            )));
        }
    }
    (code, doc)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn verdict(b: bool) -> i32 {
    if b {
        SUCCESS
    } else {
        NEGATIVE
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn file_words(path: &Path) -> Result<Vec<String>, Error> {
    Ok(read(path)?
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn highest_letter(text: &str) -> usize {
    text.chars()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_lowercase() as usize - 'a' as usize + 1)
        .max()
        .unwrap_or(0)
}

fn infer_rank(explicit: Option<usize>, texts: &[&str], floor: usize) -> Result<usize, Error> {
    let rank = explicit.unwrap_or_else(|| {
        texts
            .iter()
            .map(|t| highest_letter(t))
            .max()
            .unwrap_or(0)
            .max(floor)
    });
    if rank == 0 || rank > MAX_RANK {
        return Err(Error::UnsupportedRank(rank));
    }
    Ok(rank)
}

/// Words are letters `a..z` / `A..Z`; `1` denotes the identity.
pub fn parse_word(rank: usize, text: &str) -> Result<Word, Error> {
    let t = text.trim();
    if t == "1" || t == "ε" {
        return Ok(Word::identity(rank));
    }
    Word::parse(rank, t)
}

/// `prefix(period)`, e.g. `ab(ba)` or `(a)`.
pub fn parse_boundary_point(rank: usize, text: &str) -> Result<BoundaryPointRep, Error> {
    let bad = || Error::MalformedBoundaryPoint(text.to_string());
    let body = text.trim().strip_suffix(')').ok_or_else(bad)?;
    let (prefix, period) = body.split_once('(').ok_or_else(bad)?;
    BoundaryPointRep::new(parse_word(rank, prefix)?, parse_word(rank, period)?)
}

fn gens_of(input: &SubgroupInput) -> Result<Vec<String>, Error> {
    let mut gens = input.gens.clone();
    if let Some(path) = &input.gens_file {
        gens.extend(file_words(path)?);
    }
    Ok(gens)
}

fn other_of(other: &[String], file: &Option<PathBuf>) -> Result<Vec<String>, Error> {
    let mut gens = other.to_vec();
    if let Some(path) = file {
        gens.extend(file_words(path)?);
    }
    Ok(gens)
}

/// An `--avoid` value names a generator file if such a file exists, and is
/// otherwise a comma-separated generator list.
fn avoid_lists(values: &[String]) -> Result<Vec<Vec<String>>, Error> {
    values
        .iter()
        .map(|v| {
            let path = Path::new(v);
            if path.is_file() {
                file_words(path)
            } else {
                Ok(v.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect())
            }
        })
        .collect()
}

fn build(rank: usize, gens: &[String]) -> Result<SubgroupHandle, Error> {
    let words = gens
        .iter()
        .map(|g| parse_word(rank, g))
        .collect::<Result<Vec<_>, _>>()?;
    SubgroupHandle::build(rank, &words)
}

fn all_texts<'a>(lists: &'a [&'a [String]]) -> Vec<&'a str> {
    lists
        .iter()
        .flat_map(|l| l.iter().map(|s| s.as_str()))
        .collect()
}

fn load_vfree(path: &Path) -> Result<VirtuallyFree, Error> {
    vfree::validate(&VirtuallyFreeData::from_json(&read(path)?)?)
}

fn summary(h: &SubgroupHandle) -> Value {
    to_value(&GraphSummary::from(h))
}

fn dispatch(cmd: &Command) -> Result<Output, Error> {
    match cmd {
        Command::Words { rank, op } => words(*rank, op),
        Command::Subgroup(input) => {
            let gens = gens_of(input)?;
            let h = build(infer_rank(input.rank, &all_texts(&[&gens]), 2)?, &gens)?;
            Ok(Output::Json(summary(&h), SUCCESS))
        }
        Command::Intersect {
            input,
            other,
            other_file,
        } => {
            let (h, k) = pair(input, other, other_file)?;
            let i = based_intersection(&h, &k)?;
            let i = SubgroupHandle::build(i.ambient_rank(), &i.basis())?;
            Ok(Output::Json(json!({"intersection": summary(&i)}), SUCCESS))
        }
        Command::ConjIntersections {
            input,
            other,
            other_file,
        } => {
            let (h, k) = pair(input, other, other_file)?;
            let comps = conjugate_intersections(&h, &k)?;
            let nontrivial = comps.iter().filter(|c| !c.trivial).count();
            Ok(Output::Json(
                json!({"components": to_value(&comps), "nontrivial": nontrivial}),
                SUCCESS,
            ))
        }
        Command::Malnormal(input) => {
            let gens = gens_of(input)?;
            let h = build(infer_rank(input.rank, &all_texts(&[&gens]), 2)?, &gens)?;
            let report = is_malnormal(&h)?;
            Ok(Output::Json(to_value(&report), verdict(report.verdict)))
        }
        Command::Commensurator { input, vfree: None } => {
            let gens = gens_of(input)?;
            let h = build(infer_rank(input.rank, &all_texts(&[&gens]), 2)?, &gens)?;
            Ok(Output::Json(to_value(&commensurator_in_free(&h)?), SUCCESS))
        }
        Command::Commensurator {
            input,
            vfree: Some(path),
        } => {
            let vf = load_vfree(path)?;
            let gens = gens_of(input)?;
            let h = build(vf.rank(), &gens)?;
            let c = vfree::commensurator_in_g(&h, &vf)?;
            Ok(Output::Json(to_value(&c), SUCCESS))
        }
        Command::Pingpong {
            rank,
            seed,
            avoid,
            budget,
        } => {
            let lists = avoid_lists(avoid)?;
            let mut texts = vec![seed.as_str()];
            texts.extend(lists.iter().flatten().map(|s| s.as_str()));
            let rank = infer_rank(*rank, &texts, 2)?;
            let es = lists
                .iter()
                .map(|l| build(rank, l))
                .collect::<Result<Vec<_>, _>>()?;
            let pair = select_pingpong_pair(&parse_word(rank, seed)?, &es, budget.budget()?)?;
            Ok(Output::Json(to_value(&pair), SUCCESS))
        }
        Command::ConedElliptic {
            rank,
            element,
            avoid,
        } => {
            let lists = avoid_lists(avoid)?;
            let mut texts = vec![element.as_str()];
            texts.extend(lists.iter().flatten().map(|s| s.as_str()));
            let rank = infer_rank(*rank, &texts, 2)?;
            let hs = lists
                .iter()
                .map(|l| build(rank, l))
                .collect::<Result<Vec<_>, _>>()?;
            let elliptic = is_coned_elliptic(&parse_word(rank, element)?, &hs)?;
            Ok(Output::Json(
                json!({"element": element, "elliptic": elliptic}),
                verdict(elliptic),
            ))
        }
        Command::Vfree { vfree: path } => vfree_report(path),
        Command::Construct {
            vfree: path,
            avoid,
            budget,
        } => {
            let vf = load_vfree(path)?;
            let es = avoid_lists(avoid)?
                .iter()
                .map(|l| build(vf.rank(), l))
                .collect::<Result<Vec<_>, _>>()?;
            let result = vfree::run_pipeline(&vf, &es, budget.budget()?)?;
            let code = if result.verdicts.all() {
                SUCCESS
            } else {
                THEOREM_VIOLATION
            };
            Ok(Output::Json(to_value(&result), code))
        }
        Command::Selftest => {
            let report = selftest::run_suite();
            let code = verdict(report.passed);
            Ok(Output::Json(to_value(&report), code))
        }
    }
}

fn pair(
    input: &SubgroupInput,
    other: &[String],
    file: &Option<PathBuf>,
) -> Result<(SubgroupHandle, SubgroupHandle), Error> {
    let gens = gens_of(input)?;
    let other = other_of(other, file)?;
    let rank = infer_rank(input.rank, &all_texts(&[&gens, &other]), 2)?;
    Ok((build(rank, &gens)?, build(rank, &other)?))
}

fn vfree_report(path: &Path) -> Result<Output, Error> {
    let vf = load_vfree(path)?;
    let order = vf.quotient().order();
    let autos: Vec<_> = (0..order).map(|q| vf.action(q).clone()).collect();
    let l = vfree::abelianized_action(&vf)?;
    let exponent = match malnormal::matrix::choose_exponent_n(&l) {
        Ok(choice) => to_value(&choice),
        Err(e) => json!({"error": e.to_string()}),
    };
    let doc = json!({
        "rank": vf.rank(),
        "q_order": order,
        "action": to_value(&autos),
        "centralizer_of_fiber": to_value(&vfree::centralizer_of_fiber(&vf)),
        "abelianized_action": to_value(&l),
        "baumslag_taylor": vfree::baumslag_taylor_check(&autos)?,
        "exponent": exponent,
    });
    Ok(Output::Json(doc, SUCCESS))
}

fn words(rank: Option<usize>, op: &WordOp) -> Result<Output, Error> {
    let texts: Vec<&str> = match op {
        WordOp::Reduce { word }
        | WordOp::Invert { word }
        | WordOp::Cyclic { word }
        | WordOp::Iota { word }
        | WordOp::Abelianize { word }
        | WordOp::CommSquare { word } => vec![word],
        WordOp::Multiply { u, v } | WordOp::ReducedProduct { u, v } => vec![u, v],
        WordOp::BoundaryDistance { p, q } => vec![p, q],
    };
    let rank = infer_rank(rank, &texts, 1)?;
    let w = |i: usize| parse_word(rank, texts[i]);
    let plain = |x: Word| {
        let s = if x.is_identity() {
            "1".to_string()
        } else {
            x.to_string()
        };
        Ok(Output::Plain(s, SUCCESS))
    };
    match op {
        WordOp::Reduce { .. } => plain(w(0)?),
        WordOp::Multiply { .. } => plain(w(0)?.multiply(&w(1)?)?),
        WordOp::Invert { .. } => plain(w(0)?.invert()),
        WordOp::Iota { .. } => plain(w(0)?.iota()),
        WordOp::CommSquare { .. } => plain(w(0)?.commutator_square()),
        WordOp::Abelianize { .. } => Ok(Output::Plain(w(0)?.abelianize().to_string(), SUCCESS)),
        WordOp::Cyclic { .. } => {
            let d = w(0)?.cyclic_reduce();
            Ok(Output::Json(
                json!({"conjugator": to_value(&d.conjugator), "core": to_value(&d.core)}),
                SUCCESS,
            ))
        }
        WordOp::ReducedProduct { .. } => {
            let b = w(0)?.is_reduced_product(&w(1)?)?;
            Ok(Output::Plain(b.to_string(), verdict(b)))
        }
        WordOp::BoundaryDistance { p, q } => {
            let d = boundary_distance(
                &parse_boundary_point(rank, p)?,
                &parse_boundary_point(rank, q)?,
            )?;
            Ok(Output::Plain(d.to_string(), SUCCESS))
        }
    }
}
