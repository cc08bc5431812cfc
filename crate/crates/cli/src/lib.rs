//! The `triaut` command-line tool.
//!
//! Operands are files in the text formats of the core library; `-` reads
//! standard input. Exit codes: 0 on success, 1 when a checked mathematical
//! property fails, 2 for bad input or usage.

use std::fs;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use triaut::liealg::{lie_closure, ClosureReport, DEFAULT_CAP};
use triaut::text::{format_blocks, parse_automorphisms, parse_derivations, parse_rational};
use triaut::witness::{
    degree_fuzz, degree_fuzz_table, derived_depth_test, nonconnected_counterexample,
    unipotent_generation_test,
};
use triaut::{Error, GeneratorTable, Rational, TriangularAutomorphism, TriangularDerivation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "triaut",
    version,
    about = "Exact algebra of triangular polynomial automorphisms"
)]
pub struct Cli {
    /// Print a JSON document with keys command, inputs, result, diagnostics
    #[arg(long, global = true)]
    json: bool,
    #[command(flatten)]
    knobs: Knobs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Knobs {
    /// Seed for the sampling harnesses
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of sampled trials
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Maximum word length
    #[arg(long, global = true)]
    word_len: Option<usize>,
    /// Round cap for the bracket closure
    #[arg(long, global = true)]
    cap: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compose automorphisms; the first operand is outermost
    Compose {
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Invert an automorphism
    Invert { file: String },
    /// Raise an automorphism to an integer power
    Power {
        file: String,
        #[arg(allow_negative_numbers = true)]
        k: i64,
    },
    /// Group commutator φψφ⁻¹ψ⁻¹
    Commutator { first: String, second: String },
    /// Factor into shears and scalings
    Factor { file: String },
    /// Exponential exp(s·D) of a derivation
    Exp {
        file: String,
        /// Rational parameter such as 3 or -1/2
        #[arg(default_value = "1", allow_hyphen_values = true)]
        s: String,
    },
    /// Lie bracket [D, E]
    Bracket { first: String, second: String },
    /// Bracket closure with lower central and derived series
    Closure {
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Sample words and check the degree bound m^(n-1)
    FuzzDegree {
        /// Generators to use instead of random ones
        file: Option<String>,
        #[arg(long, required_unless_present = "file")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "file")]
        m: Option<u32>,
    },
    /// Iterated commutators of random automorphisms
    DerivedDepth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        depth: usize,
    },
    /// Products of exponentials of the given derivations are unitriangular
    UnipotentTest {
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Words in the two order-two matrices (1, a; 0, -1) and (1, b; 0, -1)
    Counterexample {
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        b: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Compose { .. } => "compose",
            Command::Invert { .. } => "invert",
            Command::Power { .. } => "power",
            Command::Commutator { .. } => "commutator",
            Command::Factor { .. } => "factor",
            Command::Exp { .. } => "exp",
            Command::Bracket { .. } => "bracket",
            Command::Closure { .. } => "closure",
            Command::FuzzDegree { .. } => "fuzz-degree",
            Command::DerivedDepth { .. } => "derived-depth",
            Command::UnipotentTest { .. } => "unipotent-test",
            Command::Counterexample { .. } => "counterexample",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_property_violation() {
            Failure::Violation(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    inputs: Value,
    result: Value,
    diagnostics: Vec<String>,
}

struct Output {
    text: String,
    result: Value,
}

struct Operands<'a> {
    stdin: Option<&'a mut dyn Read>,
}

impl Operands<'_> {
    fn read(&mut self, path: &str) -> Result<String, Failure> {
        if path == "-" {
            let stdin = self
                .stdin
                .take()
                .ok_or_else(|| Failure::Input("standard input can be read only once".into()))?;
            let mut buf = String::new();
            stdin
                .read_to_string(&mut buf)
                .map_err(|e| Failure::Input(format!("<stdin>: {e}")))?;
            Ok(buf)
        } else {
            fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))
        }
    }

    fn automorphisms(&mut self, path: &str) -> Result<Vec<TriangularAutomorphism>, Failure> {
        let text = self.read(path)?;
        parse_automorphisms(&text).map_err(|e| Failure::Input(format!("{}: {e}", display(path))))
    }

    fn derivations(&mut self, path: &str) -> Result<Vec<TriangularDerivation>, Failure> {
        let text = self.read(path)?;
        parse_derivations(&text).map_err(|e| Failure::Input(format!("{}: {e}", display(path))))
    }

    fn automorphism(&mut self, path: &str) -> Result<TriangularAutomorphism, Failure> {
        single(self.automorphisms(path)?, path)
    }

    fn derivation(&mut self, path: &str) -> Result<TriangularDerivation, Failure> {
        single(self.derivations(path)?, path)
    }
}

fn display(path: &str) -> &str {
    if path == "-" {
        "<stdin>"
    } else {
        path
    }
}

fn single<T>(mut items: Vec<T>, path: &str) -> Result<T, Failure> {
    if items.len() == 1 {
        Ok(items.remove(0))
    } else {
        Err(Failure::Input(format!(
            "{}: expected one block, found {}",
            display(path),
            items.len()
        )))
    }
}

fn automorphism_json(phi: &TriangularAutomorphism) -> Value {
    let coords: Vec<String> = phi.coordinates().iter().map(ToString::to_string).collect();
    json!({ "n": phi.n(), "degree": phi.degree(), "coordinates": coords })
}

fn derivation_json(d: &TriangularDerivation) -> Value {
    let coeffs: Vec<String> = d.coeffs().iter().map(ToString::to_string).collect();
    json!({ "n": d.n(), "coefficients": coeffs })
}

fn rational_arg(name: &str, text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure::Input(format!("{name}: {e}")))
}

fn to_value<T: Serialize>(report: &T) -> Value {
    serde_json::to_value(report).expect("reports serialize")
}

fn pretty<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    text
}

fn inputs(command: &Command, knobs: &Knobs) -> Value {
    let mut v = match command {
        Command::Compose { files }
        | Command::Closure { files }
        | Command::UnipotentTest { files } => {
            json!({ "files": files })
        }
        Command::Invert { file } | Command::Factor { file } => json!({ "file": file }),
        Command::Power { file, k } => json!({ "file": file, "k": k }),
        Command::Commutator { first, second } | Command::Bracket { first, second } => {
            json!({ "files": [first, second] })
        }
        Command::Exp { file, s } => json!({ "file": file, "s": s }),
        Command::FuzzDegree { file, n, m } => json!({ "file": file, "n": n, "m": m }),
        Command::DerivedDepth { n, depth } => json!({ "n": n, "depth": depth }),
        Command::Counterexample { a, b } => json!({ "a": a, "b": b }),
    };
    let obj = v.as_object_mut().expect("object");
    match command {
        Command::FuzzDegree { .. }
        | Command::DerivedDepth { .. }
        | Command::UnipotentTest { .. } => {
            obj.insert("seed".into(), json!(knobs.seed));
            obj.insert("trials".into(), json!(knobs.trials));
            obj.insert("word_len".into(), json!(knobs.word_len));
        }
        Command::Counterexample { .. } => {
            obj.insert("word_len".into(), json!(knobs.word_len));
        }
        Command::Closure { .. } => {
            obj.insert("cap".into(), json!(knobs.cap));
        }
        _ => {}
    }
    v
}

fn execute(command: &Command, knobs: &Knobs, ops: &mut Operands<'_>) -> Result<Output, Failure> {
    let automorphism = |phi: TriangularAutomorphism| Output {
        text: phi.to_string(),
        result: automorphism_json(&phi),
    };
    match command {
        Command::Compose { files } => {
            let mut maps = Vec::new();
            for f in files {
                maps.extend(ops.automorphisms(f)?);
            }
            let mut iter = maps.into_iter();
            let first = iter
                .next()
                .ok_or_else(|| Failure::Input("nothing to compose".into()))?;
            let product = iter.try_fold(first, |acc, phi| acc.compose(&phi))?;
            Ok(automorphism(product))
        }
        Command::Invert { file } => Ok(automorphism(ops.automorphism(file)?.inverse())),
        Command::Power { file, k } => Ok(automorphism(ops.automorphism(file)?.pow(*k))),
        Command::Commutator { first, second } => {
            let a = ops.automorphism(first)?;
            let b = ops.automorphism(second)?;
            Ok(automorphism(a.commutator(&b)?))
        }
        Command::Factor { file } => {
            let factors = ops.automorphism(file)?.elementary_factorization();
            let lines: Vec<String> = factors.iter().map(ToString::to_string).collect();
            let mut text = lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            Ok(Output {
                text,
                result: json!(lines),
            })
        }
        Command::Exp { file, s } => {
            let d = ops.derivation(file)?;
            Ok(automorphism(d.exp(&rational_arg("s", s)?)?))
        }
        Command::Bracket { first, second } => {
            let d = ops.derivation(first)?;
            let e = ops.derivation(second)?;
            let b = d.bracket(&e)?;
            Ok(Output {
                text: b.to_string(),
                result: derivation_json(&b),
            })
        }
        Command::Closure { files } => {
            let mut gens = Vec::new();
            for f in files {
                gens.extend(ops.derivations(f)?);
            }
            let basis = lie_closure(&gens, knobs.cap.unwrap_or(DEFAULT_CAP))?;
            let report = ClosureReport::from_basis(&basis)?;
            let text = format!(
                "dimension {}\nrounds {}\nlower central series {:?}\nderived series {:?}\nnilpotency class {}\nderived length {}\nbasis:\n{}",
                report.dimension,
                report.rounds,
                report.lower_central_series,
                report.derived_series,
                report.nilpotency_class,
                report.derived_length,
                format_blocks(basis.elements()),
            );
            Ok(Output {
                text,
                result: to_value(&report),
            })
        }
        Command::FuzzDegree { file, n, m } => {
            let trials = knobs.trials.unwrap_or(1000);
            let len = knobs.word_len.unwrap_or(8);
            let report = match file {
                Some(path) => {
                    let maps = ops.automorphisms(path)?;
                    let n = maps
                        .first()
                        .map(TriangularAutomorphism::n)
                        .ok_or_else(|| Failure::Input(format!("{path}: no generators")))?;
                    let mut table = GeneratorTable::new(n);
                    for (i, phi) in maps.into_iter().enumerate() {
                        table.insert(format!("g{}", i + 1), phi)?;
                    }
                    degree_fuzz_table(&table, len, trials, knobs.seed)?
                }
                None => degree_fuzz(n.unwrap_or(0), m.unwrap_or(0), len, trials, knobs.seed)?,
            };
            Ok(Output {
                text: pretty(&report),
                result: to_value(&report),
            })
        }
        Command::DerivedDepth { n, depth } => {
            let report = derived_depth_test(*n, *depth, knobs.trials.unwrap_or(100), knobs.seed)?;
            Ok(Output {
                text: pretty(&report),
                result: to_value(&report),
            })
        }
        Command::UnipotentTest { files } => {
            let mut ders = Vec::new();
            for f in files {
                ders.extend(ops.derivations(f)?);
            }
            let report = unipotent_generation_test(
                &ders,
                knobs.word_len.unwrap_or(6),
                knobs.trials.unwrap_or(100),
                knobs.seed,
            )?;
            Ok(Output {
                text: pretty(&report),
                result: to_value(&report),
            })
        }
        Command::Counterexample { a, b } => {
            let report = nonconnected_counterexample(
                &rational_arg("a", a)?,
                &rational_arg("b", b)?,
                knobs.word_len.unwrap_or(12),
            )?;
            Ok(Output {
                text: pretty(&report),
                result: to_value(&report),
            })
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
                return EXIT_INPUT;
            }
            let _ = stdout.write_all(rendered.as_bytes());
            return EXIT_OK;
        }
    };
    let mut ops = Operands { stdin: Some(stdin) };
    let outcome = execute(&cli.command, &cli.knobs, &mut ops);
    let (code, diagnostics) = match &outcome {
        Ok(_) => (EXIT_OK, Vec::new()),
        Err(Failure::Input(msg)) => (EXIT_INPUT, vec![format!("error: {msg}")]),
        Err(Failure::Violation(msg)) => {
            (EXIT_VIOLATION, vec![format!("property violation: {msg}")])
        }
    };
    for d in &diagnostics {
        let _ = writeln!(stderr, "{d}");
    }
    let written = if cli.json {
        let envelope = Envelope {
            command: cli.command.name(),
            inputs: inputs(&cli.command, &cli.knobs),
            result: outcome
                .as_ref()
                .map(|o| o.result.clone())
                .unwrap_or(Value::Null),
            diagnostics,
        };
        serde_json::to_string_pretty(&envelope)
            .map(|s| s + "\n")
            .map_err(std::io::Error::other)
            .and_then(|s| stdout.write_all(s.as_bytes()))
    } else {
        match &outcome {
            Ok(o) => stdout.write_all(o.text.as_bytes()),
            Err(_) => Ok(()),
        }
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_INPUT;
    }
    code
}
