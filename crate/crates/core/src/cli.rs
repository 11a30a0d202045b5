//! The `milw` command line.
//!
//! Exit codes: 0 success or valid, 1 negative answer (invalid, unsatisfied,
//! failed check), 2 bad input, 3 cap exceeded, 4 unmet precondition.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::Limits;
use crate::construction::{iterate, lemma_step, verify_step, verify_trace};
use crate::error::{Error, Result};
use crate::format::{
    frame_record, parse_frame, parse_map, parse_model, verdict_record, write_frame, write_map,
    write_model, OutputFormat,
};
use crate::formula::{parse, Formula};
use crate::order::{enumerate_orders, Labeling, OrderKind, Triple};
use crate::proofcheck::{check, parse_proof, soundness_spotcheck, System};
use crate::semantics::{class_valid_upto, extension, Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::NotViolating { .. } | Error::NotAPoset => EXIT_PRECONDITION,
        _ => EXIT_INPUT,
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Mub,
    Sup,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Poset,
    Preorder,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SystemArg {
    Mil,
    MilRes,
}

#[derive(Debug, Parser)]
#[command(name = "milw", version, about = "Finite-model tools for the logics of minimal and least upper bounds")]
struct Cli {
    /// Reading of the fusion modality.
    #[arg(long, global = true, value_enum, default_value = "mub")]
    mode: ModeArg,
    /// Frame class for validate and enumerate.
    #[arg(long, global = true, value_enum, default_value = "poset")]
    kind: KindArg,
    /// Largest frame size for validate.
    #[arg(long, global = true, default_value_t = 4)]
    max_size: usize,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: FormatArg,
    /// Directory for output files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write Graphviz renderings of emitted frames.
    #[arg(long, global = true)]
    emit_dot: bool,
    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Overrides the frame-size cap.
    #[arg(long, env = "MILW_CAP", hide_env_values = true)]
    cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct FormulaArg {
    /// Formula text, or `@path` to read it from a file.
    formula: Option<String>,
    /// File holding the formula; the inline formula wins if both are given.
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a formula in a model.
    Check {
        model: PathBuf,
        #[command(flatten)]
        formula: FormulaArg,
        /// Only report this point.
        #[arg(long)]
        point: Option<String>,
    },
    /// Decide validity over all frames up to --max-size points.
    Validate {
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Apply one extension step to a violating triple `s,t,u`.
    Construct {
        frame: PathBuf,
        #[arg(long, value_parser = parse_triple)]
        triple: [String; 3],
    },
    /// Repeat extension steps on the least violating triple.
    Iterate {
        frame: PathBuf,
        #[arg(long, default_value_t = 8)]
        stages: usize,
    },
    /// Check that a map between two frames is a supremum p-morphism.
    Pmorphism {
        source: PathBuf,
        target: PathBuf,
        map: PathBuf,
    },
    /// Check a proof file.
    Prove {
        proof: PathBuf,
        #[arg(long, value_enum, default_value = "mil")]
        system: SystemArg,
        /// Also test the goal on all posets up to this size.
        #[arg(long)]
        spotcheck: Option<usize>,
    },
    /// List all frames of a given size.
    Enumerate {
        size: usize,
        /// Keep isomorphic copies.
        #[arg(long)]
        labeled: bool,
        /// Emit only this many frames, chosen with --seed.
        #[arg(long)]
        sample: Option<usize>,
    },
}

struct Ctx {
    mode: Mode,
    kind: OrderKind,
    max_size: usize,
    format: OutputFormat,
    out: Option<PathBuf>,
    emit_dot: bool,
    seed: u64,
    limits: Limits,
}

impl Ctx {
    fn ext(&self) -> &'static str {
        match self.format {
            OutputFormat::Text => "txt",
            OutputFormat::Structured => "json",
        }
    }

    fn write_file(&self, name: &str, contents: &str) -> Result<Option<PathBuf>> {
        let Some(dir) = &self.out else {
            return Ok(None);
        };
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, contents)?;
        Ok(Some(path))
    }

    fn record(&self, out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
        writeln!(out, "{}", serde_json::to_string(value)?)?;
        Ok(())
    }
}

fn parse_triple(s: &str) -> std::result::Result<[String; 3], String> {
    let parts: Vec<String> = s.split(',').map(|p| p.trim().to_string()).collect();
    parts
        .try_into()
        .map_err(|_| "expected three comma-separated points s,t,u".to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Format {
        file: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })
}

fn load_formula(arg: &FormulaArg) -> Result<Formula> {
    let text = match (&arg.formula, &arg.formula_file) {
        (Some(f), _) => match f.strip_prefix('@') {
            Some(path) => read(Path::new(path))?,
            None => f.clone(),
        },
        (None, Some(path)) => read(path)?,
        (None, None) => {
            return Err(Error::Format {
                file: "<args>".into(),
                line: 0,
                message: "no formula given".into(),
            })
        }
    };
    Ok(parse(text.trim())?)
}

/// Parses `args` (including the program name), runs the command, and
/// returns the exit code. Output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let limits = match cli.cap {
        Some(cap) => Limits::default().with_size_cap(cap),
        None => Limits::default(),
    };
    let ctx = Ctx {
        mode: match cli.mode {
            ModeArg::Mub => Mode::Mub,
            ModeArg::Sup => Mode::Sup,
        },
        kind: match cli.kind {
            KindArg::Poset => OrderKind::Poset,
            KindArg::Preorder => OrderKind::Preorder,
        },
        max_size: cli.max_size,
        format: match cli.format {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Structured => OutputFormat::Structured,
        },
        out: cli.out,
        emit_dot: cli.emit_dot,
        seed: cli.seed,
        limits,
    };
    let result = match &cli.command {
        Command::Check {
            model,
            formula,
            point,
        } => cmd_check(&ctx, model, formula, point.as_deref(), out),
        Command::Validate { formula } => cmd_validate(&ctx, formula, out),
        Command::Construct { frame, triple } => cmd_construct(&ctx, frame, triple, out),
        Command::Iterate { frame, stages } => cmd_iterate(&ctx, frame, *stages, out),
        Command::Pmorphism {
            source,
            target,
            map,
        } => cmd_pmorphism(&ctx, source, target, map, out),
        Command::Prove {
            proof,
            system,
            spotcheck,
        } => {
            let system = match system {
                SystemArg::Mil => System::Mil,
                SystemArg::MilRes => System::MilRes,
            };
            cmd_prove(&ctx, proof, system, *spotcheck, out)
        }
        Command::Enumerate {
            size,
            labeled,
            sample,
        } => cmd_enumerate(&ctx, *size, *labeled, *sample, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_check(
    ctx: &Ctx,
    path: &Path,
    formula: &FormulaArg,
    point: Option<&str>,
    out: &mut dyn Write,
) -> Result<i32> {
    let model = parse_model(&read(path)?, &path.display().to_string())?;
    let formula = load_formula(formula)?;
    let ext = extension(&model, &formula, ctx.mode);
    let points: Vec<usize> = match point {
        Some(p) => vec![model.frame.index_of(p)?],
        None => (0..model.frame.len()).collect(),
    };
    for &i in &points {
        let name = model.frame.name(i);
        match ctx.format {
            OutputFormat::Text => writeln!(out, "{name}: {}", ext.contains(i))?,
            OutputFormat::Structured => {
                ctx.record(out, &json!({"point": name, "satisfied": ext.contains(i)}))?
            }
        }
    }
    Ok(if points.iter().all(|&i| ext.contains(i)) {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_validate(ctx: &Ctx, formula: &FormulaArg, out: &mut dyn Write) -> Result<i32> {
    let formula = load_formula(formula)?;
    if ctx.max_size > ctx.limits.max_order_size {
        return Err(Error::CapExceeded {
            what: "frame size",
            requested: ctx.max_size,
            cap: ctx.limits.max_order_size,
        });
    }
    let verdict = class_valid_upto(
        ctx.max_size,
        &formula,
        ctx.mode,
        ctx.kind,
        Labeling::UpToIso,
        &ctx.limits,
    )?;
    match ctx.format {
        OutputFormat::Structured => ctx.record(out, &verdict_record(&verdict))?,
        OutputFormat::Text => match &verdict.countermodel {
            None => writeln!(out, "valid")?,
            Some(cm) => {
                writeln!(out, "invalid at point {}", cm.model.frame.name(cm.point))?;
                write!(out, "{}", write_model(&cm.model, OutputFormat::Text))?;
            }
        },
    }
    if let Some(cm) = &verdict.countermodel {
        let name = format!("countermodel.{}", ctx.ext());
        ctx.write_file(&name, &write_model(&cm.model, ctx.format))?;
        if ctx.emit_dot {
            ctx.write_file("countermodel.dot", &cm.model.frame.to_dot())?;
        }
    }
    Ok(if verdict.valid { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_construct(ctx: &Ctx, path: &Path, triple: &[String; 3], out: &mut dyn Write) -> Result<i32> {
    let base = parse_frame(&read(path)?, &path.display().to_string())?;
    let [s, t, u] = [0, 1, 2].map(|k| base.index_of(&triple[k]));
    let step = lemma_step(&base, Triple::new(s?, t?, u?))?;
    let report = verify_step(&step);
    let frame_text = write_frame(&step.extended, ctx.format);
    let map_text = write_map(&step.f);
    let written = ctx.write_file(&format!("extended.{}", ctx.ext()), &frame_text)?;
    ctx.write_file("map.txt", &map_text)?;
    ctx.write_file("report.txt", &report.to_string())?;
    if ctx.emit_dot {
        ctx.write_file("extended.dot", &step.extended.to_dot())?;
    }
    match ctx.format {
        OutputFormat::Structured => ctx.record(
            out,
            &json!({
                "passed": report.passed(),
                "frame": frame_record(&step.extended),
                "map": step.f.map.iter().enumerate()
                    .map(|(x, &y)| (step.extended.name(x).to_string(), base.name(y).to_string()))
                    .collect::<Vec<_>>(),
                "checks": report.checks.iter().map(|c| json!({
                    "name": c.name, "passed": c.passed, "witness": c.witness,
                })).collect::<Vec<_>>(),
            }),
        )?,
        OutputFormat::Text => {
            if written.is_none() {
                write!(out, "{frame_text}\n{map_text}\n")?;
            }
            write!(out, "{report}")?;
        }
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_iterate(ctx: &Ctx, path: &Path, stages: usize, out: &mut dyn Write) -> Result<i32> {
    let base = parse_frame(&read(path)?, &path.display().to_string())?;
    let trace = iterate(&base, stages, &ctx.limits)?;
    let problems = verify_trace(&trace);
    let mut manifest = Vec::new();
    for (n, stage) in trace.stages.iter().enumerate() {
        let file = format!("stage-{n}.{}", ctx.ext());
        ctx.write_file(&file, &write_frame(stage, ctx.format))?;
        if ctx.emit_dot {
            ctx.write_file(&format!("stage-{n}.dot"), &stage.to_dot())?;
        }
        let map_file = format!("map-{n}.txt");
        ctx.write_file(&map_file, &write_map(&trace.composed[n]))?;
        let triple = n.checked_sub(1).map(|k| {
            let (tr, prev) = (trace.processed[k], &trace.stages[k]);
            [prev.name(tr.s), prev.name(tr.t), prev.name(tr.u)].map(String::from)
        });
        manifest.push(json!({
            "stage": n,
            "points": stage.len(),
            "file": file,
            "map": map_file,
            "triple": triple,
        }));
    }
    let record = json!({ "stages": manifest, "problems": problems });
    ctx.write_file("trace.json", &format!("{}\n", serde_json::to_string_pretty(&record)?))?;
    match ctx.format {
        OutputFormat::Structured => ctx.record(out, &record)?,
        OutputFormat::Text => {
            for (n, stage) in trace.stages.iter().enumerate() {
                write!(out, "stage {n}: {} points", stage.len())?;
                if n > 0 {
                    let (tr, prev) = (trace.processed[n - 1], &trace.stages[n - 1]);
                    write!(out, " after ({}, {}, {})", prev.name(tr.s), prev.name(tr.t), prev.name(tr.u))?;
                }
                writeln!(out)?;
            }
            for p in &problems {
                writeln!(out, "problem: {p}")?;
            }
        }
    }
    Ok(if problems.is_empty() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_pmorphism(ctx: &Ctx, src: &Path, tgt: &Path, map: &Path, out: &mut dyn Write) -> Result<i32> {
    let source = parse_frame(&read(src)?, &src.display().to_string())?;
    let target = parse_frame(&read(tgt)?, &tgt.display().to_string())?;
    let map = parse_map(&read(map)?, &map.display().to_string(), &source, &target)?;
    let violations = map.check_all()?;
    match ctx.format {
        OutputFormat::Structured => ctx.record(
            out,
            &json!({
                "pmorphism": violations.is_empty(),
                "violations": violations.iter().map(ToString::to_string).collect::<Vec<_>>(),
            }),
        )?,
        OutputFormat::Text => {
            if violations.is_empty() {
                writeln!(out, "p-morphism")?;
            }
            for v in &violations {
                writeln!(out, "{v}")?;
            }
        }
    }
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_prove(
    ctx: &Ctx,
    path: &Path,
    system: System,
    spotcheck: Option<usize>,
    out: &mut dyn Write,
) -> Result<i32> {
    let proof = parse_proof(&read(path)?)?;
    let report = check(&proof, system, &ctx.limits);
    let spot = match (report.accepted, spotcheck) {
        (true, Some(n)) => Some(soundness_spotcheck(&proof, system, n, &ctx.limits)?),
        _ => None,
    };
    match ctx.format {
        OutputFormat::Structured => ctx.record(
            out,
            &json!({
                "report": report,
                "spotcheck": spot.as_ref().map(verdict_record),
            }),
        )?,
        OutputFormat::Text => {
            writeln!(out, "{report}")?;
            if let Some(v) = &spot {
                match &v.countermodel {
                    None => writeln!(out, "spotcheck: valid")?,
                    Some(cm) => {
                        writeln!(out, "spotcheck: refuted at point {}", cm.model.frame.name(cm.point))?;
                        write!(out, "{}", write_model(&cm.model, OutputFormat::Text))?;
                    }
                }
            }
        }
    }
    let ok = report.accepted && spot.is_none_or(|v| v.valid);
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_enumerate(
    ctx: &Ctx,
    size: usize,
    labeled: bool,
    sample_size: Option<usize>,
    out: &mut dyn Write,
) -> Result<i32> {
    let labeling = if labeled {
        Labeling::Labeled
    } else {
        Labeling::UpToIso
    };
    let stream = enumerate_orders(size, ctx.kind, labeling, ctx.limits.max_order_size)?;
    let total = stream.total();
    let indices: Vec<usize> = match sample_size {
        Some(k) if k < total => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut picked = sample(&mut rng, total, k).into_vec();
            picked.sort_unstable();
            picked
        }
        _ => (0..total).collect(),
    };
    for (k, &i) in indices.iter().enumerate() {
        let frame = stream.get(i);
        let text = write_frame(&frame, ctx.format);
        if ctx.out.is_some() {
            ctx.write_file(&format!("frame-{k:06}.{}", ctx.ext()), &text)?;
            if ctx.emit_dot {
                ctx.write_file(&format!("frame-{k:06}.dot"), &frame.to_dot())?;
            }
        } else {
            if k > 0 && ctx.format == OutputFormat::Text {
                writeln!(out)?;
            }
            write!(out, "{text}")?;
        }
    }
    Ok(EXIT_OK)
}
