//! Hilbert-style proofs for the supremum logic and its extension with the
//! residual, and a line-by-line checker.
//!
//! Lines are compared after desugaring, so `<P> p` and `<*> p true` are the
//! same formula to the checker. Classical reasoning enters only through
//! `Taut` lines, which are verified by truth table with every modal
//! subformula treated as an atom.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::formula::{parse, Formula};
use crate::order::{Labeling, OrderKind};
use crate::semantics::{class_valid_upto, Mode, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum System {
    /// Axioms Re., 4, Co., Dk. over the normal base for the binary modality.
    Mil,
    /// `Mil` plus L1, L2, K for the residual, and left necessitation.
    MilRes,
}

impl FromStr for System {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mil" => Ok(System::Mil),
            "mil-res" | "mil_res" | "milres" => Ok(System::MilRes),
            _ => Err(format!("unknown system `{s}` (expected mil or mil-res)")),
        }
    }
}

/// Axiom schemas, stated over the letters `p`, `q`, `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Schema {
    Re,
    Four,
    Co,
    Dk,
    /// `<*>(p | q) r <-> <*> p r | <*> q r`
    NormL,
    /// `<*> r (p | q) <-> <*> r p | <*> r q`
    NormR,
    /// `<*> false p <-> false`
    BotL,
    /// `<*> p false <-> false`
    BotR,
    L1,
    L2,
    /// `p \ (q -> r) -> (p \ q -> p \ r)`
    KRes,
}

impl Schema {
    pub const ALL: [Schema; 11] = [
        Schema::Re,
        Schema::Four,
        Schema::Co,
        Schema::Dk,
        Schema::NormL,
        Schema::NormR,
        Schema::BotL,
        Schema::BotR,
        Schema::L1,
        Schema::L2,
        Schema::KRes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schema::Re => "Re",
            Schema::Four => "4",
            Schema::Co => "Co",
            Schema::Dk => "Dk",
            Schema::NormL => "NormL",
            Schema::NormR => "NormR",
            Schema::BotL => "BotL",
            Schema::BotR => "BotR",
            Schema::L1 => "L1",
            Schema::L2 => "L2",
            Schema::KRes => "K\\",
        }
    }

    pub fn from_name(name: &str) -> Option<Schema> {
        Schema::ALL.into_iter().find(|s| s.name() == name)
    }

    fn text(self) -> &'static str {
        match self {
            Schema::Re => "p & q -> <*> p q",
            Schema::Four => "<P> <P> p -> <P> p",
            Schema::Co => "<*> p q -> <*> q p",
            Schema::Dk => "(p & <*> q r) -> <*> p q",
            Schema::NormL => "(<*> (p | q) r -> <*> p r | <*> q r) & (<*> p r | <*> q r -> <*> (p | q) r)",
            Schema::NormR => "(<*> r (p | q) -> <*> r p | <*> r q) & (<*> r p | <*> r q -> <*> r (p | q))",
            Schema::BotL => "(<*> false p -> false) & (false -> <*> false p)",
            Schema::BotR => "(<*> p false -> false) & (false -> <*> p false)",
            Schema::L1 => "<*> p (p \\ q) -> q",
            Schema::L2 => "p -> q \\ <*> p q",
            Schema::KRes => "p \\ (q -> r) -> (p \\ q -> p \\ r)",
        }
    }

    pub fn formula(self) -> Formula {
        parse(self.text()).expect("schema text parses")
    }

    pub fn allowed_in(self, system: System) -> bool {
        match self {
            Schema::L1 | Schema::L2 | Schema::KRes => system == System::MilRes,
            _ => true,
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a line holds. Line references are 0-based and must point backwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Axiom {
        schema: Schema,
        subst: BTreeMap<String, Formula>,
    },
    /// From `A` (first) and `A -> B` (second) infer `B`.
    ModusPonens(usize, usize),
    /// From `a -> b` infer `<*> a c -> <*> b c`.
    MonoLeft(usize),
    /// From `a -> b` infer `<*> c a -> <*> c b`.
    MonoRight(usize),
    /// From `φ` infer `ψ \ φ`.
    LeftNec {
        premise: usize,
        antecedent: Formula,
    },
    /// A classical tautology.
    Taut,
}

impl Justification {
    pub fn references(&self) -> Vec<usize> {
        match self {
            Justification::ModusPonens(a, b) => vec![*a, *b],
            Justification::MonoLeft(a) | Justification::MonoRight(a) => vec![*a],
            Justification::LeftNec { premise, .. } => vec![*premise],
            Justification::Axiom { .. } | Justification::Taut => vec![],
        }
    }

    fn map_references(&mut self, f: impl Fn(usize) -> usize) {
        match self {
            Justification::ModusPonens(a, b) => {
                *a = f(*a);
                *b = f(*b);
            }
            Justification::MonoLeft(a) | Justification::MonoRight(a) => *a = f(*a),
            Justification::LeftNec { premise, .. } => *premise = f(*premise),
            Justification::Axiom { .. } | Justification::Taut => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    pub lines: Vec<ProofLine>,
    pub goal: Formula,
}

impl Proof {
    /// A proof whose goal is its last line.
    pub fn new(lines: Vec<ProofLine>) -> Result<Proof> {
        let goal = lines
            .last()
            .map(|l| l.formula.clone())
            .ok_or_else(|| Error::Proof("a proof needs at least one line".into()))?;
        Ok(Proof { lines, goal })
    }

    /// Removes line `i`, renumbering later references. Fails if a later line
    /// cites it.
    pub fn remove_line(&self, i: usize) -> Result<Proof> {
        if self.lines[i + 1..]
            .iter()
            .any(|l| l.justification.references().contains(&i))
        {
            return Err(Error::Proof(format!("line {} is referenced", i + 1)));
        }
        let mut lines = self.lines.clone();
        lines.remove(i);
        for l in lines.iter_mut().skip(i) {
            l.justification.map_references(|r| if r > i { r - 1 } else { r });
        }
        Ok(Proof {
            lines,
            goal: self.goal.clone(),
        })
    }
}

/// Where and why checking stopped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based line number; one past the last line for a goal mismatch.
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProofReport {
    pub accepted: bool,
    pub lines: usize,
    pub rejection: Option<Rejection>,
}

impl fmt::Display for ProofReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rejection {
            None => write!(f, "accepted ({} lines)", self.lines),
            Some(r) => write!(f, "rejected at line {}: {}", r.line, r.reason),
        }
    }
}

fn as_implication(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        Formula::Or(a, b) => match a.as_ref() {
            Formula::Not(x) => Some((x.as_ref(), b.as_ref())),
            _ => None,
        },
        _ => None,
    }
}

fn as_fuse(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        Formula::Fuse(a, b) => Some((a.as_ref(), b.as_ref())),
        _ => None,
    }
}

/// Truth-table check with `Prop`, `Fuse` and `Residual` subformulas as atoms.
/// Expects a desugared formula.
pub fn is_tautology(core: &Formula, max_atoms: usize) -> Result<bool, String> {
    fn atoms<'a>(f: &'a Formula, out: &mut HashMap<&'a Formula, usize>) {
        match f {
            Formula::Falsum => {}
            Formula::Not(a) => atoms(a, out),
            Formula::Or(a, b) => {
                atoms(a, out);
                atoms(b, out);
            }
            other => {
                let k = out.len();
                out.entry(other).or_insert(k);
            }
        }
    }
    fn eval(f: &Formula, atoms: &HashMap<&Formula, usize>, row: u64) -> bool {
        match f {
            Formula::Falsum => false,
            Formula::Not(a) => !eval(a, atoms, row),
            Formula::Or(a, b) => eval(a, atoms, row) || eval(b, atoms, row),
            other => row >> atoms[other] & 1 == 1,
        }
    }
    let mut table = HashMap::new();
    atoms(core, &mut table);
    if table.len() > max_atoms {
        return Err(format!(
            "{} atoms exceed the truth-table cap of {max_atoms}",
            table.len()
        ));
    }
    Ok((0..1u64 << table.len()).all(|row| eval(core, &table, row)))
}

fn check_line(
    proof: &Proof,
    i: usize,
    core: &[Formula],
    system: System,
    limits: &Limits,
) -> Result<(), String> {
    let line = &proof.lines[i];
    let here = &core[i];
    for r in line.justification.references() {
        if r >= i {
            return Err(format!("reference to line {} does not point backwards", r + 1));
        }
    }
    match &line.justification {
        Justification::Axiom { schema, subst } => {
            if !schema.allowed_in(system) {
                return Err(format!("axiom {schema} is not part of this system"));
            }
            let inst = schema.formula().substitute(subst).desugar();
            if inst != *here {
                return Err(format!("not the instance of {schema} under the given substitution (expected {inst})"));
            }
        }
        Justification::ModusPonens(a, imp) => {
            let Some((ante, cons)) = as_implication(&core[*imp]) else {
                return Err(format!("line {} is not an implication", imp + 1));
            };
            if *ante != core[*a] {
                return Err(format!(
                    "antecedent of line {} does not match line {}",
                    imp + 1,
                    a + 1
                ));
            }
            if cons != here {
                return Err(format!("consequent of line {} does not match this line", imp + 1));
            }
        }
        Justification::MonoLeft(prem) | Justification::MonoRight(prem) => {
            let left = matches!(line.justification, Justification::MonoLeft(_));
            let Some((a, b)) = as_implication(&core[*prem]) else {
                return Err(format!("line {} is not an implication", prem + 1));
            };
            let shape = as_implication(here)
                .and_then(|(x, y)| Some((as_fuse(x)?, as_fuse(y)?)));
            let Some(((x1, x2), (y1, y2))) = shape else {
                return Err("not of the form <*> _ _ -> <*> _ _".into());
            };
            let ok = if left {
                x1 == a && y1 == b && x2 == y2
            } else {
                x2 == a && y2 == b && x1 == y1
            };
            if !ok {
                return Err(format!("not a monotonicity instance of line {}", prem + 1));
            }
        }
        Justification::LeftNec {
            premise,
            antecedent,
        } => {
            if system != System::MilRes {
                return Err("left necessitation needs the residual system".into());
            }
            let want = Formula::residual(antecedent.desugar(), core[*premise].clone());
            if want != *here {
                return Err(format!("not of the form ψ \\ (line {})", premise + 1));
            }
        }
        Justification::Taut => match is_tautology(here, limits.taut_atoms) {
            Ok(true) => {}
            Ok(false) => return Err("not a tautology".into()),
            Err(e) => return Err(e),
        },
    }
    Ok(())
}

/// Checks every line in order and stops at the first unjustified one.
pub fn check(proof: &Proof, system: System, limits: &Limits) -> ProofReport {
    let core: Vec<Formula> = proof.lines.iter().map(|l| l.formula.desugar()).collect();
    let reject = |line, reason| ProofReport {
        accepted: false,
        lines: proof.lines.len(),
        rejection: Some(Rejection { line, reason }),
    };
    if proof.lines.is_empty() {
        return reject(1, "empty proof".into());
    }
    for i in 0..proof.lines.len() {
        if let Err(reason) = check_line(proof, i, &core, system, limits) {
            return reject(i + 1, reason);
        }
    }
    if core.last() != Some(&proof.goal.desugar()) {
        return reject(proof.lines.len() + 1, "last line is not the goal".into());
    }
    ProofReport {
        accepted: true,
        lines: proof.lines.len(),
        rejection: None,
    }
}

/// Checks the proof, then tests its goal for validity on all posets up to
/// `n` points (up to isomorphism) under both readings. The first
/// countermodel found is returned as an invalid verdict.
pub fn soundness_spotcheck(proof: &Proof, system: System, n: usize, limits: &Limits) -> Result<Verdict> {
    let report = check(proof, system, limits);
    if !report.accepted {
        return Err(Error::Proof(report.to_string()));
    }
    for mode in Mode::BOTH {
        let v = class_valid_upto(n, &proof.goal, mode, OrderKind::Poset, Labeling::UpToIso, limits)?;
        if !v.valid {
            return Ok(v);
        }
    }
    Ok(Verdict::valid())
}

/// One line of a proof file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRecord {
    pub formula: String,
    pub rule: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refs: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subst: BTreeMap<String, String>,
}

impl LineRecord {
    /// Converts a record with 1-based `refs`.
    pub fn to_line(&self, lineno: usize) -> Result<ProofLine> {
        let bad = |msg: String| Error::Proof(format!("line {lineno}: {msg}"));
        let formula = parse(&self.formula).map_err(|e| bad(e.to_string()))?;
        let refs: Vec<usize> = self
            .refs
            .iter()
            .map(|&r| r.checked_sub(1).ok_or_else(|| bad("references are 1-based".into())))
            .collect::<Result<_>>()?;
        let arity = |k: usize| {
            if refs.len() == k {
                Ok(())
            } else {
                Err(bad(format!("rule {} takes {k} reference(s)", self.rule)))
            }
        };
        let justification = match self.rule.as_str() {
            "MP" => {
                arity(2)?;
                Justification::ModusPonens(refs[0], refs[1])
            }
            "MonoL" => {
                arity(1)?;
                Justification::MonoLeft(refs[0])
            }
            "MonoR" => {
                arity(1)?;
                Justification::MonoRight(refs[0])
            }
            "N" => {
                arity(1)?;
                let Formula::Residual(ante, _) = &formula else {
                    return Err(bad("rule N concludes a formula of the form ψ \\ φ".into()));
                };
                Justification::LeftNec {
                    premise: refs[0],
                    antecedent: ante.as_ref().clone(),
                }
            }
            "Taut" => {
                arity(0)?;
                Justification::Taut
            }
            name => {
                let schema =
                    Schema::from_name(name).ok_or_else(|| bad(format!("unknown rule `{name}`")))?;
                arity(0)?;
                let subst = self
                    .subst
                    .iter()
                    .map(|(k, v)| {
                        parse(v)
                            .map(|f| (k.clone(), f))
                            .map_err(|e| bad(format!("substitution for {k}: {e}")))
                    })
                    .collect::<Result<_>>()?;
                Justification::Axiom { schema, subst }
            }
        };
        Ok(ProofLine {
            formula,
            justification,
        })
    }

    pub fn from_line(line: &ProofLine) -> LineRecord {
        let refs = line.justification.references().iter().map(|r| r + 1).collect();
        let (rule, subst) = match &line.justification {
            Justification::Axiom { schema, subst } => (
                schema.name().to_string(),
                subst.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
            ),
            Justification::ModusPonens(..) => ("MP".into(), BTreeMap::new()),
            Justification::MonoLeft(_) => ("MonoL".into(), BTreeMap::new()),
            Justification::MonoRight(_) => ("MonoR".into(), BTreeMap::new()),
            Justification::LeftNec { .. } => ("N".into(), BTreeMap::new()),
            Justification::Taut => ("Taut".into(), BTreeMap::new()),
        };
        LineRecord {
            formula: line.formula.to_string(),
            rule,
            refs,
            subst,
        }
    }
}

/// Reads a proof file: one JSON object per non-blank line. The goal is the
/// last line.
pub fn parse_proof(text: &str) -> Result<Proof> {
    let mut lines = Vec::new();
    for raw in text.lines() {
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with("//") {
            continue;
        }
        let rec: LineRecord = serde_json::from_str(raw)
            .map_err(|e| Error::Proof(format!("line {}: {e}", lines.len() + 1)))?;
        lines.push(rec.to_line(lines.len() + 1)?);
    }
    Proof::new(lines)
}

pub fn write_proof(proof: &Proof) -> String {
    let mut out = String::new();
    for l in &proof.lines {
        out.push_str(&serde_json::to_string(&LineRecord::from_line(l)).expect("serializable"));
        out.push('\n');
    }
    out
}

/// The proofs shipped with the crate: `(name, system, proof file text)`.
pub fn bundled_corpus() -> Vec<(&'static str, System, &'static str)> {
    vec![
        ("commutativity", System::Mil, include_str!("../proofs/commutativity.jsonl")),
        ("past_reflexive", System::Mil, include_str!("../proofs/past_reflexive.jsonl")),
        ("past_transitive", System::Mil, include_str!("../proofs/past_transitive.jsonl")),
        ("past_monotone", System::Mil, include_str!("../proofs/past_monotone.jsonl")),
        ("residual_l2", System::MilRes, include_str!("../proofs/residual_l2.jsonl")),
        ("left_nec", System::MilRes, include_str!("../proofs/left_nec.jsonl")),
    ]
}
