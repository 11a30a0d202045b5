//! Satisfaction under the minimal-upper-bound and supremum readings of the
//! fusion modality, frame validity, and bounded validity over classes of
//! small frames.
//!
//! Formulas are desugared and compiled to a flat instruction list whose
//! registers hold whole extensions (bitsets over the points), so one pass
//! evaluates a formula at every point of a model. The fusion relation of a
//! frame is computed once and shared by every valuation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::order::{enumerate_orders, FinOrder, Labeling, OrderKind, PointSet};

/// Which bound relation interprets the fusion modality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `s` is a (quasi-)minimal upper bound of `{t, u}`.
    Mub,
    /// `s` is the (a quasi-)least upper bound of `{t, u}`.
    Sup,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Mub, Mode::Sup];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Mub => "mub",
            Mode::Sup => "sup",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mub" | "MUB" => Ok(Mode::Mub),
            "sup" | "SUP" => Ok(Mode::Sup),
            _ => Err(format!("unknown mode `{s}` (expected mub or sup)")),
        }
    }
}

/// A frame with a valuation. Letters missing from the valuation are false
/// everywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub frame: FinOrder,
    pub valuation: BTreeMap<String, PointSet>,
}

impl Model {
    pub fn new(frame: FinOrder) -> Self {
        Model {
            frame,
            valuation: BTreeMap::new(),
        }
    }

    /// Sets `V(letter)` to the named points.
    pub fn with(mut self, letter: &str, points: &[&str]) -> Result<Self> {
        let mut set = self.frame.empty_set();
        for p in points {
            set.insert(self.frame.index_of(p)?);
        }
        self.valuation.insert(letter.to_string(), set);
        Ok(self)
    }

    pub fn value(&self, letter: &str) -> PointSet {
        self.valuation
            .get(letter)
            .cloned()
            .unwrap_or_else(|| self.frame.empty_set())
    }
}

/// A failed validity check: the formula is false at `point` of `model`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    pub model: Model,
    pub point: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    pub countermodel: Option<Countermodel>,
}

impl Verdict {
    pub fn valid() -> Self {
        Verdict {
            valid: true,
            countermodel: None,
        }
    }

    pub fn refuted(cm: Countermodel) -> Self {
        Verdict {
            valid: false,
            countermodel: Some(cm),
        }
    }
}

/// `fus(t, u)` for every pair, as packed bitsets.
#[derive(Clone, Debug)]
pub struct FusionTable {
    n: usize,
    words: usize,
    sets: Vec<u64>,
}

impl FusionTable {
    /// On posets this uses the minimal upper bounds or the supremum; on
    /// preorders the quasi-minimal or quasi-least upper bounds.
    pub fn new(frame: &FinOrder, mode: Mode) -> Self {
        let n = frame.len();
        let words = n.div_ceil(64).max(1);
        let mut sets = vec![0u64; n * n * words];
        for t in 0..n {
            for u in 0..n {
                let set = match (frame.is_poset(), mode) {
                    (true, Mode::Mub) => frame.mub_set(t, u).expect("poset"),
                    (true, Mode::Sup) => {
                        let mut s = frame.empty_set();
                        s.extend(frame.sup_opt(t, u).expect("poset"));
                        s
                    }
                    (false, Mode::Mub) => frame.quasi_mub_set(t, u),
                    (false, Mode::Sup) => frame.quasi_sup_set(t, u),
                };
                let base = (t * n + u) * words;
                for s in set.ones() {
                    sets[base + s / 64] |= 1 << (s % 64);
                }
            }
        }
        FusionTable { n, words, sets }
    }

    fn get(&self, t: usize, u: usize) -> &[u64] {
        let base = (t * self.n + u) * self.words;
        &self.sets[base..base + self.words]
    }

    pub fn contains(&self, t: usize, u: usize, s: usize) -> bool {
        self.get(t, u)[s / 64] >> (s % 64) & 1 == 1
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Falsum,
    Letter(usize),
    Not(usize),
    Or(usize, usize),
    Fuse(usize, usize),
    Residual(usize, usize),
}

/// A desugared formula as a hash-consed instruction list; the last
/// instruction is the root.
#[derive(Clone, Debug)]
pub struct Compiled {
    ops: Vec<Op>,
    letters: Vec<String>,
    // smallest letter index each instruction depends on
    min_letter: Vec<usize>,
}

impl Compiled {
    pub fn new(formula: &Formula) -> Self {
        let core = formula.desugar();
        let letters: Vec<String> = core.prop_letters().into_iter().collect();
        let mut c = Compiled {
            ops: Vec::new(),
            letters,
            min_letter: Vec::new(),
        };
        let mut memo = HashMap::new();
        c.emit(&core, &mut memo);
        c
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    fn push(&mut self, op: Op, min_letter: usize) -> usize {
        self.ops.push(op);
        self.min_letter.push(min_letter);
        self.ops.len() - 1
    }

    fn emit(&mut self, f: &Formula, memo: &mut HashMap<Formula, usize>) -> usize {
        if let Some(&r) = memo.get(f) {
            return r;
        }
        let reg = match f {
            Formula::Falsum => self.push(Op::Falsum, usize::MAX),
            Formula::Prop(p) => {
                let i = self.letters.binary_search(p).expect("letter collected");
                self.push(Op::Letter(i), i)
            }
            Formula::Not(a) => {
                let a = self.emit(a, memo);
                self.push(Op::Not(a), self.min_letter[a])
            }
            Formula::Or(a, b) | Formula::Fuse(a, b) | Formula::Residual(a, b) => {
                let (a, b) = (self.emit(a, memo), self.emit(b, memo));
                let dep = self.min_letter[a].min(self.min_letter[b]);
                let op = match f {
                    Formula::Or(..) => Op::Or(a, b),
                    Formula::Fuse(..) => Op::Fuse(a, b),
                    _ => Op::Residual(a, b),
                };
                self.push(op, dep)
            }
            other => unreachable!("desugared formula contains {other:?}"),
        };
        memo.insert(f.clone(), reg);
        reg
    }
}

/// Evaluates a compiled formula over one frame for many valuations.
pub struct Evaluator<'a> {
    code: &'a Compiled,
    fusion: &'a FusionTable,
    n: usize,
    words: usize,
    regs: Vec<u64>,
    full: Vec<u64>,
    scratch: Vec<u64>,
}

fn bits(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w * 64 + b)
        })
    })
}

impl<'a> Evaluator<'a> {
    pub fn new(code: &'a Compiled, fusion: &'a FusionTable) -> Self {
        let n = fusion.n;
        let words = fusion.words;
        let mut full = vec![0u64; words];
        for s in 0..n {
            full[s / 64] |= 1 << (s % 64);
        }
        Evaluator {
            code,
            fusion,
            n,
            words,
            regs: vec![0; code.ops.len() * words],
            full,
            scratch: vec![0; words],
        }
    }

    fn reg(&self, r: usize) -> &[u64] {
        &self.regs[r * self.words..(r + 1) * self.words]
    }

    /// Recomputes every instruction depending on a letter with index at most
    /// `changed`, reading letter extensions from `letter`. Pass
    /// `usize::MAX - 1` or larger to recompute everything.
    fn run(&mut self, changed: usize, letter: &dyn Fn(usize, &mut [u64])) {
        if self.words == 1 {
            return self.run_single_word(changed, letter);
        }
        let w = self.words;
        let mut out = std::mem::take(&mut self.scratch);
        for (r, op) in self.code.ops.iter().enumerate() {
            let dep = self.code.min_letter[r];
            if dep > changed && !(dep == usize::MAX && changed == usize::MAX) {
                continue;
            }
            out.iter_mut().for_each(|x| *x = 0);
            match *op {
                Op::Falsum => {}
                Op::Letter(i) => letter(i, &mut out),
                Op::Not(a) => {
                    for k in 0..w {
                        out[k] = !self.regs[a * w + k] & self.full[k];
                    }
                }
                Op::Or(a, b) => {
                    for k in 0..w {
                        out[k] = self.regs[a * w + k] | self.regs[b * w + k];
                    }
                }
                Op::Fuse(a, b) => {
                    for t in bits(self.reg(a)) {
                        for u in bits(self.reg(b)) {
                            for (o, x) in out.iter_mut().zip(self.fusion.get(t, u)) {
                                *o |= x;
                            }
                        }
                    }
                }
                Op::Residual(a, b) => {
                    let conseq = self.reg(b);
                    for u in 0..self.n {
                        let ok = bits(self.reg(a)).all(|t| {
                            self.fusion
                                .get(t, u)
                                .iter()
                                .zip(conseq)
                                .all(|(x, c)| x & !c == 0)
                        });
                        if ok {
                            out[u / 64] |= 1 << (u % 64);
                        }
                    }
                }
            }
            self.regs[r * w..(r + 1) * w].copy_from_slice(&out);
        }
        self.scratch = out;
    }

    // Same as `run` for frames of at most 64 points.
    fn run_single_word(&mut self, changed: usize, letter: &dyn Fn(usize, &mut [u64])) {
        let n = self.n;
        let full = self.full[0];
        let fus = &self.fusion.sets;
        for (r, op) in self.code.ops.iter().enumerate() {
            let dep = self.code.min_letter[r];
            if dep > changed && !(dep == usize::MAX && changed == usize::MAX) {
                continue;
            }
            let regs = &self.regs;
            let value = match *op {
                Op::Falsum => 0,
                Op::Letter(i) => {
                    let mut out = [0u64];
                    letter(i, &mut out);
                    out[0]
                }
                Op::Not(a) => !regs[a] & full,
                Op::Or(a, b) => regs[a] | regs[b],
                Op::Fuse(a, b) => {
                    let mut out = 0;
                    let (mut ts, us) = (regs[a], regs[b]);
                    while ts != 0 {
                        let t = ts.trailing_zeros() as usize;
                        ts &= ts - 1;
                        let row = &fus[t * n..t * n + n];
                        let mut rest = us;
                        while rest != 0 {
                            out |= row[rest.trailing_zeros() as usize];
                            rest &= rest - 1;
                        }
                    }
                    out
                }
                Op::Residual(a, b) => {
                    let (ants, conseq) = (regs[a], regs[b]);
                    let mut out = 0;
                    for u in 0..n {
                        let mut ts = ants;
                        let mut ok = true;
                        while ts != 0 {
                            let t = ts.trailing_zeros() as usize;
                            ts &= ts - 1;
                            if fus[t * n + u] & !conseq != 0 {
                                ok = false;
                                break;
                            }
                        }
                        if ok {
                            out |= 1 << u;
                        }
                    }
                    out
                }
            };
            self.regs[r] = value;
        }
    }

    fn root(&self) -> &[u64] {
        self.reg(self.code.ops.len() - 1)
    }

    /// Extension of the formula in `model` (letters looked up by name).
    pub fn extension(&mut self, model: &Model) -> PointSet {
        let vals: Vec<PointSet> = self.code.letters.iter().map(|l| model.value(l)).collect();
        self.run(usize::MAX, &|i, out: &mut [u64]| {
            for s in vals[i].ones() {
                out[s / 64] |= 1 << (s % 64);
            }
        });
        let mut set = PointSet::with_capacity(self.n);
        set.extend(bits(self.root()));
        set
    }
}

/// Extension `{s : M, s ⊩ φ}`.
pub fn extension(model: &Model, formula: &Formula, mode: Mode) -> PointSet {
    let code = Compiled::new(formula);
    let fusion = FusionTable::new(&model.frame, mode);
    Evaluator::new(&code, &fusion).extension(model)
}

pub fn satisfies(model: &Model, point: usize, formula: &Formula, mode: Mode) -> Result<bool> {
    model.frame.check_index(point)?;
    Ok(extension(model, formula, mode).contains(point))
}

fn check_budget(n: usize, letters: usize, limits: &Limits) -> Result<()> {
    let bits = n * letters;
    if bits > limits.valuation_bits || bits > 62 {
        return Err(Error::CapExceeded {
            what: "points x letters",
            requested: bits,
            cap: limits.valuation_bits.min(62),
        });
    }
    Ok(())
}

/// Frame validity against a precomputed fusion table.
fn frame_valid_with(frame: &FinOrder, code: &Compiled, fusion: &FusionTable) -> Option<Countermodel> {
    let n = frame.len();
    let k = code.letters.len();
    let mut ev = Evaluator::new(code, fusion);
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let total: u64 = 1 << (n * k);
    for v in 0..total {
        // letters whose bits changed since v - 1: all with index <= changed
        let changed = if v == 0 {
            usize::MAX
        } else {
            v.trailing_zeros() as usize / n.max(1)
        };
        ev.run(changed, &|i, out: &mut [u64]| out[0] = v >> (i * n) & mask);
        let root = ev.root();
        if let Some(point) = (0..n).find(|&s| root[s / 64] >> (s % 64) & 1 == 0) {
            let mut model = Model::new(frame.clone());
            for (i, letter) in code.letters.iter().enumerate() {
                let bitsv = v >> (i * n) & mask;
                model
                    .valuation
                    .insert(letter.clone(), frame.set_of((0..n).filter(|&s| bitsv >> s & 1 == 1)));
            }
            return Some(Countermodel { model, point });
        }
    }
    None
}

/// Checks `φ` under every valuation of its letters and at every point;
/// returns the first counterexample in enumeration order.
///
/// Valuations are enumerated as integers whose bits `i*n .. (i+1)*n` hold the
/// extension of the `i`-th letter (letters sorted by name).
pub fn frame_valid(frame: &FinOrder, formula: &Formula, mode: Mode, limits: &Limits) -> Result<Verdict> {
    let code = Compiled::new(formula);
    check_budget(frame.len(), code.letters.len(), limits)?;
    let fusion = FusionTable::new(frame, mode);
    Ok(match frame_valid_with(frame, &code, &fusion) {
        None => Verdict::valid(),
        Some(cm) => Verdict::refuted(cm),
    })
}

/// Frame validity over every order of the given kind with `1..=max_size`
/// points, smallest first. The earliest countermodel in enumeration order is
/// returned.
pub fn class_valid_upto(
    max_size: usize,
    formula: &Formula,
    mode: Mode,
    kind: OrderKind,
    labeling: Labeling,
    limits: &Limits,
) -> Result<Verdict> {
    let code = Compiled::new(formula);
    check_budget(max_size, code.letters.len(), limits)?;
    for n in 1..=max_size {
        let stream = enumerate_orders(n, kind, labeling, limits.max_order_size)?;
        let found = (0..stream.total()).into_par_iter().find_map_first(|i| {
            let frame = stream.get(i);
            let fusion = FusionTable::new(&frame, mode);
            frame_valid_with(&frame, &code, &fusion)
        });
        if let Some(cm) = found {
            return Ok(Verdict::refuted(cm));
        }
    }
    Ok(Verdict::valid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::order::two_mub_frame;

    fn sample_model() -> Model {
        Model::new(two_mub_frame())
            .with("p", &["y"])
            .unwrap()
            .with("q", &["z"])
            .unwrap()
    }

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn fusion_differs_between_readings() {
        let m = sample_model();
        let x = m.frame.index_of("x").unwrap();
        assert!(satisfies(&m, x, &f("<*> p q"), Mode::Mub).unwrap());
        assert!(!satisfies(&m, x, &f("<*> p q"), Mode::Sup).unwrap());
        for mode in Mode::BOTH {
            for s in 0..4 {
                assert!(satisfies(&m, s, &Formula::Verum, mode).unwrap());
            }
        }
        assert!(satisfies(&m, 9, &Formula::Verum, Mode::Mub).is_err());
    }

    #[test]
    fn residual_into_falsum() {
        let m = sample_model();
        let y = m.frame.index_of("y").unwrap();
        assert!(!satisfies(&m, y, &f("p \\ false"), Mode::Mub).unwrap());
        // z fuses with y only into x and xp, neither of which is a p-point
        let z = m.frame.index_of("z").unwrap();
        assert!(!satisfies(&m, z, &f("p \\ p"), Mode::Mub).unwrap());
        assert!(satisfies(&m, z, &f("p \\ p"), Mode::Sup).unwrap());
    }

    #[test]
    fn extension_examples() {
        let m = sample_model();
        let fr = &m.frame;
        let want = fr.set_of(["y", "x", "xp"].map(|n| fr.index_of(n).unwrap()));
        assert_eq!(extension(&m, &f("<P> p"), Mode::Mub), want);
        assert!(extension(&m, &Formula::Falsum, Mode::Sup).is_clear());
        assert_eq!(extension(&m, &f("p"), Mode::Sup), m.value("p"));
    }

    #[test]
    fn frame_validity_examples() {
        let lim = Limits::default();
        let fr = two_mub_frame();
        let dk = f("(p & <*> q r) -> <*> p q");
        assert!(frame_valid(&fr, &dk, Mode::Sup, &lim).unwrap().valid);

        let dist = f("(<P> p & <P> q) -> <P> (<*> p q)");
        let v = frame_valid(&fr, &dist, Mode::Sup, &lim).unwrap();
        assert!(!v.valid);
        let cm = v.countermodel.unwrap();
        assert!(!satisfies(&cm.model, cm.point, &dist, Mode::Sup).unwrap());
        assert!(frame_valid(&fr, &dist, Mode::Mub, &lim).unwrap().valid);

        let one = FinOrder::discrete(vec!["a".into()]);
        let taut = f("(p -> q) | (q -> p)");
        assert!(frame_valid(&one, &taut, Mode::Mub, &lim).unwrap().valid);
    }

    #[test]
    fn budget_is_enforced() {
        let lim = Limits {
            valuation_bits: 8,
            ..Limits::default()
        };
        let fr = two_mub_frame();
        let r = frame_valid(&fr, &f("p & q & r"), Mode::Mub, &lim);
        assert!(matches!(r, Err(Error::CapExceeded { .. })));
    }
}
