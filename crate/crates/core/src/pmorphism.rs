//! Supremum p-morphisms: point maps between posets that preserve and reflect
//! the supremum relation, and hence truth under the supremum reading.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::order::{FinOrder, PointSet};
use crate::semantics::{Compiled, Evaluator, FusionTable, Mode, Model};

/// A total function from the points of `source` to the points of `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderMap {
    pub source: FinOrder,
    pub target: FinOrder,
    pub map: Vec<usize>,
}

impl OrderMap {
    pub fn new(source: FinOrder, target: FinOrder, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::Map(format!(
                "map has {} entries but the source has {} points",
                map.len(),
                source.len()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&y| y >= target.len()) {
            return Err(Error::PointIndex {
                index: bad,
                len: target.len(),
            });
        }
        Ok(OrderMap {
            source,
            target,
            map,
        })
    }

    pub fn identity(order: FinOrder) -> Self {
        let map = (0..order.len()).collect();
        OrderMap {
            source: order.clone(),
            target: order,
            map,
        }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `then ∘ self`: first `self`, then `then`.
    pub fn then(&self, then: &OrderMap) -> Result<OrderMap> {
        if self.target != then.source {
            return Err(Error::Map("composed maps do not meet in the same order".into()));
        }
        let map = self.map.iter().map(|&y| then.map[y]).collect();
        OrderMap::new(self.source.clone(), then.target.clone(), map)
    }

    pub fn preimage(&self, y: usize) -> impl Iterator<Item = usize> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter(move |&(_, &fy)| fy == y)
            .map(|(x, _)| x)
    }

    /// Target points outside the image.
    pub fn check_onto(&self) -> Vec<usize> {
        let mut hit = self.target.empty_set();
        hit.extend(self.map.iter().copied());
        (0..self.target.len()).filter(|&y| !hit.contains(y)).collect()
    }

    /// Violations of: `x' = sup'{y', z'}` implies `f(x') = sup{f(y'), f(z')}`.
    pub fn check_forth(&self) -> Result<Vec<Violation>> {
        let src = SupTable::new(&self.source)?;
        let tgt = SupTable::new(&self.target)?;
        let n = self.source.len();
        let mut out = Vec::new();
        for y in 0..n {
            for z in 0..n {
                if let Some(x) = src.get(y, z) {
                    let image = tgt.get(self.map[y], self.map[z]);
                    if image != Some(self.map[x]) {
                        out.push(Violation::Forth {
                            x: self.source.name(x).into(),
                            y: self.source.name(y).into(),
                            z: self.source.name(z).into(),
                            image_sup: image.map(|s| self.target.name(s).to_string()),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Violations of: `f(x') = sup{y, z}` implies `x' = sup'{y', z'}` for
    /// some `y'`, `z'` over `y`, `z`.
    pub fn check_back(&self) -> Result<Vec<Violation>> {
        let src = SupTable::new(&self.source)?;
        let tgt = SupTable::new(&self.target)?;
        let m = self.target.len();
        let pre = self.preimages();
        let mut out = Vec::new();
        for x in 0..self.source.len() {
            for y in 0..m {
                for z in 0..m {
                    if tgt.get(y, z) != Some(self.map[x]) {
                        continue;
                    }
                    let lifted = pre[y]
                        .iter()
                        .any(|&yp| pre[z].iter().any(|&zp| src.get(yp, zp) == Some(x)));
                    if !lifted {
                        out.push(Violation::Back {
                            x: self.source.name(x).into(),
                            y: self.target.name(y).into(),
                            z: self.target.name(z).into(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Violations of the back condition for the residual: `x = sup{f(y'), z}`
    /// implies `x' = sup'{y', z'}` for some `x'` over `x` and `z'` over `z`.
    pub fn check_back_residual(&self) -> Result<Vec<Violation>> {
        let src = SupTable::new(&self.source)?;
        let tgt = SupTable::new(&self.target)?;
        let pre = self.preimages();
        let mut out = Vec::new();
        for y in 0..self.source.len() {
            for z in 0..self.target.len() {
                let Some(x) = tgt.get(self.map[y], z) else {
                    continue;
                };
                let lifted = pre[z]
                    .iter()
                    .any(|&zp| src.get(y, zp).is_some_and(|xp| self.map[xp] == x));
                if !lifted {
                    out.push(Violation::BackResidual {
                        y: self.source.name(y).into(),
                        x: self.target.name(x).into(),
                        z: self.target.name(z).into(),
                    });
                }
            }
        }
        Ok(out)
    }

    /// Violations of: `y' <= x'` implies `f(y') <= f(x')`.
    pub fn check_order_preserving(&self) -> Vec<Violation> {
        self.source
            .strict_pairs()
            .into_iter()
            .filter(|&(a, b)| !self.target.leq(self.map[a], self.map[b]))
            .map(|(a, b)| Violation::Order {
                below: self.source.name(a).into(),
                above: self.source.name(b).into(),
            })
            .collect()
    }

    /// Onto, forth, back, residual back and order preservation together.
    pub fn check_all(&self) -> Result<Vec<Violation>> {
        let mut out: Vec<Violation> = self
            .check_onto()
            .into_iter()
            .map(|y| Violation::NotOnto {
                missed: self.target.name(y).into(),
            })
            .collect();
        out.extend(self.check_forth()?);
        out.extend(self.check_back()?);
        out.extend(self.check_back_residual()?);
        out.extend(self.check_order_preserving());
        Ok(out)
    }

    fn preimages(&self) -> Vec<Vec<usize>> {
        let mut pre = vec![Vec::new(); self.target.len()];
        for (x, &y) in self.map.iter().enumerate() {
            pre[y].push(x);
        }
        pre
    }

    /// `V'(p) = f⁻¹(V(p))`.
    pub fn pull_back(&self, valuation: &BTreeMap<String, PointSet>) -> BTreeMap<String, PointSet> {
        valuation
            .iter()
            .map(|(p, set)| {
                let mut s = self.source.empty_set();
                s.extend((0..self.source.len()).filter(|&x| set.contains(self.map[x])));
                (p.clone(), s)
            })
            .collect()
    }
}

struct SupTable {
    n: usize,
    sup: Vec<Option<usize>>,
}

impl SupTable {
    fn new(order: &FinOrder) -> Result<Self> {
        let n = order.len();
        let mut sup = vec![None; n * n];
        for t in 0..n {
            for u in t..n {
                let s = order.sup_opt(t, u)?;
                sup[t * n + u] = s;
                sup[u * n + t] = s;
            }
        }
        Ok(SupTable { n, sup })
    }

    fn get(&self, t: usize, u: usize) -> Option<usize> {
        self.sup[t * self.n + u]
    }
}

/// A failed p-morphism condition, with the witnessing points by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotOnto {
        missed: String,
    },
    Forth {
        x: String,
        y: String,
        z: String,
        image_sup: Option<String>,
    },
    Back {
        x: String,
        y: String,
        z: String,
    },
    BackResidual {
        y: String,
        x: String,
        z: String,
    },
    Order {
        below: String,
        above: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotOnto { missed } => write!(f, "onto: {missed} has no preimage"),
            Violation::Forth { x, y, z, image_sup } => match image_sup {
                Some(s) => write!(
                    f,
                    "forth: {x} = sup'{{{y}, {z}}} but the images have supremum {s}, not f({x})"
                ),
                None => write!(
                    f,
                    "forth: {x} = sup'{{{y}, {z}}} but the images have no supremum"
                ),
            },
            Violation::Back { x, y, z } => write!(
                f,
                "back: f({x}) = sup{{{y}, {z}}} but no preimages of {y}, {z} have supremum {x}"
            ),
            Violation::BackResidual { y, x, z } => write!(
                f,
                "residual back: {x} = sup{{f({y}), {z}}} but no preimage of {z} joins {y} into a preimage of {x}"
            ),
            Violation::Order { below, above } => {
                write!(f, "order: {below} <= {above} but f({below}) is not below f({above})")
            }
        }
    }
}

/// A formula/point pair on which source and target disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    pub formula: Formula,
    pub point: String,
    pub source_value: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreservationReport {
    pub formulas: usize,
    pub comparisons: usize,
    pub failures: Vec<Disagreement>,
}

impl PreservationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Pulls `valuation` back along the map and compares every battery formula
/// at every source point with its image.
pub fn truth_preservation_suite(
    m: &OrderMap,
    valuation: &BTreeMap<String, PointSet>,
    battery: &[Formula],
    mode: Mode,
) -> PreservationReport {
    let target = Model {
        frame: m.target.clone(),
        valuation: valuation.clone(),
    };
    let source = Model {
        frame: m.source.clone(),
        valuation: m.pull_back(valuation),
    };
    let src_fus = FusionTable::new(&m.source, mode);
    let tgt_fus = FusionTable::new(&m.target, mode);
    let mut report = PreservationReport::default();
    for phi in battery {
        let code = Compiled::new(phi);
        let src_ext = Evaluator::new(&code, &src_fus).extension(&source);
        let tgt_ext = Evaluator::new(&code, &tgt_fus).extension(&target);
        report.formulas += 1;
        for x in 0..m.source.len() {
            report.comparisons += 1;
            let a = src_ext.contains(x);
            if a != tgt_ext.contains(m.map[x]) {
                report.failures.push(Disagreement {
                    formula: phi.clone(),
                    point: m.source.name(x).into(),
                    source_value: a,
                });
            }
        }
    }
    report
}

/// Options for [`formula_battery`].
#[derive(Clone, Debug)]
pub struct BatterySpec {
    pub letters: Vec<String>,
    pub max_depth: usize,
    pub max_size: usize,
    pub include_residual: bool,
    pub cap: usize,
}

impl Default for BatterySpec {
    fn default() -> Self {
        BatterySpec {
            letters: vec!["p".into(), "q".into()],
            max_depth: 2,
            max_size: 9,
            include_residual: true,
            cap: 20_000,
        }
    }
}

/// All core-connective formulas over the given letters, in order of
/// increasing size, filtered by modal depth and truncated at `cap`.
pub fn formula_battery(spec: &BatterySpec) -> Vec<Formula> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut by_size: Vec<Vec<Formula>> = Vec::new();
    let atoms: Vec<Formula> = std::iter::once(Formula::Falsum)
        .chain(spec.letters.iter().map(|l| Formula::prop(l.as_str())))
        .collect();
    let push = |f: Formula, level: &mut Vec<Formula>, out: &mut Vec<Formula>, seen: &mut HashSet<Formula>| {
        if out.len() < spec.cap && f.modal_depth() <= spec.max_depth && seen.insert(f.clone()) {
            level.push(f.clone());
            out.push(f);
        }
    };
    let mut level0 = Vec::new();
    for a in atoms {
        push(a, &mut level0, &mut out, &mut seen);
    }
    by_size.push(level0);
    for size in 1..=spec.max_size {
        if out.len() >= spec.cap {
            break;
        }
        let mut level = Vec::new();
        for a in by_size[size - 1].clone() {
            push(Formula::not(a), &mut level, &mut out, &mut seen);
        }
        for left in 0..size {
            let right = size - 1 - left;
            for a in &by_size[left] {
                for b in &by_size[right] {
                    if out.len() >= spec.cap {
                        break;
                    }
                    push(Formula::or(a.clone(), b.clone()), &mut level, &mut out, &mut seen);
                    push(Formula::fuse(a.clone(), b.clone()), &mut level, &mut out, &mut seen);
                    if spec.include_residual {
                        push(Formula::residual(a.clone(), b.clone()), &mut level, &mut out, &mut seen);
                    }
                }
            }
        }
        by_size.push(level);
    }
    out
}
