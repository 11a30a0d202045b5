//! The chain-copy extension step and its iteration.
//!
//! Given a poset `P` and a triple `(s, t, u)` where `s` is a minimal but not
//! least upper bound of `{t, u}`, [`lemma_step`] adds a fresh copy of `↓s`
//! sitting directly below the original, seen from below by the closure
//! `G(t, u)`. The result maps back onto `P` by forgetting the copy tags, and
//! in it `s` stops being a minimal upper bound of `{t, u}`. [`verify_step`]
//! re-checks every property the step is supposed to have, and [`iterate`]
//! repeats the step along a fixed enumeration of triples.

use std::fmt;

use serde::Serialize;

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::order::{FinOrder, PointSet, Triple};
use crate::pmorphism::OrderMap;

/// One application of the extension step.
#[derive(Clone, Debug)]
pub struct ExtensionStep {
    pub base: FinOrder,
    pub triple: Triple,
    pub stage: usize,
    /// Base points keep their indices; fresh points follow them.
    pub extended: FinOrder,
    /// Indices (in `extended`) of the copies of `↓s`, in the order of `↓s`.
    pub fresh: Vec<usize>,
    /// Forgets the copy tag: `extended -> base`.
    pub f: OrderMap,
    /// `G(t, u)` in base coordinates.
    pub g_set: PointSet,
}

fn fresh_name(base: &str, stage: usize) -> String {
    format!("{base}.{stage}")
}

/// Applies the step at stage 1. See [`lemma_step_at`].
pub fn lemma_step(base: &FinOrder, triple: Triple) -> Result<ExtensionStep> {
    lemma_step_at(base, triple, 1)
}

/// Extends `base` by a tagged copy `(y, 1)` of every `y <= s`, with
/// `(y, j) <=' (x, i)` iff
/// `i = 0` and `y <= x`; or `j = i = 1` and `y <= x`; or
/// `j = 0`, `i = 1`, `y ∈ G(t, u)` and `x = s`.
///
/// Fresh points are named `<y>.<stage>`.
pub fn lemma_step_at(base: &FinOrder, triple: Triple, stage: usize) -> Result<ExtensionStep> {
    for i in [triple.s, triple.t, triple.u] {
        base.check_index(i)?;
    }
    if !base.is_poset() {
        return Err(Error::NotAPoset);
    }
    let Triple { s, t, u } = triple;
    let not_violating = |reason| Error::NotViolating {
        s: base.name(s).into(),
        t: base.name(t).into(),
        u: base.name(u).into(),
        reason,
    };
    if !base.mub_set(t, u)?.contains(s) {
        return Err(not_violating("s is not a minimal upper bound of {t, u}"));
    }
    if base.sup_opt(t, u)?.is_some() {
        return Err(not_violating("{t, u} has a supremum"));
    }

    let n = base.len();
    let g_set = base.g_closure(t, u)?;
    let copied: Vec<usize> = base.downset(s).ones().collect();
    let total = n + copied.len();

    let mut names = base.names().to_vec();
    for &y in &copied {
        let name = fresh_name(base.name(y), stage);
        if base.index_of(&name).is_ok() {
            return Err(Error::Format {
                file: "<construction>".into(),
                line: 0,
                message: format!("fresh point name `{name}` already in use"),
            });
        }
        names.push(name);
    }
    // (original point, copy tag) for every extended index
    let origin: Vec<(usize, bool)> = (0..n)
        .map(|x| (x, false))
        .chain(copied.iter().map(|&y| (y, true)))
        .collect();

    let mut up = vec![PointSet::with_capacity(total); total];
    for (b, &(y, j)) in origin.iter().enumerate() {
        for (a, &(x, i)) in origin.iter().enumerate() {
            let related = (!i && base.leq(y, x))
                || (j && i && base.leq(y, x))
                || (!j && i && g_set.contains(y) && x == s);
            if related {
                up[b].insert(a);
            }
        }
    }
    let extended = FinOrder::from_up_sets(names, up)?;
    let map = origin.iter().map(|&(x, _)| x).collect();
    let f = OrderMap::new(extended.clone(), base.clone(), map)?;
    Ok(ExtensionStep {
        base: base.clone(),
        triple,
        stage,
        extended,
        fresh: (n..total).collect(),
        f,
        g_set,
    })
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepReport {
    pub checks: Vec<Check>,
}

impl StepReport {
    fn record(&mut self, name: &'static str, witness: Option<String>) {
        self.checks.push(Check {
            name,
            passed: witness.is_none(),
            witness,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for StepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "ok  " } else { "FAIL" };
            write!(f, "{status} {}", c.name)?;
            if let Some(w) = &c.witness {
                write!(f, ": {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn first<I: IntoIterator<Item = String>>(it: I) -> Option<String> {
    it.into_iter().next()
}

/// Re-checks a step from scratch: the poset axioms for the extended
/// relation, that it is exactly the three-rule relation, the five
/// conditions (with the finite cardinality bound `|P'| <= 2|P|`), that the
/// projection is an onto p-morphism satisfying the residual back condition
/// and preserving order, and that every member of `G(t, u)` lies strictly
/// below `s`.
pub fn verify_step(step: &ExtensionStep) -> StepReport {
    let mut r = StepReport::default();
    let base = &step.base;
    let ext = &step.extended;
    let n = base.len();
    let total = ext.len();
    let Triple { s, t, u } = step.triple;
    let nm = |i: usize| ext.name(i).to_string();

    // (a) poset axioms, straight from the relation
    r.record(
        "poset.reflexive",
        first((0..total).filter(|&a| !ext.leq(a, a)).map(nm)),
    );
    r.record(
        "poset.transitive",
        first((0..total).flat_map(|a| {
            (0..total).flat_map(move |b| {
                (0..total)
                    .filter(move |&c| ext.leq(a, b) && ext.leq(b, c) && !ext.leq(a, c))
                    .map(move |c| format!("{} <= {} <= {}", nm(a), nm(b), nm(c)))
            })
        })),
    );
    r.record(
        "poset.antisymmetric",
        first((0..total).flat_map(|a| {
            (a + 1..total)
                .filter(move |&b| ext.leq(a, b) && ext.leq(b, a))
                .map(move |b| format!("{} and {} are mutually below", nm(a), nm(b)))
        })),
    );

    // the relation is the one given by the three rules
    let g_ok = base.is_poset() && base.g_closure(t, u).ok().as_ref() == Some(&step.g_set);
    r.record(
        "g.closure",
        (!g_ok).then(|| "stored G(t, u) differs from the closure of the base".to_string()),
    );
    let origin = |i: usize| -> (usize, bool) {
        if i < n {
            (i, false)
        } else {
            (step.f.apply(i), true)
        }
    };
    let rule = |b: usize, a: usize| {
        let ((y, j), (x, i)) = (origin(b), origin(a));
        (!i && base.leq(y, x)) || (j && i && base.leq(y, x)) || (!j && i && step.g_set.contains(y) && x == s)
    };
    r.record(
        "relation.rules",
        first((0..total).flat_map(|b| {
            (0..total)
                .filter(move |&a| ext.leq(b, a) != rule(b, a))
                .map(move |a| format!("{} <=' {} is {} but the rules say {}", nm(b), nm(a), ext.leq(b, a), rule(b, a)))
        })),
    );

    // 1. base points kept, copy of ↓s added, |P'| <= 2|P|
    let kept = total >= n && (0..n).all(|i| ext.name(i) == base.name(i));
    r.record(
        "cond1.superset",
        (!kept).then(|| "base points are not a prefix of the extension".to_string()),
    );
    let expected = n + base.downset(s).count_ones(..);
    let card_ok = total == expected && total <= 2 * n && step.fresh == (n..total).collect::<Vec<_>>();
    r.record(
        "cond1.cardinality",
        (!card_ok).then(|| format!("|P'| = {total}, expected {expected} (|P| = {n})")),
    );

    // 2. the extension restricts to the base order
    r.record(
        "cond2.restriction",
        first((0..n.min(total)).flat_map(|a| {
            (0..n.min(total))
                .filter(move |&b| ext.leq(a, b) != base.leq(a, b))
                .map(move |b| format!("{} <= {} differs between P and P'", nm(a), nm(b)))
        })),
    );

    // 3. identity on the base
    r.record(
        "cond3.identity",
        first((0..n.min(total)).filter(|&x| step.f.apply(x) != x).map(nm)),
    );

    let ext_poset = ext.is_poset() && base.is_poset();
    let need_poset = || Some("extended relation is not a partial order".to_string());

    // 4. existing suprema survive
    r.record(
        "cond4.sup_preserved",
        if !ext_poset {
            need_poset()
        } else {
            first((0..n).flat_map(|y| {
                (y..n).filter_map(move |z| {
                    let sup = base.sup_opt(y, z).ok().flatten()?;
                    let sup2 = ext.sup_opt(y, z).ok().flatten();
                    (sup2 != Some(sup)).then(|| {
                        format!("{} = sup{{{}, {}}} but not in P'", nm(sup), nm(y), nm(z))
                    })
                })
            }))
        },
    );

    // 5. s is no longer a minimal upper bound of {t, u}
    r.record(
        "cond5.s_not_mub",
        if !ext_poset {
            need_poset()
        } else {
            let still = ext.mub_set(t, u).map(|m| m.contains(s)).unwrap_or(true);
            still.then(|| format!("{} is still in mub'{{{}, {}}}", nm(s), nm(t), nm(u)))
        },
    );

    // (c) onto p-morphism, residual back, order preservation
    let onto = step.f.check_onto();
    r.record(
        "pmorphism.onto",
        first(onto.into_iter().map(|y| base.name(y).to_string())),
    );
    let checks: [(&'static str, fn(&OrderMap) -> Result<Vec<crate::pmorphism::Violation>>); 3] = [
        ("pmorphism.forth", OrderMap::check_forth),
        ("pmorphism.back", OrderMap::check_back),
        ("pmorphism.back_residual", OrderMap::check_back_residual),
    ];
    for (name, check) in checks {
        let witness = if !ext_poset {
            need_poset()
        } else {
            match check(&step.f) {
                Ok(v) => first(v.into_iter().map(|v| v.to_string())),
                Err(e) => Some(e.to_string()),
            }
        };
        r.record(name, witness);
    }
    r.record(
        "pmorphism.order_preserving",
        first(step.f.check_order_preserving().into_iter().map(|v| v.to_string())),
    );

    // every member of G(t, u) is strictly below s
    r.record(
        "g.below_s",
        first(
            step.g_set
                .ones()
                .filter(|&y| !base.lt(y, s))
                .map(|y| format!("{} is in G but not below {}", base.name(y), base.name(s))),
        ),
    );
    r
}

/// Record of repeated extension steps.
///
/// Stage `n + 1` extends stage `n`, whose points are its first `|P_n|`
/// points, so triples and point indices stay valid in later stages.
#[derive(Clone, Debug)]
pub struct StageTrace {
    pub stages: Vec<FinOrder>,
    /// `processed[n]` was applied to stage `n`.
    pub processed: Vec<Triple>,
    /// `step_maps[n]`: stage `n + 1` onto stage `n`.
    pub step_maps: Vec<OrderMap>,
    /// `composed[n]`: stage `n` onto stage 0.
    pub composed: Vec<OrderMap>,
    /// Stage at which each point of the last stage was added.
    pub birth: Vec<usize>,
}

impl StageTrace {
    pub fn last(&self) -> &FinOrder {
        self.stages.last().expect("trace has stage 0")
    }
}

fn least_violating(order: &FinOrder, birth: &[usize]) -> Result<Option<Triple>> {
    let key = |tr: &Triple| {
        let born = birth[tr.s].max(birth[tr.t]).max(birth[tr.u]);
        (born, order.name(tr.s), order.name(tr.t), order.name(tr.u))
    };
    Ok(order
        .violating_triples()?
        .into_iter()
        .min_by(|a, b| key(a).cmp(&key(b))))
}

/// Runs up to `k` extension steps from `base`, each time on the least
/// violating triple ordered by the latest birth stage of its points, then by
/// point names. Stops early when no violating triple remains.
pub fn iterate(base: &FinOrder, k: usize, limits: &Limits) -> Result<StageTrace> {
    if k > limits.stage_cap {
        return Err(Error::CapExceeded {
            what: "stages",
            requested: k,
            cap: limits.stage_cap,
        });
    }
    if !base.is_poset() {
        return Err(Error::NotAPoset);
    }
    let mut trace = StageTrace {
        stages: vec![base.clone()],
        processed: Vec::new(),
        step_maps: Vec::new(),
        composed: vec![OrderMap::identity(base.clone())],
        birth: vec![0; base.len()],
    };
    for stage in 1..=k {
        let current = trace.last().clone();
        let Some(triple) = least_violating(&current, &trace.birth)? else {
            break;
        };
        let step = lemma_step_at(&current, triple, stage)?;
        trace.birth.extend(std::iter::repeat_n(stage, step.fresh.len()));
        let g = step.f.then(trace.composed.last().expect("stage 0 map"))?;
        trace.processed.push(triple);
        trace.stages.push(step.extended);
        trace.step_maps.push(step.f);
        trace.composed.push(g);
    }
    Ok(trace)
}

/// Whether every processed triple `(s, t, u)` has `s` outside
/// `mub{t, u}` at every later stage.
pub fn processed_triples_resolved(trace: &StageTrace) -> bool {
    first_recurrence(trace).is_none()
}

/// The first `(processed index, later stage)` where a processed triple is a
/// minimal-upper-bound triple again.
pub fn first_recurrence(trace: &StageTrace) -> Option<(usize, usize)> {
    for (n, tr) in trace.processed.iter().enumerate() {
        for (m, stage) in trace.stages.iter().enumerate().skip(n + 1) {
            let back = match stage.mub_set(tr.t, tr.u) {
                Ok(set) => set.contains(tr.s),
                Err(_) => true,
            };
            if back {
                return Some((n, m));
            }
        }
    }
    None
}

/// Per-stage obligations of a trace: every composed map is an onto
/// p-morphism (with residual back), equals the composition of the step
/// maps, each stage restricts to its predecessor, and processed triples
/// never recur.
pub fn verify_trace(trace: &StageTrace) -> Vec<String> {
    let mut out = Vec::new();
    for (n, g) in trace.composed.iter().enumerate() {
        match g.check_all() {
            Ok(v) => out.extend(v.into_iter().map(|v| format!("g_{n}: {v}"))),
            Err(e) => out.push(format!("g_{n}: {e}")),
        }
        if g.source != trace.stages[n] || g.target != trace.stages[0] {
            out.push(format!("g_{n}: wrong source or target"));
        }
    }
    let mut acc = OrderMap::identity(trace.stages[0].clone());
    for (n, f) in trace.step_maps.iter().enumerate() {
        match f.then(&acc) {
            Ok(next) => acc = next,
            Err(e) => {
                out.push(format!("f_{}: {e}", n + 1));
                break;
            }
        }
        if trace.composed.get(n + 1) != Some(&acc) {
            out.push(format!("g_{} is not f_1 o ... o f_{}", n + 1, n + 1));
        }
    }
    for n in 0..trace.stages.len().saturating_sub(1) {
        let prev = &trace.stages[n];
        if trace.stages[n + 1].restrict_prefix(prev.len()) != *prev {
            out.push(format!("stage {} does not restrict to stage {n}", n + 1));
        }
    }
    if let Some((n, m)) = first_recurrence(trace) {
        let tr = trace.processed[n];
        let st = &trace.stages[n];
        out.push(format!(
            "({}, {}, {}) processed at stage {n} is a minimal-upper-bound triple again at stage {m}",
            st.name(tr.s),
            st.name(tr.t),
            st.name(tr.u)
        ));
    }
    out
}
