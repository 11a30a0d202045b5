//! Finite preorders and partial orders, together with the bound operations
//! the fusion modality is defined from.

mod enumerate;

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{
    canonical_code, enumerate_orders, is_canonical, Labeling, OrderKind, OrderStream, MAX_ENUM_POINTS,
};

/// A set of point indices.
pub type PointSet = FixedBitSet;

/// A point triple `(s, t, u)`, read as "`s` is an upper bound of `{t, u}`".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub s: usize,
    pub t: usize,
    pub u: usize,
}

impl Triple {
    pub fn new(s: usize, t: usize, u: usize) -> Self {
        Triple { s, t, u }
    }
}

/// A finite reflexive and transitive relation over named points.
///
/// Rows are stored twice, as up-sets and as down-sets, so both directions of
/// the order are a single bitset lookup.
#[derive(Clone, PartialEq, Eq)]
pub struct FinOrder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    up: Vec<PointSet>,
    down: Vec<PointSet>,
    is_poset: bool,
}

impl fmt::Debug for FinOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = (0..self.len())
            .flat_map(|i| {
                self.up[i]
                    .ones()
                    .filter(move |&j| j != i)
                    .map(move |j| format!("{}<={}", self.names[i], self.names[j]))
            })
            .collect();
        f.debug_struct("FinOrder")
            .field("points", &self.names)
            .field("leq", &pairs)
            .field("is_poset", &self.is_poset)
            .finish()
    }
}

fn empty_set(n: usize) -> PointSet {
    FixedBitSet::with_capacity(n)
}

impl FinOrder {
    /// Checks that `relation` (row `i`, column `j` meaning `i <= j`) is a
    /// preorder and records whether it is also antisymmetric.
    pub fn validate(names: Vec<String>, relation: &[Vec<bool>]) -> Result<FinOrder> {
        let n = names.len();
        if relation.len() != n || relation.iter().any(|row| row.len() != n) {
            return Err(Error::Format {
                file: "<relation>".into(),
                line: 0,
                message: format!("relation must be a {n}x{n} matrix"),
            });
        }
        let mut up = vec![empty_set(n); n];
        for (i, row) in relation.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if b {
                    up[i].insert(j);
                }
            }
        }
        Self::from_up_sets(names, up)
    }

    /// Like [`FinOrder::validate`] but from explicit `(below, above)` pairs;
    /// reflexive pairs are added, transitive ones are not.
    pub fn from_pairs(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<FinOrder> {
        let n = names.len();
        let mut up = vec![empty_set(n); n];
        for (i, row) in up.iter_mut().enumerate() {
            row.insert(i);
        }
        for &(a, b) in pairs {
            for x in [a, b] {
                if x >= n {
                    return Err(Error::PointIndex { index: x, len: n });
                }
            }
            up[a].insert(b);
        }
        Self::from_up_sets(names, up)
    }

    /// Builds an order from its up-set rows (`up[i]` holds every `j` with `i <= j`).
    pub fn from_up_sets(names: Vec<String>, up: Vec<PointSet>) -> Result<FinOrder> {
        let n = names.len();
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Format {
                    file: "<relation>".into(),
                    line: 0,
                    message: format!("duplicate point name `{name}`"),
                });
            }
        }
        let up: Vec<PointSet> = up
            .into_iter()
            .map(|mut row| {
                row.grow(n);
                row
            })
            .collect();
        if let Some(i) = (0..n).find(|&i| !up[i].contains(i)) {
            return Err(Error::NotReflexive(names[i].clone()));
        }
        for i in 0..n {
            for j in up[i].ones() {
                if !up[j].is_subset(&up[i]) {
                    let k = up[j].difference(&up[i]).next().expect("nonempty difference");
                    return Err(Error::NotTransitive(
                        names[i].clone(),
                        names[j].clone(),
                        names[k].clone(),
                    ));
                }
            }
        }
        let mut down = vec![empty_set(n); n];
        for i in 0..n {
            for j in up[i].ones() {
                down[j].insert(i);
            }
        }
        let is_poset = (0..n).all(|i| up[i].intersection(&down[i]).count() == 1);
        Ok(FinOrder {
            names,
            index,
            up,
            down,
            is_poset,
        })
    }

    /// The discrete order on the given points.
    pub fn discrete(names: Vec<String>) -> FinOrder {
        Self::from_pairs(names, &[]).expect("identity relation is a partial order")
    }

    /// Chain `0 <= 1 <= ... <= n-1`.
    pub fn chain(names: Vec<String>) -> FinOrder {
        let n = names.len();
        let pairs: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self::from_pairs(names, &pairs).expect("chain is a partial order")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_poset(&self) -> bool {
        self.is_poset
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::PointIndex {
                index: i,
                len: self.len(),
            })
        }
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a].contains(b)
    }

    /// `a <= b` and not `b <= a`.
    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) && !self.leq(b, a)
    }

    pub fn up_set(&self, a: usize) -> &PointSet {
        &self.up[a]
    }

    /// `↓a`, every point below `a`.
    pub fn downset(&self, a: usize) -> &PointSet {
        &self.down[a]
    }

    pub fn full_set(&self) -> PointSet {
        let mut s = empty_set(self.len());
        s.insert_range(..);
        s
    }

    pub fn empty_set(&self) -> PointSet {
        empty_set(self.len())
    }

    pub fn set_of(&self, points: impl IntoIterator<Item = usize>) -> PointSet {
        let mut s = self.empty_set();
        for p in points {
            s.insert(p);
        }
        s
    }

    /// The relation as a boolean matrix.
    pub fn matrix(&self) -> Vec<Vec<bool>> {
        (0..self.len())
            .map(|i| (0..self.len()).map(|j| self.leq(i, j)).collect())
            .collect()
    }

    /// All related pairs `(below, above)` with distinct endpoints, row-major.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|i| self.up[i].ones().filter(move |&j| j != i).map(move |j| (i, j)))
            .collect()
    }

    /// Same points and relation, different names.
    pub fn renamed(&self, names: Vec<String>) -> Result<FinOrder> {
        Self::from_up_sets(names, self.up.clone())
    }

    /// `{s : t <= s and u <= s}`.
    pub fn upper_bounds(&self, t: usize, u: usize) -> PointSet {
        self.up[t].intersection(&self.up[u]).collect_set(self.len())
    }

    fn require_poset(&self) -> Result<()> {
        if self.is_poset {
            Ok(())
        } else {
            Err(Error::NotAPoset)
        }
    }

    /// Minimal upper bounds of `{t, u}`.
    pub fn mub_set(&self, t: usize, u: usize) -> Result<PointSet> {
        self.require_poset()?;
        Ok(self.quasi_mub_set(t, u))
    }

    /// The least upper bound of `{t, u}`, if there is one.
    pub fn sup_opt(&self, t: usize, u: usize) -> Result<Option<usize>> {
        self.require_poset()?;
        Ok(self.quasi_sup_set(t, u).ones().next())
    }

    /// Upper bounds with no upper bound strictly below them.
    pub fn quasi_mub_set(&self, t: usize, u: usize) -> PointSet {
        let ub = self.upper_bounds(t, u);
        let mut out = self.empty_set();
        for s in ub.ones() {
            // every upper bound below s is also above s
            let below = self.down[s].intersection(&ub);
            if below.into_iter().all(|x| self.leq(s, x)) {
                out.insert(s);
            }
        }
        out
    }

    /// Upper bounds lying below every upper bound.
    pub fn quasi_sup_set(&self, t: usize, u: usize) -> PointSet {
        let ub = self.upper_bounds(t, u);
        let mut out = self.empty_set();
        for s in ub.ones() {
            if ub.is_subset(&self.up[s]) {
                out.insert(s);
            }
        }
        out
    }

    /// The least downset containing `t` and `u` that is closed under existing
    /// binary suprema.
    pub fn g_closure(&self, t: usize, u: usize) -> Result<PointSet> {
        self.require_poset()?;
        let mut g = self.down[t].clone();
        g.union_with(&self.down[u]);
        loop {
            let mut next = g.clone();
            let members: Vec<usize> = g.ones().collect();
            for (i, &b) in members.iter().enumerate() {
                for &c in &members[i..] {
                    if let Some(m) = self.sup_opt(b, c)? {
                        if !next.contains(m) {
                            next.union_with(&self.down[m]);
                        }
                    }
                }
            }
            if next == g {
                return Ok(g);
            }
            g = next;
        }
    }

    /// Whether `s` is a minimal but not least upper bound of `{t, u}`.
    pub fn is_violating(&self, tr: Triple) -> Result<bool> {
        Ok(self.mub_set(tr.t, tr.u)?.contains(tr.s) && self.sup_opt(tr.t, tr.u)?.is_none())
    }

    /// Every `(s, t, u)` with `s` a minimal upper bound of `{t, u}` and no
    /// supremum, ordered by `(s, t, u)`.
    pub fn violating_triples(&self) -> Result<Vec<Triple>> {
        self.require_poset()?;
        let n = self.len();
        let mut out = Vec::new();
        let mut per_pair = vec![None; n * n];
        for t in 0..n {
            for u in 0..n {
                if self.sup_opt(t, u)?.is_none() {
                    per_pair[t * n + u] = Some(self.mub_set(t, u)?);
                }
            }
        }
        for s in 0..n {
            for t in 0..n {
                for u in 0..n {
                    if per_pair[t * n + u].as_ref().is_some_and(|m| m.contains(s)) {
                        out.push(Triple::new(s, t, u));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Sub-order on the points `0..k`.
    pub fn restrict_prefix(&self, k: usize) -> FinOrder {
        let names = self.names[..k].to_vec();
        let up = self.up[..k]
            .iter()
            .map(|row| {
                let mut r = empty_set(k);
                r.extend(row.ones().filter(|&j| j < k));
                r
            })
            .collect();
        FinOrder::from_up_sets(names, up).expect("restriction of a preorder is a preorder")
    }

    /// Graphviz rendering of the Hasse diagram.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph order {\n  rankdir=BT;\n");
        for name in &self.names {
            out.push_str(&format!("  \"{name}\";\n"));
        }
        for (a, b) in self.strict_pairs() {
            let covered = (0..self.len())
                .any(|c| c != a && c != b && self.lt(a, c) && self.lt(c, b));
            if !covered {
                out.push_str(&format!("  \"{}\" -> \"{}\";\n", self.names[a], self.names[b]));
            }
        }
        out.push_str("}\n");
        out
    }
}

trait CollectSet {
    fn collect_set(self, n: usize) -> PointSet;
}

impl<I: Iterator<Item = usize>> CollectSet for I {
    fn collect_set(self, n: usize) -> PointSet {
        let mut s = empty_set(n);
        s.extend(self);
        s
    }
}

/// Default point names `a, b, c, ...` (then `p26, p27, ...`).
pub fn default_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("p{i}")
            }
        })
        .collect()
}

/// The four-point order with two incomparable minimal upper bounds `x`, `xp`
/// of `{y, z}`.
pub fn two_mub_frame() -> FinOrder {
    let names = ["x", "xp", "y", "z"].map(String::from).to_vec();
    FinOrder::from_pairs(names, &[(2, 0), (2, 1), (3, 0), (3, 1)]).expect("valid poset")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(o: &FinOrder, names: &[&str]) -> PointSet {
        o.set_of(names.iter().map(|n| o.index_of(n).unwrap()))
    }

    fn names(n: &[&str]) -> Vec<String> {
        n.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn validate_examples() {
        let id: Vec<Vec<bool>> = (0..3).map(|i| (0..3).map(|j| i == j).collect()).collect();
        let d = FinOrder::validate(names(&["a", "b", "c"]), &id).unwrap();
        assert!(d.is_poset());
        assert_eq!(d.strict_pairs(), vec![]);

        let fig = two_mub_frame();
        assert!(fig.is_poset());
        assert_eq!(fig.strict_pairs().len(), 4);

        let cyc = FinOrder::from_pairs(names(&["a", "b"]), &[(0, 1), (1, 0)]).unwrap();
        assert!(!cyc.is_poset());
    }

    #[test]
    fn validate_rejects_with_witnesses() {
        let m = vec![vec![true, true], vec![false, false]];
        match FinOrder::validate(names(&["a", "b"]), &m) {
            Err(Error::NotReflexive(p)) => assert_eq!(p, "b"),
            other => panic!("unexpected {other:?}"),
        }
        match FinOrder::from_pairs(names(&["a", "b", "c"]), &[(0, 1), (1, 2)]) {
            Err(Error::NotTransitive(a, b, c)) => assert_eq!((a, b, c), ("a".into(), "b".into(), "c".into())),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bounds_on_two_mub_frame() {
        let o = two_mub_frame();
        let (y, z) = (o.index_of("y").unwrap(), o.index_of("z").unwrap());
        assert_eq!(o.upper_bounds(y, z), set(&o, &["x", "xp"]));
        assert_eq!(o.mub_set(y, z).unwrap(), set(&o, &["x", "xp"]));
        assert_eq!(o.sup_opt(y, z).unwrap(), None);
        assert_eq!(o.upper_bounds(y, y), set(&o, &["x", "xp", "y"]));
        assert_eq!(o.sup_opt(y, y).unwrap(), Some(y));
        assert_eq!(o.downset(0).clone(), set(&o, &["x", "y", "z"]));
        assert_eq!(o.downset(y).clone(), set(&o, &["y"]));
        assert_eq!(o.g_closure(y, z).unwrap(), set(&o, &["y", "z"]));
    }

    #[test]
    fn bounds_on_small_orders() {
        let d = FinOrder::discrete(names(&["a", "b"]));
        assert_eq!(d.upper_bounds(0, 1).count_ones(..), 0);
        assert_eq!(d.quasi_sup_set(0, 1).count_ones(..), 0);
        assert!(d.quasi_mub_set(0, 1).is_clear());

        let c = FinOrder::chain(names(&["a", "b"]));
        assert_eq!(c.mub_set(0, 1).unwrap(), c.set_of([1]));

        // a, b <= c <= d
        let dia = FinOrder::from_pairs(
            names(&["a", "b", "c", "d"]),
            &[(0, 2), (1, 2), (0, 3), (1, 3), (2, 3)],
        )
        .unwrap();
        assert_eq!(dia.mub_set(0, 1).unwrap(), dia.set_of([2]));
        assert_eq!(dia.sup_opt(0, 1).unwrap(), Some(2));

        let ch = FinOrder::chain(names(&["a", "b", "c"]));
        assert_eq!(ch.g_closure(0, 1).unwrap(), ch.set_of([0, 1]));
        assert_eq!(ch.downset(2).count_ones(..), 3);
    }

    #[test]
    fn quasi_bounds_on_a_cycle() {
        // c, d below the cycle a ~ b
        let o = FinOrder::from_pairs(
            names(&["a", "b", "c", "d"]),
            &[(0, 1), (1, 0), (2, 0), (2, 1), (3, 0), (3, 1)],
        )
        .unwrap();
        assert!(!o.is_poset());
        assert_eq!(o.quasi_mub_set(2, 3), o.set_of([0, 1]));
        assert_eq!(o.quasi_sup_set(2, 3), o.set_of([0, 1]));
        assert!(matches!(o.mub_set(2, 3), Err(Error::NotAPoset)));
        assert!(matches!(o.g_closure(2, 3), Err(Error::NotAPoset)));
    }

    #[test]
    fn violating_triples_of_two_mub_frame() {
        let o = two_mub_frame();
        let got = o.violating_triples().unwrap();
        let (x, xp, y, z) = (0, 1, 2, 3);
        assert_eq!(
            got,
            vec![
                Triple::new(x, y, z),
                Triple::new(x, z, y),
                Triple::new(xp, y, z),
                Triple::new(xp, z, y)
            ]
        );
        assert!(FinOrder::chain(default_names(4)).violating_triples().unwrap().is_empty());
    }
}
