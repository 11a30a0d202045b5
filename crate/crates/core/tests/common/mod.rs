//! Brute-force reference implementations, written directly from the
//! quantifier definitions over a boolean relation matrix. They share no code
//! with the library beyond the `Formula` type.

#![allow(dead_code)]

use std::collections::BTreeMap;

use milw::{FinOrder, Formula, Mode};
use rand::Rng;

pub type Rel = Vec<Vec<bool>>;

pub fn rel_of(order: &FinOrder) -> Rel {
    let n = order.len();
    (0..n).map(|i| (0..n).map(|j| order.leq(i, j)).collect()).collect()
}

pub fn is_antisymmetric(r: &Rel) -> bool {
    let n = r.len();
    (0..n).all(|i| (0..n).all(|j| i == j || !(r[i][j] && r[j][i])))
}

pub fn upper_bounds(r: &Rel, t: usize, u: usize) -> Vec<usize> {
    (0..r.len()).filter(|&s| r[t][s] && r[u][s]).collect()
}

/// No upper bound strictly below `s`.
pub fn quasi_mub(r: &Rel, t: usize, u: usize) -> Vec<usize> {
    let ub = upper_bounds(r, t, u);
    ub.iter()
        .copied()
        .filter(|&s| !ub.iter().any(|&x| r[x][s] && !r[s][x]))
        .collect()
}

/// Below every upper bound.
pub fn quasi_sup(r: &Rel, t: usize, u: usize) -> Vec<usize> {
    let ub = upper_bounds(r, t, u);
    ub.iter().copied().filter(|&s| ub.iter().all(|&x| r[s][x])).collect()
}

/// Poset version: no distinct upper bound below `s`.
pub fn mub(r: &Rel, t: usize, u: usize) -> Vec<usize> {
    let ub = upper_bounds(r, t, u);
    ub.iter()
        .copied()
        .filter(|&s| !ub.iter().any(|&x| x != s && r[x][s]))
        .collect()
}

pub fn sup(r: &Rel, t: usize, u: usize) -> Option<usize> {
    let ub = upper_bounds(r, t, u);
    ub.iter().copied().find(|&s| ub.iter().all(|&x| r[s][x]))
}

/// Downset of `{t, u}` closed under suprema, one element at a time.
pub fn g_closure(r: &Rel, t: usize, u: usize) -> Vec<usize> {
    let n = r.len();
    let mut inside = vec![false; n];
    inside[t] = true;
    inside[u] = true;
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in 0..n {
                if inside[b] && r[a][b] && !inside[a] {
                    inside[a] = true;
                    changed = true;
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if inside[a] && inside[b] {
                    if let Some(m) = sup(r, a, b) {
                        if !inside[m] {
                            inside[m] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return (0..n).filter(|&i| inside[i]).collect();
        }
    }
}

/// `s ∈ fus(t, u)` under the mode, with quasi bounds on preorders.
pub fn fuses(r: &Rel, mode: Mode, s: usize, t: usize, u: usize) -> bool {
    let poset = is_antisymmetric(r);
    match (mode, poset) {
        (Mode::Mub, true) => mub(r, t, u).contains(&s),
        (Mode::Mub, false) => quasi_mub(r, t, u).contains(&s),
        (Mode::Sup, true) => sup(r, t, u) == Some(s),
        (Mode::Sup, false) => quasi_sup(r, t, u).contains(&s),
    }
}

/// Recursive satisfaction straight from the clauses.
pub fn sat(r: &Rel, val: &BTreeMap<String, Vec<bool>>, mode: Mode, s: usize, f: &Formula) -> bool {
    let n = r.len();
    match f {
        Formula::Falsum => false,
        Formula::Verum => true,
        Formula::Prop(p) => val.get(p).is_some_and(|v| v[s]),
        Formula::Not(a) => !sat(r, val, mode, s, a),
        Formula::Or(a, b) => sat(r, val, mode, s, a) || sat(r, val, mode, s, b),
        Formula::And(a, b) => sat(r, val, mode, s, a) && sat(r, val, mode, s, b),
        Formula::Implies(a, b) => !sat(r, val, mode, s, a) || sat(r, val, mode, s, b),
        Formula::Fuse(a, b) => (0..n).any(|t| {
            (0..n).any(|u| {
                fuses(r, mode, s, t, u) && sat(r, val, mode, t, a) && sat(r, val, mode, u, b)
            })
        }),
        Formula::Residual(a, b) => (0..n).all(|t| {
            !sat(r, val, mode, t, a)
                || (0..n).all(|x| !fuses(r, mode, x, t, s) || sat(r, val, mode, x, b))
        }),
        Formula::Past(a) => (0..n).any(|t| {
            (0..n).any(|u| fuses(r, mode, s, t, u) && sat(r, val, mode, t, a))
        }),
    }
}

/// A random preorder: reflexive-transitive closure of random pairs.
pub fn random_preorder<R: Rng>(rng: &mut R, n: usize, density: f64) -> Rel {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = i == j || rng.gen_bool(density);
        }
    }
    close(r)
}

/// A random poset: closure of random pairs that respect a random linear
/// extension.
pub fn random_poset<R: Rng>(rng: &mut R, n: usize, density: f64) -> Rel {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        r[i][i] = true;
        for j in 0..n {
            if perm[i] < perm[j] && rng.gen_bool(density) {
                r[i][j] = true;
            }
        }
    }
    close(r)
}

fn close(mut r: Rel) -> Rel {
    let n = r.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

pub fn order_of(r: &Rel) -> FinOrder {
    FinOrder::validate(milw::order::default_names(r.len()), r).expect("closed relation")
}
