//! Exhaustive generation of small labeled orders.
//!
//! Orders on `n` points are produced by extending every order on the first
//! `n - 1` points with a new last point, choosing the set of points below it
//! (a downset) and the set above it (an upset) compatibly. Each labeled order
//! arises exactly once. Rows are packed into bytes, so `n <= 8`.

use serde::{Deserialize, Serialize};

use super::{default_names, FinOrder, PointSet};
use crate::error::{Error, Result};

/// Hard limit imposed by the packed row representation.
pub const MAX_ENUM_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Poset,
    Preorder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Labeling {
    /// Every relation on `0..n` exactly once.
    Labeled,
    /// One representative per isomorphism class: the labeling whose
    /// row-major relation matrix is lexicographically least.
    UpToIso,
}

type Rows = [u8; MAX_ENUM_POINTS];

fn extend(parents: &[Rows], k: usize, kind: OrderKind) -> Vec<Rows> {
    let mut out = Vec::new();
    let full = 1u16 << k;
    for rows in parents {
        let down_of = |d: usize| -> u8 {
            (0..k).filter(|&x| rows[x] >> d & 1 == 1).fold(0, |m, x| m | 1 << x)
        };
        let downs: Vec<u8> = (0..k).map(down_of).collect();
        for dmask in 0..full {
            let d = dmask as u8;
            let is_downset = (0..k).filter(|&x| d >> x & 1 == 1).all(|x| downs[x] & !d == 0);
            if !is_downset {
                continue;
            }
            // points above every member of D
            let above_all = (0..k)
                .filter(|&x| d >> x & 1 == 1)
                .fold(u8::MAX, |m, x| m & rows[x]);
            for umask in 0..full {
                let u = umask as u8;
                if u & !above_all != 0 {
                    continue;
                }
                if kind == OrderKind::Poset && u & d != 0 {
                    continue;
                }
                let is_upset = (0..k).filter(|&x| u >> x & 1 == 1).all(|x| rows[x] & !u == 0);
                if !is_upset {
                    continue;
                }
                let mut next = *rows;
                for (x, row) in next.iter_mut().enumerate().take(k) {
                    if d >> x & 1 == 1 {
                        *row |= 1 << k;
                    }
                }
                next[k] = u | 1 << k;
                out.push(next);
            }
        }
    }
    out
}

/// Row-major relation matrix of `rows` relabeled by `perm` (new point `i` is
/// old point `perm[i]`), first entry most significant.
fn permuted_code(rows: &Rows, n: usize, perm: &[usize]) -> u64 {
    let mut code = 0u64;
    for &pi in perm.iter().take(n) {
        for &pj in perm.iter().take(n) {
            code = code << 1 | u64::from(rows[pi] >> pj & 1);
        }
    }
    code
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn rows_of(order: &FinOrder) -> Result<Rows> {
    let n = order.len();
    if n > MAX_ENUM_POINTS {
        return Err(Error::CapExceeded {
            what: "points",
            requested: n,
            cap: MAX_ENUM_POINTS,
        });
    }
    let mut rows = [0u8; MAX_ENUM_POINTS];
    for (i, row) in rows.iter_mut().enumerate().take(n) {
        *row = order.up_set(i).ones().fold(0, |m, j| m | 1 << j);
    }
    Ok(rows)
}

fn canonical_code_of(rows: &Rows, n: usize) -> u64 {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = permuted_code(rows, n, &perm);
    while next_permutation(&mut perm) {
        best = best.min(permuted_code(rows, n, &perm));
    }
    best
}

fn is_canonical_rows(rows: &Rows, n: usize) -> bool {
    let own = permuted_code(rows, n, &(0..n).collect::<Vec<_>>());
    let mut perm: Vec<usize> = (0..n).collect();
    while next_permutation(&mut perm) {
        // compare entry by entry, stopping at the first difference
        let mut bit = n * n;
        'cmp: for &pi in &perm {
            for &pj in &perm {
                bit -= 1;
                let mine = own >> bit & 1;
                let theirs = u64::from(rows[pi] >> pj & 1);
                if theirs < mine {
                    return false;
                }
                if theirs > mine {
                    break 'cmp;
                }
            }
        }
    }
    true
}

/// Lexicographically least row-major relation matrix over all relabelings,
/// packed into a `u64`. Two orders are isomorphic iff their codes agree.
pub fn canonical_code(order: &FinOrder) -> Result<u64> {
    Ok(canonical_code_of(&rows_of(order)?, order.len()))
}

/// Whether the order's own labeling is the canonical one.
pub fn is_canonical(order: &FinOrder) -> Result<bool> {
    Ok(is_canonical_rows(&rows_of(order)?, order.len()))
}

/// The orders on `n` points, produced in a fixed deterministic order.
pub struct OrderStream {
    n: usize,
    rows: Vec<Rows>,
    next: usize,
}

impl OrderStream {
    pub fn points(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> usize {
        self.rows.len()
    }

    /// The `i`-th order of the stream, regardless of iteration position.
    pub fn get(&self, i: usize) -> FinOrder {
        let n = self.n;
        let up = (0..n)
            .map(|r| {
                let mut s = PointSet::with_capacity(n);
                s.extend((0..n).filter(|&j| self.rows[i][r] >> j & 1 == 1));
                s
            })
            .collect();
        FinOrder::from_up_sets(default_names(n), up).expect("enumerated relation is a preorder")
    }
}

impl Iterator for OrderStream {
    type Item = FinOrder;

    fn next(&mut self) -> Option<FinOrder> {
        if self.next >= self.rows.len() {
            return None;
        }
        let o = self.get(self.next);
        self.next += 1;
        Some(o)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.rows.len() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for OrderStream {}

/// Every order of the given kind on `n` points (named `a, b, ...`).
pub fn enumerate_orders(
    n: usize,
    kind: OrderKind,
    labeling: Labeling,
    cap: usize,
) -> Result<OrderStream> {
    let cap = cap.min(MAX_ENUM_POINTS);
    if n > cap {
        return Err(Error::CapExceeded {
            what: "order size",
            requested: n,
            cap,
        });
    }
    let mut level = vec![[0u8; MAX_ENUM_POINTS]];
    for k in 0..n {
        level = extend(&level, k, kind);
    }
    if labeling == Labeling::UpToIso {
        level.retain(|rows| is_canonical_rows(rows, n));
    }
    Ok(OrderStream {
        n,
        rows: level,
        next: 0,
    })
}
