//! Admissible Feynman diagrams: perfect matchings of row-arranged vertices
//! with no edge inside a row.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 16;
pub const COUNT_CAP: usize = 24;

/// `(row, column)`, both starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Vertex {
    pub row: usize,
    pub col: usize,
}

impl Vertex {
    pub fn new(row: usize, col: usize) -> Self {
        Vertex { row, col }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagram {
    pub row_sizes: Vec<usize>,
    /// `(upper, lower)` pairs with `upper.row < lower.row`.
    pub edges: Vec<(Vertex, Vertex)>,
}

impl Diagram {
    pub fn new(row_sizes: Vec<usize>, edges: Vec<(Vertex, Vertex)>) -> Result<Self> {
        let d = Diagram { row_sizes, edges };
        d.validate()?;
        Ok(d)
    }

    pub fn total(&self) -> usize {
        self.row_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.total();
        if total % 2 == 1 {
            return Err(Error::OddVertexCount(total));
        }
        if self.edges.len() * 2 != total {
            return Err(Error::InvalidParameter(format!(
                "{} edges for {total} vertices",
                self.edges.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &(u, l) in &self.edges {
            for v in [u, l] {
                if v.row == 0 || v.row > self.row_sizes.len() || v.col == 0 || v.col > self.row_sizes[v.row - 1] {
                    return Err(Error::InvalidParameter(format!("vertex {v:?} out of range")));
                }
                if !seen.insert(v) {
                    return Err(Error::InvalidParameter(format!("vertex {v:?} used twice")));
                }
            }
            if u.row >= l.row {
                return Err(Error::InvalidParameter(format!(
                    "edge {u:?} - {l:?} does not go strictly downwards"
                )));
            }
        }
        Ok(())
    }

    /// One `(upper, lower)` index pair per edge, in edge order. Each pair
    /// indexes the time and space variables entering `gamma(t_u - t_l) Lambda(x_u - x_l)`.
    pub fn edge_factors(&self) -> Vec<((usize, usize), (usize, usize))> {
        self.edges
            .iter()
            .map(|(u, l)| ((u.row, u.col), (l.row, l.col)))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|(u, l)| serde_json::json!([[u.row, u.col], [l.row, l.col]]))
            .collect();
        serde_json::json!({"row_sizes": self.row_sizes, "edges": edges})
    }
}

fn check_sizes(row_sizes: &[usize], cap: usize) -> Result<usize> {
    let total: usize = row_sizes.iter().sum();
    if total % 2 == 1 {
        return Err(Error::OddVertexCount(total));
    }
    if total > cap {
        return Err(Error::CapExceeded { total, cap });
    }
    Ok(total)
}

/// Streams admissible diagrams. The lowest unmatched vertex is paired with
/// each admissible later vertex in turn, so diagrams appear in lexicographic
/// order of their edge lists.
pub struct AdmissibleIter {
    row_sizes: Vec<usize>,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
    partner: Vec<Option<usize>>,
    stack: Vec<(usize, usize)>,
    state: IterState,
}

#[derive(PartialEq)]
enum IterState {
    Descend,
    Backtrack,
    Done,
}

impl AdmissibleIter {
    fn new(row_sizes: &[usize]) -> Self {
        let mut row_of = Vec::new();
        let mut col_of = Vec::new();
        for (k, &n) in row_sizes.iter().enumerate() {
            for c in 0..n {
                row_of.push(k);
                col_of.push(c);
            }
        }
        let n = row_of.len();
        AdmissibleIter {
            row_sizes: row_sizes.to_vec(),
            row_of,
            col_of,
            partner: vec![None; n],
            stack: Vec::new(),
            state: IterState::Descend,
        }
    }

    fn next_partner(&self, u: usize, after: usize) -> Option<usize> {
        (after..self.row_of.len()).find(|&v| self.partner[v].is_none() && self.row_of[v] != self.row_of[u])
    }

    fn vertex(&self, i: usize) -> Vertex {
        Vertex::new(self.row_of[i] + 1, self.col_of[i] + 1)
    }

    fn current(&self) -> Diagram {
        Diagram {
            row_sizes: self.row_sizes.clone(),
            edges: self
                .stack
                .iter()
                .map(|&(u, v)| (self.vertex(u), self.vertex(v)))
                .collect(),
        }
    }

    fn link(&mut self, u: usize, v: usize) {
        self.partner[u] = Some(v);
        self.partner[v] = Some(u);
        self.stack.push((u, v));
    }
}

impl Iterator for AdmissibleIter {
    type Item = Diagram;

    fn next(&mut self) -> Option<Diagram> {
        loop {
            match self.state {
                IterState::Done => return None,
                IterState::Descend => match self.partner.iter().position(|p| p.is_none()) {
                    None => {
                        self.state = IterState::Backtrack;
                        return Some(self.current());
                    }
                    Some(u) => match self.next_partner(u, u + 1) {
                        Some(v) => self.link(u, v),
                        None => self.state = IterState::Backtrack,
                    },
                },
                IterState::Backtrack => {
                    let Some((u, v)) = self.stack.pop() else {
                        self.state = IterState::Done;
                        continue;
                    };
                    self.partner[u] = None;
                    self.partner[v] = None;
                    if let Some(w) = self.next_partner(u, v + 1) {
                        self.link(u, w);
                        self.state = IterState::Descend;
                    }
                }
            }
        }
    }
}

pub fn enumerate_admissible(row_sizes: &[usize]) -> Result<AdmissibleIter> {
    enumerate_admissible_capped(row_sizes, DEFAULT_CAP)
}

pub fn enumerate_admissible_capped(row_sizes: &[usize], cap: usize) -> Result<AdmissibleIter> {
    check_sizes(row_sizes, cap)?;
    Ok(AdmissibleIter::new(row_sizes))
}

/// Number of admissible diagrams by streaming enumeration.
pub fn count_streaming(row_sizes: &[usize]) -> Result<u128> {
    Ok(enumerate_admissible(row_sizes)?.count() as u128)
}

fn binom(n: usize, k: usize) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn count_rec(rows: Vec<usize>, memo: &mut HashMap<Vec<usize>, u128>) -> u128 {
    let mut rows: Vec<usize> = rows.into_iter().filter(|&n| n > 0).collect();
    if rows.is_empty() {
        return 1;
    }
    rows.sort_unstable_by(|a, b| b.cmp(a));
    if let Some(&v) = memo.get(&rows) {
        return v;
    }
    let first = rows[0];
    let rest = rows[1..].to_vec();
    let mut total: u128 = 0;
    // distribute the vertices of the first row over the remaining rows
    let mut take = vec![0usize; rest.len()];
    fn walk(
        j: usize,
        left: usize,
        rest: &[usize],
        take: &mut Vec<usize>,
        first: usize,
        memo: &mut HashMap<Vec<usize>, u128>,
        total: &mut u128,
    ) {
        if j == rest.len() {
            if left == 0 {
                let mut ways = factorial(first);
                for (n, k) in rest.iter().zip(take.iter()) {
                    ways *= binom(*n, *k);
                }
                let remaining: Vec<usize> = rest.iter().zip(take.iter()).map(|(n, k)| n - k).collect();
                *total += ways * count_rec(remaining, memo);
            }
            return;
        }
        for k in 0..=left.min(rest[j]) {
            take[j] = k;
            walk(j + 1, left - k, rest, take, first, memo, total);
        }
        take[j] = 0;
    }
    walk(0, first, &rest, &mut take, first, memo, &mut total);
    memo.insert(rows, total);
    total
}

/// Number of admissible diagrams by the row-merge recursion; 0 for an odd
/// vertex count.
pub fn count_recursive(row_sizes: &[usize]) -> Result<u128> {
    let total: usize = row_sizes.iter().sum();
    if total % 2 == 1 {
        return Ok(0);
    }
    if total > COUNT_CAP {
        return Err(Error::CapExceeded { total, cap: COUNT_CAP });
    }
    Ok(count_rec(row_sizes.to_vec(), &mut HashMap::new()))
}

/// `|D(n_1, ..., n_m)|`. Uses the recursion; for small totals the streaming
/// count is computed as well and both must agree.
pub fn count_admissible(row_sizes: &[usize]) -> Result<u128> {
    let rec = count_recursive(row_sizes)?;
    let total: usize = row_sizes.iter().sum();
    if total % 2 == 0 && total <= 10 {
        let s = count_streaming(row_sizes)?;
        if s != rec {
            return Err(Error::InvalidParameter(format!(
                "diagram counts disagree: streaming {s}, recursion {rec}"
            )));
        }
    }
    Ok(rec)
}

/// Diagrams with `p` rows of `m_p` vertices whose edges all join one of the
/// first `p/2` rows to one of the last `p/2` rows. There are `m!` of them,
/// `m = p m_p / 2`, streamed in lexicographic order of the permutation.
pub struct ConstrainedIter {
    p: usize,
    m_p: usize,
    perm: Vec<usize>,
    done: bool,
}

impl Iterator for ConstrainedIter {
    type Item = Diagram;

    fn next(&mut self) -> Option<Diagram> {
        if self.done {
            return None;
        }
        let m_p = self.m_p;
        let half = self.p / 2;
        let vertex = |i: usize, offset: usize| Vertex::new(offset + i / m_p + 1, i % m_p + 1);
        let edges = self
            .perm
            .iter()
            .enumerate()
            .map(|(i, &j)| (vertex(i, 0), vertex(j, half)))
            .collect();
        let d = Diagram {
            row_sizes: vec![m_p; self.p],
            edges,
        };
        // next permutation
        let n = self.perm.len();
        match (0..n.saturating_sub(1)).rev().find(|&i| self.perm[i] < self.perm[i + 1]) {
            None => self.done = true,
            Some(i) => {
                let j = (i + 1..n).rev().find(|&j| self.perm[j] > self.perm[i]).unwrap();
                self.perm.swap(i, j);
                self.perm[i + 1..].reverse();
            }
        }
        Some(d)
    }
}

pub fn enumerate_constrained(p: usize, m_p: usize) -> Result<ConstrainedIter> {
    if p == 0 || p % 2 == 1 {
        return Err(Error::InvalidParameter(format!("p = {p} must be positive and even")));
    }
    if m_p == 0 {
        return Err(Error::InvalidParameter("m_p must be positive".into()));
    }
    check_sizes(&vec![m_p; p], DEFAULT_CAP)?;
    let m = p * m_p / 2;
    Ok(ConstrainedIter {
        p,
        m_p,
        perm: (0..m).collect(),
        done: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(count_streaming(&[1, 1]).unwrap(), 1);
        assert_eq!(count_streaming(&[2, 2]).unwrap(), 2);
        assert_eq!(count_streaming(&[1, 1, 1, 1]).unwrap(), 3);
        assert_eq!(count_admissible(&[2, 2, 2]).unwrap(), 8);
        assert_eq!(count_admissible(&[3, 2]).unwrap(), 0);
        assert!(matches!(enumerate_admissible(&[3, 2]), Err(Error::OddVertexCount(5))));
    }

    #[test]
    fn lexicographic_order() {
        let all: Vec<Diagram> = enumerate_admissible(&[1, 1, 1, 1]).unwrap().collect();
        let v = |r| Vertex::new(r, 1);
        assert_eq!(all[0].edges, vec![(v(1), v(2)), (v(3), v(4))]);
        assert_eq!(all[1].edges, vec![(v(1), v(3)), (v(2), v(4))]);
        assert_eq!(all[2].edges, vec![(v(1), v(4)), (v(2), v(3))]);
    }

    #[test]
    fn cap() {
        assert!(matches!(
            enumerate_admissible(&[9, 9]),
            Err(Error::CapExceeded { total: 18, cap: 16 })
        ));
        assert_eq!(count_recursive(&[9, 9]).unwrap(), factorial(9));
    }

    #[test]
    fn constrained_small() {
        assert_eq!(enumerate_constrained(2, 3).unwrap().count(), 6);
        assert_eq!(enumerate_constrained(4, 1).unwrap().count(), 2);
        let one: Vec<_> = enumerate_constrained(2, 1).unwrap().collect();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].edges, vec![(Vertex::new(1, 1), Vertex::new(2, 1))]);
    }

    #[test]
    fn empty_rows() {
        assert_eq!(count_streaming(&[]).unwrap(), 1);
        assert_eq!(count_recursive(&[0, 0]).unwrap(), 1);
    }
}
