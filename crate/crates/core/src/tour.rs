//! Tours, open paths and undirected edges over instance indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Undirected edge stored with the smaller index first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub usize, pub usize);

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b);
        if a < b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn touches(&self, v: usize) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(&self, v: usize) -> usize {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

/// Sum of consecutive distances along `order`, optionally closing the cycle.
pub fn sequence_length(inst: &Instance, order: &[usize], closed: bool) -> f64 {
    let mut len: f64 = order.windows(2).map(|w| inst.dist(w[0], w[1])).sum();
    if closed && order.len() > 1 {
        len += inst.dist(order[order.len() - 1], order[0]);
    }
    len
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: f64,
}

impl Tour {
    pub fn from_order(inst: &Instance, order: Vec<usize>) -> Self {
        let length = sequence_length(inst, &order, true);
        Tour { order, length }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let n = self.order.len();
        if n < 2 {
            return Vec::new();
        }
        if n == 2 {
            return vec![Edge::new(self.order[0], self.order[1])];
        }
        (0..n).map(|i| Edge::new(self.order[i], self.order[(i + 1) % n])).collect()
    }

    /// Checks that the tour is a permutation of `0..n` and that the stored length is accurate.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let n = inst.len();
        if self.order.len() != n {
            return Err(Error::Construction(format!("tour has {} vertices, instance {n}", self.order.len())));
        }
        let mut seen = vec![false; n];
        for &v in &self.order {
            if v >= n || seen[v] {
                return Err(Error::Construction(format!("vertex {v} repeated or out of range")));
            }
            seen[v] = true;
        }
        let recomputed = sequence_length(inst, &self.order, true);
        if (recomputed - self.length).abs() > 1e-9 * recomputed.max(1.0) {
            return Err(Error::Construction(format!("stored length {} != {}", self.length, recomputed)));
        }
        Ok(())
    }

    /// Rotation starting at the smallest index, oriented towards the smaller neighbor.
    pub fn canonical(&self) -> Vec<usize> {
        canonical_cycle(&self.order)
    }

    /// Successor and predecessor of every vertex.
    pub fn neighbors(&self) -> Vec<(usize, usize)> {
        let n = self.order.len();
        let max = self.order.iter().copied().max().map_or(0, |m| m + 1);
        let mut out = vec![(usize::MAX, usize::MAX); max];
        for i in 0..n {
            out[self.order[i]] = (self.order[(i + n - 1) % n], self.order[(i + 1) % n]);
        }
        out
    }
}

pub fn canonical_cycle(order: &[usize]) -> Vec<usize> {
    let n = order.len();
    if n < 3 {
        let mut v = order.to_vec();
        v.sort_unstable();
        return v;
    }
    let pos = order.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i).expect("nonempty");
    let next = order[(pos + 1) % n];
    let prev = order[(pos + n - 1) % n];
    if next < prev {
        (0..n).map(|k| order[(pos + k) % n]).collect()
    } else {
        (0..n).map(|k| order[(pos + n - k) % n]).collect()
    }
}

/// Open path through a subset of indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSeq {
    pub order: Vec<usize>,
    pub length: f64,
}

impl PathSeq {
    pub fn from_order(inst: &Instance, order: Vec<usize>) -> Self {
        let length = sequence_length(inst, &order, false);
        PathSeq { order, length }
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.order[0], *self.order.last().expect("nonempty path"))
    }

    /// The orientation whose first vertex is smaller; paths are equal up to reversal.
    pub fn normalized(&self) -> Vec<usize> {
        normalize_path(&self.order)
    }
}

pub fn normalize_path(order: &[usize]) -> Vec<usize> {
    let mut rev = order.to_vec();
    rev.reverse();
    if rev < order.to_vec() {
        rev
    } else {
        order.to_vec()
    }
}
