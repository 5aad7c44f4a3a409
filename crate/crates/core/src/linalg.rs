//! Square system matrices in permuted band storage and their LU factorization.
//!
//! GFEM couplings only exist between DOFs whose nodes share an element, so
//! after reordering DOFs node by node every system matrix is banded. Entries
//! are addressed by global DOF index; the permutation into band order is
//! internal. A matrix built from dense rows uses the identity ordering and a
//! full band.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// global index -> band position
    pos: Vec<usize>,
    /// band position -> global index
    order: Vec<usize>,
    /// row-major, `kl + ku + 1` slots per band row
    data: Vec<f64>,
}

impl SystemMatrix {
    /// Zero matrix whose nonzeros may only couple global indices `i, j`
    /// where `coupled(i, j)` holds; `order` lists global indices in band order.
    pub fn with_pattern(order: Vec<usize>, coupled: impl Fn(usize, usize) -> bool) -> Self {
        let n = order.len();
        let mut pos = vec![0; n];
        for (p, &g) in order.iter().enumerate() {
            pos[g] = p;
        }
        let mut bw = 0usize;
        for i in 0..n {
            for j in 0..n {
                if coupled(i, j) {
                    bw = bw.max(pos[i].abs_diff(pos[j]));
                }
            }
        }
        Self::zeros_banded(order, pos, bw, bw)
    }

    fn zeros_banded(order: Vec<usize>, pos: Vec<usize>, kl: usize, ku: usize) -> Self {
        let n = order.len();
        SystemMatrix {
            n,
            kl,
            ku,
            pos,
            order,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    /// Zero matrix with the same ordering and band as `self`.
    pub fn zeros_like(&self) -> Self {
        SystemMatrix {
            data: vec![0.0; self.data.len()],
            ..self.clone()
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros_banded((0..n).collect(), (0..n).collect(), 0, 0);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Dense square matrix, full band, identity ordering.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let bw = n.saturating_sub(1);
        let mut m = Self::zeros_banded((0..n).collect(), (0..n).collect(), bw, bw);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower and upper bandwidth in band order.
    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (pi, pj) = (self.pos[i], self.pos[j]);
        if pj + self.kl < pi || pj > pi + self.ku {
            None
        } else {
            Some(pi * self.width() + (pj + self.kl - pi))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        match self.slot(i, j) {
            Some(s) => self.data[s] = v,
            None => assert!(v == 0.0, "entry ({i}, {j}) lies outside the band"),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        match self.slot(i, j) {
            Some(s) => self.data[s] += v,
            None => assert!(v == 0.0, "entry ({i}, {j}) lies outside the band"),
        }
    }

    fn same_layout(&self, other: &SystemMatrix) -> bool {
        self.n == other.n && self.kl == other.kl && self.ku == other.ku && self.pos == other.pos
    }

    /// `self += alpha · other`; both matrices must share ordering and band.
    pub fn add_scaled(&mut self, alpha: f64, other: &SystemMatrix) {
        assert!(self.same_layout(other), "matrix layouts differ");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `T · self · T` for diagonal `T = diag(t)`.
    pub fn scale_symmetric(&mut self, t: &[f64]) {
        let w = self.width();
        for p in 0..self.n {
            let ti = t[self.order[p]];
            let lo = p.saturating_sub(self.kl);
            let hi = (p + self.ku).min(self.n - 1);
            for q in lo..=hi {
                self.data[p * w + (q + self.kl - p)] *= ti * t[self.order[q]];
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let w = self.width();
        let mut y = vec![0.0; self.n];
        for p in 0..self.n {
            let lo = p.saturating_sub(self.kl);
            let hi = (p + self.ku).min(self.n - 1);
            let row = &self.data[p * w..(p + 1) * w];
            let mut acc = 0.0;
            for q in lo..=hi {
                acc += row[q + self.kl - p] * x[self.order[q]];
            }
            y[self.order[p]] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Banded LU with partial pivoting.
    pub fn factor(&self) -> Result<BandLu> {
        BandLu::new(self)
    }
}

/// `P A = L U` in band storage; the upper factor gets `kl` extra diagonals
/// of fill from row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    uw: usize,
    w: usize,
    order: Vec<usize>,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn new(a: &SystemMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        // columns stored per row: [p - kl, p + ku + kl]
        let w = 2 * kl + a.ku + 1;
        let uw = a.ku + kl;
        let mut data = vec![0.0; n * w];
        let aw = a.width();
        for p in 0..n {
            data[p * w..p * w + aw].copy_from_slice(&a.data[p * aw..(p + 1) * aw]);
        }
        let at = |r: usize, c: usize| r * w + (c + kl - r);
        let mut pivots = vec![0; n];
        let scale = a.max_abs();
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = data[at(k, k)].abs();
            for r in k + 1..=last {
                let v = data[at(r, k)].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 || best <= f64::EPSILON * 1e-6 * scale {
                return Err(Error::SingularMatrix { row: k });
            }
            pivots[k] = piv;
            let cmax = (k + uw).min(n - 1);
            if piv != k {
                for c in k..=cmax {
                    data.swap(at(k, c), at(piv, c));
                }
            }
            let d = data[at(k, k)];
            for r in k + 1..=last {
                let l = data[at(r, k)] / d;
                data[at(r, k)] = l;
                if l != 0.0 {
                    for c in k + 1..=cmax {
                        let u = data[at(k, c)];
                        data[at(r, c)] -= l * u;
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            uw,
            w,
            order: a.order.clone(),
            data,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` with `b` in global indexing.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let w = self.w;
        let at = |r: usize, c: usize| r * w + (c + self.kl - r);
        let mut y: Vec<f64> = self.order.iter().map(|&g| b[g]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk != 0.0 {
                for r in k + 1..=(k + self.kl).min(n - 1) {
                    y[r] -= self.data[at(r, k)] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = y[k];
            for c in k + 1..=(k + self.uw).min(n - 1) {
                acc -= self.data[at(k, c)] * y[c];
            }
            y[k] = acc / self.data[at(k, k)];
        }
        let mut x = vec![0.0; n];
        for (p, &g) in self.order.iter().enumerate() {
            x[g] = y[p];
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
