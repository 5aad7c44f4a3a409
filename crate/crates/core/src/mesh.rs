//! Uniform 1D meshes, nodal patches and the piecewise-linear partition of unity.
//!
//! The hat functions `φ_α` built here are the partition of unity every GFEM
//! shape function is multiplied onto. Evaluation exactly at a node takes the
//! left-limit derivative (the element to the left of the node); the first node
//! uses the first element.

use crate::error::{Error, Result};

/// A 1D mesh of the closed interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    elements: Vec<(usize, usize)>,
    h: f64,
}

/// Value and slope of a single hat function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatEval {
    pub value: f64,
    pub derivative: f64,
}

impl HatEval {
    pub const ZERO: HatEval = HatEval {
        value: 0.0,
        derivative: 0.0,
    };
}

/// Builds a uniform mesh of `n_elements` elements on `[lo, hi]`.
pub fn build_uniform_mesh(n_elements: usize, lo: f64, hi: f64) -> Result<Mesh1D> {
    if n_elements == 0 {
        return Err(Error::InvalidMesh("at least one element is required".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidMesh(format!(
            "domain bounds must satisfy lo < hi (got [{lo}, {hi}])"
        )));
    }
    let h = (hi - lo) / n_elements as f64;
    let mut nodes: Vec<f64> = (0..=n_elements).map(|k| lo + k as f64 * h).collect();
    // pin the right end exactly, the product above can round
    nodes[n_elements] = hi;
    let elements = (0..n_elements).map(|e| (e, e + 1)).collect();
    Ok(Mesh1D {
        lo,
        hi,
        nodes,
        elements,
        h,
    })
}

impl Mesh1D {
    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Uniform element size.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, alpha: usize) -> f64 {
        self.nodes[alpha]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[(usize, usize)] {
        &self.elements
    }

    /// Coordinates `(x_left, x_right)` of element `e`.
    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        let (a, b) = self.elements[e];
        (self.nodes[a], self.nodes[b])
    }

    pub fn is_boundary_node(&self, alpha: usize) -> bool {
        alpha == 0 || alpha + 1 == self.nodes.len()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub(crate) fn check_point(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// Element owning `x`: the element with `x ∈ (x_e, x_{e+1}]`, element 0 for `x = lo`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        self.check_point(x)?;
        let n = self.elements.len();
        let guess = ((x - self.lo) / self.h).ceil() as isize - 1;
        let mut e = guess.clamp(0, n as isize - 1) as usize;
        while e > 0 && x <= self.nodes[e] {
            e -= 1;
        }
        while e + 1 < n && x > self.nodes[e + 1] {
            e += 1;
        }
        Ok(e)
    }

    /// Element indices forming the patch `ω_α` of node `alpha`.
    pub fn patch(&self, alpha: usize) -> Result<Vec<usize>> {
        self.check_node(alpha)?;
        let mut out = Vec::with_capacity(2);
        if alpha > 0 {
            out.push(alpha - 1);
        }
        if alpha < self.elements.len() {
            out.push(alpha);
        }
        Ok(out)
    }

    /// Closed interval covered by the patch of `alpha`.
    pub fn patch_bounds(&self, alpha: usize) -> (f64, f64) {
        let left = if alpha > 0 {
            self.nodes[alpha - 1]
        } else {
            self.nodes[0]
        };
        let right = if alpha + 1 < self.nodes.len() {
            self.nodes[alpha + 1]
        } else {
            self.nodes[alpha]
        };
        (left, right)
    }

    fn check_node(&self, alpha: usize) -> Result<()> {
        if alpha < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                index: alpha,
                nodes: self.nodes.len(),
            })
        }
    }

    /// Hat function `φ_α` and its slope at `x`.
    pub fn hat_eval(&self, alpha: usize, x: f64) -> Result<HatEval> {
        self.check_node(alpha)?;
        let e = self.locate(x)?;
        Ok(self.hat_on_element(alpha, e, x))
    }

    /// Hat `alpha` restricted to element `e`, evaluated with the element's linear formula.
    pub(crate) fn hat_on_element(&self, alpha: usize, e: usize, x: f64) -> HatEval {
        let (a, b) = self.elements[e];
        let (xa, xb) = (self.nodes[a], self.nodes[b]);
        let len = xb - xa;
        if alpha == a {
            HatEval {
                value: (xb - x) / len,
                derivative: -1.0 / len,
            }
        } else if alpha == b {
            HatEval {
                value: (x - xa) / len,
                derivative: 1.0 / len,
            }
        } else {
            HatEval::ZERO
        }
    }
}
