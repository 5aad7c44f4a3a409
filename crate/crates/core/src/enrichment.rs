//! Enrichment functions, their local application domains and the GFEM
//! degree-of-freedom map.
//!
//! A GFEM shape function is the product `φ_α · (E − E(x_α))` of a hat and a
//! nodally shifted enrichment, so every enriched shape function vanishes at
//! its own node and the standard coefficient keeps its nodal meaning.
//!
//! Global numbering: every node's standard hat DOF comes first in node order,
//! followed by enrichment DOFs grouped by rule and then by node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{HatEval, Mesh1D};

/// Closed form of a single enrichment function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnrichmentKind {
    /// `E(x) = exp(rate · x)`.
    Exponential { rate: f64 },
    /// Indicator of the element attached to a boundary node, jumping to zero
    /// at the node itself.
    HeavisideBoundary,
    /// `E(x) = tanh((center − x) / (2 · thickness))`.
    TanhShock { center: f64, thickness: f64 },
}

impl EnrichmentKind {
    fn validate(&self) -> Result<()> {
        match *self {
            EnrichmentKind::Exponential { rate } if rate == 0.0 || !rate.is_finite() => Err(
                Error::InvalidEnrichment(format!("exponential rate must be finite and nonzero, got {rate}")),
            ),
            EnrichmentKind::TanhShock { thickness, center } if !(thickness > 0.0) || !center.is_finite() => {
                Err(Error::InvalidEnrichment(format!(
                    "tanh thickness must be positive, got {thickness}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            EnrichmentKind::Exponential { rate } => format!("exp(rate={rate})"),
            EnrichmentKind::HeavisideBoundary => "heaviside".into(),
            EnrichmentKind::TanhShock { center, thickness } => {
                format!("tanh(center={center},thickness={thickness})")
            }
        }
    }
}

/// An enrichment kind applied to every node of `[local_lo, local_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnrichmentRule {
    #[serde(flatten)]
    pub kind: EnrichmentKind,
    pub local_lo: f64,
    pub local_hi: f64,
}

impl EnrichmentRule {
    pub fn new(kind: EnrichmentKind, local_lo: f64, local_hi: f64) -> Result<Self> {
        let rule = EnrichmentRule {
            kind,
            local_lo,
            local_hi,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        if !(self.local_lo < self.local_hi) {
            return Err(Error::InvalidEnrichment(format!(
                "local domain must satisfy lo < hi, got [{}, {}]",
                self.local_lo, self.local_hi
            )));
        }
        Ok(())
    }
}

/// Local domain of a tanh shock enrichment: the region where
/// `|tanh| ≤ 0.99`, padded by one element on each side.
pub fn local_domain_for_tanh(center: f64, thickness: f64, h_e: f64) -> Result<(f64, f64)> {
    if !(thickness > 0.0) {
        return Err(Error::InvalidEnrichment(format!(
            "tanh thickness must be positive, got {thickness}"
        )));
    }
    if !(h_e > 0.0) {
        return Err(Error::InvalidParameter(format!("element size must be positive, got {h_e}")));
    }
    let half = 2.0 * thickness * 0.99f64.atanh() + h_e;
    Ok((center - half, center + half))
}

/// Evaluation switches for enrichment functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnrichmentOptions {
    /// Evaluate exponentials as `exp(rate · (x − x_α))` instead of `exp(rate · x)`.
    pub scaled_exponential: bool,
    /// Whether non-Heaviside rules may enrich the two domain boundary nodes.
    pub enrich_boundary_nodes: bool,
}

impl Default for EnrichmentOptions {
    fn default() -> Self {
        EnrichmentOptions {
            scaled_exponential: true,
            enrich_boundary_nodes: true,
        }
    }
}

/// One global degree of freedom: node `alpha` and enrichment slot `j`
/// (`j = 1` is the plain hat, `j = k + 2` is rule `k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofEntry {
    pub node: usize,
    pub j: usize,
}

impl DofEntry {
    pub fn rule_index(&self) -> Option<usize> {
        (self.j >= 2).then(|| self.j - 2)
    }
}

/// Global numbering of standard and enrichment DOFs.
#[derive(Debug, Clone)]
pub struct DofMap {
    entries: Vec<DofEntry>,
    rules: Vec<EnrichmentRule>,
    options: EnrichmentOptions,
    per_node: Vec<usize>,
    node_dofs: Vec<Vec<usize>>,
    warnings: Vec<String>,
}

/// Builds the DOF map for `mesh` enriched by `rules`.
///
/// Rules that reach no node do not fail the build; they are reported through
/// [`DofMap::warnings`].
pub fn build_dof_map(mesh: &Mesh1D, rules: &[EnrichmentRule], options: EnrichmentOptions) -> Result<DofMap> {
    let n = mesh.n_nodes();
    let mut entries: Vec<DofEntry> = (0..n).map(|node| DofEntry { node, j: 1 }).collect();
    let mut per_node = vec![1usize; n];
    let mut node_dofs: Vec<Vec<usize>> = (0..n).map(|a| vec![a]).collect();
    let mut warnings = Vec::new();
    let tol = 1e-12 * mesh.length();

    for (k, rule) in rules.iter().enumerate() {
        rule.validate()?;
        let mut hits = 0;
        for alpha in 0..n {
            let x = mesh.node(alpha);
            if x < rule.local_lo - tol || x > rule.local_hi + tol {
                continue;
            }
            let boundary = mesh.is_boundary_node(alpha);
            match rule.kind {
                EnrichmentKind::HeavisideBoundary if !boundary => continue,
                EnrichmentKind::HeavisideBoundary => {}
                _ if boundary && !options.enrich_boundary_nodes => continue,
                _ => {}
            }
            node_dofs[alpha].push(entries.len());
            entries.push(DofEntry { node: alpha, j: k + 2 });
            per_node[alpha] += 1;
            hits += 1;
        }
        if hits == 0 {
            warnings.push(format!(
                "enrichment rule {k} ({}) on [{}, {}] contains no eligible node",
                rule.kind.label(),
                rule.local_lo,
                rule.local_hi
            ));
        }
    }

    Ok(DofMap {
        entries,
        rules: rules.to_vec(),
        options,
        per_node,
        node_dofs,
        warnings,
    })
}

/// Value and slope of one GFEM shape function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeEval {
    pub value: f64,
    pub derivative: f64,
}

impl From<HatEval> for ShapeEval {
    fn from(h: HatEval) -> Self {
        ShapeEval {
            value: h.value,
            derivative: h.derivative,
        }
    }
}

impl DofMap {
    pub fn total_dofs(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[DofEntry] {
        &self.entries
    }

    pub fn entry(&self, dof: usize) -> DofEntry {
        self.entries[dof]
    }

    pub fn rules(&self) -> &[EnrichmentRule] {
        &self.rules
    }

    pub fn options(&self) -> EnrichmentOptions {
        self.options
    }

    /// `m_α` for each node.
    pub fn per_node(&self) -> &[usize] {
        &self.per_node
    }

    /// Global DOFs attached to node `alpha`, hat first.
    pub fn node_dofs(&self, alpha: usize) -> &[usize] {
        &self.node_dofs[alpha]
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn n_enriched(&self) -> usize {
        self.entries.len() - self.per_node.len()
    }

    /// Permutation listing DOFs node by node; with it the system matrices
    /// become banded.
    pub fn node_major_order(&self) -> Vec<usize> {
        self.node_dofs.iter().flatten().copied().collect()
    }

    /// DOFs whose support meets element `e`.
    pub fn element_dofs(&self, mesh: &Mesh1D, e: usize) -> Vec<usize> {
        let (a, b) = mesh.elements()[e];
        self.node_dofs[a]
            .iter()
            .chain(&self.node_dofs[b])
            .copied()
            .collect()
    }

    /// Shape function `dof` on element `e` at `x` (the element's closure).
    pub(crate) fn shape_on_element(&self, mesh: &Mesh1D, dof: usize, e: usize, x: f64) -> ShapeEval {
        let entry = self.entries[dof];
        let hat = mesh.hat_on_element(entry.node, e, x);
        let Some(k) = entry.rule_index() else {
            return hat.into();
        };
        if hat.value == 0.0 && hat.derivative == 0.0 {
            return ShapeEval {
                value: 0.0,
                derivative: 0.0,
            };
        }
        let xa = mesh.node(entry.node);
        let (e_val, e_der) = match self.rules[k].kind {
            EnrichmentKind::Exponential { rate } => {
                let (v, shift) = if self.options.scaled_exponential {
                    ((rate * (x - xa)).exp(), 1.0)
                } else {
                    ((rate * x).exp(), (rate * xa).exp())
                };
                (v - shift, rate * v)
            }
            EnrichmentKind::TanhShock { center, thickness } => {
                let s = 2.0 * thickness;
                let v = ((center - x) / s).tanh();
                let va = ((center - xa) / s).tanh();
                (v - va, -(1.0 - v * v) / s)
            }
            EnrichmentKind::HeavisideBoundary => {
                // 1 on the attached element, 0 at the node itself; unshifted
                if x == xa {
                    (0.0, 0.0)
                } else {
                    (1.0, 0.0)
                }
            }
        };
        ShapeEval {
            value: hat.value * e_val,
            derivative: hat.derivative * e_val + hat.value * e_der,
        }
    }

    /// Evaluates GFEM shape function `dof` at `x`.
    pub fn shape_eval(&self, mesh: &Mesh1D, dof: usize, x: f64) -> Result<ShapeEval> {
        if dof >= self.entries.len() {
            return Err(Error::DofOutOfRange {
                index: dof,
                total: self.entries.len(),
            });
        }
        let e = mesh.locate(x)?;
        Ok(self.shape_on_element(mesh, dof, e, x))
    }
}
