//! Undirected wiring diagrams as cospans `⊔ᵢ Pᵢ -l-> J <-r- P'` and their
//! operadic substitution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finset::{pushout, FinFunction};

/// Coordinate type for saddle problems: minimized (`Convex`) or maximized (`Concave`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curvature {
    #[serde(rename = "cx")]
    Convex,
    #[serde(rename = "cc")]
    Concave,
}

impl Curvature {
    /// `-1` for descent coordinates, `+1` for ascent coordinates.
    pub fn ascent_sign(self) -> f64 {
        match self {
            Curvature::Convex => -1.0,
            Curvature::Concave => 1.0,
        }
    }
}

/// A wiring diagram with ordered boxes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Uwd {
    pub box_ports: Vec<usize>,
    pub junctions: usize,
    pub inner_map: FinFunction,
    pub outer_map: FinFunction,
    pub labels: Option<Vec<Curvature>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct UwdJson {
    boxes: Vec<usize>,
    junctions: usize,
    inner_map: Vec<usize>,
    outer_map: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<Curvature>>,
}

impl Uwd {
    /// Builds a diagram and rejects it if any invariant fails.
    pub fn new(
        box_ports: Vec<usize>,
        junctions: usize,
        inner_map: Vec<usize>,
        outer_map: Vec<usize>,
    ) -> Result<Self> {
        let d = Self {
            box_ports,
            junctions,
            inner_map: FinFunction::new(inner_map, junctions)?,
            outer_map: FinFunction::new(outer_map, junctions)?,
            labels: None,
        };
        d.ensure_valid()?;
        Ok(d)
    }

    pub fn with_labels(mut self, labels: Vec<Curvature>) -> Result<Self> {
        self.labels = Some(labels);
        self.ensure_valid()?;
        Ok(self)
    }

    /// One box whose ports are wired straight through to the outer box.
    pub fn identity(n: usize) -> Self {
        Self {
            box_ports: vec![n],
            junctions: n,
            inner_map: FinFunction::identity(n),
            outer_map: FinFunction::identity(n),
            labels: None,
        }
    }

    pub fn identity_typed(labels: Vec<Curvature>) -> Self {
        let mut d = Self::identity(labels.len());
        d.labels = Some(labels);
        d
    }

    pub fn n_boxes(&self) -> usize {
        self.box_ports.len()
    }

    pub fn n_outer(&self) -> usize {
        self.outer_map.dom_size()
    }

    pub fn total_inner_ports(&self) -> usize {
        self.box_ports.iter().sum()
    }

    /// Junction of port `port` on box `b`.
    pub fn port_junction(&self, b: usize, port: usize) -> usize {
        let offset: usize = self.box_ports[..b].iter().sum();
        self.inner_map.apply(offset + port)
    }

    /// Labels read off the outer ports, if the diagram is typed.
    pub fn outer_labels(&self) -> Option<Vec<Curvature>> {
        self.labels
            .as_ref()
            .map(|l| self.outer_map.as_slice().iter().map(|&j| l[j]).collect())
    }

    /// Labels of the ports of box `b`, if the diagram is typed.
    pub fn box_labels(&self, b: usize) -> Option<Vec<Curvature>> {
        let labels = self.labels.as_ref()?;
        Some(
            (0..self.box_ports[b])
                .map(|p| labels[self.port_junction(b, p)])
                .collect(),
        )
    }

    /// Human-readable invariant violations; empty when well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let total = self.total_inner_ports();
        if self.inner_map.dom_size() != total {
            out.push(format!(
                "inner_map has {} entries but boxes declare {} ports",
                self.inner_map.dom_size(),
                total
            ));
        }
        if self.inner_map.codom_size() != self.junctions {
            out.push(format!(
                "inner_map targets {} junctions, diagram has {}",
                self.inner_map.codom_size(),
                self.junctions
            ));
        }
        if self.outer_map.codom_size() != self.junctions {
            out.push(format!(
                "outer_map targets {} junctions, diagram has {}",
                self.outer_map.codom_size(),
                self.junctions
            ));
        }
        if let Some(l) = &self.labels {
            if l.len() != self.junctions {
                out.push(format!(
                    "labels has length {}, diagram has {} junctions",
                    l.len(),
                    self.junctions
                ));
            }
        }
        out
    }

    fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v.join("; ")))
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: UwdJson = serde_json::from_str(s).map_err(|e| Error::Invalid(e.to_string()))?;
        let mut d = Self::new(raw.boxes, raw.junctions, raw.inner_map, raw.outer_map)?;
        if let Some(l) = raw.labels {
            d = d.with_labels(l)?;
        }
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&UwdJson {
            boxes: self.box_ports.clone(),
            junctions: self.junctions,
            inner_map: self.inner_map.as_slice().to_vec(),
            outer_map: self.outer_map.as_slice().to_vec(),
            labels: self.labels.clone(),
        })
        .expect("plain data always serializes")
    }

    /// Operadic composition: fill box `i` of `self` with `fillers[i]`.
    ///
    /// The new junction set is the pushout of `⊔ rᵢ` (filler outer maps)
    /// against `self.inner_map`.
    pub fn substitute(&self, fillers: &[Uwd]) -> Result<Uwd> {
        if fillers.len() != self.n_boxes() {
            return Err(Error::FillerCount {
                expected: self.n_boxes(),
                actual: fillers.len(),
            });
        }
        for (i, f) in fillers.iter().enumerate() {
            if f.n_outer() != self.box_ports[i] {
                return Err(Error::ArityMismatch {
                    box_index: i,
                    expected: self.box_ports[i],
                    actual: f.n_outer(),
                });
            }
        }
        self.check_filler_labels(fillers)?;

        let outer_sum = FinFunction::coproduct_all(fillers.iter().map(|f| &f.outer_map));
        let inner_sum = FinFunction::coproduct_all(fillers.iter().map(|f| &f.inner_map));
        let po = pushout(&outer_sum, &self.inner_map)?;

        let inner_map = inner_sum.compose(&po.proj_left)?;
        let outer_map = self.outer_map.compose(&po.proj_right)?;
        let box_ports = fillers
            .iter()
            .flat_map(|f| f.box_ports.iter().copied())
            .collect();

        let labels = if self.labels.is_some() || fillers.iter().any(|f| f.labels.is_some()) {
            let mut out: Vec<Option<Curvature>> = vec![None; po.apex_size];
            if let Some(l) = &self.labels {
                for (j, &k) in po.proj_right.as_slice().iter().enumerate() {
                    out[k] = Some(l[j]);
                }
            }
            let mut offset = 0;
            for f in fillers {
                if let Some(l) = &f.labels {
                    for (j, &lab) in l.iter().enumerate() {
                        let k = po.proj_left.apply(offset + j);
                        match out[k] {
                            Some(prev) if prev != lab => {
                                return Err(Error::LabelMismatch {
                                    junction: k,
                                    detail: format!("{prev:?} vs {lab:?}"),
                                })
                            }
                            _ => out[k] = Some(lab),
                        }
                    }
                }
                offset += f.junctions;
            }
            match out.iter().position(Option::is_none) {
                None => Some(out.into_iter().map(Option::unwrap).collect()),
                Some(k) => {
                    return Err(Error::LabelMismatch {
                        junction: k,
                        detail: "junction has no label after substitution".into(),
                    })
                }
            }
        } else {
            None
        };

        Ok(Uwd {
            box_ports,
            junctions: po.apex_size,
            inner_map,
            outer_map,
            labels,
        })
    }

    fn check_filler_labels(&self, fillers: &[Uwd]) -> Result<()> {
        let Some(labels) = &self.labels else {
            return Ok(());
        };
        for (b, f) in fillers.iter().enumerate() {
            let Some(fl) = f.outer_labels() else {
                continue;
            };
            for (p, lab) in fl.into_iter().enumerate() {
                let j = self.port_junction(b, p);
                if labels[j] != lab {
                    return Err(Error::LabelMismatch {
                        junction: j,
                        detail: format!("box {b} port {p} carries {lab:?}, junction is {:?}", labels[j]),
                    });
                }
            }
        }
        Ok(())
    }

    /// Reorders boxes: box `i` of the result is box `perm[i]` of `self`.
    pub fn permute_boxes(&self, perm: &[usize]) -> Result<Uwd> {
        let n = self.n_boxes();
        let as_fn = FinFunction::new(perm.to_vec(), n)?;
        if perm.len() != n || !as_fn.is_injective() {
            return Err(Error::Invalid(format!("{perm:?} is not a permutation of {n} boxes")));
        }
        let offsets: Vec<usize> = self
            .box_ports
            .iter()
            .scan(0, |acc, &k| {
                let o = *acc;
                *acc += k;
                Some(o)
            })
            .collect();
        let mut inner = Vec::with_capacity(self.total_inner_ports());
        for &b in perm {
            let o = offsets[b];
            inner.extend_from_slice(&self.inner_map.as_slice()[o..o + self.box_ports[b]]);
        }
        Ok(Uwd {
            box_ports: perm.iter().map(|&b| self.box_ports[b]).collect(),
            junctions: self.junctions,
            inner_map: FinFunction::new(inner, self.junctions)?,
            outer_map: self.outer_map.clone(),
            labels: self.labels.clone(),
        })
    }

    /// Renumbers junctions by first appearance over inner ports, then outer
    /// ports, then untouched junctions in their old order.
    pub fn canonical(&self) -> Uwd {
        let mut relabel = vec![usize::MAX; self.junctions];
        let mut next = 0;
        let hits = self
            .inner_map
            .as_slice()
            .iter()
            .chain(self.outer_map.as_slice())
            .copied()
            .chain(0..self.junctions);
        for j in hits {
            if relabel[j] == usize::MAX {
                relabel[j] = next;
                next += 1;
            }
        }
        let r = FinFunction::new(relabel.clone(), self.junctions).expect("relabel is a bijection");
        let labels = self.labels.as_ref().map(|l| {
            let mut out = l.clone();
            for (old, &new) in relabel.iter().enumerate() {
                out[new] = l[old];
            }
            out
        });
        Uwd {
            box_ports: self.box_ports.clone(),
            junctions: self.junctions,
            inner_map: self.inner_map.compose(&r).expect("sizes agree"),
            outer_map: self.outer_map.compose(&r).expect("sizes agree"),
            labels,
        }
    }
}

/// Whether two diagrams differ only by a renumbering of junctions.
///
/// Ports are ordered, so any isomorphism is forced on junctions touched by a
/// port; the remaining isolated junctions only need to agree in number (and
/// label multiset, for typed diagrams).
pub fn iso_check(a: &Uwd, b: &Uwd) -> bool {
    if a.box_ports != b.box_ports
        || a.junctions != b.junctions
        || a.n_outer() != b.n_outer()
        || a.labels.is_some() != b.labels.is_some()
    {
        return false;
    }
    let mut fwd = vec![usize::MAX; a.junctions];
    let mut bwd = vec![usize::MAX; b.junctions];
    let pairs = a
        .inner_map
        .as_slice()
        .iter()
        .zip(b.inner_map.as_slice())
        .chain(a.outer_map.as_slice().iter().zip(b.outer_map.as_slice()));
    for (&ja, &jb) in pairs {
        match (fwd[ja], bwd[jb]) {
            (usize::MAX, usize::MAX) => {
                fwd[ja] = jb;
                bwd[jb] = ja;
            }
            (x, y) if x == jb && y == ja => {}
            _ => return false,
        }
    }
    match (&a.labels, &b.labels) {
        (Some(la), Some(lb)) => {
            for (ja, &jb) in fwd.iter().enumerate() {
                if jb != usize::MAX && la[ja] != lb[jb] {
                    return false;
                }
            }
            let mut free_a: Vec<_> = (0..a.junctions)
                .filter(|&j| fwd[j] == usize::MAX)
                .map(|j| la[j] == Curvature::Convex)
                .collect();
            let mut free_b: Vec<_> = (0..b.junctions)
                .filter(|&j| bwd[j] == usize::MAX)
                .map(|j| lb[j] == Curvature::Convex)
                .collect();
            free_a.sort_unstable();
            free_b.sort_unstable();
            free_a == free_b
        }
        _ => true,
    }
}

/// Lints raw JSON without constructing a diagram, so every problem is reported.
pub fn validate_json(s: &str) -> Vec<String> {
    let raw: UwdJson = match serde_json::from_str(s) {
        Ok(r) => r,
        Err(e) => return vec![format!("parse error: {e}")],
    };
    let mut out = Vec::new();
    let total: usize = raw.boxes.iter().sum();
    if raw.inner_map.len() != total {
        out.push(format!(
            "inner_map has {} entries but boxes declare {} ports",
            raw.inner_map.len(),
            total
        ));
    }
    for (name, map) in [("inner_map", &raw.inner_map), ("outer_map", &raw.outer_map)] {
        for (i, &j) in map.iter().enumerate() {
            if j >= raw.junctions {
                out.push(format!(
                    "{name}[{i}] = {j} is not a junction (have {})",
                    raw.junctions
                ));
            }
        }
    }
    if let Some(l) = &raw.labels {
        if l.len() != raw.junctions {
            out.push(format!(
                "labels has length {}, diagram has {} junctions",
                l.len(),
                raw.junctions
            ));
        }
    }
    out
}

/// Common diagrams used by examples, tests and the benchmark.
pub mod fixtures {
    use super::*;

    /// Three boxes `f(w,x)`, `g(u,w,y)`, `h(u,w,z)` over junctions
    /// `u,w,x,y,z = 0..5`, all exposed.
    pub fn three_box_chain() -> Uwd {
        Uwd::new(
            vec![2, 3, 3],
            5,
            vec![1, 2, 0, 1, 3, 0, 1, 4],
            vec![0, 1, 2, 3, 4],
        )
        .expect("fixture is well formed")
    }

    /// Two boxes of two ports over junctions `a,b,c`, with outer ports on `a` and `c`.
    pub fn two_box_explicit() -> Uwd {
        Uwd::new(vec![2, 2], 3, vec![0, 1, 1, 2], vec![0, 2]).expect("fixture is well formed")
    }

    /// Closed diagram `[3]+[2]+[2] -> ∅` gluing three open networks.
    ///
    /// Box 0 touches every junction; box 1 shares junctions 0 and 2 with it,
    /// box 2 shares 1 and 2.
    pub fn three_network_gluing() -> Uwd {
        Uwd::new(vec![3, 2, 2], 3, vec![0, 1, 2, 0, 2, 1, 2], vec![])
            .expect("fixture is well formed")
    }
}
