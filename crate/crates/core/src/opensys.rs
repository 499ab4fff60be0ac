//! Open objects (decorated cospans) and composition of any finset algebra
//! along a wiring diagram.

use crate::error::{Error, Result};
use crate::finset::{pushout, FinFunction, PushoutResult};
use crate::uwd::{Curvature, Uwd};

/// A functor from finite sets to payloads: `act` transports a payload along
/// a function, `combine` and `unit` make it lax monoidal.
pub trait FinsetAlgebra {
    type Object: Clone;

    fn dimension(&self, obj: &Self::Object) -> usize;

    fn act(&self, phi: &FinFunction, obj: &Self::Object) -> Result<Self::Object>;

    fn unit(&self) -> Self::Object;

    fn product(&self, a: &Self::Object, b: &Self::Object) -> Self::Object;

    /// Left fold of [`FinsetAlgebra::product`] from the unit.
    fn combine(&self, objs: &[Self::Object]) -> Self::Object {
        objs.iter()
            .fold(self.unit(), |acc, o| self.product(&acc, o))
    }

    /// Per-coordinate labels for typed payloads.
    fn labels(&self, _obj: &Self::Object) -> Option<Vec<Curvature>> {
        None
    }

    /// `act` with known target labels; typed algebras check label preservation.
    fn act_labelled(
        &self,
        phi: &FinFunction,
        _target_labels: Option<&[Curvature]>,
        obj: &Self::Object,
    ) -> Result<Self::Object> {
        self.act(phi, obj)
    }
}

/// A payload over a domain `S` together with the map from box ports into `S`.
#[derive(Debug, Clone)]
pub struct OpenObject<T> {
    pub domain_size: usize,
    pub payload: T,
    pub port_map: FinFunction,
}

impl<T> OpenObject<T> {
    pub fn new<A: FinsetAlgebra<Object = T>>(
        alg: &A,
        payload: T,
        port_map: FinFunction,
    ) -> Result<Self> {
        let domain_size = alg.dimension(&payload);
        if port_map.codom_size() != domain_size {
            return Err(Error::DimensionMismatch {
                context: "open object port map",
                expected: domain_size,
                actual: port_map.codom_size(),
            });
        }
        Ok(Self {
            domain_size,
            payload,
            port_map,
        })
    }

    /// Every coordinate exposed as a port, in order.
    pub fn closed_identity<A: FinsetAlgebra<Object = T>>(alg: &A, payload: T) -> Self {
        let n = alg.dimension(&payload);
        Self {
            domain_size: n,
            payload,
            port_map: FinFunction::identity(n),
        }
    }

    pub fn map_payload<U>(self, f: impl FnOnce(T) -> U) -> OpenObject<U> {
        OpenObject {
            domain_size: self.domain_size,
            payload: f(self.payload),
            port_map: self.port_map,
        }
    }
}

/// Checks filler arity against `d` and returns the pushout gluing the
/// fillers' domains along the junctions.
pub fn glue<T>(d: &Uwd, fillers: &[OpenObject<T>]) -> Result<PushoutResult> {
    if fillers.len() != d.n_boxes() {
        return Err(Error::FillerCount {
            expected: d.n_boxes(),
            actual: fillers.len(),
        });
    }
    for (i, f) in fillers.iter().enumerate() {
        if f.port_map.dom_size() != d.box_ports[i] {
            return Err(Error::ArityMismatch {
                box_index: i,
                expected: d.box_ports[i],
                actual: f.port_map.dom_size(),
            });
        }
    }
    let m = FinFunction::coproduct_all(fillers.iter().map(|f| &f.port_map));
    pushout(&m, &d.inner_map)
}

/// Composes open objects along `d`: the payload is `F(p_S)` applied to the
/// combined payloads and the port map is `p_J ∘ outer_map`.
pub fn oapply<A: FinsetAlgebra>(
    alg: &A,
    d: &Uwd,
    fillers: &[OpenObject<A::Object>],
) -> Result<OpenObject<A::Object>> {
    for f in fillers {
        let dim = alg.dimension(&f.payload);
        if dim != f.domain_size {
            return Err(Error::DimensionMismatch {
                context: "filler payload dimension",
                expected: f.domain_size,
                actual: dim,
            });
        }
    }
    let po = glue(d, fillers)?;
    let payloads: Vec<_> = fillers.iter().map(|f| f.payload.clone()).collect();
    let combined = alg.combine(&payloads);

    let target = apex_labels(alg, d, fillers, &po)?;
    let payload = alg.act_labelled(&po.proj_left, target.as_deref(), &combined)?;
    Ok(OpenObject {
        domain_size: po.apex_size,
        payload,
        port_map: d.outer_map.compose(&po.proj_right)?,
    })
}

fn apex_labels<A: FinsetAlgebra>(
    alg: &A,
    d: &Uwd,
    fillers: &[OpenObject<A::Object>],
    po: &PushoutResult,
) -> Result<Option<Vec<Curvature>>> {
    let filler_labels: Vec<Option<Vec<Curvature>>> =
        fillers.iter().map(|f| alg.labels(&f.payload)).collect();
    // Untyped algebras ignore diagram labels.
    if !filler_labels.iter().any(Option::is_some) {
        return Ok(None);
    }

    if let Some(jl) = &d.labels {
        let mut port = 0;
        for (b, (f, fl)) in fillers.iter().zip(&filler_labels).enumerate() {
            for p in 0..d.box_ports[b] {
                let j = d.inner_map.apply(port);
                if let Some(fl) = fl {
                    let lab = fl[f.port_map.apply(p)];
                    if lab != jl[j] {
                        return Err(Error::LabelMismatch {
                            junction: j,
                            detail: format!(
                                "box {b} port {p} carries {lab:?}, junction is {:?}",
                                jl[j]
                            ),
                        });
                    }
                }
                port += 1;
            }
        }
    }

    let mut out: Vec<Option<Curvature>> = vec![None; po.apex_size];
    if let Some(jl) = &d.labels {
        for (j, &k) in po.proj_right.as_slice().iter().enumerate() {
            out[k] = Some(jl[j]);
        }
    }
    let mut offset = 0;
    for (f, fl) in fillers.iter().zip(&filler_labels) {
        if let Some(fl) = fl {
            for (s, &lab) in fl.iter().enumerate() {
                let k = po.proj_left.apply(offset + s);
                match out[k] {
                    Some(prev) if prev != lab => {
                        return Err(Error::LabelMismatch {
                            junction: k,
                            detail: format!("coordinates labelled {prev:?} and {lab:?} merged"),
                        })
                    }
                    _ => out[k] = Some(lab),
                }
            }
        }
        offset += f.domain_size;
    }
    match out.iter().position(Option::is_none) {
        None => Ok(Some(out.into_iter().map(Option::unwrap).collect())),
        Some(k) => Err(Error::LabelMismatch {
            junction: k,
            detail: "composite coordinate has no label; label the diagram".into(),
        }),
    }
}
