//! Continuous, discrete and set-valued dynamical systems on free vector
//! spaces, their algebras, Euler discretisation and simulation.
//!
//! Set-valued systems are represented by a selection `(x, seed) ↦ v ∈ υ(x)`.
//! Products split the seed with [`mix64`](crate::mix64) by block index, so a
//! fixed seed picks the same selection however a composite was assembled at
//! one level.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::finset::FinFunction;
use crate::freevect::{pullback_unchecked, pushforward_into};
use crate::mix64;
use crate::opensys::{glue, FinsetAlgebra, OpenObject};
use crate::uwd::Uwd;

pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type SeededMapFn = Arc<dyn Fn(&[f64], u64) -> Vec<f64> + Send + Sync>;

macro_rules! opaque_debug {
    ($t:ty) => {
        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_struct(stringify!($t))
                    .field("dim", &self.dim)
                    .finish_non_exhaustive()
            }
        }
    };
}

/// `ẋ = υ(x)`.
#[derive(Clone)]
pub struct VectorField {
    pub dim: usize,
    pub field: MapFn,
}

/// `x ↦ v(x)`.
#[derive(Clone)]
pub struct DiscreteMap {
    pub dim: usize,
    pub step: MapFn,
}

/// `ẋ ∈ υ(x)`, via a seeded selection.
#[derive(Clone)]
pub struct SelectorField {
    pub dim: usize,
    pub select: SeededMapFn,
}

/// `x_{k+1} ∈ v(x_k)`, via a seeded selection.
#[derive(Clone)]
pub struct SelectorMap {
    pub dim: usize,
    pub select: SeededMapFn,
}

opaque_debug!(VectorField);
opaque_debug!(DiscreteMap);
opaque_debug!(SelectorField);
opaque_debug!(SelectorMap);

impl VectorField {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            field: Arc::new(f),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.field)(x)
    }
}

impl DiscreteMap {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            step: Arc::new(f),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, |x| x.to_vec())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.step)(x)
    }
}

impl SelectorField {
    pub fn new(dim: usize, f: impl Fn(&[f64], u64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            select: Arc::new(f),
        }
    }

    /// The singleton-valued system `x ↦ {υ(x)}`.
    pub fn from_field(v: &VectorField) -> Self {
        let f = v.field.clone();
        Self::new(v.dim, move |x, _| f(x))
    }

    pub fn eval(&self, x: &[f64], seed: u64) -> Vec<f64> {
        (self.select)(x, seed)
    }
}

impl SelectorMap {
    pub fn new(dim: usize, f: impl Fn(&[f64], u64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            select: Arc::new(f),
        }
    }

    pub fn from_map(v: &DiscreteMap) -> Self {
        let f = v.step.clone();
        Self::new(v.dim, move |x, _| f(x))
    }

    pub fn apply(&self, x: &[f64], seed: u64) -> Vec<f64> {
        (self.select)(x, seed)
    }
}

fn check_act(context: &'static str, phi: &FinFunction, dim: usize) -> Result<()> {
    if phi.dom_size() != dim {
        return Err(Error::DimensionMismatch {
            context,
            expected: dim,
            actual: phi.dom_size(),
        });
    }
    Ok(())
}

fn offsets(dims: impl Iterator<Item = usize>) -> (Vec<(usize, usize)>, usize) {
    let mut off = 0;
    let ranges = dims
        .map(|d| {
            let r = (off, off + d);
            off += d;
            r
        })
        .collect();
    (ranges, off)
}

/// `φ_* ∘ w ∘ φ*` for a (possibly seeded) block function `w`.
fn conjugate(phi: &FinFunction, w: impl Fn(&[f64]) -> Vec<f64>, y: &[f64]) -> Vec<f64> {
    let v = w(&pullback_unchecked(phi, y));
    let mut out = vec![0.0; phi.codom_size()];
    pushforward_into(phi, &v, &mut out);
    out
}

/// `y + φ_*(w(φ*y) − φ*y)`.
fn conjugate_discrete(phi: &FinFunction, w: impl Fn(&[f64]) -> Vec<f64>, y: &[f64]) -> Vec<f64> {
    let t = pullback_unchecked(phi, y);
    let mut diff = w(&t);
    for (d, ti) in diff.iter_mut().zip(&t) {
        *d -= ti;
    }
    let mut out = vec![0.0; phi.codom_size()];
    pushforward_into(phi, &diff, &mut out);
    for (o, yi) in out.iter_mut().zip(y) {
        *o += yi;
    }
    out
}

/// Continuous systems; `φ` acts by `υ ↦ φ_* ∘ υ ∘ φ*`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dynam;

/// Discrete systems; `φ` acts by `v ↦ id + φ_* ∘ (v − id) ∘ φ*`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DynamD;

/// Set-valued continuous systems.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ndd;

/// Set-valued discrete systems.
#[derive(Debug, Clone, Copy, Default)]
pub struct NddD;

impl FinsetAlgebra for Dynam {
    type Object = VectorField;

    fn dimension(&self, v: &VectorField) -> usize {
        v.dim
    }

    fn act(&self, phi: &FinFunction, v: &VectorField) -> Result<VectorField> {
        check_act("vector field action", phi, v.dim)?;
        let phi = phi.clone();
        let f = v.field.clone();
        Ok(VectorField::new(phi.codom_size(), move |y| {
            conjugate(&phi, |t| f(t), y)
        }))
    }

    fn unit(&self) -> VectorField {
        VectorField::new(0, |_| Vec::new())
    }

    fn product(&self, a: &VectorField, b: &VectorField) -> VectorField {
        self.combine(&[a.clone(), b.clone()])
    }

    fn combine(&self, vs: &[VectorField]) -> VectorField {
        let (ranges, dim) = offsets(vs.iter().map(|v| v.dim));
        let blocks: Vec<(usize, usize, MapFn)> = ranges
            .into_iter()
            .zip(vs)
            .map(|((a, b), v)| (a, b, v.field.clone()))
            .collect();
        VectorField::new(dim, move |z| {
            let mut out = Vec::with_capacity(z.len());
            for (a, b, f) in &blocks {
                out.extend(f(&z[*a..*b]));
            }
            out
        })
    }
}

impl FinsetAlgebra for DynamD {
    type Object = DiscreteMap;

    fn dimension(&self, v: &DiscreteMap) -> usize {
        v.dim
    }

    fn act(&self, phi: &FinFunction, v: &DiscreteMap) -> Result<DiscreteMap> {
        check_act("discrete map action", phi, v.dim)?;
        let phi = phi.clone();
        let f = v.step.clone();
        Ok(DiscreteMap::new(phi.codom_size(), move |y| {
            conjugate_discrete(&phi, |t| f(t), y)
        }))
    }

    fn unit(&self) -> DiscreteMap {
        DiscreteMap::new(0, |_| Vec::new())
    }

    fn product(&self, a: &DiscreteMap, b: &DiscreteMap) -> DiscreteMap {
        self.combine(&[a.clone(), b.clone()])
    }

    fn combine(&self, vs: &[DiscreteMap]) -> DiscreteMap {
        let (ranges, dim) = offsets(vs.iter().map(|v| v.dim));
        let blocks: Vec<(usize, usize, MapFn)> = ranges
            .into_iter()
            .zip(vs)
            .map(|((a, b), v)| (a, b, v.step.clone()))
            .collect();
        DiscreteMap::new(dim, move |z| {
            let mut out = Vec::with_capacity(z.len());
            for (a, b, f) in &blocks {
                out.extend(f(&z[*a..*b]));
            }
            out
        })
    }
}

fn combine_seeded(dims: impl Iterator<Item = usize>, fs: Vec<SeededMapFn>) -> (usize, SeededMapFn) {
    let (ranges, dim) = offsets(dims);
    let blocks: Vec<(usize, usize, SeededMapFn)> = ranges
        .into_iter()
        .zip(fs)
        .map(|((a, b), f)| (a, b, f))
        .collect();
    let f: SeededMapFn = Arc::new(move |z: &[f64], seed| {
        let mut out = Vec::with_capacity(z.len());
        for (i, (a, b, f)) in blocks.iter().enumerate() {
            out.extend(f(&z[*a..*b], mix64(seed, i as u64)));
        }
        out
    });
    (dim, f)
}

impl FinsetAlgebra for Ndd {
    type Object = SelectorField;

    fn dimension(&self, v: &SelectorField) -> usize {
        v.dim
    }

    fn act(&self, phi: &FinFunction, v: &SelectorField) -> Result<SelectorField> {
        check_act("selector field action", phi, v.dim)?;
        let phi = phi.clone();
        let f = v.select.clone();
        Ok(SelectorField::new(phi.codom_size(), move |y, seed| {
            conjugate(&phi, |t| f(t, seed), y)
        }))
    }

    fn unit(&self) -> SelectorField {
        SelectorField::new(0, |_, _| Vec::new())
    }

    fn product(&self, a: &SelectorField, b: &SelectorField) -> SelectorField {
        self.combine(&[a.clone(), b.clone()])
    }

    /// Minkowski sum of blocks, realised as the sum of block selections.
    fn combine(&self, vs: &[SelectorField]) -> SelectorField {
        let (dim, select) = combine_seeded(
            vs.iter().map(|v| v.dim),
            vs.iter().map(|v| v.select.clone()).collect(),
        );
        SelectorField { dim, select }
    }
}

impl FinsetAlgebra for NddD {
    type Object = SelectorMap;

    fn dimension(&self, v: &SelectorMap) -> usize {
        v.dim
    }

    fn act(&self, phi: &FinFunction, v: &SelectorMap) -> Result<SelectorMap> {
        check_act("selector map action", phi, v.dim)?;
        let phi = phi.clone();
        let f = v.select.clone();
        Ok(SelectorMap::new(phi.codom_size(), move |y, seed| {
            conjugate_discrete(&phi, |t| f(t, seed), y)
        }))
    }

    fn unit(&self) -> SelectorMap {
        SelectorMap::new(0, |_, _| Vec::new())
    }

    fn product(&self, a: &SelectorMap, b: &SelectorMap) -> SelectorMap {
        self.combine(&[a.clone(), b.clone()])
    }

    fn combine(&self, vs: &[SelectorMap]) -> SelectorMap {
        let (dim, select) = combine_seeded(
            vs.iter().map(|v| v.dim),
            vs.iter().map(|v| v.select.clone()).collect(),
        );
        SelectorMap { dim, select }
    }
}

pub(crate) fn check_step(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidStepSize(gamma))
    }
}

/// Forward Euler: `x ↦ x + γ υ(x)`.
pub fn euler(v: &VectorField, gamma: f64) -> Result<DiscreteMap> {
    check_step(gamma)?;
    let f = v.field.clone();
    Ok(DiscreteMap::new(v.dim, move |x| {
        let d = f(x);
        x.iter().zip(d).map(|(xi, di)| xi + gamma * di).collect()
    }))
}

/// Forward Euler on a set-valued field: `x ↦ {x} ⊞ γ υ(x)`.
pub fn euler_ndd(v: &SelectorField, gamma: f64) -> Result<SelectorMap> {
    check_step(gamma)?;
    let f = v.select.clone();
    Ok(SelectorMap::new(v.dim, move |x, seed| {
        let d = f(x, seed);
        x.iter().zip(d).map(|(xi, di)| xi + gamma * di).collect()
    }))
}

/// Anything that can be iterated; `k` is the index of the step being taken.
pub trait Stepper {
    fn dim(&self) -> usize;
    fn advance(&self, x: &[f64], k: usize) -> Vec<f64>;
}

impl Stepper for DiscreteMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn advance(&self, x: &[f64], _k: usize) -> Vec<f64> {
        (self.step)(x)
    }
}

/// A set-valued map iterated with seed `mix64(seed, k)` at step `k`.
pub struct Seeded<'a> {
    pub map: &'a SelectorMap,
    pub seed: u64,
}

impl Stepper for Seeded<'_> {
    fn dim(&self) -> usize {
        self.map.dim
    }

    fn advance(&self, x: &[f64], k: usize) -> Vec<f64> {
        (self.map.select)(x, mix64(self.seed, k as u64))
    }
}

/// Iterates `steps` times, calling `visit(k, x_k)` for `k = 0..=steps`, and
/// returns the final state.
pub fn simulate_visit<S: Stepper + ?Sized>(
    s: &S,
    x0: &[f64],
    steps: usize,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<Vec<f64>> {
    if x0.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            context: "initial state",
            expected: s.dim(),
            actual: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    visit(0, &x);
    for k in 0..steps {
        x = s.advance(&x, k);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        visit(k + 1, &x);
    }
    Ok(x)
}

/// Dense trajectory `[x0, x1, …, x_steps]`.
pub fn simulate<S: Stepper + ?Sized>(s: &S, x0: &[f64], steps: usize) -> Result<Vec<Vec<f64>>> {
    let mut traj = Vec::with_capacity(steps + 1);
    simulate_visit(s, x0, steps, |_, x| traj.push(x.to_vec()))?;
    Ok(traj)
}

/// Trajectory dump with header `step,x0,…,x{N-1}`.
pub fn write_trajectory_csv<W: Write>(out: W, traj: &[Vec<f64>]) -> Result<()> {
    let to_err = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let n = traj.first().map_or(0, Vec::len);
    let mut header = vec!["step".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(to_err)?;
    for (k, x) in traj.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(x.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    Serial,
    Parallel,
}

/// Runs a composite discrete system by explicit message passing: each round
/// distributes the shared state to subsystems, steps them (concurrently in
/// [`ExecutionMode::Parallel`]) and collects the changes along the junctions.
pub fn simulate_message_passing(
    d: &Uwd,
    subsystems: &[OpenObject<DiscreteMap>],
    x0: &[f64],
    steps: usize,
    mode: ExecutionMode,
) -> Result<Vec<Vec<f64>>> {
    let po = glue(d, subsystems)?;
    if x0.len() != po.apex_size {
        return Err(Error::DimensionMismatch {
            context: "message passing state",
            expected: po.apex_size,
            actual: x0.len(),
        });
    }
    let (ranges, _) = offsets(subsystems.iter().map(|s| s.domain_size));
    let p = &po.proj_left;

    let round = |s: &[f64]| -> Vec<f64> {
        let t = pullback_unchecked(p, s);
        let step_block = |(sub, &(a, b)): (&OpenObject<DiscreteMap>, &(usize, usize))| {
            let local = &t[a..b];
            let mut w = (sub.payload.step)(local);
            for (wi, ti) in w.iter_mut().zip(local) {
                *wi -= ti;
            }
            w
        };
        let diffs: Vec<Vec<f64>> = match mode {
            ExecutionMode::Serial => subsystems.iter().zip(&ranges).map(step_block).collect(),
            ExecutionMode::Parallel => subsystems
                .par_iter()
                .zip(ranges.par_iter())
                .map(step_block)
                .collect(),
        };
        let diff = diffs.concat();
        let mut out = vec![0.0; po.apex_size];
        pushforward_into(p, &diff, &mut out);
        for (o, si) in out.iter_mut().zip(s) {
            *o += si;
        }
        out
    };

    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(x0.to_vec());
    for k in 0..steps {
        let next = round(&traj[k]);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        traj.push(next);
    }
    Ok(traj)
}
