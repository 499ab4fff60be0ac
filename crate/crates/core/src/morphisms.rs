//! Solution methods as maps from problem algebras to dynamics algebras,
//! and a harness that checks they commute with composition.

use std::sync::Arc;

use crate::dynamics::{
    check_step, euler, euler_ndd, DiscreteMap, Dynam, DynamD, Ndd, NddD, SelectorField, SelectorMap,
    VectorField,
};
use crate::error::{Error, Result};
use crate::finset::PushoutResult;
use crate::freevect::norm_inf;
use crate::opensys::{glue, oapply, FinsetAlgebra, OpenObject};
use crate::problems::{Objective, Opt, Saddle, SaddleObjective, Smoothness};
use crate::uwd::{Curvature, Uwd};

/// `f ↦ −∇f`.
pub fn grad_flow(f: &Objective) -> Result<VectorField> {
    if f.smoothness() != Smoothness::Differentiable {
        return Err(Error::Invalid(
            "objective is only subdifferentiable; use subgrad_flow".into(),
        ));
    }
    let o = f.oracle_fn().clone();
    Ok(VectorField::new(f.dim(), move |x| {
        o(x, 0).into_iter().map(|g| -g).collect()
    }))
}

/// `f ↦ id − γ∇f`, defined as Euler applied to [`grad_flow`].
pub fn gd(f: &Objective, gamma: f64) -> Result<DiscreteMap> {
    check_step(gamma)?;
    euler(&grad_flow(f)?, gamma)
}

fn signs(labels: &[Curvature]) -> Arc<Vec<f64>> {
    Arc::new(labels.iter().map(|l| l.ascent_sign()).collect())
}

/// Descends on convex coordinates and ascends on concave ones.
pub fn saddle_flow(l: &SaddleObjective) -> Result<VectorField> {
    if l.objective.smoothness() != Smoothness::Differentiable {
        return Err(Error::Invalid(
            "saddle objective is only subdifferentiable; use pd_subg".into(),
        ));
    }
    let o = l.objective.oracle_fn().clone();
    let s = signs(&l.labels);
    Ok(VectorField::new(l.dim(), move |x| {
        o(x, 0).into_iter().zip(s.iter()).map(|(g, si)| si * g).collect()
    }))
}

/// Gradient ascent-descent: `xᵢ ∓ γ ∂ᵢL(x)` by label.
pub fn gad(l: &SaddleObjective, gamma: f64) -> Result<DiscreteMap> {
    check_step(gamma)?;
    euler(&saddle_flow(l)?, gamma)
}

fn require_labels(l: &SaddleObjective, want: Curvature, what: &str) -> Result<()> {
    match l.labels.iter().position(|&c| c != want) {
        None => Ok(()),
        Some(i) => Err(Error::LabelMismatch {
            junction: i,
            detail: format!("{what} needs every coordinate {want:?}"),
        }),
    }
}

/// `f ↦ −∂f` for convex `f`.
pub fn subgrad_flow(f: &SaddleObjective) -> Result<SelectorField> {
    require_labels(f, Curvature::Convex, "subgradient flow")?;
    pd_subg(f)
}

/// `f ↦ ∂f` for concave `f`.
pub fn supergrad_flow(f: &SaddleObjective) -> Result<SelectorField> {
    require_labels(f, Curvature::Concave, "supergradient flow")?;
    pd_subg(f)
}

/// Primal-dual subgradient flow: `−∂ₓᵢ` on convex coordinates, `+∂ₓᵢ` on concave ones.
pub fn pd_subg(l: &SaddleObjective) -> Result<SelectorField> {
    let o = l.objective.oracle_fn().clone();
    let s = signs(&l.labels);
    Ok(SelectorField::new(l.dim(), move |x, seed| {
        o(x, seed).into_iter().zip(s.iter()).map(|(g, si)| si * g).collect()
    }))
}

/// Euler discretisation of [`pd_subg`].
pub fn pd_subg_step(l: &SaddleObjective, gamma: f64) -> Result<SelectorMap> {
    euler_ndd(&pd_subg(l)?, gamma)
}

/// Solver for a composite problem assembled from the solvers of its parts:
/// `oapply(Dynam_D, Φ, gd(fᵢ))`.
pub fn generate_solver(
    d: &Uwd,
    objectives: &[OpenObject<Objective>],
    gamma: f64,
) -> Result<OpenObject<DiscreteMap>> {
    let steps = objectives
        .iter()
        .map(|o| {
            Ok(OpenObject {
                domain_size: o.domain_size,
                payload: gd(&o.payload, gamma)?,
                port_map: o.port_map.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    oapply(&DynamD, d, &steps)
}

/// A map between algebras given by its components.
pub trait AlgebraMorphism {
    type Source: FinsetAlgebra;
    type Target: FinsetAlgebra;

    fn source(&self) -> &Self::Source;
    fn target(&self) -> &Self::Target;
    fn component(
        &self,
        obj: &<Self::Source as FinsetAlgebra>::Object,
    ) -> Result<<Self::Target as FinsetAlgebra>::Object>;
}

macro_rules! morphism {
    ($(#[$doc:meta])* $name:ident { $($field:ident: $ty:ty),* }, $src:ident -> $dst:ident, |$self_:ident, $obj:ident| $body:expr) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy)]
        pub struct $name { $(pub $field: $ty),* }

        impl AlgebraMorphism for $name {
            type Source = $src;
            type Target = $dst;

            fn source(&self) -> &$src {
                &$src
            }

            fn target(&self) -> &$dst {
                &$dst
            }

            fn component(
                &self,
                $obj: &<$src as FinsetAlgebra>::Object,
            ) -> Result<<$dst as FinsetAlgebra>::Object> {
                let $self_ = self;
                $body
            }
        }
    };
}

morphism!(GradFlow {}, Opt -> Dynam, |_m, f| grad_flow(f));
morphism!(Gd { gamma: f64 }, Opt -> DynamD, |m, f| gd(f, m.gamma));
morphism!(SaddleFlow {}, Saddle -> Dynam, |_m, l| saddle_flow(l));
morphism!(Gad { gamma: f64 }, Saddle -> DynamD, |m, l| gad(l, m.gamma));
morphism!(SubgFlow {}, Saddle -> Ndd, |_m, l| subgrad_flow(l));
morphism!(SupergFlow {}, Saddle -> Ndd, |_m, l| supergrad_flow(l));
morphism!(PdSubg {}, Saddle -> Ndd, |_m, l| pd_subg(l));
morphism!(PdSubgStep { gamma: f64 }, Saddle -> NddD, |m, l| pd_subg_step(l, m.gamma));
morphism!(Euler { gamma: f64 }, Dynam -> DynamD, |m, v| euler(v, m.gamma));
morphism!(EulerNdd { gamma: f64 }, Ndd -> NddD, |m, v| euler_ndd(v, m.gamma));

/// A corrupted gradient descent that flips the sign of one block's step, for
/// exercising the naturality harness.
#[derive(Debug, Clone, Copy)]
pub struct SignFlippedGd {
    pub gamma: f64,
    pub flipped_dim: usize,
}

impl AlgebraMorphism for SignFlippedGd {
    type Source = Opt;
    type Target = DynamD;

    fn source(&self) -> &Opt {
        &Opt
    }

    fn target(&self) -> &DynamD {
        &DynamD
    }

    fn component(&self, f: &Objective) -> Result<DiscreteMap> {
        if f.dim() == self.flipped_dim {
            gd(&f.negate(), self.gamma)
        } else {
            gd(f, self.gamma)
        }
    }
}

/// Payloads that can be compared by evaluation at points.
pub trait Extensional {
    fn point_dim(&self) -> usize;
    /// Scalar outputs (not indexed by coordinates).
    fn scalars(&self, x: &[f64], seed: u64) -> Vec<f64>;
    /// Outputs indexed by the same coordinates as `x`.
    fn coords(&self, x: &[f64], seed: u64) -> Vec<f64>;
    fn coord_labels(&self) -> Option<Vec<Curvature>> {
        None
    }
}

impl Extensional for Objective {
    fn point_dim(&self) -> usize {
        self.dim()
    }
    fn scalars(&self, x: &[f64], _seed: u64) -> Vec<f64> {
        vec![self.eval(x)]
    }
    fn coords(&self, x: &[f64], seed: u64) -> Vec<f64> {
        self.subgradient(x, seed)
    }
}

impl Extensional for SaddleObjective {
    fn point_dim(&self) -> usize {
        self.dim()
    }
    fn scalars(&self, x: &[f64], seed: u64) -> Vec<f64> {
        self.objective.scalars(x, seed)
    }
    fn coords(&self, x: &[f64], seed: u64) -> Vec<f64> {
        self.objective.coords(x, seed)
    }
    fn coord_labels(&self) -> Option<Vec<Curvature>> {
        Some(self.labels.clone())
    }
}

macro_rules! extensional_map {
    ($t:ty, |$v:ident, $x:ident, $seed:ident| $body:expr) => {
        impl Extensional for $t {
            fn point_dim(&self) -> usize {
                self.dim
            }
            fn scalars(&self, _x: &[f64], _seed: u64) -> Vec<f64> {
                Vec::new()
            }
            fn coords(&self, $x: &[f64], $seed: u64) -> Vec<f64> {
                let $v = self;
                let _ = $seed;
                $body
            }
        }
    };
}

extensional_map!(VectorField, |v, x, seed| v.eval(x));
extensional_map!(DiscreteMap, |v, x, seed| v.apply(x));
extensional_map!(SelectorField, |v, x, seed| v.eval(x, seed));
extensional_map!(SelectorMap, |v, x, seed| v.apply(x, seed));

/// Outcome of a naturality check.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalityReport {
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Box whose coordinates carry the largest mean discrepancy, when the check fails.
    pub suspect_box: Option<usize>,
}

pub const DEFAULT_NATURALITY_TOL: f64 = 1e-9;

/// Compares `η(oapply(Φ, fillers))` with `oapply(Φ, η(fillers))` at `points`
/// (each point is evaluated with the seed of the same index).
pub fn check_naturality<M>(
    morphism: &M,
    d: &Uwd,
    fillers: &[OpenObject<<M::Source as FinsetAlgebra>::Object>],
    points: &[Vec<f64>],
    tolerance: f64,
) -> Result<NaturalityReport>
where
    M: AlgebraMorphism,
    <M::Target as FinsetAlgebra>::Object: Extensional,
{
    let composite = oapply(morphism.source(), d, fillers)?;
    let top = morphism.component(&composite.payload)?;
    let mapped = fillers
        .iter()
        .map(|f| {
            Ok(OpenObject {
                domain_size: f.domain_size,
                payload: morphism.component(&f.payload)?,
                port_map: f.port_map.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bottom = oapply(morphism.target(), d, &mapped)?;

    let n = top.point_dim();
    let mut per_coord = vec![0.0; n];
    let mut max = 0.0f64;
    for (k, x) in points.iter().enumerate() {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                context: "naturality sample point",
                expected: n,
                actual: x.len(),
            });
        }
        let seed = k as u64;
        for (a, b) in top.scalars(x, seed).iter().zip(bottom.payload.scalars(x, seed)) {
            max = max.max((a - b).abs());
        }
        let (ta, tb) = (top.coords(x, seed), bottom.payload.coords(x, seed));
        for (i, (a, b)) in ta.iter().zip(&tb).enumerate() {
            let e = (a - b).abs();
            per_coord[i] += e;
            max = max.max(if e.is_nan() { f64::INFINITY } else { e });
        }
    }
    let pass = max <= tolerance;
    let suspect_box = if pass {
        None
    } else {
        let po = glue(d, fillers)?;
        suspect(&po, fillers, &per_coord)
    };
    Ok(NaturalityReport {
        max_discrepancy: max,
        tolerance,
        pass,
        suspect_box,
    })
}

fn suspect<T>(po: &PushoutResult, fillers: &[OpenObject<T>], per_coord: &[f64]) -> Option<usize> {
    let mut offset = 0;
    let mut best: Option<(usize, f64)> = None;
    for (b, f) in fillers.iter().enumerate() {
        let idx = offset..offset + f.domain_size;
        offset += f.domain_size;
        if idx.is_empty() {
            continue;
        }
        let mean = idx
            .clone()
            .map(|s| per_coord[po.proj_left.apply(s)])
            .sum::<f64>()
            / idx.len() as f64;
        if best.is_none_or(|(_, m)| mean > m) {
            best = Some((b, mean));
        }
    }
    best.map(|(b, _)| b)
}

/// Inner minimiser used by [`InfObjective`].
#[derive(Clone)]
pub enum InnerSolver {
    /// Gradient descent on the private block from a zero start.
    GradientDescent { gamma: f64, tol: f64, max_iters: usize },
    /// User-supplied `shared ↦ argmin_private f(shared, private)`.
    Argmin(Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>),
}

impl std::fmt::Debug for InnerSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InnerSolver::GradientDescent {
                gamma,
                tol,
                max_iters,
            } => f
                .debug_struct("GradientDescent")
                .field("gamma", gamma)
                .field("tol", tol)
                .field("max_iters", max_iters)
                .finish(),
            InnerSolver::Argmin(_) => f.write_str("Argmin(..)"),
        }
    }
}

impl InnerSolver {
    pub fn gradient_descent(gamma: f64) -> Self {
        InnerSolver::GradientDescent {
            gamma,
            tol: 1e-10,
            max_iters: 100_000,
        }
    }
}

/// `g(s) = inf_p f(s, p)` where the first `n_shared` coordinates of `f` are
/// `s`. Used to build primal decompositions: `∇g(s) = ∇ₛf(s, p*(s))`.
///
/// A failed inner solve yields NaN, which simulation reports as a
/// non-finite state.
#[derive(Debug, Clone)]
pub struct InfObjective {
    pub inner: Objective,
    pub n_shared: usize,
    pub solver: InnerSolver,
}

impl InfObjective {
    pub fn new(inner: Objective, n_shared: usize, solver: InnerSolver) -> Result<Self> {
        if n_shared > inner.dim() {
            return Err(Error::DimensionMismatch {
                context: "shared block of inf objective",
                expected: inner.dim(),
                actual: n_shared,
            });
        }
        if let InnerSolver::GradientDescent { gamma, .. } = solver {
            check_step(gamma)?;
        }
        Ok(Self {
            inner,
            n_shared,
            solver,
        })
    }

    /// The minimising private block, or `None` if the inner solve did not converge.
    pub fn argmin(&self, shared: &[f64]) -> Option<Vec<f64>> {
        let np = self.inner.dim() - self.n_shared;
        match &self.solver {
            InnerSolver::Argmin(f) => Some(f(shared)),
            InnerSolver::GradientDescent {
                gamma,
                tol,
                max_iters,
            } => {
                let mut z = shared.to_vec();
                z.resize(self.inner.dim(), 0.0);
                for _ in 0..*max_iters {
                    let g = self.inner.grad(&z);
                    let gp = &g[self.n_shared..];
                    if norm_inf(gp) <= *tol {
                        return Some(z[self.n_shared..].to_vec());
                    }
                    for (zi, gi) in z[self.n_shared..].iter_mut().zip(gp) {
                        *zi -= gamma * gi;
                    }
                    if z.iter().any(|v| !v.is_finite()) {
                        return None;
                    }
                }
                let g = self.inner.grad(&z);
                (np == 0 || norm_inf(&g[self.n_shared..]) <= *tol)
                    .then(|| z[self.n_shared..].to_vec())
            }
        }
    }

    pub fn objective(&self) -> Objective {
        let me = Arc::new(self.clone());
        let me2 = me.clone();
        let full = |m: &InfObjective, s: &[f64]| -> Option<Vec<f64>> {
            let p = m.argmin(s)?;
            let mut z = s.to_vec();
            z.extend(p);
            Some(z)
        };
        Objective::differentiable(
            self.n_shared,
            move |s| full(&me, s).map_or(f64::NAN, |z| me.inner.eval(&z)),
            move |s| match full(&me2, s) {
                Some(z) => me2.inner.grad(&z)[..me2.n_shared].to_vec(),
                None => vec![f64::NAN; s.len()],
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate;
    use crate::finset::FinFunction;
    use crate::uwd::fixtures;

    fn sq() -> Objective {
        Objective::differentiable(1, |x| x[0] * x[0], |x| vec![2.0 * x[0]])
    }

    #[test]
    fn gd_scalar_step() {
        let s = gd(&sq(), 0.1).unwrap();
        assert!((s.apply(&[1.0])[0] - 0.8).abs() < 1e-15);
        assert!(matches!(gd(&sq(), 0.0), Err(Error::InvalidStepSize(_))));
        let c = Objective::differentiable(2, |_| 4.0, |_| vec![0.0, 0.0]);
        assert_eq!(grad_flow(&c).unwrap().eval(&[1.0, 2.0]), vec![-0.0, -0.0]);
    }

    #[test]
    fn gd_is_euler_of_flow() {
        let f = Objective::quadratic(vec![vec![3.0, 1.0], vec![1.0, 2.0]], vec![0.5, -1.0]).unwrap();
        let a = gd(&f, 0.07).unwrap();
        let b = euler(&grad_flow(&f).unwrap(), 0.07).unwrap();
        for x in [[0.1, 0.2], [-3.0, 5.5]] {
            assert_eq!(a.apply(&x), b.apply(&x));
        }
    }

    #[test]
    fn subdifferentiable_rejected_by_gradient_flow() {
        let abs = Objective::subdifferentiable(1, |x| x[0].abs(), |x, _| vec![x[0].signum()]);
        assert!(grad_flow(&abs).is_err());
        let sel = subgrad_flow(&SaddleObjective::convex(abs.clone())).unwrap();
        assert_eq!(sel.eval(&[2.0], 0), vec![-1.0]);
        assert_eq!(sel.eval(&[-2.0], 0), vec![1.0]);
        assert!(supergrad_flow(&SaddleObjective::convex(abs)).is_err());
    }

    #[test]
    fn gad_converges_to_saddle() {
        // L(x, λ) = x² + λ(x − 1): saddle at x = 1, λ = −2.
        let l = SaddleObjective::new(
            Objective::differentiable(
                2,
                |z| z[0] * z[0] + z[1] * (z[0] - 1.0),
                |z| vec![2.0 * z[0] + z[1], z[0] - 1.0],
            ),
            vec![Curvature::Convex, Curvature::Concave],
        )
        .unwrap();
        let step = gad(&l, 0.1).unwrap();
        let traj = simulate(&step, &[0.0, 0.0], 2000).unwrap();
        let last = traj.last().unwrap();
        assert!((last[0] - 1.0).abs() < 1e-8 && (last[1] + 2.0).abs() < 1e-8, "{last:?}");
    }

    #[test]
    fn gad_all_convex_is_gd() {
        let f = Objective::quadratic(vec![vec![2.0]], vec![1.0]).unwrap();
        let a = gad(&SaddleObjective::convex(f.clone()), 0.2).unwrap();
        let b = gd(&f, 0.2).unwrap();
        assert_eq!(a.apply(&[0.7]), b.apply(&[0.7]));
    }

    fn chain_fillers() -> Vec<OpenObject<Objective>> {
        [(2usize, 1.0), (3, 2.0), (3, 0.5)]
            .iter()
            .map(|&(n, c)| {
                let f = Objective::differentiable(
                    n,
                    move |x| x.iter().enumerate().map(|(i, v)| c * (v - i as f64).powi(2)).sum(),
                    move |x| x.iter().enumerate().map(|(i, v)| 2.0 * c * (v - i as f64)).collect(),
                );
                OpenObject::closed_identity(&Opt, f)
            })
            .collect()
    }

    #[test]
    fn naturality_harness_passes_and_locates_corruption() {
        let d = fixtures::three_box_chain();
        let fillers = chain_fillers();
        let points: Vec<Vec<f64>> = (0..20)
            .map(|k| (0..5).map(|i| ((k * 7 + i * 3) % 11) as f64 / 3.0 - 1.5).collect())
            .collect();
        let ok = check_naturality(&Gd { gamma: 0.05 }, &d, &fillers, &points, 1e-9).unwrap();
        assert!(ok.pass, "{ok:?}");
        let bad = check_naturality(
            &SignFlippedGd {
                gamma: 0.05,
                flipped_dim: 2,
            },
            &d,
            &fillers,
            &points,
            1e-9,
        )
        .unwrap();
        assert!(!bad.pass);
        assert_eq!(bad.suspect_box, Some(0));
    }

    #[test]
    fn generated_solver_matches_composite_gd() {
        let d = fixtures::three_box_chain();
        let fillers = chain_fillers();
        let solver = generate_solver(&d, &fillers, 0.05).unwrap();
        let composite = oapply(&Opt, &d, &fillers).unwrap();
        let direct = gd(&composite.payload, 0.05).unwrap();
        let x0 = [0.0; 5];
        let a = simulate(&solver.payload, &x0, 100).unwrap();
        let b = simulate(&direct, &x0, 100).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!(crate::freevect::max_abs_diff(p, q) < 1e-12);
        }
    }

    #[test]
    fn inf_objective_eliminates_private_block() {
        // f(s, p) = (s − p)² + p²  ⇒  p* = s/2, g(s) = s²/2.
        let f = Objective::differentiable(
            2,
            |z| (z[0] - z[1]).powi(2) + z[1] * z[1],
            |z| vec![2.0 * (z[0] - z[1]), -2.0 * (z[0] - z[1]) + 2.0 * z[1]],
        );
        let g = InfObjective::new(f.clone(), 1, InnerSolver::gradient_descent(0.2)).unwrap();
        let obj = g.objective();
        assert!((obj.eval(&[3.0]) - 4.5).abs() < 1e-9);
        assert!((obj.grad(&[3.0])[0] - 3.0).abs() < 1e-9);
        let exact = InfObjective::new(f, 1, InnerSolver::Argmin(Arc::new(|s| vec![s[0] / 2.0]))).unwrap();
        assert_eq!(exact.objective().grad(&[3.0]), vec![3.0]);
    }

    #[test]
    fn inf_objective_failure_is_nan() {
        let unbounded = Objective::differentiable(2, |z| z[0] - z[1], |_| vec![1.0, -1.0]);
        let g = InfObjective::new(
            unbounded,
            1,
            InnerSolver::GradientDescent {
                gamma: 0.1,
                tol: 1e-10,
                max_iters: 100,
            },
        )
        .unwrap();
        assert!(g.objective().eval(&[0.0]).is_nan());
        let step = gd(&g.objective(), 0.1).unwrap();
        assert!(matches!(
            simulate(&step, &[0.0], 3),
            Err(Error::NonFinite { step: 1 })
        ));
    }

    #[test]
    fn primal_decomposition_solves_chain() {
        // minimise f(w,x) + g(u,w,y) + h(u,w,z) by eliminating x, y, z.
        let quad = |centre: Vec<f64>| {
            let c2 = centre.clone();
            let n = centre.len();
            Objective::differentiable(
                n,
                move |v| v.iter().zip(&centre).map(|(a, b)| (a - b).powi(2)).sum(),
                move |v| v.iter().zip(&c2).map(|(a, b)| 2.0 * (a - b)).collect(),
            )
        };
        let f = quad(vec![1.0, 0.0]);
        let g = quad(vec![2.0, 3.0, 0.0]);
        let h = quad(vec![0.0, -1.0, 5.0]);
        let inf = |o: Objective, n: usize| {
            InfObjective::new(o, n, InnerSolver::gradient_descent(0.25))
                .unwrap()
                .objective()
        };
        // Shared variables: w for f, (u, w) for g and h.
        let d = Uwd::new(vec![1, 2, 2], 2, vec![1, 0, 1, 0, 1], vec![0, 1]).unwrap();
        let fillers = vec![
            OpenObject::closed_identity(&Opt, inf(f, 1)),
            OpenObject::closed_identity(&Opt, inf(g, 2)),
            OpenObject::closed_identity(&Opt, inf(h, 2)),
        ];
        let solver = generate_solver(&d, &fillers, 0.1).unwrap();
        let traj = simulate(&solver.payload, &[0.0, 0.0], 300).unwrap();
        let last = traj.last().unwrap();
        // u* = mean(2, 0) = 1; w* = mean(1, 3, −1) = 1.
        assert!((last[0] - 1.0).abs() < 1e-8 && (last[1] - 1.0).abs() < 1e-8, "{last:?}");
        let _ = FinFunction::identity(0);
    }
}
