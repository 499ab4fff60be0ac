//! Objectives and the algebras that compose them: `Opt` for unconstrained
//! problems and `Saddle` for problems with convex and concave coordinates.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finset::FinFunction;
use crate::freevect::{pullback_unchecked, pushforward_apply, pushforward_into};
use crate::mix64;
use crate::opensys::FinsetAlgebra;
use crate::uwd::Curvature;

pub type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// First-order oracle. The seed picks an element of the subdifferential
/// and is ignored by differentiable objectives.
pub type OracleFn = Arc<dyn Fn(&[f64], u64) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Differentiable,
    Subdifferentiable,
}

/// A real-valued function on `ℝᴺ` with a first-order oracle.
#[derive(Clone)]
pub struct Objective {
    dim: usize,
    eval: EvalFn,
    oracle: OracleFn,
    smoothness: Smoothness,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("dim", &self.dim)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

impl Objective {
    pub fn differentiable(
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            oracle: Arc::new(move |x, _| grad(x)),
            smoothness: Smoothness::Differentiable,
        }
    }

    /// `select(x, seed)` must return some subgradient of a convex `eval`
    /// (or supergradient of a concave one) at `x`.
    pub fn subdifferentiable(
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        select: impl Fn(&[f64], u64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            oracle: Arc::new(select),
            smoothness: Smoothness::Subdifferentiable,
        }
    }

    pub fn from_parts(dim: usize, eval: EvalFn, oracle: OracleFn, smoothness: Smoothness) -> Self {
        Self {
            dim,
            eval,
            oracle,
            smoothness,
        }
    }

    /// Gradient by central differences with `h = 1e-6·max(1, |xᵢ|)`. Meant for tests.
    pub fn finite_difference(dim: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let eval: EvalFn = Arc::new(eval);
        let e = eval.clone();
        let grad = move |x: &[f64]| central_difference(&*e, x);
        Self {
            dim,
            eval,
            oracle: Arc::new(move |x, _| grad(x)),
            smoothness: Smoothness::Differentiable,
        }
    }

    /// The constant zero function on `ℝⁿ`.
    pub fn zero(n: usize) -> Self {
        Self::differentiable(n, |_| 0.0, move |_| vec![0.0; n])
    }

    /// `½ xᵀPx + qᵀx`.
    pub fn quadratic(p: Vec<Vec<f64>>, q: Vec<f64>) -> Result<Self> {
        QuadraticSpec { p, q }.to_objective()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.oracle)(x, 0)
    }

    pub fn subgradient(&self, x: &[f64], seed: u64) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.oracle)(x, seed)
    }

    pub fn eval_fn(&self) -> &EvalFn {
        &self.eval
    }

    pub fn oracle_fn(&self) -> &OracleFn {
        &self.oracle
    }

    /// `-f`, with the oracle negated.
    pub fn negate(&self) -> Self {
        let e = self.eval.clone();
        let o = self.oracle.clone();
        Self {
            dim: self.dim,
            eval: Arc::new(move |x| -e(x)),
            oracle: Arc::new(move |x, s| o(x, s).into_iter().map(|g| -g).collect()),
            smoothness: self.smoothness,
        }
    }
}

pub(crate) fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// JSON form of a quadratic objective: `{"P": [[..]], "q": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSpec {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub q: Vec<f64>,
}

impl QuadraticSpec {
    pub fn to_objective(&self) -> Result<Objective> {
        let n = self.q.len();
        if self.p.len() != n {
            return Err(Error::DimensionMismatch {
                context: "quadratic P rows",
                expected: n,
                actual: self.p.len(),
            });
        }
        if let Some(row) = self.p.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "quadratic P columns",
                expected: n,
                actual: row.len(),
            });
        }
        let p = Arc::new(self.p.clone());
        let q = Arc::new(self.q.clone());
        let (pe, qe) = (p.clone(), q.clone());
        let eval = move |x: &[f64]| {
            let mut v = 0.0;
            for i in 0..n {
                let row: f64 = pe[i].iter().zip(x).map(|(a, b)| a * b).sum();
                v += 0.5 * x[i] * row + qe[i] * x[i];
            }
            v
        };
        let grad = move |x: &[f64]| {
            (0..n)
                .map(|i| {
                    let sym: f64 = (0..n).map(|j| 0.5 * (p[i][j] + p[j][i]) * x[j]).sum();
                    sym + q[i]
                })
                .collect()
        };
        Ok(Objective::differentiable(n, eval, grad))
    }
}

/// Unconstrained problems: `φ` acts by precomposition with the pullback.
#[derive(Debug, Clone, Copy, Default)]
pub struct Opt;

impl FinsetAlgebra for Opt {
    type Object = Objective;

    fn dimension(&self, f: &Objective) -> usize {
        f.dim
    }

    fn act(&self, phi: &FinFunction, f: &Objective) -> Result<Objective> {
        if phi.dom_size() != f.dim {
            return Err(Error::DimensionMismatch {
                context: "objective action",
                expected: f.dim,
                actual: phi.dom_size(),
            });
        }
        let (pe, po) = (Arc::new(phi.clone()), Arc::new(phi.clone()));
        let (e, o) = (f.eval.clone(), f.oracle.clone());
        let codom = phi.codom_size();
        Ok(Objective {
            dim: codom,
            eval: Arc::new(move |y| e(&pullback_unchecked(&pe, y))),
            oracle: Arc::new(move |y, seed| {
                let g = o(&pullback_unchecked(&po, y), seed);
                let mut out = vec![0.0; codom];
                pushforward_into(&po, &g, &mut out);
                out
            }),
            smoothness: f.smoothness,
        })
    }

    fn unit(&self) -> Objective {
        Objective::zero(0)
    }

    fn product(&self, a: &Objective, b: &Objective) -> Objective {
        self.combine(&[a.clone(), b.clone()])
    }

    /// Block sum `Σ fᵢ(zᵢ)`; block `i` receives seed `mix64(seed, i)`.
    fn combine(&self, fs: &[Objective]) -> Objective {
        let blocks: Arc<Vec<(usize, usize, Objective)>> = Arc::new(
            fs.iter()
                .scan(0, |off, f| {
                    let o = *off;
                    *off += f.dim;
                    Some((o, o + f.dim, f.clone()))
                })
                .collect(),
        );
        let dim = fs.iter().map(|f| f.dim).sum();
        let smoothness = if fs.iter().any(|f| f.smoothness == Smoothness::Subdifferentiable) {
            Smoothness::Subdifferentiable
        } else {
            Smoothness::Differentiable
        };
        let eb = blocks.clone();
        Objective {
            dim,
            eval: Arc::new(move |z| eb.iter().map(|(a, b, f)| (f.eval)(&z[*a..*b])).sum()),
            oracle: Arc::new(move |z, seed| {
                let mut out = Vec::with_capacity(z.len());
                for (i, (a, b, f)) in blocks.iter().enumerate() {
                    out.extend((f.oracle)(&z[*a..*b], mix64(seed, i as u64)));
                }
                out
            }),
            smoothness,
        }
    }
}

/// An objective whose coordinates are each labelled convex or concave.
#[derive(Debug, Clone)]
pub struct SaddleObjective {
    pub objective: Objective,
    pub labels: Vec<Curvature>,
}

impl SaddleObjective {
    pub fn new(objective: Objective, labels: Vec<Curvature>) -> Result<Self> {
        if labels.len() != objective.dim {
            return Err(Error::DimensionMismatch {
                context: "saddle labels",
                expected: objective.dim,
                actual: labels.len(),
            });
        }
        Ok(Self { objective, labels })
    }

    /// Like [`SaddleObjective::new`], but also spot-checks the saddle property
    /// with Jensen's inequality at random point pairs.
    pub fn new_strict(
        objective: Objective,
        labels: Vec<Curvature>,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let s = Self::new(objective, labels)?;
        if let Some(msg) = s.jensen_violation(rng, 50, 2.0) {
            return Err(Error::Invalid(msg));
        }
        Ok(s)
    }

    pub fn convex(objective: Objective) -> Self {
        let labels = vec![Curvature::Convex; objective.dim];
        Self { objective, labels }
    }

    pub fn concave(objective: Objective) -> Self {
        let labels = vec![Curvature::Concave; objective.dim];
        Self { objective, labels }
    }

    pub fn dim(&self) -> usize {
        self.objective.dim
    }

    /// Looks for a pair of points, differing only in coordinates of one
    /// label, along which the restriction fails Jensen's inequality.
    pub fn jensen_violation(&self, rng: &mut impl Rng, pairs: usize, scale: f64) -> Option<String> {
        let n = self.dim();
        for _ in 0..pairs {
            let base: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
            for kind in [Curvature::Convex, Curvature::Concave] {
                let mut other = base.clone();
                for i in 0..n {
                    if self.labels[i] == kind {
                        other[i] = rng.random_range(-scale..scale);
                    }
                }
                for t in [0.25, 0.5, 0.75] {
                    let mid: Vec<f64> = base
                        .iter()
                        .zip(&other)
                        .map(|(a, b)| (1.0 - t) * a + t * b)
                        .collect();
                    let fm = self.objective.eval(&mid);
                    let chord =
                        (1.0 - t) * self.objective.eval(&base) + t * self.objective.eval(&other);
                    let tol = 1e-9 * (1.0 + chord.abs());
                    let bad = match kind {
                        Curvature::Convex => fm > chord + tol,
                        Curvature::Concave => fm < chord - tol,
                    };
                    if bad {
                        return Some(format!(
                            "{kind:?} restriction fails Jensen at t={t}: f(mid)={fm}, chord={chord}"
                        ));
                    }
                }
            }
        }
        None
    }
}

/// Saddle problems: precomposition along label-preserving functions.
#[derive(Debug, Clone, Copy, Default)]
pub struct Saddle;

impl FinsetAlgebra for Saddle {
    type Object = SaddleObjective;

    fn dimension(&self, s: &SaddleObjective) -> usize {
        s.dim()
    }

    /// Target labels are read off the fibres of `φ`; an empty fibre has no
    /// label to inherit and is rejected (use `act_labelled`).
    fn act(&self, phi: &FinFunction, s: &SaddleObjective) -> Result<SaddleObjective> {
        if phi.dom_size() != s.dim() {
            return Err(Error::DimensionMismatch {
                context: "saddle action",
                expected: s.dim(),
                actual: phi.dom_size(),
            });
        }
        let mut target: Vec<Option<Curvature>> = vec![None; phi.codom_size()];
        for (i, &j) in phi.as_slice().iter().enumerate() {
            match target[j] {
                Some(l) if l != s.labels[i] => {
                    return Err(Error::LabelMismatch {
                        junction: j,
                        detail: format!("{l:?} and {:?} coordinates merged", s.labels[i]),
                    })
                }
                _ => target[j] = Some(s.labels[i]),
            }
        }
        let labels = target
            .into_iter()
            .enumerate()
            .map(|(j, l)| {
                l.ok_or_else(|| Error::LabelMismatch {
                    junction: j,
                    detail: "no coordinate maps here; label is undetermined".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.act_labelled(phi, Some(&labels), s)
    }

    fn unit(&self) -> SaddleObjective {
        SaddleObjective::convex(Objective::zero(0))
    }

    fn product(&self, a: &SaddleObjective, b: &SaddleObjective) -> SaddleObjective {
        self.combine(&[a.clone(), b.clone()])
    }

    fn combine(&self, ss: &[SaddleObjective]) -> SaddleObjective {
        let objs: Vec<_> = ss.iter().map(|s| s.objective.clone()).collect();
        SaddleObjective {
            objective: Opt.combine(&objs),
            labels: ss.iter().flat_map(|s| s.labels.iter().copied()).collect(),
        }
    }

    fn labels(&self, s: &SaddleObjective) -> Option<Vec<Curvature>> {
        Some(s.labels.clone())
    }

    fn act_labelled(
        &self,
        phi: &FinFunction,
        target: Option<&[Curvature]>,
        s: &SaddleObjective,
    ) -> Result<SaddleObjective> {
        let Some(target) = target else {
            return self.act(phi, s);
        };
        if target.len() != phi.codom_size() {
            return Err(Error::DimensionMismatch {
                context: "saddle target labels",
                expected: phi.codom_size(),
                actual: target.len(),
            });
        }
        for (i, &j) in phi.as_slice().iter().enumerate() {
            if s.labels.get(i) != Some(&target[j]) {
                return Err(Error::LabelMismatch {
                    junction: j,
                    detail: format!(
                        "coordinate {i} is {:?} but its image is {:?}",
                        s.labels.get(i),
                        target[j]
                    ),
                });
            }
        }
        Ok(SaddleObjective {
            objective: Opt.act(phi, &s.objective)?,
            labels: target.to_vec(),
        })
    }
}

/// Gradient of a composite `Opt` payload computed through explicit matrices,
/// `Kᵀ ∇F(K y)`. Used as an independent check of the closure route.
pub fn composite_grad_via_matrix(phi: &FinFunction, combined: &Objective, y: &[f64]) -> Result<Vec<f64>> {
    let k = crate::freevect::pullback_matrix(phi);
    let ky = &k * nalgebra::DVector::from_column_slice(y);
    let g = combined.grad(ky.as_slice());
    pushforward_apply(phi, &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sq2() -> Objective {
        Objective::differentiable(2, |x| x[0] * x[0] + x[1] * x[1], |x| vec![2.0 * x[0], 2.0 * x[1]])
    }

    #[test]
    fn act_merging_coordinates() {
        let phi = FinFunction::new(vec![0, 0], 1).unwrap();
        let g = Opt.act(&phi, &sq2()).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.eval(&[3.0]), 18.0);
        assert_eq!(g.grad(&[3.0]), vec![12.0]);
    }

    #[test]
    fn act_identity_unchanged() {
        let g = Opt.act(&FinFunction::identity(2), &sq2()).unwrap();
        assert_eq!(g.eval(&[1.5, -2.0]), sq2().eval(&[1.5, -2.0]));
        assert_eq!(g.grad(&[1.5, -2.0]), sq2().grad(&[1.5, -2.0]));
    }

    #[test]
    fn act_rejects_wrong_domain() {
        assert!(Opt.act(&FinFunction::identity(3), &sq2()).is_err());
    }

    #[test]
    fn combine_blocks() {
        let f = Objective::differentiable(1, |x| x[0] * x[0], |x| vec![2.0 * x[0]]);
        let g = Objective::differentiable(1, |y| 3.0 * y[0], |_| vec![3.0]);
        let h = Opt.combine(&[f, g]);
        assert_eq!(h.eval(&[2.0, 5.0]), 19.0);
        assert_eq!(h.grad(&[2.0, 5.0]), vec![4.0, 3.0]);
        let unit = Opt.combine(&[]);
        assert_eq!(unit.dim(), 0);
        assert_eq!(unit.eval(&[]), 0.0);
    }

    #[test]
    fn quadratic_matches_finite_difference() {
        let q = Objective::quadratic(vec![vec![2.0, 1.0], vec![0.0, 4.0]], vec![1.0, -1.0]).unwrap();
        let e = q.eval_fn().clone();
        let fd = Objective::finite_difference(2, move |x| e(x));
        let x = [0.3, -1.7];
        for (a, b) in q.grad(&x).iter().zip(fd.grad(&x)) {
            assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
        }
        assert!((q.eval(&x) - (0.5 * (2.0 * 0.09 + 0.3 * -1.7 + 4.0 * 2.89) + 0.3 + 1.7)).abs() < 1e-12);
    }

    #[test]
    fn quadratic_json() {
        let spec: QuadraticSpec = serde_json::from_str(r#"{"P":[[2.0]],"q":[1.0]}"#).unwrap();
        let f = spec.to_objective().unwrap();
        assert_eq!(f.eval(&[2.0]), 6.0);
        let bad = QuadraticSpec { p: vec![vec![1.0, 2.0]], q: vec![0.0] };
        assert!(bad.to_objective().is_err());
    }

    #[test]
    fn saddle_labels_transport() {
        use Curvature::*;
        let l = SaddleObjective::new(sq2(), vec![Convex, Concave]).unwrap();
        let swap = FinFunction::new(vec![1, 0], 2).unwrap();
        let t = Saddle.act(&swap, &l).unwrap();
        assert_eq!(t.labels, vec![Concave, Convex]);
        let merge = FinFunction::new(vec![0, 0], 1).unwrap();
        assert!(matches!(
            Saddle.act(&merge, &l),
            Err(Error::LabelMismatch { junction: 0, .. })
        ));
        let spread = FinFunction::new(vec![0, 1], 3).unwrap();
        assert!(Saddle.act(&spread, &l).is_err());
        let ok = Saddle
            .act_labelled(&spread, Some(&[Convex, Concave, Convex]), &l)
            .unwrap();
        assert_eq!(ok.dim(), 3);
    }

    #[test]
    fn jensen_spot_check() {
        use Curvature::*;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lag = Objective::differentiable(
            2,
            |z| z[0] * z[0] + z[1] * (z[0] - 1.0),
            |z| vec![2.0 * z[0] + z[1], z[0] - 1.0],
        );
        assert!(SaddleObjective::new_strict(lag.clone(), vec![Convex, Concave], &mut rng).is_ok());
        let flipped = lag.negate();
        assert!(SaddleObjective::new_strict(flipped, vec![Convex, Concave], &mut rng).is_err());
    }
}
