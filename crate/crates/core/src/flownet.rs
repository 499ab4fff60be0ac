//! Flow networks, their algebra, the dual function of minimum-cost network
//! flow, and the standard and hierarchical dual-decomposition solvers.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate_message_passing, simulate_visit, ExecutionMode};
use crate::error::{Error, Result};
use crate::finset::FinFunction;
use crate::freevect::{dot, norm_inf, pullback_unchecked, pushforward_apply, Triplets};
use crate::morphisms::{gad, AlgebraMorphism};
use crate::opensys::{glue, oapply, FinsetAlgebra, OpenObject};
use crate::problems::{Objective, Opt, SaddleObjective, Smoothness};
use crate::uwd::Uwd;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Convex cost of pushing flow `ξ` along one edge.
#[derive(Clone)]
pub enum EdgeCost {
    /// `a ξ² + b ξ` with `a > 0`.
    Quadratic { a: f64, b: f64 },
    /// Arbitrary convex cost given by value and derivative. `strict` marks a
    /// strictly increasing derivative, i.e. a unique inner minimiser.
    Custom {
        eval: ScalarFn,
        deriv: ScalarFn,
        strict: bool,
    },
}

impl fmt::Debug for EdgeCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeCost::Quadratic { a, b } => write!(f, "Quadratic {{ a: {a}, b: {b} }}"),
            EdgeCost::Custom { strict, .. } => write!(f, "Custom {{ strict: {strict}, .. }}"),
        }
    }
}

const BISECTION_TOL: f64 = 1e-12;
const MAX_EXPANSIONS: usize = 200;

impl EdgeCost {
    pub fn quadratic(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Invalid(format!(
                "quadratic edge cost needs finite a > 0 and finite b, got a = {a}, b = {b}"
            )));
        }
        Ok(EdgeCost::Quadratic { a, b })
    }

    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            EdgeCost::Quadratic { a, b } => a * xi * xi + b * xi,
            EdgeCost::Custom { eval, .. } => eval(xi),
        }
    }

    pub fn deriv(&self, xi: f64) -> f64 {
        match self {
            EdgeCost::Quadratic { a, b } => 2.0 * a * xi + b,
            EdgeCost::Custom { deriv, .. } => deriv(xi),
        }
    }

    pub fn is_strict(&self) -> bool {
        match self {
            EdgeCost::Quadratic { .. } => true,
            EdgeCost::Custom { strict, .. } => *strict,
        }
    }

    /// `argmin_ξ ℓ(ξ) + c ξ`: closed form for quadratics, otherwise bisection
    /// on `ℓ'(ξ) + c` over an expanding bracket.
    pub fn argmin_shifted(&self, c: f64, edge: usize) -> Result<f64> {
        match self {
            EdgeCost::Quadratic { a, b } => Ok(-(b + c) / (2.0 * a)),
            EdgeCost::Custom { deriv, .. } => {
                let g = |x: f64| deriv(x) + c;
                let (mut lo, mut hi) = (-1.0f64, 1.0f64);
                let mut expansions = 0;
                while !(g(lo) <= 0.0 && g(hi) >= 0.0) {
                    if expansions == MAX_EXPANSIONS {
                        return Err(Error::InnerSolve {
                            edge,
                            reason: format!("no sign change of ℓ' + {c} within ±{hi:e}"),
                        });
                    }
                    lo *= 2.0;
                    hi *= 2.0;
                    expansions += 1;
                }
                loop {
                    let mid = 0.5 * (lo + hi);
                    let gm = g(mid);
                    if gm.abs() <= BISECTION_TOL || hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
                        return Ok(mid);
                    }
                    if gm.is_nan() {
                        return Err(Error::InnerSolve {
                            edge,
                            reason: "derivative returned NaN".into(),
                        });
                    }
                    if gm > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
        }
    }
}

/// `(E, s, t, ℓ, b)`: edges with endpoints, edge costs and a balanced
/// vertex supply vector (positive entries flow in).
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    pub src: FinFunction,
    pub tgt: FinFunction,
    pub costs: Vec<EdgeCost>,
    pub balance: Vec<f64>,
}

const BALANCE_TOL: f64 = 1e-12;

impl FlowNetwork {
    pub fn new(
        vertices: usize,
        src: Vec<usize>,
        tgt: Vec<usize>,
        costs: Vec<EdgeCost>,
        balance: Vec<f64>,
    ) -> Result<Self> {
        let g = Self {
            src: FinFunction::new(src, vertices)?,
            tgt: FinFunction::new(tgt, vertices)?,
            costs,
            balance,
        };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        let e = self.src.dom_size();
        for (context, n) in [("edge targets", self.tgt.dom_size()), ("edge costs", self.costs.len())] {
            if n != e {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: e,
                    actual: n,
                });
            }
        }
        if self.tgt.codom_size() != self.src.codom_size() {
            return Err(Error::DimensionMismatch {
                context: "edge endpoint vertex count",
                expected: self.src.codom_size(),
                actual: self.tgt.codom_size(),
            });
        }
        if self.balance.len() != self.vertices() {
            return Err(Error::DimensionMismatch {
                context: "balance vector",
                expected: self.vertices(),
                actual: self.balance.len(),
            });
        }
        let total: f64 = self.balance.iter().sum();
        if total.abs() > BALANCE_TOL {
            return Err(Error::Invalid(format!("balance sums to {total:e}, not 0")));
        }
        Ok(())
    }

    pub fn vertices(&self) -> usize {
        self.src.codom_size()
    }

    pub fn edges(&self) -> usize {
        self.src.dom_size()
    }

    /// `V × E` incidence: `+1` at the source, `−1` at the target, nothing for self-loops.
    pub fn incidence(&self) -> Triplets {
        let mut t = Triplets::new(self.vertices(), self.edges());
        for e in 0..self.edges() {
            let (s, d) = (self.src.apply(e), self.tgt.apply(e));
            if s != d {
                t.push(s, e, 1.0);
                t.push(d, e, -1.0);
            }
        }
        t
    }

    /// `Ax − b`.
    pub fn residual(&self, flows: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = self.balance.iter().map(|b| -b).collect();
        for (e, &x) in flows.iter().enumerate() {
            let (s, d) = (self.src.apply(e), self.tgt.apply(e));
            if s != d {
                r[s] += x;
                r[d] -= x;
            }
        }
        r
    }

    pub fn cost(&self, flows: &[f64]) -> f64 {
        self.costs.iter().zip(flows).map(|(c, &x)| c.eval(x)).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum CostJson {
    Quadratic { a: f64, b: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FlowNetworkJson {
    #[serde(rename = "V")]
    v: usize,
    #[serde(rename = "E")]
    e: usize,
    src: Vec<usize>,
    tgt: Vec<usize>,
    costs: Vec<CostJson>,
    balance: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ports: Option<Vec<usize>>,
}

/// Parses a network; `ports` (if present) become the port map, otherwise no ports.
pub fn network_from_json(s: &str) -> Result<OpenObject<FlowNetwork>> {
    let raw: FlowNetworkJson = serde_json::from_str(s).map_err(|e| Error::Invalid(e.to_string()))?;
    if raw.src.len() != raw.e {
        return Err(Error::DimensionMismatch {
            context: "declared edge count",
            expected: raw.e,
            actual: raw.src.len(),
        });
    }
    let costs = raw
        .costs
        .iter()
        .map(|c| match *c {
            CostJson::Quadratic { a, b } => EdgeCost::quadratic(a, b),
        })
        .collect::<Result<Vec<_>>>()?;
    let g = FlowNetwork::new(raw.v, raw.src, raw.tgt, costs, raw.balance)?;
    let ports = FinFunction::new(raw.ports.unwrap_or_default(), raw.v)?;
    OpenObject::new(&FlowNet, g, ports)
}

pub fn network_to_json(g: &OpenObject<FlowNetwork>) -> Result<String> {
    let costs = g
        .payload
        .costs
        .iter()
        .map(|c| match c {
            EdgeCost::Quadratic { a, b } => Ok(CostJson::Quadratic { a: *a, b: *b }),
            EdgeCost::Custom { .. } => Err(Error::Invalid("custom edge costs have no JSON form".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = FlowNetworkJson {
        v: g.payload.vertices(),
        e: g.payload.edges(),
        src: g.payload.src.as_slice().to_vec(),
        tgt: g.payload.tgt.as_slice().to_vec(),
        costs,
        balance: g.payload.balance.clone(),
        ports: Some(g.port_map.as_slice().to_vec()),
    };
    serde_json::to_string(&raw).map_err(|e| Error::Invalid(e.to_string()))
}

/// Flow networks over their vertex sets: `φ` relabels endpoints and pushes
/// the balance forward; products are disjoint unions.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlowNet;

impl FinsetAlgebra for FlowNet {
    type Object = FlowNetwork;

    fn dimension(&self, g: &FlowNetwork) -> usize {
        g.vertices()
    }

    fn act(&self, phi: &FinFunction, g: &FlowNetwork) -> Result<FlowNetwork> {
        if phi.dom_size() != g.vertices() {
            return Err(Error::DimensionMismatch {
                context: "flow network action",
                expected: g.vertices(),
                actual: phi.dom_size(),
            });
        }
        Ok(FlowNetwork {
            src: g.src.compose(phi)?,
            tgt: g.tgt.compose(phi)?,
            costs: g.costs.clone(),
            balance: pushforward_apply(phi, &g.balance)?,
        })
    }

    fn unit(&self) -> FlowNetwork {
        FlowNetwork {
            src: FinFunction::empty(0),
            tgt: FinFunction::empty(0),
            costs: Vec::new(),
            balance: Vec::new(),
        }
    }

    fn product(&self, a: &FlowNetwork, b: &FlowNetwork) -> FlowNetwork {
        self.combine(&[a.clone(), b.clone()])
    }

    fn combine(&self, gs: &[FlowNetwork]) -> FlowNetwork {
        FlowNetwork {
            src: FinFunction::coproduct_all(gs.iter().map(|g| &g.src)),
            tgt: FinFunction::coproduct_all(gs.iter().map(|g| &g.tgt)),
            costs: gs.iter().flat_map(|g| g.costs.iter().cloned()).collect(),
            balance: gs.iter().flat_map(|g| g.balance.iter().copied()).collect(),
        }
    }
}

/// How the dual function stores the incidence matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IncidenceStorage {
    /// Dense `V × E`, as in a direct matrix formulation of the dual.
    #[default]
    Dense,
    /// Coordinate triplets; cost proportional to the number of edges.
    Sparse,
}

/// `q(λ) = inf_x Σ ℓₑ(xₑ) + λᵀ(Ax − b)`, with `x*(λ)` solved edge by edge.
#[derive(Debug, Clone)]
pub struct DualFunction {
    net: FlowNetwork,
    dense: Option<DMatrix<f64>>,
    sparse: Triplets,
}

/// Value, minimising flows and supergradient `Ax* − b` at one `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub value: f64,
    pub flows: Vec<f64>,
    pub supergradient: Vec<f64>,
}

impl DualFunction {
    pub fn new(net: FlowNetwork, storage: IncidenceStorage) -> Self {
        let sparse = net.incidence();
        let dense = (storage == IncidenceStorage::Dense).then(|| sparse.to_dense());
        Self { net, dense, sparse }
    }

    pub fn network(&self) -> &FlowNetwork {
        &self.net
    }

    pub fn dim(&self) -> usize {
        self.net.vertices()
    }

    fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        match &self.dense {
            Some(a) => (a * DVector::from_column_slice(x)).data.into(),
            None => self.sparse.mul_vec(x),
        }
    }

    fn at_mul(&self, l: &[f64]) -> Vec<f64> {
        match &self.dense {
            Some(a) => a.tr_mul(&DVector::from_column_slice(l)).data.into(),
            None => self.sparse.tr_mul_vec(l),
        }
    }

    /// `x*(λ)`; reports the first edge whose inner solve fails.
    pub fn flows(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        if lambda.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "dual variable",
                expected: self.dim(),
                actual: lambda.len(),
            });
        }
        let c = self.at_mul(lambda);
        self.net
            .costs
            .iter()
            .zip(c)
            .enumerate()
            .map(|(e, (cost, ce))| cost.argmin_shifted(ce, e))
            .collect()
    }

    pub fn at(&self, lambda: &[f64]) -> Result<DualPoint> {
        let flows = self.flows(lambda)?;
        let mut g = self.a_mul(&flows);
        for (gi, bi) in g.iter_mut().zip(&self.net.balance) {
            *gi -= bi;
        }
        let value = self.net.cost(&flows) + dot(lambda, &g);
        Ok(DualPoint {
            value,
            flows,
            supergradient: g,
        })
    }

    /// The concave dual as an objective. Inner-solve failures evaluate to NaN.
    pub fn objective(self: &Arc<Self>) -> Objective {
        let smooth = if self.net.costs.iter().all(EdgeCost::is_strict) {
            Smoothness::Differentiable
        } else {
            Smoothness::Subdifferentiable
        };
        let (q1, q2) = (self.clone(), self.clone());
        Objective::from_parts(
            self.dim(),
            Arc::new(move |l| q1.at(l).map_or(f64::NAN, |p| p.value)),
            Arc::new(move |l, _| {
                q2.at(l)
                    .map_or_else(|_| vec![f64::NAN; l.len()], |p| p.supergradient)
            }),
            smooth,
        )
    }
}

/// The dual function of an open network, on the same ports.
pub fn netflow(g: &OpenObject<FlowNetwork>) -> OpenObject<Objective> {
    netflow_with(g, IncidenceStorage::default()).0
}

pub fn netflow_with(
    g: &OpenObject<FlowNetwork>,
    storage: IncidenceStorage,
) -> (OpenObject<Objective>, Arc<DualFunction>) {
    let q = Arc::new(DualFunction::new(g.payload.clone(), storage));
    (
        OpenObject {
            domain_size: g.domain_size,
            payload: q.objective(),
            port_map: g.port_map.clone(),
        },
        q,
    )
}

/// `netflow` as a map of algebras `FlowNet → Opt` (landing in concave objectives).
#[derive(Debug, Clone, Copy, Default)]
pub struct Netflow {
    pub storage: IncidenceStorage,
}

impl AlgebraMorphism for Netflow {
    type Source = FlowNet;
    type Target = Opt;

    fn source(&self) -> &FlowNet {
        &FlowNet
    }

    fn target(&self) -> &Opt {
        &Opt
    }

    fn component(&self, g: &FlowNetwork) -> Result<Objective> {
        Ok(Arc::new(DualFunction::new(g.clone(), self.storage)).objective())
    }
}

#[derive(Debug, Clone)]
pub struct DualConfig {
    pub gamma: f64,
    pub iters: usize,
    /// Starting multipliers; zero when `None`.
    pub lambda0: Option<Vec<f64>>,
    pub storage: IncidenceStorage,
    pub mode: ExecutionMode,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self {
            gamma: 0.01,
            iters: 10,
            lambda0: None,
            storage: IncidenceStorage::Dense,
            mode: ExecutionMode::Serial,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// `λ₀, …, λ_iters` on the composite vertex set.
    pub lambdas: Vec<Vec<f64>>,
    /// Flows at the final multipliers, edges in filler order.
    pub flows: Vec<f64>,
    /// `‖Ax − b‖∞` of the composite network.
    pub residual: f64,
    pub dual_value: f64,
}

fn initial(cfg: &DualConfig, n: usize) -> Result<Vec<f64>> {
    match &cfg.lambda0 {
        None => Ok(vec![0.0; n]),
        Some(l) if l.len() == n => Ok(l.clone()),
        Some(l) => Err(Error::DimensionMismatch {
            context: "initial multipliers",
            expected: n,
            actual: l.len(),
        }),
    }
}

/// Glue the networks, then run dual ascent on the dual of the composite.
pub fn dual_decomposition_standard(
    d: &Uwd,
    nets: &[OpenObject<FlowNetwork>],
    cfg: &DualConfig,
) -> Result<DualSolution> {
    let composite = oapply(&FlowNet, d, nets)?;
    let (q, dual) = netflow_with(&composite, cfg.storage);
    let step = gad(&SaddleObjective::concave(q.payload), cfg.gamma)?;
    let lambda0 = initial(cfg, q.domain_size)?;

    let mut lambdas = Vec::with_capacity(cfg.iters + 1);
    let run = simulate_visit(&step, &lambda0, cfg.iters, |_, l| lambdas.push(l.to_vec()));
    if let Err(e) = run {
        // A NaN usually means an inner solve failed; surface that error instead.
        dual.at(lambdas.last().expect("initial state recorded"))?;
        return Err(e);
    }
    let last = lambdas.last().expect("initial state recorded");
    let p = dual.at(last)?;
    Ok(DualSolution {
        residual: norm_inf(&composite.payload.residual(&p.flows)),
        flows: p.flows,
        dual_value: p.value,
        lambdas,
    })
}

/// Run dual ascent on each network and glue the resulting systems.
pub fn dual_decomposition_hierarchical(
    d: &Uwd,
    nets: &[OpenObject<FlowNetwork>],
    cfg: &DualConfig,
) -> Result<DualSolution> {
    let mut duals = Vec::with_capacity(nets.len());
    let mut systems = Vec::with_capacity(nets.len());
    for g in nets {
        let (q, dual) = netflow_with(g, cfg.storage);
        systems.push(OpenObject {
            domain_size: q.domain_size,
            payload: gad(&SaddleObjective::concave(q.payload), cfg.gamma)?,
            port_map: q.port_map,
        });
        duals.push(dual);
    }
    let po = glue(d, nets)?;
    let lambda0 = initial(cfg, po.apex_size)?;
    let lambdas = match simulate_message_passing(d, &systems, &lambda0, cfg.iters, cfg.mode) {
        Ok(l) => l,
        Err(e @ Error::NonFinite { step }) => {
            // Replay up to the last finite state to name the failing edge, if any.
            let prev = simulate_message_passing(d, &systems, &lambda0, step - 1, cfg.mode)?;
            let local = pullback_unchecked(&po.proj_left, prev.last().expect("initial state"));
            let mut offset = 0;
            for dual in &duals {
                dual.at(&local[offset..offset + dual.dim()])?;
                offset += dual.dim();
            }
            return Err(e);
        }
        Err(e) => return Err(e),
    };

    let last = lambdas.last().expect("initial state recorded");
    let local = pullback_unchecked(&po.proj_left, last);
    let mut offset = 0;
    let mut flows = Vec::new();
    let mut residuals = Vec::with_capacity(po.proj_left.dom_size());
    let mut dual_value = 0.0;
    for dual in &duals {
        let n = dual.dim();
        let p = dual.at(&local[offset..offset + n])?;
        offset += n;
        flows.extend_from_slice(&p.flows);
        residuals.extend_from_slice(&p.supergradient);
        dual_value += p.value;
    }
    let residual = norm_inf(&pushforward_apply(&po.proj_left, &residuals)?);
    Ok(DualSolution {
        lambdas,
        flows,
        residual,
        dual_value,
    })
}
