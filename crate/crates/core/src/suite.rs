//! Randomized checks that solvers commute with composition and that nested
//! composition agrees with flat composition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{euler, simulate, DiscreteMap, Dynam, DynamD, NddD, Seeded};
use crate::error::{Error, Result};
use crate::flownet::{FlowNet, FlowNetwork};
use crate::freevect::max_abs_diff;
use crate::morphisms::{gad, gd, generate_solver, pd_subg_step, Extensional};
use crate::opensys::{glue, oapply, FinsetAlgebra, OpenObject};
use crate::problems::{Opt, Saddle, SaddleObjective};
use crate::random::{self, Nest, UwdShape};
use crate::uwd::Uwd;

/// Which solver the trajectory suite exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Gd,
    Gad,
    PdSubg,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gd => "gd",
            SolverKind::Gad => "gad",
            SolverKind::PdSubg => "pd_subg",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub instances: usize,
    pub steps: usize,
    pub gamma: f64,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            instances: 50,
            steps: 100,
            gamma: 0.02,
            seed: 0,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub instances: usize,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub worst_instance: Option<usize>,
    /// Instances that raised an error instead of producing a number.
    pub errors: Vec<(usize, String)>,
}

impl SuiteReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            instances: 0,
            max_discrepancy: 0.0,
            tolerance,
            worst_instance: None,
            errors: Vec::new(),
        }
    }

    fn record(&mut self, i: usize, r: Result<f64>) {
        self.instances += 1;
        match r {
            Ok(e) => {
                let e = if e.is_nan() { f64::INFINITY } else { e };
                if self.worst_instance.is_none() || e > self.max_discrepancy {
                    self.max_discrepancy = e;
                    self.worst_instance = Some(i);
                }
            }
            Err(e) => self.errors.push((i, e.to_string())),
        }
    }

    pub fn pass(&self) -> bool {
        self.errors.is_empty() && self.max_discrepancy <= self.tolerance
    }
}

const SHAPE: UwdShape = UwdShape {
    max_boxes: 4,
    max_junctions: 6,
    max_ports: 5,
    cover: false,
};
const MAX_DIM: usize = 5;
const COUPLING: f64 = 0.3;

fn start(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn trajectory_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max)
}

/// Random untyped diagram with random quadratic fillers.
pub fn gd_instance(rng: &mut impl Rng) -> (Uwd, Vec<OpenObject<crate::problems::Objective>>) {
    let n_outer = rng.random_range(0..=3);
    let d = random::uwd(rng, SHAPE, n_outer);
    let fillers = d
        .box_ports
        .iter()
        .map(|&k| random::open_objective(rng, k, MAX_DIM))
        .collect();
    (d, fillers)
}

/// Random typed diagram with saddle fillers, nonsmooth when asked.
pub fn saddle_instance(rng: &mut impl Rng, nonsmooth: bool) -> (Uwd, Vec<OpenObject<SaddleObjective>>) {
    let n_outer = rng.random_range(0..=3);
    let outer_labels = random::labels(rng, n_outer);
    let d = random::typed_uwd(rng, SHAPE, &outer_labels);
    let fillers = (0..d.n_boxes())
        .map(|b| {
            let l = d.box_labels(b).expect("typed diagram");
            random::open_saddle(rng, &l, MAX_DIM, COUPLING, nonsmooth)
        })
        .collect();
    (d, fillers)
}

/// Max gap between the trajectories of `gd(oapply(Opt))` and
/// `oapply(Dynam_D, gd)` from a shared random start.
pub fn gd_gap(rng: &mut impl Rng, cfg: &SuiteConfig) -> Result<f64> {
    let (d, fillers) = gd_instance(rng);
    let top = gd(&oapply(&Opt, &d, &fillers)?.payload, cfg.gamma)?;
    let bottom = generate_solver(&d, &fillers, cfg.gamma)?.payload;
    let x0 = start(rng, top.dim);
    Ok(trajectory_gap(
        &simulate(&top, &x0, cfg.steps)?,
        &simulate(&bottom, &x0, cfg.steps)?,
    ))
}

pub fn gad_gap(rng: &mut impl Rng, cfg: &SuiteConfig) -> Result<f64> {
    let (d, fillers) = saddle_instance(rng, false);
    let top = gad(&oapply(&Saddle, &d, &fillers)?.payload, cfg.gamma)?;
    let parts = fillers
        .iter()
        .map(|f| lift(f, |l| gad(l, cfg.gamma)))
        .collect::<Result<Vec<_>>>()?;
    let bottom = oapply(&DynamD, &d, &parts)?.payload;
    let x0 = start(rng, top.dim);
    Ok(trajectory_gap(
        &simulate(&top, &x0, cfg.steps)?,
        &simulate(&bottom, &x0, cfg.steps)?,
    ))
}

/// Outcome of one nonsmooth instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PdSubgOutcome {
    pub gap: f64,
    /// Emitted directions checked and how many failed the (sub/super)gradient
    /// inequality at some comparison point.
    pub directions: usize,
    pub violations: usize,
}

/// Compares the two sides on a seeded run, then checks that every direction
/// emitted along the composed run satisfies the subgradient inequality in
/// convex coordinates and the supergradient inequality in concave ones.
pub fn pd_subg_outcome(rng: &mut impl Rng, cfg: &SuiteConfig, comparisons: usize) -> Result<PdSubgOutcome> {
    let (d, fillers) = saddle_instance(rng, true);
    let composite = oapply(&Saddle, &d, &fillers)?.payload;
    let top = pd_subg_step(&composite, cfg.gamma)?;
    let parts = fillers
        .iter()
        .map(|f| lift(f, |l| pd_subg_step(l, cfg.gamma)))
        .collect::<Result<Vec<_>>>()?;
    let bottom = oapply(&NddD, &d, &parts)?.payload;
    let seed = rng.random::<u64>();
    let x0 = start(rng, top.dim);
    let a = simulate(&Seeded { map: &top, seed }, &x0, cfg.steps)?;
    let b = simulate(&Seeded { map: &bottom, seed }, &x0, cfg.steps)?;
    let gap = trajectory_gap(&a, &b);

    let l = &composite.objective;
    let mut violations = 0;
    for (k, z) in b.iter().take(cfg.steps).enumerate() {
        let next = &b[k + 1];
        // Undo the step and the ascent/descent sign to recover the oracle output.
        let g: Vec<f64> = (0..z.len())
            .map(|i| (next[i] - z[i]) / cfg.gamma * composite.labels[i].ascent_sign())
            .collect();
        let lz = l.eval(z);
        let tol = 1e-9 * (1.0 + lz.abs());
        let mut bad = false;
        for _ in 0..comparisons {
            let mut wx = z.clone();
            let mut wy = z.clone();
            let (mut gx, mut gy) = (0.0, 0.0);
            for i in 0..z.len() {
                let dz = rng.random_range(-1.0..1.0);
                if composite.labels[i] == crate::Curvature::Convex {
                    wx[i] += dz;
                    gx += g[i] * dz;
                } else {
                    wy[i] += dz;
                    gy += g[i] * dz;
                }
            }
            if l.eval(&wx) - lz < gx - tol || l.eval(&wy) - lz > gy + tol {
                bad = true;
            }
        }
        violations += bad as usize;
    }
    Ok(PdSubgOutcome {
        gap,
        directions: cfg.steps,
        violations,
    })
}

fn lift<T, U>(f: &OpenObject<T>, m: impl Fn(&T) -> Result<U>) -> Result<OpenObject<U>> {
    Ok(OpenObject {
        domain_size: f.domain_size,
        payload: m(&f.payload)?,
        port_map: f.port_map.clone(),
    })
}

/// Runs `cfg.instances` random instances of one solver's trajectory check.
pub fn naturality_suite(kind: SolverKind, cfg: &SuiteConfig) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = SuiteReport::new(kind.name(), cfg.tolerance);
    for i in 0..cfg.instances {
        let r = match kind {
            SolverKind::Gd => gd_gap(&mut rng, cfg),
            SolverKind::Gad => gad_gap(&mut rng, cfg),
            SolverKind::PdSubg => pd_subg_outcome(&mut rng, cfg, 0).map(|o| o.gap),
        };
        report.record(i, r);
    }
    report
}

/// A flat and a nested composite of the same leaves, with the bijection
/// `sigma` from flat coordinates to nested coordinates.
#[derive(Debug, Clone)]
pub struct CoherencePair<T> {
    pub flat: OpenObject<T>,
    pub nested: OpenObject<T>,
    pub sigma: Vec<usize>,
}

fn offsets(sizes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut acc = 0;
    sizes
        .map(|s| {
            let o = acc;
            acc += s;
            o
        })
        .collect()
}

fn assign(sigma: &mut [Option<usize>], from: usize, to: usize) -> Result<()> {
    match sigma[from] {
        Some(prev) if prev != to => Err(Error::Invalid(format!(
            "flat coordinate {from} glued to nested coordinates {prev} and {to}"
        ))),
        _ => {
            sigma[from] = Some(to);
            Ok(())
        }
    }
}

/// Composes `leaves` along the flattened nest and along the two levels, and
/// matches coordinates through the images of leaf coordinates and outer ports.
pub fn coherence_pair<A: FinsetAlgebra>(
    alg: &A,
    nest: &Nest,
    leaves: &[OpenObject<A::Object>],
) -> Result<CoherencePair<A::Object>> {
    let flat_d = nest.flat()?;
    let flat = oapply(alg, &flat_d, leaves)?;
    let po_flat = glue(&flat_d, leaves)?;
    let leaf_off = offsets(leaves.iter().map(|l| l.domain_size));

    let mut groups = Vec::with_capacity(nest.inner.len());
    let mut rest = leaves;
    for d in &nest.inner {
        let (head, tail) = rest.split_at(d.n_boxes());
        groups.push(head);
        rest = tail;
    }
    let mid = nest
        .inner
        .iter()
        .zip(&groups)
        .map(|(d, g)| oapply(alg, d, g))
        .collect::<Result<Vec<_>>>()?;
    let po_inner = nest
        .inner
        .iter()
        .zip(&groups)
        .map(|(d, g)| glue(d, g))
        .collect::<Result<Vec<_>>>()?;
    let nested = oapply(alg, &nest.outer, &mid)?;
    let po_outer = glue(&nest.outer, &mid)?;
    let mid_off = offsets(mid.iter().map(|m| m.domain_size));

    if flat.domain_size != nested.domain_size {
        return Err(Error::DimensionMismatch {
            context: "flat vs nested composite",
            expected: flat.domain_size,
            actual: nested.domain_size,
        });
    }
    let mut sigma = vec![None; flat.domain_size];
    let mut g = 0;
    for (i, group) in groups.iter().enumerate() {
        let local_off = offsets(group.iter().map(|l| l.domain_size));
        for (k, leaf) in group.iter().enumerate() {
            for s in 0..leaf.domain_size {
                let f = po_flat.proj_left.apply(leaf_off[g] + s);
                let m = po_inner[i].proj_left.apply(local_off[k] + s);
                let n = po_outer.proj_left.apply(mid_off[i] + m);
                assign(&mut sigma, f, n)?;
            }
            g += 1;
        }
    }
    for p in 0..flat.port_map.dom_size() {
        assign(&mut sigma, flat.port_map.apply(p), nested.port_map.apply(p))?;
    }
    // Coordinates reached by neither leaves nor ports are paired in order.
    let mut used = vec![false; nested.domain_size];
    for t in sigma.iter().flatten() {
        if std::mem::replace(&mut used[*t], true) {
            return Err(Error::Invalid(format!("nested coordinate {t} hit twice")));
        }
    }
    let mut free = (0..nested.domain_size).filter(|&t| !used[t]);
    let sigma = sigma
        .into_iter()
        .map(|s| s.or_else(|| free.next()).expect("sizes agree"))
        .collect();
    Ok(CoherencePair {
        flat,
        nested,
        sigma,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    let e = (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
    if e.is_nan() {
        f64::INFINITY
    } else {
        e
    }
}

/// Largest relative disagreement between the two composites at random points.
pub fn extensional_gap<T: Extensional>(pair: &CoherencePair<T>, points: usize, rng: &mut impl Rng) -> f64 {
    let (f, n, sigma) = (&pair.flat.payload, &pair.nested.payload, &pair.sigma);
    if let (Some(lf), Some(ln)) = (f.coord_labels(), n.coord_labels()) {
        if sigma.iter().enumerate().any(|(i, &t)| lf[i] != ln[t]) {
            return f64::INFINITY;
        }
    }
    let mut worst = 0.0f64;
    for k in 0..points {
        let xn = start(rng, n.point_dim());
        let xf: Vec<f64> = sigma.iter().map(|&t| xn[t]).collect();
        let seed = k as u64;
        for (a, b) in f.scalars(&xf, seed).iter().zip(n.scalars(&xn, seed)) {
            worst = worst.max(rel(*a, b));
        }
        let (cf, cn) = (f.coords(&xf, seed), n.coords(&xn, seed));
        for (i, &t) in sigma.iter().enumerate() {
            worst = worst.max(rel(cf[i], cn[t]));
        }
    }
    worst
}

/// Relative disagreement between two networks matched through `sigma`;
/// infinite when the edge structure differs.
pub fn network_gap(pair: &CoherencePair<FlowNetwork>) -> f64 {
    let (f, n, sigma) = (&pair.flat.payload, &pair.nested.payload, &pair.sigma);
    if f.edges() != n.edges() {
        return f64::INFINITY;
    }
    for e in 0..f.edges() {
        if sigma[f.src.apply(e)] != n.src.apply(e) || sigma[f.tgt.apply(e)] != n.tgt.apply(e) {
            return f64::INFINITY;
        }
    }
    let mut worst = 0.0f64;
    for (cf, cn) in f.costs.iter().zip(&n.costs) {
        for xi in [-1.0, 0.3, 2.0] {
            worst = worst.max(rel(cf.eval(xi), cn.eval(xi)));
        }
    }
    for (i, &t) in sigma.iter().enumerate() {
        worst = worst.max(rel(f.balance[i], n.balance[t]));
    }
    worst
}

/// Algebras covered by the coherence suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceKind {
    Opt,
    Saddle,
    Dynam,
    DynamD,
    FlowNet,
}

impl CoherenceKind {
    pub const ALL: [CoherenceKind; 5] = [
        CoherenceKind::Opt,
        CoherenceKind::Saddle,
        CoherenceKind::Dynam,
        CoherenceKind::DynamD,
        CoherenceKind::FlowNet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoherenceKind::Opt => "Opt",
            CoherenceKind::Saddle => "Saddle",
            CoherenceKind::Dynam => "Dynam",
            CoherenceKind::DynamD => "Dynam_D",
            CoherenceKind::FlowNet => "FlowNet",
        }
    }
}

const NEST_SHAPE: UwdShape = UwdShape {
    max_boxes: 3,
    max_junctions: 4,
    max_ports: 3,
    cover: true,
};

fn one_coherence(kind: CoherenceKind, rng: &mut impl Rng, points: usize) -> Result<f64> {
    let nest = Nest::random(rng, NEST_SHAPE, kind == CoherenceKind::Saddle);
    let ports = nest.leaf_ports();
    match kind {
        CoherenceKind::Opt => {
            let leaves: Vec<_> = ports.iter().map(|&(k, _)| random::open_objective(rng, k, 4)).collect();
            Ok(extensional_gap(&coherence_pair(&Opt, &nest, &leaves)?, points, rng))
        }
        CoherenceKind::Saddle => {
            let leaves: Vec<_> = ports
                .iter()
                .map(|(_, l)| random::open_saddle(rng, l.as_deref().expect("typed nest"), 4, COUPLING, false))
                .collect();
            Ok(extensional_gap(&coherence_pair(&Saddle, &nest, &leaves)?, points, rng))
        }
        CoherenceKind::Dynam => {
            let leaves: Vec<_> = ports.iter().map(|&(k, _)| random::open_vector_field(rng, k, 4)).collect();
            Ok(extensional_gap(&coherence_pair(&Dynam, &nest, &leaves)?, points, rng))
        }
        CoherenceKind::DynamD => {
            let leaves = ports
                .iter()
                .map(|&(k, _)| lift(&random::open_vector_field(rng, k, 4), |v| euler(v, 0.1)))
                .collect::<Result<Vec<OpenObject<DiscreteMap>>>>()?;
            Ok(extensional_gap(&coherence_pair(&DynamD, &nest, &leaves)?, points, rng))
        }
        CoherenceKind::FlowNet => {
            let leaves: Vec<_> = ports
                .iter()
                .map(|&(k, _)| random::open_flow_network(rng, k, 4, 5))
                .collect();
            Ok(network_gap(&coherence_pair(&FlowNet, &nest, &leaves)?))
        }
    }
}

/// Flat vs nested composition on `nests` random two-level nests.
pub fn coherence_suite(kind: CoherenceKind, nests: usize, points: usize, seed: u64, tolerance: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(kind.name(), tolerance);
    for i in 0..nests {
        let r = one_coherence(kind, &mut rng, points);
        report.record(i, r);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SuiteConfig {
        SuiteConfig {
            instances: 5,
            steps: 20,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn small_suites_pass() {
        for kind in [SolverKind::Gd, SolverKind::Gad, SolverKind::PdSubg] {
            let r = naturality_suite(kind, &quick());
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn subgradient_inequality_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let o = pd_subg_outcome(&mut rng, &quick(), 20).unwrap();
            assert_eq!(o.violations, 0, "{o:?}");
        }
    }

    #[test]
    fn small_coherence_passes() {
        for kind in CoherenceKind::ALL {
            let r = coherence_suite(kind, 4, 5, 3, 1e-10);
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn sigma_is_a_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let nest = Nest::random(&mut rng, NEST_SHAPE, false);
            let leaves: Vec<_> = nest
                .leaf_ports()
                .iter()
                .map(|&(k, _)| random::open_objective(&mut rng, k, 3))
                .collect();
            let pair = coherence_pair(&Opt, &nest, &leaves).unwrap();
            let mut seen = pair.sigma.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..pair.flat.domain_size).collect::<Vec<_>>());
        }
    }
}
