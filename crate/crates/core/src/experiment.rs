//! Random flow-network benchmark: three Erdős–Rényi networks glued along a
//! fixed diagram, solved by standard and hierarchical dual decomposition.

use std::collections::VecDeque;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::ExecutionMode;
use crate::error::{Error, Result};
use crate::finset::FinFunction;
use crate::flownet::{
    dual_decomposition_hierarchical, dual_decomposition_standard, DualConfig, DualSolution, EdgeCost,
    FlowNet, FlowNetwork,
};
use crate::freevect::max_abs_diff;
use crate::opensys::OpenObject;
use crate::random::balanced;
use crate::uwd::{fixtures, Uwd};

/// Resampling cap when drawing a connected graph.
pub const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Standard,
    Hierarchical,
    Both,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub seed: u64,
    pub nodes_per_subgraph: usize,
    pub edge_prob: f64,
    pub gamma: f64,
    pub outer_iters: usize,
    pub mode: BenchMode,
    /// Where [`run_benchmark`] writes its rows, if anywhere.
    pub output_path: Option<PathBuf>,
    pub parallel: bool,
    /// Timed repetitions per pipeline; the minimum is reported.
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            nodes_per_subgraph: 40,
            edge_prob: 0.2,
            gamma: 0.01,
            outer_iters: 10,
            mode: BenchMode::Both,
            output_path: None,
            parallel: false,
            repeats: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) {
            return Err(Error::Invalid(format!("edge probability {} not in (0, 1]", self.edge_prob)));
        }
        if self.outer_iters == 0 {
            return Err(Error::Invalid("outer iterations must be at least 1".into()));
        }
        if self.nodes_per_subgraph < 3 {
            // The first network exposes three distinct boundary vertices.
            return Err(Error::Invalid(format!(
                "need at least 3 nodes per subgraph, got {}",
                self.nodes_per_subgraph
            )));
        }
        if self.repeats == 0 {
            return Err(Error::Invalid("repeats must be at least 1".into()));
        }
        crate::dynamics::check_step(self.gamma)
    }

    fn dual(&self) -> DualConfig {
        DualConfig {
            gamma: self.gamma,
            iters: self.outer_iters,
            mode: if self.parallel {
                ExecutionMode::Parallel
            } else {
                ExecutionMode::Serial
            },
            ..DualConfig::default()
        }
    }
}

/// One CSV row. `lambda_discrepancy` is filled on rows of a `both` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub mode: BenchMode,
    pub nodes: usize,
    pub p: f64,
    pub seed: u64,
    pub iters: usize,
    pub wall_ms: f64,
    pub residual: f64,
    pub final_dual_value: f64,
    pub lambda_discrepancy: Option<f64>,
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Connected `G(n, p)` with random orientations, quadratic edge costs
/// `a ~ U(0.5, 2)`, `b ~ U(−1, 1)`, a zero-sum balance and `ports` distinct
/// boundary vertices.
pub fn gen_er_flownet<R: Rng>(n: usize, p: f64, ports: usize, rng: &mut R) -> Result<OpenObject<FlowNetwork>> {
    if n < 2 {
        return Err(Error::Invalid(format!("need at least 2 vertices, got {n}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Invalid(format!("edge probability {p} not in (0, 1]")));
    }
    if ports > n {
        return Err(Error::Invalid(format!("{ports} ports on {n} vertices")));
    }
    let mut attempt = 0;
    let edges = loop {
        if attempt == MAX_ATTEMPTS {
            return Err(Error::Invalid(format!(
                "no connected G({n}, {p}) in {MAX_ATTEMPTS} attempts"
            )));
        }
        attempt += 1;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push(if rng.random_bool(0.5) { (u, v) } else { (v, u) });
                }
            }
        }
        if connected(n, &edges) {
            break edges;
        }
    };
    let costs = edges
        .iter()
        .map(|_| EdgeCost::quadratic(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0)))
        .collect::<Result<Vec<_>>>()?;
    let (src, tgt) = edges.into_iter().unzip();
    let net = FlowNetwork::new(n, src, tgt, costs, balanced(rng, n))?;
    let port_map = FinFunction::new(index::sample(rng, n, ports).into_vec(), n)?;
    OpenObject::new(&FlowNet, net, port_map)
}

/// The three-network instance for `seed`: the gluing diagram and networks
/// with 3, 2 and 2 boundary vertices.
pub fn three_network_instance(n: usize, p: f64, seed: u64) -> Result<(Uwd, Vec<OpenObject<FlowNetwork>>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = fixtures::three_network_gluing();
    let nets = d
        .box_ports
        .iter()
        .map(|&k| gen_er_flownet(n, p, k, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok((d, nets))
}

fn timed(repeats: usize, mut run: impl FnMut() -> Result<DualSolution>) -> Result<(DualSolution, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..repeats {
        let t = Instant::now();
        let s = run()?;
        best = best.min(t.elapsed().as_secs_f64() * 1e3);
        out = Some(s);
    }
    Ok((out.expect("at least one repeat"), best))
}

/// Largest entrywise gap between two multiplier trajectories.
pub fn lambda_discrepancy(a: &DualSolution, b: &DualSolution) -> f64 {
    if a.lambdas.len() != b.lambdas.len() {
        return f64::INFINITY;
    }
    a.lambdas
        .iter()
        .zip(&b.lambdas)
        .map(|(x, y)| if x.len() == y.len() { max_abs_diff(x, y) } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

/// Runs the requested pipelines and returns one row per pipeline. Timing
/// covers gluing, dual construction and the outer iterations.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let (d, nets) = three_network_instance(cfg.nodes_per_subgraph, cfg.edge_prob, cfg.seed)?;
    let dual = cfg.dual();
    let context = |mode: &str, e: Error| {
        Error::Invalid(format!(
            "{mode} pipeline failed (seed {}, n {}, p {}): {e}",
            cfg.seed, cfg.nodes_per_subgraph, cfg.edge_prob
        ))
    };

    let mut runs = Vec::new();
    if matches!(cfg.mode, BenchMode::Standard | BenchMode::Both) {
        let r = timed(cfg.repeats, || dual_decomposition_standard(&d, &nets, &dual))
            .map_err(|e| context("standard", e))?;
        runs.push((BenchMode::Standard, r));
    }
    if matches!(cfg.mode, BenchMode::Hierarchical | BenchMode::Both) {
        let r = timed(cfg.repeats, || dual_decomposition_hierarchical(&d, &nets, &dual))
            .map_err(|e| context("hierarchical", e))?;
        runs.push((BenchMode::Hierarchical, r));
    }
    let gap = match runs.as_slice() {
        [(_, (a, _)), (_, (b, _))] => Some(lambda_discrepancy(a, b)),
        _ => None,
    };
    let rows: Vec<BenchRow> = runs
        .into_iter()
        .map(|(mode, (s, ms))| BenchRow {
            mode,
            nodes: cfg.nodes_per_subgraph,
            p: cfg.edge_prob,
            seed: cfg.seed,
            iters: cfg.outer_iters,
            wall_ms: ms,
            residual: s.residual,
            final_dual_value: s.dual_value,
            lambda_discrepancy: gap,
        })
        .collect();
    if let Some(path) = &cfg.output_path {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Invalid(format!("cannot create {}: {e}", path.display())))?;
        write_rows(file, &rows)?;
    }
    Ok(rows)
}

/// Writes rows with the header
/// `mode,nodes,p,seed,iters,wall_ms,residual,final_dual_value,lambda_discrepancy`.
pub fn write_rows<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    }
    if rows.is_empty() {
        w.write_record(HEADER).map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Invalid(format!("csv: {e}")))
}

pub const HEADER: [&str; 9] = [
    "mode",
    "nodes",
    "p",
    "seed",
    "iters",
    "wall_ms",
    "residual",
    "final_dual_value",
    "lambda_discrepancy",
];

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<BenchRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Invalid(format!("csv: {e}")))
}

/// Axis swept by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Nodes per subgraph 10, 20, …, 150.
    Nodes,
    /// Edge probability 0.1, 0.2, …, 1.0.
    EdgeProb,
}

/// Configurations along one axis, each repeated for every seed.
pub fn sweep(base: &BenchConfig, axis: SweepAxis, seeds: &[u64]) -> Vec<BenchConfig> {
    let points: Vec<(usize, f64)> = match axis {
        SweepAxis::Nodes => (1..=15).map(|k| (10 * k, base.edge_prob)).collect(),
        SweepAxis::EdgeProb => (1..=10)
            .map(|k| (base.nodes_per_subgraph, k as f64 / 10.0))
            .collect(),
    };
    points
        .into_iter()
        .flat_map(|(n, p)| {
            seeds.iter().map(move |&seed| BenchConfig {
                seed,
                nodes_per_subgraph: n,
                edge_prob: p,
                output_path: None,
                ..base.clone()
            })
        })
        .collect()
}
