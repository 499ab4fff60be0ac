//! Random instances for property tests, the naturality suite and benchmarks.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::dynamics::{Dynam, VectorField};
use crate::finset::FinFunction;
use crate::flownet::{EdgeCost, FlowNet, FlowNetwork};
use crate::opensys::OpenObject;
use crate::problems::{Objective, Opt, Saddle, SaddleObjective};
use crate::uwd::{Curvature, Uwd};

pub fn fin_function(rng: &mut impl Rng, dom: usize, codom: usize) -> FinFunction {
    assert!(codom > 0 || dom == 0, "no function from a nonempty set to ∅");
    FinFunction::new((0..dom).map(|_| rng.random_range(0..codom)).collect(), codom)
        .expect("entries drawn in range")
}

/// A surjection `[dom] → [codom]`; requires `codom ≤ dom`.
pub fn surjection(rng: &mut impl Rng, dom: usize, codom: usize) -> FinFunction {
    assert!(codom <= dom && (codom > 0 || dom == 0));
    let mut order: Vec<usize> = (0..dom).collect();
    order.shuffle(rng);
    let mut map = vec![0; dom];
    for (rank, &i) in order.iter().enumerate() {
        map[i] = if rank < codom {
            rank
        } else {
            rng.random_range(0..codom)
        };
    }
    FinFunction::new(map, codom).expect("entries drawn in range")
}

pub fn labels(rng: &mut impl Rng, n: usize) -> Vec<Curvature> {
    (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                Curvature::Convex
            } else {
                Curvature::Concave
            }
        })
        .collect()
}

/// Shape limits for random diagrams.
#[derive(Debug, Clone, Copy)]
pub struct UwdShape {
    pub max_boxes: usize,
    pub max_junctions: usize,
    pub max_ports: usize,
    /// Every junction touched by at least one inner port.
    pub cover: bool,
}

impl Default for UwdShape {
    fn default() -> Self {
        Self {
            max_boxes: 4,
            max_junctions: 6,
            max_ports: 5,
            cover: false,
        }
    }
}

/// Random untyped diagram with `n_outer` outer ports.
pub fn uwd(rng: &mut impl Rng, shape: UwdShape, n_outer: usize) -> Uwd {
    let n_boxes = rng.random_range(1..=shape.max_boxes);
    let box_ports: Vec<usize> = (0..n_boxes)
        .map(|_| rng.random_range(1..=shape.max_ports))
        .collect();
    let total: usize = box_ports.iter().sum();
    let k = rng.random_range(1..=shape.max_junctions.min(total).max(1));
    let inner = if shape.cover {
        surjection(rng, total, k)
    } else {
        fin_function(rng, total, k)
    };
    let outer = fin_function(rng, n_outer, k);
    Uwd::new(box_ports, k, inner.as_slice().to_vec(), outer.as_slice().to_vec())
        .expect("generated diagram is well formed")
}

/// Random typed diagram whose outer ports carry `outer_labels`.
pub fn typed_uwd(rng: &mut impl Rng, shape: UwdShape, outer_labels: &[Curvature]) -> Uwd {
    loop {
        let mut d = uwd(rng, shape, 0);
        let mut l = labels(rng, d.junctions);
        let mut outer = Vec::with_capacity(outer_labels.len());
        for &want in outer_labels {
            let matching: Vec<usize> = (0..d.junctions).filter(|&j| l[j] == want).collect();
            match matching.as_slice() {
                [] if d.junctions > 0 => {
                    // Flip a junction with no outer port yet.
                    let free: Vec<usize> = (0..d.junctions).filter(|j| !outer.contains(j)).collect();
                    let Some(&j) = free.as_slice().choose(rng) else { break };
                    l[j] = want;
                    outer.push(j);
                }
                [] => break,
                m => outer.push(*m.choose(rng).expect("nonempty")),
            }
        }
        if outer.len() != outer_labels.len() {
            continue;
        }
        d.outer_map = FinFunction::new(outer, d.junctions).expect("junction indices");
        d.labels = Some(l);
        return d;
    }
}

/// `½ xᵀPx + qᵀx` with `P = MᵀM/n + μI`, eigenvalues in `[μ, μ + n]`.
pub fn pd_quadratic(rng: &mut impl Rng, n: usize, mu: f64) -> Objective {
    let m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let p: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mm: f64 = (0..n).map(|k| m[k][i] * m[k][j]).sum::<f64>() / n as f64;
                    mm + if i == j { mu } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let q = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Objective::quadratic(p, q).expect("square by construction")
}

/// Quadratic saddle function: strongly convex in convex-labelled
/// coordinates, strongly concave in the others, with a bilinear coupling of
/// size `coupling`.
pub fn saddle_quadratic(rng: &mut impl Rng, labels: &[Curvature], coupling: f64) -> SaddleObjective {
    let n = labels.len();
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (labels[i], labels[j]);
            if i == j {
                let d = rng.random_range(0.5..1.5);
                p[i][i] = if li == Curvature::Convex { d } else { -d };
            } else if li != lj && i < j {
                let c = rng.random_range(-coupling..coupling);
                p[i][j] = c;
                p[j][i] = c;
            }
        }
    }
    let q = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SaddleObjective::new(
        Objective::quadratic(p, q).expect("square by construction"),
        labels.to_vec(),
    )
    .expect("labels sized to objective")
}

/// `±Σ wᵢ|xᵢ − cᵢ|` plus a saddle quadratic. At a kink the selector draws
/// from `[−1, 1]` using the seed.
pub fn nonsmooth_saddle(rng: &mut impl Rng, labels: &[Curvature], coupling: f64) -> SaddleObjective {
    let quad = saddle_quadratic(rng, labels, coupling).objective;
    let n = labels.len();
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sign: Vec<f64> = labels.iter().map(|l| -l.ascent_sign()).collect();
    let (w2, c2, s2) = (w.clone(), c.clone(), sign.clone());
    let (q1, q2) = (quad.clone(), quad);
    let f = Objective::subdifferentiable(
        n,
        move |x| {
            q1.eval(x)
                + (0..x.len())
                    .map(|i| sign[i] * w[i] * (x[i] - c[i]).abs())
                    .sum::<f64>()
        },
        move |x, seed| {
            let mut g = q2.grad(x);
            for i in 0..x.len() {
                let r = x[i] - c2[i];
                let s = if r != 0.0 {
                    r.signum()
                } else {
                    let u = crate::mix64(seed, i as u64) as f64 / u64::MAX as f64;
                    2.0 * u - 1.0
                };
                g[i] += s2[i] * w2[i] * s;
            }
            g
        },
    );
    SaddleObjective::new(f, labels.to_vec()).expect("labels sized to objective")
}

/// An open objective with `ports` ports and up to `extra` private coordinates.
pub fn open_objective(rng: &mut impl Rng, ports: usize, max_dim: usize) -> OpenObject<Objective> {
    let dim = rng.random_range(1..=max_dim);
    let f = pd_quadratic(rng, dim, 0.5);
    OpenObject::new(&Opt, f, fin_function(rng, ports, dim)).expect("port map into domain")
}

/// Domain size, port map and coordinate labels for a typed open payload
/// whose ports carry `port_labels`.
pub fn typed_domain(
    rng: &mut impl Rng,
    port_labels: &[Curvature],
    max_dim: usize,
) -> (FinFunction, Vec<Curvature>) {
    let ports = port_labels.len();
    loop {
        let dim = rng.random_range(1..=max_dim.max(1));
        let mut l: Vec<Option<Curvature>> = vec![None; dim];
        let mut map = Vec::with_capacity(ports);
        let mut ok = true;
        for &want in port_labels {
            let choices: Vec<usize> = (0..dim).filter(|&s| l[s].is_none_or(|x| x == want)).collect();
            match choices.as_slice().choose(rng) {
                Some(&s) => {
                    l[s] = Some(want);
                    map.push(s);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let fill = labels(rng, dim);
        let l = l.into_iter().zip(fill).map(|(a, b)| a.unwrap_or(b)).collect();
        return (FinFunction::new(map, dim).expect("in range"), l);
    }
}

pub fn open_saddle(
    rng: &mut impl Rng,
    port_labels: &[Curvature],
    max_dim: usize,
    coupling: f64,
    nonsmooth: bool,
) -> OpenObject<SaddleObjective> {
    let (port_map, l) = typed_domain(rng, port_labels, max_dim);
    let s = if nonsmooth {
        nonsmooth_saddle(rng, &l, coupling)
    } else {
        saddle_quadratic(rng, &l, coupling)
    };
    OpenObject::new(&Saddle, s, port_map).expect("port map into domain")
}

/// `x ↦ tanh(Ax) + c` with entries of `A` and `c` uniform on `(−1, 1)`.
pub fn vector_field(rng: &mut impl Rng, n: usize) -> VectorField {
    let a: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    VectorField::new(n, move |x| {
        a.iter()
            .zip(&c)
            .map(|(row, ci)| row.iter().zip(x).map(|(p, q)| p * q).sum::<f64>().tanh() + ci)
            .collect()
    })
}

pub fn open_vector_field(rng: &mut impl Rng, ports: usize, max_dim: usize) -> OpenObject<VectorField> {
    let dim = rng.random_range(1..=max_dim);
    let v = vector_field(rng, dim);
    OpenObject::new(&Dynam, v, fin_function(rng, ports, dim)).expect("port map into domain")
}

/// Random network on `vertices` vertices with `edges` edges (self-loops allowed).
pub fn flow_network(rng: &mut impl Rng, vertices: usize, edges: usize) -> FlowNetwork {
    let v = vertices.max(1);
    let src = (0..edges).map(|_| rng.random_range(0..v)).collect();
    let tgt = (0..edges).map(|_| rng.random_range(0..v)).collect();
    let costs = (0..edges)
        .map(|_| {
            EdgeCost::quadratic(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0))
                .expect("a > 0")
        })
        .collect();
    FlowNetwork::new(v, src, tgt, costs, balanced(rng, v)).expect("consistent by construction")
}

/// I.i.d. uniform entries on `(−1, 1)` with the mean removed.
pub fn balanced(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = b.iter().sum::<f64>() / n.max(1) as f64;
    for x in &mut b {
        *x -= mean;
    }
    // Mean removal leaves O(ε) drift; fold it into the last entry.
    let drift: f64 = b.iter().sum();
    if let Some(last) = b.last_mut() {
        *last -= drift;
    }
    b
}

pub fn open_flow_network(
    rng: &mut impl Rng,
    ports: usize,
    max_vertices: usize,
    max_edges: usize,
) -> OpenObject<FlowNetwork> {
    let v = rng.random_range(1..=max_vertices);
    let e = rng.random_range(0..=max_edges);
    let g = flow_network(rng, v, e);
    OpenObject::new(&FlowNet, g, fin_function(rng, ports, v)).expect("port map into domain")
}

/// A two-level nest: an outer diagram and one inner diagram per outer box.
#[derive(Debug, Clone)]
pub struct Nest {
    pub outer: Uwd,
    pub inner: Vec<Uwd>,
}

impl Nest {
    pub fn random(rng: &mut impl Rng, shape: UwdShape, typed: bool) -> Self {
        let n_outer = rng.random_range(0..=3);
        if typed {
            let outer_labels = labels(rng, n_outer);
            let outer = typed_uwd(rng, shape, &outer_labels);
            let inner = (0..outer.n_boxes())
                .map(|b| typed_uwd(rng, shape, &outer.box_labels(b).expect("typed")))
                .collect();
            Nest { outer, inner }
        } else {
            let outer = uwd(rng, shape, n_outer);
            let inner = outer
                .box_ports
                .iter()
                .map(|&k| uwd(rng, shape, k))
                .collect();
            Nest { outer, inner }
        }
    }

    pub fn flat(&self) -> crate::Result<Uwd> {
        self.outer.substitute(&self.inner)
    }

    /// Ports of each leaf box, in flattened order, with labels if typed.
    pub fn leaf_ports(&self) -> Vec<(usize, Option<Vec<Curvature>>)> {
        self.inner
            .iter()
            .flat_map(|d| {
                (0..d.n_boxes()).map(move |b| (d.box_ports[b], d.box_labels(b)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn surjection_hits_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = surjection(&mut rng, 7, 4);
            assert!(f.is_surjective());
        }
    }

    #[test]
    fn typed_uwd_respects_outer_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let want = labels(&mut rng, 3);
            let d = typed_uwd(&mut rng, UwdShape::default(), &want);
            assert!(d.validate().is_empty());
            assert_eq!(d.outer_labels().unwrap(), want);
        }
    }

    #[test]
    fn typed_domain_matches_port_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let want = labels(&mut rng, 4);
            let (m, l) = typed_domain(&mut rng, &want, 5);
            for (p, &w) in want.iter().enumerate() {
                assert_eq!(l[m.apply(p)], w);
            }
        }
    }

    #[test]
    fn balanced_sums_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [1, 2, 10, 250] {
            let b = balanced(&mut rng, n);
            assert!(b.iter().sum::<f64>().abs() <= 1e-12);
        }
    }

    #[test]
    fn nests_flatten() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shape = UwdShape {
            max_boxes: 3,
            max_junctions: 4,
            max_ports: 3,
            cover: true,
        };
        for typed in [false, true] {
            for _ in 0..30 {
                let n = Nest::random(&mut rng, shape, typed);
                let flat = n.flat().unwrap();
                assert_eq!(flat.n_boxes(), n.leaf_ports().len());
            }
        }
    }
}
