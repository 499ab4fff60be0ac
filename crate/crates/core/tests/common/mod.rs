//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use compopt::flownet::{EdgeCost, FlowNetwork};
use compopt::random;
use compopt::{FinFunction, PushoutResult};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Class of every element of `S ⊔ J` under the equivalence generated by
/// `m(x) ~ l(x)`, computed by boolean transitive closure.
pub fn closure_classes(m: &FinFunction, l: &FinFunction) -> Vec<usize> {
    let (s, j) = (m.codom_size(), l.codom_size());
    let n = s + j;
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for x in 0..m.dom_size() {
        let (a, b) = (m.apply(x), s + l.apply(x));
        r[a][b] = true;
        r[b][a] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for t in 0..n {
                    if r[k][t] {
                        r[i][t] = true;
                    }
                }
            }
        }
    }
    // Smallest member of each class serves as its name.
    (0..n).map(|i| (0..n).find(|&t| r[i][t]).unwrap()).collect()
}

/// Same partition as the closure oracle, and apex numbered by first appearance.
pub fn pushout_matches_closure(m: &FinFunction, l: &FinFunction, po: &PushoutResult) -> bool {
    let s = m.codom_size();
    let classes = closure_classes(m, l);
    let apex: Vec<usize> = po
        .proj_left
        .as_slice()
        .iter()
        .chain(po.proj_right.as_slice())
        .copied()
        .collect();
    let n = classes.len();
    let same_partition = (0..n).all(|a| (0..n).all(|b| (classes[a] == classes[b]) == (apex[a] == apex[b])));
    let mut distinct = classes.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let mut next = 0;
    let first_appearance = apex.iter().all(|&k| {
        if k == next {
            next += 1;
        }
        k < next
    });
    same_partition
        && distinct.len() == po.apex_size
        && first_appearance
        && po.proj_left.dom_size() == s
}

/// Connected network with `2..=max_v` vertices and at most `max_e` edges:
/// a random spanning tree plus random extra edges.
pub fn connected_network(rng: &mut impl Rng, max_v: usize, max_e: usize) -> FlowNetwork {
    let v = rng.random_range(2..=max_v);
    let mut order: Vec<usize> = (0..v).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (1..v)
        .map(|i| (order[i], order[rng.random_range(0..i)]))
        .collect();
    let extra = rng.random_range(0..=max_e - (v - 1));
    for _ in 0..extra {
        let a = rng.random_range(0..v);
        let b = rng.random_range(0..v);
        if a != b {
            edges.push((a, b));
        }
    }
    let edges: Vec<(usize, usize)> = edges
        .into_iter()
        .map(|(a, b)| if rng.random_bool(0.5) { (a, b) } else { (b, a) })
        .collect();
    let costs = edges
        .iter()
        .map(|_| EdgeCost::quadratic(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0)).unwrap())
        .collect();
    let (src, tgt) = edges.into_iter().unzip();
    FlowNetwork::new(v, src, tgt, costs, random::balanced(rng, v)).unwrap()
}

/// Optimal flows of a connected quadratic-cost network from the KKT system
/// `[diag(2a) Ãᵀ; Ã 0] (x, λ̃) = (−b_cost, b̃)`, where `Ã` drops the last
/// (redundant) row of the incidence matrix.
pub fn kkt_flows(net: &FlowNetwork) -> Vec<f64> {
    let (v, e) = (net.vertices(), net.edges());
    let a = net.incidence().to_dense();
    let n = e + v - 1;
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (i, c) in net.costs.iter().enumerate() {
        let EdgeCost::Quadratic { a: qa, b: qb } = c else {
            panic!("KKT oracle needs quadratic costs")
        };
        k[(i, i)] = 2.0 * qa;
        rhs[i] = -qb;
    }
    for r in 0..v - 1 {
        for c in 0..e {
            k[(e + r, c)] = a[(r, c)];
            k[(c, e + r)] = a[(r, c)];
        }
        rhs[e + r] = net.balance[r];
    }
    let sol = k.lu().solve(&rhs).expect("connected network gives a nonsingular KKT system");
    sol.as_slice()[..e].to_vec()
}
