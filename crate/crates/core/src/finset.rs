//! Finite sets `[n] = {0, …, n-1}`, functions between them, coproducts and
//! pushouts.
//!
//! Every composition in the crate bottoms out here: junction merging in
//! wiring diagrams and the gluing of open objects are both pushouts of a
//! span of [`FinFunction`]s.

use crate::error::{Error, Result};

/// A function `[dom] -> [codom]` stored as its table of values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinFunction {
    codom: usize,
    map: Vec<usize>,
}

impl FinFunction {
    /// Builds a function from its value table, checking every entry is `< codom`.
    pub fn new(map: Vec<usize>, codom: usize) -> Result<Self> {
        if let Some(&bad) = map.iter().find(|&&j| j >= codom) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                size: codom,
            });
        }
        Ok(Self { codom, map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            codom: n,
            map: (0..n).collect(),
        }
    }

    /// The unique map out of the empty set.
    pub fn empty(codom: usize) -> Self {
        Self {
            codom,
            map: Vec::new(),
        }
    }

    /// The coproduct inclusion of the `block`-th summand of `sizes`.
    pub fn inclusion(sizes: &[usize], block: usize) -> Self {
        let total: usize = sizes.iter().sum();
        let offset: usize = sizes[..block].iter().sum();
        Self {
            codom: total,
            map: (offset..offset + sizes[block]).collect(),
        }
    }

    #[inline]
    pub fn dom_size(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn codom_size(&self) -> usize {
        self.codom
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// Diagrammatic composition: first `self`, then `then`.
    pub fn compose(&self, then: &FinFunction) -> Result<FinFunction> {
        if self.codom != then.dom_size() {
            return Err(Error::DimensionMismatch {
                context: "compose",
                expected: self.codom,
                actual: then.dom_size(),
            });
        }
        Ok(FinFunction {
            codom: then.codom,
            map: self.map.iter().map(|&j| then.map[j]).collect(),
        })
    }

    /// Disjoint union `self + other`; `other`'s values are offset by `self.codom_size()`.
    pub fn coproduct(&self, other: &FinFunction) -> FinFunction {
        let mut map = Vec::with_capacity(self.map.len() + other.map.len());
        map.extend_from_slice(&self.map);
        map.extend(other.map.iter().map(|&j| j + self.codom));
        FinFunction {
            codom: self.codom + other.codom,
            map,
        }
    }

    /// Iterated coproduct; the empty coproduct is the empty map into `[0]`.
    pub fn coproduct_all<'a>(fs: impl IntoIterator<Item = &'a FinFunction>) -> FinFunction {
        fs.into_iter()
            .fold(FinFunction::empty(0), |acc, f| acc.coproduct(f))
    }

    /// The fiber over `j`, in ascending order.
    pub fn preimage(&self, j: usize) -> Result<Vec<usize>> {
        if j >= self.codom {
            return Err(Error::IndexOutOfRange {
                index: j,
                size: self.codom,
            });
        }
        Ok(self
            .map
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| (v == j).then_some(i))
            .collect())
    }

    /// All fibers at once, indexed by codomain element.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.codom];
        for (i, &j) in self.map.iter().enumerate() {
            out[j].push(i);
        }
        out
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.codom];
        self.map.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.codom];
        for &j in &self.map {
            seen[j] = true;
        }
        seen.into_iter().all(|b| b)
    }
}

/// A pair of functions with a common codomain (the apex).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cospan {
    pub left: FinFunction,
    pub right: FinFunction,
}

impl Cospan {
    pub fn new(left: FinFunction, right: FinFunction) -> Result<Self> {
        if left.codom_size() != right.codom_size() {
            return Err(Error::DimensionMismatch {
                context: "cospan apex",
                expected: left.codom_size(),
                actual: right.codom_size(),
            });
        }
        Ok(Self { left, right })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            left: FinFunction::identity(n),
            right: FinFunction::identity(n),
        }
    }

    pub fn apex_size(&self) -> usize {
        self.left.codom_size()
    }
}

/// Apex and coprojections of the pushout of a span `S <-m- X -l-> J`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushoutResult {
    pub apex_size: usize,
    /// `S -> apex`
    pub proj_left: FinFunction,
    /// `J -> apex`
    pub proj_right: FinFunction,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Pushout of `S <-m- X -l-> J`, i.e. `(S + J) / (m(x) ~ l(x))`.
///
/// Apex elements are numbered by first appearance of their class when
/// scanning `S` and then `J`, so the result is deterministic.
pub fn pushout(m: &FinFunction, l: &FinFunction) -> Result<PushoutResult> {
    if m.dom_size() != l.dom_size() {
        return Err(Error::DimensionMismatch {
            context: "pushout shared domain",
            expected: m.dom_size(),
            actual: l.dom_size(),
        });
    }
    let s = m.codom_size();
    let j = l.codom_size();
    let mut uf = UnionFind::new(s + j);
    for (&a, &b) in m.as_slice().iter().zip(l.as_slice()) {
        uf.union(a, s + b);
    }

    let mut label = vec![usize::MAX; s + j];
    let mut numbering = Vec::with_capacity(s + j);
    let mut next = 0;
    for x in 0..s + j {
        let root = uf.find(x);
        if label[root] == usize::MAX {
            label[root] = next;
            next += 1;
        }
        numbering.push(label[root]);
    }
    let proj_right = numbering.split_off(s);
    Ok(PushoutResult {
        apex_size: next,
        proj_left: FinFunction {
            codom: next,
            map: numbering,
        },
        proj_right: FinFunction {
            codom: next,
            map: proj_right,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ff(map: &[usize], codom: usize) -> FinFunction {
        FinFunction::new(map.to_vec(), codom).unwrap()
    }

    #[test]
    fn compose_pointwise() {
        let f = ff(&[0, 2], 3);
        let g = ff(&[1, 0, 0], 2);
        assert_eq!(f.compose(&g).unwrap(), ff(&[1, 0], 2));
        let id = FinFunction::identity(3);
        assert_eq!(id.compose(&id).unwrap(), id);
    }

    #[test]
    fn compose_rejects_mismatch() {
        let err = ff(&[0], 2).compose(&ff(&[0, 0, 0], 1)).unwrap_err();
        assert!(err.to_string().contains("expected 2, got 3"), "{err}");
    }

    #[test]
    fn entries_must_be_in_range() {
        assert!(FinFunction::new(vec![0, 3], 3).is_err());
    }

    #[test]
    fn coproduct_offsets_second_summand() {
        assert_eq!(ff(&[0], 1).coproduct(&ff(&[0], 1)), ff(&[0, 1], 2));
        assert_eq!(ff(&[1, 0], 2).coproduct(&ff(&[2], 3)), ff(&[1, 0, 4], 5));
        let f = ff(&[1, 0], 2);
        assert_eq!(FinFunction::empty(0).coproduct(&f), f);
    }

    #[test]
    fn preimages() {
        let f = ff(&[0, 0, 1], 3);
        assert_eq!(f.preimage(0).unwrap(), vec![0, 1]);
        assert!(f.preimage(2).unwrap().is_empty());
        assert!(f.preimage(3).is_err());
        let mut all: Vec<usize> = f.fibers().into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2]);
    }

    #[test]
    fn pushout_of_identities() {
        let id = FinFunction::identity(4);
        let po = pushout(&id, &id).unwrap();
        assert_eq!(po.apex_size, 4);
        assert_eq!(po.proj_left, id);
        assert_eq!(po.proj_right, id);
    }

    #[test]
    fn pushout_small_example() {
        let po = pushout(&ff(&[0], 2), &ff(&[1], 2)).unwrap();
        assert_eq!(po.apex_size, 3);
        assert_eq!(po.proj_left.as_slice(), &[0, 1]);
        assert_eq!(po.proj_right.as_slice(), &[2, 0]);
    }

    #[test]
    fn pushout_rejects_mismatched_span() {
        assert!(pushout(&ff(&[0], 1), &FinFunction::empty(1)).is_err());
    }

    #[test]
    fn injective_surjective() {
        assert!(ff(&[2, 0], 3).is_injective());
        assert!(!ff(&[2, 0], 3).is_surjective());
        assert!(ff(&[1, 1, 0], 2).is_surjective());
        assert!(FinFunction::empty(0).is_injective());
    }
}
