//! The one-inclusion-graph predictor.
//!
//! Given `S` and a query `x`, the vertices are the labelings the class
//! realizes on the distinct instances of `S u {x}`, and edges join labelings
//! differing in one coordinate. With an orientation of out-degree at most `d`,
//! predicting the head of the `x`-edge errs on at most `d` of the `n + 1`
//! leave-one-out queries of any labeling, which gives the `d / (n + 1)` risk.

use std::collections::VecDeque;
use std::sync::Arc;

use super::{erm_learn, Learner};
use crate::classes::{threshold, ConceptClass, Hypothesis, Predictor};
use crate::data::{Instance, Sample};
use crate::error::{Error, Result};

/// Maximum number of graph coordinates (distinct instances of `S u {x}`).
pub const MAX_COORDS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneInclusionGraph {
    /// Sorted labelings; bit `j` is the label of coordinate `j`.
    pub vertices: Vec<u64>,
    /// `(a, b, coordinate)` with `a < b` as vertex indices.
    pub edges: Vec<(usize, usize, u32)>,
    incident: Vec<Vec<usize>>,
}

impl OneInclusionGraph {
    pub fn new(mut vertices: Vec<u64>, coords: u32) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        let mut edges = Vec::new();
        let mut incident = vec![Vec::new(); vertices.len()];
        for (a, &v) in vertices.iter().enumerate() {
            for j in 0..coords {
                let u = v ^ (1 << j);
                if u > v {
                    if let Ok(b) = vertices.binary_search(&u) {
                        incident[a].push(edges.len());
                        incident[b].push(edges.len());
                        edges.push((a, b, j));
                    }
                }
            }
        }
        OneInclusionGraph {
            vertices,
            edges,
            incident,
        }
    }

    pub fn index_of(&self, v: u64) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let (lo, hi) = (a.min(b), a.max(b));
        self.incident[lo]
            .iter()
            .copied()
            .find(|&e| self.edges[e].0 == lo && self.edges[e].1 == hi)
    }
}

/// Edge directions plus cached out-degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    /// `forward[e]`: edge `(a, b)` points from `a` to `b`.
    pub forward: Vec<bool>,
    pub outdeg: Vec<usize>,
}

impl Orientation {
    pub fn tail(&self, g: &OneInclusionGraph, e: usize) -> usize {
        let (a, b, _) = g.edges[e];
        if self.forward[e] {
            a
        } else {
            b
        }
    }

    pub fn head(&self, g: &OneInclusionGraph, e: usize) -> usize {
        let (a, b, _) = g.edges[e];
        if self.forward[e] {
            b
        } else {
            a
        }
    }

    pub fn max_outdegree(&self) -> usize {
        self.outdeg.iter().copied().max().unwrap_or(0)
    }

    fn reverse(&mut self, g: &OneInclusionGraph, e: usize) {
        let t = self.tail(g, e);
        let h = self.head(g, e);
        self.forward[e] = !self.forward[e];
        self.outdeg[t] -= 1;
        self.outdeg[h] += 1;
    }
}

/// Drives every out-degree to at most `target` by reversing directed paths
/// from overloaded vertices to vertices with spare capacity. When no such
/// path exists the vertices reachable from the overloaded one span more than
/// `target` edges each on average, so no orientation meets `target`.
fn reduce_to(g: &OneInclusionGraph, o: &mut Orientation, target: usize) -> bool {
    let n = g.vertices.len();
    let mut parent_edge = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    while let Some(u) = (0..n).find(|&v| o.outdeg[v] > target) {
        seen.iter_mut().for_each(|s| *s = false);
        seen[u] = true;
        let mut queue = VecDeque::from([u]);
        let mut found = None;
        'bfs: while let Some(v) = queue.pop_front() {
            for &e in &g.incident[v] {
                if o.tail(g, e) != v {
                    continue;
                }
                let w = o.head(g, e);
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                parent_edge[w] = e;
                if o.outdeg[w] < target {
                    found = Some(w);
                    break 'bfs;
                }
                queue.push_back(w);
            }
        }
        let Some(mut w) = found else {
            return false;
        };
        while w != u {
            let e = parent_edge[w];
            let t = o.tail(g, e);
            o.reverse(g, e);
            w = t;
        }
    }
    true
}

/// Orientation minimizing the maximum out-degree. Starts from "smaller vertex
/// points to larger", reaches out-degree `vc` by path reversal (an error if
/// that fails, since the class guarantees it), then keeps lowering the
/// target while feasible.
pub fn orient_min_outdegree(g: &OneInclusionGraph, vc: usize) -> Result<Orientation> {
    let mut o = Orientation {
        forward: vec![true; g.edges.len()],
        outdeg: vec![0; g.vertices.len()],
    };
    for &(a, _, _) in &g.edges {
        o.outdeg[a] += 1;
    }
    if !reduce_to(g, &mut o, vc) {
        return Err(Error::Orientation { target: vc });
    }
    let mut target = o.max_outdegree();
    while target > 0 {
        let mut trial = o.clone();
        if !reduce_to(g, &mut trial, target - 1) {
            break;
        }
        o = trial;
        target = o.max_outdegree();
    }
    Ok(o)
}

/// Transductive one-inclusion-graph prediction at `x`.
pub fn oig_predict(class: &ConceptClass, vc: usize, sample: &Sample, x: &Instance) -> Result<bool> {
    sample.check(&class.universe())?;
    class.universe().check(x)?;
    match class {
        ConceptClass::Threshold1D => {
            let (max0, min1) = threshold::label_extremes(sample).expect("checked scalars");
            if max0 >= min1 {
                return Err(Error::NotRealizable);
            }
            let v = x.as_scalar().expect("checked scalar");
            // Between the classes both extensions are realizable; the
            // lexicographic orientation of the path graph points the x-edge
            // at the labeling with x = 1.
            Ok(v > max0)
        }
        ConceptClass::FiniteTabular(t) => {
            let xid = x.as_id().expect("checked id");
            let mut coords: Vec<u32> = sample
                .iter()
                .map(|e| e.x.as_id().expect("checked id"))
                .chain(std::iter::once(xid))
                .collect();
            coords.sort_unstable();
            coords.dedup();
            if coords.len() > MAX_COORDS {
                return Err(Error::limit(
                    "oig_predict",
                    format!("{} distinct instances (max {MAX_COORDS})", coords.len()),
                ));
            }
            let pos = |id: u32| coords.binary_search(&id).expect("coordinate present") as u32;
            let mut ones = 0u64;
            let mut zeros = 0u64;
            for e in sample.iter() {
                let j = pos(e.x.as_id().expect("checked id"));
                if e.y {
                    ones |= 1 << j;
                } else {
                    zeros |= 1 << j;
                }
            }
            if ones & zeros != 0 {
                return Err(Error::NotRealizable);
            }
            let fixed = ones | zeros;
            let vertices = t.patterns(&coords);
            let consistent: Vec<u64> = vertices.iter().copied().filter(|v| v & fixed == ones).collect();
            let jx = pos(xid);
            match consistent.as_slice() {
                [] => Err(Error::NotRealizable),
                [v] => Ok((v >> jx) & 1 == 1),
                [v0, v1] => {
                    let g = OneInclusionGraph::new(vertices, coords.len() as u32);
                    let o = orient_min_outdegree(&g, vc)?;
                    let a = g.index_of(*v0).expect("vertex");
                    let b = g.index_of(*v1).expect("vertex");
                    let e = g.edge_between(a, b).expect("extensions differ only at x");
                    Ok((g.vertices[o.head(&g, e)] >> jx) & 1 == 1)
                }
                _ => unreachable!("at most two extensions of a full labeling of S"),
            }
        }
        ConceptClass::Halfspace { .. } => Err(Error::unsupported("oig_predict", class.name())),
    }
}

/// One-inclusion-graph learner. On samples the class cannot realize (which
/// only arise under attack) it falls back to ERM so that it stays total.
#[derive(Clone, Debug, PartialEq)]
pub struct Oig {
    pub class: ConceptClass,
    pub vc: usize,
}

impl Oig {
    pub fn new(class: ConceptClass) -> Result<Self> {
        let vc = class.vc_dimension()?;
        Self::with_vc(class, vc)
    }

    /// For classes too large for exhaustive VC computation.
    pub fn with_vc(class: ConceptClass, vc: usize) -> Result<Self> {
        if let ConceptClass::Halfspace { .. } = class {
            return Err(Error::unsupported("oig", class.name()));
        }
        Ok(Oig { class, vc })
    }

    fn realizable(&self, sample: &Sample) -> Result<bool> {
        self.class.is_realizable(sample)
    }
}

#[derive(Debug)]
struct OigHypothesis {
    learner: Oig,
    sample: Sample,
}

impl Predictor for OigHypothesis {
    fn predict(&self, x: &Instance) -> Result<bool> {
        oig_predict(&self.learner.class, self.learner.vc, &self.sample, x)
    }
}

impl Learner for Oig {
    fn name(&self) -> String {
        "oig".into()
    }

    fn learn(&self, sample: &Sample) -> Result<Hypothesis> {
        if !self.realizable(sample)? {
            return erm_learn(&self.class, sample);
        }
        Ok(Hypothesis::Free(Arc::new(OigHypothesis {
            learner: self.clone(),
            sample: sample.clone(),
        })))
    }

    fn predict(&self, sample: &Sample, x: &Instance) -> Result<bool> {
        if !self.realizable(sample)? {
            return erm_learn(&self.class, sample)?.evaluate(x);
        }
        oig_predict(&self.class, self.vc, sample, x)
    }
}
