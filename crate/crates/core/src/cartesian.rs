//! Dynamic Cartesian trees as the dendrogram of a weighted path.
//!
//! Element `i` of the sequence is the edge between path vertices `i` and
//! `i + 1`. The dendrogram roots at the rank maximum, so a min-rooted tree
//! stores negated values.

use crate::dendrogram::DendrogramState;
use crate::error::{Error, Result};
use crate::oracle::{BinaryTree, Order};
use crate::types::{Edge, EdgeKey, UpdateReport, VertexId, Weight};
use crate::updates::UpdateMode;
use std::collections::HashMap;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Front,
    Back,
}

#[derive(Clone)]
pub struct CartesianState {
    order: Order,
    backing: DendrogramState,
    /// Path vertices in sequence order; one more than the element count
    /// unless the sequence is empty.
    path: Vec<VertexId>,
    /// Isolated vertices left behind by contractions, reused by splits.
    spare: Vec<VertexId>,
}

fn stable_id(key: EdgeKey) -> u64 {
    ((key.lo as u64) << 32) | key.hi as u64
}

impl CartesianState {
    pub fn build_array(values: &[Weight], order: Order) -> Result<Self> {
        let n = if values.is_empty() { 0 } else { values.len() + 1 };
        let stored = |v: Weight| if order == Order::MinRoot { -v } else { v };
        let edges: Vec<Edge> = values
            .iter()
            .enumerate()
            .map(|(i, v)| Edge { weight: stored(*v), key: EdgeKey::of(i as u32, i as u32 + 1) })
            .collect();
        Ok(CartesianState {
            order,
            backing: DendrogramState::build(n, &edges)?,
            path: (0..n as u32).collect(),
            spare: Vec::new(),
        })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn len(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    pub fn backing(&self) -> &DendrogramState {
        &self.backing
    }

    fn stored(&self, v: Weight) -> Weight {
        match self.order {
            Order::MaxRoot => v,
            Order::MinRoot => -v,
        }
    }

    fn edge_for(&self, a: VertexId, b: VertexId, v: Weight) -> Edge {
        Edge { weight: self.stored(v), key: EdgeKey::of(a, b) }
    }

    fn key_at(&self, pos: usize) -> EdgeKey {
        EdgeKey::of(self.path[pos], self.path[pos + 1])
    }

    fn value_at(&self, pos: usize) -> Weight {
        self.stored(self.backing.edge(self.key_at(pos)).expect("element edge").weight)
    }

    /// `(value, stable id)` per element; ties in value resolve toward the
    /// larger id.
    pub fn elements(&self) -> Vec<(Weight, u64)> {
        (0..self.len()).map(|i| (self.value_at(i), stable_id(self.key_at(i)))).collect()
    }

    pub fn in_order(&self) -> Vec<Weight> {
        (0..self.len()).map(|i| self.value_at(i)).collect()
    }

    pub fn to_tree(&self) -> BinaryTree {
        let n = self.len();
        let mut t = BinaryTree { root: None, parent: vec![None; n], left: vec![None; n], right: vec![None; n] };
        let pos: HashMap<VertexId, usize> = self.path.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let index = |k: EdgeKey| pos[&k.lo].min(pos[&k.hi]);
        for (e, p) in self.backing.parent_map() {
            let i = index(e.key);
            match p {
                None => t.root = Some(i),
                Some(p) => {
                    let j = index(p.key);
                    t.parent[i] = Some(j);
                    if i < j {
                        t.left[j] = Some(i);
                    } else {
                        t.right[j] = Some(i);
                    }
                }
            }
        }
        t
    }

    fn fresh_vertex(&mut self) -> VertexId {
        self.spare.pop().unwrap_or_else(|| self.backing.add_vertex())
    }

    /// Adds an element at one end of the sequence.
    pub fn leaf_insert(&mut self, end: End, value: Weight) -> Result<UpdateReport> {
        if self.path.is_empty() {
            let a = self.fresh_vertex();
            self.path.push(a);
        }
        let x = self.fresh_vertex();
        let a = match end {
            End::Front => {
                let a = self.path[0];
                self.path.insert(0, x);
                a
            }
            End::Back => {
                let a = *self.path.last().expect("non-empty path");
                self.path.push(x);
                a
            }
        };
        let e = self.edge_for(a, x, value);
        self.backing.insert_output_sensitive(e.key.lo, e.key.hi, e.weight)
    }

    /// Removes the first or last element. Its node has at most one child,
    /// which moves up to the grandparent.
    pub fn leaf_delete(&mut self, pos: usize) -> Result<UpdateReport> {
        let len = self.len();
        if pos >= len {
            return Err(Error::PositionOutOfRange { pos, len });
        }
        let back = pos == len - 1;
        let (leaf, inner) = if back {
            (self.path[len], self.path[len - 1])
        } else if pos == 0 {
            (self.path[0], self.path[1])
        } else {
            return Err(Error::NotAnEnd(pos));
        };
        let r = self.backing.delete_pendant(inner, leaf)?;
        if back {
            self.path.pop();
        } else {
            self.path.remove(0);
        }
        self.spare.push(leaf);
        if self.path.len() == 1 {
            self.spare.push(self.path.pop().expect("last vertex"));
        }
        Ok(r)
    }

    /// Inserts `value` so that it becomes element `pos`. Interior positions
    /// split the vertex between elements `pos - 1` and `pos`.
    pub fn insert_at(&mut self, pos: usize, value: Weight) -> Result<UpdateReport> {
        let len = self.len();
        if pos > len {
            return Err(Error::PositionOutOfRange { pos, len });
        }
        if pos == 0 {
            return self.leaf_insert(End::Front, value);
        }
        if pos == len {
            return self.leaf_insert(End::Back, value);
        }
        let start = Instant::now();
        let (u, v) = (self.path[pos], self.path[pos + 1]);
        let old = self.backing.edge(EdgeKey::of(u, v)).expect("element edge");
        let x = self.fresh_vertex();
        let mode = UpdateMode::SeqOs;
        let mut rep = self.backing.delete(u, v, mode)?;
        let e = self.edge_for(u, x, value);
        rep.absorb(&self.backing.insert(e.key.lo, e.key.hi, e.weight, mode)?);
        rep.absorb(&self.backing.insert(x, v, old.weight, mode)?);
        self.path.insert(pos + 1, x);
        rep.elapsed = start.elapsed();
        Ok(rep)
    }

    /// Removes element `pos`. Interior positions contract its edge: the
    /// element and its right neighbour go, and the neighbour's value returns
    /// on an edge that skips the removed vertex.
    pub fn delete_at(&mut self, pos: usize) -> Result<UpdateReport> {
        let len = self.len();
        if pos >= len {
            return Err(Error::PositionOutOfRange { pos, len });
        }
        if pos == 0 || pos == len - 1 {
            return self.leaf_delete(pos);
        }
        let start = Instant::now();
        let (v, u, w) = (self.path[pos], self.path[pos + 1], self.path[pos + 2]);
        let next = self.backing.edge(EdgeKey::of(u, w)).expect("element edge");
        let mode = UpdateMode::SeqOs;
        let mut rep = self.backing.delete(u, v, mode)?;
        rep.absorb(&self.backing.delete(u, w, mode)?);
        rep.absorb(&self.backing.insert(v, w, next.weight, mode)?);
        self.path.remove(pos + 1);
        self.spare.push(u);
        rep.elapsed = start.elapsed();
        Ok(rep)
    }

    /// Checks the backing dendrogram and the tree shape against a
    /// recursive rebuild.
    pub fn verify(&self) -> Result<()> {
        self.backing.validate()?;
        if self.to_tree() != crate::oracle::cartesian_recursive(&self.elements(), self.order) {
            return Err(Error::Invalid("tree differs from recursive construction".into()));
        }
        Ok(())
    }
}

impl DendrogramState {
    /// Deletes edge `(a, x)` where `x` has no other edge. The edge's node
    /// has at most one child: the predecessor of the node on the spine of
    /// the lightest remaining edge at `a`.
    pub fn delete_pendant(&mut self, a: VertexId, x: VertexId) -> Result<UpdateReport> {
        let start = Instant::now();
        self.take_visits();
        let key = EdgeKey::new(a, x)?;
        let e = self.forest.edge(key).ok_or(Error::NoSuchEdge(key))?;
        if self.forest.adjacency[x as usize].len() != 1 {
            return Err(Error::Invalid(format!("{x} is not a leaf")));
        }
        let mut rep = UpdateReport::default();
        let mut changes = Vec::new();
        if let Some(f) = self.forest.adjacency[a as usize].iter().find(|f| f.key != key).copied() {
            let s = self.slot(f.key)?;
            let r = self.slot(self.root_of(f.key)?.key)?;
            rep.pws_queries += 1;
            if let Some(c) = self.sld_rc.pws(s, r, e)?.pred {
                let c = self.node_at(c);
                if self.parent(&c) == Some(e) {
                    changes.push((c, self.parent(&e)));
                }
            }
        }
        self.forest_rc.cut(a, x)?;
        self.forest.remove_edge(key);
        rep.pointer_changes = self.apply_parent_changes(&changes, &[], &[e])?;
        rep.rc_nodes_visited = self.take_visits();
        rep.elapsed = start.elapsed();
        Ok(rep)
    }
}
