//! The explicit dendrogram: parent map plus two rake-compress forests, one
//! over the input forest and one over the dendrogram itself.

use crate::error::{Error, Result};
use crate::oracle;
use crate::rc_tree::RCForest;
use crate::types::{check_parent_map, serialize_canonical, Edge, EdgeKey, ForestState, ParentMap, Spine, VertexId};
use std::collections::{BTreeMap, HashMap};

pub struct DendrogramState {
    pub(crate) forest: ForestState,
    pub(crate) parents: ParentMap,
    /// Edge-weighted, over the input vertices.
    pub(crate) forest_rc: RCForest<Edge>,
    /// Vertex-weighted, one vertex per dendrogram node, edges are parent links.
    pub(crate) sld_rc: RCForest<Edge>,
    slot_of: HashMap<EdgeKey, u32>,
    node_at: Vec<Option<Edge>>,
    free_slots: Vec<u32>,
}

impl Clone for DendrogramState {
    fn clone(&self) -> Self {
        DendrogramState {
            forest: self.forest.clone(),
            parents: self.parents.clone(),
            forest_rc: self.forest_rc.clone(),
            sld_rc: self.sld_rc.clone(),
            slot_of: self.slot_of.clone(),
            node_at: self.node_at.clone(),
            free_slots: self.free_slots.clone(),
        }
    }
}

impl DendrogramState {
    pub fn build(num_vertices: usize, edges: &[Edge]) -> Result<Self> {
        for e in edges {
            if e.key.hi as usize >= num_vertices {
                return Err(Error::VertexOutOfRange(e.key.hi));
            }
        }
        let parents = oracle::kruskal_sld(num_vertices, edges)?;
        let mut forest = ForestState::new(num_vertices);
        for e in edges {
            forest.insert_edge(*e);
        }
        let links: Vec<(u32, u32, Option<Edge>)> = edges.iter().map(|e| (e.key.lo, e.key.hi, Some(*e))).collect();
        let forest_rc = RCForest::from_edges(vec![None; num_vertices], &links)?;
        let node_at: Vec<Option<Edge>> = parents.keys().map(|e| Some(*e)).collect();
        let slot_of: HashMap<EdgeKey, u32> =
            node_at.iter().enumerate().map(|(i, e)| (e.expect("live").key, i as u32)).collect();
        let sld_links: Vec<(u32, u32, Option<Edge>)> =
            parents.iter().filter_map(|(e, p)| p.map(|p| (slot_of[&e.key], slot_of[&p.key], None))).collect();
        let sld_rc = RCForest::from_edges(node_at.clone(), &sld_links)?;
        Ok(DendrogramState { forest, parents, forest_rc, sld_rc, slot_of, node_at, free_slots: Vec::new() })
    }

    pub fn num_vertices(&self) -> usize {
        self.forest.num_vertices
    }

    pub fn forest(&self) -> &ForestState {
        &self.forest
    }

    pub fn parent_map(&self) -> &ParentMap {
        &self.parents
    }

    pub fn serialize(&self) -> String {
        serialize_canonical(&self.parents)
    }

    pub fn edge(&self, key: EdgeKey) -> Option<Edge> {
        self.forest.edge(key)
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.forest.edge_list()
    }

    pub fn forest_rc(&self) -> &RCForest<Edge> {
        &self.forest_rc
    }

    pub fn sld_rc(&self) -> &RCForest<Edge> {
        &self.sld_rc
    }

    /// Hierarchy nodes touched in either forest since the last call.
    pub fn take_visits(&self) -> u64 {
        self.forest_rc.take_visits() + self.sld_rc.take_visits()
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.forest_rc.add_vertex(None);
        self.forest.add_vertex()
    }

    pub fn parent(&self, e: &Edge) -> Option<Edge> {
        self.parents.get(e).copied().flatten()
    }

    pub(crate) fn slot(&self, key: EdgeKey) -> Result<u32> {
        self.slot_of.get(&key).copied().ok_or(Error::NoSuchEdge(key))
    }

    pub(crate) fn node_at(&self, slot: u32) -> Edge {
        self.node_at[slot as usize].expect("live slot")
    }

    /// The ROOT node of the dendrogram containing `e`, read from the
    /// weight-maximum vertex of its component in the dendrogram forest.
    pub fn root_of(&self, key: EdgeKey) -> Result<Edge> {
        let s = self.slot(key)?;
        let (e, _) = self.sld_rc.component_max_vertex(s)?.expect("weighted slot");
        Ok(e)
    }

    /// `e, parent(e), ..., root`, unpacked from the dendrogram forest.
    pub fn extract_spine(&self, key: EdgeKey) -> Result<Spine> {
        let s = self.slot(key)?;
        let (_, r) = self.sld_rc.component_max_vertex(s)?.expect("weighted slot");
        let path = self.sld_rc.extract_path(s, r)?;
        Ok(Spine {
            nodes: path.into_iter().map(|x| self.node_at(x)).collect(),
            component: Some(self.forest_rc.representative(key.lo)?),
        })
    }

    /// The same spine by following parent pointers.
    pub fn chase_spine(&self, key: EdgeKey) -> Result<Spine> {
        let mut e = self.forest.edge(key).ok_or(Error::NoSuchEdge(key))?;
        let mut nodes = vec![e];
        while let Some(p) = self.parent(&e) {
            nodes.push(p);
            e = p;
        }
        Ok(Spine { nodes, component: Some(self.forest_rc.representative(key.lo)?) })
    }

    /// Adds `e` as an isolated ROOT node of the dendrogram forest.
    pub(crate) fn insert_node(&mut self, e: Edge) {
        let slot = match self.free_slots.pop() {
            Some(s) => {
                self.node_at[s as usize] = Some(e);
                self.sld_rc.set_vertex_weight(s, Some(e)).expect("slot in range");
                s
            }
            None => {
                self.node_at.push(Some(e));
                self.sld_rc.add_vertex(Some(e))
            }
        };
        self.slot_of.insert(e.key, slot);
        self.parents.insert(e, None);
    }

    /// Rewires parent pointers in one step: cuts every outdated link in the
    /// dendrogram forest, then links the new ones. Returns the number of
    /// assignments that actually changed plus added and removed nodes.
    pub fn apply_parent_changes(
        &mut self,
        changes: &[(Edge, Option<Edge>)],
        added: &[Edge],
        removed: &[Edge],
    ) -> Result<u64> {
        for &(e, p) in changes {
            if !self.parents.contains_key(&e) && !added.contains(&e) {
                return Err(Error::NoSuchEdge(e.key));
            }
            if let Some(p) = p {
                if p <= e {
                    return Err(Error::HeapViolation { node: e.key, parent: p.key });
                }
                if removed.contains(&p) || (!self.parents.contains_key(&p) && !added.contains(&p)) {
                    return Err(Error::NoSuchEdge(p.key));
                }
            }
        }
        for e in added {
            self.insert_node(*e);
        }
        let mut count = added.len() as u64 + removed.len() as u64;
        let mut cuts = Vec::new();
        let mut links = Vec::new();
        let mut final_parent: BTreeMap<Edge, Option<Edge>> = BTreeMap::new();
        for &(e, p) in changes {
            final_parent.insert(e, p);
        }
        for (&e, &p) in &final_parent {
            let old = self.parent(&e);
            if old == p {
                continue;
            }
            if !added.contains(&e) {
                count += 1;
            }
            if let Some(old) = old {
                cuts.push((self.slot(e.key)?, self.slot(old.key)?));
            }
            if let Some(p) = p {
                links.push((self.slot(e.key)?, self.slot(p.key)?, None));
            }
        }
        for e in removed {
            if let Some(old) = self.parent(e) {
                if !final_parent.contains_key(e) {
                    cuts.push((self.slot(e.key)?, self.slot(old.key)?));
                }
            }
        }
        self.sld_rc.batch_cut(&cuts)?;
        for e in removed {
            let s = self.slot_of.remove(&e.key).ok_or(Error::NoSuchEdge(e.key))?;
            self.node_at[s as usize] = None;
            self.sld_rc.set_vertex_weight(s, None)?;
            self.free_slots.push(s);
            self.parents.remove(e);
        }
        self.sld_rc.batch_link(&links)?;
        for (e, p) in final_parent {
            if self.parents.contains_key(&e) {
                self.parents.insert(e, p);
            }
        }
        Ok(count)
    }

    /// Longest root-directed chain, in nodes, over the dendrogram of the
    /// component containing vertex `v`.
    pub fn height(&self, v: VertexId) -> Result<usize> {
        self.forest.check_vertex(v)?;
        if self.forest.adjacency[v as usize].is_empty() {
            return Err(Error::NoSuchComponent(v));
        }
        let rep = self.forest_rc.representative(v)?;
        let mut depth: HashMap<Edge, usize> = HashMap::new();
        let mut best = 0;
        for (&e, _) in self.parents.iter().rev() {
            if self.forest_rc.representative(e.key.lo)? != rep {
                continue;
            }
            let d = match self.parent(&e) {
                None => 1,
                Some(p) => depth[&p] + 1,
            };
            depth.insert(e, d);
            best = best.max(d);
        }
        Ok(best)
    }

    /// Height of the dendrogram that contains node `e`.
    pub fn node_height(&self, key: EdgeKey) -> Result<usize> {
        self.height(key.lo)
    }

    pub fn roots(&self) -> Vec<Edge> {
        self.parents.iter().filter(|(_, p)| p.is_none()).map(|(e, _)| *e).collect()
    }

    /// Checks every invariant, including equality with the Kruskal reference.
    pub fn validate(&self) -> Result<()> {
        check_parent_map(&self.parents)?;
        let reference = oracle::kruskal_sld(self.forest.num_vertices, &self.forest.edge_list())?;
        for ((a, pa), (b, pb)) in self.parents.iter().zip(reference.iter()) {
            if a != b || pa != pb {
                return Err(Error::OracleMismatch(a.key));
            }
        }
        if self.parents.len() != reference.len() {
            return Err(Error::OracleMismatch(EdgeKey { lo: 0, hi: 0 }));
        }
        // Mirror: one link per non-root node and matching components.
        let links = self.parents.values().filter(|p| p.is_some()).count();
        if self.sld_rc.num_edges() != links {
            return Err(Error::MirrorMismatch(format!("{} links vs {} parents", self.sld_rc.num_edges(), links)));
        }
        for (e, p) in &self.parents {
            if let Some(p) = p {
                if !self.sld_rc.has_edge(self.slot(e.key)?, self.slot(p.key)?) {
                    return Err(Error::MirrorMismatch(format!("missing link {} -> {}", e.key, p.key)));
                }
            }
            if self.sld_rc.vertex_weight(self.slot(e.key)?) != Some(*e) {
                return Err(Error::MirrorMismatch(format!("slot weight of {}", e.key)));
            }
        }
        let mut root_by_rep: HashMap<VertexId, Edge> = HashMap::new();
        for r in self.roots() {
            let rep = self.forest_rc.representative(r.key.lo)?;
            if root_by_rep.insert(rep, r).is_some() {
                return Err(Error::RootMismatch(format!("two roots in component {}", rep)));
            }
        }
        for e in self.parents.keys() {
            let rep = self.forest_rc.representative(e.key.lo)?;
            if root_by_rep.get(&rep) != Some(&self.root_of(e.key)?) {
                return Err(Error::RootMismatch(format!("root of {}", e.key)));
            }
        }
        if self.forest_rc.num_edges() != self.forest.edges.len() {
            return Err(Error::ForestMismatch("edge counts differ".into()));
        }
        for e in self.forest.edges.values() {
            if !self.forest_rc.has_edge(e.key.lo, e.key.hi) {
                return Err(Error::ForestMismatch(format!("missing edge {}", e.key)));
            }
            for v in [e.key.lo, e.key.hi] {
                if !self.forest.adjacency[v as usize].contains(e) {
                    return Err(Error::ForestMismatch(format!("adjacency of {}", v)));
                }
            }
        }
        Ok(())
    }

    /// Skips one level of the lowest node with a grandparent, as a merge
    /// that drops a step would. Exists to check that verification catches
    /// faults; returns whether anything changed.
    #[doc(hidden)]
    pub fn inject_fault(&mut self) -> bool {
        let hit = self.parents.iter().find_map(|(e, p)| {
            let g = self.parents.get(p.as_ref()?).copied().flatten()?;
            Some((*e, g))
        });
        match hit {
            Some((e, g)) => {
                self.parents.insert(e, Some(g));
                true
            }
            None => false,
        }
    }

    #[cfg(test)]
    pub(crate) fn corrupt_parent(&mut self, e: Edge, p: Option<Edge>) {
        self.parents.insert(e, p);
    }
}
