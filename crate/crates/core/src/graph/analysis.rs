use super::{EdgeId, EdgeSet, Graph};

/// One connected component (edge direction ignored).
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    pub edge_count: usize,
    /// `edge_count == vertices.len() - 1`, i.e. the component has no cycle.
    pub is_tree: bool,
    /// Sorted ids of the component's bridges.
    pub bridges: Vec<EdgeId>,
}

impl Component {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

/// Components, tree flags and bridges of a graph after deletions.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentAnalysis {
    /// Component index per vertex.
    pub component_of: Vec<usize>,
    /// Components ordered by their smallest vertex.
    pub components: Vec<Component>,
}

impl ComponentAnalysis {
    pub fn component(&self, v: usize) -> &Component {
        &self.components[self.component_of[v]]
    }

    pub fn is_bridge(&self, id: EdgeId) -> bool {
        self.components
            .iter()
            .any(|c| c.bridges.binary_search(&id).is_ok())
    }

    /// All bridge ids, sorted.
    pub fn bridges(&self) -> Vec<EdgeId> {
        let mut all: Vec<_> = self
            .components
            .iter()
            .flat_map(|c| c.bridges.iter().copied())
            .collect();
        all.sort_unstable();
        all
    }
}

/// Analysis of `g` with the edges in `deleted` removed. Ids in `deleted` that
/// are not edges of `g` are ignored.
pub fn analyze(g: &Graph, deleted: &EdgeSet) -> ComponentAnalysis {
    let mut mask = vec![false; g.id_bound()];
    for id in deleted.iter() {
        if id < mask.len() {
            mask[id] = true;
        }
    }
    analyze_masked(g, &mask)
}

pub fn analyze_masked(g: &Graph, deleted: &[bool]) -> ComponentAnalysis {
    let n = g.n();
    let adj = g.undirected_adjacency(Some(deleted));

    const UNSEEN: usize = usize::MAX;
    let mut component_of = vec![UNSEEN; n];
    let mut disc = vec![0usize; n];
    let mut low = vec![0usize; n];
    let mut components = Vec::new();
    let mut time = 0;

    // Iterative low-link DFS. Frames are (vertex, edge id used to enter it,
    // next adjacency index).
    let mut stack: Vec<(usize, Option<EdgeId>, usize)> = Vec::new();
    for root in 0..n {
        if component_of[root] != UNSEEN {
            continue;
        }
        let cid = components.len();
        let mut vertices = Vec::new();
        let mut bridges = Vec::new();
        let mut degree_sum = 0;

        time += 1;
        disc[root] = time;
        low[root] = time;
        component_of[root] = cid;
        vertices.push(root);
        stack.push((root, None, 0));

        while let Some(frame) = stack.last_mut() {
            let (u, via, next) = *frame;
            if next < adj[u].len() {
                frame.2 += 1;
                let (w, id) = adj[u][next];
                if Some(id) == via {
                    continue;
                }
                if component_of[w] == UNSEEN {
                    time += 1;
                    disc[w] = time;
                    low[w] = time;
                    component_of[w] = cid;
                    vertices.push(w);
                    stack.push((w, Some(id), 0));
                } else {
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                degree_sum += adj[u].len();
                stack.pop();
                if let (Some(id), Some(parent)) = (via, stack.last()) {
                    let p = parent.0;
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        bridges.push(id);
                    }
                }
            }
        }

        vertices.sort_unstable();
        bridges.sort_unstable();
        let edge_count = degree_sum / 2;
        components.push(Component {
            is_tree: edge_count + 1 == vertices.len(),
            vertices,
            edge_count,
            bridges,
        });
    }

    ComponentAnalysis {
        component_of,
        components,
    }
}
