//! Bipartite matching by augmenting paths.

/// Agent-item desire graph: `desires[a]` lists the items agent `a` accepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartite {
    pub items: usize,
    pub desires: Vec<Vec<usize>>,
}

impl Bipartite {
    pub fn agents(&self) -> usize {
        self.desires.len()
    }

    pub fn well_formed(&self) -> bool {
        self.desires.iter().all(|d| d.iter().all(|&j| j < self.items))
    }
}

/// Incremental matching: agents are added one at a time and kept only if the
/// current matched set plus the new agent can still be saturated.
#[derive(Debug, Clone)]
pub struct IncrementalMatching<'g> {
    graph: &'g Bipartite,
    owner: Vec<Option<usize>>,
}

impl<'g> IncrementalMatching<'g> {
    pub fn new(graph: &'g Bipartite) -> Self {
        Self { graph, owner: vec![None; graph.items] }
    }

    /// Tries to match `agent`; on failure the matching is left unchanged.
    pub fn try_add(&mut self, agent: usize) -> bool {
        let mut seen = vec![false; self.graph.items];
        augment(self.graph, agent, &mut self.owner, &mut seen)
    }
}

fn augment(g: &Bipartite, agent: usize, owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &item in &g.desires[agent] {
        if seen[item] {
            continue;
        }
        seen[item] = true;
        let free = match owner[item] {
            None => true,
            Some(other) => augment(g, other, owner, seen),
        };
        if free {
            owner[item] = Some(agent);
            return true;
        }
    }
    false
}

/// True iff some matching saturates every agent in `set`.
pub fn transversal_is_independent(graph: &Bipartite, set: &[usize]) -> bool {
    let mut m = IncrementalMatching::new(graph);
    set.iter().all(|&a| m.try_add(a))
}

/// Maximum matching size of the whole graph.
pub fn max_matching(graph: &Bipartite) -> usize {
    let mut m = IncrementalMatching::new(graph);
    (0..graph.agents()).filter(|&a| m.try_add(a)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_item() {
        let g = Bipartite { items: 1, desires: vec![vec![0], vec![0]] };
        assert!(!transversal_is_independent(&g, &[0, 1]));
        assert!(transversal_is_independent(&g, &[1]));
    }

    #[test]
    fn complete_graph() {
        let g = Bipartite { items: 2, desires: vec![vec![0, 1], vec![0, 1]] };
        assert!(transversal_is_independent(&g, &[0, 1]));
    }

    #[test]
    fn augmenting_path_reassigns() {
        // agent 0 grabs item 0 first; agent 1 only wants item 0, so agent 0 must move
        let g = Bipartite { items: 2, desires: vec![vec![0, 1], vec![0]] };
        assert!(transversal_is_independent(&g, &[0, 1]));
        assert_eq!(max_matching(&g), 2);
    }

    #[test]
    fn failed_add_leaves_state() {
        let g = Bipartite { items: 1, desires: vec![vec![0], vec![0], vec![]] };
        let mut m = IncrementalMatching::new(&g);
        assert!(m.try_add(0));
        assert!(!m.try_add(1));
        assert!(!m.try_add(2));
        assert_eq!(m.owner, vec![Some(0)]);
    }
}
