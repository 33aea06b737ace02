use super::ChainGraph;

/// Strongly connected components by Tarjan's algorithm, without recursion.
///
/// Returns the component id of every node and the component count. Ids are
/// assigned in completion order, so an edge between distinct components
/// always points to a smaller id.
pub fn tarjan(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut calls: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        calls.push((root, 0));
        while let Some(&mut (v, ref mut edge)) = calls.last_mut() {
            if *edge == 0 && index[v] == UNSEEN {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*edge) {
                *edge += 1;
                if index[w] == UNSEEN {
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    (comp, next_comp)
}

/// The graph with every strongly connected component contracted to a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// Node of each cell.
    pub node_of: Vec<usize>,
    /// Member cells of each node, ascending.
    pub members: Vec<Vec<usize>>,
    /// Successor nodes, ascending, without self-loops.
    pub succ: Vec<Vec<usize>>,
    /// Whether the node is recurrent: two or more cells, or one cell whose image meets it.
    pub cyclic: Vec<bool>,
}

impl Condensation {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Condensation with node ids in sinks-first topological order.
pub fn condensation(g: &ChainGraph) -> Condensation {
    let (node_of, count) = tarjan(g.adjacency());
    let mut members = vec![Vec::new(); count];
    let mut succ = vec![Vec::new(); count];
    let mut cyclic = vec![false; count];
    for (i, &c) in node_of.iter().enumerate() {
        members[c].push(i);
        for &j in g.successors(i) {
            let d = node_of[j];
            if d == c {
                cyclic[c] |= i == j && g.touches_itself(i);
            } else {
                succ[c].push(d);
            }
        }
    }
    for (c, m) in members.iter().enumerate() {
        cyclic[c] |= m.len() > 1;
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }
    Condensation { node_of, members, succ, cyclic }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graph() {
        // 0 <-> 1 -> 2 -> 3 -> 2, 4 isolated
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2], vec![]];
        let (comp, count) = tarjan(&adj);
        assert_eq!(count, 3);
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[2], comp[3]);
        assert!(comp[2] < comp[0]);
        assert_ne!(comp[4], comp[0]);
    }

    #[test]
    fn deep_path_does_not_overflow() {
        let n = 200_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| if i + 1 < n { vec![i + 1] } else { vec![0] }).collect();
        let (_, count) = tarjan(&adj);
        assert_eq!(count, 1);
    }
}
