//! Graph construction and component extraction against brute-force oracles.

use chainposet::chaingraph::{
    build_chain_graph, chain_components, condensation, reaches_recurrent, recurrent_cells, ChainGraph, EpsilonField,
    Grid, Mode,
};
use chainposet::lyapunov::synthesize;
use chainposet::rational::{int, rat, Rational};
use chainposet::systems::{conjugate, IntervalBlock, PlHomeo, SystemSpec, Variant};
use proptest::prelude::*;

fn distance(a: &IntervalBlock, b: &IntervalBlock) -> Rational {
    if a.hi < b.lo {
        &b.lo - &a.hi
    } else if b.hi < a.lo {
        &a.lo - &b.hi
    } else {
        int(0)
    }
}

/// Every pair of cells tested directly against the image of the endpoints.
fn edge_oracle(f: &SystemSpec, grid: &Grid, eps: &Rational) -> Vec<Vec<usize>> {
    (0..grid.len())
        .map(|i| {
            let c = grid.cell(i);
            let image = IntervalBlock::new(f.eval(&c.lo).unwrap(), f.eval(&c.hi).unwrap());
            (0..grid.len()).filter(|&j| distance(&image, &grid.cell(j)) < *eps).collect()
        })
        .collect()
}

fn reach_from(adj: &[Vec<usize>], s: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = adj[s].clone();
    while let Some(v) = stack.pop() {
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend(&adj[v]);
        }
    }
    seen
}

fn continuous_system() -> impl Strategy<Value = SystemSpec> {
    let maps = prop::sample::select(vec!["0", "1", "2", "3", "w", "w+1", "w^2"])
        .prop_map(|l| SystemSpec::ordinal_map(l.parse().unwrap()));
    prop_oneof![
        3 => maps.clone(),
        1 => maps.prop_map(|f| {
            let h = PlHomeo::new(vec![(int(0), int(0)), (rat(1, 3), rat(1, 2)), (int(1), int(1))]).unwrap();
            conjugate(&f, &h).unwrap()
        }),
        1 => (1u32..4).prop_map(|d| SystemSpec::cantor_example(d).unwrap()),
    ]
}

fn any_system() -> impl Strategy<Value = SystemSpec> {
    prop_oneof![
        continuous_system(),
        (1u32..4, prop::sample::select(vec![Variant::WithMax, Variant::NoMax, Variant::OpenInterval]))
            .prop_map(|(d, v)| SystemSpec::dense_blocks(d, v)),
    ]
}

fn random_graph() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..24).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0..n, 0..4), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edges_match_oracle(f in continuous_system(), n in 4usize..64, num in 1i64..200) {
        let grid = Grid::unit(n);
        let eps = rat(num, 1000);
        let g = build_chain_graph(&f, &grid, &EpsilonField::constant(eps.clone()).unwrap(), Mode::Enclosure).unwrap();
        let expected = edge_oracle(&f, &grid, &eps);
        prop_assert_eq!(g.adjacency(), expected.as_slice());
    }

    #[test]
    fn larger_eps_gives_supergraph(f in any_system(), n in 4usize..64, a in 1i64..100, b in 1i64..100) {
        let grid = Grid::for_system(&f, n);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let build = |k| build_chain_graph(&f, &grid, &EpsilonField::constant(rat(k, 1000)).unwrap(), Mode::Enclosure).unwrap();
        prop_assert!(build(lo).is_subgraph_of(&build(hi)));
    }

    #[test]
    fn sampled_graph_inside_enclosure_graph(f in any_system(), n in 4usize..64) {
        let grid = Grid::for_system(&f, n);
        let eps = EpsilonField::auto(&grid);
        let sampled = build_chain_graph(&f, &grid, &eps, Mode::Sampled).unwrap();
        let full = build_chain_graph(&f, &grid, &eps, Mode::Enclosure).unwrap();
        prop_assert!(sampled.is_subgraph_of(&full));
    }

    #[test]
    fn components_match_reachability_oracle(adj in random_graph()) {
        let n = adj.len();
        let g = ChainGraph::from_adjacency(Grid::unit(n), EpsilonField::constant(int(1)).unwrap(), Mode::Enclosure, adj);
        let reach: Vec<Vec<bool>> = (0..n).map(|i| reach_from(g.adjacency(), i)).collect();
        let recurrent: Vec<usize> = (0..n).filter(|&i| reach[i][i]).collect();
        prop_assert_eq!(&recurrent_cells(&g), &recurrent);

        let p = chain_components(&g);
        let owner: Vec<Option<usize>> = (0..n)
            .map(|i| p.components().iter().find(|c| c.cells.contains(&i)).map(|c| c.id))
            .collect();
        for &i in &recurrent {
            for &j in &recurrent {
                let same = reach[i][j] && reach[j][i];
                prop_assert_eq!(owner[i] == owner[j], same);
                if !same {
                    prop_assert_eq!(p.precedes(owner[j].unwrap(), owner[i].unwrap()), reach[i][j]);
                }
            }
        }
        let to_rec: Vec<bool> = (0..n).map(|i| recurrent.iter().any(|&r| r == i || reach[i][r])).collect();
        prop_assert_eq!(reaches_recurrent(&g), to_rec);
    }

    #[test]
    fn lyapunov_values_follow_edges(adj in random_graph()) {
        let n = adj.len();
        let g = ChainGraph::from_adjacency(Grid::unit(n), EpsilonField::constant(int(1)).unwrap(), Mode::Enclosure, adj);
        let a = synthesize(&g);
        let cond = condensation(&g);
        for (i, j) in g.edges() {
            if cond.node_of[i] == cond.node_of[j] {
                prop_assert_eq!(&a.cell_values[i], &a.cell_values[j]);
            } else {
                prop_assert!(a.cell_values[j] < a.cell_values[i]);
            }
        }
        let mut vals = a.component_values.clone();
        vals.sort();
        vals.dedup();
        prop_assert_eq!(vals.len(), a.component_values.len());
    }
}
