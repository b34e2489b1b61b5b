//! Randomized invariants of the glyph notation, forward evaluation, and the
//! injective counting machinery.

use graph_pencil::counting::CountTable;
use graph_pencil::forward::eval_density;
use graph_pencil::{BistarGlyph, SbmParams, UndirectedGraph};
use proptest::prelude::*;

fn glyph_strategy() -> impl Strategy<Value = BistarGlyph> {
    (0usize..=4, 0usize..=2, 0usize..=4, any::<bool>())
        .prop_map(|(l, c, r, e)| BistarGlyph::unrooted(l, c, r, e))
}

fn params_strategy() -> impl Strategy<Value = SbmParams> {
    (1usize..=3).prop_flat_map(|k| {
        (
            proptest::collection::vec(0.05f64..1.0, k),
            proptest::collection::vec(0.0f64..=1.0, k * (k + 1) / 2),
        )
            .prop_map(move |(weights, upper)| {
                let total: f64 = weights.iter().sum();
                let pi: Vec<f64> = weights.iter().map(|w| w / total).collect();
                let mut b = vec![vec![0.0; k]; k];
                let mut it = upper.into_iter();
                for i in 0..k {
                    for j in i..k {
                        let v = it.next().unwrap();
                        b[i][j] = v;
                        b[j][i] = v;
                    }
                }
                SbmParams::new(pi, b).unwrap()
            })
    })
}

fn graph_strategy() -> impl Strategy<Value = UndirectedGraph> {
    (8usize..=14, any::<u64>(), 0.1f64..0.9).prop_map(|(n, seed, p)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut g = UndirectedGraph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen::<f64>() < p {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Printing a glyph and parsing it back is the identity.
    #[test]
    fn notation_round_trip(glyph in glyph_strategy()) {
        let text = glyph.to_string();
        let parsed: BistarGlyph = text.parse().unwrap();
        prop_assert_eq!(parsed, glyph);
    }

    /// Exact forward densities are probabilities.
    #[test]
    fn exact_density_is_a_probability(
        params in params_strategy(),
        glyph in glyph_strategy(),
    ) {
        let d = eval_density(&params, &glyph).unwrap().as_scalar().unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&d), "density {d}");
    }

    /// Mirroring a glyph left-right never changes its unrooted density,
    /// exactly or on a concrete graph.
    #[test]
    fn mirror_symmetry(
        params in params_strategy(),
        graph in graph_strategy(),
        glyph in glyph_strategy(),
    ) {
        let mirrored = glyph.swapped();
        let a = eval_density(&params, &glyph).unwrap().as_scalar().unwrap();
        let b = eval_density(&params, &mirrored).unwrap().as_scalar().unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));

        if glyph.vertex_count() <= graph.n() {
            let table = CountTable::for_glyph(&graph, &glyph).unwrap();
            let mirrored_table = CountTable::for_glyph(&graph, &mirrored).unwrap();
            let ca = table.inj_hom_count(&glyph).unwrap();
            let cb = mirrored_table.inj_hom_count(&mirrored).unwrap();
            prop_assert_eq!(ca, cb);
        }
    }

    /// Counted densities are probabilities, and relabeling the graph's
    /// nodes leaves every count unchanged.
    #[test]
    fn counting_is_label_invariant(
        graph in graph_strategy(),
        glyph in glyph_strategy(),
        rotation in 1usize..=7,
    ) {
        prop_assume!(glyph.vertex_count() <= graph.n());
        let n = graph.n();
        // Relabel by a cyclic rotation: node u becomes (u + rotation) mod n.
        let edges: Vec<(usize, usize)> = graph
            .edges()
            .iter()
            .map(|&(u, v)| ((u + rotation) % n, (v + rotation) % n))
            .collect();
        let relabeled = UndirectedGraph::from_edges(n, &edges).unwrap();

        let table = CountTable::for_glyph(&graph, &glyph).unwrap();
        let other = CountTable::for_glyph(&relabeled, &glyph).unwrap();
        let density = table.inj_hom_density(&glyph).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&density), "density {density}");
        prop_assert_eq!(
            table.inj_hom_count(&glyph).unwrap(),
            other.inj_hom_count(&glyph).unwrap()
        );
    }
}
