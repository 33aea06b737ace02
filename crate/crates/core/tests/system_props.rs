use chainposet::chaingraph::Grid;
use chainposet::ordinal::Ordinal;
use chainposet::rational::{int, rat, Rational};
use chainposet::systems::{conjugate, PlHomeo, SystemSpec, Variant};
use proptest::prelude::*;

fn unit_point() -> impl Strategy<Value = Rational> {
    (1i64..400).prop_flat_map(|q| (0..=q).prop_map(move |p| rat(p, q)))
}

fn ordinal_map() -> impl Strategy<Value = SystemSpec> {
    prop::sample::select(vec!["0", "1", "2", "3", "5", "w", "w+1", "w*2", "w^2", "w^w"])
        .prop_map(|l| SystemSpec::ordinal_map(l.parse::<Ordinal>().unwrap()))
}

fn any_system() -> impl Strategy<Value = SystemSpec> {
    prop_oneof![
        ordinal_map(),
        (1u32..4).prop_map(|d| SystemSpec::cantor_example(d).unwrap()),
        (1u32..4, prop::sample::select(vec![Variant::WithMax, Variant::NoMax, Variant::OpenInterval]))
            .prop_map(|(d, v)| SystemSpec::dense_blocks(d, v)),
    ]
}

/// Increasing PL homeomorphism of [0,1] through random interior breakpoints.
fn homeo() -> impl Strategy<Value = PlHomeo> {
    (1usize..4).prop_flat_map(|k| {
        let xs = prop::collection::btree_set(1i64..64, k);
        let ys = prop::collection::btree_set(1i64..64, k);
        (xs, ys, any::<bool>()).prop_map(|(xs, ys, flip)| {
            let mut pts = vec![(int(0), int(0))];
            pts.extend(xs.into_iter().zip(ys).map(|(x, y)| (rat(x, 64), rat(y, 64))));
            pts.push((int(1), int(1)));
            if flip {
                for p in &mut pts {
                    p.1 = int(1) - &p.1;
                }
            }
            PlHomeo::new(pts).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ordinal_maps_lie_below_identity_and_are_monotone(f in ordinal_map(), x in unit_point(), y in unit_point()) {
        let (fx, fy) = (f.eval(&x).unwrap(), f.eval(&y).unwrap());
        prop_assert!(fx >= int(0) && fx <= x);
        if x <= y {
            prop_assert!(fx <= fy);
        }
    }

    #[test]
    fn enclosure_contains_sampled_images(f in any_system(), n in 4usize..48, cell in 0usize..48, t in 0i64..=16) {
        let grid = Grid::for_system(&f, n);
        let c = grid.cell(cell % n);
        let x = &c.lo + c.width() * rat(t, 16);
        prop_assume!(f.domain().contains(&x));
        let fx = f.eval(&x).unwrap();
        let pieces = f.image_enclosure(&c).unwrap();
        prop_assert!(pieces.iter().any(|p| p.contains(&fx)), "f({}) = {} outside {:?}", x, fx, pieces);
        prop_assert!(pieces.windows(2).all(|w| w[0].hi < w[1].lo));
    }

    #[test]
    fn conjugation_is_exact(f in any_system(), h in homeo(), x in unit_point()) {
        prop_assume!(f.domain().is_closed());
        let g = conjugate(&f, &h).unwrap();
        let hx = h.apply(&x).unwrap();
        prop_assert_eq!(g.eval(&hx).unwrap(), h.apply(&f.eval(&x).unwrap()).unwrap());
        prop_assert_eq!(h.inverse().apply(&hx).unwrap(), x);
    }

    #[test]
    fn conjugate_enclosure_is_exact_for_monotone_maps(f in ordinal_map(), h in homeo(), n in 4usize..32, cell in 0usize..32) {
        prop_assume!(h.is_increasing());
        let g = conjugate(&f, &h).unwrap();
        let c = Grid::unit(n).cell(cell % n);
        let pieces = g.image_enclosure(&c).unwrap();
        prop_assert_eq!(pieces.len(), 1);
        prop_assert_eq!(&pieces[0].lo, &g.eval(&c.lo).unwrap());
        prop_assert_eq!(&pieces[0].hi, &g.eval(&c.hi).unwrap());
    }
}
