use dendrite_core::examples::random_system;
use dendrite_core::limits::{omega_limit, LimitParams};
use dendrite_core::orbit::Dynamics;
use dendrite_core::{PLSelfMap, Rational, Region, TreePoint};
use proptest::prelude::*;

const CAP: usize = 20_000;

fn system() -> impl Strategy<Value = PLSelfMap> {
    (any::<u64>(), 2usize..7, 1usize..5).prop_map(|(s, n, b)| random_system(s, n, b).unwrap())
}

fn point_on(f: &PLSelfMap, e: usize, num: i64, den: i64) -> TreePoint {
    let tree = f.tree();
    TreePoint::on_edge(tree, e % tree.num_edges(), Rational::new(num % (den + 1), den))
}

fn sample() -> impl Strategy<Value = (usize, i64, i64)> {
    (0usize..16, 0i64..64, 1i64..64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn powers_agree_with_iteration(f in system(), p in sample(), m in 1usize..4) {
        let x = point_on(&f, p.0, p.1, p.2);
        match f.power_with_cap(m, CAP) {
            Ok(g) => prop_assert_eq!(g.apply(&x), f.iterate(&x, m)),
            Err(e) => prop_assert!(e.is_resource()),
        }
    }

    #[test]
    fn metric_axioms(f in system(), a in sample(), b in sample(), c in sample()) {
        let t = f.tree();
        let (x, y, z) = (point_on(&f, a.0, a.1, a.2), point_on(&f, b.0, b.1, b.2), point_on(&f, c.0, c.1, c.2));
        prop_assert_eq!(t.distance(&x, &y), t.distance(&y, &x));
        prop_assert!(t.distance(&x, &z) <= t.distance(&x, &y) + t.distance(&y, &z));
        prop_assert_eq!(t.distance(&x, &x).is_zero(), true);
        prop_assert_eq!(t.distance(&x, &y).is_zero(), x == y);
    }

    #[test]
    fn image_contains_images(f in system(), p in sample()) {
        let t = f.tree();
        let x = point_on(&f, p.0, p.1, p.2);
        prop_assert!(f.image(&Region::whole(t)).contains(&f.apply(&x)));
        let ball = t.ball(&x, &Rational::new(1, 5)).unwrap();
        prop_assert!(f.image(&ball).contains(&f.apply(&x)));
    }

    #[test]
    fn cycle_points_are_fixed_by_the_period(f in system(), p in sample()) {
        let x = point_on(&f, p.0, p.1, p.2);
        let mut dy = Dynamics::new(&f);
        let id = dy.intern(&x);
        if let Some(c) = dy.cycle_info(id, 2000) {
            if c.period <= 4 {
                let yid = dy.step(id, c.preperiod);
                let y = dy.point(yid).clone();
                if let Ok(fix) = f.fixed_points_with_cap(c.period, CAP) {
                    prop_assert!(fix.contains(&y), "{:?} of period {} missing", y, c.period);
                }
            }
        }
    }

    #[test]
    fn eventual_image_is_invariant(f in system()) {
        let e = f.eventual_image(4096).unwrap();
        if e.stabilized {
            prop_assert_eq!(f.image(&e.j), e.j.clone());
        }
    }

    #[test]
    fn periodic_omega_is_its_cycle(f in system(), p in sample()) {
        let x = point_on(&f, p.0, p.1, p.2);
        let mut dy = Dynamics::new(&f);
        let id = dy.intern(&x);
        if let Some(c) = dy.cycle_info(id, 400) {
            let params = LimitParams::default();
            let om = omega_limit(&f, &x, &params).unwrap();
            prop_assert_eq!(om.points.len(), c.period);
            for q in &om.points {
                prop_assert!(om.points.contains(&f.apply(q)));
            }
        }
    }
}
