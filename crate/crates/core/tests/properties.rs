use std::f64::consts::PI;

use curvecur::crossings::intersection_number;
use curvecur::hyperbolic::{linked, Axis, HolonomyRep, IdealPoint};
use curvecur::words::{SurfacePresentation, Word};
use proptest::prelude::*;

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::sample::select(b"abAB".to_vec()), 1..=max)
        .prop_map(|v| Word::from_letters(v).free_reduce())
}

fn hyperbolic_word(max: usize) -> impl Strategy<Value = Word> {
    word(max).prop_filter("hyperbolic", |w| {
        let rep = HolonomyRep::builtin_pt();
        !w.is_empty() && rep.holonomy(w).map(|m| m.is_hyperbolic()).unwrap_or(false)
    })
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-7 * (1.0 + x.abs().max(y.abs()))
}

fn axis_from(angles: (f64, f64)) -> Option<Axis> {
    Axis::new(IdealPoint::from_angle(angles.0), IdealPoint::from_angle(angles.1)).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn length_is_a_class_function(w in hyperbolic_word(8), h in word(4)) {
        let rep = HolonomyRep::builtin_pt();
        let a = rep.length(&w).unwrap();
        let b = rep.length(&w.conjugate_by(&h).free_reduce()).unwrap();
        prop_assert!(close(a, b), "{a} vs {b}");
        let c = rep.length(&w.inverse()).unwrap();
        prop_assert!(close(a, c));
    }

    #[test]
    fn axes_are_equivariant(w in hyperbolic_word(6), h in word(3)) {
        let rep = HolonomyRep::builtin_pt();
        let moved = rep.axis(&w.conjugate_by(&h).free_reduce()).unwrap();
        let image = rep.axis(&w).unwrap().image(&rep.holonomy(&h).unwrap());
        prop_assert!(moved.attracting.circle_distance(&image.attracting) < 1e-7);
        prop_assert!(moved.repelling.circle_distance(&image.repelling) < 1e-7);
    }

    #[test]
    fn linking_is_symmetric_and_invariant(
        p in (-PI..PI, -PI..PI),
        q in (-PI..PI, -PI..PI),
        h in word(3),
    ) {
        let (Some(p), Some(q)) = (axis_from(p), axis_from(q)) else { return Ok(()) };
        let Ok(pq) = linked(&p, &q) else { return Ok(()) };
        prop_assert_eq!(linked(&q, &p).unwrap(), pq);
        prop_assert_eq!(linked(&p.reversed(), &q).unwrap(), pq);
        let m = HolonomyRep::builtin_pt().holonomy(&h).unwrap();
        if let Ok(moved) = linked(&p.image(&m), &q.image(&m)) {
            prop_assert_eq!(moved, pq);
        }
    }

    #[test]
    fn canonical_form_ignores_rotation(w in word(10), k in 0usize..10) {
        let pt = SurfacePresentation::builtin("pt").unwrap();
        let core = w.cyclic_reduce().1;
        prop_assume!(!core.is_empty());
        let a = pt.canonical_form(&core).unwrap();
        let b = pt.canonical_form(&core.rotate(k % core.len())).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn intersection_is_symmetric(u in hyperbolic_word(5), v in hyperbolic_word(5)) {
        let pt = SurfacePresentation::builtin("pt").unwrap();
        let rep = HolonomyRep::builtin_pt();
        let c = pt.canonical_form(&u.cyclic_reduce().1).unwrap();
        let d = pt.canonical_form(&v.cyclic_reduce().1).unwrap();
        let cd = intersection_number(&c, &d, &rep, 5).unwrap();
        let dc = intersection_number(&d, &c, &rep, 5).unwrap();
        prop_assert_eq!(cd, dc, "{} {}", u, v);
    }
}
