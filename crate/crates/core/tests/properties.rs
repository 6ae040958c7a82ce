use proptest::prelude::*;

use infmul::partitions::{enumerate_nc, enumerate_ncl, linked_class};
use infmul::{
    convolve_by_transform, cumulants_from_moments, law_from_transform, moments_from_cumulants,
    t_coeffs, transform, verify, DualScalar, DualSeries, InfLaw, LinkedPartition, ProductKind,
    SetPartition, TransformKind,
};

fn dual_series(order: usize) -> impl Strategy<Value = DualSeries> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), order + 1).prop_map(|c| {
        let (b, e): (Vec<f64>, Vec<f64>) = c.into_iter().unzip();
        DualSeries::from_real(&b, &e)
    })
}

fn unit_series(order: usize) -> impl Strategy<Value = DualSeries> {
    (dual_series(order), 1.0f64..2.0).prop_map(|(mut f, a)| {
        let e = f.coeff(0).eps;
        f.set_coeff(0, DualScalar::new(a.into(), e));
        f
    })
}

fn tangent_series(order: usize) -> impl Strategy<Value = DualSeries> {
    (dual_series(order), 1.0f64..2.0).prop_map(|(mut f, a)| {
        let e = f.coeff(1).eps;
        f.set_coeff(0, DualScalar::ZERO);
        f.set_coeff(1, DualScalar::new(a.into(), e));
        f
    })
}

fn law(k: usize) -> impl Strategy<Value = InfLaw> {
    (
        1.0f64..2.0,
        prop::collection::vec(-1.0f64..1.0, k - 1),
        prop::collection::vec(-1.0f64..1.0, k),
    )
        .prop_map(|(m1, rest, mp)| {
            let mut m = vec![m1];
            m.extend(rest);
            InfLaw::from_real(&m, &mp).unwrap()
        })
}

fn dev(a: &DualSeries, b: &DualSeries) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (*x - *y).max_norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(f in dual_series(8), g in dual_series(8), h in dual_series(8)) {
        prop_assert!(dev(&f.mul(&g), &g.mul(&f)) < 1e-12);
        prop_assert!(dev(&f.mul(&g).mul(&h), &f.mul(&g.mul(&h))) < 1e-12);
        prop_assert!(dev(&f.mul(&g.add(&h)), &f.mul(&g).add(&f.mul(&h))) < 1e-12);
        prop_assert!(dev(&f.sub(&f), &DualSeries::zero(8)) == 0.0);
    }

    #[test]
    fn eps_split_is_a_ring_map(f in dual_series(6), g in dual_series(6)) {
        let (fb, fe) = f.eps_split();
        let (gb, ge) = g.eps_split();
        let (pb, pe) = f.mul(&g).eps_split();
        prop_assert!(pb.max_abs_diff(&fb.mul(&gb)) < 1e-12);
        prop_assert!(pe.max_abs_diff(&fb.mul(&ge).add(&fe.mul(&gb))) < 1e-12);
        prop_assert_eq!(DualSeries::from_parts(&fb, &fe), f);
    }

    #[test]
    fn inverse_and_reversion_are_involutions(f in unit_series(8), g in tangent_series(8)) {
        prop_assert!(dev(&f.inv().unwrap().inv().unwrap(), &f) < 1e-10);
        prop_assert!(dev(&g.reversion().unwrap().reversion().unwrap(), &g) < 1e-10);
        let z = DualSeries::identity(8);
        prop_assert!(dev(&g.compose(&g.reversion().unwrap()).unwrap(), &z) < 1e-10);
    }

    #[test]
    fn transforms_invert(l in law(8)) {
        for kind in TransformKind::ALL {
            let back = law_from_transform(kind, &transform(kind, &l).unwrap()).unwrap();
            let (db, de) = back.deviation(&l);
            prop_assert!(db < 1e-10 && de < 1e-10, "{} {:e} {:e}", kind, db, de);
        }
    }

    #[test]
    fn cumulants_invert(l in law(8)) {
        let back = moments_from_cumulants(&cumulants_from_moments(&l));
        let (db, de) = back.deviation(&l);
        prop_assert!(db < 1e-10 && de < 1e-10);
    }

    #[test]
    fn t_coefficients_scale(l in law(7), cb in 0.5f64..2.0, ce in -1.0f64..1.0) {
        let c = DualScalar::real(cb, ce);
        let lhs = t_coeffs(&l.scale(c)).unwrap();
        let rhs = t_coeffs(&l).unwrap().scale(c);
        let (db, de) = lhs.deviation(&rhs);
        prop_assert!(db < 1e-8 && de < 1e-8, "{:e} {:e}", db, de);
    }

    #[test]
    fn free_product_commutes(x in law(5), y in law(5)) {
        let xy = convolve_by_transform(ProductKind::Free, &x, &y, 5).unwrap();
        let yx = convolve_by_transform(ProductKind::Free, &y, &x, 5).unwrap();
        let (db, de) = xy.deviation(&yx);
        prop_assert!(db < 1e-10 && de < 1e-10);
    }

    #[test]
    fn oracles_agree_with_transforms(x in law(5), y in law(5)) {
        for kind in ProductKind::ALL {
            prop_assert!(verify(kind, &x, &y, 5).unwrap().pass, "{}", kind);
        }
    }
}

#[test]
fn partitions_are_valid_and_roundtrip_through_text() {
    for n in 1..=6 {
        for p in enumerate_ncl(n).unwrap() {
            let again = LinkedPartition::new(n, p.blocks().to_vec()).unwrap();
            assert_eq!(again, p);
            let text = p.to_string();
            assert_eq!(text.parse::<LinkedPartition>().unwrap(), p, "{text}");
            assert!(p.connected_classes().is_noncrossing());
        }
        for p in enumerate_nc(n).unwrap() {
            assert!(p.is_noncrossing());
            assert_eq!(p.to_string().parse::<SetPartition>().unwrap(), p);
        }
    }
}

#[test]
fn linked_classes_partition_ncl() {
    for n in 1..=7 {
        let total: usize = enumerate_nc(n)
            .unwrap()
            .iter()
            .map(|s| linked_class(s).unwrap().len())
            .sum();
        assert_eq!(total, enumerate_ncl(n).unwrap().len(), "n = {n}");
    }
}
