use hdgr::hdc::{bind, bundle, cosine, normalize, similarity, BaseStyle, HvSpace, Hypervector, ProjectionMap};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

const D: usize = 10_000;

fn hv(v: &[f64]) -> Hypervector {
    Hypervector::from_vec(v.to_vec())
}

fn count_seeds(pred: impl Fn(u64) -> bool) -> usize {
    (0..100).filter(|&s| pred(s)).count()
}

#[test]
fn bundle_and_bind_examples() {
    let a = hv(&[1.0, -1.0, 1.0, 1.0]);
    assert_eq!(bundle([&a]).unwrap(), a);
    assert_eq!(bundle([&a, &hv(&[1.0, 1.0, -1.0, 1.0])]).unwrap(), hv(&[2.0, 0.0, 0.0, 2.0]));
    assert_eq!(bind(&hv(&[1.0, -1.0]), &hv(&[1.0, 1.0])).unwrap(), hv(&[1.0, -1.0]));
    assert!(bind(&hv(&[1.0]), &hv(&[1.0, 1.0])).is_err());
}

#[test]
fn bundle_stays_similar_to_each_constituent() {
    let ok = count_seeds(|s| {
        let space = HvSpace::new(D, s).unwrap();
        let parts: Vec<_> = (0..3).map(|i| space.base_hv(&format!("x{i}"))).collect();
        let b = bundle(&parts).unwrap();
        parts.iter().all(|p| (0.9..=1.1).contains(&similarity(&b, p).unwrap()))
    });
    assert!(ok >= 99, "{ok}/100");
}

#[test]
fn bind_is_quasi_orthogonal_to_its_factors() {
    let ok = count_seeds(|s| {
        let space = HvSpace::new(D, s).unwrap();
        let (a, b) = (space.base_hv("a"), space.base_hv("b"));
        let ab = bind(&a, &b).unwrap();
        similarity(&ab, &a).unwrap().abs() < 0.05 && similarity(&ab, &b).unwrap().abs() < 0.05
    });
    assert!(ok >= 99, "{ok}/100");
}

#[test]
fn independent_and_permuted_vectors_are_quasi_orthogonal() {
    let ok = count_seeds(|s| {
        let space = HvSpace::new(D, s).unwrap();
        let other = HvSpace::new(D, s + 1000).unwrap();
        let h = space.base_hv("L:1");
        similarity(&h, &space.base_hv("L:2")).unwrap().abs() < 0.05
            && similarity(&h, &other.base_hv("L:1")).unwrap().abs() < 0.05
            && similarity(&space.permute(&h, 1).unwrap(), &h).unwrap().abs() < 0.05
    });
    assert!(ok >= 99, "{ok}/100");
}

#[test]
fn exact_bipolar_identities() {
    for s in 0..100 {
        let space = HvSpace::new(D, s).unwrap();
        let (v, a, b) = (space.base_hv("v"), space.base_hv("a"), space.base_hv("b"));
        assert_eq!(bind(&v, &v).unwrap(), Hypervector::ones(D));
        assert_eq!(bind(&bind(&a, &v).unwrap(), &v).unwrap(), a);
        assert_eq!(
            similarity(&bind(&v, &a).unwrap(), &bind(&v, &b).unwrap()).unwrap(),
            similarity(&a, &b).unwrap()
        );
        assert_eq!(similarity(&v, &v).unwrap(), 1.0);
        assert_eq!(similarity(&v, &v.negated()).unwrap(), -1.0);
        for p in [1, 3, -2] {
            assert_eq!(space.permute(&space.permute(&a, p).unwrap(), -p).unwrap(), a);
        }
        assert_eq!(space.permute(&a, 0).unwrap(), a);
    }
}

#[test]
fn base_vectors_are_deterministic_and_styled() {
    let s = HvSpace::new(256, 7).unwrap();
    assert_eq!(s.base_hv("L:1"), HvSpace::new(256, 7).unwrap().base_hv("L:1"));
    assert!(s.base_hv("L:1").as_slice().iter().all(|v| v.abs() == 1.0));
    let g = HvSpace::with_style(256, 7, BaseStyle::Gaussian).unwrap();
    assert!(g.base_hv("L:1").as_slice().iter().any(|v| v.abs() != 1.0));
    assert!(HvSpace::new(1, 0).is_err());
}

#[test]
fn projection_preserves_cosine() {
    let pm = ProjectionMap::phi(D, 16, 3).unwrap();
    let mut rng = hdgr::hdc::substream(99, "pairs");
    let mut ok = 0;
    for _ in 0..100 {
        let x: Vec<f64> = (0..16).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..16).map(|_| rng.sample(StandardNormal)).collect();
        let (px, py) = (pm.project(&x).unwrap(), pm.project(&y).unwrap());
        if (cosine(px.as_slice(), py.as_slice()) - cosine(&x, &y)).abs() <= 0.05 {
            ok += 1;
        }
    }
    assert!(ok >= 95, "{ok}/100");
}

#[test]
fn projection_entries_have_variance_one_over_m() {
    let pm = ProjectionMap::phi(4000, 16, 1).unwrap();
    let m = pm.matrix();
    let n = m.len() as f64;
    let mean = m.sum() / n;
    let var = m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 0.005);
    assert!((var - 1.0 / 16.0).abs() < 0.002, "{var}");
}

fn vecs(len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    let c = || proptest::collection::vec(-10.0f64..10.0, len);
    (c(), c(), c())
}

proptest! {
    #[test]
    fn bind_distributes_over_bundle((a, b, c) in vecs(32)) {
        let (a, b, c) = (hv(&a), hv(&b), hv(&c));
        let lhs = bind(&bundle([&a, &b]).unwrap(), &c).unwrap();
        let rhs = bundle([&bind(&a, &c).unwrap(), &bind(&b, &c).unwrap()]).unwrap();
        for (x, y) in lhs.as_slice().iter().zip(rhs.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn similarity_is_symmetric_and_bilinear((a, b, c) in vecs(24), k in -5.0f64..5.0) {
        let (a, b, c) = (hv(&a), hv(&b), hv(&c));
        prop_assert_eq!(similarity(&a, &b).unwrap(), similarity(&b, &a).unwrap());
        let lhs = similarity(&bundle([&a.scaled(k), &c]).unwrap(), &b).unwrap();
        let rhs = k * similarity(&a, &b).unwrap() + similarity(&c, &b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn permutation_is_a_bijection((a, _, _) in vecs(64), p in -4i64..4, q in -4i64..4) {
        let space = HvSpace::new(64, 11).unwrap();
        let h = hv(&a);
        let once = space.permute(&h, p + q).unwrap();
        let twice = space.permute(&space.permute(&h, p).unwrap(), q).unwrap();
        prop_assert_eq!(&once, &twice);
        let mut x = once.into_vec();
        let mut y = a.clone();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        prop_assert_eq!(x, y);
    }

    #[test]
    fn normalize_is_idempotent((a, _, _) in vecs(16)) {
        let once = normalize(&hv(&a));
        let twice = normalize(&once);
        for (x, y) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_is_linear(x in proptest::collection::vec(-3.0f64..3.0, 8)) {
        let pm = ProjectionMap::phi(128, 8, 5).unwrap();
        let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let a = pm.project(&doubled).unwrap();
        let b = pm.project(&x).unwrap().scaled(2.0);
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
        }
        prop_assert!(pm.project(&[0.0; 8]).unwrap().is_zero());
    }
}
