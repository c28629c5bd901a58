use bopo_core::kernel::*;
use proptest::prelude::*;

fn params(a: f64) -> KernelParams {
    KernelParams::new(a, 1.0).unwrap()
}

proptest! {
    #[test]
    fn decreasing_and_bounded(a in 0.05f64..20.0, lr in -6.0f64..3.0, dl in 1e-3f64..0.5) {
        let p = params(a);
        let r = a * 10f64.powf(lr);
        let r2 = r * 10f64.powf(dl);
        let (k, k2) = (eval_k(r, &p), eval_k(r2, &p));
        prop_assert!(k > 0.0 && k <= 1.0 / a);
        prop_assert!(k2 < k, "K({r2}) = {k2} not below K({r}) = {k}");
    }

    #[test]
    fn coulomb_minus_yukawa(a in 0.05f64..20.0, lr in -6.0f64..3.0) {
        let p = params(a);
        let r = a * 10f64.powf(lr);
        prop_assert!(identity_defect(r, &p) <= 1e-14);
        let c = eval_c(r).unwrap();
        let y = eval_y(r, &p).unwrap();
        let k = eval_k(r, &p);
        prop_assert!(((c - y) - k).abs() <= 1e-14 * c);
    }

    #[test]
    fn coulomb_limit_is_monotone(lr in -3.0f64..3.0) {
        let r = 10f64.powf(lr);
        let c = eval_c(r).unwrap();
        let mut prev = 0.0;
        for a in [1.0, 0.5, 0.1, 0.01] {
            let k = eval_k(r, &params(a));
            prop_assert!(k >= prev && k <= c);
            prev = k;
        }
    }
}

#[test]
fn coulomb_limit_converges() {
    for r in [0.5, 1.0, 3.0] {
        let k = eval_k(r, &params(0.01));
        assert!((k * r - 1.0).abs() < 1e-12, "r = {r}");
    }
}

#[test]
fn central_differences_are_second_order() {
    let p = params(0.8);
    for r in [0.05, 0.7, 2.0, 9.0] {
        let err = |h: f64| {
            let fd = (eval_k(r + h, &p) - eval_k(r - h, &p)) / (2.0 * h);
            let lap = (eval_k(r + h, &p) - 2.0 * eval_k(r, &p) + eval_k(r - h, &p)) / (h * h) + 2.0 * fd / r;
            (
                (fd - eval_grad_k_radial(r, &p).unwrap()).abs(),
                (lap - eval_lap_k(r, &p).unwrap()).abs(),
            )
        };
        let h = 0.02 * r;
        let (g1, l1) = err(h);
        let (g2, l2) = err(h / 2.0);
        assert!((3.5..4.5).contains(&(g1 / g2)), "∂K at r = {r}: ratio {}", g1 / g2);
        assert!((3.5..4.5).contains(&(l1 / l2)), "ΔK at r = {r}: ratio {}", l1 / l2);
    }
}

#[test]
fn convolution_identity_at_twenty_radii() {
    let p = params(0.7);
    let radii: Vec<f64> = (0..20).map(|i| 0.7 * 10f64.powf(-3.0 + 5.0 * i as f64 / 19.0)).collect();
    assert!(verify_cy_convolution(&p, &radii).unwrap() <= 1e-8);
}

#[test]
fn sample_is_consistent() {
    let p = params(2.0);
    let s = sample(1.5, &p);
    assert_eq!(s.k, eval_k(1.5, &p));
    assert_eq!(s.dk, eval_grad_k_radial(1.5, &p).unwrap());
    assert!((s.c - s.y - s.k).abs() < 1e-15);
}

#[test]
fn rejects_bad_lengths() {
    assert!(KernelParams::new(0.0, 1.0).is_err());
    assert!(KernelParams::new(f64::NAN, 1.0).is_err());
    assert!(eval_c(0.0).is_err());
}
