use affine_estimation::asymptotics::isotropic_params;
use affine_estimation::distribution::{argmax, moments, scan, Window};
use affine_estimation::error::Error;
use affine_estimation::grid::{make_coherent, make_displaced_squeezed, QuadratureGrid};
use affine_estimation::group::GroupElement;
use affine_estimation::povm::build_ml_seed;
use affine_estimation::two_mode::{
    concentration_profile, make_pointer, make_truncated_pointer, pointer_overlap, PointerSign,
};
use approx::assert_relative_eq;

#[test]
fn coherent_ten_concentrates_near_identity() {
    let psi = make_coherent(10.0, QuadratureGrid::covering(10.0, 0.5)).unwrap();
    let seed = build_ml_seed(&psi).unwrap();
    let map = scan(&seed, &psi, &Window::symmetric(4.0, 0.6).unwrap(), (128, 128)).unwrap();
    assert!((map.mass() - 1.0).abs() < 1e-2, "mass {}", map.mass());
    let s = moments(&map).unwrap();
    assert!(s.mean_x.abs() < 0.01 && s.mean_r.abs() < 0.01);
    assert_relative_eq!(s.delta_x, 1.0 / 2f64.sqrt(), max_relative = 0.05);
    assert_relative_eq!(s.delta_r, 1.0 / 200f64.sqrt(), max_relative = 0.05);
}

#[test]
fn vacuum_peak_is_off_the_identity() {
    let vac = make_coherent(0.0, QuadratureGrid::new(10.0, 4096).unwrap()).unwrap();
    let seed = build_ml_seed(&vac).unwrap();
    let map = scan(&seed, &vac, &Window::vacuum_default(), (96, 96)).unwrap();
    let (x, r, peak) = argmax(&map);
    assert!(x.abs() < 0.05, "x {x}");
    assert!(r > 0.4 && r < 0.7, "r {r}");
    assert!(peak > 0.0);
    // the default window holds too little mass for moments
    assert!(map.mass() < 0.9);
    assert!(matches!(moments(&map), Err(Error::InsufficientMass { .. })));
}

#[test]
fn isotropic_state_has_balanced_errors() {
    let p = isotropic_params(100.0).unwrap();
    assert_relative_eq!(p.a, (-2.0 * p.z).exp(), max_relative = 1e-10);
    assert_relative_eq!(p.split_a, (100.0f64 - 10.0).sqrt(), max_relative = 1e-12);
    assert!((p.split_a / p.a - 1.0).abs() < 0.05);

    // z = -1 on a window wide enough to hold both tails
    let (a, z) = ((2.0f64).exp(), -1.0);
    let psi = make_displaced_squeezed(a, z, QuadratureGrid::covering(a, 0.5 * (-z).exp())).unwrap();
    let seed = build_ml_seed(&psi).unwrap();
    let map = scan(&seed, &psi, &Window::symmetric(2.0, 1.5).unwrap(), (160, 160)).unwrap();
    let s = moments(&map).unwrap();
    assert!((s.delta_x / s.delta_r - 1.0).abs() < 0.1, "{} / {}", s.delta_x, s.delta_r);
}

#[test]
fn pointer_cross_overlap_is_small() {
    let plus = make_truncated_pointer(0.95, PointerSign::Plus, 60).unwrap();
    let minus = make_truncated_pointer(0.95, PointerSign::Minus, 60).unwrap();
    let o = pointer_overlap(&minus, &GroupElement::new(0.0, 0.0), &plus).unwrap();
    assert!(o.norm_sqr() <= 0.05, "{}", o.norm_sqr());
}

#[test]
fn pointer_overlap_sharpens_with_squeezing() {
    let g = GroupElement::new(0.3, 0.2);
    let values: Vec<f64> = [0.9, 0.95, 0.99]
        .iter()
        .map(|&l| {
            let p = make_truncated_pointer(l, PointerSign::Plus, 60).unwrap();
            pointer_overlap(&p, &g, &p).unwrap().norm_sqr()
        })
        .collect();
    assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
}

#[test]
fn pointer_converges_in_cutoff() {
    let g = GroupElement::new(0.2, -0.1);
    let at = |n| {
        let p = make_pointer(0.8, PointerSign::Plus, n).unwrap();
        pointer_overlap(&p, &g, &p).unwrap()
    };
    let (a, b) = (at(40), at(60));
    assert!((a - b).norm() < 1e-6, "{a} vs {b}");
}

#[test]
fn strict_pointer_rejects_heavy_tail() {
    assert!(make_pointer(0.99, PointerSign::Plus, 60).is_err());
}

#[test]
fn profile_peaks_at_origin_and_is_symmetric() {
    let prof = concentration_profile(0.9, 60, &Window::symmetric(3.0, 1.5).unwrap(), (49, 49)).unwrap();
    let map = &prof.map;
    let (nx, nr) = (map.x_nodes().len(), map.r_nodes().len());
    let (cx, cr) = (nx / 2, nr / 2);
    let peak = map.value(cx, cr);
    assert!(map.values().iter().all(|&v| v <= peak * (1.0 + 1e-9)));
    for ix in 0..nx {
        assert_relative_eq!(map.value(ix, cr), map.value(nx - 1 - ix, cr), max_relative = 1e-6, epsilon = 1e-12);
    }
}
