mod common;

use lwroots::{enumerate, solve_all, solve_oracle, Complex64};

#[test]
fn three_term_family_in_closed_form() {
    let buffer = solve_all(3, 1).unwrap();
    for (i, p) in enumerate(3).unwrap().enumerate() {
        let a = p.coefficients();
        let exact = common::quadratic_roots(a[0], a[1], a[2]);
        let got = buffer.polynomial(i as u64);
        assert!(common::bottleneck_distance(got, &exact) < 1e-12, "{p}");
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    for target in [golden, -golden, 1.0 / golden, -1.0 / golden] {
        assert!(buffer.roots().iter().any(|z| (z - target).norm() < 1e-12));
    }
    for k in [1, 2, 4, 5] {
        let w = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 3.0);
        assert!(buffer.roots().iter().any(|z| (z - w).norm() < 1e-12), "e^(i pi {k}/3)");
    }
}

#[test]
fn larger_families_are_polished_and_in_the_annulus() {
    for n in [15, 16] {
        let buffer = solve_all(n, 4).unwrap();
        assert_eq!(buffer.len(), (n as usize - 1) << (n - 1));
        for (i, p) in enumerate(n).unwrap().enumerate() {
            let coeffs = p.coefficients();
            for z in buffer.polynomial(i as u64) {
                assert!(z.norm() > 0.5 && z.norm() < 2.0, "{p}: |{z}|");
                let value: Complex64 = coeffs.iter().enumerate().map(|(k, &a)| z.powu(k as u32) * a).sum();
                assert!(value.norm() <= 1e-9, "{p}: residual {}", value.norm());
            }
        }
    }
}

#[test]
fn stored_roots_match_the_oracle_at_twelve_terms() {
    let buffer = solve_all(12, 2).unwrap();
    for (i, p) in enumerate(12).unwrap().enumerate().step_by(7) {
        let oracle = solve_oracle(p).unwrap().roots;
        assert!(common::bottleneck_distance(buffer.polynomial(i as u64), &oracle) <= 1e-8, "{p}");
    }
}

#[test]
fn symmetric_sets_at_twelve_terms() {
    let buffer = solve_all(12, 2).unwrap();
    let roots = buffer.roots();
    let conj: Vec<_> = roots.iter().map(|z| z.conj()).collect();
    let inv: Vec<_> = roots.iter().map(|z| z.inv()).collect();
    assert!(common::hausdorff(roots, &conj) == 0.0);
    assert!(common::hausdorff(roots, &inv) <= 1e-9);
}
