use proptest::prelude::*;

use masslab::autodiff::Jet;
use masslab::discretization::quadrature::{gauss_legendre, gauss_legendre_on};
use masslab::discretization::{GridDomain, Shape};
use masslab::fit::{extrapolate_inverse, richardson};
use masslab::harmonic::{assemble_system, ExcisionMode};
use masslab::identities::fd_jet;
use masslab::levelset::{extract, Lattice, LoopClass};
use masslab::mass::levels::level_rule;
use masslab::{MetricKind, MetricSpec, Point3};

fn metric() -> impl Strategy<Value = MetricKind> {
    prop_oneof![
        Just(MetricKind::Flat),
        (0.1..2.0f64, 0.5..2.0f64).prop_map(|(mass, width)| MetricKind::SmearedMass { mass, width }),
        (0.1..1.0f64, -0.3..0.3f64, 0.0..1.5f64, 0.3..1.0f64)
            .prop_map(|(mass, amplitude, center, width)| MetricKind::Bump { mass, amplitude, center, width }),
    ]
}

fn unit(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 0.2).then(|| v.map(|x| x / n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn operator_is_symmetric_with_positive_diagonal(kind in metric(), neumann in any::<bool>(), exc in prop_oneof![Just(0.0), Just(0.6)]) {
        let spec = MetricSpec::new(kind);
        let domain = GridDomain::new(Shape::Box, 1.5, 0.5, [1.0, 0.0, 0.0], exc).unwrap();
        let mode = if neumann { ExcisionMode::Neumann } else { ExcisionMode::Dirichlet };
        let a = assemble_system(&spec, domain, mode).unwrap().dense();
        let scale = a.iter().enumerate().map(|(i, r)| r[i]).fold(0.0, f64::max);
        for (i, row) in a.iter().enumerate() {
            prop_assert!(row[i] > 0.0);
            for (j, &v) in row.iter().enumerate().take(i) {
                prop_assert!((v - a[j][i]).abs() <= 1e-12 * scale, "a[{i}][{j}] = {v} vs {}", a[j][i]);
            }
        }
    }
}

proptest! {
    #[test]
    fn planar_level_in_a_box_is_one_disk(v in prop::array::uniform3(-1.0..1.0f64), s in -0.5..0.5f64) {
        let Some(a) = unit(v) else { return Ok(()) };
        let lattice = Lattice::uniform(2.0, 0.25).unwrap();
        let values: Vec<f64> = (0..lattice.len())
            .map(|n| {
                let p = lattice.point(n);
                a[0] * p[0] + a[1] * p[1] + a[2] * p[2]
            })
            .collect();
        let mesh = extract(&lattice, &values, 2.0 * s, &[]).unwrap();
        prop_assert_eq!(mesh.euler, 1);
        prop_assert_eq!(mesh.components.len(), 1);
        prop_assert_eq!(mesh.loops.len(), 1);
        prop_assert_eq!(mesh.loops[0].class, LoopClass::Lattice);
        prop_assert!(mesh.loops[0].closed);
        prop_assert!(mesh.max_edge_valence <= 2);
    }

    #[test]
    fn inverse_model_is_recovered(f in -10.0..10.0f64, c in -5.0..5.0f64, r0 in 1.0..10.0f64) {
        let r = [r0, 2.0 * r0, 4.0 * r0];
        let v: Vec<f64> = r.iter().map(|s| f + c / s).collect();
        let e = extrapolate_inverse(&r, &v).unwrap();
        prop_assert!((e.limit - f).abs() < 1e-10);
        prop_assert!((e.coefficient - c).abs() < 1e-9 * r0);
        prop_assert!(e.warning.is_none());
    }

    #[test]
    fn richardson_removes_the_leading_term(f in -5.0..5.0f64, c in -5.0..5.0f64, h in 0.01..1.0f64, p in 1.0..4.0f64) {
        let at = |h: f64| f + c * h.powf(p);
        prop_assert!((richardson(at(h), at(h / 2.0), p) - f).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1(n in 1usize..12, seed in prop::collection::vec(-1.0..1.0f64, 24)) {
        let (x, w) = gauss_legendre(n);
        let deg = 2 * n - 1;
        let coef = &seed[..=deg];
        let quad: f64 = x.iter().zip(&w).map(|(&x, &w)| w * coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)).sum();
        let exact: f64 = coef.iter().enumerate().filter(|(k, _)| k % 2 == 0).map(|(k, c)| 2.0 * c / (k as f64 + 1.0)).sum();
        prop_assert!((quad - exact).abs() < 1e-13 * (1.0 + exact.abs()), "n = {n}: {quad} vs {exact}");
    }

    #[test]
    fn mapped_rule_integrates_linears(n in 1usize..10, a in -5.0..5.0f64, len in 0.1..5.0f64, k in -3.0..3.0f64) {
        let b = a + len;
        let q: f64 = gauss_legendre_on(n, a, b).iter().map(|&(x, w)| w * (1.0 + k * x)).sum();
        let exact = len + 0.5 * k * (b * b - a * a);
        prop_assert!((q - exact).abs() < 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn level_rule_weights_cover_the_interval(lo in -5.0..0.0f64, len in 0.5..10.0f64, cuts in prop::collection::vec(-6.0..6.0f64, 0..4), levels in 2usize..40) {
        let hi = lo + len;
        let rule = level_rule(lo, hi, &cuts, levels);
        let total: f64 = rule.iter().map(|&(_, w)| w).sum();
        prop_assert!((total - len).abs() < 1e-12 * len);
        prop_assert!(rule.iter().all(|&(t, w)| t > lo && t < hi && w > 0.0));
        for &c in cuts.iter().filter(|&&c| c > lo && c < hi) {
            prop_assert!(rule.iter().all(|&(t, _)| t != c));
        }
    }

    #[test]
    fn jet_arithmetic_matches_finite_differences(p in prop::array::uniform3(-1.0..1.0f64), a in 0.2..2.0f64) {
        let jet_f = |q: [f64; 3]| {
            let [x, y, z] = Jet::coords(q);
            (x * y + 1.0) * (-(z.square() * a)).exp() / (x.square() + 1.0).sqrt() + (y * 0.5).erf()
        };
        let plain = |q: Point3| -> masslab::Result<f64> { Ok(jet_f(q.to_array()).v) };
        let exact = jet_f(p);
        let fd = fd_jet(&plain, Point3::from(p), 1e-3).unwrap();
        prop_assert!((exact.v - fd.v).abs() < 1e-14);
        for i in 0..3 {
            prop_assert!((exact.d[i] - fd.d[i]).abs() < 1e-5, "d{i}: {} vs {}", exact.d[i], fd.d[i]);
            for j in 0..3 {
                prop_assert!((exact.h[i][j] - fd.h[i][j]).abs() < 1e-4, "h{i}{j}: {} vs {}", exact.h[i][j], fd.h[i][j]);
                prop_assert_eq!(exact.h[i][j], exact.h[j][i]);
            }
        }
    }
}
