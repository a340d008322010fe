use proptest::prelude::*;

use cc_delaunay::curvature::{
    mean_curvature_general, mean_curvature_graph_h1, mean_curvature_rotational, second_fundamental_form, GraphJet,
    ImmersionJet, ProfileJet,
};

fn graph_jet() -> impl Strategy<Value = (f64, f64, GraphJet)> {
    (prop::array::uniform2(-2.0..2.0f64), prop::array::uniform6(-2.0..2.0f64)).prop_map(|([x, y], c)| {
        (
            x,
            y,
            GraphJet {
                f: c[0],
                fx: c[1],
                fy: c[2],
                fxx: c[3],
                fxy: c[4],
                fyy: c[5],
            },
        )
    })
}

fn profile_jet() -> impl Strategy<Value = ProfileJet> {
    (0.1..3.0f64, -2.0..2.0f64, 0.0..std::f64::consts::TAU, 0.2..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(
        |(x, t, angle, speed, ddx, ddt)| ProfileJet {
            x,
            t,
            dx: speed * angle.sin(),
            dt: speed * angle.cos(),
            ddx,
            ddt,
        },
    )
}

fn unit_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 2 * n)
        .prop_filter("nonzero", |v| v.iter().map(|a| a * a).sum::<f64>() > 1e-2)
        .prop_map(|v| {
            let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.into_iter().map(|a| a / len).collect()
        })
}

proptest! {
    #[test]
    fn graph_formula_matches_general_pipeline((x, y, g) in graph_jet()) {
        let p = g.fx - y;
        let q = g.fy + x;
        prop_assume!(p.hypot(q) > 1e-3);
        let a = mean_curvature_graph_h1(&g, x, y).unwrap();
        let b = mean_curvature_general(&ImmersionJet::graph_h1(x, y, &g)).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn flipping_the_normal_flips_h((x, y, g) in graph_jet()) {
        prop_assume!((g.fx - y).hypot(g.fy + x) > 1e-3);
        let jet = ImmersionJet::graph_h1(x, y, &g);
        let a = mean_curvature_general(&jet).unwrap();
        let b = mean_curvature_general(&jet.with_normal_flipped()).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn second_fundamental_form_is_symmetric((x, y, g) in graph_jet()) {
        let ii = second_fundamental_form(&ImmersionJet::graph_h1(x, y, &g)).unwrap();
        prop_assert!((&ii - ii.transpose()).amax() < 1e-12);
    }

    #[test]
    fn rotational_formula_matches_general_pipeline(
        (n, omega) in (1..4usize).prop_flat_map(|n| (Just(n), unit_vector(n))),
        p in profile_jet(),
    ) {
        let a = mean_curvature_rotational(&p, n).unwrap();
        let jet = ImmersionJet::rotational(&p, &omega).unwrap();
        let b = mean_curvature_general(&jet).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} vs {}", a, b);
        let ii = second_fundamental_form(&jet).unwrap();
        prop_assert!((&ii - ii.transpose()).amax() < 1e-10);
    }

    #[test]
    fn rotational_h_is_parametrization_invariant(p in profile_jet(), n in 1..4usize, lambda in 0.2..5.0f64, mu in -3.0..3.0f64) {
        // u = phi(v) with phi' = lambda, phi'' = mu.
        let q = ProfileJet {
            dx: lambda * p.dx,
            dt: lambda * p.dt,
            ddx: lambda * lambda * p.ddx + mu * p.dx,
            ddt: lambda * lambda * p.ddt + mu * p.dt,
            ..p
        };
        let a = mean_curvature_rotational(&p, n).unwrap();
        let b = mean_curvature_rotational(&q, n).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn reversing_the_profile_flips_h(p in profile_jet(), n in 1..4usize) {
        let q = ProfileJet { dx: -p.dx, dt: -p.dt, ..p };
        let a = mean_curvature_rotational(&p, n).unwrap();
        let b = mean_curvature_rotational(&q, n).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}
