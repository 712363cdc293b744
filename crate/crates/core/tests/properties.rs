use isoradial::elliptic::EllipticContext;
use isoradial::forest::WilsonSampler;
use isoradial::green::{diagonal_value, green_local};
use isoradial::isograph::{PeriodicGraph, VertexRef, PRESETS};
use isoradial::laplacian::SparseLaplacian;
use isoradial::zinv::yang_baxter_residual;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn star_and_triangle_agree_up_to_the_constant(
        k in 0.01f64..0.99,
        a in 0.05f64..FRAC_PI_2 - 0.05,
        b in 0.05f64..FRAC_PI_2 - 0.05,
        split in 0.1f64..0.9,
    ) {
        let c = PI - a - b;
        prop_assume!(c > 0.05 && c < FRAC_PI_2 - 0.05);
        let t = [a, b, c];
        let outer = t.map(|x| vec![split * (PI - x), (1.0 - split) * (PI - x)]);
        let ctx = EllipticContext::new(k).unwrap();
        prop_assert!(yang_baxter_residual(&ctx, t, &outer).unwrap() < 1e-9);
    }

    #[test]
    fn green_is_symmetric_positive_and_peaks_on_the_diagonal(
        p in 0usize..4,
        k in 0.3f64..0.95,
        i in 0usize..4,
        j in 0usize..4,
        a in -4i64..5,
        b in -4i64..5,
    ) {
        let g = PeriodicGraph::preset(PRESETS[p]).unwrap();
        let ctx = EllipticContext::new(k).unwrap();
        let x = VertexRef::new(i % g.num_vertices(), a, b);
        let y = VertexRef::new(j % g.num_vertices(), 0, 0);
        prop_assume!(x != y);
        let gxy = green_local(&g, &ctx, x, y).unwrap().value;
        let gyx = green_local(&g, &ctx, y, x).unwrap().value;
        prop_assert!((gxy - gyx).abs() < 1e-12);
        prop_assert!(gxy > 0.0 && gxy < diagonal_value(&ctx));
    }

    #[test]
    fn wilson_always_returns_a_rooted_forest(seed in any::<u64>(), k in 0.05f64..0.95, p in 0usize..4) {
        let fg = PeriodicGraph::preset(PRESETS[p]).unwrap().torus(3, 4).unwrap();
        let ctx = EllipticContext::new(k).unwrap();
        let lap = SparseLaplacian::new(&ctx, &fg);
        let f = WilsonSampler::new(&lap, &fg, &ctx).sample(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(f.check(&fg).is_ok());
        prop_assert!(!f.roots().is_empty());
    }
}
