//! Property-based checks of the library invariants.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mimo_fas::beamforming::{rate, waterfill, WaterfillParams};
use mimo_fas::campaign::{
    ArrayKind, CampaignConfig, DmtParams, Experiment, ScenarioConfig, Variant, SCHEMA_VERSION,
};
use mimo_fas::channel::{draw_gaussian_matrix_with, ChannelModel};
use mimo_fas::correlation::{build_correlation_matrix, eigendecompose};
use mimo_fas::coupling::{coupling_from_impedance, impedance_matrix, s_to_z, z_to_s, DipoleSpec};
use mimo_fas::geometry::{IsotropicKernel2d, IsotropicKernel3d, PortCoords, SurfaceGeometry};
use mimo_fas::linalg::{singular_values, CMatrix};
use mimo_fas::metrics::{dmt_eval, dmt_subset_selection, Coupling, Strategy as Selection};
use mimo_fas::reduction::{reconstruct_correlation, reduce_correlation, DEFAULT_REDUCTION_TOL};
use mimo_fas::selection::{
    qr_mimo_fas_select, random_select_with, rrqr_select_columns, submatrix, SwapCriterion,
};

fn gaussian(seed: u64, rows: usize, cols: usize) -> CMatrix {
    draw_gaussian_matrix_with(&mut ChaCha8Rng::seed_from_u64(seed), rows, cols)
}

fn geometry() -> impl Strategy<Value = SurfaceGeometry> {
    (1usize..=7, 1usize..=7, 0.0f64..3.0, 0.0f64..3.0)
        .prop_map(|(n1, n2, w1, w2)| SurfaceGeometry::new(n1, n2, w1, w2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_mapping_is_a_bijection(g in geometry()) {
        for l in 0..g.port_count() {
            let c = g.unmap_index(l).unwrap();
            prop_assert_eq!(g.map_index(c).unwrap(), l);
        }
        prop_assert!(g.map_index(PortCoords::new(g.n1, 0)).is_err());
    }

    #[test]
    fn correlation_is_symmetric_psd_with_unit_diagonal(g in geometry(), planar in any::<bool>()) {
        let j = if planar {
            build_correlation_matrix(&g, &IsotropicKernel2d)
        } else {
            build_correlation_matrix(&g, &IsotropicKernel3d)
        }
        .into_inner();
        let n = j.nrows();
        prop_assert!((j.trace() - n as f64).abs() <= 1e-8);
        prop_assert!((&j - j.transpose()).amax() == 0.0);
        let e = eigendecompose(&j).unwrap();
        prop_assert!(e.values.iter().all(|&v| v >= -1e-9 * n as f64));
        prop_assert!((e.reconstruct() - &j).norm() <= 1e-9 * n as f64);
    }

    #[test]
    fn reduction_round_trips(g in geometry()) {
        let j = build_correlation_matrix(&g, &IsotropicKernel3d).into_inner();
        let red = reduce_correlation(&j, DEFAULT_REDUCTION_TOL).unwrap();
        prop_assert_eq!(red.retained.len() + red.removed.len(), j.nrows());
        let back = reconstruct_correlation(&red.reduced, &red.certificates, &red.removed).unwrap();
        prop_assert!((back - &j).norm() <= 1e-6 * j.nrows() as f64);
    }

    #[test]
    fn synthesis_is_linear_in_path_loss(g in geometry(), seed in any::<u64>(), delta in 0.1f64..5.0) {
        let e = eigendecompose(build_correlation_matrix(&g, &IsotropicKernel3d).matrix()).unwrap();
        let a = ChannelModel::new(e.clone(), e.clone(), 1.0).unwrap();
        let b = ChannelModel::new(e.clone(), e, delta).unwrap();
        let (r, c) = a.seed_shape();
        let seed_matrix = gaussian(seed, r, c);
        let ha = a.synthesize(&seed_matrix).unwrap();
        let hb = b.synthesize(&seed_matrix).unwrap();
        prop_assert!((hb - ha * Complex64::new(delta, 0.0)).norm() <= 1e-9 * (1.0 + delta));
    }

    #[test]
    fn selected_singular_values_interlace(seed in any::<u64>(), nr in 1usize..=8, nt in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = draw_gaussian_matrix_with(&mut rng, nr, nt);
        let sel = random_select_with(&mut rng, nt, nr, 1 + nt / 2, 1 + nr / 2).unwrap();
        let full = singular_values(&h);
        let sub = singular_values(&submatrix(&h, &sel).unwrap());
        for (s, f) in sub.iter().zip(&full) {
            prop_assert!(*s <= f * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn accepted_swaps_grow_block_volume(seed in any::<u64>(), cols in 2usize..=8, rows in 1usize..=8, n in 1usize..=7) {
        let rows = rows.min(cols);
        let n = n.min(cols - 1).min(rows);
        let m = gaussian(seed, rows, cols);
        let out = rrqr_select_columns(&m, n, SwapCriterion::DetRatio, None).unwrap();
        prop_assert!(!out.truncated);
        prop_assert_eq!(out.columns.len(), n);
        let volume = |set: &[usize]| -> f64 {
            singular_values(&m.select_columns(set)).iter().product()
        };
        for w in out.history.windows(2) {
            prop_assert!(volume(&w[1]) > volume(&w[0]));
        }
    }

    #[test]
    fn two_stage_selection_respects_counts(seed in any::<u64>(), nr in 1usize..=9, nt in 1usize..=9) {
        let h = gaussian(seed, nr, nt);
        let (n_rx, n_tx) = (1 + (nr - 1) / 2, 1 + (nt - 1) / 2);
        let sel = qr_mimo_fas_select(&h, n_tx, n_rx, SwapCriterion::DetRatio).unwrap();
        prop_assert_eq!(sel.rx_ports.len(), n_rx);
        prop_assert_eq!(sel.tx_ports.len(), n_tx);
        prop_assert!(sel.rx_ports.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn waterfilling_meets_kkt(gains in prop::collection::vec(1e-3f64..1e3, 1..8), snr in 1e-2f64..1e4) {
        let p = waterfill(&gains, snr, WaterfillParams::for_gains(&gains, snr)).unwrap();
        let mu = p.water_level;
        prop_assert!((p.powers.iter().sum::<f64>() - snr).abs() <= 1e-8 * snr);
        for (&pi, &g) in p.powers.iter().zip(&gains) {
            prop_assert!(pi >= 0.0);
            if pi > 0.0 {
                prop_assert!((pi + 1.0 / g - mu).abs() <= 1e-8 * mu);
            } else {
                prop_assert!(mu <= 1.0 / g * (1.0 + 1e-8));
            }
        }
        let k = gains.len() as f64;
        let wf: f64 = p.powers.iter().zip(&gains).map(|(pi, g)| (1.0 + pi * g).log2()).sum();
        let eq: f64 = gains.iter().map(|g| (1.0 + snr / k * g).log2()).sum();
        prop_assert!(wf >= eq - 1e-8);
    }

    #[test]
    fn rate_grows_with_snr(seed in any::<u64>(), nr in 1usize..=4, nt in 1usize..=4, snr in 0.01f64..1e3) {
        let h = gaussian(seed, nr, nt);
        prop_assert!(rate(&h, 2.0 * snr).unwrap() >= rate(&h, snr).unwrap());
    }

    #[test]
    fn tradeoff_curves_decrease_to_zero(a in 1usize..30, b in 1usize..30, n in 1usize..30) {
        let n = n.min(a).min(b);
        let c = dmt_subset_selection(a, b, n).unwrap();
        let bp = &c.breakpoints;
        prop_assert_eq!(bp[0], (0.0, (a * b) as f64));
        prop_assert_eq!(bp[bp.len() - 1], (n as f64, 0.0));
        prop_assert!(bp.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1));
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let d = dmt_eval(&c, n as f64 * i as f64 / 20.0).unwrap();
            prop_assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn impedance_is_reciprocal(g in geometry()) {
        let spec = DipoleSpec::default();
        let ports: Vec<usize> = (0..g.port_count()).collect();
        let z = impedance_matrix(&g, &ports, &spec).unwrap();
        prop_assert!((&z - z.transpose()).norm() == 0.0);
    }

    #[test]
    fn far_apart_dipoles_do_not_couple(n1 in 1usize..=4, n2 in 1usize..=4, spacing in 50.0f64..200.0) {
        let g = SurfaceGeometry::new(n1, n2, spacing * (n1 - 1) as f64, spacing * (n2 - 1) as f64).unwrap();
        let spec = DipoleSpec::default();
        let ports: Vec<usize> = (0..g.port_count()).collect();
        let c = coupling_from_impedance(&impedance_matrix(&g, &ports, &spec).unwrap(), &spec).unwrap();
        let n = ports.len();
        let dev = (c - CMatrix::identity(n, n)).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-2);
    }

    #[test]
    fn s_and_z_conversions_invert(seed in any::<u64>(), n in 1usize..=6, z0 in 10.0f64..100.0) {
        let s = gaussian(seed, n, n) * Complex64::new(0.1, 0.0);
        let back = z_to_s(&s_to_z(&s, z0).unwrap(), z0).unwrap();
        prop_assert!((back - &s).norm() <= 1e-10);
    }

    #[test]
    fn configs_round_trip(
        g in geometry(),
        trials in proptest::option::of(1u64..1_000_000),
        seed in any::<u64>(),
        sweep in prop::collection::vec(-50.0f64..50.0, 0..6),
        mimo in any::<bool>(),
    ) {
        let cfg = CampaignConfig {
            schema_version: SCHEMA_VERSION,
            experiment: Experiment::OutageVsSnr,
            label: "fas".into(),
            scenario: ScenarioConfig {
                geom_tx: g,
                geom_rx: g,
                n_tx: 1,
                n_rx: 1,
                path_loss: 1.0,
                strategy: Selection::Greedy { separation: 0.25 },
                snr_db: 20.0,
                kernel: Default::default(),
            },
            baselines: vec![Variant {
                label: "b".into(),
                array: if mimo { ArrayKind::Mimo } else { ArrayKind::HalfWavelength },
                strategy: Some(Selection::Exhaustive { combo_limit: 77 }),
                coupling: Some(Coupling::Pixel { dipole: DipoleSpec::default(), s_matrix: Default::default() }),
                ..Default::default()
            }],
            trials,
            seed,
            sweep,
            coupling: Coupling::Liquid { dipole: DipoleSpec::default() },
            output: Some("out/x".into()),
            rate_threshold: Some(3.5),
            rank_threshold: 1e-3,
            dmt: DmtParams { rank_rx: Some(3), rank_tx: None },
        };
        let back = CampaignConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
