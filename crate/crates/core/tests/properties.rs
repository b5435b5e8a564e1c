use pds_core::montecarlo::{generate_impulse_train, realization_rngs};
use pds_core::optimize::{grid_search, seat_displacement, Axis, DesignGrid, Family, Spacing};
use pds_core::rare::RareOptions;
use pds_core::statlin::solve_fixed_point;
use pds_core::systems::{PiecewiseSpring, SpringLaw, StateVec};
use pds_core::*;
use proptest::prelude::*;

fn forcing() -> ForcingModel {
    ForcingModel::new(BackgroundSpectrum::new(1.582e-4, 1.0).unwrap(), 5000.0, 0.1, 0.0141, ImpulsePattern::PrimaryOnly).unwrap()
}

fn host(deck: bool, attachment: Attachment) -> SystemModel {
    if deck {
        SystemModel::deck_seat(Oscillator::new(1.0, 0.01, 1.0), Oscillator::new(0.05, 0.1, 1.0), Some(attachment)).unwrap()
    } else {
        SystemModel::seat(Oscillator::new(1.0, 0.01, 1.0), Some(attachment)).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closure_moments_are_feasible(deck in any::<bool>(), damping in 1e-3f64..1.0, c in 1e-3f64..10.0) {
        let f = forcing();
        let model = host(deck, Attachment::cubic_nes(0.05, damping, c));
        let lin = solve_fixed_point(&model, &f.spectrum, &f.spectrum.default_grid()).unwrap();
        let m = lin.moments;
        prop_assert!(m.host_var > 0.0 && m.attachment_var > 0.0);
        prop_assert!(m.cross.abs() <= (m.host_var * m.attachment_var).sqrt() * (1.0 + 1e-12));
        prop_assert!(lin.kappa >= 0.0);
    }

    #[test]
    fn symmetric_springs_give_odd_dynamics(deck in any::<bool>(), c in 0.0f64..10.0, k in 0.0f64..1.0,
                                           y in prop::array::uniform6(-0.5f64..0.5), a in -0.1f64..0.1) {
        let att = Attachment { mass: 0.05, damping: 0.02, spring: SpringLaw::Cubic { k, c } };
        let model = host(deck, att);
        let neg: StateVec = y.map(|v| -v);
        let (p, q) = (model.rhs(&y, a), model.rhs(&neg, -a));
        for i in 0..model.dim() {
            prop_assert!((p[i] + q[i]).abs() <= 1e-14 * (1.0 + p[i].abs()));
        }
    }

    #[test]
    fn piecewise_force_is_continuous_and_conservative(k_o in 0.0f64..1.0, a1 in 0.0f64..5.0, a2 in 0.0f64..5.0,
                                                      sz in 1e-4f64..0.1, z in -1.0f64..1.0) {
        let s = PiecewiseSpring::new(k_o, a1, a2, sz).unwrap();
        for knee in [s.delta, -s.delta] {
            let scale = 1.0 + k_o.max(a1).max(a2) * knee.abs();
            prop_assert!((s.force(knee - 1e-12) - s.force(knee + 1e-12)).abs() <= 1e-10 * scale);
        }
        let h = 1e-6;
        let dudz = (s.potential(z + h) - s.potential(z - h)) / (2.0 * h);
        prop_assume!((z.abs() - s.delta).abs() > 2.0 * h);
        prop_assert!((dudz - s.force(z)).abs() <= 1e-6 * (1.0 + s.force(z).abs()));
        prop_assert!(s.potential(z) >= 0.0);
    }

    #[test]
    fn conditioned_train_is_sorted_and_exact(seed in any::<u64>(), r in 0usize..8, n in 1usize..60) {
        let f = forcing();
        let (_, mut rng) = realization_rngs(seed, r);
        let train = generate_impulse_train(&f, 10.0, n as f64 * f.t_alpha, Some(n), &mut rng).unwrap();
        prop_assert_eq!(train.len(), n);
        prop_assert!(train.windows(2).all(|w| w[0].time < w[1].time));
        prop_assert!(train.iter().all(|i| i.time > 10.0 && i.time <= 10.0 + n as f64 * f.t_alpha));
    }
}

#[test]
fn surfaces_are_deterministic() {
    let f = forcing();
    let base = SystemModel::seat(Oscillator::new(1.0, 0.01, 1.0), None).unwrap();
    let grid = DesignGrid {
        first: Axis::new(0.005, 0.05, 3, Spacing::Log).unwrap(),
        second: Axis::new(0.02, 0.2, 3, Spacing::Log).unwrap(),
        objective: seat_displacement(),
    };
    let opts = PdsOptions { rare: RareOptions::screening(), ..PdsOptions::default() };
    let a = grid_search(&base, &f, &grid, Family::Tmd, 0.05, &opts).unwrap();
    let b = grid_search(&base, &f, &grid, Family::Tmd, 0.05, &opts).unwrap();
    assert_eq!(a.surface, b.surface);
    assert!(a.surface.iter().flatten().all(|v| v.is_some_and(|v| v.is_finite() && v > 0.0)));
    let min = a.surface.iter().flatten().flatten().fold(f64::INFINITY, |m, v| m.min(*v));
    assert_eq!(a.ratio, min / a.baseline);
}

#[test]
fn quantities_round_trip_through_text() {
    let model = host(true, Attachment::tmd(0.05, 0.01, 0.05));
    for q in model.quantities() {
        assert_eq!(q.to_string().parse::<Quantity>().unwrap(), q);
    }
}
