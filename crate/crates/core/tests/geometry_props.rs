use fluidnet::config::RunConfig;
use fluidnet::geometry::*;
use proptest::prelude::*;

fn reference() -> (FaArrayConfig, FluidParams, FrameInputs) {
    let s = RunConfig::default().scenario;
    (s.array, s.fluid, s.frame)
}

#[test]
fn pilot_length_falls_with_antennas() {
    let (mut array, fluid, frame) = reference();
    let mut last = f64::INFINITY;
    for m in 1..=7 {
        array.num_fas = m;
        let b = build_frame_budget(&array, &fluid, &frame).unwrap();
        assert!(b.pilot_length < last, "M = {m}");
        last = b.pilot_length;
    }
}

#[test]
fn pilot_length_falls_with_estimated_ports() {
    let (mut array, fluid, frame) = reference();
    for n in [4, 9, 15, 20, 30] {
        array.ports_per_fa = n;
        let mut by_count: Vec<(usize, f64)> = (0..n)
            .map(|nu| {
                array.skipped_ports = nu;
                let b = build_frame_budget(&array, &fluid, &frame).unwrap();
                (b.selected_count, b.pilot_length)
            })
            .collect();
        by_count.sort_by(|a, b| a.partial_cmp(b).unwrap());
        by_count.dedup_by_key(|p| p.0);
        for w in by_count.windows(2) {
            assert!(w[1].1 < w[0].1, "N = {n}: {:?} -> {:?}", w[0], w[1]);
        }
    }
}

#[test]
fn switching_delay_reference_value() {
    // 20 ports over 0.2 wavelengths of 6 cm, fluid at 0.1167 m/s, one spacing
    let array = FaArrayConfig::new(1, 20, 0, 0.2, 0.06).unwrap();
    let slow = FluidParams::new(0.07, 0.2, 0.2, 10.0).unwrap();
    assert!((fluid_velocity(&slow) - 0.11667).abs() < 1e-4);
    let d = switching_delay(1.0, &array, &slow).unwrap();
    assert!((d - 5.41e-3).abs() < 1e-5, "{d}");
}

proptest! {
    #[test]
    fn selected_ports_structure(n in 2usize..60, skip in 0usize..60) {
        let nu = skip % n;
        let cfg = FaArrayConfig::new(2, n, nu, 0.2, 0.06).unwrap();
        let ports = cfg.selected_ports();
        prop_assert_eq!(ports[0], 1);
        prop_assert_eq!(ports.len(), n.div_ceil(nu + 1));
        prop_assert_eq!(ports.len(), cfg.selected_count());
        prop_assert!(*ports.last().unwrap() <= n);
        for w in ports.windows(2) {
            prop_assert_eq!(w[1] - w[0], nu + 1);
        }
    }

    #[test]
    fn link_distance_monotone(n in 2usize..40, rho in 0.01f64..1e4, drho in 0.001f64..10.0, kappa in 0.05f64..20.0) {
        let cfg = FaArrayConfig::new(1, n, 0, kappa, 0.06).unwrap();
        let mut prev = 0.0;
        for i in 1..=n {
            let r = link_distance(i, rho, &cfg).unwrap();
            prop_assert!(r >= prev);
            prop_assert!(link_distance(i, rho + drho, &cfg).unwrap() > r);
            prev = r;
        }
        prop_assert_eq!(link_distance(1, rho, &cfg).unwrap(), rho);
    }

    #[test]
    fn budget_is_deterministic_and_consistent(m in 1usize..8, n in 2usize..40, skip in 0usize..40, frac in 0.05f64..0.5) {
        let (_, fluid, mut frame) = reference();
        frame.estimation_fraction = frac;
        let cfg = FaArrayConfig::new(m, n, skip % n, 0.2, 0.06).unwrap();
        let a = build_frame_budget(&cfg, &fluid, &frame);
        let b = build_frame_budget(&cfg, &fluid, &frame);
        prop_assert_eq!(&a.as_ref().ok(), &b.as_ref().ok());
        if let Ok(budget) = a {
            prop_assert_eq!(budget.total_uses, budget.estimation_uses + budget.data_uses);
            let expect = (budget.estimation_uses as f64 - budget.switching_uses) / (budget.selected_count * m) as f64;
            prop_assert!((budget.pilot_length - expect).abs() <= 1e-9 * expect);
            prop_assert!(budget.pilot_length > 0.0);
        }
    }
}
