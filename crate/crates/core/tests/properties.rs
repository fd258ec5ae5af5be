use std::f64::consts::LN_2;

use num_complex::Complex64;
use proptest::prelude::*;

use spinlaw::dyadic::{BinaryOrbit, DyadicDensity};
use spinlaw::finite::{
    self, affinity_gap, binary_entropy, partial_trace, EnergyTable, ReducedDensityMatrix, SiteSpec,
    SiteState, SpinState,
};
use spinlaw::interaction::CouplingModel;
use spinlaw::product::{cloitre, cloitre_product, gim_correlator};
use spinlaw::quench::{pointer_value, run_cycle, time_arrow_witness, trace_post_quench, QuenchPlan};

fn site_state() -> impl Strategy<Value = SiteState> {
    prop_oneof![
        Just(SiteState::Up),
        Just(SiteState::Down),
        Just(SiteState::Plus),
        Just(SiteState::Minus)
    ]
}

fn spec(sites: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = SiteSpec> {
    prop::collection::vec(site_state(), sites).prop_map(SiteSpec)
}

fn random_state(sites: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = SpinState> {
    sites.prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1usize << n).prop_filter_map(
            "nonzero vector",
            move |raw| {
                let mut amps: Vec<Complex64> =
                    raw.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
                for _ in 0..2 {
                    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                    if norm < 1e-3 {
                        return None;
                    }
                    amps.iter_mut().for_each(|a| *a /= norm);
                }
                SpinState::new(n, amps).ok()
            },
        )
    })
}

fn region_of(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transfer_operator_raises_entropy_and_keeps_mass(
        weights in (1u32..=10).prop_flat_map(|m| prop::collection::vec(0.0f64..10.0, 1usize << m))
    ) {
        prop_assume!(weights.iter().sum::<f64>() > 0.0);
        let m = weights.len().trailing_zeros();
        let mut d = DyadicDensity::from_weights(m, &weights).unwrap();
        while d.resolution() > 0 {
            let next = d.pf_apply().unwrap();
            prop_assert!(next.entropy() >= d.entropy() - 1e-12);
            prop_assert!(next.cells().iter().all(|&c| c >= 0.0));
            let mean = next.cells().iter().sum::<f64>() / next.cells().len() as f64;
            prop_assert!((mean - 1.0).abs() <= 1e-12);
            d = next;
        }
        prop_assert!((d.cells()[0] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn direct_power_equals_iteration_bit_for_bit(
        (weights, n) in (1u32..=10)
            .prop_flat_map(|m| (prop::collection::vec(0.0f64..10.0, 1usize << m), 0..=m))
    ) {
        prop_assume!(weights.iter().sum::<f64>() > 0.0);
        let m = weights.len().trailing_zeros();
        let d = DyadicDensity::from_weights(m, &weights).unwrap();
        let mut iterated = d.clone();
        for _ in 0..n {
            iterated = iterated.pf_apply().unwrap();
        }
        let direct = d.pf_power(n).unwrap();
        prop_assert_eq!(direct.resolution(), iterated.resolution());
        for (a, b) in direct.cells().iter().zip(iterated.cells()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn dyadic_histograms_average_to_exactly_one(
        counts in (1u32..=8).prop_flat_map(|m| prop::collection::vec(0u64..64, 1usize << m))
    ) {
        // pad the last cell so the total is a power of two
        let mut counts = counts;
        let total: u64 = counts.iter().sum();
        let target = total.next_power_of_two().max(counts.len() as u64);
        *counts.last_mut().unwrap() += target - total;
        let m = counts.len().trailing_zeros();
        let d = DyadicDensity::from_counts(m, &counts).unwrap();
        let full = d.pf_power(m).unwrap();
        prop_assert_eq!(full.cells(), &[1.0]);
    }

    #[test]
    fn shift_exposes_the_first_differing_digit(
        (bits, n) in prop::collection::vec(0u8..=1, 2..40)
            .prop_flat_map(|b| { let l = b.len(); (Just(b), 0..l) })
    ) {
        let a = BinaryOrbit::new(bits.clone()).unwrap();
        let mut flipped = bits;
        flipped[n] ^= 1;
        let b = BinaryOrbit::new(flipped).unwrap();
        prop_assert_eq!(a.first_difference(&b), Some(n));
        let (sa, sb) = (a.shift(n).unwrap(), b.shift(n).unwrap());
        prop_assert_eq!(sa.first_difference(&sb), Some(0));
    }

    #[test]
    fn lambda_norm_increases(xi in 1.05f64..20.0, u in 0.01f64..0.98, v in 0.01f64..0.98) {
        prop_assume!((u - v).abs() > 1e-6);
        let m = CouplingModel::exponential(xi).unwrap();
        let (lo, hi) = (u.min(v) * xi.ln(), u.max(v) * xi.ln());
        let a = m.lambda_norm(lo).unwrap().value.finite().unwrap();
        let b = m.lambda_norm(hi).unwrap().value.finite().unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn velocity_objective_blows_up_at_both_ends(xi in 1.05f64..20.0) {
        let m = CouplingModel::exponential(xi).unwrap();
        let v = m.lr_velocity().finite().unwrap();
        let lmax = m.lambda_max();
        prop_assert!(v.lambda_star > 0.0 && v.lambda_star < lmax);
        let g = |l: f64| m.velocity_objective(l).unwrap();
        prop_assert!(g(lmax * 1e-6) > 100.0 * v.velocity);
        prop_assert!(g(lmax * (1.0 - 1e-6)) > 100.0 * v.velocity);
        prop_assert!(g(v.bracket.0 * 0.99) >= v.velocity);
        prop_assert!(g(v.bracket.1 * 1.01) >= v.velocity);
    }

    #[test]
    fn velocity_scales_linearly(xi in 1.05f64..20.0, c in 0.1f64..10.0) {
        let m = CouplingModel::exponential(xi).unwrap();
        let v = m.lr_velocity().finite().unwrap().velocity;
        let vc = m.clone().scaled(c).unwrap().lr_velocity().finite().unwrap().velocity;
        prop_assert!((vc - c * v).abs() <= 1e-8 * c * v);
    }

    #[test]
    fn cloitre_is_bounded_by_one(p in 0.0f64..=1.0, s in 1.05f64..3.0, t in 0.0f64..500.0) {
        let v = cloitre(p, s, t, 1e-8).unwrap();
        prop_assert!(v.value().abs() <= 1.0 + 1e-12);
        prop_assert!(v.log_magnitude <= 1e-12);
    }

    #[test]
    fn correlator_lies_in_unit_interval(xi in 1.1f64..10.0, alpha in 1.1f64..4.0, t in 0.0f64..200.0) {
        for c in [CouplingModel::exponential(xi).unwrap(), CouplingModel::dyson(alpha).unwrap()] {
            let v = gim_correlator(&c, t, 1e-8).unwrap();
            prop_assert!(v.sign >= 0);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v.value()));
        }
    }

    #[test]
    fn doubling_the_head_stays_within_the_bounds(
        p in 0.05f64..=1.0, s in 1.1f64..2.5, t in 0.5f64..2000.0
    ) {
        let prod = cloitre_product(p, s).unwrap();
        let v = prod.evaluate(t, 1e-9).unwrap();
        prop_assume!(v.sign != 0);
        let w = prod.evaluate_with_head(t, 2 * v.terms_used.max(1)).unwrap();
        let change = (v.log_magnitude - w.log_magnitude).abs();
        prop_assert!(change <= v.truncation_bound + v.rounding_bound + w.rounding_bound,
            "change {change:e}, bounds {:e} {:e}", v.truncation_bound, v.rounding_bound);
    }

    #[test]
    fn sign_tracking_matches_direct_product(s in 1.1f64..3.0, t in 0.1f64..60.0) {
        let direct: f64 = (1..=10_000u64).map(|n| (t * (n as f64).powf(-s)).cos()).product();
        prop_assume!(direct.abs() > 1e-200);
        let v = cloitre_product(1.0, s).unwrap().truncated(t, 10_000);
        prop_assert_eq!(v.sign as f64, direct.signum());
    }

    #[test]
    fn evolution_is_unitary(psi in random_state(1..=8), t in -100.0f64..100.0, xi in 1.1f64..5.0) {
        let model = CouplingModel::exponential(xi).unwrap();
        let out = finite::diagonal_evolve(&psi, &model, t).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn full_chain_entropy_is_zero(s in spec(1..=8), t in 0.0f64..50.0, xi in 1.1f64..5.0) {
        let model = CouplingModel::exponential(xi).unwrap();
        let psi = finite::diagonal_evolve(&SpinState::product(&s).unwrap(), &model, t).unwrap();
        let all: Vec<usize> = (0..s.len()).collect();
        let rho = partial_trace(&psi, &all).unwrap();
        prop_assert!(rho.von_neumann_entropy().unwrap().entropy.abs() <= 1e-9);
    }

    #[test]
    fn real_states_have_time_symmetric_entropies(
        (s, region) in (2usize..=8).prop_flat_map(|n| (spec(n..=n), region_of(n))),
        t in 0.0f64..30.0,
        xi in 1.1f64..5.0,
    ) {
        let model = CouplingModel::exponential(xi).unwrap();
        let table = EnergyTable::new(&model, s.len()).unwrap();
        let psi = SpinState::product(&s).unwrap();
        prop_assert!(psi.is_real());
        let fwd = partial_trace(&table.evolve(&psi, t).unwrap(), &region).unwrap();
        let bwd = partial_trace(&table.evolve(&psi, -t).unwrap(), &region).unwrap();
        let (a, b) = (fwd.von_neumann_entropy().unwrap(), bwd.von_neumann_entropy().unwrap());
        prop_assert!((a.entropy - b.entropy).abs() <= 1e-9);
    }

    #[test]
    fn coupled_sites_become_entangled(n in 2usize..=8, t in 0.05f64..1.0, xi in 1.5f64..4.0) {
        let model = CouplingModel::exponential(xi).unwrap();
        let psi = SpinState::product(&SiteSpec::uniform(SiteState::Plus, n)).unwrap();
        let at0 = partial_trace(&psi, &[0]).unwrap().von_neumann_entropy().unwrap();
        prop_assert!(at0.entropy.abs() <= 1e-12);
        let later = finite::diagonal_evolve(&psi, &model, t).unwrap();
        let s = partial_trace(&later, &[0]).unwrap().von_neumann_entropy().unwrap();
        prop_assert!(s.entropy > 1e-12);
    }

    #[test]
    fn reduced_matrices_are_density_matrices(
        (psi, region) in random_state(1..=7).prop_flat_map(|p| {
            let n = p.sites();
            (Just(p), region_of(n))
        })
    ) {
        let rho = partial_trace(&psi, &region).unwrap();
        prop_assert!(ReducedDensityMatrix::new(rho.matrix().clone()).is_ok());
        prop_assert!(rho.eigenvalues()[0] >= -1e-12);
        prop_assert!(rho.clipped_mass() <= 1e-10);
        let s = rho.von_neumann_entropy().unwrap();
        prop_assert!(s.density >= 0.0 && s.density <= LN_2 + 1e-9);
        let mix = rho.mixedness();
        prop_assert!(mix >= 0.0 && mix <= 1.0 - 0.5f64.powi(region.len() as i32) + 1e-12);
    }

    #[test]
    fn affinity_gap_is_bounded(
        a in random_state(3..=3), b in random_state(3..=3), alpha in 0.0f64..=1.0, d in 1usize..=2
    ) {
        let region: Vec<usize> = (0..d).collect();
        let (r1, r2) = (partial_trace(&a, &region).unwrap(), partial_trace(&b, &region).unwrap());
        let gap = affinity_gap(&r1, &r2, alpha).unwrap();
        prop_assert!(gap >= -1e-10 && gap <= binary_entropy(alpha) + 1e-10);
    }

    #[test]
    fn pointer_equals_block_fraction(
        (a, b, mult, k) in (2u64..=5).prop_flat_map(|b| (1..b, Just(b), 1u64..=2, 1u64..=2))
    ) {
        prop_assume!(spinlaw_gcd(a, b) == 1);
        let c = 2 * b * mult;
        prop_assume!(c * k <= 16);
        let plan = QuenchPlan::new(a, b, c, k).unwrap();
        let psi = plan.prepared_state().unwrap();
        prop_assert!((pointer_value(&psi) - plan.f()).abs() <= 1e-12);

        // blocks tile [0, N) without overlap
        let mut seen = vec![0u8; plan.sites()];
        for blk in 0..k {
            prop_assert_eq!(plan.plus_block(blk).len(), plan.plus_len());
            prop_assert_eq!(plan.minus_block(blk).len(), plan.minus_len());
            for x in plan.plus_block(blk).chain(plan.minus_block(blk)) {
                seen[x] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&v| v == 1));
        prop_assert_eq!(2 * plan.plus_len() as u64, c + c * a / b);
    }

    #[test]
    fn pointers_separate_by_the_fraction_gap(
        (a1, b1, a2, b2) in (2u64..=4, 2u64..=4).prop_flat_map(|(b1, b2)| (1..b1, Just(b1), 1..b2, Just(b2)))
    ) {
        prop_assume!(spinlaw_gcd(a1, b1) == 1 && spinlaw_gcd(a2, b2) == 1);
        let p1 = QuenchPlan::new(a1, b1, 2 * b1, 1).unwrap();
        let p2 = QuenchPlan::new(a2, b2, 2 * b2, 1).unwrap();
        let gap = pointer_value(&p1.prepared_state().unwrap()) - pointer_value(&p2.prepared_state().unwrap());
        prop_assert!((gap.abs() - (p1.f() - p2.f()).abs()).abs() <= 1e-12);
    }

    #[test]
    fn quench_traces_are_reproducible_and_bounded(xi in 1.5f64..4.0, tmax in 1.0f64..40.0) {
        let model = CouplingModel::exponential(xi).unwrap();
        let plan = QuenchPlan::new(1, 2, 4, 2).unwrap();
        let times: Vec<f64> = (0..=40).map(|i| tmax * i as f64 / 40.0).collect();
        let a = run_cycle(&plan, &model, &[2, 3, 4], &times).unwrap();
        let b = run_cycle(&plan, &model, &[2, 3, 4], &times).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.records.iter().all(|r| r.entropy_density <= LN_2 + 1e-9));

        let sym: Vec<f64> = (-40..=40).map(|i| tmax * i as f64 / 40.0).collect();
        let tr = trace_post_quench(&plan, &model, &[0], &sym).unwrap();
        for x in [0usize, 3, 5] {
            let w = time_arrow_witness(&tr, x).unwrap();
            for k in 1..=40 {
                prop_assert!((w[40 + k].1 - w[40 - k].1).abs() <= 1e-9);
            }
        }
    }
}

fn spinlaw_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
