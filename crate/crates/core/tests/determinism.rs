//! Results must not depend on the number of worker threads.
#![cfg(feature = "parallel")]

use spinlaw::finite::{partial_trace, EnergyTable, SiteSpec, SiteState, SpinState};
use spinlaw::interaction::CouplingModel;
use spinlaw::product::{cloitre, sensitivity_scan, ScanTarget};
use spinlaw::quench::{run_cycle, QuenchPlan};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn products_are_thread_count_independent() {
    let run = || {
        [3.0, 250.0, 4.0e4]
            .map(|t| cloitre(0.5, 1.2, t, 1e-10).unwrap())
            .to_vec()
    };
    let one = in_pool(1, run);
    for threads in [2, 4, 7] {
        assert_eq!(in_pool(threads, run), one);
    }
    let scan = || {
        let times: Vec<f64> = (0..64).map(|i| i as f64 * 3.3).collect();
        sensitivity_scan(&ScanTarget::Cloitre { p: 0.7, s: 1.5 }, &times, 0.01, 1e-9).unwrap()
    };
    assert_eq!(in_pool(1, scan), in_pool(4, scan));
}

#[test]
fn finite_volume_is_thread_count_independent() {
    let run = || {
        let model = CouplingModel::exponential(std::f64::consts::E).unwrap();
        let psi = SpinState::product(&SiteSpec::uniform(SiteState::Plus, 14)).unwrap();
        let table = EnergyTable::new(&model, 14).unwrap();
        let out = table.evolve(&psi, 7.5).unwrap();
        let rho = partial_trace(&out, &[3, 4, 5, 6, 7]).unwrap();
        (
            out.norm_sqr().to_bits(),
            out.sigma1_profile(),
            rho.von_neumann_entropy().unwrap(),
            rho.mixedness().to_bits(),
        )
    };
    let one = in_pool(1, run);
    assert_eq!(in_pool(3, run), one);
    assert_eq!(in_pool(8, run), one);
}

#[test]
fn quench_traces_are_thread_count_independent() {
    let run = || {
        let model = CouplingModel::exponential(2.0).unwrap();
        let plan = QuenchPlan::new(1, 2, 4, 3).unwrap();
        let times: Vec<f64> = (0..=50).map(|i| 0.4 * i as f64).collect();
        run_cycle(&plan, &model, &[4, 5, 6, 7], &times).unwrap()
    };
    assert_eq!(in_pool(1, run), in_pool(5, run));
}
