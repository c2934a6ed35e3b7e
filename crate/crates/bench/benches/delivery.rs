use criterion::{black_box, criterion_group, criterion_main, Criterion};

use ccwlan_core::delivery::{build_codewords, DeliveryMode};
use ccwlan_core::fairness::{maximize_fairness_with, FairnessObjective, RegionOracle, SolverOptions};
use ccwlan_core::placement::{assign_profiles, PlacementParams, ProfileAssignment, Requests};
use ccwlan_core::policy::{Instance, Limits};
use ccwlan_core::topology::{build_hex_grid, place_users, NetworkTopology, DEFAULT_R_INTER, DEFAULT_R_TRANS};

fn codewords(c: &mut Criterion) {
    for (l, t) in [(5, 1), (10, 2), (20, 4)] {
        let params = PlacementParams::new(l, t).unwrap();
        let a = ProfileAssignment::new((0..l).collect(), l).unwrap();
        let users: Vec<usize> = (0..l).collect();
        let requests = Requests::distinct(l);
        c.bench_function(&format!("codewords L={l} t={t}"), |b| {
            b.iter(|| build_codewords(0, black_box(&users), &a, &requests, &params, &[]).unwrap())
        });
    }
}

fn grid(seed: u64) -> (NetworkTopology, ProfileAssignment, PlacementParams) {
    let helpers = build_hex_grid(1);
    let users = place_users(&helpers, DEFAULT_R_TRANS, 5.0, seed).unwrap();
    let topo = NetworkTopology::from_coordinates(helpers, users, DEFAULT_R_TRANS, DEFAULT_R_INTER).unwrap();
    let a = assign_profiles(topo.user_count(), 5, seed).unwrap();
    (topo, a, PlacementParams::new(5, 1).unwrap())
}

fn region(c: &mut Criterion) {
    let (topo, a, params) = grid(1);
    let inst = Instance::new(&topo, &a, &params, 2).unwrap();
    let limits = Limits::default();
    let mut group = c.benchmark_group("seven helpers");
    group.sample_size(10);
    for mode in DeliveryMode::ALL {
        group.bench_function(format!("configurations {}", mode.name()), |b| {
            b.iter(|| inst.configurations(mode, &limits).unwrap())
        });
        let mut set = inst.configurations(mode, &limits).unwrap();
        set.dedup_offers();
        let oracle = RegionOracle { configurations: &set.configurations, users: topo.user_count() };
        group.bench_function(format!("proportional fairness {}", mode.name()), |b| {
            b.iter(|| {
                maximize_fairness_with(&oracle, &FairnessObjective::proportional(), &SolverOptions::default()).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, codewords, region);
criterion_main!(benches);
