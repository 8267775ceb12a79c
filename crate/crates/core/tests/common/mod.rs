#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svgic_core::baselines::{self, PartitionMode};
use svgic_core::lp::{self, FractionalSolution};
use svgic_core::oracle::{gen_random, search_space};
use svgic_core::rounding::{avg, avgd, Sampler, DEFAULT_BALANCE};
use svgic_core::{Configuration, Instance};

/// Cap on the exhaustive search used by the randomized suites, keeping the
/// whole corpus fast while covering every size up to n, m = 6 and k = 3.
pub const SUITE_SEARCH_CAP: f64 = 2e6;

/// The seeded corpus of small random instances shared by several suites.
pub fn random_corpus(count: usize, base_seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.gen_range(1..=3);
        let m = rng.gen_range(k.max(2)..=6);
        let n = rng.gen_range(2..=6);
        let p = rng.gen_range(0.2..0.9);
        let inst = gen_random(n, m, k, p, rng.gen()).unwrap();
        if search_space(&inst) <= SUITE_SEARCH_CAP {
            out.push(inst);
        }
    }
    out
}

/// Every algorithm's output for an instance, labelled.
pub fn all_outputs(inst: &Instance, frac: &FractionalSolution) -> Vec<(String, Configuration)> {
    let mut out = vec![
        ("per".to_string(), baselines::per_topk(inst)),
        ("group".to_string(), baselines::group_topk(inst)),
        ("avgd".to_string(), avgd(inst, frac, DEFAULT_BALANCE).unwrap().config),
    ];
    let g = 2.min(inst.n());
    for (name, mode) in [("sub-friend", PartitionMode::Friendship), ("sub-pref", PartitionMode::Preference)] {
        let part = baselines::auto_partition(inst, mode, g, 0).unwrap();
        out.push((name.to_string(), baselines::subgroup_static(inst, &part).unwrap()));
    }
    for seed in 0..5 {
        for sampler in [Sampler::Uniform, Sampler::Advanced] {
            out.push((format!("avg-{sampler:?}-{seed}"), avg(inst, frac, seed, sampler).unwrap().config));
        }
    }
    out
}

pub fn relaxation(inst: &Instance) -> lp::Relaxation {
    lp::solve_relaxation(inst).unwrap()
}

pub fn mean_and_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}
