mod common;

use bma_cluster::clusterers::{kmeans_fit, ward_linkage};
use bma_cluster::model::ConsensusMatrix;
use bma_cluster::ssmf::objective;
use bma_cluster::*;
use common::oracle;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn block_consensus(sizes: &[usize]) -> (ConsensusMatrix, Vec<usize>) {
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
        .collect();
    let a = AllocationMatrix::from_labels(&labels, "truth").unwrap();
    let s = similarity_from_allocation(&a);
    let c = consensus(&[s], &ModelWeights::uniform(vec!["truth".into()]).unwrap()).unwrap();
    (c, labels)
}

fn gaussian_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (0..d)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    z * (1.0 + j as f64) + 3.0 * j as f64
                })
                .collect()
        })
        .collect()
}

#[test]
fn ssmf_recovers_block_structure() {
    for sizes in [vec![5, 5], vec![4, 6, 3], vec![10, 10, 10, 10]] {
        let (c, truth) = block_consensus(&sizes);
        let r = factorize(&c, &SsmfConfig::new(sizes.len()).seed(2)).unwrap();
        assert_eq!(
            adjusted_rand_index(&r.modal_labels(), &truth),
            1.0,
            "{sizes:?}"
        );
        assert!(r.emptied.is_empty());
        assert!(r.uncertainty.iter().all(|&u| u < 1e-3));
    }
}

#[test]
fn ssmf_rows_lie_on_simplex() {
    let data = generate_clusters(12, 3, 2, -0.1, 8).unwrap();
    let models: Vec<_> = [
        (Algorithm::KMeans, 3),
        (Algorithm::Ward, 2),
        (Algorithm::Gmm, 4),
    ]
    .iter()
    .map(|&(alg, k)| alg.fit(&data.features, k, 1).unwrap())
    .collect();
    let w = chxb_weights(&data.features, &models, WeightMode::Standard).unwrap();
    let sims: Vec<_> = models.iter().map(similarity_from_allocation).collect();
    let c = consensus(&sims, &w).unwrap();
    let r = factorize(&c, &SsmfConfig::new(3).seed(4)).unwrap();
    for row in r.allocation.outer_iter() {
        assert!(row.iter().all(|&v| v >= 0.0));
        assert!((row.sum() - 1.0).abs() < 1e-9);
    }
    for &e in &r.emptied {
        assert!(r.allocation.column(e).iter().all(|&v| v == 0.0));
    }
    for (u, row) in r.uncertainty.iter().zip(r.allocation.outer_iter()) {
        let max = row.iter().copied().fold(0.0, f64::max);
        assert!((u - (1.0 - max)).abs() < 1e-15);
    }
    // The objective trace only ever goes down.
    assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    let reported = *r.objective_trace.last().unwrap();
    let direct = objective(c.values(), &r.allocation, 0.01);
    assert!(
        oracle::close(reported, direct, 1e-9),
        "{reported} vs {direct}"
    );
}

#[test]
fn ssmf_is_deterministic_for_a_seed() {
    let (c, _) = block_consensus(&[6, 7, 5]);
    let cfg = SsmfConfig::new(3).seed(11);
    let a = factorize(&c, &cfg).unwrap();
    let b = factorize(&c, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ssmf_is_symmetric_under_point_permutation() {
    let data = generate_clusters(8, 3, 2, 0.0, 3).unwrap();
    let a = Algorithm::Gmm.fit(&data.features, 3, 0).unwrap();
    let s = similarity_from_allocation(&a);
    let w = ModelWeights::uniform(vec![a.model_id().to_string()]).unwrap();
    let c = consensus(&[s], &w).unwrap();
    let n = c.n();
    let perm: Vec<usize> = (0..n).rev().collect();
    let permuted = Array2::from_shape_fn((n, n), |(i, j)| c.values()[[perm[i], perm[j]]]);
    let cp = ConsensusMatrix::from_values(permuted).unwrap();
    let cfg = SsmfConfig::new(3).seed(5);
    let r = factorize(&c, &cfg).unwrap();
    let rp = factorize(&cp, &cfg).unwrap();
    let back: Vec<usize> = {
        let mut inv = vec![0; n];
        let lp = rp.modal_labels();
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = lp[i];
        }
        inv
    };
    assert_eq!(adjusted_rand_index(&r.modal_labels(), &back), 1.0);
    let (j, jp) = (
        *r.objective_trace.last().unwrap(),
        *rp.objective_trace.last().unwrap(),
    );
    assert!((j - jp).abs() <= 1e-6 * j.abs().max(1.0), "{j} vs {jp}");
}

#[test]
fn kmeans_trace_is_non_increasing() {
    for seed in 0..5 {
        let data = generate_clusters(20, 4, 3, -0.2, seed).unwrap();
        let fit = kmeans_fit(&data.features, 4, seed).unwrap();
        assert!(fit.ss_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        assert!(fit.iterations <= bma_cluster::clusterers::KMEANS_MAX_ITER);
        let labels = &fit.labels;
        assert_eq!(labels.len(), 80);
        let mut distinct = labels.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 4);
    }
}

#[test]
fn kmeans_within_ss_matches_pairwise_identity() {
    let data = generate_clusters(15, 3, 2, 0.2, 2).unwrap();
    let fit = kmeans_fit(&data.features, 3, 0).unwrap();
    let points: Vec<Vec<f64>> = data
        .features
        .values()
        .outer_iter()
        .map(|r| r.to_vec())
        .collect();
    // Within SS = Σ_k (1/n_k) Σ_{i<j in k} ‖x_i − x_j‖².
    let mut within = 0.0;
    for c in 0..3 {
        let members: Vec<&Vec<f64>> = points
            .iter()
            .zip(&fit.labels)
            .filter(|(_, &l)| l == c)
            .map(|(p, _)| p)
            .collect();
        let mut pair = 0.0;
        for a in 0..members.len() {
            for b in (a + 1)..members.len() {
                pair += members[a]
                    .iter()
                    .zip(members[b])
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>();
            }
        }
        within += pair / members.len() as f64;
    }
    assert!(oracle::close(fit.within_ss, within, 1e-10));
}

#[test]
fn ward_heights_are_monotone() {
    for seed in 0..5 {
        let x = FeatureMatrix::from_rows(&gaussian_points(40, 3, seed)).unwrap();
        let dendro = ward_linkage(&x);
        assert_eq!(dendro.merges().len(), 39);
        assert!(dendro
            .merges()
            .windows(2)
            .all(|w| w[1].height >= w[0].height - 1e-12));
        assert_eq!(dendro.merges().last().unwrap().size, 40);
        for k in 1..=6 {
            let cut = dendro.cut(k);
            let mut distinct = cut.clone();
            distinct.sort();
            distinct.dedup();
            assert_eq!(distinct, (0..k).collect::<Vec<_>>());
        }
    }
}

#[test]
fn ward_first_merge_is_closest_pair() {
    let points = gaussian_points(25, 2, 9);
    let x = FeatureMatrix::from_rows(&points).unwrap();
    let dendro = ward_linkage(&x);
    let first = &dendro.merges()[0];
    let mut best = f64::INFINITY;
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let d = points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            best = best.min(d);
        }
    }
    assert!((first.height - best).abs() < 1e-12);
}

#[test]
fn gmm_single_component_matches_closed_form() {
    for seed in 0..5 {
        let points = gaussian_points(60, 3, seed);
        let x = FeatureMatrix::from_rows(&points).unwrap();
        let fit = gmm_diag(&x, 1, seed).unwrap();
        let expected = oracle::single_gaussian_loglik(&points);
        assert!(
            oracle::close(fit.loglik, expected, 1e-9),
            "{} vs {expected}",
            fit.loglik
        );
        assert_eq!(fit.kappa, 6);
        let bic = 2.0 * expected - 6.0 * 60f64.ln();
        assert!(oracle::close(fit.bic, bic, 1e-9));
    }
}

#[test]
fn gmm_em_never_decreases_likelihood() {
    for seed in 0..20 {
        let k = 2 + (seed as usize % 3);
        let data = generate_clusters(15, 3, 2, -0.2, seed).unwrap();
        let fit = gmm_diag(&data.features, k, seed).unwrap();
        for w in fit.loglik_trace.windows(2) {
            assert!(
                w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0),
                "seed {seed}: {} -> {}",
                w[0],
                w[1]
            );
        }
        for row in fit.allocation.probs().outer_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
        assert!((fit.mixing.sum() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn gmm_separates_two_gaussians() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for (c, mean) in [-5.0, 5.0].iter().enumerate() {
        for _ in 0..100 {
            let z: f64 = rng.sample(StandardNormal);
            rows.push(vec![mean + z]);
            truth.push(c);
        }
    }
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let fit = gmm_diag(&x, 2, 3).unwrap();
    assert!(fit.converged);
    assert_eq!(adjusted_rand_index(&harden(&fit.allocation), &truth), 1.0);
    let mut means: Vec<f64> = fit.means.column(0).to_vec();
    means.sort_by(f64::total_cmp);
    assert!((means[0] + 5.0).abs() < 0.3 && (means[1] - 5.0).abs() < 0.3);
    for v in fit.variances.iter() {
        assert!((v - 1.0).abs() < 0.35, "variance {v}");
    }
}

#[test]
fn gmm_rejects_bad_k() {
    let x = FeatureMatrix::from_rows(&gaussian_points(5, 2, 0)).unwrap();
    assert_eq!(
        gmm_diag(&x, 0, 0).unwrap_err(),
        Error::InvalidK { k: 0, n: 5 }
    );
    assert_eq!(
        gmm_diag(&x, 5, 0).unwrap_err(),
        Error::KTooLarge { k: 5, n: 5 }
    );
    let flat = FeatureMatrix::from_rows(&vec![vec![1.0, 2.0]; 6]).unwrap();
    assert_eq!(gmm_diag(&flat, 2, 0).unwrap_err(), Error::DegenerateData);
}

#[test]
fn simulated_clusters_are_recoverable_when_separated() {
    for seed in 0..5 {
        let data = generate_clusters(100, 5, 2, 0.6, seed).unwrap();
        let fit = kmeans(&data.features, 5, seed).unwrap();
        let ari = adjusted_rand_index(&harden(&fit), &data.labels);
        assert!(ari > 0.9, "seed {seed}: {ari}");
    }
}

#[test]
fn overlapping_clusters_are_not_recoverable() {
    let mut total = 0.0;
    for seed in 0..5 {
        let data = generate_clusters(100, 5, 2, -0.3, seed).unwrap();
        let fit = kmeans(&data.features, 5, seed).unwrap();
        total += adjusted_rand_index(&harden(&fit), &data.labels);
    }
    assert!(total / 5.0 < 0.9, "mean ARI {}", total / 5.0);
}

#[test]
fn nearest_centre_distance_grows_with_separation() {
    let nearest = |sep: f64| {
        let c = generate_clusters(1, 5, 2, sep, 7).unwrap().centres;
        let mut best = f64::INFINITY;
        for a in 0..5 {
            for b in (a + 1)..5 {
                best = best.min((&c.row(a) - &c.row(b)).mapv(|v| v * v).sum().sqrt());
            }
        }
        best
    };
    let seps = [-0.5, -0.3, 0.0, 0.15, 0.3, 0.6, 0.9];
    let dists: Vec<f64> = seps.iter().map(|&s| nearest(s)).collect();
    assert!(dists.windows(2).all(|w| w[1] > w[0]), "{dists:?}");
}

#[test]
fn simulation_is_reproducible() {
    let a = generate_clusters(30, 4, 3, 0.1, 42).unwrap();
    let b = generate_clusters(30, 4, 3, 0.1, 42).unwrap();
    assert_eq!(a.features.values(), b.features.values());
    assert_eq!(a.labels, b.labels);
}
