mod common;

use groupreduce::compressor::{
    assign_ranks, fit_blocks, group_reduce, rank_budget_solve, BlockPartition, Clustering,
    FrequencyTable, RankSpec, RefineConfig,
};
use groupreduce::metrics::{
    error_curve, gen_zipf_embedding, loglog_slope, spectrum, weighted_objective, zipf_stats,
};
use groupreduce::{
    dequantize, frobenius_error, lowrank_baseline, project_residual, prune_to_budget,
    quantize_model, quantize_uniform, svd_truncated, weighted_lowrank, Matrix,
};
use rand::Rng;

use common::{brute_weighted, eig_singular_values, gaussian, relative_diff, rng, zipf_weights};

fn tail_energy(s: &[f64], k: usize) -> f64 {
    s[k..].iter().map(|x| x * x).sum()
}

#[test]
fn truncated_svd_error_matches_tail_of_full_spectrum() {
    let mut r = rng(1);
    let a = gaussian(&mut r, 5, 4);
    let oracle = eig_singular_values(&a);
    let svd = svd_truncated(&a, 2).unwrap();
    for (s, o) in svd.s.iter().zip(&oracle) {
        assert!((s - o).abs() < 1e-10 * oracle[0]);
    }
    let err = frobenius_error(&a, &svd.reconstruct()).unwrap().powi(2);
    assert!(relative_diff(err, tail_energy(&oracle, 2)) < 1e-9);
}

#[test]
fn svd_sign_convention_on_random_inputs() {
    let mut r = rng(2);
    for _ in 0..20 {
        let (n, d) = (r.random_range(1..15usize), r.random_range(1..15usize));
        let a = gaussian(&mut r, n, d);
        let k = n.min(d);
        let svd = svd_truncated(&a, k).unwrap();
        for c in 0..k {
            let col: Vec<f64> = (0..d).map(|j| svd.v.get(j, c)).collect();
            let max = col.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let first = col.iter().position(|x| x.abs() == max).unwrap();
            assert!(col[first] > 0.0);
        }
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(frobenius_error(&a, &svd.reconstruct()).unwrap() <= 1e-10 * a.frobenius_norm());
    }
}

#[test]
fn frobenius_error_matches_direct_sum() {
    let mut r = rng(3);
    let a = gaussian(&mut r, 6, 3);
    let b = gaussian(&mut r, 6, 3);
    let direct: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    assert!(relative_diff(frobenius_error(&a, &b).unwrap(), direct) < 1e-14);
    let ones = Matrix::from_fn(2, 2, |_, _| 1.0);
    assert_eq!(frobenius_error(&Matrix::zeros(2, 2), &ones).unwrap(), 2.0);
}

#[test]
fn projection_residual_matches_explicit_arithmetic() {
    let mut r = rng(4);
    let basis = svd_truncated(&gaussian(&mut r, 9, 7), 3).unwrap().v;
    for _ in 0..10 {
        let a: Vec<f64> = gaussian(&mut r, 1, 7).into_data();
        let coeff: Vec<f64> = (0..3)
            .map(|c| (0..7).map(|j| basis.get(j, c) * a[j]).sum())
            .collect();
        let explicit: f64 = (0..7)
            .map(|j| {
                let p: f64 = (0..3).map(|c| basis.get(j, c) * coeff[c]).sum();
                (a[j] - p).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        let got = project_residual(&a, &basis).unwrap();
        assert!(relative_diff(got, explicit) < 1e-12);
    }
}

#[test]
fn weighting_changes_which_row_survives() {
    let a = Matrix::from_rows(&[[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
    let f = weighted_lowrank(&a, &[1.0, 1.0, 100.0], 1).unwrap();
    let rec = f.reconstruct();
    let expected = Matrix::from_rows(&[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
    assert!(frobenius_error(&rec, &expected).unwrap() < 1e-12);
    assert!(f.v.orthonormality_defect() < 1e-12);
}

#[test]
fn weighted_objective_equals_tail_energy_of_scaled_matrix() {
    let mut r = rng(5);
    for _ in 0..10 {
        let (n, d) = (r.random_range(2..30usize), r.random_range(2..12usize));
        let a = gaussian(&mut r, n, d);
        let q = zipf_weights(&mut r, n);
        let k = r.random_range(1..=n.min(d));
        let f = weighted_lowrank(&a, q.as_slice(), k).unwrap();
        let obj = brute_weighted(&a, &f.reconstruct(), &q);
        let qa = Matrix::from_fn(n, d, |i, j| q.get(i).sqrt() * a.get(i, j));
        let oracle = tail_energy(&eig_singular_values(&qa), k);
        let scale = brute_weighted(&a, &Matrix::zeros(n, d), &q);
        assert!((obj - oracle).abs() <= 1e-9 * scale, "{obj} vs {oracle}");
    }
}

/// Every base rank from 1 upward, cost computed from first principles.
fn scan_budget(sizes: &[usize], means: &[f64], dim: usize, budget: u64) -> usize {
    let f_min = means.iter().copied().fold(f64::INFINITY, f64::min);
    let cost = |r: usize| -> u64 {
        sizes
            .iter()
            .zip(means)
            .map(|(&s, &f)| {
                let k = ((f / f_min * r as f64).round() as usize).clamp(1, s.min(dim));
                ((s + dim) * k) as u64
            })
            .sum()
    };
    let cap = sizes.iter().map(|&s| s.min(dim)).max().unwrap();
    let saturated = cost(cap * 1000);
    (1..=cap * 1000)
        .take_while(|&r| cost(r) <= budget)
        .take_while(|&r| r == 1 || cost(r - 1) < saturated)
        .last()
        .unwrap()
}

#[test]
fn rank_budget_matches_exhaustive_scan() {
    let members = vec![(0..50).collect(), (50..100).collect()];
    let clustering = Clustering::from_members(members, 100).unwrap();
    let q = FrequencyTable::new([vec![3.0; 50], vec![1.0; 50]].concat()).unwrap();
    // The frequent cluster saturates at rank 10, so r keeps growing past 4.
    let r = rank_budget_solve(&clustering, &q, 10, 1000).unwrap();
    assert_eq!(r, scan_budget(&[50, 50], &[3.0, 1.0], 10, 1000));
    assert_eq!(r, 6);
    let p = assign_ranks(&clustering, &q, r, 10).unwrap();
    assert_eq!(p.parameter_count(10), 960);

    let single = Clustering::from_members(vec![(0..100).collect()], 100).unwrap();
    let uniform = FrequencyTable::uniform(100);
    assert_eq!(rank_budget_solve(&single, &uniform, 10, 440).unwrap(), 4);

    let mut rg = rng(6);
    for _ in 0..50 {
        let c = rg.random_range(1..6usize);
        let sizes: Vec<usize> = (0..c).map(|_| rg.random_range(1..40usize)).collect();
        let n: usize = sizes.iter().sum();
        let dim = rg.random_range(1..30usize);
        let mut members = Vec::new();
        let mut weights = Vec::new();
        let mut means = Vec::new();
        let mut next = 0;
        for &s in &sizes {
            members.push((next..next + s).collect::<Vec<_>>());
            next += s;
            let w = rg.random_range(1..20u32) as f64;
            weights.extend(std::iter::repeat_n(w, s));
            means.push(w);
        }
        let clustering = Clustering::from_members(members, n).unwrap();
        let q = FrequencyTable::new(weights).unwrap();
        let floor = assign_ranks(&clustering, &q, 1, dim)
            .unwrap()
            .parameter_count(dim);
        let budget = floor + rg.random_range(0..(4 * floor));
        assert_eq!(
            rank_budget_solve(&clustering, &q, dim, budget).unwrap(),
            scan_budget(&sizes, &means, dim, budget),
            "sizes {sizes:?} means {means:?} dim {dim} budget {budget}"
        );
    }
}

#[test]
fn block_diagonal_error_is_sum_of_block_tails() {
    let mut r = rng(7);
    let b1 = gaussian(&mut r, 6, 4);
    let b2 = gaussian(&mut r, 5, 3);
    let a = Matrix::from_fn(11, 7, |i, j| match (i < 6, j < 4) {
        (true, true) => b1.get(i, j),
        (false, false) => b2.get(i - 6, j - 4),
        _ => 0.0,
    });
    let clustering =
        Clustering::from_members(vec![(0..6).collect(), (6..11).collect()], 11).unwrap();
    let partition = BlockPartition::new(clustering, vec![2, 1], 7).unwrap();
    let q = FrequencyTable::uniform(11);
    let model = fit_blocks(&a, &partition, &q).unwrap();
    let oracle =
        tail_energy(&eig_singular_values(&b1), 2) + tail_energy(&eig_singular_values(&b2), 1);
    let obj = weighted_objective(&a, &q, &model).unwrap();
    assert!(relative_diff(obj, oracle) < 1e-9, "{obj} vs {oracle}");

    let full = model.reconstruct_full();
    for p in 0..2 {
        let block = model.factor(p).reconstruct();
        for (local, &i) in model.partition().members(p).iter().enumerate() {
            assert_eq!(full.row(i), block.row(local));
            assert_eq!(model.reconstruct_row(i).unwrap(), block.row(local));
        }
    }
}

#[test]
fn single_cluster_uniform_weights_reproduce_truncated_svd() {
    let mut r = rng(8);
    let a = gaussian(&mut r, 12, 5);
    let clustering = Clustering::from_members(vec![(0..12).collect()], 12).unwrap();
    let partition = BlockPartition::new(clustering, vec![3], 5).unwrap();
    let model = fit_blocks(&a, &partition, &FrequencyTable::uniform(12)).unwrap();
    let svd = svd_truncated(&a, 3).unwrap().reconstruct();
    let rec = model.reconstruct_full();
    assert!(frobenius_error(&rec, &svd).unwrap() <= 1e-10 * svd.frobenius_norm());
}

#[test]
fn diagonal_rank_one_rows() {
    let a = Matrix::from_rows(&[[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
    let clustering = Clustering::from_members(vec![(0..3).collect()], 3).unwrap();
    let partition = BlockPartition::new(clustering, vec![1], 3).unwrap();
    let model = fit_blocks(&a, &partition, &FrequencyTable::uniform(3)).unwrap();
    let close = |x: Vec<f64>, y: [f64; 3]| x.iter().zip(y).all(|(a, b)| (a - b).abs() < 1e-12);
    assert!(close(model.reconstruct_row(0).unwrap(), [3.0, 0.0, 0.0]));
    assert!(close(model.reconstruct_row(2).unwrap(), [0.0, 0.0, 0.0]));
    assert!(model.reconstruct_row(3).is_err());
}

#[test]
fn objective_matches_direct_summation() {
    let mut r = rng(9);
    let a = gaussian(&mut r, 40, 6);
    let q = zipf_weights(&mut r, 40);
    let model = group_reduce(&a, &q, 3, RankSpec::BaseRank(1), &RefineConfig::default()).unwrap();
    let direct = brute_weighted(&a, &model.reconstruct_full(), &q);
    assert!(relative_diff(weighted_objective(&a, &q, &model).unwrap(), direct) < 1e-12);

    let uniform = FrequencyTable::uniform(40);
    let m2 = group_reduce(
        &a,
        &uniform,
        3,
        RankSpec::BaseRank(2),
        &RefineConfig::default(),
    )
    .unwrap();
    let fro = frobenius_error(&a, &m2.reconstruct_full()).unwrap().powi(2);
    assert!(relative_diff(weighted_objective(&a, &uniform, &m2).unwrap(), fro) < 1e-12);
}

#[test]
fn weighted_pipeline_beats_plain_svd_on_zipf_instance() {
    let inst = gen_zipf_embedding(2000, 64, 4, 0.3, 3).unwrap();
    let (a, q) = (&inst.matrix, &inst.freqs);
    let budget = 2000 * 64 * 15 / 100;
    let model = group_reduce(
        a,
        q,
        5,
        RankSpec::Budget(budget),
        &RefineConfig::for_tokens(2000),
    )
    .unwrap();
    assert!(model.parameter_count() <= budget);
    let k = (budget / (2000 + 64)) as usize;
    let svd = lowrank_baseline(a, k).unwrap().reconstruct();
    let ours = brute_weighted(a, &model.reconstruct_full(), q);
    let plain = brute_weighted(a, &svd, q);
    assert!(ours < plain, "{ours} vs {plain}");
}

#[test]
fn refinement_never_hurts_the_pipeline() {
    let inst = gen_zipf_embedding(300, 16, 2, 0.2, 4).unwrap();
    let (a, q) = (&inst.matrix, &inst.freqs);
    let run = |iters| {
        let cfg = RefineConfig {
            max_iters: iters,
            ..RefineConfig::default()
        };
        let m = group_reduce(a, q, 3, RankSpec::BaseRank(1), &cfg).unwrap();
        weighted_objective(a, q, &m).unwrap()
    };
    assert!(run(5) <= run(0));
}

#[test]
fn lossless_pipeline_configuration() {
    let mut r = rng(10);
    let a = gaussian(&mut r, 30, 5);
    let q = zipf_weights(&mut r, 30);
    let model = group_reduce(
        &a,
        &q,
        1,
        RankSpec::Budget(35 * 5),
        &RefineConfig::default(),
    )
    .unwrap();
    assert_eq!(model.partition().ranks(), &[5]);
    let obj = weighted_objective(&a, &q, &model).unwrap();
    assert!(obj <= 1e-20 * brute_weighted(&a, &Matrix::zeros(30, 5), &q));
}

#[test]
fn lowrank_baseline_error_is_tail_energy() {
    let mut r = rng(11);
    let a = gaussian(&mut r, 8, 5);
    let f = lowrank_baseline(&a, 3).unwrap();
    let err = frobenius_error(&a, &f.reconstruct()).unwrap().powi(2);
    assert!(relative_diff(err, tail_energy(&eig_singular_values(&a), 3)) < 1e-9);
}

#[test]
fn prune_to_budget_matches_sort_all_entries() {
    let a = Matrix::from_rows(&[[1.0, -0.1], [0.2, -3.0]]).unwrap();
    let p = prune_to_budget(&a, 6).unwrap();
    let mut kept: Vec<f64> = p.entries.iter().map(|e| e.2).collect();
    kept.sort_by(f64::total_cmp);
    assert_eq!(kept, vec![-3.0, 0.2, 1.0]);
    assert_eq!(p.parameter_count(), 6);

    let mut r = rng(12);
    for _ in 0..20 {
        let (n, d) = (r.random_range(1..10usize), r.random_range(1..10usize));
        // Coarse values so that ties actually occur.
        let m = Matrix::from_fn(n, d, |_, _| r.random_range(-4..=4i32) as f64);
        let budget = r.random_range(0..=(2 * n * d + 3) as u64);
        let mut all: Vec<(f64, usize, usize)> = (0..n)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter(|&(i, j)| m.get(i, j) != 0.0)
            .map(|(i, j)| (m.get(i, j).abs(), i, j))
            .collect();
        all.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        all.truncate((budget / 2) as usize);
        let mut expected: Vec<(usize, usize)> = all.iter().map(|e| (e.1, e.2)).collect();
        expected.sort();
        let p = prune_to_budget(&m, budget).unwrap();
        let mut got: Vec<(usize, usize)> = p.entries.iter().map(|e| (e.0, e.1)).collect();
        got.sort();
        assert_eq!(got, expected);
        assert!(p.parameter_count() <= budget);
    }
}

#[test]
fn quantization_examples() {
    let m = Matrix::new(1, 4, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let q = quantize_uniform(&m, 2).unwrap();
    assert_eq!(q.codes(), &[0, 1, 2, 3]);
    assert_eq!(dequantize(&q).data(), &[0.375, 1.125, 1.875, 2.625]);

    let m = Matrix::new(1, 2, vec![-1.0, 1.0]).unwrap();
    assert_eq!(
        dequantize(&quantize_uniform(&m, 1).unwrap()).data(),
        &[-0.5, 0.5]
    );

    let c = Matrix::from_fn(3, 3, |_, _| 0.7);
    let q = quantize_uniform(&c, 5).unwrap();
    assert!(q.codes().iter().all(|&x| x == 0));
    assert_eq!(dequantize(&q), c);

    let mut r = rng(13);
    let m = gaussian(&mut r, 30, 20);
    let (lo, hi) = m
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let back = dequantize(&quantize_uniform(&m, 8).unwrap());
    let worst = frobenius_error(&m, &back).unwrap();
    assert!(m
        .data()
        .iter()
        .zip(back.data())
        .all(|(x, y)| (x - y).abs() <= (hi - lo) / 512.0 + 1e-15 * hi.abs().max(lo.abs())));
    assert!(worst > 0.0);
}

#[test]
fn sixteen_bit_model_is_close_to_unquantized() {
    let mut r = rng(14);
    let a = gaussian(&mut r, 50, 8);
    let q = zipf_weights(&mut r, 50);
    let model = group_reduce(&a, &q, 3, RankSpec::BaseRank(2), &RefineConfig::default()).unwrap();
    let plain = model.reconstruct_full();
    let quant = quantize_model(&model, 16).unwrap().reconstruct_full();
    assert!(frobenius_error(&plain, &quant).unwrap() <= 1e-3 * plain.frobenius_norm());
}

#[test]
fn error_curve_matches_spectrum_tails() {
    let mut r = rng(15);
    let a = gaussian(&mut r, 20, 9);
    let s = spectrum(&a).unwrap();
    let oracle = eig_singular_values(&a);
    for (x, y) in s.iter().zip(&oracle) {
        assert!((x - y).abs() < 1e-9 * oracle[0]);
    }
    let norm = a.frobenius_norm();
    let ks: Vec<usize> = (0..=9).collect();
    for (k, e) in error_curve(&a, &ks).unwrap() {
        let expected = if k == 0 {
            1.0
        } else {
            tail_energy(&s, k).sqrt() / norm
        };
        assert!((e - expected).abs() < 1e-9, "k={k}: {e} vs {expected}");
    }
    assert!(error_curve(&a, &[10]).is_err());
}

#[test]
fn zipf_slope_and_shapes() {
    let q = FrequencyTable::new(vec![8.0, 4.0, 2.0, 1.0]).unwrap();
    let stats = zipf_stats(&q);
    assert!(stats.windows(2).all(|w| w[1].1 < w[0].1));
    let flat = zipf_stats(&FrequencyTable::uniform(5));
    assert_eq!(loglog_slope(&flat), 0.0);

    let harmonic = FrequencyTable::new((1..=500).map(|i| 1e6 / i as f64).collect()).unwrap();
    assert!((loglog_slope(&zipf_stats(&harmonic)) + 1.0).abs() < 1e-9);
    let inst = gen_zipf_embedding(1000, 8, 2, 0.1, 5).unwrap();
    assert!((loglog_slope(&zipf_stats(&inst.freqs)) + 1.0).abs() <= 0.1);
}

#[test]
fn memory_examples() {
    use groupreduce::metrics::dense_footprint;
    use groupreduce::MemoryFootprint;
    let dense = dense_footprint(10_000, 200);
    assert_eq!(dense.whole_parameters(), Some(2_000_000));
    assert_eq!(dense.bytes(), 8_000_000.0);

    let a = Matrix::from_fn(10, 4, |i, j| (i as f64 + 1.0).powi(j as i32 % 3));
    let clustering =
        Clustering::from_members(vec![(0..5).collect(), (5..10).collect()], 10).unwrap();
    let partition = BlockPartition::new(clustering, vec![2, 1], 4).unwrap();
    let model = fit_blocks(&a, &partition, &FrequencyTable::uniform(10)).unwrap();
    let plain = model.memory_footprint();
    assert_eq!(plain.whole_parameters(), Some(27));
    // Codes at a quarter of the float cost plus two range scalars per factor matrix.
    let q8 = quantize_model(&model, 8).unwrap().memory_footprint();
    assert_eq!(q8.parameter_bits, 27 * 8 + 4 * 2 * 32);
}
