//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantities (run with `--nocapture` to see them).
//!
//! Oracles in this file are written independently of the library paths
//! they check: scalar straight-line forward passes, explicit double
//! loops for the objective, naive double centering for the distance
//! correlation, and plain integer arithmetic for the architecture
//! formulas.
//!
//! The replication tests (criteria 5, 6, and 8) train full-size models
//! and take tens of minutes combined on one core.

#![allow(clippy::needless_range_loop)] // oracles use straight-line index loops

use benn::belt::{build_benn, extract_linear_basis};
use benn::checkpoint::Checkpoint;
use benn::datagen::{gen_linear, gen_model_d, save_csv};
use benn::ensemble::{apply_ensemble, build_gauss_ensemble, EnsembleMatrix, EnsembleSpec};
use benn::error::Result;
use benn::gsir::{gsir_fit, GsirConfig};
use benn::metrics::{distance_correlation, ensemble_mse, projection_distance};
use benn::network::{Activation, BeltMode, BennModel, DenseNet, StructuralParams};
use benn::rng;
use benn::trainer::{empirical_loss, fit, gradient, predict_sufficient, Optimizer, TrainConfig};
use benn::tuning::{depth_width, optimal_exponents, ArchitectureDrivers};
use ndarray::Array2;
use rand_chacha::rand_core::RngCore;
use std::time::Instant;

// ---------------------------------------------------------------------
// independent oracles
// ---------------------------------------------------------------------

/// Scalar forward pass written with nothing but nested loops.
fn oracle_forward(net: &DenseNet, input: &[f64]) -> Vec<f64> {
    let mut a = input.to_vec();
    for (li, layer) in net.layers.iter().enumerate() {
        let mut z = vec![0.0; layer.out_dim()];
        for r in 0..layer.out_dim() {
            let mut s = layer.bias[r];
            for c in 0..layer.in_dim() {
                s += layer.weights[[r, c]] * a[c];
            }
            z[r] = s;
        }
        if li + 1 < net.layers.len() && net.activation == Activation::ReluOnHidden {
            for v in &mut z {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        a = z;
    }
    a
}

/// The objective as a literal double loop: sum over samples and ensemble
/// components of the squared truncated residual, rescaled by tau/(n m).
fn oracle_objective(
    model: &BennModel,
    x: &Array2<f64>,
    g: &Array2<f64>,
    tau: f64,
    truncation: Option<f64>,
) -> f64 {
    let (n, m) = (x.nrows(), g.ncols());
    let mut total = 0.0;
    for i in 0..n {
        let xi: Vec<f64> = x.row(i).to_vec();
        let z = oracle_forward(&model.reducer, &xi);
        let yhat = oracle_forward(&model.regressor, &z);
        for j in 0..m {
            let mut pred = yhat[j];
            if let Some(b) = truncation {
                pred = pred.clamp(-b, b);
            }
            let r = g[[i, j]] - pred;
            total += r * r;
        }
    }
    tau / (n * m) as f64 * total
}

/// Distance correlation by the book: full distance matrices, explicit
/// double centering, mean products.
fn oracle_dcor(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let dist = |x: &Array2<f64>| -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..x.ncols() {
                    s += (x[[i, k]] - x[[j, k]]).powi(2);
                }
                m[i][j] = s.sqrt();
            }
        }
        m
    };
    let center = |m: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let row: Vec<f64> = m.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
        let col: Vec<f64> = (0..n)
            .map(|j| m.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let grand = row.iter().sum::<f64>() / n as f64;
        (0..n)
            .map(|i| (0..n).map(|j| m[i][j] - row[i] - col[j] + grand).collect())
            .collect()
    };
    let da = center(&dist(a));
    let db = center(&dist(b));
    let mean_prod = |u: &[Vec<f64>], v: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += u[i][j] * v[i][j];
            }
        }
        s / (n * n) as f64
    };
    let cov = mean_prod(&da, &db);
    let va = mean_prod(&da, &da);
    let vb = mean_prod(&db, &db);
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    (cov / (va * vb).sqrt()).max(0.0).sqrt()
}

/// Integer floor root by counting: the largest r with r^k <= n.
fn oracle_root(n: u128, k: u32) -> u128 {
    let mut r = 0u128;
    while (r + 1).checked_pow(k).is_some_and(|p| p <= n) {
        r += 1;
    }
    r
}

fn random_model(seed: u64, p: usize, d: usize, max_width: usize, m: usize) -> BennModel {
    let mut r = rng::stream(seed);
    let pick = |r: &mut rand_chacha::ChaCha20Rng, lo: usize, hi: usize| {
        lo + (r.next_u64() as usize) % (hi - lo + 1)
    };
    let l1 = pick(&mut r, 0, 2);
    let l2 = pick(&mut r, 0, 2);
    let k1: Vec<usize> = (0..l1).map(|_| pick(&mut r, 1, max_width)).collect();
    let k2: Vec<usize> = (0..l2).map(|_| pick(&mut r, 1, max_width)).collect();
    let params = StructuralParams::new(p, k1, d, k2, m).unwrap();
    let mut model = build_benn(BeltMode::NonlinearCs, &params, seed ^ 0xA5).unwrap();
    // randomize every parameter (including biases) away from zero
    let flat: Vec<f64> = (0..model.param_count())
        .map(|_| rng::uniform(&mut r, -0.9, 0.9))
        .collect();
    model.set_params_flat(&flat).unwrap();
    model
}

fn random_matrix(seed: u64, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    let mut r = rng::stream(seed);
    Array2::from_shape_fn((rows, cols), |_| scale * rng::standard_normal(&mut r))
}

// ---------------------------------------------------------------------
// criterion 1: gradient correctness
// ---------------------------------------------------------------------

/// Smallest |pre-activation| across hidden ReLU units of both networks,
/// and smallest ||prediction| - bound| when a truncation bound is given;
/// used to keep finite differences away from kinks.
fn kink_clearance(model: &BennModel, x: &Array2<f64>, truncation: Option<f64>) -> f64 {
    let mut clearance = f64::INFINITY;
    let mut scan = |net: &DenseNet, inputs: &Array2<f64>| -> Array2<f64> {
        let mut a = inputs.clone();
        let last = net.layers.len() - 1;
        for (li, layer) in net.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weights.t());
            z += &layer.bias;
            if li < last && net.activation == Activation::ReluOnHidden {
                for v in z.iter() {
                    clearance = clearance.min(v.abs());
                }
                z.mapv_inplace(|v| v.max(0.0));
            }
            a = z;
        }
        a
    };
    let z = scan(&model.reducer, x);
    let yhat = scan(&model.regressor, &z);
    if let Some(b) = truncation {
        for v in yhat.iter() {
            clearance = clearance.min((v.abs() - b).abs());
        }
    }
    clearance
}

#[test]
fn criterion_1_gradient_matches_finite_differences() {
    let started = Instant::now();
    let mut master = rng::stream(0xC1);
    let mut checked_params = 0usize;
    let mut instances = 0usize;
    while instances < 50 {
        let seed = master.next_u64();
        let mut r = rng::stream(seed);
        let pick = |r: &mut rand_chacha::ChaCha20Rng, lo: usize, hi: usize| {
            lo + (r.next_u64() as usize) % (hi - lo + 1)
        };
        let p = pick(&mut r, 2, 5);
        let d = pick(&mut r, 1, 2.min(p - 1));
        let m = pick(&mut r, 1, 4);
        let truncation = if instances % 2 == 0 { None } else { Some(0.8) };

        let model = random_model(seed ^ 0x11, p, d, 6, m);
        let n = pick(&mut r, 2, 6);

        // resample data until every unit is clear of its kink
        let mut found = None;
        for attempt in 0..40 {
            let x = random_matrix(seed ^ (attempt + 2), n, p, 1.0);
            if kink_clearance(&model, &x, truncation) > 1e-5 {
                found = Some(x);
                break;
            }
        }
        let Some(x) = found else { continue };
        instances += 1;

        let g = random_matrix(seed ^ 0x77, n, m, 0.7);
        let gm = EnsembleMatrix {
            values: g,
            tau: 0.5 + (seed % 4) as f64 * 0.4,
        };
        let analytic = gradient(&model, &x, &gm, truncation).unwrap().flat();

        let h = 1e-6;
        let base = model.params_flat();
        let mut probe = model.clone();
        for k in 0..analytic.len() {
            let mut plus = base.clone();
            plus[k] += h;
            probe.set_params_flat(&plus).unwrap();
            let lp = empirical_loss(&probe, &x, &gm, truncation).unwrap();
            let mut minus = base.clone();
            minus[k] -= h;
            probe.set_params_flat(&minus).unwrap();
            let lm = empirical_loss(&probe, &x, &gm, truncation).unwrap();
            let fd = (lp - lm) / (2.0 * h);
            let a = analytic[k];
            // The central difference of a summed loss carries ~1e-10 of
            // cancellation roundoff at step 1e-6, so gradients below that
            // scale are compared absolutely.
            let abs_err = (a - fd).abs();
            let rel = abs_err / a.abs().max(fd.abs()).max(1e-8);
            assert!(
                rel <= 1e-4 || abs_err <= 1e-9,
                "criterion 1: instance {instances} parameter {k}: analytic {a}, \
                 finite difference {fd}, relative error {rel}"
            );
            checked_params += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 1 took {secs:.1}s, budget is 60s");
    println!(
        "criterion 1 (gradient vs finite differences): PASS — 50 instances, \
         {checked_params} parameters, {secs:.1}s"
    );
}

// ---------------------------------------------------------------------
// criterion 2: objective oracle equivalence
// ---------------------------------------------------------------------

#[test]
fn criterion_2_objective_matches_double_loop() {
    let mut master = rng::stream(0xC2);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let seed = master.next_u64();
        let mut r = rng::stream(seed);
        let pick = |r: &mut rand_chacha::ChaCha20Rng, lo: usize, hi: usize| {
            lo + (r.next_u64() as usize) % (hi - lo + 1)
        };
        let n = pick(&mut r, 1, 20);
        let m = pick(&mut r, 1, 5);
        let p = pick(&mut r, 2, 5);
        let d = pick(&mut r, 1, p - 1);
        let truncation = if i % 3 == 0 { Some(0.6) } else { None };

        let model = random_model(seed ^ 0x21, p, d, 5, m);
        let x = random_matrix(seed ^ 0x22, n, p, 1.2);
        let g = random_matrix(seed ^ 0x23, n, m, 0.8);
        let tau = 0.3 + (seed % 7) as f64 * 0.33;

        let got = empirical_loss(
            &model,
            &x,
            &EnsembleMatrix {
                values: g.clone(),
                tau,
            },
            truncation,
        )
        .unwrap();
        let want = oracle_objective(&model, &x, &g, tau, truncation);
        let rel = (got - want).abs() / want.abs().max(1e-300);
        worst = worst.max(rel);
        assert!(
            rel <= 1e-12,
            "criterion 2: instance {i}: loss {got} vs oracle {want}, relative error {rel}"
        );
    }

    // Held-out error agrees with the same double loop on fresh data, with
    // the ensemble transforms applied per sample.
    for i in 0..20 {
        let seed = 0xBEEF + i;
        let train = gen_model_d(30, 4, seed).unwrap();
        let test = gen_model_d(12, 4, seed ^ 1).unwrap();
        let spec = build_gauss_ensemble(&train.y, 4, seed ^ 2).unwrap();
        let params = StructuralParams::constant_width(4, 1, 5, 1, 1, 5, 4).unwrap();
        let truncation = if i % 2 == 0 { Some(1.0) } else { None };
        let cfg = TrainConfig {
            epochs: 2,
            batch_size: 10,
            truncation,
            ..TrainConfig::default_for(30, seed ^ 3)
        };
        let fitted = fit(
            &train.x,
            &train.y,
            BeltMode::NonlinearCs,
            &params,
            &spec,
            &cfg,
        )
        .unwrap();

        let got = ensemble_mse(&fitted, &test.x, &test.y).unwrap();
        let mut g = Array2::zeros((12, 4));
        for row in 0..12 {
            let vals = apply_ensemble(&spec, test.y[row]);
            for col in 0..4 {
                g[[row, col]] = vals[col];
            }
        }
        let want = oracle_objective(&fitted.model, &test.x, &g, spec.tau, truncation);
        let rel = (got - want).abs() / want.abs().max(1e-300);
        worst = worst.max(rel);
        assert!(
            rel <= 1e-12,
            "criterion 2: held-out instance {i}: {got} vs {want}, relative error {rel}"
        );
    }
    println!(
        "criterion 2 (objective vs double-loop oracle): PASS — 120 instances, \
         worst relative error {worst:.2e}"
    );
}

// ---------------------------------------------------------------------
// criterion 3: distance-correlation oracle
// ---------------------------------------------------------------------

#[test]
fn criterion_3_distance_correlation_oracle() {
    let mut master = rng::stream(0xC3);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let seed = master.next_u64();
        let mut r = rng::stream(seed);
        let pick = |r: &mut rand_chacha::ChaCha20Rng, lo: usize, hi: usize| {
            lo + (r.next_u64() as usize) % (hi - lo + 1)
        };
        let n = pick(&mut r, 2, 50);
        let a = random_matrix(seed ^ 0x31, n, pick(&mut r, 1, 3), 1.0);
        let b = random_matrix(seed ^ 0x32, n, pick(&mut r, 1, 3), 2.0);
        let got = distance_correlation(&a, &b).unwrap();
        assert!(!got.degenerate);
        let want = oracle_dcor(&a, &b);
        let err = (got.value - want).abs();
        worst = worst.max(err);
        assert!(
            err <= 1e-10,
            "criterion 3: instance {i}: {} vs oracle {want}, error {err}",
            got.value
        );
    }

    // dCor(A, A) = 1 for non-constant samples.
    let a = random_matrix(0x33, 15, 2, 1.0);
    let self_dcor = distance_correlation(&a, &a).unwrap();
    assert!((self_dcor.value - 1.0).abs() < 1e-12);

    // Degenerate convention: constant sample reports 0 with the flag.
    let constant = Array2::from_elem((8, 1), 3.25);
    let b = random_matrix(0x34, 8, 1, 1.0);
    let degenerate = distance_correlation(&constant, &b).unwrap();
    assert!(degenerate.degenerate && degenerate.value == 0.0);

    println!(
        "criterion 3 (distance correlation vs naive oracle): PASS — 100 instances, \
         worst error {worst:.2e}; dCor(A,A)=1 and degenerate convention hold"
    );
}

// ---------------------------------------------------------------------
// criterion 4: architecture formulas
// ---------------------------------------------------------------------

#[test]
fn criterion_4_architecture_formulas_exhaustive() {
    let mut cells = 0usize;
    for depth in 1..=20usize {
        for width in 1..=20usize {
            for p in 1..=10usize {
                for d in 1..=10usize {
                    for m in 1..=10usize {
                        let (l1, r1, l2, r2) = depth_width(
                            &ArchitectureDrivers {
                                depth_f: depth,
                                width_f: width,
                                depth_h: depth,
                                width_h: width,
                            },
                            p,
                            d,
                            m,
                        )
                        .unwrap();
                        let l_expect = 12 * depth + 14;
                        let r1_expect = (4 * p as u128 * oracle_root(width as u128, p as u32)
                            + 3 * p as u128)
                            .max(12 * d as u128 * width as u128 + 8 * d as u128);
                        let r2_expect = (4 * d as u128 * oracle_root(width as u128, d as u32)
                            + 3 * d as u128)
                            .max(12 * m as u128 * width as u128 + 8 * m as u128);
                        assert_eq!(l1, l_expect);
                        assert_eq!(l2, l_expect);
                        assert_eq!(r1 as u128, r1_expect, "p={p} d={d} width={width}");
                        assert_eq!(r2 as u128, r2_expect, "d={d} m={m} width={width}");
                        cells += 1;
                    }
                }
            }
        }
    }

    let mut pairs = 0usize;
    for p in 3..=100usize {
        for d in 1..=(p - 2) {
            let e = optimal_exponents(p, d).unwrap();
            let (pf, df) = (p as f64, d as f64);
            assert!((e.ensemble - pf / ((pf + 2.0) * (df + 2.0))).abs() <= 1e-12);
            assert!((e.depth_f + e.width_f - pf / (2.0 * pf + 4.0)).abs() <= 1e-12);
            assert!((e.depth_f - e.depth_h).abs() <= 1e-12);
            assert!((e.width_f - e.width_h - e.ensemble).abs() <= 1e-12);
            assert!(
                e.ensemble >= 0.0 && e.width_h >= 0.0 && e.depth_f >= 0.0,
                "negative exponent at p={p}, d={d}"
            );
            pairs += 1;
        }
    }
    println!(
        "criterion 4 (architecture formulas): PASS — {cells} depth/width cells, \
         {pairs} exponent pairs"
    );
}

// ---------------------------------------------------------------------
// criteria 5 and 6: replication on the heteroscedastic benchmark
// ---------------------------------------------------------------------

enum Family {
    Gauss(usize),
    Identity,
}

/// One replicate of the benchmark protocol: train on n, score the test
/// distance correlation between fitted and true sufficient predictors.
fn replicate_d4(n_train: usize, n_test: usize, family: &Family, epochs: usize, rep_seed: u64) -> f64 {
    let p = 50;
    let train = gen_model_d(n_train, p, rng::derive_seed(rep_seed, 0)).unwrap();
    let test = gen_model_d(n_test, p, rng::derive_seed(rep_seed, 1)).unwrap();
    let (spec, m) = match family {
        Family::Gauss(m) => (
            build_gauss_ensemble(&train.y, *m, rng::derive_seed(rep_seed, 2)).unwrap(),
            *m,
        ),
        Family::Identity => (EnsembleSpec::identity(), 1),
    };
    let params = StructuralParams::constant_width(p, 2, 50, 1, 1, 2000, m).unwrap();
    let cfg = TrainConfig {
        epochs,
        batch_size: 128,
        learning_rate: 1e-2,
        optimizer: Optimizer::adam(),
        seed: rng::derive_seed(rep_seed, 3),
        truncation: None,
        weight_clip: None,
        shuffle: true,
        workers: 1,
    };
    let fitted = fit(&train.x, &train.y, BeltMode::NonlinearCs, &params, &spec, &cfg).unwrap();
    let trace = &fitted.loss_trace;
    assert!(
        trace.last().unwrap() <= trace.first().unwrap(),
        "final-epoch loss above initial loss in a seeded run"
    );
    let z = predict_sufficient(&fitted, &test.x).unwrap();
    distance_correlation(&z, test.truth.as_ref().unwrap())
        .unwrap()
        .value
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn criterion_5_table_reproduction_n2000() {
    let reps = 10;
    let gauss: Vec<f64> = (0..reps)
        .map(|k| {
            replicate_d4(
                2000,
                1000,
                &Family::Gauss(1000),
                150,
                rng::derive_seed(0x501, k),
            )
        })
        .collect();
    let identity: Vec<f64> = (0..reps)
        .map(|k| replicate_d4(2000, 1000, &Family::Identity, 150, rng::derive_seed(0x502, k)))
        .collect();

    let (mg, mi) = (mean(&gauss), mean(&identity));
    assert!(
        (mg - 0.55).abs() <= 0.08,
        "criterion 5: kernel-ensemble mean dcor {mg:.3} outside 0.55 +/- 0.08 ({gauss:?})"
    );
    assert!(
        (mi - 0.52).abs() <= 0.08,
        "criterion 5: identity-ensemble mean dcor {mi:.3} outside 0.52 +/- 0.08 ({identity:?})"
    );
    println!(
        "criterion 5 (n=2000 replication): PASS — kernel-ensemble mean dcor {mg:.3} \
         (target 0.55 +/- 0.08), identity mean dcor {mi:.3} (target 0.52 +/- 0.08)"
    );
}

#[test]
fn criterion_6_accuracy_grows_with_sample_size() {
    let reps = 5;
    let small: Vec<f64> = (0..reps)
        .map(|k| {
            replicate_d4(
                1000,
                1000,
                &Family::Gauss(1000),
                150,
                rng::derive_seed(0x601, k),
            )
        })
        .collect();
    let large: Vec<f64> = (0..reps)
        .map(|k| {
            replicate_d4(
                4000,
                1000,
                &Family::Gauss(1000),
                150,
                rng::derive_seed(0x602, k),
            )
        })
        .collect();
    let (ms, ml) = (mean(&small), mean(&large));
    assert!(
        ml - ms >= 0.1,
        "criterion 6: mean dcor {ml:.3} at n=4000 does not exceed {ms:.3} at n=1000 by 0.1 \
         ({small:?} vs {large:?})"
    );
    println!(
        "criterion 6 (monotone accuracy): PASS — mean dcor {ms:.3} at n=1000 -> {ml:.3} at n=4000"
    );
}

// ---------------------------------------------------------------------
// criterion 7: linear recovery
// ---------------------------------------------------------------------

#[test]
fn criterion_7_linear_subspace_recovery() {
    let mut hits = 0usize;
    let mut dists = Vec::new();
    for k in 0..5u64 {
        let seed = rng::derive_seed(0x701, k);
        let ds = gen_linear(500, 10, 1, 0.2, seed).unwrap();
        let params = StructuralParams::constant_width(10, 0, 1, 1, 2, 32, 20).unwrap();
        let spec = build_gauss_ensemble(&ds.y, 20, rng::derive_seed(seed, 5)).unwrap();
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 5e-3,
            seed: rng::derive_seed(seed, 6),
            ..TrainConfig::default_for(500, 0)
        };
        let fitted = fit(&ds.x, &ds.y, BeltMode::LinearCs, &params, &spec, &cfg).unwrap();
        let estimated = extract_linear_basis(&fitted.model).unwrap();
        let dist = projection_distance(&estimated, ds.truth_basis.as_ref().unwrap()).unwrap();
        if dist < 0.3 {
            hits += 1;
        }
        dists.push(dist);
    }
    assert!(
        hits >= 4,
        "criterion 7: only {hits}/5 seeds recovered the span (distances {dists:?})"
    );
    println!(
        "criterion 7 (linear recovery): PASS — {hits}/5 seeds below 0.3 \
         (distances {:?})",
        dists.iter().map(|d| (d * 1e3).round() / 1e3).collect::<Vec<_>>()
    );
}

// ---------------------------------------------------------------------
// criterion 8: speed scaling against the kernel baseline
// ---------------------------------------------------------------------

#[test]
fn criterion_8_network_outruns_kernel_baseline() {
    let p = 50;

    let benn_time = |n: usize| -> f64 {
        let train = gen_model_d(n, p, rng::derive_seed(0x801, n as u64)).unwrap();
        let params = StructuralParams::constant_width(p, 2, 50, 1, 1, 200, 100).unwrap();
        let spec = build_gauss_ensemble(&train.y, 100, 3).unwrap();
        let cfg = TrainConfig {
            epochs: 30,
            ..TrainConfig::default_for(n, 5)
        };
        let t = Instant::now();
        fit(&train.x, &train.y, BeltMode::NonlinearCs, &params, &spec, &cfg).unwrap();
        t.elapsed().as_secs_f64()
    };
    let gsir_time = |n: usize| -> f64 {
        let train = gen_model_d(n, p, rng::derive_seed(0x802, n as u64)).unwrap();
        let t = Instant::now();
        gsir_fit(&train.x, &train.y, &GsirConfig::new(2)).unwrap();
        t.elapsed().as_secs_f64()
    };

    let (b1, b4) = (benn_time(1000), benn_time(4000));
    let (g1, g4) = (gsir_time(1000), gsir_time(4000));
    let benn_ratio = b4 / b1;
    let gsir_ratio = g4 / g1;

    assert!(
        b4 < g4,
        "criterion 8: network took {b4:.1}s at n=4000, kernel baseline {g4:.1}s"
    );
    assert!(
        gsir_ratio > 8.0,
        "criterion 8: kernel time ratio {gsir_ratio:.1} (t4000={g4:.1}s / t1000={g1:.1}s) not > 8"
    );
    assert!(
        benn_ratio < 8.0,
        "criterion 8: network time ratio {benn_ratio:.1} (t4000={b4:.1}s / t1000={b1:.1}s) not < 8"
    );
    println!(
        "criterion 8 (speed scaling): PASS — network {b1:.1}s -> {b4:.1}s (ratio {benn_ratio:.1}), \
         kernel {g1:.1}s -> {g4:.1}s (ratio {gsir_ratio:.1})"
    );
}

// ---------------------------------------------------------------------
// criterion 9: determinism and serialization
// ---------------------------------------------------------------------

#[test]
fn criterion_9_determinism_and_serialization() -> Result<()> {
    // identical seeds give bit-identical fits and checkpoints
    let train = gen_model_d(120, 6, 91)?;
    let params = StructuralParams::constant_width(6, 1, 10, 2, 1, 20, 8)?;
    let spec = build_gauss_ensemble(&train.y, 8, 17)?;
    let cfg = TrainConfig {
        epochs: 15,
        batch_size: 32,
        truncation: Some(1.0),
        ..TrainConfig::default_for(120, 23)
    };
    let run = || fit(&train.x, &train.y, BeltMode::NonlinearCs, &params, &spec, &cfg);
    let (a, b) = (run()?, run()?);
    assert_eq!(a.model.params_flat(), b.model.params_flat());
    assert_eq!(a.loss_trace, b.loss_trace);

    let json_a = Checkpoint::from_fit(&a).to_json()?;
    let json_b = Checkpoint::from_fit(&b).to_json()?;
    assert_eq!(json_a, json_b, "checkpoints of identical runs differ");

    // round-trip preserves every parameter exactly
    let restored = Checkpoint::from_json(&json_a)?.to_model()?;
    assert_eq!(restored.params_flat(), a.model.params_flat());

    // generated datasets are byte-reproducible
    let dir = tempfile::tempdir()?;
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    save_csv(&gen_model_d(200, 7, 1234)?, &p1)?;
    save_csv(&gen_model_d(200, 7, 1234)?, &p2)?;
    let (bytes1, bytes2) = (std::fs::read(&p1)?, std::fs::read(&p2)?);
    assert_eq!(bytes1, bytes2, "generated CSV files differ byte for byte");

    println!(
        "criterion 9 (determinism and serialization): PASS — bit-identical fits, \
         exact checkpoint round-trip, byte-identical simulation output"
    );
    Ok(())
}
