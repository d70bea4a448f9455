//! Acceptance criteria 1 to 11. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::time::{Duration, Instant};

use medax::edt::edt_points;
use medax::fields::{GridSpec, Point2, PointSet2};
use medax::lowtrans::lower_transform_opening;
use medax::verify::{run_criterion, Check, CriterionReport, VerifyOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PERF_N: usize = 1024;
const PERF_LAMBDA: f64 = 1.0;
const SINGLE_THREAD_LIMIT: f64 = 2.0;
const MIN_SPEEDUP: f64 = 2.5;
const REPEATS: usize = 3;

fn best_opening_time(threads: usize) -> Duration {
    let spec = GridSpec::new(0.0, 0.0, 1.0 / (PERF_N - 1) as f64, PERF_N, PERF_N).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let k = PointSet2::new((0..200).map(|_| Point2::new(rng.gen(), rng.gen())));
    let d2 = edt_points(&k, spec).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        (0..REPEATS)
            .map(|_| {
                let t = Instant::now();
                let c = lower_transform_opening(&d2, PERF_LAMBDA).unwrap();
                let dt = t.elapsed();
                assert_eq!(c.values().len(), PERF_N * PERF_N);
                dt
            })
            .min()
            .unwrap()
    })
}

fn performance() -> CriterionReport {
    let t1 = best_opening_time(1).as_secs_f64();
    let t4 = best_opening_time(4).as_secs_f64();
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let checks = vec![
        Check::at_most(format!("{PERF_N}x{PERF_N} opening, 1 thread [s]"), t1, SINGLE_THREAD_LIMIT),
        Check::at_most(format!("1/speedup on 4 threads ({cores} cores available)"), t4 / t1, 1.0 / MIN_SPEEDUP),
    ];
    let passed = checks.iter().all(|c| c.passed);
    CriterionReport { id: 11, title: "performance".into(), checks, passed }
}

fn line(r: &CriterionReport, elapsed: Duration) -> String {
    let status = if r.passed { "PASS" } else { "FAIL" };
    let mut s = format!("criterion {:>2} {status} {} ({:.1}s)", r.id, r.title, elapsed.as_secs_f64());
    let shown = r.worst().or_else(|| r.checks.iter().min_by(|a, b| a.slack.total_cmp(&b.slack)));
    if let Some(c) = shown {
        s.push_str(&format!("; tightest: {} measured {:.4e}", c.name, c.measured));
        match c.target {
            Some(t) => s.push_str(&format!(" target {t:.4e} tol {:.3e}", c.bound)),
            None => s.push_str(&format!(" bound {:.4e}", c.bound)),
        }
        s.push_str(&format!(" slack {:.3e}", c.slack));
    }
    s
}

#[test]
fn acceptance() {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    for id in 1..=11u8 {
        let t = Instant::now();
        let r = if id == 11 { performance() } else { run_criterion(id, &opts).unwrap() };
        println!("{}", line(&r, t.elapsed()));
        if !r.passed {
            for c in r.checks.iter().filter(|c| !c.passed) {
                println!("    failed check: {} measured {:.6e} bound {:.6e} slack {:.3e}", c.name, c.measured, c.bound, c.slack);
            }
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
