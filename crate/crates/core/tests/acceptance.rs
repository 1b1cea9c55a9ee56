//! End-to-end acceptance run: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Every criterion runs at its pinned budget with its own sub-seed. The
//! process exits non-zero when a criterion fails that is not listed in
//! `KNOWN_GAPS`, or when an independent oracle below disagrees with the
//! library.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use covergff::experiments::criteria::{self, Budget, CriterionOutcome};
use covergff::graphs;
use covergff::isomorphism::baby_iso_laplace;
use covergff::walk::exact_cover_time;

const SEED: u64 = 20_240_611;

/// Criteria whose pinned band is not reachable at the pinned size; they are
/// still run and reported.
///
/// 8: at n = 200 the exact cover time from the centre is 49501 and the mean
/// supremum of the pinned field sits about 0.58 below sqrt(2n/π) (the
/// discrete-walk correction to the Brownian maximum), so the ratio is about
/// 2.19 before any walk noise, above the 2.16 edge of the band.
const KNOWN_GAPS: &[u32] = &[8];

fn oracle(name: &str, ok: bool, detail: String) -> bool {
    println!("       oracle {:<44} {} {detail}", name, if ok { "ok  " } else { "MISMATCH" });
    ok
}

/// Independent closed forms, computed here rather than in the library.
fn oracles(outcomes: &[CriterionOutcome]) -> bool {
    let mut ok = true;

    // E e^{−λ X²/2} for X ~ N(0,1) at λ = 1 is 1/sqrt(2)
    ok &= oracle(
        "Laplace transform at ℓ=0, λ=1",
        (baby_iso_laplace(0.0, 1.0) - FRAC_1_SQRT_2).abs() < 1e-15,
        format!("{:.5}", FRAC_1_SQRT_2),
    );

    // unit path on n vertices from the middle: exit (0, N) after m(N−m)
    // steps, then cross the full length N² — by first-step analysis
    let n = 200usize;
    let big_n = (n - 1) as f64;
    let m = ((n - 1) / 2) as f64;
    let line_exact = m * (big_n - m) + big_n * big_n;
    for small in [3usize, 5, 6] {
        let nn = (small - 1) as f64;
        let mm = ((small - 1) / 2) as f64;
        let (e, _) = exact_cover_time(&graphs::path(small), (small - 1) / 2).expect("small path");
        ok &= oracle(
            &format!("path-{small} cover from centre"),
            (e - (mm * (nn - mm) + nn * nn)).abs() < 1e-9,
            format!("{e:.6}"),
        );
    }
    if let Some(o) = outcomes.iter().find(|o| o.id == 8) {
        let sim = o.detail["estimate"]["simulation"]["mean"].as_f64().unwrap_or(f64::NAN);
        let se = o.detail["estimate"]["simulation"]["stderr"].as_f64().unwrap_or(f64::NAN);
        let sup = o.detail["estimate"]["sup"]["mean_sup"].as_f64().unwrap_or(f64::NAN);
        ok &= oracle(
            "line-200 simulated cover vs exact 49501",
            (sim - line_exact).abs() <= 4.0 * se,
            format!("{sim:.1} ± {se:.1}"),
        );
        // the same ratio with the exact cover time, i.e. with no walk noise
        let exact_ratio = line_exact / (big_n * sup * sup);
        println!(
            "       info   line-200 ratio with exact t_cov: {exact_ratio:.4}; 5π/8 = {:.4}",
            5.0 * PI / 8.0
        );
    }

    // star with k leaves from the centre: coupon collector over k leaves,
    // 2 steps per excursion, minus the final return
    for k in [2usize, 3, 5] {
        let h: f64 = (1..=k).map(|i| 1.0 / i as f64).sum();
        let (e, _) = exact_cover_time(&graphs::star(k), 0).expect("star");
        ok &= oracle(&format!("star-{k} cover = 2kH_k − 1"), (e - (2.0 * k as f64 * h - 1.0)).abs() < 1e-9, format!("{e:.6}"));
    }
    ok
}

fn main() -> ExitCode {
    let budget = Budget::acceptance();
    println!("acceptance: seed {SEED}, {} criteria", criteria::all_criteria().len());
    let mut outcomes = Vec::new();
    let mut unexpected = Vec::new();
    let total = Instant::now();
    for (id, f) in criteria::all_criteria() {
        let started = Instant::now();
        let o = match f(&budget, criteria::criterion_seed(SEED, id)) {
            Ok(o) => o,
            Err(e) => {
                println!("[FAIL] {id:>2} error: {e}");
                unexpected.push(id);
                continue;
            }
        };
        let secs = started.elapsed().as_secs_f64();
        println!(
            "[{}] {:>2} {:<40} {:>7.1}s  {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            secs,
            o.summary
        );
        if !o.pass && !KNOWN_GAPS.contains(&o.id) {
            unexpected.push(o.id);
        }
        outcomes.push(o);
    }
    let oracles_ok = oracles(&outcomes);
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.1}s",
        criteria::all_criteria().len(),
        total.elapsed().as_secs_f64()
    );
    if unexpected.is_empty() && oracles_ok {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}, oracles ok = {oracles_ok}");
        ExitCode::FAILURE
    }
}
