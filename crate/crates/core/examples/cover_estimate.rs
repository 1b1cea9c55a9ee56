// Cover-time estimate |E| (E sup η)² against simulation: binary trees, where
// the ratio drifts toward 1, and the line, where it does not.

use covergff::experiments::estimator::{
    aldous_concentration_experiment, cover_ratio, deepest_vertex, estimate_cover_time, path_worst_start,
    EstimatorConfig,
};
use covergff::graphs;

fn main() -> covergff::Result<()> {
    let tree = graphs::binary_tree(6);
    let est = estimate_cover_time(&tree, &EstimatorConfig { cover_runs: 500, ..EstimatorConfig::default() })?;
    println!(
        "binary depth 6: estimate {:.1} (95% CI {:.1}..{:.1}), t_hit {:.1}, gate {} [{}]",
        est.estimate, est.confidence.0, est.confidence.1, est.t_hit_exact, est.gate_pass, est.gate_label
    );

    for h in [4, 6, 8] {
        let t = graphs::binary_tree(h);
        let p = cover_ratio(&format!("binary-{h}"), &t, deepest_vertex(&t)?, 5000, 400, h as u64)?;
        println!("{:<10} ratio {:.3} ± {:.3}", p.label, p.ratio, p.ratio_stderr);
    }
    let p = cover_ratio("line-60", &graphs::path(60), path_worst_start(60), 5000, 400, 1)?;
    println!("{:<10} ratio {:.3} ± {:.3}  (5π/8 = {:.3})", p.label, p.ratio, p.ratio_stderr, 5.0 * std::f64::consts::PI / 8.0);

    let family: Vec<_> = (3..=6).map(|h| (format!("binary-{h}"), graphs::binary_tree(h))).collect();
    let d = aldous_concentration_experiment(&family, 1000, 2)?;
    for p in &d.points {
        println!("{:<10} sd/mean {:.3}  sqrt(t_hit/t_cov) {:.3}", p.label, p.dispersion, p.hit_cover_scale);
    }
    Ok(())
}
