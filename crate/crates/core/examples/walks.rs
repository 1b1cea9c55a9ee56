// Continuous-time random walk: cover times against the exact absorbing-chain
// value and walks run to the inverse local time τ(t).

use covergff::graphs;
use covergff::stats::Welford;
use covergff::walk::{cover_time_runs, exact_cover_time, inverse_local_time_runs, Backend};

fn main() -> covergff::Result<()> {
    let net = graphs::cycle(6);
    let (exact, exact_return) = exact_cover_time(&net, 0)?;
    let runs = cover_time_runs(&net, 0, 50_000, 1)?;
    let cover: Welford = runs.iter().map(|r| r.0).collect();
    let back: Welford = runs.iter().map(|r| r.1).collect();
    println!("cycle-6 cover time      {:.3} ± {:.3}   exact {exact:.3}", cover.mean(), cover.stderr());
    println!("cover and return        {:.3} ± {:.3}   exact {exact_return:.3}", back.mean(), back.stderr());

    // E τ(t) = t · Σ_v c_v and E L^v_{τ(t)} = t at every vertex
    let t = 2.0;
    for backend in [Backend::EventDriven, Backend::Excursion] {
        let ilt = inverse_local_time_runs(&net, t, 20_000, backend, 2)?;
        let tau: Welford = ilt.iter().map(|r| r.total_time).collect();
        let l3: Welford = ilt.iter().map(|r| r.local_times[3]).collect();
        println!(
            "{backend:?}: E τ(2) ≈ {:.3} (exact {}), E L^3 ≈ {:.3}",
            tau.mean(),
            t * net.conductance_sum(),
            l3.mean()
        );
    }
    Ok(())
}
