// Effective resistance, hitting times and network reduction on a small
// weighted network read from the edge-list format.

use covergff::spectral::{effective_resistance, hitting_time, reduce_network, resistance_matrix};
use covergff::load_network;

const EDGES: &str = "\
# u v conductance
0 1 1.0
1 2 2.0
2 3 0.5
3 0 1.5
0 2 0.75
";

fn main() -> covergff::Result<()> {
    let net = load_network(EDGES, 0)?;
    let r = effective_resistance(&net, 1, 3)?;
    let kappa = hitting_time(&net, 1, 3)? + hitting_time(&net, 3, 1)?;
    println!("R_eff(1, 3)            = {r:.6}");
    println!("commute time 1 <-> 3   = {kappa:.6}");
    println!("c_sum * R_eff          = {:.6}", net.conductance_sum() * r);

    // keep vertices 0, 1, 3: resistances among them are unchanged
    let reduced = reduce_network(&net, &[0, 1, 3])?;
    println!("reduced R_eff(1, 2)    = {:.6}", effective_resistance(&reduced, 1, 2)?);
    println!("\nresistance matrix:\n{:.4}", resistance_matrix(&net)?);
    Ok(())
}
