//! Loads the shipped IEEE 39-bus case and prints its structure.

use gridfreq::netmodel::{load_case, NodeKind};

const CASE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee39.json");

fn main() -> gridfreq::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| CASE.to_string());
    let net = load_case(&path)?;
    let agg = net.aggregate_constants();
    println!("{path}");
    println!(
        "  {} nodes ({} machines, {} frequency-dependent, {} passive), {} lines",
        net.n(),
        net.n_machine(),
        net.n_freq(),
        net.n_passive(),
        net.lines().len()
    );
    println!(
        "  M_s = {:.4}, D_s = {:.1}, P_s = {:.3e} p.u. on {} MVA / {} Hz",
        agg.inertia,
        agg.droop,
        agg.imbalance,
        net.base_power(),
        net.base_frequency()
    );
    for node in net.nodes().iter().filter(|n| n.kind == NodeKind::Machine) {
        let alpha = node.controller.map_or(f64::NAN, |c| c.alpha);
        println!(
            "  machine {:>2}: M = {:.5}, D = {}, P = {:+.4}, alpha = {}",
            node.id, node.inertia, node.droop, node.injection, alpha
        );
    }
    if let Some(part) = net.partition() {
        for (r, area) in part.areas().iter().enumerate() {
            let lines = part.boundary_lines(r)?;
            println!(
                "  area {}: {} nodes, {} boundary lines, nominal export {:+.3}",
                area.name,
                area.nodes.len(),
                lines.len(),
                area.nominal_export
            );
        }
    }
    Ok(())
}
