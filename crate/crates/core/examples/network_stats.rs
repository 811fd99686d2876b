//! Summary statistics for the bundled networks, plus a hand-written edge list.
//!
//! Run with `cargo run --example network_stats`.

use cidnet::datasets::{load_bundled, summary_stats, DATASETS};
use cidnet::graph::{degrees, parse_edge_list, ParseOptions};

fn main() -> cidnet::Result<()> {
    println!("network,nodes,edges,density,reciprocity");
    for ds in DATASETS {
        match load_bundled(ds.name) {
            Ok(net) => println!("{}", summary_stats(&net)?.row(ds.name)),
            Err(e) => eprintln!("{}: {e}", ds.name),
        }
    }

    let net = parse_edge_list("a,b\nb,a\nb,c\nc,d\n", &ParseOptions::directed(true))?;
    println!("{}", summary_stats(&net)?.row("inline"));
    let deg = degrees(&net);
    for i in 0..net.node_count() {
        println!("  {} out={} in={}", net.label(i), deg.out_degree[i], deg.in_degree[i]);
    }
    Ok(())
}
