//! Isentropic vortex transport under the Euler equations: free-stream
//! preservation plus a small two-resolution convergence check.
//!
//! Run with: cargo run --release --example euler_vortex
//! (a few minutes; the acceptance suite runs the full-size version)

use sdrtlab::cases::{free_stream_error, observed_order, run_euler_vortex, VortexConfig};
use sdrtlab::Scheme;

fn main() {
    let base = VortexConfig {
        degree: 3,
        scheme: Scheme::Sdrt,
        m: 2,
        dt: 5e-3,
        ..Default::default()
    };

    let fs = free_stream_error(
        &VortexConfig {
            n: 8,
            ..base.clone()
        },
        50,
    )
    .expect("free stream");
    println!("free-stream drift after 50 steps: {fs:.3e}");

    let mut results = Vec::new();
    for n in [10usize, 20] {
        let cfg = VortexConfig { n, ..base.clone() };
        let res = run_euler_vortex(&cfg).expect("vortex run");
        println!(
            "n = {:>3}: density L2 = {:.4e}  ({} steps, {:.1}s)",
            n, res.l2_density, res.n_steps, res.wall_seconds
        );
        results.push((n, res.l2_density));
    }
    let order = observed_order(results[0].1, results[1].1, results[0].0, results[1].0);
    println!("observed order: {order:.2}");
}
