//! Linear advection-diffusion convergence at Peclet 10: L2 errors and
//! observed orders for the 2D elements at p = 3.
//!
//! Run with: cargo run --release --example advdiff_convergence

use sdrtlab::cases::{observed_order, run_linadvdiff, LinAdvDiffConfig};
use sdrtlab::{refelem::ElementKind, Scheme};

fn main() {
    println!(
        "{:<6} {:<5} {:>4} {:>14} {:>8}",
        "scheme", "etype", "N", "L2", "order"
    );
    for kind in [ElementKind::Quad, ElementKind::Tri] {
        for scheme in [Scheme::Sdrt, Scheme::FrDg] {
            let mut prev: Option<(usize, f64)> = None;
            for n in [10usize, 20] {
                let mut cfg = LinAdvDiffConfig::benchmark_defaults(kind, scheme, n);
                cfg.spectral = true; // block-circulant fast path
                let res = run_linadvdiff(&cfg).expect("run");
                let order = prev
                    .map(|(pn, pl2)| format!("{:.2}", observed_order(pl2, res.l2, pn, n)))
                    .unwrap_or_else(|| "-".into());
                println!(
                    "{:<6} {:<5} {:>4} {:>14.4e} {:>8}",
                    scheme.name(),
                    kind.name(),
                    n,
                    res.l2,
                    order
                );
                prev = Some((n, res.l2));
            }
        }
    }
}
