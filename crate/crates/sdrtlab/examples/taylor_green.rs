//! Short decaying-vortex run on a coarse hexahedral mesh with the adaptive
//! five-stage integrator: prints the kinetic-energy budget samples.
//!
//! Run with: cargo run --release --example taylor_green
//! (about a minute; the acceptance suite runs the full desk configuration)

use sdrtlab::cases::{run_tgv, TgvConfig};
use sdrtlab::{refelem::ElementKind, Scheme};

fn main() {
    let cfg = TgvConfig {
        n: 8,
        t_end_star: 1.0,
        sample_interval: 0.1,
        ..TgvConfig::desk(ElementKind::Hex, Scheme::Sdrt, 2)
    };
    let res = run_tgv(&cfg).expect("tgv run");
    println!(
        "analytic eps2(0) by cubature: {:.6e} (closed form {:.6e})",
        res.eps2_analytic0, res.eps2_closed_form
    );
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>10}",
        "t*", "<E*>", "eps2", "eps3", "dt"
    );
    for s in &res.samples {
        println!(
            "{:>6.2} {:>12.6e} {:>12.4e} {:>12.4e} {:>10.2e}",
            s.t_star, s.kinetic, s.eps2, s.eps3, s.dt
        );
    }
    match res.diverged {
        Some(t) => println!("diverged at t* = {t:.3}"),
        None => println!("mean dt = {:.3e} over {} steps", res.mean_dt, res.n_steps),
    }
}
