//! Temporal stability bounds (tau_max) for the 2D elements at theta0 = pi/6:
//! a desk-sized slice of the advection stability tables.
//!
//! Run with: cargo run --release --example stability_bounds

use sdrtlab::solver::Integrator;
use sdrtlab::vonneumann::{probe_reduced_jacobian, tau_max, TauMax, VnEquation};
use sdrtlab::{refelem::ElementKind, Scheme};

fn main() {
    let theta0 = std::f64::consts::FRAC_PI_6;
    println!(
        "{:<6} {:<5} {:>2} {:>8} {:>8} {:>8}",
        "scheme", "etype", "p", "rk3", "rk4", "rk54"
    );
    for kind in [ElementKind::Quad, ElementKind::Tri] {
        for scheme in [Scheme::Sdrt, Scheme::FrDg] {
            for p in 1..=2 {
                let rj =
                    probe_reduced_jacobian(scheme, kind, p, VnEquation::Advection, theta0, 0.0)
                        .expect("probe");
                let mut taus = Vec::new();
                for integ in [Integrator::Rk3, Integrator::Rk4, Integrator::Rk54] {
                    match tau_max(&rj, integ, 200).expect("tau_max") {
                        TauMax::Stable(t) => taus.push(format!("{t:.4}")),
                        TauMax::SpatiallyUnstable(_) => taus.push("unstab".into()),
                    }
                }
                println!(
                    "{:<6} {:<5} {:>2} {:>8} {:>8} {:>8}",
                    scheme.name(),
                    kind.name(),
                    p,
                    taus[0],
                    taus[1],
                    taus[2]
                );
            }
        }
    }
}
