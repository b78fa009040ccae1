//! Combined-mode dissipation/dispersion error orders with exponential time
//! integration: fit the log-log slope of the error measures against cells
//! per wavelength over the well-resolved range.
//!
//! Run with: cargo run --release --example dissipation_orders

use sdrtlab::vonneumann::{
    combined_mode, fit_order_slope, probe_reduced_jacobian, AnalysisIntegrator, VnEquation,
};
use sdrtlab::{refelem::ElementKind, Scheme};

fn main() {
    let theta0 = std::f64::consts::FRAC_PI_6;
    let tau = 0.05;
    let m = 20; // one cell-traversal time
    let lambda_over_h: Vec<f64> = (0..9).map(|i| 8.0 * 2f64.powf(i as f64 / 4.0)).collect();
    println!(
        "{:<6} {:<5} {:>2} {:>12} {:>12}",
        "scheme", "etype", "p", "diss_slope", "disp_slope"
    );
    for kind in [ElementKind::Quad, ElementKind::Tri] {
        for scheme in [Scheme::Sdrt, Scheme::FrDg] {
            for p in 1..=2usize {
                let rj =
                    probe_reduced_jacobian(scheme, kind, p, VnEquation::Advection, theta0, 0.0)
                        .expect("probe");
                let mut diss = Vec::new();
                let mut disp = Vec::new();
                for loh in &lambda_over_h {
                    let kh = std::f64::consts::TAU / loh;
                    let cm = combined_mode(&rj, kh, AnalysisIntegrator::Exponential, tau, m)
                        .expect("measure");
                    diss.push((*loh, cm.im_err));
                    disp.push((*loh, cm.re_err));
                }
                println!(
                    "{:<6} {:<5} {:>2} {:>12.2} {:>12.2}   (expect {} and {})",
                    scheme.name(),
                    kind.name(),
                    p,
                    fit_order_slope(&diss),
                    fit_order_slope(&disp),
                    2 * p + 1,
                    if scheme == Scheme::FrDg {
                        2 * p + 2
                    } else {
                        2 * p
                    }
                );
            }
        }
    }
}
