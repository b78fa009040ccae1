//! Wavenumber aliasing diagnostics: below the aliasing limit the most
//! energetic eigenmode (the physical mode) carries the spectral radius;
//! beyond it the two part ways and long-horizon dissipation drops.
//!
//! Run with: cargo run --release --example aliasing_modes

use sdrtlab::vonneumann::{
    aliasing_limit, combined_mode, eigen_diagnostics, probe_reduced_jacobian, AnalysisIntegrator,
    VnEquation,
};
use sdrtlab::{refelem::ElementKind, Scheme};

fn main() {
    let theta0 = std::f64::consts::FRAC_PI_6;
    let kind = ElementKind::Quad;
    let p = 2;
    let rj = probe_reduced_jacobian(Scheme::FrDg, kind, p, VnEquation::Advection, theta0, 0.0)
        .expect("probe");
    let lim = aliasing_limit(theta0, 0.0, 2);
    println!(
        "aliasing limit: kappa h = {lim:.4} (lambda/h = {:.4})",
        std::f64::consts::TAU / lim
    );
    println!(
        "{:>8} {:>10} {:>22} {:>12} {:>12}",
        "kappa_h", "physical", "is spectral radius?", "D_im(m_c)", "D_im(400m_c)"
    );
    let tau = 0.05;
    let mc = 20u64;
    for frac in [0.3, 0.6, 0.9, 1.1, 1.4, 1.8] {
        let kh = frac * lim;
        let diag = eigen_diagnostics(&rj, kh, AnalysisIntegrator::Exponential, tau).expect("diag");
        let short = combined_mode(&rj, kh, AnalysisIntegrator::Exponential, tau, mc).expect("m_c");
        let long =
            combined_mode(&rj, kh, AnalysisIntegrator::Exponential, tau, 400 * mc).expect("400");
        println!(
            "{:>8.3} {:>10} {:>22} {:>12.3e} {:>12.3e}",
            kh,
            diag.physical,
            if diag.physical_is_radius {
                "yes"
            } else {
                "NO (aliased)"
            },
            short.im_err,
            long.im_err
        );
    }
}
