//! Conditioning report for the solution and flux Vandermonde matrices; the
//! prism flux basis is the ill-conditioned one and is worth watching as the
//! degree grows.
//!
//! Run with: cargo run --release --example basis_report

use sdrtlab::refelem::ElementKind;
use sdrtlab::report::basis_report;

fn main() {
    let entries = basis_report(&ElementKind::all(), &[1, 2, 3, 4]).expect("report");
    println!(
        "{:<6} {:>2} {:>14} {:>14}",
        "etype", "p", "cond V(sol)", "cond V(flux)"
    );
    for e in &entries {
        println!(
            "{:<6} {:>2} {:>14.3e} {:>14.3e}{}",
            e.etype,
            e.p,
            e.cond_solution,
            e.cond_flux,
            if e.warnings.is_empty() {
                ""
            } else {
                "  [warning]"
            }
        );
    }
}
