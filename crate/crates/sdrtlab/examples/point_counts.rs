//! Print the solution/flux point counts for every element type and degree,
//! together with the closed-form totals they must satisfy.
//!
//! Run with: cargo run --release --example point_counts

use sdrtlab::refelem::{build_reference, counts, ElementKind};

fn main() {
    println!(
        "{:<6} {:>2} {:>6} {:>6} {:>6} {:>6} {:>10}",
        "etype", "p", "n_sol", "n_ext", "n_int", "n_uniq", "n_flux"
    );
    for kind in ElementKind::all() {
        for p in 1..=4 {
            let c = counts(kind, p);
            let re = build_reference(kind, p).expect("reference element");
            assert_eq!(re.sol_pts.len(), c.n_sol);
            assert_eq!(re.ext_fpts.len(), c.n_ext);
            assert_eq!(re.int_fpts.len(), c.n_int);
            assert_eq!(re.int_unique.len(), c.n_int_unique);
            println!(
                "{:<6} {:>2} {:>6} {:>6} {:>6} {:>6} {:>10}",
                kind.name(),
                p,
                c.n_sol,
                c.n_ext,
                c.n_int,
                c.n_int_unique,
                c.n_flux
            );
        }
    }
}
