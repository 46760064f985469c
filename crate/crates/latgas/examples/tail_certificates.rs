//! Summability bounds and tail certificates. A certified decay law turns a
//! finite correlation table into a bound on everything outside it: the
//! coth bound dominates exponential sums over the whole lattice, the zeta
//! bound handles power laws, and the tail variants bound just the part
//! beyond a window.

use latgas::correlation::{
    alg_tail_bound, coth_bound, exp_tail_bound, fit_exponential, tail_certificate, zeta_bound,
    FitWindow,
};
use latgas::oracle::transfer_matrix_1d_infinite;

fn main() -> latgas::Result<()> {
    // Exponential sums: in one dimension the product majorant is exact,
    // sum over Z of e^{-eps|x|} = coth(eps/2).
    let eps = 0.8;
    let exact: f64 = (1..200).map(|x| (-eps * x as f64).exp()).sum::<f64>() * 2.0 + 1.0;
    println!(
        "sum of e^(-0.8|x|) over Z: direct {:.12}, coth bound {:.12}",
        exact,
        coth_bound(eps, 1, 1.0)?
    );
    println!(
        "same amplitude in d = 3: bound {:.6}",
        coth_bound(eps, 3, 1.0)?
    );

    // Power-law sums: shell counts up to a cutoff plus an integral tail.
    println!(
        "sum over Z^2 of ||x||^-3.5 (nonzero x): bound {:.6}",
        zeta_bound(3.5, 2, 1.0, 400)?
    );

    // Tail beyond a window shrinks geometrically with the window.
    for w in [4usize, 8, 16] {
        println!(
            "exp tail beyond ||x||_inf <= {w}: {:.3e}",
            exp_tail_bound(1.0, eps, 2, w)?
        );
    }
    println!(
        "algebraic tail beyond 10 in d = 2 at p = 4: {:.3e}",
        alg_tail_bound(1.0, 4.0, 2, 10, 64)?
    );

    // From data: fit a decay law on an exact geometric table, then certify
    // the part the table does not cover.
    let table = transfer_matrix_1d_infinite(0.5, 20)?;
    let fit = fit_exponential(&table, FitWindow::new(2.0, 20.0)?)?;
    match tail_certificate(&fit, 1, 20) {
        Some(cert) => println!(
            "\nfitted rate {:.6} -> certified tail beyond window {}: {:.3e}",
            fit.rate, cert.window, cert.bound
        ),
        None => println!("\nfit does not support a certificate"),
    }

    // A law that decays too slowly for the dimension cannot be certified:
    // the tail of ||x||^-p in d dimensions diverges unless p > d.
    match alg_tail_bound(1.0, 1.5, 2, 10, 64) {
        Err(e) => println!("p = 1.5 in d = 2: rejected ({e})"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
