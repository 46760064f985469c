//! Regime conditions for a coupling map: the high-temperature uniqueness
//! sum, its coarser sufficient variant, and the coupling moments used by
//! the decay machinery. Also locates the boundary temperature where the
//! uniqueness sum crosses 1, by bisection.

use latgas::model::{alg_moment, dobrushin_check, exp_moment, CouplingMap};

fn main() -> latgas::Result<()> {
    let chain = CouplingMap::nearest_neighbor(1, 1.0)?;

    for beta in [0.3, 0.7] {
        let report = dobrushin_check(&chain, beta)?;
        println!(
            "1D nearest-neighbor, beta = {beta}: beta * sum tanh|J| = {:.12} -> uniqueness {}",
            report.sum,
            if report.holds { "certified" } else { "not certified" }
        );
        println!(
            "    sufficient variant beta * sum |J| = {:.12} -> {}",
            report.sufficient_sum,
            if report.sufficient_holds { "holds" } else { "fails" }
        );
    }

    // The sum is linear in beta, so the crossing is 1 / (2 tanh 1); the
    // bisection below finds it without using that closed form.
    let (mut lo, mut hi) = (0.3f64, 0.7f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dobrushin_check(&chain, mid)?.holds {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    println!(
        "uniqueness boundary for the chain: beta* = {:.12} (closed form {:.12})",
        0.5 * (lo + hi),
        1.0 / (2.0 * 1.0f64.tanh())
    );

    let square = CouplingMap::nearest_neighbor(2, 1.0)?;
    let beta = 0.25;
    println!(
        "\n2D nearest-neighbor at beta = {beta}: uniqueness sum = {:.12}",
        dobrushin_check(&square, beta)?.sum
    );
    println!(
        "exponential coupling moment (t = 0.5): {:.12}",
        exp_moment(&square, beta, 0.5)?
    );
    println!(
        "algebraic coupling moment (p = 3):     {:.12}",
        alg_moment(&square, beta, 3.0)?
    );
    Ok(())
}
