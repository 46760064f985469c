//! The diffraction picture for the lattice gas on the chain: a Bragg comb
//! of weight 1/4 on the integers plus an absolutely continuous density
//! given by a cosine series in the spin correlations. With the geometric
//! correlations eta(x) = t^|x| the density is the Poisson kernel, so every
//! value can be checked in closed form.

use latgas::correlation::exp_tail_bound;
use latgas::diffraction::{
    bragg_maxima_check, density_series, parseval_check, positivity_check, smoothness_indicator,
    DEFAULT_BRAGG_WEIGHT,
};
use latgas::correlation::{fit_exponential, FitWindow};
use latgas::oracle::transfer_matrix_1d_infinite;

fn main() -> latgas::Result<()> {
    let beta_j = 0.5f64;
    let t = beta_j.tanh();
    let window = 40;
    let table = transfer_matrix_1d_infinite(beta_j, window)?;

    // The dropped tail is a geometric series; its bound scales the density
    // by 1/4 just like the series itself.
    let tail = 0.25 * exp_tail_bound(1.0, -t.ln(), 1, window)?;
    let result = density_series(&table, 256, tail, DEFAULT_BRAGG_WEIGHT, None)?;

    println!(
        "point part: weight {} on every integer wave number",
        result.bragg_weight
    );
    println!("series window {window}, truncation bound {tail:.2e}\n");

    println!("k       density      Poisson kernel");
    let closed = |k: f64| {
        (1.0 - t * t) / (4.0 * (1.0 - 2.0 * t * (std::f64::consts::TAU * k).cos() + t * t))
    };
    for m in [0, 32, 64, 96, 128] {
        let k = m as f64 / 256.0;
        println!(
            "{k:.4}  {:.9}  {:.9}",
            result.values[m],
            closed(k)
        );
    }
    println!(
        "\ng(0) = {:.12} = e/4 up to the tail bound (e/4 = {:.12})",
        result.values[0],
        std::f64::consts::E / 4.0
    );

    // Property checks on the finished grid.
    for report in [
        parseval_check(&result, &table),
        positivity_check(&result),
        bragg_maxima_check(&result),
    ] {
        println!("{:<18} {}  {}", report.name, report.status.as_str(), report.details);
    }

    // Exponential decay certifies smoothness of every order.
    let fit = fit_exponential(&table, FitWindow::new(2.0, window as f64)?)?;
    let smooth = smoothness_indicator(Some(&fit), 1);
    println!("\nsmoothness: {}", smooth.details);
    Ok(())
}
