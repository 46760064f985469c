//! Models stated on a non-cubic lattice enter through an integer change of
//! basis: displacements given in the lattice's own coordinates are mapped
//! onto the simulation grid, provided every image is an integer vector.
//! The spectral norm of the map bounds how far the interaction range can
//! stretch.

use latgas::lattice::LatticeTorus;
use latgas::model::{dobrushin_check, lattice_to_zd, CouplingMap, LatticeBasis};
use latgas::oracle::enumerate_exact;

fn main() -> latgas::Result<()> {
    // A sheared lattice: its second primitive vector points diagonally.
    let shear = LatticeBasis::new(&[vec![1.0, 1.0], vec![0.0, 1.0]])?;
    println!("shear basis, spectral norm {:.6}", shear.spectral_norm());

    // Nearest neighbors in lattice coordinates land on (1,0) and (1,1).
    let native = CouplingMap::new(2, vec![(vec![1, 0], 0.6), (vec![0, 1], 0.4)])?;
    let transported = lattice_to_zd(&native, &shear)?;
    println!("transported couplings:");
    for (r, j) in transported.canonical_entries() {
        println!("  J({r:?}) = {j}");
    }
    println!(
        "range grew from {:.4} to {:.4} (bounded by spectral norm * old range = {:.4})",
        native.range(),
        transported.range(),
        shear.spectral_norm() * native.range()
    );

    // The uniqueness sum is basis-independent: it only sees the multiset of
    // coupling values.
    let beta = 0.4;
    println!(
        "uniqueness sum at beta = {beta}: native {:.12}, transported {:.12}",
        dobrushin_check(&native, beta)?.sum,
        dobrushin_check(&transported, beta)?.sum
    );

    // The transported model is an ordinary coupling on the cubic torus, so
    // every tool applies; enumerate a small system exactly.
    let torus = LatticeTorus::new(&[4, 4])?;
    let exact = enumerate_exact(&torus, &transported, beta, &[1, 1])?;
    println!(
        "4x4 enumeration: log Z = {:.10}, eta(1,0) = {:.10}, eta(1,1) = {:.10}",
        exact.log_partition,
        exact.correlations.value(&[1, 0]).unwrap().0,
        exact.correlations.value(&[1, 1]).unwrap().0
    );

    // A basis whose images miss the integer grid is rejected: there is no
    // faithful way to place that model on the cubic lattice.
    let triangular = LatticeBasis::new(&[vec![1.0, 0.5], vec![0.0, 0.8660254037844386]])?;
    match lattice_to_zd(&native, &triangular) {
        Err(e) => println!("triangular basis: rejected ({e})"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
