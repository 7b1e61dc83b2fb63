//! Dense helpers: symmetric eigendecomposition, Cholesky solves and the
//! matrix exponential used for target unitaries.

use qntk_lab::linalg::{herm_expm, spd_solve, sym_eig, HermMatrix, SymMatrix};

fn main() -> qntk_lab::Result<()> {
    // XX + YY + ZZ on two qubits, written out in the computational basis.
    let h = SymMatrix::from_lower(4, |i, j| match (i, j) {
        (0, 0) | (3, 3) => 1.0,
        (1, 1) | (2, 2) => -1.0,
        (2, 1) => 2.0,
        _ => 0.0,
    });
    let eig = sym_eig(&h);
    println!("eigenvalues {:?}", eig.values);

    let u = herm_expm(&HermMatrix::from_real(&h), 1.0);
    println!("Tr exp(-iH) = {:.6}", u.trace());
    println!("unitarity defect {:.2e}", u.unitarity_defect());

    let k = SymMatrix::from_lower(3, |i, j| if i == j { 2.0 } else { 0.5 });
    let x = spd_solve(&k, &[1.0, 0.0, -1.0], 0.0)?;
    println!("K^-1 b = {x:?}");
    Ok(())
}
