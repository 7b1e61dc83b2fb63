//! Multiplying Pauli words with exact phases and commuting them past a local Z.

use qntk_lab::pauli::{commutator_with_local_z, pauli_product, structure_tensor, PauliString};

fn main() -> qntk_lab::Result<()> {
    let p: PauliString = "XYZI".parse()?;
    let q: PauliString = "YYXZ".parse()?;
    let pq = pauli_product(&p, &q)?;
    let qp = pauli_product(&q, &p)?;
    println!("{p} * {q} = {pq}");
    println!("{q} * {p} = {qp}");
    println!("commute: {}", p.commutes_with(&q));

    for k in 0..p.n_qubits() {
        match commutator_with_local_z(k, &p)? {
            Some(c) => println!("[Z_{k}, {p}] = {} * {}", c.scale, c.pauli),
            None => println!("[Z_{k}, {p}] = 0"),
        }
    }

    // Single-qubit table: sigma_i sigma_j = B_ijk sigma_k.
    let b = structure_tensor();
    let names = ["I", "X", "Y", "Z"];
    for (i, row) in b.iter().enumerate() {
        for (j, col) in row.iter().enumerate() {
            let (k, phase) = col.iter().enumerate().find_map(|(k, e)| e.map(|ph| (k, ph))).unwrap();
            print!("{}{} = ({}){}   ", names[i], names[j], phase, names[k]);
        }
        println!();
    }
    Ok(())
}
