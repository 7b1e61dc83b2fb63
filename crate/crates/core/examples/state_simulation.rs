//! Statevector basics: rotations, fixed gates, expectations and Pauli coefficients.

use qntk_lab::observable::LocalZObservable;
use qntk_lab::pauli::PauliString;
use qntk_lab::state::{FixedGate, StateVector};

fn main() -> qntk_lab::Result<()> {
    let mut s = StateVector::zero(3)?;
    s.apply_fixed_gate(&FixedGate::Ry { qubit: 0, angle: std::f64::consts::FRAC_PI_2 })?;
    s.apply_fixed_gate(&FixedGate::Cz { control: 0, target: 1 })?;
    s.apply_pauli_rotation(&"XXI".parse()?, 0.7)?;

    println!("norm       {:.12}", s.norm());
    println!("<Z_k>      {:?}", s.z_expectations());

    let obs = LocalZObservable::new(vec![1.0, -0.5, 0.25])?;
    println!("<O>        {:.6}", s.expectation(&obs)?);
    println!("|O|_2      {:.3}, |O|_F^2 {:.3}", obs.spectral_norm(), obs.frobenius_norm_sq());

    for w in ["XII", "ZZI", "YXI", "IIZ"] {
        let p: PauliString = w.parse()?;
        println!("Tr[rho {w}] {:+.6}", s.pauli_coefficient(&p)?);
    }

    let plus = {
        let mut t = StateVector::zero(3)?;
        for q in 0..3 {
            t.apply_fixed_gate(&FixedGate::Ry { qubit: q, angle: std::f64::consts::FRAC_PI_2 })?;
        }
        t
    };
    println!("fidelity with |+++>: {:.6}", s.fidelity(&plus)?);
    Ok(())
}
