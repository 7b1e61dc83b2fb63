//! Tangent-kernel eigenvalues at initialization against their analytic
//! brackets, on qubit-embedded data and on Haar-random data.

use qntk_lab::analysis::{initial_kernel_bracket, haar_lambda_max_bound};
use qntk_lab::datasets::{Connectivity, Dataset, Generator, Split};
use qntk_lab::observable::LocalZObservable;
use qntk_lab::qnn::{jacobian, qntk, AnsatzSpec, Family};
use qntk_lab::rng;

fn main() -> qntk_lab::Result<()> {
    let (n, s, d) = (6, 2, 600);
    let mut r = rng::stream(12, &[]);
    let obs = LocalZObservable::sample(n, (s as f64).exp2() / n as f64, &mut r)?;
    let spec = AnsatzSpec { window_size: s, depth: d, connectivity: Connectivity::AllToAll, family: Family::Xy };
    let ansatz = spec.build(n, &mut r)?;
    let data = Dataset::generate(&Generator::UniformEmbedding, n, 10, Split::Train, 12)?;
    let (j, _) = jacobian(&ansatz, &vec![0.0; d], &data.states, &obs)?;
    let rep = initial_kernel_bracket(&qntk(&j)?, None, &obs, Family::Xy, s, 0.5, 0.1)?;
    println!(
        "embedded: lambda in [{:.4}, {:.4}], bracket [{:.4}, {:.4}], pass {}",
        rep.lambda_min,
        rep.lambda_max,
        rep.lower.unwrap(),
        rep.upper.unwrap(),
        rep.pass
    );

    for n in [4, 6, 8] {
        let obs = LocalZObservable::sample(n, 1.0, &mut r)?;
        let spec = AnsatzSpec { window_size: 2, depth: 200, connectivity: Connectivity::Cyclic, family: Family::Xyz };
        let ansatz = spec.build(n, &mut r)?;
        let data = Dataset::generate(&Generator::Haar, n, 12, Split::Train, n as u64)?;
        let (j, _) = jacobian(&ansatz, &vec![0.0; 200], &data.states, &obs)?;
        let rep = haar_lambda_max_bound(&qntk(&j)?, &obs, 12, 0.1);
        println!("haar N={n}: lambda_max {:.5}, leading term {:.5}", rep.lambda_max, rep.parameters["leading"]);
    }
    Ok(())
}
