//! Linearized (frozen tangent kernel) training of a circuit model, first on
//! one instance and then as a Monte Carlo check on Haar-random data.

use qntk_lab::datasets::{haar_state, Connectivity};
use qntk_lab::kernel::{mse_loss, ObservableSpec};
use qntk_lab::observable::LocalZObservable;
use qntk_lab::qnn::{
    curse_experiment_qnn, frozen_kernel_predict, jacobian, AnsatzSpec, Family, QnnCurseConfig,
};
use qntk_lab::rng;

fn main() -> qntk_lab::Result<()> {
    let n = 4;
    let spec = AnsatzSpec { window_size: 2, depth: 40, connectivity: Connectivity::Cyclic, family: Family::Xyz };
    let mut r = rng::stream(8, &[]);
    let ansatz = spec.build(n, &mut r)?;
    let obs = LocalZObservable::sample(n, 1.0, &mut r)?;
    let states: Vec<_> = (0..6).map(|_| haar_state(n, &mut r)).collect::<Result<_, _>>()?;
    let theta = vec![0.0; spec.depth];
    let (j_a, z_a) = jacobian(&ansatz, &theta, &states[..4], &obs)?;
    let (j_b, z_b) = jacobian(&ansatz, &theta, &states[4..], &obs)?;
    let y_a = [0.5, -0.5, 0.2, 0.0];
    let r0: Vec<f64> = z_a.iter().zip(&y_a).map(|(z, y)| z - y).collect();
    let z_inf = frozen_kernel_predict(&j_a, &j_b, &z_b, &r0, 0.0)?;
    println!("test outputs before {z_b:.4?}, after {z_inf:.4?}");
    println!("train loss before {:.4}", mse_loss(&r0));

    let cfg = QnnCurseConfig {
        n_qubits: 5,
        train_size: 8,
        test_size: 8,
        trials: 30,
        ansatz: AnsatzSpec { depth: 50, ..spec },
        observable: ObservableSpec::Sampled { variance: 1.0 },
        ridge: 0.0,
        seed: 2,
    };
    let s = curse_experiment_qnn(&cfg)?;
    println!(
        "E L_B(0) {:.4}, E L_B(inf) {:.4}, bound {:.4}, holds: {}",
        s.loss_test_initial.value, s.loss_test_final.value, s.bound.value, s.bound_holds
    );
    Ok(())
}
