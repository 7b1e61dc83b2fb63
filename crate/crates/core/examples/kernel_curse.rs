//! A kernel model fitted on Haar-random states barely improves on unseen
//! states. Prints the per-instance generalization terms, then a Monte Carlo
//! run of the bound.

use qntk_lab::datasets::haar_state;
use qntk_lab::kernel::{
    curse_experiment_qkm, gram, gram_sym, relative_generalization_error, KernelSystem,
    ObservableSpec, QkmCurseConfig, TargetSpec,
};
use qntk_lab::rng;

fn main() -> qntk_lab::Result<()> {
    let mut r = rng::stream(3, &[]);
    let train: Vec<_> = (0..5).map(|_| haar_state(5, &mut r)).collect::<Result<_, _>>()?;
    let test: Vec<_> = (0..3).map(|_| haar_state(5, &mut r)).collect::<Result<_, _>>()?;
    let system = KernelSystem::fit(gram_sym(&train)?, vec![0.3, -0.1, 0.2, 0.5, -0.4], 0.0)?;
    let g = relative_generalization_error(&system, &gram(&test, &train)?, &[0.1, -0.2, 0.3])?;
    println!("single instance: L_B(0) {:.4}, change {:+.4}", g.loss_test_initial, g.relative_error);

    let cfg = QkmCurseConfig {
        n_qubits: 8,
        train_size: 12,
        test_size: 12,
        trials: 40,
        target: TargetSpec::Heisenberg { time: 1.0 },
        observable: ObservableSpec::Sampled { variance: 1.0 },
        ridge: 0.0,
        seed: 1,
    };
    let s = curse_experiment_qkm(&cfg)?;
    println!("E L_B(0)   {:.5} ± {:.1e}", s.loss_test_initial.value, s.loss_test_initial.se);
    println!("E L_B(inf) {:.5} ± {:.1e}", s.loss_test_final.value, s.loss_test_final.se);
    println!("bound      {:.5}", s.bound.value);
    println!("mean relative improvement {:.4}, bound holds: {}", s.mean_trial_improvement, s.bound_holds);
    Ok(())
}
