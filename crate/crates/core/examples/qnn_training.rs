//! Gradient descent on a hardware-efficient circuit learning Heisenberg
//! dynamics, with the tangent-kernel diagnostics recorded along the way.

use qntk_lab::datasets::{heisenberg_unitary, label_with_target, Dataset, Generator, Split, Target, Connectivity};
use qntk_lab::observable::LocalZObservable;
use qntk_lab::qnn::{train_gd, AnsatzSpec, Family, LearningRate, TrainConfig};
use qntk_lab::rng::{self, tags};

fn main() -> qntk_lab::Result<()> {
    let (n, seed) = (6, 4);
    let obs = LocalZObservable::sample(n, 1.0, &mut rng::stream(seed, &[tags::OBSERVABLE]))?;
    let target = Target::Blocks(heisenberg_unitary(n, 1.0)?);
    let label = |split| -> qntk_lab::Result<Dataset> {
        let d = Dataset::generate(&Generator::Fldc { blocks: 1 }, n, 20, split, seed)?;
        let y = label_with_target(&d.states, &target, &obs)?;
        d.with_labels(y)
    };
    let (train, test) = (label(Split::Train)?, label(Split::Test)?);

    let spec = AnsatzSpec { window_size: 3, depth: 96, connectivity: Connectivity::Cyclic, family: Family::Xyz };
    let ansatz = spec.build(n, &mut rng::stream(seed, &[tags::ANSATZ]))?;
    let cfg = TrainConfig {
        learning_rate: LearningRate::Scaled { eta0: n as f64 },
        steps: 100,
        record_every: 20,
        shots: None,
        noise_std: None,
        seed,
    };
    let trace = train_gd(&ansatz, &train, Some(&test), &obs, &cfg)?;
    println!("eta = {:.4}", trace.eta);
    print!("{}", trace.to_csv());
    println!("final relative training loss {:.2e}", trace.relative_train_loss());
    Ok(())
}
