//! The data generators: Haar states, finite local-depth circuits, qubit
//! embeddings, the wine data, and Heisenberg-evolved labels.

use qntk_lab::datasets::{
    heisenberg_unitary, label_with_target, Dataset, Generator, Split, Target,
};
use qntk_lab::observable::LocalZObservable;
use qntk_lab::rng;

fn main() -> qntk_lab::Result<()> {
    let n = 6;
    let obs = LocalZObservable::sample(n, 1.0, &mut rng::stream(1, &[rng::tags::OBSERVABLE]))?;
    let target = Target::Blocks(heisenberg_unitary(n, 1.0)?);

    for (name, gen) in [
        ("haar", Generator::Haar),
        ("fldc L=0", Generator::Fldc { blocks: 0 }),
        ("fldc L=4", Generator::Fldc { blocks: 4 }),
        ("embedding", Generator::UniformEmbedding),
    ] {
        let data = Dataset::generate(&gen, n, 8, Split::Train, 7)?;
        let y = label_with_target(&data.states, &target, &obs)?;
        let spread = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        println!("{name:<10} {} states, mean label^2 {spread:.4}", data.len());
    }

    let wine = Dataset::generate(&Generator::Wine { classes: (1, 2) }, 13, 10, Split::Test, 3)?;
    println!("wine test split: {} states, labels {:?}", wine.len(), wine.labels);

    // Datasets remember how they were drawn and can be rebuilt exactly.
    let a = Dataset::generate(&Generator::Fldc { blocks: 2 }, n, 4, Split::Test, 11)?;
    let b = Dataset::regenerate(&a.provenance)?;
    println!("regenerated identically: {}", a.states == b.states);
    Ok(())
}
