//! How the Pauli coefficients of structured data differ from Haar-random
//! data: row variances against the Haar value, and the mean/SD signature.

use qntk_lab::analysis::{coeff_matrix, mean_statistic};
use qntk_lab::datasets::{Dataset, Generator, Split, WindowAssignment};
use qntk_lab::qnn::Family;

fn main() -> qntk_lab::Result<()> {
    let n = 6;
    let windows = WindowAssignment::cyclic(n, 2)?;
    for (name, gen) in [
        ("haar", Generator::Haar),
        ("fldc L=0", Generator::Fldc { blocks: 0 }),
        ("fldc L=2", Generator::Fldc { blocks: 2 }),
    ] {
        let data = Dataset::generate(&gen, n, 400, Split::Train, 5)?;
        let stats = coeff_matrix(&data.states, &windows, Family::Xyz)?;
        let m = mean_statistic(&stats, 2)?;
        println!(
            "{name:<9} rows {:>3}  alpha [{:.4}, {:.4}] (haar {:.4})  |mean/sd| {:.3}",
            stats.strings.len(),
            stats.alpha_min(),
            stats.alpha_max(),
            stats.haar_reference,
            m.summary
        );
    }
    Ok(())
}
