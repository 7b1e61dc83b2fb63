//! Monte Carlo check of the first and second Haar moment identities.

use qntk_lab::analysis::tdesign_moment_check;

fn main() -> qntk_lab::Result<()> {
    let rep = tdesign_moment_check(3, 5000, 1)?;
    for c in [&rep.first, &rep.second] {
        println!(
            "{:<14} expected {:+.4}{:+.4}i  sampled {:+.4}{:+.4}i  z {:.2}",
            c.name, c.expected[0], c.expected[1], c.mean[0], c.mean[1], c.z_score
        );
    }
    println!("pass: {}", rep.pass);
    Ok(())
}
