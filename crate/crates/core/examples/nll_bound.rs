//! Expected negative log-likelihood of a decoder model on a 16-vector
//! source, against the conditional entropy it can never beat.

use gwc::toy_theory::{nll_bound_check, DiscreteSource};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gwc::Result<()> {
    let source = DiscreteSource::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let models = [
        ("true conditional", source.true_conditional()),
        ("uniform in cell", source.uniform_conditional()),
        ("perturbed (20%)", source.perturbed_conditional(0.2, &mut rng)),
        ("random", source.random_conditional(&mut rng)),
    ];
    println!(
        "{:<18} {:>10} {:>10} {:>10} {:>10}",
        "model", "E[-ln q]", "H(X|Y)", "gap", "E KL"
    );
    for (name, theta) in &models {
        let r = nll_bound_check(&source, theta)?;
        println!(
            "{name:<18} {:>10.6} {:>10.6} {:>10.2e} {:>10.2e}",
            r.lhs,
            r.rhs,
            r.gap(),
            r.expected_kl
        );
    }
    Ok(())
}
