//! Evaluate the three training objectives and check their gradients
//! against finite differences.
//!
//! ```bash
//! cargo run --example losses
//! ```

use std::collections::BTreeSet;

use zeroref::harness::losses::{
    loss_azp_resolution, loss_azp_resolution_grad, loss_bce, loss_bce_grad, loss_coref_marginal,
    loss_coref_marginal_grad, ProbabilityTable,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let labels = [true, false, true];
    let probs = [0.8, 0.3, 0.5];
    println!("identification BCE: {:.6}", loss_bce(&labels, &probs)?);
    println!("  gradient: {:?}", loss_bce_grad(&labels, &probs)?);

    // two AZPs, three candidate clusters each; the first candidate is right
    let table = ProbabilityTable::new(vec![vec![(0, 0.6), (1, 0.3), (2, 0.1)], vec![(0, 0.2), (1, 0.5), (2, 0.3)]]);
    let gold = vec![BTreeSet::from([0]), BTreeSet::from([0])];
    println!("AZP resolution: {:.6}", loss_azp_resolution(&table, &gold)?);
    println!("  gradient: {:?}", loss_azp_resolution_grad(&table, &gold)?);

    // mention antecedents; candidate 0 is the null antecedent, two gold antecedents
    let table = ProbabilityTable::new(vec![vec![(0, 0.1), (1, 0.4), (2, 0.3), (3, 0.2)]]);
    let gold = vec![BTreeSet::from([1, 2])];
    let loss = loss_coref_marginal(&table, &gold)?;
    let grad = loss_coref_marginal_grad(&table, &gold)?;
    println!("coreference marginal: {loss:.6} (= -ln 0.7)");

    let h = 1e-5;
    let p = table.probs();
    for (i, g) in grad.iter().flatten().enumerate() {
        let shifted = |d: f64| {
            let mut q = p.clone();
            q[i] += d;
            zeroref::harness::losses::loss_coref_marginal_unchecked(&table.with_probs(&q), &gold)
        };
        let fd = (shifted(h)? - shifted(-h)?) / (2.0 * h);
        println!("  d/dp{i}: analytic {g:+.6}, finite difference {fd:+.6}");
    }
    Ok(())
}
