//! Classify a few exponent tuples and show the selected decay rate.

use nsreg::exponents::*;

fn main() -> nsreg::Result<()> {
    let tuples = [
        (3.0 / (2.1 - 2.0 / 3.0), 3.0, 0.3, 0.1),
        (1.6, 1.8, 0.4, 0.2),
        (10.0, 10.0, 0.3, gamma_from_relation(10.0, 10.0)),
    ];
    for (p, r, delta, gamma) in tuples {
        let t = check_admissible(p, r, delta, gamma);
        print!("p = {p:.4}, r = {r:.4}, delta = {delta}, gamma = {gamma:.4}: ");
        match &t.verdict {
            Verdict::Rejected(v) => {
                let names: Vec<&str> = v.iter().map(|v| v.constraint).collect();
                println!("rejected ({})", names.join(", "));
            }
            Verdict::Admissible(case) => {
                let t = select_theta(&t)?;
                let theta = t.theta.unwrap();
                let chain = holder_chain(p, r, delta, theta)?;
                println!(
                    "case {}, theta = {theta:.4}, lambda = {:.4}, mu = {:.4}, chain ok = {}",
                    case.as_str(),
                    chain.lambda.value(),
                    chain.mu.value(),
                    chain.all_pass()
                );
                for c in theta_checks(p, r, delta, gamma, theta) {
                    println!("    {:<28} slack {:+.3e}", c.name, c.slack);
                }
            }
        }
    }
    Ok(())
}
