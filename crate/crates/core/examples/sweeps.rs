//! How the best-matching K for Recall@Kbar moves with Nbar and Kbar.

use ure_eval::experiments::{default_k_grid, kbar_sweep, nbar_sweep, Experiment};
use ure_eval::synth::{default_family, generate_full, WorldSpec};

fn main() -> ure_eval::error::Result<()> {
    let seed = 7;
    let world = generate_full(&WorldSpec::reference(seed))?;
    let exp = Experiment::synthetic(&world, &default_family(seed), &default_k_grid(500))?;

    println!("Kbar = 5, varying Nbar (coupling predicts K = 500·5/Nbar):");
    for c in nbar_sweep(&exp, &[10, 20, 40, 80, 160], 5, seed)? {
        println!("  Nbar {:>3}: K_max {:>3} (r = {:.3}), coupled {}", c.nbar, c.curve.k_max, c.curve.r_max, 500 * 5 / c.nbar);
    }
    println!("Nbar = 80, varying Kbar:");
    for c in kbar_sweep(&exp, 80, &[1, 3, 5, 10], seed)? {
        println!("  Kbar {:>2}: K_max {:>3} (r = {:.3})", c.kbar, c.curve.k_max, c.curve.r_max);
    }
    Ok(())
}
