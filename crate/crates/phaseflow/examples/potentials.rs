//! The built-in constitutive laws, their hypothesis checks and the
//! Moreau-envelope surrogates of the singular ones.

use phaseflow::model::{builtin, regularize, validate_hypotheses, ModelSpec, Params};

fn main() -> phaseflow::Result<()> {
    let j = builtin("mixed_j", &Params::from([("tau_c".to_string(), 1.0)]))?.into_heat_flux()?;
    let w = builtin("logarithmic_W", &Params::from([("c".to_string(), 4.0)]))?.into_well()?;
    let lambda = builtin("tanh_lambda", &Params::from([("ell".to_string(), 1.0)]))?.into_latent()?;

    println!("{:>8} {:>12} {:>12} {:>12}", "r", "j(r)", "j'(r)", "j''(r)");
    for r in [-0.9, -0.5, 0.0, 0.5, 2.0] {
        println!("{r:>8.2} {:>12.6} {:>12.6} {:>12.6}", j.j(r)?, j.dj(r)?, j.d2j(r)?);
    }
    println!("outside the domain: {}", j.j(-1.5).unwrap_err());

    println!(
        "\nW critical points {:?}, confinement {:?}",
        w.critical_points,
        w.confinement_interval()
    );

    let model = ModelSpec::new(j.clone(), w.clone(), lambda);
    let report = validate_hypotheses(&model, 2000);
    println!("\nhypotheses:");
    for c in &report.checks {
        println!("  {:<24} {:?} (margin {:.3e})", c.name, c.status, c.worst_margin);
    }

    println!("\nregularized W_n at r = 0.9 (true W = {:.6}):", w.w(0.9)?);
    for n in [1, 10, 100, 1000] {
        let wn = regularize(&w, n)?;
        println!(
            "  n = {n:>4}: W_n(0.9) = {:.6}, W_n(1.5) = {:.3}",
            wn.w(0.9)?,
            wn.w(1.5)?
        );
    }
    Ok(())
}
