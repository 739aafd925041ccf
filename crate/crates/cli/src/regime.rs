use hetdiff::model::ModelParams;

use crate::args::RegimeArgs;
use crate::CliResult;

pub fn run(a: &RegimeArgs) -> CliResult<()> {
    let p = ModelParams::new(a.alpha, a.lambda)?;
    let delta = p.delta();
    let regime = p.regime();
    println!("alpha  = {}", a.alpha);
    println!("lambda = {}", a.lambda);
    println!("delta  = {delta}");
    println!("nu     = {}", delta / 2.0 - 1.0);
    println!("regime = {regime}");
    println!("at 0   : {}", regime.behavior_at_zero());
    Ok(())
}
