//! Parsing of solution descriptors such as `affine:2,2,1`.

use hjb_iso::solutions::Solution;

use crate::CliError;

pub const FORMS: &str = "constant[:v], exponential:kappa, gaussian:t_end,center, \
affine:alpha,lambda,delta, oscillator:d,phase, density-ratio:delta,alpha,lambda,z0";

/// Builds a library solution from `kind[:a,b,...]`. `gamma` is used by the
/// kinds whose γ is not implied by their parameters.
pub fn parse_eta(spec: &str, gamma: f64) -> Result<Solution, CliError> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let args: Vec<f64> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Usage(format!("eta '{spec}': {e}")))?
    };
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "eta '{spec}': {kind} takes {n} parameters (forms: {FORMS})"
            )))
        }
    };
    let sol = match kind {
        "constant" if args.is_empty() => Solution::constant(1.0, gamma),
        "constant" => {
            want(1)?;
            Solution::constant(args[0], gamma)
        }
        "exponential" => {
            want(1)?;
            Solution::exponential(args[0], gamma)
        }
        "gaussian" => {
            want(2)?;
            Solution::gaussian(gamma, args[0], args[1])
        }
        "affine" => {
            want(3)?;
            Solution::affine(args[0], args[1], args[2])
        }
        "oscillator" => {
            want(2)?;
            Solution::oscillator(args[0], gamma, args[1])
        }
        "density-ratio" => {
            want(4)?;
            let delta = args[0];
            if delta != 1.0 && delta != 3.0 {
                return Err(CliError::Usage(format!("eta '{spec}': delta must be 1 or 3")));
            }
            Solution::density_ratio(delta as u8, args[1], args[2], args[3])
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unknown eta '{spec}' (forms: {FORMS})"
            )))
        }
    };
    Ok(sol?)
}
