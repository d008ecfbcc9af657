use hjb_iso::isovectors::tables::compare_with_reference;
use hjb_iso::isovectors::{
    basis, bracket, commutator_fd_deviation, structure_constants, structure_identification,
    transformed_basis, CaseLabel, Potential, TildeField,
};
use hjb_iso::martingale::{density_fit, integrate, omega_martingale_suite};
use hjb_iso::sde::{
    besq_time_change, clock, density, ou_exact, simulate_besq_on_grid, PathEnsemble, Scheme,
    SimConfig,
};
use hjb_iso::solutions::{group_action, residual, Solution};
use serde_json::{json, Value};

use crate::args::{algebra_case, AffineArgs, FamilyChoice, PotentialArgs, SimArgs, SimDefaults};
use crate::config::RunConfig;
use crate::eta::parse_eta;
use crate::CliError;

pub struct VerifyRequest {
    pub potential: PotentialArgs,
    pub eta: Option<String>,
    pub family: FamilyChoice,
    pub affine: AffineArgs,
    pub sim: SimArgs,
    pub t: f64,
    pub z: f64,
    pub residual_tol: f64,
}

pub fn cmd_verify(suite: &str, req: &VerifyRequest, cfg: &RunConfig) -> Result<bool, CliError> {
    let (pass, report) = match suite {
        "omega" => omega_suite(req, cfg)?,
        "density" => density_suite(req, cfg)?,
        "brackets" => brackets_suite(req, cfg)?,
        "residuals" => residuals_suite(req, cfg)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown suite '{other}' (omega, density, brackets, residuals)"
            )))
        }
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({"suite": suite, "pass": pass, "report": report}))?
    );
    eprintln!("{suite}: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn omega_suite(req: &VerifyRequest, cfg: &RunConfig) -> Result<(bool, Value), CliError> {
    let gamma = req.potential.gamma.or(cfg.potential.gamma).unwrap_or(1.0);
    let eta = parse_eta(req.eta.as_deref().unwrap_or("constant"), gamma)?;
    let p = eta.potential();
    if req.potential.any_set(cfg) {
        let asked = req.potential.resolve(cfg)?;
        if asked != p {
            return Err(CliError::Usage(format!(
                "potential {asked:?} does not match the solution's {p:?}"
            )));
        }
    }
    let case = algebra_case(p, req.family)?;
    let (sim, z0) = req.sim.resolve(
        cfg,
        SimDefaults {
            steps: 1000,
            paths: 10_000,
            stride: 100,
            start: 1.0,
        },
    )?;
    let report = omega_martingale_suite(&case, &eta, z0, &sim, req.z)?;
    let pass = report.pass && !report.calibration.pass;
    Ok((pass, serde_json::to_value(report)?))
}

fn density_suite(req: &VerifyRequest, cfg: &RunConfig) -> Result<(bool, Value), CliError> {
    let params = req.affine.resolve(cfg);
    let delta = params.delta_or(3.0);
    if delta != 1.0 && delta != 3.0 {
        return Err(CliError::Usage("the density suite needs --delta 1 or 3".into()));
    }
    let m = params.model_with_delta(delta)?;
    let t = req.t;
    let (sim, z0) = req.sim.resolve(
        cfg,
        SimDefaults {
            steps: 100,
            paths: 10_000,
            stride: 100,
            start: if delta == 1.0 { 1.0 } else { 0.0 },
        },
    )?;
    let law = density(delta as u8, &m, z0, t)?;
    let (lo, hi) = law.support();
    let norm = integrate(|x| law.pdf(x), lo, hi, 1e-13)?;
    let ensemble: PathEnsemble = if delta == 1.0 {
        let sim = SimConfig {
            t0: 0.0,
            t1: t,
            record_stride: sim.steps,
            ..sim
        };
        ou_exact(&m, z0, &sim)?
    } else {
        let times = [0.0, t];
        let grid = [clock(&m, 0.0), clock(&m, t)];
        let besq = simulate_besq_on_grid(3.0, 0.0, &grid, sim.n_paths, sim.seed, Scheme::BesqSumOfSquares)?;
        besq_time_change(&m, &besq, &times)?.map(|_, v| v.sqrt())
    };
    // The δ = 1 law covers every path; sign changes are flagged but not stopping.
    let fit = density_fit(&ensemble.without_hits(), t, &law)?;
    let norm_ok = (norm.value - 1.0).abs() < 1e-10;
    let pass = norm_ok && fit.ks_within_95() && fit.moments_within(3.0);
    Ok((
        pass,
        json!({
            "law": law,
            "normalization": norm,
            "normalization_ok": norm_ok,
            "fit": fit,
            "ks_within_95": fit.ks_within_95(),
            "moments_within_3se": fit.moments_within(3.0),
        }),
    ))
}

fn brackets_suite(req: &VerifyRequest, cfg: &RunConfig) -> Result<(bool, Value), CliError> {
    let gamma = req.potential.gamma.or(cfg.potential.gamma).unwrap_or(1.0);
    let mut pass = true;
    let mut tables = Vec::new();
    let grid: Vec<(f64, f64)> = (0..5)
        .flat_map(|i| (0..5).map(move |j| (0.2 + 0.3 * i as f64, 0.3 + 0.4 * j as f64)))
        .collect();
    for d in [0.0, 0.5, -0.5] {
        let case = algebra_case(Potential::new(0.0, d, gamma)?, FamilyChoice::Auto)?;
        let checks = compare_with_reference(&case).expect("M, R and V have reference tables");
        let mut mismatches = Vec::new();
        for c in checks.iter().filter(|c| !c.matches) {
            // Independent route: finite-difference commutator against the table's claim.
            let claimed = TildeField::combination(&c.expected, &case.basis);
            let fd = commutator_fd_deviation(case.gen(c.i), case.gen(c.j), &claimed, &grid);
            mismatches.push(json!({
                "pair": [case.name(c.i), case.name(c.j)],
                "fd_deviation_from_table": fd,
            }));
        }
        pass &= mismatches.is_empty();
        tables.push(json!({
            "family": case.family.prefix(),
            "D": d,
            "pairs": checks.len(),
            "mismatches": mismatches,
        }));
    }
    let mut jacobi = Vec::new();
    for label in CaseLabel::ALL {
        let case = basis(label.representative(gamma));
        let closed = structure_constants(&case).is_ok();
        let n = case.dim();
        let mut failures = 0usize;
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    let (x, y, z) = (case.gen(i), case.gen(j), case.gen(k));
                    let jac = bracket(&bracket(x, y), z)
                        .add(&bracket(&bracket(y, z), x))
                        .add(&bracket(&bracket(z, x), y));
                    failures += !jac.is_zero() as usize;
                }
            }
        }
        let structure = structure_identification(&case).is_ok();
        pass &= closed && failures == 0 && structure;
        jacobi.push(json!({
            "case": label.to_string(),
            "closed": closed,
            "jacobi_failures": failures,
            "structure_theorem": structure,
        }));
    }
    Ok((pass, json!({"tables": tables, "cases": jacobi})))
}

fn residuals_suite(req: &VerifyRequest, _cfg: &RunConfig) -> Result<(bool, Value), CliError> {
    let tol = req.residual_tol;
    let mut rows = Vec::new();
    let mut pass = true;
    let mut check = |name: String, eta: &Solution| -> Result<(), CliError> {
        let grid = eta.grid(9, 9);
        let r = residual(eta, eta.potential(), &grid, eta.is_dual())?;
        let ok = r.relative < tol;
        pass &= ok;
        rows.push(json!({"solution": name, "dual": eta.is_dual(), "relative": r.relative, "pass": ok}));
        Ok(())
    };
    for (a, l, d) in [(2.0, 2.0, 3.0), (2.0, 2.0, 1.0), (1.0, 0.5, 2.0), (1.5, -1.0, 4.0), (3.0, 1.0, 0.5)] {
        check(format!("affine:{a},{l},{d}"), &Solution::affine(a, l, d)?)?;
    }
    let seeds = [
        ("constant".to_string(), Solution::constant(1.0, 1.0)?),
        ("gaussian:2,0".to_string(), Solution::gaussian(1.0, 2.0, 0.0)?),
    ];
    for (name, eta) in &seeds {
        for i in 1..=6 {
            check(format!("M{i}(0.3)·{name}"), &group_action(i, 0.3, eta)?)?;
        }
    }
    check("density-ratio:1,2,2,0.5".into(), &Solution::density_ratio(1, 2.0, 2.0, 0.5)?)?;
    check("density-ratio:3,2,2,0".into(), &Solution::density_ratio(3, 2.0, 2.0, 0.0)?)?;
    // Generators of the limit bases map solutions to solutions.
    for d in [0.5, -0.5] {
        let case = transformed_basis(&basis(Potential::new(0.0, d, 1.0)?))?.limit;
        let eta = Solution::oscillator(d, 1.0, 0.2)?;
        for i in 1..=case.dim() {
            let img = hjb_iso::solutions::apply_tilde_named(case.gen(i), &eta, case.name(i));
            check(format!("{}·oscillator:{d},0.2", case.name(i)), &img)?;
        }
    }
    Ok((pass, json!({"tolerance": tol, "solutions": rows})))
}
