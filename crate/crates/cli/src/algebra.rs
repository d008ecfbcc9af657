use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use hjb_iso::isovectors::tables::compare_with_reference;
use hjb_iso::isovectors::{
    structure_constants, structure_identification, subalgebra_tables, Potential,
};
use hjb_iso::solutions::{apply_tilde_named, group_action, residual, Solution};
use serde_json::json;

use crate::args::{algebra_case, FamilyChoice};
use crate::CliError;

fn print_json(v: &serde_json::Value) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

pub fn cmd_basis(p: &Potential, family: FamilyChoice, json: bool) -> Result<bool, CliError> {
    let case = algebra_case(*p, family)?;
    let table = structure_constants(&case)?;
    let report = structure_identification(&case)?;
    if json {
        print_json(&json!({
            "potential": p,
            "case": case.label.to_string(),
            "family": case.family.prefix(),
            "epsilon": case.epsilon,
            "generators": case.names.iter().zip(&case.basis)
                .map(|(n, g)| json!({"name": n, "field": g.to_string()}))
                .collect::<Vec<_>>(),
            "brackets": table,
            "structure": report,
        }))?;
        return Ok(true);
    }
    println!("case {} (C = {}, D = {}, gamma = {})", case.label, p.c, p.d, p.gamma);
    if let Some(eps) = case.epsilon {
        println!("epsilon = {eps}");
    }
    println!("{} generators:", case.dim());
    for (n, g) in case.names.iter().zip(&case.basis) {
        println!("  {n:>3} = {g}");
    }
    println!("brackets:");
    print!("{}", table.to_text(false));
    println!("structure: {:?}", report.kind);
    for v in &report.verified {
        println!("  ok: {v}");
    }
    Ok(true)
}

pub fn cmd_brackets(
    p: &Potential,
    family: FamilyChoice,
    show_zero: bool,
    json: bool,
) -> Result<bool, CliError> {
    let case = algebra_case(*p, family)?;
    let table = structure_constants(&case)?;
    let reference = compare_with_reference(&case);
    if json {
        print_json(&json!({
            "case": case.label.to_string(),
            "family": case.family.prefix(),
            "brackets": table,
            "reference": reference,
        }))?;
        return Ok(true);
    }
    print!("{}", table.to_text(show_zero));
    if let Some(checks) = reference {
        let bad: Vec<String> = checks
            .iter()
            .filter(|c| !c.matches)
            .map(|c| format!("[{},{}]", case.name(c.i), case.name(c.j)))
            .collect();
        if bad.is_empty() {
            println!("reference table: all {} pairs match", checks.len());
        } else {
            println!("reference table: mismatches {}", bad.join(" "));
        }
    }
    Ok(true)
}

pub fn cmd_structure(p: &Potential, json: bool) -> Result<bool, CliError> {
    let case = algebra_case(*p, FamilyChoice::Native)?;
    let report = structure_identification(&case)?;
    let sub = subalgebra_tables(&case);
    if json {
        print_json(&json!({"structure": report, "subalgebras": sub}))?;
        return Ok(true);
    }
    println!("case {}: {:?} ({} generators)", report.label, report.kind, report.dim);
    println!("working basis {}", report.working_family);
    println!("  e = {}", report.e);
    println!("  f = {}", report.f);
    println!("  h = {}", report.h);
    for v in &report.verified {
        println!("  ok: {v}");
    }
    println!(
        "J = {{{}}} closed: {}; K = {{{}}} closed: {}; J ∩ K = {{{}}}",
        sub.j.join(", "),
        sub.j_closed,
        sub.k.join(", "),
        sub.k_closed,
        sub.intersection.join(", ")
    );
    Ok(true)
}

pub fn cmd_transform(
    eta: &Solution,
    generator: usize,
    mu: Option<f64>,
    family: FamilyChoice,
    points: usize,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let case = algebra_case(eta.potential(), family)?;
    if generator == 0 || generator > case.dim() {
        return Err(CliError::Usage(format!(
            "generator must be in 1..={}",
            case.dim()
        )));
    }
    let image = match mu {
        Some(mu) => group_action(generator, mu, eta)?,
        None => apply_tilde_named(case.gen(generator), eta, case.name(generator)),
    };
    let grid = image.grid(points, points);
    let res = residual(&image, image.potential(), &grid, image.is_dual())?;
    if let Some(path) = out {
        image.write_grid_csv(BufWriter::new(File::create(path)?), &grid)?;
    }
    print_json(&json!({
        "solution": image.descriptor(),
        "generator": case.name(generator),
        "field": case.gen(generator).to_string(),
        "mu": mu,
        "grid_points": grid.len(),
        "residual": res,
    }))?;
    Ok(true)
}
