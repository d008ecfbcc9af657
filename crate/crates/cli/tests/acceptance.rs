//! End-to-end acceptance run: every criterion at its stated size and
//! tolerance, one PASS/FAIL line each (written straight to stderr so the
//! lines survive output capture).
//!
//! Two criteria cannot hold as stated and are reported as FAIL: the
//! pairs of the δ = 3 martingale suite whose Ω has a 1/q singularity, and
//! constancy of E[s(t)]. Both are strict local martingales. For those the
//! test instead asserts the diagnosis (the failure mechanism), so a
//! regression elsewhere still breaks the build.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hjb_iso::isovectors::tables::compare_with_reference;
use hjb_iso::isovectors::{
    basis, bracket, commutator_fd_deviation, limit_check, structure_constants,
    structure_identification, transformed_basis, AlgebraCase, CaseLabel, Potential,
    StructureKind, TildeField,
};
use hjb_iso::martingale::{
    density_fit, integrate, mean_se, omega_martingale_suite, SuiteReport, DEFAULT_THRESHOLD,
};
use hjb_iso::sde::{
    besq_time_change, clock, density, ou_exact, s_expectation, simulate_affine, simulate_besq_on_grid,
    AffineModel, Scheme, SimConfig,
};
use hjb_iso::solutions::omega_tables::{corrected, OmegaPoint};
use hjb_iso::solutions::{
    apply_tilde, contact_hamiltonian, group_action, omega_eta, residual, section, Solution,
};
use statrs::distribution::{ContinuousCDF, Normal};

struct Outcome {
    pass: bool,
    detail: String,
    /// For a criterion that cannot hold as stated: whether the observed
    /// failure matches the recorded mechanism.
    diagnosis: Option<bool>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            detail,
            diagnosis: None,
        }
    }
}

// eprintln! output is captured by the test harness; a raw stderr write is not.
#[allow(clippy::explicit_write)]
fn report(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
            out.detail.push_str(&format!("; runtime {took:.2?} exceeds {limit:?}"));
        }
    }
    let verdict = if out.pass { "PASS" } else { "FAIL" };
    let mut line = format!("criterion {id:>2} {verdict} [{:.2?}] {name}: {}", took, out.detail);
    if let Some(d) = out.diagnosis {
        line.push_str(&format!(
            " (failure mechanism {})",
            if d { "confirmed" } else { "NOT confirmed" }
        ));
    }
    writeln!(std::io::stderr(), "{line}").unwrap();
    out.pass || out.diagnosis == Some(true)
}

fn pot(c: f64, d: f64, g: f64) -> Potential {
    Potential::new(c, d, g).unwrap()
}

fn square_grid(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (lo + step * i as f64, lo + step * j as f64)))
        .collect()
}

fn brackets_match_tables() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    let fd_grid: Vec<(f64, f64)> = square_grid(0.3, 1.5, 4);
    for gamma in [1.0, 1.3] {
        for (d, fam) in [(0.0, "M"), (0.5, "R"), (-0.5, "V")] {
            let native = basis(pot(0.0, d, gamma));
            let case = if d == 0.0 {
                native
            } else {
                transformed_basis(&native).unwrap().limit
            };
            let checks = compare_with_reference(&case).unwrap();
            let bad: Vec<String> = checks
                .iter()
                .filter(|c| !c.matches)
                .map(|c| {
                    let claim = TildeField::combination(&c.expected, &case.basis);
                    let fd = commutator_fd_deviation(case.gen(c.i), case.gen(c.j), &claim, &fd_grid);
                    format!("({},{}) fd-dev {fd:.1e}", c.i, c.j)
                })
                .collect();
            pass &= checks.len() == 15 && bad.is_empty();
            if !bad.is_empty() {
                details.push(format!("{fam} γ={gamma} mismatches {}", bad.join(" ")));
            }
        }
    }
    let r = transformed_basis(&basis(pot(0.0, 0.5, 1.0))).unwrap().limit;
    let eps = r.epsilon.unwrap();
    let r23 = bracket(r.gen(2), r.gen(3)).approx_eq(&r.gen(1).scale(0.5 * eps * eps).add(r.gen(3)));
    let v = transformed_basis(&basis(pot(0.0, -0.5, 1.0))).unwrap().limit;
    let v56 = bracket(v.gen(5), v.gen(6)).approx_eq(&v.gen(4).scale(-1.0));
    pass &= r23 && v56;
    details.push(format!(
        "M/R/V x γ∈{{1,1.3}}: 6x15 pairs exact; [R2,R3]=½ε²R1+R3 {r23}; [V5,V6]=−V4 {v56}"
    ));
    Outcome::new(pass, details.join("; "))
}

fn jacobi_and_closure() -> Outcome {
    let mut triples = 0usize;
    let mut failures = 0usize;
    let mut closed = 0usize;
    for label in CaseLabel::ALL {
        let case = basis(label.representative(1.3));
        closed += structure_constants(&case).is_ok() as usize;
        let n = case.dim();
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    let (x, y, z) = (case.gen(i), case.gen(j), case.gen(k));
                    let jac = bracket(&bracket(x, y), z)
                        .add(&bracket(&bracket(y, z), x))
                        .add(&bracket(&bracket(z, x), y));
                    triples += 1;
                    failures += !jac.is_zero() as usize;
                }
            }
        }
    }
    Outcome::new(
        failures == 0 && closed == 6,
        format!("{triples} triples, {failures} Jacobi failures; {closed}/6 cases closed"),
    )
}

fn structure_theorem() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for label in CaseLabel::ALL {
        let case = basis(label.representative(1.0));
        let r = structure_identification(&case).unwrap();
        let want = if label.c_is_zero() {
            StructureKind::Sl2SemidirectHeisenberg
        } else {
            StructureKind::Sl2DirectCenter
        };
        let sl2 = bracket(&r.h, &r.e).approx_eq(&r.e.scale(2.0))
            && bracket(&r.h, &r.f).approx_eq(&r.f.scale(-2.0))
            && bracket(&r.e, &r.f).approx_eq(&r.h);
        pass &= r.kind == want && sl2;
        notes.push(format!("{label}: {:?}", r.kind));
    }
    // Heisenberg ideal and its center in the free basis.
    let m = basis(pot(0.0, 0.0, 1.0));
    let center = (1..=6).all(|i| bracket(m.gen(4), m.gen(i)).is_zero());
    let [a, b, c] = bracket(m.gen(5), m.gen(6)).eval(0.4, 0.7);
    let [a4, b4, c4] = m.gen(4).eval(0.4, 0.7);
    let heis = bracket(m.gen(5), m.gen(6)).approx_eq(&m.gen(4).scale(c / c4))
        && a == 0.0
        && b == 0.0
        && a4 == 0.0
        && b4 == 0.0
        && c != 0.0;
    pass &= center && heis;
    Outcome::new(
        pass,
        format!("sl2 triples exact; [M5,M6] ∈ ⟨M4⟩ {heis}; M4 central {center}; {}", notes.join(", ")),
    )
}

fn continuity_in_d() -> Outcome {
    let grid = square_grid(-2.0, 2.0, 9);
    let mut pass = true;
    let mut notes = Vec::new();
    for sign in [1.0, -1.0] {
        let ds: Vec<f64> = (1..=4).map(|k| sign * 10f64.powi(-2 * k)).collect();
        let rows = limit_check(&ds, 0.0, 1.0, &grid).unwrap();
        let devs: Vec<f64> = rows.iter().map(|r| r.max_deviation()).collect();
        let ratios: Vec<f64> = rows.iter().map(|r| r.max_deviation() / r.epsilon).collect();
        let monotone = devs.windows(2).all(|w| w[1] < w[0]);
        // O(ε): dev/ε stays bounded as ε shrinks (D < 0 converges faster).
        let order_eps = ratios.iter().all(|r| *r < 20.0);
        pass &= monotone && order_eps;
        notes.push(format!(
            "D {}: dev {:?}, dev/ε {:?}",
            if sign > 0.0 { ">0" } else { "<0" },
            devs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>(),
            ratios.iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>()
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

fn pde_residuals() -> Outcome {
    let tol = 1e-8;
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut check = |eta: &Solution| {
        let grid = eta.grid(9, 9);
        let r = residual(eta, eta.potential(), &grid, eta.is_dual()).unwrap();
        worst = worst.max(r.relative);
        count += 1;
    };
    for (a, l, d) in [(2.0, 2.0, 3.0), (2.0, 2.0, 1.0), (1.0, 0.5, 2.0), (1.5, -1.0, 4.0), (3.0, 1.0, 0.5)] {
        check(&Solution::affine(a, l, d).unwrap());
    }
    for seed in [Solution::constant(1.0, 1.0).unwrap(), Solution::gaussian(1.0, 2.0, 0.0).unwrap()] {
        for i in 1..=6 {
            for mu in [-0.3, 0.3] {
                check(&group_action(i, mu, &seed).unwrap());
            }
        }
    }
    let duals = [
        Solution::density_ratio(1, 2.0, 2.0, 0.5).unwrap(),
        Solution::density_ratio(3, 2.0, 2.0, 0.0).unwrap(),
    ];
    for d in &duals {
        check(d);
    }
    Outcome::new(worst < tol, format!("{count} solutions, worst relative residual {worst:.2e} (< {tol:.0e})"))
}

fn tilde_identity() -> Outcome {
    let case = basis(pot(0.0, 0.0, 1.2));
    let etas = [
        Solution::constant(1.5, 1.2).unwrap(),
        Solution::exponential(0.7, 1.2).unwrap(),
        Solution::gaussian(1.2, 2.0, 0.3).unwrap(),
    ];
    let mut worst = 0.0f64;
    for eta in &etas {
        for i in 1..=case.dim() {
            let h = contact_hamiltonian(case.gen(i), eta);
            let img = apply_tilde(case.gen(i), eta);
            for (t, q) in eta.grid(7, 7) {
                let a = h.tilde_value(t, q).unwrap();
                let b = img.value(t, q).unwrap();
                worst = worst.max((a - b).abs() / b.abs().max(a.abs()).max(1e-300));
            }
        }
    }
    Outcome::new(worst < 1e-10, format!("6 generators x 3 solutions, worst relative gap {worst:.2e}"))
}

fn limit_case(eta: &Solution) -> AlgebraCase {
    let case = basis(eta.potential());
    if eta.potential().d == 0.0 {
        case
    } else {
        transformed_basis(&case).unwrap().limit
    }
}

fn omega_closed_forms() -> Outcome {
    let etas = [
        Solution::gaussian(1.3, 2.0, 0.2).unwrap(),
        Solution::constant(1.0, 0.7).unwrap(),
        Solution::affine(2.0, 2.0, 3.0).unwrap(),
        Solution::affine(2.4, 1.0, 1.0).unwrap(),
        Solution::oscillator(-0.3, 1.1, 0.2).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut entries = 0;
    for eta in &etas {
        let case = limit_case(eta);
        for (t, q) in eta.grid(5, 5) {
            let s = section(eta, t, q).unwrap();
            let p = OmegaPoint {
                t,
                q,
                eta: eta.value(t, q).unwrap(),
                e_tilde: s.e_tilde,
                b_tilde: s.b_tilde,
                gamma: eta.gamma(),
                epsilon: case.epsilon.unwrap_or(0.0),
            };
            for i in 1..=6 {
                for j in 1..=6 {
                    let direct = omega_eta(case.gen(i), case.gen(j), eta).eval(t, q).unwrap();
                    let closed = corrected(case.family, i, j, &p).unwrap();
                    worst = worst.max((direct - closed).abs() / direct.abs().max(1.0));
                    entries += 1;
                }
            }
        }
    }
    Outcome::new(
        worst < 1e-10,
        format!("M, R, V tables (documented corrections), {entries} evaluations, worst relative gap {worst:.2e}"),
    )
}

fn suite_line(tag: &str, r: &SuiteReport) -> String {
    let tested = r.pairs.iter().filter(|p| !p.trivial).count();
    let failing: Vec<&str> = r.pairs.iter().filter(|p| !p.pass).map(|p| p.name.as_str()).collect();
    let max_z = r
        .pairs
        .iter()
        .filter_map(|p| p.report.as_ref())
        .filter(|m| m.pass)
        .map(|m| m.max_abs_z)
        .fold(0.0, f64::max);
    format!(
        "({tag}) {tested} non-trivial pairs, failing [{}], max |z| of passing {max_z:.2}, \
         survivors {:.4}, q² calibration |z| {:.1} ({})",
        failing.join(" "),
        r.surviving_fraction,
        r.calibration.max_abs_z,
        if r.calibration.pass { "passes: BAD" } else { "fails as it should" }
    )
}

/// Ω blows up like 1/q at the boundary of a δ = 3 path's range.
fn singular_at_zero(case: &AlgebraCase, eta: &Solution, i: usize, j: usize) -> bool {
    let om = omega_eta(case.gen(i), case.gen(j), eta);
    let (t, a, b) = (0.5, 1e-3, 1e-4);
    let va = om.eval(t, a).unwrap();
    let vb = om.eval(t, b).unwrap();
    vb.abs() > 5.0 * va.abs() && va.abs() > 10.0
}

fn martingale_suites() -> Outcome {
    let cfg = SimConfig::new(0.0, 1.0, 1000, 100_000, 2024).with_stride(100);
    let free = Solution::constant(1.0, 1.0).unwrap();
    let ou = Solution::affine(2.0, 2.0, 1.0).unwrap();
    let d3 = Solution::affine(2.0, 2.0, 3.0).unwrap();
    let run = |eta: &Solution| {
        let case = limit_case(eta);
        let r = omega_martingale_suite(&case, eta, 1.0, &cfg, DEFAULT_THRESHOLD).unwrap();
        (case, r)
    };
    let (_, a) = run(&free);
    let (_, b) = run(&ou);
    let (case_c, c) = run(&d3);
    let calib_ok = [&a, &b, &c].iter().all(|r| !r.calibration.pass);
    let pass = a.pass && b.pass && c.pass && calib_ok;
    let detail = [suite_line("a", &a), suite_line("b", &b), suite_line("c", &c)].join("; ");
    let mut out = Outcome::new(pass, detail);
    if !pass {
        // Recorded mechanism: only δ = 3 pairs with a 1/q singularity fail,
        // and the calibration still fails everywhere.
        let failing = c.failing_pairs();
        let diagnosed = a.pass
            && b.pass
            && calib_ok
            && !failing.is_empty()
            && failing.iter().all(|&(i, j)| singular_at_zero(&case_c, &d3, i, j))
            && c.pairs
                .iter()
                .filter(|p| !p.trivial && p.pass)
                .all(|p| !singular_at_zero(&case_c, &d3, p.i, p.j));
        out.diagnosis = Some(diagnosed);
    }
    out
}

fn delta_one_law() -> Outcome {
    let m = AffineModel::from_delta(2.0, 2.0, 1.0).unwrap();
    let z0 = 1.0;
    let cfg = SimConfig::new(0.0, 1.0, 100, 10_000, 99).with_stride(100);
    let e = ou_exact(&m, z0, &cfg).unwrap().without_hits();
    let law = density(1, &m, z0, 1.0).unwrap();
    let fit = density_fit(&e, 1.0, &law).unwrap();
    let xs = e.column(e.n_times() - 1);
    let (mean, se) = mean_se(&xs);
    let var_terms: Vec<f64> = xs.iter().map(|x| (x - law.center()).powi(2)).collect();
    let (var, var_se) = mean_se(&var_terms);
    let z_mean = (mean - law.center()) / se;
    let z_var = (var - law.sigma2()) / var_se;
    let pass = z_mean.abs() < 3.0 && z_var.abs() < 3.0 && fit.moments_within(3.0) && fit.ks_within_95();
    Outcome::new(
        pass,
        format!(
            "n={}, mean z {z_mean:.2}, variance z {z_var:.2}, raw-moment z {:?}, KS {:.4} vs 95% band {:.4}",
            fit.n,
            fit.moments.iter().map(|m| format!("{:.2}", m.z)).collect::<Vec<_>>(),
            fit.ks,
            fit.ks_band_95
        ),
    )
}

fn delta_three_law() -> Outcome {
    let m = AffineModel::from_delta(2.0, 2.0, 3.0).unwrap();
    let law = density(3, &m, 0.0, 1.0).unwrap();
    let (lo, hi) = law.support();
    let norm = integrate(|x| law.pdf(x), lo, hi, 1e-13).unwrap();
    let norm_ok = (norm.value - 1.0).abs() < 1e-10;

    let times = [0.0, 1.0];
    let grid = [clock(&m, 0.0), clock(&m, 1.0)];
    let besq = simulate_besq_on_grid(3.0, 0.0, &grid, 10_000, 31, Scheme::BesqSumOfSquares).unwrap();
    let z = besq_time_change(&m, &besq, &times).unwrap().map(|_, v| v.sqrt());
    let fit = density_fit(&z, 1.0, &law).unwrap();

    // s(t) = e^{−λt/2}/z(t) from z0 = 1, through the exact construction.
    let z0 = 1.0;
    let ts: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
    let g: Vec<f64> = ts.iter().map(|&t| clock(&m, t)).collect();
    let besq = simulate_besq_on_grid(3.0, z0 * z0, &g, 10_000, 32, Scheme::BesqSumOfSquares).unwrap();
    let x = besq_time_change(&m, &besq, &ts).unwrap();
    let mut worst_const = 0.0f64;
    let mut worst_formula = 0.0f64;
    for (k, &t) in ts.iter().enumerate().skip(1) {
        let s: Vec<f64> = x.column(k).iter().map(|v| (-0.5 * m.lambda * t).exp() / v.sqrt()).collect();
        let (mean, se) = mean_se(&s);
        worst_const = worst_const.max(((mean - 1.0 / z0) / se).abs());
        worst_formula = worst_formula.max(((mean - s_expectation(&m, z0, t)) / se).abs());
    }
    let s_const = worst_const < 3.0;
    let pass = norm_ok && fit.ks_within_95() && s_const;
    let mut out = Outcome::new(
        pass,
        format!(
            "∫ρ−1 = {:.1e}; KS {:.4} vs 95% band {:.4} (n={}); E[s(t)] vs s(0): worst |z| {worst_const:.1}; \
             vs erf(z0/√(2τ))/z0: worst |z| {worst_formula:.2}; E[s(1)] = {:.4}",
            norm.value - 1.0,
            fit.ks,
            fit.ks_band_95,
            fit.n,
            s_expectation(&m, z0, 1.0)
        ),
    );
    if !pass {
        // Recorded mechanism: s is a strict local martingale whose mean
        // follows the erf law; everything else holds.
        out.diagnosis = Some(norm_ok && fit.ks_within_95() && !s_const && worst_formula < 3.5);
    }
    out
}

fn positivity_dichotomy() -> Outcome {
    let (alpha, lambda) = (2.0, 2.0);
    let x0 = 0.05 * alpha * alpha;
    let cfg = SimConfig::new(0.0, 1.0, 10_000, 10_000, 11).with_stride(10_000);
    let m3 = AffineModel::from_delta(alpha, lambda, 3.0).unwrap();
    let m1 = AffineModel::from_delta(alpha, lambda, 1.0).unwrap();
    let p3 = simulate_affine(&m3, m3.r_from_x(x0), &cfg).unwrap();
    let p1 = simulate_affine(&m1, m1.r_from_x(x0), &cfg).unwrap();
    let euler3 = simulate_affine(&m3, m3.r_from_x(x0), &cfg.with_scheme(Scheme::EulerMaruyama)).unwrap();
    let f3 = p3.x.hit_fraction();
    let f1 = p1.x.hit_fraction();

    // Oracle: BESQ¹ by sum of squares on the clock grid of the same steps.
    let ts = cfg.recorded_times();
    let fine: Vec<f64> = (0..=cfg.steps).map(|k| clock(&m1, cfg.time(k))).collect();
    let oracle = simulate_besq_on_grid(1.0, x0, &fine, cfg.n_paths, 12, Scheme::BesqSumOfSquares).unwrap();
    let fo = oracle.hit_fraction();
    let tau = clock(&m1, *ts.last().unwrap());
    let normal = Normal::new(0.0, 1.0).unwrap();
    let exact = 2.0 * normal.cdf(-(x0 / tau).sqrt());
    let n = cfg.n_paths as f64;
    let se = (f1 * (1.0 - f1) / n + fo * (1.0 - fo) / n).sqrt();
    let agree = (f1 - fo).abs() < 4.0 * se;
    let pass = f3 == 0.0 && f1 > 0.2 && agree;
    Outcome::new(
        pass,
        format!(
            "X0={x0}, 10⁴ paths x 10⁴ steps: δ=3 hit fraction {f3} ({:?}); δ=1 {f1:.4} ({:?}); \
             BESQ¹ oracle {fo:.4} (|Δ|/SE {:.2}); continuous-time 2Φ(−√(X0/τ)) = {exact:.4}; \
             full-truncation Euler δ=3 for reference {:.4}",
            p3.scheme,
            p1.scheme,
            (f1 - fo).abs() / se,
            euler3.x.hit_fraction()
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_hjb-iso"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    (o.status.code(), o.stdout)
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 5] = [
        &["simulate", "--model", "affine", "--alpha", "2", "--lambda", "2", "--delta", "3", "--paths", "2000", "--steps", "200", "--seed", "7", "--out", "run"],
        &["simulate", "--model", "besq", "--delta", "3", "--scheme", "besq-sum-of-squares", "--paths", "500", "--steps", "100", "--seed", "7", "--out", "run"],
        &["simulate", "--model", "bernstein", "--eta", "affine:2,2,1", "--paths", "1000", "--steps", "100", "--seed", "7", "--out", "run"],
        &["verify", "--suite", "omega", "--eta", "affine:2,2,1", "--paths", "3000", "--steps", "100", "--stride", "20", "--seed", "5"],
        &["verify", "--suite", "density", "--delta", "1", "--paths", "2000", "--seed", "5"],
    ];
    let mut mismatches = Vec::new();
    for (c, args) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for (r, threads) in ["1", "1", "4"].iter().enumerate() {
            let dir = root.path().join(format!("c{c}r{r}"));
            std::fs::create_dir(&dir).unwrap();
            let mut full = vec!["--threads", threads];
            full.extend_from_slice(args);
            let (code, stdout) = run_cli(&dir, &full);
            let mut files = Vec::new();
            for ext in ["csv", "bin", "manifest.json"] {
                files.push(std::fs::read(dir.join(format!("run.{ext}"))).ok());
            }
            outputs.push((code, stdout, files));
        }
        if outputs[0].0 != Some(0) {
            mismatches.push(format!("{} exit {:?}", args[0], outputs[0].0));
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            mismatches.push(format!("command {c} ({})", args.join(" ")));
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} seeded commands x (2 runs at 1 thread, 1 run at 4 threads): stdout and files byte-identical", commands.len())
        } else {
            format!("differences: {}", mismatches.join("; "))
        },
    )
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        report(1, "bracket tables", Some(s(1)), brackets_match_tables),
        report(2, "Jacobi identity and closure", Some(s(5)), jacobi_and_closure),
        report(3, "structure theorem", Some(s(1)), structure_theorem),
        report(4, "continuity in D", Some(s(5)), continuity_in_d),
        report(5, "PDE residuals", Some(s(10)), pde_residuals),
        report(6, "tilde action equals contact Hamiltonian", Some(s(5)), tilde_identity),
        report(7, "Omega closed forms", Some(s(5)), omega_closed_forms),
        report(8, "martingale suites", None, martingale_suites),
        report(9, "delta = 1 law", None, delta_one_law),
        report(10, "delta = 3 law", None, delta_three_law),
        report(11, "positivity dichotomy", None, positivity_dichotomy),
        report(12, "determinism", None, determinism),
    ];
    let bad: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(bad.is_empty(), "criteria failing without a confirmed diagnosis: {bad:?}");
}
