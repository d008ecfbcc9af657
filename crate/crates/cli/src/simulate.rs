use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hjb_iso::martingale::integrate;
use hjb_iso::sde::{
    density, ou_exact, simulate_affine, simulate_bernstein, simulate_besq, PathEnsemble, Scheme,
    SimConfig,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{AffineArgs, AffineParams, SimArgs, SimDefaults};
use crate::config::RunConfig;
use crate::eta::parse_eta;
use crate::{CliError, GIT_DESCRIBE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Affine,
    Besq,
    Bernstein,
    Ou,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Binary,
    Both,
}

/// Fully resolved `simulate` invocation. Its JSON form goes into the
/// manifest, so it must not carry anything that varies between
/// reproducing runs (thread count, wall time).
#[derive(Clone, Debug, Serialize)]
pub struct SimulateRequest {
    pub model: Model,
    pub eta: Option<String>,
    pub gamma: f64,
    #[serde(skip)]
    pub affine: AffineParams,
    pub sim: SimConfig,
    pub start: f64,
    pub observe: String,
    pub prefix: PathBuf,
    pub format: Format,
}

impl SimulateRequest {
    #[allow(clippy::too_many_arguments)]
    pub fn resolve(
        cfg: &RunConfig,
        model: Option<String>,
        eta: Option<String>,
        gamma: Option<f64>,
        affine: &AffineArgs,
        sim: &SimArgs,
        observe: String,
        out: Option<PathBuf>,
        format: Option<String>,
    ) -> Result<Self, CliError> {
        let model = match model
            .or(cfg.simulation.model.clone())
            .as_deref()
            .unwrap_or("affine")
        {
            "affine" => Model::Affine,
            "besq" => Model::Besq,
            "bernstein" => Model::Bernstein,
            "ou" => Model::Ou,
            other => return Err(CliError::Usage(format!("unknown model '{other}'"))),
        };
        let format = match format
            .or(cfg.output.format.clone())
            .as_deref()
            .unwrap_or("both")
        {
            "csv" => Format::Csv,
            "binary" => Format::Binary,
            "both" => Format::Both,
            other => return Err(CliError::Usage(format!("unknown format '{other}'"))),
        };
        if model != Model::Affine && observe != "x" {
            return Err(CliError::Usage("--observe applies to the affine model only".into()));
        }
        if !matches!(observe.as_str(), "x" | "r" | "z") {
            return Err(CliError::Usage(format!("unknown observable '{observe}'")));
        }
        let start = match model {
            Model::Besq => 0.0,
            _ => 1.0,
        };
        let (sim, start) = sim.resolve(
            cfg,
            SimDefaults {
                steps: 1000,
                paths: 1000,
                stride: 1,
                start,
            },
        )?;
        let eta = match model {
            Model::Bernstein => Some(eta.or(cfg.simulation.eta.clone()).unwrap_or("constant".into())),
            _ if eta.is_some() => {
                return Err(CliError::Usage("--eta applies to the bernstein model only".into()))
            }
            _ => None,
        };
        Ok(SimulateRequest {
            model,
            eta,
            gamma: gamma.or(cfg.potential.gamma).unwrap_or(1.0),
            affine: affine.resolve(cfg),
            sim,
            start,
            observe,
            prefix: out
                .or(cfg.output.prefix.clone())
                .unwrap_or_else(|| PathBuf::from("ensemble")),
            format,
        })
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn cmd_simulate(req: &SimulateRequest) -> Result<bool, CliError> {
    let (ensemble, model_json, scheme) = match req.model {
        Model::Affine => {
            let m = req.affine.model()?;
            let paths = simulate_affine(&m, req.start, &req.sim)?;
            let e = match req.observe.as_str() {
                "r" => paths.r.clone(),
                "z" => paths.z(),
                _ => paths.x.clone(),
            };
            (e, json!({"affine": m, "delta": m.delta()}), paths.scheme)
        }
        Model::Besq => {
            let delta = req.affine.delta_or(3.0);
            let scheme = match req.sim.scheme {
                Scheme::Auto => Scheme::BesqSumOfSquares,
                s => s,
            };
            let e = simulate_besq(delta, req.start, &req.sim.with_scheme(scheme))?;
            (e, json!({"besq": {"delta": delta}}), scheme)
        }
        Model::Bernstein => {
            let spec = req.eta.as_deref().expect("resolved for bernstein");
            let eta = parse_eta(spec, req.gamma)?;
            let e = simulate_bernstein(&eta, req.start, &req.sim)?;
            (e, json!({"bernstein": eta.descriptor()}), Scheme::EulerMaruyama)
        }
        Model::Ou => {
            let m = req.affine.model_with_delta(1.0)?;
            let e = ou_exact(&m, req.start, &req.sim)?;
            (e, json!({"ou": m}), Scheme::ExactOu)
        }
    };
    let mut files = Vec::new();
    if matches!(req.format, Format::Csv | Format::Both) {
        let path = with_suffix(&req.prefix, ".csv");
        let mut w = BufWriter::new(File::create(&path)?);
        ensemble.write_csv(&mut w)?;
        w.flush()?;
        files.push(path);
    }
    if matches!(req.format, Format::Binary | Format::Both) {
        let path = with_suffix(&req.prefix, ".bin");
        let mut w = BufWriter::new(File::create(&path)?);
        ensemble.write_binary(&mut w)?;
        w.flush()?;
        files.push(path);
    }
    let manifest = json!({
        "tool": "hjb-iso",
        "version": env!("CARGO_PKG_VERSION"),
        "git_describe": GIT_DESCRIBE,
        "request": req,
        "command": regenerate_command(req),
        "model": model_json,
        "scheme": scheme,
        "n_paths": ensemble.n_paths(),
        "n_times": ensemble.n_times(),
        "hit_fraction": ensemble.hit_fraction(),
        "files": files.iter().map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
    });
    let mpath = with_suffix(&req.prefix, ".manifest.json");
    std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)? + "\n")?;
    println!("{}", serde_json::to_string_pretty(&summary(&ensemble, &files, &mpath))?);
    Ok(true)
}

/// One command line that reproduces the data files.
fn regenerate_command(req: &SimulateRequest) -> String {
    let model = match req.model {
        Model::Affine => "affine",
        Model::Besq => "besq",
        Model::Bernstein => "bernstein",
        Model::Ou => "ou",
    };
    let scheme = serde_json::to_value(req.sim.scheme).expect("scheme serializes");
    let mut parts = vec![format!("hjb-iso simulate --model {model}")];
    let a = &req.affine;
    match req.model {
        Model::Affine | Model::Ou => {
            parts.push(format!("--alpha {} --beta {} --lambda {}", a.alpha, a.beta, a.lambda));
            match (a.delta, a.phi) {
                (_, Some(phi)) => parts.push(format!("--phi {phi}")),
                (Some(d), None) => parts.push(format!("--delta {d}")),
                (None, None) => {}
            }
        }
        Model::Besq => parts.push(format!("--delta {}", a.delta_or(3.0))),
        Model::Bernstein => parts.push(format!(
            "--eta {} --gamma {}",
            req.eta.as_deref().unwrap_or("constant"),
            req.gamma
        )),
    }
    let s = &req.sim;
    parts.push(format!(
        "--t0 {} --t1 {} --steps {} --paths {} --seed {} --scheme {} --stride {} --start {}",
        s.t0,
        s.t1,
        s.steps,
        s.n_paths,
        s.seed,
        scheme.as_str().unwrap_or("auto"),
        s.record_stride,
        req.start
    ));
    if req.model == Model::Affine {
        parts.push(format!("--observe {}", req.observe));
    }
    let format = match req.format {
        Format::Csv => "csv",
        Format::Binary => "binary",
        Format::Both => "both",
    };
    parts.push(format!("--out {} --format {format}", req.prefix.display()));
    parts.join(" ")
}

fn summary(e: &PathEnsemble, files: &[PathBuf], manifest: &Path) -> serde_json::Value {
    json!({
        "n_paths": e.n_paths(),
        "n_times": e.n_times(),
        "hit_fraction": e.hit_fraction(),
        "files": files,
        "manifest": manifest,
    })
}

pub fn cmd_density(
    affine: &AffineArgs,
    cfg: &RunConfig,
    z0: f64,
    t: f64,
    points: usize,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let params = affine.resolve(cfg);
    let delta = params.delta_or(3.0);
    if delta != 1.0 && delta != 3.0 {
        return Err(CliError::Usage("density needs --delta 1 or 3".into()));
    }
    let m = params.model_with_delta(delta)?;
    let d = density(delta as u8, &m, z0, t)?;
    let (lo, hi) = d.support();
    let norm = integrate(|x| d.pdf(x), lo, hi, 1e-13)?;
    if let Some(path) = out {
        if points < 2 {
            return Err(CliError::Usage("--points must be at least 2".into()));
        }
        // Plot range: the support clipped to six standard deviations.
        let s = d.sigma2().sqrt();
        let (a, b) = (lo.max(d.center() - 6.0 * s), hi.min(d.center() + 6.0 * s));
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "q,pdf,cdf")?;
        for k in 0..points {
            let q = a + (b - a) * k as f64 / (points - 1) as f64;
            writeln!(w, "{q},{},{}", d.pdf(q), d.cdf(q))?;
        }
        w.flush()?;
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "density": d,
            "sigma2": d.sigma2(),
            "center": d.center(),
            "support": [lo, hi],
            "normalization": norm,
            "raw_moments": (1..=4).map(|k| d.raw_moment(k)).collect::<Vec<_>>(),
            "csv": out,
        }))?
    );
    Ok(true)
}
