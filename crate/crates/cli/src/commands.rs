//! The small subcommands.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use manivar::energies::{ModelConfig, ModelKind};
use manivar::gradients::{directional_check, random_state};
use manivar::io::{self, add_noise, read_mvimg, write_mvimg, NoiseKind, NoiseSpec};
use manivar::manifolds;
use manivar::PixelGrid;

use crate::{set_threads, CliResult, Failure, ThreadArgs};

#[derive(Args, Clone, Debug)]
pub struct NoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// wrapped_gaussian (s1 only) or tangent_gaussian; defaults to the former on s1.
    #[arg(long)]
    kind: Option<NoiseKind>,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn noise(a: &NoiseArgs) -> CliResult<()> {
    let u = read_mvimg(&a.input)?;
    let kind = a.kind.unwrap_or(if u.manifold().name() == "s1" {
        NoiseKind::WrappedGaussian
    } else {
        NoiseKind::TangentGaussian
    });
    let noisy = add_noise(&u, &NoiseSpec { kind, sigma: a.sigma, seed: a.seed })?;
    write_mvimg(&a.output, &noisy)?;
    println!("{}", json!({"sigma": a.sigma, "seed": a.seed, "mse": io::mse(&noisy, &u)?}));
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct MseArgs {
    a: PathBuf,
    b: PathBuf,
}

pub fn mse(a: &MseArgs) -> CliResult<()> {
    let u = read_mvimg(&a.a)?;
    let v = read_mvimg(&a.b)?;
    println!("{:?}", io::mse(&u, &v)?);
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct SynthArgs {
    /// Fixture name; see `--list`.
    #[arg(required_unless_present = "list")]
    name: Option<String>,
    #[arg(long, required_unless_present = "list")]
    output: Option<PathBuf>,
    /// Print the available fixtures.
    #[arg(long)]
    list: bool,
}

pub fn synth(a: &SynthArgs) -> CliResult<()> {
    if a.list {
        for n in io::synth::NAMES {
            println!("{n}");
        }
        return Ok(());
    }
    let (Some(name), Some(out)) = (&a.name, &a.output) else {
        return Err(Failure::Usage("synth needs a name and --output".into()));
    };
    write_mvimg(out, &io::synth(name)?)?;
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct GradcheckArgs {
    /// Random directions per case.
    #[arg(long, default_value_t = 200)]
    directions: usize,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    h: f64,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict to one model.
    #[arg(long)]
    model: Option<ModelKind>,
    /// Restrict to one manifold tag.
    #[arg(long)]
    manifold: Option<String>,
    #[command(flatten)]
    threads: ThreadArgs,
}

pub fn gradcheck(a: &GradcheckArgs) -> CliResult<()> {
    set_threads(&a.threads)?;
    let models: Vec<ModelKind> = match a.model {
        Some(m) if m.is_extrinsic() => return Err(Failure::Usage(format!("{m} has no gradient"))),
        Some(m) => vec![m],
        None => ModelKind::INTRINSIC.to_vec(),
    };
    let tags: Vec<String> = match &a.manifold {
        Some(t) => vec![t.clone()],
        None => ["s1", "s2", "so3", "spd2"].map(String::from).to_vec(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut failed = 0;
    for model in models {
        for tag in &tags {
            let m: Arc<dyn manivar::Manifold> = manifolds::from_name(tag)?;
            if model.needs_lie_group() && m.as_lie_group().is_none() {
                continue;
            }
            for grid in [PixelGrid::signal(6), PixelGrid::new(4, 3)] {
                let (state, f) = random_state(model, m.clone(), grid, 0.6, &mut rng)?;
                let cfg = ModelConfig::new(model, 0.7, 0.4, 1e-2);
                let chk = directional_check(&cfg, &state, &f, a.directions, a.h, &mut rng)?;
                let pass = chk.max_rel_err <= a.tol;
                failed += usize::from(!pass);
                println!(
                    "{}",
                    json!({
                        "model": model.name(),
                        "manifold": tag,
                        "grid": [grid.n1, grid.n2],
                        "directions": chk.directions,
                        "max_rel_err": chk.max_rel_err,
                        "mean_rel_err": chk.mean_rel_err,
                        "pass": pass,
                    })
                );
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} gradient checks exceeded {}", a.tol)));
    }
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct PlotArgs {
    /// `label=path.mvimg`; repeat to put several images side by side.
    #[arg(long = "image")]
    images: Vec<String>,
    /// JSON-lines run log; writes `iter,energy,max_change` instead.
    #[arg(long, conflicts_with = "images")]
    trace: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn trace_from_log(path: &PathBuf) -> CliResult<String> {
    let text = fs::read_to_string(path)?;
    let (mut energy, mut change) = (Vec::new(), Vec::new());
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let v: Value = serde_json::from_str(line).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        if let (Some(e), Some(c)) = (v["energy"].as_f64(), v["max_change"].as_f64()) {
            if v.get("iter").is_some() {
                energy.push(e);
                change.push(c);
            }
        }
    }
    Ok(io::trace_csv(&energy, &change))
}

pub fn plotdata(a: &PlotArgs) -> CliResult<()> {
    let csv = if let Some(t) = &a.trace {
        trace_from_log(t)?
    } else {
        if a.images.is_empty() {
            return Err(Failure::Usage("plotdata needs --image or --trace".into()));
        }
        let mut loaded = Vec::new();
        for spec in &a.images {
            let (label, path) = spec
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("expected label=path, got {spec}")))?;
            loaded.push((label.to_string(), read_mvimg(path)?));
        }
        let refs: Vec<(&str, &manivar::ManifoldImage)> = loaded.iter().map(|(l, i)| (l.as_str(), i)).collect();
        io::image_csv(&refs)?
    };
    match &a.output {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
