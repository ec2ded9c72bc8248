//! `denoise` and `decompose`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Value};

use manivar::energies::{Grouping, ModelConfig, ModelKind, ModelState};
use manivar::euclid::VecImage;
use manivar::io::{mse, read_mvimg, write_mvimg};
use manivar::solvers::{
    admm_extrinsic, gradient_descent, gradient_descent_tangent_bundle, initial_state, AdmmParams, DescentParams,
    ProgressEvent,
};
use manivar::{ManifoldImage, TangentField};

use crate::{set_threads, CliResult, Failure, ThreadArgs};

#[derive(Args, Clone, Debug)]
pub struct SolveArgs {
    /// Noisy image (`.mvimg`).
    #[arg(long)]
    input: PathBuf,
    /// Restored image (`.mvimg`). Components go next to it.
    #[arg(long)]
    output: PathBuf,
    /// Expected manifold tag of the input; checked if given.
    #[arg(long)]
    manifold: Option<String>,
    /// tv, additive, ic_midpoint, tgv_pole, ic_lie, tgv_lie, ext_ic, ext_tgv, ext_additive.
    #[arg(long)]
    model: ModelKind,
    #[arg(long)]
    alpha: f64,
    /// Balance of the two prior terms; ignored by `tv`.
    #[arg(long)]
    beta: Option<f64>,
    /// Smoothing of the square roots.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Initial step size of the line search.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Backtracking factor.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Armijo constant.
    #[arg(long, default_value_t = 1e-4)]
    c: f64,
    /// Stop when the largest per-pixel move (ADMM: the residuals) falls below this.
    #[arg(long)]
    delta: Option<f64>,
    /// Iteration cap (ADMM: outer iterations).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Start each line search at `min(σ, t_prev/ρ)`.
    #[arg(long)]
    warm_start: bool,
    /// Seed that produced the input, copied into the run summary.
    #[arg(long)]
    seed_report: Option<u64>,
    /// Clean image; adds MSE values to the summary.
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Write one progress record every this many iterations (0: none).
    #[arg(long, default_value_t = 1)]
    log_every: usize,
    /// Lie TGV: one square root over the whole image instead of one per pixel.
    #[arg(long)]
    global_roots: bool,
    /// ADMM penalty.
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
    /// ADMM primal-dual iterations per outer step.
    #[arg(long, default_value_t = 200)]
    inner_iter: usize,
    /// ADMM TGV with the symmetrized second difference.
    #[arg(long)]
    symmetric_tgv: bool,
    /// Allow extrinsic models on SPD data.
    #[arg(long)]
    allow_spd: bool,
    #[command(flatten)]
    threads: ThreadArgs,
}

struct Outcome {
    u: ManifoldImage,
    iterations: usize,
    initial_energy: f64,
    trace: Vec<f64>,
    stop: &'static str,
    components: Components,
}

enum Components {
    None,
    Pair(ManifoldImage, ManifoldImage),
    Tangent(TangentField),
    Group(Vec<ManifoldImage>),
    Embedded(Vec<VecImage>),
}

fn config(a: &SolveArgs) -> CliResult<ModelConfig> {
    let beta = match (a.beta, a.model) {
        (Some(b), _) => b,
        (None, ModelKind::Tv) => 1.0,
        (None, m) => return Err(Failure::Usage(format!("--beta is required for {m}"))),
    };
    let mut cfg = ModelConfig::new(a.model, a.alpha, beta, a.epsilon);
    if a.global_roots {
        cfg.lie_tgv_grouping = Grouping::Global;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn solve(a: &SolveArgs, cfg: &ModelConfig, f: &ManifoldImage, log: &mut dyn FnMut(&ProgressEvent)) -> CliResult<Outcome> {
    if cfg.model.is_extrinsic() {
        let mut p = AdmmParams {
            penalty: a.penalty,
            inner_iter: a.inner_iter,
            symmetric_tgv: a.symmetric_tgv,
            allow_spd: a.allow_spd,
            ..AdmmParams::default()
        };
        if let Some(n) = a.max_iter {
            p.max_iter = n;
        }
        if let Some(d) = a.delta {
            p.tol_primal = d;
            p.tol_dual = d;
        }
        let r = admm_extrinsic(cfg, f, &p, Some(log))?;
        return Ok(Outcome {
            u: r.reconstruction,
            iterations: r.iterations,
            initial_energy: r.feasible_trace.first().copied().unwrap_or(f64::NAN),
            trace: r.best_trace,
            stop: r.stop_reason.name(),
            components: Components::Embedded(r.components),
        });
    }
    let mut p = DescentParams::for_grid(f.grid());
    p.sigma = a.sigma;
    p.rho = a.rho;
    p.c = a.c;
    p.warm_start = a.warm_start;
    if let Some(d) = a.delta {
        p.delta_stop = d;
    }
    if let Some(n) = a.max_iter {
        p.max_iter = n;
    }
    let r = match initial_state(cfg, f)? {
        ModelState::Tangent(xi) => gradient_descent_tangent_bundle(cfg, xi, f, &p, Some(log))?,
        s => gradient_descent(cfg, s, f, &p, Some(log))?,
    };
    let u = r.final_state.reconstruction(cfg.model)?;
    let components = match r.final_state {
        ModelState::Image(_) => Components::None,
        ModelState::Pair { v, w } => Components::Pair(v, w),
        ModelState::Tangent(xi) => Components::Tangent(xi),
        ModelState::LieTgv { a, .. } => Components::Group(a),
    };
    Ok(Outcome {
        u,
        iterations: r.iterations,
        initial_energy: r.initial_energy,
        trace: r.energy_trace,
        stop: r.stop_reason.name(),
        components,
    })
}

/// `dir/stem_suffix`.
fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    output.with_file_name(format!("{stem}_{suffix}"))
}

fn tangent_csv(xi: &TangentField) -> String {
    let grid = xi.base().grid();
    let len = xi.base().point_len();
    let mut out = String::from("index,i1,i2,component");
    for c in 0..len {
        out.push_str(&format!(",x{}", c + 1));
    }
    out.push('\n');
    for k in 0..grid.len() {
        let (i1, i2) = grid.coords(k);
        for c in 0..xi.components() {
            out.push_str(&format!("{k},{i1},{i2},{}", c + 1));
            for v in xi.vector(k, c) {
                out.push_str(&format!(",{v:e}"));
            }
            out.push('\n');
        }
    }
    out
}

fn embedded_csv(img: &VecImage) -> String {
    let grid = img.grid();
    let mut out = String::from("index,i1,i2");
    for c in 0..img.dim() {
        out.push_str(&format!(",x{}", c + 1));
    }
    out.push('\n');
    for k in 0..grid.len() {
        let (i1, i2) = grid.coords(k);
        out.push_str(&format!("{k},{i1},{i2}"));
        for v in img.pixel(k) {
            out.push_str(&format!(",{v:e}"));
        }
        out.push('\n');
    }
    out
}

fn embedded_labels(model: ModelKind, n: usize) -> Vec<String> {
    match model {
        ModelKind::ExtIc => vec!["v".into(), "w".into()],
        ModelKind::ExtTgv => std::iter::once("u".to_string()).chain((1..n).map(|c| format!("xi{c}"))).collect(),
        _ => (0..n).map(|c| format!("c{c}")).collect(),
    }
}

fn write_components(out: &Path, model: ModelKind, comps: &Components) -> CliResult<Vec<String>> {
    let mut written = Vec::new();
    let mut put = |path: PathBuf, f: &dyn Fn(&Path) -> CliResult<()>| -> CliResult<()> {
        f(&path)?;
        written.push(path.display().to_string());
        Ok(())
    };
    match comps {
        Components::None => return Err(Failure::Usage(format!("{model} has no components to decompose into"))),
        Components::Pair(v, w) => {
            put(sibling(out, "v.mvimg"), &|p| Ok(write_mvimg(p, v)?))?;
            put(sibling(out, "w.mvimg"), &|p| Ok(write_mvimg(p, w)?))?;
        }
        Components::Tangent(xi) => put(sibling(out, "xi.csv"), &|p| Ok(fs::write(p, tangent_csv(xi))?))?,
        Components::Group(a) => {
            for (c, img) in a.iter().enumerate() {
                put(sibling(out, &format!("a{}.mvimg", c + 1)), &|p| Ok(write_mvimg(p, img)?))?;
            }
        }
        Components::Embedded(x) => {
            for (img, label) in x.iter().zip(embedded_labels(model, x.len())) {
                put(sibling(out, &format!("{label}.csv")), &|p| Ok(fs::write(p, embedded_csv(img))?))?;
            }
        }
    }
    Ok(written)
}

pub fn run(a: &SolveArgs, decompose: bool) -> CliResult<()> {
    set_threads(&a.threads)?;
    let cfg = config(a)?;
    let f = read_mvimg(&a.input)?;
    if let Some(tag) = &a.manifold {
        if *tag != f.manifold().name() {
            return Err(Failure::Usage(format!("--manifold {tag}, but {} holds {}", a.input.display(), f.manifold().name())));
        }
    }
    let truth = a.ground_truth.as_ref().map(read_mvimg).transpose()?;

    let stdout = std::io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    let every = a.log_every;
    let mut log = |e: &ProgressEvent| {
        if every > 0 && e.iter.is_multiple_of(every) {
            let _ = writeln!(w, "{}", json!({"iter": e.iter, "energy": e.energy, "max_change": e.max_change}));
        }
    };
    let out = solve(a, &cfg, &f, &mut log)?;
    let final_energy = out.trace.last().copied().unwrap_or(out.initial_energy);
    if !final_energy.is_finite() {
        return Err(Failure::Numerical(format!("energy became {final_energy}")));
    }
    write_mvimg(&a.output, &out.u)?;
    let mut files = vec![a.output.display().to_string()];
    if decompose {
        files.extend(write_components(&a.output, cfg.model, &out.components)?);
    }
    let mut summary = json!({
        "summary": true,
        "command": if decompose { "decompose" } else { "denoise" },
        "model": cfg.model.name(),
        "manifold": f.manifold().name(),
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "epsilon": cfg.epsilon,
        "iterations": out.iterations,
        "stop_reason": out.stop,
        "initial_energy": out.initial_energy,
        "final_energy": final_energy,
        "energy_trace": out.trace,
        "outputs": files,
    });
    if let Some(seed) = a.seed_report {
        summary["seed"] = Value::from(seed);
    }
    if let Some(u0) = &truth {
        summary["mse"] = Value::from(mse(&out.u, u0)?);
        summary["input_mse"] = Value::from(mse(&f, u0)?);
    }
    writeln!(w, "{summary}")?;
    w.flush()?;
    Ok(())
}
