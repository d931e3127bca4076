//! sgnlab: predict / simulate / sweep / compare for solitary wave-mean
//! flow interaction in the SGN shallow water model.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sgnlab::experiments::{
    self, dam_break_config, dsw_edge_csv, measure_dsw_lead, measure_transmission,
    run_experiment, sweep_csv, MeasureConfig, SweepPoint,
};
use sgnlab::manifest::RunManifest;
use sgnlab::modulation::{transmit, transmit_fitting, InteractionPrediction};
use sgnlab::solver::fmt_g17;
use sgnlab::{config, Error, Real, Result};

#[derive(Parser)]
#[command(name = "sgnlab", about = "solitary wave / mean flow interaction laboratory (SGN model)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict transmission through a mean-flow step from modulation theory.
    Predict(PredictArgs),
    /// Run a full SGN simulation described by a config file.
    Simulate(SimulateArgs),
    /// Tabulate transmission predictions over a parameter grid.
    Sweep(SweepArgs),
    /// Compare exact, fitting and (optionally) simulated DSW edge amplitudes.
    Compare(CompareArgs),
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long = "h-minus")]
    h_minus: Real,
    #[arg(long = "h-plus")]
    h_plus: Real,
    #[arg(long, allow_hyphen_values = true)]
    mu: i8,
    #[arg(long, allow_hyphen_values = true)]
    sigma: i8,
    #[arg(long = "z-minus")]
    z_minus: Real,
    /// exact | fitting
    #[arg(long, default_value = "exact")]
    method: String,
    /// Output directory for the JSON report.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Built-in preset; `4c` gives the fast-RW (1,1.5) and fast-DSW
    /// (1.5,1) transmission curves.
    #[arg(long)]
    fig: Option<String>,
    #[arg(long = "h-minus")]
    h_minus: Option<Real>,
    #[arg(long = "h-plus")]
    h_plus: Option<Real>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<i8>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<i8>,
    /// Grid of incident amplitudes, `start:stop:count`.
    #[arg(long = "z-minus")]
    z_minus: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Only `5` (DSW lead edge amplitudes) is available.
    #[arg(long)]
    fig: String,
    /// Depth ratios h_-/h_+, `start:stop:count`.
    #[arg(long)]
    ratios: String,
    /// Also run dam-break simulations and fill the simulated column.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 0.025)]
    dx: Real,
    /// Override the per-ratio default run length.
    #[arg(long = "t-end")]
    t_end: Option<Real>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Predict(a) => cmd_predict(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// start:stop:count, inclusive linspace.
fn parse_grid(spec: &str) -> Result<Vec<Real>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Setup(format!("grid spec `{spec}` must be start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: Real = parts[0].parse().map_err(|_| bad())?;
    let stop: Real = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(Error::Setup(format!("empty grid `{spec}`")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as Real / (count - 1) as Real)
        .collect())
}

#[derive(Serialize)]
struct PredictReport {
    h_minus: Real,
    h_plus: Real,
    mu: i8,
    sigma: i8,
    z_minus: Real,
    method: String,
    #[serde(flatten)]
    prediction: InteractionPrediction,
}

fn cmd_predict(a: PredictArgs) -> Result<i32> {
    let started = Instant::now();
    if (a.mu != 1 && a.mu != -1) || (a.sigma != 1 && a.sigma != -1) {
        return Err(Error::Setup("mu and sigma must be +1 or -1".into()));
    }
    let sm = a.sigma * a.mu;
    let prediction = match a.method.as_str() {
        "exact" => transmit(a.h_minus, a.h_plus, a.z_minus, sm)?,
        "fitting" => {
            if sm != 1 {
                return Err(Error::Setup(
                    "the fitting invariant only covers the overtaking branch (sigma*mu = +1)"
                        .into(),
                ));
            }
            transmit_fitting(a.h_minus, a.h_plus, a.z_minus)?
        }
        other => return Err(Error::Setup(format!("method must be exact|fitting, got `{other}`"))),
    };

    println!("outcome: {}", prediction.outcome);
    match (prediction.z_plus, prediction.a_plus, prediction.c_plus) {
        (Some(z), Some(ap), Some(c)) => {
            println!("z_plus:  {z:.12}");
            println!("a_plus:  {ap:.12}");
            println!("c_plus:  {c:.12}  (convention u_minus = 0)");
            if !prediction.physically_valid {
                println!("note: z_plus^2 exceeds the solitary-wave validity bound 0.8");
            }
        }
        _ => println!("no transmitted wave parameters"),
    }

    ensure_dir(&a.out)?;
    let report = PredictReport {
        h_minus: a.h_minus,
        h_plus: a.h_plus,
        mu: a.mu,
        sigma: a.sigma,
        z_minus: a.z_minus,
        method: a.method.clone(),
        prediction,
    };
    let path = a.out.join("predict.json");
    let body = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Io(format!("report serialization: {e}")))?;
    write_file(&path, &body)?;

    let pairs = canonical_pairs(&[
        ("predict.h_minus", a.h_minus.to_string()),
        ("predict.h_plus", a.h_plus.to_string()),
        ("predict.method", a.method.clone()),
        ("predict.mu", a.mu.to_string()),
        ("predict.sigma", a.sigma.to_string()),
        ("predict.z_minus", a.z_minus.to_string()),
    ]);
    let mut m = RunManifest::new("predict", &pairs, started);
    m.record(&path);
    m.write(&a.out)?;
    Ok(0)
}

fn canonical_pairs(items: &[(&str, String)]) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> =
        items.iter().map(|(k, val)| (k.to_string(), val.clone())).collect();
    v.sort();
    v
}

fn cmd_simulate(a: SimulateArgs) -> Result<i32> {
    let started = Instant::now();
    let rc = config::load(&a.config)?;
    let out = PathBuf::from(&rc.output.dir);
    ensure_dir(&out)?;

    let snapshot_dir = rc.experiment.solver.output_every.map(|_| out.clone());
    let artifacts = run_experiment(&rc.experiment, rc.output.probe_every, snapshot_dir.as_deref())?;

    let mut m = RunManifest::new("simulate", &rc.canonical, started);

    let probes_path = out.join("probes.csv");
    let mut body = String::from("t,mass,momentum,energy,crest_x,crest_h\n");
    for p in &artifacts.probes {
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_g17(p.t),
            fmt_g17(p.mass),
            fmt_g17(p.momentum),
            fmt_g17(p.energy),
            fmt_g17(p.crest_x),
            fmt_g17(p.crest_h)
        ));
    }
    write_file(&probes_path, &body)?;
    m.record(&probes_path);
    for s in &artifacts.snapshots {
        m.record(s);
    }

    let has_soliton = rc.experiment.z_minus.map(|z| z > 0.0).unwrap_or(false)
        || rc.experiment.z_plus.map(|z| z > 0.0).unwrap_or(false);
    if has_soliton {
        let measured = measure_transmission(
            &rc.experiment,
            &artifacts.final_state,
            &artifacts.probes,
            &MeasureConfig::default(),
        )?;
        println!("measured outcome: {:?}", measured.outcome);
        if let Some(am) = measured.a_measured {
            println!("a_measured: {am:.8}");
        }
        if let Some(c) = measured.c_measured {
            println!("c_measured: {c:.8}");
        }
        let mpath = out.join("measure.json");
        let mbody = serde_json::to_string_pretty(&measured)
            .map_err(|e| Error::Io(format!("measurement serialization: {e}")))?;
        write_file(&mpath, &mbody)?;
        m.record(&mpath);
    }
    println!(
        "final t = {:.6}, {} probes, {} snapshots -> {}",
        artifacts.final_state.t,
        artifacts.probes.len(),
        artifacts.snapshots.len(),
        out.display()
    );
    m.write(&out)?;
    Ok(0)
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let started = Instant::now();
    let (points, label) = match a.fig.as_deref() {
        Some("4c") => {
            // transmission curves z_+^2(z_-^2): fast RW (1,1.5) and fast
            // DSW (1.5,1), overtaking branch
            let zsq = parse_grid("0.0:2.0:81")?;
            let mut pts = Vec::new();
            for &(hm, hp) in &[(1.0, 1.5), (1.5, 1.0)] {
                for &z2 in &zsq {
                    pts.push(SweepPoint {
                        h_minus: hm,
                        h_plus: hp,
                        mu: 1,
                        sigma: 1,
                        z_minus: z2.sqrt(),
                    });
                }
            }
            (pts, "fig4c".to_string())
        }
        Some(other) => return Err(Error::Setup(format!("unknown preset `--fig {other}`"))),
        None => {
            let missing = || Error::Setup(
                "sweep needs --fig 4c or all of --h-minus --h-plus --mu --sigma --z-minus".into(),
            );
            let hm = a.h_minus.ok_or_else(missing)?;
            let hp = a.h_plus.ok_or_else(missing)?;
            let mu = a.mu.ok_or_else(missing)?;
            let sigma = a.sigma.ok_or_else(missing)?;
            let grid = parse_grid(a.z_minus.as_deref().ok_or_else(missing)?)?;
            let pts = grid
                .into_iter()
                .map(|z| SweepPoint { h_minus: hm, h_plus: hp, mu, sigma, z_minus: z })
                .collect();
            (pts, "sweep".to_string())
        }
    };
    if points.is_empty() {
        return Err(Error::Setup("empty sweep grid".into()));
    }
    let rows = experiments::sweep_transmission(&points);
    let failed = rows.iter().filter(|r| r.outcome.starts_with("error")).count();

    ensure_dir(&a.out)?;
    let path = a.out.join(format!("{label}.csv"));
    write_file(&path, &sweep_csv(&rows))?;
    println!("{} rows -> {} ({failed} failed)", rows.len(), path.display());

    let pairs = canonical_pairs(&[("sweep.points", format!("{points:?}"))]);
    let mut m = RunManifest::new("sweep", &pairs, started);
    m.record(&path);
    m.write(&a.out)?;
    Ok(if failed == 0 { 0 } else { 1 })
}

fn cmd_compare(a: CompareArgs) -> Result<i32> {
    let started = Instant::now();
    if a.fig != "5" {
        return Err(Error::Setup(format!("unknown preset `--fig {}`", a.fig)));
    }
    let ratios = parse_grid(&a.ratios)?;
    let mut rows = experiments::dsw_edge_experiment(&ratios)?;

    if a.simulate {
        for row in rows.iter_mut() {
            let t_end = a.t_end.unwrap_or_else(|| experiments::dam_break_t_end(row.ratio));
            let cfg = dam_break_config(row.ratio, a.dx, t_end);
            let artifacts = experiments::run_windowed(&cfg, 5.0, t_end / 50.0)?;
            let (a_sim, undeveloped) = measure_dsw_lead(&artifacts, cfg.h_plus);
            row.a_simulated = Some(a_sim);
            row.undeveloped = undeveloped;
            eprintln!(
                "ratio {:.4}: a_sim = {:.6} (exact {:.6}){}",
                row.ratio,
                a_sim,
                row.a_exact,
                if undeveloped { " [undeveloped]" } else { "" }
            );
        }
    }

    ensure_dir(&a.out)?;
    let path = a.out.join("dsw_edge.csv");
    write_file(&path, &dsw_edge_csv(&rows))?;

    let mut max_fit_err: Real = 0.0;
    let mut max_sim_err: Real = 0.0;
    for r in &rows {
        if let Some(f) = r.a_fitting {
            max_fit_err = max_fit_err.max(((f - r.a_exact) / r.a_exact).abs());
        }
        if let Some(s) = r.a_simulated {
            max_sim_err = max_sim_err.max(((s - r.a_exact) / r.a_exact).abs());
        }
    }
    println!("{} rows -> {}", rows.len(), path.display());
    println!("max |a_fitting - a_exact| / a_exact = {max_fit_err:.6}");
    if a.simulate {
        println!("max |a_simulated - a_exact| / a_exact = {max_sim_err:.6}");
    }

    let pairs = canonical_pairs(&[
        ("compare.fig", a.fig.clone()),
        ("compare.ratios", a.ratios.clone()),
        ("compare.simulate", a.simulate.to_string()),
    ]);
    let mut m = RunManifest::new("compare", &pairs, started);
    m.record(&path);
    m.write(&a.out)?;
    Ok(0)
}
