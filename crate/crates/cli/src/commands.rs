use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fracreg::energy::{EnergyProblem, VelocityBasis};
use fracreg::fields::Grid;
use fracreg::fields::io::{read_field, read_tensor_image, read_velocity, write_field, Field};
use fracreg::flow::compute_deformation;
use fracreg::fraccalc::{integral_bound_constant, poincare_constant};
use fracreg::optimize::{history_csv, register};
use fracreg::spd::{warp_tensor_image, TensorImage};
use fracreg::synthetic::synthetic_pair;
use fracreg::verify::{check_registration_order, checks_csv, run_suite};
use serde_json::json;

use crate::config::RunConfig;
use crate::report::{pgm, residual_slice, write_text, Report};
use crate::{Cli, CliError, Command, Stage};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let cfg = resolve(cli)?;
    if !matches!(cli.command, Command::Info { .. }) {
        fs::create_dir_all(&cli.out)
            .map_err(|e| CliError::stage("output", fracreg::Error::Io(e)))?;
    }
    match &cli.command {
        Command::Synth => synth(cfg, &cli.out),
        Command::Register => register_cmd(cfg, &cli.out),
        Command::Warp { inverse } => warp(cfg, &cli.out, *inverse),
        Command::Verify => verify(cfg, &cli.out),
        Command::Info { files } => info(cfg, files),
    }
}

/// Config file (or defaults) with command-line overrides applied, validated.
fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(a) = cli.alpha {
        cfg.alpha = a;
    }
    if let Some(s) = cli.side {
        cfg.side = s;
    }
    cfg.optimizer.seed = cfg.seed;
    cfg.verify.seed = cfg.seed;
    cfg.validate()?;
    Ok(cfg)
}

fn save(path: &Path, field: impl Into<Field>) -> Result<(), CliError> {
    write_field(path, &field.into()).stage("fields")
}

fn write_residual_slices(out: &Path, pairs: &[(&str, &TensorImage, &TensorImage)]) -> Result<(), CliError> {
    let slices: Vec<_> = pairs
        .iter()
        .map(|(_, a, b)| residual_slice(a, b))
        .collect::<Result<_, _>>()?;
    // one scale for all images so they can be compared by eye
    let scale = slices.iter().flat_map(|s| s.2.iter()).fold(0.0f64, |m, &v| m.max(v));
    for ((name, _, _), (w, h, vals)) in pairs.iter().zip(&slices) {
        write_text(&out.join(name), &pgm(*w, *h, vals, scale))?;
    }
    Ok(())
}

fn basis_for(cfg: &RunConfig, image: &TensorImage) -> Result<VelocityBasis, CliError> {
    VelocityBasis::new(*image.grid(), cfg.horizon, cfg.time_nodes, cfg.k_modes, cfg.margin).stage("energy")
}

fn synth(cfg: RunConfig, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let grid = cfg.grid.build()?;
    let basis = VelocityBasis::new(grid, cfg.horizon, cfg.time_nodes, cfg.k_modes, cfg.margin).stage("energy")?;
    let pair = synthetic_pair(&basis, cfg.synth.amplitude, cfg.seed, &cfg.flow).stage("synthetic")?;
    let template = cfg.path_or(&cfg.paths.template, out, "template.frf");
    let target = cfg.path_or(&cfg.paths.target, out, "target.frf");
    let velocity = cfg.path_or(&cfg.paths.velocity, out, "velocity_true.frf");
    save(&template, pair.template.clone())?;
    save(&target, pair.target.clone())?;
    save(&velocity, pair.velocity.clone())?;
    write_residual_slices(out, &[("residual.pgm", &pair.template, &pair.target)])?;
    let mut report = Report::new("synth", cfg);
    report.timings.push(("total".into(), start.elapsed().as_secs_f64()));
    report.write(&out.join("report.json"))?;
    println!("wrote {}, {}, {}", template.display(), target.display(), velocity.display());
    Ok(())
}

fn register_cmd(cfg: RunConfig, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let alpha = cfg.order()?;
    alpha.check_admissible().map_err(|e| CliError::Config(format!("alpha: {e}")))?;
    let template = read_tensor_image(cfg.path_or(&cfg.paths.template, out, "template.frf")).stage("fields")?;
    let target = read_tensor_image(cfg.path_or(&cfg.paths.target, out, "target.frf")).stage("fields")?;
    let basis = basis_for(&cfg, &template)?;
    let problem =
        EnergyProblem::new(template, target, basis, alpha, cfg.side, cfg.flow).stage("energy")?;
    let setup = start.elapsed().as_secs_f64();
    let result = register(&problem, &cfg.optimizer).stage("optimize")?;
    let solve = start.elapsed().as_secs_f64() - setup;

    let velocity = problem.basis().basis_to_velocity(&result.coeffs).stage("energy")?;
    let warped = problem.warped(&result.coeffs).stage("spd")?;
    save(&out.join("velocity.frf"), velocity)?;
    save(&out.join("warped.frf"), warped.clone())?;
    write_text(&out.join("history.csv"), &history_csv(&result.history))?;
    write_residual_slices(
        out,
        &[
            ("residual_before.pgm", problem.template(), problem.target()),
            ("residual_after.pgm", &warped, problem.target()),
        ],
    )?;

    let mut report = Report::new("register", cfg);
    report.before = Some(result.initial);
    report.after = Some(result.breakdown);
    report.bound_ok = Some(result.bound_ok);
    report.iterations = Some(result.iterations);
    report.termination = Some(result.termination);
    report.data_ratio = Some(if result.initial.data > 0.0 { result.breakdown.data / result.initial.data } else { 0.0 });
    report.timings = vec![
        ("setup".into(), setup),
        ("solve".into(), solve),
        ("total".into(), start.elapsed().as_secs_f64()),
    ];
    report.write(&out.join("report.json"))?;
    println!(
        "{} iterations ({:?}): data {:e} -> {:e}, regularization {:e}, bound_ok {}",
        result.iterations,
        result.termination,
        result.initial.data,
        result.breakdown.data,
        result.breakdown.regularization,
        result.bound_ok
    );
    if !result.bound_ok {
        return Err(CliError::Verification(format!(
            "energy norm {:e} exceeds G|Omega| = {:e}",
            result.breakdown.regularization,
            result.breakdown.existence_bound()
        )));
    }
    Ok(())
}

fn warp(cfg: RunConfig, out: &Path, inverse: bool) -> Result<(), CliError> {
    let start = Instant::now();
    let image = read_tensor_image(cfg.path_or(&cfg.paths.template, out, "template.frf")).stage("fields")?;
    let mut v = read_velocity(cfg.path_or(&cfg.paths.velocity, out, "velocity.frf")).stage("fields")?;
    same_grid(image.grid(), v.grid())?;
    if inverse {
        v = v.time_reversed();
    }
    let deformation = compute_deformation(&v, &cfg.flow).stage("flow")?;
    let warped = warp_tensor_image(&image, &deformation).stage("spd")?;
    let name = if inverse { "warped_inverse" } else { "warped" };
    save(&out.join(format!("{name}.frf")), warped.clone())?;
    write_residual_slices(out, &[(&format!("{name}_change.pgm"), &warped, &image)])?;
    let mut report = Report::new("warp", cfg);
    report.timings.push(("total".into(), start.elapsed().as_secs_f64()));
    report.write(&out.join("report.json"))?;
    println!("wrote {}", out.join(format!("{name}.frf")).display());
    Ok(())
}

fn same_grid(image: &Grid, velocity: &Grid) -> Result<(), CliError> {
    if image == velocity {
        return Ok(());
    }
    Err(CliError::stage(
        "fields",
        fracreg::Error::GridMismatch(format!("image grid {image:?} vs velocity grid {velocity:?}")),
    ))
}

fn verify(cfg: RunConfig, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let mut rows = run_suite(&cfg.verify).stage("verify")?;
    rows.push(check_registration_order(cfg.alpha));
    let table = checks_csv(&rows);
    print!("{table}");
    write_text(&out.join("checks.csv"), &table)?;
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    let mut report = Report::new("verify", cfg);
    report.checks = rows;
    report.timings.push(("total".into(), start.elapsed().as_secs_f64()));
    report.write(&out.join("report.json"))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn info(cfg: RunConfig, files: &[PathBuf]) -> Result<(), CliError> {
    if files.is_empty() {
        let grid = cfg.grid.build()?;
        let alpha = cfg.order()?;
        let basis = VelocityBasis::new(grid, cfg.horizon, cfg.time_nodes, cfg.k_modes, cfg.margin).stage("energy")?;
        let summary = json!({
            "config": cfg,
            "spacing": grid.spacing(),
            "volume": grid.volume(),
            "coefficients": basis.n_coeffs(),
            "alpha_admissible": alpha.is_admissible(),
            "integral_bound_constant": integral_bound_constant(&grid, alpha).stage("fraccalc")?,
            "poincare_constant": poincare_constant(&grid, alpha).stage("fraccalc")?,
        });
        println!("{}", serde_json::to_string_pretty(&summary).expect("plain data"));
        return Ok(());
    }
    for path in files {
        let field = read_field(path).stage("fields")?;
        let g = field.grid();
        println!(
            "{}: {:?} dims {:?} bounds {:?}",
            path.display(),
            field.kind(),
            g.dims(),
            g.bounds()
        );
    }
    Ok(())
}
