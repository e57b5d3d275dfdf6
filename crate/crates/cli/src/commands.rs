use std::path::Path;

use capillarity::abp::analyze_domain;
use capillarity::functionals::{evaluate, SearchOptions};
use capillarity::geometry::io::{read_profile, read_voxel, write_profile, write_voxel, write_voxel_with_channels};
use capillarity::geometry::voxelize;
use capillarity::harness::{
    factor3_check, fit_loglog, geometric_schedule, lemma1d_check, lemma1d_scales, sweep, FittedConstant, PerturbationMode,
    SweepConfig,
};
use capillarity::symmetrize::{run_pipeline, Stage};
use capillarity::{Bubble, CapillarityParams, Error, ProfileSet, Result, Shape};
use serde::Serialize;

use crate::config::{Rep, RunConfig};
use crate::output::OutDir;

/// Assertion failures collected by a command; empty means every check passed.
pub type Failures = Vec<String>;

/// Reads a set file: `.csv` is a profile, anything else a voxel header.
pub fn load_shape(path: &Path, cfg: &RunConfig) -> Result<Shape> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let shape = if is_csv {
        Shape::profile(read_profile(path)?, cfg.n)
    } else {
        Shape::Voxel(read_voxel(path)?)
    };
    if shape.dim() != cfg.n {
        return Err(Error::Domain(format!("{} holds a {}-dimensional set, config has n = {}", path.display(), shape.dim(), cfg.n)));
    }
    convert(shape, cfg)
}

fn convert(shape: Shape, cfg: &RunConfig) -> Result<Shape> {
    match (cfg.rep, shape) {
        (Rep::Voxel, Shape::Profile { profile, n }) => Ok(Shape::Voxel(voxelize(&profile, n, cfg.h)?)),
        (Rep::Profile, Shape::Voxel(_)) => Err(Error::Precondition(
            "a voxel set has no profile form; run `symmetrize` with the schwarz stage instead".into(),
        )),
        (_, s) => Ok(s),
    }
}

fn save_shape(out: &mut OutDir, stem: &str, shape: &Shape) -> Result<String> {
    match shape {
        Shape::Profile { profile, .. } => {
            let name = format!("{stem}.csv");
            write_profile(&out.path(&name), profile)?;
            out.record(&name);
            Ok(name)
        }
        Shape::Voxel(v) => {
            let name = format!("{stem}.json");
            write_voxel(&out.path(&name), v)?;
            out.record(&name);
            out.record(&format!("{stem}.bin"));
            Ok(name)
        }
    }
}

fn check_deficit(failures: &mut Failures, what: &str, d: f64, cfg: &RunConfig) {
    if d < -cfg.tol_deficit {
        failures.push(format!("{what}: deficit {d} below -{}", cfg.tol_deficit));
    }
}

#[derive(Serialize)]
struct BubbleSummary {
    lambda: f64,
    n: usize,
    volume: f64,
    rel_perimeter: f64,
    wetted_area: f64,
    p_lambda: f64,
    reference_energy: f64,
    identity_rel_error: f64,
    deficit: f64,
}

/// Writes the unit-volume-scale bubble, its closed-form measures and the report of its profile.
pub fn bubble(cfg: &RunConfig, out: &mut OutDir) -> Result<Failures> {
    let p = cfg.params()?;
    let b = Bubble::unit(p);
    let m = b.measures();
    let p_lambda = m.capillarity_perimeter(p.lambda);
    let reference = p.reference_energy(m.volume);
    let summary = BubbleSummary {
        lambda: p.lambda,
        n: p.n,
        volume: m.volume,
        rel_perimeter: m.rel_perimeter,
        wetted_area: m.wetted_area,
        p_lambda,
        reference_energy: reference,
        identity_rel_error: (p_lambda - reference).abs() / reference,
        deficit: p_lambda / reference - 1.0,
    };
    let mut failures = Failures::new();
    if summary.identity_rel_error > cfg.tol_identity {
        failures.push(format!("bubble identity off by {:e} (tol {:e})", summary.identity_rel_error, cfg.tol_identity));
    }
    out.write_json("bubble.json", &summary)?;

    let profile = ProfileSet::from_bubble(&b, cfg.nodes)?;
    write_profile(&out.path("bubble.csv"), &profile)?;
    out.record("bubble.csv");
    let shape = convert(Shape::profile(profile, p.n), cfg)?;
    if let Shape::Voxel(_) = shape {
        save_shape(out, "bubble_voxel", &shape)?;
    }
    let report = evaluate(&shape, &p, &SearchOptions::default())?;
    check_deficit(&mut failures, "bubble", report.deficit, cfg);
    out.write_json("report.json", &report)?;
    println!("P_lambda {} (reference {}), D {:e}", summary.p_lambda, reference, summary.deficit);
    Ok(failures)
}

pub fn eval(cfg: &RunConfig, input: &Path, out: &mut OutDir) -> Result<Failures> {
    let p = cfg.params()?;
    let shape = load_shape(input, cfg)?;
    let report = evaluate(&shape, &p, &SearchOptions::default())?;
    let mut failures = Failures::new();
    check_deficit(&mut failures, "input", report.deficit, cfg);
    out.write_json("report.json", &report)?;
    println!(
        "volume {} P_lambda {} D {} alpha {} beta {} hausdorff {}",
        report.measures.volume, report.p_lambda, report.deficit, report.alpha, report.beta, report.hausdorff
    );
    Ok(failures)
}

pub fn symmetrize(cfg: &RunConfig, input: &Path, stages: &str, out: &mut OutDir) -> Result<Failures> {
    let p = cfg.params()?;
    let stages = Stage::parse_list(stages)?;
    let shape = load_shape(input, cfg)?;
    let (result, report) = run_pipeline(&shape, &p, &stages, &SearchOptions::default())?;
    let mut failures = Failures::new();
    for w in report.rows.windows(2) {
        let (before, after) = (&w[0], &w[1]);
        check_deficit(&mut failures, &after.stage, after.deficit, cfg);
        // Schwarz symmetrization preserves volume and never raises P_λ
        if after.stage == "schwarz" && after.p_lambda > before.p_lambda + cfg.tol_monotone * before.p_lambda.max(1.0) {
            failures.push(format!("schwarz raised P_λ from {} to {}", before.p_lambda, after.p_lambda));
        }
    }
    if let Some(sym) = &report.symmetry {
        for (i, s) in sym.steps.iter().enumerate() {
            if !s.doubling_bound_holds {
                failures.push(format!("reflection step {i}: chosen half more than doubles the deficit"));
            }
        }
    }
    save_shape(out, "symmetrized", &result)?;
    if let Some(t) = &report.truncation {
        out.write_json("truncation.json", t)?;
    }
    out.write_json("pipeline.json", &report)?;
    print!("{}", report.table());
    Ok(failures)
}

pub fn abp(cfg: &RunConfig, input: &Path, out: &mut OutDir) -> Result<Failures> {
    let p = cfg.params()?;
    if p.n != 2 {
        return Err(Error::Domain("the ABP engine works in the plane only (n = 2)".into()));
    }
    let domain = match load_shape(input, cfg)? {
        Shape::Voxel(v) => v,
        Shape::Profile { profile, n } => voxelize(&profile, n, cfg.h)?,
    };
    let (sol, report) = analyze_domain(&domain, &p, cfg.xi_step())?;
    let mut failures = Failures::new();
    let cov = &report.coverage;
    if cov.covered_fraction < cfg.tol_coverage {
        failures.push(format!("gradient image covers {} of K (need {})", cov.covered_fraction, cfg.tol_coverage));
    }
    if report.r2 < -cfg.tol_residual {
        failures.push(format!("second coupling residual {} is negative", report.r2));
    }
    let channels = sol.channels();
    write_voxel_with_channels(&out.path("solution.json"), &domain, &channels)?;
    out.record("solution.json");
    out.record("solution.bin");
    for (name, _) in &channels {
        out.record(&format!("solution.{name}.f64"));
    }
    out.write_json("abp.json", &report)?;
    println!(
        "coverage {} contact {} R1 {} R2 {} D {}",
        cov.covered_fraction, report.contact_fraction, report.r1, report.r2, report.deficit
    );
    Ok(failures)
}

pub struct SweepArgs {
    pub mode: PerturbationMode,
    pub eps: Option<Vec<f64>>,
    pub eps_start: f64,
    pub count: usize,
    pub renormalize: bool,
    pub abp: bool,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    seed: u64,
    meta: &'a capillarity::harness::SweepMeta,
    alpha_slope: Option<f64>,
    deficit_slope: Option<f64>,
    alpha_sq_over_deficit: Option<FittedConstant>,
    beta_ratio: Option<FittedConstant>,
}

pub fn sweep_cmd(cfg: &RunConfig, args: &SweepArgs, out: &mut OutDir) -> Result<Failures> {
    let p = cfg.params()?;
    let schedule = args.eps.clone().unwrap_or_else(|| geometric_schedule(args.eps_start, args.count));
    let sc = SweepConfig {
        mode: args.mode,
        volume_renormalize: args.renormalize,
        nodes: cfg.nodes,
        abp_h: args.abp.then_some(cfg.h),
        xi_step_factor: cfg.xi_step_factor,
        ..Default::default()
    };
    let table = sweep(&p, &sc, &schedule)?;
    let mut failures = Failures::new();
    for r in &table.rows {
        check_deficit(&mut failures, &format!("ε = {}", r.eps), r.deficit, cfg);
        if r.r2 < -cfg.tol_residual {
            failures.push(format!("ε = {}: second coupling residual {}", r.eps, r.r2));
        }
    }
    let eps = table.column("eps").unwrap();
    let slope = |name: &str| fit_loglog(&eps, &table.column(name).unwrap()).ok().map(|f| f.slope);
    let constant = |name: &str| {
        let v: Vec<f64> = table.column(name).unwrap().into_iter().filter(|x| x.is_finite()).collect();
        (v.len() >= 2).then(|| FittedConstant::split_halves(&v))
    };
    let summary = SweepSummary {
        seed: cfg.seed,
        meta: &table.meta,
        alpha_slope: slope("alpha"),
        deficit_slope: slope("deficit"),
        alpha_sq_over_deficit: constant("alpha_sq_over_deficit"),
        beta_ratio: constant("beta_ratio"),
    };
    out.write("sweep.csv", table.to_csv())?;
    out.write_json("sweep.json", &summary)?;
    println!("{} of {} rows", table.rows.len(), schedule.len());
    if let (Some(a), Some(d)) = (summary.alpha_slope, summary.deficit_slope) {
        println!("slopes: alpha {a} deficit {d}");
    }
    if let Some(e) = &table.meta.error {
        return Err(Error::Generation(e.clone()));
    }
    Ok(failures)
}

pub fn lemma1d(cfg: &RunConfig, l: Option<f64>, trials: usize, out: &mut OutDir) -> Result<Failures> {
    let p = cfg.params()?;
    let scales = match l {
        Some(l) => vec![l],
        None => lemma1d_scales(&p).to_vec(),
    };
    let mut failures = Failures::new();
    let mut records = Vec::new();
    for l in scales {
        let rec = lemma1d_check(&p, l, trials, cfg.seed)?;
        if !rec.constant.fitted.is_finite() || !rec.constant.is_stable() {
            failures.push(format!("l = {l}: fitted {} held-out {}", rec.constant.fitted, rec.constant.held_out));
        }
        println!("l {l}: fitted {} held-out {}", rec.constant.fitted, rec.constant.held_out);
        records.push(rec);
    }
    out.write_json("lemma1d.json", &records)?;
    Ok(failures)
}

pub fn factor3(cfg: &RunConfig, trials: usize, out: &mut OutDir) -> Result<Failures> {
    let p: CapillarityParams = cfg.params()?;
    let rec = factor3_check(&p, trials, cfg.seed, &SearchOptions::default())?;
    let mut failures = Failures::new();
    let slack = cfg.tol_factor3;
    for item in &rec.items {
        if item.restricted > 3.0 * item.unrestricted + slack {
            failures.push(format!("set {}: restricted {} exceeds 3 × {}", item.index, item.restricted, item.unrestricted));
        }
    }
    out.write_json("factor3.json", &rec)?;
    println!("{} sets, max ratio {}, violations {}", rec.items.len(), rec.max_ratio, failures.len());
    Ok(failures)
}
