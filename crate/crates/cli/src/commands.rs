use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triplex::autocov::{commutation_matrix, read_matrix_csv, verify_bn_on_f, verify_vec_identity, IDENTITY_CAP};
use triplex::bounds::{evaluate, optimize_free_params, write_reports_csv, BoundId, BoundInputs};
use triplex::linalg::vec;
use triplex::linproc::{
    apply_filter, bn_decompose, bn_path_identity_residual, compute_constants, BNDecomposition, LagPolynomial,
};
use triplex::montecarlo::{domination_report, estimate_tail, BoundSetup, ExperimentConfig, Statistic};
use triplex::processes::{generate, telescoping_check, ProcessSpec};

use crate::config::{matrix, Config, PolynomialFixture};
use crate::manifest::ManifestWriter;
use crate::plot::tail_svg;
use crate::CliError;

/// Whether the command's checks held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = out.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
}

fn resolved_process(spec: &ProcessSpec<f64>, t_len: usize) -> toml::Table {
    let mut t = toml::Table::new();
    t.insert("n".into(), (spec.n as i64).into());
    t.insert("t_len".into(), (t_len as i64).into());
    t.insert("alpha".into(), spec.alpha.into());
    t.insert("family".into(), format!("{:?}", spec.family).into());
    t
}

fn resolved_inputs(t: &mut toml::Table, key: &str, inp: &BoundInputs<f64>) {
    let mut s = toml::Table::new();
    s.insert("c_psi".into(), inp.sw.c_psi.into());
    s.insert("p".into(), inp.mix.p.into());
    s.insert("gamma".into(), inp.mix.gamma.into());
    s.insert("c_rho".into(), inp.mix.c_rho.into());
    s.insert("c_bar".into(), inp.mix.c_bar.into());
    s.insert("m".into(), (inp.m as i64).into());
    s.insert("big_m".into(), inp.big_m.into());
    s.insert("a".into(), inp.a.into());
    s.insert("tau".into(), inp.tau.into());
    s.insert("beta".into(), inp.beta.into());
    t.insert(key.into(), s.into());
}

pub fn simulate(cfg: &Config, out: &Path, manifest: ManifestWriter<'_>) -> Result<Status, CliError> {
    let spec = cfg.process_spec()?;
    let poly = cfg.filter()?;
    let t_len = cfg.process.t_len;
    let mut artifacts = vec!["path.csv"];
    if poly.is_some() {
        artifacts.push("filtered.csv");
    }
    let mut resolved = resolved_process(&spec, t_len);
    if let Some(p) = &poly {
        resolved.insert("filter_max_lag".into(), (p.max_lag() as i64).into());
    }
    manifest.write(&artifacts, resolved)?;

    let lags = poly.as_ref().map_or(0, |p| p.max_lag());
    let x = generate(&spec, t_len + lags, cfg.run.seed).map_err(run_err)?;
    x.write_csv(create(out, "path.csv")?).map_err(run_err)?;
    let y = match &poly {
        Some(p) => {
            let y = apply_filter(p, &x).map_err(run_err)?;
            y.write_csv(create(out, "filtered.csv")?).map_err(run_err)?;
            y
        }
        None => x,
    };
    let sup = y.column_sums().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    println!("simulated T={} n={}: |sum_t Y_t|_inf = {sup:.6}", y.len(), y.dim());
    Ok(Status::Ok)
}

struct BoundPlan {
    ids: Vec<BoundId>,
    inputs: BoundInputs<f64>,
    autocov_inputs: Option<BoundInputs<f64>>,
    consts: Option<triplex::PolynomialConstantsF64>,
}

fn plan_bounds(cfg: &Config, spec: &ProcessSpec<f64>, h: usize, resolved: &mut toml::Table) -> Result<BoundPlan, CliError> {
    let ids = cfg.bound_ids()?;
    let inputs = cfg.bound_inputs(spec, false)?;
    let autocov_inputs = if ids.contains(&BoundId::Autocov) { Some(cfg.bound_inputs(spec, true)?) } else { None };
    let consts = if ids.iter().any(|id| id.needs_constants()) {
        let poly = cfg.filter()?.unwrap_or_else(|| LagPolynomial::identity(spec.n));
        Some(compute_constants(&poly, h).map_err(run_err)?)
    } else {
        None
    };
    resolved_inputs(resolved, "inputs", &inputs);
    if let Some(a) = &autocov_inputs {
        resolved_inputs(resolved, "autocov_inputs", a);
    }
    if let Some(k) = &consts {
        let mut t = toml::Table::new();
        t.insert("c_inf".into(), k.c_inf.into());
        t.insert("tilde_c_inf".into(), k.tilde_c_inf.into());
        t.insert("c_h".into(), k.c_h.into());
        t.insert("c_inf_kron".into(), k.c_inf_kron.into());
        t.insert("tilde_c_inf_kron".into(), k.tilde_c_inf_kron.into());
        resolved.insert("constants".into(), t.into());
    }
    Ok(BoundPlan { ids, inputs, autocov_inputs, consts })
}

impl BoundPlan {
    fn inputs_for(&self, id: BoundId) -> &BoundInputs<f64> {
        match (id, &self.autocov_inputs) {
            (BoundId::Autocov, Some(a)) => a,
            _ => &self.inputs,
        }
    }
}

pub fn bounds(cfg: &Config, out: &Path, manifest: ManifestWriter<'_>) -> Result<Status, CliError> {
    let spec = cfg.process_spec()?;
    let xs = cfg.bound_x_grid()?;
    let h = cfg.bounds.h;
    let mut resolved = resolved_process(&spec, cfg.process.t_len);
    let plan = plan_bounds(cfg, &spec, h, &mut resolved)?;
    let grid = cfg.param_grid();
    manifest.write(&["bounds.csv"], resolved)?;

    let mut reports = Vec::with_capacity(plan.ids.len() * xs.len());
    for &id in &plan.ids {
        let base = plan.inputs_for(id);
        for &x in &xs {
            let inp = base.with_x(x);
            let r = match &grid {
                Some(g) => optimize_free_params(id, &inp, plan.consts.as_ref(), h, g),
                None => evaluate(id, &inp, plan.consts.as_ref(), h),
            };
            reports.push(r.map_err(run_err)?);
        }
    }
    let mut w = create(out, "bounds.csv")?;
    write_reports_csv(&reports, &mut w).map_err(run_err)?;
    w.flush().map_err(run_err)?;
    for r in reports.iter().filter(|r| !r.regime_ok()) {
        eprintln!("note: {} at x={} is outside its stated regime", r.name, r.x);
    }
    println!("evaluated {} bound(s) at {} point(s)", plan.ids.len(), xs.len());
    Ok(Status::Ok)
}

struct CheckRow {
    check: &'static str,
    subject: String,
    residual: f64,
    scale: f64,
    tolerance: f64,
}

impl CheckRow {
    fn pass(&self) -> bool {
        self.residual <= self.tolerance * self.scale
    }
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, lags: usize) -> LagPolynomial<f64> {
    let coeffs = (0..=lags)
        .map(|j| Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0) * 0.8f64.powi(j as i32)))
        .collect();
    LagPolynomial::new(coeffs).expect("nonempty square coefficients")
}

fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

fn claimed_decomposition(f: &PolynomialFixture, poly: &LagPolynomial<f64>) -> Result<BNDecomposition<f64>, CliError> {
    let mut bn = bn_decompose(poly);
    if let Some(c) = &f.c_one {
        bn.c_one = matrix(c)?;
    }
    if let Some(t) = &f.tilde {
        bn.tilde_coeffs = t.iter().map(|m| matrix(m)).collect::<Result<_, _>>()?;
    }
    if bn.c_one.dim() != (poly.dim(), poly.dim()) || bn.tilde_coeffs.iter().any(|m| m.dim() != bn.c_one.dim()) {
        return Err(CliError::Config(format!("fixture `{}`: decomposition shape differs from the polynomial", f.name)));
    }
    Ok(bn)
}

fn polynomial_checks(
    rows: &mut Vec<CheckRow>,
    subject: &str,
    poly: &LagPolynomial<f64>,
    bn: &BNDecomposition<f64>,
    cfg: &Config,
    seed: u64,
) -> Result<(), CliError> {
    let v = &cfg.verify;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &z in &v.z {
        let lhs = poly.eval(z);
        worst = worst.max(max_diff(&lhs, &bn.eval(z)));
        scale = scale.max(lhs.iter().fold(1.0f64, |a, x| a.max(x.abs())));
    }
    rows.push(CheckRow { check: "bn_polynomial", subject: subject.into(), residual: worst, scale, tolerance: v.tol_bn });

    let n = poly.dim();
    let x = generate(&ProcessSpec::iid(n, 2.0), v.path_len + poly.max_lag(), seed).map_err(run_err)?;
    let (r, s) = bn_path_identity_residual(poly, &x).map_err(run_err)?;
    rows.push(CheckRow { check: "bn_path", subject: subject.into(), residual: r, scale: s, tolerance: v.tol_path });

    if n <= v.max_dim.min(IDENTITY_CAP) {
        for &h in &v.lags {
            let c = verify_vec_identity(poly, &x, h).map_err(run_err)?;
            rows.push(CheckRow {
                check: "vec_identity",
                subject: format!("{subject} h={h}"),
                residual: c.residual,
                scale: c.scale,
                tolerance: v.tol_vec,
            });
            for k in 0..=poly.max_lag() {
                let f = verify_bn_on_f(poly, &x, h, k).map_err(run_err)?;
                rows.push(CheckRow {
                    check: "bn_on_kron_filter",
                    subject: format!("{subject} h={h} k={k}"),
                    residual: f.path_residual.max(f.coefficient_residual),
                    scale: f.scale.max(1.0),
                    tolerance: v.tol_vec,
                });
            }
        }
    }
    Ok(())
}

pub fn verify(cfg: &Config, out: &Path, manifest: ManifestWriter<'_>) -> Result<Status, CliError> {
    let v = &cfg.verify;
    let spec = cfg.process_spec()?;
    let fixtures: Vec<(String, LagPolynomial<f64>, BNDecomposition<f64>)> = v
        .fixtures
        .iter()
        .map(|f| {
            let p = f.polynomial()?;
            let bn = claimed_decomposition(f, &p)?;
            Ok((f.name.clone(), p, bn))
        })
        .collect::<Result<_, CliError>>()?;
    if v.max_dim == 0 {
        return Err(CliError::Config("verify.max_dim must be positive".into()));
    }
    let mut resolved = resolved_process(&spec, v.path_len);
    resolved.insert("random_polynomials".into(), (v.polynomials as i64).into());
    resolved.insert("fixtures".into(), (fixtures.len() as i64).into());
    manifest.write(&["verify.csv"], resolved)?;

    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    for i in 0..v.polynomials {
        let n = rng.random_range(1..=v.max_dim);
        let lags = rng.random_range(0..=v.max_lag);
        let poly = random_poly(&mut rng, n, lags);
        let bn = bn_decompose(&poly);
        polynomial_checks(&mut rows, &format!("random{i}"), &poly, &bn, cfg, cfg.run.seed ^ i as u64)?;
    }
    for (name, poly, bn) in &fixtures {
        polynomial_checks(&mut rows, name, poly, bn, cfg, cfg.run.seed)?;
    }
    for n in 1..=v.commutation_max {
        let p = commutation_matrix::<f64>(n).map_err(run_err)?;
        let w = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
        let involution = max_diff(&p.dot(&p), &Array2::eye(n * n));
        let transpose = (p.dot(&vec(&w.view())) - vec(&w.t())).iter().fold(0.0f64, |a, x| a.max(x.abs()));
        rows.push(CheckRow {
            check: "commutation",
            subject: format!("n={n}"),
            residual: involution.max(transpose),
            scale: 1.0,
            tolerance: 0.0,
        });
    }
    let path = generate(&spec, v.path_len, cfg.run.seed).map_err(run_err)?;
    for &m in &v.telescoping_m {
        rows.push(CheckRow {
            check: "telescoping",
            subject: format!("process m={m}"),
            residual: telescoping_check(&path, m).map_err(run_err)?,
            scale: 1.0,
            tolerance: v.tol_telescoping,
        });
    }

    let mut w = create(out, "verify.csv")?;
    writeln!(w, "check,subject,residual,scale,tolerance,pass").map_err(run_err)?;
    for r in &rows {
        writeln!(w, "{},{},{:.6e},{:.6e},{:.1e},{}", r.check, r.subject, r.residual, r.scale, r.tolerance, r.pass())
            .map_err(run_err)?;
    }
    w.flush().map_err(run_err)?;
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.pass()).collect();
    for check in ["bn_polynomial", "bn_path", "vec_identity", "bn_on_kron_filter", "commutation", "telescoping"] {
        let of: Vec<&CheckRow> = rows.iter().filter(|r| r.check == check).collect();
        let worst = of.iter().map(|r| r.residual / r.scale).fold(0.0f64, f64::max);
        let bad = of.iter().filter(|r| !r.pass()).count();
        println!("{check}: {} case(s), worst relative residual {worst:.3e}, {bad} failed", of.len());
    }
    for r in &failed {
        println!("FAIL {} {}: residual {:.3e} scale {:.3e} tolerance {:.1e}", r.check, r.subject, r.residual, r.scale, r.tolerance);
    }
    Ok(if failed.is_empty() { Status::Ok } else { Status::CheckFailed })
}

pub fn experiment(cfg: &Config, out: &Path, manifest: ManifestWriter<'_>) -> Result<Status, CliError> {
    let spec = cfg.process_spec()?;
    let xs = cfg.experiment_x_grid()?;
    let mc = &cfg.montecarlo;
    let statistic = cfg.statistic();
    let mut resolved = resolved_process(&spec, cfg.process.t_len);
    let mut exp = ExperimentConfig::new(spec, cfg.process.t_len, xs, mc.replicates, cfg.run.seed);
    exp.poly = cfg.filter()?;
    exp.statistic = statistic;
    exp.h = mc.h;
    exp.threads = cfg.run.threads;
    if let Some(path) = &mc.sigma_bar_file {
        let f = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        exp.sigma_bar = Some(read_matrix_csv(BufReader::new(f)).map_err(|e| CliError::Config(e.to_string()))?);
    }
    let plan = plan_bounds(cfg, &spec, mc.h, &mut resolved)?;
    exp.bounds = plan.ids.clone();
    if !plan.ids.is_empty() {
        let autocov = statistic == Statistic::DeltaAutocov;
        if autocov && plan.ids.iter().any(|id| *id != BoundId::Autocov) {
            return Err(CliError::Config("the delta_autocov statistic is compared with the `autocov` bound only".into()));
        }
        if !autocov && plan.ids.contains(&BoundId::Autocov) {
            return Err(CliError::Config("the `autocov` bound needs statistic = \"delta_autocov\"".into()));
        }
        exp.setup = Some(BoundSetup {
            inputs: if autocov { *plan.inputs_for(BoundId::Autocov) } else { plan.inputs },
            consts: plan.consts,
            grid: cfg.param_grid(),
        });
    }
    exp.validate().map_err(|e| CliError::Config(e.to_string()))?;
    resolved.insert("replicates".into(), (mc.replicates as i64).into());
    resolved.insert("z".into(), mc.z.into());
    manifest.write(&["tail.csv", "domination.csv", "plot.svg"], resolved)?;

    let curve = estimate_tail(&exp).map_err(run_err)?;
    curve.write_csv(create(out, "tail.csv")?).map_err(run_err)?;
    let report = domination_report(&curve, mc.z);
    let mut w = create(out, "domination.csv")?;
    writeln!(w, "bound,x,freq,upper,bound_value,pass,resolved").map_err(run_err)?;
    for r in &report.rows {
        writeln!(w, "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}", r.bound, r.x, r.freq, r.upper, r.bound_value, r.pass, r.resolved)
            .map_err(run_err)?;
    }
    w.flush().map_err(run_err)?;
    let title = format!("{:?} n={} T={} R={}", statistic, spec.n, cfg.process.t_len, mc.replicates);
    fs::write(out.join("plot.svg"), tail_svg(&curve, &title)).map_err(run_err)?;

    println!(
        "domination: {} informative point(s), literal {}, {} below the replicate resolution, {} resolved violation(s)",
        report.rows.len(),
        if report.pass { "pass" } else { "fail" },
        report.unresolved,
        report.resolved_failures().count()
    );
    Ok(if report.pass_resolved { Status::Ok } else { Status::CheckFailed })
}
