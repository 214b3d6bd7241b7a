use std::path::Path;

use priorint::known_variance::{pratt_interval, standard_interval, AcceptanceFamily, Method};
use priorint::mc::{
    FamilyKnown, IntervalRule, McEstimate, PrattKnown, Simulation, SplineRule, StandardKnown,
};
use priorint::spline::{MonotoneCubicB, SplineFile};
use priorint::unknown_variance::{
    interval_from_data, optimize_b as run_optimizer, uses_standard_branch, Evaluator, Profile,
};
use priorint::ProblemConfig;
use serde::Serialize;
use serde_json::json;

use crate::manifest::RunManifest;
use crate::output::{interval6, read_file, sig6, CliError};
use crate::{ConfigArgs, Format, Mode};

type Result<T> = std::result::Result<T, CliError>;

fn problem_config(args: &ConfigArgs) -> Result<ProblemConfig> {
    let cfg = ProblemConfig {
        n: args.n,
        alpha: args.alpha,
        w: args.w,
        q: args.q,
        knot_step: args.knot_step,
        ..ProblemConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn half_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && max >= 0.0 && max.is_finite()) {
        return Err(CliError::Usage(format!(
            "theta grid needs step > 0 and max ≥ 0, got step {step}, max {max}"
        )));
    }
    let k = (max / step + 1e-9).floor() as usize;
    Ok((0..=k).map(|i| i as f64 * step).collect())
}

/// Spline file contents, parsed and shape-checked.
struct LoadedSpline {
    bytes: Vec<u8>,
    file: SplineFile,
    b: MonotoneCubicB,
}

fn load_spline(path: &Path) -> Result<LoadedSpline> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Failed(format!("{}: not UTF-8", path.display())))?;
    let file = SplineFile::from_json(&text)
        .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
    let b = file
        .to_spline()
        .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
    Ok(LoadedSpline { bytes, file, b })
}

fn spline_config(file: &SplineFile) -> Result<ProblemConfig> {
    let cfg = ProblemConfig {
        n: file.n,
        alpha: file.alpha,
        w: file.w,
        q: file.q,
        knot_step: 2.0 * file.q / (file.values.len() - 1) as f64,
        ..ProblemConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn interval_known(xbar: f64, sigma: f64, method: Method, args: &ConfigArgs) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CliError::Usage(format!("sigma must be positive, got {sigma}")));
    }
    if !xbar.is_finite() {
        return Err(CliError::Usage(format!("xbar must be finite, got {xbar}")));
    }
    if args.n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    // the known-variance family does not depend on n, and n = 1 is a valid sample here
    let cfg = problem_config(&ConfigArgs { n: args.n.max(2), ..args.clone() })?;
    let scale = sigma / (args.n as f64).sqrt();
    let x = xbar / scale;
    let (theta_scale, note) = match method {
        Method::Standard => (standard_interval(x, cfg.alpha), None),
        Method::Pratt => (pratt_interval(x, cfg.alpha), None),
        Method::Mixed => {
            let fam = AcceptanceFamily::build(&cfg, Method::Mixed)?;
            match fam.confidence_set(x) {
                Ok(set) => {
                    let note = (!set.contiguous).then_some("accepted θ values are not contiguous");
                    (set.interval, note)
                }
                Err(priorint::Error::OutOfGrid { .. }) => (
                    standard_interval(x, cfg.alpha),
                    Some("x is beyond the acceptance grid; using the standard interval"),
                ),
                Err(e) => return Err(e.into()),
            }
        }
    };
    let mu_scale = theta_scale.scale(scale);
    println!("method: {}", method_name(method));
    println!("theta scale: {}", interval6(theta_scale.lower, theta_scale.upper));
    println!("mu scale: {}", interval6(mu_scale.lower, mu_scale.upper));
    if let Some(n) = note {
        println!("note: {n}");
    }
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Standard => "standard",
        Method::Pratt => "pratt",
        Method::Mixed => "mixed",
    }
}

pub fn optimize_b(args: &ConfigArgs, out: &Path) -> Result<()> {
    let cfg = problem_config(args)?;
    let res = run_optimizer(&cfg)?;
    let ev = Evaluator::for_config(&cfg)?;
    let profile = ev.profile(&half_grid(16.0, 0.05)?, &res.b, cfg.alpha)?;
    let json = SplineFile::from_spline(&res.b, cfg.n, cfg.alpha, cfg.w).to_json();
    let mut manifest = RunManifest::new("optimize-b", &cfg);
    manifest.summary = Some(json!({
        "objective": res.objective,
        "min_coverage": res.min_coverage,
        "iterations": res.iterations,
        "converged": res.converged,
        "efficiency_at_zero": profile.rows[0].efficiency,
        "max_efficiency": profile.max_efficiency(),
    }));
    manifest.write_with(out, json.as_bytes())?;
    println!("objective: {}", sig6(res.objective));
    println!("min coverage: {}", sig6(res.min_coverage));
    println!("e(0): {}", sig6(profile.rows[0].efficiency));
    println!(
        "max e: {} at theta = {}",
        sig6(profile.max_efficiency()),
        sig6(profile.argmax_efficiency())
    );
    println!("iterations: {}, converged: {}", res.iterations, res.converged);
    println!("wrote {}", out.display());
    if res.converged {
        Ok(())
    } else {
        Err(CliError::Failed("optimizer did not converge; best iterate written".into()))
    }
}

fn read_observations(path: &Path) -> Result<Vec<f64>> {
    let bytes = read_file(path)?;
    let text = String::from_utf8_lossy(&bytes);
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>().map_err(|_| {
                CliError::Usage(format!("{}: cannot parse {t:?} as a number", path.display()))
            })
        })
        .collect()
}

/// `(x̄, S)` with `S² = Σ (X_i − X̄)² / (n − 1)`.
fn summary(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

pub fn interval_unknown(
    xbar: Option<f64>,
    s: Option<f64>,
    n: Option<usize>,
    data: Option<&Path>,
    spline: &Path,
) -> Result<()> {
    let loaded = load_spline(spline)?;
    let (xbar, s, n) = match data {
        Some(path) => {
            let xs = read_observations(path)?;
            if xs.len() < 2 {
                return Err(CliError::Usage(format!(
                    "{}: need at least two observations",
                    path.display()
                )));
            }
            if let Some(flag) = n {
                if flag != xs.len() {
                    return Err(CliError::Usage(format!(
                        "--n {flag} does not match the {} observations in {}",
                        xs.len(),
                        path.display()
                    )));
                }
            }
            let (m, sd) = summary(&xs);
            (m, sd, xs.len())
        }
        None => (
            xbar.expect("required by clap"),
            s.expect("required by clap"),
            n.unwrap_or(loaded.file.n),
        ),
    };
    if n != loaded.file.n {
        return Err(CliError::Usage(format!(
            "n = {n} does not match n = {} in {}",
            loaded.file.n,
            spline.display()
        )));
    }
    if !(s > 0.0 && s.is_finite()) || !xbar.is_finite() {
        return Err(CliError::Usage(format!("need finite xbar and s > 0, got xbar {xbar}, s {s}")));
    }
    let i = interval_from_data(xbar, s, n, &loaded.b)?;
    println!("xbar: {}, s: {}, n: {n}", sig6(xbar), sig6(s));
    println!("interval: {}", interval6(i.lower, i.upper));
    println!(
        "standard t branch: {}",
        if uses_standard_branch(xbar, s, n, &loaded.b) { "yes" } else { "no" }
    );
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Failed(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(&r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Failed(format!("csv: {e}")))
}

fn profile_csv(p: &Profile) -> Result<Vec<u8>> {
    csv_bytes(
        &["theta", "coverage", "scaled_length", "efficiency"],
        p.rows.iter().map(|r| {
            vec![
                r.theta.to_string(),
                r.coverage.to_string(),
                r.scaled_length.to_string(),
                r.efficiency.to_string(),
            ]
        }),
    )
}

pub fn efficiency_table(
    mode: Mode,
    args: &ConfigArgs,
    spline: Option<&Path>,
    theta_max: f64,
    step: f64,
    out: &Path,
) -> Result<()> {
    let thetas = half_grid(theta_max, step)?;
    match mode {
        Mode::Known => {
            let cfg = problem_config(args)?;
            let fam = AcceptanceFamily::for_weight(&cfg)?;
            let values: Vec<f64> = thetas.iter().map(|&t| fam.efficiency(t)).collect();
            let bytes = csv_bytes(
                &["theta", "efficiency"],
                thetas.iter().zip(&values).map(|(t, e)| vec![t.to_string(), e.to_string()]),
            )?;
            RunManifest::new("efficiency-table", &cfg).write_with(out, &bytes)?;
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            println!("method: {}", method_name(fam.method));
            println!("e(0): {}, min e: {}, max e: {}", sig6(values[0]), sig6(min), sig6(max));
        }
        Mode::Unknown => {
            let (cfg, b, manifest) = match spline {
                Some(path) => {
                    let loaded = load_spline(path)?;
                    let cfg = spline_config(&loaded.file)?;
                    let m = RunManifest::new("efficiency-table", &cfg).with_input(path, &loaded.bytes);
                    (cfg, loaded.b, m)
                }
                None => {
                    let cfg = problem_config(args)?;
                    let res = run_optimizer(&cfg)?;
                    if !res.converged {
                        return Err(CliError::Failed("optimizer did not converge".into()));
                    }
                    let m = RunManifest::new("efficiency-table", &cfg);
                    (cfg, res.b, m)
                }
            };
            let profile = Evaluator::for_config(&cfg)?.profile(&thetas, &b, cfg.alpha)?;
            manifest.write_with(out, &profile_csv(&profile)?)?;
            println!(
                "e(0): {}, max e: {} at theta = {}, min coverage: {}",
                sig6(profile.rows[0].efficiency),
                sig6(profile.max_efficiency()),
                sig6(profile.argmax_efficiency()),
                sig6(profile.min_coverage())
            );
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct Comparison {
    quadrature: f64,
    mc: McEstimate,
    z: f64,
    pass: bool,
}

impl Comparison {
    fn new(quadrature: f64, mc: McEstimate) -> Self {
        let pass = mc.agrees_with(quadrature, 3.0);
        let z = if mc.std_error > 0.0 { mc.z_score(quadrature) } else { 0.0 };
        Self { quadrature, mc, z, pass }
    }
}

#[derive(Serialize)]
struct McRow {
    theta: f64,
    coverage: Comparison,
    expected_length: Comparison,
}

#[derive(Serialize)]
struct McReport {
    rule: String,
    n: usize,
    sigma: f64,
    reps: u64,
    seed: u64,
    rows: Vec<McRow>,
    all_pass: bool,
}

pub fn verify_mc(
    spline: Option<&Path>,
    method: Method,
    args: &ConfigArgs,
    thetas: &[f64],
    reps: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    if reps == 0 {
        return Err(CliError::Usage("reps must be at least 1".into()));
    }
    let sigma = 1.0;
    let loaded = spline.map(load_spline).transpose()?;
    let cfg = match &loaded {
        Some(l) => spline_config(&l.file)?,
        None => problem_config(args)?,
    };
    let root_n = (cfg.n as f64).sqrt();
    let family = match (&loaded, method) {
        (None, Method::Mixed) => Some(AcceptanceFamily::build(&cfg, Method::Mixed)?),
        (None, m) => Some(AcceptanceFamily::build(&cfg, m)?),
        _ => None,
    };
    let evaluator = Evaluator::for_config(&cfg)?;

    let standard = StandardKnown::new(cfg.alpha)?;
    let pratt = PrattKnown::new(cfg.alpha)?;
    let (rule, name): (Box<dyn IntervalRule + '_>, String) = match (&loaded, &family) {
        (Some(l), _) => (Box::new(SplineRule::new(&l.b)), "spline".into()),
        (None, Some(f)) => match method {
            Method::Standard => (Box::new(standard), "standard-known".into()),
            Method::Pratt => (Box::new(pratt), "pratt-known".into()),
            Method::Mixed => (Box::new(FamilyKnown::new(f)?), "mixed-known".into()),
        },
        (None, None) => unreachable!("a family is built whenever no spline is given"),
    };

    let mut rows = Vec::new();
    for &theta in thetas {
        if !theta.is_finite() {
            return Err(CliError::Usage(format!("theta must be finite, got {theta}")));
        }
        let sim = Simulation::at_theta(theta, sigma, cfg.n, reps, seed)?;
        let (cov_q, len_q) = match (&loaded, &family) {
            (Some(l), _) => (
                evaluator.coverage(theta, &l.b),
                evaluator.scaled_expected_length(theta, &l.b) * sigma / root_n,
            ),
            (None, Some(f)) => {
                let level = 1.0 - cfg.alpha;
                let cov = if method == Method::Pratt && theta == 0.0 { 1.0 } else { level };
                (cov, f.expected_length(theta) * sigma / root_n)
            }
            (None, None) => unreachable!(),
        };
        rows.push(McRow {
            theta,
            coverage: Comparison::new(cov_q, sim.coverage(rule.as_ref())),
            expected_length: Comparison::new(len_q, sim.expected_length(rule.as_ref())),
        });
    }
    let all_pass = rows.iter().all(|r| r.coverage.pass && r.expected_length.pass);
    for r in &rows {
        println!(
            "theta {}: coverage {} vs mc {} (z {}), length {} vs mc {} (z {}) {}",
            sig6(r.theta),
            sig6(r.coverage.quadrature),
            sig6(r.coverage.mc.mean),
            sig6(r.coverage.z),
            sig6(r.expected_length.quadrature),
            sig6(r.expected_length.mc.mean),
            sig6(r.expected_length.z),
            if r.coverage.pass && r.expected_length.pass { "ok" } else { "DISAGREE" }
        );
    }
    let report = McReport { rule: name, n: cfg.n, sigma, reps, seed, rows, all_pass };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    match out {
        Some(path) => {
            let mut m = RunManifest::new("verify-mc", &cfg).with_seed(seed);
            if let (Some(l), Some(p)) = (&loaded, spline) {
                m = m.with_input(p, &l.bytes);
            }
            m.write_with(path, text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Failed("quadrature and Monte Carlo disagree by more than 3 SE".into()))
    }
}

pub fn acceptance_family(
    args: &ConfigArgs,
    theta_max: f64,
    step: f64,
    format: Format,
    out: &Path,
) -> Result<()> {
    let cfg = problem_config(args)?.with_grid(theta_max, step);
    cfg.validate()?;
    let fam = AcceptanceFamily::for_weight(&cfg)?;
    let bytes = match format {
        Format::Csv => csv_bytes(
            &["theta", "lower", "upper", "c"],
            fam.regions.iter().map(|r| {
                vec![
                    r.theta.to_string(),
                    r.lower.to_string(),
                    r.upper.to_string(),
                    r.c.map_or(String::new(), |c| c.to_string()),
                ]
            }),
        )?,
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&fam.regions).expect("regions serialize");
            t.push('\n');
            t.into_bytes()
        }
    };
    RunManifest::new("acceptance-family", &cfg).write_with(out, &bytes)?;
    println!("method: {}, regions: {}", method_name(fam.method), fam.regions.len());
    println!("wrote {}", out.display());
    Ok(())
}
