use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{Array1, Array2};
use proxlasso_core::design::ExpansionMap;
use proxlasso_core::objective::{ExponentialRho, HalfCauchyRho, Rho};
use proxlasso_core::{fit_with_mode, joint_objective, likelihood, prior, run_path};
use proxlasso_core::{generate, reduced_prox, FamilyKind, GroupStructure, LinearModelData, Mode, PenaltyConfig};
use proxlasso_core::{Family, PriorKind, PriorSpec, ProfiledPenalty, Structure, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{Command, FitArgs, GradcheckArgs, PathArgs, PenaltyProfileArgs, ProxTableArgs, SimulateArgs};
use crate::config::{self, parse_axis, parse_tau, RunConfig};
use crate::error::CliError;
use crate::report::{Coefficient, FitReport, Truth, FIT_REPORT_VERSION};

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Fit(a) => fit(a),
        Command::Path(a) => path(a),
        Command::Simulate(a) => simulate(a),
        Command::Gradcheck(a) => gradcheck(a),
        Command::ProxTable(a) => prox_table(a),
        Command::PenaltyProfile(a) => penalty_profile(a),
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn csv_writer(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn fit(a: FitArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(&a.model)?;
    let s = config::setup(&a.model, &cfg)?;
    let (ds, opt) = (&s.dataset, &s.opt);
    let n = ds.n_obs();
    let tau = match (&a.tau, &cfg.penalty.tau) {
        (Some(t), _) => parse_tau(t, n)?,
        (None, Some(t)) => t.resolve(n)?,
        (None, None) => 0.025 * n as f64,
    };
    let pen = PenaltyConfig::new(tau)?;
    let start = Instant::now();
    let res = fit_with_mode(ds, &s.family, &s.spec, &pen, opt, None)?;
    let seconds = start.elapsed().as_secs_f64();

    let st = &res.state;
    let beta = st.beta.to_vec();
    let (intercept, orig) = ds.original_scale(st.intercept, &beta);
    let coefficients: Vec<Coefficient> = ds
        .column_names
        .iter()
        .enumerate()
        .map(|(j, name)| Coefficient { name: name.clone(), value: orig[j], fitted_value: beta[j], lambda: st.lam[j] })
        .collect();
    let zero_coefficients = coefficients.iter().filter(|c| c.fitted_value == 0.0).map(|c| c.name.clone()).collect();
    let bcd = opt.mode == Mode::BcdReweighted;
    let objective = if bcd { None } else { Some(joint_objective(st, &pen, &s.spec, &s.family, ds)?) };
    let report = FitReport {
        schema_version: FIT_REPORT_VERSION,
        family: st.family(&s.family),
        prior: if bcd { "reweighted_l1".into() } else { s.spec.kind.name().into() },
        mode: opt.mode,
        tau,
        n_obs: n,
        n_pred: ds.n_pred(),
        intercept,
        nonzero_count: st.nonzeros(),
        coefficients,
        zero_coefficients,
        gamma: st.gamma.to_vec(),
        train_nll: res.train_nll,
        heldout_nll: res.heldout_nll,
        objective,
        iterations: res.iterations,
        converged_reason: res.converged_reason,
        seconds,
    };
    write_json(&report, a.out.as_deref())
}

#[derive(Serialize)]
struct PathSummary {
    points: usize,
    selected_tau: Option<f64>,
    selected_index: Option<usize>,
    total_iterations: usize,
    failed_points: usize,
    seconds: f64,
}

fn path(a: PathArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(&a.model)?;
    let s = config::setup(&a.model, &cfg)?;
    let pcfg = config::path_config(&a, &cfg.path, s.dataset.n_obs())?;
    let start = Instant::now();
    let res = run_path(&s.dataset, &s.family, &s.spec, &s.opt, &pcfg)?;
    res.write_csv(&a.out, a.smoothed)?;
    let summary = PathSummary {
        points: res.points.len(),
        selected_tau: res.selected_tau(),
        selected_index: res.selected,
        total_iterations: res.total_iterations(),
        failed_points: res.points.iter().filter(|p| p.failure.is_some()).count(),
        seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&summary, None)?;
    if res.selected.is_none() {
        return Err(CliError::Failure("every point on the path failed".into()));
    }
    Ok(())
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let family = config::family_from(&a.family, a.family_param)?;
    let structure: Structure = a.structure.parse()?;
    let mut spec = SynthSpec::new(family, structure, a.n, a.p, a.n_active, a.seed);
    spec.group_size = a.group_size;
    let sim = generate(&spec)?;
    sim.write_csv(&a.out)?;

    let groups_file = match &sim.groups {
        Some(g) => {
            let p = sidecar(&a.out, "groups.csv");
            g.write_csv(&p)?;
            println!("{}", p.display());
            Some(p.file_name().expect("file name").to_string_lossy().into_owned())
        }
        None => None,
    };
    let base: Vec<String> = (0..a.p).map(|j| format!("x{j}")).collect();
    let second_order = structure == Structure::Hierarchical;
    let column_names = if second_order { ExpansionMap::new(a.p).names(&base) } else { base };
    let truth = Truth {
        spec,
        column_names,
        coefficients: sim.beta.to_vec(),
        support: sim.support(),
        groups_file,
        second_order,
    };
    let tp = sidecar(&a.out, "truth.json");
    write_json(&truth, Some(&tp))?;
    println!("{}\n{}", a.out.display(), tp.display());
    Ok(())
}

#[derive(Serialize)]
struct CheckLine {
    name: String,
    instances: usize,
    max_rel_err: f64,
    pass: bool,
}

#[derive(Serialize)]
struct GradcheckReport {
    tolerance: f64,
    step: f64,
    likelihoods: Vec<CheckLine>,
    priors: Vec<CheckLine>,
    pass: bool,
}

const FD_STEP: f64 = 1e-6;

fn random_family(kind: FamilyKind, rng: &mut ChaCha8Rng) -> Family {
    match kind.default_family() {
        Family::Gaussian { .. } => Family::Gaussian { sigma: rng.gen_range(0.5..2.0) },
        Family::NegbinLog { .. } => Family::NegbinLog { alpha: rng.gen_range(0.5..5.0) },
        Family::Cauchy { .. } => Family::Cauchy { scale: rng.gen_range(0.5..2.0) },
        f => f,
    }
}

fn likelihood_error(fam: &Family, rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let (n, p) = (20, 5);
    let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-1.0..1.0));
    let y = Array1::from_shape_fn(n, |_| match fam {
        Family::BernoulliLogit => rng.gen_range(0..2) as f64,
        Family::PoissonLog | Family::NegbinLog { .. } => rng.gen_range(0..8) as f64,
        _ => rng.gen_range(-3.0..3.0),
    });
    let beta = Array1::from_shape_fn(p, |_| rng.gen_range(-0.7..0.7));
    let data = LinearModelData::new(x, y)?;
    Ok(likelihood::finite_diff_check(fam, &data, beta.view(), FD_STEP)?)
}

fn prior_error(kind: PriorKind, rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let p = 12;
    let n_obs = rng.gen_range(10..400);
    let spec = match kind {
        PriorKind::IndependentHalfCauchy => PriorSpec::independent(),
        PriorKind::SparseGroup => PriorSpec::sparse_group(GroupStructure::contiguous(p, 4)?, n_obs)?,
        PriorKind::OverlappingGroup => {
            let groups = [(0..6).collect(), (4..10).collect(), (8..12).chain(0..2).collect(), vec![3, 7, 11]];
            PriorSpec::overlapping_group(GroupStructure::from_groups(p, &groups)?, n_obs)?
        }
    };
    let gamma: Vec<f64> = (0..spec.n_gamma()).map(|_| rng.gen_range(0.05..3.0)).collect();
    // Weights sit near their group location, where the conditional densities
    // have moderate curvature.
    let lam: Vec<f64> = (0..p)
        .map(|j| match &spec.groups {
            None => rng.gen_range(0.01..5.0),
            Some(g) => (gamma[g.groups_of(j)[0]] + rng.gen_range(-2.0..2.0) * spec.group_scale).abs().max(1e-3),
        })
        .collect();
    Ok(prior::finite_diff_check(&spec, &lam, &gamma, FD_STEP)?)
}

fn gradcheck(a: GradcheckArgs) -> Result<(), CliError> {
    if a.instances == 0 {
        return Err(CliError::config("instances must be positive"));
    }
    let fams: Vec<FamilyKind> = match &a.family {
        Some(f) => vec![f.parse()?],
        None => FamilyKind::ALL.to_vec(),
    };
    let priors: Vec<PriorKind> = match &a.prior {
        Some(p) => vec![p.parse()?],
        None => PriorKind::ALL.to_vec(),
    };
    let line = |name: &str, worst: f64| CheckLine {
        name: name.into(),
        instances: a.instances,
        max_rel_err: worst,
        pass: worst < a.tol,
    };
    let mut likelihoods = Vec::new();
    for (k, kind) in fams.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed.wrapping_add(k as u64));
        let mut worst = 0.0f64;
        for _ in 0..a.instances {
            let fam = random_family(kind, &mut rng);
            worst = worst.max(likelihood_error(&fam, &mut rng)?);
        }
        likelihoods.push(line(kind.name(), worst));
    }
    let mut prior_lines = Vec::new();
    for (k, kind) in priors.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed.wrapping_add(100 + k as u64));
        let mut worst = 0.0f64;
        for _ in 0..a.instances {
            worst = worst.max(prior_error(kind, &mut rng)?);
        }
        prior_lines.push(line(kind.name(), worst));
    }
    let pass = likelihoods.iter().chain(&prior_lines).all(|l| l.pass);
    let report = GradcheckReport { tolerance: a.tol, step: FD_STEP, likelihoods, priors: prior_lines, pass };
    write_json(&report, a.out.as_deref())?;
    if !pass {
        return Err(CliError::Failure(format!("gradient check exceeded tolerance {:e}", a.tol)));
    }
    Ok(())
}

fn prox_table(a: ProxTableArgs) -> Result<(), CliError> {
    let lam0 = parse_axis(&a.lam0)?;
    let aa = parse_axis(&a.aa)?;
    if lam0.iter().chain(&aa).any(|v| *v < 0.0) {
        return Err(CliError::config("lam0 and aa axes must be nonnegative"));
    }
    reduced_prox(0.0, 0.0, a.b)?;
    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record(["lam0", "aa", "lam_star", "beta_zero"])?;
    for &l in &lam0 {
        for &x in &aa {
            let ls = reduced_prox(l, x, a.b)?;
            w.write_record([l.to_string(), x.to_string(), ls.to_string(), (x <= ls).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn penalty_profile(a: PenaltyProfileArgs) -> Result<(), CliError> {
    match a.rho.as_str() {
        "half_cauchy" => profile(ProfiledPenalty::new(a.tau, HalfCauchyRho)?, &a),
        "exponential" => profile(ProfiledPenalty::new(a.tau, ExponentialRho { rate: a.rate })?, &a),
        r => Err(CliError::config(format!("unknown rho '{r}' (expected half_cauchy or exponential)"))),
    }
}

fn profile<R: Rho>(pp: ProfiledPenalty<R>, a: &PenaltyProfileArgs) -> Result<(), CliError> {
    if !(a.max > 0.0 && a.max.is_finite()) || a.points < 2 {
        return Err(CliError::config("need max > 0 and at least two points"));
    }
    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record(["abs_beta", "lambda_star", "g", "gprime", "gsecond"])?;
    for k in 0..a.points {
        let b = a.max * k as f64 / (a.points - 1) as f64;
        let d = pp.value_grad(b)?;
        w.write_record([b, d.lam_star, d.g, d.gprime, d.gsecond].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
