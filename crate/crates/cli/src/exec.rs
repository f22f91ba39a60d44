//! Experiment execution: dataset loading, trial scheduling, CSV output.

use crate::args::*;
use nyskit::dataio::{
    duplicate_features, duplicate_points, parse_libsvm, subsample, synth_two_rings, toy_example,
    write_results_csv, Dataset, ResultRow,
};
use nyskit::kernels::{bandwidth_heuristic, gram, gram_diagonal, KernelSpec};
use nyskit::landmark::{
    clustered_landmarks, column_norm_landmarks, diagonal_landmarks, randomized_clustered_landmarks,
    uniform_landmarks, LandmarkMethod, LandmarkSet,
};
use nyskit::matrix::{best_rank_r, DenseMatrix};
use nyskit::nystrom::{
    low_rank_factor, normalized_error, nystrom_qr, standard_nystrom, NystromInputs,
};
use nyskit::rng::derive_seed;
use std::fmt;
use std::fmt::Write as _;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "{msg}"),
        }
    }
}

/// Core errors raised while loading data are data errors; everything after
/// that is a numerical failure.
fn data_err(err: nyskit::Error) -> CliError {
    CliError::Data(err.to_string())
}

fn num_err(err: nyskit::Error) -> CliError {
    CliError::Numerical(err.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

struct Plan {
    dataset: Dataset,
    spec: KernelSpec,
    ms: Vec<usize>,
    ranks: Vec<usize>,
    method: MethodArg,
    restrict: RestrictArg,
    gamma: Option<f64>,
    trials: usize,
    seed: u64,
    kmeans_iters: usize,
    block: usize,
    timing_wall: bool,
    toy: bool,
}

fn validate_common(args: &CommonArgs, need_ranks: bool) -> Result<()> {
    if args.data.is_none() && args.synth.is_none() {
        return Err(CliError::Config(
            "one of --data or --synth is required".into(),
        ));
    }
    if args.trials < 1 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    if args.block < 1 {
        return Err(CliError::Config("--block must be at least 1".into()));
    }
    if args.dup_points < 1 || args.dup_features < 1 {
        return Err(CliError::Config(
            "duplication factors must be at least 1".into(),
        ));
    }
    if args.d < 1 {
        return Err(CliError::Config("--d must be at least 1".into()));
    }
    if args.synth == Some(SynthKind::TwoRings) && (args.synth_n == 0 || args.synth_n % 2 != 0) {
        return Err(CliError::Config(
            "--synth-n must be a positive even number for two-rings".into(),
        ));
    }
    match args.method {
        MethodArg::Randclustered => match args.gamma {
            None => {
                return Err(CliError::Config(
                    "--gamma is required when --method randclustered".into(),
                ))
            }
            Some(g) if !(g > 0.0 && g <= 1.0) => {
                return Err(CliError::Config(format!(
                    "--gamma must lie in (0, 1], got {g}"
                )))
            }
            _ => {}
        },
        _ => {
            if args.gamma.is_some() {
                return Err(CliError::Config(
                    "--gamma is only meaningful with --method randclustered".into(),
                ));
            }
        }
    }
    if need_ranks && args.rank.is_empty() {
        return Err(CliError::Config("--rank needs at least one value".into()));
    }
    if args.method != MethodArg::Svd {
        if args.landmarks.is_empty() {
            return Err(CliError::Config(
                "--landmarks needs at least one value".into(),
            ));
        }
        for &m in &args.landmarks {
            for &r in &args.rank {
                if m < r {
                    return Err(CliError::Config(format!(
                        "every landmark count must reach the paired rank; got m = {m} < r = {r}"
                    )));
                }
            }
        }
    }
    Ok(())
}

fn load_dataset(args: &CommonArgs) -> Result<Dataset> {
    let mut ds = match (&args.data, args.synth) {
        (Some(path), None) => parse_libsvm(path, args.dim).map_err(data_err)?,
        (None, Some(SynthKind::TwoRings)) => {
            synth_two_rings(args.synth_n, args.seed, (1.0, 2.0), args.noise).map_err(data_err)?
        }
        (None, Some(SynthKind::Toy)) => {
            let (x, _) = toy_example();
            Dataset {
                x,
                y: None,
                name: "toy".into(),
            }
        }
        _ => unreachable!("validated: exactly one source"),
    };
    if args.dup_points > 1 {
        ds = duplicate_points(&ds, args.dup_points);
    }
    if args.dup_features > 1 {
        ds = duplicate_features(&ds, args.dup_features);
    }
    if let Some(keep) = args.subsample {
        ds = subsample(&ds, keep, args.seed).map_err(data_err)?;
    }
    if ds.points() == 0 {
        return Err(CliError::Data("dataset has no points".into()));
    }
    Ok(ds)
}

fn resolve_kernel(args: &CommonArgs, dataset: &Dataset) -> Result<KernelSpec> {
    let c = if args.c == "auto" {
        if args.kernel == KernelArg::Linear {
            0.0
        } else {
            bandwidth_heuristic(&dataset.x).map_err(data_err)?
        }
    } else {
        args.c
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("--c must be a number or \"auto\", got {:?}", args.c)))?
    };
    let spec = match args.kernel {
        KernelArg::Gaussian => KernelSpec::gaussian(c),
        KernelArg::Poly => KernelSpec::polynomial(c, args.d),
        KernelArg::Linear => Ok(KernelSpec::linear()),
    };
    spec.map_err(|e| CliError::Config(e.to_string()))
}

fn make_plan(args: &CommonArgs, need_ranks: bool) -> Result<Plan> {
    validate_common(args, need_ranks)?;
    let dataset = load_dataset(args)?;
    let spec = resolve_kernel(args, &dataset)?;
    let n = dataset.points();
    for &m in &args.landmarks {
        if m > n {
            return Err(CliError::Config(format!(
                "--landmarks {m} exceeds the dataset size {n}"
            )));
        }
    }
    for &r in &args.rank {
        if r > n {
            return Err(CliError::Config(format!(
                "--rank {r} exceeds the dataset size {n}"
            )));
        }
    }
    Ok(Plan {
        dataset,
        spec,
        ms: args.landmarks.clone(),
        ranks: args.rank.clone(),
        method: args.method,
        restrict: args.restrict,
        gamma: args.gamma,
        trials: args.trials,
        seed: args.seed,
        kmeans_iters: args.kmeans_iters,
        block: args.block,
        timing_wall: args.timing == TimingArg::Wall,
        toy: args.synth == Some(SynthKind::Toy),
    })
}

// ---------------------------------------------------------------------------
// landmark selection
// ---------------------------------------------------------------------------

/// Shared per-run inputs that are expensive to build (the full Gram matrix,
/// needed by column-norm sampling and the SVD baseline).
struct Shared {
    full_gram: Option<DenseMatrix>,
    diag: Option<Vec<f64>>,
}

impl Shared {
    fn prepare(plan: &Plan) -> Result<Self> {
        let full_gram = if plan.method == MethodArg::Colnorm || plan.method == MethodArg::Svd {
            Some(gram(&plan.dataset.x, &plan.spec).map_err(num_err)?)
        } else {
            None
        };
        let diag = if plan.method == MethodArg::Diag {
            Some(gram_diagonal(&plan.dataset.x, &plan.spec))
        } else {
            None
        };
        Ok(Self { full_gram, diag })
    }
}

fn select_landmarks(plan: &Plan, shared: &Shared, m: usize, seed: u64) -> Result<LandmarkSet> {
    let x = &plan.dataset.x;
    if plan.toy {
        // The worked example fixes its landmarks to the first m columns; a
        // random draw cannot reproduce its reported error pair.
        return Ok(LandmarkSet {
            z: x.select_columns(&(0..m).collect::<Vec<_>>()),
            method: LandmarkMethod::Uniform,
            seed,
            gamma: None,
        });
    }
    let lm = match plan.method {
        MethodArg::Uniform => uniform_landmarks(x, m, seed),
        MethodArg::Colnorm => {
            let k = shared.full_gram.as_ref().expect("prepared for colnorm");
            column_norm_landmarks(k, x, m, seed)
        }
        MethodArg::Diag => {
            let d = shared.diag.as_ref().expect("prepared for diag");
            diagonal_landmarks(d, x, m, seed)
        }
        MethodArg::Clustered => clustered_landmarks(x, m, seed, plan.kmeans_iters),
        MethodArg::Randclustered => {
            let gamma = plan.gamma.expect("validated");
            randomized_clustered_landmarks(x, m, gamma, seed, plan.kmeans_iters)
        }
        MethodArg::Svd => unreachable!("svd runs outside the landmark path"),
    };
    lm.map_err(num_err)
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

fn map_jobs<T, R, F>(jobs: Vec<T>, f: F) -> Result<Vec<R>>
where
    T: Send + Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        jobs.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(f).collect()
    }
}

fn finish(plan: &Plan, mut rows: Vec<ResultRow>, out: &std::path::Path) -> Result<()> {
    rows.sort_by(|a, b| {
        (&a.method, a.m, a.r, a.trial).cmp(&(&b.method, b.m, b.r, b.trial))
    });
    write_results_csv(&rows, out).map_err(data_err)?;
    print_summary(&rows, plan.timing_wall);
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn print_summary(rows: &[ResultRow], timing_wall: bool) {
    let mut cells: Vec<(String, usize, usize)> = rows
        .iter()
        .map(|r| (r.method.clone(), r.m, r.r))
        .collect();
    cells.dedup();
    println!(
        "{:<14} {:>5} {:>4} {:>7} {:>13} {:>13} {:>10} {:>10}",
        "method", "m", "r", "trials", "mean_error", "std_error", "mean_s", "median_s"
    );
    for (method, m, r) in cells {
        let errs: Vec<f64> = rows
            .iter()
            .filter(|row| row.method == method && row.m == m && row.r == r)
            .map(|row| row.error)
            .collect();
        let mut times: Vec<f64> = rows
            .iter()
            .filter(|row| row.method == method && row.m == m && row.r == r)
            .map(|row| row.elapsed_seconds)
            .collect();
        let t = errs.len();
        let mean = errs.iter().sum::<f64>() / t as f64;
        let std = if t > 1 {
            (errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (t - 1) as f64).sqrt()
        } else {
            0.0
        };
        times.sort_by(f64::total_cmp);
        let mean_t = times.iter().sum::<f64>() / t as f64;
        let median_t = if t % 2 == 1 {
            times[t / 2]
        } else {
            0.5 * (times[t / 2 - 1] + times[t / 2])
        };
        let mut line = format!(
            "{:<14} {:>5} {:>4} {:>7} {:>13.6e} {:>13.6e}",
            method, m, r, t, mean, std
        );
        if timing_wall {
            write!(line, " {mean_t:>10.4} {median_t:>10.4}").expect("string write");
        } else {
            write!(line, " {:>10} {:>10}", "-", "-").expect("string write");
        }
        println!("{line}");
    }
}

pub fn run_approx(args: ApproxArgs) -> Result<()> {
    let plan = make_plan(&args.common, true)?;
    let shared = Shared::prepare(&plan)?;
    let x = &plan.dataset.x;
    let mut rows = Vec::new();

    if plan.method == MethodArg::Svd {
        let k = shared.full_gram.as_ref().expect("prepared for svd");
        for &r in &plan.ranks {
            let t0 = Instant::now();
            let approx = best_rank_r(k, r).map_err(num_err)?;
            let l = low_rank_factor(&approx).map_err(num_err)?;
            let elapsed = t0.elapsed().as_secs_f64();
            let error = normalized_error(x, &plan.spec, &l, plan.block).map_err(num_err)?;
            rows.push(ResultRow {
                method: "svd".into(),
                m: 0,
                r,
                gamma: None,
                trial: 0,
                seed: plan.seed,
                error,
                elapsed_seconds: if plan.timing_wall { elapsed } else { 0.0 },
            });
        }
        return finish(&plan, rows, &args.common.out);
    }

    let mut jobs = Vec::new();
    for &m in &plan.ms {
        for &r in &plan.ranks {
            for trial in 0..plan.trials {
                jobs.push((m, r, trial));
            }
        }
    }
    let computed = map_jobs(jobs, |&(m, r, trial)| {
        let trial_seed = derive_seed(plan.seed, trial as u64);
        let t0 = Instant::now();
        let lm = select_landmarks(&plan, &shared, m, trial_seed)?;
        let gamma = lm.gamma;
        let inputs =
            NystromInputs::from_data(x, lm, plan.spec.clone()).map_err(num_err)?;
        let approx = match plan.restrict {
            RestrictArg::Qr => nystrom_qr(&inputs, r),
            RestrictArg::Standard => standard_nystrom(&inputs, r),
        }
        .map_err(num_err)?;
        let l = low_rank_factor(&approx).map_err(num_err)?;
        let elapsed = t0.elapsed().as_secs_f64();
        let error = normalized_error(x, &plan.spec, &l, plan.block).map_err(num_err)?;
        Ok(ResultRow {
            method: plan.method.name().into(),
            m,
            r,
            gamma,
            trial,
            seed: trial_seed,
            error,
            elapsed_seconds: if plan.timing_wall { elapsed } else { 0.0 },
        })
    })?;
    rows.extend(computed);
    finish(&plan, rows, &args.common.out)
}

pub fn run_krr(args: KrrArgs) -> Result<()> {
    if !(args.lambda > 0.0) {
        return Err(CliError::Config(format!(
            "--lambda must be positive, got {}",
            args.lambda
        )));
    }
    let plan = make_plan(&args.common, true)?;
    let y = plan
        .dataset
        .y
        .clone()
        .ok_or_else(|| CliError::Data("kernel ridge regression needs responses".into()))?;
    let shared = Shared::prepare(&plan)?;
    let x = &plan.dataset.x;

    let problem = nyskit::krr::RidgeProblem::new(x.clone(), y.clone(), args.lambda, plan.spec.clone())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let alpha_star = nyskit::krr::krr_exact(&problem).map_err(num_err)?;

    let mut rows = Vec::new();
    if plan.method == MethodArg::Svd {
        let k = shared.full_gram.as_ref().expect("prepared for svd");
        for &r in &plan.ranks {
            let t0 = Instant::now();
            let approx = best_rank_r(k, r).map_err(num_err)?;
            let l = low_rank_factor(&approx).map_err(num_err)?;
            let elapsed = t0.elapsed().as_secs_f64();
            let alpha = nyskit::krr::krr_lowrank(&l, &y, args.lambda).map_err(num_err)?;
            let error = nyskit::krr::alpha_error(&alpha, &alpha_star).map_err(num_err)?;
            rows.push(ResultRow {
                method: "svd".into(),
                m: 0,
                r,
                gamma: None,
                trial: 0,
                seed: plan.seed,
                error,
                elapsed_seconds: if plan.timing_wall { elapsed } else { 0.0 },
            });
        }
        return finish(&plan, rows, &args.common.out);
    }

    let mut jobs = Vec::new();
    for &m in &plan.ms {
        for &r in &plan.ranks {
            for trial in 0..plan.trials {
                jobs.push((m, r, trial));
            }
        }
    }
    let computed = map_jobs(jobs, |&(m, r, trial)| {
        let trial_seed = derive_seed(plan.seed, trial as u64);
        let t0 = Instant::now();
        let lm = select_landmarks(&plan, &shared, m, trial_seed)?;
        let gamma = lm.gamma;
        let inputs =
            NystromInputs::from_data(x, lm, plan.spec.clone()).map_err(num_err)?;
        let approx = match plan.restrict {
            RestrictArg::Qr => nystrom_qr(&inputs, r),
            RestrictArg::Standard => standard_nystrom(&inputs, r),
        }
        .map_err(num_err)?;
        let l = low_rank_factor(&approx).map_err(num_err)?;
        let elapsed = t0.elapsed().as_secs_f64();
        let alpha = nyskit::krr::krr_lowrank(&l, &y, args.lambda).map_err(num_err)?;
        let error = nyskit::krr::alpha_error(&alpha, &alpha_star).map_err(num_err)?;
        Ok(ResultRow {
            method: plan.method.name().into(),
            m,
            r,
            gamma,
            trial,
            seed: trial_seed,
            error,
            elapsed_seconds: if plan.timing_wall { elapsed } else { 0.0 },
        })
    })?;
    rows.extend(computed);
    finish(&plan, rows, &args.common.out)
}

pub fn run_landmarks(args: LandmarkArgs) -> Result<()> {
    if args.common.method == MethodArg::Svd {
        return Err(CliError::Config(
            "the svd baseline selects no landmarks".into(),
        ));
    }
    let plan = make_plan(&args.common, false)?;
    let shared = Shared::prepare(&plan)?;
    let m = plan.ms[0];
    let seed = derive_seed(plan.seed, 0);
    let lm = select_landmarks(&plan, &shared, m, seed)?;

    let mut out = String::from("landmark");
    for i in 0..lm.z.rows() {
        write!(out, ",x{i}").expect("string write");
    }
    out.push('\n');
    for j in 0..lm.z.cols() {
        write!(out, "{j}").expect("string write");
        for &v in lm.z.col(j) {
            write!(out, ",{v}").expect("string write");
        }
        out.push('\n');
    }
    std::fs::write(&args.common.out, out).map_err(|e| CliError::Data(e.to_string()))?;
    println!(
        "wrote {} landmarks ({}) to {}",
        m,
        plan.method.name(),
        args.common.out.display()
    );
    Ok(())
}
