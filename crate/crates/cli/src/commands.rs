use clap::{Args, ValueEnum};
use infogeo::divergence::{self, DiscreteDistribution, FGenerator};
use infogeo::fisher::{self, FimEstimate};
use infogeo::flat::{AffineSubmanifold, Chart, DuallyFlatManifold};
use infogeo::hypothesis::{self, BinaryHypothesis};
use infogeo::quadrature::Options;
use infogeo::{clustering, convex, model, ExponentialFamily, Potential};
use nalgebra::DMatrix;
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::output::{matrix, num, vector, Cell, Document, Table};
use crate::spec::{self, Family, ModelSpec, Operand};

/// What a subcommand produced: the JSON fields and the CSV table.
pub struct Outcome {
    pub doc: Document,
    pub table: Table,
}

const SWEEP_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivergenceKind {
    Kl,
    Revkl,
    Hellinger,
    Js,
    Tv,
    Alpha,
    Bregman,
    Jensen,
}

/// Divergence between two probability vectors or two members of one family.
///
/// `--p` and `--q` are JSON probability arrays or model specs. For model
/// specs, kl and revkl use closed forms; the other f-divergences integrate
/// `p f(q/p)`. bregman is `B_F(θp : θq)` and jensen the skew Jensen gap with
/// weight `--alpha` (default 0.5) on `θp`; both turn probability arrays into
/// categorical parameters.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: t,value\n  the divergence from p to the interpolant (1-t)p + tq \
    (in natural parameters for model specs), t = 0, 0.05, ..., 1")]
pub struct DivergenceArgs {
    #[arg(long, value_enum)]
    pub kind: DivergenceKind,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: String,
    /// α of the α-divergence, or the skew of jensen.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

fn f_generator(kind: DivergenceKind, alpha: Option<f64>) -> CliResult<Option<FGenerator>> {
    Ok(Some(match kind {
        DivergenceKind::Kl => FGenerator::kl(),
        DivergenceKind::Revkl => FGenerator::reverse_kl(),
        DivergenceKind::Hellinger => FGenerator::hellinger(),
        DivergenceKind::Js => FGenerator::jensen_shannon(),
        DivergenceKind::Tv => FGenerator::total_variation(),
        DivergenceKind::Alpha => {
            let a = alpha.ok_or_else(|| CliError::usage("--alpha", "required for --kind alpha"))?;
            FGenerator::alpha(a)
        }
        DivergenceKind::Bregman | DivergenceKind::Jensen => return Ok(None),
    }))
}

fn categorical_spec(flag: &str, d: &DiscreteDistribution) -> CliResult<ModelSpec> {
    let fam = ExponentialFamily::categorical(d.len()).map_err(|e| CliError::usage(flag, e.to_string()))?;
    let theta = fam
        .natural_from_source(d.probs())
        .map_err(|e| CliError::usage(flag, e.to_string()))?;
    Ok(ModelSpec {
        family: Family::Exp(fam),
        theta: Some(theta),
    })
}

fn model_f_divergence(gen: &FGenerator, family: &Family, tp: &[f64], tq: &[f64]) -> CliResult<(f64, &'static str)> {
    match (family, gen.name()) {
        (Family::Exp(f), "kl") => Ok((f.kl(tp, tq)?, "closed_form")),
        (Family::Exp(f), "reverse_kl") => Ok((f.kl(tq, tp)?, "closed_form")),
        (Family::Mixture(m), "kl") => Ok((m.kl_mixtures(tp, tq)?, "quadrature")),
        (Family::Mixture(m), "reverse_kl") => Ok((m.kl_mixtures(tq, tp)?, "quadrature")),
        _ => {
            let mdl = family.model();
            let v = model::expectation(
                mdl,
                tp,
                |x| gen.eval((mdl.log_density(tq, x) - mdl.log_density(tp, x)).exp()),
                Options::abs(1e-10),
            )?;
            Ok((v, "expectation"))
        }
    }
}

struct Pair {
    family: Family,
    p: Vec<f64>,
    q: Vec<f64>,
}

fn model_pair(p: &Operand, q: &Operand) -> CliResult<Pair> {
    let p = match p {
        Operand::Model(s) => s.clone(),
        Operand::Discrete(d) => categorical_spec("--p", d)?,
    };
    let q = match q {
        Operand::Model(s) => s.clone(),
        Operand::Discrete(d) => categorical_spec("--q", d)?,
    };
    if p.family != q.family {
        return Err(CliError::usage("--q.family", "both operands must come from the same family"));
    }
    Ok(Pair {
        p: p.require_theta("--p")?.to_vec(),
        q: q.require_theta("--q")?.to_vec(),
        family: p.family,
    })
}

fn divergence_value(args: &DivergenceArgs, p: &Operand, q: &Operand) -> CliResult<(f64, &'static str)> {
    match f_generator(args.kind, args.alpha)? {
        Some(gen) => match (p, q) {
            (Operand::Discrete(a), Operand::Discrete(b)) => {
                Ok((divergence::f_divergence_discrete(&gen, a, b)?, "sum"))
            }
            (Operand::Model(_), Operand::Model(_)) => {
                let pair = model_pair(p, q)?;
                model_f_divergence(&gen, &pair.family, &pair.p, &pair.q)
            }
            _ => Err(CliError::usage("--q", "mixes a probability array with a model spec")),
        },
        None => {
            let pair = model_pair(p, q)?;
            let v = pair.family.with_potential(|f| match args.kind {
                DivergenceKind::Bregman => divergence::bregman(f, &pair.p, &pair.q),
                _ => divergence::skew_jensen(f, args.alpha.unwrap_or(0.5), &pair.p, &pair.q),
            })?;
            Ok((v, "potential"))
        }
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

fn interpolate(p: &Operand, q: &Operand, t: f64) -> CliResult<Operand> {
    Ok(match (p, q) {
        (Operand::Discrete(a), Operand::Discrete(b)) => {
            Operand::Discrete(DiscreteDistribution::new(lerp(a.probs(), b.probs(), t))?)
        }
        (Operand::Model(a), Operand::Model(b)) => Operand::Model(ModelSpec {
            family: b.family.clone(),
            theta: Some(lerp(a.require_theta("--p")?, b.require_theta("--q")?, t)),
        }),
        _ => q.clone(),
    })
}

pub fn divergence(args: &DivergenceArgs, seed: u64) -> CliResult<Outcome> {
    let p = spec::parse_operand("--p", &args.p)?;
    let q = spec::parse_operand("--q", &args.q)?;
    let (value, method) = divergence_value(args, &p, &q)?;
    let mut doc = Document::new("divergence", seed);
    doc.set("kind", args.kind.to_possible_value().unwrap().get_name())
        .set("value", num(value))
        .set("method", method);
    if let Some(a) = args.alpha {
        doc.set("alpha", num(a));
    }
    let mut table = Table::new(["t", "value"]);
    for i in 0..=SWEEP_STEPS {
        let t = i as f64 / SWEEP_STEPS as f64;
        let (v, _) = divergence_value(args, &p, &interpolate(&p, &q, t)?)?;
        table.push(vec![Cell::Num(t), Cell::Num(v)]);
    }
    Ok(Outcome { doc, table })
}

/// Legendre-Fenchel conjugate `F*(η)` and its maximiser `θ = ∇F*(η)`.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: coordinate,eta,theta")]
pub struct LegendreArgs {
    #[arg(long)]
    pub model: String,
    /// Expectation parameter, comma-separated or a JSON array.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: String,
}

pub fn legendre(args: &LegendreArgs, seed: u64) -> CliResult<Outcome> {
    let spec = spec::parse_model("--model", &args.model)?;
    let eta = spec::parse_vector("--eta", &args.eta)?;
    if eta.len() != spec.family.dim() {
        return Err(CliError::usage(
            "--eta",
            format!("expected {} values for {}", spec.family.dim(), spec.family.name()),
        ));
    }
    let c = spec.family.with_potential(|f| convex::legendre_conjugate(f, &eta))?;
    let mut doc = Document::new("legendre", seed);
    doc.set("family", spec.family.name())
        .set("eta", vector(&eta))
        .set("value", num(c.value))
        .set("theta", vector(&c.theta))
        .set("iterations", c.iterations)
        .set("residual", num(c.residual));
    let mut table = Table::new(["coordinate", "eta", "theta"]);
    for (i, (e, t)) in eta.iter().zip(&c.theta).enumerate() {
        table.push(vec![Cell::Int(i), Cell::Num(*e), Cell::Num(*t)]);
    }
    Ok(Outcome { doc, table })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FimMethodArg {
    Score,
    Hessian,
    Alpha,
    Sqrt,
    Exact,
}

/// Fisher information matrix at the spec's `theta`.
///
/// score, hessian, alpha and sqrt are Monte-Carlo estimates over `--samples`
/// draws with entrywise standard errors; exact is the Hessian of the
/// cumulant function for exponential families and quadrature for mixtures.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: i,j,estimate,stderr")]
pub struct FimArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: FimMethodArg,
    /// α of the α-representation.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

pub fn fim(args: &FimArgs, seed: u64) -> CliResult<Outcome> {
    let spec = spec::parse_model("--model", &args.model)?;
    let theta = spec.require_theta("--model")?;
    let mdl = spec.family.model();
    let est: FimEstimate = match args.method {
        FimMethodArg::Score => fisher::fim_score_outer(mdl, theta, args.samples, seed)?,
        FimMethodArg::Hessian => fisher::fim_neg_hessian(mdl, theta, args.samples, seed)?,
        FimMethodArg::Alpha => {
            let a = args
                .alpha
                .ok_or_else(|| CliError::usage("--alpha", "required for --method alpha"))?;
            fisher::fim_alpha(mdl, theta, a, args.samples, seed)?
        }
        FimMethodArg::Sqrt => fisher::fim_sqrt(mdl, theta, args.samples, seed)?,
        FimMethodArg::Exact => match &spec.family {
            Family::Exp(f) => {
                let m = f.fim(theta)?;
                let d = m.nrows();
                FimEstimate {
                    matrix: m,
                    stderr: DMatrix::zeros(d, d),
                    n: 0,
                    method: fisher::FimMethod::Quadrature,
                }
            }
            Family::Mixture(m) => fisher::fim_quadrature(m, theta)?,
        },
    };
    let mut doc = Document::new("fim", seed);
    doc.set("family", spec.family.name())
        .set("theta", vector(theta))
        .set("method", args.method.to_possible_value().unwrap().get_name())
        .set("matrix", matrix(&est.matrix))
        .set("stderr", matrix(&est.stderr))
        .set("samples", if args.method == FimMethodArg::Exact { Value::Null } else { est.n.into() });
    if let Some(a) = args.alpha.filter(|_| args.method == FimMethodArg::Alpha) {
        doc.set("alpha", num(a));
    }
    let mut table = Table::new(["i", "j", "estimate", "stderr"]);
    for i in 0..est.matrix.nrows() {
        for j in 0..est.matrix.ncols() {
            table.push(vec![
                Cell::Int(i),
                Cell::Int(j),
                Cell::Num(est.matrix[(i, j)]),
                Cell::Num(est.stderr[(i, j)]),
            ]);
        }
    }
    Ok(Outcome { doc, table })
}

fn exp_family(spec: &ModelSpec, command: &str) -> CliResult<ExponentialFamily> {
    match &spec.family {
        Family::Exp(f) => Ok(f.clone()),
        Family::Mixture(_) => Err(CliError::usage(
            "--model.family",
            format!("{command} needs an exponential family"),
        )),
    }
}

fn parameter(spec: &ModelSpec, flag: &str, arg: &str) -> CliResult<Vec<f64>> {
    let theta = spec::parse_vector(flag, arg)?;
    spec.family.check(flag, &theta)?;
    Ok(theta)
}

/// Chernoff information between two members of an exponential family,
/// given by natural parameters.
///
/// `alpha_star` is the position of the optimum on the natural-parameter
/// segment from `--theta1` (0) to `--theta2` (1). `--simulate` adds a
/// Monte-Carlo estimate of the MAP error with equal priors.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: alpha,bhattacharyya,bregman_gap\n  \
    bhattacharyya = aF(theta1) + (1-a)F(theta2) - F(a theta1 + (1-a) theta2)\n  \
    bregman_gap = B(theta1 : theta_a) - B(theta2 : theta_a), theta_a = (1-a) theta1 + a theta2\n  \
    for a = 0.01, 0.02, ..., 0.99")]
pub struct ChernoffArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: String,
    #[arg(long, allow_hyphen_values = true)]
    pub theta2: String,
    #[arg(long)]
    pub simulate: bool,
    /// Observations per simulated test.
    #[arg(long, default_value_t = 1, requires = "simulate")]
    pub nobs: usize,
    #[arg(long, default_value_t = 100_000, requires = "simulate")]
    pub trials: usize,
}

pub fn chernoff(args: &ChernoffArgs, seed: u64) -> CliResult<Outcome> {
    let spec = spec::parse_model("--model", &args.model)?;
    let fam = exp_family(&spec, "chernoff")?;
    let t1 = parameter(&spec, "--theta1", &args.theta1)?;
    let t2 = parameter(&spec, "--theta2", &args.theta2)?;
    let c = hypothesis::chernoff(&fam, &t1, &t2)?;
    let mut doc = Document::new("chernoff", seed);
    doc.set("family", spec.family.name())
        .set("theta1", vector(&t1))
        .set("theta2", vector(&t2))
        .set("alpha_star", num(c.alpha_star))
        .set("value", num(c.value))
        .set("theta_star", vector(&c.theta_star));
    if args.simulate {
        let h = BinaryHypothesis::equal_priors(fam.clone(), t1.clone(), t2.clone())?;
        let s = hypothesis::map_error_simulation(&h, args.nobs, args.trials, seed)?;
        doc.set(
            "simulation",
            serde_json::json!({
                "nobs": args.nobs,
                "trials": s.trials,
                "errors": s.errors,
                "error_rate": num(s.error_rate),
                "stderr": num(s.stderr),
                "exponent": num(s.exponent),
                "reliable": s.reliable,
            }),
        );
    }
    let mut table = Table::new(["alpha", "bhattacharyya", "bregman_gap"]);
    for i in 1..100 {
        let a = i as f64 / 100.0;
        let mid = lerp(&t1, &t2, a);
        let gap = divergence::bregman(&fam, &t1, &mid)? - divergence::bregman(&fam, &t2, &mid)?;
        table.push(vec![
            Cell::Num(a),
            Cell::Num(hypothesis::bhattacharyya(&fam, &t1, &t2, a)?),
            Cell::Num(gap),
        ]);
    }
    Ok(Outcome { doc, table })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    Theta,
    Eta,
}

/// Information projection of `--point` (natural parameters) onto the affine
/// set `{x : A x = b}`.
///
/// With `--chart theta` the set is affine in natural parameters and the
/// result minimises `B_F(θ_Q : θ_P)`; with `--chart eta` it is affine in
/// expectation parameters and the result minimises `B_F(θ_P : θ_Q)`.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: coordinate,point_theta,point_eta,projection_theta,projection_eta")]
pub struct ProjectArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// "A;b" with A a JSON matrix or one comma-separated row.
    #[arg(long, allow_hyphen_values = true)]
    pub constraint: String,
    #[arg(long, value_enum)]
    pub chart: ChartArg,
}

pub fn project(args: &ProjectArgs, seed: u64) -> CliResult<Outcome> {
    let spec = spec::parse_model("--model", &args.model)?;
    let point = parameter(&spec, "--point", &args.point)?;
    let (rows, b) = spec::parse_constraint("--constraint", &args.constraint)?;
    let chart = match args.chart {
        ChartArg::Theta => Chart::Primal,
        ChartArg::Eta => Chart::Dual,
    };
    let sub = AffineSubmanifold::from_rows(chart, &rows, b).map_err(|e| CliError::usage("--constraint", e.to_string()))?;
    if sub.ambient_dim() != spec.family.dim() {
        return Err(CliError::usage(
            "--constraint",
            format!("expected {} columns for {}", spec.family.dim(), spec.family.name()),
        ));
    }
    let (p, q, value) = spec.family.with_potential(|f| -> infogeo::Result<_> {
        let m = DuallyFlatManifold::new(f);
        let p = m.from_theta(&point)?;
        let (q, value) = match chart {
            Chart::Primal => {
                let q = m.project_dual(&point, &sub)?;
                let v = m.divergence(&q.theta, &point)?;
                (q, v)
            }
            Chart::Dual => {
                let q = m.project_primal(&point, &sub)?;
                let v = m.divergence(&point, &q.theta)?;
                (q, v)
            }
        };
        Ok((p, q, value))
    })?;
    let residual = match chart {
        Chart::Primal => sub.residual(&q.theta),
        Chart::Dual => sub.residual(&q.eta),
    };
    let mut doc = Document::new("project", seed);
    doc.set("family", spec.family.name())
        .set("chart", args.chart.to_possible_value().unwrap().get_name())
        .set("point", serde_json::json!({"theta": vector(&p.theta), "eta": vector(&p.eta)}))
        .set("projection", serde_json::json!({"theta": vector(&q.theta), "eta": vector(&q.eta)}))
        .set("divergence", num(value))
        .set("constraint_residual", num(residual));
    let mut table = Table::new([
        "coordinate",
        "point_theta",
        "point_eta",
        "projection_theta",
        "projection_eta",
    ]);
    for i in 0..p.theta.len() {
        table.push(vec![
            Cell::Int(i),
            Cell::Num(p.theta[i]),
            Cell::Num(p.eta[i]),
            Cell::Num(q.theta[i]),
            Cell::Num(q.eta[i]),
        ]);
    }
    Ok(Outcome { doc, table })
}

/// Bregman k-means of w-mixtures, with divergences from one shared
/// Monte-Carlo generator.
///
/// `--mixture` is a mixture model spec or `{"components": [...]}`;
/// `--thetas` a JSON array of weight vectors (all components but the first).
/// Both may be inline JSON or file paths.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: index,cluster,theta_1,...,theta_D")]
pub struct ClusterArgs {
    #[arg(long)]
    pub mixture: String,
    #[arg(long)]
    pub thetas: String,
    #[arg(long)]
    pub k: usize,
    /// Monte-Carlo draws of the shared generator.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

pub fn cluster(args: &ClusterArgs, seed: u64) -> CliResult<Outcome> {
    let fam = spec::parse_mixture("--mixture", &args.mixture)?;
    let family = Family::Mixture(fam.clone());
    let thetas = spec::parse_points("--thetas", &args.thetas)?;
    for (i, t) in thetas.iter().enumerate() {
        family.check(&format!("--thetas[{i}]"), t)?;
    }
    let r = clustering::cluster_wmixtures(&fam, thetas.clone(), args.k, args.samples, seed)?;
    let mut doc = Document::new("cluster", seed);
    doc.set("k", args.k)
        .set("samples", args.samples)
        .set("assignments", r.assignments.clone())
        .set("centers", Value::Array(r.centers.iter().map(|c| vector(c)).collect()))
        .set("objective", num(r.objective))
        .set("history", vector(&r.history))
        .set("iterations", r.iterations)
        .set("reseeds", r.reseeds)
        .set("converged", r.converged);
    let d = fam.order();
    let mut table = Table::new(
        ["index".to_string(), "cluster".to_string()]
            .into_iter()
            .chain((1..=d).map(|i| format!("theta_{i}"))),
    );
    for (i, (t, c)) in thetas.iter().zip(&r.assignments).enumerate() {
        let mut row = vec![Cell::Int(i), Cell::Int(*c)];
        row.extend(t.iter().map(|&x| Cell::Num(x)));
        table.push(row);
    }
    Ok(Outcome { doc, table })
}

/// Fisher-Rao distance between two natural parameters, by minimising the
/// path energy of a discretised curve under the Hessian metric.
///
/// `closed_form` is reported for bernoulli, categorical, poisson,
/// exponential, gaussian and gaussian_fixed_var, and is null otherwise.
#[derive(Debug, Args)]
#[command(after_help = "CSV columns: node,t,theta_1,...,theta_D (the optimised path)")]
pub struct RaoArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: String,
    #[arg(long, allow_hyphen_values = true)]
    pub theta2: String,
    /// Path segments; at least 16.
    #[arg(long, default_value_t = 64)]
    pub segments: usize,
}

fn rao_closed_form(family: &Family, t1: &[f64], t2: &[f64]) -> infogeo::Result<Option<f64>> {
    let Family::Exp(f) = family else {
        return Ok(None);
    };
    let (s1, s2) = (f.source_from_natural(t1)?, f.source_from_natural(t2)?);
    Ok(Some(match f {
        ExponentialFamily::Bernoulli => fisher::rao_distance_categorical(
            &DiscreteDistribution::new(vec![s1[0], 1.0 - s1[0]])?,
            &DiscreteDistribution::new(vec![s2[0], 1.0 - s2[0]])?,
        )?,
        ExponentialFamily::Categorical { .. } => fisher::rao_distance_categorical(
            &DiscreteDistribution::new(s1)?,
            &DiscreteDistribution::new(s2)?,
        )?,
        ExponentialFamily::Poisson => 2.0 * (s1[0].sqrt() - s2[0].sqrt()).abs(),
        ExponentialFamily::Exponential => (s1[0] / s2[0]).ln().abs(),
        ExponentialFamily::GaussianLocation { sigma } => (s1[0] - s2[0]).abs() / sigma,
        ExponentialFamily::Gaussian => {
            let (dm, ds) = (s1[0] - s2[0], s1[1] - s2[1]);
            std::f64::consts::SQRT_2 * (1.0 + (0.5 * dm * dm + ds * ds) / (2.0 * s1[1] * s2[1])).acosh()
        }
    }))
}

pub fn rao(args: &RaoArgs, seed: u64) -> CliResult<Outcome> {
    let spec = spec::parse_model("--model", &args.model)?;
    let t1 = parameter(&spec, "--theta1", &args.theta1)?;
    let t2 = parameter(&spec, "--theta2", &args.theta2)?;
    if args.segments < 16 {
        return Err(CliError::usage("--segments", "needs at least 16"));
    }
    let path = spec
        .family
        .with_potential(|f: &dyn Potential| fisher::rao_distance_numeric(f, &t1, &t2, args.segments))?;
    let closed = rao_closed_form(&spec.family, &t1, &t2)?;
    let mut doc = Document::new("rao", seed);
    doc.set("family", spec.family.name())
        .set("theta1", vector(&t1))
        .set("theta2", vector(&t2))
        .set("distance", num(path.length))
        .set("straight_length", num(path.straight_length))
        .set("closed_form", closed.map_or(Value::Null, num))
        .set("segments", args.segments)
        .set("iterations", path.iterations);
    let d = t1.len();
    let mut table = Table::new(
        ["node".to_string(), "t".to_string()]
            .into_iter()
            .chain((1..=d).map(|i| format!("theta_{i}"))),
    );
    let last = path.nodes.len().saturating_sub(1).max(1) as f64;
    for (i, node) in path.nodes.iter().enumerate() {
        let mut row = vec![Cell::Int(i), Cell::Num(i as f64 / last)];
        row.extend(node.iter().map(|&x| Cell::Num(x)));
        table.push(row);
    }
    Ok(Outcome { doc, table })
}
