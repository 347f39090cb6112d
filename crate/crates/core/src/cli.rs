//! Command-line front end.
//!
//! Subcommands read a JSON config (`"schema": 1`) and write JSON or CSV. Every
//! run is a pure function of its inputs, so reruns produce identical bytes.
//! Exit codes: 0 success, 2 configuration or precondition error, 3 domain or
//! numerical error, 4 algorithm failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::clustering::{cluster, ClusterConfig, Seeding, Variant, DEFAULT_SKEW_ALPHA};
use crate::error::{Error, Result};
use crate::families::{
    binomial_ef_oracle, gaussian_ef_oracle, pef_quadrature_oracle, Component, Density,
    ExponentialFamily, GaussianOracle, MixtureFamily, MixtureParam, QuadratureMixtureGenerator,
    Uniform,
};
use crate::generators::{
    build_mc_exponential_generator, build_mc_mixture_generator, check_spd, Generator,
    MCExponentialGenerator,
};
use crate::geometry::{mc_kl_estimate, DuallyFlatSpace, JeffreysMode, KlVariant};
use crate::sampling::{
    draw_sample_set, mixture_member_proposal, uniform_mixture_proposal, FamilyRef, Proposal,
    SampleSet, RNG_NAME,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "mcig", version, about = "Monte Carlo information geometry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a seeded sample set for a family and write it as JSON.
    Sample {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate Monte Carlo generators of a 1D family on a grid (CSV).
    Curve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate divergences between two parameters (JSON).
    Divergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bregman k-means over a list of parameters.
    Cluster {
        #[arg(long)]
        config: PathBuf,
        /// Points file; overrides points given in the config.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Mixed)]
        variant: VariantArg,
        #[arg(long, default_value_t = DEFAULT_SKEW_ALPHA)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = SeedingArg::KmeansPlusPlus)]
        seeding: SeedingArg,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// ClusterResult JSON; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-point coordinates and labels.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Diagnostics of a generator: SPD Hessians, round trips, Crouzeix identity.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Right,
    Left,
    Mixed,
    Jeffreys,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SeedingArg {
    #[value(name = "kmeans++")]
    KmeansPlusPlus,
    Forgy,
}

/// Importance proposal choices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProposalSpec {
    /// Equal-weight mixture of the family components.
    UniformMixture,
    /// The family member with the given weights.
    Member { eta: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    Density { density: Component },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FamilySpec {
    Mixture {
        components: Vec<Component>,
        #[serde(default)]
        proposal: Option<ProposalSpec>,
    },
    Exponential {
        powers: Vec<u32>,
        #[serde(default)]
        proposal: Option<ProposalSpec>,
    },
}

/// A standalone family file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyFile {
    pub schema: u32,
    #[serde(flatten)]
    pub family: FamilySpec,
}

/// A family given inline or as a path to a family file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySource {
    File(String),
    Inline(FamilySpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeneratorSpec {
    McMixture {
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        sample_file: Option<String>,
    },
    McExponential {
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        sample_file: Option<String>,
        #[serde(default)]
        reference: Option<usize>,
    },
    QuadratureMixture,
    GaussianOracle,
    BinomialOracle,
    PefQuadrature { powers: Vec<u32> },
}

#[derive(Debug, Clone, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CurveConfig {
    pub schema: u32,
    pub family: FamilySource,
    pub m: Vec<usize>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub seed: u64,
    pub grid: Grid,
    #[serde(default)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DivergenceConfig {
    pub schema: u32,
    #[serde(default)]
    pub family: Option<FamilySource>,
    pub generator: GeneratorSpec,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(default = "default_measures")]
    pub measures: Vec<Measure>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_kl_m")]
    pub kl_m: usize,
    #[serde(default)]
    pub kl_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Bregman,
    ReverseBregman,
    Jeffreys,
    JeffreysSkew,
    SkewJensen,
    KlNaive,
    KlExtended,
}

fn default_measures() -> Vec<Measure> {
    vec![Measure::Bregman]
}

fn default_alpha() -> f64 {
    DEFAULT_SKEW_ALPHA
}

fn default_kl_m() -> usize {
    100_000
}

/// Shared config of `cluster` and `check`.
#[derive(Debug, Clone, Deserialize)]
pub struct SpaceConfig {
    pub schema: u32,
    #[serde(default)]
    pub family: Option<FamilySource>,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointsFile {
    pub schema: u32,
    pub points: Vec<Vec<f64>>,
}

enum Family {
    Mixture(MixtureFamily, Proposal),
    Exponential(ExponentialFamily, Option<Proposal>),
}

impl Family {
    fn fingerprint(&self) -> String {
        match self {
            Family::Mixture(f, _) => f.fingerprint(),
            Family::Exponential(f, _) => f.fingerprint(),
        }
    }

    fn order(&self) -> usize {
        match self {
            Family::Mixture(f, _) => f.order(),
            Family::Exponential(f, _) => f.order(),
        }
    }

    fn family_ref(&self) -> FamilyRef<'_> {
        match self {
            Family::Mixture(f, _) => FamilyRef::Mixture(f),
            Family::Exponential(f, _) => FamilyRef::Exponential(f),
        }
    }

    fn proposal(&self) -> Result<&Proposal> {
        match self {
            Family::Mixture(_, p) => Ok(p),
            Family::Exponential(_, Some(p)) => Ok(p),
            Family::Exponential(..) => Err(Error::Precondition(
                "an exponential family needs an explicit proposal".into(),
            )),
        }
    }
}

fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return Err(Error::Precondition(format!(
            "unsupported schema version {schema}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Precondition(format!("cannot read {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Precondition(format!("invalid config {}: {e}", path.display())))
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn build_proposal(spec: &ProposalSpec, mixture: Option<&MixtureFamily>) -> Result<Proposal> {
    Ok(match spec {
        ProposalSpec::UniformMixture => uniform_mixture_proposal(mixture.ok_or_else(|| {
            Error::Precondition("a uniform-mixture proposal needs a mixture family".into())
        })?),
        ProposalSpec::Member { eta } => {
            let fam = mixture.ok_or_else(|| {
                Error::Precondition("a member proposal needs a mixture family".into())
            })?;
            mixture_member_proposal(fam, &MixtureParam::from_slice(eta)?)?
        }
        ProposalSpec::Uniform { lo, hi } => Proposal::from_density(Arc::new(Uniform::new(*lo, *hi)?)),
        ProposalSpec::Density { density } => Proposal::from_density(Arc::new(density.validated()?)),
    })
}

fn build_family(spec: &FamilySpec) -> Result<Family> {
    match spec {
        FamilySpec::Mixture {
            components,
            proposal,
        } => {
            let comps = components
                .iter()
                .map(|c| c.validated())
                .collect::<Result<Vec<_>>>()?;
            let fam = MixtureFamily::from_components(&comps)?;
            let q = build_proposal(proposal.as_ref().unwrap_or(&ProposalSpec::UniformMixture), Some(&fam))?;
            Ok(Family::Mixture(fam, q))
        }
        FamilySpec::Exponential { powers, proposal } => {
            let fam = ExponentialFamily::polynomial(powers)?;
            let q = proposal.as_ref().map(|p| build_proposal(p, None)).transpose()?;
            Ok(Family::Exponential(fam, q))
        }
    }
}

fn load_family(source: &FamilySource, base: &Path) -> Result<Family> {
    match source {
        FamilySource::Inline(spec) => build_family(spec),
        FamilySource::File(path) => {
            let file: FamilyFile = read_json(&resolve(base, path))?;
            check_schema(file.schema)?;
            build_family(&file.family)
        }
    }
}

fn log_run(seed: u64, m: usize, proposal: &str, family: &str) {
    eprintln!("mcig: rng={RNG_NAME} seed={seed} m={m} proposal={proposal} family={family}");
}

fn sample_for(family: &Family, m: Option<usize>, seed: Option<u64>, file: Option<&str>, base: &Path) -> Result<SampleSet> {
    if let Some(file) = file {
        let set = SampleSet::load(resolve(base, file))?;
        log_run(set.seed, set.len(), &set.proposal, &set.family);
        return Ok(set);
    }
    let m = m.ok_or_else(|| Error::Precondition("generator needs `m` or `sample_file`".into()))?;
    let seed = seed.unwrap_or(0);
    let q = family.proposal()?;
    log_run(seed, m, q.label(), &family.fingerprint());
    draw_sample_set(q, m, seed, family.family_ref())
}

fn build_generator(
    spec: &GeneratorSpec,
    family: Option<&Family>,
    base: &Path,
) -> Result<Box<dyn Generator>> {
    let need = || family.ok_or_else(|| Error::Precondition("this generator needs a family".into()));
    Ok(match spec {
        GeneratorSpec::McMixture { m, seed, sample_file } => {
            let fam = need()?;
            let Family::Mixture(mix, _) = fam else {
                return Err(Error::Precondition("mc_mixture needs a mixture family".into()));
            };
            let set = sample_for(fam, *m, *seed, sample_file.as_deref(), base)?;
            Box::new(build_mc_mixture_generator(mix, &set)?)
        }
        GeneratorSpec::McExponential {
            m,
            seed,
            sample_file,
            reference,
        } => {
            let fam = need()?;
            let Family::Exponential(ef, _) = fam else {
                return Err(Error::Precondition("mc_exponential needs an exponential family".into()));
            };
            let set = sample_for(fam, *m, *seed, sample_file.as_deref(), base)?;
            Box::new(match reference {
                Some(r) => MCExponentialGenerator::with_reference(ef, &set, *r)?,
                None => build_mc_exponential_generator(ef, &set)?,
            })
        }
        GeneratorSpec::QuadratureMixture => {
            let Family::Mixture(mix, _) = need()? else {
                return Err(Error::Precondition("quadrature_mixture needs a mixture family".into()));
            };
            Box::new(QuadratureMixtureGenerator::new(mix.clone()))
        }
        GeneratorSpec::GaussianOracle => Box::new(gaussian_ef_oracle()),
        GeneratorSpec::BinomialOracle => Box::new(binomial_ef_oracle()),
        GeneratorSpec::PefQuadrature { powers } => Box::new(pef_quadrature_oracle(powers)?),
    })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json_text(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn cmd_sample(family: &Path, m: usize, seed: u64, out: &Path) -> Result<()> {
    let file: FamilyFile = read_json(family)?;
    check_schema(file.schema)?;
    let fam = build_family(&file.family)?;
    let q = fam.proposal()?;
    log_run(seed, m, q.label(), &fam.fingerprint());
    let set = draw_sample_set(q, m, seed, fam.family_ref())?;
    set.save(out)?;
    let lo = set.variates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = set.variates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({
        "m": set.len(),
        "seed": seed,
        "proposal": set.proposal,
        "family": set.family,
        "min": lo,
        "max": hi,
    });
    print!("{}", json_text(&summary)?);
    Ok(())
}

fn cmd_curve(config: &Path, out: Option<&Path>) -> Result<()> {
    let cfg: CurveConfig = read_json(config)?;
    check_schema(cfg.schema)?;
    let base = base_dir(config);
    let fam = load_family(&cfg.family, &base)?;
    if fam.order() != 1 {
        return Err(Error::Precondition("curves are only available for one-dimensional families".into()));
    }
    if cfg.m.is_empty() || cfg.m.contains(&0) {
        return Err(Error::Precondition("`m` must be a non-empty list of positive sizes".into()));
    }
    let Grid { lo, hi, n } = cfg.grid;
    if n < 2 || lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::Precondition("grid needs lo < hi and n >= 2".into()));
    }
    let grid: Vec<DVector<f64>> = (0..n)
        .map(|i| DVector::from_element(1, lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect();
    let seeds = cfg.seeds.clone().unwrap_or_else(|| vec![cfg.seed]);
    let max_m = *cfg.m.iter().max().expect("non-empty");
    let q = fam.proposal()?;

    let mut columns: Vec<(String, Box<dyn Generator>)> = Vec::new();
    for &seed in &seeds {
        log_run(seed, max_m, q.label(), &fam.fingerprint());
        let full = draw_sample_set(q, max_m, seed, fam.family_ref())?;
        for &m in &cfg.m {
            let set = full.slice(0, m)?;
            let name = if seeds.len() > 1 {
                format!("m{m}_seed{seed}")
            } else {
                format!("m{m}")
            };
            let gen: Box<dyn Generator> = match &fam {
                Family::Mixture(mix, _) => Box::new(build_mc_mixture_generator(mix, &set)?),
                Family::Exponential(ef, _) => Box::new(build_mc_exponential_generator(ef, &set)?),
            };
            columns.push((name, gen));
        }
    }
    if cfg.oracle {
        let gen: Box<dyn Generator> = match &fam {
            Family::Mixture(mix, _) => Box::new(QuadratureMixtureGenerator::new(mix.clone())),
            Family::Exponential(ef, _) => Box::new(pef_quadrature_oracle(ef.powers().ok_or_else(
                || Error::Precondition("no quadrature oracle for this family".into()),
            )?)?),
        };
        columns.push(("quadrature".into(), gen));
    }
    for x in &grid {
        if let Some((_, g)) = columns.iter().find(|(_, g)| !g.contains(x)) {
            return Err(Error::Precondition(format!(
                "grid point {} lies outside the domain of {}",
                x[0],
                g.name()
            )));
        }
    }

    let axis = if matches!(fam, Family::Mixture(..)) { "eta" } else { "theta" };
    let mut csv = String::from(axis);
    for (name, _) in &columns {
        let _ = write!(csv, ",{name}");
    }
    csv.push('\n');
    for x in &grid {
        let _ = write!(csv, "{:.16e}", x[0]);
        for (_, g) in &columns {
            let _ = write!(csv, ",{:.16e}", g.value(x)?);
        }
        csv.push('\n');
    }
    write_output(out, &csv)
}

/// Densities of the distributions with parameters `p` and `q`, for MC-KL.
fn kl_densities(
    spec: &GeneratorSpec,
    family: Option<&Family>,
    p: &DVector<f64>,
    q: &DVector<f64>,
) -> Result<(Arc<dyn Density>, Arc<dyn Density>)> {
    match (spec, family) {
        (GeneratorSpec::GaussianOracle, _) => {
            let g = gaussian_ef_oracle();
            for x in [p, q] {
                if !g.contains(x) {
                    return Err(Error::Domain(format!("{:?} is not a normal natural parameter", x.as_slice())));
                }
            }
            let d = |x: &DVector<f64>| -> Result<Arc<dyn Density>> {
                let (mean, std) = GaussianOracle::moments_from_natural(x);
                Ok(Arc::new(Component::gaussian(mean, std)?))
            };
            Ok((d(p)?, d(q)?))
        }
        (_, Some(Family::Mixture(mix, _))) => {
            let d = |x: &DVector<f64>| -> Result<Arc<dyn Density>> {
                Ok(Arc::new(mixture_member_proposal(mix, &MixtureParam::new(x.clone())?)?))
            };
            Ok((d(p)?, d(q)?))
        }
        _ => Err(Error::Precondition(
            "MC-KL needs a mixture family or the Gaussian oracle".into(),
        )),
    }
}

fn cmd_divergence(config: &Path, out: Option<&Path>) -> Result<()> {
    let cfg: DivergenceConfig = read_json(config)?;
    check_schema(cfg.schema)?;
    let base = base_dir(config);
    let fam = cfg.family.as_ref().map(|f| load_family(f, &base)).transpose()?;
    let space = DuallyFlatSpace::new(build_generator(&cfg.generator, fam.as_ref(), &base)?);
    let p = DVector::from_column_slice(&cfg.p);
    let q = DVector::from_column_slice(&cfg.q);
    let mut result = Map::new();
    for m in &cfg.measures {
        let v = match m {
            Measure::Bregman => space.bregman_divergence(&p, &q)?,
            Measure::ReverseBregman => space.bregman_divergence(&q, &p)?,
            Measure::Jeffreys => space.jeffreys_divergence(&p, &q, JeffreysMode::Exact)?,
            Measure::JeffreysSkew => space.jeffreys_divergence(&p, &q, JeffreysMode::Skew(cfg.alpha))?,
            Measure::SkewJensen => space.skew_jensen(&p, &q, cfg.alpha)?,
            Measure::KlNaive | Measure::KlExtended => {
                let (dp, dq) = kl_densities(&cfg.generator, fam.as_ref(), &p, &q)?;
                let variant = if *m == Measure::KlNaive {
                    KlVariant::Naive
                } else {
                    KlVariant::Extended
                };
                mc_kl_estimate(dp.as_ref(), dq.as_ref(), cfg.kl_m, cfg.kl_seed, variant)?
            }
        };
        let key = serde_json::to_value(m)?;
        result.insert(key.as_str().unwrap_or_default().to_string(), json!(v));
    }
    write_output(out, &json_text(&Value::Object(result))?)
}

fn to_points(raw: &[Vec<f64>]) -> Vec<DVector<f64>> {
    raw.iter().map(|p| DVector::from_column_slice(p)).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_cluster(
    config: &Path,
    points: Option<&Path>,
    k: usize,
    variant: VariantArg,
    alpha: f64,
    seeding: SeedingArg,
    max_iters: usize,
    seed: u64,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<()> {
    let cfg: SpaceConfig = read_json(config)?;
    check_schema(cfg.schema)?;
    let base = base_dir(config);
    let raw = match points {
        Some(path) => {
            let file: PointsFile = read_json(path)?;
            check_schema(file.schema)?;
            file.points
        }
        None => cfg
            .points
            .clone()
            .ok_or_else(|| Error::Precondition("no points given".into()))?,
    };
    let pts = to_points(&raw);
    if k == 0 || k > pts.len() {
        return Err(Error::Precondition(format!("k = {k} must lie in 1..={}", pts.len())));
    }
    let fam = cfg.family.as_ref().map(|f| load_family(f, &base)).transpose()?;
    let space = DuallyFlatSpace::new(build_generator(&cfg.generator, fam.as_ref(), &base)?);
    let variant = match variant {
        VariantArg::Right => Variant::Right,
        VariantArg::Left => Variant::Left,
        VariantArg::Mixed => Variant::Mixed,
        VariantArg::Jeffreys => Variant::JeffreysSkew { alpha },
    };
    let mut cc = ClusterConfig::new(k, variant, seed).with_seeding(match seeding {
        SeedingArg::KmeansPlusPlus => Seeding::KmeansPlusPlus,
        SeedingArg::Forgy => Seeding::Forgy,
    });
    cc.max_iters = max_iters;
    let result = cluster(&space, &pts, &cc)?;
    write_output(out, &json_text(&result)?)?;
    if let Some(path) = csv {
        fs::write(path, result.to_csv(&pts))?;
    }
    Ok(())
}

/// A random interior point of the generator domain.
fn probe_point(gen: &dyn Generator, simplex: bool, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let d = gen.dim();
    let center = gen.interior_point();
    if simplex {
        // Uniform on the simplex via normalized exponentials, kept off the boundary.
        let e: Vec<f64> = (0..=d).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let total: f64 = e.iter().sum();
        return DVector::from_iterator(d, e[1..].iter().map(|v| 0.05 + 0.9 * v / total));
    }
    loop {
        let x = DVector::from_iterator(
            d,
            center.iter().map(|c| c + 0.25 * (2.0 * rng.random::<f64>() - 1.0)),
        );
        if gen.contains(&x) {
            return x;
        }
    }
}

#[derive(Debug, Serialize)]
struct ProbeReport {
    point: Vec<f64>,
    min_eigenvalue: f64,
    round_trip_error: f64,
    crouzeix_deviation: f64,
}

fn cmd_check(config: &Path, probes: usize, seed: u64, out: Option<&Path>) -> Result<bool> {
    let cfg: SpaceConfig = read_json(config)?;
    check_schema(cfg.schema)?;
    let base = base_dir(config);
    let fam = cfg.family.as_ref().map(|f| load_family(f, &base)).transpose()?;
    let space = DuallyFlatSpace::new(build_generator(&cfg.generator, fam.as_ref(), &base)?);
    let gen = space.generator();
    let simplex = matches!(
        cfg.generator,
        GeneratorSpec::McMixture { .. } | GeneratorSpec::QuadratureMixture
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::with_capacity(probes);
    let mut ok = true;
    for _ in 0..probes {
        let x = probe_point(gen.as_ref(), simplex, &mut rng);
        let h = gen.hessian(&x)?;
        let spd = check_spd(&h).is_ok();
        let min_eig = h.symmetric_eigenvalues().min();
        let eta = gen.gradient(&x)?;
        let back = space.invert_gradient(&eta, None)?.point;
        let rt = (&back - &x).amax() / (1.0 + x.amax());
        let cz = space.crouzeix_check(&x)?;
        ok &= spd && rt <= 1e-8 && cz <= 1e-8;
        reports.push(ProbeReport {
            point: x.as_slice().to_vec(),
            min_eigenvalue: min_eig,
            round_trip_error: rt,
            crouzeix_deviation: cz,
        });
    }
    let report = json!({
        "generator": gen.name(),
        "ok": ok,
        "probes": reports,
    });
    write_output(out, &json_text(&report)?)?;
    Ok(ok)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Sample { family, m, seed, out } => cmd_sample(family, *m, *seed, out).map(|_| 0),
        Command::Curve { config, out } => cmd_curve(config, out.as_deref()).map(|_| 0),
        Command::Divergence { config, out } => cmd_divergence(config, out.as_deref()).map(|_| 0),
        Command::Cluster {
            config,
            points,
            k,
            variant,
            alpha,
            seeding,
            max_iters,
            seed,
            out,
            csv,
        } => cmd_cluster(
            config,
            points.as_deref(),
            *k,
            *variant,
            *alpha,
            *seeding,
            *max_iters,
            *seed,
            out.as_deref(),
            csv.as_deref(),
        )
        .map(|_| 0),
        Command::Check {
            config,
            probes,
            seed,
            out,
        } => cmd_check(config, *probes, *seed, out.as_deref()).map(|ok| if ok { 0 } else { 4 }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mcig: error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `std::env::args` and runs; clap usage errors exit with code 2.
pub fn main_with_args() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
