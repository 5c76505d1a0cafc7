//! The theorem checklist over a parameter grid.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use anyhow::{anyhow, Result};
use nonarch::algebra::{
    convolution, convolution_via_addition, exterior_product_eval, fourier_intervals, lefschetz_ranks, poincare_pairing,
    calibration, positivity_margin, pushforward_eval, spherical_power, IntervalValuation, LinearMap, PairingVerdict,
    ProductEngine, PushforwardRoute,
};
use nonarch::field::q_pow;
use nonarch::grassmann::{enumerate, level_count, lift_subspace, sample_haar, LevelIndex};
use nonarch::interval::Interval;
use nonarch::linalg::{rat, rat_to_string};
use nonarch::ring::ChainRing;
use nonarch::transforms::{
    cosine_monte_carlo, fourier, fourier_matrix, measure_chain, radon_matrix, DepthPolicy,
    RadonDirection,
};
use nonarch::valuation::{spherical, LevelValuation};
use nonarch::{EquiScalar, FieldModel, LocalScalar, Matrix, MixedScalar, RatMatrix, Rational};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{Cache, Lookup};
use crate::config::Config;
use crate::report::{CheckOutcome, Report, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    Plancherel,
    RadonIso,
    KernelEquality,
    HardLefschetz,
    Poincare,
    Positivity,
    ProductLaws,
    FourierBoxtimes,
    PushforwardPaths,
    SubgroupDims,
}

impl CheckId {
    pub const ALL: [CheckId; 10] = [
        CheckId::Plancherel,
        CheckId::RadonIso,
        CheckId::KernelEquality,
        CheckId::HardLefschetz,
        CheckId::Poincare,
        CheckId::Positivity,
        CheckId::ProductLaws,
        CheckId::FourierBoxtimes,
        CheckId::PushforwardPaths,
        CheckId::SubgroupDims,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Plancherel => "plancherel",
            CheckId::RadonIso => "radon-iso",
            CheckId::KernelEquality => "kernel-equality",
            CheckId::HardLefschetz => "hard-lefschetz",
            CheckId::Poincare => "poincare",
            CheckId::Positivity => "positivity",
            CheckId::ProductLaws => "product-laws",
            CheckId::FourierBoxtimes => "fourier-boxtimes",
            CheckId::PushforwardPaths => "pushforward-paths",
            CheckId::SubgroupDims => "subgroup-dims",
        }
    }

    /// Checks whose cost is dominated by quadrature products.
    fn uses_products(self) -> bool {
        matches!(
            self,
            CheckId::Poincare | CheckId::Positivity | CheckId::ProductLaws | CheckId::FourierBoxtimes
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    /// `F_q((t))`.
    Equi,
    /// `Q_p`.
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Params {
    pub field: FieldKind,
    pub q: u64,
    pub n: usize,
    pub r: u32,
}

impl Params {
    pub fn new(q: u64, n: usize, r: u32) -> Self {
        Params { field: FieldKind::Equi, q, n, r }
    }

    pub fn model(&self) -> Result<FieldModel> {
        Ok(match self.field {
            FieldKind::Equi => FieldModel::equi(self.q)?,
            FieldKind::Mixed => FieldModel::mixed(self.q)?,
        })
    }

    pub fn ring(&self) -> Result<ChainRing> {
        Ok(ChainRing::new(self.model()?, self.r)?)
    }

    fn largest_grassmannian(&self) -> u128 {
        (0..=self.n).map(|k| level_count(self.n, k, self.q, self.r)).max().unwrap_or(1)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = match self.field {
            FieldKind::Equi => "equi",
            FieldKind::Mixed => "mixed",
        };
        write!(f, "({field} q={} n={} r={})", self.q, self.n, self.r)
    }
}

/// Which parameter tuples a check runs on.
#[derive(Clone, Debug, Default)]
pub struct Grid {
    pub fields: Vec<FieldKind>,
    pub q: Vec<u64>,
    pub n: Vec<usize>,
    pub r: Vec<u32>,
}

impl Grid {
    /// Tuples for `check`. Without an explicit `n` list the matrix-only
    /// checks that stay small at n = 4 also run there at level 1.
    pub fn tuples(&self, check: CheckId) -> Vec<Params> {
        let fields = if self.fields.is_empty() { vec![FieldKind::Equi] } else { self.fields.clone() };
        let qs = if self.q.is_empty() { vec![2, 3] } else { self.q.clone() };
        let ns = if self.n.is_empty() { vec![2, 3] } else { self.n.clone() };
        let rs = if self.r.is_empty() { vec![1, 2] } else { self.r.clone() };
        let mut out = Vec::new();
        for &field in &fields {
            for &q in &qs {
                for &n in &ns {
                    for &r in &rs {
                        out.push(Params { field, q, n, r });
                    }
                }
                if self.n.is_empty() && matches!(check, CheckId::RadonIso | CheckId::KernelEquality) && rs.contains(&1) {
                    out.push(Params { field, q, n: 4, r: 1 });
                }
            }
        }
        out
    }
}

/// Run options that do not change the mathematics.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub extra_depth: Option<u32>,
    pub tolerance_exp: Option<u32>,
    pub oracle: bool,
    pub timings: bool,
}

/// Engines and caches shared by all checks of a run.
pub struct Bench {
    pub config: Config,
    pub options: RunOptions,
    cache: Option<Cache>,
    engines: Mutex<HashMap<Params, Arc<ProductEngine>>>,
}

struct Partial {
    verdict: Verdict,
    evidence: BTreeMap<String, String>,
    widest: Option<Rational>,
    warnings: Vec<String>,
    cache_keys: Vec<String>,
}

impl Partial {
    fn new() -> Self {
        Partial { verdict: Verdict::PassExact, evidence: BTreeMap::new(), widest: None, warnings: Vec::new(), cache_keys: Vec::new() }
    }

    fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.evidence.insert(key.into(), value.to_string());
    }

    fn record(&mut self, v: Verdict) {
        self.verdict = self.verdict.max(v);
    }

    fn width(&mut self, w: Rational) {
        if w > Rational::zero() {
            self.record(Verdict::PassCertified);
        }
        if self.widest.as_ref().is_none_or(|x| w > *x) {
            self.widest = Some(w);
        }
    }
}

fn seed_for(base: u64, check: CheckId, p: &Params) -> u64 {
    let tag = CheckId::ALL.iter().position(|c| *c == check).unwrap_or(0) as u64;
    base ^ (tag << 48) ^ (p.q << 32) ^ ((p.n as u64) << 24) ^ ((p.r as u64) << 16) ^ (p.field as u64)
}

fn random_val(e: &ProductEngine, k: usize, rng: &mut ChaCha8Rng) -> Result<LevelValuation> {
    let len = e.index(e.n() - k)?.len();
    let fhat: Vec<Rational> = (0..len).map(|_| rat(rng.gen_range(-3..4), 1)).collect();
    Ok(e.from_section(k, &fhat)?)
}

fn cosine_key(p: &Params, i: usize) -> String {
    let field = match p.field {
        FieldKind::Equi => "equi",
        FieldKind::Mixed => "mixed",
    };
    format!("cosine-{field}{}-n{}-k{}to{}-r{}-exact", p.q, p.n, p.n - i, i, p.r)
}

impl Bench {
    pub fn new(config: Config, options: RunOptions, cache: Option<Cache>) -> Self {
        Bench { config, options, cache, engines: Mutex::default() }
    }

    pub fn cache(&self) -> Option<&Cache> {
        self.cache.as_ref()
    }

    fn policy(&self, q: u64) -> DepthPolicy {
        policy_for(
            q,
            self.options.extra_depth.unwrap_or(self.config.extra_depth),
            self.options.tolerance_exp.unwrap_or(self.config.tolerance_exp),
        )
    }

    /// Product engine for `p`, with cosine matrices read from or written to the cache.
    pub fn engine(&self, p: &Params, keys: &mut Vec<String>, warnings: &mut Vec<String>) -> Result<Arc<ProductEngine>> {
        if let Some(e) = self.engines.lock().expect("engines").get(p) {
            return Ok(e.clone());
        }
        let ring = p.ring()?;
        let engine = ProductEngine::new(ring, p.n, self.policy(p.q));
        for i in 0..=p.n {
            let key = cosine_key(p, i);
            if let Some(cache) = &self.cache {
                match cache.get_operator(&key) {
                    Lookup::Hit(op) if op.cache_key("exact") == key => {
                        if engine.insert_cosine(i, op).is_ok() {
                            keys.push(key);
                            continue;
                        }
                        warnings.push(format!("cache entry {key} does not fit; rebuilt"));
                    }
                    Lookup::Hit(_) => warnings.push(format!("cache entry {key} has a foreign key; rebuilt")),
                    Lookup::Rejected(why) => warnings.push(format!("cache entry {key}: {why}; rebuilt")),
                    Lookup::Miss => {}
                }
                let op = engine.cosine(i)?;
                if let Err(e) = cache.put_operator(&key, &op) {
                    warnings.push(format!("could not write {key}: {e}"));
                }
                keys.push(key);
            }
        }
        let engine = Arc::new(engine);
        self.engines.lock().expect("engines").insert(*p, engine.clone());
        Ok(engine)
    }

    fn cap_for(&self, check: CheckId) -> u128 {
        u128::from(if check.uses_products() { self.config.product_cap } else { self.config.matrix_cap })
    }

    pub fn run_one(&self, check: CheckId, p: Params) -> CheckOutcome {
        let start = Instant::now();
        let mut part = Partial::new();
        let size = p.largest_grassmannian();
        let cap = self.cap_for(check);
        if size > cap {
            part.verdict = Verdict::Skipped;
            part.note("skipped", format!("largest Grassmannian has {size} points, cap {cap}"));
        } else if let Err(e) = p.model() {
            part.verdict = Verdict::Skipped;
            part.note("skipped", e);
        } else if let Err(e) = self.dispatch(check, &p, &mut part) {
            part.record(Verdict::Fail);
            part.note("error", e);
        }
        let reproduce = (part.verdict == Verdict::Fail).then(|| {
            let mut extra = String::new();
            if p.field == FieldKind::Mixed {
                extra.push_str(" --field mixed");
            }
            if let Some(d) = self.options.extra_depth {
                extra.push_str(&format!(" --depth {d}"));
            }
            if let Some(t) = self.options.tolerance_exp {
                extra.push_str(&format!(" --tol {t}"));
            }
            format!(
                "nonarch verify {} --q {} --n {} --r {}{extra} --seed {}",
                check.as_str(),
                p.q,
                p.n,
                p.r,
                self.config.seed
            )
        });
        CheckOutcome {
            check,
            params: p,
            verdict: part.verdict,
            widest_interval: part.widest.as_ref().filter(|w| !w.is_zero()).map(rat_to_string),
            evidence: part.evidence,
            reproduce,
            warnings: part.warnings,
            cache_keys: part.cache_keys,
            seconds: self.options.timings.then(|| start.elapsed().as_secs_f64()),
        }
    }

    fn dispatch(&self, check: CheckId, p: &Params, part: &mut Partial) -> Result<()> {
        match check {
            CheckId::Plancherel => plancherel(p, part),
            CheckId::RadonIso => radon_iso(p, part),
            CheckId::KernelEquality => self.kernel_equality(p, part),
            CheckId::HardLefschetz => self.hard_lefschetz(p, part),
            CheckId::Poincare => self.poincare(p, part),
            CheckId::Positivity => self.positivity(p, part),
            CheckId::ProductLaws => self.product_laws(p, part),
            CheckId::FourierBoxtimes => self.fourier_boxtimes(p, part),
            CheckId::PushforwardPaths => self.pushforward_paths(p, part),
            CheckId::SubgroupDims => self.subgroup_dims(p, part),
        }
    }

    fn engine_for(&self, p: &Params, part: &mut Partial) -> Result<Arc<ProductEngine>> {
        self.engine(p, &mut part.cache_keys, &mut part.warnings)
    }

    fn kernel_equality(&self, p: &Params, part: &mut Partial) -> Result<()> {
        let e = self.engine_for(p, part)?;
        for i in (0..=p.n).filter(|i| 2 * i <= p.n) {
            let r = lefschetz_ranks(&e, i)?;
            part.note(
                format!("i={i}"),
                format!("rank D_i {}, rank D_(n-i)R {}, rank stacked {}", r.dim_source, r.rank_composite, r.rank_stacked),
            );
            if !r.kernels_equal() {
                part.record(Verdict::Fail);
            }
        }
        part.note("cosine_entries", "exact");
        if self.options.oracle {
            let samples = self.config.oracle_samples;
            for i in 0..=p.n {
                let mc = cosine_monte_carlo(e.ring(), p.n, i, samples, self.config.seed)?;
                let z = mc.max_z_score(&e.cosine(i)?.entries);
                part.note(format!("oracle_max_z_D{i}"), format!("{z:.3} ({samples} samples per row)"));
                if z > self.config.oracle_sigmas {
                    part.record(Verdict::Fail);
                }
            }
        }
        Ok(())
    }

    fn hard_lefschetz(&self, p: &Params, part: &mut Partial) -> Result<()> {
        let e = self.engine_for(p, part)?;
        let with_products = p.largest_grassmannian() <= u128::from(self.config.product_cap);
        for i in (0..=p.n).filter(|i| 2 * i < p.n) {
            let k = p.n - 2 * i;
            let r = lefschetz_ranks(&e, i)?;
            part.note(
                format!("i={i}"),
                format!(
                    "dim Val_i {}, dim Val_(n-i) {}, rank {}, kernel-compatible {}",
                    r.dim_source,
                    r.dim_target,
                    r.rank_composite,
                    r.rank_stacked == r.dim_source
                ),
            );
            if !r.bijective() {
                part.record(Verdict::Fail);
            }
            if with_products {
                let c = calibration(&e, i, k)?;
                part.note(format!("c_(n={},i={i},k={k})", p.n), &c.constant);
                part.width(c.constant.width());
                if !c.certified || !c.spherical || c.constant.lo <= Rational::zero() {
                    part.record(Verdict::Inconclusive);
                }
            } else {
                part.note(format!("c_(n={},i={i},k={k})", p.n), "not calibrated: above the product cap");
            }
        }
        Ok(())
    }

    fn poincare(&self, p: &Params, part: &mut Partial) -> Result<()> {
        let e = self.engine_for(p, part)?;
        for i in 1..p.n {
            let m = poincare_pairing(&e, i)?;
            let det = m.determinant.as_ref().map_or("n/a".to_string(), rat_to_string);
            part.note(format!("i={i}"), format!("{}x{} pairing, determinant {det}, {:?}", m.rows(), m.cols(), m.verdict));
            match m.verdict {
                PairingVerdict::Nonsingular => {}
                PairingVerdict::Singular => part.record(Verdict::Fail),
                PairingVerdict::Inconclusive => {
                    part.width(m.widest());
                    part.record(Verdict::Inconclusive);
                    part.note(format!("i={i} obstruction"), m.obstruction.unwrap_or_default());
                }
            }
        }
        Ok(())
    }

    fn positivity(&self, p: &Params, part: &mut Partial) -> Result<()> {
        let e = self.engine_for(p, part)?;
        for k in 1..=p.n {
            let pw = spherical_power(&e, k)?;
            let margin = positivity_margin(&pw.value);
            part.note(format!("min lower bound V_1^{k}"), rat_to_string(&margin));
            part.width(pw.value.widest());
            if pw.value.values.iter().any(|x| x.hi <= Rational::zero()) {
                part.record(Verdict::Fail);
            } else if margin <= Rational::zero() || !pw.certified {
                part.record(Verdict::Inconclusive);
            }
        }
        Ok(())
    }

    fn product_laws(&self, p: &Params, part: &mut Partial) -> Result<()> {
        let e = self.engine_for(p, part)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed_for(self.config.seed, CheckId::ProductLaws, p));
        let tol = q_pow(p.q, -6);
        let chi = IntervalValuation::exact(&spherical(&*e.index(0)?));
        let degrees: Vec<[usize; 3]> = degree_triples(p.n);
        let (mut unit_ok, mut comm_ok, mut assoc_ok) = (0, 0, 0);
        for t in 0..self.config.trials {
            let [i, j, k] = degrees[t % degrees.len()];
            let a = IntervalValuation::exact(&random_val(&e, i, &mut rng)?);
            let b = IntervalValuation::exact(&random_val(&e, j, &mut rng)?);
            let c = IntervalValuation::exact(&random_val(&e, k, &mut rng)?);
            if e.product(&chi, &a)?.value == a && e.product(&a, &chi)?.value == a {
                unit_ok += 1;
            } else {
                part.record(Verdict::Fail);
            }
            let ab = e.product(&a, &b)?;
            let ba = e.product(&b, &a)?;
            self.compare(part, &ab.value, &ba.value, ab.certified && ba.certified, &tol, &mut comm_ok);
            let left = e.product(&ab.value, &c)?;
            let bc = e.product(&b, &c)?;
            let right = e.product(&a, &bc.value)?;
            self.compare(part, &left.value, &right.value, left.certified && right.certified, &tol, &mut assoc_ok);
        }
        part.note("unit", format!("{unit_ok}/{}", self.config.trials));
        part.note("commutativity", format!("{comm_ok}/{}", self.config.trials));
        part.note("associativity", format!("{assoc_ok}/{}", self.config.trials));
        part.note("tolerance", rat_to_string(&tol));
        Ok(())
    }

    /// Dual-path comparison: enclosures must overlap and stay within `tol`.
    fn compare(&self, part: &mut Partial, x: &IntervalValuation, y: &IntervalValuation, certified: bool, tol: &Rational, ok: &mut usize) {
        let w = x.widest().max(y.widest());
        part.width(w.clone());
        if !x.overlaps(y) {
            part.record(Verdict::Fail);
        } else if !certified || w > *tol {
            part.record(Verdict::Inconclusive);
        } else {
            *ok += 1;
        }
    }

    fn fourier_boxtimes(&self, p: &Params, part: &mut Partial) -> Result<()> {
        let e = self.engine_for(p, part)?;
        let ring = *e.ring();
        let mut rng = ChaCha8Rng::seed_from_u64(seed_for(self.config.seed, CheckId::FourierBoxtimes, p));
        let tol = q_pow(p.q, -6);
        let pairs: Vec<(usize, usize)> =
            (0..=p.n).flat_map(|i| (0..=p.n).map(move |j| (i, j))).filter(|(i, j)| i + j <= p.n && i * j > 0).collect();
        let pairs = if pairs.is_empty() { vec![(0, p.n)] } else { pairs };
        let (mut intertwined, mut boxtimes, mut addition) = (0, 0, 0);
        let trials = self.config.trials;
        for t in 0..trials {
            let (i, j) = pairs[t % pairs.len()];
            let a = IntervalValuation::exact(&random_val(&e, i, &mut rng)?);
            let b = IntervalValuation::exact(&random_val(&e, j, &mut rng)?);
            // F(φ·ψ) against Fφ ∗ Fψ.
            let prod = e.product(&a, &b)?;
            let lhs = fourier_intervals(&ring, &prod.value)?;
            let rhs = convolution(&e, &fourier_intervals(&ring, &a)?, &fourier_intervals(&ring, &b)?)?;
            self.compare(part, &lhs, &rhs.value, prod.certified && rhs.certified, &tol, &mut intertwined);
            // F(φ⊠ψ) = Fφ ⊠ Fψ at a random point of Gr(V × V).
            let (ex, ey) = (a.to_exact().expect("exact"), b.to_exact().expect("exact"));
            let (fa, fb) = (fourier(&ring, &ex)?, fourier(&ring, &ey)?);
            let ok = match ring.model() {
                FieldModel::EquiChar { .. } => boxtimes_point::<EquiScalar>(&e, &ex, &ey, &fa, &fb, &mut rng)?,
                FieldModel::MixedChar { .. } => boxtimes_point::<MixedScalar>(&e, &ex, &ey, &fa, &fb, &mut rng)?,
            };
            self.compare_points(part, &ok.0, &ok.1, ok.2, &tol, &mut boxtimes);
            // Convolution as a push-forward along addition, at one point.
            let (fa, fb) = (IntervalValuation::exact(&fa), IntervalValuation::exact(&fb));
            let conv = convolution(&e, &fa, &fb)?;
            if conv.value.values.is_empty() {
                addition += 1;
                continue;
            }
            let idx = e.index(conv.value.meta.k)?;
            let w = rng.gen_range(0..idx.len());
            let direct = match ring.model() {
                FieldModel::EquiChar { .. } => {
                    convolution_via_addition(&e, &fa, &fb, &lift_subspace::<EquiScalar>(&ring, &idx.points()[w]))?
                }
                FieldModel::MixedChar { .. } => {
                    convolution_via_addition(&e, &fa, &fb, &lift_subspace::<MixedScalar>(&ring, &idx.points()[w]))?
                }
            };
            self.compare_points(part, &direct.value, &conv.value.values[w], direct.certified && conv.certified, &tol, &mut addition);
        }
        part.note("fourier_of_product_vs_convolution", format!("{intertwined}/{trials}"));
        part.note("fourier_of_exterior_product", format!("{boxtimes}/{trials}"));
        part.note("convolution_vs_addition_pushforward", format!("{addition}/{trials}"));
        Ok(())
    }

    fn compare_points(&self, part: &mut Partial, x: &Interval, y: &Interval, certified: bool, tol: &Rational, ok: &mut usize) {
        let w = x.width().max(y.width());
        part.width(w.clone());
        if !x.overlaps(y) {
            part.record(Verdict::Fail);
        } else if !certified || w > *tol {
            part.record(Verdict::Inconclusive);
        } else {
            *ok += 1;
        }
    }

    fn pushforward_paths(&self, p: &Params, part: &mut Partial) -> Result<()> {
        let ring = p.ring()?;
        let seed = seed_for(self.config.seed, CheckId::PushforwardPaths, p);
        let (checked, mismatches) = match ring.model() {
            FieldModel::EquiChar { .. } => pushforward_dual_paths::<EquiScalar>(&ring, p.n, seed)?,
            FieldModel::MixedChar { .. } => pushforward_dual_paths::<MixedScalar>(&ring, p.n, seed)?,
        };
        part.note("comparisons", checked);
        part.note("mismatches", mismatches);
        if mismatches > 0 || checked == 0 {
            part.record(Verdict::Fail);
        }
        Ok(())
    }

    fn subgroup_dims(&self, p: &Params, part: &mut Partial) -> Result<()> {
        let e = self.engine_for(p, part)?;
        let mut dims = Vec::new();
        for k in 0..=p.n {
            let d = e.cosine(k)?.entries.rank();
            let size = e.index(k)?.len();
            part.note(format!("dim Val_{k}"), format!("{d} of {size}"));
            if d == 0 || d > size {
                part.record(Verdict::Fail);
            }
            dims.push(d);
        }
        if dims.iter().zip(dims.iter().rev()).any(|(a, b)| a != b) {
            part.record(Verdict::Fail);
            part.note("symmetry", "dim Val_k differs from dim Val_(n-k)");
        }
        Ok(())
    }

    /// Runs `checks` over `grid` in a worker pool; order follows the input.
    pub fn run(&self, checks: &[CheckId], grid: &Grid) -> Report {
        let tasks: Vec<(CheckId, Params)> =
            checks.iter().flat_map(|&c| grid.tuples(c).into_iter().map(move |p| (c, p))).collect();
        let outcomes = tasks.par_iter().map(|&(c, p)| self.run_one(c, p)).collect();
        Report::new(self.config.clone(), outcomes)
    }
}

/// Degree triples with sum at most `n` and at least two non-zero degrees,
/// all three non-zero when possible.
fn degree_triples(n: usize) -> Vec<[usize; 3]> {
    let all: Vec<[usize; 3]> = (0..=n)
        .flat_map(|i| (0..=n).flat_map(move |j| (0..=n).map(move |k| [i, j, k])))
        .filter(|t| t.iter().sum::<usize>() <= n && t.iter().filter(|&&d| d > 0).count() >= 2)
        .collect();
    let full: Vec<[usize; 3]> = all.iter().copied().filter(|t| t.iter().all(|&d| d > 0)).collect();
    if full.is_empty() {
        all
    } else {
        full
    }
}

fn plancherel(p: &Params, part: &mut Partial) -> Result<()> {
    let ring = p.ring()?;
    let mut all_one = true;
    for k in 0..=p.n {
        let f = fourier_matrix(&ring, p.n, k, false)?;
        let g = fourier_matrix(&ring, p.n, p.n - k, true)?;
        let ok = g.entries.mul(&f.entries) == RatMatrix::identity(f.cols());
        all_one &= f.evidence.get("chain_scalars_all_one").is_some_and(|s| s == "true");
        part.note(format!("k={k}"), if ok { "identity" } else { "not the identity" });
        if !ok {
            part.record(Verdict::Fail);
        }
    }
    part.note("chain_scalars_all_one", all_one);
    Ok(())
}

fn radon_iso(p: &Params, part: &mut Partial) -> Result<()> {
    let ring = p.ring()?;
    for pp in (0..p.n).filter(|pp| 2 * pp < p.n) {
        let m = radon_matrix(&ring, p.n, pp, p.n - pp, RadonDirection::Superset)?;
        let rank = m.entries.rank();
        part.note(format!("R_({pp},{})", p.n - pp), format!("rank {rank} of |Gr_{pp}| = {}", m.rows()));
        if rank != m.rows() {
            part.record(Verdict::Fail);
        }
    }
    Ok(())
}

/// `chain(E) (φ⊠ψ)(E)` and `(Fφ⊠Fψ)(E^⊥)` at a random `E` of degree `i + j`.
fn boxtimes_point<S: LocalScalar>(
    e: &ProductEngine,
    a: &LevelValuation,
    b: &LevelValuation,
    fa: &LevelValuation,
    fb: &LevelValuation,
    rng: &mut ChaCha8Rng,
) -> Result<(Interval, Interval, bool)> {
    let n = e.n();
    let deep = e.ring().at_depth(e.ring().depth() + 3)?;
    let u = lift_subspace::<S>(&deep, &sample_haar(&deep, 2 * n, 2 * n - a.meta.k - b.meta.k, rng));
    let x = u.annihilator();
    let chain = measure_chain(&x)?.value(e.ring().q());
    let lhs = exterior_product_eval(e, &IntervalValuation::exact(a), e, &IntervalValuation::exact(b), &x)?;
    let rhs = exterior_product_eval(e, &IntervalValuation::exact(fa), e, &IntervalValuation::exact(fb), &u)?;
    Ok((lhs.value.scale(&chain), rhs.value, lhs.certified && rhs.certified))
}

fn indicator(index: &LevelIndex, at: usize) -> LevelValuation {
    let mut v = LevelValuation::zero(index);
    v.coeffs[at] = Rational::one();
    v
}

/// Definitional push-forward against the injective and surjective closed
/// forms on every indicator input, for random maps between spaces of
/// dimension at most `max_dim`. Returns comparisons and mismatches.
pub fn pushforward_dual_paths<S: LocalScalar>(ring: &ChainRing, max_dim: usize, seed: u64) -> Result<(usize, usize)> {
    let deep = ring.at_depth(ring.depth() + 2)?;
    let model = ring.model();
    let q = ring.q() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut bad) = (0, 0);
    for m in 1..=max_dim {
        for n in 1..=max_dim {
            for _ in 0..3 {
                let f = LinearMap::new(
                    model,
                    Matrix::from_fn(n, m, |_, _| {
                        let digits: Vec<u32> = (0..deep.depth()).map(|_| rng.gen_range(0..q)).collect();
                        S::from_digits(model, &digits)
                    }),
                );
                let rank = f.rank();
                if rank != m && rank != n {
                    continue;
                }
                for k in (0..=m).filter(|k| k + n >= m) {
                    let src = enumerate(ring, m, k, None)?;
                    let tgt = enumerate(ring, n, k + n - m, None)?;
                    for at in 0..src.len() {
                        let xi = indicator(&src, at);
                        for pt in tgt.points() {
                            let e = lift_subspace::<S>(ring, pt);
                            let d = pushforward_eval(&f, &xi, &src, &e, PushforwardRoute::Definitional)?;
                            for (applies, route) in [(rank == m, PushforwardRoute::Injective), (rank == n, PushforwardRoute::Surjective)] {
                                if applies {
                                    checked += 1;
                                    bad += usize::from(pushforward_eval(&f, &xi, &src, &e, route)? != d);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((checked, bad))
}

/// Depth cap `r + d`, tolerance `q^-t`.
pub fn policy_for(q: u64, d: u32, t: u32) -> DepthPolicy {
    DepthPolicy::standard(q).with_extra_depth(d).with_tolerance(q_pow(q, -i64::from(t)))
}


/// Cosine matrix for `p`, through the cache when one is configured.
pub fn cosine_operator(bench: &Bench, p: &Params, i: usize) -> Result<nonarch::transforms::OperatorMatrix> {
    if i > p.n {
        return Err(anyhow!("i = {i} exceeds n = {}", p.n));
    }
    let mut keys = Vec::new();
    let mut warnings = Vec::new();
    let e = bench.engine(p, &mut keys, &mut warnings)?;
    Ok((*e.cosine(i)?).clone())
}
