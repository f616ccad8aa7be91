//! The `lopos` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the report
//! carries a witness), 2 for invalid input, 3 when sheafification does not
//! converge.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coverage::{check_flavor, check_prelopology, product_coverage, Coverage, CoverageSpec, Flavor};
use crate::moncat::{
    tensor_regularity, verify_appendix_suite, AppendixReport, Defect, FinSetCat, MonoidalCategory, ProductCat,
    Regularity, ThinCat,
};
use crate::presheaf::{isomorphic, Presheaf, PresheafMorphism, PresheafSpec};
use crate::quantale::{build_standard, Quantale, QuantaleSpec, RawQuantale, StandardQuantale};
use crate::reflect::{
    certify_reflection, lopos_check, pseudo_pullback_preserved, sheaf_battery, sheafify, star, subsheaf_lattice,
    ReflectError, DEFAULT_MAX_ITER,
};
use crate::sheaf::{check_sheaf_equalizer, check_sheaf_orthogonal, plus_construction, SheafReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "lopos",
    version,
    about = "Finite-model checks for quantales, prelopologies and sheaves"
)]
pub struct Cli {
    /// Write the machine-readable report here.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Worker threads for parallel checks.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Enumeration order for randomized property runs; verdicts never depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Free text recorded in the report, e.g. how an infinite quantale was truncated.
    #[arg(long, global = true, value_name = "TEXT")]
    pub truncation_note: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Equalizer,
    Orthogonal,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the quantale laws and classify.
    CheckQuantale { file: PathBuf },
    /// Check a coverage against a prelopology flavor or the pretopology axioms.
    CheckPrelopology {
        site: PathBuf,
        coverage: PathBuf,
        /// pretopology, weak, prelopology or strong; defaults to the coverage's own.
        #[arg(long)]
        flavor: Option<String>,
    },
    /// Run the sheaf condition in equalizer form, orthogonality form, or both.
    CheckSheaf {
        site: PathBuf,
        coverage: PathBuf,
        presheaf: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
    },
    /// Sheafify a presheaf and certify the result.
    Sheafify {
        site: PathBuf,
        coverage: PathBuf,
        presheaf: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Certify against every sheaf with values of at most this size; 0 skips.
        #[arg(long, default_value_t = 2)]
        certify_battery: usize,
        /// Where to write the sheaf as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Subsheaf lattice and `*` table of a sheaf (the terminal sheaf by default).
    Sub {
        site: PathBuf,
        coverage: PathBuf,
        #[arg(long)]
        presheaf: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Exhaustive coherence diagrams on a monoidal instance.
    VerifyAppendix {
        /// finset, quantale:NAME, or product.
        #[arg(long, default_value = "finset")]
        instance: String,
        #[arg(long, default_value_t = 3)]
        size_bound: usize,
        /// Inject a breakage into the finite-set instance.
        #[arg(long)]
        defect: Option<String>,
    },
    /// Down-set criterion for a poset with a multiplication.
    LoposCheck { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckVerdict {
    pub check: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

/// Machine-readable record of one run. Contains no timing, so identical
/// inputs and options give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub configuration: BTreeMap<String, Value>,
    pub verdicts: Vec<CheckVerdict>,
    /// Quantities recorded without a verdict.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub measurements: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub exit_code: i32,
}

/// What a run printed and returned.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub report: Option<RunReport>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Json {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::NotConverged(_) => 3,
            _ => 2,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Default)]
struct Ctx {
    inputs: Vec<InputDigest>,
    configuration: BTreeMap<String, Value>,
    verdicts: Vec<CheckVerdict>,
    measurements: BTreeMap<String, Value>,
    notes: Vec<String>,
    text: String,
}

impl Ctx {
    fn load<T: DeserializeOwned>(&mut self, role: &str, path: &Path) -> Result<T, CliError> {
        let shown = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|source| CliError::Io {
            path: shown.clone(),
            source,
        })?;
        self.inputs.push(InputDigest {
            role: role.to_string(),
            path: shown.clone(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        serde_json::from_slice(&bytes).map_err(|e| CliError::Json {
            path: shown,
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    fn config(&mut self, key: &str, value: impl Serialize) {
        self.configuration.insert(
            key.to_string(),
            serde_json::to_value(value).expect("plain data serializes"),
        );
    }

    fn verdict(&mut self, check: impl Into<String>, pass: bool, witness: Option<Value>) {
        let check = check.into();
        let _ = writeln!(self.text, "{} {check}", if pass { "PASS" } else { "FAIL" });
        self.verdicts.push(CheckVerdict { check, pass, witness });
    }

    fn line(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.text, "{}", s.as_ref());
    }

    fn all_pass(&self) -> i32 {
        if self.verdicts.iter().all(|v| v.pass) {
            0
        } else {
            1
        }
    }
}

/// A site file: an explicit quantale, a bundled one, or a product of two sites.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteSpec {
    Product { product: Vec<SiteSpec> },
    Standard { standard: String, param: usize },
    Explicit(QuantaleSpec),
}

/// A coverage file: one coverage, or one per factor of a product site.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoverageFile {
    Product { product: Vec<CoverageSpec> },
    Single(CoverageSpec),
}

/// Resolves `luk3`, `lukasiewicz_chain(3)` or `lukasiewicz_chain:3`.
pub fn parse_standard(s: &str) -> Option<(StandardQuantale, usize)> {
    let short = [
        ("luk", StandardQuantale::LukasiewiczChain),
        ("tnat", StandardQuantale::TruncatedNat),
        ("powerset", StandardQuantale::PowersetLocale),
        ("chain", StandardQuantale::ChainLocale),
        ("zmod", StandardQuantale::IdealsZmod),
    ];
    let s = s.trim();
    if let Some((name, rest)) = s.split_once(['(', ':']) {
        let param = rest.trim_end_matches(')').parse().ok()?;
        return Some((StandardQuantale::parse(name)?, param));
    }
    short
        .iter()
        .find_map(|&(prefix, q)| s.strip_prefix(prefix)?.parse().ok().map(|p| (q, p)))
}

/// A site with its two factors when it is a product.
pub struct LoadedSite {
    pub site: Arc<ThinCat>,
    pub factors: Option<(Arc<ThinCat>, Arc<ThinCat>)>,
}

pub fn build_site(spec: &SiteSpec) -> Result<LoadedSite, CliError> {
    let thin = |q: Quantale| ThinCat::new(Arc::new(q)).map(Arc::new).map_err(input);
    match spec {
        SiteSpec::Standard { standard, param } => {
            let name =
                StandardQuantale::parse(standard).ok_or_else(|| input(format!("unknown quantale {standard}")))?;
            Ok(LoadedSite {
                site: thin(build_standard(name, *param).map_err(input)?)?,
                factors: None,
            })
        }
        SiteSpec::Explicit(q) => Ok(LoadedSite {
            site: thin(Quantale::from_spec(q).map_err(input)?)?,
            factors: None,
        }),
        SiteSpec::Product { product } => {
            let [a, b] = product.as_slice() else {
                return Err(input("a product site has exactly two factors"));
            };
            let (a, b) = (build_site(a)?.site, build_site(b)?.site);
            Ok(LoadedSite {
                site: thin(a.quantale().product(b.quantale()))?,
                factors: Some((a, b)),
            })
        }
    }
}

pub fn build_coverage(site: &LoadedSite, spec: &CoverageFile) -> Result<Coverage<ThinCat>, CliError> {
    match spec {
        CoverageFile::Single(c) => Coverage::from_spec(Arc::clone(&site.site), c).map_err(input),
        CoverageFile::Product { product } => {
            let ([a, b], Some((sa, sb))) = (product.as_slice(), &site.factors) else {
                return Err(input(
                    "a product coverage needs a product site and two factor coverages",
                ));
            };
            let ca = Coverage::from_spec(Arc::clone(sa), a).map_err(input)?;
            let cb = Coverage::from_spec(Arc::clone(sb), b).map_err(input)?;
            product_coverage(&ca, &cb).map_err(input)
        }
    }
}

fn load_site_and_coverage(ctx: &mut Ctx, site: &Path, coverage: &Path) -> Result<Coverage<ThinCat>, CliError> {
    let s: SiteSpec = ctx.load("site", site)?;
    let c: CoverageFile = ctx.load("coverage", coverage)?;
    let loaded = build_site(&s)?;
    let cov = build_coverage(&loaded, &c)?;
    ctx.config("site", cov.site().quantale().name());
    ctx.config("coverage", cov.name());
    Ok(cov)
}

fn load_presheaf(ctx: &mut Ctx, cov: &Coverage<ThinCat>, path: &Path) -> Result<Presheaf, CliError> {
    let spec: PresheafSpec = ctx.load("presheaf", path)?;
    Presheaf::from_spec(Arc::clone(cov.site()), &spec).map_err(input)
}

fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn cmd_check_quantale(ctx: &mut Ctx, file: &Path) -> Result<i32, CliError> {
    let spec: QuantaleSpec = ctx.load("quantale", file)?;
    let raw = RawQuantale::from_spec(&spec).map_err(input)?;
    match raw.validate() {
        Ok(q) => {
            let flags = q.classify();
            ctx.line(format!("{} ({} elements)", q.name(), q.len()));
            ctx.verdict("quantale laws", true, Some(to_value(flags)));
        }
        Err(report) => {
            ctx.line(report.to_string());
            ctx.verdict("quantale laws", false, Some(to_value(&report)));
        }
    }
    Ok(ctx.all_pass())
}

fn cmd_check_prelopology(ctx: &mut Ctx, site: &Path, coverage: &Path, flavor: Option<&str>) -> Result<i32, CliError> {
    let cov = load_site_and_coverage(ctx, site, coverage)?;
    let flavor = match flavor {
        Some(f) => Flavor::parse(f).ok_or_else(|| input(format!("unknown flavor {f}")))?,
        None => cov.flavor(),
    };
    ctx.config("flavor", flavor.as_str());
    let report = match check_flavor(&cov, flavor) {
        Ok(r) => r,
        Err(crate::coverage::CoverageError::NotCartesianSite(name)) => {
            ctx.line(format!("{name} is not cartesian, so pullbacks are unavailable"));
            ctx.verdict(
                format!("{flavor} axioms"),
                false,
                Some(json!({ "reason": format!("{name} is not cartesian") })),
            );
            return Ok(1);
        }
        Err(e) => return Err(input(e)),
    };
    ctx.line(report.summary());
    for t in &report.tallies {
        ctx.line(format!(
            "  {}: {} instances, {} failures",
            t.axiom, t.instances, t.failures
        ));
    }
    let witness = (!report.passed).then(|| to_value(&report.violations));
    ctx.verdict(format!("{flavor} axioms"), report.passed, witness);
    Ok(ctx.all_pass())
}

fn sheaf_verdict(ctx: &mut Ctx, report: &SheafReport) {
    let name = format!(
        "sheaf condition ({})",
        if report.method == crate::sheaf::SheafMethod::Equalizer {
            "equalizer"
        } else {
            "orthogonal"
        }
    );
    ctx.line(format!(
        "{name}: {} on {} covers, {} failing",
        report.verdict.as_str(),
        report.covers_checked,
        report.failing_covers
    ));
    let witness = (!report.is_sheaf()).then(|| to_value(&report.witnesses));
    ctx.verdict(name, report.is_sheaf(), witness);
}

fn cmd_check_sheaf(
    ctx: &mut Ctx,
    site: &Path,
    coverage: &Path,
    presheaf: &Path,
    method: Method,
) -> Result<i32, CliError> {
    let cov = load_site_and_coverage(ctx, site, coverage)?;
    let f = load_presheaf(ctx, &cov, presheaf)?;
    ctx.config("method", format!("{method:?}").to_lowercase());
    let eq = matches!(method, Method::Equalizer | Method::Both)
        .then(|| check_sheaf_equalizer(&f, &cov))
        .transpose()
        .map_err(input)?;
    let or = matches!(method, Method::Orthogonal | Method::Both)
        .then(|| check_sheaf_orthogonal(&f, &cov))
        .transpose()
        .map_err(input)?;
    for r in eq.iter().chain(or.iter()) {
        sheaf_verdict(ctx, r);
    }
    if let (Some(a), Some(b)) = (&eq, &or) {
        let agree = a.verdict == b.verdict;
        if !agree {
            ctx.notes.push("BUG: the two sheaf checks disagree".to_string());
        }
        ctx.verdict(
            "equalizer and orthogonal verdicts agree",
            agree,
            (!agree).then(|| json!({ "equalizer": a.verdict, "orthogonal": b.verdict })),
        );
    }
    Ok(ctx.all_pass())
}

fn cmd_sheafify(
    ctx: &mut Ctx,
    site: &Path,
    coverage: &Path,
    presheaf: &Path,
    max_iter: usize,
    battery: usize,
    output: Option<&Path>,
) -> Result<i32, CliError> {
    let cov = load_site_and_coverage(ctx, site, coverage)?;
    let p = load_presheaf(ctx, &cov, presheaf)?;
    ctx.config("max_iter", max_iter);
    ctx.config("certify_battery", battery);
    let pre = check_prelopology(&cov).map_err(input)?;
    if !pre.passed {
        ctx.verdict("coverage is a prelopology", false, Some(to_value(&pre.violations)));
        return Ok(1);
    }
    let r = sheafify(&p, &cov, max_iter).map_err(input)?;
    ctx.line(format!("{} forcing rounds", r.iterations));
    ctx.verdict(
        "converged",
        r.converged,
        Some(json!({ "iterations": r.iterations, "rounds": r.rounds })),
    );
    if let Some(path) = output {
        let text = serde_json::to_string_pretty(&r.sheaf.to_spec()).expect("specs serialize");
        std::fs::write(path, text + "\n").map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    if !r.converged {
        return Err(CliError::NotConverged(format!(
            "not converged within {max_iter} rounds"
        )));
    }
    sheaf_verdict(ctx, &check_sheaf_equalizer(&r.sheaf, &cov).map_err(input)?);
    sheaf_verdict(ctx, &check_sheaf_orthogonal(&r.sheaf, &cov).map_err(input)?);
    if battery > 0 {
        let sheaves = sheaf_battery(&cov, battery).map_err(input)?;
        let cert = certify_reflection(&r, &sheaves, &cov).map_err(input)?;
        ctx.notes.push(cert.note.clone());
        let witness = (!cert.passed).then(|| to_value(cert.checks.iter().filter(|c| !c.bijective).collect::<Vec<_>>()));
        ctx.verdict(
            format!("universal against {} sheaves", cert.battery_size),
            cert.passed,
            witness,
        );
    }
    if cov.site().quantale().classify().locale {
        let (p1, _) = plus_construction(&p, &cov).map_err(input)?;
        let (p2, _) = plus_construction(&p1, &cov).map_err(input)?;
        ctx.verdict(
            "matches the plus construction applied twice",
            isomorphic(&r.sheaf, &p2),
            None,
        );
    }
    // whether a(P ★ P) is the pseudo-pullback of aP → 1 ← aP among sheaves; recorded, never judged
    let bang = PresheafMorphism::to_terminal(Arc::new(p.clone()));
    match pseudo_pullback_preserved(&bang, &bang, &cov, max_iter) {
        Ok(m) => {
            ctx.line(format!("pseudo-pullback over 1 preserved: {}", m.isomorphic));
            ctx.measurements
                .insert("pseudo_pullback_over_terminal".into(), to_value(&m));
        }
        Err(e) => ctx.notes.push(format!("pseudo-pullback not measured: {e}")),
    }
    ctx.line(r.sheaf.to_string());
    Ok(ctx.all_pass())
}

fn cmd_sub(
    ctx: &mut Ctx,
    site: &Path,
    coverage: &Path,
    presheaf: Option<&Path>,
    max_iter: usize,
) -> Result<i32, CliError> {
    let cov = load_site_and_coverage(ctx, site, coverage)?;
    let terminal = presheaf.is_none();
    let f = Arc::new(match presheaf {
        Some(path) => load_presheaf(ctx, &cov, path)?,
        None => Presheaf::terminal(Arc::clone(cov.site())),
    });
    let lat = match subsheaf_lattice(&f, &cov) {
        Ok(l) => l,
        Err(ReflectError::NotASheaf(what)) => {
            ctx.verdict(
                "input is a sheaf",
                false,
                Some(json!({ "reason": format!("{what} is not a sheaf") })),
            );
            return Ok(1);
        }
        Err(e) => return Err(input(e)),
    };
    let n = lat.len();
    let mut table = vec![vec![0usize; n]; n];
    for (i, row) in table.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let s = star(&f, lat.member(i), lat.member(j), &cov, max_iter).map_err(|e| match e {
                ReflectError::NotConverged(k) => CliError::NotConverged(format!("not converged within {k} rounds")),
                e => input(e),
            })?;
            *slot = lat.index_of(&s).ok_or_else(|| input("star left the lattice"))?;
        }
    }
    let describe = |i: usize| -> Vec<Vec<String>> {
        lat.member(i)
            .iter()
            .enumerate()
            .map(|(u, xs)| xs.iter().map(|&x| f.at(u).label(x).to_string()).collect())
            .collect()
    };
    ctx.line(format!("{n} subsheaves"));
    for (i, row) in table.iter().enumerate() {
        ctx.line(format!("  {i}: {:?}  * -> {row:?}", describe(i)));
    }
    let assoc = (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| table[table[a][b]][c] == table[a][table[b][c]])));
    ctx.verdict("star is associative", assoc, None);
    let top = lat.top();
    let unital = (0..n).all(|a| table[top][a] == a && table[a][top] == a);
    ctx.verdict("the whole sheaf is a unit for star", unital, None);
    if terminal {
        let q = cov.site().quantale();
        let to_q: Vec<usize> = (0..n)
            .map(|i| q.join_all((0..q.len()).filter(|&u| !lat.member(i)[u].is_empty())))
            .collect();
        let bijective = n == q.len() && {
            let mut seen = to_q.clone();
            seen.sort_unstable();
            seen.dedup();
            seen.len() == n
        };
        let order = bijective && (0..n).all(|i| (0..n).all(|j| lat.leq(i, j) == q.leq(to_q[i], to_q[j])));
        let mul = order && (0..n).all(|i| (0..n).all(|j| to_q[table[i][j]] == q.mul(to_q[i], to_q[j])));
        ctx.verdict("subterminals are order-isomorphic to the quantale", order, None);
        ctx.verdict("star matches the multiplication", mul, None);
    }
    ctx.config("lattice_size", n);
    ctx.config("star_table", &table);
    Ok(ctx.all_pass())
}

fn run_appendix(ctx: &mut Ctx, report: AppendixReport) -> i32 {
    for c in &report.checks {
        let witness = (!c.passed()).then(|| to_value(&c.witnesses));
        let label = match &c.skipped {
            Some(why) => format!("{} ({} instances; {why})", c.name, c.checked),
            None => format!("{} ({} instances)", c.name, c.checked),
        };
        ctx.verdict(label, c.passed(), witness);
    }
    ctx.all_pass()
}

fn cmd_verify_appendix(ctx: &mut Ctx, instance: &str, bound: usize, defect: Option<&str>) -> Result<i32, CliError> {
    ctx.config("instance", instance);
    ctx.config("size_bound", bound);
    let defect = defect
        .map(|d| Defect::parse(d).ok_or_else(|| input(format!("unknown defect {d}"))))
        .transpose()?;
    if let Some(d) = defect {
        ctx.config("defect", d.as_str());
    }
    let finset = || match defect {
        Some(d) => FinSetCat::with_defect(bound, d),
        None => FinSetCat::new(bound),
    };
    let thin = |name: &str| -> Result<ThinCat, CliError> {
        let (q, p) = parse_standard(name).ok_or_else(|| input(format!("unknown quantale {name}")))?;
        ThinCat::new(Arc::new(build_standard(q, p).map_err(input)?)).map_err(input)
    };
    fn both<C: MonoidalCategory>(c: &C) -> Result<(AppendixReport, Regularity), CliError> {
        Ok((verify_appendix_suite(c), tensor_regularity(c).map_err(input)?))
    }
    let (report, regular) = match instance {
        "finset" => both(&finset())?,
        "product" => both(&ProductCat::new(finset(), thin("luk3")?))?,
        other => match other.strip_prefix("quantale:") {
            Some(name) => both(&thin(name)?)?,
            None => return Err(input(format!("unknown instance {other}"))),
        },
    };
    // recorded only: no bundled instance is expected to fail it
    ctx.line(format!("U ⊗ - preserves equalizers: {}", regular.holds));
    ctx.measurements
        .insert("tensor_preserves_equalizers".into(), to_value(&regular));
    Ok(run_appendix(ctx, report))
}

fn cmd_lopos_check(ctx: &mut Ctx, file: &Path) -> Result<i32, CliError> {
    let spec: QuantaleSpec = ctx.load("poset", file)?;
    let raw = RawQuantale::from_spec(&spec).map_err(input)?;
    match lopos_check(&raw) {
        Ok(r) => {
            ctx.line(format!("{} down-sets, {} pairs", r.down_sets, r.pairs_checked));
            if let Some(w) = &r.witness {
                ctx.line(format!(
                    "witness {} and {}: sup of the product is {}, product of the sups is {}",
                    w.left, w.right, w.sup_of_product, w.product_of_sups
                ));
            }
            ctx.verdict(
                "suprema preserve the lifted product",
                r.holds,
                r.witness.as_ref().map(to_value),
            );
            ctx.verdict("agrees with the quantale law check", r.agrees, None);
        }
        Err(e @ (ReflectError::MulNotAssociative { .. } | ReflectError::NotComplete(_))) => {
            ctx.line(e.to_string());
            ctx.verdict("preconditions", false, Some(json!({ "reason": e.to_string() })));
        }
        Err(e) => return Err(input(e)),
    }
    Ok(ctx.all_pass())
}

fn dispatch(ctx: &mut Ctx, cmd: &Command) -> Result<i32, CliError> {
    match cmd {
        Command::CheckQuantale { file } => cmd_check_quantale(ctx, file),
        Command::CheckPrelopology { site, coverage, flavor } => {
            cmd_check_prelopology(ctx, site, coverage, flavor.as_deref())
        }
        Command::CheckSheaf {
            site,
            coverage,
            presheaf,
            method,
        } => cmd_check_sheaf(ctx, site, coverage, presheaf, *method),
        Command::Sheafify {
            site,
            coverage,
            presheaf,
            max_iter,
            certify_battery,
            output,
        } => cmd_sheafify(
            ctx,
            site,
            coverage,
            presheaf,
            *max_iter,
            *certify_battery,
            output.as_deref(),
        ),
        Command::Sub {
            site,
            coverage,
            presheaf,
            max_iter,
        } => cmd_sub(ctx, site, coverage, presheaf.as_deref(), *max_iter),
        Command::VerifyAppendix {
            instance,
            size_bound,
            defect,
        } => cmd_verify_appendix(ctx, instance, *size_bound, defect.as_deref()),
        Command::LoposCheck { file } => cmd_lopos_check(ctx, file),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::CheckQuantale { .. } => "check-quantale",
        Command::CheckPrelopology { .. } => "check-prelopology",
        Command::CheckSheaf { .. } => "check-sheaf",
        Command::Sheafify { .. } => "sheafify",
        Command::Sub { .. } => "sub",
        Command::VerifyAppendix { .. } => "verify-appendix",
        Command::LoposCheck { .. } => "lopos-check",
    }
}

/// Parses arguments and runs one command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return Outcome {
                code,
                stdout: e.render().to_string(),
                report: None,
            };
        }
    };
    let mut ctx = Ctx::default();
    ctx.config("seed", cli.seed);
    if let Some(note) = &cli.truncation_note {
        ctx.config("truncation_note", note);
    }
    let result = match cli.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&mut ctx, &cli.command)),
            Err(e) => Err(input(e)),
        },
        None => dispatch(&mut ctx, &cli.command),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            ctx.line(format!("error: {e}"));
            ctx.notes.push(e.to_string());
            e.code()
        }
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        command: command_name(&cli.command).to_string(),
        inputs: ctx.inputs,
        configuration: ctx.configuration,
        verdicts: ctx.verdicts,
        measurements: ctx.measurements,
        notes: ctx.notes,
        exit_code: code,
    };
    let mut stdout = ctx.text;
    let mut code = code;
    if let Some(path) = &cli.json {
        let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
        if let Err(e) = std::fs::write(path, text) {
            let _ = writeln!(stdout, "error: cannot write {}: {e}", path.display());
            code = 2;
        }
    }
    Outcome {
        code,
        stdout,
        report: Some(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_names() {
        assert_eq!(parse_standard("luk3"), Some((StandardQuantale::LukasiewiczChain, 3)));
        assert_eq!(
            parse_standard("ideals_zmod(12)"),
            Some((StandardQuantale::IdealsZmod, 12))
        );
        assert_eq!(
            parse_standard("chain_locale:4"),
            Some((StandardQuantale::ChainLocale, 4))
        );
        assert_eq!(parse_standard("nonsense"), None);
    }

    #[test]
    fn site_forms_parse() {
        let s: SiteSpec = serde_json::from_str(
            r#"{"product":[{"standard":"chain_locale","param":2},{"standard":"lukasiewicz_chain","param":3}]}"#,
        )
        .unwrap();
        let loaded = build_site(&s).unwrap();
        assert_eq!(loaded.site.quantale().len(), 6);
        let c: CoverageFile = serde_json::from_str(r#"{"product":[{"trivial":true},{"canonical":true}]}"#).unwrap();
        let cov = build_coverage(&loaded, &c).unwrap();
        assert!(!crate::coverage::is_canonical_quantalic(&cov));
    }

    #[test]
    fn bad_arguments_exit_two() {
        assert_eq!(run(["lopos", "no-such-command"]).code, 2);
        assert_eq!(run(["lopos", "--help"]).code, 0);
        assert_eq!(run(["lopos", "verify-appendix", "--instance", "bogus"]).code, 2);
    }

    #[test]
    fn appendix_on_a_thin_instance() {
        let out = run(["lopos", "verify-appendix", "--instance", "quantale:luk3"]);
        assert_eq!(out.code, 0, "{}", out.stdout);
        let out = run([
            "lopos",
            "verify-appendix",
            "--size-bound",
            "2",
            "--defect",
            "swapped_braiding",
        ]);
        assert_eq!(out.code, 1, "{}", out.stdout);
    }
}
