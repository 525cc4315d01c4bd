//! The `toposlab` command line.
//!
//! Exit codes: 0 when no verdict fails, 1 when at least one does, 2 for usage
//! and parse errors. Text and JSON output carry the same fields.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decidable::{dec_coreflection, dec_objects, dec_reflection, is_decidable, CoreflectionVerdict};
use crate::error::{Error, Result};
use crate::fincat::{standard_site, FinCategory};
use crate::geom::Bound;
use crate::io::{self, Document, PresheafSpec};
use crate::presheaf::{Presheaf, PresheafTopos, DEFAULT_BUDGET};
use crate::sublattice::{separated_classes, sheaf_status, sheafify, subobjects_of, SheafStatus};
use crate::theorems::{self, RunConfig, Status, SuiteReport, CORPUS, DEFAULT_BOUND};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Standard sites with their corpus aliases.
pub const SITES: &[(&str, &str)] = &[
    ("terminal", "sets"),
    ("parallel_pair", "graphs"),
    ("reflexive_graph", "reflexive_graphs"),
    ("zmod2", "zmod2"),
    ("zmod3", "zmod3"),
    ("idempotent", "idempotent"),
    ("right_zeros", "right_zeros"),
    ("delta1", "delta1"),
];

#[derive(Parser, Debug)]
#[command(name = "toposlab", version, about = "Finite presheaf toposes checked by enumeration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the standard sites with |objects|, |morphisms| and |Omega| per object.
    Sites {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List the statements the checker knows.
    Statements {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run statements over a site, a site file, or the whole corpus.
    Check(CheckArgs),
    /// Describe one presheaf: decidability, coreflection, closure data, sheaves.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// A standard site, a corpus alias, a site JSON file, or `corpus`.
    #[arg(default_value = "corpus")]
    pub target: String,
    /// `all`, or statement ids separated by commas.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Elements per site object in sampled objects; the total is this plus 2.
    #[arg(long, env = "TOPOSLAB_BOUND", value_parser = clap::value_parser!(u64).range(1..))]
    pub bound: Option<u64>,
    /// Seed for sampling pairs beyond the cap.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Candidate budget per hom-set enumeration.
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_enum: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    /// A presheaf JSON file, inline JSON, or one of `0`, `1`, `omega`, `y:<object>`.
    pub object: String,
    /// Site for inline objects that name none.
    #[arg(long)]
    pub site: Option<String>,
    /// Bound on the decidable test objects used to verify the coreflection.
    #[arg(long, env = "TOPOSLAB_BOUND", value_parser = clap::value_parser!(u64).range(1..))]
    pub bound: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_enum: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Parses arguments and runs; returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Sites { format } => {
            let listing = cmd_sites()?;
            emit(out, *format, &listing, |o| {
                for s in &listing {
                    let omega: Vec<String> = s.omega.iter().map(|(c, n)| format!("{c}:{n}")).collect();
                    writeln!(
                        o,
                        "{:<16} {:<17} objects {:>2}  morphisms {:>2}  |Omega| {}",
                        s.name,
                        s.alias,
                        s.objects,
                        s.morphisms,
                        omega.join(" ")
                    )?;
                }
                Ok(())
            })?;
            Ok(EXIT_OK)
        }
        Command::Statements { format } => {
            let list = theorems::list_statements();
            emit(out, *format, &list, |o| {
                for s in list {
                    writeln!(o, "{:<34} if {}; then {}", s.id, s.hypotheses, s.conclusion)?;
                }
                Ok(())
            })?;
            Ok(EXIT_OK)
        }
        Command::Check(a) => {
            let report = cmd_check(a)?;
            emit(out, a.format, &report, |o| write_report(o, &report))?;
            Ok(if report.failures().next().is_some() { EXIT_FAIL } else { EXIT_OK })
        }
        Command::Inspect(a) => {
            let ins = cmd_inspect(a)?;
            emit(out, a.format, &ins, |o| write_value(o, &serde_json::to_value(&ins).expect("serializable"), 0))?;
            Ok(EXIT_OK)
        }
    }
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    format: Format,
    value: &T,
    text: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Text => text(out)?,
    }
    Ok(())
}

// ---- sites ----------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct SiteListing {
    pub name: String,
    pub alias: String,
    pub objects: usize,
    pub morphisms: usize,
    pub omega: BTreeMap<String, usize>,
}

pub fn cmd_sites() -> Result<Vec<SiteListing>> {
    SITES
        .iter()
        .map(|&(name, alias)| {
            let t = PresheafTopos::new(name, standard_site(name)?);
            let s = t.site();
            let om = &t.omega().omega;
            Ok(SiteListing {
                name: name.into(),
                alias: alias.into(),
                objects: s.num_objects(),
                morphisms: s.num_morphisms(),
                omega: s.objects().map(|c| (s.object_name(c).to_string(), om.size(c))).collect(),
            })
        })
        .collect()
}

// ---- check ----------------------------------------------------------------

fn bound_of(b: Option<u64>) -> Bound {
    Bound::of(b.map_or(DEFAULT_BOUND, |n| n as usize))
}

/// Resolves `corpus`, a standard name, or a site file.
pub fn targets(target: &str, budget: u64) -> Result<Vec<Arc<PresheafTopos>>> {
    if target == "corpus" {
        return CORPUS
            .iter()
            .map(|n| Ok(PresheafTopos::with_budget(*n, standard_site(n)?, budget)))
            .collect();
    }
    let path = Path::new(target);
    if path.exists() || target.ends_with(".json") {
        let name = path.file_stem().map_or(target.to_string(), |s| s.to_string_lossy().into_owned());
        return match io::read_document(path)? {
            Document::Site(site) => Ok(vec![PresheafTopos::with_budget(name, site, budget)]),
            Document::Presheaf(_) => Err(Error::Parse(format!("{target}: expected a site, found a presheaf"))),
        };
    }
    Ok(vec![PresheafTopos::with_budget(target, standard_site(target)?, budget)])
}

pub fn cmd_check(a: &CheckArgs) -> Result<SuiteReport> {
    let toposes = targets(&a.target, a.max_enum)?;
    let ids: Vec<String> = if a.suite == "all" {
        Vec::new()
    } else {
        a.suite.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    };
    let cfg = RunConfig {
        bound: bound_of(a.bound),
        seed: a.seed,
        ..RunConfig::default()
    };
    theorems::run_suite(&toposes, &ids, cfg)
}

fn write_report(o: &mut dyn Write, r: &SuiteReport) -> std::io::Result<()> {
    writeln!(
        o,
        "bound {} per object, {} total; seed {}",
        r.bound.per_object, r.bound.total, r.seed
    )?;
    for v in &r.verdicts {
        writeln!(o, "{:<18} {:<34} {:<8} {:>6} ms", v.topos, v.id, v.status.as_str(), v.millis)?;
        if let Some(w) = &v.witness {
            writeln!(o, "    witness: {w}")?;
        }
        for i in &v.instances {
            writeln!(o, "    [{}] {}: {}", i.morphism, i.status.as_str(), i.detail)?;
        }
        for n in &v.notes {
            writeln!(o, "    note: {n}")?;
        }
    }
    writeln!(o, "exploration: pre-cohesive but not stably pre-cohesive")?;
    for e in &r.exploration {
        let show = |b: Option<bool>| b.map_or("unknown".to_string(), |b| b.to_string());
        writeln!(
            o,
            "    {:<18} pre-cohesive {:<7} stably pressential {:<7} counterexample {}",
            e.topos,
            show(e.pre_cohesive),
            show(e.stably_pressential),
            e.counterexample
        )?;
    }
    let counts = r.counts();
    let n = |s: Status| counts.get(&s).copied().unwrap_or(0);
    writeln!(
        o,
        "summary: {} pass, {} fail, {} vacuous, {} unknown in {} ms",
        n(Status::Pass),
        n(Status::Fail),
        n(Status::Vacuous),
        n(Status::Unknown),
        r.millis
    )?;
    let uncovered = r.uncovered();
    if !uncovered.is_empty() {
        writeln!(o, "without a pass: {}", uncovered.join(", "))?;
    }
    Ok(())
}

// ---- inspect --------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct Inspection {
    pub object: PresheafSpec,
    pub decidable: bool,
    pub coreflection: CoreflectionReport,
    /// The reflection into decidable objects.
    pub reflection: PresheafSpec,
    pub closure: ClosureData,
    pub sheaf: SheafStatus,
    pub sheafification: SheafificationReport,
}

#[derive(Debug, Serialize)]
pub struct CoreflectionReport {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cx: Option<PresheafSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified_against: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Double-negation closure data of the object.
#[derive(Debug, Serialize)]
pub struct ClosureData {
    /// Subobjects, dense ones and closed ones; absent beyond the budget.
    pub subobjects: Option<usize>,
    pub dense: Option<usize>,
    pub closed: Option<usize>,
    /// Classes of elements identified by the closure of the diagonal.
    pub separated_classes: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Serialize)]
pub struct SheafificationReport {
    pub separated: PresheafSpec,
    pub sheaf: PresheafSpec,
    pub unit_invertible: bool,
}

fn parse_object(spec: &str, site: Option<&Arc<FinCategory>>) -> Result<Presheaf> {
    let need_site = || site.cloned().ok_or_else(|| Error::Parse(format!("`{spec}` needs --site")));
    match spec.trim() {
        "0" => Ok(Presheaf::initial(&need_site()?)),
        "1" => Ok(Presheaf::terminal(&need_site()?)),
        "omega" => {
            let s = need_site()?;
            Ok(PresheafTopos::new("inspect", (*s).clone()).omega().omega.clone())
        }
        t if t.starts_with("y:") => {
            let s = need_site()?;
            let c = s.object_index(&t[2..])?;
            Ok(Presheaf::yoneda(&s, c))
        }
        t if t.starts_with('{') => io::parse_presheaf(t, "<inline>", site),
        t => {
            let text = std::fs::read_to_string(t).map_err(|e| Error::Parse(format!("{t}: {e}")))?;
            io::parse_presheaf(&text, t, site)
        }
    }
}

pub fn cmd_inspect(a: &InspectArgs) -> Result<Inspection> {
    let site = a.site.as_deref().map(standard_site).transpose()?.map(Arc::new);
    let x = parse_object(&a.object, site.as_ref())?;
    let topos = PresheafTopos::with_budget("inspect", (**x.site()).clone(), a.max_enum);
    let spec = |p: &Presheaf| io::presheaf_to_spec(p, None);
    let budget = topos.budget();
    let b = bound_of(a.bound);

    let tests = dec_objects(&topos, b.per_object, b.total)?;
    let coreflection = match dec_coreflection(&x, &tests, budget)? {
        CoreflectionVerdict::Found(c) => CoreflectionReport {
            status: "found",
            cx: Some(spec(&c.cx)),
            verified_against: Some(c.verified_against),
            detail: None,
        },
        CoreflectionVerdict::NoMaximum { maximal } => CoreflectionReport {
            status: "no largest decidable subobject",
            cx: None,
            verified_against: None,
            detail: Some(format!("{} maximal decidable subobjects", maximal.len())),
        },
        CoreflectionVerdict::NoneUpToBound { witness } => CoreflectionReport {
            status: "refuted",
            cx: None,
            verified_against: None,
            detail: Some(witness),
        },
    };
    let (reflection, _) = dec_reflection(&x)?;

    let j = topos.negneg();
    let (subobjects, dense, closed) = match subobjects_of(&x, budget) {
        Ok(subs) => (
            Some(subs.len()),
            Some(subs.iter().filter(|u| j.is_dense(u)).count()),
            Some(subs.iter().filter(|u| j.is_closed(u)).count()),
        ),
        Err(e) if e.is_bound() => (None, None, None),
        Err(e) => return Err(e),
    };
    let classes = separated_classes(&x, j);
    let s = x.site();
    let separated_classes = s
        .objects()
        .map(|c| {
            let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for (e, &k) in classes[c].iter().enumerate() {
                groups.entry(k).or_default().push(x.label(c, e).to_string());
            }
            (s.object_name(c).to_string(), groups.into_values().collect())
        })
        .collect();

    let sh = sheafify(&x, &topos)?;
    Ok(Inspection {
        object: spec(&x),
        decidable: is_decidable(&x).decidable,
        coreflection,
        reflection: spec(&reflection),
        closure: ClosureData {
            subobjects,
            dense,
            closed,
            separated_classes,
        },
        sheaf: sheaf_status(&x, j, budget)?,
        sheafification: SheafificationReport {
            separated: spec(&sh.separated),
            sheaf: spec(&sh.sheaf),
            unit_invertible: sh.unit.is_iso(),
        },
    })
}

/// Generic indented rendering of a JSON value.
fn write_value(o: &mut dyn Write, v: &serde_json::Value, depth: usize) -> std::io::Result<()> {
    use serde_json::Value;
    let pad = "  ".repeat(depth);
    if let Value::Object(m) = v {
        for (k, val) in m {
            match val {
                Value::Object(inner) if !inner.is_empty() && !is_leafy(val) => {
                    writeln!(o, "{pad}{k}:")?;
                    write_value(o, val, depth + 1)?;
                }
                _ => writeln!(o, "{pad}{k}: {}", inline(val))?,
            }
        }
    }
    Ok(())
}

/// Objects whose values are all scalars or arrays print on one line.
fn is_leafy(v: &serde_json::Value) -> bool {
    v.as_object()
        .is_some_and(|m| m.len() <= 4 && m.values().all(|x| !x.is_object()))
}

fn inline(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Null => "-".into(),
        other => other.to_string(),
    }
}
