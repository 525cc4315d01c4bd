//! The statement catalogue and its checks.
//!
//! Every statement is checked on the geometric morphisms a corpus topos
//! carries: the canonical morphism to sets and, when it exists, the
//! coreflection onto decidable objects. Hypotheses are decided first and a
//! statement whose hypotheses fail on an instance is vacuous there. A verdict
//! aggregates the instances of one statement on one topos.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decidable::is_decidable;
use crate::error::{Error, Result};
use crate::geom::{
    cartesian_closed_check, classify_morphism, extend_to_sheaf, hyperconnected, omega_comparison,
    refute_right_adjoint, shriek_preserves_products, shriek_preserves_zero, sheaf_samples, slice, slice_bound,
    slice_check, source_samples, uiao_for, verify_adjunction, Adjunction, Bound, Flag, GeomMorphism,
    MorphismFlags,
};
use crate::presheaf::{binary_product, coproduct, find_iso, pullback, HomSearch, Presheaf, PresheafMap, PresheafTopos};
use crate::sublattice::{sheaf_status, sheafify, subobjects_of};

/// The corpus, in report order.
pub const CORPUS: [&str; 8] = [
    "sets",
    "graphs",
    "reflexive_graphs",
    "zmod2",
    "zmod3",
    "idempotent",
    "right_zeros",
    "delta1",
];

/// One catalogued statement.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Statement {
    pub id: &'static str,
    pub hypotheses: &'static str,
    pub conclusion: &'static str,
}

const STATEMENTS: [Statement; 19] = [
    Statement {
        id: "slice-hyperconnected",
        hypotheses: "p hyperconnected",
        conclusion: "p/B hyperconnected for every B",
    },
    Statement {
        id: "dec-coreflection-hyperconnected",
        hypotheses: "the inclusion of decidable objects has a right adjoint",
        conclusion: "the coreflection is the direct image of a hyperconnected morphism",
    },
    Statement {
        id: "extensive-folk",
        hypotheses: "F preserves finite products and coproducts and reflects 0",
        conclusion: "X decidable and FX subterminal imply X subterminal",
    },
    Statement {
        id: "decidable-subterminal",
        hypotheses: "p pressential",
        conclusion: "X decidable and p_!X subterminal imply X subterminal",
    },
    Statement {
        id: "connected-iff-ccc",
        hypotheses: "p pressential",
        conclusion: "p connected iff p^* cartesian closed",
    },
    Statement {
        id: "unit-monic-on-decidables",
        hypotheses: "p stably pressential",
        conclusion: "the unit X -> p^*p_!X is monic for decidable X",
    },
    Statement {
        id: "decidable-implies-discrete",
        hypotheses: "p stably pressential and hyperconnected",
        conclusion: "every decidable object is discrete",
    },
    Statement {
        id: "decidable-eq-discrete",
        hypotheses: "Boolean base, p stably pressential and hyperconnected",
        conclusion: "decidable iff discrete",
    },
    Statement {
        id: "uiao",
        hypotheses: "Boolean base, p stably pre-cohesive",
        conclusion: "p_* retracts both decidable objects and double-negation sheaves, adjointly opposite",
    },
    Statement {
        id: "stably-locc-equivalences",
        hypotheses: "p connected essential",
        conclusion: "pressential, stable units, slices pressential and stably pressential agree",
    },
    Statement {
        id: "nullstellensatz-chain",
        hypotheses: "p connected essential with the Nullstellensatz",
        conclusion: "p_*X = 0 implies p_!X = 0 implies X = 0, all equivalent when p_*0 = 0",
    },
    Statement {
        id: "faithful-on-discrete",
        hypotheses: "p hyperconnected",
        conclusion: "p_* is faithful on maps out of discrete objects",
    },
    Statement {
        id: "shriek-zero",
        hypotheses: "p local",
        conclusion: "p^!0 subterminal; hyperconnected implies p^!0 = 0, conversely over a Boolean base",
    },
    Statement {
        id: "composite-equivalence",
        hypotheses: "p connected, f*beta_{f_*} and p_*eta_{p^*} invertible for the double-negation subtopos f",
        conclusion: "f^*p^* -| p_*f_* is an adjoint equivalence",
    },
    Statement {
        id: "connected-implies-local",
        hypotheses: "p connected, f^*beta and p_*eta_{p^*} invertible for the double-negation subtopos f",
        conclusion: "p local with center the double-negation sheaves",
    },
    Statement {
        id: "tau-negation",
        hypotheses: "p hyperconnected",
        conclusion: "tau commutes with bottom and negation; p_* preserves complements of subobjects",
    },
    Statement {
        id: "dense-lemma",
        hypotheses: "p_* preserves and reflects 0",
        conclusion: "p_*u invertible implies not-U = 0 and u dense",
    },
    Statement {
        id: "local-characterization",
        hypotheses: "Boolean base, p hyperconnected",
        conclusion: "p local iff p_* reflects 0 and every p^*A is separated; then the center is the sheaves",
    },
    Statement {
        id: "mclarty-corollary",
        hypotheses: "the decidable coreflection exists",
        conclusion: "it is local iff p_* reflects 0; then pre-cohesive iff p^* cartesian closed",
    },
];

pub fn list_statements() -> &'static [Statement] {
    &STATEMENTS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Vacuous => "vacuous",
            Status::Unknown => "unknown",
        }
    }
}

/// The outcome on one morphism.
#[derive(Clone, Debug, Serialize)]
pub struct Instance {
    pub morphism: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub id: String,
    pub topos: String,
    pub status: Status,
    /// The counterexample, failed hypothesis or bound reached; for a pass,
    /// the certifying object when the check produces one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub instances: Vec<Instance>,
    /// Probes beyond the statement itself, reported separately.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub bound: Bound,
    pub millis: u64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RunConfig {
    pub bound: Bound,
    /// Seeds the choice of pairs when there are more than `pair_cap`.
    pub seed: u64,
    pub pair_cap: usize,
}

pub const DEFAULT_BOUND: usize = 4;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bound: Bound::of(DEFAULT_BOUND),
            seed: 0,
            pair_cap: 48,
        }
    }
}

// ---- per-topos context ----------------------------------------------------

type Cached<T> = OnceLock<std::result::Result<T, Error>>;

fn cached<T: Clone>(slot: &Cached<T>, f: impl FnOnce() -> Result<T>) -> Result<T> {
    slot.get_or_init(f).clone()
}

/// A morphism with lazily computed flags.
pub struct Morph {
    pub label: String,
    pub p: GeomMorphism,
    flags: Cached<Arc<MorphismFlags>>,
    source: Cached<Arc<Vec<Presheaf>>>,
    target: Cached<Arc<Vec<Presheaf>>>,
    sheaves: Cached<Arc<Vec<Presheaf>>>,
}

impl Morph {
    fn new(label: &str, p: GeomMorphism) -> Arc<Morph> {
        Arc::new(Morph {
            label: label.into(),
            p,
            flags: OnceLock::new(),
            source: OnceLock::new(),
            target: OnceLock::new(),
            sheaves: OnceLock::new(),
        })
    }
}

pub struct Context {
    pub topos: Arc<PresheafTopos>,
    pub cfg: RunConfig,
    canonical: Cached<Arc<Morph>>,
    dec: Cached<std::result::Result<Arc<Morph>, String>>,
}

impl Context {
    pub fn new(topos: Arc<PresheafTopos>, cfg: RunConfig) -> Context {
        Context {
            topos,
            cfg,
            canonical: OnceLock::new(),
            dec: OnceLock::new(),
        }
    }

    fn bound(&self) -> Bound {
        self.cfg.bound
    }

    pub fn canonical(&self) -> Result<Arc<Morph>> {
        cached(&self.canonical, || {
            Ok(Morph::new("canonical", GeomMorphism::canonical(self.topos.clone())?))
        })
    }

    /// The decidable coreflection, or why it does not exist.
    pub fn dec(&self) -> Result<std::result::Result<Arc<Morph>, String>> {
        cached(&self.dec, || {
            match GeomMorphism::from_dec_coreflection(self.topos.clone(), self.bound()) {
                Ok(p) => Ok(Ok(Morph::new("dec", p))),
                Err(Error::MissingAdjoint(w)) => Ok(Err(w)),
                Err(e) => Err(e),
            }
        })
    }

    pub fn morphisms(&self) -> Result<Vec<Arc<Morph>>> {
        let mut out = vec![self.canonical()?];
        if let Ok(d) = self.dec()? {
            out.push(d);
        }
        Ok(out)
    }

    pub fn flags(&self, m: &Morph) -> Result<Arc<MorphismFlags>> {
        cached(&m.flags, || Ok(Arc::new(classify_morphism(&m.p, self.bound())?)))
    }

    fn source(&self, m: &Morph) -> Result<Arc<Vec<Presheaf>>> {
        cached(&m.source, || Ok(Arc::new(source_samples(&m.p, self.bound())?)))
    }

    fn target(&self, m: &Morph) -> Result<Arc<Vec<Presheaf>>> {
        cached(&m.target, || Ok(Arc::new(m.p.target.samples(self.bound())?)))
    }

    fn sheaves(&self, m: &Morph) -> Result<Arc<Vec<Presheaf>>> {
        cached(&m.sheaves, || {
            Ok(Arc::new(sheaf_samples(&self.topos, &self.source(m)?)?))
        })
    }

    /// Index pairs into `n x m`, all of them or a seeded sample of `pair_cap`.
    fn pairs(&self, n: usize, m: usize) -> Vec<(usize, usize)> {
        let total = n * m;
        if total <= self.cfg.pair_cap {
            return (0..total).map(|k| (k / m, k % m)).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let mut picked = sample(&mut rng, total, self.cfg.pair_cap).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|k| (k / m, k % m)).collect()
    }
}

// ---- outcomes -------------------------------------------------------------

enum Outcome {
    Pass(String),
    Fail(String),
    Vacuous(String),
    Unknown(String),
}

use Outcome::{Fail, Pass, Vacuous};

fn settle(r: Result<Outcome>) -> Outcome {
    match r {
        Ok(o) => o,
        Err(e) if e.is_bound() => Outcome::Unknown(e.to_string()),
        Err(e) => Fail(format!("error: {e}")),
    }
}

/// `None` when the flag holds, otherwise the outcome it forces.
fn gate(flag: &Flag, name: &str) -> Option<Outcome> {
    match flag {
        Flag::True => None,
        Flag::False { witness } => Some(Vacuous(format!("not {name}: {witness}"))),
        Flag::Unknown { reason } => Some(Outcome::Unknown(format!("{name} undecided: {reason}"))),
    }
}

macro_rules! require {
    ($flag:expr, $name:expr) => {
        if let Some(o) = gate(&$flag, $name) {
            return Ok(o);
        }
    };
}

fn boolean_gate(m: &Morph) -> Result<Option<Outcome>> {
    Ok(if m.p.target.is_boolean()? {
        None
    } else {
        Some(Vacuous("the base is not Boolean: double negation is not the identity".into()))
    })
}

macro_rules! require_boolean {
    ($m:expr) => {
        if let Some(o) = boolean_gate($m)? {
            return Ok(o);
        }
    };
}

#[derive(Default)]
struct Findings {
    instances: Vec<(String, Outcome)>,
    notes: Vec<String>,
    /// A concrete object certifying a pass, reported as its witness.
    certificate: Option<String>,
}

impl Findings {
    fn push(&mut self, label: impl Into<String>, r: Result<Outcome>) {
        self.instances.push((label.into(), settle(r)));
    }
}

fn subterminal(x: &Presheaf) -> bool {
    x.sizes().iter().all(|&n| n <= 1)
}

fn flag_bool(f: &Flag) -> Option<bool> {
    match f {
        Flag::True => Some(true),
        Flag::False { .. } => Some(false),
        Flag::Unknown { .. } => None,
    }
}

/// Objects one step beyond the bound, to re-examine a sampled hypothesis
/// before reporting a failure.
fn escalated(cx: &Context, m: &Morph) -> Result<Vec<Presheaf>> {
    let b = cx.bound();
    source_samples(&m.p, Bound::new(b.per_object + 1, b.total + 2))
}

/// A non-empty object beyond the bound that `p_*` sends to 0.
fn zero_beyond_bound(cx: &Context, m: &Morph) -> Result<Option<Presheaf>> {
    for x in escalated(cx, m)? {
        if !x.is_empty() && m.p.direct_image(&x)?.is_empty() {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

fn hom(x: &Presheaf, y: &Presheaf, budget: u64) -> Result<Vec<PresheafMap>> {
    HomSearch::new(x, y).budget(budget).collect()
}

fn count_hom(x: &Presheaf, y: &Presheaf, budget: u64) -> Result<u64> {
    HomSearch::new(x, y).budget(budget).count()
}

// ---- the checks -----------------------------------------------------------

fn slice_hyperconnected(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    let m = cx.canonical()?;
    out.push(
        &m.label,
        (|| {
            require!(cx.flags(&m)?.hyperconnected, "hyperconnected");
            let sb = slice_bound(cx.bound());
            let mut sizes = Vec::new();
            for b in m.p.target.samples(Bound::new(2, 2))? {
                if b.is_empty() {
                    continue;
                }
                let s = slice(&m.p, &b)?;
                match hyperconnected(&s.morphism, sb)? {
                    Flag::True => {}
                    Flag::False { witness } => {
                        return Ok(Fail(format!("p/B is not hyperconnected for B = {b:?}: {witness}")))
                    }
                    Flag::Unknown { reason } => return Ok(Outcome::Unknown(reason)),
                }
                let c = slice_check(&m.p, &s, &source_samples(&s.morphism, sb)?)?;
                if let Some(w) = c.mismatch {
                    return Ok(Fail(format!("sliced adjoints disagree with the composites: {w}")));
                }
                sizes.push(b.total());
            }
            Ok(Pass(format!("p/B hyperconnected for B of sizes {sizes:?}")))
        })(),
    );
    Ok(out)
}

fn dec_coreflection_hyperconnected(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    match cx.dec()? {
        Err(w) => out.push("dec", Ok(Vacuous(format!("no coreflection onto decidable objects: {w}")))),
        Ok(m) => out.push(
            &m.label,
            (|| {
                let r = verify_adjunction(&m.p, Adjunction::InverseDirect, &cx.source(&m)?, &cx.target(&m)?)?;
                if let Some(w) = r.failure {
                    return Ok(Fail(format!("the coreflection is not right adjoint to the inclusion: {w}")));
                }
                Ok(match &cx.flags(&m)?.hyperconnected {
                    Flag::True => Pass(format!(
                        "adjunction verified on {} pairs; hyperconnected",
                        r.pairs_checked
                    )),
                    Flag::False { witness } => Fail(format!("not hyperconnected: {witness}")),
                    Flag::Unknown { reason } => Outcome::Unknown(reason.clone()),
                })
            })(),
        ),
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Leg {
    Shriek,
    Direct,
}

fn apply(m: &Morph, leg: Leg, x: &Presheaf) -> Result<Presheaf> {
    match leg {
        Leg::Shriek => m.p.shriek(x),
        Leg::Direct => m.p.direct_image(x),
    }
}

fn apply_map(m: &Morph, leg: Leg, f: &PresheafMap) -> Result<PresheafMap> {
    match leg {
        Leg::Shriek => m.p.shriek_map(f),
        Leg::Direct => m.p.direct_image_map(f),
    }
}

/// Finite products and coproducts preserved on sampled pairs.
fn preserves_finite_sums_and_products(cx: &Context, m: &Morph, leg: Leg) -> Result<Option<String>> {
    let source = cx.source(m)?;
    let esite = cx.topos.site();
    let tsite = m.p.target.site();
    let one = apply(m, leg, &Presheaf::terminal(esite))?;
    if !one.sizes().iter().all(|&n| n == 1) {
        return Ok(Some(format!("F1 = {one:?} is not terminal")));
    }
    let zero = apply(m, leg, &Presheaf::initial(esite))?;
    if !zero.is_empty() {
        return Ok(Some(format!("F0 = {zero:?} is not initial")));
    }
    for (i, j) in cx.pairs(source.len(), source.len()) {
        let (x, y) = (&source[i], &source[j]);
        let prod = binary_product(x, y);
        let fp = binary_product(&apply(m, leg, x)?, &apply(m, leg, y)?);
        let cmp = fp.mediate(&[apply_map(m, leg, &prod.legs[0])?, apply_map(m, leg, &prod.legs[1])?])?;
        if !cmp.is_iso() {
            return Ok(Some(format!("F(X x Y) -> FX x FY is not invertible for X = {x:?}, Y = {y:?}")));
        }
        let sum = coproduct(esite, &[x.clone(), y.clone()]);
        let i0 = apply_map(m, leg, &sum.legs[0])?;
        let i1 = apply_map(m, leg, &sum.legs[1])?;
        let fs = coproduct(tsite, &[i0.dom().clone(), i1.dom().clone()]);
        let cmp = fs.mediate(&[i0.clone(), i1], &i0.cod().clone())?;
        if !cmp.is_iso() {
            return Ok(Some(format!("FX + FY -> F(X + Y) is not invertible for X = {x:?}, Y = {y:?}")));
        }
    }
    Ok(None)
}

fn reflects_initial(cx: &Context, m: &Morph, leg: Leg) -> Result<Option<String>> {
    for x in cx.source(m)?.iter() {
        if !x.is_empty() && apply(m, leg, x)?.is_empty() {
            return Ok(Some(format!("FX = 0 for X = {x:?}")));
        }
    }
    Ok(None)
}

/// Decidable samples with subterminal image that are not subterminal.
fn subterminal_conclusion(cx: &Context, m: &Morph, leg: Leg) -> Result<(usize, Option<String>)> {
    let mut tested = 0;
    for x in cx.source(m)?.iter() {
        if !is_decidable(x).decidable || !subterminal(&apply(m, leg, x)?) {
            continue;
        }
        tested += 1;
        if !subterminal(x) {
            return Ok((tested, Some(format!("X = {x:?} is decidable with subterminal image but not subterminal"))));
        }
    }
    Ok((tested, None))
}

fn extensive_folk(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        for (leg, name) in [(Leg::Shriek, "p_!"), (Leg::Direct, "p_*")] {
            let mut note = None;
            let r = (|| {
                if let Some(w) = preserves_finite_sums_and_products(cx, &m, leg)? {
                    return Ok(Vacuous(w));
                }
                if let Some(w) = reflects_initial(cx, &m, leg)? {
                    // the remaining hypothesis is necessary: look for a failure of the conclusion
                    if let (_, Some(c)) = subterminal_conclusion(cx, &m, leg)? {
                        note = Some(format!(
                            "necessity probe on {} {name}: products and coproducts are preserved but {w}; {c}",
                            m.label
                        ));
                    }
                    return Ok(Vacuous(format!("does not reflect 0: {w}")));
                }
                let (tested, bad) = subterminal_conclusion(cx, &m, leg)?;
                Ok(match bad {
                    Some(w) => Fail(w),
                    None => Pass(format!("{tested} decidable objects with subterminal image, all subterminal")),
                })
            })();
            out.push(format!("{} {name}", m.label), r);
            out.notes.extend(note);
        }
    }
    Ok(out)
}

fn decidable_subterminal(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                require!(cx.flags(&m)?.pressential, "pressential");
                let (tested, bad) = subterminal_conclusion(cx, &m, Leg::Shriek)?;
                Ok(match bad {
                    Some(w) => Fail(w),
                    None => Pass(format!("{tested} decidable objects with subterminal p_!X, all subterminal")),
                })
            })(),
        );
    }
    Ok(out)
}

/// The canonical morphism of two disjoint copies of the site: `p^*` is
/// cartesian closed but `p` is not connected, and `p_!` fails to preserve 1.
fn disconnected_probe(cx: &Context) -> Result<String> {
    let site = cx.topos.site();
    let twice = PresheafTopos::with_budget(
        format!("{} + {}", cx.topos.name(), cx.topos.name()),
        site.disjoint_union(site)?,
        cx.topos.budget(),
    );
    let q = GeomMorphism::canonical(twice)?;
    let small = Bound::new(2, 2);
    let ccc = Flag::from_result(cartesian_closed_check(&q, small))?;
    let two = Presheaf::constant(q.target.site(), &["a".into(), "b".into()]);
    let connected = q.alpha(&two)?.is_iso();
    let p1 = q.shriek(&q.source.terminal())?;
    Ok(format!(
        "hypothesis probe on two disjoint copies of the site: p^* cartesian closed = {}, connected = {connected}, \
         |p_!1| = {}, so p is not pressential",
        ccc.is_true(),
        p1.total()
    ))
}

fn connected_iff_ccc(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                let fl = cx.flags(&m)?;
                require!(fl.pressential, "pressential");
                let ccc = Flag::from_result(cartesian_closed_check(&m.p, cx.bound()))?;
                Ok(match (flag_bool(&fl.connected), flag_bool(&ccc)) {
                    (Some(a), Some(b)) if a == b => Pass(format!("connected = cartesian closed = {a}")),
                    (Some(a), Some(b)) => Fail(format!(
                        "connected = {a} but cartesian closed = {b}: {}",
                        fl.connected.witness().or(ccc.witness()).unwrap_or("")
                    )),
                    _ => Outcome::Unknown("one side undecided at the bound".into()),
                })
            })(),
        );
    }
    match disconnected_probe(cx) {
        Ok(n) => out.notes.push(n),
        Err(e) => out.notes.push(format!("hypothesis probe unavailable: {e}")),
    }
    Ok(out)
}

fn unit_monic_on_decidables(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                require!(cx.flags(&m)?.stably_pressential, "stably pressential");
                let mut n = 0;
                for x in cx.source(&m)?.iter().filter(|x| is_decidable(x).decidable) {
                    let s = m.p.sigma(x)?;
                    if !s.is_monic() {
                        return Ok(Fail(format!("the unit is not monic at the decidable X = {x:?}: {s:?}")));
                    }
                    n += 1;
                }
                Ok(Pass(format!("unit monic on {n} decidable objects")))
            })(),
        );
    }
    Ok(out)
}

fn decidable_implies_discrete(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                let fl = cx.flags(&m)?;
                require!(fl.stably_pressential, "stably pressential");
                require!(fl.hyperconnected, "hyperconnected");
                let mut n = 0;
                for x in cx.source(&m)?.iter().filter(|x| is_decidable(x).decidable) {
                    if !m.p.beta(x)?.is_iso() {
                        return Ok(Fail(format!("the decidable X = {x:?} is not discrete")));
                    }
                    n += 1;
                }
                Ok(Pass(format!("{n} decidable objects, all discrete")))
            })(),
        );
    }
    Ok(out)
}

fn decidable_eq_discrete(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                require_boolean!(&m);
                let fl = cx.flags(&m)?;
                require!(fl.stably_pressential, "stably pressential");
                require!(fl.hyperconnected, "hyperconnected");
                let (mut dec, mut disc) = (0, 0);
                for x in cx.source(&m)?.iter() {
                    let d = is_decidable(x).decidable;
                    let s = m.p.beta(x)?.is_iso();
                    if d != s {
                        return Ok(Fail(format!("X = {x:?}: decidable = {d}, discrete = {s}")));
                    }
                    dec += d as usize;
                    disc += s as usize;
                }
                Ok(Pass(format!(
                    "{dec} decidable and {disc} discrete among {} objects",
                    cx.source(&m)?.len()
                )))
            })(),
        );
    }
    Ok(out)
}

fn uiao(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    let m = cx.canonical()?;
    out.push(
        &m.label,
        (|| {
            require_boolean!(&m);
            let fl = cx.flags(&m)?;
            require!(fl.local, "local");
            require!(fl.hyperconnected, "hyperconnected");
            require!(fl.stably_pressential, "stably pressential");
            let r = uiao_for(&m.p, cx.bound())?;
            Ok(match r.failure {
                Some(w) => Fail(w),
                None => Pass(format!(
                    "{} decidable base objects, {} sheaves; {}",
                    r.dec_objects,
                    r.sheaves,
                    r.passed.join("; ")
                )),
            })
        })(),
    );
    Ok(out)
}

/// `p_!` sends sampled pullbacks over `p^*B` to pullbacks, `B` of at most
/// two elements.
fn stable_units(cx: &Context, p: &GeomMorphism, sb: Bound) -> Result<Flag> {
    for b in p.target.samples(Bound::new(2, 2))? {
        if b.is_empty() {
            continue;
        }
        let s = slice(p, &b)?;
        let tau = p.tau(&b)?;
        let totals = source_samples(&s.morphism, sb)?
            .iter()
            .map(|y| s.total(p, y))
            .collect::<Result<Vec<_>>>()?;
        for (i, j) in cx.pairs(totals.len(), totals.len()) {
            let (x, y) = (&totals[i].1, &totals[j].1);
            let pb = pullback(x, y);
            let lx = tau.after(&p.shriek_map(x)?)?;
            let ly = tau.after(&p.shriek_map(y)?)?;
            let tp = pullback(&lx, &ly);
            let cmp = tp.mediate(&[p.shriek_map(&pb.legs[0])?, p.shriek_map(&pb.legs[1])?])?;
            if !cmp.is_iso() {
                return Ok(Flag::False {
                    witness: format!(
                        "p_! does not preserve the pullback of {:?} and {:?} over p*B, B = {b:?}",
                        x.dom(),
                        y.dom()
                    ),
                });
            }
        }
    }
    Ok(Flag::True)
}

/// `(p/B)_!` preserves finite products for every `B` of at most two elements.
fn slices_pressential(p: &GeomMorphism, sb: Bound) -> Result<Flag> {
    for b in p.target.samples(Bound::new(2, 2))? {
        if b.is_empty() {
            continue;
        }
        let s = slice(p, &b)?;
        let f = shriek_preserves_products(&s.morphism, &source_samples(&s.morphism, sb)?)?;
        if let Flag::False { witness } = f {
            return Ok(Flag::False {
                witness: format!("over B = {b:?}: {witness}"),
            });
        }
    }
    Ok(Flag::True)
}

fn stably_locc_equivalences(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    let m = cx.canonical()?;
    out.push(
        &m.label,
        (|| {
            let fl = cx.flags(&m)?;
            require!(fl.connected, "connected");
            require!(fl.essential, "essential");
            let items_at = |sb: Bound| -> Result<[(&str, Flag); 4]> {
                Ok([
                    ("pressential", fl.pressential.clone()),
                    ("stable units", Flag::from_result(stable_units(cx, &m.p, sb))?),
                    ("slices pressential", Flag::from_result(slices_pressential(&m.p, sb))?),
                    ("stably pressential", fl.stably_pressential.clone()),
                ])
            };
            let agree = |items: &[(&str, Flag); 4]| {
                let v: Vec<Option<bool>> = items.iter().map(|(_, f)| flag_bool(f)).collect();
                v.windows(2).all(|w| w[0] == w[1])
            };
            let mut items = items_at(slice_bound(cx.bound()))?;
            if !agree(&items) {
                // slices were sampled below the bound; look again at the full bound
                items = items_at(cx.bound())?;
            }
            let values: Vec<Option<bool>> = items.iter().map(|(_, f)| flag_bool(f)).collect();
            if values.iter().any(Option::is_none) {
                return Ok(Outcome::Unknown("an item is undecided at the bound".into()));
            }
            let described = items
                .iter()
                .map(|(n, f)| format!("{n} = {}", f.is_true()))
                .collect::<Vec<_>>()
                .join(", ");
            Ok(if agree(&items) {
                Pass(format!("consistent with equivalence at the bound: {described}"))
            } else {
                Fail(format!("items disagree: {described}"))
            })
        })(),
    );
    Ok(out)
}

fn nullstellensatz_chain(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        let mut note = None;
        let r = (|| {
            let fl = cx.flags(&m)?;
            if fl.hyperconnected.is_true() && fl.nullstellensatz.is_false() {
                for x in cx.source(&m)?.iter() {
                    if !x.is_empty() && m.p.direct_image(x)?.is_empty() {
                        note = Some(format!(
                            "necessity probe on {}: p is hyperconnected without the Nullstellensatz and \
                             p_* fails to reflect 0 at X = {x:?} (finite analogue of the actions of the \
                             additive monoid of natural numbers)",
                            m.label
                        ));
                        break;
                    }
                }
            }
            require!(fl.connected, "connected");
            require!(fl.essential, "essential");
            require!(fl.nullstellensatz, "Nullstellensatz");
            let preserves = m.p.direct_image(&cx.topos.initial())?.is_empty();
            let mut n = 0;
            for x in cx.source(&m)?.iter() {
                let a = m.p.direct_image(x)?.is_empty();
                let b = m.p.shriek(x)?.is_empty();
                let c = x.is_empty();
                if a && !b {
                    return Ok(Fail(format!("p_*X = 0 but p_!X != 0 for X = {x:?}")));
                }
                if b && !c {
                    return Ok(Fail(format!("p_!X = 0 but X != 0 for X = {x:?}")));
                }
                if preserves && (a != c || b != c) {
                    return Ok(Fail(format!("p_*0 = 0 but the items differ at X = {x:?}")));
                }
                n += 1;
            }
            Ok(Pass(format!("chain holds on {n} objects; p_* preserves 0 = {preserves}")))
        })();
        out.push(&m.label, r);
        out.notes.extend(note);
    }
    Ok(out)
}

fn faithful_on_discrete(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                require!(cx.flags(&m)?.hyperconnected, "hyperconnected");
                let (target, source) = (cx.target(&m)?, cx.source(&m)?);
                let budget = cx.topos.budget();
                let mut maps = 0;
                for (i, j) in cx.pairs(target.len(), source.len()) {
                    let pa = m.p.inverse_image(&target[i])?;
                    let x = &source[j];
                    let mut images: BTreeMap<Vec<Vec<usize>>, PresheafMap> = BTreeMap::new();
                    for f in hom(&pa, x, budget)? {
                        let pf = m.p.direct_image_map(&f)?;
                        if let Some(g) = images.insert(pf.comps().to_vec(), f.clone()) {
                            return Ok(Fail(format!("p_* identifies {g:?} and {f:?}")));
                        }
                        maps += 1;
                    }
                }
                Ok(Pass(format!("p_* injective on {maps} maps out of discrete objects")))
            })(),
        );
    }
    Ok(out)
}

fn shriek_zero(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                let fl = cx.flags(&m)?;
                require!(fl.local, "local");
                let z = shriek_preserves_zero(&m.p)?;
                if !z.subterminal {
                    return Ok(Fail(format!("p^!0 has sizes {:?}, not subterminal", z.upper_zero_sizes)));
                }
                let Some(hyper) = flag_bool(&fl.hyperconnected) else {
                    return Ok(Outcome::Unknown("hyperconnectedness undecided".into()));
                };
                let boolean = m.p.target.is_boolean()?;
                if hyper && !z.preserves_zero {
                    return Ok(Fail(format!("hyperconnected but p^!0 has sizes {:?}", z.upper_zero_sizes)));
                }
                if boolean && z.preserves_zero && !hyper {
                    return Ok(Fail(format!(
                        "Boolean base and p^!0 = 0 but not hyperconnected: {}",
                        fl.hyperconnected.witness().unwrap_or("")
                    )));
                }
                Ok(Pass(format!(
                    "p^!0 = {:?}; hyperconnected = {hyper}; Boolean base = {boolean}",
                    z.upper_zero_sizes
                )))
            })(),
        );
    }
    Ok(out)
}

/// Hypotheses shared by the two composite statements; `None` when they hold.
fn sheaf_hypotheses(cx: &Context, m: &Morph, all_objects: bool) -> Result<Option<String>> {
    let objects = if all_objects { cx.source(m)? } else { cx.sheaves(m)? };
    f_beta_invertible(cx, m, &objects)?.map_or_else(|| p_eta_invertible(cx, m), |w| Ok(Some(w)))
}

fn f_beta_invertible(cx: &Context, m: &Morph, objects: &[Presheaf]) -> Result<Option<String>> {
    for x in objects.iter() {
        let sh = sheafify(x, &cx.topos)?;
        let into = sh.unit.after(&m.p.beta(x)?)?;
        if !extend_to_sheaf(&cx.topos, &into)?.is_iso() {
            return Ok(Some(format!("f^* beta is not invertible at {x:?}")));
        }
    }
    Ok(None)
}

fn p_eta_invertible(cx: &Context, m: &Morph) -> Result<Option<String>> {
    for a in cx.target(m)?.iter() {
        let pa = m.p.inverse_image(a)?;
        if !m.p.direct_image_map(&sheafify(&pa, &cx.topos)?.unit)?.is_iso() {
            return Ok(Some(format!("p_* eta is not invertible at p^*A, A = {a:?}")));
        }
    }
    Ok(None)
}

fn composite_equivalence(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                require!(cx.flags(&m)?.connected, "connected");
                if let Some(w) = sheaf_hypotheses(cx, &m, false)? {
                    return Ok(Vacuous(w));
                }
                let budget = cx.topos.budget();
                let (target, sheaves) = (cx.target(&m)?, cx.sheaves(&m)?);
                let lifted: Vec<Presheaf> = target
                    .iter()
                    .map(|a| Ok(sheafify(&m.p.inverse_image(a)?, &cx.topos)?.sheaf))
                    .collect::<Result<_>>()?;
                // essentially surjective
                for f in sheaves.iter() {
                    let back = sheafify(&m.p.inverse_image(&m.p.direct_image(f)?)?, &cx.topos)?.sheaf;
                    if find_iso(&back, f, budget)?.is_none() {
                        return Ok(Fail(format!("the sheaf {f:?} is not in the image of f^*p^*")));
                    }
                }
                // hom bijections and full faithfulness
                for (i, j) in cx.pairs(target.len(), sheaves.len()) {
                    let (a, f) = (&target[i], &sheaves[j]);
                    let l = count_hom(&lifted[i], f, budget)?;
                    let r = count_hom(a, &m.p.direct_image(f)?, budget)?;
                    if l != r {
                        return Ok(Fail(format!("|Hom(f*p*A, F)| = {l} but |Hom(A, p_*F)| = {r} for A = {a:?}, F = {f:?}")));
                    }
                }
                for (i, j) in cx.pairs(target.len(), target.len()) {
                    let l = count_hom(&target[i], &target[j], budget)?;
                    let r = count_hom(&lifted[i], &lifted[j], budget)?;
                    if l != r {
                        return Ok(Fail(format!(
                            "f^*p^* is not fully faithful at {:?}, {:?}: {l} vs {r} maps",
                            target[i], target[j]
                        )));
                    }
                }
                Ok(Pass(format!(
                    "adjoint equivalence between {} base objects and {} sheaves",
                    target.len(),
                    sheaves.len()
                )))
            })(),
        );
    }
    Ok(out)
}

/// `p^!A` is a sheaf for every sample and the unit of `p_* -| p^!` is
/// invertible on sheaves.
fn center_is_sheaves(cx: &Context, m: &Morph) -> Result<Option<String>> {
    let j = cx.topos.negneg();
    for a in cx.target(m)?.iter() {
        let ua = m.p.upper(a)?;
        if !sheaf_status(&ua, j, cx.topos.budget())?.sheaf {
            return Ok(Some(format!("p^!A = {ua:?} is not a sheaf")));
        }
    }
    for f in cx.sheaves(m)?.iter() {
        if !m.p.eta_upper(f)?.is_iso() {
            return Ok(Some(format!("the sheaf {f:?} is not fixed by p^!p_*")));
        }
    }
    Ok(None)
}

fn connected_implies_local(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                let fl = cx.flags(&m)?;
                require!(fl.connected, "connected");
                if let Some(w) = sheaf_hypotheses(cx, &m, true)? {
                    return Ok(Vacuous(w));
                }
                match &fl.local {
                    Flag::True => {}
                    Flag::False { witness } => {
                        if let Some(w) = f_beta_invertible(cx, &m, &escalated(cx, &m)?)? {
                            return Ok(Vacuous(format!("beyond the bound, {w}")));
                        }
                        return Ok(Fail(format!("not local: {witness}")));
                    }
                    Flag::Unknown { reason } => return Ok(Outcome::Unknown(reason.clone())),
                }
                Ok(match center_is_sheaves(cx, &m)? {
                    Some(w) => Fail(w),
                    None => Pass("local, with the sheaves as center".into()),
                })
            })(),
        );
    }
    Ok(out)
}

fn tau_negation(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                require!(cx.flags(&m)?.hyperconnected, "hyperconnected");
                let oc = omega_comparison(&m.p)?;
                let cl = m.p.target.classifier()?;
                let om = cx.topos.omega();
                if m.p.direct_image(&cx.topos.initial())?.is_empty() {
                    let lhs = oc.tau.after(&m.p.direct_image_map(&om.bottom)?)?;
                    let rhs = cl.bottom()?.after(&PresheafMap::to_terminal(lhs.dom()))?;
                    if lhs.comps() != rhs.comps() {
                        return Ok(Fail(format!("tau . p_*(bottom) = {lhs:?} but bottom . ! = {rhs:?}")));
                    }
                }
                let lhs = oc.tau.after(&m.p.direct_image_map(&om.neg)?)?;
                let rhs = cl.negation()?.after(&oc.tau)?;
                if lhs.comps() != rhs.comps() {
                    return Ok(Fail(format!("tau . p_*(neg) = {lhs:?} but neg . tau = {rhs:?}")));
                }
                let mut n = 0;
                for x in cx.source(&m)?.iter() {
                    for u in subobjects_of(x, cx.topos.budget())? {
                        let pu = m.p.direct_image_map(&u.to_presheaf().1)?.image();
                        let pnu = m.p.direct_image_map(&u.neg().to_presheaf().1)?.image();
                        if pnu.mask() != pu.neg().mask() {
                            return Ok(Fail(format!("p_*(not u) != not p_*u for u = {u:?} in {x:?}")));
                        }
                        n += 1;
                    }
                }
                Ok(Pass(format!("tau commutes with negation; complements preserved on {n} subobjects")))
            })(),
        );
    }
    Ok(out)
}

fn dense_lemma(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                if !m.p.direct_image(&cx.topos.initial())?.is_empty() {
                    return Ok(Vacuous("p_* does not preserve 0".into()));
                }
                require!(cx.flags(&m)?.reflects_zero, "reflecting 0");
                let j = cx.topos.negneg();
                let (mut n, mut proper) = (0, 0);
                for x in cx.source(&m)?.iter() {
                    for u in subobjects_of(x, cx.topos.budget())? {
                        if !m.p.direct_image_map(&u.to_presheaf().1)?.is_iso() {
                            continue;
                        }
                        if !u.neg().is_empty() {
                            return Ok(Fail(format!("p_*u invertible but not-U != 0 for u = {u:?} in {x:?}")));
                        }
                        if !j.is_dense(&u) {
                            return Ok(Fail(format!("p_*u invertible but u = {u:?} in {x:?} is not dense")));
                        }
                        n += 1;
                        proper += !u.is_full() as usize;
                    }
                }
                Ok(Pass(format!("{n} monos with invertible p_*u, {proper} of them proper, all dense")))
            })(),
        );
    }
    Ok(out)
}

fn local_characterization(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    for m in cx.morphisms()? {
        out.push(
            &m.label,
            (|| {
                require_boolean!(&m);
                let fl = cx.flags(&m)?;
                require!(fl.hyperconnected, "hyperconnected");
                let (Some(local), Some(r0)) = (flag_bool(&fl.local), flag_bool(&fl.reflects_zero)) else {
                    return Ok(Outcome::Unknown("local or reflecting 0 undecided".into()));
                };
                let j = cx.topos.negneg();
                let mut separated = true;
                for a in cx.target(&m)?.iter() {
                    if !sheaf_status(&m.p.inverse_image(a)?, j, cx.topos.budget())?.separated {
                        separated = false;
                        break;
                    }
                }
                if !local && r0 && separated {
                    if let Some(x) = zero_beyond_bound(cx, &m)? {
                        return Ok(Pass(format!(
                            "local = false, and beyond the bound p_* sends X = {x:?} to 0"
                        )));
                    }
                }
                if local != (r0 && separated) {
                    return Ok(Fail(format!(
                        "local = {local} but reflects 0 = {r0} and p^*A separated = {separated}"
                    )));
                }
                if local {
                    if let Some(w) = center_is_sheaves(cx, &m)? {
                        return Ok(Fail(w));
                    }
                }
                Ok(Pass(format!("local = {local}, reflects 0 = {r0}, p^*A separated = {separated}")))
            })(),
        );
    }
    Ok(out)
}

fn mclarty_corollary(cx: &Context) -> Result<Findings> {
    let mut out = Findings::default();
    match cx.dec()? {
        Err(w) => out.push("dec", Ok(Vacuous(format!("no coreflection onto decidable objects: {w}")))),
        Ok(m) => out.push(
            &m.label,
            (|| {
                let fl = cx.flags(&m)?;
                require!(fl.hyperconnected, "hyperconnected");
                let (Some(local), Some(r0)) = (flag_bool(&fl.local), flag_bool(&fl.reflects_zero)) else {
                    return Ok(Outcome::Unknown("local or reflecting 0 undecided".into()));
                };
                if !local && r0 {
                    if let Some(x) = zero_beyond_bound(cx, &m)? {
                        return Ok(Pass(format!("neither local nor reflecting 0, beyond the bound: X = {x:?}")));
                    }
                }
                if local != r0 {
                    return Ok(Fail(format!("local = {local} but reflects 0 = {r0}")));
                }
                if !local {
                    return Ok(Pass(format!(
                        "neither local nor reflecting 0: {}",
                        fl.reflects_zero.witness().unwrap_or("")
                    )));
                }
                if let Some(w) = center_is_sheaves(cx, &m)? {
                    return Ok(Fail(w));
                }
                let ccc = Flag::from_result(cartesian_closed_check(&m.p, cx.bound()))?;
                let pc = fl.pre_cohesive();
                match (flag_bool(&pc), flag_bool(&ccc)) {
                    (Some(a), Some(b)) if a != b => {
                        return Ok(Fail(format!("pre-cohesive = {a} but p^* cartesian closed = {b}")))
                    }
                    (Some(a), Some(_)) => Ok(Pass(format!(
                        "local and reflecting 0 with p^! constructed; center = sheaves; pre-cohesive = cartesian closed = {a}"
                    ))),
                    _ => Ok(Outcome::Unknown("pre-cohesion undecided".into())),
                }
            })(),
        ),
    }
    // the same equivalence for the canonical morphism when its inverse image
    // lands in decidable objects over a Boolean base
    let m = cx.canonical()?;
    let mut certificate = None;
    out.push(
        "canonical (finite analogue)",
        (|| {
            require_boolean!(&m);
            let fl = cx.flags(&m)?;
            require!(fl.hyperconnected, "hyperconnected");
            for a in cx.target(&m)?.iter() {
                let pa = m.p.inverse_image(a)?;
                if !is_decidable(&pa).decidable {
                    return Ok(Vacuous(format!("p^*A = {pa:?} is not decidable")));
                }
            }
            let (Some(local), Some(r0)) = (flag_bool(&fl.local), flag_bool(&fl.reflects_zero)) else {
                return Ok(Outcome::Unknown("local or reflecting 0 undecided".into()));
            };
            let beyond = if !local && r0 { zero_beyond_bound(cx, &m)? } else { None };
            if local != r0 && beyond.is_none() {
                return Ok(Fail(format!("local = {local} but reflects 0 = {r0}")));
            }
            if local {
                return Ok(Pass("local and reflecting 0".into()));
            }
            let r0_witness = match &beyond {
                Some(x) => format!("beyond the bound, p_* X = 0 for X = {x:?}"),
                None => fl.reflects_zero.witness().unwrap_or("").to_string(),
            };
            let refutation = refute_right_adjoint(&m.p, cx.bound())?;
            if !refutation.refuted() {
                return Ok(Fail("p_* fails to reflect 0 yet no candidate p^! is refuted".into()));
            }
            certificate = Some(format!("canonical (finite analogue): {r0_witness}"));
            Ok(Pass(format!(
                "reflects 0 fails: {r0_witness}; every candidate p^! refuted: {}; counit: {}; epimorphism: {}",
                refutation.all_candidates_refuted.as_deref().unwrap_or("not found"),
                refutation.counit_failure.as_deref().unwrap_or("built"),
                refutation.epi_witness.as_deref().unwrap_or("none")
            )))
        })(),
    );
    out.certificate = certificate;
    Ok(out)
}

type Check = fn(&Context) -> Result<Findings>;

fn check_of(id: &str) -> Option<Check> {
    Some(match id {
        "slice-hyperconnected" => slice_hyperconnected,
        "dec-coreflection-hyperconnected" => dec_coreflection_hyperconnected,
        "extensive-folk" => extensive_folk,
        "decidable-subterminal" => decidable_subterminal,
        "connected-iff-ccc" => connected_iff_ccc,
        "unit-monic-on-decidables" => unit_monic_on_decidables,
        "decidable-implies-discrete" => decidable_implies_discrete,
        "decidable-eq-discrete" => decidable_eq_discrete,
        "uiao" => uiao,
        "stably-locc-equivalences" => stably_locc_equivalences,
        "nullstellensatz-chain" => nullstellensatz_chain,
        "faithful-on-discrete" => faithful_on_discrete,
        "shriek-zero" => shriek_zero,
        "composite-equivalence" => composite_equivalence,
        "connected-implies-local" => connected_implies_local,
        "tau-negation" => tau_negation,
        "dense-lemma" => dense_lemma,
        "local-characterization" => local_characterization,
        "mclarty-corollary" => mclarty_corollary,
        _ => return None,
    })
}

fn rank(s: Status) -> u8 {
    match s {
        Status::Fail => 0,
        Status::Pass => 1,
        Status::Unknown => 2,
        Status::Vacuous => 3,
    }
}

/// Runs one statement in a context, sharing its caches.
pub fn run_in(cx: &Context, id: &str) -> Result<Verdict> {
    let check = check_of(id).ok_or_else(|| Error::UnknownStatement(id.to_string()))?;
    let start = Instant::now();
    let findings = match check(cx) {
        Ok(f) => f,
        Err(e) => Findings {
            instances: vec![("setup".into(), settle(Err(e)))],
            ..Findings::default()
        },
    };
    let instances: Vec<Instance> = findings
        .instances
        .into_iter()
        .map(|(morphism, o)| {
            let (status, detail) = match o {
                Pass(d) => (Status::Pass, d),
                Fail(d) => (Status::Fail, d),
                Vacuous(d) => (Status::Vacuous, d),
                Outcome::Unknown(d) => (Status::Unknown, d),
            };
            Instance { morphism, status, detail }
        })
        .collect();
    let status = instances
        .iter()
        .map(|i| i.status)
        .min_by_key(|&s| rank(s))
        .unwrap_or(Status::Vacuous);
    let witness = match status {
        Status::Pass => findings.certificate,
        _ => instances
            .iter()
            .find(|i| i.status == status)
            .map(|i| format!("{}: {}", i.morphism, i.detail)),
    };
    Ok(Verdict {
        id: id.to_string(),
        topos: cx.topos.name().to_string(),
        status,
        witness,
        instances,
        notes: findings.notes,
        bound: cx.cfg.bound,
        millis: start.elapsed().as_millis() as u64,
    })
}

pub fn run_check(id: &str, topos: Arc<PresheafTopos>, cfg: RunConfig) -> Result<Verdict> {
    run_in(&Context::new(topos, cfg), id)
}

/// A search for a pre-cohesive morphism that is not stably so.
#[derive(Clone, Debug, Serialize)]
pub struct Exploration {
    pub topos: String,
    pub pre_cohesive: Option<bool>,
    pub stably_pressential: Option<bool>,
    pub counterexample: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub bound: Bound,
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
    pub exploration: Vec<Exploration>,
    pub millis: u64,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| v.status == Status::Fail)
    }

    /// Statements without a single pass, among those that were run.
    pub fn uncovered(&self) -> Vec<String> {
        let mut passed: BTreeMap<&str, bool> = BTreeMap::new();
        for v in &self.verdicts {
            *passed.entry(v.id.as_str()).or_default() |= v.status == Status::Pass;
        }
        passed.into_iter().filter(|(_, p)| !p).map(|(id, _)| id.to_string()).collect()
    }

    pub fn counts(&self) -> BTreeMap<Status, usize> {
        let mut c = BTreeMap::new();
        for v in &self.verdicts {
            *c.entry(v.status).or_default() += 1;
        }
        c
    }
}

/// Runs the selected statements (all when `ids` is empty) on every topos;
/// toposes run in parallel and the report is ordered as the input.
pub fn run_suite(toposes: &[Arc<PresheafTopos>], ids: &[String], cfg: RunConfig) -> Result<SuiteReport> {
    for id in ids {
        if check_of(id).is_none() {
            return Err(Error::UnknownStatement(id.clone()));
        }
    }
    let selected: Vec<&str> = if ids.is_empty() {
        STATEMENTS.iter().map(|s| s.id).collect()
    } else {
        ids.iter().map(String::as_str).collect()
    };
    let start = Instant::now();
    let per_topos: Vec<(Vec<Verdict>, Exploration)> = toposes
        .par_iter()
        .map(|t| {
            let cx = Context::new(t.clone(), cfg);
            let verdicts = selected
                .iter()
                .map(|id| run_in(&cx, id))
                .collect::<Result<Vec<_>>>()?;
            Ok((verdicts, explore(&cx)))
        })
        .collect::<Result<_>>()?;
    let (verdicts, exploration): (Vec<Vec<Verdict>>, Vec<Exploration>) = per_topos.into_iter().unzip();
    Ok(SuiteReport {
        bound: cfg.bound,
        seed: cfg.seed,
        verdicts: verdicts.into_iter().flatten().collect(),
        exploration,
        millis: start.elapsed().as_millis() as u64,
    })
}

fn explore(cx: &Context) -> Exploration {
    let flags = cx.canonical().and_then(|m| cx.flags(&m)).ok();
    let pre_cohesive = flags.as_ref().and_then(|f| flag_bool(&f.pre_cohesive()));
    let stably = flags.as_ref().and_then(|f| flag_bool(&f.stably_pressential));
    Exploration {
        topos: cx.topos.name().to_string(),
        pre_cohesive,
        stably_pressential: stably,
        counterexample: pre_cohesive == Some(true) && stably == Some(false),
    }
}

/// The corpus toposes by name.
pub fn corpus() -> Result<Vec<Arc<PresheafTopos>>> {
    CORPUS.iter().map(|n| PresheafTopos::standard(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunConfig {
        RunConfig {
            bound: Bound::new(2, 3),
            ..RunConfig::default()
        }
    }

    #[test]
    fn inventory_ids_are_unique_and_checked() {
        let ids: std::collections::BTreeSet<&str> = list_statements().iter().map(|s| s.id).collect();
        assert_eq!(ids.len(), list_statements().len());
        assert_eq!(ids.len(), 19);
        for id in ids {
            assert!(check_of(id).is_some(), "{id}");
        }
    }

    #[test]
    fn unknown_statement_is_an_error() {
        let t = PresheafTopos::standard("sets").unwrap();
        assert!(matches!(run_check("no-such", t, quick()), Err(Error::UnknownStatement(_))));
    }

    #[test]
    fn pairs_are_deterministic() {
        let t = PresheafTopos::standard("sets").unwrap();
        let cx = Context::new(t, RunConfig { pair_cap: 5, ..quick() });
        let a = cx.pairs(10, 10);
        assert_eq!(a.len(), 5);
        assert_eq!(a, cx.pairs(10, 10));
        assert_eq!(cx.pairs(2, 2).len(), 4);
    }

    #[test]
    fn sets_is_never_failing() {
        let r = run_suite(&[PresheafTopos::standard("sets").unwrap()], &[], quick()).unwrap();
        assert_eq!(r.failures().count(), 0, "{:#?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn empty_suite_is_empty() {
        let r = run_suite(&[], &[], quick()).unwrap();
        assert!(r.verdicts.is_empty());
    }
}
