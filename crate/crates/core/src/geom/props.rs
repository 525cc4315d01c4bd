//! The property vocabulary of a geometric morphism, decided on samples.

use serde::Serialize;

use super::{Bound, GeomMorphism};
use crate::decidable::is_decidable;
use crate::enumerate::enumerate_presheaves;
use crate::error::{Error, Result};
use crate::presheaf::{binary_product, Exponential, HomSearch, Presheaf, PresheafMap};
use crate::sublattice::subobjects_of;

/// Cap on the number of sampled pairs in hom-bijection checks.
const PAIR_CAP: usize = 64;

/// Index pairs into two sample lists, at most [`PAIR_CAP`] of them, taken
/// front first: every pair among the first `k` samples precedes any pair
/// involving sample `k`. Samples come smallest first, so small witnesses
/// are never crowded out by the cap. With `unordered`, only `i <= j`.
fn front_pairs(n: usize, m: usize, unordered: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..n.max(m) {
        for i in 0..=k {
            let mut cands = vec![(i, k)];
            if !unordered && i != k {
                cands.push((k, i));
            }
            for (a, b) in cands {
                if a < n && b < m && (a == k || b == k) {
                    if out.len() == PAIR_CAP {
                        return out;
                    }
                    out.push((a, b));
                }
            }
        }
    }
    out
}

/// A three-valued verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "value", rename_all = "snake_case")]
pub enum Flag {
    True,
    False { witness: String },
    Unknown { reason: String },
}

impl Flag {
    pub fn is_true(&self) -> bool {
        matches!(self, Flag::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Flag::False { .. })
    }

    pub fn witness(&self) -> Option<&str> {
        match self {
            Flag::False { witness } => Some(witness),
            Flag::Unknown { reason } => Some(reason),
            Flag::True => None,
        }
    }

    fn no(witness: impl Into<String>) -> Flag {
        Flag::False {
            witness: witness.into(),
        }
    }

    /// Conjunction; the first non-true operand wins.
    pub fn and(self, other: Flag) -> Flag {
        match self {
            Flag::True => other,
            f => f,
        }
    }

    /// Bound errors become unknown and missing adjoints become false.
    pub fn from_result(r: Result<Flag>) -> Result<Flag> {
        match r {
            Ok(f) => Ok(f),
            Err(e) if e.is_bound() => Ok(Flag::Unknown { reason: e.to_string() }),
            Err(Error::MissingAdjoint(w)) => Ok(Flag::no(w)),
            Err(Error::NotConnected(w)) => Ok(Flag::no(w)),
            Err(e) => Err(e),
        }
    }
}

/// The flags of a morphism at a bound.
#[derive(Clone, Debug, Serialize)]
pub struct MorphismFlags {
    pub connected: Flag,
    /// Connected with monic counit and subobject-closed image.
    pub hyperconnected_by_counit: Flag,
    pub tau_omega_iso: Flag,
    /// Both of the above.
    pub hyperconnected: Flag,
    pub essential: Flag,
    pub pressential: Flag,
    pub local: Flag,
    pub nullstellensatz: Flag,
    pub stably_pressential: Flag,
    pub reflects_zero: Flag,
    pub bound: Bound,
}

impl MorphismFlags {
    /// Local, hyperconnected and pressential.
    pub fn pre_cohesive(&self) -> Flag {
        self.local
            .clone()
            .and(self.hyperconnected.clone())
            .and(self.pressential.clone())
    }
}

/// Which adjunction of the string to verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Adjunction {
    /// `p_! -| p^*`
    ShriekInverse,
    /// `p^* -| p_*`
    InverseDirect,
    /// `p_* -| p^!`
    DirectUpper,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdjunctionReport {
    pub adjunction: Adjunction,
    pub triangles_checked: usize,
    pub pairs_checked: usize,
    pub maps_checked: usize,
    pub failure: Option<String>,
}

fn is_identity(m: &PresheafMap) -> bool {
    m.dom().same_shape(m.cod()) && m.comps().iter().all(|row| row.iter().enumerate().all(|(i, &v)| i == v))
}

fn same_map(a: &PresheafMap, b: &PresheafMap) -> bool {
    a.comps() == b.comps() && a.dom().same_shape(b.dom()) && a.cod().same_shape(b.cod())
}

/// Objects of the source topos within the bound.
pub fn source_samples(p: &GeomMorphism, bound: Bound) -> Result<Vec<Presheaf>> {
    enumerate_presheaves(
        p.source.site(),
        bound.per_object,
        bound.total,
        crate::decidable::enumeration_budget(&p.source),
    )
}

type Obj<'a> = Box<dyn Fn(&Presheaf) -> Result<Presheaf> + 'a>;
type Mor<'a> = Box<dyn Fn(&PresheafMap) -> Result<PresheafMap> + 'a>;
type Nat<'a> = Box<dyn Fn(&Presheaf) -> Result<PresheafMap> + 'a>;

struct AdjData<'a> {
    left: Obj<'a>,
    left_map: Mor<'a>,
    right: Obj<'a>,
    right_map: Mor<'a>,
    unit: Nat<'a>,
    counit: Nat<'a>,
}

/// Both triangle identities on every sample, and the explicit transposes
/// `f -> R(f) . unit` and `g -> counit . L(g)` inverse to each other on
/// sampled pairs.
pub fn verify_adjunction(
    p: &GeomMorphism,
    which: Adjunction,
    source: &[Presheaf],
    target: &[Presheaf],
) -> Result<AdjunctionReport> {
    let adj = match which {
        Adjunction::ShriekInverse => AdjData {
            left: Box::new(|x| p.shriek(x)),
            left_map: Box::new(|f| p.shriek_map(f)),
            right: Box::new(|a| p.inverse_image(a)),
            right_map: Box::new(|f| p.inverse_image_map(f)),
            unit: Box::new(|x| p.sigma(x)),
            counit: Box::new(|a| p.tau(a)),
        },
        Adjunction::InverseDirect => AdjData {
            left: Box::new(|a| p.inverse_image(a)),
            left_map: Box::new(|f| p.inverse_image_map(f)),
            right: Box::new(|x| p.direct_image(x)),
            right_map: Box::new(|f| p.direct_image_map(f)),
            unit: Box::new(|a| p.alpha(a)),
            counit: Box::new(|x| p.beta(x)),
        },
        Adjunction::DirectUpper => AdjData {
            left: Box::new(|x| p.direct_image(x)),
            left_map: Box::new(|f| p.direct_image_map(f)),
            right: Box::new(|a| p.upper(a)),
            right_map: Box::new(|f| p.upper_map(f)),
            unit: Box::new(|x| p.eta_upper(x)),
            counit: Box::new(|a| p.eps_upper(a)),
        },
    };
    // the left adjoint's domain
    let (lefts, rights) = match which {
        Adjunction::InverseDirect => (target, source),
        _ => (source, target),
    };
    let budget = p.budget();
    let mut report = AdjunctionReport {
        adjunction: which,
        triangles_checked: 0,
        pairs_checked: 0,
        maps_checked: 0,
        failure: None,
    };
    macro_rules! fail {
        ($($t:tt)*) => {{
            report.failure = Some(format!($($t)*));
            return Ok(report);
        }};
    }
    for c in lefts {
        let lc = (adj.left)(c)?;
        let t = (adj.counit)(&lc)?.after(&(adj.left_map)(&(adj.unit)(c)?)?)?;
        if !is_identity(&t) {
            fail!("triangle counit.L(unit) is not the identity at {c:?}");
        }
        report.triangles_checked += 1;
    }
    for d in rights {
        let rd = (adj.right)(d)?;
        let t = (adj.right_map)(&(adj.counit)(d)?)?.after(&(adj.unit)(&rd)?)?;
        if !is_identity(&t) {
            fail!("triangle R(counit).unit is not the identity at {d:?}");
        }
        report.triangles_checked += 1;
    }
    for (ci, di) in front_pairs(lefts.len(), rights.len(), false) {
        let (c, d) = (&lefts[ci], &rights[di]);
        let lc = (adj.left)(c)?;
        let eta = (adj.unit)(c)?;
        let rd = (adj.right)(d)?;
        let eps = (adj.counit)(d)?;
        let left_maps = HomSearch::new(&lc, d).budget(budget).collect()?;
        let right_maps = HomSearch::new(c, &rd).budget(budget).collect()?;
        if left_maps.len() != right_maps.len() {
            fail!(
                "|Hom(L{c:?}, {d:?})| = {} but |Hom({c:?}, R{d:?})| = {}",
                left_maps.len(),
                right_maps.len()
            );
        }
        for f in &left_maps {
            let g = (adj.right_map)(f)?.after(&eta)?;
            let back = eps.after(&(adj.left_map)(&g)?)?;
            if !same_map(&back, f) {
                fail!("transpose does not return {f:?} for the pair {c:?}, {d:?}");
            }
            report.maps_checked += 1;
        }
        for g in &right_maps {
            let f = eps.after(&(adj.left_map)(g)?)?;
            let back = (adj.right_map)(&f)?.after(&eta)?;
            if !same_map(&back, g) {
                fail!("transpose does not return {g:?} for the pair {c:?}, {d:?}");
            }
            report.maps_checked += 1;
        }
        report.pairs_checked += 1;
    }
    Ok(report)
}

fn adjunction_flag(p: &GeomMorphism, which: Adjunction, source: &[Presheaf], target: &[Presheaf]) -> Result<Flag> {
    let r = verify_adjunction(p, which, source, target)?;
    Ok(match r.failure {
        None => Flag::True,
        Some(w) => Flag::no(w),
    })
}

/// `p^*` fully faithful: every unit `alpha_A` invertible, and hom counts agree.
fn connected(p: &GeomMorphism, target: &[Presheaf]) -> Result<Flag> {
    for a in target {
        if !p.alpha(a)?.is_iso() {
            return Ok(Flag::no(format!("unit alpha is not invertible at {a:?}")));
        }
    }
    for (i, j) in front_pairs(target.len(), target.len(), false) {
        let (a, b) = (&target[i], &target[j]);
        let n = HomSearch::new(a, b).budget(p.budget()).count()?;
        let m = HomSearch::new(&p.inverse_image(a)?, &p.inverse_image(b)?)
            .budget(p.budget())
            .count()?;
        if n != m {
            return Ok(Flag::no(format!("|Hom({a:?}, {b:?})| = {n} but |Hom(p*A, p*B)| = {m}")));
        }
    }
    Ok(Flag::True)
}

fn counit_monic(p: &GeomMorphism, source: &[Presheaf]) -> Result<Flag> {
    for x in source {
        let b = p.beta(x)?;
        if !b.is_monic() {
            return Ok(Flag::no(format!("counit beta is not monic at {x:?}: {b:?}")));
        }
    }
    Ok(Flag::True)
}

/// Every subobject of some `p^*A` is discrete.
fn subobject_closed(p: &GeomMorphism, target: &[Presheaf]) -> Result<Flag> {
    for a in target {
        let pa = p.inverse_image(a)?;
        for u in subobjects_of(&pa, p.budget())? {
            let (ux, _) = u.to_presheaf();
            if !p.beta(&ux)?.is_iso() {
                return Ok(Flag::no(format!("subobject {u:?} of p*{a:?} is not in the image of p*")));
            }
        }
    }
    Ok(Flag::True)
}

/// `tau: p_* Omega -> Omega_S` classifying `p_* top`.
#[derive(Clone, Debug)]
pub struct OmegaComparison {
    pub tau: PresheafMap,
    /// Pulling `top` back along `tau` gives exactly `p_* top`.
    pub pullback_ok: bool,
    pub is_iso: bool,
}

pub fn omega_comparison(p: &GeomMorphism) -> Result<OmegaComparison> {
    let om = p.source.omega();
    let pt = p.direct_image_map(&om.top)?;
    let cl = p.target.classifier()?;
    let u = pt.image();
    let tau = cl.classify(&u)?;
    let pullback_ok = cl.pullback_top(&tau) == u;
    let is_iso = tau.is_iso();
    Ok(OmegaComparison { tau, pullback_ok, is_iso })
}

fn tau_flag(p: &GeomMorphism) -> Result<Flag> {
    let c = omega_comparison(p)?;
    Ok(if !c.pullback_ok {
        Flag::no("tau does not classify p_* top")
    } else if c.is_iso {
        Flag::True
    } else {
        Flag::no(format!("tau_Omega is not invertible: {:?}", c.tau))
    })
}

fn essential(p: &GeomMorphism, source: &[Presheaf], target: &[Presheaf]) -> Result<Flag> {
    adjunction_flag(p, Adjunction::ShriekInverse, source, target)
}

/// `p_!` preserves the terminal object and binary products of samples.
pub fn shriek_preserves_products(p: &GeomMorphism, source: &[Presheaf]) -> Result<Flag> {
    let one = Presheaf::terminal(p.source.site());
    let s1 = p.shriek(&one)?;
    if !s1.sizes().iter().all(|&n| n == 1) {
        return Ok(Flag::no(format!("p_!1 = {s1:?} is not terminal")));
    }
    for (i, j) in front_pairs(source.len(), source.len(), true) {
        let (x, y) = (&source[i], &source[j]);
        let xy = binary_product(x, y);
        let sx = p.shriek(x)?;
        let sy = p.shriek(y)?;
        let target = binary_product(&sx, &sy);
        let l0 = p.shriek_map(&xy.legs[0])?;
        let l1 = p.shriek_map(&xy.legs[1])?;
        let cmp = target.mediate(&[l0, l1])?;
        if !cmp.is_iso() {
            return Ok(Flag::no(format!(
                "p_!(X x Y) -> p_!X x p_!Y is not invertible for X = {x:?}, Y = {y:?}"
            )));
        }
    }
    Ok(Flag::True)
}

fn local(p: &GeomMorphism, source: &[Presheaf], target: &[Presheaf]) -> Result<Flag> {
    let adj = adjunction_flag(p, Adjunction::DirectUpper, source, target)?;
    if !adj.is_true() {
        return Ok(adj);
    }
    for a in target {
        if !p.eps_upper(a)?.is_iso() {
            return Ok(Flag::no(format!("p^! is not fully faithful: counit not invertible at {a:?}")));
        }
    }
    Ok(Flag::True)
}

fn nullstellensatz(p: &GeomMorphism, source: &[Presheaf]) -> Result<Flag> {
    for x in source {
        let t = p.theta(x)?;
        if !t.is_epic() {
            return Ok(Flag::no(format!("theta is not epic at {x:?}: {t:?}")));
        }
    }
    Ok(Flag::True)
}

/// `p_* X` empty only for empty `X`.
pub fn reflects_zero(p: &GeomMorphism, source: &[Presheaf]) -> Result<Flag> {
    for x in source {
        if !x.is_empty() && p.direct_image(x)?.is_empty() {
            return Ok(Flag::no(format!("p_* X = 0 for the non-empty X = {x:?}")));
        }
    }
    Ok(Flag::True)
}

/// Slices over target objects with at most two elements.
fn stably_pressential(p: &GeomMorphism, target: &[Presheaf], bound: Bound) -> Result<Flag> {
    if p.is_dec() {
        // a Boolean topos has only decidable objects and the coreflection is
        // the identity
        if p.source.is_boolean() {
            return Ok(Flag::True);
        }
        return Ok(Flag::Unknown {
            reason: "slices are realized only for morphisms induced by a functor".into(),
        });
    }
    let small = Bound::new(2, 2);
    for b in target.iter().filter(|b| small.admits(b)) {
        let s = super::slice(p, b)?;
        let samples = source_samples(&s.morphism, slice_bound(bound))?;
        let f = Flag::from_result(shriek_preserves_products(&s.morphism, &samples))?;
        if !f.is_true() {
            return Ok(match f {
                Flag::False { witness } => Flag::no(format!("over B = {b:?}: {witness}")),
                other => other,
            });
        }
    }
    Ok(Flag::True)
}

/// Objects of a slice are tuples of objects of the base; keep them small.
pub fn slice_bound(bound: Bound) -> Bound {
    Bound::new(bound.per_object.min(2), bound.total.min(4))
}

/// Connected, with monic counit, subobject-closed image and invertible
/// `tau_Omega`.
pub fn hyperconnected(p: &GeomMorphism, bound: Bound) -> Result<Flag> {
    let source = source_samples(p, bound)?;
    let target = p.target.samples(bound)?;
    let f = |r| Flag::from_result(r);
    Ok(f(connected(p, &target))?
        .and(f(counit_monic(p, &source))?)
        .and(f(subobject_closed(p, &target))?)
        .and(f(tau_flag(p))?))
}

/// Every flag, each computed independently.
pub fn classify_morphism(p: &GeomMorphism, bound: Bound) -> Result<MorphismFlags> {
    let source = source_samples(p, bound)?;
    let target = p.target.samples(bound)?;
    let f = |r| Flag::from_result(r);
    let connected = f(connected(p, &target))?;
    let monic = f(counit_monic(p, &source))?;
    let closed = f(subobject_closed(p, &target))?;
    let hyper_counit = connected.clone().and(monic).and(closed);
    let tau = f(tau_flag(p))?;
    let hyperconnected = hyper_counit.clone().and(tau.clone());
    let essential = f(essential(p, &source, &target))?;
    let pressential = if essential.is_true() {
        f(shriek_preserves_products(p, &source))?
    } else {
        essential.clone()
    };
    let local = f(local(p, &source, &target))?;
    let nullstellensatz = if connected.is_true() && essential.is_true() {
        f(nullstellensatz(p, &source))?
    } else {
        Flag::Unknown {
            reason: "theta needs a connected essential morphism".into(),
        }
    };
    let stably_pressential = if pressential.is_true() {
        f(stably_pressential(p, &target, bound))?
    } else {
        pressential.clone()
    };
    let reflects_zero = f(reflects_zero(p, &source))?;
    Ok(MorphismFlags {
        connected,
        hyperconnected_by_counit: hyper_counit,
        tau_omega_iso: tau,
        hyperconnected,
        essential,
        pressential,
        local,
        nullstellensatz,
        stably_pressential,
        reflects_zero,
        bound,
    })
}

/// Whether `p^*` preserves exponentials of sampled base objects.
pub fn cartesian_closed_check(p: &GeomMorphism, bound: Bound) -> Result<Flag> {
    let target = p.target.samples(bound)?;
    let budget = p.budget();
    for (i, j) in front_pairs(target.len(), target.len(), false) {
        let (a, b) = (&target[i], &target[j]);
        let ex = Exponential::new(a, b, budget)?;
        if p.is_dec() {
            if !is_decidable(&ex.object).decidable {
                return Ok(Flag::no(format!("B^A is not decidable for A = {a:?}, B = {b:?}")));
            }
            continue;
        }
        let pi = p.functor().expect("functor kind");
        let (pe, pa, pb) = (p.inverse_image(&ex.object)?, p.inverse_image(a)?, p.inverse_image(b)?);
        let zx = binary_product(&pe, &pa);
        let site = p.source.site();
        let comps = site
            .objects()
            .map(|d| {
                let dp = pi.on_objects[d];
                (0..zx.apex.size(d))
                    .map(|q| {
                        let t = zx.tuple(d, q);
                        let r = ex.product.lookup(dp, &[t[0], t[1]]).expect("product element");
                        ex.eval.apply(dp, r)
                    })
                    .collect()
            })
            .collect();
        let h = PresheafMap::new(zx.apex.clone(), pb.clone(), comps)?;
        let target_ex = Exponential::new(&pa, &pb, budget)?;
        let cmp = target_ex.curry(&zx, &h)?;
        if !cmp.is_iso() {
            return Ok(Flag::no(format!(
                "p*(B^A) -> (p*B)^(p*A) is not invertible for A = {a:?}, B = {b:?}"
            )));
        }
    }
    Ok(Flag::True)
}

#[derive(Clone, Debug, Serialize)]
pub struct ShriekZero {
    pub upper_zero_sizes: Vec<usize>,
    pub preserves_zero: bool,
    pub subterminal: bool,
}

/// `p^!0`: whether it is initial, and whether it is subterminal.
pub fn shriek_preserves_zero(p: &GeomMorphism) -> Result<ShriekZero> {
    let z = p.upper(&p.target.initial())?;
    let sizes = z.sizes();
    Ok(ShriekZero {
        preserves_zero: z.is_empty(),
        subterminal: sizes.iter().all(|&n| n <= 1),
        upper_zero_sizes: sizes,
    })
}

/// Evidence that `p_*` has no right adjoint.
#[derive(Clone, Debug, Serialize)]
pub struct Refutation {
    /// An epimorphism that `p_*` does not send to an epimorphism.
    pub epi_witness: Option<String>,
    /// Why the forced counit of the candidate `p^!` cannot be built.
    pub counit_failure: Option<String>,
    /// A base object `A` such that every sampled `Y` is refuted as `p^!A`
    /// by some `X` with `|Hom(X, Y)| != |Hom(p_*X, A)|`.
    pub all_candidates_refuted: Option<String>,
    pub candidates_checked: usize,
}

impl Refutation {
    pub fn refuted(&self) -> bool {
        self.epi_witness.is_some() || self.counit_failure.is_some() || self.all_candidates_refuted.is_some()
    }
}

pub fn refute_right_adjoint(p: &GeomMorphism, bound: Bound) -> Result<Refutation> {
    let source = source_samples(p, bound)?;
    let target = p.target.samples(bound)?;
    let budget = p.budget();
    let mut out = Refutation {
        epi_witness: None,
        counit_failure: None,
        all_candidates_refuted: None,
        candidates_checked: 0,
    };
    // a left adjoint preserves epimorphisms; the map to 1 is epic whenever X
    // has an element over every object
    'epi: for x in &source {
        if x.sizes().iter().any(|&n| n == 0) {
            continue;
        }
        let e = PresheafMap::to_terminal(x);
        let pe = p.direct_image_map(&e)?;
        if !pe.is_epic() {
            out.epi_witness = Some(format!("X = {x:?} -> 1 is epic but p_* of it is {pe:?}"));
            break 'epi;
        }
    }
    for a in &target {
        if let Err(Error::MissingAdjoint(w)) = p.eps_upper(a) {
            out.counit_failure = Some(w);
            break;
        }
    }
    let direct: Vec<Presheaf> = source.iter().map(|x| p.direct_image(x)).collect::<Result<_>>()?;
    for a in &target {
        let mut all = true;
        for y in &source {
            out.candidates_checked += 1;
            let mut refuted = false;
            for (x, px) in source.iter().zip(&direct) {
                let n = HomSearch::new(x, y).budget(budget).count()?;
                let m = HomSearch::new(px, a).budget(budget).count()?;
                if n != m {
                    refuted = true;
                    break;
                }
            }
            if !refuted {
                all = false;
                break;
            }
        }
        if all {
            out.all_candidates_refuted = Some(format!(
                "no sampled object Y satisfies Hom(X, Y) = Hom(p_*X, A) for A = {a:?}"
            ));
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::front_pairs;

    #[test]
    fn front_pairs_fill_squares_first() {
        let p = front_pairs(3, 3, false);
        assert_eq!(p.len(), 9);
        assert_eq!(&p[..4], &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let q = front_pairs(4, 4, true);
        assert_eq!(q, vec![(0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 2), (0, 3), (1, 3), (2, 3), (3, 3)]);
        assert_eq!(front_pairs(2, 5, false).len(), 10);
        assert_eq!(front_pairs(100, 100, true).len(), super::PAIR_CAP);
    }
}
