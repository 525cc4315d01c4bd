//! Geometric morphisms out of a presheaf topos, with every adjoint that
//! exists computed explicitly and every unit and counit materialized.
//!
//! Two kinds are supported. A functor `pi: D -> D'` between sites gives the
//! essential morphism `PSh(D) -> PSh(D')` with `pi_!` and `pi_*` the Kan
//! extensions of reindexing; the canonical morphism to sets and every slice of
//! it are of this kind. The second kind has the decidable objects as base,
//! with the coreflection as direct image and the decidable reflection as
//! leftmost adjoint.
//!
//! In both cases the rightmost adjoint is the one forced by adjointness,
//! `p^!A(c) = Hom(p_* y(c), A)`, and its counit is filled in from the triangle
//! identity it must satisfy. When the filling fails no right adjoint exists.

mod props;
mod slice;
mod uiao;

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::decidable::{dec_objects, dec_reflection, is_decidable, largest_decidable_subobject};
use crate::enumerate::enumerate_presheaves;
use crate::error::{Error, Result};
use crate::fincat::{FinCategory, FinFunctor, MorId, ObjId};
use crate::presheaf::{hom_position, HomSearch, OmegaData, Presheaf, PresheafMap, PresheafTopos};
use crate::sublattice::{subobjects_of, Subobject};

pub use props::{
    cartesian_closed_check, classify_morphism, hyperconnected, omega_comparison, refute_right_adjoint,
    reflects_zero, shriek_preserves_products, shriek_preserves_zero, slice_bound, source_samples, verify_adjunction, Adjunction, AdjunctionReport, Flag, MorphismFlags,
    OmegaComparison, Refutation, ShriekZero,
};
pub use slice::{slice, slice_check, SliceCheck, SlicedMorphism};
pub use uiao::{extend_to_sheaf, sheaf_samples, uiao_for, uiao_verify, Sections, UiaoReport};

/// Size limits for the objects over which properties are sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    /// Elements over each object of the site.
    pub per_object: usize,
    /// Elements overall.
    pub total: usize,
}

impl Bound {
    pub fn new(per_object: usize, total: usize) -> Bound {
        Bound { per_object, total }
    }

    /// `n` per object and `n + 2` overall.
    pub fn of(n: usize) -> Bound {
        Bound::new(n, n + 2)
    }

    pub fn admits(&self, x: &Presheaf) -> bool {
        x.total() <= self.total && x.sizes().iter().all(|&n| n <= self.per_object)
    }
}

/// The decidable objects of a presheaf topos, up to a bound.
#[derive(Debug)]
pub struct DecBase {
    pub ambient: Arc<PresheafTopos>,
    pub bound: Bound,
    /// One decidable presheaf per isomorphism class within the bound.
    pub objects: Vec<Presheaf>,
    classifier: OnceLock<std::result::Result<Classifier, String>>,
}

impl DecBase {
    pub fn new(ambient: Arc<PresheafTopos>, bound: Bound) -> Result<Arc<DecBase>> {
        let objects = dec_objects(&ambient, bound.per_object, bound.total)?;
        Ok(Arc::new(DecBase {
            ambient,
            bound,
            objects,
            classifier: OnceLock::new(),
        }))
    }
}

/// The codomain of a geometric morphism.
#[derive(Clone, Debug)]
pub enum Base {
    Presheaves(Arc<PresheafTopos>),
    Dec(Arc<DecBase>),
}

impl Base {
    pub fn name(&self) -> String {
        match self {
            Base::Presheaves(t) => t.name().to_string(),
            Base::Dec(d) => format!("Dec({})", d.ambient.name()),
        }
    }

    pub fn site(&self) -> &Arc<FinCategory> {
        match self {
            Base::Presheaves(t) => t.site(),
            Base::Dec(d) => d.ambient.site(),
        }
    }

    pub fn budget(&self) -> u64 {
        match self {
            Base::Presheaves(t) => t.budget(),
            Base::Dec(d) => d.ambient.budget(),
        }
    }

    pub fn terminal(&self) -> Presheaf {
        Presheaf::terminal(self.site())
    }

    pub fn initial(&self) -> Presheaf {
        Presheaf::initial(self.site())
    }

    /// Objects of the base within the bound, one per isomorphism class.
    pub fn samples(&self, bound: Bound) -> Result<Vec<Presheaf>> {
        match self {
            Base::Presheaves(t) => enumerate_presheaves(
                t.site(),
                bound.per_object,
                bound.total,
                crate::decidable::enumeration_budget(t),
            ),
            Base::Dec(d) => Ok(d.objects.iter().filter(|x| bound.admits(x)).cloned().collect()),
        }
    }

    /// Whether `a` is an object of the base.
    pub fn contains(&self, a: &Presheaf) -> bool {
        match self {
            Base::Presheaves(t) => crate::presheaf::same_site(t.site(), a.site()),
            Base::Dec(d) => crate::presheaf::same_site(d.ambient.site(), a.site()) && is_decidable(a).decidable,
        }
    }

    pub fn classifier(&self) -> Result<Classifier> {
        match self {
            Base::Presheaves(t) => Ok(Classifier::of_sieves(t.omega().clone())),
            Base::Dec(d) => d
                .classifier
                .get_or_init(|| Classifier::search(&d.objects, d.ambient.budget()).map_err(|e| e.to_string()))
                .clone()
                .map_err(Error::MissingAdjoint),
        }
    }

    /// Boolean when double negation is the identity on the classifier.
    pub fn is_boolean(&self) -> Result<bool> {
        match self {
            Base::Presheaves(t) => Ok(t.is_boolean()),
            Base::Dec(_) => {
                let cl = self.classifier()?;
                let neg = cl.negation()?;
                Ok(neg.after(&neg)? == PresheafMap::identity(&cl.omega))
            }
        }
    }
}

/// A subobject classifier `top: 1 -> omega`, given by sieves or found by a
/// universal-property search.
#[derive(Clone, Debug)]
pub struct Classifier {
    pub omega: Presheaf,
    pub top: PresheafMap,
    sieves: Option<Arc<OmegaData>>,
    budget: u64,
}

impl Classifier {
    pub fn of_sieves(om: Arc<OmegaData>) -> Classifier {
        Classifier {
            omega: om.omega.clone(),
            top: om.top.clone(),
            sieves: Some(om),
            budget: crate::presheaf::DEFAULT_BUDGET,
        }
    }

    /// The first `(W, t)` among `objects` such that pulling `t` back is a
    /// bijection `Hom(D, W) -> Sub(D)` for every `D` in `objects`.
    pub fn search(objects: &[Presheaf], budget: u64) -> Result<Classifier> {
        let subs: Vec<Vec<Subobject>> = objects
            .iter()
            .map(|d| subobjects_of(d, budget))
            .collect::<Result<_>>()?;
        for w in objects {
            for g in w.global_elements() {
                let one = Presheaf::terminal(w.site());
                let comps = g.iter().map(|&e| vec![e]).collect();
                let top = PresheafMap::new(one, w.clone(), comps)?;
                let cand = Classifier {
                    omega: w.clone(),
                    top,
                    sieves: None,
                    budget,
                };
                if cand.classifies(objects, &subs)? {
                    return Ok(cand);
                }
            }
        }
        Err(Error::MissingAdjoint("no subobject classifier among the decidable objects at this bound".into()))
    }

    fn classifies(&self, objects: &[Presheaf], subs: &[Vec<Subobject>]) -> Result<bool> {
        for (d, s) in objects.iter().zip(subs) {
            let maps = HomSearch::new(d, &self.omega).budget(self.budget).collect()?;
            if maps.len() != s.len() {
                return Ok(false);
            }
            let mut seen: Vec<Subobject> = maps.iter().map(|m| self.pullback_top(m)).collect();
            seen.sort_by(|a, b| a.mask().cmp(b.mask()));
            seen.dedup();
            if seen.len() != s.len() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Elements sent to the point `top`.
    pub fn pullback_top(&self, chi: &PresheafMap) -> Subobject {
        let x = chi.dom();
        let mask = x
            .site()
            .objects()
            .map(|c| (0..x.size(c)).map(|e| chi.apply(c, e) == self.top.apply(c, 0)).collect())
            .collect();
        Subobject::from_mask_unchecked(x.clone(), mask)
    }

    /// The classifying map of `u`.
    pub fn classify(&self, u: &Subobject) -> Result<PresheafMap> {
        if let Some(om) = &self.sieves {
            return om.classify(u).retype(u.ambient(), &self.omega);
        }
        let mut found = None;
        HomSearch::new(u.ambient(), &self.omega)
            .budget(self.budget)
            .for_each(|comps| {
                let m = PresheafMap::unchecked(u.ambient().clone(), self.omega.clone(), comps.to_vec());
                if self.pullback_top(&m) == *u {
                    found = Some(m);
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })?;
        found.ok_or_else(|| Error::LawFailure(format!("{u:?} has no classifying map")))
    }

    /// `top` as a subobject of the classifier.
    pub fn top_subobject(&self) -> Subobject {
        self.top.image()
    }

    /// The point classifying the empty subobject of `1`.
    pub fn bottom(&self) -> Result<PresheafMap> {
        self.classify(&Subobject::empty(self.top.dom()))
    }

    /// Negation: the classifying map of the complement of `top`.
    pub fn negation(&self) -> Result<PresheafMap> {
        self.classify(&self.top_subobject().neg())
    }
}

/// How the adjoints are computed.
#[derive(Clone, Debug)]
enum Kind {
    Functor(Arc<FunctorData>),
    Dec,
}

/// Precomputed data for `pi: D -> D'`.
#[derive(Debug)]
struct FunctorData {
    pi: FinFunctor,
    /// `pi^* y(d')` for each object `d'` of `D'`.
    probes: Vec<Presheaf>,
    /// Components of `pi^* y(u)` for each arrow `u` of `D'`.
    probe_maps: Vec<Vec<Vec<usize>>>,
}

/// `Ran_pi X` with its families, so that maps can be pushed forward.
struct RanData {
    object: Presheaf,
    families: Vec<Vec<Vec<Vec<usize>>>>,
    index: Vec<HashMap<Vec<Vec<usize>>, usize>>,
}

/// `Lan_pi X` with the class of each triple `(d, x, f)`.
struct LanData {
    object: Presheaf,
    /// Class of `(d, x, position of f in hom(d', pi d))` at `d'`.
    class: Vec<HashMap<(ObjId, usize, usize), usize>>,
    /// A representative triple of each class.
    reps: Vec<Vec<(ObjId, usize, usize)>>,
}

/// `p^!A` with its families `p_* y(c) -> A`.
struct UpperData {
    object: Presheaf,
    families: Vec<Vec<Vec<Vec<usize>>>>,
    index: Vec<HashMap<Vec<Vec<usize>>, usize>>,
}

/// `p_* y(c)` for each object and `p_* y(g)` for each arrow of the source site.
#[derive(Debug)]
struct Representables {
    images: Vec<Presheaf>,
    maps: Vec<PresheafMap>,
}

/// A geometric morphism `p: E -> S` from a presheaf topos.
#[derive(Debug)]
pub struct GeomMorphism {
    pub name: String,
    pub source: Arc<PresheafTopos>,
    pub target: Base,
    kind: Kind,
    representables: OnceLock<std::result::Result<Arc<Representables>, String>>,
}

/// The Yoneda map `y(c) -> X` of `x` in `X(c)`.
pub fn yoneda_map(x: &Presheaf, c: ObjId, e: usize) -> PresheafMap {
    let site = x.site();
    let yc = Presheaf::yoneda(site, c);
    let comps = site
        .objects()
        .map(|d| site.hom(d, c).iter().map(|&g| x.act(g, e)).collect())
        .collect();
    PresheafMap::unchecked(yc, x.clone(), comps)
}

/// `y(g): y(c1) -> y(c2)` for `g: c1 -> c2`.
pub fn yoneda_arrow(site: &Arc<FinCategory>, g: MorId) -> PresheafMap {
    let (c1, c2) = (site.src(g), site.tgt(g));
    let comps = site
        .objects()
        .map(|d| {
            site.hom(d, c1)
                .iter()
                .map(|&h| hom_position(site, site.comp(g, h)))
                .collect()
        })
        .collect();
    PresheafMap::unchecked(Presheaf::yoneda(site, c1), Presheaf::yoneda(site, c2), comps)
}

fn family_label(x: &Presheaf, fam: &[Vec<usize>]) -> String {
    let parts: Vec<String> = fam
        .iter()
        .enumerate()
        .map(|(d, row)| row.iter().map(|&v| x.label(d, v)).collect::<Vec<_>>().join(","))
        .collect();
    format!("[{}]", parts.join("|"))
}

fn compose_comps(outer: &[Vec<usize>], inner: &[Vec<usize>]) -> Vec<Vec<usize>> {
    inner
        .iter()
        .zip(outer)
        .map(|(row, o)| row.iter().map(|&v| o[v]).collect())
        .collect()
}

impl GeomMorphism {
    /// The essential morphism induced by `pi: D -> D'`.
    pub fn along(
        name: impl Into<String>,
        source: Arc<PresheafTopos>,
        target: Arc<PresheafTopos>,
        pi: FinFunctor,
    ) -> Result<GeomMorphism> {
        if !crate::presheaf::same_site(&pi.source, source.site())
            || !crate::presheaf::same_site(&pi.target, target.site())
        {
            return Err(Error::Mismatch("functor does not match the two sites".into()));
        }
        let tsite = target.site().clone();
        let probes: Vec<Presheaf> = tsite
            .objects()
            .map(|d| Presheaf::yoneda(&tsite, d).reindex(&pi))
            .collect::<Result<_>>()?;
        let probe_maps = tsite
            .morphisms()
            .map(|u| {
                let yu = yoneda_arrow(&tsite, u);
                pi.source
                    .objects()
                    .map(|d| yu.comps()[pi.on_objects[d]].clone())
                    .collect()
            })
            .collect();
        Ok(GeomMorphism {
            name: name.into(),
            source,
            target: Base::Presheaves(target),
            kind: Kind::Functor(Arc::new(FunctorData { pi, probes, probe_maps })),
            representables: OnceLock::new(),
        })
    }

    /// The canonical morphism to sets: global sections, components, constants.
    pub fn canonical(source: Arc<PresheafTopos>) -> Result<GeomMorphism> {
        let sets = PresheafTopos::with_budget("sets", crate::fincat::terminal(), source.budget());
        let site = source.site().clone();
        let pi = FinFunctor::new(
            site.clone(),
            sets.site().clone(),
            vec![0; site.num_objects()],
            vec![0; site.num_morphisms()],
        )?;
        GeomMorphism::along(format!("{} -> sets", source.name()), source, sets, pi)
    }

    /// The identity morphism, realized along the identity functor.
    pub fn identity(source: Arc<PresheafTopos>) -> Result<GeomMorphism> {
        let site = source.site().clone();
        let pi = FinFunctor::new(
            site.clone(),
            site.clone(),
            site.objects().collect(),
            site.morphisms().collect(),
        )?;
        GeomMorphism::along(format!("id {}", source.name()), source.clone(), source, pi)
    }

    /// The morphism `E -> Dec(E)` whose direct image is the coreflection.
    /// Fails when some sampled object has no largest decidable subobject or
    /// a map from a decidable object escapes it.
    pub fn from_dec_coreflection(source: Arc<PresheafTopos>, bound: Bound) -> Result<GeomMorphism> {
        let base = DecBase::new(source.clone(), bound)?;
        let samples = enumerate_presheaves(
            source.site(),
            bound.per_object,
            bound.total,
            crate::decidable::enumeration_budget(&source),
        )?;
        for x in &samples {
            match crate::decidable::dec_coreflection(x, &base.objects, source.budget())? {
                crate::decidable::CoreflectionVerdict::Found(_) => {}
                crate::decidable::CoreflectionVerdict::NoMaximum { maximal } => {
                    return Err(Error::MissingAdjoint(format!(
                        "no right adjoint up to bound: {x:?} has {} maximal decidable subobjects {maximal:?}",
                        maximal.len()
                    )))
                }
                crate::decidable::CoreflectionVerdict::NoneUpToBound { witness } => {
                    return Err(Error::MissingAdjoint(format!("no right adjoint up to bound: {witness}")))
                }
            }
        }
        Ok(GeomMorphism {
            name: format!("{} -> Dec", source.name()),
            source,
            target: Base::Dec(base),
            kind: Kind::Dec,
            representables: OnceLock::new(),
        })
    }

    /// The functor behind a morphism of the first kind.
    pub fn functor(&self) -> Option<&FinFunctor> {
        match &self.kind {
            Kind::Functor(f) => Some(&f.pi),
            Kind::Dec => None,
        }
    }

    pub fn is_dec(&self) -> bool {
        matches!(self.kind, Kind::Dec)
    }

    fn budget(&self) -> u64 {
        self.source.budget()
    }

    // ---- inverse image --------------------------------------------------

    pub fn inverse_image(&self, a: &Presheaf) -> Result<Presheaf> {
        match &self.kind {
            Kind::Functor(fd) => a.reindex(&fd.pi),
            Kind::Dec => {
                if !self.target.contains(a) {
                    return Err(Error::Mismatch(format!("{a:?} is not decidable")));
                }
                Ok(a.clone())
            }
        }
    }

    pub fn inverse_image_map(&self, f: &PresheafMap) -> Result<PresheafMap> {
        let dom = self.inverse_image(f.dom())?;
        let cod = self.inverse_image(f.cod())?;
        match &self.kind {
            Kind::Functor(fd) => {
                let comps = fd
                    .pi
                    .source
                    .objects()
                    .map(|d| f.comps()[fd.pi.on_objects[d]].clone())
                    .collect();
                Ok(PresheafMap::unchecked(dom, cod, comps))
            }
            Kind::Dec => Ok(f.clone()),
        }
    }

    // ---- direct image ---------------------------------------------------

    fn ran(&self, fd: &FunctorData, x: &Presheaf) -> Result<RanData> {
        let tsite = &fd.pi.target;
        let mut families = Vec::with_capacity(tsite.num_objects());
        let mut index = Vec::with_capacity(tsite.num_objects());
        for d in tsite.objects() {
            let fam = HomSearch::new(&fd.probes[d], x).budget(self.budget()).collect()?;
            let fam: Vec<Vec<Vec<usize>>> = fam.into_iter().map(|m| m.comps().to_vec()).collect();
            index.push(fam.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect::<HashMap<_, _>>());
            families.push(fam);
        }
        let labels = tsite
            .objects()
            .map(|d| families[d].iter().map(|f| family_label(x, f)).collect())
            .collect();
        let action = tsite
            .morphisms()
            .map(|u| {
                let d2 = tsite.tgt(u);
                let d1 = tsite.src(u);
                families[d2]
                    .iter()
                    .map(|phi| index[d1][&compose_comps(phi, &fd.probe_maps[u])])
                    .collect()
            })
            .collect();
        Ok(RanData {
            object: Presheaf::new(tsite.clone(), labels, action)?,
            families,
            index,
        })
    }

    pub fn direct_image(&self, x: &Presheaf) -> Result<Presheaf> {
        match &self.kind {
            Kind::Functor(fd) => Ok(self.ran(fd, x)?.object),
            Kind::Dec => Ok(self.coreflect(x)?.to_presheaf().0),
        }
    }

    fn coreflect(&self, x: &Presheaf) -> Result<Subobject> {
        let (u, ok) = largest_decidable_subobject(x);
        if !ok {
            return Err(Error::MissingAdjoint(format!("{x:?} has no largest decidable subobject")));
        }
        Ok(u)
    }

    pub fn direct_image_map(&self, f: &PresheafMap) -> Result<PresheafMap> {
        match &self.kind {
            Kind::Functor(fd) => {
                let dx = self.ran(fd, f.dom())?;
                let dy = self.ran(fd, f.cod())?;
                let comps = fd
                    .pi
                    .target
                    .objects()
                    .map(|d| {
                        dx.families[d]
                            .iter()
                            .map(|phi| dy.index[d][&compose_comps(f.comps(), phi)])
                            .collect()
                    })
                    .collect();
                Ok(PresheafMap::unchecked(dx.object, dy.object, comps))
            }
            Kind::Dec => {
                let (cx, ix) = self.coreflect(f.dom())?.to_presheaf();
                let (cy, iy) = self.coreflect(f.cod())?.to_presheaf();
                let site = cx.site().clone();
                let mut comps = Vec::with_capacity(site.num_objects());
                for c in site.objects() {
                    let row: Option<Vec<usize>> = ix.comps()[c]
                        .iter()
                        .map(|&e| {
                            let v = f.apply(c, e);
                            iy.comps()[c].iter().position(|&w| w == v)
                        })
                        .collect();
                    comps.push(row.ok_or_else(|| {
                        Error::MissingAdjoint("a map from a decidable object escapes the coreflection".into())
                    })?);
                }
                Ok(PresheafMap::unchecked(cx, cy, comps))
            }
        }
    }

    // ---- leftmost adjoint -----------------------------------------------

    fn lan(&self, fd: &FunctorData, x: &Presheaf) -> Result<LanData> {
        let (src, tgt) = (&fd.pi.source, &fd.pi.target);
        let mut class = Vec::with_capacity(tgt.num_objects());
        let mut reps = Vec::with_capacity(tgt.num_objects());
        for dp in tgt.objects() {
            let mut triples = Vec::new();
            for d in src.objects() {
                let n = tgt.hom(dp, fd.pi.on_objects[d]).len();
                for e in 0..x.size(d) {
                    for k in 0..n {
                        triples.push((d, e, k));
                    }
                }
            }
            let pos: HashMap<(ObjId, usize, usize), usize> =
                triples.iter().enumerate().map(|(i, &t)| (t, i)).collect();
            let mut uf = crate::fincat::UnionFind::new(triples.len());
            // (d1, X(g)e, k) ~ (d2, e, pi(g) . f_k) for g: d1 -> d2
            for g in src.morphisms() {
                let (d1, d2) = (src.src(g), src.tgt(g));
                let homs = tgt.hom(dp, fd.pi.on_objects[d1]);
                for e in 0..x.size(d2) {
                    for (k, &f) in homs.iter().enumerate() {
                        let h = tgt.comp(fd.pi.on_morphisms[g], f);
                        let a = pos[&(d1, x.act(g, e), k)];
                        let b = pos[&(d2, e, hom_position(tgt, h))];
                        uf.union(a, b);
                    }
                }
            }
            let mut roots: Vec<usize> = (0..triples.len()).map(|i| uf.find(i)).collect();
            let mut order: Vec<usize> = roots.clone();
            order.sort_unstable();
            order.dedup();
            let rank: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &r)| (r, i)).collect();
            for r in roots.iter_mut() {
                *r = rank[r];
            }
            class.push(triples.iter().zip(&roots).map(|(&t, &r)| (t, r)).collect::<HashMap<_, _>>());
            // the root of each block is its least member
            reps.push(order.iter().map(|&r| triples[r]).collect::<Vec<_>>());
        }
        let labels = tgt
            .objects()
            .map(|dp| {
                reps[dp]
                    .iter()
                    .map(|&(d, e, k)| {
                        let f = tgt.hom(dp, fd.pi.on_objects[d])[k];
                        if tgt.is_identity(f) {
                            format!("{}:{}", src.object_name(d), x.label(d, e))
                        } else {
                            format!("{}:{}@{}", src.object_name(d), x.label(d, e), tgt.morphism_name(f))
                        }
                    })
                    .collect()
            })
            .collect();
        let action = tgt
            .morphisms()
            .map(|u| {
                let (d1p, d2p) = (tgt.src(u), tgt.tgt(u));
                reps[d2p]
                    .iter()
                    .map(|&(d, e, k)| {
                        let f = tgt.hom(d2p, fd.pi.on_objects[d])[k];
                        let fu = hom_position(tgt, tgt.comp(f, u));
                        class[d1p][&(d, e, fu)]
                    })
                    .collect()
            })
            .collect();
        Ok(LanData {
            object: Presheaf::new(tgt.clone(), labels, action)?,
            class,
            reps,
        })
    }

    pub fn shriek(&self, x: &Presheaf) -> Result<Presheaf> {
        match &self.kind {
            Kind::Functor(fd) => Ok(self.lan(fd, x)?.object),
            Kind::Dec => Ok(dec_reflection(x)?.0),
        }
    }

    pub fn shriek_map(&self, f: &PresheafMap) -> Result<PresheafMap> {
        match &self.kind {
            Kind::Functor(fd) => {
                let lx = self.lan(fd, f.dom())?;
                let ly = self.lan(fd, f.cod())?;
                let comps = fd
                    .pi
                    .target
                    .objects()
                    .map(|dp| {
                        lx.reps[dp]
                            .iter()
                            .map(|&(d, e, k)| ly.class[dp][&(d, f.apply(d, e), k)])
                            .collect()
                    })
                    .collect();
                Ok(PresheafMap::unchecked(lx.object, ly.object, comps))
            }
            Kind::Dec => {
                let (qx, mx) = dec_reflection(f.dom())?;
                let (qy, my) = dec_reflection(f.cod())?;
                let site = qx.site().clone();
                let mut comps: Vec<Vec<usize>> = qx.sizes().into_iter().map(|n| vec![usize::MAX; n]).collect();
                for c in site.objects() {
                    for e in 0..f.dom().size(c) {
                        comps[c][mx.apply(c, e)] = my.apply(c, f.apply(c, e));
                    }
                }
                Ok(PresheafMap::unchecked(qx, qy, comps))
            }
        }
    }

    // ---- rightmost adjoint ----------------------------------------------

    fn representables(&self) -> Result<Arc<Representables>> {
        self.representables
            .get_or_init(|| {
                let site = self.source.site().clone();
                let build = || -> Result<Representables> {
                    let images = site
                        .objects()
                        .map(|c| self.direct_image(&Presheaf::yoneda(&site, c)))
                        .collect::<Result<Vec<_>>>()?;
                    let maps = site
                        .morphisms()
                        .map(|g| self.direct_image_map(&yoneda_arrow(&site, g)))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Representables { images, maps })
                };
                build().map(Arc::new).map_err(|e| e.to_string())
            })
            .clone()
            .map_err(Error::MissingAdjoint)
    }

    fn upper_data(&self, a: &Presheaf) -> Result<UpperData> {
        let reps = self.representables()?;
        let site = self.source.site().clone();
        let mut families = Vec::with_capacity(site.num_objects());
        let mut index = Vec::with_capacity(site.num_objects());
        for c in site.objects() {
            let fam: Vec<Vec<Vec<usize>>> = HomSearch::new(&reps.images[c], a)
                .budget(self.budget())
                .collect()?
                .into_iter()
                .map(|m| m.comps().to_vec())
                .collect();
            index.push(fam.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect::<HashMap<_, _>>());
            families.push(fam);
        }
        let labels = site
            .objects()
            .map(|c| families[c].iter().map(|f| family_label(a, f)).collect())
            .collect();
        let action = site
            .morphisms()
            .map(|g| {
                let (c1, c2) = (site.src(g), site.tgt(g));
                families[c2]
                    .iter()
                    .map(|phi| index[c1][&compose_comps(phi, reps.maps[g].comps())])
                    .collect()
            })
            .collect();
        Ok(UpperData {
            object: Presheaf::new(site.clone(), labels, action)?,
            families,
            index,
        })
    }

    /// `p^!A(c) = Hom(p_* y(c), A)`, the only candidate for a right adjoint
    /// of the direct image.
    pub fn upper(&self, a: &Presheaf) -> Result<Presheaf> {
        Ok(self.upper_data(a)?.object)
    }

    pub fn upper_map(&self, f: &PresheafMap) -> Result<PresheafMap> {
        let ua = self.upper_data(f.dom())?;
        let ub = self.upper_data(f.cod())?;
        let site = self.source.site();
        let comps = site
            .objects()
            .map(|c| {
                ua.families[c]
                    .iter()
                    .map(|phi| ub.index[c][&compose_comps(f.comps(), phi)])
                    .collect()
            })
            .collect();
        Ok(PresheafMap::unchecked(ua.object, ub.object, comps))
    }

    // ---- units and counits ----------------------------------------------

    /// `alpha_A: A -> p_* p^* A`.
    pub fn alpha(&self, a: &Presheaf) -> Result<PresheafMap> {
        match &self.kind {
            Kind::Functor(fd) => {
                let pa = self.inverse_image(a)?;
                let r = self.ran(fd, &pa)?;
                let tsite = &fd.pi.target;
                let comps = tsite
                    .objects()
                    .map(|dp| {
                        (0..a.size(dp))
                            .map(|e| {
                                // at d, the element g: pi d -> d' of pi^* y(d') goes to A(g)(e)
                                let fam: Vec<Vec<usize>> = fd
                                    .pi
                                    .source
                                    .objects()
                                    .map(|d| {
                                        tsite
                                            .hom(fd.pi.on_objects[d], dp)
                                            .iter()
                                            .map(|&g| a.act(g, e))
                                            .collect()
                                    })
                                    .collect();
                                r.index[dp][&fam]
                            })
                            .collect()
                    })
                    .collect();
                Ok(PresheafMap::unchecked(a.clone(), r.object, comps))
            }
            Kind::Dec => {
                let ca = self.direct_image(a)?;
                if ca.sizes() != a.sizes() {
                    return Err(Error::LawFailure(format!("{a:?} is not its own coreflection")));
                }
                let comps = a.sizes().into_iter().map(|n| (0..n).collect()).collect();
                Ok(PresheafMap::unchecked(a.clone(), ca, comps))
            }
        }
    }

    /// `beta_X: p^* p_* X -> X`.
    pub fn beta(&self, x: &Presheaf) -> Result<PresheafMap> {
        match &self.kind {
            Kind::Functor(fd) => {
                let r = self.ran(fd, x)?;
                let ppx = r.object.reindex(&fd.pi)?;
                let src = &fd.pi.source;
                let tsite = &fd.pi.target;
                let comps = src
                    .objects()
                    .map(|d| {
                        let dp = fd.pi.on_objects[d];
                        let id = hom_position(tsite, tsite.identity(dp));
                        r.families[dp].iter().map(|phi| phi[d][id]).collect()
                    })
                    .collect();
                Ok(PresheafMap::unchecked(ppx, x.clone(), comps))
            }
            Kind::Dec => {
                let (cx, incl) = self.coreflect(x)?.to_presheaf();
                Ok(PresheafMap::unchecked(cx, x.clone(), incl.comps().to_vec()))
            }
        }
    }

    /// `sigma_X: X -> p^* p_! X`.
    pub fn sigma(&self, x: &Presheaf) -> Result<PresheafMap> {
        match &self.kind {
            Kind::Functor(fd) => {
                let l = self.lan(fd, x)?;
                let plx = l.object.reindex(&fd.pi)?;
                let tsite = &fd.pi.target;
                let comps = fd
                    .pi
                    .source
                    .objects()
                    .map(|d| {
                        let dp = fd.pi.on_objects[d];
                        let id = hom_position(tsite, tsite.identity(dp));
                        (0..x.size(d)).map(|e| l.class[dp][&(d, e, id)]).collect()
                    })
                    .collect();
                Ok(PresheafMap::unchecked(x.clone(), plx, comps))
            }
            Kind::Dec => Ok(dec_reflection(x)?.1),
        }
    }

    /// `tau_A: p_! p^* A -> A`.
    pub fn tau(&self, a: &Presheaf) -> Result<PresheafMap> {
        match &self.kind {
            Kind::Functor(fd) => {
                let pa = self.inverse_image(a)?;
                let l = self.lan(fd, &pa)?;
                let tsite = &fd.pi.target;
                let comps = tsite
                    .objects()
                    .map(|dp| {
                        l.reps[dp]
                            .iter()
                            .map(|&(d, e, k)| a.act(tsite.hom(dp, fd.pi.on_objects[d])[k], e))
                            .collect()
                    })
                    .collect();
                Ok(PresheafMap::unchecked(l.object, a.clone(), comps))
            }
            Kind::Dec => {
                let (q, m) = dec_reflection(a)?;
                if !m.is_iso() {
                    return Err(Error::LawFailure(format!("{a:?} is not its own reflection")));
                }
                let inv = m.inverse().expect("iso");
                Ok(PresheafMap::unchecked(q, a.clone(), inv.comps().to_vec()))
            }
        }
    }

    /// `eta_X: X -> p^! p_* X`, sending `x` to `p_*` of its Yoneda map.
    pub fn eta_upper(&self, x: &Presheaf) -> Result<PresheafMap> {
        let px = self.direct_image(x)?;
        let u = self.upper_data(&px)?;
        let site = self.source.site();
        let mut comps = Vec::with_capacity(site.num_objects());
        for c in site.objects() {
            let mut row = Vec::with_capacity(x.size(c));
            for e in 0..x.size(c) {
                let pm = self.direct_image_map(&yoneda_map(x, c, e))?;
                row.push(*u.index[c].get(pm.comps()).ok_or_else(|| {
                    Error::LawFailure("pushed-forward Yoneda map is not a family".into())
                })?);
            }
            comps.push(row);
        }
        Ok(PresheafMap::unchecked(x.clone(), u.object, comps))
    }

    /// `eps_A: p_* p^! A -> A`, filled in from `eps . p_*(phi~) = phi` for
    /// every element `phi` of `p^!A`. Fails when the constraints conflict or
    /// leave a value open; then `p_*` has no right adjoint.
    pub fn eps_upper(&self, a: &Presheaf) -> Result<PresheafMap> {
        let u = self.upper_data(a)?;
        let pu = self.direct_image(&u.object)?;
        let site = self.source.site();
        let mut comps: Vec<Vec<usize>> = pu.sizes().into_iter().map(|n| vec![usize::MAX; n]).collect();
        for c in site.objects() {
            for (i, phi) in u.families[c].iter().enumerate() {
                let pm = self.direct_image_map(&yoneda_map(&u.object, c, i))?;
                for (dp, row) in pm.comps().iter().enumerate() {
                    for (psi, &slot) in row.iter().enumerate() {
                        let want = phi[dp][psi];
                        let have = &mut comps[dp][slot];
                        if *have == usize::MAX {
                            *have = want;
                        } else if *have != want {
                            return Err(Error::MissingAdjoint(format!(
                                "p^! refuted: counit at {a:?} would send {} to both {} and {}",
                                pu.label(dp, slot),
                                a.label(dp, *have),
                                a.label(dp, want)
                            )));
                        }
                    }
                }
            }
        }
        for (dp, row) in comps.iter().enumerate() {
            if let Some(slot) = row.iter().position(|&v| v == usize::MAX) {
                return Err(Error::MissingAdjoint(format!(
                    "p^! refuted: counit at {a:?} is undetermined on {}",
                    pu.label(dp, slot)
                )));
            }
        }
        PresheafMap::new(pu, a.clone(), comps)
            .map_err(|e| Error::MissingAdjoint(format!("p^! refuted: counit is not natural: {e}")))
    }

    /// `theta_X = p_!(beta_X) . tau_{p_* X}^{-1}: p_* X -> p_! X`.
    pub fn theta(&self, x: &Presheaf) -> Result<PresheafMap> {
        let px = self.direct_image(x)?;
        let t = self.tau(&px)?;
        let inv = t
            .inverse()
            .ok_or_else(|| Error::LawFailure(format!("tau at {px:?} is not invertible; p is not connected")))?;
        let pb = self.shriek_map(&self.beta(x)?)?;
        pb.after(&inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{reflexive_graph, standard_site};

    fn graph_topos(site: &str) -> Arc<PresheafTopos> {
        PresheafTopos::new(site, standard_site(site).unwrap())
    }

    /// Two nodes and one edge between them on the reflexive graph site.
    fn one_edge(r: &Arc<FinCategory>) -> Presheaf {
        let (e, v) = (r.object_index("E").unwrap(), r.object_index("V").unwrap());
        let mut sizes = vec![0; 2];
        sizes[v] = 2;
        sizes[e] = 3;
        let src = [0, 1, 0];
        let tgt = [0, 1, 1];
        Presheaf::from_fn(r, &sizes, |f, y| match r.morphism_name(f) {
            "d0" => src[y],
            "d1" => tgt[y],
            "d0s" => src[y],
            "d1s" => tgt[y],
            "s" => y,
            _ => y,
        })
        .unwrap()
    }

    #[test]
    fn canonical_reflexive_graph_functors() {
        let t = PresheafTopos::new("reflexive_graphs", reflexive_graph());
        let p = GeomMorphism::canonical(t.clone()).unwrap();
        let x = one_edge(t.site());
        assert_eq!(p.direct_image(&x).unwrap().sizes(), vec![2]);
        assert_eq!(p.shriek(&x).unwrap().sizes(), vec![1]);
        let a = Presheaf::constant(p.target.site(), &["a".into(), "b".into()]);
        let pa = p.inverse_image(&a).unwrap();
        let v = t.site().object_index("V").unwrap();
        assert_eq!(pa.size(v), 2);
        assert!(p.alpha(&a).unwrap().is_iso());
        assert!(p.beta(&x).unwrap().is_monic());
        assert!(p.tau(&a).unwrap().is_iso());
        // codiscrete: p^!A has A x A edges
        let ua = p.upper(&a).unwrap();
        let e = t.site().object_index("E").unwrap();
        assert_eq!((ua.size(v), ua.size(e)), (2, 4));
        assert!(p.eps_upper(&a).unwrap().is_iso());
        assert!(p.theta(&x).unwrap().is_epic());
    }

    #[test]
    fn swap_action_has_no_fixed_points_and_no_codiscrete_adjoint() {
        let t = graph_topos("zmod2");
        let p = GeomMorphism::canonical(t.clone()).unwrap();
        let s = t.site().clone();
        let swap = Presheaf::from_fn(&s, &[2], |f, y| if s.is_identity(f) { y } else { 1 - y }).unwrap();
        assert_eq!(p.direct_image(&swap).unwrap().sizes(), vec![0]);
        assert_eq!(p.shriek(&swap).unwrap().sizes(), vec![1]);
        let empty = Presheaf::initial(p.target.site());
        assert!(matches!(p.eps_upper(&empty), Err(Error::MissingAdjoint(_))));
    }

    #[test]
    fn dec_morphism_for_idempotent() {
        let t = graph_topos("idempotent");
        let p = GeomMorphism::from_dec_coreflection(t.clone(), Bound::of(3)).unwrap();
        let s = t.site().clone();
        let em = s.morphism_index("e").unwrap();
        let x = Presheaf::from_fn(&s, &[3], |f, y| if f == em { [0, 0, 2][y] } else { y }).unwrap();
        assert_eq!(p.direct_image(&x).unwrap().sizes(), vec![2]);
        assert!(p.beta(&x).unwrap().is_monic());
        assert_eq!(p.shriek(&x).unwrap().sizes(), vec![2]);
        let a = p.direct_image(&x).unwrap();
        assert!(p.alpha(&a).unwrap().is_iso());
        assert!(p.eps_upper(&a).unwrap().is_iso());
    }

    #[test]
    fn graphs_have_no_dec_coreflection() {
        let t = graph_topos("graphs");
        assert!(matches!(
            GeomMorphism::from_dec_coreflection(t, Bound::of(2)),
            Err(Error::MissingAdjoint(_))
        ));
    }

    #[test]
    fn dec_base_classifier_is_two_points() {
        let t = graph_topos("reflexive_graphs");
        let base = DecBase::new(t, Bound::of(2)).unwrap();
        let cl = Base::Dec(base).classifier().unwrap();
        assert_eq!(cl.omega.total(), 4);
    }
}
