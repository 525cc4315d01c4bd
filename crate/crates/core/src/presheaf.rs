//! Presheaves on a finite site, natural transformations, finite limits and
//! colimits, exponentials, hom-set enumeration and the subobject classifier.
//!
//! Elements of `X(c)` are indices `0..X.size(c)`. Each element carries a
//! display label; constructions build labels from their inputs so that output
//! is reproducible. The action of `f: c -> d` is a table `X(d) -> X(c)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::fincat::{FinCategory, MorId, ObjId};
use crate::sublattice::{LTTopology, Subobject};

/// Default node budget for hom-set searches.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

pub(crate) const NONE: usize = usize::MAX;

pub(crate) fn same_site(a: &Arc<FinCategory>, b: &Arc<FinCategory>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[derive(PartialEq, Eq, Hash)]
struct PresheafData {
    site: Arc<FinCategory>,
    labels: Vec<Vec<String>>,
    action: Vec<Vec<usize>>,
}

/// A presheaf of finite sets. Cheap to clone.
#[derive(Clone)]
pub struct Presheaf(Arc<PresheafData>);

impl PartialEq for Presheaf {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (same_site(&self.0.site, &other.0.site)
                && self.0.labels == other.0.labels
                && self.0.action == other.0.action)
    }
}

impl Eq for Presheaf {}

impl fmt::Debug for Presheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = self.site();
        let mut m = f.debug_map();
        for c in site.objects() {
            m.entry(&site.object_name(c), &self.0.labels[c]);
        }
        // generator actions make the description replayable
        for g in site.generators() {
            let src = site.src(g);
            let row: Vec<&str> = self.0.action[g].iter().map(|&x| self.0.labels[src][x].as_str()).collect();
            m.entry(&site.morphism_name(g), &row);
        }
        m.finish()
    }
}

impl Presheaf {
    /// Validates carriers and action tables: shapes, identities, contravariance.
    pub fn new(
        site: Arc<FinCategory>,
        labels: Vec<Vec<String>>,
        action: Vec<Vec<usize>>,
    ) -> Result<Presheaf> {
        let bad = |m: String| Err(Error::InvalidPresheaf(m));
        if labels.len() != site.num_objects() {
            return bad(format!(
                "expected carriers for {} objects, got {}",
                site.num_objects(),
                labels.len()
            ));
        }
        if action.len() != site.num_morphisms() {
            return bad(format!(
                "expected actions for {} morphisms, got {}",
                site.num_morphisms(),
                action.len()
            ));
        }
        for f in site.morphisms() {
            let (c, d) = (site.src(f), site.tgt(f));
            if action[f].len() != labels[d].len() {
                return bad(format!(
                    "action of `{}` must be defined on all {} elements over `{}`",
                    site.morphism_name(f),
                    labels[d].len(),
                    site.object_name(d)
                ));
            }
            if let Some(&v) = action[f].iter().find(|&&v| v >= labels[c].len()) {
                return bad(format!(
                    "action of `{}` sends an element to index {v} outside the carrier over `{}`",
                    site.morphism_name(f),
                    site.object_name(c)
                ));
            }
        }
        for c in site.objects() {
            let id = site.identity(c);
            if action[id].iter().enumerate().any(|(x, &v)| v != x) {
                return bad(format!("identity `{}` does not act trivially", site.morphism_name(id)));
            }
        }
        for g in site.morphisms() {
            for f in site.morphisms() {
                let Some(h) = site.compose(g, f) else { continue };
                for z in 0..labels[site.tgt(g)].len() {
                    if action[h][z] != action[f][action[g][z]] {
                        return bad(format!(
                            "square `{g} . {f}` fails at `{z}`: X({g} . {f}) != X({f}) X({g})",
                            g = site.morphism_name(g),
                            f = site.morphism_name(f),
                            z = labels[site.tgt(g)][z],
                        ));
                    }
                }
            }
        }
        Ok(Presheaf::unchecked(site, labels, action))
    }

    pub(crate) fn unchecked(
        site: Arc<FinCategory>,
        labels: Vec<Vec<String>>,
        action: Vec<Vec<usize>>,
    ) -> Presheaf {
        Presheaf(Arc::new(PresheafData {
            site,
            labels,
            action,
        }))
    }

    /// Builds a presheaf from carrier sizes and an action function, with
    /// labels `0, 1, ...`.
    pub fn from_fn(
        site: &Arc<FinCategory>,
        sizes: &[usize],
        act: impl Fn(MorId, usize) -> usize,
    ) -> Result<Presheaf> {
        let labels = sizes
            .iter()
            .map(|&n| (0..n).map(|i| i.to_string()).collect())
            .collect();
        let action = site
            .morphisms()
            .map(|f| (0..sizes[site.tgt(f)]).map(|y| act(f, y)).collect())
            .collect();
        Presheaf::new(site.clone(), labels, action)
    }

    pub fn terminal(site: &Arc<FinCategory>) -> Presheaf {
        Presheaf::constant(site, &["*".to_string()])
    }

    pub fn initial(site: &Arc<FinCategory>) -> Presheaf {
        Presheaf::constant(site, &[])
    }

    /// The constant presheaf on a finite set: every arrow acts as the identity.
    pub fn constant(site: &Arc<FinCategory>, set: &[String]) -> Presheaf {
        let labels = vec![set.to_vec(); site.num_objects()];
        let action = site.morphisms().map(|_| (0..set.len()).collect()).collect();
        Presheaf::unchecked(site.clone(), labels, action)
    }

    /// `Hom(-, c)`, elements labelled by morphism names, acting by precomposition.
    pub fn yoneda(site: &Arc<FinCategory>, c: ObjId) -> Presheaf {
        let labels = site
            .objects()
            .map(|d| {
                site.hom(d, c)
                    .iter()
                    .map(|&g| site.morphism_name(g).to_string())
                    .collect()
            })
            .collect();
        let action = site
            .morphisms()
            .map(|f| {
                site.hom(site.tgt(f), c)
                    .iter()
                    .map(|&g| hom_position(site, site.comp(g, f)))
                    .collect()
            })
            .collect();
        Presheaf::unchecked(site.clone(), labels, action)
    }

    pub fn site(&self) -> &Arc<FinCategory> {
        &self.0.site
    }

    pub fn size(&self, c: ObjId) -> usize {
        self.0.labels[c].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.0.labels.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.0.labels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn label(&self, c: ObjId, x: usize) -> &str {
        &self.0.labels[c][x]
    }

    pub fn labels(&self, c: ObjId) -> &[String] {
        &self.0.labels[c]
    }

    pub fn element(&self, c: ObjId, label: &str) -> Option<usize> {
        self.0.labels[c].iter().position(|l| l == label)
    }

    /// `X(f)(y)` for `f: c -> d` and `y` in `X(d)`.
    pub fn act(&self, f: MorId, y: usize) -> usize {
        self.0.action[f][y]
    }

    pub fn action(&self, f: MorId) -> &[usize] {
        &self.0.action[f]
    }

    /// All `(c, x)` in object order.
    pub fn elements(&self) -> impl Iterator<Item = (ObjId, usize)> + '_ {
        self.site()
            .objects()
            .flat_map(move |c| (0..self.size(c)).map(move |x| (c, x)))
    }

    /// Equal carriers sizes and action tables, ignoring labels.
    pub fn same_shape(&self, other: &Presheaf) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (same_site(self.site(), other.site())
                && self.sizes() == other.sizes()
                && self.0.action == other.0.action)
    }

    /// Same data with fresh labels.
    pub fn relabel(&self, labels: Vec<Vec<String>>) -> Presheaf {
        assert_eq!(labels.iter().map(Vec::len).collect::<Vec<_>>(), self.sizes());
        Presheaf::unchecked(self.site().clone(), labels, self.0.action.clone())
    }

    /// Fixed points of the action, i.e. global elements, as tuples over objects.
    pub fn global_elements(&self) -> Vec<Vec<usize>> {
        let one = Presheaf::terminal(self.site());
        let mut out = Vec::new();
        HomSearch::new(&one, self)
            .for_each(|comps| {
                out.push(comps.iter().map(|v| v[0]).collect());
                ControlFlow::Continue(())
            })
            .expect("global elements are bounded by the carrier");
        out
    }

    /// Quotient by a compatible family of equivalences. `class[c][x]` is any
    /// key identifying the class of `x`; classes are listed by least member.
    pub fn quotient(&self, class: &[Vec<usize>]) -> Result<(Presheaf, PresheafMap)> {
        let site = self.site();
        let mut comps = Vec::with_capacity(site.num_objects());
        let mut reps: Vec<Vec<usize>> = Vec::with_capacity(site.num_objects());
        for c in site.objects() {
            let mut key_to_new: HashMap<usize, usize> = HashMap::new();
            let mut comp = Vec::with_capacity(self.size(c));
            let mut rep = Vec::new();
            for x in 0..self.size(c) {
                let next = key_to_new.len();
                let n = *key_to_new.entry(class[c][x]).or_insert(next);
                if n == rep.len() {
                    rep.push(x);
                }
                comp.push(n);
            }
            comps.push(comp);
            reps.push(rep);
        }
        let mut action = Vec::with_capacity(site.num_morphisms());
        for f in site.morphisms() {
            let (c, d) = (site.src(f), site.tgt(f));
            let mut row = Vec::with_capacity(reps[d].len());
            for (n, &x) in reps[d].iter().enumerate() {
                let v = comps[c][self.act(f, x)];
                // every member must land in the same class
                for y in 0..self.size(d) {
                    if comps[d][y] == n && comps[c][self.act(f, y)] != v {
                        return Err(Error::InvalidPresheaf(format!(
                            "relation is not compatible with `{}`",
                            site.morphism_name(f)
                        )));
                    }
                }
                row.push(v);
            }
            action.push(row);
        }
        let labels = site
            .objects()
            .map(|c| reps[c].iter().map(|&x| self.label(c, x).to_string()).collect())
            .collect();
        let q = Presheaf::unchecked(site.clone(), labels, action);
        let map = PresheafMap::unchecked(self.clone(), q.clone(), comps);
        Ok((q, map))
    }

    /// Reindexing along a functor `F: D -> site`, giving a presheaf on `D`.
    pub fn reindex(&self, functor: &crate::fincat::FinFunctor) -> Result<Presheaf> {
        if !same_site(&functor.target, self.site()) {
            return Err(Error::Mismatch("functor does not land in the site of the presheaf".into()));
        }
        let d = &functor.source;
        let labels = d
            .objects()
            .map(|o| self.labels(functor.on_objects[o]).to_vec())
            .collect();
        let action = d
            .morphisms()
            .map(|f| self.action(functor.on_morphisms[f]).to_vec())
            .collect();
        Ok(Presheaf::unchecked(d.clone(), labels, action))
    }
}

/// Position of `f` in `hom(src f, tgt f)`.
pub(crate) fn hom_position(site: &FinCategory, f: MorId) -> usize {
    site.hom(site.src(f), site.tgt(f))
        .iter()
        .position(|&g| g == f)
        .expect("morphism lies in its own hom-set")
}

/// A natural transformation, given by one function per object.
#[derive(Clone, PartialEq, Eq)]
pub struct PresheafMap {
    dom: Presheaf,
    cod: Presheaf,
    comps: Vec<Vec<usize>>,
}

impl fmt::Debug for PresheafMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = self.dom.site();
        let mut m = f.debug_map();
        for c in site.objects() {
            let pairs: Vec<String> = (0..self.dom.size(c))
                .map(|x| format!("{}->{}", self.dom.label(c, x), self.cod.label(c, self.comps[c][x])))
                .collect();
            m.entry(&site.object_name(c), &pairs);
        }
        m.finish()
    }
}

impl PresheafMap {
    /// Validates shapes and every naturality square.
    pub fn new(dom: Presheaf, cod: Presheaf, comps: Vec<Vec<usize>>) -> Result<PresheafMap> {
        if !same_site(dom.site(), cod.site()) {
            return Err(Error::NotNatural("domain and codomain live on different sites".into()));
        }
        let site = dom.site().clone();
        if comps.len() != site.num_objects() {
            return Err(Error::NotNatural("wrong number of components".into()));
        }
        for c in site.objects() {
            if comps[c].len() != dom.size(c) || comps[c].iter().any(|&v| v >= cod.size(c)) {
                return Err(Error::NotNatural(format!(
                    "component at `{}` is not a function between the carriers",
                    site.object_name(c)
                )));
            }
        }
        for f in site.morphisms() {
            let (c, d) = (site.src(f), site.tgt(f));
            for y in 0..dom.size(d) {
                if comps[c][dom.act(f, y)] != cod.act(f, comps[d][y]) {
                    return Err(Error::NotNatural(format!(
                        "square for `{}` fails at `{}`",
                        site.morphism_name(f),
                        dom.label(d, y)
                    )));
                }
            }
        }
        Ok(PresheafMap { dom, cod, comps })
    }

    pub(crate) fn unchecked(dom: Presheaf, cod: Presheaf, comps: Vec<Vec<usize>>) -> PresheafMap {
        debug_assert!(PresheafMap::new(dom.clone(), cod.clone(), comps.clone()).is_ok());
        PresheafMap { dom, cod, comps }
    }

    pub fn identity(x: &Presheaf) -> PresheafMap {
        let comps = x.sizes().into_iter().map(|n| (0..n).collect()).collect();
        PresheafMap {
            dom: x.clone(),
            cod: x.clone(),
            comps,
        }
    }

    /// The unique map out of an empty presheaf.
    pub fn from_initial(x: &Presheaf) -> PresheafMap {
        let zero = Presheaf::initial(x.site());
        PresheafMap {
            comps: vec![Vec::new(); x.site().num_objects()],
            dom: zero,
            cod: x.clone(),
        }
    }

    /// The unique map to the terminal presheaf.
    pub fn to_terminal(x: &Presheaf) -> PresheafMap {
        let one = Presheaf::terminal(x.site());
        PresheafMap {
            comps: x.sizes().into_iter().map(|n| vec![0; n]).collect(),
            dom: x.clone(),
            cod: one,
        }
    }

    pub fn dom(&self) -> &Presheaf {
        &self.dom
    }

    pub fn cod(&self) -> &Presheaf {
        &self.cod
    }

    pub fn comps(&self) -> &[Vec<usize>] {
        &self.comps
    }

    pub fn apply(&self, c: ObjId, x: usize) -> usize {
        self.comps[c][x]
    }

    /// `self . f`.
    pub fn after(&self, f: &PresheafMap) -> Result<PresheafMap> {
        if !f.cod.same_shape(&self.dom) {
            return Err(Error::Mismatch("codomain and domain differ".into()));
        }
        let comps = f
            .comps
            .iter()
            .enumerate()
            .map(|(c, row)| row.iter().map(|&x| self.comps[c][x]).collect())
            .collect();
        Ok(PresheafMap {
            dom: f.dom.clone(),
            cod: self.cod.clone(),
            comps,
        })
    }

    /// Same components with a structurally equal domain and codomain swapped in.
    pub fn retype(&self, dom: &Presheaf, cod: &Presheaf) -> Result<PresheafMap> {
        if !dom.same_shape(&self.dom) || !cod.same_shape(&self.cod) {
            return Err(Error::Mismatch("retyping to different shapes".into()));
        }
        Ok(PresheafMap {
            dom: dom.clone(),
            cod: cod.clone(),
            comps: self.comps.clone(),
        })
    }

    pub fn is_monic(&self) -> bool {
        self.comps.iter().enumerate().all(|(c, row)| {
            let mut seen = vec![false; self.cod.size(c)];
            row.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
        })
    }

    pub fn is_epic(&self) -> bool {
        self.comps.iter().enumerate().all(|(c, row)| {
            let mut seen = vec![false; self.cod.size(c)];
            for &v in row {
                seen[v] = true;
            }
            seen.into_iter().all(|b| b)
        })
    }

    pub fn is_iso(&self) -> bool {
        self.is_monic() && self.is_epic()
    }

    pub fn inverse(&self) -> Option<PresheafMap> {
        if !self.is_iso() {
            return None;
        }
        let comps = self
            .comps
            .iter()
            .map(|row| {
                let mut inv = vec![0; row.len()];
                for (x, &v) in row.iter().enumerate() {
                    inv[v] = x;
                }
                inv
            })
            .collect();
        Some(PresheafMap {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            comps,
        })
    }

    /// Image as a subobject of the codomain.
    pub fn image(&self) -> Subobject {
        let mut mask: Vec<Vec<bool>> = self.cod.sizes().into_iter().map(|n| vec![false; n]).collect();
        for (c, row) in self.comps.iter().enumerate() {
            for &v in row {
                mask[c][v] = true;
            }
        }
        Subobject::from_mask_unchecked(self.cod.clone(), mask)
    }
}

/// The image of a map as a subobject of its codomain.
pub fn image(f: &PresheafMap) -> Subobject {
    f.image()
}

/// A finite diagram of presheaves on one site.
#[derive(Clone, Debug)]
pub struct Diagram {
    pub site: Arc<FinCategory>,
    pub objects: Vec<Presheaf>,
    /// `(source index, target index, map)`.
    pub arrows: Vec<(usize, usize, PresheafMap)>,
}

impl Diagram {
    pub fn discrete(site: &Arc<FinCategory>, objects: Vec<Presheaf>) -> Diagram {
        Diagram {
            site: site.clone(),
            objects,
            arrows: Vec::new(),
        }
    }
}

/// A limit cone with tuple lookup for mediating maps.
#[derive(Clone, Debug)]
pub struct Cone {
    pub apex: Presheaf,
    pub legs: Vec<PresheafMap>,
    tuples: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl Cone {
    /// Element of the apex at `c` with the given coordinates, if compatible.
    pub fn lookup(&self, c: ObjId, tuple: &[usize]) -> Option<usize> {
        self.index[c].get(tuple).copied()
    }

    pub fn tuple(&self, c: ObjId, x: usize) -> &[usize] {
        &self.tuples[c][x]
    }

    /// The unique map `Z -> apex` whose composites with the legs are `maps`.
    pub fn mediate(&self, maps: &[PresheafMap]) -> Result<PresheafMap> {
        if maps.len() != self.legs.len() {
            return Err(Error::Mismatch("one map per leg is required".into()));
        }
        let Some(z) = maps.first().map(|m| m.dom.clone()) else {
            // limit of the empty diagram is terminal
            return Err(Error::Mismatch("mediating into a terminal cone needs a domain; use to_terminal".into()));
        };
        let mut comps = Vec::with_capacity(z.site().num_objects());
        for c in z.site().objects() {
            let mut row = Vec::with_capacity(z.size(c));
            for x in 0..z.size(c) {
                let t: Vec<usize> = maps.iter().map(|m| m.comps[c][x]).collect();
                row.push(self.lookup(c, &t).ok_or_else(|| {
                    Error::Mismatch("the given maps do not form a cone".into())
                })?);
            }
            comps.push(row);
        }
        PresheafMap::new(z, self.apex.clone(), comps)
    }
}

fn tuple_label(parts: Vec<&str>) -> String {
    if parts.len() == 1 {
        parts[0].to_string()
    } else {
        format!("({})", parts.join(","))
    }
}

/// Pointwise limit: compatible tuples, in lexicographic order.
pub fn limit(diagram: &Diagram) -> Cone {
    let site = &diagram.site;
    let k = diagram.objects.len();
    let mut tuples: Vec<Vec<Vec<usize>>> = Vec::with_capacity(site.num_objects());
    for c in site.objects() {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        limit_tuples(diagram, c, &mut cur, &mut out);
        tuples.push(out);
    }
    let index: Vec<HashMap<Vec<usize>, usize>> = tuples
        .iter()
        .map(|ts| ts.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect())
        .collect();
    let labels = site
        .objects()
        .map(|c| {
            tuples[c]
                .iter()
                .map(|t| {
                    tuple_label(
                        t.iter()
                            .enumerate()
                            .map(|(i, &x)| diagram.objects[i].label(c, x))
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();
    let action = site
        .morphisms()
        .map(|f| {
            let (c, d) = (site.src(f), site.tgt(f));
            tuples[d]
                .iter()
                .map(|t| {
                    let image: Vec<usize> = t
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| diagram.objects[i].act(f, x))
                        .collect();
                    index[c][&image]
                })
                .collect()
        })
        .collect();
    let apex = Presheaf::unchecked(site.clone(), labels, action);
    let legs = (0..k)
        .map(|i| {
            let comps = tuples
                .iter()
                .map(|ts| ts.iter().map(|t| t[i]).collect())
                .collect();
            PresheafMap::unchecked(apex.clone(), diagram.objects[i].clone(), comps)
        })
        .collect();
    Cone {
        apex,
        legs,
        tuples,
        index,
    }
}

fn limit_tuples(diagram: &Diagram, c: ObjId, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let i = cur.len();
    if i == diagram.objects.len() {
        out.push(cur.clone());
        return;
    }
    for x in 0..diagram.objects[i].size(c) {
        cur.push(x);
        let ok = diagram.arrows.iter().all(|(s, t, m)| {
            *s > i || *t > i || m.comps[c][cur[*s]] == cur[*t]
        });
        if ok {
            limit_tuples(diagram, c, cur, out);
        }
        cur.pop();
    }
}

/// A colimit cocone.
#[derive(Clone, Debug)]
pub struct Cocone {
    pub apex: Presheaf,
    pub legs: Vec<PresheafMap>,
}

impl Cocone {
    /// The unique map `apex -> Z` whose composites with the legs are `maps`.
    pub fn mediate(&self, maps: &[PresheafMap], z: &Presheaf) -> Result<PresheafMap> {
        if maps.len() != self.legs.len() {
            return Err(Error::Mismatch("one map per leg is required".into()));
        }
        let site = self.apex.site();
        let mut comps: Vec<Vec<usize>> = self.apex.sizes().into_iter().map(|n| vec![NONE; n]).collect();
        for (leg, m) in self.legs.iter().zip(maps) {
            for c in site.objects() {
                for x in 0..leg.dom.size(c) {
                    let slot = &mut comps[c][leg.comps[c][x]];
                    let v = m.comps[c][x];
                    if *slot != NONE && *slot != v {
                        return Err(Error::Mismatch("the given maps do not form a cocone".into()));
                    }
                    *slot = v;
                }
            }
        }
        PresheafMap::new(self.apex.clone(), z.clone(), comps)
    }
}

/// Pointwise colimit: disjoint union modulo the relation generated by the arrows.
pub fn colimit(diagram: &Diagram) -> Cocone {
    let site = &diagram.site;
    let k = diagram.objects.len();
    let mut class_of: Vec<Vec<Vec<usize>>> = vec![Vec::new(); k];
    let mut reps: Vec<Vec<(usize, usize)>> = Vec::with_capacity(site.num_objects());
    for c in site.objects() {
        let offsets: Vec<usize> = diagram
            .objects
            .iter()
            .scan(0, |acc, o| {
                let start = *acc;
                *acc += o.size(c);
                Some(start)
            })
            .collect();
        let n: usize = diagram.objects.iter().map(|o| o.size(c)).sum();
        let mut uf = crate::fincat::UnionFind::new(n);
        for (s, t, m) in &diagram.arrows {
            for x in 0..diagram.objects[*s].size(c) {
                uf.union(offsets[*s] + x, offsets[*t] + m.comps[c][x]);
            }
        }
        let blocks = uf.blocks();
        let mut which = vec![0; n];
        let mut rep = Vec::with_capacity(blocks.len());
        for (b, members) in blocks.iter().enumerate() {
            for &e in members {
                which[e] = b;
            }
            let least = members[0];
            let i = (0..k)
                .find(|&j| least < offsets[j] + diagram.objects[j].size(c))
                .expect("every slot belongs to a summand");
            rep.push((i, least - offsets[i]));
        }
        for i in 0..k {
            class_of[i].push((0..diagram.objects[i].size(c)).map(|x| which[offsets[i] + x]).collect());
        }
        reps.push(rep);
    }
    let labels = site
        .objects()
        .map(|c| {
            reps[c]
                .iter()
                .map(|&(i, x)| {
                    let l = diagram.objects[i].label(c, x);
                    if k == 1 {
                        l.to_string()
                    } else {
                        format!("{i}:{l}")
                    }
                })
                .collect()
        })
        .collect();
    let action = site
        .morphisms()
        .map(|f| {
            let (c, d) = (site.src(f), site.tgt(f));
            reps[d]
                .iter()
                .map(|&(i, x)| class_of[i][c][diagram.objects[i].act(f, x)])
                .collect()
        })
        .collect();
    let apex = Presheaf::unchecked(site.clone(), labels, action);
    let legs = (0..k)
        .map(|i| PresheafMap::unchecked(diagram.objects[i].clone(), apex.clone(), class_of[i].clone()))
        .collect();
    Cocone { apex, legs }
}

pub fn product(site: &Arc<FinCategory>, factors: &[Presheaf]) -> Cone {
    limit(&Diagram::discrete(site, factors.to_vec()))
}

pub fn binary_product(x: &Presheaf, y: &Presheaf) -> Cone {
    product(x.site(), &[x.clone(), y.clone()])
}

/// Pullback of a cospan `f: X -> Z <- Y: g`; legs go to `X` and `Y`.
pub fn pullback(f: &PresheafMap, g: &PresheafMap) -> Cone {
    let site = f.dom.site().clone();
    let d = Diagram {
        site,
        objects: vec![f.dom.clone(), g.dom.clone(), f.cod.clone()],
        arrows: vec![(0, 2, f.clone()), (1, 2, g.clone())],
    };
    let cone = limit(&d);
    // relabel with the first two coordinates only
    let labels = cone
        .apex
        .site()
        .objects()
        .map(|c| {
            cone.tuples[c]
                .iter()
                .map(|t| format!("({},{})", f.dom.label(c, t[0]), g.dom.label(c, t[1])))
                .collect()
        })
        .collect();
    reshape_cone(cone, labels, 2)
}

/// Equalizer of a parallel pair, with its single leg.
pub fn equalizer(f: &PresheafMap, g: &PresheafMap) -> Cone {
    let site = f.dom.site().clone();
    let d = Diagram {
        site,
        objects: vec![f.dom.clone(), f.cod.clone()],
        arrows: vec![(0, 1, f.clone()), (0, 1, g.clone())],
    };
    let cone = limit(&d);
    let labels = cone
        .apex
        .site()
        .objects()
        .map(|c| {
            cone.tuples[c]
                .iter()
                .map(|t| f.dom.label(c, t[0]).to_string())
                .collect()
        })
        .collect();
    reshape_cone(cone, labels, 1)
}

/// Keeps the first `keep` legs and coordinates; the dropped coordinates must
/// be determined by the kept ones.
fn reshape_cone(cone: Cone, labels: Vec<Vec<String>>, keep: usize) -> Cone {
    let apex = cone.apex.relabel(labels);
    let tuples: Vec<Vec<Vec<usize>>> = cone
        .tuples
        .iter()
        .map(|ts| ts.iter().map(|t| t[..keep].to_vec()).collect())
        .collect();
    let index = tuples
        .iter()
        .map(|ts| ts.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect())
        .collect();
    let legs = cone.legs[..keep]
        .iter()
        .map(|l| PresheafMap::unchecked(apex.clone(), l.cod.clone(), l.comps.clone()))
        .collect();
    Cone {
        apex,
        legs,
        tuples,
        index,
    }
}

pub fn coproduct(site: &Arc<FinCategory>, summands: &[Presheaf]) -> Cocone {
    colimit(&Diagram::discrete(site, summands.to_vec()))
}

pub fn coequalizer(f: &PresheafMap, g: &PresheafMap) -> Cocone {
    let d = Diagram {
        site: f.dom.site().clone(),
        objects: vec![f.dom.clone(), f.cod.clone()],
        arrows: vec![(0, 1, f.clone()), (0, 1, g.clone())],
    };
    let co = colimit(&d);
    Cocone {
        legs: vec![co.legs[1].clone()],
        apex: co.apex,
    }
}

/// `X -> X x X` together with the product cone.
pub fn diagonal(x: &Presheaf) -> (Cone, PresheafMap) {
    let xx = binary_product(x, x);
    let id = PresheafMap::identity(x);
    let d = xx.mediate(&[id.clone(), id]).expect("diagonal is a cone");
    (xx, d)
}

/// Product of maps `f x g`.
pub fn product_map(f: &PresheafMap, g: &PresheafMap, dom: &Cone, cod: &Cone) -> Result<PresheafMap> {
    let a = f.after(&dom.legs[0])?;
    let b = g.after(&dom.legs[1])?;
    cod.mediate(&[a, b])
}

/// Backtracking enumeration of natural transformations.
///
/// Choosing a value for an element forces the values on all of its
/// restrictions, so the search branches only on elements that are not
/// restrictions of earlier choices. Objects with more incoming arrows go
/// first since their elements force the most.
pub struct HomSearch<'a> {
    x: &'a Presheaf,
    y: &'a Presheaf,
    budget: u64,
    injective: bool,
    fixed: Option<&'a [Vec<usize>]>,
}

impl<'a> HomSearch<'a> {
    pub fn new(x: &'a Presheaf, y: &'a Presheaf) -> Self {
        HomSearch {
            x,
            y,
            budget: DEFAULT_BUDGET,
            injective: false,
            fixed: None,
        }
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Only injective components.
    pub fn injective(mut self) -> Self {
        self.injective = true;
        self
    }

    /// Pre-assigned values; `NONE` (`usize::MAX`) marks free elements.
    pub fn fixed(mut self, partial: &'a [Vec<usize>]) -> Self {
        self.fixed = Some(partial);
        self
    }

    /// Visits every natural transformation in a deterministic order.
    pub fn for_each(&self, mut visit: impl FnMut(&[Vec<usize>]) -> ControlFlow<()>) -> Result<()> {
        let (x, y) = (self.x, self.y);
        if !same_site(x.site(), y.site()) {
            return Err(Error::Mismatch("presheaves on different sites".into()));
        }
        let site = x.site().clone();
        let mut order: Vec<ObjId> = site.objects().collect();
        order.sort_by_key(|&c| (std::cmp::Reverse(site.arrows_into(c).len()), c));
        let elems: Vec<(ObjId, usize)> = order
            .iter()
            .flat_map(|&c| (0..x.size(c)).map(move |e| (c, e)))
            .collect();
        let mut st = SearchState {
            x,
            y,
            site: &site,
            assign: x.sizes().into_iter().map(|n| vec![NONE; n]).collect(),
            used: if self.injective {
                y.sizes().into_iter().map(|n| vec![false; n]).collect()
            } else {
                Vec::new()
            },
            trail: Vec::new(),
            nodes: 0,
            budget: self.budget,
        };
        if self.injective && site.objects().any(|c| x.size(c) > y.size(c)) {
            return Ok(());
        }
        if let Some(partial) = self.fixed {
            for c in site.objects() {
                for e in 0..x.size(c) {
                    let v = partial[c][e];
                    if v == NONE {
                        continue;
                    }
                    if !st.place(c, e, v) {
                        return Ok(());
                    }
                }
            }
        }
        st.dfs(&elems, 0, &mut visit).map(|_| ())
    }

    pub fn collect(&self) -> Result<Vec<PresheafMap>> {
        let mut out = Vec::new();
        self.for_each(|comps| {
            out.push(PresheafMap::unchecked(self.x.clone(), self.y.clone(), comps.to_vec()));
            ControlFlow::Continue(())
        })?;
        Ok(out)
    }

    pub fn count(&self) -> Result<u64> {
        let mut n = 0;
        self.for_each(|_| {
            n += 1;
            ControlFlow::Continue(())
        })?;
        Ok(n)
    }

    pub fn first(&self) -> Result<Option<PresheafMap>> {
        let mut out = None;
        self.for_each(|comps| {
            out = Some(PresheafMap::unchecked(self.x.clone(), self.y.clone(), comps.to_vec()));
            ControlFlow::Break(())
        })?;
        Ok(out)
    }
}

struct SearchState<'s> {
    x: &'s Presheaf,
    y: &'s Presheaf,
    site: &'s FinCategory,
    assign: Vec<Vec<usize>>,
    used: Vec<Vec<bool>>,
    trail: Vec<(ObjId, usize)>,
    nodes: u64,
    budget: u64,
}

impl SearchState<'_> {
    fn set(&mut self, c: ObjId, e: usize, v: usize) -> bool {
        let cur = self.assign[c][e];
        if cur != NONE {
            return cur == v;
        }
        if !self.used.is_empty() {
            if self.used[c][v] {
                return false;
            }
            self.used[c][v] = true;
        }
        self.assign[c][e] = v;
        self.trail.push((c, e));
        true
    }

    /// Assigns `e -> v` at `c` and all forced restrictions.
    fn place(&mut self, c: ObjId, e: usize, v: usize) -> bool {
        if !self.set(c, e, v) {
            return false;
        }
        for &f in self.site.arrows_into(c) {
            let a = self.site.src(f);
            if !self.set(a, self.x.act(f, e), self.y.act(f, v)) {
                return false;
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (c, e) = self.trail.pop().expect("trail is non-empty");
            if !self.used.is_empty() {
                self.used[c][self.assign[c][e]] = false;
            }
            self.assign[c][e] = NONE;
        }
    }

    fn dfs(
        &mut self,
        elems: &[(ObjId, usize)],
        mut i: usize,
        visit: &mut impl FnMut(&[Vec<usize>]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>> {
        while i < elems.len() && self.assign[elems[i].0][elems[i].1] != NONE {
            i += 1;
        }
        if i == elems.len() {
            return Ok(visit(&self.assign));
        }
        let (c, e) = elems[i];
        for v in 0..self.y.size(c) {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::SearchTooLarge { bound: self.budget });
            }
            let mark = self.trail.len();
            if self.place(c, e, v) {
                if let ControlFlow::Break(()) = self.dfs(elems, i + 1, visit)? {
                    self.undo(mark);
                    return Ok(ControlFlow::Break(()));
                }
            }
            self.undo(mark);
        }
        Ok(ControlFlow::Continue(()))
    }
}

/// All natural transformations `X -> Y`, deterministically ordered.
pub fn hom_enumerate(x: &Presheaf, y: &Presheaf, budget: u64) -> Result<Vec<PresheafMap>> {
    HomSearch::new(x, y).budget(budget).collect()
}

/// An isomorphism `X -> Y` if one exists.
pub fn find_iso(x: &Presheaf, y: &Presheaf, budget: u64) -> Result<Option<PresheafMap>> {
    if !same_site(x.site(), y.site()) || x.sizes() != y.sizes() {
        return Ok(None);
    }
    HomSearch::new(x, y).budget(budget).injective().first()
}

/// The exponential `Y^X` with its evaluation map.
#[derive(Clone, Debug)]
pub struct Exponential {
    pub object: Presheaf,
    pub base: Presheaf,
    pub target: Presheaf,
    /// `y(c) x X` for each `c`.
    probes: Vec<Cone>,
    families: Vec<Vec<Vec<Vec<usize>>>>,
    index: Vec<HashMap<Vec<Vec<usize>>, usize>>,
    /// `Y^X x X`.
    pub product: Cone,
    pub eval: PresheafMap,
}

impl Exponential {
    /// `Y^X(c) = Hom(y(c) x X, Y)`, acting by precomposition.
    pub fn new(x: &Presheaf, y: &Presheaf, budget: u64) -> Result<Exponential> {
        let site = x.site().clone();
        let mut probes = Vec::with_capacity(site.num_objects());
        let mut families = Vec::with_capacity(site.num_objects());
        let mut index = Vec::with_capacity(site.num_objects());
        for c in site.objects() {
            let yc = Presheaf::yoneda(&site, c);
            let probe = binary_product(&yc, x);
            let mut fam = Vec::new();
            HomSearch::new(&probe.apex, y)
                .budget(budget)
                .for_each(|comps| {
                    fam.push(comps.to_vec());
                    ControlFlow::Continue(())
                })?;
            index.push(fam.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect::<HashMap<_, _>>());
            families.push(fam);
            probes.push(probe);
        }
        let labels: Vec<Vec<String>> = site
            .objects()
            .map(|c| (0..families[c].len()).map(|i| format!("t{i}")).collect())
            .collect();
        // restriction along f: c' -> c sends theta to theta . (y(f) x X)
        let mut action = Vec::with_capacity(site.num_morphisms());
        for f in site.morphisms() {
            let (c1, c) = (site.src(f), site.tgt(f));
            let mut row = Vec::with_capacity(families[c].len());
            for theta in &families[c] {
                let mut restricted = Vec::with_capacity(site.num_objects());
                for d in site.objects() {
                    let r: Vec<usize> = (0..probes[c1].apex.size(d))
                        .map(|p| {
                            let t = probes[c1].tuple(d, p);
                            let g = site.hom(d, c1)[t[0]];
                            let fg = hom_position(&site, site.comp(f, g));
                            let q = probes[c].lookup(d, &[fg, t[1]]).expect("probe element");
                            theta[d][q]
                        })
                        .collect();
                    restricted.push(r);
                }
                row.push(index[c1][&restricted]);
            }
            action.push(row);
        }
        let object = Presheaf::unchecked(site.clone(), labels, action);
        let product = binary_product(&object, x);
        let eval_comps = site
            .objects()
            .map(|c| {
                let idc = hom_position(&site, site.identity(c));
                (0..product.apex.size(c))
                    .map(|p| {
                        let t = product.tuple(c, p);
                        let q = probes[c].lookup(c, &[idc, t[1]]).expect("probe element");
                        families[c][t[0]][c][q]
                    })
                    .collect()
            })
            .collect();
        let eval = PresheafMap::unchecked(product.apex.clone(), y.clone(), eval_comps);
        Ok(Exponential {
            object,
            base: x.clone(),
            target: y.clone(),
            probes,
            families,
            index,
            product,
            eval,
        })
    }

    /// The map `y(c) x X -> Y` named by element `t` of `Y^X(c)`, componentwise.
    pub fn family(&self, c: ObjId, t: usize) -> &[Vec<usize>] {
        &self.families[c][t]
    }

    /// The transpose `Z -> Y^X` of `h: Z x X -> Y`, where `zx` is the product cone of `h`'s domain.
    pub fn curry(&self, zx: &Cone, h: &PresheafMap) -> Result<PresheafMap> {
        let z = zx.legs[0].cod().clone();
        let site = z.site().clone();
        let mut comps = Vec::with_capacity(site.num_objects());
        for c in site.objects() {
            let mut row = Vec::with_capacity(z.size(c));
            for e in 0..z.size(c) {
                let family: Vec<Vec<usize>> = site
                    .objects()
                    .map(|d| {
                        (0..self.probes[c].apex.size(d))
                            .map(|p| {
                                let t = self.probes[c].tuple(d, p);
                                let g = site.hom(d, c)[t[0]];
                                let zg = z.act(g, e);
                                let q = zx.lookup(d, &[zg, t[1]]).expect("product element");
                                h.apply(d, q)
                            })
                            .collect()
                    })
                    .collect();
                row.push(*self.index[c].get(&family).ok_or_else(|| {
                    Error::LawFailure("transpose is not natural".into())
                })?);
            }
            comps.push(row);
        }
        PresheafMap::new(z, self.object.clone(), comps)
    }

    /// `ev . (g x X)` for `g: Z -> Y^X`.
    pub fn uncurry(&self, zx: &Cone, g: &PresheafMap) -> Result<PresheafMap> {
        let id = PresheafMap::identity(&self.base);
        let gx = product_map(g, &id, zx, &self.product)?;
        self.eval.after(&gx)
    }
}

/// The subobject classifier: sieves as bitmasks over morphism ids.
#[derive(Clone, Debug)]
pub struct OmegaData {
    pub omega: Presheaf,
    sieves: Vec<Vec<u64>>,
    index: Vec<HashMap<u64, usize>>,
    pub top: PresheafMap,
    pub bottom: PresheafMap,
    pub neg: PresheafMap,
}

fn bit(f: MorId) -> u64 {
    1u64 << f
}

impl OmegaData {
    pub fn new(site: &Arc<FinCategory>) -> OmegaData {
        let sieves: Vec<Vec<u64>> = site.objects().map(|c| sieves_on(site, c)).collect();
        let index: Vec<HashMap<u64, usize>> = sieves
            .iter()
            .map(|ss| ss.iter().enumerate().map(|(i, &s)| (s, i)).collect())
            .collect();
        let labels = site
            .objects()
            .map(|c| sieves[c].iter().map(|&s| sieve_label(site, s)).collect())
            .collect();
        let action = site
            .morphisms()
            .map(|f| {
                let c = site.src(f);
                sieves[site.tgt(f)]
                    .iter()
                    .map(|&s| index[c][&pull_sieve(site, f, s)])
                    .collect()
            })
            .collect();
        let omega = Presheaf::unchecked(site.clone(), labels, action);
        let one = Presheaf::terminal(site);
        let top_comps = site
            .objects()
            .map(|c| vec![index[c][&full_sieve(site, c)]])
            .collect();
        let bottom_comps = site.objects().map(|c| vec![index[c][&0]]).collect();
        let neg_comps = site
            .objects()
            .map(|c| {
                sieves[c]
                    .iter()
                    .map(|&s| index[c][&neg_sieve(site, c, s)])
                    .collect()
            })
            .collect();
        OmegaData {
            top: PresheafMap::unchecked(one.clone(), omega.clone(), top_comps),
            bottom: PresheafMap::unchecked(one, omega.clone(), bottom_comps),
            neg: PresheafMap::unchecked(omega.clone(), omega.clone(), neg_comps),
            omega,
            sieves,
            index,
        }
    }

    pub fn site(&self) -> &Arc<FinCategory> {
        self.omega.site()
    }

    pub fn sieve(&self, c: ObjId, i: usize) -> u64 {
        self.sieves[c][i]
    }

    pub fn sieves(&self, c: ObjId) -> &[u64] {
        &self.sieves[c]
    }

    pub fn index_of(&self, c: ObjId, sieve: u64) -> usize {
        self.index[c][&sieve]
    }

    pub fn top_at(&self, c: ObjId) -> usize {
        self.top.apply(c, 0)
    }

    pub fn bottom_at(&self, c: ObjId) -> usize {
        self.bottom.apply(c, 0)
    }

    /// `chi_u(x) = {f | X(f)(x) in u}`.
    pub fn classify(&self, u: &Subobject) -> PresheafMap {
        let x = u.ambient();
        let site = self.site();
        let comps = site
            .objects()
            .map(|c| {
                (0..x.size(c))
                    .map(|e| {
                        let s = site
                            .arrows_into(c)
                            .iter()
                            .filter(|&&f| u.contains(site.src(f), x.act(f, e)))
                            .fold(0u64, |acc, &f| acc | bit(f));
                        self.index[c][&s]
                    })
                    .collect()
            })
            .collect();
        PresheafMap::unchecked(x.clone(), self.omega.clone(), comps)
    }

    /// The subobject classified by `chi: X -> Omega`, i.e. the pullback of top.
    pub fn pullback_top(&self, chi: &PresheafMap) -> Subobject {
        let x = chi.dom().clone();
        let mask = x
            .site()
            .objects()
            .map(|c| (0..x.size(c)).map(|e| chi.apply(c, e) == self.top_at(c)).collect())
            .collect();
        Subobject::from_mask_unchecked(x, mask)
    }
}

/// Sieves on `c` in increasing bitmask order.
pub(crate) fn sieves_on(site: &FinCategory, c: ObjId) -> Vec<u64> {
    let principal: Vec<u64> = site.arrows_into(c).iter().map(|&f| generated_sieve(site, bit(f))).collect();
    let mut all: BTreeSet<u64> = BTreeSet::new();
    all.insert(0);
    let mut frontier = vec![0u64];
    while let Some(s) = frontier.pop() {
        for &p in &principal {
            let t = s | p;
            if all.insert(t) {
                frontier.push(t);
            }
        }
    }
    all.into_iter().collect()
}

/// Closure of a set of arrows into `c` under precomposition.
pub(crate) fn generated_sieve(site: &FinCategory, gens: u64) -> u64 {
    let mut s = 0;
    for f in site.morphisms().filter(|&f| gens & bit(f) != 0) {
        for &g in site.arrows_into(site.src(f)) {
            s |= bit(site.comp(f, g));
        }
    }
    s
}

pub(crate) fn full_sieve(site: &FinCategory, c: ObjId) -> u64 {
    site.arrows_into(c).iter().fold(0, |acc, &f| acc | bit(f))
}

/// `f* S = {g | f g in S}` for `f: c' -> c`.
pub(crate) fn pull_sieve(site: &FinCategory, f: MorId, s: u64) -> u64 {
    site.arrows_into(site.src(f))
        .iter()
        .filter(|&&g| s & bit(site.comp(f, g)) != 0)
        .fold(0, |acc, &g| acc | bit(g))
}

/// `not S = {g | g* S is empty}`.
pub(crate) fn neg_sieve(site: &FinCategory, c: ObjId, s: u64) -> u64 {
    site.arrows_into(c)
        .iter()
        .filter(|&&g| pull_sieve(site, g, s) == 0)
        .fold(0, |acc, &g| acc | bit(g))
}

fn sieve_label(site: &FinCategory, s: u64) -> String {
    let names: Vec<&str> = site
        .morphisms()
        .filter(|&f| s & bit(f) != 0)
        .map(|f| site.morphism_name(f))
        .collect();
    format!("{{{}}}", names.join(","))
}

/// A presheaf topos on a named site, with the classifier and the double
/// negation topology computed on first use.
#[derive(Debug)]
pub struct PresheafTopos {
    name: String,
    site: Arc<FinCategory>,
    budget: u64,
    omega: OnceLock<Arc<OmegaData>>,
    negneg: OnceLock<Arc<LTTopology>>,
}

impl PresheafTopos {
    pub fn new(name: impl Into<String>, site: FinCategory) -> Arc<PresheafTopos> {
        PresheafTopos::with_budget(name, site, DEFAULT_BUDGET)
    }

    pub fn with_budget(name: impl Into<String>, site: FinCategory, budget: u64) -> Arc<PresheafTopos> {
        Arc::new(PresheafTopos {
            name: name.into(),
            site: Arc::new(site),
            budget,
            omega: OnceLock::new(),
            negneg: OnceLock::new(),
        })
    }

    /// A topos over a standard site or corpus alias.
    pub fn standard(name: &str) -> Result<Arc<PresheafTopos>> {
        Ok(PresheafTopos::new(name, crate::fincat::standard_site(name)?))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn site(&self) -> &Arc<FinCategory> {
        &self.site
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn omega(&self) -> &Arc<OmegaData> {
        self.omega.get_or_init(|| Arc::new(OmegaData::new(&self.site)))
    }

    pub fn negneg(&self) -> &Arc<LTTopology> {
        self.negneg.get_or_init(|| {
            Arc::new(
                LTTopology::negneg(self.omega().clone())
                    .expect("double negation satisfies the topology laws"),
            )
        })
    }

    pub fn terminal(&self) -> Presheaf {
        Presheaf::terminal(&self.site)
    }

    pub fn initial(&self) -> Presheaf {
        Presheaf::initial(&self.site)
    }

    pub fn yoneda(&self, c: ObjId) -> Presheaf {
        Presheaf::yoneda(&self.site, c)
    }

    pub fn hom(&self, x: &Presheaf, y: &Presheaf) -> Result<Vec<PresheafMap>> {
        hom_enumerate(x, y, self.budget)
    }

    pub fn count_hom(&self, x: &Presheaf, y: &Presheaf) -> Result<u64> {
        HomSearch::new(x, y).budget(self.budget).count()
    }

    pub fn find_iso(&self, x: &Presheaf, y: &Presheaf) -> Result<Option<PresheafMap>> {
        find_iso(x, y, self.budget)
    }

    /// True when every arrow of the site is invertible-free of structure, i.e.
    /// the double negation topology is the identity.
    pub fn is_boolean(&self) -> bool {
        self.negneg().is_identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{parallel_pair, reflexive_graph, standard_site, terminal};

    fn site(c: FinCategory) -> Arc<FinCategory> {
        Arc::new(c)
    }

    /// One edge `a: u -> v` on the graph site.
    fn one_edge() -> Presheaf {
        let g = site(parallel_pair());
        let (e, v) = (g.object_index("E").unwrap(), g.object_index("V").unwrap());
        let s = g.morphism_index("s").unwrap();
        let mut sizes = vec![0; 2];
        sizes[e] = 1;
        sizes[v] = 2;
        Presheaf::from_fn(&g, &sizes, |f, y| if g.is_identity(f) { y } else if f == s { 0 } else { 1 }).unwrap()
    }

    #[test]
    fn yoneda_carriers_on_graph_site() {
        let g = site(parallel_pair());
        let (e, v) = (g.object_index("E").unwrap(), g.object_index("V").unwrap());
        let yv = Presheaf::yoneda(&g, v);
        assert_eq!((yv.size(v), yv.size(e)), (1, 0));
        let ye = Presheaf::yoneda(&g, e);
        assert_eq!((ye.size(v), ye.size(e)), (2, 1));
    }

    #[test]
    fn yoneda_on_reflexive_site() {
        let r = site(reflexive_graph());
        let e = r.object_index("E").unwrap();
        let v = r.object_index("V").unwrap();
        let ye = Presheaf::yoneda(&r, e);
        assert_eq!(ye.labels(v), &["d0", "d1"]);
        assert_eq!(ye.labels(e), &["d0s", "d1s", "id_E"]);
    }

    #[test]
    fn omega_sizes() {
        let t = site(terminal());
        assert_eq!(OmegaData::new(&t).omega.sizes(), vec![2]);
        let g = site(parallel_pair());
        let om = OmegaData::new(&g);
        assert_eq!(om.omega.size(g.object_index("V").unwrap()), 2);
        assert_eq!(om.omega.size(g.object_index("E").unwrap()), 5);
    }

    #[test]
    fn non_functorial_action_is_named() {
        let r = site(reflexive_graph());
        let e = r.object_index("E").unwrap();
        let s = r.morphism_index("s").unwrap();
        // two nodes, one edge whose degenerate structure is broken
        let mut sizes = vec![0; 2];
        sizes[e] = 1;
        sizes[r.object_index("V").unwrap()] = 2;
        let err = Presheaf::from_fn(&r, &sizes, |f, y| {
            if r.is_identity(f) {
                y
            } else if f == s {
                1
            } else {
                0
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidPresheaf(_)), "{err}");
    }

    #[test]
    fn hom_counts() {
        let t = site(terminal());
        let om = OmegaData::new(&t);
        let one = Presheaf::terminal(&t);
        assert_eq!(HomSearch::new(&one, &om.omega).count().unwrap(), 2);
        let x = one_edge();
        assert_eq!(HomSearch::new(&x, &Presheaf::terminal(x.site())).count().unwrap(), 1);
    }

    #[test]
    fn yoneda_lemma_counts() {
        for name in ["graphs", "reflexive_graphs", "right_zeros"] {
            let s = site(standard_site(name).unwrap());
            let x = one_edge_or_regular(&s);
            for c in s.objects() {
                let yc = Presheaf::yoneda(&s, c);
                assert_eq!(HomSearch::new(&yc, &x).count().unwrap() as usize, x.size(c));
            }
        }
    }

    fn one_edge_or_regular(s: &Arc<FinCategory>) -> Presheaf {
        // the representable on the last object is a reasonable test object everywhere
        Presheaf::yoneda(s, s.num_objects() - 1)
    }

    #[test]
    fn budget_is_enforced() {
        let t = site(terminal());
        let x = Presheaf::constant(&t, &(0..8).map(|i| i.to_string()).collect::<Vec<_>>());
        let err = HomSearch::new(&x, &x).budget(100).count().unwrap_err();
        assert!(err.is_bound());
    }

    #[test]
    fn limits_and_colimits_on_sets() {
        let t = site(terminal());
        let two = Presheaf::constant(&t, &["a".into(), "b".into()]);
        let three = Presheaf::constant(&t, &["x".into(), "y".into(), "z".into()]);
        assert_eq!(product(&t, &[two.clone(), three.clone()]).apex.sizes(), vec![6]);
        assert_eq!(coproduct(&t, &[two.clone(), three]).apex.sizes(), vec![5]);
        assert_eq!(product(&t, &[]).apex.sizes(), vec![1]);
        assert_eq!(coproduct(&t, &[]).apex.sizes(), vec![0]);
        let one = Presheaf::terminal(&t);
        let sum = coproduct(&t, &[one.clone(), one]);
        let q = coequalizer(&sum.legs[0].retype(&sum.legs[0].dom().clone(), &sum.apex).unwrap(), &sum.legs[1]);
        assert_eq!(q.apex.sizes(), vec![1]);
    }

    #[test]
    fn exponential_on_sets_and_eval() {
        let t = site(terminal());
        let x = Presheaf::constant(&t, &["a".into(), "b".into()]);
        let y = Presheaf::constant(&t, &["0".into(), "1".into(), "2".into()]);
        let exp = Exponential::new(&x, &y, DEFAULT_BUDGET).unwrap();
        assert_eq!(exp.object.sizes(), vec![9]);
        // curry . uncurry = id on every point of Y^X
        let one = Presheaf::terminal(&t);
        let zx = binary_product(&one, &x);
        for g in HomSearch::new(&one, &exp.object).collect().unwrap() {
            let h = exp.uncurry(&zx, &g).unwrap();
            assert_eq!(exp.curry(&zx, &h).unwrap(), g);
        }
    }

    #[test]
    fn classify_round_trip_on_one_edge() {
        let x = one_edge();
        let om = OmegaData::new(x.site());
        for u in crate::sublattice::subobjects_of(&x, DEFAULT_BUDGET).unwrap() {
            let chi = om.classify(&u);
            assert_eq!(om.pullback_top(&chi), u);
        }
    }

    #[test]
    fn quotient_rejects_incompatible_relation() {
        let x = one_edge();
        let g = x.site().clone();
        let v = g.object_index("V").unwrap();
        let e = g.object_index("E").unwrap();
        let mut class = vec![Vec::new(); 2];
        class[v] = vec![0, 1];
        class[e] = vec![0];
        assert!(x.quotient(&class).is_ok());
        class[v] = vec![0, 0];
        let (q, m) = x.quotient(&class).unwrap();
        assert_eq!(q.sizes()[v], 1);
        assert!(m.is_epic());
    }
}
