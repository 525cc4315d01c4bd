//! Finite categories as explicit tables, the standard sites, and the
//! category of elements of a presheaf.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CategoryViolation, Error, Result};
use crate::presheaf::Presheaf;

pub type ObjId = usize;
pub type MorId = usize;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MorphismSpec {
    pub name: String,
    pub src: String,
    pub tgt: String,
}

/// Serializable description of a finite category.
///
/// `compose` lists triples `[g, f, g.f]`. Composites with an identity may be
/// omitted; every other composable pair must be present.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct CategorySpec {
    pub objects: Vec<String>,
    pub morphisms: Vec<MorphismSpec>,
    pub identities: BTreeMap<String, String>,
    #[serde(default)]
    pub compose: Vec<[String; 3]>,
}

/// A validated finite category. Objects and morphisms are indexed in
/// lexicographic order of their names.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinCategory {
    objects: Vec<String>,
    mor_names: Vec<String>,
    src: Vec<ObjId>,
    tgt: Vec<ObjId>,
    identity: Vec<MorId>,
    table: Vec<MorId>,
    into: Vec<Vec<MorId>>,
    hom: Vec<Vec<Vec<MorId>>>,
}

impl fmt::Debug for FinCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FinCategory({} objects, {} morphisms)",
            self.objects.len(),
            self.mor_names.len()
        )
    }
}

impl FinCategory {
    /// Validates a category description: endpoints, identities, a total
    /// composition table on composable pairs, identity laws and associativity.
    pub fn build(spec: &CategorySpec) -> Result<FinCategory> {
        let mut objects = spec.objects.clone();
        objects.sort();
        for w in objects.windows(2) {
            if w[0] == w[1] {
                return Err(CategoryViolation::DuplicateObject(w[0].clone()).into());
            }
        }
        let obj_index: HashMap<&str, ObjId> = objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.as_str(), i))
            .collect();

        let mut morphisms = spec.morphisms.clone();
        morphisms.sort_by(|a, b| a.name.cmp(&b.name));
        for w in morphisms.windows(2) {
            if w[0].name == w[1].name {
                return Err(CategoryViolation::DuplicateMorphism(w[0].name.clone()).into());
            }
        }
        let m = morphisms.len();
        if m > 64 {
            return Err(CategoryViolation::TooLarge(m).into());
        }
        let mut src = Vec::with_capacity(m);
        let mut tgt = Vec::with_capacity(m);
        for mor in &morphisms {
            for end in [&mor.src, &mor.tgt] {
                if !obj_index.contains_key(end.as_str()) {
                    return Err(CategoryViolation::UnknownEndpoint {
                        morphism: mor.name.clone(),
                        object: end.clone(),
                    }
                    .into());
                }
            }
            src.push(obj_index[mor.src.as_str()]);
            tgt.push(obj_index[mor.tgt.as_str()]);
        }
        let mor_names: Vec<String> = morphisms.iter().map(|m| m.name.clone()).collect();
        let mor_index: HashMap<&str, MorId> = mor_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();

        let mut identity = Vec::with_capacity(objects.len());
        for (o, name) in objects.iter().enumerate() {
            let Some(id_name) = spec.identities.get(name) else {
                return Err(CategoryViolation::MissingIdentity(name.clone()).into());
            };
            let Some(&id) = mor_index.get(id_name.as_str()) else {
                return Err(CategoryViolation::BadIdentity {
                    object: name.clone(),
                    morphism: id_name.clone(),
                }
                .into());
            };
            if src[id] != o || tgt[id] != o {
                return Err(CategoryViolation::BadIdentity {
                    object: name.clone(),
                    morphism: id_name.clone(),
                }
                .into());
            }
            identity.push(id);
        }
        if identity.len() != objects.len() {
            return Err(CategoryViolation::MissingIdentity(String::new()).into());
        }

        let mut table = vec![NONE; m * m];
        for [g, f, h] in &spec.compose {
            let lookup = |n: &String| {
                mor_index.get(n.as_str()).copied().ok_or_else(|| {
                    CategoryViolation::UnknownMorphism {
                        g: g.clone(),
                        f: f.clone(),
                        unknown: n.clone(),
                    }
                })
            };
            let (gi, fi, hi) = (lookup(g)?, lookup(f)?, lookup(h)?);
            if src[gi] != tgt[fi] {
                return Err(CategoryViolation::IllTyped {
                    g: g.clone(),
                    f: f.clone(),
                }
                .into());
            }
            if src[hi] != src[fi] || tgt[hi] != tgt[gi] {
                return Err(CategoryViolation::WrongEndpoints {
                    g: g.clone(),
                    f: f.clone(),
                    h: h.clone(),
                }
                .into());
            }
            let slot = &mut table[gi * m + fi];
            if *slot != NONE && *slot != hi {
                return Err(CategoryViolation::Conflicting {
                    g: g.clone(),
                    f: f.clone(),
                }
                .into());
            }
            *slot = hi;
        }
        // identity laws: fill or check
        for f in 0..m {
            let left = identity[tgt[f]];
            let right = identity[src[f]];
            for (g, ff) in [(left, f), (f, right)] {
                let slot = &mut table[g * m + ff];
                if *slot == NONE {
                    *slot = f;
                } else if *slot != f {
                    return Err(CategoryViolation::IdentityLaw {
                        g: mor_names[g].clone(),
                        f: mor_names[ff].clone(),
                    }
                    .into());
                }
            }
        }
        for g in 0..m {
            for f in 0..m {
                if src[g] == tgt[f] && table[g * m + f] == NONE {
                    return Err(CategoryViolation::MissingComposite {
                        g: mor_names[g].clone(),
                        f: mor_names[f].clone(),
                    }
                    .into());
                }
            }
        }
        for h in 0..m {
            for g in 0..m {
                if src[h] != tgt[g] {
                    continue;
                }
                let hg = table[h * m + g];
                for f in 0..m {
                    if src[g] != tgt[f] {
                        continue;
                    }
                    let gf = table[g * m + f];
                    if table[h * m + gf] != table[hg * m + f] {
                        return Err(CategoryViolation::NotAssociative {
                            h: mor_names[h].clone(),
                            g: mor_names[g].clone(),
                            f: mor_names[f].clone(),
                        }
                        .into());
                    }
                }
            }
        }
        Ok(Self::assemble(objects, mor_names, src, tgt, identity, table))
    }

    fn assemble(
        objects: Vec<String>,
        mor_names: Vec<String>,
        src: Vec<ObjId>,
        tgt: Vec<ObjId>,
        identity: Vec<MorId>,
        table: Vec<MorId>,
    ) -> FinCategory {
        let n = objects.len();
        let mut into = vec![Vec::new(); n];
        let mut hom = vec![vec![Vec::new(); n]; n];
        for f in 0..mor_names.len() {
            into[tgt[f]].push(f);
            hom[src[f]][tgt[f]].push(f);
        }
        FinCategory {
            objects,
            mor_names,
            src,
            tgt,
            identity,
            table,
            into,
            hom,
        }
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.mor_names.len()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjId> {
        0..self.objects.len()
    }

    pub fn morphisms(&self) -> impl Iterator<Item = MorId> {
        0..self.mor_names.len()
    }

    pub fn object_name(&self, c: ObjId) -> &str {
        &self.objects[c]
    }

    pub fn morphism_name(&self, f: MorId) -> &str {
        &self.mor_names[f]
    }

    pub fn object_index(&self, name: &str) -> Result<ObjId> {
        self.objects
            .binary_search_by(|o| o.as_str().cmp(name))
            .map_err(|_| Error::UnknownObject(name.to_string()))
    }

    pub fn morphism_index(&self, name: &str) -> Result<MorId> {
        self.mor_names
            .binary_search_by(|o| o.as_str().cmp(name))
            .map_err(|_| Error::UnknownMorphism(name.to_string()))
    }

    pub fn src(&self, f: MorId) -> ObjId {
        self.src[f]
    }

    pub fn tgt(&self, f: MorId) -> ObjId {
        self.tgt[f]
    }

    pub fn identity(&self, c: ObjId) -> MorId {
        self.identity[c]
    }

    pub fn is_identity(&self, f: MorId) -> bool {
        self.identity[self.src[f]] == f
    }

    /// `g . f`, defined when `src g == tgt f`.
    pub fn compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        let h = self.table[g * self.mor_names.len() + f];
        (h != NONE).then_some(h)
    }

    /// Composite of a composable pair; panics otherwise.
    pub fn comp(&self, g: MorId, f: MorId) -> MorId {
        self.compose(g, f)
            .unwrap_or_else(|| panic!("`{}` and `{}` are not composable", self.mor_names[g], self.mor_names[f]))
    }

    /// Morphisms with codomain `c`.
    pub fn arrows_into(&self, c: ObjId) -> &[MorId] {
        &self.into[c]
    }

    pub fn hom(&self, a: ObjId, b: ObjId) -> &[MorId] {
        &self.hom[a][b]
    }

    pub fn spec(&self) -> CategorySpec {
        let mut compose = Vec::new();
        for g in self.morphisms() {
            for f in self.morphisms() {
                if let Some(h) = self.compose(g, f) {
                    compose.push([
                        self.mor_names[g].clone(),
                        self.mor_names[f].clone(),
                        self.mor_names[h].clone(),
                    ]);
                }
            }
        }
        CategorySpec {
            objects: self.objects.clone(),
            morphisms: self
                .morphisms()
                .map(|f| MorphismSpec {
                    name: self.mor_names[f].clone(),
                    src: self.objects[self.src[f]].clone(),
                    tgt: self.objects[self.tgt[f]].clone(),
                })
                .collect(),
            identities: self
                .objects()
                .map(|c| (self.objects[c].clone(), self.mor_names[self.identity[c]].clone()))
                .collect(),
            compose,
        }
    }

    /// A generating set: morphisms scanned in order, kept when they are not
    /// composites of identities and earlier generators.
    pub fn generators(&self) -> Vec<MorId> {
        let m = self.num_morphisms();
        let mut keep: Vec<bool> = (0..m).map(|f| !self.is_identity(f)).collect();
        // arrows with many factorizations are the first to go
        let mut order: Vec<(usize, MorId)> = self
            .morphisms()
            .filter(|&f| !self.is_identity(f))
            .map(|f| {
                let ways = (0..m)
                    .flat_map(|g| (0..m).map(move |h| (g, h)))
                    .filter(|&(g, h)| {
                        !self.is_identity(g) && !self.is_identity(h) && self.compose(g, h) == Some(f)
                    })
                    .count();
                (ways, f)
            })
            .collect();
        order.sort_by(|a, b| b.cmp(a));
        for (_, f) in order {
            keep[f] = false;
            if !self.generated_by(&keep) {
                keep[f] = true;
            }
        }
        self.morphisms().filter(|&f| keep[f]).collect()
    }

    fn generated_by(&self, gens: &[bool]) -> bool {
        let m = self.num_morphisms();
        let mut reach = gens.to_vec();
        for c in self.objects() {
            reach[self.identity[c]] = true;
        }
        loop {
            let mut changed = false;
            for g in 0..m {
                for h in 0..m {
                    if reach[g] && reach[h] {
                        if let Some(k) = self.compose(g, h) {
                            if !reach[k] {
                                reach[k] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return reach.iter().all(|&r| r);
            }
        }
    }

    /// The discrete category on the given object names.
    pub fn discrete(names: &[String]) -> Result<FinCategory> {
        let spec = CategorySpec {
            objects: names.to_vec(),
            morphisms: names
                .iter()
                .map(|n| MorphismSpec {
                    name: format!("id_{n}"),
                    src: n.clone(),
                    tgt: n.clone(),
                })
                .collect(),
            identities: names.iter().map(|n| (n.clone(), format!("id_{n}"))).collect(),
            compose: Vec::new(),
        };
        FinCategory::build(&spec)
    }

    /// Two copies side by side, with names prefixed by `l.` and `r.`.
    pub fn disjoint_union(&self, other: &FinCategory) -> Result<FinCategory> {
        let mut out = CategorySpec::default();
        for (tag, c) in [("l", self), ("r", other)] {
            let s = c.spec();
            let n = |x: &String| format!("{tag}.{x}");
            out.objects.extend(s.objects.iter().map(n));
            out.morphisms.extend(s.morphisms.iter().map(|m| MorphismSpec {
                name: n(&m.name),
                src: n(&m.src),
                tgt: n(&m.tgt),
            }));
            out.identities.extend(s.identities.iter().map(|(k, v)| (n(k), n(v))));
            out.compose.extend(s.compose.iter().map(|[g, f, h]| [n(g), n(f), n(h)]));
        }
        FinCategory::build(&out)
    }
}

/// A functor between finite categories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinFunctor {
    pub source: Arc<FinCategory>,
    pub target: Arc<FinCategory>,
    pub on_objects: Vec<ObjId>,
    pub on_morphisms: Vec<MorId>,
}

impl FinFunctor {
    pub fn new(
        source: Arc<FinCategory>,
        target: Arc<FinCategory>,
        on_objects: Vec<ObjId>,
        on_morphisms: Vec<MorId>,
    ) -> Result<FinFunctor> {
        let fun = FinFunctor {
            source,
            target,
            on_objects,
            on_morphisms,
        };
        fun.validate()?;
        Ok(fun)
    }

    fn validate(&self) -> Result<()> {
        let (s, t) = (&self.source, &self.target);
        let bad = |msg: String| Err(Error::Mismatch(msg));
        if self.on_objects.len() != s.num_objects() || self.on_morphisms.len() != s.num_morphisms() {
            return bad("functor tables have the wrong length".into());
        }
        for f in s.morphisms() {
            let ff = self.on_morphisms[f];
            if t.src(ff) != self.on_objects[s.src(f)] || t.tgt(ff) != self.on_objects[s.tgt(f)] {
                return bad(format!("image of `{}` has the wrong endpoints", s.morphism_name(f)));
            }
        }
        for c in s.objects() {
            if self.on_morphisms[s.identity(c)] != t.identity(self.on_objects[c]) {
                return bad(format!("identity of `{}` is not preserved", s.object_name(c)));
            }
        }
        for g in s.morphisms() {
            for f in s.morphisms() {
                if let Some(h) = s.compose(g, f) {
                    let img = t.compose(self.on_morphisms[g], self.on_morphisms[f]);
                    if img != Some(self.on_morphisms[h]) {
                        return bad(format!(
                            "composite `{} . {}` is not preserved",
                            s.morphism_name(g),
                            s.morphism_name(f)
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Searches for an isomorphism of categories. Falls back to data equality
/// above eight objects.
pub fn find_isomorphism(a: &Arc<FinCategory>, b: &Arc<FinCategory>) -> Option<FinFunctor> {
    if a.num_objects() != b.num_objects() || a.num_morphisms() != b.num_morphisms() {
        return None;
    }
    if a.num_objects() > 8 {
        return (**a == **b).then(|| FinFunctor {
            source: a.clone(),
            target: b.clone(),
            on_objects: a.objects().collect(),
            on_morphisms: a.morphisms().collect(),
        });
    }
    let n = a.num_objects();
    let mut obj_map = vec![NONE; n];
    let mut used = vec![false; n];
    iso_objects(a, b, 0, &mut obj_map, &mut used)
}

fn iso_objects(
    a: &Arc<FinCategory>,
    b: &Arc<FinCategory>,
    i: usize,
    obj_map: &mut Vec<ObjId>,
    used: &mut Vec<bool>,
) -> Option<FinFunctor> {
    let n = a.num_objects();
    if i == n {
        let mut mor_map = vec![NONE; a.num_morphisms()];
        let mut mor_used = vec![false; b.num_morphisms()];
        return iso_morphisms(a, b, 0, obj_map, &mut mor_map, &mut mor_used);
    }
    for j in 0..n {
        if used[j] {
            continue;
        }
        // hom-set sizes against already mapped objects must agree
        let ok = (0..=i).all(|k| {
            let bk = if k == i { j } else { obj_map[k] };
            a.hom(i, k).len() == b.hom(j, bk).len() && a.hom(k, i).len() == b.hom(bk, j).len()
        });
        if !ok {
            continue;
        }
        used[j] = true;
        obj_map[i] = j;
        if let Some(f) = iso_objects(a, b, i + 1, obj_map, used) {
            return Some(f);
        }
        used[j] = false;
        obj_map[i] = NONE;
    }
    None
}

fn iso_morphisms(
    a: &Arc<FinCategory>,
    b: &Arc<FinCategory>,
    f: usize,
    obj_map: &[ObjId],
    mor_map: &mut Vec<MorId>,
    used: &mut Vec<bool>,
) -> Option<FinFunctor> {
    if f == a.num_morphisms() {
        return FinFunctor::new(a.clone(), b.clone(), obj_map.to_vec(), mor_map.clone()).ok();
    }
    let (s, t) = (obj_map[a.src(f)], obj_map[a.tgt(f)]);
    for &g in b.hom(s, t) {
        if used[g] {
            continue;
        }
        if a.is_identity(f) != b.is_identity(g) {
            continue;
        }
        mor_map[f] = g;
        // check composites among already mapped morphisms
        let consistent = (0..=f).all(|x| {
            (0..=f).all(|y| match a.compose(x, y) {
                Some(h) if h <= f => b.compose(mor_map[x], mor_map[y]) == Some(mor_map[h]),
                _ => true,
            })
        });
        if consistent {
            used[g] = true;
            if let Some(fun) = iso_morphisms(a, b, f + 1, obj_map, mor_map, used) {
                return Some(fun);
            }
            used[g] = false;
        }
        mor_map[f] = NONE;
    }
    None
}

/// Finest partition of the objects in which objects joined by a morphism
/// (in either direction) share a block. Blocks are sorted by least member.
pub fn connected_components(c: &FinCategory) -> Vec<Vec<ObjId>> {
    let mut uf = UnionFind::new(c.num_objects());
    for f in c.morphisms() {
        uf.union(c.src(f), c.tgt(f));
    }
    uf.blocks()
}

/// Disjoint-set forest with path halving; roots are the least members.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub(crate) fn blocks(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        by_root.into_values().collect()
    }
}

/// The category of elements of a presheaf with its projection.
#[derive(Clone, Debug)]
pub struct Elements {
    pub category: Arc<FinCategory>,
    pub projection: FinFunctor,
    /// `(c, x)` for every object of the category of elements.
    pub pairs: Vec<(ObjId, usize)>,
    /// Object of the category of elements for `(c, x)`.
    pub object_of: Vec<Vec<ObjId>>,
    /// `(f, y)` for every arrow, where `y` is the element over the codomain.
    pub arrow_pairs: Vec<(MorId, usize)>,
}

impl Elements {
    pub fn object(&self, c: ObjId, x: usize) -> ObjId {
        self.object_of[c][x]
    }

    /// The arrow `f@y` into `(tgt f, y)`.
    pub fn arrow(&self, f: MorId, y: usize) -> MorId {
        self.arrow_pairs
            .iter()
            .position(|&p| p == (f, y))
            .expect("arrow of the category of elements")
    }
}

/// Objects `(c, x)` with `x` in `P(c)`; arrows `(c,x) -> (d,y)` are site
/// arrows `f: c -> d` with `P(f)(y) = x`.
pub fn category_of_elements(p: &Presheaf) -> Result<Elements> {
    let site = p.site();
    let obj_name = |c: ObjId, x: usize| format!("({}:{})", site.object_name(c), p.label(c, x));
    let mor_name = |f: MorId, y: usize| {
        format!("{}@({}:{})", site.morphism_name(f), site.object_name(site.tgt(f)), p.label(site.tgt(f), y))
    };
    let mut spec = CategorySpec::default();
    for c in site.objects() {
        for x in 0..p.size(c) {
            spec.objects.push(obj_name(c, x));
            spec.identities
                .insert(obj_name(c, x), mor_name(site.identity(c), x));
        }
    }
    // morphisms indexed by (f, y)
    let mut arrows: Vec<(MorId, usize)> = Vec::new();
    for f in site.morphisms() {
        let (c, d) = (site.src(f), site.tgt(f));
        for y in 0..p.size(d) {
            let x = p.act(f, y);
            spec.morphisms.push(MorphismSpec {
                name: mor_name(f, y),
                src: obj_name(c, x),
                tgt: obj_name(d, y),
            });
            arrows.push((f, y));
        }
    }
    for &(g, z) in &arrows {
        for &(f, y) in &arrows {
            // (g, z): (d, y') -> (e, z), (f, y): (c, x) -> (d, y); composable iff y' = y
            if site.src(g) == site.tgt(f) && p.act(g, z) == y {
                let h = site.comp(g, f);
                spec.compose
                    .push([mor_name(g, z), mor_name(f, y), mor_name(h, z)]);
            }
        }
    }
    let cat = Arc::new(FinCategory::build(&spec)?);
    let mut object_of = Vec::with_capacity(site.num_objects());
    let mut pairs = vec![(0, 0); cat.num_objects()];
    for c in site.objects() {
        let mut row = Vec::with_capacity(p.size(c));
        for x in 0..p.size(c) {
            let o = cat.object_index(&obj_name(c, x))?;
            pairs[o] = (c, x);
            row.push(o);
        }
        object_of.push(row);
    }
    let on_objects = pairs.iter().map(|&(c, _)| c).collect();
    let mut on_morphisms = vec![0; cat.num_morphisms()];
    let mut arrow_pairs = vec![(0, 0); cat.num_morphisms()];
    for &(f, y) in &arrows {
        let m = cat.morphism_index(&mor_name(f, y))?;
        on_morphisms[m] = f;
        arrow_pairs[m] = (f, y);
    }
    let projection = FinFunctor::new(cat.clone(), site.clone(), on_objects, on_morphisms)?;
    Ok(Elements {
        category: cat,
        projection,
        pairs,
        object_of,
        arrow_pairs,
    })
}

/// A finite monoid given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidTable {
    pub elements: Vec<String>,
    /// `mul[a][b] = a * b`
    pub mul: Vec<Vec<usize>>,
}

impl MonoidTable {
    pub fn unit(&self) -> Result<usize> {
        let n = self.elements.len();
        (0..n)
            .find(|&u| (0..n).all(|a| self.mul[u][a] == a && self.mul[a][u] == a))
            .ok_or_else(|| CategoryViolation::Monoid("no two-sided unit".into()).into())
    }

    fn validate(&self) -> Result<()> {
        let n = self.elements.len();
        if n == 0 || self.mul.len() != n || self.mul.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(CategoryViolation::Monoid("table is not an n x n table over the elements".into()).into());
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.mul[self.mul[a][b]][c] != self.mul[a][self.mul[b][c]] {
                        return Err(CategoryViolation::Monoid(format!(
                            "({0}{1}){2} != {0}({1}{2})",
                            self.elements[a], self.elements[b], self.elements[c]
                        ))
                        .into());
                    }
                }
            }
        }
        self.unit().map(|_| ())
    }

    pub fn cyclic(n: usize) -> MonoidTable {
        let elements = (0..n)
            .map(|k| match k {
                0 => "1".to_string(),
                1 => "g".to_string(),
                k => format!("g{k}"),
            })
            .collect();
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        MonoidTable { elements, mul }
    }

    /// `{1, e}` with `e e = e`.
    pub fn idempotent() -> MonoidTable {
        MonoidTable {
            elements: vec!["1".into(), "e".into()],
            mul: vec![vec![0, 1], vec![1, 1]],
        }
    }

    /// `{1, e, f}` where `e` and `f` are right zeros: `x e = e`, `x f = f`.
    pub fn right_zeros() -> MonoidTable {
        MonoidTable {
            elements: vec!["1".into(), "e".into(), "f".into()],
            mul: vec![vec![0, 1, 2], vec![1, 1, 2], vec![2, 1, 2]],
        }
    }
}

/// Names accepted by [`standard_site`].
pub const STANDARD_SITES: &[&str] = &[
    "terminal",
    "parallel_pair",
    "reflexive_graph",
    "delta_truncated(0)",
    "delta_truncated(1)",
    "delta_truncated(2)",
    "zmod2",
    "zmod3",
    "idempotent",
    "right_zeros",
];

/// The one-object category of a finite monoid; composition `g . f` is `g * f`.
pub fn monoid_site(table: &MonoidTable) -> Result<FinCategory> {
    table.validate()?;
    let unit = table.unit()?;
    let n = table.elements.len();
    let spec = CategorySpec {
        objects: vec!["*".into()],
        morphisms: table
            .elements
            .iter()
            .map(|e| MorphismSpec {
                name: e.clone(),
                src: "*".into(),
                tgt: "*".into(),
            })
            .collect(),
        identities: [("*".to_string(), table.elements[unit].clone())].into(),
        compose: (0..n)
            .flat_map(|a| {
                (0..n).map(move |b| {
                    [
                        table.elements[a].clone(),
                        table.elements[b].clone(),
                        table.elements[table.mul[a][b]].clone(),
                    ]
                })
            })
            .collect(),
    };
    FinCategory::build(&spec)
}

fn mor(name: &str, src: &str, tgt: &str) -> MorphismSpec {
    MorphismSpec {
        name: name.into(),
        src: src.into(),
        tgt: tgt.into(),
    }
}

fn triples(list: &[[&str; 3]]) -> Vec<[String; 3]> {
    list.iter()
        .map(|t| [t[0].to_string(), t[1].to_string(), t[2].to_string()])
        .collect()
}

/// The site of directed graphs: `s, t: V -> E`.
pub fn parallel_pair() -> FinCategory {
    let spec = CategorySpec {
        objects: vec!["V".into(), "E".into()],
        morphisms: vec![
            mor("id_V", "V", "V"),
            mor("id_E", "E", "E"),
            mor("s", "V", "E"),
            mor("t", "V", "E"),
        ],
        identities: [("V".into(), "id_V".into()), ("E".into(), "id_E".into())].into(),
        compose: Vec::new(),
    };
    FinCategory::build(&spec).expect("parallel pair")
}

/// The site of reflexive graphs: `d0, d1: V -> E`, `s: E -> V` with
/// `s d0 = s d1 = id_V`; the composites `d0 s`, `d1 s` are idempotents on `E`.
pub fn reflexive_graph() -> FinCategory {
    let spec = CategorySpec {
        objects: vec!["V".into(), "E".into()],
        morphisms: vec![
            mor("id_V", "V", "V"),
            mor("id_E", "E", "E"),
            mor("d0", "V", "E"),
            mor("d1", "V", "E"),
            mor("s", "E", "V"),
            mor("d0s", "E", "E"),
            mor("d1s", "E", "E"),
        ],
        identities: [("V".into(), "id_V".into()), ("E".into(), "id_E".into())].into(),
        compose: triples(&[
            ["s", "d0", "id_V"],
            ["s", "d1", "id_V"],
            ["d0", "s", "d0s"],
            ["d1", "s", "d1s"],
            ["s", "d0s", "s"],
            ["s", "d1s", "s"],
            ["d0s", "d0", "d0"],
            ["d0s", "d1", "d0"],
            ["d1s", "d0", "d1"],
            ["d1s", "d1", "d1"],
            ["d0s", "d0s", "d0s"],
            ["d0s", "d1s", "d0s"],
            ["d1s", "d0s", "d1s"],
            ["d1s", "d1s", "d1s"],
        ]),
    };
    FinCategory::build(&spec).expect("reflexive graph")
}

pub fn terminal() -> FinCategory {
    let spec = CategorySpec {
        objects: vec!["*".into()],
        morphisms: vec![mor("id", "*", "*")],
        identities: [("*".into(), "id".into())].into(),
        compose: Vec::new(),
    };
    FinCategory::build(&spec).expect("terminal")
}

/// Full subcategory of the simplex category on `[0], ..., [n]`, `n <= 2`.
/// Arrows are monotone maps named `[k]->[l]:a0a1..` by their values.
pub fn delta_truncated(n: usize) -> Result<FinCategory> {
    if n > 2 {
        return Err(Error::UnknownSite(format!("delta_truncated({n}) (n is capped at 2)")));
    }
    fn monotone(k: usize, l: usize) -> Vec<Vec<usize>> {
        // non-decreasing sequences of length k+1 with values in 0..=l
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn go(k: usize, l: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k + 1 {
                out.push(cur.clone());
                return;
            }
            for v in lo..=l {
                cur.push(v);
                go(k, l, v, cur, out);
                cur.pop();
            }
        }
        go(k, l, 0, &mut cur, &mut out);
        out
    }
    let obj = |k: usize| format!("[{k}]");
    let name = |k: usize, l: usize, vals: &[usize]| {
        let v: String = vals.iter().map(|d| d.to_string()).collect();
        format!("[{k}]->[{l}]:{v}")
    };
    let mut spec = CategorySpec::default();
    let mut maps: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for k in 0..=n {
        spec.objects.push(obj(k));
        spec.identities
            .insert(obj(k), name(k, k, &(0..=k).collect::<Vec<_>>()));
        for l in 0..=n {
            for vals in monotone(k, l) {
                spec.morphisms.push(mor(&name(k, l, &vals), &obj(k), &obj(l)));
                maps.push((k, l, vals));
            }
        }
    }
    for (k2, l2, g) in &maps {
        for (k1, l1, f) in &maps {
            if k2 == l1 {
                let h: Vec<usize> = f.iter().map(|&i| g[i]).collect();
                spec.compose
                    .push([name(*k2, *l2, g), name(*k1, *l1, f), name(*k1, *l2, &h)]);
            }
        }
    }
    FinCategory::build(&spec)
}

/// Resolves a standard site or a corpus alias.
pub fn standard_site(name: &str) -> Result<FinCategory> {
    let name = name.trim();
    match name {
        "terminal" | "sets" => Ok(terminal()),
        "parallel_pair" | "graphs" => Ok(parallel_pair()),
        "reflexive_graph" | "reflexive_graphs" => Ok(reflexive_graph()),
        "zmod2" => monoid_site(&MonoidTable::cyclic(2)),
        "zmod3" => monoid_site(&MonoidTable::cyclic(3)),
        "idempotent" => monoid_site(&MonoidTable::idempotent()),
        "right_zeros" => monoid_site(&MonoidTable::right_zeros()),
        "delta1" => delta_truncated(1),
        _ => {
            if let Some(rest) = name.strip_prefix("delta_truncated(").and_then(|r| r.strip_suffix(')')) {
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::UnknownSite(name.to_string()))?;
                return delta_truncated(n);
            }
            if let Some(rest) = name.strip_prefix("monoid(").and_then(|r| r.strip_suffix(')')) {
                let table: MonoidTable =
                    serde_json::from_str(rest).map_err(|e| Error::Parse(e.to_string()))?;
                return monoid_site(&table);
            }
            Err(Error::UnknownSite(name.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_associative(c: &FinCategory) -> bool {
        c.morphisms().all(|h| {
            c.morphisms().all(|g| {
                c.morphisms().all(|f| match (c.compose(h, g), c.compose(g, f)) {
                    (Some(hg), Some(gf)) => c.compose(hg, f) == c.compose(h, gf),
                    _ => true,
                })
            })
        })
    }

    #[test]
    fn terminal_category() {
        let t = terminal();
        assert_eq!(t.num_objects(), 1);
        assert_eq!(t.num_morphisms(), 1);
    }

    #[test]
    fn graph_site_has_four_arrows() {
        let g = parallel_pair();
        assert_eq!(g.num_morphisms(), 4);
        let v = g.object_index("V").unwrap();
        let e = g.object_index("E").unwrap();
        assert_eq!(g.hom(v, e).len(), 2);
        assert!(g.hom(e, v).is_empty());
    }

    #[test]
    fn self_composite_of_source_map_is_rejected() {
        let mut spec = parallel_pair().spec();
        spec.compose.push(["s".into(), "s".into(), "s".into()]);
        let err = FinCategory::build(&spec).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidCategory(CategoryViolation::IllTyped { .. })
        ));
    }

    #[test]
    fn missing_composite_is_reported() {
        let mut spec = reflexive_graph().spec();
        spec.compose.retain(|t| !(t[0] == "d0" && t[1] == "s"));
        let err = FinCategory::build(&spec).unwrap_err();
        match err {
            Error::InvalidCategory(CategoryViolation::MissingComposite { g, f }) => {
                assert_eq!((g.as_str(), f.as_str()), ("d0", "s"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_associative_table_is_reported() {
        // two idempotents on one object with a table that breaks associativity
        let table = MonoidTable {
            elements: vec!["1".into(), "a".into(), "b".into()],
            mul: vec![vec![0, 1, 2], vec![1, 1, 1], vec![2, 2, 1]],
        };
        assert!(monoid_site(&table).is_err());
        let spec = CategorySpec {
            objects: vec!["*".into()],
            morphisms: ["1", "a", "b"].iter().map(|n| mor(n, "*", "*")).collect(),
            identities: [("*".into(), "1".into())].into(),
            compose: triples(&[
                ["a", "a", "a"],
                ["a", "b", "a"],
                ["b", "a", "b"],
                ["b", "b", "a"],
            ]),
        };
        let err = FinCategory::build(&spec).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidCategory(CategoryViolation::NotAssociative { .. })
        ));
    }

    #[test]
    fn reflexive_graph_composites() {
        let r = reflexive_graph();
        assert_eq!(r.num_morphisms(), 7);
        let e = r.object_index("E").unwrap();
        let d0s = r.morphism_index("d0s").unwrap();
        let d1s = r.morphism_index("d1s").unwrap();
        assert_ne!(d0s, d1s);
        for f in [d0s, d1s] {
            assert_eq!(r.comp(f, f), f);
            assert_eq!(r.src(f), e);
        }
        assert!(brute_force_associative(&r));
        let gens: Vec<&str> = r.generators().iter().map(|&g| r.morphism_name(g)).collect();
        assert_eq!(gens, vec!["d0", "d1", "s"]);
    }

    #[test]
    fn reflexive_graph_is_delta_one() {
        let a = Arc::new(reflexive_graph());
        let b = Arc::new(delta_truncated(1).unwrap());
        assert!(find_isomorphism(&a, &b).is_some());
        let c = Arc::new(parallel_pair());
        assert!(find_isomorphism(&a, &c).is_none());
    }

    #[test]
    fn delta_truncated_counts() {
        // monotone maps [k] -> [l] number C(k + l + 1, k + 1)
        let d2 = delta_truncated(2).unwrap();
        assert_eq!(d2.num_morphisms(), 1 + 2 + 3 + 1 + 3 + 6 + 1 + 4 + 10);
        assert!(brute_force_associative(&d2));
        assert!(delta_truncated(3).is_err());
    }

    #[test]
    fn monoid_sites() {
        let z2 = standard_site("zmod2").unwrap();
        assert_eq!(z2.num_morphisms(), 2);
        let g = z2.morphism_index("g").unwrap();
        assert_eq!(z2.comp(g, g), z2.identity(0));
        let rz = standard_site("right_zeros").unwrap();
        let (e, f) = (rz.morphism_index("e").unwrap(), rz.morphism_index("f").unwrap());
        assert_eq!(rz.comp(e, f), f);
        assert_eq!(rz.comp(f, e), e);
        assert!(standard_site("klein_bottle").is_err());
    }

    #[test]
    fn components() {
        assert_eq!(connected_components(&terminal()), vec![vec![0]]);
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let d = FinCategory::discrete(&names).unwrap();
        assert_eq!(connected_components(&d).len(), 3);
        assert_eq!(connected_components(&reflexive_graph()).len(), 1);
    }

    #[test]
    fn spec_round_trip() {
        for name in STANDARD_SITES {
            let c = standard_site(name).unwrap();
            let again = FinCategory::build(&c.spec()).unwrap();
            assert_eq!(c, again, "{name}");
        }
    }
}
