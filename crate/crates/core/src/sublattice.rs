//! The Heyting algebra of subobjects, the double negation topology, and the
//! separated, sheaf and sheafification constructions it induces.

use std::collections::HashSet;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fincat::{FinCategory, ObjId, UnionFind};
use crate::presheaf::{
    binary_product, coproduct, diagonal, full_sieve, Exponential, HomSearch, OmegaData,
    Presheaf, PresheafMap, PresheafTopos,
};

/// A restriction-closed family of subsets of the carriers of `ambient`.
#[derive(Clone, PartialEq, Eq)]
pub struct Subobject {
    ambient: Presheaf,
    mask: Vec<Vec<bool>>,
}

impl fmt::Debug for Subobject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = self.ambient.site();
        let mut m = f.debug_map();
        for c in site.objects() {
            let members: Vec<&str> = (0..self.ambient.size(c))
                .filter(|&x| self.mask[c][x])
                .map(|x| self.ambient.label(c, x))
                .collect();
            m.entry(&site.object_name(c), &members);
        }
        m.finish()
    }
}

impl Subobject {
    pub fn new(ambient: Presheaf, mask: Vec<Vec<bool>>) -> Result<Subobject> {
        let site = ambient.site().clone();
        if mask.len() != site.num_objects()
            || site.objects().any(|c| mask[c].len() != ambient.size(c))
        {
            return Err(Error::InvalidPresheaf("subobject mask has the wrong shape".into()));
        }
        for f in site.morphisms() {
            let (c, d) = (site.src(f), site.tgt(f));
            for y in 0..ambient.size(d) {
                if mask[d][y] && !mask[c][ambient.act(f, y)] {
                    return Err(Error::InvalidPresheaf(format!(
                        "family is not closed under `{}` at `{}`",
                        site.morphism_name(f),
                        ambient.label(d, y)
                    )));
                }
            }
        }
        Ok(Subobject { ambient, mask })
    }

    pub(crate) fn from_mask_unchecked(ambient: Presheaf, mask: Vec<Vec<bool>>) -> Subobject {
        debug_assert!(Subobject::new(ambient.clone(), mask.clone()).is_ok());
        Subobject { ambient, mask }
    }

    pub fn full(x: &Presheaf) -> Subobject {
        Subobject {
            mask: x.sizes().into_iter().map(|n| vec![true; n]).collect(),
            ambient: x.clone(),
        }
    }

    pub fn empty(x: &Presheaf) -> Subobject {
        Subobject {
            mask: x.sizes().into_iter().map(|n| vec![false; n]).collect(),
            ambient: x.clone(),
        }
    }

    /// The least subobject containing the given elements.
    pub fn generated_by(x: &Presheaf, elements: &[(ObjId, usize)]) -> Subobject {
        let site = x.site();
        let mut u = Subobject::empty(x);
        for &(c, e) in elements {
            for &f in site.arrows_into(c) {
                u.mask[site.src(f)][x.act(f, e)] = true;
            }
        }
        u
    }

    pub fn ambient(&self) -> &Presheaf {
        &self.ambient
    }

    pub fn mask(&self) -> &[Vec<bool>] {
        &self.mask
    }

    pub fn contains(&self, c: ObjId, x: usize) -> bool {
        self.mask[c][x]
    }

    pub fn size(&self) -> usize {
        self.mask.iter().flatten().filter(|&&b| b).count()
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().flatten().all(|&b| b)
    }

    pub fn is_empty(&self) -> bool {
        self.mask.iter().flatten().all(|&b| !b)
    }

    pub fn le(&self, other: &Subobject) -> bool {
        self.zip(other).all(|(a, b)| !a || b)
    }

    fn zip<'a>(&'a self, other: &'a Subobject) -> impl Iterator<Item = (bool, bool)> + 'a {
        self.mask
            .iter()
            .flatten()
            .copied()
            .zip(other.mask.iter().flatten().copied())
    }

    fn pointwise(&self, other: &Subobject, op: impl Fn(bool, bool) -> bool) -> Subobject {
        let mask = self
            .mask
            .iter()
            .zip(&other.mask)
            .map(|(a, b)| a.iter().zip(b).map(|(&p, &q)| op(p, q)).collect())
            .collect();
        Subobject {
            ambient: self.ambient.clone(),
            mask,
        }
    }

    pub fn meet(&self, other: &Subobject) -> Subobject {
        self.pointwise(other, |a, b| a && b)
    }

    pub fn join(&self, other: &Subobject) -> Subobject {
        self.pointwise(other, |a, b| a || b)
    }

    /// `x` lies in `u => v` at `c` when every restriction of `x` that lies in
    /// `u` also lies in `v`.
    pub fn implies(&self, other: &Subobject) -> Subobject {
        let x = &self.ambient;
        let site = x.site();
        let mask = site
            .objects()
            .map(|c| {
                (0..x.size(c))
                    .map(|e| {
                        site.arrows_into(c).iter().all(|&f| {
                            let (a, r) = (site.src(f), x.act(f, e));
                            !self.mask[a][r] || other.mask[a][r]
                        })
                    })
                    .collect()
            })
            .collect();
        Subobject {
            ambient: x.clone(),
            mask,
        }
    }

    pub fn neg(&self) -> Subobject {
        self.implies(&Subobject::empty(&self.ambient))
    }

    /// The subobject as a presheaf, with labels kept, and its inclusion.
    pub fn to_presheaf(&self) -> (Presheaf, PresheafMap) {
        let x = &self.ambient;
        let site = x.site();
        let members: Vec<Vec<usize>> = site
            .objects()
            .map(|c| (0..x.size(c)).filter(|&e| self.mask[c][e]).collect())
            .collect();
        let mut position = vec![Vec::new(); site.num_objects()];
        for c in site.objects() {
            position[c] = vec![usize::MAX; x.size(c)];
            for (i, &e) in members[c].iter().enumerate() {
                position[c][e] = i;
            }
        }
        let labels = site
            .objects()
            .map(|c| members[c].iter().map(|&e| x.label(c, e).to_string()).collect())
            .collect();
        let action = site
            .morphisms()
            .map(|f| {
                let a = site.src(f);
                members[site.tgt(f)]
                    .iter()
                    .map(|&e| position[a][x.act(f, e)])
                    .collect()
            })
            .collect();
        let u = Presheaf::unchecked(site.clone(), labels, action);
        let incl = PresheafMap::unchecked(u.clone(), x.clone(), members);
        (u, incl)
    }

    /// `f^{-1}(u)` for `f: X' -> X`.
    pub fn pullback(&self, f: &PresheafMap) -> Subobject {
        let x = f.dom();
        let mask = x
            .site()
            .objects()
            .map(|c| (0..x.size(c)).map(|e| self.mask[c][f.apply(c, e)]).collect())
            .collect();
        Subobject {
            ambient: x.clone(),
            mask,
        }
    }

    /// Flat key used for deduplication and ordering.
    fn key(&self) -> Vec<bool> {
        self.mask.iter().flatten().copied().collect()
    }
}

/// Every subobject of `X`, ordered by size and then by membership pattern.
/// Errors when more than `budget` subobjects exist.
pub fn subobjects_of(x: &Presheaf, budget: u64) -> Result<Vec<Subobject>> {
    let principal: Vec<Subobject> = x
        .elements()
        .map(|(c, e)| Subobject::generated_by(x, &[(c, e)]))
        .collect();
    let empty = Subobject::empty(x);
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    seen.insert(empty.key());
    let mut all = vec![empty.clone()];
    let mut frontier = vec![empty];
    while let Some(s) = frontier.pop() {
        for p in &principal {
            if p.le(&s) {
                continue;
            }
            let t = s.join(p);
            if seen.insert(t.key()) {
                if seen.len() as u64 > budget {
                    return Err(Error::SearchTooLarge { bound: budget });
                }
                all.push(t.clone());
                frontier.push(t);
            }
        }
    }
    all.sort_by_cached_key(|s| {
        let k = s.key();
        (k.iter().filter(|&&b| b).count(), k.into_iter().map(|b| !b).collect::<Vec<_>>())
    });
    Ok(all)
}

/// The complement of `u` when `u` is complemented, with the decomposition
/// `U + not U -> X` checked to be an isomorphism.
#[derive(Clone, Debug)]
pub struct Complement {
    pub complement: Subobject,
    pub decomposition: PresheafMap,
}

pub fn is_complemented(u: &Subobject) -> Option<Complement> {
    let n = u.neg();
    if !u.join(&n).is_full() {
        return None;
    }
    let x = u.ambient();
    let (a, ia) = u.to_presheaf();
    let (b, ib) = n.to_presheaf();
    let sum = coproduct(x.site(), &[a, b]);
    let decomposition = sum
        .mediate(&[ia, ib], x)
        .expect("inclusions form a cocone");
    debug_assert!(decomposition.is_iso());
    Some(Complement {
        complement: n,
        decomposition,
    })
}

/// A Lawvere-Tierney topology `j: Omega -> Omega`.
#[derive(Clone, Debug)]
pub struct LTTopology {
    omega: Arc<OmegaData>,
    pub j: PresheafMap,
}

impl LTTopology {
    /// Checks `j top = top`, `j j = j` and `j (S and T) = j S and j T`.
    pub fn new(omega: Arc<OmegaData>, j: PresheafMap) -> Result<LTTopology> {
        let site = omega.site().clone();
        let t = LTTopology { omega, j };
        for c in site.objects() {
            let top = t.omega.top_at(c);
            if t.j.apply(c, top) != top {
                return Err(Error::LawFailure(format!("j top != top at `{}`", site.object_name(c))));
            }
            let n = t.omega.sieves(c).len();
            for a in 0..n {
                if t.j.apply(c, t.j.apply(c, a)) != t.j.apply(c, a) {
                    return Err(Error::LawFailure(format!("j is not idempotent at `{}`", site.object_name(c))));
                }
                for b in 0..n {
                    let (sa, sb) = (t.omega.sieve(c, a), t.omega.sieve(c, b));
                    let meet = t.omega.index_of(c, sa & sb);
                    let lhs = t.omega.sieve(c, t.j.apply(c, meet));
                    let rhs = t.apply(c, sa) & t.apply(c, sb);
                    if lhs != rhs {
                        return Err(Error::LawFailure(format!(
                            "j does not preserve meets at `{}`",
                            site.object_name(c)
                        )));
                    }
                }
            }
        }
        Ok(t)
    }

    /// `j = not . not`.
    pub fn negneg(omega: Arc<OmegaData>) -> Result<LTTopology> {
        let j = omega.neg.after(&omega.neg)?;
        LTTopology::new(omega, j)
    }

    pub fn omega(&self) -> &Arc<OmegaData> {
        &self.omega
    }

    pub fn site(&self) -> &Arc<FinCategory> {
        self.omega.site()
    }

    /// `j` on a sieve given as a bitmask.
    pub fn apply(&self, c: ObjId, sieve: u64) -> u64 {
        self.omega.sieve(c, self.j.apply(c, self.omega.index_of(c, sieve)))
    }

    pub fn is_identity(&self) -> bool {
        self.j.is_iso() && self.j == PresheafMap::identity(&self.omega.omega)
    }

    pub fn closure(&self, u: &Subobject) -> Subobject {
        let chi = self.omega.classify(u);
        let jchi = self.j.after(&chi).expect("classifying map lands in Omega");
        self.omega.pullback_top(&jchi)
    }

    pub fn is_dense(&self, u: &Subobject) -> bool {
        self.closure(u).is_full()
    }

    pub fn is_closed(&self, u: &Subobject) -> bool {
        self.closure(u) == *u
    }

    pub fn is_dense_sieve(&self, c: ObjId, sieve: u64) -> bool {
        self.apply(c, sieve) == full_sieve(self.site(), c)
    }

    pub fn dense_sieves(&self, c: ObjId) -> Vec<u64> {
        self.omega
            .sieves(c)
            .iter()
            .copied()
            .filter(|&s| self.is_dense_sieve(c, s))
            .collect()
    }

    /// The least dense sieve; dense sieves are closed under intersection.
    pub fn min_dense_sieve(&self, c: ObjId) -> u64 {
        self.dense_sieves(c).into_iter().fold(u64::MAX, |a, s| a & s)
    }

    /// Closed truth values `Omega_j`, the equalizer of `j` and the identity.
    pub fn omega_j(&self) -> Subobject {
        let om = &self.omega.omega;
        let mask = om
            .site()
            .objects()
            .map(|c| (0..om.size(c)).map(|s| self.j.apply(c, s) == s).collect())
            .collect();
        Subobject::from_mask_unchecked(om.clone(), mask)
    }
}

/// A sieve on `c` as a subobject of the representable `y(c)`.
pub fn sieve_subobject(site: &Arc<FinCategory>, c: ObjId, sieve: u64) -> Subobject {
    let yc = Presheaf::yoneda(site, c);
    let mask = site
        .objects()
        .map(|d| site.hom(d, c).iter().map(|&g| sieve & (1u64 << g) != 0).collect())
        .collect();
    Subobject::from_mask_unchecked(yc, mask)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SheafStatus {
    pub separated: bool,
    pub sheaf: bool,
    pub witness: Option<String>,
}

/// Exact test: for every dense sieve `S` on every `c`, restriction
/// `X(c) = Hom(y c, X) -> Hom(S, X)` must be injective (separated) and
/// bijective (sheaf).
pub fn sheaf_status(x: &Presheaf, j: &LTTopology, budget: u64) -> Result<SheafStatus> {
    let site = x.site().clone();
    let mut status = SheafStatus {
        separated: true,
        sheaf: true,
        witness: None,
    };
    for c in site.objects() {
        for s in j.dense_sieves(c) {
            let sub = sieve_subobject(&site, c, s);
            let (sp, _) = sub.to_presheaf();
            // restriction of each element of X(c) to the sieve
            let restrict = |e: usize| -> Vec<Vec<usize>> {
                site.objects()
                    .map(|d| {
                        site.hom(d, c)
                            .iter()
                            .filter(|&&g| s & (1u64 << g) != 0)
                            .map(|&g| x.act(g, e))
                            .collect()
                    })
                    .collect()
            };
            let mut families: Vec<Vec<Vec<usize>>> = Vec::new();
            HomSearch::new(&sp, x).budget(budget).for_each(|comps| {
                families.push(comps.to_vec());
                ControlFlow::Continue(())
            })?;
            let mut hits = vec![0usize; families.len()];
            let mut seen: std::collections::HashMap<Vec<Vec<usize>>, usize> = std::collections::HashMap::new();
            for e in 0..x.size(c) {
                let r = restrict(e);
                if let Some(&prev) = seen.get(&r) {
                    if status.separated {
                        status.separated = false;
                        status.sheaf = false;
                        status.witness = Some(format!(
                            "`{}` and `{}` over `{}` agree on the dense sieve {}",
                            x.label(c, prev),
                            x.label(c, e),
                            site.object_name(c),
                            sieve_names(&site, s)
                        ));
                    }
                    continue;
                }
                seen.insert(r.clone(), e);
                let i = families.iter().position(|f| *f == r).expect("restriction is a family");
                hits[i] += 1;
            }
            if status.sheaf {
                if let Some(i) = hits.iter().position(|&h| h == 0) {
                    status.sheaf = false;
                    let fam: Vec<String> = site
                        .objects()
                        .flat_map(|d| {
                            let sp = &sp;
                            families[i][d]
                                .iter()
                                .enumerate()
                                .map(move |(k, &v)| format!("{}->{}", sp.label(d, k), x.label(d, v)))
                        })
                        .collect();
                    status.witness = Some(format!(
                        "family [{}] on the dense sieve {} over `{}` has no amalgamation",
                        fam.join(", "),
                        sieve_names(&site, s),
                        site.object_name(c)
                    ));
                }
            }
        }
    }
    Ok(status)
}

fn sieve_names(site: &FinCategory, s: u64) -> String {
    let names: Vec<&str> = site
        .morphisms()
        .filter(|&f| s & (1u64 << f) != 0)
        .map(|f| site.morphism_name(f))
        .collect();
    format!("{{{}}}", names.join(","))
}

/// Separatedness via the diagonal: `X` is separated iff its diagonal is closed.
pub fn is_separated_by_diagonal(x: &Presheaf, j: &LTTopology) -> bool {
    let (_, d) = diagonal(x);
    j.is_closed(&d.image())
}

/// Bounded variant: for every test object `Y` and every dense `U` in `Y`,
/// restriction `Hom(Y, X) -> Hom(U, X)` is a bijection.
pub fn sheaf_status_bounded(
    x: &Presheaf,
    j: &LTTopology,
    tests: &[Presheaf],
    budget: u64,
) -> Result<SheafStatus> {
    let mut status = SheafStatus {
        separated: true,
        sheaf: true,
        witness: None,
    };
    for y in tests {
        let homs = HomSearch::new(y, x).budget(budget).collect()?;
        for u in subobjects_of(y, budget)? {
            if !j.is_dense(&u) {
                continue;
            }
            let (up, incl) = u.to_presheaf();
            let n_u = HomSearch::new(&up, x).budget(budget).count()?;
            let restricted: HashSet<Vec<Vec<usize>>> = homs
                .iter()
                .map(|h| h.after(&incl).expect("inclusion composes").comps().to_vec())
                .collect();
            if (restricted.len() as u64) < homs.len() as u64 && status.separated {
                status.separated = false;
                status.witness = Some(format!("two maps out of {y:?} agree on the dense part {u:?}"));
            }
            if (restricted.len() as u64) < n_u && status.sheaf {
                status.sheaf = false;
                if status.witness.is_none() {
                    status.witness = Some(format!("a map out of the dense part {u:?} of {y:?} does not extend"));
                }
            }
        }
    }
    status.sheaf &= status.separated;
    Ok(status)
}

/// The sheaf reflection with its unit and the intermediate separated quotient.
#[derive(Clone, Debug)]
pub struct Sheafification {
    pub separated: Presheaf,
    pub quotient: PresheafMap,
    pub sheaf: Presheaf,
    pub unit: PresheafMap,
}

/// Quotient by the closure of the diagonal, then close the image of the
/// singleton map `S -> Omega_j^S`.
pub fn sheafify(x: &Presheaf, topos: &PresheafTopos) -> Result<Sheafification> {
    let j = topos.negneg();
    let site = x.site().clone();
    let (xx, d) = diagonal(x);
    let rel = j.closure(&d.image());
    let class: Vec<Vec<usize>> = site
        .objects()
        .map(|c| {
            (0..x.size(c))
                .map(|e| {
                    (0..x.size(c))
                        .find(|&e2| rel.contains(c, xx.lookup(c, &[e, e2]).expect("pair")))
                        .expect("closure of the diagonal is reflexive")
                })
                .collect()
        })
        .collect();
    let (sep, quotient) = x.quotient(&class)?;
    // Omega_j as a presheaf; the characteristic map of the diagonal of a
    // separated object lands in it
    let (omj, omj_incl) = j.omega_j().to_presheaf();
    let (ss, dsep) = diagonal(&sep);
    let chi = j.omega().classify(&dsep.image());
    let mut chi_j = Vec::with_capacity(site.num_objects());
    for c in site.objects() {
        let row: Option<Vec<usize>> = (0..ss.apex.size(c))
            .map(|p| omj_incl.comps()[c].iter().position(|&v| v == chi.apply(c, p)))
            .collect();
        chi_j.push(row.ok_or_else(|| Error::LawFailure("separated quotient has a non-closed diagonal".into()))?);
    }
    let chi_j = PresheafMap::new(ss.apex.clone(), omj.clone(), chi_j)?;
    let exp = Exponential::new(&sep, &omj, topos.budget())?;
    let singleton = exp.curry(&ss, &chi_j)?;
    let closed = j.closure(&singleton.image());
    let (sheaf, incl) = closed.to_presheaf();
    // corestrict the singleton map to the closed image
    let comps = site
        .objects()
        .map(|c| {
            (0..sep.size(c))
                .map(|e| {
                    let v = singleton.apply(c, e);
                    incl.comps()[c].iter().position(|&w| w == v).expect("image lies in its closure")
                })
                .collect()
        })
        .collect();
    let eta_s = PresheafMap::new(sep.clone(), sheaf.clone(), comps)?;
    let unit = eta_s.after(&quotient)?;
    Ok(Sheafification {
        separated: sep,
        quotient,
        sheaf,
        unit,
    })
}

/// `X+(c) = Hom(S_min(c), X)` with its unit. Twice applied it gives the
/// sheafification; used as an independent check.
pub fn plus_construction(x: &Presheaf, j: &LTTopology, budget: u64) -> Result<(Presheaf, PresheafMap)> {
    let site = x.site().clone();
    let mins: Vec<u64> = site.objects().map(|c| j.min_dense_sieve(c)).collect();
    let mut families: Vec<Vec<Vec<Vec<usize>>>> = Vec::with_capacity(site.num_objects());
    for c in site.objects() {
        let (sp, _) = sieve_subobject(&site, c, mins[c]).to_presheaf();
        let mut fam = Vec::new();
        HomSearch::new(&sp, x).budget(budget).for_each(|comps| {
            fam.push(comps.to_vec());
            ControlFlow::Continue(())
        })?;
        families.push(fam);
    }
    // position of g in the sieve presheaf at d
    let pos = |c: ObjId, g: usize| -> usize {
        let d = site.src(g);
        site.hom(d, c)
            .iter()
            .filter(|&&h| mins[c] & (1u64 << h) != 0)
            .position(|&h| h == g)
            .expect("arrow lies in the sieve")
    };
    let find = |c: ObjId, fam: &Vec<Vec<usize>>| families[c].iter().position(|f| f == fam).expect("family");
    let mut action = Vec::with_capacity(site.num_morphisms());
    for f in site.morphisms() {
        let (c1, c) = (site.src(f), site.tgt(f));
        let row = families[c]
            .iter()
            .map(|phi| {
                let restricted: Vec<Vec<usize>> = site
                    .objects()
                    .map(|d| {
                        site.hom(d, c1)
                            .iter()
                            .filter(|&&g| mins[c1] & (1u64 << g) != 0)
                            .map(|&g| phi[d][pos(c, site.comp(f, g))])
                            .collect()
                    })
                    .collect();
                find(c1, &restricted)
            })
            .collect();
        action.push(row);
    }
    let labels = site
        .objects()
        .map(|c| (0..families[c].len()).map(|i| format!("m{i}")).collect())
        .collect();
    let plus = Presheaf::new(site.clone(), labels, action)?;
    let unit_comps = site
        .objects()
        .map(|c| {
            (0..x.size(c))
                .map(|e| {
                    let fam: Vec<Vec<usize>> = site
                        .objects()
                        .map(|d| {
                            site.hom(d, c)
                                .iter()
                                .filter(|&&g| mins[c] & (1u64 << g) != 0)
                                .map(|&g| x.act(g, e))
                                .collect()
                        })
                        .collect();
                    find(c, &fam)
                })
                .collect()
        })
        .collect();
    let unit = PresheafMap::new(x.clone(), plus.clone(), unit_comps)?;
    Ok((plus, unit))
}

/// Closure operator laws on every subobject of `X`: inflationary, idempotent,
/// monotone and meet preserving. Returns the first violation.
pub fn closure_laws(x: &Presheaf, j: &LTTopology, budget: u64) -> Result<Option<String>> {
    let subs = subobjects_of(x, budget)?;
    let closures: Vec<Subobject> = subs.iter().map(|u| j.closure(u)).collect();
    for (u, cu) in subs.iter().zip(&closures) {
        if !u.le(cu) {
            return Ok(Some(format!("closure of {u:?} is not inflationary")));
        }
        if j.closure(cu) != *cu {
            return Ok(Some(format!("closure of {u:?} is not idempotent")));
        }
    }
    for (a, ca) in subs.iter().zip(&closures) {
        for (b, cb) in subs.iter().zip(&closures) {
            if a.le(b) && !ca.le(cb) {
                return Ok(Some(format!("closure is not monotone at {a:?} <= {b:?}")));
            }
            if j.closure(&a.meet(b)) != ca.meet(cb) {
                return Ok(Some(format!("closure does not preserve the meet of {a:?} and {b:?}")));
            }
        }
    }
    Ok(None)
}

/// Connected components of the relation "related by the closure of the
/// diagonal"; exposed for callers that need the separated quotient only.
pub fn separated_classes(x: &Presheaf, j: &LTTopology) -> Vec<Vec<usize>> {
    let (xx, d) = diagonal(x);
    let rel = j.closure(&d.image());
    x.site()
        .objects()
        .map(|c| {
            let n = x.size(c);
            let mut uf = UnionFind::new(n);
            for a in 0..n {
                for b in 0..n {
                    if rel.contains(c, xx.lookup(c, &[a, b]).expect("pair")) {
                        uf.union(a, b);
                    }
                }
            }
            (0..n).map(|a| uf.find(a)).collect()
        })
        .collect()
}

/// `X x Y` restricted to the pairs in both subobjects, for product tests.
pub fn product_subobject(u: &Subobject, v: &Subobject) -> Subobject {
    let cone = binary_product(u.ambient(), v.ambient());
    let mask = cone
        .apex
        .site()
        .objects()
        .map(|c| {
            (0..cone.apex.size(c))
                .map(|p| {
                    let t = cone.tuple(c, p);
                    u.contains(c, t[0]) && v.contains(c, t[1])
                })
                .collect()
        })
        .collect();
    Subobject::from_mask_unchecked(cone.apex, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{parallel_pair, reflexive_graph, standard_site, terminal};
    use crate::presheaf::DEFAULT_BUDGET;

    fn graph(vertices: usize, edges: &[(usize, usize)]) -> Presheaf {
        let g = Arc::new(parallel_pair());
        let (e, v) = (g.object_index("E").unwrap(), g.object_index("V").unwrap());
        let s = g.morphism_index("s").unwrap();
        let mut sizes = vec![0; 2];
        sizes[e] = edges.len();
        sizes[v] = vertices;
        Presheaf::from_fn(&g, &sizes, |f, y| {
            if g.is_identity(f) {
                y
            } else if f == s {
                edges[y].0
            } else {
                edges[y].1
            }
        })
        .unwrap()
    }

    fn vertices_only(x: &Presheaf) -> Subobject {
        let v = x.site().object_index("V").unwrap();
        let mask = x
            .site()
            .objects()
            .map(|c| vec![c == v; x.size(c)])
            .collect();
        Subobject::new(x.clone(), mask).unwrap()
    }

    #[test]
    fn subobject_counts() {
        let t = Arc::new(terminal());
        assert_eq!(subobjects_of(&Presheaf::terminal(&t), 100).unwrap().len(), 2);
        assert_eq!(subobjects_of(&Presheaf::initial(&t), 100).unwrap().len(), 1);
        let g = Arc::new(parallel_pair());
        let ye = Presheaf::yoneda(&g, g.object_index("E").unwrap());
        // the edge with both endpoints, or any set of the two endpoints
        assert_eq!(subobjects_of(&ye, 100).unwrap().len(), 5);
    }

    #[test]
    fn negation_of_vertex_set_in_one_edge_graph() {
        let x = graph(2, &[(0, 1)]);
        let u = vertices_only(&x);
        assert!(u.neg().is_empty());
        assert!(is_complemented(&u).is_none());
        assert!(Subobject::full(&x).neg().is_empty());
        assert!(Subobject::empty(&x).neg().is_full());
    }

    #[test]
    fn distributive_and_heyting_laws() {
        let x = graph(3, &[(0, 1), (1, 1)]);
        let subs = subobjects_of(&x, DEFAULT_BUDGET).unwrap();
        for a in &subs {
            for b in &subs {
                // adjunction: c <= (a => b) iff c and a <= b
                let ab = a.implies(b);
                for c in &subs {
                    assert_eq!(c.le(&ab), c.meet(a).le(b));
                    assert_eq!(a.meet(&b.join(c)), a.meet(b).join(&a.meet(c)));
                }
            }
        }
    }

    #[test]
    fn negneg_on_graph_site() {
        let g = Arc::new(parallel_pair());
        let om = Arc::new(OmegaData::new(&g));
        let j = LTTopology::negneg(om.clone()).unwrap();
        let e = g.object_index("E").unwrap();
        // closed sieves at E: empty, full and the two singletons, since the
        // negation of {s} is {t}; only {s, t} is dense besides the full sieve
        let closed: Vec<u64> = om.sieves(e).iter().copied().filter(|&s| j.apply(e, s) == s).collect();
        assert_eq!(closed.len(), 4);
        assert_eq!(j.dense_sieves(e).len(), 2);
        let t = Arc::new(terminal());
        assert!(LTTopology::negneg(Arc::new(OmegaData::new(&t))).unwrap().is_identity());
    }

    #[test]
    fn closure_matches_double_negation() {
        for x in [graph(2, &[(0, 1)]), graph(2, &[(0, 1), (0, 1)]), graph(3, &[(0, 0), (1, 2)])] {
            let j = LTTopology::negneg(Arc::new(OmegaData::new(x.site()))).unwrap();
            for u in subobjects_of(&x, DEFAULT_BUDGET).unwrap() {
                assert_eq!(j.closure(&u), u.neg().neg());
            }
            assert_eq!(closure_laws(&x, &j, DEFAULT_BUDGET).unwrap(), None);
        }
        let x = graph(2, &[(0, 1)]);
        let j = LTTopology::negneg(Arc::new(OmegaData::new(x.site()))).unwrap();
        assert!(j.is_dense(&vertices_only(&x)));
    }

    #[test]
    fn parallel_edges_are_not_separated() {
        let x = graph(2, &[(0, 1), (0, 1)]);
        let topos = PresheafTopos::new("graphs", parallel_pair());
        let st = sheaf_status(&x, topos.negneg(), DEFAULT_BUDGET).unwrap();
        assert!(!st.separated && !st.sheaf);
        assert!(st.witness.is_some());
        assert!(!is_separated_by_diagonal(&x, topos.negneg()));
    }

    #[test]
    fn boolean_sites_make_everything_a_sheaf() {
        let topos = PresheafTopos::standard("zmod2").unwrap();
        let s = topos.site();
        let swap = Presheaf::from_fn(s, &[2], |f, y| if s.is_identity(f) { y } else { 1 - y }).unwrap();
        let st = sheaf_status(&swap, topos.negneg(), DEFAULT_BUDGET).unwrap();
        assert!(st.sheaf);
        let sh = sheafify(&swap, &topos).unwrap();
        assert!(sh.unit.is_iso());
    }

    #[test]
    fn two_nodes_sheafify_to_the_codiscrete_graph() {
        let topos = PresheafTopos::new("reflexive_graphs", reflexive_graph());
        let r = topos.site().clone();
        let (e, v) = (r.object_index("E").unwrap(), r.object_index("V").unwrap());
        let mut sizes = vec![0; 2];
        sizes[v] = 2;
        sizes[e] = 2;
        // two nodes with their degenerate loops only
        let x = Presheaf::from_fn(&r, &sizes, |_, y| y).unwrap();
        let sh = sheafify(&x, &topos).unwrap();
        assert_eq!(sh.sheaf.size(v), 2);
        assert_eq!(sh.sheaf.size(e), 4);
        assert!(sheaf_status(&sh.sheaf, topos.negneg(), DEFAULT_BUDGET).unwrap().sheaf);
        let (p, _) = plus_construction(&x, topos.negneg(), DEFAULT_BUDGET).unwrap();
        let (pp, _) = plus_construction(&p, topos.negneg(), DEFAULT_BUDGET).unwrap();
        assert!(topos.find_iso(&pp, &sh.sheaf).unwrap().is_some());
    }

    #[test]
    fn zero_sheafifies_to_zero_on_graph_site() {
        let topos = PresheafTopos::new("graphs", parallel_pair());
        let sh = sheafify(&topos.initial(), &topos).unwrap();
        assert!(sh.sheaf.is_empty());
        let _ = standard_site("graphs").unwrap();
    }
}
