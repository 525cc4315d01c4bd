//! Decidable objects, the coreflection onto them, the reflection into them,
//! and the subobject singled out by global elements.
//!
//! An object is decidable when its diagonal is complemented. For presheaves
//! this happens exactly when every arrow acts injectively, which the tests
//! use as an independent oracle; the engine itself goes through the diagonal.

use std::ops::ControlFlow;

use crate::enumerate::enumerate_presheaves;
use crate::error::Result;
use crate::fincat::{ObjId, UnionFind};
use crate::presheaf::{diagonal, HomSearch, Presheaf, PresheafMap, PresheafTopos};
use crate::sublattice::{is_complemented, subobjects_of, Subobject};

#[derive(Clone, Debug)]
pub struct DecVerdict {
    pub decidable: bool,
    /// `K` with `X x X = diagonal + K`, when decidable.
    pub complement: Option<Subobject>,
}

pub fn is_decidable(x: &Presheaf) -> DecVerdict {
    let (_, d) = diagonal(x);
    match is_complemented(&d.image()) {
        Some(c) => DecVerdict {
            decidable: true,
            complement: Some(c.complement),
        },
        None => DecVerdict {
            decidable: false,
            complement: None,
        },
    }
}

/// Decidable presheaves up to isomorphism within the given carrier bounds.
pub fn dec_objects(topos: &PresheafTopos, max_per_object: usize, max_total: usize) -> Result<Vec<Presheaf>> {
    Ok(enumerate_presheaves(topos.site(), max_per_object, max_total, enumeration_budget(topos))?
        .into_iter()
        .filter(|x| is_decidable(x).decidable)
        .collect())
}

pub(crate) fn enumeration_budget(topos: &PresheafTopos) -> u64 {
    topos.budget().saturating_mul(20)
}

/// A verified coreflection `beta: CX -> X`.
#[derive(Clone, Debug)]
pub struct Coreflection {
    pub cx: Presheaf,
    pub counit: PresheafMap,
    pub subobject: Subobject,
    /// Number of decidable test objects against which factorization was checked.
    pub verified_against: usize,
}

#[derive(Clone, Debug)]
pub enum CoreflectionVerdict {
    Found(Coreflection),
    /// Decidable subobjects have several maximal members.
    NoMaximum { maximal: Vec<Subobject> },
    /// A map from a decidable test object does not factor.
    NoneUpToBound { witness: String },
}

impl CoreflectionVerdict {
    pub fn found(&self) -> Option<&Coreflection> {
        match self {
            CoreflectionVerdict::Found(c) => Some(c),
            _ => None,
        }
    }
}

/// Union of the decidable cyclic subobjects; the largest decidable subobject
/// when that union is itself decidable.
pub fn largest_decidable_subobject(x: &Presheaf) -> (Subobject, bool) {
    let mut acc = Subobject::empty(x);
    for (c, e) in x.elements() {
        let g = Subobject::generated_by(x, &[(c, e)]);
        if g.le(&acc) {
            continue;
        }
        if is_decidable(&g.to_presheaf().0).decidable {
            acc = acc.join(&g);
        }
    }
    let ok = is_decidable(&acc.to_presheaf().0).decidable;
    (acc, ok)
}

/// Candidate from [`largest_decidable_subobject`], then every map from every
/// test object into `X` must factor through it.
pub fn dec_coreflection(x: &Presheaf, tests: &[Presheaf], budget: u64) -> Result<CoreflectionVerdict> {
    let (cand, ok) = largest_decidable_subobject(x);
    if !ok {
        let maximal = maximal_decidable_subobjects(x, budget)?;
        return Ok(CoreflectionVerdict::NoMaximum { maximal });
    }
    let (cx, counit) = cand.to_presheaf();
    for d in tests {
        let mut witness = None;
        HomSearch::new(d, x).budget(budget).for_each(|comps| {
            let lands = comps
                .iter()
                .enumerate()
                .all(|(c, row)| row.iter().all(|&v| cand.contains(c, v)));
            if lands {
                ControlFlow::Continue(())
            } else {
                witness = Some(format!("a map from {d:?} leaves {cand:?}"));
                ControlFlow::Break(())
            }
        })?;
        if let Some(witness) = witness {
            return Ok(CoreflectionVerdict::NoneUpToBound { witness });
        }
    }
    Ok(CoreflectionVerdict::Found(Coreflection {
        cx,
        counit,
        subobject: cand,
        verified_against: tests.len(),
    }))
}

pub fn maximal_decidable_subobjects(x: &Presheaf, budget: u64) -> Result<Vec<Subobject>> {
    let dec: Vec<Subobject> = subobjects_of(x, budget)?
        .into_iter()
        .filter(|u| is_decidable(&u.to_presheaf().0).decidable)
        .collect();
    Ok(dec
        .iter()
        .filter(|u| !dec.iter().any(|v| *v != **u && u.le(v)))
        .cloned()
        .collect())
}

/// The reflection into decidable objects: merge any two elements that have a
/// common restriction, until every arrow acts injectively.
pub fn dec_reflection(x: &Presheaf) -> Result<(Presheaf, PresheafMap)> {
    let site = x.site().clone();
    let mut ufs: Vec<UnionFind> = site.objects().map(|c| UnionFind::new(x.size(c))).collect();
    loop {
        let mut changed = false;
        for f in site.morphisms() {
            let (a, d) = (site.src(f), site.tgt(f));
            // y, y' over d with f-restrictions in the same class are merged
            let n = x.size(d);
            for y in 0..n {
                for y2 in (y + 1)..n {
                    let (r1, r2) = (x.act(f, y), x.act(f, y2));
                    if ufs[a].find(r1) == ufs[a].find(r2) && ufs[d].union(y, y2) {
                        changed = true;
                    }
                }
            }
            // and the relation must be compatible with the action
            for y in 0..n {
                for y2 in (y + 1)..n {
                    if ufs[d].find(y) == ufs[d].find(y2) {
                        let (r1, r2) = (x.act(f, y), x.act(f, y2));
                        if ufs[a].union(r1, r2) {
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let class: Vec<Vec<usize>> = site
        .objects()
        .map(|c| (0..x.size(c)).map(|e| ufs[c].find(e)).collect())
        .collect();
    x.quotient(&class)
}

#[derive(Clone, Debug)]
pub enum McLartyVerdict {
    Unique(Subobject),
    /// Several maximal candidates; the hypotheses behind uniqueness fail.
    Ambiguous(Vec<Subobject>),
}

/// Maximal subobjects with decidable domain through which every global
/// element factors.
pub fn mclarty_subobject(x: &Presheaf, budget: u64) -> Result<McLartyVerdict> {
    let globals = x.global_elements();
    let through = |u: &Subobject| {
        globals
            .iter()
            .all(|g| g.iter().enumerate().all(|(c, &e)| u.contains(c as ObjId, e)))
    };
    let cands: Vec<Subobject> = subobjects_of(x, budget)?
        .into_iter()
        .filter(|u| through(u) && is_decidable(&u.to_presheaf().0).decidable)
        .collect();
    let maximal: Vec<Subobject> = cands
        .iter()
        .filter(|u| !cands.iter().any(|v| *v != **u && u.le(v)))
        .cloned()
        .collect();
    Ok(if maximal.len() == 1 {
        McLartyVerdict::Unique(maximal.into_iter().next().expect("one candidate"))
    } else {
        McLartyVerdict::Ambiguous(maximal)
    })
}

/// Injectivity of every action table, the oracle for decidability.
pub fn actions_injective(x: &Presheaf) -> bool {
    let site = x.site();
    site.morphisms().all(|f| {
        let mut seen = vec![false; x.size(site.src(f))];
        x.action(f).iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fincat::{reflexive_graph, standard_site};
    use crate::presheaf::DEFAULT_BUDGET;

    fn site(name: &str) -> Arc<crate::fincat::FinCategory> {
        Arc::new(standard_site(name).unwrap())
    }

    /// `{1, e}`-set on `n` points with `e` given as a table.
    fn idem_set(e: &[usize]) -> Presheaf {
        let s = site("idempotent");
        let em = s.morphism_index("e").unwrap();
        Presheaf::from_fn(&s, &[e.len()], |f, y| if f == em { e[y] } else { y }).unwrap()
    }

    #[test]
    fn boolean_sites_are_decidable() {
        let t = site("terminal");
        let x = Presheaf::constant(&t, &["a".into(), "b".into(), "c".into()]);
        assert!(is_decidable(&x).decidable);
    }

    #[test]
    fn idempotent_criterion() {
        assert!(!is_decidable(&idem_set(&[1, 1])).decidable);
        assert!(is_decidable(&idem_set(&[0, 1])).decidable);
        for e in [[0, 0, 2], [0, 1, 2], [2, 1, 2], [1, 1, 1]] {
            let x = idem_set(&e);
            assert_eq!(is_decidable(&x).decidable, actions_injective(&x));
        }
    }

    #[test]
    fn one_edge_reflexive_graph_is_not_decidable() {
        let r = Arc::new(reflexive_graph());
        let (e, v) = (r.object_index("E").unwrap(), r.object_index("V").unwrap());
        let (d0, d1, s) = (
            r.morphism_index("d0").unwrap(),
            r.morphism_index("d1").unwrap(),
            r.morphism_index("s").unwrap(),
        );
        // nodes 0, 1; edges: loop0, loop1, a: 0 -> 1
        let mut sizes = vec![0; 2];
        sizes[v] = 2;
        sizes[e] = 3;
        let x = Presheaf::from_fn(&r, &sizes, |f, y| {
            let src = [0, 1, 0];
            let tgt = [0, 1, 1];
            if f == d0 {
                src[y]
            } else if f == d1 {
                tgt[y]
            } else if f == s {
                y
            } else if r.is_identity(f) {
                y
            } else if r.morphism_name(f) == "d0s" {
                src[y]
            } else {
                tgt[y]
            }
        })
        .unwrap();
        assert!(!is_decidable(&x).decidable);
        let (cand, ok) = largest_decidable_subobject(&x);
        assert!(ok);
        assert_eq!(cand.size(), 4);
    }

    #[test]
    fn coreflection_for_idempotent_is_fixed_points() {
        let topos = PresheafTopos::standard("idempotent").unwrap();
        let tests = dec_objects(&topos, 3, 3).unwrap();
        let x = idem_set(&[0, 0, 2, 2]);
        let c = dec_coreflection(&x, &tests, DEFAULT_BUDGET).unwrap();
        let c = c.found().expect("coreflection");
        assert_eq!(c.cx.sizes(), vec![2]);
        assert!(c.counit.is_monic());
    }

    #[test]
    fn reflection_makes_actions_injective() {
        let x = idem_set(&[0, 0, 2, 2]);
        let (q, m) = dec_reflection(&x).unwrap();
        assert!(actions_injective(&q));
        assert_eq!(q.sizes(), vec![2]);
        assert!(m.is_epic());
    }

    #[test]
    fn free_z2_set_is_its_own_mclarty_subobject() {
        let s = site("zmod2");
        let x = Presheaf::from_fn(&s, &[2], |f, y| if s.is_identity(f) { y } else { 1 - y }).unwrap();
        match mclarty_subobject(&x, DEFAULT_BUDGET).unwrap() {
            McLartyVerdict::Unique(u) => assert!(u.is_full()),
            other => panic!("{other:?}"),
        }
    }
}
