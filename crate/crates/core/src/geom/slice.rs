//! Slicing a morphism over an object `B` of its base.
//!
//! `E/p*B` is presheaves on the category of elements of `p*B` and `S/B` is
//! presheaves on the category of elements of `B`; the sliced morphism is the
//! one induced by the evident functor between them. [`slice_check`] compares
//! it with the composites through `alpha^-1` and `tau`.

use serde::Serialize;

use super::{Base, GeomMorphism};
use crate::error::{Error, Result};
use crate::fincat::{category_of_elements, Elements, FinFunctor};
use crate::presheaf::{Presheaf, PresheafMap, PresheafTopos};

/// `p/B` with the two categories of elements.
#[derive(Debug)]
pub struct SlicedMorphism {
    pub base_object: Presheaf,
    pub morphism: GeomMorphism,
    pub source_elements: Elements,
    pub target_elements: Elements,
}

pub fn slice(p: &GeomMorphism, b: &Presheaf) -> Result<SlicedMorphism> {
    let Some(pi) = p.functor() else {
        return Err(Error::Unsupported("slices of the decidable coreflection".into()));
    };
    let Base::Presheaves(_) = &p.target else {
        return Err(Error::Unsupported("slices over a base without a site".into()));
    };
    let alpha = p.alpha(b)?;
    if !alpha.is_iso() {
        return Err(Error::NotConnected(format!("unit alpha is not invertible at {b:?}")));
    }
    let pb = p.inverse_image(b)?;
    let es = category_of_elements(&pb)?;
    let et = category_of_elements(b)?;
    let budget = p.source.budget();
    let src = PresheafTopos::with_budget(
        format!("{}/p*B", p.source.name()),
        (*es.category).clone(),
        budget,
    );
    let tgt = PresheafTopos::with_budget(
        format!("{}/B", p.target.name()),
        (*et.category).clone(),
        budget,
    );
    let on_objects = es
        .pairs
        .iter()
        .map(|&(d, x)| et.object(pi.on_objects[d], x))
        .collect();
    let on_morphisms = es
        .arrow_pairs
        .iter()
        .map(|&(f, y)| et.arrow(pi.on_morphisms[f], y))
        .collect();
    let functor = FinFunctor::new(src.site().clone(), tgt.site().clone(), on_objects, on_morphisms)?;
    let morphism = GeomMorphism::along(format!("{}/B", p.name), src, tgt, functor)?;
    Ok(SlicedMorphism {
        base_object: b.clone(),
        morphism,
        source_elements: es,
        target_elements: et,
    })
}

impl SlicedMorphism {
    /// The object `x: X -> p*B` of `E/p*B` given by a presheaf on the
    /// category of elements.
    pub fn total(&self, p: &GeomMorphism, y: &Presheaf) -> Result<(Presheaf, PresheafMap)> {
        let pb = p.inverse_image(&self.base_object)?;
        let es = &self.source_elements;
        let site = p.source.site().clone();
        let mut elems: Vec<Vec<(usize, usize)>> = Vec::with_capacity(site.num_objects());
        for d in site.objects() {
            let mut row = Vec::new();
            for x in 0..pb.size(d) {
                for e in 0..y.size(es.object(d, x)) {
                    row.push((x, e));
                }
            }
            elems.push(row);
        }
        let labels = elems
            .iter()
            .enumerate()
            .map(|(d, row)| {
                row.iter()
                    .map(|&(x, e)| format!("{}:{}", pb.label(d, x), y.label(es.object(d, x), e)))
                    .collect()
            })
            .collect();
        let action = site
            .morphisms()
            .map(|f| {
                let d1 = site.src(f);
                elems[site.tgt(f)]
                    .iter()
                    .map(|&(x, e)| {
                        let x1 = pb.act(f, x);
                        let e1 = y.act(es.arrow(f, x), e);
                        elems[d1].iter().position(|&q| q == (x1, e1)).expect("element over the restriction")
                    })
                    .collect()
            })
            .collect();
        let total = Presheaf::new(site.clone(), labels, action)?;
        let comps = elems.iter().map(|row| row.iter().map(|&(x, _)| x).collect()).collect();
        let map = PresheafMap::new(total.clone(), pb, comps)?;
        Ok((total, map))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceCheck {
    pub checked: usize,
    pub mismatch: Option<String>,
}

/// Fiber sizes of `(p/B)_*` and `(p/B)_!` against `alpha^-1 . p_* x` and
/// `tau . p_! x` on every sample.
pub fn slice_check(p: &GeomMorphism, s: &SlicedMorphism, samples: &[Presheaf]) -> Result<SliceCheck> {
    let b = &s.base_object;
    let alpha_inv = p
        .alpha(b)?
        .inverse()
        .ok_or_else(|| Error::NotConnected("unit alpha is not invertible".into()))?;
    let tau = p.tau(b)?;
    let et = &s.target_elements;
    let tsite = p.target.site().clone();
    let mut checked = 0;
    for y in samples {
        let (x, xm) = s.total(p, y)?;
        let lower = alpha_inv.after(&p.direct_image_map(&xm)?)?;
        let left = tau.after(&p.shriek_map(&xm)?)?;
        let sl = s.morphism.direct_image(y)?;
        let ss = s.morphism.shriek(y)?;
        for (name, composite, sliced) in [("direct", &lower, &sl), ("leftmost", &left, &ss)] {
            for d in tsite.objects() {
                for e in 0..b.size(d) {
                    let fiber = composite.comps()[d].iter().filter(|&&v| v == e).count();
                    let n = sliced.size(et.object(d, e));
                    if fiber != n {
                        return Ok(SliceCheck {
                            checked,
                            mismatch: Some(format!(
                                "{name} image of {x:?} over {}: {fiber} elements by composite, {n} by Kan extension",
                                b.label(d, e)
                            )),
                        });
                    }
                }
            }
        }
        checked += 1;
    }
    Ok(SliceCheck { checked, mismatch: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{classify_morphism, Bound};

    #[test]
    fn slice_over_one_is_the_morphism() {
        let t = PresheafTopos::standard("reflexive_graphs").unwrap();
        let p = GeomMorphism::canonical(t.clone()).unwrap();
        let one = p.target.terminal();
        let s = slice(&p, &one).unwrap();
        assert_eq!(s.morphism.source.site().num_objects(), 2);
        assert_eq!(s.morphism.target.site().num_objects(), 1);
        let flags = classify_morphism(&s.morphism, Bound::new(2, 3)).unwrap();
        assert!(flags.hyperconnected.is_true(), "{flags:?}");
    }

    #[test]
    fn slice_over_two_matches_composites() {
        let t = PresheafTopos::standard("reflexive_graphs").unwrap();
        let p = GeomMorphism::canonical(t.clone()).unwrap();
        let two = Presheaf::constant(p.target.site(), &["a".into(), "b".into()]);
        let s = slice(&p, &two).unwrap();
        assert_eq!(s.morphism.source.site().num_objects(), 4);
        let samples = crate::enumerate::enumerate_presheaves(
            s.morphism.source.site(),
            2,
            3,
            crate::presheaf::DEFAULT_BUDGET,
        )
        .unwrap();
        let c = slice_check(&p, &s, &samples).unwrap();
        assert!(c.mismatch.is_none(), "{c:?}");
        assert_eq!(c.checked, samples.len());
    }
}
