//! Decidable objects and double-negation sheaves as the two sections of a
//! single retraction.
//!
//! The retraction is the coreflection `p_*: E -> Dec(E)`. Its left section is
//! the inclusion of decidable objects and its right section `p^!` should land
//! in the sheaves. We check the adjunctions, full faithfulness of both
//! sections, that the composite `sheafify . p^*` is an adjoint equivalence
//! onto the sheaves, and that `p^!` and the sheaf inclusion agree.

use std::ops::ControlFlow;
use std::sync::Arc;

use serde::Serialize;

use super::props::source_samples;
use super::{verify_adjunction, Adjunction, Bound, GeomMorphism};
use crate::decidable::is_decidable;
use crate::error::{Error, Result};
use crate::presheaf::{find_iso, HomSearch, Presheaf, PresheafMap, PresheafTopos};
use crate::sublattice::{sheaf_status, sheafify};

/// One base object with its two sections and their common retraction.
#[derive(Clone, Debug, Serialize)]
pub struct Sections {
    pub base: String,
    /// Sizes of `p^*A`, the discrete section.
    pub discrete: Vec<usize>,
    /// Sizes of `p^!A`, the codiscrete section.
    pub codiscrete: Vec<usize>,
    /// Sizes of `p_* p^* A` and `p_* p^! A`, both equal to those of `A`.
    pub retract_discrete: Vec<usize>,
    pub retract_codiscrete: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UiaoReport {
    pub topos: String,
    pub bound: Bound,
    pub dec_objects: usize,
    pub sheaves: usize,
    pub sections: Vec<Sections>,
    /// Names of the checks that passed, in order.
    pub passed: Vec<String>,
    /// The first broken identity, if any.
    pub failure: Option<String>,
}

impl UiaoReport {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

/// Sheafifications of the samples, one per isomorphism class.
pub fn sheaf_samples(topos: &PresheafTopos, samples: &[Presheaf]) -> Result<Vec<Presheaf>> {
    let mut out: Vec<Presheaf> = Vec::new();
    for x in samples {
        let f = sheafify(x, topos)?.sheaf;
        let mut seen = false;
        for g in &out {
            if g.sizes() == f.sizes() && find_iso(g, &f, topos.budget())?.is_some() {
                seen = true;
                break;
            }
        }
        if !seen {
            out.push(f);
        }
    }
    Ok(out)
}

/// The unique `a: sheafify(X) -> F` with `a . unit = m`, for a sheaf `F`.
pub fn extend_to_sheaf(topos: &PresheafTopos, m: &PresheafMap) -> Result<PresheafMap> {
    let sh = sheafify(m.dom(), topos)?;
    let mut found: Vec<PresheafMap> = Vec::new();
    HomSearch::new(&sh.sheaf, m.cod())
        .budget(topos.budget())
        .for_each(|comps| {
            let a = PresheafMap::unchecked(sh.sheaf.clone(), m.cod().clone(), comps.to_vec());
            if a.after(&sh.unit).map(|c| c.comps() == m.comps()).unwrap_or(false) {
                found.push(a);
            }
            if found.len() > 1 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
    match found.len() {
        1 => Ok(found.pop().expect("one extension")),
        n => Err(Error::LawFailure(format!("{n} extensions along the sheafification unit"))),
    }
}

/// The check for the coreflection onto decidable objects.
pub fn uiao_verify(topos: Arc<PresheafTopos>, bound: Bound) -> Result<UiaoReport> {
    match GeomMorphism::from_dec_coreflection(topos.clone(), bound) {
        Ok(p) => uiao_for(&p, bound),
        Err(Error::MissingAdjoint(w)) => Ok(UiaoReport {
            topos: topos.name().to_string(),
            bound,
            dec_objects: 0,
            sheaves: 0,
            sections: Vec::new(),
            passed: Vec::new(),
            failure: Some(format!("coreflection onto decidable objects: {w}")),
        }),
        Err(e) => Err(e),
    }
}

/// The same checks for any morphism whose inverse image should be the
/// inclusion of decidable objects.
pub fn uiao_for(p: &GeomMorphism, bound: Bound) -> Result<UiaoReport> {
    let topos = p.source.clone();
    let mut report = UiaoReport {
        topos: topos.name().to_string(),
        bound,
        dec_objects: 0,
        sheaves: 0,
        sections: Vec::new(),
        passed: Vec::new(),
        failure: None,
    };
    macro_rules! fail {
        ($($t:tt)*) => {{
            report.failure = Some(format!($($t)*));
            return Ok(report);
        }};
    }
    let source = source_samples(p, bound)?;
    let dec = p.target.samples(bound)?;
    report.dec_objects = dec.len();
    let j = topos.negneg();
    let sheaves = sheaf_samples(&topos, &source)?;
    report.sheaves = sheaves.len();

    // left section: p_* p^* = id on Dec
    for a in &dec {
        if !p.alpha(a)?.is_iso() {
            fail!("p_* p^* is not the identity at {a:?}");
        }
    }
    report.passed.push("retraction of the decidable section".into());

    for (which, name) in [
        (Adjunction::InverseDirect, "p^* -| p_*"),
        (Adjunction::DirectUpper, "p_* -| p^!"),
    ] {
        let r = match verify_adjunction(p, which, &source, &dec) {
            Err(Error::MissingAdjoint(w)) => fail!("{name}: {w}"),
            r => r?,
        };
        if let Some(w) = r.failure {
            fail!("{name}: {w}");
        }
        report.passed.push(format!(
            "{name}: {} triangles, {} transposes",
            r.triangles_checked, r.maps_checked
        ));
    }
    for a in &dec {
        if !p.eps_upper(a)?.is_iso() {
            fail!("p^! is not fully faithful at {a:?}");
        }
    }
    report.passed.push("p^! fully faithful".into());

    // the composite f^* p^* -| p_* f_* is an adjoint equivalence
    for f in &sheaves {
        let b = p.beta(f)?;
        if !extend_to_sheaf(&topos, &b)?.is_iso() {
            fail!("f^* beta is not invertible at the sheaf {f:?}");
        }
    }
    for a in &dec {
        let unit = sheafify(&p.inverse_image(a)?, &topos)?.unit;
        if !p.direct_image_map(&unit)?.is_iso() {
            fail!("p_* of the sheafification unit is not invertible at {a:?}");
        }
    }
    report.passed.push("sheafify . p^* is an adjoint equivalence onto sheaves".into());

    // right section: p^! lands in sheaves and fixes them
    for a in &dec {
        let ua = p.upper(a)?;
        let st = sheaf_status(&ua, j, topos.budget())?;
        if !st.sheaf {
            fail!("p^!A is not a sheaf for A = {a:?}: {:?}", st.witness);
        }
    }
    for f in &sheaves {
        if !p.eta_upper(f)?.is_iso() {
            fail!("the unit of p_* -| p^! is not invertible at the sheaf {f:?}");
        }
    }
    report.passed.push("p^! is the sheaf inclusion".into());

    // the left section is exactly the decidable objects
    for x in &source {
        let dec_x = is_decidable(x).decidable;
        if dec_x && !p.beta(x)?.is_iso() {
            fail!("the decidable object {x:?} is not in the image of p^*");
        }
    }
    for a in &dec {
        let pa = p.inverse_image(a)?;
        if !is_decidable(&pa).decidable {
            fail!("p^*A is not decidable for A = {a:?}");
        }
    }
    report.passed.push("p^* is the inclusion of decidable objects".into());

    for a in &dec {
        let pa = p.inverse_image(a)?;
        let ua = p.upper(a)?;
        let rd = p.direct_image(&pa)?;
        let ru = p.direct_image(&ua)?;
        if rd.sizes() != a.sizes() || ru.sizes() != a.sizes() {
            fail!("the common retraction does not recover {a:?}");
        }
        report.sections.push(Sections {
            base: format!("{a:?}"),
            discrete: pa.sizes(),
            codiscrete: ua.sizes(),
            retract_discrete: rd.sizes(),
            retract_codiscrete: ru.sizes(),
        });
    }
    report.passed.push("common retraction".into());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflexive_graphs_hold() {
        let t = PresheafTopos::standard("reflexive_graphs").unwrap();
        let r = uiao_verify(t, Bound::new(2, 4)).unwrap();
        assert!(r.holds(), "{r:?}");
        // two points: the discrete graph has 2 edges, the codiscrete one 4
        let two = r.sections.iter().find(|s| s.retract_discrete.iter().sum::<usize>() == 4).unwrap();
        assert_eq!(two.discrete.iter().sum::<usize>(), 4);
        assert_eq!(two.codiscrete.iter().sum::<usize>(), 6);
    }

    #[test]
    fn z2_fails_at_the_upper_adjoint() {
        let t = PresheafTopos::standard("zmod2").unwrap();
        // decidable objects are everything, so the coreflection is trivial
        assert!(uiao_verify(t.clone(), Bound::new(2, 2)).unwrap().holds());
        let p = GeomMorphism::canonical(t).unwrap();
        let r = uiao_for(&p, Bound::new(2, 2)).unwrap();
        assert!(!r.holds());
        assert!(r.failure.unwrap().contains("p_* -| p^!"));
    }
}
