//! JSON formats for sites and presheaves.
//!
//! A site is a [`CategorySpec`]. A presheaf names its site (a standard site or
//! an inline spec), lists carriers per object and gives the action of
//! morphisms as tables `{element over the target: element over the source}`.
//! Identities may be omitted, and so may any morphism whose action follows
//! from the given ones by composition.
//!
//! Every error carries a location: `line:column` for syntax and shape errors,
//! a path such as `action.s."1"` for errors in the data.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fincat::{standard_site, CategorySpec, FinCategory, MorId};
use crate::presheaf::Presheaf;

/// A site by name or inline.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum SiteRef {
    Named(String),
    Inline(CategorySpec),
}

impl SiteRef {
    pub fn resolve(&self) -> Result<FinCategory> {
        match self {
            SiteRef::Named(n) => standard_site(n),
            SiteRef::Inline(spec) => FinCategory::build(spec),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PresheafSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<SiteRef>,
    pub carrier: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub action: BTreeMap<String, BTreeMap<String, String>>,
}

fn located(origin: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
}

fn at(origin: &str, path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{origin}: at {path}: {msg}"))
}

/// Parses and validates a site; `origin` names the source in errors.
pub fn parse_site(text: &str, origin: &str) -> Result<FinCategory> {
    let spec: CategorySpec = serde_json::from_str(text).map_err(|e| located(origin, e))?;
    FinCategory::build(&spec).map_err(|e| at(origin, "site", e))
}

pub fn site_to_json(site: &FinCategory) -> String {
    serde_json::to_string_pretty(&site.spec()).expect("category specs serialize")
}

/// Parses a presheaf. `default_site` is used when the text names no site.
pub fn parse_presheaf(text: &str, origin: &str, default_site: Option<&Arc<FinCategory>>) -> Result<Presheaf> {
    let spec: PresheafSpec = serde_json::from_str(text).map_err(|e| located(origin, e))?;
    presheaf_from_spec(&spec, origin, default_site)
}

pub fn presheaf_from_spec(
    spec: &PresheafSpec,
    origin: &str,
    default_site: Option<&Arc<FinCategory>>,
) -> Result<Presheaf> {
    let site = match (&spec.site, default_site) {
        (Some(r), _) => Arc::new(r.resolve().map_err(|e| at(origin, "site", e))?),
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(at(origin, "site", "no site given")),
    };
    for name in spec.carrier.keys() {
        site.object_index(name)
            .map_err(|e| at(origin, &format!("carrier.{name}"), e))?;
    }
    let mut labels = Vec::with_capacity(site.num_objects());
    for c in site.objects() {
        let name = site.object_name(c);
        let set = spec.carrier.get(name).cloned().unwrap_or_default();
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = set.iter().find(|e| !seen.insert(e.as_str())) {
            return Err(at(origin, &format!("carrier.{name}"), format!("duplicate element `{dup}`")));
        }
        labels.push(set);
    }
    let position = |c: usize, e: &str| labels[c].iter().position(|l| l == e);
    let mut action: Vec<Option<Vec<usize>>> = vec![None; site.num_morphisms()];
    for (mname, table) in &spec.action {
        let path = format!("action.{mname}");
        let f = site.morphism_index(mname).map_err(|e| at(origin, &path, e))?;
        let (c, d) = (site.src(f), site.tgt(f));
        let mut row = vec![usize::MAX; labels[d].len()];
        for (out, inn) in table {
            let p = format!("{path}.\"{out}\"");
            let y = position(d, out).ok_or_else(|| {
                at(origin, &p, format!("`{out}` is not an element over `{}`", site.object_name(d)))
            })?;
            let x = position(c, inn).ok_or_else(|| {
                at(origin, &p, format!("`{inn}` is not an element over `{}`", site.object_name(c)))
            })?;
            row[y] = x;
        }
        if let Some(y) = row.iter().position(|&v| v == usize::MAX) {
            return Err(at(origin, &path, format!("no value for `{}`", labels[d][y])));
        }
        action[f] = Some(row);
    }
    for c in site.objects() {
        let id = site.identity(c);
        if action[id].is_none() {
            action[id] = Some((0..labels[c].len()).collect());
        }
    }
    derive_composites(&site, &mut action);
    let action = site
        .morphisms()
        .map(|f| {
            action[f]
                .take()
                .ok_or_else(|| at(origin, "action", format!("no action given for `{}`", site.morphism_name(f))))
        })
        .collect::<Result<Vec<_>>>()?;
    Presheaf::new(site, labels, action).map_err(|e| at(origin, "action", e))
}

/// `X(g . f) = X(f) X(g)` fills morphisms reachable from the given ones.
fn derive_composites(site: &FinCategory, action: &mut [Option<Vec<usize>>]) {
    loop {
        let mut changed = false;
        for g in site.morphisms() {
            for f in site.morphisms() {
                let Some(h) = site.compose(g, f) else { continue };
                if action[h].is_some() {
                    continue;
                }
                if let (Some(ag), Some(af)) = (&action[g], &action[f]) {
                    let row: Vec<usize> = ag.iter().map(|&z| af[z]).collect();
                    action[h] = Some(row);
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// The spec of a presheaf, listing generator actions only.
pub fn presheaf_to_spec(x: &Presheaf, site: Option<SiteRef>) -> PresheafSpec {
    let s = x.site();
    let carrier = s
        .objects()
        .map(|c| (s.object_name(c).to_string(), x.labels(c).to_vec()))
        .collect();
    let action = s
        .generators()
        .into_iter()
        .map(|f: MorId| {
            let (c, d) = (s.src(f), s.tgt(f));
            let table = (0..x.size(d))
                .map(|y| (x.label(d, y).to_string(), x.label(c, x.act(f, y)).to_string()))
                .collect();
            (s.morphism_name(f).to_string(), table)
        })
        .collect();
    PresheafSpec { site, carrier, action }
}

pub fn presheaf_to_json(x: &Presheaf, site: Option<SiteRef>) -> String {
    serde_json::to_string_pretty(&presheaf_to_spec(x, site)).expect("presheaf specs serialize")
}

/// What a JSON document turned out to describe.
pub enum Document {
    Site(FinCategory),
    Presheaf(Presheaf),
}

/// Reads a file holding either a site or a presheaf.
pub fn read_document(path: &Path) -> Result<Document> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{origin}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| located(&origin, e))?;
    if value.get("carrier").is_some() {
        parse_presheaf(&text, &origin, None).map(Document::Presheaf)
    } else {
        parse_site(&text, &origin).map(Document::Site)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::reflexive_graph;

    const EDGE: &str = r#"{
        "site": "reflexive_graph",
        "carrier": {"E": ["e", "lu", "lv"], "V": ["u", "v"]},
        "action": {
            "d0": {"e": "u", "lu": "u", "lv": "v"},
            "d1": {"e": "v", "lu": "u", "lv": "v"},
            "s": {"u": "lu", "v": "lv"}
        }
    }"#;

    #[test]
    fn round_trips_a_reflexive_edge() {
        let x = parse_presheaf(EDGE, "edge", None).unwrap();
        assert_eq!(x.sizes().iter().sum::<usize>(), 5);
        let back = parse_presheaf(&presheaf_to_json(&x, Some(SiteRef::Named("reflexive_graph".into()))), "rt", None)
            .unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn syntax_errors_have_line_and_column() {
        let e = parse_presheaf("{\n  \"carrier\": [1,\n", "bad.json", None).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("bad.json:"), "{msg}");
        assert!(matches!(e, Error::Parse(_)));
    }

    #[test]
    fn data_errors_name_the_path() {
        let bad = EDGE.replace(r#""d0": {"e": "u""#, r#""d0": {"e": "w""#);
        let msg = parse_presheaf(&bad, "x", None).unwrap_err().to_string();
        assert!(msg.contains("action.d0.\"e\""), "{msg}");
    }

    #[test]
    fn non_functorial_actions_name_the_square() {
        // the loop at u now has source v, so d0 . s is not the identity
        let bad = EDGE.replace(r#""lu": "u", "lv": "v"},
            "d1""#, r#""lu": "v", "lv": "v"},
            "d1""#);
        let msg = parse_presheaf(&bad, "x", None).unwrap_err().to_string();
        assert!(msg.contains("square") || msg.contains("identity"), "{msg}");
    }

    #[test]
    fn sites_round_trip() {
        let g = reflexive_graph();
        let back = parse_site(&site_to_json(&g), "g").unwrap();
        assert_eq!(back, g);
    }
}
