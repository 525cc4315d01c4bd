//! Enumeration of all presheaves on a site up to isomorphism, with a bound on
//! the carrier size at each object.
//!
//! Only the action tables of a generating set of arrows are searched; the
//! remaining tables are obtained by composing along a fixed word for each
//! arrow, and the full functoriality check runs once per candidate. Relations
//! among generators prune the search as soon as their entries are known.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fincat::{FinCategory, MorId};
use crate::presheaf::{find_iso, Presheaf, NONE};

/// Presheaves with at most `max_per_object` elements over each object and at
/// most `max_total` elements overall, one per isomorphism class, in a
/// deterministic order (by size vector, then by search order).
pub fn enumerate_presheaves(
    site: &Arc<FinCategory>,
    max_per_object: usize,
    max_total: usize,
    budget: u64,
) -> Result<Vec<Presheaf>> {
    let plan = Plan::new(site);
    let mut out = Vec::new();
    let mut buckets: BTreeMap<Invariant, Vec<usize>> = BTreeMap::new();
    let mut nodes = 0u64;
    for sizes in size_vectors(site.num_objects(), max_per_object, max_total) {
        let mut found = Vec::new();
        plan.search(site, &sizes, &mut nodes, budget, &mut found)?;
        for x in found {
            let inv = invariant(&x);
            let bucket = buckets.entry(inv).or_default();
            let mut duplicate = false;
            for &i in bucket.iter() {
                if find_iso(&out[i], &x, budget)?.is_some() {
                    duplicate = true;
                    break;
                }
            }
            if !duplicate {
                bucket.push(out.len());
                out.push(x);
            }
        }
    }
    Ok(out)
}

fn size_vectors(n: usize, max: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    loop {
        if cur.iter().sum::<usize>() <= max_total {
            out.push(cur.clone());
        }
        // odometer
        let mut i = 0;
        loop {
            if i == n {
                out.sort_by_key(|v| (v.iter().sum::<usize>(), v.clone()));
                return out;
            }
            if cur[i] < max {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}

type Invariant = (Vec<usize>, Vec<(usize, usize)>);

/// Isomorphism invariant: carrier sizes and, per arrow, the number of fixed
/// points (for endomorphisms) and the image size.
fn invariant(x: &Presheaf) -> Invariant {
    let site = x.site();
    let per_arrow = site
        .morphisms()
        .map(|f| {
            let table = x.action(f);
            let fixed = if site.src(f) == site.tgt(f) {
                table.iter().enumerate().filter(|&(i, &v)| i == v).count()
            } else {
                0
            };
            let mut image = table.to_vec();
            image.sort_unstable();
            image.dedup();
            (fixed, image.len())
        })
        .collect();
    (x.sizes(), per_arrow)
}

struct Plan {
    generators: Vec<MorId>,
    /// `h = words[h][0] . words[h][1] . ...` over generators.
    words: Vec<Vec<MorId>>,
    /// `(g, f, h)` with `g . f = h` where all three are generators or identities.
    relations: Vec<(MorId, MorId, MorId)>,
}

impl Plan {
    fn new(site: &FinCategory) -> Plan {
        let generators = site.generators();
        let m = site.num_morphisms();
        let mut words: Vec<Option<Vec<MorId>>> = vec![None; m];
        let mut queue = VecDeque::new();
        for c in site.objects() {
            words[site.identity(c)] = Some(Vec::new());
            queue.push_back(site.identity(c));
        }
        while let Some(h) = queue.pop_front() {
            for &g in &generators {
                if site.src(g) != site.tgt(h) {
                    continue;
                }
                let k = site.comp(g, h);
                if words[k].is_none() {
                    let mut w = vec![g];
                    w.extend(words[h].as_ref().expect("visited"));
                    words[k] = Some(w);
                    queue.push_back(k);
                }
            }
        }
        let words: Vec<Vec<MorId>> = words
            .into_iter()
            .map(|w| w.expect("generators generate the category"))
            .collect();
        let simple = |f: MorId| site.is_identity(f) || generators.contains(&f);
        let mut relations = Vec::new();
        for &g in &generators {
            for &f in &generators {
                if let Some(h) = site.compose(g, f) {
                    if simple(h) {
                        relations.push((g, f, h));
                    }
                }
            }
        }
        Plan {
            generators,
            words,
            relations,
        }
    }

    fn search(
        &self,
        site: &Arc<FinCategory>,
        sizes: &[usize],
        nodes: &mut u64,
        budget: u64,
        out: &mut Vec<Presheaf>,
    ) -> Result<()> {
        let m = site.num_morphisms();
        let mut tables: Vec<Vec<usize>> = (0..m)
            .map(|f| {
                if site.is_identity(f) {
                    (0..sizes[site.tgt(f)]).collect()
                } else {
                    vec![NONE; sizes[site.tgt(f)]]
                }
            })
            .collect();
        let vars: Vec<(MorId, usize)> = self
            .generators
            .iter()
            .flat_map(|&g| (0..sizes[site.tgt(g)]).map(move |y| (g, y)))
            .collect();
        // a generator into an empty carrier admits no table
        if self
            .generators
            .iter()
            .any(|&g| sizes[site.tgt(g)] > 0 && sizes[site.src(g)] == 0)
        {
            return Ok(());
        }
        self.dfs(site, sizes, &vars, 0, &mut tables, nodes, budget, out)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        site: &Arc<FinCategory>,
        sizes: &[usize],
        vars: &[(MorId, usize)],
        i: usize,
        tables: &mut Vec<Vec<usize>>,
        nodes: &mut u64,
        budget: u64,
        out: &mut Vec<Presheaf>,
    ) -> Result<()> {
        if i == vars.len() {
            let mut full = tables.clone();
            for h in site.morphisms() {
                if site.is_identity(h) || self.generators.contains(&h) {
                    continue;
                }
                full[h] = (0..sizes[site.tgt(h)])
                    .map(|z| self.words[h].iter().fold(z, |acc, &g| tables[g][acc]))
                    .collect();
            }
            let labels = sizes
                .iter()
                .map(|&n| (0..n).map(|k| k.to_string()).collect())
                .collect();
            if let Ok(x) = Presheaf::new(site.clone(), labels, full) {
                out.push(x);
            }
            return Ok(());
        }
        let (g, y) = vars[i];
        for v in 0..sizes[site.src(g)] {
            *nodes += 1;
            if *nodes > budget {
                return Err(Error::SearchTooLarge { bound: budget });
            }
            tables[g][y] = v;
            if self.consistent(tables) {
                self.dfs(site, sizes, vars, i + 1, tables, nodes, budget, out)?;
            }
        }
        tables[g][y] = NONE;
        Ok(())
    }

    /// `X(h)(z) = X(f)(X(g)(z))` wherever every entry involved is known.
    fn consistent(&self, tables: &[Vec<usize>]) -> bool {
        self.relations.iter().all(|&(g, f, h)| {
            (0..tables[h].len()).all(|z| {
                let (a, b) = (tables[h][z], tables[g][z]);
                if a == NONE || b == NONE {
                    return true;
                }
                let c = tables[f][b];
                c == NONE || c == a
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{parallel_pair, reflexive_graph, standard_site, terminal};
    use crate::presheaf::DEFAULT_BUDGET;

    #[test]
    fn finite_sets() {
        let t = Arc::new(terminal());
        assert_eq!(enumerate_presheaves(&t, 3, 3, DEFAULT_BUDGET).unwrap().len(), 4);
    }

    #[test]
    fn small_graphs() {
        let g = Arc::new(parallel_pair());
        // graphs with at most one vertex and one edge: empty, one vertex, one loop
        assert_eq!(enumerate_presheaves(&g, 1, 2, DEFAULT_BUDGET).unwrap().len(), 3);
        // two vertices and up to one edge: 0, 1, 2 vertices; loop on 1; with 2
        // vertices a loop or a joining edge
        let two = enumerate_presheaves(&g, 2, 3, DEFAULT_BUDGET).unwrap();
        assert!(two.iter().all(|x| x.total() <= 3));
    }

    #[test]
    fn z2_sets_up_to_three() {
        let z2 = Arc::new(standard_site("zmod2").unwrap());
        // sizes 0..=3: partitions into fixed points and swapped pairs
        let all = enumerate_presheaves(&z2, 3, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(all.len(), 1 + 1 + 2 + 2);
    }

    #[test]
    fn reflexive_graphs_have_degenerate_loops() {
        let r = Arc::new(reflexive_graph());
        let (e, v) = (r.object_index("E").unwrap(), r.object_index("V").unwrap());
        for x in enumerate_presheaves(&r, 3, 6, DEFAULT_BUDGET).unwrap() {
            assert!(x.size(e) >= x.size(v));
        }
    }
}
