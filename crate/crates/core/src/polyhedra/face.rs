use std::collections::{HashSet, VecDeque};

use super::bitset::BitSet;

/// A face of a cone or polytope.
///
/// `active_set` lists (sorted) the indices of the parent's facets that are
/// tight on the face; it is maximal for `geometry`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face<G> {
    pub active_set: Vec<usize>,
    pub geometry: G,
}

/// Facets containing every generator of `gens`.
fn closure(incidence: &[BitSet], gens: &BitSet) -> Vec<usize> {
    (0..incidence.len())
        .filter(|&i| gens.is_subset(&incidence[i]))
        .collect()
}

/// Face lattice by active-set closure: starting from the whole polyhedron,
/// intersect each face with every facet not yet active and close the result.
/// `incidence[i]` is the set of generators lying on facet `i`. Returns
/// `(active set, generator set)` pairs, one per face, including the face with
/// no generators (the lineality space of a cone, the empty face of a polytope).
pub(crate) fn enumerate_faces(incidence: &[BitSet], n_gens: usize) -> Vec<(Vec<usize>, BitSet)> {
    let top = BitSet::full(n_gens).trimmed();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    let active = closure(incidence, &top);
    seen.insert(active.clone());
    queue.push_back((active, top));
    while let Some((active, gens)) = queue.pop_front() {
        for (i, facet) in incidence.iter().enumerate() {
            if active.binary_search(&i).is_ok() {
                continue;
            }
            let sub = gens.intersection(facet).trimmed();
            let sub_active = closure(incidence, &sub);
            if seen.insert(sub_active.clone()) {
                queue.push_back((sub_active, sub));
            }
        }
        out.push((active, gens));
    }
    out
}
