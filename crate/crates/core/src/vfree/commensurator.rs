use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stallings::{conjugate_intersections, Index, SubgroupHandle};
use crate::word::Word;

use super::action::centralizer_of_fiber;
use super::group::{GElement, VirtuallyFree};

/// A finitely generated subgroup `C ≤ F_m ⋊ Q`, stored as its image
/// `C_Q ≤ Q`, a transversal indexed by `C_Q`, and the fiber `C ∩ F_m`
/// (generated by Schreier generators).
#[derive(Clone, Debug)]
pub struct GSubgroup {
    generators: Vec<GElement>,
    reps: BTreeMap<usize, GElement>,
    fiber: SubgroupHandle,
}

impl GSubgroup {
    pub fn generate(vf: &VirtuallyFree, generators: &[GElement]) -> Result<Self> {
        if let Some(g) = generators
            .iter()
            .find(|g| g.w.rank() != vf.rank() || g.q >= vf.quotient().order())
        {
            return Err(Error::Parse(format!("{g} is not an element of G")));
        }
        let mut reps = BTreeMap::from([(vf.quotient().identity(), vf.identity())]);
        let mut queue = VecDeque::from([vf.quotient().identity()]);
        while let Some(q) = queue.pop_front() {
            for s in generators {
                let next = vf.quotient().mul(q, s.q);
                if !reps.contains_key(&next) {
                    reps.insert(next, vf.mul(&reps[&q], s));
                    queue.push_back(next);
                }
            }
        }
        let mut schreier = Vec::new();
        for rep in reps.values() {
            for s in generators {
                let ts = vf.mul(rep, s);
                let x = vf.mul(&ts, &vf.inv(&reps[&ts.q]));
                debug_assert_eq!(x.q, vf.quotient().identity());
                if !x.w.is_identity() {
                    schreier.push(x.w);
                }
            }
        }
        Ok(GSubgroup {
            generators: generators.to_vec(),
            reps,
            fiber: SubgroupHandle::build(vf.rank(), &schreier)?,
        })
    }

    pub fn generators(&self) -> &[GElement] {
        &self.generators
    }

    /// `C ∩ F_m`.
    pub fn fiber(&self) -> &SubgroupHandle {
        &self.fiber
    }

    /// `C_Q`, ascending.
    pub fn image(&self) -> Vec<usize> {
        self.reps.keys().copied().collect()
    }

    pub fn contains(&self, vf: &VirtuallyFree, g: &GElement) -> bool {
        match self.reps.get(&g.q) {
            Some(rep) => self
                .fiber
                .contains(&vf.mul(g, &vf.inv(rep)).w)
                .expect("same rank"),
            None => false,
        }
    }

    /// `[C : K]` for `K ≤ C ∩ F_m`: `|C_Q| · [C ∩ F_m : K]`.
    pub fn index_of(&self, k: &SubgroupHandle) -> Result<Index> {
        Ok(match self.fiber.relative_index(k)? {
            Index::Finite(i) => Index::Finite(i * self.reps.len()),
            Index::Infinite => Index::Infinite,
        })
    }

    pub fn is_subgroup_of(&self, vf: &VirtuallyFree, other: &GSubgroup) -> bool {
        self.generators.iter().all(|g| other.contains(vf, g))
    }

    pub fn same_subgroup(&self, vf: &VirtuallyFree, other: &GSubgroup) -> bool {
        self.is_subgroup_of(vf, other) && other.is_subgroup_of(vf, self)
    }
}

/// Per-`q` fiber products of `core(K)` with `core(φ_q(K))`, merged in
/// `q` order. `K ∩ gKg⁻¹ = K ∩ w φ_q(K) w⁻¹` for `g = (w, q)`.
fn components_by_q(
    k: &SubgroupHandle,
    vf: &VirtuallyFree,
) -> Result<Vec<Vec<crate::stallings::FiberComponent>>> {
    (0..vf.quotient().order())
        .into_par_iter()
        .map(|q| conjugate_intersections(k, &vf.action(q).apply_subgroup(k)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct GCommensurator {
    pub subgroup: GSubgroup,
    /// `[Comm_G(K) : K]`.
    pub index_of_k: usize,
    /// One element per bi-covering double coset outside `K`.
    pub witnesses: Vec<GElement>,
}

impl Serialize for GCommensurator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GCommensurator", 5)?;
        st.serialize_field("generators", self.subgroup.generators())?;
        st.serialize_field("fiber_basis", &self.subgroup.fiber().basis())?;
        st.serialize_field("image", &self.subgroup.image())?;
        st.serialize_field("index_of_k", &self.index_of_k)?;
        st.serialize_field("witnesses", &self.witnesses)?;
        st.end()
    }
}

fn commensurator_unverified(
    k: &SubgroupHandle,
    vf: &VirtuallyFree,
) -> Result<(GSubgroup, Vec<GElement>)> {
    let e = vf.quotient().identity();
    let mut witnesses = Vec::new();
    for (q, comps) in components_by_q(k, vf)?.into_iter().enumerate() {
        for c in comps.into_iter().filter(|c| c.is_bicovering()) {
            if q == e && k.contains(&c.witness)? {
                continue;
            }
            witnesses.push(GElement::new(c.witness, q));
        }
    }
    let mut gens: Vec<GElement> = k.generators().iter().map(|g| vf.fiber(g)).collect();
    gens.extend(witnesses.iter().cloned());
    Ok((GSubgroup::generate(vf, &gens)?, witnesses))
}

/// `Comm_G(K)` for a nontrivial `K ≤ F_m`.
///
/// `g = (w, q)` commensurates `K` iff `K ∩ w φ_q(K) w⁻¹` has finite index in
/// both sides, i.e. iff `w` labels a bi-covering component of the fiber
/// product of `K` and `φ_q(K)`. The double coset `K g K` consists of
/// commensurating elements, so one witness per component suffices.
/// The result is checked to have finite index over `K` and to be its own
/// commensurator (recomputed from its fiber).
pub fn commensurator_in_g(k: &SubgroupHandle, vf: &VirtuallyFree) -> Result<GCommensurator> {
    if k.is_trivial() {
        return Err(Error::TrivialSubgroup);
    }
    let (subgroup, witnesses) = commensurator_unverified(k, vf)?;
    let index_of_k = subgroup.index_of(k)?.finite().ok_or_else(|| {
        Error::TheoremViolation(format!("{k:?} has infinite index in its commensurator"))
    })?;
    let (again, _) = commensurator_unverified(subgroup.fiber(), vf)?;
    if !again.same_subgroup(vf, &subgroup) {
        return Err(Error::TheoremViolation(
            "commensurator is not self-commensurated".into(),
        ));
    }
    Ok(GCommensurator {
        subgroup,
        index_of_k,
        witnesses,
    })
}

/// `C = 𝔽 ⋊ A` with `A` the torsion of `C` and `𝔽 = C ∩ F_m` free.
#[derive(Clone, Debug, Serialize)]
pub struct Splitting {
    pub a: Vec<GElement>,
    pub f_basis: Vec<GElement>,
}

/// Splits `C` as `(C ∩ F_m) · A` with `A = C ∩ Z_G(F_m)`.
///
/// Requires `A` to map onto `C_Q`; then every element of `C` is uniquely
/// `f·a`, `A` is finite and normal, and since `A` centralizes the fiber the
/// product is direct. Otherwise the torsion of `C` is not captured by the
/// fiber centralizer and `TorsionNotSubgroup` is reported.
pub fn torsion_and_splitting(c: &GSubgroup, vf: &VirtuallyFree) -> Result<Splitting> {
    let a: Vec<GElement> = centralizer_of_fiber(vf)
        .into_iter()
        .filter(|z| c.contains(vf, z))
        .collect();
    for x in &a {
        for y in &a {
            if !a.contains(&vf.mul(x, y)) {
                return Err(Error::TorsionNotSubgroup(format!(
                    "{x}·{y} leaves the torsion set"
                )));
            }
        }
        for s in c.generators() {
            if !a.contains(&vf.conjugate(s, x)) {
                return Err(Error::TorsionNotSubgroup(format!(
                    "{x} conjugated by {s} leaves the torsion set"
                )));
            }
        }
    }
    if a.iter()
        .any(|x| x.q == vf.quotient().identity() && !x.w.is_identity())
    {
        return Err(Error::TheoremViolation(
            "nontrivial fiber element centralizes the fiber".into(),
        ));
    }
    let mut covered: Vec<usize> = a.iter().map(|x| x.q).collect();
    covered.sort_unstable();
    if covered != c.image() {
        return Err(Error::TorsionNotSubgroup(format!(
            "torsion part covers {covered:?} of the image {:?}",
            c.image()
        )));
    }
    let f_basis = c.fiber().basis().iter().map(|w| vf.fiber(w)).collect();
    Ok(Splitting { a, f_basis })
}

/// Whether `g ∈ K·A`.
pub fn product_contains(k: &SubgroupHandle, a: &[GElement], g: &GElement) -> bool {
    a.iter()
        .any(|x| x.q == g.q && k.contains(&(&g.w * &x.w.invert())).expect("same rank"))
}

#[derive(Clone, Debug, Serialize)]
pub struct GOffender {
    pub witness: GElement,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakMalnormalityReport {
    pub verdict: bool,
    pub offenders: Vec<GOffender>,
    pub components_checked: usize,
}

/// Decides whether `P = K·A` is weakly malnormal in `G`, for `K ≤ F_m`
/// nontrivial and `A` a finite set centralizing `K`.
///
/// `P ∩ P^g` is infinite iff `K ∩ K^g` is, which happens exactly for `g` in
/// the double cosets of nontrivial fiber-product components. Membership in
/// `P` is constant on those double cosets since `K ≤ P`.
pub fn weak_malnormality_in_g(
    k: &SubgroupHandle,
    a: &[GElement],
    vf: &VirtuallyFree,
) -> Result<WeakMalnormalityReport> {
    if k.is_trivial() {
        return Err(Error::TrivialSubgroup);
    }
    for x in a {
        for g in k.generators() {
            if vf.conjugate_fiber(x, g) != *g {
                return Err(Error::NotCentralized(format!("{x} moves {g}")));
            }
        }
    }
    let mut offenders = Vec::new();
    let mut components_checked = 0;
    for (q, comps) in components_by_q(k, vf)?.into_iter().enumerate() {
        for c in comps.into_iter().filter(|c| !c.trivial) {
            components_checked += 1;
            let g = GElement::new(c.witness, q);
            if !product_contains(k, a, &g) {
                offenders.push(GOffender {
                    witness: g,
                    rank: c.intersection.rank(),
                });
            }
        }
    }
    Ok(WeakMalnormalityReport {
        verdict: offenders.is_empty(),
        offenders,
        components_checked,
    })
}

/// Fiber words of `K` conjugated by `g`, as a subgroup of `F_m`.
pub fn conjugate_fiber_subgroup(
    k: &SubgroupHandle,
    g: &GElement,
    vf: &VirtuallyFree,
) -> SubgroupHandle {
    let gens: Vec<Word> = k
        .generators()
        .iter()
        .map(|x| vf.conjugate_fiber(g, x))
        .collect();
    SubgroupHandle::build(vf.rank(), &gens).expect("same rank")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stallings::based_intersection;
    use crate::vfree::group::{validate, VirtuallyFreeData};

    fn w(s: &str) -> Word {
        Word::parse(2, s).unwrap()
    }

    fn sub(gens: &[&str]) -> SubgroupHandle {
        SubgroupHandle::build(2, &gens.iter().map(|s| w(s)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn subgroup_membership_in_g() {
        let vf = validate(&VirtuallyFreeData::involution(2, &["b", "a"])).unwrap();
        let c = GSubgroup::generate(&vf, &[GElement::new(w(""), 1)]).unwrap();
        assert_eq!(c.image(), vec![0, 1]);
        assert!(c.fiber().is_trivial());
        let c = GSubgroup::generate(&vf, &[GElement::new(w("a"), 1)]).unwrap();
        // (a, t)² = (a·b, e)
        assert!(c.fiber().contains(&w("ab")).unwrap());
        assert!(c.contains(&vf, &GElement::new(w("aba"), 1)));
        assert!(!c.contains(&vf, &GElement::new(w("b"), 1)));
    }

    #[test]
    fn commensurator_examples() {
        let vf = validate(&VirtuallyFreeData::direct_product(2, 2)).unwrap();
        let c = commensurator_in_g(&sub(&["aa"]), &vf).unwrap();
        assert_eq!(c.index_of_k, 4);
        assert!(c.subgroup.contains(&vf, &GElement::new(w("a"), 0)));
        assert!(c.subgroup.contains(&vf, &GElement::new(w(""), 1)));
        assert!(!c.subgroup.contains(&vf, &GElement::new(w("b"), 0)));
        assert_eq!(c.subgroup.fiber(), &sub(&["a"]));

        let swap = validate(&VirtuallyFreeData::involution(2, &["b", "a"])).unwrap();
        let c = commensurator_in_g(&SubgroupHandle::whole(2), &swap).unwrap();
        assert_eq!(c.subgroup.image(), vec![0, 1]);
        assert_eq!(c.index_of_k, 2);
        assert_eq!(
            commensurator_in_g(&SubgroupHandle::trivial(2), &swap).err(),
            Some(Error::TrivialSubgroup)
        );
    }

    #[test]
    fn commensurator_sees_twisted_elements() {
        // (ε, t) swaps a and b, so it commensurates ⟨ab, ba⟩
        let swap = validate(&VirtuallyFreeData::involution(2, &["b", "a"])).unwrap();
        let k = sub(&["ab", "ba"]);
        let c = commensurator_in_g(&k, &swap).unwrap();
        assert!(c.subgroup.contains(&swap, &GElement::new(w(""), 1)));
        assert!(!c.subgroup.contains(&swap, &GElement::new(w("a"), 0)));
    }

    #[test]
    fn splitting_examples() {
        let vf = validate(&VirtuallyFreeData::direct_product(2, 2)).unwrap();
        let c = commensurator_in_g(&sub(&["aa"]), &vf).unwrap();
        let split = torsion_and_splitting(&c.subgroup, &vf).unwrap();
        assert_eq!(
            split.a,
            vec![GElement::new(w(""), 0), GElement::new(w(""), 1)]
        );
        assert_eq!(split.f_basis, vec![GElement::new(w("a"), 0)]);

        let swap = validate(&VirtuallyFreeData::involution(2, &["b", "a"])).unwrap();
        let c = GSubgroup::generate(&swap, &[GElement::new(w("a"), 0)]).unwrap();
        let split = torsion_and_splitting(&c, &swap).unwrap();
        assert_eq!(split.a, vec![swap.identity()]);
        let c = commensurator_in_g(&sub(&["ab", "ba"]), &swap).unwrap();
        assert!(matches!(
            torsion_and_splitting(&c.subgroup, &swap),
            Err(Error::TorsionNotSubgroup(_))
        ));
    }

    #[test]
    fn weak_malnormality_examples() {
        let vf = validate(&VirtuallyFreeData::direct_product(2, 1)).unwrap();
        let id = [vf.identity()];
        assert!(
            weak_malnormality_in_g(&sub(&["a"]), &id, &vf)
                .unwrap()
                .verdict
        );
        let r = weak_malnormality_in_g(&sub(&["aa"]), &id, &vf).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.offenders[0].witness, GElement::new(w("a"), 0));

        let swap = validate(&VirtuallyFreeData::involution(2, &["b", "a"])).unwrap();
        let err = weak_malnormality_in_g(
            &sub(&["a"]),
            &[swap.identity(), GElement::new(w(""), 1)],
            &swap,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotCentralized(_)));
    }

    #[test]
    fn weak_malnormality_matches_brute_force() {
        let product = validate(&VirtuallyFreeData::direct_product(2, 2)).unwrap();
        let swap = validate(&VirtuallyFreeData::involution(2, &["b", "a"])).unwrap();
        let all_z = centralizer_of_fiber(&product);
        let cases: Vec<(&VirtuallyFree, SubgroupHandle, Vec<GElement>)> = vec![
            (&product, sub(&["a"]), all_z.clone()),
            (&product, sub(&["aa"]), all_z.clone()),
            (&product, sub(&["abb", "aab"]), vec![product.identity()]),
            (&swap, sub(&["a"]), vec![swap.identity()]),
            (&swap, sub(&["ab"]), vec![swap.identity()]),
            (&swap, sub(&["aab", "abAAB"]), vec![swap.identity()]),
        ];
        for (vf, k, a) in cases {
            let report = weak_malnormality_in_g(&k, &a, vf).unwrap();
            let brute_offender = vf.elements_up_to(4).find(|g| {
                !product_contains(&k, &a, g)
                    && !based_intersection(&k, &conjugate_fiber_subgroup(&k, g, vf))
                        .unwrap()
                        .is_trivial()
            });
            assert_eq!(report.verdict, brute_offender.is_none(), "{k:?} {a:?}");
        }
    }
}
