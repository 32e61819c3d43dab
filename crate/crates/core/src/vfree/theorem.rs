use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{choose_exponent_n, ExponentChoice, IntMatrix};
use crate::pingpong::{search_subgroups, select_pingpong_pair, CandidateBudget, PingpongPair};
use crate::stallings::{based_intersection, SubgroupHandle};
use crate::word::Word;

use super::action::abelianized_action;
use super::commensurator::{
    commensurator_in_g, torsion_and_splitting, weak_malnormality_in_g, GCommensurator, GSubgroup,
    Splitting, WeakMalnormalityReport,
};
use super::group::{GElement, VirtuallyFree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub comm_equals_h1a: bool,
    pub direct_product_ok: bool,
    pub weakly_malnormal_ok: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.comm_equals_h1a && self.direct_product_ok && self.weakly_malnormal_ok
    }
}

/// The subgroup search that replaces `H0 ∩ 𝔽` when it fails verification.
#[derive(Clone, Debug, Serialize)]
pub struct Refinement {
    /// Generators as words in the free basis of the unrefined subgroup.
    pub basis_words: Vec<Word>,
    pub generators: Vec<Word>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Transcript {
    pub abelianized_action: Vec<IntMatrix>,
    pub exponent: ExponentChoice<i64>,
    pub seed: Word,
    pub pingpong: PingpongPair,
    pub h0: Vec<Word>,
    pub comm_h0: GCommensurator,
    pub splitting: Splitting,
    pub unrefined_h1: Vec<Word>,
    pub unrefined_verdicts: Verdicts,
    pub refinement: Option<Refinement>,
    pub comm_h1: GCommensurator,
    pub weak_malnormality: Option<WeakMalnormalityReport>,
}

/// A weakly malnormal subgroup `P = H1 × A` of `G` with
/// `Comm_G(H1) = H1 × A`, and the evidence for it.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremAResult {
    pub h1: Vec<Word>,
    pub a: Vec<GElement>,
    pub comm: Vec<GElement>,
    pub verdicts: Verdicts,
    pub transcript: Transcript,
}

struct Verification {
    verdicts: Verdicts,
    comm: GCommensurator,
    report: Option<WeakMalnormalityReport>,
}

fn verify(h1: &SubgroupHandle, a: &[GElement], vf: &VirtuallyFree) -> Result<Verification> {
    let h1 = SubgroupHandle::build(h1.ambient_rank(), h1.generators())?;
    let comm = commensurator_in_g(&h1, vf)?;
    let mut p_gens: Vec<GElement> = h1.generators().iter().map(|g| vf.fiber(g)).collect();
    p_gens.extend(a.iter().cloned());
    let p = GSubgroup::generate(vf, &p_gens)?;
    let comm_equals_h1a = comm.subgroup.same_subgroup(vf, &p);

    let centralizes = a.iter().all(|x| {
        h1.generators()
            .iter()
            .all(|g| vf.conjugate_fiber(x, g) == *g)
    });
    let meets_trivially = a
        .iter()
        .all(|x| x.q != vf.quotient().identity() || x.w.is_identity());
    let closed = a
        .iter()
        .all(|x| a.iter().all(|y| a.contains(&vf.mul(x, y))));
    let normal = comm
        .subgroup
        .generators()
        .iter()
        .all(|s| a.iter().all(|x| a.contains(&vf.conjugate(s, x))));
    let direct_product_ok = centralizes && meets_trivially && closed && normal;

    let report = if centralizes {
        Some(weak_malnormality_in_g(&h1, a, vf)?)
    } else {
        None
    };
    let weakly_malnormal_ok = report.as_ref().is_some_and(|r| r.verdict);
    Ok(Verification {
        verdicts: Verdicts {
            comm_equals_h1a,
            direct_product_ok,
            weakly_malnormal_ok,
        },
        comm,
        report,
    })
}

/// Runs the construction and returns the result with its verdicts, whether
/// or not they all hold.
///
/// 1. `L` is the abelianized action, `N` the least exponent for which
///    `v = e₁ + N e₂` is an eigenvector of nothing in `L \ {I}`, `w = x₁x₂ᴺ`.
/// 2. A ping-pong pair for `w` avoiding `Es` gives `H0 = ⟨g1ᵏ, g2ᵏ⟩`.
/// 3. `C = Comm_G(H0)` splits as `𝔽 A`; `H1 = H0 ∩ 𝔽`.
/// 4. If `H1` fails verification, a rank-two subgroup of `H1` passing it is
///    searched for in the free basis of `H1`.
/// 5. `Comm_G(H1) = H1 A`, the direct product structure and weak
///    malnormality of `H1 A` are verified.
///
/// `A` centralizes all of `F_m`, so it centralizes every candidate `H1`.
pub fn run_pipeline(
    vf: &VirtuallyFree,
    es: &[SubgroupHandle],
    budget: CandidateBudget,
) -> Result<TheoremAResult> {
    let m = vf.rank();
    let l = abelianized_action(vf)?;
    let exponent = choose_exponent_n(&l)?;
    let seed = &Word::generator(m, 1) * &Word::generator(m, 2).pow(exponent.n as i64);

    let pingpong = select_pingpong_pair(&seed, es, budget)?;
    let h0 = pingpong.subgroup();
    let comm_h0 = commensurator_in_g(&h0, vf)?;
    let splitting = torsion_and_splitting(&comm_h0.subgroup, vf)?;
    let unrefined = based_intersection(&h0, comm_h0.subgroup.fiber())?;
    let unrefined = SubgroupHandle::build(m, &unrefined.basis())?;
    let a = splitting.a.clone();

    let first = verify(&unrefined, &a, vf)?;
    let unrefined_verdicts = first.verdicts;
    let (h1, check, refinement) = if first.verdicts.all() {
        (unrefined.clone(), first, None)
    } else {
        let hit = search_subgroups(&unrefined.basis(), 2, budget, |cand| {
            Ok(verify(cand, &a, vf)?.verdicts.all())
        })?;
        let h1 = SubgroupHandle::build(m, hit.subgroup.generators())?;
        let check = verify(&h1, &a, vf)?;
        let refinement = Refinement {
            basis_words: hit.basis_words,
            generators: h1.generators().to_vec(),
        };
        (h1, check, Some(refinement))
    };

    Ok(TheoremAResult {
        h1: h1.generators().to_vec(),
        a: a.clone(),
        comm: check.comm.subgroup.generators().to_vec(),
        verdicts: check.verdicts,
        transcript: Transcript {
            abelianized_action: l.elements.clone(),
            exponent,
            seed,
            pingpong,
            h0: h0.generators().to_vec(),
            comm_h0,
            splitting,
            unrefined_h1: unrefined.generators().to_vec(),
            unrefined_verdicts,
            refinement,
            comm_h1: check.comm,
            weak_malnormality: check.report,
        },
    })
}

/// [`run_pipeline`], failing with `TheoremViolation` unless every verdict
/// holds.
pub fn construct_weakly_malnormal(
    vf: &VirtuallyFree,
    es: &[SubgroupHandle],
    budget: CandidateBudget,
) -> Result<TheoremAResult> {
    let result = run_pipeline(vf, es, budget)?;
    if !result.verdicts.all() {
        return Err(Error::TheoremViolation(format!(
            "final verification failed: {:?}",
            result.verdicts
        )));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vfree::group::{validate, VirtuallyFreeData};

    #[test]
    fn direct_product_with_z2() {
        let vf = validate(&VirtuallyFreeData::direct_product(2, 2)).unwrap();
        let r = construct_weakly_malnormal(&vf, &[], CandidateBudget::default()).unwrap();
        assert_eq!(r.transcript.exponent.n, 1);
        assert_eq!(r.transcript.seed.to_string(), "ab");
        assert_eq!(r.a.len(), 2);
        assert!(r.verdicts.all());
    }

    #[test]
    fn swap_action() {
        let vf = validate(&VirtuallyFreeData::involution(2, &["b", "a"])).unwrap();
        let r = construct_weakly_malnormal(&vf, &[], CandidateBudget::default()).unwrap();
        assert_eq!(r.transcript.exponent.n, 2);
        assert_eq!(r.a, vec![vf.identity()]);
        assert!(r.verdicts.all());
    }

    #[test]
    fn inversion_action_is_obstructed() {
        let vf = validate(&VirtuallyFreeData::involution(2, &["A", "B"])).unwrap();
        let err = construct_weakly_malnormal(&vf, &[], CandidateBudget::default()).unwrap_err();
        assert!(matches!(err, Error::ScalarObstruction(_)));
    }
}
