use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrix::{FiniteMatrixGroup, IntMatrixGroup};
use crate::word::{Letter, Word};

use super::group::{FreeAutomorphism, GElement, VirtuallyFree};

/// The unique `w` with `φ(x) = w⁻¹ x w` for every generator, if `φ` is inner.
///
/// Solutions for the first generator form a coset `⟨a⟩·c⁻¹`; the second
/// generator pins down the exponent, and rank ≥ 2 makes the answer unique.
pub fn inner_conjugator(phi: &FreeAutomorphism) -> Option<Word> {
    let rank = phi.rank();
    let a = Word::generator(rank, 1);
    let b = Word::generator(rank, 2);
    let u = phi.images()[0].letters();
    if u.len() % 2 == 0 {
        return None;
    }
    let l = u.len() / 2;
    if u[l] != Letter::new(1, false) || (0..l).any(|i| u[i] != u[u.len() - 1 - i].inverse()) {
        return None;
    }
    let c = Word::from_letters(rank, u[..l].iter().copied()).expect("subword of a reduced word");
    let y = phi.images()[1].conjugate_by(&c.invert());
    let lead = |inv: bool| {
        y.letters()
            .iter()
            .take_while(|&&x| x == Letter::new(1, inv))
            .count() as i64
    };
    let k = lead(false) - lead(true);
    if b.conjugate_by(&a.pow(k)) != y {
        return None;
    }
    let w = &a.pow(-k) * &c.invert();
    let fits = (1..=rank).all(|i| {
        let x = Word::generator(rank, i);
        phi.images()[i - 1] == x.conjugate_by(&w.invert())
    });
    fits.then_some(w)
}

/// `Z_G(F) = {(w,q) : w φ_q(x) w⁻¹ = x for all x}`, in order of `q`.
pub fn centralizer_of_fiber(vf: &VirtuallyFree) -> Vec<GElement> {
    let mut out = Vec::new();
    for q in 0..vf.quotient().order() {
        if let Some(w) = inner_conjugator(vf.action(q)) {
            let g = GElement::new(w, q);
            debug_assert!((1..=vf.rank()).all(|i| {
                let x = Word::generator(vf.rank(), i);
                vf.conjugate_fiber(&g, &x) == x
            }));
            out.push(g);
        }
    }
    out
}

/// `L`, the image of `Q` in `GL_m(ℤ)` through the abelianized action.
pub fn abelianized_action(vf: &VirtuallyFree) -> Result<IntMatrixGroup> {
    let images: Vec<_> = (0..vf.quotient().order())
        .map(|q| vf.action(q).abelian_matrix())
        .collect();
    let l = FiniteMatrixGroup::from_images(vf.rank(), &images)?;
    if !l.is_homomorphism(vf.quotient().table()) {
        return Err(Error::TheoremViolation(
            "q ↦ M_q is not a homomorphism".into(),
        ));
    }
    Ok(l)
}

/// Checks that a finite group of automorphisms of `F_m` injects into
/// `GL_m(ℤ)`. Finite order is checked before closure, so a lone inner
/// automorphism reports `InfiniteOrderElement`.
pub fn baumslag_taylor_check(autos: &[FreeAutomorphism]) -> Result<bool> {
    let mut distinct: Vec<&FreeAutomorphism> = Vec::new();
    for phi in autos {
        if !distinct.contains(&phi) {
            distinct.push(phi);
        }
    }
    let n = distinct.len();
    for (i, phi) in distinct.iter().enumerate() {
        let mut power = (*phi).clone();
        if !(1..=n).any(|_| {
            let done = power.is_identity();
            power = phi.compose(&power);
            done
        }) {
            return Err(Error::InfiniteOrderElement(i));
        }
    }
    let members: HashSet<&FreeAutomorphism> = distinct.iter().copied().collect();
    for (i, x) in distinct.iter().enumerate() {
        for (j, y) in distinct.iter().enumerate() {
            if !members.contains(&x.compose(y)) {
                return Err(Error::NotClosed(format!(
                    "composite of automorphisms {i} and {j}"
                )));
            }
        }
    }
    let mut seen = HashSet::new();
    for (i, phi) in distinct.iter().enumerate() {
        if !seen.insert(phi.abelian_matrix()) {
            return Err(Error::TheoremViolation(format!(
                "automorphism {i} has the same abelianization as an earlier one"
            )));
        }
    }
    Ok(true)
}
