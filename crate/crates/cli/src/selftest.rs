//! Fixed-seed property suite behind the `selftest` command. The transcript
//! holds no timings, so repeated runs are byte-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use malnormal::enumerate::ReducedWords;
use malnormal::matrix::{choose_exponent_n, FiniteMatrixGroup, Matrix};
use malnormal::pingpong::{select_pingpong_pair, CandidateBudget};
use malnormal::stallings::{
    based_intersection, commensurator_in_free, conjugate_intersections, double_coset_contains,
    is_malnormal, short_products, Index, SubgroupHandle,
};
use malnormal::vfree::{self, FreeAutomorphism, VirtuallyFreeData};
use malnormal::word::{free_reduce, Word};
use malnormal::Error;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn random_word(rng: &mut ChaCha8Rng, rank: usize, max_len: usize) -> Word {
    let len = rng.gen_range(1..=max_len);
    let raw: Vec<(usize, i8)> = (0..len)
        .map(|_| {
            (
                rng.gen_range(1..=rank),
                if rng.gen_bool(0.5) { 1 } else { -1 },
            )
        })
        .collect();
    free_reduce(rank, &raw).expect("letters within rank")
}

pub fn random_subgroup(
    rng: &mut ChaCha8Rng,
    rank: usize,
    gens: usize,
    max_len: usize,
) -> SubgroupHandle {
    let words: Vec<Word> = (0..gens).map(|_| random_word(rng, rank, max_len)).collect();
    SubgroupHandle::build(rank, &words).expect("same rank")
}

fn w(s: &str) -> Word {
    Word::parse(2, s).expect("valid word")
}

fn sub(gens: &[&str]) -> SubgroupHandle {
    SubgroupHandle::build(2, &gens.iter().map(|s| w(s)).collect::<Vec<_>>())
        .expect("valid subgroup")
}

fn word_laws() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut passed = true;
    for _ in 0..200 {
        let rank = rng.gen_range(1..=4);
        let (u, v) = (
            random_word(&mut rng, rank, 10),
            random_word(&mut rng, rank, 10),
        );
        let uv = &u * &v;
        passed &= Word::parse(rank, &u.to_string()).ok() == Some(u.clone());
        passed &= uv.abelianize() == u.abelianize() + v.abelianize();
        passed &= u.iota().abelianize() == -u.abelianize();
        let d = u.cyclic_reduce();
        passed &= d.core.is_cyclically_reduced() && d.core.conjugate_by(&d.conjugator) == u;
        passed &= u.commutator_square().in_commutator_subgroup();
    }
    Check {
        name: "word_laws",
        passed,
        detail: json!({"pairs": 200}),
    }
}

fn fold_confluence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut passed = true;
    for _ in 0..50 {
        let rank = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=4);
        let gens: Vec<Word> = (0..n).map(|_| random_word(&mut rng, rank, 10)).collect();
        let h = SubgroupHandle::build(rank, &gens).expect("same rank");
        for _ in 0..5 {
            let mut shuffled = gens.clone();
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.gen_range(0..=i));
            }
            passed &= SubgroupHandle::build(rank, &shuffled)
                .expect("same rank")
                .graph()
                == h.graph();
        }
    }
    Check {
        name: "fold_confluence",
        passed,
        detail: json!({"subgroups": 50, "permutations": 5}),
    }
}

fn membership() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut passed = true;
    let mut members = 0;
    for _ in 0..30 {
        let rank = rng.gen_range(2..=3);
        let n = rng.gen_range(1..=3);
        let h = random_subgroup(&mut rng, rank, n, 5);
        let shorts = short_products(&h, 3);
        passed &= shorts.iter().all(|x| h.contains(x).unwrap_or(false));
        let basis = h.basis();
        for x in ReducedWords::new(rank, 4) {
            if h.contains(&x).unwrap_or(false) {
                members += 1;
                let Ok(Some(expr)) = h.express(&x) else {
                    passed = false;
                    continue;
                };
                let prod = expr.iter().fold(Word::identity(rank), |acc, &(i, inv)| {
                    &acc * &if inv {
                        basis[i].invert()
                    } else {
                        basis[i].clone()
                    }
                });
                passed &= prod == x;
            }
        }
    }
    Check {
        name: "membership",
        passed,
        detail: json!({"subgroups": 30, "certified_members": members}),
    }
}

fn nielsen_schreier() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut passed = true;
    let mut finite = 0;
    for _ in 0..300 {
        let rank = rng.gen_range(2..=3);
        let h = random_subgroup(&mut rng, rank, rank + 2, 4);
        if let Index::Finite(i) = h.index() {
            finite += 1;
            passed &= h.rank() - 1 == i * (rank - 1);
        }
    }
    Check {
        name: "nielsen_schreier",
        passed: passed && finite > 0,
        detail: json!({"finite_index_instances": finite}),
    }
}

fn conjugate_intersection_cover() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut passed = true;
    let mut covered = 0;
    for _ in 0..10 {
        let h = random_subgroup(&mut rng, 2, 2, 5);
        let k = random_subgroup(&mut rng, 2, 2, 5);
        let Ok(comps) = conjugate_intersections(&h, &k) else {
            passed = false;
            continue;
        };
        for g in ReducedWords::new(2, 3) {
            let nontrivial = !based_intersection(&h, &k.conjugate(&g).expect("same rank"))
                .expect("same rank")
                .is_trivial();
            let hits = comps
                .iter()
                .filter(|c| {
                    !c.trivial && double_coset_contains(&h, &c.witness, &k, &g).unwrap_or(false)
                })
                .count();
            passed &= hits == usize::from(nontrivial);
            covered += usize::from(nontrivial);
        }
    }
    Check {
        name: "conjugate_intersections",
        passed,
        detail: json!({"pairs": 10, "nontrivial_conjugators": covered}),
    }
}

fn malnormality() -> Check {
    let mut passed = true;
    let mut verdicts = Vec::new();
    for (gens, expected) in [(vec!["a"], true), (vec!["aa"], false), (vec!["abAB"], true)] {
        let h = sub(&gens);
        let report = is_malnormal(&h).expect("nontrivial");
        let brute = ReducedWords::new(2, 4).all(|g| {
            h.contains(&g).unwrap_or(false)
                || based_intersection(&h, &h.conjugate(&g).expect("rank"))
                    .expect("rank")
                    .is_trivial()
        });
        passed &= report.verdict == expected && brute == expected;
        verdicts.push(json!({"generators": gens, "verdict": report.verdict,
            "witnesses": report.offenders.iter().map(|c| c.witness.to_string()).collect::<Vec<_>>()}));
    }
    Check {
        name: "malnormality",
        passed,
        detail: json!(verdicts),
    }
}

fn commensurators() -> Check {
    let c = commensurator_in_free(&sub(&["aa"])).expect("nontrivial");
    let mut passed = c.subgroup == sub(&["a"]) && c.index_of_h == 2;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for _ in 0..20 {
        let h = random_subgroup(&mut rng, 2, 2, 5);
        if h.is_trivial() {
            continue;
        }
        checked += 1;
        let c = commensurator_in_free(&h).expect("nontrivial");
        let again = commensurator_in_free(&c.subgroup).expect("nontrivial");
        passed &= again.subgroup == c.subgroup && again.index_of_h == 1;
    }
    Check {
        name: "commensurator",
        passed,
        detail: json!({"index_of_aa": c.index_of_h, "idempotence_checked": checked}),
    }
}

fn pingpong() -> Check {
    let es = [sub(&["a"]), sub(&["b"])];
    match select_pingpong_pair(&w("abb"), &es, CandidateBudget::default()) {
        Ok(pair) => Check {
            name: "pingpong",
            passed: pair.verification.passed(),
            detail: json!({"g1": pair.g1.to_string(), "g2": pair.g2.to_string(), "k": pair.k}),
        },
        Err(e) => Check {
            name: "pingpong",
            passed: false,
            detail: json!(e.to_string()),
        },
    }
}

fn exponent() -> Check {
    let m = |rows: Vec<Vec<i64>>| Matrix::from_rows(rows).expect("square");
    let swap =
        FiniteMatrixGroup::from_images(2, &[Matrix::identity(2), m(vec![vec![0, 1], vec![1, 0]])])
            .expect("group");
    let iota = FiniteMatrixGroup::from_images(
        2,
        &[Matrix::identity(2), m(vec![vec![-1, 0], vec![0, -1]])],
    )
    .expect("group");
    let choice = choose_exponent_n(&swap);
    let passed = matches!(&choice, Ok(c) if c.n == 2 && c.rejected.first().map(|r| r.vector.clone()) == Some(vec![1, 1]))
        && matches!(choose_exponent_n(&iota), Err(Error::ScalarObstruction(_)));
    Check {
        name: "exponent",
        passed,
        detail: json!({"swap": choice.map(|c| c.n).ok()}),
    }
}

fn baumslag_taylor() -> Check {
    let auto = |images: &[&str]| {
        FreeAutomorphism::new(images.iter().map(|s| w(s)).collect()).expect("automorphism")
    };
    let id = FreeAutomorphism::identity(2);
    let passed = vfree::baumslag_taylor_check(&[id.clone(), auto(&["b", "a"])]) == Ok(true)
        && vfree::baumslag_taylor_check(&[id.clone(), auto(&["A", "B"])]) == Ok(true)
        && matches!(
            vfree::baumslag_taylor_check(&[id, FreeAutomorphism::inner(&w("a"))]),
            Err(Error::InfiniteOrderElement(_))
        );
    Check {
        name: "baumslag_taylor",
        passed,
        detail: json!({}),
    }
}

fn theorem_a() -> Check {
    let mut passed = true;
    let mut runs = Vec::new();
    for (label, data, a_order) in [
        ("f2xz2", VirtuallyFreeData::direct_product(2, 2), 2),
        ("f2_swap", VirtuallyFreeData::involution(2, &["b", "a"]), 1),
    ] {
        let vf = vfree::validate(&data).expect("valid data");
        match vfree::construct_weakly_malnormal(&vf, &[], CandidateBudget::default()) {
            Ok(r) => {
                passed &= r.verdicts.all() && r.a.len() == a_order;
                runs.push(json!({"group": label, "n": r.transcript.exponent.n,
                    "h1": r.h1.iter().map(|x| x.to_string()).collect::<Vec<_>>(), "a_order": r.a.len()}));
            }
            Err(e) => {
                passed = false;
                runs.push(json!({"group": label, "error": e.to_string()}));
            }
        }
    }
    let iota = vfree::validate(&VirtuallyFreeData::involution(2, &["A", "B"])).expect("valid data");
    passed &= matches!(
        vfree::construct_weakly_malnormal(&iota, &[], CandidateBudget::default()),
        Err(Error::ScalarObstruction(_))
    );
    Check {
        name: "theorem_a",
        passed,
        detail: json!(runs),
    }
}

/// Runs every check in a fixed order.
pub fn run_suite() -> SelftestReport {
    let checks = vec![
        word_laws(),
        fold_confluence(),
        membership(),
        nielsen_schreier(),
        conjugate_intersection_cover(),
        malnormality(),
        commensurators(),
        pingpong(),
        exponent(),
        baumslag_taylor(),
        theorem_a(),
    ];
    SelftestReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
