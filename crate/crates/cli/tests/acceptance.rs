//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashSet;
use std::panic;
use std::time::{Duration, Instant};

use malnormal::enumerate::ReducedWords;
use malnormal::matrix::{choose_exponent_n, FiniteMatrixGroup, Matrix};
use malnormal::pingpong::{select_pingpong_pair, CandidateBudget};
use malnormal::stallings::{
    based_intersection, commensurator_in_free, conjugate_intersections, double_coset_contains,
    is_malnormal, power_conjugates_into, Index, SubgroupHandle,
};
use malnormal::vfree::{
    self, conjugate_fiber_subgroup, construct_weakly_malnormal, product_contains, FreeAutomorphism,
    VirtuallyFreeData,
};
use malnormal::word::Word;
use malnormal::Error;
use malnormal_cli::selftest::{random_subgroup, random_word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STALLINGS_LIMIT: Duration = Duration::from_secs(30);
const CONJ_INTERSECTION_LIMIT: Duration = Duration::from_secs(60);
const PINGPONG_LIMIT: Duration = Duration::from_secs(120);
const THEOREM_A_LIMIT: Duration = Duration::from_secs(600);

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(
        start.elapsed() < limit,
        format!("took {:?}, limit {:?}", start.elapsed(), limit),
    )
}

fn w(s: &str) -> Word {
    Word::parse(2, s).unwrap()
}

fn sub(gens: &[&str]) -> SubgroupHandle {
    SubgroupHandle::build(2, &gens.iter().map(|s| w(s)).collect::<Vec<_>>()).unwrap()
}

/// All products of at most `depth` generators and inverses.
fn products(h: &SubgroupHandle, depth: usize) -> HashSet<Word> {
    let rank = h.ambient_rank();
    let mut letters: Vec<Word> = h.generators().to_vec();
    letters.extend(h.generators().iter().map(|g| g.invert()));
    let mut layer = vec![Word::identity(rank)];
    let mut all: HashSet<Word> = layer.iter().cloned().collect();
    for _ in 0..depth {
        layer = layer
            .iter()
            .flat_map(|x| letters.iter().map(move |g| x * g))
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

fn nielsen_schreier_holds(h: &SubgroupHandle, finite_seen: &mut usize) -> bool {
    match h.index() {
        Index::Finite(i) => {
            *finite_seen += 1;
            h.rank() - 1 == i * (h.ambient_rank() - 1)
        }
        Index::Infinite => true,
    }
}

fn criterion_1(finite_seen: &mut usize) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0usize;
    for _ in 0..200 {
        let rank = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=3);
        let gens: Vec<Word> = (0..n).map(|_| random_word(&mut rng, rank, 6)).collect();
        let h = SubgroupHandle::build(rank, &gens).unwrap();
        ensure(
            nielsen_schreier_holds(&h, finite_seen),
            format!("Nielsen–Schreier fails for {h:?}"),
        )?;
        let prods = products(&h, 4);
        for x in &prods {
            checked += 1;
            ensure(
                h.contains(x).unwrap(),
                format!("{x} is a product of generators of {h:?} but rejected"),
            )?;
        }
        let basis = h.basis();
        for x in ReducedWords::new(rank, 3) {
            if h.contains(&x).unwrap() {
                let expr = h
                    .express(&x)
                    .unwrap()
                    .ok_or(format!("{x} accepted without certificate"))?;
                let prod = expr.iter().fold(Word::identity(rank), |acc, &(i, inv)| {
                    &acc * &if inv {
                        basis[i].invert()
                    } else {
                        basis[i].clone()
                    }
                });
                ensure(
                    prod == x,
                    format!("certificate for {x} multiplies to {prod}"),
                )?;
            } else {
                ensure(
                    !prods.contains(&x),
                    format!("{x} rejected but is a product of generators"),
                )?;
            }
        }
        for _ in 0..10 {
            let mut shuffled = gens.clone();
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.gen_range(0..=i));
            }
            let k = SubgroupHandle::build(rank, &shuffled).unwrap();
            ensure(
                k.graph() == h.graph(),
                format!("fold of {h:?} depends on generator order"),
            )?;
        }
    }
    within(start, STALLINGS_LIMIT)?;
    Ok(format!(
        "200 subgroups, {checked} products agree, 10 permutations each, {:.2?}",
        start.elapsed()
    ))
}

fn criterion_2(finite_seen: &mut usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..300 {
        let rank = rng.gen_range(2..=3);
        let h = random_subgroup(&mut rng, rank, rank + 2, 4);
        ensure(
            nielsen_schreier_holds(&h, finite_seen),
            format!("Nielsen–Schreier fails for {h:?}"),
        )?;
    }
    ensure(*finite_seen > 0, "no finite-index instance encountered")?;
    Ok(format!(
        "rank - 1 = index·(m - 1) on all {finite_seen} finite-index instances"
    ))
}

fn criterion_3(finite_seen: &mut usize) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let conjugators: Vec<Word> = ReducedWords::new(2, 6).collect();
    let mut nontrivial = 0usize;
    for _ in 0..50 {
        let h = random_subgroup(&mut rng, 2, 2, 6);
        let k = random_subgroup(&mut rng, 2, 2, 6);
        ensure(
            nielsen_schreier_holds(&h, finite_seen) && nielsen_schreier_holds(&k, finite_seen),
            "Nielsen–Schreier",
        )?;
        let comps: Vec<_> = conjugate_intersections(&h, &k)
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|c| !c.trivial)
            .collect();
        for g in &conjugators {
            if based_intersection(&h, &k.conjugate(g).unwrap())
                .unwrap()
                .is_trivial()
            {
                continue;
            }
            nontrivial += 1;
            let covered = comps
                .iter()
                .any(|c| double_coset_contains(&h, &c.witness, &k, g).unwrap());
            ensure(
                covered,
                format!("H={h:?} K={k:?}: conjugator {g} not covered"),
            )?;
        }
    }
    within(start, CONJ_INTERSECTION_LIMIT)?;
    Ok(format!(
        "50 pairs, {nontrivial} nontrivial conjugators all covered, {:.2?}",
        start.elapsed()
    ))
}

fn criterion_4() -> Outcome {
    for (gens, expected, witness) in [
        (vec!["a"], true, None),
        (vec!["aa"], false, Some("a")),
        (vec!["abAB"], true, None),
    ] {
        let h = sub(&gens);
        let report = is_malnormal(&h).unwrap();
        ensure(
            report.verdict == expected,
            format!("{gens:?}: verdict {}", report.verdict),
        )?;
        if let Some(x) = witness {
            let witnesses: Vec<String> = report
                .offenders
                .iter()
                .map(|c| c.witness.to_string())
                .collect();
            ensure(
                witnesses == vec![x.to_string()],
                format!("{gens:?}: witnesses {witnesses:?}"),
            )?;
        }
        let brute = ReducedWords::new(2, 6).all(|g| {
            h.contains(&g).unwrap()
                || based_intersection(&h, &h.conjugate(&g).unwrap())
                    .unwrap()
                    .is_trivial()
        });
        ensure(
            brute == expected,
            format!("{gens:?}: brute force disagrees"),
        )?;
    }
    Ok(
        "<a> malnormal, <aa> not (witness a), <abAB> malnormal; brute force to length 6 agrees"
            .into(),
    )
}

fn criterion_5() -> Outcome {
    let c = commensurator_in_free(&sub(&["aa"])).unwrap();
    ensure(
        c.subgroup == sub(&["a"]) && c.index_of_h == 2,
        "Comm(<aa>) is not <a> with index 2",
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut checked = 0;
    while checked < 50 {
        let h = random_subgroup(&mut rng, 2, 2, 6);
        if h.is_trivial() {
            continue;
        }
        checked += 1;
        let c = commensurator_in_free(&h).unwrap();
        ensure(
            h.is_subgroup_of(&c.subgroup).unwrap(),
            format!("{h:?} not in its commensurator"),
        )?;
        let again = commensurator_in_free(&c.subgroup).unwrap();
        ensure(
            again.subgroup == c.subgroup,
            format!("Comm not idempotent on {h:?}"),
        )?;
        ensure(
            again.index_of_h == 1 && again.witnesses.is_empty(),
            format!("Comm({h:?}) not self-commensurated"),
        )?;
    }
    Ok(
        "Comm(<aa>) = <a>, index 2; idempotent and self-commensurated on 50 random subgroups"
            .into(),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let es = [sub(&["a"]), sub(&["b"])];
    let pair = select_pingpong_pair(&w("abb"), &es, CandidateBudget::default())
        .map_err(|e| e.to_string())?;
    let h = pair.subgroup();
    ensure(h.rank() == 2, "rank of <g1^k, g2^k> is not 2")?;
    ensure(
        pair.verification.passed(),
        "verification record does not pass",
    )?;
    ensure(
        pair.verification
            .avoidance
            .iter()
            .all(|e| e.components.iter().all(|c| c.trivial)),
        "nontrivial component",
    )?;
    let powers: Vec<Word> = (1..=6)
        .flat_map(|j| [pair.g1.pow(j), pair.g2.pow(j)])
        .collect();
    for e in &es {
        for x in ReducedWords::new(2, 5) {
            let conj = e.conjugate(&x).unwrap();
            ensure(
                based_intersection(&h, &conj).unwrap().is_trivial(),
                format!("H meets {x}·E·{x}^-1"),
            )?;
            for p in &powers {
                ensure(
                    !conj.contains(p).unwrap(),
                    format!("{p} lies in {x}·E·{x}^-1"),
                )?;
            }
        }
        for g in [&pair.g1, &pair.g2] {
            ensure(
                power_conjugates_into(g, e).unwrap().is_none(),
                format!("a power of {g} conjugates into E"),
            )?;
        }
    }
    within(start, PINGPONG_LIMIT)?;
    Ok(format!(
        "g1 = {}, g2 = {}, k = {}; brute force clean, {:.2?}",
        pair.g1,
        pair.g2,
        pair.k,
        start.elapsed()
    ))
}

fn criterion_7() -> Outcome {
    let swap = Matrix::from_rows(vec![vec![0i64, 1], vec![1, 0]]).unwrap();
    let l = FiniteMatrixGroup::from_images(2, &[Matrix::identity(2), swap]).unwrap();
    let choice = choose_exponent_n(&l).map_err(|e| e.to_string())?;
    ensure(choice.n == 2, format!("N = {}", choice.n))?;
    let first = choice
        .rejected
        .first()
        .ok_or("N = 1 not recorded as rejected")?;
    ensure(
        first.n == 1 && first.vector == vec![1, 1],
        format!("rejection {first:?}"),
    )?;
    let minus = Matrix::from_rows(vec![vec![-1i64, 0], vec![0, -1]]).unwrap();
    let l = FiniteMatrixGroup::from_images(2, &[Matrix::identity(2), minus]).unwrap();
    ensure(
        matches!(choose_exponent_n(&l), Err(Error::ScalarObstruction(_))),
        "{I, -I} is not obstructed",
    )?;
    Ok("{I, S}: N = 2, N = 1 rejected by eigenvector (1,1); {I, -I}: ScalarObstruction".into())
}

fn criterion_8() -> Outcome {
    let auto =
        |images: &[&str]| FreeAutomorphism::new(images.iter().map(|s| w(s)).collect()).unwrap();
    let id = FreeAutomorphism::identity(2);
    ensure(
        vfree::baumslag_taylor_check(&[id.clone(), auto(&["b", "a"])]) == Ok(true),
        "{id, swap}",
    )?;
    ensure(
        vfree::baumslag_taylor_check(&[id.clone(), auto(&["A", "B"])]) == Ok(true),
        "{id, iota}",
    )?;
    let inner = vfree::baumslag_taylor_check(&[id, FreeAutomorphism::inner(&w("a"))]);
    ensure(
        matches!(inner, Err(Error::InfiniteOrderElement(_))),
        format!("inner: {inner:?}"),
    )?;
    Ok("{id, swap} and {id, iota} inject; conjugation by a is InfiniteOrderElement".into())
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for (label, data, a_order) in [
        ("F2 x Z/2", VirtuallyFreeData::direct_product(2, 2), 2),
        (
            "F2 x| Z/2 (swap)",
            VirtuallyFreeData::involution(2, &["b", "a"]),
            1,
        ),
    ] {
        let vf = vfree::validate(&data).unwrap();
        let r = construct_weakly_malnormal(&vf, &[], CandidateBudget::default())
            .map_err(|e| format!("{label}: {e}"))?;
        ensure(
            r.verdicts.all(),
            format!("{label}: verdicts {:?}", r.verdicts),
        )?;
        ensure(
            r.a.len() == a_order,
            format!("{label}: |A| = {}", r.a.len()),
        )?;
        let h1 = SubgroupHandle::build(2, &r.h1).unwrap();
        let mut checked = 0;
        for g in vf.elements_up_to(5) {
            if product_contains(&h1, &r.a, &g) {
                continue;
            }
            checked += 1;
            let meet = based_intersection(&h1, &conjugate_fiber_subgroup(&h1, &g, &vf)).unwrap();
            ensure(
                meet.is_trivial(),
                format!("{label}: H1 meets its conjugate by {g}"),
            )?;
        }
        let h1_text: Vec<String> = r.h1.iter().map(|x| x.to_string()).collect();
        lines.push(format!(
            "{label}: H1 = <{}>, |A| = {}, {checked} conjugators clean",
            h1_text.join(", "),
            r.a.len()
        ));
    }
    within(start, THEOREM_A_LIMIT)?;
    Ok(format!("{}; {:.2?}", lines.join("; "), start.elapsed()))
}

fn criterion_10() -> Outcome {
    let first = malnormal_cli::run(&["malnormal", "selftest"]);
    let second = malnormal_cli::run(&["malnormal", "selftest"]);
    ensure(first.0 == 0, format!("selftest exit code {}", first.0))?;
    ensure(first == second, "selftest transcripts differ")?;
    Ok(format!(
        "two selftest runs byte-identical ({} bytes)",
        first.1.len()
    ))
}

fn main() {
    let mut finite_seen = 0usize;
    let mut failures = 0;
    let mut report = |n: usize, outcome: std::thread::Result<Outcome>| {
        let line = match outcome {
            Ok(Ok(detail)) => format!("criterion {n:>2}: PASS  {detail}"),
            Ok(Err(why)) => format!("criterion {n:>2}: FAIL  {why}"),
            Err(_) => format!("criterion {n:>2}: FAIL  panicked"),
        };
        if line.contains("FAIL") {
            failures += 1;
        }
        println!("{line}");
    };
    report(
        1,
        panic::catch_unwind(panic::AssertUnwindSafe(|| criterion_1(&mut finite_seen))),
    );
    report(
        3,
        panic::catch_unwind(panic::AssertUnwindSafe(|| criterion_3(&mut finite_seen))),
    );
    report(
        2,
        panic::catch_unwind(panic::AssertUnwindSafe(|| criterion_2(&mut finite_seen))),
    );
    report(4, panic::catch_unwind(criterion_4));
    report(5, panic::catch_unwind(criterion_5));
    report(6, panic::catch_unwind(criterion_6));
    report(7, panic::catch_unwind(criterion_7));
    report(8, panic::catch_unwind(criterion_8));
    report(9, panic::catch_unwind(criterion_9));
    report(10, panic::catch_unwind(criterion_10));
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
