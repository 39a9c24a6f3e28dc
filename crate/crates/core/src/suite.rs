//! The verification suites: seeded batch runs of every major pipeline, each
//! reporting one pass/fail line with case counts. The acceptance tests and
//! the CLI `suite` subcommand both drive these.

use crate::decomp::{derive_chain, play_game, StrategyKind};
use crate::exec;
use crate::filtered::{
    check_equivariance, property_constant, verify_constant_holds, Caps, Filtration, Mode,
    PropertyKind,
};
use crate::gen::{
    cycle_fold_scenario, distribution_counterexample, filtration_change_pair, interval_family,
    random_idempotent, random_kernel_scenario, random_kernel_scenario_at, random_one_lean_module,
    sample_covers, KernelScenarioParams,
};
use crate::linalg::{express_in_sum, left_kernel, Matrix, Submodule, Vector};
use crate::metric::{cycle, z2ball, zball, FiniteMetricSpace};
use crate::morphism::{
    classical_facts, control_report, decompose_over_disjoint_family, lean_decompose,
    split_kernel_element, FactOutcome, PipelineConstants,
};
use crate::pointset::PointSet;
use crate::resolution::{build_cover_epi, build_resolution};
use crate::ring::Ring;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

/// The registered suites, in run order.
pub const SUITE_NAMES: &[&str] = &[
    "linalg-oracle",
    "geometry",
    "game",
    "kernel-split",
    "kernel-parts",
    "kernel-lean",
    "idempotent",
    "classical",
    "presentation",
    "equivariance",
];

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases_total: usize,
    pub cases_failed: usize,
    pub detail: String,
    pub duration_ms: u128,
}

impl SuiteOutcome {
    pub fn line(&self) -> String {
        format!(
            "suite {:<14} {}  ({}/{} cases, {} ms)",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.cases_total - self.cases_failed,
            self.cases_total,
            self.duration_ms
        )
    }
}

/// Run one suite by name; `None` for an unknown name.
pub fn run_suite(name: &str, seed: u64, caps: &Caps) -> Option<SuiteOutcome> {
    let start = Instant::now();
    let mut outcome = match name {
        "linalg-oracle" => linalg_oracle(seed),
        "geometry" => geometry(seed),
        "game" => game(seed),
        "kernel-split" => kernel_split(seed, caps),
        "kernel-parts" => kernel_parts(seed, caps),
        "kernel-lean" => kernel_lean(seed, caps),
        "idempotent" => idempotent(seed, caps),
        "classical" => classical(seed, caps),
        "presentation" => presentation(seed, caps),
        "equivariance" => equivariance(seed, caps),
        _ => return None,
    };
    outcome.duration_ms = start.elapsed().as_millis();
    Some(outcome)
}

pub fn run_all(seed: u64, caps: &Caps) -> Vec<SuiteOutcome> {
    SUITE_NAMES
        .iter()
        .map(|n| run_suite(n, seed, caps).expect("registered name"))
        .collect()
}

fn outcome(name: &'static str, total: usize, failed: usize, detail: String) -> SuiteOutcome {
    SuiteOutcome {
        name,
        passed: failed == 0,
        cases_total: total,
        cases_failed: failed,
        detail,
        duration_ms: 0,
    }
}

// ---------------------------------------------------------------------------
// linalg-oracle: exhaustive enumeration over small prime fields plus lattice
// canonicity. The enumerator is independent of the elimination code.
// ---------------------------------------------------------------------------

/// All members of the span of `gens` in (F_p)^dim, by brute-force coefficient
/// enumeration.
fn enum_span(p: u64, dim: usize, gens: &[Vec<u64>]) -> BTreeSet<Vec<u64>> {
    let mut members = BTreeSet::new();
    let count = (p as usize).pow(gens.len() as u32);
    for mut idx in 0..count {
        let mut v = vec![0u64; dim];
        for g in gens {
            let c = (idx as u64) % p;
            idx /= p as usize;
            for (slot, &entry) in v.iter_mut().zip(g) {
                *slot = (*slot + c * entry) % p;
            }
        }
        members.insert(v);
    }
    members
}

fn all_vectors(p: u64, dim: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::with_capacity((p as usize).pow(dim as u32));
    for mut idx in 0..(p as usize).pow(dim as u32) {
        let mut v = vec![0u64; dim];
        for slot in v.iter_mut() {
            *slot = (idx as u64) % p;
            idx /= p as usize;
        }
        out.push(v);
    }
    out
}

fn to_vector(ring: Ring, v: &[u64]) -> Vector {
    Vector {
        ring,
        data: v.iter().map(|&x| ring.from_i64(x as i64)).collect(),
    }
}

fn linalg_oracle(seed: u64) -> SuiteOutcome {
    let mut failed = 0usize;
    let mut total = 0usize;
    let mut detail = String::new();

    for &p in &[2u64, 3] {
        let ring = Ring::PrimeField(p);
        let results = exec::map_indexed(500, |case| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p << 32) ^ case as u64);
            let dim = rng.gen_range(1..=4usize);
            let rand_gens = |rng: &mut ChaCha8Rng| -> Vec<Vec<u64>> {
                let count = rng.gen_range(0..=3usize);
                (0..count)
                    .map(|_| (0..dim).map(|_| rng.gen_range(0..p)).collect())
                    .collect()
            };
            let g1 = rand_gens(&mut rng);
            let g2 = rand_gens(&mut rng);
            let m1 = Submodule::span(ring, dim, &g1.iter().map(|g| to_vector(ring, g)).collect::<Vec<_>>()).unwrap();
            let m2 = Submodule::span(ring, dim, &g2.iter().map(|g| to_vector(ring, g)).collect::<Vec<_>>()).unwrap();
            let e1 = enum_span(p, dim, &g1);
            let e2 = enum_span(p, dim, &g2);

            // sum
            let sum = m1.sum(&m2).unwrap();
            let mut union_gens = g1.clone();
            union_gens.extend(g2.iter().cloned());
            let esum = enum_span(p, dim, &union_gens);
            for v in all_vectors(p, dim) {
                if sum.contains(&to_vector(ring, &v)).unwrap() != esum.contains(&v) {
                    return Some(format!("sum mismatch p={p} case={case} v={v:?}"));
                }
            }
            // intersection
            let inter = m1.intersect(&m2).unwrap();
            for v in all_vectors(p, dim) {
                let expected = e1.contains(&v) && e2.contains(&v);
                if inter.contains(&to_vector(ring, &v)).unwrap() != expected {
                    return Some(format!("intersect mismatch p={p} case={case} v={v:?}"));
                }
            }
            // includes vs exhaustive membership
            let inc = m1.includes(&m2).unwrap();
            let einc = e2.iter().all(|v| e1.contains(v));
            if inc != einc {
                return Some(format!("includes mismatch p={p} case={case}"));
            }
            // kernel of a random map
            let rows = dim;
            let cols = rng.gen_range(1..=4usize);
            let mat_rows: Vec<Vec<u64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(0..p)).collect())
                .collect();
            let mat = Matrix::from_rows(
                ring,
                mat_rows
                    .iter()
                    .map(|r| r.iter().map(|&x| ring.from_i64(x as i64)).collect())
                    .collect(),
            )
            .unwrap();
            let ker = left_kernel(&mat);
            for v in all_vectors(p, rows) {
                let image: Vec<u64> = (0..cols)
                    .map(|c| {
                        v.iter()
                            .enumerate()
                            .map(|(r, &x)| x * mat_rows[r][c])
                            .sum::<u64>()
                            % p
                    })
                    .collect();
                let expected = image.iter().all(|&x| x == 0);
                if ker.contains(&to_vector(ring, &v)).unwrap() != expected {
                    return Some(format!("kernel mismatch p={p} case={case} v={v:?}"));
                }
            }
            // express_in_sum vs brute force over all pairs
            let v: Vec<u64> = (0..dim).map(|_| rng.gen_range(0..p)).collect();
            let target = to_vector(ring, &v);
            let brute = e1.iter().any(|a| {
                let rest: Vec<u64> = v
                    .iter()
                    .zip(a)
                    .map(|(&x, &y)| (x + p - y) % p)
                    .collect();
                e2.contains(&rest)
            });
            match express_in_sum(&target, &m1, &m2).unwrap() {
                Some((v1, v2)) => {
                    if !brute {
                        return Some(format!("express found phantom decomposition case={case}"));
                    }
                    if v1.add(&v2) != target
                        || !m1.contains(&v1).unwrap()
                        || !m2.contains(&v2).unwrap()
                    {
                        return Some(format!("express postcondition broken case={case}"));
                    }
                }
                None => {
                    if brute {
                        return Some(format!("express missed decomposition case={case}"));
                    }
                }
            }
            None
        });
        total += 500;
        for r in results.into_iter().flatten() {
            failed += 1;
            if detail.lines().count() < 5 {
                let _ = writeln!(detail, "{r}");
            }
        }
    }

    // HNF canonicity: recombined generating sets give identical forms.
    let ring = Ring::Integers;
    let results = exec::map_indexed(200, |case| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef ^ case as u64);
        let dim = 3;
        let count = rng.gen_range(1..=3usize);
        let gens: Vec<Vector> = (0..count)
            .map(|_| {
                Vector::from_i64(
                    ring,
                    &(0..dim).map(|_| rng.gen_range(-5..=5i64)).collect::<Vec<_>>(),
                )
            })
            .collect();
        let m = Submodule::span(ring, dim, &gens).unwrap();
        // random integer row operations preserve the lattice
        let mut mixed = gens.clone();
        for _ in 0..3 {
            if mixed.len() < 2 {
                break;
            }
            let i = rng.gen_range(0..mixed.len());
            let j = rng.gen_range(0..mixed.len());
            if i != j {
                let coeff = ring.from_i64(rng.gen_range(-3..=3i64));
                let add = mixed[j].scale(&coeff);
                mixed[i] = mixed[i].add(&add);
            }
        }
        mixed.push(gens.iter().fold(Vector::zero(ring, dim), |a, b| a.add(b)));
        let m2 = Submodule::span(ring, dim, &mixed).unwrap();
        (m != m2).then(|| format!("HNF canonicity broken case={case}"))
    });
    total += 200;
    for r in results.into_iter().flatten() {
        failed += 1;
        if detail.lines().count() < 8 {
            let _ = writeln!(detail, "{r}");
        }
    }

    // Frozen lattice membership against box enumeration.
    total += 1;
    let lat = Submodule::span(
        ring,
        2,
        &[
            Vector::from_i64(ring, &[2, 0]),
            Vector::from_i64(ring, &[0, 3]),
            Vector::from_i64(ring, &[2, 3]),
        ],
    )
    .unwrap();
    let mut box_members = BTreeSet::new();
    for a in -10i64..=10 {
        for b in -10i64..=10 {
            box_members.insert(vec![2 * a, 3 * b]);
        }
    }
    let mut lattice_ok = true;
    for x in -10i64..=10 {
        for y in -10i64..=10 {
            let got = lat.contains(&Vector::from_i64(ring, &[x, y])).unwrap();
            if got != box_members.contains(&vec![x, y]) {
                lattice_ok = false;
            }
        }
    }
    if !lattice_ok {
        failed += 1;
        let _ = writeln!(detail, "lattice box membership mismatch");
    }

    let _ = writeln!(
        detail,
        "500 cases each over F2 and F3 (rank ≤ 4) against enumeration; 200 lattice canonicity cases; box-membership cross-check"
    );
    outcome("linalg-oracle", total, failed, detail)
}

// ---------------------------------------------------------------------------
// geometry: randomized metric invariants.
// ---------------------------------------------------------------------------

fn geometry(seed: u64) -> SuiteOutcome {
    let spaces: Vec<FiniteMetricSpace> = vec![
        zball(8),
        z2ball(4),
        cycle(12),
        crate::metric::cayley_ball(&crate::metric::GroupSpec::Free(2), 3, 4096).unwrap(),
    ];
    let mut failed = 0usize;
    let mut detail = String::new();

    // (S ∩ P)[b] ⊆ S[b] ∩ P[b]
    let results = exec::map_indexed(1000, |case| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11 ^ case as u64);
        let space = &spaces[case % spaces.len()];
        let n = space.points();
        let rand_set = |rng: &mut ChaCha8Rng| {
            let mut s = PointSet::empty(n);
            for i in 0..n {
                if rng.gen::<bool>() {
                    s.insert(i);
                }
            }
            s
        };
        let s = rand_set(&mut rng);
        let p = rand_set(&mut rng);
        let b = rng.gen_range(0..=space.diameter());
        let lhs = space.enlarge(&s.intersection(&p), b);
        let rhs = space.enlarge(&s, b).intersection(&space.enlarge(&p, b));
        (!lhs.is_subset_of(&rhs)).then(|| format!("intersection-enlargement case={case}"))
    });
    let mut total = 1000;
    failed += results.iter().flatten().count();
    for r in results.into_iter().flatten().take(3) {
        let _ = writeln!(detail, "{r}");
    }

    // R-disjoint families stay (R − 2D)-disjoint after D-enlargement.
    let mut checked = 0usize;
    let mut case = 0u64;
    while checked < 1000 && case < 50_000 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x22 ^ case);
        case += 1;
        let space = &spaces[(case as usize) % spaces.len()];
        let n = space.points();
        let members = rng.gen_range(2..=3usize);
        let family: Vec<PointSet> = (0..members)
            .map(|_| {
                let c = rng.gen_range(0..n);
                space.ball(c, rng.gen_range(0..=1u64))
            })
            .collect();
        let Some(separation) = space.family_separation(&family) else {
            continue;
        };
        if separation == 0 {
            continue; // overlapping members
        }
        let pairwise_disjoint = family
            .iter()
            .enumerate()
            .all(|(i, a)| family[i + 1..].iter().all(|b| a.is_disjoint_from(b)));
        if !pairwise_disjoint {
            continue;
        }
        let r = separation - 1; // family is exactly R-disjoint at this R
        if r < 2 {
            continue;
        }
        let d = rng.gen_range(0..=(r - 1) / 2);
        if r <= 2 * d {
            continue;
        }
        checked += 1;
        let enlarged: Vec<PointSet> = family.iter().map(|s| space.enlarge(s, d)).collect();
        if !space.is_r_disjoint(&enlarged, r - 2 * d) {
            failed += 1;
            if detail.lines().count() < 6 {
                let _ = writeln!(detail, "enlarged disjointness case={case} r={r} d={d}");
            }
        }
    }
    total += checked;

    // enlarge(enlarge(S,a),b) ⊆ enlarge(S,a+b)
    let results = exec::map_indexed(500, |case| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x33 ^ case as u64);
        let space = &spaces[case % spaces.len()];
        let n = space.points();
        let mut s = PointSet::empty(n);
        for i in 0..n {
            if rng.gen::<bool>() {
                s.insert(i);
            }
        }
        let a = rng.gen_range(0..=4u64);
        let b = rng.gen_range(0..=4u64);
        let lhs = space.enlarge(&space.enlarge(&s, a), b);
        let rhs = space.enlarge(&s, a + b);
        (!lhs.is_subset_of(&rhs)).then(|| format!("composition case={case}"))
    });
    total += 500;
    failed += results.iter().flatten().count();

    let _ = writeln!(
        detail,
        "1000 intersection-enlargement, {checked} enlarged-disjointness, 500 composition checks"
    );
    outcome("geometry", total, failed, detail)
}

// ---------------------------------------------------------------------------
// game: strategy wins and losses.
// ---------------------------------------------------------------------------

fn game(seed: u64) -> SuiteOutcome {
    let mut failed = 0;
    let mut total = 0;
    let mut detail = String::new();

    let s = zball(16);
    for r in 0..=32u64 {
        total += 1;
        match play_game(&s, &[r], StrategyKind::Interval, None) {
            Ok(Ok(chain)) if chain.rounds() <= 1 => {}
            _ => {
                failed += 1;
                let _ = writeln!(detail, "interval loses at R={r}");
            }
        }
    }

    let s2 = z2ball(8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
    for case in 0..50 {
        total += 1;
        let r1 = rng.gen_range(0..=10u64);
        let r2 = rng.gen_range(r1..=12u64);
        let cap = r1 + r2 + 1;
        match play_game(&s2, &[r1, r2], StrategyKind::Product, Some(cap)) {
            Ok(Ok(chain)) if chain.rounds() <= 2 => {}
            _ => {
                failed += 1;
                let _ = writeln!(detail, "product loses case={case} radii=({r1},{r2})");
            }
        }
    }

    total += 1;
    match play_game(&s2, &[4], StrategyKind::Product, None) {
        Ok(Err(f)) if f.round == 1 => {}
        _ => {
            failed += 1;
            let _ = writeln!(detail, "length-1 product game unexpectedly won");
        }
    }

    let _ = writeln!(
        detail,
        "interval exhaustive R ≤ 32 on zball(16); product on 50 seeded pairs; length-1 failure"
    );
    outcome("game", total, failed, detail)
}

// ---------------------------------------------------------------------------
// kernel-split: the δ + 2b + d bound and the constructive splitter.
// ---------------------------------------------------------------------------

fn kernel_split(seed: u64, caps: &Caps) -> SuiteOutcome {
    let space = Arc::new(zball(8));
    let covers_per_scenario = 50;
    let results = exec::map_indexed(200, |case| -> Result<(u64, u64), String> {
        let scenario_seed = seed ^ ((case as u64) << 8);
        let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed);
        let lean_d = rng.gen_range(0..=2u64);
        let control_b = rng.gen_range(0..=2u64);
        let params =
            KernelScenarioParams::sized_for(&space, Ring::PrimeField(5), lean_d, control_b, 0);
        let sc = random_kernel_scenario(space.clone(), params, scenario_seed);
        let kernel = sc.map.kernel();
        let bound = sc.split_delta + 2 * sc.bicontrol_b + sc.insular_d;

        // Sampled kernel split constant must respect the bound.
        let split = property_constant(
            &kernel.filtration,
            PropertyKind::Split,
            Mode::Sampled {
                seed: scenario_seed,
                trials: caps.trials.min(160),
            },
            caps,
        )
        .map_err(|e| e.to_string())?;
        let computed = split
            .value
            .ok_or_else(|| format!("case {case}: no finite kernel split constant"))?;
        if computed > bound {
            return Err(format!(
                "case {case}: kernel split {computed} > bound {bound}"
            ));
        }

        // Constructive splitting of every kernel basis element over sampled
        // covers.
        let covers = sample_covers(space.points(), covers_per_scenario, scenario_seed ^ 0xc0);
        for z in kernel.basis() {
            for (t, u) in &covers {
                split_kernel_element(
                    &sc.map,
                    &kernel,
                    &z,
                    t,
                    u,
                    sc.split_delta,
                    sc.bicontrol_b,
                    sc.insular_d,
                )
                .map_err(|e| format!("case {case}: {e}"))?;
            }
        }
        Ok((computed, bound))
    });
    let total = results.len();
    let mut failed = 0;
    let mut detail = String::new();
    let mut max_ratio = (0u64, 1u64);
    for r in &results {
        match r {
            Ok((c, b)) => {
                if *c * max_ratio.1 > max_ratio.0 * *b {
                    max_ratio = (*c, *b);
                }
            }
            Err(e) => {
                failed += 1;
                if detail.lines().count() < 5 {
                    let _ = writeln!(detail, "{e}");
                }
            }
        }
    }
    let _ = writeln!(
        detail,
        "200 seeded scenarios on zball(8) over F5 (D ≤ 2, b ≤ 2); kernel split ≤ δ+2b+d in all passing cases (tightest {}/{}); every kernel basis element split over {covers_per_scenario} covers",
        max_ratio.0, max_ratio.1
    );
    outcome("kernel-split", total, failed, detail)
}

// ---------------------------------------------------------------------------
// kernel-parts: distribution over families at exactly the required
// disjointness, a permitted-to-fail sweep one below, and the constructed
// counterexample.
// ---------------------------------------------------------------------------

fn kernel_parts(seed: u64, caps: &Caps) -> SuiteOutcome {
    let _ = caps;
    let space = Arc::new(zball(16));
    let mut detail = String::new();

    let run_sweep = |slack: i64, sweep_tag: u64| -> Vec<Result<bool, String>> {
        let space = space.clone();
        exec::map_indexed(100, move |case| {
            let scenario_seed = seed ^ sweep_tag ^ ((case as u64) << 8);
            let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed);
            let lean_d = rng.gen_range(0..=1u64);
            let control_b = rng.gen_range(1..=2u64);
            let required = 2 * lean_d + 2 * control_b;
            let separation = (required as i64 + slack).max(1) as u64;
            let Some(family) =
                interval_family(&space, lean_d + control_b, separation, 2)
            else {
                return Err(format!("case {case}: family does not fit"));
            };
            let centers: Vec<usize> = family
                .iter()
                .map(|piece| {
                    let idx = piece.indices();
                    idx[idx.len() / 2]
                })
                .collect();
            let params = KernelScenarioParams {
                ring: Ring::PrimeField(5),
                lean_d,
                control_b,
                insular_d: 0,
                wide: 2,
                collisions: 2,
                duplicates: 0,
            };
            let sc = random_kernel_scenario_at(space.clone(), params, &centers, scenario_seed);
            let kernel = sc.map.kernel();
            let mut union = PointSet::empty(space.points());
            for f in &family {
                union = union.union(f);
            }
            let local = kernel.eval(&union);
            if local.is_zero() {
                return Err(format!("case {case}: no kernel element in the union"));
            }
            for k in local.gens() {
                let parts = decompose_over_disjoint_family(
                    &sc.map,
                    &kernel,
                    &k,
                    &family,
                    sc.lean_d,
                    sc.bicontrol_b,
                    sc.insular_d,
                )
                .map_err(|e| format!("case {case}: {e}"))?;
                // Each part must live in the stated enlargement of its piece.
                for (i, p) in &parts.parts {
                    let home = space.enlarge(&family[*i], sc.lean_d);
                    if !sc.map.source.eval(&home).contains(p).unwrap() {
                        return Err(format!("case {case}: part escaped its piece"));
                    }
                }
            }
            Ok(true)
        })
    };

    // Exact required disjointness: distance required + 1.
    let exact = run_sweep(1, 0xA0);
    let total_exact = exact.len();
    let failed_exact = exact.iter().filter(|r| r.is_err()).count();
    for e in exact.iter().filter_map(|r| r.as_ref().err()).take(4) {
        let _ = writeln!(detail, "exact sweep: {e}");
    }

    // One below: permitted to fail; count and report.
    let below = run_sweep(0, 0xB0);
    let below_failures = below.iter().filter(|r| r.is_err()).count();

    // The constructed counterexample must fail.
    let cx = distribution_counterexample(Ring::PrimeField(5));
    let kernel = cx.map.kernel();
    let cx_failed = decompose_over_disjoint_family(
        &cx.map,
        &kernel,
        &cx.element,
        &cx.family,
        cx.lean_d,
        cx.control_b,
        cx.insular_d,
    )
    .is_err();

    let mut failed = failed_exact;
    let mut total = total_exact + 1;
    if !cx_failed {
        failed += 1;
        let _ = writeln!(detail, "constructed counterexample unexpectedly decomposed");
    }
    let _ = writeln!(
        detail,
        "100 scenarios at exact disjointness 2D+2b+2d (all must pass); companion sweep one below: {below_failures}/100 failed (permitted); constructed counterexample fails: {cx_failed}"
    );
    let _ = total;
    total = total_exact + 1;
    outcome("kernel-parts", total, failed, detail)
}

// ---------------------------------------------------------------------------
// kernel-lean: the chain pipeline with tracked radii.
// ---------------------------------------------------------------------------

fn kernel_lean(seed: u64, caps: &Caps) -> SuiteOutcome {
    let mut detail = String::new();
    let mut failed = 0usize;
    let mut total = 0usize;

    let run_case = |space: Arc<FiniteMetricSpace>,
                        strategy: StrategyKind,
                        tag: &str,
                        case_seed: u64|
     -> Result<String, String> {
        let params = KernelScenarioParams::sized_for(&space, Ring::PrimeField(5), 1, 1, 1);
        let sc = random_kernel_scenario(space.clone(), params, case_seed);
        // Audit the declared constants on a sample before trusting them.
        let audit = verify_constant_holds(
            sc.g.as_ref(),
            PropertyKind::Insular,
            sc.insular_d.max(1),
            Mode::Sampled {
                seed: case_seed,
                trials: caps.trials.min(128),
            },
            caps,
        )
        .map_err(|e| e.to_string())?;
        if audit.is_err() {
            return Err(format!("{tag}: declared insular constant rejected"));
        }
        let constants = PipelineConstants {
            lean_d: 1,
            split_delta: 1,
            control_b: 1,
            insular_d: 1,
        };
        let derived = derive_chain(&space, strategy, 1, 1, 1, 8).map_err(|e| e.to_string())?;
        let kernel = sc.map.kernel();
        let mut table = String::new();
        let _ = writeln!(
            table,
            "{tag}: n={} mesh={} claimed bound={} formula bound={}",
            derived.chain.rounds(),
            derived.mesh,
            derived.mesh + 2 * derived.chain.rounds() as u64,
            derived.mesh
                + derived.chain.rounds() as u64
                    * (constants.split_delta + 2 * constants.control_b + constants.insular_d
                        + constants.lean_d),
        );
        for (i, k) in kernel.basis().iter().enumerate() {
            let cert = lean_decompose(&sc.map, &kernel, &derived, k, &constants)
                .map_err(|e| format!("{tag} element {i}: {e}"))?;
            let max_enlargement = cert
                .summands
                .iter()
                .map(|s| s.enlargement_radius)
                .max()
                .unwrap_or(0);
            let _ = writeln!(
                table,
                "  element {i:>2}: {} summands, max piece radius {}, achieved lean radius {} (bound {})",
                cert.summands.len(),
                max_enlargement,
                cert.achieved,
                cert.claimed_bound
            );
            if !cert.within_claimed_bound() {
                return Err(format!(
                    "{tag} element {i}: achieved {} exceeds bound {}",
                    cert.achieved, cert.claimed_bound
                ));
            }
        }
        Ok(table)
    };

    for (space, strategy, tag) in [
        (Arc::new(zball(32)), StrategyKind::Interval, "zball(32) interval n=1"),
        (Arc::new(z2ball(8)), StrategyKind::Product, "z2ball(8) product n=2"),
    ] {
        total += 1;
        match run_case(space, strategy, tag, seed ^ tag.len() as u64) {
            Ok(table) => {
                detail.push_str(&table);
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(detail, "{e}");
            }
        }
    }
    outcome("kernel-lean", total, failed, detail)
}

// ---------------------------------------------------------------------------
// idempotent: bicontrol ≤ control for controlled idempotents.
// ---------------------------------------------------------------------------

fn idempotent(seed: u64, caps: &Caps) -> SuiteOutcome {
    let space = Arc::new(zball(6));
    let results = exec::map_indexed(100, |case| -> Result<(), String> {
        let map = random_idempotent(space.clone(), seed ^ case as u64);
        let report = control_report(&map, caps, seed ^ case as u64).map_err(|e| e.to_string())?;
        let c = report
            .control
            .value
            .ok_or_else(|| format!("case {case}: control not finite"))?;
        let b = report
            .bicontrol
            .ok_or_else(|| format!("case {case}: bicontrol not finite"))?;
        if b > c {
            return Err(format!("case {case}: bicontrol {b} > control {c}"));
        }
        Ok(())
    });
    let total = results.len();
    let mut failed = 0;
    let mut detail = String::new();
    for r in results {
        if let Err(e) = r {
            failed += 1;
            if detail.lines().count() < 5 {
                let _ = writeln!(detail, "{e}");
            }
        }
    }
    let _ = writeln!(
        detail,
        "100 seeded controlled idempotents over F2 on zball(6), exhaustive subset sweeps"
    );
    outcome("idempotent", total, failed, detail)
}

// ---------------------------------------------------------------------------
// classical: the structural fact battery on representative maps.
// ---------------------------------------------------------------------------

fn classical(seed: u64, caps: &Caps) -> SuiteOutcome {
    let mut failed = 0;
    let mut total = 0;
    let mut detail = String::new();

    let mut check = |tag: &str,
                     report: Result<crate::morphism::FactReport, crate::morphism::MorphismError>,
                     expect_pass: &[&str]| {
        total += 1;
        match report {
            Ok(r) => {
                let mut bad = Vec::new();
                for name in expect_pass {
                    match r.entry(name) {
                        Some(e) if e.outcome == FactOutcome::Pass => {}
                        Some(e) => bad.push(format!("{name}: {} ({})", e.outcome, e.detail)),
                        None => bad.push(format!("{name}: missing")),
                    }
                }
                if !r.all_applicable_pass() {
                    for e in &r.entries {
                        if e.outcome == FactOutcome::Fail {
                            bad.push(format!("{}: {}", e.name, e.detail));
                        }
                    }
                }
                if !bad.is_empty() {
                    failed += 1;
                    let _ = writeln!(detail, "{tag}: {}", bad.join("; "));
                } else {
                    let _ = writeln!(detail, "{tag}: ok");
                }
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(detail, "{tag}: error {e}");
            }
        }
    };

    let change = filtration_change_pair(6, Ring::Rationals);
    check(
        "filtration-change",
        classical_facts(&change, None, caps, seed),
        &["filtration-change"],
    );

    let fold = cycle_fold_scenario(6, Ring::PrimeField(5), false);
    check(
        "cycle-fold",
        classical_facts(&fold.map, Some(&fold.actions), caps, seed),
        &[
            "equivariant-control",
            "controlled-epi-bicontrol",
            "translate-generated",
        ],
    );

    let idem_space = Arc::new(zball(6));
    let idem = random_idempotent(idem_space, seed);
    check(
        "idempotent",
        classical_facts(&idem, None, caps, seed),
        &["idempotent-bicontrol"],
    );

    // Random controlled idempotents: the bicontrol ≤ control fact across
    // seeds (the 100-case version runs in the idempotent suite).
    let space = Arc::new(zball(6));
    let sweep = exec::map_indexed(20, |case| {
        let map = random_idempotent(space.clone(), seed ^ 0x1000 ^ case as u64);
        let report = classical_facts(&map, None, caps, seed).map_err(|e| e.to_string())?;
        let entry = report.entry("idempotent-bicontrol").unwrap().clone();
        if entry.outcome == FactOutcome::Fail {
            Err(entry.detail)
        } else {
            Ok(())
        }
    });
    total += sweep.len();
    for r in sweep {
        if let Err(e) = r {
            failed += 1;
            let _ = writeln!(detail, "idempotent sweep: {e}");
        }
    }

    outcome("classical", total, failed, detail)
}

// ---------------------------------------------------------------------------
// presentation: cover bicontrol bounds and resolutions over ℚ.
// ---------------------------------------------------------------------------

fn presentation(seed: u64, caps: &Caps) -> SuiteOutcome {
    let space = Arc::new(zball(8));
    let mut detail = String::new();
    let results = exec::map_indexed(50, |case| -> Result<(), String> {
        let f = random_one_lean_module(space.clone(), Ring::PrimeField(5), seed ^ case as u64);
        let cover = build_cover_epi(f, 1, caps, seed ^ case as u64).map_err(|e| e.to_string())?;
        let report = control_report(&cover.map, caps, seed ^ case as u64)
            .map_err(|e| e.to_string())?;
        let b = report
            .bicontrol
            .ok_or_else(|| format!("case {case}: cover bicontrol not finite"))?;
        if b > 1 {
            return Err(format!("case {case}: cover bicontrol {b} > 1"));
        }
        Ok(())
    });
    let mut total = results.len();
    let mut failed = 0;
    for r in results {
        if let Err(e) = r {
            failed += 1;
            if detail.lines().count() < 5 {
                let _ = writeln!(detail, "{e}");
            }
        }
    }

    // Shipped ℚ resolution scenarios terminate with exactness checks inside.
    let shipped: Vec<(&str, crate::filtered::DynFiltration)> = vec![
        (
            "free singleton zball(4)",
            Arc::new(
                crate::filtered::GeneratedFiltration::free(
                    Arc::new(zball(4)),
                    Ring::Rationals,
                    (0..9).map(|x| PointSet::singleton(9, x)).collect(),
                )
                .unwrap(),
            ),
        ),
        ("sparse independent path(5)", sparse_independent_module()),
    ];
    for (tag, f) in shipped {
        total += 1;
        match build_resolution(f, 8, caps, seed) {
            Ok(r) if r.terminated => {
                let _ = writeln!(detail, "resolution {tag}: terminated at length {}", r.length);
            }
            Ok(r) => {
                failed += 1;
                let _ = writeln!(detail, "resolution {tag}: did not terminate within {}", r.length);
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(detail, "resolution {tag}: error {e}");
            }
        }
    }
    let _ = writeln!(detail, "50 seeded 1-lean covers on zball(8) over F5");
    outcome("presentation", total, failed, detail)
}

fn sparse_independent_module() -> crate::filtered::DynFiltration {
    let rows = (0..5)
        .map(|i: usize| (0..5).map(|j| i.abs_diff(j) as u64).collect())
        .collect();
    let space = Arc::new(FiniteMetricSpace::new(rows, None).unwrap());
    let ring = Ring::Rationals;
    let gens = vec![
        crate::filtered::Generator {
            vector: Vector::from_i64(ring, &[2, 1, 0]),
            support: PointSet::singleton(5, 0),
        },
        crate::filtered::Generator {
            vector: Vector::from_i64(ring, &[0, 1, 0]),
            support: PointSet::singleton(5, 2),
        },
        crate::filtered::Generator {
            vector: Vector::from_i64(ring, &[0, 0, 5]),
            support: PointSet::singleton(5, 4),
        },
    ];
    Arc::new(crate::filtered::GeneratedFiltration::new(space, ring, 3, gens).unwrap())
}

// ---------------------------------------------------------------------------
// equivariance: rotation scenarios, a broken witness, and translate
// generation of the kernel.
// ---------------------------------------------------------------------------

fn equivariance(seed: u64, caps: &Caps) -> SuiteOutcome {
    let mut failed = 0;
    let mut total = 0;
    let mut detail = String::new();

    let fold = cycle_fold_scenario(6, Ring::PrimeField(5), false);
    total += 1;
    match check_equivariance(fold.f.as_ref(), &fold.actions.source, caps, seed) {
        Ok(Ok(())) => {
            let _ = writeln!(detail, "cycle(6) rotation source: equivariant");
        }
        other => {
            failed += 1;
            let _ = writeln!(detail, "cycle(6) rotation source: {other:?}");
        }
    }
    total += 1;
    match check_equivariance(fold.g.as_ref(), &fold.actions.target, caps, seed) {
        Ok(Ok(())) => {
            let _ = writeln!(detail, "cycle(6) folded target: equivariant");
        }
        other => {
            failed += 1;
            let _ = writeln!(detail, "cycle(6) folded target: {other:?}");
        }
    }

    total += 1;
    let broken = cycle_fold_scenario(6, Ring::PrimeField(5), true);
    match check_equivariance(broken.f.as_ref(), &broken.actions.source, caps, seed) {
        Ok(Err(witness)) => {
            let _ = writeln!(detail, "broken scenario rejected with witness {witness}");
        }
        other => {
            failed += 1;
            let _ = writeln!(detail, "broken scenario not rejected: {other:?}");
        }
    }

    total += 1;
    match classical_facts(&fold.map, Some(&fold.actions), caps, seed) {
        Ok(report) => {
            let entry = report.entry("translate-generated").unwrap();
            if entry.outcome == FactOutcome::Pass {
                let _ = writeln!(detail, "translate generation: {}", entry.detail);
            } else {
                failed += 1;
                let _ = writeln!(detail, "translate generation failed: {}", entry.detail);
            }
        }
        Err(e) => {
            failed += 1;
            let _ = writeln!(detail, "translate generation error: {e}");
        }
    }

    outcome("equivariance", total, failed, detail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enum_span_counts() {
        // span{(1,0),(1,1)} over F2 is everything; span{(2,.)} over F3 of one
        // generator has 3 members.
        let s = enum_span(2, 2, &[vec![1, 0], vec![1, 1]]);
        assert_eq!(s.len(), 4);
        let s = enum_span(3, 2, &[vec![2, 1]]);
        assert_eq!(s.len(), 3);
        let s = enum_span(3, 2, &[]);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn quick_suites_pass() {
        let caps = Caps::default();
        for name in ["game", "equivariance", "classical"] {
            let o = run_suite(name, 1, &caps).unwrap();
            assert!(o.passed, "{}: {}", name, o.detail);
        }
    }
}
