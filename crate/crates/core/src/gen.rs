//! Seeded scenario builders. Every construction is deterministic per seed
//! and carries constants that are valid by construction and re-verified by
//! the computed reports:
//!
//! - sources are free filtrations (singleton supports plus D-balls), so the
//!   generator-reduced lean and control constants are exact;
//! - targets distribute one direction per point, with optional duplicated
//!   directions along short chains (copies pairwise interpolated by the
//!   primary), which bounds the insular constant by the chain step and the
//!   reverse-control constant by the same;
//! - maps send each base generator to its own direction, so they are
//!   epimorphisms outright and kernels come only from the wide and colliding
//!   generators, keeping kernel elements local.

use crate::filtered::{Filtration, GeneratedFiltration, Generator, IsometryAction};
use crate::linalg::{Matrix, Vector};
use crate::metric::FiniteMetricSpace;
use crate::morphism::{FilteredMap, MapActionPair};
use crate::pointset::PointSet;
use crate::ring::Ring;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A generated kernel scenario: a bicontrolled epimorphism with constants
/// valid by construction.
pub struct KernelScenario {
    pub space: Arc<FiniteMetricSpace>,
    pub ring: Ring,
    pub f: Arc<GeneratedFiltration>,
    pub g: Arc<GeneratedFiltration>,
    pub map: FilteredMap,
    /// Exact lean constant of the source (generator-reduced).
    pub lean_d: u64,
    /// Valid split constant for the source (= the lean constant).
    pub split_delta: u64,
    /// Exact control constant of the map (generator-reduced).
    pub control_b: u64,
    /// Valid bicontrol constant: max(control, duplicate chain step).
    pub bicontrol_b: u64,
    /// Valid insular constant of the target (duplicate chain step).
    pub insular_d: u64,
}

/// Parameters for [`random_kernel_scenario`].
#[derive(Debug, Clone, Copy)]
pub struct KernelScenarioParams {
    pub ring: Ring,
    /// Support radius of the wide generators (the lean constant target).
    pub lean_d: u64,
    /// Max displacement of generator images (the control constant target).
    pub control_b: u64,
    /// Duplicate-direction chain step (the insular constant target); 0
    /// means a free target.
    pub insular_d: u64,
    pub wide: usize,
    pub collisions: usize,
    /// Number of duplicated directions when `insular_d > 0`.
    pub duplicates: usize,
}

impl KernelScenarioParams {
    pub fn sized_for(space: &FiniteMetricSpace, ring: Ring, lean_d: u64, control_b: u64, insular_d: u64) -> Self {
        let n = space.points();
        KernelScenarioParams {
            ring,
            lean_d,
            control_b,
            insular_d,
            wide: (n / 8).clamp(1, 8),
            collisions: (n / 8).clamp(1, 8),
            duplicates: if insular_d > 0 { 2 } else { 0 },
        }
    }
}

/// Points `c` with `d(y, c) = step` for a chain `y — c1 — c2` with both hops
/// of length `step` and the primary in the middle of every pair.
fn chain_partner(space: &FiniteMetricSpace, y: usize, step: u64, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
    let mut left: Vec<usize> = (0..space.points())
        .filter(|&c| c != y && space.d(y, c) == step)
        .collect();
    left.shuffle(rng);
    for &c1 in &left {
        for c2 in 0..space.points() {
            if c2 != y && c2 != c1 && space.d(y, c2) == step && space.d(c1, c2) == 2 * step {
                return Some((c1, c2));
            }
        }
    }
    None
}

/// Build a seeded bicontrolled epimorphism onto a target with the requested
/// insularity, with a nontrivial local kernel.
pub fn random_kernel_scenario(
    space: Arc<FiniteMetricSpace>,
    params: KernelScenarioParams,
    seed: u64,
) -> KernelScenario {
    random_kernel_scenario_at(space, params, &[], seed)
}

/// Same, with collision generators forced at the given centers (each with a
/// nonzero image), so the kernel is guaranteed to have local elements there.
pub fn random_kernel_scenario_at(
    space: Arc<FiniteMetricSpace>,
    params: KernelScenarioParams,
    forced_collision_centers: &[usize],
    seed: u64,
) -> KernelScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.points();
    let ring = params.ring;
    let field_order = match ring {
        Ring::PrimeField(p) => p as i64,
        _ => 5,
    };

    // Target: one direction per point (primary copy at the point), plus
    // duplicate copies chained around selected primaries.
    let mut g_gens: Vec<Generator> = (0..n)
        .map(|y| Generator {
            vector: Vector::unit(ring, n, y),
            support: PointSet::singleton(n, y),
        })
        .collect();
    if params.insular_d > 0 {
        let mut candidates: Vec<usize> = (0..n).collect();
        candidates.shuffle(&mut rng);
        let mut placed = 0;
        for &y in &candidates {
            if placed == params.duplicates {
                break;
            }
            if let Some((c1, c2)) = chain_partner(&space, y, params.insular_d, &mut rng) {
                for c in [c1, c2] {
                    g_gens.push(Generator {
                        vector: Vector::unit(ring, n, y),
                        support: PointSet::singleton(n, c),
                    });
                }
                placed += 1;
            }
        }
    }
    let g = Arc::new(GeneratedFiltration::new(space.clone(), ring, n, g_gens).unwrap());

    // Source: base generators e_x at every point, wide generators on D-balls,
    // and colliding singletons. Images use directions whose primary lies
    // within the control displacement of the support.
    let mut supports: Vec<PointSet> = (0..n).map(|x| PointSet::singleton(n, x)).collect();
    let mut image_rows: Vec<Vector> = (0..n).map(|x| Vector::unit(ring, n, x)).collect();
    let nonzero_coeff = |rng: &mut ChaCha8Rng| -> i64 {
        let c = rng.gen_range(1..field_order);
        c
    };
    let add_extra =
        |support: PointSet, min_terms: usize, rng: &mut ChaCha8Rng| -> (PointSet, Vector) {
            let reach = space.enlarge(&support, params.control_b);
            let dirs: Vec<usize> = reach.indices();
            let mut image = Vector::zero(ring, n);
            let terms = rng.gen_range(min_terms..=2.max(min_terms));
            for _ in 0..terms {
                let &dir = dirs.choose(rng).expect("reach is nonempty");
                image.data[dir] = ring.from_i64(nonzero_coeff(rng));
            }
            (support, image)
        };
    for _ in 0..params.wide {
        let c = rng.gen_range(0..n);
        let support = space.ball(c, params.lean_d);
        let (s, img) = add_extra(support, 0, &mut rng);
        supports.push(s);
        image_rows.push(img);
    }
    for _ in 0..params.collisions {
        let c = rng.gen_range(0..n);
        let support = PointSet::singleton(n, c);
        let (s, img) = add_extra(support, 0, &mut rng);
        supports.push(s);
        image_rows.push(img);
    }
    for &c in forced_collision_centers {
        let support = PointSet::singleton(n, c);
        let (s, img) = add_extra(support, 1, &mut rng);
        supports.push(s);
        image_rows.push(img);
    }

    let total = supports.len();
    let f = Arc::new(GeneratedFiltration::free(space.clone(), ring, supports).unwrap());
    let matrix = Matrix::from_row_vectors(ring, n, &image_rows);
    debug_assert_eq!(matrix.rows, total);
    let map = FilteredMap::new(f.clone(), g.clone(), matrix).unwrap();

    // Exact constants by generator reduction; the inputs are upper bounds.
    let caps = crate::filtered::Caps::default();
    let lean_exact = crate::filtered::property_constant(
        f.as_ref(),
        crate::filtered::PropertyKind::Lean,
        crate::filtered::Mode::GeneratorReduced,
        &caps,
    )
    .unwrap()
    .expect_value();
    let control_exact = crate::morphism::control_constant(&map, &caps, seed)
        .unwrap()
        .expect_value();
    debug_assert!(lean_exact <= params.lean_d);
    debug_assert!(control_exact <= params.control_b);

    KernelScenario {
        space,
        ring,
        f,
        g,
        map,
        lean_d: lean_exact.max(params.lean_d.min(1)),
        split_delta: lean_exact,
        control_b: control_exact,
        bicontrol_b: control_exact.max(params.insular_d),
        insular_d: params.insular_d,
    }
}

/// Sample `count` covers (T, U) of the whole space: T random, U the
/// complement plus a random overlap back into T.
pub fn sample_covers(n: usize, count: usize, seed: u64) -> Vec<(PointSet, PointSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut t = PointSet::empty(n);
            for i in 0..n {
                if rng.gen::<bool>() {
                    t.insert(i);
                }
            }
            let mut u = PointSet::full(n).difference(&t);
            for i in t.iter() {
                if rng.gen_ratio(1, 4) {
                    u.insert(i);
                }
            }
            if u.is_empty() {
                u = PointSet::full(n);
            }
            (t, u)
        })
        .collect()
}

/// A family of interval pieces on a 1-d lattice ball at a prescribed
/// pairwise separation, each wide enough to hold a local kernel element.
/// Returns `None` when the space cannot fit `pieces` many.
pub fn interval_family(
    space: &FiniteMetricSpace,
    piece_radius: u64,
    separation: u64,
    pieces: usize,
) -> Option<Vec<PointSet>> {
    let coords = space.coords()?;
    if coords.first().map(|c| c.len()) != Some(1) {
        return None;
    }
    let min = coords.iter().map(|c| c[0]).min()?;
    let max = coords.iter().map(|c| c[0]).max()?;
    let width = 2 * piece_radius as i64;
    let stride = width + separation as i64;
    let mut out = Vec::new();
    let mut start = min;
    for _ in 0..pieces {
        if start + width > max {
            return None;
        }
        let mut set = PointSet::empty(space.points());
        for (idx, c) in coords.iter().enumerate() {
            if c[0] >= start && c[0] <= start + width {
                set.insert(idx);
            }
        }
        out.push(set);
        start += stride;
    }
    Some(out)
}

/// The deterministic counterexample for under-separated families: a path of
/// 7 points, φ(e_0) = u, φ(e_6) = −u with u supported at the midpoint. The
/// map is 3-controlled, the family {{0},{6}} only 5-disjoint where the
/// hypotheses want 6, and the cross-piece kernel element does not decompose.
pub struct CounterexampleScenario {
    pub map: FilteredMap,
    pub family: Vec<PointSet>,
    pub element: Vector,
    pub lean_d: u64,
    pub control_b: u64,
    pub insular_d: u64,
}

pub fn distribution_counterexample(ring: Ring) -> CounterexampleScenario {
    let rows = (0..7)
        .map(|i: usize| (0..7).map(|j| i.abs_diff(j) as u64).collect())
        .collect();
    let space = Arc::new(FiniteMetricSpace::new(rows, None).unwrap());
    let f = Arc::new(
        GeneratedFiltration::free(
            space.clone(),
            ring,
            vec![PointSet::singleton(7, 0), PointSet::singleton(7, 6)],
        )
        .unwrap(),
    );
    let g = Arc::new(
        GeneratedFiltration::free(space, ring, vec![PointSet::singleton(7, 3)]).unwrap(),
    );
    let matrix = Matrix::from_i64_rows(ring, &[&[1], &[-1]]);
    let map = FilteredMap::new(f, g, matrix).unwrap();
    CounterexampleScenario {
        map,
        family: vec![PointSet::singleton(7, 0), PointSet::singleton(7, 6)],
        element: Vector::from_i64(ring, &[1, 1]),
        lean_d: 0,
        control_b: 3,
        insular_d: 0,
    }
}

/// The cycle fold: F free on ℤ/m, G with one direction per residue class
/// mod m/2, duplicated at antipodal points; the rotation acts on both sides.
/// `broken` offsets one source support to break equivariance.
pub struct FoldScenario {
    pub space: Arc<FiniteMetricSpace>,
    pub f: Arc<GeneratedFiltration>,
    pub g: Arc<GeneratedFiltration>,
    pub map: FilteredMap,
    pub actions: MapActionPair,
}

pub fn cycle_fold_scenario(m: usize, ring: Ring, broken: bool) -> FoldScenario {
    assert!(m % 2 == 0, "fold needs an even cycle");
    let half = m / 2;
    let space = Arc::new(crate::metric::cycle(m as u64));
    let mut supports: Vec<PointSet> = (0..m).map(|x| PointSet::singleton(m, x)).collect();
    if broken {
        supports[m - 1] = PointSet::singleton(m, 0);
    }
    let f = Arc::new(GeneratedFiltration::free(space.clone(), ring, supports).unwrap());
    let g_gens = (0..m)
        .map(|x| Generator {
            vector: Vector::unit(ring, half, x % half),
            support: PointSet::singleton(m, x),
        })
        .collect();
    let g = Arc::new(GeneratedFiltration::new(space.clone(), ring, half, g_gens).unwrap());
    let mut matrix = Matrix::zero(ring, m, half);
    for x in 0..m {
        *matrix.at_mut(x, x % half) = ring.one();
    }
    let map = FilteredMap::new(f.clone(), g.clone(), matrix).unwrap();

    let perm: Vec<usize> = (0..m).map(|x| (x + 1) % m).collect();
    let mut mf = Matrix::zero(ring, m, m);
    for x in 0..m {
        *mf.at_mut(x, (x + 1) % m) = ring.one();
    }
    let mut mg = Matrix::zero(ring, half, half);
    for j in 0..half {
        *mg.at_mut(j, (j + 1) % half) = ring.one();
    }
    let actions = MapActionPair {
        source: IsometryAction {
            perm: perm.clone(),
            matrix: mf,
        },
        target: IsometryAction { perm, matrix: mg },
    };
    FoldScenario {
        space,
        f,
        g,
        map,
        actions,
    }
}

/// A seeded controlled idempotent over 𝔽₂: a coordinate projection
/// conjugated by `I + N` where `N` is a partial matching of points at
/// distance 1 (so `N² = 0` and the displacement stays at most 2).
pub fn random_idempotent(space: Arc<FiniteMetricSpace>, seed: u64) -> FilteredMap {
    let ring = Ring::PrimeField(2);
    let n = space.points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let supports: Vec<PointSet> = (0..n).map(|x| PointSet::singleton(n, x)).collect();
    let f = Arc::new(GeneratedFiltration::free(space.clone(), ring, supports).unwrap());

    let mut nilpotent = Matrix::zero(ring, n, n);
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let partners: Vec<usize> = (i + 1..n)
            .filter(|&j| !used[j] && space.d(i, j) == 1)
            .collect();
        if partners.is_empty() || rng.gen::<bool>() {
            continue;
        }
        let j = partners[rng.gen_range(0..partners.len())];
        *nilpotent.at_mut(i, j) = ring.one();
        used[i] = true;
        used[j] = true;
    }
    let mut t = Matrix::identity(ring, n);
    let mut t_inv = Matrix::identity(ring, n);
    for r in 0..n {
        for c in 0..n {
            if !ring.is_zero(nilpotent.at(r, c)) {
                *t.at_mut(r, c) = ring.one();
                *t_inv.at_mut(r, c) = ring.neg(&ring.one());
            }
        }
    }
    let mut diag = Matrix::zero(ring, n, n);
    for i in 0..n {
        if rng.gen::<bool>() {
            *diag.at_mut(i, i) = ring.one();
        }
    }
    let p = t_inv.mul(&diag).unwrap().mul(&t).unwrap();
    debug_assert_eq!(p.mul(&p).unwrap(), p);
    FilteredMap::new(f.clone(), f, p).unwrap()
}

/// Two filtrations of one module from different generating sets, linked by
/// the identity matrix: F₁ free on singletons, F₂ on the telescoped
/// generators e_x + e_{x+1}.
pub fn filtration_change_pair(n: usize, ring: Ring) -> FilteredMap {
    let rows = (0..n)
        .map(|i| (0..n).map(|j| i.abs_diff(j) as u64).collect())
        .collect();
    let space = Arc::new(FiniteMetricSpace::new(rows, None).unwrap());
    let f1 = Arc::new(
        GeneratedFiltration::free(
            space.clone(),
            ring,
            (0..n).map(|x| PointSet::singleton(n, x)).collect(),
        )
        .unwrap(),
    );
    let mut gens = Vec::new();
    for x in 0..n - 1 {
        let mut v = Vector::zero(ring, n);
        v.data[x] = ring.one();
        v.data[x + 1] = ring.one();
        gens.push(Generator {
            vector: v,
            support: PointSet::from_indices(n, &[x, x + 1]),
        });
    }
    gens.push(Generator {
        vector: Vector::unit(ring, n, n - 1),
        support: PointSet::singleton(n, n - 1),
    });
    let f2 = Arc::new(GeneratedFiltration::new(space, ring, n, gens).unwrap());
    FilteredMap::new(f1, f2, Matrix::identity(ring, n)).unwrap()
}

/// A seeded 1-lean module: a free filtration whose supports are singletons
/// and a few 1-balls, used by the presentation sweeps.
pub fn random_one_lean_module(
    space: Arc<FiniteMetricSpace>,
    ring: Ring,
    seed: u64,
) -> Arc<GeneratedFiltration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.points();
    let mut supports: Vec<PointSet> = (0..n).map(|x| PointSet::singleton(n, x)).collect();
    let wide = (n / 6).max(1);
    for _ in 0..wide {
        let c = rng.gen_range(0..n);
        supports.push(space.ball(c, 1));
    }
    Arc::new(GeneratedFiltration::free(space, ring, supports).unwrap())
}

// ---------------------------------------------------------------------------
// Scenario file emission
// ---------------------------------------------------------------------------

use crate::decomp::StrategyKind;
use crate::scenario::{
    ActionLiteral, CapsSpec, CheckSpec, DeclaredConstants, Expectation, FiltrationLiteral,
    GeneratorLiteral, MapLiteral, Scenario, SpaceSpec, SCHEMA_VERSION,
};
use std::collections::BTreeMap;

/// The example kinds `gen` can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleKind {
    /// Kernel pipeline on a 1-d lattice ball.
    ZballKernel,
    /// Two-round chain pipeline on a 2-d lattice ball.
    Z2ballChain,
    /// Rotation-equivariant fold on a cycle.
    CycleEquivariant,
    /// Controlled idempotent over 𝔽₂.
    Idempotent,
    /// A seeded pick among the above.
    Random,
}

impl ExampleKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "zball-kernel" => ExampleKind::ZballKernel,
            "z2ball-chain" => ExampleKind::Z2ballChain,
            "cycle-equivariant" => ExampleKind::CycleEquivariant,
            "idempotent" => ExampleKind::Idempotent,
            "random" => ExampleKind::Random,
            _ => return None,
        })
    }

    pub const ALL: &'static [&'static str] = &[
        "zball-kernel",
        "z2ball-chain",
        "cycle-equivariant",
        "idempotent",
        "random",
    ];
}

/// Tunables for example generation; unset fields take kind-specific
/// defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExampleParams {
    pub n: Option<u64>,
    pub lean_d: Option<u64>,
    pub control_b: Option<u64>,
    pub insular_d: Option<u64>,
    pub broken: bool,
}

fn filtration_literal(f: &GeneratedFiltration) -> FiltrationLiteral {
    FiltrationLiteral {
        ambient: f.ambient_rank(),
        generators: f
            .generators()
            .iter()
            .map(|g| GeneratorLiteral {
                vector: g
                    .vector
                    .data
                    .iter()
                    .map(crate::scenario::scalar_to_value)
                    .collect(),
                support: g.support.indices(),
            })
            .collect(),
    }
}

/// Produce a complete runnable scenario of the given kind. Byte-identical
/// output for identical (kind, params, seed).
pub fn generate_example(kind: ExampleKind, params: ExampleParams, seed: u64) -> Scenario {
    match kind {
        ExampleKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
            let pick = [
                ExampleKind::ZballKernel,
                ExampleKind::Z2ballChain,
                ExampleKind::CycleEquivariant,
                ExampleKind::Idempotent,
            ][rng.gen_range(0..4usize)];
            generate_example(pick, params, seed)
        }
        ExampleKind::ZballKernel | ExampleKind::Z2ballChain => {
            let two_d = kind == ExampleKind::Z2ballChain;
            let n = params.n.unwrap_or(if two_d { 8 } else { 32 });
            let lean_d = params.lean_d.unwrap_or(1);
            let control_b = params.control_b.unwrap_or(1);
            let insular_d = params.insular_d.unwrap_or(1);
            let expr = if two_d {
                format!("z2ball:{n}")
            } else {
                format!("zball:{n}")
            };
            let space = Arc::new(
                crate::metric::parse_space_expr(&expr, crate::metric::DEFAULT_POINT_CAP).unwrap(),
            );
            let ring = Ring::PrimeField(5);
            let sc_params =
                KernelScenarioParams::sized_for(&space, ring, lean_d, control_b, insular_d);
            let sc = random_kernel_scenario(space, sc_params, seed);
            let declared = DeclaredConstants {
                lean_source: Some(lean_d.max(sc.lean_d)),
                split_source: Some(lean_d.max(sc.split_delta)),
                insular_target: Some(insular_d),
                control: Some(control_b.max(sc.control_b)),
                bicontrol: Some(control_b.max(sc.control_b).max(insular_d)),
            };
            let mut filtrations = BTreeMap::new();
            filtrations.insert("F".to_string(), filtration_literal(&sc.f));
            filtrations.insert("G".to_string(), filtration_literal(&sc.g));
            let mut maps = BTreeMap::new();
            maps.insert(
                "phi".to_string(),
                MapLiteral {
                    source: "F".into(),
                    target: "G".into(),
                    matrix: crate::scenario::matrix_to_values(&sc.map.matrix),
                    declared: Some(declared),
                },
            );
            Scenario {
                version: SCHEMA_VERSION,
                name: format!(
                    "{}-D{lean_d}-b{control_b}-d{insular_d}-seed{seed}",
                    if two_d { "z2ball-chain" } else { "zball-kernel" }
                ),
                space: SpaceSpec::Expr(expr),
                ring,
                filtrations,
                maps,
                actions: BTreeMap::new(),
                chain: None,
                checks: vec![
                    CheckSpec::Metric {},
                    CheckSpec::Constants {
                        filtration: "F".into(),
                        expect_lean: None,
                        expect_split: None,
                        expect_insular: None,
                    },
                    CheckSpec::Control {
                        map: "phi".into(),
                        expect: None,
                    },
                    CheckSpec::Bicontrol {
                        map: "phi".into(),
                        expect: None,
                    },
                    CheckSpec::KernelSplitBound {
                        map: "phi".into(),
                        expect_exact: None,
                    },
                    CheckSpec::SplitElement {
                        map: "phi".into(),
                        covers: 10,
                    },
                    CheckSpec::ChainCertify {
                        map: "phi".into(),
                        strategy: if two_d {
                            StrategyKind::Product
                        } else {
                            StrategyKind::Interval
                        },
                        max_rounds: 8,
                    },
                ],
                caps: CapsSpec {
                    seed,
                    ..CapsSpec::default()
                },
            }
        }
        ExampleKind::CycleEquivariant => {
            let m = params.n.unwrap_or(6) as usize;
            let ring = Ring::PrimeField(5);
            let fold = cycle_fold_scenario(m, ring, params.broken);
            let mut filtrations = BTreeMap::new();
            filtrations.insert("F".to_string(), filtration_literal(&fold.f));
            filtrations.insert("G".to_string(), filtration_literal(&fold.g));
            let mut maps = BTreeMap::new();
            maps.insert(
                "phi".to_string(),
                MapLiteral {
                    source: "F".into(),
                    target: "G".into(),
                    matrix: crate::scenario::matrix_to_values(&fold.map.matrix),
                    declared: None,
                },
            );
            let mut actions = BTreeMap::new();
            actions.insert(
                "rot_f".to_string(),
                ActionLiteral {
                    module: "F".into(),
                    perm: fold.actions.source.perm.clone(),
                    matrix: crate::scenario::matrix_to_values(&fold.actions.source.matrix),
                },
            );
            actions.insert(
                "rot_g".to_string(),
                ActionLiteral {
                    module: "G".into(),
                    perm: fold.actions.target.perm.clone(),
                    matrix: crate::scenario::matrix_to_values(&fold.actions.target.matrix),
                },
            );
            let mut checks = vec![CheckSpec::Equivariance {
                filtration: "F".into(),
                action: "rot_f".into(),
                expect: if params.broken {
                    Expectation::Violation
                } else {
                    Expectation::Pass
                },
            }];
            if !params.broken {
                checks.push(CheckSpec::Equivariance {
                    filtration: "G".into(),
                    action: "rot_g".into(),
                    expect: Expectation::Pass,
                });
                checks.push(CheckSpec::Facts {
                    map: "phi".into(),
                    source_action: Some("rot_f".into()),
                    target_action: Some("rot_g".into()),
                });
            }
            Scenario {
                version: SCHEMA_VERSION,
                name: format!(
                    "cycle-equivariant-{m}{}",
                    if params.broken { "-broken" } else { "" }
                ),
                space: SpaceSpec::Expr(format!("cycle:{m}")),
                ring,
                filtrations,
                maps,
                actions,
                chain: None,
                checks,
                caps: CapsSpec {
                    seed,
                    ..CapsSpec::default()
                },
            }
        }
        ExampleKind::Idempotent => {
            let n = params.n.unwrap_or(6);
            let space = Arc::new(crate::metric::zball(n));
            let map = random_idempotent(space.clone(), seed);
            let generated = map
                .source
                .as_generated()
                .expect("idempotent source is generated");
            let mut filtrations = BTreeMap::new();
            filtrations.insert("F".to_string(), filtration_literal(generated));
            let mut maps = BTreeMap::new();
            maps.insert(
                "p".to_string(),
                MapLiteral {
                    source: "F".into(),
                    target: "F".into(),
                    matrix: crate::scenario::matrix_to_values(&map.matrix),
                    declared: None,
                },
            );
            Scenario {
                version: SCHEMA_VERSION,
                name: format!("idempotent-zball{n}-seed{seed}"),
                space: SpaceSpec::Expr(format!("zball:{n}")),
                ring: Ring::PrimeField(2),
                filtrations,
                maps,
                actions: BTreeMap::new(),
                chain: None,
                checks: vec![
                    CheckSpec::Control {
                        map: "p".into(),
                        expect: None,
                    },
                    CheckSpec::Bicontrol {
                        map: "p".into(),
                        expect: None,
                    },
                    CheckSpec::Facts {
                        map: "p".into(),
                        source_action: None,
                        target_action: None,
                    },
                ],
                caps: CapsSpec {
                    seed,
                    ..CapsSpec::default()
                },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::{Caps, Mode, PropertyKind};
    use crate::metric::{zball, z2ball};

    #[test]
    fn kernel_scenario_constants_hold() {
        let space = Arc::new(zball(8));
        let params = KernelScenarioParams::sized_for(&space, Ring::PrimeField(5), 1, 1, 0);
        let sc = random_kernel_scenario(space, params, 7);
        assert!(sc.map.is_epi().unwrap());
        assert!(sc.control_b <= 1);
        assert!(sc.split_delta <= 1);
        let kernel = sc.map.kernel();
        assert!(kernel.rank() > 0);
        // Declared constants survive a sampled audit.
        let caps = Caps::default();
        let audit = crate::filtered::verify_constant_holds(
            sc.g.as_ref(),
            PropertyKind::Insular,
            sc.insular_d,
            Mode::Sampled { seed: 1, trials: 200 },
            &caps,
        )
        .unwrap();
        assert!(audit.is_ok());
    }

    #[test]
    fn kernel_scenario_with_duplicates_is_insular_at_step() {
        let space = Arc::new(zball(8));
        let params = KernelScenarioParams::sized_for(&space, Ring::PrimeField(5), 1, 1, 1);
        let sc = random_kernel_scenario(space, params, 3);
        assert_eq!(sc.insular_d, 1);
        let caps = Caps::default();
        let audit = crate::filtered::verify_constant_holds(
            sc.g.as_ref(),
            PropertyKind::Insular,
            1,
            Mode::Sampled { seed: 2, trials: 300 },
            &caps,
        )
        .unwrap();
        assert!(audit.is_ok());
        let reverse = crate::morphism::reverse_control_constant(&sc.map, &caps, 2).unwrap();
        assert!(reverse.expect_value() <= sc.bicontrol_b);
    }

    #[test]
    fn deterministic_per_seed() {
        let space = Arc::new(zball(6));
        let params = KernelScenarioParams::sized_for(&space, Ring::PrimeField(5), 1, 2, 0);
        let a = random_kernel_scenario(space.clone(), params, 42);
        let b = random_kernel_scenario(space, params, 42);
        assert_eq!(a.map.matrix, b.map.matrix);
        assert_eq!(a.control_b, b.control_b);
    }

    #[test]
    fn interval_family_separation() {
        let space = zball(16);
        let fam = interval_family(&space, 1, 7, 3).unwrap();
        assert_eq!(fam.len(), 3);
        assert_eq!(space.family_separation(&fam), Some(7));
        assert!(space.is_r_disjoint(&fam, 6));
        assert!(!space.is_r_disjoint(&fam, 7));
    }

    #[test]
    fn counterexample_breaks_at_understated_disjointness() {
        let sc = distribution_counterexample(Ring::PrimeField(5));
        let kernel = sc.map.kernel();
        assert!(kernel.contains(&sc.element));
        let err = crate::morphism::decompose_over_disjoint_family(
            &sc.map,
            &kernel,
            &sc.element,
            &sc.family,
            sc.lean_d,
            sc.control_b,
            sc.insular_d,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            crate::morphism::MorphismError::HypothesisViolation { step: "kernel-part", .. }
        ));
    }

    #[test]
    fn fold_scenario_is_equivariant_epi() {
        let sc = cycle_fold_scenario(6, Ring::PrimeField(5), false);
        assert!(sc.map.is_epi().unwrap());
        assert!(sc.actions.commutes_with(&sc.map));
        let broken = cycle_fold_scenario(6, Ring::PrimeField(5), true);
        let res = crate::filtered::check_equivariance(
            broken.f.as_ref(),
            &broken.actions.source,
            &Caps::default(),
            1,
        )
        .unwrap();
        assert!(res.is_err());
    }

    #[test]
    fn idempotents_are_idempotent_and_local() {
        let space = Arc::new(zball(6));
        for seed in 0..10 {
            let map = random_idempotent(space.clone(), seed);
            let p = &map.matrix;
            assert_eq!(p.mul(p).unwrap(), *p);
            let c = crate::morphism::control_constant(&map, &Caps::default(), seed)
                .unwrap()
                .expect_value();
            assert!(c <= 2, "control {c} too large");
        }
    }

    #[test]
    fn generated_examples_run_clean() {
        for kind in [ExampleKind::CycleEquivariant, ExampleKind::Idempotent] {
            let sc = generate_example(kind, ExampleParams::default(), 7);
            let built = crate::scenario::build(sc).unwrap();
            let (report, _) = crate::scenario::run(&built).unwrap();
            assert!(!report.failed(), "{:?}: {}", kind, report.to_json());
        }
    }

    #[test]
    fn generated_examples_are_byte_identical_per_seed() {
        let a = generate_example(ExampleKind::Random, ExampleParams::default(), 7).to_json();
        let b = generate_example(ExampleKind::Random, ExampleParams::default(), 7).to_json();
        assert_eq!(a, b);
        let c = generate_example(ExampleKind::Random, ExampleParams::default(), 8).to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn z2_scenario_builds() {
        let space = Arc::new(z2ball(4));
        let params = KernelScenarioParams::sized_for(&space, Ring::PrimeField(5), 1, 1, 1);
        let sc = random_kernel_scenario(space, params, 11);
        assert!(sc.map.is_epi().unwrap());
        assert!(sc.map.kernel().rank() > 0);
    }
}
