//! Filtered modules over a finite metric space: monotone assignments
//! `S ↦ F(S)` of submodules, with computations of the lean, split, and
//! insular constants, local-finiteness witnesses, and equivariance checks
//! under finite isometry actions.

use crate::exec;
use crate::linalg::{LinalgError, Matrix, Submodule, Vector};
use crate::metric::FiniteMetricSpace;
use crate::pointset::PointSet;
use crate::ring::Ring;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum FilteredError {
    #[error("point set belongs to a different space")]
    SpaceMismatch,
    #[error("generator {index} has an empty support")]
    EmptySupport { index: usize },
    #[error("generator {index} has vector length {got}, expected {expected}")]
    GeneratorRank {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("generator-reduced mode requires a generated filtration")]
    NotGenerated,
    #[error("invalid isometry action: {0}")]
    BadAction(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A monotone submodule-valued assignment on subsets of one space, with
/// injective structure maps (automatic for submodule values) and `F(∅) = 0`.
pub trait Filtration: Send + Sync {
    fn space(&self) -> &Arc<FiniteMetricSpace>;
    fn ring(&self) -> Ring;
    fn ambient_rank(&self) -> usize;
    fn eval(&self, s: &PointSet) -> Submodule;

    fn total(&self) -> Submodule {
        self.eval(&self.space().full_set())
    }

    fn as_generated(&self) -> Option<&GeneratedFiltration> {
        None
    }
}

pub type DynFiltration = Arc<dyn Filtration>;

/// One generator of a [`GeneratedFiltration`]: a vector together with the
/// nonempty set of points it is supported on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub vector: Vector,
    pub support: PointSet,
}

/// The canonical input representation: `F(S)` is spanned by the generators
/// whose support lies inside `S`. Nonempty supports make `F(∅) = 0`
/// structural.
#[derive(Debug, Clone)]
pub struct GeneratedFiltration {
    space: Arc<FiniteMetricSpace>,
    ring: Ring,
    ambient: usize,
    gens: Vec<Generator>,
    /// Generators are exactly the standard basis, in order. Enables the
    /// coordinate-subspace fast paths.
    free: bool,
}

impl GeneratedFiltration {
    pub fn new(
        space: Arc<FiniteMetricSpace>,
        ring: Ring,
        ambient: usize,
        gens: Vec<Generator>,
    ) -> Result<Self, FilteredError> {
        for (index, g) in gens.iter().enumerate() {
            if g.support.is_empty() {
                return Err(FilteredError::EmptySupport { index });
            }
            if g.support.ambient_size() != space.points() {
                return Err(FilteredError::SpaceMismatch);
            }
            if g.vector.len() != ambient {
                return Err(FilteredError::GeneratorRank {
                    index,
                    got: g.vector.len(),
                    expected: ambient,
                });
            }
        }
        let free = gens.len() == ambient
            && gens
                .iter()
                .enumerate()
                .all(|(i, g)| g.vector == Vector::unit(ring, ambient, i));
        Ok(GeneratedFiltration {
            space,
            ring,
            ambient,
            gens,
            free,
        })
    }

    /// A free module with one standard basis generator per listed support.
    pub fn free(
        space: Arc<FiniteMetricSpace>,
        ring: Ring,
        supports: Vec<PointSet>,
    ) -> Result<Self, FilteredError> {
        let ambient = supports.len();
        let gens = supports
            .into_iter()
            .enumerate()
            .map(|(i, support)| Generator {
                vector: Vector::unit(ring, ambient, i),
                support,
            })
            .collect();
        Self::new(space, ring, ambient, gens)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn is_free(&self) -> bool {
        self.free
    }

    /// Indices of generators supported inside `s`.
    pub fn generators_inside(&self, s: &PointSet) -> Vec<usize> {
        self.gens
            .iter()
            .enumerate()
            .filter(|(_, g)| g.support.is_subset_of(s))
            .map(|(i, _)| i)
            .collect()
    }
}

impl Filtration for GeneratedFiltration {
    fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    fn ring(&self) -> Ring {
        self.ring
    }

    fn ambient_rank(&self) -> usize {
        self.ambient
    }

    fn eval(&self, s: &PointSet) -> Submodule {
        let selected = self.generators_inside(s);
        if self.free {
            // Unit rows in index order are already the canonical basis.
            let rows: Vec<Vector> = selected
                .iter()
                .map(|&i| Vector::unit(self.ring, self.ambient, i))
                .collect();
            return Submodule::span(self.ring, self.ambient, &rows).expect("unit rows");
        }
        let rows: Vec<Vector> = selected
            .iter()
            .map(|&i| self.gens[i].vector.clone())
            .collect();
        Submodule::span(self.ring, self.ambient, &rows).expect("validated generators")
    }

    fn as_generated(&self) -> Option<&GeneratedFiltration> {
        Some(self)
    }
}

/// A submodule of a parent filtration, carrying the standard filtration
/// `K(S) = K ∩ F(S)`.
#[derive(Clone)]
pub struct SubFiltration {
    pub parent: DynFiltration,
    pub sub: Submodule,
}

impl SubFiltration {
    pub fn new(parent: DynFiltration, sub: Submodule) -> Self {
        debug_assert_eq!(sub.ambient(), parent.ambient_rank());
        SubFiltration { parent, sub }
    }
}

impl Filtration for SubFiltration {
    fn space(&self) -> &Arc<FiniteMetricSpace> {
        self.parent.space()
    }

    fn ring(&self) -> Ring {
        self.parent.ring()
    }

    fn ambient_rank(&self) -> usize {
        self.parent.ambient_rank()
    }

    fn eval(&self, s: &PointSet) -> Submodule {
        if let Some(g) = self.parent.as_generated() {
            if g.is_free() {
                let mut keep = vec![false; g.ambient_rank()];
                for i in g.generators_inside(s) {
                    keep[i] = true;
                }
                return self.sub.intersect_coordinates(|j| keep[j]);
            }
        }
        self.sub
            .intersect(&self.parent.eval(s))
            .expect("matching ambients")
    }
}

/// A finite isometry acting on the space together with an invertible module
/// map; the finite surrogate for a group acting by left translations.
#[derive(Debug, Clone)]
pub struct IsometryAction {
    pub perm: Vec<usize>,
    pub matrix: Matrix,
}

impl IsometryAction {
    pub fn validate(
        &self,
        space: &FiniteMetricSpace,
        ring: Ring,
        ambient: usize,
    ) -> Result<(), FilteredError> {
        if !space.is_isometry(&self.perm) {
            return Err(FilteredError::BadAction(
                "point permutation is not an isometry".into(),
            ));
        }
        if self.matrix.ring != ring {
            return Err(FilteredError::BadAction("module map ring mismatch".into()));
        }
        if self.matrix.rows != ambient || self.matrix.cols != ambient {
            return Err(FilteredError::BadAction(format!(
                "module map must be {ambient}×{ambient}"
            )));
        }
        let full = Submodule::from_matrix_rows(&self.matrix);
        if full.rank() != ambient {
            return Err(FilteredError::BadAction(
                "module map is not invertible".into(),
            ));
        }
        Ok(())
    }

    pub fn apply_set(&self, s: &PointSet) -> PointSet {
        let mut out = PointSet::empty(s.ambient_size());
        for p in s.iter() {
            out.insert(self.perm[p]);
        }
        out
    }

    pub fn apply_submodule(&self, m: &Submodule) -> Submodule {
        m.transformed(&self.matrix).expect("square module map")
    }

    /// Order of the point permutation (the surrogate group is the cyclic
    /// group it generates).
    pub fn order(&self) -> usize {
        let n = self.perm.len();
        let mut current: Vec<usize> = (0..n).collect();
        for k in 1.. {
            current = current.iter().map(|&i| self.perm[i]).collect();
            if current.iter().enumerate().all(|(i, &v)| i == v) {
                return k;
            }
        }
        unreachable!()
    }

    /// The module map of the j-th power.
    pub fn matrix_power(&self, j: usize) -> Matrix {
        let mut acc = Matrix::identity(self.matrix.ring, self.matrix.rows);
        for _ in 0..j {
            acc = acc.mul(&self.matrix).expect("square");
        }
        acc
    }

    pub fn perm_power(&self, j: usize) -> Vec<usize> {
        let mut cur: Vec<usize> = (0..self.perm.len()).collect();
        for _ in 0..j {
            cur = cur.iter().map(|&i| self.perm[i]).collect();
        }
        cur
    }
}

/// The three filtration constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Lean,
    Split,
    Insular,
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyKind::Lean => write!(f, "lean"),
            PropertyKind::Split => write!(f, "split"),
            PropertyKind::Insular => write!(f, "insular"),
        }
    }
}

/// How a property search traverses the subset space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Mode {
    /// All subsets (or all subset pairs).
    Exhaustive,
    /// Per-generator check; equivalent to exhaustive on generated
    /// filtrations, by monotonicity of both sides.
    GeneratorReduced,
    /// Seeded random subsets; sound for violations, a lower bound as a
    /// constant estimate.
    Sampled { seed: u64, trials: u32 },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exhaustive => write!(f, "exhaustive"),
            Mode::GeneratorReduced => write!(f, "generator-reduced"),
            Mode::Sampled { seed, trials } => write!(f, "sampled(seed={seed},trials={trials})"),
        }
    }
}

/// Exhaustive-search thresholds and sampling volume.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Caps {
    /// Max points for exhaustive single-subset sweeps (2^n evals).
    pub subset_points: usize,
    /// Max points for exhaustive subset-pair sweeps (4^n evals).
    pub pair_points: usize,
    /// Trials for sampled sweeps.
    pub trials: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            subset_points: 14,
            pair_points: 10,
            trials: 256,
        }
    }
}

impl Caps {
    /// The mode a property search will actually run in on this filtration.
    pub fn mode_for(&self, f: &dyn Filtration, kind: PropertyKind, seed: u64) -> Mode {
        let n = f.space().points();
        match kind {
            PropertyKind::Lean => {
                if f.as_generated().is_some() {
                    Mode::GeneratorReduced
                } else if n <= self.subset_points {
                    Mode::Exhaustive
                } else {
                    Mode::Sampled {
                        seed,
                        trials: self.trials,
                    }
                }
            }
            PropertyKind::Split | PropertyKind::Insular => {
                if n <= self.pair_points {
                    Mode::Exhaustive
                } else {
                    Mode::Sampled {
                        seed,
                        trials: self.trials,
                    }
                }
            }
        }
    }
}

/// A subset (or pair) violating a candidate constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyWitness {
    pub first: PointSet,
    pub second: Option<PointSet>,
}

impl fmt::Display for PropertyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.second {
            Some(s) => write!(f, "({}, {})", self.first, s),
            None => write!(f, "{}", self.first),
        }
    }
}

/// Outcome of a property-constant search.
#[derive(Debug, Clone)]
pub struct ConstantResult {
    /// Minimal working constant from the achievable-distance set; `None`
    /// means no candidate worked (reported with a witness).
    pub value: Option<u64>,
    /// Witness that the next smaller candidate fails (tightness), or the
    /// witness of unboundedness when `value` is `None`.
    pub witness: Option<PropertyWitness>,
    pub mode: Mode,
}

impl ConstantResult {
    pub fn expect_value(&self) -> u64 {
        self.value.expect("finite constant")
    }
}

/// Minimal constant in the achievable-distance set satisfying the defining
/// containment of `kind` for all tested subsets, by monotone binary search.
pub fn property_constant(
    f: &dyn Filtration,
    kind: PropertyKind,
    mode: Mode,
    caps: &Caps,
) -> Result<ConstantResult, FilteredError> {
    if matches!(mode, Mode::GeneratorReduced) && f.as_generated().is_none() {
        return Err(FilteredError::NotGenerated);
    }
    let space = f.space().clone();
    let candidates = space.achievable_distances();

    enum SubjectSet {
        Masks(usize),
        PairMasks(usize),
        Listed(Vec<PointSet>),
        ListedPairs(Vec<(PointSet, PointSet)>),
        Generators,
    }
    let n = space.points();
    let subjects = match (kind, &mode) {
        (PropertyKind::Lean, Mode::GeneratorReduced) => SubjectSet::Generators,
        (PropertyKind::Lean, Mode::Exhaustive) => {
            assert!(
                n <= caps.subset_points,
                "exhaustive subset sweep beyond the {}-point cap",
                caps.subset_points
            );
            SubjectSet::Masks(n)
        }
        (PropertyKind::Lean, Mode::Sampled { seed, trials }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            SubjectSet::Listed((0..*trials).map(|_| random_subset(n, &mut rng)).collect())
        }
        (_, Mode::GeneratorReduced) => return Err(FilteredError::NotGenerated),
        (_, Mode::Exhaustive) => {
            assert!(
                n <= caps.pair_points,
                "exhaustive pair sweep beyond the {}-point cap",
                caps.pair_points
            );
            SubjectSet::PairMasks(n)
        }
        (_, Mode::Sampled { seed, trials }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            SubjectSet::ListedPairs(
                (0..*trials)
                    .map(|_| (random_subset(n, &mut rng), random_subset(n, &mut rng)))
                    .collect(),
            )
        }
    };

    let test = |c: u64| -> Option<PropertyWitness> {
        let ctx = CandidateCtx::build(f, kind, c);
        match &subjects {
            SubjectSet::Generators => lean_generator_reduced_violation(f, &ctx),
            SubjectSet::Masks(n) => {
                let n = *n;
                exec::find_first(1usize << n, |mask| {
                    let u = PointSet::from_mask(n, mask as u64);
                    lean_violation(f, &ctx, &u)
                })
            }
            SubjectSet::Listed(sets) => {
                exec::find_first(sets.len(), |i| lean_violation(f, &ctx, &sets[i]))
            }
            SubjectSet::PairMasks(n) => {
                let n = *n;
                exec::find_first(1usize << (2 * n), |k| {
                    let u1 = PointSet::from_mask(n, (k >> n) as u64);
                    let u2 = PointSet::from_mask(n, (k & ((1 << n) - 1)) as u64);
                    pair_violation(f, &ctx, kind, &u1, &u2)
                })
            }
            SubjectSet::ListedPairs(pairs) => exec::find_first(pairs.len(), |i| {
                pair_violation(f, &ctx, kind, &pairs[i].0, &pairs[i].1)
            }),
        }
    };

    // The containments are monotone in c, so binary search applies; the last
    // failing candidate visited is the answer's predecessor, kept as the
    // tightness witness.
    let mut last_witness = None;
    if let Some(w) = test(*candidates.last().expect("distances include 0")) {
        return Ok(ConstantResult {
            value: None,
            witness: Some(w),
            mode,
        });
    }
    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match test(candidates[mid]) {
            None => hi = mid,
            Some(w) => {
                last_witness = Some(w);
                lo = mid + 1;
            }
        }
    }
    Ok(ConstantResult {
        value: Some(candidates[lo]),
        witness: last_witness,
        mode,
    })
}

fn random_subset(n: usize, rng: &mut ChaCha8Rng) -> PointSet {
    let mut s = PointSet::empty(n);
    for i in 0..n {
        if rng.gen::<bool>() {
            s.insert(i);
        }
    }
    s
}

/// Per-candidate precomputation shared across every tested subset: the
/// reach table at scale c, per-generator cover sets, and (for non-generated
/// lean sweeps) the local evaluations.
struct CandidateCtx {
    reach: crate::metric::ReachTable,
    /// For generated filtrations: per generator h, the points x with
    /// supp(h) ⊆ x[c].
    covers: Option<Vec<PointSet>>,
    /// For non-generated lean sweeps: F(x[c]) per point.
    locals: Option<Vec<Submodule>>,
}

impl CandidateCtx {
    fn build(f: &dyn Filtration, kind: PropertyKind, c: u64) -> Self {
        let space = f.space();
        let n = space.points();
        let reach = space.reach_table(c);
        let covers = f.as_generated().map(|g| {
            g.generators()
                .iter()
                .map(|h| {
                    let mut cov = PointSet::empty(n);
                    for x in 0..n {
                        if h.support.is_subset_of(reach.ball(x)) {
                            cov.insert(x);
                        }
                    }
                    cov
                })
                .collect()
        });
        let locals = (kind == PropertyKind::Lean && f.as_generated().is_none()).then(|| {
            (0..n).map(|x| f.eval(reach.ball(x))).collect()
        });
        CandidateCtx {
            reach,
            covers,
            locals,
        }
    }
}

/// Violation of `F(U) ⊆ Σ_{x∈U} F(x[c])` at one subset.
fn lean_violation(f: &dyn Filtration, ctx: &CandidateCtx, u: &PointSet) -> Option<PropertyWitness> {
    if u.is_empty() {
        return None;
    }
    let witness = || PropertyWitness {
        first: u.clone(),
        second: None,
    };
    if let Some(g) = f.as_generated() {
        // The local sum is spanned by the generators fitting inside some
        // ball around a point of U.
        let covers = ctx.covers.as_ref().expect("generated ctx");
        let gens = g.generators();
        let mut missing = Vec::new();
        for (i, h) in gens.iter().enumerate() {
            if h.support.is_subset_of(u) && !covers[i].intersects(u) {
                missing.push(i);
            }
        }
        if missing.is_empty() {
            return None;
        }
        let sum_rows: Vec<Vector> = gens
            .iter()
            .enumerate()
            .filter(|(i, _)| covers[*i].intersects(u))
            .map(|(_, h)| h.vector.clone())
            .collect();
        let sum = Submodule::span(g.ring(), g.ambient_rank(), &sum_rows).expect("validated");
        for i in missing {
            if !sum.contains(&gens[i].vector).expect("rank") {
                return Some(witness());
            }
        }
        return None;
    }
    let lhs = f.eval(u);
    if lhs.is_zero() {
        return None;
    }
    let locals = ctx.locals.as_ref().expect("lean ctx");
    let refs: Vec<&Submodule> = u.iter().map(|x| &locals[x]).collect();
    let sum = Submodule::sum_of(f.ring(), f.ambient_rank(), &refs);
    if sum.includes(&lhs).expect("rank") {
        None
    } else {
        Some(witness())
    }
}

/// Per-generator lean check: `g ∈ Σ_{x ∈ supp(g)} F(x[c])`.
fn lean_generator_reduced_violation(
    f: &dyn Filtration,
    ctx: &CandidateCtx,
) -> Option<PropertyWitness> {
    let g = f.as_generated().expect("checked by caller");
    let covers = ctx.covers.as_ref().expect("generated ctx");
    for (i, gen) in g.generators().iter().enumerate() {
        if covers[i].intersects(&gen.support) {
            continue;
        }
        let mut rows = Vec::new();
        for (j, h) in g.generators().iter().enumerate() {
            if covers[j].intersects(&gen.support) {
                rows.push(h.vector.clone());
            }
        }
        let sum = Submodule::span(g.ring(), g.ambient_rank(), &rows).expect("validated");
        if !sum.contains(&gen.vector).expect("rank") {
            return Some(PropertyWitness {
                first: gen.support.clone(),
                second: None,
            });
        }
    }
    None
}

/// Violation of the split or insular containment at one subset pair.
fn pair_violation(
    f: &dyn Filtration,
    ctx: &CandidateCtx,
    kind: PropertyKind,
    u1: &PointSet,
    u2: &PointSet,
) -> Option<PropertyWitness> {
    let witness = || PropertyWitness {
        first: u1.clone(),
        second: Some(u2.clone()),
    };
    match kind {
        PropertyKind::Split => {
            // F(U1 ∪ U2) ⊆ F(U1[c]) + F(U2[c])
            let union = u1.union(u2);
            if let Some(g) = f.as_generated() {
                let e1 = ctx.reach.enlarge(u1);
                let e2 = ctx.reach.enlarge(u2);
                let gens = g.generators();
                let in_sum = |h: &Generator| {
                    h.support.is_subset_of(&e1) || h.support.is_subset_of(&e2)
                };
                let mut missing = Vec::new();
                for h in gens {
                    if h.support.is_subset_of(&union) && !in_sum(h) {
                        missing.push(h);
                    }
                }
                if missing.is_empty() {
                    return None;
                }
                let rows: Vec<Vector> = gens
                    .iter()
                    .filter(|h| in_sum(h))
                    .map(|h| h.vector.clone())
                    .collect();
                let sum = Submodule::span(g.ring(), g.ambient_rank(), &rows).expect("validated");
                for h in missing {
                    if !sum.contains(&h.vector).expect("rank") {
                        return Some(witness());
                    }
                }
                return None;
            }
            let lhs = f.eval(&union);
            if lhs.is_zero() {
                return None;
            }
            let rhs = f
                .eval(&ctx.reach.enlarge(u1))
                .sum(&f.eval(&ctx.reach.enlarge(u2)))
                .expect("rank");
            if rhs.includes(&lhs).expect("rank") {
                None
            } else {
                Some(witness())
            }
        }
        PropertyKind::Insular => {
            // F(U1) ∩ F(U2) ⊆ F(U1[c] ∩ U2[c])
            let lhs = f.eval(u1).intersect(&f.eval(u2)).expect("rank");
            if lhs.is_zero() {
                return None;
            }
            let both = ctx.reach.enlarge(u1).intersection(&ctx.reach.enlarge(u2));
            let rhs = f.eval(&both);
            if rhs.includes(&lhs).expect("rank") {
                None
            } else {
                Some(witness())
            }
        }
        PropertyKind::Lean => unreachable!("lean uses single subsets"),
    }
}

/// All three constants with auto-selected modes.
#[derive(Debug, Clone)]
pub struct ConstantsReport {
    pub lean: ConstantResult,
    pub split: ConstantResult,
    pub insular: ConstantResult,
}

pub fn constants_report(
    f: &dyn Filtration,
    caps: &Caps,
    seed: u64,
) -> Result<ConstantsReport, FilteredError> {
    let run = |kind| {
        let mode = caps.mode_for(f, kind, seed);
        property_constant(f, kind, mode, caps)
    };
    Ok(ConstantsReport {
        lean: run(PropertyKind::Lean)?,
        split: run(PropertyKind::Split)?,
        insular: run(PropertyKind::Insular)?,
    })
}

/// Check that a declared constant holds in the given mode: `Ok(())` when no
/// tested subset violates it. Declared constants that fail are hard errors
/// for scenario runs.
pub fn verify_constant_holds(
    f: &dyn Filtration,
    kind: PropertyKind,
    c: u64,
    mode: Mode,
    caps: &Caps,
) -> Result<Result<(), PropertyWitness>, FilteredError> {
    let res = property_constant(f, kind, mode, caps)?;
    match res.value {
        Some(v) if v <= c => Ok(Ok(())),
        _ => Ok(Err(res.witness.unwrap_or(PropertyWitness {
            first: f.space().full_set(),
            second: None,
        }))),
    }
}

/// Equivariance check `moduleMap·F(S) = F(perm S)`; exhaustive over subsets
/// when the space is small, sampled otherwise. Checking the generating
/// isometry suffices: powers follow by composition.
pub fn check_equivariance(
    f: &dyn Filtration,
    action: &IsometryAction,
    caps: &Caps,
    seed: u64,
) -> Result<Result<(), PointSet>, FilteredError> {
    action.validate(f.space(), f.ring(), f.ambient_rank())?;
    let n = f.space().points();
    let violation = |s: &PointSet| -> Option<PointSet> {
        let lhs = action.apply_submodule(&f.eval(s));
        let rhs = f.eval(&action.apply_set(s));
        (lhs != rhs).then(|| s.clone())
    };
    let found = if n <= caps.subset_points {
        exec::find_first(1usize << n, |mask| {
            violation(&PointSet::from_mask(n, mask as u64))
        })
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sets: Vec<PointSet> = (0..caps.trials)
            .map(|_| random_subset(n, &mut rng))
            .collect();
        exec::find_first(sets.len(), |i| violation(&sets[i]))
    };
    Ok(match found {
        Some(s) => Err(s),
        None => Ok(()),
    })
}

/// Local-finiteness witness: the rank of `F(ball(x, r))` per point. Finite
/// scale makes the property automatic; the ranks are the report.
pub fn local_ranks(f: &dyn Filtration, r: u64) -> Vec<usize> {
    let space = f.space();
    (0..space.points())
        .map(|x| f.eval(&space.ball(x, r)).rank())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{cycle, zball, zball_point};

    fn path3() -> Arc<FiniteMetricSpace> {
        Arc::new(
            FiniteMetricSpace::new(vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]], None)
                .unwrap(),
        )
    }

    fn singleton_free(space: Arc<FiniteMetricSpace>, ring: Ring) -> GeneratedFiltration {
        let supports = (0..space.points())
            .map(|x| PointSet::singleton(space.points(), x))
            .collect();
        GeneratedFiltration::free(space, ring, supports).unwrap()
    }

    #[test]
    fn eval_with_singleton_supports() {
        let space = path3();
        let f = singleton_free(space.clone(), Ring::PrimeField(2));
        let s = PointSet::from_indices(3, &[0, 2]);
        let m = f.eval(&s);
        assert_eq!(m.rank(), 2);
        assert!(m
            .contains(&Vector::from_i64(Ring::PrimeField(2), &[1, 0, 1]))
            .unwrap());
        assert!(f.eval(&PointSet::empty(3)).is_zero());
        assert_eq!(f.total().rank(), 3);
    }

    #[test]
    fn eval_respects_support_containment() {
        let s = zball(4);
        let space = Arc::new(s.clone());
        let m4 = zball_point(&s, -4).unwrap();
        let p4 = zball_point(&s, 4).unwrap();
        let gens = vec![Generator {
            vector: Vector::unit(Ring::Rationals, 1, 0),
            support: PointSet::from_indices(9, &[m4, p4]),
        }];
        let f = GeneratedFiltration::new(space, Ring::Rationals, 1, gens).unwrap();
        assert_eq!(f.eval(&PointSet::from_indices(9, &[m4, p4])).rank(), 1);
        assert!(f.eval(&PointSet::singleton(9, m4)).is_zero());
    }

    #[test]
    fn standard_subfiltration_on_path() {
        // K = span(e_0 + e_2) inside the free module on supports {0},{2}.
        let space = path3();
        let ring = Ring::PrimeField(2);
        let parent = Arc::new(
            GeneratedFiltration::free(
                space.clone(),
                ring,
                vec![PointSet::singleton(3, 0), PointSet::singleton(3, 2)],
            )
            .unwrap(),
        );
        let k = Submodule::span(ring, 2, &[Vector::from_i64(ring, &[1, 1])]).unwrap();
        let sub = SubFiltration::new(parent, k.clone());
        assert!(sub.eval(&PointSet::singleton(3, 0)).is_zero());
        assert_eq!(sub.eval(&PointSet::from_indices(3, &[0, 2])), k);

        // Cross-check every subset against a direct F_2 enumeration of K.
        for mask in 0u64..8 {
            let s = PointSet::from_mask(3, mask);
            let via_filtration = sub.eval(&s);
            let parent_eval = sub.parent.eval(&s);
            let mut members = Vec::new();
            let v = Vector::from_i64(ring, &[1, 1]);
            if parent_eval.contains(&v).unwrap() {
                members.push(v);
            }
            let direct = Submodule::span(ring, 2, &members).unwrap();
            assert_eq!(via_filtration, direct, "mask {mask}");
        }
    }

    #[test]
    fn all_singleton_constants_are_zero() {
        let space = path3();
        let f = singleton_free(space, Ring::PrimeField(3));
        let caps = Caps::default();
        for kind in [PropertyKind::Lean, PropertyKind::Split, PropertyKind::Insular] {
            let r = property_constant(&f, kind, Mode::Exhaustive, &caps).unwrap();
            assert_eq!(r.value, Some(0), "{kind}");
        }
        let r = property_constant(&f, PropertyKind::Lean, Mode::GeneratorReduced, &caps).unwrap();
        assert_eq!(r.value, Some(0));
    }

    #[test]
    fn insular_constant_on_path_interior_generator() {
        // G generated by u with support {1}: any intersection forces 1 into
        // both sides, so G is 0-insular; exhaustive over all 64 subset pairs.
        let space = path3();
        let g =
            GeneratedFiltration::free(space, Ring::Rationals, vec![PointSet::singleton(3, 1)])
                .unwrap();
        let r = property_constant(&g, PropertyKind::Insular, Mode::Exhaustive, &Caps::default())
            .unwrap();
        assert_eq!(r.value, Some(0));
    }

    #[test]
    fn wide_generator_forces_lean_two() {
        // A third basis direction supported on {0,2} needs balls of radius 2
        // to be reached from its own support points.
        let space = path3();
        let ring = Ring::Rationals;
        let gens = vec![
            Generator {
                vector: Vector::unit(ring, 3, 0),
                support: PointSet::singleton(3, 0),
            },
            Generator {
                vector: Vector::unit(ring, 3, 1),
                support: PointSet::singleton(3, 2),
            },
            Generator {
                vector: Vector::unit(ring, 3, 2),
                support: PointSet::from_indices(3, &[0, 2]),
            },
        ];
        let f = GeneratedFiltration::new(space, ring, 3, gens).unwrap();
        let caps = Caps::default();
        let lean = property_constant(&f, PropertyKind::Lean, Mode::Exhaustive, &caps).unwrap();
        let split = property_constant(&f, PropertyKind::Split, Mode::Exhaustive, &caps).unwrap();
        let lean_gr =
            property_constant(&f, PropertyKind::Lean, Mode::GeneratorReduced, &caps).unwrap();
        assert_eq!(lean.value, lean_gr.value);
        assert_eq!(lean.value, Some(2));
        assert!(split.expect_value() <= lean.expect_value());
    }

    #[test]
    fn monotone_consistency_spot_check() {
        let space = path3();
        let ring = Ring::PrimeField(5);
        let f = GeneratedFiltration::new(
            space,
            ring,
            2,
            vec![
                Generator {
                    vector: Vector::unit(ring, 2, 0),
                    support: PointSet::from_indices(3, &[0, 2]),
                },
                Generator {
                    vector: Vector::unit(ring, 2, 1),
                    support: PointSet::singleton(3, 1),
                },
            ],
        )
        .unwrap();
        // If the lean containment holds at c it holds at every c' ≥ c.
        let mut last: Option<bool> = None;
        for c in [0u64, 1, 2] {
            let ctx = CandidateCtx::build(&f, PropertyKind::Lean, c);
            let holds = (0u64..8)
                .all(|mask| lean_violation(&f, &ctx, &PointSet::from_mask(3, mask)).is_none());
            if let Some(prev) = last {
                assert!(!prev || holds, "monotonicity broken at {c}");
            }
            last = Some(holds);
        }
    }

    #[test]
    fn eval_monotone_in_subset() {
        let space = path3();
        let f = singleton_free(space.clone(), Ring::Integers);
        for m1 in 0u64..8 {
            for m2 in 0u64..8 {
                let s = PointSet::from_mask(3, m1 & m2);
                let t = PointSet::from_mask(3, m1);
                assert!(f.eval(&t).includes(&f.eval(&s)).unwrap());
            }
        }
    }

    #[test]
    fn equivariance_of_rotation_module() {
        let space = Arc::new(cycle(6));
        let ring = Ring::PrimeField(5);
        let f = singleton_free(space.clone(), ring);
        // rotation x ↦ x+1 with the matching permutation module map
        let perm: Vec<usize> = (0..6).map(|x| (x + 1) % 6).collect();
        let mut mat = Matrix::zero(ring, 6, 6);
        for x in 0..6 {
            *mat.at_mut(x, (x + 1) % 6) = ring.one();
        }
        let action = IsometryAction { perm, matrix: mat };
        assert_eq!(action.order(), 6);
        let res = check_equivariance(&f, &action, &Caps::default(), 1).unwrap();
        assert!(res.is_ok());

        let id = IsometryAction {
            perm: (0..6).collect(),
            matrix: Matrix::identity(ring, 6),
        };
        assert!(check_equivariance(&f, &id, &Caps::default(), 1)
            .unwrap()
            .is_ok());
    }

    #[test]
    fn equivariance_violation_reports_witness() {
        let space = Arc::new(cycle(6));
        let ring = Ring::PrimeField(5);
        // One generator's support deliberately offset: e_5 supported at {0}.
        let mut supports: Vec<PointSet> = (0..6).map(|x| PointSet::singleton(6, x)).collect();
        supports[5] = PointSet::singleton(6, 0);
        let f = GeneratedFiltration::free(space, ring, supports).unwrap();
        let perm: Vec<usize> = (0..6).map(|x| (x + 1) % 6).collect();
        let mut mat = Matrix::zero(ring, 6, 6);
        for x in 0..6 {
            *mat.at_mut(x, (x + 1) % 6) = ring.one();
        }
        let action = IsometryAction { perm, matrix: mat };
        let res = check_equivariance(&f, &action, &Caps::default(), 1).unwrap();
        res.expect_err("offset support breaks equivariance");
    }

    #[test]
    fn local_rank_witnesses() {
        let space = path3();
        let f = singleton_free(space, Ring::Rationals);
        assert_eq!(local_ranks(&f, 0), vec![1, 1, 1]);
        assert_eq!(local_ranks(&f, 1), vec![2, 3, 2]);
    }
}
