//! Colored R-decompositions, decomposition chains, asymptotic-property-C and
//! asymptotic-dimension witnesses, the built-in decomposition strategies, and
//! the two-player decomposition game engine.

use crate::metric::{DisjointnessViolation, FiniteMetricSpace};
use crate::pointset::PointSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    One,
    Two,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::One => Color::Two,
            Color::Two => Color::One,
        }
    }
}

/// A two-colored covering of a target set by pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredDecomposition {
    pub target: PointSet,
    pub pieces: Vec<(PointSet, Color)>,
}

impl ColoredDecomposition {
    pub fn color_class(&self, color: Color) -> Vec<PointSet> {
        self.pieces
            .iter()
            .filter(|(_, c)| *c == color)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// Union of the pieces of one color.
    pub fn color_union(&self, color: Color, n: usize) -> PointSet {
        let mut u = PointSet::empty(n);
        for (p, c) in &self.pieces {
            if *c == color {
                u = u.union(p);
            }
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecompError {
    #[error("decomposition has no pieces")]
    NoPieces,
    #[error("piece {0} is empty")]
    EmptyPiece(usize),
    #[error("piece {0} is not contained in the target")]
    PieceOutsideTarget(usize),
    #[error("target point {0} is not covered by any piece")]
    NotCovering(usize),
    #[error("color {color} is not {radius}-disjoint: {violation}")]
    ColorNotDisjoint {
        color: Color,
        radius: u64,
        violation: DisjointnessViolation,
    },
    #[error("radii are not non-decreasing at step {0}")]
    RadiiDecrease(usize),
    #[error("chain has {families} families but {steps} step lists")]
    MalformedChain { families: usize, steps: usize },
    #[error("chain must start from the whole space")]
    BadRoot,
    #[error("step {step}: decomposition {member} does not target its family member")]
    TargetMismatch { step: usize, member: usize },
    #[error("step {step}, member {member}: {source}")]
    StepInvalid {
        step: usize,
        member: usize,
        source: Box<DecompError>,
    },
    #[error("step {step}: emitted piece not registered in the next family")]
    PieceNotInFamily { step: usize },
    #[error("final family has mesh {mesh}, exceeding the bound {bound}")]
    MeshExceeded { mesh: u64, bound: u64 },
    #[error("strategy `{strategy}` cannot run on this space: {reason}")]
    StrategyMismatch {
        strategy: &'static str,
        reason: String,
    },
    #[error("family {family} is not {radius}-disjoint: {violation}")]
    ApcFamilyNotDisjoint {
        family: usize,
        radius: u64,
        violation: DisjointnessViolation,
    },
    #[error("families do not cover point {0}")]
    ApcNotCovering(usize),
    #[error("family member diameter {diameter} exceeds the uniform bound {bound}")]
    DiameterExceeded { diameter: u64, bound: u64 },
    #[error("cover multiplicity {got} at point {point} exceeds the claimed bound {bound}")]
    MultiplicityExceeded {
        point: usize,
        got: usize,
        bound: usize,
    },
}

/// Check that `dec` is a valid R-decomposition of its target: pieces cover
/// the target, stay inside it, and each color class is R-disjoint.
pub fn validate_decomposition(
    space: &FiniteMetricSpace,
    dec: &ColoredDecomposition,
    radius: u64,
) -> Result<(), DecompError> {
    if dec.pieces.is_empty() {
        return Err(DecompError::NoPieces);
    }
    let mut union = PointSet::empty(space.points());
    for (i, (p, _)) in dec.pieces.iter().enumerate() {
        if p.is_empty() {
            return Err(DecompError::EmptyPiece(i));
        }
        if !p.is_subset_of(&dec.target) {
            return Err(DecompError::PieceOutsideTarget(i));
        }
        union = union.union(p);
    }
    if let Some(missing) = dec.target.iter().find(|&x| !union.contains(x)) {
        return Err(DecompError::NotCovering(missing));
    }
    for color in [Color::One, Color::Two] {
        let class = dec.color_class(color);
        if let Err(violation) = space.check_r_disjoint(&class, radius) {
            return Err(DecompError::ColorNotDisjoint {
                color,
                radius,
                violation,
            });
        }
    }
    Ok(())
}

/// A decomposition-chain witness: families `V_0 = {X}, V_1, …, V_n` with a
/// per-step colored decomposition of every member of `V_{k-1}` at radius
/// `radii[k-1]`, whose pieces all belong to `V_k`, ending in a family of mesh
/// at most `mesh_bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionChain {
    pub radii: Vec<u64>,
    /// `families[0] = {X}`, …, `families[n]` = final family.
    pub families: Vec<Vec<PointSet>>,
    /// `steps[k][i]` decomposes `families[k][i]` at `radii[k]`.
    pub steps: Vec<Vec<ColoredDecomposition>>,
    pub mesh_bound: u64,
}

impl DecompositionChain {
    pub fn rounds(&self) -> usize {
        self.radii.len()
    }

    pub fn final_family(&self) -> &[PointSet] {
        self.families.last().expect("chain has a root family")
    }

    /// Actual mesh of the final family.
    pub fn final_mesh(&self, space: &FiniteMetricSpace) -> u64 {
        space.mesh(self.final_family()).expect("nonempty family")
    }
}

pub fn validate_chain(
    space: &FiniteMetricSpace,
    chain: &DecompositionChain,
) -> Result<(), DecompError> {
    let n = chain.radii.len();
    if chain.families.len() != n + 1 || chain.steps.len() != n {
        return Err(DecompError::MalformedChain {
            families: chain.families.len(),
            steps: chain.steps.len(),
        });
    }
    if chain.families[0].len() != 1 || chain.families[0][0] != space.full_set() {
        return Err(DecompError::BadRoot);
    }
    for k in 1..n {
        if chain.radii[k] < chain.radii[k - 1] {
            return Err(DecompError::RadiiDecrease(k));
        }
    }
    for k in 0..n {
        if chain.steps[k].len() != chain.families[k].len() {
            return Err(DecompError::MalformedChain {
                families: chain.families[k].len(),
                steps: chain.steps[k].len(),
            });
        }
        let next: BTreeSet<&PointSet> = chain.families[k + 1].iter().collect();
        for (i, dec) in chain.steps[k].iter().enumerate() {
            if dec.target != chain.families[k][i] {
                return Err(DecompError::TargetMismatch { step: k, member: i });
            }
            validate_decomposition(space, dec, chain.radii[k]).map_err(|e| {
                DecompError::StepInvalid {
                    step: k,
                    member: i,
                    source: Box::new(e),
                }
            })?;
            for (p, _) in &dec.pieces {
                if !next.contains(p) {
                    return Err(DecompError::PieceNotInFamily { step: k });
                }
            }
        }
    }
    let mesh = chain.final_mesh(space);
    if mesh > chain.mesh_bound {
        return Err(DecompError::MeshExceeded {
            mesh,
            bound: chain.mesh_bound,
        });
    }
    Ok(())
}

/// An asymptotic-property-C witness: for radii `R_1 ≤ … ≤ R_n`, families
/// `W_i` that are `R_i`-disjoint, uniformly bounded by `diameter_bound`, and
/// jointly covering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApcWitness {
    pub radii: Vec<u64>,
    pub families: Vec<Vec<PointSet>>,
    pub diameter_bound: u64,
}

pub fn validate_apc(space: &FiniteMetricSpace, w: &ApcWitness) -> Result<(), DecompError> {
    assert_eq!(w.radii.len(), w.families.len());
    for k in 1..w.radii.len() {
        if w.radii[k] < w.radii[k - 1] {
            return Err(DecompError::RadiiDecrease(k));
        }
    }
    let mut covered = PointSet::empty(space.points());
    for (i, fam) in w.families.iter().enumerate() {
        if let Err(violation) = space.check_r_disjoint(fam, w.radii[i]) {
            return Err(DecompError::ApcFamilyNotDisjoint {
                family: i,
                radius: w.radii[i],
                violation,
            });
        }
        for s in fam {
            let d = space.diameter_of(s).map_err(|_| DecompError::EmptyPiece(i))?;
            if d > w.diameter_bound {
                return Err(DecompError::DiameterExceeded {
                    diameter: d,
                    bound: w.diameter_bound,
                });
            }
            covered = covered.union(s);
        }
    }
    if let Some(x) = (0..space.points()).find(|&x| !covered.contains(x)) {
        return Err(DecompError::ApcNotCovering(x));
    }
    Ok(())
}

/// Flatten a chain into APC form: one family per (level, color), holding all
/// pieces of that color across every parent, paired with the level radius.
/// Valid chains need not flatten to valid witnesses — same-color pieces under
/// different parents may be close — which is exactly what the APC checker
/// detects.
pub fn flatten_chain_to_apc(chain: &DecompositionChain, diameter_bound: u64) -> ApcWitness {
    let mut radii = Vec::new();
    let mut families = Vec::new();
    for (k, step) in chain.steps.iter().enumerate() {
        for color in [Color::One, Color::Two] {
            let mut fam: BTreeSet<PointSet> = BTreeSet::new();
            for dec in step {
                for (p, c) in &dec.pieces {
                    if *c == color {
                        fam.insert(p.clone());
                    }
                }
            }
            if !fam.is_empty() {
                radii.push(chain.radii[k]);
                families.push(fam.into_iter().collect());
            }
        }
    }
    ApcWitness {
        radii,
        families,
        diameter_bound,
    }
}

/// Max over points `x` of the number of cover elements meeting `ball(x, d)`.
pub fn asdim_multiplicity(space: &FiniteMetricSpace, cover: &[PointSet], d: u64) -> usize {
    (0..space.points())
        .map(|x| {
            let b = space.ball(x, d);
            cover.iter().filter(|s| !s.is_disjoint_from(&b)).count()
        })
        .max()
        .unwrap_or(0)
}

/// An asymptotic-dimension witness at one scale: a uniformly bounded cover
/// whose d-balls meet at most `multiplicity_bound` elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsdimWitness {
    pub cover: Vec<PointSet>,
    pub d: u64,
    pub multiplicity_bound: usize,
    pub diameter_bound: u64,
}

pub fn validate_asdim(space: &FiniteMetricSpace, w: &AsdimWitness) -> Result<(), DecompError> {
    let mut covered = PointSet::empty(space.points());
    for (i, s) in w.cover.iter().enumerate() {
        let diam = space.diameter_of(s).map_err(|_| DecompError::EmptyPiece(i))?;
        if diam > w.diameter_bound {
            return Err(DecompError::DiameterExceeded {
                diameter: diam,
                bound: w.diameter_bound,
            });
        }
        covered = covered.union(s);
    }
    if let Some(x) = (0..space.points()).find(|&x| !covered.contains(x)) {
        return Err(DecompError::ApcNotCovering(x));
    }
    for x in 0..space.points() {
        let b = space.ball(x, w.d);
        let got = w.cover.iter().filter(|s| !s.is_disjoint_from(&b)).count();
        if got > w.multiplicity_bound {
            return Err(DecompError::MultiplicityExceeded {
                point: x,
                got,
                bound: w.multiplicity_bound,
            });
        }
    }
    Ok(())
}

/// Player 2's decomposition strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// Consecutive integer blocks of cardinality R+1, colors alternating,
    /// anchored at the least coordinate of the decomposed member. Needs a
    /// 1-dimensional lattice ball.
    Interval,
    /// Round 1 slices along the first coordinate into slabs of width R+1,
    /// later rounds interval-decompose along the second coordinate. Needs a
    /// 2-dimensional lattice ball.
    Product,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Interval => "interval",
            StrategyKind::Product => "product",
        }
    }

    /// Rounds after which this strategy's pieces are bounded by construction.
    pub fn rounds_to_bounded(&self) -> usize {
        match self {
            StrategyKind::Interval => 1,
            StrategyKind::Product => 2,
        }
    }

    pub fn decompose(
        &self,
        space: &FiniteMetricSpace,
        member: &PointSet,
        round: usize,
        radius: u64,
    ) -> Result<ColoredDecomposition, DecompError> {
        let coords = space.coords().ok_or_else(|| DecompError::StrategyMismatch {
            strategy: self.name(),
            reason: "space has no lattice coordinates".into(),
        })?;
        let dim = coords.first().map_or(0, |c| c.len());
        let axis = match self {
            StrategyKind::Interval => {
                if dim != 1 {
                    return Err(DecompError::StrategyMismatch {
                        strategy: self.name(),
                        reason: format!("needs a 1-dimensional lattice ball, got dim {dim}"),
                    });
                }
                0
            }
            StrategyKind::Product => {
                if dim != 2 {
                    return Err(DecompError::StrategyMismatch {
                        strategy: self.name(),
                        reason: format!("needs a 2-dimensional lattice ball, got dim {dim}"),
                    });
                }
                if round == 0 {
                    0
                } else {
                    1
                }
            }
        };
        Ok(blocks_along_axis(space, member, axis, radius))
    }
}

/// Partition a member into coordinate blocks of cardinality `radius + 1`
/// along one axis, colors alternating, anchored at the member's least
/// coordinate on that axis.
fn blocks_along_axis(
    space: &FiniteMetricSpace,
    member: &PointSet,
    axis: usize,
    radius: u64,
) -> ColoredDecomposition {
    let coords = space.coords().expect("checked by caller");
    let width = radius as i64 + 1;
    let least = member
        .iter()
        .map(|p| coords[p][axis])
        .min()
        .expect("member is nonempty");
    let mut buckets: std::collections::BTreeMap<i64, PointSet> = std::collections::BTreeMap::new();
    for p in member.iter() {
        let block = (coords[p][axis] - least).div_euclid(width);
        buckets
            .entry(block)
            .or_insert_with(|| PointSet::empty(space.points()))
            .insert(p);
    }
    let pieces = buckets
        .into_iter()
        .map(|(block, set)| {
            let color = if block % 2 == 0 { Color::One } else { Color::Two };
            (set, color)
        })
        .collect();
    ColoredDecomposition {
        target: member.clone(),
        pieces,
    }
}

/// A lost game: the family was still unbounded when the radius sequence ran
/// out.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("family after round {round} has mesh {mesh} > cap {cap}")]
pub struct GameFailure {
    pub round: usize,
    pub mesh: u64,
    pub cap: u64,
}

/// Run player 2's strategy against the announced radii. Returns a validated
/// chain as soon as the family's mesh drops to `mesh_cap` (default: largest
/// radius + 1), or the failure naming the first unserved round.
pub fn play_game(
    space: &FiniteMetricSpace,
    radii: &[u64],
    strategy: StrategyKind,
    mesh_cap: Option<u64>,
) -> Result<Result<DecompositionChain, GameFailure>, DecompError> {
    for k in 1..radii.len() {
        if radii[k] < radii[k - 1] {
            return Err(DecompError::RadiiDecrease(k));
        }
    }
    let cap = mesh_cap.unwrap_or_else(|| radii.iter().max().copied().unwrap_or(0) + 1);
    let mut families = vec![vec![space.full_set()]];
    let mut steps: Vec<Vec<ColoredDecomposition>> = Vec::new();
    let mut used_radii = Vec::new();

    let bounded = |fam: &[PointSet]| space.mesh(fam).expect("nonempty family") <= cap;

    if bounded(&families[0]) {
        let chain = DecompositionChain {
            radii: vec![],
            families,
            steps: vec![],
            mesh_bound: cap,
        };
        validate_chain(space, &chain).expect("trivial chain is valid");
        return Ok(Ok(chain));
    }

    for (round, &r) in radii.iter().enumerate() {
        let current = families.last().expect("nonempty").clone();
        let mut step = Vec::with_capacity(current.len());
        let mut emitted: BTreeSet<PointSet> = BTreeSet::new();
        for member in &current {
            let dec = strategy.decompose(space, member, round, r)?;
            for (p, _) in &dec.pieces {
                emitted.insert(p.clone());
            }
            step.push(dec);
        }
        steps.push(step);
        used_radii.push(r);
        families.push(emitted.into_iter().collect());
        if bounded(families.last().expect("nonempty")) {
            let chain = DecompositionChain {
                radii: used_radii,
                families,
                steps,
                mesh_bound: cap,
            };
            validate_chain(space, &chain)?;
            return Ok(Ok(chain));
        }
    }
    let mesh = space
        .mesh(families.last().expect("nonempty"))
        .expect("nonempty family");
    Ok(Err(GameFailure {
        round: radii.len(),
        mesh,
        cap,
    }))
}

/// Radius schedule `R_k = 2(k+1)·D + 2b + 2d` driving the kernel-lean
/// certification; `k` is 1-based.
pub fn kernel_lean_radius(k: usize, lean_d: u64, control_b: u64, insular_d: u64) -> u64 {
    2 * (k as u64 + 1) * lean_d + 2 * control_b + 2 * insular_d
}

/// A chain derived for the kernel-lean pipeline, with the schedule parameters
/// and the achieved mesh.
#[derive(Debug, Clone)]
pub struct DerivedChain {
    pub chain: DecompositionChain,
    pub lean_d: u64,
    pub control_b: u64,
    pub insular_d: u64,
    /// Actual mesh of the final family (the `M` of the kernel-lean bound).
    pub mesh: u64,
}

/// Play the strategy against the kernel-lean schedule for exactly the rounds
/// the strategy needs (or fail within `max_rounds`), recording the mesh.
pub fn derive_chain(
    space: &FiniteMetricSpace,
    strategy: StrategyKind,
    lean_d: u64,
    control_b: u64,
    insular_d: u64,
    max_rounds: usize,
) -> Result<DerivedChain, DecompError> {
    let rounds = strategy.rounds_to_bounded().min(max_rounds);
    let radii: Vec<u64> = (1..=rounds)
        .map(|k| kernel_lean_radius(k, lean_d, control_b, insular_d))
        .collect();

    let mut families = vec![vec![space.full_set()]];
    let mut steps = Vec::new();
    for (round, &r) in radii.iter().enumerate() {
        let current = families.last().expect("nonempty").clone();
        let mut step = Vec::with_capacity(current.len());
        let mut emitted: BTreeSet<PointSet> = BTreeSet::new();
        for member in &current {
            let dec = strategy.decompose(space, member, round, r)?;
            for (p, _) in &dec.pieces {
                emitted.insert(p.clone());
            }
            step.push(dec);
        }
        steps.push(step);
        families.push(emitted.into_iter().collect());
    }
    let mesh = space
        .mesh(families.last().expect("nonempty"))
        .expect("nonempty family");
    let chain = DecompositionChain {
        radii,
        families,
        steps,
        mesh_bound: mesh,
    };
    validate_chain(space, &chain)?;
    Ok(DerivedChain {
        chain,
        lean_d,
        control_b,
        insular_d,
        mesh,
    })
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::One => write!(f, "1"),
            Color::Two => write!(f, "2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{z2ball, zball, zball_point};

    fn points_of(space: &FiniteMetricSpace, xs: &[i64]) -> PointSet {
        PointSet::from_indices(
            space.points(),
            &xs.iter()
                .map(|&x| zball_point(space, x).unwrap())
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn singleton_target_validates() {
        let s = zball(4);
        let t = PointSet::singleton(s.points(), 0);
        let dec = ColoredDecomposition {
            target: t.clone(),
            pieces: vec![(t, Color::One)],
        };
        assert!(validate_decomposition(&s, &dec, 100).is_ok());
    }

    #[test]
    fn two_halves_validate_at_one() {
        let s = zball(4);
        let left = points_of(&s, &[-4, -3, -2, -1, 0]);
        let right = points_of(&s, &[1, 2, 3, 4]);
        let dec = ColoredDecomposition {
            target: s.full_set(),
            pieces: vec![(left, Color::One), (right, Color::Two)],
        };
        assert!(validate_decomposition(&s, &dec, 1).is_ok());
    }

    #[test]
    fn interval_strategy_whole_ball() {
        let s = zball(4);
        let dec = StrategyKind::Interval
            .decompose(&s, &s.full_set(), 0, 8)
            .unwrap();
        assert_eq!(dec.pieces.len(), 1);
        assert_eq!(dec.pieces[0].0, s.full_set());
        assert_eq!(dec.pieces[0].1, Color::One);
    }

    #[test]
    fn interval_strategy_block_arithmetic() {
        // Blocks of cardinality R+1 = 6; same-color blocks sit at distance
        // R+2 = 7, so each color class stays disjoint at R and R+1 and first
        // fails at R+2.
        let s = zball(16);
        let dec = StrategyKind::Interval
            .decompose(&s, &s.full_set(), 0, 5)
            .unwrap();
        for (p, _) in &dec.pieces[..dec.pieces.len() - 1] {
            assert_eq!(p.len(), 6);
        }
        assert!(validate_decomposition(&s, &dec, 5).is_ok());
        assert!(validate_decomposition(&s, &dec, 6).is_ok());
        let err = validate_decomposition(&s, &dec, 7).unwrap_err();
        assert!(matches!(err, DecompError::ColorNotDisjoint { .. }));
        for color in [Color::One, Color::Two] {
            assert_eq!(s.family_separation(&dec.color_class(color)), Some(7));
        }
    }

    #[test]
    fn trivial_chain_on_bounded_space() {
        let s = zball(2);
        let chain = DecompositionChain {
            radii: vec![],
            families: vec![vec![s.full_set()]],
            steps: vec![],
            mesh_bound: 4,
        };
        assert!(validate_chain(&s, &chain).is_ok());
        let tight = DecompositionChain {
            mesh_bound: 3,
            ..chain
        };
        assert!(matches!(
            validate_chain(&s, &tight),
            Err(DecompError::MeshExceeded { mesh: 4, bound: 3 })
        ));
    }

    #[test]
    fn interval_game_wins_in_one_round() {
        let s = zball(32);
        let outcome = play_game(&s, &[6], StrategyKind::Interval, None).unwrap();
        let chain = outcome.expect("interval strategy wins");
        assert_eq!(chain.rounds(), 1);
        assert_eq!(chain.final_mesh(&s), 6);
        assert!(validate_chain(&s, &chain).is_ok());
    }

    #[test]
    fn product_game_on_z2() {
        let s = z2ball(8);
        // Two rounds with an explicit cap covering the box diameter.
        let outcome = play_game(&s, &[4, 4], StrategyKind::Product, Some(9)).unwrap();
        let chain = outcome.expect("product strategy wins in two rounds");
        assert_eq!(chain.rounds(), 2);
        assert!(chain.final_mesh(&s) <= 8);

        // A length-1 sequence leaves unbounded slabs.
        let outcome = play_game(&s, &[4], StrategyKind::Product, None).unwrap();
        let failure = outcome.expect_err("slabs are not bounded after round 1");
        assert_eq!(failure.round, 1);
        assert!(failure.mesh > failure.cap);
    }

    #[test]
    fn schedule_values() {
        assert_eq!(
            (1..=3)
                .map(|k| kernel_lean_radius(k, 1, 1, 0))
                .collect::<Vec<_>>(),
            vec![6, 8, 10]
        );
        assert_eq!(kernel_lean_radius(1, 0, 0, 0), 0);
        // Strictly increasing for D > 0, constant for D = 0.
        assert!(kernel_lean_radius(2, 2, 1, 1) > kernel_lean_radius(1, 2, 1, 1));
        assert_eq!(
            kernel_lean_radius(2, 0, 3, 1),
            kernel_lean_radius(1, 0, 3, 1)
        );
    }

    #[test]
    fn derive_chain_interval() {
        let s = zball(32);
        let d = derive_chain(&s, StrategyKind::Interval, 1, 1, 1, 8).unwrap();
        assert_eq!(d.chain.radii, vec![8]);
        assert_eq!(d.mesh, 8);
        assert!(validate_chain(&s, &d.chain).is_ok());
    }

    #[test]
    fn derive_chain_degenerate_schedule() {
        let s = zball(6);
        let d = derive_chain(&s, StrategyKind::Interval, 0, 0, 0, 8).unwrap();
        assert_eq!(d.chain.radii, vec![0]);
        assert_eq!(d.mesh, 0); // singleton blocks
        for p in d.chain.final_family() {
            assert_eq!(p.len(), 1);
        }
    }

    #[test]
    fn derive_chain_product() {
        let s = z2ball(8);
        let d = derive_chain(&s, StrategyKind::Product, 1, 1, 1, 8).unwrap();
        assert_eq!(d.chain.radii, vec![8, 10]);
        assert_eq!(d.chain.rounds(), 2);
        assert!(d.mesh <= 18);
    }

    #[test]
    fn strategy_space_mismatch() {
        let s = z2ball(4);
        let err = StrategyKind::Interval
            .decompose(&s, &s.full_set(), 0, 3)
            .unwrap_err();
        assert!(matches!(err, DecompError::StrategyMismatch { .. }));
        let c = crate::metric::cycle(6);
        let err = StrategyKind::Interval
            .decompose(&c, &c.full_set(), 0, 3)
            .unwrap_err();
        assert!(matches!(err, DecompError::StrategyMismatch { .. }));
    }

    #[test]
    fn apc_witness_of_singletons() {
        let s = zball(3);
        let fam: Vec<PointSet> = (0..s.points())
            .map(|i| PointSet::singleton(s.points(), i))
            .collect();
        let w = ApcWitness {
            radii: vec![0],
            families: vec![fam],
            diameter_bound: 0,
        };
        assert!(validate_apc(&s, &w).is_ok());
    }

    #[test]
    fn flattened_chain_can_fail_apc() {
        // Decompose each half of zball(8) separately at radius 2. Blocks of
        // the same color anchored in different parents meet near the halfway
        // seam, so the flattened family is not 2-disjoint.
        let s = zball(8);
        let left = points_of(&s, &[-8, -7, -6, -5, -4, -3, -2, -1, 0]);
        let right = points_of(&s, &[1, 2, 3, 4, 5, 6, 7, 8]);
        let root_dec = ColoredDecomposition {
            target: s.full_set(),
            pieces: vec![(left.clone(), Color::One), (right.clone(), Color::Two)],
        };
        let dec_l = StrategyKind::Interval.decompose(&s, &left, 0, 2).unwrap();
        let dec_r = StrategyKind::Interval.decompose(&s, &right, 0, 2).unwrap();
        let mut fam2: BTreeSet<PointSet> = BTreeSet::new();
        for d in [&dec_l, &dec_r] {
            for (p, _) in &d.pieces {
                fam2.insert(p.clone());
            }
        }
        let chain = DecompositionChain {
            radii: vec![1, 2],
            families: vec![
                vec![s.full_set()],
                vec![left, right],
                fam2.into_iter().collect(),
            ],
            steps: vec![vec![root_dec], vec![dec_l, dec_r]],
            mesh_bound: 2,
        };
        validate_chain(&s, &chain).expect("per-parent chain is valid");
        let apc = flatten_chain_to_apc(&chain, 16);
        let err = validate_apc(&s, &apc).unwrap_err();
        assert!(matches!(err, DecompError::ApcFamilyNotDisjoint { .. }));
    }

    #[test]
    fn asdim_multiplicity_of_interval_partition() {
        // Length-5 blocks partitioning zball(12); balls of radius 2 have
        // cardinality ≤ 5 so they meet at most (and exactly) two blocks.
        let s = zball(12);
        let dec = StrategyKind::Interval
            .decompose(&s, &s.full_set(), 0, 4)
            .unwrap();
        let cover: Vec<PointSet> = dec.pieces.iter().map(|(p, _)| p.clone()).collect();
        assert_eq!(asdim_multiplicity(&s, &cover, 2), 2);
        let w = AsdimWitness {
            cover,
            d: 2,
            multiplicity_bound: 2,
            diameter_bound: 4,
        };
        assert!(validate_asdim(&s, &w).is_ok());
    }
}
