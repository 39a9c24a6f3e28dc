//! Constructive presentations and resolutions: a free cover built from the
//! local pieces of a lean module, the induced presentation, and iterated
//! resolutions with per-stage constant tracking.

use crate::filtered::{
    constants_report, Caps, ConstantsReport, DynFiltration, FilteredError, Filtration,
    GeneratedFiltration, PropertyKind, PropertyWitness,
};
use crate::linalg::{LinalgError, Matrix, Vector};
use crate::morphism::{control_report, ControlReport, FilteredMap, KernelModule, MorphismError};
use crate::pointset::PointSet;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum ResolutionError {
    #[error("module is not {d}-lean: witness {witness}")]
    NotLean { d: u64, witness: String },
    #[error("module has no finite {0} constant")]
    MissingConstant(PropertyKind),
    #[error("cover map failed to be an epimorphism; the lean constant was unsound")]
    CoverNotEpi,
    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        source: Box<ResolutionError>,
    },
    #[error(transparent)]
    Filtered(#[from] FilteredError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A free cover of a lean module: per-point free summands on the canonical
/// generators of `F(x[D])`, with the covering map onto `F`.
pub struct CoverModule {
    /// The free module `F₀ = ⊕_x F_x` with singleton supports.
    pub module: Arc<GeneratedFiltration>,
    /// The covering map `φ₀ : F₀ → F`, sending the `F_x` basis to the
    /// canonical generators of `F(x[D])`.
    pub map: FilteredMap,
    /// Rank of `F(x[D])` per point.
    pub local_ranks: Vec<usize>,
    pub lean_d: u64,
}

/// Build the free cover of a D-lean module. Leanness is verified first (in
/// the mode the caps select); the epimorphism property is asserted after
/// construction, which catches a lean constant that sampling understated.
pub fn build_cover_epi(
    f: DynFiltration,
    d: u64,
    caps: &Caps,
    seed: u64,
) -> Result<CoverModule, ResolutionError> {
    let mode = caps.mode_for(f.as_ref(), PropertyKind::Lean, seed);
    let check = crate::filtered::verify_constant_holds(f.as_ref(), PropertyKind::Lean, d, mode, caps)?;
    if let Err(w) = check {
        return Err(ResolutionError::NotLean {
            d,
            witness: w.to_string(),
        });
    }
    let space = f.space().clone();
    let ring = f.ring();
    let n = space.points();
    let mut supports = Vec::new();
    let mut rows: Vec<Vector> = Vec::new();
    let mut local_ranks = Vec::with_capacity(n);
    for x in 0..n {
        let local = f.eval(&space.ball(x, d));
        local_ranks.push(local.rank());
        for g in local.gens() {
            supports.push(PointSet::singleton(n, x));
            rows.push(g);
        }
    }
    let module = Arc::new(GeneratedFiltration::free(space, ring, supports)?);
    let matrix = Matrix::from_row_vectors(ring, f.ambient_rank(), &rows);
    let map = FilteredMap::new(module.clone(), f, matrix)?;
    if !map.is_epi()? {
        return Err(ResolutionError::CoverNotEpi);
    }
    Ok(CoverModule {
        module,
        map,
        local_ranks,
        lean_d: d,
    })
}

/// An admissible presentation `F₁ → F₀ → F`: two free covers with the
/// composed map and all computed control data.
pub struct PresentationReport {
    pub constants: ConstantsReport,
    pub cover: CoverModule,
    pub cover_control: ControlReport,
    pub kernel: KernelModule,
    pub kernel_constants: ConstantsReport,
    pub second_cover: CoverModule,
    /// `ψ₁ = (inclusion ∘ φ₁) : F₁ → F₀` with its control data.
    pub relation_map: FilteredMap,
    pub relation_control: ControlReport,
}

/// Presentation of a lean and insular module by free covers: cover `F`, take
/// the kernel of the covering map, and cover that kernel at its own lean
/// constant.
pub fn build_admissible_presentation(
    f: DynFiltration,
    caps: &Caps,
    seed: u64,
) -> Result<PresentationReport, ResolutionError> {
    let constants = constants_report(f.as_ref(), caps, seed)?;
    let d = constants
        .lean
        .value
        .ok_or(ResolutionError::MissingConstant(PropertyKind::Lean))?;
    constants
        .insular
        .value
        .ok_or(ResolutionError::MissingConstant(PropertyKind::Insular))?;
    let cover = build_cover_epi(f, d, caps, seed)?;
    let cover_control = control_report(&cover.map, caps, seed)?;
    let kernel = cover.map.kernel();
    let kernel_filtration: DynFiltration = Arc::new(kernel.filtration.clone());
    let kernel_constants = constants_report(kernel_filtration.as_ref(), caps, seed)?;
    let dk = kernel_constants
        .lean
        .value
        .ok_or(ResolutionError::MissingConstant(PropertyKind::Lean))?;
    let second_cover = build_cover_epi(kernel_filtration, dk, caps, seed)?;
    // ψ₁: same matrix, but viewed into F₀ rather than onto K.
    let relation_map = FilteredMap::new(
        second_cover.module.clone(),
        cover.module.clone(),
        second_cover.map.matrix.clone(),
    )?;
    let relation_control = control_report(&relation_map, caps, seed)?;

    // Exactness at F₀: the relations hit exactly the kernel.
    let image = relation_map.image_submodule()?;
    debug_assert_eq!(image, kernel.submodule);
    // Composite vanishes exactly.
    let composite = relation_map.matrix.mul(&cover.map.matrix)?;
    let zero = Matrix::zero(
        composite.ring,
        composite.rows,
        composite.cols,
    );
    assert_eq!(composite, zero, "composite of presentation maps must vanish");

    Ok(PresentationReport {
        constants,
        cover,
        cover_control,
        kernel,
        kernel_constants,
        second_cover,
        relation_map,
        relation_control,
    })
}

/// One stage of a resolution: the free module covering the previous kernel.
pub struct ResolutionStage {
    pub rank: usize,
    pub lean_d: u64,
    /// Computed bicontrol constant of the stage's covering map.
    pub bicontrol: Option<u64>,
    pub kernel_rank: usize,
    pub kernel_lean: Option<u64>,
    pub kernel_insular: Option<u64>,
}

pub struct ResolutionReport {
    pub stages: Vec<ResolutionStage>,
    /// True when some stage's kernel vanished within `max_length`.
    pub terminated: bool,
    pub length: usize,
    /// Over a field, stage ranks are bounded by points × max local rank.
    pub rank_cap: Option<usize>,
}

/// Iterate free covers over successive kernels until the kernel vanishes or
/// `max_length` stages have been built. Exactness is verified by rank
/// arithmetic and exact composite vanishing at every stage.
pub fn build_resolution(
    f: DynFiltration,
    max_length: usize,
    caps: &Caps,
    seed: u64,
) -> Result<ResolutionReport, ResolutionError> {
    let mut stages = Vec::new();
    let mut current: DynFiltration = f;
    let mut previous_matrix: Option<Matrix> = None;
    let mut terminated = false;
    let mut rank_cap: Option<usize> = None;

    for stage in 0..max_length {
        let wrap = |e: ResolutionError| ResolutionError::Stage {
            stage,
            source: Box::new(e),
        };
        let constants = constants_report(current.as_ref(), caps, seed).map_err(|e| wrap(e.into()))?;
        let d = constants
            .lean
            .value
            .ok_or(ResolutionError::MissingConstant(PropertyKind::Lean))
            .map_err(wrap)?;
        let cover = build_cover_epi(current.clone(), d, caps, seed).map_err(wrap)?;
        let control = control_report(&cover.map, caps, seed).map_err(|e| wrap(e.into()))?;
        let kernel = cover.map.kernel();

        // Exactness: rank(im) + rank(ker) = rank of the stage module, and
        // the composite with the previous stage map vanishes exactly.
        let source_rank = cover.module.total().rank();
        let image_rank = cover.map.image_submodule().map_err(|e| wrap(e.into()))?.rank();
        assert_eq!(source_rank, image_rank + kernel.rank(), "rank arithmetic");
        if let Some(prev) = &previous_matrix {
            let composite = cover.map.matrix.mul(prev).map_err(|e| wrap(e.into()))?;
            assert!(
                composite == Matrix::zero(composite.ring, composite.rows, composite.cols),
                "consecutive stage maps must compose to zero"
            );
        }
        if cover.map.target.ring().is_field() {
            let cap = cover.map.target.space().points()
                * cover.local_ranks.iter().max().copied().unwrap_or(0);
            rank_cap = Some(rank_cap.map_or(cap, |c: usize| c.max(cap)));
        }

        let kernel_filtration: DynFiltration = Arc::new(kernel.filtration.clone());
        let kernel_constants =
            constants_report(kernel_filtration.as_ref(), caps, seed).map_err(|e| wrap(e.into()))?;
        stages.push(ResolutionStage {
            rank: source_rank,
            lean_d: d,
            bicontrol: control.bicontrol,
            kernel_rank: kernel.rank(),
            kernel_lean: kernel_constants.lean.value,
            kernel_insular: kernel_constants.insular.value,
        });
        previous_matrix = Some(cover.map.matrix.clone());
        if kernel.rank() == 0 {
            terminated = true;
            break;
        }
        current = kernel_filtration;
    }
    let length = stages.len();
    Ok(ResolutionReport {
        stages,
        terminated,
        length,
        rank_cap,
    })
}

/// Convenience used by reports: cross-check a claimed lean constant and
/// return the violating witness when it fails.
pub fn check_lean_at(
    f: &dyn Filtration,
    d: u64,
    caps: &Caps,
    seed: u64,
) -> Result<Result<(), PropertyWitness>, FilteredError> {
    let mode = caps.mode_for(f, PropertyKind::Lean, seed);
    crate::filtered::verify_constant_holds(f, PropertyKind::Lean, d, mode, caps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::SubFiltration;
    use crate::metric::FiniteMetricSpace;
    use crate::ring::Ring;

    fn path(n: usize) -> Arc<FiniteMetricSpace> {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| i.abs_diff(j) as u64).collect())
            .collect();
        Arc::new(FiniteMetricSpace::new(rows, None).unwrap())
    }

    fn singleton_free(space: Arc<FiniteMetricSpace>, ring: Ring) -> Arc<GeneratedFiltration> {
        let supports = (0..space.points())
            .map(|x| PointSet::singleton(space.points(), x))
            .collect();
        Arc::new(GeneratedFiltration::free(space, ring, supports).unwrap())
    }

    #[test]
    fn cover_of_singleton_free_module() {
        let space = path(3);
        let f = singleton_free(space, Ring::Rationals);
        let caps = Caps::default();
        let cover = build_cover_epi(f, 0, &caps, 0).unwrap();
        assert_eq!(cover.local_ranks, vec![1, 1, 1]);
        let report = control_report(&cover.map, &caps, 0).unwrap();
        assert_eq!(report.bicontrol, Some(0));
        assert_eq!(cover.map.kernel().rank(), 0);
    }

    #[test]
    fn cover_rejects_understated_lean_constant() {
        // K = span(e_0 + e_2) needs D = 2: for U = {0,2} only balls of
        // radius 2 around U's own points reach both support points.
        let space = path(3);
        let ring = Ring::Rationals;
        let parent = singleton_free(space, ring);
        let k = crate::linalg::Submodule::span(
            ring,
            3,
            &[Vector::from_i64(ring, &[1, 0, 1])],
        )
        .unwrap();
        let sub: DynFiltration = Arc::new(SubFiltration::new(parent, k));
        let caps = Caps::default();
        for understated in [0, 1] {
            let err = match build_cover_epi(sub.clone(), understated, &caps, 0) {
                Err(e) => e,
                Ok(_) => panic!("cover at D={understated} must be rejected"),
            };
            assert!(matches!(err, ResolutionError::NotLean { .. }));
        }
        let cover = build_cover_epi(sub, 2, &caps, 0).unwrap();
        assert_eq!(cover.local_ranks, vec![1, 1, 1]);
        let report = control_report(&cover.map, &caps, 0).unwrap();
        assert!(report.bicontrol.unwrap() <= 2);
    }

    #[test]
    fn presentation_of_path_kernel_module() {
        let space = path(3);
        let ring = Ring::Rationals;
        let parent = singleton_free(space, ring);
        let k = crate::linalg::Submodule::span(
            ring,
            3,
            &[Vector::from_i64(ring, &[1, 0, 1])],
        )
        .unwrap();
        let sub: DynFiltration = Arc::new(SubFiltration::new(parent, k));
        let caps = Caps::default();
        let pres = build_admissible_presentation(sub, &caps, 0).unwrap();
        assert!(pres.cover_control.bicontrol.unwrap() <= pres.cover.lean_d);
        assert!(pres.relation_control.control.value.is_some());
        // rank arithmetic at F0
        assert_eq!(
            pres.cover.module.total().rank(),
            pres.kernel.rank() + pres.cover.map.image_submodule().unwrap().rank()
        );
    }

    #[test]
    fn trivial_presentation_of_zero_module() {
        let space = path(3);
        let ring = Ring::PrimeField(3);
        let parent = singleton_free(space, ring);
        let zero = crate::linalg::Submodule::zero(ring, 3);
        let sub: DynFiltration = Arc::new(SubFiltration::new(parent, zero));
        let pres = build_admissible_presentation(sub, &Caps::default(), 0).unwrap();
        assert_eq!(pres.cover.module.total().rank(), 0);
        assert_eq!(pres.kernel.rank(), 0);
    }

    #[test]
    fn resolution_of_free_module_has_length_one() {
        let space = path(4);
        let f = singleton_free(space, Ring::Rationals);
        let report = build_resolution(f, 8, &Caps::default(), 0).unwrap();
        assert!(report.terminated);
        assert_eq!(report.length, 1);
        assert_eq!(report.stages[0].kernel_rank, 0);
    }

    #[test]
    fn resolution_of_sparse_independent_module_terminates_over_q() {
        // Independent generators at distinct points: the local pieces are a
        // direct sum, the cover is an isomorphism, and the kernel vanishes
        // at stage one.
        let space = path(5);
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
        let f: DynFiltration = Arc::new(GeneratedFiltration::new(space, ring, 3, gens).unwrap());
        let report = build_resolution(f, 8, &Caps::default(), 0).unwrap();
        assert!(report.terminated);
        assert_eq!(report.length, 1);
        for stage in &report.stages {
            assert!(stage.bicontrol.unwrap() <= stage.lean_d);
        }
    }

    #[test]
    fn resolution_of_redundant_cover_is_reported_honestly() {
        // The per-point cover of K = span(e_0 + e_2) is redundant (every
        // 2-ball sees the same generator), so relations persist at every
        // stage; the report says so rather than claiming termination.
        let space = path(3);
        let ring = Ring::Rationals;
        let parent = singleton_free(space, ring);
        let k = crate::linalg::Submodule::span(
            ring,
            3,
            &[Vector::from_i64(ring, &[1, 0, 1])],
        )
        .unwrap();
        let sub: DynFiltration = Arc::new(SubFiltration::new(parent, k));
        let report = build_resolution(sub, 4, &Caps::default(), 0).unwrap();
        assert!(!report.terminated);
        for stage in &report.stages {
            assert!(stage.bicontrol.unwrap() <= stage.lean_d);
        }
    }

    #[test]
    fn overlapping_integer_cover_does_not_terminate() {
        // Over ℤ: total module generated by 2 and 3 at distance 2; the local
        // covers overgenerate at every stage and relations persist past the
        // cutoff, which the report states honestly.
        let space = path(3);
        let ring = Ring::Integers;
        let gens = vec![
            crate::filtered::Generator {
                vector: Vector::from_i64(ring, &[2]),
                support: PointSet::singleton(3, 0),
            },
            crate::filtered::Generator {
                vector: Vector::from_i64(ring, &[3]),
                support: PointSet::singleton(3, 2),
            },
        ];
        let f: DynFiltration =
            Arc::new(GeneratedFiltration::new(space, ring, 1, gens).unwrap());
        let report = build_resolution(f, 4, &Caps::default(), 0).unwrap();
        assert!(!report.terminated);
        assert_eq!(report.length, 4);
        assert!(report.stages.last().unwrap().kernel_rank > 0);
    }
}
