//! Finite metric spaces with exact integer distances: metric validation,
//! enlargements, R-disjointness, diameters, and word-metric balls of the
//! standard group families.

use crate::pointset::PointSet;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("distance matrix is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("metric axiom violated: {0}")]
    Axiom(MetricViolation),
    #[error("ball of {group} at radius {radius} exceeds the point cap {cap}")]
    PointCapExceeded {
        group: String,
        radius: u64,
        cap: usize,
    },
    #[error("space has no points")]
    Empty,
    #[error("empty input where a nonempty set or family is required")]
    EmptyInput,
    #[error("unknown space expression `{0}`")]
    BadExpr(String),
    #[error("point index {index} out of range for a space with {points} points")]
    BadPoint { index: usize, points: usize },
}

/// A specific failed metric axiom, naming the offending points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricViolation {
    Asymmetric { x: usize, y: usize },
    NonzeroDiagonal { x: usize },
    ZeroOffDiagonal { x: usize, y: usize },
    Triangle { x: usize, y: usize, z: usize },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::Asymmetric { x, y } => write!(f, "d({x},{y}) != d({y},{x})"),
            MetricViolation::NonzeroDiagonal { x } => write!(f, "d({x},{x}) != 0"),
            MetricViolation::ZeroOffDiagonal { x, y } => write!(f, "d({x},{y}) = 0 with {x} != {y}"),
            MetricViolation::Triangle { x, y, z } => {
                write!(f, "d({x},{z}) > d({x},{y}) + d({y},{z})")
            }
        }
    }
}

/// How a space was constructed; strategies and reports read this.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceOrigin {
    Explicit,
    /// Ball of radius `radius` in ℤ^dim with the ℓ¹ word metric.
    ZnBall { dim: usize, radius: u64 },
    /// Ball of radius `radius` in ℤ/m with the cyclic metric.
    CycleBall { modulus: u64, radius: u64 },
    /// Ball of radius `radius` in the free group of the given rank.
    FreeBall { rank: usize, radius: u64 },
}

/// A finite metric space: points `0..n` with an exact integer distance
/// matrix, optional per-point labels, and integer coordinates when the space
/// is a lattice ball.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<u64>,
    labels: Option<Vec<String>>,
    coords: Option<Vec<Vec<i64>>>,
    origin: SpaceOrigin,
    /// Per point, the other points sorted by distance; balls are prefixes.
    neighbors: Vec<Vec<(u64, usize)>>,
}

impl PartialEq for FiniteMetricSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.dist == other.dist
    }
}

impl Eq for FiniteMetricSpace {}

/// Check the three metric axioms on a square matrix.
pub fn validate_metric(rows: &[Vec<u64>]) -> Result<(), MetricError> {
    let n = rows.len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(MetricError::NotSquare {
                row: i,
                got: r.len(),
                expected: n,
            });
        }
    }
    for x in 0..n {
        if rows[x][x] != 0 {
            return Err(MetricError::Axiom(MetricViolation::NonzeroDiagonal { x }));
        }
        for y in 0..n {
            if rows[x][y] != rows[y][x] {
                return Err(MetricError::Axiom(MetricViolation::Asymmetric { x, y }));
            }
            if x != y && rows[x][y] == 0 {
                return Err(MetricError::Axiom(MetricViolation::ZeroOffDiagonal { x, y }));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if rows[x][z] > rows[x][y] + rows[y][z] {
                    return Err(MetricError::Axiom(MetricViolation::Triangle { x, y, z }));
                }
            }
        }
    }
    Ok(())
}

fn sorted_neighbors(n: usize, dist: &[u64]) -> Vec<Vec<(u64, usize)>> {
    (0..n)
        .map(|x| {
            let mut row: Vec<(u64, usize)> = (0..n).map(|y| (dist[x * n + y], y)).collect();
            row.sort_unstable();
            row
        })
        .collect()
}

impl FiniteMetricSpace {
    fn assemble(
        n: usize,
        dist: Vec<u64>,
        labels: Option<Vec<String>>,
        coords: Option<Vec<Vec<i64>>>,
        origin: SpaceOrigin,
    ) -> Self {
        let neighbors = sorted_neighbors(n, &dist);
        FiniteMetricSpace {
            n,
            dist,
            labels,
            coords,
            origin,
            neighbors,
        }
    }

    pub fn new(rows: Vec<Vec<u64>>, labels: Option<Vec<String>>) -> Result<Self, MetricError> {
        if rows.is_empty() {
            return Err(MetricError::Empty);
        }
        validate_metric(&rows)?;
        let n = rows.len();
        Ok(Self::assemble(
            n,
            rows.into_iter().flatten().collect(),
            labels,
            None,
            SpaceOrigin::Explicit,
        ))
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn d(&self, x: usize, y: usize) -> u64 {
        self.dist[x * self.n + y]
    }

    pub fn label(&self, x: usize) -> String {
        self.labels
            .as_ref()
            .map(|l| l[x].clone())
            .unwrap_or_else(|| x.to_string())
    }

    pub fn origin(&self) -> &SpaceOrigin {
        &self.origin
    }

    /// Integer coordinates, present for ℤ^k balls.
    pub fn coords(&self) -> Option<&[Vec<i64>]> {
        self.coords.as_deref()
    }

    pub fn full_set(&self) -> PointSet {
        PointSet::full(self.n)
    }

    pub fn empty_set(&self) -> PointSet {
        PointSet::empty(self.n)
    }

    pub fn distance_rows(&self) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|x| self.dist[x * self.n..(x + 1) * self.n].to_vec())
            .collect()
    }

    /// The b-enlargement `S[b] = {x : d(x,s) ≤ b for some s ∈ S}`.
    pub fn enlarge(&self, s: &PointSet, b: u64) -> PointSet {
        let mut out = s.clone();
        for x in 0..self.n {
            if out.contains(x) {
                continue;
            }
            if s.iter().any(|p| self.d(x, p) <= b) {
                out.insert(x);
            }
        }
        out
    }

    /// Metric ball `x[r]`, read off the sorted-neighbor prefix.
    pub fn ball(&self, x: usize, r: u64) -> PointSet {
        let row = &self.neighbors[x];
        let end = row.partition_point(|&(d, _)| d <= r);
        let mut s = PointSet::empty(self.n);
        for &(_, y) in &row[..end] {
            s.insert(y);
        }
        s
    }

    /// All balls of one radius, for repeated enlargements at a fixed scale.
    pub fn reach_table(&self, r: u64) -> ReachTable {
        ReachTable {
            rows: (0..self.n).map(|x| self.ball(x, r)).collect(),
        }
    }

    /// Minimal distance between two nonempty sets.
    pub fn set_distance(&self, a: &PointSet, b: &PointSet) -> Option<u64> {
        let mut best: Option<u64> = None;
        for x in a.iter() {
            for y in b.iter() {
                let d = self.d(x, y);
                best = Some(best.map_or(d, |m| m.min(d)));
            }
        }
        best
    }

    pub fn diameter_of(&self, s: &PointSet) -> Result<u64, MetricError> {
        if s.is_empty() {
            return Err(MetricError::EmptyInput);
        }
        let idx = s.indices();
        let mut best = 0;
        for (i, &x) in idx.iter().enumerate() {
            for &y in &idx[i + 1..] {
                best = best.max(self.d(x, y));
            }
        }
        Ok(best)
    }

    pub fn diameter(&self) -> u64 {
        self.diameter_of(&self.full_set()).expect("nonempty space")
    }

    /// Max member diameter of a nonempty family.
    pub fn mesh(&self, family: &[PointSet]) -> Result<u64, MetricError> {
        if family.is_empty() {
            return Err(MetricError::EmptyInput);
        }
        let mut best = 0;
        for s in family {
            best = best.max(self.diameter_of(s)?);
        }
        Ok(best)
    }

    /// R-disjointness of a family: members pairwise disjoint as sets, and the
    /// R-enlargement of each misses the others (equivalently every pairwise
    /// point distance exceeds R).
    pub fn check_r_disjoint(&self, family: &[PointSet], r: u64) -> Result<(), DisjointnessViolation> {
        for i in 0..family.len() {
            for j in i + 1..family.len() {
                if !family[i].is_disjoint_from(&family[j]) {
                    return Err(DisjointnessViolation {
                        a: i,
                        b: j,
                        distance: 0,
                        overlap: true,
                    });
                }
                if let Some(d) = self.set_distance(&family[i], &family[j]) {
                    if d <= r {
                        return Err(DisjointnessViolation {
                            a: i,
                            b: j,
                            distance: d,
                            overlap: false,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_r_disjoint(&self, family: &[PointSet], r: u64) -> bool {
        self.check_r_disjoint(family, r).is_ok()
    }

    /// Minimal pairwise distance across a family with ≥ 2 members; the family
    /// is R-disjoint exactly for R < this value.
    pub fn family_separation(&self, family: &[PointSet]) -> Option<u64> {
        let mut best: Option<u64> = None;
        for i in 0..family.len() {
            for j in i + 1..family.len() {
                if let Some(d) = self.set_distance(&family[i], &family[j]) {
                    best = Some(best.map_or(d, |m| m.min(d)));
                }
            }
        }
        best
    }

    /// Sorted distinct distance values, always including 0. Property-constant
    /// searches range over this set.
    pub fn achievable_distances(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.dist.clone();
        v.push(0);
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Whether a permutation of the points preserves every distance.
    pub fn is_isometry(&self, perm: &[usize]) -> bool {
        if perm.len() != self.n {
            return false;
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        for x in 0..self.n {
            for y in 0..self.n {
                if self.d(x, y) != self.d(perm[x], perm[y]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Precomputed balls of one radius; `enlarge` becomes a union of rows.
pub struct ReachTable {
    rows: Vec<PointSet>,
}

impl ReachTable {
    pub fn enlarge(&self, s: &PointSet) -> PointSet {
        let n = self.rows.first().map_or(0, |r| r.ambient_size());
        let mut out = PointSet::empty(n);
        for x in s.iter() {
            out = out.union(&self.rows[x]);
        }
        out
    }

    pub fn ball(&self, x: usize) -> &PointSet {
        &self.rows[x]
    }
}

/// A failed R-disjointness check, naming the offending pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointnessViolation {
    pub a: usize,
    pub b: usize,
    pub distance: u64,
    pub overlap: bool,
}

impl fmt::Display for DisjointnessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.overlap {
            write!(f, "members {} and {} overlap as sets", self.a, self.b)
        } else {
            write!(
                f,
                "members {} and {} are at distance {}",
                self.a, self.b, self.distance
            )
        }
    }
}

/// Group families whose word-metric balls the lab can generate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupSpec {
    /// ℤ^k with the standard generators (ℓ¹ word metric).
    Zn(usize),
    /// Free group of the given rank.
    Free(usize),
    /// ℤ/m with generators ±1.
    Cycle(u64),
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Zn(k) => write!(f, "Z^{k}"),
            GroupSpec::Free(k) => write!(f, "F_{k}"),
            GroupSpec::Cycle(m) => write!(f, "Z/{m}"),
        }
    }
}

pub const DEFAULT_POINT_CAP: usize = 4096;

/// Word-metric ball of radius `r` around the identity. Distances are the
/// group's word metric restricted to the ball (not the induced path metric of
/// the ball subgraph).
pub fn cayley_ball(group: &GroupSpec, r: u64, cap: usize) -> Result<FiniteMetricSpace, MetricError> {
    let over_cap = |count: usize| -> Result<(), MetricError> {
        if count > cap {
            Err(MetricError::PointCapExceeded {
                group: group.to_string(),
                radius: r,
                cap,
            })
        } else {
            Ok(())
        }
    };
    match group {
        GroupSpec::Zn(k) => {
            let k = *k;
            assert!(k >= 1, "Zn rank must be positive");
            let mut pts: Vec<Vec<i64>> = Vec::new();
            let mut cur = vec![0i64; k];
            enumerate_l1_ball(&mut cur, 0, r as i64, &mut pts);
            pts.sort_by_key(|p| {
                (
                    p.iter().map(|&c| c.unsigned_abs()).sum::<u64>(),
                    p.clone(),
                )
            });
            over_cap(pts.len())?;
            let n = pts.len();
            let mut dist = vec![0u64; n * n];
            for i in 0..n {
                for j in 0..n {
                    dist[i * n + j] = pts[i]
                        .iter()
                        .zip(&pts[j])
                        .map(|(a, b)| a.abs_diff(*b))
                        .sum();
                }
            }
            let labels = pts
                .iter()
                .map(|p| {
                    let inner = p
                        .iter()
                        .map(|c| c.to_string())
                        .collect::<Vec<_>>()
                        .join(",");
                    format!("({inner})")
                })
                .collect();
            Ok(FiniteMetricSpace::assemble(
                n,
                dist,
                Some(labels),
                Some(pts),
                SpaceOrigin::ZnBall { dim: k, radius: r },
            ))
        }
        GroupSpec::Cycle(m) => {
            let m = *m;
            assert!(m >= 1, "cycle modulus must be positive");
            let cyc = |a: u64, b: u64| -> u64 {
                let d = a.abs_diff(b);
                d.min(m - d)
            };
            let members: Vec<u64> = (0..m).filter(|&x| cyc(x, 0) <= r).collect();
            over_cap(members.len())?;
            let n = members.len();
            let mut dist = vec![0u64; n * n];
            for i in 0..n {
                for j in 0..n {
                    dist[i * n + j] = cyc(members[i], members[j]);
                }
            }
            Ok(FiniteMetricSpace::assemble(
                n,
                dist,
                Some(members.iter().map(|x| x.to_string()).collect()),
                None,
                SpaceOrigin::CycleBall { modulus: m, radius: r },
            ))
        }
        GroupSpec::Free(k) => {
            let k = *k;
            assert!(k >= 1, "free rank must be positive");
            // Letters: 1..=k and -1..=-k, ordered a < a⁻¹ < b < b⁻¹ < …
            let letters: Vec<i64> = (1..=k as i64).flat_map(|g| [g, -g]).collect();
            let mut words: Vec<Vec<i64>> = vec![vec![]];
            let mut frontier: Vec<Vec<i64>> = vec![vec![]];
            for _ in 0..r {
                let mut next = Vec::new();
                for w in &frontier {
                    for &l in &letters {
                        if w.last() == Some(&-l) {
                            continue; // would cancel
                        }
                        let mut nw = w.clone();
                        nw.push(l);
                        next.push(nw);
                    }
                }
                over_cap(words.len() + next.len())?;
                words.extend(next.iter().cloned());
                frontier = next;
            }
            let n = words.len();
            let mut dist = vec![0u64; n * n];
            for i in 0..n {
                for j in 0..n {
                    dist[i * n + j] = free_distance(&words[i], &words[j]);
                }
            }
            let labels = words.iter().map(|w| word_label(w)).collect();
            Ok(FiniteMetricSpace::assemble(
                n,
                dist,
                Some(labels),
                None,
                SpaceOrigin::FreeBall { rank: k, radius: r },
            ))
        }
    }
}

fn enumerate_l1_ball(cur: &mut Vec<i64>, pos: usize, budget: i64, out: &mut Vec<Vec<i64>>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for v in -budget..=budget {
        cur[pos] = v;
        enumerate_l1_ball(cur, pos + 1, budget - v.abs(), out);
    }
    cur[pos] = 0;
}

/// Word distance in the free group: length of the reduced word `u⁻¹v`.
fn free_distance(u: &[i64], v: &[i64]) -> u64 {
    let mut common = 0;
    while common < u.len() && common < v.len() && u[common] == v[common] {
        common += 1;
    }
    ((u.len() - common) + (v.len() - common)) as u64
}

fn word_label(w: &[i64]) -> String {
    if w.is_empty() {
        return "e".to_string();
    }
    w.iter()
        .map(|&l| {
            let name = (b'a' + (l.unsigned_abs() as u8 - 1)) as char;
            if l > 0 {
                name.to_string()
            } else {
                format!("{name}'")
            }
        })
        .collect::<Vec<_>>()
        .join("")
}

/// Parse a generator expression: `zball:N`, `z2ball:N` (any `z<k>ball:N`),
/// `free:k:r`, `cycle:m`, or `cycle:m:r`.
pub fn parse_space_expr(expr: &str, cap: usize) -> Result<FiniteMetricSpace, MetricError> {
    let parts: Vec<&str> = expr.split(':').collect();
    let bad = || MetricError::BadExpr(expr.to_string());
    let num = |s: &str| -> Result<u64, MetricError> { s.parse().map_err(|_| bad()) };
    match parts.as_slice() {
        [head, r] if head.ends_with("ball") && head.starts_with('z') => {
            let dim_str = &head[1..head.len() - 4];
            let dim = if dim_str.is_empty() {
                1
            } else {
                dim_str.parse().map_err(|_| bad())?
            };
            cayley_ball(&GroupSpec::Zn(dim), num(r)?, cap)
        }
        ["free", k, r] => cayley_ball(&GroupSpec::Free(num(k)? as usize), num(r)?, cap),
        ["cycle", m] => {
            let m = num(m)?;
            cayley_ball(&GroupSpec::Cycle(m), m / 2, cap)
        }
        ["cycle", m, r] => cayley_ball(&GroupSpec::Cycle(num(m)?), num(r)?, cap),
        _ => Err(bad()),
    }
}

/// Convenience: the ball `{-N..N}` in ℤ with `d = |x − y|`.
pub fn zball(radius: u64) -> FiniteMetricSpace {
    cayley_ball(&GroupSpec::Zn(1), radius, DEFAULT_POINT_CAP).expect("within cap")
}

/// The taxicab ball of the given radius in ℤ².
pub fn z2ball(radius: u64) -> FiniteMetricSpace {
    cayley_ball(&GroupSpec::Zn(2), radius, DEFAULT_POINT_CAP).expect("within cap")
}

/// The full cycle ℤ/m.
pub fn cycle(m: u64) -> FiniteMetricSpace {
    cayley_ball(&GroupSpec::Cycle(m), m / 2, DEFAULT_POINT_CAP).expect("within cap")
}

/// Index of the point with 1-d coordinate `x` in a `zball` space.
pub fn zball_point(space: &FiniteMetricSpace, x: i64) -> Option<usize> {
    space
        .coords()?
        .iter()
        .position(|c| c.len() == 1 && c[0] == x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_validation() {
        assert!(validate_metric(&[vec![0]]).is_ok());
        assert!(validate_metric(&[vec![0, 1], vec![1, 0]]).is_ok());
        // Path metric on {0,1,2} with d(0,2)=5 breaks the triangle inequality.
        let bad = validate_metric(&[vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]]);
        assert_eq!(
            bad,
            Err(MetricError::Axiom(MetricViolation::Triangle { x: 0, y: 1, z: 2 }))
        );
    }

    #[test]
    fn zball_enlargements() {
        let s = zball(4);
        assert_eq!(s.points(), 9);
        let zero = zball_point(&s, 0).unwrap();
        let e = s.enlarge(&PointSet::singleton(9, zero), 2);
        let expected: Vec<usize> = (-2..=2).map(|x| zball_point(&s, x).unwrap()).collect();
        let mut expected = expected;
        expected.sort_unstable();
        assert_eq!(e.indices(), expected);

        // enlarge(S, 0) = S
        let arbitrary = PointSet::from_indices(9, &[1, 5]);
        assert_eq!(s.enlarge(&arbitrary, 0), arbitrary);

        // enlarge({-4,4}, 3) = {-4..-1} ∪ {1..4}
        let ends = PointSet::from_indices(
            9,
            &[zball_point(&s, -4).unwrap(), zball_point(&s, 4).unwrap()],
        );
        let e3 = s.enlarge(&ends, 3);
        let mut expected: Vec<usize> = (-4..=-1)
            .chain(1..=4)
            .map(|x| zball_point(&s, x).unwrap())
            .collect();
        expected.sort_unstable();
        assert_eq!(e3.indices(), expected);

        assert!(s.enlarge(&s.empty_set(), 3).is_empty());
    }

    #[test]
    fn r_disjointness_thresholds() {
        let s = zball(4);
        let a = PointSet::from_indices(
            9,
            &[zball_point(&s, -4).unwrap(), zball_point(&s, -3).unwrap()],
        );
        let b = PointSet::from_indices(
            9,
            &[zball_point(&s, 1).unwrap(), zball_point(&s, 2).unwrap()],
        );
        let fam = vec![a, b];
        assert!(s.is_r_disjoint(&fam, 3));
        assert!(!s.is_r_disjoint(&fam, 4));
        assert_eq!(s.family_separation(&fam), Some(4));
        // A singleton family is R-disjoint for every R.
        assert!(s.is_r_disjoint(&fam[..1], 1_000));
    }

    #[test]
    fn diameters() {
        let s = zball(4);
        assert_eq!(s.diameter(), 8);
        assert_eq!(
            s.diameter_of(&PointSet::singleton(9, 0)).unwrap(),
            0
        );
        assert!(s.diameter_of(&s.empty_set()).is_err());
    }

    #[test]
    fn cayley_examples() {
        let z = zball(4);
        assert_eq!(z.points(), 9);

        let c = cycle(6);
        assert_eq!(c.points(), 6);
        assert_eq!(c.diameter(), 3);
        // cyclic distances
        assert_eq!(c.d(0, 5), 1);
        assert_eq!(c.d(1, 4), 3);

        // Reduced words of length ≤ 2 over two generators: 1 + 4 + 12.
        let f = cayley_ball(&GroupSpec::Free(2), 2, DEFAULT_POINT_CAP).unwrap();
        assert_eq!(f.points(), 17);
        // d(ab, b) = |b⁻¹ab| = 3
        let ab = (0..17).find(|&i| f.label(i) == "ab").unwrap();
        let b = (0..17).find(|&i| f.label(i) == "b").unwrap();
        assert_eq!(f.d(ab, b), 3);
    }

    #[test]
    fn point_cap_enforced() {
        let r = cayley_ball(&GroupSpec::Free(2), 8, 100);
        assert!(matches!(r, Err(MetricError::PointCapExceeded { .. })));
    }

    #[test]
    fn expr_parsing() {
        assert_eq!(parse_space_expr("zball:4", 4096).unwrap().points(), 9);
        assert_eq!(parse_space_expr("z2ball:2", 4096).unwrap().points(), 13);
        assert_eq!(parse_space_expr("cycle:6", 4096).unwrap().points(), 6);
        assert_eq!(parse_space_expr("free:2:2", 4096).unwrap().points(), 17);
        assert!(parse_space_expr("wreath:2", 4096).is_err());
    }

    #[test]
    fn ball_is_singleton_enlargement() {
        let s = z2ball(3);
        for x in 0..s.points() {
            assert_eq!(
                s.ball(x, 2),
                s.enlarge(&PointSet::singleton(s.points(), x), 2)
            );
        }
    }
}
