//! Finite point systems on a sphere, represented by exact Gram data.
//!
//! Coordinates are deliberately not stored: every quantity of interest
//! (angle sets, design strength, intersection counts, subconstituents) is a
//! function of pairwise inner products, so a configuration is a symmetric
//! matrix of [`ExactReal`] inner products with unit diagonal, plus a fiber
//! label per point marking which member of a union it belongs to. Coordinate
//! models live in [`crate::catalog`] and are converted on ingestion.
//!
//! Two points of the sphere are equal iff their inner product is 1 and
//! antipodal iff it is -1, so set-level facts (fiber equality, antipodality,
//! angle sets) are decided from the Gram matrix alone.

use crate::gegenbauer::GegenbauerBasis;
use crate::linalg::Matrix;
use crate::qfield::ExactReal;
use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error)]
pub enum SphereSetError {
    #[error("gram matrix must be square and match the fiber labels ({0})")]
    Shape(String),
    #[error("gram matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("diagonal entry {0} is not 1")]
    BadDiagonal(usize),
    #[error("entry ({0}, {1}) lies outside [-1, 1]")]
    OutOfRange(usize, usize),
    #[error("points {0} and {1} in fiber {2} coincide")]
    DuplicatePoint(usize, usize, usize),
    #[error("gram matrix is not positive semidefinite")]
    NotPositiveSemidefinite,
    #[error("gram rank {rank} exceeds the declared dimension {dimension}")]
    RankExceedsDimension { rank: usize, dimension: u32 },
    #[error("operation requires a single fiber")]
    MultipleFibers,
    #[error("ambient dimension {0} is too small for derived designs")]
    DimensionTooSmall(u32),
    #[error("derived inner product radicand is zero for classes {0}, {1}")]
    DegenerateProjection(usize, usize),
    #[error("derived radicand is not rational: {0}")]
    IrrationalRadicand(String),
    #[error("points {0} and {1} project to the same derived point")]
    DuplicateProjection(usize, usize),
    #[error("fiber selection is empty")]
    EmptySelection,
    #[error("coordinates do not reproduce the gram matrix at ({0}, {1})")]
    CoordinateMismatch(usize, usize),
    #[error("invalid interchange file: {0}")]
    Interchange(String),
}

/// A finite labeled point system on S^{d-1}, held as its exact Gram matrix.
#[derive(Clone)]
pub struct GramConfiguration {
    dimension: u32,
    fibers: Vec<usize>,
    num_fibers: usize,
    gram: Vec<ExactReal>,
}

/// Nontrivial and full angle sets between two fibers, sorted descending.
///
/// `full` collects every inner product realized by pairs of distinct points
/// (so it may contain -1); `nontrivial` further drops -1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AngleSets {
    pub nontrivial: Vec<ExactReal>,
    pub full: Vec<ExactReal>,
}

impl AngleSets {
    pub fn s(&self) -> usize {
        self.nontrivial.len()
    }

    pub fn s_star(&self) -> usize {
        self.full.len()
    }

    /// The indexed angle list: position 0 is 1, positions 1..=s are the
    /// nontrivial angles in decreasing order, and when -1 is realized it
    /// sits at position s* = s + 1.
    pub fn indexed(&self) -> Vec<ExactReal> {
        let mut out = Vec::with_capacity(self.full.len() + 1);
        out.push(ExactReal::one());
        out.extend(self.full.iter().cloned());
        out
    }
}

/// Set relations between two fibers: equal as point sets, or antipodal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberFlags {
    pub same: bool,
    pub antipodal: bool,
}

impl GramConfiguration {
    /// Builds and fully validates a configuration. When `dimension` is None
    /// the exact rank of the Gram matrix is used.
    pub fn new(
        dimension: Option<u32>,
        fibers: Vec<usize>,
        gram: Vec<Vec<ExactReal>>,
    ) -> Result<Self, SphereSetError> {
        let config = Self::assemble(dimension, fibers, gram, true)?;
        Ok(config)
    }

    /// Same validation except the positive-semidefiniteness check; used for
    /// derived configurations that are projections of already-verified data.
    pub(crate) fn new_projected(
        dimension: u32,
        fibers: Vec<usize>,
        gram: Vec<Vec<ExactReal>>,
    ) -> Result<Self, SphereSetError> {
        Self::assemble(Some(dimension), fibers, gram, false)
    }

    fn assemble(
        dimension: Option<u32>,
        fibers: Vec<usize>,
        gram: Vec<Vec<ExactReal>>,
        full_checks: bool,
    ) -> Result<Self, SphereSetError> {
        let n = fibers.len();
        if gram.len() != n || gram.iter().any(|row| row.len() != n) {
            return Err(SphereSetError::Shape(format!(
                "{} fiber labels, {} gram rows",
                n,
                gram.len()
            )));
        }
        if n == 0 {
            return Err(SphereSetError::Shape("empty configuration".into()));
        }
        let one = ExactReal::one();
        let minus_one = ExactReal::from_int(-1);
        for (i, row) in gram.iter().enumerate() {
            if row[i] != one {
                return Err(SphereSetError::BadDiagonal(i));
            }
            for (j, entry) in row.iter().enumerate().skip(i + 1) {
                if *entry != gram[j][i] {
                    return Err(SphereSetError::NotSymmetric(i, j));
                }
                // Projected configurations validate the (few) distinct
                // entry values at construction, so the per-entry range
                // check is reserved for ingested data.
                if full_checks
                    && ((&one - entry).sign() < 0 || (entry - &minus_one).sign() < 0)
                {
                    return Err(SphereSetError::OutOfRange(i, j));
                }
                if *entry == one && fibers[i] == fibers[j] {
                    return Err(SphereSetError::DuplicatePoint(i, j, fibers[i]));
                }
            }
        }
        let num_fibers = fibers.iter().copied().max().unwrap_or(0) + 1;
        let flat: Vec<ExactReal> = gram.into_iter().flatten().collect();
        let dimension = if full_checks {
            let m = Matrix::from_fn(n, n, |i, j| flat[i * n + j].clone());
            let rank = m
                .psd_rank()
                .ok_or(SphereSetError::NotPositiveSemidefinite)?;
            match dimension {
                Some(d) if (d as usize) < rank => {
                    return Err(SphereSetError::RankExceedsDimension { rank, dimension: d })
                }
                Some(d) => d,
                None => rank as u32,
            }
        } else {
            dimension.expect("projected configurations carry a dimension")
        };
        Ok(GramConfiguration {
            dimension,
            fibers,
            num_fibers,
            gram: flat,
        })
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn num_fibers(&self) -> usize {
        self.num_fibers
    }

    pub fn fiber_of(&self, point: usize) -> usize {
        self.fibers[point]
    }

    pub fn fiber_points(&self, fiber: usize) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.fibers[p] == fiber).collect()
    }

    pub fn gram(&self, x: usize, y: usize) -> &ExactReal {
        &self.gram[x * self.len() + y]
    }

    /// The angle sets A(X_i, X_j) and A'(X_i, X_j).
    pub fn angle_sets(&self, fiber_i: usize, fiber_j: usize) -> AngleSets {
        let one = ExactReal::one();
        let minus_one = ExactReal::from_int(-1);
        // Angle sets are tiny; deduplicate by structural equality and sort
        // at the end.
        let mut values: Vec<ExactReal> = Vec::new();
        for &x in &self.fiber_points(fiber_i) {
            for &y in &self.fiber_points(fiber_j) {
                let g = self.gram(x, y);
                if *g != one && !values.contains(g) {
                    values.push(g.clone());
                }
            }
        }
        values.sort_by(|a, b| b.cmp(a));
        let nontrivial = values
            .iter()
            .filter(|v| **v != minus_one)
            .cloned()
            .collect();
        AngleSets {
            nontrivial,
            full: values,
        }
    }

    /// Set-level comparison of two fibers via the matching criterion: the
    /// fibers are equal (resp. antipodal) iff the inner-product-1 (resp. -1)
    /// relation between them is a perfect matching.
    pub fn fiber_flags(&self, fiber_i: usize, fiber_j: usize) -> FiberFlags {
        let pts_i = self.fiber_points(fiber_i);
        let pts_j = self.fiber_points(fiber_j);
        let matched = |target: &ExactReal| {
            pts_i.len() == pts_j.len()
                && pts_i
                    .iter()
                    .all(|&x| pts_j.iter().any(|&y| self.gram(x, y) == target))
        };
        FiberFlags {
            same: matched(&ExactReal::one()),
            antipodal: matched(&ExactReal::from_int(-1)),
        }
    }

    /// Design strength of the points in the selected fibers: the largest
    /// t <= max_t with vanishing Gegenbauer sums Σ_{x,y} Q_k(<x,y>) for
    /// k = 1..t. A return value of max_t means "at least max_t".
    pub fn strength(&self, fiber_subset: &[usize], max_t: u32) -> Result<u32, SphereSetError> {
        let points: Vec<usize> = (0..self.len())
            .filter(|&p| fiber_subset.contains(&self.fibers[p]))
            .collect();
        if points.is_empty() {
            return Err(SphereSetError::EmptySelection);
        }
        let mut multiplicities: BTreeMap<ExactReal, u64> = BTreeMap::new();
        for &x in &points {
            for &y in &points {
                *multiplicities.entry(self.gram(x, y).clone()).or_insert(0) += 1;
            }
        }
        let basis = GegenbauerBasis::new(self.dimension);
        for k in 1..=max_t {
            let mut sum = ExactReal::zero();
            for (value, count) in &multiplicities {
                let weight = ExactReal::from_int(*count as i64);
                sum += &(&weight * &basis.eval_q(k, value));
            }
            if !sum.is_zero() {
                return Ok(k - 1);
            }
        }
        Ok(max_t)
    }

    /// Default strength probe depth, 2·|A'| over the whole configuration.
    pub fn default_max_t(&self) -> u32 {
        let mut values: BTreeSet<ExactReal> = BTreeSet::new();
        let one = ExactReal::one();
        for x in 0..self.len() {
            for y in 0..self.len() {
                if x != y && *self.gram(x, y) != one {
                    values.insert(self.gram(x, y).clone());
                }
            }
        }
        (2 * values.len()).max(1) as u32
    }

    /// p^j_{α,β}(x, y): the number of z in fiber j at angle α from x and β
    /// from y, counted by a linear scan.
    pub fn intersection_number(
        &self,
        fiber_j: usize,
        alpha: &ExactReal,
        beta: &ExactReal,
        x: usize,
        y: usize,
    ) -> u64 {
        self.fiber_points(fiber_j)
            .iter()
            .filter(|&&z| self.gram(x, z) == alpha && self.gram(y, z) == beta)
            .count() as u64
    }

    /// Derived (subconstituent) designs at a base point of a single-fiber
    /// configuration: for each nontrivial angle class i, the points at angle
    /// α_i from z projected to z's orthogonal complement and rescaled to
    /// S^{d-2}. `parent_strength` is the verified strength of the parent.
    pub fn derived_family(
        &self,
        z: usize,
        parent_strength: u32,
    ) -> Result<DerivedFamily, SphereSetError> {
        if self.num_fibers != 1 {
            return Err(SphereSetError::MultipleFibers);
        }
        let angles = self.angle_sets(0, 0);
        let indexed = angles.indexed();
        let n = self.len();
        let mut classes = vec![0u16; n * n];
        for x in 0..n {
            for y in x..n {
                let c = indexed
                    .iter()
                    .position(|v| v == self.gram(x, y))
                    .expect("angle value classified") as u16;
                classes[x * n + y] = c;
                classes[y * n + x] = c;
            }
        }
        self.derived_family_precomputed(z, parent_strength, &indexed, &classes)
    }

    /// As [`Self::derived_family`] with the angle list and class matrix
    /// already computed by the caller; the class matrix assigns each pair
    /// its index in the full angle list (0 for equal points).
    pub fn derived_family_precomputed(
        &self,
        z: usize,
        parent_strength: u32,
        indexed: &[ExactReal],
        parent_classes: &[u16],
    ) -> Result<DerivedFamily, SphereSetError> {
        if self.num_fibers != 1 {
            return Err(SphereSetError::MultipleFibers);
        }
        if self.dimension < 3 {
            return Err(SphereSetError::DimensionTooSmall(self.dimension));
        }
        let n = self.len();
        let one = ExactReal::one();
        let minus_one = ExactReal::from_int(-1);
        let s = indexed
            .iter()
            .filter(|v| **v != one && **v != minus_one)
            .count();

        // Membership: parent points at a nontrivial angle from z.
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); s];
        for p in 0..n {
            let class = parent_classes[p * n + z] as usize;
            if class == 0 || indexed[class] == minus_one {
                continue;
            }
            members[class - 1].push(p);
        }

        // Inner products after projection: (α_k - α_a·α_b) / √((1-α_a²)(1-α_b²)).
        // The (class, class, parent class) triple determines the value, so
        // everything is computed once and the Gram fill is table lookup.
        let mut inv_denominator = vec![vec![ExactReal::zero(); s]; s];
        for a in 0..s {
            for b in 0..s {
                let alpha_a = &indexed[a + 1];
                let alpha_b = &indexed[b + 1];
                let radicand = &(&one - &(alpha_a * alpha_a)) * &(&one - &(alpha_b * alpha_b));
                if radicand.is_zero() {
                    return Err(SphereSetError::DegenerateProjection(a, b));
                }
                let root = radicand
                    .sqrt()
                    .map_err(|e| SphereSetError::IrrationalRadicand(e.to_string()))?;
                inv_denominator[a][b] = root.inv().expect("nonzero radicand");
            }
        }
        // Values for unrealized parent classes can leave [-1, 1]; they are
        // never used, so the range check happens on first realized use.
        let mut derived_value = vec![vec![Vec::new(); s]; s];
        for a in 0..s {
            for b in 0..s {
                let alpha_a = &indexed[a + 1];
                let alpha_b = &indexed[b + 1];
                let product = alpha_a * alpha_b;
                derived_value[a][b] = indexed
                    .iter()
                    .map(|alpha_k| &(alpha_k - &product) * &inv_denominator[a][b])
                    .collect();
            }
        }

        let flat_points: Vec<(usize, usize)> = members
            .iter()
            .enumerate()
            .flat_map(|(class, pts)| pts.iter().map(move |&p| (class, p)))
            .collect();
        let m = flat_points.len();
        let mut gram = vec![vec![ExactReal::zero(); m]; m];
        let mut class_maps: Vec<Vec<BTreeMap<usize, ExactReal>>> =
            vec![vec![BTreeMap::new(); s]; s];
        for (r, &(ca, pa)) in flat_points.iter().enumerate() {
            for (c, &(cb, pb)) in flat_points.iter().enumerate().skip(r) {
                let parent_class = parent_classes[pa * n + pb] as usize;
                let derived = &derived_value[ca][cb][parent_class];
                if r != c {
                    if !class_maps[ca][cb].contains_key(&parent_class) {
                        if (&one - derived).sign() < 0 || (derived - &minus_one).sign() < 0 {
                            return Err(SphereSetError::OutOfRange(ca, cb));
                        }
                        class_maps[ca][cb].insert(parent_class, derived.clone());
                        class_maps[cb][ca].insert(parent_class, derived.clone());
                    }
                    if ca == cb && *derived == one {
                        return Err(SphereSetError::DuplicateProjection(pa, pb));
                    }
                }
                gram[r][c] = derived.clone();
                gram[c][r] = derived.clone();
            }
        }

        let fibers: Vec<usize> = flat_points.iter().map(|&(class, _)| class).collect();
        let config = GramConfiguration::new_projected(self.dimension - 1, fibers, gram)?;
        // Strength guaranteed by the parent design property:
        // a t-design yields (t + 1 - s)-designs, s the nontrivial angle count.
        let bound = (parent_strength + 1).saturating_sub(s as u32);
        Ok(DerivedFamily {
            base_point: z,
            parent_points: flat_points.iter().map(|&(_, p)| p).collect(),
            parent_classes: (1..=s).collect(),
            config,
            strength_bounds: vec![bound; s],
            declared_strengths: vec![bound; s],
            class_maps,
        })
    }

    /// Serializes to the interchange structure, optionally bundling the
    /// coordinate model it was built from.
    pub fn to_file(&self, coordinates: Option<CoordinatesSection>) -> ConfigurationFile {
        let n = self.len();
        ConfigurationFile {
            dimension: self.dimension,
            fibers: self.fibers.clone(),
            gram: (0..n)
                .map(|i| (0..n).map(|j| self.gram(i, j).clone()).collect())
                .collect(),
            coordinates,
        }
    }
}

/// Subconstituent system of a single-fiber configuration at a base point.
///
/// Fiber f of `config` is the derived design of nontrivial angle class
/// f + 1 (class indices follow the parent's indexed angle list, so class 1
/// is the largest nontrivial angle). `class_maps[a][b]` sends a parent angle
/// class k to the inner product that pairs from classes a+1, b+1 with parent
/// angle α_k acquire after projection.
pub struct DerivedFamily {
    pub base_point: usize,
    /// Parent point index of each derived point.
    pub parent_points: Vec<usize>,
    /// Parent angle class of each derived fiber (always 1..=s).
    pub parent_classes: Vec<usize>,
    pub config: GramConfiguration,
    /// Strength guaranteed for every derived fiber by the parent's strength.
    pub strength_bounds: Vec<u32>,
    /// Strength the caller certifies for classification purposes; starts at
    /// the bound and may be raised when an eigenvalue criterion applies.
    pub declared_strengths: Vec<u32>,
    pub class_maps: Vec<Vec<BTreeMap<usize, ExactReal>>>,
}

impl DerivedFamily {
    pub fn num_fibers(&self) -> usize {
        self.parent_classes.len()
    }
}

/// Whether N points can meet the tight t-design cardinality bound in S^{d-1}.
pub fn tightness_check(n_points: u64, d: u32, t: u32) -> bool {
    assert!(t >= 1 && d >= 2, "tightness requires t >= 1, d >= 2");
    let bound = tight_bound(d, t);
    BigUint::from(n_points) == bound
}

/// The minimum size of a t-design in S^{d-1}: binom(d+t/2-1, t/2) +
/// binom(d+t/2-2, t/2-1) for even t, 2·binom(d+(t-3)/2, (t-1)/2) for odd t.
pub fn tight_bound(d: u32, t: u32) -> BigUint {
    let d = d as u64;
    let t = t as u64;
    if t % 2 == 0 {
        let e = t / 2;
        binomial(d + e - 1, e) + binomial(d + e - 2, e - 1)
    } else {
        let e = (t - 1) / 2;
        BigUint::from(2u32) * binomial(d + e - 1, e)
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Interchange format for configurations: dimension, fiber labels and the
/// Gram matrix, with an optional coordinate section that the loader verifies
/// against the Gram entries.
#[derive(Serialize, Deserialize)]
pub struct ConfigurationFile {
    pub dimension: u32,
    pub fibers: Vec<usize>,
    pub gram: Vec<Vec<ExactReal>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coordinates: Option<CoordinatesSection>,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct CoordinatesSection {
    pub norm_sq: ExactReal,
    pub vectors: Vec<Vec<ExactReal>>,
}

impl ConfigurationFile {
    pub fn parse(json: &str) -> Result<Self, SphereSetError> {
        serde_json::from_str(json).map_err(|e| SphereSetError::Interchange(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Validates and builds the configuration. When coordinates are present
    /// the normalized products must reproduce the Gram matrix exactly.
    pub fn into_configuration(self) -> Result<GramConfiguration, SphereSetError> {
        if let Some(coords) = &self.coordinates {
            if coords.vectors.len() != self.fibers.len() {
                return Err(SphereSetError::Interchange(
                    "coordinate count does not match fiber labels".into(),
                ));
            }
            let inv_norm = coords
                .norm_sq
                .inv()
                .map_err(|_| SphereSetError::Interchange("zero squared norm".into()))?;
            for i in 0..coords.vectors.len() {
                for j in i..coords.vectors.len() {
                    let mut dot = ExactReal::zero();
                    for (a, b) in coords.vectors[i].iter().zip(&coords.vectors[j]) {
                        dot += &(a * b);
                    }
                    if &dot * &inv_norm != self.gram[i][j] {
                        return Err(SphereSetError::CoordinateMismatch(i, j));
                    }
                }
            }
        }
        GramConfiguration::new(Some(self.dimension), self.fibers, self.gram)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::qfield::ratio;

    #[test]
    fn cross_polytope_angles_and_strength() {
        let config = catalog::make_cross_polytope(3).to_configuration().unwrap();
        let angles = config.angle_sets(0, 0);
        assert_eq!(angles.nontrivial, vec![ExactReal::zero()]);
        assert_eq!(
            angles.full,
            vec![ExactReal::zero(), ExactReal::from_int(-1)]
        );
        assert_eq!(config.strength(&[0], 6).unwrap(), 3);
        assert!(config.fiber_flags(0, 0).antipodal);
    }

    #[test]
    fn icosahedron_angles_and_strength() {
        let config = catalog::make_icosahedron().to_configuration().unwrap();
        let angles = config.angle_sets(0, 0);
        let inv_sqrt5 = ExactReal::from_term(ratio(1, 5), 5);
        assert_eq!(angles.nontrivial, vec![inv_sqrt5.clone(), -inv_sqrt5]);
        assert_eq!(angles.s_star(), 3);
        assert_eq!(config.strength(&[0], 7).unwrap(), 5);
        assert_eq!(config.dimension(), 3);
    }

    #[test]
    fn hexagon_strength() {
        let config = catalog::make_polygon(6).unwrap();
        assert_eq!(config.dimension(), 2);
        assert_eq!(config.strength(&[0], config.default_max_t()).unwrap(), 5);
    }

    #[test]
    fn tightness_values() {
        assert!(tightness_check(27, 6, 4));
        assert!(tightness_check(12, 3, 5));
        assert!(tightness_check(240, 8, 7));
        assert!(tightness_check(6, 2, 5));
        assert!(!tightness_check(26, 6, 4));
        assert!(!tightness_check(13, 3, 5));
    }

    #[test]
    fn trivial_intersection_count() {
        let config = catalog::make_cross_polytope(4).to_configuration().unwrap();
        let one = ExactReal::one();
        assert_eq!(config.intersection_number(0, &one, &one, 2, 2), 1);
        let zero = ExactReal::zero();
        // Orthogonal neighbours of a fixed point: everything except ±itself.
        assert_eq!(config.intersection_number(0, &zero, &zero, 2, 2), 6);
    }

    #[test]
    fn derived_family_of_icosahedron() {
        let config = catalog::make_icosahedron().to_configuration().unwrap();
        let family = config.derived_family(0, 5).unwrap();
        assert_eq!(family.num_fibers(), 2);
        // Each subconstituent is a pentagon in S^1.
        assert_eq!(family.config.dimension(), 2);
        for fiber in 0..2 {
            assert_eq!(family.config.fiber_points(fiber).len(), 5);
            assert_eq!(family.config.strength(&[fiber], 5).unwrap(), 4);
        }
        // Guaranteed bound t + 1 - s = 5 + 1 - 2.
        assert_eq!(family.strength_bounds, vec![4, 4]);
    }

    #[test]
    fn rejects_bad_gram() {
        let one = ExactReal::one();
        let two = ExactReal::from_int(2);
        let bad = GramConfiguration::new(
            None,
            vec![0, 0],
            vec![vec![one.clone(), two.clone()], vec![two, one]],
        );
        assert!(matches!(bad, Err(SphereSetError::OutOfRange(0, 1))));

        let half = ExactReal::from_rational(ratio(1, 2));
        let not_psd = GramConfiguration::new(
            Some(1),
            vec![0, 0, 0],
            vec![
                vec![ExactReal::one(), half.clone(), -half.clone()],
                vec![half.clone(), ExactReal::one(), half.clone()],
                vec![-half.clone(), half, ExactReal::one()],
            ],
        );
        assert!(matches!(
            not_psd,
            Err(SphereSetError::NotPositiveSemidefinite)
                | Err(SphereSetError::RankExceedsDimension { .. })
        ));
    }

    #[test]
    fn interchange_round_trip_with_coordinates() {
        let model = catalog::make_cross_polytope(3);
        let config = model.to_configuration().unwrap();
        let file = config.to_file(Some(CoordinatesSection {
            norm_sq: model.norm_sq.clone(),
            vectors: model.vectors.clone(),
        }));
        let json = file.to_json();
        let parsed = ConfigurationFile::parse(&json).unwrap();
        let back = parsed.into_configuration().unwrap();
        assert_eq!(back.len(), config.len());
        assert_eq!(back.dimension(), config.dimension());
        for x in 0..back.len() {
            for y in 0..back.len() {
                assert_eq!(back.gram(x, y), config.gram(x, y));
            }
        }
    }

    #[test]
    fn coordinate_mismatch_detected() {
        let model = catalog::make_cross_polytope(3);
        let config = model.to_configuration().unwrap();
        let mut file = config.to_file(Some(CoordinatesSection {
            norm_sq: ExactReal::from_int(2),
            vectors: model.vectors.clone(),
        }));
        file.dimension = 3;
        assert!(matches!(
            file.into_configuration(),
            Err(SphereSetError::CoordinateMismatch(_, _))
        ));
    }
}
