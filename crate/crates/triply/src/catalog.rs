//! Exact constructions of the named example configurations: regular
//! polygons, cross polytopes, the icosahedron, the 27-point two-distance
//! set, the E8 root system, real mutually unbiased bases, and a linked
//! system of symmetric designs.
//!
//! Every constructor verifies its own output (design strength, tightness,
//! unbiasedness, design and linkage axioms) before returning it; a catalog
//! item that fails verification is a build error, never a silent artifact.
//! Constructions are deterministic: the searches (MUB completion, quadratic
//! form family) use a fixed iteration order.

use crate::qfield::{ratio, ExactReal, Rational};
use crate::scheme::{self, CoherentConfig, SchemeAlgebra};
use crate::sphereset::{tightness_check, CoordinatesSection, GramConfiguration, SphereSetError};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("unsupported vertex count {0}: cos(2π/{0}) lies outside the quadratic tower")]
    UnsupportedPolygon(u32),
    #[error("unsupported parameter {0}: {1}")]
    Unsupported(u64, &'static str),
    #[error("construction failed self-verification: {0}")]
    SelfVerification(String),
    #[error("unknown catalog name {0:?}")]
    UnknownName(String),
    #[error(transparent)]
    SphereSet(#[from] SphereSetError),
    #[error(transparent)]
    Scheme(#[from] scheme::SchemeError),
}

/// Exact coordinates with a common squared norm; the Gram matrix of the
/// normalized points is ⟨x,y⟩ / norm².
pub struct CoordinateModel {
    pub vectors: Vec<Vec<ExactReal>>,
    pub norm_sq: ExactReal,
    pub fibers: Vec<usize>,
}

impl CoordinateModel {
    pub fn to_configuration(&self) -> Result<GramConfiguration, SphereSetError> {
        let n = self.vectors.len();
        let inv = self.norm_sq.inv().expect("nonzero norm");
        let gram: Vec<Vec<ExactReal>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut dot = ExactReal::zero();
                        for (a, b) in self.vectors[i].iter().zip(&self.vectors[j]) {
                            dot += &(a * b);
                        }
                        &dot * &inv
                    })
                    .collect()
            })
            .collect();
        GramConfiguration::new(None, self.fibers.clone(), gram)
    }

    pub fn coordinates_section(&self) -> CoordinatesSection {
        CoordinatesSection {
            norm_sq: self.norm_sq.clone(),
            vectors: self.vectors.clone(),
        }
    }
}

fn verify_strength(
    config: &GramConfiguration,
    expected: u32,
    what: &str,
) -> Result<(), CatalogError> {
    let fibers: Vec<usize> = (0..config.num_fibers()).collect();
    let got = config.strength(&fibers, expected + 1)?;
    if got != expected {
        return Err(CatalogError::SelfVerification(format!(
            "{what}: strength {got}, expected {expected}"
        )));
    }
    Ok(())
}

fn verify_min_strength(
    config: &GramConfiguration,
    minimum: u32,
    what: &str,
) -> Result<(), CatalogError> {
    let fibers: Vec<usize> = (0..config.num_fibers()).collect();
    let got = config.strength(&fibers, minimum)?;
    if got < minimum {
        return Err(CatalogError::SelfVerification(format!(
            "{what}: strength {got}, expected at least {minimum}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Polygons
// ---------------------------------------------------------------------------

/// cos(2πj/n) for the vertex counts whose cosines stay in the tower.
fn polygon_cosines(n: u32) -> Option<Vec<ExactReal>> {
    let int = ExactReal::from_int;
    let rational = |a: i64, b: i64| ExactReal::from_rational(ratio(a, b));
    let term = |a: i64, b: i64, s: u64| ExactReal::from_term(ratio(a, b), s);
    // Values cos(2πj/n) for j = 0..=n/2; the rest mirror.
    let half: Vec<ExactReal> = match n {
        3 => vec![int(1), rational(-1, 2)],
        4 => vec![int(1), int(0), int(-1)],
        5 => vec![
            int(1),
            &term(1, 4, 5) - &rational(1, 4),
            &term(-1, 4, 5) - &rational(1, 4),
        ],
        6 => vec![int(1), rational(1, 2), rational(-1, 2), int(-1)],
        8 => vec![int(1), term(1, 2, 2), int(0), term(-1, 2, 2), int(-1)],
        10 => vec![
            int(1),
            &term(1, 4, 5) + &rational(1, 4),
            &term(1, 4, 5) - &rational(1, 4),
            &term(-1, 4, 5) + &rational(1, 4),
            &term(-1, 4, 5) - &rational(1, 4),
            int(-1),
        ],
        12 => vec![
            int(1),
            term(1, 2, 3),
            rational(1, 2),
            int(0),
            rational(-1, 2),
            term(-1, 2, 3),
            int(-1),
        ],
        _ => return None,
    };
    let mut all = half.clone();
    for j in (n / 2 + 1)..n {
        all.push(half[(n - j) as usize].clone());
    }
    Some(all)
}

/// The regular n-gon on S¹, as Gram data (the sines of the supported angles
/// escape the tower, but the inner products never do). Verified to be a
/// tight (n-1)-design.
pub fn make_polygon(vertices: u32) -> Result<GramConfiguration, CatalogError> {
    if vertices < 3 {
        return Err(CatalogError::UnsupportedPolygon(vertices));
    }
    let cosines =
        polygon_cosines(vertices).ok_or(CatalogError::UnsupportedPolygon(vertices))?;
    let n = vertices as usize;
    let gram: Vec<Vec<ExactReal>> = (0..n)
        .map(|i| (0..n).map(|j| cosines[(i + n - j) % n].clone()).collect())
        .collect();
    let config = GramConfiguration::new(Some(2), vec![0; n], gram)?;
    verify_strength(&config, vertices - 1, "polygon")?;
    if !tightness_check(vertices as u64, 2, vertices - 1) {
        return Err(CatalogError::SelfVerification("polygon not tight".into()));
    }
    Ok(config)
}

// ---------------------------------------------------------------------------
// Cross polytope, icosahedron, E8
// ---------------------------------------------------------------------------

/// The 2d points ±e_i, a tight 3-design in S^{d-1}.
pub fn make_cross_polytope(d: u32) -> CoordinateModel {
    assert!(d >= 2, "cross polytope needs dimension at least 2");
    let mut vectors = Vec::with_capacity(2 * d as usize);
    for i in 0..d as usize {
        for sign in [1i64, -1] {
            let mut v = vec![ExactReal::zero(); d as usize];
            v[i] = ExactReal::from_int(sign);
            vectors.push(v);
        }
    }
    let model = CoordinateModel {
        fibers: vec![0; vectors.len()],
        vectors,
        norm_sq: ExactReal::one(),
    };
    let config = model.to_configuration().expect("valid by construction");
    verify_strength(&config, 3, "cross polytope").expect("cross polytope is a 3-design");
    model
}

/// The icosahedron: cyclic shifts of (0, ±1, ±φ) with φ the golden ratio,
/// common squared norm (5+√5)/2. A tight 5-design in S².
pub fn make_icosahedron() -> CoordinateModel {
    let phi = ExactReal::from_rational(ratio(1, 2)) + ExactReal::from_term(ratio(1, 2), 5);
    let zero = ExactReal::zero();
    let one = ExactReal::one();
    let mut vectors = Vec::with_capacity(12);
    for shift in 0..3 {
        for (s1, s2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let a = if s1 > 0 { one.clone() } else { -one.clone() };
            let b = if s2 > 0 { phi.clone() } else { -phi.clone() };
            let mut v = vec![zero.clone(), a, b];
            v.rotate_right(shift);
            vectors.push(v);
        }
    }
    let norm_sq = &one + &(&phi * &phi);
    let model = CoordinateModel {
        fibers: vec![0; 12],
        vectors,
        norm_sq,
    };
    let config = model.to_configuration().expect("valid by construction");
    verify_strength(&config, 5, "icosahedron").expect("icosahedron is a 5-design");
    assert!(tightness_check(12, 3, 5));
    model
}

/// The 240 E8 roots: all ±e_i ± e_j and all half-integer vectors with an
/// even number of minus signs; squared norm 2. A tight 7-design in S⁷.
pub fn make_e8_roots() -> CoordinateModel {
    let mut vectors = Vec::with_capacity(240);
    for i in 0..8 {
        for j in (i + 1)..8 {
            for (si, sj) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                let mut v = vec![ExactReal::zero(); 8];
                v[i] = ExactReal::from_int(si);
                v[j] = ExactReal::from_int(sj);
                vectors.push(v);
            }
        }
    }
    for mask in 0u32..256 {
        if mask.count_ones() % 2 != 0 {
            continue;
        }
        let v: Vec<ExactReal> = (0..8)
            .map(|i| {
                if mask & (1 << i) != 0 {
                    ExactReal::from_rational(ratio(-1, 2))
                } else {
                    ExactReal::from_rational(ratio(1, 2))
                }
            })
            .collect();
        vectors.push(v);
    }
    assert_eq!(vectors.len(), 240);
    let model = CoordinateModel {
        fibers: vec![0; 240],
        vectors,
        norm_sq: ExactReal::from_int(2),
    };
    let config = model.to_configuration().expect("valid by construction");
    verify_strength(&config, 7, "e8 roots").expect("E8 roots form a 7-design");
    assert!(tightness_check(240, 8, 7));
    model
}

// ---------------------------------------------------------------------------
// The 27-point tight 4-design
// ---------------------------------------------------------------------------

/// Line labels of a double six: a_i, b_i (i in 0..6) and c_{ij} (i < j).
/// Two lines meet according to the classical rules; the two-distance set
/// takes inner product 1/4 on skew pairs and -1/2 on meeting pairs.
fn schlafli_adjacency() -> Vec<Vec<bool>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Line {
        A(usize),
        B(usize),
        C(usize, usize),
    }
    let mut lines = Vec::with_capacity(27);
    for i in 0..6 {
        lines.push(Line::A(i));
    }
    for i in 0..6 {
        lines.push(Line::B(i));
    }
    for i in 0..6 {
        for j in (i + 1)..6 {
            lines.push(Line::C(i, j));
        }
    }
    let meets = |x: Line, y: Line| -> bool {
        match (x, y) {
            (Line::A(_), Line::A(_)) | (Line::B(_), Line::B(_)) => false,
            (Line::A(i), Line::B(j)) | (Line::B(j), Line::A(i)) => i != j,
            (Line::A(i), Line::C(j, k))
            | (Line::C(j, k), Line::A(i))
            | (Line::B(i), Line::C(j, k))
            | (Line::C(j, k), Line::B(i)) => i == j || i == k,
            (Line::C(i, j), Line::C(k, l)) => i != k && i != l && j != k && j != l,
        }
    };
    (0..27)
        .map(|x| {
            (0..27)
                .map(|y| x != y && !meets(lines[x], lines[y]))
                .collect()
        })
        .collect()
}

/// The 27-point tight 4-design in S⁵, built Gram-first from the skew-lines
/// graph of a double six: inner products 1/4 along edges, -1/2 otherwise.
/// Verified positive semidefinite of rank 6, strength exactly 4, tight.
pub fn make_tight4_27() -> Result<GramConfiguration, CatalogError> {
    let adj = schlafli_adjacency();
    let quarter = ExactReal::from_rational(ratio(1, 4));
    let minus_half = ExactReal::from_rational(ratio(-1, 2));
    let gram: Vec<Vec<ExactReal>> = (0..27)
        .map(|x| {
            (0..27)
                .map(|y| {
                    if x == y {
                        ExactReal::one()
                    } else if adj[x][y] {
                        quarter.clone()
                    } else {
                        minus_half.clone()
                    }
                })
                .collect()
        })
        .collect();
    let config = GramConfiguration::new(None, vec![0; 27], gram)?;
    if config.dimension() != 6 {
        return Err(CatalogError::SelfVerification(format!(
            "27-point gram has rank {}, expected 6",
            config.dimension()
        )));
    }
    verify_strength(&config, 4, "27-point set")?;
    if !tightness_check(27, 6, 4) {
        return Err(CatalogError::SelfVerification("27-point set not tight".into()));
    }
    Ok(config)
}

// ---------------------------------------------------------------------------
// Real mutually unbiased bases
// ---------------------------------------------------------------------------

/// A maximal set of real mutually unbiased bases of ℝ⁴ (f = 3 bases), as
/// X = M ∪ (-M), 24 unit vectors. Found by exhaustive completion over
/// ±1/2-coordinate vectors starting from the standard basis; the result is
/// certified by an unbiasedness check.
pub fn make_mub(d: u32) -> Result<CoordinateModel, CatalogError> {
    if d != 4 {
        return Err(CatalogError::Unsupported(
            d as u64,
            "real MUB construction implemented for dimension 4",
        ));
    }
    let half = ratio(1, 2);
    // Candidates with first coordinate +1/2 (one representative per ± pair),
    // in a fixed order.
    let candidates: Vec<Vec<Rational>> = (0..8u32)
        .map(|mask| {
            (0..4)
                .map(|i| {
                    if i > 0 && mask & (1 << (i - 1)) != 0 {
                        -half.clone()
                    } else {
                        half.clone()
                    }
                })
                .collect()
        })
        .collect();
    let dot = |a: &[Rational], b: &[Rational]| -> Rational {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    };
    let orthogonal = |basis: &[usize], c: usize| {
        basis
            .iter()
            .all(|&b| dot(&candidates[b], &candidates[c]) == ratio(0, 1))
    };
    let unbiased = |other: &[usize], c: usize| {
        other.iter().all(|&b| {
            let p = dot(&candidates[b], &candidates[c]);
            p == half || p == -half.clone()
        })
    };
    fn complete(
        basis: &mut Vec<usize>,
        from: usize,
        ok: &dyn Fn(&[usize], usize) -> bool,
    ) -> bool {
        if basis.len() == 4 {
            return true;
        }
        for c in from..8 {
            if ok(basis, c) {
                basis.push(c);
                if complete(basis, c + 1, ok) {
                    return true;
                }
                basis.pop();
            }
        }
        false
    }
    let mut basis1 = Vec::new();
    if !complete(&mut basis1, 0, &|basis, c| orthogonal(basis, c)) {
        return Err(CatalogError::SelfVerification("no second basis found".into()));
    }
    let b1 = basis1.clone();
    let mut basis2 = Vec::new();
    let ok2 = move |basis: &[usize], c: usize| {
        orthogonal(basis, c) && unbiased(&b1, c) && !b1.contains(&c)
    };
    if !complete(&mut basis2, 0, &ok2) {
        return Err(CatalogError::SelfVerification("no third basis found".into()));
    }

    let mut bases: Vec<Vec<Vec<Rational>>> = Vec::new();
    bases.push(
        (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| if i == j { ratio(1, 1) } else { ratio(0, 1) })
                    .collect()
            })
            .collect(),
    );
    bases.push(basis1.iter().map(|&c| candidates[c].clone()).collect());
    bases.push(basis2.iter().map(|&c| candidates[c].clone()).collect());

    // Certify: orthonormal bases, pairwise unbiased at ±1/2 = ±1/√d.
    for (bi, basis) in bases.iter().enumerate() {
        for x in 0..4 {
            for y in 0..4 {
                let expected = if x == y { ratio(1, 1) } else { ratio(0, 1) };
                if dot(&basis[x], &basis[y]) != expected {
                    return Err(CatalogError::SelfVerification(format!(
                        "basis {bi} is not orthonormal"
                    )));
                }
            }
        }
        for other in bases.iter().skip(bi + 1) {
            for x in 0..4 {
                for y in 0..4 {
                    let p = dot(&bases[bi][x], &other[y]);
                    if p != half && p != -half.clone() {
                        return Err(CatalogError::SelfVerification(
                            "bases are not unbiased".into(),
                        ));
                    }
                }
            }
        }
    }

    let mut vectors = Vec::with_capacity(24);
    for basis in &bases {
        for v in basis {
            vectors.push(v.iter().map(|c| ExactReal::from_rational(c.clone())).collect());
        }
    }
    for basis in &bases {
        for v in basis {
            vectors.push(
                v.iter()
                    .map(|c| ExactReal::from_rational(-c.clone()))
                    .collect(),
            );
        }
    }
    let model = CoordinateModel {
        fibers: vec![0; 24],
        vectors,
        norm_sq: ExactReal::one(),
    };
    let config = model.to_configuration()?;
    let angles = config.angle_sets(0, 0);
    if angles.s_star() != 4 {
        return Err(CatalogError::SelfVerification(format!(
            "MUB union has {} angles, expected 4",
            angles.s_star()
        )));
    }
    // Every real MUB union is a 3-design; at d = 4 the 24 points happen to
    // form the 24-cell and the strength is higher, so only the bound is
    // asserted.
    verify_min_strength(&config, 3, "MUB union")?;
    Ok(model)
}

// ---------------------------------------------------------------------------
// Linked systems of symmetric designs
// ---------------------------------------------------------------------------

/// Parameters of a linked system of symmetric (v,k,λ) designs with f fibers.
#[derive(Clone, Debug)]
pub struct LinkedSystemSpec {
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub f: u64,
    /// n = k - λ.
    pub n: u64,
    pub sigma: u64,
    pub tau: u64,
}

impl LinkedSystemSpec {
    /// Derives σ = (k² - √n(v-k))/v and τ = k(k+√n)/v, which must be
    /// integers for a linked system.
    pub fn new(v: u64, k: u64, lambda: u64, f: u64) -> Result<Self, CatalogError> {
        let n = k - lambda;
        let sqrt_n = ExactReal::from_int(n as i64)
            .sqrt()
            .map_err(|_| CatalogError::Unsupported(n, "k - λ must be nonnegative"))?;
        let v_inv = ExactReal::from_int(v as i64).inv().expect("v > 0");
        let sigma = &(&ExactReal::from_int((k * k) as i64)
            - &(&sqrt_n * &ExactReal::from_int((v - k) as i64)))
            * &v_inv;
        let tau = &(&ExactReal::from_int(k as i64)
            * &(&ExactReal::from_int(k as i64) + &sqrt_n))
            * &v_inv;
        let as_u64 = |x: &ExactReal, what: &'static str| {
            x.as_integer()
                .and_then(|b| u64::try_from(b).ok())
                .ok_or(CatalogError::Unsupported(v, what))
        };
        Ok(LinkedSystemSpec {
            v,
            k,
            lambda,
            f,
            n,
            sigma: as_u64(&sigma, "σ is not a nonnegative integer")?,
            tau: as_u64(&tau, "τ is not a nonnegative integer")?,
        })
    }

    /// Whether f meets the condition 1 + (v-2)√(k(v-k)) / ((v-2k)√(v-1)),
    /// equivalent to the first Krein parameter of the scheme vanishing.
    pub fn satisfies_a1_star_zero(&self) -> bool {
        if self.v <= 2 * self.k {
            return false;
        }
        let num = &ExactReal::from_int((self.v - 2) as i64)
            * &ExactReal::sqrt_int(self.k * (self.v - self.k));
        let den = &ExactReal::from_int((self.v - 2 * self.k) as i64)
            * &ExactReal::sqrt_int(self.v - 1);
        let rhs = &ExactReal::one() + &(&num * &den.inv().expect("nonzero"));
        rhs == ExactReal::from_int(self.f as i64)
    }
}

/// A verified linked system: f fibers of v points each, with the cross
/// incidences. Point p lives in fiber p / v and carries the local index
/// p mod v.
pub struct LinkedSystem {
    pub spec: LinkedSystemSpec,
    incident: Vec<bool>,
}

impl LinkedSystem {
    pub fn num_points(&self) -> usize {
        (self.spec.v * self.spec.f) as usize
    }

    pub fn fiber_of(&self, p: usize) -> usize {
        p / self.spec.v as usize
    }

    pub fn is_incident(&self, p: usize, q: usize) -> bool {
        self.incident[p * self.num_points() + q]
    }

    /// The 0/1 incidence matrix between two distinct fibers.
    pub fn incidence_matrix(&self, fiber_i: usize, fiber_j: usize) -> Vec<Vec<u8>> {
        let v = self.spec.v as usize;
        (0..v)
            .map(|x| {
                (0..v)
                    .map(|y| self.is_incident(fiber_i * v + x, fiber_j * v + y) as u8)
                    .collect()
            })
            .collect()
    }

    /// The 3-class association scheme on the union: R_1 incident cross-fiber
    /// pairs, R_2 same-fiber distinct pairs, R_3 non-incident cross-fiber
    /// pairs. Coherence is re-verified by counting.
    pub fn build_scheme(&self) -> Result<CoherentConfig, scheme::SchemeError> {
        let n = self.num_points();
        let mut classes = vec![0u16; n * n];
        for x in 0..n {
            for y in 0..n {
                classes[x * n + y] = if x == y {
                    0
                } else if self.fiber_of(x) == self.fiber_of(y) {
                    2
                } else if self.is_incident(x, y) {
                    1
                } else {
                    3
                };
            }
        }
        let partition = scheme::RelationPartition::from_class_matrix(n, classes)?;
        scheme::verify_coherent(&partition)
    }

    /// Embeds the scheme into its first eigenspace (in the Q-polynomial
    /// ordering), yielding Gram data of rank v - 1.
    pub fn to_configuration(&self) -> Result<(GramConfiguration, SchemeAlgebra), CatalogError> {
        let assoc = self.build_scheme()?;
        let algebra = scheme::eigen_structure(&assoc)?;
        let order = algebra
            .q_polynomial_ordering()
            .ok_or(scheme::SchemeError::NotQPolynomial)?;
        let ordered = algebra.reordered(&order);
        let config = ordered.eigenspace_embedding(&assoc, 1)?;
        Ok((config, ordered))
    }
}

/// Evaluates a 10-bit quadratic form mask on a point of F₂⁴: bits 0..6 are
/// the coefficients of x_i·x_j (i < j in lexicographic order), bits 6..10
/// the linear terms.
fn eval_form(mask: u16, point: u8) -> bool {
    const PAIRS: [(u8, u8); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut acc = false;
    for (bit, (i, j)) in PAIRS.iter().enumerate() {
        if mask & (1 << bit) != 0 && point & (1 << i) != 0 && point & (1 << j) != 0 {
            acc = !acc;
        }
    }
    for i in 0..4 {
        if mask & (1 << (6 + i)) != 0 && point & (1 << i) != 0 {
            acc = !acc;
        }
    }
    acc
}

/// The alternating matrix of a form's polarization is invertible over F₂.
fn polarization_nondegenerate(mask: u16) -> bool {
    const PAIRS: [(u8, u8); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut rows = [0u8; 4];
    for (bit, (i, j)) in PAIRS.iter().enumerate() {
        if mask & (1 << bit) != 0 {
            rows[*i as usize] ^= 1 << j;
            rows[*j as usize] ^= 1 << i;
        }
    }
    // Gaussian elimination over F₂ on the 4×4 matrix.
    let mut rank = 0;
    for col in 0..4 {
        if let Some(pivot) = (rank..4).find(|&r| rows[r] & (1 << col) != 0) {
            rows.swap(rank, pivot);
            for r in 0..4 {
                if r != rank && rows[r] & (1 << col) != 0 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    rank == 4
}

/// A linked system of symmetric designs with parameters
/// (2^{2m}, 2^{2m-1} - 2^{m-1}, 2^{2m-2} - 2^{m-1}) and f = 2^{2m-1} fibers;
/// implemented for m = 2, i.e. (16, 6, 2) with 8 fibers.
///
/// Fibers are copies of F₂⁴; x and y in distinct fibers i, j are incident
/// iff (q_i + q_j)(x + y) = 1 for a family of 8 quadratic forms whose
/// pairwise sums are nondegenerate with 6 nonzero values each (found by a
/// deterministic backtracking search). The design axioms and the
/// two-valuedness of the triple cross-counts are then verified exhaustively.
pub fn make_linked_system(m: u32) -> Result<LinkedSystem, CatalogError> {
    if m != 2 {
        return Err(CatalogError::Unsupported(
            m as u64,
            "linked systems implemented for m = 2, parameters (16, 6, 2, 8)",
        ));
    }
    let spec = LinkedSystemSpec::new(16, 6, 2, 8)?;
    // Family containing the zero form with every pairwise sum nondegenerate,
    // found by deterministic backtracking in mask order.
    fn search(family: &mut Vec<u16>, from: u16) -> bool {
        if family.len() == 8 {
            return true;
        }
        for mask in from..1024 {
            if family.iter().all(|&f| polarization_nondegenerate(f ^ mask)) {
                family.push(mask);
                if search(family, mask + 1) {
                    return true;
                }
                family.pop();
            }
        }
        false
    }
    let mut forms = vec![0u16];
    if !search(&mut forms, 1) {
        return Err(CatalogError::SelfVerification(
            "no admissible family of quadratic forms".into(),
        ));
    }

    // Points of fiber i are the linear functionals l_x; x and y in distinct
    // fibers i, j are incident iff the function (q_i + q_j) + l_{x⊕y}
    // disagrees with zero on v - k = 10 points. Nondegeneracy of the pair
    // sums makes this two-valued (10 or 6), so each block has k = 6 points.
    let v = 16usize;
    let f = 8usize;
    let n = v * f;
    let weight = |mask: u16, shift: u8| -> u32 {
        (0u8..16)
            .filter(|&w| eval_form(mask, w) != ((shift & w).count_ones() % 2 == 1))
            .count() as u32
    };
    let mut incident = vec![false; n * n];
    for i in 0..f {
        for j in 0..f {
            if i == j {
                continue;
            }
            let sum = forms[i] ^ forms[j];
            for x in 0..v {
                for y in 0..v {
                    incident[(i * v + x) * n + (j * v + y)] =
                        weight(sum, (x ^ y) as u8) == (spec.v - spec.k) as u32;
                }
            }
        }
    }
    let system = LinkedSystem { spec, incident };
    verify_linked_system(&system)?;
    Ok(system)
}

/// Exhaustive verification of the linked-system axioms: every cross pair of
/// fibers is a symmetric (v,k,λ) design, and the triple cross-counts take
/// exactly the two values σ (incident) and τ (non-incident).
fn verify_linked_system(system: &LinkedSystem) -> Result<(), CatalogError> {
    let v = system.spec.v as usize;
    let f = system.spec.f as usize;
    let k = system.spec.k;
    let lambda = system.spec.lambda;
    let fail = |msg: String| Err(CatalogError::SelfVerification(msg));
    for i in 0..f {
        for j in 0..f {
            if i == j {
                continue;
            }
            for x in 0..v {
                let p = i * v + x;
                let row = (0..v)
                    .filter(|&y| system.is_incident(p, j * v + y))
                    .count() as u64;
                if row != k {
                    return fail(format!("block size {row} != k between fibers {i}, {j}"));
                }
                if system.is_incident(p, p) {
                    return fail("incidence on a diagonal point".into());
                }
            }
            for x1 in 0..v {
                for x2 in (x1 + 1)..v {
                    let common = (0..v)
                        .filter(|&y| {
                            system.is_incident(i * v + x1, j * v + y)
                                && system.is_incident(i * v + x2, j * v + y)
                        })
                        .count() as u64;
                    if common != lambda {
                        return fail(format!(
                            "pair ({x1}, {x2}) in fiber {i} meets {common} != λ blocks of fiber {j}"
                        ));
                    }
                }
            }
        }
    }
    // Two-valued linkage.
    for i in 0..f {
        for j in 0..f {
            for l in 0..f {
                if i == j || j == l || i == l {
                    continue;
                }
                for x in 0..v {
                    for y in 0..v {
                        let p = i * v + x;
                        let q = j * v + y;
                        let count = (0..v)
                            .filter(|&z| {
                                system.is_incident(p, l * v + z)
                                    && system.is_incident(q, l * v + z)
                            })
                            .count() as u64;
                        let expected = if system.is_incident(p, q) {
                            system.spec.sigma
                        } else {
                            system.spec.tau
                        };
                        if count != expected {
                            return fail(format!(
                                "triple count {count} != {expected} at fibers ({i},{j},{l})"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Catalog lookup
// ---------------------------------------------------------------------------

/// A materialized catalog entry.
pub struct CatalogItem {
    pub name: String,
    pub config: GramConfiguration,
    pub coordinates: Option<CoordinatesSection>,
    pub linked: Option<LinkedSystem>,
}

pub const CATALOG_NAMES: &[&str] = &[
    "polygon-3",
    "polygon-4",
    "polygon-5",
    "polygon-6",
    "polygon-8",
    "polygon-10",
    "polygon-12",
    "cross-3",
    "cross-4",
    "cross-5",
    "icosahedron",
    "tight4-27",
    "e8",
    "mub4",
    "linked-16",
];

/// Resolves a catalog name ("hexagon", "polygon-6", "cross-4", "e8", ...).
pub fn by_name(name: &str) -> Result<CatalogItem, CatalogError> {
    let canonical = match name {
        "triangle" => "polygon-3".to_string(),
        "square" => "polygon-4".to_string(),
        "pentagon" => "polygon-5".to_string(),
        "hexagon" => "polygon-6".to_string(),
        "octagon" => "polygon-8".to_string(),
        "decagon" => "polygon-10".to_string(),
        "dodecagon" => "polygon-12".to_string(),
        "octahedron" => "cross-3".to_string(),
        "mub" => "mub4".to_string(),
        "linked" | "linked-16-6-2-8" => "linked-16".to_string(),
        other => other.to_string(),
    };
    let item = |config: GramConfiguration,
                coordinates: Option<CoordinatesSection>,
                linked: Option<LinkedSystem>| CatalogItem {
        name: canonical.clone(),
        config,
        coordinates,
        linked,
    };
    if let Some(n) = canonical.strip_prefix("polygon-") {
        let n: u32 = n
            .parse()
            .map_err(|_| CatalogError::UnknownName(name.into()))?;
        return Ok(item(make_polygon(n)?, None, None));
    }
    if let Some(d) = canonical.strip_prefix("cross-") {
        let d: u32 = d
            .parse()
            .map_err(|_| CatalogError::UnknownName(name.into()))?;
        if !(2..=16).contains(&d) {
            return Err(CatalogError::Unsupported(d as u64, "cross-polytope dimension"));
        }
        let model = make_cross_polytope(d);
        let coords = model.coordinates_section();
        return Ok(item(model.to_configuration()?, Some(coords), None));
    }
    match canonical.as_str() {
        "icosahedron" => {
            let model = make_icosahedron();
            let coords = model.coordinates_section();
            Ok(item(model.to_configuration()?, Some(coords), None))
        }
        "tight4-27" => Ok(item(make_tight4_27()?, None, None)),
        "e8" => {
            let model = make_e8_roots();
            let coords = model.coordinates_section();
            Ok(item(model.to_configuration()?, Some(coords), None))
        }
        "mub4" => {
            let model = make_mub(4)?;
            let coords = model.coordinates_section();
            Ok(item(model.to_configuration()?, Some(coords), None))
        }
        "linked-16" => {
            let system = make_linked_system(2)?;
            let (config, _) = system.to_configuration()?;
            Ok(item(config, None, Some(system)))
        }
        _ => Err(CatalogError::UnknownName(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygons() {
        let hexagon = make_polygon(6).unwrap();
        assert_eq!(hexagon.strength(&[0], 8).unwrap(), 5);
        let square = make_polygon(4).unwrap();
        assert_eq!(square.strength(&[0], 5).unwrap(), 3);
        assert!(matches!(
            make_polygon(7),
            Err(CatalogError::UnsupportedPolygon(7))
        ));
        let pentagon = make_polygon(5).unwrap();
        assert_eq!(pentagon.strength(&[0], 6).unwrap(), 4);
    }

    #[test]
    fn cross_polytope_properties() {
        let model = make_cross_polytope(4);
        let config = model.to_configuration().unwrap();
        let angles = config.angle_sets(0, 0);
        assert_eq!(angles.nontrivial, vec![ExactReal::zero()]);
        assert!(config.fiber_flags(0, 0).antipodal);
    }

    #[test]
    fn icosahedron_counts() {
        let config = make_icosahedron().to_configuration().unwrap();
        assert_eq!(config.len(), 12);
        let (scheme, _) = scheme::scheme_from_gram(&config).unwrap();
        assert_eq!(scheme.num_relations(), 4);
    }

    #[test]
    fn tight4_27_scheme() {
        let config = make_tight4_27().unwrap();
        let angles = config.angle_sets(0, 0);
        assert_eq!(
            angles.nontrivial,
            vec![
                ExactReal::from_rational(ratio(1, 4)),
                ExactReal::from_rational(ratio(-1, 2))
            ]
        );
        let (scheme, _) = scheme::scheme_from_gram(&config).unwrap();
        assert_eq!(scheme.num_relations(), 3);
        assert!(!config.fiber_flags(0, 0).antipodal);
    }

    #[test]
    fn e8_roots_census() {
        let config = make_e8_roots().to_configuration().unwrap();
        assert_eq!(config.len(), 240);
        assert_eq!(config.dimension(), 8);
        let angles = config.angle_sets(0, 0);
        assert_eq!(
            angles.nontrivial,
            vec![
                ExactReal::from_rational(ratio(1, 2)),
                ExactReal::zero(),
                ExactReal::from_rational(ratio(-1, 2)),
            ]
        );
        assert_eq!(angles.s_star(), 4);
    }

    #[test]
    fn mub_angle_set() {
        let config = make_mub(4).unwrap().to_configuration().unwrap();
        assert_eq!(config.len(), 24);
        let angles = config.angle_sets(0, 0);
        assert_eq!(
            angles.full,
            vec![
                ExactReal::from_rational(ratio(1, 2)),
                ExactReal::zero(),
                ExactReal::from_rational(ratio(-1, 2)),
                ExactReal::from_int(-1),
            ]
        );
        let (scheme, _) = scheme::scheme_from_gram(&config).unwrap();
        assert_eq!(scheme.num_relations(), 5);
        assert!(matches!(make_mub(6), Err(CatalogError::Unsupported(_, _))));
    }

    #[test]
    fn linked_system_parameters() {
        let spec = LinkedSystemSpec::new(16, 6, 2, 8).unwrap();
        assert_eq!(spec.sigma, 1);
        assert_eq!(spec.tau, 3);
        assert!(spec.satisfies_a1_star_zero());
        let wrong_f = LinkedSystemSpec::new(16, 6, 2, 4).unwrap();
        assert!(!wrong_f.satisfies_a1_star_zero());
    }

    #[test]
    fn linked_system_constructs_and_embeds() {
        let system = make_linked_system(2).unwrap();
        assert_eq!(system.num_points(), 128);
        let (config, algebra) = system.to_configuration().unwrap();
        assert_eq!(config.dimension(), 15);
        assert!(algebra.a1_star().is_zero());
        let incidence = system.incidence_matrix(0, 1);
        assert!(incidence
            .iter()
            .all(|row| row.iter().map(|&b| b as u64).sum::<u64>() == 6));
    }

    #[test]
    fn catalog_lookup() {
        assert!(by_name("hexagon").is_ok());
        assert!(by_name("cross-3").is_ok());
        assert!(matches!(
            by_name("nonesuch"),
            Err(CatalogError::UnknownName(_))
        ));
    }
}
