//! Relation partitions on finite sets: coherent-configuration verification,
//! association-scheme parameter tensors, eigenmatrices and Krein parameters,
//! and brute-force triple-regularity certification.
//!
//! Everything structural is decided by exhaustive counting over the class
//! matrix; the spectral data (eigenmatrices, multiplicities, Krein
//! parameters) is recovered exactly by factoring the characteristic
//! polynomial of an intersection matrix over the multi-quadratic tower and
//! then verified against the defining identities, so no numeric step is ever
//! trusted.

use crate::linalg::Matrix;
use crate::qfield::{ExactReal, Rational};
use crate::sphereset::GramConfiguration;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum SchemeError {
    #[error("malformed partition: {0}")]
    MalformedPartition(String),
    #[error("not a coherent configuration: relations ({i}, {j}) over ({k}) differ between pairs ({x1}, {y1}) and ({x2}, {y2})")]
    NotCoherent {
        i: usize,
        j: usize,
        k: usize,
        x1: usize,
        y1: usize,
        x2: usize,
        y2: usize,
    },
    #[error("operation requires a symmetric association scheme")]
    NotAssociationScheme,
    #[error("eigenvalue outside the supported quadratic tower ({0}); supply the eigenmatrix explicitly")]
    EigenvalueOutsideTower(String),
    #[error("eigenstructure verification failed: {0}")]
    EigenVerificationFailed(String),
    #[error("scheme is not Q-polynomial")]
    NotQPolynomial,
    #[error("base point out of range")]
    BadBasePoint,
    #[error(transparent)]
    SphereSet(#[from] crate::sphereset::SphereSetError),
}

/// A partition of X×X into indexed relations, stored as a class matrix.
#[derive(Clone)]
pub struct RelationPartition {
    n: usize,
    num_relations: usize,
    classes: Vec<u16>,
    involution: Vec<u16>,
    diagonal: Vec<bool>,
}

impl RelationPartition {
    /// Builds from a class matrix, checking the transpose and diagonal
    /// axioms. Relation indices must be contiguous from 0 and nonempty.
    pub fn from_class_matrix(n: usize, classes: Vec<u16>) -> Result<Self, SchemeError> {
        if classes.len() != n * n {
            return Err(SchemeError::MalformedPartition(format!(
                "expected {}x{} class matrix",
                n, n
            )));
        }
        let num_relations = classes.iter().copied().max().map(|m| m as usize + 1).unwrap_or(0);
        let mut seen = vec![false; num_relations];
        for &c in &classes {
            seen[c as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(SchemeError::MalformedPartition(format!(
                "relation {missing} is empty"
            )));
        }
        // Transpose axiom: the class of (y, x) must depend only on the class
        // of (x, y).
        let mut involution = vec![u16::MAX; num_relations];
        for x in 0..n {
            for y in 0..n {
                let c = classes[x * n + y] as usize;
                let t = classes[y * n + x];
                if involution[c] == u16::MAX {
                    involution[c] = t;
                } else if involution[c] != t {
                    return Err(SchemeError::MalformedPartition(format!(
                        "relation {c} has no well-defined transpose"
                    )));
                }
            }
        }
        // Diagonal axiom: a relation meeting the diagonal lies inside it.
        let mut on_diagonal = vec![false; num_relations];
        for x in 0..n {
            on_diagonal[classes[x * n + x] as usize] = true;
        }
        let mut diagonal_size = vec![0usize; num_relations];
        let mut total = vec![0usize; num_relations];
        for x in 0..n {
            for y in 0..n {
                let c = classes[x * n + y] as usize;
                total[c] += 1;
                if x == y {
                    diagonal_size[c] += 1;
                }
            }
        }
        for r in 0..num_relations {
            if on_diagonal[r] && diagonal_size[r] != total[r] {
                return Err(SchemeError::MalformedPartition(format!(
                    "relation {r} meets the diagonal but is not contained in it"
                )));
            }
        }
        Ok(RelationPartition {
            n,
            num_relations,
            classes,
            involution,
            diagonal: on_diagonal,
        })
    }

    /// Builds from explicit relation sets; rejects overlapping or
    /// non-covering families.
    pub fn from_relation_sets(
        n: usize,
        relations: Vec<Vec<(usize, usize)>>,
    ) -> Result<Self, SchemeError> {
        let mut classes = vec![u16::MAX; n * n];
        for (r, pairs) in relations.iter().enumerate() {
            for &(x, y) in pairs {
                if x >= n || y >= n {
                    return Err(SchemeError::MalformedPartition(format!(
                        "pair ({x}, {y}) outside the ground set"
                    )));
                }
                if classes[x * n + y] != u16::MAX {
                    return Err(SchemeError::MalformedPartition(format!(
                        "pair ({x}, {y}) covered twice"
                    )));
                }
                classes[x * n + y] = r as u16;
            }
        }
        if let Some(pos) = classes.iter().position(|&c| c == u16::MAX) {
            return Err(SchemeError::MalformedPartition(format!(
                "pair ({}, {}) not covered",
                pos / n,
                pos % n
            )));
        }
        Self::from_class_matrix(n, classes)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn class_of(&self, x: usize, y: usize) -> usize {
        self.classes[x * self.n + y] as usize
    }

    pub fn involution(&self, r: usize) -> usize {
        self.involution[r] as usize
    }

    pub fn is_diagonal(&self, r: usize) -> bool {
        self.diagonal[r]
    }

    pub fn classes(&self) -> &[u16] {
        &self.classes
    }

    /// Symmetric association scheme: one diagonal relation, labeled 0, and
    /// every relation self-paired.
    pub fn is_symmetric_scheme(&self) -> bool {
        self.diagonal.iter().filter(|&&d| d).count() == 1
            && self.diagonal[0]
            && (0..self.num_relations).all(|r| self.involution(r) == r)
    }
}

/// A verified coherent configuration: the partition plus its parameter
/// tensor p(i, j, k) = |{z : (x,z) ∈ R_i, (z,y) ∈ R_j}| for (x,y) ∈ R_k.
#[derive(Clone)]
pub struct CoherentConfig {
    pub partition: RelationPartition,
    tensor: Vec<u32>,
}

impl CoherentConfig {
    pub fn p(&self, i: usize, j: usize, k: usize) -> u32 {
        let r = self.partition.num_relations;
        self.tensor[(i * r + j) * r + k]
    }

    /// Valency of a relation whose left fiber carries diagonal relation d.
    pub fn valency(&self, i: usize) -> u32 {
        let d = (0..self.partition.num_relations)
            .find(|&r| {
                self.partition.is_diagonal(r) && self.p(i, self.partition.involution(i), r) > 0
            })
            .or_else(|| (0..self.partition.num_relations).find(|&r| self.partition.is_diagonal(r)))
            .expect("diagonal relation exists");
        self.p(i, self.partition.involution(i), d)
    }

    pub fn num_relations(&self) -> usize {
        self.partition.num_relations
    }

    pub fn len(&self) -> usize {
        self.partition.n
    }

    pub fn is_empty(&self) -> bool {
        self.partition.n == 0
    }

    /// Tensor entries as a sorted map for reporting.
    pub fn tensor_entries(&self) -> BTreeMap<(usize, usize, usize), u32> {
        let r = self.partition.num_relations;
        let mut out = BTreeMap::new();
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let v = self.p(i, j, k);
                    if v > 0 {
                        out.insert((i, j, k), v);
                    }
                }
            }
        }
        out
    }
}

/// Exhaustively verifies the counting axiom and returns the parameter
/// tensor. On failure, reports the lexicographically first witness.
pub fn verify_coherent(partition: &RelationPartition) -> Result<CoherentConfig, SchemeError> {
    let n = partition.n;
    let r = partition.num_relations;
    let cls = &partition.classes;
    let mut tensor = vec![0u32; r * r * r];
    let mut seen = vec![false; r];
    let mut first_pair = vec![(0usize, 0usize); r];
    // Canonical support per class: the (i, j) cells realized, so later pairs
    // compare against a sparse profile instead of the full r² grid.
    let mut support: Vec<Vec<usize>> = vec![Vec::new(); r];
    let mut profile = vec![0u32; r * r];
    let mut touched: Vec<usize> = Vec::with_capacity(n);
    for x in 0..n {
        let row_x = &cls[x * n..(x + 1) * n];
        for y in 0..n {
            let k = cls[x * n + y] as usize;
            touched.clear();
            for z in 0..n {
                let i = row_x[z] as usize;
                let j = cls[z * n + y] as usize;
                let cell = i * r + j;
                if profile[cell] == 0 {
                    touched.push(cell);
                }
                profile[cell] += 1;
            }
            let mut failed = None;
            if !seen[k] {
                seen[k] = true;
                first_pair[k] = (x, y);
                touched.sort_unstable();
                for &cell in &touched {
                    tensor[cell * r + k] = profile[cell];
                }
                support[k] = touched.clone();
            } else {
                // Equality of sparse profiles: same number of realized
                // cells, each matching the stored count. On a mismatch,
                // report the lexicographically smallest differing cell.
                let matches = touched.len() == support[k].len()
                    && touched.iter().all(|&cell| tensor[cell * r + k] == profile[cell]);
                if !matches {
                    let mut cells: Vec<usize> =
                        touched.iter().chain(support[k].iter()).copied().collect();
                    cells.sort_unstable();
                    cells.dedup();
                    failed = cells
                        .into_iter()
                        .find(|&cell| tensor[cell * r + k] != profile[cell]);
                }
            }
            for &cell in &touched {
                profile[cell] = 0;
            }
            if let Some(cell) = failed {
                let (x1, y1) = first_pair[k];
                return Err(SchemeError::NotCoherent {
                    i: cell / r,
                    j: cell % r,
                    k,
                    x1,
                    y1,
                    x2: x,
                    y2: y,
                });
            }
        }
    }
    Ok(CoherentConfig {
        partition: partition.clone(),
        tensor,
    })
}

/// Partitions a single-fiber configuration by its angle classes (class 0 the
/// diagonal, then angles in decreasing order) and verifies coherence.
/// Returns the configuration together with its indexed angle list.
pub fn scheme_from_gram(
    config: &GramConfiguration,
) -> Result<(CoherentConfig, Vec<ExactReal>), SchemeError> {
    if config.num_fibers() != 1 {
        return Err(SchemeError::MalformedPartition(
            "angle-class partitions require a single fiber".into(),
        ));
    }
    let angles = config.angle_sets(0, 0);
    let indexed = angles.indexed();
    let n = config.len();
    let mut classes = vec![0u16; n * n];
    for x in 0..n {
        for y in 0..n {
            let v = config.gram(x, y);
            let c = indexed.iter().position(|a| a == v).expect("angle classified");
            classes[x * n + y] = c as u16;
        }
    }
    let partition = RelationPartition::from_class_matrix(n, classes)?;
    let scheme = verify_coherent(&partition)?;
    Ok((scheme, indexed))
}

// ---------------------------------------------------------------------------
// Exact eigenstructure
// ---------------------------------------------------------------------------

/// Eigenmatrices, multiplicities and Krein parameters of a symmetric
/// association scheme, all exact and verified.
#[derive(Clone)]
pub struct SchemeAlgebra {
    pub n: usize,
    /// Number of classes d (relations 0..=d).
    pub num_classes: usize,
    pub valencies: Vec<u64>,
    pub multiplicities: Vec<u64>,
    /// First eigenmatrix, row h, column i: p_i(h).
    pub p_matrix: Matrix,
    /// Second eigenmatrix, row j, column h: the coefficient of A_j in N·E_h.
    pub q_matrix: Matrix,
    krein: Vec<ExactReal>,
    tensor: Vec<u32>,
}

impl SchemeAlgebra {
    /// Krein parameter q^k_{i,j}.
    pub fn krein(&self, i: usize, j: usize, k: usize) -> &ExactReal {
        let r = self.num_classes + 1;
        &self.krein[(i * r + j) * r + k]
    }

    /// Intersection number p^k_{i,j}.
    pub fn p(&self, i: usize, j: usize, k: usize) -> u32 {
        let r = self.num_classes + 1;
        self.tensor[(i * r + j) * r + k]
    }

    /// The dual eigenvalue θ*_j = Q(j, h) for eigenspace h = 1; meaningful
    /// after reordering to a Q-polynomial ordering.
    pub fn theta_star(&self, j: usize) -> &ExactReal {
        &self.q_matrix[(j, 1)]
    }

    /// The Krein parameter q^1_{1,1} in the current eigenspace ordering.
    pub fn a1_star(&self) -> &ExactReal {
        self.krein(1, 1, 1)
    }

    /// Searches for an eigenspace ordering that makes the scheme
    /// Q-polynomial (the Krein matrix of E_1 tridiagonal with a nonzero
    /// superdiagonal). Returns the permutation of eigenspace indices.
    pub fn q_polynomial_ordering(&self) -> Option<Vec<usize>> {
        let d = self.num_classes;
        'candidates: for g in 1..=d {
            let mut order = vec![0usize];
            let mut used = vec![false; d + 1];
            used[0] = true;
            let mut current = 0usize;
            for _ in 0..d {
                let mut next = None;
                for k in 0..=d {
                    if used[k] || self.krein(g, current, k).is_zero() {
                        continue;
                    }
                    if next.is_some() {
                        continue 'candidates;
                    }
                    next = Some(k);
                }
                let k = match next {
                    Some(k) => k,
                    None => continue 'candidates,
                };
                order.push(k);
                used[k] = true;
                current = k;
            }
            if order[1] != g {
                continue;
            }
            // Tridiagonality of the Krein matrix of E_g in this order.
            let pos: BTreeMap<usize, usize> =
                order.iter().enumerate().map(|(p, &h)| (h, p)).collect();
            let tridiagonal = (0..=d).all(|j| {
                (0..=d).all(|k| {
                    self.krein(g, j, k).is_zero() || pos[&j].abs_diff(pos[&k]) <= 1
                })
            });
            if tridiagonal {
                return Some(order);
            }
        }
        None
    }

    /// The algebra with eigenspaces permuted by `order` (new index -> old).
    pub fn reordered(&self, order: &[usize]) -> SchemeAlgebra {
        let d = self.num_classes;
        assert_eq!(order.len(), d + 1);
        let r = d + 1;
        let p_matrix = Matrix::from_fn(r, r, |h, i| self.p_matrix[(order[h], i)].clone());
        let q_matrix = Matrix::from_fn(r, r, |j, h| self.q_matrix[(j, order[h])].clone());
        let mut krein = vec![ExactReal::zero(); r * r * r];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    krein[(i * r + j) * r + k] =
                        self.krein(order[i], order[j], order[k]).clone();
                }
            }
        }
        SchemeAlgebra {
            n: self.n,
            num_classes: d,
            valencies: self.valencies.clone(),
            multiplicities: order.iter().map(|&h| self.multiplicities[h]).collect(),
            p_matrix,
            q_matrix,
            krein,
            tensor: self.tensor.clone(),
        }
    }

    /// Spherical embedding through eigenspace h: Gram entries
    /// Q(class(x,y), h) / Q(0, h) on the scheme's ground set, ambient
    /// dimension the multiplicity m_h.
    pub fn eigenspace_embedding(
        &self,
        scheme: &CoherentConfig,
        h: usize,
    ) -> Result<GramConfiguration, SchemeError> {
        let n = scheme.len();
        let theta0_inv = self.q_matrix[(0, h)]
            .inv()
            .map_err(|_| SchemeError::EigenVerificationFailed("zero multiplicity".into()))?;
        let values: Vec<ExactReal> = (0..=self.num_classes)
            .map(|j| &self.q_matrix[(j, h)] * &theta0_inv)
            .collect();
        let gram: Vec<Vec<ExactReal>> = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| values[scheme.partition.class_of(x, y)].clone())
                    .collect()
            })
            .collect();
        let config = GramConfiguration::new(
            Some(self.multiplicities[h] as u32),
            vec![0; n],
            gram,
        )?;
        if (config.dimension() as u64) != self.multiplicities[h] {
            return Err(SchemeError::EigenVerificationFailed(
                "embedding rank does not match the multiplicity".into(),
            ));
        }
        Ok(config)
    }
}

/// Computes the exact eigenstructure of a symmetric association scheme.
///
/// Eigenvalues are obtained by factoring the characteristic polynomial of an
/// intersection-matrix combination over ℤ and quadratic extensions; the
/// resulting eigenmatrices are then verified exactly (P·Q = N·I, idempotency
/// and orthogonality of the reconstructed idempotents), so a wrong guess can
/// only surface as an error, never as silent bad data.
pub fn eigen_structure(scheme: &CoherentConfig) -> Result<SchemeAlgebra, SchemeError> {
    if !scheme.partition.is_symmetric_scheme() {
        return Err(SchemeError::NotAssociationScheme);
    }
    let d = scheme.num_relations() - 1;
    let r = d + 1;
    let n = scheme.len();
    let valencies: Vec<u64> = (0..r).map(|i| scheme.valency(i) as u64).collect();

    // Try intersection-matrix combinations until one has d+1 distinct
    // eigenvalues; B_1 alone usually does.
    let mut rows: Option<Vec<Vec<ExactReal>>> = None;
    for &t in &[1i64, 2, 3, 5, 7, 11, 13] {
        let mut b_gen = vec![vec![0i64; r]; r];
        for i in 1..r {
            let weight = t.pow((i - 1) as u32);
            for j in 0..r {
                for k in 0..r {
                    b_gen[j][k] += weight * scheme.p(i, j, k) as i64;
                }
            }
        }
        let char_poly = char_poly_int(&b_gen);
        let roots = match exact_integer_poly_roots(char_poly) {
            Ok(roots) => roots,
            Err(e) => {
                if t == 13 {
                    return Err(e);
                }
                continue;
            }
        };
        if roots.iter().any(|(_, m)| *m > 1) || roots.len() != r {
            continue;
        }
        let b_exact = Matrix::from_fn(r, r, |j, k| ExactReal::from_int(b_gen[j][k]));
        let mut eigenvectors = Vec::with_capacity(r);
        for (theta, _) in &roots {
            let mut shifted = b_exact.clone();
            for i in 0..r {
                shifted[(i, i)] = &shifted[(i, i)] - theta;
            }
            let v = shifted.kernel_vector().ok_or_else(|| {
                SchemeError::EigenVerificationFailed("eigenvalue with defective kernel".into())
            })?;
            if !v[0].is_one() {
                return Err(SchemeError::EigenVerificationFailed(
                    "eigenvector not normalizable at the diagonal class".into(),
                ));
            }
            eigenvectors.push(v);
        }
        rows = Some(eigenvectors);
        break;
    }
    let mut rows = rows.ok_or_else(|| {
        SchemeError::EigenvalueOutsideTower("no separating intersection combination".into())
    })?;

    // The Perron row carries the valencies; put it first, order the rest
    // canonically by decreasing eigenvalue rows.
    let valency_row: Vec<ExactReal> = valencies
        .iter()
        .map(|&k| ExactReal::from_int(k as i64))
        .collect();
    let h0 = rows
        .iter()
        .position(|v| *v == valency_row)
        .ok_or_else(|| SchemeError::EigenVerificationFailed("missing principal row".into()))?;
    rows.swap(0, h0);
    rows[1..].sort_by(|a, b| b.partial_cmp(a).unwrap());

    let p_matrix = Matrix::from_fn(r, r, |h, i| rows[h][i].clone());

    // m_h = N / Σ_i p_i(h)² / k_i, which must come out a positive integer.
    let mut multiplicities = Vec::with_capacity(r);
    for row in &rows {
        let mut denom = ExactReal::zero();
        for (i, v) in row.iter().enumerate() {
            let sq = v * v;
            let k_inv = ExactReal::from_int(valencies[i] as i64)
                .inv()
                .expect("positive valency");
            denom += &(&sq * &k_inv);
        }
        let m = &ExactReal::from_int(n as i64) * &denom.inv().expect("nonzero norm");
        let m = m
            .as_integer()
            .and_then(|b| b.to_u64())
            .ok_or_else(|| {
                SchemeError::EigenVerificationFailed("non-integral multiplicity".into())
            })?;
        multiplicities.push(m);
    }
    if multiplicities.iter().sum::<u64>() != n as u64 {
        return Err(SchemeError::EigenVerificationFailed(
            "multiplicities do not sum to the ground-set size".into(),
        ));
    }

    // Q(j, h) = m_h p_j(h) / k_j, then P·Q = N·I exactly.
    let q_matrix = Matrix::from_fn(r, r, |j, h| {
        let k_inv = ExactReal::from_int(valencies[j] as i64)
            .inv()
            .expect("positive valency");
        &(&ExactReal::from_int(multiplicities[h] as i64) * &p_matrix[(h, j)]) * &k_inv
    });
    let product = p_matrix.mul(&q_matrix);
    let n_identity = Matrix::from_fn(r, r, |i, j| {
        if i == j {
            ExactReal::from_int(n as i64)
        } else {
            ExactReal::zero()
        }
    });
    if product != n_identity {
        return Err(SchemeError::EigenVerificationFailed("P·Q != N·I".into()));
    }

    // Idempotency and orthogonality of E_h = (1/N) Σ_j Q(j,h) A_j, checked
    // in the coefficient algebra A_j·A_k = Σ_m p^m_{j,k} A_m.
    let n_inv = ExactReal::from_int(n as i64).inv().expect("nonzero");
    for g in 0..r {
        for h in 0..r {
            for m in 0..r {
                let mut acc = ExactReal::zero();
                for j in 0..r {
                    for k in 0..r {
                        let p = scheme.p(j, k, m);
                        if p == 0 {
                            continue;
                        }
                        let term = &(&q_matrix[(j, g)] * &q_matrix[(k, h)])
                            * &ExactReal::from_int(p as i64);
                        acc += &term;
                    }
                }
                acc = &(&acc * &n_inv) * &n_inv;
                let expected = if g == h {
                    &q_matrix[(m, h)] * &n_inv
                } else {
                    ExactReal::zero()
                };
                if acc != expected {
                    return Err(SchemeError::EigenVerificationFailed(format!(
                        "idempotent identity fails at E_{g}·E_{h}, class {m}"
                    )));
                }
            }
        }
    }

    // Krein parameters q^k_{i,j} = (1/N) Σ_m P(k,m) Q(m,i) Q(m,j).
    let mut krein = vec![ExactReal::zero(); r * r * r];
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let mut acc = ExactReal::zero();
                for m in 0..r {
                    acc += &(&(&p_matrix[(k, m)] * &q_matrix[(m, i)]) * &q_matrix[(m, j)]);
                }
                krein[(i * r + j) * r + k] = &acc * &n_inv;
            }
        }
    }

    Ok(SchemeAlgebra {
        n,
        num_classes: d,
        valencies,
        multiplicities,
        p_matrix,
        q_matrix,
        krein,
        tensor: scheme.tensor.clone(),
    })
}

/// The identity (Qᵀ·B_i)(h, i) = k_i·q_h(i)²/m_h, checked exactly for all
/// h and i.
pub fn check_lemma41(algebra: &SchemeAlgebra) -> bool {
    let r = algebra.num_classes + 1;
    for h in 0..r {
        for i in 0..r {
            // (Qᵀ B_i)(h, i) = Σ_j Q(j, h) p^i_{i,j}
            let mut lhs = ExactReal::zero();
            for j in 0..r {
                let p = algebra.p(i, j, i);
                if p == 0 {
                    continue;
                }
                lhs += &(&algebra.q_matrix[(j, h)] * &ExactReal::from_int(p as i64));
            }
            let q_hi = &algebra.q_matrix[(i, h)];
            let rhs = &(&ExactReal::from_int(algebra.valencies[i] as i64) * &(q_hi * q_hi))
                * &ExactReal::from_int(algebra.multiplicities[h] as i64)
                    .inv()
                    .expect("positive multiplicity");
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// For a Q-polynomially ordered algebra: whether the derived design of
/// class i of the first-eigenspace embedding is a 2-design, decided by the
/// exact vanishing of a₁*·(θ*_i + 1). Requires θ*_i ≠ -θ*_0.
pub fn derived_two_design_criterion(
    algebra: &SchemeAlgebra,
    class: usize,
) -> Result<bool, SchemeError> {
    let theta0 = algebra.theta_star(0);
    let theta_i = algebra.theta_star(class);
    if *theta_i == -theta0 {
        return Err(SchemeError::EigenVerificationFailed(
            "criterion undefined at θ*_i = -θ*_0".into(),
        ));
    }
    let product = algebra.a1_star() * &(theta_i + &ExactReal::one());
    Ok(product.is_zero())
}

// ---------------------------------------------------------------------------
// Triple regularity
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub enum TripleMode {
    Exhaustive,
    Sampled { seed: u64, trials: u64 },
}

/// The six-index tensor of a triply regular scheme: for (x,y) ∈ R_i,
/// (y,z) ∈ R_j, (z,x) ∈ R_k, profile entry (l, m, n) counts w with
/// (w,x) ∈ R_m, (w,y) ∈ R_n, (w,z) ∈ R_l.
#[derive(Debug)]
pub struct TripleTensor {
    pub num_relations: usize,
    pub profiles: BTreeMap<(u16, u16, u16), Vec<u64>>,
    /// False for sampled runs: absence of a witness is then not a proof.
    pub conclusive: bool,
    pub triples_checked: u64,
}

impl TripleTensor {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize, m: usize, n: usize) -> Option<u64> {
        let r = self.num_relations;
        self.profiles
            .get(&(i as u16, j as u16, k as u16))
            .map(|p| p[(l * r + m) * r + n])
    }
}

/// Two base triples in the same relation classes with different w-profiles.
#[derive(Debug, Clone)]
pub struct TripleWitness {
    pub classes: (usize, usize, usize),
    pub first: (usize, usize, usize),
    pub second: (usize, usize, usize),
}

/// Certifies triple regularity by counting w-profiles over base triples.
///
/// Exhaustive mode scans all ordered triples (the canonical profile is the
/// one of the lexicographically first triple per class signature) and is a
/// proof; sampled mode checks a seeded random subset and is flagged
/// inconclusive. On failure returns the lexicographically smallest witness.
pub fn triple_regular(
    scheme: &CoherentConfig,
    mode: TripleMode,
) -> Result<TripleTensor, Box<TripleWitness>> {
    assert!(
        scheme.partition.is_symmetric_scheme(),
        "triple regularity is defined for symmetric association schemes"
    );
    let n = scheme.len();
    let r = scheme.num_relations();
    let cls = scheme.partition.classes();
    match mode {
        TripleMode::Exhaustive => {
            // Pass 1: canonical profile per class triple, from the first
            // base triple in lexicographic order.
            let mut first_triple: BTreeMap<(u16, u16, u16), (usize, usize, usize)> =
                BTreeMap::new();
            for x in 0..n {
                for y in 0..n {
                    let i = cls[x * n + y];
                    for z in 0..n {
                        let j = cls[y * n + z];
                        let k = cls[z * n + x];
                        first_triple.entry((i, j, k)).or_insert((x, y, z));
                    }
                }
            }
            let mut profiles = BTreeMap::new();
            for (&key, &(x, y, z)) in &first_triple {
                profiles.insert(key, w_profile(cls, n, r, x, y, z));
            }
            // Pass 2: compare every triple, in parallel over x.
            let witness = (0..n)
                .into_par_iter()
                .map(|x| {
                    let mut buffer = vec![0u64; r * r * r];
                    let mut local: Option<(usize, usize, usize, u16, u16, u16)> = None;
                    'scan: for y in 0..n {
                        let i = cls[x * n + y];
                        for z in 0..n {
                            let j = cls[y * n + z];
                            let k = cls[z * n + x];
                            w_profile_into(cls, n, r, x, y, z, &mut buffer);
                            if buffer != profiles[&(i, j, k)][..] {
                                local = Some((x, y, z, i, j, k));
                                break 'scan;
                            }
                        }
                    }
                    local
                })
                .reduce(
                    || None,
                    |a, b| match (a, b) {
                        (Some(wa), Some(wb)) => Some(std::cmp::min(wa, wb)),
                        (a, b) => a.or(b),
                    },
                );
            if let Some((x, y, z, i, j, k)) = witness {
                return Err(Box::new(TripleWitness {
                    classes: (i as usize, j as usize, k as usize),
                    first: first_triple[&(i, j, k)],
                    second: (x, y, z),
                }));
            }
            Ok(TripleTensor {
                num_relations: r,
                profiles,
                conclusive: true,
                triples_checked: (n as u64).pow(3),
            })
        }
        TripleMode::Sampled { seed, trials } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut profiles: BTreeMap<(u16, u16, u16), Vec<u64>> = BTreeMap::new();
            let mut first_triple: BTreeMap<(u16, u16, u16), (usize, usize, usize)> =
                BTreeMap::new();
            for _ in 0..trials {
                let x = rng.gen_range(0..n);
                let y = rng.gen_range(0..n);
                let z = rng.gen_range(0..n);
                let key = (cls[x * n + y], cls[y * n + z], cls[z * n + x]);
                let profile = w_profile(cls, n, r, x, y, z);
                match profiles.get(&key) {
                    None => {
                        profiles.insert(key, profile);
                        first_triple.insert(key, (x, y, z));
                    }
                    Some(canonical) => {
                        if *canonical != profile {
                            return Err(Box::new(TripleWitness {
                                classes: (key.0 as usize, key.1 as usize, key.2 as usize),
                                first: first_triple[&key],
                                second: (x, y, z),
                            }));
                        }
                    }
                }
            }
            Ok(TripleTensor {
                num_relations: r,
                profiles,
                conclusive: false,
                triples_checked: trials,
            })
        }
    }
}

fn w_profile(cls: &[u16], n: usize, r: usize, x: usize, y: usize, z: usize) -> Vec<u64> {
    let mut buffer = vec![0u64; r * r * r];
    w_profile_into(cls, n, r, x, y, z, &mut buffer);
    buffer
}

#[inline]
fn w_profile_into(
    cls: &[u16],
    n: usize,
    r: usize,
    x: usize,
    y: usize,
    z: usize,
    buffer: &mut [u64],
) {
    buffer.iter_mut().for_each(|c| *c = 0);
    let row_x = &cls[x * n..(x + 1) * n];
    let row_y = &cls[y * n..(y + 1) * n];
    let row_z = &cls[z * n..(z + 1) * n];
    for w in 0..n {
        let m = row_x[w] as usize;
        let nn = row_y[w] as usize;
        let l = row_z[w] as usize;
        buffer[(l * r + m) * r + nn] += 1;
    }
}

/// The subconstituent partition at a base point: ground set X \ {z},
/// cells labeled by (class(z,x), class(z,y), class(x,y)). Triple regularity
/// is equivalent to every such partition being a coherent configuration
/// with z-independent parameters.
pub fn subconstituent_partition(
    scheme: &CoherentConfig,
    z: usize,
) -> Result<RelationPartition, SchemeError> {
    let n = scheme.len();
    if z >= n {
        return Err(SchemeError::BadBasePoint);
    }
    let cls = scheme.partition.classes();
    let points: Vec<usize> = (0..n).filter(|&x| x != z).collect();
    let m = points.len();
    let mut labels: BTreeMap<(u16, u16, u16), u16> = BTreeMap::new();
    let mut classes = vec![0u16; m * m];
    for (a, &x) in points.iter().enumerate() {
        for (b, &y) in points.iter().enumerate() {
            let key = (cls[z * n + x], cls[z * n + y], cls[x * n + y]);
            let next = labels.len() as u16;
            let id = *labels.entry(key).or_insert(next);
            classes[a * m + b] = id;
        }
    }
    RelationPartition::from_class_matrix(m, classes)
}

// ---------------------------------------------------------------------------
// Characteristic polynomials over ℤ and their roots in the quadratic tower
// ---------------------------------------------------------------------------

type Poly = Vec<Rational>;

fn poly_eval(poly: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for c in poly.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Poly {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    out
}

/// det(B - x·I) by recursive expansion over column subsets.
fn char_poly_int(b: &[Vec<i64>]) -> Poly {
    let n = b.len();
    let entries: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = Rational::from(BigInt::from(b[i][j]));
                    if i == j {
                        vec![c, -Rational::one()]
                    } else {
                        vec![c]
                    }
                })
                .collect()
        })
        .collect();
    let mut memo: std::collections::HashMap<u64, Poly> = std::collections::HashMap::new();
    fn minor(
        entries: &[Vec<Poly>],
        n: usize,
        row: usize,
        mask: u64,
        memo: &mut std::collections::HashMap<u64, Poly>,
    ) -> Poly {
        if row == n {
            return vec![Rational::one()];
        }
        if let Some(hit) = memo.get(&mask) {
            return hit.clone();
        }
        let mut acc = vec![Rational::zero()];
        let mut sign = Rational::one();
        for col in 0..n {
            if mask & (1 << col) != 0 {
                continue;
            }
            let sub = minor(entries, n, row + 1, mask | (1 << col), memo);
            let term = poly_mul(&entries[row][col], &sub);
            if acc.len() < term.len() {
                acc.resize(term.len(), Rational::zero());
            }
            for (i, c) in term.into_iter().enumerate() {
                acc[i] += &sign * c;
            }
            sign = -sign;
        }
        memo.insert(mask, acc.clone());
        acc
    }
    minor(&entries, n, 0, 0, &mut memo)
}

/// All real roots of an integer-coefficient polynomial, as tower elements
/// with multiplicities. Supported factor shapes: integer roots plus residual
/// factors of degree two or a quartic splitting into integer quadratics.
fn exact_integer_poly_roots(poly: Poly) -> Result<Vec<(ExactReal, usize)>, SchemeError> {
    // Normalize to a monic integer polynomial (characteristic polynomials
    // have leading coefficient ±1).
    let mut coeffs: Vec<BigInt> = poly
        .iter()
        .map(|c| {
            if !c.is_integer() {
                panic!("characteristic polynomial with non-integer coefficient");
            }
            c.to_integer()
        })
        .collect();
    while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
        coeffs.pop();
    }
    if coeffs.last().map(|c| c.is_negative()).unwrap_or(false) {
        for c in &mut coeffs {
            *c = -c.clone();
        }
    }
    if *coeffs.last().unwrap() != BigInt::one() {
        return Err(SchemeError::EigenvalueOutsideTower(
            "non-monic characteristic polynomial".into(),
        ));
    }
    let mut roots: Vec<(ExactReal, usize)> = Vec::new();
    let add_root = |roots: &mut Vec<(ExactReal, usize)>, r: ExactReal| {
        if let Some(entry) = roots.iter_mut().find(|(e, _)| *e == r) {
            entry.1 += 1;
        } else {
            roots.push((r, 1));
        }
    };

    // Integer roots: bounded by 1 + max |a_i| (Cauchy), must divide a_0.
    loop {
        if coeffs.len() <= 1 {
            return Ok(roots);
        }
        let rational: Poly = coeffs.iter().map(|c| Rational::from(c.clone())).collect();
        if coeffs[0].is_zero() {
            add_root(&mut roots, ExactReal::zero());
            coeffs.remove(0);
            continue;
        }
        let bound = coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap()
            .to_u64()
            .ok_or_else(|| {
                SchemeError::EigenvalueOutsideTower("root bound overflow".into())
            })?
            + 1;
        let mut found = None;
        'search: for mag in 1..=bound {
            let m = BigInt::from(mag);
            if (&coeffs[0] % &m).is_zero() {
                for cand in [BigInt::from(mag), BigInt::from(-(mag as i64))] {
                    if poly_eval(&rational, &Rational::from(cand.clone())).is_zero() {
                        found = Some(cand);
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(root) => {
                // Synthetic division by (x - root).
                let mut quotient = vec![BigInt::zero(); coeffs.len() - 1];
                let mut carry = BigInt::zero();
                for i in (0..coeffs.len() - 1).rev() {
                    carry = &coeffs[i + 1] + &carry * &root;
                    quotient[i] = carry.clone();
                }
                add_root(
                    &mut roots,
                    ExactReal::from_rational(Rational::from(root)),
                );
                coeffs = quotient;
            }
            None => break,
        }
    }

    // Residual with no integer roots: quadratic, or quartic that splits into
    // two integer quadratics.
    let degree = coeffs.len() - 1;
    match degree {
        2 => {
            for root in quadratic_roots(&coeffs[1], &coeffs[0])? {
                add_root(&mut roots, root);
            }
            Ok(roots)
        }
        4 => {
            let (q1, q2) = split_quartic(&coeffs).ok_or_else(|| {
                SchemeError::EigenvalueOutsideTower("irreducible quartic factor".into())
            })?;
            for (b, c) in [q1, q2] {
                for root in quadratic_roots(&b, &c)? {
                    add_root(&mut roots, root);
                }
            }
            Ok(roots)
        }
        _ => Err(SchemeError::EigenvalueOutsideTower(format!(
            "residual factor of degree {degree}"
        ))),
    }
}

/// Roots of the monic x² + bx + c with no rational roots.
fn quadratic_roots(b: &BigInt, c: &BigInt) -> Result<[ExactReal; 2], SchemeError> {
    let disc = b * b - BigInt::from(4) * c;
    if !disc.is_positive() {
        return Err(SchemeError::EigenvalueOutsideTower(
            "complex eigenvalue pair".into(),
        ));
    }
    let disc = disc.to_u64().ok_or_else(|| {
        SchemeError::EigenvalueOutsideTower("discriminant overflow".into())
    })?;
    let half = Rational::new(BigInt::from(1), BigInt::from(2));
    let base = ExactReal::from_rational(Rational::from(-b.clone()) * &half);
    let radical = ExactReal::from_term(half, disc);
    Ok([&base + &radical, &base - &radical])
}

/// Splits a monic integer quartic into two monic integer quadratics
/// (x² + px + q)(x² + rx + s), if possible.
fn split_quartic(coeffs: &[BigInt]) -> Option<((BigInt, BigInt), (BigInt, BigInt))> {
    let (a0, a1, a2, a3) = (&coeffs[0], &coeffs[1], &coeffs[2], &coeffs[3]);
    let bound = coeffs
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap()
        .to_i64()
        .unwrap_or(i64::MAX / 4)
        .min(1 << 22)
        + 1;
    for p_mag in 0..=(2 * bound) {
        for p in [BigInt::from(p_mag), BigInt::from(-p_mag)] {
            let r = a3 - &p;
            let u = a2 - &p * &r; // q + s
            if p == r {
                // q + s = u, q·s = a0, with p(q + s) = a1.
                if &p * &u != *a1 {
                    continue;
                }
                let disc = &u * &u - BigInt::from(4) * a0;
                if disc.is_negative() {
                    continue;
                }
                let root = disc.sqrt();
                if &root * &root != disc {
                    continue;
                }
                let two = BigInt::from(2);
                let q = (&u + &root) / &two;
                let s = (&u - &root) / &two;
                if &q + &s == u && &q * &s == *a0 {
                    return Some(((p.clone(), q), (r, s)));
                }
            } else {
                // Linear system q + s = u, r·q + p·s = a1.
                let det = &r - &p;
                let q_num = a1 - &p * &u;
                if (&q_num % &det).is_zero() {
                    let q = q_num / &det;
                    let s = &u - &q;
                    if &q * &s == *a0 {
                        return Some(((p.clone(), q), (r, s)));
                    }
                }
            }
            if p_mag == 0 {
                break;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn complete_graph_partition(n: usize) -> RelationPartition {
        let mut classes = vec![1u16; n * n];
        for x in 0..n {
            classes[x * n + x] = 0;
        }
        RelationPartition::from_class_matrix(n, classes).unwrap()
    }

    fn cycle_distance_partition(n: usize) -> RelationPartition {
        let mut classes = vec![0u16; n * n];
        for x in 0..n {
            for y in 0..n {
                let d = (x as i64 - y as i64).rem_euclid(n as i64) as usize;
                classes[x * n + y] = d.min(n - d) as u16;
            }
        }
        RelationPartition::from_class_matrix(n, classes).unwrap()
    }

    #[test]
    fn trivial_scheme_on_k4() {
        let scheme = verify_coherent(&complete_graph_partition(4)).unwrap();
        assert_eq!(scheme.p(1, 1, 1), 2);
        assert_eq!(scheme.valency(1), 3);
    }

    #[test]
    fn pentagon_distance_scheme() {
        let scheme = verify_coherent(&cycle_distance_partition(5)).unwrap();
        assert!(scheme.partition.is_symmetric_scheme());
        assert_eq!(scheme.valency(1), 2);
        assert_eq!(scheme.valency(2), 2);
    }

    #[test]
    fn path_graph_fails() {
        // P_3 adjacency: 0-1-2. Diagonal, edges, non-edges.
        let edges = vec![(0, 1), (1, 0), (1, 2), (2, 1)];
        let diag = vec![(0, 0), (1, 1), (2, 2)];
        let non = vec![(0, 2), (2, 0)];
        let partition = RelationPartition::from_relation_sets(3, vec![diag, edges, non]).unwrap();
        assert!(matches!(
            verify_coherent(&partition),
            Err(SchemeError::NotCoherent { .. })
        ));
    }

    #[test]
    fn malformed_partitions_rejected() {
        let overlap = RelationPartition::from_relation_sets(
            2,
            vec![vec![(0, 0), (1, 1), (0, 1), (1, 0)], vec![(0, 1)]],
        );
        assert!(matches!(overlap, Err(SchemeError::MalformedPartition(_))));
        let gap = RelationPartition::from_relation_sets(2, vec![vec![(0, 0), (1, 1)]]);
        assert!(matches!(gap, Err(SchemeError::MalformedPartition(_))));
    }

    #[test]
    fn icosahedron_scheme_from_gram() {
        let config = catalog::make_icosahedron().to_configuration().unwrap();
        let (scheme, indexed) = scheme_from_gram(&config).unwrap();
        assert_eq!(scheme.num_relations(), 4);
        assert_eq!(indexed.len(), 4);
        assert!(scheme.partition.is_symmetric_scheme());
    }

    #[test]
    fn trivial_scheme_eigenmatrix() {
        let scheme = verify_coherent(&complete_graph_partition(6)).unwrap();
        let algebra = eigen_structure(&scheme).unwrap();
        assert_eq!(algebra.p_matrix[(0, 1)], ExactReal::from_int(5));
        assert_eq!(algebra.p_matrix[(1, 1)], ExactReal::from_int(-1));
        assert_eq!(algebra.multiplicities, vec![1, 5]);
        assert!(check_lemma41(&algebra));
    }

    #[test]
    fn pentagon_eigen_structure_has_golden_ratio() {
        let scheme = verify_coherent(&cycle_distance_partition(5)).unwrap();
        let algebra = eigen_structure(&scheme).unwrap();
        // Eigenvalues of C5 adjacency: 2, (−1±√5)/2.
        let expected = ExactReal::from_rational(crate::qfield::ratio(-1, 2))
            + ExactReal::from_term(crate::qfield::ratio(1, 2), 5);
        assert!(
            algebra.p_matrix[(1, 1)] == expected || algebra.p_matrix[(2, 1)] == expected
        );
        assert!(check_lemma41(&algebra));
        // Krein parameters of a scheme are nonnegative.
        let r = algebra.num_classes + 1;
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    assert!(algebra.krein(i, j, k).sign() >= 0);
                }
            }
        }
    }

    #[test]
    fn icosahedron_eigen_and_embedding() {
        let config = catalog::make_icosahedron().to_configuration().unwrap();
        let (scheme, _) = scheme_from_gram(&config).unwrap();
        let algebra = eigen_structure(&scheme).unwrap();
        assert_eq!(algebra.multiplicities.iter().sum::<u64>(), 12);
        assert!(check_lemma41(&algebra));
        let order = algebra.q_polynomial_ordering().expect("Q-polynomial");
        let ordered = algebra.reordered(&order);
        // The 3-dimensional eigenspace recovers the sphere embedding.
        assert_eq!(ordered.multiplicities[1], 3);
        let embedded = ordered.eigenspace_embedding(&scheme, 1).unwrap();
        assert_eq!(embedded.dimension(), 3);
        for x in 0..12 {
            for y in 0..12 {
                assert_eq!(embedded.gram(x, y), config.gram(x, y));
            }
        }
    }

    #[test]
    fn pentagon_triple_regular() {
        let scheme = verify_coherent(&cycle_distance_partition(5)).unwrap();
        let tensor = triple_regular(&scheme, TripleMode::Exhaustive).unwrap();
        assert!(tensor.conclusive);
        assert_eq!(tensor.triples_checked, 125);
        // All-diagonal base triple: profile counts each w once by its class
        // relative to x = y = z.
        assert_eq!(tensor.get(0, 0, 0, 0, 0, 0), Some(1));
        assert_eq!(tensor.get(0, 0, 0, 1, 1, 1), Some(2));
    }

    #[test]
    fn paley13_not_triply_regular() {
        // The Paley scheme on 13 points is a scheme but not triply regular:
        // ordered adjacency triples split into several orbits with
        // different w-profiles.
        let squares: Vec<bool> = {
            let mut s = vec![false; 13];
            for x in 1..13u32 {
                s[(x * x % 13) as usize] = true;
            }
            s
        };
        let mut classes = vec![0u16; 13 * 13];
        for x in 0..13usize {
            for y in 0..13usize {
                classes[x * 13 + y] = if x == y {
                    0
                } else if squares[(x + 13 - y) % 13] {
                    1
                } else {
                    2
                };
            }
        }
        let partition = RelationPartition::from_class_matrix(13, classes).unwrap();
        let scheme = verify_coherent(&partition).unwrap();
        let witness = triple_regular(&scheme, TripleMode::Exhaustive).unwrap_err();
        assert_eq!(witness.first.0, 0);
        // A sampled run with enough trials finds a violation too.
        assert!(triple_regular(
            &scheme,
            TripleMode::Sampled {
                seed: 1,
                trials: 100_000
            }
        )
        .is_err());
    }

    #[test]
    fn sampled_mode_is_flagged() {
        let scheme = verify_coherent(&cycle_distance_partition(5)).unwrap();
        let tensor = triple_regular(
            &scheme,
            TripleMode::Sampled {
                seed: 7,
                trials: 2000,
            },
        )
        .unwrap();
        assert!(!tensor.conclusive);
    }

    #[test]
    fn subconstituents_of_triply_regular_scheme_cohere() {
        let scheme = verify_coherent(&cycle_distance_partition(5)).unwrap();
        for z in 0..5 {
            let partition = subconstituent_partition(&scheme, z).unwrap();
            verify_coherent(&partition).unwrap();
        }
    }

    #[test]
    fn quartic_splitting() {
        // (x² - 2)(x² - 3) = x⁴ - 5x² + 6
        let coeffs = vec![
            BigInt::from(6),
            BigInt::from(0),
            BigInt::from(-5),
            BigInt::from(0),
            BigInt::from(1),
        ];
        let ((p, q), (r, s)) = split_quartic(&coeffs).unwrap();
        let prod = |b: &BigInt, c: &BigInt, x: i64| x * x + b.to_i64().unwrap() * x + c.to_i64().unwrap();
        for x in -3..=3 {
            assert_eq!(
                prod(&p, &q, x) * prod(&r, &s, x),
                x.pow(4) - 5 * x.pow(2) + 6
            );
        }
    }
}
