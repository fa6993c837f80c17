//! Parameter derivation for unions of spherical designs.
//!
//! For fibers X_1, ..., X_n on a common sphere that are pairwise equal or
//! disjoint (and likewise after negation), the intersection counts
//! p^j_{α,β}(x, y) satisfy exact linear systems whose coefficient matrices
//! are Kronecker products of Vandermonde matrices in the two angle sets.
//! When, for a fiber triple (i, j, k), the strength t_j covers the equation
//! degrees — or falls short by one or two but enough counts are constant
//! ("pinned") — the systems determine every parameter from angle data alone,
//! and the union carries a coherent configuration.
//!
//! This module classifies triples into those three cases, assembles and
//! solves the systems over [`ExactReal`], and certifies the resulting
//! configuration two independent ways: exhaustive counting re-verification
//! and cell-by-cell comparison of solver output against counted values.
//! [`corollary_pipeline`] runs the whole machine on the derived
//! (subconstituent) designs of a spherical association scheme at every base
//! point, which certifies triple regularity of the scheme.
//!
//! The Vandermonde-minor identities used by the nonsingularity argument are
//! exposed as [`vandermonde_inverse_entry`] and [`kronecker_minor_ratio`] so
//! tests can check them against direct exact elimination.

use crate::gegenbauer::GegenbauerBasis;
use crate::linalg::Matrix;
use crate::qfield::ExactReal;
use crate::scheme::{self, CoherentConfig, RelationPartition, SchemeError};
use crate::sphereset::{AngleSets, DerivedFamily, FiberFlags, GramConfiguration, SphereSetError};
use rayon::prelude::*;
use std::collections::BTreeMap;

pub use crate::sphereset::DerivedFamily as SubconstituentFamily;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("fibers {0} and {1} are neither equal nor disjoint (or neither antipodal nor negation-disjoint)")]
    HypothesisViolated(usize, usize),
    #[error("triple ({0}, {1}, {2}) not covered: {3}")]
    NotApplicable(usize, usize, usize, String),
    #[error("pin values missing for angle class {gamma} of triple ({i}, {j}, {k})")]
    MissingPins {
        i: usize,
        j: usize,
        k: usize,
        gamma: usize,
    },
    #[error("coefficient matrix is singular; input data is inconsistent")]
    SingularSystem,
    #[error("system solution is not a nonnegative integer count: {0}")]
    NonIntegralSolution(String),
    #[error("solver output disagrees with counted value at triple ({i}, {j}, {k}), cell ({l}, {m}), class {gamma}: solved {solved}, counted {counted}")]
    OracleMismatch {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        m: usize,
        gamma: usize,
        solved: u64,
        counted: u64,
    },
    #[error("duplicate nodes in a Vandermonde system")]
    DuplicateNodes,
    #[error("degenerate minor deletion")]
    DegenerateDeletion,
    #[error("corollary pipeline inapplicable: {0}")]
    Inapplicable(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    SphereSet(#[from] SphereSetError),
}

// ---------------------------------------------------------------------------
// The correction term
// ---------------------------------------------------------------------------

/// The boundary correction G_{λ,μ}(t) collecting the contributions of
/// points at inner product ±1 from x or y:
///
/// ```text
/// δ_{1,t}·s_ij·s_jk + (-1)^μ·δ_{-1,t}·s_ij·a_jk + (-1)^λ·δ_{-1,t}·a_ij·s_jk
///   + (-1)^{λ+μ}·δ_{1,t}·a_ij·a_jk
///   + (1-δ_{1,t})(1-δ_{-1,t})·(s_ij·t^μ + s_jk·t^λ + a_ij·(-1)^λ(-t)^μ + a_jk·(-t)^λ(-1)^μ)
/// ```
///
/// where `flags = [s_ij, s_jk, a_ij, a_jk]` are the indicators of X_i = X_j,
/// X_j = X_k, X_i = -X_j and X_j = -X_k.
pub fn g_term(lambda: u32, mu: u32, flags: [bool; 4], t: &ExactReal) -> ExactReal {
    let [same_ij, same_jk, anti_ij, anti_jk] = flags;
    let ind = |b: bool| {
        if b {
            ExactReal::one()
        } else {
            ExactReal::zero()
        }
    };
    let sign = |e: u32| ExactReal::from_int(if e % 2 == 0 { 1 } else { -1 });
    let is_one = *t == ExactReal::one();
    let is_minus_one = *t == ExactReal::from_int(-1);
    let mut acc = ExactReal::zero();
    if is_one {
        acc += &ind(same_ij && same_jk);
        acc += &(&sign(lambda + mu) * &ind(anti_ij && anti_jk));
    }
    if is_minus_one {
        acc += &(&sign(mu) * &ind(same_ij && anti_jk));
        acc += &(&sign(lambda) * &ind(anti_ij && same_jk));
    }
    if !is_one && !is_minus_one {
        let minus_t = -t.clone();
        if same_ij {
            acc += &t.pow(mu);
        }
        if same_jk {
            acc += &t.pow(lambda);
        }
        if anti_ij {
            acc += &(&sign(lambda) * &minus_t.pow(mu));
        }
        if anti_jk {
            acc += &(&minus_t.pow(lambda) * &sign(mu));
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Vandermonde identities
// ---------------------------------------------------------------------------

/// k-th elementary symmetric polynomial of the given values.
pub fn elementary_symmetric(values: &[ExactReal], k: usize) -> ExactReal {
    if k == 0 {
        return ExactReal::one();
    }
    if k > values.len() {
        return ExactReal::zero();
    }
    // e_k over a growing prefix.
    let mut table = vec![ExactReal::zero(); k + 1];
    table[0] = ExactReal::one();
    for v in values {
        for j in (1..=k).rev() {
            let add = &table[j - 1] * v;
            table[j] += &add;
        }
    }
    table.swap_remove(k)
}

/// Entry (row, col) of the inverse of the Vandermonde matrix with (i, j)
/// entry nodes[j]^i (0-indexed), via the closed form
/// (-1)^{row+col}·e_{n-1-col}(nodes without row) / Π(node differences).
pub fn vandermonde_inverse_entry(
    nodes: &[ExactReal],
    row: usize,
    col: usize,
) -> Result<ExactReal, SolverError> {
    let n = nodes.len();
    assert!(row < n && col < n);
    for a in 0..n {
        for b in (a + 1)..n {
            if nodes[a] == nodes[b] {
                return Err(SolverError::DuplicateNodes);
            }
        }
    }
    let others: Vec<ExactReal> = nodes
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, v)| v.clone())
        .collect();
    let numerator = elementary_symmetric(&others, n - 1 - col);
    let mut denominator = ExactReal::one();
    for k in 0..row {
        denominator *= &(&nodes[row] - &nodes[k]);
    }
    for l in (row + 1)..n {
        denominator *= &(&nodes[l] - &nodes[row]);
    }
    let sign = ExactReal::from_int(if (row + col) % 2 == 0 { 1 } else { -1 });
    Ok(&(&sign * &numerator) * &denominator.inv().expect("distinct nodes"))
}

/// The ratio det((A⊗B)(J, I)) / det(A⊗B) where A, B are the Vandermonde
/// matrices of the node lists, the removed rows J' are the fixed corner
/// {(n-2, m-1), (n-1, m-2), (n-1, m-1)} (0-indexed power pairs) and the
/// removed columns I' are the three given (α-index, β-index) pairs. Returned
/// up to sign, via the closed form
///
/// ```text
/// (α_{i1}β_{j2} + α_{i2}β_{j3} + α_{i3}β_{j1} - α_{i1}β_{j3} - α_{i2}β_{j1} - α_{i3}β_{j2})
///   / Π_r f(i_r, j_r)
/// ```
///
/// with f the products of node differences.
pub fn kronecker_minor_ratio(
    alpha_nodes: &[ExactReal],
    beta_nodes: &[ExactReal],
    deleted: &[(usize, usize); 3],
) -> Result<ExactReal, SolverError> {
    for nodes in [alpha_nodes, beta_nodes] {
        for a in 0..nodes.len() {
            for b in (a + 1)..nodes.len() {
                if nodes[a] == nodes[b] {
                    return Err(SolverError::DuplicateNodes);
                }
            }
        }
    }
    if deleted[0] == deleted[1] || deleted[0] == deleted[2] || deleted[1] == deleted[2] {
        return Err(SolverError::DegenerateDeletion);
    }
    let n = alpha_nodes.len();
    let m = beta_nodes.len();
    for &(i, j) in deleted {
        if i >= n || j >= m {
            return Err(SolverError::DegenerateDeletion);
        }
    }
    let (i1, j1) = deleted[0];
    let (i2, j2) = deleted[1];
    let (i3, j3) = deleted[2];
    let a = |i: usize| &alpha_nodes[i];
    let b = |j: usize| &beta_nodes[j];
    let numerator = &(&(&(a(i1) * b(j2)) + &(a(i2) * b(j3))) + &(a(i3) * b(j1)))
        - &(&(&(a(i1) * b(j3)) + &(a(i2) * b(j1))) + &(a(i3) * b(j2)));
    let mut denominator = ExactReal::one();
    for &(i, j) in deleted {
        for k in 0..i {
            denominator *= &(a(i) - a(k));
        }
        for l in (i + 1)..n {
            denominator *= &(a(l) - a(i));
        }
        for k in 0..j {
            denominator *= &(b(j) - b(k));
        }
        for l in (j + 1)..m {
            denominator *= &(b(l) - b(j));
        }
    }
    Ok(&numerator * &denominator.inv().expect("distinct nodes"))
}

// ---------------------------------------------------------------------------
// Case classification and system assembly
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CaseTag {
    C1,
    C2,
    C3,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseTag::C1 => write!(f, "C1"),
            CaseTag::C2 => write!(f, "C2"),
            CaseTag::C3 => write!(f, "C3"),
        }
    }
}

/// A pinned cell of the unknown grid: the count at (row angle, col angle)
/// is constant over the pairs realizing a fixed class and enters the system
/// as a known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pin {
    /// 1-based index into the (i, j) nontrivial angle list.
    pub row: usize,
    /// 1-based index into the (j, k) nontrivial angle list.
    pub col: usize,
    pub value: u64,
}

/// Classification of a fiber triple: which case applies and, for the
/// pinned cases, the constant cells found by counting (keyed by the class
/// index of ⟨x,y⟩ in the (i, k) angle list).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverCase {
    pub triple: (usize, usize, usize),
    pub tag: CaseTag,
    pub pins: BTreeMap<usize, Vec<Pin>>,
}

/// The assembled exact system for one (triple, class) instance.
pub struct ExactLinearSystem {
    pub matrix: Matrix,
    pub rhs: Vec<ExactReal>,
    /// Unknown labels: 1-based (row angle index, col angle index) cells.
    pub unknowns: Vec<(usize, usize)>,
}

impl ExactLinearSystem {
    /// Exact Gaussian elimination; solutions must be nonnegative integer
    /// counts.
    pub fn solve(&self) -> Result<BTreeMap<(usize, usize), u64>, SolverError> {
        let x = self
            .matrix
            .solve(&self.rhs)
            .ok_or(SolverError::SingularSystem)?;
        let mut out = BTreeMap::new();
        for (cell, value) in self.unknowns.iter().zip(x) {
            let count = value
                .as_integer()
                .and_then(|b| u64::try_from(b).ok())
                .ok_or_else(|| {
                    SolverError::NonIntegralSolution(format!("cell {cell:?} -> {value}"))
                })?;
            out.insert(*cell, count);
        }
        Ok(out)
    }
}

/// Precomputed angle and relation data for a union of fibers, the working
/// state of the classification and solving pipeline.
pub struct UnionAnalysis<'a> {
    pub config: &'a GramConfiguration,
    pub strengths: Vec<u32>,
    num_fibers: usize,
    fiber_points: Vec<Vec<usize>>,
    pub angles: Vec<Vec<AngleSets>>,
    indexed: Vec<Vec<Vec<ExactReal>>>,
    pub flags: Vec<Vec<FiberFlags>>,
    relation_of: Vec<u16>,
    relations: Vec<RelationLabel>,
    relation_id: BTreeMap<(usize, usize, usize), usize>,
}

/// Identity of one relation of the union configuration: a fiber pair and an
/// index into its full angle list (0 the equality relation, then the
/// nontrivial angles in decreasing order, then the antipodal relation).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationLabel {
    pub fiber_i: usize,
    pub fiber_j: usize,
    pub angle_index: usize,
    pub value: ExactReal,
}

impl<'a> UnionAnalysis<'a> {
    /// Builds the analysis with caller-certified per-fiber strengths; checks
    /// the equal-or-disjoint hypothesis on fibers and their negations.
    pub fn new(
        config: &'a GramConfiguration,
        strengths: Vec<u32>,
    ) -> Result<Self, SolverError> {
        let nf = config.num_fibers();
        assert_eq!(strengths.len(), nf, "one strength per fiber");
        let fiber_points: Vec<Vec<usize>> = (0..nf).map(|f| config.fiber_points(f)).collect();
        let mut angles = Vec::with_capacity(nf);
        let mut indexed = Vec::with_capacity(nf);
        let mut flags = Vec::with_capacity(nf);
        for i in 0..nf {
            let mut row_a = Vec::with_capacity(nf);
            let mut row_x = Vec::with_capacity(nf);
            let mut row_f = Vec::with_capacity(nf);
            for j in 0..nf {
                let a = config.angle_sets(i, j);
                row_x.push(a.indexed());
                row_a.push(a);
                row_f.push(config.fiber_flags(i, j));
            }
            angles.push(row_a);
            indexed.push(row_x);
            flags.push(row_f);
        }
        // Hypothesis: a realized inner product 1 (resp. -1) between two
        // fibers forces them to be equal (resp. antipodal) as sets.
        let one = ExactReal::one();
        let minus_one = ExactReal::from_int(-1);
        for i in 0..nf {
            for j in 0..nf {
                let has_one = (i == j)
                    || fiber_points[i]
                        .iter()
                        .any(|&x| fiber_points[j].iter().any(|&y| config.gram(x, y) == &one));
                let has_minus = angles[i][j].full.contains(&minus_one);
                let same = flags[i][j].same || (i == j);
                if (has_one && !same) || (has_minus && !flags[i][j].antipodal) {
                    return Err(SolverError::HypothesisViolated(i, j));
                }
            }
        }
        // Relation ids: fiber pairs in order, full angle list per pair,
        // equality relation first.
        let mut relations = Vec::new();
        let mut relation_id = BTreeMap::new();
        for i in 0..nf {
            for j in 0..nf {
                let has_one = i == j || flags[i][j].same;
                let list = &indexed[i][j];
                for (idx, value) in list.iter().enumerate() {
                    if idx == 0 && !has_one {
                        continue;
                    }
                    relation_id.insert((i, j, idx), relations.len());
                    relations.push(RelationLabel {
                        fiber_i: i,
                        fiber_j: j,
                        angle_index: idx,
                        value: value.clone(),
                    });
                }
            }
        }
        let n = config.len();
        let mut relation_of = vec![0u16; n * n];
        for x in 0..n {
            for y in 0..n {
                let i = config.fiber_of(x);
                let j = config.fiber_of(y);
                let v = config.gram(x, y);
                let idx = indexed[i][j]
                    .iter()
                    .position(|a| a == v)
                    .expect("realized value indexed");
                relation_of[x * n + y] = relation_id[&(i, j, idx)] as u16;
            }
        }
        Ok(UnionAnalysis {
            config,
            strengths,
            num_fibers: nf,
            fiber_points,
            angles,
            indexed,
            flags,
            relation_of,
            relations,
            relation_id,
        })
    }

    /// Builds the analysis with strengths measured directly from the data.
    pub fn with_measured_strengths(config: &'a GramConfiguration) -> Result<Self, SolverError> {
        let mut strengths = Vec::with_capacity(config.num_fibers());
        for f in 0..config.num_fibers() {
            let a = config.angle_sets(f, f);
            let max_t = ((2 * a.s_star()) as u32 + 2).max(3);
            strengths.push(config.strength(&[f], max_t)?);
        }
        Self::new(config, strengths)
    }

    pub fn num_fibers(&self) -> usize {
        self.num_fibers
    }

    pub fn relations(&self) -> &[RelationLabel] {
        &self.relations
    }

    pub fn relation_id(&self, fiber_i: usize, fiber_j: usize, idx: usize) -> Option<usize> {
        self.relation_id.get(&(fiber_i, fiber_j, idx)).copied()
    }

    pub fn partition(&self) -> Result<RelationPartition, SchemeError> {
        RelationPartition::from_class_matrix(self.config.len(), self.relation_of.clone())
    }

    /// Length of the full indexed angle list of a fiber pair (including the
    /// equality entry and, when present, the antipodal entry).
    pub fn full_angle_count(&self, i: usize, j: usize) -> usize {
        self.indexed[i][j].len()
    }

    /// The per-pair count profiles bucketed by the class of (x, y): for each
    /// nontrivial class γ of the (i, k) pair, the first profile seen and a
    /// mask of cells constant over all realizing pairs. Profile cells are
    /// indexed by full angle indices of the (i, j) and (j, k) lists.
    pub fn count_profiles(
        &self,
        i: usize,
        j: usize,
        k: usize,
    ) -> Vec<Option<(Vec<u64>, Vec<bool>)>> {
        let n = self.config.len();
        let s_row = self.indexed[i][j].len();
        let s_col = self.indexed[j][k].len();
        let gamma_count = self.indexed[i][k].len();
        let mut out: Vec<Option<(Vec<u64>, Vec<bool>)>> = vec![None; gamma_count];
        let row_list = &self.indexed[i][j];
        let col_list = &self.indexed[j][k];
        for &x in &self.fiber_points[i] {
            for &y in &self.fiber_points[k] {
                let v = self.config.gram(x, y);
                let gamma = self.indexed[i][k].iter().position(|a| a == v).unwrap();
                if gamma == 0 || *v == ExactReal::from_int(-1) {
                    continue;
                }
                let mut profile = vec![0u64; s_row * s_col];
                for &z in &self.fiber_points[j] {
                    let a = self.config.gram(x, z);
                    let b = self.config.gram(z, y);
                    let l = row_list.iter().position(|w| w == a).unwrap();
                    let m = col_list.iter().position(|w| w == b).unwrap();
                    profile[l * s_col + m] += 1;
                }
                let _ = n;
                match &mut out[gamma] {
                    slot @ None => {
                        let mask = vec![true; s_row * s_col];
                        *slot = Some((profile, mask));
                    }
                    Some((first, mask)) => {
                        for (c, m) in mask.iter_mut().enumerate() {
                            if first[c] != profile[c] {
                                *m = false;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Classifies a fiber triple into the smallest applicable case, locating
    /// pins by counting for the two deficient cases. Pin candidates range
    /// over the nontrivial angle grid and are chosen lexicographically.
    pub fn classify(&self, i: usize, j: usize, k: usize) -> Result<SolverCase, SolverError> {
        let s_ij = self.angles[i][j].s();
        let s_jk = self.angles[j][k].s();
        let t_j = self.strengths[j] as i64;
        let demand = (s_ij + s_jk) as i64 - 2;
        if demand <= t_j {
            return Ok(SolverCase {
                triple: (i, j, k),
                tag: CaseTag::C1,
                pins: BTreeMap::new(),
            });
        }
        let tag = if demand - 1 == t_j {
            CaseTag::C2
        } else if demand - 2 == t_j {
            CaseTag::C3
        } else {
            return Err(SolverError::NotApplicable(
                i,
                j,
                k,
                format!("degrees {s_ij} + {s_jk} exceed strength {t_j} by more than two"),
            ));
        };
        let profiles = self.count_profiles(i, j, k);
        let s_col_full = self.indexed[j][k].len();
        let mut pins: BTreeMap<usize, Vec<Pin>> = BTreeMap::new();
        for (gamma, slot) in profiles.iter().enumerate() {
            let (first, mask) = match slot {
                Some(p) => p,
                None => continue,
            };
            let constant = |l: usize, m: usize| mask[l * s_col_full + m];
            let value = |l: usize, m: usize| first[l * s_col_full + m];
            let found = match tag {
                CaseTag::C2 => {
                    let mut hit = None;
                    'scan2: for l in 1..=s_ij {
                        for m in 1..=s_jk {
                            if constant(l, m) {
                                hit = Some(vec![Pin {
                                    row: l,
                                    col: m,
                                    value: value(l, m),
                                }]);
                                break 'scan2;
                            }
                        }
                    }
                    hit
                }
                CaseTag::C3 => {
                    let mut hit = None;
                    'scan3: for l1 in 1..=s_ij {
                        for m1 in 1..=s_jk {
                            if !constant(l1, m1) {
                                continue;
                            }
                            for l2 in 1..=s_ij {
                                if l2 == l1 || !constant(l2, m1) {
                                    continue;
                                }
                                for m2 in 1..=s_jk {
                                    if m2 == m1 || !constant(l1, m2) {
                                        continue;
                                    }
                                    hit = Some(vec![
                                        Pin {
                                            row: l1,
                                            col: m1,
                                            value: value(l1, m1),
                                        },
                                        Pin {
                                            row: l1,
                                            col: m2,
                                            value: value(l1, m2),
                                        },
                                        Pin {
                                            row: l2,
                                            col: m1,
                                            value: value(l2, m1),
                                        },
                                    ]);
                                    break 'scan3;
                                }
                            }
                        }
                    }
                    hit
                }
                CaseTag::C1 => unreachable!(),
            };
            match found {
                Some(list) => {
                    pins.insert(gamma, list);
                }
                None => {
                    return Err(SolverError::NotApplicable(
                        i,
                        j,
                        k,
                        format!("no constant pins for class {gamma}"),
                    ))
                }
            }
        }
        Ok(SolverCase { triple: (i, j, k), tag, pins })
    }

    /// Assembles the linear system for one (triple, class) instance over the
    /// given angle-index grids (1-based indices into the full angle lists;
    /// the default grids are the nontrivial angles 1..=s).
    ///
    /// The correction term keeps only the boundary contributions not covered
    /// by the grids: the equal-fiber terms always, the antipodal terms only
    /// when the corresponding grid omits the -1 angle.
    pub fn assemble_system(
        &self,
        case: &SolverCase,
        gamma: usize,
        grid_rows: &[usize],
        grid_cols: &[usize],
    ) -> Result<ExactLinearSystem, SolverError> {
        let (i, j, k) = case.triple;
        let row_angles: Vec<ExactReal> = grid_rows
            .iter()
            .map(|&l| self.indexed[i][j][l].clone())
            .collect();
        let col_angles: Vec<ExactReal> = grid_cols
            .iter()
            .map(|&m| self.indexed[j][k][m].clone())
            .collect();
        let gamma_value = &self.indexed[i][k][gamma];
        let s = row_angles.len();
        let t = col_angles.len();
        let minus_one = ExactReal::from_int(-1);
        let rows_have_minus = row_angles.contains(&minus_one);
        let cols_have_minus = col_angles.contains(&minus_one);
        let pins: &[Pin] = match case.tag {
            CaseTag::C1 => &[],
            _ => case
                .pins
                .get(&gamma)
                .ok_or(SolverError::MissingPins { i, j, k, gamma })?,
        };
        // Dropped power rows per case, relative to the grid dimensions.
        let dropped_rows: Vec<(usize, usize)> = match case.tag {
            CaseTag::C1 => vec![],
            CaseTag::C2 => vec![(s - 1, t - 1)],
            CaseTag::C3 => vec![(s - 2, t - 1), (s - 1, t - 2), (s - 1, t - 1)],
        };
        let pinned_cell = |l: usize, m: usize| pins.iter().any(|p| p.row == l && p.col == m);
        let mut unknowns = Vec::new();
        for (a, &l) in grid_rows.iter().enumerate() {
            for (b, &m) in grid_cols.iter().enumerate() {
                let _ = (a, b);
                if !pinned_cell(l, m) {
                    unknowns.push((l, m));
                }
            }
        }
        let flags = [
            self.flags[i][j].same || i == j,
            self.flags[j][k].same || j == k,
            self.flags[i][j].antipodal,
            self.flags[j][k].antipodal,
        ];
        let basis = GegenbauerBasis::new(self.config.dimension());
        let size_j = ExactReal::from_int(self.fiber_points[j].len() as i64);
        let mut matrix_rows = Vec::new();
        let mut rhs = Vec::new();
        for lambda in 0..s as u32 {
            for mu in 0..t as u32 {
                if dropped_rows.contains(&(lambda as usize, mu as usize)) {
                    continue;
                }
                let mut row = Vec::with_capacity(unknowns.len());
                for &(l, m) in &unknowns {
                    let alpha = &self.indexed[i][j][l];
                    let beta = &self.indexed[j][k][m];
                    row.push(&alpha.pow(lambda) * &beta.pow(mu));
                }
                let mut value = &size_j * &basis.eval_f(lambda, mu, gamma_value);
                let masked = [
                    flags[0],
                    flags[1],
                    flags[2] && !rows_have_minus,
                    flags[3] && !cols_have_minus,
                ];
                value -= &g_term(lambda, mu, masked, gamma_value);
                for pin in pins {
                    let alpha = &self.indexed[i][j][pin.row];
                    let beta = &self.indexed[j][k][pin.col];
                    let weight = &alpha.pow(lambda) * &beta.pow(mu);
                    value -= &(&weight * &ExactReal::from_int(pin.value as i64));
                }
                matrix_rows.push(row);
                rhs.push(value);
            }
        }
        Ok(ExactLinearSystem {
            matrix: Matrix::from_rows(matrix_rows),
            rhs,
            unknowns,
        })
    }

    /// Solves the parameter grid of a classified triple at one class: the
    /// full nontrivial grid as a map (l, m) -> count, pins merged back in.
    pub fn solve_triple(
        &self,
        case: &SolverCase,
        gamma: usize,
    ) -> Result<BTreeMap<(usize, usize), u64>, SolverError> {
        let (i, j, k) = case.triple;
        let grid_rows: Vec<usize> = (1..=self.angles[i][j].s()).collect();
        let grid_cols: Vec<usize> = (1..=self.angles[j][k].s()).collect();
        let system = self.assemble_system(case, gamma, &grid_rows, &grid_cols)?;
        let mut solution = system.solve()?;
        if let Some(pins) = case.pins.get(&gamma) {
            for pin in pins {
                solution.insert((pin.row, pin.col), pin.value);
            }
        }
        Ok(solution)
    }

    /// Classifies every fiber triple, solves every system, and certifies the
    /// result: the counted partition must verify as a coherent configuration
    /// and every solved cell must match its counted value exactly.
    pub fn build_configuration(&self) -> Result<UnionCertificate, SolverError> {
        let nf = self.num_fibers;
        let mut cases = Vec::new();
        for i in 0..nf {
            for j in 0..nf {
                for k in 0..nf {
                    cases.push(self.classify(i, j, k)?);
                }
            }
        }
        let partition = self.partition()?;
        let scheme = scheme::verify_coherent(&partition)?;
        let mut solver_checked = 0u64;
        for case in &cases {
            let (i, j, k) = case.triple;
            for gamma in 1..self.indexed[i][k].len() {
                if self.indexed[i][k][gamma] == ExactReal::from_int(-1) {
                    continue;
                }
                if self.relation_id(i, k, gamma).is_none() {
                    continue;
                }
                let solved = self.solve_triple(case, gamma)?;
                let t_rel = self.relation_id(i, k, gamma).unwrap();
                for ((l, m), value) in solved {
                    let r_rel = match self.relation_id(i, j, l) {
                        Some(r) => r,
                        None => {
                            // Unrealized angle cell: the solved count must be 0.
                            if value != 0 {
                                return Err(SolverError::OracleMismatch {
                                    i,
                                    j,
                                    k,
                                    l,
                                    m,
                                    gamma,
                                    solved: value,
                                    counted: 0,
                                });
                            }
                            continue;
                        }
                    };
                    let s_rel = match self.relation_id(j, k, m) {
                        Some(r) => r,
                        None => {
                            if value != 0 {
                                return Err(SolverError::OracleMismatch {
                                    i,
                                    j,
                                    k,
                                    l,
                                    m,
                                    gamma,
                                    solved: value,
                                    counted: 0,
                                });
                            }
                            continue;
                        }
                    };
                    let counted = scheme.p(r_rel, s_rel, t_rel) as u64;
                    if counted != value {
                        return Err(SolverError::OracleMismatch {
                            i,
                            j,
                            k,
                            l,
                            m,
                            gamma,
                            solved: value,
                            counted,
                        });
                    }
                    solver_checked += 1;
                }
            }
        }
        Ok(UnionCertificate {
            relations: self.relations.clone(),
            cases,
            scheme,
            solver_checked,
        })
    }
}

/// Output of [`UnionAnalysis::build_configuration`]: the verified coherent
/// configuration on the union plus the solver's case analysis.
pub struct UnionCertificate {
    pub relations: Vec<RelationLabel>,
    pub cases: Vec<SolverCase>,
    pub scheme: CoherentConfig,
    /// Number of solver cells compared against counted values.
    pub solver_checked: u64,
}

// ---------------------------------------------------------------------------
// The triple-regularity pipeline
// ---------------------------------------------------------------------------

/// Per-base-point data reduced to comparable form.
#[derive(PartialEq, Eq, Debug)]
struct CertificateCore {
    relations: Vec<RelationLabel>,
    cases: Vec<SolverCase>,
    tensor: BTreeMap<(usize, usize, usize), u32>,
    direct_strengths: Vec<u32>,
    fiber_sizes: Vec<usize>,
}

/// A triple-regularity certificate for a spherical association scheme: the
/// derived configuration at every base point was classified, solved,
/// counted and verified, and all of it is base-point independent.
pub struct PipelineCertificate {
    pub base_points: usize,
    pub parent_strength: u32,
    pub parent_angles: Vec<ExactReal>,
    /// Strength guaranteed per derived fiber by the parent design property.
    pub strength_bounds: Vec<u32>,
    /// Strength used for classification (bound, possibly raised to 2 by the
    /// eigenvalue criterion for derived 2-designs).
    pub declared_strengths: Vec<u32>,
    /// Strength measured directly on the derived fibers (same for every z).
    pub direct_strengths: Vec<u32>,
    pub fiber_sizes: Vec<usize>,
    pub relations: Vec<RelationLabel>,
    /// Parent angle class of each derived relation.
    pub relation_parent_classes: Vec<Option<usize>>,
    pub cases: Vec<SolverCase>,
    pub tensor: BTreeMap<(usize, usize, usize), u32>,
    pub solver_checked: u64,
    /// The verified derived coherent configuration at base point 0.
    pub scheme: CoherentConfig,
}

impl PipelineCertificate {
    pub fn case_tag(&self, i: usize, j: usize, k: usize) -> Option<CaseTag> {
        self.cases
            .iter()
            .find(|c| c.triple == (i, j, k))
            .map(|c| c.tag)
    }

    pub fn all_c1(&self) -> bool {
        self.cases.iter().all(|c| c.tag == CaseTag::C1)
    }
}

/// Runs the derived-design pipeline on a single-fiber configuration that
/// carries a symmetric association scheme on its angle classes:
///
/// 1. verify the scheme and measure the parent strength;
/// 2. for every base point, build the derived family, classify all fiber
///    triples, solve all systems, and verify the derived coherent
///    configuration;
/// 3. demand that every piece of the analysis (angle data, case tags, pins,
///    parameter tensors, strengths) is independent of the base point.
///
/// A success certifies that the scheme is triply regular. Failure reports
/// why the method does not apply; it is not a refutation.
pub fn corollary_pipeline(
    config: &GramConfiguration,
) -> Result<PipelineCertificate, SolverError> {
    let (parent_scheme, parent_angles) = scheme::scheme_from_gram(config)?;
    let angle_data = config.angle_sets(0, 0);
    let s_nontrivial = angle_data.s();
    let max_t = (2 * angle_data.s_star() as u32 + 2).max(3);
    let parent_strength = config.strength(&[0], max_t)?;
    let bound = (parent_strength + 1).saturating_sub(s_nontrivial as u32);

    // Eigenvalue criterion: when the configuration is the first-eigenspace
    // embedding of a Q-polynomial scheme, a vanishing a₁*·(θ*_i + 1) makes
    // the derived design of class i a 2-design regardless of the bound.
    let mut declared = vec![bound; s_nontrivial];
    if let Ok(algebra) = scheme::eigen_structure(&parent_scheme) {
        if let Some(order) = algebra.q_polynomial_ordering() {
            let ordered = algebra.reordered(&order);
            let theta0_inv = ordered.theta_star(0).inv().expect("positive rank");
            let embedding_matches = (0..=s_nontrivial).all(|class| {
                let expected = &(ordered.theta_star(class) * &theta0_inv);
                *expected == parent_angles[class]
            });
            if embedding_matches {
                for class in 1..=s_nontrivial {
                    let theta_i = ordered.theta_star(class);
                    if *theta_i == -ordered.theta_star(0) {
                        continue;
                    }
                    if let Ok(true) = scheme::derived_two_design_criterion(&ordered, class) {
                        declared[class - 1] = declared[class - 1].max(2);
                    }
                }
            }
        }
    }

    let parent_classes = parent_scheme.partition.classes().to_vec();
    let cores: Result<Vec<(CertificateCore, Option<UnionCertificate>)>, SolverError> = (0
        ..config.len())
        .into_par_iter()
        .map(|z| {
            let family = config.derived_family_precomputed(
                z,
                parent_strength,
                &parent_angles,
                &parent_classes,
            )?;
            let analysis = UnionAnalysis::new(&family.config, declared.clone())?;
            let certificate = analysis.build_configuration()?;
            let mut direct = Vec::with_capacity(family.num_fibers());
            for fiber in 0..family.num_fibers() {
                let measured = family
                    .config
                    .strength(&[fiber], parent_strength + 1)?;
                if measured < declared[fiber] {
                    return Err(SolverError::Inapplicable(format!(
                        "derived fiber {fiber} at base point {z} has strength {measured} < declared {}",
                        declared[fiber]
                    )));
                }
                direct.push(measured);
            }
            let core = CertificateCore {
                relations: certificate.relations.clone(),
                cases: certificate.cases.clone(),
                tensor: certificate.scheme.tensor_entries(),
                direct_strengths: direct,
                fiber_sizes: (0..family.num_fibers())
                    .map(|f| family.config.fiber_points(f).len())
                    .collect(),
            };
            Ok((core, (z == 0).then_some(certificate)))
        })
        .collect();
    let mut cores = cores?;
    let (reference, first_certificate) = cores.remove(0);
    let first_certificate = first_certificate.expect("base point 0 keeps its certificate");
    for (z, (core, _)) in cores.iter().enumerate() {
        if *core != reference {
            return Err(SolverError::Inapplicable(format!(
                "derived data at base point {} differs from base point 0",
                z + 1
            )));
        }
    }

    // Parent class of each derived relation, through the projection map.
    let family0 =
        config.derived_family_precomputed(0, parent_strength, &parent_angles, &parent_classes)?;
    let relation_parent_classes: Vec<Option<usize>> = reference
        .relations
        .iter()
        .map(|label| {
            let (a, b) = (label.fiber_i, label.fiber_j);
            if label.angle_index == 0 && a == b {
                return Some(0);
            }
            family0.class_maps[a][b]
                .iter()
                .find(|(_, v)| **v == label.value)
                .map(|(k, _)| *k)
        })
        .collect();

    Ok(PipelineCertificate {
        base_points: config.len(),
        parent_strength,
        parent_angles,
        strength_bounds: vec![bound; s_nontrivial],
        declared_strengths: declared,
        direct_strengths: reference.direct_strengths,
        fiber_sizes: reference.fiber_sizes,
        relations: reference.relations,
        relation_parent_classes,
        cases: reference.cases,
        tensor: reference.tensor,
        solver_checked: first_certificate.solver_checked,
        scheme: first_certificate.scheme,
    })
}

/// Builds the derived family of a verified spherical scheme at one base
/// point with the same strength policy as the full pipeline.
pub fn derived_analysis(
    config: &GramConfiguration,
    z: usize,
) -> Result<(DerivedFamily, Vec<u32>), SolverError> {
    let (_, _angles) = scheme::scheme_from_gram(config)?;
    let angle_data = config.angle_sets(0, 0);
    let max_t = (2 * angle_data.s_star() as u32 + 2).max(3);
    let parent_strength = config.strength(&[0], max_t)?;
    let family = config.derived_family(z, parent_strength)?;
    let declared = family.declared_strengths.clone();
    Ok((family, declared))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::qfield::ratio;

    fn int(n: i64) -> ExactReal {
        ExactReal::from_int(n)
    }

    #[test]
    fn g_term_examples() {
        let t = ExactReal::from_rational(ratio(1, 3));
        assert!(g_term(2, 5, [false; 4], &t).is_zero());
        assert_eq!(
            g_term(4, 7, [true, true, false, false], &ExactReal::one()),
            ExactReal::one()
        );
        let half = ExactReal::from_rational(ratio(1, 2));
        assert_eq!(
            g_term(0, 2, [true, false, false, false], &half),
            ExactReal::from_rational(ratio(1, 4))
        );
        // Antipodal tail term: a_ij·(-1)^λ·(-t)^μ.
        assert_eq!(
            g_term(1, 1, [false, false, true, false], &half),
            ExactReal::from_rational(ratio(1, 2))
        );
    }

    #[test]
    fn vandermonde_entry_simple() {
        let nodes = vec![int(0), int(1)];
        // A = [[1,1],[0,1]], inverse [[1,-1],[0,1]].
        assert_eq!(vandermonde_inverse_entry(&nodes, 0, 0).unwrap(), int(1));
        assert_eq!(vandermonde_inverse_entry(&nodes, 0, 1).unwrap(), int(-1));
        assert_eq!(vandermonde_inverse_entry(&nodes, 1, 0).unwrap(), int(0));
        let single = vec![ExactReal::from_rational(ratio(3, 7))];
        assert_eq!(vandermonde_inverse_entry(&single, 0, 0).unwrap(), int(1));
        assert!(matches!(
            vandermonde_inverse_entry(&[int(2), int(2)], 0, 0),
            Err(SolverError::DuplicateNodes)
        ));
    }

    #[test]
    fn vandermonde_entry_matches_direct_inverse() {
        let nodes = vec![
            ExactReal::from_rational(ratio(-1, 2)),
            int(0),
            ExactReal::from_rational(ratio(1, 3)),
            int(2),
        ];
        let n = nodes.len();
        let vandermonde = Matrix::from_fn(n, n, |i, j| nodes[j].pow(i as u32));
        let inverse = vandermonde.inverse().unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(
                    vandermonde_inverse_entry(&nodes, i, j).unwrap(),
                    inverse[(i, j)],
                    "entry ({i}, {j})"
                );
            }
        }
    }

    fn direct_kronecker_ratio(
        alpha: &[ExactReal],
        beta: &[ExactReal],
        deleted: &[(usize, usize); 3],
    ) -> ExactReal {
        let n = alpha.len();
        let m = beta.len();
        let a = Matrix::from_fn(n, n, |i, j| alpha[j].pow(i as u32));
        let b = Matrix::from_fn(m, m, |i, j| beta[j].pow(i as u32));
        let full = a.kron(&b);
        let dropped_rows = [(n - 2, m - 1), (n - 1, m - 2), (n - 1, m - 1)];
        let keep_rows: Vec<usize> = (0..n * m)
            .filter(|idx| !dropped_rows.contains(&(idx / m, idx % m)))
            .collect();
        let keep_cols: Vec<usize> = (0..n * m)
            .filter(|idx| !deleted.contains(&(idx / m, idx % m)))
            .collect();
        let minor = full.submatrix(&keep_rows, &keep_cols);
        &minor.det() * &full.det().inv().unwrap()
    }

    #[test]
    fn kronecker_ratio_matches_direct() {
        let alpha = vec![int(0), int(1)];
        let beta = vec![int(0), int(1)];
        let deleted = [(0, 0), (0, 1), (1, 0)];
        let closed = kronecker_minor_ratio(&alpha, &beta, &deleted).unwrap();
        let direct = direct_kronecker_ratio(&alpha, &beta, &deleted);
        assert_eq!(closed.abs(), direct.abs());

        let alpha = vec![
            ExactReal::from_rational(ratio(1, 2)),
            int(-1),
            ExactReal::from_rational(ratio(1, 5)),
        ];
        let beta = vec![int(0), ExactReal::from_rational(ratio(-2, 3)), int(2)];
        let deleted = [(0, 1), (0, 2), (2, 1)];
        let closed = kronecker_minor_ratio(&alpha, &beta, &deleted).unwrap();
        let direct = direct_kronecker_ratio(&alpha, &beta, &deleted);
        assert_eq!(closed.abs(), direct.abs());
    }

    #[test]
    fn kronecker_ratio_vanishing_and_errors() {
        let alpha = vec![int(0), int(1), int(2)];
        let beta = vec![int(0), int(1), int(3)];
        // Repeated α-index across the pin pattern: the numerator collapses
        // to (α_{l1}-α_{l2})(β_{m1}-β_{m2}) with α_{l1} = α_{l2}.
        let deleted = [(1, 0), (1, 1), (1, 2)];
        assert!(kronecker_minor_ratio(&alpha, &beta, &deleted)
            .unwrap()
            .is_zero());
        assert!(matches!(
            kronecker_minor_ratio(&alpha, &beta, &[(0, 0), (0, 0), (1, 1)]),
            Err(SolverError::DegenerateDeletion)
        ));
    }

    #[test]
    fn identity_system_solves_to_rhs() {
        let system = ExactLinearSystem {
            matrix: Matrix::identity(3),
            rhs: vec![int(4), int(0), int(9)],
            unknowns: vec![(1, 1), (1, 2), (2, 1)],
        };
        let solution = system.solve().unwrap();
        assert_eq!(solution[&(1, 1)], 4);
        assert_eq!(solution[&(2, 1)], 9);
    }

    #[test]
    fn single_fiber_pentagon_matches_scheme_parameters() {
        // Non-antipodal single fiber: the solved parameters are the
        // classical association scheme intersection numbers.
        let config = catalog::make_polygon(5).unwrap();
        let analysis = UnionAnalysis::with_measured_strengths(&config).unwrap();
        assert_eq!(analysis.strengths, vec![4]);
        let certificate = analysis.build_configuration().unwrap();
        assert!(certificate.cases.iter().all(|c| c.tag == CaseTag::C1));
        assert!(certificate.solver_checked > 0);
        // p(1,1,2) of the pentagon distance scheme is 1.
        let r1 = analysis.relation_id(0, 0, 1).unwrap();
        let r2 = analysis.relation_id(0, 0, 2).unwrap();
        assert_eq!(certificate.scheme.p(r1, r1, r2), 1);
    }

    #[test]
    fn single_fiber_antipodal_icosahedron() {
        let config = catalog::make_icosahedron().to_configuration().unwrap();
        let analysis = UnionAnalysis::with_measured_strengths(&config).unwrap();
        let certificate = analysis.build_configuration().unwrap();
        assert!(certificate.cases.iter().all(|c| c.tag == CaseTag::C1));
        // The icosahedron scheme: each vertex has 5 at angle 1/√5; two
        // adjacent-at-1/√5 vertices share 2 common such neighbours.
        let r1 = analysis.relation_id(0, 0, 1).unwrap();
        assert_eq!(certificate.scheme.p(r1, r1, r1), 2);
    }

    #[test]
    fn mub_derived_pipeline_certifies() {
        let config = catalog::make_mub(4).unwrap().to_configuration().unwrap();
        let certificate = corollary_pipeline(&config).unwrap();
        assert_eq!(certificate.parent_strength, 5);
        assert_eq!(certificate.fiber_sizes, vec![8, 6, 8]);
        // Derived fibers at d = 4: two cubes and a cross polytope.
        assert_eq!(certificate.direct_strengths, vec![3, 3, 3]);
        assert!(certificate.all_c1());
        assert!(certificate.solver_checked > 0);
    }

    #[test]
    fn tight4_pipeline_certifies_all_c1() {
        let config = catalog::make_tight4_27().unwrap();
        let certificate = corollary_pipeline(&config).unwrap();
        assert_eq!(certificate.parent_strength, 4);
        assert_eq!(certificate.strength_bounds, vec![3, 3]);
        assert!(certificate.all_c1());
        assert_eq!(certificate.fiber_sizes, vec![16, 10]);
    }

    #[test]
    fn icosahedron_pipeline() {
        let config = catalog::make_icosahedron().to_configuration().unwrap();
        let certificate = corollary_pipeline(&config).unwrap();
        assert_eq!(certificate.parent_strength, 5);
        // Derived designs are pentagons of strength exactly 4 = 5 + 1 - 2.
        assert_eq!(certificate.direct_strengths, vec![4, 4]);
        assert!(certificate.all_c1());
    }

    #[test]
    fn hypothesis_violation_detected() {
        // Two fibers sharing one point but not equal: hypothesis fails.
        let one = ExactReal::one();
        let zero = ExactReal::zero();
        let gram = vec![
            vec![one.clone(), zero.clone(), one.clone()],
            vec![zero.clone(), one.clone(), zero.clone()],
            vec![one.clone(), zero.clone(), one.clone()],
        ];
        let config = GramConfiguration::new(Some(2), vec![0, 0, 1], gram).unwrap();
        assert!(matches!(
            UnionAnalysis::with_measured_strengths(&config),
            Err(SolverError::HypothesisViolated(_, _))
        ));
    }
}
