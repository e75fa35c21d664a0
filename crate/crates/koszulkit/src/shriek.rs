//! The quadratic dual coring A^! of an incidence ring, the Koszul complex
//! built from it, and the diagonal dimension comparison against Tor.
//!
//! A^!_1 is spanned by covers; A^!_n for n ≥ 2 is the intersection over
//! interior positions of the kernels of "multiply two adjacent covers".
//! All of these maps preserve chain endpoints, so A^!_n splits into one
//! block per interval of length n and each block is a small linear
//! system over the maximal chains of that interval.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::bar::{self, HomologyError};
use crate::linalg::{self, FieldSpec, SparseMatrix};
use crate::poset::Poset;

/// The A^!_n component supported on one interval: its maximal cover
/// chains and the kernel-intersection basis over them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShriekBlock {
    pub start: usize,
    pub end: usize,
    /// Cover chains from `start` to `end`, endpoints included, lex order.
    pub chains: Vec<Vec<usize>>,
    /// Basis vectors of the block, coordinates over `chains`.
    pub basis: Vec<Vec<BigInt>>,
}

/// A basis of A^!_n, split by endpoint blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShriekBasis {
    pub n: usize,
    pub blocks: Vec<ShriekBlock>,
}

impl ShriekBasis {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.basis.len()).sum()
    }
}

/// Computes a basis of A^!_n.
pub fn compute_shriek(p: &Poset, n: usize, field: FieldSpec) -> Result<ShriekBasis, HomologyError> {
    p.require_graded()?;
    Ok(shriek_graded(p, n, field))
}

fn shriek_graded(p: &Poset, n: usize, field: FieldSpec) -> ShriekBasis {
    let mut blocks = Vec::new();
    for (a, b) in p.intervals_of_length(n) {
        let chains = cover_chains_between(p, a, b, n);
        let basis = if n <= 1 {
            // A^!_0 = R and A^!_1 = A_1: the full canonical basis
            chains
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let mut e = vec![BigInt::zero(); chains.len()];
                    e[i] = BigInt::one();
                    e
                })
                .collect()
        } else {
            let kernels: Vec<Vec<Vec<BigInt>>> = (1..n)
                .map(|pos| linalg::kernel_basis(&merge_matrix(&chains, pos), field))
                .collect();
            linalg::intersect_subspaces(&kernels, chains.len(), field)
                .expect("kernel vectors share the chain-space dimension")
        };
        if !chains.is_empty() {
            blocks.push(ShriekBlock {
                start: a,
                end: b,
                chains,
                basis,
            });
        }
    }
    ShriekBasis { n, blocks }
}

/// All cover chains from `a` to `b`; by gradedness each has exactly `n` steps.
fn cover_chains_between(p: &Poset, a: usize, b: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut prefix = vec![a];
    descend(p, b, n, &mut prefix, &mut out);
    out
}

fn descend(p: &Poset, b: usize, n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == n + 1 {
        if *prefix.last().unwrap() == b {
            out.push(prefix.clone());
        }
        return;
    }
    let last = *prefix.last().unwrap();
    for &next in p.successors(last) {
        if p.leq(next, b) {
            prefix.push(next);
            descend(p, b, n, prefix, out);
            prefix.pop();
        }
    }
}

/// Matrix of "multiply the covers at interior position `pos`" on a block:
/// rows indexed by the distinct merged sequences, columns by the chains.
fn merge_matrix(chains: &[Vec<usize>], pos: usize) -> SparseMatrix {
    let mut merged: Vec<Vec<usize>> = chains
        .iter()
        .map(|c| {
            let mut m = c.clone();
            m.remove(pos);
            m
        })
        .collect();
    let mut targets = merged.clone();
    targets.sort_unstable();
    targets.dedup();
    let index: HashMap<&[usize], usize> = targets
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_slice(), i))
        .collect();
    let mut mat = SparseMatrix::zero(targets.len(), chains.len());
    for (col, m) in merged.drain(..).enumerate() {
        mat.set(index[m.as_slice()], col, BigInt::one());
    }
    mat
}

/// The data of the quadratic dual: V = A_1, W = Ker μ_{1,1} (over the
/// global cover-2-chain basis) and the dimensions of every A^!_n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticData {
    pub cover_basis: Vec<(String, String)>,
    pub relation_basis: Vec<Vec<BigInt>>,
    /// dim A^!_n for n = 0..=max interval length.
    pub shriek_dims: Vec<usize>,
}

pub fn quadratic_data(p: &Poset, field: FieldSpec) -> Result<QuadraticData, HomologyError> {
    p.require_graded()?;
    let cover_basis = p.cover_pairs();
    let two_chains = bar::enumerate_chains(p, 2, 2)?;
    let global_index: HashMap<&[usize], usize> = two_chains
        .chains
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i))
        .collect();
    let w = shriek_graded(p, 2, field);
    let mut relation_basis = Vec::new();
    for block in &w.blocks {
        for v in &block.basis {
            let mut global = vec![BigInt::zero(); two_chains.len()];
            for (ci, coeff) in v.iter().enumerate() {
                if !coeff.is_zero() {
                    global[global_index[block.chains[ci].as_slice()]] = coeff.clone();
                }
            }
            relation_basis.push(global);
        }
    }
    let l = p.max_interval_length();
    let shriek_dims = (0..=l).map(|n| shriek_graded(p, n, field).dim()).collect();
    Ok(QuadraticData {
        cover_basis,
        relation_basis,
        shriek_dims,
    })
}

/// Exactness report for the Koszul complex K_*(A) = A ⊗ A^!_*.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KoszulComplexReport {
    pub exact: bool,
    /// First failing (homological degree n, internal degree q), if any.
    pub failing: Option<(usize, usize)>,
}

impl KoszulComplexReport {
    pub fn to_tsv(&self) -> String {
        let mut out = format!("koszul_complex_exact\t{}\n", self.exact);
        if let Some((n, q)) = self.failing {
            out.push_str(&format!("failing\t{n}\t{q}\n"));
        }
        out
    }
}

/// Checks exactness of the augmented Koszul complex in every internal
/// degree q ≤ L (all terms vanish beyond L). Exactness everywhere is
/// equivalent to Koszulity of the incidence ring.
pub fn koszul_complex_exact(
    p: &Poset,
    field: FieldSpec,
) -> Result<KoszulComplexReport, HomologyError> {
    p.require_graded()?;
    let l = p.max_interval_length();
    let shriek: Vec<ShriekBasis> = (0..=l).map(|n| shriek_graded(p, n, field)).collect();
    let failures: Vec<(usize, usize)> = (1..=l)
        .into_par_iter()
        .filter_map(|q| {
            first_failure_in_degree(p, &shriek, q, field).map(|n| (n, q))
        })
        .collect();
    let failing = failures.into_iter().min_by_key(|&(n, q)| (q, n));
    Ok(KoszulComplexReport {
        exact: failing.is_none(),
        failing,
    })
}

/// One level of the Koszul complex at internal degree q, realized inside
/// the ambient space with basis (interval of length q-n, cover n-chain
/// starting where the interval ends).
struct KoszulLevel {
    /// ambient coordinate for (interval start w, full cover chain)
    lookup: HashMap<(usize, Vec<usize>), usize>,
    /// (w, block index, chain index) per ambient coordinate
    coords: Vec<(usize, usize, usize)>,
    /// basis of K_n(A)_q as columns in ambient coordinates
    basis: SparseMatrix,
}

fn build_level(p: &Poset, shriek_n: &ShriekBasis, q: usize, n: usize) -> KoszulLevel {
    let mut lookup = HashMap::new();
    let mut coords = Vec::new();
    let mut columns: Vec<Vec<(usize, BigInt)>> = Vec::new();
    for (w, a) in p.intervals_of_length(q - n) {
        for (bi, block) in shriek_n.blocks.iter().enumerate() {
            if block.start != a {
                continue;
            }
            let base = coords.len();
            for (ci, chain) in block.chains.iter().enumerate() {
                lookup.insert((w, chain.clone()), base + ci);
                coords.push((w, bi, ci));
            }
            for v in &block.basis {
                let col = v
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(ci, c)| (base + ci, c.clone()))
                    .collect();
                columns.push(col);
            }
        }
    }
    let mut basis = SparseMatrix::zero(coords.len(), columns.len());
    for (j, col) in columns.into_iter().enumerate() {
        for (i, c) in col {
            basis.set(i, j, c);
        }
    }
    KoszulLevel {
        lookup,
        coords,
        basis,
    }
}

/// The ambient differential: split off the first cover of the chain and
/// absorb it into the algebra factor.
fn level_differential(
    shriek_n: &ShriekBasis,
    level_n: &KoszulLevel,
    level_below: &KoszulLevel,
) -> SparseMatrix {
    let mut d = SparseMatrix::zero(level_below.coords.len(), level_n.coords.len());
    for (j, &(w, bi, ci)) in level_n.coords.iter().enumerate() {
        let chain = &shriek_n.blocks[bi].chains[ci];
        let tail = chain[1..].to_vec();
        let row = *level_below
            .lookup
            .get(&(w, tail))
            .expect("chain tails land in the level below");
        d.set(row, j, BigInt::one());
    }
    d
}

/// Returns the lowest homological position (0 = augmentation cokernel)
/// where the complex at internal degree q fails to be exact.
fn first_failure_in_degree(
    p: &Poset,
    shriek: &[ShriekBasis],
    q: usize,
    field: FieldSpec,
) -> Option<usize> {
    let empty = ShriekBasis {
        n: 0,
        blocks: Vec::new(),
    };
    let levels: Vec<KoszulLevel> = (0..=q)
        .map(|n| build_level(p, shriek.get(n).unwrap_or(&empty), q, n))
        .collect();
    // rank of the restriction of ∂_n to K_n, for n = 1..=q
    let mut boundary_rank = vec![0usize; q + 2];
    for n in 1..=q {
        if levels[n].basis.cols() == 0 {
            continue;
        }
        let d = level_differential(shriek.get(n).unwrap_or(&empty), &levels[n], &levels[n - 1]);
        boundary_rank[n] = linalg::rank(&d.mul(&levels[n].basis), field);
    }
    // positive degrees plus the augmentation position: for q > 0 the
    // augmentation kills all of K_0, so H_0 = dim A_q − rank ∂_1
    (0..=q).find(|&n| {
        let dim = levels[n].basis.cols();
        let incoming = if n == 0 { 0 } else { boundary_rank[n] };
        dim - incoming - boundary_rank[n + 1] != 0
    })
}

/// Per-degree comparison of dim A^!_n against dim T_{n,n}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiReport {
    /// (n, dim A^!_n, dim T_{n,n}) for n = 0..=L.
    pub pairs: Vec<(usize, usize, usize)>,
    /// Whether the dimensions agree on the whole diagonal.
    pub dims_agree: bool,
    /// The Tor-criterion verdict over the same field.
    pub koszul: bool,
    /// dims_agree together with the Koszul verdict: the computable shadow
    /// of "the canonical coring map is an isomorphism".
    pub agree: bool,
}

impl PhiReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\tdim_shriek\tdim_tor_diag\n");
        for &(n, s, t) in &self.pairs {
            out.push_str(&format!("{n}\t{s}\t{t}\n"));
        }
        out.push_str(&format!("agree\t{}\n", self.agree));
        out
    }
}

pub fn phi_dimension_check(p: &Poset, field: FieldSpec) -> Result<PhiReport, HomologyError> {
    let table = bar::tor_table(p, field)?;
    let l = p.max_interval_length();
    let pairs: Vec<(usize, usize, usize)> = (0..=l)
        .map(|n| (n, shriek_graded(p, n, field).dim(), table.dim(n, n)))
        .collect();
    let dims_agree = pairs.iter().all(|&(_, s, t)| s == t);
    Ok(PhiReport {
        pairs,
        dims_agree,
        koszul: table.koszul,
        agree: dims_agree && table.koszul,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::Rationals
    }

    fn tile() -> Poset {
        Poset::new(
            &["s", "u", "v", "t"],
            &[("s", "u"), ("s", "v"), ("u", "t"), ("v", "t")],
        )
        .unwrap()
    }

    fn hexagon() -> Poset {
        Poset::new(
            &["s", "x", "y", "u", "v", "t"],
            &[("s", "x"), ("s", "v"), ("x", "u"), ("v", "y"), ("u", "t"), ("y", "t")],
        )
        .unwrap()
    }

    fn antichain(n: usize) -> Poset {
        let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        Poset::new(&names, &[]).unwrap()
    }

    #[test]
    fn shriek_of_tile() {
        let p = tile();
        assert_eq!(compute_shriek(&p, 0, q()).unwrap().dim(), 4);
        assert_eq!(compute_shriek(&p, 1, q()).unwrap().dim(), 4);
        let s2 = compute_shriek(&p, 2, q()).unwrap();
        assert_eq!(s2.dim(), 1);
        let block = &s2.blocks[0];
        assert_eq!((block.start, block.end), (0, 3));
        // chains in lex order: (s,u,t) then (s,v,t); the defining relation
        // of the diamond is their difference
        assert_eq!(block.chains, vec![vec![0, 1, 3], vec![0, 2, 3]]);
        assert_eq!(block.basis, vec![vec![BigInt::from(1), BigInt::from(-1)]]);
        assert_eq!(compute_shriek(&p, 3, q()).unwrap().dim(), 0);
    }

    #[test]
    fn shriek_of_hexagon_vanishes_in_degree_two() {
        let h = hexagon();
        assert_eq!(compute_shriek(&h, 2, q()).unwrap().dim(), 0);
        assert_eq!(compute_shriek(&h, 3, q()).unwrap().dim(), 0);
    }

    #[test]
    fn relation_count_matches_multiplication_defect() {
        // dim W = #cover-2-chains − #length-2 intervals
        for p in [tile(), hexagon()] {
            let data = quadratic_data(&p, q()).unwrap();
            let two_chains = bar::enumerate_chains(&p, 2, 2).unwrap().len();
            let intervals = p.intervals_of_length(2).len();
            assert_eq!(data.relation_basis.len(), two_chains - intervals);
            assert_eq!(data.cover_basis.len(), p.covers().len());
        }
    }

    #[test]
    fn koszul_complex_on_fixtures() {
        assert_eq!(
            koszul_complex_exact(&tile(), q()).unwrap(),
            KoszulComplexReport {
                exact: true,
                failing: None
            }
        );
        let report = koszul_complex_exact(&hexagon(), q()).unwrap();
        assert!(!report.exact);
        assert_eq!(report.failing, Some((1, 3)));
        assert!(koszul_complex_exact(&antichain(4), q()).unwrap().exact);
    }

    #[test]
    fn phi_check_on_fixtures() {
        let r = phi_dimension_check(&tile(), q()).unwrap();
        assert!(r.agree);
        assert_eq!(r.pairs, vec![(0, 4, 4), (1, 4, 4), (2, 1, 1)]);

        // hexagon: diagonal dimensions agree, but the off-diagonal Tor
        // class breaks the isomorphism
        let r = phi_dimension_check(&hexagon(), q()).unwrap();
        assert!(r.dims_agree);
        assert!(!r.koszul);
        assert!(!r.agree);

        let r = phi_dimension_check(&antichain(5), q()).unwrap();
        assert!(r.agree);
        assert_eq!(r.pairs, vec![(0, 5, 5)]);
    }

    #[test]
    fn three_way_agreement_on_fixtures() {
        for p in [tile(), hexagon(), antichain(3)] {
            let tor = bar::tor_table(&p, q()).unwrap().koszul;
            let exact = koszul_complex_exact(&p, q()).unwrap().exact;
            let phi = phi_dimension_check(&p, q()).unwrap().agree;
            assert_eq!(tor, exact);
            assert_eq!(tor, phi);
        }
    }

    #[test]
    fn koszul_differential_squares_to_zero() {
        // the composite of two Koszul differentials vanishes on the
        // subcomplex spanned by the A^! bases
        let p = tile();
        let l = p.max_interval_length();
        let shriek: Vec<ShriekBasis> = (0..=l).map(|n| shriek_graded(&p, n, q())).collect();
        for qq in 2..=l {
            let levels: Vec<KoszulLevel> =
                (0..=qq).map(|n| build_level(&p, &shriek[n], qq, n)).collect();
            for n in 2..=qq {
                if levels[n].basis.cols() == 0 {
                    continue;
                }
                let d_n = level_differential(&shriek[n], &levels[n], &levels[n - 1]);
                let d_prev = level_differential(&shriek[n - 1], &levels[n - 1], &levels[n - 2]);
                let composite = d_prev.mul(&d_n.mul(&levels[n].basis));
                assert!(composite.is_zero_matrix());
            }
        }
    }
}
