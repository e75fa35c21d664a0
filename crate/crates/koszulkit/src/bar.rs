//! The internally graded normalized bar complex of an incidence ring, its
//! bigraded Tor table, and Tor of frontier modules.
//!
//! For a graded poset the degree-(n, m) part of the bar complex has one
//! basis vector per n-step chain `x0 < x1 < ... < xn` whose step lengths
//! sum to m. The differential deletes interior points with alternating
//! signs. Homology dimensions come from two ranks per cell, so the whole
//! table is a finite exact decision procedure for Koszulity.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{self, FieldSpec, SparseMatrix};
use crate::poset::{Poset, PosetError};

#[derive(Debug, Error)]
pub enum HomologyError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("target {0:?} is not a maximal element")]
    InvalidTarget(String),
    #[error("generator {0:?} is not strictly below the target")]
    InvalidGenerator(String),
}

/// The basis 𝒫_{n,m}: all n-step chains of internal length m, in
/// lexicographic order by element position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainFamily {
    pub n: usize,
    pub m: usize,
    /// Each chain is a strictly increasing sequence of n + 1 element indices.
    pub chains: Vec<Vec<usize>>,
}

impl ChainFamily {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn chain_names(&self, p: &Poset, k: usize) -> Vec<String> {
        self.chains[k].iter().map(|&i| p.name(i).to_string()).collect()
    }
}

/// Enumerates 𝒫_{n,m} for a graded poset.
pub fn enumerate_chains(p: &Poset, n: usize, m: usize) -> Result<ChainFamily, HomologyError> {
    p.require_graded()?;
    Ok(chains_graded(p, n, m))
}

fn chains_graded(p: &Poset, n: usize, m: usize) -> ChainFamily {
    let mut chains = Vec::new();
    let mut prefix = Vec::with_capacity(n + 1);
    for start in 0..p.len() {
        prefix.push(start);
        extend_chains(p, n, m, 0, &mut prefix, &mut chains);
        prefix.pop();
    }
    ChainFamily { n, m, chains }
}

fn extend_chains(
    p: &Poset,
    n: usize,
    m: usize,
    used: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if prefix.len() == n + 1 {
        if used == m {
            out.push(prefix.clone());
        }
        return;
    }
    let steps_left = n + 1 - prefix.len();
    let last = *prefix.last().unwrap();
    for next in 0..p.len() {
        if !p.lt(last, next) {
            continue;
        }
        let step = p
            .length_idx(last, next)
            .expect("comparable pair in graded poset has a length");
        if used + step + (steps_left - 1) > m {
            continue;
        }
        prefix.push(next);
        extend_chains(p, n, m, used + step, prefix, out);
        prefix.pop();
    }
}

/// The bar differential as a matrix from `dom` to `cod`, both families of
/// the same internal degree with `dom.n == cod.n + 1`. Column j holds the
/// image of the j-th domain chain: interior point i deleted with sign
/// (-1)^(i-1).
pub fn differential_between(dom: &ChainFamily, cod: &ChainFamily) -> SparseMatrix {
    debug_assert_eq!(dom.m, cod.m);
    debug_assert_eq!(dom.n, cod.n + 1);
    let index: HashMap<&[usize], usize> = cod
        .chains
        .iter()
        .enumerate()
        .map(|(k, c)| (c.as_slice(), k))
        .collect();
    let mut d = SparseMatrix::zero(cod.len(), dom.len());
    for (col, chain) in dom.chains.iter().enumerate() {
        for i in 1..chain.len() - 1 {
            let mut shorter = chain.clone();
            shorter.remove(i);
            let row = *index
                .get(shorter.as_slice())
                .expect("deleting an interior point keeps the chain in the codomain family");
            let sign = if (i - 1) % 2 == 0 {
                BigInt::one()
            } else {
                -BigInt::one()
            };
            d.add_to(row, col, &sign);
        }
    }
    d
}

/// The differential d_n : Ω_n(A, m) → Ω_{n-1}(A, m); requires n ≥ 1.
/// d_1 is the zero map.
pub fn build_differential(p: &Poset, n: usize, m: usize) -> Result<SparseMatrix, HomologyError> {
    assert!(n >= 1, "differential defined for n >= 1");
    p.require_graded()?;
    let dom = chains_graded(p, n, m);
    let cod = chains_graded(p, n - 1, m);
    Ok(differential_between(&dom, &cod))
}

/// dim_k T_{n,m}(A) = |𝒫_{n,m}| − rank d_n − rank d_{n+1}.
pub fn tor_dimension(
    p: &Poset,
    n: usize,
    m: usize,
    field: FieldSpec,
) -> Result<usize, HomologyError> {
    p.require_graded()?;
    let fam = chains_graded(p, n, m);
    if fam.is_empty() {
        return Ok(0);
    }
    let boundary_in = if n == 0 {
        0
    } else {
        let dom = &fam;
        let cod = chains_graded(p, n - 1, m);
        linalg::rank(&differential_between(dom, &cod), field)
    };
    let above = chains_graded(p, n + 1, m);
    let boundary_out = if above.is_empty() {
        0
    } else {
        linalg::rank(&differential_between(&above, &fam), field)
    };
    Ok(fam.len() - boundary_in - boundary_out)
}

/// The bigraded dimension table of Tor, with the Koszulity verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorTable {
    pub field: FieldSpec,
    /// Largest interval length; every cell with m beyond it vanishes.
    pub max_length: usize,
    /// dim T_{n,m} for all 0 ≤ n ≤ m ≤ max_length (zero cells included).
    pub dims: BTreeMap<(usize, usize), usize>,
    pub koszul: bool,
    /// Off-diagonal nonzero cells (n, m, dim), ordered by (n, m).
    pub witnesses: Vec<(usize, usize, usize)>,
}

impl TorTable {
    pub fn dim(&self, n: usize, m: usize) -> usize {
        self.dims.get(&(n, m)).copied().unwrap_or(0)
    }

    /// TSV rows `n <TAB> m <TAB> dim` (nonzero cells unless `full`), then a
    /// `koszul <TAB> true|false` trailer.
    pub fn to_tsv(&self, full: bool) -> String {
        let mut out = String::from("n\tm\tdim\n");
        for (&(n, m), &dim) in &self.dims {
            if full || dim > 0 {
                out.push_str(&format!("{n}\t{m}\t{dim}\n"));
            }
        }
        out.push_str(&format!("koszul\t{}\n", self.koszul));
        out
    }

    /// Aligned human-readable view of the table.
    pub fn to_pretty(&self) -> String {
        let l = self.max_length;
        let width = self
            .dims
            .values()
            .map(|d| d.to_string().len())
            .max()
            .unwrap_or(1)
            .max(l.to_string().len())
            + 1;
        let mut out = String::from("dim T_{n,m} (rows n, columns m)\n");
        out.push_str(&format!("{:>width$} |", "n\\m"));
        for m in 0..=l {
            out.push_str(&format!("{m:>width$}"));
        }
        out.push('\n');
        for n in 0..=l {
            out.push_str(&format!("{n:>width$} |"));
            for m in 0..=l {
                if m < n {
                    out.push_str(&format!("{:>width$}", "."));
                } else {
                    out.push_str(&format!("{:>width$}", self.dim(n, m)));
                }
            }
            out.push('\n');
        }
        out.push_str(&format!("koszul: {} (field {})\n", self.koszul, self.field));
        out
    }
}

/// Computes the full Tor table over 0 ≤ n ≤ m ≤ L. Cells of distinct
/// internal degree are independent and evaluated in parallel.
pub fn tor_table(p: &Poset, field: FieldSpec) -> Result<TorTable, HomologyError> {
    p.require_graded()?;
    let l = p.max_interval_length();
    let per_degree: Vec<Vec<usize>> = (0..=l)
        .into_par_iter()
        .map(|m| dims_for_internal_degree(p, m, field))
        .collect();
    let mut dims = BTreeMap::new();
    let mut witnesses = Vec::new();
    for (m, row) in per_degree.into_iter().enumerate() {
        for (n, dim) in row.into_iter().enumerate() {
            dims.insert((n, m), dim);
            if n != m && dim > 0 {
                witnesses.push((n, m, dim));
            }
        }
    }
    witnesses.sort_unstable();
    Ok(TorTable {
        field,
        max_length: l,
        koszul: witnesses.is_empty(),
        dims,
        witnesses,
    })
}

/// Dimensions of T_{n,m} for fixed m and n = 0..=m.
fn dims_for_internal_degree(p: &Poset, m: usize, field: FieldSpec) -> Vec<usize> {
    let families: Vec<ChainFamily> = (0..=m + 1).map(|n| chains_graded(p, n, m)).collect();
    // rank_d[n] = rank of d_n for n = 1..=m+1
    let mut rank_d = vec![0usize; m + 2];
    for n in 1..=m + 1 {
        if families[n].is_empty() || families[n - 1].is_empty() {
            continue;
        }
        let d = differential_between(&families[n], &families[n - 1]);
        rank_d[n] = linalg::rank(&d, field);
    }
    (0..=m)
        .map(|n| families[n].len() - rank_d[n] - rank_d[n + 1])
        .collect()
}

/// A homology class representative: a cycle that is not a boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessCycle {
    pub n: usize,
    pub m: usize,
    /// Nonzero coordinates, in chain enumeration order.
    pub terms: Vec<(Vec<String>, BigInt)>,
}

impl fmt::Display for WitnessCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (chain, coeff) in &self.terms {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            let sign = if coeff.is_negative() { "-" } else { "+" };
            let tensor = chain
                .windows(2)
                .map(|w| format!("e({},{})", w[0], w[1]))
                .collect::<Vec<_>>()
                .join("⊗");
            write!(f, "{sign}{}·{tensor}", coeff.abs())?;
        }
        Ok(())
    }
}

/// Extracts one nonzero homology class in bidegree (n, m): the first
/// kernel-basis cycle of d_n that is not a boundary of d_{n+1}. Returns
/// `None` when T_{n,m} = 0.
pub fn witness_cycle(
    p: &Poset,
    n: usize,
    m: usize,
    field: FieldSpec,
) -> Result<Option<WitnessCycle>, HomologyError> {
    p.require_graded()?;
    let fam = chains_graded(p, n, m);
    if fam.is_empty() {
        return Ok(None);
    }
    let cycles = if n == 0 {
        (0..fam.len())
            .map(|i| {
                let mut e = vec![BigInt::zero(); fam.len()];
                e[i] = BigInt::one();
                e
            })
            .collect()
    } else {
        let cod = chains_graded(p, n - 1, m);
        linalg::kernel_basis(&differential_between(&fam, &cod), field)
    };
    let above = chains_graded(p, n + 1, m);
    let boundaries: Vec<Vec<BigInt>> = if above.is_empty() {
        Vec::new()
    } else {
        let d = differential_between(&above, &fam);
        (0..d.cols()).map(|j| d.column(j)).collect()
    };
    for v in cycles {
        if boundaries.is_empty() || !linalg::in_span(&boundaries, &v, field) {
            let terms = v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (fam.chain_names(p, k), c.clone()))
                .collect();
            return Ok(Some(WitnessCycle { n, m, terms }));
        }
    }
    Ok(None)
}

/// dim_k Tor_{n,m} of the frontier module M = Σ_{u ∈ gens} B e_{u,t},
/// where B is the incidence ring of the poset without the maximal element
/// t.
///
/// Computed as homology at position n + 1 of the subcomplex of the bar
/// complex spanned by chains ending at t whose element below t is ≤ some
/// generator.
pub fn module_tor<S: AsRef<str>>(
    p: &Poset,
    target: &str,
    gens: &[S],
    n: usize,
    m: usize,
    field: FieldSpec,
) -> Result<usize, HomologyError> {
    p.require_graded()?;
    let t = p.require_element(target)?;
    if !p.successors(t).is_empty() {
        return Err(HomologyError::InvalidTarget(target.to_string()));
    }
    let mut gen_idx = Vec::new();
    for g in gens {
        let u = p.require_element(g.as_ref())?;
        if !p.lt(u, t) {
            return Err(HomologyError::InvalidGenerator(g.as_ref().to_string()));
        }
        gen_idx.push(u);
    }
    let allowed: Vec<bool> = (0..p.len())
        .map(|x| gen_idx.iter().any(|&u| p.leq(x, u)))
        .collect();
    let fam_mid = module_chains(p, t, &allowed, n + 1, m);
    if fam_mid.is_empty() {
        return Ok(0);
    }
    let boundary_in = if n == 0 {
        0
    } else {
        let fam_low = module_chains(p, t, &allowed, n, m);
        if fam_low.is_empty() {
            0
        } else {
            linalg::rank(&differential_between(&fam_mid, &fam_low), field)
        }
    };
    let fam_high = module_chains(p, t, &allowed, n + 2, m);
    let boundary_out = if fam_high.is_empty() {
        0
    } else {
        linalg::rank(&differential_between(&fam_high, &fam_mid), field)
    };
    Ok(fam_mid.len() - boundary_in - boundary_out)
}

/// Chains (x0 < ... < x_{k-1} < t) of total internal length m whose element
/// below t is allowed; lex order on the part below t.
fn module_chains(p: &Poset, t: usize, allowed: &[bool], k: usize, m: usize) -> ChainFamily {
    let mut chains = Vec::new();
    if k == 0 {
        if m == 0 {
            chains.push(vec![t]);
        }
        return ChainFamily { n: 0, m, chains };
    }
    let mut prefix = Vec::with_capacity(k + 1);
    for start in 0..p.len() {
        prefix.push(start);
        extend_module_chains(p, t, allowed, k, m, 0, &mut prefix, &mut chains);
        prefix.pop();
    }
    ChainFamily { n: k, m, chains }
}

#[allow(clippy::too_many_arguments)]
fn extend_module_chains(
    p: &Poset,
    t: usize,
    allowed: &[bool],
    k: usize,
    m: usize,
    used: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if prefix.len() == k {
        let last = *prefix.last().unwrap();
        if allowed[last] {
            let final_step = p
                .length_idx(last, t)
                .expect("allowed elements sit below the target");
            if used + final_step == m {
                let mut chain = prefix.clone();
                chain.push(t);
                out.push(chain);
            }
        }
        return;
    }
    let steps_left = k - prefix.len();
    let last = *prefix.last().unwrap();
    for next in 0..p.len() {
        if next == t || !p.lt(last, next) {
            continue;
        }
        let step = p.length_idx(last, next).expect("graded");
        if used + step + steps_left > m {
            continue;
        }
        prefix.push(next);
        extend_module_chains(p, t, allowed, k, m, used + step, prefix, out);
        prefix.pop();
    }
}
