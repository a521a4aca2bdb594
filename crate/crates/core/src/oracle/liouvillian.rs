//! Sparse lattice Hamiltonian and the matrix-free Lindblad generator.
//!
//! Density matrices are stored row-major in flat `Vec<C64>` buffers of
//! length D², entry (r, c) at `r * D + c`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{LatticeParams, LatticeSpec};
use crate::error::Result;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ladder {
    Raise,
    Lower,
}
use Ladder::{Lower, Raise};

/// Lattice Hamiltonian split into its diagonal and a CSR off-diagonal part.
#[derive(Debug, Clone)]
pub struct LatticeHamiltonian {
    dim: usize,
    diagonal: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl LatticeHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Stored off-diagonal entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        if r == c {
            return C64::new(self.diagonal[r], 0.0);
        }
        self.row(r).find(|&(k, _)| k == c).map_or(C64::new(0.0, 0.0), |(_, v)| v)
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            m[(r, r)] = C64::new(self.diagonal[r], 0.0);
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    fn row_abs_sum(&self, r: usize) -> f64 {
        self.row(r).map(|(_, v)| v.norm()).sum()
    }
}

/// Occupation digits of basis index `r`, site 0 first.
pub(crate) fn digits(spec: &LatticeSpec, mut r: usize, out: &mut [usize]) {
    let d = spec.n_max + 1;
    for k in (0..spec.n_sites).rev() {
        out[k] = r % d;
        r /= d;
    }
}

pub(crate) fn stride(spec: &LatticeSpec, site: usize) -> usize {
    (spec.n_max + 1).pow((spec.n_sites - 1 - site) as u32)
}

/// Applies a product of ladder operators (rightmost acts first) to a basis
/// state; `None` when it annihilates the state or leaves the truncation.
fn apply_ladder(spec: &LatticeSpec, occ: &[usize], ops: &[(usize, Ladder)]) -> Option<(usize, f64)> {
    let mut occ = occ.to_vec();
    let mut amp = 1.0;
    for &(site, op) in ops.iter().rev() {
        match op {
            Lower => {
                if occ[site] == 0 {
                    return None;
                }
                amp *= (occ[site] as f64).sqrt();
                occ[site] -= 1;
            }
            Raise => {
                if occ[site] == spec.n_max {
                    return None;
                }
                occ[site] += 1;
                amp *= (occ[site] as f64).sqrt();
            }
        }
    }
    let idx = occ.iter().fold(0, |acc, &n| acc * (spec.n_max + 1) + n);
    Some((idx, amp))
}

/// Builds the many-body Hamiltonian with bare per-bond couplings.
///
/// Correlated hopping on a bond (i, j) with i < j enters as
/// t_ch (a_i a_j† a_j† a_j + a_i† a_i† a_i a_j − ½ a_i† a_i† a_j a_j) + H.c.
pub fn build_lattice_hamiltonian(spec: &LatticeSpec, params: &LatticeParams) -> Result<LatticeHamiltonian> {
    spec.validate()?;
    params.validate()?;
    let dim = spec.dim();
    let bonds = spec.bonds();
    let mut diagonal = vec![0.0; dim];
    // (monomial, coefficient); each also contributes its Hermitian conjugate
    let mut monomials: Vec<(Vec<(usize, Ladder)>, C64)> = Vec::new();
    for k in 0..spec.n_sites {
        if params.omega != 0.0 {
            monomials.push((vec![(k, Raise)], C64::new(params.omega, 0.0)));
        }
    }
    for &(i, j) in &bonds {
        if params.j != 0.0 {
            monomials.push((vec![(i, Raise), (j, Lower)], C64::new(-params.j, 0.0)));
        }
        if params.t_ch != 0.0 {
            let t = C64::new(params.t_ch, 0.0);
            monomials.push((vec![(i, Lower), (j, Raise), (j, Raise), (j, Lower)], t));
            monomials.push((vec![(i, Raise), (i, Raise), (i, Lower), (j, Lower)], t));
            monomials.push((vec![(i, Raise), (i, Raise), (j, Lower), (j, Lower)], -0.5 * t));
        }
    }

    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
    let mut occ = vec![0; spec.n_sites];
    for r in 0..dim {
        digits(spec, r, &mut occ);
        let mut e = 0.0;
        for &n in &occ {
            let n = n as f64;
            e += -params.delta * n + params.u * n * (n - 1.0);
        }
        for &(i, j) in &bonds {
            e += params.v * (occ[i] * occ[j]) as f64;
        }
        diagonal[r] = e;
        for (ops, coeff) in &monomials {
            if let Some((target, amp)) = apply_ladder(spec, &occ, ops) {
                rows[target].push((r, coeff * amp));
                rows[r].push((target, coeff.conj() * amp));
            }
        }
    }

    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for (r, mut entries) in rows.into_iter().enumerate() {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, C64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        for (c, v) in merged {
            if c == r {
                diagonal[r] += v.re;
            } else if v != C64::new(0.0, 0.0) {
                cols.push(c);
                vals.push(v);
            }
        }
        row_ptr.push(cols.len());
    }
    Ok(LatticeHamiltonian { dim, diagonal, row_ptr, cols, vals })
}

/// Lindblad generator with local photon loss on every site.
pub(crate) struct Liouvillian {
    pub dim: usize,
    h: LatticeHamiltonian,
    /// diagonal of H − iκ/2 Σ n_k
    heff: Vec<C64>,
    /// (stride, √κ·√(n_k + 1) per basis state, zero at the top level)
    jumps: Vec<(usize, Vec<f64>)>,
}

impl Liouvillian {
    pub fn new(spec: &LatticeSpec, params: &LatticeParams) -> Result<Self> {
        let h = build_lattice_hamiltonian(spec, params)?;
        let dim = h.dim;
        let mut occ = vec![0; spec.n_sites];
        let mut heff = Vec::with_capacity(dim);
        let mut jumps: Vec<(usize, Vec<f64>)> =
            (0..spec.n_sites).map(|k| (stride(spec, k), vec![0.0; dim])).collect();
        for r in 0..dim {
            digits(spec, r, &mut occ);
            let total: usize = occ.iter().sum();
            heff.push(C64::new(h.diagonal[r], -0.5 * params.kappa * total as f64));
            for (k, &n) in occ.iter().enumerate() {
                if n < spec.n_max {
                    jumps[k].1[r] = (params.kappa * (n + 1) as f64).sqrt();
                }
            }
        }
        Ok(Self { dim, h, heff, jumps })
    }

    #[cfg(test)]
    pub fn hamiltonian(&self) -> &LatticeHamiltonian {
        &self.h
    }

    fn lambda(&self, r: usize, c: usize) -> C64 {
        -I * (self.heff[r] - self.heff[c].conj())
    }

    /// out = L(ρ)
    pub fn apply(&self, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        out.par_chunks_mut(d).enumerate().for_each(|(r, row)| {
            let rho_r = &rho[r * d..(r + 1) * d];
            for c in 0..d {
                row[c] = self.lambda(r, c) * rho_r[c];
            }
            for (k, h) in self.h.row(r) {
                let f = -I * h;
                for (o, x) in row.iter_mut().zip(&rho[k * d..(k + 1) * d]) {
                    *o += f * x;
                }
            }
            for (k, &x) in rho_r.iter().enumerate() {
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                let ix = I * x;
                for (c, h) in self.h.row(k) {
                    row[c] += ix * h;
                }
            }
            for (s, f) in &self.jumps {
                let fr = f[r];
                if fr == 0.0 {
                    continue;
                }
                let src = &rho[(r + s) * d..(r + s + 1) * d];
                for c in 0..d - s {
                    row[c] += fr * f[c] * src[c + s];
                }
            }
        });
    }

    /// Dense D² × D² matrix acting on row-major vectorized ρ.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d * d, d * d);
        for r in 0..d {
            for c in 0..d {
                m[(r * d + c, r * d + c)] += self.lambda(r, c);
            }
            for (k, h) in self.h.row(r) {
                for c in 0..d {
                    m[(r * d + c, k * d + c)] += -I * h;
                }
            }
            for (c, h) in self.h.row(r) {
                // (ρH)_{r'c} gets ρ_{r'r} H_{rc}
                for rr in 0..d {
                    m[(rr * d + c, rr * d + r)] += I * h;
                }
            }
            for (s, f) in &self.jumps {
                if f[r] == 0.0 {
                    continue;
                }
                for c in 0..d - s {
                    if f[c] != 0.0 {
                        m[(r * d + c, (r + s) * d + c + s)] += C64::new(f[r] * f[c], 0.0);
                    }
                }
            }
        }
        m
    }

    /// Gershgorin-type bound on the generator's spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            worst = worst.max(self.heff[r].norm() + self.h.row_abs_sum(r));
        }
        let jump: f64 = self.jumps.iter().map(|(_, f)| f.iter().fold(0.0f64, |a, &b| a.max(b * b))).sum();
        2.0 * worst + jump
    }

    /// Solves P x = b where P keeps the diagonal and jump parts of the
    /// generator and replaces the (0, 0) equation by the trace.
    pub fn precondition(&self, b: &[C64], x: &mut [C64]) {
        let d = self.dim;
        for r in (0..d).rev() {
            for c in (0..d).rev() {
                if r == 0 && c == 0 {
                    continue;
                }
                let mut acc = b[r * d + c];
                for (s, f) in &self.jumps {
                    if r + s < d && c + s < d {
                        let w = f[r] * f[c];
                        if w != 0.0 {
                            acc -= w * x[(r + s) * d + c + s];
                        }
                    }
                }
                x[r * d + c] = acc / self.lambda(r, c);
            }
        }
        let rest: C64 = (1..d).map(|r| x[r * d + r]).sum();
        x[0] = b[0] - rest;
    }

    /// L(ρ) with the (0, 0) entry replaced by tr ρ.
    pub fn apply_bordered(&self, rho: &[C64], out: &mut [C64]) {
        self.apply(rho, out);
        out[0] = (0..self.dim).map(|r| rho[r * self.dim + r]).sum();
    }
}
