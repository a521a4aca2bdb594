use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::liouvillian::Liouvillian;
use super::{LatticeParams, LatticeSpec, LatticeState, NULL_SPACE_DIM_CAP};
use crate::density::hermitian_part;
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest D² for which the null space is found by SVD (and degeneracy
/// detected); beyond it a bordered LU solve is used.
const SVD_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyStateMethod {
    /// Kernel of the dense D² × D² Liouvillian.
    NullSpace,
    /// RK4 from the vacuum until ‖ρ̇‖_F drops below the tolerance.
    LongTime,
    /// Preconditioned restarted GMRES on the trace-bordered generator.
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Required ‖L ρ‖_F of the returned state (LongTime and Iterative).
    pub residual_tol: f64,
    /// Give up on LongTime after this much evolution time (1/κ).
    pub max_time: f64,
    /// Relative residual at which GMRES stops.
    pub gmres_tol: f64,
    pub max_iterations: usize,
    /// Krylov basis size before a restart (reduced for large D to bound memory).
    pub restart: usize,
    /// Relative singular value below which a kernel direction is counted.
    pub kernel_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            max_time: 1e4,
            gmres_tol: 1e-12,
            max_iterations: 4000,
            restart: 30,
            kernel_tol: 1e-9,
        }
    }
}

pub fn steady_state(spec: &LatticeSpec, params: &LatticeParams, method: SteadyStateMethod) -> Result<LatticeState> {
    steady_state_with(spec, params, method, &SolverOptions::default())
}

pub fn steady_state_with(
    spec: &LatticeSpec,
    params: &LatticeParams,
    method: SteadyStateMethod,
    options: &SolverOptions,
) -> Result<LatticeState> {
    spec.validate()?;
    let dim = spec.dim();
    if method == SteadyStateMethod::NullSpace && dim > NULL_SPACE_DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: NULL_SPACE_DIM_CAP });
    }
    let l = Liouvillian::new(spec, params)?;
    let flat = match method {
        SteadyStateMethod::NullSpace => null_space(&l, options)?,
        SteadyStateMethod::LongTime => long_time(&l, options)?,
        SteadyStateMethod::Iterative => iterative(&l, options)?,
    };
    let rho = finish(dim, &flat);
    let residual = residual(&l, &rho);
    if method != SteadyStateMethod::NullSpace && residual > options.residual_tol {
        return Err(Error::NotConverged(format!("residual {residual:.3e} after {method:?} solve")));
    }
    Ok(LatticeState { spec: spec.clone(), rho, residual })
}

/// Row-major flat buffer → Hermitian unit-trace matrix.
fn finish(dim: usize, flat: &[C64]) -> DMatrix<C64> {
    let m = DMatrix::from_row_slice(dim, dim, flat);
    let h = hermitian_part(&m);
    let tr = h.trace().re;
    h / C64::new(tr, 0.0)
}

fn residual(l: &Liouvillian, rho: &DMatrix<C64>) -> f64 {
    let flat: Vec<C64> = rho.transpose().as_slice().to_vec();
    let mut out = vec![ZERO; flat.len()];
    l.apply(&flat, &mut out);
    norm(&out)
}

fn null_space(l: &Liouvillian, options: &SolverOptions) -> Result<Vec<C64>> {
    let d = l.dim;
    let n = d * d;
    let mut m = l.to_dense();
    if n <= SVD_LIMIT {
        let svd = m.svd(false, true);
        let sv = &svd.singular_values;
        let smax = sv.max();
        let kernel: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] <= options.kernel_tol * smax).collect();
        if kernel.len() > 1 {
            return Err(Error::Multistability { kernel_dim: kernel.len() });
        }
        let k = sv.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).expect("non-empty");
        let v_t = svd.v_t.expect("requested");
        return Ok(v_t.row(k).iter().map(|z| z.conj()).collect());
    }
    for c in 0..n {
        m[(0, c)] = ZERO;
    }
    for r in 0..d {
        m[(0, r * d + r)] = C64::new(1.0, 0.0);
    }
    let mut b = DVector::zeros(n);
    b[0] = C64::new(1.0, 0.0);
    let x = m.lu().solve(&b).ok_or(Error::Multistability { kernel_dim: 2 })?;
    Ok(x.as_slice().to_vec())
}

fn long_time(l: &Liouvillian, options: &SolverOptions) -> Result<Vec<C64>> {
    let d = l.dim;
    let n = d * d;
    let dt = 2.5 / l.spectral_bound().max(1e-12);
    let mut rho = vec![ZERO; n];
    rho[0] = C64::new(1.0, 0.0);
    let mut k = [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]];
    let mut y = vec![ZERO; n];
    let mut t = 0.0;
    loop {
        l.apply(&rho, &mut k[0]);
        let res = norm(&k[0]);
        if res < options.residual_tol {
            return Ok(rho);
        }
        if !res.is_finite() || t > options.max_time {
            return Err(Error::NotConverged(format!("long-time residual {res:.3e} at t = {t:.1}")));
        }
        for (stage, frac) in [(0usize, 0.5), (1, 0.5), (2, 1.0)] {
            for ((o, x), kk) in y.iter_mut().zip(&rho).zip(&k[stage]) {
                *o = x + kk * (frac * dt);
            }
            l.apply(&y, &mut k[stage + 1]);
        }
        let w = dt / 6.0;
        for (i, x) in rho.iter_mut().enumerate() {
            *x += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * w;
        }
        t += dt;
    }
}

fn iterative(l: &Liouvillian, options: &SolverOptions) -> Result<Vec<C64>> {
    let n = l.dim * l.dim;
    let mut b = vec![ZERO; n];
    b[0] = C64::new(1.0, 0.0);
    // keep the Krylov basis under ~800 MB
    let cap = (8e8 / (16.0 * n as f64)) as usize;
    let m = options.restart.min(cap.max(5));
    gmres(
        |x, out| l.apply_bordered(x, out),
        |x, out| l.precondition(x, out),
        &b,
        options.gmres_tol,
        m,
        options.max_iterations,
    )
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Right-preconditioned restarted GMRES for A x = b, with P⁻¹ supplied by
/// `precond`.
fn gmres(
    op: impl Fn(&[C64], &mut [C64]),
    precond: impl Fn(&[C64], &mut [C64]),
    b: &[C64],
    tol: f64,
    restart: usize,
    max_iterations: usize,
) -> Result<Vec<C64>> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![ZERO; n];
    let mut r = vec![ZERO; n];
    let mut z = vec![ZERO; n];
    let mut iterations = 0;
    let mut inner_converged = false;
    loop {
        op(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let beta = norm(&r);
        // rounding can keep the true residual slightly above the recurrence
        if beta <= tol * bnorm || (inner_converged && beta <= 100.0 * tol * bnorm) {
            return Ok(x);
        }
        if iterations >= max_iterations {
            return Err(Error::NotConverged(format!("GMRES relative residual {:.3e} after {iterations} iterations", beta / bnorm)));
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![ZERO; restart]; restart + 1];
        let mut rot: Vec<(f64, C64)> = Vec::with_capacity(restart);
        let mut g = vec![ZERO; restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut cols = 0;
        for j in 0..restart {
            precond(&basis[j], &mut z);
            let mut w = vec![ZERO; n];
            op(&z, &mut w);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let wn = norm(&w);
            h[j + 1][j] = C64::new(wn, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, bb) = (h[i][j], h[i + 1][j]);
                h[i][j] = c * a + s * bb;
                h[i + 1][j] = -s.conj() * a + c * bb;
            }
            let (c, s, rr) = givens(h[j][j], h[j + 1][j]);
            h[j][j] = rr;
            h[j + 1][j] = ZERO;
            rot.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g[j + 1] = -s.conj() * gj;
            cols = j + 1;
            iterations += 1;
            if g[j + 1].norm() <= tol * bnorm || wn == 0.0 {
                inner_converged = true;
                break;
            }
            if iterations >= max_iterations {
                break;
            }
            basis.push(w.into_iter().map(|v| v / wn).collect());
        }
        let mut y = vec![ZERO; cols];
        for i in (0..cols).rev() {
            let mut acc = g[i];
            for k in i + 1..cols {
                acc -= h[i][k] * y[k];
            }
            y[i] = acc / h[i][i];
        }
        let mut u = vec![ZERO; n];
        for (v, yi) in basis.iter().zip(&y) {
            for (uk, vk) in u.iter_mut().zip(v) {
                *uk += yi * vk;
            }
        }
        precond(&u, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
}

/// Complex Givens rotation zeroing `b` against `a`: returns (c, s, r) with
/// [c s; −s̄ c]·[a; b] = [r; 0].
fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    if b == ZERO {
        return (1.0, ZERO, a);
    }
    if a == ZERO {
        return (0.0, C64::new(1.0, 0.0), b);
    }
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let phase = a / a.norm();
    (a.norm() / r, phase * b.conj() / r, phase * r)
}
