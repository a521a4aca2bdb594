//! Expectation values, single-site moments and Wigner functions.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::fock::Operator;
use crate::model::{CorrelatedFields, MeanFields};

/// tr(X ρ).
pub fn expectation(op: &Operator, rho: &DensityMatrix) -> Result<C64> {
    rho.expect(op)
}

/// ⟨a⟩, ⟨n⟩, ⟨a†a†a⟩ and ⟨aa⟩ of one site.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SiteMoments {
    pub a: C64,
    pub n: f64,
    pub adag_adag_a: C64,
    pub a_a: C64,
}

impl SiteMoments {
    /// Computes all four moments in one sweep over the matrix, using the
    /// closed-form matrix elements of the ladder operators.
    pub fn of(rho: &DensityMatrix) -> Self {
        moments(rho.matrix())
    }

    /// Mean fields this site imposes on the opposite sublattice.
    pub fn as_mean_fields(&self) -> MeanFields {
        MeanFields {
            a_other: self.a,
            n_other: self.n,
            ch: CorrelatedFields { adag_adag_a: self.adag_adag_a, a: self.a, a_a: self.a_a },
        }
    }
}

pub(crate) fn moments(rho: &DMatrix<C64>) -> SiteMoments {
    let d = rho.nrows();
    let mut m = SiteMoments::default();
    for k in 0..d {
        let kf = k as f64;
        m.n += kf * rho[(k, k)].re;
        if k + 1 < d {
            // tr(aρ) = Σ √(k+1) ρ[k+1, k]
            let s1 = (kf + 1.0).sqrt();
            m.a += rho[(k + 1, k)] * s1;
            // a†a†a |k+1⟩ = (k+1)√(k+2) |k+2⟩ ... tr(a†a†a ρ) = Σ ⟨k+1|a†a†a|k⟩ ρ[k, k+1]
            // a†a†a|k⟩ = k √(k+1) |k+1⟩
            m.adag_adag_a += rho[(k, k + 1)] * (kf * s1);
        }
        if k + 2 < d {
            // tr(aaρ) = Σ √((k+1)(k+2)) ρ[k+2, k]
            m.a_a += rho[(k + 2, k)] * ((kf + 1.0) * (kf + 2.0)).sqrt();
        }
    }
    m
}

/// Moments of both sublattices of a mean-field state.
pub fn mf_expectations(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> (SiteMoments, SiteMoments) {
    (SiteMoments::of(rho_a), SiteMoments::of(rho_b))
}

/// Wigner function sampled on a rectangular (x, p) grid.
///
/// `values[(i, j)]` is W(xs[i], ps[j]) with x = (a + a†)/√2,
/// p = i(a† − a)/√2, normalized so that ∫W dx dp = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl WignerGrid {
    /// Riemann sum ΣW·dx·dp, assuming uniform spacing.
    pub fn integral(&self) -> f64 {
        let dx = spacing(&self.xs);
        let dp = spacing(&self.ps);
        self.values.sum() * dx * dp
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// Grid point of the largest value.
    pub fn argmax(&self) -> (f64, f64) {
        let (i, j) = self.values.iamax_full();
        (self.xs[i], self.ps[j])
    }

    /// CSV with header `x,p,W`, x-major.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "p", "W"])?;
        for (i, x) in self.xs.iter().enumerate() {
            for (j, p) in self.ps.iter().enumerate() {
                w.write_record([x.to_string(), p.to_string(), self.values[(i, j)].to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn spacing(v: &[f64]) -> f64 {
    if v.len() < 2 {
        1.0
    } else {
        (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
    }
}

/// Uniform grid of `n` points on [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Wigner function via the Fock-basis kernels
///
/// `W_{|m⟩⟨n|}(x, p) = (1/π)(−1)^n √(n!/m!) (2α*)^{m−n} e^{−|2α|²/2} L_n^{(m−n)}(4|α|²)`
///
/// for m ≥ n with α = (x + ip)/√2; the m < n kernels are the conjugates.
pub fn wigner(rho: &DensityMatrix, xs: &[f64], ps: &[f64]) -> Result<WignerGrid> {
    if xs.is_empty() || ps.is_empty() {
        return Err(Error::InvalidParams("Wigner grid must be non-empty".into()));
    }
    let m = rho.matrix();
    let d = rho.dim();
    let mut values = DMatrix::zeros(xs.len(), ps.len());
    let mut lag = vec![0.0f64; d];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &p) in ps.iter().enumerate() {
            values[(i, j)] = wigner_point(m, d, x, p, &mut lag);
        }
    }
    Ok(WignerGrid { xs: xs.to_vec(), ps: ps.to_vec(), values })
}

fn wigner_point(m: &DMatrix<C64>, d: usize, x: f64, p: f64, lag: &mut [f64]) -> f64 {
    let r2 = x * x + p * p;
    let y = 2.0 * r2; // 4|α|²
    let gauss = (-r2).exp() / std::f64::consts::PI;
    // 2α* = √2 (x − ip)
    let two_alpha_conj = C64::new(x, -p) * std::f64::consts::SQRT_2;
    let mut total = 0.0;
    // prefactor for offset k = m − n, tracked as (2α*)^k / √(m!/n!)
    for k in 0..d {
        // generalized Laguerre L_n^{(k)}(y), n = 0..d−k−1
        let count = d - k;
        let kf = k as f64;
        lag[0] = 1.0;
        if count > 1 {
            lag[1] = 1.0 + kf - y;
        }
        for n in 1..count.saturating_sub(1) {
            let nf = n as f64;
            lag[n + 1] = ((2.0 * nf + 1.0 + kf - y) * lag[n] - (nf + kf) * lag[n - 1]) / (nf + 1.0);
        }
        // coefficient c_n = (−1)^n √(n!/(n+k)!) (2α*)^k
        let mut power = C64::new(1.0, 0.0);
        for _ in 0..k {
            power *= two_alpha_conj;
        }
        let mut ratio = 1.0; // √(n!/(n+k)!) at n = 0 is 1/√(k!)
        for q in 1..=k {
            ratio /= (q as f64).sqrt();
        }
        let mut sign = 1.0;
        for n in 0..count {
            if n > 0 {
                ratio *= (n as f64 / (n + k) as f64).sqrt();
                sign = -sign;
            }
            let kernel = power * (sign * ratio * lag[n]);
            // ρ_{mn} with m = n + k pairs with |m⟩⟨n|; tr(ρ |n⟩⟨m|)… W = Σ ρ_{mn} W_{|m⟩⟨n|}
            let rho_mn = m[(n + k, n)];
            if k == 0 {
                total += (rho_mn * kernel).re;
            } else {
                let rho_nm = m[(n, n + k)];
                total += (rho_mn * kernel + rho_nm * kernel.conj()).re;
            }
        }
    }
    total * gauss
}
