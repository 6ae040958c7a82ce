//! Complex Wishart Monte Carlo: finite-`N` traces `tr(X^k)`, their limits
//! `φ(x^k)` and the `1/N` corrections `φ′(x^k)`.
//!
//! `X = G*G/N` with `G` an `M×N` matrix of standard complex normals
//! (`E|g|² = 1`) and `M = round(cN + c′)`. Normalized traces divide by `N`.

use std::fmt::Write as _;

use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::dual::{DualScalar, C64};
use crate::error::{Error, Result};
use crate::io::round_sig;
use crate::law::{law_from_transform, InfLaw, TransformKind};
use crate::series::DualSeries;

/// Fixed number of RNG lanes. Results do not depend on the thread count.
pub const LANES: usize = 32;

pub const MAX_KMAX: usize = 6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    /// Explicit `G*G/N` with dense matrix products.
    Dense,
    /// Tridiagonal matrix with the same spectrum as `G*G`, built from chi
    /// variables. `O(N)` per trial.
    #[default]
    Bidiagonal,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Sampler::Dense),
            "bidiagonal" => Ok(Sampler::Bidiagonal),
            _ => Err(Error::Config(format!(
                "unknown sampler {s:?} (expected dense or bidiagonal)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WishartConfig {
    pub c: f64,
    pub c_prime: f64,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub k_max: usize,
    pub seed: u64,
    pub sampler: Sampler,
}

impl Default for WishartConfig {
    fn default() -> Self {
        WishartConfig {
            c: 1.0,
            c_prime: 0.0,
            n_list: vec![100, 200, 400],
            trials: 2000,
            k_max: 4,
            seed: 0,
            sampler: Sampler::Bidiagonal,
        }
    }
}

impl WishartConfig {
    /// `M(N) = round(cN + c′)`.
    pub fn m_of(&self, n: usize) -> usize {
        let m = (self.c * n as f64 + self.c_prime).round();
        if m < 1.0 {
            0
        } else {
            m as usize
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !self.c_prime.is_finite() {
            return bad("c_prime must be finite".into());
        }
        if self.trials < 2 {
            return bad(format!("trials must be at least 2, got {}", self.trials));
        }
        if self.k_max == 0 || self.k_max > MAX_KMAX {
            return bad(format!(
                "k_max must be in 1..={MAX_KMAX}, got {}",
                self.k_max
            ));
        }
        if self.n_list.len() < 2 {
            return bad(format!(
                "extrapolation needs at least 2 matrix sizes, got {}",
                self.n_list.len()
            ));
        }
        let mut seen = self.n_list.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.n_list.len() {
            return bad("matrix sizes must be distinct".into());
        }
        for &n in &self.n_list {
            if n == 0 {
                return bad("matrix sizes must be positive".into());
            }
            if self.m_of(n) < 1 {
                return bad(format!("M(N) = round(cN + c') < 1 at N = {n}"));
            }
        }
        Ok(())
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let u: f64 = StandardNormal.sample(rng);
    let v: f64 = StandardNormal.sample(rng);
    C64::new(u, v) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Array2<C64> {
    Array2::from_shape_simple_fn((m, n), || complex_normal(rng))
}

/// `X = G*G/N` for an `M×N` complex Gaussian `G`.
pub fn sample_wishart<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Array2<C64> {
    let g = gaussian_matrix(m, n, rng);
    let gh = g.t().mapv(|z| z.conj());
    gh.dot(&g) / C64::new(n as f64, 0.0)
}

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i] = A[i][i+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }
}

/// `BᵀB` for the bidiagonal chi model of `G*G`. Its `min(M, N)` eigenvalues
/// are the nonzero eigenvalues of `G*G` (unscaled).
pub fn sample_bidiagonal<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Tridiagonal {
    let (p, q) = (m.max(n), m.min(n));
    let chi2 = |shape: usize, rng: &mut R| -> f64 {
        Gamma::new(shape as f64, 1.0)
            .expect("positive shape")
            .sample(rng)
    };
    let d2: Vec<f64> = (0..q).map(|i| chi2(p - i, rng)).collect();
    let e2: Vec<f64> = (1..q).map(|i| chi2(q - i, rng)).collect();
    let diag = (0..q)
        .map(|i| d2[i] + if i > 0 { e2[i - 1] } else { 0.0 })
        .collect();
    let off = (0..q.saturating_sub(1))
        .map(|i| (d2[i] * e2[i]).sqrt())
        .collect();
    Tridiagonal { diag, off }
}

/// Symmetric band matrix with half-bandwidth `w`; row `i` stores columns
/// `i−w..=i+w`.
struct Band {
    n: usize,
    w: usize,
    a: Vec<f64>,
}

impl Band {
    fn from_tridiagonal(t: &Tridiagonal) -> Band {
        let n = t.dim();
        let mut b = Band {
            n,
            w: 1,
            a: vec![0.0; n * 3],
        };
        for i in 0..n {
            b.a[i * 3 + 1] = t.diag[i];
            if i + 1 < n {
                b.a[i * 3 + 2] = t.off[i];
                b.a[(i + 1) * 3] = t.off[i];
            }
        }
        b
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.w < i || j > i + self.w {
            0.0
        } else {
            self.a[i * (2 * self.w + 1) + j + self.w - i]
        }
    }

    fn mul(&self, o: &Band) -> Band {
        let (n, w) = (self.n, self.w + o.w);
        let width = 2 * w + 1;
        let mut a = vec![0.0; n * width];
        for i in 0..n {
            let lo = i.saturating_sub(self.w);
            let hi = (i + self.w).min(n - 1);
            for j in i.saturating_sub(w)..=(i + w).min(n - 1) {
                let mut s = 0.0;
                for l in lo..=hi {
                    s += self.get(i, l) * o.get(l, j);
                }
                a[i * width + j + w - i] = s;
            }
        }
        Band { n, w, a }
    }

    /// `Σ_ij A_ij B_ij`, which is `Tr(AB)` for symmetric `B`.
    fn frobenius(&self, o: &Band) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i.saturating_sub(self.w)..=(i + self.w).min(self.n - 1) {
                s += self.get(i, j) * o.get(i, j);
            }
        }
        s
    }
}

/// Unnormalized `Tr(A^k)` for `k = 1..=k_max`.
pub fn tridiagonal_traces(t: &Tridiagonal, k_max: usize) -> Vec<f64> {
    if t.dim() == 0 {
        return vec![0.0; k_max];
    }
    let a = Band::from_tridiagonal(t);
    let mut pows = vec![a];
    while pows.len() < k_max.div_ceil(2) {
        let next = pows.last().unwrap().mul(&pows[0]);
        pows.push(next);
    }
    (1..=k_max)
        .map(|k| {
            if k == 1 {
                t.diag.iter().sum()
            } else {
                let a = k.div_ceil(2);
                pows[a - 1].frobenius(&pows[k - a - 1])
            }
        })
        .collect()
}

/// Unnormalized `Tr(H^k)` for Hermitian `H`, `k = 1..=k_max`.
pub fn hermitian_traces(h: &Array2<C64>, k_max: usize) -> Vec<f64> {
    let mut pows = vec![h.clone()];
    while pows.len() < k_max.div_ceil(2) {
        let next = pows.last().unwrap().dot(h);
        pows.push(next);
    }
    (1..=k_max)
        .map(|k| {
            if k == 1 {
                h.diag().iter().map(|z| z.re).sum()
            } else {
                let a = k.div_ceil(2);
                // Tr(P Q) = Σ P_ij conj(Q_ij) for Hermitian Q
                pows[a - 1]
                    .iter()
                    .zip(pows[k - a - 1].iter())
                    .map(|(p, q)| (p * q.conj()).re)
                    .sum()
            }
        })
        .collect()
}

/// `tr(X^k)`, `k = 1..=k_max`, for one Wishart draw.
pub fn single_traces<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    k_max: usize,
    sampler: Sampler,
    rng: &mut R,
) -> Vec<f64> {
    match sampler {
        Sampler::Dense => {
            let x = sample_wishart(m, n, rng);
            hermitian_traces(&x, k_max)
                .into_iter()
                .map(|t| t / n as f64)
                .collect()
        }
        Sampler::Bidiagonal => {
            let t = sample_bidiagonal(m, n, rng);
            let nf = n as f64;
            tridiagonal_traces(&t, k_max)
                .into_iter()
                .enumerate()
                .map(|(i, tr)| tr / nf.powi(i as i32 + 2))
                .collect()
        }
    }
}

/// `tr((X₁X₂)^k)` for independent Wisharts of the same shape.
///
/// `X₁` is unitarily invariant, so it is replaced by its tridiagonal model
/// `T/N` (same spectrum), padded with zeros when `M < N`. Then
/// `Tr((X₁X₂)^k) = Tr(P^k)/N^{2k}` with `P = G₂ T G₂*`.
pub fn product_traces<R: Rng + ?Sized>(m: usize, n: usize, k_max: usize, rng: &mut R) -> Vec<f64> {
    let t = sample_bidiagonal(m, n, rng);
    let q = t.dim();
    let g = gaussian_matrix(m, n, rng);
    let gq = g.slice(s![.., ..q]);
    let mut gt = Array2::<C64>::zeros((m, q));
    for j in 0..q {
        let mut col = gq.column(j).mapv(|z| z * t.diag[j]);
        if j > 0 {
            col.scaled_add(C64::new(t.off[j - 1], 0.0), &gq.column(j - 1));
        }
        if j + 1 < q {
            col.scaled_add(C64::new(t.off[j], 0.0), &gq.column(j + 1));
        }
        gt.column_mut(j).assign(&col);
    }
    let nf = n as f64;
    if k_max == 1 {
        // Tr(G T G*) without forming the product
        let tr: f64 = gt
            .iter()
            .zip(gq.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        return vec![tr / nf.powi(3)];
    }
    let p = gt.dot(&gq.t().mapv(|z| z.conj()));
    hermitian_traces(&p, k_max)
        .into_iter()
        .enumerate()
        .map(|(i, tr)| tr / nf.powi(2 * (i as i32 + 1) + 1))
        .collect()
}

fn round_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    round_sig(*x).serialize(s)
}

/// Sample statistics of `tr(X^k)` at one size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub k: usize,
    #[serde(serialize_with = "round_f64")]
    pub mean: f64,
    #[serde(serialize_with = "round_f64")]
    pub stderr: f64,
    #[serde(serialize_with = "round_f64")]
    pub phi_pred: f64,
    /// Plain `N(mean − φ)`.
    #[serde(serialize_with = "round_f64")]
    pub phi_prime_est: f64,
    #[serde(serialize_with = "round_f64")]
    pub phi_prime_pred: f64,
}

/// Limits across sizes for one `k`, with the pass decisions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extrapolated {
    pub k: usize,
    #[serde(serialize_with = "round_f64")]
    pub phi_est: f64,
    #[serde(serialize_with = "round_f64")]
    pub phi_stderr: f64,
    #[serde(serialize_with = "round_f64")]
    pub phi_pred: f64,
    pub phi_ok: bool,
    #[serde(serialize_with = "round_f64")]
    pub phi_prime_est: f64,
    #[serde(serialize_with = "round_f64")]
    pub phi_prime_stderr: f64,
    #[serde(serialize_with = "round_f64")]
    pub phi_prime_pred: f64,
    pub phi_prime_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub experiment: &'static str,
    pub config: WishartConfig,
    pub rows: Vec<McRow>,
    pub extrapolated: Vec<Extrapolated>,
}

/// Relative slack allowed on `φ′` besides the 3-stderr band.
pub const PHI_PRIME_REL_TOL: f64 = 0.15;

impl McEstimate {
    pub fn pass(&self) -> bool {
        self.extrapolated.iter().all(|e| e.phi_ok && e.phi_prime_ok)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-size rows, then one `N = inf` row per `k` with the extrapolated
    /// values (`phi_prime_est` there is the Richardson estimate).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,k,mean,stderr,phi_pred,phi_prime_est,phi_prime_pred\n");
        let r = round_sig;
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.n,
                row.k,
                r(row.mean),
                r(row.stderr),
                r(row.phi_pred),
                r(row.phi_prime_est),
                r(row.phi_prime_pred)
            );
        }
        for e in &self.extrapolated {
            let _ = writeln!(
                out,
                "inf,{},{},{},{},{},{}",
                e.k,
                r(e.phi_est),
                r(e.phi_stderr),
                r(e.phi_pred),
                r(e.phi_prime_est),
                r(e.phi_prime_pred)
            );
        }
        out
    }
}

/// Runs `trials` draws split over [`LANES`] independent streams and returns
/// per-trial trace vectors in lane order.
fn run_trials<F>(seed: u64, stream_base: u64, trials: usize, draw: F) -> Vec<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    (0..LANES)
        .into_par_iter()
        .map(|lane| {
            let count = trials / LANES + usize::from(lane < trials % LANES);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base | lane as u64);
            (0..count).map(|_| draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn mean_stderr(samples: &[Vec<f64>], k: usize) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s[k]).sum::<f64>() / n;
    let var = samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Lagrange weights for evaluating at `x = 0` from nodes `x_i`.
fn lagrange_at_zero(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            (0..x.len())
                .filter(|&j| j != i)
                .map(|j| x[j] / (x[j] - x[i]))
                .product()
        })
        .collect()
}

/// Predicted `(φ_k, φ′_k)` for `k = 1..=k_max`.
type Predictions = Vec<(f64, f64)>;

fn build_estimate(
    experiment: &'static str,
    cfg: &WishartConfig,
    pred: &Predictions,
    per_size: Vec<Vec<(f64, f64)>>,
) -> McEstimate {
    let mut rows = Vec::new();
    for (&n, stats) in cfg.n_list.iter().zip(&per_size) {
        for (k, &(mean, stderr)) in stats.iter().enumerate() {
            let (phi, dphi) = pred[k];
            rows.push(McRow {
                n,
                m: cfg.m_of(n),
                k: k + 1,
                mean,
                stderr,
                phi_pred: phi,
                phi_prime_est: n as f64 * (mean - phi),
                phi_prime_pred: dphi,
            });
        }
    }

    // sizes sorted ascending for the Richardson step
    let mut order: Vec<usize> = (0..cfg.n_list.len()).collect();
    order.sort_by_key(|&i| cfg.n_list[i]);
    let xs: Vec<f64> = order.iter().map(|&i| 1.0 / cfg.n_list[i] as f64).collect();
    let weights = lagrange_at_zero(&xs);
    let (i1, i2) = (order[order.len() - 2], order[order.len() - 1]);
    let (n1, n2) = (cfg.n_list[i1] as f64, cfg.n_list[i2] as f64);

    let extrapolated = (0..cfg.k_max)
        .map(|k| {
            let (phi, dphi) = pred[k];
            let phi_est = order
                .iter()
                .zip(&weights)
                .map(|(&i, w)| w * per_size[i][k].0)
                .sum();
            let phi_stderr = order
                .iter()
                .zip(&weights)
                .map(|(&i, w)| (w * per_size[i][k].1).powi(2))
                .sum::<f64>()
                .sqrt();
            // f(N) = N(mean − φ) = φ′ + a/N + …; cancel the a/N term
            let (m1, s1) = per_size[i1][k];
            let (m2, s2) = per_size[i2][k];
            let f1 = n1 * (m1 - phi);
            let f2 = n2 * (m2 - phi);
            let phi_prime_est = (n2 * f2 - n1 * f1) / (n2 - n1);
            let phi_prime_stderr =
                ((n2 * n2 * s2).powi(2) + (n1 * n1 * s1).powi(2)).sqrt() / (n2 - n1);
            Extrapolated {
                k: k + 1,
                phi_est,
                phi_stderr,
                phi_pred: phi,
                phi_ok: (phi_est - phi).abs() <= 3.0 * phi_stderr + 1e-12 * phi.abs().max(1.0),
                phi_prime_est,
                phi_prime_stderr,
                phi_prime_pred: dphi,
                phi_prime_ok: (phi_prime_est - dphi).abs()
                    <= (3.0 * phi_prime_stderr).max(PHI_PRIME_REL_TOL * dphi.abs()),
            }
        })
        .collect();

    McEstimate {
        experiment,
        config: cfg.clone(),
        rows,
        extrapolated,
    }
}

fn predictions(law: &InfLaw, k_max: usize) -> Predictions {
    (1..=k_max)
        .map(|k| {
            let m = law.moment(k);
            (m.body.re, m.eps.re)
        })
        .collect()
}

/// Single-matrix experiment against the `(c, c′)` limit law.
pub fn estimate_moments(cfg: &WishartConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let law = InfLaw::wishart_limit(cfg.c, cfg.c_prime, cfg.k_max)?;
    let pred = predictions(&law, cfg.k_max);
    let per_size = cfg
        .n_list
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let m = cfg.m_of(n);
            let samples = run_trials(cfg.seed, (idx as u64) << 32, cfg.trials, |rng| {
                single_traces(m, n, cfg.k_max, cfg.sampler, rng)
            });
            (0..cfg.k_max).map(|k| mean_stderr(&samples, k)).collect()
        })
        .collect();
    Ok(build_estimate("single", cfg, &pred, per_size))
}

/// Law with `T = (c+z)²` and `∂T = 2c′(c+z)`, the predicted product of two
/// infinitesimally free Wishart limits.
pub fn product_prediction(c: f64, c_prime: f64, k: usize) -> Result<InfLaw> {
    let order = k.max(2);
    let t = DualSeries::new(vec![
        DualScalar::real(c * c, 2.0 * c_prime * c),
        DualScalar::real(2.0 * c, 2.0 * c_prime),
        DualScalar::real(1.0, 0.0),
    ]);
    let mut coeffs = t.coeffs().to_vec();
    coeffs.resize(order, DualScalar::ZERO);
    law_from_transform(TransformKind::T, &DualSeries::new(coeffs))?.truncate(k)
}

/// Product `X₁X₂` of two independent Wisharts with the same config. The
/// sampler setting is ignored: `X₂` is always dense.
pub fn product_experiment(cfg: &WishartConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let law = product_prediction(cfg.c, cfg.c_prime, cfg.k_max)?;
    let pred = predictions(&law, cfg.k_max);
    let per_size = cfg
        .n_list
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let m = cfg.m_of(n);
            let base = (1u64 << 48) | ((idx as u64) << 32);
            let samples = run_trials(cfg.seed, base, cfg.trials, |rng| {
                product_traces(m, n, cfg.k_max, rng)
            });
            (0..cfg.k_max).map(|k| mean_stderr(&samples, k)).collect()
        })
        .collect();
    Ok(build_estimate("product", cfg, &pred, per_size))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn small_cfg() -> WishartConfig {
        WishartConfig {
            c: 1.0,
            c_prime: 2.0,
            n_list: vec![20, 40],
            trials: 400,
            k_max: 3,
            seed: 11,
            sampler: Sampler::Bidiagonal,
        }
    }

    #[test]
    fn wishart_is_hermitian_psd_diagonal() {
        let x = sample_wishart(7, 5, &mut rng(1));
        let diff = (&x - &x.t().mapv(|z| z.conj()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
        assert!(x.diag().iter().all(|z| z.re > 0.0 && z.im.abs() < 1e-14));
    }

    #[test]
    fn tridiagonal_traces_match_dense_powers() {
        let t = sample_bidiagonal(9, 6, &mut rng(2));
        let n = t.dim();
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            a[[i, i]] = C64::new(t.diag[i], 0.0);
            if i + 1 < n {
                a[[i, i + 1]] = C64::new(t.off[i], 0.0);
                a[[i + 1, i]] = C64::new(t.off[i], 0.0);
            }
        }
        let dense = hermitian_traces(&a, 6);
        let band = tridiagonal_traces(&t, 6);
        let mut p = a.clone();
        for k in 0..6 {
            let direct: f64 = p.diag().iter().map(|z| z.re).sum();
            assert!(
                (band[k] - direct).abs() < 1e-9 * direct.abs(),
                "k={}",
                k + 1
            );
            assert!(
                (dense[k] - direct).abs() < 1e-9 * direct.abs(),
                "k={}",
                k + 1
            );
            p = p.dot(&a);
        }
    }

    fn sample_mean(m: usize, n: usize, sampler: Sampler, trials: usize, k: usize) -> (f64, f64) {
        let samples = run_trials(5, 0, trials, |r| single_traces(m, n, 2, sampler, r));
        mean_stderr(&samples, k)
    }

    #[test]
    fn first_two_moments_match_exact_values() {
        for sampler in [Sampler::Dense, Sampler::Bidiagonal] {
            for (m, n) in [(1, 1), (5, 3), (3, 5), (8, 8)] {
                let (mf, nf) = (m as f64, n as f64);
                let (mean1, se1) = sample_mean(m, n, sampler, 4000, 0);
                assert!(
                    (mean1 - mf / nf).abs() < 4.0 * se1,
                    "{sampler:?} {m}x{n}: {mean1}"
                );
                let exact2 = mf * (mf + nf) / (nf * nf);
                let (mean2, se2) = sample_mean(m, n, sampler, 4000, 1);
                assert!(
                    (mean2 - exact2).abs() < 4.0 * se2,
                    "{sampler:?} {m}x{n}: {mean2} vs {exact2}"
                );
            }
        }
    }

    #[test]
    fn product_first_moment_is_square_of_ratio() {
        for (m, n) in [(6, 4), (4, 6)] {
            let samples = run_trials(3, 0, 4000, |r| product_traces(m, n, 1, r));
            let (mean, se) = mean_stderr(&samples, 0);
            let exact = (m as f64 / n as f64).powi(2);
            assert!(
                (mean - exact).abs() < 4.0 * se,
                "{m}x{n}: {mean} vs {exact}"
            );
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let cfg = small_cfg();
        let a = estimate_moments(&cfg).unwrap();
        let b = estimate_moments(&cfg).unwrap();
        assert_eq!(a, b);
        let mut other = cfg.clone();
        other.seed = 12;
        assert_ne!(
            a.rows[0].mean,
            estimate_moments(&other).unwrap().rows[0].mean
        );
    }

    #[test]
    fn first_moment_correction_is_c_prime() {
        let est = estimate_moments(&small_cfg()).unwrap();
        let e = &est.extrapolated[0];
        assert_eq!(e.phi_pred, 1.0);
        assert!((e.phi_prime_pred - 2.0).abs() < 1e-12);
        assert!(e.phi_ok && e.phi_prime_ok, "{e:?}");
        assert_eq!(est.rows.len(), 6);
        assert!(est.rows.iter().all(|r| r.stderr >= 0.0 && r.m == r.n + 2));
    }

    #[test]
    fn product_prediction_is_fuss_catalan() {
        let law = product_prediction(1.0, 0.0, 4).unwrap();
        let body: Vec<f64> = law.body().iter().map(|z| z.re).collect();
        assert_eq!(body.len(), 4);
        for (got, want) in body.iter().zip([1.0, 3.0, 12.0, 55.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        let law = product_prediction(1.0, 1.0, 1).unwrap();
        assert!((law.moment(1).eps.re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn config_errors() {
        let ok = small_cfg();
        assert!(ok.validate().is_ok());
        type Edit = Box<dyn Fn(&mut WishartConfig)>;
        let cases: Vec<Edit> = vec![
            Box::new(|c| c.c = 0.0),
            Box::new(|c| c.trials = 0),
            Box::new(|c| c.trials = 1),
            Box::new(|c| c.k_max = 7),
            Box::new(|c| c.k_max = 0),
            Box::new(|c| c.n_list = vec![100]),
            Box::new(|c| c.n_list = vec![0, 10]),
            Box::new(|c| c.n_list = vec![10, 10]),
            Box::new(|c| {
                c.c = 0.1;
                c.c_prime = -3.0;
            }),
        ];
        for f in cases {
            let mut cfg = ok.clone();
            f(&mut cfg);
            let err = estimate_moments(&cfg).unwrap_err();
            assert!(matches!(err, Error::Config(_)) && err.is_usage(), "{cfg:?}");
        }
    }

    #[test]
    fn csv_has_rows_and_extrapolation() {
        let est = estimate_moments(&small_cfg()).unwrap();
        let csv = est.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "N,k,mean,stderr,phi_pred,phi_prime_est,phi_prime_pred"
        );
        assert_eq!(lines.len(), 1 + 6 + 3);
        assert!(lines[7].starts_with("inf,1,"));
        let json: serde_json::Value = serde_json::from_str(&est.to_json().unwrap()).unwrap();
        assert_eq!(json["rows"][0]["N"], 20);
        assert_eq!(json["config"]["sampler"], "bidiagonal");
    }
}
