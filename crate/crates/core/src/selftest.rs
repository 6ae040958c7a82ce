//! The invariant suite behind `infmul selftest` and the acceptance tests.
//!
//! Each check returns a [`CheckResult`]; none of them panic on a failed
//! comparison.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convolution::{
    compare_laws, convolve_by_transform, oracle_boolean_product, oracle_monotone_product,
    oracle_product, verify_with_tol, MonotoneOrder, ProductKind,
};
use crate::cumulants::{
    cumulants_from_moments, kappa_from_t, kappa_prime_linked, kappa_prime_reduced,
    mixed_vanishing_check, t_coeffs, BooleanWordModel, FreeWordModel, KappaRoute,
};
use crate::dual::DualScalar;
use crate::embedding::ut2_freeness_check;
use crate::error::Result;
use crate::law::{d_transform, law_from_transform, transform, InfLaw, TransformKind};
use crate::partitions::{enumerate_nc, enumerate_ncl, linked_class, SetPartition};
use crate::series::DualSeries;
use crate::wishart::{estimate_moments, product_experiment, Sampler, WishartConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {}: {} {} ({}) [{:.2}s]",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

/// Sizes and seeds for the suite. [`SuiteOptions::default`] is the full
/// acceptance setting.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub roundtrip_instances: usize,
    pub formula_laws: usize,
    pub convolution_pairs: usize,
    pub route_laws: usize,
    pub mc_trials: usize,
    /// Sizes for the product experiment at `k ≤ 4`, which needs dense
    /// `M×M` products.
    pub product_sizes: Vec<usize>,
    pub run_monte_carlo: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 20240607,
            roundtrip_instances: 100,
            formula_laws: 50,
            convolution_pairs: 50,
            route_laws: 50,
            mc_trials: 5000,
            product_sizes: vec![100, 200],
            run_monte_carlo: true,
        }
    }
}

fn timed(id: usize, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (pass, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        id,
        name,
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Random dual law of order `k` with real mean in `0.5..1.5` and the other
/// moments in `−1..1`.
pub fn random_law(r: &mut impl Rng, k: usize) -> InfLaw {
    random_law_with_mean(r, k, 0.5, 1.5)
}

pub fn random_law_with_mean(r: &mut impl Rng, k: usize, lo: f64, hi: f64) -> InfLaw {
    let mut m: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
    m[0] = r.random_range(lo..hi);
    let mp: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
    InfLaw::from_real(&m, &mp).expect("order within limits")
}

fn random_dual_series(r: &mut impl Rng, order: usize) -> DualSeries {
    let b: Vec<f64> = (0..=order).map(|_| r.random_range(-1.0..1.0)).collect();
    let e: Vec<f64> = (0..=order).map(|_| r.random_range(-1.0..1.0)).collect();
    DualSeries::from_real(&b, &e)
}

fn dual_dev(a: &DualSeries, b: &DualSeries) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (*x - *y).max_norm())
        .fold(0.0, f64::max)
}

fn catalan(n: usize) -> usize {
    (0..n).fold(1usize, |c, i| c * 2 * (2 * i + 1) / (i + 2))
}

/// Large Schröder numbers `S_0..=S_n`: `S_n = S_{n−1} + Σ S_k S_{n−1−k}`.
fn schroder(n: usize) -> Vec<usize> {
    let mut s = vec![1usize];
    for m in 1..=n {
        let conv: usize = (0..m).map(|k| s[k] * s[m - 1 - k]).sum();
        s.push(s[m - 1] + conv);
    }
    s
}

pub fn combinatorics() -> CheckResult {
    timed(1, "combinatorics", || {
        let mut bad = Vec::new();
        for n in 1..=10 {
            let got = enumerate_nc(n)?.len();
            if got != catalan(n) {
                bad.push(format!("|NC({n})| = {got}"));
            }
        }
        let s = schroder(7);
        for n in 1..=8 {
            let got = enumerate_ncl(n)?.len();
            if got != s[n - 1] {
                bad.push(format!("|NCL({n})| = {got}, expected {}", s[n - 1]));
            }
        }
        let class = linked_class(&SetPartition::full(3))?.len();
        if class != 2 {
            bad.push(format!("|<1_3>| = {class}"));
        }
        let pass = bad.is_empty();
        let detail = if pass {
            format!("NC(1..10) Catalan, NCL(1..8) = {:?}, |<1_3>| = 2", &s[..8])
        } else {
            bad.join("; ")
        };
        Ok((pass, detail))
    })
}

pub fn series_roundtrips(opts: &SuiteOptions) -> CheckResult {
    const K: usize = 8;
    const TOL: f64 = 1e-10;
    timed(2, "series roundtrips", || {
        let mut r = rng(opts.seed, 2);
        let (mut inv_dev, mut rev_dev, mut tr_dev, mut wide_dev) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let one = DualSeries::one(K);
        let z = DualSeries::identity(K);
        for _ in 0..opts.roundtrip_instances {
            let mut f = random_dual_series(&mut r, K);
            f.set_coeff(
                0,
                DualScalar::real(r.random_range(1.0..2.0), r.random_range(-1.0..1.0)),
            );
            inv_dev = inv_dev.max(dual_dev(&f.mul(&f.inv()?), &one));

            let mut g = random_dual_series(&mut r, K);
            g.set_coeff(0, DualScalar::ZERO);
            g.set_coeff(
                1,
                DualScalar::real(r.random_range(1.0..2.0), r.random_range(-1.0..1.0)),
            );
            let gi = g.reversion()?;
            rev_dev = rev_dev.max(dual_dev(&g.compose(&gi)?, &z));
            rev_dev = rev_dev.max(dual_dev(&gi.compose(&g)?, &z));

            // leading coefficients in 1..2 as above; S and T of laws with
            // m_1 near 1/2 have coefficients ~1e7 and lose digits to rounding
            let law = random_law_with_mean(&mut r, K, 1.0, 2.0);
            tr_dev = tr_dev.max(law_roundtrip(&law)?);
            let wide = random_law(&mut r, K);
            wide_dev = wide_dev.max(law_roundtrip(&wide)?);
        }
        let pass = inv_dev < TOL && rev_dev < TOL && tr_dev < TOL;
        Ok((
            pass,
            format!(
                "{} instances at K = {K}: mul/inv {inv_dev:.1e}, compose/reversion {rev_dev:.1e}, transform/inverse {tr_dev:.1e} (m_1 in 0.5..1.5, not checked: {wide_dev:.1e})",
                opts.roundtrip_instances
            ),
        ))
    })
}

fn law_roundtrip(law: &InfLaw) -> Result<f64> {
    let mut dev = 0.0f64;
    for kind in TransformKind::ALL {
        let back = law_from_transform(kind, &transform(kind, law)?)?;
        let (db, de) = back.deviation(law);
        dev = dev.max(db).max(de);
    }
    Ok(dev)
}

/// Explicit ∂-formulas against ε-parts, compared as `|a − b|/(1 + max|b|)`.
pub fn transform_formulas(opts: &SuiteOptions) -> CheckResult {
    const K: usize = 8;
    const TOL: f64 = 1e-10;
    timed(3, "infinitesimal transform formulas", || {
        let mut r = rng(opts.seed, 3);
        let kinds = [
            TransformKind::S,
            TransformKind::T,
            TransformKind::EtaPlain,
            TransformKind::EtaTilde,
            TransformKind::Kappa,
            TransformKind::Rho,
        ];
        let mut worst = vec![0.0f64; kinds.len()];
        for _ in 0..opts.formula_laws {
            let law = random_law(&mut r, K);
            for (w, &kind) in worst.iter_mut().zip(&kinds) {
                let eps = transform(kind, &law)?.eps();
                let formula = d_transform(kind, &law)?;
                let dev = formula.max_abs_diff(&eps) / (1.0 + eps.max_magnitude());
                *w = w.max(dev);
            }
        }
        let pass = worst.iter().all(|&w| w < TOL);
        let parts: Vec<String> = kinds
            .iter()
            .zip(&worst)
            .map(|(k, w)| format!("d{k} {w:.1e}"))
            .collect();
        Ok((
            pass,
            format!(
                "{} laws, relative deviation: {}",
                opts.formula_laws,
                parts.join(", ")
            ),
        ))
    })
}

pub fn convolution_theorems(opts: &SuiteOptions) -> CheckResult {
    const K: usize = 6;
    const TOL: f64 = 1e-8;
    const CONTROL_GAP: f64 = 1e-3;
    timed(4, "convolution theorems", || {
        let mut r = rng(opts.seed, 4);
        let mut worst = [0.0f64; 4];
        // smallest deviation seen by each negative control; all must stay large
        let mut controls = [f64::INFINITY; 3];
        for _ in 0..opts.convolution_pairs {
            let x = random_law(&mut r, K);
            let y = random_law(&mut r, K);
            for (w, kind) in worst.iter_mut().zip(ProductKind::ALL) {
                let rep = verify_with_tol(kind, &x, &y, K, TOL)?;
                *w = w.max(rep.deviation_body).max(rep.deviation_eps);
            }
            let free_formula = convolve_by_transform(ProductKind::Free, &x, &y, K)?;
            // Boolean x, y as (1 + (x−1))(1 + (y−1)) fed to the free formula
            let boolean = oracle_boolean_product(&x.shift(-1.0), &y.shift(-1.0), K)?;
            let (db, de) = compare_laws(&boolean, &free_formula);
            controls[0] = controls[0].min(db.max(de));
            // monotone x, y fed to the free formula
            let mono = oracle_monotone_product(&x, &y, K, MonotoneOrder::Xy)?;
            let (db, de) = compare_laws(&mono, &free_formula);
            controls[1] = controls[1].min(db.max(de));
            // monotone composition taken in the wrong order
            let kind = ProductKind::Monotone(MonotoneOrder::Yx);
            let oracle = oracle_product(kind, &x, &y, K)?;
            let swapped = convolve_by_transform(kind, &y, &x, K)?;
            let (db, de) = compare_laws(&oracle, &swapped);
            controls[2] = controls[2].min(db.max(de));
        }
        let pass = worst.iter().all(|&w| w < TOL) && controls.iter().all(|&c| c > CONTROL_GAP);
        let parts: Vec<String> = ProductKind::ALL
            .iter()
            .zip(&worst)
            .map(|(k, w)| format!("{k} {w:.1e}"))
            .collect();
        Ok((
            pass,
            format!(
                "{} pairs to order {K}: {}; negative controls min deviation: boolean-as-free {:.1e}, monotone-as-free {:.1e}, swapped composition {:.1e}",
                opts.convolution_pairs,
                parts.join(", "),
                controls[0],
                controls[1],
                controls[2]
            ),
        ))
    })
}

pub fn t_coefficient_identities(opts: &SuiteOptions) -> CheckResult {
    const K: usize = 8;
    const TOL: f64 = 1e-9;
    timed(5, "t-coefficient identities", || {
        let mut r = rng(opts.seed, 5);
        let mut route_dev = 0.0f64;
        for _ in 0..opts.route_laws {
            let law = random_law(&mut r, K);
            let t = t_coeffs(&law)?;
            let want = cumulants_from_moments(&law);
            for route in [KappaRoute::LinkedClass, KappaRoute::NcReduced] {
                let (db, de) = kappa_from_t(&t, route)?.deviation(&want);
                route_dev = route_dev.max(db).max(de);
            }
            for eps in [kappa_prime_linked(&t)?, kappa_prime_reduced(&t)?] {
                for (a, b) in eps.iter().zip(want.eps()) {
                    route_dev = route_dev.max((a - b).norm());
                }
            }
        }
        let x = random_law(&mut r, 5);
        let y = random_law(&mut r, 5);
        let laws = [x, y];
        let free = mixed_vanishing_check(&FreeWordModel::new(&laws), 5)?;
        let boolean = mixed_vanishing_check(&BooleanWordModel::new(&laws), 5)?;
        let pass = route_dev < TOL && free.vanishes(TOL) && !boolean.vanishes(TOL);
        Ok((
            pass,
            format!(
                "routes {route_dev:.1e} over {} laws; free mixed t {:.1e}, t' {:.1e} on {} words; boolean control {:.1e}",
                opts.route_laws,
                free.max_t,
                free.max_t_prime,
                free.words_checked,
                boolean.max_t.max(boolean.max_t_prime)
            ),
        ))
    })
}

pub fn wishart_t_vector() -> CheckResult {
    const K: usize = 8;
    const TOL: f64 = 1e-10;
    timed(6, "Wishart limit t-vector", || {
        let mut worst = 0.0f64;
        for (c, cp) in [(1.0, 2.0), (2.0, 1.0), (0.5, -1.0), (3.0, 0.0)] {
            let t = t_coeffs(&InfLaw::wishart_limit(c, cp, K)?)?;
            for n in 0..K {
                let want = match n {
                    0 => DualScalar::real(c, cp),
                    1 => DualScalar::ONE,
                    _ => DualScalar::ZERO,
                };
                worst = worst.max((t.get(n) - want).max_norm());
            }
        }
        Ok((worst < TOL, format!("K = {K}, max deviation {worst:.1e}")))
    })
}

/// The three Monte Carlo experiments with their configs.
pub fn monte_carlo_configs(opts: &SuiteOptions) -> [WishartConfig; 3] {
    let single = WishartConfig {
        c: 1.0,
        c_prime: 2.0,
        n_list: vec![100, 200, 400],
        trials: opts.mc_trials,
        k_max: 4,
        seed: opts.seed,
        sampler: Sampler::Bidiagonal,
    };
    let product = WishartConfig {
        c_prime: 0.0,
        n_list: opts.product_sizes.clone(),
        ..single.clone()
    };
    let product_inf = WishartConfig {
        c_prime: 1.0,
        k_max: 1,
        ..single.clone()
    };
    [single, product, product_inf]
}

pub fn wishart_monte_carlo(opts: &SuiteOptions) -> CheckResult {
    timed(7, "Wishart Monte Carlo", || {
        let [single, product, product_inf] = monte_carlo_configs(opts);
        let s = estimate_moments(&single)?;
        let p = product_experiment(&product)?;
        let q = product_experiment(&product_inf)?;
        let fmt_phi = |e: &crate::wishart::McEstimate| {
            e.extrapolated
                .iter()
                .map(|x| format!("{:.4}/{}", x.phi_est, x.phi_pred))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let fmt_dphi = |e: &crate::wishart::McEstimate| {
            e.extrapolated
                .iter()
                .map(|x| {
                    format!(
                        "{:.3}±{:.3}/{}",
                        x.phi_prime_est, x.phi_prime_stderr, x.phi_prime_pred
                    )
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let pass = s.pass() && p.pass() && q.pass();
        Ok((
            pass,
            format!(
                "single N={:?} phi {} [{}], phi' {} [{}]; product N={:?} phi {} [{}]; product phi'_1 {} [{}]",
                single.n_list,
                fmt_phi(&s),
                ok(s.extrapolated.iter().all(|x| x.phi_ok)),
                fmt_dphi(&s),
                ok(s.extrapolated.iter().all(|x| x.phi_prime_ok)),
                product.n_list,
                fmt_phi(&p),
                ok(p.pass()),
                fmt_dphi(&q),
                ok(q.pass()),
            ),
        ))
    })
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "off"
    }
}

pub fn ut2_freeness(opts: &SuiteOptions) -> CheckResult {
    const TOL: f64 = 1e-9;
    timed(8, "upper-triangular freeness", || {
        let mut r = rng(opts.seed, 8);
        let (mut fb, mut fe, mut bmin, mut words) = (0.0f64, 0.0f64, f64::INFINITY, 0);
        let mut pass = true;
        for _ in 0..5 {
            let x = random_law(&mut r, 12);
            let y = random_law(&mut r, 12);
            let rep = ut2_freeness_check(&x, &y, 6, TOL)?;
            pass &= rep.pass;
            fb = fb.max(rep.free_max_body);
            fe = fe.max(rep.free_max_eps);
            bmin = bmin.min(rep.boolean_max);
            words = rep.words_checked;
        }
        Ok((
            pass,
            format!(
                "5 pairs, {words} centered alternating words up to length 6: free {fb:.1e} / {fe:.1e}, boolean control min {bmin:.1e}"
            ),
        ))
    })
}

pub fn run_all(opts: &SuiteOptions) -> Vec<CheckResult> {
    let mut out = vec![
        combinatorics(),
        series_roundtrips(opts),
        transform_formulas(opts),
        convolution_theorems(opts),
        t_coefficient_identities(opts),
        wishart_t_vector(),
    ];
    if opts.run_monte_carlo {
        out.push(wishart_monte_carlo(opts));
    }
    out.push(ut2_freeness(opts));
    out
}
