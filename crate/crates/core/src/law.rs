//! Infinitesimal laws and their scalar transforms.
//!
//! A law is the dual moment sequence `m_n + ε m′_n`, `n = 1..K`. Every
//! transform is computed once over dual series; its ε-part is the
//! corresponding ∂-transform. [`d_transform`] recomputes the ∂-part from the
//! explicit formulas using only the body series and `m′`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cumulants::{moments_from_cumulants, CumulantVector};
use crate::dual::{DualScalar, C64};
use crate::error::{Error, Result};
use crate::io::{to_wire, WireComplex};
use crate::series::{ComplexSeries, DualSeries, Series, MAX_ORDER};

#[derive(Clone, Debug, PartialEq)]
pub struct InfLaw {
    m: Vec<DualScalar>,
}

pub(crate) fn check_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_ORDER {
        return Err(Error::size("K", k, 1, MAX_ORDER));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

impl InfLaw {
    /// `m[n-1] = m_n + ε m′_n`.
    pub fn new(m: Vec<DualScalar>) -> Result<Self> {
        check_order(m.len())?;
        Ok(InfLaw { m })
    }

    pub fn from_parts(m: &[C64], m_prime: &[C64]) -> Result<Self> {
        if m.len() != m_prime.len() {
            return Err(Error::InvalidInput(format!(
                "m has {} entries but m_prime has {}",
                m.len(),
                m_prime.len()
            )));
        }
        InfLaw::new(
            m.iter()
                .zip(m_prime)
                .map(|(&a, &b)| DualScalar::new(a, b))
                .collect(),
        )
    }

    pub fn from_real(m: &[f64], m_prime: &[f64]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();
        InfLaw::from_parts(&c(m), &c(m_prime))
    }

    /// Law of the constant `a`: `m_n = a^n` over dual scalars.
    pub fn point_mass(a: DualScalar, k: usize) -> Result<Self> {
        InfLaw::new((1..=k as u32).map(|n| a.powi(n)).collect())
    }

    pub fn zero(k: usize) -> Result<Self> {
        InfLaw::new(vec![DualScalar::ZERO; k])
    }

    /// Limit law of a complex Wishart matrix with `M/N → c`, `M − Nc → c′`:
    /// every dual free cumulant equals `c + ε c′`.
    pub fn wishart_limit(c: f64, c_prime: f64, k: usize) -> Result<Self> {
        check_order(k)?;
        let kappa = CumulantVector::new(vec![DualScalar::real(c, c_prime); k])?;
        Ok(moments_from_cumulants(&kappa))
    }

    /// Free Poisson law of rate `c` with no infinitesimal part.
    pub fn free_poisson(c: f64, k: usize) -> Result<Self> {
        InfLaw::wishart_limit(c, 0.0, k)
    }

    pub fn order(&self) -> usize {
        self.m.len()
    }

    /// `m_n + ε m′_n`; `n = 0` gives 1.
    pub fn moment(&self, n: usize) -> DualScalar {
        if n == 0 {
            DualScalar::ONE
        } else {
            self.m[n - 1]
        }
    }

    pub fn moments(&self) -> &[DualScalar] {
        &self.m
    }

    pub fn body(&self) -> Vec<C64> {
        self.m.iter().map(|d| d.body).collect()
    }

    pub fn eps(&self) -> Vec<C64> {
        self.m.iter().map(|d| d.eps).collect()
    }

    pub fn mean(&self) -> DualScalar {
        self.m[0]
    }

    pub fn truncate(&self, k: usize) -> Result<Self> {
        check_order(k)?;
        if k > self.order() {
            return Err(Error::InvalidInput(format!(
                "law has order {}, cannot extend to {k}",
                self.order()
            )));
        }
        Ok(InfLaw {
            m: self.m[..k].to_vec(),
        })
    }

    /// Law of `s·x`.
    pub fn scale(&self, s: DualScalar) -> Self {
        InfLaw {
            m: self
                .m
                .iter()
                .enumerate()
                .map(|(i, &m)| m * s.powi(i as u32 + 1))
                .collect(),
        }
    }

    /// Law of `x + a` for a constant `a`.
    pub fn shift(&self, a: f64) -> Self {
        let m = (1..=self.order())
            .map(|n| {
                (0..=n)
                    .map(|j| {
                        self.moment(j) * DualScalar::from(binomial(n, j) * a.powi((n - j) as i32))
                    })
                    .sum()
            })
            .collect();
        InfLaw { m }
    }

    /// Law of the body alone (all `m′_n` set to zero).
    pub fn body_law(&self) -> Self {
        InfLaw {
            m: self
                .m
                .iter()
                .map(|d| DualScalar::constant(d.body))
                .collect(),
        }
    }

    /// Largest deviation of the bodies and of the ε-parts, over the common
    /// order.
    pub fn deviation(&self, other: &InfLaw) -> (f64, f64) {
        self.m
            .iter()
            .zip(&other.m)
            .fold((0.0, 0.0), |(b, e), (x, y)| {
                (
                    b.max((x.body - y.body).norm()),
                    e.max((x.eps - y.eps).norm()),
                )
            })
    }
}

#[derive(Serialize, Deserialize)]
struct LawJson {
    #[serde(rename = "K")]
    k: usize,
    m: Vec<WireComplex>,
    m_prime: Vec<WireComplex>,
}

impl Serialize for InfLaw {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LawJson {
            k: self.order(),
            m: to_wire(self.body()),
            m_prime: to_wire(self.eps()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for InfLaw {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = LawJson::deserialize(d)?;
        if raw.m.len() != raw.k || raw.m_prime.len() != raw.k {
            return Err(D::Error::custom(format!(
                "K = {} but m has {} and m_prime has {} entries",
                raw.k,
                raw.m.len(),
                raw.m_prime.len()
            )));
        }
        let m: Vec<C64> = raw.m.into_iter().map(|w| w.0).collect();
        let mp: Vec<C64> = raw.m_prime.into_iter().map(|w| w.0).collect();
        InfLaw::from_parts(&m, &mp).map_err(D::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Psi,
    /// `η̃ = ψ / (z(1+ψ))`, constant term `m_1`.
    EtaTilde,
    /// `η = ψ/(1+ψ)`.
    EtaPlain,
    Kappa,
    Rho,
    /// Needs `m_1` with nonzero body.
    S,
    /// Needs `m_1` with nonzero body.
    T,
}

impl TransformKind {
    pub const ALL: [TransformKind; 7] = [
        TransformKind::Psi,
        TransformKind::EtaTilde,
        TransformKind::EtaPlain,
        TransformKind::Kappa,
        TransformKind::Rho,
        TransformKind::S,
        TransformKind::T,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Psi => "psi",
            TransformKind::EtaTilde => "eta-tilde",
            TransformKind::EtaPlain => "eta",
            TransformKind::Kappa => "kappa",
            TransformKind::Rho => "rho",
            TransformKind::S => "s",
            TransformKind::T => "t",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TransformKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown transform {s:?}")))
    }
}

/// `ψ(z) = Σ (m_n + ε m′_n) z^n`.
pub fn psi(law: &InfLaw) -> DualSeries {
    let mut c = vec![DualScalar::ZERO];
    c.extend_from_slice(law.moments());
    Series::new(c)
}

fn over_one_plus<C: crate::series::Coeff>(f: &Series<C>) -> Result<Series<C>> {
    Ok(f.mul(&f.add_constant(C::one()).inv()?))
}

pub fn eta_plain(law: &InfLaw) -> DualSeries {
    over_one_plus(&psi(law)).expect("1 + ψ has unit constant term")
}

/// Order `K − 1`.
pub fn eta_tilde(law: &InfLaw) -> DualSeries {
    eta_plain(law).shift_down(1).expect("ψ/(1+ψ) vanishes at 0")
}

pub fn kappa_transform(law: &InfLaw) -> DualSeries {
    eta_plain(law)
}

pub fn rho_transform(law: &InfLaw) -> DualSeries {
    eta_plain(law)
}

fn require_mean(law: &InfLaw) -> Result<()> {
    if law.mean().body.norm() == 0.0 {
        return Err(Error::NonInvertible(
            "S and T transforms need a mean with nonzero body".into(),
        ));
    }
    Ok(())
}

/// `S(z) = z^{-1}(1+z) ψ^{⟨−1⟩}(z)`, order `K − 1`.
pub fn s_transform(law: &InfLaw) -> Result<DualSeries> {
    require_mean(law)?;
    let inv = psi(law).reversion()?.shift_down(1)?;
    Ok(inv.mul(&one_plus_z(inv.order())))
}

/// `T = 1/S`, order `K − 1`.
pub fn t_transform(law: &InfLaw) -> Result<DualSeries> {
    s_transform(law)?.inv()
}

fn one_plus_z<C: crate::series::Coeff>(k: usize) -> Series<C> {
    Series::identity(k).add_constant(C::one())
}

pub fn transform(kind: TransformKind, law: &InfLaw) -> Result<DualSeries> {
    Ok(match kind {
        TransformKind::Psi => psi(law),
        TransformKind::EtaTilde => eta_tilde(law),
        TransformKind::EtaPlain => eta_plain(law),
        TransformKind::Kappa => kappa_transform(law),
        TransformKind::Rho => rho_transform(law),
        TransformKind::S => s_transform(law)?,
        TransformKind::T => t_transform(law)?,
    })
}

fn shape(kind: TransformKind, msg: &str) -> Error {
    Error::InvalidTransform(format!("{kind}: {msg}"))
}

fn require_vanishing(kind: TransformKind, f: &DualSeries) -> Result<()> {
    let c0 = f.coeff(0).max_norm();
    if c0 > 1e-12 * (1.0 + f.max_magnitude()) {
        return Err(shape(kind, "constant term must vanish"));
    }
    Ok(())
}

fn law_from_psi(psi: &DualSeries) -> Result<InfLaw> {
    InfLaw::new(psi.coeffs()[1..].to_vec())
}

/// Inverts [`transform`]. Orders: `ψ`, `η`, `κ`, `ρ` of order `K` and `η̃`,
/// `S`, `T` of order `K − 1` give a law of order `K`.
pub fn law_from_transform(kind: TransformKind, f: &DualSeries) -> Result<InfLaw> {
    match kind {
        TransformKind::Psi => {
            require_vanishing(kind, f)?;
            if f.order() == 0 {
                return Err(shape(kind, "order must be at least 1"));
            }
            law_from_psi(f)
        }
        TransformKind::EtaPlain | TransformKind::Kappa | TransformKind::Rho => {
            require_vanishing(kind, f)?;
            if f.order() == 0 {
                return Err(shape(kind, "order must be at least 1"));
            }
            // ψ = η/(1 − η)
            let denom = f.neg().add_constant(DualScalar::ONE).inv()?;
            law_from_psi(&f.mul(&denom))
        }
        TransformKind::EtaTilde => law_from_transform(TransformKind::EtaPlain, &f.shift_up(1)),
        TransformKind::S => {
            if f.coeff(0).body.norm() == 0.0 {
                return Err(shape(kind, "constant term needs a nonzero body"));
            }
            // ψ^{⟨−1⟩}(w) = w S(w) / (1 + w)
            let k = f.order();
            let inv = f.mul(&one_plus_z::<DualScalar>(k).inv()?).shift_up(1);
            law_from_psi(&inv.reversion()?)
        }
        TransformKind::T => {
            if f.coeff(0).body.norm() == 0.0 {
                return Err(shape(kind, "constant term needs a nonzero body"));
            }
            law_from_transform(TransformKind::S, &f.inv()?)
        }
    }
}

/// Pads a series with zero coefficients up to order `k`.
fn pad(f: &ComplexSeries, k: usize) -> ComplexSeries {
    let mut c = f.coeffs().to_vec();
    c.resize(k + 1, C64::new(0.0, 0.0));
    Series::new(c)
}

/// The ∂-transform from its explicit formula, using the body transforms and
/// `∂ψ = Σ m′_n z^n` only.
///
/// * `∂η = (1+ψ)^{-1} ∂ψ (1+ψ)^{-1}`, and the same shape for `∂κ` and `∂ρ`
///   since `ϑ = ϱ = ψ` for scalars.
/// * `∂η̃ = z^{-1} (1+ψ)^{-2} ∂ψ`.
/// * `∂S(w) = w^{-1}(1+w) · (−(ψ^{⟨−1⟩})′(w) ∂ψ(ψ^{⟨−1⟩}(w)))`.
/// * `∂T = −T ∂S T`.
pub fn d_transform(kind: TransformKind, law: &InfLaw) -> Result<ComplexSeries> {
    let (p, dp) = psi(law).eps_split();
    let frac = || -> Result<ComplexSeries> {
        let r = p.add_constant(C64::new(1.0, 0.0)).inv()?;
        Ok(r.mul(&dp).mul(&r))
    };
    match kind {
        TransformKind::Psi => Ok(dp),
        TransformKind::EtaPlain | TransformKind::Kappa | TransformKind::Rho => frac(),
        TransformKind::EtaTilde => frac()?.shift_down(1),
        TransformKind::S | TransformKind::T => {
            require_mean(law)?;
            let k = p.order();
            let r = p.reversion()?;
            // The top coefficient of r′ only meets the zero constant term of
            // ∂ψ∘r, so padding keeps the product exact through z^K.
            let dr = pad(&r.derivative(), k);
            let core = dr.mul(&dp.compose(&r)?).neg().shift_down(1)?;
            let ds = core.mul(&one_plus_z(k - 1));
            if kind == TransformKind::S {
                return Ok(ds);
            }
            let t = t_transform(&law.body_law())?.body();
            Ok(t.mul(&ds).mul(&t).neg())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn close(a: &ComplexSeries, b: &ComplexSeries, tol: f64) {
        let d = a.max_abs_diff(b) / (1.0 + b.max_magnitude());
        assert!(d < tol, "deviation {d:e}: {a:?} vs {b:?}");
    }

    fn random_law(seed: u64, k: usize, mean: Option<f64>) -> InfLaw {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Some(mu) = mean {
            m[0] = mu;
        }
        let mp: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        InfLaw::from_real(&m, &mp).unwrap()
    }

    #[test]
    fn psi_of_constant_one() {
        let one = InfLaw::point_mass(DualScalar::ONE, 6).unwrap();
        close(
            &psi(&one).body(),
            &ComplexSeries::geometric(6).sub(&Series::one(6)),
            1e-15,
        );
        close(&eta_tilde(&one).body(), &Series::one(5), 1e-14);
        close(&eta_plain(&one).body(), &Series::identity(6), 1e-14);
        let s = s_transform(&one).unwrap();
        close(&s.body(), &Series::one(5), 1e-13);
        close(&t_transform(&one).unwrap().body(), &Series::one(5), 1e-13);
    }

    #[test]
    fn zero_law_transforms() {
        let z = InfLaw::zero(5).unwrap();
        for kind in [
            TransformKind::Psi,
            TransformKind::EtaTilde,
            TransformKind::EtaPlain,
        ] {
            assert_eq!(transform(kind, &z).unwrap().max_magnitude(), 0.0);
        }
        assert!(matches!(s_transform(&z), Err(Error::NonInvertible(_))));
        assert!(matches!(
            d_transform(TransformKind::T, &z),
            Err(Error::NonInvertible(_))
        ));
    }

    #[test]
    fn point_mass_two_has_constant_eta_tilde() {
        let two = InfLaw::point_mass(DualScalar::from(2.0), 7).unwrap();
        close(&eta_tilde(&two).body(), &Series::constant(c(2.0), 6), 1e-12);
    }

    #[test]
    fn dual_mean_kappa() {
        let law =
            InfLaw::new(vec![DualScalar::real(1.0, 1.0), DualScalar::real(2.0, 0.0)]).unwrap();
        assert_eq!(kappa_transform(&law).coeff(1), DualScalar::real(1.0, 1.0));
    }

    #[test]
    fn wishart_limit_t_transform() {
        let law = InfLaw::wishart_limit(2.0, 1.0, 8).unwrap();
        let t = t_transform(&law).unwrap();
        let (body, eps) = t.eps_split();
        close(
            &body,
            &ComplexSeries::from_real(&[2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            1e-10,
        );
        close(
            &eps,
            &ComplexSeries::from_real(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            1e-10,
        );
        let dt = d_transform(TransformKind::T, &law).unwrap();
        close(&dt, &eps, 1e-10);
    }

    #[test]
    fn free_poisson_s_transform() {
        let law = InfLaw::free_poisson(1.0, 8).unwrap();
        let expect = one_plus_z::<C64>(7).inv().unwrap();
        close(&s_transform(&law).unwrap().body(), &expect, 1e-10);
    }

    #[test]
    fn fuss_catalan_from_t() {
        let t = DualSeries::from_real(&[1.0, 2.0, 1.0, 0.0, 0.0], &[0.0; 5]);
        let law = law_from_transform(TransformKind::T, &t).unwrap();
        let expect = [1.0, 3.0, 12.0, 55.0, 273.0, 1428.0];
        for (got, want) in law.body().iter().zip(expect) {
            assert!((got.re - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn first_moment_from_linear_t() {
        let t = DualSeries::from_real(&[3.0, 1.0], &[0.5, 0.0]);
        let law = law_from_transform(TransformKind::T, &t).unwrap();
        assert!((law.mean() - DualScalar::real(3.0, 0.5)).max_norm() < 1e-12);
    }

    #[test]
    fn roundtrips_for_every_kind() {
        for seed in 0..20 {
            let law = random_law(seed, 8, Some(1.0));
            for kind in TransformKind::ALL {
                let f = transform(kind, &law).unwrap();
                let back = law_from_transform(kind, &f).unwrap();
                let (db, de) = back.deviation(&law);
                assert!(db < 1e-9 && de < 1e-9, "{kind}: {db:e} {de:e}");
            }
        }
    }

    #[test]
    fn explicit_formulas_match_eps_parts() {
        for seed in 0..20 {
            let law = random_law(100 + seed, 8, Some(0.5 + seed as f64 / 40.0));
            for kind in TransformKind::ALL {
                let eps = transform(kind, &law).unwrap().eps();
                let formula = d_transform(kind, &law).unwrap();
                assert_eq!(formula.order(), eps.order(), "{kind}");
                close(&formula, &eps, 1e-10);
            }
        }
    }

    #[test]
    fn t_identities() {
        let law = random_law(7, 8, Some(1.3));
        let s = s_transform(&law).unwrap();
        let t = t_transform(&law).unwrap();
        let prod = s.mul(&t);
        close(&prod.body(), &Series::one(7), 1e-12);
        close(&prod.eps(), &Series::zero(7), 1e-12);
    }

    #[test]
    fn scalar_collapse() {
        let law = random_law(3, 6, None);
        assert_eq!(kappa_transform(&law), eta_plain(&law));
        assert_eq!(rho_transform(&law), eta_plain(&law));
    }

    #[test]
    fn rejects_bad_shapes() {
        let bad = DualSeries::from_real(&[1.0, 1.0], &[0.0, 0.0]);
        assert!(matches!(
            law_from_transform(TransformKind::Psi, &bad),
            Err(Error::InvalidTransform(_))
        ));
        let zero = DualSeries::from_real(&[0.0, 1.0], &[1.0, 0.0]);
        assert!(matches!(
            law_from_transform(TransformKind::T, &zero),
            Err(Error::InvalidTransform(_))
        ));
    }

    #[test]
    fn shift_and_scale() {
        let x = InfLaw::from_real(&[1.0, 2.0], &[0.5, 0.0]).unwrap();
        let y = x.shift(1.0);
        // E(1+x) = 2, E((1+x)^2) = 1 + 2 + 2 = 5
        assert_eq!(y.moment(1), DualScalar::real(2.0, 0.5));
        assert_eq!(y.moment(2), DualScalar::real(5.0, 1.0));
        assert_eq!(y.shift(-1.0), x);
        let s = x.scale(DualScalar::from(2.0));
        assert_eq!(s.moment(2), DualScalar::real(8.0, 0.0));
    }

    #[test]
    fn law_json_schema() {
        let law = InfLaw::new(vec![
            DualScalar::real(1.0, 0.5),
            DualScalar::new(c(2.0), C64::new(0.0, 1.0)),
        ])
        .unwrap();
        let s = serde_json::to_string(&law).unwrap();
        assert_eq!(s, r#"{"K":2,"m":[1.0,2.0],"m_prime":[0.5,[0.0,1.0]]}"#);
        let back: InfLaw = serde_json::from_str(&s).unwrap();
        assert_eq!(back, law);
        assert!(serde_json::from_str::<InfLaw>(r#"{"K":3,"m":[1],"m_prime":[0]}"#).is_err());
    }
}
