//! Multiplicative convolutions of infinitesimal laws.
//!
//! Each product is computed twice: by an oracle that evaluates mixed dual
//! moments straight from the independence rule, and by the transform
//! identity (`T_{xy} = T_x T_y`, `η̃_{(1+x)(1+y)} = η̃_{1+x} η̃_{1+y}`,
//! `κ_{yx} = κ_x∘κ_y`, `ρ_{xy} = ρ_x∘ρ_y`) over dual series.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::cumulants::{FreeWordModel, WordMoments};
use crate::dual::DualScalar;
use crate::error::{Error, Result};
use crate::law::{check_order, law_from_transform, transform, InfLaw, TransformKind};

/// Default tolerance for oracle/transform agreement.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MonotoneOrder {
    /// Law of `yx`, through `κ_x∘κ_y`.
    Yx,
    /// Law of `xy`, through `ρ_x∘ρ_y`.
    Xy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProductKind {
    /// Law of `xy` for infinitesimally free `x`, `y`.
    Free,
    /// Law of `(1+x)(1+y)` for infinitesimally Boolean independent `x`, `y`.
    Boolean,
    /// `x − 1` in the lower algebra, `y` in the higher one.
    Monotone(MonotoneOrder),
}

impl ProductKind {
    pub const ALL: [ProductKind; 4] = [
        ProductKind::Free,
        ProductKind::Boolean,
        ProductKind::Monotone(MonotoneOrder::Yx),
        ProductKind::Monotone(MonotoneOrder::Xy),
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProductKind::Free => "free",
            ProductKind::Boolean => "boolean",
            ProductKind::Monotone(MonotoneOrder::Yx) => "monotone-yx",
            ProductKind::Monotone(MonotoneOrder::Xy) => "monotone-xy",
        }
    }
}

impl fmt::Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProductKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProductKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown product kind {s:?}")))
    }
}

impl Serialize for ProductKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

fn prepare(x: &InfLaw, y: &InfLaw, k: usize) -> Result<(InfLaw, InfLaw)> {
    check_order(k)?;
    Ok((x.truncate(k)?, y.truncate(k)?))
}

/// Moments of `(xy)^k`, `k ≤ K`, for infinitesimally free `x`, `y`: the
/// alternating word is evaluated by the monochromatic non-crossing sum
/// with dual cumulants.
pub fn oracle_free_product(x: &InfLaw, y: &InfLaw, k: usize) -> Result<InfLaw> {
    let (x, y) = prepare(x, y, k)?;
    let model = FreeWordModel::new(&[x, y]);
    let m = (1..=k)
        .map(|n| {
            let word: Vec<usize> = (0..2 * n).map(|i| i % 2).collect();
            model.moment(&word)
        })
        .collect::<Result<Vec<_>>>()?;
    InfLaw::new(m)
}

/// Moments of `((1+x)(1+y))^k` for infinitesimally Boolean independent `x`,
/// `y`. Each factor contributes `1` or its letter; the chosen letters merge
/// into runs and a word's dual moment is the product of run moments.
pub fn oracle_boolean_product(x: &InfLaw, y: &InfLaw, k: usize) -> Result<InfLaw> {
    let (x, y) = prepare(x, y, k)?;
    let laws = [&x, &y];
    let m = (1..=k)
        .map(|n| {
            // state: (letter of the open run, its length) -> weight of the
            // closed runs, summed over all choices so far.
            let mut states: Vec<((usize, usize), DualScalar)> = vec![((0, 0), DualScalar::ONE)];
            for pos in 0..2 * n {
                let letter = pos % 2;
                let mut next: Vec<((usize, usize), DualScalar)> = Vec::new();
                let mut push = |key: (usize, usize), w: DualScalar| match next
                    .iter_mut()
                    .find(|(k, _)| *k == key)
                {
                    Some((_, acc)) => *acc += w,
                    None => next.push((key, w)),
                };
                for &((l, len), w) in &states {
                    push((l, len), w);
                    if len > 0 && l == letter {
                        push((l, len + 1), w);
                    } else {
                        let closed = if len == 0 { w } else { w * laws[l].moment(len) };
                        push((letter, 1), closed);
                    }
                }
                states = next;
            }
            states
                .into_iter()
                .map(|((l, len), w)| if len == 0 { w } else { w * laws[l].moment(len) })
                .sum()
        })
        .collect();
    InfLaw::new(m)
}

/// `word` is over `a = x − 1` (letter 0) and `y` (letter 1). Peels one `y`-run at a time, in the order given by `pick` (an index into
/// the current list of runs), replacing it by its dual moment and letting the
/// neighbouring `a`-runs merge. What remains is a power of `a`.
pub fn reduce_monotone_word(
    word: &[usize],
    a: &InfLaw,
    y: &InfLaw,
    mut pick: impl FnMut(usize) -> usize,
) -> DualScalar {
    // Runs as (letter, length).
    let mut runs: Vec<(usize, usize)> = word
        .chunk_by(|p, q| p == q)
        .map(|r| (r[0], r.len()))
        .collect();
    let mut acc = DualScalar::ONE;
    loop {
        let ys: Vec<usize> = (0..runs.len()).filter(|&i| runs[i].0 == 1).collect();
        if ys.is_empty() {
            break;
        }
        let i = ys[pick(ys.len()) % ys.len()];
        acc *= y.moment(runs[i].1);
        runs.remove(i);
        if i > 0 && i < runs.len() && runs[i - 1].0 == runs[i].0 {
            runs[i - 1].1 += runs[i].1;
            runs.remove(i);
        }
    }
    let apow: usize = runs.iter().map(|r| r.1).sum();
    acc * a.moment(apow)
}

fn monotone_moments(
    x: &InfLaw,
    y: &InfLaw,
    k: usize,
    order: MonotoneOrder,
    mut pick: impl FnMut(usize) -> usize,
) -> Result<InfLaw> {
    let (x, y) = prepare(x, y, k)?;
    let a = x.shift(-1.0);
    let m = (1..=k)
        .map(|n| {
            let mut total = DualScalar::ZERO;
            for mask in 0u32..(1 << n) {
                let mut word = Vec::with_capacity(2 * n);
                for i in 0..n {
                    let take_a = mask >> i & 1 == 1;
                    match order {
                        MonotoneOrder::Yx => {
                            word.push(1);
                            if take_a {
                                word.push(0);
                            }
                        }
                        MonotoneOrder::Xy => {
                            if take_a {
                                word.push(0);
                            }
                            word.push(1);
                        }
                    }
                }
                total += reduce_monotone_word(&word, &a, &y, &mut pick);
            }
            total
        })
        .collect();
    InfLaw::new(m)
}

/// Moments of `(yx)^k` or `(xy)^k` where `x − 1` and `y` are infinitesimally
/// monotone independent. Each `x = 1 + a` is expanded into words over
/// `{a, y}` which are then reduced by peeling `y`-runs.
pub fn oracle_monotone_product(
    x: &InfLaw,
    y: &InfLaw,
    k: usize,
    order: MonotoneOrder,
) -> Result<InfLaw> {
    monotone_moments(x, y, k, order, |_| 0)
}

/// Same as [`oracle_monotone_product`] with `y`-runs peeled in the order
/// chosen by `pick`.
pub fn oracle_monotone_product_with(
    x: &InfLaw,
    y: &InfLaw,
    k: usize,
    order: MonotoneOrder,
    pick: impl FnMut(usize) -> usize,
) -> Result<InfLaw> {
    monotone_moments(x, y, k, order, pick)
}

pub fn oracle_product(kind: ProductKind, x: &InfLaw, y: &InfLaw, k: usize) -> Result<InfLaw> {
    match kind {
        ProductKind::Free => oracle_free_product(x, y, k),
        ProductKind::Boolean => oracle_boolean_product(x, y, k),
        ProductKind::Monotone(o) => oracle_monotone_product(x, y, k, o),
    }
}

/// The product transform as a dual series, together with its kind.
pub fn product_transform(
    kind: ProductKind,
    x: &InfLaw,
    y: &InfLaw,
    k: usize,
) -> Result<(TransformKind, crate::series::DualSeries)> {
    let (x, y) = prepare(x, y, k)?;
    Ok(match kind {
        ProductKind::Free => {
            let f = transform(TransformKind::T, &x)?.mul(&transform(TransformKind::T, &y)?);
            (TransformKind::T, f)
        }
        ProductKind::Boolean => {
            let ex = transform(TransformKind::EtaTilde, &x.shift(1.0))?;
            let ey = transform(TransformKind::EtaTilde, &y.shift(1.0))?;
            (TransformKind::EtaTilde, ex.mul(&ey))
        }
        ProductKind::Monotone(order) => {
            let tk = match order {
                MonotoneOrder::Yx => TransformKind::Kappa,
                MonotoneOrder::Xy => TransformKind::Rho,
            };
            let f = transform(tk, &x)?.compose(&transform(tk, &y)?)?;
            (tk, f)
        }
    })
}

pub fn convolve_by_transform(
    kind: ProductKind,
    x: &InfLaw,
    y: &InfLaw,
    k: usize,
) -> Result<InfLaw> {
    let (tk, f) = product_transform(kind, x, y, k)?;
    law_from_transform(tk, &f)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub kind: ProductKind,
    #[serde(rename = "K")]
    pub k: usize,
    pub deviation_body: f64,
    pub deviation_eps: f64,
    pub pass: bool,
}

/// Largest absolute deviation of bodies and of ε-parts.
pub fn compare_laws(a: &InfLaw, b: &InfLaw) -> (f64, f64) {
    a.deviation(b)
}

pub fn verify(kind: ProductKind, x: &InfLaw, y: &InfLaw, k: usize) -> Result<VerificationReport> {
    verify_with_tol(kind, x, y, k, VERIFY_TOL)
}

pub fn verify_with_tol(
    kind: ProductKind,
    x: &InfLaw,
    y: &InfLaw,
    k: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let oracle = oracle_product(kind, x, y, k)?;
    let by_transform = convolve_by_transform(kind, x, y, k)?;
    let (db, de) = compare_laws(&oracle, &by_transform);
    Ok(VerificationReport {
        kind,
        k,
        deviation_body: db,
        deviation_eps: de,
        pass: db < tol && de < tol,
    })
}
