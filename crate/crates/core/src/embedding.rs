//! The upper-triangular picture: elements `[[a, a′], [0, a]]` with series
//! entries, the functional `Ẽ` built from a law, and the matrix-valued
//! transforms evaluated at `[[b, c], [0, b]]`.
//!
//! Each block transform is computed directly with 2×2 arithmetic and
//! separately from the formula `[[f(b), f′(b)c + ∂f(b)], [0, f(b)]]`.

use serde::Serialize;

use crate::cumulants::{BooleanWordModel, FreeWordModel, WordMoments};
use crate::dual::DualScalar;
use crate::error::{Error, Result};
use crate::law::{d_transform, t_transform, transform, InfLaw, TransformKind};
use crate::series::ComplexSeries;

/// `[[diag, corner], [0, diag]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct UT2 {
    pub diag: ComplexSeries,
    pub corner: ComplexSeries,
}

impl UT2 {
    pub fn new(diag: ComplexSeries, corner: ComplexSeries) -> Self {
        let k = diag.order().min(corner.order());
        UT2 {
            diag: diag.truncate(k),
            corner: corner.truncate(k),
        }
    }

    pub fn constant(d: DualScalar, order: usize) -> Self {
        UT2 {
            diag: ComplexSeries::constant(d.body, order),
            corner: ComplexSeries::constant(d.eps, order),
        }
    }

    pub fn identity(order: usize) -> Self {
        UT2::constant(DualScalar::ONE, order)
    }

    pub fn zero(order: usize) -> Self {
        UT2::constant(DualScalar::ZERO, order)
    }

    pub fn order(&self) -> usize {
        self.diag.order()
    }

    pub fn add(&self, o: &UT2) -> UT2 {
        UT2::new(self.diag.add(&o.diag), self.corner.add(&o.corner))
    }

    pub fn sub(&self, o: &UT2) -> UT2 {
        UT2::new(self.diag.sub(&o.diag), self.corner.sub(&o.corner))
    }

    /// `[[a, a′]]·[[b, b′]] = [[ab, ab′ + a′b]]`.
    pub fn mul(&self, o: &UT2) -> UT2 {
        UT2::new(
            self.diag.mul(&o.diag),
            self.diag.mul(&o.corner).add(&self.corner.mul(&o.diag)),
        )
    }

    /// `[[a, a′]]^{-1} = [[a^{-1}, −a^{-1} a′ a^{-1}]]`.
    pub fn inv(&self) -> Result<UT2> {
        if self.diag.coeff(0).norm() == 0.0 {
            return Err(Error::NonInvertible(
                "upper-triangular element with singular diagonal".into(),
            ));
        }
        let r = self.diag.inv()?;
        Ok(UT2::new(r.clone(), r.mul(&self.corner).mul(&r).neg()))
    }

    /// Divides both entries by `z^s`.
    pub fn shift_down(&self, s: usize) -> Result<UT2> {
        Ok(UT2::new(
            self.diag.shift_down(s)?,
            self.corner.shift_down(s)?,
        ))
    }

    /// Largest entry-wise deviation over the common order.
    pub fn deviation(&self, o: &UT2) -> f64 {
        self.diag
            .max_abs_diff(&o.diag)
            .max(self.corner.max_abs_diff(&o.corner))
    }

    pub fn max_magnitude(&self) -> f64 {
        self.diag.max_magnitude().max(self.corner.max_magnitude())
    }
}

/// `Ẽ` on polynomials in `X = [[x, 0], [0, x]]` with coefficients in the
/// upper-triangular algebra over series:
/// `Ẽ([[β xⁿ, β′ xⁿ]]) = [[β m_n, β m′_n + β′ m_n]]`.
#[derive(Clone, Copy, Debug)]
pub struct TildeFunctional<'a> {
    law: &'a InfLaw,
}

impl<'a> TildeFunctional<'a> {
    pub fn new(law: &'a InfLaw) -> Self {
        TildeFunctional { law }
    }

    /// `Ẽ(coeff · Xⁿ)`.
    pub fn apply(&self, n: usize, coeff: &UT2) -> UT2 {
        let m = self.law.moment(n);
        UT2::new(
            coeff.diag.scale(m.body),
            coeff.diag.scale(m.eps).add(&coeff.corner.scale(m.body)),
        )
    }
}

fn require_small(s: &ComplexSeries) -> Result<()> {
    let c0 = s.coeff(0).norm();
    if c0 > 1e-12 * (1.0 + s.max_magnitude()) {
        return Err(Error::CompositionDomain(c0));
    }
    Ok(())
}

/// `Ψ_X(B) = Σ_{n≥1} Ẽ(Bⁿ Xⁿ)` for `B = [[b, c], [0, b]]`.
pub fn psi_block(law: &InfLaw, b: &ComplexSeries, c: &ComplexSeries) -> Result<UT2> {
    require_small(b)?;
    require_small(c)?;
    let k = b.order().min(c.order()).min(law.order());
    let e = TildeFunctional::new(law);
    let base = UT2::new(b.truncate(k), c.truncate(k));
    let mut pow = UT2::identity(k);
    let mut acc = UT2::zero(k);
    for n in 1..=k {
        pow = pow.mul(&base);
        acc = acc.add(&e.apply(n, &pow));
    }
    Ok(acc)
}

/// `[[f(b), f′(b)(c) + ∂f(b)], [0, f(b)]]`, with `f′(b)(c)` as the
/// directional derivative of `f` at `b` along `c`.
pub fn block_formula(
    f: &ComplexSeries,
    df: &ComplexSeries,
    b: &ComplexSeries,
    c: &ComplexSeries,
) -> Result<UT2> {
    let (val, tan) = f.compose_with_tangent(b, c)?;
    let corner = tan.add(&df.compose(b)?);
    Ok(UT2::new(val, corner))
}

fn formula_for(
    kind: TransformKind,
    law: &InfLaw,
    b: &ComplexSeries,
    c: &ComplexSeries,
) -> Result<UT2> {
    let f = transform(kind, &law.body_law())?.body();
    let df = d_transform(kind, law)?;
    block_formula(&f, &df, b, c)
}

pub fn psi_block_formula(law: &InfLaw, b: &ComplexSeries, c: &ComplexSeries) -> Result<UT2> {
    formula_for(TransformKind::Psi, law, b, c)
}

/// `Ψ(Ψ + I)^{-1}`.
pub fn eta_block(law: &InfLaw, b: &ComplexSeries, c: &ComplexSeries) -> Result<UT2> {
    let p = psi_block(law, b, c)?;
    let k = p.order();
    Ok(p.mul(&p.add(&UT2::identity(k)).inv()?))
}

/// `(I + Θ)^{-1} Θ`; in one variable `Θ = Ψ`.
pub fn kappa_block(law: &InfLaw, b: &ComplexSeries, c: &ComplexSeries) -> Result<UT2> {
    let th = psi_block(law, b, c)?;
    let k = th.order();
    Ok(UT2::identity(k).add(&th).inv()?.mul(&th))
}

/// `Ρ(I + Ρ)^{-1}`; in one variable `Ρ = Ψ`.
pub fn rho_block(law: &InfLaw, b: &ComplexSeries, c: &ComplexSeries) -> Result<UT2> {
    let r = psi_block(law, b, c)?;
    let k = r.order();
    Ok(r.mul(&UT2::identity(k).add(&r).inv()?))
}

/// `T_X(W)` for `W = [[w, v], [0, w]]`: solve `Ψ_X(B) = W` for `B`, form
/// `S_X(W) = W^{-1}(I + W)B` and invert. Needs `w(0) = v(0) = 0` and a
/// nonzero linear coefficient in `w`.
pub fn t_block(law: &InfLaw, w: &ComplexSeries, v: &ComplexSeries) -> Result<UT2> {
    require_small(w)?;
    require_small(v)?;
    let m1 = law.mean();
    if m1.body.norm() == 0.0 {
        return Err(Error::NonInvertible(
            "T block needs a mean with nonzero body".into(),
        ));
    }
    let k = w.order().min(v.order()).min(law.order());
    if k == 0 || w.coeff(1).norm() == 0.0 {
        return Err(Error::NonInvertible(
            "W must have a nonzero linear coefficient".into(),
        ));
    }
    let wm = UT2::new(w.truncate(k), v.truncate(k));
    let m1_inv = UT2::constant(m1, k).inv()?;
    let mut b = UT2::zero(k);
    // Each pass fixes one more coefficient of B since Ψ_X(B) = m̃₁B + O(B²).
    for _ in 0..=k {
        let psi = psi_block(law, &b.diag, &b.corner)?;
        b = b.add(&wm.sub(&psi).mul(&m1_inv));
    }
    let s = wm
        .shift_down(1)?
        .inv()?
        .mul(&UT2::identity(k).add(&wm))
        .mul(&b.shift_down(1)?);
    s.inv()
}

pub fn t_block_formula(law: &InfLaw, w: &ComplexSeries, v: &ComplexSeries) -> Result<UT2> {
    let t = t_transform(&law.body_law())?.body();
    let dt = d_transform(TransformKind::T, law)?;
    block_formula(&t, &dt, w, v)
}

/// Direct minus formula for the block version of `kind` (one of `Psi`,
/// `EtaPlain`, `Kappa`, `Rho`, `T`), scaled by the size of the formula
/// value.
pub fn block_deviation(
    kind: TransformKind,
    law: &InfLaw,
    b: &ComplexSeries,
    c: &ComplexSeries,
) -> Result<f64> {
    let (direct, formula) = match kind {
        TransformKind::Psi => (psi_block(law, b, c)?, psi_block_formula(law, b, c)?),
        TransformKind::EtaPlain => (eta_block(law, b, c)?, formula_for(kind, law, b, c)?),
        TransformKind::Kappa => (kappa_block(law, b, c)?, formula_for(kind, law, b, c)?),
        TransformKind::Rho => (rho_block(law, b, c)?, formula_for(kind, law, b, c)?),
        TransformKind::T => (t_block(law, b, c)?, t_block_formula(law, b, c)?),
        other => {
            return Err(Error::InvalidInput(format!(
                "no block form is checked for {other}"
            )))
        }
    };
    Ok(direct.deviation(&formula) / (1.0 + formula.max_magnitude()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ut2FreenessReport {
    pub max_word_len: usize,
    pub words_checked: usize,
    /// Largest centered alternating value for the free pair.
    pub free_max_body: f64,
    pub free_max_eps: f64,
    /// Largest centered alternating value for the Boolean pair.
    pub boolean_max: f64,
    pub pass: bool,
}

/// Largest `|Ẽ|` (body, ε) over centered alternating products
/// `Π (X_{l_i}^{p_i} − φ̃(X_{l_i}^{p_i}))`, `l_i ≠ l_{i+1}`, `p_i ∈ {1, 2}`,
/// of length `1..=max_len`.
pub fn centered_alternating_max<M: WordMoments + ?Sized>(
    model: &M,
    laws: &[InfLaw],
    max_len: usize,
) -> Result<(usize, f64, f64)> {
    if laws.len() != 2 || model.num_letters() != 2 {
        return Err(Error::InvalidInput("expected a pair of letters".into()));
    }
    let mut count = 0;
    let (mut mb, mut me) = (0.0f64, 0.0f64);
    for len in 1..=max_len {
        for start in 0..2 {
            for pmask in 0u32..(1 << len) {
                let letters: Vec<usize> = (0..len).map(|i| (start + i) % 2).collect();
                let powers: Vec<usize> = (0..len).map(|i| 1 + (pmask >> i & 1) as usize).collect();
                let means: Vec<DualScalar> = letters
                    .iter()
                    .zip(&powers)
                    .map(|(&l, &p)| laws[l].moment(p))
                    .collect();
                let mut total = DualScalar::ZERO;
                for sub in 0u32..(1 << len) {
                    let mut word = Vec::new();
                    let mut weight = DualScalar::ONE;
                    for i in 0..len {
                        if sub >> i & 1 == 1 {
                            word.extend(std::iter::repeat_n(letters[i], powers[i]));
                        } else {
                            weight *= -means[i];
                        }
                    }
                    total += weight * model.moment(&word)?;
                }
                count += 1;
                mb = mb.max(total.body.norm());
                me = me.max(total.eps.norm());
            }
        }
    }
    Ok((count, mb, me))
}

/// Freeness of `x` and `y` under `Ẽ`: centered alternating products of the
/// oracle-free pair have vanishing dual expectation, while a Boolean pair
/// with the same marginals does not.
pub fn ut2_freeness_check(
    x: &InfLaw,
    y: &InfLaw,
    max_len: usize,
    tol: f64,
) -> Result<Ut2FreenessReport> {
    if max_len == 0 || max_len > 6 {
        return Err(Error::size("max word length", max_len, 1, 6));
    }
    let laws = [x.clone(), y.clone()];
    let free = FreeWordModel::new(&laws);
    let (words, fb, fe) = centered_alternating_max(&free, &laws, max_len)?;
    let boolean = BooleanWordModel::new(&laws);
    let (_, bb, be) = centered_alternating_max(&boolean, &laws, max_len)?;
    let boolean_max = bb.max(be);
    Ok(Ut2FreenessReport {
        max_word_len: max_len,
        words_checked: words,
        free_max_body: fb,
        free_max_eps: fe,
        boolean_max,
        pass: fb < tol && fe < tol && (max_len < 3 || boolean_max > tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::C64;
    use rand::{Rng, SeedableRng};

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_law(r: &mut impl Rng, k: usize) -> InfLaw {
        let mut m: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
        m[0] = r.random_range(0.5..1.5);
        let mp: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
        InfLaw::from_real(&m, &mp).unwrap()
    }

    fn random_small(r: &mut impl Rng, k: usize) -> ComplexSeries {
        let mut c: Vec<f64> = (0..=k).map(|_| r.random_range(-1.0..1.0)).collect();
        c[0] = 0.0;
        c[1] = r.random_range(0.5..1.0);
        ComplexSeries::from_real(&c)
    }

    #[test]
    fn ut2_algebra() {
        let mut r = rng(1);
        let a = UT2::new(
            random_small(&mut r, 5).add_constant(C64::new(1.0, 0.0)),
            random_small(&mut r, 5),
        );
        let b = UT2::new(random_small(&mut r, 5), random_small(&mut r, 5));
        let c = UT2::new(random_small(&mut r, 5), random_small(&mut r, 5));
        assert!(a.mul(&b).mul(&c).deviation(&a.mul(&b.mul(&c))) < 1e-13);
        // corner of abc = a′bc + ab′c + abc′
        let abc = a.mul(&b).mul(&c);
        let leibniz = a
            .corner
            .mul(&b.diag)
            .mul(&c.diag)
            .add(&a.diag.mul(&b.corner).mul(&c.diag))
            .add(&a.diag.mul(&b.diag).mul(&c.corner));
        assert!(abc.corner.max_abs_diff(&leibniz) < 1e-13);
        let id = a.mul(&a.inv().unwrap());
        assert!(id.deviation(&UT2::identity(5)) < 1e-12);
        assert!(matches!(b.inv(), Err(Error::NonInvertible(_))));
    }

    #[test]
    fn psi_block_examples() {
        let mut r = rng(2);
        let law = random_law(&mut r, 6);
        let z = ComplexSeries::identity(6);
        let zero = ComplexSeries::zero(6);
        let p = psi_block(&law, &z, &zero).unwrap();
        let (body, eps) = crate::law::psi(&law).eps_split();
        assert!(p.diag.max_abs_diff(&body) < 1e-13);
        assert!(p.corner.max_abs_diff(&eps) < 1e-13);
        let quiet = law.body_law();
        let p = psi_block(&quiet, &z, &zero).unwrap();
        assert_eq!(p.corner.max_magnitude(), 0.0);
        let z2 = ComplexSeries::identity(6).mul(&ComplexSeries::identity(6));
        let p = psi_block(&law, &z, &z2).unwrap();
        let want = body.derivative().mul(&z2.truncate(5)).add(&eps.truncate(5));
        assert!(p.corner.truncate(5).max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn block_formulas_hold() {
        let mut r = rng(3);
        for _ in 0..5 {
            let law = random_law(&mut r, 7);
            let b = random_small(&mut r, 7);
            let c = random_small(&mut r, 7);
            for kind in [
                TransformKind::Psi,
                TransformKind::EtaPlain,
                TransformKind::Kappa,
                TransformKind::Rho,
                TransformKind::T,
            ] {
                let d = block_deviation(kind, &law, &b, &c).unwrap();
                assert!(d < 1e-9, "{kind}: {d:e}");
            }
        }
    }

    #[test]
    fn c_zero_corner_is_the_d_transform() {
        let mut r = rng(4);
        let law = random_law(&mut r, 6);
        let z = ComplexSeries::identity(6);
        let zero = ComplexSeries::zero(6);
        let eta = eta_block(&law, &z, &zero).unwrap();
        let d = d_transform(TransformKind::EtaPlain, &law).unwrap();
        assert!(eta.corner.max_abs_diff(&d) < 1e-12);
        let t = t_block(&law, &z, &zero).unwrap();
        let d = d_transform(TransformKind::T, &law).unwrap();
        assert!(t.corner.max_abs_diff(&d) / (1.0 + d.max_magnitude()) < 1e-10);
    }

    #[test]
    fn wishart_t_block_corner() {
        let law = InfLaw::wishart_limit(2.0, 1.5, 7).unwrap();
        let z = ComplexSeries::identity(7);
        let t = t_block(&law, &z, &ComplexSeries::zero(7)).unwrap();
        assert!((t.corner.coeff(0).re - 1.5).abs() < 1e-10);
        for i in 1..=t.corner.order() {
            assert!(t.corner.coeff(i).norm() < 1e-9);
        }
    }

    #[test]
    fn ut2_freeness_free_vs_boolean() {
        let mut r = rng(5);
        let x = random_law(&mut r, 8);
        let y = random_law(&mut r, 8);
        let rep = ut2_freeness_check(&x, &y, 4, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.boolean_max > 1e-6);
        assert!(ut2_freeness_check(&x, &y, 7, 1e-9).is_err());
    }
}
