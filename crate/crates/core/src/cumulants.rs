//! Free cumulants, infinitesimal cumulants and t-coefficients.
//!
//! Every recursion runs over dual scalars, so the ε-parts of the results
//! are the infinitesimal quantities (`κ′_n`, `t′_n`). The explicit
//! infinitesimal formulas are kept separately as cross-checks.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dual::{DualScalar, C64};
use crate::error::{Error, Result};
use crate::io::{to_wire, WireComplex};
use crate::law::{check_order, t_transform, InfLaw};
use crate::partitions::{enumerate_nc, enumerate_ncl, LinkedPartition, MAX_NC, MAX_NCL};

/// `κ_n + ε κ′_n` for `n = 1..K`.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantVector {
    kappa: Vec<DualScalar>,
}

/// `t_n + ε t′_n` for `n = 0..K−1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TCoeffVector {
    t: Vec<DualScalar>,
}

impl CumulantVector {
    pub fn new(kappa: Vec<DualScalar>) -> Result<Self> {
        check_order(kappa.len())?;
        Ok(CumulantVector { kappa })
    }

    pub fn order(&self) -> usize {
        self.kappa.len()
    }

    /// `κ_n`, `1 ≤ n ≤ K`.
    pub fn get(&self, n: usize) -> DualScalar {
        self.kappa[n - 1]
    }

    pub fn values(&self) -> &[DualScalar] {
        &self.kappa
    }

    pub fn body(&self) -> Vec<C64> {
        self.kappa.iter().map(|d| d.body).collect()
    }

    pub fn eps(&self) -> Vec<C64> {
        self.kappa.iter().map(|d| d.eps).collect()
    }

    pub fn deviation(&self, other: &CumulantVector) -> (f64, f64) {
        max_dev(&self.kappa, &other.kappa)
    }
}

impl TCoeffVector {
    pub fn new(t: Vec<DualScalar>) -> Result<Self> {
        check_order(t.len())?;
        if t[0].body.norm() == 0.0 {
            return Err(Error::Domain("t_0 must have a nonzero body".into()));
        }
        Ok(TCoeffVector { t })
    }

    /// Number of coefficients, which is the order `K` of the matching law.
    pub fn order(&self) -> usize {
        self.t.len()
    }

    /// `t_n`, `0 ≤ n < K`.
    pub fn get(&self, n: usize) -> DualScalar {
        self.t[n]
    }

    pub fn values(&self) -> &[DualScalar] {
        &self.t
    }

    pub fn body(&self) -> Vec<C64> {
        self.t.iter().map(|d| d.body).collect()
    }

    pub fn eps(&self) -> Vec<C64> {
        self.t.iter().map(|d| d.eps).collect()
    }

    pub fn deviation(&self, other: &TCoeffVector) -> (f64, f64) {
        max_dev(&self.t, &other.t)
    }

    pub fn scale(&self, c: DualScalar) -> Self {
        TCoeffVector {
            t: self.t.iter().map(|&x| x * c).collect(),
        }
    }
}

fn max_dev(a: &[DualScalar], b: &[DualScalar]) -> (f64, f64) {
    a.iter().zip(b).fold((0.0, 0.0), |(db, de), (x, y)| {
        (
            db.max((x.body - y.body).norm()),
            de.max((x.eps - y.eps).norm()),
        )
    })
}

macro_rules! dual_vector_json {
    ($ty:ident, $field:ident, $body:literal, $eps:literal, $ctor:expr) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                #[derive(Serialize)]
                struct Out {
                    #[serde(rename = "K")]
                    k: usize,
                    #[serde(rename = $body)]
                    body: Vec<WireComplex>,
                    #[serde(rename = $eps)]
                    eps: Vec<WireComplex>,
                }
                Out {
                    k: self.$field.len(),
                    body: to_wire(self.body()),
                    eps: to_wire(self.eps()),
                }
                .serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                use serde::de::Error as _;
                #[derive(Deserialize)]
                struct In {
                    #[serde(rename = "K")]
                    k: usize,
                    #[serde(rename = $body)]
                    body: Vec<WireComplex>,
                    #[serde(rename = $eps)]
                    eps: Vec<WireComplex>,
                }
                let raw = In::deserialize(d)?;
                if raw.body.len() != raw.k || raw.eps.len() != raw.k {
                    return Err(D::Error::custom("entry count does not match K"));
                }
                let v = raw
                    .body
                    .iter()
                    .zip(&raw.eps)
                    .map(|(a, b)| DualScalar::new(a.0, b.0))
                    .collect();
                $ctor(v).map_err(D::Error::custom)
            }
        }
    };
}

dual_vector_json!(
    CumulantVector,
    kappa,
    "kappa",
    "kappa_prime",
    CumulantVector::new
);
dual_vector_json!(TCoeffVector, t, "t", "t_prime", TCoeffVector::new);

/// Coefficients of `M^s` for `s = 0..=K`, where `M = 1 + Σ m_n z^n`.
fn moment_powers(m: &[DualScalar]) -> Vec<Vec<DualScalar>> {
    let k = m.len();
    let mut base = vec![DualScalar::ONE];
    base.extend_from_slice(m);
    let mut pows = vec![{
        let mut one = vec![DualScalar::ZERO; k + 1];
        one[0] = DualScalar::ONE;
        one
    }];
    for s in 1..=k {
        let prev = &pows[s - 1];
        let mut next = vec![DualScalar::ZERO; k + 1];
        for (i, &a) in prev.iter().enumerate() {
            for (j, &b) in base.iter().enumerate().take(k + 1 - i) {
                next[i + j] += a * b;
            }
        }
        pows.push(next);
    }
    pows
}

/// Moments from free cumulants through `M(z) = 1 + Σ κ_s z^s M(z)^s`, the
/// generating-function form of the sum over `NC(n)`.
pub fn moments_from_cumulants(kappa: &CumulantVector) -> InfLaw {
    let k = kappa.order();
    let mut m: Vec<DualScalar> = Vec::with_capacity(k);
    for n in 1..=k {
        // [z^{n−s}] M^s only involves moments of order < n.
        let mut padded = m.clone();
        padded.resize(k, DualScalar::ZERO);
        let pows = moment_powers(&padded);
        let v = (1..=n).map(|s| kappa.get(s) * pows[s][n - s]).sum();
        m.push(v);
    }
    InfLaw::new(m).expect("order already validated")
}

pub fn cumulants_from_moments(law: &InfLaw) -> CumulantVector {
    let k = law.order();
    let pows = moment_powers(law.moments());
    let mut kappa: Vec<DualScalar> = Vec::with_capacity(k);
    for n in 1..=k {
        let lower: DualScalar = (1..n).map(|s| kappa[s - 1] * pows[s][n - s]).sum();
        kappa.push(law.moment(n) - lower);
    }
    CumulantVector { kappa }
}

/// Block-size signatures of `NC(n)` with multiplicities.
fn nc_signatures(n: usize) -> Result<Vec<(Vec<usize>, u64)>> {
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for p in enumerate_nc(n)? {
        let mut sizes: Vec<usize> = p.blocks().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        *counts.entry(sizes).or_default() += 1;
    }
    Ok(counts.into_iter().collect())
}

/// `κ′_n` by the literal recursion over `NC(n)`: the infinitesimal part of
/// `κ_π` is the sum over blocks `V` of `κ′_{|V|} Π_{W≠V} κ_{|W|}`. Needs
/// `K ≤ 12`.
pub fn inf_cumulants_direct(law: &InfLaw) -> Result<Vec<C64>> {
    let k = law.order();
    if k > MAX_NC {
        return Err(Error::size("K (NC enumeration)", k, 1, MAX_NC));
    }
    let mut kb: Vec<C64> = Vec::with_capacity(k);
    let mut ke: Vec<C64> = Vec::with_capacity(k);
    for n in 1..=k {
        let mut body = law.moment(n).body;
        let mut eps = law.moment(n).eps;
        for (sizes, count) in nc_signatures(n)? {
            if sizes == [n] {
                continue;
            }
            let c = count as f64;
            let prod: C64 = sizes.iter().map(|&s| kb[s - 1]).product();
            body -= prod * c;
            for (i, &s) in sizes.iter().enumerate() {
                let others: C64 = sizes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &w)| kb[w - 1])
                    .product();
                eps -= ke[s - 1] * others * c;
            }
        }
        kb.push(body);
        ke.push(eps);
    }
    Ok(ke)
}

/// Aggregated `NCL(n)` data for single-variable sums: block sizes, `|s(π)|`,
/// whether `π ∈ ⟨1_n⟩`, and the number of partitions with that signature.
#[derive(Clone, Debug)]
pub struct NclTable {
    rows: Vec<Vec<NclRow>>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct NclRow {
    sizes: Vec<usize>,
    singles: usize,
    connected: bool,
    count: u64,
}

impl NclTable {
    /// Tables for `n = 1..=max_n`, `max_n ≤ 10`.
    pub fn new(max_n: usize) -> Result<Self> {
        if max_n == 0 || max_n > MAX_NCL {
            return Err(Error::size("n (NCL)", max_n, 1, MAX_NCL));
        }
        let mut rows = vec![Vec::new()];
        for n in 1..=max_n {
            let mut counts: BTreeMap<(Vec<usize>, usize, bool), u64> = BTreeMap::new();
            for p in enumerate_ncl(n)? {
                let mut sizes: Vec<usize> = p.blocks().iter().map(Vec::len).collect();
                sizes.sort_unstable();
                let singles = p.non_minimal_elements().len();
                let connected = p.connected_classes().num_blocks() == 1;
                *counts.entry((sizes, singles, connected)).or_default() += 1;
            }
            rows.push(
                counts
                    .into_iter()
                    .map(|((sizes, singles, connected), count)| NclRow {
                        sizes,
                        singles,
                        connected,
                        count,
                    })
                    .collect(),
            );
        }
        Ok(NclTable { rows })
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    fn rows(&self, n: usize) -> &[NclRow] {
        &self.rows[n]
    }
}

/// Single-variable `t_π = Π_V t_{|V|−1} · t_0^{|s(π)|}`.
fn t_pi_single(t: &[DualScalar], row: &NclRow) -> DualScalar {
    let blocks: DualScalar = row.sizes.iter().map(|&s| t[s - 1]).product();
    blocks * t[0].powi(row.singles as u32)
}

fn is_full(row: &NclRow, n: usize) -> bool {
    row.sizes.len() == 1 && row.sizes[0] == n
}

/// t-coefficients by solving `m_n = Σ_{π∈NCL(n)} t_π` for `t_{n−1}`, which
/// only enters through `π = 1_n` with factor `t_0^{n−1}`. Needs `K ≤ 10`.
pub fn t_coeffs_from_moments(law: &InfLaw) -> Result<TCoeffVector> {
    let table = NclTable::new(law.order().clamp(1, MAX_NCL))?;
    t_coeffs_with_table(law, &table)
}

pub fn t_coeffs_with_table(law: &InfLaw, table: &NclTable) -> Result<TCoeffVector> {
    let k = law.order();
    if k > table.max_n() {
        return Err(Error::size("K (NCL enumeration)", k, 1, table.max_n()));
    }
    let t0 = law.mean();
    if t0.body.norm() == 0.0 {
        return Err(Error::Domain(
            "t-coefficients need a mean with nonzero body".into(),
        ));
    }
    let mut t = vec![t0];
    for n in 2..=k {
        // The unknown t_{n−1} is still absent from `t`, so every row but
        // 1_n can be evaluated.
        let rest: DualScalar = table
            .rows(n)
            .iter()
            .filter(|r| !is_full(r, n))
            .map(|r| t_pi_single(&t, r) * DualScalar::from(r.count as f64))
            .sum();
        let denom = t0.powi(n as u32 - 1).inv()?;
        t.push((law.moment(n) - rest) * denom);
    }
    TCoeffVector::new(t)
}

/// t-coefficients as the coefficients of the T-transform. Works for any
/// `K ≤ 16`.
pub fn t_coeffs_via_transform(law: &InfLaw) -> Result<TCoeffVector> {
    if law.mean().body.norm() == 0.0 {
        return Err(Error::Domain(
            "t-coefficients need a mean with nonzero body".into(),
        ));
    }
    if law.order() == 1 {
        return TCoeffVector::new(vec![law.mean()]);
    }
    TCoeffVector::new(t_transform(law)?.into_coeffs())
}

/// `NCL` route up to `K = 10`, T-transform route above.
pub fn t_coeffs(law: &InfLaw) -> Result<TCoeffVector> {
    if law.order() <= MAX_NCL {
        t_coeffs_from_moments(law)
    } else {
        t_coeffs_via_transform(law)
    }
}

/// `m_n = Σ_{π∈NCL(n)} t_π`.
pub fn moments_from_t(t: &TCoeffVector) -> Result<InfLaw> {
    let table = NclTable::new(t.order().min(MAX_NCL))?;
    if t.order() > table.max_n() {
        return Err(Error::size("K (NCL enumeration)", t.order(), 1, MAX_NCL));
    }
    let m = (1..=t.order())
        .map(|n| {
            table
                .rows(n)
                .iter()
                .map(|r| t_pi_single(t.values(), r) * DualScalar::from(r.count as f64))
                .sum()
        })
        .collect();
    InfLaw::new(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KappaRoute {
    /// `κ_n = Σ_{π∈⟨1_n⟩} t_π` (dual arithmetic gives `κ′_n = Σ ∂t_π`).
    LinkedClass,
    /// `κ_n = Σ_{π∈NC(n−1)} Π_V t_{|V|} · t_0^{n−#π}`, `κ_1 = t_0`.
    NcReduced,
}

pub fn kappa_from_t(t: &TCoeffVector, route: KappaRoute) -> Result<CumulantVector> {
    let k = t.order();
    let tv = t.values();
    let kappa = match route {
        KappaRoute::LinkedClass => {
            let table = NclTable::new(k)?;
            (1..=k)
                .map(|n| {
                    table
                        .rows(n)
                        .iter()
                        .filter(|r| r.connected)
                        .map(|r| t_pi_single(tv, r) * DualScalar::from(r.count as f64))
                        .sum()
                })
                .collect()
        }
        KappaRoute::NcReduced => {
            if k > MAX_NC + 1 {
                return Err(Error::size("K (NC enumeration)", k, 1, MAX_NC + 1));
            }
            let mut out = vec![tv[0]];
            for n in 2..=k {
                let v = nc_signatures(n - 1)?
                    .into_iter()
                    .map(|(sizes, count)| {
                        let blocks: DualScalar = sizes.iter().map(|&s| tv[s]).product();
                        blocks
                            * tv[0].powi((n - sizes.len()) as u32)
                            * DualScalar::from(count as f64)
                    })
                    .sum();
                out.push(v);
            }
            out
        }
    };
    CumulantVector::new(kappa)
}

/// Product of `vals[i]` over `i ≠ skip`.
fn product_except(vals: &[C64], skip: usize) -> C64 {
    vals.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &v)| v)
        .product()
}

fn powc(x: C64, n: usize) -> C64 {
    (0..n).fold(C64::new(1.0, 0.0), |a, _| a * x)
}

/// `κ′_n = Σ_{π∈⟨1_n⟩} ∂t_π` with the explicit single-variable `∂t_π`:
/// one block factor `t_{|V|−1}` replaced by `t′_{|V|−1}`, plus one `t_0`
/// from `s(π)` replaced by `t′_0` (no second term when `s(π)` is empty).
pub fn kappa_prime_linked(t: &TCoeffVector) -> Result<Vec<C64>> {
    let k = t.order();
    let (b, e) = (t.body(), t.eps());
    let table = NclTable::new(k)?;
    Ok((1..=k)
        .map(|n| {
            table
                .rows(n)
                .iter()
                .filter(|r| r.connected)
                .map(|r| {
                    let factors: Vec<C64> = r.sizes.iter().map(|&s| b[s - 1]).collect();
                    let s = r.singles;
                    let t0s = powc(b[0], s);
                    let block_part: C64 = r
                        .sizes
                        .iter()
                        .enumerate()
                        .map(|(i, &sz)| e[sz - 1] * product_except(&factors, i))
                        .sum::<C64>()
                        * t0s;
                    let single_part = if s == 0 {
                        C64::new(0.0, 0.0)
                    } else {
                        factors.iter().product::<C64>() * e[0] * powc(b[0], s - 1) * s as f64
                    };
                    (block_part + single_part) * r.count as f64
                })
                .sum()
        })
        .collect())
}

/// The explicit infinitesimal form of the `NC(n−1)` route:
/// `κ′_n = Σ_π [Σ_V t′_{|V|} Π_{W≠V} t_{|W|} t_0^{n−#π} + Π_V t_{|V|} (n−#π) t′_0 t_0^{n−#π−1}]`.
pub fn kappa_prime_reduced(t: &TCoeffVector) -> Result<Vec<C64>> {
    let k = t.order();
    if k > MAX_NC + 1 {
        return Err(Error::size("K (NC enumeration)", k, 1, MAX_NC + 1));
    }
    let (b, e) = (t.body(), t.eps());
    let mut out = vec![e[0]];
    for n in 2..=k {
        let mut acc = C64::new(0.0, 0.0);
        for (sizes, count) in nc_signatures(n - 1)? {
            let factors: Vec<C64> = sizes.iter().map(|&s| b[s]).collect();
            let p = n - sizes.len();
            let mut term: C64 = sizes
                .iter()
                .enumerate()
                .map(|(i, &s)| e[s] * product_except(&factors, i))
                .sum::<C64>()
                * powc(b[0], p);
            if p > 0 {
                term += factors.iter().product::<C64>() * e[0] * powc(b[0], p - 1) * p as f64;
            }
            acc += term * count as f64;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Mixed dual moments of a family of letters.
pub trait WordMoments {
    fn num_letters(&self) -> usize;
    /// `φ(a_{w_1} ⋯ a_{w_n}) + ε φ′(…)`; the empty word has moment 1.
    fn moment(&self, word: &[usize]) -> Result<DualScalar>;
}

fn letter_counts(word: &[usize], letters: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0; letters];
    for &l in word {
        if l >= letters {
            return Err(Error::IncompleteModel(format!("unknown letter {l}")));
        }
        counts[l] += 1;
    }
    Ok(counts)
}

/// Infinitesimally free letters: mixed dual cumulants vanish, so a word's
/// moment is the sum over non-crossing partitions whose blocks are
/// monochromatic, weighted by the dual cumulants of each letter.
#[derive(Clone, Debug)]
pub struct FreeWordModel {
    cumulants: Vec<CumulantVector>,
}

impl FreeWordModel {
    pub fn new(laws: &[InfLaw]) -> Self {
        FreeWordModel {
            cumulants: laws.iter().map(cumulants_from_moments).collect(),
        }
    }
}

impl WordMoments for FreeWordModel {
    fn num_letters(&self) -> usize {
        self.cumulants.len()
    }

    fn moment(&self, word: &[usize]) -> Result<DualScalar> {
        let counts = letter_counts(word, self.cumulants.len())?;
        for (l, &c) in counts.iter().enumerate() {
            if c > self.cumulants[l].order() {
                return Err(Error::IncompleteModel(format!(
                    "letter {l} occurs {c} times but its law has order {}",
                    self.cumulants[l].order()
                )));
            }
        }
        let n = word.len();
        // phi[i][j]: moment of word[i..j]. d[p][j][r]: sum over ways to
        // place r further block elements after position p (same letter as
        // word[p]) within word[..j], times the moments of the gaps.
        let zero = DualScalar::ZERO;
        let mut phi = vec![vec![zero; n + 1]; n + 1];
        let mut d = vec![vec![Vec::<DualScalar>::new(); n + 1]; n + 1];
        for (i, row) in phi.iter_mut().enumerate() {
            row[i] = DualScalar::ONE;
        }
        for len in 1..=n {
            for i in 0..=n - len {
                let j = i + len;
                let c = word[i];
                let same = word[i + 1..j].iter().filter(|&&l| l == c).count();
                let mut di = vec![phi[i + 1][j]];
                for r in 1..=same {
                    let v = (i + 1..j)
                        .filter(|&q| word[q] == c)
                        .filter(|&q| d[q][j].len() > r - 1)
                        .map(|q| phi[i + 1][q] * d[q][j][r - 1])
                        .sum();
                    di.push(v);
                }
                let kap = &self.cumulants[c];
                phi[i][j] = di
                    .iter()
                    .enumerate()
                    .map(|(r, &v)| kap.get(r + 1) * v)
                    .sum();
                d[i][j] = di;
            }
        }
        Ok(phi[0][n])
    }
}

/// Boolean independent letters: a word's moment is the product of the
/// moments of its maximal runs of equal letters.
#[derive(Clone, Debug)]
pub struct BooleanWordModel {
    laws: Vec<InfLaw>,
}

impl BooleanWordModel {
    pub fn new(laws: &[InfLaw]) -> Self {
        BooleanWordModel {
            laws: laws.to_vec(),
        }
    }
}

impl WordMoments for BooleanWordModel {
    fn num_letters(&self) -> usize {
        self.laws.len()
    }

    fn moment(&self, word: &[usize]) -> Result<DualScalar> {
        letter_counts(word, self.laws.len())?;
        let mut acc = DualScalar::ONE;
        for run in word.chunk_by(|a, b| a == b) {
            let law = &self.laws[run[0]];
            if run.len() > law.order() {
                return Err(Error::IncompleteModel(format!(
                    "run of length {} exceeds order {}",
                    run.len(),
                    law.order()
                )));
            }
            acc *= law.moment(run.len());
        }
        Ok(acc)
    }
}

/// Multi-variable t-coefficients `t_{n−1}(a_1, …, a_n)`, memoized on words.
pub struct TSolver<'m, M: WordMoments + ?Sized> {
    model: &'m M,
    ncl: Vec<Vec<LinkedPartition>>,
    memo: HashMap<Vec<usize>, DualScalar>,
}

impl<'m, M: WordMoments + ?Sized> TSolver<'m, M> {
    /// Supports words of length up to `max_len ≤ 10`.
    pub fn new(model: &'m M, max_len: usize) -> Result<Self> {
        if max_len == 0 || max_len > MAX_NCL {
            return Err(Error::size("word length", max_len, 1, MAX_NCL));
        }
        let mut ncl = vec![Vec::new()];
        for n in 1..=max_len {
            ncl.push(enumerate_ncl(n)?);
        }
        Ok(TSolver {
            model,
            ncl,
            memo: HashMap::new(),
        })
    }

    pub fn max_len(&self) -> usize {
        self.ncl.len() - 1
    }

    /// `t_{n−1}(a_{w_1}, …, a_{w_n})`.
    pub fn t(&mut self, word: &[usize]) -> Result<DualScalar> {
        if let Some(&v) = self.memo.get(word) {
            return Ok(v);
        }
        let n = word.len();
        if n == 0 || n > self.max_len() {
            return Err(Error::size("word length", n, 1, self.max_len()));
        }
        let v = if n == 1 {
            let t0 = self.model.moment(word)?;
            if t0.body.norm() == 0.0 {
                return Err(Error::Domain(format!(
                    "letter {} has a mean with zero body",
                    word[0]
                )));
            }
            t0
        } else {
            let mut rest = DualScalar::ZERO;
            let parts = std::mem::take(&mut self.ncl[n]);
            let res = parts
                .iter()
                .filter(|p| p.num_blocks() > 1)
                .try_for_each(|p| {
                    rest += self.t_pi(p, word)?;
                    Ok::<_, Error>(())
                });
            self.ncl[n] = parts;
            res?;
            let mut denom = DualScalar::ONE;
            for &l in &word[1..] {
                denom *= self.t(&[l])?;
            }
            (self.model.moment(word)? - rest) * denom.inv()?
        };
        self.memo.insert(word.to_vec(), v);
        Ok(v)
    }

    /// `t_π = Π_V t_{|V|−1}(word|_V) · Π_{k∈s(π)} t_0(a_{w_k})`.
    pub fn t_pi(&mut self, pi: &LinkedPartition, word: &[usize]) -> Result<DualScalar> {
        if pi.n() != word.len() {
            return Err(Error::InvalidInput(format!(
                "partition of [{}] applied to a word of length {}",
                pi.n(),
                word.len()
            )));
        }
        let mut acc = DualScalar::ONE;
        for b in pi.blocks() {
            let sub: Vec<usize> = b.iter().map(|&i| word[i - 1]).collect();
            acc *= self.t(&sub)?;
        }
        for k in pi.non_minimal_elements() {
            acc *= self.t(&[word[k - 1]])?;
        }
        Ok(acc)
    }
}

pub fn t_pi_value<M: WordMoments + ?Sized>(
    pi: &LinkedPartition,
    word: &[usize],
    solver: &mut TSolver<'_, M>,
) -> Result<DualScalar> {
    solver.t_pi(pi, word)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedReport {
    pub words_checked: usize,
    pub max_t: f64,
    pub max_t_prime: f64,
}

impl MixedReport {
    pub fn vanishes(&self, tol: f64) -> bool {
        self.max_t < tol && self.max_t_prime < tol
    }
}

/// Largest `|t_{n−1}|` and `|t′_{n−1}|` over all mixed words (at least two
/// distinct letters) of length `2..=max_len`.
pub fn mixed_vanishing_check<M: WordMoments + ?Sized>(
    model: &M,
    max_len: usize,
) -> Result<MixedReport> {
    let letters = model.num_letters();
    let mut solver = TSolver::new(model, max_len)?;
    let mut report = MixedReport {
        words_checked: 0,
        max_t: 0.0,
        max_t_prime: 0.0,
    };
    for len in 2..=max_len {
        let total = letters.pow(len as u32);
        for code in 0..total {
            let word: Vec<usize> = (0..len)
                .map(|i| code / letters.pow(i as u32) % letters)
                .collect();
            if word.iter().all(|&l| l == word[0]) {
                continue;
            }
            let t = solver.t(&word)?;
            report.words_checked += 1;
            report.max_t = report.max_t.max(t.body.norm());
            report.max_t_prime = report.max_t_prime.max(t.eps.norm());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(b: f64, e: f64) -> DualScalar {
        DualScalar::real(b, e)
    }

    fn random_law(seed: u64, k: usize) -> InfLaw {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        m[0] = rng.random_range(0.5..1.5);
        let mp: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        InfLaw::from_real(&m, &mp).unwrap()
    }

    #[test]
    fn free_poisson_cumulants() {
        let law = InfLaw::from_real(&[1.0, 2.0, 5.0, 14.0], &[0.0; 4]).unwrap();
        let k = cumulants_from_moments(&law);
        for n in 1..=4 {
            assert!((k.get(n) - DualScalar::ONE).max_norm() < 1e-12);
        }
        let zero = cumulants_from_moments(&InfLaw::zero(5).unwrap());
        assert!(zero.values().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn wishart_cumulants_are_constant() {
        let law = InfLaw::wishart_limit(2.0, 1.0, 8).unwrap();
        for &k in cumulants_from_moments(&law).values() {
            assert!((k - d(2.0, 1.0)).max_norm() < 1e-10);
        }
        for kp in inf_cumulants_direct(&law).unwrap() {
            assert!((kp - C64::new(1.0, 0.0)).norm() < 1e-10);
        }
        // m′_2 = κ′_2 + 2 κ_1 κ′_1
        assert!((law.moment(2).eps.re - (1.0 + 2.0 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn direct_recursion_matches_dual() {
        for seed in 0..5 {
            let law = random_law(seed, 7);
            let dual = cumulants_from_moments(&law).eps();
            let direct = inf_cumulants_direct(&law).unwrap();
            for (a, b) in dual.iter().zip(&direct) {
                assert!((a - b).norm() < 1e-10);
            }
            let back = moments_from_cumulants(&cumulants_from_moments(&law));
            let (db, de) = back.deviation(&law);
            assert!(db < 1e-12 && de < 1e-12);
        }
    }

    #[test]
    fn wishart_t_coefficients() {
        let law = InfLaw::wishart_limit(2.0, 1.0, 8).unwrap();
        let t = t_coeffs_from_moments(&law).unwrap();
        let mut want = vec![d(2.0, 1.0), d(1.0, 0.0)];
        want.resize(8, DualScalar::ZERO);
        let (db, de) = t.deviation(&TCoeffVector::new(want).unwrap());
        assert!(db < 1e-10 && de < 1e-10, "{t:?}");
        let via = t_coeffs_via_transform(&law).unwrap();
        let (db, de) = t.deviation(&via);
        assert!(db < 1e-10 && de < 1e-10);
    }

    #[test]
    fn second_moment_identity() {
        // m_2 = t_0² + t_1 t_0
        let t = TCoeffVector::new(vec![d(3.0, 0.0), d(1.0, 0.0)]).unwrap();
        let m = moments_from_t(&t).unwrap();
        assert_eq!(m.moment(2), d(12.0, 0.0));
    }

    #[test]
    fn point_mass_t_coefficients() {
        let law = InfLaw::point_mass(DualScalar::ONE, 4).unwrap();
        let t = t_coeffs_from_moments(&law).unwrap();
        let back = moments_from_t(&t).unwrap();
        assert!(back.deviation(&law).0 < 1e-12);
        let k = kappa_from_t(&t, KappaRoute::LinkedClass).unwrap();
        assert!((k.get(1) - DualScalar::ONE).max_norm() < 1e-12);
        for n in 2..=4 {
            assert!(k.get(n).max_norm() < 1e-12);
        }
    }

    #[test]
    fn third_cumulant_with_unit_mean() {
        let t = TCoeffVector::new(vec![d(1.0, 0.0), d(0.7, 0.0), d(-0.4, 0.0)]).unwrap();
        for route in [KappaRoute::LinkedClass, KappaRoute::NcReduced] {
            let k = kappa_from_t(&t, route).unwrap();
            assert!((k.get(3).body.re - (-0.4 + 0.49)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_mean_is_a_domain_error() {
        let law = InfLaw::zero(3).unwrap();
        assert!(matches!(t_coeffs_from_moments(&law), Err(Error::Domain(_))));
        assert!(matches!(
            t_coeffs_via_transform(&law),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn kappa_routes_agree() {
        for seed in 0..5 {
            let law = random_law(10 + seed, 7);
            let t = t_coeffs_from_moments(&law).unwrap();
            let want = cumulants_from_moments(&law);
            for route in [KappaRoute::LinkedClass, KappaRoute::NcReduced] {
                let got = kappa_from_t(&t, route).unwrap();
                let (db, de) = got.deviation(&want);
                assert!(db < 1e-9 && de < 1e-9, "{route:?}: {db:e} {de:e}");
            }
            for eps in [
                kappa_prime_linked(&t).unwrap(),
                kappa_prime_reduced(&t).unwrap(),
            ] {
                for (a, b) in eps.iter().zip(want.eps()) {
                    assert!((a - b).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn scaling_covariance() {
        let law = random_law(3, 6);
        let c = d(2.0, 1.0);
        let t = t_coeffs_from_moments(&law).unwrap();
        let ts = t_coeffs_from_moments(&law.scale(c)).unwrap();
        let (db, de) = ts.deviation(&t.scale(c));
        assert!(db < 1e-9 && de < 1e-9);
    }

    #[test]
    fn free_word_model_basics() {
        let x = random_law(1, 4);
        let y = random_law(2, 4);
        let model = FreeWordModel::new(&[x.clone(), y.clone()]);
        let xy = model.moment(&[0, 1]).unwrap();
        assert!((xy - x.mean() * y.mean()).max_norm() < 1e-14);
        assert!((model.moment(&[0, 0, 0]).unwrap() - x.moment(3)).max_norm() < 1e-12);
        // φ(xyxy) = κ2(x)m1(y)^2 + m1(x)^2 m2(y)  for free x, y
        let kx = cumulants_from_moments(&x);
        let want = kx.get(2) * y.mean() * y.mean() + x.mean() * x.mean() * y.moment(2);
        assert!((model.moment(&[0, 1, 0, 1]).unwrap() - want).max_norm() < 1e-12);
        assert!(matches!(
            model.moment(&[0; 5]),
            Err(Error::IncompleteModel(_))
        ));
        assert!(matches!(model.moment(&[2]), Err(Error::IncompleteModel(_))));
    }

    #[test]
    fn t_pi_examples() {
        let x = random_law(4, 4);
        let model = FreeWordModel::new(std::slice::from_ref(&x));
        let mut solver = TSolver::new(&model, 3).unwrap();
        let single = t_coeffs_from_moments(&x).unwrap();
        let pi: LinkedPartition = "{{1,2},{2,3}}".parse().unwrap();
        let v = t_pi_value(&pi, &[0, 0, 0], &mut solver).unwrap();
        let want = single.get(1) * single.get(1) * single.get(0);
        assert!((v - want).max_norm() < 1e-12);
        let pi: LinkedPartition = "{{1,2}}".parse().unwrap();
        let v = t_pi_value(&pi, &[0, 0], &mut solver).unwrap();
        assert!((v - single.get(1) * single.get(0)).max_norm() < 1e-12);
    }

    #[test]
    fn mixed_t_vanish_for_free_letters_only() {
        let x = random_law(5, 5);
        let y = random_law(6, 5);
        let free = FreeWordModel::new(&[x.clone(), y.clone()]);
        let r = mixed_vanishing_check(&free, 4).unwrap();
        assert!(r.vanishes(1e-9), "{r:?}");
        let boolean = BooleanWordModel::new(&[x, y]);
        let r = mixed_vanishing_check(&boolean, 4).unwrap();
        assert!(!r.vanishes(1e-6), "{r:?}");
    }

    #[test]
    fn json_schemas() {
        let t = TCoeffVector::new(vec![d(2.0, 1.0), d(1.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"K":2,"t":[2.0,1.0],"t_prime":[1.0,0.0]}"#);
        let k = CumulantVector::new(vec![d(1.0, 0.0)]).unwrap();
        assert_eq!(
            serde_json::to_string(&k).unwrap(),
            r#"{"K":1,"kappa":[1.0],"kappa_prime":[0.0]}"#
        );
        let back: TCoeffVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }
}
