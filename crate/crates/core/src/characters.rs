//! Dirichlet characters, Gauss sums, root numbers and the families `O_j(Q)`.
//!
//! A character mod `q` is an exponent vector against the canonical generators
//! of [`UnitGroup`]. Values are exact roots of unity taken from a table whose
//! upper half is the exact conjugate of the lower half, so `χ̄(n)` is
//! bitwise `conj(χ(n))`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, unit_group, UnitGroup};
use crate::error::{Error, Result};

/// Largest modulus accepted when building characters.
pub const CHARACTER_MODULUS_CAP: u64 = 1_000_000;

const NO_VALUE: u32 = u32::MAX;

/// Stable identity of a character: modulus plus exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CharacterKey {
    pub modulus: u64,
    pub exponents: Vec<u64>,
}

impl fmt::Display for CharacterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.modulus)?;
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Serialized form used in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterRecord {
    pub q: u64,
    pub exponents: Vec<u64>,
    pub order: u64,
    pub parity: u8,
    pub conductor: u64,
}

/// `order` roots of unity; entry `order - k` is the exact conjugate of entry `k`.
fn roots_of_unity(order: u64) -> Vec<Complex64> {
    let n = order as usize;
    let mut roots = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..=n / 2 {
        roots[k] = if 4 * k == n {
            Complex64::new(0.0, 1.0)
        } else if 2 * k == n {
            Complex64::new(-1.0, 0.0)
        } else if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            let theta = 2.0 * PI * k as f64 / order as f64;
            Complex64::new(theta.cos(), theta.sin())
        };
    }
    for k in n / 2 + 1..n {
        roots[k] = roots[n - k].conj();
    }
    roots
}

#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<UnitGroup>,
    exponents: Vec<u64>,
    order: u64,
    parity: u8,
    conductor: OnceLock<u64>,
    indices: OnceLock<Arc<[u32]>>,
    values: OnceLock<Arc<[Complex64]>>,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletCharacter")
            .field("modulus", &self.modulus())
            .field("exponents", &self.exponents)
            .field("order", &self.order)
            .field("parity", &self.parity)
            .finish()
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

impl PartialOrd for DirichletCharacter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DirichletCharacter {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.modulus(), &self.exponents).cmp(&(other.modulus(), &other.exponents))
    }
}

impl DirichletCharacter {
    pub fn new(q: u64, exponents: &[u64]) -> Result<Self> {
        if q > CHARACTER_MODULUS_CAP {
            return Err(Error::Domain(format!(
                "modulus {q} exceeds cap {CHARACTER_MODULUS_CAP}"
            )));
        }
        let group = unit_group(q)?;
        Self::from_group(group, exponents)
    }

    pub fn principal(q: u64) -> Result<Self> {
        let rank = unit_group(q)?.rank();
        Self::new(q, &vec![0; rank])
    }

    pub fn from_key(key: &CharacterKey) -> Result<Self> {
        Self::new(key.modulus, &key.exponents)
    }

    fn from_group(group: Arc<UnitGroup>, exponents: &[u64]) -> Result<Self> {
        let orders = group.orders();
        if orders.len() != exponents.len() {
            return Err(Error::Domain(format!(
                "modulus {} needs {} exponents, got {}",
                group.modulus(),
                orders.len(),
                exponents.len()
            )));
        }
        let exponents: Vec<u64> = exponents.iter().zip(&orders).map(|(e, o)| e % o).collect();
        let order = orders
            .iter()
            .zip(&exponents)
            .fold(1u64, |acc, (&o, &e)| acc.lcm(&(o / o.gcd(&e))));
        let mut chi = DirichletCharacter {
            group,
            exponents,
            order,
            parity: 0,
            conductor: OnceLock::new(),
            indices: OnceLock::new(),
            values: OnceLock::new(),
        };
        let q = chi.modulus();
        chi.parity = if q > 2 && chi.value_index((q - 1) as i64) != Some(0) { 1 } else { 0 };
        Ok(chi)
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus()
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn group(&self) -> &UnitGroup {
        &self.group
    }

    /// Exact multiplicative order.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// 0 for even characters, 1 for odd ones.
    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    pub fn is_real(&self) -> bool {
        self.order <= 2
    }

    pub fn key(&self) -> CharacterKey {
        CharacterKey { modulus: self.modulus(), exponents: self.exponents.clone() }
    }

    pub fn record(&self) -> CharacterRecord {
        CharacterRecord {
            q: self.modulus(),
            exponents: self.exponents.clone(),
            order: self.order,
            parity: self.parity,
            conductor: self.conductor(),
        }
    }

    pub fn conjugate(&self) -> Self {
        let orders = self.group.orders();
        let exps: Vec<u64> = self
            .exponents
            .iter()
            .zip(&orders)
            .map(|(&e, &o)| (o - e) % o)
            .collect();
        Self::from_group(Arc::clone(&self.group), &exps).expect("conjugate of a valid character")
    }

    /// `k` with `χ(n) = exp(2πi k / order)`, or `None` when `gcd(n, q) > 1`.
    pub fn value_index(&self, n: i64) -> Option<u64> {
        if let Some(table) = self.indices.get() {
            let r = n.rem_euclid(self.modulus() as i64) as usize;
            return (table[r] != NO_VALUE).then_some(table[r] as u64);
        }
        let q = self.modulus();
        let r = n.rem_euclid(q as i64) as u64;
        let mut logs = vec![0u64; self.exponents.len()];
        if !self.group.discrete_log_into(r, &mut logs) {
            return None;
        }
        Some(self.combine(&logs))
    }

    fn combine(&self, logs: &[u64]) -> u64 {
        let orders = self.group.orders();
        let mut k = 0u64;
        for ((&e, &o), &d) in self.exponents.iter().zip(&orders).zip(logs) {
            if e == 0 {
                continue;
            }
            let g = o.gcd(&e);
            let reduced = o / g;
            let scale = self.order / reduced;
            let term = ((e / g) as u128 * d as u128 % reduced as u128) as u64;
            k = (k + term * scale) % self.order;
        }
        k
    }

    /// Value indices for every residue `0..q`.
    pub fn index_table(&self) -> &[u32] {
        self.indices.get_or_init(|| {
            let q = self.modulus();
            let mut logs = vec![0u64; self.exponents.len()];
            (0..q)
                .map(|r| {
                    if self.group.discrete_log_into(r, &mut logs) {
                        self.combine(&logs) as u32
                    } else {
                        NO_VALUE
                    }
                })
                .collect::<Vec<u32>>()
                .into()
        })
    }

    /// Values `χ(r)` for every residue `0..q`.
    pub fn value_table(&self) -> &[Complex64] {
        self.values.get_or_init(|| {
            let roots = roots_of_unity(self.order);
            self.index_table()
                .iter()
                .map(|&k| {
                    if k == NO_VALUE {
                        Complex64::new(0.0, 0.0)
                    } else {
                        roots[k as usize]
                    }
                })
                .collect::<Vec<_>>()
                .into()
        })
    }

    pub fn value(&self, n: i64) -> Complex64 {
        let q = self.modulus() as i64;
        self.value_table()[n.rem_euclid(q) as usize]
    }

    /// Least modulus of a character inducing this one.
    pub fn conductor(&self) -> u64 {
        *self.conductor.get_or_init(|| {
            let q = self.modulus();
            let table = self.index_table();
            let divisors = factorize(q).expect("modulus factorizes").divisors();
            for d in divisors {
                let induced = (1..=q)
                    .step_by(d as usize)
                    .filter(|n| n.gcd(&q) == 1)
                    .all(|n| table[(n % q) as usize] == 0);
                if induced {
                    return d;
                }
            }
            q
        })
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus()
    }
}

pub fn char_value(chi: &DirichletCharacter, n: i64) -> Complex64 {
    chi.value(n)
}

pub fn conductor_and_primitivity(chi: &DirichletCharacter) -> (u64, bool) {
    (chi.conductor(), chi.is_primitive())
}

/// Conductor read off the exponent vector component by component.
///
/// This is an independent route used to cross-check [`DirichletCharacter::conductor`];
/// family enumeration never relies on it.
pub fn conductor_from_exponents(chi: &DirichletCharacter) -> u64 {
    let mut at = 0;
    let mut conductor = 1u64;
    for c in chi.group().components() {
        let exps = &chi.exponents()[at..at + c.orders.len()];
        at += c.orders.len();
        let (p, e) = (c.prime, c.exponent);
        if p == 2 {
            match exps {
                [] => {}
                [x0] => {
                    if *x0 != 0 {
                        conductor *= 4;
                    }
                }
                [x0, x1] => {
                    if *x1 == 0 {
                        if *x0 != 0 {
                            conductor *= 4;
                        }
                    } else {
                        conductor *= 1 << (e - x1.trailing_zeros());
                    }
                }
                _ => unreachable!("2-component has at most two generators"),
            }
        } else {
            let x = exps[0];
            if x != 0 {
                let mut v = 0;
                let mut y = x;
                while y % p == 0 && v < e - 1 {
                    y /= p;
                    v += 1;
                }
                conductor *= p.pow(e - v);
            }
        }
    }
    conductor
}

/// All `φ(q)` characters mod `q`, ordered by exponent vector.
pub fn enumerate_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    if q == 0 || q > CHARACTER_MODULUS_CAP {
        return Err(Error::Domain(format!(
            "modulus {q} outside 1..={CHARACTER_MODULUS_CAP}"
        )));
    }
    let group = unit_group(q)?;
    let orders = group.orders();
    let candidates: Vec<Vec<u64>> = orders.iter().map(|&o| (0..o).collect()).collect();
    Ok(mixed_radix(&candidates)
        .into_iter()
        .map(|e| DirichletCharacter::from_group(Arc::clone(&group), &e).expect("valid exponents"))
        .collect())
}

fn mixed_radix(choices: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::with_capacity(choices.len())];
    for list in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |&x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

/// `O_j(Q)`: primitive characters of exact order `j` and conductor in `(Q, 2Q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterFamily {
    pub order: u64,
    pub q_param: f64,
    pub members: Vec<DirichletCharacter>,
}

impl CharacterFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn records(&self) -> Vec<CharacterRecord> {
        self.members.iter().map(DirichletCharacter::record).collect()
    }

    /// Members grouped by modulus, in family order.
    pub fn by_modulus(&self) -> Vec<Vec<&DirichletCharacter>> {
        let mut groups: Vec<Vec<&DirichletCharacter>> = Vec::new();
        for chi in &self.members {
            match groups.last_mut() {
                Some(g) if g[0].modulus() == chi.modulus() => g.push(chi),
                _ => groups.push(vec![chi]),
            }
        }
        groups
    }
}

fn family_members_mod(q: u64, j: u64) -> Result<Vec<DirichletCharacter>> {
    let group = unit_group(q)?;
    let orders = group.orders();
    // exponents whose component order divides j
    let candidates: Vec<Vec<u64>> = orders
        .iter()
        .map(|&o| {
            let step = o / o.gcd(&j);
            (0..o).step_by(step as usize).collect()
        })
        .collect();
    let mut out = Vec::new();
    for e in mixed_radix(&candidates) {
        let chi = DirichletCharacter::from_group(Arc::clone(&group), &e)?;
        if chi.order() == j && chi.is_primitive() {
            out.push(chi);
        }
    }
    Ok(out)
}

pub fn enumerate_family(j: u64, q_param: f64) -> Result<CharacterFamily> {
    if j < 2 {
        return Err(Error::Domain(format!("family order must be >= 2, got {j}")));
    }
    if !q_param.is_finite() || q_param < 1.0 {
        return Err(Error::Domain(format!("Q must be finite and >= 1, got {q_param}")));
    }
    let lo = q_param.floor() as u64 + 1;
    let hi = (2.0 * q_param).floor() as u64;
    if hi > CHARACTER_MODULUS_CAP {
        return Err(Error::Domain(format!("2Q = {hi} exceeds modulus cap")));
    }
    let per_modulus: Vec<Vec<DirichletCharacter>> = (lo.max(3)..=hi)
        .into_par_iter()
        .map(|q| family_members_mod(q, j))
        .collect::<Result<_>>()?;
    Ok(CharacterFamily {
        order: j,
        q_param,
        members: per_modulus.into_iter().flatten().collect(),
    })
}

/// `τ(χ) = Σ_{a mod q} χ(a) e(a/q)` for primitive `χ`.
pub fn gauss_sum(chi: &DirichletCharacter) -> Result<Complex64> {
    if !chi.is_primitive() {
        return Err(Error::Domain(format!(
            "Gauss sum requested for imprimitive character {}",
            chi.key()
        )));
    }
    let q = chi.modulus();
    let values = chi.value_table();
    let mut acc = crate::lfunc::CompensatedSum::default();
    for a in 1..=q {
        let v = values[(a % q) as usize];
        if v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let theta = 2.0 * PI * a as f64 / q as f64;
        acc.add(v * Complex64::new(theta.cos(), theta.sin()));
    }
    Ok(acc.total())
}

/// `ε(χ) = τ(χ) / (i^κ √q)`.
pub fn root_number(chi: &DirichletCharacter) -> Result<Complex64> {
    let tau = gauss_sum(chi)?;
    let i_kappa = if chi.parity() == 1 { Complex64::new(0.0, 1.0) } else { Complex64::new(1.0, 0.0) };
    Ok(tau / (i_kappa * (chi.modulus() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn quadratic(q: u64) -> DirichletCharacter {
        enumerate_characters(q)
            .unwrap()
            .into_iter()
            .find(|c| c.order() == 2 && c.is_primitive())
            .unwrap()
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_characters(3).unwrap().len(), 2);
        let mut orders: Vec<u64> = enumerate_characters(5).unwrap().iter().map(|c| c.order()).collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2, 4, 4]);
        let eight = enumerate_characters(8).unwrap();
        assert_eq!(eight.len(), 4);
        assert!(eight.iter().all(|c| c.order() <= 2));
        assert!(enumerate_characters(CHARACTER_MODULUS_CAP + 1).is_err());
    }

    #[test]
    fn value_examples() {
        let chi3 = quadratic(3);
        assert_eq!(chi3.value(2), Complex64::new(-1.0, 0.0));
        for chi in enumerate_characters(12).unwrap() {
            assert_eq!(chi.value(12), Complex64::new(0.0, 0.0));
        }
        let chi7 = DirichletCharacter::new(7, &[2]).unwrap();
        assert_eq!(chi7.order(), 3);
        let g = chi7.group().generators()[0] as i64;
        let expected = Complex64::new(0.0, 2.0 * PI / 3.0).exp();
        assert!(close(chi7.value(g), expected, 1e-15));
    }

    #[test]
    fn conductor_examples() {
        assert_eq!(conductor_and_primitivity(&DirichletCharacter::principal(12).unwrap()), (1, false));
        let chi4 = DirichletCharacter::new(4, &[1]).unwrap();
        assert_eq!(conductor_and_primitivity(&chi4), (4, true));
        // the mod-9 character of order 2 factors through mod 3
        let chi9 = DirichletCharacter::new(9, &[3]).unwrap();
        assert_eq!(chi9.order(), 2);
        assert_eq!(conductor_and_primitivity(&chi9), (3, false));
    }

    #[test]
    fn conductor_routes_agree() {
        for q in 1..=300 {
            for chi in enumerate_characters(q).unwrap() {
                assert_eq!(chi.conductor(), conductor_from_exponents(&chi), "{}", chi.key());
            }
        }
    }

    #[test]
    fn family_examples() {
        let f = enumerate_family(2, 2.0).unwrap();
        let moduli: Vec<u64> = f.members.iter().map(|c| c.modulus()).collect();
        assert_eq!(moduli, vec![3, 4]);
        assert!(enumerate_family(3, 2.0).unwrap().is_empty());
        let f = enumerate_family(3, 6.0).unwrap();
        let moduli: Vec<u64> = f.members.iter().map(|c| c.modulus()).collect();
        assert_eq!(moduli, vec![7, 7, 9, 9]);
    }

    #[test]
    fn family_invariants() {
        for j in [2u64, 3, 4, 6] {
            let fam = enumerate_family(j, 40.0).unwrap();
            let keys: Vec<CharacterKey> = fam.members.iter().map(|c| c.key()).collect();
            let mut sorted = keys.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(keys, sorted);
            for chi in &fam.members {
                assert!(chi.is_primitive());
                assert_eq!(chi.order(), j);
                assert!(chi.modulus() > 40 && chi.modulus() <= 80);
                let conj = chi.conjugate();
                assert!(fam.members.contains(&conj));
                if j == 2 {
                    assert_eq!(&conj, chi);
                    assert!(chi.value_table().iter().all(|v| v.im == 0.0));
                }
            }
        }
    }

    #[test]
    fn conjugate_values_are_bitwise_conjugates() {
        for chi in enumerate_characters(63).unwrap() {
            let conj = chi.conjugate();
            for n in 0..63 {
                assert_eq!(conj.value(n), chi.value(n).conj());
            }
        }
    }

    #[test]
    fn orthogonality_and_multiplicativity() {
        for q in 3..=500u64 {
            for chi in enumerate_characters(q).unwrap() {
                if chi.is_principal() {
                    continue;
                }
                let s: Complex64 = (1..=q as i64).map(|n| chi.value(n)).sum();
                assert!(s.norm() <= 1e-9, "q = {q}");
            }
        }
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1_000_000) as i64
        };
        for (q, exps) in [(35u64, vec![1u64, 2]), (64, vec![1, 3]), (97, vec![5])] {
            let chi = DirichletCharacter::new(q, &exps).unwrap();
            for _ in 0..10_000 {
                let (m, n) = (next(), next());
                assert!(close(chi.value(m * n), chi.value(m) * chi.value(n), 1e-12));
            }
        }
    }

    #[test]
    fn gauss_sum_examples() {
        let s3 = (3f64).sqrt();
        assert!(close(gauss_sum(&quadratic(3)).unwrap(), Complex64::new(0.0, s3), 1e-12));
        assert!(close(gauss_sum(&quadratic(4)).unwrap(), Complex64::new(0.0, 2.0), 1e-12));
        assert!(close(gauss_sum(&quadratic(5)).unwrap(), Complex64::new(5f64.sqrt(), 0.0), 1e-12));
        assert!(gauss_sum(&DirichletCharacter::new(9, &[3]).unwrap()).is_err());
        assert!(gauss_sum(&DirichletCharacter::principal(7).unwrap()).is_err());
    }

    #[test]
    fn gauss_sum_modulus_is_sqrt_q() {
        for q in 3..=200u64 {
            for chi in enumerate_characters(q).unwrap().iter().filter(|c| c.is_primitive()) {
                let g = gauss_sum(chi).unwrap();
                assert!((g.norm() - (q as f64).sqrt()).abs() <= 1e-9 * (q as f64).sqrt());
            }
        }
    }

    #[test]
    fn root_number_examples() {
        assert!(close(root_number(&quadratic(3)).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
        assert!(close(root_number(&quadratic(5)).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
        let chi7 = DirichletCharacter::new(7, &[2]).unwrap();
        let eps = root_number(&chi7).unwrap();
        assert!((eps.norm() - 1.0).abs() < 1e-10);
        assert!(close(root_number(&chi7.conjugate()).unwrap(), eps.conj(), 1e-12));
    }
}
