//! Integer and multiplicative-function primitives.
//!
//! Everything here works on `u64`. Factorization is trial division up to
//! [`TRIAL_DIVISION_LIMIT`]; a remaining cofactor is accepted only if it is a
//! (deterministic Miller–Rabin) prime, otherwise the call fails.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_integer::Integer;

use crate::error::{Error, Result};

/// Largest trial divisor used by [`factorize`].
pub const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

/// Largest modulus accepted by [`unit_group`].
pub const UNIT_GROUP_CAP: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Domain("cannot factorize 0".into()));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    let mut push = |p: u64, rest: &mut u64| {
        let mut e = 0;
        while *rest % p == 0 {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut rest);
    push(3, &mut rest);
    let mut p = 5u64;
    while p <= TRIAL_DIVISION_LIMIT && p * p <= rest {
        push(p, &mut rest);
        push(p + 2, &mut rest);
        p += 6;
    }
    if rest > 1 {
        if p * p > rest || is_prime(rest) {
            factors.push((rest, 1));
        } else {
            return Err(Error::Domain(format!(
                "{n} has a composite cofactor {rest} with no prime factor below {TRIAL_DIVISION_LIMIT}"
            )));
        }
    }
    Ok(Factorization { n, factors })
}

pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factorize(n)?.euler_phi())
}

pub fn moebius(n: u64) -> Result<i8> {
    let f = factorize(n)?;
    if !f.is_squarefree() {
        return Ok(0);
    }
    Ok(if f.factors.len() % 2 == 0 { 1 } else { -1 })
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of ordered factorizations of `n` into `k` positive factors.
pub fn tau_k(n: u64, k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::Domain("tau_k needs k >= 1".into()));
    }
    let f = factorize(n)?;
    f.factors.iter().try_fold(1u64, |acc, &(_, e)| {
        binomial(e as u64 + k - 1, k - 1)
            .and_then(|b| acc.checked_mul(b))
            .ok_or_else(|| Error::Domain(format!("tau_{k}({n}) overflows u64")))
    })
}

/// Splits `m = n * l^2` with `n` squarefree.
pub fn squarefree_decompose(m: u64) -> Result<(u64, u64)> {
    let f = factorize(m)?;
    let mut core = 1u64;
    let mut root = 1u64;
    for &(p, e) in &f.factors {
        if e % 2 == 1 {
            core *= p;
        }
        root *= p.pow(e / 2);
    }
    Ok((core, root))
}

/// Möbius function for `0..=n` (index 0 holds 0).
pub fn moebius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    if n == 0 {
        mu[0] = 0;
        return mu;
    }
    mu[0] = 0;
    let mut composite = vec![false; n + 1];
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        for m in (p..=n).step_by(p) {
            if m > p {
                composite[m] = true;
            }
            mu[m] = -mu[m];
        }
        let sq = p.saturating_mul(p);
        if sq <= n {
            for m in (sq..=n).step_by(sq) {
                mu[m] = 0;
            }
        }
    }
    mu
}

/// Smallest prime factor for `0..=n` (0 and 1 map to themselves).
pub fn smallest_prime_factor_table(n: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = (0..=n as u32).collect();
    let mut p = 2usize;
    while p * p <= n {
        if spf[p] == p as u32 {
            for m in (p * p..=n).step_by(p) {
                if spf[m] == m as u32 {
                    spf[m] = p as u32;
                }
            }
        }
        p += 1;
    }
    spf
}

/// `tau_k(m)` for `0..=n`, built from a smallest-prime-factor sieve.
pub fn tau_k_table(n: usize, k: u64) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::Domain("tau_k needs k >= 1".into()));
    }
    let spf = smallest_prime_factor_table(n);
    let mut out = vec![0u64; n + 1];
    if n >= 1 {
        out[1] = 1;
    }
    for m in 2..=n {
        let p = spf[m] as usize;
        let mut rest = m / p;
        let mut e = 1u64;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        let local = binomial(e + k - 1, k - 1)
            .ok_or_else(|| Error::Domain(format!("tau_{k} overflows at {m}")))?;
        out[m] = out[rest]
            .checked_mul(local)
            .ok_or_else(|| Error::Domain(format!("tau_{k} overflows at {m}")))?;
    }
    Ok(out)
}

/// One prime-power factor of `(Z/qZ)^*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitComponent {
    pub prime: u64,
    pub exponent: u32,
    pub prime_power: u64,
    /// Generators as residues modulo `prime_power`.
    pub local_generators: Vec<u64>,
    /// The same generators lifted to residues modulo `q` (≡ 1 on the other components).
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    /// `dlog[r]` holds the exponents of residue `r` (mod `prime_power`), flattened
    /// with stride `orders.len()`; non-units hold `u32::MAX`.
    dlog: Vec<u32>,
}

impl UnitComponent {
    fn local_log(&self, residue: u64) -> &[u32] {
        let k = self.orders.len();
        let at = residue as usize * k;
        &self.dlog[at..at + k]
    }
}

/// Structure of `(Z/qZ)^*` as a product of cyclic groups with canonical generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroup {
    modulus: u64,
    components: Vec<UnitComponent>,
}

impl UnitGroup {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn components(&self) -> &[UnitComponent] {
        &self.components
    }

    /// Generator orders across all components, in exponent-vector order.
    pub fn orders(&self) -> Vec<u64> {
        self.components
            .iter()
            .flat_map(|c| c.orders.iter().copied())
            .collect()
    }

    /// Generators modulo `q`, in exponent-vector order.
    pub fn generators(&self) -> Vec<u64> {
        self.components
            .iter()
            .flat_map(|c| c.generators.iter().copied())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.components.iter().map(|c| c.orders.len()).sum()
    }

    pub fn order(&self) -> u64 {
        self.components
            .iter()
            .flat_map(|c| c.orders.iter())
            .product()
    }

    pub fn discrete_log(&self, n: i64) -> Result<Vec<u64>> {
        let q = self.modulus;
        let r = n.rem_euclid(q as i64) as u64;
        if r.gcd(&q) != 1 {
            return Err(Error::Domain(format!("{n} is not a unit modulo {q}")));
        }
        let mut out = Vec::with_capacity(self.rank());
        for c in &self.components {
            out.extend(c.local_log(r % c.prime_power).iter().map(|&x| x as u64));
        }
        Ok(out)
    }

    /// Writes the exponent vector of the unit `r` (reduced mod q) into `out`;
    /// returns false for non-units.
    pub fn discrete_log_into(&self, r: u64, out: &mut [u64]) -> bool {
        let mut at = 0;
        for c in &self.components {
            if r % c.prime == 0 {
                return false;
            }
            for &x in c.local_log(r % c.prime_power) {
                out[at] = x as u64;
                at += 1;
            }
        }
        true
    }

    /// Product of `generator_i ^ exponents_i` modulo `q`.
    pub fn exponentiate(&self, exponents: &[u64]) -> u64 {
        let q = self.modulus;
        self.generators()
            .iter()
            .zip(exponents)
            .fold(1 % q, |acc, (&g, &e)| mul_mod(acc, pow_mod(g, e, q), q))
    }
}

fn crt_lift(local: u64, prime_power: u64, q: u64) -> u64 {
    let cofactor = q / prime_power;
    if cofactor == 1 {
        return local % q;
    }
    // x ≡ local (mod p^e), x ≡ 1 (mod cofactor)
    let inv = mod_inverse(cofactor % prime_power, prime_power);
    let diff = (local + prime_power - 1 % prime_power) % prime_power;
    let k = mul_mod(diff, inv, prime_power);
    (1 + cofactor as u128 * k as u128) as u64 % q
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(m as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m as i128) as u64
}

fn element_order_is(g: u64, order: u64, modulus: u64) -> Result<bool> {
    if pow_mod(g, order, modulus) != 1 {
        return Ok(false);
    }
    for r in factorize(order)?.primes() {
        if pow_mod(g, order / r, modulus) == 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn odd_component(p: u64, e: u32, q: u64) -> Result<UnitComponent> {
    let pe = p.pow(e);
    let order = (p - 1) * p.pow(e - 1);
    let mut g = 2u64;
    while !element_order_is(g, p - 1, p)? {
        g += 1;
    }
    if e >= 2 && pow_mod(g, p - 1, p * p) == 1 {
        g += p;
    }
    if !element_order_is(g, order, pe)? {
        return Err(Error::Internal(format!("{g} does not generate units mod {pe}")));
    }
    let mut dlog = vec![u32::MAX; pe as usize];
    let mut x = 1u64;
    for k in 0..order {
        dlog[x as usize] = k as u32;
        x = mul_mod(x, g, pe);
    }
    Ok(UnitComponent {
        prime: p,
        exponent: e,
        prime_power: pe,
        local_generators: vec![g],
        generators: vec![crt_lift(g, pe, q)],
        orders: vec![order],
        dlog,
    })
}

fn two_component(e: u32, q: u64) -> UnitComponent {
    let pe = 1u64 << e;
    let (local_generators, orders): (Vec<u64>, Vec<u64>) = match e {
        1 => (vec![], vec![]),
        2 => (vec![3], vec![2]),
        _ => (vec![pe - 1, 5 % pe], vec![2, pe >> 2]),
    };
    let k = orders.len();
    let mut dlog = vec![u32::MAX; pe as usize * k];
    if k == 0 {
        // (Z/2Z)^* is trivial
    } else if k == 1 {
        dlog[1] = 0;
        dlog[3] = 1;
    } else {
        let mut x = 1u64;
        for b in 0..orders[1] {
            dlog[x as usize * 2] = 0;
            dlog[x as usize * 2 + 1] = b as u32;
            let y = (pe - x) % pe;
            dlog[y as usize * 2] = 1;
            dlog[y as usize * 2 + 1] = b as u32;
            x = x * 5 % pe;
        }
    }
    UnitComponent {
        prime: 2,
        exponent: e,
        prime_power: pe,
        generators: local_generators.iter().map(|&g| crt_lift(g, pe, q)).collect(),
        local_generators,
        orders,
        dlog,
    }
}

fn build_unit_group(q: u64) -> Result<UnitGroup> {
    let f = factorize(q)?;
    let mut components = Vec::with_capacity(f.factors.len());
    for &(p, e) in &f.factors {
        components.push(if p == 2 {
            two_component(e, q)
        } else {
            odd_component(p, e, q)?
        });
    }
    let group = UnitGroup { modulus: q, components };
    if group.order() != f.euler_phi() {
        return Err(Error::Internal(format!("unit group of {q} has wrong order")));
    }
    Ok(group)
}

static UNIT_GROUPS: LazyLock<Mutex<HashMap<u64, Arc<UnitGroup>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Memoized structure of `(Z/qZ)^*`.
pub fn unit_group(q: u64) -> Result<Arc<UnitGroup>> {
    if q == 0 || q > UNIT_GROUP_CAP {
        return Err(Error::Domain(format!("modulus {q} outside 1..={UNIT_GROUP_CAP}")));
    }
    if let Some(g) = UNIT_GROUPS.lock().expect("unit group memo poisoned").get(&q) {
        return Ok(Arc::clone(g));
    }
    let built = Arc::new(build_unit_group(q)?);
    let mut memo = UNIT_GROUPS.lock().expect("unit group memo poisoned");
    Ok(Arc::clone(memo.entry(q).or_insert(built)))
}

pub fn discrete_log(group: &UnitGroup, n: i64) -> Result<Vec<u64>> {
    group.discrete_log(n)
}
