//! Prime-field contexts, additive characters, and phase evaluation for the
//! supported trace-function families.
//!
//! Residues are unsigned machine integers below `p`, and `p` is limited to
//! 2^31 so every phase product fits a 64-bit intermediate after one reduction
//! (desk-scale experiments stop well below 10^7).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported modulus; keeps `(p-1)^2 < 2^62` so `mulmod` never
/// overflows a u64 intermediate.
pub const MAX_P: u64 = 1 << 31;

/// One trace-function family: the phase sent through the additive character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceFamily {
    /// phase(a, n) = n^3 + a n
    Birch,
    /// phase(a, n) = a n + n^{-1}, defined for n != 0
    Kloosterman,
    /// phase(a, n) = a n + f(n) for an odd integer polynomial f, deg f >= 3.
    /// `coeffs[j]` multiplies n^j; even positions must vanish.
    OddPolynomial { coeffs: Vec<i64> },
}

impl TraceFamily {
    /// Validated odd-polynomial family. Degrees 7 and 9 are accepted with a
    /// warning: the square-root cancellation theory excludes them, the
    /// computations themselves are fine.
    pub fn odd_polynomial(coeffs: Vec<i64>) -> Result<Self> {
        let degree = match coeffs.iter().rposition(|&c| c != 0) {
            Some(d) => d,
            None => return Err(Error::InvalidParam("zero polynomial".into())),
        };
        if degree < 3 {
            return Err(Error::InvalidParam(format!(
                "odd polynomial must have degree >= 3, got {degree}"
            )));
        }
        if let Some(bad) = (0..=degree).find(|&j| j % 2 == 0 && coeffs[j] != 0) {
            return Err(Error::InvalidParam(format!(
                "odd polynomial has a nonzero coefficient at even degree {bad}"
            )));
        }
        if degree == 7 || degree == 9 {
            log::warn!("odd polynomial degree {degree} is outside the supported theory; results are exploratory");
        }
        let mut coeffs = coeffs;
        coeffs.truncate(degree + 1);
        Ok(TraceFamily::OddPolynomial { coeffs })
    }

    /// Degree entering the Weil bound: 3 (Birch), 2 (Kloosterman), deg f.
    pub fn weil_degree(&self) -> u64 {
        match self {
            TraceFamily::Birch => 3,
            TraceFamily::Kloosterman => 2,
            TraceFamily::OddPolynomial { coeffs } => (coeffs.len() - 1) as u64,
        }
    }

    /// Upper bound for the normalized complete sums: 2 for Birch and
    /// Kloosterman, deg f - 1 for polynomial phases.
    pub fn sum_bound(&self) -> f64 {
        match self {
            TraceFamily::Birch | TraceFamily::Kloosterman => 2.0,
            TraceFamily::OddPolynomial { .. } => (self.weil_degree() - 1) as f64,
        }
    }

    /// Stable identifier used in cache file names and report metadata.
    pub fn slug(&self) -> String {
        match self {
            TraceFamily::Birch => "birch".into(),
            TraceFamily::Kloosterman => "kloosterman".into(),
            TraceFamily::OddPolynomial { coeffs } => {
                let body: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                format!("oddpoly_{}", body.join("_"))
            }
        }
    }

    /// Numeric tag stored in cache headers.
    pub fn tag(&self) -> u8 {
        match self {
            TraceFamily::Birch => 0,
            TraceFamily::Kloosterman => 1,
            TraceFamily::OddPolynomial { .. } => 2,
        }
    }

    /// Whether n = 0 contributes a term (it does not for Kloosterman).
    pub fn includes_zero(&self) -> bool {
        !matches!(self, TraceFamily::Kloosterman)
    }
}

/// Immutable per-prime context: the modulus and the full table of additive
/// character values e_p(t) = e^{2 pi i t / p}.
///
/// The table costs O(p) memory and removes every trigonometric call from the
/// O(p L) summation loops. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct FieldContext {
    p: u64,
    unity: Vec<Complex64>,
}

impl FieldContext {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p < 3 {
            return Err(Error::InvalidParam(format!("p = {p} is below the smallest odd prime")));
        }
        if p > MAX_P {
            return Err(Error::ResourceLimit(format!(
                "p = {p} exceeds the supported modulus bound {MAX_P}"
            )));
        }
        let step = std::f64::consts::TAU / p as f64;
        let unity = (0..p)
            .map(|t| {
                let (s, c) = (step * t as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        Ok(FieldContext { p, unity })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn sqrt_p(&self) -> f64 {
        (self.p as f64).sqrt()
    }

    /// e_p(t) for a residue t; rejects out-of-range arguments.
    pub fn additive_character(&self, t: u64) -> Result<Complex64> {
        if t >= self.p {
            return Err(Error::Domain(format!(
                "character argument {t} is not a residue mod {}",
                self.p
            )));
        }
        Ok(self.unity[t as usize])
    }

    /// Unchecked table access for hot loops (t must already be reduced).
    #[inline]
    pub fn unity(&self, t: u64) -> Complex64 {
        debug_assert!(t < self.p);
        self.unity[t as usize]
    }

    /// Multiplicative inverse mod p by Fermat exponentiation.
    pub fn modular_inverse(&self, n: u64) -> Result<u64> {
        let n = n % self.p;
        if n == 0 {
            return Err(Error::Domain("0 has no multiplicative inverse".into()));
        }
        Ok(pow_mod(n, self.p - 2, self.p))
    }

    /// Full inverse table in O(p): `inv[n] * n = 1 mod p` for n >= 1,
    /// `inv[0] = 0` as a sentinel. Uses the standard prefix recurrence.
    pub fn inverse_table(&self) -> Vec<u64> {
        let p = self.p;
        let mut inv = vec![0u64; p as usize];
        if p > 1 {
            inv[1] = 1;
            for i in 2..p {
                // inv[i] = -(p/i) * inv[p mod i] mod p; p % i != 0 since p is prime
                let q = p / i;
                let r = (p % i) as usize;
                inv[i as usize] = p - mul_mod(q, inv[r], p);
            }
        }
        inv
    }

    /// Phase t with term e_p(t): n^3 + a n (Birch), a n + inv(n)
    /// (Kloosterman), a n + f(n) (odd polynomial). Horner evaluation, all
    /// intermediates reduced.
    pub fn eval_phase(&self, family: &TraceFamily, a: u64, n: u64) -> Result<u64> {
        let p = self.p;
        let a = a % p;
        let n = n % p;
        match family {
            TraceFamily::Birch => {
                let n2 = mul_mod(n, n, p);
                let n3 = mul_mod(n2, n, p);
                Ok((n3 + mul_mod(a, n, p)) % p)
            }
            TraceFamily::Kloosterman => {
                if n == 0 {
                    return Err(Error::Domain(
                        "Kloosterman phase is undefined at n = 0".into(),
                    ));
                }
                let inv = self.modular_inverse(n)?;
                Ok((mul_mod(a, n, p) + inv) % p)
            }
            TraceFamily::OddPolynomial { coeffs } => {
                let mut acc = 0u64;
                for &c in coeffs.iter().rev() {
                    let c = c.rem_euclid(p as i64) as u64;
                    acc = (mul_mod(acc, n, p) + c) % p;
                }
                Ok((acc + mul_mod(a, n, p)) % p)
            }
        }
    }

    /// Weight sequence w[n] = e_p(phase(0, n)) whose positive-sign DFT gives
    /// all complete sums at once; w[0] = 0 for Kloosterman.
    pub fn weight_vector(&self, family: &TraceFamily) -> Vec<Complex64> {
        let p = self.p;
        match family {
            TraceFamily::Kloosterman => {
                let inv = self.inverse_table();
                let mut w = vec![Complex64::new(0.0, 0.0); p as usize];
                for n in 1..p {
                    w[n as usize] = self.unity(inv[n as usize]);
                }
                w
            }
            _ => (0..p)
                .map(|n| {
                    let t = self
                        .eval_phase(family, 0, n)
                        .expect("non-Kloosterman phase is total");
                    self.unity(t)
                })
                .collect(),
        }
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    debug_assert!(a < p && b < p && p <= MAX_P);
    (a * b) % p
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. The base set {2, 3, 5, 7, 11, 13, 17, 19, 23,
/// 29, 31, 37} is exact for every u64, and the arithmetic below goes through
/// u128 so it stays valid beyond the crate's own MAX_P.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let pow = |mut b: u128, mut e: u64, m: u128| -> u128 {
        let mut acc = 1u128;
        b %= m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % m;
            }
            b = b * b % m;
            e >>= 1;
        }
        acc
    };
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a as u128, d, n as u128);
        if x == 1 || x == (n - 1) as u128 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n as u128;
            if x == (n - 1) as u128 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
