//! Prime-field arithmetic for the symbol alphabets.
//!
//! Every stored symbol, query coordinate, and answer lives in GF(q) for a
//! prime q < 256. The schemes only ever add and subtract symbols (plus the
//! inner products used by the masking scheme), so a plain residue
//! representation is all that is needed.

use crate::error::Error;

/// An element of GF(q), carrying its modulus so cross-field operations can
/// be rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u8,
    modulus: u8,
}

// arithmetic is fallible (mixed moduli), so the operator traits do not fit
#[allow(clippy::should_implement_trait)]
impl FieldElement {
    /// Builds an element, rejecting composite moduli and out-of-range values.
    pub fn new(value: u8, modulus: u8) -> Result<Self, Error> {
        if !is_prime(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        if value >= modulus {
            return Err(Error::ValueOutOfField { value, modulus });
        }
        Ok(Self { value, modulus })
    }

    pub fn zero(modulus: u8) -> Result<Self, Error> {
        Self::new(0, modulus)
    }

    /// Internal constructor for values already known to be reduced.
    pub(crate) fn from_parts(value: u8, modulus: u8) -> Self {
        debug_assert!(is_prime(modulus) && value < modulus);
        Self { value, modulus }
    }

    pub fn value(self) -> u8 {
        self.value
    }

    pub fn modulus(self) -> u8 {
        self.modulus
    }

    pub fn add(self, rhs: Self) -> Result<Self, Error> {
        self.check_modulus(rhs)?;
        Ok(Self::from_parts(
            add_mod(self.value, rhs.value, self.modulus),
            self.modulus,
        ))
    }

    pub fn sub(self, rhs: Self) -> Result<Self, Error> {
        self.check_modulus(rhs)?;
        Ok(Self::from_parts(
            sub_mod(self.value, rhs.value, self.modulus),
            self.modulus,
        ))
    }

    pub fn mul(self, rhs: Self) -> Result<Self, Error> {
        self.check_modulus(rhs)?;
        Ok(Self::from_parts(
            mul_mod(self.value, rhs.value, self.modulus),
            self.modulus,
        ))
    }

    pub fn neg(self) -> Self {
        Self::from_parts(sub_mod(0, self.value, self.modulus), self.modulus)
    }

    /// Multiplicative inverse; zero is rejected.
    pub fn inverse(self) -> Result<Self, Error> {
        if self.value == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(Self::from_parts(
            inv_mod(self.value, self.modulus),
            self.modulus,
        ))
    }

    fn check_modulus(self, rhs: Self) -> Result<(), Error> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: rhs.modulus,
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

pub(crate) fn is_prime(q: u8) -> bool {
    if q < 2 {
        return false;
    }
    (2..q).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

pub(crate) fn add_mod(a: u8, b: u8, q: u8) -> u8 {
    ((a as u16 + b as u16) % q as u16) as u8
}

pub(crate) fn sub_mod(a: u8, b: u8, q: u8) -> u8 {
    ((a as u16 + q as u16 - b as u16) % q as u16) as u8
}

pub(crate) fn mul_mod(a: u8, b: u8, q: u8) -> u8 {
    ((a as u16 * b as u16) % q as u16) as u8
}

/// Inverse by Fermat: a^(q-2) mod q for prime q.
fn inv_mod(a: u8, q: u8) -> u8 {
    let mut result: u16 = 1;
    let mut base = a as u16;
    let mut exp = q as u32 - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % q as u16;
        }
        base = base * base % q as u16;
        exp >>= 1;
    }
    result as u8
}
