//! Symbolic block-structure descriptions of the symmetric and Hermitian
//! canonical forms, their validation rules, and assembly to dense matrices.

use serde::{Deserialize, Serialize};

use crate::blocks::{build_herm_block, build_sym_block, HermKind};
use crate::error::{Error, Result};
use crate::mat::{c, C64, Mat};

mod cplx_serde {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &C64, s: S) -> Result<S::Ok, S::Error> {
        [v.re, v.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// One run of equally sized Jordan blocks: `mult` blocks of order `size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub size: usize,
    pub mult: usize,
}

/// A part carrying a sign characteristic entry per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedPart {
    pub size: usize,
    pub mult: usize,
    pub signs: Vec<i8>,
}

/// Block structure of the symmetric normal form: one class per eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymClass {
    #[serde(with = "cplx_serde")]
    pub eigenvalue: C64,
    pub parts: Vec<Part>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymSpec {
    pub classes: Vec<SymClass>,
}

/// One eigenvalue class of the Hermitian normal form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HermClass {
    /// `H` blocks at eigenvalue zero; odd sizes have forced sign +1.
    Zero { parts: Vec<SignedPart> },
    /// `H` blocks at a positive eigenvalue.
    Pos { lambda: f64, parts: Vec<SignedPart> },
    /// Paired `K` blocks for the negative eigenvalue `-mu^2` of `A conj(A)`.
    NegPair { mu: f64, parts: Vec<Part> },
    /// Paired `L` blocks for a non-real-squared `xi`.
    Complex {
        #[serde(with = "cplx_serde")]
        xi: C64,
        parts: Vec<Part>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermSpec {
    pub classes: Vec<HermClass>,
}

/// `xi^2` normalized to the upper half plane: the invariant naming a complex
/// eigenvalue class.
pub fn canonical_square(xi: C64) -> C64 {
    let s = xi * xi;
    if s.im < 0.0 {
        s.conj()
    } else {
        s
    }
}

fn check_parts_decreasing(sizes: impl Iterator<Item = usize> + Clone) -> Result<()> {
    let v: Vec<usize> = sizes.collect();
    if v.is_empty() {
        return Err(Error::InvalidInput("class has no parts".into()));
    }
    if v.iter().any(|&s| s == 0) {
        return Err(Error::InvalidInput("part size must be positive".into()));
    }
    for w in v.windows(2) {
        if w[0] <= w[1] {
            return Err(Error::InvalidInput(format!(
                "part sizes must strictly decrease: {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

impl SymSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::InvalidInput("spec has no classes".into()));
        }
        for cl in &self.classes {
            if !cl.eigenvalue.re.is_finite() || !cl.eigenvalue.im.is_finite() {
                return Err(Error::InvalidInput("non-finite eigenvalue".into()));
            }
            check_parts_decreasing(cl.parts.iter().map(|p| p.size))?;
            if cl.parts.iter().any(|p| p.mult == 0) {
                return Err(Error::InvalidInput("multiplicity must be positive".into()));
            }
        }
        for i in 0..self.classes.len() {
            for j in i + 1..self.classes.len() {
                if self.classes[i].eigenvalue == self.classes[j].eigenvalue {
                    return Err(Error::InvalidInput("eigenvalues must be pairwise distinct".into()));
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.classes
            .iter()
            .map(|cl| cl.parts.iter().map(|p| p.size * p.mult).sum::<usize>())
            .sum()
    }

    /// Block-diagonal assembly in spec order; symmetric exactly.
    pub fn assemble(&self) -> Result<Mat> {
        self.validate()?;
        let mut blocks = Vec::new();
        for cl in &self.classes {
            for p in &cl.parts {
                for _ in 0..p.mult {
                    blocks.push(build_sym_block(p.size, cl.eigenvalue));
                }
            }
        }
        let refs: Vec<&Mat> = blocks.iter().collect();
        Ok(Mat::direct_sum(&refs))
    }
}

fn check_signed(parts: &[SignedPart], zero_class: bool) -> Result<()> {
    check_parts_decreasing(parts.iter().map(|p| p.size))?;
    for p in parts {
        if p.mult == 0 {
            return Err(Error::InvalidInput("multiplicity must be positive".into()));
        }
        if p.signs.len() != p.mult {
            return Err(Error::InvalidInput(format!(
                "part of size {} needs {} signs, got {}",
                p.size,
                p.mult,
                p.signs.len()
            )));
        }
        if p.signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput("signs must be +1 or -1".into()));
        }
        if zero_class && p.size % 2 == 1 && p.signs.iter().any(|&s| s != 1) {
            return Err(Error::InvalidInput(
                "odd-size zero-class blocks have forced sign +1".into(),
            ));
        }
    }
    Ok(())
}

impl HermClass {
    pub fn order(&self) -> usize {
        match self {
            HermClass::Zero { parts } | HermClass::Pos { parts, .. } => {
                parts.iter().map(|p| p.size * p.mult).sum()
            }
            HermClass::NegPair { parts, .. } | HermClass::Complex { parts, .. } => {
                parts.iter().map(|p| 2 * p.size * p.mult).sum()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HermClass::Zero { parts } => check_signed(parts, true),
            HermClass::Pos { lambda, parts } => {
                if !(*lambda > 0.0) || !lambda.is_finite() {
                    return Err(Error::InvalidInput("pos class needs lambda > 0".into()));
                }
                check_signed(parts, false)
            }
            HermClass::NegPair { mu, parts } => {
                if !(*mu > 0.0) || !mu.is_finite() {
                    return Err(Error::InvalidInput("neg-pair class needs mu > 0".into()));
                }
                check_parts_decreasing(parts.iter().map(|p| p.size))?;
                if parts.iter().any(|p| p.mult == 0) {
                    return Err(Error::InvalidInput("multiplicity must be positive".into()));
                }
                Ok(())
            }
            HermClass::Complex { xi, parts } => {
                if !xi.re.is_finite() || !xi.im.is_finite() {
                    return Err(Error::InvalidInput("non-finite xi".into()));
                }
                let sq = xi * xi;
                if sq.im == 0.0 {
                    return Err(Error::InvalidInput("complex class needs xi^2 not real".into()));
                }
                if xi.im <= 0.0 {
                    return Err(Error::InvalidInput("complex class normalizes Im(xi) > 0".into()));
                }
                check_parts_decreasing(parts.iter().map(|p| p.size))?;
                if parts.iter().any(|p| p.mult == 0) {
                    return Err(Error::InvalidInput("multiplicity must be positive".into()));
                }
                Ok(())
            }
        }
    }

    /// Key identifying the class for distinctness checks. Complex classes
    /// are keyed by the eigenvalue pair of `A conj(A)`: `xi^2` up to
    /// conjugation (the four roots of that pair name one class).
    fn key(&self) -> (u8, u64, u64) {
        match self {
            HermClass::Zero { .. } => (0, 0, 0),
            HermClass::Pos { lambda, .. } => (1, lambda.to_bits(), 0),
            HermClass::NegPair { mu, .. } => (2, mu.to_bits(), 0),
            HermClass::Complex { xi, .. } => {
                let s = canonical_square(*xi);
                (3, s.re.to_bits(), s.im.to_bits())
            }
        }
    }

    /// Assembles this class slice alone.
    pub fn assemble(&self) -> Result<Mat> {
        self.validate()?;
        let mut blocks = Vec::new();
        match self {
            HermClass::Zero { parts } => {
                for p in parts {
                    for &s in &p.signs {
                        let b = build_herm_block(HermKind::H, p.size, c(0.0, 0.0))?;
                        blocks.push(b.scale(c(s as f64, 0.0)));
                    }
                }
            }
            HermClass::Pos { lambda, parts } => {
                for p in parts {
                    for &s in &p.signs {
                        let b = build_herm_block(HermKind::H, p.size, c(*lambda, 0.0))?;
                        blocks.push(b.scale(c(s as f64, 0.0)));
                    }
                }
            }
            HermClass::NegPair { mu, parts } => {
                for p in parts {
                    for _ in 0..p.mult {
                        blocks.push(build_herm_block(HermKind::K, p.size, c(*mu, 0.0))?);
                    }
                }
            }
            HermClass::Complex { xi, parts } => {
                for p in parts {
                    for _ in 0..p.mult {
                        blocks.push(build_herm_block(HermKind::L, p.size, *xi)?);
                    }
                }
            }
        }
        let refs: Vec<&Mat> = blocks.iter().collect();
        Ok(Mat::direct_sum(&refs))
    }
}

impl HermSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::InvalidInput("spec has no classes".into()));
        }
        for cl in &self.classes {
            cl.validate()?;
        }
        for i in 0..self.classes.len() {
            for j in i + 1..self.classes.len() {
                if self.classes[i].key() == self.classes[j].key() {
                    return Err(Error::InvalidInput("class keys must be pairwise distinct".into()));
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.classes.iter().map(|cl| cl.order()).sum()
    }

    /// Block-diagonal assembly in spec order; Hermitian exactly.
    pub fn assemble(&self) -> Result<Mat> {
        self.validate()?;
        let mats: Vec<Mat> = self
            .classes
            .iter()
            .map(|cl| cl.assemble())
            .collect::<Result<_>>()?;
        let refs: Vec<&Mat> = mats.iter().collect();
        Ok(Mat::direct_sum(&refs))
    }
}
