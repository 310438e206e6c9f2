//! Dense operator matrices tagged with the spaces they map between.

use std::fmt;

use num_complex::Complex64;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, CMatrix, CVector};

/// Space an [`OperatorMatrix`] acts on, identified by its coordinates.
#[derive(Clone, Debug)]
pub enum SpaceTag {
    /// `K_θ` in its Takenaka–Malmquist basis.
    Model(BlaschkeProduct),
    /// Coordinates without further structure.
    Plain(usize),
}

impl SpaceTag {
    pub fn dim(&self) -> usize {
        match self {
            SpaceTag::Model(b) => b.degree(),
            SpaceTag::Plain(n) => *n,
        }
    }

    pub fn same_space(&self, other: &SpaceTag) -> bool {
        match (self, other) {
            (SpaceTag::Model(a), SpaceTag::Model(b)) => a.same_zeros(b),
            (SpaceTag::Plain(a), SpaceTag::Plain(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceTag::Model(b) => write!(f, "K[deg {}]", b.degree()),
            SpaceTag::Plain(n) => write!(f, "C^{n}"),
        }
    }
}

/// A linear map, or an antilinear one stored as "conjugate the input
/// coordinates, then multiply": `x ↦ M · conj(x)`.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub entries: CMatrix,
    pub domain: SpaceTag,
    pub codomain: SpaceTag,
    pub antilinear: bool,
}

impl OperatorMatrix {
    pub fn new(entries: CMatrix, domain: SpaceTag, codomain: SpaceTag) -> Self {
        debug_assert_eq!(entries.ncols(), domain.dim());
        debug_assert_eq!(entries.nrows(), codomain.dim());
        Self {
            entries,
            domain,
            codomain,
            antilinear: false,
        }
    }

    pub fn antilinear(entries: CMatrix, domain: SpaceTag, codomain: SpaceTag) -> Self {
        Self {
            antilinear: true,
            ..Self::new(entries, domain, codomain)
        }
    }

    pub fn zeros(domain: SpaceTag, codomain: SpaceTag) -> Self {
        let m = CMatrix::zeros(codomain.dim(), domain.dim());
        Self::new(m, domain, codomain)
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        if self.antilinear {
            &self.entries * x.conjugate()
        } else {
            &self.entries * x
        }
    }

    /// `self ∘ inner`, honoring antilinearity of either factor.
    pub fn compose(&self, inner: &OperatorMatrix) -> Result<OperatorMatrix> {
        if !self.domain.same_space(&inner.codomain) || self.cols() != inner.rows() {
            return Err(Error::TagMismatch(format!(
                "cannot compose {} -> {} after {} -> {}",
                self.domain, self.codomain, inner.domain, inner.codomain
            )));
        }
        let entries = if self.antilinear {
            &self.entries * inner.entries.conjugate()
        } else {
            &self.entries * &inner.entries
        };
        Ok(OperatorMatrix {
            entries,
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            antilinear: self.antilinear ^ inner.antilinear,
        })
    }

    /// Conjugate transpose with domain and codomain swapped.
    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            entries: if self.antilinear {
                self.entries.transpose()
            } else {
                self.entries.adjoint()
            },
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            antilinear: self.antilinear,
        }
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.entries)
    }

    pub fn scale(&self, c: Complex64) -> OperatorMatrix {
        OperatorMatrix {
            entries: self.entries.map(|v| v * c),
            ..self.clone()
        }
    }
}

/// Largest singular value.
pub fn operator_norm(a: &OperatorMatrix) -> f64 {
    a.norm()
}

pub fn adjoint(a: &OperatorMatrix) -> OperatorMatrix {
    a.adjoint()
}
