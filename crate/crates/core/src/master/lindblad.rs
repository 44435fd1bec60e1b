// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, commutator, von_neumann, CMatrix};
use crate::quantum::HermitianOperator;

/// Prefactor of the double commutator.
///
/// `Printed` uses `-gamma sum [A,[A,rho]]`; `HalfRate` uses `-(gamma/2) sum [A,[A,rho]]`,
/// which is the ensemble average of the Ito collapse equation with coupling `sqrt(gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Printed,
    HalfRate,
}

impl Convention {
    pub fn factor(self) -> f64 {
        match self {
            Convention::Printed => 1.0,
            Convention::HalfRate => 0.5,
        }
    }
}

pub fn lindblad_rhs(
    rho: &CMatrix,
    h: &HermitianOperator,
    ops: &[HermitianOperator],
    gamma: f64,
    convention: Convention,
    hbar: f64,
) -> Result<CMatrix> {
    let d = rho.nrows();
    if rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: rho.ncols(),
        });
    }
    for op in std::iter::once(h).chain(ops) {
        if op.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: op.dim(),
            });
        }
    }
    let mut out = von_neumann(h.matrix(), rho, hbar);
    let k = c(gamma * convention.factor());
    for a in ops {
        out -= commutator(a.matrix(), &commutator(a.matrix(), rho)) * k;
    }
    Ok(out)
}
