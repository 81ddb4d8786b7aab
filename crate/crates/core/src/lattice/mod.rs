//! Primitive submodules of `Z^d` and resonance classification of rational
//! frequencies.
//!
//! A submodule `Λ ⊂ Z^d` is primitive when `⟨Λ⟩ ∩ Z^d = Λ`. For a frequency
//! `ξ` the stabilizer `Λ_ξ = {k : k·ξ = 0}` is always primitive, and the sets
//! `R_Λ = {ξ : Λ_ξ = Λ}` partition frequency space; [`classify`] returns the
//! unique `Λ` with `ξ ∈ R_Λ`.

mod hnf;
mod rational;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::mode::Mode;

pub use hnf::{determinant, hermite_rows, integer_kernel, inverse, to_big as to_big_rows, IntMatrix};
pub use rational::{format_rational, parse_rational, RationalVector};

/// A primitive submodule of `Z^d`, stored by its canonical basis.
///
/// The basis is the row Hermite normal form of the generators (equivalently
/// the column HNF of the `d × r` basis matrix): pivots positive, entries above
/// each pivot reduced into `[0, pivot)`. Equal modules therefore compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimitiveModule {
    dim: usize,
    basis: Vec<Mode>,
}

impl PrimitiveModule {
    /// The zero module `{0}` of rank 0.
    pub fn zero(dim: usize) -> Self {
        PrimitiveModule { dim, basis: Vec::new() }
    }

    /// The whole lattice `Z^d`.
    pub fn full(dim: usize) -> Self {
        PrimitiveModule {
            dim,
            basis: (0..dim).map(|i| Mode::unit(dim, i)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Canonical basis vectors (the columns of the basis matrix `B`).
    pub fn basis(&self) -> &[Mode] {
        &self.basis
    }

    /// `Bᵀk`: coordinates of `k` against the basis, as an integer `r`-vector.
    pub fn pair_with_basis(&self, k: &Mode) -> Mode {
        Mode::new(self.basis.iter().map(|b| b.dot(k)))
    }

    fn from_hnf(dim: usize, rows: IntMatrix) -> Self {
        let basis = rows
            .into_iter()
            .map(|r| {
                Mode::new(r.into_iter().map(|c| {
                    c.to_i64()
                        .expect("canonical basis entry does not fit in i64")
                }))
            })
            .collect();
        PrimitiveModule { dim, basis }
    }

    fn basis_big(&self) -> IntMatrix {
        self.basis
            .iter()
            .map(|b| b.iter().map(|&c| BigInt::from(c)).collect())
            .collect()
    }
}

impl fmt::Debug for PrimitiveModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.basis.is_empty() {
            write!(f, "{{0}} ⊂ Z^{}", self.dim)
        } else {
            let parts: Vec<String> = self.basis.iter().map(|b| b.to_string()).collect();
            write!(f, "Z⟨{}⟩ ⊂ Z^{}", parts.join(", "), self.dim)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ModuleRepr {
    dim: usize,
    basis: Vec<Vec<i64>>,
}

impl Serialize for PrimitiveModule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModuleRepr {
            dim: self.dim,
            basis: self.basis.iter().map(Mode::to_vec).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PrimitiveModule {
    /// Accepts any basis; the result is the saturation of its span.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ModuleRepr::deserialize(d)?;
        let gens: Vec<Mode> = repr.basis.into_iter().map(Mode::from).collect();
        saturate(repr.dim, &gens).map_err(serde::de::Error::custom)
    }
}

/// The primitive module with the same rational span as `generators`.
pub fn saturate(dim: usize, generators: &[Mode]) -> Result<PrimitiveModule> {
    for g in generators {
        check_dim(dim, g.dim())?;
    }
    let gens: Vec<Vec<i64>> = generators.iter().map(Mode::to_vec).collect();
    // ⟨G⟩ ∩ Z^d is the integer kernel of the integer kernel of G.
    let orth = integer_kernel(&hnf::to_big(&gens), dim);
    let sat = integer_kernel(&orth, dim);
    Ok(PrimitiveModule::from_hnf(dim, sat))
}

/// `Λ_ξ = {k ∈ Z^d : k·ξ = 0}`.
pub fn stabilizer(xi: &RationalVector) -> PrimitiveModule {
    let row = vec![xi.cleared()];
    PrimitiveModule::from_hnf(xi.dim(), integer_kernel(&row, xi.dim()))
}

/// The order `j = d − rk Λ_ξ`, so that `ξ ∈ Ω_j`.
pub fn resonance_order(xi: &RationalVector) -> usize {
    xi.dim() - stabilizer(xi).rank()
}

/// The unique primitive `Λ` with `ξ ∈ R_Λ = Λ^⊥ ∩ Ω_{d − rk Λ}`.
pub fn classify(xi: &RationalVector) -> PrimitiveModule {
    stabilizer(xi)
}

/// Membership predicate for `R_Λ`.
pub fn in_resonant_set(xi: &RationalVector, module: &PrimitiveModule) -> bool {
    xi.dim() == module.dim()
        && module.basis().iter().all(|b| xi.dot_integer(b.as_slice()).is_zero())
        && resonance_order(xi) == module.dim() - module.rank()
}

/// Integer membership `k ∈ Λ`, solved against the echelon basis.
pub fn mode_in(k: &Mode, module: &PrimitiveModule) -> Result<bool> {
    check_dim(module.dim(), k.dim())?;
    let mut rest: Vec<i128> = k.iter().map(|&c| c as i128).collect();
    for b in module.basis() {
        let Some(p) = b.iter().position(|&c| c != 0) else {
            continue;
        };
        let pivot = b[p] as i128;
        if rest[p] % pivot != 0 {
            return Ok(false);
        }
        let q = rest[p] / pivot;
        for (r, &c) in rest.iter_mut().zip(b.iter()) {
            *r -= q * c as i128;
        }
    }
    Ok(rest.iter().all(|&c| c == 0))
}

/// Exact geometry attached to a primitive module: orthogonal projector,
/// complement lattice and covering degree.
#[derive(Clone, Debug)]
pub struct ModuleGeometry {
    module: PrimitiveModule,
    complement: PrimitiveModule,
    projector: Vec<Vec<BigRational>>,
    gram_inverse: Vec<Vec<BigRational>>,
    covering_degree: u64,
    gram_inverse_f64: Vec<Vec<f64>>,
    projector_f64: Vec<Vec<f64>>,
}

/// Computes `P_Λ = B(BᵀB)⁻¹Bᵀ`, the complement `Z^d ∩ Λ^⊥` and
/// `p_Λ = |det[B | C]|`.
pub fn geometry(module: &PrimitiveModule) -> ModuleGeometry {
    let d = module.dim();
    let r = module.rank();
    let q = |c: i64| BigRational::from_integer(c.into());
    let basis = module.basis();

    let gram: Vec<Vec<BigRational>> = (0..r)
        .map(|i| (0..r).map(|j| q(basis[i].dot(&basis[j]))).collect())
        .collect();
    let gram_inverse = inverse(&gram).expect("canonical basis is linearly independent");

    // P[a][b] = Σ_ij B[a][i] G⁻¹[i][j] B[b][j]
    let mut projector = vec![vec![BigRational::zero(); d]; d];
    for a in 0..d {
        for b in 0..d {
            let mut acc = BigRational::zero();
            for i in 0..r {
                if basis[i][a] == 0 {
                    continue;
                }
                for j in 0..r {
                    acc += q(basis[i][a]) * &gram_inverse[i][j] * q(basis[j][b]);
                }
            }
            projector[a][b] = acc;
        }
    }

    let complement = PrimitiveModule::from_hnf(d, integer_kernel(&module.basis_big(), d));

    let square: Vec<Vec<BigRational>> = (0..d)
        .map(|row| {
            basis
                .iter()
                .chain(complement.basis())
                .map(|col| q(col[row]))
                .collect()
        })
        .collect();
    let det = determinant(square).abs();
    let covering_degree = det
        .to_integer()
        .to_u64()
        .expect("covering degree fits in u64");

    let to_f = |m: &Vec<Vec<BigRational>>| -> Vec<Vec<f64>> {
        m.iter()
            .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    };
    ModuleGeometry {
        gram_inverse_f64: to_f(&gram_inverse),
        projector_f64: to_f(&projector),
        module: module.clone(),
        complement,
        projector,
        gram_inverse,
        covering_degree,
    }
}

impl ModuleGeometry {
    pub fn module(&self) -> &PrimitiveModule {
        &self.module
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    /// Exact `P_Λ`.
    pub fn projector(&self) -> &[Vec<BigRational>] {
        &self.projector
    }

    pub fn projector_f64(&self) -> &[Vec<f64>] {
        &self.projector_f64
    }

    /// Exact `(BᵀB)⁻¹`.
    pub fn gram_inverse(&self) -> &[Vec<BigRational>] {
        &self.gram_inverse
    }

    /// `Z^d ∩ Λ^⊥` in canonical form.
    pub fn complement(&self) -> &PrimitiveModule {
        &self.complement
    }

    /// `p_Λ = [Z^d : Λ ⊕ (Z^d ∩ Λ^⊥)]`.
    pub fn covering_degree(&self) -> u64 {
        self.covering_degree
    }

    /// Exact `P_Λ v` for a rational vector.
    pub fn project_rational(&self, v: &RationalVector) -> RationalVector {
        let d = self.dim();
        RationalVector::new(
            (0..d)
                .map(|a| {
                    (0..d).fold(BigRational::zero(), |acc, b| {
                        acc + &self.projector[a][b] * &v.entries()[b]
                    })
                })
                .collect(),
        )
    }

    /// `P_Λ k` in floating point.
    pub fn project_f64(&self, k: &[f64]) -> Vec<f64> {
        self.projector_f64
            .iter()
            .map(|row| row.iter().zip(k).map(|(p, x)| p * x).sum())
            .collect()
    }

    /// `|P_Λ k|²` computed from the basis pairing `n = Bᵀk` as `nᵀ(BᵀB)⁻¹n`.
    pub fn lambda_norm_sq(&self, n: &Mode) -> f64 {
        let g = &self.gram_inverse_f64;
        let mut acc = 0.0;
        for i in 0..n.dim() {
            for j in 0..n.dim() {
                acc += n[i] as f64 * g[i][j] * n[j] as f64;
            }
        }
        acc
    }

    /// Ambient vector `P_Λ k = B(BᵀB)⁻¹n` for the basis pairing `n = Bᵀk`.
    pub fn lambda_vector(&self, n: &Mode) -> Vec<f64> {
        let r = self.rank();
        let coords: Vec<f64> = (0..r)
            .map(|i| (0..r).map(|j| self.gram_inverse_f64[i][j] * n[j] as f64).sum())
            .collect();
        (0..self.dim())
            .map(|a| {
                self.module
                    .basis()
                    .iter()
                    .zip(&coords)
                    .map(|(b, c)| b[a] as f64 * c)
                    .sum()
            })
            .collect()
    }
}
