use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{check_dim, Error, Result};
use crate::lattice::{geometry, mode_in, ModuleGeometry, PrimitiveModule, RationalVector};
use crate::mode::{Mode, ModeBox};
use crate::quantization::FourierState;

/// One ambient mode split as `k = σ + m` with `σ = P_{Λ^⊥}k` and `m = P_Λk`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitMode {
    pub k: Mode,
    pub sigma: RationalVector,
    pub m: RationalVector,
}

/// The exact mode split of the covering `T_{Λ^⊥} × T_Λ → T^d` over a box.
#[derive(Clone, Debug)]
pub struct CoveringSplit {
    geometry: ModuleGeometry,
    window: ModeBox,
    entries: Vec<SplitMode>,
}

impl CoveringSplit {
    pub fn geometry(&self) -> &ModuleGeometry {
        &self.geometry
    }

    pub fn window(&self) -> &ModeBox {
        &self.window
    }

    pub fn entries(&self) -> &[SplitMode] {
        &self.entries
    }

    pub fn get(&self, k: &Mode) -> Option<&SplitMode> {
        self.window.index_of(k).map(|i| &self.entries[i])
    }
}

fn recompose(sigma: &RationalVector, m: &RationalVector) -> Option<Mode> {
    sigma
        .entries()
        .iter()
        .zip(m.entries())
        .map(|(a, b)| {
            let s: BigRational = a + b;
            if s.is_integer() {
                s.to_integer().to_i64()
            } else {
                None
            }
        })
        .collect::<Option<Vec<i64>>>()
        .map(Mode::from)
}

/// Splits every mode of the cube `‖k‖_∞ ≤ n`, verifying exactness and injectivity.
pub fn covering_split(geo: &ModuleGeometry, n: i64) -> Result<CoveringSplit> {
    let window = ModeBox::cube(geo.dim(), n);
    let mut entries = Vec::with_capacity(window.len());
    let mut seen = BTreeSet::new();
    for k in window.iter() {
        let kv = RationalVector::from_integers(k.as_slice());
        let m = geo.project_rational(&kv);
        let sigma = RationalVector::new(
            kv.entries().iter().zip(m.entries()).map(|(a, b)| a - b).collect(),
        );
        for b in geo.module().basis() {
            if !sigma.dot_integer(b.as_slice()).is_zero() {
                return Err(Error::Invariant(format!("σ of {k} is not orthogonal to Λ")));
            }
        }
        if recompose(&sigma, &m).as_ref() != Some(&k) {
            return Err(Error::Invariant(format!("split of {k} does not recompose")));
        }
        if !seen.insert((sigma.to_string(), m.to_string())) {
            return Err(Error::Invariant(format!("split of {k} is not injective")));
        }
        entries.push(SplitMode { k, sigma, m });
    }
    Ok(CoveringSplit { geometry: geo.clone(), window, entries })
}

/// Convenience wrapper computing the geometry first.
pub fn covering_split_for(module: &PrimitiveModule, n: i64) -> Result<CoveringSplit> {
    covering_split(&geometry(module), n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsometryReport {
    /// `|Σ_pairs |û(σ + m)|² − ‖u‖²|`.
    pub defect: f64,
    /// Every mode of `u` lying in `Λ` has `σ = 0`.
    pub lambda_modes_have_zero_sigma: bool,
    /// Number of support modes with `σ ≠ 0` and `m ≠ 0`.
    pub mixed_pairs: usize,
}

/// Checks that the split relabels `u`'s coefficients without loss.
pub fn lift_isometry_check(u: &FourierState, split: &CoveringSplit) -> Result<IsometryReport> {
    check_dim(split.geometry.dim(), u.dim())?;
    let module = split.geometry.module();
    let mut lifted = 0.0;
    let mut zero_sigma = true;
    let mut mixed = 0;
    for (k, _) in u.iter() {
        let entry = split.get(k).ok_or_else(|| Error::BoxEscape { mode: k.to_vec() })?;
        let back = recompose(&entry.sigma, &entry.m)
            .ok_or_else(|| Error::Invariant(format!("split of {k} does not recompose")))?;
        lifted += u.get(&back).norm_sqr();
        if mode_in(k, module)? && !entry.sigma.is_zero() {
            zero_sigma = false;
        }
        if !entry.sigma.is_zero() && !entry.m.is_zero() {
            mixed += 1;
        }
    }
    Ok(IsometryReport {
        defect: (lifted - u.norm_sq()).abs(),
        lambda_modes_have_zero_sigma: zero_sigma,
        mixed_pairs: mixed,
    })
}
