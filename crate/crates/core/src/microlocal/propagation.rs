//! The propagation law for the Λ-resonant part: the inner two-microlocal
//! pairing of `U_V(t)u₀` against `b` (modes in `Λ`) compared with
//! `Tr(M_b U_{⟨V⟩_Λ}(t) σ U_{⟨V⟩_Λ}(t)*)` built from `u₀` alone.

use rayon::prelude::*;

use crate::dynamics::{averaged_propagator, Potential, PropagatorPlan};
use crate::error::{check_dim, Error, Result};
use crate::lattice::PrimitiveModule;
use crate::mode::{Mode, ModeBox};
use crate::quantization::{twomicro_pair, Cutoff, FourierState, Side, Symbol};

use super::sigma::{nu_lambda_series, sigma_proxy};
use super::table::LimitTable;

#[derive(Clone, Debug)]
pub struct PropagationConfig {
    pub module: PrimitiveModule,
    pub potential: Potential,
    /// Test functions `b` (x-only, modes in `Λ`).
    pub observables: Vec<Symbol>,
    pub h_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub times: Vec<f64>,
    /// Per-axis padding of the propagation window around the support of `u₀`.
    pub pad: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct ObservableTables {
    pub lhs: LimitTable,
    pub rhs: LimitTable,
    pub deviation: LimitTable,
}

#[derive(Clone, Debug)]
pub struct PropagationReport {
    pub tables: Vec<ObservableTables>,
    /// Largest mass on the window's outer shell over `t`, per `h`.
    pub boundary_mass: Vec<f64>,
    /// `max |rhs|` over every observable and cell.
    pub signal_scale: f64,
}

struct Cell {
    lhs: Vec<Vec<Vec<f64>>>,
    rhs: Vec<Vec<Vec<f64>>>,
    boundary: f64,
}

fn full_window(u0: &FourierState, pad: &[i64]) -> ModeBox {
    let b = ModeBox::bounding(u0.dim(), u0.modes(), 0);
    ModeBox::new(
        Mode::new((0..u0.dim()).map(|a| b.lo()[a] - pad[a])),
        Mode::new((0..u0.dim()).map(|a| b.hi()[a] + pad[a])),
    )
}

fn run_h(
    cfg: &PropagationConfig,
    observables: &[Symbol],
    h: f64,
    u0: &FourierState,
) -> Result<Cell> {
    let window = full_window(u0, &cfg.pad);
    let plan = PropagatorPlan::auto(cfg.potential.clone(), window.clone())?;
    let states = plan.trajectory(u0, &cfg.times)?;
    let boundary = plan.boundary_mass(u0, &cfg.times)?;
    let lambda_window = ModeBox::bounding(
        cfg.module.rank(),
        window.iter().map(|k| cfg.module.pair_with_basis(&k)).collect::<Vec<_>>().iter(),
        0,
    );
    let avg = averaged_propagator(&cfg.module, &cfg.potential, lambda_window)?;
    let mut lhs = vec![vec![vec![0.0; cfg.times.len()]; cfg.r_grid.len()]; observables.len()];
    let mut rhs = lhs.clone();
    for (ir, &r) in cfg.r_grid.iter().enumerate() {
        let cutoff = Cutoff::new(r);
        let proxy = sigma_proxy(u0, &cfg.module, h, cutoff)?;
        for (ib, b) in observables.iter().enumerate() {
            rhs[ib][ir] = nu_lambda_series(b, &proxy, &avg, &cfg.times)?;
            for (it, u) in states.iter().enumerate() {
                lhs[ib][ir][it] = twomicro_pair(u, b, h, cutoff, Side::Inner)?.re;
            }
        }
    }
    Ok(Cell { lhs, rhs, boundary })
}

/// Runs the comparison over the `h` grid; `family(h)` supplies `u₀`.
pub fn propagation_law_test(
    family: &(dyn Fn(f64) -> Result<FourierState> + Sync),
    cfg: &PropagationConfig,
) -> Result<PropagationReport> {
    let d = cfg.module.dim();
    check_dim(d, cfg.potential.dim())?;
    if cfg.pad.len() != d {
        return Err(Error::validation("pad", format!("expected {d} entries")));
    }
    if cfg.module.rank() == 0 {
        return Err(Error::validation("module", "the propagation law needs a module of rank ≥ 1"));
    }
    let observables: Vec<Symbol> = cfg
        .observables
        .iter()
        .map(|b| b.clone().with_module(cfg.module.clone()))
        .collect::<Result<_>>()?;
    // Validates the grids before any heavy work.
    LimitTable::new("check", cfg.h_grid.clone(), cfg.r_grid.clone(), cfg.times.clone())?;

    let cells: Vec<Cell> = cfg
        .h_grid
        .par_iter()
        .map(|&h| {
            let u0 = family(h)?;
            check_dim(d, u0.dim())?;
            let r_max = *cfg.r_grid.last().expect("validated grid");
            let inner = sigma_proxy(&u0, &cfg.module, h, Cutoff::new(r_max))?.trace();
            if inner < 1e-3 * u0.norm_sq() {
                return Err(Error::ModeMismatch(format!(
                    "family at h = {h} carries no mass near Λ^⊥ (inner mass {inner:e})"
                )));
            }
            run_h(cfg, &observables, h, &u0)
        })
        .collect::<Result<_>>()?;

    let mut tables = Vec::new();
    let mut signal: f64 = 0.0;
    for ib in 0..observables.len() {
        let make = |name: &str, f: &dyn Fn(&Cell, usize, usize) -> f64| {
            LimitTable::from_fn(
                format!("{name}[{ib}]"),
                cfg.h_grid.clone(),
                cfg.r_grid.clone(),
                cfg.times.clone(),
                |ih, ir, it| f(&cells[ih], ir, it),
            )
        };
        let lhs = make("lhs", &|c, ir, it| c.lhs[ib][ir][it])?;
        let rhs = make("rhs", &|c, ir, it| c.rhs[ib][ir][it])?;
        let deviation = make("deviation", &|c, ir, it| (c.lhs[ib][ir][it] - c.rhs[ib][ir][it]).abs())?;
        signal = signal.max(rhs.max_abs());
        tables.push(ObservableTables { lhs, rhs, deviation });
    }
    Ok(PropagationReport {
        tables,
        boundary_mass: cells.iter().map(|c| c.boundary).collect(),
        signal_scale: signal,
    })
}
