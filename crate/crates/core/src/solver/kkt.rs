//! Optimality check of a candidate input: the information density must equal
//! the capacity (plus the power penalty) on the support and stay below it
//! everywhere else in the amplitude range.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    marginal_info_density_tol, nu_n, shell_info_density_tol, ChannelConfig, Witness,
    DEFAULT_QUAD_TOL,
};
use crate::error::{domain, Result};

/// Raw KKT residuals of a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// max over support points of |i(x) − C − λ(x² − P)|
    pub equality: f64,
    /// max(0, i(x) − C − λ(x² − P)) over the verification grid
    pub inequality: f64,
    /// abscissa of the largest excess
    pub worst_x: f64,
}

impl KktResiduals {
    pub fn passes(&self, tol: f64) -> bool {
        self.equality <= tol && self.inequality <= tol
    }
}

/// Default verification grid step for amplitude `a`.
pub fn default_grid_step(a: f64) -> f64 {
    1e-3 * a
}

/// Checks the optimality conditions of `witness` for `config`.
///
/// For a scalar input, i(x) is compared with C + λ(x² − P) on [0, A] when
/// the input is symmetric (i is then even) and on [−A, A] otherwise. For
/// shells, iₙ(r) − νₙ is compared with C on [0, A]. P defaults to 0.
pub fn verify_kkt(
    witness: &Witness,
    config: &ChannelConfig,
    capacity: f64,
    lambda: f64,
    grid_step: f64,
) -> Result<KktResiduals> {
    let p = config.power.unwrap_or(0.0);
    kkt_residuals(witness, config.amplitude, capacity, lambda, p, grid_step, DEFAULT_QUAD_TOL)
}

pub(crate) fn kkt_residuals(
    witness: &Witness,
    amplitude: f64,
    capacity: f64,
    lambda: f64,
    power: f64,
    grid_step: f64,
    quad_tol: f64,
) -> Result<KktResiduals> {
    if !(grid_step > 0.0) {
        return domain(format!("grid step must be positive, got {grid_step}"));
    }
    let excess = |x: f64| -> Result<f64> {
        let i = match witness {
            Witness::Scalar(d) => marginal_info_density_tol(d, x, quad_tol)?,
            Witness::Shell { n, input } => {
                shell_info_density_tol(*n, input, x.abs(), quad_tol)? - nu_n(*n)
            }
        };
        Ok(i - capacity - lambda * (x * x - power))
    };

    let support: Vec<f64> = match witness {
        Witness::Scalar(d) => d.points().to_vec(),
        Witness::Shell { input, .. } => input.radii().to_vec(),
    };
    let eq = support
        .par_iter()
        .map(|&x| excess(x).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let lo = match witness {
        Witness::Scalar(d) if !d.is_symmetric() => -amplitude,
        _ => 0.0,
    };
    let steps = ((amplitude - lo) / grid_step).ceil().max(2.0) as usize;
    let h = (amplitude - lo) / steps as f64;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * h).collect();
    let vals = grid
        .par_iter()
        .map(|&x| excess(x))
        .collect::<Result<Vec<_>>>()?;

    let (mut worst, mut worst_x) = (f64::NEG_INFINITY, lo);
    for (&x, &v) in grid.iter().zip(&vals) {
        if v > worst {
            worst = v;
            worst_x = x;
        }
    }
    // local maxima between grid nodes
    let peaks: Vec<usize> = (1..steps)
        .filter(|&i| vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1])
        .collect();
    let refined = peaks
        .par_iter()
        .map(|&i| golden_max(&excess, grid[i - 1], grid[i + 1], 1e-10))
        .collect::<Result<Vec<_>>>()?;
    for (x, v) in refined {
        if v > worst {
            worst = v;
            worst_x = x;
        }
    }
    Ok(KktResiduals {
        equality: eq,
        inequality: worst.max(0.0),
        worst_x,
    })
}

fn golden_max<F: Fn(f64) -> Result<f64>>(
    f: &F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{mutual_information, DiscreteInput};

    #[test]
    fn binary_is_optimal_at_unit_amplitude() {
        let d = DiscreteInput::binary(1.0).unwrap();
        let c = mutual_information(&d).unwrap();
        let cfg = ChannelConfig::scalar(1.0).unwrap();
        let r = verify_kkt(&Witness::Scalar(d), &cfg, c, 0.0, 1e-3).unwrap();
        assert!(r.passes(1e-6), "{r:?}");
    }

    #[test]
    fn binary_fails_beyond_threshold() {
        let d = DiscreteInput::binary(3.0).unwrap();
        let c = mutual_information(&d).unwrap();
        let cfg = ChannelConfig::scalar(3.0).unwrap();
        let r = verify_kkt(&Witness::Scalar(d), &cfg, c, 0.0, 3e-3).unwrap();
        assert!(r.inequality > 1e-3, "{r:?}");
        assert!(r.worst_x.abs() < 1.0);
    }

    #[test]
    fn point_mass_at_origin() {
        let d = DiscreteInput::point_mass(0.0);
        let cfg = ChannelConfig::scalar(1.0).unwrap();
        let r = verify_kkt(&Witness::Scalar(d), &cfg, 0.0, 0.0, 1e-2).unwrap();
        assert!(r.equality < 1e-12);
        assert!(r.inequality > 0.0);
    }
}
