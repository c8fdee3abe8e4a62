//! Seeded random test functions for quasi-minimality checks.

use debound_core::{Grid, GridFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

/// `count` smooth bumps `a (1 - |x-c|²/w²)²₊` whose supports stay inside the
/// grid box, so each vanishes on the boundary.
pub fn random_bumps(grid: &Grid, count: usize, amplitude: f64, seed: u64) -> Result<Vec<GridFunction>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shortest = grid.bounds().iter().map(|b| b.hi - b.lo).fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let width = rng.random_range(0.1..0.3) * shortest;
        let center: Vec<f64> = grid
            .bounds()
            .iter()
            .map(|b| rng.random_range(b.lo + width..b.hi - width))
            .collect();
        let a = amplitude * rng.random_range(-1.0..1.0);
        let bump = GridFunction::from_fn(grid.clone(), |x| {
            let d2: f64 = x.iter().zip(&center).map(|(v, c)| (v - c) * (v - c)).sum();
            let t = 1.0 - d2 / (width * width);
            if t > 0.0 { a * t * t } else { 0.0 }
        })?;
        out.push(bump);
    }
    Ok(out)
}
