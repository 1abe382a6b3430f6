use super::grid::CfGrid;
use crate::datum::Law;
use crate::error::{KacError, Result};
use crate::numerics::gauss_legendre;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// How the inversion treats a characteristic function that has not decayed
/// at the grid edge.
#[derive(Debug, Clone)]
pub enum TailMode {
    /// Refuse when `|phi| > 1e-8` near the edge.
    Strict,
    /// Invert regardless and record the edge value.
    Accept,
    /// Split off `e^{-t} phi_0` (the never-collided part), invert the rest and
    /// carry the initial law along exactly.
    SubtractLeading(Law),
}

#[derive(Debug, Clone)]
pub struct InversionOptions {
    /// FFT length; raised to at least twice the grid size.
    pub pad: usize,
    pub mode: TailMode,
    /// Edge bound for the remainder in [`TailMode::SubtractLeading`].
    pub edge_tol: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            pad: 1 << 16,
            mode: TailMode::Strict,
            edge_tol: 1e-3,
        }
    }
}

impl InversionOptions {
    pub fn subtract_leading(law: Law) -> Self {
        Self {
            mode: TailMode::SubtractLeading(law),
            ..Default::default()
        }
    }
}

/// Density on the uniform grid `v_m = (m - P/2) dv`, optionally plus an
/// exactly known component `weight * law`.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub dv: f64,
    /// Smooth part at `v_nodes()`.
    pub values: Vec<f64>,
    pub singular: Option<(f64, Law)>,
    /// Total mass: trapezoid of the smooth part plus the singular weight.
    pub mass: f64,
    /// Largest `|phi|` over the outer 5% of the inverted transform.
    pub edge: f64,
    /// Most negative value of the smooth part.
    pub min_value: f64,
    pub t: f64,
}

impl DensityGrid {
    pub fn v_nodes(&self) -> Vec<f64> {
        let p = self.values.len() as isize;
        (0..p).map(|m| (m - p / 2) as f64 * self.dv).collect()
    }

    /// Half-width of the grid.
    pub fn extent(&self) -> f64 {
        (self.values.len() / 2) as f64 * self.dv
    }

    /// Cubic interpolation of the smooth part.
    pub fn smooth_at(&self, v: f64) -> f64 {
        let p = self.values.len();
        let u = v / self.dv + (p / 2) as f64;
        if u < 1.0 || u > (p - 3) as f64 {
            return 0.0;
        }
        let i = u.floor() as usize;
        let s = u - i as f64;
        let g = &self.values;
        let (gm, g0, g1, g2) = (g[i - 1], g[i], g[i + 1], g[i + 2]);
        let sp = s + 1.0;
        let sm = s - 1.0;
        let sm2 = s - 2.0;
        -s * sm * sm2 / 6.0 * gm + sp * sm * sm2 / 2.0 * g0 - sp * s * sm2 / 2.0 * g1
            + sp * s * sm / 6.0 * g2
    }

    /// Density of the singular component (without its weight) when it has one.
    fn singular_density(&self, v: f64) -> f64 {
        match &self.singular {
            Some((_, law)) => law.density(v).unwrap_or(0.0),
            None => 0.0,
        }
    }

    /// Weight of a singular component that has no density (atoms).
    fn atomic_weight(&self) -> f64 {
        match &self.singular {
            Some((w, law)) if law.density(0.0).is_none() => *w,
            _ => 0.0,
        }
    }

    /// Full density at `v` (atoms excluded).
    pub fn at(&self, v: f64) -> f64 {
        let w = self.singular.as_ref().map_or(0.0, |s| s.0);
        self.smooth_at(v) + w * self.singular_density(v)
    }

    /// `(v, f(v))` on grid nodes with `|v| <= v_max`.
    pub fn points(&self, v_max: f64) -> Vec<(f64, f64)> {
        self.v_nodes()
            .into_iter()
            .filter(|v| v.abs() <= v_max)
            .map(|v| (v, self.at(v)))
            .collect()
    }

    /// Mass carried by negative excursions of the smooth part.
    pub fn negative_mass(&self) -> f64 {
        self.values.iter().filter(|v| **v < 0.0).map(|v| -v).sum::<f64>() * self.dv
    }
}

/// Inversion with the default options (strict edge check).
pub fn invert_to_density(cf: &CfGrid) -> Result<DensityGrid> {
    invert_with(cf, &InversionOptions::default())
}

pub fn invert_with(cf: &CfGrid, opts: &InversionOptions) -> Result<DensityGrid> {
    let p = cf.params;
    let m = p.n / 2;
    let pad = opts.pad.max(2 * p.n).next_power_of_two();
    let h = p.dxi();
    let nodes = p.half_nodes();
    let (half, singular): (Vec<Complex64>, Option<(f64, Law)>) = match &opts.mode {
        TailMode::SubtractLeading(law) => {
            let w = (-cf.t).exp();
            let rem = cf
                .half_values()
                .iter()
                .zip(&nodes)
                .map(|(v, x)| v - law.cf(*x) * w)
                .collect();
            (rem, Some((w, law.clone())))
        }
        _ => (cf.half_values().to_vec(), None),
    };
    let edge = half[(m * 19) / 20..]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    match opts.mode {
        TailMode::Strict if edge > 1e-8 => return Err(KacError::Aliasing { edge }),
        TailMode::SubtractLeading(_) if edge > opts.edge_tol => {
            return Err(KacError::Aliasing { edge })
        }
        _ => {}
    }

    // Trapezoid in xi over [-Xi, Xi]; the endpoints get half weight.
    let mut a = vec![Complex64::new(0.0, 0.0); pad];
    for (k, v) in half.iter().enumerate() {
        let w = if k == m { 0.5 } else { 1.0 };
        a[k] += v * w;
        if k > 0 {
            a[pad - k] += v.conj() * w;
        }
    }
    FftPlanner::new().plan_fft_forward(pad).process(&mut a);
    let dv = 2.0 * PI / (pad as f64 * h);
    let scale = h / (2.0 * PI);
    let values: Vec<f64> = (0..pad)
        .map(|j| {
            // v_j = (j - pad/2) dv; shifting by pad/2 flips the sign of odd xi-indices.
            let idx = (j + pad / 2) % pad;
            scale * a[idx].re
        })
        .collect();
    let smooth_mass = values.iter().sum::<f64>() * dv;
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let w = singular.as_ref().map_or(0.0, |s| s.0);
    Ok(DensityGrid {
        dv,
        values,
        singular,
        mass: smooth_mass + w,
        edge,
        min_value,
        t: cf.t,
    })
}

fn gaussian(v: f64, sigma: f64) -> f64 {
    (-0.5 * (v / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
}

/// `(1/2) int |f - g_sigma|`, with `g_sigma` the centred Gaussian density of
/// standard deviation `sigma`.
///
/// Trapezoid on the grid nodes; a cell where `f - g` changes sign is split at
/// the linear root, and cells holding a breakpoint of the singular part use
/// Gauss-Legendre on the interpolated smooth part.
pub fn tv_distance(f: &DensityGrid, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(KacError::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let p = f.values.len();
    let reach = f.extent().min(40.0 * sigma) - 2.0 * f.dv;
    let half = (reach / f.dv).floor() as usize;
    let (lo, hi) = (p / 2 - half, p / 2 + half);
    let w = f.singular.as_ref().map_or(0.0, |s| s.0);
    let node = |m: usize| (m as f64 - (p / 2) as f64) * f.dv;
    let total = |m: usize| {
        let v = node(m);
        f.values[m] + w * f.singular_density(v)
    };
    let breaks: Vec<f64> = match &f.singular {
        Some((_, law)) if law.density(0.0).is_some() => law.breakpoints(),
        _ => Vec::new(),
    };
    let (gx, gw) = gauss_legendre(3);
    let mut l1 = Vec::with_capacity(hi - lo);
    let mut mass = Vec::with_capacity(hi - lo);
    for m in lo..hi {
        let (a, b) = (node(m), node(m + 1));
        let inside: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
        if inside.is_empty() {
            let (fa, fb) = (total(m), total(m + 1));
            let (da, db) = (fa - gaussian(a, sigma), fb - gaussian(b, sigma));
            let cell = if da * db < 0.0 {
                0.5 * (da * da + db * db) / (da - db).abs() * f.dv
            } else {
                0.5 * (da.abs() + db.abs()) * f.dv
            };
            l1.push(cell);
            mass.push(0.5 * (fa + fb) * f.dv);
        } else {
            let mut cuts = vec![a];
            cuts.extend(inside);
            cuts.push(b);
            for c in cuts.windows(2) {
                let (mid, r) = (0.5 * (c[0] + c[1]), 0.5 * (c[1] - c[0]));
                let (mut sa, mut sm) = (0.0, 0.0);
                for (x, wt) in gx.iter().zip(&gw) {
                    let v = mid + r * x;
                    let fv = f.at(v);
                    sa += wt * (fv - gaussian(v, sigma)).abs();
                    sm += wt * fv;
                }
                l1.push(sa * r);
                mass.push(sm * r);
            }
        }
    }
    let atoms = f.atomic_weight();
    let total_mass = crate::numerics::pairwise_sum(&mass) + atoms;
    let defect = (total_mass - 1.0).abs();
    if defect > 1e-3 {
        return Err(KacError::UnreliableDistance { defect });
    }
    Ok(0.5 * (crate::numerics::pairwise_sum(&l1) + atoms))
}

/// `sup_xi |phi(xi) - exp(-sigma^2 xi^2 / 2)|` over the grid nodes.
pub fn sup_cf_distance(cf: &CfGrid) -> f64 {
    cf.sup_distance_to_maxwellian()
}
