//! Parameter sweeps, log–log slope fits, CSV output and TOML configuration,
//! plus the discrepancy report and the validation suites behind the CLI.
//! Everything here runs in `f64`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::complex_ei::{
    e1, ei, ei_asymptotic_partial_sum, AsymptoticConfig, AsymptoticOrder, EiArgument,
};
use crate::error::{Error, Result};
use crate::fullspace::{
    expansion_coefficient, first_term, g_zeta_fullspace, radial_integral_closed,
    radial_integral_printed, radial_integral_series, Normalization, RadialKernelParams,
};
use crate::geometry::{calderon_direction, dot, make_direction, CVec3, DirectionSpec, FieldPoint};
use crate::oracle::{
    e1_reference, integrate_pv_circle, integrate_semiinfinite_oscillatory, QuadratureSpec,
};
use crate::quadrature::Tolerance;
use crate::slab::{
    angular_combination, eigen_sum_abel_limit, f_pairing, g_angular, g_zeta_slab_paired,
    i_nu_asymptotic, i_nu_quadrature, lambda_nu, m_nu_closed, m_nu_printed, m_nu_principal,
    slab_kernel_params, vertical_factor, vertical_factor_derivative, vertical_mode,
    vertical_mode_derivative, AlphaConvention, Bump, KernelGuards, SlabConfig, SlabFieldPoint,
    TestFunction,
};
use crate::C64;

/// Quantity swept by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTarget {
    /// Free-space `G_ζ` against its first-term reconstruction.
    Fg3,
    /// Vertically paired slab `G_ζ` against the `f·g/s` prediction.
    Slab,
    /// Radial series of order `n` against the closed form.
    Radial,
    /// Asymptotic partial sums of `e^{-z} Ei(z)` against the direct value.
    Ei,
}

impl SweepTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepTarget::Fg3 => "fg3",
            SweepTarget::Slab => "slab",
            SweepTarget::Radial => "radial",
            SweepTarget::Ei => "ei",
        }
    }

    fn default_grid(self) -> (f64, f64, usize) {
        match self {
            SweepTarget::Fg3 | SweepTarget::Slab => (50.0, 400.0, 7),
            SweepTarget::Radial => (20.0, 320.0, 9),
            SweepTarget::Ei => (5.0, 50.0, 6),
        }
    }

    fn default_orders(self) -> Vec<usize> {
        match self {
            SweepTarget::Fg3 => vec![1],
            SweepTarget::Slab => vec![12],
            SweepTarget::Radial => vec![1, 2, 3],
            SweepTarget::Ei => vec![2, 4, 8],
        }
    }
}

impl std::str::FromStr for SweepTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fg3" => Ok(Self::Fg3),
            "slab" => Ok(Self::Slab),
            "radial" => Ok(Self::Radial),
            "ei" => Ok(Self::Ei),
            other => Err(Error::Config(format!(
                "unknown target `{other}` (expected fg3|slab|radial|ei)"
            ))),
        }
    }
}

/// `count` points spaced geometrically from `start` to `stop` inclusive.
pub fn geometric_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(Error::Config(format!(
            "geometric grid needs 0 < start <= stop, got {start}:{stop}"
        )));
    }
    match count {
        0 => Err(Error::Config("grid needs at least one point".into())),
        1 => Ok(vec![start]),
        _ => {
            let ratio = (stop / start).ln() / (count - 1) as f64;
            let mut v: Vec<f64> = (0..count)
                .map(|k| start * (ratio * k as f64).exp())
                .collect();
            v[0] = start;
            v[count - 1] = stop;
            Ok(v)
        }
    }
}

/// Parses `start:stop:count`.
pub fn parse_s_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "s-grid `{spec}` is not start:stop:count"
        )));
    }
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("s-grid `{spec}`: {e}")))
    };
    let count = parts[2]
        .trim()
        .parse::<usize>()
        .map_err(|e| Error::Config(format!("s-grid `{spec}`: {e}")))?;
    geometric_grid(num(parts[0])?, num(parts[1])?, count)
}

/// Comma-separated list of orders.
pub fn parse_orders(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("orders `{spec}`: {e}")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub target: Option<String>,
    pub s_grid: Option<String>,
    pub s_values: Option<Vec<f64>>,
    pub orders: Option<Vec<usize>>,
    pub output: Option<PathBuf>,
    pub normalization: Option<String>,
    pub alpha_convention: Option<String>,
    pub seed: Option<u64>,
    pub field_point: Option<FieldPointSection>,
    pub direction: Option<DirectionSection>,
    pub radial: Option<RadialSection>,
    pub ei: Option<EiSection>,
    pub slab: Option<SlabSection>,
    pub quadrature: Option<QuadratureSection>,
    pub presets: Option<BTreeMap<String, Preset>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldPointSection {
    pub r: f64,
    pub psi: f64,
    pub omega: f64,
}

/// `zeta_dot = [[re, im], [re, im], [re, im]]`; omitted means the Calderón direction.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionSection {
    pub zeta_dot: Option<[[f64; 2]; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSection {
    pub r: f64,
    pub alpha: [f64; 2],
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EiSection {
    pub arg: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabSection {
    pub h: Option<f64>,
    pub k0: Option<f64>,
    pub m: Option<[f64; 2]>,
    pub m_dot: Option<[f64; 2]>,
    pub ell_dot: Option<f64>,
    pub source: Option<[f64; 3]>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub z: Option<f64>,
    pub n_modes: Option<usize>,
    pub bump: Option<BumpSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSection {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
    pub pv_epsilon: Option<f64>,
    pub contour_angle: Option<f64>,
    pub beta_min: Option<f64>,
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }
}

/// Vertical wavenumber of the slab: fixed, or `m = s·ṁ` along the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerticalWavenumber {
    Fixed(C64),
    Scaled(C64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabSetup {
    pub h: f64,
    pub k0: f64,
    pub m: VerticalWavenumber,
    pub ell_dot: f64,
    pub source: [f64; 3],
    pub r: f64,
    pub theta: f64,
    pub z: f64,
    pub n_modes: Option<usize>,
    pub bump: Bump<f64>,
}

impl Default for SlabSetup {
    fn default() -> Self {
        Self {
            h: PI,
            k0: 1.0,
            m: VerticalWavenumber::Fixed(C64::new(0.0, 0.0)),
            ell_dot: 0.3,
            source: [0.0, 0.0, 1.0],
            r: 1.0,
            theta: PI / 3.0,
            z: 1.3,
            n_modes: None,
            bump: Bump {
                center: 1.2,
                width: 0.6,
                height: 1.0,
            },
        }
    }
}

impl SlabSetup {
    pub fn config(&self, s: f64) -> Result<SlabConfig<f64>> {
        let m = match self.m {
            VerticalWavenumber::Fixed(m) => m,
            VerticalWavenumber::Scaled(m_dot) => m_dot * s,
        };
        SlabConfig::new(self.h, self.k0, m, self.ell_dot, self.source)
    }

    pub fn point(&self, cfg: &SlabConfig<f64>) -> Result<SlabFieldPoint<f64>> {
        SlabFieldPoint::new(self.r, self.theta, self.z, cfg)
    }
}

/// Fixed parameters of every target; only the one matching the sweep is read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedParams {
    pub field_point: FieldPoint<f64>,
    /// `None` selects the Calderón direction.
    pub zeta_dot: Option<CVec3<f64>>,
    pub radial: (f64, C64, f64),
    pub ei_arg: f64,
    pub slab: SlabSetup,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            field_point: FieldPoint {
                r: 1.0,
                psi: PI / 3.0,
                omega: 0.0,
            },
            zeta_dot: None,
            radial: (2.0, C64::new(1.0, 0.3), -0.7),
            ei_arg: 0.5,
            slab: SlabSetup::default(),
        }
    }
}

impl FixedParams {
    /// Direction `s ζ̇` with `k0 = s √(ζ̇·ζ̇)`, which must be real.
    pub fn direction(&self, s: f64) -> Result<DirectionSpec<f64>> {
        match self.zeta_dot {
            None => calderon_direction(s),
            Some(zd) => {
                let q = dot(&zd, &zd);
                if q.im.abs() > 1e-12 || q.re < -1e-12 {
                    return Err(Error::Constraint {
                        residual: q.im.abs().max(-q.re),
                    });
                }
                make_direction(zd, s, s * q.re.max(0.0).sqrt())
            }
        }
    }
}

/// Fully resolved sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub target: SweepTarget,
    pub s_values: Vec<f64>,
    pub orders: Vec<usize>,
    pub params: FixedParams,
    pub quadrature: QuadratureSpec<f64>,
    pub normalization: Normalization,
    pub alpha_convention: AlphaConvention,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(target: SweepTarget) -> Self {
        let (a, b, n) = target.default_grid();
        Self {
            target,
            s_values: geometric_grid(a, b, n).expect("static grid"),
            orders: target.default_orders(),
            params: FixedParams::default(),
            quadrature: QuadratureSpec::default(),
            normalization: Normalization::Paper,
            alpha_convention: AlphaConvention::Unit,
            output_path: None,
            seed: 0,
        }
    }

    /// Builds a configuration from a file; `target` overrides the file's.
    pub fn from_file(file: &ConfigFile, target: Option<SweepTarget>) -> Result<Self> {
        let target = match (target, &file.target) {
            (Some(t), _) => t,
            (None, Some(t)) => t.parse()?,
            (None, None) => return Err(Error::Config("no sweep target given".into())),
        };
        let mut cfg = Self::new(target);
        if let Some(grid) = &file.s_grid {
            cfg.s_values = parse_s_grid(grid)?;
        }
        if let Some(values) = &file.s_values {
            cfg.s_values = values.clone();
        }
        if let Some(orders) = &file.orders {
            cfg.orders = orders.clone();
        }
        cfg.output_path = file.output.clone();
        if let Some(n) = &file.normalization {
            cfg.normalization = n.parse()?;
        }
        if let Some(a) = &file.alpha_convention {
            cfg.alpha_convention = a.parse()?;
        }
        if let Some(seed) = file.seed {
            cfg.seed = seed;
        }
        let p = &mut cfg.params;
        if let Some(fp) = &file.field_point {
            p.field_point = FieldPoint::new(fp.r, fp.psi, fp.omega)?;
        }
        if let Some(d) = &file.direction {
            p.zeta_dot = d.zeta_dot.map(|v| v.map(|[re, im]| C64::new(re, im)));
        }
        if let Some(r) = &file.radial {
            p.radial = (r.r, C64::new(r.alpha[0], r.alpha[1]), r.beta);
        }
        if let Some(e) = &file.ei {
            p.ei_arg = e.arg;
        }
        if let Some(sl) = &file.slab {
            let d = &mut p.slab;
            if sl.m.is_some() && sl.m_dot.is_some() {
                return Err(Error::Config(
                    "give either slab.m or slab.m_dot, not both".into(),
                ));
            }
            d.h = sl.h.unwrap_or(d.h);
            d.k0 = sl.k0.unwrap_or(d.k0);
            if let Some([re, im]) = sl.m {
                d.m = VerticalWavenumber::Fixed(C64::new(re, im));
            }
            if let Some([re, im]) = sl.m_dot {
                d.m = VerticalWavenumber::Scaled(C64::new(re, im));
            }
            d.ell_dot = sl.ell_dot.unwrap_or(d.ell_dot);
            d.source = sl.source.unwrap_or(d.source);
            d.r = sl.r.unwrap_or(d.r);
            d.theta = sl.theta.unwrap_or(d.theta);
            d.z = sl.z.unwrap_or(d.z);
            d.n_modes = sl.n_modes.or(d.n_modes);
            if let Some(b) = &sl.bump {
                d.bump = Bump {
                    center: b.center,
                    width: b.width,
                    height: b.height,
                };
            }
            if file.orders.is_none() {
                if let Some(n) = d.n_modes {
                    cfg.orders = vec![n];
                }
            }
        }
        if let Some(q) = &file.quadrature {
            let spec = &mut cfg.quadrature;
            spec.abs_tol = q.abs_tol.unwrap_or(spec.abs_tol);
            spec.rel_tol = q.rel_tol.unwrap_or(spec.rel_tol);
            spec.max_subdivisions = q.max_subdivisions.unwrap_or(spec.max_subdivisions);
            spec.pv_epsilon = q.pv_epsilon.unwrap_or(spec.pv_epsilon);
            spec.contour_angle = q.contour_angle.unwrap_or(spec.contour_angle);
            spec.beta_min = q.beta_min.unwrap_or(spec.beta_min);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_values.is_empty() || self.s_values.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Config("s values must be positive and finite".into()));
        }
        if self.s_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("s values must be strictly increasing".into()));
        }
        if self.orders.is_empty() && self.target != SweepTarget::Fg3 {
            return Err(Error::Config(format!(
                "target {} needs at least one order",
                self.target.as_str()
            )));
        }
        if self.target == SweepTarget::Ei && self.orders.contains(&0) {
            return Err(Error::Config("ei partial sums start at order 1".into()));
        }
        self.quadrature.validate()
    }

    /// `(s, n)` pairs in output order. `fg3` has no order; it reports `n = 1`,
    /// the order of its first-term reference.
    pub fn points(&self) -> Vec<(f64, usize)> {
        let mut orders = self.orders.clone();
        orders.sort_unstable();
        orders.dedup();
        if self.target == SweepTarget::Fg3 {
            orders = vec![1];
        }
        self.s_values
            .iter()
            .flat_map(|&s| orders.iter().map(move |&n| (s, n)))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Sweeps

/// One line of sweep output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub s: f64,
    pub n: usize,
    pub value: C64,
    pub reference: C64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub err_est: f64,
}

impl SweepRow {
    pub fn new(s: f64, n: usize, value: C64, reference: C64, err_est: f64) -> Self {
        let abs_err = (value - reference).norm();
        Self {
            s,
            n,
            value,
            reference,
            abs_err,
            rel_err: abs_err / reference.norm(),
            err_est,
        }
    }
}

/// Slab prediction `(1/2π²)⟨f, ψ⟩ g e^{imz0}/s`.
pub fn slab_prediction(setup: &SlabSetup, cfg: &SlabConfig<f64>, s: f64) -> Result<C64> {
    let f = f_pairing(&setup.bump, cfg, 4)?;
    let g = g_angular(setup.r, setup.theta, cfg.ell_dot)?;
    let phase = (C64::i() * cfg.m * cfg.z0()).exp();
    Ok(g * phase * (f / (2.0 * PI * PI * s)))
}

pub fn evaluate_point(cfg: &SweepConfig, s: f64, n: usize) -> Result<SweepRow> {
    let q = &cfg.quadrature;
    let p = &cfg.params;
    match cfg.target {
        SweepTarget::Radial => {
            let (r, alpha, beta) = p.radial;
            let kp = RadialKernelParams::new(r, s, alpha, beta)?;
            let closed = radial_integral_closed(&kp)?;
            let (sum, _) = radial_integral_series(
                &kp,
                AsymptoticOrder::new(n, AsymptoticOrder::DEFAULT_MAX)?,
                q.beta_min,
            )?;
            Ok(SweepRow::new(s, n, sum, closed.value, closed.err))
        }
        SweepTarget::Ei => {
            let z = C64::from_polar(s, p.ei_arg);
            let exact = ei(z)?;
            let scale = (-z).exp();
            let partial = ei_asymptotic_partial_sum(z, n, &AsymptoticConfig::default())? / scale;
            Ok(SweepRow::new(s, n, partial, exact.value, exact.err))
        }
        SweepTarget::Fg3 => {
            let d = p.direction(s)?;
            let g = cfg
                .normalization
                .apply(g_zeta_fullspace(&p.field_point, &d, q)?);
            let c1 = expansion_coefficient(&p.field_point, &d, 1, q)?;
            let reference =
                first_term(c1.value, p.field_point.r, s) * cfg.normalization.factor::<f64>();
            Ok(SweepRow::new(s, n, g.value, reference, g.err))
        }
        SweepTarget::Slab => {
            let setup = &p.slab;
            let sc = setup.config(s)?;
            let point = setup.point(&sc)?;
            let series = g_zeta_slab_paired(&setup.bump, &point, s, &sc, n, q)?;
            let prediction = slab_prediction(setup, &sc, s)?;
            Ok(SweepRow::new(
                s,
                n,
                series.value.value,
                prediction,
                series.value.err,
            ))
        }
    }
}

/// Rows that evaluated, plus the failures, each tagged with its `(s, n)`.
#[derive(Debug, Default)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<Error>,
}

impl SweepOutput {
    /// All rows, or the first failure.
    pub fn into_result(self) -> Result<Vec<SweepRow>> {
        match self.failures.into_iter().next() {
            Some(e) => Err(e),
            None => Ok(self.rows),
        }
    }
}

/// Evaluates every `(s, n)` pair in parallel. Rows come back in `(s, n)`
/// order regardless of scheduling; failed points are dropped from the rows
/// and reported separately.
pub fn run_sweep_partial(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let results: Vec<Result<SweepRow>> = cfg
        .points()
        .par_iter()
        .map(|&(s, n)| {
            evaluate_point(cfg, s, n).map_err(|e| Error::SweepPoint {
                s,
                n,
                source: Box::new(e),
            })
        })
        .collect();
    let mut out = SweepOutput::default();
    for r in results {
        match r {
            Ok(row) => out.rows.push(row),
            Err(e) => out.failures.push(e),
        }
    }
    Ok(out)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    run_sweep_partial(cfg)?.into_result()
}

// ---------------------------------------------------------------------------
// Slope fits

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for two points or an exact fit).
    pub stderr: f64,
    pub points: usize,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::DegenerateData(format!(
            "{} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateData("need at least two points".into()));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateData(
            "log-log fit needs positive finite data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateData("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if lx.len() > 2 {
        let rss: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        points: lx.len(),
    })
}

/// Which column of the rows is fitted against `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitQuantity {
    AbsErr,
    RelErr,
    /// `|value|`.
    Magnitude,
}

impl FitQuantity {
    pub fn of(self, row: &SweepRow) -> f64 {
        match self {
            FitQuantity::AbsErr => row.abs_err,
            FitQuantity::RelErr => row.rel_err,
            FitQuantity::Magnitude => row.value.norm(),
        }
    }
}

/// Slope of `quantity` against `s` over all rows.
pub fn fit_rows(rows: &[SweepRow], quantity: FitQuantity) -> Result<SlopeFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.s, quantity.of(r))).unzip();
    fit_loglog_slope(&xs, &ys)
}

/// One slope per order `n`, in order of first appearance.
pub fn slopes_by_order(rows: &[SweepRow], quantity: FitQuantity) -> Result<Vec<(usize, SlopeFit)>> {
    let mut orders: Vec<usize> = Vec::new();
    for r in rows {
        if !orders.contains(&r.n) {
            orders.push(r.n);
        }
    }
    orders
        .into_iter()
        .map(|n| {
            let subset: Vec<SweepRow> = rows.iter().filter(|r| r.n == n).copied().collect();
            Ok((n, fit_rows(&subset, quantity)?))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// CSV

pub const CSV_HEADER: [&str; 9] = [
    "s", "n", "value_re", "value_im", "ref_re", "ref_im", "abs_err", "rel_err", "err_est",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        let fields = [
            format_f64(r.s),
            r.n.to_string(),
            format_f64(r.value.re),
            format_f64(r.value.im),
            format_f64(r.reference.re),
            format_f64(r.reference.im),
            format_f64(r.abs_err),
            format_f64(r.rel_err),
            format_f64(r.err_est),
        ];
        out.write_record(&fields).map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_csv_file(rows: &[SweepRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Format(format!("unexpected CSV header {header:?}")));
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let f = |i: usize| -> Result<f64> {
                rec.get(i)
                    .unwrap_or("")
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("column {}: {e}", CSV_HEADER[i])))
            };
            let n = rec
                .get(1)
                .unwrap_or("")
                .parse::<usize>()
                .map_err(|e| Error::Format(format!("column n: {e}")))?;
            Ok(SweepRow {
                s: f(0)?,
                n,
                value: C64::new(f(2)?, f(3)?),
                reference: C64::new(f(4)?, f(5)?),
                abs_err: f(6)?,
                rel_err: f(7)?,
                err_est: f(8)?,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Discrepancy report

/// A printed formula evaluated next to its re-derived counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrepancy {
    pub id: String,
    pub description: String,
    pub printed: C64,
    pub rederived: C64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

impl Discrepancy {
    fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        printed: C64,
        rederived: C64,
    ) -> Self {
        let abs_diff = (printed - rederived).norm();
        Self {
            id: id.into(),
            description: description.into(),
            printed,
            rederived,
            abs_diff,
            rel_diff: abs_diff / rederived.norm(),
        }
    }
}

fn slab_fixture() -> Result<(SlabConfig<f64>, SlabFieldPoint<f64>)> {
    let cfg = SlabConfig::new(PI, 1.0, C64::new(0.0, 0.0), 0.3, [0.0, 0.0, 1.0])?;
    let p = SlabFieldPoint::new(1.0, PI / 3.0, 1.3, &cfg)?;
    Ok((cfg, p))
}

/// Evaluates every printed formula that has a re-derived counterpart at fixed
/// parameter points. The list is deterministic.
pub fn discrepancy_report(q: &QuadratureSpec<f64>) -> Result<Vec<Discrepancy>> {
    let mut out = Vec::new();

    // Radial integral: printed form without the residue, in and out of the swept region.
    for (label, alpha) in [
        ("outside swept region", C64::new(1.0, 0.3)),
        ("inside swept region", C64::new(-1.0, 0.005)),
    ] {
        let p = RadialKernelParams::new(2.0, 50.0, alpha, -0.7)?;
        out.push(Discrepancy::new(
            format!("radial-closed-form/{}", if alpha.re > 0.0 { "outside" } else { "inside" }),
            format!("radial integral, printed Ei form vs residue-corrected ({label}; R=2, s=50, alpha={alpha}, beta=-0.7)"),
            radial_integral_printed(&p)?.value,
            radial_integral_closed(&p)?.value,
        ));
    }

    // Full-space leading coefficient.
    let fp = FieldPoint::new(1.0, PI / 3.0, 0.0)?;
    let d = calderon_direction(30.0)?;
    let c1 = expansion_coefficient(&fp, &d, 1, q)?.value;
    let g = g_zeta_fullspace(&fp, &d, q)?.value;
    out.push(Discrepancy::new(
        "fullspace-first-term",
        "free-space G vs term-by-term first term -C1/(2R^2 s) (Calderon direction, R=1, psi=pi/3, s=30); C1 vanishes identically",
        first_term(c1, fp.r, 30.0),
        g,
    ));

    // Slab kernel, printed closed form with β := β_ν, both readings of α.
    let (cfg, p) = slab_fixture()?;
    let guards = KernelGuards::default();
    for conv in [AlphaConvention::Unit, AlphaConvention::Scaled] {
        let name = if conv == AlphaConvention::Unit {
            "unit"
        } else {
            "scaled"
        };
        out.push(Discrepancy::new(
            format!("slab-kernel/{name}"),
            format!("M_nu printed closed form vs partial fractions (alpha {name}; phi=0.25, theta=pi/3, R=1, s=20, nu=0, H=pi, m=0, ell=0.3)"),
            m_nu_printed(0.25, &p, 20.0, 0, &cfg, conv)?,
            m_nu_closed(0.25, &p, 20.0, 0, &cfg, &guards)?.value,
        ));
    }

    // β_ν as printed vs the root of the quadratic with m from the quadric.
    let s = 20.0;
    let k = slab_kernel_params(0.25, s, 0, &cfg, AlphaConvention::Unit)?;
    let l = cfg.ell_dot;
    let m_sq = C64::new(cfg.k0 * cfg.k0 - s * s * (1.0 - l * l), 0.0);
    let lam_sq = m_sq + lambda_nu(0, &cfg).mu.powi(2);
    let root = (k.alpha * k.alpha + lam_sq / (s * s)).sqrt();
    out.push(Discrepancy::new(
        "slab-beta-shift",
        "beta_nu with shift (1 - ell) vs the quadratic's root with m^2 = k0^2 - s^2 (1 - ell^2) (phi=0.25, s=20, nu=0)",
        k.beta_nu,
        if (root - k.beta_nu).norm() < (root + k.beta_nu).norm() { root } else { -root },
    ));

    // Pointwise principal term of M_ν against the partial-fraction kernel.
    for s in [50.0, 200.0] {
        out.push(Discrepancy::new(
            format!("slab-kernel-principal/s={s}"),
            format!("s * M_0 from the principal term vs s * M_0 by partial fractions (phi=0.25, theta=pi/3, R=1, s={s})"),
            m_nu_principal(0.25, &p, s, &cfg, AlphaConvention::Unit)? * s,
            m_nu_closed(0.25, &p, s, 0, &cfg, &guards)?.value * s,
        ));
    }

    // Principal term of I_ν against the quadrature, scaled by s.
    let tol = Tolerance::new(q.abs_tol, q.rel_tol, q.max_subdivisions);
    for s in [50.0, 100.0, 200.0] {
        let quad = i_nu_quadrature(&p, s, 0, &cfg, q)?.value;
        let asym = i_nu_asymptotic(&p, s, &cfg, AlphaConvention::Unit, tol)?.value;
        out.push(Discrepancy::new(
            format!("slab-principal/s={s}"),
            format!(
                "s * I_0 from the principal term vs s * I_0 by quadrature (theta=pi/3, R=1, s={s})"
            ),
            asym * s,
            quad * s,
        ));
    }

    // Angular factor g vs the PV combination of the two angular integrals.
    for k in 0..6 {
        let theta = PI / 3.0 * k as f64 + 0.1;
        out.push(Discrepancy::new(
            format!("slab-angular/theta={theta:.4}"),
            format!("closed-form g vs PV combination of the two angular integrals (R=1, ell=0.3, theta={theta:.4})"),
            g_angular(1.0, theta, cfg.ell_dot)?,
            angular_combination(1.0, theta, cfg.ell_dot, tol)?.value,
        ));
    }

    // Vertical pairings.
    let psi = Bump {
        center: 1.2,
        width: 0.6,
        height: 1.0,
    };
    let eig = eigen_sum_abel_limit(&psi, &cfg, 400)?.value;
    let f = f_pairing(&psi, &cfg, 4)?;
    out.push(Discrepancy::new(
        "slab-vertical-pairing",
        "image-comb pairing <f, psi> vs Abel-summed eigenfunction pairing (H=pi, z0=1); their ratio is -H",
        C64::new(f, 0.0),
        eig,
    ));
    Ok(out)
}

pub fn render_report_text(entries: &[Discrepancy]) -> String {
    let mut s = String::new();
    for e in entries {
        s.push_str(&format!("{}\n  {}\n", e.id, e.description));
        s.push_str(&format!(
            "  printed   {:>24} {:>24}\n",
            format_f64(e.printed.re),
            format_f64(e.printed.im)
        ));
        s.push_str(&format!(
            "  rederived {:>24} {:>24}\n",
            format_f64(e.rederived.re),
            format_f64(e.rederived.im)
        ));
        s.push_str(&format!(
            "  abs_diff {}  rel_diff {}\n",
            format_f64(e.abs_diff),
            format_f64(e.rel_diff)
        ));
    }
    s
}

pub fn render_report_csv(entries: &[Discrepancy]) -> Result<String> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    out.write_record([
        "id",
        "printed_re",
        "printed_im",
        "rederived_re",
        "rederived_im",
        "abs_diff",
        "rel_diff",
        "description",
    ])
    .map_err(csv_err)?;
    for e in entries {
        out.write_record([
            e.id.clone(),
            format_f64(e.printed.re),
            format_f64(e.printed.im),
            format_f64(e.rederived.re),
            format_f64(e.rederived.im),
            format_f64(e.abs_diff),
            format_f64(e.rel_diff),
            e.description.clone(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = out.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

// ---------------------------------------------------------------------------
// Validation checks

/// Outcome of one [`Check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// The check's own metric: a worst deviation, or a fitted slope's distance from its target.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {:.3e} (tolerance {:.3e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.detail
        )
    }
}

/// Points of `|z| ∈ [0.1, 100]`, `|arg z| ≤ 3π/4` on a `moduli × args` grid.
pub fn e1_grid(moduli: usize, args: usize) -> Vec<C64> {
    let rs = geometric_grid(0.1, 100.0, moduli.max(1)).unwrap_or_default();
    let mut out = Vec::with_capacity(moduli * args);
    for r in rs {
        for j in 0..args {
            let t = if args == 1 {
                0.0
            } else {
                j as f64 / (args - 1) as f64
            };
            out.push(C64::from_polar(r, -0.75 * PI + 1.5 * PI * t));
        }
    }
    out
}

/// Largest relative deviation of `e1` from the quadrature definition.
pub fn e1_oracle_check(points: &[C64], q: &QuadratureSpec<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for &z in points {
        let v = e1(EiArgument::new(z)?).value;
        let o = e1_reference(z, q)?.value;
        worst = worst.max((v - o).norm() / o.norm());
    }
    Ok(worst)
}

/// Contour-rotated quadrature of `∫_0^∞ r e^{iRβr}/(r + A) dr`.
pub fn radial_reference(
    p: &RadialKernelParams<f64>,
    q: &QuadratureSpec<f64>,
) -> Result<Complex<f64>> {
    let a = p.a();
    let rb = p.r * p.beta;
    let spec = q.with_cutoff((-a.re).max(0.0) + 1.0);
    Ok(integrate_semiinfinite_oscillatory(
        |x| x * (C64::new(0.0, rb) * x).exp() / (x + a),
        rb,
        &spec,
    )?
    .value)
}

/// Largest relative deviation of the radial closed form from its quadrature.
pub fn radial_oracle_check(
    rng: &mut ChaCha8Rng,
    points: usize,
    q: &QuadratureSpec<f64>,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..points {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let p = RadialKernelParams::new(
            rng.gen_range(0.2..3.0),
            rng.gen_range(1.0..100.0),
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            sign * rng.gen_range(0.05..1.0),
        )?;
        let c = radial_integral_closed(&p)?.value;
        let o = radial_reference(&p, q)?;
        worst = worst.max((c - o).norm() / o.norm());
    }
    Ok(worst)
}

/// Contour-rotated quadrature of `M_ν(φ)` straight from its definition.
pub fn slab_kernel_reference(
    phi: f64,
    p: &SlabFieldPoint<f64>,
    s: f64,
    nu: i64,
    cfg: &SlabConfig<f64>,
    q: &QuadratureSpec<f64>,
) -> Result<Complex<f64>> {
    let a = C64::new(phi.cos(), cfg.ell_dot * phi.sin()) * s;
    let lam_sq = lambda_nu(nu, cfg).lambda_sq;
    let disc = (a * a + lam_sq).sqrt();
    let cut = (a + disc).re.max((a - disc).re).max(0.0) + 1.0;
    let b = -p.r * (p.theta - phi).cos();
    let spec = q.with_cutoff(cut);
    Ok(integrate_semiinfinite_oscillatory(
        |x| (C64::new(0.0, b) * x).exp() / (x * x - a * x * 2.0 - lam_sq),
        b,
        &spec,
    )?
    .value)
}

/// `(config, point, φ, s, ν)`.
pub type SlabSample = (SlabConfig<f64>, SlabFieldPoint<f64>, f64, f64, i64);

/// Random slab parameters respecting the kernel's preconditions.
pub fn random_slab_point(rng: &mut ChaCha8Rng) -> Result<SlabSample> {
    let h = rng.gen_range(1.0..4.0);
    let m = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let cfg = SlabConfig::new(
        h,
        rng.gen_range(0.0..2.0),
        m,
        rng.gen_range(-0.8..0.8),
        [0.0, 0.0, h / 2.0],
    )?;
    let p = SlabFieldPoint::new(
        rng.gen_range(0.2..3.0),
        rng.gen_range(0.0..2.0 * PI),
        h / 3.0,
        &cfg,
    )?;
    let s = rng.gen_range(1.0..100.0);
    let nu = rng.gen_range(-4..4);
    let mut phi = rng.gen_range(0.0..2.0 * PI);
    while (p.theta - phi).cos().abs() < 1e-3 {
        phi = rng.gen_range(0.0..2.0 * PI);
    }
    Ok((cfg, p, phi, s, nu))
}

pub fn slab_kernel_oracle_check(
    rng: &mut ChaCha8Rng,
    points: usize,
    q: &QuadratureSpec<f64>,
) -> Result<f64> {
    let mut worst = 0.0f64;
    let guards = KernelGuards::default();
    for _ in 0..points {
        let (cfg, p, phi, s, nu) = random_slab_point(rng)?;
        let c = m_nu_closed(phi, &p, s, nu, &cfg, &guards)?.value;
        let o = slab_kernel_reference(phi, &p, s, nu, &cfg, q)?;
        worst = worst.max((c - o).norm() / o.norm());
    }
    Ok(worst)
}

/// Angular combination by symmetric excision (oracle back-end).
pub fn angular_combination_reference(
    r: f64,
    theta: f64,
    ell_dot: f64,
    q: &QuadratureSpec<f64>,
) -> Result<C64> {
    let shift = (1.0 - ell_dot).powi(2);
    let zeros = [theta + PI / 2.0, theta - PI / 2.0];
    let first = integrate_pv_circle(
        |phi| C64::new(phi.cos(), ell_dot * phi.sin()) / (theta - phi).cos(),
        &zeros,
        q,
    )?;
    let second = integrate_pv_circle(
        |phi| {
            let a = C64::new(phi.cos(), ell_dot * phi.sin());
            (a * a - shift) / (theta - phi).cos()
        },
        &zeros,
        q,
    )?;
    Ok((first.value + second.value) * (-C64::i() / ((1.0 - ell_dot * ell_dot) * r)))
}

pub fn angular_pv_check(thetas: &[f64], ell_dot: f64, q: &QuadratureSpec<f64>) -> Result<f64> {
    let tol = Tolerance::new(q.abs_tol, q.rel_tol, q.max_subdivisions);
    let mut worst = 0.0f64;
    for &theta in thetas {
        let fold = angular_combination(1.0, theta, ell_dot, tol)?.value;
        let excision = angular_combination_reference(1.0, theta, ell_dot, q)?;
        worst = worst.max((fold - excision).norm() / excision.norm());
    }
    Ok(worst)
}

/// Random bump supported inside `(0, h)`.
pub fn random_bump(rng: &mut ChaCha8Rng, h: f64) -> Bump<f64> {
    let width = rng.gen_range(0.05 * h..0.3 * h);
    let center = rng.gen_range(width * 1.01..h - width * 1.01);
    Bump {
        center,
        width,
        height: rng.gen_range(0.5..2.0),
    }
}

/// Worst relative deviations of `(⟨f,ψ⟩ + ψ(z0), eigen - Hψ(z0), eigen/f + H)`,
/// taken over bumps that do not vanish at the source.
pub fn pairing_check(rng: &mut ChaCha8Rng, count: usize) -> Result<(f64, f64, f64)> {
    let (mut f_worst, mut e_worst, mut r_worst) = (0.0f64, 0.0f64, 0.0f64);
    let mut done = 0;
    while done < count {
        let h = rng.gen_range(1.0..4.0);
        let psi = random_bump(rng, h);
        let (lo, hi) = psi.support();
        let z0 = rng.gen_range(lo + 0.2 * (hi - lo)..hi - 0.2 * (hi - lo));
        let cfg = SlabConfig::new(h, 1.0, C64::new(0.0, 0.0), 0.3, [0.0, 0.0, z0])?;
        let target = psi.value(z0);
        let f = f_pairing(&psi, &cfg, 4)?;
        let modes = (40.0 * h / (PI * psi.width)).ceil() as usize + 20;
        let e = eigen_sum_abel_limit(&psi, &cfg, modes)?.value.re;
        f_worst = f_worst.max((f + target).abs() / target.abs());
        e_worst = e_worst.max((e - h * target).abs() / (h * target).abs());
        r_worst = r_worst.max((e / f + h).abs() / h);
        done += 1;
    }
    Ok((f_worst, e_worst, r_worst))
}

/// Largest slope error or standard error over exact integer power laws.
pub fn synthetic_slope_check() -> Result<f64> {
    let xs = geometric_grid(20.0, 320.0, 9)?;
    let mut worst = 0.0f64;
    for p in [-4, -3, -2, -1, 1] {
        let ys: Vec<f64> = xs.iter().map(|x| 3.7 * x.powi(p)).collect();
        let fit = fit_loglog_slope(&xs, &ys)?;
        worst = worst.max((fit.slope - p as f64).abs()).max(fit.stderr);
    }
    Ok(worst)
}

/// One validation check, as written in a preset table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum Check {
    /// `e1` against its integral definition on a `moduli × args` grid.
    E1Oracle {
        moduli: usize,
        args: usize,
        tolerance: f64,
    },
    /// Radial closed form against contour-rotated quadrature at random points.
    RadialOracle { points: usize, tolerance: f64 },
    /// Slope of `|closed − series(n)|` against `−(n+1)`.
    RemainderSlopes {
        s_grid: String,
        orders: Vec<usize>,
        tolerance: f64,
    },
    /// Slope of `|G_ζ|` at each field point `[r, psi, omega]`.
    FullspaceSlope {
        s_grid: String,
        field_points: Vec<[f64; 3]>,
        expected: f64,
        tolerance: f64,
    },
    /// Slope of `|G_ζ − first term|` at each field point.
    FirstTermResidual {
        s_grid: String,
        field_points: Vec<[f64; 3]>,
        expected: f64,
        tolerance: f64,
    },
    /// Partial-fraction `M_ν` against quadrature; also evaluates the printed form.
    SlabKernelOracle { points: usize, tolerance: f64 },
    /// `|β_ν(s) − β_0|` shrinks by `expected_ratio` when `s` grows by `factor`.
    BetaShift {
        s: f64,
        factor: f64,
        phi: f64,
        nu: i64,
        expected_ratio: f64,
        tolerance: f64,
    },
    /// Folded PV of the angular integrals against symmetric excision.
    AngularPv { thetas: usize, tolerance: f64 },
    /// Image and eigenfunction pairings on random bumps.
    Pairings {
        bumps: usize,
        image_tolerance: f64,
        tolerance: f64,
    },
    /// Slope of the paired, truncated slab `|G_ζ|`.
    SlabSlope {
        s_grid: String,
        n_modes: usize,
        expected: f64,
        tolerance: f64,
    },
    /// Vertical modes vanish at `z = 0`, their derivatives at `z = H`.
    BoundaryConditions { modes: usize, depths: Vec<f64> },
    /// Slope fitter, CSV round trip, byte-identical reruns.
    HarnessSelfTest { tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Preset {
    #[serde(default)]
    pub description: String,
    #[serde(flatten)]
    pub check: Check,
}

/// Presets for every acceptance criterion, shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

pub fn default_presets() -> Result<BTreeMap<String, Preset>> {
    Ok(ConfigFile::from_toml_str(DEFAULT_CONFIG)?
        .presets
        .unwrap_or_default())
}

fn outcome(name: &str, worst: f64, tolerance: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed: worst <= tolerance,
        worst,
        tolerance,
        detail,
    }
}

fn slope_outcome(
    name: &str,
    fits: &[(String, SlopeFit)],
    expected: f64,
    tolerance: f64,
) -> CheckOutcome {
    let worst = fits
        .iter()
        .map(|(_, f)| (f.slope - expected).abs())
        .fold(0.0, f64::max);
    let detail = fits
        .iter()
        .map(|(k, f)| format!("{k}: {:.4}±{:.1e}", f.slope, f.stderr))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        name,
        worst,
        tolerance,
        format!("slopes vs {expected}: {detail}"),
    )
}

fn fullspace_fits(
    s_grid: &str,
    points: &[[f64; 3]],
    quantity: FitQuantity,
    q: &QuadratureSpec<f64>,
) -> Result<Vec<(String, SlopeFit)>> {
    points
        .iter()
        .map(|&[r, psi, omega]| {
            let mut cfg = SweepConfig::new(SweepTarget::Fg3);
            cfg.s_values = parse_s_grid(s_grid)?;
            cfg.quadrature = *q;
            cfg.params.field_point = FieldPoint::new(r, psi, omega)?;
            Ok((
                format!("({r}, {psi:.4}, {omega:.4})"),
                fit_rows(&run_sweep(&cfg)?, quantity)?,
            ))
        })
        .collect()
}

/// Runs one check; any library error fails it with the error as detail.
pub fn run_check(name: &str, check: &Check, seed: u64, q: &QuadratureSpec<f64>) -> CheckOutcome {
    let tolerance = match check {
        Check::E1Oracle { tolerance, .. }
        | Check::RadialOracle { tolerance, .. }
        | Check::RemainderSlopes { tolerance, .. }
        | Check::FullspaceSlope { tolerance, .. }
        | Check::FirstTermResidual { tolerance, .. }
        | Check::SlabKernelOracle { tolerance, .. }
        | Check::BetaShift { tolerance, .. }
        | Check::AngularPv { tolerance, .. }
        | Check::Pairings { tolerance, .. }
        | Check::SlabSlope { tolerance, .. }
        | Check::HarnessSelfTest { tolerance } => *tolerance,
        Check::BoundaryConditions { .. } => 0.0,
    };
    run_check_inner(name, check, seed, q).unwrap_or_else(|e| CheckOutcome {
        name: name.to_string(),
        passed: false,
        worst: f64::NAN,
        tolerance,
        detail: format!("error: {e}"),
    })
}

fn run_check_inner(
    name: &str,
    check: &Check,
    seed: u64,
    q: &QuadratureSpec<f64>,
) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tight = q.with_tolerances(1e-14, 1e-12);
    Ok(match check {
        Check::E1Oracle {
            moduli,
            args,
            tolerance,
        } => {
            let w = e1_oracle_check(&e1_grid(*moduli, *args), &tight)?;
            outcome(
                name,
                w,
                *tolerance,
                format!("{} points, worst relative deviation", moduli * args),
            )
        }
        Check::RadialOracle { points, tolerance } => {
            let w = radial_oracle_check(&mut rng, *points, &tight)?;
            outcome(
                name,
                w,
                *tolerance,
                format!("{points} random points, worst relative deviation"),
            )
        }
        Check::RemainderSlopes {
            s_grid,
            orders,
            tolerance,
        } => {
            let mut cfg = SweepConfig::new(SweepTarget::Radial);
            cfg.s_values = parse_s_grid(s_grid)?;
            cfg.orders = orders.clone();
            cfg.quadrature = *q;
            let fits = slopes_by_order(&run_sweep(&cfg)?, FitQuantity::AbsErr)?;
            let worst = fits
                .iter()
                .map(|(n, f)| (f.slope + (*n as f64 + 1.0)).abs())
                .fold(0.0, f64::max);
            let detail = fits
                .iter()
                .map(|(n, f)| format!("n={n}: {:.4}", f.slope))
                .collect::<Vec<_>>()
                .join(", ");
            outcome(
                name,
                worst,
                *tolerance,
                format!("slope vs -(n+1): {detail}"),
            )
        }
        Check::FullspaceSlope {
            s_grid,
            field_points,
            expected,
            tolerance,
        } => slope_outcome(
            name,
            &fullspace_fits(s_grid, field_points, FitQuantity::Magnitude, q)?,
            *expected,
            *tolerance,
        ),
        Check::FirstTermResidual {
            s_grid,
            field_points,
            expected,
            tolerance,
        } => slope_outcome(
            name,
            &fullspace_fits(s_grid, field_points, FitQuantity::AbsErr, q)?,
            *expected,
            *tolerance,
        ),
        Check::SlabKernelOracle { points, tolerance } => {
            let w = slab_kernel_oracle_check(&mut rng, *points, &tight)?;
            let printed = discrepancy_report(q)?
                .into_iter()
                .filter(|d| d.id.starts_with("slab-kernel/"))
                .map(|d| format!("{} rel_diff {:.3e}", d.id, d.rel_diff))
                .collect::<Vec<_>>()
                .join("; ");
            outcome(
                name,
                w,
                *tolerance,
                format!(
                    "{points} random points, worst relative deviation; printed form: {printed}"
                ),
            )
        }
        Check::BetaShift {
            s,
            factor,
            phi,
            nu,
            expected_ratio,
            tolerance,
        } => {
            let (cfg, _) = slab_fixture()?;
            let shift = |s: f64| -> Result<f64> {
                let k = slab_kernel_params(*phi, s, *nu, &cfg, AlphaConvention::Unit)?;
                Ok((k.beta_nu - k.beta_0).norm())
            };
            let ratio = shift(*s)? / shift(s * factor)?;
            outcome(
                name,
                (ratio / expected_ratio - 1.0).abs(),
                *tolerance,
                format!("shrink factor {ratio:.4} vs {expected_ratio}"),
            )
        }
        Check::AngularPv { thetas, tolerance } => {
            let grid: Vec<f64> = (0..*thetas)
                .map(|k| 2.0 * PI * (k as f64 + 0.25) / *thetas as f64)
                .collect();
            let w = angular_pv_check(&grid, 0.3, &tight)?;
            let t = Tolerance::new(tight.abs_tol, tight.rel_tol, tight.max_subdivisions);
            let mut g_worst = 0.0f64;
            for &theta in &grid {
                let combo = angular_combination(1.0, theta, 0.3, t)?.value;
                g_worst = g_worst.max((g_angular(1.0, theta, 0.3)? - combo).norm() / combo.norm());
            }
            outcome(
                name,
                w,
                *tolerance,
                format!("fold vs excision at {thetas} angles; closed-form g differs from the PV value by up to {g_worst:.3e} relative (see report)"),
            )
        }
        Check::Pairings {
            bumps,
            image_tolerance,
            tolerance,
        } => {
            let (f, e, r) = pairing_check(&mut rng, *bumps)?;
            let mut out = outcome(
                name,
                e.max(r),
                *tolerance,
                format!("{bumps} bumps: image {f:.2e}, Abel {e:.2e}, ratio vs -H {r:.2e}"),
            );
            out.passed &= f <= *image_tolerance;
            out
        }
        Check::SlabSlope {
            s_grid,
            n_modes,
            expected,
            tolerance,
        } => {
            let mut cfg = SweepConfig::new(SweepTarget::Slab);
            cfg.s_values = parse_s_grid(s_grid)?;
            cfg.orders = vec![*n_modes];
            cfg.quadrature = *q;
            let fit = fit_rows(&run_sweep(&cfg)?, FitQuantity::Magnitude)?;
            slope_outcome(
                name,
                &[(format!("{n_modes} modes"), fit)],
                *expected,
                *tolerance,
            )
        }
        Check::BoundaryConditions { modes, depths } => {
            let mut worst = 0.0f64;
            for &h in depths {
                for nu in 0..*modes as i64 {
                    worst = worst
                        .max(vertical_mode(nu, 0.0, h).abs())
                        .max(vertical_mode_derivative(nu, h, h).abs());
                }
                for z0 in [0.25 * h, 0.5 * h, 0.8 * h] {
                    worst = worst.max(vertical_factor(0.0, z0, h, *modes).abs());
                    worst = worst.max(vertical_factor_derivative(h, z0, h, *modes).abs());
                }
            }
            outcome(
                name,
                worst,
                0.0,
                format!("{modes} modes at depths {depths:?}, largest boundary value"),
            )
        }
        Check::HarnessSelfTest { tolerance } => {
            let slope = synthetic_slope_check()?;
            let mut cfg = SweepConfig::new(SweepTarget::Radial);
            cfg.quadrature = *q;
            let rows = run_sweep(&cfg)?;
            let first = csv_string(&rows)?;
            let round_trip = read_csv(first.as_bytes())? == rows;
            let identical = csv_string(&run_sweep(&cfg)?)? == first;
            let mut out = outcome(name, slope, *tolerance, format!("slope error and stderr; CSV round trip {round_trip}; byte-identical rerun {identical}"));
            out.passed &= round_trip && identical;
            out
        }
    })
}

/// Runs presets in key order.
pub fn run_validation(
    presets: &BTreeMap<String, Preset>,
    seed: u64,
    q: &QuadratureSpec<f64>,
) -> Vec<CheckOutcome> {
    presets
        .iter()
        .map(|(name, p)| run_check(name, &p.check, seed, q))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_and_ratio() {
        let g = geometric_grid(20.0, 320.0, 5).unwrap();
        for (a, b) in g.iter().zip([20.0, 40.0, 80.0, 160.0, 320.0]) {
            assert!((a - b).abs() < 1e-12 * b);
        }
        assert_eq!((g[0], g[4]), (20.0, 320.0));
        assert_eq!(parse_s_grid("3:3:1").unwrap(), vec![3.0]);
        assert!(parse_s_grid("0:3:4").is_err());
        assert!(parse_s_grid("1:3").is_err());
        assert_eq!(parse_orders("1, 2,3").unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 5.0 * x.powi(-2)).collect();
        let fit = fit_loglog_slope(&xs, &ys).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-14);
        assert!((fit.intercept - 5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn slope_rejects_degenerate_data() {
        assert!(matches!(
            fit_loglog_slope(&[1.0], &[1.0]),
            Err(Error::DegenerateData(_))
        ));
        assert!(matches!(
            fit_loglog_slope(&[2.0, 2.0], &[1.0, 3.0]),
            Err(Error::DegenerateData(_))
        ));
        assert!(matches!(
            fit_loglog_slope(&[1.0, 2.0], &[1.0, 0.0]),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn csv_header_and_digits() {
        let row = SweepRow::new(
            50.0,
            1,
            C64::new(0.1, -2.0 / 3.0),
            C64::new(1.0, 0.0),
            1e-12,
        );
        let text = csv_string(&[row]).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "s,n,value_re,value_im,ref_re,ref_im,abs_err,rel_err,err_est"
        );
        assert!(lines
            .next()
            .unwrap()
            .starts_with("5.0000000000000000e1,1,1.0000000000000001e-1,-6.6666666666666663e-1,"));
        assert!(!text.contains('\r'));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), vec![row]);
    }

    #[test]
    fn config_from_toml() {
        let file = ConfigFile::from_toml_str(
            r#"
            target = "radial"
            s_grid = "10:40:3"
            orders = [2]
            [radial]
            r = 1.5
            alpha = [0.5, 0.2]
            beta = 0.4
            [quadrature]
            rel_tol = 1e-9
            "#,
        )
        .unwrap();
        let cfg = SweepConfig::from_file(&file, None).unwrap();
        assert_eq!(cfg.target, SweepTarget::Radial);
        assert_eq!(cfg.s_values.len(), 3);
        assert_eq!(cfg.orders, vec![2]);
        assert_eq!(cfg.params.radial, (1.5, C64::new(0.5, 0.2), 0.4));
        assert_eq!(cfg.quadrature.rel_tol, 1e-9);
        assert!(ConfigFile::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn sweep_rows_are_ordered() {
        let mut cfg = SweepConfig::new(SweepTarget::Radial);
        cfg.s_values = vec![20.0, 40.0];
        cfg.orders = vec![3, 1, 2, 1];
        let rows = run_sweep(&cfg).unwrap();
        let keys: Vec<(f64, usize)> = rows.iter().map(|r| (r.s, r.n)).collect();
        assert_eq!(
            keys,
            vec![
                (20.0, 1),
                (20.0, 2),
                (20.0, 3),
                (40.0, 1),
                (40.0, 2),
                (40.0, 3)
            ]
        );
        cfg.s_values = vec![40.0, 20.0];
        assert!(matches!(run_sweep(&cfg), Err(Error::Config(_))));
    }
}
