//! Radial optimal transport between weighted densities on `(Σ, σ)` with the
//! Euclidean norm, where the monotone rearrangement `ψ = M_G^{−1} ∘ M_F` of
//! the radial laws is the Brenier map `∇φ(x) = ψ(|x|) x/|x|`.

use serde::{Deserialize, Serialize};

use crate::domain::WeightedDomain;
use crate::error::{Error, Result};
use crate::profiles::{power_integral, Radial, RadialProfile, Shape, Tail};
use crate::quadrature::{integrate_floor, Hints};

const NODES: usize = 512;
/// Decades covered by the table below the outer radius (and above the
/// characteristic radius for unbounded densities).
const DECADES: f64 = 6.0;
const TABLE_TOL: f64 = 1e-13;
/// Absolute error accepted on a table cell (densities have unit mass).
const CELL_FLOOR: f64 = 1e-18;
const MASS_TOL: f64 = 1e-8;
/// Interpolation error in `ln ψ` accepted at cell midpoints.
const REFINE_TOL: f64 = 1e-11;
const REFINE_PASSES: usize = 30;
const REFINE_TAIL: f64 = 1e-10;
/// Absolute accuracy of the cumulative masses.
const MASS_NOISE: f64 = 1e-14;
const MAX_NODES: usize = 32 * NODES;

/// Cumulative radial mass `M_H(r) = n_a V_B ∫₀^r H(s) s^{n_a−1} ds` on a log grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassTable {
    pub nodes: Vec<f64>,
    pub mass: Vec<f64>,
    /// `M_H(∞)`.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportMap1D {
    pub domain: WeightedDomain,
    pub source: RadialProfile,
    pub target: RadialProfile,
    pub source_table: MassTable,
    pub target_table: MassTable,
    /// `ψ` at the source nodes.
    pub psi: Vec<f64>,
    /// `d ln ψ / d ln r` at the source nodes.
    pub log_slope: Vec<f64>,
    /// Leading nodes where `ψ` was solved for; the rest carry it constantly.
    pub resolved: usize,
}

fn density_weight(dom: &WeightedDomain, h: &RadialProfile, r: f64) -> f64 {
    let v = h.value(r);
    if v == 0.0 {
        0.0
    } else {
        dom.ball_perimeter() * v * r.powf(dom.n_a() - 1.0)
    }
}

fn outer_radius(h: &RadialProfile) -> f64 {
    let support = h.support_radius();
    if support.is_finite() {
        support
    } else {
        crate::verifier::characteristic_radius(h) * 10f64.powf(DECADES)
    }
}

/// Log-spaced radii; a compact support gets half of them log-spaced in the
/// distance to its edge, where the rearrangement is steepest.
fn table_nodes(h: &RadialProfile) -> Vec<f64> {
    let top = outer_radius(h);
    let lo = top * 10f64.powf(-2.0 * DECADES);
    if !h.support_radius().is_finite() {
        return RadialProfile::log_knots(lo, top, NODES);
    }
    let half = NODES / 2;
    let mut nodes = RadialProfile::log_knots(lo, 0.5 * top, half);
    let edge = RadialProfile::log_knots(lo, 0.5 * top, half);
    nodes.extend(edge.iter().rev().skip(1).map(|d| top - d));
    nodes.push(top);
    nodes
}

fn build_table(dom: &WeightedDomain, h: &RadialProfile, extra: &[f64]) -> Result<MassTable> {
    let mut nodes = table_nodes(h);
    let (lo, top) = (nodes[0], nodes[nodes.len() - 1]);
    nodes.extend(h.breakpoints().into_iter().chain(extra.iter().copied()).filter(|&b| b > lo && b < top));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|b, a| *b - *a <= 1e-12 * *b);
    let w = |r: f64| density_weight(dom, h, r);
    let mut mass = Vec::with_capacity(nodes.len());
    let mut acc = integrate_floor(&w, 0.0, nodes[0], TABLE_TOL, CELL_FLOOR)?.value;
    mass.push(acc);
    for pair in nodes.windows(2) {
        acc += integrate_floor(&w, pair[0], pair[1], TABLE_TOL, CELL_FLOOR)?.value;
        mass.push(acc);
    }
    let total = if h.support_radius().is_finite() { acc } else { power_integral(dom, h, 1.0, TABLE_TOL)? };
    Ok(MassTable { nodes, mass, total })
}

impl MassTable {
    /// Index `j` with `mass[j] ≤ m < mass[j+1]` (clamped).
    fn bracket(&self, m: f64) -> usize {
        self.mass.partition_point(|&v| v <= m).saturating_sub(1).min(self.nodes.len() - 2)
    }
}

/// Solve `M_H(x) = m` by safeguarded Newton on the bracketing table cell.
fn invert(dom: &WeightedDomain, h: &RadialProfile, table: &MassTable, m: f64) -> Result<f64> {
    let w = |r: f64| density_weight(dom, h, r);
    if m <= table.mass[0] {
        // near the origin H is flat, M ∝ r^{n_a}
        let r0 = table.nodes[0];
        return Ok(r0 * (m / table.mass[0]).max(0.0).powf(1.0 / dom.n_a()));
    }
    let last = table.nodes.len() - 1;
    let (mut lo, mut hi, base) = if m >= table.mass[last] {
        if h.support_radius().is_finite() {
            return Ok(table.nodes[last]);
        }
        // walk out into the tail; mass at rounding level past the total stops the walk
        let mut hi = table.nodes[last] * 2.0;
        let mut reached = table.mass[last];
        loop {
            let next = table.mass[last] + integrate_floor(&w, table.nodes[last], hi, TABLE_TOL, CELL_FLOOR)?.value;
            if next >= m {
                break;
            }
            if next <= reached * (1.0 + 1e-15) && hi > 4.0 * table.nodes[last] {
                return Ok(hi / 2.0);
            }
            reached = next;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Divergence("tail mass inversion ran off to infinity".into()));
            }
        }
        (table.nodes[last], hi, table.mass[last])
    } else {
        let j = table.bracket(m);
        (table.nodes[j], table.nodes[j + 1], table.mass[j])
    };
    let left = lo;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = base + integrate_floor(&w, left, x, TABLE_TOL, CELL_FLOOR)?.value - m;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = w(x);
        let newton = x - f / d;
        let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

fn check_unit_mass(table: &MassTable, name: &str) -> Result<()> {
    if (table.total - 1.0).abs() > MASS_TOL {
        return Err(Error::Normalization(format!("∫ {name} σ = {}, expected 1", table.total)));
    }
    Ok(())
}

/// The Brenier map pushing `F σ` to `G σ` for radial densities, Euclidean norm.
pub fn radial_brenier(dom: &WeightedDomain, source: &RadialProfile, target: &RadialProfile) -> Result<TransportMap1D> {
    if !dom.norm().is_euclidean() {
        return Err(Error::Unsupported(
            "radial rearrangement is the Brenier map only for the Euclidean norm".into(),
        ));
    }
    let source_table = build_table(dom, source, &[])?;
    let target_table = build_table(dom, target, &[])?;
    check_unit_mass(&source_table, "F")?;
    check_unit_mass(&target_table, "G")?;
    let na = dom.n_a();
    let mut psi: Vec<f64> = Vec::with_capacity(source_table.nodes.len());
    let mut log_slope = Vec::with_capacity(source_table.nodes.len());
    // past this mass the target quantile is lost to rounding in 1 − m
    let ceiling = target_table.total * (1.0 - 1e-14);
    let mut resolved = 0;
    for (&r, &m) in source_table.nodes.iter().zip(&source_table.mass) {
        if m >= ceiling && !psi.is_empty() {
            let last = psi[psi.len() - 1];
            psi.push(last);
            log_slope.push(0.0);
            continue;
        }
        resolved += 1;
        let s = invert(dom, target, &target_table, m)?;
        psi.push(s);
        // d ln ψ / d ln r = F(r) r^{n_a} / (G(ψ) ψ^{n_a})
        let slope = source.value(r) / target.value(s) * (r / s).powf(na);
        log_slope.push(slope);
    }
    repair_slopes(&source_table.nodes, &psi, &mut log_slope);
    let mut map = TransportMap1D {
        domain: dom.clone(),
        source: source.clone(),
        target: target.clone(),
        source_table,
        target_table,
        psi,
        log_slope,
        resolved,
    };
    map.refine()?;
    Ok(map)
}

/// Cubic Hermite on `[x0, x1]` in `(ln r, ln ψ)`: `(ln ψ, d ln ψ / d ln r)`.
fn hermite(x: [f64; 2], y: [f64; 2], d: [f64; 2], u: f64) -> (f64, f64) {
    let h = x[1] - x[0];
    let t = (u - x[0]) / h;
    let (t2, t3) = (t * t, t * t * t);
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y[0] + (t3 - 2.0 * t2 + t) * h * d[0] + (-2.0 * t3 + 3.0 * t2) * y[1] + (t3 - t2) * h * d[1];
    let dv = ((6.0 * t2 - 6.0 * t) * (y[0] - y[1])) / h + (3.0 * t2 - 4.0 * t + 1.0) * d[0] + (3.0 * t2 - 2.0 * t) * d[1];
    (v, dv)
}

/// Replace non-finite log-slopes (where a density vanishes) with the harmonic
/// mean of the neighbouring secants, which keeps the interpolant monotone.
fn repair_slopes(nodes: &[f64], psi: &[f64], slope: &mut [f64]) {
    let n = nodes.len();
    let secant = |i: usize| (psi[i + 1].ln() - psi[i].ln()) / (nodes[i + 1].ln() - nodes[i].ln());
    for i in 0..n {
        if slope[i].is_finite() && slope[i] >= 0.0 {
            continue;
        }
        slope[i] = match (i.checked_sub(1).map(secant), (i + 1 < n).then(|| secant(i))) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => 2.0 * a * b / (a + b),
            (Some(a), None) => a.max(0.0),
            (None, Some(b)) => b.max(0.0),
            _ => 0.0,
        };
    }
}

impl TransportMap1D {
    /// `ψ(r)`: cubic Hermite in `(ln r, ln ψ)` between nodes, linear below the
    /// first node, constant past the source support.
    pub fn psi(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// `ψ′(r)` of the interpolant.
    pub fn psi_derivative(&self, r: f64) -> f64 {
        self.eval(r).1
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        let x = &self.source_table.nodes;
        let n = x.len();
        if r <= x[0] {
            let c = self.psi[0] / x[0];
            return (c * r, c);
        }
        if r >= x[n - 1] {
            return (self.psi[n - 1], 0.0);
        }
        let i = x.partition_point(|&v| v <= r).saturating_sub(1).min(n - 2);
        let (y, dy) = hermite(
            [x[i].ln(), x[i + 1].ln()],
            [self.psi[i].ln(), self.psi[i + 1].ln()],
            [self.log_slope[i], self.log_slope[i + 1]],
            r.ln(),
        );
        let v = y.exp();
        (v, v * dy / r)
    }

    /// Bisect cells (in `ln r`) whose interpolated midpoint misses the exact
    /// rearrangement by more than `REFINE_TOL`, until none do.
    fn refine(&mut self) -> Result<()> {
        let dom = self.domain.clone();
        let na = dom.n_a();
        let w = |r: f64| density_weight(&dom, &self.source, r);
        let mut open = vec![true; self.psi.len() - 1];
        // the last sliver of mass moves ψ a lot but weighs nothing
        let far = self.target_table.total - REFINE_TAIL;
        for _ in 0..REFINE_PASSES {
            if !open.iter().any(|&o| o) || self.psi.len() > MAX_NODES {
                break;
            }
            let t = &self.source_table;
            let (mut nodes, mut mass) = (vec![t.nodes[0]], vec![t.mass[0]]);
            let (mut psi, mut slope) = (vec![self.psi[0]], vec![self.log_slope[0]]);
            let mut next_open = Vec::with_capacity(open.len());
            for i in 0..open.len() {
                let mut split = None;
                if open[i] && i + 1 < self.resolved && t.mass[i + 1] - t.mass[i] > 1e-13 && t.mass[i + 1] < far {
                    let (x0, x1) = (t.nodes[i].ln(), t.nodes[i + 1].ln());
                    let mid = 0.5 * (x0 + x1);
                    let r = mid.exp();
                    let m = t.mass[i] + integrate_floor(&w, t.nodes[i], r, TABLE_TOL, CELL_FLOOR)?.value;
                    let s = invert(&dom, &self.target, &self.target_table, m)?;
                    let d = self.source.value(r) / self.target.value(s) * (r / s).powf(na);
                    let (y, _) = hermite([x0, x1], [self.psi[i].ln(), self.psi[i + 1].ln()], [self.log_slope[i], self.log_slope[i + 1]], mid);
                    // rounding in m moves ln ψ by δm / (dM_G / d ln ψ)
                    let noise = MASS_NOISE / (density_weight(&dom, &self.target, s) * s);
                    if (y - s.ln()).abs() > REFINE_TOL + noise && d.is_finite() && s > self.psi[i] && s < self.psi[i + 1] {
                        split = Some((r, m, s, d));
                    }
                }
                if let Some((r, m, s, d)) = split {
                    nodes.push(r);
                    mass.push(m);
                    psi.push(s);
                    slope.push(d);
                    next_open.extend([true, true]);
                } else {
                    next_open.push(false);
                }
                nodes.push(t.nodes[i + 1]);
                mass.push(t.mass[i + 1]);
                psi.push(self.psi[i + 1]);
                slope.push(self.log_slope[i + 1]);
            }
            let added = nodes.len() - t.nodes.len();
            self.resolved += added;
            self.source_table.nodes = nodes;
            self.source_table.mass = mass;
            self.psi = psi;
            self.log_slope = slope;
            open = next_open;
        }
        Ok(())
    }

    /// `M_F(r)` from the table plus a quadrature over the last cell.
    pub fn source_mass(&self, r: f64) -> Result<f64> {
        mass_at(&self.domain, &self.source, &self.source_table, r)
    }

    /// `M_G(r)`.
    pub fn target_mass(&self, r: f64) -> Result<f64> {
        mass_at(&self.domain, &self.target, &self.target_table, r)
    }

    /// Radius where the source has accumulated mass `m`.
    pub fn source_quantile(&self, m: f64) -> Result<f64> {
        invert(&self.domain, &self.source, &self.source_table, m)
    }

    /// Radius where the target has accumulated mass `m`.
    pub fn target_quantile(&self, m: f64) -> Result<f64> {
        invert(&self.domain, &self.target, &self.target_table, m)
    }

    /// Largest `|M_F(r) − M_G(ψ(r))|` over the table nodes.
    pub fn mass_balance_error(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (&m, &s) in self.source_table.mass.iter().zip(&self.psi) {
            worst = worst.max((m - self.target_mass(s)?).abs());
        }
        Ok(worst)
    }

    /// Largest `|ψ(r_k) − M_G^{−1}(k/(count+1))|` over `count` source quantiles `r_k`.
    pub fn quantile_error(&self, count: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 1..=count {
            let m = k as f64 / (count + 1) as f64;
            let r = self.source_quantile(m)?;
            let want = self.target_quantile(m)?;
            worst = worst.max((self.psi(r) - want).abs() / want);
        }
        Ok(worst)
    }

    /// `ψ` is nondecreasing on the table and strictly increasing wherever the
    /// source mass grows by more than rounding.
    pub fn is_monotone(&self) -> bool {
        let m = &self.source_table.mass;
        self.psi.windows(2).enumerate().all(|(i, p)| {
            p[1] >= p[0] && (i + 1 >= self.resolved || m[i + 1] - m[i] <= 1e-13 || p[1] > p[0])
        })
    }

    /// `(∫ b(ψ(r)) dM_F, ∫ b dM_G)`.
    pub fn push_forward(&self, b: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
        let dom = &self.domain;
        let pulled = |r: f64| {
            let w = density_weight(dom, &self.source, r);
            if w == 0.0 {
                0.0
            } else {
                b(self.psi(r)) * w
            }
        };
        let direct = |r: f64| {
            let w = density_weight(dom, &self.target, r);
            if w == 0.0 {
                0.0
            } else {
                b(r) * w
            }
        };
        let lhs = halfline(&pulled, &self.source, TABLE_TOL)?;
        let rhs = halfline(&direct, &self.target, TABLE_TOL)?;
        Ok((lhs, rhs))
    }
}

fn halfline(f: &dyn Fn(f64) -> f64, shape: &RadialProfile, tol: f64) -> Result<f64> {
    Ok(crate::quadrature::integrate_halfline_with(f, &shape.hints(), tol)?.value)
}

fn mass_at(dom: &WeightedDomain, h: &RadialProfile, table: &MassTable, r: f64) -> Result<f64> {
    let w = |s: f64| density_weight(dom, h, s);
    if r <= table.nodes[0] {
        return Ok(integrate_floor(&w, 0.0, r.max(0.0), TABLE_TOL, CELL_FLOOR)?.value);
    }
    let last = table.nodes.len() - 1;
    let j = table.nodes.partition_point(|&v| v <= r).saturating_sub(1).min(last);
    Ok(table.mass[j] + integrate_floor(&w, table.nodes[j], r, TABLE_TOL, CELL_FLOOR)?.value)
}

/// `ψ₂ ∘ ψ₁` against `ψ₃` on `count` source quantiles (relative error).
pub fn composition_error(first: &TransportMap1D, second: &TransportMap1D, direct: &TransportMap1D, count: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 1..=count {
        let r = first.source_quantile(k as f64 / (count + 1) as f64)?;
        let composed = second.psi(first.psi(r));
        let want = direct.psi(r);
        worst = worst.max((composed - want).abs() / want);
    }
    Ok(worst)
}

/// Both sides of the pointwise inequality behind the transport lemma,
/// `(1/(1−γ)) A^{a(1−γ)} (det M)^{1−γ} ≤ (1 − n_a(1−γ))/(1−γ) + aA + Tr M`,
/// for diagonal `M`; `a` is the total weight exponent, `n_a = dim M + a`.
pub fn amgm_slack(big_a: f64, m_diag: &[f64], a: f64, gamma: f64) -> Result<(f64, f64)> {
    let na = m_diag.len() as f64 + a;
    check_gamma(na, gamma)?;
    if !(big_a > 0.0) || m_diag.is_empty() || m_diag.iter().any(|m| !(*m >= 0.0)) || !(a >= 0.0) {
        return Err(Error::Parameter("need A > 0, a ≥ 0 and a non-empty non-negative diagonal".into()));
    }
    let c = 1.0 - gamma;
    let det: f64 = m_diag.iter().product();
    let lhs = big_a.powf(a * c) * det.powf(c) / c;
    let rhs = (1.0 - na * c) / c + a * big_a + m_diag.iter().sum::<f64>();
    Ok((lhs, rhs))
}

/// The `γ > 1` form of the pointwise inequality,
/// `(A^{a(1−γ)} det M^{1−γ} + a(γ−1) A + (γ−1) Tr M)/(1 + n_a(γ−1)) ≥ 1`;
/// returns its left side.
pub fn amgm_rearranged(big_a: f64, m_diag: &[f64], a: f64, gamma: f64) -> Result<f64> {
    let na = m_diag.len() as f64 + a;
    if !(gamma > 1.0) {
        return Err(Error::Parameter(format!("the rearranged form needs γ > 1, got {gamma}")));
    }
    let (lhs, _) = amgm_slack(big_a, m_diag, a, gamma)?;
    let g = gamma - 1.0;
    // lhs = −A^{a(1−γ)} det M^{1−γ}/(γ−1)
    Ok((-lhs * g + a * g * big_a + g * m_diag.iter().sum::<f64>()) / (1.0 + na * g))
}

fn check_gamma(na: f64, gamma: f64) -> Result<()> {
    if !(gamma >= 1.0 - 1.0 / na - 1e-15 && gamma != 1.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!("need γ ≥ 1 − 1/n_a = {} and γ ≠ 1, got {gamma}", 1.0 - 1.0 / na)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub gamma: f64,
    /// `(1/(1−γ)) ∫ G^γ σ`.
    pub lhs: f64,
    /// `((1 − n_a(1−γ))/(1−γ)) ∫ F^γ σ − ∫ ∇F^γ·∇φ σ`.
    pub rhs: f64,
    pub gap: f64,
    /// `∫ F^γ · (pointwise slack) σ`, the integrated AM–GM slack.
    pub amgm: f64,
    /// `−∫ ∇F^γ·∇φ σ − ∫ F^γ L φ σ`, the integration-by-parts remainder (≥ 0).
    pub boundary: f64,
    /// `|gap − amgm − boundary|`.
    pub residual: f64,
}

/// Exponent of `F ∼ (R − r)^κ` at the edge of a compact support.
fn edge_power(f: &RadialProfile) -> Option<f64> {
    match &f.shape {
        Shape::Spline { tail: Tail::Compact { kappa, .. }, .. } => Some(*kappa),
        Shape::Gn { alpha, .. } if *alpha < 1.0 => Some(1.0 / (1.0 - alpha)),
        Shape::Perturbed { base, center, width, .. } if base.support_radius() > center + width => edge_power(base),
        _ => None,
    }
}

fn hints_with_edge(f: &RadialProfile, exponent: Option<f64>) -> Hints {
    let mut hints = f.hints();
    hints.edge_exponent = exponent.filter(|e| *e > -1.0 && e.fract() != 0.0);
    hints
}

/// Both sides of the transport lemma
/// `(1/(1−γ)) ∫ G^γ ≤ ((1 − n_a(1−γ))/(1−γ)) ∫ F^γ − ∫ ∇F^γ·∇φ`
/// for unit-mass radial densities, with `∇F^γ·∇φ = (F^γ)′(r) ψ(r)`, and the
/// decomposition of the gap into integrated AM–GM slack plus boundary term.
pub fn lemma21_check(dom: &WeightedDomain, gamma: f64, map: &TransportMap1D, tol: f64) -> Result<LemmaReport> {
    let na = dom.n_a();
    check_gamma(na, gamma)?;
    let f = &map.source;
    let g = &map.target;
    let c = 1.0 - gamma;
    // F^γ has edge exponent κγ when F vanishes like (R − r)^κ
    let power = |h: &RadialProfile| {
        let hints = hints_with_edge(h, edge_power(h).map(|k| k * gamma));
        dom.radial_moment(&|r| h.value(r).abs().powf(gamma), &hints, 0.0, tol)
    };
    let int_g = power(g)?;
    let int_f = power(f)?;
    // the AM–GM slack vanishes identically on exact pairs, so errors are
    // measured against the natural scale ∫ F^γ rather than its own size
    let scale = Some(int_f.abs().max(int_g.abs()) / dom.ball_perimeter());
    let moment = |h: &dyn Fn(f64) -> f64, hints: &Hints| {
        let hints = Hints { scale, ..hints.clone() };
        dom.radial_moment(h, &hints, 0.0, tol)
    };
    let mut d_hints = hints_with_edge(f, edge_power(f).map(|k| k * gamma - 1.0));
    // ψ is frozen near the edge, so F^γ sets the edge behaviour
    let mut f_hints = hints_with_edge(f, edge_power(f).map(|k| k * gamma));
    // ψ′ is only continuous across the table nodes
    f_hints.breakpoints.extend(&map.source_table.nodes[..map.resolved]);
    d_hints.breakpoints.extend(&map.source_table.nodes[..map.resolved]);
    // (F^γ)′ ψ
    let transport = moment(
        &|r| {
            let v = f.value(r);
            if v <= 0.0 {
                0.0
            } else {
                gamma * v.powf(gamma - 1.0) * f.derivative(r) * map.psi(r)
            }
        },
        &d_hints,
    )?;
    let lhs = int_g / c;
    let rhs = (1.0 - na * c) / c * int_f - transport;
    // L φ = ψ′ + (n_a − 1) ψ/r, the weighted Laplacian of the radial potential
    let laplacian = moment(
        &|r| {
            let v = f.value(r);
            if v <= 0.0 || r == 0.0 {
                0.0
            } else {
                v.powf(gamma) * (map.psi_derivative(r) + (na - 1.0) * map.psi(r) / r)
            }
        },
        &f_hints,
    )?;
    let n = dom.n();
    let a_total = na - n as f64;
    // past the last resolved node ψ is frozen and carries no mass
    let edge = map.source_table.nodes[map.resolved - 1];
    let amgm = moment(
        &|r| {
            let v = f.value(r);
            if v <= 0.0 || r == 0.0 || r >= edge {
                return 0.0;
            }
            let s = map.psi(r);
            let big_a = s / r;
            let mut diag = vec![big_a; n];
            diag[0] = map.psi_derivative(r).max(0.0);
            match amgm_slack(big_a, &diag, a_total, gamma) {
                Ok((l, rr)) if l.is_finite() => v.powf(gamma) * (rr - l),
                _ => f64::NAN,
            }
        },
        &f_hints,
    )?;
    let boundary = -transport - laplacian;
    let gap = rhs - lhs;
    Ok(LemmaReport { gamma, lhs, rhs, gap, amgm, boundary, residual: (gap - amgm - boundary).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormSpec;
    use crate::profiles::normalize;
    use crate::verifier::{random_profile, sample_rng, ProfileClass};

    fn dom(n: usize, a: f64) -> WeightedDomain {
        WeightedDomain::half_space(n, a, NormSpec::euclidean(n)).unwrap()
    }

    fn bump(dom: &WeightedDomain, radius: f64) -> RadialProfile {
        let f = RadialProfile::new(Shape::Gn { sigma: radius * radius, alpha: 0.5, q: 2.0 });
        normalize(dom, &f, 1.0, 1e-13).unwrap()
    }

    #[test]
    fn identity_and_dilation() {
        let d = dom(2, 1.0);
        let f = bump(&d, 1.0);
        let map = radial_brenier(&d, &f, &f).unwrap();
        for r in [1e-3, 0.1, 0.5, 0.9, 0.999] {
            assert!((map.psi(r) - r).abs() < 1e-9 * r.max(1e-3), "{r}: {}", map.psi(r));
        }
        let lambda = 1.7;
        // f(r/λ) renormalized is the dilate by λ
        let g = normalize(&d, &f.dilate(1.0 / lambda), 1.0, 1e-13).unwrap();
        let map = radial_brenier(&d, &f, &g).unwrap();
        for r in [1e-3, 0.1, 0.5, 0.9] {
            assert!((map.psi(r) / (lambda * r) - 1.0).abs() < 1e-8, "{r}: {}", map.psi(r));
        }
        assert!(map.is_monotone());
        assert!(map.mass_balance_error().unwrap() < 1e-9);
    }

    #[test]
    fn pushes_moments_forward() {
        let d = dom(3, 0.5);
        let f = bump(&d, 1.0);
        let g = normalize(&d, &RadialProfile::new(Shape::Gaussian { rate: 1.0, q: 2.0 }), 1.0, 1e-13).unwrap();
        let map = radial_brenier(&d, &f, &g).unwrap();
        for k in [1, 2] {
            let (l, r) = map.push_forward(&|s: f64| s.powi(k)).unwrap();
            assert!((l - r).abs() < 1e-7 * r, "k={k}: {l} vs {r}");
        }
        assert!(map.quantile_error(20).unwrap() < 1e-9);
    }

    #[test]
    fn composition_matches_direct_map() {
        let d = dom(2, 1.0);
        let f = bump(&d, 1.0);
        let g = normalize(&d, &RadialProfile::new(Shape::Gn { sigma: 1.0, alpha: 0.8, q: 2.0 }), 1.0, 1e-13).unwrap();
        let h = normalize(&d, &RadialProfile::new(Shape::Gaussian { rate: 2.0, q: 1.5 }), 1.0, 1e-13).unwrap();
        let fg = radial_brenier(&d, &f, &g).unwrap();
        let gh = radial_brenier(&d, &g, &h).unwrap();
        let fh = radial_brenier(&d, &f, &h).unwrap();
        assert!(composition_error(&fg, &gh, &fh, 20).unwrap() < 1e-7);
    }

    #[test]
    fn non_euclidean_norm_is_refused() {
        let d = WeightedDomain::half_space(2, 1.0, NormSpec::lq(3.0, 2).unwrap()).unwrap();
        let f = bump(&d, 1.0);
        assert!(matches!(radial_brenier(&d, &f, &f), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lemma_is_tight_on_the_identity_at_the_critical_exponent() {
        let d = dom(2, 1.0);
        let f = bump(&d, 1.0);
        let map = radial_brenier(&d, &f, &f).unwrap();
        let r = lemma21_check(&d, 1.0 - 1.0 / d.n_a(), &map, 1e-12).unwrap();
        assert!(r.gap.abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn lemma_holds_on_random_pairs_and_decomposes() {
        let d = dom(2, 1.0);
        let class = ProfileClass { n_a: d.n_a(), p: 2.0, min_exponent: 1.0, compact: true };
        for i in 0..4 {
            let mut rng = sample_rng(11, i);
            let f = normalize(&d, &random_profile(&mut rng, class).unwrap(), 1.0, 1e-13).unwrap();
            let g = normalize(&d, &random_profile(&mut rng, class).unwrap(), 1.0, 1e-13).unwrap();
            let map = radial_brenier(&d, &f, &g).unwrap();
            for gamma in [1.0 - 1.0 / d.n_a(), 1.2, 2.0] {
                let r = lemma21_check(&d, gamma, &map, 1e-10).unwrap();
                assert!(r.gap >= -1e-8, "{i} γ={gamma}: {r:?}");
                assert!(r.amgm >= -1e-8 && r.boundary >= -1e-6, "{i} γ={gamma}: {r:?}");
                assert!(r.residual < 1e-6, "{i} γ={gamma}: {r:?}");
            }
        }
    }

    #[test]
    fn pointwise_inequality() {
        let (l, r) = amgm_slack(1.0, &[1.0, 1.0], 1.0, 0.8).unwrap();
        assert!((l - r).abs() < 1e-14);
        let (l, r) = amgm_slack(2.0, &[1.0, 1.0], 1.0, 0.8).unwrap();
        assert!(r - l > 1e-3);
        assert!(amgm_rearranged(2.0, &[1.0, 3.0], 1.5, 2.0).unwrap() >= 1.0);
        assert!((amgm_rearranged(1.0, &[1.0, 1.0], 1.5, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(amgm_slack(1.0, &[1.0], 0.0, 1.0).is_err());
        assert!(amgm_slack(1.0, &[1.0, 1.0], 0.0, 0.2).is_err());
    }
}
