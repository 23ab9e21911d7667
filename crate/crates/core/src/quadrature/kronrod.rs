//! Adaptive 21-point Gauss–Kronrod integration on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::QuadratureResult;
use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_059,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_745_703,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// 10-point Gauss weights for the odd-indexed Kronrod nodes
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
    pub l1: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One GK21 panel with the QUADPACK error heuristic.
pub(crate) fn gk21(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut l1 = fc.abs() * WGK[10];
    let mut f1 = [0.0; 10];
    let mut f2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        f1[j] = lo;
        f2[j] = hi;
        kronrod += WGK[j] * (lo + hi);
        l1 += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((f1[j] - mean).abs() + (f2[j] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let l1 = l1 * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    // a jump between an endpoint and the outermost node is invisible to both
    // rules; compare the endpoint values with their nearest nodes
    let gap = half.abs() * (1.0 - XGK[0]);
    for (end, node, next) in [(f(a), f1[0], f1[1]), (f(b), f2[0], f2[1])] {
        let jump = (end - node).abs();
        if end.is_finite() && jump > 10.0 * (node - next).abs() {
            error = error.max(jump * gap);
        }
    }
    let roundoff = 50.0 * f64::EPSILON * l1;
    if l1 > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && error < roundoff {
        error = roundoff;
    }
    Panel { a, b, value, error, l1 }
}

pub(crate) const MAX_SUBDIVISIONS: usize = 2000;

/// Adaptive bisection on `[a, b]` split first at `breaks`, stopping when the
/// summed error estimate drops below `tol` relative to the integral (or to a
/// small fraction of `∫|f|` when the integral cancels), or below `floor`.
pub(crate) fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
    floor: f64,
) -> Result<QuadratureResult> {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut heap: BinaryHeap<Panel> = cuts.windows(2).map(|w| gk21(f, w[0], w[1])).collect();
    let exact = |heap: &BinaryHeap<Panel>| {
        heap.iter().fold((0.0, 0.0, 0.0), |(v, e, l), p| (v + p.value, e + p.error, l + p.l1))
    };
    // running totals over the heap, re-summed before they are trusted
    let (mut value, mut error, mut l1) = exact(&heap);
    let (mut frozen_value, mut frozen_error, mut frozen_l1) = (0.0, 0.0, 0.0);
    let mut subdivisions = heap.len();
    let mut splits = 0;
    loop {
        let (total, total_error) = (frozen_value + value, frozen_error + error);
        if !total.is_finite() || !total_error.is_finite() {
            return Err(Error::Domain(format!("integrand is not finite on [{a}, {b}]")));
        }
        let target = (tol * total.abs().max(1e-3 * (frozen_l1 + l1))).max(floor);
        if total_error <= target || heap.is_empty() || splits >= MAX_SUBDIVISIONS {
            (value, error, l1) = exact(&heap);
            let (total, total_error) = (frozen_value + value, frozen_error + error);
            let target = (tol * total.abs().max(1e-3 * (frozen_l1 + l1))).max(floor);
            if total_error <= target || heap.is_empty() {
                return Ok(QuadratureResult { value: total, abs_error: total_error, subdivisions, converged: total_error <= target });
            }
            if splits >= MAX_SUBDIVISIONS {
                return Err(Error::Accuracy { value: total, abs_error: total_error, tol });
            }
        }
        let worst = heap.pop().expect("non-empty heap");
        value -= worst.value;
        error -= worst.error;
        l1 -= worst.l1;
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-14 * (worst.a.abs() + worst.b.abs()) {
            // the panel cannot be split further in floating point
            frozen_value += worst.value;
            frozen_error += worst.error;
            frozen_l1 += worst.l1;
            continue;
        }
        for panel in [gk21(f, worst.a, mid), gk21(f, mid, worst.b)] {
            value += panel.value;
            error += panel.error;
            l1 += panel.l1;
            heap.push(panel);
        }
        subdivisions += 1;
        splits += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact_on_one_panel() {
        let p = gk21(&|x| x.powi(20) - 3.0 * x.powi(7), 0.0, 1.0);
        assert!((p.value - (1.0 / 21.0 - 3.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn endpoint_singularity() {
        let r = adaptive(&|x: f64| x.powf(-0.5), 0.0, 1.0, &[], 1e-11, 0.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn breakpoints_split_the_range() {
        let r = adaptive(&|x: f64| if x < 0.3 { 1.0 } else { 0.0 }, 0.0, 1.0, &[0.3], 1e-12, 0.0).unwrap();
        assert!((r.value - 0.3).abs() < 1e-14);
    }
}
