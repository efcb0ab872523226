//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! The per-panel error is the raw `|K21 − G10|` difference, which
//! overestimates the Kronrod error on smooth panels; reported budgets are
//! therefore conservative.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::special::NeumaierSum;

// QUADPACK tables, kept at their published precision
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_300,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Outcome of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Single 21-point panel: `(kronrod, |kronrod − gauss|)`.
pub fn gauss_kronrod_21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
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

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, starting from
/// one panel per breakpoint interval and bisecting the worst panel until the
/// summed error estimate is below `max(abs_tol, rel_tol·|value|)` or the
/// evaluation budget runs out.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_evaluations: usize,
) -> Quadrature {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        let (value, error) = gauss_kronrod_21(&mut f, w[0], w[1]);
        evaluations += 21;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    // panels too narrow to split further
    let mut frozen: Vec<Panel> = Vec::new();
    loop {
        let (value, error) = totals(heap.iter().chain(frozen.iter()));
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Quadrature {
                value,
                error,
                evaluations,
                converged: true,
            };
        }
        let Some(worst) = heap.pop() else {
            return Quadrature {
                value,
                error,
                evaluations,
                converged: false,
            };
        };
        if evaluations + 42 > max_evaluations {
            heap.push(worst);
            let (value, error) = totals(heap.iter().chain(frozen.iter()));
            return Quadrature {
                value,
                error,
                evaluations,
                converged: false,
            };
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b)
            || (worst.b - worst.a) <= 1e-13 * worst.a.abs().max(worst.b.abs())
        {
            frozen.push(worst);
            continue;
        }
        let (v1, e1) = gauss_kronrod_21(&mut f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_21(&mut f, mid, worst.b);
        evaluations += 42;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
}

fn totals<'a>(panels: impl Iterator<Item = &'a Panel>) -> (f64, f64) {
    let mut value = NeumaierSum::default();
    let mut error = NeumaierSum::default();
    for p in panels {
        value.add(p.value);
        error.add(p.error);
    }
    (value.value(), error.value())
}

/// Breakpoints `a, 2a, 4a, …` up to `b` (inclusive), for integrands with
/// structure spread over several scales.
pub fn geometric_breakpoints(a: f64, b: f64) -> Vec<f64> {
    let mut pts = alloc::vec![a];
    let mut x = a;
    while x * 2.0 < b {
        x *= 2.0;
        pts.push(x);
    }
    pts.push(b);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-14);
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_exactness() {
        // Gauss 10-point is exact to degree 19, Kronrod 21-point to degree 31
        for deg in 0..=31u32 {
            let mut f = |x: f64| libm::pow(x, deg as f64);
            let (k, e) = gauss_kronrod_21(&mut f, 0.0, 1.0);
            let exact = 1.0 / (deg + 1) as f64;
            assert!((k - exact).abs() < 1e-14, "degree {deg}: {k} vs {exact}");
            if deg <= 19 {
                assert!(e < 1e-14, "degree {deg} gauss error {e}");
            }
        }
    }

    #[test]
    fn adaptive_oscillatory() {
        let q = integrate(
            libm::cos,
            &geometric_breakpoints(0.5, 300.0),
            1e-12,
            0.0,
            1_000_000,
        );
        assert!(q.converged);
        let exact = libm::sin(300.0) - libm::sin(0.5);
        assert!((q.value - exact).abs() < 1e-11);
    }

    #[test]
    fn adaptive_endpoint_peak() {
        // ∫_ε^1 x^{-1/2} dx with a steep start
        let eps = 1e-8;
        let q = integrate(|x| 1.0 / libm::sqrt(x), &[eps, 1.0], 1e-10, 0.0, 1_000_000);
        assert!(q.converged);
        assert!((q.value - 2.0 * (1.0 - libm::sqrt(eps))).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let q = integrate(|x| libm::sin(1.0 / x), &[1e-6, 1.0], 1e-14, 0.0, 200);
        assert!(!q.converged);
        assert!(q.evaluations <= 200);
    }
}
