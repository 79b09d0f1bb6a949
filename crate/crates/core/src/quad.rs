//! Adaptive Gauss–Kronrod (7/15) quadrature for small complex vectors.
//!
//! Only used by the reference routes that cross-check closed forms.

use crate::ops::{C64, ZERO};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn rule<const N: usize>(f: &impl Fn(f64) -> [C64; N], a: f64, b: f64) -> ([C64; N], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [ZERO; N];
    let mut g = [ZERO; N];
    let center = f(c);
    for i in 0..N {
        k[i] = center[i] * WGK[7];
        g[i] = center[i] * WG[3];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let (lo, hi) = (f(c - dx), f(c + dx));
        for i in 0..N {
            let s = lo[i] + hi[i];
            k[i] += s * WGK[j];
            if j % 2 == 1 {
                g[i] += s * WG[j / 2];
            }
        }
    }
    let mut err = 0.0f64;
    for i in 0..N {
        k[i] *= h;
        g[i] *= h;
        err = err.max((k[i] - g[i]).norm());
    }
    (k, err)
}

/// Integrate `f` over `[a, b]` to absolute accuracy `tol` (max-norm over
/// components), splitting intervals until each local error estimate is
/// below its share of the tolerance.
pub fn integrate<const N: usize>(f: impl Fn(f64) -> [C64; N], a: f64, b: f64, tol: f64) -> [C64; N] {
    let mut total = [ZERO; N];
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = rule(&f, lo, hi);
        let share = tol * (hi - lo) / (b - a);
        if err <= share.max(f64::EPSILON * 16.0) || depth >= 48 {
            for i in 0..N {
                total[i] += val[i];
            }
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillatory_exponential() {
        // ∫₀^∞ e^{(-κ + iw)t} dt = 1/(κ − iw)
        let (kappa, w) = (0.3, 7.0);
        let got = integrate(|t| [C64::new(-kappa, w).scale(t).exp()], 0.0, 120.0 / kappa, 1e-13)[0];
        let want = C64::new(1.0, 0.0) / C64::new(kappa, -w);
        assert!((got - want).norm() < 1e-11, "{got} vs {want}");
    }
}
