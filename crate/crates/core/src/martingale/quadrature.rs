//! Adaptive Gauss–Kronrod (7/15) quadrature with infinite-interval maps.

use serde::{Deserialize, Serialize};

use super::MartingaleError;

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
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

fn kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// `∫_a^b f` to absolute-or-relative tolerance `tol`; either bound may be
/// infinite.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Quadrature, MartingaleError> {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(&f, a, b, tol),
        // x = a + u/(1−u), u ∈ [0, 1)
        (true, false) => adaptive(
            &|u: f64| {
                let w = 1.0 - u;
                f(a + u / w) / (w * w)
            },
            0.0,
            1.0,
            tol,
        ),
        (false, true) => adaptive(
            &|u: f64| {
                let w = 1.0 - u;
                f(b - u / w) / (w * w)
            },
            0.0,
            1.0,
            tol,
        ),
        // x = u/(1−u²), u ∈ (−1, 1)
        (false, false) => adaptive(
            &|u: f64| {
                let w = 1.0 - u * u;
                f(u / w) * (1.0 + u * u) / (w * w)
            },
            -1.0,
            1.0,
            tol,
        ),
    }
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature, MartingaleError> {
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = kronrod(f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut evals = 15;
    loop {
        let total: f64 = intervals.iter().map(|i| i.2).sum();
        let err: f64 = intervals.iter().map(|i| i.3).sum();
        if !total.is_finite() {
            return Err(MartingaleError::Quadrature("integrand is not finite".into()));
        }
        if err <= tol.max(tol * total.abs()) {
            return Ok(Quadrature {
                value: total,
                error: err,
                evals,
            });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(MartingaleError::Quadrature(format!(
                "no convergence: error estimate {err:e} after {evals} evaluations"
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(k, _)| k)
            .expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (v, e) = kronrod(f, l, h);
            intervals.push((l, h, v, e));
        }
        evals += 30;
    }
}
