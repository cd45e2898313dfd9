//! Special functions used throughout: Bessel J/Y of order 0 and 1 (backed by
//! `libm`), modified Bessel I0/I1, the exponential integral E1, and zeros of
//! J0/J1.

use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[inline]
pub fn j0(x: f64) -> f64 {
    libm::j0(x)
}

#[inline]
pub fn j1(x: f64) -> f64 {
    libm::j1(x)
}

#[inline]
pub fn y0(x: f64) -> f64 {
    libm::y0(x)
}

#[inline]
pub fn y1(x: f64) -> f64 {
    libm::y1(x)
}

/// 2π J1(q)/q, the Fourier transform of the indicator of the unit disk;
/// equals π at q = 0.
pub fn disk_hat(q: f64) -> f64 {
    let q = q.abs();
    if q < 1e-4 {
        // J1(q)/q = 1/2 - q²/16 + q⁴/384
        let q2 = q * q;
        2.0 * PI * (0.5 - q2 / 16.0 + q2 * q2 / 384.0)
    } else {
        2.0 * PI * j1(q) / q
    }
}

/// Power series for I_n, n ∈ {0, 1}. All terms are positive so the series is
/// accurate to rounding for every finite result (x ≲ 713).
fn bessel_i_series(n: u32, x: f64) -> f64 {
    let x = x.abs();
    let h = 0.25 * x * x;
    let mut term = if n == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= h / (k as f64 * (k + n) as f64);
        sum += term;
        if term <= sum * 1e-17 || !sum.is_finite() {
            break;
        }
    }
    sum
}

pub fn i0(x: f64) -> f64 {
    bessel_i_series(0, x)
}

/// I1 is odd.
pub fn i1(x: f64) -> f64 {
    bessel_i_series(1, x).copysign(x)
}

/// I1(x)/I0(x) for x > 0 through the continued fraction
/// I1/I0 = 1/(2/x + 1/(4/x + 1/(6/x + …))), evaluated with modified Lentz.
/// Stays finite where I0 and I1 overflow.
pub fn i1_over_i0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..2_000_000u64 {
        let b = 2.0 * k as f64 / x;
        d += b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

/// Exponential integral E1(x) = ∫_x^∞ e^{-t}/t dt for x > 0.
pub fn e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires x > 0");
    if x < 1.0 {
        -EULER_GAMMA - x.ln() + ein(x)
    } else {
        e1_continued_fraction(x)
    }
}

/// E1(s) + ln s, the entire part −γ + Ein(s). Finite at s = 0.
pub fn e1_plus_log(s: f64) -> f64 {
    if s < 1.0 {
        -EULER_GAMMA + ein(s)
    } else {
        e1_continued_fraction(s) + s.ln()
    }
}

/// Ein(s) = Σ_{k≥1} (−1)^{k+1} s^k/(k·k!), used for s < 1.
fn ein(s: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..60 {
        term *= -s / k as f64;
        let add = -term / k as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn e1_continued_fraction(x: f64) -> f64 {
    // E1(x) = e^{-x} / (x + 1 - 1²/(x + 3 - 2²/(x + 5 - …)))
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// k-th positive zero (k ≥ 1) of J0: McMahon start, Newton polish.
pub fn j0_zero(k: usize) -> f64 {
    assert!(k >= 1);
    let beta = (k as f64 - 0.25) * PI;
    let mut x = beta + 1.0 / (8.0 * beta) - 124.0 / (3.0 * (8.0 * beta).powi(3));
    for _ in 0..20 {
        // J0' = −J1
        let dx = j0(x) / j1(x);
        x += dx;
        if dx.abs() < 1e-15 * x {
            break;
        }
    }
    x
}

/// k-th positive zero (k ≥ 1) of J1.
pub fn j1_zero(k: usize) -> f64 {
    assert!(k >= 1);
    let beta = (k as f64 + 0.25) * PI;
    let mu = 4.0;
    let mut x = beta - (mu - 1.0) / (8.0 * beta) - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta).powi(3));
    for _ in 0..20 {
        // J1' = J0 − J1/x
        let d = j0(x) - j1(x) / x;
        let dx = -j1(x) / d;
        x += dx;
        if dx.abs() < 1e-15 * x {
            break;
        }
    }
    x
}
