//! Special functions and quadrature rules shared by the spectrum, bound and
//! capacity code. Everything that can overflow has a log-domain variant.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the series in its accurate range.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut t = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        t += c / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * w.ln() - w + t.ln()
}

/// ln C(n, k) for real arguments; `-inf` outside 0 <= k <= n.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    if k < 0.0 || k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0.0 || k == n {
        return 0.0;
    }
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// ln(e^a + e^b) without overflow.
#[inline]
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln Σ e^{x_i}; `-inf` for an empty or all-`-inf` input.
pub fn ln_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// ln(1 - e^x) for x <= 0.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 100_000;

/// ln P(a, x) by the power series; converges for any x but fast for x < a + 1.
pub fn ln_gamma_p_series(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    a * x.ln() - x - ln_gamma(a) + sum.ln()
}

/// ln Q(a, x) by the Lentz continued fraction; intended for x > a + 1.
pub fn ln_gamma_q_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    a * x.ln() - x - ln_gamma(a) + h.ln()
}

/// ln of the regularized lower incomplete gamma function P(a, x).
pub fn ln_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else if x < a + 1.0 {
        ln_gamma_p_series(a, x)
    } else {
        ln_one_minus_exp(ln_gamma_q_cf(a, x))
    }
}

/// ln of the regularized upper incomplete gamma function Q(a, x).
pub fn ln_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        ln_one_minus_exp(ln_gamma_p_series(a, x))
    } else {
        ln_gamma_q_cf(a, x)
    }
}

pub fn gamma_p(a: f64, x: f64) -> f64 {
    ln_gamma_p(a, x).exp()
}

pub fn gamma_q(a: f64, x: f64) -> f64 {
    ln_gamma_q(a, x).exp()
}

/// CDF of the chi-squared distribution with `k` degrees of freedom.
pub fn chi2_cdf(k: f64, x: f64) -> f64 {
    gamma_p(0.5 * k, 0.5 * x)
}

/// ln of the chi-squared survival function.
pub fn ln_chi2_sf(k: f64, x: f64) -> f64 {
    ln_gamma_q(0.5 * k, 0.5 * x)
}

/// ln of the chi-squared CDF.
pub fn ln_chi2_cdf(k: f64, x: f64) -> f64 {
    ln_gamma_p(0.5 * k, 0.5 * x)
}

/// Continued fraction of the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..GAMMA_MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    h
}

/// ln I_x(a, b) with `y = 1 - x` passed separately so that x close to 1
/// keeps its precision.
pub fn ln_beta_reg_xy(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if y <= 0.0 {
        return 0.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front + beta_cf(a, b, x).ln() - a.ln()
    } else {
        ln_one_minus_exp((ln_front + beta_cf(b, a, y).ln() - b.ln()).min(0.0))
    }
}

/// ln of the regularized incomplete beta function I_x(a, b).
pub fn ln_beta_reg(a: f64, b: f64, x: f64) -> f64 {
    ln_beta_reg_xy(a, b, x, 1.0 - x)
}

/// Gaussian tail probability Q(x) = P(Z > x).
pub fn q_func(x: f64) -> f64 {
    if x >= 0.0 {
        0.5 * gamma_q(0.5, 0.5 * x * x)
    } else {
        1.0 - 0.5 * gamma_q(0.5, 0.5 * x * x)
    }
}

/// ln Q(x), accurate deep in the tail.
pub fn ln_q_func(x: f64) -> f64 {
    if x >= 0.0 {
        -std::f64::consts::LN_2 + ln_gamma_q(0.5, 0.5 * x * x)
    } else {
        q_func(x).ln()
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// P_n(z) and its derivative by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Hermite nodes and weights for the weight e^{-x^2}.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let pim4 = PI.powf(-0.25);
    let m = (n + 1) / 2;
    let mut z = 0.0;
    for i in 0..m {
        // Initial guesses for the largest roots, then extrapolation.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::{erf, gamma};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut f = 1.0f64;
        for n in 1..30u32 {
            f *= f64::from(n);
            assert!(rel(ln_gamma(f64::from(n) + 1.0), f.ln()) < 1e-13, "n={n}");
        }
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_matches_statrs() {
        for i in 1..400 {
            let x = 0.037 * f64::from(i) * f64::from(i);
            assert!(rel(ln_gamma(x), gamma::ln_gamma(x)) < 1e-12 || (ln_gamma(x) - gamma::ln_gamma(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn series_and_continued_fraction_agree() {
        // Overlap region where both expansions converge.
        for &a in &[0.5, 1.0, 2.5, 10.0, 50.0, 300.0, 1200.0] {
            for &f in &[1.0, 1.1, 1.2, 1.5, 2.0] {
                let x = a * f + 1.0;
                let p_series = ln_gamma_p_series(a, x).exp();
                let q_cf = ln_gamma_q_cf(a, x).exp();
                assert!(rel(p_series, 1.0 - q_cf) < 1e-10, "a={a} x={x}");
                if q_cf > 1e-3 {
                    assert!(rel(1.0 - p_series, q_cf) < 1e-10, "a={a} x={x}");
                }
            }
        }
    }

    #[test]
    fn incomplete_gamma_matches_statrs() {
        for &a in &[0.5, 1.5, 4.0, 17.0, 99.5, 500.0] {
            for i in 1..60 {
                let x = a * f64::from(i) / 20.0;
                let p = gamma_p(a, x);
                let want = gamma::gamma_lr(a, x);
                assert!((p - want).abs() < 1e-12, "a={a} x={x} {p} {want}");
                let q = gamma_q(a, x);
                let want_q = gamma::gamma_ur(a, x);
                if want_q > 1e-200 {
                    assert!(rel(q, want_q) < 1e-9, "a={a} x={x} {q} {want_q}");
                }
            }
        }
    }

    #[test]
    fn incomplete_beta_matches_statrs() {
        use statrs::function::beta::beta_reg;
        for &a in &[0.5, 1.0, 3.5, 40.0, 143.5, 700.0] {
            for &b in &[0.5, 1.0, 2.5] {
                for &x in &[0.01, 0.2, 0.5, 0.8, 0.95, 0.999] {
                    let want = beta_reg(a, b, x);
                    if want < 1e-280 {
                        continue;
                    }
                    let got = ln_beta_reg(a, b, x).exp();
                    assert!(rel(got, want) < 1e-9, "a={a} b={b} x={x} {got} {want}");
                }
            }
        }
    }

    #[test]
    fn incomplete_beta_deep_tail() {
        // I_x(a, 1/2) for small x: leading term x^a / (a B(a, 1/2)).
        let (a, x): (f64, f64) = (500.0, 1e-3);
        let lead = a * x.ln() - a.ln() - (ln_gamma(a) + ln_gamma(0.5) - ln_gamma(a + 0.5));
        assert!((ln_beta_reg(a, 0.5, x) - lead).abs() < 1e-2);
        assert!(ln_beta_reg(a, 0.5, x).is_finite());
    }

    #[test]
    fn q_function_matches_erfc() {
        for i in -80..=300 {
            let x = f64::from(i) * 0.1;
            let want = 0.5 * erf::erfc(x / 2f64.sqrt());
            assert!(rel(q_func(x), want) < 1e-10, "x={x}");
            assert!((ln_q_func(x) - want.ln()).abs() < 1e-9);
        }
        assert_eq!(q_func(0.0), 0.5);
    }

    #[test]
    fn chi2_with_two_dof_is_exponential() {
        for i in 0..50 {
            let x = f64::from(i) * 0.7;
            assert!((chi2_cdf(2.0, x) - (1.0 - (-x / 2.0).exp())).abs() < 1e-14);
            if x > 0.0 {
                assert!((ln_chi2_sf(2.0, x) + x / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ln_add_and_sum_exp() {
        assert!((ln_add(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(ln_add(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((ln_add(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(ln_sum_exp(&[]), f64::NEG_INFINITY);
        let s = ln_sum_exp(&[1.0, 2.0, 3.0]);
        assert!((s - (1f64.exp() + 2f64.exp() + 3f64.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn binomials() {
        assert!((ln_binomial(10.0, 3.0).exp() - 120.0).abs() < 1e-9);
        assert_eq!(ln_binomial(5.0, 6.0), f64::NEG_INFINITY);
        assert_eq!(ln_binomial(5.0, 0.0), 0.0);
    }

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in [2usize, 5, 16, 33, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - want).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn hermite_rule_moments() {
        let (x, w) = gauss_hermite(64);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        let sum: f64 = w.iter().sum();
        assert!(rel(sum, PI.sqrt()) < 1e-12);
        // ∫ x^{2k} e^{-x^2} = Γ(k + 1/2)
        for k in 1..20 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * k)).sum();
            let want = ln_gamma(f64::from(k as u32) + 0.5).exp();
            assert!(rel(got, want) < 1e-10, "k={k}");
        }
    }
}
