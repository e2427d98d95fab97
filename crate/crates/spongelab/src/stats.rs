//! Small statistics toolbox: Wilson intervals, chi-square p-values, and
//! log-space least squares for scaling fits.

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(events: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = events as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// ln Gamma via the Lanczos approximation.
fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_9e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000_000_000_190_015;
    for g in G {
        y += 1.0;
        ser += g / y;
    }
    -tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Regularized lower incomplete gamma P(a, x) by series expansion.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-15 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by continued fraction.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let fpmin = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / fpmin;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = b + an / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Upper tail probability of the chi-square distribution with `dof`
/// degrees of freedom.
pub fn chi_square_p_value(stat: f64, dof: u32) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    let a = dof as f64 / 2.0;
    let x = stat / 2.0;
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// Chi-square statistic against a uniform expectation over the bins.
pub fn chi_square_uniform(observed: &[u64]) -> (f64, u32) {
    let total: u64 = observed.iter().sum();
    let expected = total as f64 / observed.len() as f64;
    let stat = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    (stat, observed.len() as u32 - 1)
}

/// Two-sample chi-square homogeneity statistic. Bins where both samples
/// are empty are dropped; dof = populated bins - 1.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> (f64, u32) {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let (ka, kb) = ((nb as f64 / na as f64).sqrt(), (na as f64 / nb as f64).sqrt());
    let mut stat = 0.0;
    let mut bins = 0u32;
    for (&oa, &ob) in a.iter().zip(b) {
        if oa + ob == 0 {
            continue;
        }
        bins += 1;
        let d = ka * oa as f64 - kb * ob as f64;
        stat += d * d / (oa + ob) as f64;
    }
    (stat, bins.saturating_sub(1))
}

/// Mean and half-width of a normal-approximation 95% CI from a sample sum
/// and sum of squares.
pub fn mean_ci(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
    (mean, 1.96 * (var / nf).sqrt())
}

/// Least squares fit of log(y) = a + b*log(x), returning (exp(a), b).
/// Points with y <= 0 are skipped.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    Some((a.exp(), b))
}
