//! Goodness-of-fit statistics used by the distributional tests.

/// Kolmogorov survival function `P(K > x)`.
fn kolmogorov_sf(x: f64) -> f64 {
    if x < 0.27 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        s += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample KS p-value against a continuous `cdf`.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// Two-sample KS p-value (asymptotic, with the usual small-sample shift).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
}

/// Anderson-Darling p-value against a fully specified `cdf`
/// (Marsaglia and Marsaglia's asymptotic approximation with their finite-n
/// correction).
pub fn anderson_darling(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut u: Vec<f64> = sample.iter().map(|&x| cdf(x).clamp(1e-300, 1.0 - 1e-16)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len();
    let nf = n as f64;
    let s: f64 = (0..n)
        .map(|i| (2.0 * i as f64 + 1.0) * (u[i].ln() + (1.0 - u[n - 1 - i]).ln()))
        .sum();
    let a2 = -nf - s / nf;
    let p = ad_inf_cdf(a2);
    1.0 - (p + ad_error(nf, p)).clamp(0.0, 1.0)
}

fn ad_inf_cdf(z: f64) -> f64 {
    if z < 2.0 {
        (-1.2337141 / z).exp() / z.sqrt()
            * (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z)
    } else {
        (-(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z).exp()).exp()
    }
}

fn ad_error(n: f64, x: f64) -> f64 {
    let c = 0.01265 + 0.1757 / n;
    if x < c {
        let t = x / c;
        let t = t.sqrt() * (1.0 - t) * (49.0 * t - 102.0);
        return t * (0.0037 / (n * n) + 0.00078 / n + 0.00006) / n;
    }
    if x < 0.8 {
        let t = (x - c) / (0.8 - c);
        let t = -0.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t;
        return t * (0.04213 / n + 0.01365 / (n * n)) / n;
    }
    let t = x;
    (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * t) * t) * t) * t) * t) / n
}

pub fn thin(v: &[f64], by: usize) -> Vec<f64> {
    v.iter().step_by(by).copied().collect()
}

/// Monte Carlo standard error of the mean of a correlated chain by
/// non-overlapping batch means.
pub fn batch_mc_se(v: &[f64]) -> f64 {
    let batches = (v.len() as f64).sqrt().floor() as usize;
    let size = v.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| v[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

#[cfg(test)]
mod tests {
    // unused when the including target has no test harness
    #[allow(unused_imports)]
    use super::*;

    #[test]
    fn uniform_grid_is_accepted() {
        let u: Vec<f64> = (0..500).map(|i| (i as f64 + 0.5) / 500.0).collect();
        assert!(ks_one_sample(&u, |x| x) > 0.99);
        assert!(anderson_darling(&u, |x| x) > 0.9);
        let skew: Vec<f64> = u.iter().map(|x| x * x).collect();
        assert!(ks_one_sample(&skew, |x| x) < 1e-6);
        let p = anderson_darling(&skew, |x| x);
        assert!(p < 1e-4, "{p}");
        assert!(ks_two_sample(&u, &skew) < 1e-6);
    }
}
