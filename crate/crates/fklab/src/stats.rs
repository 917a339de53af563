//! Small numeric helpers shared by the renormalization probe and the
//! harness fits: weighted least squares and a small-sample-corrected
//! information criterion.

/// Weighted least-squares line fit y = intercept + slope * x.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub rss: f64,
    pub points: usize,
}

/// Fit a line through (x, y) with weights w. Needs at least two distinct x.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n {
        return None;
    }
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return None;
    }
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut rss = 0.0;
    let mut tss = 0.0;
    for i in 0..n {
        let r = y[i] - intercept - slope * x[i];
        rss += w[i] * r * r;
        tss += w[i] * (y[i] - my) * (y[i] - my);
    }
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    Some(LineFit {
        intercept,
        slope,
        r_squared,
        rss,
        points: n,
    })
}

/// Corrected Akaike criterion for a least-squares fit with k regression
/// parameters over m points. Falls back to the uncorrected criterion when
/// the correction denominator vanishes (m <= k+1).
pub fn aicc(rss: f64, m: usize, k: usize) -> f64 {
    let m_f = m as f64;
    let k_f = k as f64;
    // guard against rss == 0 on degenerate exact fits
    let base = m_f * (rss.max(1e-300) / m_f).ln() + 2.0 * k_f;
    if m > k + 1 {
        base + 2.0 * k_f * (k_f + 1.0) / (m_f - k_f - 1.0)
    } else {
        base
    }
}

/// Pearson correlation of two equally long samples.
pub fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 || b.len() != n {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for i in 0..n {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}
