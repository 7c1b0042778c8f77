use num_complex::Complex64;

pub(crate) fn overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Coefficients of `u(k + 2π/d)` given those of `u(k)` in the periodic gauge.
pub(crate) fn shift_up(c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
    out[..c.len() - 1].copy_from_slice(&c[1..]);
    out
}

/// Coefficients of `u(k - 2π/d)` given those of `u(k)` in the periodic gauge.
pub(crate) fn shift_down(c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
    out[1..].copy_from_slice(&c[..c.len() - 1]);
    out
}

fn scale(v: &mut [Complex64], s: Complex64) {
    v.iter_mut().for_each(|x| *x *= s);
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Rotates every degenerate cluster touching the first `n_keep` levels so
/// that its vectors follow `reference` (the neighbor's vectors).
pub(crate) fn align_degenerate(
    values: &[f64],
    vectors: &mut [Vec<Complex64>],
    reference: &[Vec<Complex64>],
    n_keep: usize,
    tol: f64,
) {
    let n = values.len().min(vectors.len()).min(reference.len());
    let mut start = 0;
    while start < n.min(n_keep) {
        let mut end = start + 1;
        while end < n && (values[end] - values[end - 1]).abs() <= tol * values[end].abs().max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            let span: Vec<Vec<Complex64>> = vectors[start..end].to_vec();
            let mut new: Vec<Vec<Complex64>> = Vec::with_capacity(end - start);
            for target in &reference[start..end] {
                let mut p = vec![Complex64::new(0.0, 0.0); span[0].len()];
                for w in &span {
                    let c = overlap(w, target);
                    p.iter_mut().zip(w).for_each(|(a, b)| *a += c * b);
                }
                for q in &new {
                    let c = overlap(q, &p);
                    p.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
                if normalize(&mut p) < 1e-8 {
                    // reference has no weight left in this subspace: take the
                    // span vector least represented so far
                    let mut best = span[0].clone();
                    let mut best_rest = -1.0;
                    for w in &span {
                        let mut r = w.clone();
                        for q in &new {
                            let c = overlap(q, &r);
                            r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                        }
                        let rest = r.iter().map(|x| x.norm_sqr()).sum::<f64>();
                        if rest > best_rest {
                            best_rest = rest;
                            best = r;
                        }
                    }
                    normalize(&mut best);
                    p = best;
                }
                new.push(p);
            }
            for (i, v) in new.into_iter().enumerate() {
                vectors[start + i] = v;
            }
        }
        start = end;
    }
}

pub(crate) struct GaugeOutcome {
    pub periodic: bool,
    /// Grid indices where neighbor alignment failed (`n` marks the closure).
    pub breaks: Vec<usize>,
}

/// Fixes the gauge of one band in place.
///
/// Each vector first gets its largest coefficient real positive. Neighbors
/// are then parallel-transported from `k_0` upward; if the band is smooth
/// and the closure overlap with the shifted `u(k_0)` is large enough, the
/// closure phase is spread linearly over the zone, which leaves a smooth
/// periodic gauge with constant Berry connection.
pub(crate) fn fix_gauge(coeffs: &mut [Vec<Complex64>], threshold: f64) -> GaugeOutcome {
    let n = coeffs.len();
    for c in coeffs.iter_mut() {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (i, v) in c.iter().enumerate() {
            let m = v.norm();
            if m > best_mag * (1.0 + 1e-12) {
                best_mag = m;
                best = i;
            }
        }
        if best_mag > 0.0 {
            let ph = c[best].conj() / best_mag;
            scale(c, ph);
        }
    }

    let mut breaks = Vec::new();
    for j in 1..n {
        let o = overlap(&coeffs[j - 1], &coeffs[j]);
        if o.norm() >= threshold {
            let ph = o.conj() / o.norm();
            scale(&mut coeffs[j], ph);
        } else {
            breaks.push(j);
        }
    }
    if !breaks.is_empty() {
        return GaugeOutcome {
            periodic: false,
            breaks,
        };
    }

    let closing = shift_up(&coeffs[0]);
    let o = overlap(&coeffs[n - 1], &closing);
    if o.norm() < threshold {
        return GaugeOutcome {
            periodic: false,
            breaks: vec![n],
        };
    }
    let phi = o.arg();
    for (j, c) in coeffs.iter_mut().enumerate() {
        scale(c, Complex64::from_polar(1.0, phi * j as f64 / n as f64));
    }
    GaugeOutcome {
        periodic: true,
        breaks,
    }
}
