//! Small numeric helpers shared across modules.

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub(crate) fn population_sd(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    libm::sqrt(var)
}

/// Sample (n - 1) standard deviation; zero for fewer than two values.
pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    libm::sqrt(var)
}

/// Composite trapezoid rule over paired samples.
pub(crate) fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `[w·x₀, w·x₁, w·x₂, w·x₃]`, each summed in the same order as [`dot`]
/// so results match it bit for bit.
#[inline]
pub(crate) fn dot4(w: &[f64], xs: [&[f64]; 4]) -> [f64; 4] {
    let n = w.len() / 4 * 4;
    let mut acc = [[0.0f64; 4]; 4];
    let mut i = 0;
    while i < n {
        let wc = &w[i..i + 4];
        for (a, x) in acc.iter_mut().zip(&xs) {
            let xc = &x[i..i + 4];
            a[0] += wc[0] * xc[0];
            a[1] += wc[1] * xc[1];
            a[2] += wc[2] * xc[2];
            a[3] += wc[3] * xc[3];
        }
        i += 4;
    }
    let mut out = [0.0; 4];
    for ((o, a), x) in out.iter_mut().zip(&acc).zip(&xs) {
        let mut tail = 0.0;
        for j in n..w.len() {
            tail += w[j] * x[j];
        }
        *o = (a[0] + a[1]) + (a[2] + a[3]) + tail;
    }
    out
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_of_line_is_exact() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [0.0, 2.0, 6.0];
        assert!((trapezoid(&xs, &ys) - 9.0).abs() < 1e-15);
    }

    #[test]
    fn dot4_matches_dot_bitwise() {
        for len in [0usize, 3, 4, 9, 37] {
            let w: alloc::vec::Vec<f64> = (0..len).map(|i| libm::sin(i as f64) * 1e3).collect();
            let xs: alloc::vec::Vec<alloc::vec::Vec<f64>> = (0..4)
                .map(|k| {
                    (0..len)
                        .map(|i| libm::cos((i * 7 + k) as f64) / 3.0)
                        .collect()
                })
                .collect();
            let got = dot4(&w, [&xs[0], &xs[1], &xs[2], &xs[3]]);
            for k in 0..4 {
                assert_eq!(got[k].to_bits(), dot(&w, &xs[k]).to_bits());
            }
        }
    }

    #[test]
    fn dot_handles_remainder() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [1.0, 1.0, 1.0, 1.0, 2.0];
        assert_eq!(dot(&a, &b), 20.0);
    }

    #[test]
    fn sds() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((population_sd(&xs) - libm::sqrt(1.25)).abs() < 1e-15);
        assert!((sample_sd(&xs) - libm::sqrt(5.0 / 3.0)).abs() < 1e-15);
        assert_eq!(sample_sd(&[3.0]), 0.0);
    }
}
