use crate::imaging::PatchImage;

/// Per-channel centers of the four uniform quantization bins.
pub const COLOR_BIN_CENTERS: [f64; 4] = [0.125, 0.375, 0.625, 0.875];

/// Normalized 4 × 4 × 4 color histogram; bin `16·r + 4·g + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorHistogram64([f64; 64]);

impl ColorHistogram64 {
    pub fn bins(&self) -> &[f64; 64] {
        &self.0
    }

    pub fn index(r: usize, g: usize, b: usize) -> usize {
        16 * r + 4 * g + b
    }
}

/// Nearest center for one channel. The joint nearest of the 64 centers
/// factors per channel; ties resolve to the lower center.
#[inline]
fn nearest_center(v: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in COLOR_BIN_CENTERS.iter().enumerate() {
        let d = (v - c).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Fraction of pixels falling in each of the 64 color bins.
pub fn color_histogram64(p: &PatchImage) -> ColorHistogram64 {
    let mut counts = [0u32; 64];
    let (r, g, b) = (p.plane(0), p.plane(1), p.plane(2));
    for i in 0..p.pixel_count() {
        let bin = ColorHistogram64::index(
            nearest_center(r[i]),
            nearest_center(g[i]),
            nearest_center(b[i]),
        );
        counts[bin] += 1;
    }
    let n = p.pixel_count() as f64;
    let mut bins = [0.0; 64];
    for (h, &c) in bins.iter_mut().zip(&counts) {
        *h = f64::from(c) / n;
    }
    ColorHistogram64(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn black_patch() {
        let h = color_histogram64(&PatchImage::filled(4, 4, [0.0; 3]).unwrap());
        assert_eq!(h.bins()[0], 1.0);
        assert_eq!(h.bins()[1..].iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn two_pixel_patch() {
        let p = PatchImage::from_planes(1, 2, vec![0.1, 0.9, 0.1, 0.9, 0.1, 0.9]).unwrap();
        let h = color_histogram64(&p);
        assert_eq!(h.bins()[0], 0.5);
        assert_eq!(h.bins()[63], 0.5);
    }

    #[test]
    fn boundary_ties_go_low() {
        assert_eq!(nearest_center(0.25), 0);
        assert_eq!(nearest_center(0.5), 1);
        assert_eq!(nearest_center(1.0), 3);
    }
}
