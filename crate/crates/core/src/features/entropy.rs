use alloc::vec::Vec;

use super::GrayImage;
use crate::stats::{mean, population_sd};

/// Side of the square neighborhood for local entropy.
pub const ENTROPY_WINDOW: usize = 9;

/// Per-pixel neighborhood entropy (bits) and its summary.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalEntropy {
    pub map: Vec<f64>,
    pub mean: f64,
    /// Population sd over the map.
    pub sd: f64,
}

/// Shannon entropy (log2) of the 256-bin histogram of each 9 × 9
/// neighborhood. Neighborhoods are clipped at the image border.
pub fn local_entropy_summary(gray: &GrayImage) -> LocalEntropy {
    let (h, w) = (gray.height(), gray.width());
    let r = ENTROPY_WINDOW / 2;
    let mut map = Vec::with_capacity(h * w);
    let mut counts = [0u16; 256];
    let mut touched: Vec<u8> = Vec::with_capacity(ENTROPY_WINDOW * ENTROPY_WINDOW);
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
            touched.clear();
            for yy in y0..y1 {
                for xx in x0..x1 {
                    let v = gray.get(yy, xx);
                    if counts[v as usize] == 0 {
                        touched.push(v);
                    }
                    counts[v as usize] += 1;
                }
            }
            let n = ((y1 - y0) * (x1 - x0)) as f64;
            // sort so the summation order is fixed
            touched.sort_unstable();
            let mut e = 0.0;
            for &v in &touched {
                let p = f64::from(counts[v as usize]) / n;
                e -= p * libm::log2(p);
                counts[v as usize] = 0;
            }
            map.push(e.max(0.0));
        }
    }
    LocalEntropy {
        mean: mean(&map),
        sd: population_sd(&map),
        map,
    }
}
