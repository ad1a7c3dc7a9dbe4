//! Patch geometry and pixel-level preprocessing.
//!
//! Images are three-channel, values in [0, 1], stored plane-major: all of R
//! (row-major), then G, then B. That layout is also the network input
//! vector layout, so vectorizing a patch is a copy.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Height of a network-ready patch.
pub const NET_PATCH_HEIGHT: usize = 25;
/// Width of a network-ready patch.
pub const NET_PATCH_WIDTH: usize = 50;
/// Length of a vectorized network-ready patch.
pub const NET_INPUT_LEN: usize = 3 * NET_PATCH_HEIGHT * NET_PATCH_WIDTH;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ImagingError {
    #[error("image dimensions must be at least 1x1, got {height}x{width}")]
    Empty { height: usize, width: usize },
    #[error("expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("sample {index} = {value} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("region {region:?} exceeds a {height}x{width} image or is empty")]
    BadRegion {
        region: Rect,
        height: usize,
        width: usize,
    },
    #[error("white reference channel {channel} has zero mean")]
    ZeroWhite { channel: usize },
    #[error("invalid patch grid {grid:?} for a {height}x{width} image")]
    BadGrid {
        grid: PatchGridSpec,
        height: usize,
        width: usize,
    },
    #[error("{height}x{width} cannot be scaled by {factor} to whole pixels")]
    NonIntegralScale {
        height: usize,
        width: usize,
        factor: f64,
    },
    #[error("expected a {expected_h}x{expected_w} patch, got {height}x{width}")]
    WrongShape {
        expected_h: usize,
        expected_w: usize,
        height: usize,
        width: usize,
    },
}

/// Three-channel raster with values in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct PatchImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl PatchImage {
    /// Wraps plane-major samples, checking length and range.
    pub fn from_planes(height: usize, width: usize, data: Vec<f64>) -> Result<Self, ImagingError> {
        if height == 0 || width == 0 {
            return Err(ImagingError::Empty { height, width });
        }
        let expected = 3 * height * width;
        if data.len() != expected {
            return Err(ImagingError::LengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ImagingError::OutOfRange { index, value });
        }
        Ok(PatchImage {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Result<Self, ImagingError> {
        let n = height * width;
        let mut data = Vec::with_capacity(3 * n);
        for v in rgb {
            data.extend(core::iter::repeat_n(v, n));
        }
        Self::from_planes(height, width, data)
    }

    /// Builds from `f(channel, y, x)`; values are clamped into [0, 1].
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self, ImagingError> {
        let mut data = Vec::with_capacity(3 * height * width);
        for c in 0..3 {
            for y in 0..height {
                for x in 0..width {
                    data.push(clamp01(f(c, y, x)));
                }
            }
        }
        Self::from_planes(height, width, data)
    }

    /// From interleaved 8-bit RGB, mapping each byte by `/255`.
    pub fn from_rgb8(height: usize, width: usize, rgb: &[u8]) -> Result<Self, ImagingError> {
        let expected = 3 * height * width;
        if rgb.len() != expected {
            return Err(ImagingError::LengthMismatch {
                expected,
                actual: rgb.len(),
            });
        }
        Self::from_fn(height, width, |c, y, x| {
            f64::from(rgb[3 * (y * width + x) + c]) / 255.0
        })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn rgb(&self, y: usize, x: usize) -> [f64; 3] {
        [self.get(0, y, x), self.get(1, y, x), self.get(2, y, x)]
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.pixel_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copy of the `h × w` window whose top-left corner is `(top, left)`.
    pub fn crop(&self, rect: Rect) -> Result<PatchImage, ImagingError> {
        rect.check(self.height, self.width)?;
        let mut data = Vec::with_capacity(3 * rect.height * rect.width);
        for c in 0..3 {
            for y in rect.top..rect.top + rect.height {
                let start = (c * self.height + y) * self.width + rect.left;
                data.extend_from_slice(&self.data[start..start + rect.width]);
            }
        }
        Ok(PatchImage {
            height: rect.height,
            width: rect.width,
            data,
        })
    }
}

#[inline]
fn clamp01(v: f64) -> f64 {
    // NaN maps to 0 so the range invariant always holds.
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    fn check(&self, height: usize, width: usize) -> Result<(), ImagingError> {
        let fits = self.height >= 1
            && self.width >= 1
            && self.top + self.height <= height
            && self.left + self.width <= width;
        if fits {
            Ok(())
        } else {
            Err(ImagingError::BadRegion {
                region: *self,
                height,
                width,
            })
        }
    }
}

/// Divides each channel by the mean of that channel inside `white`, then
/// clamps to [0, 1].
pub fn white_normalize(img: &PatchImage, white: Rect) -> Result<PatchImage, ImagingError> {
    let reference = img.crop(white)?;
    let n = reference.pixel_count() as f64;
    let mut means = [0.0; 3];
    for (c, m) in means.iter_mut().enumerate() {
        *m = reference.plane(c).iter().sum::<f64>() / n;
        if *m <= 0.0 {
            return Err(ImagingError::ZeroWhite { channel: c });
        }
    }
    let per = img.pixel_count();
    let data = img
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| clamp01(v / means[i / per]))
        .collect();
    Ok(PatchImage {
        height: img.height,
        width: img.width,
        data,
    })
}

/// Sliding-window layout: window size and step in each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchGridSpec {
    pub window_h: usize,
    pub window_w: usize,
    pub stride_h: usize,
    pub stride_w: usize,
}

impl PatchGridSpec {
    /// Windows overlapping their neighbours by half in both axes.
    pub fn half_overlap(window_h: usize, window_w: usize) -> Self {
        PatchGridSpec {
            window_h,
            window_w,
            stride_h: (window_h / 2).max(1),
            stride_w: (window_w / 2).max(1),
        }
    }

    fn check(&self, height: usize, width: usize) -> Result<(), ImagingError> {
        let ok = 1 <= self.stride_h
            && self.stride_h <= self.window_h
            && self.window_h <= height
            && 1 <= self.stride_w
            && self.stride_w <= self.window_w
            && self.window_w <= width;
        if ok {
            Ok(())
        } else {
            Err(ImagingError::BadGrid {
                grid: *self,
                height,
                width,
            })
        }
    }

    /// Top-left corners of every window fully inside a `height × width`
    /// image, rows first.
    pub fn offsets(
        &self,
        height: usize,
        width: usize,
    ) -> Result<Vec<(usize, usize)>, ImagingError> {
        self.check(height, width)?;
        let rows = (height - self.window_h) / self.stride_h + 1;
        let cols = (width - self.window_w) / self.stride_w + 1;
        let mut out = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                out.push((i * self.stride_h, j * self.stride_w));
            }
        }
        Ok(out)
    }
}

/// Cuts `sub` into windows enumerated top-to-bottom, left-to-right.
pub fn decompose_patches(
    sub: &PatchImage,
    grid: &PatchGridSpec,
) -> Result<Vec<PatchImage>, ImagingError> {
    grid.offsets(sub.height, sub.width)?
        .into_iter()
        .map(|(top, left)| {
            sub.crop(Rect {
                top,
                left,
                height: grid.window_h,
                width: grid.window_w,
            })
        })
        .collect()
}

/// Keys cubic convolution kernel with `a = −0.5`.
pub fn cubic_kernel(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        ((A + 2.0) * t - (A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((A * t - 5.0 * A) * t + 8.0 * A) * t - 4.0 * A
    } else {
        0.0
    }
}

/// Four-tap weights and clamped source indices for each output position
/// along one axis, sampling at pixel centers.
fn axis_taps(input: usize, output: usize) -> Vec<([usize; 4], [f64; 4])> {
    let scale = input as f64 / output as f64;
    (0..output)
        .map(|o| {
            let src = (o as f64 + 0.5) * scale - 0.5;
            let base = libm::floor(src) as isize;
            let mut idx = [0usize; 4];
            let mut w = [0.0f64; 4];
            for k in 0..4 {
                let p = base - 1 + k as isize;
                idx[k] = p.clamp(0, input as isize - 1) as usize;
                w[k] = cubic_kernel(src - p as f64);
            }
            (idx, w)
        })
        .collect()
}

/// Separable bicubic resize to `out_h × out_w` with clamp-to-edge borders.
pub fn resize_bicubic(
    p: &PatchImage,
    out_h: usize,
    out_w: usize,
) -> Result<PatchImage, ImagingError> {
    if out_h == 0 || out_w == 0 {
        return Err(ImagingError::Empty {
            height: out_h,
            width: out_w,
        });
    }
    let (h, w) = (p.height, p.width);
    let xt = axis_taps(w, out_w);
    let yt = axis_taps(h, out_h);
    let mut data = Vec::with_capacity(3 * out_h * out_w);
    let mut rows = vec![0.0; h * out_w];
    for c in 0..3 {
        let plane = p.plane(c);
        for y in 0..h {
            let src = &plane[y * w..(y + 1) * w];
            for (x, (idx, wt)) in xt.iter().enumerate() {
                rows[y * out_w + x] = (0..4).map(|k| wt[k] * src[idx[k]]).sum();
            }
        }
        for (idx, wt) in &yt {
            for x in 0..out_w {
                let v: f64 = (0..4).map(|k| wt[k] * rows[idx[k] * out_w + x]).sum();
                data.push(clamp01(v));
            }
        }
    }
    Ok(PatchImage {
        height: out_h,
        width: out_w,
        data,
    })
}

/// Bicubic downscale by `factor` (e.g. 0.5). Both scaled dimensions must
/// be whole numbers of pixels.
pub fn downscale_bicubic(p: &PatchImage, factor: f64) -> Result<PatchImage, ImagingError> {
    let err = ImagingError::NonIntegralScale {
        height: p.height,
        width: p.width,
        factor,
    };
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(err);
    }
    let scaled = |n: usize| {
        let v = n as f64 * factor;
        let r = libm::round(v);
        ((v - r).abs() < 1e-9 && r >= 1.0).then_some(r as usize)
    };
    match (scaled(p.height), scaled(p.width)) {
        (Some(h), Some(w)) => resize_bicubic(p, h, w),
        _ => Err(err),
    }
}

/// Plane-stacked vector (R plane, then G, then B; each row-major).
pub fn vectorize(p: &PatchImage) -> Vec<f64> {
    p.data.clone()
}

/// [`vectorize`] restricted to the 25 × 50 network input shape.
pub fn vectorize_patch(p: &PatchImage) -> Result<Vec<f64>, ImagingError> {
    if p.height != NET_PATCH_HEIGHT || p.width != NET_PATCH_WIDTH {
        return Err(ImagingError::WrongShape {
            expected_h: NET_PATCH_HEIGHT,
            expected_w: NET_PATCH_WIDTH,
            height: p.height,
            width: p.width,
        });
    }
    Ok(vectorize(p))
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[f64], height: usize, width: usize) -> Result<PatchImage, ImagingError> {
    PatchImage::from_planes(height, width, v.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize) -> PatchImage {
        PatchImage::from_fn(h, w, |c, y, x| ((c * 7 + y * w + x) % 11) as f64 / 10.0).unwrap()
    }

    #[test]
    fn white_normalize_identity_and_division() {
        let img = ramp(4, 6);
        let white = PatchImage::filled(4, 6, [1.0; 3]).unwrap();
        let full = Rect {
            top: 0,
            left: 0,
            height: 4,
            width: 6,
        };
        assert_eq!(white_normalize(&white, full).unwrap(), white);

        let mut data = vec![0.5; 3 * 4];
        data[1] = 0.25; // R at (0, 1)
        data[2] = 0.8;
        let img2 = PatchImage::from_planes(2, 2, data).unwrap();
        let ref_px = Rect {
            top: 0,
            left: 0,
            height: 1,
            width: 1,
        };
        let out = white_normalize(&img2, ref_px).unwrap();
        assert_eq!(out.get(0, 0, 1), 0.5);
        assert_eq!(out.get(0, 1, 0), 1.0);
        assert!(white_normalize(
            &img,
            Rect {
                top: 3,
                left: 0,
                height: 2,
                width: 1
            }
        )
        .is_err());
    }

    #[test]
    fn white_normalize_zero_mean_errors() {
        let img = PatchImage::filled(2, 2, [0.0, 0.5, 0.5]).unwrap();
        let r = Rect {
            top: 0,
            left: 0,
            height: 1,
            width: 1,
        };
        assert_eq!(
            white_normalize(&img, r),
            Err(ImagingError::ZeroWhite { channel: 0 })
        );
    }

    #[test]
    fn white_normalize_idempotent_after_white() {
        let img = PatchImage::from_fn(6, 6, |c, y, x| {
            if y < 2 {
                0.5 + 0.125 * c as f64
            } else {
                (x + y) as f64 / 14.0
            }
        })
        .unwrap();
        let r = Rect {
            top: 0,
            left: 0,
            height: 2,
            width: 6,
        };
        let once = white_normalize(&img, r).unwrap();
        assert_eq!(white_normalize(&once, r).unwrap(), once);
    }

    #[test]
    fn grid_counts() {
        let img = ramp(4, 4);
        let one = PatchGridSpec {
            window_h: 4,
            window_w: 4,
            stride_h: 1,
            stride_w: 1,
        };
        assert_eq!(decompose_patches(&img, &one).unwrap().len(), 1);
        let small = PatchGridSpec {
            window_h: 2,
            window_w: 2,
            stride_h: 1,
            stride_w: 1,
        };
        let patches = decompose_patches(&img, &small).unwrap();
        assert_eq!(patches.len(), 9);
        assert_eq!(patches[4].get(1, 0, 0), img.get(1, 1, 1));
        let sub = ramp(100, 200);
        let half = PatchGridSpec::half_overlap(50, 100);
        assert_eq!(
            half,
            PatchGridSpec {
                window_h: 50,
                window_w: 100,
                stride_h: 25,
                stride_w: 50
            }
        );
        assert_eq!(decompose_patches(&sub, &half).unwrap().len(), 9);
        let too_big = PatchGridSpec {
            window_h: 5,
            window_w: 2,
            stride_h: 1,
            stride_w: 1,
        };
        assert!(decompose_patches(&img, &too_big).is_err());
    }

    #[test]
    fn kernel_weights_sum_to_one() {
        for i in 0..20 {
            let f = i as f64 / 20.0;
            let s: f64 = (-1..=2).map(|k| cubic_kernel(f - k as f64)).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert_eq!(cubic_kernel(0.0), 1.0);
        assert_eq!(cubic_kernel(1.0), 0.0);
        assert_eq!(cubic_kernel(2.0), 0.0);
    }

    #[test]
    fn downscale_shapes() {
        let c = PatchImage::filled(50, 100, [0.3, 0.6, 0.9]).unwrap();
        let d = downscale_bicubic(&c, 0.5).unwrap();
        assert_eq!((d.height(), d.width()), (25, 50));
        for ch in 0..3 {
            let expect = [0.3, 0.6, 0.9][ch];
            assert!(d.plane(ch).iter().all(|&v| (v - expect).abs() < 1e-15));
        }
        assert!(downscale_bicubic(&ramp(5, 8), 0.5).is_err());
        assert!(downscale_bicubic(&ramp(4, 8), 0.0).is_err());
    }

    #[test]
    fn vector_layout() {
        let p = PatchImage::from_fn(25, 50, |c, y, x| {
            (c as f64 * 0.3) + (y * 50 + x) as f64 / 5000.0
        })
        .unwrap();
        let v = vectorize_patch(&p).unwrap();
        assert_eq!(v.len(), NET_INPUT_LEN);
        assert_eq!(NET_INPUT_LEN, 3750);
        assert_eq!(v[0], p.get(0, 0, 0));
        assert_eq!(v[1250], p.get(1, 0, 0));
        assert_eq!(v[2500], p.get(2, 0, 0));
        assert_eq!(unvectorize(&v, 25, 50).unwrap(), p);
        assert!(vectorize_patch(&ramp(24, 50)).is_err());
    }

    #[test]
    fn rgb8_import() {
        let p = PatchImage::from_rgb8(1, 2, &[255, 0, 51, 0, 255, 102]).unwrap();
        assert_eq!(p.rgb(0, 0), [1.0, 0.0, 0.2]);
        assert_eq!(p.rgb(0, 1), [0.0, 1.0, 0.4]);
    }

    #[test]
    fn constructor_rejects_out_of_range() {
        assert!(PatchImage::from_planes(1, 1, vec![0.0, 1.5, 0.0]).is_err());
        assert!(PatchImage::from_planes(0, 1, vec![]).is_err());
        assert!(PatchImage::from_planes(1, 1, vec![0.0; 2]).is_err());
    }
}
