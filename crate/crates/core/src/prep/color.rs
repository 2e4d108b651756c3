use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::{LabeledImage, PrepError};

/// Multiplicative photometric factors; `1.0` leaves a channel untouched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterFactors {
    pub saturation: f64,
    pub brightness: f64,
    /// Exposure is applied as a gamma curve with exponent `1 / exposure`.
    pub exposure: f64,
}

impl JitterFactors {
    pub const IDENTITY: JitterFactors = JitterFactors { saturation: 1.0, brightness: 1.0, exposure: 1.0 };

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Scales HSV saturation and value while keeping hue, then applies the
/// exposure gamma. Each channel keeps its relative position between the
/// pixel's min and max channel, which is exactly what fixing hue means.
fn jitter_pixel(px: Rgb<u8>, f: &JitterFactors) -> Rgb<u8> {
    let c = px.0.map(|v| v as f64 / 255.0);
    let max = c[0].max(c[1]).max(c[2]);
    let min = c[0].min(c[1]).min(c[2]);
    let value = (max * f.brightness).clamp(0.0, 1.0);
    let out = if max > min {
        let sat = ((max - min) / max * f.saturation).clamp(0.0, 1.0);
        c.map(|ch| value * (1.0 - sat * (1.0 - (ch - min) / (max - min))))
    } else {
        [value; 3]
    };
    let gamma = 1.0 / f.exposure;
    Rgb(out.map(|ch| if gamma == 1.0 { to_u8(ch) } else { to_u8(ch.powf(gamma)) }))
}

pub fn color_jitter_pixels(img: &RgbImage, factors: &JitterFactors) -> RgbImage {
    if factors.is_identity() {
        return img.clone();
    }
    let mut out = img.clone();
    for px in out.pixels_mut() {
        *px = jitter_pixel(*px, factors);
    }
    out
}

/// Photometric jitter; image size and boxes are untouched.
pub fn color_jitter(item: &LabeledImage, factors: &JitterFactors) -> Result<LabeledImage, PrepError> {
    if factors.is_identity() {
        return Ok(item.clone());
    }
    let px = color_jitter_pixels(&*item.pixels()?, factors);
    Ok(item.with_pixels(px, item.boxes.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(saturation: f64, brightness: f64, exposure: f64) -> JitterFactors {
        JitterFactors { saturation, brightness, exposure }
    }

    #[test]
    fn identity_factors_keep_every_pixel() {
        // Run the per-pixel path directly (bypassing the identity shortcut).
        for r in (0..=255).step_by(5) {
            for g in (0..=255).step_by(17) {
                for b in (0..=255).step_by(51) {
                    let px = Rgb([r as u8, g as u8, b as u8]);
                    assert_eq!(jitter_pixel(px, &JitterFactors::IDENTITY), px);
                }
            }
        }
    }

    #[test]
    fn gray_is_a_saturation_fixed_point() {
        for s in [0.75, 0.9, 1.1, 1.25] {
            for v in [0u8, 37, 128, 255] {
                assert_eq!(jitter_pixel(Rgb([v, v, v]), &f(s, 1.0, 1.0)), Rgb([v, v, v]));
            }
        }
    }

    #[test]
    fn brightness_scales_value() {
        assert_eq!(jitter_pixel(Rgb([200, 200, 200]), &f(1.0, 1.15, 1.0)), Rgb([230, 230, 230]));
        assert_eq!(jitter_pixel(Rgb([240, 240, 240]), &f(1.0, 1.15, 1.0)), Rgb([255, 255, 255]));
    }

    #[test]
    fn saturation_moves_channels_away_from_max() {
        // (200, 100, 100): v = 200/255, s = 0.5; s' = 0.625 -> min channel 75.
        let out = jitter_pixel(Rgb([200, 100, 100]), &f(1.25, 1.0, 1.0));
        assert_eq!(out, Rgb([200, 75, 75]));
    }

    #[test]
    fn exposure_is_gamma() {
        let out = jitter_pixel(Rgb([64, 64, 64]), &f(1.0, 1.0, 1.1));
        let expected = ((64.0f64 / 255.0).powf(1.0 / 1.1) * 255.0).round() as u8;
        assert_eq!(out, Rgb([expected; 3]));
        assert!(expected > 64);
    }
}
