use std::io::Cursor;

use image::{ImageFormat, Rgb};

use crate::engine::Frame;
use crate::error::Result;

pub type Color = [u8; 3];

pub const BLACK: Color = [0, 0, 0];
pub const WHITE: Color = [255, 255, 255];

pub fn canvas(width: u32, height: u32, color: Color) -> Frame {
    Frame::from_pixel(width, height, Rgb(color))
}

pub fn fill_rect(frame: &mut Frame, x0: i64, y0: i64, w: i64, h: i64, color: Color) {
    let (fw, fh) = (frame.width() as i64, frame.height() as i64);
    for y in y0.max(0)..(y0 + h).min(fh) {
        for x in x0.max(0)..(x0 + w).min(fw) {
            frame.put_pixel(x as u32, y as u32, Rgb(color));
        }
    }
}

pub fn stroke_rect(frame: &mut Frame, x0: i64, y0: i64, w: i64, h: i64, t: i64, color: Color) {
    fill_rect(frame, x0, y0, w, t, color);
    fill_rect(frame, x0, y0 + h - t, w, t, color);
    fill_rect(frame, x0, y0, t, h, color);
    fill_rect(frame, x0 + w - t, y0, t, h, color);
}

pub fn fill_disc(frame: &mut Frame, cx: f64, cy: f64, r: f64, color: Color) {
    let (fw, fh) = (frame.width() as i64, frame.height() as i64);
    let x0 = ((cx - r).floor() as i64).max(0);
    let x1 = ((cx + r).ceil() as i64).min(fw - 1);
    let y0 = ((cy - r).floor() as i64).max(0);
    let y1 = ((cy + r).ceil() as i64).min(fh - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let dx = x as f64 + 0.5 - cx;
            let dy = y as f64 + 0.5 - cy;
            if dx * dx + dy * dy <= r * r {
                frame.put_pixel(x as u32, y as u32, Rgb(color));
            }
        }
    }
}

pub fn shade(color: Color, factor: f64) -> Color {
    color.map(|c| (c as f64 * factor).round().clamp(0.0, 255.0) as u8)
}

/// Names of the 16 procedural icon glyphs, indexed by glyph id.
pub const GLYPH_NAMES: [&str; 16] = [
    "circle",
    "square",
    "triangle",
    "diamond",
    "star",
    "plus",
    "ring",
    "cross",
    "stripes",
    "bars",
    "hourglass",
    "checker",
    "dots",
    "moon",
    "frame",
    "arrow",
];

fn glyph_covers(glyph: u8, u: f64, v: f64) -> bool {
    let r = (u * u + v * v).sqrt();
    let inside = u.abs() <= 0.8 && v.abs() <= 0.8;
    match glyph {
        0 => r <= 0.8,
        1 => u.abs() <= 0.7 && v.abs() <= 0.7,
        2 => (-0.7..=0.7).contains(&v) && u.abs() <= (v + 0.7) / 1.4 * 0.8,
        3 => u.abs() + v.abs() <= 0.8,
        4 => {
            let theta = v.atan2(u) + std::f64::consts::FRAC_PI_2;
            let lobe = (2.5 * theta).cos().abs();
            r <= 0.35 + 0.45 * lobe.powi(4)
        }
        5 => (u.abs() <= 0.25 && v.abs() <= 0.8) || (v.abs() <= 0.25 && u.abs() <= 0.8),
        6 => (0.5..=0.8).contains(&r),
        7 => inside && ((u - v).abs() <= 0.3 || (u + v).abs() <= 0.3),
        8 => inside && (((v + 0.8) / 0.32).floor() as i64) % 2 == 0,
        9 => inside && (((u + 0.8) / 0.32).floor() as i64) % 2 == 0,
        10 => u.abs() <= v.abs() && v.abs() <= 0.8,
        11 => inside && ((((u + 0.8) / 0.4).floor() + ((v + 0.8) / 0.4).floor()) as i64) % 2 == 0,
        12 => [(-0.45, -0.45), (0.45, -0.45), (-0.45, 0.45), (0.45, 0.45)]
            .iter()
            .any(|(cx, cy)| (u - cx).powi(2) + (v - cy).powi(2) <= 0.25 * 0.25),
        13 => r <= 0.8 && (u - 0.35).powi(2) + v * v > 0.6 * 0.6,
        14 => inside && !(u.abs() <= 0.5 && v.abs() <= 0.5),
        15 => {
            let head = (-0.8..=0.0).contains(&v) && u.abs() <= (v + 0.8) / 0.8 * 0.7;
            let stem = (0.0..=0.8).contains(&v) && u.abs() <= 0.2;
            head || stem
        }
        _ => false,
    }
}

/// Draws glyph `glyph` into the square at `(x0, y0)` with side `size`.
pub fn draw_glyph(frame: &mut Frame, glyph: u8, x0: i64, y0: i64, size: i64, color: Color) {
    let (fw, fh) = (frame.width() as i64, frame.height() as i64);
    for y in y0.max(0)..(y0 + size).min(fh) {
        for x in x0.max(0)..(x0 + size).min(fw) {
            let u = ((x - x0) as f64 + 0.5) / size as f64 * 2.0 - 1.0;
            let v = ((y - y0) as f64 + 0.5) / size as f64 * 2.0 - 1.0;
            if glyph_covers(glyph, u, v) {
                frame.put_pixel(x as u32, y as u32, Rgb(color));
            }
        }
    }
}

pub fn encode_png(frame: &Frame) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    frame.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glyphs_are_pairwise_distinct() {
        let mut masks = Vec::new();
        for g in 0..16u8 {
            let mut f = canvas(32, 32, BLACK);
            draw_glyph(&mut f, g, 0, 0, 32, WHITE);
            assert!(f.pixels().any(|p| p.0 == WHITE), "glyph {g} is empty");
            masks.push(f.into_raw());
        }
        for i in 0..16 {
            for j in (i + 1)..16 {
                assert_ne!(masks[i], masks[j], "glyphs {i} and {j} coincide");
            }
        }
    }

    #[test]
    fn png_roundtrip() {
        let mut f = canvas(8, 4, [10, 20, 30]);
        fill_rect(&mut f, 1, 1, 2, 2, WHITE);
        let bytes = encode_png(&f).unwrap();
        let back = image::load_from_memory(&bytes).unwrap().to_rgb8();
        assert_eq!(back, f);
    }
}
