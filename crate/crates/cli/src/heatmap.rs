use std::f64::consts::TAU;

use esm_core::geometry::Point;
use esm_core::imaging::IndicatorGrid;
use image::{Rgb, RgbImage};

const TARGET_PIXELS: usize = 400;
const INVALID: Rgb<u8> = Rgb([128, 128, 128]);
const MARK: Rgb<u8> = Rgb([255, 255, 255]);

/// Piecewise-linear dark blue to yellow ramp.
const STOPS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn color(t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let c = |k: usize| (STOPS[i][k] + f * (STOPS[i + 1][k] - STOPS[i][k])).round() as u8;
    Rgb([c(0), c(1), c(2)])
}

struct Canvas {
    img: RgbImage,
    cell: u32,
    grid: esm_core::geometry::SamplingGrid,
}

impl Canvas {
    /// Pixel position of a physical point; `y` grows upward.
    fn pixel(&self, p: Point) -> (f64, f64) {
        let g = &self.grid;
        let fx = (p[0] - g.x_range[0]) / (g.x_range[1] - g.x_range[0]) * (g.nx - 1) as f64;
        let fy = (p[1] - g.y_range[0]) / (g.y_range[1] - g.y_range[0]) * (g.ny - 1) as f64;
        let c = self.cell as f64;
        ((fx + 0.5) * c, ((g.ny - 1) as f64 - fy + 0.5) * c)
    }

    fn put(&mut self, x: f64, y: f64, color: Rgb<u8>) {
        let (x, y) = (x.floor(), y.floor());
        if x >= 0.0 && y >= 0.0 && (x as u32) < self.img.width() && (y as u32) < self.img.height() {
            self.img.put_pixel(x as u32, y as u32, color);
        }
    }
}

pub fn render(g: &IndicatorGrid, circle: Option<(Point, f64)>) -> RgbImage {
    let (nx, ny) = (g.grid.nx, g.grid.ny);
    let cell = (TARGET_PIXELS / nx.max(ny)).max(1) as u32;
    let valid: Vec<f64> = g.values.iter().flatten().copied().collect();
    let lo = valid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = valid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut canvas = Canvas { img: RgbImage::new(nx as u32 * cell, ny as u32 * cell), cell, grid: g.grid };
    for (k, v) in g.values.iter().enumerate() {
        let (ix, iy) = ((k % nx) as u32, (k / nx) as u32);
        let c = v.map_or(INVALID, |w| color((w - lo) / span));
        let row = (ny as u32 - 1 - iy) * cell;
        for dy in 0..cell {
            for dx in 0..cell {
                canvas.img.put_pixel(ix * cell + dx, row + dy, c);
            }
        }
    }
    if let Some(z) = g.argmax() {
        let (px, py) = canvas.pixel(z);
        let arm = (2 * cell).max(4) as i32;
        for d in -arm..=arm {
            canvas.put(px + d as f64, py, MARK);
            canvas.put(px, py + d as f64, MARK);
        }
    }
    if let Some((center, radius)) = circle {
        let samples = 2048;
        for s in 0..samples {
            let t = TAU * s as f64 / samples as f64;
            let (px, py) = canvas.pixel([center[0] + radius * t.cos(), center[1] + radius * t.sin()]);
            canvas.put(px, py, MARK);
            canvas.put(px + 1.0, py, MARK);
        }
    }
    canvas.img
}
