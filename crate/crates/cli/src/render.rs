//! Trajectory plot over the vorticity field.

use cellflow_core::ensemble::Trajectory;
use cellflow_core::EnvConfig;
use image::{Rgb, RgbImage};

const MAX_SIDE: u32 = 1200;
const MARGIN: f64 = 0.5;

/// Blue for negative, white for zero, red for positive.
fn diverging(v: f64) -> Rgb<u8> {
    let v = v.clamp(-1.0, 1.0);
    let fade = |c: f64| (255.0 * c).round() as u8;
    if v >= 0.0 {
        Rgb([255, fade(1.0 - 0.8 * v), fade(1.0 - 0.8 * v)])
    } else {
        Rgb([fade(1.0 + 0.8 * v), fade(1.0 + 0.8 * v), 255])
    }
}

fn put(img: &mut RgbImage, x: i64, y: i64, color: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, color);
    }
}

/// Bresenham segment between pixel centres.
fn draw_line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: Rgb<u8>) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = ((x1 - x0).signum(), (y1 - y0).signum());
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        put(img, x, y, color);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn draw_dot(img: &mut RgbImage, (cx, cy): (i64, i64), radius: i64, color: Rgb<u8>) {
    for y in -radius..=radius {
        for x in -radius..=radius {
            if x * x + y * y <= radius * radius {
                put(img, cx + x, cy + y, color);
            }
        }
    }
}

/// Draws every trajectory (grey lines) on a background of the initial
/// vorticity, outlining the start region and marking final positions.
pub fn render_trajectories(config: &EnvConfig<f64>, trajectories: &[Trajectory<f64>]) -> RgbImage {
    let field = &config.field;
    let points = trajectories.iter().flat_map(|t| t.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, field.period(), 0.0, field.period());
    }
    let (x0, x1, y0, y1) = (x0 - MARGIN, x1 + MARGIN, y0 - MARGIN, y1 + MARGIN);
    let scale = MAX_SIDE as f64 / (x1 - x0).max(y1 - y0);
    let width = (((x1 - x0) * scale).ceil() as u32).max(1);
    let height = (((y1 - y0) * scale).ceil() as u32).max(1);

    let peak = field.peak_vorticity(0.0).max(f64::MIN_POSITIVE);
    let mut img = RgbImage::from_fn(width, height, |i, j| {
        let x = x0 + (i as f64 + 0.5) / scale;
        let y = y1 - (j as f64 + 0.5) / scale;
        diverging(field.vorticity_unchecked(x, y, 0.0) / peak)
    });
    let to_px = |x: f64, y: f64| (((x - x0) * scale).floor() as i64, ((y1 - y) * scale).floor() as i64);
    let ink = Rgb([70, 70, 70]);
    for tr in trajectories {
        for w in tr.points.windows(2) {
            draw_line(&mut img, to_px(w[0].x, w[0].y), to_px(w[1].x, w[1].y), ink);
        }
    }
    let r = &config.init_region;
    let h = r.side / 2.0;
    let corners = [
        to_px(r.center_x - h, r.center_y - h),
        to_px(r.center_x + h, r.center_y - h),
        to_px(r.center_x + h, r.center_y + h),
        to_px(r.center_x - h, r.center_y + h),
    ];
    for i in 0..4 {
        draw_line(&mut img, corners[i], corners[(i + 1) % 4], Rgb([240, 200, 0]));
    }
    for tr in trajectories {
        if let Some(last) = tr.points.last() {
            draw_dot(&mut img, to_px(last.x, last.y), 3, Rgb([90, 20, 110]));
        }
    }
    img
}
