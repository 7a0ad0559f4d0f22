//! Equirectangular SVG heatmaps: one rectangle per grid cell, categorical
//! palette for region ids, sequential palette with a min/max legend for
//! continuous fields.

use std::fmt::Write;

/// Distinct fills for categorical (region) maps; cycled past 12 regions.
const CATEGORICAL_PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac", "#1f77b4", "#8c564b",
];

/// Sequential palette stops, low to high.
const SEQUENTIAL_STOPS: [(f64, f64, f64); 4] = [
    (68.0, 1.0, 84.0),
    (49.0, 104.0, 142.0),
    (53.0, 183.0, 121.0),
    (253.0, 231.0, 37.0),
];

const CELL_PX: f64 = 16.0;
const MARGIN: f64 = 12.0;
const LEGEND_WIDTH: f64 = 150.0;

fn sequential_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (SEQUENTIAL_STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(SEQUENTIAL_STOPS.len() - 2);
    let f = t - i as f64;
    let (r0, g0, b0) = SEQUENTIAL_STOPS[i];
    let (r1, g1, b1) = SEQUENTIAL_STOPS[i + 1];
    format!(
        "#{:02x}{:02x}{:02x}",
        (r0 + (r1 - r0) * f).round() as u8,
        (g0 + (g1 - g0) * f).round() as u8,
        (b0 + (b1 - b0) * f).round() as u8,
    )
}

/// Smallest positive gap between sorted distinct coordinates; falls back to
/// 2.5° when there is only one.
fn infer_resolution(mut coords: Vec<f64>) -> Option<f64> {
    coords.sort_by(f64::total_cmp);
    coords.dedup();
    coords
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > 0.0)
        .min_by(f64::total_cmp)
}

/// Render cells as an SVG 1.1 document. Each data cell is a
/// `class="cell"` rectangle; the legend sits to the right.
pub fn render(cells: &[(f64, f64, f64)], field: &str, categorical: bool) -> String {
    let lats: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let lons: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let res = infer_resolution(lats.clone())
        .into_iter()
        .chain(infer_resolution(lons.clone()))
        .min_by(f64::total_cmp)
        .unwrap_or(2.5);
    let min_lat = lats.iter().copied().fold(f64::INFINITY, f64::min);
    let max_lat = lats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_lon = lons.iter().copied().fold(f64::INFINITY, f64::min);
    let max_lon = lons.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let grid_w = ((max_lon - min_lon) / res + 1.0) * CELL_PX;
    let grid_h = ((max_lat - min_lat) / res + 1.0) * CELL_PX;

    let min_v = cells.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let max_v = cells.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);

    let mut regions: Vec<i64> = if categorical {
        cells.iter().map(|c| c.2.round() as i64).collect()
    } else {
        Vec::new()
    };
    regions.sort_unstable();
    regions.dedup();

    let legend_h = if categorical {
        20.0 * regions.len() as f64 + 24.0
    } else {
        140.0
    };
    let width = MARGIN * 2.0 + grid_w + LEGEND_WIDTH;
    let height = MARGIN * 2.0 + grid_h.max(legend_h);

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {width} {height}">"#
    );
    let _ = write!(
        svg,
        r##"<title>{field}</title><rect width="{width}" height="{height}" fill="#ffffff"/>"##
    );

    for &(lat, lon, value) in cells {
        let x = MARGIN + (lon - min_lon) / res * CELL_PX;
        let y = MARGIN + (max_lat - lat) / res * CELL_PX;
        let fill = if categorical {
            let region = value.round() as i64;
            let idx = regions.iter().position(|&r| r == region).unwrap();
            CATEGORICAL_PALETTE[idx % CATEGORICAL_PALETTE.len()].to_string()
        } else if max_v > min_v {
            sequential_color((value - min_v) / (max_v - min_v))
        } else {
            sequential_color(0.5)
        };
        let _ = write!(
            svg,
            r#"<rect class="cell" x="{x}" y="{y}" width="{CELL_PX}" height="{CELL_PX}" fill="{fill}"><title>({lat}, {lon}): {value}</title></rect>"#
        );
    }

    // Legend.
    let lx = MARGIN + grid_w + 24.0;
    let _ = write!(
        svg,
        r#"<text x="{lx}" y="{}" font-family="sans-serif" font-size="12" font-weight="bold">{field}</text>"#,
        MARGIN + 10.0
    );
    if categorical {
        for (i, region) in regions.iter().enumerate() {
            let y = MARGIN + 24.0 + 20.0 * i as f64;
            let fill = CATEGORICAL_PALETTE[i % CATEGORICAL_PALETTE.len()];
            let _ = write!(
                svg,
                r#"<rect class="legend-swatch" x="{lx}" y="{y}" width="14" height="14" fill="{fill}"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">region {region}</text>"#,
                lx + 20.0,
                y + 11.0
            );
        }
    } else {
        let bar_h = 100.0;
        let y0 = MARGIN + 24.0;
        let _ = write!(
            svg,
            r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">"#
        );
        for i in 0..=8 {
            let t = i as f64 / 8.0;
            let _ = write!(
                svg,
                r#"<stop offset="{}%" stop-color="{}"/>"#,
                t * 100.0,
                sequential_color(t)
            );
        }
        let _ = write!(
            svg,
            r#"</linearGradient></defs><rect class="legend-bar" x="{lx}" y="{y0}" width="14" height="{bar_h}" fill="url(#scale)"/>"#
        );
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{max_v}</text><text x="{}" y="{}" font-family="sans-serif" font-size="11">{min_v}</text>"#,
            lx + 20.0,
            y0 + 10.0,
            lx + 20.0,
            y0 + bar_h
        );
    }
    svg.push_str("</svg>");
    svg
}
