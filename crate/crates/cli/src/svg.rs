//! Static SVG rendering of a single raster: one row per dimension, one tick per spike.

use std::fmt::Write;

use word2spike::SpikeRaster;

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;

pub fn render_raster(word: &str, raster: &SpikeRaster) -> String {
    let rows = raster.dims().max(1) as f64;
    let row_h = (600.0 / rows).clamp(2.0, 12.0);
    let height = rows * row_h + 2.0 * MARGIN;
    let scale = (WIDTH - 2.0 * MARGIN) / raster.window_s();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="{}" font-family="monospace" font-size="14">{} ({} dims, {} ms)</text>"#,
        MARGIN * 0.6,
        escape(word),
        raster.dims(),
        raster.window_s() * 1000.0
    );
    let _ = writeln!(svg, r#"<g stroke="black" stroke-width="1">"#);
    for (d, train) in raster.trains().iter().enumerate() {
        let y0 = MARGIN + d as f64 * row_h;
        let y1 = y0 + row_h * 0.8;
        for &t in train {
            let x = MARGIN + t * scale;
            let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}"/>"#);
        }
    }
    let _ = writeln!(svg, "</g>");
    let axis_y = height - MARGIN + 4.0;
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="gray"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(svg, "</svg>");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_line_per_spike() {
        let r = SpikeRaster::new(0.2, vec![vec![0.01, 0.05], vec![], vec![0.1]]).unwrap();
        let svg = render_raster("a<b", &r);
        assert_eq!(svg.matches("<line x1").count(), 3 + 1);
        assert!(svg.contains("a&lt;b"));
    }
}
