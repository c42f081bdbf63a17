//! Minimal SVG rendering of polygon families.

use teich::FlatSurface;

/// Draw the polygons of several surfaces in one coordinate frame.
///
/// Polygon `i` of every surface shares a horizontal slot so that a surface
/// and its deformations overlay for visual comparison.
pub fn render(layers: &[(&str, &FlatSurface, &str)]) -> String {
    let slots = layers.iter().map(|(_, s, _)| s.polygons().len()).max().unwrap_or(0);
    // Slot widths from the widest polygon across layers.
    let mut slot_width = vec![0.0f64; slots];
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    let mut min_x0 = f64::INFINITY;
    for (_, surface, _) in layers {
        for (i, p) in surface.polygons().iter().enumerate() {
            let vs = p.vertices();
            let lo = vs.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
            let hi = vs.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
            slot_width[i] = slot_width[i].max(hi - lo);
            min_x0 = min_x0.min(lo);
            min_y = min_y.min(vs.iter().map(|v| v.im).fold(f64::INFINITY, f64::min));
            max_y = max_y.max(vs.iter().map(|v| v.im).fold(f64::NEG_INFINITY, f64::max));
        }
    }
    let gap = 0.25 * slot_width.iter().cloned().fold(1.0, f64::max);
    let mut offsets = Vec::with_capacity(slots);
    let mut acc = 0.0;
    for w in &slot_width {
        offsets.push(acc);
        acc += w + gap;
    }
    let width = (acc - gap).max(1.0);
    let height = (max_y - min_y).max(1.0);
    let margin = 0.1 * width.max(height);

    let mut body = String::new();
    for (name, surface, color) in layers {
        for (i, p) in surface.polygons().iter().enumerate() {
            let pts: Vec<String> = p
                .vertices()
                .iter()
                .map(|v| format!("{},{}", v.re - min_x0 + offsets[i], max_y - v.im))
                .collect();
            body.push_str(&format!(
                "  <polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"{}\" stroke-width=\"{}\"><title>{} {}</title></polygon>\n",
                pts.join(" "),
                color,
                color,
                0.01 * width.max(height),
                name,
                p.label,
            ));
        }
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n{}</svg>\n",
        -margin,
        -margin,
        width + 2.0 * margin,
        height + 2.0 * margin,
        body
    )
}
