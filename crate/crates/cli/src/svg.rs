//! Single-stroke SVG rendering of a polyline.

use std::fmt::Write as _;

use anglewalk::{Error, Point2, Polyline, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub width: u32,
    pub height: u32,
    /// Stroke width in pixels.
    pub stroke_width: f64,
    /// Padding around the data, as a fraction of the larger data extent.
    pub margin: f64,
    /// Restrict to vertices with `t_k` in `[t_min, t_max]`.
    pub zoom_window: Option<(f64, f64)>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            width: 800,
            height: 800,
            stroke_width: 1.0,
            margin: 0.05,
            zoom_window: None,
        }
    }
}

impl RenderOptions {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("SVG dimensions must be positive".into()));
        }
        if !(self.stroke_width > 0.0 && self.stroke_width.is_finite()) {
            return Err(Error::InvalidArgument("stroke width must be positive".into()));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::InvalidArgument("margin must be non-negative".into()));
        }
        if let Some((lo, hi)) = self.zoom_window {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "zoom window must satisfy 0 ≤ t_min < t_max ≤ 1, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

/// Vertex index range covered by the zoom window.
fn window_range(n: usize, window: Option<(f64, f64)>) -> (usize, usize) {
    match window {
        None => (0, n),
        Some((lo, hi)) => {
            let nf = n as f64;
            // slack so that e.g. 0.1·1000 lands on vertex 100
            let first = (lo * nf - 1e-9).ceil().max(0.0) as usize;
            let last = ((hi * nf + 1e-9).floor() as usize).min(n);
            (first, last)
        }
    }
}

/// Render the path as an SVG document with one `polyline` element.
///
/// The y axis is flipped so the picture has the usual mathematical
/// orientation.
pub fn svg_render(path: &Polyline, opts: &RenderOptions) -> Result<String> {
    opts.validate()?;
    let (first, last) = window_range(path.n(), opts.zoom_window);
    let pts: Vec<Point2> = path
        .vertices()
        .get(first..=last.max(first))
        .unwrap_or(&[])
        .iter()
        .map(|p| Point2::new(p.x, -p.y))
        .collect();
    if pts.len() < 2 {
        return Err(Error::EmptyInput("zoom window holds fewer than two vertices"));
    }

    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let mut extent = (max_x - min_x).max(max_y - min_y);
    if extent <= 0.0 {
        extent = 1.0;
    }
    let pad = opts.margin * extent;
    let digits = (6 - extent.log10().floor() as i32).clamp(0, 15) as usize;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"{:.d$} {:.d$} {:.d$} {:.d$}\">",
        opts.width,
        opts.height,
        min_x - pad,
        min_y - pad,
        max_x - min_x + 2.0 * pad,
        max_y - min_y + 2.0 * pad,
        d = digits
    );
    let _ = write!(
        svg,
        "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"{}\" vector-effect=\"non-scaling-stroke\" points=\"",
        opts.stroke_width
    );
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            svg.push(' ');
        }
        let _ = write!(svg, "{:.d$},{:.d$}", p.x, p.y, d = digits);
    }
    svg.push_str("\"/>\n</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(n: usize) -> Polyline {
        Polyline::from_vertices((0..=n).map(|k| Point2::new(k as f64, 0.0)).collect(), 1.0).unwrap()
    }

    fn points_attr(doc: &roxmltree::Document<'_>) -> Vec<String> {
        let poly = doc
            .descendants()
            .find(|n| n.has_tag_name("polyline"))
            .expect("polyline element");
        poly.attribute("points").unwrap().split(' ').map(String::from).collect()
    }

    #[test]
    fn two_vertices_give_one_segment() {
        let svg = svg_render(&straight(1), &RenderOptions::default()).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 1);
        assert_eq!(points_attr(&doc).len(), 2);
    }

    #[test]
    fn zoom_window_selects_vertices() {
        let path = straight(1000);
        let opts = RenderOptions {
            zoom_window: Some((0.0, 0.1)),
            ..Default::default()
        };
        let svg = svg_render(&path, &opts).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(points_attr(&doc).len(), 101);

        let opts = RenderOptions {
            zoom_window: Some((0.25, 0.5)),
            ..Default::default()
        };
        let doc_svg = svg_render(&path, &opts).unwrap();
        let doc = roxmltree::Document::parse(&doc_svg).unwrap();
        assert_eq!(points_attr(&doc).len(), 251);
    }

    #[test]
    fn viewbox_contains_data() {
        let path = Polyline::from_vertices(vec![Point2::new(0.0, 0.0), Point2::new(2.0, 1.0)], 1.0).unwrap();
        let svg = svg_render(&path, &RenderOptions::default()).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let vb: Vec<f64> = doc
            .root_element()
            .attribute("viewBox")
            .unwrap()
            .split(' ')
            .map(|v| v.parse().unwrap())
            .collect();
        assert!((vb[0] + 0.1).abs() < 1e-9 && (vb[1] + 1.1).abs() < 1e-9);
        assert!((vb[2] - 2.2).abs() < 1e-9 && (vb[3] - 1.2).abs() < 1e-9);
    }

    #[test]
    fn rendering_is_deterministic() {
        let path = Polyline::from_vertices(
            (0..500).map(|k| Point2::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos())).collect(),
            1.0,
        )
        .unwrap();
        let opts = RenderOptions::default();
        assert_eq!(svg_render(&path, &opts).unwrap(), svg_render(&path, &opts).unwrap());
    }

    #[test]
    fn rejects_bad_options() {
        let path = straight(10);
        for window in [(0.5, 0.5), (-0.1, 0.5), (0.2, 1.5)] {
            let opts = RenderOptions {
                zoom_window: Some(window),
                ..Default::default()
            };
            assert!(svg_render(&path, &opts).is_err());
        }
        let opts = RenderOptions {
            zoom_window: Some((0.01, 0.02)),
            ..Default::default()
        };
        assert!(matches!(svg_render(&path, &opts), Err(Error::EmptyInput(_))));
        let opts = RenderOptions { width: 0, ..Default::default() };
        assert!(svg_render(&path, &opts).is_err());
    }
}
