//! Minimal SVG charts: polylines and scatters with axes, ticks and a legend.
//! No plotting dependency; output is deterministic byte-for-byte, which keeps
//! rendered reports usable as golden files.

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf", "#8c564b", "#7f7f7f",
];

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 68.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 44.0;
const MARGIN_BOTTOM: f64 = 58.0;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChartConfig {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Place a tick on every integer x instead of auto-spacing.
    pub integer_x_ticks: bool,
}

impl ChartConfig {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        ChartConfig {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            integer_x_ticks: false,
        }
    }

    pub fn with_integer_x_ticks(mut self) -> Self {
        self.integer_x_ticks = true;
        self
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt_coord(v: f64) -> String {
    format!("{:.2}", v)
}

fn fmt_tick(v: f64) -> String {
    let rounded = (v * 1e6).round() / 1e6;
    if rounded == 0.0 {
        "0".to_string() // avoid "-0"
    } else {
        format!("{}", rounded)
    }
}

struct Bounds {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

fn bounds(series: &[Series]) -> Bounds {
    let mut b = Bounds {
        x_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_min: f64::INFINITY,
        y_max: f64::NEG_INFINITY,
    };
    for s in series {
        for &(x, y) in &s.points {
            b.x_min = b.x_min.min(x);
            b.x_max = b.x_max.max(x);
            b.y_min = b.y_min.min(y);
            b.y_max = b.y_max.max(y);
        }
    }
    if !b.x_min.is_finite() {
        b = Bounds {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        };
    }
    if b.x_min == b.x_max {
        b.x_min -= 0.5;
        b.x_max += 0.5;
    }
    if b.y_min == b.y_max {
        let pad = b.y_min.abs().max(1.0) * 0.1;
        b.y_min -= pad;
        b.y_max += pad;
    } else {
        let pad = (b.y_max - b.y_min) * 0.05;
        b.y_min -= pad;
        b.y_max += pad;
    }
    b
}

/// Tick step of the form {1, 2, 2.5, 5} * 10^k giving 4-7 ticks.
fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.abs().log10().floor());
    let norm = raw / mag;
    let factor = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 2.5 {
        2.5
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    factor * mag
}

fn ticks_in(min: f64, max: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = (min / step).ceil() * step;
    // snap values like 0.30000000000000004 back onto the grid
    while t <= max + step * 1e-9 {
        out.push((t / step).round() * step);
        t += step;
    }
    out
}

struct Frame {
    x_min: f64,
    y_min: f64,
    x_scale: f64,
    y_scale: f64,
}

impl Frame {
    fn new(b: &Bounds) -> Frame {
        Frame {
            x_min: b.x_min,
            y_min: b.y_min,
            x_scale: (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / (b.x_max - b.x_min),
            y_scale: (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / (b.y_max - b.y_min),
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_min) * self.x_scale
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (v - self.y_min) * self.y_scale
    }
}

fn render_frame(out: &mut String, cfg: &ChartConfig, b: &Bounds, f: &Frame) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = WIDTH,
        h = HEIGHT
    ));
    out.push_str(&format!(
        "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        WIDTH, HEIGHT
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\" font-weight=\"bold\">{}</text>\n",
        WIDTH / 2.0,
        escape(&cfg.title)
    ));

    let plot_bottom = HEIGHT - MARGIN_BOTTOM;
    let plot_right = WIDTH - MARGIN_RIGHT;
    out.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        r = plot_right,
        t = MARGIN_TOP,
        b = plot_bottom
    ));

    // x ticks
    let x_ticks: Vec<f64> = if cfg.integer_x_ticks {
        let lo = b.x_min.ceil() as i64;
        let hi = b.x_max.floor() as i64;
        (lo..=hi).map(|v| v as f64).collect()
    } else {
        ticks_in(b.x_min, b.x_max, nice_step(b.x_max - b.x_min))
    };
    let n_x = x_ticks.len();
    for (i, &t) in x_ticks.iter().enumerate() {
        let x = f.x(t);
        out.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{b}\" x2=\"{x}\" y2=\"{b2}\" stroke=\"black\"/>\n",
            x = fmt_coord(x),
            b = plot_bottom,
            b2 = plot_bottom + 5.0
        ));
        // with dense integer ticks, label every fifth (and the first)
        let label_it = !cfg.integer_x_ticks
            || n_x <= 12
            || (t as i64) % 5 == 0
            || i == 0;
        if label_it {
            out.push_str(&format!(
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{v}</text>\n",
                x = fmt_coord(x),
                y = plot_bottom + 18.0,
                v = fmt_tick(t)
            ));
        }
    }

    // y ticks
    for t in ticks_in(b.y_min, b.y_max, nice_step(b.y_max - b.y_min)) {
        let y = f.y(t);
        out.push_str(&format!(
            "<line x1=\"{l}\" y1=\"{y}\" x2=\"{l2}\" y2=\"{y}\" stroke=\"black\"/>\n",
            l = MARGIN_LEFT - 5.0,
            l2 = MARGIN_LEFT,
            y = fmt_coord(y)
        ));
        out.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{v}</text>\n",
            x = MARGIN_LEFT - 8.0,
            y = fmt_coord(y + 4.0),
            v = fmt_tick(t)
        ));
    }

    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        (MARGIN_LEFT + plot_right) / 2.0,
        HEIGHT - 14.0,
        escape(&cfg.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 {mid})\">{}</text>\n",
        (MARGIN_TOP + plot_bottom) / 2.0,
        escape(&cfg.y_label),
        mid = (MARGIN_TOP + plot_bottom) / 2.0
    ));
}

fn render_legend(out: &mut String, series: &[Series]) {
    if series.len() < 2 {
        return;
    }
    let x = WIDTH - MARGIN_RIGHT - 150.0;
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 8.0 + i as f64 * 16.0;
        let color = PALETTE[i % PALETTE.len()];
        out.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"{c}\" stroke-width=\"2\"/>\n",
            x = x,
            x2 = x + 18.0,
            y = fmt_coord(y),
            c = color
        ));
        out.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\">{t}</text>\n",
            x = x + 24.0,
            y = fmt_coord(y + 4.0),
            t = escape(&s.label)
        ));
    }
}

/// Polyline chart, one line per series.
pub fn line_chart(cfg: &ChartConfig, series: &[Series]) -> String {
    let b = bounds(series);
    let f = Frame::new(&b);
    let mut out = String::new();
    render_frame(&mut out, cfg, &b, &f);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt_coord(f.x(x)), fmt_coord(f.y(y))))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            color,
            pts.join(" ")
        ));
    }
    render_legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

/// Scatter chart, one marker color per series.
pub fn scatter_chart(cfg: &ChartConfig, series: &[Series]) -> String {
    scatter_with_lines(cfg, series, &[])
}

/// Scatter markers plus overlay polylines (reference lines, fits). Colors
/// continue through the palette after the scatter series.
pub fn scatter_with_lines(cfg: &ChartConfig, series: &[Series], lines: &[Series]) -> String {
    let all: Vec<Series> = series.iter().chain(lines).cloned().collect();
    let b = bounds(&all);
    let f = Frame::new(&b);
    let mut out = String::new();
    render_frame(&mut out, cfg, &b, &f);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for &(x, y) in &s.points {
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3.2\" fill=\"{}\" fill-opacity=\"0.75\"/>\n",
                fmt_coord(f.x(x)),
                fmt_coord(f.y(y)),
                color
            ));
        }
    }
    for (i, s) in lines.iter().enumerate() {
        let color = PALETTE[(series.len() + i) % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt_coord(f.x(x)), fmt_coord(f.y(y))))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" stroke-dasharray=\"5,4\" points=\"{}\"/>\n",
            color,
            pts.join(" ")
        ));
    }
    render_legend(&mut out, &all);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum_series(label: &str, n: usize) -> Series {
        Series::new(
            label,
            (1..=n)
                .map(|i| (i as f64, 1.0 / (i as f64)))
                .collect(),
        )
    }

    #[test]
    fn integer_ticks_cover_every_component() {
        let cfg = ChartConfig::new("spectrum", "component", "alignment").with_integer_x_ticks();
        let svg = line_chart(&cfg, &[spectrum_series("kernel", 30)]);
        // one tick mark per component: count tick lines at the bottom axis
        let tick_count = svg
            .matches(&format!("y2=\"{}\"", HEIGHT - MARGIN_BOTTOM + 5.0))
            .count();
        assert_eq!(tick_count, 30);
    }

    #[test]
    fn one_polyline_per_series() {
        let cfg = ChartConfig::new("spectrum", "component", "alignment").with_integer_x_ticks();
        let single = line_chart(&cfg, &[spectrum_series("kernel", 10)]);
        assert_eq!(single.matches("<polyline").count(), 1);

        let multi = line_chart(
            &cfg,
            &[
                spectrum_series("kernel", 10),
                spectrum_series("landmarks 100", 10),
                spectrum_series("landmarks 200", 10),
            ],
        );
        assert_eq!(multi.matches("<polyline").count(), 3);
        assert!(multi.contains("landmarks 200"));
    }

    #[test]
    fn deterministic_bytes() {
        let cfg = ChartConfig::new("t", "x", "y");
        let series = vec![Series::new("a", vec![(0.0, 0.3), (1.0, 0.7), (2.0, 0.1)])];
        assert_eq!(line_chart(&cfg, &series), line_chart(&cfg, &series));
        assert_eq!(scatter_chart(&cfg, &series), scatter_chart(&cfg, &series));
    }

    #[test]
    fn escapes_labels() {
        let cfg = ChartConfig::new("a < b & c", "x", "y");
        let svg = scatter_chart(&cfg, &[Series::new("s", vec![(0.0, 0.0)])]);
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(!svg.contains("a < b & c"));
    }

    #[test]
    fn degenerate_ranges_still_render() {
        let cfg = ChartConfig::new("flat", "x", "y");
        let svg = line_chart(&cfg, &[Series::new("s", vec![(1.0, 2.0), (1.0, 2.0)])]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        let empty = line_chart(&cfg, &[]);
        assert!(empty.contains("</svg>"));
    }
}
