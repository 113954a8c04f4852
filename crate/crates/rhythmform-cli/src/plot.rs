//! Minimal SVG renderings. Pure presentation: no analysis logic, no
//! timestamps, deterministic output.

use rhythmform::dynamics::ComplexitySeries;
use rhythmform::score::Annotation;
use rhythmform::visibility::louvain::Partition;
use rhythmform::visibility::DurationSeries;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 40.0;

const PALETTE: [&str; 10] = [
    "#7b3294", "#1b9e77", "#377eb8", "#e6ab02", "#d95f02", "#66a61e", "#e7298a", "#a6761d",
    "#666666", "#e41a1c",
];

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn polyline(points: &[(f64, f64)], stroke: &str) -> String {
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Line chart of the windowed heterogeneity (black) and syncopation (gray)
/// with section annotations drawn as vertical markers.
pub fn series_svg(series: &ComplexitySeries, annotations: &[Annotation]) -> String {
    let mut out = header();
    let n = series.entries.len().max(1);
    let x_of = |measure: f64| {
        let last = series.entries.last().map(|e| e.start_measure as f64).unwrap_or(1.0).max(1.0);
        MARGIN + (WIDTH - 2.0 * MARGIN) * measure / last.max(measure.max(1.0))
    };
    let y_of = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * v.clamp(0.0, 1.0);

    // axes
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN
    ));

    for annotation in annotations {
        let x = x_of(annotation.measure as f64);
        out.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{t}\" x2=\"{x:.1}\" y2=\"{b}\" stroke=\"#b0006d\" \
             stroke-dasharray=\"4 3\"/>\n<text x=\"{x:.1}\" y=\"{ty}\" font-size=\"10\" \
             fill=\"#b0006d\">{label}</text>\n",
            t = MARGIN,
            b = HEIGHT - MARGIN,
            ty = MARGIN - 6.0,
            label = annotation.label
        ));
    }

    let h_points: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter_map(|e| e.heterogeneity.map(|h| (x_of(e.start_measure as f64), y_of(h))))
        .collect();
    let q_points: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter_map(|e| e.syncopation.map(|q| (x_of(e.start_measure as f64), y_of(q))))
        .collect();
    if h_points.len() > 1 {
        out.push_str(&polyline(&h_points, "black"));
    }
    if q_points.len() > 1 {
        out.push_str(&polyline(&q_points, "#888888"));
    }
    out.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" font-size=\"11\">heterogeneity (black), syncopation (gray); \
         {n} windows</text>\n",
        x = MARGIN,
        y = HEIGHT - 8.0
    ));
    out.push_str("</svg>\n");
    out
}

/// Bar chart of the duration series colored by community.
pub fn partition_svg(series: &DurationSeries, partition: &Partition) -> String {
    let mut out = header();
    let n = series.len().max(1);
    let max_v = series.values().iter().copied().max().unwrap_or(1) as f64;
    let bar_w = (WIDTH - 2.0 * MARGIN) / n as f64;
    for (i, &v) in series.values().iter().enumerate() {
        let h = (HEIGHT - 2.0 * MARGIN) * v as f64 / max_v;
        let x = MARGIN + i as f64 * bar_w;
        let y = HEIGHT - MARGIN - h;
        let color = PALETTE[partition.community_of(i) % PALETTE.len()];
        out.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"{h:.1}\" fill=\"{color}\"/>\n",
            w = (bar_w * 0.9).max(0.5)
        ));
    }
    out.push_str("</svg>\n");
    out
}
