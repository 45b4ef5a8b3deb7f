//! Minimal hand-rolled SVG polyline plot for |mean| vs N on log-log axes.

pub fn loglog_polyline(points: &[(f64, f64)], title: &str) -> String {
    let w = 640.0;
    let h = 420.0;
    let ml = 70.0;
    let mr = 20.0;
    let mt = 40.0;
    let mb = 50.0;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p.1.max(1e-16).log10())
        .collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| ml + (x - x0) / (x1 - x0).max(1e-9) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0).max(1e-9) * (h - mt - mb);
    let mut path = String::new();
    for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
        if i > 0 {
            path.push(' ');
        }
        path.push_str(&format!("{:.2},{:.2}", px(x), py(y)));
    }
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{}</text>\n",
        ml,
        xml_escape(title)
    ));
    // axes
    out.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb
    ));
    out.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">log10 N: {:.1} .. {:.1}</text>\n",
        ml,
        h - mb + 30.0,
        x0,
        x1
    ));
    out.push_str(&format!(
        "<text x=\"6\" y=\"{mt}\" font-family=\"monospace\" font-size=\"12\">log10 |mean|: {y0:.1} .. {y1:.1}</text>\n"
    ));
    out.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{path}\"/>\n"
    ));
    out.push_str("</svg>\n");
    out
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
