use std::fmt::Write;

use crate::curve::CurvePoint;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Standalone SVG of mean risk against `n` (log scale) with one-standard-deviation bars.
pub fn curve_svg(title: &str, series: &[(String, Vec<&CurvePoint>)]) -> String {
    let all: Vec<&CurvePoint> = series.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    let (nmin, nmax) = all.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.n as f64), hi.max(p.n as f64)));
    let ymax = all.iter().fold(1.0f64, |m, p| m.max(p.mean_risk + p.std_risk)) * 1.05;
    let (lx0, lx1) = (nmin.max(1.0).log10(), nmax.max(nmin * 10.0).max(1.0).log10());
    let span = if lx1 > lx0 { lx1 - lx0 } else { 1.0 };
    let px = |n: f64| LEFT + (n.log10() - lx0) / span * (W - LEFT - RIGHT);
    let py = |r: f64| TOP + (1.0 - r.clamp(0.0, ymax) / ymax) * (H - TOP - BOTTOM);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black"/>"#);
    for e in lx0.floor() as i32..=lx1.ceil() as i32 {
        let v = 10f64.powi(e);
        if v < nmin.max(1.0) * 0.999 || v > nmax * 1.001 {
            continue;
        }
        let x = px(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{y1}" x2="{x:.1}" y2="{}" stroke="black"/><text x="{x:.1}" y="{}" text-anchor="middle">1e{e}</text>"#,
            y1 + 5.0,
            y1 + 18.0
        );
    }
    for k in 0..=4 {
        let r = ymax * k as f64 / 4.0;
        let y = py(r);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.1}" x2="{x0}" y2="{y:.1}" stroke="black"/><text x="{}" y="{:.1}" text-anchor="end">{r:.2}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#, (x0 + x1) / 2.0, H - 12.0);
    let _ =
        writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">test risk</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0);
    for (i, (name, pts)) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", px(p.n as f64), py(p.mean_risk))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, path.join(" "));
        for p in pts {
            let x = px(p.n as f64);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{c}"/><circle cx="{x:.1}" cy="{:.1}" r="2.5" fill="{c}"/>"#,
                py(p.mean_risk - p.std_risk),
                py(p.mean_risk + p.std_risk),
                py(p.mean_risk)
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x1 + 15.0,
            x1 + 35.0,
            x1 + 40.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series() {
        let p = |n, m| CurvePoint { arch: "A".into(), kernel: "k".into(), target: "t".into(), n, seeds: 2, mean_risk: m, std_risk: 0.1 };
        let pts = [p(10, 1.0), p(100, 0.5), p(1000, 0.01)];
        let svg = curve_svg("t <1>", &[("A".into(), pts.iter().collect())]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("t &lt;1&gt;"));
        assert!(svg.contains(">1e2<"));
    }
}
