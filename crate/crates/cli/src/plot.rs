//! Static SVG plot of an empirical tail curve against its bounds.

use std::fmt::Write;

use triplex::montecarlo::TailCurve;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Log-x, linear-y plot of frequency, its Wilson band and every bound.
pub fn tail_svg(curve: &TailCurve<f64>, title: &str) -> String {
    let xs: Vec<f64> = curve.x.iter().copied().filter(|x| *x > 0.0).collect();
    let (lo, hi) = match (xs.first(), xs.last()) {
        (Some(a), Some(b)) if b > a => (a.log10(), b.log10()),
        (Some(a), _) => (a.log10() - 0.5, a.log10() + 0.5),
        _ => (-1.0, 1.0),
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x.log10() - lo) / (hi - lo) * plot_w;
    let py = |y: f64| TOP + (1.0 - y.clamp(0.0, 1.0)) * plot_h;
    let points = |ys: &[f64]| -> String {
        curve
            .x
            .iter()
            .zip(ys)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in lo.ceil() as i32..=hi.floor() as i32 {
        let x = px(10f64.powi(k));
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, TOP + plot_h);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{k}</text>"#, TOP + plot_h + 18.0);
    }
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + plot_w);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">x</text>"#, LEFT + plot_w / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">tail probability</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let band: String = {
        let upper = points(&curve.wilson_hi);
        let lower: Vec<String> = points(&curve.wilson_lo).split(' ').rev().map(str::to_owned).collect();
        format!("{upper} {}", lower.join(" "))
    };
    let _ = writeln!(s, r##"<polygon points="{band}" fill="#bbb" fill-opacity="0.5" stroke="none"/>"##);
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#, points(&curve.freq));

    let mut legend_y = TOP + 10.0;
    let legend_x = LEFT + plot_w + 15.0;
    let _ = writeln!(s, r#"<line x1="{legend_x}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="black" stroke-width="2"/>"#, legend_x + 25.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}">empirical</text>"#, legend_x + 32.0, legend_y + 4.0);
    for (i, (id, vals)) in curve.bounds.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        legend_y += 20.0;
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 3"><title>{id}</title></polyline>"#,
            points(vals)
        );
        let _ = writeln!(s, r#"<line x1="{legend_x}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 3"/>"#, legend_x + 25.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{id}</text>"#, legend_x + 32.0, legend_y + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
